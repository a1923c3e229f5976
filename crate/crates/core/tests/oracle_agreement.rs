//! Closed forms and main-path integrals against the brute-force oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use widthlab::approx::families;
use widthlab::haar::PiecewisePolynomial;
use widthlab::oracle::{grid_integral, haar_coefficient_direct, mc_integral};
use widthlab::{
    best_l2_family, compute_i2, haar_coefficient, pack_lq_norm_q, x_profile, z_gram, CoefVector,
    DyadicIndex, LevelRange, ScanGrid, StepParam, ZConstants,
};

fn random_quadratic(rng: &mut ChaCha8Rng, level: u32) -> PiecewisePolynomial {
    let cells = 1u64 << level;
    let mut bps = vec![0.0];
    bps.extend((1..cells).filter(|_| rng.random_bool(0.4)).map(|i| i as f64 / cells as f64));
    bps.push(1.0);
    let pieces: Vec<[f64; 3]> = (1..bps.len())
        .map(|_| [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)])
        .collect();
    let n = pieces.len();
    PiecewisePolynomial::new(bps, pieces, vec![false; n]).unwrap()
}

#[test]
fn integrate_exact_within_four_standard_errors() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for case in 0..20 {
        let f = random_quadratic(&mut rng, 5);
        let mc = mc_integral(|t| f.eval(t), 200_000, 1000 + case).unwrap();
        let exact = f.integrate_exact();
        assert!(mc.agrees_with(exact, 4.0), "case {case}: {exact} vs {mc:?}");
    }
}

#[test]
fn pack_norm_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k in 0..=8u32 {
        let range = LevelRange::new(k, k).unwrap();
        for _ in 0..100 {
            let q = rng.random_range(2.1..9.0);
            let x = CoefVector::from_fn(range, |_| rng.random_range(-1.0..1.0));
            let f = widthlab::haar::synthesize(&x);
            let grid = grid_integral(|t| f.eval(t).abs().powf(q), k + 4).unwrap().value;
            let pack = pack_lq_norm_q(&x, k, q).unwrap();
            assert!((pack - grid).abs() <= 1e-9 * grid, "k {k}: {pack} vs {grid}");
        }
    }
}

#[test]
fn step_profiles_on_a_thousand_cases() {
    const RES: u32 = 14;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..1000 {
        let k = rng.random_range(0..RES);
        let idx = DyadicIndex::new(k, rng.random_range(1..=1u64 << k)).unwrap();
        // t on the oracle grid makes the direct rule exact for the step
        let t = StepParam::new(rng.random_range(0..=1u64 << RES) as f64 / (1u64 << RES) as f64).unwrap();
        let chi = t.step_function();
        let direct = haar_coefficient_direct(|s| chi.eval(s), idx, RES).unwrap();
        assert!((x_profile(idx, t) - direct).abs() < 1e-10, "{idx:?} t {}: {} vs {direct}", t.get(), x_profile(idx, t));
        assert!((x_profile(idx, t) - haar_coefficient(&chi, idx).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn direct_coefficients_agree_on_grid_aligned_functions() {
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    for _ in 0..1000 {
        let f = random_quadratic(&mut rng, 6);
        let k = rng.random_range(0..=9u32);
        let idx = DyadicIndex::new(k, rng.random_range(1..=1u64 << k)).unwrap();
        let main = haar_coefficient(&f, idx).unwrap();
        let direct = haar_coefficient_direct(|t| f.eval(t), idx, 6.max(k + 1)).unwrap();
        assert!((main - direct).abs() <= 1e-10, "{idx:?}: {main} vs {direct}");
    }
}

#[test]
fn oracle_examples() {
    let q = haar_coefficient_direct(|t| if t < 0.25 { 1.0 } else { -1.0 }, DyadicIndex::new(0, 1).unwrap(), 2).unwrap();
    assert!((q - 0.5).abs() < 1e-15);
    let h = DyadicIndex::new(3, 2).unwrap();
    let hf = widthlab::haar::haar_function(h);
    assert!((haar_coefficient_direct(|t| hf.eval(t), h, 4).unwrap() - 1.0).abs() < 1e-15);
    let c = ZConstants::standard();
    let i01 = DyadicIndex::new(0, 1).unwrap();
    let xz = grid_integral(|t| x_profile(i01, StepParam::new(t).unwrap()) * c.z_profile(i01, StepParam::new(t).unwrap()), 1)
        .unwrap()
        .value;
    assert!((xz - 1.0 / 12f64.sqrt()).abs() < 1e-15);
    let (a, b) = (DyadicIndex::new(2, 1).unwrap(), DyadicIndex::new(2, 2).unwrap());
    let mc = mc_integral(|t| c.z_profile(a, StepParam::new(t).unwrap()) * c.z_profile(b, StepParam::new(t).unwrap()), 1_000_000, 9)
        .unwrap();
    assert!(mc.agrees_with(z_gram(a, b), 4.0));
}

/// `I2 = ∫ <Π_V X(t), Z(t)>_w dt` for an 8-dimensional random subspace by
/// plain Monte Carlo over `t`.
#[test]
fn i2_against_monte_carlo() {
    let range = LevelRange::new(3, 5).unwrap();
    let v = families::random_subspace(8, range, 4).unwrap();
    let family = best_l2_family(&v);
    let exact = compute_i2(&family, ScanGrid::default());
    assert!(exact.exact);
    let consts = ZConstants::standard();
    let w = range.weights();
    let integrand = |t: f64| {
        let h = v.combine(&family.coefficients(t));
        let z = consts.z_vector(StepParam::new(t).unwrap(), range);
        h.as_slice().iter().zip(z.as_slice()).zip(&w).map(|((a, b), wk)| wk * a * b).sum::<f64>()
    };
    let mc = mc_integral(integrand, 1_000_000, 12).unwrap();
    assert!(mc.agrees_with(exact.value, 4.0), "{} vs {mc:?}", exact.value);
}
