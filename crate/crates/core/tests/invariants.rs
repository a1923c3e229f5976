use proptest::prelude::*;
use widthlab::approx::families;
use widthlab::haar::{analyze, synthesize};
use widthlab::oracle::grid_integral;
use widthlab::{
    haar_coefficient, project, weighted_inner, weighted_norm, x_profile, CoefVector, DyadicIndex,
    LevelRange, StepParam,
};

fn range_strategy(max_k1: u32) -> impl Strategy<Value = LevelRange> {
    (0..=max_k1).prop_flat_map(|k1| (0..=k1).prop_map(move |k0| LevelRange::new(k0, k1).unwrap()))
}

fn vector_in(range: LevelRange) -> impl Strategy<Value = CoefVector> {
    prop::collection::vec(-2.0f64..2.0, range.dim()).prop_map(move |c| CoefVector::new(range, c).unwrap())
}

fn pair_strategy() -> impl Strategy<Value = (CoefVector, CoefVector)> {
    range_strategy(6).prop_flat_map(|r| (vector_in(r), vector_in(r)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn holder_inequality_for_weighted_norms((x, y) in pair_strategy(), q in 2.05f64..10.0) {
        let inner = weighted_inner(&x, &y).unwrap().abs();
        for p in [2.0, q, q / (q - 1.0)] {
            let conj = p / (p - 1.0);
            let bound = weighted_norm(&x, p).unwrap() * weighted_norm(&y, conj).unwrap();
            prop_assert!(inner <= bound * (1.0 + 1e-12) + 1e-300, "p = {p}: {inner} > {bound}");
        }
    }

    #[test]
    fn parseval_on_truncated_spans(x in range_strategy(7).prop_flat_map(vector_in)) {
        let f = synthesize(&x);
        let energy = grid_integral(|t| f.eval(t).powi(2), x.range().cell_level()).unwrap().value;
        let coef = weighted_inner(&x, &x).unwrap();
        prop_assert!((energy - coef).abs() <= 1e-12 * coef.max(1e-300), "{energy} vs {coef}");
        let back = analyze(&f, x.range()).unwrap();
        for (a, b) in back.as_slice().iter().zip(x.as_slice()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_symmetric_and_idempotent(
        (x, y) in pair_strategy(),
        seed in any::<u64>(),
        frac in 0.0f64..1.0,
    ) {
        let range = x.range();
        let dim = ((range.dim() as f64 * frac) as usize).max(1);
        let v = families::random_subspace(dim, range, seed).unwrap();
        let px = project(&v, &x).unwrap();
        let py = project(&v, &y).unwrap();
        let lhs = weighted_inner(&px, &y).unwrap();
        let rhs = weighted_inner(&x, &py).unwrap();
        let scale = weighted_norm(&x, 2.0).unwrap() * weighted_norm(&y, 2.0).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * scale.max(1e-300));
        let ppx = project(&v, &px).unwrap();
        prop_assert!(weighted_norm(&ppx.sub(&px).unwrap(), 2.0).unwrap() <= 1e-10 * weighted_norm(&x, 2.0).unwrap().max(1e-300));
        // Pythagoras: the residual is orthogonal to the projection
        let r = x.sub(&px).unwrap();
        prop_assert!(weighted_inner(&r, &px).unwrap().abs() <= 1e-10 * scale.max(1e-300) + 1e-12);
    }

    #[test]
    fn step_profile_matches_haar_coefficient(k in 0u32..16, jfrac in 0.0f64..1.0, t in 0.0f64..=1.0) {
        let j = ((jfrac * (1u64 << k) as f64) as u64 + 1).min(1u64 << k);
        let idx = DyadicIndex::new(k, j).unwrap();
        let t = StepParam::new(t).unwrap();
        let direct = haar_coefficient(&t.step_function(), idx).unwrap();
        prop_assert!((x_profile(idx, t) - direct).abs() < 1e-12);
    }
}

#[test]
fn projection_onto_full_span_is_identity() {
    let range = LevelRange::new(2, 4).unwrap();
    let v = families::full_space(range);
    let x = CoefVector::from_fn(range, |i| (i.k() as f64) - 0.1 * i.j() as f64);
    let px = project(&v, &x).unwrap();
    for (a, b) in px.as_slice().iter().zip(x.as_slice()) {
        assert!((a - b).abs() < 1e-12);
    }
}
