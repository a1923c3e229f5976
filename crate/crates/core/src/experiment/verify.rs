//! The identity suite behind `widthlab verify`.
//!
//! Each check compares a closed form against an exact piecewise computation
//! and, where the closed form is an integral, against the independent grid
//! oracle. The Z constants are a parameter so a deliberately wrong scale can
//! be used to confirm the suite notices.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::approx::{families, Subspace};
use crate::certificate::{compute_i1, compute_i3, i3_growth_constant, projected_isotropy, sup_x_energy};
use crate::error::{Error, Result};
use crate::haar::{
    analyze, haar_coefficient, level_weight, synthesize, weighted_inner, CoefVector, DyadicIndex,
    LevelRange, PiecewisePolynomial,
};
use crate::oracle::{graded_integral_on, grid_integral, grid_integral_on, haar_coefficient_direct};
use crate::profiles::{isotropy_integral, x_profile, xz_integral, z_gram, z_gram_integrated, z_moments_with, StepParam, ZConstants};

/// Largest `k1` the exact suites accept.
pub const K1_CAP: u32 = 12;

const GRAM_LEVELS: u32 = 7;
const I3_LEVELS: u32 = 10;
const I3_EXPONENTS: [f64; 4] = [2.5, 3.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub k1_max: u32,
    pub seed: u64,
    pub consts: ZConstants,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { k1_max: K1_CAP, seed: 7, consts: ZConstants::standard() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    /// The worst case, in words.
    pub worst: String,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
    pub k1_max: u32,
    pub seed: u64,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn human(&self) -> String {
        let mut s = format!("identity suite (k1 <= {}, seed {})\n", self.k1_max, self.seed);
        for c in &self.checks {
            let _ = writeln!(
                s,
                "  {:<4} {:<22} cases {:>6}  max err {:.3e}  tol {:.1e}  worst: {}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.max_error,
                c.tolerance,
                c.worst
            );
        }
        let failed = self.failures().count();
        let _ = writeln!(s, "{} of {} checks passed", self.checks.len() - failed, self.checks.len());
        s
    }

    pub fn machine(&self) -> String {
        let mut s = String::from("check,passed,cases,max_error,tolerance\n");
        for c in &self.checks {
            let _ = writeln!(s, "{},{},{},{:.16e},{:.16e}", c.name, c.passed(), c.cases, c.max_error, c.tolerance);
        }
        s
    }
}

/// Running maximum of an error measure with the case that produced it.
struct Tracker {
    name: &'static str,
    tolerance: f64,
    cases: usize,
    max_error: f64,
    worst: String,
}

impl Tracker {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, cases: 0, max_error: 0.0, worst: String::from("-") }
    }

    fn record(&mut self, err: f64, what: impl FnOnce() -> String) {
        self.cases += 1;
        // NaN must count as a failure
        if !(err <= self.max_error) {
            self.max_error = if err.is_nan() { f64::INFINITY } else { err };
            self.worst = what();
        }
    }

    fn finish(self) -> Check {
        Check {
            name: self.name,
            cases: self.cases,
            max_error: self.max_error,
            tolerance: self.tolerance,
            worst: self.worst,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn step(t: f64) -> StepParam {
    StepParam::new(t.clamp(0.0, 1.0)).expect("clamped")
}

fn indices_up_to(levels: u32) -> Vec<DyadicIndex> {
    (0..=levels)
        .flat_map(|k| (1..=1u64 << k).map(move |j| DyadicIndex::new(k, j).expect("in range")))
        .collect()
}

fn random_index(rng: &mut ChaCha8Rng, max_level: u32) -> DyadicIndex {
    let k = rng.random_range(0..=max_level);
    DyadicIndex::new(k, rng.random_range(1..=1u64 << k)).expect("in range")
}

fn ranges_up_to(k1_max: u32) -> impl Iterator<Item = LevelRange> {
    (0..=k1_max).flat_map(move |k1| (0..=k1).map(move |k0| LevelRange::new(k0, k1).expect("ordered")))
}

/// Runs every identity check. `k1_max` above [`K1_CAP`] is refused.
pub fn run_identity_suite(opts: &VerifyOptions) -> Result<VerifyReport> {
    if opts.k1_max > K1_CAP {
        return Err(Error::Capacity(format!(
            "k1 = {} exceeds the cap k1 <= {K1_CAP} of the exact identity suites",
            opts.k1_max
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let c = &opts.consts;
    let mut checks = Vec::new();
    checks.extend(gram_checks(c, opts.k1_max.min(GRAM_LEVELS))?);
    checks.push(moment_check(c, &mut rng, opts.k1_max.min(GRAM_LEVELS)));
    checks.push(pairing_check(c, opts.k1_max.min(GRAM_LEVELS))?);
    checks.push(isotropy_check(c, &mut rng, opts.k1_max.min(8))?);
    checks.push(projected_isotropy_check(&mut rng)?);
    checks.push(i1_check(c, opts.k1_max)?);
    checks.extend(i3_checks(c, opts.k1_max.min(I3_LEVELS))?);
    checks.push(parseval_check(&mut rng, opts.k1_max.min(8))?);
    checks.push(sup_bound_check(opts.k1_max));
    checks.push(step_coefficient_check(&mut rng, opts.k1_max)?);
    checks.push(direct_haar_check(&mut rng, opts.k1_max.min(8))?);
    Ok(VerifyReport { checks, k1_max: opts.k1_max, seed: opts.seed })
}

/// Gram matrix of the Z family over all indices up to `levels`: exact
/// piecewise integral and grid oracle against the closed form.
fn gram_checks(c: &ZConstants, levels: u32) -> Result<[Check; 2]> {
    let idx = indices_up_to(levels);
    let mut off = Tracker::new("z_orthogonality", 1e-10);
    let mut diag = Tracker::new("z_normalization", 1e-10);
    for (p, &a) in idx.iter().enumerate() {
        for &b in &idx[p..] {
            let closed = z_gram(a, b);
            let exact = z_gram_integrated(c, a, b);
            let (lo, hi) = (a.support().0.max(b.support().0), a.support().1.min(b.support().1));
            let grid = if lo < hi {
                let res = a.k().max(b.k()) + 1;
                grid_integral_on(|t| c.z_profile(a, step(t)) * c.z_profile(b, step(t)), lo, hi, res)?.value
            } else {
                0.0
            };
            let err = (exact - closed).abs().max((grid - closed).abs());
            let tr = if a == b { &mut diag } else { &mut off };
            tr.record(err, || format!("{a:?} x {b:?}: closed {closed}, exact {exact}, grid {grid}"));
        }
    }
    Ok([off.finish(), diag.finish()])
}

fn moment_check(c: &ZConstants, rng: &mut ChaCha8Rng, levels: u32) -> Check {
    let mut tr = Tracker::new("z_moments", 1e-10);
    for _ in 0..200 {
        let idx = random_index(rng, levels);
        let t0: f64 = rng.random();
        let (m0, m1) = z_moments_with(c, idx, t0);
        tr.record(m0.abs().max(m1.abs()), || format!("{idx:?}, t0 = {t0}: ({m0}, {m1})"));
    }
    tr.finish()
}

fn pairing_check(c: &ZConstants, levels: u32) -> Result<Check> {
    let target = 1.0 / 12f64.sqrt();
    let mut tr = Tracker::new("xz_pairing", 1e-10);
    for idx in indices_up_to(levels) {
        let exact = xz_integral(c, idx);
        let (lo, hi) = idx.support();
        let grid = grid_integral_on(|t| x_profile(idx, step(t)) * c.z_profile(idx, step(t)), lo, hi, idx.k() + 1)?.value;
        let err = (exact - target).abs().max((grid - target).abs());
        tr.record(err, || format!("{idx:?}: exact {exact}, grid {grid}"));
    }
    Ok(tr.finish())
}

fn random_range(rng: &mut ChaCha8Rng, k1_max: u32) -> LevelRange {
    let k1 = rng.random_range(0..=k1_max);
    let k0 = rng.random_range(0..=k1);
    LevelRange::new(k0, k1).expect("ordered")
}

fn isotropy_check(c: &ZConstants, rng: &mut ChaCha8Rng, k1_max: u32) -> Result<Check> {
    let mut tr = Tracker::new("isotropy", 1e-8);
    for _ in 0..100 {
        let range = random_range(rng, k1_max);
        let v = CoefVector::from_fn(range, |_| rng.random_range(-1.0..1.0));
        let lhs = isotropy_integral(c, &v);
        let rhs = weighted_inner(&v, &v)?;
        tr.record(rel(lhs, rhs), || format!("{range}: {lhs} vs {rhs}"));
    }
    Ok(tr.finish())
}

fn projected_isotropy_check(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut tr = Tracker::new("projected_isotropy", 1e-6);
    let range = LevelRange::new(3, 6).expect("ordered");
    for dim in [1usize, 4, 16, 64] {
        for _ in 0..3 {
            let v: Subspace = families::random_subspace(dim, range, rng.random())?;
            let got = projected_isotropy(&v)?;
            tr.record(rel(got, dim as f64), || format!("dim {dim}: {got}"));
        }
    }
    Ok(tr.finish())
}

fn i1_check(c: &ZConstants, k1_max: u32) -> Result<Check> {
    let mut tr = Tracker::new("i1_closed_form", 1e-10);
    for range in ranges_up_to(k1_max) {
        let closed = (range.level_count() as f64) / 12f64.sqrt();
        let computed = compute_i1(range);
        let grid = grid_integral(
            |t| {
                range
                    .levels()
                    .map(|k| {
                        let idx = DyadicIndex::containing(k, t);
                        level_weight(k) * x_profile(idx, step(t)) * c.z_profile(idx, step(t))
                    })
                    .sum()
            },
            range.cell_level(),
        )?
        .value;
        let err = (computed - closed).abs().max((grid - closed).abs());
        tr.record(err, || format!("{range}: closed {closed}, computed {computed}, grid {grid}"));
    }
    Ok(tr.finish())
}

/// `∫ 2^{-k} sum_j |Z_{k,j}(t)|^p dt` for one level, by graded Gauss-Legendre
/// on the cells between consecutive zeros and kinks of the integrand.
fn level_power_oracle(c: &ZConstants, k: u32, p: f64) -> Result<f64> {
    let cells = 1u64 << (k + 2);
    let h = 1.0 / cells as f64;
    let mut total = 0.0;
    for i in 0..cells {
        let (lo, hi) = (i as f64 * h, (i + 1) as f64 * h);
        let f = |t: f64| c.z_profile(DyadicIndex::containing(k, t), step(t)).abs().powf(p);
        total += graded_integral_on(f, lo, hi, 24)?.value;
    }
    Ok(level_weight(k) * total)
}

fn i3_checks(c: &ZConstants, levels: u32) -> Result<[Check; 2]> {
    let mut closed_tr = Tracker::new("i3_closed_form", 1e-9);
    // ratio to the analytic supremum of I3^{1/q'} / 2^{k1/q}
    let mut growth_tr = Tracker::new("i3_growth", 1.0);
    for q in I3_EXPONENTS {
        let p = q / (q - 1.0);
        let bound = i3_growth_constant(q)?;
        let per_level = (0..=levels).map(|k| level_power_oracle(c, k, p)).collect::<Result<Vec<_>>>()?;
        for range in ranges_up_to(levels) {
            let closed = compute_i3(range, q)?;
            let oracle: f64 = range.levels().map(|k| per_level[k as usize]).sum();
            closed_tr.record(rel(closed, oracle), || format!("q = {q}, {range}: {closed} vs {oracle}"));
            let ratio = closed.powf(1.0 / p) / 2f64.powf(range.k1() as f64 / q);
            growth_tr.record(ratio / bound, || format!("q = {q}, {range}: {ratio} vs constant {bound}"));
        }
    }
    Ok([closed_tr.finish(), growth_tr.finish()])
}

/// `||f||_2^2 = (∫ f)^2 + sum_k 2^{-k} sum_j c_{k,j}^2` on finite Haar spans
/// plus a constant.
fn parseval_check(rng: &mut ChaCha8Rng, top: u32) -> Result<Check> {
    let mut tr = Tracker::new("parseval", 1e-12);
    for case in 0..40 {
        let range = LevelRange::new(0, rng.random_range(0..=top)).expect("ordered");
        let x = CoefVector::from_fn(range, |_| rng.random_range(-1.0..1.0));
        let c0: f64 = rng.random_range(-1.0..1.0);
        let synth = synthesize(&x);
        let pieces = synth.pieces().iter().map(|p| [p[0] + c0, p[1], p[2]]).collect();
        let n = synth.pieces().len();
        let f = PiecewisePolynomial::new(synth.breakpoints().to_vec(), pieces, vec![false; n])?;
        let energy = grid_integral(|t| f.eval(t).powi(2), range.cell_level())?.value;
        let y = analyze(&f, range)?;
        let mean = f.integrate_exact();
        let parseval = mean * mean + weighted_inner(&y, &y)?;
        let recovered = y.as_slice().iter().zip(x.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        tr.record(rel(parseval, energy).max(recovered), || format!("case {case} over {range}"));
    }
    Ok(tr.finish())
}

/// `max_t ||X(t)||_{2,w}^2 <= 2^{1-k0}`, reported as the worst ratio.
fn sup_bound_check(k1_max: u32) -> Check {
    let mut tr = Tracker::new("sup_bound", 1.0);
    for range in ranges_up_to(k1_max) {
        let bound = 2.0 * level_weight(range.k0());
        let sup = sup_x_energy(range);
        tr.record(sup / bound, || format!("{range}: {sup} vs {bound}"));
    }
    tr.finish()
}

fn step_coefficient_check(rng: &mut ChaCha8Rng, levels: u32) -> Result<Check> {
    let mut tr = Tracker::new("step_coefficients", 1e-12);
    for _ in 0..1000 {
        let idx = random_index(rng, levels);
        let t = step(rng.random());
        let profile = x_profile(idx, t);
        let coef = haar_coefficient(&t.step_function(), idx)?;
        tr.record((profile - coef).abs(), || format!("{idx:?}, t = {}", t.get()));
    }
    Ok(tr.finish())
}

fn random_quadratic(rng: &mut ChaCha8Rng, level: u32) -> Result<PiecewisePolynomial> {
    let cells = 1u64 << level;
    let mut bps = vec![0.0];
    for i in 1..cells {
        if rng.random_bool(0.3) {
            bps.push(i as f64 / cells as f64);
        }
    }
    bps.push(1.0);
    let pieces: Vec<[f64; 3]> =
        (1..bps.len()).map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
    let n = pieces.len();
    PiecewisePolynomial::new(bps, pieces, vec![false; n])
}

fn direct_haar_check(rng: &mut ChaCha8Rng, levels: u32) -> Result<Check> {
    const BREAK_LEVEL: u32 = 6;
    let mut tr = Tracker::new("haar_direct", 1e-10);
    for _ in 0..1000 {
        let f = random_quadratic(rng, BREAK_LEVEL)?;
        let idx = random_index(rng, levels);
        let main = haar_coefficient(&f, idx)?;
        let direct = haar_coefficient_direct(|t| f.eval(t), idx, BREAK_LEVEL.max(idx.k() + 1))?;
        tr.record((main - direct).abs(), || format!("{idx:?}: {main} vs {direct}"));
    }
    Ok(tr.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyOptions {
        VerifyOptions { k1_max: 5, ..VerifyOptions::default() }
    }

    #[test]
    fn small_suite_passes() {
        let r = run_identity_suite(&small()).unwrap();
        assert!(r.all_passed(), "{}", r.human());
        assert!(r.machine().lines().count() == r.checks.len() + 1);
    }

    #[test]
    fn perturbed_scale_breaks_normalization() {
        let opts = VerifyOptions { consts: ZConstants::with_scale(12f64.sqrt() + 1e-3), ..small() };
        let r = run_identity_suite(&opts).unwrap();
        assert!(!r.check("z_normalization").unwrap().passed());
        assert!(r.check("z_orthogonality").unwrap().passed());
        assert!(r.check("z_moments").unwrap().passed());
    }

    #[test]
    fn cap_is_enforced() {
        let opts = VerifyOptions { k1_max: 13, ..VerifyOptions::default() };
        assert!(matches!(run_identity_suite(&opts), Err(Error::Capacity(_))));
    }
}
