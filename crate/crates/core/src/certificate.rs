//! The duality certificate: `I1`, `I2`, `I3`, the Hölder lower bound
//! `(I1 - I2) / I3^{1/q'}` on the `q`-average coefficient error, and the
//! two-branch check on a concrete subspace.
//!
//! Everything here lives in the coefficient space, where the Hölder step is
//! constant-free. The passage to genuine `L_q` norms carries an unknown
//! constant and is only reported (see [`CertificateReport::lq_bridge_min`]).

use std::fmt;

use crate::approx::{sup_error_scan, ApproximantFamily, ApproximantRule, ScanGrid, Subspace, GRAM_TOL};
use crate::error::{Error, Result};
use crate::haar::{dyadic_gauss2, level_weight, LevelRange};
use crate::profiles::{x_sparse, ZConstants};

/// Parameters of one certification: dimension budget `n`, exponent `q`,
/// level-range exponent `gamma` and the `L_2` branch constant `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateConfig {
    n: u64,
    q: f64,
    q_conj: f64,
    gamma: f64,
    delta: f64,
}

impl CertificateConfig {
    pub fn new(n: u64, q: f64, gamma: f64, delta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Parameter(format!("n = {n} must be at least 2")));
        }
        if !(q > 2.0) || !q.is_finite() {
            return Err(Error::Parameter(format!("q = {q} must lie in (2, inf)")));
        }
        if !(gamma > 1.0 / q) || !gamma.is_finite() {
            return Err(Error::Parameter(format!("gamma = {gamma} must exceed 1/q = {}", 1.0 / q)));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Parameter(format!("delta = {delta} must be positive")));
        }
        Ok(Self { n, q, q_conj: q / (q - 1.0), gamma, delta })
    }

    pub fn n(&self) -> u64 {
        self.n
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn q_conj(&self) -> f64 {
        self.q_conj
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn level_range(&self) -> Result<LevelRange> {
        level_range(self.n, self.gamma, self.q)
    }

    /// `delta n^{-1/2} ln n`.
    pub fn l2_threshold(&self) -> f64 {
        let n = self.n as f64;
        self.delta * n.ln() / n.sqrt()
    }

    /// `n^{-gamma}`.
    pub fn lq_threshold(&self) -> f64 {
        (self.n as f64).powf(-self.gamma)
    }
}

fn raw_levels(n: u64, gamma: f64, q: f64) -> (u32, i64) {
    let k0 = n.ilog2();
    // dyadic n make the product an exact integer in exact arithmetic
    let k1 = (gamma * q * (n as f64).log2() + 1e-12).floor() as i64;
    (k0, k1)
}

/// `k0 = floor(log2 n)`, `k1 = floor(gamma q log2 n)`.
pub fn level_range(n: u64, gamma: f64, q: f64) -> Result<LevelRange> {
    if n < 2 {
        return Err(Error::Parameter(format!("n = {n} must be at least 2")));
    }
    if !(gamma > 0.0) || !(q > 0.0) {
        return Err(Error::Parameter(format!("gamma = {gamma}, q = {q} must be positive")));
    }
    let (k0, k1) = raw_levels(n, gamma, q);
    if k1 < k0 as i64 {
        let min_valid_n = smallest_valid_n_after(n, gamma, q);
        return Err(Error::Regime { n, k0, k1, min_valid_n });
    }
    LevelRange::new(k0, k1 as u32)
}

/// Smallest `m > n` whose band is non-empty, searched one octave at a
/// time: inside `[2^k, 2^{k+1})` the upper level only grows with `m`.
fn smallest_valid_n_after(n: u64, gamma: f64, q: f64) -> Option<u64> {
    let start = n.checked_add(1)?;
    for k in start.ilog2()..63 {
        let lo = start.max(1u64 << k);
        let hi = (1u64 << (k + 1)) - 1;
        let ok = |m: u64| {
            let (a, b) = raw_levels(m, gamma, q);
            b >= a as i64
        };
        if !ok(hi) {
            continue;
        }
        let (mut bad, mut good) = (lo, hi);
        if ok(lo) {
            return Some(lo);
        }
        while good - bad > 1 {
            let mid = bad + (good - bad) / 2;
            if ok(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
        return Some(good);
    }
    None
}

/// `I1 = ∫ <X(t), Z(t)>_w dt = (k1 - k0 + 1) / a`.
pub fn compute_i1(range: LevelRange) -> f64 {
    range.level_count() as f64 / ZConstants::standard().a()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct I2Estimate {
    pub value: f64,
    /// Two-point Gauss per level-`(k1+1)` cell is exact for families linear
    /// in `t`.
    pub exact: bool,
    pub nodes: usize,
}

/// `I2 = ∫ <H(t), Z(t)>_w dt`.
pub fn compute_i2(family: &ApproximantFamily<'_>, grid: ScanGrid) -> I2Estimate {
    let v = family.subspace();
    let range = v.range();
    let consts = ZConstants::standard();
    let exact = family.is_linear_in_t();
    let level = if exact { range.cell_level() } else { range.cell_level() + grid.oversample };
    let mut value = 0.0;
    let mut nodes = 0;
    if v.dim() > 0 {
        for (t, weight) in dyadic_gauss2(level) {
            let alpha = family.coefficients(t);
            let pairing: f64 = consts
                .z_sparse(t, range)
                .into_iter()
                .zip(range.levels())
                .map(|((c, z), k)| level_weight(k) * z * v.combine_at(&alpha, c))
                .sum();
            value += weight * pairing;
            nodes += 1;
        }
    }
    I2Estimate { value, exact, nodes }
}

/// `I3 = ∫ ||Z(t)||_{p,w}^p dt` for the conjugate exponent `p`, closed form
/// `a^p 2^{-p} / (p + 1) * sum_k 2^{k (p - 1)}`.
pub fn compute_i3_conj(range: LevelRange, p: f64) -> f64 {
    let a = ZConstants::standard().a();
    let lead = (a / 2.0).powf(p) / (p + 1.0);
    let sum: f64 = range.levels().map(|k| (k as f64 * (p - 1.0)).exp2()).sum();
    lead * sum
}

pub fn compute_i3(range: LevelRange, q: f64) -> Result<f64> {
    if !(q > 2.0) || !q.is_finite() {
        return Err(Error::Parameter(format!("q = {q} must lie in (2, inf)")));
    }
    Ok(compute_i3_conj(range, q / (q - 1.0)))
}

/// `∫ ||Π_V Z(t)||_{2,w}^2 dt`, which equals `dim V`.
pub fn projected_isotropy(v: &Subspace) -> Result<f64> {
    let dev = v.gram_deviation();
    if dev > GRAM_TOL {
        return Err(Error::Precondition(format!("basis Gram deviation {dev:e} > {GRAM_TOL:e}")));
    }
    let range = v.range();
    let consts = ZConstants::standard();
    let mut total = 0.0;
    for (t, weight) in dyadic_gauss2(range.cell_level()) {
        let c = v.coefficients_sparse(&consts.z_sparse(t, range));
        total += weight * c.iter().map(|x| x * x).sum::<f64>();
    }
    Ok(total)
}

/// Raw Hölder quotient `(I1 - I2) / I3^{1/q'}`; may be negative.
pub fn holder_quotient(i1: f64, i2: f64, i3: f64, q: f64) -> Result<f64> {
    if !(i3 > 0.0) {
        return Err(Error::Parameter(format!("I3 = {i3} must be positive")));
    }
    let q_conj = q / (q - 1.0);
    Ok((i1 - i2) / i3.powf(1.0 / q_conj))
}

/// Supremum over all level ranges of `I3^{1/q'} / 2^{k1/q}`: the geometric
/// sum in `I3` is bounded by its infinite tail,
/// `(a^p 2^{-p} / ((p + 1)(1 - 2^{1-p})))^{1/p}` with `p = q'`.
pub fn i3_growth_constant(q: f64) -> Result<f64> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::Parameter(format!("q = {q} must lie in (2, inf)")));
    }
    let p = q / (q - 1.0);
    let a = ZConstants::standard().a();
    let c = a.powf(p) * 2f64.powf(-p) / ((p + 1.0) * (1.0 - 2f64.powf(1.0 - p)));
    Ok(c.powf(1.0 / p))
}

/// Relative size below which `I1 - I2` is indistinguishable from rounding.
const CANCELLATION_FLOOR: f64 = 1e-12;

/// `max(0, (I1 - I2) / I3^{1/q'})`: a lower bound on
/// `(∫ ||X(t) - H(t)||_{q,w}^q dt)^{1/q}`.
///
/// A numerator within rounding of zero (a subspace that spans the whole
/// band gives `I2 = I1` exactly) yields `0`, never a spurious positive bound.
pub fn holder_lower_bound(i1: f64, i2: f64, i3: f64, q: f64) -> Result<f64> {
    let quotient = holder_quotient(i1, i2, i3, q)?;
    if i1 - i2 <= CANCELLATION_FLOOR * i1.abs().max(i2.abs()) {
        return Ok(0.0);
    }
    Ok(quotient.max(0.0))
}

/// `max_t ||X(t)||_{2,w}^2`, attained on the grid of level `k1 + 1`.
pub fn sup_x_energy(range: LevelRange) -> f64 {
    let cells = 1u64 << range.cell_level();
    let h = level_weight(range.cell_level());
    (0..=cells)
        .map(|i| {
            x_sparse(i as f64 * h, range)
                .into_iter()
                .zip(range.levels())
                .map(|((_, x), k)| level_weight(k) * x * x)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// Which branches of the `L_2` / `L_q` dichotomy hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dichotomy {
    L2Low,
    LqLow,
    Both,
    Neither,
}

impl Dichotomy {
    pub fn from_flags(l2: bool, lq: bool) -> Self {
        match (l2, lq) {
            (true, true) => Self::Both,
            (true, false) => Self::L2Low,
            (false, true) => Self::LqLow,
            (false, false) => Self::Neither,
        }
    }

    pub fn l2_holds(self) -> bool {
        matches!(self, Self::L2Low | Self::Both)
    }

    pub fn lq_holds(self) -> bool {
        matches!(self, Self::LqLow | Self::Both)
    }

    pub fn satisfied(self) -> bool {
        self != Self::Neither
    }
}

impl fmt::Display for Dichotomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::L2Low => "l2low",
            Self::LqLow => "lqlow",
            Self::Both => "both",
            Self::Neither => "neither",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub range: LevelRange,
    pub n: u64,
    pub dim: usize,
    pub rule: String,
    pub i1: f64,
    pub i2: f64,
    pub i2_exact: bool,
    pub i3: f64,
    /// Unclamped `(I1 - I2) / I3^{1/q'}`.
    pub holder_quotient: f64,
    pub holder_lb: f64,
    /// `(∫ ||X - H||_{2,w}^2)^{1/2}`, a lower estimate of the `L_2` average
    /// error of any `eta_t` with these Haar coefficients.
    pub l2_avg_err: f64,
    pub l2_is_lower_estimate: bool,
    /// `(∫ ||X - H||_{q,w}^q)^{1/q}`.
    pub lqw_avg_err: f64,
    pub sup_qw_err: f64,
    pub scan_exact: bool,
    /// `∫ ||H||_{2,w}^2`.
    pub h_energy: f64,
    /// `sqrt(dim V) * h_energy^{1/2}`, an upper bound for `I2`.
    pub i2_chain_bound: f64,
    /// `sup_t ||X(t)||_{2,w}^2`.
    pub sup_x_energy: f64,
    /// `I2 / ln n`, the measured constant in `I2 <~ delta ln n` up to `delta`.
    pub i2_per_log_n: f64,
    /// Smallest sampled ratio of the true `L_q^q` norm of the residual's
    /// synthesis to its weighted coefficient norm.
    pub lq_bridge_min: f64,
    pub l2_threshold: f64,
    pub lq_threshold: f64,
    pub dichotomy: Dichotomy,
    /// `dim V > n`: the subspace is larger than the budget.
    pub outside_hypotheses: bool,
}

/// Certifies the family `rule` drawn from `v` under `cfg`.
pub fn certify_subspace(
    v: &Subspace,
    cfg: &CertificateConfig,
    rule: ApproximantRule,
    grid: ScanGrid,
) -> Result<CertificateReport> {
    let range = cfg.level_range()?;
    if v.range() != range {
        return Err(Error::Shape(format!(
            "subspace over {} but n = {} selects {range}",
            v.range(),
            cfg.n()
        )));
    }
    let family = ApproximantFamily::new(v, rule)?;
    let q = cfg.q();
    let i1 = compute_i1(range);
    let i2 = compute_i2(&family, grid);
    let i3 = compute_i3(range, q)?;
    let quotient = holder_quotient(i1, i2.value, i3, q)?;
    let holder_lb = holder_lower_bound(i1, i2.value, i3, q)?;
    let scan = sup_error_scan(&family, q, grid)?;

    let l2_threshold = cfg.l2_threshold();
    let lq_threshold = cfg.lq_threshold();
    let dichotomy = Dichotomy::from_flags(scan.avg_2 >= l2_threshold, holder_lb >= lq_threshold);

    Ok(CertificateReport {
        range,
        n: cfg.n(),
        dim: v.dim(),
        rule: rule.label(),
        i1,
        i2: i2.value,
        i2_exact: i2.exact,
        i3,
        holder_quotient: quotient,
        holder_lb,
        l2_avg_err: scan.avg_2,
        l2_is_lower_estimate: true,
        lqw_avg_err: scan.avg_q,
        sup_qw_err: scan.sup_q,
        scan_exact: scan.exact,
        h_energy: scan.h_energy,
        i2_chain_bound: (v.dim() as f64).sqrt() * scan.h_energy.sqrt(),
        sup_x_energy: sup_x_energy(range),
        i2_per_log_n: i2.value / (cfg.n() as f64).ln(),
        lq_bridge_min: scan.lq_bridge_min,
        l2_threshold,
        lq_threshold,
        dichotomy,
        outside_hypotheses: v.dim() as u64 > cfg.n(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{best_l2_family, families};

    #[test]
    fn level_range_examples() {
        let r = level_range(1000, 0.3, 4.0).unwrap();
        assert_eq!((r.k0(), r.k1()), (9, 11));
        let r = level_range(2, 0.3, 4.0).unwrap();
        assert_eq!((r.k0(), r.k1()), (1, 1));
        let r = level_range(1024, 0.26, 4.0).unwrap();
        assert_eq!((r.k0(), r.k1()), (10, 10));
        let r = level_range(256, 0.3, 4.0).unwrap();
        assert_eq!((r.k0(), r.k1()), (8, 9));
    }

    #[test]
    fn degenerate_range_reports_minimal_n() {
        match level_range(2, 0.2, 4.5) {
            Err(Error::Regime { n: 2, k0: 1, k1: 0, min_valid_n }) => {
                let m = min_valid_n.unwrap();
                let r = level_range(m, 0.2, 4.5).unwrap();
                assert!(r.k1() >= r.k0());
                assert!(level_range(m - 1, 0.2, 4.5).is_err() || m == 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(CertificateConfig::new(1, 4.0, 0.3, 0.1).is_err());
        assert!(CertificateConfig::new(16, 2.0, 0.6, 0.1).is_err());
        assert!(CertificateConfig::new(16, 4.0, 0.25, 0.1).is_err());
        assert!(CertificateConfig::new(16, 4.0, 0.3, 0.0).is_err());
        let c = CertificateConfig::new(16, 4.0, 0.3, 0.1).unwrap();
        assert!((c.q_conj() * (c.q() - 1.0) - c.q()).abs() < 1e-12);
    }

    #[test]
    fn i1_examples() {
        let r = LevelRange::new(3, 6).unwrap();
        assert!((compute_i1(r) - 1.154_700_538_379_251_5).abs() < 1e-12);
        let r = LevelRange::new(5, 5).unwrap();
        assert!((compute_i1(r) - 0.288_675_134_594_812_9).abs() < 1e-12);
    }

    #[test]
    fn i3_conjugate_two_reduces_to_dyadic_power() {
        for k in 0..8 {
            let r = LevelRange::new(k, k).unwrap();
            assert!((compute_i3_conj(r, 2.0) - (1u64 << k) as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn growth_constant_bounds_every_range() {
        for q in [2.5, 3.0, 4.0, 8.0] {
            let c = i3_growth_constant(q).unwrap();
            let p = q / (q - 1.0);
            for k1 in [0u32, 5, 12, 20] {
                for k0 in [0, k1 / 2, k1] {
                    let r = LevelRange::new(k0, k1).unwrap();
                    let ratio = compute_i3(r, q).unwrap().powf(1.0 / p) / 2f64.powf(k1 as f64 / q);
                    assert!(ratio <= c * (1.0 + 1e-12), "q {q} {r}: {ratio} > {c}");
                }
            }
        }
    }

    #[test]
    fn i3_geometric_growth() {
        let q = 4.0;
        let p = q / (q - 1.0);
        let a = compute_i3(LevelRange::new(3, 6).unwrap(), q).unwrap();
        let b = compute_i3(LevelRange::new(3, 7).unwrap(), q).unwrap();
        let last6 = compute_i3(LevelRange::new(6, 6).unwrap(), q).unwrap();
        let last7 = compute_i3(LevelRange::new(7, 7).unwrap(), q).unwrap();
        assert!((b - a - last7).abs() < 1e-12);
        assert!((last7 / last6 - (p - 1.0_f64).exp2()).abs() < 1e-12);
    }

    #[test]
    fn holder_bound_edges() {
        assert_eq!(holder_lower_bound(1.0, 1.0, 3.0, 4.0).unwrap(), 0.0);
        let v = holder_lower_bound(1.0, 0.0, 3.0, 4.0).unwrap();
        assert!((v - 1.0 / 3f64.powf(0.75)).abs() < 1e-15);
        assert_eq!(holder_lower_bound(1.0, 2.0, 3.0, 4.0).unwrap(), 0.0);
        assert!(holder_quotient(1.0, 2.0, 3.0, 4.0).unwrap() < 0.0);
        assert!(holder_lower_bound(1.0, 0.0, 0.0, 4.0).is_err());
    }

    #[test]
    fn i2_of_trivial_and_full_families() {
        let r = LevelRange::new(2, 5).unwrap();
        let zero = Subspace::trivial(r);
        assert_eq!(compute_i2(&best_l2_family(&zero), ScanGrid::default()).value, 0.0);
        let full = families::full_space(r);
        let i2 = compute_i2(&best_l2_family(&full), ScanGrid::default());
        assert!(i2.exact);
        assert!((i2.value - compute_i1(r)).abs() < 1e-12);
    }

    #[test]
    fn isotropy_of_coordinate_subspaces() {
        let r = LevelRange::new(2, 5).unwrap();
        let one = families::haar_truncation(1, r).unwrap();
        assert!((projected_isotropy(&one).unwrap() - 1.0).abs() < 1e-12);
        let level = families::haar_truncation(4, r).unwrap();
        assert!((projected_isotropy(&level).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn isotropy_rejects_non_orthonormal_basis() {
        let r = LevelRange::new(0, 1).unwrap();
        let bad = Subspace::from_rows_unchecked(r, ndarray::Array2::from_elem((1, 3), 1.0)).unwrap();
        assert!(matches!(projected_isotropy(&bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn sup_energy_bound() {
        for (k0, k1) in [(0, 0), (1, 4), (3, 9), (6, 7)] {
            let r = LevelRange::new(k0, k1).unwrap();
            assert!(sup_x_energy(r) <= (1.0 - k0 as f64).exp2());
        }
    }

    #[test]
    fn full_space_certificate_flags_hypotheses() {
        let cfg = CertificateConfig::new(16, 4.0, 0.3, 0.1).unwrap();
        let r = cfg.level_range().unwrap();
        // k0 = k1 = 4: N = 16 = n, so extend via a bigger gamma instead
        assert_eq!(r.dim(), 16);
        let cfg = CertificateConfig::new(16, 4.0, 0.45, 0.1).unwrap();
        let r = cfg.level_range().unwrap();
        let v = families::full_space(r);
        let rep = certify_subspace(&v, &cfg, ApproximantRule::BestL2, ScanGrid::default()).unwrap();
        assert!(rep.outside_hypotheses);
        assert_eq!(rep.holder_lb, 0.0);
        assert!(rep.l2_avg_err < 1e-13 && rep.lqw_avg_err < 1e-13);
        assert_eq!(rep.dichotomy, Dichotomy::Neither);
    }

    #[test]
    fn range_mismatch_is_shape_error() {
        let cfg = CertificateConfig::new(64, 4.0, 0.3, 0.1).unwrap();
        let v = families::full_space(LevelRange::new(2, 3).unwrap());
        assert!(matches!(
            certify_subspace(&v, &cfg, ApproximantRule::BestL2, ScanGrid::default()),
            Err(Error::Shape(_))
        ));
    }
}
