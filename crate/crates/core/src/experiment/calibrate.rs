use super::family::FamilyKind;
use super::row::{RunConfig, ScanRow};
use crate::error::{Error, Result};

/// Fraction of the largest admissible `delta` that experiments use.
pub const DEFAULT_SAFETY: f64 = 0.5;

/// The battery used to calibrate `delta` before a run: small `n`, every
/// finite-dimensional family, and a seed distinct from the run's own so the
/// run is an out-of-sample test of the calibrated constant.
pub fn calibration_config(cfg: &RunConfig) -> RunConfig {
    RunConfig {
        n_list: vec![64, 128, 256],
        families: vec![FamilyKind::HaarTruncation, FamilyKind::UniformSpline, FamilyKind::Random],
        seed: cfg.seed.wrapping_add(0x9E37_79B9),
        delta: None,
        timing: false,
        ..cfg.clone()
    }
}

/// Outcome of searching for the `L_2` threshold constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    /// Largest `delta` for which every usable row satisfies a branch.
    /// `None` when the `L_q` branch alone covers every row.
    pub delta_max: Option<f64>,
    /// `delta_max * safety`, the value to hand to the experiment.
    pub delta: Option<f64>,
    pub safety: f64,
    /// Rows that hold neither branch for any positive `delta`.
    pub unusable: Vec<(u64, String)>,
}

fn covered(rows: &[&ScanRow], delta: f64) -> bool {
    rows.iter().all(|r| {
        let m = r.metrics().expect("filtered to measured rows");
        let n = r.n as f64;
        m.holder_lb >= r.lq_threshold() || m.avg_2 >= delta * n.ln() / n.sqrt()
    })
}

/// Bisects for the largest `delta` such that every measured row satisfies
/// `avg_2 >= delta ln n / sqrt n` or the coefficient-space `L_q` branch,
/// then multiplies by `safety`.
pub fn calibrate_delta(rows: &[ScanRow], safety: f64) -> Result<Calibration> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::Parameter(format!("safety factor {safety} outside (0, 1]")));
    }
    let mut usable = Vec::new();
    let mut unusable = Vec::new();
    for r in rows {
        let Some(m) = r.metrics() else { continue };
        if m.avg_2 > 0.0 || m.holder_lb >= r.lq_threshold() {
            usable.push(r);
        } else {
            unusable.push((r.n, r.family.to_string()));
        }
    }
    // each row fails the L2 branch past its own ratio, so the answer is the
    // minimum ratio over rows the Lq branch leaves open
    let mut hi = 1.0;
    while covered(&usable, hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return Ok(Calibration { delta_max: None, delta: None, safety, unusable });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if covered(&usable, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo <= 0.0 {
        return Err(Error::Precondition("no positive delta covers the calibration rows".into()));
    }
    Ok(Calibration { delta_max: Some(lo), delta: Some(lo * safety), safety, unusable })
}

/// Smallest `n` of the schedule from which every measured row (all
/// families) holds at least one branch. `None` if the largest `n` fails.
pub fn smallest_conforming_n(rows: &[ScanRow]) -> Option<u64> {
    let mut ns: Vec<u64> = rows.iter().filter(|r| r.metrics().is_some()).map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let ok_at = |n: u64| {
        rows.iter()
            .filter(|r| r.n == n && r.metrics().is_some())
            .all(|r| r.dichotomy().is_some_and(|d| d.satisfied()))
    };
    let mut best = None;
    for &n in ns.iter().rev() {
        if ok_at(n) {
            best = Some(n);
        } else {
            break;
        }
    }
    best
}
