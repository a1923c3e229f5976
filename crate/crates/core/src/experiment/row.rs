use std::time::Instant;

use rayon::prelude::*;

use super::family::FamilyKind;
use crate::approx::{ApproximantRule, ScanGrid};
use crate::certificate::{certify_subspace, level_range, CertificateConfig, Dichotomy};
use crate::error::{Error, Result};

/// Parameters shared by `certify` and `scan` runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub q: f64,
    pub gamma: f64,
    /// `None` asks for calibration from the scan itself.
    pub delta: Option<f64>,
    pub n_list: Vec<u64>,
    pub families: Vec<FamilyKind>,
    pub seed: u64,
    pub oversample: u32,
    /// Record wall-clock time per row. Off by default so output is
    /// byte-reproducible.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            q: 4.0,
            gamma: 0.3,
            delta: None,
            n_list: vec![64, 128, 256, 512, 1024],
            families: vec![FamilyKind::HaarTruncation, FamilyKind::UniformSpline, FamilyKind::Random],
            seed: 1,
            oversample: ScanGrid::default().oversample,
            timing: false,
        }
    }
}

impl RunConfig {
    /// Checks the parameter window used by the width theorem:
    /// `q > 2` and `1/q < gamma < 1/2`.
    pub fn validate(&self) -> Result<()> {
        if !(self.q > 2.0 && self.q.is_finite()) {
            return Err(Error::Parameter(format!("q = {} must lie in (2, inf)", self.q)));
        }
        if !(self.gamma > 1.0 / self.q && self.gamma < 0.5) {
            return Err(Error::Parameter(format!(
                "gamma = {} must lie in (1/q, 1/2) = ({}, 0.5)",
                self.gamma,
                1.0 / self.q
            )));
        }
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::Parameter(format!("delta = {d} must be positive")));
            }
        }
        if self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter("the n schedule must be strictly ascending".into()));
        }
        if let Some(&n) = self.n_list.first() {
            if n < 2 {
                return Err(Error::Parameter(format!("n = {n} must be at least 2")));
            }
        }
        if self.oversample > 8 {
            return Err(Error::Parameter(format!("oversample = {} above 8", self.oversample)));
        }
        Ok(())
    }

    pub fn grid(&self) -> ScanGrid {
        ScanGrid { oversample: self.oversample }
    }
}

/// Measured quantities of one successful run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMetrics {
    pub k0: u32,
    pub k1: u32,
    pub dim: usize,
    pub sup_q: f64,
    pub avg_q: f64,
    pub avg_2: f64,
    pub holder_lb: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok(RowMetrics),
    Skipped(String),
}

/// One `(n, family)` run of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub n: u64,
    pub q: f64,
    pub gamma: f64,
    pub family: FamilyKind,
    pub seed: u64,
    /// Threshold constant of the `L_2` branch. `None` until calibrated.
    pub delta: Option<f64>,
    pub status: RowStatus,
    pub wall_time_ms: u64,
}

impl ScanRow {
    pub fn metrics(&self) -> Option<&RowMetrics> {
        match &self.status {
            RowStatus::Ok(m) => Some(m),
            RowStatus::Skipped(_) => None,
        }
    }

    pub fn skip_reason(&self) -> Option<&str> {
        match &self.status {
            RowStatus::Skipped(r) => Some(r),
            RowStatus::Ok(_) => None,
        }
    }

    /// `delta ln n / sqrt n`.
    pub fn l2_threshold(&self) -> Option<f64> {
        let n = self.n as f64;
        self.delta.map(|d| d * n.ln() / n.sqrt())
    }

    /// `n^{-gamma}`.
    pub fn lq_threshold(&self) -> f64 {
        (self.n as f64).powf(-self.gamma)
    }

    pub fn lq_holds(&self) -> Option<bool> {
        self.metrics().map(|m| m.holder_lb >= self.lq_threshold())
    }

    pub fn l2_holds(&self) -> Option<bool> {
        let m = self.metrics()?;
        Some(m.avg_2 >= self.l2_threshold()?)
    }

    pub fn dichotomy(&self) -> Option<Dichotomy> {
        Some(Dichotomy::from_flags(self.l2_holds()?, self.lq_holds()?))
    }

    /// The row-level invariant checked before anything is written.
    pub fn check_invariants(&self) -> Result<()> {
        let Some(m) = self.metrics() else { return Ok(()) };
        let fields = [m.sup_q, m.avg_q, m.avg_2, m.holder_lb, m.i1, m.i2, m.i3];
        if fields.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Precondition(format!(
                "n = {} {}: negative or non-finite error field",
                self.n, self.family
            )));
        }
        // Hölder's inequality makes this exact. The slack only absorbs the
        // last bits of rounding in the two independent computations.
        if m.holder_lb > m.avg_q * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "n = {} {}: holder_lb {} exceeds avg_q {}",
                self.n, self.family, m.holder_lb, m.avg_q
            )));
        }
        Ok(())
    }
}

/// Runs one certification with the best-`L_2` rule. Regime and capacity
/// refusals become skipped rows; other errors propagate.
pub fn run_row(n: u64, family: FamilyKind, cfg: &RunConfig) -> Result<ScanRow> {
    let start = Instant::now();
    let mut row = ScanRow {
        n,
        q: cfg.q,
        gamma: cfg.gamma,
        family,
        seed: cfg.seed,
        delta: cfg.delta,
        status: RowStatus::Skipped(String::new()),
        wall_time_ms: 0,
    };
    row.status = match measure(n, family, cfg) {
        Ok(m) => RowStatus::Ok(m),
        Err(Error::Regime { n, k0, k1, min_valid_n }) => RowStatus::Skipped(match min_valid_n {
            Some(m) => format!("regime: k1 = {k1} < k0 = {k0} at n = {n}; smallest valid n is {m}"),
            None => format!("regime: k1 = {k1} < k0 = {k0} at n = {n}; no valid n"),
        }),
        Err(Error::Capacity(msg)) => RowStatus::Skipped(format!("capacity: {msg}")),
        Err(e) => return Err(e),
    };
    if cfg.timing {
        row.wall_time_ms = start.elapsed().as_millis() as u64;
    }
    Ok(row)
}

fn measure(n: u64, family: FamilyKind, cfg: &RunConfig) -> Result<RowMetrics> {
    let range = level_range(n, cfg.gamma, cfg.q)?;
    let planned = family.planned_dim(n, range);
    if planned as u64 > n {
        return Err(Error::Capacity(format!(
            "outside lemma hypotheses: {family} has dimension {planned} > n = {n}"
        )));
    }
    // delta does not enter any measured quantity
    let cert = CertificateConfig::new(n, cfg.q, cfg.gamma, cfg.delta.unwrap_or(1.0))?;
    let v = family.build(n, range, cfg.seed)?;
    let r = certify_subspace(&v, &cert, ApproximantRule::BestL2, cfg.grid())?;
    Ok(RowMetrics {
        k0: range.k0(),
        k1: range.k1(),
        dim: r.dim,
        sup_q: r.sup_qw_err,
        avg_q: r.lqw_avg_err,
        avg_2: r.l2_avg_err,
        holder_lb: r.holder_lb,
        i1: r.i1,
        i2: r.i2,
        i3: r.i3,
    })
}

/// Every `(n, family)` pair of the schedule, run in parallel on the current
/// rayon pool and returned in schedule order (n outer, family inner).
pub fn run_schedule(cfg: &RunConfig) -> Result<Vec<ScanRow>> {
    cfg.validate()?;
    let jobs: Vec<(u64, FamilyKind)> = cfg
        .n_list
        .iter()
        .flat_map(|&n| cfg.families.iter().map(move |&f| (n, f)))
        .collect();
    jobs.par_iter().map(|&(n, f)| run_row(n, f, cfg)).collect()
}

/// Sets `delta` on every row.
pub fn apply_delta(rows: &mut [ScanRow], delta: f64) {
    for r in rows {
        r.delta = Some(delta);
    }
}
