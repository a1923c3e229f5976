use std::fmt;
use std::str::FromStr;

use super::family::FamilyKind;
use super::row::ScanRow;
use crate::error::{Error, Result};

/// Fitted model `e = c n^{-alpha} (ln n)^beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Root mean square of the residuals of `ln e`.
    pub residual_rms: f64,
    pub points: usize,
}

impl FitResult {
    pub fn predict(&self, n: f64) -> f64 {
        self.c * n.powf(-self.alpha) * n.ln().powf(self.beta)
    }
}

/// Error columns a fit can target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorColumn {
    SupQ,
    AvgQ,
    Avg2,
    HolderLb,
}

impl ErrorColumn {
    pub fn name(self) -> &'static str {
        match self {
            Self::SupQ => "sup_q",
            Self::AvgQ => "avg_q",
            Self::Avg2 => "avg_2",
            Self::HolderLb => "holder_lb",
        }
    }

    pub fn value(self, row: &ScanRow) -> Option<f64> {
        let m = row.metrics()?;
        Some(match self {
            Self::SupQ => m.sup_q,
            Self::AvgQ => m.avg_q,
            Self::Avg2 => m.avg_2,
            Self::HolderLb => m.holder_lb,
        })
    }
}

impl fmt::Display for ErrorColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "sup_q" => Ok(Self::SupQ),
            "avg_q" => Ok(Self::AvgQ),
            "avg_2" => Ok(Self::Avg2),
            "holder_lb" => Ok(Self::HolderLb),
            other => Err(Error::Parameter(format!(
                "unknown column '{other}' (expected sup_q, avg_q, avg_2 or holder_lb)"
            ))),
        }
    }
}

/// Least squares for `ln e = ln c - alpha ln n + beta ln ln n`.
///
/// Needs at least four points with distinct `n >= 2` and positive `e`.
/// Solved by Householder QR on the three-column design, so a nearly
/// collinear design is reported instead of silently amplified.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 points, got {}", points.len())));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    if ns.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Fit("duplicate n in fit input".into()));
    }
    for &(n, e) in points {
        if !(n > 1.0 && n.is_finite()) {
            return Err(Error::Fit(format!("n = {n} must exceed 1")));
        }
        if !(e > 0.0 && e.is_finite()) {
            return Err(Error::Fit(format!("error value {e} at n = {n} must be positive")));
        }
    }
    let m = points.len();
    // column-major design, right-hand side
    let mut a: [Vec<f64>; 3] = [
        vec![1.0; m],
        points.iter().map(|p| -p.0.ln()).collect(),
        points.iter().map(|p| p.0.ln().ln()).collect(),
    ];
    let mut b: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let scale: Vec<f64> = a.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let mut r = [[0.0f64; 3]; 3];
    for j in 0..3 {
        let norm = a[j][j..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-10 * scale[j] {
            return Err(Error::Fit("singular design: too few distinct n".into()));
        }
        let alpha = if a[j][j] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let d: f64 = v.iter().zip(col.iter()).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vv;
            for (c, x) in col.iter_mut().zip(&v) {
                *c -= d * x;
            }
        };
        #[allow(clippy::needless_range_loop)]
        for l in j..3 {
            reflect(&mut a[l][j..]);
        }
        reflect(&mut b[j..]);
        for l in j..3 {
            r[j][l] = a[l][j];
        }
    }
    let mut x = [0.0f64; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|l| r[i][l] * x[l]).sum();
        x[i] = (b[i] - s) / r[i][i];
    }
    let residual_rms = (points
        .iter()
        .map(|&(n, e)| {
            let pred = x[0] - x[1] * n.ln() + x[2] * n.ln().ln();
            (e.ln() - pred).powi(2)
        })
        .sum::<f64>()
        / m as f64)
        .sqrt();
    Ok(FitResult { c: x[0].exp(), alpha: x[1], beta: x[2], residual_rms, points: m })
}

/// Fits `column` over the successful rows, optionally restricted to one
/// family.
pub fn fit_rows(rows: &[ScanRow], column: ErrorColumn, family: Option<FamilyKind>) -> Result<FitResult> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| family.is_none_or(|f| r.family == f))
        .filter_map(|r| Some((r.n as f64, column.value(r)?)))
        .collect();
    fit_scaling(&points)
}
