//! Residual statistics of an approximant family over the `t` grid.
//!
//! For families linear in `t` on the cells of level `k1 + 1` the residual
//! `r(t) = X(t) - H(t)` is linear in `t` on every cell, so each coordinate's
//! `∫ |r|^q` over a cell has a closed form and `t ↦ ||r(t)||_{q,w}` (convex
//! on a segment) attains its maximum at grid points. Those statistics are
//! therefore exact. Other families use composite two-point Gauss on
//! `2^oversample` subcells per cell.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::haar::{dyadic_gauss2, level_weight, synthesized_lq_norm_q, CoefVector};
use crate::profiles::x_sparse;

use super::ApproximantFamily;

const CHUNK_CELLS: usize = 64;
/// Number of grid points sampled for the coefficient-to-`L_q` bridge ratio.
const BRIDGE_SAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    /// `log2` of subcells per level-`(k1+1)` cell for families that are not
    /// linear in `t`.
    pub oversample: u32,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { oversample: 3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorScan {
    /// `max_t ||X(t) - H(t)||_{q,w}` over the grid.
    pub sup_q: f64,
    /// `(∫ ||X - H||_{q,w}^q dt)^{1/q}`.
    pub avg_q: f64,
    /// `(∫ ||X - H||_{2,w}^2 dt)^{1/2}`.
    pub avg_2: f64,
    /// `∫ ||H||_{2,w}^2 dt`.
    pub h_energy: f64,
    /// True when the statistics are exact rather than quadrature estimates.
    pub exact: bool,
    /// Grid points at which `H` was evaluated.
    pub points: usize,
    /// Smallest sampled `||sum r_{k,j} h_{k,j}||_{L_q}^q / ||r||_{q,w}^q`.
    pub lq_bridge_min: f64,
}

impl ErrorScan {
    fn zero(exact: bool) -> Self {
        Self {
            sup_q: 0.0,
            avg_q: 0.0,
            avg_2: 0.0,
            h_energy: 0.0,
            exact,
            points: 0,
            lq_bridge_min: f64::INFINITY,
        }
    }
}

#[inline]
fn pow_q(x: f64, q: f64, qi: Option<i32>) -> f64 {
    match qi {
        Some(n) => x.powi(n),
        None => x.powf(q),
    }
}

/// `∫_0^1 |(1 - s) a + s b|^q ds` given `|a|^q` and `|b|^q`.
#[inline]
fn segment_power_integral(a: f64, b: f64, pa: f64, pb: f64, q: f64) -> f64 {
    if a == b {
        return pa;
    }
    let (x, y) = (a.abs(), b.abs());
    if a * b < 0.0 {
        return (pa * x + pb * y) / ((q + 1.0) * (x + y));
    }
    let d = y - x;
    let m = 0.5 * (x + y);
    if d.abs() > 1e-4 * m {
        (pb * y - pa * x) / ((q + 1.0) * d)
    } else {
        // trapezoid with its leading correction; remainder O((d/m)^4)
        let rel = d / m;
        0.5 * (pa + pb) * (1.0 - q * (q - 1.0) / 12.0 * rel * rel)
    }
}

#[derive(Default)]
struct Partial {
    sup_pow: f64,
    int_q: f64,
    int_2: f64,
    energy: f64,
    points: usize,
    bridge_min: Option<f64>,
}

fn residual_rows(family: &ApproximantFamily<'_>, ts: &[f64]) -> (Array2<f64>, Array2<f64>) {
    let v = family.subspace();
    let range = v.range();
    let d = v.dim();
    let alpha = Array2::from_shape_fn((ts.len(), d), |_| 0.0);
    let mut alpha = alpha;
    for (i, &t) in ts.iter().enumerate() {
        let a = family.coefficients(t);
        alpha.row_mut(i).assign(&ArrayView1::from(&a));
    }
    let mut resid = if d == 0 {
        Array2::zeros((ts.len(), range.dim()))
    } else {
        -alpha.dot(v.basis())
    };
    for (i, &t) in ts.iter().enumerate() {
        for (at, x) in x_sparse(t, range) {
            resid[[i, at]] += x;
        }
    }
    (alpha, resid)
}

fn bridge_ratio(family: &ApproximantFamily<'_>, row: ArrayView1<'_, f64>, q: f64, qi: Option<i32>) -> Option<f64> {
    let v = family.subspace();
    let w = v.weights();
    let coef_pow: f64 = row.iter().zip(w.iter()).map(|(r, w)| w * pow_q(r.abs(), q, qi)).sum();
    if coef_pow <= 0.0 {
        return None;
    }
    let r = CoefVector::new(v.range(), row.to_vec()).expect("row length");
    Some(synthesized_lq_norm_q(&r, q) / coef_pow)
}

fn linear_chunk(
    family: &ApproximantFamily<'_>,
    q: f64,
    qi: Option<i32>,
    first_cell: usize,
    last_cell: usize,
    total_cells: usize,
) -> Partial {
    let v = family.subspace();
    let w = v.weights();
    let h = level_weight(v.range().cell_level());
    let ts: Vec<f64> = (first_cell..=last_cell).map(|i| i as f64 * h).collect();
    let (alpha, resid) = residual_rows(family, &ts);
    let powers = resid.mapv(|r| pow_q(r.abs(), q, qi));

    let mut out = Partial::default();
    let stride = (total_cells / BRIDGE_SAMPLES).max(1);
    for (i, row) in powers.rows().into_iter().enumerate() {
        let s: f64 = row.iter().zip(w.iter()).map(|(p, w)| p * w).sum();
        out.sup_pow = out.sup_pow.max(s);
        let grid_index = first_cell + i;
        let owned = grid_index < last_cell || last_cell == total_cells;
        if owned && grid_index.is_multiple_of(stride) {
            if let Some(ratio) = bridge_ratio(family, resid.row(i), q, qi) {
                out.bridge_min = Some(out.bridge_min.map_or(ratio, |m: f64| m.min(ratio)));
            }
        }
    }
    out.points = ts.len();

    for i in 0..ts.len() - 1 {
        let (ra, rb) = (resid.row(i), resid.row(i + 1));
        let (pa, pb) = (powers.row(i), powers.row(i + 1));
        let mut cq = 0.0;
        let mut c2 = 0.0;
        for c in 0..ra.len() {
            let (a, b) = (ra[c], rb[c]);
            cq += w[c] * segment_power_integral(a, b, pa[c], pb[c], q);
            c2 += w[c] * (a * a + a * b + b * b) / 3.0;
        }
        out.int_q += h * cq;
        out.int_2 += h * c2;
        let (aa, ab) = (alpha.row(i), alpha.row(i + 1));
        out.energy += h * (aa.dot(&aa) + aa.dot(&ab) + ab.dot(&ab)) / 3.0;
    }
    out
}

fn quadrature_chunk(
    family: &ApproximantFamily<'_>,
    q: f64,
    qi: Option<i32>,
    nodes: &[(f64, f64)],
    bridge: bool,
) -> Partial {
    let w = family.subspace().weights();
    let ts: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let (alpha, resid) = residual_rows(family, &ts);
    let mut out = Partial { points: ts.len(), ..Partial::default() };
    for (i, &(_, weight)) in nodes.iter().enumerate() {
        let row = resid.row(i);
        let sq: f64 = row.iter().zip(w.iter()).map(|(r, w)| w * pow_q(r.abs(), q, qi)).sum();
        let s2: f64 = row.iter().zip(w.iter()).map(|(r, w)| w * r * r).sum();
        out.sup_pow = out.sup_pow.max(sq);
        out.int_q += weight * sq;
        out.int_2 += weight * s2;
        let a = alpha.row(i);
        out.energy += weight * a.dot(&a);
    }
    if bridge {
        out.bridge_min = bridge_ratio(family, resid.row(0), q, qi);
    }
    out
}

/// Sup and power means over `t` of the weighted residual `X(t) - H(t)`.
pub fn sup_error_scan(family: &ApproximantFamily<'_>, q: f64, grid: ScanGrid) -> Result<ErrorScan> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Parameter(format!("scan exponent q = {q} must be finite and >= 1")));
    }
    let qi = (q.fract() == 0.0 && q <= 64.0).then_some(q as i32);
    let range = family.subspace().range();
    let exact = family.is_linear_in_t();

    let partials: Vec<Partial> = if exact {
        let cells = 1usize << range.cell_level();
        let bounds: Vec<(usize, usize)> = (0..cells)
            .step_by(CHUNK_CELLS)
            .map(|a| (a, (a + CHUNK_CELLS).min(cells)))
            .collect();
        bounds
            .par_iter()
            .map(|&(a, b)| linear_chunk(family, q, qi, a, b, cells))
            .collect()
    } else {
        let level = range.cell_level() + grid.oversample;
        let nodes: Vec<(f64, f64)> = dyadic_gauss2(level).collect();
        let stride = (nodes.len() / BRIDGE_SAMPLES).max(1);
        nodes
            .par_chunks(CHUNK_CELLS)
            .enumerate()
            .map(|(i, chunk)| quadrature_chunk(family, q, qi, chunk, (i * CHUNK_CELLS).is_multiple_of(stride)))
            .collect()
    };

    let mut scan = ErrorScan::zero(exact);
    let (mut sup_pow, mut int_q, mut int_2) = (0.0f64, 0.0, 0.0);
    for p in partials {
        sup_pow = sup_pow.max(p.sup_pow);
        int_q += p.int_q;
        int_2 += p.int_2;
        scan.h_energy += p.energy;
        scan.points += p.points;
        if let Some(b) = p.bridge_min {
            scan.lq_bridge_min = scan.lq_bridge_min.min(b);
        }
    }
    scan.sup_q = sup_pow.powf(1.0 / q);
    scan.avg_q = int_q.max(0.0).powf(1.0 / q);
    scan.avg_2 = int_2.max(0.0).sqrt();
    Ok(scan)
}
