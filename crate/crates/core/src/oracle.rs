//! Brute-force quadrature engines used to cross-check closed forms.
//!
//! Nothing here calls into the main integration paths: the grid rule,
//! the sampling loop and the direct Haar coefficient are all re-derived.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::haar::DyadicIndex;

/// Finest grid the oracle accepts.
pub const MAX_RESOLUTION: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    /// Zero for deterministic grid rules.
    pub std_error: f64,
    /// Sample count, or cell count for grid rules.
    pub samples: u64,
}

impl QuadEstimate {
    /// `|value - expected| <= sigmas * std_error` (plus a rounding floor).
    pub fn agrees_with(&self, expected: f64, sigmas: f64) -> bool {
        (self.value - expected).abs() <= sigmas * self.std_error + 1e-12
    }
}

fn gauss_pair(a: f64, b: f64, f: &impl Fn(f64) -> f64) -> Result<f64> {
    // nodes at the roots of the degree-2 Legendre polynomial
    let r = 1.0 / 3f64.sqrt();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let (t1, t2) = (c - h * r, c + h * r);
    let (v1, v2) = (f(t1), f(t2));
    if !v1.is_finite() {
        return Err(Error::Evaluation { at: t1 });
    }
    if !v2.is_finite() {
        return Err(Error::Evaluation { at: t2 });
    }
    Ok(h * (v1 + v2))
}

/// Composite two-point Gauss rule on `[a, b]` using the cells of the
/// `2^-resolution` grid (cells cut at `a` and `b`).
pub fn grid_integral_on(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    resolution: u32,
) -> Result<QuadEstimate> {
    if resolution > MAX_RESOLUTION {
        return Err(Error::Parameter(format!("resolution {resolution} above {MAX_RESOLUTION}")));
    }
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(Error::Parameter(format!("interval [{a}, {b}] not inside [0, 1]")));
    }
    let cells = 1u64 << resolution;
    let first = (a * cells as f64).floor() as u64;
    let last = ((b * cells as f64).ceil() as u64).min(cells);
    let mut total = 0.0;
    let mut used = 0;
    for c in first..last {
        let lo = (c as f64 / cells as f64).max(a);
        let hi = ((c + 1) as f64 / cells as f64).min(b);
        if hi > lo {
            total += gauss_pair(lo, hi, &f)?;
            used += 1;
        }
    }
    Ok(QuadEstimate { value: total, std_error: 0.0, samples: used })
}

/// Composite two-point Gauss over `2^resolution` equal cells of `[0, 1]`;
/// exact for piecewise cubics with breakpoints on the grid.
pub fn grid_integral(f: impl Fn(f64) -> f64, resolution: u32) -> Result<QuadEstimate> {
    grid_integral_on(f, 0.0, 1.0, resolution)
}

/// Plain Monte Carlo with uniform samples from a seeded ChaCha8 stream.
pub fn mc_integral(f: impl Fn(f64) -> f64, samples: u64, seed: u64) -> Result<QuadEstimate> {
    if samples < 2 {
        return Err(Error::Parameter("Monte Carlo needs at least two samples".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Welford accumulation
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..samples {
        let t: f64 = rng.random();
        let v = f(t);
        if !v.is_finite() {
            return Err(Error::Evaluation { at: t });
        }
        let d = v - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (v - mean);
    }
    let var = m2 / (samples - 1) as f64;
    Ok(QuadEstimate { value: mean, std_error: (var / samples as f64).sqrt(), samples })
}

/// Haar coefficient straight from the definition, integrating both halves
/// of the support with the grid rule.
pub fn haar_coefficient_direct(
    f: impl Fn(f64) -> f64,
    idx: DyadicIndex,
    resolution: u32,
) -> Result<f64> {
    let width = 1.0 / (1u64 << idx.k()) as f64;
    let a = (idx.j() - 1) as f64 * width;
    let m = a + 0.5 * width;
    let b = a + width;
    let left = grid_integral_on(&f, a, m, resolution)?.value;
    let right = grid_integral_on(&f, m, b, resolution)?.value;
    Ok((left - right) / width)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    let n = points as f64;
    (0..points)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for m in 2..=points {
                    let m = m as f64;
                    let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
                    p0 = p1;
                    p1 = p2;
                }
                let p = if points == 0 { 1.0 } else if points == 1 { x } else { p1 };
                let prev = if points == 1 { 1.0 } else { p0 };
                dp = n * (x * p - prev) / (x * x - 1.0);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Gauss-Legendre on a mesh graded geometrically toward both ends of
/// `[a, b]`. Resolves endpoint power singularities such as `|t - a|^p`.
pub fn graded_integral_on(f: impl Fn(f64) -> f64, a: f64, b: f64, layers: u32) -> Result<QuadEstimate> {
    const RATIO: f64 = 0.25;
    if !(a <= b) {
        return Err(Error::Parameter(format!("interval [{a}, {b}] reversed")));
    }
    let rule = gauss_legendre(10);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // breakpoints a + half * RATIO^m toward a, mirrored toward b
    let mut cuts = vec![a];
    for m in (1..=layers).rev() {
        cuts.push(a + half * RATIO.powi(m as i32));
    }
    cuts.push(mid);
    for m in 1..=layers {
        cuts.push(b - half * RATIO.powi(m as i32));
    }
    cuts.push(b);
    let mut total = 0.0;
    let mut evals = 0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        for &(x, wt) in &rule {
            let t = c + h * x;
            let v = f(t);
            if !v.is_finite() {
                return Err(Error::Evaluation { at: t });
            }
            total += h * wt * v;
            evals += 1;
        }
    }
    Ok(QuadEstimate { value: total, std_error: 0.0, samples: evals })
}
