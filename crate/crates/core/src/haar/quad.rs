//! Integration handles used by the Haar analysis layer.

use crate::error::{Error, Result};

use super::piecewise::PiecewisePolynomial;
use super::space::level_weight;

/// Something whose integral over a subinterval of `[0, 1]` can be taken.
pub trait Integrable {
    fn integrate(&self, a: f64, b: f64) -> Result<f64>;
}

impl Integrable for PiecewisePolynomial {
    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        self.integrate_between(a, b)
    }
}

// Gauss-Legendre, five nodes on [-1, 1].
const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// Composite five-point Gauss rule over the dyadic cells of `level`, with
/// the integration endpoints added as extra split points.
pub struct Quadrature<F> {
    f: F,
    level: u32,
}

impl<F: Fn(f64) -> f64> Quadrature<F> {
    pub fn new(f: F, level: u32) -> Self {
        Self { f, level }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    fn gauss(&self, a: f64, b: f64) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS) {
            let t = mid + half * x;
            let v = (self.f)(t);
            if !v.is_finite() {
                return Err(Error::Evaluation { at: t });
            }
            s += w * v;
        }
        Ok(half * s)
    }
}

impl<F: Fn(f64) -> f64> Integrable for Quadrature<F> {
    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::Parameter(format!("interval [{a}, {b}] not inside [0, 1]")));
        }
        let h = level_weight(self.level);
        let mut total = 0.0;
        let mut lo = a;
        while lo < b {
            let next_cell = ((lo / h).floor() + 1.0) * h;
            let hi = next_cell.min(b);
            if hi > lo {
                total += self.gauss(lo, hi)?;
            }
            lo = hi;
        }
        Ok(total)
    }
}

/// Two-point Gauss nodes and weights over every cell of the level-`level`
/// dyadic grid, in ascending order. Exact for piecewise cubics on that grid.
pub fn dyadic_gauss2(level: u32) -> impl Iterator<Item = (f64, f64)> {
    let cells = 1u64 << level;
    let h = level_weight(level);
    let g = 0.5 / 3f64.sqrt();
    (0..cells).flat_map(move |c| {
        let a = c as f64 * h;
        [(a + h * (0.5 - g), 0.5 * h), (a + h * (0.5 + g), 0.5 * h)]
    })
}
