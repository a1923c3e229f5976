//! Haar coefficients of the step functions `chi_t` viewed as functions of
//! `t`, and the certificate profiles built from them.
//!
//! `X_{k,j}(t) = c_{k,j}(chi_t)` is a tent of height one over the support of
//! `h_{k,j}`. The certificate `Z_{k,j} = 2^k a (X_{k,j} - 1/2)` on that same
//! support has vanishing zeroth and first moments, and the family `Z` is
//! orthogonal with `∫ Z_{k,j}^2 = 2^k`.
//!
//! Point evaluators treat supports as half-open `[(j-1) 2^-k, j 2^-k)` with
//! `t = 1` in the last cell, so at most one position per level is active.

use crate::error::{Error, Result};
use crate::haar::{
    dyadic_gauss2, level_weight, CoefVector, DyadicIndex, LevelRange, PiecewisePolynomial,
};

/// Parameter `t ∈ [0, 1]` of the step function `chi_t`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StepParam(f64);

impl StepParam {
    pub fn new(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter(format!("step parameter {t} outside [0, 1]")));
        }
        Ok(Self(t))
    }

    #[inline]
    pub fn get(self) -> f64 {
        self.0
    }

    /// `chi_t`: `1` on `[0, t)`, `-1` on `[t, 1]`.
    pub fn step_function(self) -> PiecewisePolynomial {
        PiecewisePolynomial::step(self.0, 1.0, -1.0).expect("t validated")
    }
}

/// `1 - |2s - 1|` on `[0, 1]`.
#[inline]
pub fn tent(s: f64) -> f64 {
    1.0 - (2.0 * s - 1.0).abs()
}

/// Scale of the certificate family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZConstants {
    a: f64,
}

impl Default for ZConstants {
    fn default() -> Self {
        Self::standard()
    }
}

impl ZConstants {
    /// `a = sqrt(12)`, the value with `a^2 ∫ (tent - 1/2)^2 = 1`.
    pub fn standard() -> Self {
        Self { a: 12f64.sqrt() }
    }

    /// Arbitrary scale; only the standard one satisfies the normalisation.
    pub fn with_scale(a: f64) -> Self {
        Self { a }
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn z_profile(&self, idx: DyadicIndex, t: StepParam) -> f64 {
        match local_coordinate(idx, t.get()) {
            Some(s) => (1u64 << idx.k()) as f64 * self.a * (tent(s) - 0.5),
            None => 0.0,
        }
    }

    pub fn z_vector(&self, t: StepParam, range: LevelRange) -> CoefVector {
        let mut v = CoefVector::zeros(range);
        for (at, z) in self.z_sparse(t.get(), range) {
            v.as_mut_slice()[at] = z;
        }
        v
    }

    /// Nonzero coordinates of `Z(t)` as `(flat index, value)`, one per level.
    pub fn z_sparse(&self, t: f64, range: LevelRange) -> Vec<(usize, f64)> {
        range
            .levels()
            .map(|k| {
                let (at, s) = active_cell(range, k, t);
                (at, (1u64 << k) as f64 * self.a * (tent(s) - 0.5))
            })
            .collect()
    }

    /// `Z_{k,j}` as a piecewise-linear function of `t`.
    pub fn z_piecewise(&self, idx: DyadicIndex) -> PiecewisePolynomial {
        let scale = (1u64 << idx.k()) as f64 * self.a;
        support_profile(idx, [-0.5 * scale, 0.5 * scale, -0.5 * scale])
    }
}

/// Position of `t` inside the support of `idx`, rescaled to `[0, 1]`.
#[inline]
fn local_coordinate(idx: DyadicIndex, t: f64) -> Option<f64> {
    if DyadicIndex::containing(idx.k(), t) != idx {
        return None;
    }
    let scale = (1u64 << idx.k()) as f64;
    Some(scale * t - (idx.j() - 1) as f64)
}

#[inline]
fn active_cell(range: LevelRange, k: u32, t: f64) -> (usize, f64) {
    let idx = DyadicIndex::containing(k, t);
    let s = (1u64 << k) as f64 * t - (idx.j() - 1) as f64;
    (range.level_offset(k) + (idx.j() - 1) as usize, s)
}

/// Piecewise-linear function through `values` at the left end, midpoint and
/// right end of the support of `idx`, zero elsewhere.
fn support_profile(idx: DyadicIndex, values: [f64; 3]) -> PiecewisePolynomial {
    let (a, b) = idx.support();
    let m = idx.midpoint();
    let slope = 2.0 * (values[1] - values[0]) / (b - a);
    let mut bps = vec![0.0];
    let mut pieces = Vec::new();
    let mut cont = Vec::new();
    if a > 0.0 {
        bps.push(a);
        pieces.push([0.0, 0.0, 0.0]);
        cont.push(false);
    }
    bps.push(m);
    pieces.push([values[0], slope, 0.0]);
    cont.push(values[0] == 0.0 && a > 0.0);
    bps.push(b);
    pieces.push([values[1], -slope, 0.0]);
    cont.push(true);
    if b < 1.0 {
        bps.push(1.0);
        pieces.push([0.0, 0.0, 0.0]);
        cont.push(values[2] == 0.0);
    }
    PiecewisePolynomial::new(bps, pieces, cont).expect("dyadic support")
}

/// `X_{k,j}(t) = c_{k,j}(chi_t)`.
pub fn x_profile(idx: DyadicIndex, t: StepParam) -> f64 {
    local_coordinate(idx, t.get()).map_or(0.0, tent)
}

pub fn z_profile(idx: DyadicIndex, t: StepParam) -> f64 {
    ZConstants::standard().z_profile(idx, t)
}

/// Nonzero coordinates of `X(t)` as `(flat index, value)`, one per level.
pub fn x_sparse(t: f64, range: LevelRange) -> Vec<(usize, f64)> {
    range
        .levels()
        .map(|k| {
            let (at, s) = active_cell(range, k, t);
            (at, tent(s))
        })
        .collect()
}

pub fn x_vector(t: StepParam, range: LevelRange) -> CoefVector {
    let mut v = CoefVector::zeros(range);
    for (at, x) in x_sparse(t.get(), range) {
        v.as_mut_slice()[at] = x;
    }
    v
}

pub fn z_vector(t: StepParam, range: LevelRange) -> CoefVector {
    ZConstants::standard().z_vector(t, range)
}

/// `X_{k,j}` as a piecewise-linear function of `t`.
pub fn x_piecewise(idx: DyadicIndex) -> PiecewisePolynomial {
    support_profile(idx, [0.0, 1.0, 0.0])
}

pub fn z_piecewise(idx: DyadicIndex) -> PiecewisePolynomial {
    ZConstants::standard().z_piecewise(idx)
}

/// Closed form of `∫ Z_{i1} Z_{i2} dt`: `2^k` on the diagonal, `0` off it.
pub fn z_gram(i1: DyadicIndex, i2: DyadicIndex) -> f64 {
    if i1 == i2 {
        (1u64 << i1.k()) as f64
    } else {
        0.0
    }
}

/// `∫ Z_{i1} Z_{i2} dt` by exact piecewise integration.
pub fn z_gram_integrated(consts: &ZConstants, i1: DyadicIndex, i2: DyadicIndex) -> f64 {
    consts
        .z_piecewise(i1)
        .product(&consts.z_piecewise(i2))
        .expect("linear times linear")
        .integrate_exact()
}

/// `(∫ Z dt, ∫ (t - t0) Z dt)` by exact piecewise integration.
pub fn z_moments(idx: DyadicIndex, t0: f64) -> (f64, f64) {
    z_moments_with(&ZConstants::standard(), idx, t0)
}

pub fn z_moments_with(consts: &ZConstants, idx: DyadicIndex, t0: f64) -> (f64, f64) {
    let z = consts.z_piecewise(idx);
    let lever = PiecewisePolynomial::new(vec![0.0, 1.0], vec![[-t0, 1.0, 0.0]], vec![false])
        .expect("single piece");
    let first = z.product(&lever).expect("linear times linear").integrate_exact();
    (z.integrate_exact(), first)
}

/// `∫ X_{k,j} Z_{k,j} dt`, which equals `1/a`.
pub fn xz_integral(consts: &ZConstants, idx: DyadicIndex) -> f64 {
    x_piecewise(idx)
        .product(&consts.z_piecewise(idx))
        .expect("linear times linear")
        .integrate_exact()
}

/// `∫_0^1 <v, Z(t)>_w^2 dt`, exact: the integrand is quadratic on every cell
/// of level `k1 + 1`. Equals `<v, v>_w` for the standard scale.
pub fn isotropy_integral(consts: &ZConstants, v: &CoefVector) -> f64 {
    let range = v.range();
    let coords = v.as_slice();
    let mut total = 0.0;
    for (t, w) in dyadic_gauss2(range.cell_level()) {
        let dot: f64 = consts
            .z_sparse(t, range)
            .into_iter()
            .zip(range.levels())
            .map(|((at, z), k)| level_weight(k) * coords[at] * z)
            .sum();
        total += w * dot * dot;
    }
    total
}
