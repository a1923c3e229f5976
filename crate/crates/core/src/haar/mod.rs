//! Dyadic Haar machinery and the weighted coefficient space.
//!
//! Haar functions are `L_inf`-normalised: `h_{k,j}` is `+1` on the left half
//! and `-1` on the right half of its support, halves closed on the left.

mod piecewise;
mod quad;
mod space;

pub use piecewise::{LocalPoly, PiecewisePolynomial};
pub use quad::{dyadic_gauss2, Integrable, Quadrature};
pub use space::{
    level_weight, pack_lq_norm_q, weighted_inner, weighted_norm, CoefVector, DyadicIndex,
    LevelRange, MAX_LEVEL,
};

use crate::error::Result;

/// `c_{k,j}(f) = 2^k (∫_left f - ∫_right f)` over the halves of the support.
pub fn haar_coefficient<F: Integrable + ?Sized>(f: &F, idx: DyadicIndex) -> Result<f64> {
    let (a, b) = idx.support();
    let m = idx.midpoint();
    let left = f.integrate(a, m)?;
    let right = f.integrate(m, b)?;
    Ok((left - right) * (1u64 << idx.k()) as f64)
}

/// Haar function `h_{k,j}` as a piecewise constant.
pub fn haar_function(idx: DyadicIndex) -> PiecewisePolynomial {
    let (a, b) = idx.support();
    let m = idx.midpoint();
    let mut bps = vec![0.0];
    let mut pieces = Vec::new();
    if a > 0.0 {
        bps.push(a);
        pieces.push([0.0, 0.0, 0.0]);
    }
    bps.push(m);
    pieces.push([1.0, 0.0, 0.0]);
    bps.push(b);
    pieces.push([-1.0, 0.0, 0.0]);
    if b < 1.0 {
        bps.push(1.0);
        pieces.push([0.0, 0.0, 0.0]);
    }
    let n = pieces.len();
    PiecewisePolynomial::new(bps, pieces, vec![false; n]).expect("dyadic breakpoints are ordered")
}

/// Haar coefficients of `f` over every index of `range`.
pub fn analyze<F: Integrable + ?Sized>(f: &F, range: LevelRange) -> Result<CoefVector> {
    let coords = range
        .indices()
        .map(|idx| haar_coefficient(f, idx))
        .collect::<Result<Vec<_>>>()?;
    CoefVector::new(range, coords)
}

/// `sum_{k,j} x_{k,j} h_{k,j}` as a piecewise constant on the cells of
/// level `k1 + 1`.
pub fn synthesize(x: &CoefVector) -> PiecewisePolynomial {
    let range = x.range();
    let level = range.cell_level();
    let cells = 1usize << level;
    let mut values = vec![0.0; cells];
    for k in range.levels() {
        let coeffs = x.level(k).expect("level in range");
        let span = cells >> k;
        let half = span / 2;
        for (j, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let start = j * span;
            values[start..start + half].iter_mut().for_each(|v| *v += c);
            values[start + half..start + span].iter_mut().for_each(|v| *v -= c);
        }
    }
    let h = level_weight(level);
    let bps = (0..=cells).map(|i| i as f64 * h).collect();
    let pieces = values.into_iter().map(|v| [v, 0.0, 0.0]).collect();
    PiecewisePolynomial::new(bps, pieces, vec![false; cells]).expect("uniform grid")
}

/// `||sum x_{k,j} h_{k,j}||_{L_q}^q`, exact: the synthesis is constant on
/// the cells of level `k1 + 1`.
pub fn synthesized_lq_norm_q(x: &CoefVector, q: f64) -> f64 {
    let f = synthesize(x);
    let h = level_weight(x.range().cell_level());
    f.pieces().iter().map(|p| p[0].abs().powf(q)).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(k: u32, j: u64) -> DyadicIndex {
        DyadicIndex::new(k, j).unwrap()
    }

    #[test]
    fn step_coefficient_at_top_level() {
        let chi = PiecewisePolynomial::step(0.25, 1.0, -1.0).unwrap();
        let c = haar_coefficient(&chi, idx(0, 1)).unwrap();
        assert!((c - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constants_have_vanishing_coefficients() {
        let f = PiecewisePolynomial::constant(3.7);
        for i in LevelRange::new(0, 5).unwrap().indices() {
            assert!(haar_coefficient(&f, i).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn haar_function_is_normalised() {
        for (k, j) in [(0, 1), (2, 3), (5, 32), (7, 1)] {
            let h = haar_function(idx(k, j));
            assert!((haar_coefficient(&h, idx(k, j)).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn quadrature_handle_matches_exact() {
        let chi = PiecewisePolynomial::step(0.375, 1.0, -1.0).unwrap();
        let q = Quadrature::new(|t| chi.eval(t), 3);
        for i in LevelRange::new(0, 2).unwrap().indices() {
            let exact = haar_coefficient(&chi, i).unwrap();
            let approx = haar_coefficient(&q, i).unwrap();
            assert!((exact - approx).abs() < 1e-14, "{i}");
        }
    }

    #[test]
    fn synthesis_inverts_analysis() {
        let r = LevelRange::new(0, 4).unwrap();
        let x = CoefVector::from_fn(r, |i| ((i.k() * 7) as f64 + i.j() as f64 * 0.3).sin());
        let f = synthesize(&x);
        let back = analyze(&f, r).unwrap();
        for (a, b) in x.as_slice().iter().zip(back.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
