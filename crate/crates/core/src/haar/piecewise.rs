//! Piecewise polynomials of degree at most two on partitions of `[0, 1]`.
//!
//! Each piece is stored in local form `c0 + c1 (t - a) + c2 (t - a)^2`
//! about its left breakpoint `a`, which keeps integrals over short dyadic
//! cells free of the cancellation a global monomial basis would suffer.

use crate::error::{Error, Result};

pub type LocalPoly = [f64; 3];

const CONTINUITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    pieces: Vec<LocalPoly>,
    /// `continuous[i]` asserts the function is continuous at the left end of
    /// piece `i` (ignored for the first piece).
    continuous: Vec<bool>,
}

#[inline]
fn eval_local(p: &LocalPoly, u: f64) -> f64 {
    p[0] + u * (p[1] + u * p[2])
}

#[inline]
fn antiderivative_local(p: &LocalPoly, u: f64) -> f64 {
    u * (p[0] + u * (p[1] / 2.0 + u * p[2] / 3.0))
}

/// Re-expand a local polynomial about a point shifted by `d`.
#[inline]
fn shift(p: &LocalPoly, d: f64) -> LocalPoly {
    [p[0] + d * (p[1] + d * p[2]), p[1] + 2.0 * d * p[2], p[2]]
}

impl PiecewisePolynomial {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<LocalPoly>, continuous: Vec<bool>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::Shape("need at least two breakpoints".into()));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::Shape("breakpoints must start at 0 and end at 1".into()));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Shape("breakpoints must be strictly increasing".into()));
        }
        if pieces.len() + 1 != breakpoints.len() || continuous.len() != pieces.len() {
            return Err(Error::Shape(format!(
                "{} breakpoints need {} pieces and continuity flags",
                breakpoints.len(),
                breakpoints.len() - 1
            )));
        }
        if pieces.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Parameter("non-finite polynomial coefficient".into()));
        }
        let pp = Self { breakpoints, pieces, continuous };
        for i in 1..pp.pieces.len() {
            if pp.continuous[i] {
                let h = pp.breakpoints[i] - pp.breakpoints[i - 1];
                let left = eval_local(&pp.pieces[i - 1], h);
                let right = pp.pieces[i][0];
                let scale = 1.0f64.max(left.abs()).max(right.abs());
                if (left - right).abs() > CONTINUITY_TOL * scale {
                    return Err(Error::Shape(format!(
                        "piece {i} flagged continuous but jumps {left} -> {right} at {}",
                        pp.breakpoints[i]
                    )));
                }
            }
        }
        Ok(pp)
    }

    pub fn constant(c: f64) -> Self {
        Self { breakpoints: vec![0.0, 1.0], pieces: vec![[c, 0.0, 0.0]], continuous: vec![false] }
    }

    /// Step function equal to `left` on `[0, t)` and `right` on `[t, 1]`.
    pub fn step(t: f64, left: f64, right: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Parameter(format!("step location {t} outside [0, 1]")));
        }
        if t == 0.0 {
            return Ok(Self::constant(right));
        }
        if t == 1.0 {
            return Ok(Self::constant(left));
        }
        Self::new(vec![0.0, t, 1.0], vec![[left, 0.0, 0.0], [right, 0.0, 0.0]], vec![false, false])
    }

    /// Continuous piecewise-linear interpolant of `(node, value)` pairs whose
    /// nodes start at 0 and end at 1.
    pub fn linear_interpolant(nodes: &[f64], values: &[f64]) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::Shape("nodes and values differ in length".into()));
        }
        let pieces = nodes
            .windows(2)
            .zip(values.windows(2))
            .map(|(x, y)| [y[0], (y[1] - y[0]) / (x[1] - x[0]), 0.0])
            .collect::<Vec<_>>();
        let mut continuous = vec![true; pieces.len()];
        if let Some(first) = continuous.first_mut() {
            *first = false;
        }
        Self::new(nodes.to_vec(), pieces, continuous)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[LocalPoly] {
        &self.pieces
    }

    pub fn is_continuous_at_piece(&self, i: usize) -> bool {
        self.continuous[i]
    }

    pub fn degree(&self) -> usize {
        self.pieces
            .iter()
            .map(|p| if p[2] != 0.0 { 2 } else if p[1] != 0.0 { 1 } else { 0 })
            .max()
            .unwrap_or(0)
    }

    /// Piece containing `t` under closed-left/open-right pieces, with `t = 1`
    /// in the last piece.
    fn piece_at(&self, t: f64) -> usize {
        let last = self.pieces.len() - 1;
        match self.breakpoints.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.piece_at(t);
        eval_local(&self.pieces[i], t - self.breakpoints[i])
    }

    /// Limit from the left at `t` (equals `eval` away from breakpoints).
    pub fn eval_left(&self, t: f64) -> f64 {
        let i = self.piece_at(t);
        if i > 0 && t == self.breakpoints[i] {
            eval_local(&self.pieces[i - 1], t - self.breakpoints[i - 1])
        } else {
            eval_local(&self.pieces[i], t - self.breakpoints[i])
        }
    }

    /// Exact integral over `[0, 1]` from per-piece antiderivatives.
    pub fn integrate_exact(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| antiderivative_local(p, w[1] - w[0]))
            .sum()
    }

    /// Exact integral over `[a, b] ⊂ [0, 1]`.
    pub fn integrate_between(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::Parameter(format!("interval [{a}, {b}] not inside [0, 1]")));
        }
        if a == b {
            return Ok(0.0);
        }
        let first = self.piece_at(a);
        let mut total = 0.0;
        for i in first..self.pieces.len() {
            let lo = self.breakpoints[i];
            let hi = self.breakpoints[i + 1];
            if lo >= b {
                break;
            }
            let from = a.max(lo) - lo;
            let to = b.min(hi) - lo;
            if to > from {
                let p = &self.pieces[i];
                total += antiderivative_local(p, to) - antiderivative_local(p, from);
            }
        }
        Ok(total)
    }

    /// Two-point Gauss rule on every piece; exact for degree <= 3.
    pub fn integrate_gauss2(&self) -> f64 {
        let g = 0.5 / 3f64.sqrt();
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| {
                let h = w[1] - w[0];
                0.5 * h * (eval_local(p, h * (0.5 - g)) + eval_local(p, h * (0.5 + g)))
            })
            .sum()
    }

    /// Pointwise product on the merged partition; fails if the result has
    /// degree above two.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut merged: Vec<f64> = self
            .breakpoints
            .iter()
            .chain(&other.breakpoints)
            .copied()
            .collect();
        merged.sort_by(f64::total_cmp);
        merged.dedup();

        let mut pieces = Vec::with_capacity(merged.len() - 1);
        let mut continuous = Vec::with_capacity(merged.len() - 1);
        for (n, w) in merged.windows(2).enumerate() {
            let mid = 0.5 * (w[0] + w[1]);
            let (ia, ib) = (self.piece_at(mid), other.piece_at(mid));
            let pa = shift(&self.pieces[ia], w[0] - self.breakpoints[ia]);
            let pb = shift(&other.pieces[ib], w[0] - other.breakpoints[ib]);
            let c3 = pa[1] * pb[2] + pa[2] * pb[1];
            let c4 = pa[2] * pb[2];
            if c3 != 0.0 || c4 != 0.0 {
                return Err(Error::Parameter("product exceeds degree 2".into()));
            }
            pieces.push([
                pa[0] * pb[0],
                pa[0] * pb[1] + pa[1] * pb[0],
                pa[0] * pb[2] + pa[1] * pb[1] + pa[2] * pb[0],
            ]);
            let cont_a = self.is_continuous_across(w[0]);
            let cont_b = other.is_continuous_across(w[0]);
            continuous.push(n > 0 && cont_a && cont_b);
        }
        Self::new(merged, pieces, continuous)
    }

    /// Whether the function is flagged continuous at `t` (true strictly
    /// inside a piece).
    fn is_continuous_across(&self, t: f64) -> bool {
        match self.breakpoints.binary_search_by(|b| b.total_cmp(&t)) {
            Ok(i) if i > 0 && i < self.pieces.len() => self.continuous[i],
            Ok(_) => true,
            Err(_) => true,
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let pieces = self.pieces.iter().map(|p| [alpha * p[0], alpha * p[1], alpha * p[2]]).collect();
        Self { breakpoints: self.breakpoints.clone(), pieces, continuous: self.continuous.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tent() -> PiecewisePolynomial {
        PiecewisePolynomial::linear_interpolant(&[0.0, 0.5, 1.0], &[0.0, 1.0, 0.0]).unwrap()
    }

    #[test]
    fn constant_integrates_to_value() {
        assert_eq!(PiecewisePolynomial::constant(1.0).integrate_exact(), 1.0);
    }

    #[test]
    fn tent_area_is_half() {
        let t = tent();
        assert!((t.integrate_exact() - 0.5).abs() < 1e-15);
        assert!((t.integrate_gauss2() - 0.5).abs() < 1e-15);
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(0.25), 0.5);
    }

    #[test]
    fn centred_tent_square_is_one_twelfth() {
        let c = tent().product(&PiecewisePolynomial::constant(1.0)).unwrap();
        let shifted = PiecewisePolynomial::linear_interpolant(&[0.0, 0.5, 1.0], &[-0.5, 0.5, -0.5]).unwrap();
        let sq = shifted.product(&shifted).unwrap();
        assert!((sq.integrate_exact() - 1.0 / 12.0).abs() < 1e-15);
        assert!((sq.integrate_gauss2() - 1.0 / 12.0).abs() < 1e-15);
        assert!((c.integrate_exact() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_unsorted_breakpoints() {
        let r = PiecewisePolynomial::new(
            vec![0.0, 0.6, 0.4, 1.0],
            vec![[0.0; 3]; 3],
            vec![false; 3],
        );
        assert!(matches!(r, Err(Error::Shape(_))));
        let r = PiecewisePolynomial::new(vec![0.1, 1.0], vec![[0.0; 3]], vec![false]);
        assert!(r.is_err());
    }

    #[test]
    fn continuity_flag_is_checked() {
        let r = PiecewisePolynomial::new(
            vec![0.0, 0.5, 1.0],
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            vec![false, true],
        );
        assert!(r.is_err());
        let ok = tent();
        let b = 0.5;
        assert!((ok.eval_left(b) - ok.eval(b)).abs() < 1e-15);
    }

    #[test]
    fn step_evaluation_is_closed_left() {
        let s = PiecewisePolynomial::step(0.25, 1.0, -1.0).unwrap();
        assert_eq!(s.eval(0.25), -1.0);
        assert_eq!(s.eval_left(0.25), 1.0);
        assert_eq!(s.eval(0.0), 1.0);
        assert_eq!(s.eval(1.0), -1.0);
        assert!((s.integrate_exact() - (-0.5)).abs() < 1e-15);
    }

    #[test]
    fn partial_integrals() {
        let t = tent();
        assert!((t.integrate_between(0.0, 0.5).unwrap() - 0.25).abs() < 1e-15);
        assert!((t.integrate_between(0.25, 0.75).unwrap() - 0.375).abs() < 1e-15);
        assert_eq!(t.integrate_between(0.3, 0.3).unwrap(), 0.0);
        assert!(t.integrate_between(0.6, 0.3).is_err());
    }

    #[test]
    fn product_degree_cap() {
        let sq = tent().product(&tent()).unwrap();
        assert_eq!(sq.degree(), 2);
        assert!(sq.product(&tent()).is_err());
    }
}
