//! Built-in candidate subspaces.

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::haar::{haar_coefficient, CoefVector, DyadicIndex, LevelRange, PiecewisePolynomial};

use super::{orthonormalize, Subspace};

fn check_capacity(n: usize, range: LevelRange) -> Result<()> {
    if n > range.dim() {
        return Err(Error::Capacity(format!(
            "requested dimension {n} exceeds the {} coordinates of range {range}",
            range.dim()
        )));
    }
    if n == 0 {
        return Err(Error::Parameter("subspace dimension must be positive".into()));
    }
    Ok(())
}

/// First `n` coordinate directions in level-major order.
pub fn haar_truncation(n: usize, range: LevelRange) -> Result<Subspace> {
    check_capacity(n, range)?;
    let mut rows = Array2::<f64>::zeros((n, range.dim()));
    for (m, idx) in range.indices().take(n).enumerate() {
        rows[[m, m]] = (2f64).powf(idx.k() as f64 / 2.0);
    }
    Subspace::from_rows_unchecked(range, rows)
}

/// The whole coefficient space.
pub fn full_space(range: LevelRange) -> Subspace {
    haar_truncation(range.dim(), range).expect("full capacity")
}

/// Hat function at node `i` of the uniform mesh with `n` nodes on `[0, 1]`.
fn hat(n: usize, i: usize) -> PiecewisePolynomial {
    let h = 1.0 / (n - 1) as f64;
    let node = |m: usize| if m == n - 1 { 1.0 } else { m as f64 * h };
    let mut xs = Vec::with_capacity(5);
    let mut ys = Vec::with_capacity(5);
    if i > 0 {
        if i > 1 {
            xs.push(0.0);
            ys.push(0.0);
        }
        xs.push(node(i - 1));
        ys.push(0.0);
    }
    xs.push(node(i));
    ys.push(1.0);
    if i + 1 < n {
        xs.push(node(i + 1));
        ys.push(0.0);
        if i + 2 < n {
            xs.push(1.0);
            ys.push(0.0);
        }
    }
    PiecewisePolynomial::linear_interpolant(&xs, &ys).expect("mesh nodes ordered")
}

/// Exact Haar coefficients of the continuous piecewise-linear hat functions
/// on `n` equispaced nodes, orthonormalised. Constants have no Haar
/// coefficients, so the result has dimension at most `n - 1`.
pub fn uniform_spline(n: usize, range: LevelRange) -> Result<Subspace> {
    check_capacity(n, range)?;
    if n < 2 {
        return Err(Error::Parameter("a spline mesh needs at least two nodes".into()));
    }
    let h = 1.0 / (n - 1) as f64;
    let raw = (0..n)
        .map(|i| {
            let f = hat(n, i);
            let lo = (i as f64 - 1.0) * h;
            let hi = (i as f64 + 1.0) * h;
            let mut v = CoefVector::zeros(range);
            for k in range.levels() {
                let cells = (1u64 << k) as f64;
                let first = ((lo * cells).floor().max(0.0) as u64) + 1;
                let last = ((hi * cells).ceil().min(cells)) as u64;
                for j in first..=last.max(first) {
                    let idx = DyadicIndex::new(k, j.min(1u64 << k))?;
                    let at = range.flat_index(idx)?;
                    v.as_mut_slice()[at] = haar_coefficient(&f, idx)?;
                }
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    orthonormalize(&raw)
}

/// Orthonormalised standard-normal vectors from a seeded ChaCha8 stream.
pub fn random_subspace(n: usize, range: LevelRange, seed: u64) -> Result<Subspace> {
    check_capacity(n, range)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = (0..n)
        .map(|_| CoefVector::from_fn(range, |_| StandardNormal.sample(&mut rng)))
        .collect::<Vec<_>>();
    orthonormalize(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{best_l2_family, project};
    use crate::haar::{analyze, weighted_norm};
    use crate::profiles::{x_vector, StepParam};

    #[test]
    fn truncation_spans_first_level() {
        let r = LevelRange::new(3, 5).unwrap();
        let v = haar_truncation(8, r).unwrap();
        assert!(v.gram_deviation() < 1e-14);
        for m in 0..8 {
            let b = v.basis_vector(m);
            assert!(b.level(4).unwrap().iter().all(|c| *c == 0.0));
            assert!(b.level(5).unwrap().iter().all(|c| *c == 0.0));
        }
        // every level-3 unit lies in the span
        for j in 1..=8 {
            let e = CoefVector::unit(r, DyadicIndex::new(3, j).unwrap()).unwrap();
            let p = project(&v, &e).unwrap();
            assert!(weighted_norm(&e.sub(&p).unwrap(), 2.0).unwrap() < 1e-14);
        }
    }

    #[test]
    fn capacity_checked() {
        let r = LevelRange::new(1, 2).unwrap();
        assert!(matches!(haar_truncation(7, r), Err(Error::Capacity(_))));
        assert!(matches!(random_subspace(7, r, 0), Err(Error::Capacity(_))));
        assert!(matches!(uniform_spline(7, r), Err(Error::Capacity(_))));
    }

    #[test]
    fn random_is_deterministic() {
        let r = LevelRange::new(2, 5).unwrap();
        let a = random_subspace(10, r, 42).unwrap();
        let b = random_subspace(10, r, 42).unwrap();
        assert_eq!(a.basis(), b.basis());
        let c = random_subspace(10, r, 43).unwrap();
        assert_ne!(a.basis(), c.basis());
    }

    #[test]
    fn hats_have_exact_coefficients() {
        let r = LevelRange::new(1, 5).unwrap();
        for n in [3usize, 5, 9] {
            for i in 0..n {
                let f = hat(n, i);
                let direct = analyze(&f, r).unwrap();
                assert!((f.eval(i as f64 / (n - 1) as f64) - 1.0).abs() < 1e-14);
                assert!(direct.as_slice().iter().all(|c| c.is_finite()));
            }
        }
    }

    #[test]
    fn spline_drops_constant_direction() {
        let r = LevelRange::new(2, 6).unwrap();
        let v = uniform_spline(9, r).unwrap();
        assert_eq!(v.dim(), 8);
        assert_eq!(v.dropped().len(), 1);
        assert!(v.gram_deviation() < 1e-10);
    }

    #[test]
    fn spline_contains_hat_images() {
        let r = LevelRange::new(2, 6).unwrap();
        let n = 9;
        let v = uniform_spline(n, r).unwrap();
        for i in 0..n {
            let img = analyze(&hat(n, i), r).unwrap();
            let p = project(&v, &img).unwrap();
            let res = weighted_norm(&img.sub(&p).unwrap(), 2.0).unwrap();
            assert!(res < 1e-10 * (1.0 + weighted_norm(&img, 2.0).unwrap()));
        }
    }

    #[test]
    fn spline_error_decreases_with_mesh() {
        let r = LevelRange::new(2, 7).unwrap();
        let t = StepParam::new(1.0 / 3.0).unwrap();
        let x = x_vector(t, r);
        let mut prev = f64::INFINITY;
        for n in [8usize, 16, 32] {
            let v = uniform_spline(n, r).unwrap();
            let h = best_l2_family(&v).eval_at(t);
            let err = weighted_norm(&x.sub(&h).unwrap(), 2.0).unwrap();
            assert!(err < prev, "n = {n}: {err} >= {prev}");
            prev = err;
        }
    }
}
