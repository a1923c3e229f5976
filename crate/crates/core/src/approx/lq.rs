//! Best weighted-`l_q` approximation from a subspace by damped iteratively
//! reweighted least squares.
//!
//! With weights `w_c |r_c|^{q-2}` the reweighted normal equations give the
//! Newton direction of `sum_c w_c |r_c|^q` once scaled by `1/(q-1)`; steps
//! are backtracked until the objective decreases, so the iteration starts
//! at the `l_2` projection and never does worse.

use ndarray::{Array1, Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::haar::CoefVector;
use crate::profiles::{x_vector, StepParam};

use super::Subspace;

/// Floor on the `|r|^{q-2}` reweighting factors.
pub const WEIGHT_FLOOR: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 500;

#[derive(Debug, Clone)]
pub struct LqSolution {
    pub alpha: Vec<f64>,
    pub approximant: CoefVector,
    /// `||x - h||_{q,w}` at the returned iterate.
    pub objective: f64,
    /// Same quantity at the `l_2` projection.
    pub l2_objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn objective_pow(x: &[f64], v: &Subspace, alpha: &Array1<f64>, q: f64) -> f64 {
    let h = v.basis().t().dot(alpha);
    let w = v.weights();
    x.iter()
        .zip(h.iter())
        .zip(w.iter())
        .map(|((xi, hi), wi)| wi * (xi - hi).abs().powf(q))
        .sum()
}

/// Lower-triangular Cholesky solve of `g y = b`; adds a small ridge when
/// `g` is numerically singular.
fn cholesky_solve(g: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let n = g.nrows();
    let trace: f64 = (0..n).map(|i| g[[i, i]]).sum();
    let mut ridge = 0.0;
    for _attempt in 0..8 {
        let mut l = Array2::<f64>::zeros((n, n));
        let mut ok = true;
        'outer: for i in 0..n {
            for j in 0..=i {
                let mut s = g[[i, j]] + if i == j { ridge } else { 0.0 };
                for p in 0..j {
                    s -= l[[i, p]] * l[[j, p]];
                }
                if i == j {
                    if s <= 0.0 {
                        ok = false;
                        break 'outer;
                    }
                    l[[i, i]] = s.sqrt();
                } else {
                    l[[i, j]] = s / l[[j, j]];
                }
            }
        }
        if ok {
            let mut y = b.clone();
            for i in 0..n {
                let mut s = y[i];
                for p in 0..i {
                    s -= l[[i, p]] * y[p];
                }
                y[i] = s / l[[i, i]];
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for p in i + 1..n {
                    s -= l[[p, i]] * y[p];
                }
                y[i] = s / l[[i, i]];
            }
            return Some(y);
        }
        ridge = if ridge == 0.0 { 1e-14 * trace.max(f64::MIN_POSITIVE) } else { ridge * 100.0 };
    }
    None
}

/// Minimises `||x - h||_{q,w}` over `h` in `v`.
pub fn best_lq_approximation(v: &Subspace, x: &CoefVector, q: f64, tol: f64) -> Result<LqSolution> {
    if !(q > 2.0) || !q.is_finite() {
        return Err(Error::Parameter(format!("q = {q} must lie in (2, inf)")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance {tol} must be positive")));
    }
    let xs = x.as_slice();
    let mut alpha = Array1::from(v.coefficients(x)?);
    let mut phi = objective_pow(xs, v, &alpha, q);
    let l2_objective = phi.powf(1.0 / q);
    let w = v.weights();
    let theta0 = 1.0 / (q - 1.0);

    let mut iterations = 0;
    let mut converged = v.dim() == 0 || phi == 0.0;
    while !converged && iterations < MAX_ITERATIONS {
        iterations += 1;
        let h = v.basis().t().dot(&alpha);
        let r: Array1<f64> = ArrayView1::from(xs).to_owned() - &h;
        let omega: Array1<f64> = r
            .iter()
            .zip(w.iter())
            .map(|(ri, wi)| wi * ri.abs().powf(q - 2.0).max(WEIGHT_FLOOR))
            .collect();
        let weighted = v.basis() * &omega;
        let gram = weighted.dot(&v.basis().t());
        let rhs = weighted.dot(&r);
        let Some(dir) = cholesky_solve(&gram, &rhs) else {
            break;
        };

        let mut theta = theta0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &alpha + &(&dir * theta);
            let phi_trial = objective_pow(xs, v, &trial, q);
            if phi_trial < phi {
                accepted = Some((trial, phi_trial));
                break;
            }
            theta *= 0.5;
        }
        match accepted {
            Some((trial, phi_trial)) => {
                let rel = (phi - phi_trial) / phi;
                alpha = trial;
                phi = phi_trial;
                if rel < tol || phi == 0.0 {
                    converged = true;
                }
            }
            // no descent left at working precision
            None => converged = true,
        }
    }

    let approximant = v.combine(alpha.as_slice().expect("contiguous"));
    Ok(LqSolution {
        alpha: alpha.to_vec(),
        approximant,
        objective: phi.powf(1.0 / q),
        l2_objective,
        iterations,
        converged,
    })
}

/// Best `l_q` approximation of `X(t)` from `v`.
pub fn best_lq_on_grid(v: &Subspace, t: StepParam, q: f64, tol: f64) -> Result<LqSolution> {
    let x = x_vector(t, v.range());
    best_lq_approximation(v, &x, q, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{families, orthonormalize};
    use crate::haar::{weighted_norm, LevelRange};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..200 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = f(d);
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn full_space_is_exact() {
        let r = LevelRange::new(2, 4).unwrap();
        let v = families::full_space(r);
        let t = StepParam::new(0.377).unwrap();
        let sol = best_lq_on_grid(&v, t, 4.0, 1e-12).unwrap();
        assert!(sol.objective < 1e-12);
        let x = x_vector(t, r);
        for (a, b) in sol.approximant.as_slice().iter().zip(x.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_matches_golden_section() {
        let r = LevelRange::new(2, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for q in [3.0, 4.0, 6.5] {
            let raw = CoefVector::from_fn(r, |_| rng.random_range(-1.0..1.0));
            let v = orthonormalize(&[raw]).unwrap();
            let basis = v.basis_vector(0);
            let t = StepParam::new(rng.random_range(0.0..1.0)).unwrap();
            let x = x_vector(t, r);
            let line = |s: f64| {
                let mut d = x.clone();
                d.axpy(-s, &basis).unwrap();
                weighted_norm(&d, q).unwrap()
            };
            let s_l2 = v.coefficients(&x).unwrap()[0];
            let width = 4.0 * (s_l2.abs() + weighted_norm(&x, 2.0).unwrap() + 1.0);
            let s_star = golden_section(line, s_l2 - width, s_l2 + width);
            let sol = best_lq_on_grid(&v, t, q, 1e-15).unwrap();
            assert!((sol.alpha[0] - s_star).abs() < 1e-6, "q={q}: {} vs {s_star}", sol.alpha[0]);
            assert!(sol.objective <= line(s_star) + 1e-12);
        }
    }

    #[test]
    fn never_worse_than_l2() {
        let r = LevelRange::new(3, 5).unwrap();
        let v = families::random_subspace(12, r, 5).unwrap();
        for i in 0..20 {
            let t = StepParam::new((i as f64 + 0.31) / 20.0).unwrap();
            let sol = best_lq_on_grid(&v, t, 5.0, 1e-10).unwrap();
            assert!(sol.objective <= sol.l2_objective + 1e-15);
            assert!(sol.converged);
        }
    }

    #[test]
    fn parameters_validated() {
        let r = LevelRange::new(0, 2).unwrap();
        let v = families::full_space(r);
        let t = StepParam::new(0.5).unwrap();
        assert!(best_lq_on_grid(&v, t, 2.0, 1e-8).is_err());
        assert!(best_lq_on_grid(&v, t, 4.0, 0.0).is_err());
    }
}
