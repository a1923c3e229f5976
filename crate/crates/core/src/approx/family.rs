use ndarray::{Array1, Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::haar::CoefVector;
use crate::profiles::{x_sparse, StepParam};

use super::lq::best_lq_approximation;
use super::Subspace;

/// How `H(t)` is chosen inside the subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApproximantRule {
    /// `H ≡ 0`.
    Zero,
    /// `H(t) = Π_V X(t)`.
    BestL2,
    /// `H(t) = λ Π_V X(t)`.
    Scaled(f64),
    /// `H(t) = A Π_V X(t)` for a seeded random map `A = I + s G / sqrt(dim)`
    /// acting on basis coordinates.
    Mixed { seed: u64, strength: f64 },
    /// Pointwise best `l_q` approximation of `X(t)`.
    BestLq { q: f64, tol: f64 },
}

impl ApproximantRule {
    pub fn label(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::BestL2 => "best_l2".into(),
            Self::Scaled(l) => format!("scaled({l})"),
            Self::Mixed { seed, strength } => format!("mixed({seed},{strength})"),
            Self::BestLq { q, .. } => format!("best_lq({q})"),
        }
    }
}

/// A family `t ↦ H(t)` of vectors in a fixed subspace.
#[derive(Debug, Clone)]
pub struct ApproximantFamily<'a> {
    subspace: &'a Subspace,
    rule: ApproximantRule,
    mix: Option<Array2<f64>>,
}

/// `H(t) = Π_V X(t)`.
pub fn best_l2_family(v: &Subspace) -> ApproximantFamily<'_> {
    ApproximantFamily { subspace: v, rule: ApproximantRule::BestL2, mix: None }
}

impl<'a> ApproximantFamily<'a> {
    pub fn new(subspace: &'a Subspace, rule: ApproximantRule) -> Result<Self> {
        let mix = match rule {
            ApproximantRule::Mixed { seed, strength } => {
                let d = subspace.dim();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let scale = strength / (d.max(1) as f64).sqrt();
                let mut a = Array2::<f64>::from_shape_fn((d, d), |_| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    scale * g
                });
                for i in 0..d {
                    a[[i, i]] += 1.0;
                }
                Some(a)
            }
            ApproximantRule::BestLq { q, tol } => {
                if !(q > 2.0) || !(tol > 0.0) {
                    return Err(Error::Parameter(format!("best_lq needs q > 2 and tol > 0, got {q}, {tol}")));
                }
                None
            }
            ApproximantRule::Scaled(l) if !l.is_finite() => {
                return Err(Error::Parameter(format!("scale {l} not finite")));
            }
            _ => None,
        };
        Ok(Self { subspace, rule, mix })
    }

    pub fn subspace(&self) -> &'a Subspace {
        self.subspace
    }

    pub fn rule(&self) -> ApproximantRule {
        self.rule
    }

    /// Whether `H(t)` is linear on every cell of level `k1 + 1`, which makes
    /// cellwise integration exact.
    pub fn is_linear_in_t(&self) -> bool {
        !matches!(self.rule, ApproximantRule::BestLq { .. })
    }

    /// Basis coordinates `alpha(t)` with `H(t) = sum_m alpha_m(t) v_m`.
    pub fn coefficients(&self, t: f64) -> Vec<f64> {
        let v = self.subspace;
        match self.rule {
            ApproximantRule::Zero => vec![0.0; v.dim()],
            ApproximantRule::BestL2 => v.coefficients_sparse(&x_sparse(t, v.range())),
            ApproximantRule::Scaled(l) => {
                let mut c = v.coefficients_sparse(&x_sparse(t, v.range()));
                c.iter_mut().for_each(|x| *x *= l);
                c
            }
            ApproximantRule::Mixed { .. } => {
                let c = Array1::from(v.coefficients_sparse(&x_sparse(t, v.range())));
                self.mix.as_ref().expect("mix built").dot(&c).to_vec()
            }
            ApproximantRule::BestLq { q, tol } => {
                let mut x = CoefVector::zeros(v.range());
                for (at, val) in x_sparse(t, v.range()) {
                    x.as_mut_slice()[at] = val;
                }
                best_lq_approximation(v, &x, q, tol).expect("parameters validated").alpha
            }
        }
    }

    pub fn eval_at(&self, t: StepParam) -> CoefVector {
        self.subspace.combine(&self.coefficients(t.get()))
    }

    /// `||H(t)||_{2,w}^2 = |alpha(t)|^2` for an orthonormal basis.
    pub fn energy(&self, t: f64) -> f64 {
        let a = self.coefficients(t);
        ArrayView1::from(&a).dot(&ArrayView1::from(&a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::{families, orthonormalize, project};
    use crate::haar::{weighted_norm, LevelRange};
    use crate::profiles::x_vector;
    use rand::Rng;

    #[test]
    fn full_space_reproduces_x() {
        let r = LevelRange::new(1, 4).unwrap();
        let v = families::full_space(r);
        let f = best_l2_family(&v);
        for i in 0..33 {
            let t = StepParam::new(i as f64 / 32.0).unwrap();
            let diff = x_vector(t, r).sub(&f.eval_at(t)).unwrap();
            assert!(weighted_norm(&diff, 2.0).unwrap() < 1e-14);
        }
    }

    #[test]
    fn trivial_subspace_gives_zero() {
        let r = LevelRange::new(1, 4).unwrap();
        let v = Subspace::trivial(r);
        let f = best_l2_family(&v);
        let t = StepParam::new(0.3).unwrap();
        assert!(f.eval_at(t).is_zero());
    }

    #[test]
    fn best_l2_beats_random_members() {
        let r = LevelRange::new(2, 5).unwrap();
        let v = families::random_subspace(10, r, 8).unwrap();
        let f = best_l2_family(&v);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let t = StepParam::new(rng.random_range(0.0..1.0)).unwrap();
            let x = x_vector(t, r);
            let best = weighted_norm(&x.sub(&f.eval_at(t)).unwrap(), 2.0).unwrap();
            for _ in 0..100 {
                let alpha: Vec<f64> = (0..v.dim()).map(|_| rng.random_range(-0.5..0.5)).collect();
                let u = v.combine(&alpha);
                assert!(best <= weighted_norm(&x.sub(&u).unwrap(), 2.0).unwrap() + 1e-15);
            }
        }
    }

    #[test]
    fn every_rule_stays_in_subspace() {
        let r = LevelRange::new(2, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let raw: Vec<_> =
            (0..7).map(|_| CoefVector::from_fn(r, |_| rng.random_range(-1.0..1.0))).collect();
        let v = orthonormalize(&raw).unwrap();
        let rules = [
            ApproximantRule::Zero,
            ApproximantRule::BestL2,
            ApproximantRule::Scaled(0.4),
            ApproximantRule::Mixed { seed: 1, strength: 0.5 },
            ApproximantRule::BestLq { q: 4.0, tol: 1e-10 },
        ];
        for rule in rules {
            let f = ApproximantFamily::new(&v, rule).unwrap();
            let t = StepParam::new(0.61).unwrap();
            let h = f.eval_at(t);
            let resid = h.sub(&project(&v, &h).unwrap()).unwrap();
            assert!(weighted_norm(&resid, 2.0).unwrap() < 1e-9, "{}", rule.label());
        }
    }
}
