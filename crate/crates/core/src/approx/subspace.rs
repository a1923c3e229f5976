use ndarray::{s, Array1, Array2, ArrayView1, Axis};

use crate::error::{Error, Result};
use crate::haar::{CoefVector, LevelRange};

/// Relative norm below which a vector counts as dependent on its
/// predecessors.
const DROP_TOL: f64 = 1e-9;
const BLOCK: usize = 32;
/// Allowed deviation of the weighted Gram matrix from the identity.
pub const GRAM_TOL: f64 = 1e-8;

/// Subspace of the coefficient space held as a `<.,.>_w`-orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    range: LevelRange,
    /// `dim x N`, one basis vector per row.
    basis: Array2<f64>,
    /// `N x dim`.
    transposed: Array2<f64>,
    weights: Array1<f64>,
    dropped: Vec<usize>,
}

impl Subspace {
    /// Wraps rows that are already orthonormal, verifying the Gram matrix.
    pub fn from_orthonormal_rows(range: LevelRange, basis: Array2<f64>) -> Result<Self> {
        let s = Self::from_rows_unchecked(range, basis)?;
        let dev = s.gram_deviation();
        if dev > GRAM_TOL {
            return Err(Error::Precondition(format!("basis Gram deviation {dev:e} > {GRAM_TOL:e}")));
        }
        Ok(s)
    }

    /// Wraps rows without checking orthonormality.
    pub fn from_rows_unchecked(range: LevelRange, basis: Array2<f64>) -> Result<Self> {
        if basis.ncols() != range.dim() {
            return Err(Error::Shape(format!(
                "basis rows have {} coordinates, range {range} needs {}",
                basis.ncols(),
                range.dim()
            )));
        }
        let transposed = basis.t().as_standard_layout().into_owned();
        Ok(Self {
            range,
            basis,
            transposed,
            weights: Array1::from(range.weights()),
            dropped: Vec::new(),
        })
    }

    /// The zero subspace.
    pub fn trivial(range: LevelRange) -> Self {
        Self::from_rows_unchecked(range, Array2::zeros((0, range.dim()))).expect("shape")
    }

    pub fn range(&self) -> LevelRange {
        self.range
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Indices of input vectors discarded as linearly dependent.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    pub fn basis(&self) -> &Array2<f64> {
        &self.basis
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    pub fn basis_vector(&self, m: usize) -> CoefVector {
        CoefVector::new(self.range, self.basis.row(m).to_vec()).expect("row length")
    }

    /// Row `c` of the transposed basis: the `c`-th coordinate of every
    /// basis vector.
    #[inline]
    pub fn coordinate_row(&self, c: usize) -> ArrayView1<'_, f64> {
        self.transposed.row(c)
    }

    /// `max |<v_a, v_b>_w - delta_ab|`.
    pub fn gram_deviation(&self) -> f64 {
        if self.dim() == 0 {
            return 0.0;
        }
        let weighted = &self.basis * &self.weights;
        let gram = weighted.dot(&self.basis.t());
        gram.indexed_iter()
            .map(|((a, b), g)| (g - if a == b { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }

    fn check_range(&self, x: &CoefVector) -> Result<()> {
        if x.range() != self.range {
            return Err(Error::Shape(format!(
                "vector over {} projected onto subspace over {}",
                x.range(),
                self.range
            )));
        }
        Ok(())
    }

    /// `(<x, v_m>_w)_m`.
    pub fn coefficients(&self, x: &CoefVector) -> Result<Vec<f64>> {
        self.check_range(x)?;
        let wx = ArrayView1::from(x.as_slice()).to_owned() * &self.weights;
        Ok(self.basis.dot(&wx).to_vec())
    }

    /// Coefficients of a sparse vector given as `(flat index, value)`.
    pub fn coefficients_sparse(&self, entries: &[(usize, f64)]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for &(c, v) in entries {
            let scale = self.weights[c] * v;
            if scale == 0.0 {
                continue;
            }
            for (o, b) in out.iter_mut().zip(self.coordinate_row(c)) {
                *o += scale * b;
            }
        }
        out
    }

    /// `sum_m alpha_m v_m`.
    pub fn combine(&self, alpha: &[f64]) -> CoefVector {
        assert_eq!(alpha.len(), self.dim(), "coefficient count");
        let coords = if self.dim() == 0 {
            vec![0.0; self.range.dim()]
        } else {
            self.basis.t().dot(&ArrayView1::from(alpha)).to_vec()
        };
        CoefVector::new(self.range, coords).expect("row length")
    }

    /// Value of `sum_m alpha_m v_m` at one flat coordinate.
    #[inline]
    pub fn combine_at(&self, alpha: &[f64], c: usize) -> f64 {
        self.coordinate_row(c).iter().zip(alpha).map(|(b, a)| a * b).sum()
    }
}

/// `sum_m <x, v_m>_w v_m`.
pub fn project(v: &Subspace, x: &CoefVector) -> Result<CoefVector> {
    let alpha = v.coefficients(x)?;
    Ok(v.combine(&alpha))
}

/// Blocked classical Gram-Schmidt with one reorthogonalisation pass, under
/// `<.,.>_w`. Dependent inputs are dropped and listed in
/// [`Subspace::dropped`].
pub fn orthonormalize(raw: &[CoefVector]) -> Result<Subspace> {
    let Some(first) = raw.first() else {
        return Err(Error::EmptySubspace);
    };
    let range = first.range();
    if let Some(bad) = raw.iter().find(|v| v.range() != range) {
        return Err(Error::Shape(format!("inputs mix ranges {range} and {}", bad.range())));
    }
    let n = range.dim();
    let sqrt_w: Array1<f64> = Array1::from(range.weights()).mapv(f64::sqrt);

    let mut q = Array2::<f64>::zeros((raw.len().min(n), n));
    let mut count = 0usize;
    let mut dropped = Vec::new();

    for (block_no, chunk) in raw.chunks(BLOCK).enumerate() {
        let mut block = Array2::<f64>::zeros((chunk.len(), n));
        for (mut row, v) in block.axis_iter_mut(Axis(0)).zip(chunk) {
            row.assign(&(ArrayView1::from(v.as_slice()).to_owned() * &sqrt_w));
        }
        let norms: Vec<f64> = block.axis_iter(Axis(0)).map(|r| r.dot(&r).sqrt()).collect();

        for _ in 0..2 {
            if count > 0 {
                let accepted = q.slice(s![..count, ..]);
                let c = block.dot(&accepted.t());
                block -= &c.dot(&accepted);
            }
        }

        let block_start = count;
        for (i, original) in norms.into_iter().enumerate() {
            let mut r = block.row(i).to_owned();
            for _ in 0..2 {
                for m in block_start..count {
                    let qm = q.row(m);
                    let d = r.dot(&qm);
                    r.scaled_add(-d, &qm);
                }
            }
            let nr = r.dot(&r).sqrt();
            if original == 0.0 || nr <= DROP_TOL * original || count == q.nrows() {
                dropped.push(block_no * BLOCK + i);
                continue;
            }
            r /= nr;
            q.row_mut(count).assign(&r);
            count += 1;
        }
    }

    if count == 0 {
        return Err(Error::EmptySubspace);
    }
    let mut basis = q.slice(s![..count, ..]).to_owned();
    basis /= &sqrt_w;
    let mut sub = Subspace::from_rows_unchecked(range, basis)?;
    sub.dropped = dropped;
    Ok(sub)
}
