//! Thin wrappers over nalgebra's dense factorizations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest tolerated ratio between the biggest and smallest LU pivots.
pub const MAX_PIVOT_RATIO: f64 = 1e8;

/// A factorization of `A` that solves `X A = B` for many right-hand sides.
pub(crate) struct RightSolver {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    pivot_ratio: f64,
}

impl RightSolver {
    /// Factors `Aᵀ` with partial pivoting. Fails when the pivot ratio
    /// exceeds [`MAX_PIVOT_RATIO`].
    pub fn new(a: &DMatrix<Complex64>) -> Result<Self> {
        let lu = a.transpose().lu();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for p in lu.u().diagonal().iter().map(|d| d.norm()) {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        let pivot_ratio = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if !(pivot_ratio <= MAX_PIVOT_RATIO) {
            return Err(Error::IllConditionedSystem { pivot_ratio });
        }
        Ok(Self { lu, pivot_ratio })
    }

    pub fn pivot_ratio(&self) -> f64 {
        self.pivot_ratio
    }

    /// `X = B A^{-1}`, computed as `(A^{-T} Bᵀ)ᵀ`.
    pub fn solve(&self, b: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
        self.lu
            .solve(&b.transpose())
            .map(|x| x.transpose())
            .ok_or(Error::IllConditionedSystem {
                pivot_ratio: f64::INFINITY,
            })
    }
}

/// Moore-Penrose pseudo-inverse, dropping singular values below
/// `rcond · s_max`.
pub fn pseudo_inverse(m: &DMatrix<f64>, rcond: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let s_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = rcond * s_max;
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut out = DMatrix::<f64>::zeros(m.ncols(), m.nrows());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += vt.row(i).transpose() * u.column(i).transpose() / s;
        }
    }
    out
}

/// Entrywise conjugate.
pub fn conj(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    m.map(|z| z.conj())
}
