//! Faber polynomial polarization tensors (FPTs).
//!
//! For a layered inclusion the perturbation of a loading `F_m` outside the
//! structure is `-Σ_k (F1_mk w^{-k} + F2_mk conj(w^{-k})) / (4πk)`. The two
//! tables follow from the semi-infinite system
//!
//! ```text
//! F± (I - conj(X±) X±) = Y± + conj(Y±) X±
//! X± = ±D2 C D4⁻¹,   Y± = [D3 - conj(C) D2 C ± (C D4 - D1 C)] D4⁻¹
//! F1 = 2πk (F⁺ - F⁻),   F2 = 2πk conj(F⁺ + F⁻)
//! ```
//!
//! truncated to `K × K`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::conformal::{ConformalMap, GrunskyMatrix};
use crate::error::{Error, Result};
use crate::linalg::{conj, RightSolver};
use crate::structure::LayeredStructure;

/// Conditioning of `I - conj(X) X` for a computed table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioning {
    /// `min_k (1 - Σ_{l≠k} |A_kl| / |A_kk|)`; positive means strictly
    /// diagonally dominant rows.
    pub dominance_margin: f64,
    /// Ratio of largest to smallest LU pivot.
    pub pivot_ratio: f64,
}

impl Conditioning {
    fn measure(a: &DMatrix<Complex64>, pivot_ratio: f64) -> Self {
        let n = a.nrows();
        let dominance_margin = (0..n)
            .map(|i| {
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
                1.0 - off / a[(i, i)].norm()
            })
            .fold(f64::INFINITY, f64::min);
        Self {
            dominance_margin,
            pivot_ratio,
        }
    }
}

/// Truncated FPT matrices with the intermediates of the solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FptTable {
    f1: DMatrix<Complex64>,
    f2: DMatrix<Complex64>,
    f_plus: DMatrix<Complex64>,
    f_minus: DMatrix<Complex64>,
    x_plus: DMatrix<Complex64>,
    y_plus: DMatrix<Complex64>,
    y_minus: DMatrix<Complex64>,
    conditioning: Conditioning,
}

impl FptTable {
    pub fn order(&self) -> usize {
        self.f1.nrows()
    }

    pub fn f1(&self) -> &DMatrix<Complex64> {
        &self.f1
    }

    pub fn f2(&self) -> &DMatrix<Complex64> {
        &self.f2
    }

    /// `F1_mk` with 1-based indices.
    pub fn f1_at(&self, m: usize, k: usize) -> Complex64 {
        self.f1[(m - 1, k - 1)]
    }

    /// `F2_mk` with 1-based indices.
    pub fn f2_at(&self, m: usize, k: usize) -> Complex64 {
        self.f2[(m - 1, k - 1)]
    }

    /// `(F1_mk, F2_mk) / (4πk)`, the coefficients that multiply `w^{-k}` and
    /// `conj(w^{-k})` in the exterior expansion.
    pub fn scaled_at(&self, m: usize, k: usize) -> (Complex64, Complex64) {
        let s = 4.0 * PI * k as f64;
        (self.f1_at(m, k) / s, self.f2_at(m, k) / s)
    }

    pub fn f_plus(&self) -> &DMatrix<Complex64> {
        &self.f_plus
    }

    pub fn f_minus(&self) -> &DMatrix<Complex64> {
        &self.f_minus
    }

    pub fn x_plus(&self) -> &DMatrix<Complex64> {
        &self.x_plus
    }

    /// `X⁻ = -X⁺`.
    pub fn x_minus(&self) -> DMatrix<Complex64> {
        -&self.x_plus
    }

    pub fn y_plus(&self) -> &DMatrix<Complex64> {
        &self.y_plus
    }

    pub fn y_minus(&self) -> &DMatrix<Complex64> {
        &self.y_minus
    }

    pub fn conditioning(&self) -> Conditioning {
        self.conditioning
    }

    /// Largest modulus over both tables.
    pub fn max_abs(&self) -> f64 {
        self.f1
            .iter()
            .chain(self.f2.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Truncated cloaking diagnostic
    /// `F_n^K = sqrt(Σ_{k≤K} |F1_nk/(4πk)|² + |F2_nk/(4πk)|²)`.
    pub fn diagnostic(&self, n: usize, upto: usize) -> Result<f64> {
        if upto > self.order() || n == 0 || n > upto {
            return Err(Error::InconsistentTruncation {
                table: self.order(),
                requested: upto.max(n),
            });
        }
        let sum: f64 = (1..=upto)
            .map(|k| {
                let (a, b) = self.scaled_at(n, k);
                a.norm_sqr() + b.norm_sqr()
            })
            .sum();
        Ok(libm::sqrt(sum))
    }

    /// `F_n^K` for `n = 1..=n_max`, with `K` clamped to the table order.
    pub fn diagnostics(&self, n_max: usize, upto: usize) -> Vec<f64> {
        let upto = upto.min(self.order());
        (1..=n_max.min(upto))
            .map(|n| self.diagnostic(n, upto).unwrap_or(f64::NAN))
            .collect()
    }

    /// First-order polarization tensor `M`, from
    /// `F1_11 = m11 - m22 + 2i m12` and `F2_11 = m11 + m22`.
    pub fn polarization_tensor(&self) -> [[f64; 2]; 2] {
        let (f1, f2) = (self.f1_at(1, 1), self.f2_at(1, 1));
        let m11 = 0.5 * (f2.re + f1.re);
        let m22 = 0.5 * (f2.re - f1.re);
        let m12 = 0.5 * f1.im;
        [[m11, m12], [m12, m22]]
    }

    fn from_f1_f2(
        f1: DMatrix<Complex64>,
        f2: DMatrix<Complex64>,
        x_plus: DMatrix<Complex64>,
        y_plus: DMatrix<Complex64>,
        y_minus: DMatrix<Complex64>,
        conditioning: Conditioning,
    ) -> Self {
        let n = f1.nrows();
        let f_plus = DMatrix::from_fn(n, n, |i, j| {
            (f1[(i, j)] + f2[(i, j)].conj()) / (4.0 * PI * (j + 1) as f64)
        });
        let f_minus = DMatrix::from_fn(n, n, |i, j| {
            -(f1[(i, j)] - f2[(i, j)].conj()) / (4.0 * PI * (j + 1) as f64)
        });
        Self {
            f1,
            f2,
            f_plus,
            f_minus,
            x_plus,
            y_plus,
            y_minus,
            conditioning,
        }
    }
}

/// FPTs of a multi-coated inclusion from the transfer-matrix system.
pub fn fpt_multicoated(s: &LayeredStructure, order: usize) -> Result<FptTable> {
    let grunsky = s.map().grunsky(order)?;
    fpt_multicoated_with(s, &grunsky)
}

/// As [`fpt_multicoated`] with a precomputed Grunsky matrix, whose order sets
/// the truncation.
pub fn fpt_multicoated_with(s: &LayeredStructure, grunsky: &GrunskyMatrix) -> Result<FptTable> {
    let n = grunsky.order();
    let d = s.transfer_diagonals(n)?;
    let c = grunsky.matrix();
    let mode = |k: usize| d.mode(k + 1);

    let x_plus = DMatrix::from_fn(n, n, |i, j| c[(i, j)] * (mode(i).d2 / mode(j).d4));
    let cxc = conj(c) * &x_plus;
    let shear = DMatrix::from_fn(n, n, |i, j| c[(i, j)] * (1.0 - mode(i).d1 / mode(j).d4));
    let mut base = -cxc;
    for k in 0..n {
        base[(k, k)] += Complex64::new(mode(k).d3 / mode(k).d4, 0.0);
    }
    let y_plus = &base + &shear;
    let y_minus = &base - &shear;

    let x_conj = conj(&x_plus);
    let system = DMatrix::<Complex64>::identity(n, n) - &x_conj * &x_plus;
    let solver = RightSolver::new(&system)?;
    let conditioning = Conditioning::measure(&system, solver.pivot_ratio());

    let rhs_plus = &y_plus + conj(&y_plus) * &x_plus;
    let rhs_minus = &y_minus - conj(&y_minus) * &x_plus;
    let f_plus = solver.solve(&rhs_plus)?;
    let f_minus = solver.solve(&rhs_minus)?;

    let f1 = DMatrix::from_fn(n, n, |i, j| {
        (f_plus[(i, j)] - f_minus[(i, j)]) * (2.0 * PI * (j + 1) as f64)
    });
    let f2 = DMatrix::from_fn(n, n, |i, j| {
        (f_plus[(i, j)] + f_minus[(i, j)]).conj() * (2.0 * PI * (j + 1) as f64)
    });
    Ok(FptTable {
        f1,
        f2,
        f_plus,
        f_minus,
        x_plus,
        y_plus,
        y_minus,
        conditioning,
    })
}

/// `τ = (σ0 + 1) / (σ0 - 1)`, i.e. `2λ`.
pub fn contrast_of(sigma0: f64) -> Result<f64> {
    if !(sigma0.is_finite() && sigma0 > 0.0) {
        return Err(Error::InvalidConductivity {
            index: 0,
            value: sigma0,
        });
    }
    if sigma0 == 1.0 {
        return Err(Error::NoInclusion);
    }
    Ok((sigma0 + 1.0) / (sigma0 - 1.0))
}

/// FPTs of a simply connected inclusion with conductivity `sigma0`.
pub fn fpt_single(map: &ConformalMap, sigma0: f64, order: usize) -> Result<FptTable> {
    fpt_single_tau(map, contrast_of(sigma0)?, order)
}

/// FPTs of a simply connected inclusion in terms of the contrast `τ`;
/// `τ = 1` is the perfect conductor and `τ = -1` the insulator.
///
/// Uses the closed form
/// `F1 = 4πk C + 4πk(1-τ²) C G`, `F2_mk = 4πkτ r^{2m} (δ_mk + (1-τ²) conj(G_mk))`
/// with `G = (τ² I - r^{-2ℕ} conj(C) r^{-2ℕ} C)⁻¹`.
pub fn fpt_single_tau(map: &ConformalMap, tau: f64, order: usize) -> Result<FptTable> {
    if !(tau.is_finite() && tau.abs() >= 1.0) {
        return Err(Error::InvalidContrast(tau));
    }
    let grunsky = map.grunsky(order)?;
    let n = order;
    let c = grunsky.matrix();
    let r = map.r0();
    let r2 = |k: usize| libm::pow(r, 2.0 * (k + 1) as f64);
    // B = r^{-2ℕ} conj(C) r^{-2ℕ} C
    let scaled_c = DMatrix::from_fn(n, n, |i, j| c[(i, j)] / r2(i));
    let b = conj(&scaled_c) * &scaled_c;
    let tau2 = tau * tau;
    let system = DMatrix::<Complex64>::identity(n, n) * Complex64::new(tau2, 0.0) - &b;
    let solver = RightSolver::new(&system)?;
    let g = solver.solve(&DMatrix::identity(n, n))?;
    let cg = solver.solve(c)?;
    let gap = 1.0 - tau2;
    let f1 = DMatrix::from_fn(n, n, |i, j| {
        (c[(i, j)] + cg[(i, j)] * gap) * (4.0 * PI * (j + 1) as f64)
    });
    let f2 = DMatrix::from_fn(n, n, |i, j| {
        let delta = if i == j { 1.0 } else { 0.0 };
        (g[(i, j)].conj() * gap + delta) * (4.0 * PI * (j + 1) as f64 * tau * r2(i))
    });

    let x_plus = scaled_c.map(|z| z / tau);
    let mut y = -(conj(c) * &scaled_c);
    for k in 0..n {
        y[(k, k)] += Complex64::new(r2(k), 0.0);
    }
    let y = y.map(|z| z / tau);
    let unit = DMatrix::<Complex64>::identity(n, n) - b.map(|z| z / tau2);
    let conditioning = Conditioning::measure(&unit, solver.pivot_ratio());
    Ok(FptTable::from_f1_f2(f1, f2, x_plus, y.clone(), y, conditioning))
}

/// `λ = (σ0 + 1) / (2(σ0 - 1))`.
pub fn lambda_of(sigma0: f64) -> Result<f64> {
    contrast_of(sigma0).map(|t| 0.5 * t)
}

/// Diagonal closed forms for the ellipse `Ψ(w) = w + a1/w` on `|w| > r`:
///
/// ```text
/// F1_mm = 4πm a1^m [1 + (1/4 - λ²) / (λ² - q)]
/// F2_mm = 4πm 2λ r^{2m} [1 + (1/4 - λ²) / (λ² - q)],   q = |a1|^{2m} / (4 r^{4m})
/// ```
///
/// Off-diagonal entries vanish.
pub fn fpt_ellipse_oracle(
    a1: Complex64,
    r: f64,
    lambda: f64,
    m: usize,
    k: usize,
) -> Result<(Complex64, Complex64)> {
    let zero = Complex64::new(0.0, 0.0);
    if m != k {
        return Ok((zero, zero));
    }
    let mf = m as f64;
    let q = libm::pow(a1.norm(), 2.0 * mf) / (4.0 * libm::pow(r, 4.0 * mf));
    let denom = lambda * lambda - q;
    if denom.abs() <= 1e-15 * (lambda * lambda).max(q) {
        return Err(Error::SingularContrast { m });
    }
    let factor = 1.0 + (0.25 - lambda * lambda) / denom;
    let a1m = a1.powu(m as u32);
    let f1 = a1m * (4.0 * PI * mf * factor);
    let f2 = Complex64::new(4.0 * PI * mf * 2.0 * lambda * libm::pow(r, 2.0 * mf) * factor, 0.0);
    Ok((f1, f2))
}
