//! Exterior conformal maps `Ψ(w) = w + a0 + Σ a_k w^{-k}` on `|w| > r0`,
//! together with their Faber polynomials and Grunsky coefficients.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients with modulus at or below this are treated as zero when
/// detecting rotational symmetry.
pub const SYMMETRY_TOLERANCE: f64 = 1e-14;

/// Relative slack allowed when a point is declared to lie on `|w| = r0`.
const BOUNDARY_SLACK: f64 = 1e-12;

/// An exterior conformal map with a finite Laurent tail.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalMap {
    r0: f64,
    a0: Complex64,
    coeffs: Vec<Complex64>,
}

impl ConformalMap {
    /// Builds a map from its conformal radius, translation and Laurent
    /// coefficients `a_1..a_P`. Rejects maps whose area formula is not
    /// positive, a necessary condition for univalence.
    pub fn new(r0: f64, a0: Complex64, coeffs: Vec<Complex64>) -> Result<Self> {
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::InvalidRadius(r0));
        }
        let map = Self { r0, a0, coeffs };
        map.area()?;
        Ok(map)
    }

    /// The unit disk, `Ψ(w) = w` on `|w| > 1`.
    pub fn disk(r0: f64) -> Result<Self> {
        Self::new(r0, ZERO, Vec::new())
    }

    /// `Ψ(w) = w + a1/w`, the exterior map of an ellipse.
    pub fn ellipse(r0: f64, a1: Complex64) -> Result<Self> {
        Self::new(r0, ZERO, vec![a1])
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    pub fn rho0(&self) -> f64 {
        libm::log(self.r0)
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    /// Laurent coefficients `a_1..a_P`.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `a_n` for `n >= 0`, zero past the stored tail.
    pub fn coeff(&self, n: usize) -> Complex64 {
        match n {
            0 => self.a0,
            n => self.coeffs.get(n - 1).copied().unwrap_or(ZERO),
        }
    }

    /// True when the map is `w + a0 + a1/w` (ellipse or disk).
    pub fn is_elliptic(&self) -> bool {
        self.coeffs
            .iter()
            .skip(1)
            .all(|a| a.norm() <= SYMMETRY_TOLERANCE)
    }

    /// True when every Laurent coefficient is real, i.e. the shape is
    /// mirror-symmetric about a horizontal line.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|a| a.im == 0.0) && self.a0.im == 0.0
    }

    /// Evaluates `Ψ(w)` for `|w| > r0`.
    pub fn eval(&self, w: Complex64) -> Result<Complex64> {
        let modulus = w.norm();
        if !(modulus > self.r0) {
            return Err(Error::InsideOmittedDisk {
                modulus,
                r0: self.r0,
            });
        }
        Ok(self.eval_unchecked(w))
    }

    /// Evaluates `Ψ(w)` on the closed exterior `|w| >= r0`, which is what
    /// boundary sampling needs.
    pub fn eval_closed(&self, w: Complex64) -> Result<Complex64> {
        let modulus = w.norm();
        if modulus < self.r0 * (1.0 - BOUNDARY_SLACK) {
            return Err(Error::InsideOmittedDisk {
                modulus,
                r0: self.r0,
            });
        }
        Ok(self.eval_unchecked(w))
    }

    pub(crate) fn eval_unchecked(&self, w: Complex64) -> Complex64 {
        let inv = w.inv();
        // Horner in 1/w
        let tail = self
            .coeffs
            .iter()
            .rev()
            .fold(ZERO, |acc, &a| (acc + a) * inv);
        w + self.a0 + tail
    }

    /// `Ψ'(w)`.
    pub fn derivative(&self, w: Complex64) -> Complex64 {
        let inv = w.inv();
        let mut power = inv * inv;
        let mut sum = Complex64::new(1.0, 0.0);
        for (k, &a) in self.coeffs.iter().enumerate() {
            sum -= a * (k + 1) as f64 * power;
            power *= inv;
        }
        sum
    }

    /// Area enclosed by the image of `|w| = r0`.
    pub fn area(&self) -> Result<f64> {
        let tail: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let k = (i + 1) as f64;
                k * a.norm_sqr() / libm::pow(self.r0, 2.0 * k)
            })
            .sum();
        let area = PI * self.r0 * self.r0 - PI * tail;
        if area > 0.0 {
            Ok(area)
        } else {
            Err(Error::NonUnivalentMap { area })
        }
    }

    /// Largest `N` such that the shape is invariant under rotation by
    /// `2π/N` about `a0`: every nonzero `a_n` has `n ≡ -1 (mod N)`.
    /// Returns 1 without symmetry and 0 for a disk, which is invariant under
    /// every rotation.
    pub fn symmetry_order(&self) -> usize {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > SYMMETRY_TOLERANCE)
            .fold(0, |g, (i, _)| gcd(g, i + 2))
    }

    /// Grunsky coefficients `c_mk` for `1 <= m, k <= order`.
    ///
    /// Starts from `c_1n = a_n`, `c_n1 = n a_n` and applies
    ///
    /// `c_{m,k+1} = c_{m+1,k} - a_{m+k} + Σ_{s<m} a_{m-s} c_{sk} - Σ_{s<k} a_{k-s} c_{ms}`
    ///
    /// along anti-diagonals `m + k = const`, largest `m` first, so every
    /// right-hand side entry is already known. Rows up to `2·order - 1` are
    /// needed as intermediates.
    pub fn grunsky(&self, order: usize) -> Result<GrunskyMatrix> {
        if order == 0 {
            return Err(Error::ZeroTruncation);
        }
        let span = 2 * order;
        // 1-based scratch table, indices 0 unused
        let mut c = vec![vec![ZERO; span + 1]; span + 1];
        for n in 1..=span {
            let a = self.coeff(n);
            c[1][n] = a;
            c[n][1] = a * n as f64;
        }
        let p = self.coeffs.len();
        for diag in 4..=span {
            for m in (2..=diag - 2).rev() {
                let k = diag - m;
                let prev = k - 1;
                let mut v = c[m + 1][prev] - self.coeff(m + prev);
                for s in m.saturating_sub(p).max(1)..m {
                    v += self.coeff(m - s) * c[s][prev];
                }
                for s in prev.saturating_sub(p).max(1)..prev {
                    v -= self.coeff(prev - s) * c[m][s];
                }
                c[m][k] = v;
            }
        }
        let entries = DMatrix::from_fn(order, order, |i, j| c[i + 1][j + 1]);
        Ok(GrunskyMatrix { entries })
    }

    /// Monomial coefficients (ascending powers) of the Faber polynomials
    /// `F_0..F_{m_max}`, from
    /// `F_{n+1}(z) = z F_n(z) - Σ_{j=0}^{n} a_j F_{n-j}(z) - n a_n`.
    pub fn faber_coeffs(&self, m_max: usize) -> Vec<Vec<Complex64>> {
        let mut polys: Vec<Vec<Complex64>> = Vec::with_capacity(m_max + 1);
        polys.push(vec![Complex64::new(1.0, 0.0)]);
        for n in 0..m_max {
            let mut next = vec![ZERO; n + 2];
            for (i, &c) in polys[n].iter().enumerate() {
                next[i + 1] += c;
            }
            for j in 0..=n {
                let a = self.coeff(j);
                if a == ZERO {
                    continue;
                }
                for (i, &c) in polys[n - j].iter().enumerate() {
                    next[i] -= a * c;
                }
            }
            next[0] -= self.coeff(n) * n as f64;
            polys.push(next);
        }
        polys
    }

    /// Values `F_0(z)..F_{m_max}(z)` from the same recursion applied to
    /// numbers, which avoids the cancellation of expanded monomial forms.
    pub fn faber_values(&self, z: Complex64, m_max: usize) -> Vec<Complex64> {
        let mut vals = Vec::with_capacity(m_max + 1);
        vals.push(Complex64::new(1.0, 0.0));
        let p = self.coeffs.len();
        for n in 0..m_max {
            let mut next = (z - self.a0) * vals[n];
            for j in 1..=n.min(p) {
                next -= self.coeff(j) * vals[n - j];
            }
            next -= self.coeff(n) * n as f64;
            vals.push(next);
        }
        vals
    }

    /// Solves `Ψ(w) = z` for `|w| > r0` by Newton's method started at
    /// `w = z - a0`. Fails with [`Error::OutOfDomain`] when the iteration
    /// does not settle at a point of the exterior disk, which is the case
    /// for `z` inside the core.
    pub fn invert(&self, z: Complex64) -> Result<Complex64> {
        const MAX_ITER: usize = 30;
        const TOL: f64 = 1e-12;
        let scale = 1.0 + z.norm();
        let mut w = z - self.a0;
        if w.norm() <= self.r0 {
            // project the start outside so the iteration begins on the right sheet
            w = if w.norm() == 0.0 {
                Complex64::new(1.01 * self.r0, 0.0)
            } else {
                w * (1.01 * self.r0 / w.norm())
            };
        }
        for _ in 0..MAX_ITER {
            let residual = self.eval_unchecked(w) - z;
            let done = residual.norm() <= TOL * scale;
            let dpsi = self.derivative(w);
            if dpsi.norm() == 0.0 || !dpsi.is_finite() {
                return Err(Error::OutOfDomain);
            }
            // one more step after the tolerance is met drives the error to rounding level
            w -= residual / dpsi;
            if done {
                break;
            }
        }
        let residual = (self.eval_unchecked(w) - z).norm();
        if residual <= 1e3 * TOL * scale && w.norm() > self.r0 {
            Ok(w)
        } else {
            Err(Error::OutOfDomain)
        }
    }

    /// Image of `|w| = r0` sampled at `n` equispaced angles.
    pub fn boundary_polygon(&self, n: usize) -> Vec<Complex64> {
        self.level_curve(self.r0, n)
    }

    /// Image of `|w| = radius` sampled at `n` equispaced angles.
    pub fn level_curve(&self, radius: f64, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / n as f64;
                self.eval_unchecked(Complex64::from_polar(radius, theta))
            })
            .collect()
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Truncated Grunsky matrix `(c_mk)`, stored 0-based; use [`GrunskyMatrix::get`]
/// for the 1-based indices of the formulas.
#[derive(Debug, Clone, PartialEq)]
pub struct GrunskyMatrix {
    entries: DMatrix<Complex64>,
}

impl GrunskyMatrix {
    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    /// `c_mk` with `m, k >= 1`.
    pub fn get(&self, m: usize, k: usize) -> Complex64 {
        self.entries[(m - 1, k - 1)]
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Mutable access to the entries. Only meant for negative-control
    /// experiments that corrupt a matrix on purpose.
    pub fn matrix_mut(&mut self) -> &mut DMatrix<Complex64> {
        &mut self.entries
    }

    /// Largest `|k c_mk - m c_km|` over the table.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.order();
        let mut worst: f64 = 0.0;
        for m in 1..=n {
            for k in 1..=n {
                let d = self.get(m, k) * k as f64 - self.get(k, m) * m as f64;
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// Row sums `Σ_k |sqrt(k/m) c_mk / r0^{m+k}|²`; the Grunsky inequality
    /// says each is below one.
    pub fn bound_rows(&self, r0: f64) -> Vec<f64> {
        let n = self.order();
        (1..=n)
            .map(|m| {
                (1..=n)
                    .map(|k| {
                        let scale =
                            libm::sqrt(k as f64 / m as f64) / libm::pow(r0, (m + k) as f64);
                        (self.get(m, k) * scale).norm_sqr()
                    })
                    .sum()
            })
            .collect()
    }
}
