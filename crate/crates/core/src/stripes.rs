//! Striped matrix classes tied to rotational symmetry of order `N`.
//!
//! `S⁺_N` holds matrices with `A_mk = 0` whenever `m - k ≢ 0 (mod N)`,
//! `S⁻_N` those with `A_mk = 0` whenever `m + k ≢ 0 (mod N)`, indices from 1.
//! Products follow a sign rule: `S⁺S⁺, S⁻S⁻ ⊆ S⁺` and `S⁺S⁻, S⁻S⁺ ⊆ S⁻`.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stripe {
    /// `m - k ≡ 0 (mod N)`.
    Diagonal,
    /// `m + k ≡ 0 (mod N)`.
    AntiDiagonal,
}

impl Stripe {
    /// Whether 1-based entry `(m, k)` lies on a stripe for order `n`.
    /// Every entry does when `n` is 0 or 1.
    pub fn allows(self, m: usize, k: usize, n: usize) -> bool {
        if n <= 1 {
            return true;
        }
        match self {
            Stripe::Diagonal => (m + n * k - k) % n == 0,
            Stripe::AntiDiagonal => (m + k) % n == 0,
        }
    }

    /// Class of a product of two striped matrices.
    pub fn product(self, other: Stripe) -> Stripe {
        if self == other {
            Stripe::Diagonal
        } else {
            Stripe::AntiDiagonal
        }
    }
}

/// Largest modulus found off the stripes of `stripe` for order `n`.
pub fn off_stripe_max(a: &DMatrix<Complex64>, stripe: Stripe, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if !stripe.allows(i + 1, j + 1, n) {
                worst = worst.max(a[(i, j)].norm());
            }
        }
    }
    worst
}

/// Zeroes every entry off the stripes.
pub fn project(a: &DMatrix<Complex64>, stripe: Stripe, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| {
        if stripe.allows(i + 1, j + 1, n) {
            a[(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}
