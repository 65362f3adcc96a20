//! Multi-coated inclusions built from level curves `|w| = r_j` of the core's
//! exterior map, and the per-mode transfer products across their interfaces.

use alloc::vec::Vec;

use crate::conformal::ConformalMap;
use crate::error::{Error, Result};

/// `K·ln(r_N)` above which `r_N^{2K}` is too close to the `f64` range.
pub const OVERFLOW_EXPONENT: f64 = 300.0;

/// Default truncation of the semi-infinite systems.
pub const DEFAULT_TRUNCATION: usize = 50;

/// Core `Ω_0` plus `N` confocal coatings; the exterior conductivity is 1.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredStructure {
    map: ConformalMap,
    radii: Vec<f64>,
    sigmas: Vec<f64>,
}

impl LayeredStructure {
    /// `radii` are `r_1..r_N`, `sigmas` are `σ_0..σ_N`.
    pub fn new(map: ConformalMap, radii: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.len() != radii.len() + 1 {
            return Err(Error::ParameterCount {
                expected: radii.len() + 1,
                got: sigmas.len(),
            });
        }
        let mut prev = map.r0();
        for (j, &r) in radii.iter().enumerate() {
            if !(r.is_finite() && r > prev) {
                return Err(Error::NonIncreasingRadii { layer: j + 1 });
            }
            prev = r;
        }
        for (index, &value) in sigmas.iter().enumerate() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConductivity { index, value });
            }
        }
        let s = Self { map, radii, sigmas };
        s.contrasts()?;
        Ok(s)
    }

    /// A simply connected inclusion of conductivity `sigma0`.
    pub fn single(map: ConformalMap, sigma0: f64) -> Result<Self> {
        Self::new(map, Vec::new(), alloc::vec![sigma0])
    }

    pub fn map(&self) -> &ConformalMap {
        &self.map
    }

    /// Number of coatings `N`.
    pub fn coatings(&self) -> usize {
        self.radii.len()
    }

    /// `r_1..r_N`.
    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    /// `σ_0..σ_N`.
    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Interface radii `r_0..r_N`.
    pub fn interface_radii(&self) -> impl Iterator<Item = f64> + '_ {
        core::iter::once(self.map.r0()).chain(self.radii.iter().copied())
    }

    /// `r_N`, or `r_0` without coatings.
    pub fn outer_radius(&self) -> f64 {
        self.radii.last().copied().unwrap_or(self.map.r0())
    }

    /// Conductivity of layer `j` in `0..=N+1`.
    pub fn sigma(&self, j: usize) -> f64 {
        self.sigmas.get(j).copied().unwrap_or(1.0)
    }

    /// Same geometry with new coating conductivities `σ_1..σ_N`.
    pub fn with_coating_sigmas(&self, coating: &[f64]) -> Result<Self> {
        if coating.len() != self.coatings() {
            return Err(Error::ParameterCount {
                expected: self.coatings(),
                got: coating.len(),
            });
        }
        let mut sigmas = Vec::with_capacity(coating.len() + 1);
        sigmas.push(self.sigmas[0]);
        sigmas.extend_from_slice(coating);
        Self::new(self.map.clone(), self.radii.clone(), sigmas)
    }

    /// `τ_j = (σ_j + σ_{j+1}) / (σ_j - σ_{j+1})` for `j = 0..N`.
    pub fn contrasts(&self) -> Result<Vec<f64>> {
        (0..=self.coatings())
            .map(|j| {
                let (inner, outer) = (self.sigma(j), self.sigma(j + 1));
                if inner == outer {
                    Err(Error::DegenerateInterface {
                        interface: j,
                        sigma: inner,
                    })
                } else {
                    Ok((inner + outer) / (inner - outer))
                }
            })
            .collect()
    }

    /// Per-interface factor `(σ_j - σ_{j+1}) / (2σ_j)`.
    pub fn interface_factor(&self, j: usize) -> f64 {
        let (inner, outer) = (self.sigma(j), self.sigma(j + 1));
        (inner - outer) / (2.0 * inner)
    }

    /// `κ = Π_j (σ_j - σ_{j+1}) / (2σ_j)`.
    pub fn kappa(&self) -> f64 {
        (0..=self.coatings()).map(|j| self.interface_factor(j)).product()
    }

    /// Transfer products `Π_{j=0}^{N} [τ_j, r_j^{-2k}; r_j^{2k}, τ_j]` for
    /// `k = 1..order`.
    pub fn transfer_diagonals(&self, order: usize) -> Result<TransferDiagonals> {
        if order == 0 {
            return Err(Error::ZeroTruncation);
        }
        let outer = self.outer_radius();
        if order as f64 * libm::fabs(libm::log(outer)) > OVERFLOW_EXPONENT
            || order as f64 * libm::fabs(libm::log(self.map.r0())) > OVERFLOW_EXPONENT
        {
            return Err(Error::TransferOverflow {
                order,
                radius: outer,
            });
        }
        let taus = self.contrasts()?;
        let radii: Vec<f64> = self.interface_radii().collect();
        let mut modes = Vec::with_capacity(order);
        for k in 1..=order {
            let mut acc = Mode2x2::IDENTITY;
            for (&tau, &r) in taus.iter().zip(&radii) {
                acc = acc.mul(&Mode2x2::interface(tau, r, k));
            }
            if acc.d4 == 0.0 {
                return Err(Error::SingularTransfer { k });
            }
            modes.push(acc);
        }
        Ok(TransferDiagonals {
            modes,
            kappa: self.kappa(),
        })
    }
}

/// One `2×2` transfer matrix `[d1 d2; d3 d4]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode2x2 {
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl Mode2x2 {
    pub const IDENTITY: Self = Self {
        d1: 1.0,
        d2: 0.0,
        d3: 0.0,
        d4: 1.0,
    };

    /// `[τ, r^{-2k}; r^{2k}, τ]`.
    pub fn interface(tau: f64, r: f64, k: usize) -> Self {
        let p = libm::pow(r, 2.0 * k as f64);
        Self {
            d1: tau,
            d2: 1.0 / p,
            d3: p,
            d4: tau,
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            d1: self.d1 * o.d1 + self.d2 * o.d3,
            d2: self.d1 * o.d2 + self.d2 * o.d4,
            d3: self.d3 * o.d1 + self.d4 * o.d3,
            d4: self.d3 * o.d2 + self.d4 * o.d4,
        }
    }

    pub fn det(&self) -> f64 {
        self.d1 * self.d4 - self.d2 * self.d3
    }
}

/// Diagonal entries of `D_1..D_4` for every mode, plus `κ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferDiagonals {
    modes: Vec<Mode2x2>,
    kappa: f64,
}

impl TransferDiagonals {
    pub fn order(&self) -> usize {
        self.modes.len()
    }

    /// Transfer product for mode `k >= 1`.
    pub fn mode(&self, k: usize) -> &Mode2x2 {
        &self.modes[k - 1]
    }

    pub fn modes(&self) -> &[Mode2x2] {
        &self.modes
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}
