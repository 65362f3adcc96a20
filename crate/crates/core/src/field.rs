//! Potential of a layered inclusion under a polynomial loading.
//!
//! In layer `j` the potential is the series
//! `Σ_k α¹_k w^k + β¹_k conj(w^k) + α²_k w^{-k} + β²_k conj(w^{-k})`
//! in the conformal coordinate `w = e^{ρ+iθ}`. Exterior coefficients come
//! from the FPTs, the others from the `2×2` transmission relation at each
//! interface, and the core is evaluated as a Faber series.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::conformal::{ConformalMap, GrunskyMatrix};
use crate::error::{Error, Result};
use crate::fpt::FptTable;
use crate::structure::{LayeredStructure, Mode2x2};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Core residuals above this abort the solve.
pub const CONSISTENCY_TOLERANCE: f64 = 1e-6;

/// A harmonic loading `H = c + Σ α_m F_m + β_m conj(F_m)` in the Faber basis
/// of the core.
#[derive(Debug, Clone, PartialEq)]
pub struct Loading {
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
    constant: f64,
}

impl Loading {
    /// `alpha[m-1]`, `beta[m-1]` multiply `F_m` and `conj(F_m)`.
    pub fn faber(mut alpha: Vec<Complex64>, mut beta: Vec<Complex64>) -> Result<Self> {
        let n = alpha.len().max(beta.len());
        alpha.resize(n, ZERO);
        beta.resize(n, ZERO);
        let finite = alpha.iter().chain(&beta).all(|z| z.is_finite());
        let nonzero = alpha.iter().chain(&beta).any(|z| *z != ZERO);
        if !(finite && nonzero) {
            return Err(Error::EmptyLoading);
        }
        // trailing zero pairs carry no information
        while alpha.last() == Some(&ZERO) && beta.last() == Some(&ZERO) {
            alpha.pop();
            beta.pop();
        }
        Ok(Self {
            alpha,
            beta,
            constant: 0.0,
        })
    }

    /// `H(z) = Re Σ_n q_n z^n`, rewritten in the Faber basis of `map`.
    pub fn from_polynomial(map: &ConformalMap, q: &[Complex64]) -> Result<Self> {
        let degree = q.len().saturating_sub(1);
        let faber = map.faber_coeffs(degree);
        // peel off leading terms: every F_j is monic of degree j
        let mut rest = q.to_vec();
        let mut s = vec![ZERO; degree + 1];
        for j in (0..=degree).rev() {
            let lead = rest[j];
            s[j] = lead;
            if lead != ZERO {
                for (i, &f) in faber[j].iter().enumerate() {
                    rest[i] -= lead * f;
                }
            }
        }
        let alpha: Vec<Complex64> = s.iter().skip(1).map(|z| z * 0.5).collect();
        let beta: Vec<Complex64> = s.iter().skip(1).map(|z| z.conj() * 0.5).collect();
        let mut loading = Self::faber(alpha, beta)?;
        loading.constant = s[0].re;
        Ok(loading)
    }

    /// `H(x) = x_2`.
    pub fn uniform_x2(map: &ConformalMap) -> Result<Self> {
        Self::from_polynomial(map, &[ZERO, Complex64::new(0.0, -1.0)])
    }

    /// `H(x) = x_1`.
    pub fn uniform_x1(map: &ConformalMap) -> Result<Self> {
        Self::from_polynomial(map, &[ZERO, Complex64::new(1.0, 0.0)])
    }

    /// `H(x) = x_1 x_2`.
    pub fn hyperbolic_x1x2(map: &ConformalMap) -> Result<Self> {
        Self::from_polynomial(map, &[ZERO, ZERO, Complex64::new(0.0, -0.5)])
    }

    pub fn with_constant(mut self, constant: f64) -> Self {
        self.constant = constant;
        self
    }

    /// Highest Faber index present.
    pub fn degree(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// `H(z)`; the real part for real loadings.
    pub fn eval(&self, map: &ConformalMap, z: Complex64) -> f64 {
        let f = map.faber_values(z, self.degree());
        let sum: Complex64 = (0..self.degree())
            .map(|i| self.alpha[i] * f[i + 1] + self.beta[i] * f[i + 1].conj())
            .sum();
        sum.re + self.constant
    }
}

/// Series coefficients of one layer, indexed by `k - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerSeries {
    /// Coefficients of `w^k`.
    pub alpha1: Vec<Complex64>,
    /// Coefficients of `conj(w^k)`.
    pub beta1: Vec<Complex64>,
    /// Coefficients of `w^{-k}`.
    pub alpha2: Vec<Complex64>,
    /// Coefficients of `conj(w^{-k})`.
    pub beta2: Vec<Complex64>,
}

impl LayerSeries {
    fn zeros(n: usize) -> Self {
        Self {
            alpha1: vec![ZERO; n],
            beta1: vec![ZERO; n],
            alpha2: vec![ZERO; n],
            beta2: vec![ZERO; n],
        }
    }

    /// Value and `∂/∂ρ` of the series at `w = e^{ρ+iθ}`, real parts.
    pub fn eval(&self, rho: f64, theta: f64) -> (f64, f64) {
        let (mut u, mut du) = (0.0, 0.0);
        for i in 0..self.alpha1.len() {
            let k = (i + 1) as f64;
            let phase = Complex64::from_polar(1.0, k * theta);
            let up = (self.alpha1[i] * phase + self.beta1[i] * phase.conj()) * libm::exp(k * rho);
            let down = (self.alpha2[i] * phase.conj() + self.beta2[i] * phase) * libm::exp(-k * rho);
            u += (up + down).re;
            du += k * (up - down).re;
        }
        (u, du)
    }
}

/// Coefficients of every layer `j = 0..=N+1` for one loading.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerCoefficients {
    layers: Vec<LayerSeries>,
    rhos: Vec<f64>,
    constant: f64,
    core_residual: f64,
}

impl LayerCoefficients {
    pub fn order(&self) -> usize {
        self.layers[0].alpha1.len()
    }

    /// Series of layer `j`; 0 is the core, `N + 1` the exterior.
    pub fn layer(&self, j: usize) -> &LayerSeries {
        &self.layers[j]
    }

    pub fn layer_count(&self) -> usize {
        self.layers.len()
    }

    /// Relative mismatch between the core series and the Faber expansion of
    /// its own loading; small when the truncated system is consistent.
    pub fn core_residual(&self) -> f64 {
        self.core_residual
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Layer containing level `ρ`: 0 for `ρ <= ρ_0`, `j` for
    /// `ρ_{j-1} < ρ <= ρ_j`, `N + 1` beyond `ρ_N`.
    pub fn layer_of(&self, rho: f64) -> usize {
        self.rhos.iter().filter(|&&r| r < rho).count()
    }

    /// `u` at `Ψ(e^{ρ+iθ})` using the series of layer `j`.
    pub fn eval_layer(&self, j: usize, rho: f64, theta: f64) -> f64 {
        self.layers[j].eval(rho, theta).0 + self.constant
    }

    /// `∂u/∂ρ` at `e^{ρ+iθ}` using the series of layer `j`.
    pub fn eval_layer_drho(&self, j: usize, rho: f64, theta: f64) -> f64 {
        self.layers[j].eval(rho, theta).1
    }

    /// `u` at curvilinear coordinates `(ρ, θ)` with `ρ >= ρ_0`.
    pub fn eval_curvilinear(&self, rho: f64, theta: f64) -> Result<f64> {
        if rho < self.rhos[0] - 1e-12 {
            return Err(Error::OutOfDomain);
        }
        Ok(self.eval_layer(self.layer_of(rho), rho, theta))
    }

    /// `u` inside the core from the Faber series of the core coefficients.
    pub fn eval_core(&self, map: &ConformalMap, z: Complex64) -> f64 {
        let core = &self.layers[0];
        let f = map.faber_values(z, self.order());
        let sum: Complex64 = (0..self.order())
            .map(|i| core.alpha1[i] * f[i + 1] + core.beta1[i] * f[i + 1].conj())
            .sum();
        sum.re + self.constant
    }

    /// `u` at a physical point. Points outside the core are located by
    /// inverting the map; with `core` set, points that do not invert are
    /// evaluated with the core series, otherwise they are an error.
    pub fn eval_at(&self, map: &ConformalMap, z: Complex64, core: bool) -> Result<f64> {
        match map.invert(z) {
            Ok(w) => self.eval_curvilinear(libm::log(w.norm()), w.arg()),
            Err(Error::OutOfDomain) if core => Ok(self.eval_core(map, z)),
            Err(e) => Err(e),
        }
    }
}

/// Solves for all layer coefficients of `load` on the structure `s`.
pub fn solve_coefficients(s: &LayeredStructure, table: &FptTable, load: &Loading) -> Result<LayerCoefficients> {
    let grunsky = s.map().grunsky(table.order())?;
    solve_coefficients_with(s, &grunsky, table, load)
}

/// As [`solve_coefficients`] with a precomputed Grunsky matrix, which must
/// have the same truncation as `table`.
pub fn solve_coefficients_with(
    s: &LayeredStructure,
    grunsky: &GrunskyMatrix,
    table: &FptTable,
    load: &Loading,
) -> Result<LayerCoefficients> {
    let n = table.order();
    if grunsky.order() != n {
        return Err(Error::InconsistentTruncation {
            table: n,
            requested: grunsky.order(),
        });
    }
    if load.degree() > n {
        return Err(Error::LoadingTooLong {
            degree: load.degree(),
            order: n,
        });
    }

    // exterior: loading plus FPT perturbation
    let mut ext = LayerSeries::zeros(n);
    for (i, (&a, &b)) in load.alpha().iter().zip(load.beta()).enumerate() {
        ext.alpha1[i] = a;
        ext.beta1[i] = b;
    }
    for m in 1..=load.degree() {
        let (a, b) = (load.alpha()[m - 1], load.beta()[m - 1]);
        if a == ZERO && b == ZERO {
            continue;
        }
        for k in 1..=n {
            let (g1, g2) = table.scaled_at(m, k);
            let reflected = grunsky.get(m, k) - g1;
            ext.alpha2[k - 1] += a * reflected - b * g2.conj();
            ext.beta2[k - 1] += b * reflected.conj() - a * g2;
        }
    }

    let taus = s.contrasts()?;
    let radii: Vec<f64> = s.interface_radii().collect();
    let count = s.coatings() + 2;
    let mut layers = vec![LayerSeries::zeros(n); count];
    layers[count - 1] = ext;
    for j in (0..count - 1).rev() {
        let factor = s.interface_factor(j);
        let (outer, inner) = {
            let (lo, hi) = layers.split_at_mut(j + 1);
            (&hi[0], &mut lo[j])
        };
        for k in 1..=n {
            let t = Mode2x2::interface(taus[j], radii[j], k);
            let i = k - 1;
            inner.alpha1[i] = (outer.alpha1[i] * t.d1 + outer.beta2[i] * t.d2) * factor;
            inner.beta2[i] = (outer.alpha1[i] * t.d3 + outer.beta2[i] * t.d4) * factor;
            inner.beta1[i] = (outer.beta1[i] * t.d1 + outer.alpha2[i] * t.d2) * factor;
            inner.alpha2[i] = (outer.beta1[i] * t.d3 + outer.alpha2[i] * t.d4) * factor;
        }
    }

    let core_residual = core_residual(&layers[0], grunsky);
    if !(core_residual <= CONSISTENCY_TOLERANCE) {
        return Err(Error::ConsistencyFailure {
            residual: core_residual,
            tolerance: CONSISTENCY_TOLERANCE,
        });
    }
    Ok(LayerCoefficients {
        layers,
        rhos: radii.iter().map(|r| libm::log(*r)).collect(),
        constant: load.constant(),
        core_residual,
    })
}

/// `max_k |α²_k - Σ_l α¹_l c_lk| + |β²_k - Σ_l β¹_l conj(c_lk)|`, relative
/// to the largest coefficient involved.
fn core_residual(core: &LayerSeries, grunsky: &GrunskyMatrix) -> f64 {
    let n = grunsky.order();
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for k in 1..=n {
        let mut pa = ZERO;
        let mut pb = ZERO;
        for l in 1..=n {
            let c = grunsky.get(l, k);
            pa += core.alpha1[l - 1] * c;
            pb += core.beta1[l - 1] * c.conj();
        }
        let (a2, b2) = (core.alpha2[k - 1], core.beta2[k - 1]);
        worst = worst.max((a2 - pa).norm() + (b2 - pb).norm());
        scale = scale
            .max(a2.norm())
            .max(b2.norm())
            .max(core.alpha1[k - 1].norm())
            .max(core.beta1[k - 1].norm());
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

/// One sampled value of the potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    /// `(ρ, θ)` for points generated from the conformal coordinate; `None`
    /// for core points sampled on a Cartesian grid.
    pub curvilinear: Option<(f64, f64)>,
    pub u: f64,
    pub layer: usize,
}

/// Rectangular grid clipped to the core.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreGrid {
    pub nx: usize,
    pub ny: usize,
}

/// Sampling plan: `rho_count × theta_count` points `Ψ(e^{ρ+iθ})` and an
/// optional core grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_count: usize,
    pub theta_count: usize,
    pub core: Option<CoreGrid>,
}

/// Samples `u` on a curvilinear grid (rows of constant `ρ`, `θ_i = 2πi/n`)
/// followed by the clipped core grid in row-major order. With a core grid,
/// a `rho_min` below `ρ_0` is raised to `ρ_0`; without one it is an error.
pub fn sample_grid(s: &LayeredStructure, coeffs: &LayerCoefficients, spec: &GridSpec) -> Result<Vec<FieldSample>> {
    let map = s.map();
    let rho0 = map.rho0();
    if spec.rho_count == 0 || spec.theta_count == 0 {
        return Err(Error::InvalidOption("grid counts must be positive"));
    }
    if !(spec.rho_min.is_finite() && spec.rho_max.is_finite() && spec.rho_min <= spec.rho_max) {
        return Err(Error::InvalidOption("rho range must be finite and increasing"));
    }
    let mut rho_min = spec.rho_min;
    if rho_min < rho0 {
        if spec.core.is_none() {
            return Err(Error::OutOfDomain);
        }
        rho_min = rho0;
    }
    let rho_max = spec.rho_max.max(rho_min);

    let mut out = Vec::with_capacity(spec.rho_count * spec.theta_count);
    for i in 0..spec.rho_count {
        let rho = if spec.rho_count == 1 {
            rho_min
        } else {
            rho_min + (rho_max - rho_min) * i as f64 / (spec.rho_count - 1) as f64
        };
        let layer = coeffs.layer_of(rho);
        for t in 0..spec.theta_count {
            let theta = 2.0 * PI * t as f64 / spec.theta_count as f64;
            let z = map.eval_closed(Complex64::from_polar(libm::exp(rho), theta))?;
            out.push(FieldSample {
                x: z.re,
                y: z.im,
                curvilinear: Some((rho, theta)),
                u: coeffs.eval_layer(layer, rho, theta),
                layer,
            });
        }
    }

    if let Some(grid) = spec.core {
        if grid.nx == 0 || grid.ny == 0 {
            return Err(Error::InvalidOption("core grid counts must be positive"));
        }
        let poly = map.boundary_polygon(512);
        let (mut lo, mut hi) = (poly[0], poly[0]);
        for p in &poly {
            lo = Complex64::new(lo.re.min(p.re), lo.im.min(p.im));
            hi = Complex64::new(hi.re.max(p.re), hi.im.max(p.im));
        }
        for iy in 0..grid.ny {
            let y = lo.im + (hi.im - lo.im) * (iy as f64 + 0.5) / grid.ny as f64;
            for ix in 0..grid.nx {
                let x = lo.re + (hi.re - lo.re) * (ix as f64 + 0.5) / grid.nx as f64;
                let z = Complex64::new(x, y);
                if winding_number(&poly, z) != 0 {
                    out.push(FieldSample {
                        x,
                        y,
                        curvilinear: None,
                        u: coeffs.eval_core(map, z),
                        layer: 0,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Winding number of the closed polygon `poly` around `z`.
pub fn winding_number(poly: &[Complex64], z: Complex64) -> i32 {
    let mut wn = 0;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let cross = (b.re - a.re) * (z.im - a.im) - (z.re - a.re) * (b.im - a.im);
        if a.im <= z.im {
            if b.im > z.im && cross > 0.0 {
                wn += 1;
            }
        } else if b.im <= z.im && cross < 0.0 {
            wn -= 1;
        }
    }
    wn
}
