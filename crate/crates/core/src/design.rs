//! Coating conductivities that cancel or minimize low-order FPTs.
//!
//! The unknowns are `x_j = ln σ_j` for the coatings `j = 1..N`. The residual
//! stacks `(Re, Im) F1_mk/(4πk)` and `(Re, Im) F2_mk/(4πk)` over
//! `1 <= m, k <= M`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::conformal::{ConformalMap, GrunskyMatrix};
use crate::error::{Error, Result};
use crate::fpt::{fpt_multicoated_with, FptTable};
use crate::linalg::pseudo_inverse;
use crate::structure::{LayeredStructure, DEFAULT_TRUNCATION};

/// Number of diagnostics `F_1..F_5` reported with a result.
pub const DIAGNOSTIC_ORDERS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignMode {
    /// Drive `f` to zero.
    Vanish,
    /// Minimize `‖f‖²`; a vanishing step counts as convergence.
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignStatus {
    Converged,
    Stalled,
    GridBest,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignOptions {
    pub mode: DesignMode,
    /// Newton damping `α` in `(0, 1]`.
    pub damping: f64,
    pub max_iterations: usize,
    /// Central-difference step in `ln σ`.
    pub fd_step: f64,
    /// Convergence threshold on `‖f‖`.
    pub tolerance: f64,
    /// Stop once the step norm drops below this.
    pub step_tolerance: f64,
    /// In minimize mode, a step norm below this counts as stationary.
    pub stationary_step: f64,
    /// Relative singular-value cutoff of the pseudo-inverse.
    pub rcond: f64,
    pub grid_lo: f64,
    pub grid_hi: f64,
    /// Nodes per coating.
    pub grid_resolution: usize,
    /// Refine the best grid node with Newton.
    pub polish: bool,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            mode: DesignMode::Vanish,
            damping: 0.5,
            max_iterations: 200,
            fd_step: 1e-6,
            tolerance: 1e-10,
            step_tolerance: 1e-14,
            stationary_step: 1e-9,
            rcond: 1e-10,
            grid_lo: 0.01,
            grid_hi: 10.0,
            grid_resolution: 40,
            polish: true,
        }
    }
}

/// One Newton iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    /// Coating conductivities `σ_1..σ_N`.
    pub sigma: Vec<f64>,
    /// `‖f(σ)‖`.
    pub objective: f64,
    /// `F_n^K` for `n = 1..=5` at `σ`, `K` the table truncation.
    pub diagnostics: Vec<f64>,
    pub trace: Vec<TraceEntry>,
    pub status: DesignStatus,
}

#[derive(Debug, Clone)]
pub struct DesignProblem {
    base: LayeredStructure,
    grunsky: GrunskyMatrix,
    order: usize,
    truncation: usize,
    options: DesignOptions,
}

impl DesignProblem {
    /// `base` fixes the map, the radii and `σ_0`; its coating conductivities
    /// are only a template.
    pub fn new(base: LayeredStructure, order: usize, truncation: usize, options: DesignOptions) -> Result<Self> {
        if base.coatings() == 0 {
            return Err(Error::NothingToDesign);
        }
        if order == 0 {
            return Err(Error::InvalidOrder);
        }
        if truncation == 0 {
            return Err(Error::ZeroTruncation);
        }
        if order > truncation {
            return Err(Error::InconsistentTruncation {
                table: truncation,
                requested: order,
            });
        }
        validate(&options)?;
        let grunsky = base.map().grunsky(truncation)?;
        Ok(Self {
            base,
            grunsky,
            order,
            truncation,
            options,
        })
    }

    pub fn with_defaults(base: LayeredStructure, order: usize) -> Result<Self> {
        Self::new(base, order, DEFAULT_TRUNCATION, DesignOptions::default())
    }

    pub fn base(&self) -> &LayeredStructure {
        &self.base
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn options(&self) -> &DesignOptions {
        &self.options
    }

    pub fn parameters(&self) -> usize {
        self.base.coatings()
    }

    /// FPT table with coatings `sigma`. Layers with equal neighbouring
    /// conductivities are merged before solving.
    pub fn table(&self, sigma: &[f64]) -> Result<Option<FptTable>> {
        if sigma.len() != self.parameters() {
            return Err(Error::ParameterCount {
                expected: self.parameters(),
                got: sigma.len(),
            });
        }
        for (i, &s) in sigma.iter().enumerate() {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidConductivity { index: i + 1, value: s });
            }
        }
        let mut chain = Vec::with_capacity(sigma.len() + 1);
        chain.push(self.base.sigma(0));
        chain.extend_from_slice(sigma);
        match merged(self.base.map(), self.base.radii(), &chain)? {
            None => Ok(None),
            Some((s, true)) => fpt_multicoated_with(&s, &self.grunsky).map(Some),
            Some((s, false)) => {
                let g = s.map().grunsky(self.truncation)?;
                fpt_multicoated_with(&s, &g).map(Some)
            }
        }
    }

    /// The residual vector of length `4M²`.
    pub fn objective(&self, sigma: &[f64]) -> Result<Vec<f64>> {
        let m_max = self.order;
        let mut f = vec![0.0; 4 * m_max * m_max];
        if let Some(t) = self.table(sigma)? {
            for k in 1..=m_max {
                for m in 1..=m_max {
                    let l = (k - 1) * m_max + m - 1;
                    let scale = 4.0 * PI * k as f64;
                    let (a, b) = (t.f1_at(m, k) / scale, t.f2_at(m, k) / scale);
                    f[4 * l..4 * l + 4].copy_from_slice(&[a.re, a.im, b.re, b.im]);
                }
            }
        }
        Ok(f)
    }

    /// `‖f(σ)‖`, or `+∞` where the objective cannot be evaluated.
    pub fn score(&self, sigma: &[f64]) -> f64 {
        match self.objective(sigma) {
            Ok(f) => {
                let n = norm(&f);
                if n.is_finite() {
                    n
                } else {
                    f64::INFINITY
                }
            }
            Err(_) => f64::INFINITY,
        }
    }

    /// Central-difference Jacobian of `f` with respect to `ln σ`, using step
    /// `h` in the log coordinates.
    pub fn jacobian(&self, sigma: &[f64], h: f64) -> Result<DMatrix<f64>> {
        let n = self.parameters();
        let rows = 4 * self.order * self.order;
        let mut jac = DMatrix::zeros(rows, n);
        let mut probe = sigma.to_vec();
        for j in 0..n {
            let x = libm::log(sigma[j]);
            probe[j] = libm::exp(x + h);
            let up = self.objective(&probe)?;
            probe[j] = libm::exp(x - h);
            let down = self.objective(&probe)?;
            probe[j] = sigma[j];
            for i in 0..rows {
                jac[(i, j)] = (up[i] - down[i]) / (2.0 * h);
            }
        }
        Ok(jac)
    }

    /// Undamped Gauss-Newton step `-J† f` in log coordinates.
    pub fn newton_step(&self, sigma: &[f64]) -> Result<(Vec<f64>, f64)> {
        let f = self.objective(sigma)?;
        let jac = self.jacobian(sigma, self.options.fd_step)?;
        let pinv = pseudo_inverse(&jac, self.options.rcond);
        let step = -(pinv * DVector::from_vec(f.clone()));
        Ok((step.iter().copied().collect(), norm(&f)))
    }

    /// Damped Newton iteration `x ← x - α J† f` in `x = ln σ`.
    pub fn newton_solve(&self, init: &[f64]) -> Result<DesignResult> {
        let opts = &self.options;
        let start = self
            .objective(init)
            .map_err(|e| Error::InfeasibleStart(alloc::boxed::Box::new(e)))?;
        if !norm(&start).is_finite() {
            return Err(Error::InfeasibleStart(alloc::boxed::Box::new(Error::NonFiniteObjective {
                iteration: 0,
            })));
        }
        let mut sigma = init.to_vec();
        let mut trace = Vec::new();
        let mut status = DesignStatus::Stalled;
        for iteration in 0..=opts.max_iterations {
            let (step, value) = self
                .newton_step(&sigma)
                .map_err(|_| Error::NonFiniteObjective { iteration })?;
            if !value.is_finite() || step.iter().any(|s| !s.is_finite()) {
                return Err(Error::NonFiniteObjective { iteration });
            }
            let step_norm = opts.damping * norm(&step);
            trace.push(TraceEntry {
                iteration,
                objective: value,
                step_norm,
            });
            if value < opts.tolerance {
                status = DesignStatus::Converged;
                break;
            }
            if step_norm < opts.step_tolerance {
                if opts.mode == DesignMode::Minimize {
                    status = DesignStatus::Converged;
                }
                break;
            }
            if opts.mode == DesignMode::Minimize && step_norm < opts.stationary_step {
                status = DesignStatus::Converged;
                break;
            }
            if iteration == opts.max_iterations {
                break;
            }
            sigma = self.advance(&sigma, &step, iteration)?;
        }
        self.finish(sigma, trace, status)
    }

    /// Applies the damped step, halving it while the new point is infeasible.
    fn advance(&self, sigma: &[f64], step: &[f64], iteration: usize) -> Result<Vec<f64>> {
        let mut alpha = self.options.damping;
        for _ in 0..30 {
            let next: Vec<f64> = sigma
                .iter()
                .zip(step)
                .map(|(s, d)| libm::exp(libm::log(*s) + alpha * d))
                .collect();
            if self.score(&next).is_finite() {
                return Ok(next);
            }
            alpha *= 0.5;
        }
        Err(Error::NonFiniteObjective { iteration })
    }

    fn finish(&self, sigma: Vec<f64>, trace: Vec<TraceEntry>, status: DesignStatus) -> Result<DesignResult> {
        let objective = norm(&self.objective(&sigma)?);
        let diagnostics = match self.table(&sigma)? {
            Some(t) => t.diagnostics(DIAGNOSTIC_ORDERS, self.truncation),
            None => vec![0.0; DIAGNOSTIC_ORDERS.min(self.truncation)],
        };
        Ok(DesignResult {
            sigma,
            objective,
            diagnostics,
            trace,
            status,
        })
    }

    /// Log-equidistant nodes of one coordinate.
    pub fn grid_nodes(&self) -> Vec<f64> {
        let (lo, hi) = (libm::log(self.options.grid_lo), libm::log(self.options.grid_hi));
        let n = self.options.grid_resolution;
        (0..n)
            .map(|i| match i {
                0 => self.options.grid_lo,
                _ if i == n - 1 => self.options.grid_hi,
                _ => libm::exp(lo + (hi - lo) * i as f64 / (n - 1) as f64),
            })
            .collect()
    }

    /// All grid points in lexicographic order, first coating slowest.
    pub fn grid_points(&self) -> Vec<Vec<f64>> {
        let nodes = self.grid_nodes();
        let dims = self.parameters();
        let total = nodes.len().pow(dims as u32);
        (0..total)
            .map(|mut idx| {
                let mut p = vec![0.0; dims];
                for d in (0..dims).rev() {
                    p[d] = nodes[idx % nodes.len()];
                    idx /= nodes.len();
                }
                p
            })
            .collect()
    }

    /// Picks the best of `points` given their `scores` (lowest index on ties)
    /// and polishes it when enabled.
    pub fn grid_select(&self, points: &[Vec<f64>], scores: &[f64]) -> Result<DesignResult> {
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s < scores[best] || (scores[best].is_nan() && !s.is_nan()) {
                best = i;
            }
        }
        let point = points.get(best).ok_or(Error::InvalidOption("empty grid"))?.clone();
        if !scores[best].is_finite() {
            return Err(Error::InfeasibleStart(alloc::boxed::Box::new(Error::NonFiniteObjective {
                iteration: 0,
            })));
        }
        if self.options.polish {
            if let Ok(polished) = self.newton_solve(&point) {
                if polished.objective <= scores[best] {
                    return Ok(polished);
                }
            }
        }
        let trace = vec![TraceEntry {
            iteration: 0,
            objective: scores[best],
            step_norm: 0.0,
        }];
        self.finish(point, trace, DesignStatus::GridBest)
    }

    /// Exhaustive search over the product grid followed by optional polish.
    pub fn grid_search(&self) -> Result<DesignResult> {
        let points = self.grid_points();
        let scores: Vec<f64> = points.iter().map(|p| self.score(p)).collect();
        self.grid_select(&points, &scores)
    }
}

fn validate(o: &DesignOptions) -> Result<()> {
    if !(o.damping > 0.0 && o.damping <= 1.0) {
        return Err(Error::InvalidOption("damping must lie in (0, 1]"));
    }
    if !(o.fd_step > 0.0 && o.fd_step < 1.0) {
        return Err(Error::InvalidOption("finite-difference step must lie in (0, 1)"));
    }
    if !(o.grid_lo > 0.0 && o.grid_lo < o.grid_hi && o.grid_hi.is_finite()) {
        return Err(Error::InvalidOption("grid bounds must satisfy 0 < lo < hi"));
    }
    if o.grid_resolution < 2 {
        return Err(Error::InvalidOption("grid resolution must be at least 2"));
    }
    if !(o.tolerance >= 0.0 && o.step_tolerance >= 0.0 && o.stationary_step >= 0.0 && o.rcond >= 0.0) {
        return Err(Error::InvalidOption("tolerances must be nonnegative"));
    }
    Ok(())
}

/// Drops interfaces between equal conductivities. Returns `None` when
/// nothing differs from the background, and flags whether the core radius
/// survived unchanged.
fn merged(map: &ConformalMap, radii: &[f64], chain: &[f64]) -> Result<Option<(LayeredStructure, bool)>> {
    let mut all_r = vec![map.r0()];
    all_r.extend_from_slice(radii);
    let mut sig = chain.to_vec();
    sig.push(1.0);
    // interface j sits at all_r[j] between sig[j] and sig[j+1]
    let mut keep_r = Vec::new();
    let mut keep_s = vec![sig[0]];
    for j in 0..all_r.len() {
        if sig[j + 1] != *keep_s.last().unwrap_or(&sig[0]) {
            keep_r.push(all_r[j]);
            keep_s.push(sig[j + 1]);
        }
    }
    keep_s.pop();
    if keep_r.is_empty() {
        return Ok(None);
    }
    // the innermost interfaces that merged are absorbed into the core
    let same_core = keep_r[0] == map.r0();
    let core_map = if same_core {
        map.clone()
    } else {
        ConformalMap::new(keep_r[0], map.a0(), map.coeffs().to_vec())?
    };
    let s = LayeredStructure::new(core_map, keep_r[1..].to_vec(), keep_s)?;
    Ok(Some((s, same_core)))
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}
