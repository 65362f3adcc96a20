//! Self-consistency suite behind the `validate` command.

use std::f64::consts::PI;

use fptf_core::field::solve_coefficients;
use fptf_core::fpt::lambda_of;
use fptf_core::stripes::{off_stripe_max, Stripe};
use fptf_core::{
    fpt_ellipse_oracle, fpt_multicoated, fpt_multicoated_with, fpt_single, fpt_single_tau, ConformalMap, FptTable,
    GrunskyMatrix, LayeredStructure, Loading,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    /// Passes when `value <= tolerance`.
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            value,
            tolerance,
            passed: value <= tolerance,
            note: String::new(),
        }
    }

    fn failed(name: &'static str, note: String) -> Self {
        Self {
            name,
            value: f64::NAN,
            tolerance: f64::NAN,
            passed: false,
            note,
        }
    }

    pub fn line(&self) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{status} {:<24} value={:.3e} tol={:.1e}", self.name, self.value, self.tolerance);
        if !self.note.is_empty() {
            s.push_str("  ");
            s.push_str(&self.note);
        }
        s
    }
}

/// `Variant: message`, so reports name the error kind.
pub fn describe(e: &fptf_core::Error) -> String {
    let debug = format!("{e:?}");
    let kind = debug.split([' ', '(', '{']).next().unwrap_or_default();
    format!("{kind}: {e}")
}

/// Test hook: breaks the symmetry of the Grunsky table before checking it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Corruption {
    pub grunsky: bool,
}

fn relative_gap(a: &FptTable, b: &FptTable, upto: usize) -> f64 {
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for m in 1..=upto {
        for k in 1..=upto {
            diff += (a.f1_at(m, k) - b.f1_at(m, k)).norm_sqr() + (a.f2_at(m, k) - b.f2_at(m, k)).norm_sqr();
            scale += b.f1_at(m, k).norm_sqr() + b.f2_at(m, k).norm_sqr();
        }
    }
    if scale == 0.0 {
        diff.sqrt()
    } else {
        (diff / scale).sqrt()
    }
}

fn grunsky_checks(map: &ConformalMap, g: &GrunskyMatrix, out: &mut Vec<Check>) {
    let n = g.order();
    let scale = (1..=n)
        .flat_map(|m| (1..=n).map(move |k| (m, k)))
        .map(|(m, k)| g.get(m, k).norm() * k as f64)
        .fold(1.0, f64::max);
    out.push(Check::at_most("grunsky-symmetry", g.symmetry_defect() / scale, 1e-12));
    let worst = g.bound_rows(map.r0()).into_iter().fold(0.0, f64::max);
    let mut c = Check::at_most("grunsky-inequality", worst, 1.0);
    c.passed = worst < 1.0;
    out.push(c);
}

fn limit_checks(map: &ConformalMap, order: usize, out: &mut Vec<Check>) {
    let g = match map.grunsky(order) {
        Ok(g) => g,
        Err(e) => return out.push(Check::failed("contrast-limits", e.to_string())),
    };
    let (mut limit, mut trace, mut bound) = (0.0f64, 0.0f64, 0.0f64);
    let a1 = map.coeff(1).norm();
    let r = map.r0();
    for tau in [1.0, -1.0] {
        let t = match fpt_single_tau(map, tau, order) {
            Ok(t) => t,
            Err(e) => return out.push(Check::failed("contrast-limits", e.to_string())),
        };
        for m in 1..=order {
            for k in 1..=order {
                let want = g.get(m, k) * (4.0 * PI * k as f64);
                limit = limit.max((t.f1_at(m, k) - want).norm() / want.norm().max(1.0));
            }
        }
        let pt = t.polarization_tensor();
        let det = pt[0][0] * pt[1][1] - pt[0][1] * pt[1][0];
        let trace_inv = (pt[0][0] + pt[1][1]) / det;
        let want = tau / PI / (r * r - a1 * a1 / (r * r));
        trace = trace.max(((trace_inv - want) / want).abs());
        if let Ok(area) = map.area() {
            bound = bound.max(area * trace_inv.abs());
        }
    }
    out.push(Check::at_most("contrast-limits", limit, 1e-12));
    out.push(Check::at_most("trace-identity", trace, 1e-10));
    out.push(Check::at_most("area-trace-bound", bound, 1.0 + 1e-12));
}

fn ellipse_check(map: &ConformalMap, sigma0: f64, order: usize, out: &mut Vec<Check>) {
    let upto = order.min(10);
    let result = (|| -> fptf_core::Result<f64> {
        let t = fpt_single(map, sigma0, order)?;
        let lambda = lambda_of(sigma0)?;
        let mut worst = 0.0f64;
        for m in 1..=upto {
            let (d1, d2) = fpt_ellipse_oracle(map.coeff(1), map.r0(), lambda, m, m)?;
            let scale = d1.norm().max(d2.norm());
            for k in 1..=upto {
                let (e1, e2) = fpt_ellipse_oracle(map.coeff(1), map.r0(), lambda, m, k)?;
                let err = (t.f1_at(m, k) - e1).norm().max((t.f2_at(m, k) - e2).norm());
                worst = worst.max(err / scale);
            }
        }
        Ok(worst)
    })();
    match result {
        Ok(v) => out.push(Check::at_most("ellipse-oracle", v, 1e-10)),
        Err(e) => out.push(Check::failed("ellipse-oracle", e.to_string())),
    }
}

fn table_checks(s: &LayeredStructure, g: &GrunskyMatrix, order: usize, load: &Loading, out: &mut Vec<Check>) {
    let (table, doubled) = rayon::join(|| fpt_multicoated_with(s, g), || fpt_multicoated(s, 2 * order));
    let table = match table {
        Ok(t) => t,
        Err(e) => return out.push(Check::failed("fpt-table", e.to_string())),
    };
    let norm = table.max_abs();
    let sym = s.map().symmetry_order();
    if sym >= 2 {
        let off = off_stripe_max(table.f1(), Stripe::AntiDiagonal, sym).max(off_stripe_max(table.f2(), Stripe::Diagonal, sym));
        out.push(Check::at_most("striping", off / norm.max(f64::MIN_POSITIVE), 1e-12));
    }
    if s.coatings() == 0 {
        match fpt_single(s.map(), s.sigma(0), order) {
            Ok(single) => out.push(Check::at_most("single-route-agreement", relative_gap(&table, &single, order), 1e-12)),
            Err(e) => out.push(Check::failed("single-route-agreement", e.to_string())),
        }
    }
    let margin = table.conditioning().dominance_margin;
    let mut c = Check::at_most("dominance-margin", -margin, 0.0);
    c.value = margin;
    c.passed = margin > 0.0;
    out.push(c);

    match doubled {
        Ok(t2) => out.push(Check::at_most("truncation-convergence", relative_gap(&table, &t2, 5.min(order)), 1e-8)),
        Err(e) => out.push(Check::failed("truncation-convergence", e.to_string())),
    }

    let sol = match solve_coefficients(s, &table, load) {
        Ok(sol) => sol,
        Err(e) => return out.push(Check::failed("core-residual", e.to_string())),
    };
    out.push(Check::at_most("core-residual", sol.core_residual(), 1e-8));
    let (mut jump, mut flux) = (0.0f64, 0.0f64);
    for (j, r) in s.interface_radii().enumerate() {
        let rho = r.ln();
        for i in 0..64 {
            let theta = 2.0 * PI * i as f64 / 64.0;
            jump = jump.max((sol.eval_layer(j, rho, theta) - sol.eval_layer(j + 1, rho, theta)).abs());
            let fi = s.sigma(j) * sol.eval_layer_drho(j, rho, theta);
            let fo = s.sigma(j + 1) * sol.eval_layer_drho(j + 1, rho, theta);
            flux = flux.max((fi - fo).abs());
        }
    }
    out.push(Check::at_most("interface-continuity", jump, 1e-8));
    out.push(Check::at_most("flux-continuity", flux, 1e-6));
}

/// Runs every applicable check. Structural problems with the configuration
/// are reported as failed checks rather than errors.
pub fn run_suite(
    structure: Result<LayeredStructure, String>,
    load: impl FnOnce(&ConformalMap) -> Result<Loading, String>,
    order: usize,
    corruption: Corruption,
) -> Vec<Check> {
    let mut out = Vec::new();
    let s = match structure {
        Ok(s) => s,
        Err(e) => {
            out.push(Check::failed("structure", e));
            return out;
        }
    };
    let map = s.map().clone();
    let mut g = match map.grunsky(order) {
        Ok(g) => g,
        Err(e) => {
            out.push(Check::failed("grunsky", describe(&e)));
            return out;
        }
    };
    if corruption.grunsky && order >= 2 {
        g.matrix_mut()[(0, 1)] += fptf_core::Complex64::new(1e-3, 0.0);
    }
    grunsky_checks(&map, &g, &mut out);
    limit_checks(&map, order.min(20), &mut out);
    if map.is_elliptic() && !map.coeffs().is_empty() {
        ellipse_check(&map, s.sigma(0), order, &mut out);
    }
    match load(&map) {
        Ok(l) => table_checks(&s, &g, order, &l, &mut out),
        Err(e) => out.push(Check::failed("loading", e)),
    }
    out
}
