//! Acceptance run: one PASS/FAIL line per criterion, with measured values
//! underneath. Exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use fptf::commands::solve_design;
use fptf::config::Config;
use fptf_core::field::solve_coefficients;
use fptf_core::stripes::{off_stripe_max, Stripe};
use fptf_core::{
    fpt_multicoated, fpt_single, fpt_single_tau, Complex64, ConformalMap, DesignMode, DesignOptions, DesignProblem,
    FptTable, LayeredStructure, Loading,
};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real_map(a: &[f64]) -> ConformalMap {
    ConformalMap::new(1.0, c(0.0, 0.0), a.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
}

fn ellipse() -> ConformalMap {
    real_map(&[0.25])
}

fn kite() -> ConformalMap {
    real_map(&[0.1, 0.25, -0.05, 0.05, -0.04, 0.02])
}

fn star() -> ConformalMap {
    real_map(&[0.0, 0.0, 0.0, 0.2])
}

fn preset(name: &str) -> Config {
    Config::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(format!("{name}.json"))).unwrap()
}

const PRESETS: [&str; 4] = ["ellipse1", "ellipse2", "kite", "star"];

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            summary: String::new(),
            details: Vec::new(),
        }
    }

    /// Records one sub-check.
    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.details.push(format!("{} {line}", if ok { "ok  " } else { "MISS" }));
    }

    fn note(&mut self, line: String) {
        self.details.push(format!("info {line}"));
    }
}

fn run(n: usize, name: &str, budget: Option<Duration>, body: impl FnOnce(&mut Outcome)) -> bool {
    let start = Instant::now();
    let mut out = Outcome::new();
    body(&mut out);
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let passed = out.passed && in_time;
    let limit = budget.map_or(String::new(), |b| format!(" of {:.0} s", b.as_secs_f64()));
    println!(
        "{} criterion {n} {name}: {} [{:.2} s{limit}]",
        if passed { "PASS" } else { "FAIL" },
        out.summary,
        elapsed.as_secs_f64(),
    );
    for d in &out.details {
        println!("      {d}");
    }
    if !in_time {
        println!("      MISS runtime budget exceeded");
    }
    passed
}

/// Single-inclusion ellipse tables written out independently of the library.
fn ellipse_closed_form(a1: Complex64, r: f64, sigma0: f64, m: usize) -> (Complex64, Complex64) {
    let lambda = (sigma0 + 1.0) / (2.0 * (sigma0 - 1.0));
    let mf = m as f64;
    let q = a1.norm().powf(2.0 * mf) / (4.0 * r.powf(4.0 * mf));
    let bracket = 1.0 + (0.25 - lambda * lambda) / (lambda * lambda - q);
    let f1 = a1.powu(m as u32) * 4.0 * PI * mf * bracket;
    let f2 = c(8.0 * PI * mf * lambda * r.powf(2.0 * mf) * bracket, 0.0);
    (f1, f2)
}

fn ellipse_oracle(out: &mut Outcome) {
    let mut worst = 0.0f64;
    for a1 in [c(0.1, 0.0), c(0.25, 0.0), c(0.4, 0.1)] {
        let map = ConformalMap::ellipse(1.0, a1).unwrap();
        for sigma0 in [0.2, 10.0] {
            let t = fpt_single(&map, sigma0, 20).unwrap();
            let mut local = 0.0f64;
            for m in 1..=10 {
                let (d1, d2) = ellipse_closed_form(a1, 1.0, sigma0, m);
                let scale = d1.norm().max(d2.norm());
                for k in 1..=10 {
                    let (e1, e2) = if m == k { (d1, d2) } else { (c(0.0, 0.0), c(0.0, 0.0)) };
                    let err = (t.f1_at(m, k) - e1).norm().max((t.f2_at(m, k) - e2).norm());
                    local = local.max(err / scale);
                }
            }
            out.note(format!("a1 = {a1}, sigma0 = {sigma0}: max relative error {local:.2e}"));
            worst = worst.max(local);
        }
    }
    out.passed = worst <= 1e-10;
    out.summary = format!("max relative error {worst:.2e} (tol 1e-10)");
}

fn design_problem(map: ConformalMap, sigma0: f64, radii: &[f64], sigma: &[f64], order: usize, mode: DesignMode) -> DesignProblem {
    let sigmas = std::iter::once(sigma0).chain(sigma.iter().copied()).collect();
    let s = LayeredStructure::new(map, radii.to_vec(), sigmas).unwrap();
    let opts = DesignOptions {
        mode,
        ..DesignOptions::default()
    };
    DesignProblem::new(s, order, 50, opts).unwrap()
}

type Case = (&'static str, fn() -> ConformalMap, f64, &'static [f64], &'static [f64]);

const PUBLISHED: [Case; 7] = [
    ("ellipse 1-coat", ellipse, 0.2, &[1.1], &[7.8936]),
    ("ellipse 1-coat", ellipse, 10.0, &[1.2], &[0.3212]),
    ("ellipse 2-coat", ellipse, 10.0, &[1.1, 1.2], &[0.0754, 3.6267]),
    ("kite 1-coat", kite, 10.0, &[1.1], &[0.3428]),
    ("kite 2-coat", kite, 10.0, &[1.1, 1.2], &[0.1098, 2.5723]),
    ("star 1-coat", star, 10.0, &[1.2], &[0.3347]),
    ("star 2-coat", star, 10.0, &[1.1, 1.2], &[0.0720, 3.8086]),
];

fn published_neutrality(out: &mut Outcome) {
    let (mut worst_norm, mut worst_ratio) = (0.0f64, 0.0f64);
    for (name, map, sigma0, radii, sigma) in PUBLISHED {
        let p = design_problem(map(), sigma0, radii, sigma, 1, DesignMode::Minimize);
        let norm = p.score(sigma);
        let coated = p.table(sigma).unwrap().map_or(0.0, |t| t.diagnostic(1, 50).unwrap());
        let bare = fpt_single(&map(), sigma0, 50).unwrap().diagnostic(1, 50).unwrap();
        let ratio = coated / bare;
        worst_norm = worst_norm.max(norm);
        worst_ratio = worst_ratio.max(ratio);
        out.check(
            norm <= 1e-2 && ratio <= 1e-2,
            format!("{name} sigma = {sigma:?}: |f| = {norm:.4e} (tol 1e-2), F_1 coated/bare = {ratio:.3e} (tol 1e-2)"),
        );
        if radii.len() == 2 {
            let p2 = design_problem(map(), sigma0, radii, sigma, 2, DesignMode::Minimize);
            out.note(format!("{name}: |f| at M = 2 is {:.4e}", p2.score(sigma)));
        }
    }
    out.summary = format!("worst |f| {worst_norm:.3e}, worst F_1 ratio {worst_ratio:.3e} (tol 1e-2 each)");
}

fn design_recovery(out: &mut Outcome) {
    let mut worst = 0.0f64;
    for init in [2.0, 5.0, 20.0] {
        let p = design_problem(ellipse(), 0.2, &[1.1], &[init], 1, DesignMode::Minimize);
        let r = p.newton_solve(&[init]).unwrap();
        let err = (r.sigma[0] - 7.8936).abs();
        worst = worst.max(err / 0.05);
        out.check(err <= 0.05, format!("ellipse 1-coat sigma0 = 0.2, M = 1, init {init}: sigma1 = {:.4}", r.sigma[0]));
    }
    for init in [0.1, 0.5, 2.0] {
        let p = design_problem(ellipse(), 10.0, &[1.2], &[init], 2, DesignMode::Minimize);
        let r = p.newton_solve(&[init]).unwrap();
        let err = (r.sigma[0] - 0.3212).abs();
        worst = worst.max(err / 0.01);
        out.check(err <= 0.01, format!("ellipse 1-coat sigma0 = 10, M = 2, init {init}: sigma1 = {:.4}", r.sigma[0]));
    }
    let p = design_problem(ellipse(), 10.0, &[1.2], &[0.5], 1, DesignMode::Minimize);
    let r = p.newton_solve(&[0.5]).unwrap();
    out.note(format!("ellipse 1-coat sigma0 = 10 at M = 1 minimizes at sigma1 = {:.4}", r.sigma[0]));
    for (name, want) in [("ellipse2", [0.0754, 3.6267]), ("kite", [0.1098, 2.5723]), ("star", [0.0720, 3.8086])] {
        let (r, _, _) = solve_design(&preset(name)).unwrap();
        let err = (r.sigma[0] - want[0]).abs().max((r.sigma[1] - want[1]).abs());
        worst = worst.max(err / 0.05);
        out.check(
            err <= 0.05,
            format!("{name} grid + polish: sigma = ({:.4}, {:.4}), published {want:?}", r.sigma[0], r.sigma[1]),
        );
    }
    out.summary = format!("worst error {worst:.2} of allowed band");
}

/// Random univalent map with `Σ n |a_n| r0^(-n-1)` at most 0.9.
fn random_map(rng: &mut StdRng) -> ConformalMap {
    let r0: f64 = rng.random_range(0.6..1.8);
    let degree = rng.random_range(1..=7);
    let raw: Vec<Complex64> = (0..degree)
        .map(|_| Complex64::from_polar(rng.random_range(0.0..1.0), rng.random_range(0.0..2.0 * PI)))
        .collect();
    let weight: f64 = raw.iter().enumerate().map(|(i, z)| (i + 1) as f64 * z.norm()).sum();
    let target = rng.random_range(0.05..0.9);
    let coeffs = raw
        .iter()
        .enumerate()
        .map(|(i, z)| z * (target / weight) * r0.powi(i as i32 + 2))
        .collect();
    ConformalMap::new(r0, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), coeffs).unwrap()
}

fn random_striped(rng: &mut StdRng, n: usize, order: usize, stripe: Stripe) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        let v = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if stripe.allows(i + 1, j + 1, order) {
            v
        } else {
            c(0.0, 0.0)
        }
    })
}

fn structural_invariants(out: &mut Outcome) {
    let mut rng = StdRng::seed_from_u64(20);
    let mut maps = vec![ellipse(), kite(), star()];
    maps.extend((0..30).map(|_| random_map(&mut rng)));

    let (mut sym, mut bound, mut limit, mut trace) = (0.0f64, 0.0f64, 0usize, 0.0f64);
    for map in &maps {
        let g = map.grunsky(30).unwrap();
        let scale = g.matrix().iter().enumerate().map(|(i, z)| z.norm() * (i / 30 + 1) as f64).fold(1.0, f64::max);
        sym = sym.max(g.symmetry_defect() / scale);
        bound = bound.max(g.bound_rows(map.r0()).into_iter().fold(0.0, f64::max));
        let g15 = map.grunsky(15).unwrap();
        let r = map.r0();
        let a1 = map.coeff(1).norm();
        for tau in [1.0, -1.0] {
            let t = fpt_single_tau(map, tau, 15).unwrap();
            for m in 1..=15 {
                for k in 1..=15 {
                    if t.f1_at(m, k) != g15.get(m, k) * (4.0 * PI * k as f64) {
                        limit += 1;
                    }
                }
            }
            let pt = t.polarization_tensor();
            let det = pt[0][0] * pt[1][1] - pt[0][1] * pt[1][0];
            let want = tau / PI / (r * r - a1 * a1 / (r * r));
            trace = trace.max(((pt[0][0] + pt[1][1]) / det - want).abs() / want.abs());
        }
    }
    let count = maps.len();
    out.check(sym <= 1e-12, format!("Grunsky symmetry over {count} maps: {sym:.2e} (tol 1e-12)"));
    out.check(bound < 1.0, format!("Grunsky inequality: largest row bound {bound:.4} (< 1)"));
    out.check(limit == 0, format!("tau = +-1 limit: {limit} entries differ from 4 pi k c_mk"));
    out.check(trace <= 1e-10, format!("trace identity at tau = +-1: {trace:.2e} (tol 1e-10)"));

    let g = star().grunsky(40).unwrap();
    let grunsky_off = (1..=40)
        .flat_map(|m| (1..=40).map(move |k| (m, k)))
        .filter(|(m, k)| (m + k) % 5 != 0)
        .map(|(m, k)| g.get(m, k).norm())
        .fold(0.0, f64::max);
    let mut stripe = grunsky_off;
    let star_tables = [
        fpt_single(&star(), 10.0, 40).unwrap(),
        fpt_multicoated(&preset("star").structure().unwrap(), 40).unwrap(),
    ];
    for t in &star_tables {
        let off = off_stripe_max(t.f1(), Stripe::AntiDiagonal, 5).max(off_stripe_max(t.f2(), Stripe::Diagonal, 5));
        stripe = stripe.max(off / t.max_abs());
    }
    out.check(stripe <= 1e-12, format!("order-5 star striping (Grunsky and FPT): {stripe:.2e} relative (tol 1e-12)"));

    let mut product = 0.0f64;
    for _ in 0..200 {
        let order = rng.random_range(2..8);
        let n = 16;
        for s1 in [Stripe::Diagonal, Stripe::AntiDiagonal] {
            for s2 in [Stripe::Diagonal, Stripe::AntiDiagonal] {
                let p = random_striped(&mut rng, n, order, s1) * random_striped(&mut rng, n, order, s2);
                product = product.max(off_stripe_max(&p, s1.product(s2), order) / (1.0 + p.norm()));
            }
        }
        let a = random_striped(&mut rng, n, order, Stripe::Diagonal) * c(0.05, 0.0) + DMatrix::identity(n, n);
        let inv = a.try_inverse().unwrap();
        product = product.max(off_stripe_max(&inv, Stripe::Diagonal, order) / inv.norm());
    }
    out.check(product <= 1e-14, format!("striped product and inverse rules, 200 trials: {product:.2e} (tol 1e-14)"));
    out.summary = format!("{} of 6 families hold", out.details.iter().filter(|d| d.starts_with("ok")).count());
}

fn laplacian(sol: &fptf_core::LayerCoefficients, map: &ConformalMap, z: Complex64, h: f64) -> f64 {
    let u = |p: Complex64| sol.eval_at(map, p, false).unwrap();
    (u(z + h) + u(z - h) + u(z + c(0.0, h)) + u(z - c(0.0, h)) - 4.0 * u(z)) / (h * h)
}

fn field_correctness(out: &mut Outcome) {
    let mut dipole = 0.0f64;
    for (r0, sigma0) in [(1.0, 10.0), (1.3, 0.2), (0.8, 3.0)] {
        let map = ConformalMap::disk(r0).unwrap();
        let s = LayeredStructure::single(map.clone(), sigma0).unwrap();
        let t = fpt_multicoated(&s, 10).unwrap();
        let sol = solve_coefficients(&s, &t, &Loading::uniform_x2(&map).unwrap()).unwrap();
        let contrast = (sigma0 - 1.0) / (sigma0 + 1.0);
        for i in 0..64 {
            let theta = 2.0 * PI * i as f64 / 64.0;
            for radius in [r0 * 1.01, 2.0 * r0, 7.0] {
                let z = Complex64::from_polar(radius, theta);
                let want = z.im * (1.0 - contrast * r0 * r0 / z.norm_sqr());
                dipole = dipole.max((sol.eval_at(&map, z, false).unwrap() - want).abs());
            }
            let z = Complex64::from_polar(0.6 * r0, theta);
            dipole = dipole.max((sol.eval_at(&map, z, true).unwrap() - 2.0 / (sigma0 + 1.0) * z.im).abs());
        }
    }
    out.check(dipole <= 1e-10, format!("disk dipole field: max error {dipole:.2e} (tol 1e-10)"));

    for name in PRESETS {
        let cfg = preset(name);
        let s = cfg.structure().unwrap();
        let map = s.map().clone();
        let load = cfg.loading(&map).unwrap();
        let t = fpt_multicoated(&s, cfg.truncation).unwrap();
        let sol = solve_coefficients(&s, &t, &load).unwrap();
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
        let residual = sol.core_residual();
        out.check(
            jump <= 1e-8 && flux <= 1e-6 && residual <= 1e-8,
            format!("{name}: continuity {jump:.2e} (1e-8), flux {flux:.2e} (1e-6), core residual {residual:.2e} (1e-8)"),
        );

        let radii: Vec<f64> = s.interface_radii().collect();
        let levels = [0.5 * (radii[0] + radii[1]), radii.last().unwrap() * 1.5];
        for (level, theta) in levels.iter().zip([0.7, 2.3]) {
            let z = map.eval(Complex64::from_polar(*level, theta)).unwrap();
            let coarse = laplacian(&sol, &map, z, 1e-2).abs();
            let fine = laplacian(&sol, &map, z, 1e-3).abs();
            out.check(
                coarse <= 1e-2 && fine <= coarse / 30.0 + 1e-6,
                format!("{name}: Laplacian at |w| = {level:.3}: h=1e-2 {coarse:.2e}, h=1e-3 {fine:.2e}"),
            );
        }
    }
    let misses = out.details.iter().filter(|d| d.starts_with("MISS")).count();
    out.summary = format!("{misses} failed sub-checks");
}

fn relative_gap(a: &FptTable, b: &FptTable, upto: usize) -> f64 {
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    for m in 1..=upto {
        for k in 1..=upto {
            diff += (a.f1_at(m, k) - b.f1_at(m, k)).norm_sqr() + (a.f2_at(m, k) - b.f2_at(m, k)).norm_sqr();
            scale += b.f1_at(m, k).norm_sqr() + b.f2_at(m, k).norm_sqr();
        }
    }
    (diff / scale).sqrt()
}

fn truncation_robustness(out: &mut Outcome) {
    let (mut worst_gap, mut worst_margin) = (0.0f64, f64::INFINITY);
    for name in PRESETS {
        let s = preset(name).structure().unwrap();
        let t50 = fpt_multicoated(&s, 50).unwrap();
        let t100 = fpt_multicoated(&s, 100).unwrap();
        let gap = relative_gap(&t50, &t100, 5);
        let margin = t50.conditioning().dominance_margin;
        worst_gap = worst_gap.max(gap);
        worst_margin = worst_margin.min(margin);
        out.check(
            gap < 1e-8 && margin > 0.0,
            format!("{name}: K 50 vs 100 relative change {gap:.2e} (< 1e-8), dominance margin {margin:.4} (> 0)"),
        );
    }
    out.summary = format!("worst change {worst_gap:.2e}, smallest dominance margin {worst_margin:.4}");
}

fn main() {
    println!("acceptance criteria");
    let results = [
        run(1, "ellipse oracle equivalence", Some(Duration::from_secs(1)), ellipse_oracle),
        run(2, "published-parameter neutrality", Some(Duration::from_secs(10)), published_neutrality),
        run(3, "design recovery", Some(Duration::from_secs(120)), design_recovery),
        run(4, "structural invariants", None, structural_invariants),
        run(5, "field correctness", None, field_correctness),
        run(6, "truncation robustness", None, truncation_robustness),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("{passed} of {} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
