use std::f64::consts::PI;

use fptf_core::field::{solve_coefficients, LayerCoefficients};
use fptf_core::{fpt_multicoated, fpt_single, Complex64, ConformalMap, LayeredStructure, Loading};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn real_map(a: &[f64]) -> ConformalMap {
    ConformalMap::new(1.0, c(0.0, 0.0), a.iter().map(|&x| c(x, 0.0)).collect()).unwrap()
}

/// Every caption structure of the four worked examples.
fn examples() -> Vec<LayeredStructure> {
    let ellipse = real_map(&[0.25]);
    let kite = real_map(&[0.1, 0.25, -0.05, 0.05, -0.04, 0.02]);
    let star = real_map(&[0.0, 0.0, 0.0, 0.2]);
    vec![
        LayeredStructure::new(ellipse.clone(), vec![1.1], vec![0.2, 7.8936]).unwrap(),
        LayeredStructure::new(ellipse.clone(), vec![1.2], vec![10.0, 0.3212]).unwrap(),
        LayeredStructure::new(ellipse, vec![1.1, 1.2], vec![10.0, 0.0754, 3.6267]).unwrap(),
        LayeredStructure::new(kite.clone(), vec![1.1], vec![10.0, 0.3428]).unwrap(),
        LayeredStructure::new(kite, vec![1.1, 1.2], vec![10.0, 0.1098, 2.5723]).unwrap(),
        LayeredStructure::new(star.clone(), vec![1.2], vec![10.0, 0.3347]).unwrap(),
        LayeredStructure::new(star, vec![1.1, 1.2], vec![10.0, 0.0720, 3.8086]).unwrap(),
    ]
}

fn solve(s: &LayeredStructure, load: &Loading, order: usize) -> LayerCoefficients {
    let t = fpt_multicoated(s, order).unwrap();
    solve_coefficients(s, &t, load).unwrap()
}

#[test]
fn disk_matches_dipole_field() {
    for (r0, sigma0) in [(1.0, 10.0), (1.3, 0.2), (0.8, 3.0)] {
        let map = ConformalMap::disk(r0).unwrap();
        let s = LayeredStructure::single(map.clone(), sigma0).unwrap();
        let t = fpt_single(&map, sigma0, 10).unwrap();
        let sol = solve_coefficients(&s, &t, &Loading::uniform_x2(&map).unwrap()).unwrap();
        let contrast = (sigma0 - 1.0) / (sigma0 + 1.0);
        for i in 0..64 {
            let theta = 2.0 * PI * i as f64 / 64.0;
            for radius in [r0 * 1.01, 2.0 * r0, 7.0] {
                let z = Complex64::from_polar(radius, theta);
                let want = z.im * (1.0 - contrast * r0 * r0 / z.norm_sqr());
                let got = sol.eval_at(&map, z, false).unwrap();
                assert!((got - want).abs() <= 1e-10, "{got} vs {want}");
            }
            let z = Complex64::from_polar(0.6 * r0, theta);
            let inside = sol.eval_at(&map, z, true).unwrap();
            assert!((inside - 2.0 / (sigma0 + 1.0) * z.im).abs() <= 1e-10);
        }
    }
}

#[test]
fn interfaces_are_continuous_with_flux_balance() {
    for s in examples() {
        let map = s.map().clone();
        for load in [Loading::uniform_x2(&map).unwrap(), Loading::hyperbolic_x1x2(&map).unwrap()] {
            let sol = solve(&s, &load, 50);
            assert!(sol.core_residual() <= 1e-8, "core residual {}", sol.core_residual());
            let radii: Vec<f64> = s.interface_radii().collect();
            for (j, r) in radii.iter().enumerate() {
                let rho = r.ln();
                let (si, so) = (s.sigma(j), s.sigma(j + 1));
                for i in 0..64 {
                    let theta = 2.0 * PI * i as f64 / 64.0;
                    let (ui, uo) = (sol.eval_layer(j, rho, theta), sol.eval_layer(j + 1, rho, theta));
                    assert!((ui - uo).abs() <= 1e-8, "jump {} at interface {j}", ui - uo);
                    let fi = si * sol.eval_layer_drho(j, rho, theta);
                    let fo = so * sol.eval_layer_drho(j + 1, rho, theta);
                    assert!((fi - fo).abs() <= 1e-6, "flux jump {} at interface {j}", fi - fo);
                }
            }
        }
    }
}

#[test]
fn core_series_meets_core_layer_on_the_boundary() {
    for s in examples() {
        let map = s.map().clone();
        let sol = solve(&s, &Loading::uniform_x2(&map).unwrap(), 50);
        for i in 0..32 {
            let theta = 2.0 * PI * i as f64 / 32.0;
            let z = map.eval_closed(Complex64::from_polar(map.r0(), theta)).unwrap();
            let faber = sol.eval_core(&map, z);
            let layer = sol.eval_layer(0, map.rho0(), theta);
            assert!((faber - layer).abs() <= 1e-8, "{faber} vs {layer}");
        }
    }
}

fn laplacian(sol: &LayerCoefficients, map: &ConformalMap, z: Complex64, h: f64) -> f64 {
    let u = |p: Complex64| sol.eval_at(map, p, false).unwrap();
    (u(z + h) + u(z - h) + u(z + c(0.0, h)) + u(z - c(0.0, h)) - 4.0 * u(z)) / (h * h)
}

#[test]
fn potential_is_harmonic_inside_layers() {
    for s in examples() {
        let map = s.map().clone();
        let sol = solve(&s, &Loading::hyperbolic_x1x2(&map).unwrap(), 50);
        let radii: Vec<f64> = s.interface_radii().collect();
        // middle of the first coating and a point outside
        let levels = [0.5 * (radii[0] + radii[1]), radii.last().unwrap() * 1.5];
        for (level, theta) in levels.iter().zip([0.7, 2.3]) {
            let z = map.eval(Complex64::from_polar(*level, theta)).unwrap();
            let coarse = laplacian(&sol, &map, z, 1e-2).abs();
            let fine = laplacian(&sol, &map, z, 1e-3).abs();
            assert!(coarse <= 1e-2, "coarse residual {coarse}");
            assert!(fine <= coarse / 30.0 + 1e-6, "fine {fine} coarse {coarse}");
        }
    }
}

#[test]
fn weak_contrast_perturbation_is_linear() {
    let map = real_map(&[0.1, 0.25, -0.05]);
    let perturbation = |eps: f64| {
        let s = LayeredStructure::single(map.clone(), 1.0 + eps).unwrap();
        let sol = solve(&s, &Loading::uniform_x2(&map).unwrap(), 20);
        let g = map.grunsky(20).unwrap();
        let load = Loading::uniform_x2(&map).unwrap();
        let ext = sol.layer(1);
        (1..=20)
            .map(|k| {
                let unperturbed = load.alpha()[0] * g.get(1, k);
                (ext.alpha2[k - 1] - unperturbed).norm()
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (perturbation(1e-2), perturbation(1e-4));
    let ratio = a / b;
    assert!((ratio - 100.0).abs() < 2.0, "ratio {ratio}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_superpose(
        a in (-2.0f64..2.0, -2.0f64..2.0),
        b in (-2.0f64..2.0, -2.0f64..2.0),
    ) {
        let s = &examples()[4];
        let t = fpt_multicoated(s, 30).unwrap();
        let l1 = Loading::faber(vec![c(1.0, 0.5)], vec![c(0.2, -1.0)]).unwrap();
        let l2 = Loading::faber(vec![c(0.0, 0.0), c(-0.3, 0.7)], vec![c(0.0, 0.0), c(1.1, 0.0)]).unwrap();
        let (ca, cb) = (c(a.0, a.1), c(b.0, b.1));
        let mix = |x: &Loading, y: &Loading, i: usize, beta: bool| {
            let pick = |l: &Loading| {
                let v = if beta { l.beta() } else { l.alpha() };
                v.get(i).copied().unwrap_or(c(0.0, 0.0))
            };
            ca * pick(x) + cb * pick(y)
        };
        let combined = Loading::faber(
            (0..2).map(|i| mix(&l1, &l2, i, false)).collect(),
            (0..2).map(|i| mix(&l1, &l2, i, true)).collect(),
        ).unwrap();
        let s1 = solve_coefficients(s, &t, &l1).unwrap();
        let s2 = solve_coefficients(s, &t, &l2).unwrap();
        let sc = solve_coefficients(s, &t, &combined).unwrap();
        for j in 0..sc.layer_count() {
            let (x, y, z) = (s1.layer(j), s2.layer(j), sc.layer(j));
            for k in 0..30 {
                for (p, q, r) in [
                    (x.alpha1[k], y.alpha1[k], z.alpha1[k]),
                    (x.beta1[k], y.beta1[k], z.beta1[k]),
                    (x.alpha2[k], y.alpha2[k], z.alpha2[k]),
                    (x.beta2[k], y.beta2[k], z.beta2[k]),
                ] {
                    let want = ca * p + cb * q;
                    prop_assert!((r - want).norm() <= 1e-11 * (1.0 + want.norm()));
                }
            }
        }
    }
}
