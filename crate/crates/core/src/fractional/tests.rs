use super::*;
use crate::nets::{faure_net, PointSet};
use proptest::prelude::*;

fn two() -> Exponent {
    Exponent::Finite(2.0)
}

#[test]
fn frac_integral_examples() {
    assert!((frac_integral(|_| 1.0, 1.0, 0.3, 1e-14).unwrap() - 0.3).abs() < 1e-14);
    for alpha in [0.3, 0.6, 0.9] {
        let x = 0.7;
        let got = frac_integral(|_| 1.0, alpha, x, 1e-14).unwrap();
        assert!((got - x.powf(alpha) / gamma(alpha + 1.0)).abs() < 1e-13);
    }
    assert_eq!(frac_integral(|_| 0.0, 0.5, 0.4, 1e-12).unwrap(), 0.0);
    assert!(frac_integral(|_| 1.0, 0.0, 0.4, 1e-12).is_err());
}

#[test]
fn rl_derivative_examples() {
    for alpha in [0.4, 0.75] {
        let f = |x: f64| frac_integral(|t| t, alpha, x, 1e-14).unwrap();
        for x in [0.3, 0.5, 0.8] {
            let d = rl_derivative(f, alpha, x, 1e-3).unwrap();
            assert!((d - x).abs() < 1e-4, "alpha {alpha} x {x}: {d}");
        }
        assert!(rl_derivative(|_| 2.5, alpha, 0.5, 1e-3).unwrap().abs() < 1e-12);
        let un = rl_derivative_unanchored(|_| 2.5, alpha, 0.5, 1e-3).unwrap();
        let exact = 2.5 / gamma(1.0 - alpha) * 0.5f64.powf(-alpha);
        assert!((un - exact).abs() < 1e-5 * exact, "{un} vs {exact}");
    }
    assert!(rl_derivative(|x| x, 0.5, 0.0005, 1e-3).is_err());
    assert!(rl_derivative(|x| x, 1.0, 0.5, 1e-3).is_err());
}

#[test]
fn phi_examples() {
    let c = FracFunction::new(0.7, 2).unwrap().with_constant(3.0);
    assert_eq!(phi_synthesize(&c, &[0.2, 0.9], 1e-12).unwrap(), 3.0);
    let lin = FracFunction::new(1.0, 1).unwrap().with_density(vec![0], Density::constant(1.0)).unwrap();
    assert!((phi_synthesize(&lin, &[0.35], 1e-12).unwrap() - 0.35).abs() < 1e-14);
    let mut full = FracFunction::new(1.0, 2).unwrap().with_constant(1.0);
    for u in nonempty_subsets(2) {
        full = full.with_density(u, Density::constant(1.0)).unwrap();
    }
    let (a, b) = (0.3, 0.6);
    assert!((phi_synthesize(&full, &[a, b], 1e-12).unwrap() - (1.0 + a + b + a * b)).abs() < 1e-13);
    assert!(phi_synthesize(&full, &[0.3], 1e-12).is_err());
}

#[test]
fn mesh_and_callable_densities_agree() {
    let alpha = 0.8;
    let breaks = vec![vec![0.0, 0.25, 0.5, 1.0]];
    let vals = vec![1.0, -2.0, 0.5];
    let mesh = MeshDensity::new(breaks, vals.clone()).unwrap();
    let m2 = mesh.clone();
    let a = FracFunction::new(alpha, 1).unwrap().with_density(vec![0], Density::Mesh(mesh)).unwrap();
    // the callable version has jumps, so compare at a point where the exact
    // answer is a sum of closed forms
    let x: f64 = 0.9;
    let exact = (vals[0] * (x.powf(alpha) - (x - 0.25).powf(alpha))
        + vals[1] * ((x - 0.25).powf(alpha) - (x - 0.5).powf(alpha))
        + vals[2] * (x - 0.5).powf(alpha))
        / alpha
        / gamma(alpha);
    assert!((phi_synthesize(&a, &[x], 0.0).unwrap() - exact).abs() < 1e-14);
    assert_eq!(m2.value_at(&[0.3]), -2.0);
    assert_eq!(m2.value_at(&[1.0]), 0.5);
    assert!((m2.lp_norm(two()) - (0.25f64 + 1.0 + 0.125).sqrt()).abs() < 1e-15);
}

#[test]
fn anchored_examples() {
    let f = |x: &[f64]| x[0] * x[1];
    assert_eq!(anchored_term(f, &[], &[0.3, 0.4]).unwrap(), 0.0);
    assert_eq!(anchored_term(f, &[0], &[0.3, 0.4]).unwrap(), 0.0);
    assert!((anchored_term(f, &[0, 1], &[0.3, 0.4]).unwrap() - 0.12).abs() < 1e-15);
    let g = |x: &[f64]| 2.0 + x[0];
    assert_eq!(anchored_term(g, &[], &[0.3, 0.4]).unwrap(), 2.0);
}

#[test]
fn anchored_term_recovers_phi_summand() {
    let alpha = 0.75;
    let dens: [(Vec<usize>, fn(&[f64]) -> f64); 3] = [
        (vec![0], |t| 1.0 + t[0]),
        (vec![1], |t| (2.0 * t[0]).cos()),
        (vec![0, 1], |t| t[0] * t[1] + 0.5),
    ];
    let mut f = FracFunction::new(alpha, 2).unwrap().with_constant(0.7);
    for (u, d) in dens.iter() {
        f = f.with_density(u.clone(), Density::callable(*d)).unwrap();
    }
    let x = [0.6, 0.45];
    let eval = |y: &[f64]| phi_synthesize(&f, y, 1e-13).unwrap();
    for (u, d) in dens.iter() {
        let only = FracFunction::new(alpha, 2).unwrap().with_density(u.clone(), Density::callable(*d)).unwrap();
        let summand = phi_synthesize(&only, &x, 1e-13).unwrap();
        let term = anchored_term(eval, u, &x).unwrap();
        assert!((term - summand).abs() < 1e-10, "{u:?}: {term} vs {summand}");
    }
}

#[test]
fn seminorm_examples() {
    let only_const = FracFunction::new(0.8, 2).unwrap().with_constant(-1.5);
    assert_eq!(seminorm_v(&only_const, two(), two(), 1e-10), 0.0);
    assert_eq!(full_norm(&only_const, two(), two(), 1e-10), 1.5);
    let unit = FracFunction::new(1.0, 1).unwrap().with_density(vec![0], Density::constant(1.0)).unwrap();
    assert!((seminorm_v(&unit, two(), two(), 1e-12) - 1.0).abs() < 1e-12);
    let f = FracFunction::new(0.7, 2)
        .unwrap()
        .with_density(vec![0], Density::callable(|t| t[0].sin()))
        .unwrap()
        .with_density(vec![0, 1], Density::callable(|t| t[0] - t[1]))
        .unwrap();
    let v = seminorm_v(&f, Exponent::Finite(3.0), Exponent::Finite(1.5), 1e-12);
    let vs = seminorm_v(&f.scaled(-2.5), Exponent::Finite(3.0), Exponent::Finite(1.5), 1e-12);
    assert!((vs - 2.5 * v).abs() < 1e-12 * vs);
}

#[test]
fn delta_examples() {
    let origin = PointSet::from_f64(2, 10, &[vec![0.0]]).unwrap();
    for t in [0.1, 0.5, 0.9] {
        assert!((delta_alpha(&[t], &[0], &origin, 1.0).unwrap() - (1.0 - t)).abs() < 1e-15);
    }
    let half = PointSet::from_f64(2, 10, &[vec![0.5]]).unwrap();
    assert_eq!(delta_alpha(&[0.25], &[0], &half, 1.0).unwrap(), -0.25);
    assert!(delta_alpha(&[], &[], &half, 1.0).is_err());
    assert_eq!(delta_alpha(&[0.5], &[0], &half, 0.7).unwrap(), f64::NEG_INFINITY);
}

#[test]
fn discrepancy_single_point() {
    let half = PointSet::from_f64(2, 10, &[vec![0.5]]).unwrap();
    let exact = (1.0f64 / 12.0).sqrt();
    for method in [DiscrepancyMethod::Warnock, DiscrepancyMethod::TensorQuad] {
        let r = frac_discrepancy(&half, 1.0, two(), two(), method, 1e-12).unwrap();
        assert!((r.value - exact).abs() < 1e-12, "{method:?}: {}", r.value);
    }
    // sup over t of |1 - t - 1_{t < 1/2}| = 1/2
    let sup = frac_discrepancy(&half, 1.0, Exponent::Infinite, two(), DiscrepancyMethod::TensorQuad, 0.0).unwrap();
    assert!((sup.value - 0.5).abs() < 1e-15);
    assert!(frac_discrepancy(&half, 0.7, Exponent::Infinite, two(), DiscrepancyMethod::TensorQuad, 0.0).is_err());
    assert!(frac_discrepancy(&half, 0.4, two(), two(), DiscrepancyMethod::TensorQuad, 0.0).is_err());
    assert!(frac_discrepancy(&half, 0.75, Exponent::Finite(3.0), two(), DiscrepancyMethod::Warnock, 0.0).is_err());
}

#[test]
fn warnock_matches_rkhs_and_quadrature() {
    let p = faure_net(2, 3, 2).unwrap();
    let pts = p.to_f64();
    for alpha in [0.6, 0.75, 1.0] {
        let w = frac_discrepancy(&p, alpha, two(), two(), DiscrepancyMethod::Warnock, 0.0).unwrap();
        let k = rkhs_worst_case_error(&pts, alpha, 1e-13).unwrap();
        assert!((w.value - k).abs() < 1e-9, "alpha {alpha}: {} vs {k}", w.value);
        let q = frac_discrepancy(&p, alpha, two(), two(), DiscrepancyMethod::TensorQuad, 1e-6).unwrap();
        assert!((w.value - q.value).abs() < 1e-5 * w.value, "alpha {alpha}: {} vs {}", w.value, q.value);
    }
}

#[test]
fn alpha_one_is_projected_star_discrepancy_of_reflection() {
    let p = faure_net(3, 2, 3).unwrap();
    let pts = p.to_f64();
    let d = frac_discrepancy(&p, 1.0, two(), two(), DiscrepancyMethod::Warnock, 0.0).unwrap().value;
    let mut sq = 0.0;
    for u in nonempty_subsets(3) {
        let proj: Vec<Vec<f64>> = pts.iter().map(|x| u.iter().map(|&j| 1.0 - x[j]).collect()).collect();
        sq += l2_star_discrepancy(&proj).unwrap().powi(2);
    }
    assert!((d - sq.sqrt()).abs() < 1e-12);
}

#[test]
fn monte_carlo_is_reproducible_and_close() {
    let p = faure_net(2, 3, 2).unwrap();
    let m = DiscrepancyMethod::MonteCarlo { samples: 1 << 16, seed: 7 };
    let a = frac_discrepancy(&p, 1.0, two(), two(), m, 0.0).unwrap();
    let b = frac_discrepancy(&p, 1.0, two(), two(), m, 0.0).unwrap();
    assert_eq!(a, b);
    let w = frac_discrepancy(&p, 1.0, two(), two(), DiscrepancyMethod::Warnock, 0.0).unwrap();
    assert!((a.value - w.value).abs() < 4.0 * a.error_estimate);
}

#[test]
fn general_exponents_by_quadrature() {
    // p' = 1, alpha = 1, s = 1, P = {0}: ∫ |1 - t| dt = 1/2
    let origin = PointSet::from_f64(2, 10, &[vec![0.0]]).unwrap();
    let r = frac_discrepancy(&origin, 1.0, Exponent::Finite(1.0), two(), DiscrepancyMethod::TensorQuad, 1e-12).unwrap();
    assert!((r.value - 0.5).abs() < 1e-13);
    // p' = 3: ∫ (1-t)^3 = 1/4
    let r = frac_discrepancy(&origin, 1.0, Exponent::Finite(3.0), two(), DiscrepancyMethod::TensorQuad, 1e-12).unwrap();
    assert!((r.value - 0.25f64.powf(1.0 / 3.0)).abs() < 1e-13);
}

#[test]
fn extremal_examples() {
    let origin = PointSet::from_f64(2, 10, &[vec![0.0]]).unwrap();
    let grid = ExtremalGrid { panels: 64, octaves: 4, per_octave: 1 };
    let r = extremal_function(&origin, 1.0, two(), two(), grid).unwrap();
    assert!(r.ratio >= 0.99 && r.ratio <= 1.0 + 1e-12, "{}", r.ratio);
    let p = faure_net(2, 3, 1).unwrap();
    let mut last = 0.0;
    for l in 0..4 {
        let r = extremal_function(&p, 0.75, two(), two(), ExtremalGrid::level(l)).unwrap();
        assert!(r.ratio >= last - 1e-12 && r.ratio <= 1.0 + 1e-9, "level {l}: {}", r.ratio);
        last = r.ratio;
    }
    assert!(last >= 0.99, "{last}");
    assert!(extremal_function(&p, 0.75, Exponent::Finite(1.2), two(), ExtremalGrid::level(1)).is_err());
}

#[test]
fn extremal_general_exponent_below_one() {
    let p = faure_net(2, 2, 2).unwrap();
    let r = extremal_function(&p, 0.9, Exponent::Finite(3.0), Exponent::Finite(1.5), ExtremalGrid::level(1)).unwrap();
    assert!(r.ratio <= 1.0 + 1e-6 && r.ratio > 0.8, "{}", r.ratio);
}

#[test]
fn extremal_error_matches_synthesized_function() {
    // I(f) - Q(f) from the density pairing equals direct evaluation of f
    let p = faure_net(2, 2, 1).unwrap();
    let r = extremal_function(&p, 1.0, two(), two(), ExtremalGrid::level(0)).unwrap();
    let f = &r.function;
    let q: f64 = p.to_f64().iter().map(|x| phi_synthesize(f, x, 1e-12).unwrap()).sum::<f64>() / p.len() as f64;
    let gl = crate::quadrature::gauss_legendre(8);
    let mut integral = 0.0;
    for c in 0..512 {
        let lo = c as f64 / 512.0;
        integral += gl.integrate(lo, lo + 1.0 / 512.0, |x| phi_synthesize(f, &[x], 1e-12).unwrap());
    }
    assert!((integral - q - r.integration_error).abs() < 1e-6, "{} vs {}", integral - q, r.integration_error);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn warnock_is_nonnegative_and_permutation_invariant(
        pts in proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 2), 1..8),
        alpha in 0.55f64..1.0,
    ) {
        let a = frac_discrepancy_points(&pts, alpha, two(), two(), DiscrepancyMethod::Warnock, 0.0).unwrap();
        let mut rev = pts.clone();
        rev.reverse();
        let b = frac_discrepancy_points(&rev, alpha, two(), two(), DiscrepancyMethod::Warnock, 0.0).unwrap();
        prop_assert!(a.value >= 0.0 && a.error_estimate >= 0.0);
        prop_assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn round_trip_recovers_density(alpha in 0.55f64..0.95, c0 in -1.0f64..1.0, c1 in -1.0f64..1.0, x in 0.2f64..0.8) {
        let f = FracFunction::new(alpha, 1).unwrap()
            .with_constant(0.3)
            .with_density(vec![0], Density::callable(move |t| c0 + c1 * t[0] * t[0])).unwrap();
        let d = rl_derivative(|y| phi_synthesize(&f, &[y], 1e-14).unwrap(), alpha, x, 1e-3).unwrap();
        prop_assert!((d - (c0 + c1 * x * x)).abs() < 1e-4);
    }
}
