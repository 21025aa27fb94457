use std::sync::Arc;

use proptest::prelude::*;

use nonradial::config::RunConfig;
use nonradial::cylindrical::{assemble_cyl, CylGrid, Field2D};
use nonradial::exponents::{classify_region, exponent_set, p_star_curve, Region, TheoremHypotheses};
use nonradial::nehari::Tolerances;
use nonradial::nonlinearity::{check_hypotheses, log_grid, Nonlinearity};
use nonradial::params::ProblemParams;
use nonradial::radial::{assemble_radial, Field1D, RadialGrid};
use nonradial::testfn::{h_bounds, integrals, BumpSpec};

fn nonlinearity() -> impl Strategy<Value = Nonlinearity> {
    prop_oneof![
        (2.2f64..8.0).prop_map(Nonlinearity::pure_power),
        (2.5f64..4.0, 6.0f64..12.0).prop_map(|(p1, p2)| Nonlinearity::double_power_min(p1, p2)),
        (2.5f64..4.0, 6.0f64..12.0).prop_map(|(p1, p2)| Nonlinearity::rational_power(p1, p2)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn exponent_ordering(n in 3u32..30, x in 0.001f64..0.999) {
        let nf = n as f64;
        let e = exponent_set(n, 2.0 * x).unwrap();
        prop_assert!(e.two_star > 2.0);
        prop_assert!(e.two_alpha < e.two_star_alpha && e.two_star_alpha < e.two_star);
        // 2 < α < min{N, 2N-2}
        let alpha = 2.0 + x * (nf.min(2.0 * nf - 2.0) - 2.0);
        let e = exponent_set(n, alpha).unwrap();
        prop_assert!(e.two_star < e.two_star_alpha && e.two_star_alpha < e.two_alpha);
    }

    #[test]
    fn classification_is_total(n in 3u32..12, a in 0.0001f64..0.9999, b in 0.0001f64..0.9999) {
        let nf = n as f64;
        let alpha = 2.0 * nf * a;
        let p = 2.0 + (3.0 * 2.0 * nf / (nf - 2.0) - 2.0) * b;
        let label = classify_region(n, alpha, p).unwrap();
        prop_assert_ne!(label.region, Region::Excluded);
        prop_assert!(!label.citations.is_empty());
    }

    #[test]
    fn hypotheses_validity_matches_inequalities(
        n in 4u32..10, a in 0.01f64..0.99, p1 in 2.01f64..6.0, p2 in 2.01f64..14.0,
    ) {
        let nf = n as f64;
        let lo = 2.0 / (nf - 1.0);
        let alpha = lo + a * (2.0 * nf - 2.0 - lo);
        prop_assume!((alpha - 2.0).abs() > 1e-6);
        let two_star = 2.0 * nf / (nf - 2.0);
        let ps = p_star_curve(n, &[alpha])[0].1;
        let expect = if alpha < 2.0 { p1 < ps && p2 > two_star } else { p1 < two_star && p2 > ps };
        let app = TheoremHypotheses::new(n, alpha, p1, p2).applicability();
        prop_assert_eq!(app.applicable, expect);
        if app.applicable {
            prop_assert!(app.nu.unwrap() >= 1);
            prop_assert_eq!(app.k_range.unwrap(), (2, app.nu.unwrap() as u32 + 1));
        }
    }

    #[test]
    fn primitive_differentiates_to_f(nl in nonlinearity(), ls in -3.0f64..2.0) {
        let s = 10f64.powf(ls);
        // central differences are meaningless across the kink of min{s, s^{p2-1}}
        prop_assume!((s - 1.0).abs() > 1e-3);
        let h = 1e-5 * s;
        let fd = (nl.primitive(s + h).unwrap() - nl.primitive(s - h).unwrap()) / (2.0 * h);
        let f = nl.f(s);
        prop_assert!((fd - f).abs() <= 1e-6 * f, "s = {}: {} vs {}", s, fd, f);
    }

    #[test]
    fn f_vanishes_below_zero_and_f_over_s_is_monotone(nl in nonlinearity(), s in -5.0f64..0.0, a in 1e-4f64..50.0, b in 1e-4f64..50.0) {
        prop_assert_eq!(nl.f(s), 0.0);
        prop_assert_eq!(nl.primitive(s).unwrap(), 0.0);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi > lo);
        prop_assert!(nl.f(lo) / lo <= nl.f(hi) / hi * (1.0 + 1e-12));
        prop_assert!(nl.primitive(lo).unwrap() <= nl.primitive(hi).unwrap());
    }

    #[test]
    fn hypotheses_certified_on_log_grid(p1 in 2.5f64..4.0, p2 in 6.0f64..12.0) {
        let grid = log_grid(1e-6, 1e6, 400);
        for nl in [Nonlinearity::double_power_min(p1, p2), Nonlinearity::rational_power(p1, p2)] {
            let rep = check_hypotheses(&nl, &grid).unwrap();
            prop_assert!(rep.all_ok(), "{}: {:?}", nl.name(), rep);
        }
    }

    #[test]
    fn bump_stays_below_s_star(s_star in 0.1f64..10.0, a in 1.0f64..1e6, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let b = BumpSpec::new(s_star).unwrap();
        let v = b.eval_va(a, s, t);
        prop_assert!((0.0..s_star).contains(&v));
    }

    #[test]
    fn test_function_integrals_are_consistent(la in 0.0f64..6.0, alpha in prop_oneof![0.5f64..1.9, 2.1f64..5.0]) {
        let a = 10f64.powf(la);
        let nl = Nonlinearity::double_power_min(3.0, 8.0);
        let spec = BumpSpec::new(nl.s_star).unwrap();
        let i = integrals(&spec, a, 2, 4, alpha, &nl, 24).unwrap();
        prop_assert!(i.grad2 > 0.0 && i.pot2 > 0.0 && i.fint > 0.0);
        let ratio = (i.grad2 + a * i.pot2) / i.fint;
        prop_assert!((i.ratio - ratio).abs() <= 1e-12 * ratio);
    }

    #[test]
    fn nehari_projection_scales_inversely(c in 0.2f64..5.0, a in 0.5f64..20.0, p in 2.5f64..6.0) {
        let grid = Arc::new(RadialGrid::geometric(4, 1e-3, 20.0, 150).unwrap());
        let params = ProblemParams::new(4, 3.0, a, Nonlinearity::pure_power(p)).unwrap();
        let op = assemble_radial(&params, grid.clone()).unwrap();
        let u = Field1D::from_fn(grid.clone(), |r| (-r * r / 4.0).exp()).unwrap();
        let cu = Field1D::from_fn(grid, |r| c * (-r * r / 4.0).exp()).unwrap();
        let tol = Tolerances::default();
        let t = op.nehari_project(&u, &tol).unwrap();
        let tc = op.nehari_project(&cu, &tol).unwrap();
        prop_assert!((tc * c - t).abs() <= 1e-10 * t);
        // the projected field sits on the Nehari manifold
        let pu = Field1D::from_fn(u.grid().clone(), |r| t * (-r * r / 4.0).exp()).unwrap();
        let d = op.directional(&pu, &pu).unwrap();
        prop_assert!(d.abs() <= 1e-8 * op.norm2(&pu));
    }

    #[test]
    fn weights_are_positive(n in 3u32..9, nodes in 3usize..300, r_max in 1.0f64..100.0, side in 2usize..24) {
        let g = RadialGrid::geometric(n, 1e-3, r_max, nodes).unwrap();
        prop_assert!(g.weights().iter().all(|&w| w > 0.0));
        prop_assert_eq!(g.weights().len(), g.len());
        if n >= 4 {
            let c = CylGrid::new(n, 2, side, r_max).unwrap();
            prop_assert!(c.weights().iter().all(|&w| w > 0.0));
            prop_assert_eq!(c.weights().len(), c.free_len());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn transposed_fields_have_equal_energy(k in 2u32..4, a in 0.5f64..10.0, cs in 0.2f64..3.0, ct in 0.2f64..3.0) {
        let p = ProblemParams::new(6, 3.0, a, Nonlinearity::double_power_min(3.0, 8.0)).unwrap();
        let g = Arc::new(CylGrid::new(6, k, 14, 7.0).unwrap());
        let gt = Arc::new(g.transposed());
        let op = assemble_cyl(&p, g.clone()).unwrap();
        let opt = assemble_cyl(&p, gt).unwrap();
        let u = Field2D::from_fn(g, |s, t| (-(s - cs).powi(2) - (t - ct).powi(2)).exp()).unwrap();
        let (e, et) = (op.energy(&u).unwrap(), opt.energy(&u.transpose()).unwrap());
        prop_assert!((e - et).abs() <= 1e-12 * e.abs().max(1.0));
    }

    #[test]
    fn config_round_trips(
        n in 4u32..8, alpha in 2.5f64..5.0, a in 0.5f64..10.0, nodes in 10usize..5000, side in 4usize..256,
        seed in any::<u64>(), workers in 1usize..8, json in any::<bool>(), mu in prop::option::of(2.5f64..9.0),
    ) {
        let mut cfg = RunConfig::default();
        cfg.problem.dim = n;
        cfg.problem.alpha = alpha;
        cfg.problem.a = a;
        cfg.problem.nonlinearity.mu = mu;
        cfg.grids.radial.nodes = nodes;
        cfg.grids.cylindrical.n = side;
        cfg.seed = seed;
        cfg.workers = workers;
        cfg.output.json = json;
        let back = RunConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn h_weight_scaling_is_bounded() {
    for (n, k) in [(4, 2), (6, 2), (6, 3), (8, 5)] {
        let ratios: Vec<f64> = [1e2, 1e4, 1e6]
            .iter()
            .map(|&a| {
                let (lo, hi) = h_bounds(n, k, a, 400).unwrap();
                assert!(lo > 0.0);
                hi / lo
            })
            .collect();
        // H(φ/√A) A^{(N-K-1)/2} → φ^{N-K-1}, so max/min → ((π/3)/(π/6))^{N-K-1}
        let limit = 2f64.powi((n - k - 1) as i32);
        for r in ratios {
            assert!(r <= 1.01 * limit && r >= 0.9 * limit, "N={n} K={k}: {r} vs {limit}");
        }
    }
}

#[test]
fn config_validation_rejects_bad_inputs_before_solving() {
    let mut c = RunConfig { k_list: vec![1], ..RunConfig::default() };
    assert!(c.validate().is_err());
    c.k_list = vec![2];
    c.problem.dim = 2;
    assert!(c.validate().is_err());
    c.problem.dim = 4;
    c.problem.alpha = 2.0;
    assert!(c.validate().is_err());
}
