use proptest::prelude::*;
use pursuit_core::geometry::{halfspace_contains, inner, norm, sphere_sample, HalfSpace, Point};
use pursuit_core::model::{
    active_set_k, check_assumption_a, reachable_radius, ConstraintClass, Pursuer, Scenario,
};
use pursuit_core::value::deficit;

fn vec_of(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, d)
}

fn pair() -> impl Strategy<Value = (Point, Point)> {
    (1usize..8).prop_flat_map(|d| (vec_of(d), vec_of(d))).prop_map(|(a, b)| (Point::new(a).unwrap(), Point::new(b).unwrap()))
}

fn class() -> impl Strategy<Value = ConstraintClass> {
    (any::<bool>(), 0.1f64..3.0).prop_map(|(integral, rho)| {
        if integral {
            ConstraintClass::integral(rho)
        } else {
            ConstraintClass::geometric(rho)
        }
    })
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (1usize..4, 1usize..5)
        .prop_flat_map(|(d, n)| {
            (
                Just(d),
                0.3f64..5.0,
                0.2f64..2.0,
                vec_of(d),
                prop::collection::vec((vec_of(d), class()), n),
            )
        })
        .prop_map(|(d, theta, sigma, y0, ps)| {
            let pursuers = ps
                .into_iter()
                .enumerate()
                .map(|(i, (x, c))| Pursuer { id: i as u64, x0: Point::new(x).unwrap(), constraint: c })
                .collect();
            Scenario::new(d, theta, sigma, Point::new(y0).unwrap(), pursuers).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cauchy_schwarz((a, b) in pair()) {
        let ip = inner(&a, &b).unwrap();
        prop_assert!(ip.abs() <= norm(&a) * norm(&b) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn triangle_inequality((a, b) in pair()) {
        prop_assert!(norm(&(&a + &b)) <= norm(&a) + norm(&b) + 1e-9);
    }

    #[test]
    fn halfspace_ignores_orthogonal_shifts((n, z) in pair(), offset in -100.0f64..100.0, w in vec_of(8), t in -10.0f64..10.0) {
        let d = n.dim();
        let w = Point::new(w[..d].to_vec()).unwrap();
        // make w orthogonal to n
        let nn = n.norm_sq();
        let w = if nn > 0.0 { &w - &n.scaled(w.dot(&n) / nn) } else { w };
        let h = HalfSpace { normal: n.clone(), offset };
        let mut shifted = z.clone();
        shifted.axpy(t, &w);
        let before = h.excess(&z);
        let after = h.excess(&shifted);
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before.abs()));
        if before.abs() > 1e-6 {
            prop_assert_eq!(halfspace_contains(&h, &z, 0.0), halfspace_contains(&h, &shifted, 0.0));
        }
    }

    #[test]
    fn sphere_sample_is_reproducible(d in 1usize..6, r in 0.0f64..10.0, seed in any::<u64>()) {
        let c = Point::zeros(d);
        let a = sphere_sample(&c, r, 7, seed);
        prop_assert_eq!(&a, &sphere_sample(&c, r, 7, seed));
        for p in &a {
            prop_assert!((p.norm() - r).abs() <= 1e-9 * (1.0 + r));
        }
    }

    #[test]
    fn reach_is_homogeneous_in_rho(c in class(), lambda in 0.01f64..100.0, theta in 0.1f64..10.0) {
        let p = Pursuer { id: 0, x0: Point::zeros(1), constraint: c };
        let q = Pursuer { id: 0, x0: Point::zeros(1), constraint: ConstraintClass { rho: c.rho * lambda, ..c } };
        let a = reachable_radius(&p, theta) * lambda;
        prop_assert!((reachable_radius(&q, theta) - a).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn active_set_grows_with_gamma(s in scenario(), g1 in 0.0f64..5.0, dg in 0.0f64..5.0) {
        let small = active_set_k(&s, g1);
        let large = active_set_k(&s, g1 + dg);
        prop_assert!(small.iter().all(|id| large.contains(id)));
    }

    #[test]
    fn assumption_a_certificates_hold(s in scenario()) {
        if let Some(c) = check_assumption_a(&s) {
            prop_assert!((c.p0.norm() - 1.0).abs() < 1e-9);
            for p in &s.pursuers {
                prop_assert!((&s.y0 - &p.x0).dot(&c.p0) >= -1e-6);
            }
        }
    }

    #[test]
    fn deficit_is_one_lipschitz(s in scenario(), a in vec_of(3), b in vec_of(3)) {
        let d = s.dimension;
        let za = Point::new(a[..d].to_vec()).unwrap();
        let zb = Point::new(b[..d].to_vec()).unwrap();
        let gap = (deficit(&s, &za).unwrap() - deficit(&s, &zb).unwrap()).abs();
        prop_assert!(gap <= za.dist(&zb) + 1e-9);
    }

    #[test]
    fn constant_control_reaches_any_attainable_point(c in class(), theta in 0.1f64..10.0, dir in vec_of(3), frac in 0.0f64..1.0) {
        let x0 = Point::zeros(3);
        let p = Pursuer { id: 0, x0: x0.clone(), constraint: c };
        let reach = reachable_radius(&p, theta);
        let Some(e) = Point::new(dir).unwrap().normalized() else { return Ok(()) };
        let target = e.scaled(reach * frac);
        let u = (&target - &x0).scaled(1.0 / theta);
        let spent = match c.kind {
            pursuit_core::model::ConstraintKind::Integral => u.norm_sq() * theta,
            pursuit_core::model::ConstraintKind::Geometric => u.norm(),
        };
        let limit = match c.kind {
            pursuit_core::model::ConstraintKind::Integral => c.rho * c.rho,
            pursuit_core::model::ConstraintKind::Geometric => c.rho,
        };
        prop_assert!(spent <= limit * (1.0 + 1e-12));
        let mut end = x0.clone();
        end.axpy(theta, &u);
        prop_assert!(end.dist(&target) <= 1e-9 * (1.0 + reach));
    }
}
