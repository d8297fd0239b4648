use holocorr::correspondence::{
    builtin, periodic_points, to_affine, twisted_coincidences, BranchTree, IterateBudget, TreeMode, BUILTIN_NAMES,
};
use holocorr::poly::{read_polynomial, write_polynomial, BihomogeneousPolynomial};
use holocorr::{Correspondence, Error, Point, C64};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

/// Dense random graphs of bidegree `(d2, d1)` with `d1, d2 <= 2`.
fn correspondence() -> impl Strategy<Value = Correspondence> {
    (1usize..=2, 1usize..=2)
        .prop_flat_map(|(m, n)| (Just(m), Just(n), prop::collection::vec(coeff(), (m + 1) * (n + 1))))
        .prop_filter_map("degenerate graph", |(m, n, c)| {
            Correspondence::new(BihomogeneousPolynomial::new(m, n, c).ok()?).ok()
        })
}

fn point() -> impl Strategy<Value = Point> {
    (-1.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(u, phi)| holocorr::quadrature::point_at(u, phi))
}

fn near(points: &[Point], p: &Point, tol: f64) -> bool {
    points.iter().any(|q| q.chordal_distance(p) < tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn composition_multiplies_degrees(f in correspondence(), g in correspondence()) {
        let h = f.compose(&g).unwrap().correspondence;
        prop_assert_eq!(h.d1(), f.d1() * g.d1());
        prop_assert_eq!(h.d2(), f.d2() * g.d2());
    }

    #[test]
    fn forward_and_backward_fibers_are_consistent(f in correspondence(), x in point()) {
        let ys = f.forward_fiber(&x).unwrap();
        prop_assert_eq!(ys.total_multiplicity(), f.d1());
        let a = f.adjoint();
        for c in &ys.clusters {
            let back = a.evaluate_forward(&c.point).unwrap();
            prop_assert!(near(&back, &x, 1e-5), "{:?} not recovered from {:?}", x, c.point);
        }
    }

    #[test]
    fn composition_images_are_two_step_images(f in correspondence(), g in correspondence(), x in point()) {
        let h = f.compose(&g).unwrap().correspondence;
        let direct = h.evaluate_forward(&x).unwrap();
        let mut steps = Vec::new();
        for y in g.evaluate_forward(&x).unwrap() {
            steps.extend(f.evaluate_forward(&y).unwrap());
        }
        prop_assert_eq!(direct.len(), steps.len());
        for p in &steps {
            prop_assert!(near(&direct, p, 1e-4));
        }
    }

    #[test]
    fn composition_is_associative(f in correspondence(), g in correspondence(), h in correspondence(), x in point()) {
        let left = f.compose(&g).unwrap().correspondence.compose(&h).unwrap().correspondence;
        let right = f.compose(&g.compose(&h).unwrap().correspondence).unwrap().correspondence;
        prop_assert_eq!((left.d1(), left.d2()), (right.d1(), right.d2()));
        let a = left.evaluate_forward(&x).unwrap();
        let b = right.evaluate_forward(&x).unwrap();
        for p in &a {
            prop_assert!(near(&b, p, 1e-3));
        }
    }

    #[test]
    fn adjoint_is_an_involution(f in correspondence()) {
        let a = f.adjoint();
        let aa = a.adjoint();
        prop_assert_eq!(aa.graph(), f.graph());
        prop_assert_eq!((a.d1(), a.d2()), (f.d2(), f.d1()));
    }

    #[test]
    fn text_format_round_trips(f in correspondence()) {
        let back = read_polynomial(&write_polynomial(Some("p"), f.graph())).unwrap();
        prop_assert_eq!(back.name.as_deref(), Some("p"));
        prop_assert_eq!(&back.poly, f.graph());
    }

    #[test]
    fn full_tree_levels_have_degree_powers(f in correspondence(), x in point()) {
        let t = BranchTree::build(&f, x, 3, TreeMode::Full).unwrap();
        for k in 0..=3 {
            let w: f64 = t.level(k).map(|n| n.weight).sum();
            prop_assert!((w - (f.d1() as f64).powi(k as i32)).abs() < 1e-9);
        }
    }
}

#[test]
fn periodic_counts_on_builtins() {
    let budget = IterateBudget::default();
    for name in BUILTIN_NAMES {
        let f = builtin(name).unwrap();
        for n in 1..=3u32 {
            let expect = f.d1().pow(n) + f.d2().pow(n);
            let total = match periodic_points(&f, n, &budget) {
                Ok(recs) => recs.iter().map(|r| r.multiplicity).sum::<usize>(),
                Err(Error::DiagonalComponent) => {
                    let one = C64::new(1.0, 0.0);
                    let twist = [[one, C64::new(0.0, 0.0)], [C64::new(0.2, -0.3), one]];
                    twisted_coincidences(&f, n, &budget, twist).unwrap().total_multiplicity()
                }
                Err(e) => panic!("{name} n={n}: {e}"),
            };
            assert_eq!(total, expect, "{name} n={n}");
        }
    }
}

#[test]
fn chain_rule_along_tree_paths_matches_the_iterate() {
    let budget = IterateBudget::default();
    for name in ["square", "chebyshev", "nwm22-seeded"] {
        let f = builtin(name).unwrap();
        let x = Point::affine(C64::new(0.31, 0.47));
        for n in 1..=3 {
            let g = f.iterate(n as u32, &budget).unwrap();
            let t = BranchTree::build(&f, x, n, TreeMode::Full).unwrap();
            for &i in t.level_indices(n) {
                let node = &t.nodes[i];
                let along = t.path_affine_derivative(i).unwrap();
                let direct = g.branch_derivative(&x, &node.point, 1).unwrap();
                let direct = to_affine(direct, &x, &node.point).unwrap();
                assert!((along - direct).norm() < 1e-6 * direct.norm().max(1.0), "{name} n={n}: {along} vs {direct}");
            }
        }
    }
}
