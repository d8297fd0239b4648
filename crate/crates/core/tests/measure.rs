use holocorr::correspondence::{builtin, TreeMode};
use holocorr::measure::*;
use holocorr::poly::BihomogeneousPolynomial;
use holocorr::quadrature::point_at;
use holocorr::{Correspondence, Point, C64};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = C64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| C64::new(a, b))
}

fn correspondence() -> impl Strategy<Value = Correspondence> {
    (1usize..=3, 1usize..=3)
        .prop_flat_map(|(m, n)| (Just(m), Just(n), prop::collection::vec(coeff(), (m + 1) * (n + 1))))
        .prop_filter_map("degenerate graph", |(m, n, c)| {
            Correspondence::new(BihomogeneousPolynomial::new(m, n, c).ok()?).ok()
        })
}

fn cloud() -> impl Strategy<Value = WeightedPointCloud> {
    prop::collection::vec((-1.0f64..1.0, 0.0f64..std::f64::consts::TAU, 0.01f64..1.0), 1..12).prop_map(|v| {
        let atoms = v.iter().map(|&(u, p, _)| point_at(u, p)).collect();
        WeightedPointCloud::new(atoms, v.iter().map(|t| t.2).collect()).unwrap()
    })
}

/// Random quadratic polynomial in the sphere coordinates.
fn test_function() -> impl Strategy<Value = ScalarTestFunction> {
    prop::collection::vec(coeff(), 10).prop_map(|c| {
        ScalarTestFunction::new(
            move |p: &Point| {
                let [a, b, z] = p.sphere_coords();
                let mono = [1.0, a, b, z, a * a, b * b, z * z, a * b, b * z, a * z];
                mono.iter().zip(&c).map(|(m, k)| k * *m).sum()
            },
            Smoothness::C2,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pullback_of_measures_is_dual_to_pushforward_of_functions(
        f in correspondence(),
        nu in cloud(),
        psi in test_function(),
    ) {
        let lhs = pair_measure_function(&pullback_measure(&f, &nu).unwrap(), &psi);
        let rhs = pair_measure_function(&nu, &pushforward_function(&f, &psi));
        prop_assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + lhs.norm()), "{} vs {}", lhs, rhs);
    }

    #[test]
    fn pushforward_of_measures_is_dual_to_pullback_of_functions(
        f in correspondence(),
        nu in cloud(),
        psi in test_function(),
    ) {
        let lhs = pair_measure_function(&pushforward_measure(&f, &nu).unwrap(), &psi);
        let rhs = pair_measure_function(&nu, &pullback_function(&f, &psi));
        prop_assert!((lhs - rhs).norm() <= 1e-8 * (1.0 + lhs.norm()));
    }

    #[test]
    fn transport_scales_mass_by_degree(f in correspondence(), nu in cloud()) {
        let m = nu.mass();
        prop_assert!((pushforward_measure(&f, &nu).unwrap().mass() - f.d1() as f64 * m).abs() < 1e-12 * m.max(1.0));
        prop_assert!((pullback_measure(&f, &nu).unwrap().mass() - f.d2() as f64 * m).abs() < 1e-12 * m.max(1.0));
    }

    #[test]
    fn equilibrium_estimates_are_probability_measures(seed in 0u64..1000, depth in 1usize..6) {
        let f = builtin("nwm22-seeded").unwrap();
        let x = generic_seed(seed, &[], 0.0);
        for dir in [Direction::Backward, Direction::Forward] {
            let mu = equilibrium_measure(&f, x, depth, TreeMode::Full, dir).unwrap();
            prop_assert!((mu.mass() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn square_backward_cloud_cancels_moments() {
    let f = builtin("square").unwrap();
    let seed = generic_seed(3, &[Point::affine(C64::new(0.0, 0.0)), Point::infinity()], 0.1);
    let mu = equilibrium_measure(&f, seed, 12, TreeMode::Full, Direction::Backward).unwrap();
    for (k, m) in (1..).zip(mu.moments(7)) {
        assert!(m.norm() <= 1e-10, "moment {k}: {m}");
    }
}

#[test]
fn chebyshev_cloud_matches_the_arcsine_law() {
    // arcsine law on [-2, 2]: m_k = int_0^1 (2 cos(pi t))^k dt, by midpoint quadrature
    let arcsine = |k: i32| {
        let n = 4096;
        (0..n).map(|i| (2.0 * (std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos()).powi(k)).sum::<f64>()
            / n as f64
    };
    assert!((arcsine(2) - 2.0).abs() < 1e-12 && (arcsine(4) - 6.0).abs() < 1e-12);
    let f = builtin("chebyshev").unwrap();
    let mu = equilibrium_measure(&f, Point::affine(C64::new(0.3, 0.2)), 12, TreeMode::Full, Direction::Backward).unwrap();
    let m = mu.moments(4);
    assert!((m[1].re - arcsine(2)).abs() < 0.05 && m[1].im.abs() < 0.05, "{}", m[1]);
    assert!((m[3].re - arcsine(4)).abs() < 0.05 && m[3].im.abs() < 0.05, "{}", m[3]);
}

#[test]
fn estimated_measures_are_nearly_invariant() {
    let psi = ScalarTestFunction::new(
        |p: &Point| {
            let [a, b, z] = p.sphere_coords();
            C64::new(a * z + 0.5 * b, z * z)
        },
        Smoothness::C2,
    );
    for name in ["square", "chebyshev", "nwm22-seeded"] {
        let f = builtin(name).unwrap();
        let mu = equilibrium_measure(&f, generic_seed(5, &[], 0.0), 12, TreeMode::Full, Direction::Backward).unwrap();
        let defect = invariance_defect(&f, &mu, &psi, Direction::Backward);
        assert!(defect.norm() <= 0.01 * psi.norm_bound, "{name}: {defect} vs {}", psi.norm_bound);
    }
}

#[test]
fn l1_deviation_decays_at_the_degree_ratio() {
    use holocorr::pairing::fit_rate;
    use holocorr::quadrature::SphereGrid;
    let f = builtin("square").unwrap();
    let mu = equilibrium_measure(&f, Point::affine(C64::new(0.3, 0.1)), 12, TreeMode::Full, Direction::Backward).unwrap();
    let grid = SphereGrid::square(32).unwrap();
    // Re z / (1 + |z|^2) sums to zero over every backward fiber of z^(2^n)
    let odd = ScalarTestFunction::new(|p: &Point| C64::new(p.sphere_coords()[0] / 2.0, 0.0), Smoothness::C2);
    for row in l1_equidistribution_check(&f, &odd, &mu, 6, &grid).unwrap() {
        assert!(row.deviation < 1e-12, "{row:?}");
    }
    let height = ScalarTestFunction::new(|p: &Point| C64::new(p.sphere_coords()[2], 0.0), Smoothness::C2);
    let rows: Vec<(usize, f64, f64)> = l1_equidistribution_check(&f, &height, &mu, 8, &grid)
        .unwrap()
        .iter()
        .map(|r| (r.n, r.deviation, 0.0))
        .collect();
    let rate = fit_rate(&rows, 10.0).rate().unwrap();
    assert!(rate <= 0.7 && rate > 0.3, "{rate}");
}
