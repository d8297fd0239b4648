use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use holocorr::correspondence::{builtin, TreeMode, BUILTIN_NAMES};
use holocorr::measure::WeightedPointCloud;
use holocorr::oneform::FamilyForm;
use holocorr::pairing::fourier::{fourier_coefficients, index_norm, normalized_c5_bump};
use holocorr::pairing::*;
use holocorr::quadrature::SphereGrid;
use holocorr::{Error, C64};

fn shared<T: TestForm + 'static>(f: T) -> SharedForm {
    Arc::new(f)
}

fn standard() -> Vec<SharedForm> {
    GlobalForm::standard_family().into_iter().map(shared).collect()
}

#[test]
fn kahler_mass_of_iterated_graphs() {
    let grid = SphereGrid::square(32).unwrap();
    let forms = vec![shared(ProductKahlerForm)];
    for name in ["square", "sqrt", "chebyshev", "nwm22-seeded"] {
        let f = builtin(name).unwrap();
        let lv = pair_graph_current_levels(&f, 5, &forms, TreeMode::Full, &grid).unwrap();
        let (d1, d2) = (f.d1() as f64, f.d2() as f64);
        for (k, row) in lv.levels.iter().enumerate() {
            let n = (k + 1) as i32;
            let expect = (d1.powi(n) + d2.powi(n)) * FRAC_1_SQRT_2 / d2.powi(n);
            assert!((row[0].value.re - expect).abs() < 1e-9 * expect, "{name} n={n}: {}", row[0].value);
        }
    }
}

#[test]
fn source_only_form_scales_by_degree_ratio() {
    // a = (1 + X3)(x) rho(x): the graph covers the source d1^n times
    let h = SpherePolynomial::constant(1.0).plus(1.0, [0, 0, 1]);
    let form = GlobalForm::new("a-only", vec![GlobalTerm::Source { h, k: SpherePolynomial::constant(1.0) }]);
    let grid = SphereGrid::square(24).unwrap();
    let f = builtin("chebyshev").unwrap();
    let lv = pair_graph_current_levels(&f, 4, &[shared(form)], TreeMode::Full, &grid).unwrap();
    for (k, row) in lv.levels.iter().enumerate() {
        let expect = 0.5f64.powi(k as i32 + 1);
        let got = row[0].value.re;
        assert!((got - expect).abs() < 1e-12, "n={}: {got} vs {expect}", k + 1);
    }
}

#[test]
fn symbolic_and_tree_strategies_agree() {
    let grid = SphereGrid::square(24).unwrap();
    let forms = standard();
    for name in BUILTIN_NAMES {
        let f = builtin(name).unwrap();
        let s = pair_graph_current(&f, 3, &forms, &Strategy::Symbolic, &grid).unwrap();
        let t = pair_graph_current(&f, 3, &forms, &Strategy::Tree(TreeMode::Full), &grid).unwrap();
        for (a, b) in s.iter().zip(&t) {
            assert!((a.value - b.value).norm() < 1e-9 * (1.0 + b.value.norm()), "{name}: {a:?} vs {b:?}");
        }
    }
}

#[test]
fn pairing_is_linear_and_ignores_holomorphic_parts() {
    let grid = SphereGrid::square(20).unwrap();
    let f = builtin("nwm22-seeded").unwrap();
    let fam = standard();
    let alpha = C64::new(0.7, -1.3);
    let combo = shared(SumForm { parts: vec![(alpha, fam[1].clone()), (C64::new(1.0, 0.0), fam[2].clone())] });
    let augmented =
        shared(WithHolomorphicPart { base: fam[2].clone(), g1: FamilyForm::new(1, 0), g2: FamilyForm::new(2, 1) });
    let doubled = shared(ScaledForm { base: fam[0].clone(), factor: C64::new(2.0, 0.0) });
    let forms = vec![fam[0].clone(), fam[1].clone(), fam[2].clone(), combo, augmented, doubled];
    let v = pair_graph_current(&f, 2, &forms, &Strategy::Tree(TreeMode::Full), &grid).unwrap();
    let close = |a: C64, b: C64| (a - b).norm() < 1e-12 * (1.0 + a.norm());
    assert!(close(v[3].value, v[1].value * alpha + v[2].value));
    assert!(close(v[4].value, v[2].value));
    assert!(close(v[5].value, v[0].value * 2.0));
}

#[test]
fn localized_pieces_sum_to_the_global_form() {
    let grid = SphereGrid::square(20).unwrap();
    let f = builtin("chebyshev").unwrap();
    for form in standard() {
        let mut forms: Vec<SharedForm> = localize(form.clone()).into_iter().map(shared).collect();
        forms.push(form);
        let v = pair_graph_current(&f, 2, &forms, &Strategy::Tree(TreeMode::Full), &grid).unwrap();
        let sum: C64 = v[..4].iter().map(|e| e.value).sum();
        assert!((sum - v[4].value).norm() < 1e-12, "{sum} vs {}", v[4].value);
    }
}

#[test]
fn limit_current_of_a_probability_cloud_has_kahler_mass() {
    let grid = SphereGrid::square(16).unwrap();
    for seed in 0..5 {
        let nu = WeightedPointCloud::fubini_study_sample(7 + seed as usize, seed);
        for lim in [
            LimitCurrent { source_measure: Some(nu.clone()), target_measure: None },
            LimitCurrent { source_measure: None, target_measure: Some(nu.clone()) },
        ] {
            let v = pair_limit_current(&lim, &ProductKahlerForm, &grid);
            assert!((v.re - FRAC_1_SQRT_2).abs() < 1e-6);
        }
    }
}

#[test]
fn square_limit_has_exact_radial_value() {
    // mu is uniform on the unit circle, where X3 = 0: <pi_1^* mu, target-radial> = 0.5 * int (1 + X3/2) = 0.5
    let f = builtin("square").unwrap();
    let lim = LimitCurrent::estimate(&f, &LimitOptions { depth: 8, ..Default::default() }).unwrap();
    let grid = SphereGrid::square(16).unwrap();
    let v = pair_limit_current(&lim, standard()[0].as_ref(), &grid);
    assert!((v.re - 0.5).abs() < 1e-12, "{v}");
}

#[test]
fn experiment_refuses_divergent_normalization() {
    let f = builtin("sqrt").unwrap();
    let grids = ExperimentGrids { fine: SphereGrid::square(8).unwrap(), coarse: SphereGrid::square(4).unwrap() };
    let r = convergence_experiment(&f, &standard(), 2, &Strategy::Symbolic, &grids, &LimitCurrent::default());
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

#[test]
fn sampled_pairing_needs_two_paths() {
    let f = builtin("square").unwrap();
    let grid = SphereGrid::square(4).unwrap();
    let r = pair_graph_current(&f, 1, &standard(), &Strategy::Tree(TreeMode::Sampled { paths: 1, seed: 0 }), &grid);
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

#[test]
fn c5_bump_coefficients_decay() {
    let a = fourier_coefficients(normalized_c5_bump(), 8, 32).unwrap();
    for (i, v) in a.iter() {
        let n = index_norm(i);
        if n >= 1 {
            assert!(v.norm() <= (n as f64).powi(-5), "{i:?}: {}", v.norm());
        }
    }
}

#[test]
fn case_forms_reject_leaky_support() {
    use holocorr::point::Chart;
    let leaky = |u: C64, _v: C64| C64::new(u.re, 0.0);
    let r = build_case_test_form(Case::Source, (Chart::Zero, Chart::One), "leaky", leaky);
    assert!(matches!(r, Err(Error::SupportViolation(_))));
}
