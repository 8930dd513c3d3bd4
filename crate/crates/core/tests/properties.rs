use proptest::prelude::*;

use specgap::bounds::{closed_form_inf_power, first_order_bound, gamma, SearchBox};
use specgap::intertwine::{curvature_matrix, curvature_matrix_exp_closed_form};
use specgap::model::ScalarField;
use specgap::oracle::{discretize, integrate, variance, Grid};
use specgap::{DiagonalWeight, Potential};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_infimum_is_a_lower_bound(a in 1.05f64..1.95, eps in 0.01f64..0.49, y in 1e-3f64..20.0) {
        let inf = closed_form_inf_power(a, eps).unwrap();
        let at_y = (a - 1.0) * y.powf(a - 2.0) + eps * y.powf(2.0 * a - 2.0);
        prop_assert!(inf <= at_y * (1.0 + 1e-12));
    }

    #[test]
    fn curvature_is_symmetric_and_matches_closed_form(
        e1 in 0.01f64..0.49, e2 in 0.01f64..0.49,
        x1 in 0.05f64..3.0, x2 in -3.0f64..-0.05, c in 0.0f64..0.3,
    ) {
        let v = Potential::power_product(2, 1.5, c, 0.01).unwrap();
        let w = DiagonalWeight::exp_eps_u(&v, &[e1, e2]).unwrap();
        let x = [x1, x2];
        let generic = curvature_matrix(&v, &w, &x).unwrap();
        let closed = curvature_matrix_exp_closed_form(&v, &[e1, e2], &x).unwrap();
        prop_assert!(generic.asymmetry() <= 1e-9);
        for i in 0..2 {
            for j in 0..2 {
                let scale = closed[(i, j)].abs().max(1.0);
                prop_assert!((generic[(i, j)] - closed[(i, j)]).abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn gamma_never_exceeds_unscaled_infimum(eps in 0.01f64..0.49) {
        let v = Potential::power_product(1, 1.5, 0.0, 0.01).unwrap();
        let (g, _) = gamma(&v, &[eps]).unwrap();
        prop_assert!(g > 0.0);
        prop_assert!(g <= closed_form_inf_power(1.5, eps).unwrap());
    }

    #[test]
    fn discrete_generator_kills_constants(
        a in 0.2f64..3.0, b in -1.0f64..1.0, q in 0.0f64..0.5,
    ) {
        let src = format!("{a}*x1^2/2 + {b}*x1 + {q}*x1^4");
        let v = Potential::<f64>::from_expression(1, &src).unwrap();
        let grid = Grid::<f64>::new(1, 5.0, 201).unwrap();
        let op = discretize(&v, &grid).unwrap();
        prop_assert!(op.kernel_residual() <= 1e-12);
        prop_assert!(op.stiffness().max_asymmetry() <= 1e-14);
        let ones = vec![1.0f64; grid.len()];
        prop_assert!((integrate(&op, &ones) - 1.0).abs() <= 1e-12);
        prop_assert!(variance(&op, &ones).abs() <= 1e-14);
    }

    #[test]
    fn expression_matches_closure(a in -2.0f64..2.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        let v = Potential::from_expression(2, &format!("x1^2/2 + {a}*x1*x2 + exp(0.1*x2) + abs(x2)^1.5")).unwrap();
        let direct = x * x / 2.0 + a * x * y + (0.1 * y).exp() + y.abs().powf(1.5);
        prop_assert!((v.value(&[x, y]) - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }
}

#[test]
fn single_precision_smoke() {
    let v = Potential::<f32>::gaussian(2).unwrap();
    let b = first_order_bound(&v, &DiagonalWeight::identity(2), &SearchBox::new(4.0, 17)).unwrap();
    assert_eq!(b.value, Some(1.0f32));
    let inf = closed_form_inf_power(1.5f32, 0.25).unwrap();
    assert!((inf - 0.75).abs() < 1e-6);
    let p = Potential::<f32>::power_product(2, 1.5, 0.1, 0.01).unwrap();
    let (g, _) = gamma(&p, &[0.25, 0.25]).unwrap();
    assert!((g - 0.117_187_5).abs() < 1e-6);
}
