use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use qps_core::average::{mean_psf_quadrature, mean_psf_quadrature_angles};
use qps_core::gates::{rz, u_g_angles, CircuitParams};
use qps_core::linalg::tensor_product;
use qps_core::optimize::{classify_extremum, maximize_mean_psf, Classification, OptimizerConfig};
use qps_core::psf::psf;
use qps_core::states::pure_state;
use qps_core::{ComplexMatrix, PureAngles, DEFAULT_EPS_PHASE};

fn product(t1: f64, p1: f64, t2: f64, p2: f64) -> ComplexMatrix {
    tensor_product(
        &pure_state(PureAngles::new(t1, p1).unwrap()),
        &pure_state(PureAngles::new(t2, p2).unwrap()),
    )
}

fn angles() -> impl Strategy<Value = [f64; 8]> {
    prop::array::uniform8(0.0..TAU)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_turn_shift_leaves_psf_unchanged(a in angles(), k in 0usize..8, t1 in 0.0..PI, t2 in 0.0..PI, p1 in 0.0..TAU, p2 in 0.0..TAU) {
        let mut shifted = a;
        shifted[k] += TAU;
        let rho = product(t1, p1, t2, p2);
        let x = psf(&rho, &u_g_angles(&a), DEFAULT_EPS_PHASE).unwrap().value;
        let y = psf(&rho, &u_g_angles(&shifted), DEFAULT_EPS_PHASE).unwrap().value;
        match (x, y) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-10),
            (x, y) => prop_assert_eq!(x.is_some(), y.is_some()),
        }
    }

    #[test]
    fn final_half_turn_negates_psf(a in angles(), t1 in 0.0..PI, t2 in 0.0..PI, p1 in 0.0..TAU, p2 in 0.0..TAU) {
        let u = u_g_angles(&a);
        let flipped = &tensor_product(&ComplexMatrix::identity(2), &rz(PI)) * &u;
        let rho = product(t1, p1, t2, p2);
        if let (Some(x), Some(y)) = (
            psf(&rho, &u, DEFAULT_EPS_PHASE).unwrap().value,
            psf(&rho, &flipped, DEFAULT_EPS_PHASE).unwrap().value,
        ) {
            prop_assert!((x + y).abs() < 1e-10);
        }
    }

    #[test]
    fn psf_stays_in_unit_interval(a in angles(), t1 in 0.0..PI, t2 in 0.0..PI, p1 in 0.0..TAU, p2 in 0.0..TAU) {
        if let Some(v) = psf(&product(t1, p1, t2, p2), &u_g_angles(&a), DEFAULT_EPS_PHASE).unwrap().value {
            prop_assert!((-1.0..=1.0).contains(&v));
        }
    }
}

#[test]
fn mean_is_invariant_under_full_turns() {
    let base = [0.3, 1.1, 2.0, 0.4, 0.9, 1.7, 0.2, 2.5];
    let reference = mean_psf_quadrature_angles(&base, 12, DEFAULT_EPS_PHASE).unwrap().value;
    for k in 0..8 {
        let mut shifted = base;
        shifted[k] -= TAU;
        let v = mean_psf_quadrature_angles(&shifted, 12, DEFAULT_EPS_PHASE).unwrap().value;
        assert!((v - reference).abs() < 1e-10);
    }
}

#[test]
fn minimum_is_the_negated_maximum() {
    let max = CircuitParams::u_max();
    let min = max.with_sigma1(PI);
    assert_eq!(classify_extremum(&max, 1e-6), Classification::CondMaxReduced);
    assert_eq!(classify_extremum(&min, 1e-6), Classification::Minimum);
    let a = mean_psf_quadrature(&max, 24, DEFAULT_EPS_PHASE).unwrap().value;
    let b = mean_psf_quadrature(&min, 24, DEFAULT_EPS_PHASE).unwrap().value;
    assert!((a + b).abs() < 1e-8);
}

#[test]
fn converged_restarts_meet_the_gradient_tolerance() {
    let cfg = OptimizerConfig { restarts: 3, seed: 11, max_iter: 150, ..OptimizerConfig::default() };
    let res = maximize_mean_psf(&cfg).unwrap();
    assert_eq!(res.restarts.len(), 3);
    for r in res.restarts.iter().filter(|r| r.converged) {
        assert!(r.grad_norm <= cfg.grad_tol, "restart {}: {}", r.index, r.grad_norm);
    }
    assert!(res.restarts.iter().all(|r| r.report_value <= 0.352));
    let again = maximize_mean_psf(&cfg).unwrap();
    assert_eq!(res.best_params, again.best_params);
}
