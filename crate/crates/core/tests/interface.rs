use std::collections::BTreeMap;

use topoqfi::edge::{extract_edge_state, numeric_edge_information, StateKind};
use topoqfi::estimation::{default_step, numerical_state_derivative};
use topoqfi::linalg::ComplexMatrix;
use topoqfi::many_body::GAP_FLOOR;
use topoqfi::models::{build_ssh, MODEL_IDS};
use topoqfi::*;

#[test]
fn every_model_id_builds_with_defaults() {
    for id in MODEL_IDS {
        let family = ModelFamily::from_id(id, &BTreeMap::new()).unwrap();
        assert_eq!(family.id(), id);
    }
    let mut params = BTreeMap::new();
    params.insert("t2".to_string(), 0.0);
    assert!(matches!(ModelFamily::from_id("chern-bloch", &params), Err(Error::InvalidParams(_))));
    assert!(matches!(ModelFamily::from_id("kitaev", &BTreeMap::new()), Err(Error::InvalidConfig(_))));
}

#[test]
fn edge_errors_surface_typed() {
    assert!(matches!(ssh_edge_family(1.2, 8), Err(Error::OutsideTopologicalPhase(_))));
    assert!(matches!(qfi_phi_z_closed_form(1.5, 1.0, 8), Err(Error::InvalidR(_))));
    assert!(matches!(ssh_tpt_closed_form(7), Err(Error::OddL(7))));
    assert!(matches!(ssh_continuum_limit(1.0), Err(Error::AtCriticality(_))));
}

#[test]
fn ssh_edge_routes_agree() {
    let closed = ssh_edge_qfi(0.6, 24).unwrap();
    let info = numeric_edge_information(&ModelFamily::ssh(), 0.6, 24, default_step(0.6)).unwrap();
    assert_eq!(info.kind, StateKind::Edge);
    assert!((info.qfi / closed - 1.0).abs() < 1e-7);
    assert!((info.cfi_position / closed - 1.0).abs() < 1e-7);
}

#[test]
fn custom_family_goes_through_numeric_pipeline() {
    // SSH chain assembled by hand, with its last b orbital dropped.
    let family = ModelFamily::custom("hand-ssh", 2, |lambda| {
        let full = build_ssh(lambda, 12, true)?;
        Ok(full.assemble_dense())
    });
    let picked = extract_edge_state(&family.dense(0.4, 12).unwrap(), 2).unwrap();
    assert!(picked.energy.abs() < 1e-8);
    let sd = numerical_state_derivative(
        |x| Ok(extract_edge_state(&family.dense(x, 12)?, 2)?.state),
        0.4,
        default_step(0.4),
    )
    .unwrap();
    let q = qfi_pure(&sd).unwrap();
    assert!(q > 0.0 && q.is_finite());
}

#[test]
fn pbc_sum_is_deterministic_and_ordered() {
    let family = ModelFamily::chern_bloch();
    let a = qfi_pbc_sum(&family, -3.0, 24, GAP_FLOOR).unwrap();
    let b = qfi_pbc_sum(&family, -3.0, 24, GAP_FLOOR).unwrap();
    assert_eq!(a.total.to_bits(), b.total.to_bits());
    assert_eq!(a.per_k.len(), 24 * 24);
    assert_eq!(a.total, a.per_k.iter().sum::<f64>());
    let crit = qfi_pbc_sum(&family, -4.0, 24, GAP_FLOOR).unwrap();
    assert_eq!(crit.grid.excluded.len(), 1);
}

#[test]
fn fitting_requires_enough_points() {
    let s = ScalingSeries::new(vec![(8, 1.0), (16, 2.0), (32, 4.0)], "short").unwrap();
    assert!(fit_power_law(&s, (-1.0, 4.0)).is_err());
    assert!(ScalingSeries::new(vec![(8, 1.0), (8, 2.0), (16, 3.0)], "dup").is_err());
    let exact = ScalingSeries::new((3..9).map(|p| (1usize << p, 2.0 * (1u64 << (2 * p)) as f64 + 1.0)).collect(), "L^2").unwrap();
    let fit = fit_power_law(&exact, (-1.0, 4.0)).unwrap();
    assert!((fit.b - 2.0).abs() < 1e-8 && (fit.a - 2.0).abs() < 1e-6);
}

#[test]
fn hermitian_input_is_checked() {
    let mut m = ComplexMatrix::identity(3);
    m[(0, 1)] = C64::new(1.0, 0.0);
    assert!(matches!(hermitian_eig(&m), Err(Error::NonHermitianInput { .. })));
    let z = ComplexMatrix::pauli_z();
    let eig = hermitian_eig(&z).unwrap();
    assert_eq!(eig.eigenvalues, vec![-1.0, 1.0]);
}

#[test]
fn band_inversion_is_quadratic_at_criticality() {
    for l in [20usize, 200] {
        let f = band_inversion_lowest_modes(l, 2.0, 0.5, 0.5).unwrap();
        assert!((f / ((l * l) as f64 / 4.0) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn estimator_report_serializes() {
    let cfg = SimConfig { reps: 8, samples: 500, ..SimConfig::ssh_default() };
    let report = estimator_stats(&cfg).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: EstimationReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}
