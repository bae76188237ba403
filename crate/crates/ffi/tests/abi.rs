use std::ffi::{c_char, CStr, CString};
use std::ptr;

use topoqfi_ffi::*;

fn new_model(id: &str, params: &[(&str, f64)]) -> Result<*mut TqModel, i32> {
    let id = CString::new(id).unwrap();
    let keys: Vec<CString> = params.iter().map(|(k, _)| CString::new(*k).unwrap()).collect();
    let key_ptrs: Vec<*const c_char> = keys.iter().map(|k| k.as_ptr()).collect();
    let values: Vec<f64> = params.iter().map(|p| p.1).collect();
    let mut out = ptr::null_mut();
    let status = unsafe { tq_model_new(id.as_ptr(), key_ptrs.as_ptr(), values.as_ptr(), params.len(), &mut out) };
    if status == TQ_OK { Ok(out) } else { Err(status) }
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    unsafe {
        tq_last_error_message(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn model_lifecycle_and_errors() {
    let ssh = new_model("ssh", &[]).unwrap();
    unsafe { tq_model_free(ssh) };
    unsafe { tq_model_free(ptr::null_mut()) };
    assert_eq!(new_model("ssh", &[("kx", 1.0)]), Err(TQ_ERR_INVALID_CONFIG));
    assert!(last_error().contains("kx"));
    assert_eq!(new_model("chern-bloch", &[("t2", 0.0)]), Err(TQ_ERR_INVALID_PARAMS));
    let status = unsafe { tq_model_new(ptr::null(), ptr::null(), ptr::null(), 0, ptr::null_mut()) };
    assert_eq!(status, TQ_ERR_NULL_POINTER);
}

#[test]
fn edge_values_match_closed_form() {
    let ssh = new_model("ssh", &[]).unwrap();
    let mut info = TqEdgeInfo::default();
    let mut closed = 0.0;
    unsafe {
        assert_eq!(tq_edge_qfi(ssh, 0.5, 32, &mut info), TQ_OK);
        assert_eq!(tq_ssh_edge_qfi(0.5, 32, &mut closed), TQ_OK);
        tq_model_free(ssh);
    }
    assert_eq!(info.is_edge, 1);
    assert!((info.qfi / closed - 1.0).abs() < 1e-8);
    assert!((info.cfi_position / closed - 1.0).abs() < 1e-8);

    let mut out = 0.0;
    assert_eq!(unsafe { tq_ssh_edge_qfi(1.5, 32, &mut out) }, TQ_ERR_OUTSIDE_TOPOLOGICAL_PHASE);
    assert_eq!(unsafe { tq_phi_z_qfi(0.5, 1.0, 8, ptr::null_mut()) }, TQ_ERR_NULL_POINTER);
    assert_eq!(tq_tpt_limit(1.0, 0.0, 10), 33.0);
}

#[test]
fn many_body_entry_points() {
    let ssh = new_model("ssh", &[]).unwrap();
    let (mut pbc, mut closed, mut obc) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(tq_pbc_qfi(ssh, 1.0, 16, &mut pbc), TQ_OK);
        assert_eq!(tq_ssh_tpt_closed_form(16, &mut closed), TQ_OK);
        assert_eq!(tq_obc_qfi(ssh, 0.5, 16, &mut obc), TQ_OK);
        assert_eq!(tq_ssh_tpt_closed_form(15, &mut closed), TQ_ERR_ODD_L);
        tq_model_free(ssh);
    }
    assert!((pbc / ((256.0 - 48.0 + 2.0) / 12.0) - 1.0).abs() < 1e-6);
    assert!(obc > 0.0);
    let mut x = 0.0;
    unsafe {
        assert_eq!(tq_ssh_continuum_limit(0.5, &mut x), TQ_OK);
        assert!((x - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(tq_chern_tpt_sum(4, 1.0, 1.0, &mut x), TQ_OK);
        assert!(x > 0.0);
        assert_eq!(tq_band_inversion_lowest_modes(100, 1.0, 0.0, 0.0, &mut x), TQ_OK);
        assert!((x / 1e4 - 1.0).abs() < 1e-10);
    }
}

#[test]
fn fit_and_flags() {
    let sizes = [8usize, 16, 32, 64, 128];
    let values: Vec<f64> = sizes.iter().map(|&l| 3.0 * (l as f64).powi(2) + 1.0).collect();
    let mut fit = TqFit::default();
    assert_eq!(unsafe { tq_fit_power_law(sizes.as_ptr(), values.as_ptr(), 5, -1.0, 4.0, &mut fit) }, TQ_OK);
    assert!((fit.b - 2.0).abs() < 1e-8 && fit.flags == 0);
    let flat = [2.0; 5];
    assert_eq!(unsafe { tq_fit_power_law(sizes.as_ptr(), flat.as_ptr(), 5, -1.0, 4.0, &mut fit) }, TQ_OK);
    assert_eq!(fit.flags & TQ_FIT_DEGENERATE, TQ_FIT_DEGENERATE);
    assert_ne!(unsafe { tq_fit_power_law(sizes.as_ptr(), values.as_ptr(), 3, -1.0, 4.0, &mut fit) }, TQ_OK);
}

#[test]
fn estimate_is_deterministic() {
    let ssh = new_model("ssh", &[]).unwrap();
    let (mut a, mut b) = (TqEstimate::default(), TqEstimate::default());
    unsafe {
        assert_eq!(tq_estimate(ssh, 0.5, 32, 2000, 20, 3, 0.0, 0.95, &mut a), TQ_OK);
        assert_eq!(tq_estimate(ssh, 0.5, 32, 2000, 20, 3, 0.0, 0.95, &mut b), TQ_OK);
    }
    assert_eq!(a, b);
    assert_eq!(a.run_failures, 0);
    assert!((a.lambda_hat_mean - 0.5).abs() < 0.05);
    unsafe {
        assert_eq!(tq_estimate(ssh, 0.5, 32, 0, 20, 3, 0.0, 0.95, &mut b), TQ_ERR_INVALID_CONFIG);
        tq_model_free(ssh);
    }
}

#[test]
fn error_message_is_truncated_safely() {
    let mut out = 0.0;
    assert_eq!(unsafe { tq_ssh_continuum_limit(1.0, &mut out) }, TQ_ERR_AT_CRITICALITY);
    let full = unsafe { tq_last_error_message(ptr::null_mut(), 0) };
    assert!(full > 4);
    let mut small = [1 as c_char; 4];
    unsafe { tq_last_error_message(small.as_mut_ptr(), small.len()) };
    assert_eq!(small[3], 0);
    assert_eq!(unsafe { tq_ssh_continuum_limit(0.5, &mut out) }, TQ_OK);
    assert_eq!(last_error(), "");
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(tq_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/topoqfi.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in ["tq_model_new", "tq_edge_qfi", "tq_pbc_qfi", "tq_fit_power_law", "tq_estimate", "TQ_ERR_PANIC"] {
        assert!(text.contains(name), "{name}");
    }
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = std::process::Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not available, skipping"),
        }
    }
}
