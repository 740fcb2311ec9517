use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use cpa_lyap_ffi::*;

fn last_error() -> String {
    let p = cpa_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn linear_system() -> *mut CpaSystem {
    let name = CString::new("lin").unwrap();
    let f: Vec<CString> = ["-x1", "-x2"]
        .iter()
        .map(|s| CString::new(*s).unwrap())
        .collect();
    let ptrs: Vec<*const c_char> = f.iter().map(|s| s.as_ptr()).collect();
    let (lo, hi) = ([-1.0, -1.0], [1.0, 1.0]);
    let mut sys = ptr::null_mut();
    let st = unsafe {
        cpa_system_new(
            name.as_ptr(),
            ptrs.as_ptr(),
            2,
            lo.as_ptr(),
            hi.as_ptr(),
            &mut sys,
        )
    };
    assert_eq!(st, CpaStatus::Ok);
    sys
}

#[test]
fn grid_mesh_round_trip() {
    let sys = linear_system();
    unsafe {
        assert_eq!(cpa_system_dim(sys), 2);
        let mut mesh = ptr::null_mut();
        assert_eq!(
            cpa_mesh_grid(sys, [0.5, 0.5].as_ptr(), &mut mesh),
            CpaStatus::Ok
        );
        assert_eq!(cpa_mesh_num_vertices(mesh), 25);
        assert_eq!(cpa_mesh_num_simplices(mesh), 32);
        let mut x = [0.0; 2];
        assert_eq!(cpa_mesh_vertex(mesh, 0, x.as_mut_ptr()), CpaStatus::Ok);
        assert_eq!(x, [-1.0, -1.0]);
        let mut s = [0usize; 3];
        assert_eq!(cpa_mesh_simplex(mesh, 0, s.as_mut_ptr()), CpaStatus::Ok);
        assert!(s.iter().all(|&v| v < 25));
        assert_eq!(cpa_mesh_refine(mesh, 0), CpaStatus::Ok);
        assert!(cpa_mesh_num_simplices(mesh) > 32);

        let mut json = ptr::null_mut();
        assert_eq!(cpa_mesh_to_json(mesh, &mut json), CpaStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap();
        assert!(text.contains("\"simplices\""));
        cpa_string_free(json);
        cpa_mesh_free(mesh);
        cpa_system_free(sys);
    }
}

#[test]
fn adapt_linear_system() {
    let sys = linear_system();
    unsafe {
        let mut mesh = ptr::null_mut();
        assert_eq!(
            cpa_mesh_grid(sys, [1.0, 1.0].as_ptr(), &mut mesh),
            CpaStatus::Ok
        );
        let mut report = ptr::null_mut();
        assert_eq!(cpa_adapt(sys, mesh, 1.0, 10, &mut report), CpaStatus::Ok);
        assert!(cpa_report_viable(report));
        assert_eq!(cpa_report_iterations(report), 1);
        assert_eq!(cpa_report_delta_simplices(report), 0);
        let mut json = ptr::null_mut();
        assert_eq!(cpa_report_candidate_json(report, &mut json), CpaStatus::Ok);
        assert!(CStr::from_ptr(json)
            .to_str()
            .unwrap()
            .contains("gradient_bounds"));
        cpa_string_free(json);
        let mut out = ptr::null_mut();
        assert_eq!(cpa_report_mesh(report, &mut out), CpaStatus::Ok);
        assert_eq!(cpa_mesh_num_simplices(out), 8);
        cpa_mesh_free(out);
        cpa_report_free(report);
        cpa_mesh_free(mesh);
        cpa_system_free(sys);
    }
}

#[test]
fn config_run_and_builtin() {
    let cfg = CString::new(
        r#"{"name": "C", "dimension": 2, "dynamics": ["0.5*x1^4*sin(x2) + 0.3*x2", "-0.5*x1 - 1.25*x2 - x2^3*x1"],
            "domain": [[-1,1],[-1,1]], "method": "grid", "grid_spacing": [0.25, 0.25]}"#,
    )
    .unwrap();
    unsafe {
        let mut report = ptr::null_mut();
        assert_eq!(cpa_run_config(cfg.as_ptr(), &mut report), CpaStatus::Ok);
        assert!(!cpa_report_viable(report));
        assert_eq!(cpa_report_iterations(report), 1);
        cpa_report_free(report);

        let mut sys = ptr::null_mut();
        let d = CString::new("D").unwrap();
        assert_eq!(cpa_system_builtin(d.as_ptr(), &mut sys), CpaStatus::Ok);
        assert_eq!(cpa_system_dim(sys), 3);
        cpa_system_free(sys);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut sys = ptr::null_mut();
        let bad = CString::new("Q").unwrap();
        assert_eq!(
            cpa_system_builtin(bad.as_ptr(), &mut sys),
            CpaStatus::InvalidArgument
        );
        assert!(last_error().contains("Q"));
        assert_eq!(
            cpa_system_builtin(ptr::null(), &mut sys),
            CpaStatus::NullPointer
        );
        assert!(sys.is_null());

        let cfg = CString::new("{\"name\": 3}").unwrap();
        let mut report = ptr::null_mut();
        assert_eq!(cpa_run_config(cfg.as_ptr(), &mut report), CpaStatus::Parse);
        assert!(last_error().contains("name"));

        let lin = linear_system();
        assert!(cpa_last_error().is_null());
        let mut mesh = ptr::null_mut();
        assert_eq!(
            cpa_mesh_grid(lin, [0.3, 0.5].as_ptr(), &mut mesh),
            CpaStatus::Mesh
        );
        assert_eq!(
            cpa_mesh_grid(lin, [0.5, 0.5].as_ptr(), &mut mesh),
            CpaStatus::Ok
        );
        assert_eq!(cpa_mesh_refine(mesh, 1000), CpaStatus::Mesh);
        let mut x = [0.0; 2];
        assert_eq!(
            cpa_mesh_vertex(mesh, 1000, x.as_mut_ptr()),
            CpaStatus::InvalidArgument
        );
        assert_eq!(
            cpa_adapt(lin, mesh, 1.0, 0, &mut report),
            CpaStatus::InvalidArgument
        );
        assert_eq!(
            cpa_adapt(lin, mesh, -1.0, 5, &mut report),
            CpaStatus::InvalidArgument
        );
        cpa_mesh_free(mesh);
        cpa_system_free(lin);

        cpa_system_free(ptr::null_mut());
        cpa_mesh_free(ptr::null_mut());
        cpa_report_free(ptr::null_mut());
        cpa_string_free(ptr::null_mut());
        assert_eq!(cpa_mesh_num_vertices(ptr::null()), 0);
        assert!(!cpa_report_viable(ptr::null()));
    }
}

#[test]
fn header_declares_the_interface() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = std::fs::read_to_string(dir.join("include/cpa_lyap.h")).unwrap();
    for name in [
        "CPA_STATUS_OK",
        "CPA_STATUS_PANIC",
        "typedef struct CpaSystem CpaSystem",
        "typedef struct CpaMesh CpaMesh",
        "typedef struct CpaReport CpaReport",
        "cpa_last_error",
        "cpa_string_free",
        "cpa_system_new",
        "cpa_mesh_grid",
        "cpa_adapt",
        "cpa_run_config",
        "cpa_report_free",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }

    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("probe.c");
    std::fs::write(
        &src,
        "#include \"cpa_lyap.h\"\nint main(void) {\n  CpaSystem *s = 0;\n  CpaStatus st = cpa_system_builtin(\"A\", &s);\n  cpa_system_free(s);\n  return st == CPA_STATUS_OK ? 0 : 1;\n}\n",
    )
    .unwrap();
    match Command::new("cc")
        .arg("-fsyntax-only")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&src)
        .output()
    {
        Ok(out) => assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        ),
        Err(_) => eprintln!("no C compiler; syntax check skipped"),
    }
}
