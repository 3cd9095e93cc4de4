use std::ffi::{CStr, CString};
use std::ptr;

use ndspline_ffi::*;

fn last_error() -> String {
    let p = nds_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(nds_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn rectangle_mesh_roundtrip() {
    let mut mesh = ptr::null_mut();
    let st = unsafe { nds_mesh_rectangle(0.0, 0.0, 2.0, 1.0, 2, 1, &mut mesh) };
    assert_eq!(st, NdsStatus::Ok);
    let (mut nv, mut nt, mut ne) = (0usize, 0usize, 0usize);
    assert_eq!(unsafe { nds_mesh_counts(mesh, &mut nv, &mut nt, &mut ne) }, NdsStatus::Ok);
    // 2x1 cells: 6 vertices, 4 triangles, Euler: E = V + T - 1
    assert_eq!((nv, nt, ne), (6, 4, 9));

    let mut fine = ptr::null_mut();
    assert_eq!(unsafe { nds_mesh_refine(mesh, 2, &mut fine) }, NdsStatus::Ok);
    assert_eq!(unsafe { nds_mesh_counts(fine, ptr::null_mut(), &mut nt, ptr::null_mut()) }, NdsStatus::Ok);
    assert_eq!(nt, 64);

    let (mut h, mut shape) = (0.0, 0.0);
    assert_eq!(unsafe { nds_mesh_size(mesh, &mut h, &mut shape) }, NdsStatus::Ok);
    assert!((h - 2f64.sqrt()).abs() < 1e-14);
    assert!(shape >= 2.0);

    let mut t = usize::MAX;
    let mut bary = [0.0; 3];
    assert_eq!(unsafe { nds_mesh_locate(mesh, 0.5, 0.25, &mut t, bary.as_mut_ptr()) }, NdsStatus::Ok);
    assert!(t < 4);
    assert!((bary.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    assert!(bary.iter().all(|&b| b >= -1e-14));

    let st = unsafe { nds_mesh_locate(mesh, 5.0, 0.5, &mut t, ptr::null_mut()) };
    assert_eq!(st, NdsStatus::PointOutsideDomain);
    assert!(!last_error().is_empty());

    unsafe {
        nds_mesh_free(fine);
        nds_mesh_free(mesh);
        nds_mesh_free(ptr::null_mut());
    }
}

#[test]
fn explicit_mesh_validation() {
    let xy = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0];
    let good = [0u32, 1, 3, 0, 3, 2];
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { nds_mesh_new(xy.as_ptr(), 4, good.as_ptr(), 2, &mut mesh) }, NdsStatus::Ok);
    unsafe { nds_mesh_free(mesh) };

    let bad = [0u32, 1, 7];
    let mut mesh = ptr::null_mut();
    let st = unsafe { nds_mesh_new(xy.as_ptr(), 4, bad.as_ptr(), 1, &mut mesh) };
    assert_eq!(st, NdsStatus::InvalidMesh);
    assert!(mesh.is_null());

    let collinear = [0.0, 0.0, 1.0, 0.0, 2.0, 0.0];
    let tri = [0u32, 1, 2];
    let st = unsafe { nds_mesh_new(collinear.as_ptr(), 3, tri.as_ptr(), 1, &mut mesh) };
    assert_eq!(st, NdsStatus::InvalidMesh);
}

#[test]
fn null_arguments_are_reported() {
    let st = unsafe { nds_mesh_rectangle(0.0, 0.0, 1.0, 1.0, 1, 1, ptr::null_mut()) };
    assert_eq!(st, NdsStatus::NullPointer);
    assert!(last_error().contains("out"));

    let mut n = 0usize;
    let st = unsafe { nds_mesh_counts(ptr::null(), &mut n, ptr::null_mut(), ptr::null_mut()) };
    assert_eq!(st, NdsStatus::NullPointer);

    let mut sol = ptr::null_mut();
    let st = unsafe { nds_solve_problem(ptr::null(), ptr::null(), ptr::null(), &mut sol) };
    assert_eq!(st, NdsStatus::NullPointer);
}

#[test]
fn unknown_problem() {
    let id = CString::new("ex99").unwrap();
    let mut mesh = ptr::null_mut();
    let st = unsafe { nds_problem_mesh(id.as_ptr(), 1, &mut mesh) };
    assert_eq!(st, NdsStatus::UnknownProblem);
    assert!(last_error().contains("ex99"));
}

#[test]
fn invalid_options() {
    let id = CString::new("ex1").unwrap();
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { nds_problem_mesh(id.as_ptr(), 1, &mut mesh) }, NdsStatus::Ok);
    let mut o = nds_solve_options_default();
    o.dual_degree = o.degree + 1;
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { nds_solve_problem(id.as_ptr(), mesh, &o, &mut sol) }, NdsStatus::InvalidArgument);
    o = nds_solve_options_default();
    o.method = 7;
    assert_eq!(unsafe { nds_solve_problem(id.as_ptr(), mesh, &o, &mut sol) }, NdsStatus::InvalidArgument);
    assert!(sol.is_null());
    unsafe { nds_mesh_free(mesh) };
}

#[test]
fn solve_and_evaluate_ex1() {
    let id = CString::new("ex1").unwrap();
    let mut mesh = ptr::null_mut();
    assert_eq!(unsafe { nds_problem_mesh(id.as_ptr(), 1, &mut mesh) }, NdsStatus::Ok);
    let mut o = nds_solve_options_default();
    o.degree = 5;
    o.dual_degree = 5;
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { nds_solve_problem(id.as_ptr(), mesh, &o, &mut sol) }, NdsStatus::Ok);

    let x = [0.25, 0.5, 0.8];
    let y = [0.75, 0.5, 0.1];
    let mut v = [0.0; 3];
    assert_eq!(unsafe { nds_solution_eval(sol, x.as_ptr(), y.as_ptr(), 3, v.as_mut_ptr()) }, NdsStatus::Ok);
    for i in 0..3 {
        let exact = x[i].sin() * y[i].sin();
        assert!((v[i] - exact).abs() < 1e-5, "{} vs {exact}", v[i]);
    }

    let mut e = [0.0; 3];
    assert_eq!(unsafe { nds_solution_errors(sol, 51, e.as_mut_ptr()) }, NdsStatus::Ok);
    assert!(e[0] < 1e-5 && e[1] < 1e-4 && e[2] < 1e-3, "{e:?}");

    let (mut c, mut k) = (1.0, 1.0);
    assert_eq!(unsafe { nds_solution_residuals(sol, &mut c, &mut k) }, NdsStatus::Ok);
    assert!(c < 1e-10 && k < 1e-8, "{c} {k}");

    unsafe {
        nds_solution_free(sol);
        nds_mesh_free(mesh);
    }
}

#[test]
fn study_table() {
    let id = CString::new("ex1").unwrap();
    let mut o = nds_solve_options_default();
    o.degree = 3;
    o.dual_degree = 1;
    let mut out = ptr::null_mut();
    let st = unsafe { nds_study_run(id.as_ptr(), &o, 2, 41, 1, &mut out) };
    assert_eq!(st, NdsStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { nds_string_free(out) };
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("h,rmse_u,rate_u"));
    assert_eq!(lines.len(), 3);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ndspline.h")).unwrap();
    for name in [
        "nds_last_error_message",
        "nds_version",
        "nds_solve_options_default",
        "nds_mesh_rectangle",
        "nds_mesh_new",
        "nds_problem_mesh",
        "nds_mesh_refine",
        "nds_mesh_counts",
        "nds_mesh_size",
        "nds_mesh_locate",
        "nds_mesh_free",
        "nds_solve_problem",
        "nds_solution_eval",
        "nds_solution_errors",
        "nds_solution_residuals",
        "nds_solution_free",
        "nds_study_run",
        "nds_string_free",
        "NDS_STATUS_OK = 0",
        "typedef struct NdsMesh NdsMesh",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}
