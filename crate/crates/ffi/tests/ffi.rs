use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use capround_ffi::*;

const TINY_A: &str = "CAPKM v1\nproblem ckm\nfacilities 2\nclients 3\ncapacity 2\nbudget 2\nfcost 1 1\nmetric euclidean 1\n0\n10\n0\n1\n10\n";

fn parse(text: &str) -> (CrStatus, *mut CrInstance) {
    let c = CString::new(text).unwrap();
    let mut inst = ptr::null_mut();
    let st = unsafe { cr_instance_parse(c.as_ptr(), &mut inst) };
    (st, inst)
}

fn last_error() -> String {
    let p = cr_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn tiny_a_round_trip() {
    let (st, inst) = parse(TINY_A);
    assert_eq!(st, CrStatus::Ok);
    unsafe {
        assert_eq!(cr_instance_n_facilities(inst), 2);
        assert_eq!(cr_instance_n_clients(inst), 3);
        let mut sol = ptr::null_mut();
        assert_eq!(cr_solve(inst, CrProblem::Ckm as i32, 1.0, 0, 1, &mut sol), CrStatus::Ok);
        assert_eq!(cr_solution_cost(sol), 1.0);
        assert_eq!(cr_solution_ok(sol), 1);
        assert!(cr_solution_max_load_over_u(sol) <= 3.0);
        let mut buf = [usize::MAX; 4];
        let mut written = 0;
        assert_eq!(cr_solution_open(sol, buf.as_mut_ptr(), buf.len(), &mut written), CrStatus::Ok);
        assert_eq!(&buf[..written], &[0, 1]);
        assert_eq!(cr_solution_open_count(sol), 2);

        let name = CString::new("tiny_a").unwrap();
        let mut csv = ptr::null_mut();
        assert_eq!(cr_solution_metrics_csv(sol, name.as_ptr(), &mut csv), CrStatus::Ok);
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        cr_string_free(csv);
        assert!(text.starts_with("instance,problem,eps,l,"));
        assert!(text.contains("\ntiny_a,ckm,1.0,5,"));

        let mut json = ptr::null_mut();
        assert_eq!(cr_solution_manifest_json(sol, &mut json), CrStatus::Ok);
        assert!(CStr::from_ptr(json).to_str().unwrap().contains("\"problem\": \"ckm\""));
        cr_string_free(json);

        cr_solution_free(sol);
        cr_instance_free(inst);
    }
}

#[test]
fn parse_error_is_reported() {
    let (st, inst) = parse("CAPKM v2\n");
    assert_eq!(st, CrStatus::Parse);
    assert!(inst.is_null());
    assert!(last_error().contains("line 1"));
}

#[test]
fn null_arguments() {
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { cr_instance_parse(ptr::null(), &mut inst) }, CrStatus::NullArgument);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { cr_solve(ptr::null(), 0, 1.0, 0, 0, &mut sol) }, CrStatus::NullArgument);
    assert!(unsafe { cr_solution_cost(ptr::null()) }.is_nan());
    assert_eq!(unsafe { cr_instance_n_clients(ptr::null()) }, 0);
    unsafe {
        cr_instance_free(ptr::null_mut());
        cr_solution_free(ptr::null_mut());
        cr_string_free(ptr::null_mut());
    }
}

#[test]
fn domain_errors() {
    let (_, inst) = parse(TINY_A);
    let mut sol = ptr::null_mut();
    unsafe {
        assert_eq!(cr_solve(inst, 7, 1.0, 0, 0, &mut sol), CrStatus::Domain);
        assert_eq!(cr_solve(inst, CrProblem::Cflp as i32, 0.6, 0, 0, &mut sol), CrStatus::Domain);
        assert!(last_error().contains("eps"));
        assert_eq!(cr_solve(inst, CrProblem::Ckflp as i32, 1.0, 1, 0, &mut sol), CrStatus::Infeasible);
        assert!(sol.is_null());
        cr_instance_free(inst);
    }
}

#[test]
fn generated_instances_are_deterministic() {
    let mut a = ptr::null_mut();
    let mut b = ptr::null_mut();
    unsafe {
        assert_eq!(cr_instance_generate(CrProblem::Cflp as i32, 5, 9, 3, 11, &mut a), CrStatus::Ok);
        assert_eq!(cr_instance_generate(CrProblem::Cflp as i32, 5, 9, 3, 11, &mut b), CrStatus::Ok);
        let mut sa = ptr::null_mut();
        let mut sb = ptr::null_mut();
        assert_eq!(cr_solve(a, CrProblem::Cflp as i32, 0.25, 0, 0, &mut sa), CrStatus::Ok);
        assert_eq!(cr_solve(b, CrProblem::Cflp as i32, 0.25, 0, 0, &mut sb), CrStatus::Ok);
        assert_eq!(cr_solution_cost(sa).to_bits(), cr_solution_cost(sb).to_bits());
        cr_solution_free(sa);
        cr_solution_free(sb);
        cr_instance_free(a);
        cr_instance_free(b);
    }
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(cr_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("capround.h")
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(header_path()).unwrap();
    for name in [
        "cr_last_error",
        "cr_version",
        "cr_instance_load",
        "cr_instance_parse",
        "cr_instance_generate",
        "cr_instance_n_facilities",
        "cr_instance_n_clients",
        "cr_instance_free",
        "cr_solve",
        "cr_solution_cost",
        "cr_solution_lp_opt",
        "cr_solution_max_load_over_u",
        "cr_solution_open_count",
        "cr_solution_open",
        "cr_solution_ok",
        "cr_solution_metrics_csv",
        "cr_solution_manifest_json",
        "cr_solution_free",
        "cr_string_free",
        "typedef struct CrInstance CrInstance",
        "CR_STATUS_FALSIFIED = 7",
        "CR_PROBLEM_CKFLP = 2",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compiles and runs a C program against the header and the static library when a C
/// compiler and the archive are available.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let Some(profile_dir) = exe.parent().and_then(|d| d.parent()) else {
        return;
    };
    let archive = profile_dir.join("libcapround_ffi.a");
    if !archive.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        format!(
            r#"#include <stdio.h>
#include "capround.h"
int main(void) {{
    CrInstance *inst = NULL;
    CrSolution *sol = NULL;
    if (cr_instance_parse("{}", &inst) != CR_STATUS_OK) return 3;
    if (cr_solve(inst, CR_PROBLEM_CKM, 1.0, 0, 0, &sol) != CR_STATUS_OK) return 4;
    printf("%.1f %zu %d\n", cr_solution_cost(sol), cr_solution_open_count(sol), cr_solution_ok(sol));
    cr_solution_free(sol);
    cr_instance_free(inst);
    return 0;
}}
"#,
            TINY_A.replace('\n', "\\n")
        ),
    )
    .unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header_path().parent().unwrap())
        .arg(&archive)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1.0 2 1\n");
}
