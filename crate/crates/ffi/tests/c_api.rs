use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use vnsgm_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = vns_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn parse(text: &str) -> *mut VnsGraph {
    let mut g = ptr::null_mut();
    assert_eq!(vns_graph_parse(c(text).as_ptr(), &mut g), VnsStatus::Ok);
    g
}

// path graph a-b-c-d with seed a; b is the vertex of interest
const PATH: &str = "a b\nb c\nc d\n";

#[test]
fn graph_handles() {
    unsafe {
        let g = parse("x y\ny z\nx x\n");
        assert_eq!(vns_graph_vertex_count(g), 3);
        assert_eq!(vns_graph_edge_count(g), 2);
        vns_graph_free(g);
        assert_eq!(vns_graph_vertex_count(ptr::null()), 0);
        vns_graph_free(ptr::null_mut());
    }
}

#[test]
fn parse_errors_set_message() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(vns_graph_parse(c("a b c\n").as_ptr(), &mut g), VnsStatus::Parse);
        assert!(g.is_null());
        assert!(last_error().contains("line 1"));
        assert_eq!(vns_graph_parse(ptr::null(), &mut g), VnsStatus::NullPointer);
        assert_eq!(vns_graph_load(c("/nonexistent/file").as_ptr(), &mut g), VnsStatus::Io);
    }
}

#[test]
fn seeds_reject_duplicates() {
    unsafe {
        let s = vns_seeds_new();
        assert_eq!(vns_seeds_add(s, c("a").as_ptr(), c("a").as_ptr()), VnsStatus::Ok);
        assert_eq!(vns_seeds_add(s, c("a").as_ptr(), c("b").as_ptr()), VnsStatus::InvalidArgument);
        assert_eq!(vns_seeds_len(s), 1);
        vns_seeds_free(s);
    }
}

#[test]
fn nominate_round_trip() {
    unsafe {
        let g = parse(PATH);
        let g2 = parse(PATH);
        let s = vns_seeds_new();
        vns_seeds_add(s, c("a").as_ptr(), c("a").as_ptr());
        let mut cfg = vns_config_default();
        cfg.restarts = 10;
        cfg.ell = VNS_HOPS_INFINITE;
        let mut n = ptr::null_mut();
        assert_eq!(vns_nominate(g, g2, s, c("b").as_ptr(), &cfg, &mut n), VnsStatus::Ok);
        assert_eq!(vns_nomination_len(n), 3);

        let mut label = ptr::null();
        let mut score = 0.0;
        assert_eq!(vns_nomination_get(n, 0, &mut label, &mut score), VnsStatus::Ok);
        assert_eq!(CStr::from_ptr(label).to_str().unwrap(), "b");
        assert_eq!(score, 1.0);
        assert_eq!(vns_nomination_get(n, 3, &mut label, &mut score), VnsStatus::InvalidArgument);

        let mut tau = f64::NAN;
        assert_eq!(vns_nomination_tau(n, c("b").as_ptr(), &mut tau), VnsStatus::Ok);
        assert_eq!(tau, 0.0);
        assert_eq!(vns_nomination_tau(n, c("zz").as_ptr(), &mut tau), VnsStatus::NotFound);

        let mut json = ptr::null_mut();
        assert_eq!(vns_nomination_json(n, &mut json), VnsStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_owned();
        vns_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["status"], "nominated");
        assert_eq!(v["candidates"][0]["label"], "b");

        vns_nomination_free(n);
        vns_seeds_free(s);
        vns_graph_free(g);
        vns_graph_free(g2);
    }
}

#[test]
fn nominate_stop_and_errors() {
    unsafe {
        let g = parse("a b\nc d\n");
        let s = vns_seeds_new();
        vns_seeds_add(s, c("a").as_ptr(), c("a").as_ptr());
        let cfg = vns_config_default();
        let mut n = ptr::null_mut();
        assert_eq!(vns_nominate(g, g, s, c("c").as_ptr(), &cfg, &mut n), VnsStatus::NoLocalSeeds);
        assert!(!n.is_null());
        assert_eq!(vns_nomination_len(n), 0);
        vns_nomination_free(n);

        n = ptr::null_mut();
        assert_eq!(vns_nominate(g, g, s, c("nope").as_ptr(), &cfg, &mut n), VnsStatus::UnknownLabel);
        assert!(n.is_null());
        assert!(last_error().contains("nope"));

        let mut bad = cfg;
        bad.h = 0;
        assert_eq!(vns_nominate(g, g, s, c("b").as_ptr(), &bad, &mut n), VnsStatus::InvalidArgument);
        assert_eq!(vns_nominate(ptr::null(), g, s, c("b").as_ptr(), &cfg, &mut n), VnsStatus::NullPointer);
        vns_seeds_free(s);
        vns_graph_free(g);
    }
}

#[test]
fn max_assignment_matches_core() {
    let m = [1.0, 5.0, 0.0, 4.0, 1.0, 2.0, 3.0, 3.0, 9.0];
    let mut perm = [0usize; 3];
    let mut obj = 0.0;
    unsafe {
        assert_eq!(vns_max_assignment(m.as_ptr(), 3, perm.as_mut_ptr(), &mut obj), VnsStatus::Ok);
    }
    assert_eq!(perm, [1, 0, 2]);
    assert_eq!(obj, 18.0);
    let nan = [f64::NAN];
    unsafe {
        assert_eq!(vns_max_assignment(nan.as_ptr(), 1, perm.as_mut_ptr(), &mut obj), VnsStatus::InvalidArgument);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(vns_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/vnsgm.h");
    let text = std::fs::read_to_string(header).unwrap();
    for f in ["vns_nominate", "vns_max_assignment", "vns_string_free", "vns_last_error"] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\nint main(void) {{ VnsConfig c = vns_config_default(); (void)c; \
             VnsGraph *g = 0; return vns_graph_parse(\"a b\", &g) == VNS_STATUS_OK ? 0 : 1; }}\n"
        ),
    )
    .unwrap();
    let Ok(out) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
