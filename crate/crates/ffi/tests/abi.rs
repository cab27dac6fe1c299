use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;
use znd_ffi::*;

fn reference() -> *mut ZndProfile {
    let mut p = ptr::null_mut();
    assert_eq!(znd_profile_reference(&mut p), ZndStatus::Ok);
    assert!(!p.is_null());
    p
}

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let n = unsafe { znd_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n < buf.len());
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap().to_string()
}

#[test]
fn profile_info_matches_reference_values() {
    let p = reference();
    let mut info = ZndProfileInfo::default();
    assert_eq!(unsafe { znd_profile_info(p, &mut info) }, ZndStatus::Ok);
    assert!((info.d_cj - 1.66068).abs() < 1e-5);
    assert!((info.zeta0_abs - 0.94187).abs() < 1e-5);
    assert!((info.zeta_inf_abs - 0.81824).abs() < 1e-5);
    assert_eq!(info.type_d, 1);
    unsafe { znd_profile_free(p) };
}

#[test]
fn evans_agrees_with_the_library() {
    let p = reference();
    let mut r = ZndEvansResult::default();
    assert_eq!(unsafe { znd_evans(p, 0.3, -0.7, 0.05, &mut r) }, ZndStatus::Ok);
    let rep = znd_core::profile::reference_profile();
    let direct = znd_core::evans::evans(rep, znd_core::c64(0.3, -0.7), 0.05, &Default::default()).unwrap();
    assert!((znd_core::c64(r.v_re, r.v_im) - direct.v).norm() < 1e-10 * direct.v.norm());
    assert_eq!(r.theta1_residual, direct.theta1_residual);
    let norm: f64 = r.theta0.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!((norm - 1.0).abs() < 1e-12);
    unsafe { znd_profile_free(p) };
}

#[test]
fn errors_map_to_status_codes() {
    let p = reference();
    let mut r = ZndEvansResult::default();
    assert_eq!(unsafe { znd_evans(p, -0.5, 0.0, 0.05, &mut r) }, ZndStatus::Domain);
    assert!(last_error().contains("Re ζ"));
    assert_eq!(unsafe { znd_evans(p, 0.5, 0.0, 0.0, &mut r) }, ZndStatus::Domain);
    assert_eq!(unsafe { znd_evans(ptr::null(), 0.5, 0.0, 0.05, &mut r) }, ZndStatus::NullPointer);
    assert_eq!(unsafe { znd_evans(p, 0.5, 0.0, 0.05, ptr::null_mut()) }, ZndStatus::NullPointer);
    let mut q = ptr::null_mut();
    assert_eq!(znd_profile_new(0.9, 1.0, 2.5, 5.0, 1.0, 1.0, 1.2, &mut q), ZndStatus::Config);
    assert!(q.is_null());
    let bad = CString::new("{\"gas\": 3}").unwrap();
    assert_eq!(unsafe { znd_profile_from_json(bad.as_ptr(), &mut q) }, ZndStatus::Config);
    assert_eq!(unsafe { znd_profile_from_json(ptr::null(), &mut q) }, ZndStatus::NullPointer);
    // Too small a buffer: nothing written, length still reported.
    let mut tiny = [7 as std::ffi::c_char; 2];
    let n = unsafe { znd_last_error(tiny.as_mut_ptr(), tiny.len()) };
    assert!(n > 2 && tiny == [7, 7]);
    unsafe { znd_profile_free(p) };
    unsafe { znd_profile_free(ptr::null_mut()) };
}

#[test]
fn turning_points() {
    let p = reference();
    let mut info = ZndProfileInfo::default();
    unsafe { znd_profile_info(p, &mut info) };
    let mut t = ZndTurningPoint::default();
    assert_eq!(unsafe { znd_turning_point(p, 0.0, info.zeta0_abs, &mut t) }, ZndStatus::Ok);
    assert_eq!((t.x, t.at_infinity), (0.0, 0));
    assert_eq!(unsafe { znd_turning_point(p, 0.0, info.zeta_inf_abs, &mut t) }, ZndStatus::Ok);
    assert_eq!(t.at_infinity, 1);
    assert_eq!(unsafe { znd_turning_point(p, 0.0, 0.88, &mut t) }, ZndStatus::Ok);
    assert!(t.x > 0.0 && t.x.is_finite());
    assert_eq!(unsafe { znd_turning_point(p, 0.1, 0.88, &mut t) }, ZndStatus::Domain);
    unsafe { znd_profile_free(p) };
}

#[test]
fn json_profile_and_version() {
    let cfg = CString::new(r#"{"shock": {"v_minus": 1.0, "p_minus": 1.0, "speed": {"overdrive": 1.5}}}"#).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { znd_profile_from_json(cfg.as_ptr(), &mut p) }, ZndStatus::Ok);
    let mut info = ZndProfileInfo::default();
    unsafe { znd_profile_info(p, &mut info) };
    assert!((info.det_speed / info.d_cj - 1.5f64.sqrt()).abs() < 1e-12);
    unsafe { znd_profile_free(p) };
    let v = unsafe { CStr::from_ptr(znd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compile and run a C program against the generated header and the
/// static library. Skipped when no C compiler is on PATH.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libznd_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let dir = tempfile_dir();
    let exe = dir.join("smoke");
    let out = Command::new(&cc)
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stdout));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("1.66067"), "{text}");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().map(|o| o.status.success()).unwrap_or(false) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}

fn tempfile_dir() -> PathBuf {
    let d = std::env::temp_dir().join(format!("znd-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}
