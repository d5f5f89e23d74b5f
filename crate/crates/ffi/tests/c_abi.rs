use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use specpath_ffi::*;
use tempfile::TempDir;

fn problem(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut s: u64 = 7;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
    };
    let x: Vec<f64> = (0..n * 3).map(|_| next()).collect();
    let y = (0..n).map(|i| (2.0 * x[3 * i]).cos() + x[3 * i + 1] * x[3 * i + 2]).collect();
    (x, y)
}

fn last_error() -> String {
    let p = sp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn fitted(n: usize) -> (*mut SpModel, Vec<f64>, Vec<f64>) {
    let (x, y) = problem(n);
    let nt = n * 3 / 4;
    let mut cfg = sp_fit_config_default();
    cfg.max_paths = 40;
    let mut m = ptr::null_mut();
    let st = unsafe { sp_fit(x.as_ptr(), y.as_ptr(), nt, x[nt * 3..].as_ptr(), y[nt..].as_ptr(), n - nt, 3, &cfg, &mut m) };
    assert_eq!(st, SpStatus::SpOk);
    assert!(!m.is_null());
    (m, x, y)
}

#[test]
fn defaults_match_the_library() {
    let c = sp_fit_config_default();
    let d = specpath::FitConfig::default();
    assert_eq!((c.max_paths, c.block_size, c.patience), (d.max_paths, d.block_size, d.patience));
    assert_eq!((c.block_size_min, c.block_size_max), d.block_size_bounds);
    assert_eq!((c.min_improvement, c.final_resweep, c.seed), (d.min_improvement, d.final_resweep, d.seed));
    assert!(c.sparsity_set.is_null() && c.lambda_grid.is_null());
    let v = unsafe { CStr::from_ptr(sp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn fit_predict_matches_the_rust_api() {
    let (m, x, y) = fitted(240);
    let n = y.len();
    let mut pred = vec![0.0; n];
    assert_eq!(unsafe { sp_model_predict(m, x.as_ptr(), n, 3, pred.as_mut_ptr()) }, SpStatus::SpOk);

    let nt = n * 3 / 4;
    let xm = specpath::Matrix::from_vec(n, 3, x.clone()).unwrap();
    let (xt, xv) = (
        xm.select_rows(&(0..nt).collect::<Vec<_>>()),
        xm.select_rows(&(nt..n).collect::<Vec<_>>()),
    );
    let cfg = specpath::FitConfig { max_paths: 40, ..Default::default() };
    let direct = specpath::fit(&xt, &y[..nt], &xv, &y[nt..], &cfg).unwrap();
    assert_eq!(pred, direct.predict_raw(&xm).unwrap());
    assert_eq!(unsafe { sp_model_num_paths(m) }, direct.num_paths());
    assert_eq!(unsafe { sp_model_lambda(m) }, direct.lambda_star);
    unsafe { sp_model_free(m) };
}

#[test]
fn sensitivity_and_importance_shapes() {
    let (m, x, y) = fitted(160);
    let n = y.len();
    let mut grad = vec![f64::NAN; n * 3];
    assert_eq!(unsafe { sp_model_sensitivity(m, x.as_ptr(), n, 3, grad.as_mut_ptr()) }, SpStatus::SpOk);
    assert!(grad.iter().all(|g| g.is_finite()));
    let mut imp = [0.0; 3];
    let mut degenerate = true;
    assert_eq!(
        unsafe { sp_model_importance(m, x.as_ptr(), n, 3, imp.as_mut_ptr(), &mut degenerate) },
        SpStatus::SpOk
    );
    assert!(!degenerate);
    assert!((imp.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    unsafe { sp_model_free(m) };
}

#[test]
fn expression_reports_required_size() {
    let (m, _, _) = fitted(160);
    let mut need = 0usize;
    let st = unsafe { sp_model_expression(m, 5, ptr::null_mut(), 0, &mut need) };
    assert_eq!(st, SpStatus::SpErrBuffer);
    assert!(last_error().contains("bytes"));
    let mut buf = vec![0 as std::ffi::c_char; need];
    assert_eq!(unsafe { sp_model_expression(m, 5, buf.as_mut_ptr(), need, ptr::null_mut()) }, SpStatus::SpOk);
    let text = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(text.len() + 1, need);
    assert!(text.contains("·cos("));
    assert!(sp_last_error().is_null());
    unsafe { sp_model_free(m) };
}

#[test]
fn save_and_load_round_trip() {
    let (m, x, y) = fitted(160);
    let dir = TempDir::new().unwrap();
    let path = CString::new(dir.path().join("m.json").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { sp_model_save(m, path.as_ptr()) }, SpStatus::SpOk);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { sp_model_load(path.as_ptr(), &mut back) }, SpStatus::SpOk);
    let n = y.len();
    let (mut a, mut b) = (vec![0.0; n], vec![0.0; n]);
    unsafe {
        sp_model_predict(m, x.as_ptr(), n, 3, a.as_mut_ptr());
        sp_model_predict(back, x.as_ptr(), n, 3, b.as_mut_ptr());
        sp_model_free(m);
        sp_model_free(back);
    }
    assert_eq!(a, b);
}

#[test]
fn fit_csv_reports_scores() {
    let dir = TempDir::new().unwrap();
    let (x, y) = problem(200);
    let mut text = String::from("a,b,c,target\n");
    for i in 0..200 {
        text += &format!("{},{},{},{}\n", x[3 * i], x[3 * i + 1], x[3 * i + 2], y[i]);
    }
    let file = dir.path().join("d.csv");
    std::fs::write(&file, text).unwrap();
    let path = CString::new(file.to_str().unwrap()).unwrap();
    let target = CString::new("target").unwrap();
    let mut m = ptr::null_mut();
    let mut scores = SpFitScores::default();
    let st = unsafe { sp_fit_csv(path.as_ptr(), target.as_ptr(), ptr::null(), &mut m, &mut scores) };
    assert_eq!(st, SpStatus::SpOk, "{}", last_error());
    assert!(scores.test_r2 > 0.9 && scores.train_r2 >= scores.test_r2 - 0.1, "{scores:?}");
    assert_eq!(unsafe { sp_model_dim(m) }, 3);

    let missing = CString::new("nope").unwrap();
    let mut other = ptr::null_mut();
    let st = unsafe { sp_fit_csv(path.as_ptr(), missing.as_ptr(), ptr::null(), &mut other, ptr::null_mut()) };
    assert_eq!(st, SpStatus::SpErrData);
    assert!(other.is_null());
    assert!(last_error().contains("nope"));
    unsafe { sp_model_free(m) };
}

#[test]
fn errors_map_to_status_codes() {
    let (m, x, _) = fitted(80);
    let mut out = [0.0; 4];
    unsafe {
        assert_eq!(sp_model_predict(ptr::null(), x.as_ptr(), 1, 3, out.as_mut_ptr()), SpStatus::SpErrArgument);
        assert_eq!(sp_model_predict(m, ptr::null(), 1, 3, out.as_mut_ptr()), SpStatus::SpErrArgument);
        assert_eq!(sp_model_predict(m, x.as_ptr(), 1, 3, ptr::null_mut()), SpStatus::SpErrArgument);
        assert_eq!(sp_model_predict(m, x.as_ptr(), 1, 4, out.as_mut_ptr()), SpStatus::SpErrConfig);
        assert!(last_error().contains('4'));

        let mut cfg = sp_fit_config_default();
        cfg.block_size = 0;
        let mut fresh = ptr::null_mut();
        let st = sp_fit(x.as_ptr(), x.as_ptr(), 10, x.as_ptr(), x.as_ptr(), 10, 3, &cfg, &mut fresh);
        assert_eq!(st, SpStatus::SpErrConfig);
        assert!(fresh.is_null());

        let bad = CString::new("/nonexistent/m.json").unwrap();
        assert_eq!(sp_model_load(bad.as_ptr(), &mut fresh), SpStatus::SpErrIo);
        let dir = TempDir::new().unwrap();
        let corrupt = dir.path().join("c.json");
        std::fs::write(&corrupt, "{\"format_version\": 99}").unwrap();
        let corrupt = CString::new(corrupt.to_str().unwrap()).unwrap();
        assert_eq!(sp_model_load(corrupt.as_ptr(), &mut fresh), SpStatus::SpErrSchema);
        assert!(last_error().contains("99"));

        assert_eq!(sp_model_dim(ptr::null()), 0);
        assert!(sp_model_lambda(ptr::null()).is_nan());
        sp_model_free(ptr::null_mut());
        sp_model_free(m);
    }
}

fn target_dir() -> PathBuf {
    // tests run from <target>/<profile>/deps
    std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libspecpath_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = TempDir::new().unwrap();
    let exe = dir.path().join("smoke");
    let build = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).arg(dir.path().join("m.json")).output().unwrap();
    assert!(
        run.status.success(),
        "{}{}",
        String::from_utf8_lossy(&run.stdout),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
