use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn kquad(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kquad"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn convergence_writes_deterministic_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "s = 1\nt = 1\nn_grid = [8, 16, 32]\nreplicates = 4\n");
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let o = kquad(&["convergence", "--config", &config, "--seed", "9", "--out", out.to_str().unwrap(), "--svg"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(out.join("convergence_s1_t1.svg").exists());
        outputs.push(fs::read(out.join("convergence_s1_t1.csv")).unwrap());
        assert_eq!(header(&out.join("convergence_s1_t1_fit.csv")), "series,u,log_c,residual,fit_min_n");
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "n,mean_sq_error,std_sq_error,mean_error,mean_sq_test_error,lambda"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[1..5].iter().all(|v| *v >= 0.0)));
}

#[test]
fn seed_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "n_grid = [8, 16, 32]\nreplicates = 2\n");
    let mut outputs = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(seed);
        let o = kquad(&["convergence", "--config", &config, "--seed", seed, "--out", out.to_str().unwrap()]);
        assert!(o.status.success());
        outputs.push(fs::read(out.join("convergence_s1_t1.csv")).unwrap());
    }
    assert_ne!(outputs[0], outputs[1]);
}

#[test]
fn compare_density_spectrum_randfeat_run() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = kquad(&["compare", "--replicates", "2", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(header(&dir.path().join("compare_s1.csv")).starts_with("n,mean_sq_error,std_sq_error,kernel_sq_error"));

    let config = write_config(dir.path(), "grid_points = 60\nmc_points = 400\nk_max = 5\nlambdas = [1.0, 0.01]\n");
    let o = kquad(&["density", "--config", &config, "--out", out, "--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(header(&dir.path().join("density_spatial.csv")), "x,lambda_1e0,lambda_1e-2");
    assert_eq!(
        fs::read_to_string(dir.path().join("density_fourier.csv")).unwrap().lines().count(),
        1 + 11
    );
    assert!(dir.path().join("density_fourier_counting.svg").exists());

    let o = kquad(&["spectrum", "--out", out]);
    assert!(o.status.success());
    assert_eq!(
        header(&dir.path().join("spectrum.csv")),
        "family,lambda,m_star,dof,gamma,certified_gamma"
    );

    let config = write_config(dir.path(), "lambda = 0.1\nterms = 61\ntest_functions = 2\n");
    let o = kquad(&["randfeat", "--config", &config, "--replicates", "3", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("76010"), "{stdout}");
    assert_eq!(fs::read_to_string(dir.path().join("randfeat.csv")).unwrap().lines().count(), 4);
}

#[test]
fn config_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    for text in ["n_grid = [16, 8]", "replicates = 0", "unknown_key = 3", "measure = \"cauchy\"", "experiment = \"density\""] {
        let config = write_config(dir.path(), text);
        let o = kquad(&["convergence", "--config", &config, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{text}");
    }
    let o = kquad(&["convergence", "--config", "/nonexistent/kquad.toml"]);
    assert_eq!(o.status.code(), Some(2));
    let o = kquad(&["convergence", "--replicates", "0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compare_rejects_non_uniform_measure() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "measure = \"beta\"\n");
    let o = kquad(&["compare", "--config", &config, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
