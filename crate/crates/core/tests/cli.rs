use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn gkcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gkcs"))
        .args(args)
        .output()
        .expect("spawn gkcs")
}

fn scenario(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_config(command: &str, config: &Path) -> (i32, String, String) {
    let out = gkcs(&[command, "--config", config.to_str().unwrap()]);
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Parses a CSV block (header line first) into rows of cells.
fn rows(block: &str) -> Vec<Vec<String>> {
    block
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn section<'a>(report: &'a str, name: &str) -> &'a str {
    let start = report.find(&format!("# {name}\n")).unwrap() + name.len() + 3;
    let rest = &report[start..];
    &rest[..rest.find("\n# ").map_or(rest.len(), |i| i + 1)]
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn vacuum_state_is_a_single_row() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "s.toml", "spectrum = \"harmonic\"\nz_re = 0.0\n");
    let (code, out, _) = run_config("state", &cfg);
    assert_eq!(code, 0);
    assert_eq!(out, "n,re,im\n0,1.00000000000000e0,0.00000000000000e0\n");
}

#[test]
fn harmonic_state_matches_poisson_amplitude() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "s.toml", "spectrum = \"harmonic\"\nz_re = 1.0\n");
    let (code, out, _) = run_config("state", &cfg);
    assert_eq!(code, 0);
    let r = rows(&out);
    let oracle = (-0.5f64).exp() / 6f64.sqrt();
    assert_eq!(r[3][0], "3");
    assert!((f(&r[3][1]) - oracle).abs() < 1e-12);
    assert!((f(&r[3][1]) - 0.247602).abs() < 1e-4);
    assert_eq!(f(&r[3][2]), 0.0);
}

#[test]
fn squared_gkcs_phase() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "s.toml",
        "spectrum = \"squared\"\nz_re = 1.0\nstate = \"gkcs\"\nalpha = 0.3\n",
    );
    let (code, out, _) = run_config("state", &cfg);
    assert_eq!(code, 0);
    let r = &rows(&out)[2];
    assert!((f(&r[2]).atan2(f(&r[1])) + 1.2).abs() < 1e-12);
}

#[test]
fn output_goes_to_file_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "p.toml",
        "spectrum = \"squared\"\nz_re = 0.8\ndelta = 10.0\ntau = 3.0\nepsilons = [0.5, 0.25]\noutput = \"report.txt\"\ninclude_field = true\n",
    );
    let (code, out, _) = run_config("protocol", &cfg);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let first = std::fs::read(dir.path().join("report.txt")).unwrap();
    let explicit = dir.path().join("again.txt");
    let out = gkcs(&[
        "protocol",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        explicit.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(first, std::fs::read(explicit).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("# final_field\nn,re,im\n"));
}

#[test]
fn balanced_three_atom_report() {
    let dir = TempDir::new().unwrap();
    // λ = g²/Δ = 0.1, τ = 3 ⇒ λτ = 0.3
    let cfg = scenario(
        &dir,
        "p.toml",
        "spectrum = \"squared\"\nz_re = 0.8\ng1 = 1.0\ng2 = 1.0\ndelta = 10.0\ntau = 3.0\nepsilons = [1.0, 1.0, 1.0]\n",
    );
    let (code, out, _) = run_config("protocol", &cfg);
    assert_eq!(code, 0, "{out}");
    let atoms = rows(section(&out, "atoms"));
    assert_eq!(atoms.len(), 3);
    for (m, row) in atoms.iter().enumerate() {
        assert_eq!(row[0], (m + 1).to_string());
        assert!((f(&row[3]) - 0.5).abs() < 1e-12);
        assert!((f(&row[4]) + 2.0 * (m + 1) as f64 * 0.3).abs() < 1e-12);
        assert!(f(&row[5]) >= 1.0 - 1e-10);
    }
    let decomposition = rows(section(&out, "decomposition"));
    assert_eq!(decomposition[0][0], "gkcs_alpha_3");
    let top = f(&decomposition[0][1]).hypot(f(&decomposition[0][2]));
    assert!((top - 1.0).abs() < 1e-10);
    for row in &decomposition[1..] {
        assert!(f(&row[1]).hypot(f(&row[2])) < 1e-10);
    }
}

#[test]
fn no_atoms_leaves_initial_field() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "p.toml",
        "spectrum = \"harmonic\"\nz_re = 0.6\ndelta = 10.0\ntau = 1.0\ninclude_field = true\n",
    );
    let (code, out, _) = run_config("protocol", &cfg);
    assert_eq!(code, 0);
    assert!(rows(section(&out, "atoms")).is_empty());
    let decomposition = rows(section(&out, "decomposition"));
    assert_eq!(decomposition.len(), 1);
    assert_eq!(decomposition[0][0], "nonlinear_cs");
    assert!((f(&decomposition[0][1]) - 1.0).abs() < 1e-12);

    let state_cfg = scenario(&dir, "s.toml", "spectrum = \"harmonic\"\nz_re = 0.6\n");
    let (_, state, _) = run_config("state", &state_cfg);
    assert_eq!(section(&out, "final_field"), state);
}

#[test]
fn single_atom_coefficient_ratio() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "p.toml",
        "spectrum = \"squared\"\nz_re = 0.9\ndelta = 10.0\ntau = 3.0\nepsilons = [0.5]\n",
    );
    let (code, out, _) = run_config("protocol", &cfg);
    assert_eq!(code, 0);
    let d = rows(section(&out, "decomposition"));
    let gk = (f(&d[0][1]), f(&d[0][2]));
    let nl = (f(&d[1][1]), f(&d[1][2]));
    let ratio = gk.0.hypot(gk.1) / nl.0.hypot(nl.1);
    assert!((ratio - 3.0).abs() < 1e-8, "ratio {ratio}");
    assert!(f(section(&out, "residual").trim()) < 1e-10);
}

#[test]
fn improbable_detection_names_the_atom() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "p.toml",
        "z_re = 0.0\ndelta = 10.0\ntau = 1.0\nepsilons = [1.0, 1e4]\n",
    );
    let (code, _, err) = run_config("protocol", &cfg);
    assert_eq!(code, 4);
    assert!(err.contains("atom 2"), "{err}");
}

#[test]
fn protocol_rejects_unequal_couplings() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "p.toml",
        "g1 = 1.0\ng2 = 2.0\ndelta = 10.0\ntau = 1.0\nepsilons = [1.0]\n",
    );
    assert_eq!(run_config("protocol", &cfg).0, 2);
}

#[test]
fn equivalence_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "e.toml",
        "spectrum = \"harmonic\"\nz_re = 1.0\ng1 = 1.0\ng2 = 1.0\ndeltas = [10.0, 100.0, 1000.0]\ntimes = [0.0, 1.0]\ntime_unit = \"inverse_lambda\"\n",
    );
    let (code, out, _) = run_config("equivalence", &cfg);
    assert_eq!(code, 0);
    assert!(out.starts_with("delta,t,infidelity,max_i_population,validity_flag\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 6);
    for row in r.iter().step_by(2) {
        assert_eq!(f(&row[1]), 0.0);
        assert_eq!(f(&row[2]), 0.0);
    }
    let at_one: Vec<f64> = r.iter().skip(1).step_by(2).map(|row| f(&row[2])).collect();
    assert!(at_one[0] > at_one[1] && at_one[1] > at_one[2]);
    // Δ = 10: 4 n̄ f² = 4 < 0.1 Δ²/G = 5, and e² G² t / Δ³ = 0.04 < 0.1π
    let flags: Vec<&str> = r.iter().map(|row| row[4].as_str()).collect();
    assert_eq!(flags, ["0"; 6]);
}

#[test]
fn equivalence_flags_small_detuning() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(
        &dir,
        "e.toml",
        "z_re = 1.5\ndeltas = [2.0, 200.0]\ntimes = [0.5]\n",
    );
    let (code, out, _) = run_config("equivalence", &cfg);
    assert_eq!(code, 0);
    let flags: Vec<String> = rows(&out).into_iter().map(|r| r[4].clone()).collect();
    assert_eq!(flags, ["1", "0"]);
}

#[test]
fn equivalence_requires_grid() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(&dir, "e.toml", "z_re = 1.0\n");
    assert_eq!(run_config("equivalence", &cfg).0, 2);
}

#[test]
fn verify_verbose_lists_residuals() {
    let out = gkcs(&["verify", "--verbose"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for suite in [
        "eigenstate",
        "temporal_stability",
        "action_identity",
        "unitarity",
        "oracle_equivalence",
        "protocol",
    ] {
        assert!(
            text.lines()
                .any(|l| l.starts_with(suite) && l.ends_with("PASS")),
            "{text}"
        );
    }
    assert!(text.contains("harmonic z=0.3"));
    assert!(text.contains(" <= "));
}

#[test]
fn verify_reports_nonphysical_table() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("e.txt"), "0.1\n1\n2\n").unwrap();
    let cfg = scenario(&dir, "v.toml", "spectrum_table = \"e.txt\"\n");
    let (code, out, _) = run_config("verify", &cfg);
    assert_eq!(code, 1);
    assert!(out.contains("non-physical spectrum"), "{out}");
}

#[test]
fn verify_accepts_a_valid_table() {
    let dir = TempDir::new().unwrap();
    let table: String = (0..200).map(|n| format!("{}\n", n * (n + 3))).collect();
    std::fs::write(dir.path().join("e.txt"), table).unwrap();
    let cfg = scenario(&dir, "v.toml", "spectrum_table = \"e.txt\"\n");
    let (code, out, _) = run_config("verify", &cfg);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn config_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("unknown.toml", "zz = 1\n"),
        ("syntax.toml", "z_re = \n"),
        ("spectrum.toml", "spectrum = \"cubic\"\n"),
        ("missing_table.toml", "spectrum_table = \"nope.txt\"\n"),
    ] {
        let cfg = scenario(&dir, name, text);
        assert_eq!(run_config("state", &cfg).0, 2, "{name}");
    }
    assert_eq!(gkcs(&["state"]).status.code(), Some(2));
    assert_eq!(gkcs(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn divergent_series_exit_3() {
    let dir = TempDir::new().unwrap();
    let table: String = (0..40)
        .map(|n| format!("{}\n", 1.0 - 1.0 / ((n + 1) as f64).powi(2)))
        .collect();
    std::fs::write(dir.path().join("bounded.txt"), table).unwrap();
    let cfg = scenario(
        &dir,
        "s.toml",
        "spectrum_table = \"bounded.txt\"\nz_re = 2.0\n",
    );
    let (code, _, err) = run_config("state", &cfg);
    assert_eq!(code, 3);
    assert!(err.contains("diverges"), "{err}");
}
