use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("coupler-lab").join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn run(dir: &PathBuf, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_coupler-lab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir)
        .env_remove("COUPLER_LAB_THREADS")
        .output()
        .unwrap()
}

/// Data rows of a CSV written by the tool, without comment and header lines.
fn rows(path: PathBuf) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let body = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, body)
}

const TWO_QUBITS: &str = r#"
schema = 1
[coupler]
beta_c = 0.75
zeta_c = 0.05
e_ratio = 3.0
phi_cx = 0.03
[[qubit]]
beta_j = 1.05
zeta_j = 0.05
alpha_j = 0.05
[[qubit]]
beta_j = 1.05
zeta_j = 0.05
alpha_j = 0.05
[units]
e_l_ghz = 200.0
"#;

#[test]
fn truncation_prints_cutoff() {
    let d = workdir("truncation");
    let cfg = "schema = 1\n[coupler]\nbeta_c = 0.75\nzeta_c = 0.25\n[truncation]\nepsilon = 1e-3\n";
    let out = run(&d, cfg, &["truncation"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "18");
    let (h, r) = rows(d.join("truncation.csv"));
    assert_eq!(h[3], "nu_max");
    assert_eq!(r[0][3], "18");
}

#[test]
fn series_at_zero_beta_is_plain_sine() {
    let d = workdir("series");
    let cfg = "schema = 1\n[coupler]\nbeta_c = 0.0\nzeta_c = 0.05\n[series]\nlo = -0.5\nhi = 0.5\nn_points = 41\n";
    let out = run(&d, cfg, &["series"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, r) = rows(d.join("series.csv"));
    assert_eq!((h[2].as_str(), h[3].as_str()), ("sin", "sin_beta"));
    assert_eq!(r.len(), 41);
    for row in &r {
        assert_eq!(row[2], row[3]);
        assert_eq!(row[4], row[5]);
    }
    assert!(d.join("series_coeffs.csv").exists());
}

#[test]
fn zero_point_energy_tracks_harmonic_form() {
    let d = workdir("eg");
    let cfg = "schema = 1\n[coupler]\nbeta_c = 0.95\nzeta_c = 0.05\n[numerics]\nnu_max = 300\n[eg]\nlo = 0.01\nhi = 0.1\nn_points = 10\n";
    let out = run(&d, cfg, &["eg"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, r) = rows(d.join("eg.csv"));
    assert_eq!(h[4], "U_ZPE_harmonic[E_Ltc]");
    for row in r {
        let zpe: f64 = row[4].parse().unwrap();
        let diff: f64 = row[5].parse().unwrap();
        assert!((diff - zpe).abs() <= 0.1 * zpe, "{row:?}");
    }
}

#[test]
fn couplings_are_deterministic_and_echo_parameters() {
    let d = workdir("couplings");
    assert!(run(&d, TWO_QUBITS, &["couplings"]).status.success());
    let first = fs::read(d.join("couplings.csv")).unwrap();
    assert!(run(&d, TWO_QUBITS, &["couplings", "--parallel", "1"]).status.success());
    assert_eq!(first, fs::read(d.join("couplings.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("# coupler-lab couplings\n# schema = 1\n"));
    assert!(text.contains("# coupler beta_c = 7.5000000000000000e-1"));
    let (h, r) = rows(d.join("couplings.csv"));
    assert_eq!(h.len(), 7);
    assert_eq!(r.len(), 16);
    let xx = r.iter().find(|row| row[0] == "xx").unwrap();
    let g: f64 = xx[1].parse().unwrap();
    let mhz: f64 = xx[4].parse().unwrap();
    assert!((mhz - g * 200e3).abs() <= 1e-9 * mhz.abs());
}

#[test]
fn persistent_current_basis_swaps_labels() {
    let d = workdir("pc");
    assert!(run(&d, TWO_QUBITS, &["couplings"]).status.success());
    let (_, parity) = rows(d.join("couplings.csv"));
    assert!(run(&d, TWO_QUBITS, &["couplings", "--pc-basis"]).status.success());
    let (_, pc) = rows(d.join("couplings.csv"));
    let get = |t: &[Vec<String>], l: &str| t.iter().find(|r| r[0] == l).unwrap()[1].clone();
    assert_eq!(get(&parity, "xz"), get(&pc, "zx"));
    assert_eq!(get(&parity, "zI"), get(&pc, "xI"));
}

#[test]
fn small_spectrum_sweep() {
    let d = workdir("spectrum");
    let cfg = format!(
        "{TWO_QUBITS}[numerics]\nqubit_basis = 16\ndims = [8, 8, 6]\n[sweep]\naxis = \"phi_cx\"\nlo = 0.0\nhi = 0.05\nn_points = 2\nmethods = [\"exact\", \"NA\"]\nn_levels = 3\n"
    );
    let out = run(&d, &cfg, &["spectrum"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (h, r) = rows(d.join("spectrum.csv"));
    assert_eq!(h[0], "phi_cx[2pi]");
    assert_eq!(r.len(), 2 * 2 * 3);
    for row in &r {
        let ex: f64 = row[3].parse().unwrap();
        assert!(ex >= 0.0);
    }
}

#[test]
fn scan_writes_requested_labels() {
    let d = workdir("scan");
    let cfg = format!("{TWO_QUBITS}[scan]\nlo = 0.0\nhi = 0.1\nn_points = 3\nlabels = [\"xx\", \"zz\", \"xz\"]\n");
    let out = run(&d, &cfg, &["scan"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, r) = rows(d.join("scan.csv"));
    assert_eq!(r.len(), 9);
}

#[test]
fn exit_codes() {
    let d = workdir("exit");
    let bad = TWO_QUBITS.replace("beta_c = 0.75", "beta_c = 1.2");
    let out = run(&d, &bad, &["couplings"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("\"kind\":\"config\"") && err.contains("monostable"));

    let mixed = TWO_QUBITS.replace("e_ratio = 3.0", "e_ratio = 3.0\nl_c = 1e-10");
    assert_eq!(run(&d, &mixed, &["couplings"]).status.code(), Some(1));

    let tiny = "schema = 1\n[coupler]\nbeta_c = 0.75\nzeta_c = 0.25\n[truncation]\nepsilon = 1e-300\n";
    let out = run(&d, tiny, &["truncation"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("\"kind\":\"numeric\""));

    let cfg = d.join("config.toml");
    let out = Command::new(env!("CARGO_BIN_EXE_coupler-lab"))
        .args(["truncation", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&d)
        .env("COUPLER_LAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn physical_parameters_are_converted() {
    let d = workdir("physical");
    let cfg = "schema = 1\n[coupler]\nl_c = 1e-10\nc = 5e-14\ni_c = 2e-6\n[[qubit]]\nl_j = 3e-10\nc_j = 5e-14\ni_j = 1.1e-6\nm_j = 1.5e-11\n[truncation]\nepsilon = 1e-3\n";
    let out = run(&d, cfg, &["truncation"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(d.join("truncation.csv")).unwrap();
    assert!(text.contains("# parameterization = physical"));
    assert!(text.contains("# units E_L1/h[GHz]"));
}

#[test]
fn validate_passes_on_reference() {
    let d = workdir("validate");
    let out = run(&d, TWO_QUBITS.replace("phi_cx = 0.03", "phi_cx = 0.0").as_str(), &["validate"]);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.lines().all(|l| l.starts_with("PASS")));
    assert!(stdout.contains("gxx_quadrature_vs_couplings"));
}
