use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levitodyn"))
}

const CONFIG: &str = r#"
[particle]
mass_kg = 2.0e-18
inertia_kgm2 = [1.0e-32, 1.1e-32, 0.9e-32]
volume_m3 = 1.0e-21
chi0 = 0.25
delta_chi = [0.05, -0.02, 0.1]

[trap]
power_w = 0.5
cross_section_m2 = 2.3e-12
wavelength_m = 1.55e-6
waist_m = 1.2e-6
rayleigh_range_m = 3.5e-6
a1 = 0.9
a2 = 1.1
bx = 1.0
by = 0.3

[gas]
gamma_c_hz = 0.0
temperature_k = 300.0
molecule_mass_kg = 4.8e-26

[detector]
axis = [0.0, 0.0, 1.0]
half_angle_rad = 0.6
eta = 0.9

[integrator]
dt_s = 2.0e-9
duration_s = 2.0e-6
seed = 7
stride = 10
"#;

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, format!("{CONFIG}\n{extra}")).unwrap();
    path
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap()
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let rows = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn simulate_conserves_energy_without_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let status = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let (header, rows) = read_csv(&out.join("trace.csv"));
    let e = header.iter().position(|h| h == "energy").unwrap();
    let drift = (rows.last().unwrap()[e] - rows[0][e]) / rows[0][e];
    assert!(drift.abs() < 1e-6, "energy drift {drift}");
    assert!(out.join("trace.svg").exists());
}

#[test]
fn isotropic_currents_sweep_has_zero_jr() {
    let dir = tempfile::tempdir().unwrap();
    let iso = CONFIG.replace("delta_chi = [0.05, -0.02, 0.1]", "delta_chi = [0.0, 0.0, 0.0]");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "{iso}\n[currents]\nsweep = \"x\"\nstart = -2.0e-7\nstop = 2.0e-7\npoints = 15\n"
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = bin()
        .args(["currents", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let (header, rows) = read_csv(&out.join("currents.csv"));
    let jr = header.iter().position(|h| h == "jr").unwrap();
    assert!(rows.iter().all(|r| r[jr] == 0.0));
}

#[test]
fn check_passes_and_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("out");
    let result = bin()
        .args(["check", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.lines().filter(|l| l.contains("pass")).count() >= 6);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn misspelled_key_fails_with_field_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = CONFIG.replace("waist_m", "waistm");
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, bad).unwrap();
    let result = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("waist"), "stderr: {stderr}");
}

#[test]
fn identical_seeds_are_byte_identical_and_threads_dont_matter() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[currents]\nsweep = \"beta\"\nstart = 0.4\nstop = 2.6\npoints = 19\n",
    );
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let out = dir.path().join(name);
        let status = bin()
            .args(["currents", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out)
            .args(["--threads", threads])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("currents.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);

    // the env-var fallback accepts the same spelling
    let out = dir.path().join("d");
    let status = bin()
        .args(["currents", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .env("LEVITODYN_THREADS", "2")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(outputs[0], std::fs::read(out.join("currents.csv")).unwrap());
}

#[test]
fn seed_override_changes_current_noise() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let run = |name: &str, seed: Option<&str>| {
        let out = dir.path().join(name);
        let mut cmd = bin();
        cmd.args(["simulate", "--config"])
            .arg(&cfg)
            .arg("--out")
            .arg(&out);
        if let Some(s) = seed {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.status().unwrap().success());
        std::fs::read(out.join("trace.csv")).unwrap()
    };
    let a = run("a", None);
    let b = run("b", Some("7")); // same as the config seed
    let c = run("c", Some("8"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn psd_subcommand_emits_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let base = CONFIG
        .replace("duration_s = 2.0e-6", "duration_s = 4.0e-5")
        .replace("stride = 10", "stride = 2");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "{base}\n[initial]\nposition_m = [1.0e-7, 0.0, 0.0]\n\n\
             [psd]\ninput = \"trace.csv\"\ncolumn = \"x\"\nsegment_length = 1024\n"
        ),
    )
    .unwrap();
    let out = dir.path().join("out");
    assert!(bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .args(["psd", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let (header, rows) = read_csv(&out.join("psd.csv"));
    assert_eq!(header, ["frequency_hz", "psd_value"]);
    assert!(rows.len() > 100);
    assert!(out.join("psd.svg").exists());
}
