use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use khlab::config::apply_override;
use khlab::output::sha256_hex;

const KITAEV: &str = r#"
mode = "spectrum"

[model]
L = 8
theta = 1.5707963267948966
"#;

const SMALL_DYNAMICS: &str = r#"
[model]
L = 6
theta = 1.2
delta = 0.4
perturbation = "inter"

[dynamics]
T = 10.0
interval = 0.5
N = 4
seed = 9
sites = [1, 3]
axes = ["y", "z"]
"#;

fn scratch(name: &str) -> PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn khlab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_khlab"));
    c.args(args).env_remove("KHLAB_WORKERS");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn run_with(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let mut args = vec![sub, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    khlab(&args, &[])
}

#[test]
fn spectrum_shows_sixteen_fold_ground_multiplet() {
    let dir = scratch("spectrum");
    let o = run_with(&dir, "spectrum", KITAEV, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.join("out/multiplets.csv")).unwrap();
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[2], "16");
    for line in text.lines().skip(1) {
        let m: usize = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(m % 16, 0);
    }
}

#[test]
fn manifest_hashes_every_file() {
    let dir = scratch("manifest");
    assert!(run_with(&dir, "spectrum", KITAEV, &["--set", "spectrum.entropy=true"]).status.success());
    let out = dir.join("out");
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files = m["files"].as_object().unwrap();
    let mut on_disk: Vec<String> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let listed: Vec<String> = files.keys().cloned().collect();
    assert_eq!(listed, on_disk);
    for (name, entry) in files {
        let bytes = fs::read(out.join(name)).unwrap();
        assert_eq!(entry["sha256"].as_str().unwrap(), sha256_hex(&bytes), "{name}");
    }
    assert_eq!(m["config"]["spectrum"]["entropy"], true);
    assert_eq!(m["hamiltonian_hash"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn malformed_configs_exit_with_code_two() {
    let dir = scratch("malformed");
    let cases = [
        ("spectrum", "[model\nL = 8"),
        ("spectrum", "[model]\nL = 8\ntheta = 1.0\ncolour = 3\n"),
        ("spectrum", "[model]\nL = 7\ntheta = 1.0\n"),
        ("spectrum", "mode = \"dynamics\"\n[model]\nL = 4\ntheta = 1.0\n"),
        ("dynamics", "[model]\nL = 4\ntheta = 1.0\n[dynamics]\nT = 1.0\n"),
        ("dynamics", "[model]\nL = 4\ntheta = 1.0\n[dynamics]\nT = 1.0\nseed = 1\nsites = [5]\n"),
        ("zeromode", "[model]\nL = 4\ntheta = 1.0\n"),
    ];
    for (sub, cfg) in cases {
        let o = run_with(&dir, sub, cfg, &[]);
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = run_with(&dir, "spectrum", KITAEV, &["--set", "model.theta"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_key_error_names_the_key() {
    let dir = scratch("pointer");
    let o = run_with(&dir, "spectrum", KITAEV, &["--set", "model.detla=0.2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("detla"));
}

#[test]
fn unstable_step_exits_with_code_three() {
    let dir = scratch("unstable");
    let o = run_with(&dir, "dynamics", SMALL_DYNAMICS, &["--set", "dynamics.dt=5.0", "--set", "dynamics.interval=5.0"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn identical_configs_give_identical_bytes() {
    let a = scratch("repro_a");
    let b = scratch("repro_b");
    assert!(run_with(&a, "dynamics", SMALL_DYNAMICS, &[]).status.success());
    let cfg = b.join("config.toml");
    fs::write(&cfg, SMALL_DYNAMICS).unwrap();
    let out = b.join("out");
    let args = ["dynamics", "-c", cfg.to_str().unwrap(), "-o", out.to_str().unwrap()];
    assert!(khlab(&args, &[("KHLAB_WORKERS", "1")]).status.success());
    let mut names = Vec::new();
    for e in fs::read_dir(a.join("out")).unwrap() {
        let name = e.unwrap().file_name().into_string().unwrap();
        if name.ends_with(".csv") || name == "report.json" {
            assert_eq!(fs::read(a.join("out").join(&name)).unwrap(), fs::read(out.join(&name)).unwrap(), "{name}");
            names.push(name);
        }
    }
    for want in ["ttc_site1_y.csv", "ttc_site3_z.csv", "spectrum_site1_y.csv"] {
        assert!(names.iter().any(|n| n == want), "{want} missing");
    }
}

#[test]
fn series_files_have_the_documented_columns() {
    let dir = scratch("columns");
    assert!(run_with(&dir, "dynamics", SMALL_DYNAMICS, &[]).status.success());
    let ttc = fs::read_to_string(dir.join("out/ttc_site1_y.csv")).unwrap();
    assert_eq!(ttc.lines().next().unwrap(), "t,re,im,variance");
    assert_eq!(ttc.lines().count(), 1 + 21);
    let row: Vec<f64> = ttc.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    // Gamma(0) = s^2 = 1/4 for every sampled state
    assert_eq!(row.len(), 4);
    assert!(row[0] == 0.0 && (row[1] - 0.25).abs() < 1e-14 && row[2] == 0.0 && row[3].abs() < 1e-14);
    let spec = fs::read_to_string(dir.join("out/spectrum_site1_y.csv")).unwrap();
    assert_eq!(spec.lines().next().unwrap(), "omega,modulus,mean_of_modulus,variance");
}

#[test]
fn plotdata_long_format() {
    let dir = scratch("plot");
    assert!(run_with(&dir, "dynamics", SMALL_DYNAMICS, &[]).status.success());
    let out = dir.join("out");
    let o = khlab(&["plotdata", out.to_str().unwrap()], &[]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("plot_data.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "series,x,value,variance");
    let rows: Vec<&str> = lines.collect();
    // 4 correlation series of 21 samples and 4 spectra of 11 frequencies
    assert_eq!(rows.len(), 4 * 21 + 4 * 11);
    assert!(rows.iter().any(|r| r.starts_with("ttc_site3_z,")));
    assert!(rows.iter().any(|r| r.starts_with("spectrum_site1_y,")));

    let empty = scratch("plot_empty");
    let dest = empty.join("plot.csv");
    let o = khlab(&["plotdata", empty.to_str().unwrap(), "--out", dest.to_str().unwrap()], &[]);
    assert!(o.status.success());
    assert_eq!(fs::read_to_string(dest).unwrap(), "series,x,value,variance\n");

    let o = khlab(&["plotdata", empty.join("nowhere").to_str().unwrap()], &[]);
    assert!(!o.status.success());
}

#[test]
fn zeromode_residual_is_one_string() {
    let dir = scratch("zeromode");
    let cfg = "[zeromode]\nkind = \"B\"\nL = 10\ndelta = 0.4\n";
    assert!(run_with(&dir, "zeromode", cfg, &[]).status.success());
    let r: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("out/report.json")).unwrap()).unwrap();
    assert_eq!(r["commutator_terms"], 1);
    assert!(r["square_minus_identity"].as_f64().unwrap() < 1e-12);
    let comm = fs::read_to_string(dir.join("out/commutator.txt")).unwrap();
    assert_eq!(comm.trim().lines().count(), 1);
}

#[test]
fn overrides_reach_nested_tables() {
    let mut t: toml::Table = toml::from_str("[model]\nL = 4\n").unwrap();
    apply_override(&mut t, "model.L=6").unwrap();
    apply_override(&mut t, "model.perturbation=inter").unwrap();
    apply_override(&mut t, "dynamics.axes=[\"x\", \"z\"]").unwrap();
    assert_eq!(t["model"]["L"].as_integer(), Some(6));
    assert_eq!(t["model"]["perturbation"].as_str(), Some("inter"));
    assert_eq!(t["dynamics"]["axes"].as_array().unwrap().len(), 2);
    assert!(apply_override(&mut t, "model.L.x=1").is_err());
    assert!(apply_override(&mut t, "=1").is_err());
}
