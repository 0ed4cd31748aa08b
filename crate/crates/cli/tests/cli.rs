//! Configuration, snapshot output and the `srdem` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use srdem::body::{MaterialParams, Particle, ShapeTemplate, TemplateOptions};
use srdem::integrate::{Engine, EngineOptions};
use srdem::shape::{build_profile, ShapeSpec};
use srdem::Vec3;
use srdem_cli::config::Geometry;
use srdem_cli::{parse_config, write_snapshot, Number, SimConfig, SNAPSHOT_HEADER};

fn presets() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    files
}

fn preset(name: &str) -> PathBuf {
    presets()
        .into_iter()
        .find(|p| p.file_stem().unwrap() == name)
        .unwrap()
}

fn srdem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srdem"))
        .args(args)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

const SPHERE: &str = r#"
[shape]
family = "sphere"
radius = 5e-3

[material]
youngs_modulus = 1e7
poisson_ratio = 0.3
density = 1000.0
restitution_pp = 0.5
restitution_pw = 0.5
friction_pp = 0.3
friction_pw = 0.3

[model]
n_nodes = 300

[run]
dt = 1e-5
seed = 4

[geometry]
kind = "packing"
diameter = 30e-3
height = 40e-3
count = 1
drop_height = 6e-3
batch_min = 1
batch_max = 1
random_orientations = false
"#;

#[test]
fn every_preset_parses() {
    let files = presets();
    assert_eq!(files.len(), 7);
    for f in &files {
        parse_config(f).unwrap_or_else(|e| panic!("{}: {e:#}", f.display()));
    }
    let sharp = parse_config(preset("tablet_wall_sharp")).unwrap();
    assert_eq!(sharp.run.dt, 1e-7);
    assert_eq!(sharp.material.shear_modulus, Some(1.15e9));
    assert!(matches!(sharp.geometry, Geometry::WallImpact(_)));
}

#[test]
fn tablet_friction_pairs_stay_distinct() {
    let c = parse_config(preset("pack_tablet")).unwrap();
    let m = c.material.params();
    assert_eq!(m.friction_pp, 0.38);
    assert_eq!(m.friction_pw, 0.22);
}

#[test]
fn resolved_toml_round_trips() {
    for f in presets() {
        let c = parse_config(&f).unwrap();
        let again = SimConfig::from_toml(&c.to_toml().unwrap(), None).unwrap();
        assert_eq!(again, c, "{}", f.display());
    }
}

#[test]
fn empty_config_lists_every_missing_key() {
    let err = SimConfig::from_toml("", None).unwrap_err().to_string();
    for key in [
        "shape.family",
        "material.youngs_modulus (or material.shear_modulus)",
        "material.poisson_ratio",
        "material.density",
        "run.dt",
        "geometry.kind",
    ] {
        assert!(err.contains(key), "{key} not in {err}");
    }
    let drum = "[geometry]\nkind = \"drum\"\n";
    let err = SimConfig::from_toml(drum, None).unwrap_err().to_string();
    for key in [
        "geometry.diameter",
        "geometry.length",
        "geometry.rpm",
        "geometry.count",
    ] {
        assert!(err.contains(key), "{key} not in {err}");
    }
}

#[test]
fn unknown_keys_are_errors() {
    let bad = SPHERE.replace("seed = 4", "seed = 4\nsed = 5");
    let err = format!("{:#}", SimConfig::from_toml(&bad, None).unwrap_err());
    assert!(err.contains("sed"), "{err}");
    let bad = SPHERE.replace("kind = \"packing\"", "kind = \"packing\"\nwidth = 1.0");
    assert!(SimConfig::from_toml(&bad, None).is_err());
}

#[test]
fn moduli_below_a_kilopascal_are_flagged() {
    let bad = SPHERE.replace("youngs_modulus = 1e7", "youngs_modulus = 50.0");
    let err = SimConfig::from_toml(&bad, None).unwrap_err().to_string();
    assert!(
        err.contains("youngs_modulus") && err.contains("Pa"),
        "{err}"
    );
}

fn resting_sphere() -> Engine {
    let mat = MaterialParams::new(1e7, 0.3, 1000.0);
    let options = TemplateOptions {
        n_nodes: 100,
        ..Default::default()
    };
    let t = ShapeTemplate::build(
        &build_profile(&ShapeSpec::Sphere { radius: 1e-3 }).unwrap(),
        1000.0,
        &options,
    )
    .unwrap();
    let mut p = Particle::new(0, t, mat);
    p.position = Vec3::new(1e-3, 2e-3, 3e-3);
    let options = EngineOptions {
        dt: 1e-5,
        gravity: Vec3::zeros(),
        ..Default::default()
    };
    Engine::new(vec![p], Vec::new(), options).unwrap()
}

const EXACT: Number = Number {
    deterministic: true,
};

#[test]
fn resting_particle_writes_one_row_of_zero_velocity() {
    let dir = tempfile::tempdir().unwrap();
    let mut e = resting_sphere();
    let (series, _) = e.run(10, 0).unwrap();
    let files = write_snapshot(&series, dir.path(), EXACT, 0).unwrap();
    assert_eq!(files.len(), 1);
    let csv = fs::read_to_string(&files[0]).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], SNAPSHOT_HEADER);
    assert_eq!(lines.len(), 2);
    let cells: Vec<f64> = lines[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells.len(), 15);
    assert!(cells[9..].iter().all(|&v| v == 0.0));
}

#[test]
fn eleven_snapshots_make_eleven_files_and_an_index() {
    let dir = tempfile::tempdir().unwrap();
    let mut e = resting_sphere();
    let (series, _) = e.run(1000, 100).unwrap();
    let files = write_snapshot(&series, dir.path(), EXACT, 9).unwrap();
    assert_eq!(files.len(), 11);
    let index = fs::read_to_string(dir.path().join("index.csv")).unwrap();
    let rows: Vec<&str> = index.lines().skip(1).collect();
    assert_eq!(rows.len(), 11);
    for (row, file) in rows.iter().zip(&files) {
        let name = file.file_name().unwrap().to_str().unwrap();
        assert!(row.ends_with(&format!(",9,{name}")), "{row}");
    }
    let csvs = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(csvs, 12);
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn out_arg(dir: &Path, sub: &str) -> String {
    dir.join(sub).to_string_lossy().into_owned()
}

#[test]
fn deterministic_replay_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "sphere.toml", SPHERE);
    let config = config.to_str().unwrap();
    for sub in ["a", "b"] {
        let o = srdem(&[
            "--deterministic",
            "--out",
            &out_arg(dir.path(), sub),
            "pack",
            config,
        ]);
        assert!(o.status.success(), "{}", text(&o.stderr));
    }
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let mut compared = 0;
    for entry in fs::read_dir(a.join("snapshots")).unwrap() {
        let name = entry.unwrap().file_name();
        let x = fs::read(a.join("snapshots").join(&name)).unwrap();
        let y = fs::read(b.join("snapshots").join(&name)).unwrap();
        assert_eq!(x, y, "{name:?}");
        compared += 1;
    }
    assert!(compared >= 2);
    let table = fs::read_to_string(a.join("packing.csv")).unwrap();
    assert_eq!(table, fs::read_to_string(b.join("packing.csv")).unwrap());
    assert!(table.starts_with("# seed = 4\n"));
    let height: f64 = table
        .lines()
        .nth(2)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((height - 10e-3).abs() < 1e-4, "{height}");
    assert!(a.join("resolved.toml").exists());
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "sphere.toml", SPHERE);
    let out = out_arg(dir.path(), "o");
    let o = srdem(&[
        "--seed",
        "77",
        "--out",
        &out,
        "pack",
        config.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let resolved = parse_config(dir.path().join("o/resolved.toml")).unwrap();
    assert_eq!(resolved.run.seed, 77);
}

#[test]
fn props_reports_the_tablet_mass() {
    let dir = tempfile::tempdir().unwrap();
    let o = srdem(&[
        "--out",
        &out_arg(dir.path(), "p"),
        "props",
        preset("tablet_wall_sharp").to_str().unwrap(),
        "--voxels",
        "60",
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let err = text(&o.stderr);
    assert!(err.contains("revolve: mass = 6.3269e-4 kg"), "{err}");
    let csv = fs::read_to_string(dir.path().join("p/props.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn impact_wall_with_one_angle() {
    let dir = tempfile::tempdir().unwrap();
    let body = fs::read_to_string(preset("tablet_wall_sharp"))
        .unwrap()
        .replace("n_nodes = 5090", "n_nodes = 1500");
    let config = write(dir.path(), "wall.toml", &body);
    let o = srdem(&[
        "--out",
        &out_arg(dir.path(), "w"),
        "impact-wall",
        config.to_str().unwrap(),
        "--theta-list",
        "0",
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("w/impact_wall.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 1);
    let cells: Vec<f64> = rows[0].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[0], 0.0);
    assert!((cells[1] + 0.6).abs() < 6e-3, "{}", cells[1]);
    assert!((cells[3] + 0.6).abs() < 1e-12);
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "empty.toml", "");
    let o = srdem(&[
        "--out",
        &out_arg(dir.path(), "e"),
        "pack",
        config.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("missing required keys"));
    let o = srdem(&["pack", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_exit_code_follows_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = srdem(&[
        "--out",
        &out_arg(dir.path(), "v"),
        "validate",
        "--no-variant",
    ]);
    let stdout = text(&o.stdout);
    let lines: Vec<&str> = stdout
        .lines()
        .filter(|l| l.starts_with("PASS") || l.starts_with("FAIL"))
        .collect();
    assert_eq!(lines.len(), 8, "{stdout}");
    let all_pass = lines.iter().all(|l| l.starts_with("PASS"));
    assert_eq!(
        o.status.code(),
        Some(if all_pass { 0 } else { 1 }),
        "{stdout}"
    );
    let csv = fs::read_to_string(dir.path().join("v/validate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
}
