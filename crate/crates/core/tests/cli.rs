use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use sha2::{Digest, Sha256};

use vri::config::{Experiment, Kind, Manifest, Range, RunConfig};
use vri::ensembles::SliceGridSpec;
use vri::run::{replay, run, MANIFEST};

/// Small but non-trivial settings for every command.
fn small(kind: Kind) -> RunConfig {
    let mut cfg = RunConfig {
        experiment: Experiment::default_for(kind),
        ..RunConfig::default()
    };
    match &mut cfg.experiment {
        Experiment::PesInfo(_) => {}
        Experiment::LineRun(p) => p.density = 80.0,
        Experiment::Traces(p) => {
            p.density = 40.0;
            p.sample_interval = 0.05;
        }
        Experiment::Stats(p) => p.density = 80.0,
        Experiment::SweepSurface(p) => {
            p.h0 = Range::new(0.02, 0.04, 0.02);
            p.xi = Range::new(0.3, 0.35, 0.05);
            p.density = 40.0;
        }
        Experiment::FateMap(p) => p.grid = SliceGridSpec { n_y: 18, n_py: 15 },
        Experiment::SweepSlice(p) => {
            p.xi = Range::new(0.1, 0.5, 0.2);
            p.grid = SliceGridSpec::square(12);
        }
    }
    cfg
}

const KINDS: [Kind; 7] = [
    Kind::PesInfo,
    Kind::LineRun,
    Kind::SweepSurface,
    Kind::FateMap,
    Kind::SweepSlice,
    Kind::Traces,
    Kind::Stats,
];

/// SHA-256 of every data file in `dir`, manifest excluded.
fn digests(dir: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        assert!(!name.ends_with(".partial"), "leftover {name}");
        if name == MANIFEST {
            continue;
        }
        let hash = Sha256::digest(fs::read(&path).unwrap());
        out.insert(name, hash.iter().map(|b| format!("{b:02x}")).collect());
    }
    out
}

fn run_into(cfg: &RunConfig, dir: &Path, workers: usize) -> BTreeMap<String, String> {
    let mut cfg = cfg.clone();
    cfg.run.out = dir.to_path_buf();
    cfg.run.workers = workers;
    let outcome = run(&cfg).unwrap();
    let listed: Vec<String> = outcome.manifest.files.clone();
    let found = digests(dir);
    assert_eq!(listed.len(), found.len());
    assert!(listed.iter().all(|f| found.contains_key(f)), "{listed:?} vs {:?}", found.keys());
    found
}

#[test]
fn outputs_identical_across_workers_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in KINDS {
        let cfg = small(kind);
        let a = run_into(&cfg, &tmp.path().join(format!("{}-1", kind.name())), 1);
        let b = run_into(&cfg, &tmp.path().join(format!("{}-2", kind.name())), 2);
        let c = run_into(&cfg, &tmp.path().join(format!("{}-1", kind.name())), 1);
        assert!(!a.is_empty(), "{}", kind.name());
        assert_eq!(a, b, "{} differs across worker counts", kind.name());
        assert_eq!(a, c, "{} differs across reruns", kind.name());
    }
}

#[test]
fn replay_reproduces_files() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in [Kind::LineRun, Kind::SweepSlice, Kind::Stats] {
        let first = tmp.path().join(format!("{}-a", kind.name()));
        let second = tmp.path().join(format!("{}-b", kind.name()));
        let a = run_into(&small(kind), &first, 0);
        let outcome = replay(&first.join(MANIFEST), Some(&second), &mut |_| {}).unwrap();
        assert_eq!(outcome.manifest.config.run.out, second);
        assert_eq!(a, digests(&second));
        let m = Manifest::load(&second.join(MANIFEST)).unwrap();
        assert_eq!(m.command, kind.name());
        assert_eq!(m.files.len(), a.len());
    }
}

#[test]
fn manifest_records_the_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("fm");
    let mut cfg = small(Kind::FateMap);
    cfg.run.out = dir.clone();
    let outcome = run(&cfg).unwrap();
    let text = fs::read_to_string(dir.join(MANIFEST)).unwrap();
    let m = Manifest::from_json(&text).unwrap();
    assert_eq!(m, outcome.manifest);
    assert_eq!(m.config, cfg);
    assert_eq!(m.code_version, env!("CARGO_PKG_VERSION"));
    let cells = 18 * 15;
    assert_eq!(m.counts.total() + m.inaccessible.unwrap(), cells);
    let csv = fs::read_to_string(dir.join(&m.files[0])).unwrap();
    assert_eq!(csv.lines().count(), cells + 1);
}

#[test]
fn config_files_round_trip_through_disk() {
    let tmp = tempfile::tempdir().unwrap();
    for kind in KINDS {
        let cfg = small(kind);
        let path = tmp.path().join(format!("{}.toml", kind.name()));
        fs::write(&path, cfg.to_toml().unwrap()).unwrap();
        assert_eq!(RunConfig::load(&path).unwrap(), cfg);
        assert_eq!(RunConfig::load_for(&path, kind).unwrap(), cfg);
    }
    let path = tmp.path().join("line.toml");
    fs::write(&path, small(Kind::LineRun).to_toml().unwrap()).unwrap();
    assert!(RunConfig::load_for(&path, Kind::FateMap).is_err());
}

#[test]
fn malformed_configs_are_errors() {
    for text in [
        "[pes]\nvri_x = 1.5\n",
        "[pes]\nvri_y = 0.3\n",
        "[experiment]\nkind = \"line-run\"\ndensity = -1.0\n",
        "[experiment]\nkind = \"teleport\"\n",
        "[integrator]\nmethod = \"euler\"\n",
        "[run]\nworkers = -2\n",
        "[experiment]\nkind = \"sweep-slice\"\ngrid = { n_y = 1, n_py = 8 }\n",
        "pes = 3",
    ] {
        assert!(RunConfig::from_toml(text).is_err(), "accepted {text:?}");
    }
    assert!(Manifest::from_json("{}").is_err());
    assert!(Manifest::load(Path::new("/nonexistent/manifest.json")).is_err());
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vri"))
}

#[test]
fn binary_pes_info_prints_json() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["pes-info", "--xi", "0.4", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["vri"][0].as_f64().unwrap(), 0.4);
    assert_eq!(v["critical_points"].as_array().unwrap().len(), 5);
    assert!(tmp.path().join(MANIFEST).exists());
    assert!(tmp.path().join("pes_info.json").exists());
}

#[test]
fn binary_flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg_path = tmp.path().join("run.toml");
    fs::write(&cfg_path, small(Kind::LineRun).to_toml().unwrap()).unwrap();
    let dir = tmp.path().join("out");
    let status = bin()
        .args(["line-run", "--workers", "1", "--density", "30", "--xi", "0.2", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let m = Manifest::load(&dir.join(MANIFEST)).unwrap();
    assert_eq!(m.config.pes.vri_x, 0.2);
    assert_eq!(m.config.run.workers, 1);
    match m.config.experiment {
        Experiment::LineRun(p) => assert_eq!(p.density, 30.0),
        other => panic!("{other:?}"),
    }

    let replayed = tmp.path().join("again");
    let status = bin()
        .arg("replay")
        .arg(dir.join(MANIFEST))
        .arg("--out")
        .arg(&replayed)
        .output()
        .unwrap();
    assert!(status.status.success());
    assert_eq!(digests(&dir), digests(&replayed));
}

#[test]
fn binary_rejects_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_xi = bin().args(["line-run", "--xi", "1.5", "--out"]).arg(tmp.path()).output().unwrap();
    assert_eq!(bad_xi.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_xi.stderr).starts_with("error:"));
    assert!(!tmp.path().join(MANIFEST).exists());

    let bad_grid = bin().args(["fate-map", "--grid", "1,5"]).output().unwrap();
    assert!(!bad_grid.status.success());

    let cfg_path = tmp.path().join("bad.toml");
    fs::write(&cfg_path, "[pes]\nunknown = 1\n").unwrap();
    let bad_cfg = bin().args(["pes-info", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(bad_cfg.status.code(), Some(1));

    let missing = bin().args(["replay", "/nonexistent/manifest.json"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn fuzz_seeds_parse_as_named() {
    let corpus = Path::new(env!("CARGO_MANIFEST_DIR")).join("fuzz/corpus");
    let rejected = |name: &str| ["bad_", "unknown_", "too_small", "overflow", "comma", "triple", "empty_object", "truncated"]
        .iter()
        .any(|p| name.starts_with(p));
    let mut seen = 0;
    for (target, parse) in [
        ("config_toml", (|t: &str| RunConfig::from_toml(t).is_ok()) as fn(&str) -> bool),
        ("manifest_json", |t: &str| Manifest::from_json(t).is_ok()),
        ("grid_flag", |t: &str| vri::config::parse_grid(t).is_ok()),
    ] {
        for entry in fs::read_dir(corpus.join(target)).unwrap() {
            let path = entry.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            let text = fs::read_to_string(&path).unwrap();
            assert_eq!(parse(&text), !rejected(&name), "{target}/{name}");
            seen += 1;
        }
    }
    assert!(seen >= 20);
}
