use std::fs;
use std::path::Path;

use afshar::cli::{main_with, EXIT_ERROR, EXIT_OK};
use afshar::report::Summary;
use afshar::scenario::{manifest_text, preset};

fn run(args: &[&str]) -> (u8, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = main_with(std::iter::once("afshar").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_manifest(dir: &Path, names: &[&str]) -> String {
    let specs: Vec<_> = names
        .iter()
        .map(|n| {
            let mut s = preset(n).unwrap();
            s.n_photons = 2000;
            s
        })
        .collect();
    let path = dir.join("manifest.toml");
    fs::write(&path, manifest_text(&specs).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn preset_writes_a_parseable_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let (code, stdout, stderr) = run(&["preset", "afshar-grid", "--photons", "3000", "--seed", "9", "--out-dir", out]);
    assert_eq!(code, EXIT_OK, "{stderr}");
    assert!(stdout.starts_with("afshar-grid: "));
    let summary =
        Summary::from_toml(&fs::read_to_string(dir.path().join("afshar-grid/summary.toml")).unwrap()).unwrap();
    assert_eq!((summary.seed, summary.sampling.emitted), (9, 3000));
    assert!(summary.violations.is_empty());
    assert!(summary.fallacious_half_population.is_none());
    assert_eq!(summary.grid.unwrap().absorbed_probability, 0.0);
}

#[test]
fn delimited_format_and_fallacy_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args =
        ["preset", "afshar-grid", "--photons", "1000", "--out-dir", out, "--format", "delimited", "--emit-fallacy"];
    assert_eq!(run(&args).0, EXIT_OK);
    let csv = fs::read_to_string(dir.path().join("afshar-grid/summary.csv")).unwrap();
    assert!(csv.starts_with("section,key,value\n"));
    assert!(csv.contains("fallacious_half_population,accounting,fallacious_half_population\n"));
    assert!(csv.contains("analytic,accounting,all_photons\n"));
}

#[test]
fn manifest_run_and_validate() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write_manifest(dir.path(), &["no-grid", "partial-tag"]);
    let (code, stdout, _) = run(&["validate", &manifest]);
    assert_eq!((code, stdout.as_str()), (EXIT_OK, "2 scenario(s) valid\n"));
    let out = dir.path().join("out");
    assert_eq!(run(&["run", &manifest, "--out-dir", out.to_str().unwrap()]).0, EXIT_OK);
    for name in ["no-grid", "partial-tag"] {
        assert!(out.join(name).join("events.csv").is_file());
    }
}

#[test]
fn empty_manifest_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.toml");
    fs::write(&path, "").unwrap();
    let out = dir.path().join("out");
    let (code, stdout, _) = run(&["run", path.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!((code, stdout.as_str()), (EXIT_OK, ""));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn errors_exit_one_and_write_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();

    let (code, _, stderr) = run(&["preset", "no-such-preset", "--out-dir", out_s]);
    assert_eq!(code, EXIT_ERROR);
    assert!(stderr.contains("unknown preset"));

    let (code, _, _) = run(&["run", dir.path().join("missing.toml").to_str().unwrap()]);
    assert_eq!(code, EXIT_ERROR);

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[[scenario]]\nname = \"x\"\n").unwrap();
    assert_eq!(run(&["validate", bad.to_str().unwrap()]).0, EXIT_ERROR);

    // the second scenario validates but its wire lies off the focal grid
    let manifest = write_manifest(dir.path(), &["no-grid"]);
    let mut text = fs::read_to_string(&manifest).unwrap();
    let mut spec = preset("no-grid").unwrap();
    spec.name = "far-wire".into();
    spec.wires = Some(afshar::scenario::WireSpec {
        positions_rad_per_m: Some(vec![1e9]),
        at_minima: None,
        half_width_rad_per_m: 0.0,
        efficiency: 1.0,
    });
    text.push('\n');
    text.push_str(&manifest_text(&[spec]).unwrap());
    fs::write(&manifest, text).unwrap();
    assert_eq!(run(&["validate", &manifest]).0, EXIT_OK);
    let (code, _, stderr) = run(&["run", &manifest, "--out-dir", out_s]);
    assert_eq!(code, EXIT_ERROR, "{stderr}");
    assert!(!out.exists(), "partial output left behind");

    assert_eq!(run(&["preset", "no-grid", "--photons", "0", "--out-dir", out_s]).0, EXIT_ERROR);
    assert_eq!(run(&["preset", "no-grid", "--format", "xml"]).0, EXIT_ERROR);
}

#[test]
fn list_presets_manifest_round_trips() {
    let (code, stdout, _) = run(&["list-presets", "--manifest"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(afshar::scenario::parse_manifest(&stdout).unwrap().len(), afshar::scenario::PRESETS.len());
    let (_, listing, _) = run(&["list-presets"]);
    assert_eq!(listing.lines().count(), afshar::scenario::PRESETS.len());
}

#[test]
fn help_exits_zero() {
    let (code, stdout, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(stdout.contains("list-presets"));
}
