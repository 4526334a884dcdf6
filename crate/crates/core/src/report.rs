//! Writing run bundles to disk.
//!
//! A bundle directory holds a summary (`summary.toml`, or `summary.csv` in
//! delimited form) next to plain CSV data files:
//!
//! - `field.csv`: `coordinate,intensity` in the detection plane
//! - `focal.csv`: `wavevector,intensity` after any wires
//! - `events.csv`: `photon_id,plane,position,spot`, with absorbed photons listed without a position
//! - `trajectories.csv`: `trajectory_id,z,x`, when trajectories were traced
//! - `profiles.csv`: `n_grid,kind,index,value`, when profile spaces were sampled
//!
//! Floats are written in Rust's shortest round-trip form, so the same run
//! always gives the same bytes. The directory appears only once every file is
//! complete.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DualityReport;
use crate::sampling::RNG_NAME;
use crate::scenario::Bundle;

/// Version tag written into every summary.
pub const SCHEMA: &str = "afshar-report/1";

/// Summary file layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    /// `summary.toml`.
    #[default]
    Text,
    /// `summary.csv` with `section,key,value` rows.
    Delimited,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "delimited" => Ok(Format::Delimited),
            other => Err(Error::Config(format!("unknown format {other:?}; use text or delimited"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EmitOptions {
    pub format: Format,
    /// Also write the half-population miscount, clearly labelled.
    pub emit_fallacy: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub k: f64,
    pub v: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    pub deficit: f64,
    pub sum_of_squares: f64,
    pub accounting: String,
}

impl From<&DualityReport> for ReportRow {
    fn from(r: &DualityReport) -> Self {
        Self {
            k: r.k(),
            v: r.v(),
            chi: r.chi(),
            deficit: r.deficit(),
            sum_of_squares: r.sum_of_squares(),
            accounting: r.accounting().as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub lambda: usize,
    pub weight: f64,
    #[serde(flatten)]
    pub report: ReportRow,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub wires: usize,
    pub absorbed_probability: f64,
    pub image_deviation: f64,
    pub disturbed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingRow {
    pub rng: String,
    pub emitted: u64,
    pub detected: u64,
    pub absorbed_by_wires: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpotRow {
    pub spot1: u64,
    pub spot2: u64,
    pub stray: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_hat: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityRow {
    pub v_hat: f64,
    pub chi_hat: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BohmRow {
    pub trajectories: usize,
    pub resolved: usize,
    pub spot1: u64,
    pub spot2: u64,
    pub stray: u64,
    pub expected_spot1_fraction: f64,
    pub chi_square: f64,
    pub equivariant: bool,
    pub wrong_detector_fraction: f64,
    pub crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRowOut {
    pub n_grid: usize,
    pub free_samples: usize,
    pub entropy: f64,
    pub match_probability: f64,
    pub match_fraction: f64,
}

/// Everything in `summary.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub schema: String,
    pub scenario: String,
    pub seed: u64,
    pub detection_plane: String,
    pub violations: Vec<String>,
    pub analytic: ReportRow,
    pub sampling: SamplingRow,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spots: Option<SpotRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub visibility: Option<VisibilityRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inferred: Option<ReportRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallacious_half_population: Option<ReportRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bohm: Option<BohmRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub branches: Vec<BranchRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entropy: Vec<EntropyRowOut>,
}

impl Summary {
    pub fn new(b: &Bundle, emit_fallacy: bool) -> Self {
        let s = &b.scenario;
        Self {
            schema: SCHEMA.to_string(),
            scenario: s.name.clone(),
            seed: s.seed,
            detection_plane: s.detection_plane.as_str().to_string(),
            violations: b.violations(),
            analytic: (&b.analytic).into(),
            sampling: SamplingRow {
                rng: RNG_NAME.to_string(),
                emitted: b.run.n_emitted,
                detected: b.run.events.len() as u64,
                absorbed_by_wires: b.run.n_absorbed_by_wires(),
            },
            grid: b.grid.map(|g| GridRow {
                wires: s.wires.as_ref().map_or(0, |w| w.positions().len()),
                absorbed_probability: g.absorbed_probability,
                image_deviation: g.image_deviation,
                disturbed: g.disturbed,
            }),
            spots: b.spots.map(|c| SpotRow { spot1: c.spot1, spot2: c.spot2, stray: c.stray, k_hat: b.k_hat }),
            visibility: b.v_hat.map(|e| VisibilityRow { v_hat: e.v, chi_hat: e.chi, stderr: e.stderr }),
            inferred: b.inferred.as_ref().map(Into::into),
            fallacious_half_population: if emit_fallacy { b.fallacy.as_ref().map(Into::into) } else { None },
            bohm: b.ensemble.as_ref().map(|e| BohmRow {
                trajectories: e.n,
                resolved: e.resolved,
                spot1: e.spot1,
                spot2: e.spot2,
                stray: e.stray,
                expected_spot1_fraction: e.expected_spot1_fraction,
                chi_square: e.chi_square,
                equivariant: e.is_equivariant(),
                wrong_detector_fraction: e.wrong_detector_fraction,
                crossings: e.crossings,
            }),
            branches: b
                .branches
                .iter()
                .filter_map(|br| {
                    let r = br.report().ok()?;
                    Some(BranchRow { lambda: br.lambda_index, weight: br.weight, report: (&r).into() })
                })
                .collect(),
            entropy: b
                .entropy
                .iter()
                .map(|e| EntropyRowOut {
                    n_grid: e.n_grid,
                    free_samples: e.free_samples,
                    entropy: e.entropy,
                    match_probability: e.match_probability,
                    match_fraction: e.match_fraction,
                })
                .collect(),
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// `section,key,value` rows. Array entries get their index in the section name.
    pub fn to_delimited(&self) -> Result<String> {
        let value = toml::Value::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        let mut rows = Vec::new();
        flatten("", &value, &mut rows);
        table(&["section", "key", "value"], rows)
    }
}

fn flatten(section: &str, value: &toml::Value, rows: &mut Vec<Vec<String>>) {
    let toml::Value::Table(entries) = value else { return };
    for (key, v) in entries {
        match v {
            toml::Value::Table(_) => flatten(&join(section, key), v, rows),
            toml::Value::Array(items) if items.iter().all(toml::Value::is_table) && !items.is_empty() => {
                for (i, item) in items.iter().enumerate() {
                    flatten(&format!("{}[{i}]", join(section, key)), item, rows);
                }
            }
            toml::Value::Array(items) => {
                rows.extend(items.iter().map(|item| vec![section.to_string(), key.clone(), scalar(item)]));
            }
            _ => rows.push(vec![section.to_string(), key.clone(), scalar(v)]),
        }
    }
}

fn join(section: &str, key: &str) -> String {
    if section.is_empty() {
        key.to_string()
    } else {
        format!("{section}.{key}")
    }
}

fn scalar(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(f) => format!("{f:e}"),
        other => other.to_string(),
    }
}

fn table<R, F>(header: &[&str], rows: R) -> Result<String>
where
    R: IntoIterator<Item = Vec<F>>,
    F: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv from strings is utf-8"))
}

/// All files of a bundle as `(file name, contents)`, in a fixed order.
pub fn render(b: &Bundle, options: EmitOptions) -> Result<Vec<(String, String)>> {
    let summary = Summary::new(b, options.emit_fallacy);
    let mut files = match options.format {
        Format::Text => vec![("summary.toml".to_string(), summary.to_toml()?)],
        Format::Delimited => vec![("summary.csv".to_string(), summary.to_delimited()?)],
    };

    let profile = |grid: &crate::model::Grid, values: &[f64]| {
        grid.points().zip(values).map(|(x, i)| vec![format!("{x:e}"), format!("{i:e}")]).collect::<Vec<_>>()
    };
    files.push(("field.csv".into(), table(&["coordinate", "intensity"], profile(&b.plane_grid, &b.plane_intensity))?));
    files.push(("focal.csv".into(), table(&["wavevector", "intensity"], profile(&b.focal_grid, &b.focal_intensity))?));

    let plane = b.run.plane.as_str();
    let mut events = Vec::with_capacity(b.run.n_emitted as usize);
    let (mut detected, mut absorbed) = (b.run.events.iter().peekable(), b.run.absorbed.iter().peekable());
    loop {
        let take_absorbed = match (detected.peek(), absorbed.peek()) {
            (Some(e), Some(&&id)) => id < e.photon_id,
            (None, Some(_)) => true,
            (Some(_), None) => false,
            (None, None) => break,
        };
        if take_absorbed {
            let id = absorbed.next().expect("peeked");
            events.push(vec![id.to_string(), plane.to_string(), String::new(), "absorbed".to_string()]);
        } else {
            let e = detected.next().expect("peeked");
            events.push(vec![
                e.photon_id.to_string(),
                e.plane.as_str().to_string(),
                format!("{:e}", e.position),
                e.spot.to_string(),
            ]);
        }
    }
    files.push(("events.csv".into(), table(&["photon_id", "plane", "position", "spot"], events)?));

    if !b.trajectories.is_empty() {
        let rows = b.trajectories.iter().enumerate().flat_map(|(id, traj)| {
            traj.samples.iter().map(move |(z, x)| vec![id.to_string(), format!("{z:e}"), format!("{x:e}")])
        });
        files.push(("trajectories.csv".into(), table(&["trajectory_id", "z", "x"], rows)?));
    }

    if !b.profiles.is_empty() {
        let rows = b.profiles.iter().flat_map(|(n, kind, values)| {
            values
                .iter()
                .enumerate()
                .map(move |(i, v)| vec![n.to_string(), kind.to_string(), i.to_string(), format!("{v:e}")])
        });
        files.push(("profiles.csv".into(), table(&["n_grid", "kind", "index", "value"], rows)?));
    }
    Ok(files)
}

/// Writes a bundle to `out_dir/<scenario name>/`, replacing any earlier run of the same name.
///
/// Files are written to a sibling staging directory first and moved into
/// place together, so a failed run leaves no partial bundle behind.
pub fn write_bundle(b: &Bundle, out_dir: &Path, options: EmitOptions) -> Result<PathBuf> {
    let files = render(b, options)?;
    fs::create_dir_all(out_dir)?;
    let target = out_dir.join(&b.scenario.name);
    let staging = out_dir.join(format!(".{}.partial-{}", b.scenario.name, std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    let staged = (|| -> Result<()> {
        fs::create_dir(&staging)?;
        for (name, contents) in &files {
            fs::write(staging.join(name), contents)?;
        }
        if target.exists() {
            fs::remove_dir_all(&target)?;
        }
        fs::rename(&staging, &target)?;
        Ok(())
    })();
    if staged.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    staged.map(|_| target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{preset, run_scenario, Scenario};

    fn bundle(name: &str) -> Bundle {
        let mut spec = preset(name).unwrap();
        spec.n_photons = 2000;
        run_scenario(&Scenario::from_spec(&spec).unwrap()).unwrap()
    }

    #[test]
    fn summary_round_trips_through_toml() {
        for name in ["afshar-grid", "partial-tag"] {
            let s = Summary::new(&bundle(name), true);
            let text = s.to_toml().unwrap();
            assert_eq!(Summary::from_toml(&text).unwrap(), s, "{text}");
        }
    }

    #[test]
    fn fallacy_only_on_request_and_labelled() {
        let b = bundle("afshar-grid");
        assert!(Summary::new(&b, false).fallacious_half_population.is_none());
        let s = Summary::new(&b, true);
        let row = s.fallacious_half_population.as_ref().unwrap();
        assert_eq!(row.sum_of_squares, 2.0);
        let csv = s.to_delimited().unwrap();
        let fallacy_rows: Vec<&str> = csv.lines().filter(|l| l.contains("sum_of_squares,2e0")).collect();
        assert_eq!(fallacy_rows, vec!["fallacious_half_population,sum_of_squares,2e0"]);
    }

    #[test]
    fn events_interleave_absorbed_photons() {
        let mut spec = preset("one-pinhole").unwrap();
        spec.n_photons = 5000;
        let b = run_scenario(&Scenario::from_spec(&spec).unwrap()).unwrap();
        let files = render(&b, EmitOptions::default()).unwrap();
        let events = &files.iter().find(|f| f.0 == "events.csv").unwrap().1;
        let ids: Vec<u64> = events.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
        assert_eq!(ids, (0..5000).collect::<Vec<_>>());
        assert_eq!(events.lines().filter(|l| l.ends_with(",,absorbed")).count() as u64, b.run.n_absorbed_by_wires());
    }

    #[test]
    fn write_replaces_whole_directory() {
        let dir = tempfile::tempdir().unwrap();
        let b = bundle("no-grid");
        let path = write_bundle(&b, dir.path(), EmitOptions::default()).unwrap();
        fs::write(path.join("stale.txt"), "x").unwrap();
        let path =
            write_bundle(&b, dir.path(), EmitOptions { format: Format::Delimited, emit_fallacy: false }).unwrap();
        let mut names: Vec<String> =
            fs::read_dir(&path).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        names.sort();
        assert_eq!(names, ["events.csv", "field.csv", "focal.csv", "summary.csv"]);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
