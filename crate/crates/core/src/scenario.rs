//! Experiments as data: manifests, presets and the pipeline that runs them.
//!
//! A manifest holds any number of `[[scenario]]` tables. Every length carries
//! its unit in the key (`separation_m`, `positions_rad_per_m`); complex
//! numbers are `[re, im]` pairs.
//!
//! ```toml
//! [[scenario]]
//! name = "afshar-grid"
//! separation_m = 0.004
//! pinhole_width_m = 0.00025390625
//! c1 = [1.0, 0.0]
//! c2 = [1.0, 0.0]
//! focal_length_m = 0.2
//! object_distance_m = 0.4
//! wavelength_m = 5e-7
//! detection_plane = "image"
//! n_photons = 100000
//! seed = 1
//!
//! [scenario.wires]
//! at_minima = 6
//! ```

use std::collections::BTreeSet;
use std::thread;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bohm::{self, EnsembleReport, Trajectory, Volume};
use crate::duality::{self, ConditionedAmplitudes};
use crate::error::{Error, Result};
use crate::inference::{self, ProfileKind};
use crate::model::{
    AmplitudePair, DetectorGram, DualityReport, Grid, OpticalSystem, Plane, Spot, TwoPinholeConfig, WireGrid,
};
use crate::optics;
use crate::sampling::{self, RunStatistics, SpotCounts, VisibilityEstimate};

/// Relative L² change of the image, grid on versus off, above which the grid counts as disturbing.
pub const DISTURBANCE_TOLERANCE: f64 = 1e-6;

/// Absorbed fraction at or below which the wires count as dark.
pub const DARK_WIRE_TOLERANCE: f64 = 1e-6;

/// One `[[scenario]]` table as written in a manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub separation_m: f64,
    pub pinhole_width_m: f64,
    pub c1: [f64; 2],
    pub c2: [f64; 2],
    pub focal_length_m: f64,
    pub object_distance_m: f64,
    pub wavelength_m: f64,
    pub detection_plane: String,
    pub n_photons: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wires: Option<WireSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detector: Option<DetectorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bohm: Option<BohmSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy: Option<EntropySpec>,
}

/// Wires either at explicit focal wavevectors or on the innermost fringe minima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions_rad_per_m: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_minima: Option<usize>,
    #[serde(default)]
    pub half_width_rad_per_m: f64,
    #[serde(default = "one")]
    pub efficiency: f64,
}

fn one() -> f64 {
    1.0
}

/// A which-path detector, given by its Gram entries or by explicit state vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g11: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g22: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g12: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma1: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma2: Option<Vec<[f64; 2]>>,
}

/// Trajectory ensemble settings; `launch` is `"pinhole1"`, `"pinhole2"` or `"aperture"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohmSpec {
    pub trajectories: usize,
    pub launch: String,
}

/// Profile-space settings: grid sizes to compare and arbitrary profiles drawn per size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropySpec {
    pub n_grid: Vec<usize>,
    pub n_profiles: u64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    #[serde(default)]
    scenario: Vec<ScenarioSpec>,
}

/// A which-path detector ready for use.
#[derive(Debug, Clone, PartialEq)]
pub enum Detector {
    Gram(DetectorGram),
    Vectors(Vec<Complex64>, Vec<Complex64>),
}

impl Detector {
    pub fn gram(&self) -> Result<DetectorGram> {
        match self {
            Detector::Gram(g) => Ok(*g),
            Detector::Vectors(a, b) => DetectorGram::from_vectors(a, b),
        }
    }

    /// The detector states as vectors, realizing a Gram matrix in two dimensions if needed.
    pub fn vectors(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        match self {
            Detector::Gram(g) => {
                let [a, b] = g.realize();
                (a.to_vec(), b.to_vec())
            }
            Detector::Vectors(a, b) => (a.clone(), b.clone()),
        }
    }
}

/// Where trajectories start.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Launch {
    Pinhole1,
    Pinhole2,
    Aperture,
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub pinholes: TwoPinholeConfig,
    pub system: OpticalSystem,
    pub wires: Option<WireGrid>,
    pub detector: Option<Detector>,
    pub detection_plane: Plane,
    pub n_photons: u64,
    pub seed: u64,
    pub bohm: Option<(usize, Launch)>,
    pub entropy: Option<EntropySpec>,
}

fn complex(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

impl Scenario {
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Self> {
        let ctx = |e: Error| Error::Config(format!("scenario {:?}: {e}", spec.name));
        if spec.name.is_empty() || spec.name.contains(['/', '\\']) || spec.name.starts_with('.') {
            return Err(Error::Config(format!("scenario name {:?} cannot name a directory", spec.name)));
        }
        let amplitudes = AmplitudePair::new(complex(spec.c1), complex(spec.c2)).map_err(ctx)?;
        let pinholes = TwoPinholeConfig::new(spec.separation_m, spec.pinhole_width_m, amplitudes).map_err(ctx)?;
        let system = OpticalSystem::new(spec.focal_length_m, spec.object_distance_m, spec.wavelength_m).map_err(ctx)?;
        let detection_plane = Plane::parse(&spec.detection_plane).map_err(ctx)?;
        if spec.n_photons == 0 {
            return Err(ctx(Error::InsufficientStatistics("n_photons must be positive".into())));
        }
        let wires = spec.wires.as_ref().map(|w| wire_grid(w, &pinholes)).transpose().map_err(ctx)?;
        let detector = spec.detector.as_ref().map(detector).transpose().map_err(ctx)?;
        let bohm = spec
            .bohm
            .as_ref()
            .map(|b| {
                let launch = match b.launch.as_str() {
                    "pinhole1" => Launch::Pinhole1,
                    "pinhole2" => Launch::Pinhole2,
                    "aperture" => Launch::Aperture,
                    other => return Err(Error::Config(format!("unknown launch {other:?}"))),
                };
                if b.trajectories < bohm::MIN_ENSEMBLE {
                    return Err(Error::InsufficientStatistics(format!(
                        "{} trajectories, need {}",
                        b.trajectories,
                        bohm::MIN_ENSEMBLE
                    )));
                }
                Ok((b.trajectories, launch))
            })
            .transpose()
            .map_err(ctx)?;
        if let Some(e) = &spec.entropy {
            if e.n_grid.is_empty() || e.n_grid.contains(&0) {
                return Err(ctx(Error::Config("entropy.n_grid needs positive sizes".into())));
            }
        }
        Ok(Self {
            name: spec.name.clone(),
            pinholes,
            system,
            wires,
            detector,
            detection_plane,
            n_photons: spec.n_photons,
            seed: spec.seed,
            bohm,
            entropy: spec.entropy.clone(),
        })
    }
}

fn wire_grid(spec: &WireSpec, cfg: &TwoPinholeConfig) -> Result<WireGrid> {
    let positions = match (&spec.positions_rad_per_m, spec.at_minima) {
        (Some(p), None) => p.clone(),
        (None, Some(n)) => {
            // with a path closed there are no fringes; use the minima of the balanced pattern
            match optics::wire_minima_positions(cfg, n) {
                Err(Error::NoFringes(_)) => {
                    optics::wire_minima_positions(&cfg.with_amplitudes(AmplitudePair::real(1.0, 1.0)?), n)?
                }
                other => other?,
            }
        }
        _ => return Err(Error::Config("wires need exactly one of positions_rad_per_m and at_minima".into())),
    };
    WireGrid::new(positions, spec.half_width_rad_per_m, spec.efficiency)
}

fn detector(spec: &DetectorSpec) -> Result<Detector> {
    match spec {
        DetectorSpec { g11: Some(g11), g22: Some(g22), g12: Some(g12), gamma1: None, gamma2: None } => {
            Ok(Detector::Gram(DetectorGram::new(*g11, *g22, complex(*g12))?))
        }
        DetectorSpec { g11: None, g22: None, g12: None, gamma1: Some(a), gamma2: Some(b) } => {
            let (a, b): (Vec<_>, Vec<_>) =
                (a.iter().map(|v| complex(*v)).collect(), b.iter().map(|v| complex(*v)).collect());
            DetectorGram::from_vectors(&a, &b)?;
            Ok(Detector::Vectors(a, b))
        }
        _ => Err(Error::Config("detector needs either g11, g22, g12 or gamma1, gamma2".into())),
    }
}

/// Parses a manifest. Names must be unique; an empty manifest yields no scenarios.
pub fn parse_manifest(text: &str) -> Result<Vec<Scenario>> {
    let manifest: Manifest = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let mut names = BTreeSet::new();
    manifest
        .scenario
        .iter()
        .map(|spec| {
            if !names.insert(spec.name.as_str()) {
                return Err(Error::Config(format!("scenario name {:?} appears twice", spec.name)));
            }
            Scenario::from_spec(spec)
        })
        .collect()
}

/// Writes scenario specs back out as a manifest.
pub fn manifest_text(specs: &[ScenarioSpec]) -> Result<String> {
    toml::to_string(&Manifest { scenario: specs.to_vec() }).map_err(|e| Error::Config(e.to_string()))
}

/// Preset names with a one-line description each.
pub const PRESETS: &[(&str, &str)] = &[
    ("no-grid", "balanced pinholes imaged without wires"),
    ("afshar-grid", "balanced pinholes, ideal wires on the fringe minima, image-plane detection"),
    ("fringes", "balanced pinholes, focal-plane detection"),
    ("one-pinhole", "pinhole 2 closed, same wires, image-plane detection"),
    ("tagged", "orthogonal which-path detector, focal-plane detection"),
    ("partial-tag", "detector states with overlap 0.5, focal-plane detection"),
    ("bohm", "balanced pinholes, 1000 trajectories from pinhole 1"),
    ("entropy", "profile spaces consistent with the dark wires"),
];

/// Builds a preset scenario.
pub fn preset(name: &str) -> Result<ScenarioSpec> {
    let d = 4e-3;
    let mut spec = ScenarioSpec {
        name: name.to_string(),
        separation_m: d,
        pinhole_width_m: 65.0 * d / 1024.0,
        c1: [1.0, 0.0],
        c2: [1.0, 0.0],
        focal_length_m: 0.2,
        object_distance_m: 0.4,
        wavelength_m: 500e-9,
        detection_plane: "image".into(),
        n_photons: 100_000,
        seed: 1,
        wires: None,
        detector: None,
        bohm: None,
        entropy: None,
    };
    let minima = WireSpec {
        positions_rad_per_m: None,
        at_minima: Some(optics::DEFAULT_WIRE_COUNT),
        half_width_rad_per_m: 0.0,
        efficiency: 1.0,
    };
    match name {
        "no-grid" => {}
        "afshar-grid" => spec.wires = Some(minima),
        "fringes" => spec.detection_plane = "focal".into(),
        "one-pinhole" => {
            spec.c2 = [0.0, 0.0];
            spec.wires = Some(minima);
        }
        "tagged" | "partial-tag" => {
            spec.detection_plane = "focal".into();
            spec.detector = Some(if name == "tagged" {
                DetectorSpec {
                    g11: None,
                    g22: None,
                    g12: None,
                    gamma1: Some(vec![[1.0, 0.0], [0.0, 0.0]]),
                    gamma2: Some(vec![[0.0, 0.0], [1.0, 0.0]]),
                }
            } else {
                DetectorSpec { g11: Some(1.0), g22: Some(1.0), g12: Some([0.5, 0.0]), gamma1: None, gamma2: None }
            });
        }
        "bohm" => {
            spec.n_photons = 10_000;
            spec.bohm = Some(BohmSpec { trajectories: 1000, launch: "pinhole1".into() });
        }
        "entropy" => {
            spec.n_photons = 10_000;
            spec.wires = Some(minima);
            spec.entropy = Some(EntropySpec { n_grid: vec![8, 16, 32, 64], n_profiles: 20_000 });
        }
        other => {
            let known: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            return Err(Error::Config(format!("unknown preset {other:?}; known: {}", known.join(", "))));
        }
    }
    Ok(spec)
}

/// Wire-grid outcome of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOutcome {
    pub absorbed_probability: f64,
    /// Relative L² change of the image-plane intensity, grid on versus off.
    pub image_deviation: f64,
    pub disturbed: bool,
}

/// One grid size of the profile-space comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRow {
    pub n_grid: usize,
    pub free_samples: usize,
    pub entropy: f64,
    /// Chance that a uniformly drawn admissible profile is the cos profile, `e^{-S}`.
    pub match_probability: f64,
    /// Observed fraction of drawn profiles equal to the cos profile.
    pub match_fraction: f64,
}

/// Sampled profiles: `(n_grid, kind, values)`.
pub type ProfileSample = (usize, &'static str, Vec<f64>);

/// Everything a scenario run produces.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub scenario: Scenario,
    /// Exact report of the configured state, all photons counted.
    pub analytic: DualityReport,
    /// Detector-conditioned branches, empty without a detector.
    pub branches: Vec<ConditionedAmplitudes>,
    pub grid: Option<GridOutcome>,
    /// Intensity in the detection plane after any wires.
    pub plane_grid: Grid,
    pub plane_intensity: Vec<f64>,
    /// Focal-plane intensity after any wires.
    pub focal_grid: Grid,
    pub focal_intensity: Vec<f64>,
    pub run: RunStatistics,
    pub spots: Option<SpotCounts>,
    pub k_hat: Option<f64>,
    pub v_hat: Option<VisibilityEstimate>,
    /// Image spots plus dark wires, reasoned backwards, all photons counted.
    pub inferred: Option<DualityReport>,
    /// The half-population miscount, kept apart and never fed forward.
    pub fallacy: Option<DualityReport>,
    pub trajectories: Vec<Trajectory>,
    pub ensemble: Option<EnsembleReport>,
    pub entropy: Vec<EntropyRow>,
    pub profiles: Vec<ProfileSample>,
}

impl Bundle {
    /// Invariant violations found in the run; empty when all hold.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |what: &str, r: Result<()>| {
            if let Err(e) = r {
                out.push(format!("{what}: {e}"));
            }
        };
        check("analytic report", self.analytic.validate());
        for b in &self.branches {
            check(&format!("branch {}", b.lambda_index), b.report().and_then(|r| r.validate()));
        }
        if let Some(r) = &self.inferred {
            check("inferred report", r.validate());
        }
        if let Some(r) = &self.fallacy {
            check("half-population report", r.validate());
        }
        check("photon accounting", self.run.check_partition());
        if let Some(e) = &self.ensemble {
            if e.crossings > 0 {
                out.push(format!("trajectories cross at {} sampled planes", e.crossings));
            }
        }
        out
    }
}

/// The pure two-path states whose intensities add up to the detected pattern.
fn branches(s: &Scenario) -> Result<Vec<ConditionedAmplitudes>> {
    let a = s.pinholes.amplitudes();
    match &s.detector {
        None => Ok(vec![ConditionedAmplitudes { lambda_index: 0, amplitudes: a, weight: 1.0 }]),
        Some(det) => {
            let (g1, g2) = det.vectors();
            let basis: Vec<Vec<Complex64>> = (0..g1.len())
                .map(|i| (0..g1.len()).map(|j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect())
                .collect();
            duality::condition_on_projector(&a, &g1, &g2, &basis)
        }
    }
}

struct PlaneSums {
    aperture: Vec<f64>,
    focal: Vec<f64>,
    image: Vec<f64>,
    image_without_wires: Vec<f64>,
    absorbed: f64,
    incident: f64,
    aperture_grid: Grid,
    focal_grid: Grid,
    image_grid: Grid,
}

fn propagate_branches(s: &Scenario, parts: &[ConditionedAmplitudes]) -> Result<PlaneSums> {
    let aperture_grid = optics::default_aperture_grid(&s.pinholes)?;
    let n = aperture_grid.len();
    let mut sums = PlaneSums {
        aperture: vec![0.0; n],
        focal: vec![0.0; n],
        image: vec![0.0; n],
        image_without_wires: vec![0.0; n],
        absorbed: 0.0,
        incident: 0.0,
        aperture_grid,
        focal_grid: aperture_grid,
        image_grid: aperture_grid,
    };
    let add = |acc: &mut [f64], values: &[Complex64]| acc.iter_mut().zip(values).for_each(|(a, v)| *a += v.norm_sqr());
    for part in parts {
        let aperture = optics::aperture_field(&s.pinholes.with_amplitudes(part.amplitudes), &aperture_grid)?;
        let focal = optics::to_focal_plane(&aperture)?;
        sums.incident += focal.power();
        let open_image = optics::to_image_plane(&focal, &s.system)?;
        let focal = match &s.wires {
            Some(w) => {
                let hit = optics::apply_wire_grid(&focal, w)?;
                sums.absorbed += hit.absorbed_probability * focal.power();
                hit.transmitted
            }
            None => focal,
        };
        let image = optics::to_image_plane(&focal, &s.system)?;
        add(&mut sums.aperture, aperture.values());
        add(&mut sums.focal, focal.values());
        add(&mut sums.image, image.values());
        add(&mut sums.image_without_wires, open_image.values());
        sums.focal_grid = *focal.grid();
        sums.image_grid = *image.grid();
    }
    Ok(sums)
}

fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn window_powers(grid: &Grid, intensity: &[f64], s: &Scenario) -> Result<(f64, f64)> {
    let windows = optics::SpotWindows::new(&s.pinholes, &s.system)?;
    let (mut p1, mut p2) = (0.0, 0.0);
    for (x, i) in grid.points().zip(intensity) {
        match windows.classify(x) {
            Spot::Spot1 => p1 += i * grid.step(),
            Spot::Spot2 => p2 += i * grid.step(),
            _ => {}
        }
    }
    Ok((p1, p2))
}

/// Runs the full pipeline for one scenario.
///
/// Fields are propagated per detector branch and their intensities summed,
/// the wires act in the focal plane, photons are drawn in the detection plane,
/// and the estimators and reports follow from those draws.
pub fn run_scenario(s: &Scenario) -> Result<Bundle> {
    let a = s.pinholes.amplitudes();
    let analytic = match &s.detector {
        Some(det) => duality::duality_deficit(&a, &det.gram()?)?,
        None => duality::duality_report(&a)?,
    };
    let parts = branches(s)?;
    let sums = propagate_branches(s, &parts)?;
    let absorbed_fraction = if s.wires.is_some() { sums.absorbed / sums.incident } else { 0.0 };
    let grid = s.wires.as_ref().map(|_| {
        let image_deviation = relative_l2(&sums.image, &sums.image_without_wires);
        GridOutcome {
            absorbed_probability: absorbed_fraction,
            image_deviation,
            disturbed: image_deviation > DISTURBANCE_TOLERANCE,
        }
    });
    let (plane_grid, plane_intensity) = match s.detection_plane {
        Plane::Aperture => (sums.aperture_grid, sums.aperture.clone()),
        Plane::Focal => (sums.focal_grid, sums.focal.clone()),
        Plane::Image => (sums.image_grid, sums.image.clone()),
    };

    let workers = thread::available_parallelism().map_or(1, |n| n.get());
    let mut run = sampling::sample_intensity(
        s.detection_plane,
        &plane_grid,
        &plane_intensity,
        s.n_photons,
        s.seed,
        absorbed_fraction,
        workers,
    )?;
    let (mut spots, mut k_hat, mut v_hat) = (None, None, None);
    match s.detection_plane {
        Plane::Image => {
            let counts = sampling::classify_spots(&mut run, &s.pinholes, &s.system)?;
            k_hat = sampling::estimate_distinguishability(counts.spot1, counts.spot2).ok();
            spots = Some(counts);
        }
        Plane::Focal if run.events.len() >= sampling::MIN_FIT_EVENTS => {
            v_hat = Some(sampling::estimate_visibility(&run, &s.pinholes, &sums.aperture_grid, s.seed)?);
        }
        _ => {}
    }

    let (mut inferred, mut fallacy) = (None, None);
    if let (Some(w), Some(g), Plane::Image) = (&s.wires, &grid, s.detection_plane) {
        if g.absorbed_probability <= DARK_WIRE_TOLERANCE {
            let (i1, i2) = window_powers(&sums.image_grid, &sums.image, s)?;
            let report = duality::infer_from_image_and_zeros(i1, i2, w.positions(), s.pinholes.separation())?;
            fallacy = duality::fallacious_half_population_report(&AmplitudePair::real(i1.sqrt(), i2.sqrt())?).ok();
            inferred = Some(report);
        }
    }

    let (mut trajectories, mut ensemble) = (Vec::new(), None);
    if let Some((n, launch)) = s.bohm {
        let volume = Volume::new(&s.pinholes, &s.system)?;
        let side = match launch {
            Launch::Pinhole1 => Some(Spot::Spot1),
            Launch::Pinhole2 => Some(Spot::Spot2),
            Launch::Aperture => None,
        };
        let starts = volume.launch_points(n, s.seed, side)?;
        trajectories = volume.trace_all(&starts, bohm::MAX_STEP_FRACTION * volume.length())?;
        ensemble = Some(volume.report(&trajectories)?);
    }

    let (mut entropy, mut profiles) = (Vec::new(), Vec::new());
    if let Some(spec) = &s.entropy {
        for (i, &n) in spec.n_grid.iter().enumerate() {
            let (space, cos) = inference::quarter_wave_cos_family(n, s.pinholes.separation())?;
            let reference = inference::sample_profile(&space, s.seed, &cos)?;
            entropy.push(EntropyRow {
                n_grid: n,
                free_samples: space.free_samples(),
                entropy: space.entropy(),
                match_probability: (-space.entropy()).exp(),
                match_fraction: inference::match_fraction(&space, &reference, spec.n_profiles, s.seed)?,
            });
            if i == 0 {
                for (label, kind) in [
                    ("arbitrary", ProfileKind::Arbitrary),
                    ("continuous_random", ProfileKind::ContinuousRandom),
                    ("cos_family", cos.clone()),
                    ("discontinuous", ProfileKind::Discontinuous),
                ] {
                    profiles.push((n, label, inference::sample_profile(&space, s.seed, &kind)?));
                }
            }
        }
    }

    Ok(Bundle {
        scenario: s.clone(),
        analytic,
        branches: if s.detector.is_some() { parts } else { Vec::new() },
        grid,
        plane_grid,
        plane_intensity,
        focal_grid: sums.focal_grid,
        focal_intensity: sums.focal,
        run,
        spots,
        k_hat,
        v_hat,
        inferred,
        fallacy,
        trajectories,
        ensemble,
        entropy,
        profiles,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(name: &str, photons: u64) -> Scenario {
        let mut spec = preset(name).unwrap();
        spec.n_photons = photons;
        Scenario::from_spec(&spec).unwrap()
    }

    #[test]
    fn every_preset_validates() {
        for (name, _) in PRESETS {
            let spec = preset(name).unwrap();
            assert_eq!(Scenario::from_spec(&spec).unwrap().name, *name);
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn manifest_round_trip() {
        let specs: Vec<ScenarioSpec> = PRESETS.iter().map(|(n, _)| preset(n).unwrap()).collect();
        let text = manifest_text(&specs).unwrap();
        let parsed: Manifest = toml::from_str(&text).unwrap();
        assert_eq!(parsed.scenario, specs);
        assert_eq!(parse_manifest(&text).unwrap().len(), PRESETS.len());
    }

    #[test]
    fn manifest_errors() {
        assert!(parse_manifest("").unwrap().is_empty());
        let spec = preset("no-grid").unwrap();
        let twice = manifest_text(&[spec.clone(), spec.clone()]).unwrap();
        assert!(matches!(parse_manifest(&twice), Err(Error::Config(_))));
        let typo = manifest_text(&[spec]).unwrap().replace("seed", "sead");
        assert!(parse_manifest(&typo).is_err());
        let mut bad = preset("tagged").unwrap();
        bad.detector.as_mut().unwrap().g11 = Some(1.0);
        assert!(Scenario::from_spec(&bad).is_err());
    }

    #[test]
    fn afshar_grid_is_interaction_free() {
        let b = run_scenario(&small("afshar-grid", 20_000)).unwrap();
        let g = b.grid.unwrap();
        assert!(g.absorbed_probability < 1e-6, "{}", g.absorbed_probability);
        assert!(!g.disturbed);
        assert!(b.k_hat.unwrap() < 0.05);
        let inferred = b.inferred.unwrap();
        assert!(inferred.k() < 1e-9 && (inferred.v() - 1.0).abs() < 1e-9);
        assert!((inferred.sum_of_squares() - 1.0).abs() < 1e-9);
        assert_eq!(b.fallacy.unwrap().sum_of_squares(), 2.0);
        assert!(b.violations().is_empty(), "{:?}", b.violations());
    }

    #[test]
    fn closed_pinhole_is_disturbed() {
        let b = run_scenario(&small("one-pinhole", 20_000)).unwrap();
        let g = b.grid.unwrap();
        assert!(g.absorbed_probability > 1e-3);
        assert!(g.disturbed);
        assert!(b.inferred.is_none() && b.fallacy.is_none());
        assert!(b.run.n_absorbed_by_wires() > 0);
    }

    #[test]
    fn tagged_paths_lose_fringes() {
        let b = run_scenario(&small("tagged", 100_000)).unwrap();
        assert!(b.v_hat.unwrap().v < 0.02);
        assert_eq!(b.branches.len(), 2);
        for br in &b.branches {
            let r = br.report().unwrap();
            assert_eq!(r.k(), 1.0);
            assert_eq!(r.v(), 0.0);
        }
    }

    #[test]
    fn forged_report_is_a_violation() {
        let mut b = run_scenario(&small("no-grid", 1000)).unwrap();
        assert!(b.violations().is_empty());
        b.analytic = DualityReport::from_parts(1.0, 1.0, None, 0.0, crate::model::Accounting::AllPhotons);
        assert_eq!(b.violations().len(), 1);
    }
}
