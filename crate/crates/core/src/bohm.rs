//! De Broglie–Bohm trajectories through the lens volume.
//!
//! The field between the planes is propagated paraxially with the angular
//! spectrum method: free space is the transfer function
//! `exp(-i·q²·z/(2k₀))`, the lens is the thin phase `exp(-i·k₀·x²/(2f))`.
//! A photon at `(z, x)` moves with slope `dx/dz = Im(∂ₓψ/ψ)/k₀`.
//!
//! This guidance law is an interpretive model. It is used here to exhibit
//! the connectivity of the paths (which aperture feeds which image spot) and
//! the fact that paths never cross, not to predict anything measurable.
//!
//! Tracing uses a [`Volume`]: slopes and magnitudes cached on
//! [`CACHED_PLANES`] planes, interpolated linearly in `x` and `z`.

use std::f64::consts::PI;
use std::sync::Arc;
use std::thread;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::model::{Grid, OpticalSystem, Plane, SampledField, Spot, TwoPinholeConfig};
use crate::optics::{self, SpotWindows};

/// Number of transverse planes held by a [`Volume`], split evenly before and after the lens.
pub const CACHED_PLANES: usize = 512;

/// `|ψ|` below this fraction of the plane maximum counts as a node.
pub const NODE_THRESHOLD: f64 = 1e-12;

/// Refinement of the cached transverse grid over the propagation grid.
pub const UPSAMPLING: usize = 4;

/// Largest number of step halvings before a trajectory is given up.
pub const MAX_STEP_HALVINGS: u32 = 8;

/// The integration step may not exceed this fraction of `p + p′`.
pub const MAX_STEP_FRACTION: f64 = 1.0 / 2000.0;

/// Smallest ensemble accepted by [`Volume::ensemble`].
pub const MIN_ENSEMBLE: usize = 100;

/// Local error allowed per accepted step, in transverse grid cells.
const STEP_TOLERANCE_CELLS: f64 = 1e-4;

/// χ² critical value at the 1% level for one degree of freedom.
const CHI2_CRITICAL_1DF: f64 = 6.635;

struct Propagator {
    k0: f64,
    q2: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    fine_inverse: Arc<dyn Fft<f64>>,
}

impl Propagator {
    fn new(grid: &Grid, k0: f64) -> Self {
        let n = grid.len();
        let dq = 2.0 * PI / (n as f64 * grid.step());
        let q2 = (0..n)
            .map(|m| {
                let q = if m < n / 2 { m as f64 } else { m as f64 - n as f64 } * dq;
                q * q
            })
            .collect();
        let mut planner = FftPlanner::new();
        Self {
            k0,
            q2,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            fine_inverse: planner.plan_fft_inverse(n * UPSAMPLING),
        }
    }

    fn spectrum(&self, values: &[Complex64], dz: f64) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward.process(&mut buf);
        let norm = 1.0 / buf.len() as f64;
        for (v, q2) in buf.iter_mut().zip(&self.q2) {
            *v *= Complex64::from_polar(norm, -q2 * dz / (2.0 * self.k0));
        }
        buf
    }

    fn propagate(&self, values: &[Complex64], dz: f64) -> Vec<Complex64> {
        if dz == 0.0 {
            return values.to_vec();
        }
        let mut buf = self.spectrum(values, dz);
        self.inverse.process(&mut buf);
        buf
    }

    /// Propagates and resamples on a grid [`UPSAMPLING`] times finer by
    /// zero-padding the spectrum; the Nyquist bin is split between both ends.
    fn propagate_fine(&self, values: &[Complex64], dz: f64) -> Vec<Complex64> {
        let spectrum = self.spectrum(values, dz);
        let n = spectrum.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); n * UPSAMPLING];
        buf[..n / 2].copy_from_slice(&spectrum[..n / 2]);
        buf[n * UPSAMPLING - n / 2 + 1..].copy_from_slice(&spectrum[n / 2 + 1..]);
        buf[n / 2] = spectrum[n / 2] / 2.0;
        buf[n * UPSAMPLING - n / 2] = spectrum[n / 2] / 2.0;
        self.fine_inverse.process(&mut buf);
        buf
    }
}

fn lens_phase(values: &mut [Complex64], grid: &Grid, k0: f64, f: f64) {
    for (j, v) in values.iter_mut().enumerate() {
        let x = grid.at(j);
        *v *= Complex64::from_polar(1.0, -k0 * x * x / (2.0 * f));
    }
}

fn check_system(cfg: &TwoPinholeConfig, sys: &OpticalSystem) -> Result<Grid> {
    let grid = optics::default_aperture_grid(cfg)?;
    // the lens phase gradient k₀x/f reaches the grid's Nyquist limit at this |x|
    let reach = sys.focal_length() * sys.wavelength() / (2.0 * grid.step());
    if reach < cfg.separation() {
        return Err(Error::InsufficientSampling(format!(
            "lens phase aliases beyond |x| = {reach:e} m, inside the beam at d = {:e} m",
            cfg.separation()
        )));
    }
    Ok(grid)
}

/// Transverse field at axial position `z`, with the apertures at `z = 0`, the
/// lens at `z = p` and the image plane at `z = p + p′`.
///
/// The field is sampled on the default aperture grid. Slices before the lens
/// are tagged [`Plane::Aperture`], slices at or beyond it [`Plane::Image`]; at
/// `z = p` the lens phase has been applied.
pub fn field_in_volume(cfg: &TwoPinholeConfig, sys: &OpticalSystem, z: f64) -> Result<SampledField> {
    let length = sys.object_distance() + sys.image_distance();
    if !(0.0..=length).contains(&z) {
        return Err(Error::OutOfDomain(format!("z = {z} outside [0, {length}]")));
    }
    let grid = check_system(cfg, sys)?;
    let prop = Propagator::new(&grid, sys.wavenumber());
    let aperture = optics::aperture_field(cfg, &grid)?;
    let p = sys.object_distance();
    if z < p {
        return SampledField::new(Plane::Aperture, grid, prop.propagate(aperture.values(), z));
    }
    let mut lens = prop.propagate(aperture.values(), p);
    lens_phase(&mut lens, &grid, sys.wavenumber(), sys.focal_length());
    SampledField::new(Plane::Image, grid, prop.propagate(&lens, z - p))
}

/// Largest deviation between the volume intensity at `z = p + f` and the
/// model focal intensity `(k₀/f)·|ψ(k)|²` at `k = -k₀·x/f`, relative to its peak.
///
/// Only positions whose `k` lies inside the sampled band are compared.
pub fn focal_plane_mismatch(cfg: &TwoPinholeConfig, sys: &OpticalSystem) -> Result<f64> {
    let f = sys.focal_length();
    let k0 = sys.wavenumber();
    let field = field_in_volume(cfg, sys, sys.object_distance() + f)?;
    let grid = *field.grid();
    let band = PI / grid.step();
    let (xs, ks): (Vec<f64>, Vec<f64>) =
        grid.points().map(|x| (x, -k0 * x / f)).filter(|(_, k)| k.abs() < band).unzip();
    let model: Vec<f64> = optics::analytic_focal_intensity(cfg, &grid, &ks).into_iter().map(|i| i * k0 / f).collect();
    let peak = model.iter().cloned().fold(0.0, f64::max);
    let intensity = field.intensity();
    let worst = xs
        .iter()
        .zip(&model)
        .map(|(x, m)| (intensity[grid.nearest(*x).expect("point of the grid")] - m).abs())
        .fold(0.0, f64::max);
    Ok(worst / peak)
}

/// Largest difference between the spot-window powers of the volume field at
/// `z = p + p′` and those of the ideal image, relative to the total power.
pub fn image_plane_mismatch(cfg: &TwoPinholeConfig, sys: &OpticalSystem) -> Result<f64> {
    let field = field_in_volume(cfg, sys, sys.object_distance() + sys.image_distance())?;
    let aperture = optics::aperture_field(cfg, field.grid())?;
    let ideal = optics::to_image_plane(&optics::to_focal_plane(&aperture)?, sys)?;
    let a = optics::spot_intensities(&field, cfg, sys)?;
    let b = optics::spot_intensities(&ideal, cfg, sys)?;
    Ok((a.spot1 - b.spot1).abs().max((a.spot2 - b.spot2).abs()) / b.total())
}

/// Phase slope `Im(∂ₓψ/ψ)/k₀` at every interior sample, from the phase
/// increments to both neighbours. Exact for a plane wave `e^{iqx}` with `|q·dx| < π`.
fn slopes(values: &[Complex64], dx: f64, k0: f64, range: std::ops::Range<usize>) -> Vec<f64> {
    range
        .map(|j| {
            let ahead = (values[j + 1] * values[j].conj()).arg();
            let behind = (values[j] * values[j - 1].conj()).arg();
            (ahead + behind) / (2.0 * dx * k0)
        })
        .collect()
}

/// Guidance slope `dx/dz` of `field` at `x`, for a field of wavenumber `k0`.
///
/// Slopes at the two neighbouring samples are interpolated linearly, and so is
/// `|ψ|`; an interpolated `|ψ|` below [`NODE_THRESHOLD`] of the maximum is a node.
pub fn guidance_velocity(field: &SampledField, k0: f64, x: f64) -> Result<f64> {
    let grid = field.grid();
    let u = (x - grid.start()) / grid.step();
    if !(u >= 1.0 && u < (grid.len() - 2) as f64) {
        return Err(Error::OutOfDomain(format!("x = {x} too close to the grid edge")));
    }
    let j = u.floor() as usize;
    let t = u - j as f64;
    let values = field.values();
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let magnitude = (1.0 - t) * values[j].norm() + t * values[j + 1].norm();
    if magnitude < NODE_THRESHOLD * peak {
        return Err(Error::NearNode { x, magnitude });
    }
    let s = slopes(values, grid.step(), k0, j..j + 2);
    Ok((1.0 - t) * s[0] + t * s[1])
}

/// A traced path from the aperture plane to the image plane.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start_x: f64,
    /// `(z, x)` at every cached plane, `z` strictly increasing.
    pub samples: Vec<(f64, f64)>,
    /// Image window reached, or `None` when the path ran into a node.
    pub endpoint_spot: Option<Spot>,
}

impl Trajectory {
    pub fn is_resolved(&self) -> bool {
        self.endpoint_spot.is_some()
    }

    pub fn end_x(&self) -> f64 {
        self.samples.last().map_or(self.start_x, |s| s.1)
    }
}

/// Current and density sampled on one uniform transverse grid.
struct Layer {
    start: f64,
    step: f64,
    /// `ρ·dx/dz`, the transverse probability current over `k₀`.
    current: Vec<f32>,
    /// `ρ = |ψ|²` relative to the plane maximum.
    density: Vec<f32>,
}

impl Layer {
    fn new(values: &[Complex64], grid: &Grid, range: std::ops::Range<usize>, k0: f64, peak: f64) -> Self {
        let density: Vec<f64> = values[range.clone()].iter().map(|v| v.norm_sqr() / peak).collect();
        let current =
            slopes(values, grid.step(), k0, range.clone()).iter().zip(&density).map(|(s, r)| (s * r) as f32).collect();
        Self {
            start: grid.at(range.start),
            step: grid.step(),
            current,
            density: density.into_iter().map(|r| r as f32).collect(),
        }
    }

    /// Cell index and fraction of `x`, if it lies inside the layer.
    fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let u = (x - self.start) / self.step;
        (u >= 0.0 && u < (self.density.len() - 1) as f64).then(|| (u.floor() as usize, u - u.floor()))
    }

    fn at(&self, j: usize, t: f64) -> (f64, f64) {
        let lerp = |v: &[f32]| (1.0 - t) * f64::from(v[j]) + t * f64::from(v[j + 1]);
        (lerp(&self.current), lerp(&self.density))
    }
}

struct CachedPlane {
    z: f64,
    /// Upsampled samples over `|x| ≤ 2d`.
    fine: Layer,
    /// Propagation-grid samples over the whole grid.
    coarse: Layer,
}

/// Probability current and density of the field on [`CACHED_PLANES`] planes.
///
/// Within `|x| ≤ 2d` the cache holds [`UPSAMPLING`] times the propagation
/// resolution; further out it falls back to the propagation grid. Paths
/// leaving the grid fail with [`Error::EscapedDomain`].
pub struct Volume {
    cfg: TwoPinholeConfig,
    sys: OpticalSystem,
    grid: Grid,
    before: Vec<CachedPlane>,
    after: Vec<CachedPlane>,
}

enum Stop {
    Node,
    Escaped(f64, f64),
}

impl Volume {
    pub fn new(cfg: &TwoPinholeConfig, sys: &OpticalSystem) -> Result<Self> {
        let grid = check_system(cfg, sys)?;
        let k0 = sys.wavenumber();
        let prop = Propagator::new(&grid, k0);
        let aperture = optics::aperture_field(cfg, &grid)?;
        let fine_grid = Grid::centered(grid.len() * UPSAMPLING, grid.step() / UPSAMPLING as f64)?;
        let center = fine_grid.len() / 2;
        let half = ((2.0 * cfg.separation() / fine_grid.step()).ceil() as usize).min(center - 1);
        let per_side = CACHED_PLANES / 2;
        let cache = |source: &[Complex64], dz: f64, z: f64| {
            let values = prop.propagate_fine(source, dz);
            let peak = values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
            let coarse: Vec<Complex64> = values.iter().step_by(UPSAMPLING).copied().collect();
            CachedPlane {
                z,
                fine: Layer::new(&values, &fine_grid, center - half..center + half + 1, k0, peak),
                coarse: Layer::new(&coarse, &grid, 1..grid.len() - 1, k0, peak),
            }
        };
        let (p, q) = (sys.object_distance(), sys.image_distance());
        let before: Vec<CachedPlane> = (0..per_side)
            .map(|i| {
                // edge diffraction grows like √z, so planes crowd toward the apertures
                let u = i as f64 / (per_side - 1) as f64;
                let z = p * u * u;
                cache(aperture.values(), z, z)
            })
            .collect();
        let mut lens = prop.propagate(aperture.values(), p);
        lens_phase(&mut lens, &grid, k0, sys.focal_length());
        let after: Vec<CachedPlane> = (0..per_side)
            .map(|i| {
                let dz = q * i as f64 / (per_side - 1) as f64;
                cache(&lens, dz, p + dz)
            })
            .collect();
        Ok(Self { cfg: *cfg, sys: *sys, grid, before, after })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn length(&self) -> f64 {
        self.sys.object_distance() + self.sys.image_distance()
    }

    /// Axial positions at which trajectories are sampled.
    pub fn sample_planes(&self) -> Vec<f64> {
        self.before.iter().chain(&self.after[1..]).map(|c| c.z).collect()
    }

    /// Slope at `(z, x)` with `z` between `planes[i]` and `planes[i + 1]`.
    fn slope(&self, planes: &[CachedPlane], i: usize, z: f64, x: f64) -> std::result::Result<f64, Stop> {
        let (a, b) = (&planes[i], &planes[i + 1]);
        let s = (z - a.z) / (b.z - a.z);
        let ((ca, ra), (cb, rb)) = if let Some((j, t)) = a.fine.locate(x) {
            (a.fine.at(j, t), b.fine.at(j, t))
        } else if let Some((j, t)) = a.coarse.locate(x) {
            (a.coarse.at(j, t), b.coarse.at(j, t))
        } else {
            return Err(Stop::Escaped(z, x));
        };
        let density = (1.0 - s) * ra + s * rb;
        if density < NODE_THRESHOLD * NODE_THRESHOLD {
            return Err(Stop::Node);
        }
        Ok(((1.0 - s) * ca + s * cb) / density)
    }

    fn rk4(&self, planes: &[CachedPlane], i: usize, z: f64, x: f64, h: f64) -> std::result::Result<f64, Stop> {
        let k1 = self.slope(planes, i, z, x)?;
        let k2 = self.slope(planes, i, z + h / 2.0, x + h / 2.0 * k1)?;
        let k3 = self.slope(planes, i, z + h / 2.0, x + h / 2.0 * k2)?;
        let k4 = self.slope(planes, i, z + h, x + h * k3)?;
        Ok(x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    }

    /// Carries `x` across `planes[i]..planes[i + 1]` with step-doubling RK4.
    fn cross(&self, planes: &[CachedPlane], i: usize, x: f64, step: f64) -> std::result::Result<f64, Stop> {
        let (za, zb) = (planes[i].z, planes[i + 1].z);
        let pieces = ((zb - za) / step).ceil().max(1.0);
        let base = (zb - za) / pieces;
        let tol = STEP_TOLERANCE_CELLS * self.grid.step();
        let (mut z, mut x, mut level) = (za, x, 0u32);
        while zb - z > 1e-12 * base {
            let h = (base / f64::from(1u32 << level)).min(zb - z);
            let attempt = self.rk4(planes, i, z, x, h).and_then(|full| {
                let mid = self.rk4(planes, i, z, x, h / 2.0)?;
                let fine = self.rk4(planes, i, z + h / 2.0, mid, h / 2.0)?;
                Ok((fine, (fine - full).abs()))
            });
            match attempt {
                Ok((next, err)) if err <= tol || level == MAX_STEP_HALVINGS => {
                    z += h;
                    x = next;
                    level = level.saturating_sub(1);
                }
                Ok(_) | Err(Stop::Node) if level < MAX_STEP_HALVINGS => level += 1,
                Err(stop) => return Err(stop),
                Ok(_) => unreachable!("accepted above at the finest level"),
            }
        }
        Ok(x)
    }

    /// Integrates one path from `start_x` on the aperture plane to the image plane.
    ///
    /// `step` is the base axial step; it must not exceed [`MAX_STEP_FRACTION`]
    /// of `p + p′`. A path that meets a node even at the finest step comes back
    /// unresolved, with the samples reached so far.
    pub fn trace(&self, start_x: f64, step: f64) -> Result<Trajectory> {
        let limit = MAX_STEP_FRACTION * self.length();
        if !(step > 0.0 && step <= limit * (1.0 + 1e-12)) {
            return Err(Error::PreconditionViolated(format!("step {step} must lie in (0, {limit}]")));
        }
        let (d, w) = (self.cfg.separation(), self.cfg.pinhole_width());
        let inside = |c: f64| (start_x - c).abs() <= w / 2.0 + self.grid.step() / 2.0;
        if !(inside(d / 2.0) || inside(-d / 2.0)) {
            return Err(Error::PreconditionViolated(format!("start x = {start_x} is outside both pinholes")));
        }
        let mut samples = Vec::with_capacity(CACHED_PLANES);
        samples.push((0.0, start_x));
        let mut x = start_x;
        for planes in [&self.before, &self.after] {
            for i in 0..planes.len() - 1 {
                match self.cross(planes, i, x, step) {
                    Ok(next) => {
                        x = next;
                        samples.push((planes[i + 1].z, x));
                    }
                    Err(Stop::Node) => return Ok(Trajectory { start_x, samples, endpoint_spot: None }),
                    Err(Stop::Escaped(z, x)) => return Err(Error::EscapedDomain { z, x }),
                }
            }
        }
        let windows = SpotWindows::new(&self.cfg, &self.sys)?;
        Ok(Trajectory { start_x, samples, endpoint_spot: Some(windows.classify(x)) })
    }

    /// Traces every start point in parallel; output order follows `starts`.
    pub fn trace_all(&self, starts: &[f64], step: f64) -> Result<Vec<Trajectory>> {
        let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(starts.len().max(1));
        let chunk = starts.len().div_ceil(workers).max(1);
        thread::scope(|s| {
            let handles: Vec<_> = starts
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(|&x| self.trace(x, step)).collect::<Result<Vec<_>>>()))
                .collect();
            let mut out = Vec::with_capacity(starts.len());
            for h in handles {
                out.extend(h.join().expect("tracing worker panicked")?);
            }
            Ok(out)
        })
    }

    /// `n` start points drawn from the aperture intensity, restricted to
    /// `x > 0` (pinhole 1), `x < 0` (pinhole 2) or unrestricted.
    pub fn launch_points(&self, n: usize, seed: u64, side: Option<Spot>) -> Result<Vec<f64>> {
        let aperture = optics::aperture_field(&self.cfg, &self.grid)?;
        let weights: Vec<f64> = aperture
            .intensity()
            .into_iter()
            .zip(self.grid.points())
            .map(|(i, x)| match side {
                Some(Spot::Spot1) if x <= 0.0 => 0.0,
                Some(Spot::Spot2) if x >= 0.0 => 0.0,
                _ => i,
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidState("no aperture intensity on the requested side".into()));
        }
        let mut cdf = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w / total;
            cdf.push(acc);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = |rng: &mut ChaCha8Rng| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        Ok((0..n)
            .map(|_| {
                let u = unit(&mut rng);
                let j = cdf.partition_point(|c| *c <= u).min(cdf.len() - 1);
                self.grid.at(j) + (unit(&mut rng) - 0.5) * self.grid.step()
            })
            .collect())
    }

    /// Traces `n` paths launched from the aperture intensity and checks them.
    pub fn ensemble(&self, n: usize, seed: u64, step: f64) -> Result<(Vec<Trajectory>, EnsembleReport)> {
        if n < MIN_ENSEMBLE {
            return Err(Error::InsufficientStatistics(format!("{n} trajectories, need {MIN_ENSEMBLE}")));
        }
        let starts = self.launch_points(n, seed, None)?;
        let trajectories = self.trace_all(&starts, step)?;
        let report = self.report(&trajectories)?;
        Ok((trajectories, report))
    }

    /// Endpoint statistics, ordering and equivariance of a set of paths.
    pub fn report(&self, trajectories: &[Trajectory]) -> Result<EnsembleReport> {
        let mut counts = [0u64; 3];
        let mut wrong_side = (0u64, 0u64);
        for t in trajectories {
            match t.endpoint_spot {
                Some(Spot::Spot1) => counts[0] += 1,
                Some(Spot::Spot2) => counts[1] += 1,
                Some(_) => counts[2] += 1,
                None => continue,
            }
            if t.start_x != 0.0 {
                wrong_side.1 += 1;
                let expected = if t.start_x > 0.0 { Spot::Spot2 } else { Spot::Spot1 };
                if t.endpoint_spot == Some(expected) {
                    wrong_side.0 += 1;
                }
            }
        }
        let resolved = counts.iter().sum::<u64>();
        let image = field_in_volume(&self.cfg, &self.sys, self.length())?;
        let weights = optics::spot_intensities(&image, &self.cfg, &self.sys)?;
        let expected1 = weights.spot1 / (weights.spot1 + weights.spot2);
        let in_windows = (counts[0] + counts[1]) as f64;
        let chi_square = if in_windows > 0.0 {
            let e1 = expected1 * in_windows;
            let e2 = in_windows - e1;
            (counts[0] as f64 - e1).powi(2) / e1 + (counts[1] as f64 - e2).powi(2) / e2
        } else {
            f64::INFINITY
        };
        Ok(EnsembleReport {
            n: trajectories.len(),
            resolved: resolved as usize,
            spot1: counts[0],
            spot2: counts[1],
            stray: counts[2],
            expected_spot1_fraction: expected1,
            chi_square,
            wrong_detector_fraction: if wrong_side.1 > 0 { wrong_side.0 as f64 / wrong_side.1 as f64 } else { 0.0 },
            crossings: crossings(trajectories, self.grid.step()),
        })
    }
}

/// Summary of a traced ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleReport {
    pub n: usize,
    pub resolved: usize,
    pub spot1: u64,
    pub spot2: u64,
    pub stray: u64,
    /// `spot1 / (spot1 + spot2)` predicted by the image-plane `|ψ|²`.
    pub expected_spot1_fraction: f64,
    /// Pearson χ² of the window counts against that prediction, one degree of freedom.
    pub chi_square: f64,
    /// Fraction of resolved paths ending in the window on their own side of the axis.
    pub wrong_detector_fraction: f64,
    /// Sampled planes at which some pair of resolved paths swapped order by more than one cell.
    pub crossings: usize,
}

impl EnsembleReport {
    /// Whether the window counts pass the χ² test at the 1% level.
    pub fn is_equivariant(&self) -> bool {
        self.chi_square <= CHI2_CRITICAL_1DF
    }
}

/// Counts sampled planes where two resolved paths, ordered by start, appear
/// in the opposite order by more than `tolerance`.
pub fn crossings(trajectories: &[Trajectory], tolerance: f64) -> usize {
    let mut resolved: Vec<&Trajectory> = trajectories.iter().filter(|t| t.is_resolved()).collect();
    resolved.sort_by(|a, b| a.start_x.total_cmp(&b.start_x));
    let Some(first) = resolved.first() else { return 0 };
    (0..first.samples.len())
        .filter(|&s| {
            let mut highest = f64::NEG_INFINITY;
            resolved.iter().any(|t| {
                let x = t.samples[s].1;
                let crossed = x < highest - tolerance;
                highest = highest.max(x);
                crossed
            })
        })
        .count()
}

/// Builds a [`Volume`] and traces a single path; see [`Volume::trace`].
pub fn trace(cfg: &TwoPinholeConfig, sys: &OpticalSystem, start_x: f64, step: f64) -> Result<Trajectory> {
    Volume::new(cfg, sys)?.trace(start_x, step)
}

/// Builds a [`Volume`] and traces an ensemble; see [`Volume::ensemble`].
pub fn ensemble(
    cfg: &TwoPinholeConfig,
    sys: &OpticalSystem,
    n: usize,
    seed: u64,
) -> Result<(Vec<Trajectory>, EnsembleReport)> {
    let volume = Volume::new(cfg, sys)?;
    let step = MAX_STEP_FRACTION * volume.length();
    volume.ensemble(n, seed, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AmplitudePair;

    const D: f64 = 4e-3;

    fn setup(c1: f64, c2: f64) -> (TwoPinholeConfig, OpticalSystem) {
        let cfg = TwoPinholeConfig::new(D, 65.0 * D / 1024.0, AmplitudePair::real(c1, c2).unwrap()).unwrap();
        let sys = OpticalSystem::from_conjugates(0.4, 0.4, 500e-9).unwrap();
        (cfg, sys)
    }

    #[test]
    fn start_of_volume_is_the_aperture_field() {
        let (cfg, sys) = setup(1.0, 1.0);
        let field = field_in_volume(&cfg, &sys, 0.0).unwrap();
        let aperture = optics::aperture_field(&cfg, field.grid()).unwrap();
        for (a, b) in field.values().iter().zip(aperture.values()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn z_outside_volume_is_rejected() {
        let (cfg, sys) = setup(1.0, 1.0);
        assert!(matches!(field_in_volume(&cfg, &sys, -1e-3), Err(Error::OutOfDomain(_))));
        assert!(matches!(field_in_volume(&cfg, &sys, 0.81), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn plane_wave_slope() {
        let grid = Grid::centered(256, 1e-6).unwrap();
        let (q, k0) = (3.0e5, 1.2e7);
        let values = grid.points().map(|x| Complex64::from_polar(1.0, q * x)).collect();
        let field = SampledField::new(Plane::Aperture, grid, values).unwrap();
        for x in [-1e-4, 0.0, 3.3e-5] {
            let v = guidance_velocity(&field, k0, x).unwrap();
            assert!((v - q / k0).abs() < 1e-12 * (q / k0), "{v}");
        }
    }

    #[test]
    fn real_field_has_zero_slope() {
        let grid = Grid::centered(64, 1e-6).unwrap();
        let values = grid.points().map(|x| Complex64::new((1e5 * x).cos() + 2.0, 0.0)).collect();
        let field = SampledField::new(Plane::Aperture, grid, values).unwrap();
        assert_eq!(guidance_velocity(&field, 1e7, 5e-6).unwrap(), 0.0);
    }

    #[test]
    fn node_is_reported() {
        let grid = Grid::centered(64, 1.0).unwrap();
        let values = grid.points().map(|x| Complex64::new(x, 0.0)).collect();
        let field = SampledField::new(Plane::Aperture, grid, values).unwrap();
        assert!(matches!(guidance_velocity(&field, 1.0, 0.0), Err(Error::NearNode { .. })));
    }

    #[test]
    fn symmetric_axis_is_stationary() {
        let (cfg, sys) = setup(1.0, 1.0);
        let field = field_in_volume(&cfg, &sys, 0.3).unwrap();
        assert!(guidance_velocity(&field, sys.wavenumber(), 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn volume_matches_fourier_model_at_focal_plane() {
        let (cfg, sys) = setup(1.0, 1.0);
        let mismatch = focal_plane_mismatch(&cfg, &sys).unwrap();
        assert!(mismatch < 1e-3, "{mismatch}");
    }

    #[test]
    fn volume_matches_ideal_image_windows() {
        let (cfg, sys) = setup(1.0, 0.6);
        let mismatch = image_plane_mismatch(&cfg, &sys).unwrap();
        assert!(mismatch < 1e-3, "{mismatch}");
    }

    #[test]
    fn step_and_start_preconditions() {
        let (cfg, sys) = setup(1.0, 1.0);
        let volume = Volume::new(&cfg, &sys).unwrap();
        assert!(volume.trace(D / 2.0, 1e-3).is_err());
        assert!(volume.trace(0.0, 4e-4).is_err());
        assert!(volume.ensemble(10, 0, 4e-4).is_err());
    }

    #[test]
    fn mirrored_starts_give_mirrored_paths() {
        let (cfg, sys) = setup(1.0, 1.0);
        let volume = Volume::new(&cfg, &sys).unwrap();
        let x0 = D / 2.0 + 0.3 * cfg.pinhole_width();
        let a = volume.trace(x0, 4e-4).unwrap();
        let b = volume.trace(-x0, 4e-4).unwrap();
        assert_eq!(a.endpoint_spot, Some(Spot::Spot2));
        assert_eq!(b.endpoint_spot, Some(Spot::Spot1));
        for (p, q) in a.samples.iter().zip(&b.samples) {
            assert_eq!(p.0, q.0);
            assert!((p.1 + q.1).abs() < 1e-6 * D, "{p:?} {q:?}");
        }
        assert!(a.samples.windows(2).all(|s| s[1].0 > s[0].0));
    }

    #[test]
    fn open_pinhole_images_geometrically() {
        let (cfg, sys) = setup(1.0, 0.0);
        let volume = Volume::new(&cfg, &sys).unwrap();
        for x0 in [D / 2.0 - 0.2 * cfg.pinhole_width(), D / 2.0 + 0.1 * cfg.pinhole_width()] {
            assert_eq!(volume.trace(x0, 4e-4).unwrap().endpoint_spot, Some(Spot::Spot1));
        }
    }
}
