//! Monte Carlo photon detection and finite-statistics estimators.
//!
//! Photons are independent. Each one is first offered to the wires (absorbed
//! with the grid's absorption probability) and otherwise detected at a
//! position drawn from the normalized plane intensity by inverse-CDF sampling
//! with uniform jitter inside the chosen bin.
//!
//! The generator is ChaCha8 seeded from a `u64`. Photon `i` always consumes
//! the same three 64-bit draws at a fixed keystream offset, so results do not
//! depend on how the photon range is split between workers.

use std::collections::HashSet;
use std::thread;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{wrap_phase, DetectionEvent, Grid, OpticalSystem, Plane, SampledField, Spot, TwoPinholeConfig};
use crate::optics::{self, SpotWindows};

/// Name of the random generator recorded in reports.
pub const RNG_NAME: &str = "ChaCha8";

/// 32-bit keystream words consumed per photon (three `u64` draws).
const WORDS_PER_PHOTON: u128 = 6;

/// Bootstrap resamples behind the visibility standard error.
pub const BOOTSTRAP_RESAMPLES: usize = 64;

/// Envelope level, relative to its peak, below which focal bins are not fitted.
pub const ENVELOPE_FLOOR: f64 = 1e-4;

const IRLS_ITERATIONS: usize = 4;

/// Lower bound on the fitted fringe shape when forming Poisson weights.
const IRLS_MEAN_FLOOR: f64 = 1e-3;

/// Fewest focal events accepted by [`estimate_visibility`].
pub const MIN_FIT_EVENTS: usize = 100;

/// Accumulated detections of one run in one plane.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStatistics {
    pub n_emitted: u64,
    /// Photons taken out by the wires, by id.
    pub absorbed: Vec<u64>,
    /// Detected photons, sorted by id.
    pub events: Vec<DetectionEvent>,
    pub plane: Plane,
    /// Grid the positions were drawn on.
    pub grid: Grid,
    pub seed: u64,
}

impl RunStatistics {
    pub fn n_absorbed_by_wires(&self) -> u64 {
        self.absorbed.len() as u64
    }

    /// Checks `n_emitted = n_absorbed + |events|` and that every photon id
    /// `0..n_emitted` occurs exactly once across absorbed and detected records.
    pub fn check_partition(&self) -> Result<()> {
        if self.n_absorbed_by_wires() + self.events.len() as u64 != self.n_emitted {
            return Err(Error::InvalidState(format!(
                "{} emitted but {} absorbed and {} detected",
                self.n_emitted,
                self.absorbed.len(),
                self.events.len()
            )));
        }
        let mut seen = HashSet::with_capacity(self.n_emitted as usize);
        for id in self.absorbed.iter().copied().chain(self.events.iter().map(|e| e.photon_id)) {
            if id >= self.n_emitted || !seen.insert(id) {
                return Err(Error::InvalidState(format!("photon {id} recorded twice or out of range")));
            }
        }
        Ok(())
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws `n` photons from a field's `|ψ|²`.
pub fn sample_detections(field: &SampledField, n: u64, seed: u64, absorbed_fraction: f64) -> Result<RunStatistics> {
    sample_intensity(field.plane(), field.grid(), &field.intensity(), n, seed, absorbed_fraction, 1)
}

/// Draws `n` photons from an arbitrary nonnegative intensity profile, splitting
/// the photon range across `workers` threads.
pub fn sample_intensity(
    plane: Plane,
    grid: &Grid,
    intensity: &[f64],
    n: u64,
    seed: u64,
    absorbed_fraction: f64,
    workers: usize,
) -> Result<RunStatistics> {
    if n == 0 {
        return Err(Error::InsufficientStatistics("at least one photon must be emitted".into()));
    }
    if !(0.0..1.0).contains(&absorbed_fraction) {
        return Err(Error::InvalidState(format!("absorbed fraction must lie in [0, 1), got {absorbed_fraction}")));
    }
    if intensity.len() != grid.len() || intensity.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidState("intensity must be finite, nonnegative and match the grid".into()));
    }
    let mut cdf = Vec::with_capacity(intensity.len());
    let mut acc = 0.0;
    for v in intensity {
        acc += v;
        cdf.push(acc);
    }
    if !(acc > 0.0) {
        return Err(Error::InvalidState("cannot sample a null field".into()));
    }
    cdf.iter_mut().for_each(|c| *c /= acc);

    let workers = workers.max(1).min(n as usize);
    let chunk = n.div_ceil(workers as u64);
    let draw = |lo: u64, hi: u64| -> (Vec<u64>, Vec<DetectionEvent>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(lo as u128 * WORDS_PER_PHOTON);
        let mut absorbed = Vec::new();
        let mut events = Vec::with_capacity((hi - lo) as usize);
        for photon_id in lo..hi {
            let (u_absorb, u_bin, u_jitter) = (unit(&mut rng), unit(&mut rng), unit(&mut rng));
            if u_absorb < absorbed_fraction {
                absorbed.push(photon_id);
                continue;
            }
            let bin = cdf.partition_point(|c| *c <= u_bin).min(cdf.len() - 1);
            let spot = if plane == Plane::Focal { Spot::FringeBin(bin) } else { Spot::Unclassified };
            events.push(DetectionEvent {
                photon_id,
                plane,
                position: grid.at(bin) + (u_jitter - 0.5) * grid.step(),
                spot,
            });
        }
        (absorbed, events)
    };

    let parts: Vec<(Vec<u64>, Vec<DetectionEvent>)> = if workers == 1 {
        vec![draw(0, n)]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = (0..workers as u64)
                .map(|w| {
                    let (lo, hi) = (w * chunk, ((w + 1) * chunk).min(n));
                    let draw = &draw;
                    s.spawn(move || draw(lo, hi))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampling worker panicked")).collect()
        })
    };
    let mut absorbed = Vec::new();
    let mut events = Vec::with_capacity(n as usize);
    for (a, e) in parts {
        absorbed.extend(a);
        events.extend(e);
    }
    absorbed.sort_unstable();
    events.sort_by_key(|e| e.photon_id);
    Ok(RunStatistics { n_emitted: n, absorbed, events, plane, grid: *grid, seed })
}

/// Photon counts in the two image windows and outside them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpotCounts {
    pub spot1: u64,
    pub spot2: u64,
    pub stray: u64,
}

/// Labels every image-plane event by spot window and returns the counts.
pub fn classify_spots(stats: &mut RunStatistics, cfg: &TwoPinholeConfig, sys: &OpticalSystem) -> Result<SpotCounts> {
    if stats.plane != Plane::Image {
        return Err(Error::InvalidState(format!("spot classification needs image events, got {}", stats.plane)));
    }
    let windows = SpotWindows::new(cfg, sys)?;
    let mut counts = SpotCounts { spot1: 0, spot2: 0, stray: 0 };
    for e in &mut stats.events {
        e.spot = windows.classify(e.position);
        match e.spot {
            Spot::Spot1 => counts.spot1 += 1,
            Spot::Spot2 => counts.spot2 += 1,
            _ => counts.stray += 1,
        }
    }
    Ok(counts)
}

/// `K̂ = |n1 - n2| / (n1 + n2)`.
pub fn estimate_distinguishability(n1: u64, n2: u64) -> Result<f64> {
    if n1 + n2 == 0 {
        return Err(Error::InsufficientStatistics("no photons in either spot".into()));
    }
    Ok(n1.abs_diff(n2) as f64 / (n1 + n2) as f64)
}

/// Fitted fringe parameters with a bootstrap standard error on `V̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityEstimate {
    pub v: f64,
    pub chi: f64,
    pub stderr: f64,
}

/// Poisson maximum-likelihood fit of binned focal-plane counts to
/// `A·(1 + V·cos(k·d + χ))·envelope(k)`.
///
/// The envelope is the known single-pinhole profile, held fixed; bins where it
/// falls below [`ENVELOPE_FLOOR`] of its peak are ignored. The fit is linear
/// in `(A, A·V·cos χ, -A·V·sin χ)` and solved by iteratively reweighted least
/// squares. `V̂` is clamped to `[0, 1]`.
pub fn estimate_visibility(
    stats: &RunStatistics,
    cfg: &TwoPinholeConfig,
    aperture: &Grid,
    bootstrap_seed: u64,
) -> Result<VisibilityEstimate> {
    if stats.plane != Plane::Focal {
        return Err(Error::InvalidState(format!("visibility needs focal events, got {}", stats.plane)));
    }
    if stats.events.len() < MIN_FIT_EVENTS {
        return Err(Error::InsufficientStatistics(format!(
            "{} focal events, need {MIN_FIT_EVENTS}",
            stats.events.len()
        )));
    }
    let grid = stats.grid;
    let ks: Vec<f64> = grid.points().collect();
    let envelope = optics::pinhole_envelope(cfg, aperture, &ks);
    let peak = envelope.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..ks.len()).filter(|&i| envelope[i] > ENVELOPE_FLOOR * peak).collect();
    let fit_ks: Vec<f64> = keep.iter().map(|&i| ks[i]).collect();
    let fit_env: Vec<f64> = keep.iter().map(|&i| envelope[i]).collect();
    let mut slot = vec![usize::MAX; grid.len()];
    for (s, &i) in keep.iter().enumerate() {
        slot[i] = s;
    }
    let bins: Vec<usize> = stats.events.iter().filter_map(|e| grid.nearest(e.position)).map(|i| slot[i]).collect();
    let d = cfg.separation();

    let fit = |sample: &mut dyn Iterator<Item = usize>| -> Result<optics::FringeFit> {
        let mut counts = vec![0.0; keep.len()];
        for s in sample {
            if s != usize::MAX {
                counts[s] += 1.0;
            }
        }
        let mut inv_var: Vec<f64> = fit_env.iter().map(|e| 1.0 / e).collect();
        let mut current = optics::fit_fringe(&fit_ks, &counts, &fit_env, &inv_var, d)?;
        for _ in 0..IRLS_ITERATIONS {
            let floor = IRLS_MEAN_FLOOR * current.mean.abs();
            for (i, w) in inv_var.iter_mut().enumerate() {
                let phase = fit_ks[i] * d;
                let shape = current.mean + current.cos * phase.cos() + current.sin * phase.sin();
                *w = 1.0 / (fit_env[i] * shape.max(floor));
            }
            current = optics::fit_fringe(&fit_ks, &counts, &fit_env, &inv_var, d)?;
        }
        Ok(current)
    };

    let best = fit(&mut bins.iter().copied())?;
    let mut rng = ChaCha8Rng::seed_from_u64(bootstrap_seed);
    let replicas: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let mut draws = (0..bins.len()).map(|_| bins[rng.random_range(0..bins.len())]);
            fit(&mut draws).map(|f| f.visibility().clamp(0.0, 1.0))
        })
        .collect::<Result<_>>()?;
    let mean = replicas.iter().sum::<f64>() / replicas.len() as f64;
    let var = replicas.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (replicas.len() - 1) as f64;

    Ok(VisibilityEstimate { v: best.visibility().clamp(0.0, 1.0), chi: wrap_phase(best.phase()), stderr: var.sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AmplitudePair;
    use num_complex::Complex64;

    fn uniform_field(len: usize) -> SampledField {
        let grid = Grid::centered(len, 0.5).unwrap();
        SampledField::new(Plane::Aperture, grid, vec![Complex64::new(1.0, 0.0); len]).unwrap()
    }

    #[test]
    fn no_absorption_detects_everyone() {
        let stats = sample_detections(&uniform_field(64), 1000, 7, 0.0).unwrap();
        assert_eq!(stats.events.len(), 1000);
        assert_eq!(stats.n_absorbed_by_wires(), 0);
        stats.check_partition().unwrap();
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let f = uniform_field(64);
        let a = sample_detections(&f, 5000, 99, 0.25).unwrap();
        let b = sample_detections(&f, 5000, 99, 0.25).unwrap();
        assert_eq!(a, b);
        let c = sample_detections(&f, 5000, 100, 0.25).unwrap();
        assert_ne!(a.events, c.events);
    }

    #[test]
    fn partition_count_does_not_matter() {
        let f = uniform_field(128);
        let one = sample_intensity(Plane::Aperture, f.grid(), &f.intensity(), 10_001, 3, 0.1, 1).unwrap();
        for workers in [2, 3, 7] {
            let many = sample_intensity(Plane::Aperture, f.grid(), &f.intensity(), 10_001, 3, 0.1, workers).unwrap();
            assert_eq!(one, many);
        }
        one.check_partition().unwrap();
    }

    #[test]
    fn uniform_field_passes_ks() {
        let f = uniform_field(256);
        let n = 100_000;
        let stats = sample_detections(&f, n, 2024, 0.0).unwrap();
        let (lo, hi) = (f.grid().start() - 0.25, f.grid().end() + 0.25);
        let mut xs: Vec<f64> = stats.events.iter().map(|e| (e.position - lo) / (hi - lo)).collect();
        xs.sort_by(f64::total_cmp);
        let d = xs
            .iter()
            .enumerate()
            .map(|(i, x)| (x - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - x).abs()))
            .fold(0.0, f64::max);
        // 1% critical value of the one-sample KS statistic
        assert!(d < 1.628 / (n as f64).sqrt(), "D = {d}");
    }

    #[test]
    fn zero_bins_are_never_drawn() {
        let grid = Grid::centered(8, 1.0).unwrap();
        let intensity = [0.0, 0.0, 1.0, 0.0, 0.0, 3.0, 0.0, 0.0];
        let stats = sample_intensity(Plane::Focal, &grid, &intensity, 2000, 1, 0.0, 1).unwrap();
        assert!(stats.events.iter().all(|e| matches!(e.spot, Spot::FringeBin(2) | Spot::FringeBin(5))));
    }

    #[test]
    fn invalid_inputs() {
        let f = uniform_field(16);
        assert!(sample_detections(&f, 0, 1, 0.0).is_err());
        assert!(sample_detections(&f, 10, 1, 1.0).is_err());
        let null = SampledField::new(Plane::Aperture, *f.grid(), vec![Complex64::new(0.0, 0.0); 16]).unwrap();
        assert!(matches!(sample_detections(&null, 10, 1, 0.0), Err(Error::InvalidState(_))));
    }

    #[test]
    fn distinguishability_from_counts() {
        assert_eq!(estimate_distinguishability(500, 500).unwrap(), 0.0);
        assert_eq!(estimate_distinguishability(1000, 0).unwrap(), 1.0);
        assert_eq!(estimate_distinguishability(750, 250).unwrap(), 0.5);
        assert!(matches!(estimate_distinguishability(0, 0), Err(Error::InsufficientStatistics(_))));
    }

    #[test]
    fn too_few_events_for_a_fit() {
        let cfg = TwoPinholeConfig::new(1e-3, 65e-3 / 1024.0, AmplitudePair::real(1.0, 1.0).unwrap()).unwrap();
        let grid = optics::default_aperture_grid(&cfg).unwrap();
        let focal = optics::to_focal_plane(&optics::aperture_field(&cfg, &grid).unwrap()).unwrap();
        let stats = sample_detections(&focal, 50, 1, 0.0).unwrap();
        assert!(matches!(estimate_visibility(&stats, &cfg, &grid, 0), Err(Error::InsufficientStatistics(_))));
    }
}
