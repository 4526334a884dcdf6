//! How much a set of dark wires says about the fringe profile.
//!
//! A profile is a list of `n_grid` intensity samples, each on one of
//! `n_levels` evenly spaced levels over `[0, 2]` (the range of
//! `1 + V·cos(k·d + χ)`). Wire samples are pinned to level 0; the others are
//! free. With every admissible profile equally likely, the entropy of the
//! profile space is `free · ln(n_levels)`, which grows without bound as the
//! grid is refined while the wires stay put.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::duality;
use crate::error::{Error, Result};
use crate::model::{AmplitudePair, Grid};

/// Agreement required, at every sample, for a profile to count as a member of the cos family.
pub const COS_MATCH_TOLERANCE: f64 = 1e-6;

/// Cos-family values this close to zero at a wire are snapped to zero.
const WIRE_ZERO_TOLERANCE: f64 = 1e-12;

/// The space of quantized profiles that vanish on the wires.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSpace {
    n_grid: usize,
    n_levels: u32,
    wire_indices: Vec<usize>,
    entropy: f64,
}

impl ProfileSpace {
    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn n_levels(&self) -> u32 {
        self.n_levels
    }

    /// Constrained sample indices, sorted and without repeats.
    pub fn wire_indices(&self) -> &[usize] {
        &self.wire_indices
    }

    pub fn free_samples(&self) -> usize {
        self.n_grid - self.wire_indices.len()
    }

    /// Entropy in nats of the uniform law over admissible profiles.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// Number of admissible profiles, `n_levels^free`, if it fits in a `u128`.
    pub fn profile_count(&self) -> Option<u128> {
        u128::from(self.n_levels).checked_pow(u32::try_from(self.free_samples()).ok()?)
    }

    /// Intensity represented by level `l`.
    pub fn level_value(&self, l: u32) -> f64 {
        if self.n_levels == 1 {
            0.0
        } else {
            2.0 * f64::from(l) / f64::from(self.n_levels - 1)
        }
    }

    fn is_wire(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_grid];
        for &i in &self.wire_indices {
            mask[i] = true;
        }
        mask
    }
}

/// Builds the profile space for `n_grid` samples, `n_levels` levels and the
/// given wire samples. Repeated wire indices count once.
pub fn entropy_of_constrained_profiles(n_grid: usize, n_levels: u32, wire_indices: &[usize]) -> Result<ProfileSpace> {
    if n_levels == 0 {
        return Err(Error::PreconditionViolated("at least one intensity level is required".into()));
    }
    if let Some(&bad) = wire_indices.iter().find(|&&i| i >= n_grid) {
        return Err(Error::OutOfDomain(format!("wire index {bad} outside a grid of {n_grid} samples")));
    }
    let wire_indices: Vec<usize> = wire_indices.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let free = n_grid - wire_indices.len();
    Ok(ProfileSpace { n_grid, n_levels, wire_indices, entropy: free as f64 * f64::from(n_levels).ln() })
}

/// How a random profile is generated.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    /// Independent uniform level on every free sample.
    Arbitrary,
    /// Smoothed random field, tapered continuously to zero at the wires.
    ContinuousRandom,
    /// `1 + V·cos(k·d + χ)` for `pair`, on the k-samples of `k_grid`.
    CosFamily { pair: AmplitudePair, separation: f64, k_grid: Grid },
    /// Random levels held constant between random breakpoints.
    Discontinuous,
}

/// Draws one profile of the given kind. Every kind returns exactly zero on the wires.
///
/// The cos family is deterministic and fails with [`Error::InconsistentGrid`]
/// when a wire does not sit on one of its zeros.
pub fn sample_profile(space: &ProfileSpace, seed: u64, kind: &ProfileKind) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.n_grid;
    let mut profile = match kind {
        ProfileKind::Arbitrary => (0..n).map(|_| space.level_value(rng.random_range(0..space.n_levels))).collect(),
        ProfileKind::ContinuousRandom => continuous_random(space, &mut rng),
        ProfileKind::Discontinuous => {
            let pieces = rng.random_range(1..=n.clamp(1, 8));
            let mut breaks: Vec<usize> = (1..pieces).map(|_| rng.random_range(0..n)).collect();
            breaks.sort_unstable();
            let mut profile = Vec::with_capacity(n);
            let mut level = 2.0 * rng.random::<f64>();
            let mut next = breaks.iter().peekable();
            for j in 0..n {
                while next.next_if(|&&b| b == j).is_some() {
                    level = 2.0 * rng.random::<f64>();
                }
                profile.push(level);
            }
            profile
        }
        ProfileKind::CosFamily { pair, separation, k_grid } => {
            if k_grid.len() != n {
                return Err(Error::InconsistentGrid(format!("k-grid has {} samples, space has {n}", k_grid.len())));
            }
            let ks: Vec<f64> = k_grid.points().collect();
            let profile = duality::fringe_intensity(pair, *separation, &ks)?;
            for &i in &space.wire_indices {
                if profile[i].abs() > WIRE_ZERO_TOLERANCE {
                    return Err(Error::InconsistentGrid(format!(
                        "wire at k = {} meets intensity {}, not a fringe zero",
                        ks[i], profile[i]
                    )));
                }
            }
            profile
        }
    };
    for &i in &space.wire_indices {
        profile[i] = 0.0;
    }
    Ok(profile)
}

fn continuous_random(space: &ProfileSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = space.n_grid;
    let noise: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let radius = (n / 16).max(1) as isize;
    let smooth: Vec<f64> = (0..n as isize)
        .map(|j| {
            let (mut sum, mut weight) = (0.0, 0.0);
            for o in -radius..=radius {
                let i = j + o;
                if (0..n as isize).contains(&i) {
                    let w = (radius + 1 - o.abs()) as f64;
                    sum += w * noise[i as usize];
                    weight += w;
                }
            }
            2.0 * sum / weight
        })
        .collect();
    if space.wire_indices.is_empty() {
        return smooth;
    }
    let wire = space.is_wire();
    // distance to the nearest wire, in samples, from both directions
    let mut dist = vec![usize::MAX; n];
    let mut last = None;
    for j in 0..n {
        if wire[j] {
            last = Some(j);
        }
        if let Some(w) = last {
            dist[j] = j - w;
        }
    }
    last = None;
    for j in (0..n).rev() {
        if wire[j] {
            last = Some(j);
        }
        if let Some(w) = last {
            dist[j] = dist[j].min(w - j);
        }
    }
    let ramp = radius as f64;
    smooth.iter().zip(&dist).map(|(s, &d)| s * (d as f64 / ramp).min(1.0)).collect()
}

/// Whether `profile` agrees with `reference` within [`COS_MATCH_TOLERANCE`] at every sample.
pub fn matches_profile(profile: &[f64], reference: &[f64]) -> bool {
    profile.len() == reference.len() && profile.iter().zip(reference).all(|(a, b)| (a - b).abs() <= COS_MATCH_TOLERANCE)
}

/// Fraction of `n_profiles` arbitrary profiles (seeds `seed..seed + n_profiles`)
/// that coincide with `reference`.
pub fn match_fraction(space: &ProfileSpace, reference: &[f64], n_profiles: u64, seed: u64) -> Result<f64> {
    if n_profiles == 0 {
        return Err(Error::InsufficientStatistics("no profiles to sample".into()));
    }
    let mut hits = 0u64;
    for s in 0..n_profiles {
        if matches_profile(&sample_profile(space, seed.wrapping_add(s), &ProfileKind::Arbitrary)?, reference) {
            hits += 1;
        }
    }
    Ok(hits as f64 / n_profiles as f64)
}

/// A cos-family reference that the quantized space can represent exactly:
/// `V = 1`, `k·d` advancing by `π/2` per sample from `k = 0`, so the profile
/// cycles through `2, 1, 0, 1` and vanishes at every sample `j ≡ 2 (mod 4)`.
///
/// Returns the space (three levels, wires on the zeros) and the profile kind.
pub fn quarter_wave_cos_family(n_grid: usize, separation: f64) -> Result<(ProfileSpace, ProfileKind)> {
    let wires: Vec<usize> = (2..n_grid).step_by(4).collect();
    let space = entropy_of_constrained_profiles(n_grid, 3, &wires)?;
    let k_grid = Grid::new(0.0, std::f64::consts::FRAC_PI_2 / separation, n_grid)?;
    let kind = ProfileKind::CosFamily { pair: AmplitudePair::real(1.0, 1.0)?, separation, k_grid };
    Ok((space, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Counts level assignments vanishing on the wires by direct enumeration.
    fn enumerate(n_grid: usize, n_levels: u32, wires: &[usize]) -> u64 {
        let total = u64::from(n_levels).pow(n_grid as u32);
        (0..total)
            .filter(|&code| {
                let mut c = code;
                (0..n_grid).all(|j| {
                    let level = c % u64::from(n_levels);
                    c /= u64::from(n_levels);
                    !wires.contains(&j) || level == 0
                })
            })
            .count() as u64
    }

    #[test]
    fn fully_constrained_space_has_zero_entropy() {
        let space = entropy_of_constrained_profiles(5, 7, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(space.entropy(), 0.0);
        assert_eq!(space.profile_count(), Some(1));
    }

    #[test]
    fn ten_samples_two_levels_two_wires() {
        let space = entropy_of_constrained_profiles(10, 2, &[3, 7]).unwrap();
        assert_eq!(enumerate(10, 2, &[3, 7]), 256);
        assert_eq!(space.profile_count(), Some(256));
        assert_eq!(space.entropy(), 8.0 * 2f64.ln());
    }

    #[test]
    fn entropy_is_linear_in_grid_size() {
        let wires = [1, 5];
        let s: Vec<f64> = [16, 32, 64, 128]
            .iter()
            .map(|&n| entropy_of_constrained_profiles(n, 4, &wires).unwrap().entropy())
            .collect();
        for pair in s.windows(2) {
            assert!(pair[1] > pair[0]);
        }
        assert!(((s[3] - s[2]) / (s[2] - s[1]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_spaces() {
        assert!(matches!(entropy_of_constrained_profiles(4, 2, &[4]), Err(Error::OutOfDomain(_))));
        assert!(entropy_of_constrained_profiles(4, 0, &[]).is_err());
        assert_eq!(entropy_of_constrained_profiles(4, 2, &[1, 1]).unwrap().free_samples(), 3);
    }

    #[test]
    fn every_kind_vanishes_on_wires() {
        let (space, cos) = quarter_wave_cos_family(64, 1e-3).unwrap();
        for kind in [ProfileKind::Arbitrary, ProfileKind::ContinuousRandom, ProfileKind::Discontinuous, cos] {
            for seed in 0..20 {
                let f = sample_profile(&space, seed, &kind).unwrap();
                assert_eq!(f.len(), 64);
                assert!(space.wire_indices().iter().all(|&i| f[i] == 0.0), "{kind:?}");
                assert!(f.iter().all(|v| (0.0..=2.0).contains(v)));
            }
        }
    }

    #[test]
    fn cos_family_is_the_fringe_profile() {
        let (space, kind) = quarter_wave_cos_family(32, 2.5e-3).unwrap();
        let f = sample_profile(&space, 0, &kind).unwrap();
        let ProfileKind::CosFamily { pair, separation, k_grid } = &kind else { unreachable!() };
        let ks: Vec<f64> = k_grid.points().collect();
        let reference = duality::fringe_intensity(pair, *separation, &ks).unwrap();
        assert!(f.iter().zip(&reference).all(|(a, b)| (a - b).abs() < 1e-12));
        assert!(f.iter().zip(&[2.0, 1.0, 0.0, 1.0].repeat(8)).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn misplaced_wires_contradict_the_cos_family() {
        let (_, kind) = quarter_wave_cos_family(16, 1e-3).unwrap();
        let space = entropy_of_constrained_profiles(16, 3, &[1]).unwrap();
        assert!(matches!(sample_profile(&space, 0, &kind), Err(Error::InconsistentGrid(_))));
    }

    #[test]
    fn continuous_profiles_have_bounded_steps() {
        let space = entropy_of_constrained_profiles(256, 2, &[40, 41, 200]).unwrap();
        let f = sample_profile(&space, 9, &ProfileKind::ContinuousRandom).unwrap();
        let max_step = f.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        assert!(max_step < 0.2, "{max_step}");
    }

    #[test]
    fn match_fraction_tracks_the_exact_probability() {
        let (space, kind) = quarter_wave_cos_family(6, 1e-3).unwrap();
        let reference = sample_profile(&space, 0, &kind).unwrap();
        // one wire, five free samples: probability 3^-5
        let p = 3f64.powi(-5);
        let n = 200_000;
        let frac = match_fraction(&space, &reference, n, 1).unwrap();
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((frac - p).abs() < 4.0 * sigma, "{frac} vs {p}");
    }

    proptest! {
        #[test]
        fn entropy_matches_enumeration(n_grid in 1usize..=10, n_levels in 1u32..=4, mask in 0u32..1024) {
            prop_assume!(u64::from(n_levels).pow(n_grid as u32) <= 1 << 20);
            let wires: Vec<usize> = (0..n_grid).filter(|j| mask & (1 << j) != 0).collect();
            let space = entropy_of_constrained_profiles(n_grid, n_levels, &wires).unwrap();
            let count = enumerate(n_grid, n_levels, &wires);
            prop_assert_eq!(space.profile_count(), Some(u128::from(count)));
            prop_assert!((space.entropy() - (count as f64).ln()).abs() <= 1e-12 * space.entropy().max(1.0));
        }

        #[test]
        fn arbitrary_profiles_are_reproducible(seed in any::<u64>()) {
            let space = entropy_of_constrained_profiles(20, 5, &[0, 19]).unwrap();
            let a = sample_profile(&space, seed, &ProfileKind::Arbitrary).unwrap();
            let b = sample_profile(&space, seed, &ProfileKind::Arbitrary).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
