//! Distinguishability, visibility and the duality relation between them.
//!
//! For a pure two-path state `K² + V² = 1`. Entangling the path with a
//! which-path detector lowers the sum by a Cauchy–Schwarz deficit; projecting
//! the detector onto an eigenbasis splits the photons into conditioned
//! branches, each of which again obeys the pure-state relation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{wrap_phase, Accounting, AmplitudePair, DetectorGram, DualityReport};

/// Largest detector dimension accepted by [`condition_on_projector`].
pub const MAX_DETECTOR_DIM: usize = 8;

/// Orthonormality tolerance for projector bases.
pub const BASIS_TOLERANCE: f64 = 1e-12;

/// Largest disagreement, in radians, between phases solved from different zeros.
pub const ZERO_PHASE_TOLERANCE: f64 = 1e-6;

/// Largest fringe minimum `1 - V` still compatible with a true intensity zero.
pub const ZERO_DEPTH_TOLERANCE: f64 = 1e-12;

/// Relative mismatch of `|c1|` and `|c2|` still counted as balanced paths.
pub const BALANCE_TOLERANCE: f64 = 1e-9;

/// `K = ||c1|² - |c2|²| / (|c1|² + |c2|²)`.
pub fn distinguishability(a: &AmplitudePair) -> Result<f64> {
    let r2 = a.magnitude_ratio().powi(2);
    Ok((1.0 - r2) / (1.0 + r2))
}

/// `V = 2|c1||c2| / (|c1|² + |c2|²)`.
pub fn visibility(a: &AmplitudePair) -> Result<f64> {
    let r = a.magnitude_ratio();
    Ok(2.0 * r / (1.0 + r * r))
}

/// Fringe profile `1 + V·cos(k·d + χ)` sampled at `ks`, unit mean over a period.
///
/// With one path closed the profile is flat.
pub fn fringe_intensity(a: &AmplitudePair, separation: f64, ks: &[f64]) -> Result<Vec<f64>> {
    check_separation(separation)?;
    let v = visibility(a)?;
    let chi = a.chi().unwrap_or(0.0);
    Ok(cos_profile(v, chi, separation, ks))
}

fn cos_profile(v: f64, phase: f64, separation: f64, ks: &[f64]) -> Vec<f64> {
    if v == 0.0 {
        return vec![1.0; ks.len()];
    }
    ks.iter().map(|k| 1.0 + v * (k * separation + phase).cos()).collect()
}

fn check_separation(separation: f64) -> Result<()> {
    if separation.is_finite() && separation > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!("separation must be positive, got {separation}")))
    }
}

/// Unentangled report: `K² + V² = 1`, zero deficit, all photons counted.
pub fn duality_report(a: &AmplitudePair) -> Result<DualityReport> {
    Ok(DualityReport::from_parts(distinguishability(a)?, visibility(a)?, a.chi().ok(), 0.0, Accounting::AllPhotons))
}

/// Path weights `|c1|²g11` and `|c2|²g22` after scaling the larger magnitude to 1,
/// plus the scaled magnitudes themselves.
fn detector_weights(a: &AmplitudePair, g: &DetectorGram) -> Result<(f64, f64, f64, f64)> {
    let scale = a.c1().norm().max(a.c2().norm());
    let (m1, m2) = (a.c1().norm() / scale, a.c2().norm() / scale);
    let (w1, w2) = (m1 * m1 * g.g11(), m2 * m2 * g.g22());
    if !(w1 + w2 > 0.0) {
        return Err(Error::InvalidState("no photon weight survives the detector".into()));
    }
    Ok((w1, w2, m1, m2))
}

/// Distinguishability with a which-path detector, `||c1|²g11 - |c2|²g22| / (|c1|²g11 + |c2|²g22)`.
pub fn entangled_distinguishability(a: &AmplitudePair, g: &DetectorGram) -> Result<f64> {
    let (w1, w2, _, _) = detector_weights(a, g)?;
    Ok((w1 - w2).abs() / (w1 + w2))
}

/// Visibility with a which-path detector, `2|c1||c2||g12| / (|c1|²g11 + |c2|²g22)`.
pub fn entangled_visibility(a: &AmplitudePair, g: &DetectorGram) -> Result<f64> {
    let (w1, w2, m1, m2) = detector_weights(a, g)?;
    Ok(2.0 * m1 * m2 * g.g12().norm() / (w1 + w2))
}

/// Phase of the traced fringe, `χ - arg(g12)`, when one exists.
pub fn entangled_phase(a: &AmplitudePair, g: &DetectorGram) -> Option<f64> {
    let chi = a.chi().ok()?;
    if g.g12().norm() == 0.0 {
        return None;
    }
    Some(wrap_phase(chi - g.g12().arg()))
}

/// Detector-traced fringe profile `1 + V·cos(k·d + χ - arg g12)`.
pub fn entangled_fringe_intensity(
    a: &AmplitudePair,
    g: &DetectorGram,
    separation: f64,
    ks: &[f64],
) -> Result<Vec<f64>> {
    check_separation(separation)?;
    let v = entangled_visibility(a, g)?;
    Ok(cos_profile(v, entangled_phase(a, g).unwrap_or(0.0), separation, ks))
}

/// Report for a detector-entangled state, carrying the Cauchy–Schwarz deficit
/// `4|c1|²|c2|²(g11·g22 - |g12|²) / (|c1|²g11 + |c2|²g22)²`.
pub fn duality_deficit(a: &AmplitudePair, g: &DetectorGram) -> Result<DualityReport> {
    let (w1, w2, m1, m2) = detector_weights(a, g)?;
    let total = w1 + w2;
    let k = (w1 - w2).abs() / total;
    let v = 2.0 * m1 * m2 * g.g12().norm() / total;
    let deficit = 4.0 * (m1 * m2).powi(2) * g.schwarz_gap() / (total * total);
    Ok(DualityReport::from_parts(k, v, entangled_phase(a, g), deficit, Accounting::AllPhotons))
}

/// Path amplitudes after projecting the detector onto one basis state `|λ⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionedAmplitudes {
    pub lambda_index: usize,
    /// `(c1·⟨λ|γ1⟩, c2·⟨λ|γ2⟩)`
    pub amplitudes: AmplitudePair,
    /// Fraction of all photons falling in this branch.
    pub weight: f64,
}

impl ConditionedAmplitudes {
    pub fn report(&self) -> Result<DualityReport> {
        let base = duality_report(&self.amplitudes)?;
        Ok(DualityReport::from_parts(base.k(), base.v(), base.chi(), 0.0, Accounting::ConditionedOnLambda))
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Splits an entangled state into detector-conditioned branches.
///
/// `basis` must be a complete orthonormal basis of the detector space the
/// vectors `gamma1`, `gamma2` live in. Branches carrying no photons are dropped.
pub fn condition_on_projector(
    a: &AmplitudePair,
    gamma1: &[Complex64],
    gamma2: &[Complex64],
    basis: &[Vec<Complex64>],
) -> Result<Vec<ConditionedAmplitudes>> {
    let n = gamma1.len();
    if n == 0 || n > MAX_DETECTOR_DIM {
        return Err(Error::InvalidBasis(format!("detector dimension must lie in 1..={MAX_DETECTOR_DIM}, got {n}")));
    }
    if gamma2.len() != n {
        return Err(Error::InvalidBasis("detector vectors differ in dimension".into()));
    }
    if basis.len() != n || basis.iter().any(|b| b.len() != n) {
        return Err(Error::InvalidBasis(format!("basis must hold {n} vectors of dimension {n}")));
    }
    for (i, bi) in basis.iter().enumerate() {
        for (j, bj) in basis.iter().enumerate().skip(i) {
            let expected = if i == j { 1.0 } else { 0.0 };
            let err = (inner(bi, bj) - expected).norm();
            if err > BASIS_TOLERANCE {
                return Err(Error::InvalidBasis(format!("⟨b{i}|b{j}⟩ deviates from {expected} by {err:e}")));
            }
        }
    }

    let raw: Vec<(usize, Complex64, Complex64)> =
        basis.iter().enumerate().map(|(idx, b)| (idx, a.c1() * inner(b, gamma1), a.c2() * inner(b, gamma2))).collect();
    let total: f64 = raw.iter().map(|(_, u, v)| u.norm_sqr() + v.norm_sqr()).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidState("no photon weight survives the detector".into()));
    }
    raw.into_iter()
        .filter(|(_, u, v)| u.norm_sqr() + v.norm_sqr() > 0.0)
        .map(|(lambda_index, u, v)| {
            Ok(ConditionedAmplitudes {
                lambda_index,
                amplitudes: AmplitudePair::new(u, v)?,
                weight: (u.norm_sqr() + v.norm_sqr()) / total,
            })
        })
        .collect()
}

/// `V = (I_max - I_min) / (I_max + I_min)`.
pub fn visibility_from_extrema(i_max: f64, i_min: f64) -> Result<f64> {
    if !(i_max.is_finite() && i_min.is_finite()) || i_min < 0.0 {
        return Err(Error::InvalidExtrema { i_max, i_min });
    }
    if i_max <= 0.0 {
        return Err(Error::NullField);
    }
    if i_min > i_max {
        return Err(Error::InvalidExtrema { i_max, i_min });
    }
    Ok((i_max - i_min) / (i_max + i_min))
}

/// Backward reconstruction of `(K, V, χ)` from the two image-spot intensities
/// and the wavevectors where the focal-plane intensity is known to vanish.
///
/// The spot intensities fix `|c1|²` and `|c2|²`; each zero fixes
/// `χ = π - k·d (mod 2π)`. The zeros must agree on one phase within
/// [`ZERO_PHASE_TOLERANCE`], and a true zero needs a fringe of unit depth.
pub fn infer_from_image_and_zeros(
    intensity1: f64,
    intensity2: f64,
    zero_positions: &[f64],
    separation: f64,
) -> Result<DualityReport> {
    check_separation(separation)?;
    if !(intensity1 >= 0.0 && intensity2 >= 0.0) {
        return Err(Error::InvalidState(format!(
            "spot intensities must be nonnegative, got ({intensity1}, {intensity2})"
        )));
    }
    let a = AmplitudePair::real(intensity1.sqrt(), intensity2.sqrt())?;
    let k = distinguishability(&a)?;
    let v = visibility(&a)?;
    if zero_positions.is_empty() {
        return Ok(DualityReport::from_parts(k, v, None, 0.0, Accounting::AllPhotons));
    }
    if 1.0 - v > ZERO_DEPTH_TOLERANCE {
        return Err(Error::InconsistentGrid(format!(
            "spot intensities give V = {v}, whose fringe minimum {} cannot be zero",
            1.0 - v
        )));
    }
    let phases: Vec<f64> = zero_positions.iter().map(|kz| wrap_phase(PI - kz * separation)).collect();
    let (s, c) = phases.iter().fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
    let chi = s.atan2(c);
    if let Some(worst) =
        phases.iter().map(|p| wrap_phase(p - chi).abs()).max_by(f64::total_cmp).filter(|w| *w > ZERO_PHASE_TOLERANCE)
    {
        return Err(Error::InconsistentGrid(format!("zeros disagree on the fringe phase by up to {worst:e} rad")));
    }
    Ok(DualityReport::from_parts(k, v, Some(wrap_phase(chi)), 0.0, Accounting::AllPhotons))
}

/// The single-spot accounting error: `K = 1` from one image spot, `V = 1`
/// inferred from the wires, hence `K² + V² = 2`.
///
/// Labeled [`Accounting::FallaciousHalfPopulation`]; nothing downstream consumes it.
pub fn fallacious_half_population_report(a: &AmplitudePair) -> Result<DualityReport> {
    let (m1, m2) = (a.c1().norm(), a.c2().norm());
    if (m1 - m2).abs() > BALANCE_TOLERANCE * m1.max(m2) {
        return Err(Error::PreconditionViolated(format!(
            "the half-population report needs |c1| = |c2|, got {m1} and {m2}"
        )));
    }
    Ok(DualityReport::from_parts(1.0, 1.0, a.chi().ok(), 0.0, Accounting::FallaciousHalfPopulation))
}
