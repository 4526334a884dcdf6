//! Shared domain types with validated constructors.
//!
//! All lengths are in meters, wavevectors in rad/m, angles in radians.
//! Every type here is immutable once built.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance of the thin-lens relation enforced by [`OpticalSystem`].
pub const LENS_TOLERANCE: f64 = 1e-12;

/// Tolerance above 1 allowed for `K² + V²` under physical accounting.
pub const DUALITY_TOLERANCE: f64 = 1e-12;

/// The complex path amplitudes `(c1, c2)` of a two-path state.
///
/// Path 1 is the pinhole at `x = +d/2`, path 2 the one at `x = -d/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    c1: Complex64,
    c2: Complex64,
}

impl AmplitudePair {
    pub fn new(c1: Complex64, c2: Complex64) -> Result<Self> {
        if !(c1.re.is_finite() && c1.im.is_finite() && c2.re.is_finite() && c2.im.is_finite()) {
            return Err(Error::InvalidState("non-finite amplitude".into()));
        }
        if c1.norm() == 0.0 && c2.norm() == 0.0 {
            return Err(Error::InvalidState("both paths closed".into()));
        }
        Ok(Self { c1, c2 })
    }

    /// Builds a pair from real amplitudes.
    pub fn real(c1: f64, c2: f64) -> Result<Self> {
        Self::new(Complex64::new(c1, 0.0), Complex64::new(c2, 0.0))
    }

    /// Builds a pair from magnitudes and phases.
    pub fn polar(m1: f64, phase1: f64, m2: f64, phase2: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(m1, phase1), Complex64::from_polar(m2, phase2))
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    pub fn c2(&self) -> Complex64 {
        self.c2
    }

    /// `|c1|²`
    pub fn weight1(&self) -> f64 {
        self.c1.norm_sqr()
    }

    /// `|c2|²`
    pub fn weight2(&self) -> f64 {
        self.c2.norm_sqr()
    }

    pub fn total_weight(&self) -> f64 {
        self.weight1() + self.weight2()
    }

    /// Ratio of the smaller to the larger magnitude, in `[0, 1]`.
    pub(crate) fn magnitude_ratio(&self) -> f64 {
        let (a, b) = (self.c1.norm(), self.c2.norm());
        if a >= b {
            b / a
        } else {
            a / b
        }
    }

    /// Relative phase `arg(c1) - arg(c2)` wrapped to `(-π, π]`.
    ///
    /// Fails when either amplitude vanishes, since the phase is then undefined.
    pub fn chi(&self) -> Result<f64> {
        if self.c1.norm() == 0.0 || self.c2.norm() == 0.0 {
            return Err(Error::InvalidState("relative phase undefined with a closed path".into()));
        }
        Ok(wrap_phase(self.c1.arg() - self.c2.arg()))
    }

    /// Same pair with both amplitudes multiplied by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Result<Self> {
        Self::new(self.c1 * factor, self.c2 * factor)
    }
}

/// Wraps an angle to `(-π, π]`.
pub fn wrap_phase(phase: f64) -> f64 {
    let mut r = phase.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}

/// Two pinholes of width `w` separated by `d`, carrying `amplitudes`.
///
/// The top-hat width is the finite stand-in for point apertures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPinholeConfig {
    separation: f64,
    pinhole_width: f64,
    amplitudes: AmplitudePair,
}

impl TwoPinholeConfig {
    pub fn new(separation: f64, pinhole_width: f64, amplitudes: AmplitudePair) -> Result<Self> {
        if !(separation.is_finite() && separation > 0.0) {
            return Err(Error::InvalidGeometry(format!("separation must be positive, got {separation}")));
        }
        if !(pinhole_width.is_finite() && pinhole_width > 0.0 && pinhole_width < separation / 4.0) {
            return Err(Error::InvalidGeometry(format!(
                "pinhole width must lie in (0, d/4), got w = {pinhole_width} with d = {separation}"
            )));
        }
        Ok(Self { separation, pinhole_width, amplitudes })
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn pinhole_width(&self) -> f64 {
        self.pinhole_width
    }

    pub fn amplitudes(&self) -> AmplitudePair {
        self.amplitudes
    }

    pub fn with_amplitudes(&self, amplitudes: AmplitudePair) -> Self {
        Self { amplitudes, ..*self }
    }
}

/// Thin lens imaging the pinhole plane onto its conjugate plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSystem {
    focal_length: f64,
    object_distance: f64,
    image_distance: f64,
    wavelength: f64,
}

/// Builds an [`OpticalSystem`] from `f`, `p` and the vacuum wavelength, deriving `p′`.
pub fn make_optical_system(focal_length: f64, object_distance: f64, wavelength: f64) -> Result<OpticalSystem> {
    OpticalSystem::new(focal_length, object_distance, wavelength)
}

impl OpticalSystem {
    pub fn new(focal_length: f64, object_distance: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in
            [("focal length", focal_length), ("object distance", object_distance), ("wavelength", wavelength)]
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")));
            }
        }
        if object_distance <= focal_length {
            return Err(Error::NoRealImage { f: focal_length, p: object_distance });
        }
        let image_distance = 1.0 / (1.0 / focal_length - 1.0 / object_distance);
        Self::checked(focal_length, object_distance, image_distance, wavelength)
    }

    /// Builds a system from the two conjugate distances, deriving `f`.
    pub fn from_conjugates(object_distance: f64, image_distance: f64, wavelength: f64) -> Result<Self> {
        for (name, v) in
            [("object distance", object_distance), ("image distance", image_distance), ("wavelength", wavelength)]
        {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGeometry(format!("{name} must be positive, got {v}")));
            }
        }
        let focal_length = 1.0 / (1.0 / object_distance + 1.0 / image_distance);
        Self::checked(focal_length, object_distance, image_distance, wavelength)
    }

    fn checked(f: f64, p: f64, p_img: f64, wavelength: f64) -> Result<Self> {
        let residual = (1.0 / p + 1.0 / p_img - 1.0 / f).abs();
        if residual >= LENS_TOLERANCE * (1.0 / f) {
            return Err(Error::InvalidGeometry(format!("thin-lens relation violated by {residual:e}")));
        }
        Ok(Self { focal_length: f, object_distance: p, image_distance: p_img, wavelength })
    }

    pub fn focal_length(&self) -> f64 {
        self.focal_length
    }

    pub fn object_distance(&self) -> f64 {
        self.object_distance
    }

    pub fn image_distance(&self) -> f64 {
        self.image_distance
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Lateral magnification `M = -p′/p`.
    pub fn magnification(&self) -> f64 {
        -self.image_distance / self.object_distance
    }

    /// Vacuum wavenumber `k₀ = 2π/λ₀`.
    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Focal-plane position `x_f = f·k/k₀` of transverse wavevector `k`.
    pub fn focal_position(&self, k: f64) -> f64 {
        self.focal_length * k / self.wavenumber()
    }

    /// Inverse of [`Self::focal_position`].
    pub fn focal_wavevector(&self, x_f: f64) -> f64 {
        x_f * self.wavenumber() / self.focal_length
    }
}

/// Absorbing wires placed in the focal plane, addressed by wavevector.
#[derive(Debug, Clone, PartialEq)]
pub struct WireGrid {
    positions: Vec<f64>,
    half_width: f64,
    efficiency: f64,
}

impl WireGrid {
    /// `half_width = 0` selects idealized infinitely thin wires.
    pub fn new(positions: Vec<f64>, half_width: f64, efficiency: f64) -> Result<Self> {
        if positions.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidGeometry("non-finite wire position".into()));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGeometry("wire positions must be strictly increasing".into()));
        }
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(Error::InvalidGeometry(format!("wire half-width must be >= 0, got {half_width}")));
        }
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::InvalidGeometry(format!("absorption efficiency must lie in [0, 1], got {efficiency}")));
        }
        Ok(Self { positions, half_width, efficiency })
    }

    /// Infinitely thin, perfectly absorbing wires.
    pub fn ideal(positions: Vec<f64>) -> Result<Self> {
        Self::new(positions, 0.0, 1.0)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn is_zero_width(&self) -> bool {
        self.half_width == 0.0
    }
}

/// Inner products `⟨γᵢ|γⱼ⟩` of a which-path detector state pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorGram {
    g11: f64,
    g22: f64,
    g12: Complex64,
}

impl DetectorGram {
    /// Rejects any triple violating Gram positivity `|g12|² ≤ g11·g22`.
    pub fn new(g11: f64, g22: f64, g12: Complex64) -> Result<Self> {
        if !(g11.is_finite() && g22.is_finite() && g12.re.is_finite() && g12.im.is_finite()) {
            return Err(Error::InvalidGram("non-finite entry".into()));
        }
        if g11 < 0.0 || g22 < 0.0 {
            return Err(Error::InvalidGram(format!("negative norm (g11 = {g11}, g22 = {g22})")));
        }
        let bound = g11 * g22;
        if g12.norm_sqr() > bound * (1.0 + 8.0 * f64::EPSILON) {
            return Err(Error::InvalidGram(format!("|g12|² = {} exceeds g11·g22 = {bound}", g12.norm_sqr())));
        }
        // rounding can put parallel states a few ulp past the bound
        let g12 = if g12.norm_sqr() > bound { Complex64::from_polar(bound.sqrt(), g12.arg()) } else { g12 };
        Ok(Self { g11, g22, g12 })
    }

    /// Gram matrix of two explicit detector vectors.
    pub fn from_vectors(gamma1: &[Complex64], gamma2: &[Complex64]) -> Result<Self> {
        if gamma1.len() != gamma2.len() {
            return Err(Error::InvalidGram("detector vectors differ in dimension".into()));
        }
        let g11: f64 = gamma1.iter().map(|z| z.norm_sqr()).sum();
        let g22: f64 = gamma2.iter().map(|z| z.norm_sqr()).sum();
        let g12: Complex64 = gamma1.iter().zip(gamma2).map(|(a, b)| a.conj() * b).sum();
        Self::new(g11, g22, g12)
    }

    /// Identical normalized detector states: no which-path marking.
    pub fn untagged() -> Self {
        Self { g11: 1.0, g22: 1.0, g12: Complex64::new(1.0, 0.0) }
    }

    pub fn g11(&self) -> f64 {
        self.g11
    }

    pub fn g22(&self) -> f64 {
        self.g22
    }

    pub fn g12(&self) -> Complex64 {
        self.g12
    }

    /// `g11·g22 - |g12|²`, the Cauchy–Schwarz gap (≥ 0).
    pub fn schwarz_gap(&self) -> f64 {
        (self.g11 * self.g22 - self.g12.norm_sqr()).max(0.0)
    }

    /// Two vectors in `C²` realizing this Gram matrix (Cholesky factor).
    pub fn realize(&self) -> [[Complex64; 2]; 2] {
        let zero = Complex64::new(0.0, 0.0);
        if self.g11 > 0.0 {
            let a = self.g11.sqrt();
            let b = self.g12 / a;
            let c = (self.g22 - b.norm_sqr()).max(0.0).sqrt();
            [[Complex64::new(a, 0.0), zero], [b, Complex64::new(c, 0.0)]]
        } else {
            [[zero, zero], [Complex64::new(self.g22.sqrt(), 0.0), zero]]
        }
    }
}

/// The plane a sampled field or detection lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Plane {
    Aperture,
    Focal,
    Image,
}

impl Plane {
    pub fn as_str(&self) -> &'static str {
        match self {
            Plane::Aperture => "aperture",
            Plane::Focal => "focal",
            Plane::Image => "image",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "aperture" => Ok(Plane::Aperture),
            "focal" => Ok(Plane::Focal),
            "image" => Ok(Plane::Image),
            other => Err(Error::Config(format!("unknown plane {other:?}"))),
        }
    }
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Uniform 1-D grid `x_j = start + j·step`, `j = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    start: f64,
    step: f64,
    len: usize,
}

impl Grid {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        if !(start.is_finite() && step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGeometry(format!("grid step must be positive, got {step}")));
        }
        if len < 2 {
            return Err(Error::InvalidGeometry("grid needs at least two points".into()));
        }
        Ok(Self { start, step, len })
    }

    /// Even-length grid with `x_{len/2} = 0`, the layout the Fourier engine works on.
    pub fn centered(len: usize, step: f64) -> Result<Self> {
        if !len.is_multiple_of(2) {
            return Err(Error::InvalidGeometry(format!("centered grid needs even length, got {len}")));
        }
        Self::new(-((len / 2) as f64) * step, step, len)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn at(&self, j: usize) -> f64 {
        self.start + j as f64 * self.step
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |j| self.at(j))
    }

    /// True when `x` lies within the outer bin edges.
    pub fn contains(&self, x: f64) -> bool {
        x >= self.start - 0.5 * self.step && x <= self.end() + 0.5 * self.step
    }

    /// Index of the bin whose center is nearest to `x`, if inside the grid.
    pub fn nearest(&self, x: f64) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let j = ((x - self.start) / self.step).round();
        Some((j.max(0.0) as usize).min(self.len - 1))
    }

    /// True when the grid is centered (`x_{len/2} = 0` to rounding).
    pub fn is_centered(&self) -> bool {
        self.len.is_multiple_of(2) && self.at(self.len / 2).abs() <= 1e-9 * self.step
    }
}

/// Complex amplitude sampled on a uniform grid of one plane.
///
/// Aperture and image planes use position (m); the focal plane uses
/// transverse wavevector (rad/m).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    plane: Plane,
    grid: Grid,
    values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(plane: Plane, grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGeometry(format!("{} samples for a grid of {}", values.len(), grid.len())));
        }
        if values.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidState("non-finite field sample".into()));
        }
        Ok(Self { plane, grid, values })
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `|ψ|²` per sample.
    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `Σ|ψ|²·step`, the rectangle-rule power.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.step
    }

    pub fn is_null(&self) -> bool {
        self.values.iter().all(|z| z.norm_sqr() == 0.0)
    }
}

/// Classification of a detected photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spot {
    /// Not yet classified.
    Unclassified,
    /// Image of pinhole 1.
    Spot1,
    /// Image of pinhole 2.
    Spot2,
    /// Outside both image windows.
    Stray,
    /// Focal-plane bin index.
    FringeBin(usize),
    /// Taken out by a wire before reaching any detector.
    Absorbed,
}

impl fmt::Display for Spot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spot::Unclassified => f.write_str("unclassified"),
            Spot::Spot1 => f.write_str("spot1'"),
            Spot::Spot2 => f.write_str("spot2'"),
            Spot::Stray => f.write_str("stray"),
            Spot::FringeBin(i) => write!(f, "fringe_bin({i})"),
            Spot::Absorbed => f.write_str("absorbed"),
        }
    }
}

/// One photon record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    pub photon_id: u64,
    pub plane: Plane,
    /// Coordinate in the plane's own units (m, or rad/m in the focal plane).
    pub position: f64,
    pub spot: Spot,
}

/// How the photon population behind a [`DualityReport`] was counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Accounting {
    AllPhotons,
    ConditionedOnLambda,
    /// Single-spot accounting of half the detected photons. Never physical.
    FallaciousHalfPopulation,
}

impl Accounting {
    pub fn as_str(&self) -> &'static str {
        match self {
            Accounting::AllPhotons => "all_photons",
            Accounting::ConditionedOnLambda => "conditioned_on_lambda",
            Accounting::FallaciousHalfPopulation => "fallacious_half_population",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "all_photons" => Ok(Accounting::AllPhotons),
            "conditioned_on_lambda" => Ok(Accounting::ConditionedOnLambda),
            "fallacious_half_population" => Ok(Accounting::FallaciousHalfPopulation),
            other => Err(Error::Config(format!("unknown accounting {other:?}"))),
        }
    }

    pub fn is_physical(&self) -> bool {
        !matches!(self, Accounting::FallaciousHalfPopulation)
    }
}

impl fmt::Display for Accounting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Distinguishability, visibility and the duality bookkeeping for one population.
///
/// `K² + V²` is always recomputed from `k` and `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityReport {
    k: f64,
    v: f64,
    chi: Option<f64>,
    deficit: f64,
    accounting: Accounting,
}

impl DualityReport {
    /// Assembles a report without checking the duality bound; see [`Self::validate`].
    pub fn from_parts(k: f64, v: f64, chi: Option<f64>, deficit: f64, accounting: Accounting) -> Self {
        Self { k, v, chi, deficit, accounting }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn chi(&self) -> Option<f64> {
        self.chi
    }

    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn accounting(&self) -> Accounting {
        self.accounting
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.k * self.k + self.v * self.v
    }

    /// Checks ranges, and the bound `K² + V² ≤ 1` for physical accounting.
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0 + DUALITY_TOLERANCE;
        if !unit.contains(&self.k) || !unit.contains(&self.v) {
            return Err(Error::InvalidState(format!("K = {} or V = {} outside [0, 1]", self.k, self.v)));
        }
        if !(self.deficit >= -DUALITY_TOLERANCE) {
            return Err(Error::InvalidState(format!("negative deficit {}", self.deficit)));
        }
        if self.accounting.is_physical() && self.sum_of_squares() > 1.0 + DUALITY_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "K² + V² = {} exceeds 1 under {} accounting",
                self.sum_of_squares(),
                self.accounting
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_two_f_imaging() {
        let sys = make_optical_system(1.0, 2.0, 500e-9).unwrap();
        assert_eq!(sys.image_distance(), 2.0);
        assert_eq!(sys.magnification(), -1.0);
    }

    #[test]
    fn demagnified_image() {
        let sys = make_optical_system(1.0, 3.0, 500e-9).unwrap();
        assert!((sys.image_distance() - 1.5).abs() < 1e-15);
        assert!((sys.magnification() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn object_inside_focal_length() {
        assert!(matches!(make_optical_system(1.0, 0.5, 500e-9), Err(Error::NoRealImage { .. })));
        assert!(matches!(make_optical_system(1.0, 1.0, 500e-9), Err(Error::NoRealImage { .. })));
        assert!(matches!(make_optical_system(-1.0, 2.0, 500e-9), Err(Error::InvalidGeometry(_))));
        assert!(matches!(make_optical_system(1.0, 2.0, 0.0), Err(Error::InvalidGeometry(_))));
    }

    #[test]
    fn conjugate_constructor_derives_focal_length() {
        let sys = OpticalSystem::from_conjugates(0.3, 0.6, 633e-9).unwrap();
        assert!((sys.focal_length() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn focal_coordinate_round_trip() {
        let sys = make_optical_system(0.1, 0.2, 500e-9).unwrap();
        let k = 12345.0;
        assert!((sys.focal_wavevector(sys.focal_position(k)) - k).abs() < 1e-9);
    }

    #[test]
    fn null_pair_rejected() {
        assert!(AmplitudePair::real(0.0, 0.0).is_err());
        assert!(AmplitudePair::new(Complex64::new(f64::NAN, 0.0), Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn chi_needs_both_paths() {
        assert!(AmplitudePair::real(1.0, 0.0).unwrap().chi().is_err());
        let a = AmplitudePair::polar(1.0, 0.3, 2.0, -0.4).unwrap();
        assert!((a.chi().unwrap() - 0.7).abs() < 1e-15);
    }

    #[test]
    fn pinhole_geometry_limits() {
        let a = AmplitudePair::real(1.0, 1.0).unwrap();
        assert!(TwoPinholeConfig::new(1.0, 0.2, a).is_ok());
        assert!(TwoPinholeConfig::new(1.0, 0.25, a).is_err());
        assert!(TwoPinholeConfig::new(0.0, 0.1, a).is_err());
        assert!(TwoPinholeConfig::new(1.0, 0.0, a).is_err());
    }

    #[test]
    fn wire_grid_validation() {
        assert!(WireGrid::new(vec![-1.0, 1.0], 0.0, 1.0).is_ok());
        assert!(WireGrid::new(vec![1.0, 1.0], 0.0, 1.0).is_err());
        assert!(WireGrid::new(vec![1.0, -1.0], 0.0, 1.0).is_err());
        assert!(WireGrid::new(vec![0.0], -0.1, 1.0).is_err());
        assert!(WireGrid::new(vec![0.0], 0.0, 1.5).is_err());
    }

    #[test]
    fn gram_from_parallel_vectors_is_accepted() {
        let v = [Complex64::new(0.3, 0.1), Complex64::new(-0.7, 0.2), Complex64::new(0.1, 0.9)];
        let w: Vec<_> = v.iter().map(|z| z * Complex64::new(0.0, 1.7)).collect();
        let g = DetectorGram::from_vectors(&v, &w).unwrap();
        assert!(g.schwarz_gap() < 1e-12);
    }

    #[test]
    fn gram_realization_reproduces_entries() {
        let g = DetectorGram::new(2.0, 0.5, Complex64::new(0.3, -0.4)).unwrap();
        let [v1, v2] = g.realize();
        let back = DetectorGram::from_vectors(&v1, &v2).unwrap();
        assert!((back.g11() - 2.0).abs() < 1e-14);
        assert!((back.g22() - 0.5).abs() < 1e-14);
        assert!((back.g12() - g.g12()).norm() < 1e-14);
    }

    #[test]
    fn duality_report_bound() {
        assert!(DualityReport::from_parts(0.6, 0.8, None, 0.0, Accounting::AllPhotons).validate().is_ok());
        assert!(DualityReport::from_parts(1.0, 1.0, None, 0.0, Accounting::AllPhotons).validate().is_err());
        assert!(DualityReport::from_parts(1.0, 1.0, None, 0.0, Accounting::FallaciousHalfPopulation)
            .validate()
            .is_ok());
    }

    #[test]
    fn grid_lookup() {
        let g = Grid::centered(8, 0.5).unwrap();
        assert_eq!(g.at(4), 0.0);
        assert_eq!(g.nearest(0.26), Some(5));
        assert_eq!(g.nearest(-2.2), Some(0));
        assert_eq!(g.nearest(-2.3), None);
        assert!(g.is_centered());
    }

    proptest! {
        #[test]
        fn lens_relation_holds(f in 1e-3f64..10.0, excess in 1e-3f64..100.0) {
            let p = f * (1.0 + excess);
            let sys = make_optical_system(f, p, 500e-9).unwrap();
            let lhs = 1.0 / sys.object_distance() + 1.0 / sys.image_distance();
            prop_assert!((lhs - 1.0 / f).abs() < LENS_TOLERANCE / f);
        }

        #[test]
        fn gram_rejects_schwarz_violations(
            g11 in 0.0f64..10.0,
            g22 in 0.0f64..10.0,
            angle in 0.0f64..6.3,
            excess in 1e-9f64..10.0,
        ) {
            let bound = (g11 * g22).sqrt();
            let over = Complex64::from_polar(bound * (1.0 + excess) + 1e-100, angle);
            prop_assert!(DetectorGram::new(g11, g22, over).is_err());
            let under = Complex64::from_polar(bound / (1.0 + excess), angle);
            prop_assert!(DetectorGram::new(g11, g22, under).is_ok());
        }
    }
}
