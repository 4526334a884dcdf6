//! Field engine: aperture field, Fourier (focal) plane, wire grid, image plane.
//!
//! Propagation is ideal Fourier imaging. The focal plane holds the unitary
//! Fourier transform of the aperture field,
//! `ψ(k) = (2π)^{-1/2} ∫ ψ(x)·exp(+ikx) dx`, so two pinholes give
//! `|ψ(k)|² ∝ 1 + V·cos(k·d + χ)` under the single-pinhole envelope. A second
//! transform inverts the aperture plane; scaling by `|M|` then yields the image.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::duality;
use crate::error::{Error, Result};
use crate::fourier;
use crate::model::{DetectorGram, Grid, OpticalSystem, Plane, SampledField, Spot, TwoPinholeConfig, WireGrid};

/// Default aperture-plane sample count.
pub const DEFAULT_SAMPLES: usize = 1 << 14;

/// Default aperture-plane span, in pinhole separations.
pub const DEFAULT_SPAN: f64 = 16.0;

/// Minimum number of samples across one pinhole.
pub const MIN_SAMPLES_PER_PINHOLE: f64 = 16.0;

/// Default number of wires, placed on the innermost fringe minima.
pub const DEFAULT_WIRE_COUNT: usize = 6;

/// Half-width of an image-spot window, in magnified pinhole widths.
pub const SPOT_WINDOW_HALF_WIDTHS: f64 = 3.0;

/// The default centered aperture grid: [`DEFAULT_SAMPLES`] points over [`DEFAULT_SPAN`]`·d`.
pub fn default_aperture_grid(cfg: &TwoPinholeConfig) -> Result<Grid> {
    aperture_grid(cfg, DEFAULT_SAMPLES, DEFAULT_SPAN)
}

/// Centered aperture grid of `samples` points spanning `span·d`.
pub fn aperture_grid(cfg: &TwoPinholeConfig, samples: usize, span: f64) -> Result<Grid> {
    Grid::centered(samples, span * cfg.separation() / samples as f64)
}

/// Top-hat pinholes: `c1/√w` on `[d/2 - w/2, d/2 + w/2]`, `c2/√w` around `-d/2`.
///
/// Edge samples carry the square root of their covered cell fraction, so the
/// sampled power equals `|c1|² + |c2|²` whatever the alignment.
pub fn aperture_field(cfg: &TwoPinholeConfig, grid: &Grid) -> Result<SampledField> {
    let d = cfg.separation();
    let w = cfg.pinhole_width();
    if grid.start() > -d || grid.end() < d {
        return Err(Error::InsufficientSampling(format!(
            "grid [{}, {}] does not span [-d, d] = [{}, {}]",
            grid.start(),
            grid.end(),
            -d,
            d
        )));
    }
    if w / grid.step() < MIN_SAMPLES_PER_PINHOLE {
        return Err(Error::InsufficientSampling(format!(
            "{:.2} samples per pinhole, need {MIN_SAMPLES_PER_PINHOLE}",
            w / grid.step()
        )));
    }
    let a = cfg.amplitudes();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (center, c) in [(d / 2.0, a.c1()), (-d / 2.0, a.c2())] {
        for (j, frac) in pinhole_cells(grid, center, w) {
            values[j] += c * (frac / w).sqrt();
        }
    }
    SampledField::new(Plane::Aperture, *grid, values)
}

/// Cell-coverage fractions of the top-hat `[center - w/2, center + w/2]`, as
/// `(index, fraction)` for every sample it touches. Edges within 1e-9 of a cell
/// boundary are snapped onto it so mirror-image pinholes sample identically.
fn pinhole_cells(grid: &Grid, center: f64, w: f64) -> Vec<(usize, f64)> {
    let snap = |e: f64| {
        let half_steps = (2.0 * e).round() / 2.0;
        if (e - half_steps).abs() < 1e-9 {
            half_steps
        } else {
            e
        }
    };
    let lo = snap((center - w / 2.0 - grid.start()) / grid.step());
    let hi = snap((center + w / 2.0 - grid.start()) / grid.step());
    let first = (lo + 0.5).floor().max(0.0) as usize;
    let last = ((hi - 0.5).ceil().max(0.0) as usize).min(grid.len() - 1);
    (first..=last)
        .filter_map(|j| {
            let jf = j as f64;
            let frac = ((jf + 0.5).min(hi) - (jf - 0.5).max(lo)).clamp(0.0, 1.0);
            (frac > 0.0).then_some((j, frac))
        })
        .collect()
}

/// Unitary Fourier transform of an aperture field onto the focal-plane k-grid.
pub fn to_focal_plane(field: &SampledField) -> Result<SampledField> {
    if field.plane() != Plane::Aperture {
        return Err(Error::InvalidState(format!("expected an aperture field, got {}", field.plane())));
    }
    check_centered(field.grid())?;
    let (k_grid, values) = fourier::transform(field.values(), field.grid())?;
    SampledField::new(Plane::Focal, k_grid, values)
}

fn check_centered(grid: &Grid) -> Result<()> {
    if grid.is_centered() {
        Ok(())
    } else {
        Err(Error::InvalidGeometry("Fourier propagation needs an even, centered grid".into()))
    }
}

/// Intensity `|H(k)|²` of a single sampled pinhole centered on the origin,
/// normalized so that `|ψ(k)|² = envelope(k)·|c1·e^{ikd/2} + c2·e^{-ikd/2}|²`.
///
/// Evaluated by direct summation, so `k` need not lie on the FFT grid.
/// The factorization is exact when `d` is a whole number of grid steps.
pub fn pinhole_envelope(cfg: &TwoPinholeConfig, aperture: &Grid, ks: &[f64]) -> Vec<f64> {
    let (w, dx) = (cfg.pinhole_width(), aperture.step());
    let center = cfg.separation() / 2.0;
    let taps: Vec<(f64, f64)> = pinhole_cells(aperture, center, w)
        .into_iter()
        .map(|(j, frac)| (aperture.at(j) - center, (frac / w).sqrt()))
        .collect();
    let norm = dx * dx / (2.0 * PI);
    ks.iter()
        .map(|k| {
            let h: Complex64 = taps.iter().map(|(u, a)| Complex64::from_polar(*a, k * u)).sum();
            h.norm_sqr() * norm
        })
        .collect()
}

/// Continuum single-pinhole envelope `w/(2π)·sinc²(kw/2)`.
pub fn sinc_envelope(pinhole_width: f64, k: f64) -> f64 {
    let u = k * pinhole_width / 2.0;
    let s = if u == 0.0 { 1.0 } else { u.sin() / u };
    pinhole_width / (2.0 * PI) * s * s
}

/// Model focal intensity: envelope times `|c1·e^{ikd/2} + c2·e^{-ikd/2}|²`.
pub fn analytic_focal_intensity(cfg: &TwoPinholeConfig, aperture: &Grid, ks: &[f64]) -> Vec<f64> {
    let a = cfg.amplitudes();
    let half = cfg.separation() / 2.0;
    pinhole_envelope(cfg, aperture, ks)
        .into_iter()
        .zip(ks)
        .map(|(env, k)| {
            let psi = a.c1() * Complex64::from_polar(1.0, k * half) + a.c2() * Complex64::from_polar(1.0, -k * half);
            env * psi.norm_sqr()
        })
        .collect()
}

/// The `n_wires` fringe minima `cos(k·d + χ) = -1` nearest to `k = 0`.
///
/// Ties in `|k|` are broken toward negative `k`; the result is increasing.
pub fn wire_minima_positions(cfg: &TwoPinholeConfig, n_wires: usize) -> Result<Vec<f64>> {
    let a = cfg.amplitudes();
    let chi = a.chi().map_err(|_| Error::NoFringes("one path is closed, the profile has no minima".into()))?;
    let d = cfg.separation();
    let reach = n_wires as i64 + 1;
    let mut ks: Vec<f64> = (-reach..=reach).map(|m| (PI * (2 * m + 1) as f64 - chi) / d).collect();
    ks.sort_by(|x, y| x.abs().total_cmp(&y.abs()).then(x.total_cmp(y)));
    ks.truncate(n_wires);
    ks.sort_by(f64::total_cmp);
    Ok(ks)
}

/// Outcome of passing a focal-plane field through a wire grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridInteraction {
    pub transmitted: SampledField,
    /// Fraction of incident photons taken out by the wires.
    pub absorbed_probability: f64,
    /// `|ψ(k_wire)|²` relative to the peak focal intensity, per wire.
    pub per_wire_overlap: Vec<f64>,
}

/// Applies a wire grid to a focal-plane field.
///
/// Zero-width wires occupy the nearest k-bin and remove the fraction `ε` of
/// its power without scattering. Finite-width wires multiply the amplitude by
/// `√(1-ε)` on every bin within `[k - w_v, k + w_v]`, leaving hard notches.
pub fn apply_wire_grid(field: &SampledField, wires: &WireGrid) -> Result<GridInteraction> {
    if field.plane() != Plane::Focal {
        return Err(Error::InvalidState(format!("wires sit in the focal plane, got a {} field", field.plane())));
    }
    let grid = *field.grid();
    let incident = field.power();
    if !(incident > 0.0) {
        return Err(Error::NullField);
    }
    let intensity = field.intensity();
    let peak = intensity.iter().cloned().fold(0.0, f64::max);

    // number of wire passes per bin
    let mut passes = vec![0u32; grid.len()];
    let mut per_wire_overlap = Vec::with_capacity(wires.positions().len());
    for &kw in wires.positions() {
        let center = grid.nearest(kw).ok_or_else(|| {
            Error::OutOfDomain(format!("wire at k = {kw} outside [{}, {}]", grid.start(), grid.end()))
        })?;
        per_wire_overlap.push(intensity[center] / peak);
        if wires.is_zero_width() {
            passes[center] += 1;
        } else {
            let lo = ((kw - wires.half_width() - grid.start()) / grid.step()).ceil().max(0.0) as usize;
            let hi = (((kw + wires.half_width() - grid.start()) / grid.step()).floor() as usize).min(grid.len() - 1);
            for p in &mut passes[lo..=hi.max(lo)] {
                *p += 1;
            }
            // a notch narrower than one bin still blocks its center bin
            if lo > hi {
                passes[center] += 1;
            }
        }
    }

    let transmission = (1.0 - wires.efficiency()).sqrt();
    let mut removed = 0.0;
    let values: Vec<Complex64> = field
        .values()
        .iter()
        .zip(&passes)
        .map(|(v, &n)| {
            if n == 0 {
                return *v;
            }
            let t = transmission.powi(n as i32);
            removed += v.norm_sqr() * (1.0 - t * t);
            v * t
        })
        .collect();
    let transmitted = SampledField::new(Plane::Focal, grid, values)?;
    Ok(GridInteraction { transmitted, absorbed_probability: removed * grid.step() / incident, per_wire_overlap })
}

/// Images a focal-plane field onto the plane conjugate to the apertures.
///
/// The result is `ψ_img(x) = ψ_obj(x/M)/√|M|`, on a grid `|M|` times the aperture grid.
pub fn to_image_plane(field: &SampledField, sys: &OpticalSystem) -> Result<SampledField> {
    if field.plane() != Plane::Focal {
        return Err(Error::InvalidState(format!("expected a focal field, got {}", field.plane())));
    }
    check_centered(field.grid())?;
    let (inverted_grid, values) = fourier::transform(field.values(), field.grid())?;
    let m = sys.magnification().abs();
    let grid = Grid::centered(inverted_grid.len(), inverted_grid.step() * m)?;
    let scale = 1.0 / m.sqrt();
    SampledField::new(Plane::Image, grid, values.into_iter().map(|v| v * scale).collect())
}

/// The two image-plane detection windows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotWindows {
    /// Center of the image of pinhole 1, `M·d/2`.
    pub center1: f64,
    /// Center of the image of pinhole 2, `-M·d/2`.
    pub center2: f64,
    pub half_width: f64,
}

impl SpotWindows {
    /// Windows of half-width `3·w·|M|` around the magnified pinhole images.
    pub fn new(cfg: &TwoPinholeConfig, sys: &OpticalSystem) -> Result<Self> {
        let m = sys.magnification();
        let half_width = SPOT_WINDOW_HALF_WIDTHS * cfg.pinhole_width() * m.abs();
        let separation = cfg.separation() * m.abs();
        if 2.0 * half_width >= separation {
            return Err(Error::UnresolvedSpots { half_width, separation });
        }
        Ok(Self { center1: m * cfg.separation() / 2.0, center2: -m * cfg.separation() / 2.0, half_width })
    }

    pub fn classify(&self, x: f64) -> Spot {
        if (x - self.center1).abs() <= self.half_width {
            Spot::Spot1
        } else if (x - self.center2).abs() <= self.half_width {
            Spot::Spot2
        } else {
            Spot::Stray
        }
    }
}

/// Powers collected in the two image windows and outside them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotIntensities {
    pub spot1: f64,
    pub spot2: f64,
    pub stray: f64,
}

impl SpotIntensities {
    pub fn total(&self) -> f64 {
        self.spot1 + self.spot2 + self.stray
    }
}

/// Integrates `|ψ|²` over the image windows; a sample belongs to the window
/// containing its grid point.
pub fn spot_intensities(field: &SampledField, cfg: &TwoPinholeConfig, sys: &OpticalSystem) -> Result<SpotIntensities> {
    if field.plane() != Plane::Image {
        return Err(Error::InvalidState(format!("expected an image field, got {}", field.plane())));
    }
    let windows = SpotWindows::new(cfg, sys)?;
    let dx = field.grid().step();
    let mut out = SpotIntensities { spot1: 0.0, spot2: 0.0, stray: 0.0 };
    for (x, v) in field.grid().points().zip(field.values()) {
        let p = v.norm_sqr() * dx;
        match windows.classify(x) {
            Spot::Spot1 => out.spot1 += p,
            Spot::Spot2 => out.spot2 += p,
            _ => out.stray += p,
        }
    }
    Ok(out)
}

/// `‖I_a - I_b‖₂ / ‖I_b‖₂` between the intensities of two fields on the same grid.
pub fn intensity_deviation(a: &SampledField, b: &SampledField) -> Result<f64> {
    if a.grid() != b.grid() {
        return Err(Error::InvalidGeometry("fields live on different grids".into()));
    }
    let (num, den) = a.values().iter().zip(b.values()).fold((0.0, 0.0), |(n, d), (x, y)| {
        let (ix, iy) = (x.norm_sqr(), y.norm_sqr());
        (n + (ix - iy).powi(2), d + iy * iy)
    });
    if den == 0.0 {
        return Err(Error::NullField);
    }
    Ok((num / den).sqrt())
}

/// Focal intensity with the paths entangled to a which-path detector, traced
/// over the detector: the incoherent sum of the focal intensities of the
/// branches conditioned on a basis of the detector space.
pub fn entangled_focal_intensity(cfg: &TwoPinholeConfig, gram: &DetectorGram, aperture: &Grid) -> Result<SampledField> {
    let [g1, g2] = gram.realize();
    let basis = vec![
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];
    let branches = duality::condition_on_projector(&cfg.amplitudes(), &g1, &g2, &basis)?;
    let mut intensity = vec![0.0; aperture.len()];
    let mut k_grid = None;
    for b in branches {
        let focal = to_focal_plane(&aperture_field(&cfg.with_amplitudes(b.amplitudes), aperture)?)?;
        for (acc, v) in intensity.iter_mut().zip(focal.values()) {
            *acc += v.norm_sqr();
        }
        k_grid = Some(*focal.grid());
    }
    let k_grid = k_grid.ok_or(Error::NullField)?;
    // a real, nonnegative amplitude carrying the mixed-state intensity
    let values = intensity.into_iter().map(|i| Complex64::new(i.sqrt(), 0.0)).collect();
    SampledField::new(Plane::Focal, k_grid, values)
}

/// Least-squares fit of `mean + c·cos(k·d) + s·sin(k·d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FringeFit {
    pub mean: f64,
    pub cos: f64,
    pub sin: f64,
}

impl FringeFit {
    /// Fringe amplitude over mean.
    pub fn visibility(&self) -> f64 {
        self.cos.hypot(self.sin) / self.mean
    }

    /// Phase `χ` in `1 + V·cos(k·d + χ)`.
    pub fn phase(&self) -> f64 {
        (-self.sin).atan2(self.cos)
    }

    pub fn extrema(&self) -> (f64, f64) {
        let amp = self.cos.hypot(self.sin);
        (self.mean + amp, self.mean - amp)
    }
}

/// Weighted fit of `y ≈ basis·(mean + c·cos(kd) + s·sin(kd))`, weights `1/var`.
pub(crate) fn fit_fringe(ks: &[f64], ys: &[f64], basis: &[f64], inv_var: &[f64], separation: f64) -> Result<FringeFit> {
    let mut ata = [[0.0f64; 3]; 3];
    let mut aty = [0.0f64; 3];
    for i in 0..ks.len() {
        let phase = ks[i] * separation;
        let row = [basis[i], basis[i] * phase.cos(), basis[i] * phase.sin()];
        for r in 0..3 {
            aty[r] += inv_var[i] * row[r] * ys[i];
            for c in 0..3 {
                ata[r][c] += inv_var[i] * row[r] * row[c];
            }
        }
    }
    let sol = solve3(ata, aty).ok_or_else(|| Error::InsufficientStatistics("fringe fit is degenerate".into()))?;
    Ok(FringeFit { mean: sol[0], cos: sol[1], sin: sol[2] })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Visibility read off a focal-plane field: the envelope is divided out over
/// the central lobe, a fringe is fitted, and its extrema go through
/// [`duality::visibility_from_extrema`].
pub fn visibility_from_focal_field(field: &SampledField, cfg: &TwoPinholeConfig, aperture: &Grid) -> Result<f64> {
    let ks: Vec<f64> = field.grid().points().collect();
    let envelope = pinhole_envelope(cfg, aperture, &ks);
    let peak = envelope.iter().cloned().fold(0.0, f64::max);
    let lobe = 2.0 * PI / cfg.pinhole_width();
    let keep: Vec<usize> = (0..ks.len()).filter(|&i| ks[i].abs() < 0.9 * lobe && envelope[i] > 1e-3 * peak).collect();
    let intensity = field.intensity();
    let sel = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let ones = vec![1.0; keep.len()];
    let fit = fit_fringe(&sel(&ks), &sel(&intensity), &sel(&envelope), &ones, cfg.separation())?;
    let (i_max, i_min) = fit.extrema();
    duality::visibility_from_extrema(i_max, i_min.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_optical_system, AmplitudePair};

    fn cfg(c1: Complex64, c2: Complex64) -> TwoPinholeConfig {
        TwoPinholeConfig::new(1e-3, 65.0 * 1e-3 / 1024.0, AmplitudePair::new(c1, c2).unwrap()).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_pinhole_support() {
        let c = cfg(re(1.0), re(0.0));
        let grid = default_aperture_grid(&c).unwrap();
        let f = aperture_field(&c, &grid).unwrap();
        let (lo, hi) = (c.separation() / 2.0 - c.pinhole_width() / 2.0, c.separation() / 2.0 + c.pinhole_width() / 2.0);
        for (x, v) in grid.points().zip(f.values()) {
            if v.norm() > 0.0 {
                assert!(x + grid.step() / 2.0 > lo && x - grid.step() / 2.0 < hi);
            }
        }
        assert!((f.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn symmetric_pair_is_even() {
        let c = cfg(re(0.8), re(0.8));
        let grid = default_aperture_grid(&c).unwrap();
        let v = aperture_field(&c, &grid).unwrap().into_values();
        let mid = grid.len() / 2;
        for m in 1..mid {
            assert_eq!(v[mid + m], v[mid - m]);
        }
    }

    #[test]
    fn power_with_misaligned_edges() {
        let a = AmplitudePair::polar(0.7, 0.2, 1.9, -1.0).unwrap();
        let c = TwoPinholeConfig::new(1.0e-3, 0.0713e-3, a).unwrap();
        let grid = aperture_grid(&c, 4096, 5.3).unwrap();
        let f = aperture_field(&c, &grid).unwrap();
        assert!((f.power() - a.total_weight()).abs() < 1e-9 * a.total_weight());
    }

    #[test]
    fn under_resolved_grid_rejected() {
        let c = cfg(re(1.0), re(1.0));
        let coarse = aperture_grid(&c, 1024, 16.0).unwrap();
        assert!(matches!(aperture_field(&c, &coarse), Err(Error::InsufficientSampling(_))));
        let narrow = aperture_grid(&c, 1 << 14, 1.5).unwrap();
        assert!(matches!(aperture_field(&c, &narrow), Err(Error::InsufficientSampling(_))));
    }

    #[test]
    fn single_pinhole_spectrum_has_no_fringes() {
        let c = cfg(re(1.0), re(0.0));
        let grid = default_aperture_grid(&c).unwrap();
        let focal = to_focal_plane(&aperture_field(&c, &grid).unwrap()).unwrap();
        let ks: Vec<f64> = focal.grid().points().collect();
        let env = pinhole_envelope(&c, &grid, &ks);
        let peak = env.iter().cloned().fold(0.0, f64::max);
        for (i, v) in focal.values().iter().enumerate() {
            assert!((v.norm_sqr() - env[i]).abs() < 1e-9 * peak);
        }
        // continuum envelope at the lobe center
        let center = sinc_envelope(c.pinhole_width(), 0.0);
        assert!((env[grid.len() / 2] - center).abs() < 1e-6 * center);
    }

    #[test]
    fn symmetric_zeros_at_odd_multiples() {
        let c = cfg(re(1.0), re(1.0));
        let grid = default_aperture_grid(&c).unwrap();
        let focal = to_focal_plane(&aperture_field(&c, &grid).unwrap()).unwrap();
        let peak = focal.intensity().iter().cloned().fold(0.0, f64::max);
        let d = c.separation();
        for n in -4i32..4 {
            let k = PI * (2 * n + 1) as f64 / d;
            let j = focal.grid().nearest(k).unwrap();
            assert!((focal.grid().at(j) - k).abs() < 1e-9 * k.abs());
            assert!(focal.values()[j].norm_sqr() < 1e-20 * peak);
        }
        assert!((focal.power() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn wire_minima_examples() {
        let sym = TwoPinholeConfig::new(1.0, 0.1, AmplitudePair::real(1.0, 1.0).unwrap()).unwrap();
        let ks = wire_minima_positions(&sym, 4).unwrap();
        let expected = [-3.0 * PI, -PI, PI, 3.0 * PI];
        for (k, e) in ks.iter().zip(expected) {
            assert!((k - e).abs() < 1e-12);
        }
        let anti = sym.with_amplitudes(AmplitudePair::real(1.0, -1.0).unwrap());
        let ks = wire_minima_positions(&anti, 5).unwrap();
        let expected = [-4.0 * PI, -2.0 * PI, 0.0, 2.0 * PI, 4.0 * PI];
        for (k, e) in ks.iter().zip(expected) {
            assert!((k - e).abs() < 1e-12);
        }
        let closed = sym.with_amplitudes(AmplitudePair::real(1.0, 0.0).unwrap());
        assert!(matches!(wire_minima_positions(&closed, 6), Err(Error::NoFringes(_))));
    }

    fn focal_of(c: &TwoPinholeConfig) -> SampledField {
        let grid = default_aperture_grid(c).unwrap();
        to_focal_plane(&aperture_field(c, &grid).unwrap()).unwrap()
    }

    #[test]
    fn ideal_wires_at_minima_absorb_nothing() {
        let c = cfg(re(1.0), re(1.0));
        let wires = WireGrid::ideal(wire_minima_positions(&c, 6).unwrap()).unwrap();
        let hit = apply_wire_grid(&focal_of(&c), &wires).unwrap();
        assert!(hit.absorbed_probability < 1e-6);
        assert!(hit.per_wire_overlap.iter().all(|o| *o < 1e-12));

        let one = cfg(re(1.0), re(0.0));
        let hit = apply_wire_grid(&focal_of(&one), &wires).unwrap();
        assert!(hit.absorbed_probability > 1e-3);

        let clear = WireGrid::new(wires.positions().to_vec(), 0.0, 0.0).unwrap();
        assert_eq!(apply_wire_grid(&focal_of(&one), &clear).unwrap().absorbed_probability, 0.0);
    }

    #[test]
    fn wire_power_balance() {
        let c = cfg(Complex64::from_polar(1.0, 0.4), re(0.6));
        let focal = focal_of(&c);
        for (hw, eps) in [(0.0, 0.7), (300.0, 1.0), (1500.0, 0.35)] {
            let wires = WireGrid::new(vec![-9000.0, -2000.0, 1234.0, 5000.0], hw, eps).unwrap();
            let hit = apply_wire_grid(&focal, &wires).unwrap();
            let balance = hit.absorbed_probability + hit.transmitted.power() / focal.power();
            assert!((balance - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn wire_outside_grid() {
        let c = cfg(re(1.0), re(1.0));
        let wires = WireGrid::ideal(vec![1e12]).unwrap();
        assert!(matches!(apply_wire_grid(&focal_of(&c), &wires), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn single_spot_image_is_inverted() {
        let c = cfg(re(1.0), re(0.0));
        let sys = make_optical_system(0.1, 0.2, 500e-9).unwrap();
        let img = to_image_plane(&focal_of(&c), &sys).unwrap();
        let i = img.intensity();
        let (num, den) = img.grid().points().zip(&i).fold((0.0, 0.0), |(n, d), (x, w)| (n + x * w, d + w));
        assert!((num / den + c.separation() / 2.0).abs() < 1e-9 * c.separation());
    }

    #[test]
    fn spot_windows_reject_overlap() {
        let c = TwoPinholeConfig::new(1.0, 0.2, AmplitudePair::real(1.0, 1.0).unwrap()).unwrap();
        let sys = make_optical_system(1.0, 2.0, 500e-9).unwrap();
        assert!(matches!(SpotWindows::new(&c, &sys), Err(Error::UnresolvedSpots { .. })));
    }

    #[test]
    fn fit_recovers_visibility() {
        let a = AmplitudePair::polar(1.0, 0.9, 0.45, -0.2).unwrap();
        let c = cfg(a.c1(), a.c2());
        let grid = default_aperture_grid(&c).unwrap();
        let v = visibility_from_focal_field(&focal_of(&c), &c, &grid).unwrap();
        assert!((v - duality::visibility(&a).unwrap()).abs() < 1e-6);
    }
}
