//! Unitary continuous-style Fourier transform on centered grids.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::Result;
use crate::model::Grid;

/// `g(k_m) = dx/√(2π) · Σ_j f(x_j)·exp(+i·k_m·x_j)` with `x_j = (j - N/2)·dx`
/// and `k_m = (m - N/2)·2π/(N·dx)`.
///
/// Power is conserved: `Σ|g|²·dk = Σ|f|²·dx`. Applying it twice maps
/// `f(x)` to `f(-x)`.
pub(crate) fn transform(values: &[Complex64], grid: &Grid) -> Result<(Grid, Vec<Complex64>)> {
    let n = values.len();
    let dx = grid.step();
    let out_grid = Grid::centered(n, 2.0 * PI / (n as f64 * dx))?;
    let mut buf: Vec<Complex64> = values.iter().enumerate().map(|(j, v)| if j % 2 == 0 { *v } else { -*v }).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    // exp(iπN/2) from the product of the two half-grid offsets
    let global = Complex64::from_polar(dx / (2.0 * PI).sqrt(), PI * (n as f64) / 2.0 % (2.0 * PI));
    for (m, v) in buf.iter_mut().enumerate() {
        *v *= if m % 2 == 0 { global } else { -global };
    }
    Ok((out_grid, buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_sum() {
        let n = 24;
        let grid = Grid::centered(n, 0.37).unwrap();
        let f: Vec<Complex64> = (0..n).map(|j| Complex64::new((j as f64).sin(), (j as f64 * 0.3).cos())).collect();
        let (kg, g) = transform(&f, &grid).unwrap();
        for m in 0..n {
            let k = kg.at(m);
            let direct: Complex64 =
                (0..n).map(|j| f[j] * Complex64::from_polar(1.0, k * grid.at(j))).sum::<Complex64>()
                    * (grid.step() / (2.0 * PI).sqrt());
            assert!((direct - g[m]).norm() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn twice_is_inversion() {
        for n in [16, 18] {
            let grid = Grid::centered(n, 0.1).unwrap();
            let f: Vec<Complex64> = (0..n).map(|j| Complex64::new(j as f64, -(j as f64).sqrt())).collect();
            let (kg, g) = transform(&f, &grid).unwrap();
            let (_, h) = transform(&g, &kg).unwrap();
            for j in 1..n {
                assert!((h[j] - f[n - j]).norm() < 1e-10);
            }
            assert!((h[0] - f[0]).norm() < 1e-10);
        }
    }
}
