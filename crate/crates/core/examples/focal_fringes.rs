//! Propagates the pinhole aperture to the focal plane and compares the
//! numerical fringes with the closed form `1 + V cos(kd + χ)` times the
//! single-pinhole envelope.
//!
//! ```sh
//! cargo run --release --example focal_fringes
//! ```

use afshar::duality::visibility;
use afshar::optics::{
    analytic_focal_intensity, aperture_field, default_aperture_grid, to_focal_plane, visibility_from_focal_field,
};
use afshar::{AmplitudePair, Result, TwoPinholeConfig};

fn main() -> Result<()> {
    let d = 4e-3;
    println!("{:>6} {:>10} {:>10} {:>12}", "c2", "V exact", "V fitted", "max |dI|/I0");
    for c2 in [1.0, 0.6, 0.3, 0.0] {
        let cfg = TwoPinholeConfig::new(d, 65.0 * d / 1024.0, AmplitudePair::real(1.0, c2)?)?;
        let grid = default_aperture_grid(&cfg)?;
        let focal = to_focal_plane(&aperture_field(&cfg, &grid)?)?;
        let ks: Vec<f64> = focal.grid().points().collect();
        let exact = analytic_focal_intensity(&cfg, &grid, &ks);
        let peak = exact.iter().cloned().fold(0.0, f64::max);
        let worst = focal.intensity().iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / peak;
        let fitted = visibility_from_focal_field(&focal, &cfg, &grid)?;
        println!("{c2:>6} {:>10.6} {fitted:>10.6} {worst:>12.2e}", visibility(&cfg.amplitudes())?);
    }
    Ok(())
}
