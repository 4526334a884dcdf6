//! Wires on the dark fringes: with both pinholes open they absorb nothing and
//! leave the image untouched; with one pinhole closed they cast a shadow.
//!
//! ```sh
//! cargo run --release --example wire_grid
//! ```

use afshar::optics::{
    aperture_field, apply_wire_grid, default_aperture_grid, intensity_deviation, spot_intensities, to_focal_plane,
    to_image_plane, wire_minima_positions,
};
use afshar::{AmplitudePair, OpticalSystem, Result, TwoPinholeConfig, WireGrid};

fn main() -> Result<()> {
    let d = 4e-3;
    let sys = OpticalSystem::from_conjugates(0.4, 0.4, 500e-9)?;
    let balanced = TwoPinholeConfig::new(d, 65.0 * d / 1024.0, AmplitudePair::real(1.0, 1.0)?)?;
    let wires = WireGrid::ideal(wire_minima_positions(&balanced, 6)?)?;
    println!("wires at k = {:?} rad/m", wires.positions().iter().map(|k| format!("{k:.1}")).collect::<Vec<_>>());
    println!("magnification {}", sys.magnification());

    println!("\n{:>8} {:>12} {:>12} {:>10} {:>10}", "c2", "absorbed", "image dev", "spot1'", "spot2'");
    for c2 in [1.0, 0.5, 0.0] {
        let cfg = balanced.with_amplitudes(AmplitudePair::real(1.0, c2)?);
        let focal = to_focal_plane(&aperture_field(&cfg, &default_aperture_grid(&cfg)?)?)?;
        let hit = apply_wire_grid(&focal, &wires)?;
        let open = to_image_plane(&focal, &sys)?;
        let shaded = to_image_plane(&hit.transmitted, &sys)?;
        let spots = spot_intensities(&shaded, &cfg, &sys)?;
        println!(
            "{c2:>8} {:>12.3e} {:>12.3e} {:>10.4} {:>10.4}",
            hit.absorbed_probability,
            intensity_deviation(&shaded, &open)?,
            spots.spot1 / spots.total(),
            spots.spot2 / spots.total()
        );
    }
    Ok(())
}
