//! What the image spots and the dark wires say about the state, counted over
//! all photons, next to the half-population miscount that claims both
//! `K = 1` and `V = 1`.
//!
//! ```sh
//! cargo run --release --example backward_inference
//! ```

use afshar::duality::{fallacious_half_population_report, infer_from_image_and_zeros};
use afshar::optics::{
    aperture_field, apply_wire_grid, default_aperture_grid, spot_intensities, to_focal_plane, to_image_plane,
    wire_minima_positions,
};
use afshar::{AmplitudePair, OpticalSystem, Result, TwoPinholeConfig, WireGrid};

fn main() -> Result<()> {
    let d = 4e-3;
    let sys = OpticalSystem::from_conjugates(0.4, 0.4, 500e-9)?;
    let cfg = TwoPinholeConfig::new(d, 65.0 * d / 1024.0, AmplitudePair::real(1.0, 1.0)?)?;
    let wires = WireGrid::ideal(wire_minima_positions(&cfg, 6)?)?;

    let focal = to_focal_plane(&aperture_field(&cfg, &default_aperture_grid(&cfg)?)?)?;
    let hit = apply_wire_grid(&focal, &wires)?;
    println!("absorbed by wires: {:.2e}", hit.absorbed_probability);
    let spots = spot_intensities(&to_image_plane(&hit.transmitted, &sys)?, &cfg, &sys)?;
    println!("image spots: {:.6} / {:.6}", spots.spot1, spots.spot2);

    let inferred = infer_from_image_and_zeros(spots.spot1, spots.spot2, wires.positions(), d)?;
    let fallacy = fallacious_half_population_report(&AmplitudePair::real(spots.spot1.sqrt(), spots.spot2.sqrt())?)?;
    for (label, r) in [("all photons", inferred), ("half-population miscount", fallacy)] {
        let ok = match (r.accounting().is_physical(), r.validate()) {
            (false, _) => "not a physical count, never fed forward",
            (true, Ok(())) => "within the bound",
            (true, Err(_)) => "violates the bound",
        };
        println!("{label:>26}: K {:.4}  V {:.4}  K^2+V^2 {:.4}  ({ok})", r.k(), r.v(), r.sum_of_squares());
    }
    Ok(())
}
