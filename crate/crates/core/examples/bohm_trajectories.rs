//! Guided trajectories from the pinholes through the lens to the image plane.
//! Paths never cross, so light from pinhole 1 lands in the spot on its own
//! side of the axis, which the imaging would assign to pinhole 2.
//!
//! ```sh
//! cargo run --release --example bohm_trajectories [trajectories] [seed]
//! ```

use afshar::bohm::{Volume, MAX_STEP_FRACTION};
use afshar::{AmplitudePair, OpticalSystem, Result, Spot, TwoPinholeConfig};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(1000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let d = 4e-3;
    let sys = OpticalSystem::from_conjugates(0.4, 0.4, 500e-9)?;

    for (c2, side) in [(1.0, Some(Spot::Spot1)), (1.0, None), (0.5, None)] {
        let cfg = TwoPinholeConfig::new(d, 65.0 * d / 1024.0, AmplitudePair::real(1.0, c2)?)?;
        let volume = Volume::new(&cfg, &sys)?;
        let starts = volume.launch_points(n, seed, side)?;
        let paths = volume.trace_all(&starts, MAX_STEP_FRACTION * volume.length())?;
        let r = volume.report(&paths)?;
        let from = if side.is_some() { "pinhole 1" } else { "both pinholes" };
        println!(
            "c2 = {c2}, {n} from {from}: spot1' {} spot2' {} stray {}, expected spot1' share {:.3}, chi^2 {:.2}, wrong side {:.3}, crossings {}",
            r.spot1, r.spot2, r.stray, r.expected_spot1_fraction, r.chi_square, r.wrong_detector_fraction, r.crossings
        );
        if let Some(p) = paths.first() {
            let mid = p.samples[p.samples.len() / 2];
            println!("  first path: x {:.3e} -> {:.3e} via ({:.3}, {:.3e})", p.start_x, p.end_x(), mid.0, mid.1);
        }
    }
    Ok(())
}
