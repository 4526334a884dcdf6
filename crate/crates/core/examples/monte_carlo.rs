//! Photon-by-photon detection: spot counts in the image plane give `K̂`,
//! a fit to focal-plane counts gives `V̂`.
//!
//! ```sh
//! cargo run --release --example monte_carlo [photons] [seed]
//! ```

use afshar::duality::{distinguishability, visibility};
use afshar::optics::{aperture_field, default_aperture_grid, to_focal_plane, to_image_plane};
use afshar::sampling::{classify_spots, estimate_distinguishability, estimate_visibility, sample_detections};
use afshar::{AmplitudePair, OpticalSystem, Result, TwoPinholeConfig};

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let n: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let d = 4e-3;
    let sys = OpticalSystem::from_conjugates(0.4, 0.4, 500e-9)?;

    println!("{n} photons, seed {seed}");
    println!("{:>6} {:>8} {:>8} {:>8} {:>8} {:>8}", "c2", "K", "K^", "V", "V^", "+-");
    for c2 in [1.0, 0.8, 0.4, 0.0] {
        let cfg = TwoPinholeConfig::new(d, 65.0 * d / 1024.0, AmplitudePair::real(1.0, c2)?)?;
        let grid = default_aperture_grid(&cfg)?;
        let focal = to_focal_plane(&aperture_field(&cfg, &grid)?)?;

        let mut image_run = sample_detections(&to_image_plane(&focal, &sys)?, n, seed, 0.0)?;
        let counts = classify_spots(&mut image_run, &cfg, &sys)?;
        let k_hat = estimate_distinguishability(counts.spot1, counts.spot2)?;

        let focal_run = sample_detections(&focal, n, seed, 0.0)?;
        let v_hat = estimate_visibility(&focal_run, &cfg, &grid, seed)?;

        let a = cfg.amplitudes();
        println!(
            "{c2:>6} {:>8.4} {k_hat:>8.4} {:>8.4} {:>8.4} {:>8.4}",
            distinguishability(&a)?,
            visibility(&a)?,
            v_hat.v,
            v_hat.stderr
        );
    }
    Ok(())
}
