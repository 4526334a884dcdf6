//! How much a handful of dark wires pins down the fringe profile: the number
//! of discretized profiles vanishing at the wires grows exponentially with
//! the grid, so the cos profile is one choice among very many.
//!
//! ```sh
//! cargo run --release --example profile_entropy
//! ```

use afshar::inference::{match_fraction, quarter_wave_cos_family, sample_profile, ProfileKind};
use afshar::Result;

fn main() -> Result<()> {
    println!("{:>6} {:>6} {:>10} {:>12} {:>12}", "grid", "free", "entropy", "e^-S", "drawn match");
    for n in [8, 16, 32, 64, 128] {
        let (space, cos) = quarter_wave_cos_family(n, 4e-3)?;
        let reference = sample_profile(&space, 1, &cos)?;
        let seen = match_fraction(&space, &reference, 50_000, 1)?;
        println!(
            "{n:>6} {:>6} {:>10.3} {:>12.3e} {seen:>12.3e}",
            space.free_samples(),
            space.entropy(),
            (-space.entropy()).exp()
        );
    }

    let (space, cos) = quarter_wave_cos_family(16, 4e-3)?;
    for (label, kind) in
        [("cos", cos), ("arbitrary", ProfileKind::Arbitrary), ("discontinuous", ProfileKind::Discontinuous)]
    {
        let p = sample_profile(&space, 7, &kind)?;
        println!("{label:>14}: {}", p.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>().join(" "));
    }
    Ok(())
}
