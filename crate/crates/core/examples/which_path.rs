//! A which-path detector splits the light into branches, one per detector
//! outcome. Each branch keeps its own fringes; their sum washes them out as
//! the detector states become distinguishable.
//!
//! ```sh
//! cargo run --release --example which_path
//! ```

use afshar::duality::{condition_on_projector, duality_deficit};
use afshar::optics::{default_aperture_grid, entangled_focal_intensity, visibility_from_focal_field};
use afshar::{AmplitudePair, DetectorGram, Result, TwoPinholeConfig};
use num_complex::Complex64;

fn main() -> Result<()> {
    let d = 4e-3;
    let a = AmplitudePair::real(1.0, 1.0)?;
    let cfg = TwoPinholeConfig::new(d, 65.0 * d / 1024.0, a)?;
    let grid = default_aperture_grid(&cfg)?;
    let basis = vec![
        vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    ];

    for overlap in [1.0, 0.5, 0.0] {
        let gram = DetectorGram::new(1.0, 1.0, Complex64::new(overlap, 0.0))?;
        let report = duality_deficit(&a, &gram)?;
        let focal = entangled_focal_intensity(&cfg, &gram, &grid)?;
        let fitted = visibility_from_focal_field(&focal, &cfg, &grid)?;
        println!("overlap {overlap}: V = {:.4} (fit {fitted:.4}), deficit {:.4}", report.v(), report.deficit());

        let [g1, g2] = gram.realize();
        for branch in condition_on_projector(&a, &g1, &g2, &basis)? {
            let r = branch.report()?;
            println!("  outcome {}: weight {:.3}, K {:.3}, V {:.3}", branch.lambda_index, branch.weight, r.k(), r.v());
        }
    }
    Ok(())
}
