//! Distinguishability and visibility for a few two-path states, with and
//! without a which-path detector.
//!
//! ```sh
//! cargo run --example duality_bound
//! ```

use afshar::duality::{duality_deficit, duality_report};
use afshar::{AmplitudePair, DetectorGram, Result};
use num_complex::Complex64;

fn main() -> Result<()> {
    println!("{:>8} {:>8} {:>8} {:>8} {:>10}", "|c2/c1|", "K", "V", "chi", "K^2+V^2");
    for ratio in [1.0, 0.75, 0.5, 0.25, 0.0] {
        let a = AmplitudePair::polar(1.0, 0.0, ratio, 0.3)?;
        let r = duality_report(&a)?;
        let chi = r.chi().map_or("-".to_string(), |c| format!("{c:.3}"));
        println!("{ratio:>8} {:>8.4} {:>8.4} {chi:>8} {:>10.6}", r.k(), r.v(), r.sum_of_squares());
    }

    // Balanced paths marked by detector states of decreasing overlap.
    let a = AmplitudePair::real(1.0, 1.0)?;
    println!("\n{:>8} {:>8} {:>8} {:>10}", "|g12|", "V", "deficit", "K^2+V^2");
    for overlap in [1.0, 0.8, 0.5, 0.2, 0.0] {
        let r = duality_deficit(&a, &DetectorGram::new(1.0, 1.0, Complex64::new(overlap, 0.0))?)?;
        println!("{overlap:>8} {:>8.4} {:>8.4} {:>10.6}", r.v(), r.deficit(), r.sum_of_squares());
    }
    Ok(())
}
