//! Runs scenarios described in a TOML manifest and writes one output
//! directory per scenario. Without an argument, runs all presets.
//!
//! ```sh
//! cargo run --release --example run_manifest [manifest.toml] [out-dir]
//! ```

use std::path::PathBuf;

use afshar::report::{write_bundle, EmitOptions};
use afshar::scenario::{manifest_text, parse_manifest, preset, run_scenario, PRESETS};
use afshar::Result;

fn main() -> Result<()> {
    let mut args = std::env::args().skip(1);
    let text = match args.next() {
        Some(path) => std::fs::read_to_string(path)?,
        None => manifest_text(&PRESETS.iter().map(|(n, _)| preset(n)).collect::<Result<Vec<_>>>()?)?,
    };
    let out = PathBuf::from(args.next().unwrap_or_else(|| "afshar-out".into()));
    for scenario in parse_manifest(&text)? {
        let bundle = run_scenario(&scenario)?;
        let path = write_bundle(&bundle, &out, EmitOptions::default())?;
        let a = &bundle.analytic;
        print!("{:<12} K {:.3} V {:.3} deficit {:.3}", scenario.name, a.k(), a.v(), a.deficit());
        if let Some(g) = bundle.grid {
            print!(" | absorbed {:.2e}", g.absorbed_probability);
        }
        if let Some(k) = bundle.k_hat {
            print!(" | K^ {k:.3}");
        }
        if let Some(v) = bundle.v_hat {
            print!(" | V^ {:.3}", v.v);
        }
        println!(" -> {}", path.display());
        for v in bundle.violations() {
            println!("  violation: {v}");
        }
    }
    Ok(())
}
