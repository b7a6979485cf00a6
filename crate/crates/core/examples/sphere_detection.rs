//! One noisy block through every detector, with the exhaustive MLSE
//! search as the reference.
//!
//! ```bash
//! cargo run --release --example sphere_detection
//! ```

use ftn_sd::channel::ebno_to_sigma;
use ftn_sd::detect::{mlse_brute, sdse_detect, standard_sd_detect, zf_detect};
use ftn_sd::harness::{channel_gram, trial_block, SimSettings};

pub fn run_example() -> ftn_sd::Result<()> {
    let settings = SimSettings {
        block_len: 16,
        ..Default::default()
    };
    let g = channel_gram(0.3, 0.6, &settings)?;
    let sigma = ebno_to_sigma(5.0, 1.0, 1);
    println!("{:>6} {:>5} {:>8} {:>12} {:>8}", "trial", "det", "errors", "metric", "nodes");
    for trial in 0..4 {
        let (a, rx) = trial_block(&g, sigma, 11, trial)?;
        let outputs = [
            ("zf", zf_detect(&rx, &g)),
            ("sd", standard_sd_detect(&rx, &g)?),
            ("sdse", sdse_detect(&rx, g.cholesky(), g.band())),
            ("mlse", mlse_brute(&rx, &g)?),
        ];
        for (name, out) in outputs {
            println!(
                "{trial:>6} {name:>5} {:>8} {:>12.6} {:>8}",
                a.errors_against(&out.symbols),
                out.metric,
                out.nodes_visited
            );
        }
    }
    Ok(())
}

fn main() -> ftn_sd::Result<()> {
    run_example()
}
