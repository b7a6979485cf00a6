//! Semidefinite relaxation of the detection problem: the certified lower
//! bound, the exhaustive optimum, and the randomised decision in between.
//!
//! ```bash
//! cargo run --release --example sdr_relaxation
//! ```

use ftn_sd::channel::ebno_to_sigma;
use ftn_sd::detect::{bqp_objective, mlse_brute};
use ftn_sd::harness::{channel_gram, trial_block, SimSettings};
use ftn_sd::sdr::{sdrse_detect_full, RandomizationConfig, SdrseConfig};

pub fn run_example() -> ftn_sd::Result<()> {
    let settings = SimSettings {
        block_len: 12,
        ..Default::default()
    };
    let g = channel_gram(0.3, 0.7, &settings)?;
    let sigma = ebno_to_sigma(4.0, 1.0, 1);
    println!("{:>5} {:>12} {:>12} {:>12} {:>7}", "trial", "lower", "optimum", "sdrse", "sweeps");
    for trial in 0..5 {
        let (_, rx) = trial_block(&g, sigma, 5, trial)?;
        let cfg = SdrseConfig {
            randomization: RandomizationConfig {
                draws: 100,
                seed: 5,
                stream: trial,
            },
            ..Default::default()
        };
        let res = sdrse_detect_full(&rx, &g, &cfg)?;
        let best = mlse_brute(&rx, &g)?;
        println!(
            "{trial:>5} {:>12.5} {:>12.5} {:>12.5} {:>7}",
            res.solution.lower_bound,
            bqp_objective(&rx.y, &g, &best.symbols),
            res.objective,
            res.solution.sweeps
        );
    }
    Ok(())
}

fn main() -> ftn_sd::Result<()> {
    run_example()
}
