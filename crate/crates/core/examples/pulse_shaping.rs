//! Root-raised-cosine pulse, its autocorrelation, and the ISI taps that
//! survive the truncation threshold for a few `(β, τ)` pairs.
//!
//! ```bash
//! cargo run --example pulse_shaping
//! ```

use ftn_sd::pulse::{autocorrelation_value, make_isi_band, PulseSpec, DEFAULT_THRESHOLD};

pub fn run_example() -> ftn_sd::Result<()> {
    let spec = PulseSpec::with_roll_off(0.3)?;
    println!("{:>6} {:>10} {:>10}", "t/T", "rrc", "g(t)");
    for i in -4..=4 {
        let t = 0.5 * i as f64;
        println!(
            "{t:>6.2} {:>10.5} {:>10.5}",
            ftn_sd::pulse::rrc_value(t, &spec),
            autocorrelation_value(t, &spec)
        );
    }

    for (beta, tau) in [(0.3, 1.0), (0.3, 0.7), (0.5, 0.7), (0.3, 0.6), (0.5, 0.6)] {
        let spec = PulseSpec::with_roll_off(beta)?;
        let band = make_isi_band(&spec, tau, DEFAULT_THRESHOLD)?;
        let taps: Vec<String> = band.taps().iter().map(|g| format!("{g:+.4}")).collect();
        println!("beta={beta} tau={tau} L={}: {}", band.len(), taps.join(" "));
    }
    Ok(())
}

fn main() -> ftn_sd::Result<()> {
    run_example()
}
