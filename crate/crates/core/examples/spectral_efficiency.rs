//! Spectral efficiency of FTN against Nyquist signaling, with the
//! smallest `τ` that keeps BER at 1e-4 found by bisection.
//!
//! ```bash
//! cargo run --release --example spectral_efficiency
//! ```

use ftn_sd::harness::{find_min_tau, spectral_efficiency, DetectorKind, MinTauConfig, SimSettings};

pub fn run_example() -> ftn_sd::Result<()> {
    for beta in [0.0, 0.3, 0.5] {
        let nyq = spectral_efficiency(2, beta, 1.0)?;
        let ftn = spectral_efficiency(2, beta, 0.7)?;
        println!("beta={beta}: Nyquist {nyq:.4}, tau=0.7 {ftn:.4} (+{:.2}%)", 100.0 * (ftn / nyq - 1.0));
    }

    let cfg = MinTauConfig {
        settings: SimSettings {
            max_bits: 100_000,
            ..Default::default()
        },
        resolution: 0.05,
        ..Default::default()
    };
    let beta = 0.3;
    let tau = find_min_tau(beta, 1e-4, 10.0, DetectorKind::Sdse, &cfg)?;
    println!(
        "beta={beta} at 10 dB: smallest tau {tau}, efficiency {:.4}",
        spectral_efficiency(2, beta, tau)?
    );
    Ok(())
}

fn main() -> ftn_sd::Result<()> {
    run_example()
}
