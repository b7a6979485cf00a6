//! A small BER sweep written as CSV and SVG.
//!
//! ```bash
//! cargo run --release --example ber_sweep
//! ```

use ftn_sd::harness::{emit_csv, emit_plot, run_ber_sweep, sweep_metadata, ExperimentConfig};

pub fn run_example() -> ftn_sd::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(
        r#"
betas = [0.3]
taus = [0.7, 1.0]
ebno_db = [4.0, 6.0]
detectors = ["sdse", "sd", "zf"]
min_errors = 50
max_bits = 100000
"#,
    )?;
    let report = run_ber_sweep(&cfg)?;
    for p in &report.points {
        println!(
            "{:>5} beta={} tau={} {:>4.1} dB  ber={:.3e} ({} errors / {} bits)  nodes={:.1}",
            p.detector, p.beta, p.tau, p.ebno_db, p.ber, p.errors, p.bits, p.mean_nodes
        );
    }

    let dir = tempfile::tempdir().map_err(|e| ftn_sd::Error::io("<tempdir>", e))?;
    let csv = dir.path().join("ber.csv");
    let svg = dir.path().join("ber.svg");
    emit_csv(&report.points, &sweep_metadata(&cfg, &report), &csv)?;
    emit_plot(&report.points, &svg)?;
    let rows = ftn_sd::harness::parse_csv(&csv)?;
    println!("wrote {} rows to {} and a plot to {}", rows.len(), csv.display(), svg.display());
    Ok(())
}

fn main() -> ftn_sd::Result<()> {
    run_example()
}
