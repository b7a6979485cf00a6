//! Monte Carlo experiment driver: BER sweeps, spectral efficiency, and
//! result files.
//!
//! Trials draw bits and noise from substreams keyed by `(seed, trial)`, and
//! blocks are reduced in trial order, so a sweep produces the same numbers
//! for any worker count.

mod config;
mod output;
mod sweep;

pub use config::{DetectorKind, ExperimentConfig, SimSettings};
pub use output::{emit_csv, emit_plot, parse_csv, read_csv, render_svg, write_csv, CSV_HEADER};
pub use sweep::{
    channel_gram, ebno_at_ber, find_min_tau, run_ber_sweep, simulate_point, spectral_efficiency,
    theoretical_bpsk_ber, theoretical_ebno_for_ber, trial_block, BerPoint, ChannelInfo, FailedPoint, MinTauConfig,
    PreparedDetector, SweepReport,
};

/// Metadata lines recorded at the top of every results file.
pub fn sweep_metadata(cfg: &ExperimentConfig, report: &SweepReport) -> Vec<(String, String)> {
    let mut meta = vec![
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("N".to_string(), cfg.block_len.to_string()),
        ("edge_discard".to_string(), cfg.edge_discard.to_string()),
        ("threshold".to_string(), cfg.threshold.to_string()),
        ("eigen_floor".to_string(), cfg.eigen_floor.to_string()),
        ("Q".to_string(), cfg.draws.to_string()),
    ];
    for c in &report.channels {
        meta.push((
            format!("L(beta={},tau={})", c.beta, c.tau),
            format!("{} loading={:e}", c.band_len, c.loading),
        ));
    }
    for f in &report.failures {
        meta.push((
            format!("failed({},beta={},tau={},ebno_db={})", f.detector, f.beta, f.tau, f.ebno_db),
            f.error.to_string(),
        ));
    }
    meta
}
