use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use ftn_sd::channel::ebno_to_sigma;
use ftn_sd::harness::{
    channel_gram, emit_csv, emit_plot, find_min_tau, run_ber_sweep, spectral_efficiency, sweep_metadata, trial_block,
    write_csv, DetectorKind, ExperimentConfig, MinTauConfig, PreparedDetector, SimSettings,
};
use ftn_sd::linalg::qr_factor;
use ftn_sd::{Error, Result};

#[derive(Parser)]
#[command(name = "ftn", version, about = "Binary faster-than-Nyquist detection experiments")]
struct Cli {
    /// Worker threads for Monte Carlo sweeps.
    #[arg(long, env = "FTN_WORKERS", global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ChannelArgs {
    #[arg(long, default_value_t = 0.3)]
    beta: f64,
    #[arg(long, default_value_t = 0.7)]
    tau: f64,
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = ftn_sd::pulse::DEFAULT_THRESHOLD)]
    threshold: f64,
    #[arg(long, default_value_t = ftn_sd::pulse::DEFAULT_MAX_TAPS)]
    max_taps: usize,
    /// Smallest eigenvalue enforced on the Gram matrix; 0 keeps it exact.
    #[arg(long, default_value_t = ftn_sd::pulse::DEFAULT_EIGEN_FLOOR)]
    eigen_floor: f64,
}

impl ChannelArgs {
    fn settings(&self) -> SimSettings {
        SimSettings {
            block_len: self.n,
            threshold: self.threshold,
            max_taps: self.max_taps,
            eigen_floor: self.eigen_floor,
            ..Default::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the Gram matrix as CSV.
    Gram {
        #[command(flatten)]
        channel: ChannelArgs,
    },
    /// Detect a single simulated block.
    Detect {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value = "sdse")]
        detector: DetectorKind,
        #[arg(long, default_value_t = 6.0)]
        ebno: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
    /// Run a BER sweep described by a TOML config.
    Ber {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Overrides `output_plot`.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Smallest tau meeting a target BER, and the resulting spectral efficiency.
    Se {
        #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5")]
        betas: Vec<f64>,
        #[arg(long, default_value_t = 10.0)]
        ebno: f64,
        #[arg(long, default_value_t = 1e-4)]
        target_ber: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_bits: u64,
        #[arg(long, default_value_t = 1e-2)]
        threshold: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Node counts and timing of the whitened banded decoder against the standard one.
    Bench {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = 6.0)]
        ebno: f64,
        #[arg(long, default_value_t = 200)]
        blocks: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("ftn: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ftn: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gram { channel } => {
            let g = channel_gram(channel.beta, channel.tau, &channel.settings())?;
            let dense = g.matrix().to_dense();
            eprintln!("# L={} loading={:e}", g.band().len(), g.loading());
            for i in 0..dense.nrows() {
                let row: Vec<String> = dense.row(i).iter().map(|v| format!("{v}")).collect();
                println!("{}", row.join(","));
            }
        }
        Command::Detect {
            channel,
            detector,
            ebno,
            seed,
            trial,
        } => {
            let settings = SimSettings {
                seed,
                ..channel.settings()
            };
            let g = channel_gram(channel.beta, channel.tau, &settings)?;
            let (a, rx) = trial_block(&g, ebno_to_sigma(ebno, 1.0, 1), seed, trial)?;
            let det = PreparedDetector::new(detector, &g, &settings)?;
            let start = Instant::now();
            let out = det.detect(&rx, &g, trial)?;
            let elapsed = start.elapsed();
            let fmt = |s: &[f64]| s.iter().map(|v| if *v > 0.0 { '+' } else { '-' }).collect::<String>();
            println!("sent     {}", fmt(a.as_slice()));
            println!("detected {}", fmt(out.symbols.as_slice()));
            println!("errors {}", a.errors_against(&out.symbols));
            println!("metric {:.6}", out.metric);
            println!("nodes {}", out.nodes_visited);
            println!("radius_updates {}", out.radius_updates);
            println!("time {:.3} ms", elapsed.as_secs_f64() * 1e3);
        }
        Command::Ber { config, csv, plot } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if csv.is_some() {
                cfg.output_csv = csv;
            }
            if plot.is_some() {
                cfg.output_plot = plot;
            }
            let report = run_ber_sweep(&cfg)?;
            for f in &report.failures {
                eprintln!(
                    "ftn: {} beta={} tau={} ebno={}: {}",
                    f.detector, f.beta, f.tau, f.ebno_db, f.error
                );
            }
            if report.points.is_empty() {
                return Err(Error::InvalidParameter("every sweep point failed".into()));
            }
            let meta = sweep_metadata(&cfg, &report);
            match &cfg.output_csv {
                Some(path) => emit_csv(&report.points, &meta, path)?,
                None => write_csv(&report.points, &meta, std::io::stdout().lock())?,
            }
            if let Some(path) = &cfg.output_plot {
                emit_plot(&report.points, path)?;
            }
        }
        Command::Se {
            betas,
            ebno,
            target_ber,
            max_bits,
            threshold,
            seed,
        } => {
            let cfg = MinTauConfig {
                settings: SimSettings {
                    max_bits,
                    threshold,
                    seed,
                    ..Default::default()
                },
                ..Default::default()
            };
            println!("beta,tau,se_ftn,se_nyquist,gain_percent");
            for beta in betas {
                let tau = find_min_tau(beta, target_ber, ebno, DetectorKind::Sdse, &cfg)?;
                let ftn = spectral_efficiency(2, beta, tau)?;
                let nyq = spectral_efficiency(2, beta, 1.0)?;
                println!("{beta},{tau},{ftn:.4},{nyq:.4},{:.2}", 100.0 * (ftn / nyq - 1.0));
            }
        }
        Command::Bench {
            channel,
            ebno,
            blocks,
            seed,
        } => {
            let settings = SimSettings {
                seed,
                ..channel.settings()
            };
            let g = channel_gram(channel.beta, channel.tau, &settings)?;
            let reps = 200;
            let start = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(ftn_sd::linalg::cholesky_banded(g.matrix())?);
            }
            let chol = start.elapsed().as_secs_f64() / reps as f64;
            let dense = g.matrix().to_dense();
            let start = Instant::now();
            for _ in 0..reps {
                std::hint::black_box(qr_factor(&dense)?);
            }
            let qr = start.elapsed().as_secs_f64() / reps as f64;
            println!("factor,banded_cholesky_us,{:.2}", chol * 1e6);
            println!("factor,dense_qr_us,{:.2}", qr * 1e6);

            let sigma = ebno_to_sigma(ebno, 1.0, 1);
            println!("detector,blocks,mean_nodes,mean_multiply_adds,max_terms_per_node,ms_per_block");
            for kind in [DetectorKind::Sdse, DetectorKind::Sd] {
                let det = PreparedDetector::new(kind, &g, &settings)?;
                let (mut nodes, mut madds, mut terms, mut secs) = (0u64, 0u64, 0usize, 0.0);
                for trial in 0..blocks {
                    let (_, rx) = trial_block(&g, sigma, seed, trial)?;
                    let start = Instant::now();
                    let out = det.detect(&rx, &g, trial)?;
                    secs += start.elapsed().as_secs_f64();
                    nodes += out.nodes_visited;
                    madds += out.multiply_adds;
                    terms = terms.max(out.max_terms_per_node);
                }
                let b = blocks.max(1) as f64;
                println!(
                    "{kind},{blocks},{:.1},{:.1},{terms},{:.4}",
                    nodes as f64 / b,
                    madds as f64 / b,
                    1e3 * secs / b
                );
            }
            println!("band_len,{}", g.band().len());
        }
    }
    Ok(())
}
