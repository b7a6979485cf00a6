use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DetectorKind, ExperimentConfig, SimSettings};
use crate::channel::{ebno_to_sigma, modulate, random_bits, transmit, ChannelConfig, ReceivedBlock};
use crate::detect::{mlse_brute, sdse_detect, zf_detect, DetectorOutput, StandardSphereDecoder};
use crate::error::{Error, Result};
use crate::pulse::{build_gram_with, make_isi_band_capped, GramMatrix, GramOptions, PulseSpec};
use crate::rng::{substream, Purpose};
use crate::sdr::{sdrse_detect, RandomizationConfig, SdrOptions, SdrseConfig};

/// Blocks simulated between two stopping-rule checks. Fixed so that the
/// number of simulated blocks never depends on the worker count.
const BATCH_BLOCKS: u64 = 32;

/// One measured point of a BER curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub detector: DetectorKind,
    pub beta: f64,
    pub tau: f64,
    pub ebno_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub mean_nodes: f64,
    /// Wall-clock milliseconds per block; empty unless timing was requested.
    pub ms_per_block: Option<f64>,
}

impl BerPoint {
    /// Standard error of the BER estimate, `√(p(1−p)/bits)`.
    pub fn std_error(&self) -> f64 {
        if self.bits == 0 {
            return f64::INFINITY;
        }
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }
}

/// A point that could not be simulated.
#[derive(Debug, Clone, PartialEq)]
pub struct FailedPoint {
    pub detector: DetectorKind,
    pub beta: f64,
    pub tau: f64,
    pub ebno_db: f64,
    pub error: Error,
}

/// Band length and loading actually used for one `(β, τ)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelInfo {
    pub beta: f64,
    pub tau: f64,
    pub band_len: usize,
    pub loading: f64,
}

#[derive(Debug, Clone, Default)]
pub struct SweepReport {
    pub points: Vec<BerPoint>,
    pub failures: Vec<FailedPoint>,
    pub channels: Vec<ChannelInfo>,
}

/// Q(√(2·Eb/N0)) for BPSK without ISI.
pub fn theoretical_bpsk_ber(ebno_db: f64) -> f64 {
    let ebno = 10f64.powf(ebno_db / 10.0);
    0.5 * libm::erfc(ebno.sqrt())
}

/// Eb/N0 in dB at which [`theoretical_bpsk_ber`] equals `ber`.
pub fn theoretical_ebno_for_ber(ber: f64) -> f64 {
    let (mut lo, mut hi) = (-30.0, 30.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if theoretical_bpsk_ber(mid) > ber {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eb/N0 where a measured curve crosses `target`, by linear interpolation
/// of `log10(BER)` between the bracketing points. `None` if the curve does
/// not bracket the target.
pub fn ebno_at_ber(points: &[(f64, f64)], target: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|(_, b)| *b > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(2).find_map(|w| {
        let ((x0, b0), (x1, b1)) = (w[0], w[1]);
        if b0 >= target && b1 <= target && b0 != b1 {
            let (l0, l1, lt) = (b0.log10(), b1.log10(), target.log10());
            Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1))
        } else {
            None
        }
    })
}

/// `log2(M) / ((1 + β)·τ)` bits/s/Hz.
pub fn spectral_efficiency(m: u32, beta: f64, tau: f64) -> Result<f64> {
    if m < 2 || !(0.0..=1.0).contains(&beta) || !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::InvalidParameter(format!("spectral_efficiency(m={m}, beta={beta}, tau={tau})")));
    }
    Ok((m as f64).log2() / ((1.0 + beta) * tau))
}

/// Builds the Gram matrix a sweep uses for `(β, τ)`.
pub fn channel_gram(beta: f64, tau: f64, settings: &SimSettings) -> Result<GramMatrix> {
    let spec = PulseSpec::with_roll_off(beta)?;
    let band = make_isi_band_capped(&spec, tau, settings.threshold, settings.max_taps)?;
    let opts = GramOptions {
        eigen_floor: (settings.eigen_floor > 0.0).then_some(settings.eigen_floor),
    };
    build_gram_with(&band, settings.block_len, opts)
}

/// A detector with its per-channel precomputation done.
pub enum PreparedDetector {
    Zf,
    Mlse,
    Sd(StandardSphereDecoder),
    Sdse,
    Sdrse(SdrseConfig),
}

impl PreparedDetector {
    pub fn new(kind: DetectorKind, g: &GramMatrix, settings: &SimSettings) -> Result<Self> {
        Ok(match kind {
            DetectorKind::Zf => Self::Zf,
            DetectorKind::Mlse => Self::Mlse,
            DetectorKind::Sd => Self::Sd(StandardSphereDecoder::new(g)?),
            DetectorKind::Sdse => Self::Sdse,
            DetectorKind::Sdrse => Self::Sdrse(SdrseConfig {
                solver: SdrOptions {
                    seed: settings.seed,
                    ..Default::default()
                },
                randomization: RandomizationConfig {
                    draws: settings.draws,
                    seed: settings.seed,
                    stream: 0,
                },
            }),
        })
    }

    /// Detects one block; `trial` selects the randomisation substream.
    pub fn detect(&self, block: &ReceivedBlock, g: &GramMatrix, trial: u64) -> Result<DetectorOutput> {
        match self {
            Self::Zf => Ok(zf_detect(block, g)),
            Self::Mlse => mlse_brute(block, g),
            Self::Sd(sd) => sd.detect(block, g),
            Self::Sdse => Ok(sdse_detect(block, g.cholesky(), g.band())),
            Self::Sdrse(cfg) => {
                let mut cfg = *cfg;
                cfg.randomization.stream = trial;
                sdrse_detect(block, g, &cfg)
            }
        }
    }
}

/// The transmitted block and channel output for `trial`. Depends only on
/// `(seed, trial)` and the channel, so every detector and every SNR sees the
/// same bits and the same normalised noise.
pub fn trial_block(g: &GramMatrix, sigma: f64, seed: u64, trial: u64) -> Result<(crate::channel::SymbolBlock, ReceivedBlock)> {
    let bits = random_bits(g.dim(), &mut substream(seed, Purpose::Bits, trial));
    let a = modulate(&bits)?;
    let cfg = ChannelConfig::new(1.0, sigma)?;
    let rx = transmit(&a, &cfg, g, &mut substream(seed, Purpose::Noise, trial))?;
    Ok((a, rx))
}

struct BlockResult {
    errors: u64,
    nodes: u64,
}

/// Simulates one `(detector, channel, Eb/N0)` point until `min_errors`
/// errors or `max_bits` bits.
pub fn simulate_point(
    kind: DetectorKind,
    detector: &PreparedDetector,
    g: &GramMatrix,
    beta: f64,
    ebno_db: f64,
    settings: &SimSettings,
) -> Result<BerPoint> {
    let sigma = ebno_to_sigma(ebno_db, 1.0, 1);
    let per_block = settings.counted_bits() as u64;
    let lo = settings.edge_discard;
    let hi = settings.block_len - settings.edge_discard;
    let (mut bits, mut errors, mut nodes, mut blocks) = (0u64, 0u64, 0u64, 0u64);
    let mut elapsed = 0.0;
    while errors < settings.min_errors && bits < settings.max_bits {
        let remaining_blocks = (settings.max_bits - bits).div_ceil(per_block);
        let batch = BATCH_BLOCKS.min(remaining_blocks);
        let start = Instant::now();
        let results: Vec<Result<BlockResult>> = (blocks..blocks + batch)
            .into_par_iter()
            .map(|trial| {
                let (a, rx) = trial_block(g, sigma, settings.seed, trial)?;
                let out = detector.detect(&rx, g, trial)?;
                let errors = a.as_slice()[lo..hi]
                    .iter()
                    .zip(&out.symbols.as_slice()[lo..hi])
                    .filter(|(x, y)| x != y)
                    .count() as u64;
                Ok(BlockResult {
                    errors,
                    nodes: out.nodes_visited,
                })
            })
            .collect();
        elapsed += start.elapsed().as_secs_f64();
        for r in results {
            let r = r?;
            errors += r.errors;
            nodes += r.nodes;
            bits += per_block;
        }
        blocks += batch;
    }
    Ok(BerPoint {
        detector: kind,
        beta,
        tau: g.band().tau(),
        ebno_db,
        bits,
        errors,
        ber: errors as f64 / bits as f64,
        mean_nodes: nodes as f64 / blocks as f64,
        ms_per_block: settings.record_timing.then(|| 1e3 * elapsed / blocks as f64),
    })
}

/// Runs every `(detector, β, τ, Eb/N0)` combination. Points that fail are
/// reported in [`SweepReport::failures`] and the sweep carries on.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let settings = cfg.settings();
    let mut report = SweepReport::default();
    for &detector_kind in &cfg.detectors {
        for &beta in &cfg.betas {
            for &tau in &cfg.taus {
                let prepared = channel_gram(beta, tau, &settings).and_then(|g| {
                    let d = PreparedDetector::new(detector_kind, &g, &settings)?;
                    Ok((g, d))
                });
                let (g, detector) = match prepared {
                    Ok(p) => p,
                    Err(error) => {
                        for &ebno_db in &cfg.ebno_db {
                            report.failures.push(FailedPoint {
                                detector: detector_kind,
                                beta,
                                tau,
                                ebno_db,
                                error: error.clone(),
                            });
                        }
                        continue;
                    }
                };
                let info = ChannelInfo {
                    beta,
                    tau,
                    band_len: g.band().len(),
                    loading: g.loading(),
                };
                if !report.channels.contains(&info) {
                    report.channels.push(info);
                }
                for &ebno_db in &cfg.ebno_db {
                    match simulate_point(detector_kind, &detector, &g, beta, ebno_db, &settings) {
                        Ok(p) => report.points.push(p),
                        Err(error) => report.failures.push(FailedPoint {
                            detector: detector_kind,
                            beta,
                            tau,
                            ebno_db,
                            error,
                        }),
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Settings for [`find_min_tau`].
#[derive(Debug, Clone)]
pub struct MinTauConfig {
    pub settings: SimSettings,
    /// Standard errors of slack allowed above the target.
    pub confidence: f64,
    pub tau_min: f64,
    pub resolution: f64,
}

impl Default for MinTauConfig {
    fn default() -> Self {
        Self {
            settings: SimSettings::default(),
            confidence: 1.96,
            tau_min: 0.5,
            resolution: 0.01,
        }
    }
}

/// Smallest `τ` on the grid `tau_min, tau_min + resolution, …, 1` whose
/// measured BER stays at or below `target_ber` (within `confidence`
/// standard errors), found by bisection.
pub fn find_min_tau(
    beta: f64,
    target_ber: f64,
    ebno_db: f64,
    detector: DetectorKind,
    cfg: &MinTauConfig,
) -> Result<f64> {
    let steps = ((1.0 - cfg.tau_min) / cfg.resolution).round() as i64;
    let tau_at = |k: i64| {
        let t = cfg.tau_min + k as f64 * cfg.resolution;
        (t * 1e9).round() / 1e9
    };
    let measure = |k: i64| -> Result<BerPoint> {
        let g = channel_gram(beta, tau_at(k), &cfg.settings)?;
        let d = PreparedDetector::new(detector, &g, &cfg.settings)?;
        simulate_point(detector, &d, &g, beta, ebno_db, &cfg.settings)
    };
    let feasible = |p: &BerPoint| p.ber - cfg.confidence * p.std_error() <= target_ber;

    let top = measure(steps)?;
    if !feasible(&top) {
        return Err(Error::TargetUnreachable {
            target: target_ber,
            measured: top.ber,
        });
    }
    let ok = |k: i64| -> Result<bool> {
        match measure(k) {
            Ok(p) => Ok(feasible(&p)),
            // a channel too dispersive to model counts as infeasible
            Err(Error::BandTooLong { .. }) | Err(Error::NotPositiveDefinite { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if ok(0)? {
        return Ok(tau_at(0));
    }
    let (mut lo, mut hi) = (0, steps);
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(tau_at(hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bpsk_reference_values() {
        // Q(√2) from an independent series evaluation of erfc(1)
        assert_abs_diff_eq!(theoretical_bpsk_ber(0.0), 0.078_649_603_525_142_3, epsilon = 1e-12);
        assert!(theoretical_bpsk_ber(20.0) < 1e-23);
        assert_abs_diff_eq!(theoretical_bpsk_ber(-60.0), 0.5, epsilon = 1e-3);
        assert_abs_diff_eq!(theoretical_ebno_for_ber(theoretical_bpsk_ber(7.3)), 7.3, epsilon = 1e-9);
    }

    #[test]
    fn spectral_efficiency_values() {
        assert_abs_diff_eq!(spectral_efficiency(2, 0.0, 1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(spectral_efficiency(2, 0.3, 0.7).unwrap(), 1.0 / (1.3 * 0.7), epsilon = 1e-15);
        assert_abs_diff_eq!(spectral_efficiency(2, 0.3, 1.0).unwrap(), 0.7692, epsilon = 1e-4);
        assert!(spectral_efficiency(1, 0.3, 1.0).is_err());
        assert!(spectral_efficiency(2, 0.3, 0.0).is_err());
    }

    #[test]
    fn interpolated_crossing() {
        let curve = [(4.0, 1e-2), (6.0, 1e-3), (8.0, 1e-5)];
        assert_abs_diff_eq!(ebno_at_ber(&curve, 1e-3).unwrap(), 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ebno_at_ber(&curve, 1e-4).unwrap(), 7.0, epsilon = 1e-12);
        assert!(ebno_at_ber(&curve, 1e-7).is_none());
    }

    #[test]
    fn degenerate_min_tau() {
        let cfg = MinTauConfig {
            settings: SimSettings {
                block_len: 16,
                min_errors: 20,
                max_bits: 2_000,
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(find_min_tau(0.3, 0.5, 4.0, DetectorKind::Sdse, &cfg).unwrap(), 0.5);
        assert!(matches!(
            find_min_tau(0.3, 1e-9, 0.0, DetectorKind::Sdse, &cfg),
            Err(Error::TargetUnreachable { .. })
        ));
    }
}
