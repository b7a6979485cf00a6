//! Hard-decision detectors for binary FTN blocks.
//!
//! All detectors assume unit symbol energy, i.e. `z = a + η`. Every output
//! reports the MLSE metric `(z − â)ᵀG(z − â)` of its decision so results
//! from different detectors compare directly.

mod sphere;

use crate::channel::{ReceivedBlock, SymbolBlock};
use crate::error::{Error, Result};
use crate::linalg::{qr_factor, BandedUpperTriangular, DenseUpperTriangular, OrthogonalFactorPair, UpperTriangular};
use crate::pulse::{GramMatrix, IsiBand};

pub use sphere::PrunedNode;
use sphere::{residual_norm_sq, sphere_search};

/// Largest block [`mlse_brute`] accepts.
pub const BRUTE_FORCE_MAX_N: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorOutput {
    pub symbols: SymbolBlock,
    pub metric: f64,
    pub nodes_visited: u64,
    /// Number of times the sphere radius shrank.
    pub radius_updates: u64,
    /// Squared radius after each update, in order.
    pub radius_trace: Vec<f64>,
    /// Multiply-adds spent on partial-distance updates.
    pub multiply_adds: u64,
    /// Most multiply-adds spent on a single node.
    pub max_terms_per_node: usize,
}

impl DetectorOutput {
    fn plain(symbols: SymbolBlock, metric: f64) -> Self {
        Self {
            symbols,
            metric,
            nodes_visited: 0,
            radius_updates: 0,
            radius_trace: Vec::new(),
            multiply_adds: 0,
            max_terms_per_node: 0,
        }
    }
}

/// `(z − a)ᵀ G (z − a)`.
pub fn mlse_metric(z: &[f64], g: &GramMatrix, a: &SymbolBlock) -> f64 {
    let d: Vec<f64> = z.iter().zip(a.as_slice()).map(|(z, a)| z - a).collect();
    g.matrix().quadratic_form(&d)
}

/// `aᵀGa − 2yᵀa`; differs from [`mlse_metric`] by `zᵀGz`, which does not
/// depend on `a`.
pub fn bqp_objective(y: &[f64], g: &GramMatrix, a: &SymbolBlock) -> f64 {
    let a = a.as_slice();
    g.matrix().quadratic_form(a) - 2.0 * y.iter().zip(a).map(|(y, a)| y * a).sum::<f64>()
}

/// Zero forcing: `â = sign(z)`, with `+1` on exact zeros.
pub fn zf_detect(block: &ReceivedBlock, g: &GramMatrix) -> DetectorOutput {
    let symbols = SymbolBlock::from_signs(&block.z);
    let metric = mlse_metric(&block.z, g, &symbols);
    DetectorOutput::plain(symbols, metric)
}

/// Exhaustive MLSE plus the metric of the runner-up, which tells callers
/// whether the minimiser is unique.
#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub output: DetectorOutput,
    pub runner_up_metric: f64,
}

impl BruteForceResult {
    pub fn is_unique(&self, tol: f64) -> bool {
        self.runner_up_metric - self.output.metric > tol
    }
}

/// Exhaustive search over all `2^N` sequences. Ties go to the
/// lexicographically smallest vector under `−1 < +1`.
pub fn mlse_brute(block: &ReceivedBlock, g: &GramMatrix) -> Result<DetectorOutput> {
    mlse_brute_ranked(block, g).map(|r| r.output)
}

pub fn mlse_brute_ranked(block: &ReceivedBlock, g: &GramMatrix) -> Result<BruteForceResult> {
    let n = block.len();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::BlockTooLarge {
            n,
            max: BRUTE_FORCE_MAX_N,
        });
    }
    check_dims(block, g)?;
    let mut best = (f64::INFINITY, 0u64);
    let mut runner_up = f64::INFINITY;
    let mut diff = vec![0.0; n];
    for code in 0..(1u64 << n) {
        for (i, d) in diff.iter_mut().enumerate() {
            // first symbol is the most significant bit, so counting up is
            // lexicographic order with −1 < +1
            let bit = (code >> (n - 1 - i)) & 1;
            *d = block.z[i] - if bit == 1 { 1.0 } else { -1.0 };
        }
        let m = g.matrix().quadratic_form(&diff);
        if m < best.0 {
            runner_up = best.0;
            best = (m, code);
        } else if m < runner_up {
            runner_up = m;
        }
    }
    let symbols: Vec<f64> = (0..n)
        .map(|i| if (best.1 >> (n - 1 - i)) & 1 == 1 { 1.0 } else { -1.0 })
        .collect();
    let symbols = SymbolBlock::new(symbols)?;
    let mut output = DetectorOutput::plain(symbols, best.0);
    output.nodes_visited = 1 << n;
    Ok(BruteForceResult {
        output,
        runner_up_metric: runner_up,
    })
}

/// Sphere decoder on the white-noise model `‖y − G·a‖²`.
///
/// This ignores the noise correlation after the matched filter, so it is a
/// mismatched detector for FTN. Holds the QR factors of `G` so that many
/// blocks can share one factorisation.
#[derive(Debug, Clone)]
pub struct StandardSphereDecoder {
    qr: OrthogonalFactorPair,
}

impl StandardSphereDecoder {
    pub fn new(g: &GramMatrix) -> Result<Self> {
        Ok(Self {
            qr: qr_factor(&g.matrix().to_dense())?,
        })
    }

    pub fn r(&self) -> &DenseUpperTriangular {
        &self.qr.r
    }

    pub fn detect(&self, block: &ReceivedBlock, g: &GramMatrix) -> Result<DetectorOutput> {
        check_dims(block, g)?;
        let y = nalgebra::DVector::from_column_slice(&block.y);
        let target: Vec<f64> = (self.qr.q.transpose() * y).iter().copied().collect();
        let zf = SymbolBlock::from_signs(&block.z);
        let radius = residual_norm_sq(&self.qr.r, &target, zf.as_slice());
        let outcome = sphere_search(&self.qr.r, &target, radius, Some(zf.into_inner()), false);
        finish(outcome, block, g)
    }
}

pub fn standard_sd_detect(block: &ReceivedBlock, g: &GramMatrix) -> Result<DetectorOutput> {
    StandardSphereDecoder::new(g)?.detect(block, g)
}

/// How the whitened sphere decoder picks its starting radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialRadius {
    /// Full whitened residual of the quantised zero-forcing point; that
    /// point is always inside the sphere.
    #[default]
    ZeroForcing,
    /// Only the last-level term of the zero-forcing residual. The sphere
    /// can come back empty, in which case the search reruns with
    /// [`InitialRadius::ZeroForcing`].
    LastLevel,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SdseOptions {
    pub initial_radius: InitialRadius,
    /// Keep every pruned node in [`SdseTrace`].
    pub record_pruned: bool,
}

/// Search statistics beyond [`DetectorOutput`].
#[derive(Debug, Clone, Default)]
pub struct SdseTrace {
    pub pruned: Vec<PrunedNode>,
    pub restarted: bool,
}

/// Whitened banded sphere decoder: minimises `‖R(z − a)‖²` with `G = RᵀR`.
///
/// Row `i` of `R` has at most `L` nonzeros, so each partial-distance update
/// costs at most `L` multiply-adds.
pub fn sdse_detect(block: &ReceivedBlock, r: &BandedUpperTriangular, band: &IsiBand) -> DetectorOutput {
    sdse_detect_with(block, r, band, SdseOptions::default()).0
}

pub fn sdse_detect_with(
    block: &ReceivedBlock,
    r: &BandedUpperTriangular,
    band: &IsiBand,
    opts: SdseOptions,
) -> (DetectorOutput, SdseTrace) {
    debug_assert!(r.half_bandwidth() < band.len().max(1));
    let n = r.dim();
    let target = r.mul_vec(&block.z);
    let zf = SymbolBlock::from_signs(&block.z);
    let zf_residual = residual_norm_sq(r, &target, zf.as_slice());

    let mut trace = SdseTrace::default();
    let mut outcome = match opts.initial_radius {
        InitialRadius::ZeroForcing => sphere_search(r, &target, zf_residual, Some(zf.as_slice().to_vec()), opts.record_pruned),
        InitialRadius::LastLevel => {
            let last = n - 1;
            let e = r.row(last)[0] * (block.z[last] - zf.as_slice()[last]);
            sphere_search(r, &target, e * e, None, opts.record_pruned)
        }
    };
    if outcome.best.is_none() {
        trace.restarted = true;
        let rerun = sphere_search(r, &target, zf_residual, Some(zf.into_inner()), opts.record_pruned);
        outcome.best = rerun.best;
        outcome.best_distance = rerun.best_distance;
        outcome.nodes_visited += rerun.nodes_visited;
        outcome.multiply_adds += rerun.multiply_adds;
        outcome.max_terms_per_node = outcome.max_terms_per_node.max(rerun.max_terms_per_node);
        outcome.radius_trace = rerun.radius_trace;
        outcome.pruned = rerun.pruned;
    }
    trace.pruned = std::mem::take(&mut outcome.pruned);
    let symbols = SymbolBlock::from_signs(&outcome.best.take().expect("seeded search returns a point"));
    let d = block.z.iter().zip(symbols.as_slice()).map(|(z, a)| z - a).collect::<Vec<_>>();
    // ‖R(z − a)‖² equals the MLSE metric
    let metric = residual_norm_sq(r, &vec![0.0; n], &d);
    (
        DetectorOutput {
            symbols,
            metric,
            nodes_visited: outcome.nodes_visited,
            radius_updates: outcome.radius_trace.len() as u64,
            radius_trace: outcome.radius_trace,
            multiply_adds: outcome.multiply_adds,
            max_terms_per_node: outcome.max_terms_per_node,
        },
        trace,
    )
}

fn finish(outcome: sphere::SearchOutcome, block: &ReceivedBlock, g: &GramMatrix) -> Result<DetectorOutput> {
    let symbols = SymbolBlock::new(outcome.best.expect("seeded search returns a point"))?;
    let metric = mlse_metric(&block.z, g, &symbols);
    Ok(DetectorOutput {
        symbols,
        metric,
        nodes_visited: outcome.nodes_visited,
        radius_updates: outcome.radius_trace.len() as u64,
        radius_trace: outcome.radius_trace,
        multiply_adds: outcome.multiply_adds,
        max_terms_per_node: outcome.max_terms_per_node,
    })
}

fn check_dims(block: &ReceivedBlock, g: &GramMatrix) -> Result<()> {
    if block.len() != g.dim() || block.z.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: block.len(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests;
