//! Root-raised-cosine pulses, their autocorrelation, and the FTN Gram matrix.
//!
//! Times are in seconds but everything depends only on `t / T`, so the
//! symbol period defaults to 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{cholesky_banded, cholesky_banded_with, BandedSymMatrix, BandedUpperTriangular, CholeskyOptions};

/// Half-width of the window around a removable singularity inside which
/// the analytic limit is returned, relative to `T`.
const SINGULARITY_GUARD: f64 = 1e-8;

/// Default cap on the number of ISI taps.
pub const DEFAULT_MAX_TAPS: usize = 64;

/// Default truncation threshold on `|g(kτT)|`.
pub const DEFAULT_THRESHOLD: f64 = 1e-3;

/// Default lower bound enforced on the Gram matrix spectrum.
pub const DEFAULT_EIGEN_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    roll_off: f64,
    symbol_period: f64,
}

impl PulseSpec {
    pub fn new(roll_off: f64, symbol_period: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&roll_off) {
            return Err(Error::InvalidParameter(format!("roll-off {roll_off} outside [0, 1]")));
        }
        if !(symbol_period > 0.0 && symbol_period.is_finite()) {
            return Err(Error::InvalidParameter(format!("symbol period {symbol_period} must be positive")));
        }
        Ok(Self {
            roll_off,
            symbol_period,
        })
    }

    /// Unit symbol period.
    pub fn with_roll_off(roll_off: f64) -> Result<Self> {
        Self::new(roll_off, 1.0)
    }

    pub fn roll_off(&self) -> f64 {
        self.roll_off
    }

    pub fn symbol_period(&self) -> f64 {
        self.symbol_period
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Unit-energy root-raised-cosine amplitude `p(t)`.
pub fn rrc_value(t: f64, spec: &PulseSpec) -> f64 {
    let period = spec.symbol_period;
    let beta = spec.roll_off;
    let x = t / period;
    let norm = 1.0 / period.sqrt();
    if x.abs() < SINGULARITY_GUARD {
        return norm * (1.0 - beta + 4.0 * beta / PI);
    }
    if beta > 0.0 && (x.abs() - 1.0 / (4.0 * beta)).abs() < SINGULARITY_GUARD {
        let a = PI / (4.0 * beta);
        return norm * beta / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - beta)).sin() + 4.0 * beta * x * (PI * x * (1.0 + beta)).cos();
    let den = PI * x * (1.0 - (4.0 * beta * x).powi(2));
    norm * num / den
}

/// Pulse autocorrelation `g(t) = ∫ p(x) p(x − t) dx`.
///
/// For the root-raised-cosine pulse this is the raised-cosine impulse
/// response `sinc(t/T)·cos(πβt/T) / (1 − (2βt/T)²)`.
pub fn autocorrelation_value(t: f64, spec: &PulseSpec) -> f64 {
    let x = t / spec.symbol_period;
    let beta = spec.roll_off;
    if beta > 0.0 && (x.abs() - 1.0 / (2.0 * beta)).abs() < SINGULARITY_GUARD {
        return beta / 2.0 * (PI / (2.0 * beta)).sin();
    }
    sinc(x) * (PI * beta * x).cos() / (1.0 - (2.0 * beta * x).powi(2))
}

/// Truncated ISI taps `[g(0), g(τT), …, g((L−1)τT)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsiBand {
    tau: f64,
    threshold: f64,
    taps: Vec<f64>,
}

impl IsiBand {
    /// Builds a band from explicit taps. `taps[0]` must be 1.
    pub fn from_taps(tau: f64, taps: Vec<f64>) -> Result<Self> {
        if taps.is_empty() || (taps[0] - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter("taps must start with g(0) = 1".into()));
        }
        check_tau(tau)?;
        Ok(Self {
            tau,
            threshold: 0.0,
            taps,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Band length `L`.
    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tau {tau} outside (0, 1]")))
    }
}

pub fn make_isi_band(spec: &PulseSpec, tau: f64, threshold: f64) -> Result<IsiBand> {
    make_isi_band_capped(spec, tau, threshold, DEFAULT_MAX_TAPS)
}

/// Smallest `L` with `|g(kτT)| < threshold` for every `k ≥ L`.
pub fn make_isi_band_capped(spec: &PulseSpec, tau: f64, threshold: f64, max_taps: usize) -> Result<IsiBand> {
    check_tau(tau)?;
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter(format!("threshold {threshold} outside (0, 1)")));
    }
    let beta = spec.roll_off;
    // |g(x)| <= 1 / (π|x|·((2βx)² − 1)) once 2βx > 1, and <= 1/(π|x|) for β = 0.
    let x_max = if beta == 0.0 {
        1.0 / (PI * threshold)
    } else {
        let mut x = 1.0 / beta;
        while 1.0 / (PI * x * ((2.0 * beta * x).powi(2) - 1.0)) >= threshold {
            x *= 1.25;
        }
        x
    };
    let k_max = (x_max / tau).ceil() as usize + 1;
    let g_at = |k: usize| autocorrelation_value(k as f64 * tau * spec.symbol_period, spec);
    let mut len = 1;
    for k in 1..=k_max {
        if g_at(k).abs() >= threshold {
            len = k + 1;
            if len > max_taps {
                return Err(Error::BandTooLong { needed: len, cap: max_taps });
            }
        }
    }
    Ok(IsiBand {
        tau,
        threshold,
        taps: (0..len).map(g_at).collect(),
    })
}

/// How [`build_gram_with`] treats a Gram matrix whose spectrum dips below
/// `eigen_floor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramOptions {
    /// `None` leaves the matrix untouched and fails with
    /// `NotPositiveDefinite` if it is not positive definite.
    pub eigen_floor: Option<f64>,
}

impl GramOptions {
    pub fn exact() -> Self {
        Self { eigen_floor: None }
    }
}

impl Default for GramOptions {
    fn default() -> Self {
        Self {
            eigen_floor: Some(DEFAULT_EIGEN_FLOOR),
        }
    }
}

/// Banded symmetric Toeplitz ISI matrix together with its Cholesky factor.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    matrix: BandedSymMatrix,
    band: IsiBand,
    loading: f64,
    factor: BandedUpperTriangular,
}

impl GramMatrix {
    pub fn matrix(&self) -> &BandedSymMatrix {
        &self.matrix
    }

    pub fn band(&self) -> &IsiBand {
        &self.band
    }

    /// Diagonal loading applied before renormalising to a unit diagonal.
    pub fn loading(&self) -> f64 {
        self.loading
    }

    /// The banded Cholesky factor `R` with `G = RᵀR`.
    pub fn cholesky(&self) -> &BandedUpperTriangular {
        &self.factor
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Builds `G` for an `n`-symbol block with the default eigenvalue floor.
pub fn build_gram(band: &IsiBand, n: usize) -> Result<GramMatrix> {
    build_gram_with(band, n, GramOptions::default())
}

pub fn build_gram_with(band: &IsiBand, n: usize, opts: GramOptions) -> Result<GramMatrix> {
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    let taps = band.taps();
    let toeplitz = |scale: f64| BandedSymMatrix::from_upper_fn(n, taps.len() - 1, |i, j| {
        if i == j {
            1.0
        } else {
            taps[j - i] * scale
        }
    });
    let raw = toeplitz(1.0);
    let Some(floor) = opts.eigen_floor else {
        let factor = cholesky_banded(&raw)?;
        return Ok(GramMatrix {
            matrix: raw,
            band: band.clone(),
            loading: 0.0,
            factor,
        });
    };

    let loading = minimal_loading(&raw, floor, taps)?;
    let matrix = if loading == 0.0 {
        raw
    } else {
        toeplitz(1.0 / (1.0 + loading))
    };
    let factor = cholesky_banded(&matrix)?;
    Ok(GramMatrix {
        matrix,
        band: band.clone(),
        loading,
        factor,
    })
}

/// Smallest `ε ≥ 0` (to bisection accuracy, rounded up) such that
/// `λ_min(G + εI) ≥ floor`.
fn minimal_loading(g: &BandedSymMatrix, floor: f64, taps: &[f64]) -> Result<f64> {
    let feasible = |eps: f64| {
        cholesky_banded_with(
            g,
            CholeskyOptions {
                pivot_floor: 0.0,
                loading: eps - floor,
            },
        )
        .is_ok()
    };
    if feasible(0.0) {
        return Ok(0.0);
    }
    // Gershgorin: λ_min(G) >= 1 − 2·Σ|taps[1..]|.
    let mut hi = floor + 2.0 * taps[1..].iter().map(|t| t.abs()).sum::<f64>();
    if !feasible(hi) {
        hi *= 2.0;
        if !feasible(hi) {
            return Err(Error::NotPositiveDefinite { pivot: 0, value: f64::NAN });
        }
    }
    let mut lo = 0.0;
    while hi - lo > 1e-3 * floor {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
