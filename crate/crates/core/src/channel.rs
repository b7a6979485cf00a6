//! BPSK mapping and the matched-filter FTN channel `y = √Es·G·a + w`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{solve_with_factor, BandedUpperTriangular, UpperTriangular};
use crate::pulse::GramMatrix;

/// Block of BPSK symbols, every entry `±1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock(Vec<f64>);

impl SymbolBlock {
    pub fn new(symbols: Vec<f64>) -> Result<Self> {
        if let Some(bad) = symbols.iter().find(|&&s| s != 1.0 && s != -1.0) {
            return Err(Error::InvalidParameter(format!("symbol {bad} is not ±1")));
        }
        Ok(Self(symbols))
    }

    /// Entrywise sign, with exact zeros mapped to `+1`.
    pub fn from_signs(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Positions where `self` and `other` differ.
    pub fn errors_against(&self, other: &SymbolBlock) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }
}

/// Gray mapping for BPSK: bit 0 → +1, bit 1 → −1.
pub fn modulate(bits: &[u8]) -> Result<SymbolBlock> {
    if bits.is_empty() {
        return Err(Error::InvalidParameter("cannot modulate an empty bit vector".into()));
    }
    bits.iter()
        .map(|&b| match b {
            0 => Ok(1.0),
            1 => Ok(-1.0),
            other => Err(Error::InvalidParameter(format!("bit value {other}"))),
        })
        .collect::<Result<Vec<_>>>()
        .map(SymbolBlock)
}

pub fn demodulate(symbols: &SymbolBlock) -> Vec<u8> {
    symbols.0.iter().map(|&s| u8::from(s < 0.0)).collect()
}

pub fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.random_range(0..2u8)).collect()
}

/// `w = σ·Rᵀ·v` with `v` standard normal, so `Cov(w) = σ²·RᵀR`.
pub fn sample_colored_noise<R: Rng + ?Sized>(r: &BandedUpperTriangular, sigma: f64, rng: &mut R) -> Vec<f64> {
    let n = r.dim();
    if sigma == 0.0 {
        return vec![0.0; n];
    }
    let v: Vec<f64> = (0..n).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)).collect();
    r.transpose_mul_vec(&v)
}

/// Matched-filter samples `y` and their zero-forcing image `z = G⁻¹y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedBlock {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
}

impl ReceivedBlock {
    /// Builds the block from `y`, computing `z` through the factor of `g`.
    pub fn from_matched_filter(y: Vec<f64>, g: &GramMatrix) -> Result<Self> {
        let z = solve_with_factor(g.cholesky(), &y)?;
        Ok(Self { y, z })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Channel parameters for one Gram matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    pub symbol_energy: f64,
    pub sigma: f64,
}

impl ChannelConfig {
    pub fn new(symbol_energy: f64, sigma: f64) -> Result<Self> {
        if !(symbol_energy > 0.0) {
            return Err(Error::InvalidParameter(format!("symbol energy {symbol_energy} must be positive")));
        }
        if !(sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise level {sigma} must be non-negative")));
        }
        Ok(Self { symbol_energy, sigma })
    }

    pub fn from_ebno(ebno_db: f64, symbol_energy: f64) -> Result<Self> {
        Self::new(symbol_energy, ebno_to_sigma(ebno_db, symbol_energy, 1))
    }
}

/// `y = √Es·G·a + w`, `w ~ N(0, σ²G)`.
pub fn transmit<R: Rng + ?Sized>(
    a: &SymbolBlock,
    cfg: &ChannelConfig,
    g: &GramMatrix,
    rng: &mut R,
) -> Result<ReceivedBlock> {
    if a.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: a.len(),
        });
    }
    let amp = cfg.symbol_energy.sqrt();
    let w = sample_colored_noise(g.cholesky(), cfg.sigma, rng);
    let ga = g.matrix().mul_vec(a.as_slice());
    let y = ga.iter().zip(&w).map(|(s, n)| amp * s + n).collect();
    ReceivedBlock::from_matched_filter(y, g)
}

/// Real-baseband BPSK convention: `Eb = Es / bits`, `σ² = N0 / 2`.
pub fn ebno_to_sigma(ebno_db: f64, symbol_energy: f64, bits_per_symbol: u32) -> f64 {
    let eb = symbol_energy / bits_per_symbol as f64;
    let n0 = eb / 10f64.powf(ebno_db / 10.0);
    (n0 / 2.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::{build_gram, make_isi_band, IsiBand, PulseSpec};
    use crate::rng::{substream, Purpose};
    use approx::assert_abs_diff_eq;

    #[test]
    fn modulation() {
        assert_eq!(modulate(&[0, 1, 0]).unwrap().as_slice(), &[1.0, -1.0, 1.0]);
        assert!(modulate(&[0, 0, 0, 0]).unwrap().as_slice().iter().all(|&s| s == 1.0));
        assert!(modulate(&[]).is_err());
        assert!(modulate(&[2]).is_err());
        let bits = random_bits(100, &mut substream(1, Purpose::Bits, 0));
        assert_eq!(demodulate(&modulate(&bits).unwrap()), bits);
    }

    #[test]
    fn symbol_block_validation() {
        assert!(SymbolBlock::new(vec![1.0, 0.5]).is_err());
        assert_eq!(SymbolBlock::from_signs(&[0.0, -0.1, 3.0]).as_slice(), &[1.0, -1.0, 1.0]);
    }

    #[test]
    fn sigma_convention() {
        assert_abs_diff_eq!(ebno_to_sigma(0.0, 1.0, 1), 0.5f64.sqrt(), epsilon = 1e-15);
        assert!(ebno_to_sigma(100.0, 1.0, 1) < 1e-5);
        assert!(ChannelConfig::new(0.0, 1.0).is_err());
        assert!(ChannelConfig::new(1.0, -1.0).is_err());
    }

    #[test]
    fn zero_noise() {
        let band = IsiBand::from_taps(1.0, vec![1.0]).unwrap();
        let g = build_gram(&band, 4).unwrap();
        let w = sample_colored_noise(g.cholesky(), 0.0, &mut substream(1, Purpose::Noise, 0));
        assert_eq!(w, vec![0.0; 4]);
    }

    #[test]
    fn noiseless_transmit_recovers_symbols() {
        let spec = PulseSpec::with_roll_off(0.3).unwrap();
        let band = make_isi_band(&spec, 0.7, 1e-3).unwrap();
        let g = build_gram(&band, 16).unwrap();
        let a = modulate(&random_bits(16, &mut substream(3, Purpose::Bits, 0))).unwrap();
        let cfg = ChannelConfig::new(4.0, 0.0).unwrap();
        let rx = transmit(&a, &cfg, &g, &mut substream(3, Purpose::Noise, 0)).unwrap();
        for (z, s) in rx.z.iter().zip(a.as_slice()) {
            assert_abs_diff_eq!(*z, 2.0 * s, epsilon = 1e-9);
        }
        let identity = build_gram(&IsiBand::from_taps(1.0, vec![1.0]).unwrap(), 16).unwrap();
        let rx = transmit(&a, &cfg, &identity, &mut substream(3, Purpose::Noise, 0)).unwrap();
        let want: Vec<f64> = a.as_slice().iter().map(|s| 2.0 * s).collect();
        assert_eq!(rx.y, want);
    }

    #[test]
    fn dimension_mismatch() {
        let g = build_gram(&IsiBand::from_taps(1.0, vec![1.0]).unwrap(), 3).unwrap();
        let a = SymbolBlock::new(vec![1.0, 1.0]).unwrap();
        let cfg = ChannelConfig::new(1.0, 0.1).unwrap();
        assert!(matches!(
            transmit(&a, &cfg, &g, &mut substream(0, Purpose::Noise, 0)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
