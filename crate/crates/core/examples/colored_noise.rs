//! Matched-filter noise `σ·Rᵀv` and its empirical covariance against
//! `σ²G`.
//!
//! ```bash
//! cargo run --release --example colored_noise
//! ```

use nalgebra::{DMatrix, DVector};

use ftn_sd::channel::sample_colored_noise;
use ftn_sd::harness::{channel_gram, SimSettings};
use ftn_sd::rng::{substream, Purpose};

pub fn run_example() -> ftn_sd::Result<()> {
    let n = 8;
    let sigma = 0.5;
    let draws = 50_000;
    let settings = SimSettings {
        block_len: n,
        ..Default::default()
    };
    let g = channel_gram(0.3, 0.7, &settings)?;
    let mut rng = substream(3, Purpose::Noise, 0);
    let mut cov = DMatrix::<f64>::zeros(n, n);
    for _ in 0..draws {
        let w = DVector::from_vec(sample_colored_noise(g.cholesky(), sigma, &mut rng));
        cov += &w * w.transpose();
    }
    cov /= draws as f64;
    let expected = g.matrix().to_dense() * sigma * sigma;
    let rel = (&cov - &expected).norm() / expected.norm();
    let row = |m: &DMatrix<f64>| m.row(0).iter().map(|v| format!("{v:+.4}")).collect::<Vec<_>>().join(" ");
    println!("empirical row 0: {}", row(&cov));
    println!("sigma^2 G row 0: {}", row(&expected));
    println!("relative Frobenius error over {draws} draws: {rel:.4}");
    Ok(())
}

fn main() -> ftn_sd::Result<()> {
    run_example()
}
