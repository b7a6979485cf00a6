//! Builds the banded ISI matrix, factors it as `RᵀR` without leaving the
//! band, and compares against a dense QR factorisation.
//!
//! ```bash
//! cargo run --release --example banded_cholesky
//! ```

use std::time::Instant;

use ftn_sd::linalg::{qr_factor, solve_with_factor, UpperTriangular};
use ftn_sd::pulse::{build_gram, build_gram_with, make_isi_band, GramOptions, PulseSpec, DEFAULT_THRESHOLD};

pub fn run_example() -> ftn_sd::Result<()> {
    let spec = PulseSpec::with_roll_off(0.3)?;
    let band = make_isi_band(&spec, 0.7, DEFAULT_THRESHOLD)?;

    // The truncated matrix is not positive definite as it stands.
    match build_gram_with(&band, 64, GramOptions::exact()) {
        Ok(_) => println!("exact Gram factors"),
        Err(e) => println!("exact Gram: {e}"),
    }

    for n in [16, 64, 256] {
        let g = build_gram(&band, n)?;
        let r = g.cholesky();
        let start = Instant::now();
        let fresh = ftn_sd::linalg::cholesky_banded(g.matrix())?;
        let t_chol = start.elapsed();
        let dense = g.matrix().to_dense();
        let start = Instant::now();
        let qr = qr_factor(&dense)?;
        let t_qr = start.elapsed();

        let recon = (r.to_dense().transpose() * r.to_dense() - &dense).norm();
        let qr_err = (&qr.q * qr.r.to_dense() - &dense).norm();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = g.matrix().mul_vec(&x);
        let back = solve_with_factor(&fresh, &y)?;
        let solve_err = x.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

        println!(
            "n={n:>3} L={} loading={:.2e} |RtR-G|={recon:.1e} |QR-G|={qr_err:.1e} solve={solve_err:.1e} \
             chol={:?} qr={:?}",
            band.len(),
            g.loading(),
            t_chol,
            t_qr
        );
    }
    Ok(())
}

fn main() -> ftn_sd::Result<()> {
    run_example()
}
