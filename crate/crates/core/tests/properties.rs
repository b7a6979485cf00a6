use approx::assert_relative_eq;
use nalgebra::DMatrix;
use proptest::prelude::*;

use ftn_sd::channel::{ebno_to_sigma, ReceivedBlock};
use ftn_sd::detect::{mlse_brute, sdse_detect};
use ftn_sd::linalg::{cholesky_banded, qr_factor, solve_spd, BandedSymMatrix, UpperTriangular};
use ftn_sd::pulse::{build_gram, IsiBand};

/// Diagonally dominant banded matrix from raw entries in `[-1, 1]`.
fn spd_banded(n: usize, b: usize, raw: &[f64]) -> BandedSymMatrix {
    let mut it = raw.iter().cycle();
    let mut m = BandedSymMatrix::from_upper_fn(n, b, |i, j| if i == j { 0.0 } else { *it.next().unwrap() });
    let rows: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| m.get(i, j).abs()).sum::<f64>())
        .collect();
    m = BandedSymMatrix::from_upper_fn(n, b, |i, j| if i == j { rows[i] + 0.5 } else { m.get(i, j) });
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn banded_cholesky_reconstructs(n in 4usize..=128, b in 0usize..8, raw in prop::collection::vec(-1.0f64..1.0, 64)) {
        let g = spd_banded(n, b, &raw);
        let r = cholesky_banded(&g).unwrap();
        prop_assert_eq!(r.half_bandwidth(), b.min(n - 1));
        let rd = r.to_dense();
        for i in 0..n {
            for j in 0..i {
                prop_assert_eq!(rd[(i, j)], 0.0);
            }
            prop_assert!(rd[(i, i)] > 0.0);
        }
        let err = (rd.transpose() * &rd - g.to_dense()).norm();
        prop_assert!(err <= 1e-10 * g.frobenius_norm(), "‖RᵀR − G‖ = {}", err);

        let x: Vec<f64> = (0..n).map(|i| raw[i % raw.len()]).collect();
        let y = g.mul_vec(&x);
        let back = solve_spd(&g, &y).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn qr_is_orthogonal_and_reconstructs(n in 1usize..=24, raw in prop::collection::vec(-1.0f64..1.0, 576)) {
        let a = DMatrix::from_fn(n, n, |i, j| raw[i * 24 + j] + if i == j { 3.0 } else { 0.0 });
        let f = qr_factor(&a).unwrap();
        let eye = DMatrix::<f64>::identity(n, n);
        prop_assert!((f.q.transpose() * &f.q - eye).norm() < 1e-12 * n as f64);
        let r = f.r.to_dense();
        prop_assert!((&f.q * &r - &a).norm() < 1e-12 * a.norm().max(1.0));
        for i in 0..n {
            prop_assert!(r[(i, i)] >= 0.0);
        }
    }

    #[test]
    fn sdse_is_optimal_on_random_channels(
        n in 1usize..=10,
        taps in prop::collection::vec(-0.25f64..0.25, 1..4),
        y in prop::collection::vec(-2.0f64..2.0, 10),
    ) {
        let mut t = vec![1.0];
        t.extend(taps);
        let band = IsiBand::from_taps(0.7, t).unwrap();
        let g = match build_gram(&band, n) {
            Ok(g) => g,
            Err(_) => return Ok(()),
        };
        let rx = ReceivedBlock::from_matched_filter(y[..n].to_vec(), &g).unwrap();
        let brute = mlse_brute(&rx, &g).unwrap();
        let sdse = sdse_detect(&rx, g.cholesky(), g.band());
        prop_assert!((sdse.metric - brute.metric).abs() <= 1e-9 * (1.0 + brute.metric.abs()));
        prop_assert!(sdse.max_terms_per_node <= band.len());
    }
}

#[test]
fn sigma_matches_ebno() {
    assert_relative_eq!(ebno_to_sigma(0.0, 1.0, 1), 0.5f64.sqrt(), epsilon = 1e-15);
}
