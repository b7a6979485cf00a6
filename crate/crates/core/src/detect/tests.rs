use approx::assert_abs_diff_eq;

use super::*;
use crate::channel::{ebno_to_sigma, modulate, random_bits, transmit, ChannelConfig};
use crate::pulse::{build_gram, make_isi_band, PulseSpec};
use crate::rng::{substream, Purpose};

fn gram(beta: f64, tau: f64, n: usize) -> GramMatrix {
    let spec = PulseSpec::with_roll_off(beta).unwrap();
    build_gram(&make_isi_band(&spec, tau, 1e-3).unwrap(), n).unwrap()
}

fn instance(g: &GramMatrix, ebno_db: f64, seed: u64, trial: u64) -> (SymbolBlock, ReceivedBlock) {
    let a = modulate(&random_bits(g.dim(), &mut substream(seed, Purpose::Bits, trial))).unwrap();
    let cfg = ChannelConfig::new(1.0, ebno_to_sigma(ebno_db, 1.0, 1)).unwrap();
    let rx = transmit(&a, &cfg, g, &mut substream(seed, Purpose::Noise, trial)).unwrap();
    (a, rx)
}

fn noiseless(g: &GramMatrix, seed: u64) -> (SymbolBlock, ReceivedBlock) {
    let a = modulate(&random_bits(g.dim(), &mut substream(seed, Purpose::Bits, 0))).unwrap();
    let rx = transmit(&a, &ChannelConfig::new(1.0, 0.0).unwrap(), g, &mut substream(seed, Purpose::Noise, 0)).unwrap();
    (a, rx)
}

#[test]
fn metric_by_hand() {
    let g = gram(0.3, 1.0, 2);
    let a = SymbolBlock::new(vec![1.0, 1.0]).unwrap();
    assert_abs_diff_eq!(mlse_metric(&[1.0, -1.0], &g, &a), 4.0);
    assert_eq!(mlse_metric(&[1.0, 1.0], &g, &a), 0.0);
}

#[test]
fn metric_identities() {
    let g = gram(0.3, 0.7, 12);
    for trial in 0..20 {
        let (_, rx) = instance(&g, 4.0, 11, trial);
        let zgz = g.matrix().quadratic_form(&rx.z);
        let r = g.cholesky();
        for k in 0..10 {
            let a = modulate(&random_bits(12, &mut substream(trial, Purpose::Bits, 100 + k))).unwrap();
            let m = mlse_metric(&rx.z, &g, &a);
            assert_abs_diff_eq!(m, bqp_objective(&rx.y, &g, &a) + zgz, epsilon = 1e-9 * (1.0 + zgz));
            let d: Vec<f64> = rx.z.iter().zip(a.as_slice()).map(|(z, a)| z - a).collect();
            let whitened: f64 = r.mul_vec(&d).iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(m, whitened, epsilon = 1e-9 * (1.0 + m));
        }
    }
}

#[test]
fn zero_forcing() {
    let g = gram(0.3, 1.0, 2);
    let rx = ReceivedBlock {
        y: vec![0.2, -3.5],
        z: vec![0.2, -3.5],
    };
    assert_eq!(zf_detect(&rx, &g).symbols.as_slice(), &[1.0, -1.0]);
    let rx = ReceivedBlock {
        y: vec![0.0, -0.0],
        z: vec![0.0, -0.0],
    };
    assert_eq!(zf_detect(&rx, &g).symbols.as_slice(), &[1.0, 1.0]);

    let g = gram(0.3, 0.7, 16);
    let (a, rx) = noiseless(&g, 5);
    assert_eq!(zf_detect(&rx, &g).symbols, a);
}

#[test]
fn brute_force_small_cases() {
    let g = gram(0.3, 1.0, 2);
    let rx = ReceivedBlock {
        y: vec![0.9, -0.1],
        z: vec![0.9, -0.1],
    };
    assert_eq!(mlse_brute(&rx, &g).unwrap().symbols.as_slice(), &[1.0, -1.0]);

    let g = gram(0.5, 0.6, 10);
    let (a, rx) = noiseless(&g, 9);
    let out = mlse_brute(&rx, &g).unwrap();
    assert_eq!(out.symbols, a);
    assert!(out.metric < 1e-18);
}

#[test]
fn brute_force_tie_break_is_lexicographic() {
    // z = 0 is equidistant from every sequence under G = I
    let g = gram(0.3, 1.0, 3);
    let rx = ReceivedBlock {
        y: vec![0.0; 3],
        z: vec![0.0; 3],
    };
    let res = mlse_brute_ranked(&rx, &g).unwrap();
    assert_eq!(res.output.symbols.as_slice(), &[-1.0, -1.0, -1.0]);
    assert!(!res.is_unique(1e-12));
}

#[test]
fn brute_force_guard() {
    let g = gram(0.3, 1.0, 25);
    let rx = ReceivedBlock {
        y: vec![0.0; 25],
        z: vec![0.0; 25],
    };
    assert!(matches!(mlse_brute(&rx, &g), Err(Error::BlockTooLarge { n: 25, max: 24 })));
}

#[test]
fn sdse_noiseless_and_single_level() {
    let g = gram(0.3, 0.7, 32);
    let (a, rx) = noiseless(&g, 2);
    let out = sdse_detect(&rx, g.cholesky(), g.band());
    assert_eq!(out.symbols, a);
    assert!(out.metric < 1e-18);
    assert!(out.nodes_visited <= 64);

    let g1 = gram(0.3, 0.7, 1);
    for z in [0.3, -0.2, 1.7, -4.0] {
        let rx = ReceivedBlock { y: vec![z], z: vec![z] };
        let out = sdse_detect(&rx, g1.cholesky(), g1.band());
        assert_eq!(out.symbols.as_slice(), &[if z < 0.0 { -1.0 } else { 1.0 }]);
    }
}

#[test]
fn sdse_matches_brute_force() {
    for &(beta, tau) in &[(0.3, 0.6), (0.5, 0.7), (0.3, 0.7)] {
        let g = gram(beta, tau, 10);
        for trial in 0..60 {
            let ebno = [0.0, 4.0, 8.0][trial as usize % 3];
            let (_, rx) = instance(&g, ebno, 21, trial);
            let oracle = mlse_brute_ranked(&rx, &g).unwrap();
            let out = sdse_detect(&rx, g.cholesky(), g.band());
            assert_abs_diff_eq!(out.metric, oracle.output.metric, epsilon = 1e-9);
            if oracle.is_unique(1e-9) {
                assert_eq!(out.symbols, oracle.output.symbols);
            }
        }
    }
}

#[test]
fn sdse_last_level_radius_agrees() {
    let g = gram(0.3, 0.6, 10);
    for trial in 0..30 {
        let (_, rx) = instance(&g, 3.0, 8, trial);
        let (full, _) = sdse_detect_with(&rx, g.cholesky(), g.band(), SdseOptions::default());
        let (last, _) = sdse_detect_with(
            &rx,
            g.cholesky(),
            g.band(),
            SdseOptions {
                initial_radius: InitialRadius::LastLevel,
                ..Default::default()
            },
        );
        assert_abs_diff_eq!(full.metric, last.metric, epsilon = 1e-9);
    }
}

#[test]
fn sdse_radius_strictly_decreases_and_band_bound_holds() {
    let g = gram(0.3, 0.6, 48);
    let l = g.band().len();
    for trial in 0..20 {
        let (_, rx) = instance(&g, 2.0, 4, trial);
        let out = sdse_detect(&rx, g.cholesky(), g.band());
        assert!(out.radius_trace.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(out.radius_updates as usize, out.radius_trace.len());
        assert!(out.max_terms_per_node <= l);
        assert!(out.multiply_adds <= out.nodes_visited * l as u64);
    }
}

#[test]
fn sdse_pruning_is_sound() {
    let g = gram(0.5, 0.6, 9);
    for trial in 0..15 {
        let (_, rx) = instance(&g, 1.0, 33, trial);
        let (out, trace) = sdse_detect_with(
            &rx,
            g.cholesky(),
            g.band(),
            SdseOptions {
                record_pruned: true,
                ..Default::default()
            },
        );
        for node in &trace.pruned {
            // every completion of a pruned prefix is no better than the answer
            for code in 0..(1u32 << node.level) {
                let mut a: Vec<f64> = (0..node.level).map(|i| if (code >> i) & 1 == 1 { 1.0 } else { -1.0 }).collect();
                a.extend_from_slice(&node.suffix);
                let m = mlse_metric(&rx.z, &g, &SymbolBlock::new(a).unwrap());
                assert!(m >= out.metric - 1e-9, "pruned leaf {m} beats {}", out.metric);
            }
        }
    }
}

#[test]
fn standard_sd_behaviour() {
    // orthogonal case: identical to zero forcing
    let g = gram(0.3, 1.0, 16);
    for trial in 0..10 {
        let (_, rx) = instance(&g, 2.0, 1, trial);
        assert_eq!(standard_sd_detect(&rx, &g).unwrap().symbols, zf_detect(&rx, &g).symbols);
    }
    let g = gram(0.3, 0.7, 16);
    let (a, rx) = noiseless(&g, 3);
    assert_eq!(standard_sd_detect(&rx, &g).unwrap().symbols, a);
}

#[test]
fn standard_sd_is_mismatched() {
    let g = gram(0.3, 0.7, 12);
    let sd = StandardSphereDecoder::new(&g).unwrap();
    let mut differ = 0;
    for trial in 0..200 {
        let (_, rx) = instance(&g, 6.0, 17, trial);
        let out = sd.detect(&rx, &g).unwrap();
        let oracle = mlse_brute(&rx, &g).unwrap();
        assert!(out.metric >= oracle.metric - 1e-9);
        if out.metric > oracle.metric + 1e-9 {
            differ += 1;
        }
    }
    assert!(differ > 0);
}
