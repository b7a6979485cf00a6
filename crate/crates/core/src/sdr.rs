//! Semidefinite relaxation of the binary MLSE problem with Gaussian
//! randomisation.
//!
//! The BQP `min aᵀGa − 2yᵀa` over `a ∈ {±1}^N` is lifted to
//! `min Tr(C·B)` over `B = [[A, a], [aᵀ, 1]] ⪰ 0` with `diag(B) = 1`, where
//! `C = [[G, −y], [−yᵀ, 0]]`. The SDP is solved in factored form
//! `B = VᵀV` with unit-norm columns of `V`, by cyclic exact minimisation
//! over one column at a time.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{ReceivedBlock, SymbolBlock};
use crate::detect::{bqp_objective, mlse_metric, DetectorOutput};
use crate::error::{Error, Result};
use crate::pulse::GramMatrix;
use crate::rng::{substream, Purpose};

/// Cost matrix `C` of the lifted problem, of size `(N+1)×(N+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedProblem {
    pub cost: DMatrix<f64>,
}

impl LiftedProblem {
    /// Number of symbols `N`.
    pub fn dim(&self) -> usize {
        self.cost.nrows() - 1
    }

    /// `Tr(C·[[aaᵀ, a], [aᵀ, 1]])` for a binary (or any real) `a`.
    pub fn lifted_value(&self, a: &[f64]) -> f64 {
        let n = self.dim();
        let mut h = a.to_vec();
        h.push(1.0);
        let h = DVector::from_vec(h);
        debug_assert_eq!(h.len(), n + 1);
        (h.transpose() * &self.cost * &h)[0]
    }
}

pub fn lift_problem(g: &GramMatrix, y: &[f64]) -> Result<LiftedProblem> {
    let n = g.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: y.len(),
        });
    }
    let mut cost = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            cost[(i, j)] = g.matrix().get(i, j);
        }
        cost[(i, n)] = -y[i];
        cost[(n, i)] = -y[i];
    }
    Ok(LiftedProblem { cost })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdrOptions {
    /// Stop once a sweep lowers the objective by less than
    /// `tol·(1 + |objective|)`.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Columns of the factor; `None` uses `⌈√(2(N+1))⌉`.
    pub rank: Option<usize>,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for SdrOptions {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_sweeps: 5000,
            rank: None,
            seed: 0,
            restarts: 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SdrSolution {
    /// `A*`, symmetric `N×N`.
    pub lifted: DMatrix<f64>,
    /// `a*`.
    pub mean: Vec<f64>,
    /// Certified lower bound on the SDP optimum, hence on the BQP optimum.
    pub lower_bound: f64,
    /// `Tr(G·A*) − 2yᵀa*` at the returned point.
    pub relaxed_objective: f64,
    pub sweeps: usize,
    /// `max |diag(A*) − 1|`.
    pub diag_residual: f64,
    /// Smallest eigenvalue of `[[A*, a*], [a*ᵀ, 1]]`.
    pub lifted_min_eigenvalue: f64,
}

struct Factor {
    rank: usize,
    cols: Vec<f64>,
}

impl Factor {
    fn col(&self, i: usize) -> &[f64] {
        &self.cols[i * self.rank..(i + 1) * self.rank]
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        self.col(i).iter().zip(self.col(j)).map(|(a, b)| a * b).sum()
    }

    fn gram(&self, m: usize) -> DMatrix<f64> {
        DMatrix::from_fn(m, m, |i, j| self.dot(i, j))
    }
}

fn objective(c: &DMatrix<f64>, v: &Factor) -> f64 {
    let m = c.nrows();
    let mut f = 0.0;
    for i in 0..m {
        for j in 0..m {
            if c[(i, j)] != 0.0 {
                f += c[(i, j)] * v.dot(i, j);
            }
        }
    }
    f
}

fn random_factor(m: usize, rank: usize, seed: u64, restart: u64) -> Factor {
    let mut rng = substream(seed, Purpose::SolverInit, restart);
    let mut cols: Vec<f64> = (0..m * rank).map(|_| rng.sample(StandardNormal)).collect();
    for col in cols.chunks_mut(rank) {
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        col.iter_mut().for_each(|x| *x /= norm);
    }
    Factor { rank, cols }
}

/// Cyclic column updates until the objective stalls. Returns the number of
/// sweeps, or `NotConverged`.
fn mix(c: &DMatrix<f64>, v: &mut Factor, opts: &SdrOptions) -> Result<usize> {
    let m = c.nrows();
    let k = v.rank;
    let mut grad = vec![0.0; k];
    let mut f = objective(c, v);
    let mut last_decrease = f64::INFINITY;
    for sweep in 1..=opts.max_sweeps {
        for i in 0..m {
            grad.iter_mut().for_each(|g| *g = 0.0);
            for j in 0..m {
                let cij = c[(i, j)];
                if j == i || cij == 0.0 {
                    continue;
                }
                for (g, x) in grad.iter_mut().zip(v.col(j)) {
                    *g += cij * x;
                }
            }
            let norm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-300 {
                let col = &mut v.cols[i * k..(i + 1) * k];
                for (x, g) in col.iter_mut().zip(&grad) {
                    *x = -g / norm;
                }
            }
        }
        let next = objective(c, v);
        last_decrease = f - next;
        f = next;
        if last_decrease < opts.tol * (1.0 + f.abs()) {
            return Ok(sweep);
        }
    }
    Err(Error::NotConverged {
        iterations: opts.max_sweeps,
        last_decrease,
    })
}

/// Weak-duality bound: with `λᵢ = (C·B)ᵢᵢ` and `μ = λ_min(C − diag λ)`,
/// every feasible `B` has `Tr(C·B) ≥ Σλ + (N+1)·min(μ, 0)`.
fn dual_bound(c: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let m = c.nrows();
    let lambda: Vec<f64> = (0..m).map(|i| c.row(i).dot(&b.row(i))).collect();
    let mut s = c.clone();
    for (i, l) in lambda.iter().enumerate() {
        s[(i, i)] -= l;
    }
    let mu = SymmetricEigen::new(s).eigenvalues.min();
    lambda.iter().sum::<f64>() + m as f64 * mu.min(0.0)
}

pub fn solve_sdr(p: &LiftedProblem, opts: &SdrOptions) -> Result<SdrSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter("SDR tolerance must be positive".into()));
    }
    let m = p.cost.nrows();
    let n = m - 1;
    let rank = opts
        .rank
        .unwrap_or_else(|| ((2.0 * m as f64).sqrt().ceil() as usize).max(2))
        .min(m);

    let mut best: Option<(f64, Factor, usize)> = None;
    let mut last_err = None;
    for restart in 0..opts.restarts.max(1) {
        let mut v = random_factor(m, rank, opts.seed, restart as u64);
        match mix(&p.cost, &mut v, opts) {
            Ok(sweeps) => {
                let f = objective(&p.cost, &v);
                if best.as_ref().is_none_or(|(bf, _, _)| f < *bf) {
                    best = Some((f, v, sweeps));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some((relaxed_objective, v, sweeps)) = best else {
        return Err(last_err.expect("at least one restart ran"));
    };

    let b = v.gram(m);
    let lifted = b.view((0, 0), (n, n)).into_owned();
    let mean: Vec<f64> = (0..n).map(|i| b[(i, n)]).collect();
    let diag_residual = (0..m).map(|i| (b[(i, i)] - 1.0).abs()).fold(0.0, f64::max);
    let lifted_min_eigenvalue = SymmetricEigen::new(b.clone()).eigenvalues.min();
    let lower_bound = dual_bound(&p.cost, &b).min(relaxed_objective);
    Ok(SdrSolution {
        lifted,
        mean,
        lower_bound,
        relaxed_objective,
        sweeps,
        diag_residual,
        lifted_min_eigenvalue,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomizationConfig {
    /// Number of Gaussian draws `Q`.
    pub draws: usize,
    pub seed: u64,
    /// Substream index, typically the trial number.
    pub stream: u64,
}

impl Default for RandomizationConfig {
    fn default() -> Self {
        Self {
            draws: 100,
            seed: 0,
            stream: 0,
        }
    }
}

/// Draws `ξ_q ~ N(a*, A* − a*a*ᵀ)`, quantises each by sign and keeps the
/// candidate with the smallest `ăᵀGă − 2yᵀă`.
pub fn randomize(sol: &SdrSolution, cfg: &RandomizationConfig, g: &GramMatrix, y: &[f64]) -> Result<SymbolBlock> {
    if cfg.draws == 0 {
        return Err(Error::InvalidParameter("randomization needs at least one draw".into()));
    }
    let n = sol.mean.len();
    let mean = DVector::from_column_slice(&sol.mean);
    let cov = &sol.lifted - &mean * mean.transpose();
    let eig = SymmetricEigen::new(cov);
    let scales = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let root = &eig.eigenvectors * DMatrix::from_diagonal(&scales);

    let mut rng = substream(cfg.seed, Purpose::Randomization, cfg.stream);
    let mut best: Option<(f64, SymbolBlock)> = None;
    for _ in 0..cfg.draws {
        let noise = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let xi = &mean + &root * noise;
        let cand = SymbolBlock::from_signs(xi.as_slice());
        let f = bqp_objective(y, g, &cand);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, cand));
        }
    }
    Ok(best.expect("draws >= 1").1)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SdrseConfig {
    pub solver: SdrOptions,
    pub randomization: RandomizationConfig,
}

/// Relaxed solution together with the detector decision.
#[derive(Debug, Clone)]
pub struct SdrseResult {
    pub output: DetectorOutput,
    pub solution: SdrSolution,
    /// BQP objective of the decision; never below `solution.lower_bound`.
    pub objective: f64,
}

pub fn sdrse_detect(block: &ReceivedBlock, g: &GramMatrix, cfg: &SdrseConfig) -> Result<DetectorOutput> {
    sdrse_detect_full(block, g, cfg).map(|r| r.output)
}

pub fn sdrse_detect_full(block: &ReceivedBlock, g: &GramMatrix, cfg: &SdrseConfig) -> Result<SdrseResult> {
    let problem = lift_problem(g, &block.y)?;
    let solution = solve_sdr(&problem, &cfg.solver)?;
    let symbols = randomize(&solution, &cfg.randomization, g, &block.y)?;
    let objective = bqp_objective(&block.y, g, &symbols);
    let metric = mlse_metric(&block.z, g, &symbols);
    Ok(SdrseResult {
        output: DetectorOutput {
            symbols,
            metric,
            nodes_visited: 0,
            radius_updates: 0,
            radius_trace: Vec::new(),
            multiply_adds: 0,
            max_terms_per_node: 0,
        },
        solution,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ebno_to_sigma, modulate, random_bits, transmit, ChannelConfig};
    use crate::detect::mlse_brute;
    use crate::pulse::{build_gram, make_isi_band, IsiBand, PulseSpec};
    use approx::assert_abs_diff_eq;

    fn gram(beta: f64, tau: f64, n: usize) -> GramMatrix {
        build_gram(&make_isi_band(&PulseSpec::with_roll_off(beta).unwrap(), tau, 1e-3).unwrap(), n).unwrap()
    }

    fn noisy(g: &GramMatrix, ebno: f64, trial: u64) -> (SymbolBlock, ReceivedBlock) {
        let a = modulate(&random_bits(g.dim(), &mut substream(40, Purpose::Bits, trial))).unwrap();
        let cfg = ChannelConfig::new(1.0, ebno_to_sigma(ebno, 1.0, 1)).unwrap();
        let rx = transmit(&a, &cfg, g, &mut substream(40, Purpose::Noise, trial)).unwrap();
        (a, rx)
    }

    #[test]
    fn lift_one_symbol() {
        let g = build_gram(&IsiBand::from_taps(1.0, vec![1.0]).unwrap(), 1).unwrap();
        let p = lift_problem(&g, &[2.0]).unwrap();
        assert_eq!(p.cost, DMatrix::from_row_slice(2, 2, &[1.0, -2.0, -2.0, 0.0]));
    }

    #[test]
    fn lift_matches_bqp() {
        let g = gram(0.3, 0.7, 6);
        for trial in 0..10 {
            let (_, rx) = noisy(&g, 3.0, trial);
            let p = lift_problem(&g, &rx.y).unwrap();
            for k in 0..100u64 {
                let a = modulate(&random_bits(6, &mut substream(k, Purpose::Bits, trial))).unwrap();
                assert_abs_diff_eq!(p.lifted_value(a.as_slice()), bqp_objective(&rx.y, &g, &a), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn one_symbol_relaxation_is_tight() {
        let g = build_gram(&IsiBand::from_taps(1.0, vec![1.0]).unwrap(), 1).unwrap();
        for y in [0.7, -1.3] {
            let p = lift_problem(&g, &[y]).unwrap();
            let sol = solve_sdr(&p, &SdrOptions::default()).unwrap();
            let opt = 1.0 - 2.0 * y.abs();
            assert_abs_diff_eq!(sol.lower_bound, opt, epsilon = 1e-6);
            assert_abs_diff_eq!(sol.lifted[(0, 0)], 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(sol.mean[0], y.signum(), epsilon = 1e-4);
        }
    }

    #[test]
    fn noiseless_relaxation_is_tight() {
        let g = gram(0.3, 0.7, 8);
        let a = modulate(&random_bits(8, &mut substream(2, Purpose::Bits, 0))).unwrap();
        let rx = transmit(&a, &ChannelConfig::new(1.0, 0.0).unwrap(), &g, &mut substream(2, Purpose::Noise, 0)).unwrap();
        let sol = solve_sdr(&lift_problem(&g, &rx.y).unwrap(), &SdrOptions::default()).unwrap();
        let opt = bqp_objective(&rx.y, &g, &mlse_brute(&rx, &g).unwrap().symbols);
        assert_abs_diff_eq!(sol.lower_bound, opt, epsilon = 1e-4);
        for (m, s) in sol.mean.iter().zip(a.as_slice()) {
            assert_abs_diff_eq!(*m, *s, epsilon = 1e-2);
        }
        let cfg = RandomizationConfig {
            draws: 20,
            ..Default::default()
        };
        assert_eq!(randomize(&sol, &cfg, &g, &rx.y).unwrap(), a);
    }

    #[test]
    fn sandwich_and_residuals() {
        let g = gram(0.5, 0.6, 12);
        let opts = SdrOptions::default();
        for trial in 0..10 {
            let (_, rx) = noisy(&g, 2.0, trial);
            let res = sdrse_detect_full(&rx, &g, &SdrseConfig::default()).unwrap();
            let opt = bqp_objective(&rx.y, &g, &mlse_brute(&rx, &g).unwrap().symbols);
            assert!(res.solution.lower_bound <= opt + 1e-9);
            assert!(opt <= res.objective + 1e-9);
            assert!(res.solution.diag_residual <= opts.tol);
            assert!(res.solution.lifted_min_eigenvalue >= -opts.tol);
        }
    }

    #[test]
    fn degenerate_covariance_returns_mean() {
        let g = gram(0.3, 0.7, 4);
        let a = [1.0, -1.0, -1.0, 1.0];
        let mean = DVector::from_column_slice(&a);
        let sol = SdrSolution {
            lifted: &mean * mean.transpose(),
            mean: a.to_vec(),
            lower_bound: 0.0,
            relaxed_objective: 0.0,
            sweeps: 0,
            diag_residual: 0.0,
            lifted_min_eigenvalue: 0.0,
        };
        for draws in [1, 7] {
            let cfg = RandomizationConfig {
                draws,
                seed: 3,
                stream: 0,
            };
            assert_eq!(randomize(&sol, &cfg, &g, &[0.0; 4]).unwrap().as_slice(), &a);
        }
    }

    #[test]
    fn more_draws_never_worse() {
        let g = gram(0.3, 0.6, 10);
        let (_, rx) = noisy(&g, 0.0, 5);
        let sol = solve_sdr(&lift_problem(&g, &rx.y).unwrap(), &SdrOptions::default()).unwrap();
        let mut prev = f64::INFINITY;
        for draws in [1, 2, 5, 20, 100] {
            let cfg = RandomizationConfig { draws, seed: 9, stream: 1 };
            let out = randomize(&sol, &cfg, &g, &rx.y).unwrap();
            let f = bqp_objective(&rx.y, &g, &out);
            assert!(f <= prev);
            prev = f;
        }
        let cfg = RandomizationConfig { draws: 1, seed: 9, stream: 1 };
        assert_eq!(randomize(&sol, &cfg, &g, &rx.y).unwrap(), randomize(&sol, &cfg, &g, &rx.y).unwrap());
    }

    #[test]
    fn not_converged_is_reported() {
        let g = gram(0.3, 0.6, 12);
        let (_, rx) = noisy(&g, 0.0, 1);
        let opts = SdrOptions {
            tol: 1e-15,
            max_sweeps: 2,
            ..Default::default()
        };
        assert!(matches!(
            solve_sdr(&lift_problem(&g, &rx.y).unwrap(), &opts),
            Err(Error::NotConverged { iterations: 2, .. })
        ));
    }
}
