//! Depth-first sphere search over `{−1, +1}^N`.
//!
//! Minimises `‖t − R·a‖²` for upper-triangular `R`, visiting levels from the
//! last row up. Each level tries the candidate nearest its interval centre
//! first; a node is pruned once its partial distance reaches the current
//! squared radius, and the radius drops to the distance of every completed
//! leaf that beats it.

use crate::linalg::UpperTriangular;

/// A pruned node: symbols `a[level..]`, the last of which failed the
/// radius test with partial distance `partial`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrunedNode {
    pub level: usize,
    pub suffix: Vec<f64>,
    pub partial: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct SearchOutcome {
    /// Best leaf found, or the seed point when no leaf beat it.
    pub best: Option<Vec<f64>>,
    pub best_distance: f64,
    pub nodes_visited: u64,
    pub radius_trace: Vec<f64>,
    pub multiply_adds: u64,
    pub max_terms_per_node: usize,
    pub pruned: Vec<PrunedNode>,
}

struct Search<'a, R: ?Sized> {
    r: &'a R,
    target: &'a [f64],
    symbols: Vec<f64>,
    radius: f64,
    best: Option<Vec<f64>>,
    nodes_visited: u64,
    radius_trace: Vec<f64>,
    multiply_adds: u64,
    max_terms: usize,
    record_pruned: bool,
    pruned: Vec<PrunedNode>,
}

impl<R: UpperTriangular + ?Sized> Search<'_, R> {
    fn descend(&mut self, level: usize, partial: f64) {
        let row = self.r.row(level);
        let mut centre = self.target[level];
        for (k, v) in row.iter().enumerate().skip(1) {
            centre -= v * self.symbols[level + k];
        }
        // row.len() − 1 products for the centre, one for the level term
        self.multiply_adds += row.len() as u64;
        self.max_terms = self.max_terms.max(row.len());
        let diag = row[0];
        let centre = centre / diag;

        let nearest = if centre < 0.0 { -1.0 } else { 1.0 };
        for sym in [nearest, -nearest] {
            self.nodes_visited += 1;
            let e = diag * (centre - sym);
            let dist = partial + e * e;
            if dist >= self.radius {
                if self.record_pruned {
                    self.record(level, sym, dist);
                    if sym == nearest {
                        let e2 = diag * (centre + sym);
                        self.record(level, -sym, partial + e2 * e2);
                    }
                }
                // the farther candidate cannot fit either
                break;
            }
            self.symbols[level] = sym;
            if level == 0 {
                self.radius = dist;
                self.radius_trace.push(dist);
                self.best = Some(self.symbols.clone());
            } else {
                self.descend(level - 1, dist);
            }
        }
    }

    fn record(&mut self, level: usize, sym: f64, partial: f64) {
        let mut suffix = self.symbols[level..].to_vec();
        suffix[0] = sym;
        self.pruned.push(PrunedNode { level, suffix, partial });
    }
}

/// Runs the search with squared radius `radius_sq`. When `seed` is given it
/// is returned unless a leaf strictly beats `radius_sq`.
pub(crate) fn sphere_search<R: UpperTriangular + ?Sized>(
    r: &R,
    target: &[f64],
    radius_sq: f64,
    seed: Option<Vec<f64>>,
    record_pruned: bool,
) -> SearchOutcome {
    let n = r.dim();
    assert_eq!(target.len(), n, "sphere_search target length");
    let mut search = Search {
        r,
        target,
        symbols: vec![1.0; n],
        radius: radius_sq,
        best: seed,
        nodes_visited: 0,
        radius_trace: Vec::new(),
        multiply_adds: 0,
        max_terms: 0,
        record_pruned,
        pruned: Vec::new(),
    };
    if n > 0 {
        search.descend(n - 1, 0.0);
    }
    SearchOutcome {
        best: search.best,
        best_distance: search.radius,
        nodes_visited: search.nodes_visited,
        radius_trace: search.radius_trace,
        multiply_adds: search.multiply_adds,
        max_terms_per_node: search.max_terms,
        pruned: search.pruned,
    }
}

/// `‖t − R·a‖²`.
pub(crate) fn residual_norm_sq<R: UpperTriangular + ?Sized>(r: &R, target: &[f64], a: &[f64]) -> f64 {
    r.mul_vec(a)
        .iter()
        .zip(target)
        .map(|(ra, t)| (t - ra).powi(2))
        .sum()
}
