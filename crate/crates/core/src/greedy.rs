//! Forward greedy block selection of spectral paths.
//!
//! Each iteration proposes one block per support size, builds the trial Gram
//! system by augmentation, solves it in closed form and scores it on the
//! validation split. The best block is appended when it improves validation
//! R² by at least `min_improvement`; otherwise the iteration counts as a
//! strike. The penalty is chosen on the first iteration and kept fixed,
//! with an optional resweep of the final system.

use std::collections::HashSet;

use log::{debug, warn};
use rayon::prelude::*;

use crate::data_io::metrics;
use crate::error::{Error, Result};
use crate::features::evaluate_block;
use crate::matrix::Matrix;
use crate::model::{SpectralModel, TraceRecord};
use crate::paths::{group_into_rays, CandidateStream, FrequencyVector};
use crate::preprocessing::{center_target, fit_scaler, transform_to_angles, AngularMatrix};
use crate::solver::{GramSystem, RidgeSolution};

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub sparsity_set: Vec<usize>,
    pub max_paths: usize,
    pub block_size: usize,
    pub block_size_bounds: (usize, usize),
    pub lambda_grid: Vec<f64>,
    pub patience: usize,
    pub min_improvement: f64,
    pub final_resweep: bool,
    /// Split seed; the fit itself draws no random numbers.
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            sparsity_set: vec![1, 2, 3, 4],
            max_paths: 512,
            block_size: 8,
            block_size_bounds: (1, 32),
            lambda_grid: vec![1e-5, 1e-4, 1e-3, 1e-2, 1e-1],
            patience: 3,
            min_improvement: 1e-4,
            final_resweep: true,
            seed: 42,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.sparsity_set.is_empty() || self.sparsity_set.contains(&0) {
            return bad(format!(
                "sparsity set must be non-empty positive sizes, got {:?}",
                self.sparsity_set
            ));
        }
        let mut sorted = self.sparsity_set.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.sparsity_set.len() {
            return bad(format!("sparsity set has duplicates: {:?}", self.sparsity_set));
        }
        if self.max_paths == 0 {
            return bad("max_paths must be at least 1".into());
        }
        let (lo, hi) = self.block_size_bounds;
        if lo == 0 || lo > hi {
            return bad(format!("invalid block size bounds [{lo}, {hi}]"));
        }
        if !(lo..=hi).contains(&self.block_size) {
            return bad(format!(
                "block size {} outside bounds [{lo}, {hi}]",
                self.block_size
            ));
        }
        if self.lambda_grid.is_empty() {
            return bad("lambda grid is empty".into());
        }
        if self
            .lambda_grid
            .iter()
            .any(|l| !(l.is_finite() && *l > 0.0))
        {
            return bad(format!(
                "lambda grid values must be finite and positive: {:?}",
                self.lambda_grid
            ));
        }
        if self.lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!(
                "lambda grid must be strictly ascending: {:?}",
                self.lambda_grid
            ));
        }
        if !(self.min_improvement.is_finite() && self.min_improvement >= 0.0) {
            return bad(format!(
                "min_improvement must be finite and non-negative, got {}",
                self.min_improvement
            ));
        }
        if self.patience == 0 {
            return bad("patience must be at least 1".into());
        }
        Ok(())
    }
}

/// Per-k candidate source: harmonic-ladder continuations of accepted rays
/// first, then fresh candidates in total-order sequence.
///
/// A block that loses to another support size stays pending and is offered
/// again (topped up to the current block size). An iteration that accepts
/// nothing consumes every pending block, so no candidate is offered again.
#[derive(Debug, Clone)]
pub struct Frontier {
    lanes: Vec<Lane>,
    proposed: HashSet<FrequencyVector>,
}

#[derive(Debug, Clone)]
struct Lane {
    stream: CandidateStream,
    ladder: Vec<FrequencyVector>,
    fresh: Vec<FrequencyVector>,
}

impl Frontier {
    pub fn new(dim: usize, sparsity_set: &[usize], importance_order: Option<&[usize]>) -> Result<Self> {
        let lanes = sparsity_set
            .iter()
            .map(|&k| {
                Ok(Lane {
                    stream: CandidateStream::new(dim, k, importance_order)?,
                    ladder: Vec::new(),
                    fresh: Vec::new(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Frontier {
            lanes,
            proposed: HashSet::new(),
        })
    }

    /// Next block for every k, in sparsity-set order. Each block holds at most
    /// `budget` paths: ladder candidates, then up to `block_size` fresh ones.
    pub fn next_blocks(
        &mut self,
        dictionary: &[FrequencyVector],
        block_size: usize,
        budget: usize,
    ) -> Result<Vec<(usize, Vec<FrequencyVector>)>> {
        let in_dict: HashSet<&FrequencyVector> = dictionary.iter().collect();
        let rays = group_into_rays(dictionary)?;
        let mut out = Vec::with_capacity(self.lanes.len());
        for lane in &mut self.lanes {
            let k = lane.stream.sparsity();
            for ray in rays.iter().filter(|r| r.direction().sparsity() == k) {
                let next = ray.direction().scaled(ray.highest() + 1);
                if !in_dict.contains(&next) && self.proposed.insert(next.clone()) {
                    lane.ladder.push(next);
                }
            }
            while lane.fresh.len() < block_size {
                let Some(m) = lane.stream.next() else { break };
                if !in_dict.contains(&m) && self.proposed.insert(m.clone()) {
                    lane.fresh.push(m);
                }
            }
            let fresh = &lane.fresh[..lane.fresh.len().min(block_size)];
            let block: Vec<FrequencyVector> =
                lane.ladder.iter().chain(fresh).take(budget).cloned().collect();
            out.push((k, block));
        }
        Ok(out)
    }

    /// Records the outcome of the blocks last returned: `Some(k)` when the
    /// block for support size `k` was appended, `None` when none was.
    pub fn commit(&mut self, accepted: Option<usize>) {
        for lane in &mut self.lanes {
            if accepted.is_none() || accepted == Some(lane.stream.sparsity()) {
                lane.ladder.clear();
                lane.fresh.clear();
            }
        }
    }
}

/// Adaptive block size: doubles after two consecutive strong accepts,
/// halves after any reject.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSizer {
    current: usize,
    bounds: (usize, usize),
    strong_streak: usize,
}

impl BlockSizer {
    pub fn new(initial: usize, bounds: (usize, usize)) -> Self {
        BlockSizer {
            current: initial.clamp(bounds.0, bounds.1),
            bounds,
            strong_streak: 0,
        }
    }

    pub fn current(&self) -> usize {
        self.current
    }

    /// Updates the size after an iteration. `improvement` is `None` for a
    /// rejected block.
    pub fn record(&mut self, improvement: Option<f64>, min_improvement: f64) -> usize {
        match improvement {
            None => {
                self.strong_streak = 0;
                self.current = (self.current / 2).max(self.bounds.0);
            }
            Some(d) if d >= 10.0 * min_improvement => {
                self.strong_streak += 1;
                if self.strong_streak == 2 {
                    self.strong_streak = 0;
                    self.current = (self.current * 2).min(self.bounds.1);
                }
            }
            Some(_) => self.strong_streak = 0,
        }
        self.current
    }
}

/// Index of the best score, ties going to the larger penalty.
/// `scores` are `(lambda, score)` pairs in any order.
pub fn select_lambda(scores: &[(f64, f64)]) -> Option<f64> {
    scores
        .iter()
        .copied()
        .reduce(|best, cur| {
            if cur.1 > best.1 || (cur.1 == best.1 && cur.0 > best.0) {
                cur
            } else {
                best
            }
        })
        .map(|(l, _)| l)
}

/// Features ranked by descending |Pearson correlation| between the angle
/// column and the centered target; ties keep index order.
pub fn importance_order(theta: &AngularMatrix, y_centered: &[f64]) -> Vec<usize> {
    let n = theta.rows() as f64;
    let y_sq: f64 = y_centered.iter().map(|v| v * v).sum();
    let score: Vec<f64> = (0..theta.cols())
        .map(|j| {
            let col = theta.values().column(j);
            let mean = col.iter().sum::<f64>() / n;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (x, y) in col.iter().zip(y_centered) {
                sxy += (x - mean) * y;
                sxx += (x - mean) * (x - mean);
            }
            if sxx > 0.0 && y_sq > 0.0 {
                (sxy / (sxx * y_sq).sqrt()).abs()
            } else {
                0.0
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..theta.cols()).collect();
    order.sort_by(|&a, &b| score[b].total_cmp(&score[a]).then(a.cmp(&b)));
    order
}

/// Validation features of the current dictionary, stored column by column.
struct ValCache {
    columns: Vec<Vec<f64>>,
}

impl ValCache {
    fn score(
        &self,
        extra: &Matrix,
        sol: &RidgeSolution,
        y_val: &[f64],
        target_mean: f64,
    ) -> Result<f64> {
        let q_old = self.columns.len();
        let mut pred = vec![target_mean + sol.intercept(); y_val.len()];
        for (col, a) in self.columns.iter().zip(sol.amplitudes()) {
            for (p, v) in pred.iter_mut().zip(col) {
                *p += a * v;
            }
        }
        let tail = &sol.amplitudes()[q_old..];
        for (i, p) in pred.iter_mut().enumerate() {
            *p += extra.row(i).iter().zip(tail).map(|(v, a)| v * a).sum::<f64>();
        }
        metrics::r2(y_val, &pred)
    }

    fn push(&mut self, block: &Matrix) {
        for j in 0..block.cols() {
            self.columns.push(block.column(j));
        }
    }
}

struct Trial {
    k: usize,
    /// Total order L of the block's first path.
    lead_order: u32,
    system: GramSystem,
    val_features: Matrix,
    train_features: Matrix,
    /// One `(solution, validation R²)` per penalty tried.
    solutions: Vec<(RidgeSolution, f64)>,
}

fn append_columns(base: &Matrix, extra: &Matrix) -> Matrix {
    let (n, a, b) = (base.rows(), base.cols(), extra.cols());
    let mut out = Matrix::zeros(n, a + b);
    for i in 0..n {
        let row = out.row_mut(i);
        row[..a].copy_from_slice(base.row(i));
        row[a..].copy_from_slice(extra.row(i));
    }
    out
}

fn zero_variance(y: &[f64]) -> bool {
    y.iter().all(|v| *v == y[0])
}

/// Fits a spectral-path model on raw training data, selecting paths and the
/// penalty on the validation split.
pub fn fit(
    x_train: &Matrix,
    y_train: &[f64],
    x_val: &Matrix,
    y_val: &[f64],
    config: &FitConfig,
) -> Result<SpectralModel> {
    config.validate()?;
    if x_train.cols() != x_val.cols() {
        return Err(Error::Config(format!(
            "training data has {} features, validation data has {}",
            x_train.cols(),
            x_val.cols()
        )));
    }
    if x_train.rows() != y_train.len() || x_val.rows() != y_val.len() {
        return Err(Error::Config("feature and target row counts differ".into()));
    }
    if x_train.rows() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 training rows, got {}",
            x_train.rows()
        )));
    }
    if y_val.is_empty() {
        return Err(Error::Config("validation split is empty".into()));
    }
    let d = x_train.cols();
    if let Some(k) = config.sparsity_set.iter().find(|&&k| k > d) {
        warn!("support size {k} exceeds the {d} available features; its blocks stay empty");
    }

    let mut scaling = fit_scaler(x_train)?;
    let (yc, target_mean) = center_target(y_train)?;
    scaling.target_mean = target_mean;
    let theta_tr = transform_to_angles(x_train, &scaling)?;
    let theta_val = transform_to_angles(x_val, &scaling)?;
    crate::preprocessing::check_finite(&Matrix::from_vec(y_val.len(), 1, y_val.to_vec())?)?;

    let lambda_max = *config.lambda_grid.last().expect("validated non-empty");
    let mut gram = GramSystem::from_data(&theta_tr, &yc, Vec::new())?;

    if zero_variance(&yc) || zero_variance(y_val) {
        warn!("constant training or validation target; returning an intercept-only model");
        let sol = gram.solve_ridge(lambda_max)?;
        return SpectralModel::new(Vec::new(), Vec::new(), sol.intercept(), scaling, lambda_max);
    }

    let order = importance_order(&theta_tr, &yc);
    let mut frontier = Frontier::new(d, &config.sparsity_set, Some(&order))?;
    let mut sizer = BlockSizer::new(config.block_size, config.block_size_bounds);
    let mut train_cache = Matrix::zeros(theta_tr.rows(), 0);
    let mut val_cache = ValCache { columns: Vec::new() };
    let empty_val = Matrix::zeros(y_val.len(), 0);

    let mut lambda_star: Option<f64> = None;
    let mut current: Option<(RidgeSolution, f64)> = None;
    let mut strikes = 0;
    let mut trace = Vec::new();
    let mut iteration = 0;

    while gram.num_paths() < config.max_paths && strikes < config.patience {
        iteration += 1;
        let block_size = sizer.current();
        let budget = config.max_paths - gram.num_paths();
        let blocks = frontier.next_blocks(gram.paths(), block_size, budget)?;
        if blocks.iter().all(|(_, b)| b.is_empty()) {
            debug!("candidate frontier exhausted after {} iterations", iteration - 1);
            break;
        }
        let lambdas: Vec<f64> = match lambda_star {
            Some(l) => vec![l],
            None => config.lambda_grid.clone(),
        };
        let trials: Vec<Trial> = blocks
            .into_par_iter()
            .filter(|(_, b)| !b.is_empty())
            .map(|(k, block)| {
                let train_features = evaluate_block(&theta_tr, &block)?.values().clone();
                let val_features = evaluate_block(&theta_val, &block)?.values().clone();
                let system = gram.augment_cached(&theta_tr, &yc, &block, &train_cache)?;
                let solutions = lambdas
                    .iter()
                    .map(|&l| {
                        let sol = system.solve_ridge(l)?;
                        let score = val_cache.score(&val_features, &sol, y_val, target_mean)?;
                        Ok((sol, score))
                    })
                    .collect::<Result<_>>()?;
                Ok(Trial {
                    lead_order: block[0].total_order(),
                    k,
                    system,
                    val_features,
                    train_features,
                    solutions,
                })
            })
            .collect::<Result<_>>()?;

        let lam_idx = match lambda_star {
            Some(_) => 0,
            None => {
                let per_lambda: Vec<(f64, f64)> = lambdas
                    .iter()
                    .enumerate()
                    .map(|(li, &l)| {
                        let best = trials
                            .iter()
                            .map(|t| t.solutions[li].1)
                            .fold(f64::NEG_INFINITY, f64::max);
                        (l, best)
                    })
                    .collect();
                let l = select_lambda(&per_lambda).expect("grid is non-empty");
                lambda_star = Some(l);
                debug!("selected lambda {l:e} from {per_lambda:?}");
                lambdas.iter().position(|&x| x == l).expect("selected from grid")
            }
        };
        let lambda = lambda_star.expect("set above");
        if current.is_none() {
            let sol = gram.solve_ridge(lambda)?;
            let score = val_cache.score(&empty_val, &sol, y_val, target_mean)?;
            current = Some((sol, score));
        }
        let current_score = current.as_ref().expect("set above").1;

        // ties go to the block whose lead path has the smaller L, then smaller k
        let tie_key = |t: &Trial| (t.lead_order, t.k);
        let best = trials.into_iter().reduce(|a, b| {
            let (sa, sb) = (a.solutions[lam_idx].1, b.solutions[lam_idx].1);
            if sb > sa || (sb == sa && tie_key(&b) < tie_key(&a)) {
                b
            } else {
                a
            }
        });
        let Some(mut best) = best else { break };
        let (sol, score) = best.solutions.swap_remove(lam_idx);
        let improvement = score - current_score;
        let accepted = improvement >= config.min_improvement;
        let mut paths_added = 0;
        frontier.commit(accepted.then_some(best.k));
        if accepted {
            paths_added = best.system.num_paths() - gram.num_paths();
            gram = best.system;
            train_cache = append_columns(&train_cache, &best.train_features);
            val_cache.push(&best.val_features);
            current = Some((sol, score));
            strikes = 0;
        } else {
            strikes += 1;
        }
        sizer.record(accepted.then_some(improvement), config.min_improvement);
        let (cur_sol, cur_score) = current.as_ref().expect("set above");
        debug!(
            "iteration {iteration}: k={} block={block_size} {} val R2 {cur_score:.6} (delta {improvement:+.2e}), {} paths",
            best.k,
            if accepted { "accepted" } else { "rejected" },
            gram.num_paths()
        );
        trace.push(TraceRecord {
            iteration,
            accepted,
            k: best.k,
            block_size,
            paths_added,
            n_paths: gram.num_paths(),
            train_r2: gram.train_r2(&cur_sol.beta),
            val_r2: *cur_score,
            lambda,
        });
    }

    let mut lambda_final = lambda_star.unwrap_or(lambda_max);
    let mut final_sol = gram.solve_ridge(lambda_final)?;
    if gram.num_paths() == 0 {
        warn!("no candidate improved on the intercept; returning an intercept-only model");
    } else if config.final_resweep {
        let val_full = Matrix::zeros(y_val.len(), 0);
        let mut scored = Vec::with_capacity(config.lambda_grid.len());
        for &l in &config.lambda_grid {
            let sol = gram.solve_ridge(l)?;
            let s = val_cache.score(&val_full, &sol, y_val, target_mean)?;
            scored.push((l, s, sol));
        }
        let pairs: Vec<(f64, f64)> = scored.iter().map(|(l, s, _)| (*l, *s)).collect();
        lambda_final = select_lambda(&pairs).expect("grid is non-empty");
        final_sol = scored
            .into_iter()
            .find(|(l, _, _)| *l == lambda_final)
            .expect("selected from grid")
            .2;
    }

    let mut model = SpectralModel::new(
        gram.paths().to_vec(),
        final_sol.amplitudes().to_vec(),
        final_sol.intercept(),
        scaling,
        lambda_final,
    )?;
    model.fit_trace = trace;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::predict;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fv(d: &[i32]) -> FrequencyVector {
        FrequencyVector::from_dense(d)
    }

    #[test]
    fn fresh_frontier_follows_enumeration_order() {
        let mut f = Frontier::new(2, &[1], None).unwrap();
        let blocks = f.next_blocks(&[], 4, 512).unwrap();
        assert_eq!(
            blocks,
            vec![(1, vec![fv(&[1, 0]), fv(&[0, 1]), fv(&[2, 0]), fv(&[0, 2])])]
        );
        // a block that lost to another k is offered again
        assert_eq!(f.next_blocks(&[], 4, 512).unwrap(), blocks);
        f.commit(Some(2));
        assert_eq!(f.next_blocks(&[], 4, 512).unwrap(), blocks);
        // after a rejected iteration the candidates never come back
        f.commit(None);
        let next = f.next_blocks(&[], 2, 512).unwrap();
        assert_eq!(next, vec![(1, vec![fv(&[3, 0]), fv(&[0, 3])])]);
    }

    #[test]
    fn ladder_candidate_comes_first() {
        let mut f = Frontier::new(2, &[2], None).unwrap();
        let first = f.next_blocks(&[], 1, 512).unwrap();
        assert_eq!(first[0].1, vec![fv(&[1, 1])]);
        f.commit(Some(2));
        let second = f.next_blocks(&[fv(&[1, 1])], 2, 512).unwrap();
        assert_eq!(second[0].1, vec![fv(&[2, 2]), fv(&[1, -1]), fv(&[1, 2])]);
        // the ladder step is proposed only once
        f.commit(None);
        let third = f.next_blocks(&[fv(&[1, 1])], 1, 512).unwrap();
        assert_eq!(third[0].1, vec![fv(&[1, -2])]);
    }

    #[test]
    fn frontier_skips_dictionary_and_respects_budget() {
        let mut f = Frontier::new(3, &[1, 5], None).unwrap();
        let blocks = f.next_blocks(&[fv(&[0, 1, 0])], 4, 3).unwrap();
        assert_eq!(blocks[0].1, vec![fv(&[0, 2, 0]), fv(&[1, 0, 0]), fv(&[0, 0, 1])]);
        assert_eq!(blocks[1], (5, vec![]));
    }

    #[test]
    fn block_size_rules() {
        let mut s = BlockSizer::new(8, (1, 32));
        s.record(Some(1e-3), 1e-4);
        assert_eq!(s.record(Some(1e-3), 1e-4), 16);
        let mut s = BlockSizer::new(8, (1, 32));
        assert_eq!(s.record(None, 1e-4), 4);
        let mut s = BlockSizer::new(32, (1, 32));
        s.record(Some(1.0), 1e-4);
        assert_eq!(s.record(Some(1.0), 1e-4), 32);
        // a weak accept breaks the streak
        let mut s = BlockSizer::new(8, (1, 32));
        s.record(Some(1.0), 1e-4);
        s.record(Some(2e-4), 1e-4);
        assert_eq!(s.record(Some(1.0), 1e-4), 8);
        let mut s = BlockSizer::new(1, (1, 32));
        assert_eq!(s.record(None, 1e-4), 1);
    }

    #[test]
    fn lambda_selection() {
        assert_eq!(select_lambda(&[(1e-5, 0.8), (1e-3, 0.85), (1e-1, 0.84)]), Some(1e-3));
        assert_eq!(select_lambda(&[(1e-5, 0.5), (1e-3, 0.5), (1e-1, 0.5)]), Some(1e-1));
        assert_eq!(select_lambda(&[]), None);
    }

    #[test]
    fn config_validation() {
        assert!(FitConfig::default().validate().is_ok());
        let bad = [
            FitConfig { max_paths: 0, ..Default::default() },
            FitConfig { lambda_grid: vec![], ..Default::default() },
            FitConfig { lambda_grid: vec![1e-1, 1e-2], ..Default::default() },
            FitConfig { lambda_grid: vec![-1.0], ..Default::default() },
            FitConfig { sparsity_set: vec![], ..Default::default() },
            FitConfig { sparsity_set: vec![0, 1], ..Default::default() },
            FitConfig { block_size: 64, ..Default::default() },
            FitConfig { patience: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
    }

    fn uniform(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Matrix {
        let data = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        Matrix::from_vec(n, d, data).unwrap()
    }

    #[test]
    fn constant_target_gives_intercept_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = uniform(50, 3, &mut rng);
        let model = fit(&x, &[4.0; 50], &x, &[4.0; 50], &FitConfig::default()).unwrap();
        assert_eq!(model.num_paths(), 0);
        let p = model.predict_raw(&x).unwrap();
        assert!(p.iter().all(|v| (v - 4.0).abs() < 1e-12));
    }

    fn synthetic(n: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = uniform(n, 2, &mut rng);
        // generate from the model family in the fitted angular coordinates
        let scaling = fit_scaler(&x).unwrap();
        let theta = transform_to_angles(&x, &scaling).unwrap();
        let y = (0..n)
            .map(|i| (2.0 * theta.row(i)[0] - theta.row(i)[1]).cos())
            .collect();
        (x, y)
    }

    #[test]
    fn recovers_a_single_directional_harmonic() {
        let (x, y) = synthetic(2000, 7);
        let tr: Vec<usize> = (0..2000).collect();
        // same rows for train and validation keep the scaler identical
        let model = fit(&x, &y, &x.select_rows(&tr), &y, &FitConfig::default()).unwrap();
        assert!(model.paths.contains(&fv(&[2, -1])), "{:?}", model.paths);
        let pred = model.predict_raw(&x).unwrap();
        assert!(metrics::r2(&y, &pred).unwrap() >= 0.999);
        // without noise the penalty only hurts
        assert!(model.lambda_star <= 1e-4, "lambda* = {}", model.lambda_star);
    }

    #[test]
    fn fit_is_deterministic_and_respects_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = uniform(400, 3, &mut rng);
        let y: Vec<f64> = (0..400)
            .map(|i| {
                let r = x.row(i);
                r[0].sin() * r[1] + 0.3 * r[2] * r[2] + 0.05 * rng.random_range(-1.0..1.0)
            })
            .collect();
        let (xt, yt) = (x.select_rows(&(0..300).collect::<Vec<_>>()), y[..300].to_vec());
        let (xv, yv) = (x.select_rows(&(300..400).collect::<Vec<_>>()), y[300..].to_vec());
        let cfg = FitConfig {
            max_paths: 20,
            ..Default::default()
        };
        let a = fit(&xt, &yt, &xv, &yv, &cfg).unwrap();
        let b = fit(&xt, &yt, &xv, &yv, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.num_paths() <= 20 && a.num_paths() > 0);
        assert!(a.paths.iter().all(|m| m.is_canonical()));
        // accepted validation scores never go down
        let accepted: Vec<f64> = a.fit_trace.iter().filter(|t| t.accepted).map(|t| t.val_r2).collect();
        assert!(accepted.windows(2).all(|w| w[1] >= w[0] - cfg.min_improvement));
        // early stop happens right after `patience` consecutive rejections
        let tail = a.fit_trace.iter().rev().take_while(|t| !t.accepted).count();
        assert!(tail == cfg.patience || a.num_paths() == 20, "tail {tail}");
        let theta = transform_to_angles(&xt, &a.scaling).unwrap();
        assert_eq!(predict(&a, &theta).unwrap(), a.predict_raw(&xt).unwrap());
    }

    #[test]
    fn penalized_objective_decreases_over_accepted_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = uniform(300, 3, &mut rng);
        let y: Vec<f64> = (0..300).map(|i| x.row(i)[0] * x.row(i)[1] + x.row(i)[2].exp()).collect();
        let cfg = FitConfig {
            final_resweep: false,
            ..Default::default()
        };
        let model = fit(&x, &y, &x, &y, &cfg).unwrap();
        let scaling = fit_scaler(&x).unwrap();
        let theta = transform_to_angles(&x, &scaling).unwrap();
        let (yc, _) = center_target(&y).unwrap();
        let mut q = 0;
        let mut last = f64::INFINITY;
        for t in model.fit_trace.iter().filter(|t| t.accepted) {
            q += t.paths_added;
            let sys = GramSystem::from_data(&theta, &yc, model.paths[..q].to_vec()).unwrap();
            let sol = sys.solve_ridge(model.lambda_star).unwrap();
            let obj = sys.penalized_objective(&sol.beta, model.lambda_star);
            assert!(obj <= last * (1.0 + 1e-12), "{obj} > {last}");
            last = obj;
        }
    }

    #[test]
    fn large_sparsity_is_empty_not_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = uniform(60, 2, &mut rng);
        let y: Vec<f64> = (0..60).map(|i| x.row(i)[0]).collect();
        let cfg = FitConfig {
            sparsity_set: vec![3],
            ..Default::default()
        };
        let model = fit(&x, &y, &x, &y, &cfg).unwrap();
        assert_eq!(model.num_paths(), 0);
    }
}
