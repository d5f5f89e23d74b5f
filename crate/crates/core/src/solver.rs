//! Streaming normal equations and closed-form ridge solves.
//!
//! `GramSystem` holds `G = Phi^T Phi` and `b = Phi^T y` for a design with a
//! leading intercept column of ones. Rows are processed in fixed-size chunks;
//! chunk partials are combined by a pairwise tree in chunk-index order, so the
//! floating-point result does not depend on how many worker threads ran.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::data_io::metrics;
use crate::error::{Error, Result};
use crate::features::{check_dims, fill_features, DesignBlock, ROW_CHUNK};
use crate::matrix::{dot, Matrix};
use crate::paths::{canonicalize, FrequencyVector};
use crate::preprocessing::AngularMatrix;

/// Relative size of the first diagonal jitter: `1e-10 * trace(G) / dim`.
const JITTER_SCALE: f64 = 1e-10;
/// Number of jittered retries, each ten times larger than the previous.
const JITTER_RETRIES: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct GramSystem {
    paths: Vec<FrequencyVector>,
    g: Matrix,
    b: Vec<f64>,
    n_rows: usize,
    y_sq_sum: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSolution {
    /// Intercept followed by one amplitude per path.
    pub beta: Vec<f64>,
    pub lambda: f64,
    pub jitter_used: f64,
}

impl RidgeSolution {
    pub fn intercept(&self) -> f64 {
        self.beta[0]
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.beta[1..]
    }

    /// Centered prediction for one row of path features.
    #[inline]
    pub fn predict_row(&self, features: &[f64]) -> f64 {
        self.beta[0] + dot(&self.beta[1..], features)
    }
}

/// Per-chunk accumulator for a full system; only the upper triangle is filled.
struct Partial {
    g: Matrix,
    b: Vec<f64>,
    n: usize,
    y_sq: f64,
}

impl Partial {
    fn zeros(p: usize) -> Self {
        Partial {
            g: Matrix::zeros(p, p),
            b: vec![0.0; p],
            n: 0,
            y_sq: 0.0,
        }
    }

    /// Adds one row `phi` (intercept first) with target `y`.
    #[inline]
    fn add_row(&mut self, phi: &[f64], y: f64) {
        let p = phi.len();
        for i in 0..p {
            let fi = phi[i];
            let gi = &mut self.g.row_mut(i)[i..];
            for (gij, fj) in gi.iter_mut().zip(&phi[i..]) {
                *gij += fi * fj;
            }
            self.b[i] += fi * y;
        }
        self.n += 1;
        self.y_sq += y * y;
    }

    fn merge(mut self, other: Partial) -> Partial {
        for (a, b) in self.g.as_mut_slice().iter_mut().zip(other.g.as_slice()) {
            *a += b;
        }
        for (a, b) in self.b.iter_mut().zip(&other.b) {
            *a += b;
        }
        self.n += other.n;
        self.y_sq += other.y_sq;
        self
    }
}

/// Combines partials pairwise, `((0+1)+(2+3))+...`, in index order.
fn tree_reduce<T>(mut items: Vec<T>, merge: impl Fn(T, T) -> T) -> Option<T> {
    while items.len() > 1 {
        let mut next = Vec::with_capacity(items.len().div_ceil(2));
        let mut it = items.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => merge(a, b),
                None => a,
            });
        }
        items = next;
    }
    items.pop()
}

fn mirror_upper(g: &mut Matrix) {
    for i in 0..g.rows() {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
}

fn check_targets(theta: &AngularMatrix, y: &[f64]) -> Result<()> {
    if theta.rows() != y.len() {
        return Err(Error::Config(format!(
            "{} angle rows but {} targets",
            theta.rows(),
            y.len()
        )));
    }
    Ok(())
}

impl GramSystem {
    /// Zero accumulators for an intercept plus `paths`.
    pub fn empty(paths: Vec<FrequencyVector>) -> Self {
        let p = paths.len() + 1;
        GramSystem {
            paths,
            g: Matrix::zeros(p, p),
            b: vec![0.0; p],
            n_rows: 0,
            y_sq_sum: 0.0,
        }
    }

    /// Accumulates the system over all rows in one streaming pass.
    pub fn from_data(
        theta: &AngularMatrix,
        y: &[f64],
        paths: Vec<FrequencyVector>,
    ) -> Result<Self> {
        check_targets(theta, y)?;
        check_dims(theta.cols(), &paths)?;
        let p = paths.len() + 1;
        let n = theta.rows();
        let partials: Vec<Partial> = (0..n.div_ceil(ROW_CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut part = Partial::zeros(p);
                let mut phi = vec![1.0; p];
                for i in c * ROW_CHUNK..((c + 1) * ROW_CHUNK).min(n) {
                    fill_features(theta.row(i), &paths, &mut phi[1..]);
                    part.add_row(&phi, y[i]);
                }
                part
            })
            .collect();
        let total = tree_reduce(partials, Partial::merge).unwrap_or_else(|| Partial::zeros(p));
        let mut g = total.g;
        mirror_upper(&mut g);
        Ok(GramSystem {
            paths,
            g,
            b: total.b,
            n_rows: total.n,
            y_sq_sum: total.y_sq,
        })
    }

    /// Size of the system, `1 + Q`.
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn paths(&self) -> &[FrequencyVector] {
        &self.paths
    }

    pub fn gram(&self) -> &Matrix {
        &self.g
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn y_sq_sum(&self) -> f64 {
        self.y_sq_sum
    }

    /// Adds a chunk of rows whose columns are this system's paths.
    pub fn accumulate(&mut self, block: &DesignBlock, y: &[f64]) -> Result<()> {
        if block.rows() != y.len() {
            return Err(Error::Config(format!(
                "block has {} rows but {} targets",
                block.rows(),
                y.len()
            )));
        }
        if block.paths() != self.paths.as_slice() {
            return Err(Error::Config(
                "block columns do not match the system's dictionary".into(),
            ));
        }
        let p = self.dim();
        let mut part = Partial::zeros(p);
        let mut phi = vec![1.0; p];
        for (i, &yi) in y.iter().enumerate() {
            phi[1..].copy_from_slice(block.row(i));
            part.add_row(&phi, yi);
        }
        mirror_upper(&mut part.g);
        for (a, b) in self.g.as_mut_slice().iter_mut().zip(part.g.as_slice()) {
            *a += b;
        }
        for (a, b) in self.b.iter_mut().zip(&part.b) {
            *a += b;
        }
        self.n_rows += part.n;
        self.y_sq_sum += part.y_sq;
        Ok(())
    }

    /// Trial system for `paths ++ new_paths`, reusing `G_old` and `b_old`.
    ///
    /// Only the cross block `C`, `G_new` and `b_new` are accumulated, in one
    /// pass over the same rows that built `self`. `self` is left untouched.
    pub fn augment(
        &self,
        theta: &AngularMatrix,
        y: &[f64],
        new_paths: &[FrequencyVector],
    ) -> Result<GramSystem> {
        self.augment_impl(theta, y, new_paths, None)
    }

    /// Same as [`augment`](Self::augment), reading the existing dictionary's
    /// features from `cached` (N×Q, aligned with `paths()`) instead of
    /// recomputing them.
    pub fn augment_cached(
        &self,
        theta: &AngularMatrix,
        y: &[f64],
        new_paths: &[FrequencyVector],
        cached: &Matrix,
    ) -> Result<GramSystem> {
        if cached.rows() != theta.rows() || cached.cols() != self.num_paths() {
            return Err(Error::Config(format!(
                "feature cache is {}x{}, expected {}x{}",
                cached.rows(),
                cached.cols(),
                theta.rows(),
                self.num_paths()
            )));
        }
        self.augment_impl(theta, y, new_paths, Some(cached))
    }

    fn augment_impl(
        &self,
        theta: &AngularMatrix,
        y: &[f64],
        new_paths: &[FrequencyVector],
        cached: Option<&Matrix>,
    ) -> Result<GramSystem> {
        check_targets(theta, y)?;
        check_dims(theta.cols(), new_paths)?;
        if theta.rows() != self.n_rows {
            return Err(Error::Config(format!(
                "system was accumulated over {} rows, augment called with {}",
                self.n_rows,
                theta.rows()
            )));
        }
        let mut seen: HashSet<FrequencyVector> = self
            .paths
            .iter()
            .map(canonicalize)
            .collect::<Result<_>>()?;
        for m in new_paths {
            if !seen.insert(canonicalize(m)?) {
                return Err(Error::InvalidCandidate(format!(
                    "path {m} is already in the dictionary"
                )));
            }
        }
        if new_paths.is_empty() {
            return Ok(self.clone());
        }

        let p_old = self.dim();
        let q_new = new_paths.len();
        let n = theta.rows();
        // cross rows p_old x q_new, then new-new upper block, then b_new
        struct Aug {
            cross: Matrix,
            g_new: Matrix,
            b_new: Vec<f64>,
        }
        let parts: Vec<Aug> = (0..n.div_ceil(ROW_CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut a = Aug {
                    cross: Matrix::zeros(p_old, q_new),
                    g_new: Matrix::zeros(q_new, q_new),
                    b_new: vec![0.0; q_new],
                };
                let mut phi_old = vec![1.0; p_old];
                let mut phi_new = vec![0.0; q_new];
                for i in c * ROW_CHUNK..((c + 1) * ROW_CHUNK).min(n) {
                    let row = theta.row(i);
                    match cached {
                        Some(m) => phi_old[1..].copy_from_slice(m.row(i)),
                        None => fill_features(row, &self.paths, &mut phi_old[1..]),
                    }
                    fill_features(row, new_paths, &mut phi_new);
                    for (r, &fo) in phi_old.iter().enumerate() {
                        for (cij, fnew) in a.cross.row_mut(r).iter_mut().zip(&phi_new) {
                            *cij += fo * fnew;
                        }
                    }
                    for s in 0..q_new {
                        let fs = phi_new[s];
                        for (gst, ft) in a.g_new.row_mut(s)[s..].iter_mut().zip(&phi_new[s..]) {
                            *gst += fs * ft;
                        }
                        a.b_new[s] += fs * y[i];
                    }
                }
                a
            })
            .collect();
        let merged = tree_reduce(parts, |mut a, b| {
            for (x, y) in a.cross.as_mut_slice().iter_mut().zip(b.cross.as_slice()) {
                *x += y;
            }
            for (x, y) in a.g_new.as_mut_slice().iter_mut().zip(b.g_new.as_slice()) {
                *x += y;
            }
            for (x, y) in a.b_new.iter_mut().zip(&b.b_new) {
                *x += y;
            }
            a
        })
        .expect("augment over a non-empty system has at least one chunk");

        let p = p_old + q_new;
        let mut g = Matrix::zeros(p, p);
        for i in 0..p_old {
            g.row_mut(i)[..p_old].copy_from_slice(self.g.row(i));
            g.row_mut(i)[p_old..].copy_from_slice(merged.cross.row(i));
        }
        for s in 0..q_new {
            for t in s..q_new {
                g[(p_old + s, p_old + t)] = merged.g_new[(s, t)];
            }
        }
        for i in p_old..p {
            for j in 0..i {
                g[(i, j)] = g[(j, i)];
            }
        }
        let mut b = self.b.clone();
        b.extend_from_slice(&merged.b_new);
        let mut paths = self.paths.clone();
        paths.extend_from_slice(new_paths);
        Ok(GramSystem {
            paths,
            g,
            b,
            n_rows: self.n_rows,
            y_sq_sum: self.y_sq_sum,
        })
    }

    /// System restricted to the first `q` paths.
    pub fn leading(&self, q: usize) -> GramSystem {
        let q = q.min(self.num_paths());
        GramSystem {
            paths: self.paths[..q].to_vec(),
            g: self.g.leading_block(q + 1),
            b: self.b[..q + 1].to_vec(),
            n_rows: self.n_rows,
            y_sq_sum: self.y_sq_sum,
        }
    }

    /// Solves `(G + lambda I) beta = b`, intercept included in the penalty.
    pub fn solve_ridge(&self, lambda: f64) -> Result<RidgeSolution> {
        if self.n_rows == 0 {
            return Err(Error::Config("cannot solve an empty system".into()));
        }
        ridge_solve(&self.g, &self.b, lambda)
    }

    /// Residual sum of squares from Gram quantities.
    pub fn rss(&self, beta: &[f64]) -> f64 {
        let gb = self.g.matvec(beta);
        (self.y_sq_sum - 2.0 * dot(beta, &self.b) + dot(beta, &gb)).max(0.0)
    }

    pub fn penalized_objective(&self, beta: &[f64], lambda: f64) -> f64 {
        self.rss(beta) + lambda * dot(beta, beta)
    }

    /// Training R² of a solution, using centered targets.
    pub fn train_r2(&self, beta: &[f64]) -> f64 {
        if self.y_sq_sum > 0.0 {
            1.0 - self.rss(beta) / self.y_sq_sum
        } else {
            0.0
        }
    }
}

/// Solves `(G + lambda I) beta = b` for a symmetric positive semi-definite
/// `G`, retrying with a growing diagonal jitter if the factorization fails.
pub fn ridge_solve(g: &Matrix, b: &[f64], lambda: f64) -> Result<RidgeSolution> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Config(format!(
            "ridge penalty must be finite and non-negative, got {lambda}"
        )));
    }
    let p = g.rows();
    let base_jitter = JITTER_SCALE * g.trace() / p as f64;
    let mut jitter = 0.0;
    let mut last_pivot = (0, 0.0);
    for attempt in 0..=JITTER_RETRIES {
        if attempt > 0 {
            jitter = base_jitter * 10f64.powi(attempt as i32 - 1);
        }
        let mut a = g.clone();
        for i in 0..p {
            a[(i, i)] += lambda + jitter;
        }
        match cholesky_in_place(&mut a) {
            Ok(()) => {
                let beta = cholesky_solve(&a, b);
                if beta.iter().all(|v| v.is_finite()) {
                    return Ok(RidgeSolution {
                        beta,
                        lambda,
                        jitter_used: jitter,
                    });
                }
            }
            Err(pivot) => last_pivot = pivot,
        }
    }
    let diag: Vec<f64> = (0..p).map(|i| g[(i, i)]).collect();
    let dmax = diag.iter().cloned().fold(f64::MIN, f64::max);
    let dmin = diag.iter().cloned().fold(f64::MAX, f64::min);
    Err(Error::Numerical(format!(
        "Cholesky factorization of {p}x{p} ridge system failed (lambda {lambda:e}, \
         final jitter {jitter:e}); pivot {} = {:e}, diagonal range [{dmin:e}, {dmax:e}], trace {:e}",
        last_pivot.0,
        last_pivot.1,
        g.trace()
    )))
}

/// Lower Cholesky factor written into the lower triangle of `a`.
/// On failure returns the offending pivot index and value.
fn cholesky_in_place(a: &mut Matrix) -> std::result::Result<(), (usize, f64)> {
    let n = a.rows();
    for j in 0..n {
        let mut d = a[(j, j)];
        {
            let rj = &a.row(j)[..j];
            d -= dot(rj, rj);
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err((j, d));
        }
        let ljj = d.sqrt();
        a[(j, j)] = ljj;
        for i in j + 1..n {
            let s = {
                let (ri, rj) = (a.row(i), a.row(j));
                a[(i, j)] - dot(&ri[..j], &rj[..j])
            };
            a[(i, j)] = s / ljj;
        }
    }
    Ok(())
}

fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut z = b.to_vec();
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &z[..i]);
        z[i] = (z[i] - s) / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[(k, i)] * z[k];
        }
        z[i] = s / l[(i, i)];
    }
    z
}

/// Validation R² of a ridge solution, in de-centered target units.
pub fn validation_score(
    solution: &RidgeSolution,
    val_design: &DesignBlock,
    val_y: &[f64],
    target_mean: f64,
) -> Result<f64> {
    if val_design.rows() != val_y.len() {
        return Err(Error::Config(format!(
            "validation design has {} rows but {} targets",
            val_design.rows(),
            val_y.len()
        )));
    }
    if val_design.values().cols() + 1 != solution.beta.len() {
        return Err(Error::Config(format!(
            "validation design has {} columns, solution has {} amplitudes",
            val_design.values().cols(),
            solution.beta.len() - 1
        )));
    }
    let pred: Vec<f64> = (0..val_design.rows())
        .map(|i| target_mean + solution.predict_row(val_design.row(i)))
        .collect();
    metrics::r2(val_y, &pred)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::evaluate_block;
    use approx::assert_relative_eq;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn fv(d: &[i32]) -> FrequencyVector {
        FrequencyVector::from_dense(d)
    }

    fn data(n: usize, d: usize, seed: u64) -> (AngularMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = (0..n * d).map(|_| rng.random_range(0.0..PI)).collect();
        let theta = AngularMatrix::new(Matrix::from_vec(n, d, v).unwrap()).unwrap();
        let y = (0..n).map(|i| theta.row(i)[0].cos() + rng.random_range(-0.5..0.5)).collect();
        (theta, y)
    }

    fn system(g: &[[f64; 2]; 2], b: [f64; 2]) -> GramSystem {
        GramSystem {
            paths: vec![fv(&[1])],
            g: Matrix::from_rows(g).unwrap(),
            b: b.to_vec(),
            n_rows: 2,
            y_sq_sum: 0.0,
        }
    }

    #[test]
    fn diagonal_examples() {
        let s = system(&[[2.0, 0.0], [0.0, 2.0]], [2.0, 4.0]);
        for (lambda, want) in [(0.0, [1.0, 2.0]), (2.0, [0.5, 1.0])] {
            let beta = s.solve_ridge(lambda).unwrap().beta;
            for (a, b) in beta.iter().zip(want) {
                assert_relative_eq!(*a, b, max_relative = 1e-15);
            }
        }
        assert!(s.solve_ridge(-1.0).is_err());
        assert!(GramSystem::empty(vec![]).solve_ridge(1.0).is_err());
    }

    #[test]
    fn random_spd_matches_inverse_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::from_fn(9, 6, |_, _| rng.random_range(-1.0..1.0));
        let g = a.transpose() * &a;
        let b = DVector::from_fn(6, |_, _| rng.random_range(-1.0..1.0));
        let lambda = 0.01;
        let shifted = &g + DMatrix::identity(6, 6) * lambda;
        let oracle = shifted.pseudo_inverse(1e-14).unwrap() * &b;
        let sys = GramSystem {
            paths: (0..5)
                .map(|j| fv(&(0..5).map(|i| (i == j) as i32).collect::<Vec<_>>()))
                .collect(),
            g: Matrix::from_vec(6, 6, g.transpose().as_slice().to_vec()).unwrap(),
            b: b.as_slice().to_vec(),
            n_rows: 9,
            y_sq_sum: 1.0,
        };
        let sol = sys.solve_ridge(lambda).unwrap();
        for i in 0..6 {
            assert_relative_eq!(sol.beta[i], oracle[i], max_relative = 1e-8);
        }
        assert_eq!(sol.jitter_used, 0.0);
    }

    #[test]
    fn singular_system_uses_jitter() {
        // exactly collinear columns: G is rank one
        let s = system(&[[1.0, 1.0], [1.0, 1.0]], [1.0, 1.0]);
        let sol = s.solve_ridge(0.0).unwrap();
        assert!(sol.jitter_used > 0.0);
        assert!(sol.beta.iter().all(|v| v.is_finite()));
        let bad = system(&[[f64::NAN, 0.0], [0.0, 1.0]], [1.0, 1.0]);
        let err = bad.solve_ridge(0.0).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
        assert!(err.to_string().contains("pivot"));
    }

    #[test]
    fn intercept_only_system() {
        let (theta, y) = data(17, 2, 1);
        let s = GramSystem::from_data(&theta, &y, vec![]).unwrap();
        assert_eq!(s.gram().as_slice(), &[17.0]);
        assert_relative_eq!(s.rhs()[0], y.iter().sum::<f64>(), max_relative = 1e-14);
    }

    #[test]
    fn chunked_accumulation_matches_single_pass() {
        let (theta, y) = data(40, 3, 2);
        let paths = vec![fv(&[1, 0, 0]), fv(&[1, -1, 0]), fv(&[0, 2, 1])];
        let whole = GramSystem::from_data(&theta, &y, paths.clone()).unwrap();
        let mut two = GramSystem::empty(paths.clone());
        let mut ones = GramSystem::empty(paths.clone());
        let idx: Vec<usize> = (0..40).collect();
        for half in idx.chunks(20) {
            let block = evaluate_block(&theta.select_rows(half), &paths).unwrap();
            let yy: Vec<f64> = half.iter().map(|&i| y[i]).collect();
            two.accumulate(&block, &yy).unwrap();
        }
        for i in 0..40 {
            let block = evaluate_block(&theta.select_rows(&[i]), &paths).unwrap();
            ones.accumulate(&block, &[y[i]]).unwrap();
        }
        ones.accumulate(&evaluate_block(&theta.select_rows(&[]), &paths).unwrap(), &[])
            .unwrap();
        for other in [&two, &ones] {
            assert_eq!(other.n_rows(), 40);
            for (a, b) in whole.gram().as_slice().iter().zip(other.gram().as_slice()) {
                assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-12);
            }
            for (a, b) in whole.rhs().iter().zip(other.rhs()) {
                assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-12);
            }
            assert_relative_eq!(whole.y_sq_sum(), other.y_sq_sum(), max_relative = 1e-12);
        }
        let wrong = evaluate_block(&theta, &paths[..2]).unwrap();
        assert!(two.accumulate(&wrong, &y).is_err());
    }

    #[test]
    fn augment_matches_rebuild_and_rejects_duplicates() {
        let (theta, y) = data(300, 3, 4);
        let old = vec![fv(&[1, 0, 0]), fv(&[0, 1, -1])];
        let new = vec![fv(&[2, 0, 0]), fv(&[1, 1, 1])];
        let base = GramSystem::from_data(&theta, &y, old.clone()).unwrap();
        let trial = base.augment(&theta, &y, &new).unwrap();
        let rebuilt =
            GramSystem::from_data(&theta, &y, old.iter().chain(&new).cloned().collect()).unwrap();
        assert_eq!(trial.paths(), rebuilt.paths());
        for (a, b) in trial.gram().as_slice().iter().zip(rebuilt.gram().as_slice()) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-12);
        }
        let cache = evaluate_block(&theta, &old).unwrap();
        assert_eq!(
            base.augment_cached(&theta, &y, &new, cache.values()).unwrap(),
            trial
        );
        assert!(base.augment_cached(&theta, &y, &new, &Matrix::zeros(300, 1)).is_err());
        assert_eq!(base.augment(&theta, &y, &[]).unwrap(), base);
        assert!(matches!(
            base.augment(&theta, &y, &[fv(&[0, -1, 1])]),
            Err(Error::InvalidCandidate(_))
        ));
        assert!(matches!(
            base.augment(&theta, &y, &[fv(&[3, 0, 0]), fv(&[3, 0, 0])]),
            Err(Error::InvalidCandidate(_))
        ));
        assert_eq!(base.num_paths(), 2);
    }

    #[test]
    fn leading_block_equals_smaller_system() {
        let (theta, y) = data(100, 2, 5);
        let paths = vec![fv(&[1, 0]), fv(&[0, 1]), fv(&[1, 1])];
        let full = GramSystem::from_data(&theta, &y, paths.clone()).unwrap();
        let small = GramSystem::from_data(&theta, &y, paths[..2].to_vec()).unwrap();
        let lead = full.leading(2);
        for (a, b) in lead.gram().as_slice().iter().zip(small.gram().as_slice()) {
            assert_relative_eq!(a, b, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn gram_rss_matches_explicit_residuals() {
        let (theta, y) = data(120, 2, 6);
        let paths = vec![fv(&[1, 0]), fv(&[1, -2])];
        let s = GramSystem::from_data(&theta, &y, paths.clone()).unwrap();
        let sol = s.solve_ridge(1e-3).unwrap();
        let block = evaluate_block(&theta, &paths).unwrap();
        let rss: f64 = (0..120)
            .map(|i| (y[i] - sol.predict_row(block.row(i))).powi(2))
            .sum();
        assert_relative_eq!(s.rss(&sol.beta), rss, max_relative = 1e-9);
    }

    #[test]
    fn validation_score_examples() {
        let theta = AngularMatrix::new(Matrix::from_rows(&[[0.0], [PI / 2.0], [PI]]).unwrap()).unwrap();
        let block = evaluate_block(&theta, &[fv(&[1])]).unwrap();
        // cos column is (1, 0, -1); y = 2 + cos -> perfect fit with beta = (0, 1), mean 2
        let perfect = RidgeSolution { beta: vec![0.0, 1.0], lambda: 0.0, jitter_used: 0.0 };
        assert_eq!(validation_score(&perfect, &block, &[3.0, 2.0, 1.0], 2.0).unwrap(), 1.0);
        let flat = RidgeSolution { beta: vec![0.0, 0.0], lambda: 0.0, jitter_used: 0.0 };
        assert_eq!(validation_score(&flat, &block, &[3.0, 2.0, 1.0], 2.0).unwrap(), 0.0);
        assert!(matches!(
            validation_score(&flat, &block, &[1.0, 1.0, 1.0], 0.0),
            Err(Error::UndefinedMetric(_))
        ));
    }
}
