//! Spectral paths: sparse integer frequency vectors, their canonical form,
//! primitive-ray decomposition and the structured candidate enumeration.
//!
//! A path `m` defines the feature `cos(m . theta)`. Because cosine is even,
//! `m` and `-m` give the same feature; the canonical representative has a
//! positive coefficient on its smallest support index.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sparse signed integer vector in `Z^D`, stored as sorted support + coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FrequencyVector {
    support: Vec<usize>,
    coeffs: Vec<i32>,
    dim: usize,
}

impl FrequencyVector {
    pub fn new(dim: usize, support: Vec<usize>, coeffs: Vec<i32>) -> Result<Self> {
        if support.len() != coeffs.len() {
            return Err(Error::InvalidPath(format!(
                "support has {} entries but coeffs has {}",
                support.len(),
                coeffs.len()
            )));
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPath(format!(
                "support {support:?} is not strictly increasing"
            )));
        }
        if let Some(&j) = support.iter().find(|&&j| j >= dim) {
            return Err(Error::InvalidPath(format!(
                "support index {j} out of range for dimension {dim}"
            )));
        }
        if coeffs.contains(&0) {
            return Err(Error::InvalidPath(format!(
                "zero coefficient in {coeffs:?}"
            )));
        }
        Ok(FrequencyVector {
            support,
            coeffs,
            dim,
        })
    }

    /// Builds from a dense vector, dropping zero entries.
    pub fn from_dense(dense: &[i32]) -> Self {
        let (support, coeffs) = dense
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(j, &c)| (j, c))
            .unzip();
        FrequencyVector {
            support,
            coeffs,
            dim: dense.len(),
        }
    }

    pub fn to_dense(&self) -> Vec<i32> {
        let mut out = vec![0; self.dim];
        for (&j, &c) in self.support.iter().zip(&self.coeffs) {
            out[j] = c;
        }
        out
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// `||m||_0`
    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    /// `||m||_1`
    pub fn total_order(&self) -> u32 {
        self.coeffs.iter().map(|c| c.unsigned_abs()).sum()
    }

    /// Coefficient on feature `j` (zero off the support).
    pub fn coeff(&self, j: usize) -> i32 {
        self.support
            .binary_search(&j)
            .map_or(0, |pos| self.coeffs[pos])
    }

    pub fn is_canonical(&self) -> bool {
        self.coeffs.first().is_some_and(|&c| c > 0)
    }

    pub fn negated(&self) -> Self {
        FrequencyVector {
            support: self.support.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            dim: self.dim,
        }
    }

    pub fn scaled(&self, r: u32) -> Self {
        FrequencyVector {
            support: self.support.clone(),
            coeffs: self.coeffs.iter().map(|&c| c * r as i32).collect(),
            dim: self.dim,
        }
    }

    /// Phase `m . theta` over the support only.
    #[inline]
    pub fn phase(&self, theta: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coeffs)
            .map(|(&j, &c)| c as f64 * theta[j])
            .sum()
    }
}

impl fmt::Display for FrequencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dense = self.to_dense();
        write!(f, "(")?;
        for (i, c) in dense.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// JSON shape of a path inside a model file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathRecord {
    pub support: Vec<usize>,
    pub coeffs: Vec<i32>,
}

impl From<&FrequencyVector> for PathRecord {
    fn from(m: &FrequencyVector) -> Self {
        PathRecord {
            support: m.support.clone(),
            coeffs: m.coeffs.clone(),
        }
    }
}

impl PathRecord {
    pub fn into_path(self, dim: usize) -> Result<FrequencyVector> {
        FrequencyVector::new(dim, self.support, self.coeffs)
    }
}

/// Returns whichever of `m`, `-m` has a positive leading coefficient.
pub fn canonicalize(m: &FrequencyVector) -> Result<FrequencyVector> {
    match m.coeffs.first() {
        None => Err(Error::InvalidPath(
            "empty support: the constant feature is the intercept, not a path".into(),
        )),
        Some(&c) if c > 0 => Ok(m.clone()),
        Some(_) => Ok(m.negated()),
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Splits `m = r * p` with `p` primitive (gcd of |coefficients| is 1).
pub fn primitive_decompose(m: &FrequencyVector) -> Result<(u32, FrequencyVector)> {
    if m.is_empty() {
        return Err(Error::InvalidPath("cannot decompose an empty path".into()));
    }
    let r = m
        .coeffs
        .iter()
        .fold(0, |g, c| gcd(g, c.unsigned_abs()));
    let p = FrequencyVector {
        support: m.support.clone(),
        coeffs: m.coeffs.iter().map(|c| c / r as i32).collect(),
        dim: m.dim,
    };
    Ok((r, p))
}

/// A primitive direction together with its active harmonic orders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimitiveRay {
    direction: FrequencyVector,
    harmonics: BTreeSet<u32>,
}

impl PrimitiveRay {
    pub fn new(direction: FrequencyVector, harmonics: BTreeSet<u32>) -> Result<Self> {
        let (r, _) = primitive_decompose(&direction)?;
        if r != 1 {
            return Err(Error::InvalidPath(format!(
                "direction {direction} is not primitive (gcd {r})"
            )));
        }
        if harmonics.is_empty() || harmonics.contains(&0) {
            return Err(Error::InvalidPath(
                "ray harmonics must be non-empty and positive".into(),
            ));
        }
        Ok(PrimitiveRay {
            direction,
            harmonics,
        })
    }

    pub fn direction(&self) -> &FrequencyVector {
        &self.direction
    }

    pub fn harmonics(&self) -> &BTreeSet<u32> {
        &self.harmonics
    }

    pub fn highest(&self) -> u32 {
        *self.harmonics.last().expect("ray has at least one harmonic")
    }

    pub fn paths(&self) -> impl Iterator<Item = FrequencyVector> + '_ {
        self.harmonics.iter().map(|&r| self.direction.scaled(r))
    }
}

/// Groups canonical paths into primitive rays, in order of first appearance.
pub fn group_into_rays(paths: &[FrequencyVector]) -> Result<Vec<PrimitiveRay>> {
    let mut rays: Vec<PrimitiveRay> = Vec::new();
    for m in paths {
        let (r, p) = primitive_decompose(&canonicalize(m)?)?;
        match rays.iter_mut().find(|ray| ray.direction == p) {
            Some(ray) => {
                ray.harmonics.insert(r);
            }
            None => rays.push(PrimitiveRay {
                direction: p,
                harmonics: BTreeSet::from([r]),
            }),
        }
    }
    Ok(rays)
}

/// All compositions of `total` into `parts` positive integers, lexicographic.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rem: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(rem);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in 1..=rem - (parts as u32 - 1) {
            prefix.push(first);
            rec(rem - first, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts >= 1 && total as usize >= parts {
        rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    }
    out
}

/// Advances a k-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for t in i + 1..k {
                c[t] = c[t - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Lazy generator of canonical candidates with fixed sparsity `k`, in
/// increasing total order `L`; within one `L` the order is lexicographic
/// in (support, composition, sign pattern).
///
/// Supports are k-subsets of the feature ranking (`order`); coefficient
/// magnitudes are assigned to the support in increasing index order and
/// every non-leading coefficient takes both signs, `+` first.
#[derive(Debug, Clone)]
pub struct CandidateStream {
    dim: usize,
    k: usize,
    order: Vec<usize>,
    level: u32,
    max_level: Option<u32>,
    comps: Vec<Vec<u32>>,
    subset: Vec<usize>,
    support: Vec<usize>,
    comp_idx: usize,
    sign_idx: u32,
    exhausted: bool,
}

impl CandidateStream {
    /// Unbounded stream starting at `L = k`.
    pub fn new(dim: usize, k: usize, importance_order: Option<&[usize]>) -> Result<Self> {
        Self::build(dim, k, k as u32, None, importance_order)
    }

    /// Stream restricted to a single total order `L`.
    pub fn single_level(
        dim: usize,
        k: usize,
        level: u32,
        importance_order: Option<&[usize]>,
    ) -> Result<Self> {
        Self::build(dim, k, level, Some(level), importance_order)
    }

    fn build(
        dim: usize,
        k: usize,
        level: u32,
        max_level: Option<u32>,
        importance_order: Option<&[usize]>,
    ) -> Result<Self> {
        let order = match importance_order {
            Some(o) => {
                let mut seen = vec![false; dim];
                if o.len() != dim || o.iter().any(|&j| j >= dim || std::mem::replace(&mut seen[j], true)) {
                    return Err(Error::Config(format!(
                        "importance order must be a permutation of 0..{dim}"
                    )));
                }
                o.to_vec()
            }
            None => (0..dim).collect(),
        };
        let mut s = CandidateStream {
            dim,
            k,
            order,
            level: level.max(k as u32),
            max_level,
            comps: Vec::new(),
            subset: (0..k).collect(),
            support: Vec::new(),
            comp_idx: 0,
            sign_idx: 0,
            exhausted: k == 0 || k > dim,
        };
        if max_level.is_some_and(|m| m < s.level) {
            s.exhausted = true;
        }
        if !s.exhausted {
            s.comps = compositions(s.level, k);
            s.refresh_support();
        }
        Ok(s)
    }

    pub fn sparsity(&self) -> usize {
        self.k
    }

    /// Total order of the next candidate to be produced.
    pub fn current_level(&self) -> Option<u32> {
        (!self.exhausted).then_some(self.level)
    }

    fn refresh_support(&mut self) {
        self.support = self.subset.iter().map(|&p| self.order[p]).collect();
        self.support.sort_unstable();
    }

    fn advance(&mut self) {
        self.sign_idx += 1;
        if self.sign_idx < 1 << (self.k - 1) {
            return;
        }
        self.sign_idx = 0;
        self.comp_idx += 1;
        if self.comp_idx < self.comps.len() {
            return;
        }
        self.comp_idx = 0;
        if next_combination(&mut self.subset, self.dim) {
            self.refresh_support();
            return;
        }
        self.level += 1;
        if self.max_level.is_some_and(|m| self.level > m) {
            self.exhausted = true;
            return;
        }
        self.subset = (0..self.k).collect();
        self.refresh_support();
        self.comps = compositions(self.level, self.k);
    }
}

impl Iterator for CandidateStream {
    type Item = FrequencyVector;

    fn next(&mut self) -> Option<FrequencyVector> {
        if self.exhausted {
            return None;
        }
        let comp = &self.comps[self.comp_idx];
        let k = self.k;
        let coeffs = comp
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let negative = i > 0 && (self.sign_idx >> (k - 1 - i)) & 1 == 1;
                if negative {
                    -(c as i32)
                } else {
                    c as i32
                }
            })
            .collect();
        let out = FrequencyVector {
            support: self.support.clone(),
            coeffs,
            dim: self.dim,
        };
        self.advance();
        Some(out)
    }
}

/// Every canonical vector with `||m||_0 = k` and `||m||_1 = L`, each exactly once.
///
/// There are `C(D,k) * C(L-1,k-1) * 2^(k-1)` of them; `k > D` or `k > L`
/// yields nothing.
pub fn enumerate_candidates(
    dim: usize,
    k: usize,
    total_order: u32,
    importance_order: Option<&[usize]>,
) -> Result<Vec<FrequencyVector>> {
    if k == 0 || k > dim || k as u32 > total_order {
        return Ok(Vec::new());
    }
    Ok(CandidateStream::single_level(dim, k, total_order, importance_order)?.collect())
}

/// Result of rewriting a tensor-product cosine as directional harmonics.
#[derive(Debug, Clone, PartialEq)]
pub enum TensorExpansion {
    /// All degrees zero: the product is the constant 1, i.e. the intercept.
    Intercept,
    /// `prod_j cos(m_j theta_j) = sum_i w_i cos(m_i . theta)`.
    Harmonics(Vec<(f64, FrequencyVector)>),
}

/// Expands `prod_j cos(d_j theta_j)` over the nonzero degrees `d_j` into
/// `2^(k-1)` directional cosines of weight `2^-(k-1)`, one per sign pattern
/// with the first sign fixed to `+`.
pub fn tensor_expand(degrees: &[u32]) -> TensorExpansion {
    let support: Vec<usize> = (0..degrees.len()).filter(|&j| degrees[j] > 0).collect();
    let k = support.len();
    if k == 0 {
        return TensorExpansion::Intercept;
    }
    let weight = 0.5f64.powi(k as i32 - 1);
    let terms = (0u32..1 << (k - 1))
        .map(|signs| {
            let coeffs = support
                .iter()
                .enumerate()
                .map(|(i, &j)| {
                    let d = degrees[j] as i32;
                    if i > 0 && (signs >> (k - 1 - i)) & 1 == 1 {
                        -d
                    } else {
                        d
                    }
                })
                .collect();
            let m = FrequencyVector {
                support: support.clone(),
                coeffs,
                dim: degrees.len(),
            };
            (weight, m)
        })
        .collect();
    TensorExpansion::Harmonics(terms)
}
