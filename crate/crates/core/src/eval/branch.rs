use crate::badmm::BadmmState;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::TransitionMatrix;
use crate::scalar::Scalar;
use crate::simulate::BranchLabels;

/// Singular values above this count toward the numerical rank.
pub const RANK_TOL: f64 = 1e-6;
/// Entries of a row-stochastic `B` above this count toward its support.
pub const SUPPORT_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq)]
pub struct BranchReport<T> {
    pub parent_accuracy: T,
    /// F1 of the "immigrant" class; 1 when there are neither true nor predicted immigrants.
    pub immigrant_f1: T,
    pub support_size: usize,
    pub numerical_rank: usize,
    pub n_events: usize,
    pub n_correct: usize,
    pub immigrant_tp: usize,
    pub immigrant_fp: usize,
    pub immigrant_fn: usize,
}

impl<T: Scalar> BranchReport<T> {
    fn from_counts(n_events: usize, n_correct: usize, tp: usize, fp: usize, fn_: usize, support: usize, rank: usize) -> Self {
        let parent_accuracy = if n_events == 0 { T::one() } else { T::lit(n_correct as f64 / n_events as f64) };
        let denom = 2 * tp + fp + fn_;
        let immigrant_f1 = if denom == 0 { T::one() } else { T::lit(2.0 * tp as f64 / denom as f64) };
        Self {
            parent_accuracy,
            immigrant_f1,
            support_size: support,
            numerical_rank: rank,
            n_events,
            n_correct,
            immigrant_tp: tp,
            immigrant_fp: fp,
            immigrant_fn: fn_,
        }
    }

    /// Pools per-sequence reports; support and rank add up as for the
    /// block-diagonal stacking of the matrices.
    pub fn pool(reports: &[Self]) -> Self {
        let sum = |f: fn(&Self) -> usize| reports.iter().map(f).sum::<usize>();
        Self::from_counts(
            sum(|r| r.n_events),
            sum(|r| r.n_correct),
            sum(|r| r.immigrant_tp),
            sum(|r| r.immigrant_fp),
            sum(|r| r.immigrant_fn),
            sum(|r| r.support_size),
            sum(|r| r.numerical_rank),
        )
    }

    pub fn tsv_header() -> &'static str {
        "parent_accuracy\timmigrant_f1\tsupport_size\tnumerical_rank\tn_events"
    }

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}",
            self.parent_accuracy, self.immigrant_f1, self.support_size, self.numerical_rank, self.n_events
        )
    }
}

/// Most likely cause of event `n`: `None` when the diagonal wins. Ties go to
/// the diagonal, then to the lowest column.
pub fn predicted_parent<T: Scalar>(m: &TransitionMatrix<T>, n: usize) -> Option<usize> {
    let row = m.support_row(n);
    let mut best = n;
    for (j, &v) in row[..n].iter().enumerate() {
        if v > row[best] {
            best = j;
        }
    }
    (best != n).then_some(best)
}

pub fn numerical_rank<T: Scalar>(m: &Matrix<T>) -> Result<usize> {
    let tol = T::lit(RANK_TOL);
    Ok(T::singular_values(m)?.into_iter().filter(|&s| s > tol).count())
}

/// Decodes parents by row argmax and scores them against ground truth.
/// Support size counts entries above [`SUPPORT_TOL`].
pub fn parent_recovery<T: Scalar>(m: &TransitionMatrix<T>, labels: &BranchLabels) -> Result<BranchReport<T>> {
    if m.n() != labels.len() {
        return Err(Error::shape("parent_recovery", labels.len(), m.n()));
    }
    let (mut correct, mut tp, mut fp, mut fn_) = (0, 0, 0, 0);
    for (n, truth) in labels.parents().iter().enumerate() {
        let pred = predicted_parent(m, n);
        if pred == *truth {
            correct += 1;
        }
        match (pred.is_none(), truth.is_none()) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => {}
        }
    }
    let tol = T::lit(SUPPORT_TOL);
    let support = m.as_matrix().as_slice().iter().filter(|&&x| x > tol).count();
    let rank = numerical_rank(m.as_matrix())?;
    Ok(BranchReport::from_counts(m.n(), correct, tp, fp, fn_, support, rank))
}

/// Expected parent accuracy of guessing uniformly among the `n + 1` candidates
/// of each event: `mean_n 1/(n + 1)`.
pub fn chance_parent_accuracy(sizes: &[usize]) -> f64 {
    let total: usize = sizes.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let hits: f64 = sizes.iter().map(|&n| (1..=n).map(|k| 1.0 / k as f64).sum::<f64>()).sum();
    hits / total as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructureStats {
    /// Nonzero entries of `X1`.
    pub support_size: usize,
    /// Singular values of `B` above [`RANK_TOL`].
    pub numerical_rank: usize,
}

pub fn structure_stats<T: Scalar>(state: &BadmmState<T>) -> Result<StructureStats> {
    Ok(StructureStats {
        support_size: state.x1.as_slice().iter().filter(|x| x.abs() > T::zero()).count(),
        numerical_rank: numerical_rank(state.b.as_matrix())?,
    })
}

/// Scores `1ᵀ B S`: the total weight every event of type `k` receives as a
/// cause (its own background weight included). Sorted by descending score,
/// ties by type index. Types `0..=max(type_of)` are all listed.
pub fn influence_ranking<T: Scalar>(b: &TransitionMatrix<T>, type_of: &[usize]) -> Result<Vec<(usize, T)>> {
    if type_of.len() != b.n() {
        return Err(Error::shape("influence_ranking", b.n(), type_of.len()));
    }
    let k = type_of.iter().max().map_or(0, |m| m + 1);
    let mut scores = vec![T::zero(); k];
    for n in 0..b.n() {
        for (&w, &c) in b.support_row(n).iter().zip(type_of) {
            scores[c] = scores[c] + w;
        }
    }
    let mut ranked: Vec<(usize, T)> = scores.into_iter().enumerate().collect();
    ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then(a.0.cmp(&b.0)));
    Ok(ranked)
}
