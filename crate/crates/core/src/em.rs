//! Expectation-maximization for multivariate Hawkes processes.
//!
//! The E-step produces one responsibility matrix per sequence; optionally each
//! one is replaced by its Bregman-ADMM structured version before the M-step.
//! Sufficient statistics are computed per sequence in parallel and combined
//! with a fixed pairwise tree, so results do not depend on the thread count.

use log::warn;
use rayon::prelude::*;

use crate::badmm::{structure_matrix, BadmmConfig};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::{log_likelihood, Dataset, EventSequence, ExpKernel, HawkesParams, TransitionMatrix};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmConfig<T> {
    pub max_em_iters: usize,
    /// Stop when the relative log-likelihood improvement drops below this.
    pub loglik_tol: T,
    /// Structure every responsibility matrix with BADMM; `None` is classic EM.
    pub badmm: Option<BadmmConfig<T>>,
    /// Lower bound applied to every μ and A entry.
    pub param_floor: T,
}

impl<T: Scalar> Default for EmConfig<T> {
    fn default() -> Self {
        Self { max_em_iters: 100, loglik_tol: T::lit(1e-5), badmm: None, param_floor: T::lit(1e-10) }
    }
}

impl<T: Scalar> EmConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.max_em_iters == 0 {
            return Err(Error::param("max_em_iters", "must be at least 1"));
        }
        if !(self.loglik_tol >= T::zero()) {
            return Err(Error::param("loglik_tol", format!("must be nonnegative, got {}", self.loglik_tol)));
        }
        if !(self.param_floor > T::zero()) {
            return Err(Error::param("param_floor", format!("must be positive, got {}", self.param_floor)));
        }
        if let Some(b) = &self.badmm {
            b.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub params: HawkesParams<T>,
    /// Responsibilities consumed by the final M-step, one per sequence.
    pub responsibilities: Vec<TransitionMatrix<T>>,
    /// Log-likelihood of the initial parameters followed by one entry per iteration.
    pub loglik_history: Vec<T>,
    pub iterations_run: usize,
    /// Types never observed; their parameters were pinned to the floor.
    pub unobserved_types: Vec<usize>,
}

/// Output of the M-step.
#[derive(Debug, Clone, PartialEq)]
pub struct MStep<T> {
    pub params: HawkesParams<T>,
    pub unobserved_types: Vec<usize>,
}

/// Posterior weights of each candidate cause of every event.
///
/// Row `n` holds `μ_{c_n}/λ_{c_n}(t_n)` on the diagonal and
/// `a_{c_n c_m} κ(t_n − t_m)/λ_{c_n}(t_n)` for earlier events `m`.
pub fn e_step<T: Scalar>(params: &HawkesParams<T>, seq: &EventSequence<T>) -> Result<TransitionMatrix<T>> {
    seq.check_types(params.num_types())?;
    let events = seq.events();
    let n = events.len();
    let kernel = params.kernel();
    let mut r = Matrix::zeros(n, n);
    for (i, ei) in events.iter().enumerate() {
        let row = &mut r.row_mut(i)[..=i];
        let a_row = params.infectivity().row(ei.c);
        let mut total = params.mu()[ei.c];
        row[i] = total;
        for (slot, ej) in row[..i].iter_mut().zip(events) {
            let w = a_row[ej.c] * kernel.density(ei.t - ej.t);
            *slot = w;
            total = total + w;
        }
        if !(total > T::zero()) {
            return Err(Error::ZeroIntensity { sequence: seq.id().to_owned(), event: i });
        }
        for x in row.iter_mut() {
            *x = *x / total;
        }
    }
    Ok(TransitionMatrix::from_normalized(r))
}

/// Jensen lower bound `Q(θ, θ_prev)` summed over the dataset, with the
/// responsibilities computed under `θ_prev`.
pub fn q_function<T: Scalar>(params: &HawkesParams<T>, params_prev: &HawkesParams<T>, dataset: &Dataset<T>) -> Result<T> {
    let mut total = T::zero();
    for seq in dataset.sequences() {
        let r = e_step(params_prev, seq)?;
        total = total + q_value(params, &r, seq);
    }
    Ok(total)
}

/// `Q` for one sequence given its responsibilities. Terms with zero
/// responsibility contribute nothing; a positive responsibility on a zero rate
/// yields `−∞`.
pub fn q_value<T: Scalar>(params: &HawkesParams<T>, r: &TransitionMatrix<T>, seq: &EventSequence<T>) -> T {
    let events = seq.events();
    let kernel = params.kernel();
    let xlogy = |w: T, rate: T| if w > T::zero() { w * (rate / w).ln() } else { T::zero() };
    let mut q = T::zero();
    for (i, ei) in events.iter().enumerate() {
        let row = r.support_row(i);
        q = q + xlogy(row[i], params.mu()[ei.c]);
        for (j, ej) in events[..i].iter().enumerate() {
            q = q + xlogy(row[j], params.a(ei.c, ej.c) * kernel.density(ei.t - ej.t));
        }
    }
    q - crate::model::compensator(params, seq)
}

#[derive(Debug, Clone)]
struct SuffStats<T> {
    mu_num: Vec<T>,
    a_num: Matrix<T>,
    a_den: Vec<T>,
    horizon: T,
    counts: Vec<usize>,
}

impl<T: Scalar> SuffStats<T> {
    fn collect(r: &TransitionMatrix<T>, seq: &EventSequence<T>, kernel: &ExpKernel<T>, c: usize) -> Self {
        let events = seq.events();
        let mut s = Self {
            mu_num: vec![T::zero(); c],
            a_num: Matrix::zeros(c, c),
            a_den: vec![T::zero(); c],
            horizon: seq.horizon(),
            counts: vec![0; c],
        };
        for (i, ei) in events.iter().enumerate() {
            let row = r.support_row(i);
            s.mu_num[ei.c] = s.mu_num[ei.c] + row[i];
            for (&w, ej) in row[..i].iter().zip(events) {
                s.a_num[(ei.c, ej.c)] = s.a_num[(ei.c, ej.c)] + w;
            }
            s.a_den[ei.c] = s.a_den[ei.c] + kernel.mass(seq.horizon() - ei.t);
            s.counts[ei.c] += 1;
        }
        s
    }

    fn merge(mut self, other: &Self) -> Self {
        for (a, &b) in self.mu_num.iter_mut().zip(&other.mu_num) {
            *a = *a + b;
        }
        self.a_num = self.a_num.add(&other.a_num);
        for (a, &b) in self.a_den.iter_mut().zip(&other.a_den) {
            *a = *a + b;
        }
        self.horizon = self.horizon + other.horizon;
        for (a, &b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }
}

fn tree_reduce<T: Scalar>(items: &[SuffStats<T>]) -> SuffStats<T> {
    match items {
        [one] => one.clone(),
        _ => {
            let (l, r) = items.split_at(items.len() / 2);
            tree_reduce(l).merge(&tree_reduce(r))
        }
    }
}

fn tree_sum<T: Scalar>(items: &[T]) -> T {
    match items {
        [] => T::zero(),
        [one] => *one,
        _ => {
            let (l, r) = items.split_at(items.len() / 2);
            tree_sum(l) + tree_sum(r)
        }
    }
}

/// Closed-form maximizer of `Q`, pooled over sequences:
///
/// ```text
/// μ_c     = Σ_seq Σ_{n: c_n = c} r_nn / Σ_seq T
/// a_{cc'} = Σ_seq Σ_{n: c_n = c} Σ_{m<n: c_m = c'} r_nm / Σ_seq Σ_{m: c_m = c'} (1 − e^{−β(T − t_m)})
/// ```
///
/// Every value is floored at `floor`. Types absent from the dataset get the
/// floor for `μ_c` and for row and column `c` of `A`, and are reported.
pub fn m_step<T: Scalar>(
    responsibilities: &[TransitionMatrix<T>],
    dataset: &Dataset<T>,
    kernel: &ExpKernel<T>,
    floor: T,
) -> Result<MStep<T>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if responsibilities.len() != dataset.len() {
        return Err(Error::shape("m_step responsibilities", dataset.len(), responsibilities.len()));
    }
    for (r, s) in responsibilities.iter().zip(dataset.sequences()) {
        if r.n() != s.len() {
            return Err(Error::shape("m_step responsibility size", s.len(), r.n()));
        }
    }
    let c = dataset.num_types();
    let stats: Vec<SuffStats<T>> = responsibilities
        .par_iter()
        .zip(dataset.sequences().par_iter())
        .map(|(r, s)| SuffStats::collect(r, s, kernel, c))
        .collect();
    let total = tree_reduce(&stats);

    let unobserved: Vec<usize> = (0..c).filter(|&k| total.counts[k] == 0).collect();
    if !unobserved.is_empty() {
        warn!("event types {unobserved:?} never observed; their parameters are pinned to the floor");
    }
    let clamp = |x: T| if x.is_finite() { x.max(floor) } else { floor };
    let mu: Vec<T> = (0..c)
        .map(|k| if total.counts[k] == 0 { floor } else { clamp(total.mu_num[k] / total.horizon) })
        .collect();
    let infectivity = Matrix::from_fn(c, c, |k, src| {
        if total.counts[k] == 0 || total.counts[src] == 0 || !(total.a_den[src] > T::zero()) {
            floor
        } else {
            clamp(total.a_num[(k, src)] / total.a_den[src])
        }
    });
    Ok(MStep { params: HawkesParams::new(mu, infectivity, *kernel)?, unobserved_types: unobserved })
}

/// Data-informed starting point: `μ_c = count_c / Σ T` and a uniform
/// infectivity matrix with spectral radius 0.5.
pub fn initial_params<T: Scalar>(dataset: &Dataset<T>, kernel: &ExpKernel<T>, floor: T) -> Result<HawkesParams<T>> {
    let c = dataset.num_types();
    let horizon = dataset.total_horizon();
    let mu = dataset.type_counts().into_iter().map(|k| (T::lit(k as f64) / horizon).max(floor)).collect();
    let a = Matrix::filled(c, c, (T::lit(0.5) / T::lit(c as f64)).max(floor));
    HawkesParams::new(mu, a, *kernel)
}

/// Total log-likelihood of a dataset, summed in a fixed order.
pub fn dataset_log_likelihood<T: Scalar>(params: &HawkesParams<T>, dataset: &Dataset<T>) -> Result<T> {
    let parts: Vec<T> = dataset
        .sequences()
        .par_iter()
        .map(|s| log_likelihood(params, s))
        .collect::<Result<_>>()?;
    Ok(tree_sum(&parts))
}

/// Responsibilities of every sequence, structured by BADMM when configured.
pub fn responsibilities<T: Scalar>(
    params: &HawkesParams<T>,
    dataset: &Dataset<T>,
    badmm: Option<&BadmmConfig<T>>,
) -> Result<Vec<TransitionMatrix<T>>> {
    dataset
        .sequences()
        .par_iter()
        .map(|s| {
            let r = e_step(params, s)?;
            match badmm {
                Some(cfg) => Ok(structure_matrix(&r, cfg)?.b),
                None => Ok(r),
            }
        })
        .collect()
}

/// Runs EM from [`initial_params`] until `max_em_iters` or until the relative
/// log-likelihood improvement falls below `loglik_tol`.
pub fn fit<T: Scalar>(dataset: &Dataset<T>, kernel: &ExpKernel<T>, cfg: &EmConfig<T>) -> Result<FitResult<T>> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut params = initial_params(dataset, kernel, cfg.param_floor)?;
    let mut ll_prev = dataset_log_likelihood(&params, dataset)?;
    let mut history = vec![ll_prev];
    let mut last_resp = Vec::new();
    let mut unobserved = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_em_iters {
        let resp = responsibilities(&params, dataset, cfg.badmm.as_ref())?;
        let step = m_step(&resp, dataset, kernel, cfg.param_floor)?;
        params = step.params;
        unobserved = step.unobserved_types;
        last_resp = resp;
        iterations += 1;
        let ll = dataset_log_likelihood(&params, dataset)?;
        history.push(ll);
        let scale = if ll_prev.abs() > T::zero() { ll_prev.abs() } else { T::one() };
        if (ll - ll_prev) / scale < cfg.loglik_tol {
            break;
        }
        ll_prev = ll;
    }
    Ok(FitResult { params, responsibilities: last_resp, loglik_history: history, iterations_run: iterations, unobserved_types: unobserved })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{log_likelihood, Event};
    use crate::simulate::{simulate_dataset, SimConfig, SimMethod};

    fn params(mu: Vec<f64>, a: Vec<Vec<f64>>, beta: f64) -> HawkesParams<f64> {
        HawkesParams::new(mu, Matrix::from_rows(&a), ExpKernel::new(beta).unwrap()).unwrap()
    }

    fn seq(horizon: f64, ev: &[(f64, usize)]) -> EventSequence<f64> {
        EventSequence::new("s", horizon, ev.iter().map(|&(t, c)| Event::new(t, c)).collect()).unwrap()
    }

    #[test]
    fn e_step_examples() {
        let p = params(vec![0.5], vec![vec![1.0]], 1.0);
        let r = e_step(&p, &seq(2.0, &[(0.0, 0), (1.0, 0)])).unwrap();
        assert_eq!(r.get(0, 0), 1.0);
        let e1 = (-1.0f64).exp();
        assert!((r.get(1, 0) - e1 / (0.5 + e1)).abs() < 1e-12);
        assert!((r.get(1, 0) - 0.42388).abs() < 1e-5);
        assert!((r.get(1, 1) - 0.57612).abs() < 1e-5);

        let p0 = params(vec![0.5, 0.2], vec![vec![0.0; 2]; 2], 1.0);
        let r0 = e_step(&p0, &seq(2.0, &[(0.1, 0), (0.5, 1), (1.0, 0)])).unwrap();
        assert_eq!(r0, TransitionMatrix::identity(3));
    }

    #[test]
    fn e_step_rows_are_stochastic() {
        let p = params(vec![0.3, 0.2], vec![vec![0.2, 0.3], vec![0.1, 0.4]], 1.5);
        let d = simulate_dataset(&p, &SimConfig::new(40.0, 1), 5, SimMethod::Thinning).unwrap();
        for s in &d.sequences {
            let r = e_step(&p, s).unwrap();
            assert!(r.max_row_deviation() < 1e-12);
        }
    }

    #[test]
    fn e_step_reports_zero_intensity() {
        let p = params(vec![0.0], vec![vec![0.5]], 1.0);
        let err = e_step(&p, &seq(1.0, &[(0.3, 0)])).unwrap_err();
        assert!(matches!(err, Error::ZeroIntensity { event: 0, .. }));
    }

    #[test]
    fn q_is_tight_at_current_params() {
        let p = params(vec![0.3, 0.2], vec![vec![0.2, 0.3], vec![0.1, 0.4]], 1.5);
        let d = simulate_dataset(&p, &SimConfig::new(40.0, 2), 3, SimMethod::Thinning).unwrap();
        for s in d.sequences {
            let ds = Dataset::new(vec![s.clone()], 2).unwrap();
            let q = q_function(&p, &p, &ds).unwrap();
            let ll = log_likelihood(&p, &s).unwrap();
            assert!((q - ll).abs() < 1e-9 * ll.abs().max(1.0), "{q} vs {ll}");
            let other = params(vec![0.5, 0.1], vec![vec![0.1, 0.1], vec![0.3, 0.2]], 1.5);
            assert!(q_function(&other, &p, &ds).unwrap() <= log_likelihood(&other, &s).unwrap() + 1e-9);
        }
    }

    #[test]
    fn q_reduces_to_poisson_without_excitation() {
        let p = params(vec![0.7], vec![vec![0.0]], 1.0);
        let s = seq(3.0, &[(0.5, 0), (1.5, 0)]);
        let ds = Dataset::new(vec![s], 1).unwrap();
        let q = q_function(&p, &p, &ds).unwrap();
        assert!((q - (2.0 * 0.7f64.ln() - 2.1)).abs() < 1e-12);
    }

    #[test]
    fn m_step_with_identity_responsibilities() {
        let s1 = seq(2.0, &[(0.1, 0), (0.5, 1), (1.0, 0)]);
        let s2 = seq(3.0, &[(1.2, 1)]);
        let d = Dataset::new(vec![s1, s2], 2).unwrap();
        let resp = vec![TransitionMatrix::identity(3), TransitionMatrix::identity(1)];
        let out = m_step(&resp, &d, &ExpKernel::default(), 1e-10).unwrap();
        assert!((out.params.mu()[0] - 2.0 / 5.0).abs() < 1e-15);
        assert!((out.params.mu()[1] - 2.0 / 5.0).abs() < 1e-15);
        assert!(out.params.infectivity().as_slice().iter().all(|&a| a == 1e-10));
        assert!(out.unobserved_types.is_empty());
    }

    #[test]
    fn m_step_flags_unobserved_types() {
        let d = Dataset::new(vec![seq(2.0, &[(0.1, 0), (0.5, 0)])], 3).unwrap();
        let r = e_step(&params(vec![0.5, 0.5, 0.5], vec![vec![0.3; 3]; 3], 1.0), &d.sequences()[0]).unwrap();
        let out = m_step(&[r], &d, &ExpKernel::default(), 1e-10).unwrap();
        assert_eq!(out.unobserved_types, vec![1, 2]);
        assert_eq!(out.params.mu()[1], 1e-10);
        assert_eq!(out.params.a(0, 2), 1e-10);
        assert_eq!(out.params.a(2, 0), 1e-10);
        assert!(out.params.a(0, 0) > 1e-10);
    }

    #[test]
    fn m_step_rejects_misaligned_input() {
        let d = Dataset::new(vec![seq(2.0, &[(0.1, 0), (0.5, 0)])], 1).unwrap();
        assert!(m_step(&[TransitionMatrix::identity(3)], &d, &ExpKernel::default(), 1e-10).is_err());
        assert!(m_step(&[], &d, &ExpKernel::default(), 1e-10).is_err());
    }

    /// Grid search of `Q(·, θ_prev)` over `(μ, a)` at 1e-3 resolution.
    #[test]
    fn m_step_matches_grid_argmax_of_q() {
        let kernel = ExpKernel::new(1.0).unwrap();
        let s = seq(4.0, &[(0.2, 0), (0.9, 0), (1.3, 0), (3.1, 0)]);
        let d = Dataset::new(vec![s.clone()], 1).unwrap();
        let prev = params(vec![0.4], vec![vec![0.6]], 1.0);
        let r = e_step(&prev, &s).unwrap();
        let step = m_step(&[r.clone()], &d, &kernel, 1e-10).unwrap();

        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 1..=1500 {
            let mu = i as f64 * 1e-3;
            for j in 1..=1500 {
                let a = j as f64 * 1e-3;
                let cand = params(vec![mu], vec![vec![a]], 1.0);
                let q = q_value(&cand, &r, &s);
                if q > best.0 {
                    best = (q, mu, a);
                }
            }
        }
        assert!((step.params.mu()[0] - best.1).abs() <= 1e-3, "{} vs {}", step.params.mu()[0], best.1);
        assert!((step.params.a(0, 0) - best.2).abs() <= 1e-3, "{} vs {}", step.params.a(0, 0), best.2);
    }

    #[test]
    fn one_iteration_runs_one_round() {
        let p = params(vec![0.3, 0.2], vec![vec![0.2, 0.3], vec![0.1, 0.4]], 1.0);
        let d = simulate_dataset(&p, &SimConfig::new(30.0, 3), 10, SimMethod::Thinning).unwrap();
        let ds = Dataset::new(d.sequences, 2).unwrap();
        let cfg = EmConfig { max_em_iters: 1, ..Default::default() };
        let fit1 = fit(&ds, &ExpKernel::default(), &cfg).unwrap();
        assert_eq!(fit1.iterations_run, 1);
        assert_eq!(fit1.loglik_history.len(), 2);
        let init = initial_params(&ds, &ExpKernel::default(), 1e-10).unwrap();
        let resp = responsibilities(&init, &ds, None).unwrap();
        let manual = m_step(&resp, &ds, &ExpKernel::default(), 1e-10).unwrap();
        assert_eq!(fit1.params, manual.params);
        assert_eq!(fit1.responsibilities, resp);
    }

    #[test]
    fn fit_is_thread_count_independent() {
        let p = params(vec![0.3, 0.2], vec![vec![0.2, 0.3], vec![0.1, 0.4]], 1.0);
        let d = simulate_dataset(&p, &SimConfig::new(30.0, 4), 24, SimMethod::Thinning).unwrap();
        let ds = Dataset::new(d.sequences, 2).unwrap();
        let cfg = EmConfig { max_em_iters: 10, ..Default::default() };
        let a = fit(&ds, &ExpKernel::default(), &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| fit(&ds, &ExpKernel::default(), &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_empty_dataset_and_bad_config() {
        let empty = Dataset::<f64>::new(vec![], 1).unwrap();
        assert!(matches!(fit(&empty, &ExpKernel::default(), &EmConfig::default()), Err(Error::EmptyDataset)));
        let ds = Dataset::new(vec![seq(1.0, &[(0.5, 0)])], 1).unwrap();
        let cfg = EmConfig { max_em_iters: 0, ..Default::default() };
        assert!(fit(&ds, &ExpKernel::default(), &cfg).is_err());
    }
}
