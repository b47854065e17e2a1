//! Synthetic Hawkes sequences.
//!
//! Two independent simulators are provided: Ogata thinning on the conditional
//! intensity, and the cluster (branching) representation, which additionally
//! reports the ground-truth parent of every event.
//!
//! Randomness comes from ChaCha8. A sequence generated with `seed` and stream
//! index `i` draws from `ChaCha8Rng::seed_from_u64(seed)` with
//! `set_stream(i)`, so datasets are reproducible across platforms and the
//! sequences of a dataset can be produced in any order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use thiserror::Error as ThisError;

use crate::error::Error;
use crate::model::{Event, EventSequence, HawkesParams, IntensityTracker};
use crate::scalar::Scalar;

pub const DEFAULT_MAX_EVENTS: usize = 100_000;

const POWER_ITER_TOL: f64 = 1e-8;
const POWER_ITER_MAX: usize = 10_000;

/// Parent of each event: `Some(m)` with `m < n` for triggered events, `None`
/// for immigrants.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchLabels {
    id: String,
    parent: Vec<Option<usize>>,
}

impl BranchLabels {
    pub fn new(id: impl Into<String>, parent: Vec<Option<usize>>) -> Result<Self, Error> {
        let id = id.into();
        if let Some(n) = parent.iter().enumerate().position(|(n, p)| p.is_some_and(|p| p >= n)) {
            return Err(Error::InvalidSequence { id, reason: format!("parent of event {n} does not precede it") });
        }
        Ok(Self { id, parent })
    }

    /// From the `-1 = immigrant` integer encoding.
    pub fn from_signed(id: impl Into<String>, parent: &[i64]) -> Result<Self, Error> {
        let id = id.into();
        let mut out = Vec::with_capacity(parent.len());
        for (n, &p) in parent.iter().enumerate() {
            out.push(match p {
                -1 => None,
                p if p >= 0 => Some(p as usize),
                _ => {
                    return Err(Error::InvalidSequence { id, reason: format!("parent label {p} at event {n}") });
                }
            });
        }
        Self::new(id, out)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn to_signed(&self) -> Vec<i64> {
        self.parent.iter().map(|p| p.map_or(-1, |p| p as i64)).collect()
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    pub horizon: T,
    pub seed: u64,
    /// RNG stream; the dataset generator uses the sequence index.
    pub stream: u64,
    pub max_events: usize,
}

impl<T: Scalar> SimConfig<T> {
    pub fn new(horizon: T, seed: u64) -> Self {
        Self { horizon, seed, stream: 0, max_events: DEFAULT_MAX_EVENTS }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn with_max_events(self, max_events: usize) -> Self {
        Self { max_events, ..self }
    }

    fn validate(&self) -> Result<(), Error> {
        if !(self.horizon > T::zero()) || !self.horizon.is_finite() {
            return Err(Error::param("horizon", format!("must be positive and finite, got {}", self.horizon)));
        }
        if self.max_events == 0 {
            return Err(Error::param("max_events", "must be positive"));
        }
        Ok(())
    }

    fn rng(&self) -> ChaCha8Rng {
        sequence_rng(self.seed, self.stream)
    }
}

/// The documented stream-splitting rule.
pub fn sequence_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, ThisError)]
pub enum SimError<T: Scalar> {
    #[error("process is unstable: spectral radius {radius} >= 1")]
    Unstable { radius: f64 },
    #[error("simulation exceeded {max_events} events")]
    Truncated { max_events: usize, partial: EventSequence<T>, labels: Option<BranchLabels> },
    #[error(transparent)]
    Invalid(#[from] Error),
}

/// Spectral radius of the infectivity matrix, i.e. the branching ratio.
///
/// Power iteration on `A + I`: for a nonnegative `A` the Perron root `ρ` is an
/// eigenvalue and `ρ + 1` strictly dominates every other eigenvalue modulus of
/// the shifted matrix, which removes the oscillation of periodic matrices.
pub fn spectral_radius<T: Scalar>(params: &HawkesParams<T>) -> T {
    let a = params.infectivity();
    let c = a.rows();
    let mut x = vec![T::one() / T::lit(c as f64).sqrt(); c];
    let mut y = vec![T::zero(); c];
    let mut estimate = T::one();
    for _ in 0..POWER_ITER_MAX {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = x[i] + a.row(i).iter().zip(&x).map(|(&aij, &xj)| aij * xj).sum::<T>();
        }
        let norm = y.iter().map(|&v| v * v).sum::<T>().sqrt();
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        let converged = (norm - estimate).abs() <= T::lit(POWER_ITER_TOL) * norm;
        estimate = norm;
        if converged {
            break;
        }
    }
    (estimate - T::one()).max(T::zero())
}

fn check_stable<T: Scalar>(params: &HawkesParams<T>) -> Result<(), SimError<T>> {
    let radius = spectral_radius(params);
    if radius >= T::one() {
        return Err(SimError::Unstable { radius: radius.as_f64() });
    }
    Ok(())
}

/// Uniform draw on `(0, 1]`, safe to take the logarithm of.
fn open01<R: Rng>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

fn exp_draw<T: Scalar, R: Rng>(rng: &mut R, rate: T) -> T {
    T::lit(-open01(rng).ln()) / rate
}

/// Ogata thinning. The dominating rate is the total intensity right after the
/// current point, which bounds the intensity until the next event because the
/// exponential kernel only decays between events.
pub fn simulate_thinning<T: Scalar>(
    params: &HawkesParams<T>,
    cfg: &SimConfig<T>,
    id: impl Into<String>,
) -> Result<EventSequence<T>, SimError<T>> {
    cfg.validate()?;
    check_stable(params)?;
    let id = id.into();
    let mut rng = cfg.rng();
    let c = params.num_types();
    let mut tracker = IntensityTracker::new(params);
    let mut lambdas = vec![T::zero(); c];
    let mut events: Vec<Event<T>> = Vec::new();
    let mut t = T::zero();
    loop {
        tracker.intensities(&mut lambdas);
        let bound: T = lambdas.iter().copied().sum();
        if !(bound > T::zero()) {
            break;
        }
        t = t + exp_draw(&mut rng, bound);
        if t > cfg.horizon {
            break;
        }
        tracker.advance_to(t);
        tracker.intensities(&mut lambdas);
        let total: T = lambdas.iter().copied().sum();
        let u = T::lit(rng.random::<f64>());
        if u * bound > total {
            continue;
        }
        let mut pick = T::lit(rng.random::<f64>()) * total;
        let mut kind = c - 1;
        for (k, &l) in lambdas.iter().enumerate() {
            if l > T::zero() && pick < l {
                kind = k;
                break;
            }
            pick = pick - l;
        }
        // guard against rounding in the cumulative walk landing on a zero-rate type
        if !(lambdas[kind] > T::zero()) {
            kind = lambdas.iter().rposition(|&l| l > T::zero()).expect("total intensity is positive");
        }
        if let Some(last) = events.last() {
            if t <= last.t {
                t = last.t.next_up();
            }
        }
        if events.len() == cfg.max_events {
            let partial = EventSequence::new(id, cfg.horizon, events)?;
            return Err(SimError::Truncated { max_events: cfg.max_events, partial, labels: None });
        }
        events.push(Event::new(t, kind));
        tracker.record(kind);
    }
    Ok(EventSequence::new(id, cfg.horizon, events)?)
}

/// Cluster-representation simulator: immigrants from homogeneous Poisson
/// processes, each event of type `c'` spawning `Poisson(a_{c,c'})` children of
/// type `c` at exponential lags. Parents are re-indexed into time order.
pub fn simulate_branching<T: Scalar>(
    params: &HawkesParams<T>,
    cfg: &SimConfig<T>,
    id: impl Into<String>,
) -> Result<(EventSequence<T>, BranchLabels), SimError<T>> {
    cfg.validate()?;
    check_stable(params)?;
    let id = id.into();
    let mut rng = cfg.rng();
    let c = params.num_types();
    let beta = params.kernel().beta();
    // (time, type, parent in generation order)
    let mut raw: Vec<(T, usize, Option<usize>)> = Vec::new();
    let mut truncated = false;

    'outer: for (kind, &mu) in params.mu().iter().enumerate() {
        if mu <= T::zero() {
            continue;
        }
        let mut t = T::zero();
        loop {
            t = t + exp_draw(&mut rng, mu);
            if t > cfg.horizon {
                break;
            }
            if raw.len() == cfg.max_events {
                truncated = true;
                break 'outer;
            }
            raw.push((t, kind, None));
        }
    }

    let offspring: Vec<Vec<Option<Poisson<f64>>>> = (0..c)
        .map(|child| {
            (0..c)
                .map(|src| {
                    let a = params.a(child, src).as_f64();
                    (a > 0.0).then(|| Poisson::new(a).expect("positive finite rate"))
                })
                .collect()
        })
        .collect();

    let mut next = 0;
    while next < raw.len() && !truncated {
        let (tp, src, _) = raw[next];
        'spawn: for (child, dists) in offspring.iter().enumerate() {
            let Some(dist) = &dists[src] else { continue };
            let count = dist.sample(&mut rng) as u64;
            for _ in 0..count {
                let t = tp + exp_draw(&mut rng, beta);
                if t > cfg.horizon {
                    continue;
                }
                if raw.len() == cfg.max_events {
                    truncated = true;
                    break 'spawn;
                }
                raw.push((t, child, Some(next)));
            }
        }
        next += 1;
    }

    let (seq, labels) = assemble(&id, cfg.horizon, raw)?;
    if truncated {
        return Err(SimError::Truncated { max_events: cfg.max_events, partial: seq, labels: Some(labels) });
    }
    Ok((seq, labels))
}

/// Sorts generated events by time (generation order breaks ties, so parents
/// precede children), separates equal timestamps, and re-indexes parents.
fn assemble<T: Scalar>(
    id: &str,
    horizon: T,
    raw: Vec<(T, usize, Option<usize>)>,
) -> Result<(EventSequence<T>, BranchLabels), Error> {
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&i, &j| raw[i].0.partial_cmp(&raw[j].0).expect("finite times").then(i.cmp(&j)));
    let mut new_index = vec![0; raw.len()];
    for (pos, &old) in order.iter().enumerate() {
        new_index[old] = pos;
    }
    let mut events: Vec<Event<T>> = Vec::with_capacity(raw.len());
    let mut parents = Vec::with_capacity(raw.len());
    for &old in &order {
        let (mut t, kind, parent) = raw[old];
        if let Some(last) = events.last() {
            if t <= last.t {
                t = last.t.next_up();
            }
        }
        events.push(Event::new(t, kind));
        parents.push(parent.map(|p| new_index[p]));
    }
    let seq = EventSequence::new(id, horizon, events)?;
    let labels = BranchLabels::new(id, parents)?;
    Ok((seq, labels))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMethod {
    Thinning,
    Branching,
}

/// Simulated dataset; labels are present only for the branching simulator.
#[derive(Debug, Clone)]
pub struct SimulatedDataset<T> {
    pub sequences: Vec<EventSequence<T>>,
    pub labels: Option<Vec<BranchLabels>>,
}

/// Generates `count` sequences in parallel, sequence `i` on RNG stream `i`
/// with id `seq-i`. Output does not depend on the thread count.
pub fn simulate_dataset<T: Scalar>(
    params: &HawkesParams<T>,
    cfg: &SimConfig<T>,
    count: usize,
    method: SimMethod,
) -> Result<SimulatedDataset<T>, SimError<T>> {
    check_stable(params)?;
    let results: Vec<Result<(EventSequence<T>, Option<BranchLabels>), SimError<T>>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let cfg = cfg.with_stream(i as u64);
            let id = format!("seq-{i}");
            match method {
                SimMethod::Thinning => simulate_thinning(params, &cfg, id).map(|s| (s, None)),
                SimMethod::Branching => simulate_branching(params, &cfg, id).map(|(s, l)| (s, Some(l))),
            }
        })
        .collect();
    let mut sequences = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for r in results {
        let (s, l) = r?;
        sequences.push(s);
        labels.extend(l);
    }
    let labels = (method == SimMethod::Branching).then_some(labels);
    Ok(SimulatedDataset { sequences, labels })
}
