use crate::em::dataset_log_likelihood;
use crate::error::{Error, Result};
use crate::model::{Dataset, HawkesParams, IntensityTracker};
use crate::scalar::Scalar;

/// Log-likelihood per event over a dataset.
pub fn ell<T: Scalar>(params: &HawkesParams<T>, dataset: &Dataset<T>) -> Result<T> {
    let n = dataset.total_events();
    if n == 0 {
        return Err(Error::NoEvents);
    }
    Ok(dataset_log_likelihood(params, dataset)? / T::lit(n as f64))
}

/// Next-type prediction accuracy.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeAccuracy<T> {
    pub acc: T,
    /// Accuracy restricted to events of each true type; `None` for unseen types.
    pub per_type_acc: Vec<Option<T>>,
    pub n_events: usize,
    pub n_correct: usize,
}

/// Predicts the type of every observed event as the argmax (lowest index on
/// ties) of `λ_c(t_n)` given the strictly earlier history, and scores it
/// against the observed type.
pub fn next_type_accuracy<T: Scalar>(params: &HawkesParams<T>, dataset: &Dataset<T>) -> Result<TypeAccuracy<T>> {
    let c = params.num_types();
    if dataset.num_types() > c {
        return Err(Error::TypeOutOfRange { index: dataset.num_types() - 1, num_types: c });
    }
    let mut seen = vec![0usize; c];
    let mut hit = vec![0usize; c];
    let mut lambdas = vec![T::zero(); c];
    for seq in dataset.sequences() {
        let mut tracker = IntensityTracker::new(params);
        for e in seq.events() {
            tracker.advance_to(e.t);
            tracker.intensities(&mut lambdas);
            let pred = argmax_first(&lambdas);
            seen[e.c] += 1;
            if pred == e.c {
                hit[e.c] += 1;
            }
            tracker.record(e.c);
        }
    }
    let n_events: usize = seen.iter().sum();
    let n_correct: usize = hit.iter().sum();
    let ratio = |h: usize, n: usize| T::lit(h as f64) / T::lit(n as f64);
    Ok(TypeAccuracy {
        acc: if n_events == 0 { T::zero() } else { ratio(n_correct, n_events) },
        per_type_acc: seen.iter().zip(&hit).map(|(&n, &h)| (n > 0).then(|| ratio(h, n))).collect(),
        n_events,
        n_correct,
    })
}

fn argmax_first<T: Scalar>(xs: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport<T> {
    pub ell: T,
    pub acc: T,
    pub per_type_acc: Vec<Option<T>>,
    pub n_events: usize,
}

impl<T: Scalar> MetricsReport<T> {
    pub fn evaluate(params: &HawkesParams<T>, dataset: &Dataset<T>) -> Result<Self> {
        let ell = ell(params, dataset)?;
        let acc = next_type_accuracy(params, dataset)?;
        Ok(Self { ell, acc: acc.acc, per_type_acc: acc.per_type_acc, n_events: acc.n_events })
    }

    pub fn tsv_header(num_types: usize) -> String {
        let mut cols = vec!["ell".to_owned(), "acc".to_owned(), "n_events".to_owned()];
        cols.extend((0..num_types).map(|c| format!("acc_type_{c}")));
        cols.join("\t")
    }

    /// One tab-separated row; unseen types are written as `NA`.
    pub fn tsv_row(&self) -> String {
        let mut cols = vec![self.ell.to_string(), self.acc.to_string(), self.n_events.to_string()];
        cols.extend(self.per_type_acc.iter().map(|a| a.map_or_else(|| "NA".to_owned(), |v| v.to_string())));
        cols.join("\t")
    }
}
