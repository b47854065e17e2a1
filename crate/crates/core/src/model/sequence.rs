use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<T> {
    pub t: T,
    pub c: usize,
}

impl<T> Event<T> {
    pub fn new(t: T, c: usize) -> Self {
        Self { t, c }
    }
}

/// Events observed on `[0, horizon]`, in strictly increasing time order.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSequence<T> {
    id: String,
    horizon: T,
    events: Vec<Event<T>>,
}

impl<T: Scalar> EventSequence<T> {
    pub fn new(id: impl Into<String>, horizon: T, events: Vec<Event<T>>) -> Result<Self> {
        let id = id.into();
        let bad = |reason: String| Error::InvalidSequence { id: id.clone(), reason };
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(bad(format!("horizon must be positive and finite, got {horizon}")));
        }
        for (n, e) in events.iter().enumerate() {
            if !(e.t >= T::zero()) || !e.t.is_finite() {
                return Err(bad(format!("event {n} has invalid time {}", e.t)));
            }
            if e.t > horizon {
                return Err(bad(format!("event {n} at t={} is past the horizon {horizon}", e.t)));
            }
            if n > 0 && e.t <= events[n - 1].t {
                return Err(bad(format!("timestamps not strictly increasing at event {n}")));
            }
        }
        Ok(Self { id, horizon, events })
    }

    pub fn empty(id: impl Into<String>, horizon: T) -> Result<Self> {
        Self::new(id, horizon, Vec::new())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn events(&self) -> &[Event<T>] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.events.iter().map(|e| e.t)
    }

    pub fn types(&self) -> impl Iterator<Item = usize> + '_ {
        self.events.iter().map(|e| e.c)
    }

    /// Largest type index present, if any.
    pub fn max_type(&self) -> Option<usize> {
        self.types().max()
    }

    pub fn check_types(&self, num_types: usize) -> Result<()> {
        match self.events.iter().find(|e| e.c >= num_types) {
            Some(e) => Err(Error::TypeOutOfRange { index: e.c, num_types }),
            None => Ok(()),
        }
    }

    pub fn with_horizon(&self, horizon: T) -> Result<Self> {
        Self::new(self.id.clone(), horizon, self.events.clone())
    }
}

/// Collection of sequences sharing one set of `num_types` event types.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    sequences: Vec<EventSequence<T>>,
    num_types: usize,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(sequences: Vec<EventSequence<T>>, num_types: usize) -> Result<Self> {
        if num_types == 0 {
            return Err(Error::param("num_types", "at least one event type is required"));
        }
        for s in &sequences {
            s.check_types(num_types)?;
        }
        Ok(Self { sequences, num_types })
    }

    /// Infers the number of types as one past the largest observed index.
    pub fn infer(sequences: Vec<EventSequence<T>>) -> Result<Self> {
        let c = sequences.iter().filter_map(EventSequence::max_type).max().map_or(1, |m| m + 1);
        Self::new(sequences, c)
    }

    pub fn sequences(&self) -> &[EventSequence<T>] {
        &self.sequences
    }

    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn total_events(&self) -> usize {
        self.sequences.iter().map(EventSequence::len).sum()
    }

    pub fn total_horizon(&self) -> T {
        self.sequences.iter().map(EventSequence::horizon).sum()
    }

    pub fn type_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_types];
        for c in self.sequences.iter().flat_map(EventSequence::types) {
            counts[c] += 1;
        }
        counts
    }

    pub fn into_sequences(self) -> Vec<EventSequence<T>> {
        self.sequences
    }
}
