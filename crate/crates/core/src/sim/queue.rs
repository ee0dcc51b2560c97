use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("event scheduled at {at} s but the clock is already at {now} s")]
pub struct CausalityError {
    pub at: f64,
    pub now: f64,
}

struct Entry<E> {
    time: f64,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // reversed so the max-heap pops the earliest (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Future-event list ordered by `(time, seq)`, where `seq` is the order of
/// scheduling. Equal timestamps therefore pop first-scheduled first.
pub struct EventQueue<E> {
    heap: BinaryHeap<Entry<E>>,
    next_seq: u64,
    now: f64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self { heap: BinaryHeap::new(), next_seq: 0, now: 0.0 }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Schedules `event` at absolute time `at`; returns its sequence number.
    pub fn schedule(&mut self, at: f64, event: E) -> Result<u64, CausalityError> {
        if at.is_nan() || at < self.now {
            return Err(CausalityError { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Entry { time: at, seq, event });
        Ok(seq)
    }

    /// Removes the next event and advances the clock to its time.
    pub fn pop(&mut self) -> Option<(f64, u64, E)> {
        let e = self.heap.pop()?;
        self.now = e.time;
        Some((e.time, e.seq, e.event))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pops_in_time_then_seq_order() {
        let mut q = EventQueue::new();
        q.schedule(2.0, "c").unwrap();
        q.schedule(1.0, "a").unwrap();
        q.schedule(1.0, "b").unwrap();
        let order: Vec<_> = std::iter::from_fn(|| q.pop().map(|(_, _, e)| e)).collect();
        assert_eq!(order, ["a", "b", "c"]);
    }

    #[test]
    fn rejects_past_events() {
        let mut q = EventQueue::new();
        q.schedule(5.0, ()).unwrap();
        q.pop();
        assert!(q.schedule(4.0, ()).is_err());
        assert!(q.schedule(5.0, ()).is_ok());
    }
}
