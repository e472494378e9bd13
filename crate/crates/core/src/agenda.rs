//! Best-first queue with FIFO tie-breaking.
//!
//! Superseded entries are not removed eagerly; the caller skips them on
//! pop with [`Agenda::pop_best_where`].

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

#[derive(Clone, Debug)]
pub struct AgendaItem<T> {
    pub item: T,
    pub priority: f64,
    pub seq: u64,
}

impl<T> PartialEq for AgendaItem<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T> Eq for AgendaItem<T> {}

impl<T> PartialOrd for AgendaItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for AgendaItem<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| Reverse(self.seq).cmp(&Reverse(other.seq)))
    }
}

#[derive(Clone, Debug)]
pub struct Agenda<T> {
    heap: BinaryHeap<AgendaItem<T>>,
    next_seq: u64,
}

impl<T> Default for Agenda<T> {
    fn default() -> Self {
        Agenda {
            heap: BinaryHeap::new(),
            next_seq: 0,
        }
    }
}

impl<T> Agenda<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Queues `item`; returns its sequence number.
    pub fn push(&mut self, item: T, priority: f64) -> u64 {
        debug_assert!(!priority.is_nan(), "NaN priority");
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(AgendaItem { item, priority, seq });
        seq
    }

    /// Highest priority, oldest first among equals.
    pub fn pop_best(&mut self) -> Option<AgendaItem<T>> {
        self.heap.pop()
    }

    /// Pops until an item satisfies `keep`, dropping the ones that do not.
    pub fn pop_best_where(&mut self, mut keep: impl FnMut(&T) -> bool) -> Option<AgendaItem<T>> {
        while let Some(top) = self.heap.pop() {
            if keep(&top.item) {
                return Some(top);
            }
        }
        None
    }

    pub fn peek(&self) -> Option<&AgendaItem<T>> {
        self.heap.peek()
    }

    pub fn peek_max_priority(&self) -> Option<f64> {
        self.heap.peek().map(|i| i.priority)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn clear(&mut self) {
        self.heap.clear();
    }
}
