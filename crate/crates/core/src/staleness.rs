//! Last-visit bookkeeping along a node trajectory.
//!
//! `d_v(t)` is the last time `s <= t` at which node `v` was visited (0 if never
//! visited), and the staleness at time `t` is `max_v (t - d_v(t))`. Nodes are
//! kept in a doubly linked list ordered by last visit so the oldest one is
//! always at the head.

const NIL: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct StalenessTracker {
    last: Vec<u64>,
    prev: Vec<usize>,
    next: Vec<usize>,
    head: usize,
    tail: usize,
}

impl StalenessTracker {
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "tracker needs at least one node");
        let prev = (0..n).map(|v| if v == 0 { NIL } else { v - 1 }).collect();
        let next = (0..n)
            .map(|v| if v + 1 == n { NIL } else { v + 1 })
            .collect();
        StalenessTracker {
            last: vec![0; n],
            prev,
            next,
            head: 0,
            tail: n - 1,
        }
    }

    pub fn n(&self) -> usize {
        self.last.len()
    }

    /// Records a visit of `v` at time `t`; times must be non-decreasing.
    pub fn visit(&mut self, v: usize, t: u64) {
        self.last[v] = t;
        if self.tail == v {
            return;
        }
        let (p, q) = (self.prev[v], self.next[v]);
        if p == NIL {
            self.head = q;
        } else {
            self.next[p] = q;
        }
        self.prev[q] = p;
        self.prev[v] = self.tail;
        self.next[v] = NIL;
        self.next[self.tail] = v;
        self.tail = v;
    }

    pub fn last_visit(&self, v: usize) -> u64 {
        self.last[v]
    }

    pub fn last_visits(&self) -> &[u64] {
        &self.last
    }

    /// `max_v (t - d_v(t))`.
    pub fn staleness(&self, t: u64) -> u64 {
        t - self.last[self.head]
    }

    /// Linear scan over all nodes; reference for `staleness`.
    pub fn staleness_by_scan(&self, t: u64) -> u64 {
        self.last.iter().map(|&d| t - d).max().unwrap_or(0)
    }
}
