//! Dijkstra's algorithm over a black-box heap, fully instrumented: pop
//! order, per-vertex push/pop clock stamps, the tree of first-push edges,
//! and counters for heap work and weight comparisons.
//!
//! The clock ticks once after every push and never on pops, so an
//! element's `(pushed_at, popped_at)` stamps bound how many pushes
//! happened while it sat in the heap. `run_reference` is the plain
//! binary-heap oracle the instrumented runners are checked against.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::fib_heap::{HeapArena, HeapError, MeldableHeap, NodeHandle};
use crate::graph::Graph;
use crate::ts_heap::{TimestampHeap, TsHandle};

const INF: u64 = u64::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RunError {
    #[error("vertex {0} is not reachable from the source")]
    Unreachable(u32),
    #[error("source vertex {0} out of range")]
    BadSource(u32),
    #[error("distance arithmetic overflow")]
    Overflow,
    #[error("path position {0} out of range")]
    PathIndex(usize),
    #[error(transparent)]
    Heap(#[from] HeapError),
}

/// Which priority queue backs the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HeapKind {
    Binary,
    Fibonacci,
    Timestamp,
}

impl HeapKind {
    pub const ALL: [HeapKind; 3] = [HeapKind::Binary, HeapKind::Fibonacci, HeapKind::Timestamp];

    pub fn name(self) -> &'static str {
        match self {
            HeapKind::Binary => "binary",
            HeapKind::Fibonacci => "fibonacci",
            HeapKind::Timestamp => "timestamp",
        }
    }
}

impl std::str::FromStr for HeapKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary" => Ok(HeapKind::Binary),
            "fibonacci" => Ok(HeapKind::Fibonacci),
            "timestamp" => Ok(HeapKind::Timestamp),
            other => Err(format!("unknown heap kind '{other}'")),
        }
    }
}

#[derive(Debug, Default, Clone, Copy, Serialize)]
pub struct TraceCounters {
    pub pushes: u64,
    pub pops: u64,
    pub decrease_keys: u64,
    /// Weight comparisons: heap-internal key comparisons plus the
    /// tentative-distance tests in the relaxation loop (and threshold
    /// tests in the compressed variant). Tie-break id comparisons are not
    /// counted separately.
    pub comparisons: u64,
    /// Structural heap steps (links, cuts, splices, sifts, carries).
    pub heap_steps: u64,
    /// The subset of `heap_steps` attributable to pops.
    pub pop_steps: u64,
    /// Sum of log2(live heap size) at each pop; the binary-heap cost proxy.
    pub heap_size_log_sum: f64,
}

/// Everything one run produces. `order[0]` is the source.
#[derive(Debug, Clone, Serialize)]
pub struct DijkstraTrace {
    pub order: Vec<u32>,
    pub dist: Vec<u64>,
    /// Per-vertex `(pushed_at, popped_at)` clock stamps.
    pub timestamps: Vec<(u64, u64)>,
    /// Per-vertex first-push edge: `tree[v]` popped, relaxed an edge to
    /// `v`, and pushed it. `None` for the source.
    pub tree: Vec<Option<u32>>,
    pub counters: TraceCounters,
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct QueueCounters {
    pub comparisons: u64,
    pub steps: u64,
    pub pop_steps: u64,
}

/// Minimal queue surface Dijkstra needs; implementations count their own
/// comparisons and structural steps.
pub(crate) trait DijkstraQueue {
    fn push(&mut self, v: u32, key: u64) -> Result<(), HeapError>;
    fn decrease_key(&mut self, v: u32, key: u64) -> Result<(), HeapError>;
    fn pop(&mut self) -> Result<Option<(u32, u64)>, HeapError>;
    /// The entry the next `pop` returns. May purge stale entries, hence
    /// `&mut`.
    fn peek(&mut self) -> Result<Option<(u32, u64)>, HeapError>;
    fn counters(&self) -> QueueCounters;
}

/// Hand-rolled binary heap with lazy decrease-key (re-push and skip stale
/// entries), counting sift comparisons and swaps.
struct BinaryQueue {
    heap: Vec<(u64, u32)>,
    best: Vec<u64>,
    done: Vec<bool>,
    comparisons: u64,
    steps: u64,
    pop_steps: u64,
}

impl BinaryQueue {
    fn new(n: usize) -> Self {
        BinaryQueue {
            heap: Vec::new(),
            best: vec![INF; n],
            done: vec![false; n],
            comparisons: 0,
            steps: 0,
            pop_steps: 0,
        }
    }

    fn less(&mut self, i: usize, j: usize) -> bool {
        self.comparisons += 1;
        self.heap[i] < self.heap[j]
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let p = (i - 1) / 2;
            if self.less(i, p) {
                self.heap.swap(i, p);
                self.steps += 1;
                i = p;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        loop {
            let l = 2 * i + 1;
            if l >= self.heap.len() {
                break;
            }
            let mut best = l;
            if l + 1 < self.heap.len() && self.less(l + 1, l) {
                best = l + 1;
            }
            if self.less(best, i) {
                self.heap.swap(i, best);
                self.steps += 1;
                i = best;
            } else {
                break;
            }
        }
    }

    fn pop_entry(&mut self) -> Option<(u64, u32)> {
        if self.heap.is_empty() {
            return None;
        }
        let last = self.heap.len() - 1;
        self.heap.swap(0, last);
        let out = self.heap.pop();
        self.steps += 1;
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        out
    }

    /// Drop stale duplicates off the top.
    fn purge(&mut self) {
        while let Some(&(k, v)) = self.heap.first() {
            if self.done[v as usize] || k != self.best[v as usize] {
                self.pop_entry();
            } else {
                break;
            }
        }
    }
}

impl DijkstraQueue for BinaryQueue {
    fn push(&mut self, v: u32, key: u64) -> Result<(), HeapError> {
        self.best[v as usize] = key;
        self.heap.push((key, v));
        self.steps += 1;
        self.sift_up(self.heap.len() - 1);
        Ok(())
    }

    fn decrease_key(&mut self, v: u32, key: u64) -> Result<(), HeapError> {
        if key > self.best[v as usize] {
            return Err(HeapError::KeyIncrease);
        }
        self.push(v, key)
    }

    fn pop(&mut self) -> Result<Option<(u32, u64)>, HeapError> {
        let before = self.steps;
        let out = loop {
            match self.pop_entry() {
                None => break None,
                Some((k, v)) => {
                    if self.done[v as usize] || k != self.best[v as usize] {
                        continue;
                    }
                    self.done[v as usize] = true;
                    break Some((v, k));
                }
            }
        };
        self.pop_steps += self.steps - before;
        Ok(out)
    }

    fn peek(&mut self) -> Result<Option<(u32, u64)>, HeapError> {
        self.purge();
        Ok(self.heap.first().map(|&(k, v)| (v, k)))
    }

    fn counters(&self) -> QueueCounters {
        QueueCounters {
            comparisons: self.comparisons,
            steps: self.steps,
            pop_steps: self.pop_steps,
        }
    }
}

struct FibQueue {
    arena: HeapArena,
    heap: MeldableHeap,
    handles: Vec<Option<NodeHandle>>,
    pop_steps: u64,
}

impl FibQueue {
    fn new(n: usize) -> Self {
        FibQueue {
            arena: HeapArena::new(),
            heap: MeldableHeap::new(),
            handles: vec![None; n],
            pop_steps: 0,
        }
    }
}

impl DijkstraQueue for FibQueue {
    fn push(&mut self, v: u32, key: u64) -> Result<(), HeapError> {
        let h = self.heap.push(&mut self.arena, v, key)?;
        self.handles[v as usize] = Some(h);
        Ok(())
    }

    fn decrease_key(&mut self, v: u32, key: u64) -> Result<(), HeapError> {
        let h = self.handles[v as usize].ok_or(HeapError::DeadHandle)?;
        self.heap.decrease_key(&mut self.arena, h, key)
    }

    fn pop(&mut self) -> Result<Option<(u32, u64)>, HeapError> {
        if self.heap.is_empty() {
            return Ok(None);
        }
        let before = self.arena.steps();
        let (v, k) = self.heap.pop_min(&mut self.arena)?;
        self.pop_steps += self.arena.steps() - before;
        self.handles[v as usize] = None;
        Ok(Some((v, k)))
    }

    fn peek(&mut self) -> Result<Option<(u32, u64)>, HeapError> {
        Ok(self.heap.peek_min(&self.arena))
    }

    fn counters(&self) -> QueueCounters {
        QueueCounters {
            comparisons: self.arena.comparisons(),
            steps: self.arena.steps(),
            pop_steps: self.pop_steps,
        }
    }
}

struct TsQueue {
    heap: TimestampHeap,
    handles: Vec<Option<TsHandle>>,
}

impl TsQueue {
    fn new(n: usize) -> Self {
        TsQueue {
            heap: TimestampHeap::new(),
            handles: vec![None; n],
        }
    }
}

impl DijkstraQueue for TsQueue {
    fn push(&mut self, v: u32, key: u64) -> Result<(), HeapError> {
        let h = self.heap.push(v, key)?;
        self.handles[v as usize] = Some(h);
        Ok(())
    }

    fn decrease_key(&mut self, v: u32, key: u64) -> Result<(), HeapError> {
        let h = self.handles[v as usize].ok_or(HeapError::DeadHandle)?;
        self.heap.decrease_key(&h, key)
    }

    fn pop(&mut self) -> Result<Option<(u32, u64)>, HeapError> {
        if self.heap.is_empty() {
            return Ok(None);
        }
        let (v, k, _, _) = self.heap.pop()?;
        self.handles[v as usize] = None;
        Ok(Some((v, k)))
    }

    fn peek(&mut self) -> Result<Option<(u32, u64)>, HeapError> {
        Ok(self.heap.peek())
    }

    fn counters(&self) -> QueueCounters {
        let stats = self.heap.stats();
        QueueCounters {
            comparisons: self.heap.comparisons(),
            steps: self.heap.steps(),
            pop_steps: stats.pop_steps,
        }
    }
}

pub(crate) fn make_queue(kind: HeapKind, n: usize) -> Box<dyn DijkstraQueue> {
    match kind {
        HeapKind::Binary => Box::new(BinaryQueue::new(n)),
        HeapKind::Fibonacci => Box::new(FibQueue::new(n)),
        HeapKind::Timestamp => Box::new(TsQueue::new(n)),
    }
}

/// Breadth-first reachability check; names the first unreachable vertex.
pub(crate) fn require_reachable(g: &Graph, s: u32) -> Result<(), RunError> {
    let n = g.num_vertices();
    if s as usize >= n {
        return Err(RunError::BadSource(s));
    }
    let mut seen = vec![false; n];
    seen[s as usize] = true;
    let mut frontier = vec![s];
    while let Some(u) = frontier.pop() {
        for &(v, _) in g.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                frontier.push(v);
            }
        }
    }
    match seen.iter().position(|&r| !r) {
        None => Ok(()),
        Some(v) => Err(RunError::Unreachable(v as u32)),
    }
}

/// Run Dijkstra from `s` with the chosen heap. Requires full
/// reachability. Decrease-key fires only on strict improvement; ties in
/// tentative distances never trigger it. The source is pushed, popped,
/// and appears first in the order.
pub fn run(g: &Graph, s: u32, kind: HeapKind) -> Result<DijkstraTrace, RunError> {
    require_reachable(g, s)?;
    let mut queue = make_queue(kind, g.num_vertices());
    execute(g, s, queue.as_mut())
}

fn execute(g: &Graph, s: u32, queue: &mut dyn DijkstraQueue) -> Result<DijkstraTrace, RunError> {
    let n = g.num_vertices();
    let mut dist = vec![INF; n];
    let mut in_heap = vec![false; n];
    let mut timestamps = vec![(0u64, 0u64); n];
    let mut tree = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut counters = TraceCounters::default();
    let mut relax_comparisons = 0u64;
    let mut clock = 0u64;
    let mut live = 0u64;

    dist[s as usize] = 0;
    queue.push(s, 0)?;
    timestamps[s as usize].0 = clock;
    clock += 1;
    in_heap[s as usize] = true;
    counters.pushes = 1;
    live += 1;

    while let Some((u, key)) = queue.pop()? {
        debug_assert_eq!(key, dist[u as usize]);
        counters.heap_size_log_sum += (live as f64).log2();
        live -= 1;
        counters.pops += 1;
        in_heap[u as usize] = false;
        timestamps[u as usize].1 = clock;
        order.push(u);
        for &(v, w) in g.neighbors(u) {
            let vi = v as usize;
            let cand = dist[u as usize]
                .checked_add(w)
                .ok_or(RunError::Overflow)?;
            if dist[vi] == INF {
                dist[vi] = cand;
                tree[vi] = Some(u);
                queue.push(v, cand)?;
                timestamps[vi].0 = clock;
                clock += 1;
                in_heap[vi] = true;
                counters.pushes += 1;
                live += 1;
            } else if in_heap[vi] {
                relax_comparisons += 1;
                if cand < dist[vi] {
                    dist[vi] = cand;
                    queue.decrease_key(v, cand)?;
                    counters.decrease_keys += 1;
                }
            }
        }
    }

    let qc = queue.counters();
    counters.comparisons = relax_comparisons + qc.comparisons;
    counters.heap_steps = qc.steps;
    counters.pop_steps = qc.pop_steps;
    Ok(DijkstraTrace {
        order,
        dist,
        timestamps,
        tree,
        counters,
    })
}

/// Textbook binary-heap Dijkstra with lazy deletion and the same
/// `(distance, vertex)` tie-break; the correctness oracle for the
/// instrumented runners. Returns `(distances, pop order)`.
pub fn run_reference(g: &Graph, s: u32) -> Result<(Vec<u64>, Vec<u32>), RunError> {
    if s as usize >= g.num_vertices() {
        return Err(RunError::BadSource(s));
    }
    let dist = lazy_distances(g, s);
    if let Some(v) = dist.iter().position(|d| d.is_none()) {
        return Err(RunError::Unreachable(v as u32));
    }
    let mut order: Vec<u32> = (0..g.num_vertices() as u32).collect();
    let dist: Vec<u64> = dist.into_iter().map(|d| d.unwrap()).collect();
    order.sort_unstable_by_key(|&v| (dist[v as usize], v));
    Ok((dist, order))
}

/// Plain lazy-deletion Dijkstra scan tolerating unreachable vertices.
pub(crate) fn lazy_distances(g: &Graph, s: u32) -> Vec<Option<u64>> {
    let n = g.num_vertices();
    let mut dist: Vec<Option<u64>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[s as usize] = Some(0);
    heap.push(Reverse((0u64, s)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if dist[u as usize] != Some(d) {
            continue;
        }
        for &(v, w) in g.neighbors(u) {
            let cand = d.saturating_add(w);
            if dist[v as usize].map_or(true, |cur| cand < cur) {
                dist[v as usize] = Some(cand);
                heap.push(Reverse((cand, v)));
            }
        }
    }
    dist
}

/// Residence-time budget: the sum over popped vertices other than the
/// source of `1 + log2(popped_at - pushed_at)`.
pub fn interval_budget(trace: &DijkstraTrace) -> f64 {
    trace
        .order
        .iter()
        .skip(1)
        .map(|&v| {
            let (a, b) = trace.timestamps[v as usize];
            debug_assert!(b > a);
            1.0 + ((b - a) as f64).log2()
        })
        .sum()
}
