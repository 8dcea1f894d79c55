//! Bottleneck-path machinery: hop-level analysis, edge compression, and a
//! Dijkstra variant that walks single-file stretches of the graph with an
//! exponential search instead of individual heap operations, so the number
//! of weight comparisons stops depending on how long those stretches are.
//!
//! A vertex alone on its BFS level is a *bottleneck vertex*: every path
//! from the source to anything at a deeper level runs through it. Maximal
//! runs of bottleneck vertices on consecutive levels form *bottleneck
//! paths*; along such a path each vertex's distance is the head's distance
//! plus a prefix sum of path weights, which is what makes the batch
//! emission sound.

use serde::Serialize;

use crate::dijkstra::{make_queue, require_reachable, DijkstraTrace, HeapKind, RunError, TraceCounters};
use crate::graph::{Graph, GraphError};

/// Hop-distance levels from one BFS over the unweighted graph. Computing
/// them performs no weight comparisons.
#[derive(Debug, Clone)]
pub struct BfsLevels {
    level: Vec<u32>,
    sets: Vec<Vec<u32>>,
}

impl BfsLevels {
    /// One plus the maximum hop distance.
    pub fn depth(&self) -> usize {
        self.sets.len()
    }

    pub fn level_of(&self, v: u32) -> u32 {
        self.level[v as usize]
    }

    pub fn level_sets(&self) -> &[Vec<u32>] {
        &self.sets
    }
}

pub fn compute_levels(g: &Graph, s: u32) -> Result<BfsLevels, RunError> {
    require_reachable(g, s)?;
    let n = g.num_vertices();
    let mut level = vec![u32::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    level[s as usize] = 0;
    queue.push_back(s);
    let mut sets: Vec<Vec<u32>> = vec![vec![s]];
    while let Some(u) = queue.pop_front() {
        for &(v, _) in g.neighbors(u) {
            if level[v as usize] == u32::MAX {
                let l = level[u as usize] + 1;
                level[v as usize] = l;
                if sets.len() == l as usize {
                    sets.push(Vec::new());
                }
                sets[l as usize].push(v);
                queue.push_back(v);
            }
        }
    }
    Ok(BfsLevels { level, sets })
}

/// A maximal run of bottleneck vertices on consecutive levels, with
/// prefix sums of the connecting edge weights: `prefix[i]` is the path
/// weight from `vertices[0]` to `vertices[i]`.
#[derive(Debug, Clone)]
pub struct BottleneckPath {
    pub vertices: Vec<u32>,
    pub prefix: Vec<u64>,
}

impl BottleneckPath {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Group consecutive singleton levels into maximal paths. Disjoint, and
/// together they cover exactly the bottleneck vertices. The consecutive
/// edge always exists: a vertex alone on level `i + 1` can only be
/// reached from the single vertex on level `i`.
pub fn find_bottleneck_paths(
    g: &Graph,
    levels: &BfsLevels,
) -> Result<Vec<BottleneckPath>, GraphError> {
    let mut paths = Vec::new();
    let mut current: Vec<u32> = Vec::new();
    for set in levels.level_sets() {
        if set.len() == 1 {
            current.push(set[0]);
        } else if !current.is_empty() {
            paths.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        paths.push(current);
    }
    paths
        .into_iter()
        .map(|vertices| {
            let mut prefix = Vec::with_capacity(vertices.len());
            prefix.push(0u64);
            for w in vertices.windows(2) {
                let weight = g
                    .min_edge_weight(w[0], w[1])
                    .expect("consecutive singleton levels are edge-connected");
                let last = *prefix.last().unwrap();
                prefix.push(last.checked_add(weight).ok_or(GraphError::Overflow)?);
            }
            Ok(BottleneckPath { vertices, prefix })
        })
        .collect()
}

/// Reroute every outgoing edge of a non-head path vertex to leave from the
/// path head with the prefix weight added; the successor edges along the
/// path are kept. Additions only, no weight comparisons. Distances from
/// the source are preserved exactly.
pub fn compress(g: &Graph, paths: &[BottleneckPath]) -> Result<Graph, GraphError> {
    let n = g.num_vertices();
    let mut role: Vec<Option<(u32, u32)>> = vec![None; n];
    for (pi, path) in paths.iter().enumerate() {
        for (pos, &v) in path.vertices.iter().enumerate() {
            role[v as usize] = Some((pi as u32, pos as u32));
        }
    }
    let mut out = Graph::new(n);
    let mut rerouted: Vec<(u32, u32, u64)> = Vec::new();
    for u in 0..n as u32 {
        match role[u as usize] {
            Some((pi, pos)) if pos >= 1 => {
                let path = &paths[pi as usize];
                let pos = pos as usize;
                let successor = path.vertices.get(pos + 1).copied();
                let head = path.vertices[0];
                for &(v, w) in g.neighbors(u) {
                    if Some(v) == successor {
                        out.add_edge(u, v, w)?;
                    } else {
                        let w2 = path.prefix[pos].checked_add(w).ok_or(GraphError::Overflow)?;
                        if v != head {
                            rerouted.push((head, v, w2));
                        }
                        // An edge back to the head would become a
                        // self-loop; it can never improve a distance, so
                        // it is dropped.
                    }
                }
            }
            _ => {
                for &(v, w) in g.neighbors(u) {
                    out.add_edge(u, v, w)?;
                }
            }
        }
    }
    for (u, v, w) in rerouted {
        out.add_edge(u, v, w)?;
    }
    Ok(out)
}

/// Counter for edge-weight comparisons; everything else is free in this
/// cost model.
#[derive(Debug, Default, Clone, Copy, Serialize)]
pub struct ComparisonCounter {
    count: u64,
}

impl ComparisonCounter {
    pub fn new() -> Self {
        ComparisonCounter { count: 0 }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn bump(&mut self) {
        self.count += 1;
    }
}

/// Find the maximal `j >= start` such that the path vertex at `j` has
/// distance strictly below `threshold`, where position `q` has distance
/// `base_distance + (prefix[q] - prefix[start])` and comparisons order
/// `(distance, vertex)` pairs. `None` means an empty heap: every
/// remaining vertex qualifies and no comparison is counted. Galloping
/// then binary search, `O(1 + log2(j - start + 1))` counted comparisons.
pub fn exponential_search(
    path: &BottleneckPath,
    start: usize,
    base_distance: u64,
    threshold: Option<(u64, u32)>,
    counter: &mut ComparisonCounter,
) -> Result<usize, RunError> {
    let last = path.len().checked_sub(1).ok_or(RunError::PathIndex(0))?;
    if start > last {
        return Err(RunError::PathIndex(start));
    }
    let Some(threshold) = threshold else {
        return Ok(last);
    };
    let dist_at = |q: usize| -> Result<(u64, u32), RunError> {
        let d = base_distance
            .checked_add(path.prefix[q] - path.prefix[start])
            .ok_or(RunError::Overflow)?;
        Ok((d, path.vertices[q]))
    };
    let below = |q: usize, counter: &mut ComparisonCounter| -> Result<bool, RunError> {
        counter.bump();
        Ok(dist_at(q)? < threshold)
    };
    // Gallop for an upper bracket.
    let mut j = start;
    let mut step = 1usize;
    while j + step <= last && below(j + step, counter)? {
        j += step;
        step <<= 1;
    }
    // Binary search in (j, min(j + step, last + 1)).
    let mut lo = j + 1;
    let mut hi = (j + step).min(last + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if below(mid, counter)? {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Ok(lo - 1)
}

/// Per-pop classification and search stats from one compressed run.
pub struct CompressedRun {
    pub trace: DijkstraTrace,
    /// For each heap pop that produced output, whether the popped vertex
    /// was a bottleneck vertex.
    pub pop_is_bottleneck: Vec<bool>,
    pub searches: u64,
}

/// Dijkstra over the compressed graph. Popping a bottleneck-path vertex
/// consults the heap minimum once and emits the longest affordable path
/// prefix in bulk, filling distances from prefix sums. Output order and
/// distances match `dijkstra::run` on the original graph exactly.
pub fn run_compressed(g: &Graph, s: u32, kind: HeapKind) -> Result<DijkstraTrace, RunError> {
    run_compressed_detailed(g, s, kind).map(|r| r.trace)
}

pub fn run_compressed_detailed(
    g: &Graph,
    s: u32,
    kind: HeapKind,
) -> Result<CompressedRun, RunError> {
    let levels = compute_levels(g, s)?;
    let paths = find_bottleneck_paths(g, &levels).map_err(|_| RunError::Overflow)?;
    let gc = compress(g, &paths).map_err(|_| RunError::Overflow)?;

    let n = g.num_vertices();
    let mut role: Vec<Option<(u32, u32)>> = vec![None; n];
    for (pi, path) in paths.iter().enumerate() {
        for (pos, &v) in path.vertices.iter().enumerate() {
            role[v as usize] = Some((pi as u32, pos as u32));
        }
    }

    const INF: u64 = u64::MAX;
    let mut queue = make_queue(kind, n);
    let mut dist = vec![INF; n];
    let mut in_heap = vec![false; n];
    let mut settled = vec![false; n];
    let mut timestamps = vec![(0u64, 0u64); n];
    let mut tree = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut counters = TraceCounters::default();
    let mut counter = ComparisonCounter::new();
    let mut relax_comparisons = 0u64;
    let mut clock = 0u64;
    let mut live = 0u64;
    let mut pop_is_bottleneck = Vec::new();
    let mut searches = 0u64;

    dist[s as usize] = 0;
    queue.push(s, 0)?;
    timestamps[s as usize].0 = clock;
    clock += 1;
    in_heap[s as usize] = true;
    counters.pushes = 1;
    live += 1;

    while let Some((u0, key)) = queue.pop()? {
        counters.pops += 1;
        in_heap[u0 as usize] = false;
        live -= 1;
        if settled[u0 as usize] {
            // Stale entry for a vertex already emitted through a path.
            continue;
        }
        debug_assert_eq!(key, dist[u0 as usize]);
        counters.heap_size_log_sum += ((live + 1) as f64).log2();
        settled[u0 as usize] = true;
        timestamps[u0 as usize].1 = clock;
        order.push(u0);
        pop_is_bottleneck.push(role[u0 as usize].is_some());

        let mut endpoint = None;
        if let Some((pi, pos)) = role[u0 as usize] {
            let path = &paths[pi as usize];
            let pos = pos as usize;
            let threshold = queue.peek()?.map(|(v, k)| (k, v));
            let j = exponential_search(path, pos, dist[u0 as usize], threshold, &mut counter)?;
            searches += 1;
            for q in pos + 1..=j {
                let v = path.vertices[q];
                let vi = v as usize;
                debug_assert!(!settled[vi]);
                dist[vi] = dist[u0 as usize]
                    .checked_add(path.prefix[q] - path.prefix[pos])
                    .ok_or(RunError::Overflow)?;
                tree[vi] = Some(path.vertices[q - 1]);
                settled[vi] = true;
                // Never on the heap: nominal unit stamps at the current
                // clock.
                timestamps[vi] = (clock, clock + 1);
                order.push(v);
            }
            if j > pos {
                endpoint = Some(path.vertices[j]);
            }
        }

        // Relax the popped vertex's edges (for a path head this includes
        // the rerouted bundle of the whole path) and, after an emission,
        // the endpoint's successor edge. Interior emitted vertices only
        // carry successor edges into already-settled vertices.
        for u in std::iter::once(u0).chain(endpoint) {
            for &(v, w) in gc.neighbors(u) {
                let vi = v as usize;
                let cand = dist[u as usize]
                    .checked_add(w)
                    .ok_or(RunError::Overflow)?;
                if settled[vi] {
                    continue;
                }
                if dist[vi] == INF {
                    dist[vi] = cand;
                    tree[vi] = Some(u);
                    queue.push(v, cand)?;
                    timestamps[vi].0 = clock;
                    clock += 1;
                    in_heap[vi] = true;
                    counters.pushes += 1;
                    live += 1;
                } else {
                    debug_assert!(in_heap[vi]);
                    relax_comparisons += 1;
                    if cand < dist[vi] {
                        dist[vi] = cand;
                        queue.decrease_key(v, cand)?;
                        counters.decrease_keys += 1;
                    }
                }
            }
        }
    }

    let qc = queue.counters();
    counters.comparisons = relax_comparisons + qc.comparisons + counter.count();
    counters.heap_steps = qc.steps;
    counters.pop_steps = qc.pop_steps;
    Ok(CompressedRun {
        trace: DijkstraTrace {
            order,
            dist,
            timestamps,
            tree,
            counters,
        },
        pop_is_bottleneck,
        searches,
    })
}

/// Forward-edge counts under both candidate rules. An edge `(u, v)` with
/// `dist(v) > dist(u)` is forward when its reverse is not a first-push
/// tree edge; the `excluding_tree` rule additionally drops edges that are
/// themselves tree edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ForwardEdgeCounts {
    pub including_tree: usize,
    pub excluding_tree: usize,
}

pub fn forward_edge_counts(g: &Graph, trace: &DijkstraTrace) -> ForwardEdgeCounts {
    let mut including_tree = 0;
    let mut excluding_tree = 0;
    for (u, v, _) in g.edges() {
        if trace.dist[v as usize] <= trace.dist[u as usize] {
            continue;
        }
        let reverse_in_tree = trace.tree[u as usize] == Some(v);
        if reverse_in_tree {
            continue;
        }
        including_tree += 1;
        if trace.tree[v as usize] != Some(u) {
            excluding_tree += 1;
        }
    }
    ForwardEdgeCounts {
        including_tree,
        excluding_tree,
    }
}
