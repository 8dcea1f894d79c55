//! Directed, positively integer-weighted graphs with DIMACS shortest-path
//! text I/O and deterministic generator families.
//!
//! Vertices are `0..num_vertices`; the source is carried separately.
//! Graphs are immutable once built and freely shareable across threads.

use std::collections::HashSet;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("edge weight must be at least 1")]
    ZeroWeight,
    #[error("vertex {0} out of range")]
    VertexOutOfRange(u32),
    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),
    #[error("weight arithmetic overflow")]
    Overflow,
}

/// Adjacency-list digraph. All weights are `>= 1`; self-loops are rejected
/// at construction. Parallel arcs are allowed and each counts toward `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<(u32, u64)>>,
    m: usize,
}

impl Graph {
    pub fn new(num_vertices: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); num_vertices],
            m: 0,
        }
    }

    pub fn from_edges(
        num_vertices: usize,
        edges: &[(u32, u32, u64)],
    ) -> Result<Self, GraphError> {
        let mut g = Graph::new(num_vertices);
        for &(u, v, w) in edges {
            g.add_edge(u, v, w)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, u: u32, v: u32, w: u64) -> Result<(), GraphError> {
        let n = self.adj.len() as u32;
        if u >= n {
            return Err(GraphError::VertexOutOfRange(u));
        }
        if v >= n {
            return Err(GraphError::VertexOutOfRange(v));
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        if w == 0 {
            return Err(GraphError::ZeroWeight);
        }
        self.adj[u as usize].push((v, w));
        self.m += 1;
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.m
    }

    pub fn neighbors(&self, u: u32) -> &[(u32, u64)] {
        &self.adj[u as usize]
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, out)| out.iter().map(move |&(v, w)| (u as u32, v, w)))
    }

    /// Smallest weight among parallel `(u, v)` arcs, if any such arc exists.
    pub fn min_edge_weight(&self, u: u32, v: u32) -> Option<u64> {
        self.adj[u as usize]
            .iter()
            .filter(|&&(t, _)| t == v)
            .map(|&(_, w)| w)
            .min()
    }
}

fn next_u64<'a>(
    it: &mut impl Iterator<Item = &'a str>,
    line: usize,
    name: &str,
) -> Result<u64, GraphError> {
    it.next()
        .and_then(|t| t.parse::<u64>().ok())
        .ok_or_else(|| GraphError::Parse {
            line,
            message: format!("bad {name}"),
        })
}

/// Parse DIMACS shortest-path text: a `p sp <n> <m>` header, `a <u> <v> <w>`
/// arcs with 1-indexed vertices, and `c` comment lines. Returns the graph
/// and the default source (vertex 0, the file's vertex 1).
pub fn from_dimacs(text: &str) -> Result<(Graph, u32), GraphError> {
    let mut graph: Option<Graph> = None;
    let mut declared_arcs = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let parse = |message: String| GraphError::Parse { line, message };
        let mut it = raw.split_whitespace();
        match it.next() {
            None | Some("c") => continue,
            Some("p") => {
                if graph.is_some() {
                    return Err(parse("duplicate problem header".into()));
                }
                if it.next() != Some("sp") {
                    return Err(parse("expected 'p sp <n> <m>'".into()));
                }
                let n: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse("bad vertex count".into()))?;
                let m: usize = it
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| parse("bad arc count".into()))?;
                if n == 0 {
                    return Err(parse("graph needs at least one vertex".into()));
                }
                if it.next().is_some() {
                    return Err(parse("trailing tokens after header".into()));
                }
                graph = Some(Graph::new(n));
                declared_arcs = m;
            }
            Some("a") => {
                let g = graph
                    .as_mut()
                    .ok_or_else(|| parse("arc before problem header".into()))?;
                let u = next_u64(&mut it, line, "tail vertex")?;
                let v = next_u64(&mut it, line, "head vertex")?;
                let w = next_u64(&mut it, line, "weight")?;
                if it.next().is_some() {
                    return Err(parse("trailing tokens after arc".into()));
                }
                let n = g.num_vertices() as u64;
                if u == 0 || u > n {
                    return Err(parse(format!("tail vertex {u} out of range")));
                }
                if v == 0 || v > n {
                    return Err(parse(format!("head vertex {v} out of range")));
                }
                if w == 0 {
                    return Err(parse("non-positive weight".into()));
                }
                g.add_edge(u as u32 - 1, v as u32 - 1, w)
                    .map_err(|e| parse(e.to_string()))?;
            }
            Some(other) => {
                return Err(parse(format!("unknown line type '{other}'")));
            }
        }
    }
    let g = graph.ok_or(GraphError::Parse {
        line: 0,
        message: "missing problem header".into(),
    })?;
    if g.num_edges() != declared_arcs {
        return Err(GraphError::Parse {
            line: 0,
            message: format!(
                "header declares {declared_arcs} arcs but {} present",
                g.num_edges()
            ),
        });
    }
    Ok((g, 0))
}

/// Canonical DIMACS emission: header, then arcs sorted by (tail, head,
/// weight), 1-indexed.
pub fn to_dimacs(g: &Graph) -> String {
    let mut arcs: Vec<(u32, u32, u64)> = g.edges().collect();
    arcs.sort_unstable();
    let mut out = String::new();
    let _ = writeln!(out, "p sp {} {}", g.num_vertices(), g.num_edges());
    for (u, v, w) in arcs {
        let _ = writeln!(out, "a {} {} {}", u + 1, v + 1, w);
    }
    out
}

/// Generator family and shape parameters. In every family `n` counts the
/// non-source vertices, matching the `n + 1`-vertex input convention.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FamilySpec {
    /// Directed chain `s -> v1 -> ... -> vn`: every vertex sits alone on
    /// its hop level.
    Path { n: usize },
    /// Source pointing at `n` leaves.
    Star { n: usize },
    /// Random spanning arborescence from the source plus distinct extra
    /// arcs, `n <= m <= n(n-1)`.
    Random { n: usize, m: usize },
    /// Chain of `p` vertices feeding a dense random digraph on `q`
    /// vertices.
    Lollipop { p: usize, q: usize },
    /// `side x side` grid with rightward and downward arcs, source in the
    /// top-left corner.
    Grid { side: usize },
}

pub const DEFAULT_WEIGHT_RANGE: (u64, u64) = (1, 1 << 20);

/// Deterministically generate a `(graph, source)` pair; identical
/// `(family, weights, seed)` inputs yield byte-identical canonical DIMACS.
pub fn gen_family(
    family: &FamilySpec,
    weights: (u64, u64),
    seed: u64,
) -> Result<(Graph, u32), GraphError> {
    let (wlo, whi) = weights;
    if wlo == 0 || wlo > whi {
        return Err(GraphError::InvalidParams(format!(
            "weight range [{wlo}, {whi}] is empty or includes zero"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = move |rng: &mut ChaCha8Rng| rng.random_range(wlo..=whi);
    match *family {
        FamilySpec::Path { n } => {
            if n < 1 {
                return Err(GraphError::InvalidParams("path needs n >= 1".into()));
            }
            let mut g = Graph::new(n + 1);
            for u in 0..n as u32 {
                let wt = w(&mut rng);
                g.add_edge(u, u + 1, wt)?;
            }
            Ok((g, 0))
        }
        FamilySpec::Star { n } => {
            if n < 1 {
                return Err(GraphError::InvalidParams("star needs n >= 1".into()));
            }
            let mut g = Graph::new(n + 1);
            for v in 1..=n as u32 {
                let wt = w(&mut rng);
                g.add_edge(0, v, wt)?;
            }
            Ok((g, 0))
        }
        FamilySpec::Random { n, m } => {
            if n < 1 {
                return Err(GraphError::InvalidParams("random needs n >= 1".into()));
            }
            if m < n {
                return Err(GraphError::InvalidParams(format!(
                    "random needs m >= n = {n} so the source reaches everything"
                )));
            }
            if m > n * (n.saturating_sub(1)).max(1) && n > 1 {
                return Err(GraphError::InvalidParams(format!(
                    "random needs m <= n(n-1) = {}",
                    n * (n - 1)
                )));
            }
            if n == 1 && m > 1 {
                return Err(GraphError::InvalidParams(
                    "random with n = 1 admits only the single source arc".into(),
                ));
            }
            let mut g = Graph::new(n + 1);
            let mut present: HashSet<(u32, u32)> = HashSet::new();
            // Spanning arborescence keeps every instance fully reachable.
            for v in 1..=n as u32 {
                let u = rng.random_range(0..v);
                let wt = w(&mut rng);
                g.add_edge(u, v, wt)?;
                present.insert((u, v));
            }
            while g.num_edges() < m {
                let u = rng.random_range(0..=n as u32);
                let v = rng.random_range(0..=n as u32);
                if u == v || present.contains(&(u, v)) {
                    continue;
                }
                let wt = w(&mut rng);
                g.add_edge(u, v, wt)?;
                present.insert((u, v));
            }
            Ok((g, 0))
        }
        FamilySpec::Lollipop { p, q } => {
            if p < 1 || q < 1 {
                return Err(GraphError::InvalidParams(
                    "lollipop needs p >= 1 and q >= 1".into(),
                ));
            }
            let n = p + q;
            let mut g = Graph::new(n + 1);
            // Chain s -> 1 -> ... -> p, then into the dense part.
            for u in 0..p as u32 {
                let wt = w(&mut rng);
                g.add_edge(u, u + 1, wt)?;
            }
            let entry = p as u32;
            let first_dense = p as u32 + 1;
            let wt = w(&mut rng);
            g.add_edge(entry, first_dense, wt)?;
            let mut reach: HashSet<(u32, u32)> = HashSet::new();
            for v in first_dense + 1..=n as u32 {
                let u = rng.random_range(first_dense..v);
                let wt = w(&mut rng);
                g.add_edge(u, v, wt)?;
                reach.insert((u, v));
            }
            for u in first_dense..=n as u32 {
                for v in first_dense..=n as u32 {
                    if u == v || reach.contains(&(u, v)) {
                        continue;
                    }
                    if rng.random_bool(0.5) {
                        let wt = w(&mut rng);
                        g.add_edge(u, v, wt)?;
                    }
                }
            }
            Ok((g, 0))
        }
        FamilySpec::Grid { side } => {
            if side < 1 {
                return Err(GraphError::InvalidParams("grid needs side >= 1".into()));
            }
            let mut g = Graph::new(side * side);
            let at = |r: usize, c: usize| (r * side + c) as u32;
            for r in 0..side {
                for c in 0..side {
                    if c + 1 < side {
                        let wt = w(&mut rng);
                        g.add_edge(at(r, c), at(r, c + 1), wt)?;
                    }
                    if r + 1 < side {
                        let wt = w(&mut rng);
                        g.add_edge(at(r, c), at(r + 1, c), wt)?;
                    }
                }
            }
            Ok((g, 0))
        }
    }
}

/// What `validate` found. Callers decide whether either finding is fatal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    /// Vertices the source cannot reach.
    pub unreachable: Vec<u32>,
    /// Groups of distinct vertices at equal shortest-path distance.
    pub duplicate_distances: Vec<(u64, Vec<u32>)>,
}

impl ValidationReport {
    pub fn fully_reachable(&self) -> bool {
        self.unreachable.is_empty()
    }

    pub fn distances_distinct(&self) -> bool {
        self.duplicate_distances.is_empty()
    }

    pub fn ok(&self) -> bool {
        self.fully_reachable() && self.distances_distinct()
    }
}

/// Check the standard input assumptions: the source reaches every vertex
/// and no two vertices are equidistant. Uses a reference Dijkstra scan.
pub fn validate(g: &Graph, s: u32) -> ValidationReport {
    let dist = crate::dijkstra::lazy_distances(g, s);
    let mut unreachable = Vec::new();
    let mut reached: Vec<(u64, u32)> = Vec::new();
    for (v, d) in dist.iter().enumerate() {
        match d {
            None => unreachable.push(v as u32),
            Some(d) => reached.push((*d, v as u32)),
        }
    }
    reached.sort_unstable();
    let mut duplicate_distances: Vec<(u64, Vec<u32>)> = Vec::new();
    let mut i = 0;
    while i < reached.len() {
        let mut j = i + 1;
        while j < reached.len() && reached[j].0 == reached[i].0 {
            j += 1;
        }
        if j - i > 1 {
            duplicate_distances.push((reached[i].0, reached[i..j].iter().map(|&(_, v)| v).collect()));
        }
        i = j;
    }
    ValidationReport {
        unreachable,
        duplicate_distances,
    }
}
