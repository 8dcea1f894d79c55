//! Single-source shortest paths with fully instrumented heaps.
//!
//! The crate pairs a classic meldable Fibonacci heap with a bucketed
//! variant whose pop cost is logarithmic in how many pushes happened
//! while the popped element was stored, runs Dijkstra's algorithm over
//! either (or a plain binary heap) with identical output, and adds a
//! compressed search that walks single-file graph regions with
//! exponential searches instead of per-vertex heap traffic. An exact
//! small-instance analysis layer counts the realizable vertex orders of
//! a topology and checks the inequalities connecting them to the
//! measured residence-time budgets.
//!
//! Start with the runnable examples (`cargo run --example run_dijkstra`)
//! or the `sssp` binary (`gen`, `run`, `verify`, `bench`, `analyze`).

pub mod analysis;
pub mod bottleneck;
pub mod cli;
pub mod dijkstra;
pub mod fib_heap;
pub mod graph;
pub mod ts_heap;

pub use analysis::{check_bounds, count_linearizations, is_linearization, BoundReport};
pub use bottleneck::{compress, compute_levels, find_bottleneck_paths, run_compressed};
pub use dijkstra::{interval_budget, run, run_reference, DijkstraTrace, HeapKind};
pub use fib_heap::{HeapArena, HeapError, MeldableHeap, NodeHandle};
pub use graph::{from_dimacs, gen_family, to_dimacs, validate, FamilySpec, Graph};
pub use ts_heap::{TimestampHeap, TsHandle};
