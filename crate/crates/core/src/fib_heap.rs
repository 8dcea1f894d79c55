//! Meldable min-heap with constant-time meld, built as a classic Fibonacci
//! heap over an index arena.
//!
//! All heaps belonging to one [`HeapArena`] share its node storage, so
//! melding two of them is a root-list splice that never moves a node:
//! every [`NodeHandle`] stays valid until its element is popped. Handles
//! are arena indices and are never reused within the arena's lifetime.
//!
//! Keys are `u64` values; ties are broken by element id, so comparisons
//! are lexicographic on `(key, element)` and deterministic. The arena
//! counts every link, cut and root-list splice (`steps`) and every key
//! comparison (`comparisons`); tests pin the amortized constants against
//! these counters.

use std::collections::HashSet;

use thiserror::Error;

const NONE: u32 = u32::MAX;

/// Errors shared by the heaps in this crate.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum HeapError {
    #[error("heap is empty")]
    Empty,
    #[error("handle is no longer alive")]
    DeadHandle,
    #[error("element {0} is already alive in this arena")]
    DuplicateElement(u32),
    #[error("new key exceeds the current key")]
    KeyIncrease,
    #[error("{clause} invariant violated: {detail}")]
    Invariant {
        clause: &'static str,
        detail: String,
    },
}

/// Stable identity of one pushed element; alive until that element is popped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeHandle(u32);

impl NodeHandle {
    pub fn index(self) -> u32 {
        self.0
    }
}

struct Node {
    elem: u32,
    key: u64,
    parent: u32,
    child: u32,
    left: u32,
    right: u32,
    degree: u32,
    marked: bool,
    alive: bool,
}

/// Backing store for heap nodes.
///
/// Element ids must be unique among alive elements across the whole arena;
/// this is what makes meld preconditions (disjoint element sets) structural
/// rather than checked.
pub struct HeapArena {
    nodes: Vec<Node>,
    alive_elems: HashSet<u32>,
    steps: u64,
    comparisons: u64,
    degree_table: Vec<u32>,
    root_buf: Vec<u32>,
}

impl Default for HeapArena {
    fn default() -> Self {
        Self::new()
    }
}

impl HeapArena {
    pub fn new() -> Self {
        HeapArena {
            nodes: Vec::new(),
            alive_elems: HashSet::new(),
            steps: 0,
            comparisons: 0,
            degree_table: Vec::new(),
            root_buf: Vec::new(),
        }
    }

    /// Total links, cuts and root-list splices performed so far.
    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Total key comparisons performed so far.
    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    pub fn is_alive(&self, h: NodeHandle) -> bool {
        self.nodes
            .get(h.0 as usize)
            .map(|n| n.alive)
            .unwrap_or(false)
    }

    pub fn element_of(&self, h: NodeHandle) -> u32 {
        self.nodes[h.0 as usize].elem
    }

    pub fn key_of(&self, h: NodeHandle) -> u64 {
        self.nodes[h.0 as usize].key
    }

    fn alloc(&mut self, elem: u32, key: u64) -> u32 {
        let idx = u32::try_from(self.nodes.len()).expect("arena exceeds u32 capacity");
        self.nodes.push(Node {
            elem,
            key,
            parent: NONE,
            child: NONE,
            left: idx,
            right: idx,
            degree: 0,
            marked: false,
            alive: true,
        });
        idx
    }

    #[inline]
    fn pair(&self, x: u32) -> (u64, u32) {
        let n = &self.nodes[x as usize];
        (n.key, n.elem)
    }

    /// Counted lexicographic `(key, element)` comparison.
    #[inline]
    fn lt(&mut self, a: u32, b: u32) -> bool {
        self.comparisons += 1;
        self.pair(a) < self.pair(b)
    }

    /// Insert `x` into the circular list right of `anchor`.
    #[inline]
    fn splice_after(&mut self, anchor: u32, x: u32) {
        let r = self.nodes[anchor as usize].right;
        self.nodes[x as usize].left = anchor;
        self.nodes[x as usize].right = r;
        self.nodes[anchor as usize].right = x;
        self.nodes[r as usize].left = x;
        self.steps += 1;
    }

    /// Remove `x` from its circular sibling list, leaving it a singleton.
    #[inline]
    fn unlink(&mut self, x: u32) {
        let l = self.nodes[x as usize].left;
        let r = self.nodes[x as usize].right;
        self.nodes[l as usize].right = r;
        self.nodes[r as usize].left = l;
        self.nodes[x as usize].left = x;
        self.nodes[x as usize].right = x;
        self.steps += 1;
    }

    /// Cut `x` from its parent and splice it into the root list at `anchor`.
    fn cut_to_root(&mut self, x: u32, anchor: u32) {
        let p = self.nodes[x as usize].parent;
        debug_assert_ne!(p, NONE);
        if self.nodes[p as usize].child == x {
            let r = self.nodes[x as usize].right;
            self.nodes[p as usize].child = if r == x { NONE } else { r };
        }
        self.unlink(x);
        self.nodes[p as usize].degree -= 1;
        self.nodes[x as usize].parent = NONE;
        self.nodes[x as usize].marked = false;
        self.splice_after(anchor, x);
    }

    /// Make the larger-keyed of two roots a child of the smaller; returns
    /// the surviving root.
    fn link(&mut self, a: u32, b: u32) -> u32 {
        let (p, c) = if self.lt(b, a) { (b, a) } else { (a, b) };
        self.nodes[c as usize].parent = p;
        self.nodes[c as usize].marked = false;
        let first = self.nodes[p as usize].child;
        if first == NONE {
            self.nodes[p as usize].child = c;
            self.nodes[c as usize].left = c;
            self.nodes[c as usize].right = c;
            self.steps += 1;
        } else {
            self.splice_after(first, c);
        }
        self.nodes[p as usize].degree += 1;
        p
    }

    fn circle_to_buf(&self, start: u32, buf: &mut Vec<u32>) {
        if start == NONE {
            return;
        }
        let mut x = start;
        loop {
            buf.push(x);
            x = self.nodes[x as usize].right;
            if x == start {
                break;
            }
        }
    }
}

/// Degree-table size for consolidating a heap of `n` elements:
/// ceil(log_phi n) + 1, with a one-slot safety margin.
fn degree_bound(n: usize) -> usize {
    if n < 2 {
        2
    } else {
        ((n as f64).log2() * 1.4405).ceil() as usize + 2
    }
}

/// A min-heap view over nodes stored in a [`HeapArena`].
///
/// The view itself is just a min pointer and a length; the structure lives
/// in the arena, which is what lets [`MeldableHeap::meld`] run in constant
/// time while keeping every handle from both inputs valid.
#[derive(Debug)]
pub struct MeldableHeap {
    min: u32,
    len: usize,
}

impl Default for MeldableHeap {
    fn default() -> Self {
        Self::new()
    }
}

impl MeldableHeap {
    pub fn new() -> Self {
        MeldableHeap { min: NONE, len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Insert an element. Amortized constant work.
    pub fn push(
        &mut self,
        arena: &mut HeapArena,
        elem: u32,
        key: u64,
    ) -> Result<NodeHandle, HeapError> {
        if !arena.alive_elems.insert(elem) {
            return Err(HeapError::DuplicateElement(elem));
        }
        let idx = arena.alloc(elem, key);
        if self.min == NONE {
            self.min = idx;
            arena.steps += 1;
        } else {
            arena.splice_after(self.min, idx);
            if arena.lt(idx, self.min) {
                self.min = idx;
            }
        }
        self.len += 1;
        Ok(NodeHandle(idx))
    }

    /// Lower the key of a live element. Amortized constant work via
    /// cut/cascading-cut.
    pub fn decrease_key(
        &mut self,
        arena: &mut HeapArena,
        handle: NodeHandle,
        new_key: u64,
    ) -> Result<(), HeapError> {
        let x = handle.0;
        let node = arena
            .nodes
            .get(x as usize)
            .ok_or(HeapError::DeadHandle)?;
        if !node.alive {
            return Err(HeapError::DeadHandle);
        }
        if new_key > node.key {
            return Err(HeapError::KeyIncrease);
        }
        arena.nodes[x as usize].key = new_key;
        let p = arena.nodes[x as usize].parent;
        if p != NONE && arena.lt(x, p) {
            arena.cut_to_root(x, self.min);
            let mut y = p;
            loop {
                let z = arena.nodes[y as usize].parent;
                if z == NONE {
                    break;
                }
                if !arena.nodes[y as usize].marked {
                    arena.nodes[y as usize].marked = true;
                    break;
                }
                arena.cut_to_root(y, self.min);
                y = z;
            }
        }
        if arena.lt(x, self.min) {
            self.min = x;
        }
        Ok(())
    }

    /// Minimum element without mutation. Worst-case constant time.
    pub fn peek_min(&self, arena: &HeapArena) -> Option<(u32, u64)> {
        if self.min == NONE {
            None
        } else {
            let n = &arena.nodes[self.min as usize];
            Some((n.elem, n.key))
        }
    }

    /// Remove and return a minimum element. Amortized `O(log n)`;
    /// consolidation leaves at most one root per degree.
    pub fn pop_min(&mut self, arena: &mut HeapArena) -> Result<(u32, u64), HeapError> {
        if self.min == NONE {
            return Err(HeapError::Empty);
        }
        let m = self.min;
        let (key, elem) = arena.pair(m);
        arena.nodes[m as usize].alive = false;
        arena.alive_elems.remove(&elem);

        // Promote children into the root list while `m` is still its anchor.
        let mut children = std::mem::take(&mut arena.root_buf);
        children.clear();
        arena.circle_to_buf(arena.nodes[m as usize].child, &mut children);
        for &c in &children {
            arena.nodes[c as usize].parent = NONE;
            arena.nodes[c as usize].marked = false;
        }
        arena.nodes[m as usize].child = NONE;
        let had_children = !children.is_empty();
        // Children keep their own circle; merge it into the root circle.
        if had_children {
            let c = children[0];
            let m_right = arena.nodes[m as usize].right;
            let c_left = arena.nodes[c as usize].left;
            arena.nodes[m as usize].right = c;
            arena.nodes[c as usize].left = m;
            arena.nodes[c_left as usize].right = m_right;
            arena.nodes[m_right as usize].left = c_left;
            arena.steps += 1;
        }
        let rest = arena.nodes[m as usize].right;
        arena.unlink(m);
        self.len -= 1;

        if rest == m {
            self.min = NONE;
            arena.root_buf = children;
            return Ok((elem, key));
        }

        children.clear();
        arena.circle_to_buf(rest, &mut children);
        let roots = children;

        let bound = degree_bound(self.len);
        let mut table = std::mem::take(&mut arena.degree_table);
        table.clear();
        table.resize(bound, NONE);
        for &r in &roots {
            let mut x = r;
            arena.nodes[x as usize].left = x;
            arena.nodes[x as usize].right = x;
            loop {
                let d = arena.nodes[x as usize].degree as usize;
                if d >= table.len() {
                    table.resize(d + 1, NONE);
                }
                if table[d] == NONE {
                    table[d] = x;
                    break;
                }
                let y = table[d];
                table[d] = NONE;
                x = arena.link(x, y);
            }
        }

        let mut new_min = NONE;
        for slot in 0..table.len() {
            let x = table[slot];
            if x == NONE {
                continue;
            }
            if new_min == NONE {
                new_min = x;
                arena.nodes[x as usize].left = x;
                arena.nodes[x as usize].right = x;
            } else {
                arena.splice_after(new_min, x);
                if arena.lt(x, new_min) {
                    new_min = x;
                }
            }
        }
        self.min = new_min;
        arena.degree_table = table;
        arena.root_buf = roots;
        Ok((elem, key))
    }

    /// Union of two heaps over the same arena. Worst-case constant time:
    /// a root-list splice plus one min comparison. Both inputs are consumed
    /// and all their handles stay valid.
    pub fn meld(self, other: MeldableHeap, arena: &mut HeapArena) -> MeldableHeap {
        match (self.min, other.min) {
            (NONE, _) => other,
            (_, NONE) => self,
            (a, b) => {
                let ar = arena.nodes[a as usize].right;
                let br = arena.nodes[b as usize].right;
                arena.nodes[a as usize].right = br;
                arena.nodes[br as usize].left = a;
                arena.nodes[b as usize].right = ar;
                arena.nodes[ar as usize].left = b;
                arena.steps += 1;
                let min = if arena.lt(b, a) { b } else { a };
                MeldableHeap {
                    min,
                    len: self.len + other.len,
                }
            }
        }
    }

    /// All alive `(element, key)` pairs in this heap, in structure order.
    pub fn elements(&self, arena: &HeapArena) -> Vec<(u32, u64)> {
        let mut out = Vec::with_capacity(self.len);
        if self.min == NONE {
            return out;
        }
        let mut stack = Vec::new();
        arena.circle_to_buf(self.min, &mut stack);
        while let Some(x) = stack.pop() {
            let n = &arena.nodes[x as usize];
            out.push((n.elem, n.key));
            arena.circle_to_buf(n.child, &mut stack);
        }
        out
    }

    /// Full structural audit used by tests: heap order, length, and min
    /// validity.
    pub(crate) fn debug_validate(&self, arena: &HeapArena) -> Result<(), HeapError> {
        let fail = |detail: String| {
            Err(HeapError::Invariant {
                clause: "heap-structure",
                detail,
            })
        };
        if self.min == NONE {
            if self.len != 0 {
                return fail(format!("empty root list but len = {}", self.len));
            }
            return Ok(());
        }
        let mut count = 0usize;
        let mut stack = Vec::new();
        arena.circle_to_buf(self.min, &mut stack);
        let roots = stack.clone();
        for &r in &roots {
            if arena.nodes[r as usize].parent != NONE {
                return fail(format!("root {r} has a parent"));
            }
        }
        while let Some(x) = stack.pop() {
            count += 1;
            let n = &arena.nodes[x as usize];
            if !n.alive {
                return fail(format!("dead node {x} reachable"));
            }
            let mut kids = Vec::new();
            arena.circle_to_buf(n.child, &mut kids);
            if kids.len() != n.degree as usize {
                return fail(format!(
                    "node {x} degree {} but {} children",
                    n.degree,
                    kids.len()
                ));
            }
            for &c in &kids {
                if arena.nodes[c as usize].parent != x {
                    return fail(format!("child {c} does not point back to {x}"));
                }
                if arena.pair(c) < arena.pair(x) {
                    return fail(format!("heap order broken between {x} and child {c}"));
                }
                stack.push(c);
            }
        }
        if count != self.len {
            return fail(format!("len {} but {} reachable nodes", self.len, count));
        }
        let min_pair = arena.pair(self.min);
        for (elem, key) in self.elements(arena) {
            if (key, elem) < min_pair {
                return fail(format!("min pointer misses smaller pair ({key}, {elem})"));
            }
        }
        Ok(())
    }
}
