//! A heap whose pop cost tracks how long the popped element sat in the
//! structure, measured on a clock that ticks once per push.
//!
//! Elements are partitioned by push time into buckets of Fibonacci heaps.
//! Each inner heap carries a half-open interval `[lo, hi)` of push times;
//! an element lives in the heap whose interval contains its push time.
//! Bucket `j` holds one or two heaps with intervals of size exactly `2^j`,
//! lower-indexed buckets hold newer intervals, and all intervals together
//! tile `[0, t)`. Pushing adds a fresh size-1 interval to bucket 0 and
//! carries like a redundant binary counter: whenever a bucket holds three
//! heaps, its two oldest are melded (constant time) and promoted one
//! bucket up.
//!
//! A minima array `M` keeps each bucket's smallest `(key, element)` pair
//! and a suffix-minima bitmask marks the buckets whose minimum is no
//! larger than every higher bucket's. The lowest set bit therefore names
//! the bucket holding the global minimum, so push and decrease-key are
//! amortized constant and popping an element pushed `age` ticks ago costs
//! `O(1 + log2 age)`: the element sits in a heap of at most `2^j <= 2*age`
//! elements and only mask bits `j..0` need refreshing.
//!
//! Interval heaps whose elements are all popped keep their intervals, so
//! the tiling of `[0, t)` stays literally true and bucket lookup stays a
//! two-word computation.

use std::collections::HashMap;

use crate::fib_heap::{HeapArena, HeapError, MeldableHeap, NodeHandle};

/// Bucket minima entry: `(key, element)` or `None` for "no alive element".
type MinEntry = Option<(u64, u32)>;

/// One Fibonacci heap tagged with the half-open interval of push times it
/// is responsible for. The heap may be empty of elements; the interval is
/// still part of the clock tiling.
pub struct IntervalHeap {
    heap: MeldableHeap,
    lo: u64,
    hi: u64,
}

impl IntervalHeap {
    pub fn interval(&self) -> (u64, u64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// Handle to an alive element of a [`TimestampHeap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TsHandle {
    elem: u32,
    pushed_at: u64,
    node: NodeHandle,
}

impl TsHandle {
    pub fn element(self) -> u32 {
        self.elem
    }

    /// Clock value at push time.
    pub fn pushed_at(self) -> u64 {
        self.pushed_at
    }
}

/// Per-operation-class instrumentation. Structural steps cover inner heap
/// links/cuts/splices plus bucket carries, probes and mask updates.
#[derive(Debug, Default, Clone, Copy)]
pub struct TsHeapStats {
    pub pushes: u64,
    pub pops: u64,
    pub decrease_keys: u64,
    pub push_steps: u64,
    pub pop_steps: u64,
    pub decrease_steps: u64,
}

pub struct TimestampHeap {
    arena: HeapArena,
    clock: u64,
    buckets: Vec<Vec<IntervalHeap>>,
    minima: Vec<MinEntry>,
    /// Bit `j` set when bucket `j`'s minimum is `<=` every higher bucket's.
    mask: u64,
    alive: HashMap<u32, (u64, NodeHandle)>,
    len: usize,
    own_steps: u64,
    own_comparisons: u64,
    stats: TsHeapStats,
}

impl Default for TimestampHeap {
    fn default() -> Self {
        Self::new()
    }
}

/// `a <= b` under the "None is plus infinity" order on minima entries.
/// Counts as a key comparison only when two real keys meet.
fn le_entry(a: MinEntry, b: MinEntry, comparisons: &mut u64) -> bool {
    match (a, b) {
        (None, None) => true,
        (None, Some(_)) => false,
        (Some(_), None) => true,
        (Some(x), Some(y)) => {
            *comparisons += 1;
            x <= y
        }
    }
}

fn lt_entry(a: MinEntry, b: MinEntry, comparisons: &mut u64) -> bool {
    match (a, b) {
        (None, _) => false,
        (Some(_), None) => true,
        (Some(x), Some(y)) => {
            *comparisons += 1;
            x < y
        }
    }
}

impl TimestampHeap {
    pub fn new() -> Self {
        TimestampHeap {
            arena: HeapArena::new(),
            clock: 0,
            buckets: Vec::new(),
            minima: Vec::new(),
            mask: 0,
            alive: HashMap::new(),
            len: 0,
            own_steps: 0,
            own_comparisons: 0,
            stats: TsHeapStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Current clock value; increments after every push, never on pop.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn stats(&self) -> TsHeapStats {
        self.stats
    }

    /// Total structural steps, inner heap work included.
    pub fn steps(&self) -> u64 {
        self.arena.steps() + self.own_steps
    }

    /// Total key comparisons, inner heap work included.
    pub fn comparisons(&self) -> u64 {
        self.arena.comparisons() + self.own_comparisons
    }

    pub fn suffix_mask(&self) -> u64 {
        self.mask
    }

    /// Interval layout per bucket, oldest interval first.
    pub fn bucket_intervals(&self) -> Vec<Vec<(u64, u64)>> {
        self.buckets
            .iter()
            .map(|b| b.iter().map(|ih| (ih.lo, ih.hi)).collect())
            .collect()
    }

    pub fn bucket_minima(&self) -> &[MinEntry] {
        &self.minima
    }

    /// The element the next `pop` returns, without mutation.
    pub fn peek(&self) -> Option<(u32, u64)> {
        if self.len == 0 {
            return None;
        }
        let j = self.mask.trailing_zeros() as usize;
        let (key, elem) = self.minima[j].expect("lowest set bit names a populated bucket");
        Some((elem, key))
    }

    fn bucket_min(&mut self, j: usize) -> MinEntry {
        let mut best: MinEntry = None;
        for pos in 0..self.buckets[j].len() {
            let peeked = self.buckets[j][pos].heap.peek_min(&self.arena);
            if let Some((elem, key)) = peeked {
                let cand = Some((key, elem));
                best = if le_entry(best, cand, &mut self.own_comparisons) {
                    best
                } else {
                    cand
                };
            }
        }
        best
    }

    /// Recompute mask bit `x` from the minima array and the bits above it.
    fn recompute_bit(&mut self, x: usize) {
        self.own_steps += 1;
        let above = if x + 1 >= 64 { 0 } else { self.mask >> (x + 1) };
        let set = if above == 0 {
            true
        } else {
            let k = x + 1 + above.trailing_zeros() as usize;
            le_entry(self.minima[x], self.minima[k], &mut self.own_comparisons)
        };
        if set {
            self.mask |= 1 << x;
        } else {
            self.mask &= !(1 << x);
        }
    }

    /// Insert an element with the next clock value as its push time.
    /// Amortized constant work.
    pub fn push(&mut self, elem: u32, key: u64) -> Result<TsHandle, HeapError> {
        if self.alive.contains_key(&elem) {
            return Err(HeapError::DuplicateElement(elem));
        }
        assert!(self.clock < 1 << 62, "clock exceeds bitmask capacity");
        let steps0 = self.arena.steps() + self.own_steps;

        let pushed_at = self.clock;
        self.clock += 1;
        let mut heap = MeldableHeap::new();
        let node = heap.push(&mut self.arena, elem, key)?;
        if self.buckets.is_empty() {
            self.buckets.push(Vec::with_capacity(3));
            self.minima.push(None);
        }
        self.buckets[0].push(IntervalHeap {
            heap,
            lo: pushed_at,
            hi: pushed_at + 1,
        });
        self.alive.insert(elem, (pushed_at, node));
        self.len += 1;

        // Carry like a redundant binary counter: a bucket never holds
        // three heaps once the push completes.
        let mut top_touched = 0;
        let mut j = 0;
        while j < self.buckets.len() && self.buckets[j].len() > 2 {
            self.own_steps += 1;
            let mut drained = self.buckets[j].drain(0..2);
            let oldest = drained.next().unwrap();
            let second = drained.next().unwrap();
            drop(drained);
            debug_assert_eq!(oldest.hi, second.lo, "carried intervals must be adjacent");
            let merged = oldest.heap.meld(second.heap, &mut self.arena);
            if j + 1 == self.buckets.len() {
                self.buckets.push(Vec::with_capacity(3));
                self.minima.push(None);
            }
            self.buckets[j + 1].push(IntervalHeap {
                heap: merged,
                lo: oldest.lo,
                hi: second.hi,
            });
            top_touched = j + 1;
            j += 1;
        }

        for x in 0..=top_touched {
            self.minima[x] = self.bucket_min(x);
        }
        for x in (0..=top_touched).rev() {
            self.recompute_bit(x);
        }

        self.stats.pushes += 1;
        self.stats.push_steps += self.arena.steps() + self.own_steps - steps0;
        Ok(TsHandle {
            elem,
            pushed_at,
            node,
        })
    }

    /// Bucket and in-bucket position of a handle's interval heap.
    /// Constant work: probes a four-bucket window around
    /// `floor(log2(clock - pushed_at))`.
    fn locate_idx(&mut self, handle: &TsHandle) -> Result<(usize, usize), HeapError> {
        if !self.arena.is_alive(handle.node) || self.arena.element_of(handle.node) != handle.elem {
            return Err(HeapError::DeadHandle);
        }
        let age = self.clock - handle.pushed_at;
        debug_assert!(age >= 1);
        let l = (63 - age.leading_zeros()) as usize;
        let lo_j = l.saturating_sub(2);
        let hi_j = (l + 1).min(self.buckets.len().saturating_sub(1));
        for j in lo_j..=hi_j {
            self.own_steps += 1;
            for (pos, ih) in self.buckets[j].iter().enumerate() {
                if ih.lo <= handle.pushed_at && handle.pushed_at < ih.hi {
                    if j + 1 < l {
                        // Outside the expected three-bucket window; the
                        // probe window is deliberately one wider.
                        log::warn!(
                            "bucket probe found age {age} in bucket {j}, expected within [{}, {}]",
                            l.saturating_sub(1),
                            l + 1
                        );
                    }
                    return Ok((j, pos));
                }
            }
        }
        Err(HeapError::Invariant {
            clause: "bucket-window",
            detail: format!(
                "push time {} (age {age}) not found in buckets {lo_j}..={hi_j}",
                handle.pushed_at
            ),
        })
    }

    /// Bucket index and interval containing a handle, without mutation.
    pub fn locate(&self, handle: &TsHandle) -> Result<(usize, (u64, u64)), HeapError> {
        if !self.arena.is_alive(handle.node) || self.arena.element_of(handle.node) != handle.elem {
            return Err(HeapError::DeadHandle);
        }
        let age = self.clock - handle.pushed_at;
        let l = (63 - age.leading_zeros()) as usize;
        let lo_j = l.saturating_sub(2);
        let hi_j = (l + 1).min(self.buckets.len().saturating_sub(1));
        for j in lo_j..=hi_j {
            for ih in &self.buckets[j] {
                if ih.lo <= handle.pushed_at && handle.pushed_at < ih.hi {
                    return Ok((j, (ih.lo, ih.hi)));
                }
            }
        }
        Err(HeapError::Invariant {
            clause: "bucket-window",
            detail: format!("push time {} not found near bucket {l}", handle.pushed_at),
        })
    }

    /// Lower the key of an alive element. Amortized constant work; stale
    /// suffix-minima bits below the touched bucket are cleared, never set.
    pub fn decrease_key(&mut self, handle: &TsHandle, new_key: u64) -> Result<(), HeapError> {
        let steps0 = self.arena.steps() + self.own_steps;
        let (j, pos) = self.locate_idx(handle)?;
        self.buckets[j][pos]
            .heap
            .decrease_key(&mut self.arena, handle.node, new_key)?;
        self.minima[j] = self.bucket_min(j);
        self.recompute_bit(j);
        if self.mask & (1 << j) != 0 && j > 0 {
            let mut below = self.mask & ((1u64 << j) - 1);
            while below != 0 {
                let jp = (63 - below.leading_zeros()) as usize;
                if lt_entry(self.minima[j], self.minima[jp], &mut self.own_comparisons) {
                    self.own_steps += 1;
                    self.mask &= !(1 << jp);
                    below &= !(1 << jp);
                } else {
                    break;
                }
            }
        }
        self.stats.decrease_keys += 1;
        self.stats.decrease_steps += self.arena.steps() + self.own_steps - steps0;
        Ok(())
    }

    /// Remove the minimum element. Returns `(element, key, pushed_at,
    /// popped_at)`; the clock does not advance. Amortized work is
    /// `O(1 + log2(popped_at - pushed_at))`.
    pub fn pop(&mut self) -> Result<(u32, u64, u64, u64), HeapError> {
        if self.len == 0 {
            return Err(HeapError::Empty);
        }
        let steps0 = self.arena.steps() + self.own_steps;
        let j = self.mask.trailing_zeros() as usize;
        debug_assert!(j < self.buckets.len());

        // Peek both heaps of the bucket; pop from the one holding the min.
        let mut chosen: Option<(usize, (u64, u32))> = None;
        for pos in 0..self.buckets[j].len() {
            if let Some((elem, key)) = self.buckets[j][pos].heap.peek_min(&self.arena) {
                let cand = (key, elem);
                chosen = match chosen {
                    None => Some((pos, cand)),
                    Some((bp, best)) => {
                        self.own_comparisons += 1;
                        if cand < best {
                            Some((pos, cand))
                        } else {
                            Some((bp, best))
                        }
                    }
                };
            }
        }
        let (pos, best) = chosen.ok_or_else(|| HeapError::Invariant {
            clause: "suffix-mask",
            detail: format!("lowest set bit {j} names a bucket with no alive elements"),
        })?;
        debug_assert_eq!(Some(best), self.minima[j]);

        let (elem, key) = self.buckets[j][pos].heap.pop_min(&mut self.arena)?;
        let (pushed_at, _) = self
            .alive
            .remove(&elem)
            .expect("popped element present in directory");
        self.len -= 1;
        let popped_at = self.clock;

        self.minima[j] = self.bucket_min(j);
        for l in (0..=j).rev() {
            self.recompute_bit(l);
        }

        self.stats.pops += 1;
        self.stats.pop_steps += self.arena.steps() + self.own_steps - steps0;
        Ok((elem, key, pushed_at, popped_at))
    }

    /// Full-scan audit of every maintained invariant; names the violated
    /// clause. Linear time, meant for tests and the verification harness.
    pub fn check_invariants(&self) -> Result<(), HeapError> {
        let fail = |clause: &'static str, detail: String| {
            Err(HeapError::Invariant { clause, detail })
        };

        // Interval sizes, per-bucket capacity, in-bucket ordering.
        for (j, bucket) in self.buckets.iter().enumerate() {
            if bucket.len() > 2 {
                return fail(
                    "bucket-capacity",
                    format!("bucket {j} holds {} interval heaps", bucket.len()),
                );
            }
            for ih in bucket {
                if ih.hi <= ih.lo || ih.hi - ih.lo != 1u64 << j {
                    return fail(
                        "interval-size",
                        format!("bucket {j} holds interval [{}, {})", ih.lo, ih.hi),
                    );
                }
            }
            for w in bucket.windows(2) {
                if w[0].hi > w[1].lo {
                    return fail(
                        "bucket-order",
                        format!("bucket {j} intervals not oldest-first"),
                    );
                }
            }
        }

        // Lower-indexed buckets hold strictly newer intervals.
        for j in 1..self.buckets.len() {
            let newest_hi = self.buckets[j].iter().map(|ih| ih.hi).max();
            let oldest_lo = self.buckets[j - 1].iter().map(|ih| ih.lo).min();
            if let (Some(hi), Some(lo)) = (newest_hi, oldest_lo) {
                if hi > lo {
                    return fail(
                        "bucket-order",
                        format!("bucket {} intervals not right of bucket {j}", j - 1),
                    );
                }
            }
        }

        // All intervals tile [0, clock).
        let mut intervals: Vec<(u64, u64)> = self
            .buckets
            .iter()
            .flatten()
            .map(|ih| (ih.lo, ih.hi))
            .collect();
        intervals.sort_unstable();
        let mut expect = 0;
        for &(lo, hi) in &intervals {
            if lo != expect {
                return fail(
                    "interval-partition",
                    format!("gap or overlap at {expect}, next interval starts at {lo}"),
                );
            }
            expect = hi;
        }
        if expect != self.clock {
            return fail(
                "interval-partition",
                format!("intervals cover [0, {expect}) but clock is {}", self.clock),
            );
        }

        // Element membership: each alive element sits in exactly the heap
        // whose interval contains its push time.
        let mut seen: HashMap<u32, (usize, u64)> = HashMap::new();
        for (j, bucket) in self.buckets.iter().enumerate() {
            for ih in bucket {
                ih.heap.debug_validate(&self.arena)?;
                for (elem, key) in ih.heap.elements(&self.arena) {
                    let Some(&(pushed_at, _)) = self.alive.get(&elem) else {
                        return fail(
                            "interval-membership",
                            format!("element {elem} stored but not in the alive directory"),
                        );
                    };
                    if !(ih.lo <= pushed_at && pushed_at < ih.hi) {
                        return fail(
                            "interval-membership",
                            format!(
                                "element {elem} pushed at {pushed_at} stored in [{}, {})",
                                ih.lo, ih.hi
                            ),
                        );
                    }
                    if seen.insert(elem, (j, key)).is_some() {
                        return fail(
                            "interval-membership",
                            format!("element {elem} stored in two heaps"),
                        );
                    }
                }
            }
        }
        if seen.len() != self.alive.len() {
            return fail(
                "interval-membership",
                format!(
                    "{} directory entries but {} stored elements",
                    self.alive.len(),
                    seen.len()
                ),
            );
        }

        // Minima array matches bucket contents.
        for j in 0..self.buckets.len() {
            let expected = seen
                .iter()
                .filter(|(_, &(b, _))| b == j)
                .map(|(&elem, &(_, key))| (key, elem))
                .min();
            if expected != self.minima[j] {
                return fail(
                    "minima-array",
                    format!(
                        "bucket {j} minima entry {:?} but contents say {expected:?}",
                        self.minima[j]
                    ),
                );
            }
        }

        // Suffix-minima bitmask matches its definition.
        if self.buckets.len() < 64 && self.mask >> self.buckets.len() != 0 {
            return fail("suffix-mask", "bit set beyond the last bucket".to_string());
        }
        let mut cmp = 0u64;
        for j in 0..self.buckets.len() {
            let expected = (j + 1..self.buckets.len())
                .all(|k| le_entry(self.minima[j], self.minima[k], &mut cmp));
            if expected != (self.mask & (1 << j) != 0) {
                return fail(
                    "suffix-mask",
                    format!("bit {j} is {}, definition says {expected}", !expected),
                );
            }
        }

        // Every alive element's bucket sits in the probe window around
        // floor(log2(age)).
        for (&elem, &(pushed_at, _)) in &self.alive {
            let (j, _) = seen
                .get(&elem)
                .copied()
                .expect("membership already checked");
            let age = self.clock - pushed_at;
            let l = (63 - age.leading_zeros()) as usize;
            if j + 1 < l || j > l + 1 {
                return fail(
                    "bucket-window",
                    format!("element {elem} with age {age} lives in bucket {j}"),
                );
            }
        }
        Ok(())
    }

    /// Test-only corruption hook for the negative invariant test.
    #[doc(hidden)]
    pub fn debug_flip_suffix_bit(&mut self, j: usize) {
        self.mask ^= 1 << j;
    }
}
