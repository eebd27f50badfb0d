//! Undirected graphs with the self-loop convention used throughout the crate:
//! every node is its own neighbor, so `degree(i) == neighbors(i).len()`.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{input_err, Error, Result};

/// Immutable undirected graph in compressed sparse row form.
///
/// Neighbor lists are sorted ascending, duplicate-free and always contain the
/// node itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

/// Per-node neighbor counts, self included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeProfile(Vec<u32>);

/// Shortest hop count between two nodes, or `Unreachable` when the nodes are
/// disconnected or farther apart than the query cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum HopDistance {
    Hops(usize),
    Unreachable,
}

impl HopDistance {
    pub fn hops(self) -> Option<usize> {
        match self {
            HopDistance::Hops(h) => Some(h),
            HopDistance::Unreachable => None,
        }
    }
}

impl Graph {
    /// Builds a graph on nodes `0..n` from unordered pairs.
    ///
    /// Self-loops are added for every node regardless of the input, duplicate
    /// and reversed pairs collapse to a single edge.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return input_err("graph must have at least one node");
        }
        if n > u32::MAX as usize {
            return input_err(format!("node count {n} exceeds u32 range"));
        }
        let mut lists: Vec<Vec<u32>> = (0..n).map(|i| vec![i as u32]).collect();
        for &(a, b) in edges {
            if a >= n || b >= n {
                return input_err(format!("edge ({a}, {b}) has an endpoint outside 0..{n}"));
            }
            if a != b {
                lists[a].push(b as u32);
                lists[b].push(a as u32);
            }
        }
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self::from_sorted_lists(lists))
    }

    /// Assembles a graph from neighbor lists that are already sorted,
    /// deduplicated, symmetric and self-inclusive.
    pub(crate) fn from_sorted_lists(lists: Vec<Vec<u32>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let total: usize = lists.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        for list in lists {
            debug_assert!(list.windows(2).all(|w| w[0] < w[1]));
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Self { offsets, targets }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of distinct non-self edges.
    pub fn edge_count(&self) -> usize {
        (self.targets.len() - self.node_count()) / 2
    }

    /// Sorted neighbors of `i`, including `i` itself.
    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.targets[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn is_adjacent(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&(j as u32)).is_ok()
    }

    pub fn degree(&self, i: usize) -> u32 {
        (self.offsets[i + 1] - self.offsets[i]) as u32
    }

    pub fn degrees(&self) -> DegreeProfile {
        DegreeProfile((0..self.node_count()).map(|i| self.degree(i)).collect())
    }

    /// Edges `(i, j)` with `i < j`, in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i >= self.node_count() {
            return input_err(format!("node {i} outside 0..{}", self.node_count()));
        }
        Ok(())
    }

    /// Breadth-first hop distance from `i` to `j`, giving up beyond `cap` hops.
    pub fn hop_distance(&self, i: usize, j: usize, cap: usize) -> Result<HopDistance> {
        self.check_node(i)?;
        self.check_node(j)?;
        if i == j {
            return Ok(HopDistance::Hops(0));
        }
        let mut search = HopSearch::new(self.node_count());
        let mut found = HopDistance::Unreachable;
        search.visit(self, i, cap, |node, depth| {
            if node == j {
                found = HopDistance::Hops(depth);
                false
            } else {
                true
            }
        });
        Ok(found)
    }

    /// All nodes within `m` hops of `i` (including `i`), sorted ascending.
    pub fn neighbors_within(&self, i: usize, m: usize) -> Result<Vec<usize>> {
        self.check_node(i)?;
        if m == 0 {
            return input_err("hop radius must be at least 1");
        }
        let mut search = HopSearch::new(self.node_count());
        let mut out = Vec::new();
        search.ball(self, i, m, &mut out);
        Ok(out)
    }

    /// Writes the canonical edge-list form: `n <count>` then one 1-based
    /// `i j` line per edge with `i < j`, self-loops omitted.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_edge_list().as_bytes())?;
        Ok(())
    }

    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "n {}", self.node_count());
        for (i, j) in self.edges() {
            let _ = writeln!(s, "{} {}", i + 1, j + 1);
        }
        s
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Input("empty edge list".into()))??;
        let n = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["n", count] => count
                .parse::<usize>()
                .map_err(|e| Error::Input(format!("bad node count {count:?}: {e}")))?,
            _ => return input_err(format!("expected `n <count>` header, got {header:?}")),
        };
        let mut edges = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace().map(str::parse::<usize>);
            match (parts.next(), parts.next(), parts.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) if a >= 1 && b >= 1 => edges.push((a - 1, b - 1)),
                _ => return input_err(format!("line {}: malformed edge {line:?}", lineno + 2)),
            }
        }
        Self::from_edges(n, &edges)
    }
}

impl DegreeProfile {
    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().map(|&q| q as u64).sum()
    }
}

/// Reusable breadth-first search state. Visited marks are epoch-stamped so a
/// query only touches the nodes it reaches.
pub(crate) struct HopSearch {
    stamp: Vec<u32>,
    epoch: u32,
    queue: VecDeque<(usize, usize)>,
}

impl HopSearch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            stamp: vec![0; n],
            epoch: 0,
            queue: VecDeque::new(),
        }
    }

    fn next_epoch(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
    }

    /// Visits nodes in nondecreasing hop order up to `cap` hops from `start`.
    /// The callback receives `(node, depth)` and returns `false` to stop.
    pub(crate) fn visit<F>(&mut self, g: &Graph, start: usize, cap: usize, mut on_node: F)
    where
        F: FnMut(usize, usize) -> bool,
    {
        self.next_epoch();
        self.queue.clear();
        self.stamp[start] = self.epoch;
        self.queue.push_back((start, 0));
        while let Some((node, depth)) = self.queue.pop_front() {
            if !on_node(node, depth) {
                return;
            }
            if depth == cap {
                continue;
            }
            for &nb in g.neighbors(node) {
                let nb = nb as usize;
                if self.stamp[nb] != self.epoch {
                    self.stamp[nb] = self.epoch;
                    self.queue.push_back((nb, depth + 1));
                }
            }
        }
    }

    /// Collects the sorted set of nodes within `m` hops of `start` into `out`.
    pub(crate) fn ball(&mut self, g: &Graph, start: usize, m: usize, out: &mut Vec<usize>) {
        out.clear();
        self.visit(g, start, m, |node, _| {
            out.push(node);
            true
        });
        out.sort_unstable();
    }
}
