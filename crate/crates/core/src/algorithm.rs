//! Graph Max Shift: hill-climbing on the degree landscape, endpoint grouping
//! and hop-based merging, plus the multi-hop and weighted-graph variants.
//!
//! Every climb step moves to the node maximizing `(degree, id)` over the search
//! set of the current node, which always contains the node itself. The pair
//! strictly increases until the climb reaches a fixed point, so paths are
//! shorter than `n` and no cycle detection is needed.

use std::io::Write;

use crate::error::{input_err, Result};
use crate::geometry::WeightedGraph;
use crate::graph::{DegreeProfile, Graph, HopSearch};
use crate::par;
use crate::union_find::DisjointSet;

/// A hill-climbing node sequence; the last node is a fixed point of the climb.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    nodes: Vec<usize>,
}

impl Path {
    pub(crate) fn from_nodes(nodes: Vec<usize>) -> Self {
        debug_assert!(!nodes.is_empty());
        Self { nodes }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn start(&self) -> usize {
        self.nodes[0]
    }

    pub fn endpoint(&self) -> usize {
        *self.nodes.last().expect("paths are never empty")
    }

    /// Number of moves (nodes minus one).
    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Hop threshold for merging clusters; `tau = 0` disables merging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MergeParams {
    pub tau: usize,
}

impl MergeParams {
    pub fn new(tau: usize) -> Self {
        Self { tau }
    }
}

/// A partition of `0..n`. Labels are `0..k`; `None` marks a node left out of
/// the partition (only reference partitions produce those).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clustering {
    labels: Vec<Option<usize>>,
    representatives: Vec<usize>,
}

impl Clustering {
    /// Checks that labels cover `0..k` exactly, with one representative per
    /// cluster that belongs to it.
    pub fn new(labels: Vec<Option<usize>>, representatives: Vec<usize>) -> Result<Self> {
        let k = representatives.len();
        let mut seen = vec![false; k];
        for l in labels.iter().flatten() {
            if *l >= k {
                return input_err(format!("label {l} outside 0..{k}"));
            }
            seen[*l] = true;
        }
        if let Some(empty) = seen.iter().position(|s| !s) {
            return input_err(format!("cluster {empty} has no members"));
        }
        for (c, &r) in representatives.iter().enumerate() {
            if labels.get(r).copied().flatten() != Some(c) {
                return input_err(format!("representative {r} is not a member of cluster {c}"));
            }
        }
        Ok(Self {
            labels,
            representatives,
        })
    }

    /// Compacts arbitrary labels (`None` = unassigned) into `0..k` in order of
    /// first appearance; each cluster's representative is its first member.
    pub fn from_raw_labels<L: Copy + Eq + std::hash::Hash>(raw: &[Option<L>]) -> Self {
        let mut map = std::collections::HashMap::new();
        let mut representatives = Vec::new();
        let labels = raw
            .iter()
            .enumerate()
            .map(|(i, l)| {
                l.map(|l| {
                    *map.entry(l).or_insert_with(|| {
                        representatives.push(i);
                        representatives.len() - 1
                    })
                })
            })
            .collect();
        Self {
            labels,
            representatives,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of clusters.
    pub fn k(&self) -> usize {
        self.representatives.len()
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Option<usize>] {
        &self.labels
    }

    pub fn representatives(&self) -> &[usize] {
        &self.representatives
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k()];
        for l in self.labels.iter().flatten() {
            sizes[*l] += 1;
        }
        sizes
    }
}

/// Graph Max Shift output: the partition and each node's climb endpoint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShiftClustering {
    pub clustering: Clustering,
    pub endpoints: Vec<usize>,
}

impl ShiftClustering {
    /// `id,label,endpoint` CSV, all 1-based.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["id", "label", "endpoint"])?;
        for (i, (l, e)) in self
            .clustering
            .labels()
            .iter()
            .zip(&self.endpoints)
            .enumerate()
        {
            let l = l.expect("graph clusterings label every node");
            wr.write_record(&[
                (i + 1).to_string(),
                (l + 1).to_string(),
                (e + 1).to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// Node maximizing `(q, id)` over `candidates`.
#[inline]
fn best_node<I: IntoIterator<Item = usize>>(q: &[u32], candidates: I) -> usize {
    let mut best = usize::MAX;
    let mut best_q = 0;
    for j in candidates {
        if best == usize::MAX || q[j] > best_q || (q[j] == best_q && j > best) {
            best = j;
            best_q = q[j];
        }
    }
    best
}

fn check_profile(g_nodes: usize, q: &DegreeProfile) -> Result<()> {
    if q.len() != g_nodes {
        return input_err(format!(
            "degree profile has {} entries for {g_nodes} nodes",
            q.len()
        ));
    }
    Ok(())
}

fn check_start(n: usize, start: usize) -> Result<()> {
    if start >= n {
        return input_err(format!("start node {start} outside 0..{n}"));
    }
    Ok(())
}

fn climb_with<F: FnMut(usize) -> usize>(start: usize, mut step: F) -> Path {
    let mut nodes = vec![start];
    let mut cur = start;
    loop {
        let next = step(cur);
        if next == cur {
            return Path { nodes };
        }
        nodes.push(next);
        cur = next;
    }
}

/// Hill-climbing path from `start`: repeatedly move to the neighbor (self
/// included) of highest degree, larger id on ties, until nothing changes.
pub fn hill_climb(g: &Graph, q: &DegreeProfile, start: usize) -> Result<Path> {
    check_profile(g.node_count(), q)?;
    check_start(g.node_count(), start)?;
    let q = q.as_slice();
    Ok(climb_with(start, |i| {
        best_node(q, g.neighbors(i).iter().map(|&j| j as usize))
    }))
}

/// Hill climbing where each step searches every node within `m` hops. The
/// landscape is still the one-hop degree `q`.
pub fn hill_climb_multihop(g: &Graph, q: &DegreeProfile, start: usize, m: usize) -> Result<Path> {
    check_profile(g.node_count(), q)?;
    check_start(g.node_count(), start)?;
    if m == 0 {
        return input_err("hop radius m must be at least 1");
    }
    let q = q.as_slice();
    let mut search = HopSearch::new(g.node_count());
    let mut ball = Vec::new();
    Ok(climb_with(start, |i| {
        search.ball(g, i, m, &mut ball);
        best_node(q, ball.iter().copied())
    }))
}

/// One climb step from every node.
pub fn successors(g: &Graph, q: &DegreeProfile) -> Vec<usize> {
    let q = q.as_slice();
    par::map_range(g.node_count(), |i| {
        best_node(q, g.neighbors(i).iter().map(|&j| j as usize))
    })
}

/// One `m`-hop climb step from every node.
pub fn successors_within(g: &Graph, q: &DegreeProfile, m: usize) -> Result<Vec<usize>> {
    check_profile(g.node_count(), q)?;
    match m {
        0 => input_err("hop radius m must be at least 1"),
        1 => Ok(successors(g, q)),
        _ => Ok(successors_multihop(g, q, m)),
    }
}

fn successors_multihop(g: &Graph, q: &DegreeProfile, m: usize) -> Vec<usize> {
    let q = q.as_slice();
    par::map_range_init(
        g.node_count(),
        || (HopSearch::new(g.node_count()), Vec::new()),
        |(search, ball), i| {
            search.ball(g, i, m, ball);
            best_node(q, ball.iter().copied())
        },
    )
}

/// Endpoint of every node's climb. Once a node's endpoint is known, every
/// path reaching it inherits that endpoint.
pub fn resolve_endpoints(succ: &[usize]) -> Vec<usize> {
    const UNKNOWN: usize = usize::MAX;
    let mut end = vec![UNKNOWN; succ.len()];
    let mut stack = Vec::new();
    for start in 0..succ.len() {
        let mut cur = start;
        while end[cur] == UNKNOWN {
            let next = succ[cur];
            if next == cur {
                end[cur] = cur;
                break;
            }
            stack.push(cur);
            cur = next;
        }
        let e = end[cur];
        for node in stack.drain(..) {
            end[node] = e;
        }
    }
    end
}

/// The full climb path from `start` under a successor map.
pub fn path_from_successors(succ: &[usize], start: usize) -> Path {
    climb_with(start, |i| succ[i])
}

/// Groups nodes by endpoint and merges groups whose endpoints are within
/// `tau` hops in `g` (transitively).
fn group_and_merge(g: &Graph, endpoints: Vec<usize>, params: MergeParams) -> ShiftClustering {
    let n = endpoints.len();
    let mut is_endpoint = vec![false; n];
    for &e in &endpoints {
        is_endpoint[e] = true;
    }
    let mut ds = DisjointSet::new(n);
    if params.tau > 0 {
        let mut search = HopSearch::new(n);
        for e in (0..n).filter(|&e| is_endpoint[e]) {
            search.visit(g, e, params.tau, |node, _| {
                if node != e && is_endpoint[node] {
                    ds.union(e, node);
                }
                true
            });
        }
    }
    // Endpoints visited in ascending order, so the first one seen in a merged
    // set is its smallest and becomes the representative.
    let mut label_of_root = vec![usize::MAX; n];
    let mut representatives = Vec::new();
    for e in (0..n).filter(|&e| is_endpoint[e]) {
        let root = ds.find(e);
        if label_of_root[root] == usize::MAX {
            label_of_root[root] = representatives.len();
            representatives.push(e);
        }
    }
    let labels = endpoints
        .iter()
        .map(|&e| Some(label_of_root[ds.find(e)]))
        .collect();
    ShiftClustering {
        clustering: Clustering {
            labels,
            representatives,
        },
        endpoints,
    }
}

/// Resolves a successor map computed on `g` and merges endpoints within
/// `params.tau` hops. Lets callers reuse one climb for several `tau`.
pub fn cluster_from_successors(g: &Graph, succ: &[usize], params: MergeParams) -> ShiftClustering {
    group_and_merge(g, resolve_endpoints(succ), params)
}

/// Graph Max Shift on `g` with hop merging.
pub fn cluster(g: &Graph, params: MergeParams) -> ShiftClustering {
    let q = g.degrees();
    let end = resolve_endpoints(&successors(g, &q));
    group_and_merge(g, end, params)
}

/// Multi-hop Graph Max Shift: the climb searches `m` hops, merging still
/// counts hops in `g`.
pub fn cluster_multihop(g: &Graph, m: usize, params: MergeParams) -> Result<ShiftClustering> {
    if m == 0 {
        return input_err("hop radius m must be at least 1");
    }
    if m == 1 {
        return Ok(cluster(g, params));
    }
    let q = g.degrees();
    let end = resolve_endpoints(&successors_multihop(g, &q, m));
    Ok(group_and_merge(g, end, params))
}

/// Weighted-graph variant: degrees and merge hops come from the graph
/// thresholded at `h`; each climb step searches `{j : delta_ij <= r}`.
pub fn cluster_weighted(
    wg: &WeightedGraph,
    h: f64,
    r: f64,
    params: MergeParams,
) -> Result<ShiftClustering> {
    if r < h {
        return input_err(format!("search radius {r} is below threshold {h}"));
    }
    if r > wg.cutoff() {
        return input_err(format!(
            "search radius {r} exceeds construction cutoff {}",
            wg.cutoff()
        ));
    }
    let gh = wg.threshold(h)?;
    let q = gh.degrees();
    let qs = q.as_slice();
    let succ = par::map_range(wg.node_count(), |i| best_node(qs, wg.within(i, r)));
    Ok(group_and_merge(&gh, resolve_endpoints(&succ), params))
}

/// Writes one line per path, space-separated 1-based node ids.
pub fn write_paths<W: Write>(succ: &[usize], mut w: W) -> Result<()> {
    for start in 0..succ.len() {
        let p = path_from_successors(succ, start);
        let line: Vec<String> = p.nodes().iter().map(|i| (i + 1).to_string()).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}
