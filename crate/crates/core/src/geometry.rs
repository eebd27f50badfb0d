//! Point sets and epsilon-neighborhood graphs over them.
//!
//! Neighbor search uses a uniform grid whose cells are (just over) one radius
//! wide, so every pair within the radius sits in the same or an adjacent cell.
//! All radius tests compare squared distances against the squared radius with
//! `<=`, which keeps the closed-ball boundary and makes every construction in
//! this module use the same predicate.

use std::collections::HashMap;
use std::io::{Read, Write};

use crate::error::{input_err, Error, Result};
use crate::graph::Graph;
use crate::par;

/// `n` points in `R^d`; point `i` corresponds to graph node `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Wraps row-major coordinates. Requires at least one point and finite values.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return input_err("dimension must be positive");
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return input_err(format!(
                "coordinate count {} is not a positive multiple of dimension {dim}",
                coords.len()
            ));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return input_err(format!("non-finite coordinate at point {}", pos / dim));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: bad.len(),
            });
        }
        Self::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Writes `id,x1,...,xd` CSV with 1-based ids. Coordinates use the
    /// shortest representation that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string()];
        header.extend((1..=self.dim).map(|k| format!("x{k}")));
        wr.write_record(&header)?;
        let mut row = Vec::with_capacity(self.dim + 1);
        for (i, p) in self.iter().enumerate() {
            row.clear();
            row.push((i + 1).to_string());
            row.extend(p.iter().map(f64::to_string));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers()?.clone();
        let dim = headers.len().saturating_sub(1);
        let expected: Vec<String> = std::iter::once("id".to_string())
            .chain((1..=dim).map(|k| format!("x{k}")))
            .collect();
        if dim == 0 || headers.iter().ne(expected.iter().map(String::as_str)) {
            return input_err(format!(
                "point CSV header must be id,x1,...,xd; got {headers:?}"
            ));
        }
        let mut coords = Vec::new();
        for (row, rec) in rd.records().enumerate() {
            let rec = rec?;
            let id: usize = rec[0]
                .trim()
                .parse()
                .map_err(|e| Error::Input(format!("row {}: bad id: {e}", row + 1)))?;
            if id != row + 1 {
                return input_err(format!(
                    "ids must be 1..n ascending; row {} has id {id}",
                    row + 1
                ));
            }
            for field in rec.iter().skip(1) {
                coords.push(
                    field
                        .trim()
                        .parse::<f64>()
                        .map_err(|e| Error::Input(format!("row {}: {e}", row + 1)))?,
                );
            }
        }
        Self::new(dim, coords)
    }
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Uniform grid over a point set with cell side slightly above `radius`.
struct Grid<'a> {
    ps: &'a PointSet,
    side: f64,
    cells: HashMap<Vec<i64>, Vec<u32>>,
    offsets: Vec<Vec<i64>>,
}

impl<'a> Grid<'a> {
    fn new(ps: &'a PointSet, radius: f64) -> Self {
        // The margin keeps |cell(a) - cell(b)| <= 1 for pairs at exactly `radius`
        // despite rounding in the division.
        let side = radius * (1.0 + 1e-9);
        let mut cells: HashMap<Vec<i64>, Vec<u32>> = HashMap::new();
        for (i, p) in ps.iter().enumerate() {
            cells.entry(Self::key(p, side)).or_default().push(i as u32);
        }
        let d = ps.dim();
        let mut offsets = vec![Vec::with_capacity(d)];
        for _ in 0..d {
            offsets = offsets
                .into_iter()
                .flat_map(|o| {
                    (-1..=1).map(move |delta| {
                        let mut o = o.clone();
                        o.push(delta);
                        o
                    })
                })
                .collect();
        }
        Self {
            ps,
            side,
            cells,
            offsets,
        }
    }

    fn key(p: &[f64], side: f64) -> Vec<i64> {
        p.iter().map(|&x| (x / side).floor() as i64).collect()
    }

    /// Calls `hit(j, dist2)` for every point within `radius2` of point `i`.
    fn for_each_near<F: FnMut(usize, f64)>(&self, i: usize, radius2: f64, mut hit: F) {
        let p = self.ps.point(i);
        let base = Self::key(p, self.side);
        let mut key = base.clone();
        for off in &self.offsets {
            for ((k, b), o) in key.iter_mut().zip(&base).zip(off) {
                *k = b.saturating_add(*o);
            }
            if let Some(members) = self.cells.get(&key) {
                for &j in members {
                    let d2 = dist2(p, self.ps.point(j as usize));
                    if d2 <= radius2 {
                        hit(j as usize, d2);
                    }
                }
            }
        }
    }
}

fn check_radius(name: &str, r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return input_err(format!("{name} must be positive and finite, got {r}"));
    }
    Ok(())
}

/// Epsilon-neighborhood graph: `i ~ j` iff `||y_i - y_j|| <= eps`.
pub fn build_geometric_graph(ps: &PointSet, eps: f64) -> Result<Graph> {
    check_radius("eps", eps)?;
    let grid = Grid::new(ps, eps);
    let eps2 = eps * eps;
    let lists = par::map_range(ps.len(), |i| {
        let mut nb = Vec::new();
        grid.for_each_near(i, eps2, |j, _| nb.push(j as u32));
        nb.sort_unstable();
        nb
    });
    Ok(Graph::from_sorted_lists(lists))
}

/// Sparse symmetric dissimilarities `delta_ij = ||y_i - y_j||`, kept only for
/// pairs within the construction cutoff. Absent pairs are at infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    cutoff: f64,
    offsets: Vec<usize>,
    // (neighbor, squared distance), sorted by neighbor; self included at 0.
    entries: Vec<(u32, f64)>,
}

impl WeightedGraph {
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    /// Stored `(neighbor, distance)` pairs of node `i`, sorted by neighbor id.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries[self.offsets[i]..self.offsets[i + 1]]
            .iter()
            .map(|&(j, d2)| (j as usize, d2.sqrt()))
    }

    /// Neighbors of `i` with `delta_ij <= radius`, ascending.
    pub(crate) fn within(&self, i: usize, radius: f64) -> impl Iterator<Item = usize> + '_ {
        let r2 = radius * radius;
        self.entries[self.offsets[i]..self.offsets[i + 1]]
            .iter()
            .filter(move |&&(_, d2)| d2 <= r2)
            .map(|&(j, _)| j as usize)
    }

    /// `delta_ij`, or `None` when the pair was beyond the cutoff.
    pub fn dissimilarity(&self, i: usize, j: usize) -> Option<f64> {
        let row = &self.entries[self.offsets[i]..self.offsets[i + 1]];
        row.binary_search_by_key(&(j as u32), |&(k, _)| k)
            .ok()
            .map(|pos| row[pos].1.sqrt())
    }

    /// Unweighted graph with `i ~ j` iff `delta_ij <= h`.
    pub fn threshold(&self, h: f64) -> Result<Graph> {
        check_radius("threshold", h)?;
        if h > self.cutoff {
            return input_err(format!(
                "threshold {h} exceeds construction cutoff {}; longer pairs were discarded",
                self.cutoff
            ));
        }
        let lists = (0..self.node_count())
            .map(|i| self.within(i, h).map(|j| j as u32).collect())
            .collect();
        Ok(Graph::from_sorted_lists(lists))
    }
}

/// Weighted geometric graph keeping exact distances for pairs within `cutoff`.
pub fn build_weighted_graph(ps: &PointSet, cutoff: f64) -> Result<WeightedGraph> {
    check_radius("cutoff", cutoff)?;
    let grid = Grid::new(ps, cutoff);
    let c2 = cutoff * cutoff;
    let lists = par::map_range(ps.len(), |i| {
        let mut nb = Vec::new();
        grid.for_each_near(i, c2, |j, d2| nb.push((j as u32, d2)));
        nb.sort_unstable_by_key(|&(j, _)| j);
        nb
    });
    let mut offsets = Vec::with_capacity(lists.len() + 1);
    offsets.push(0);
    let mut entries = Vec::new();
    for list in lists {
        entries.extend(list);
        offsets.push(entries.len());
    }
    Ok(WeightedGraph {
        cutoff,
        offsets,
        entries,
    })
}
