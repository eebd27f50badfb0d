//! Seeded experiment pipeline: sample a mixture, build the epsilon graph,
//! cluster it, compute the gradient-flow reference and compare.
//!
//! Everything a run writes is a function of its config, except the
//! `runtime_ms` timings. Sweep cells depend only on their own grid
//! coordinates: the sample for `(n, seed)` is `mixture.sample(n, seed)`, the
//! same one a standalone `run` with that config would draw.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::algorithm::{self, Clustering, MergeParams, ShiftClustering};
use crate::baselines::{self, DensityShiftOptions, FlowOptions};
use crate::density::{GaussianMixture, MixtureSpec, ModeOptions, ModeSet};
use crate::error::{input_err, Result};
use crate::evaluation::{self, AgreementReport};
use crate::geometry::{build_geometric_graph, PointSet};
use crate::graph::DegreeProfile;

/// A mixture given by fixture name or inline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MixtureRef {
    Named(String),
    Inline(MixtureSpec),
}

impl MixtureRef {
    pub fn resolve(&self) -> Result<GaussianMixture> {
        match self {
            MixtureRef::Named(name) => GaussianMixture::fixture(name),
            MixtureRef::Inline(spec) => GaussianMixture::new(spec.clone()),
        }
    }
}

/// `eps = c * (ln n / n)^(1 / exponent)`; the exponent defaults to
/// `max(d + 4, 2d) + 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutoEps {
    #[serde(default = "one")]
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

fn one() -> f64 {
    1.0
}

/// Radius given directly, or `{"auto": {"c": .., "exponent": ..}}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EpsRule {
    Fixed(f64),
    Auto { auto: AutoEps },
}

pub fn default_auto_exponent(d: usize) -> f64 {
    ((d + 4).max(2 * d) + 1) as f64
}

impl EpsRule {
    pub fn resolve(&self, n: usize, d: usize) -> Result<f64> {
        let eps = match *self {
            EpsRule::Fixed(e) => e,
            EpsRule::Auto { auto } => {
                let exponent = auto.exponent.unwrap_or_else(|| default_auto_exponent(d));
                let n = n as f64;
                auto.c * (n.ln() / n).powf(1.0 / exponent)
            }
        };
        if !(eps > 0.0 && eps.is_finite()) {
            return input_err(format!("eps resolved to {eps}; must be positive"));
        }
        Ok(eps)
    }
}

fn default_tau() -> usize {
    1
}

fn default_gray() -> usize {
    25
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub mixture: MixtureRef,
    pub n: usize,
    pub eps: EpsRule,
    #[serde(default = "default_tau")]
    pub tau: usize,
    #[serde(default = "one_usize")]
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    /// Clusters smaller than this are listed in the report for graying out.
    #[serde(default = "default_gray")]
    pub small_cluster_gray: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn one_usize() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(mixture: &str, n: usize, eps: EpsRule, tau: usize, seed: u64) -> Self {
        Self {
            mixture: MixtureRef::Named(mixture.to_string()),
            n,
            eps,
            tau,
            m: 1,
            seed,
            small_cluster_gray: 25,
            output_dir: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return input_err(format!("n must be at least 2, got {}", self.n));
        }
        if self.m == 0 {
            return input_err("m must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub sample: f64,
    pub graph: f64,
    pub cluster: f64,
    pub modes: f64,
    pub reference: f64,
    pub metrics: f64,
    pub total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceSummary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

impl DistanceSummary {
    fn of(mut v: Vec<f64>) -> Option<Self> {
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let mid = v.len() / 2;
        let median = if v.len() % 2 == 1 {
            v[mid]
        } else {
            0.5 * (v[mid - 1] + v[mid])
        };
        Some(Self {
            min: v[0],
            median,
            max: v[v.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub d: usize,
    pub eps: f64,
    pub k: usize,
    pub mode_count: Option<usize>,
    pub agreement: Option<AgreementReport>,
    /// 1-based labels of clusters below `small_cluster_gray` members.
    pub small_clusters: Vec<usize>,
    /// Distance from each node's climb endpoint to the nearest mode, over all nodes.
    pub endpoint_distance: Option<DistanceSummary>,
    pub runtime_ms: StageTimes,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

/// Everything a run computes, for writing out or further inspection.
pub struct RunOutput {
    pub report: ExperimentReport,
    pub mixture: GaussianMixture,
    pub points: PointSet,
    pub degrees: DegreeProfile,
    pub successors: Vec<usize>,
    pub shift: ShiftClustering,
    pub modes: Option<ModeSet>,
    pub reference: Option<Clustering>,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Runs the full pipeline. Invalid configs are errors; failures in mode
/// finding or metrics are recorded in `report.error` with partial results.
pub fn run(config: &ExperimentConfig) -> Result<RunOutput> {
    config.validate()?;
    let t_total = Instant::now();
    let mut times = StageTimes::default();
    let gm = config.mixture.resolve()?;
    let d = gm.dim();
    let eps = config.eps.resolve(config.n, d)?;

    let t = Instant::now();
    let points = gm.sample(config.n, config.seed)?;
    times.sample = ms(t);

    let t = Instant::now();
    let graph = build_geometric_graph(&points, eps)?;
    times.graph = ms(t);

    let t = Instant::now();
    let degrees = graph.degrees();
    let successors = climb_successors(&graph, &degrees, config.m)?;
    let shift = merge_successors(&graph, &successors, config.tau);
    times.cluster = ms(t);

    let sizes = shift.clustering.sizes();
    let small_clusters = sizes
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < config.small_cluster_gray)
        .map(|(l, _)| l + 1)
        .collect();

    let mut report = ExperimentReport {
        config: config.clone(),
        d,
        eps,
        k: shift.clustering.k(),
        mode_count: None,
        agreement: None,
        small_clusters,
        endpoint_distance: None,
        runtime_ms: times,
        warnings: Vec::new(),
        error: None,
    };

    let t = Instant::now();
    let modes = match gm.find_modes(&ModeOptions::default()) {
        Ok(m) => Some(m),
        Err(e) => {
            report.error = Some(e.to_string());
            None
        }
    };
    times.modes = ms(t);

    let mut reference = None;
    if let Some(modes) = &modes {
        report.mode_count = Some(modes.len());
        let t = Instant::now();
        let refc = baselines::reference_partition(&gm, modes, &points, &FlowOptions::default())?;
        times.reference = ms(t);
        let unassigned = refc.labels().iter().filter(|l| l.is_none()).count();
        if unassigned > 0 {
            report.warnings.push(format!(
                "{unassigned} points left unassigned by the gradient flow"
            ));
        }

        let t = Instant::now();
        match evaluation::agreement(&refc, &shift.clustering) {
            Ok((agreement, rates)) => {
                if rates.merge_undefined {
                    report.warnings.push(
                        "false_merge_rate undefined (no reference-apart pairs); reported as 0"
                            .into(),
                    );
                }
                if rates.split_undefined {
                    report.warnings.push(
                        "false_split_rate undefined (no reference-together pairs); reported as 0"
                            .into(),
                    );
                }
                report.agreement = Some(agreement);
            }
            Err(e) => report.error = Some(e.to_string()),
        }
        let dists = shift
            .endpoints
            .iter()
            .map(|&e| modes.nearest(points.point(e)).map(|(_, dd)| dd))
            .collect::<Option<Vec<_>>>()
            .unwrap_or_default();
        report.endpoint_distance = DistanceSummary::of(dists);
        times.metrics = ms(t);
        reference = Some(refc);
    }
    times.total = ms(t_total);
    report.runtime_ms = times;

    Ok(RunOutput {
        report,
        mixture: gm,
        points,
        degrees,
        successors,
        shift,
        modes,
        reference,
    })
}

fn climb_successors(graph: &crate::Graph, q: &DegreeProfile, m: usize) -> Result<Vec<usize>> {
    algorithm::successors_within(graph, q, m)
}

fn merge_successors(graph: &crate::Graph, succ: &[usize], tau: usize) -> ShiftClustering {
    algorithm::cluster_from_successors(graph, succ, MergeParams::new(tau))
}

impl RunOutput {
    /// Writes `points.csv`, `labels.csv`, `degrees.csv`, `modes.csv` (when
    /// modes were found) and `report.json`; `paths.txt` too when asked.
    pub fn write_to(&self, dir: &FsPath, dump_paths: bool) -> Result<()> {
        fs::create_dir_all(dir)?;
        self.points
            .write_csv(BufWriter::new(fs::File::create(dir.join("points.csv"))?))?;
        self.write_labels(BufWriter::new(fs::File::create(dir.join("labels.csv"))?))?;
        write_degrees(
            &self.degrees,
            BufWriter::new(fs::File::create(dir.join("degrees.csv"))?),
        )?;
        if let Some(modes) = &self.modes {
            write_modes(
                modes,
                BufWriter::new(fs::File::create(dir.join("modes.csv"))?),
            )?;
        }
        if dump_paths {
            algorithm::write_paths(
                &self.successors,
                BufWriter::new(fs::File::create(dir.join("paths.txt"))?),
            )?;
        }
        let mut f = BufWriter::new(fs::File::create(dir.join("report.json"))?);
        serde_json::to_writer_pretty(&mut f, &self.report)?;
        writeln!(f)?;
        Ok(())
    }

    /// `id,gms_label,ref_label,endpoint`, 1-based; `ref_label` is -1 for
    /// points without a reference label.
    pub fn write_labels<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["id", "gms_label", "ref_label", "endpoint"])?;
        for i in 0..self.points.len() {
            let gms = self.shift.clustering.label(i).map_or(-1, |l| l as i64 + 1);
            let rl = self
                .reference
                .as_ref()
                .and_then(|r| r.label(i))
                .map_or(-1, |l| l as i64 + 1);
            wr.write_record(&[
                (i + 1).to_string(),
                gms.to_string(),
                rl.to_string(),
                (self.shift.endpoints[i] + 1).to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// `id,degree`, 1-based.
pub fn write_degrees<W: Write>(q: &DegreeProfile, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["id", "degree"])?;
    for (i, d) in q.as_slice().iter().enumerate() {
        wr.write_record(&[(i + 1).to_string(), d.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// `mode,x1,...,xd,density`, 1-based mode ids.
pub fn write_modes<W: Write>(modes: &ModeSet, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    let d = modes.modes.first().map_or(0, Vec::len);
    let mut header = vec!["mode".to_string()];
    header.extend((1..=d).map(|k| format!("x{k}")));
    header.push("density".into());
    wr.write_record(&header)?;
    for (i, (m, v)) in modes.modes.iter().zip(&modes.values).enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(m.iter().map(f64::to_string));
        row.push(v.to_string());
        wr.write_record(&row)?;
    }
    wr.flush()?;
    Ok(())
}

/// Grid axes for [`sweep`]; an absent axis uses the base config's value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    #[serde(default)]
    pub n: Option<Vec<usize>>,
    #[serde(default)]
    pub eps: Option<Vec<EpsRule>>,
    #[serde(default)]
    pub tau: Option<Vec<usize>>,
    #[serde(default)]
    pub m: Option<Vec<usize>>,
    #[serde(default)]
    pub seed: Option<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: ExperimentConfig,
    #[serde(default)]
    pub grid: SweepGrid,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// One sweep cell. Metric fields are `None` when the cell failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub eps: f64,
    pub tau: usize,
    pub m: usize,
    pub seed: u64,
    pub k: Option<usize>,
    pub rand_index: Option<f64>,
    pub miscluster_fraction: Option<f64>,
    pub false_merge: Option<f64>,
    pub false_split: Option<f64>,
    pub runtime_ms: f64,
    pub error: Option<String>,
}

struct GroupInput<'a> {
    n: usize,
    seed: u64,
    eps: &'a [EpsRule],
    tau: &'a [usize],
    m: &'a [usize],
}

fn run_group(gm: &GaussianMixture, g: &GroupInput<'_>) -> Vec<SweepRow> {
    let d = gm.dim();
    let mut rows = Vec::new();
    let blank = |eps: f64, tau: usize, m: usize, err: String| SweepRow {
        n: g.n,
        eps,
        tau,
        m,
        seed: g.seed,
        k: None,
        rand_index: None,
        miscluster_fraction: None,
        false_merge: None,
        false_split: None,
        runtime_ms: 0.0,
        error: Some(err),
    };
    let eps_vals: Vec<Result<f64>> = g.eps.iter().map(|e| e.resolve(g.n, d)).collect();
    let fail_all = |err: String| {
        let mut out = Vec::new();
        for e in &eps_vals {
            let eps = e.as_ref().copied().unwrap_or(f64::NAN);
            for &m in g.m {
                for &tau in g.tau {
                    out.push(blank(eps, tau, m, err.clone()));
                }
            }
        }
        out
    };

    let setup = (|| -> Result<(PointSet, Clustering)> {
        let ps = gm.sample(g.n, g.seed)?;
        let modes = gm.find_modes(&ModeOptions::default())?;
        let refc = baselines::reference_partition(gm, &modes, &ps, &FlowOptions::default())?;
        Ok((ps, refc))
    })();
    let (ps, refc) = match setup {
        Ok(v) => v,
        Err(e) => return fail_all(e.to_string()),
    };

    for e in &eps_vals {
        let eps = match e {
            Ok(eps) => *eps,
            Err(err) => {
                for &m in g.m {
                    for &tau in g.tau {
                        rows.push(blank(f64::NAN, tau, m, err.to_string()));
                    }
                }
                continue;
            }
        };
        let t_graph = Instant::now();
        let graph = match build_geometric_graph(&ps, eps) {
            Ok(gr) => gr,
            Err(err) => {
                for &m in g.m {
                    for &tau in g.tau {
                        rows.push(blank(eps, tau, m, err.to_string()));
                    }
                }
                continue;
            }
        };
        let q = graph.degrees();
        let graph_ms = ms(t_graph);
        for &m in g.m {
            let t_climb = Instant::now();
            let succ = match climb_successors(&graph, &q, m) {
                Ok(s) => s,
                Err(err) => {
                    for &tau in g.tau {
                        rows.push(blank(eps, tau, m, err.to_string()));
                    }
                    continue;
                }
            };
            let climb_ms = ms(t_climb);
            for &tau in g.tau {
                let t = Instant::now();
                let shift = merge_successors(&graph, &succ, tau);
                let mut row = blank(eps, tau, m, String::new());
                row.error = None;
                row.k = Some(shift.clustering.k());
                match evaluation::agreement(&refc, &shift.clustering) {
                    Ok((a, _)) => {
                        row.rand_index = Some(a.rand_index);
                        row.miscluster_fraction = Some(a.miscluster_fraction);
                        row.false_merge = Some(a.false_merge_rate);
                        row.false_split = Some(a.false_split_rate);
                    }
                    Err(err) => row.error = Some(err.to_string()),
                }
                row.runtime_ms = graph_ms + climb_ms + ms(t);
                rows.push(row);
            }
        }
    }
    rows
}

/// Runs every cell of the grid. Work is shared per `(n, seed)` (sample and
/// reference) and per eps (graph); rows come back sorted by
/// `(n, eps, tau, m, seed)` whatever the execution order.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    let base = &config.base;
    let gm = base.mixture.resolve()?;
    let ns = config.grid.n.clone().unwrap_or_else(|| vec![base.n]);
    let eps = config.grid.eps.clone().unwrap_or_else(|| vec![base.eps]);
    let taus = config.grid.tau.clone().unwrap_or_else(|| vec![base.tau]);
    let ms_ = config.grid.m.clone().unwrap_or_else(|| vec![base.m]);
    let seeds = config.grid.seed.clone().unwrap_or_else(|| vec![base.seed]);
    if ns.is_empty() || eps.is_empty() || taus.is_empty() || ms_.is_empty() || seeds.is_empty() {
        return input_err("every sweep axis needs at least one value");
    }
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return input_err(format!("n must be at least 2, got {bad}"));
    }
    if ms_.contains(&0) {
        return input_err("m must be at least 1");
    }
    let mut groups = BTreeMap::new();
    for &n in &ns {
        for &seed in &seeds {
            groups.insert((n, seed), ());
        }
    }
    let keys: Vec<(usize, u64)> = groups.into_keys().collect();
    let per_group = crate::par::map_range(keys.len(), |i| {
        let (n, seed) = keys[i];
        run_group(
            &gm,
            &GroupInput {
                n,
                seed,
                eps: &eps,
                tau: &taus,
                m: &ms_,
            },
        )
    });
    let mut rows: Vec<SweepRow> = per_group.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        (a.n, a.eps.to_bits(), a.tau, a.m, a.seed).cmp(&(b.n, b.eps.to_bits(), b.tau, b.m, b.seed))
    });
    Ok(rows)
}

pub const SWEEP_HEADER: [&str; 12] = [
    "n",
    "eps",
    "tau",
    "m",
    "seed",
    "k",
    "rand_index",
    "miscluster_fraction",
    "false_merge",
    "false_split",
    "runtime_ms",
    "error",
];

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SWEEP_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        wr.write_record(&[
            r.n.to_string(),
            r.eps.to_string(),
            r.tau.to_string(),
            r.m.to_string(),
            r.seed.to_string(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            opt(r.rand_index),
            opt(r.miscluster_fraction),
            opt(r.false_merge),
            opt(r.false_split),
            format!("{:.3}", r.runtime_ms),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// Graph Max Shift path and true-density Max Shift path from one start.
#[derive(Clone, Debug)]
pub struct PathPair {
    pub eps: f64,
    pub start: usize,
    pub graph_path: algorithm::Path,
    pub graph_points: Vec<Vec<f64>>,
    pub density_path: Vec<Vec<f64>>,
    pub modes: ModeSet,
}

/// Largest distance between the `k`-th points of two paths, the shorter path
/// being held at its endpoint.
pub fn path_deviation(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let len = a.len().max(b.len());
    (0..len)
        .map(|k| {
            let p = &a[k.min(a.len() - 1)];
            let q = &b[k.min(b.len() - 1)];
            crate::geometry::dist2(p, q).sqrt()
        })
        .fold(0.0, f64::max)
}

/// Climbs from data point `start` (0-based) on the experiment's graph and runs
/// density Max Shift with search radius `eps` from the same point.
pub fn paths(config: &ExperimentConfig, start: usize) -> Result<PathPair> {
    config.validate()?;
    let gm = config.mixture.resolve()?;
    let eps = config.eps.resolve(config.n, gm.dim())?;
    let points = gm.sample(config.n, config.seed)?;
    if start >= points.len() {
        return input_err(format!("start {} outside 1..={}", start + 1, points.len()));
    }
    paths_on(&gm, &points, eps, config.m, start)
}

/// [`paths`] on an existing sample.
pub fn paths_on(
    gm: &GaussianMixture,
    points: &PointSet,
    eps: f64,
    m: usize,
    start: usize,
) -> Result<PathPair> {
    let graph = build_geometric_graph(points, eps)?;
    let q = graph.degrees();
    let graph_path = if m == 1 {
        algorithm::hill_climb(&graph, &q, start)?
    } else {
        algorithm::hill_climb_multihop(&graph, &q, start, m)?
    };
    let graph_points = graph_path
        .nodes()
        .iter()
        .map(|&i| points.point(i).to_vec())
        .collect();
    let opts = if gm.dim() == 2 {
        DensityShiftOptions::default()
    } else {
        DensityShiftOptions {
            sampling: baselines::BallSampling::QuasiRandom { count: 512 },
            ..Default::default()
        }
    };
    let density_path = baselines::max_shift_density(gm, points.point(start), eps, &opts)?;
    let modes = gm.find_modes(&ModeOptions::default())?;
    Ok(PathPair {
        eps,
        start,
        graph_path,
        graph_points,
        density_path,
        modes,
    })
}

impl PathPair {
    /// Writes `gms_path.csv` (`step,id,x1..xd`), `density_path.csv`
    /// (`step,x1..xd`) and `modes.csv`.
    pub fn write_to(&self, dir: &FsPath) -> Result<()> {
        fs::create_dir_all(dir)?;
        let d = self.modes.modes.first().map_or(0, Vec::len);
        let coords = |prefix: &[&str]| {
            let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
            h.extend((1..=d).map(|k| format!("x{k}")));
            h
        };
        let mut wr = csv::Writer::from_path(dir.join("gms_path.csv"))?;
        wr.write_record(coords(&["step", "id"]))?;
        for (s, (&id, p)) in self
            .graph_path
            .nodes()
            .iter()
            .zip(&self.graph_points)
            .enumerate()
        {
            let mut row = vec![s.to_string(), (id + 1).to_string()];
            row.extend(p.iter().map(f64::to_string));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        let mut wr = csv::Writer::from_path(dir.join("density_path.csv"))?;
        wr.write_record(coords(&["step"]))?;
        for (s, p) in self.density_path.iter().enumerate() {
            let mut row = vec![s.to_string()];
            row.extend(p.iter().map(f64::to_string));
            wr.write_record(&row)?;
        }
        wr.flush()?;
        write_modes(&self.modes, fs::File::create(dir.join("modes.csv"))?)?;
        Ok(())
    }
}
