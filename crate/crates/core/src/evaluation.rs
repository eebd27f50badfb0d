//! Agreement between a predicted clustering and a reference partition.
//!
//! Pair statistics come from the contingency table with exact integer
//! arithmetic. Nodes unlabeled in either clustering are dropped first.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algorithm::Clustering;
use crate::density::ModeSet;
use crate::error::{input_err, Error, Result};

/// Flat summary of how well `pred` matches `reference`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub rand_index: f64,
    pub miscluster_fraction: f64,
    pub false_merge_rate: f64,
    pub false_split_rate: f64,
    pub n_effective: usize,
}

/// Rates of reference-apart pairs put together (`false_merge`) and
/// reference-together pairs split apart (`false_split`). A rate whose
/// denominator is zero is reported as 0 and flagged.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitMergeRates {
    pub false_merge: f64,
    pub false_split: f64,
    pub merge_undefined: bool,
    pub split_undefined: bool,
}

/// Pair counts over the nodes labeled in both clusterings.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub n: u64,
    pub total: u64,
    /// Pairs together in `a`.
    pub together_a: u64,
    /// Pairs together in `b`.
    pub together_b: u64,
    /// Pairs together in both.
    pub together_both: u64,
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

fn joint_labels<'a>(
    a: &'a Clustering,
    b: &'a Clustering,
) -> Result<impl Iterator<Item = (usize, usize)> + 'a> {
    if a.len() != b.len() {
        return input_err(format!(
            "clusterings cover {} and {} nodes",
            a.len(),
            b.len()
        ));
    }
    Ok(a.labels()
        .iter()
        .zip(b.labels())
        .filter_map(|(x, y)| Some(((*x)?, (*y)?))))
}

impl PairCounts {
    pub fn new(a: &Clustering, b: &Clustering) -> Result<Self> {
        let mut table: HashMap<(usize, usize), u64> = HashMap::new();
        let mut size_a = vec![0u64; a.k()];
        let mut size_b = vec![0u64; b.k()];
        let mut n = 0u64;
        for (x, y) in joint_labels(a, b)? {
            *table.entry((x, y)).or_default() += 1;
            size_a[x] += 1;
            size_b[y] += 1;
            n += 1;
        }
        Ok(Self {
            n,
            total: choose2(n),
            together_a: size_a.iter().map(|&s| choose2(s)).sum(),
            together_b: size_b.iter().map(|&s| choose2(s)).sum(),
            together_both: table.values().map(|&s| choose2(s)).sum(),
        })
    }

    /// Pairs on which the two clusterings agree.
    pub fn agreements(&self) -> u64 {
        // together in both + apart in both
        self.total + 2 * self.together_both - self.together_a - self.together_b
    }
}

/// Fraction of node pairs on which `a` and `b` agree.
pub fn rand_index(a: &Clustering, b: &Clustering) -> Result<f64> {
    let pc = PairCounts::new(a, b)?;
    if pc.n < 2 {
        return Err(Error::UndefinedMetric(format!(
            "Rand index needs at least 2 labeled nodes, got {}",
            pc.n
        )));
    }
    Ok(pc.agreements() as f64 / pc.total as f64)
}

pub fn split_merge_rates(reference: &Clustering, pred: &Clustering) -> Result<SplitMergeRates> {
    let pc = PairCounts::new(reference, pred)?;
    let apart_ref = pc.total - pc.together_a;
    let merged = pc.together_b - pc.together_both;
    let split = pc.together_a - pc.together_both;
    let rate = |num: u64, den: u64| {
        if den == 0 {
            0.0
        } else {
            num as f64 / den as f64
        }
    };
    Ok(SplitMergeRates {
        false_merge: rate(merged, apart_ref),
        false_split: rate(split, pc.together_a),
        merge_undefined: apart_ref == 0,
        split_undefined: pc.together_a == 0,
    })
}

/// Maps every predicted cluster to the reference cluster it overlaps most
/// (ties to the smaller reference label) and returns the fraction of nodes
/// whose mapped label differs from their reference label. Several predicted
/// clusters may map to the same reference cluster.
pub fn miscluster_fraction(reference: &Clustering, pred: &Clustering) -> Result<f64> {
    let mut overlap: Vec<HashMap<usize, u64>> = vec![HashMap::new(); pred.k()];
    let mut n = 0u64;
    for (r, p) in joint_labels(reference, pred)? {
        *overlap[p].entry(r).or_default() += 1;
        n += 1;
    }
    if n == 0 {
        return Ok(0.0);
    }
    let correct: u64 = overlap
        .iter()
        .map(|row| {
            row.iter()
                .map(|(&r, &c)| (c, std::cmp::Reverse(r)))
                .max()
                .map_or(0, |(c, _)| c)
        })
        .sum();
    Ok((n - correct) as f64 / n as f64)
}

/// All agreement metrics at once.
pub fn agreement(
    reference: &Clustering,
    pred: &Clustering,
) -> Result<(AgreementReport, SplitMergeRates)> {
    let pc = PairCounts::new(reference, pred)?;
    let rates = split_merge_rates(reference, pred)?;
    let report = AgreementReport {
        rand_index: rand_index(reference, pred)?,
        miscluster_fraction: miscluster_fraction(reference, pred)?,
        false_merge_rate: rates.false_merge,
        false_split_rate: rates.false_split,
        n_effective: pc.n as usize,
    };
    Ok((report, rates))
}

/// Nearest mode (index) and Euclidean distance for each endpoint.
pub fn endpoint_mode_distances(
    endpoints: &[Vec<f64>],
    modes: &ModeSet,
) -> Result<Vec<(usize, f64)>> {
    if modes.is_empty() {
        return input_err("mode set is empty");
    }
    Ok(endpoints
        .iter()
        .map(|e| modes.nearest(e).expect("nonempty mode set"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cl(labels: &[usize]) -> Clustering {
        Clustering::from_raw_labels(&labels.iter().map(|&l| Some(l)).collect::<Vec<_>>())
    }

    #[test]
    fn identical_partitions() {
        let a = cl(&[0, 0, 1, 2, 2]);
        assert_eq!(rand_index(&a, &a).unwrap(), 1.0);
        let r = split_merge_rates(&a, &a).unwrap();
        assert_eq!((r.false_merge, r.false_split), (0.0, 0.0));
        assert_eq!(miscluster_fraction(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn two_nodes_together_vs_apart() {
        assert_eq!(rand_index(&cl(&[0, 0]), &cl(&[0, 1])).unwrap(), 0.0);
    }

    #[test]
    fn four_node_example() {
        let r = cl(&[0, 0, 1, 1]);
        let p = cl(&[0, 1, 1, 1]);
        assert_eq!(rand_index(&r, &p).unwrap(), 0.5);
        let rates = split_merge_rates(&r, &p).unwrap();
        assert_eq!(rates.false_merge, 0.5);
        assert_eq!(rates.false_split, 0.5);
    }

    #[test]
    fn all_in_one_cluster() {
        let r = cl(&[0, 0, 1, 1, 2]);
        let p = cl(&[0; 5]);
        let rates = split_merge_rates(&r, &p).unwrap();
        assert_eq!((rates.false_merge, rates.false_split), (1.0, 0.0));
    }

    #[test]
    fn zero_denominators_are_flagged() {
        let r = cl(&[0, 0, 0]);
        let rates = split_merge_rates(&r, &cl(&[0, 1, 1])).unwrap();
        assert!(rates.merge_undefined);
        assert_eq!(rates.false_merge, 0.0);
        assert!(!rates.split_undefined);
        let r = cl(&[0, 1, 2]);
        assert!(split_merge_rates(&r, &r).unwrap().split_undefined);
    }

    #[test]
    fn miscluster_absorbs_permutation_and_splits() {
        let r = cl(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(
            miscluster_fraction(&r, &cl(&[5, 5, 5, 2, 2, 2])).unwrap(),
            0.0
        );
        assert_eq!(
            miscluster_fraction(&r, &cl(&[0, 0, 3, 1, 1, 1])).unwrap(),
            0.0
        );
        assert_eq!(
            miscluster_fraction(&r, &cl(&[0, 0, 0, 0, 1, 1])).unwrap(),
            1.0 / 6.0
        );
    }

    #[test]
    fn unassigned_nodes_are_dropped() {
        let r = Clustering::from_raw_labels(&[Some(0), Some(0), None, Some(1)]);
        let p = cl(&[0, 0, 1, 1]);
        assert_eq!(rand_index(&r, &p).unwrap(), 1.0);
        let (rep, _) = agreement(&r, &p).unwrap();
        assert_eq!(rep.n_effective, 3);
        let lonely = Clustering::from_raw_labels(&[Some(0), None]);
        assert!(matches!(
            rand_index(&lonely, &cl(&[0, 0])),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        assert!(rand_index(&cl(&[0, 0]), &cl(&[0, 0, 0])).is_err());
    }

    #[test]
    fn report_json_field_names() {
        let (rep, _) = agreement(&cl(&[0, 0, 1]), &cl(&[0, 0, 1])).unwrap();
        let v: serde_json::Value = serde_json::to_value(rep).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            [
                "false_merge_rate",
                "false_split_rate",
                "miscluster_fraction",
                "n_effective",
                "rand_index"
            ]
        );
    }

    #[test]
    fn endpoint_distances() {
        let modes = ModeSet {
            modes: vec![vec![0.0, 0.0]],
            values: vec![1.0],
        };
        let d = endpoint_mode_distances(&[vec![0.0, 0.0], vec![3.0, 4.0]], &modes).unwrap();
        assert_eq!(d, vec![(0, 0.0), (0, 5.0)]);
        let empty = ModeSet {
            modes: vec![],
            values: vec![],
        };
        assert!(endpoint_mode_distances(&[vec![0.0]], &empty).is_err());
    }
}
