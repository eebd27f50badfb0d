use graph_max_shift::algorithm::{self, successors_within};
use graph_max_shift::baselines;
use graph_max_shift::evaluation::{rand_index, split_merge_rates};
use graph_max_shift::{
    build_geometric_graph, build_weighted_graph, cluster, cluster_multihop, cluster_weighted,
    hill_climb, hill_climb_multihop, Clustering, GaussianMixture, Graph, HopDistance, MergeParams,
    PointSet,
};
use proptest::prelude::*;

fn point_set() -> impl Strategy<Value = PointSet> {
    (1usize..=3, 1usize..=60).prop_flat_map(|(d, n)| {
        // Quantized coordinates make exact-boundary distances common.
        prop::collection::vec(
            prop_oneof![-1.0f64..1.0, (-10i32..=10).prop_map(|k| k as f64 / 10.0)],
            n * d,
        )
        .prop_map(move |c| PointSet::new(d, c).unwrap())
    })
}

fn random_graph() -> impl Strategy<Value = Graph> {
    (1usize..=30).prop_flat_map(|n| {
        prop::collection::vec((0..n, 0..n), 0..=3 * n)
            .prop_map(move |e| Graph::from_edges(n, &e).unwrap())
    })
}

fn brute_adjacent(ps: &PointSet, eps: f64, i: usize, j: usize) -> bool {
    let mut s = 0.0;
    for (a, b) in ps.point(i).iter().zip(ps.point(j)) {
        s += (a - b) * (a - b);
    }
    s <= eps * eps
}

fn floyd_warshall(g: &Graph) -> Vec<Vec<usize>> {
    let n = g.node_count();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        for &j in g.neighbors(i) {
            d[i][j as usize] = if i == j as usize { 0 } else { 1 };
        }
        d[i][i] = 0;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

fn edge_set(g: &Graph) -> Vec<(usize, usize)> {
    g.edges().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn geometric_graph_matches_brute_force(ps in point_set(), eps in 0.01f64..0.8) {
        let g = build_geometric_graph(&ps, eps).unwrap();
        for i in 0..ps.len() {
            prop_assert!(g.is_adjacent(i, i));
            for j in 0..ps.len() {
                prop_assert_eq!(g.is_adjacent(i, j), brute_adjacent(&ps, eps, i, j), "pair {} {}", i, j);
            }
        }
    }

    #[test]
    fn threshold_equals_geometric_graph(ps in point_set(), cutoff in 0.05f64..0.8, frac in 0.1f64..=1.0) {
        let wg = build_weighted_graph(&ps, cutoff).unwrap();
        let h = cutoff * frac;
        prop_assert_eq!(wg.threshold(cutoff).unwrap(), build_geometric_graph(&ps, cutoff).unwrap());
        prop_assert_eq!(wg.threshold(h).unwrap(), build_geometric_graph(&ps, h).unwrap());
        prop_assert!(wg.threshold(cutoff * 1.01).is_err());
    }

    #[test]
    fn larger_eps_keeps_every_edge(ps in point_set(), eps in 0.01f64..0.5, grow in 1.0f64..2.0) {
        let small = build_geometric_graph(&ps, eps).unwrap();
        let big = build_geometric_graph(&ps, eps * grow).unwrap();
        for (i, j) in small.edges() {
            prop_assert!(big.is_adjacent(i, j));
        }
    }

    #[test]
    fn hop_distance_matches_floyd_warshall(g in random_graph()) {
        let n = g.node_count();
        let fw = floyd_warshall(&g);
        for i in 0..n {
            for j in 0..n {
                let got = g.hop_distance(i, j, n).unwrap();
                let want = if fw[i][j] > n { HopDistance::Unreachable } else { HopDistance::Hops(fw[i][j]) };
                prop_assert_eq!(got, want);
                for k in 0..n {
                    if let (Some(a), Some(b), Some(c)) = (
                        got.hops(),
                        g.hop_distance(i, k, n).unwrap().hops(),
                        g.hop_distance(k, j, n).unwrap().hops(),
                    ) {
                        prop_assert!(a <= b + c);
                    }
                }
            }
        }
    }

    #[test]
    fn neighbors_within_matches_floyd_warshall(g in random_graph(), m in 1usize..4) {
        let fw = floyd_warshall(&g);
        for i in 0..g.node_count() {
            let want: Vec<usize> = (0..g.node_count()).filter(|&j| fw[i][j] <= m).collect();
            prop_assert_eq!(g.neighbors_within(i, m).unwrap(), want);
        }
    }

    #[test]
    fn one_hop_multihop_is_plain_climbing(g in random_graph()) {
        let q = g.degrees();
        for s in 0..g.node_count() {
            prop_assert_eq!(hill_climb_multihop(&g, &q, s, 1).unwrap(), hill_climb(&g, &q, s).unwrap());
        }
        prop_assert_eq!(cluster_multihop(&g, 1, MergeParams::new(2)).unwrap(), cluster(&g, MergeParams::new(2)));
    }

    #[test]
    fn multihop_paths_follow_successors(g in random_graph(), m in 1usize..4) {
        let q = g.degrees();
        let succ = successors_within(&g, &q, m).unwrap();
        for s in 0..g.node_count() {
            prop_assert_eq!(algorithm::path_from_successors(&succ, s), hill_climb_multihop(&g, &q, s, m).unwrap());
        }
    }

    #[test]
    fn degrees_are_permutation_equivariant(g in random_graph(), seed in any::<u64>()) {
        let n = g.node_count();
        // Fisher-Yates driven by a tiny LCG so the permutation follows the seed.
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let edges: Vec<(usize, usize)> = edge_set(&g).into_iter().map(|(a, b)| (perm[a], perm[b])).collect();
        let h = Graph::from_edges(n, &edges).unwrap();
        for i in 0..n {
            prop_assert_eq!(g.degree(i), h.degree(perm[i]));
        }
    }

    #[test]
    fn larger_tau_only_coarsens(g in random_graph(), tau in 0usize..4) {
        let a = cluster(&g, MergeParams::new(tau)).clustering;
        let b = cluster(&g, MergeParams::new(tau + 1)).clustering;
        prop_assert!(b.k() <= a.k());
        for i in 0..g.node_count() {
            for j in 0..g.node_count() {
                if a.label(i) == a.label(j) {
                    prop_assert_eq!(b.label(i), b.label(j));
                }
            }
        }
    }

    #[test]
    fn endpoints_are_never_adjacent(g in random_graph()) {
        // A node adjacent to a higher (q, id) node would climb on, so tau = 1
        // never merges anything.
        let c = cluster(&g, MergeParams::new(0));
        let mut ends = c.endpoints.clone();
        ends.sort_unstable();
        ends.dedup();
        for &a in &ends {
            for &b in &ends {
                prop_assert!(a == b || !g.is_adjacent(a, b));
            }
        }
        prop_assert_eq!(cluster(&g, MergeParams::new(1)), c);
    }

    #[test]
    fn weighted_at_cutoff_is_plain_clustering(ps in point_set(), cutoff in 0.05f64..0.8, tau in 0usize..3) {
        let wg = build_weighted_graph(&ps, cutoff).unwrap();
        let g = wg.threshold(cutoff).unwrap();
        prop_assert_eq!(cluster_weighted(&wg, cutoff, cutoff, MergeParams::new(tau)).unwrap(), cluster(&g, MergeParams::new(tau)));
    }

    #[test]
    fn metrics_are_symmetric(a in prop::collection::vec(0usize..4, 2..20), b_seed in prop::collection::vec(0usize..4, 20)) {
        let n = a.len();
        let ca = Clustering::from_raw_labels(&a.iter().map(|&x| Some(x)).collect::<Vec<_>>());
        let cb = Clustering::from_raw_labels(&b_seed[..n].iter().map(|&x| Some(x)).collect::<Vec<_>>());
        prop_assert_eq!(rand_index(&ca, &cb).unwrap(), rand_index(&cb, &ca).unwrap());
        let ab = split_merge_rates(&ca, &cb).unwrap();
        let ba = split_merge_rates(&cb, &ca).unwrap();
        // Pairs merged relative to `a` are pairs split relative to `b`, over different denominators.
        prop_assert_eq!(ab.false_merge == 0.0, ba.false_split == 0.0);
    }
}

#[test]
fn weighted_lattice_matches_brute_force() {
    // 1-D lattice with a density bump so degrees vary.
    let xs: Vec<f64> = (0..20)
        .map(|i| {
            let t = i as f64;
            if (8..12).contains(&i) {
                8.0 + (t - 8.0) * 0.5
            } else if i >= 12 {
                t - 2.0
            } else {
                t
            }
        })
        .collect();
    let ps = PointSet::new(1, xs.clone()).unwrap();
    let (h, r) = (1.1, 2.2);
    let wg = build_weighted_graph(&ps, 3.0).unwrap();
    let got = cluster_weighted(&wg, h, r, MergeParams::new(0)).unwrap();

    let q: Vec<usize> = xs
        .iter()
        .map(|a| xs.iter().filter(|b| (a - *b).abs() <= h).count())
        .collect();
    let step = |i: usize| {
        (0..xs.len())
            .filter(|&j| (xs[i] - xs[j]).abs() <= r)
            .max_by_key(|&j| (q[j], j))
            .unwrap()
    };
    for i in 0..xs.len() {
        let mut cur = i;
        loop {
            let next = step(cur);
            if next == cur {
                break;
            }
            cur = next;
        }
        assert_eq!(got.endpoints[i], cur, "start {i}");
    }
}

#[test]
fn flat_kde_integrates_to_one() {
    let gm = GaussianMixture::fixture("bimodal-close").unwrap();
    let sample = gm.sample(200, 9).unwrap();
    let xs: Vec<f64> = sample.iter().map(|p| p[0]).collect();
    let ps = PointSet::new(1, xs).unwrap();
    let eps = 0.25;
    let (lo, hi) = (-6.0, 6.0);
    let steps = 48_000;
    let dx = (hi - lo) / steps as f64;
    let total: f64 = (0..steps)
        .map(|k| {
            let x = lo + (k as f64 + 0.5) * dx;
            baselines::flat_kde(&ps, eps, &[x]).unwrap().value * dx
        })
        .sum();
    assert!((total - 1.0).abs() < 1e-3, "integral {total}");
}

fn halton(i: u64, base: u64) -> f64 {
    let (mut i, mut f, mut out) = (i, 1.0 / base as f64, 0.0);
    while i > 0 {
        out += (i % base) as f64 * f;
        i /= base;
        f /= base as f64;
    }
    out
}

#[test]
fn mixture_densities_are_normalized() {
    for name in GaussianMixture::fixture_names() {
        let gm = GaussianMixture::fixture(name).unwrap();
        let (lo, hi) = gm.bounding_box(8.0);
        let area = (hi[0] - lo[0]) * (hi[1] - lo[1]);
        let count = 200_000u64;
        let sum: f64 = (1..=count)
            .map(|i| {
                let x = lo[0] + halton(i, 2) * (hi[0] - lo[0]);
                let y = lo[1] + halton(i, 3) * (hi[1] - lo[1]);
                gm.pdf(&[x, y]).unwrap()
            })
            .sum();
        let integral = sum / count as f64 * area;
        assert!((integral - 1.0).abs() < 1e-2, "{name}: {integral}");
    }
}
