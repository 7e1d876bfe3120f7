use proptest::prelude::*;
use vge_core::counting::{count_paths, enumerate_paths, Limits};
use vge_core::graph::{MetricGraph, TailFamily};
use vge_core::spectral::{entropy, eta, EntropyOptions};

/// Root of `Σ e^{-hℓ} = 1`, by plain bisection.
fn bouquet_entropy(lengths: &[f64]) -> f64 {
    let f = |h: f64| lengths.iter().map(|l| (-h * l).exp()).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, 50.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Spectral radius of a nonnegative 2×2 matrix.
fn rho2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b * c).sqrt()
}

/// Paths from `x` of length at most `r`, by recursion over the edge list.
fn brute_count(n_edges: &[(usize, usize, f64)], x: usize, r: f64) -> u64 {
    let mut total = 0;
    for &(s, t, l) in n_edges {
        if s == x && l <= r + 1e-9 {
            total += 1 + brute_count(n_edges, t, r - l);
        }
    }
    total
}

fn lengths() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.5f64..3.0, 2..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bouquet_entropy_matches_scalar_root(ls in lengths()) {
        let g = MetricGraph::bouquet(&ls).unwrap();
        let h = entropy(&g, &EntropyOptions::default()).unwrap().h;
        prop_assert!((h - bouquet_entropy(&ls)).abs() < 1e-8);
    }

    #[test]
    fn entropy_scales_inversely_with_length(ls in lengths(), s in 0.25f64..4.0) {
        let g = MetricGraph::bouquet(&ls).unwrap();
        let h = entropy(&g, &EntropyOptions::default()).unwrap().h;
        let hs = entropy(&g.scaled(s).unwrap(), &EntropyOptions::default()).unwrap().h;
        prop_assert!((hs * s - h).abs() < 1e-8 * h.max(1.0));
    }

    #[test]
    fn two_vertex_entropy_matches_vertex_matrix(
        a in prop::option::of(0.5f64..3.0),
        b in 0.5f64..3.0,
        c in 0.5f64..3.0,
        d in prop::option::of(0.5f64..3.0),
        b2 in prop::option::of(0.5f64..3.0),
    ) {
        let mut edges = vec![(0, 1, b), (1, 0, c)];
        edges.extend(a.map(|l| (0, 0, l)));
        edges.extend(d.map(|l| (1, 1, l)));
        edges.extend(b2.map(|l| (0, 1, l)));
        prop_assume!(a.is_some() || d.is_some() || b2.is_some());
        let g = MetricGraph::new(2, &edges, vec![]).unwrap();
        let h = entropy(&g, &EntropyOptions::default()).unwrap().h;
        let w = |z: f64, s: usize, t: usize| -> f64 {
            edges.iter().filter(|e| e.0 == s && e.1 == t).map(|e| (-z * e.2).exp()).sum()
        };
        let r = rho2(w(h, 0, 0), w(h, 0, 1), w(h, 1, 0), w(h, 1, 1));
        prop_assert!((r - 1.0).abs() < 1e-8, "rho(A(h)) = {r}");
    }

    #[test]
    fn counts_match_recursion(ls in prop::collection::vec(0.7f64..2.0, 2..4), r in 2.0f64..6.0) {
        let edges: Vec<(usize, usize, f64)> = ls.iter().map(|&l| (0, 0, l)).collect();
        let g = MetricGraph::bouquet(&ls).unwrap();
        let grid = [r / 2.0, r];
        let c = count_paths(&g, 0, &grid, &Limits::default()).unwrap();
        prop_assert_eq!(c.counts[0], brute_count(&edges, 0, r / 2.0));
        prop_assert_eq!(c.counts[1], brute_count(&edges, 0, r));
    }

    #[test]
    fn enumeration_is_sorted_and_agrees_with_counts(ls in lengths(), r in 2.0f64..6.0) {
        let g = MetricGraph::bouquet(&ls).unwrap();
        let paths: Vec<vge_core::graph::PathRecord> = enumerate_paths(&g, 0, r, &Limits::default()).unwrap().collect::<Result<_, _>>().unwrap();
        prop_assert!(paths.windows(2).all(|w| w[0].total_length <= w[1].total_length));
        let c = count_paths(&g, 0, &[r], &Limits::default()).unwrap();
        prop_assert_eq!(paths.len() as u64, c.counts[0]);
    }

    #[test]
    fn bouquet_eta_closed_form(ls in lengths(), dz in 0.1f64..2.0) {
        let g = MetricGraph::bouquet(&ls).unwrap();
        let z = bouquet_entropy(&ls) + dz;
        let s: f64 = ls.iter().map(|l| (-z * l).exp()).sum();
        let v = eta(&g, 0, z, 40).unwrap().value;
        prop_assert!((v - s / (1.0 - s)).abs() < 1e-9 * (s / (1.0 - s)).max(1.0));
    }
}

#[test]
fn edge_order_is_a_prefix_under_growing_cut() {
    let g = MetricGraph::new(
        2,
        &[(0, 1, 1.5), (1, 0, 0.7), (0, 0, 2.2)],
        vec![
            TailFamily::arithmetic(0, 1, 1.0, 1.0),
            TailFamily::power(1, 1, 1.0, 0.5),
        ],
    )
    .unwrap();
    let long = g.merged_edge_order(60).edges;
    for k in [1, 5, 17, 40] {
        let short = g.merged_edge_order(k).edges;
        assert_eq!(short.len(), k);
        assert_eq!(&long[..k], &short[..]);
    }
    assert!(long.windows(2).all(|w| w[0].length <= w[1].length));
}

#[test]
fn arithmetic_tail_has_log_two_entropy() {
    // ℓ(n) = n for n ≥ 1: Σ e^{-hn} = 1 at h = log 2
    let g = MetricGraph::new(1, &[], vec![TailFamily::arithmetic(0, 0, 0.0, 1.0)]).unwrap();
    let r = entropy(&g, &EntropyOptions::default()).unwrap();
    assert!((r.h - std::f64::consts::LN_2).abs() < 1e-6, "{}", r.h);
}
