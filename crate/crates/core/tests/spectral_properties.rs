use std::f64::consts::SQRT_2;

use proptest::prelude::*;
use vge_core::counting::{check_arithmetic, enumerate_paths, Limits, PathStream};
use vge_core::graph::MetricGraph;
use vge_core::spectral::{
    build_truncation, entropy, perron, perron_matrix, schur_w, EntropyOptions,
};

fn finite_graphs() -> Vec<MetricGraph> {
    vec![
        MetricGraph::bouquet(&[1.0, 1.0]).unwrap(),
        MetricGraph::bouquet(&[1.0, 2.0]).unwrap(),
        MetricGraph::bouquet(&[1.0, SQRT_2]).unwrap(),
        MetricGraph::new(
            3,
            &[
                (0, 1, 1.0),
                (1, 2, SQRT_2),
                (2, 0, 0.7),
                (0, 0, 1.3),
                (1, 0, 2.1),
                (2, 1, 0.9),
            ],
            vec![],
        )
        .unwrap(),
    ]
}

#[test]
fn radius_decreases_in_sigma() {
    for g in finite_graphs() {
        let n = g.edge_count().unwrap();
        let rhos: Vec<f64> = (1..=10)
            .map(|i| {
                let w = schur_w(&g, 0.2 * i as f64, n, n).unwrap();
                perron(&w, 1e-13, 1_000_000).unwrap().rho
            })
            .collect();
        assert!(rhos.windows(2).all(|w| w[0] > w[1]), "{rhos:?}");
    }
}

/// A split `k < K` changes `ρ(W_σ)` away from the crossing, but not where it
/// equals 1 nor on which side of 1 it lies. Splits whose tail block has norm
/// at least 1 have no Schur complement and are skipped.
#[test]
fn schur_split_agrees_with_unsplit_matrix() {
    let mut checked = 0;
    for g in finite_graphs() {
        let n = g.edge_count().unwrap();
        let h = entropy(&g, &EntropyOptions::default()).unwrap().h;
        let full = perron_matrix(
            &build_truncation(&g, h, n).unwrap().entries,
            1e-13,
            1_000_000,
        )
        .unwrap()
        .rho;
        assert!((full - 1.0).abs() < 1e-10);
        for k in 1..n {
            let Ok(w) = schur_w(&g, h, k, n) else {
                continue;
            };
            let at_h = perron(&w, 1e-13, 1_000_000).unwrap().rho;
            assert!((at_h - full).abs() < 1e-10, "k = {k}: {at_h} vs {full}");
            checked += 1;
            for sigma in [0.5 * h, 1.5 * h] {
                let Ok(w) = schur_w(&g, sigma, k, n) else {
                    continue;
                };
                let split = perron(&w, 1e-13, 1_000_000).unwrap().rho;
                let whole = perron_matrix(
                    &build_truncation(&g, sigma, n).unwrap().entries,
                    1e-13,
                    1_000_000,
                )
                .unwrap()
                .rho;
                assert_eq!(split > 1.0, whole > 1.0);
                checked += 1;
            }
        }
    }
    assert!(checked >= 10, "{checked}");
}

#[test]
fn path_lengths_are_reproducible() {
    for g in finite_graphs() {
        let stream: PathStream = enumerate_paths(&g, 0, 8.0, &Limits::default()).unwrap();
        let table = stream.edge_table().to_vec();
        for p in stream {
            let p = p.unwrap();
            let sum: f64 = p.edges.iter().map(|&e| table[e].length).sum();
            assert!((sum - p.total_length).abs() <= 1e-12 * sum);
            assert!(p.is_consistent(&table));
        }
    }
}

proptest! {
    #[test]
    fn arithmeticity_is_scale_invariant(
        ks in prop::collection::vec(1u32..40, 2..8),
        d in 0.1f64..3.0,
        s in 0.2f64..5.0,
        irrational in any::<bool>(),
    ) {
        let mut lengths: Vec<f64> = ks.iter().map(|&k| k as f64 * d).collect();
        if irrational {
            lengths.push(d * SQRT_2);
        }
        let max = lengths.iter().cloned().fold(0.0, f64::max);
        let r = check_arithmetic(&lengths, 1e-9 * max).unwrap();
        let scaled: Vec<f64> = lengths.iter().map(|l| l * s).collect();
        let rs = check_arithmetic(&scaled, 1e-9 * max * s).unwrap();
        prop_assert_eq!(r.is_arithmetic, rs.is_arithmetic);
        prop_assert_eq!(r.is_arithmetic, !irrational);
        if let (Some(a), Some(b)) = (r.d, rs.d) {
            prop_assert!((b - a * s).abs() < 1e-8 * b);
        }
    }
}
