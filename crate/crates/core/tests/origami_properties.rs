use std::f64::consts::PI;

use proptest::prelude::*;
use vge_core::counting::Limits;
use vge_core::origami::{
    can_concatenate, cone_points, enumerate_saddles, genus, trace_separatrix, volume, Origami,
    Surface,
};
use vge_core::Error;

/// Cycle lengths of the commutator `v⁻¹ h⁻¹ v h`: one cycle per vertex, of
/// length `k + 1`.
fn commutator_cycles(h: &[u32], v: &[u32]) -> Vec<usize> {
    let n = h.len();
    let inv = |p: &[u32]| {
        let mut q = vec![0u32; n];
        for (i, &x) in p.iter().enumerate() {
            q[x as usize] = i as u32;
        }
        q
    };
    let (hi, vi) = (inv(h), inv(v));
    let c: Vec<usize> = (0..n)
        .map(|i| vi[hi[v[h[i] as usize] as usize] as usize] as usize)
        .collect();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n {
        let mut len = 0;
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            i = c[i];
            len += 1;
        }
        if len > 0 {
            out.push(len);
        }
    }
    out.sort_unstable();
    out
}

fn library() -> Vec<Origami> {
    let one = |h: &[u32], v: &[u32]| Origami::from_one_indexed(h, v).unwrap();
    vec![
        Origami::l_shape(),
        one(&[2, 1], &[2, 1]),
        one(&[2, 3, 1, 4], &[1, 4, 3, 2]),
        one(&[2, 3, 4, 1], &[1, 2, 4, 3]),
        one(&[2, 1, 4, 3, 5], &[1, 3, 2, 5, 4]),
        one(&[2, 3, 4, 5, 6, 1], &[4, 2, 6, 1, 5, 3]),
        one(&[2, 3, 1, 5, 6, 4], &[4, 5, 6, 1, 2, 3]),
    ]
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<u32>> {
    Just((0..n as u32).collect::<Vec<u32>>()).prop_shuffle()
}

fn origami() -> impl Strategy<Value = Origami> {
    (1usize..=6)
        .prop_flat_map(|n| (permutation(n), permutation(n)))
        .prop_filter_map("disconnected", |(h, v)| Origami::new(h, v).ok())
}

#[test]
fn gauss_bonnet_on_library() {
    for o in library() {
        let cycles = commutator_cycles(o.sigma_h(), o.sigma_v());
        let g = genus(&o);
        assert_eq!(
            2 * g as isize - 2,
            cycles.iter().map(|&c| c as isize - 1).sum::<isize>()
        );
        match cone_points(&o, false) {
            Ok(cones) => {
                assert_eq!(cones.iter().map(|c| c.k).sum::<usize>(), 2 * g - 2);
                let mut ks: Vec<usize> = cones.iter().map(|c| c.k + 1).collect();
                ks.sort_unstable();
                let singular: Vec<usize> = cycles.iter().copied().filter(|&c| c > 1).collect();
                assert_eq!(ks, singular);
            }
            Err(e) => {
                assert_eq!(e, Error::NoSingularities);
                assert_eq!(g, 1);
            }
        }
    }
}

#[test]
fn torus_has_no_cone_points() {
    assert_eq!(
        Surface::new(Origami::torus(), false).unwrap_err(),
        Error::NoSingularities
    );
    assert_eq!(genus(&Origami::torus()), 1);
}

#[test]
fn saddle_tables_are_prefix_closed() {
    let s = Surface::new(Origami::l_shape(), false).unwrap();
    let long = enumerate_saddles(&s, 6.0).unwrap();
    for l in [1.0, 2.5, 4.0] {
        let short = enumerate_saddles(&s, l).unwrap();
        assert_eq!(&long[..short.len()], &short[..]);
        assert!(long[short.len()].length > l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cone_data_satisfies_gauss_bonnet(o in origami()) {
        let cycles = commutator_cycles(o.sigma_h(), o.sigma_v());
        let g = genus(&o);
        prop_assert_eq!(2 * g as isize - 2, cycles.iter().map(|&c| c as isize - 1).sum::<isize>());
        let marked = cone_points(&o, true).unwrap();
        prop_assert_eq!(marked.len(), cycles.len());
        for c in &marked {
            prop_assert_eq!(c.corners.len(), 4 * (c.k + 1));
            prop_assert!((c.angle - 2.0 * PI * (c.k + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_invariants(o in origami(), l in 1.0f64..3.5) {
        let Ok(s) = Surface::new(o, false) else { return Ok(()); };
        let saddles = enumerate_saddles(&s, l).unwrap();
        prop_assert!(saddles.len().is_multiple_of(2));
        for x in &saddles {
            let r = &saddles[x.reverse_id];
            prop_assert_eq!(r.reverse_id, x.id);
            prop_assert_eq!(r.direction, (-x.direction.0, -x.direction.1));
            prop_assert_eq!(r.length, x.length);
            prop_assert_eq!((r.start.cone, r.start.corner_index), (x.end.cone, x.end.corner_index));
            let (p, q) = x.direction;
            let m = x.multiplicity as i64;
            prop_assert_eq!(x.holonomy, (m * p, m * q));
            prop_assert!((x.length - ((x.holonomy.0.pow(2) + x.holonomy.1.pow(2)) as f64).sqrt()).abs() < 1e-12);
            let again = trace_separatrix(&s, x.start.cone, x.start.corner_index, p, q, l).unwrap().unwrap();
            prop_assert_eq!(again.end, x.end);
            prop_assert_eq!(again.length, x.length);
        }
        for a in saddles.iter().take(40) {
            for b in saddles.iter().take(40) {
                if a.end.cone == b.start.cone {
                    let ra = &saddles[a.reverse_id];
                    let rb = &saddles[b.reverse_id];
                    prop_assert_eq!(can_concatenate(&s, a, b), can_concatenate(&s, rb, ra));
                }
            }
        }
    }

    #[test]
    fn small_balls_are_euclidean_cones(o in origami(), frac in 0.05f64..0.95) {
        let Ok(s) = Surface::new(o, false) else { return Ok(()); };
        let shortest = enumerate_saddles(&s, 2.0).unwrap().first().map_or(2.0, |x| x.length);
        let r = frac * shortest;
        for (x, c) in s.cones().iter().enumerate() {
            let v = volume(&s, x, &[r], &Limits::default()).unwrap().volumes[0];
            let expect = (c.k + 1) as f64 * PI * r * r;
            prop_assert!((v - expect).abs() < 1e-12 * expect.max(1.0));
        }
    }
}
