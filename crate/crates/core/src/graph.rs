//! Directed metric graphs with finitely many vertices and a countable edge set.
//!
//! A graph is a finite list of *head* edges plus *tail families*: infinite
//! families of parallel edges between a fixed pair of vertices whose lengths
//! follow `a + b·n` or `a·n^α` for `n = 1, 2, ...`. The global edge order is
//! the merge of all of these by nondecreasing length.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::counting::{self, ArithmeticityReport, Limits};
use crate::linalg;
use crate::math;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HeadEdge {
    pub id: usize,
    pub source: usize,
    pub target: usize,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TailKind {
    /// n-th member has length `a + b·n`.
    Arithmetic { a: f64, b: f64 },
    /// n-th member has length `a·n^alpha`.
    Power { a: f64, alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailFamily {
    pub source: usize,
    pub target: usize,
    pub kind: TailKind,
}

impl TailFamily {
    pub fn arithmetic(source: usize, target: usize, a: f64, b: f64) -> Self {
        TailFamily {
            source,
            target,
            kind: TailKind::Arithmetic { a, b },
        }
    }

    pub fn power(source: usize, target: usize, a: f64, alpha: f64) -> Self {
        TailFamily {
            source,
            target,
            kind: TailKind::Power { a, alpha },
        }
    }

    /// Length of member `n >= 1`.
    pub fn member_length(&self, n: u64) -> f64 {
        let n = n as f64;
        match self.kind {
            TailKind::Arithmetic { a, b } => a + b * n,
            TailKind::Power { a, alpha } => a * math::powf(n, alpha),
        }
    }

    /// Parameter constraints that make the family's lengths strictly
    /// increasing and `Σ_n e^{-σ ℓ(n)}` finite for every `σ > 0`.
    pub fn is_summable(&self) -> bool {
        match self.kind {
            TailKind::Arithmetic { a, b } => a >= 0.0 && b > 0.0,
            TailKind::Power { a, alpha } => a > 0.0 && alpha > 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.kind {
            TailKind::Arithmetic { a, b } => {
                a.is_finite() && b.is_finite() && b >= 0.0 && a + b > 0.0
            }
            TailKind::Power { a, alpha } => {
                a.is_finite() && alpha.is_finite() && a > 0.0 && alpha >= 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGraph(format!(
                "tail family {:?} has nonpositive or decreasing lengths",
                self.kind
            )))
        }
    }
}

/// Where an edge of the global order comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeOrigin {
    Head(usize),
    Tail { family: usize, member: u64 },
}

/// An edge of the merged global order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeEntry {
    pub index: usize,
    pub source: usize,
    pub target: usize,
    pub length: f64,
    pub origin: EdgeOrigin,
}

/// Prefix of the global edge order.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeOrder {
    pub edges: Vec<EdgeEntry>,
    /// True when fewer than the requested number of edges exist.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph {
    vertex_count: usize,
    head_edges: Vec<HeadEdge>,
    tail_families: Vec<TailFamily>,
}

impl MetricGraph {
    /// Builds a graph from `(source, target, length)` head edges and tail
    /// families. Head edges are stably sorted by length and renumbered.
    pub fn new(
        vertex_count: usize,
        heads: &[(usize, usize, f64)],
        tails: Vec<TailFamily>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph(
                "graph needs at least one vertex".into(),
            ));
        }
        let check_vertex = |v: usize| {
            if v < vertex_count {
                Ok(())
            } else {
                Err(Error::InvalidGraph(format!(
                    "vertex {v} out of range 0..{vertex_count}"
                )))
            }
        };
        for &(s, t, len) in heads {
            check_vertex(s)?;
            check_vertex(t)?;
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {s}->{t} has nonpositive length {len}"
                )));
            }
        }
        for fam in &tails {
            check_vertex(fam.source)?;
            check_vertex(fam.target)?;
            fam.validate()?;
        }
        let mut sorted: Vec<(usize, usize, f64)> = heads.to_vec();
        sorted.sort_by(|a, b| a.2.total_cmp(&b.2));
        let head_edges = sorted
            .into_iter()
            .enumerate()
            .map(|(id, (source, target, length))| HeadEdge {
                id,
                source,
                target,
                length,
            })
            .collect();
        Ok(MetricGraph {
            vertex_count,
            head_edges,
            tail_families: tails,
        })
    }

    /// One vertex with a loop of each given length.
    pub fn bouquet(lengths: &[f64]) -> Result<Self> {
        let heads: Vec<_> = lengths.iter().map(|&l| (0, 0, l)).collect();
        Self::new(1, &heads, Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn head_edges(&self) -> &[HeadEdge] {
        &self.head_edges
    }

    pub fn tail_families(&self) -> &[TailFamily] {
        &self.tail_families
    }

    pub fn is_finite(&self) -> bool {
        self.tail_families.is_empty()
    }

    /// Total number of edges, `None` when infinite.
    pub fn edge_count(&self) -> Option<usize> {
        self.is_finite().then_some(self.head_edges.len())
    }

    /// Returns a copy with every length multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale {s} must be positive"
            )));
        }
        let heads: Vec<_> = self
            .head_edges
            .iter()
            .map(|e| (e.source, e.target, e.length * s))
            .collect();
        let tails = self
            .tail_families
            .iter()
            .map(|f| TailFamily {
                kind: match f.kind {
                    TailKind::Arithmetic { a, b } => TailKind::Arithmetic { a: a * s, b: b * s },
                    TailKind::Power { a, alpha } => TailKind::Power { a: a * s, alpha },
                },
                ..*f
            })
            .collect();
        Self::new(self.vertex_count, &heads, tails)
    }

    /// Lazy iterator over the global edge order.
    pub fn edges(&self) -> EdgeMerge<'_> {
        EdgeMerge {
            graph: self,
            next_head: 0,
            next_member: vec![1; self.tail_families.len()],
            index: 0,
        }
    }

    /// The `k` shortest edges. Ties go head edges first, then by family
    /// index, then by member index.
    pub fn merged_edge_order(&self, k: usize) -> EdgeOrder {
        let edges: Vec<_> = self.edges().take(k).collect();
        EdgeOrder {
            truncated: edges.len() < k,
            edges,
        }
    }

    /// Every edge of length at most `r`. Requires summable families
    /// (otherwise the set may be infinite).
    pub fn edges_up_to(&self, r: f64) -> Result<Vec<EdgeEntry>> {
        if let Some(bad) = self.tail_families.iter().find(|f| !f.is_summable()) {
            return Err(Error::InvalidGraph(format!(
                "tail family {:?} is not summable; infinitely many short edges",
                bad.kind
            )));
        }
        Ok(self
            .edges()
            .take_while(|e| math::within(e.length, r))
            .collect())
    }
}

pub struct EdgeMerge<'g> {
    graph: &'g MetricGraph,
    next_head: usize,
    next_member: Vec<u64>,
    index: usize,
}

impl Iterator for EdgeMerge<'_> {
    type Item = EdgeEntry;

    fn next(&mut self) -> Option<EdgeEntry> {
        let g = self.graph;
        // (length, origin); ties resolved by scan order: head first, then families in order
        let mut best: Option<(f64, EdgeOrigin)> = g
            .head_edges
            .get(self.next_head)
            .map(|e| (e.length, EdgeOrigin::Head(self.next_head)));
        for (family, fam) in g.tail_families.iter().enumerate() {
            let member = self.next_member[family];
            let len = fam.member_length(member);
            let better = match best {
                None => true,
                Some((b, _)) => len.total_cmp(&b) == Ordering::Less,
            };
            if better {
                best = Some((len, EdgeOrigin::Tail { family, member }));
            }
        }
        let (length, origin) = best?;
        let (source, target) = match origin {
            EdgeOrigin::Head(i) => {
                self.next_head += 1;
                (g.head_edges[i].source, g.head_edges[i].target)
            }
            EdgeOrigin::Tail { family, .. } => {
                self.next_member[family] += 1;
                let f = &g.tail_families[family];
                (f.source, f.target)
            }
        };
        let entry = EdgeEntry {
            index: self.index,
            source,
            target,
            length,
            origin,
        };
        self.index += 1;
        Some(entry)
    }
}

/// A nonempty edge path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    /// Global edge indices.
    pub edges: Vec<usize>,
    pub total_length: f64,
}

impl PathRecord {
    /// Checks adjacency and the stored length against an edge table whose
    /// position `i` holds global edge `i`.
    pub fn is_consistent(&self, table: &[EdgeEntry]) -> bool {
        if self.edges.is_empty() {
            return false;
        }
        let adjacent = self
            .edges
            .windows(2)
            .all(|w| table[w[0]].target == table[w[1]].source);
        let sum: f64 = self.edges.iter().map(|&e| table[e].length).sum();
        adjacent && (sum - self.total_length).abs() <= 1e-12 * sum.max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisReport {
    /// Every tail family is summable.
    pub h1_ok: bool,
    /// The edge-adjacency relation on the truncation is strongly connected.
    pub h2_ok: bool,
    /// Arithmeticity of closed-path lengths up to the bound; `None` when no
    /// closed path that short exists.
    pub h3: Option<ArithmeticityReport>,
}

/// Checks summability, edge-to-edge connectivity and arithmeticity of
/// closed-path lengths. `tol` is relative to the longest closed path.
///
/// Connectivity is evaluated on the `k_cut` shortest edges together with the
/// first member of every tail family (all members of a family share their
/// endpoints, so one representative decides reachability for the rest).
pub fn check_hypotheses(
    graph: &MetricGraph,
    k_cut: usize,
    max_len: f64,
    tol: f64,
) -> HypothesisReport {
    let h1_ok = graph.tail_families.iter().all(TailFamily::is_summable);

    let mut nodes: Vec<(usize, usize)> = graph
        .merged_edge_order(k_cut)
        .edges
        .iter()
        .map(|e| (e.source, e.target))
        .collect();
    nodes.extend(graph.tail_families.iter().map(|f| (f.source, f.target)));
    let h2_ok = edge_graph_strongly_connected(graph.vertex_count, &nodes);

    let h3 = if h1_ok {
        counting::closed_path_lengths(graph, max_len, &Limits::default())
            .ok()
            .filter(|l| !l.is_empty())
            .and_then(|l| {
                let longest = l.iter().fold(0.0f64, |m, &x| m.max(x));
                counting::check_arithmetic(&l, tol * longest).ok()
            })
    } else {
        None
    };
    HypothesisReport { h1_ok, h2_ok, h3 }
}

/// Strong connectivity of the relation `e -> e'` iff `t(e) = i(e')`.
pub(crate) fn edge_graph_strongly_connected(vertex_count: usize, edges: &[(usize, usize)]) -> bool {
    let mut out_by_vertex = vec![Vec::new(); vertex_count];
    let mut in_by_vertex = vec![Vec::new(); vertex_count];
    for (i, &(s, t)) in edges.iter().enumerate() {
        out_by_vertex[s].push(i);
        in_by_vertex[t].push(i);
    }
    let n = edges.len();
    let mut expanded = vec![false; vertex_count];
    let forward = linalg::reach_count(n, 0, |e, out| {
        let v = edges[e].1;
        if !expanded[v] {
            expanded[v] = true;
            out.extend_from_slice(&out_by_vertex[v]);
        }
    });
    let mut expanded = vec![false; vertex_count];
    let backward = linalg::reach_count(n, 0, |e, out| {
        let v = edges[e].0;
        if !expanded[v] {
            expanded[v] = true;
            out.extend_from_slice(&in_by_vertex[v]);
        }
    });
    n > 0 && forward == n && backward == n
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn lengths(order: &EdgeOrder) -> Vec<f64> {
        order.edges.iter().map(|e| e.length).collect()
    }

    #[test]
    fn head_only_order() {
        let g = MetricGraph::bouquet(&[2.0, 1.0]).unwrap();
        let o = g.merged_edge_order(2);
        assert_eq!(lengths(&o), vec![1.0, 2.0]);
        assert_eq!(o.edges[0].index, 0);
        assert!(!o.truncated);
        assert!(g.merged_edge_order(3).truncated);
    }

    #[test]
    fn arithmetic_tail_order() {
        let g = MetricGraph::new(1, &[], vec![TailFamily::arithmetic(0, 0, 0.0, 1.0)]).unwrap();
        assert_eq!(lengths(&g.merged_edge_order(3)), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn head_and_tail_merge_matches_two_way_merge() {
        let g = MetricGraph::new(
            1,
            &[(0, 0, 1.5)],
            vec![TailFamily::arithmetic(0, 0, 0.0, 1.0)],
        )
        .unwrap();
        // independent two-way merge of [1.5] with [1, 2, 3, ...]
        let mut oracle = vec![1.5];
        oracle.extend((1..=5).map(|n| n as f64));
        oracle.sort_by(f64::total_cmp);
        assert_eq!(lengths(&g.merged_edge_order(3)), oracle[..3].to_vec());
    }

    #[test]
    fn ties_prefer_head_then_family_order() {
        let g = MetricGraph::new(
            2,
            &[(1, 1, 2.0)],
            vec![
                TailFamily::arithmetic(0, 1, 0.0, 2.0),
                TailFamily::arithmetic(1, 0, 0.0, 2.0),
            ],
        )
        .unwrap();
        let o = g.merged_edge_order(3);
        assert_eq!(o.edges[0].origin, EdgeOrigin::Head(0));
        assert_eq!(
            o.edges[1].origin,
            EdgeOrigin::Tail {
                family: 0,
                member: 1
            }
        );
        assert_eq!(
            o.edges[2].origin,
            EdgeOrigin::Tail {
                family: 1,
                member: 1
            }
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MetricGraph::bouquet(&[0.0]).is_err());
        assert!(MetricGraph::bouquet(&[-1.0]).is_err());
        assert!(MetricGraph::new(1, &[(0, 1, 1.0)], vec![]).is_err());
        assert!(MetricGraph::new(1, &[], vec![TailFamily::arithmetic(0, 0, 1.0, -1.0)]).is_err());
        assert!(MetricGraph::new(1, &[], vec![TailFamily::power(0, 0, 0.0, 1.0)]).is_err());
    }

    #[test]
    fn hypotheses_on_two_unit_loops() {
        let g = MetricGraph::bouquet(&[1.0, 1.0]).unwrap();
        let r = check_hypotheses(&g, 10, 4.0, 1e-9);
        assert!(r.h1_ok && r.h2_ok);
        let h3 = r.h3.unwrap();
        assert!(h3.is_arithmetic);
        assert!((h3.d.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hypotheses_on_incommensurable_loops() {
        let g = MetricGraph::bouquet(&[1.0, core::f64::consts::SQRT_2]).unwrap();
        let r = check_hypotheses(&g, 10, 6.0, 1e-9);
        assert!(!r.h3.unwrap().is_arithmetic);
    }

    #[test]
    fn two_cycle_is_connected_and_path_is_not() {
        let g = MetricGraph::new(2, &[(0, 1, 1.0), (1, 0, 1.0)], vec![]).unwrap();
        assert!(check_hypotheses(&g, 10, 4.0, 1e-9).h2_ok);
        let g = MetricGraph::new(2, &[(0, 1, 1.0), (1, 1, 1.0)], vec![]).unwrap();
        assert!(!check_hypotheses(&g, 10, 4.0, 1e-9).h2_ok);
    }

    #[test]
    fn constant_family_fails_summability() {
        let g = MetricGraph::new(1, &[], vec![TailFamily::arithmetic(0, 0, 1.0, 0.0)]).unwrap();
        let r = check_hypotheses(&g, 10, 4.0, 1e-9);
        assert!(!r.h1_ok);
        assert!(g.edges_up_to(3.0).is_err());
    }
}
