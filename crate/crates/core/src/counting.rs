//! Brute-force oracles: path enumeration and counting by total length,
//! closed-path lengths, arithmeticity detection and growth-rate fits.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::{EdgeEntry, MetricGraph, PathRecord};
use crate::math::{self, within};
use crate::{Error, Result};

/// Caps on enumeration work. Exceeding a cap is an error, never a silent
/// truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Maximum number of live nodes in the best-first frontier.
    pub frontier_cap: u64,
    /// Maximum number of paths visited by a depth-first count.
    pub visit_cap: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            frontier_cap: 100_000_000,
            visit_cap: 20_000_000_000,
        }
    }
}

/// A length-weighted successor system: nodes are edges (or saddle
/// connections) and a path is a sequence of nodes, each a successor of the
/// previous one.
pub trait Transitions {
    fn node_count(&self) -> usize;
    fn length(&self, node: usize) -> f64;
    /// Successors sorted by nondecreasing length.
    fn successors(&self, node: usize) -> &[u32];
}

/// Visits every path that starts with `first` and has total length within
/// `budget`, depth first. `visit` receives the last node and the total
/// length. Returns the number of visited paths.
pub fn walk<T, F>(sys: &T, first: usize, budget: f64, visit_cap: u64, mut visit: F) -> Result<u64>
where
    T: Transitions + ?Sized,
    F: FnMut(usize, f64),
{
    let l0 = sys.length(first);
    if !within(l0, budget) {
        return Ok(0);
    }
    visit(first, l0);
    let mut visited = 1u64;
    let mut stack: Vec<(usize, f64, usize)> = vec![(first, l0, 0)];
    while let Some(top) = stack.last_mut() {
        let (node, total, idx) = *top;
        let succ = sys.successors(node);
        if let Some(&next) = succ.get(idx) {
            let next = next as usize;
            let len = total + sys.length(next);
            if within(len, budget) {
                top.2 += 1;
                visited += 1;
                if visited > visit_cap {
                    return Err(Error::ResourceLimit {
                        what: "visited paths",
                        cap: visit_cap,
                    });
                }
                visit(next, len);
                stack.push((next, len, 0));
                continue;
            }
        }
        stack.pop();
    }
    Ok(visited)
}

/// Index of the first radius in `grid` that admits `len`, or `grid.len()`.
#[inline]
pub fn grid_bucket(grid: &[f64], len: f64) -> usize {
    grid.partition_point(|&r| !within(len, r))
}

/// Per-bucket path counts for paths starting with `first` (not cumulative).
pub fn count_histogram<T: Transitions + ?Sized>(
    sys: &T,
    first: usize,
    grid: &[f64],
    visit_cap: u64,
) -> Result<Vec<u64>> {
    let mut hist = vec![0u64; grid.len()];
    let Some(&budget) = grid.last() else {
        return Ok(hist);
    };
    walk(sys, first, budget, visit_cap, |_, len| {
        let b = grid_bucket(grid, len);
        if b < hist.len() {
            hist[b] += 1;
        }
    })?;
    Ok(hist)
}

/// The edges of a graph up to some radius, arranged for depth-first walks.
#[derive(Clone, Debug)]
pub struct GraphTransitions {
    table: Vec<EdgeEntry>,
    out_by_vertex: Vec<Vec<u32>>,
}

impl GraphTransitions {
    /// All edges of length at most `max_len`.
    pub fn new(graph: &MetricGraph, max_len: f64) -> Result<Self> {
        Ok(Self::from_table(
            graph.vertex_count(),
            graph.edges_up_to(max_len)?,
        ))
    }

    /// From an explicit prefix of the global edge order.
    pub fn from_table(vertex_count: usize, table: Vec<EdgeEntry>) -> Self {
        let mut out_by_vertex = vec![Vec::new(); vertex_count];
        // the table is in global (length) order, so each list is sorted
        for (i, e) in table.iter().enumerate() {
            out_by_vertex[e.source].push(i as u32);
        }
        GraphTransitions {
            table,
            out_by_vertex,
        }
    }

    pub fn table(&self) -> &[EdgeEntry] {
        &self.table
    }

    /// Edges leaving vertex `x`, shortest first.
    pub fn starts(&self, x: usize) -> &[u32] {
        &self.out_by_vertex[x]
    }
}

impl Transitions for GraphTransitions {
    fn node_count(&self) -> usize {
        self.table.len()
    }

    fn length(&self, node: usize) -> f64 {
        self.table[node].length
    }

    fn successors(&self, node: usize) -> &[u32] {
        &self.out_by_vertex[self.table[node].target]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountCurve {
    pub radii: Vec<f64>,
    /// Number of nonempty paths from `start_vertex` of length at most each radius.
    pub counts: Vec<u64>,
    pub start_vertex: usize,
}

impl CountCurve {
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.radii
            .iter()
            .zip(&self.counts)
            .map(|(&r, &c)| (r, c as f64))
            .collect()
    }
}

pub fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty radius grid".into()));
    }
    if grid.iter().any(|r| !r.is_finite() || *r <= 0.0) {
        return Err(Error::InvalidArgument("radii must be positive".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "radius grid must be increasing".into(),
        ));
    }
    Ok(())
}

/// Turns per-bucket counts into cumulative counts.
pub fn cumulate(hist: &mut [u64]) {
    let mut acc = 0u64;
    for h in hist.iter_mut() {
        acc += *h;
        *h = acc;
    }
}

/// `N(x, R)` on an increasing grid, by depth-first counting.
pub fn count_paths(
    graph: &MetricGraph,
    x: usize,
    grid: &[f64],
    limits: &Limits,
) -> Result<CountCurve> {
    validate_grid(grid)?;
    check_vertex(graph, x)?;
    let sys = GraphTransitions::new(graph, *grid.last().unwrap())?;
    let mut total = vec![0u64; grid.len()];
    let mut budget = limits.visit_cap;
    for &first in sys.starts(x) {
        let mut visited = 0u64;
        let hist = count_histogram(&sys, first as usize, grid, budget)?;
        for (t, h) in total.iter_mut().zip(&hist) {
            *t += h;
            visited += h;
        }
        budget = budget.saturating_sub(visited);
    }
    cumulate(&mut total);
    Ok(CountCurve {
        radii: grid.to_vec(),
        counts: total,
        start_vertex: x,
    })
}

fn check_vertex(graph: &MetricGraph, x: usize) -> Result<()> {
    if x < graph.vertex_count() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("vertex {x} out of range")))
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Frontier {
    len: f64,
    edges: Vec<u32>,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .len
            .total_cmp(&self.len)
            .then_with(|| other.edges.cmp(&self.edges))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Best-first (uniform-cost) stream of the nonempty paths from a vertex,
/// ordered by total length and then lexicographically by edge indices.
pub struct PathStream {
    sys: GraphTransitions,
    heap: BinaryHeap<Frontier>,
    radius: f64,
    cap: u64,
    failed: bool,
}

impl PathStream {
    pub fn edge_table(&self) -> &[EdgeEntry] {
        self.sys.table()
    }
}

impl Iterator for PathStream {
    type Item = Result<PathRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let node = self.heap.pop()?;
        let last = *node.edges.last().unwrap() as usize;
        for &next in self.sys.successors(last) {
            let len = node.len + self.sys.length(next as usize);
            if !within(len, self.radius) {
                break;
            }
            let mut edges = node.edges.clone();
            edges.push(next);
            self.heap.push(Frontier { len, edges });
        }
        if self.heap.len() as u64 > self.cap {
            self.failed = true;
            return Some(Err(Error::ResourceLimit {
                what: "enumeration frontier",
                cap: self.cap,
            }));
        }
        Some(Ok(PathRecord {
            edges: node.edges.iter().map(|&e| e as usize).collect(),
            total_length: node.len,
        }))
    }
}

/// Every nonempty path from `x` with length at most `r`, in sorted order.
/// All edges of length at most `r` are included automatically.
pub fn enumerate_paths(
    graph: &MetricGraph,
    x: usize,
    r: f64,
    limits: &Limits,
) -> Result<PathStream> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius {r} must be positive"
        )));
    }
    check_vertex(graph, x)?;
    let sys = GraphTransitions::new(graph, r)?;
    let heap = sys
        .starts(x)
        .iter()
        .map(|&e| Frontier {
            len: sys.length(e as usize),
            edges: vec![e],
        })
        .collect();
    Ok(PathStream {
        sys,
        heap,
        radius: r,
        cap: limits.frontier_cap,
        failed: false,
    })
}

/// Lengths of all closed paths (`i(e_1) = t(e_n)`, any start vertex) of
/// length at most `max_len`, with multiplicity, sorted.
pub fn closed_path_lengths(graph: &MetricGraph, max_len: f64, limits: &Limits) -> Result<Vec<f64>> {
    if !(max_len > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "length bound {max_len} must be positive"
        )));
    }
    let sys = GraphTransitions::new(graph, max_len)?;
    let mut out = Vec::new();
    let mut budget = limits.visit_cap;
    for v in 0..graph.vertex_count() {
        for &first in sys.starts(v) {
            let visited = walk(&sys, first as usize, max_len, budget, |node, len| {
                if sys.table[node].target == v {
                    out.push(len);
                }
            })?;
            budget = budget.saturating_sub(visited);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// All paths of exactly `edge_count` edges in `table` that start with edge
/// `first` and end with edge `last`, by exhaustive recursion.
pub fn paths_by_edge_count(
    table: &[EdgeEntry],
    edge_count: usize,
    first: usize,
    last: usize,
) -> Vec<PathRecord> {
    fn extend(
        table: &[EdgeEntry],
        want: usize,
        last: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<PathRecord>,
    ) {
        let tail = *cur.last().unwrap();
        if cur.len() == want {
            if tail == last {
                out.push(PathRecord {
                    edges: cur.clone(),
                    total_length: cur.iter().map(|&e| table[e].length).sum(),
                });
            }
            return;
        }
        for e in 0..table.len() {
            if table[tail].target == table[e].source {
                cur.push(e);
                extend(table, want, last, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    if edge_count == 0 {
        return out;
    }
    extend(table, edge_count, last, &mut vec![first], &mut out);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArithmeticityReport {
    pub is_arithmetic: bool,
    /// Common divisor, present when `is_arithmetic`.
    pub d: Option<f64>,
    /// Approximate gcd from the Euclidean reduction, reported either way.
    pub candidate: f64,
    /// Largest `|ℓ - d·round(ℓ/d)|` against the candidate.
    pub max_residual: f64,
    /// Candidate is within three orders of magnitude of `tol`; no hard verdict.
    pub near_tol: bool,
    /// Up to three `(ℓ_min, ℓ)` pairs with the largest residuals.
    pub witnesses: Vec<(f64, f64)>,
}

/// Approximate gcd of two nonnegative reals: Euclid with nearest remainders,
/// stopping once the remainder drops to `tol`.
pub fn approx_gcd(a: f64, b: f64, tol: f64) -> f64 {
    let (mut a, mut b) = if a >= b { (a, b) } else { (b, a) };
    while b > tol {
        let r = math::fmod(a, b);
        let r = r.min(b - r);
        a = b;
        b = r;
    }
    a
}

fn residual(len: f64, d: f64) -> f64 {
    (len - d * math::round(len / d)).abs()
}

/// Detects whether all lengths lie (within `tol`) in `d·ℕ` for some `d > tol`.
pub fn check_arithmetic(lengths: &[f64], tol: f64) -> Result<ArithmeticityReport> {
    if lengths.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let mut sorted: Vec<f64> = lengths.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut candidate = sorted[0];
    for &l in &sorted[1..] {
        if candidate <= tol {
            break;
        }
        candidate = approx_gcd(l, candidate, tol);
    }
    let mut scored: Vec<(f64, f64)> = sorted
        .iter()
        .map(|&l| {
            (
                l,
                if candidate > tol {
                    residual(l, candidate)
                } else {
                    l
                },
            )
        })
        .collect();
    let max_residual = scored.iter().fold(0.0f64, |m, s| m.max(s.1));
    let near_tol = candidate > tol && candidate < 1e3 * tol;
    let is_arithmetic = candidate > tol && !near_tol && max_residual <= tol;
    scored.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.total_cmp(&y.0)));
    let witnesses = scored
        .iter()
        .filter(|s| s.0 != sorted[0])
        .take(3)
        .map(|s| (sorted[0], s.0))
        .collect();
    Ok(ArithmeticityReport {
        is_arithmetic,
        d: is_arithmetic.then_some(candidate),
        candidate,
        max_residual,
        near_tol,
        witnesses,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthEstimate {
    /// Least-squares slope of `log value` against `R`.
    pub slope: f64,
    pub stderr: f64,
    pub points: usize,
    /// The log values were constant over the window.
    pub flat: bool,
}

/// Slope of `log value` vs `R` over the top `window` fraction of the radius
/// range, using only positive values.
pub fn growth_rate_samples(samples: &[(f64, f64)], window: f64) -> Result<GrowthEstimate> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "window {window} must lie in (0, 1]"
        )));
    }
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(Error::InsufficientData("no samples".into()));
    };
    let cutoff = last.0 - window * (last.0 - first.0);
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(r, v)| *r >= cutoff - 1e-12 * cutoff.abs().max(1.0) && *v > 0.0)
        .map(|&(r, v)| (r, math::ln(v)))
        .collect();
    let n = pts.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!(
            "{n} positive points in the top window; need at least 5"
        )));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let flat = pts.iter().all(|p| p.1 == pts[0].1);
    let slope = if flat { 0.0 } else { sxy / sxx };
    let sse: f64 = pts
        .iter()
        .map(|p| {
            let e = p.1 - my - slope * (p.0 - mx);
            e * e
        })
        .sum();
    let stderr = math::sqrt(sse / (nf - 2.0) / sxx);
    Ok(GrowthEstimate {
        slope,
        stderr,
        points: n,
        flat,
    })
}

pub fn growth_rate(curve: &CountCurve, window: f64) -> Result<GrowthEstimate> {
    growth_rate_samples(&curve.samples(), window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::TailFamily;
    use alloc::vec;
    use core::f64::consts::SQRT_2;

    fn collect(g: &MetricGraph, r: f64) -> Vec<PathRecord> {
        enumerate_paths(g, 0, r, &Limits::default())
            .unwrap()
            .map(|p| p.unwrap())
            .collect()
    }

    #[test]
    fn two_unit_loops_radius_two() {
        let g = MetricGraph::bouquet(&[1.0, 1.0]).unwrap();
        let paths = collect(&g, 2.0);
        assert_eq!(paths.len(), 6);
        assert_eq!(paths.iter().filter(|p| p.total_length == 1.0).count(), 2);
        assert_eq!(paths.iter().filter(|p| p.total_length == 2.0).count(), 4);
        assert!(collect(&g, 0.5).is_empty());
    }

    #[test]
    fn arithmetic_tail_compositions() {
        let g = MetricGraph::new(1, &[], vec![TailFamily::arithmetic(0, 0, 0.0, 1.0)]).unwrap();
        let paths = collect(&g, 3.0);
        // edges 0,1,2 have lengths 1,2,3
        let words: Vec<Vec<usize>> = paths.iter().map(|p| p.edges.clone()).collect();
        assert_eq!(
            words,
            vec![
                vec![0],
                vec![0, 0],
                vec![1],
                vec![0, 0, 0],
                vec![0, 1],
                vec![1, 0],
                vec![2]
            ]
        );
    }

    #[test]
    fn stream_is_sorted_and_consistent() {
        let g = MetricGraph::new(
            2,
            &[(0, 1, 1.0), (1, 0, SQRT_2), (0, 0, 1.7), (1, 1, 0.9)],
            vec![],
        )
        .unwrap();
        let stream = enumerate_paths(&g, 0, 6.0, &Limits::default()).unwrap();
        let table = stream.edge_table().to_vec();
        let paths: Vec<_> = stream.map(|p| p.unwrap()).collect();
        for w in paths.windows(2) {
            let ord = w[0]
                .total_length
                .total_cmp(&w[1].total_length)
                .then(w[0].edges.cmp(&w[1].edges));
            assert_eq!(ord, Ordering::Less);
        }
        assert!(paths.iter().all(|p| p.is_consistent(&table)));
    }

    #[test]
    fn frontier_cap_is_an_error() {
        let g = MetricGraph::bouquet(&[1.0, 1.0]).unwrap();
        let limits = Limits {
            frontier_cap: 10,
            ..Limits::default()
        };
        let res: Vec<_> = enumerate_paths(&g, 0, 10.0, &limits).unwrap().collect();
        assert!(matches!(
            res.last(),
            Some(Err(Error::ResourceLimit { cap: 10, .. }))
        ));
    }

    #[test]
    fn counts_on_small_graphs() {
        let g = MetricGraph::bouquet(&[1.0, 1.0]).unwrap();
        let c = count_paths(&g, 0, &[1.0, 2.0, 3.0], &Limits::default()).unwrap();
        assert_eq!(c.counts, vec![2, 6, 14]);
        let g = MetricGraph::bouquet(&[1.0, 2.0]).unwrap();
        assert_eq!(
            count_paths(&g, 0, &[2.0], &Limits::default())
                .unwrap()
                .counts,
            vec![3]
        );
        assert_eq!(
            count_paths(&g, 0, &[0.5], &Limits::default())
                .unwrap()
                .counts,
            vec![0]
        );
    }

    #[test]
    fn visit_cap_is_an_error() {
        let g = MetricGraph::bouquet(&[1.0, 1.0]).unwrap();
        let limits = Limits {
            visit_cap: 100,
            ..Limits::default()
        };
        assert!(matches!(
            count_paths(&g, 0, &[10.0], &limits),
            Err(Error::ResourceLimit { .. })
        ));
    }

    #[test]
    fn closed_lengths() {
        let g = MetricGraph::bouquet(&[1.0, 1.0]).unwrap();
        assert_eq!(
            closed_path_lengths(&g, 2.0, &Limits::default()).unwrap(),
            vec![1.0, 1.0, 2.0, 2.0, 2.0, 2.0]
        );
        let g = MetricGraph::new(2, &[(0, 1, 1.0), (1, 0, 2.0)], vec![]).unwrap();
        assert!(closed_path_lengths(&g, 2.0, &Limits::default())
            .unwrap()
            .is_empty());
        assert_eq!(
            closed_path_lengths(&g, 3.0, &Limits::default()).unwrap(),
            vec![3.0, 3.0]
        );
    }

    #[test]
    fn arithmeticity() {
        let r = check_arithmetic(&[1.0, 2.0, 3.0], 1e-9).unwrap();
        assert!(r.is_arithmetic);
        assert_eq!(r.d, Some(1.0));
        assert!(
            !check_arithmetic(&[1.0, SQRT_2], 1e-9)
                .unwrap()
                .is_arithmetic
        );
        assert_eq!(check_arithmetic(&[], 1e-9).unwrap_err(), Error::EmptyInput);
    }

    #[test]
    fn arithmeticity_half_matches_divisor_scan() {
        let lens = [1.0, 1.5, 2.0];
        // brute-force oracle: largest ℓ_min/k dividing every length
        let oracle = (1..=1000)
            .map(|k| lens[0] / k as f64)
            .find(|&d| lens.iter().all(|&l| residual(l, d) <= 1e-9))
            .unwrap();
        let r = check_arithmetic(&lens, 1e-9).unwrap();
        assert!(r.is_arithmetic);
        assert!((r.d.unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.5).abs() < 1e-15);
    }

    #[test]
    fn growth_of_exact_exponential() {
        let samples: Vec<_> = (0..=100)
            .map(|i| {
                let r = 10.0 + 0.1 * i as f64;
                (r, math::exp(2.0 * r))
            })
            .collect();
        let est = growth_rate_samples(&samples, 0.5).unwrap();
        assert!((est.slope - 2.0).abs() < 1e-12);
    }

    #[test]
    fn growth_of_two_loops() {
        let g = MetricGraph::bouquet(&[1.0, 1.0]).unwrap();
        let grid: Vec<f64> = (1..=20).map(|i| i as f64).collect();
        let curve = count_paths(&g, 0, &grid, &Limits::default()).unwrap();
        for (i, &c) in curve.counts.iter().enumerate() {
            assert_eq!(c, (1u64 << (i + 2)) - 2);
        }
        let est = growth_rate(&curve, 0.5).unwrap();
        assert!((0.68..=0.70).contains(&est.slope), "{}", est.slope);
    }

    #[test]
    fn growth_edge_cases() {
        let flat: Vec<_> = (0..10).map(|i| (i as f64, 7.0)).collect();
        let est = growth_rate_samples(&flat, 1.0).unwrap();
        assert!(est.flat);
        assert_eq!(est.slope, 0.0);
        let short: Vec<_> = (0..4).map(|i| (i as f64, 7.0)).collect();
        assert!(matches!(
            growth_rate_samples(&short, 1.0),
            Err(Error::InsufficientData(_))
        ));
    }
}
