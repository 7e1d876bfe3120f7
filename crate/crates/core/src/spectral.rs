//! Transfer matrices, their Schur complement onto the `k` shortest edges,
//! Perron data, entropy, the eta series and its residue at the entropy.
//!
//! Edges are indexed by the global order of [`MetricGraph::edges`]. For real
//! `z` the truncated transfer matrix is `M_z(a, b) = [t(a) = i(b)]·e^{-z ℓ(b)}`
//! on the `K` shortest edges; splitting it as
//!
//! ```text
//!     M_z = | A  B |     W_z = A + B (I - D)^{-1} C
//!           | C  D |
//! ```
//!
//! with `A` the `k × k` head block gives a `k × k` nonnegative matrix whose
//! Perron root crosses 1 exactly where `I - M_z` becomes singular. `ρ(W_σ)` is
//! strictly decreasing in `σ`, so the entropy is found by bisection.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::graph::{EdgeEntry, EdgeOrigin, MetricGraph, TailKind};
use crate::linalg::{DenseMatrix, LinearOperator};
use crate::math;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixTruncation {
    pub z: f64,
    pub entries: DenseMatrix,
    /// The prefix of the global edge order indexing rows and columns.
    pub edge_table: Vec<EdgeEntry>,
}

impl MatrixTruncation {
    pub fn size(&self) -> usize {
        self.edge_table.len()
    }
}

/// Largest dense truncation.
pub const MAX_DENSE: usize = 4096;

/// `M_z` restricted to the `k_cut` shortest edges (fewer if the graph is
/// finite and smaller).
pub fn build_truncation(graph: &MetricGraph, z: f64, k_cut: usize) -> Result<MatrixTruncation> {
    if k_cut == 0 {
        return Err(Error::InvalidArgument(
            "truncation size must be at least 1".into(),
        ));
    }
    if k_cut > MAX_DENSE {
        // dense storage only; a larger truncation needs a sparser method
        return Err(Error::ResourceLimit {
            what: "dense truncation size (use a smaller K)",
            cap: MAX_DENSE as u64,
        });
    }
    let table = graph.merged_edge_order(k_cut).edges;
    Ok(MatrixTruncation {
        z,
        entries: transfer_matrix(&table, z),
        edge_table: table,
    })
}

fn transfer_matrix(table: &[EdgeEntry], z: f64) -> DenseMatrix {
    let n = table.len();
    let weights: Vec<f64> = table.iter().map(|e| math::exp(-z * e.length)).collect();
    let mut m = DenseMatrix::zeros(n, n);
    for (a, ea) in table.iter().enumerate() {
        for (b, eb) in table.iter().enumerate() {
            if ea.target == eb.source {
                m[(a, b)] = weights[b];
            }
        }
    }
    m
}

/// Upper bound on `Σ_{m > K} e^{-σ ℓ(e_m)}`, the mass of every edge outside
/// the `k_cut` shortest.
///
/// Remaining head edges are summed exactly. Arithmetic families use the
/// geometric remainder; power families add the first neglected term to the
/// integral `∫ e^{-σ a t^α} dt` over the rest (an incomplete gamma value).
pub fn tail_mass(graph: &MetricGraph, sigma: f64, k_cut: usize) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "tail mass needs σ > 0 (got {sigma})"
        )));
    }
    let prefix = graph.merged_edge_order(k_cut).edges;
    let heads_used = prefix
        .iter()
        .filter(|e| matches!(e.origin, EdgeOrigin::Head(_)))
        .count();
    let mut members_used = vec![0u64; graph.tail_families().len()];
    for e in &prefix {
        if let EdgeOrigin::Tail { family, member } = e.origin {
            members_used[family] = members_used[family].max(member);
        }
    }
    let mut mass: f64 = graph.head_edges()[heads_used..]
        .iter()
        .map(|e| math::exp(-sigma * e.length))
        .sum();
    for (fam, &used) in graph.tail_families().iter().zip(&members_used) {
        let next = used + 1;
        mass += match fam.kind {
            TailKind::Arithmetic { a, b } => {
                if b <= 0.0 {
                    f64::INFINITY
                } else {
                    math::exp(-sigma * (a + b * next as f64)) / -math::expm1(-sigma * b)
                }
            }
            TailKind::Power { a, alpha } => {
                if alpha <= 0.0 {
                    f64::INFINITY
                } else {
                    let c = sigma * a;
                    let first = math::exp(-c * math::powf(next as f64, alpha));
                    // ∫_{next}^∞ e^{-c t^α} dt = Γ(1/α) Q(1/α, c next^α) / (α c^{1/α})
                    let s = 1.0 / alpha;
                    let x = c * math::powf(next as f64, alpha);
                    let integral =
                        math::exp(math::lgamma(s) - s * math::ln(c)) * math::gamma_q(s, x) / alpha;
                    (first + integral) * (1.0 + 1e-10)
                }
            }
        };
    }
    Ok(mass)
}

/// The Schur complement `W_σ` on the `k` shortest edges.
#[derive(Clone, Debug, PartialEq)]
pub struct WMatrix {
    pub k: usize,
    /// Number of edges actually used (`K`).
    pub k_cut: usize,
    pub sigma: f64,
    /// Lower bounds: computed from the `K`-truncation alone.
    pub entries: DenseMatrix,
    /// Entry-wise upper bounds including everything beyond `K`; `None` when
    /// nothing lies beyond `K`, or when the neglected mass cannot be bounded.
    pub upper: Option<DenseMatrix>,
    /// `tail_mass(σ, K)`.
    pub tail_bound: f64,
    /// Bound on the row-sum norm of the full tail block `D`.
    pub norm_bound: f64,
    pub head_edges: Vec<EdgeEntry>,
}

/// `W_σ = A + B (I - D)^{-1} C` with `A` the `k × k` head block of the
/// `K`-truncation and `D` solved directly.
pub fn schur_w(graph: &MetricGraph, sigma: f64, k: usize, k_cut: usize) -> Result<WMatrix> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(alloc::format!(
            "σ must be positive (got {sigma})"
        )));
    }
    if k == 0 || k > k_cut {
        return Err(Error::InvalidArgument(alloc::format!(
            "need 1 <= k <= K (got k={k}, K={k_cut})"
        )));
    }
    let trunc = build_truncation(graph, sigma, k_cut)?;
    let big = trunc.size();
    let k = k.min(big);
    let m = &trunc.entries;
    let tau = tail_mass(graph, sigma, big)?;
    let far_edges_exist = graph.edge_count().is_none_or(|n| n > big);

    let tail_len = big - k;
    let mut d = DenseMatrix::zeros(tail_len, tail_len);
    for i in 0..tail_len {
        for j in 0..tail_len {
            d[(i, j)] = m[(k + i, k + j)];
        }
    }
    let explicit_rows = d.row_sums().into_iter().fold(0.0f64, f64::max);
    let column_mass: f64 = trunc.edge_table[k..]
        .iter()
        .map(|e| math::exp(-sigma * e.length))
        .sum();
    let norm_bound = if far_edges_exist {
        explicit_rows.max(column_mass) + tau
    } else {
        explicit_rows
    };
    if !(norm_bound < 1.0) {
        return Err(Error::TailCondition { k, norm_bound });
    }

    let mut w = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            w[(i, j)] = m[(i, j)];
        }
    }
    if tail_len > 0 {
        let mut i_minus_d = DenseMatrix::identity(tail_len);
        for i in 0..tail_len {
            for j in 0..tail_len {
                i_minus_d[(i, j)] -= d[(i, j)];
            }
        }
        let mut c = DenseMatrix::zeros(tail_len, k);
        let mut b = DenseMatrix::zeros(k, tail_len);
        for i in 0..tail_len {
            for j in 0..k {
                c[(i, j)] = m[(k + i, j)];
                b[(j, i)] = m[(j, k + i)];
            }
        }
        let solved = i_minus_d.lu()?.solve_matrix(&c);
        let correction = b.mul(&solved);
        for i in 0..k {
            for j in 0..k {
                // clamp tiny negative rounding
                w[(i, j)] = (w[(i, j)] + correction[(i, j)]).max(0.0);
            }
        }
    }

    let upper = if tau > 0.0 {
        let delta_mass = column_mass + tau;
        (delta_mass < 1.0).then(|| {
            let factor = tau / ((1.0 - delta_mass) * (1.0 - delta_mass));
            let mut up = w.clone();
            for j in 0..k {
                let wb = math::exp(-sigma * trunc.edge_table[j].length);
                for i in 0..k {
                    up[(i, j)] += factor * wb;
                }
            }
            up
        })
    } else {
        None
    };

    Ok(WMatrix {
        k,
        k_cut: big,
        sigma,
        entries: w,
        upper,
        tail_bound: tau,
        norm_bound,
        head_edges: trunc.edge_table[..k].to_vec(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerronData {
    pub rho: f64,
    /// Left eigenvector `u`, scaled so that `u·v = 1`.
    pub left: Vec<f64>,
    /// Right eigenvector `v`, unit Euclidean norm.
    pub right: Vec<f64>,
    /// `‖W v - ρ v‖∞` for the returned `v`.
    pub residual: f64,
    pub iterations: usize,
    /// Support digraph strongly connected (always `true` for operators
    /// whose irreducibility is not checked).
    pub irreducible: bool,
}

/// Collatz–Wielandt bounds on the spectral radius of a nonnegative operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusBounds {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Shifted power iteration `x ← (A + αI) x` with `α` a quarter of the largest
/// row sum; the shift keeps periodic (imprimitive) matrices convergent.
///
/// Stops when `stop(lower, upper)` holds, when the Collatz–Wielandt gap or
/// the residual is at most `tol·max(1, ρ)`, or fails after `max_iter`.
fn power_iterate<F, S>(
    dim: usize,
    mut apply: F,
    tol: f64,
    max_iter: usize,
    stop: S,
) -> Result<(RadiusBounds, Vec<f64>)>
where
    F: FnMut(&[f64], &mut [f64]),
    S: Fn(f64, f64) -> bool,
{
    if dim == 0 {
        return Err(Error::InvalidArgument("empty operator".into()));
    }
    let mut x = vec![1.0; dim];
    let mut y = vec![0.0; dim];
    apply(&x, &mut y);
    let max_row = y.iter().fold(0.0f64, |m, v| m.max(*v));
    if max_row <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let shift = 0.25 * max_row;
    let mut bounds = RadiusBounds {
        lower: 0.0,
        upper: f64::INFINITY,
        estimate: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
    };
    for it in 1..=max_iter {
        // y = A x (x has max-norm 1)
        let mut lower = f64::INFINITY;
        let mut upper = 0.0f64;
        let mut norm = 0.0f64;
        for (&xi, &yi) in x.iter().zip(&y) {
            let ratio = yi / xi;
            lower = lower.min(ratio);
            upper = upper.max(ratio);
            norm = norm.max(yi);
        }
        let estimate = if upper - lower <= tol * norm.max(1.0) {
            0.5 * (lower + upper)
        } else {
            norm
        };
        let residual = x
            .iter()
            .zip(&y)
            .fold(0.0f64, |m, (&xi, &yi)| m.max((yi - estimate * xi).abs()));
        bounds = RadiusBounds {
            lower,
            upper,
            estimate,
            residual,
            iterations: it,
        };
        let scale = estimate.max(1.0);
        if stop(lower, upper) || upper - lower <= tol * scale || residual <= tol * scale {
            return Ok((bounds, x));
        }
        let mut m = 0.0f64;
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi + shift * *xi;
            m = m.max(*xi);
        }
        for xi in x.iter_mut() {
            *xi /= m;
        }
        apply(&x, &mut y);
    }
    Err(Error::NoConvergence {
        residual: bounds.residual,
        iterations: max_iter,
    })
}

/// Spectral radius bounds of a nonnegative operator.
pub fn radius_bounds<A: LinearOperator + ?Sized>(
    op: &A,
    tol: f64,
    max_iter: usize,
) -> Result<RadiusBounds> {
    power_iterate(op.dim(), |x, y| op.apply(x, y), tol, max_iter, |_, _| false).map(|r| r.0)
}

/// Compares the spectral radius with 1, stopping as soon as the
/// Collatz–Wielandt bounds separate them. Within `tol` counts as equal.
pub fn compare_radius_with_one<A: LinearOperator + ?Sized>(
    op: &A,
    tol: f64,
    max_iter: usize,
) -> Result<Ordering> {
    let (b, _) = power_iterate(
        op.dim(),
        |x, y| op.apply(x, y),
        tol,
        max_iter,
        |lo, hi| lo > 1.0 || hi < 1.0,
    )?;
    Ok(if b.lower > 1.0 {
        Ordering::Greater
    } else if b.upper < 1.0 {
        Ordering::Less
    } else {
        b.estimate.total_cmp(&1.0)
    })
}

/// Perron root with left and right eigenvectors of a nonnegative operator.
pub fn perron_operator<A: LinearOperator + ?Sized>(
    op: &A,
    tol: f64,
    max_iter: usize,
) -> Result<PerronData> {
    let n = op.dim();
    let (rb, mut right) = power_iterate(n, |x, y| op.apply(x, y), tol, max_iter, |_, _| false)?;
    let (lb, mut left) = power_iterate(
        n,
        |x, y| op.apply_transpose(x, y),
        tol,
        max_iter,
        |_, _| false,
    )?;
    let norm = math::sqrt(right.iter().map(|v| v * v).sum::<f64>());
    right.iter_mut().for_each(|v| *v /= norm);
    let dot: f64 = left.iter().zip(&right).map(|(a, b)| a * b).sum();
    left.iter_mut().for_each(|v| *v /= dot);
    let rho = rb.estimate;
    let mut y = vec![0.0; n];
    op.apply(&right, &mut y);
    let residual = y
        .iter()
        .zip(&right)
        .fold(0.0f64, |m, (a, b)| m.max((a - rho * b).abs()));
    Ok(PerronData {
        rho,
        left,
        right,
        residual,
        iterations: rb.iterations + lb.iterations,
        irreducible: true,
    })
}

/// Perron data of a Schur complement (or any square nonnegative matrix via
/// [`perron_matrix`]).
pub fn perron(w: &WMatrix, tol: f64, max_iter: usize) -> Result<PerronData> {
    perron_matrix(&w.entries, tol, max_iter)
}

pub fn perron_matrix(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<PerronData> {
    if m.as_slice().iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidArgument("matrix has negative entries".into()));
    }
    let mut data = perron_operator(m, tol, max_iter)?;
    data.irreducible = m.support_strongly_connected();
    Ok(data)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyOptions {
    /// Head size of the Schur complement.
    pub k: usize,
    /// Truncation size `K`.
    pub k_cut: usize,
    /// Bisection tolerance on σ.
    pub tol: f64,
    pub perron_tol: f64,
    pub max_iter: usize,
    /// Repeat with `(k, K)` doubled until `h` moves less than `ladder_tol`.
    pub ladder: bool,
    pub ladder_tol: f64,
    pub max_ladder_steps: usize,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        EntropyOptions {
            k: 8,
            k_cut: 40,
            tol: 1e-10,
            perron_tol: 1e-12,
            max_iter: 200_000,
            ladder: false,
            ladder_tol: 1e-6,
            max_ladder_steps: 10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderStep {
    pub k: usize,
    pub k_cut: usize,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyResult {
    pub h: f64,
    /// Final bisection bracket `(σ_lo, σ_hi)`.
    pub bracket: (f64, f64),
    /// `|ρ(W_h) - 1|`.
    pub rho_residual: f64,
    pub ladder: Vec<LadderStep>,
    /// `ρ(W_σ) < 1` already at `σ = 1e-8`: growth is subexponential, `h = 0`.
    pub subexponential: bool,
    /// Certified upper bound on the untruncated entropy, when tails exist.
    pub h_upper: Option<f64>,
}

/// Smallest σ probed when looking for a lower bracket.
pub const SIGMA_FLOOR: f64 = 1e-8;
const SIGMA_CEILING: f64 = 1e6;

/// Finds the crossing `ρ = 1` of a decreasing function given only its sign
/// relative to 1. Returns `(h, bracket, subexponential)`.
pub fn bisect_entropy<F>(mut sign: F, tol: f64) -> Result<(f64, (f64, f64), bool)>
where
    F: FnMut(f64) -> Result<Ordering>,
{
    let mut lo;
    let mut hi;
    let mut sigma = 1.0;
    match sign(sigma)? {
        Ordering::Equal => return Ok((sigma, (sigma, sigma), false)),
        Ordering::Greater => {
            lo = sigma;
            loop {
                sigma *= 2.0;
                if sigma > SIGMA_CEILING {
                    return Err(Error::EntropyDiverges);
                }
                match sign(sigma)? {
                    Ordering::Equal => return Ok((sigma, (sigma, sigma), false)),
                    Ordering::Greater => lo = sigma,
                    Ordering::Less => {
                        hi = sigma;
                        break;
                    }
                }
            }
        }
        Ordering::Less => {
            hi = sigma;
            loop {
                sigma *= 0.5;
                if sigma < SIGMA_FLOOR {
                    return Ok((0.0, (0.0, hi), true));
                }
                match sign(sigma)? {
                    Ordering::Equal => return Ok((sigma, (sigma, sigma), false)),
                    Ordering::Less => hi = sigma,
                    Ordering::Greater => {
                        lo = sigma;
                        break;
                    }
                }
            }
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match sign(mid)? {
            Ordering::Greater => lo = mid,
            Ordering::Less => hi = mid,
            Ordering::Equal => {
                lo = mid;
                hi = mid;
            }
        }
    }
    Ok((0.5 * (lo + hi), (lo, hi), false))
}

fn sign_at(
    graph: &MetricGraph,
    sigma: f64,
    k: usize,
    k_cut: usize,
    opts: &EntropyOptions,
    upper: bool,
) -> Result<Ordering> {
    match schur_w(graph, sigma, k, k_cut) {
        Ok(w) => {
            let m = if upper {
                match &w.upper {
                    Some(u) => u,
                    // cannot bound the tail here: treat as still above 1
                    None if w.tail_bound > 0.0 => return Ok(Ordering::Greater),
                    None => &w.entries,
                }
            } else {
                &w.entries
            };
            compare_radius_with_one(m, opts.perron_tol, opts.max_iter)
        }
        // the head block is too small for the tail condition at this σ; the
        // crossing of ρ = 1 is shared with the unsplit truncation
        Err(Error::TailCondition { .. }) if !upper => {
            let t = build_truncation(graph, sigma, k_cut)?;
            compare_radius_with_one(&t.entries, opts.perron_tol, opts.max_iter)
        }
        Err(Error::TailCondition { .. }) => Ok(Ordering::Greater),
        Err(e) => Err(e),
    }
}

fn entropy_at(
    graph: &MetricGraph,
    k: usize,
    k_cut: usize,
    opts: &EntropyOptions,
) -> Result<(f64, (f64, f64), bool, f64)> {
    let (h, bracket, sub) = bisect_entropy(|s| sign_at(graph, s, k, k_cut, opts, false), opts.tol)?;
    let rho_residual = if sub {
        f64::NAN
    } else {
        let rho = match schur_w(graph, h, k, k_cut) {
            Ok(w) => radius_bounds(&w.entries, opts.perron_tol, opts.max_iter)?.estimate,
            Err(Error::TailCondition { .. }) => {
                radius_bounds(
                    &build_truncation(graph, h, k_cut)?.entries,
                    opts.perron_tol,
                    opts.max_iter,
                )?
                .estimate
            }
            Err(e) => return Err(e),
        };
        (rho - 1.0).abs()
    };
    Ok((h, bracket, sub, rho_residual))
}

/// Volume entropy `h`: the σ with `ρ(W_σ) = 1`.
pub fn entropy(graph: &MetricGraph, opts: &EntropyOptions) -> Result<EntropyResult> {
    if graph.tail_families().iter().any(|f| !f.is_summable()) {
        return Err(Error::EntropyDiverges);
    }
    let total = graph.edge_count();
    let clamp = |n: usize| total.map_or(n, |t| n.min(t));
    let mut k_cut = clamp(opts.k_cut.max(1));
    let mut k = opts.k.max(1).min(k_cut);
    let (mut h, mut bracket, mut sub, mut rho_residual) = entropy_at(graph, k, k_cut, opts)?;
    let mut ladder = vec![LadderStep { k, k_cut, h }];
    if opts.ladder {
        for _ in 0..opts.max_ladder_steps {
            if total.is_some_and(|t| k_cut >= t) {
                break;
            }
            k_cut = clamp(k_cut * 2);
            k = clamp(k * 2).min(k_cut);
            let next = entropy_at(graph, k, k_cut, opts)?;
            let moved = (next.0 - h).abs();
            (h, bracket, sub, rho_residual) = next;
            ladder.push(LadderStep { k, k_cut, h });
            if moved < opts.ladder_tol {
                break;
            }
        }
    }
    let has_far = total.is_none_or(|t| t > k_cut);
    let h_upper = if has_far && !sub {
        let (hu, _, _) = bisect_entropy(|s| sign_at(graph, s, k, k_cut, opts, true), opts.tol)?;
        Some(hu.max(h))
    } else {
        None
    };
    Ok(EntropyResult {
        h,
        bracket,
        rho_residual,
        ladder,
        subexponential: sub,
        h_upper,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaValue {
    pub z: f64,
    /// Sum over the nonempty paths from `x` that use only the `K` shortest
    /// edges; a lower bound on the full series.
    pub value: f64,
    /// The full series lies in `[value, value + series_tail_bound]`.
    pub series_tail_bound: f64,
}

/// `η(z) = Σ_{p nonempty, i(p) = x} e^{-z ℓ(p)} = w(z)·(I - M_z)^{-1}·1`,
/// solved on the `K`-truncation.
///
/// Paths that use an edge beyond `K` are bounded by splitting at the first
/// such edge: with `τ` the neglected mass and `E_K = max_v η_K(v)`, the
/// neglected part is at most `(1 + η_K(x)) τ (1 + E)` where
/// `E ≤ (E_K + q)/(1 - q)`, `q = (1 + E_K) τ < 1`.
pub fn eta(graph: &MetricGraph, x: usize, z: f64, k_cut: usize) -> Result<EtaValue> {
    eta_all(graph, z, k_cut).map(|v| v[x])
}

/// [`eta`] for every start vertex at once.
pub fn eta_all(graph: &MetricGraph, z: f64, k_cut: usize) -> Result<Vec<EtaValue>> {
    if !(z > 0.0) {
        return Err(Error::BelowAbscissa { z });
    }
    if graph.tail_families().iter().any(|f| !f.is_summable()) {
        return Err(Error::EntropyDiverges);
    }
    let trunc = build_truncation(graph, z, k_cut)?;
    let n = trunc.size();
    let rb = radius_bounds(&trunc.entries, 1e-13, 1_000_000)?;
    if !(rb.upper < 1.0) {
        return Err(Error::BelowAbscissa { z });
    }
    let mut i_minus_m = DenseMatrix::identity(n);
    for a in 0..n {
        for b in 0..n {
            i_minus_m[(a, b)] -= trunc.entries[(a, b)];
        }
    }
    let y = i_minus_m.lu()?.solve(&vec![1.0; n]);
    let mut per_vertex = vec![0.0; graph.vertex_count()];
    for (e, &yj) in trunc.edge_table.iter().zip(&y) {
        per_vertex[e.source] += math::exp(-z * e.length) * yj;
    }
    let tau = tail_mass(graph, z, n)?;
    let bound_for = |eta_x: f64| -> Result<f64> {
        if tau == 0.0 {
            return Ok(0.0);
        }
        let e_k = per_vertex.iter().fold(0.0f64, |m, v| m.max(*v));
        let q = (1.0 + e_k) * tau;
        if !(q < 1.0) {
            return Err(Error::TailCondition {
                k: n,
                norm_bound: q,
            });
        }
        let e_full = (e_k + q) / (1.0 - q);
        Ok((1.0 + eta_x) * tau * (1.0 + e_full))
    };
    per_vertex
        .iter()
        .map(|&value| {
            Ok(EtaValue {
                z,
                value,
                series_tail_bound: bound_for(value)?,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResidueEstimate {
    pub h: f64,
    pub residue: f64,
    pub deltas_used: Vec<f64>,
    /// `|final - previous|` of the Richardson tableau.
    pub extrapolation_error: f64,
}

/// Residue of η at `h`: Richardson extrapolation of `δ·η(h + δ)` over
/// `δ ∈ {10⁻², 10⁻³, 10⁻⁴}`.
pub fn residue(graph: &MetricGraph, x: usize, h: f64, k_cut: usize) -> Result<ResidueEstimate> {
    let deltas = [1e-2, 1e-3, 1e-4];
    let mut f = [0.0; 3];
    for (fi, &d) in f.iter_mut().zip(&deltas) {
        *fi = d * eta(graph, x, h + d, k_cut)?.value;
    }
    // f(δ) = r + c₁δ + c₂δ² + ...; ratio 10 between consecutive δ
    let g1 = (10.0 * f[1] - f[0]) / 9.0;
    let g2 = (10.0 * f[2] - f[1]) / 9.0;
    let r = (100.0 * g2 - g1) / 99.0;
    Ok(ResidueEstimate {
        h,
        residue: r,
        deltas_used: deltas.to_vec(),
        extrapolation_error: (r - g2).abs(),
    })
}
