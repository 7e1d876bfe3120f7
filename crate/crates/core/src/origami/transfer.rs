//! The ≥π concatenation rule, the boolean matrix `M_0` it defines on saddle
//! connections, and the entropy of its truncations.
//!
//! At a cone point the successors of `s` are the outgoing connections whose
//! direction lies at least π away from the arrival ray of `s`, measured
//! both ways round the cone. Sorted by outgoing angle, that is a cyclic
//! interval, so `M_0` is stored as one interval per row and `M_σ x` costs a
//! prefix sum instead of a dense product.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Bound;

use super::{DirectionAtCone, SaddleConnection, Surface};
use crate::linalg::LinearOperator;
use crate::math::{self, within};
use crate::spectral::{bisect_entropy, compare_radius_with_one, radius_bounds};
use crate::{Error, Result};

/// Slack on the π threshold, absorbing rounding in the angle coordinates.
pub const ANGLE_EPS: f64 = 1e-12;

fn angle_gap(t1: f64, t2: f64, total: f64) -> f64 {
    let d = math::fmod((t1 - t2).abs(), total);
    d.min(total - d)
}

/// Smaller of the two angles between directions at the same cone point.
pub fn angle_between(surface: &Surface, d1: &DirectionAtCone, d2: &DirectionAtCone) -> Result<f64> {
    if d1.cone != d2.cone {
        return Err(Error::DifferentCones);
    }
    let total = surface.cone(d1.cone)?.total_angle();
    Ok(angle_gap(d1.theta(), d2.theta(), total))
}

/// Whether `t` may follow `s` in a geodesic saddle-connection path.
pub fn can_concatenate(surface: &Surface, s: &SaddleConnection, t: &SaddleConnection) -> bool {
    s.end.cone == t.start.cone
        && angle_between(surface, &s.end, &t.start).is_ok_and(|a| a >= math::PI - ANGLE_EPS)
}

/// `M_0` on a reversal-closed set of saddle connections.
#[derive(Clone, Debug)]
pub struct ConcatenationMatrix {
    /// Outgoing connection ids grouped by cone, each group sorted by angle.
    order: Vec<u32>,
    /// Start of each cone's group in `order` (one extra entry at the end).
    cone_base: Vec<usize>,
    /// Position of each connection in `order`.
    slot: Vec<u32>,
    /// Row `s` is the cyclic run of `arc_len[s]` slots from `arc_start[s]`
    /// within the group of `s`'s end cone.
    arc_start: Vec<u32>,
    arc_len: Vec<u32>,
    end_cone: Vec<u32>,
    reverse: Vec<u32>,
    pub strongly_connected: bool,
}

impl ConcatenationMatrix {
    pub fn size(&self) -> usize {
        self.slot.len()
    }

    pub fn row_count(&self, s: usize) -> usize {
        self.arc_len[s] as usize
    }

    pub fn successors(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.end_cone[s] as usize;
        let base = self.cone_base[c];
        let size = self.cone_base[c + 1] - base;
        let start = self.arc_start[s] as usize;
        (0..self.arc_len[s] as usize).map(move |i| self.order[base + (start + i) % size] as usize)
    }

    pub fn contains(&self, s: usize, t: usize) -> bool {
        let c = self.end_cone[s] as usize;
        let base = self.cone_base[c];
        let size = self.cone_base[c + 1] - base;
        let slot = self.slot[t] as usize;
        if slot < base || slot >= base + size {
            return false;
        }
        let rel = (slot - base + size - self.arc_start[s] as usize) % size;
        rel < self.arc_len[s] as usize
    }

    /// Rows as sorted successor lists.
    pub fn rows(&self) -> Vec<Vec<usize>> {
        (0..self.size())
            .map(|s| {
                let mut r: Vec<usize> = self.successors(s).collect();
                r.sort_unstable();
                r
            })
            .collect()
    }

    pub fn advice(&self, max_len: f64) -> Option<String> {
        (!self.strongly_connected)
            .then(|| format!("truncation at L = {max_len} is not strongly connected; raise L"))
    }

    /// Cyclic slot ranges of row `s` as up to two half-open `order` ranges.
    fn row_ranges(&self, s: usize) -> [(usize, usize); 2] {
        let c = self.end_cone[s] as usize;
        let base = self.cone_base[c];
        let size = self.cone_base[c + 1] - base;
        let start = self.arc_start[s] as usize;
        let len = self.arc_len[s] as usize;
        if start + len <= size {
            [(base + start, base + start + len), (0, 0)]
        } else {
            [
                (base + start, base + size),
                (base, base + start + len - size),
            ]
        }
    }

    /// `out[t] = Σ_{s : M_0(s, t)} x[s]`, in `O(n)` via a difference array
    /// over the angle-sorted slots.
    pub fn predecessor_sums(&self, x: &[f64], out: &mut [f64]) {
        let mut diff = vec![0.0; self.order.len() + 1];
        for (s, &xs) in x.iter().enumerate() {
            if xs == 0.0 {
                continue;
            }
            for (a, b) in self.row_ranges(s) {
                if a < b {
                    diff[a] += xs;
                    diff[b] -= xs;
                }
            }
        }
        let mut acc = 0.0;
        for (slot, &id) in self.order.iter().enumerate() {
            acc += diff[slot];
            out[id as usize] = acc.max(0.0);
        }
    }

    /// Number of connections reachable from `s`, itself included.
    fn reach(&self, s: usize) -> usize {
        let mut unvisited: BTreeSet<usize> = (0..self.order.len()).collect();
        unvisited.remove(&(self.slot[s] as usize));
        let mut stack = vec![s];
        let mut count = 1;
        let mut found = Vec::new();
        while let Some(v) = stack.pop() {
            for (a, b) in self.row_ranges(v) {
                if a >= b {
                    continue;
                }
                found.clear();
                found.extend(
                    unvisited
                        .range((Bound::Included(a), Bound::Excluded(b)))
                        .copied(),
                );
                for &slot in &found {
                    unvisited.remove(&slot);
                    stack.push(self.order[slot] as usize);
                }
                count += found.len();
            }
        }
        count
    }
}

/// Builds `M_0` on `saddles` (which must be closed under reversal, as
/// returned by [`super::enumerate_saddles`] or any length prefix of it).
pub fn build_m0(surface: &Surface, saddles: &[SaddleConnection]) -> Result<ConcatenationMatrix> {
    let n = saddles.len();
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let cones = surface.cones().len();
    let mut groups: Vec<Vec<u32>> = vec![Vec::new(); cones];
    for (i, s) in saddles.iter().enumerate() {
        if s.id != i || s.reverse_id >= n {
            return Err(Error::InvalidArgument(
                "saddle connections must be id-ordered and closed under reversal".into(),
            ));
        }
        groups[s.start.cone].push(i as u32);
    }
    let mut order = Vec::with_capacity(n);
    let mut cone_base = Vec::with_capacity(cones + 1);
    let mut slot = vec![0u32; n];
    for g in groups.iter_mut() {
        g.sort_by(|&a, &b| {
            let (ta, tb) = (
                saddles[a as usize].start.theta(),
                saddles[b as usize].start.theta(),
            );
            ta.total_cmp(&tb).then(a.cmp(&b))
        });
        cone_base.push(order.len());
        for &id in g.iter() {
            slot[id as usize] = order.len() as u32;
            order.push(id);
        }
    }
    cone_base.push(order.len());

    let mut arc_start = vec![0u32; n];
    let mut arc_len = vec![0u32; n];
    for (i, s) in saddles.iter().enumerate() {
        let c = s.end.cone;
        let group = &groups[c];
        let size = group.len();
        if size == 0 {
            continue;
        }
        let total = surface.cones()[c].total_angle();
        let tb = s.end.theta();
        let pred = |slot: usize| -> bool {
            let t = &saddles[group[slot % size] as usize];
            angle_gap(tb, t.start.theta(), total) >= math::PI - ANGLE_EPS
        };
        let lo = math::fmod(tb + math::PI - 1e-9, total);
        let mut start = group.partition_point(|&id| saddles[id as usize].start.theta() < lo);
        let mut skipped = 0;
        while skipped < size && !pred(start) {
            start += 1;
            skipped += 1;
        }
        let mut len = 0;
        if skipped < size {
            while len < size && pred(start + len) {
                len += 1;
            }
        }
        arc_start[i] = (start % size) as u32;
        arc_len[i] = len as u32;
    }

    let mut m = ConcatenationMatrix {
        order,
        cone_base,
        slot,
        arc_start,
        arc_len,
        end_cone: saddles.iter().map(|s| s.end.cone as u32).collect(),
        reverse: saddles.iter().map(|s| s.reverse_id as u32).collect(),
        strongly_connected: false,
    };
    // s → t exactly when rev t → rev s, so everything reaches 0 iff rev 0
    // reaches everything
    m.strongly_connected = m.reach(0) == n && m.reach(m.reverse[0] as usize) == n;
    Ok(m)
}

/// `M_σ(s, t) = M_0(s, t)·e^{-σ ℓ(t)}` as a linear operator.
pub struct SaddleOperator<'a> {
    m0: &'a ConcatenationMatrix,
    weights: Vec<f64>,
}

impl<'a> SaddleOperator<'a> {
    pub fn new(m0: &'a ConcatenationMatrix, saddles: &[SaddleConnection], sigma: f64) -> Self {
        SaddleOperator {
            m0,
            weights: saddles
                .iter()
                .map(|s| math::exp(-sigma * s.length))
                .collect(),
        }
    }
}

impl LinearOperator for SaddleOperator<'_> {
    fn dim(&self) -> usize {
        self.m0.size()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m0;
        let mut prefix = Vec::with_capacity(m.order.len() + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for &id in &m.order {
            acc += self.weights[id as usize] * x[id as usize];
            prefix.push(acc);
        }
        for (s, ys) in y.iter_mut().enumerate() {
            *ys = m
                .row_ranges(s)
                .iter()
                .filter(|(a, b)| a < b)
                .map(|&(a, b)| prefix[b] - prefix[a])
                .sum::<f64>()
                .max(0.0);
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        self.m0.predecessor_sums(x, y);
        for (yi, w) in y.iter_mut().zip(&self.weights) {
            *yi *= w;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceEntropyOptions {
    /// First truncation length.
    pub l_start: f64,
    /// The ladder doubles `L` up to this length.
    pub l_max: f64,
    /// Stop once successive `h_L` differ by less than this.
    pub tol_ladder: f64,
    pub tol: f64,
    pub perron_tol: f64,
    pub max_iter: usize,
}

impl Default for SurfaceEntropyOptions {
    fn default() -> Self {
        SurfaceEntropyOptions {
            l_start: 8.0,
            l_max: 32.0,
            tol_ladder: 1e-2,
            tol: 1e-10,
            perron_tol: 1e-12,
            max_iter: 200_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceLadderStep {
    pub l: f64,
    /// Number of saddle connections of length at most `l`.
    pub count: usize,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceEntropy {
    pub h: f64,
    pub bracket: (f64, f64),
    pub rho_residual: f64,
    pub ladder: Vec<SurfaceLadderStep>,
}

/// Entropy of `M_σ` restricted to `saddles` (a reversal-closed prefix).
pub fn truncated_entropy(
    surface: &Surface,
    saddles: &[SaddleConnection],
    max_len: f64,
    opts: &SurfaceEntropyOptions,
) -> Result<(f64, (f64, f64), f64)> {
    let m0 = build_m0(surface, saddles)?;
    if !m0.strongly_connected {
        return Err(Error::Disconnected { max_len });
    }
    let sign = |sigma: f64| {
        compare_radius_with_one(
            &SaddleOperator::new(&m0, saddles, sigma),
            opts.perron_tol,
            opts.max_iter,
        )
    };
    let (h, bracket, _) = bisect_entropy(sign, opts.tol)?;
    let rho = radius_bounds(
        &SaddleOperator::new(&m0, saddles, h),
        opts.perron_tol,
        opts.max_iter,
    )?
    .estimate;
    Ok((h, bracket, (rho - 1.0).abs()))
}

/// Entropy from the `L`-ladder: `L` doubles from `l_start` while `h_L`
/// still moves by `tol_ladder` or more, up to `l_max`.
pub fn surface_entropy(surface: &Surface, opts: &SurfaceEntropyOptions) -> Result<SurfaceEntropy> {
    if !(opts.l_start >= 1.0) || opts.l_max < opts.l_start {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= l_start <= l_max (got {} and {})",
            opts.l_start, opts.l_max
        )));
    }
    let mut steps = vec![opts.l_start];
    while steps
        .last()
        .is_some_and(|&l| 2.0 * l <= opts.l_max * (1.0 + 1e-12))
    {
        steps.push(2.0 * steps[steps.len() - 1]);
    }
    let all = super::enumerate_saddles(surface, *steps.last().expect("nonempty"))?;
    let mut ladder = Vec::new();
    let mut last = None;
    for &l in &steps {
        let count = all.partition_point(|s| within(s.length, l));
        let (h, bracket, residual) = truncated_entropy(surface, &all[..count], l, opts)?;
        ladder.push(SurfaceLadderStep { l, count, h });
        let done = ladder.len() >= 2 && (h - ladder[ladder.len() - 2].h).abs() < opts.tol_ladder;
        last = Some((h, bracket, residual));
        if done {
            break;
        }
    }
    let (h, bracket, rho_residual) = last.expect("at least one step");
    Ok(SurfaceEntropy {
        h,
        bracket,
        rho_residual,
        ladder,
    })
}
