//! Path counts and volumes at radii far beyond depth-first reach.
//!
//! Rounding every saddle length down (or up) to a multiple of `δ` turns the
//! path-length distribution into an integer-indexed recursion: the number of
//! paths ending with `t` at rounded length `j` is the sum over the
//! predecessors of `t` at `j - ⌊ℓ(t)/δ⌋`. Each step is one prefix pass over
//! the cyclic arcs of `M_0`, so the cost is `O(K·R/δ)` whatever the number
//! of paths. Rounded-down lengths never exceed the true ones, so counts and
//! volumes computed from them are upper bounds; rounding up gives lower
//! bounds.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{build_m0, enumerate_saddles, Surface};
use crate::counting::{validate_grid, Limits};
use crate::math::{self, within};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rounding {
    /// Lengths rounded down: upper bounds.
    Down,
    /// Lengths rounded up: lower bounds.
    Up,
}

/// Number of paths from one cone point by end cone and rounded length.
#[derive(Clone, Debug, PartialEq)]
pub struct LengthDistribution {
    pub start_cone: usize,
    pub delta: f64,
    pub rounding: Rounding,
    /// `by_end_cone[y][j]`: paths ending at `y` with rounded length `j·δ`.
    pub by_end_cone: Vec<Vec<f64>>,
}

/// Largest number of stored `(saddle, bin)` cells.
pub const DEFAULT_CELL_CAP: u64 = 400_000_000;

pub fn path_length_distribution(
    surface: &Surface,
    x: usize,
    r_max: f64,
    delta: f64,
    rounding: Rounding,
    limits: &Limits,
) -> Result<LengthDistribution> {
    if x >= surface.cones().len() {
        return Err(Error::NotSingular(x));
    }
    if !(delta > 0.0) || !(r_max > 0.0) || !(r_max / delta < 1e9) {
        return Err(Error::InvalidArgument(format!(
            "need r_max > 0 and 0 < δ with r_max/δ < 1e9 (got {r_max}, {delta})"
        )));
    }
    let bins = math::floor(r_max / delta + 1e-9) as usize;
    let cones = surface.cones().len();
    let mut by_end_cone = vec![vec![0.0; bins + 1]; cones];
    let saddles = enumerate_saddles(surface, r_max)?;
    if saddles.is_empty() {
        return Ok(LengthDistribution {
            start_cone: x,
            delta,
            rounding,
            by_end_cone,
        });
    }
    let m0 = build_m0(surface, &saddles)?;
    let steps: Vec<usize> = saddles
        .iter()
        .map(|s| {
            let q = s.length / delta;
            let q = match rounding {
                Rounding::Down => math::floor(q + 1e-9),
                Rounding::Up => -math::floor(-q + 1e-9),
            };
            (q as usize).max(1)
        })
        .collect();
    // f[t] holds bins steps[t]..=bins
    let cells: u64 = steps
        .iter()
        .map(|&s| (bins + 1).saturating_sub(s) as u64)
        .sum();
    if cells > limits.frontier_cap.min(DEFAULT_CELL_CAP) {
        return Err(Error::ResourceLimit {
            what: "length-distribution cells",
            cap: limits.frontier_cap.min(DEFAULT_CELL_CAP),
        });
    }
    let mut f: Vec<Vec<f64>> = steps
        .iter()
        .map(|&s| vec![0.0; (bins + 1).saturating_sub(s)])
        .collect();
    for s in &saddles {
        if s.start.cone == x && steps[s.id] <= bins {
            f[s.id][0] += 1.0;
        }
    }
    let n = saddles.len();
    let mut current = vec![0.0; n];
    let mut agg = vec![0.0; n];
    for j in 0..=bins {
        let mut any = false;
        for (t, ft) in f.iter().enumerate() {
            let v = if j >= steps[t] { ft[j - steps[t]] } else { 0.0 };
            current[t] = v;
            if v != 0.0 {
                any = true;
                by_end_cone[saddles[t].end.cone][j] += v;
            }
        }
        if !any {
            continue;
        }
        m0.predecessor_sums(&current, &mut agg);
        for (t, &a) in agg.iter().enumerate() {
            let target = j + steps[t];
            if a > 0.0 && target <= bins {
                f[t][target - steps[t]] += a;
            }
        }
    }
    Ok(LengthDistribution {
        start_cone: x,
        delta,
        rounding,
        by_end_cone,
    })
}

impl LengthDistribution {
    fn bins_within(&self, r: f64) -> usize {
        let last = self.by_end_cone.first().map_or(0, |v| v.len());
        (0..last)
            .take_while(|&j| within(j as f64 * self.delta, r))
            .count()
    }

    /// Paths ending at `y` with rounded length at most each radius.
    pub fn counts(&self, y: usize, grid: &[f64]) -> Vec<f64> {
        let hist = &self.by_end_cone[y];
        grid.iter()
            .map(|&r| hist[..self.bins_within(r).min(hist.len())].iter().sum())
            .collect()
    }

    /// `(k(x)+1)πR² + π Σ_p k(t(p))(R - ℓ̃(p))²` with rounded lengths `ℓ̃`.
    pub fn volumes(&self, cone_k: &[usize], grid: &[f64]) -> Vec<f64> {
        let kx = cone_k[self.start_cone] as f64;
        grid.iter()
            .map(|&r| {
                let upto = self.bins_within(r);
                let mut sum = 0.0;
                for (y, hist) in self.by_end_cone.iter().enumerate() {
                    let ky = cone_k[y] as f64;
                    if ky == 0.0 {
                        continue;
                    }
                    for (j, &c) in hist[..upto.min(hist.len())].iter().enumerate() {
                        let d = (r - j as f64 * self.delta).max(0.0);
                        sum += ky * c * d * d;
                    }
                }
                math::PI * ((kx + 1.0) * r * r + sum)
            })
            .collect()
    }
}

/// Lower and upper bounds on a curve over a radius grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundedCurve {
    pub radii: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoundedCurve {
    /// Midpoint samples `(R, (lower + upper)/2)`.
    pub fn midpoints(&self) -> Vec<(f64, f64)> {
        self.radii
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&r, (&lo, &hi))| (r, 0.5 * (lo + hi)))
            .collect()
    }

    pub fn lower_samples(&self) -> Vec<(f64, f64)> {
        self.radii
            .iter()
            .copied()
            .zip(self.lower.iter().copied())
            .collect()
    }

    pub fn upper_samples(&self) -> Vec<(f64, f64)> {
        self.radii
            .iter()
            .copied()
            .zip(self.upper.iter().copied())
            .collect()
    }
}

fn bounds<F>(
    surface: &Surface,
    x: usize,
    grid: &[f64],
    delta: f64,
    limits: &Limits,
    eval: F,
) -> Result<BoundedCurve>
where
    F: Fn(&LengthDistribution) -> Vec<f64>,
{
    validate_grid(grid)?;
    let r = grid[grid.len() - 1];
    let lo = path_length_distribution(surface, x, r, delta, Rounding::Up, limits)?;
    let hi = path_length_distribution(surface, x, r, delta, Rounding::Down, limits)?;
    Ok(BoundedCurve {
        radii: grid.to_vec(),
        lower: eval(&lo),
        upper: eval(&hi),
    })
}

/// Bounds on `N_X(x, y, R)` from length buckets of width `δ`.
pub fn arc_count_bounds(
    surface: &Surface,
    x: usize,
    y: usize,
    grid: &[f64],
    delta: f64,
    limits: &Limits,
) -> Result<BoundedCurve> {
    if y >= surface.cones().len() {
        return Err(Error::NotSingular(y));
    }
    bounds(surface, x, grid, delta, limits, |d| d.counts(y, grid))
}

/// Bounds on `V(x, R)` from length buckets of width `δ`.
pub fn volume_bounds(
    surface: &Surface,
    x: usize,
    grid: &[f64],
    delta: f64,
    limits: &Limits,
) -> Result<BoundedCurve> {
    let ks: Vec<usize> = surface.cones().iter().map(|c| c.k).collect();
    bounds(surface, x, grid, delta, limits, |d| d.volumes(&ks, grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::origami::{count_arcs, volume, Origami};

    #[test]
    fn brackets_exact_enumeration() {
        let s = Surface::new(Origami::l_shape(), false).unwrap();
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.125).collect();
        let lim = Limits::default();
        let exact = count_arcs(&s, 0, 0, &grid, &lim).unwrap();
        let b = arc_count_bounds(&s, 0, 0, &grid, 1e-3, &lim).unwrap();
        for i in 0..grid.len() {
            let e = exact.counts[i] as f64;
            assert!(
                b.lower[i] <= e && e <= b.upper[i],
                "R={} {} {} {}",
                grid[i],
                b.lower[i],
                e,
                b.upper[i]
            );
        }
        let v = volume(&s, 0, &grid, &lim).unwrap();
        let vb = volume_bounds(&s, 0, &grid, 1e-3, &lim).unwrap();
        for i in 0..grid.len() {
            let e = v.volumes[i];
            assert!(vb.lower[i] <= e * (1.0 + 1e-12) && e <= vb.upper[i] * (1.0 + 1e-12));
            assert!((vb.upper[i] - vb.lower[i]) / e < 0.05);
        }
    }

    #[test]
    fn integer_radii_are_exact_from_below() {
        // the unit-saddle paths have integer lengths, recovered exactly
        let s = Surface::new(Origami::l_shape(), false).unwrap();
        let d =
            path_length_distribution(&s, 0, 3.0, 0.1, Rounding::Down, &Limits::default()).unwrap();
        assert_eq!(d.by_end_cone[0][10], 12.0);
        // the closed arc [π, 5π] past each arrival holds 9 of the 12 axis directions
        assert_eq!(d.by_end_cone[0][20], 12.0 * 9.0);
    }
}
