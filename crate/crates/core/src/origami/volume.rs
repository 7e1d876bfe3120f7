//! Ball volumes `V(x, R)`, arc counts `N_X(x, y, R)` and the surface
//! hypothesis report, all from depth-first walks over saddle-connection
//! paths.

use alloc::vec;
use alloc::vec::Vec;

use super::{build_m0, enumerate_saddles, SaddleConnection, Surface};
use crate::counting::{
    check_arithmetic, cumulate, grid_bucket, validate_grid, walk, ArithmeticityReport, CountCurve,
    Limits, Transitions,
};
use crate::math::{self, within};
use crate::{Error, Result};

/// Saddle connections up to a length, with explicit successor lists for
/// depth-first path walks.
#[derive(Clone, Debug)]
pub struct SaddlePaths {
    saddles: Vec<SaddleConnection>,
    successors: Vec<Vec<u32>>,
    starts: Vec<Vec<u32>>,
    cone_k: Vec<usize>,
    max_len: f64,
}

impl SaddlePaths {
    pub fn new(surface: &Surface, max_len: f64) -> Result<SaddlePaths> {
        SaddlePaths::from_saddles(surface, enumerate_saddles(surface, max_len)?, max_len)
    }

    /// From a reversal-closed, id-ordered table (for instance a cache load).
    pub fn from_saddles(
        surface: &Surface,
        saddles: Vec<SaddleConnection>,
        max_len: f64,
    ) -> Result<SaddlePaths> {
        let cone_k: Vec<usize> = surface.cones().iter().map(|c| c.k).collect();
        let mut starts = vec![Vec::new(); cone_k.len()];
        for s in &saddles {
            starts[s.start.cone].push(s.id as u32);
        }
        let successors = if saddles.is_empty() {
            Vec::new()
        } else {
            // ids follow length order, so sorted rows are length-sorted
            build_m0(surface, &saddles)?
                .rows()
                .into_iter()
                .map(|r| r.into_iter().map(|t| t as u32).collect())
                .collect()
        };
        Ok(SaddlePaths {
            saddles,
            successors,
            starts,
            cone_k,
            max_len,
        })
    }

    pub fn saddles(&self) -> &[SaddleConnection] {
        &self.saddles
    }

    pub fn max_len(&self) -> f64 {
        self.max_len
    }

    /// Saddle connections leaving cone `x`, shortest first.
    pub fn starts(&self, x: usize) -> &[u32] {
        &self.starts[x]
    }

    fn check_grid(&self, grid: &[f64]) -> Result<()> {
        validate_grid(grid)?;
        let r = grid[grid.len() - 1];
        if !within(r, self.max_len) {
            return Err(Error::InvalidArgument(alloc::format!(
                "radius {r} exceeds the enumerated length {}",
                self.max_len
            )));
        }
        Ok(())
    }

    /// Per-bucket weighted moments of `R_b - ℓ(p)` over the paths starting
    /// with `first`, where `R_b` is the first grid radius admitting `p` and
    /// the weight is `k(t(p))`.
    pub fn volume_moments(
        &self,
        first: usize,
        grid: &[f64],
        visit_cap: u64,
    ) -> Result<VolumeMoments> {
        self.check_grid(grid)?;
        let mut m = VolumeMoments::zeros(grid.len());
        let budget = grid[grid.len() - 1];
        m.visited = walk(self, first, budget, visit_cap, |node, len| {
            let b = grid_bucket(grid, len);
            if b < grid.len() {
                let w = self.cone_k[self.saddles[node].end.cone] as f64;
                let d = (grid[b] - len).max(0.0);
                m.n[b] += w;
                m.s1[b] += w * d;
                m.s2[b] += w * d * d;
            }
        })?;
        Ok(m)
    }

    /// Per-bucket counts of paths starting with `first` and ending at cone
    /// `y`, with the number of visited paths.
    pub fn arc_histogram(
        &self,
        first: usize,
        y: usize,
        grid: &[f64],
        visit_cap: u64,
    ) -> Result<(Vec<u64>, u64)> {
        self.check_grid(grid)?;
        let mut hist = vec![0u64; grid.len()];
        let budget = grid[grid.len() - 1];
        let visited = walk(self, first, budget, visit_cap, |node, len| {
            if self.saddles[node].end.cone == y {
                let b = grid_bucket(grid, len);
                if b < hist.len() {
                    hist[b] += 1;
                }
            }
        })?;
        Ok((hist, visited))
    }
}

impl Transitions for SaddlePaths {
    fn node_count(&self) -> usize {
        self.saddles.len()
    }

    fn length(&self, node: usize) -> f64 {
        self.saddles[node].length
    }

    fn successors(&self, node: usize) -> &[u32] {
        &self.successors[node]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeMoments {
    pub n: Vec<f64>,
    pub s1: Vec<f64>,
    pub s2: Vec<f64>,
    pub visited: u64,
}

impl VolumeMoments {
    pub fn zeros(len: usize) -> Self {
        VolumeMoments {
            n: vec![0.0; len],
            s1: vec![0.0; len],
            s2: vec![0.0; len],
            visited: 0,
        }
    }

    pub fn merge(&mut self, other: &VolumeMoments) {
        for (a, b) in self.n.iter_mut().zip(&other.n) {
            *a += b;
        }
        for (a, b) in self.s1.iter_mut().zip(&other.s1) {
            *a += b;
        }
        for (a, b) in self.s2.iter_mut().zip(&other.s2) {
            *a += b;
        }
        self.visited += other.visited;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VolumeCurve {
    pub center: usize,
    pub radii: Vec<f64>,
    pub volumes: Vec<f64>,
}

impl VolumeCurve {
    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.radii
            .iter()
            .copied()
            .zip(self.volumes.iter().copied())
            .collect()
    }

    /// `V(x, R) = (k(x)+1)πR² + Σ_p k(t(p))·π·(R - ℓ(p))²` from merged moments.
    pub fn from_moments(
        center: usize,
        k_center: usize,
        grid: &[f64],
        m: &VolumeMoments,
    ) -> VolumeCurve {
        let (mut n, mut s1, mut s2) = (0.0, 0.0, 0.0);
        let mut prev = grid[0];
        let mut volumes = Vec::with_capacity(grid.len());
        for (b, &r) in grid.iter().enumerate() {
            // shift accumulated moments from the previous radius to r
            let d = r - prev;
            s2 += 2.0 * d * s1 + n * d * d;
            s1 += n * d;
            n += m.n[b];
            s1 += m.s1[b];
            s2 += m.s2[b];
            volumes.push(math::PI * ((k_center + 1) as f64 * r * r + s2));
            prev = r;
        }
        VolumeCurve {
            center,
            radii: grid.to_vec(),
            volumes,
        }
    }
}

fn check_cone(surface: &Surface, x: usize) -> Result<()> {
    if x >= surface.cones().len() {
        return Err(Error::NotSingular(x));
    }
    Ok(())
}

/// Volume of the ball of radius `R` about cone point `x`, on a grid.
pub fn volume(surface: &Surface, x: usize, grid: &[f64], limits: &Limits) -> Result<VolumeCurve> {
    check_cone(surface, x)?;
    validate_grid(grid)?;
    let paths = SaddlePaths::new(surface, grid[grid.len() - 1])?;
    let mut total = VolumeMoments::zeros(grid.len());
    for &first in paths.starts(x) {
        let cap = limits.visit_cap.saturating_sub(total.visited);
        total.merge(&paths.volume_moments(first as usize, grid, cap)?);
    }
    Ok(VolumeCurve::from_moments(
        x,
        surface.cones()[x].k,
        grid,
        &total,
    ))
}

/// `N_X(x, y, R)`: nonempty saddle-connection paths from `x` to `y`.
pub fn count_arcs(
    surface: &Surface,
    x: usize,
    y: usize,
    grid: &[f64],
    limits: &Limits,
) -> Result<CountCurve> {
    check_cone(surface, x)?;
    check_cone(surface, y)?;
    validate_grid(grid)?;
    let paths = SaddlePaths::new(surface, grid[grid.len() - 1])?;
    let mut counts = vec![0u64; grid.len()];
    let mut visited = 0u64;
    for &first in paths.starts(x) {
        let (h, v) = paths.arc_histogram(
            first as usize,
            y,
            grid,
            limits.visit_cap.saturating_sub(visited),
        )?;
        visited += v;
        for (c, x) in counts.iter_mut().zip(h) {
            *c += x;
        }
    }
    cumulate(&mut counts);
    Ok(CountCurve {
        radii: grid.to_vec(),
        counts,
        start_vertex: x,
    })
}

/// `N(X, ℓ)` for each `ℓ` in `lengths`: oriented saddle connections of
/// length at most `ℓ` in an id-ordered table.
pub fn saddle_counts(saddles: &[SaddleConnection], lengths: &[f64]) -> Vec<usize> {
    lengths
        .iter()
        .map(|&l| saddles.partition_point(|s| within(s.length, l)))
        .collect()
}

/// Radius up to which closed multi-saddle paths feed the arithmeticity check.
pub const T3_PATH_RADIUS: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceHypotheses {
    pub max_len: f64,
    /// `(ℓ, N(X, ℓ), N(X, ℓ)/ℓ²)` for `ℓ ∈ {L/4, L/2, L}`.
    pub t1_ratios: Vec<(f64, usize, f64)>,
    /// Largest over smallest ratio.
    pub t1_spread: f64,
    pub t2_connected: bool,
    /// Over closed saddle connections up to `L` and closed paths up to
    /// `min(L, T3_PATH_RADIUS)`.
    pub t3: ArithmeticityReport,
}

/// Quadratic growth, strong connectivity of `M_0` and non-arithmeticity of
/// closed path lengths at truncation length `L`.
pub fn hypothesis_check_surface(
    surface: &Surface,
    max_len: f64,
    limits: &Limits,
) -> Result<SurfaceHypotheses> {
    let saddles = enumerate_saddles(surface, max_len)?;
    let ls = [max_len / 4.0, max_len / 2.0, max_len];
    let counts = saddle_counts(&saddles, &ls);
    let t1_ratios: Vec<(f64, usize, f64)> = ls
        .iter()
        .zip(&counts)
        .map(|(&l, &n)| (l, n, n as f64 / (l * l)))
        .collect();
    let (lo, hi) = t1_ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
            (lo.min(r.2), hi.max(r.2))
        });
    let t1_spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    let t2_connected = !saddles.is_empty() && build_m0(surface, &saddles)?.strongly_connected;

    let mut lengths: Vec<f64> = saddles
        .iter()
        .filter(|s| s.start.cone == s.end.cone)
        .map(|s| s.length)
        .collect();
    let radius = max_len.min(T3_PATH_RADIUS);
    let cut = saddles.partition_point(|s| within(s.length, radius));
    let paths = SaddlePaths::from_saddles(surface, saddles[..cut].to_vec(), radius)?;
    let mut visited = 0u64;
    for s in paths.saddles() {
        let x = s.start.cone;
        visited += walk(
            &paths,
            s.id,
            radius,
            limits.visit_cap.saturating_sub(visited),
            |node, len| {
                if paths.saddles()[node].end.cone == x {
                    lengths.push(len);
                }
            },
        )?;
    }
    if lengths.is_empty() {
        return Err(Error::InsufficientData(
            "no closed saddle-connection paths".into(),
        ));
    }
    let longest = lengths.iter().fold(0.0f64, |m, &l| m.max(l));
    let t3 = check_arithmetic(&lengths, 1e-9 * longest)?;
    Ok(SurfaceHypotheses {
        max_len,
        t1_ratios,
        t1_spread,
        t2_connected,
        t3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::origami::Origami;

    fn l_surface() -> Surface {
        Surface::new(Origami::l_shape(), false).unwrap()
    }

    #[test]
    fn volume_closed_form_below_sqrt2() {
        let s = l_surface();
        let grid = [0.5, 0.9, 1.0, 1.1, 1.2, 1.3];
        let v = volume(&s, 0, &grid, &Limits::default()).unwrap();
        let pi = math::PI;
        for (&r, &val) in grid.iter().zip(&v.volumes) {
            let want = 3.0 * pi * r * r
                + if r >= 1.0 {
                    24.0 * pi * (r - 1.0) * (r - 1.0)
                } else {
                    0.0
                };
            assert!((val - want).abs() < 1e-12, "R={r}: {val} vs {want}");
        }
    }

    #[test]
    fn arcs_l_shape() {
        let s = l_surface();
        let grid = [0.5, 1.0, 1.5, 2.0, 2.5];
        let c = count_arcs(&s, 0, 0, &grid, &Limits::default()).unwrap();
        assert_eq!(c.counts[0], 0);
        assert_eq!(c.counts[1], 12);
        assert!(c.counts.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(
            count_arcs(&s, 1, 0, &grid, &Limits::default()).unwrap_err(),
            Error::NotSingular(1)
        );
    }
}
