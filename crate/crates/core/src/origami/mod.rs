//! Square-tiled translation surfaces (origamis).
//!
//! An origami glues `n` unit squares: the right edge of square `s` to the
//! left edge of `σ_h(s)`, the top edge to the bottom edge of `σ_v(s)`. Square
//! corners are `BL, BR, TR, TL`; going counterclockwise around a vertex
//!
//! ```text
//!     (s, BL) → (σ_h⁻¹(s), BR) → (σ_v⁻¹(·), TR) → (σ_h(·), TL) → (σ_v(·), BL)
//! ```
//!
//! so each vertex is a cycle of `4(k + 1)` corners and has cone angle
//! `2π(k + 1)`. Every cycle is rotated to begin at the `BL` corner with the
//! smallest square index; position `j` of a cycle then has corner type
//! `j mod 4` and covers the angles `[jπ/2, (j + 1)π/2)` of the cone.

mod buckets;
mod trace;
mod transfer;
mod volume;

pub use buckets::{
    arc_count_bounds, path_length_distribution, volume_bounds, BoundedCurve, LengthDistribution,
    Rounding,
};
pub use trace::{
    assemble_saddles, enumerate_saddles, primitive_directions, trace_separatrix, SaddleConnection,
};
pub use transfer::{
    angle_between, build_m0, can_concatenate, surface_entropy, truncated_entropy,
    ConcatenationMatrix, SaddleOperator, SurfaceEntropy, SurfaceEntropyOptions, SurfaceLadderStep,
    ANGLE_EPS,
};
pub use volume::{
    count_arcs, hypothesis_check_surface, saddle_counts, volume, SaddlePaths, SurfaceHypotheses,
    VolumeCurve, VolumeMoments, T3_PATH_RADIUS,
};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Corner {
    BL = 0,
    BR = 1,
    TR = 2,
    TL = 3,
}

impl Corner {
    pub fn from_index(i: usize) -> Corner {
        match i % 4 {
            0 => Corner::BL,
            1 => Corner::BR,
            2 => Corner::TR,
            _ => Corner::TL,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Two permutations of `0..n` (zero-indexed internally).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Origami {
    sigma_h: Vec<u32>,
    sigma_v: Vec<u32>,
    inv_h: Vec<u32>,
    inv_v: Vec<u32>,
}

fn invert(perm: &[u32], name: &str) -> Result<Vec<u32>> {
    let n = perm.len();
    let mut inv = vec![u32::MAX; n];
    for (i, &p) in perm.iter().enumerate() {
        let p = p as usize;
        if p >= n {
            return Err(Error::InvalidOrigami(format!(
                "{name}: image {p} out of range"
            )));
        }
        if inv[p] != u32::MAX {
            return Err(Error::InvalidOrigami(format!("{name} is not a bijection")));
        }
        inv[p] = i as u32;
    }
    Ok(inv)
}

impl Origami {
    /// From zero-indexed images: `sigma_h[s]` is the right neighbour of `s`.
    pub fn new(sigma_h: Vec<u32>, sigma_v: Vec<u32>) -> Result<Origami> {
        let n = sigma_h.len();
        if n == 0 {
            return Err(Error::InvalidOrigami("no squares".into()));
        }
        if sigma_v.len() != n {
            return Err(Error::InvalidOrigami(
                "permutations of different sizes".into(),
            ));
        }
        if n > u32::MAX as usize / 4 {
            return Err(Error::InvalidOrigami("too many squares".into()));
        }
        let inv_h = invert(&sigma_h, "sigma_h")?;
        let inv_v = invert(&sigma_v, "sigma_v")?;
        let o = Origami {
            sigma_h,
            sigma_v,
            inv_h,
            inv_v,
        };
        let reached = crate::linalg::reach_count(n, 0, |s, out| {
            out.extend([o.sigma_h[s], o.sigma_v[s], o.inv_h[s], o.inv_v[s]].map(|t| t as usize))
        });
        if reached != n {
            return Err(Error::InvalidOrigami("surface is not connected".into()));
        }
        Ok(o)
    }

    /// From one-indexed images, as in the JSON file format.
    pub fn from_one_indexed(sigma_h: &[u32], sigma_v: &[u32]) -> Result<Origami> {
        let shift = |v: &[u32], name: &str| -> Result<Vec<u32>> {
            v.iter()
                .map(|&x| {
                    x.checked_sub(1).ok_or_else(|| {
                        Error::InvalidOrigami(format!("{name}: images are one-indexed"))
                    })
                })
                .collect()
        };
        Origami::new(shift(sigma_h, "sigma_h")?, shift(sigma_v, "sigma_v")?)
    }

    /// The 3-square L: square 1 has square 2 to its right and 3 above.
    pub fn l_shape() -> Origami {
        Origami::new(vec![1, 0, 2], vec![2, 1, 0]).expect("valid")
    }

    pub fn torus() -> Origami {
        Origami::new(vec![0], vec![0]).expect("valid")
    }

    pub fn n(&self) -> usize {
        self.sigma_h.len()
    }

    pub fn sigma_h(&self) -> &[u32] {
        &self.sigma_h
    }

    pub fn sigma_v(&self) -> &[u32] {
        &self.sigma_v
    }

    pub fn right(&self, s: usize) -> usize {
        self.sigma_h[s] as usize
    }

    pub fn left(&self, s: usize) -> usize {
        self.inv_h[s] as usize
    }

    pub fn up(&self, s: usize) -> usize {
        self.sigma_v[s] as usize
    }

    pub fn down(&self, s: usize) -> usize {
        self.inv_v[s] as usize
    }

    /// Counterclockwise neighbour of a corner around its vertex.
    pub fn successor(&self, s: usize, c: Corner) -> (usize, Corner) {
        match c {
            Corner::BL => (self.left(s), Corner::BR),
            Corner::BR => (self.down(s), Corner::TR),
            Corner::TR => (self.right(s), Corner::TL),
            Corner::TL => (self.up(s), Corner::BL),
        }
    }
}

/// A vertex of the surface: the cycle of square corners around it.
#[derive(Clone, Debug, PartialEq)]
pub struct ConePoint {
    pub id: usize,
    pub corners: Vec<(usize, Corner)>,
    pub k: usize,
    pub angle: f64,
}

impl ConePoint {
    pub fn total_angle(&self) -> f64 {
        (self.k + 1) as f64 * math::TAU
    }
}

/// All vertex orbits of an origami, in order of their smallest `BL` square.
pub fn vertex_orbits(o: &Origami) -> Vec<ConePoint> {
    let n = o.n();
    let mut seen = vec![false; 4 * n];
    let mut out = Vec::new();
    for s in 0..n {
        if seen[4 * s] {
            continue;
        }
        let mut corners = Vec::new();
        let mut cur = (s, Corner::BL);
        loop {
            seen[4 * cur.0 + cur.1.index()] = true;
            corners.push(cur);
            cur = o.successor(cur.0, cur.1);
            if cur == (s, Corner::BL) {
                break;
            }
        }
        let k = corners.len() / 4 - 1;
        out.push(ConePoint {
            id: out.len(),
            corners,
            k,
            angle: (k + 1) as f64 * math::TAU,
        });
    }
    out
}

/// Singular cone points (`k ≥ 1`), plus regular vertices as marked points
/// when `include_marked` is set. Ids are renumbered in orbit order.
pub fn cone_points(o: &Origami, include_marked: bool) -> Result<Vec<ConePoint>> {
    let mut cones: Vec<ConePoint> = vertex_orbits(o)
        .into_iter()
        .filter(|c| include_marked || c.k > 0)
        .collect();
    if cones.is_empty() {
        return Err(Error::NoSingularities);
    }
    for (i, c) in cones.iter_mut().enumerate() {
        c.id = i;
    }
    Ok(cones)
}

/// Genus from `χ = V - 2n + n` with `V` the number of vertex orbits.
pub fn genus(o: &Origami) -> usize {
    let v = vertex_orbits(o).len();
    (2 + o.n() - v) / 2
}

/// A direction at a cone point: sector `corner_index` and the angle `offset`
/// into it, so `Θ = corner_index·π/2 + offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionAtCone {
    pub cone: usize,
    pub corner_index: usize,
    pub offset: f64,
}

impl DirectionAtCone {
    pub fn theta(&self) -> f64 {
        self.corner_index as f64 * math::FRAC_PI_2 + self.offset
    }
}

/// An origami with its vertex structure resolved: which vertices stop a ray
/// and where every square corner sits in its cycle.
#[derive(Clone, Debug)]
pub struct Surface {
    origami: Origami,
    orbits: Vec<ConePoint>,
    /// Cone id for each orbit that stops rays.
    cone_of_orbit: Vec<Option<usize>>,
    cones: Vec<ConePoint>,
    /// `(orbit, position)` for corner `4s + c`.
    position: Vec<(u32, u32)>,
}

impl Surface {
    pub fn new(origami: Origami, include_marked: bool) -> Result<Surface> {
        let orbits = vertex_orbits(&origami);
        let mut position = vec![(0u32, 0u32); 4 * origami.n()];
        let mut cone_of_orbit = Vec::with_capacity(orbits.len());
        let mut cones = Vec::new();
        for (oi, orbit) in orbits.iter().enumerate() {
            for (j, &(s, c)) in orbit.corners.iter().enumerate() {
                position[4 * s + c.index()] = (oi as u32, j as u32);
            }
            if include_marked || orbit.k > 0 {
                cone_of_orbit.push(Some(cones.len()));
                let mut cone = orbit.clone();
                cone.id = cones.len();
                cones.push(cone);
            } else {
                cone_of_orbit.push(None);
            }
        }
        if cones.is_empty() {
            return Err(Error::NoSingularities);
        }
        Ok(Surface {
            origami,
            orbits,
            cone_of_orbit,
            cones,
            position,
        })
    }

    pub fn origami(&self) -> &Origami {
        &self.origami
    }

    pub fn cones(&self) -> &[ConePoint] {
        &self.cones
    }

    pub fn cone(&self, id: usize) -> Result<&ConePoint> {
        self.cones
            .get(id)
            .ok_or_else(|| Error::InvalidArgument(format!("no cone point {id}")))
    }

    pub fn genus(&self) -> usize {
        (2 + self.origami.n() - self.orbits.len()) / 2
    }

    pub(crate) fn orbits(&self) -> &[ConePoint] {
        &self.orbits
    }

    pub(crate) fn locate(&self, s: usize, c: Corner) -> (usize, usize) {
        let (o, p) = self.position[4 * s + c.index()];
        (o as usize, p as usize)
    }

    pub(crate) fn cone_of_orbit(&self, orbit: usize) -> Option<usize> {
        self.cone_of_orbit[orbit]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Cycle lengths of the commutator `σ_v σ_h σ_v⁻¹ σ_h⁻¹` on squares.
    fn commutator_cycles(o: &Origami) -> Vec<usize> {
        let n = o.n();
        let c = |s: usize| o.up(o.right(o.down(o.left(s))));
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            let mut len = 0;
            let mut t = s;
            while !seen[t] {
                seen[t] = true;
                len += 1;
                t = c(t);
            }
            if len > 0 {
                out.push(len);
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn l_shape_structure() {
        let cones = cone_points(&Origami::l_shape(), false).unwrap();
        assert_eq!(cones.len(), 1);
        assert_eq!(cones[0].corners.len(), 12);
        assert_eq!(cones[0].k, 2);
        assert_eq!(genus(&Origami::l_shape()), 2);
    }

    #[test]
    fn torus_has_no_singularities() {
        assert_eq!(
            cone_points(&Origami::torus(), false).unwrap_err(),
            Error::NoSingularities
        );
        let marked = cone_points(&Origami::torus(), true).unwrap();
        assert_eq!(marked.len(), 1);
        assert_eq!(marked[0].k, 0);
    }

    #[test]
    fn orbits_match_commutator_cycles() {
        let lib = [
            (vec![1, 0, 2], vec![2, 1, 0]),
            (vec![1, 2, 3, 0], vec![0, 1, 2, 3]),
            (vec![1, 0, 3, 2], vec![2, 3, 0, 1]),
            (vec![1, 2, 0, 4, 3], vec![3, 4, 2, 0, 1]),
            (vec![1, 2, 3, 4, 5, 0], vec![5, 1, 2, 3, 4, 0]),
        ];
        for (h, v) in lib {
            let o = Origami::new(h, v).unwrap();
            let mut lens: Vec<usize> = vertex_orbits(&o)
                .iter()
                .map(|c| c.corners.len() / 4)
                .collect();
            lens.sort_unstable();
            assert_eq!(lens, commutator_cycles(&o));
            for c in vertex_orbits(&o) {
                for (j, &(_, corner)) in c.corners.iter().enumerate() {
                    assert_eq!(corner.index(), j % 4);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_permutations() {
        assert!(Origami::new(vec![0, 0], vec![0, 1]).is_err());
        assert!(Origami::new(vec![0, 1], vec![0, 1]).is_err());
        assert!(Origami::new(vec![0, 2], vec![1, 0]).is_err());
        assert!(Origami::from_one_indexed(&[0], &[1]).is_err());
        assert_eq!(
            Origami::from_one_indexed(&[2, 1, 3], &[3, 2, 1]).unwrap(),
            Origami::l_shape()
        );
    }
}
