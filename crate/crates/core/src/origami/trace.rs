//! Exact separatrix tracing on the square lattice.

use alloc::format;
use alloc::vec::Vec;

use super::{Corner, DirectionAtCone, Surface};
use crate::math::{self, within};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleConnection {
    pub id: usize,
    /// Outgoing direction at the start cone.
    pub start: DirectionAtCone,
    /// The arriving segment seen as a ray leaving the end cone.
    pub end: DirectionAtCone,
    /// Primitive direction `(p, q)`.
    pub direction: (i64, i64),
    /// Number of primitive steps: holonomy is `m·(p, q)`.
    pub multiplicity: u32,
    pub holonomy: (i64, i64),
    /// `|holonomy|²`, exact.
    pub norm2: u64,
    pub length: f64,
    pub reverse_id: usize,
}

impl SaddleConnection {
    fn sort_key(&self) -> (u64, usize, usize, i64, i64) {
        let (p, q) = self.direction;
        (self.norm2, self.start.cone, self.start.corner_index, p, q)
    }

    fn reverse_key(&self) -> (u64, usize, usize, i64, i64) {
        let (p, q) = self.direction;
        (self.norm2, self.end.cone, self.end.corner_index, -p, -q)
    }

    /// `(u, v)` with `u > 0, v ≥ 0`: the direction rotated back into the
    /// first quadrant, so `offset = atan2(v, u)`.
    pub fn start_offset_ratio(&self) -> (i64, i64) {
        quadrant(self.direction.0, self.direction.1).1
    }
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Quadrant `c` with `Θ ∈ [cπ/2, (c+1)π/2)` and the direction rotated by
/// `-cπ/2`.
fn quadrant(p: i64, q: i64) -> (usize, (i64, i64)) {
    let (mut x, mut y, mut c) = (p, q, 0);
    while !(x > 0 && y >= 0) {
        (x, y) = (y, -x);
        c += 1;
    }
    (c, (x, y))
}

fn rotate_ccw(x: i64, y: i64, times: usize) -> (i64, i64) {
    let (mut x, mut y) = (x, y);
    for _ in 0..times {
        (x, y) = (-y, x);
    }
    (x, y)
}

/// Primitive `(p, q)` with `p² + q² ≤ L²` in quadrant `c`, sorted by norm.
pub fn primitive_directions(max_len: f64, c: usize) -> Vec<(i64, i64)> {
    let r = math::floor(max_len + 1e-9) as i64;
    let mut out = Vec::new();
    for u in 1..=r {
        for v in 0..=r {
            let n2 = (u * u + v * v) as f64;
            if !within(math::sqrt(n2), max_len) {
                break;
            }
            if gcd(u, v) == 1 {
                out.push(rotate_ccw(u, v, c % 4));
            }
        }
    }
    out.sort_by_key(|&(p, q)| (p * p + q * q, p, q));
    out
}

/// Follows the ray leaving `cone` in sector `corner_index` along the
/// primitive direction `(p, q)`, passing straight through vertices that are
/// not cone points. Returns the saddle connection ending at the first cone
/// point within `max_len`, or `None`.
pub fn trace_separatrix(
    surface: &Surface,
    cone: usize,
    corner_index: usize,
    p: i64,
    q: i64,
    max_len: f64,
) -> Result<Option<SaddleConnection>> {
    if gcd(p, q) != 1 {
        return Err(Error::NotPrimitive { p, q });
    }
    if !(max_len > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "max_len must be positive (got {max_len})"
        )));
    }
    let cp = surface.cone(cone)?;
    if corner_index >= cp.corners.len() {
        return Err(Error::InvalidArgument(format!(
            "corner index {corner_index} out of range for a cone with {} corners",
            cp.corners.len()
        )));
    }
    let (c, (u, v)) = quadrant(p, q);
    if c != corner_index % 4 {
        return Err(Error::InvalidArgument(format!(
            "direction ({p}, {q}) does not leave through sector {corner_index}"
        )));
    }
    let o = surface.origami();
    let step = math::sqrt((p * p + q * q) as f64);
    let (a, b) = (p.unsigned_abs(), q.unsigned_abs());
    let step_x = |s: usize| if p > 0 { o.right(s) } else { o.left(s) };
    let step_y = |s: usize| if q > 0 { o.up(s) } else { o.down(s) };

    let (mut square, mut corner) = cp.corners[corner_index];
    let mut m: u32 = 0;
    loop {
        m += 1;
        if !within(m as f64 * step, max_len) {
            return Ok(None);
        }
        debug_assert_eq!(corner.index(), c);
        let (arrival, axis) = if a == 0 || b == 0 {
            (Corner::from_index(c + 1), true)
        } else {
            // cutting sequence of the segment (0,0)→(a,b): vertical line i
            // at t = i/a, horizontal line j at t = j/b, never together
            let (mut i, mut j) = (1u64, 1u64);
            while i < a || j < b {
                if j >= b || (i < a && i * b < j * a) {
                    square = step_x(square);
                    i += 1;
                } else {
                    square = step_y(square);
                    j += 1;
                }
            }
            (Corner::from_index(c + 2), false)
        };
        let (orbit, pos) = surface.locate(square, arrival);
        let len = surface.orbits()[orbit].corners.len();
        let back = if axis { (pos + 1) % len } else { pos };
        if let Some(end_cone) = surface.cone_of_orbit(orbit) {
            let offset = math::atan2(v as f64, u as f64);
            let holonomy = (m as i64 * p, m as i64 * q);
            return Ok(Some(SaddleConnection {
                id: 0,
                start: DirectionAtCone {
                    cone,
                    corner_index,
                    offset,
                },
                end: DirectionAtCone {
                    cone: end_cone,
                    corner_index: back,
                    offset,
                },
                direction: (p, q),
                multiplicity: m,
                holonomy,
                norm2: (holonomy.0 * holonomy.0 + holonomy.1 * holonomy.1) as u64,
                length: m as f64 * step,
                reverse_id: usize::MAX,
            }));
        }
        // regular vertex: leave through the opposite sector
        (square, corner) = surface.orbits()[orbit].corners[(back + 2) % len];
    }
}

/// Sorts by `(length, start cone, start sector, direction)`, assigns ids and
/// pairs every connection with its reverse.
pub fn assemble_saddles(mut saddles: Vec<SaddleConnection>) -> Result<Vec<SaddleConnection>> {
    saddles.sort_by_key(|s| s.sort_key());
    if saddles
        .windows(2)
        .any(|w| w[0].sort_key() == w[1].sort_key())
    {
        return Err(Error::InvalidArgument("duplicate saddle connection".into()));
    }
    for (i, s) in saddles.iter_mut().enumerate() {
        s.id = i;
    }
    for i in 0..saddles.len() {
        let key = saddles[i].reverse_key();
        let j = saddles
            .binary_search_by_key(&key, |s| s.sort_key())
            .map_err(|_| Error::InvalidArgument(format!("saddle connection {i} has no reverse")))?;
        saddles[i].reverse_id = j;
    }
    Ok(saddles)
}

/// Every oriented saddle connection of length at most `max_len`.
pub fn enumerate_saddles(surface: &Surface, max_len: f64) -> Result<Vec<SaddleConnection>> {
    if !(max_len > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "max_len must be positive (got {max_len})"
        )));
    }
    let dirs: Vec<Vec<(i64, i64)>> = (0..4).map(|c| primitive_directions(max_len, c)).collect();
    let mut out = Vec::new();
    for cone in surface.cones() {
        for j in 0..cone.corners.len() {
            for &(p, q) in &dirs[j % 4] {
                if let Some(s) = trace_separatrix(surface, cone.id, j, p, q, max_len)? {
                    out.push(s);
                }
            }
        }
    }
    assemble_saddles(out)
}
