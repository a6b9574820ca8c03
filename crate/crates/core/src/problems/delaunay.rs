//! Bowyer–Watson Delaunay triangulation of planar points.
//!
//! Points are inserted one at a time into a triangulation seeded with a
//! super-triangle ten times the extent of the input's bounding box. Each
//! insertion removes every triangle whose circumcircle strictly contains the
//! new point (determinant above [`INCIRCLE_TOL`]) and re-fans the cavity
//! boundary to that point. Triangles touching the super-triangle are dropped
//! at the end. Exact duplicate points are skipped; near-cocircular ties are
//! resolved in insertion order because a tie does not invalidate a triangle.

use std::collections::{BTreeSet, HashMap, HashSet};

pub type Point = [f64; 2];

pub const INCIRCLE_TOL: f64 = 1e-12;

const SUPER_SCALE: f64 = 10.0;

/// Triangles as counter-clockwise index triples into the input points.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    /// Undirected edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (u, v) = (t[k], t[(k + 1) % 3]);
                set.insert((u.min(v), u.max(v)));
            }
        }
        set.into_iter().collect()
    }
}

/// Twice the signed area of `(a, b, c)`; positive when counter-clockwise.
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// In-circle determinant for counter-clockwise `(a, b, c)`: positive iff `p`
/// lies inside the circumcircle.
pub fn incircle(a: Point, b: Point, c: Point, p: Point) -> f64 {
    let (adx, ady) = (a[0] - p[0], a[1] - p[1]);
    let (bdx, bdy) = (b[0] - p[0], b[1] - p[1]);
    let (cdx, cdy) = (c[0] - p[0], c[1] - p[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

pub fn triangulate(points: &[Point]) -> Triangulation {
    let n = points.len();
    if n < 3 {
        return Triangulation {
            triangles: Vec::new(),
        };
    }

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let (cx, cy) = (0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]));
    let d = SUPER_SCALE * extent;

    let mut verts: Vec<Point> = points.to_vec();
    verts.push([cx - 2.0 * d, cy - d]);
    verts.push([cx + 2.0 * d, cy - d]);
    verts.push([cx, cy + 2.0 * d]);
    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];

    let mut seen = HashSet::with_capacity(n);
    for (pi, &p) in points.iter().enumerate() {
        if !seen.insert((p[0].to_bits(), p[1].to_bits())) {
            continue;
        }
        let mut bad: Vec<usize> = tris
            .iter()
            .enumerate()
            .filter(|(_, t)| incircle(verts[t[0]], verts[t[1]], verts[t[2]], p) > INCIRCLE_TOL)
            .map(|(k, _)| k)
            .collect();
        if bad.is_empty() {
            // p sits on circumcircles within tolerance; the containing
            // triangle must still be split
            if let Some(k) = tris.iter().position(|t| {
                (0..3).all(|e| orient(verts[t[e]], verts[t[(e + 1) % 3]], p) >= 0.0)
            }) {
                bad.push(k);
            } else {
                continue;
            }
        }

        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for &k in &bad {
            let t = tris[k];
            for e in 0..3 {
                let (u, v) = (t[e], t[(e + 1) % 3]);
                *edge_count.entry((u.min(v), u.max(v))).or_default() += 1;
            }
        }
        let mut boundary = Vec::new();
        for &k in &bad {
            let t = tris[k];
            for e in 0..3 {
                let (u, v) = (t[e], t[(e + 1) % 3]);
                if edge_count[&(u.min(v), u.max(v))] == 1 {
                    boundary.push((u, v));
                }
            }
        }

        bad.sort_unstable();
        for &k in bad.iter().rev() {
            tris.swap_remove(k);
        }
        for (u, v) in boundary {
            tris.push([u, v, pi]);
        }
    }

    tris.retain(|t| t.iter().all(|&v| v < n));
    tris.sort_unstable();
    Triangulation { triangles: tris }
}
