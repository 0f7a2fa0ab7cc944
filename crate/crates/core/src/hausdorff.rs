//! Hausdorff distances.
//!
//! For convex bodies the distance is the sup-norm of the difference of
//! support functions. Between breakpoints of either polygon's normal fan the
//! difference is `⟨v₁ − v₂, u(φ)⟩` for fixed vertices, a sinusoid that is
//! maximised in closed form.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::boundary::ConvexBoundary;

struct SupportFan {
    // (normal angle where the vertex starts supporting, vertex)
    breaks: Vec<(f64, [f64; 2])>,
}

impl SupportFan {
    fn new(b: &ConvexBoundary) -> SupportFan {
        let v = b.vertices();
        let n = v.len();
        if b.is_point() {
            return SupportFan { breaks: vec![(0.0, v[0])] };
        }
        let vecs = b.edge_vectors();
        let mut breaks = Vec::with_capacity(n);
        for k in 0..n {
            let e = vecs[(k + n - 1) % n];
            if e[0] == 0.0 && e[1] == 0.0 {
                continue;
            }
            // Vertex k supports normals from the outward normal of the edge
            // ending at k up to that of the edge starting at k.
            let phi = (e[1].atan2(e[0]) - FRAC_PI_2).rem_euclid(TAU);
            breaks.push((phi, v[k]));
        }
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0));
        SupportFan { breaks }
    }

    fn vertex(&self, phi: f64) -> [f64; 2] {
        let i = self.breaks.partition_point(|b| b.0 <= phi);
        if i == 0 {
            self.breaks[self.breaks.len() - 1].1
        } else {
            self.breaks[i - 1].1
        }
    }
}

/// Hausdorff distance between two convex bodies as placed.
pub fn hausdorff(b1: &ConvexBoundary, b2: &ConvexBoundary) -> f64 {
    let f1 = SupportFan::new(b1);
    let f2 = SupportFan::new(b2);
    let mut cuts: Vec<f64> = f1.breaks.iter().chain(&f2.breaks).map(|b| b.0).collect();
    cuts.push(0.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut best: f64 = 0.0;
    for i in 0..cuts.len() {
        let lo = cuts[i];
        let hi = if i + 1 < cuts.len() { cuts[i + 1] } else { TAU };
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let a = f1.vertex(mid);
        let b = f2.vertex(mid);
        let d = [a[0] - b[0], a[1] - b[1]];
        let g = |phi: f64| (d[0] * phi.cos() + d[1] * phi.sin()).abs();
        best = best.max(g(lo)).max(g(hi));
        let psi = d[1].atan2(d[0]).rem_euclid(TAU);
        for cand in [psi, (psi + PI).rem_euclid(TAU)] {
            if cand > lo && cand < hi {
                best = best.max(d[0].hypot(d[1]));
            }
        }
    }
    best
}

const LEAF: usize = 8;

struct Node {
    lo: [f64; 2],
    hi: [f64; 2],
    first: usize,
    last: usize,
    children: Option<(usize, usize)>,
}

/// Bounding-volume tree over the segments of a polyline.
pub struct PolylineIndex {
    pts: Vec<[f64; 2]>,
    nodes: Vec<Node>,
}

impl PolylineIndex {
    pub fn new(pts: &[[f64; 2]]) -> PolylineIndex {
        assert!(!pts.is_empty(), "polyline needs at least one point");
        let mut idx = PolylineIndex {
            pts: pts.to_vec(),
            nodes: Vec::new(),
        };
        let segs = pts.len().saturating_sub(1).max(1);
        idx.build(0, segs);
        idx
    }

    fn seg(&self, i: usize) -> ([f64; 2], [f64; 2]) {
        let a = self.pts[i];
        let b = *self.pts.get(i + 1).unwrap_or(&a);
        (a, b)
    }

    fn build(&mut self, first: usize, last: usize) -> usize {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for i in first..last {
            let (a, b) = self.seg(i);
            for p in [a, b] {
                for d in 0..2 {
                    lo[d] = lo[d].min(p[d]);
                    hi[d] = hi[d].max(p[d]);
                }
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            first,
            last,
            children: None,
        });
        if last - first > LEAF {
            let mid = (first + last) / 2;
            let l = self.build(first, mid);
            let r = self.build(mid, last);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    /// Distance from `p` to the polyline, or any value `≤ stop` as soon as
    /// one is found.
    pub fn distance_until(&self, p: [f64; 2], stop: f64) -> f64 {
        let mut best2 = f64::INFINITY;
        let stop2 = stop * stop;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let n = &self.nodes[id];
            if box_dist2(n, p) >= best2 {
                continue;
            }
            match n.children {
                Some((l, r)) => {
                    let (dl, dr) = (box_dist2(&self.nodes[l], p), box_dist2(&self.nodes[r], p));
                    if dl < dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for i in n.first..n.last {
                        let (a, b) = self.seg(i);
                        best2 = best2.min(seg_dist2(p, a, b));
                    }
                    if best2 <= stop2 {
                        return best2.sqrt();
                    }
                }
            }
        }
        best2.sqrt()
    }

    pub fn distance(&self, p: [f64; 2]) -> f64 {
        self.distance_until(p, 0.0)
    }
}

fn box_dist2(n: &Node, p: [f64; 2]) -> f64 {
    let dx = (n.lo[0] - p[0]).max(p[0] - n.hi[0]).max(0.0);
    let dy = (n.lo[1] - p[1]).max(p[1] - n.hi[1]).max(0.0);
    dx * dx + dy * dy
}

fn seg_dist2(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let dx = ap[0] - t * ab[0];
    let dy = ap[1] - t * ab[1];
    dx * dx + dy * dy
}

/// Largest distance from a vertex of `from` to the polyline `to`.
pub fn directed_vertex_distance(from: &[[f64; 2]], to: &PolylineIndex) -> f64 {
    let mut worst: f64 = 0.0;
    for &p in from {
        worst = worst.max(to.distance_until(p, worst));
    }
    worst
}

/// Symmetric vertex-to-polyline Hausdorff distance between two polylines.
pub fn hausdorff_curves(pts1: &[[f64; 2]], pts2: &[[f64; 2]]) -> f64 {
    let i1 = PolylineIndex::new(pts1);
    let i2 = PolylineIndex::new(pts2);
    directed_vertex_distance(pts1, &i2).max(directed_vertex_distance(pts2, &i1))
}
