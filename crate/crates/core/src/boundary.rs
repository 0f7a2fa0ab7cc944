//! Convex boundaries generated by circle measures, and back.
//!
//! The boundary of the convex set of a closed measure μ is traced by
//! `Z(t) = ∫_0^t e^{iF^{-1}(u)} du`. Atoms become straight edges and grid
//! cells become circular arcs, which are drawn as chords.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::measure::{Angle, CircleMeasure, FourierCoeffs, MERGE_TOL};
use crate::pieces::{chord, Piece};

/// Chords per grid cell used when none is requested.
pub const DEFAULT_ARC_SUBDIV: usize = 64;
/// Closure tolerance required before building a boundary.
pub const CLOSURE_TOL: f64 = 1e-9;

/// Closed counterclockwise polygon with nondecreasing edge angles.
///
/// Vertex `k` is the start of edge `k`; the last edge returns to vertex 0.
/// Boundaries built here start at the origin with the smallest edge angle.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexBoundary {
    vertices: Vec<[f64; 2]>,
    edge_angles: Vec<Angle>,
    edge_lengths: Vec<f64>,
    is_segment: bool,
}

impl ConvexBoundary {
    /// The one-point set at the origin.
    pub fn point() -> ConvexBoundary {
        ConvexBoundary {
            vertices: vec![[0.0, 0.0]],
            edge_angles: Vec::new(),
            edge_lengths: Vec::new(),
            is_segment: false,
        }
    }

    // Edges must already be sorted by angle.
    pub(crate) fn from_edges(start: [f64; 2], edges: &[(Angle, f64, [f64; 2])]) -> ConvexBoundary {
        if edges.is_empty() {
            return ConvexBoundary {
                vertices: vec![start],
                ..ConvexBoundary::point()
            };
        }
        let mut vertices = Vec::with_capacity(edges.len());
        let mut pos = start;
        for e in edges {
            vertices.push(pos);
            pos = [pos[0] + e.2[0], pos[1] + e.2[1]];
        }
        let edge_angles: Vec<Angle> = edges.iter().map(|e| e.0).collect();
        ConvexBoundary {
            is_segment: segment_like(&edge_angles),
            vertices,
            edge_angles,
            edge_lengths: edges.iter().map(|e| e.1).collect(),
        }
    }

    /// Validates a closed vertex loop and puts it in canonical position.
    /// Counterclockwise order is required; repeated consecutive points are
    /// dropped.
    pub fn from_vertices(points: &[[f64; 2]]) -> Result<ConvexBoundary> {
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("vertex coordinates must be finite"));
        }
        let mut pts: Vec<[f64; 2]> = Vec::with_capacity(points.len());
        for &p in points {
            if pts.last() != Some(&p) {
                pts.push(p);
            }
        }
        while pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        match pts.len() {
            0 => return Err(Error::invalid("no vertices")),
            1 => {
                return Ok(ConvexBoundary {
                    vertices: vec![pts[0]],
                    ..ConvexBoundary::point()
                })
            }
            _ => {}
        }
        let n = pts.len();
        let vecs: Vec<[f64; 2]> = (0..n).map(|k| sub(pts[(k + 1) % n], pts[k])).collect();
        let angles: Vec<f64> = vecs.iter().map(|v| Angle::new(v[1].atan2(v[0])).value()).collect();
        // Turning angle at vertex k+1, between edge k and edge k+1.
        let mut total = 0.0;
        for k in 0..n {
            let next = (k + 1) % n;
            let mut turn = (angles[next] - angles[k]).rem_euclid(TAU);
            if turn > TAU - 1e-9 {
                turn -= TAU;
            }
            let reversal_ok = n == 2;
            if turn < -1e-9 || turn > PI + 1e-9 || (turn > PI - 1e-9 && !reversal_ok) {
                return Err(Error::NonConvex { index: next });
            }
            total += turn;
            if total > TAU + 1e-6 {
                return Err(Error::NonConvex { index: next });
            }
        }
        if (total - TAU).abs() > 1e-6 {
            return Err(Error::NonConvex { index: 0 });
        }
        // Start at the edge where the angle sequence wraps around.
        let start = (0..n)
            .max_by(|&a, &b| {
                let da = angles[(a + n - 1) % n] - angles[a];
                let db = angles[(b + n - 1) % n] - angles[b];
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap_or(0);
        let edges: Vec<(Angle, f64, [f64; 2])> = (0..n)
            .map(|i| {
                let k = (start + i) % n;
                (Angle::new(angles[k]), vecs[k][0].hypot(vecs[k][1]), vecs[k])
            })
            .collect();
        Ok(ConvexBoundary::from_edges([0.0, 0.0], &edges))
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn edge_angles(&self) -> &[Angle] {
        &self.edge_angles
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn is_segment(&self) -> bool {
        self.is_segment
    }

    pub fn is_point(&self) -> bool {
        self.edge_angles.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        self.edge_lengths.iter().sum()
    }

    /// Vertices with the first repeated at the end.
    pub fn closed_polyline(&self) -> Vec<[f64; 2]> {
        let mut v = self.vertices.clone();
        v.push(self.vertices[0]);
        v
    }

    /// Edge vectors `v_{k+1} − v_k`.
    pub fn edge_vectors(&self) -> Vec<[f64; 2]> {
        let n = self.vertices.len();
        if self.is_point() {
            return Vec::new();
        }
        (0..n).map(|k| sub(self.vertices[(k + 1) % n], self.vertices[k])).collect()
    }

    /// Dilation about the origin by `lambda ≥ 0`.
    pub fn scaled(&self, lambda: f64) -> ConvexBoundary {
        assert!(lambda >= 0.0 && lambda.is_finite());
        if lambda == 0.0 {
            return ConvexBoundary::point();
        }
        ConvexBoundary {
            vertices: self.vertices.iter().map(|v| [v[0] * lambda, v[1] * lambda]).collect(),
            edge_angles: self.edge_angles.clone(),
            edge_lengths: self.edge_lengths.iter().map(|l| l * lambda).collect(),
            is_segment: self.is_segment,
        }
    }

    /// Rigid translation; the result is no longer in canonical position.
    pub fn translated(&self, dx: f64, dy: f64) -> ConvexBoundary {
        ConvexBoundary {
            vertices: self.vertices.iter().map(|v| [v[0] + dx, v[1] + dy]).collect(),
            ..self.clone()
        }
    }
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

// Exactly two distinct, antipodal edge directions.
fn segment_like(angles: &[Angle]) -> bool {
    let first = angles[0].value();
    let mut other: Option<f64> = None;
    for a in angles {
        let a = a.value();
        if (a - first).abs() <= MERGE_TOL {
            continue;
        }
        match other {
            None => other = Some(a),
            Some(o) if (a - o).abs() <= MERGE_TOL => {}
            _ => return false,
        }
    }
    other.is_some_and(|o| ((o - first).abs() - PI).abs() <= 1e-9)
}

/// Boundary of the convex set generated by a closed measure. Grid cells are
/// drawn with `arc_subdiv` chords each; arc endpoints are exact.
pub fn boundary_from_measure(m: &CircleMeasure, arc_subdiv: usize) -> Result<ConvexBoundary> {
    m.require_closed(CLOSURE_TOL)?;
    Ok(trace(m, arc_subdiv))
}

/// Same polyline as [`boundary_from_measure`] without the closure check; for
/// measures that are only approximately closed. Includes the end point.
pub fn curve_from_measure(m: &CircleMeasure, arc_subdiv: usize) -> Vec<[f64; 2]> {
    let b = trace(m, arc_subdiv);
    let mut pts = b.vertices;
    pts.push(m.pieces().total_pos);
    pts
}

fn trace(m: &CircleMeasure, arc_subdiv: usize) -> ConvexBoundary {
    let arc_subdiv = arc_subdiv.max(1);
    let idx = m.pieces();
    let cell = m.grid().map_or(TAU, |g| g.width());
    let mut edges = Vec::with_capacity(idx.pieces.len());
    for p in &idx.pieces {
        match *p {
            Piece::Jump { at, mass } => {
                let a = Angle::new(at);
                edges.push((a, mass, [mass * at.cos(), mass * at.sin()]));
            }
            Piece::Arc { from, to, mass } => {
                let width = to - from;
                let chords = ((arc_subdiv as f64 * width / cell) - 1e-9).ceil().max(1.0) as usize;
                let w = width / chords as f64;
                let part = mass / chords as f64;
                for c in 0..chords {
                    let start = from + w * c as f64;
                    let v = chord(start, w, part);
                    edges.push((Angle::new(start + 0.5 * w), part, v));
                }
            }
        }
    }
    ConvexBoundary::from_edges([0.0, 0.0], &edges)
}

/// One atom per edge: direction and length.
pub fn measure_from_boundary(b: &ConvexBoundary) -> Result<CircleMeasure> {
    if b.is_point() {
        return Err(Error::invalid("a single point carries no measure"));
    }
    let atoms: Vec<(f64, f64)> = b.edge_angles.iter().zip(&b.edge_lengths).map(|(a, &l)| (a.value(), l)).collect();
    CircleMeasure::atomic(&atoms)
}

/// Validates a vertex loop as convex and returns its edge measure.
pub fn measure_from_vertices(points: &[[f64; 2]]) -> Result<CircleMeasure> {
    measure_from_boundary(&ConvexBoundary::from_vertices(points)?)
}

/// `E[1{X ≤ θ} e^{iX}]` for each θ in `[0, 2π]`: the extremal point of the
/// boundary with outward tangent direction θ.
pub fn extremal_points(m: &CircleMeasure, thetas: &[f64]) -> Result<Vec<[f64; 2]>> {
    m.require_closed(CLOSURE_TOL)?;
    let idx = m.pieces();
    thetas
        .iter()
        .map(|&t| {
            if !t.is_finite() {
                return Err(Error::domain(t, "[0, 2π]"));
            }
            Ok(if t >= TAU { idx.total_pos } else { idx.pos_at_angle(t) })
        })
        .collect()
}

/// Natural parametrisation `Z(t)` for `t ∈ [0, mass]` (any measure).
pub fn natural_points(m: &CircleMeasure, ts: &[f64]) -> Vec<[f64; 2]> {
    let idx = m.pieces();
    ts.iter().map(|&t| idx.pos_at_mass(t)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Curvature {
    /// Radius of curvature of the arc drawn in this direction.
    Radius(f64),
    /// An atom: a corner of the boundary.
    Corner,
    /// No mass in this direction: a flat stretch.
    Flat,
}

pub fn curvature_radius(m: &CircleMeasure, theta: Angle) -> Curvature {
    let t = theta.value();
    let near = |a: f64| {
        let d = (a - t).abs();
        d.min(TAU - d) <= MERGE_TOL
    };
    if m.atoms().iter().any(|a| near(a.angle.value())) {
        return Curvature::Corner;
    }
    match m.grid() {
        Some(g) => {
            let j = ((t / g.width()) as usize).min(g.cells() - 1);
            let w = g.masses()[j];
            if w > 0.0 {
                Curvature::Radius(w / g.width())
            } else {
                Curvature::Flat
            }
        }
        None => Curvature::Flat,
    }
}

/// Area from the Fourier series together with a bound on the truncated tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AreaEstimate {
    pub value: f64,
    pub bound: f64,
}

/// `mass²·[1/(4π) − (1/(2π))·Σ_{k=2}^{K} (ᾱ_k² + β̄_k²)/(k² − 1)]`.
///
/// Each omitted term is at most `1/(k²−1)`, so the tail is bounded by
/// `mass²/(2π)·½(1/K + 1/(K+1))`.
pub fn area_fourier(fc: &FourierCoeffs) -> Result<AreaEstimate> {
    let k_max = fc.order();
    if k_max < 2 {
        return Err(Error::domain(k_max as f64, "order K ≥ 2"));
    }
    let mut sum = 0.0;
    for k in (2..=k_max).rev() {
        let (a, b) = fc.normalized(k);
        let kf = k as f64;
        sum += (a * a + b * b) / (kf * kf - 1.0);
    }
    let m2 = fc.mass() * fc.mass();
    let kf = k_max as f64;
    Ok(AreaEstimate {
        value: m2 * (1.0 / (4.0 * PI) - sum / (2.0 * PI)),
        bound: m2 / (2.0 * PI) * 0.5 * (1.0 / kf + 1.0 / (kf + 1.0)),
    })
}

/// Shoelace area of the polygon.
pub fn area_shoelace(b: &ConvexBoundary) -> f64 {
    let v = &b.vertices;
    let n = v.len();
    let o = v[0];
    let mut s = 0.0;
    for k in 1..n.saturating_sub(1) {
        let p = sub(v[k], o);
        let q = sub(v[k + 1], o);
        s += p[0] * q[1] - p[1] * q[0];
    }
    0.5 * s.abs()
}

/// `Σ_{θ_i < θ_j} w_i w_j cos θ_i sin θ_j + ½ Σ_i w_i² cos θ_i sin θ_i`, the
/// discrete form of `E[cos X sin X' 1{X ≤ X'}]` with ties split evenly.
pub fn area_pairs(m: &CircleMeasure) -> Result<f64> {
    if !m.is_atomic() {
        return Err(Error::Unsupported("pairwise area needs an atomic measure".into()));
    }
    m.require_closed(CLOSURE_TOL)?;
    let (mut below, mut sum) = (0.0, 0.0);
    for a in m.atoms() {
        let (s, c) = a.angle.value().sin_cos();
        sum += a.weight * s * below + 0.5 * a.weight * a.weight * c * s;
        below += a.weight * c;
    }
    Ok(sum)
}

/// Area by the cheapest exact route: pairs for atomic measures, otherwise
/// the Fourier series to the default order.
pub fn measure_area(m: &CircleMeasure) -> Result<f64> {
    if m.is_atomic() {
        area_pairs(m)
    } else {
        m.require_closed(CLOSURE_TOL)?;
        Ok(area_fourier(&m.fourier(crate::measure::DEFAULT_K))?.value)
    }
}
