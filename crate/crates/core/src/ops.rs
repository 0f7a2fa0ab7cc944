//! Operations on convex sets through their measures: Minkowski sums,
//! convolution, symmetrisations and the limits of repeated convolution.

use std::f64::consts::TAU;

use crate::boundary::{boundary_from_measure, measure_area, natural_points, ConvexBoundary, CLOSURE_TOL};
use crate::error::{Error, Result};
use crate::measure::{circ_convolve, mixture, CircleMeasure};

/// Minkowski sum by merging edge sequences; on equal angles the edge of `b1`
/// comes first.
pub fn minkowski_sum(b1: &ConvexBoundary, b2: &ConvexBoundary) -> ConvexBoundary {
    let edges = |b: &ConvexBoundary| -> Vec<_> {
        b.edge_angles()
            .iter()
            .zip(b.edge_lengths())
            .zip(b.edge_vectors())
            .map(|((&a, &l), v)| (a, l, v))
            .collect()
    };
    let (e1, e2) = (edges(b1), edges(b2));
    let mut merged = Vec::with_capacity(e1.len() + e2.len());
    let (mut i, mut j) = (0, 0);
    while i < e1.len() || j < e2.len() {
        let take_first = j == e2.len() || (i < e1.len() && e1[i].0.value() <= e2[j].0.value());
        if take_first {
            merged.push(e1[i]);
            i += 1;
        } else {
            merged.push(e2[j]);
            j += 1;
        }
    }
    let (s1, s2) = (b1.vertices()[0], b2.vertices()[0]);
    ConvexBoundary::from_edges([s1[0] + s2[0], s1[1] + s2[1]], &merged)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::domain(lambda, "[0, 1]"))
    }
}

/// Boundary of `λμ + (1−λ)ν`; the same set as `λC_μ ⊕ (1−λ)C_ν`.
pub fn mixture_ccs(lambda: f64, m1: &CircleMeasure, m2: &CircleMeasure, arc_subdiv: usize) -> Result<ConvexBoundary> {
    check_lambda(lambda)?;
    boundary_from_measure(&mixture(&[(lambda, m1), (1.0 - lambda, m2)])?, arc_subdiv)
}

/// `λC_μ ⊕ (1−λ)C_ν` built from the two boundaries directly.
pub fn minkowski_ccs(lambda: f64, m1: &CircleMeasure, m2: &CircleMeasure, arc_subdiv: usize) -> Result<ConvexBoundary> {
    check_lambda(lambda)?;
    let b1 = boundary_from_measure(m1, arc_subdiv)?;
    let b2 = boundary_from_measure(m2, arc_subdiv)?;
    Ok(minkowski_sum(&b1.scaled(lambda), &b2.scaled(1.0 - lambda)))
}

/// Boundary of `μ ⋆ ν`. Only `μ` needs to be closed.
pub fn convolve_ccs(m1: &CircleMeasure, m2: &CircleMeasure, arc_subdiv: usize) -> Result<ConvexBoundary> {
    m1.require_closed(CLOSURE_TOL)?;
    boundary_from_measure(&circ_convolve(m1, m2), arc_subdiv)
}

/// `½(ν_θ + reflect(ν_θ))` with `ν_θ = rotate(ν, θ)`.
pub fn minkowski_symmetrize(m: &CircleMeasure, theta: f64) -> Result<CircleMeasure> {
    m.require_closed(CLOSURE_TOL)?;
    let r = m.rotate(theta);
    mixture(&[(0.5, &r), (0.5, &r.reflect())])
}

/// Result of [`iterate_dyadic_symmetrization`].
#[derive(Clone, Debug)]
pub struct DyadicRun {
    pub measure: CircleMeasure,
    /// Sup-distance to the circle parametrisation after the last step.
    pub distance: f64,
}

/// Parameter grid used for sup-distances between parametrisations.
pub const PARAM_GRID: usize = 1 << 14;

/// Applies Minkowski symmetrisation with `θ_j = 2π/2^{j−1}`, `j = 1..k`.
pub fn iterate_dyadic_symmetrization(m: &CircleMeasure, k: usize) -> Result<DyadicRun> {
    let mut cur = m.clone();
    for j in 1..=k {
        let theta = TAU / 2f64.powi(j as i32 - 1);
        cur = minkowski_symmetrize(&cur, theta)?;
    }
    let distance = distance_to_circle(&cur, PARAM_GRID);
    Ok(DyadicRun { measure: cur, distance })
}

/// `max_i |Z_ν(t_i) − Z_circle(t_i)|` over `t_i = i/points`, with the circle
/// of the same perimeter traced from the origin.
pub fn distance_to_circle(m: &CircleMeasure, points: usize) -> f64 {
    let mass = m.mass();
    let ts: Vec<f64> = (0..=points).map(|i| mass * i as f64 / points as f64).collect();
    let z = natural_points(m, &ts);
    let r = mass / TAU;
    ts.iter()
        .zip(z)
        .map(|(&t, p)| {
            let phi = TAU * t / mass;
            let s = (0.5 * phi).sin();
            let c = [r * phi.sin(), 2.0 * r * s * s];
            (p[0] - c[0]).hypot(p[1] - c[1])
        })
        .fold(0.0, f64::max)
}

/// `μ ⋆ reflect(μ)`: the law of `X − X'`.
pub fn convolution_symmetrize(m: &CircleMeasure) -> CircleMeasure {
    circ_convolve(m, &m.reflect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StableKind {
    Uniform,
    Dirac,
    /// Uniform on the `m`-th roots of unity, up to rotation.
    MGon(usize),
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StableLimit {
    pub kind: StableKind,
    /// Rotation carrying the canonical limit onto the detected one,
    /// determined modulo `2π/m`.
    pub centering: f64,
}

impl StableLimit {
    /// Order of the cyclic group supporting the limit: 1 for a Dirac mass.
    pub fn lattice_order(&self) -> Option<usize> {
        match self.kind {
            StableKind::Dirac => Some(1),
            StableKind::MGon(m) => Some(m),
            _ => None,
        }
    }
}

/// Limit of repeated self-convolution up to rotation.
///
/// Coefficient `k` of the n-fold convolution has modulus `r_k^n`, which
/// survives only when `r_k = 1`. The smallest such `k` fixes the lattice.
/// A modulus in `[1 − √tol, 1 − tol)` cannot be decided at this tolerance.
pub fn classify_stable_limit(m: &CircleMeasure, max_iter: usize, tol: f64) -> StableLimit {
    let f = m.fourier(max_iter.max(1));
    let hard = 1.0 - tol;
    let soft = 1.0 - tol.sqrt();
    let mut undecided = false;
    for k in 1..=f.order() {
        let r = f.modulus(k);
        if r >= hard {
            let (a, b) = f.normalized(k);
            let centering = b.atan2(a).rem_euclid(TAU) / k as f64;
            let kind = if k == 1 { StableKind::Dirac } else { StableKind::MGon(k) };
            return StableLimit { kind, centering };
        }
        if r >= soft {
            undecided = true;
        }
    }
    let kind = if undecided { StableKind::Undecided } else { StableKind::Uniform };
    StableLimit { kind, centering: 0.0 }
}

/// `(√A(λμ + (1−λ)ν), λ√A(μ) + (1−λ)√A(ν))`.
pub fn brunn_minkowski_check(lambda: f64, m1: &CircleMeasure, m2: &CircleMeasure) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    let mix = mixture(&[(lambda, m1), (1.0 - lambda, m2)])?;
    let root = |m: &CircleMeasure| measure_area(m).map(|a| a.max(0.0).sqrt());
    Ok((root(&mix)?, lambda * root(m1)? + (1.0 - lambda) * root(m2)?))
}
