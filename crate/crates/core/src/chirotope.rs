//! Orientation of point triples and the Laplace transform of Gaussian
//! triangle areas.

use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream;

/// Signed areas at most this large in magnitude count as zero.
pub const SIGN_TOL: f64 = 1e-12;
/// Largest exponent accepted before the estimator reports divergence.
pub const MAX_EXPONENT: f64 = 700.0;

pub type Triple = (usize, usize, usize);

/// Algebraic area of the triangle `pqr`, positive when counterclockwise.
pub fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]))
}

fn sign(a: f64) -> i8 {
    if a > SIGN_TOL {
        1
    } else if a < -SIGN_TOL {
        -1
    } else {
        0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    points: Vec<[f64; 2]>,
}

impl PointSet {
    pub fn new(points: Vec<[f64; 2]>) -> Result<PointSet> {
        if points.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::invalid("point coordinates must be finite"));
        }
        Ok(PointSet { points })
    }

    /// Also rejects sets with three points collinear within [`SIGN_TOL`].
    pub fn in_general_position(points: Vec<[f64; 2]>) -> Result<PointSet> {
        let ps = PointSet::new(points)?;
        if let Some((t, _)) = ps.signs().into_iter().find(|&(_, s)| s == 0) {
            return Err(Error::invalid(format!("points {}, {}, {} are collinear", t.0, t.1, t.2)));
        }
        Ok(ps)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn signs(&self) -> BTreeMap<Triple, i8> {
        let p = &self.points;
        let n = p.len();
        let mut out = BTreeMap::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    out.insert((i, j, k), sign(signed_area(p[i], p[j], p[k])));
                }
            }
        }
        out
    }
}

fn require_three(ps: &PointSet) -> Result<()> {
    if ps.len() < 3 {
        return Err(Error::invalid(format!("need at least 3 points, got {}", ps.len())));
    }
    Ok(())
}

/// Orientation sign of every increasing triple.
pub fn chirotope_signs(ps: &PointSet) -> Result<BTreeMap<Triple, i8>> {
    require_three(ps)?;
    Ok(ps.signs())
}

/// True when every triple has the same nonzero sign, i.e. the points in the
/// given order are the vertices of a convex polygon traversed once.
pub fn is_convex_position(ps: &PointSet) -> Result<bool> {
    let s = chirotope_signs(ps)?;
    let first = s.values().next().copied().unwrap_or(0);
    Ok(first != 0 && s.values().all(|&x| x == first))
}

/// True when every point is a strict vertex of the convex hull, whatever
/// the order.
pub fn is_convex_position_hull(ps: &PointSet) -> Result<bool> {
    require_three(ps)?;
    let mut p = ps.points.clone();
    p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    if p.windows(2).any(|w| w[0] == w[1]) {
        return Ok(false);
    }
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * p.len());
    for pass in 0..2 {
        let floor = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(p.iter()) } else { Box::new(p.iter().rev()) };
        for &q in iter {
            while hull.len() >= floor + 2 && signed_area(hull[hull.len() - 2], hull[hull.len() - 1], q) <= SIGN_TOL {
                hull.pop();
            }
            hull.push(q);
        }
        hull.pop();
    }
    Ok(hull.len() == p.len())
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 32 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaplaceEstimate {
    pub estimate: f64,
    pub stderr: f64,
}

/// Monte Carlo estimate of `E exp(Σ λ_{ijk} A_{ijk})` for `n` independent
/// standard Gaussian points in the plane.
pub fn mc_laplace(lambdas: &BTreeMap<Triple, f64>, n: usize, replicas: usize, seed: u64) -> Result<LaplaceEstimate> {
    mc_laplace_shifted(lambdas, n, replicas, seed, [0.0, 0.0])
}

/// As [`mc_laplace`], with every point translated by `shift` (the same
/// draws are used for a given seed).
pub fn mc_laplace_shifted(
    lambdas: &BTreeMap<Triple, f64>,
    n: usize,
    replicas: usize,
    seed: u64,
    shift: [f64; 2],
) -> Result<LaplaceEstimate> {
    if n < 3 {
        return Err(Error::invalid(format!("need n ≥ 3, got {n}")));
    }
    if replicas < 2 {
        return Err(Error::invalid("need at least two replicas"));
    }
    for (&(i, j, k), &l) in lambdas {
        if !(i < j && j < k && k < n) {
            return Err(Error::invalid(format!("triple ({i},{j},{k}) is not increasing below n = {n}")));
        }
        if !l.is_finite() {
            return Err(Error::invalid(format!("lambda for ({i},{j},{k}) is not finite")));
        }
    }
    let terms: Vec<(Triple, f64)> = lambdas.iter().filter(|(_, &l)| l != 0.0).map(|(&t, &l)| (t, l)).collect();
    let values: Vec<f64> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    let y: f64 = StandardNormal.sample(&mut rng);
                    [x + shift[0], y + shift[1]]
                })
                .collect();
            terms.iter().map(|&((i, j, k), l)| l * signed_area(pts[i], pts[j], pts[k])).sum::<f64>()
        })
        .collect();
    if let Some(e) = values.iter().copied().find(|&e| e > MAX_EXPONENT) {
        return Err(Error::Divergence(format!("exponent {e:.3} exceeds {MAX_EXPONENT}; the transform is likely infinite here")));
    }
    let ex: Vec<f64> = values.iter().map(|e| e.exp()).collect();
    let mean = pairwise_sum(&ex) / replicas as f64;
    let dev: Vec<f64> = ex.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (replicas - 1) as f64;
    Ok(LaplaceEstimate {
        estimate: mean,
        stderr: (var / replicas as f64).sqrt(),
    })
}

/// `1/(1 − 3λ²/4)`, the transform for a single Gaussian triangle.
pub fn laplace_n3(lambda: f64) -> Result<f64> {
    let pole = 2.0 / 3f64.sqrt();
    if !(lambda.abs() < pole) {
        return Err(Error::domain(lambda, "|λ| < 2/√3"));
    }
    Ok(1.0 / (1.0 - 0.75 * lambda * lambda))
}
