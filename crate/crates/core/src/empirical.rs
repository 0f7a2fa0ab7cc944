//! Sampling, empirical curves and their fluctuations, the Gaussian limit
//! covariance, and argument-sorted reorderings of plane samples.

use std::f64::consts::{FRAC_PI_2, TAU};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::boundary::boundary_from_measure;
use crate::error::{Error, Result};
use crate::hausdorff::{directed_vertex_distance, PolylineIndex};
use crate::measure::{circ_convolve, Angle, CircleMeasure};
use crate::pieces::{Piece, PieceIndex};
use crate::rng::stream;

/// Arguments closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-12;
/// Samples with at most this many distinct arguments map to atoms.
pub const MAX_EXACT_ARGS: usize = 64;

/// Finite multiset of plane points in polar form.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexSample {
    points: Vec<(f64, Angle)>,
}

impl ComplexSample {
    /// From `(modulus, argument)` pairs.
    pub fn new(points: &[(f64, f64)]) -> Result<ComplexSample> {
        let mut out = Vec::with_capacity(points.len());
        for (i, &(r, a)) in points.iter().enumerate() {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::invalid(format!("point {i}: modulus {r} must be finite and nonnegative")));
            }
            out.push((r, Angle::try_new(a)?));
        }
        Ok(ComplexSample { points: out })
    }

    pub fn from_cartesian(points: &[[f64; 2]]) -> ComplexSample {
        ComplexSample {
            points: points.iter().map(|p| (p[0].hypot(p[1]), Angle::new(p[1].atan2(p[0])))).collect(),
        }
    }

    pub fn points(&self) -> &[(f64, Angle)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_modulus(&self) -> f64 {
        self.points.iter().map(|p| p.0).sum()
    }
}

enum Slot {
    Atom(Angle),
    Cell { from: f64, width: f64 },
}

/// Inverse-CDF sampler over atoms and grid cells.
pub struct AngleSampler {
    ends: Vec<f64>,
    slots: Vec<Slot>,
}

impl AngleSampler {
    pub fn new(m: &CircleMeasure) -> AngleSampler {
        let mut ends = Vec::new();
        let mut slots = Vec::new();
        let mut acc = 0.0;
        for a in m.atoms() {
            acc += a.weight;
            ends.push(acc);
            slots.push(Slot::Atom(a.angle));
        }
        if let Some(g) = m.grid() {
            for (j, &w) in g.masses().iter().enumerate() {
                if w > 0.0 {
                    acc += w;
                    ends.push(acc);
                    slots.push(Slot::Cell {
                        from: g.cell_start(j),
                        width: g.width(),
                    });
                }
            }
        }
        AngleSampler { ends, slots }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Angle {
        let total = self.ends[self.ends.len() - 1];
        let u = rng.random::<f64>() * total;
        let i = self.ends.partition_point(|&e| e <= u).min(self.slots.len() - 1);
        match self.slots[i] {
            Slot::Atom(a) => a,
            Slot::Cell { from, width } => Angle::clamped(from + width * rng.random::<f64>()),
        }
    }

    pub fn draw_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Angle> {
        (0..n).map(|_| self.draw(rng)).collect()
    }
}

/// `n` independent draws from `m`, deterministic in `seed`.
pub fn sample_angles(m: &CircleMeasure, n: usize, seed: u64) -> Vec<Angle> {
    AngleSampler::new(m).draw_n(n, &mut stream(seed, 0))
}

fn sorted(angles: &[Angle]) -> Vec<f64> {
    let mut v: Vec<f64> = angles.iter().map(|a| a.value()).collect();
    v.sort_by(f64::total_cmp);
    v
}

// Partial sums of e^{iθ}/n over sorted angles, starting at the origin.
fn partial_sums(sorted: &[f64]) -> Vec<[f64; 2]> {
    let n = sorted.len() as f64;
    let mut out = Vec::with_capacity(sorted.len() + 1);
    let mut p = [0.0, 0.0];
    out.push(p);
    for &t in sorted {
        let (s, c) = t.sin_cos();
        p = [p[0] + c / n, p[1] + s / n];
        out.push(p);
    }
    out
}

/// `Z_n(k/n)`, `k = 0..n`: the sorted-angle walk with steps `e^{iθ}/n`.
pub fn empirical_curve(angles: &[Angle]) -> Result<Vec<[f64; 2]>> {
    if angles.is_empty() {
        return Err(Error::invalid("empirical curve needs at least one angle"));
    }
    Ok(partial_sums(&sorted(angles)))
}

fn require_probability(m: &CircleMeasure) -> Result<()> {
    if (m.mass() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("probability measure required, mass is {}", m.mass())));
    }
    Ok(())
}

/// `W_n(θ) = √n·(Z_n(N_n(θ)/n) − E[1{X ≤ θ} e^{iX}])` for each θ in `[0, 2π]`.
pub fn fluctuation_process(m: &CircleMeasure, angles: &[Angle], thetas: &[f64]) -> Result<Vec<[f64; 2]>> {
    require_probability(m)?;
    if angles.is_empty() {
        return Err(Error::invalid("no sample angles"));
    }
    let s = sorted(angles);
    let z = partial_sums(&s);
    let idx = m.pieces();
    let rn = (s.len() as f64).sqrt();
    thetas
        .iter()
        .map(|&t| {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::domain(t, "[0, 2π]"));
            }
            let k = s.partition_point(|&x| x <= t);
            let e = if t >= TAU { idx.total_pos } else { idx.pos_at_angle(t) };
            Ok([rn * (z[k][0] - e[0]), rn * (z[k][1] - e[1])])
        })
        .collect()
}

/// `sup_θ |Z_n(N_n(θ)/n) − E[1{X ≤ θ} e^{iX}]|`, evaluated exactly: both
/// sides are piecewise constant or circular between consecutive events.
pub fn max_theta_deviation(m: &CircleMeasure, angles: &[Angle]) -> Result<f64> {
    if angles.is_empty() {
        return Err(Error::invalid("no sample angles"));
    }
    let s = sorted(angles);
    let z = partial_sums(&s);
    let idx = m.pieces();
    Ok(max_deviation_sorted(&idx, &s, &z))
}

fn max_deviation_sorted(idx: &PieceIndex, s: &[f64], z: &[[f64; 2]]) -> f64 {
    let mut cuts: Vec<f64> = Vec::with_capacity(s.len() + 2 * idx.pieces.len() + 2);
    cuts.push(0.0);
    cuts.extend_from_slice(s);
    for p in &idx.pieces {
        match *p {
            Piece::Jump { at, .. } => cuts.push(at),
            Piece::Arc { from, to, .. } => {
                cuts.push(from);
                cuts.push(to);
            }
        }
    }
    cuts.push(TAU);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut best: f64 = 0.0;
    let mut k = 0;
    let mut piece = 0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        while k < s.len() && s[k] <= lo {
            k += 1;
        }
        let v = z[k];
        best = best.max(dist(v, idx.pos_at_angle(lo)));
        while piece + 1 < idx.pieces.len() && idx.pieces[piece + 1].start() <= lo {
            piece += 1;
        }
        let arc = match idx.pieces.get(piece) {
            Some(&Piece::Arc { from, to, mass }) if from <= lo && hi <= to => Some((from, to, mass)),
            _ => None,
        };
        match arc {
            Some((from, to, mass)) => {
                let e_hi = if hi >= to {
                    let d = crate::pieces::chord(from, to - from, mass);
                    let st = idx.start_pos[piece];
                    [st[0] + d[0], st[1] + d[1]]
                } else {
                    idx.pos_at_angle(hi)
                };
                best = best.max(dist(v, e_hi));
                // E(θ) = c + d·e^{i(θ − π/2)} on this arc.
                let d = mass / (to - from);
                let st = idx.start_pos[piece];
                let c = [st[0] - d * from.sin(), st[1] + d * from.cos()];
                let cv = [c[0] - v[0], c[1] - v[1]];
                let star = (cv[1].atan2(cv[0]) + FRAC_PI_2).rem_euclid(TAU);
                if star > lo && star < hi {
                    best = best.max(cv[0].hypot(cv[1]) + d);
                }
            }
            None => {
                // E is constant on (lo, hi): its left limit at hi equals its value at lo.
            }
        }
    }
    best.max(dist(z[s.len()], idx.total_pos))
}

/// One row of a convergence experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub replica: usize,
    /// Vertex-to-polyline Hausdorff distance between the empirical curve and
    /// the boundary.
    pub d_hausdorff: f64,
    /// `sup_θ |Z_n(N_n(θ)/n) − Z_μ(F_μ(θ))|` for the same sample.
    pub max_theta: f64,
}

/// For each `n` and replica `r`, samples `n` angles from stream `seed ⊕ r`
/// and measures the distance of the empirical curve to the boundary of `m`.
pub fn convergence_experiment(
    m: &CircleMeasure,
    ns: &[usize],
    replicas: usize,
    seed: u64,
    arc_subdiv: usize,
) -> Result<Vec<ConvergenceRow>> {
    require_probability(m)?;
    if ns.contains(&0) {
        return Err(Error::invalid("sample sizes must be positive"));
    }
    let reference = boundary_from_measure(m, arc_subdiv)?.closed_polyline();
    let ref_index = PolylineIndex::new(&reference);
    let pieces = m.pieces();
    let sampler = AngleSampler::new(m);
    let tasks: Vec<(usize, usize)> = ns.iter().flat_map(|&n| (0..replicas).map(move |r| (n, r))).collect();
    Ok(tasks
        .par_iter()
        .map(|&(n, r)| {
            let angles = sampler.draw_n(n, &mut stream(seed, r as u64));
            let s = sorted(&angles);
            let curve = partial_sums(&s);
            let curve_index = PolylineIndex::new(&curve);
            let d = directed_vertex_distance(&curve, &ref_index).max(directed_vertex_distance(&reference, &curve_index));
            ConvergenceRow {
                n,
                replica: r,
                d_hausdorff: d,
                max_theta: max_deviation_sorted(&pieces, &s, &curve),
            }
        })
        .collect())
}

/// Conditional law of `(cos X, sin X)` on one partition interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FddInterval {
    pub delta_f: f64,
    pub mean_cos: f64,
    pub mean_sin: f64,
    pub cond_cov: [[f64; 2]; 2],
}

/// Interval data behind the limit covariance of the fluctuation increments.
/// Interval 0 is the single point `{0}`; interval `j ≥ 1` is
/// `(θ_{j−1}, θ_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FddSpec {
    pub partition: Vec<f64>,
    pub intervals: Vec<FddInterval>,
}

fn check_partition(partition: &[f64]) -> Result<Vec<f64>> {
    if partition.len() < 2 {
        return Err(Error::invalid("partition needs at least the points 0 and 2π"));
    }
    if partition[0] != 0.0 {
        return Err(Error::invalid("partition must start at 0"));
    }
    let last = partition[partition.len() - 1];
    if (last - TAU).abs() > 1e-12 {
        return Err(Error::invalid("partition must end at 2π"));
    }
    for (i, w) in partition.windows(2).enumerate() {
        if !(w[1] > w[0]) || !w[1].is_finite() {
            return Err(Error::invalid(format!("partition is not strictly increasing at index {}", i + 1)));
        }
    }
    let mut p = partition.to_vec();
    *p.last_mut().unwrap() = TAU;
    Ok(p)
}

// ∫ over (a, b] of (1, cos, sin, cos², sin², cos·sin) dμ.
fn raw_moments(idx: &PieceIndex, a: f64, b: f64) -> [f64; 6] {
    let mut acc = [0.0; 6];
    for p in &idx.pieces {
        match *p {
            Piece::Jump { at, mass } => {
                if at > a && at <= b {
                    let (s, c) = at.sin_cos();
                    for (x, v) in acc.iter_mut().zip([1.0, c, s, c * c, s * s, c * s]) {
                        *x += mass * v;
                    }
                }
            }
            Piece::Arc { from, to, mass } => {
                let (x0, x1) = (from.max(a), to.min(b));
                if x1 <= x0 {
                    continue;
                }
                let d = mass / (to - from);
                let w = x1 - x0;
                let mid = 0.5 * (x0 + x1);
                let (sm, cm) = mid.sin_cos();
                let (s2, c2) = (2.0 * mid).sin_cos();
                let hs = 2.0 * (0.5 * w).sin();
                let sw = w.sin();
                let vals = [w, cm * hs, sm * hs, 0.5 * w + 0.5 * c2 * sw, 0.5 * w - 0.5 * c2 * sw, 0.5 * s2 * sw];
                for (x, v) in acc.iter_mut().zip(vals) {
                    *x += d * v;
                }
            }
        }
    }
    acc
}

impl FddSpec {
    pub fn new(m: &CircleMeasure, partition: &[f64]) -> Result<FddSpec> {
        require_probability(m)?;
        let partition = check_partition(partition)?;
        let idx = m.pieces();
        let mut intervals = Vec::with_capacity(partition.len());
        let at_zero = m.atoms().first().filter(|a| a.angle.value() == 0.0).map_or(0.0, |a| a.weight);
        intervals.push(FddInterval {
            delta_f: at_zero,
            mean_cos: 1.0,
            mean_sin: 0.0,
            cond_cov: [[0.0; 2]; 2],
        });
        for w in partition.windows(2) {
            let r = raw_moments(&idx, w[0], w[1]);
            let f = r[0];
            let iv = if f > 0.0 {
                let (ec, es) = (r[1] / f, r[2] / f);
                let cxy = r[5] / f - ec * es;
                FddInterval {
                    delta_f: f,
                    mean_cos: ec,
                    mean_sin: es,
                    cond_cov: [[r[3] / f - ec * ec, cxy], [cxy, r[4] / f - es * es]],
                }
            } else {
                FddInterval {
                    delta_f: 0.0,
                    mean_cos: 0.0,
                    mean_sin: 0.0,
                    cond_cov: [[0.0; 2]; 2],
                }
            };
            intervals.push(iv);
        }
        Ok(FddSpec { partition, intervals })
    }

    /// Covariance of the stacked increments `(ΔW_0, …, ΔW_κ)`, coordinates
    /// ordered `(x_0, y_0, x_1, y_1, …)`.
    ///
    /// `ΔW_j = √ΔF_j·Ñ_j + N_j·e_j` with `Ñ_j` the conditional fluctuation
    /// and `N` the multinomial limit: `Var N_j = ΔF_j(1 − ΔF_j)`,
    /// `Cov(N_j, N_l) = −ΔF_j ΔF_l`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let k = self.intervals.len();
        let mut c = DMatrix::zeros(2 * k, 2 * k);
        for (j, a) in self.intervals.iter().enumerate() {
            let ea = [a.mean_cos, a.mean_sin];
            for (l, b) in self.intervals.iter().enumerate() {
                let eb = [b.mean_cos, b.mean_sin];
                for r in 0..2 {
                    for s in 0..2 {
                        let v = if j == l {
                            a.delta_f * a.cond_cov[r][s] + a.delta_f * (1.0 - a.delta_f) * ea[r] * ea[s]
                        } else {
                            -a.delta_f * b.delta_f * ea[r] * eb[s]
                        };
                        c[(2 * j + r, 2 * l + s)] = v;
                    }
                }
            }
        }
        c
    }
}

/// Limit covariance of the stacked increments for a partition of `[0, 2π]`.
pub fn fdd_covariance(m: &CircleMeasure, partition: &[f64]) -> Result<DMatrix<f64>> {
    Ok(FddSpec::new(m, partition)?.covariance())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(c: &DMatrix<f64>) -> f64 {
    c.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Empirical increments `ΔW_j = √n·(Σ_{X_i ∈ I_j} e^{iX_i}/n − E[e^{iX} 1_{I_j}])`
/// over the same intervals as [`FddSpec`].
pub fn fdd_increments(m: &CircleMeasure, angles: &[Angle], partition: &[f64]) -> Result<Vec<[f64; 2]>> {
    let spec = FddSpec::new(m, partition)?;
    Ok(increments_with(&spec, angles))
}

pub(crate) fn increments_with(spec: &FddSpec, angles: &[Angle]) -> Vec<[f64; 2]> {
    let k = spec.intervals.len();
    let n = angles.len() as f64;
    let mut sums = vec![[0.0, 0.0]; k];
    for a in angles {
        let t = a.value();
        let j = if t == 0.0 { 0 } else { spec.partition.partition_point(|&p| p < t) };
        let (s, c) = t.sin_cos();
        sums[j][0] += c;
        sums[j][1] += s;
    }
    let rn = n.sqrt();
    sums.iter()
        .zip(&spec.intervals)
        .map(|(s, iv)| {
            let e = [iv.delta_f * iv.mean_cos, iv.delta_f * iv.mean_sin];
            [rn * (s[0] / n - e[0]), rn * (s[1] / n - e[1])]
        })
        .collect()
}

/// Monte Carlo covariance of the stacked increments over `replicas`
/// independent samples of size `n` (replica `r` uses stream `seed ⊕ r`).
pub fn fdd_monte_carlo(m: &CircleMeasure, partition: &[f64], n: usize, replicas: usize, seed: u64) -> Result<DMatrix<f64>> {
    let spec = FddSpec::new(m, partition)?;
    if n == 0 || replicas < 2 {
        return Err(Error::invalid("need n ≥ 1 and at least two replicas"));
    }
    let sampler = AngleSampler::new(m);
    let rows: Vec<Vec<f64>> = (0..replicas)
        .into_par_iter()
        .map(|r| {
            let angles = sampler.draw_n(n, &mut stream(seed, r as u64));
            increments_with(&spec, &angles).into_iter().flatten().collect()
        })
        .collect();
    let dim = rows[0].len();
    let mut mean = vec![0.0; dim];
    for row in &rows {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += x / replicas as f64;
        }
    }
    let mut c = DMatrix::zeros(dim, dim);
    for row in &rows {
        for a in 0..dim {
            for b in 0..dim {
                c[(a, b)] += (row[a] - mean[a]) * (row[b] - mean[b]);
            }
        }
    }
    Ok(c / (replicas - 1) as f64)
}

/// Circle measure weighting each direction by the share of total modulus
/// pointing that way. Samples with at most 64 distinct arguments give
/// atoms; otherwise moduli are binned on `cells` grid cells.
pub fn k_operator(s: &ComplexSample, cells: usize) -> Result<CircleMeasure> {
    let total = s.total_modulus();
    if !(total > 0.0) {
        return Err(Error::domain(total, "positive total modulus"));
    }
    let mut pts: Vec<(f64, f64)> = s.points.iter().filter(|p| p.0 > 0.0).map(|p| (p.1.value(), p.0)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut groups = 0;
    let mut anchor = f64::NEG_INFINITY;
    for p in &pts {
        if p.0 - anchor > TIE_TOL {
            groups += 1;
            anchor = p.0;
            if groups > MAX_EXACT_ARGS {
                break;
            }
        }
    }
    if groups <= MAX_EXACT_ARGS {
        let atoms: Vec<(f64, f64)> = pts.iter().map(|&(a, r)| (a, r / total)).collect();
        return CircleMeasure::atomic(&atoms);
    }
    if cells == 0 {
        return Err(Error::invalid("cell count must be positive"));
    }
    let mut masses = vec![0.0; cells];
    for (a, r) in pts {
        let j = ((a / TAU * cells as f64) as usize).min(cells - 1);
        masses[j] += r / total;
    }
    CircleMeasure::from_grid(masses)
}

// Sorts (argument, vector) pairs, shuffles ties, and walks the partial sums.
fn reorder_vectors<R: Rng + ?Sized>(mut items: Vec<(f64, [f64; 2])>, scale: f64, rng: &mut R) -> Vec<[f64; 2]> {
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut i = 0;
    while i < items.len() {
        let mut j = i + 1;
        while j < items.len() && items[j].0 - items[i].0 <= TIE_TOL {
            j += 1;
        }
        if j - i > 1 {
            items[i..j].shuffle(rng);
        }
        i = j;
    }
    let mut out = Vec::with_capacity(items.len() + 1);
    let mut p = [0.0, 0.0];
    out.push(p);
    for (_, v) in items {
        p = [p[0] + v[0] * scale, p[1] + v[1] * scale];
        out.push(p);
    }
    out
}

/// Partial sums of the sample sorted by argument, scaled by 1/Σ moduli.
/// Tied arguments are put in uniformly random order.
pub fn reorder_complex<R: Rng + ?Sized>(s: &ComplexSample, rng: &mut R) -> Result<Vec<[f64; 2]>> {
    let total = s.total_modulus();
    if !(total > 0.0) {
        return Err(Error::domain(total, "positive total modulus"));
    }
    let items = s
        .points
        .iter()
        .map(|&(r, a)| {
            let u = a.unit();
            (a.value(), [r * u[0], r * u[1]])
        })
        .collect();
    Ok(reorder_vectors(items, 1.0 / total, rng))
}

/// Closed convex polygon from the cyclic differences `z_{i+1} − z_i`
/// rearranged by argument.
pub fn reorder_polygon<R: Rng + ?Sized>(zs: &[[f64; 2]], rng: &mut R) -> Result<Vec<[f64; 2]>> {
    let n = zs.len();
    if n < 2 {
        return Err(Error::invalid("need at least two points"));
    }
    let mut total = 0.0;
    let items: Vec<(f64, [f64; 2])> = (0..n)
        .map(|i| {
            let a = zs[i];
            let b = zs[(i + 1) % n];
            let w = [b[0] - a[0], b[1] - a[1]];
            total += w[0].hypot(w[1]);
            (Angle::new(w[1].atan2(w[0])).value(), w)
        })
        .collect();
    if !(total > 0.0) {
        return Err(Error::invalid("all points coincide"));
    }
    Ok(reorder_vectors(items, 1.0 / total, rng))
}

/// `K` of the pairwise product sample against the convolution of the two
/// `K` images.
pub fn prop_convol_check(s1: &ComplexSample, s2: &ComplexSample, cells: usize) -> Result<(CircleMeasure, CircleMeasure)> {
    let mut prod = Vec::with_capacity(s1.len() * s2.len());
    for &(r, a) in &s1.points {
        for &(q, b) in &s2.points {
            prod.push((r * q, a.rotated(b.value())));
        }
    }
    let lhs = k_operator(&ComplexSample { points: prod }, cells)?;
    let rhs = circ_convolve(&k_operator(s1, cells)?, &k_operator(s2, cells)?);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::extremal_points;
    use crate::hausdorff::hausdorff_curves;
    use crate::rng::stream;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn sampling_examples() {
        assert!(sample_angles(&CircleMeasure::dirac(0.0), 5, 1).iter().all(|a| a.value() == 0.0));
        // Kolmogorov–Smirnov against x/2π; 1% critical value 1.628/√n
        let n = 100_000;
        let s = sorted(&sample_angles(&CircleMeasure::uniform(4096), n, 11));
        let ks = s
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = x / TAU;
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 1.628 / (n as f64).sqrt(), "ks={ks}");
        let sq = sample_angles(&CircleMeasure::regular_polygon(4), 10_000, 5);
        for j in 0..4 {
            let c = sq.iter().filter(|a| (a.value() - FRAC_PI_2 * j as f64).abs() < 1e-12).count() as f64;
            assert!((c - 2500.0).abs() < 4.0 * (10_000.0f64 * 0.25 * 0.75).sqrt());
        }
        assert_eq!(sample_angles(&CircleMeasure::uniform(64), 10, 3), sample_angles(&CircleMeasure::uniform(64), 10, 3));
    }

    #[test]
    fn curve_examples() {
        let sq = empirical_curve(&[0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2].map(Angle::new)).unwrap();
        let want = [[0.0, 0.0], [0.25, 0.0], [0.25, 0.25], [0.0, 0.25], [0.0, 0.0]];
        for (p, w) in sq.iter().zip(want) {
            assert!((p[0] - w[0]).abs() < 1e-16 && (p[1] - w[1]).abs() < 1e-16);
        }
        let one = empirical_curve(&[Angle::new(1.0)]).unwrap();
        assert_eq!(one, vec![[0.0, 0.0], [1f64.cos(), 1f64.sin()]]);
        assert!(empirical_curve(&[]).is_err());
        let mut rng = stream(3, 0);
        for _ in 0..1000 {
            let angles: Vec<Angle> = (0..20).map(|_| Angle::new(rng.random::<f64>() * TAU)).collect();
            let c = empirical_curve(&angles).unwrap();
            let dirs: Vec<f64> = c.windows(2).map(|w| Angle::new((w[1][1] - w[0][1]).atan2(w[1][0] - w[0][0])).value()).collect();
            assert!(dirs.windows(2).all(|d| d[0] <= d[1] + 1e-12));
        }
    }

    #[test]
    fn fluctuation_examples() {
        let sq = CircleMeasure::regular_polygon(4);
        let perfect: Vec<Angle> = (0..40).map(|i| Angle::new(FRAC_PI_2 * (i % 4) as f64)).collect();
        let w = fluctuation_process(&sq, &perfect, &[0.0, 1.0, PI, 5.0, TAU]).unwrap();
        assert!(w.iter().all(|p| p[0].abs() < 1e-14 && p[1].abs() < 1e-14));
        let u = CircleMeasure::uniform(256);
        let angles = sample_angles(&u, 100, 4);
        let end = fluctuation_process(&u, &angles, &[TAU]).unwrap()[0];
        let z = empirical_curve(&angles).unwrap()[100];
        assert!((end[0] - 10.0 * z[0]).abs() < 1e-12 && (end[1] - 10.0 * z[1]).abs() < 1e-12);
    }

    // Dense-θ oracle for the max deviation.
    fn dense_deviation(m: &CircleMeasure, angles: &[Angle], points: usize) -> f64 {
        let thetas: Vec<f64> = (0..=points).map(|i| TAU * i as f64 / points as f64).collect();
        let w = fluctuation_process(m, angles, &thetas).unwrap();
        let rn = (angles.len() as f64).sqrt();
        w.iter().map(|p| p[0].hypot(p[1]) / rn).fold(0.0, f64::max)
    }

    #[test]
    fn max_theta_matches_dense_sweep() {
        for (seed, m) in [(1, CircleMeasure::uniform(512)), (2, CircleMeasure::half_disc(512).unwrap()), (3, CircleMeasure::regular_polygon(5))] {
            let angles = sample_angles(&m, 50, seed);
            let exact = max_theta_deviation(&m, &angles).unwrap();
            let dense = dense_deviation(&m, &angles, 400_000);
            assert!(exact >= dense - 1e-15 && exact - dense < 1e-4, "{exact} vs {dense}");
        }
    }

    #[test]
    fn curve_distance_is_dominated_by_max_theta() {
        let m = CircleMeasure::half_disc(1024).unwrap();
        let b = boundary_from_measure(&m, 8).unwrap().closed_polyline();
        for seed in 0..5 {
            let angles = sample_angles(&m, 200, seed);
            let c = empirical_curve(&angles).unwrap();
            assert!(hausdorff_curves(&c, &b) <= max_theta_deviation(&m, &angles).unwrap() + 1e-9);
        }
    }

    #[test]
    fn segment_curve_is_exact_with_balanced_sample() {
        // with exactly n/2 draws at each atom the empirical curve is the
        // segment itself; the chance of that is the central binomial term
        let seg = CircleMeasure::segment(FRAC_PI_2);
        let b = boundary_from_measure(&seg, 1).unwrap().closed_polyline();
        let n = 10;
        let (mut hits, reps) = (0usize, 20_000);
        for r in 0..reps {
            let a = AngleSampler::new(&seg).draw_n(n, &mut stream(99, r as u64));
            let d = hausdorff_curves(&empirical_curve(&a).unwrap(), &b);
            let ups = a.iter().filter(|x| x.value() < PI).count();
            assert_eq!(d < 1e-15, ups == n / 2);
            hits += usize::from(d < 1e-15);
        }
        let p = 252.0 / 1024.0;
        let sd = (p * (1.0 - p) / reps as f64).sqrt();
        assert!((hits as f64 / reps as f64 - p).abs() < 4.0 * sd);
    }

    #[test]
    fn fdd_examples() {
        let u = CircleMeasure::uniform(4096);
        let c = fdd_covariance(&u, &[0.0, TAU]).unwrap();
        assert_eq!(c.nrows(), 4);
        assert!((c[(2, 2)] - 0.5).abs() < 1e-12 && (c[(3, 3)] - 0.5).abs() < 1e-12 && c[(2, 3)].abs() < 1e-12);
        assert!(c.view((0, 0), (2, 2)).iter().all(|&x| x == 0.0));
        let half: Vec<f64> = (0..64).map(|j| if j < 32 { 1.0 / 32.0 } else { 0.0 }).collect();
        let h = CircleMeasure::from_grid(half).unwrap();
        let c = fdd_covariance(&h, &[0.0, PI, TAU]).unwrap();
        assert!(c.view((4, 4), (2, 2)).iter().all(|&x| x == 0.0));
        assert!(fdd_covariance(&u, &[0.0, 2.0, 1.0, TAU]).is_err());
        assert!(fdd_covariance(&u, &[0.0, 3.0]).is_err());
    }

    // Covariance of the vector (e^{iX} 1{X ∈ I_j})_j for one draw, by quadrature.
    fn single_draw_covariance(m: &CircleMeasure, partition: &[f64], grid: usize) -> DMatrix<f64> {
        let k = partition.len();
        let mut second = DMatrix::zeros(2 * k, 2 * k);
        let mut mean = vec![0.0; 2 * k];
        let mut add = |x: f64, w: f64| {
            let j = if x == 0.0 { 0 } else { partition.partition_point(|&p| p < x) };
            let v = [x.cos(), x.sin()];
            for r in 0..2 {
                mean[2 * j + r] += w * v[r];
                for s in 0..2 {
                    second[(2 * j + r, 2 * j + s)] += w * v[r] * v[s];
                }
            }
        };
        for a in m.atoms() {
            add(a.angle.value(), a.weight);
        }
        if let Some(g) = m.grid() {
            let sub = grid / g.cells();
            for (j, &w) in g.masses().iter().enumerate() {
                for i in 0..sub {
                    add(g.cell_start(j) + g.width() * (i as f64 + 0.5) / sub as f64, w / sub as f64);
                }
            }
        }
        let mv = nalgebra::DVector::from_vec(mean);
        second - &mv * mv.transpose()
    }

    #[test]
    fn fdd_equals_single_draw_covariance() {
        let m = nalgebra_free_mixture();
        // cut points on cell edges keep the midpoint rule accurate
        let h = TAU / 256.0;
        let partition = [0.0, 32.0 * h, 80.0 * h, PI, 200.0 * h, TAU];
        let c = fdd_covariance(&m, &partition).unwrap();
        let diff = (c - single_draw_covariance(&m, &partition, 1 << 20)).abs().max();
        assert!(diff < 1e-9, "{diff}");
        let partition = [0.0, 1.0, 2.5, PI, 5.0, TAU];
        let c = fdd_covariance(&m, &partition).unwrap();
        let diff = (c - single_draw_covariance(&m, &partition, 1 << 20)).abs().max();
        assert!(diff < 1e-6, "{diff}");
    }

    fn nalgebra_free_mixture() -> CircleMeasure {
        let h = CircleMeasure::half_disc(256).unwrap();
        let t = CircleMeasure::regular_polygon(3);
        crate::measure::mixture(&[(0.6, &h), (0.4, &t)]).unwrap()
    }

    #[test]
    fn fdd_is_psd() {
        let m = nalgebra_free_mixture();
        let c = fdd_covariance(&m, &[0.0, 0.5, 2.0, 4.0, TAU]).unwrap();
        assert!((&c - c.transpose()).abs().max() < 1e-15);
        assert!(min_eigenvalue(&c) >= -1e-12);
        let spec = FddSpec::new(&m, &[0.0, 0.5, 2.0, 4.0, TAU]).unwrap();
        let total: f64 = spec.intervals.iter().map(|i| i.delta_f).sum();
        assert!((total - 1.0).abs() < 1e-14);
        for iv in &spec.intervals {
            let cc = iv.cond_cov;
            assert!(cc[0][0] >= -1e-15 && cc[1][1] >= -1e-15 && cc[0][0] * cc[1][1] - cc[0][1] * cc[1][0] >= -1e-15);
        }
    }

    #[test]
    fn increments_sum_to_final_fluctuation() {
        let m = nalgebra_free_mixture();
        let partition = [0.0, 1.0, 3.0, TAU];
        let angles = sample_angles(&m, 500, 8);
        let inc = fdd_increments(&m, &angles, &partition).unwrap();
        let w = fluctuation_process(&m, &angles, &partition).unwrap();
        let mut acc = [0.0, 0.0];
        for (j, d) in inc.iter().enumerate() {
            acc = [acc[0] + d[0], acc[1] + d[1]];
            assert!((acc[0] - w[j][0]).abs() < 1e-12 && (acc[1] - w[j][1]).abs() < 1e-12);
        }
    }

    fn cube_roots() -> ComplexSample {
        ComplexSample::new(&[(1.0, 0.0), (1.0, TAU / 3.0), (1.0, 2.0 * TAU / 3.0)]).unwrap()
    }

    #[test]
    fn k_operator_examples() {
        let k = k_operator(&cube_roots(), 64).unwrap();
        assert_eq!(k.atoms().len(), 3);
        assert!(k.atoms().iter().all(|a| (a.weight - 1.0 / 3.0).abs() < 1e-16));
        let one = k_operator(&ComplexSample::new(&[(2.0, 1.0), (0.5, 1.0)]).unwrap(), 64).unwrap();
        assert_eq!(one.atoms().len(), 1);
        assert_eq!(one.mass(), 1.0);
        assert!(k_operator(&ComplexSample::new(&[(0.0, 1.0)]).unwrap(), 64).is_err());
        let mut rng = stream(1, 0);
        let many: Vec<(f64, f64)> = (0..1000).map(|_| (rng.random::<f64>(), rng.random::<f64>() * TAU)).collect();
        let g = k_operator(&ComplexSample::new(&many).unwrap(), 128).unwrap();
        assert_eq!(g.grid().unwrap().cells(), 128);
        assert!((g.mass() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reorder_examples() {
        let mut rng = stream(5, 0);
        let c = reorder_complex(&cube_roots(), &mut rng).unwrap();
        assert!(c[3][0].abs() < 1e-15 && c[3][1].abs() < 1e-15);
        let seg = reorder_polygon(&[[0.0, 0.0], [1.0, 2.0]], &mut rng).unwrap();
        let b = crate::boundary::ConvexBoundary::from_vertices(&seg[..2]).unwrap();
        assert!(b.is_segment());
        // pentagon vertices in scrambled order give back a convex pentagon
        let penta: Vec<[f64; 2]> = [0, 2, 4, 1, 3].iter().map(|&k| Angle::new(TAU * k as f64 / 5.0).unit()).collect();
        let p = reorder_polygon(&penta, &mut rng).unwrap();
        assert!(p[5][0].abs() < 1e-15 && p[5][1].abs() < 1e-15);
        assert!(crate::boundary::ConvexBoundary::from_vertices(&p[..5]).is_ok());
    }

    #[test]
    fn ties_are_shuffled_deterministically() {
        let s = ComplexSample::new(&[(1.0, 0.5), (2.0, 0.5), (3.0, 0.5), (1.0, 2.0)]).unwrap();
        let a = reorder_complex(&s, &mut stream(9, 0)).unwrap();
        let b = reorder_complex(&s, &mut stream(9, 0)).unwrap();
        assert_eq!(a, b);
        let firsts: std::collections::BTreeSet<u64> = (0..50).map(|r| reorder_complex(&s, &mut stream(r, 0)).unwrap()[1][0].to_bits()).collect();
        assert_eq!(firsts.len(), 3);
    }

    #[test]
    fn convolution_identity_examples() {
        let s = cube_roots();
        let unit = ComplexSample::new(&[(1.0, 0.0)]).unwrap();
        let (l, r) = prop_convol_check(&s, &unit, 64).unwrap();
        assert_eq!(l, r);
        let (l, r) = prop_convol_check(&s, &s, 64).unwrap();
        assert_eq!(l.atoms().len(), 3);
        for (x, y) in l.atoms().iter().zip(r.atoms()) {
            assert!((x.weight - y.weight).abs() < 1e-15 && (x.angle.value() - y.angle.value()).abs() < 1e-12);
        }
        let mut rng = stream(21, 0);
        let mut random = || {
            let v: Vec<(f64, f64)> = (0..32).map(|_| (rng.random::<f64>() + 0.1, rng.random::<f64>() * TAU)).collect();
            ComplexSample::new(&v).unwrap()
        };
        let (a, b) = (random(), random());
        let cells = 1024;
        let (l, r) = prop_convol_check(&a, &b, cells).unwrap();
        let (fl, fr) = (l.fourier(8), r.fourier(8));
        for k in 1..=8 {
            let d = (fl.alpha()[k] - fr.alpha()[k]).hypot(fl.beta()[k] - fr.beta()[k]);
            assert!(d < 2.0 / cells as f64, "k={k} d={d}");
        }
    }

    #[test]
    fn extremal_points_agree_with_fluctuation_reference() {
        let m = CircleMeasure::half_disc(64).unwrap();
        let e = extremal_points(&m, &[1.0, 2.0]).unwrap();
        let w = fluctuation_process(&m, &[Angle::new(0.0)], &[1.0, 2.0]).unwrap();
        // single sample at 0: Z_1 = (1, 0) beyond θ = 0
        assert!((w[0][0] - (1.0 - e[0][0])).abs() < 1e-15 && (w[1][1] + e[1][1]).abs() < 1e-15);
    }
}
