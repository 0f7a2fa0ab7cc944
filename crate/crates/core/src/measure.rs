//! Finite positive measures on the circle `[0, 2π)`.
//!
//! A [`CircleMeasure`] is a hybrid of exact atoms and an optional uniform grid
//! of piecewise-constant density. Atoms give exact polygons; grid cells give
//! circular arcs with closed-form Fourier integrals.

use std::f64::consts::{PI, TAU};

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::pieces::PieceIndex;

/// Atoms closer than this (radians) are merged.
pub const MERGE_TOL: f64 = 1e-12;
/// Default grid resolution.
pub const DEFAULT_CELLS: usize = 4096;
/// Default Fourier truncation order.
pub const DEFAULT_K: usize = 256;

const LCM_CAP: usize = 1 << 20;
// Largest double strictly below 2π.
const TAU_BELOW: f64 = 6.283_185_307_179_585;

/// An angle reduced to `[0, 2π)`.
///
/// Values within [`MERGE_TOL`] below `2π` are mapped to 0 so that angles
/// produced by rotation land on the same atom as their exact counterparts.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    /// Reduces `x` mod 2π. `x` must be finite.
    pub fn new(x: f64) -> Angle {
        debug_assert!(x.is_finite());
        let r = x.rem_euclid(TAU);
        if r >= TAU - MERGE_TOL {
            Angle(0.0)
        } else {
            Angle(r)
        }
    }

    pub fn try_new(x: f64) -> Result<Angle> {
        if x.is_finite() {
            Ok(Angle::new(x))
        } else {
            Err(Error::domain(x, "finite angle"))
        }
    }

    /// Clamps into `[0, 2π)` without wrapping. Used where `2π` itself means
    /// "the end of the circle" rather than 0.
    pub(crate) fn clamped(x: f64) -> Angle {
        Angle(x.clamp(0.0, TAU_BELOW))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn rotated(self, by: f64) -> Angle {
        Angle::new(self.0 + by)
    }

    pub fn reflected(self) -> Angle {
        Angle::new(-self.0)
    }

    pub fn unit(self) -> [f64; 2] {
        let (s, c) = self.0.sin_cos();
        [c, s]
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub angle: Angle,
    pub weight: f64,
}

/// Uniform grid of `cells` arcs `[2πj/M, 2π(j+1)/M)` with constant density.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    masses: Vec<f64>,
}

impl Grid {
    pub fn cells(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn width(&self) -> f64 {
        TAU / self.masses.len() as f64
    }

    pub fn mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Left end of cell `j` (also valid for `j = M`, giving 2π).
    pub fn cell_start(&self, j: usize) -> f64 {
        cell_edge(j, self.masses.len())
    }
}

pub(crate) fn cell_edge(j: usize, m: usize) -> f64 {
    if j == m {
        TAU
    } else {
        TAU * j as f64 / m as f64
    }
}

// Midpoint of cell j: π(2j+1)/M, reduced exactly for multiples.
fn cell_mid_phase(k: usize, j: usize, m: usize) -> f64 {
    let idx = ((k as u128 * (2 * j as u128 + 1)) % (2 * m as u128)) as f64;
    PI * idx / m as f64
}

pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Finite positive measure on the circle: sorted atoms plus an optional grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CircleMeasure {
    atoms: Vec<Atom>,
    grid: Option<Grid>,
    mass: f64,
}

impl CircleMeasure {
    /// Builds a measure from `(angle, weight)` pairs and optional grid cell
    /// masses. Angles are reduced mod 2π, zero weights dropped, and atoms
    /// within [`MERGE_TOL`] merged.
    pub fn new(atoms: &[(f64, f64)], grid: Option<Vec<f64>>) -> Result<CircleMeasure> {
        let mut list = Vec::with_capacity(atoms.len());
        for (i, &(theta, w)) in atoms.iter().enumerate() {
            if !theta.is_finite() {
                return Err(Error::invalid(format!("atom {i}: angle {theta} is not finite")));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::invalid(format!("atom {i}: weight {w} must be a finite nonnegative number")));
            }
            if w > 0.0 {
                list.push(Atom {
                    angle: Angle::new(theta),
                    weight: w,
                });
            }
        }
        let grid = match grid {
            None => None,
            Some(masses) => {
                if masses.is_empty() {
                    return Err(Error::invalid("grid must have at least one cell"));
                }
                for (j, &g) in masses.iter().enumerate() {
                    if !g.is_finite() || g < 0.0 {
                        return Err(Error::invalid(format!("grid cell {j}: mass {g} must be a finite nonnegative number")));
                    }
                }
                Some(masses)
            }
        };
        Self::assemble(list, grid)
    }

    pub fn atomic(atoms: &[(f64, f64)]) -> Result<CircleMeasure> {
        Self::new(atoms, None)
    }

    pub fn from_grid(masses: Vec<f64>) -> Result<CircleMeasure> {
        Self::new(&[], Some(masses))
    }

    // Trusted constructor: atoms already have positive weights.
    pub(crate) fn assemble(atoms: Vec<Atom>, grid: Option<Vec<f64>>) -> Result<CircleMeasure> {
        let atoms = merge_atoms(atoms);
        let grid = grid.filter(|g| g.iter().any(|&x| x > 0.0)).map(|masses| Grid { masses });
        let mass = atoms.iter().map(|a| a.weight).sum::<f64>() + grid.as_ref().map_or(0.0, |g| g.mass());
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(Error::invalid("measure must have positive finite total mass"));
        }
        Ok(CircleMeasure { atoms, grid, mass })
    }

    /// Uniform probability measure on `cells` grid cells.
    pub fn uniform(cells: usize) -> CircleMeasure {
        assert!(cells > 0);
        Self::from_grid(vec![1.0 / cells as f64; cells]).expect("uniform grid is valid")
    }

    /// Atoms `1/m` at `2πj/m`.
    pub fn regular_polygon(m: usize) -> CircleMeasure {
        assert!(m > 0);
        let w = 1.0 / m as f64;
        let atoms: Vec<(f64, f64)> = (0..m).map(|j| (TAU * j as f64 / m as f64, w)).collect();
        Self::atomic(&atoms).expect("polygon atoms are valid")
    }

    pub fn dirac(theta: f64) -> CircleMeasure {
        Self::atomic(&[(theta, 1.0)]).expect("dirac is valid")
    }

    /// `½δ_θ + ½δ_{θ+π}`: a two-sided segment of length ½.
    pub fn segment(theta: f64) -> CircleMeasure {
        Self::atomic(&[(theta, 0.5), (theta + PI, 0.5)]).expect("segment is valid")
    }

    /// Atom `2r` at 0 plus density `r` on `(π/2, 3π/2)`, `r = 1/(2+π)`.
    /// The boundary is a half-disc. `cells` must be a multiple of 4.
    pub fn half_disc(cells: usize) -> Result<CircleMeasure> {
        if cells == 0 || cells % 4 != 0 {
            return Err(Error::invalid("half-disc grid needs a positive multiple of 4 cells"));
        }
        let r = 1.0 / (2.0 + PI);
        let h = TAU / cells as f64;
        let masses: Vec<f64> = (0..cells)
            .map(|j| if j >= cells / 4 && j < 3 * cells / 4 { r * h } else { 0.0 })
            .collect();
        Self::new(&[(0.0, 2.0 * r)], Some(masses))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_atomic(&self) -> bool {
        self.grid.is_none()
    }

    /// Multiplies every weight by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<CircleMeasure> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain(c, "(0, ∞)"));
        }
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                angle: a.angle,
                weight: a.weight * c,
            })
            .collect();
        let grid = self.grid.as_ref().map(|g| g.masses.iter().map(|x| x * c).collect());
        Self::assemble(atoms, grid)
    }

    pub fn normalized(&self) -> CircleMeasure {
        self.scaled(1.0 / self.mass).expect("mass is positive")
    }

    pub(crate) fn pieces(&self) -> PieceIndex {
        PieceIndex::new(self)
    }

    /// `F(x) = μ([0, x])`. Arguments below 0 give 0, at or beyond 2π the mass.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x >= TAU {
            return self.mass;
        }
        self.pieces().mass_at_angle(x)
    }

    /// Generalised inverse `inf{x ≥ 0 : F(x) ≥ y}`. `y = 0` returns the
    /// smallest point of the support.
    pub fn quantile(&self, y: f64) -> Result<Angle> {
        let idx = self.pieces();
        if !(0.0..=self.mass * (1.0 + 1e-12)).contains(&y) {
            return Err(Error::domain(y, format!("[0, {}]", self.mass)));
        }
        Ok(Angle::clamped(idx.angle_at_mass(y.min(self.mass))))
    }

    /// Unnormalised first moment `(α_1, β_1)`.
    pub fn first_moment(&self) -> (f64, f64) {
        let (mut c, mut s) = (0.0, 0.0);
        for a in &self.atoms {
            let (sn, cs) = a.angle.0.sin_cos();
            c += a.weight * cs;
            s += a.weight * sn;
        }
        if let Some(g) = &self.grid {
            let (gc, gs) = grid_first_moment(&g.masses);
            c += gc;
            s += gs;
        }
        (c, s)
    }

    /// True iff `|α_1 + iβ_1| ≤ tol·mass`.
    pub fn is_closed(&self, tol: f64) -> bool {
        let (c, s) = self.first_moment();
        c.hypot(s) <= tol * self.mass
    }

    pub(crate) fn require_closed(&self, tol: f64) -> Result<()> {
        let (c, s) = self.first_moment();
        let moment = c.hypot(s);
        if moment <= tol * self.mass {
            Ok(())
        } else {
            Err(Error::NotClosed { moment })
        }
    }

    /// Exact Fourier coefficients up to order `k_max`.
    pub fn fourier(&self, k_max: usize) -> FourierCoeffs {
        let mut alpha = vec![0.0; k_max + 1];
        let mut beta = vec![0.0; k_max + 1];
        alpha[0] = self.mass;
        for a in &self.atoms {
            for k in 1..=k_max {
                let (s, c) = (k as f64 * a.angle.0).rem_euclid(TAU).sin_cos();
                alpha[k] += a.weight * c;
                beta[k] += a.weight * s;
            }
        }
        if let Some(g) = &self.grid {
            let (ga, gb) = grid_fourier(&g.masses, k_max);
            for k in 1..=k_max {
                alpha[k] += ga[k];
                beta[k] += gb[k];
            }
        }
        FourierCoeffs {
            mass: self.mass,
            alpha,
            beta,
        }
    }

    /// Shifts every angle by `theta`. Grids move by whole cells when `theta`
    /// is a cell multiple and are re-binned otherwise.
    pub fn rotate(&self, theta: f64) -> CircleMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                angle: a.angle.rotated(theta),
                weight: a.weight,
            })
            .collect();
        let grid = self.grid.as_ref().map(|g| {
            let mut out = rotate_grid(&g.masses, theta);
            let (c, s) = grid_first_moment(&g.masses);
            let (sn, cs) = theta.sin_cos();
            moment_correct(&mut out, g.mass(), c * cs - s * sn, c * sn + s * cs);
            out
        });
        Self::assemble(atoms, grid).expect("rotation preserves mass")
    }

    /// Maps angle `x` to `2π − x`.
    pub fn reflect(&self) -> CircleMeasure {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                angle: a.angle.reflected(),
                weight: a.weight,
            })
            .collect();
        let grid = self.grid.as_ref().map(|g| g.masses.iter().rev().copied().collect());
        Self::assemble(atoms, grid).expect("reflection preserves mass")
    }
}

/// Coefficients `α_k = ∫cos kx dμ`, `β_k = ∫sin kx dμ` for `k = 0..=K`
/// (`β_0 = 0`).
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoeffs {
    mass: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl FourierCoeffs {
    pub fn new(mass: f64, alpha: Vec<f64>, beta: Vec<f64>) -> Result<FourierCoeffs> {
        if alpha.len() != beta.len() || alpha.is_empty() {
            return Err(Error::invalid("alpha and beta must have equal nonzero length"));
        }
        if !(mass > 0.0) {
            return Err(Error::domain(mass, "(0, ∞)"));
        }
        Ok(FourierCoeffs { mass, alpha, beta })
    }

    pub fn order(&self) -> usize {
        self.alpha.len() - 1
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// `(α_k, β_k) / mass`.
    pub fn normalized(&self, k: usize) -> (f64, f64) {
        (self.alpha[k] / self.mass, self.beta[k] / self.mass)
    }

    /// Classical series coefficients `(a_k, b_k) = (ᾱ_k, β̄_k)/π`.
    pub fn series(&self, k: usize) -> (f64, f64) {
        let (a, b) = self.normalized(k);
        (a / PI, b / PI)
    }

    /// `|ᾱ_k + iβ̄_k|`.
    pub fn modulus(&self, k: usize) -> f64 {
        let (a, b) = self.normalized(k);
        a.hypot(b)
    }
}

/// Weighted sum of measures. Grids of different resolution are re-binned to
/// the lcm of their cell counts, or to the finest grid when the lcm exceeds
/// 2²⁰ cells.
pub fn mixture(parts: &[(f64, &CircleMeasure)]) -> Result<CircleMeasure> {
    let mut atoms = Vec::new();
    let mut grids: Vec<(f64, &[f64])> = Vec::new();
    for (i, &(lambda, m)) in parts.iter().enumerate() {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::invalid(format!("mixture weight {i} is {lambda}; weights must be nonnegative")));
        }
        if lambda == 0.0 {
            continue;
        }
        atoms.extend(m.atoms.iter().map(|a| Atom {
            angle: a.angle,
            weight: lambda * a.weight,
        }));
        if let Some(g) = &m.grid {
            grids.push((lambda, &g.masses));
        }
    }
    let grid = sum_grids(&grids);
    CircleMeasure::assemble(atoms, grid).map_err(|_| Error::invalid("mixture needs at least one positive weight"))
}

/// Circular convolution: the law of `X + Y mod 2π` scaled to mass
/// `mass(a)·mass(b)`.
pub fn circ_convolve(a: &CircleMeasure, b: &CircleMeasure) -> CircleMeasure {
    let mut atoms = Vec::with_capacity(a.atoms.len() * b.atoms.len());
    for x in &a.atoms {
        for y in &b.atoms {
            atoms.push(Atom {
                angle: Angle::new(x.angle.0 + y.angle.0),
                weight: x.weight * y.weight,
            });
        }
    }
    let mut grids: Vec<Vec<f64>> = Vec::new();
    if let (Some(ga), Some(gb)) = (&a.grid, &b.grid) {
        let (ua, ub) = unify_pair(&ga.masses, &gb.masses);
        grids.push(grid_convolve(&ua, &ub));
    }
    for (atoms_side, grid_side) in [(&a.atoms, &b.grid), (&b.atoms, &a.grid)] {
        if let Some(g) = grid_side {
            if atoms_side.is_empty() {
                continue;
            }
            let mut acc = vec![0.0; g.cells()];
            for x in atoms_side.iter() {
                for (o, v) in acc.iter_mut().zip(rotate_grid(&g.masses, x.angle.0)) {
                    *o += x.weight * v;
                }
            }
            grids.push(acc);
        }
    }
    let refs: Vec<(f64, &[f64])> = grids.iter().map(|g| (1.0, g.as_slice())).collect();
    let mut grid = sum_grids(&refs);
    if let Some(g) = grid.as_mut() {
        let atom_mass: f64 = atoms.iter().map(|x| x.weight).sum();
        let (mut tc, mut ts) = complex_mul(a.first_moment(), b.first_moment());
        for x in &atoms {
            let (s, c) = x.angle.0.sin_cos();
            tc -= x.weight * c;
            ts -= x.weight * s;
        }
        moment_correct(g, a.mass * b.mass - atom_mass, tc, ts);
    }
    CircleMeasure::assemble(atoms, grid).expect("convolution of positive measures has positive mass")
}

fn complex_mul(x: (f64, f64), y: (f64, f64)) -> (f64, f64) {
    (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0)
}

/// Sorts atoms and merges runs whose angles lie within [`MERGE_TOL`] of the
/// run's first angle; the first angle is kept and weights add.
pub(crate) fn merge_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort_by(|x, y| x.angle.0.total_cmp(&y.angle.0));
    let mut out: Vec<Atom> = Vec::with_capacity(atoms.len());
    let mut anchor = f64::NEG_INFINITY;
    for a in atoms {
        match out.last_mut() {
            Some(last) if a.angle.0 - anchor <= MERGE_TOL => last.weight += a.weight,
            _ => {
                anchor = a.angle.0;
                out.push(a);
            }
        }
    }
    // Close the seam at 2π.
    if out.len() > 1 {
        let first = out[0].angle.0;
        let last = out[out.len() - 1];
        if first + TAU - last.angle.0 <= MERGE_TOL {
            out[0].weight += last.weight;
            out.pop();
        }
    }
    out
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

// Target resolution for a set of grids.
fn common_cells(sizes: impl Iterator<Item = usize>) -> (usize, bool) {
    let mut lcm = 0usize;
    let mut max = 0usize;
    let mut exact = true;
    for m in sizes {
        max = max.max(m);
        if lcm == 0 {
            lcm = m;
        } else if exact {
            let l = (lcm / gcd(lcm, m)).checked_mul(m);
            match l {
                Some(l) if l <= LCM_CAP => lcm = l,
                _ => exact = false,
            }
        }
    }
    if exact {
        (lcm, true)
    } else {
        (max, false)
    }
}

fn sum_grids(grids: &[(f64, &[f64])]) -> Option<Vec<f64>> {
    if grids.is_empty() {
        return None;
    }
    let (target, exact) = common_cells(grids.iter().map(|g| g.1.len()));
    let mut out = vec![0.0; target];
    let (mut tm, mut tc, mut ts) = (0.0, 0.0, 0.0);
    for &(lambda, g) in grids {
        for (o, v) in out.iter_mut().zip(rebin(g, target)) {
            *o += lambda * v;
        }
        if !exact {
            let (c, s) = grid_first_moment(g);
            tm += lambda * g.iter().sum::<f64>();
            tc += lambda * c;
            ts += lambda * s;
        }
    }
    if !exact {
        moment_correct(&mut out, tm, tc, ts);
    }
    Some(out)
}

fn unify_pair(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (target, _) = common_cells([a.len(), b.len()].into_iter());
    (rebin(a, target), rebin(b, target))
}

/// Mass-preserving re-binning onto `target` cells by exact overlap fractions.
pub(crate) fn rebin(src: &[f64], target: usize) -> Vec<f64> {
    let s = src.len();
    if s == target {
        return src.to_vec();
    }
    if target % s == 0 {
        let r = target / s;
        let inv = 1.0 / r as f64;
        return src.iter().flat_map(|&g| std::iter::repeat_n(g * inv, r)).collect();
    }
    // Positions measured in units of 2π/(s·target).
    let (s64, t64) = (s as u64, target as u64);
    let mut out = vec![0.0; target];
    let (mut i, mut j, mut pos) = (0u64, 0u64, 0u64);
    let total = s64 * t64;
    while pos < total {
        let end = ((j + 1) * t64).min((i + 1) * s64);
        out[i as usize] += src[j as usize] * (end - pos) as f64 / t64 as f64;
        pos = end;
        if pos == (j + 1) * t64 {
            j += 1;
        }
        if pos == (i + 1) * s64 {
            i += 1;
        }
    }
    out
}

pub(crate) fn grid_first_moment(masses: &[f64]) -> (f64, f64) {
    let m = masses.len();
    let damp = sinc(PI / m as f64);
    let (mut c, mut s) = (0.0, 0.0);
    for (j, &g) in masses.iter().enumerate() {
        if g != 0.0 {
            let (sn, cs) = cell_mid_phase(1, j, m).sin_cos();
            c += g * cs;
            s += g * sn;
        }
    }
    (c * damp, s * damp)
}

// α_k, β_k of a grid via one FFT: Σ_j g_j e^{ik m_j} = e^{iπk/M} Σ_j g_j e^{2πikj/M}.
fn grid_fourier(masses: &[f64], k_max: usize) -> (Vec<f64>, Vec<f64>) {
    let m = masses.len();
    let mut buf: Vec<Complex<f64>> = masses.iter().map(|&g| Complex::new(g, 0.0)).collect();
    FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
    let mut alpha = vec![0.0; k_max + 1];
    let mut beta = vec![0.0; k_max + 1];
    for k in 1..=k_max {
        let phase_idx = (k % (2 * m)) as f64;
        let (s, c) = (PI * phase_idx / m as f64).sin_cos();
        let z = buf[k % m] * Complex::new(c, s) * sinc(PI * k as f64 / m as f64);
        alpha[k] = z.re;
        beta[k] = z.im;
    }
    (alpha, beta)
}

// Grid × grid: circular convolution of cell masses, then the triangular
// overlap of two cells split evenly between the two cells it covers.
fn grid_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let m = a.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inv.process(&mut fa);
    let scale = 1.0 / m as f64;
    let c: Vec<f64> = fa.iter().map(|z| (z.re * scale).max(0.0)).collect();
    (0..m).map(|k| 0.5 * (c[k] + c[(k + m - 1) % m])).collect()
}

pub(crate) fn rotate_grid(masses: &[f64], theta: f64) -> Vec<f64> {
    let m = masses.len();
    let shift = theta.rem_euclid(TAU) * m as f64 / TAU;
    let whole = shift.round();
    let mut out = vec![0.0; m];
    if (shift - whole).abs() <= 1e-9 {
        let n = whole as usize % m;
        for (j, &g) in masses.iter().enumerate() {
            out[(j + n) % m] = g;
        }
    } else {
        let f = shift.floor();
        let frac = shift - f;
        let n = f as usize % m;
        for (j, &g) in masses.iter().enumerate() {
            out[(j + n) % m] += g * (1.0 - frac);
            out[(j + n + 1) % m] += g * frac;
        }
    }
    out
}

/// Multiplies cell masses by `1 + u + p·cos m_j + q·sin m_j` so that total
/// mass and first moment hit the targets. Skipped when the system is
/// degenerate or the factor would not stay positive.
pub(crate) fn moment_correct(masses: &mut [f64], target_mass: f64, target_c: f64, target_s: f64) {
    let m = masses.len();
    let damp = sinc(PI / m as f64);
    let mut trig = Vec::with_capacity(m);
    let mut mat = [[0.0f64; 3]; 3];
    let mut rhs = [target_mass, target_c, target_s];
    for (j, &g) in masses.iter().enumerate() {
        let (sn, cs) = cell_mid_phase(1, j, m).sin_cos();
        let v = [1.0, cs * damp, sn * damp];
        trig.push(v);
        if g == 0.0 {
            continue;
        }
        for r in 0..3 {
            rhs[r] -= g * v[r];
            for c in 0..3 {
                mat[r][c] += g * v[r] * v[c];
            }
        }
    }
    let Some(x) = solve3(mat, rhs) else { return };
    let mut factors = Vec::with_capacity(m);
    for v in &trig {
        let f = 1.0 + x[0] * v[0] + x[1] * v[1] + x[2] * v[2];
        if !(f > 0.5) || !f.is_finite() {
            return;
        }
        factors.push(f);
    }
    for (g, f) in masses.iter_mut().zip(factors) {
        *g *= f;
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&a);
    let scale = a[0][0].abs().max(1e-300).powi(3);
    if !(d.abs() > 1e-12 * scale) {
        return None;
    }
    let mut x = [0.0; 3];
    for (c, xc) in x.iter_mut().enumerate() {
        let mut t = a;
        for r in 0..3 {
            t[r][c] = b[r];
        }
        *xc = det(&t) / d;
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn angle_reduces() {
        assert_eq!(Angle::new(TAU).value(), 0.0);
        assert!(close(Angle::new(-FRAC_PI_2).value(), 3.0 * FRAC_PI_2, 1e-15));
        assert_eq!(Angle::new(-1e-20).value(), 0.0);
        assert!(Angle::try_new(f64::NAN).is_err());
    }

    #[test]
    fn cdf_examples() {
        let u = CircleMeasure::uniform(DEFAULT_CELLS);
        assert!(close(u.cdf(PI), 0.5, 1e-14));
        let two = CircleMeasure::atomic(&[(FRAC_PI_2, 0.5), (3.0 * FRAC_PI_2, 0.5)]).unwrap();
        assert_eq!(two.cdf(PI), 0.5);
        let mixed = CircleMeasure::new(&[(0.0, 0.3)], Some(vec![0.7 / 64.0; 64])).unwrap();
        assert!(close(mixed.cdf(0.0), 0.3, 1e-15));
        // direct summation oracle at an interior point
        let x = 1.234;
        let h = TAU / 64.0;
        let full = (x / h).floor();
        let oracle = 0.3 + 0.7 / 64.0 * full + 0.7 / 64.0 * (x - full * h) / h;
        assert!(close(mixed.cdf(x), oracle, 1e-15));
    }

    #[test]
    fn quantile_examples() {
        let u = CircleMeasure::uniform(DEFAULT_CELLS);
        assert!(close(u.quantile(0.25).unwrap().value(), FRAC_PI_2, 1e-13));
        let two = CircleMeasure::atomic(&[(FRAC_PI_2, 0.5), (3.0 * FRAC_PI_2, 0.5)]).unwrap();
        assert_eq!(two.quantile(0.5).unwrap().value(), FRAC_PI_2);
        assert_eq!(two.quantile(0.0).unwrap().value(), FRAC_PI_2);
        assert_eq!(two.quantile(0.5000001).unwrap().value(), 3.0 * FRAC_PI_2);
        assert!(two.quantile(1.5).is_err());
        assert!(two.quantile(-0.1).is_err());
        // inf-definition oracle over a fine grid of y
        let xs: Vec<f64> = (0..20000).map(|i| TAU * i as f64 / 20000.0).collect();
        for i in 1..=100 {
            let y = i as f64 / 100.0;
            let oracle = xs.iter().copied().find(|&x| two.cdf(x) >= y).unwrap();
            assert!(close(two.quantile(y).unwrap().value(), oracle, TAU / 20000.0));
        }
    }

    #[test]
    fn quantile_skips_plateaus() {
        let half = CircleMeasure::half_disc(64).unwrap();
        let r = 1.0 / (2.0 + PI);
        // just past the atom the next support point is π/2
        assert!(close(half.quantile(2.0 * r + 1e-15).unwrap().value(), FRAC_PI_2, 1e-12));
    }

    #[test]
    fn fourier_examples() {
        let u = CircleMeasure::uniform(DEFAULT_CELLS).fourier(64);
        for k in 1..=64 {
            assert!(u.alpha()[k].abs() < 1e-15 && u.beta()[k].abs() < 1e-15);
        }
        for m in 1..=8 {
            let f = CircleMeasure::regular_polygon(m).fourier(32);
            for k in 1..=32 {
                let want = if k % m == 0 { 1.0 } else { 0.0 };
                assert!(close(f.alpha()[k], want, 1e-13), "m={m} k={k}");
                assert!(f.beta()[k].abs() < 1e-13);
                assert!(close(f.series(k).0, want / PI, 1e-13));
            }
        }
        let d = CircleMeasure::dirac(0.7).fourier(10);
        for k in 1..=10 {
            assert!(close(d.alpha()[k], (k as f64 * 0.7).cos(), 1e-14));
        }
    }

    #[test]
    fn grid_fourier_matches_cell_integrals() {
        let masses: Vec<f64> = (0..48).map(|j| 1.0 + ((j * 7) % 5) as f64).collect();
        let m = CircleMeasure::from_grid(masses.clone()).unwrap();
        let f = m.fourier(100);
        let h = TAU / 48.0;
        for k in 1..=100 {
            let kf = k as f64;
            let (mut a, mut b) = (0.0, 0.0);
            for (j, &w) in masses.iter().enumerate() {
                let (lo, hi) = (j as f64 * h, (j + 1) as f64 * h);
                a += w * ((kf * hi).sin() - (kf * lo).sin()) / (kf * h);
                b += w * ((kf * lo).cos() - (kf * hi).cos()) / (kf * h);
            }
            assert!(close(f.alpha()[k], a, 1e-12) && close(f.beta()[k], b, 1e-12), "k={k}");
        }
    }

    #[test]
    fn closedness_examples() {
        assert!(CircleMeasure::regular_polygon(5).is_closed(1e-12));
        assert!(!CircleMeasure::dirac(0.0).is_closed(1e-12));
        assert!(CircleMeasure::segment(FRAC_PI_2).is_closed(1e-12));
        assert!(CircleMeasure::half_disc(4096).unwrap().is_closed(1e-14));
    }

    #[test]
    fn mixture_examples() {
        let a = CircleMeasure::segment(0.0);
        let b = CircleMeasure::segment(FRAC_PI_2);
        let m = mixture(&[(0.5, &a), (0.5, &b)]).unwrap();
        assert_eq!(m.atoms().len(), 4);
        assert!(m.atoms().iter().all(|x| x.weight == 0.25));
        assert_eq!(mixture(&[(1.0, &a)]).unwrap(), a);
        assert!(mixture(&[(0.0, &a)]).is_err());
        assert!(mixture(&[(-1.0, &a)]).is_err());
    }

    #[test]
    fn mixture_of_grids_rebins_to_lcm() {
        let a = CircleMeasure::from_grid(vec![0.25; 4]).unwrap();
        let b = CircleMeasure::from_grid(vec![1.0 / 6.0; 6]).unwrap();
        let m = mixture(&[(0.5, &a), (0.5, &b)]).unwrap();
        assert_eq!(m.grid().unwrap().cells(), 12);
        assert!(m.grid().unwrap().masses().iter().all(|&x| close(x, 1.0 / 12.0, 1e-16)));
    }

    #[test]
    fn rebin_general_overlap() {
        let out = rebin(&[1.0, 2.0, 3.0], 2);
        assert!(close(out[0], 1.0 + 1.0, 1e-15) && close(out[1], 1.0 + 3.0, 1e-15));
    }

    #[test]
    fn convolution_examples() {
        let tri = CircleMeasure::regular_polygon(3);
        let c = circ_convolve(&tri, &tri);
        assert_eq!(c.atoms().len(), 3);
        for (x, y) in c.atoms().iter().zip(tri.atoms()) {
            assert!(close(x.angle.value(), y.angle.value(), 1e-14) && close(x.weight, y.weight, 1e-15));
        }
        let d0 = CircleMeasure::dirac(0.0);
        let m = CircleMeasure::atomic(&[(0.3, 0.2), (2.0, 0.5), (4.0, 0.3)]).unwrap();
        assert_eq!(circ_convolve(&m, &d0), m);
    }

    #[test]
    fn grid_convolution_keeps_closure_and_mass() {
        let u = CircleMeasure::uniform(256);
        let h = CircleMeasure::half_disc(256).unwrap();
        let c = circ_convolve(&h, &h);
        assert!(close(c.mass(), 1.0, 1e-14));
        assert!(c.is_closed(1e-14));
        let cu = circ_convolve(&h, &u);
        for &g in cu.grid().unwrap().masses() {
            assert!(close(g, 1.0 / 256.0, 1e-15));
        }
    }

    #[test]
    fn rotate_and_reflect_examples() {
        let m = CircleMeasure::atomic(&[(0.3, 0.2), (2.0, 0.5), (4.0, 0.3)]).unwrap();
        assert_eq!(m.rotate(0.0), m);
        let rr = m.reflect().reflect();
        for (x, y) in rr.atoms().iter().zip(m.atoms()) {
            assert!(close(x.angle.value(), y.angle.value(), 1e-15));
        }
        let two = CircleMeasure::segment(FRAC_PI_2);
        assert_eq!(two.reflect(), two);
        let g = CircleMeasure::half_disc(64).unwrap();
        let cell = TAU / 64.0;
        let shifted = g.rotate(3.0 * cell);
        assert_eq!(shifted.grid().unwrap().masses()[19], g.grid().unwrap().masses()[16]);
    }

    #[test]
    fn grid_rotation_follows_coefficient_law() {
        let g = CircleMeasure::half_disc(4096).unwrap();
        let m = mixture(&[(1.0, &g), (0.5, &CircleMeasure::dirac(1.0))]).unwrap();
        let theta = 0.123456;
        let r = m.rotate(theta).fourier(1);
        let f = m.fourier(1);
        let (s, c) = theta.sin_cos();
        let (a, b) = f.normalized(1);
        let (ra, rb) = r.normalized(1);
        assert!(close(ra, a * c - b * s, 1e-12) && close(rb, a * s + b * c, 1e-12));
    }

    #[test]
    fn coefficients_converge_under_shrinking_perturbation() {
        let base = CircleMeasure::half_disc(1024).unwrap();
        let target = base.fourier(8);
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let bump = CircleMeasure::from_grid((0..1024).map(|j| if j % 7 == 0 { 1.0 } else { 0.0 }).collect()).unwrap();
            let m = mixture(&[(1.0 - eps, &base), (eps, &bump.normalized())]).unwrap();
            let f = m.fourier(8);
            let err = (1..=8).map(|k| (f.alpha()[k] - target.alpha()[k]).abs() + (f.beta()[k] - target.beta()[k]).abs()).fold(0.0, f64::max);
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    fn atomic_strategy() -> impl Strategy<Value = CircleMeasure> {
        prop::collection::vec((0.0..TAU, 0.01f64..1.0), 1..20).prop_map(|v| CircleMeasure::atomic(&v).unwrap())
    }

    fn grid_strategy() -> impl Strategy<Value = CircleMeasure> {
        prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..1.0], 8..40)
            .prop_filter("positive", |v| v.iter().any(|&x| x > 0.0))
            .prop_map(|v| CircleMeasure::from_grid(v).unwrap())
    }

    proptest! {
        #[test]
        fn galois_connection(m in prop_oneof![atomic_strategy(), grid_strategy()]) {
            for i in 1..=1000 {
                let y = m.mass() * i as f64 / 1000.0;
                let q = m.quantile(y).unwrap().value();
                prop_assert!(m.cdf(q) >= y * (1.0 - 1e-12));
                for dx in [1e-9, 1e-6] {
                    if q - dx > 0.0 {
                        prop_assert!(m.cdf(q - dx) < y);
                    }
                }
            }
        }

        #[test]
        fn fourier_is_linear(a in atomic_strategy(), b in atomic_strategy(), lambda in 0.01f64..0.99) {
            let m = mixture(&[(lambda, &a), (1.0 - lambda, &b)]).unwrap();
            let (f, fa, fb) = (m.fourier(16), a.fourier(16), b.fourier(16));
            for k in 0..=16 {
                let want_a = lambda * fa.alpha()[k] + (1.0 - lambda) * fb.alpha()[k];
                let want_b = lambda * fa.beta()[k] + (1.0 - lambda) * fb.beta()[k];
                prop_assert!((f.alpha()[k] - want_a).abs() <= 1e-14 * (1.0 + want_a.abs()) * 10.0);
                prop_assert!((f.beta()[k] - want_b).abs() <= 1e-14 * (1.0 + want_b.abs()) * 10.0);
            }
        }

        #[test]
        fn product_rule(a in atomic_strategy(), b in atomic_strategy()) {
            let c = circ_convolve(&a, &b);
            let (fc, fa, fb) = (c.fourier(12), a.fourier(12), b.fourier(12));
            // brute-force double loop for the unnormalised coefficients
            for k in 1..=12 {
                let kf = k as f64;
                let (mut ba, mut bb) = (0.0, 0.0);
                for x in a.atoms() { for y in b.atoms() {
                    let t = kf * (x.angle.value() + y.angle.value());
                    ba += x.weight * y.weight * t.cos();
                    bb += x.weight * y.weight * t.sin();
                }}
                prop_assert!((fc.alpha()[k] - ba).abs() < 1e-11);
                prop_assert!((fc.beta()[k] - bb).abs() < 1e-11);
                let (xa, xb) = fa.normalized(k);
                let (ya, yb) = fb.normalized(k);
                let (za, zb) = fc.normalized(k);
                prop_assert!((za - (xa * ya - xb * yb)).abs() < 1e-11);
                prop_assert!((zb - (xb * ya + xa * yb)).abs() < 1e-11);
            }
        }

        #[test]
        fn coefficient_moduli_bounded(m in prop_oneof![atomic_strategy(), grid_strategy()]) {
            let f = m.fourier(32);
            for k in 1..=32 {
                prop_assert!(f.modulus(k) <= 1.0 + 1e-12);
            }
        }

        #[test]
        fn rotate_reflect_laws(m in atomic_strategy(), theta in 0.0..TAU) {
            let f = m.fourier(10);
            let r = m.rotate(theta).fourier(10);
            let s = m.reflect().fourier(10);
            for k in 1..=10 {
                let (sn, cs) = (k as f64 * theta).sin_cos();
                let (a, b) = f.normalized(k);
                let (ra, rb) = r.normalized(k);
                prop_assert!((ra - (a * cs - b * sn)).abs() < 1e-12);
                prop_assert!((rb - (a * sn + b * cs)).abs() < 1e-12);
                let (fa, fb) = s.normalized(k);
                prop_assert!((fa - a).abs() < 1e-12 && (fb + b).abs() < 1e-12);
            }
        }
    }
}
