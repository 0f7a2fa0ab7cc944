//! Random smooth convex curves from nonnegative trigonometric polynomials.
//!
//! A density `p(t) = A_0 + Σ_{n≥1} A_n cos(nt) + B_n sin(nt)` is a
//! probability density of a closed curve when `A_0 = 1/(2π)` and
//! `A_1 = B_1 = 0`. The coefficients `(A_n, B_n)` here are those of the
//! density itself; the Fourier coefficients of the measure are
//! `α_n = π·A_n`, `β_n = π·B_n` and its mass is `2π·A_0`.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};

use rand::Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::measure::{cell_edge, Angle, CircleMeasure, FourierCoeffs};
use crate::rng::{stream, StreamRng};

/// Densities below this are negative.
pub const POSITIVITY_TOL: f64 = 1e-12;
/// Dense grid size of the positivity check.
pub const MIN_SEARCH_GRID: usize = 1 << 16;
const SCREEN_GRIDS: [usize; 2] = [128, 1024];
const MAX_REFINE_DEPTH: usize = 48;
const MAX_SPARSE_ATTEMPTS: u64 = 1 << 16;

/// `D(e^{it}) = Σ_n ρ_n e^{iθ_n} e^{int}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SzegoPolynomial {
    rho: Vec<f64>,
    theta: Vec<Angle>,
}

impl SzegoPolynomial {
    pub fn new(rho: Vec<f64>, theta: Vec<f64>) -> Result<SzegoPolynomial> {
        if rho.is_empty() || rho.len() != theta.len() {
            return Err(Error::invalid("rho and theta must have equal nonzero length"));
        }
        if let Some(i) = rho.iter().position(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::invalid(format!("rho[{i}] must be finite and nonnegative")));
        }
        let theta = theta.into_iter().map(Angle::try_new).collect::<Result<_>>()?;
        Ok(SzegoPolynomial { rho, theta })
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn theta(&self) -> &[Angle] {
        &self.theta
    }

    /// `|D(e^{it})|²`, evaluated directly.
    pub fn eval(&self, t: f64) -> f64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (n, (&r, a)) in self.rho.iter().zip(&self.theta).enumerate() {
            let (s, c) = (a.value() + n as f64 * t).sin_cos();
            re += r * c;
            im += r * s;
        }
        re * re + im * im
    }
}

/// Trigonometric polynomial `a0 + Σ A_n cos(nt) + B_n sin(nt)`,
/// `coeffs[n − 1] = (A_n, B_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigDensity {
    a0: f64,
    coeffs: Vec<(f64, f64)>,
}

/// Lower bound on a trigonometric polynomial and where it was attained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinSearch {
    /// Smallest value seen.
    pub min: f64,
    pub at: f64,
    /// True when the polynomial is certified `≥ −POSITIVITY_TOL` everywhere.
    pub certified: bool,
}

impl TrigDensity {
    pub fn new(a0: f64, coeffs: Vec<(f64, f64)>) -> Result<TrigDensity> {
        if !a0.is_finite() || coeffs.iter().any(|c| !c.0.is_finite() || !c.1.is_finite()) {
            return Err(Error::invalid("density coefficients must be finite"));
        }
        Ok(TrigDensity { a0, coeffs })
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn coeffs(&self) -> &[(f64, f64)] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// `(A_n, B_n)`, zero beyond the degree.
    pub fn coeff(&self, n: usize) -> (f64, f64) {
        if n == 0 {
            (self.a0, 0.0)
        } else {
            self.coeffs.get(n - 1).copied().unwrap_or((0.0, 0.0))
        }
    }

    /// `∫_0^{2π} p = 2π·A_0`.
    pub fn mass(&self) -> f64 {
        TAU * self.a0
    }

    /// Closed-curve condition `|A_1| + |B_1| ≤ tol`.
    pub fn is_closed(&self, tol: f64) -> bool {
        let (a, b) = self.coeff(1);
        a.abs() + b.abs() <= tol
    }

    // Value and derivative by the recurrence z^n = z^{n−1}·e^{it}.
    fn eval_both(&self, t: f64) -> (f64, f64) {
        let (s, c) = t.sin_cos();
        let (mut zr, mut zi) = (1.0, 0.0);
        let (mut v, mut d) = (self.a0, 0.0);
        for (n, &(a, b)) in self.coeffs.iter().enumerate() {
            (zr, zi) = (zr * c - zi * s, zr * s + zi * c);
            let nf = (n + 1) as f64;
            v += a * zr + b * zi;
            d += nf * (b * zr - a * zi);
        }
        (v, d)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_both(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval_both(t).1
    }

    /// `Σ n^p·√(A_n² + B_n²)`: bounds `|p^{(p)}|`.
    fn derivative_bound(&self, p: i32) -> f64 {
        self.coeffs.iter().enumerate().map(|(n, c)| ((n + 1) as f64).powi(p) * c.0.hypot(c.1)).sum()
    }

    /// Lipschitz constant `Σ n·√(A_n² + B_n²)`.
    pub fn lipschitz(&self) -> f64 {
        self.derivative_bound(1)
    }

    /// `p^{(order)}` at `2πj/n + offset`, `j = 0..n`, by one inverse FFT.
    /// Harmonic `k` coincides with `k mod n` on the grid, so any degree is
    /// exact.
    fn grid_values(&self, n: usize, offset: f64, order: u32) -> Vec<f64> {
        thread_local! {
            static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
        }
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        if order == 0 {
            buf[0].re = self.a0;
        }
        for (i, &(a, b)) in self.coeffs.iter().enumerate() {
            let k = (i + 1) as f64;
            let c = Complex::new(a, -b) * Complex::from_polar(1.0, k * offset) * Complex::new(0.0, k).powu(order);
            buf[(i + 1) % n] += c;
        }
        PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Global minimum search: coarse screens, dense grid, then interval
    /// refinement with the bound `p ≥ p(m) − |p'(m)|r − L₂r²/2` on
    /// `[m − r, m + r]`, `L₂ = Σ n²|c_n|`.
    pub fn min_search(&self) -> MinSearch {
        let mut best = MinSearch {
            min: self.a0,
            at: 0.0,
            certified: false,
        };
        let look = |n: usize, best: &mut MinSearch| {
            for (j, v) in self.grid_values(n, 0.0, 0).into_iter().enumerate() {
                if v < best.min {
                    best.min = v;
                    best.at = TAU * j as f64 / n as f64;
                }
            }
        };
        for n in SCREEN_GRIDS {
            look(n, &mut best);
            if best.min < -POSITIVITY_TOL {
                return best;
            }
        }
        look(MIN_SEARCH_GRID, &mut best);
        if best.min < -POSITIVITY_TOL {
            return best;
        }
        let l2 = self.derivative_bound(2);
        let h = TAU / MIN_SEARCH_GRID as f64;
        let mids = self.grid_values(MIN_SEARCH_GRID, 0.5 * h, 0);
        let slopes = self.grid_values(MIN_SEARCH_GRID, 0.5 * h, 1);
        let mut stack: Vec<(f64, f64, usize, Option<(f64, f64)>)> = (0..MIN_SEARCH_GRID)
            .rev()
            .map(|j| (h * (j as f64 + 0.5), 0.5 * h, 0, Some((mids[j], slopes[j]))))
            .collect();
        while let Some((m, r, depth, known)) = stack.pop() {
            let (v, d) = known.unwrap_or_else(|| self.eval_both(m));
            if v < best.min {
                best.min = v;
                best.at = m;
            }
            if v < -POSITIVITY_TOL {
                return best;
            }
            if v - d.abs() * r - 0.5 * l2 * r * r >= -POSITIVITY_TOL {
                continue;
            }
            if depth == MAX_REFINE_DEPTH {
                return best;
            }
            let q = 0.5 * r;
            stack.push((m - q, q, depth + 1, None));
            stack.push((m + q, q, depth + 1, None));
        }
        best.certified = true;
        best
    }

    /// Fourier coefficients of the measure with this density, order
    /// `max(degree, 2)`.
    pub fn to_fourier(&self) -> Result<FourierCoeffs> {
        let order = self.degree().max(2);
        let mut alpha = vec![0.0; order + 1];
        let mut beta = vec![0.0; order + 1];
        alpha[0] = self.mass();
        for k in 1..=order {
            let (a, b) = self.coeff(k);
            alpha[k] = PI * a;
            beta[k] = PI * b;
        }
        FourierCoeffs::new(self.mass(), alpha, beta)
    }
}

/// Coefficients of `|D(e^{it})|²`.
pub fn density_from_szego(p: &SzegoPolynomial) -> TrigDensity {
    let rho = &p.rho;
    let th: Vec<f64> = p.theta.iter().map(|a| a.value()).collect();
    let a0 = rho.iter().map(|r| r * r).sum();
    let coeffs = (1..rho.len())
        .map(|n| {
            let (mut a, mut b) = (0.0, 0.0);
            for k in 0..rho.len() - n {
                let w = 2.0 * rho[k + n] * rho[k];
                if w != 0.0 {
                    let (s, c) = (th[k] - th[k + n]).sin_cos();
                    a += w * c;
                    b += w * s;
                }
            }
            (a, b)
        })
        .collect();
    TrigDensity { a0, coeffs }
}

fn normalize_rho(rho: &mut [f64]) {
    let s: f64 = rho.iter().map(|r| r * r).sum();
    let f = 1.0 / (TAU * s).sqrt();
    for r in rho.iter_mut() {
        *r *= f;
    }
}

/// Draws `ρ_j ~ U[0,1]`, `θ_j ~ U[0,2π)` for `j = 1..=K`, solves for
/// `(ρ_0, θ_0)` so that `A_1 = B_1 = 0`, then rescales to `A_0 = 1/(2π)`.
pub fn closed_first_polynomial(k: usize, seed: u64) -> Result<SzegoPolynomial> {
    if k < 2 {
        return Err(Error::domain(k as f64, "K ≥ 2"));
    }
    let mut rng = stream(seed, 0);
    loop {
        let mut rho = vec![0.0; k + 1];
        let mut theta = vec![0.0; k + 1];
        for j in 1..=k {
            rho[j] = rng.random::<f64>();
            theta[j] = rng.random::<f64>() * TAU;
        }
        if rho[1] == 0.0 {
            continue;
        }
        let (mut sr, mut si) = (0.0, 0.0);
        for j in 1..k {
            let w = rho[j + 1] * rho[j];
            let (s, c) = (theta[j] - theta[j + 1]).sin_cos();
            sr += w * c;
            si += w * s;
        }
        // ρ_0 ρ_1 e^{i(θ_0 − θ_1)} = −S
        rho[0] = sr.hypot(si) / rho[1];
        theta[0] = (theta[1] + (-si).atan2(-sr)).rem_euclid(TAU);
        normalize_rho(&mut rho);
        return SzegoPolynomial::new(rho, theta);
    }
}

pub fn gen_closed_first(k: usize, seed: u64) -> Result<TrigDensity> {
    Ok(density_from_szego(&closed_first_polynomial(k, seed)?))
}

/// `ρ_k² = (1/2π)·r_k·Π_{j<k}(1 − r_j)` for the given breaks; the final
/// entry takes whatever is left so that `Σρ_k² = 1/(2π)`.
pub fn mass_first_from_breaks(r: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = r.iter().position(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::invalid(format!("break r[{i}] outside [0, 1]")));
    }
    let mut out = Vec::with_capacity(r.len() + 1);
    let mut left = 1.0;
    for &x in r {
        let take = left * x;
        out.push((take / TAU).sqrt());
        left -= take;
    }
    out.push((left.max(0.0) / TAU).sqrt());
    Ok(out)
}

/// `K + 1` stick-breaking moduli `ρ_0..ρ_K` with `r_j ~ U[0,1)`.
pub fn gen_mass_first(k: usize, seed: u64) -> Result<Vec<f64>> {
    if k < 1 {
        return Err(Error::domain(k as f64, "K ≥ 1"));
    }
    let mut rng = stream(seed, 0);
    let r: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
    mass_first_from_breaks(&r)
}

// Index set with no two consecutive members: each index is taken with
// probability ½ unless its predecessor was taken.
fn sparse_indices(k: usize, rng: &mut StreamRng) -> Vec<usize> {
    let mut f = Vec::new();
    let mut prev = false;
    for i in 0..=k {
        prev = !prev && rng.random::<bool>();
        if prev {
            f.push(i);
        }
    }
    f
}

/// Sparse Szegő polynomial on indices `0..=K` with no two neighbours, so
/// closure holds for any phases.
pub fn sparse_polynomial(k: usize, seed: u64) -> Result<SzegoPolynomial> {
    if k < 2 {
        return Err(Error::domain(k as f64, "K ≥ 2"));
    }
    for attempt in 0..MAX_SPARSE_ATTEMPTS {
        let mut rng = stream(seed, attempt);
        let f = sparse_indices(k, &mut rng);
        if f.is_empty() {
            continue;
        }
        let breaks: Vec<f64> = (1..f.len()).map(|_| rng.random::<f64>()).collect();
        let masses = mass_first_from_breaks(&breaks)?;
        let mut rho = vec![0.0; f.last().unwrap() + 1];
        let mut theta = vec![0.0; rho.len()];
        for (&i, &r) in f.iter().zip(&masses) {
            rho[i] = r;
            theta[i] = rng.random::<f64>() * TAU;
        }
        return SzegoPolynomial::new(rho, theta);
    }
    Err(Error::invalid("sparse index set stayed empty"))
}

pub fn gen_sparse(k: usize, seed: u64) -> Result<TrigDensity> {
    Ok(density_from_szego(&sparse_polynomial(k, seed)?))
}

/// Largest admissible area deficit parameter, `1/(2π²)`.
pub fn max_beta() -> f64 {
    1.0 / (2.0 * PI * PI)
}

/// Density with `a_0 = 1/(2π)`, `a_1 = b_1 = 0` and harmonics `2..=K+1`
/// satisfying `Σ (a_k² + b_k²)/(k² − 1) = β`; not necessarily nonnegative.
pub fn fixed_area_candidate<R: Rng + ?Sized>(beta: f64, k: usize, rng: &mut R) -> TrigDensity {
    let mut coeffs = vec![(0.0, 0.0); k + 1];
    let mut left = beta;
    for i in 0..k {
        let n = (i + 2) as f64;
        let share = if i + 1 == k { left } else { left * rng.random::<f64>() };
        left -= share;
        let c = (share * (n * n - 1.0)).sqrt();
        let (s, co) = (rng.random::<f64>() * TAU).sin_cos();
        coeffs[i + 1] = (co * c, s * c);
    }
    TrigDensity {
        a0: 1.0 / TAU,
        coeffs,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FixedAreaOutcome {
    Accepted { density: TrigDensity, rejects: usize },
    Exhausted { rejects: usize },
}

impl FixedAreaOutcome {
    pub fn rejects(&self) -> usize {
        match self {
            FixedAreaOutcome::Accepted { rejects, .. } | FixedAreaOutcome::Exhausted { rejects } => *rejects,
        }
    }
}

/// Draws candidates until one is certified nonnegative or `max_rejects`
/// have been rejected.
pub fn gen_fixed_area(beta: f64, k: usize, seed: u64, max_rejects: usize) -> Result<FixedAreaOutcome> {
    if !(0.0..=max_beta()).contains(&beta) {
        return Err(Error::domain(beta, "[0, 1/(2π²)]"));
    }
    if k < 1 {
        return Err(Error::domain(k as f64, "K ≥ 1"));
    }
    let mut rng = stream(seed, 0);
    let mut rejects = 0;
    loop {
        let d = fixed_area_candidate(beta, k, &mut rng);
        if d.min_search().certified {
            return Ok(FixedAreaOutcome::Accepted { density: d, rejects });
        }
        rejects += 1;
        if rejects >= max_rejects {
            return Ok(FixedAreaOutcome::Exhausted { rejects });
        }
    }
}

/// Grid measure on `cells` cells holding the exact integral of the density
/// over each cell.
pub fn measure_from_density(d: &TrigDensity, cells: usize) -> Result<CircleMeasure> {
    if cells == 0 {
        return Err(Error::invalid("cell count must be positive"));
    }
    let s = d.min_search();
    if !s.certified {
        return Err(Error::NegativeDensity { min: s.min, at: s.at });
    }
    let h = TAU / cells as f64;
    let halves: Vec<f64> = (1..=d.degree()).map(|n| (n as f64 * 0.5 * h).sin() / n as f64).collect();
    let masses = (0..cells)
        .map(|j| {
            let (t0, t1) = (cell_edge(j, cells), cell_edge(j + 1, cells));
            let mid = 0.5 * (t0 + t1);
            let mut v = d.a0 * (t1 - t0);
            for (i, &(a, b)) in d.coeffs.iter().enumerate() {
                let (s, c) = ((i + 1) as f64 * mid).sin_cos();
                v += 2.0 * halves[i] * (a * c + b * s);
            }
            v.max(0.0)
        })
        .collect();
    CircleMeasure::from_grid(masses)
}
