//! Ordered decomposition of a measure into jumps (atoms) and arcs (grid
//! cells, split at atoms). Drives CDF, quantile and curve evaluation.

use crate::measure::{cell_edge, sinc, CircleMeasure};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Piece {
    Jump { at: f64, mass: f64 },
    Arc { from: f64, to: f64, mass: f64 },
}

impl Piece {
    pub fn start(&self) -> f64 {
        match *self {
            Piece::Jump { at, .. } => at,
            Piece::Arc { from, .. } => from,
        }
    }

    pub fn mass(&self) -> f64 {
        match *self {
            Piece::Jump { mass, .. } | Piece::Arc { mass, .. } => mass,
        }
    }

    // Displacement of the whole piece along the curve.
    fn displacement(&self) -> [f64; 2] {
        match *self {
            Piece::Jump { at, mass } => scale(mass, at),
            Piece::Arc { from, to, mass } => chord(from, to - from, mass),
        }
    }
}

fn scale(r: f64, angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [r * c, r * s]
}

/// Chord of an arc of constant density starting at direction `from`,
/// turning through `width`, carrying `mass`.
pub(crate) fn chord(from: f64, width: f64, mass: f64) -> [f64; 2] {
    scale(mass * sinc(0.5 * width), from + 0.5 * width)
}

#[derive(Clone, Debug)]
pub(crate) struct PieceIndex {
    pub pieces: Vec<Piece>,
    pub start_mass: Vec<f64>,
    pub start_pos: Vec<[f64; 2]>,
    pub total_mass: f64,
    pub total_pos: [f64; 2],
}

impl PieceIndex {
    pub fn new(m: &CircleMeasure) -> PieceIndex {
        let atoms = m.atoms();
        let mut pieces = Vec::new();
        let mut ai = 0;
        if let Some(g) = m.grid() {
            let cells = g.cells();
            let h = g.width();
            for (j, &w) in g.masses().iter().enumerate() {
                let (a, b) = (cell_edge(j, cells), cell_edge(j + 1, cells));
                let mut cur = a;
                let mut used = 0.0;
                while ai < atoms.len() && (atoms[ai].angle.value() < b || j + 1 == cells) {
                    let t = atoms[ai].angle.value();
                    if w > 0.0 && t > cur {
                        let part = w * (t - cur) / h;
                        pieces.push(Piece::Arc { from: cur, to: t, mass: part });
                        used += part;
                        cur = t;
                    }
                    pieces.push(Piece::Jump { at: t, mass: atoms[ai].weight });
                    ai += 1;
                }
                let rest = w - used;
                if rest > 0.0 && b > cur {
                    pieces.push(Piece::Arc { from: cur, to: b, mass: rest });
                }
            }
        }
        for a in &atoms[ai..] {
            pieces.push(Piece::Jump { at: a.angle.value(), mass: a.weight });
        }
        let mut start_mass = Vec::with_capacity(pieces.len());
        let mut start_pos = Vec::with_capacity(pieces.len());
        let (mut acc, mut pos) = (0.0, [0.0, 0.0]);
        for p in &pieces {
            start_mass.push(acc);
            start_pos.push(pos);
            acc += p.mass();
            let d = p.displacement();
            pos = [pos[0] + d[0], pos[1] + d[1]];
        }
        PieceIndex {
            pieces,
            start_mass,
            start_pos,
            total_mass: acc,
            total_pos: pos,
        }
    }

    // Number of pieces whose start angle is ≤ θ.
    fn count_started(&self, theta: f64) -> usize {
        self.pieces.partition_point(|p| p.start() <= theta)
    }

    pub fn mass_at_angle(&self, theta: f64) -> f64 {
        let n = self.count_started(theta);
        if n == 0 {
            return 0.0;
        }
        let i = n - 1;
        match self.pieces[i] {
            Piece::Jump { mass, .. } => self.start_mass[i] + mass,
            Piece::Arc { from, to, mass } => self.start_mass[i] + mass * ((theta - from) / (to - from)).min(1.0),
        }
    }

    /// `E[1{X ≤ θ} e^{iX}]`.
    pub fn pos_at_angle(&self, theta: f64) -> [f64; 2] {
        let n = self.count_started(theta);
        if n == 0 {
            return [0.0, 0.0];
        }
        let i = n - 1;
        let p = self.pieces[i];
        let d = match p {
            Piece::Jump { .. } => p.displacement(),
            Piece::Arc { from, to, mass } => {
                if theta >= to {
                    p.displacement()
                } else {
                    chord(from, theta - from, mass * (theta - from) / (to - from))
                }
            }
        };
        let s = self.start_pos[i];
        [s[0] + d[0], s[1] + d[1]]
    }

    // First piece whose cumulative end mass reaches y (clamped to the last).
    fn piece_for_mass(&self, y: f64) -> usize {
        self.partition_mass(y).min(self.pieces.len() - 1)
    }

    fn partition_mass(&self, y: f64) -> usize {
        let (mut lo, mut hi) = (0usize, self.pieces.len());
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.start_mass[mid] + self.pieces[mid].mass() < y {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// `inf{x : F(x) ≥ y}`; may return 2π when `y` is the full mass of a
    /// measure whose last piece is an arc ending there.
    pub fn angle_at_mass(&self, y: f64) -> f64 {
        let i = if y <= 0.0 { 0 } else { self.piece_for_mass(y) };
        match self.pieces[i] {
            Piece::Jump { at, .. } => at,
            Piece::Arc { from, to, mass } => {
                let u = (y - self.start_mass[i]).clamp(0.0, mass);
                (from + (to - from) * u / mass).min(to)
            }
        }
    }

    /// Natural parametrisation `Z(t) = ∫_0^t e^{iF^{-1}(u)} du`, `t ∈ [0, mass]`.
    pub fn pos_at_mass(&self, t: f64) -> [f64; 2] {
        if t <= 0.0 {
            return [0.0, 0.0];
        }
        if t >= self.total_mass {
            return self.total_pos;
        }
        let i = self.piece_for_mass(t);
        let u = (t - self.start_mass[i]).clamp(0.0, self.pieces[i].mass());
        let d = match self.pieces[i] {
            Piece::Jump { at, .. } => scale(u, at),
            Piece::Arc { from, to, mass } => chord(from, (to - from) * u / mass, u),
        };
        let s = self.start_pos[i];
        [s[0] + d[0], s[1] + d[1]]
    }
}
