//! File formats: JSON documents for measures, samples, point lists and
//! triple weights; SVG boundary drawings; CSV tables.
//!
//! Floats are written with 17 significant digits, which round-trips every
//! `f64` exactly.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde_json::{Map, Value};

use crate::chirotope::Triple;
use crate::empirical::{ComplexSample, ConvergenceRow};
use crate::error::{Error, Result};
use crate::measure::{CircleMeasure, FourierCoeffs};

/// Relative mismatch allowed between a document's `mass` field and its
/// contents.
pub const MASS_FIELD_TOL: f64 = 1e-9;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn list(xs: impl IntoIterator<Item = f64>) -> String {
    let v: Vec<String> = xs.into_iter().map(fmt_f64).collect();
    format!("[{}]", v.join(","))
}

fn pairs(xs: impl IntoIterator<Item = [f64; 2]>) -> String {
    let v: Vec<String> = xs.into_iter().map(|p| format!("[{},{}]", fmt_f64(p[0]), fmt_f64(p[1]))).collect();
    format!("[{}]", v.join(","))
}

fn parse_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_doc(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| parse_err(format!("line {} column {}", e.line(), e.column()), e.to_string()))
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| parse_err(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| parse_err(path, "expected an array"))
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().filter(|x| x.is_finite()).ok_or_else(|| parse_err(path, "expected a finite number"))
}

fn pair(v: &Value, path: &str) -> Result<[f64; 2]> {
    let a = array(v, path)?;
    if a.len() != 2 {
        return Err(parse_err(path, format!("expected 2 numbers, found {}", a.len())));
    }
    Ok([number(&a[0], &format!("{path}[0]"))?, number(&a[1], &format!("{path}[1]"))?])
}

fn pair_list(v: &Value, path: &str) -> Result<Vec<[f64; 2]>> {
    array(v, path)?.iter().enumerate().map(|(i, p)| pair(p, &format!("{path}[{i}]"))).collect()
}

/// `{"kind", "atoms":[[θ,w],…], "grid":{"cells","masses"}|null, "mass"}`.
pub fn measure_to_json(m: &CircleMeasure) -> String {
    let kind = match (m.atoms().is_empty(), m.grid().is_none()) {
        (_, true) => "atomic",
        (true, false) => "grid",
        (false, false) => "mixed",
    };
    let atoms = pairs(m.atoms().iter().map(|a| [a.angle.value(), a.weight]));
    let grid = match m.grid() {
        Some(g) => format!("{{\"cells\":{},\"masses\":{}}}", g.cells(), list(g.masses().iter().copied())),
        None => "null".to_string(),
    };
    format!("{{\"kind\":\"{kind}\",\"atoms\":{atoms},\"grid\":{grid},\"mass\":{}}}\n", fmt_f64(m.mass()))
}

pub fn measure_from_json(text: &str) -> Result<CircleMeasure> {
    let doc = parse_doc(text)?;
    let obj = object(&doc, "$")?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "kind" | "atoms" | "grid" | "mass") {
            return Err(parse_err(key.as_str(), "unknown field"));
        }
    }
    let mut atoms = Vec::new();
    if let Some(a) = obj.get("atoms") {
        for (i, v) in array(a, "atoms")?.iter().enumerate() {
            let path = format!("atoms[{i}]");
            let [t, w] = pair(v, &path)?;
            if !(0.0..TAU).contains(&t) {
                return Err(parse_err(format!("{path}[0]"), format!("angle {t} outside [0, 2π)")));
            }
            if w < 0.0 {
                return Err(parse_err(format!("{path}[1]"), format!("negative weight {w}")));
            }
            atoms.push((t, w));
        }
    }
    let grid = match obj.get("grid") {
        None | Some(Value::Null) => None,
        Some(g) => {
            let go = object(g, "grid")?;
            let masses_v = go.get("masses").ok_or_else(|| parse_err("grid.masses", "missing field"))?;
            let masses: Vec<f64> = array(masses_v, "grid.masses")?
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    let path = format!("grid.masses[{i}]");
                    let x = number(v, &path)?;
                    if x < 0.0 {
                        return Err(parse_err(path, format!("negative mass {x}")));
                    }
                    Ok(x)
                })
                .collect::<Result<_>>()?;
            if masses.is_empty() {
                return Err(parse_err("grid.masses", "grid needs at least one cell"));
            }
            if let Some(c) = go.get("cells") {
                let c = c.as_u64().ok_or_else(|| parse_err("grid.cells", "expected a positive integer"))?;
                if c as usize != masses.len() {
                    return Err(parse_err("grid.cells", format!("{c} cells declared, {} masses given", masses.len())));
                }
            }
            Some(masses)
        }
    };
    if let Some(k) = obj.get("kind") {
        let k = k.as_str().ok_or_else(|| parse_err("kind", "expected a string"))?;
        let ok = match k {
            "atomic" => grid.is_none(),
            "grid" => atoms.is_empty() && grid.is_some(),
            "mixed" => true,
            _ => return Err(parse_err("kind", format!("unknown kind {k:?}"))),
        };
        if !ok {
            return Err(parse_err("kind", format!("kind {k:?} does not match the atoms and grid given")));
        }
    }
    let m = CircleMeasure::new(&atoms, grid).map_err(|e| parse_err("$", e.to_string()))?;
    if let Some(v) = obj.get("mass") {
        let declared = number(v, "mass")?;
        if (declared - m.mass()).abs() > MASS_FIELD_TOL * declared.abs().max(1.0) {
            return Err(parse_err("mass", format!("declared {declared}, contents sum to {}", m.mass())));
        }
    }
    Ok(m)
}

/// `{"mass", "alpha":[…], "beta":[…]}`, index k holding order k.
pub fn fourier_to_json(fc: &FourierCoeffs) -> String {
    format!(
        "{{\"mass\":{},\"alpha\":{},\"beta\":{}}}\n",
        fmt_f64(fc.mass()),
        list(fc.alpha().iter().copied()),
        list(fc.beta().iter().copied())
    )
}

/// `{"points":[[modulus,argument],…]}`.
pub fn sample_to_json(s: &ComplexSample) -> String {
    format!("{{\"points\":{}}}\n", pairs(s.points().iter().map(|&(r, a)| [r, a.value()])))
}

pub fn sample_from_json(text: &str) -> Result<ComplexSample> {
    let doc = parse_doc(text)?;
    let obj = object(&doc, "$")?;
    let pts = pair_list(obj.get("points").ok_or_else(|| parse_err("points", "missing field"))?, "points")?;
    for (i, p) in pts.iter().enumerate() {
        if p[0] < 0.0 {
            return Err(parse_err(format!("points[{i}][0]"), format!("negative modulus {}", p[0])));
        }
    }
    let pts: Vec<(f64, f64)> = pts.into_iter().map(|p| (p[0], p[1])).collect();
    ComplexSample::new(&pts).map_err(|e| parse_err("points", e.to_string()))
}

/// `{"vertices":[[x,y],…]}`.
pub fn vertices_to_json(v: &[[f64; 2]]) -> String {
    format!("{{\"vertices\":{}}}\n", pairs(v.iter().copied()))
}

/// Accepts `[[x,y],…]` or an object with a `vertices` or `points` array.
pub fn points_from_json(text: &str) -> Result<Vec<[f64; 2]>> {
    let doc = parse_doc(text)?;
    match &doc {
        Value::Array(_) => pair_list(&doc, "$"),
        Value::Object(o) => {
            for key in ["vertices", "points"] {
                if let Some(v) = o.get(key) {
                    return pair_list(v, key);
                }
            }
            Err(parse_err("$", "expected a \"vertices\" or \"points\" array"))
        }
        _ => Err(parse_err("$", "expected an array of [x,y] pairs")),
    }
}

/// `{"i,j,k": λ, …}` with `i < j < k`.
pub fn lambdas_from_json(text: &str) -> Result<BTreeMap<Triple, f64>> {
    let doc = parse_doc(text)?;
    let mut out = BTreeMap::new();
    for (key, v) in object(&doc, "$")? {
        let idx: Vec<usize> = key
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(key.as_str(), "key must be three comma-separated indices"))?;
        if idx.len() != 3 || !(idx[0] < idx[1] && idx[1] < idx[2]) {
            return Err(parse_err(key.as_str(), "key must be an increasing triple i<j<k"));
        }
        out.insert((idx[0], idx[1], idx[2]), number(v, key)?);
    }
    Ok(out)
}

pub fn lambdas_to_json(l: &BTreeMap<Triple, f64>) -> String {
    let v: Vec<String> = l.iter().map(|(t, x)| format!("\"{},{},{}\":{}", t.0, t.1, t.2, fmt_f64(*x))).collect();
    format!("{{{}}}\n", v.join(","))
}

/// One `path` element per closed polyline, y flipped so counterclockwise
/// reads counterclockwise, viewBox fitted with a 5% margin.
pub fn boundaries_svg(curves: &[Vec<[f64; 2]>]) -> String {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in curves.iter().flatten() {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    if !lo[0].is_finite() {
        lo = [0.0; 2];
        hi = [0.0; 2];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
    let pad = 0.05 * span;
    let (x0, y0) = (lo[0] - pad, 0.0 - hi[1] - pad);
    let (w, h) = (hi[0] - lo[0] + 2.0 * pad, hi[1] - lo[1] + 2.0 * pad);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">",
        fmt_f64(x0),
        fmt_f64(y0),
        fmt_f64(w),
        fmt_f64(h)
    );
    for c in curves {
        let mut d = String::new();
        for (i, p) in c.iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, fmt_f64(p[0]), fmt_f64(0.0 - p[1]));
        }
        d.push('Z');
        let _ = writeln!(s, "<path d=\"{d}\" fill=\"none\" stroke=\"black\" stroke-width=\"0.002\"/>");
    }
    s.push_str("</svg>\n");
    s
}

pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("n,replica,d_hausdorff\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.n, r.replica, fmt_f64(r.d_hausdorff));
    }
    s
}

pub fn trace_csv(thetas: &[f64], values: &[[f64; 2]]) -> String {
    let mut s = String::from("theta,re,im\n");
    for (t, v) in thetas.iter().zip(values) {
        let _ = writeln!(s, "{},{},{}", fmt_f64(*t), fmt_f64(v[0]), fmt_f64(v[1]));
    }
    s
}

pub fn covariance_csv(c: &DMatrix<f64>) -> String {
    let mut s = String::from("i,j,cov\n");
    for i in 0..c.nrows() {
        for j in 0..c.ncols() {
            let _ = writeln!(s, "{i},{j},{}", fmt_f64(c[(i, j)]));
        }
    }
    s
}

/// One generator attempt per row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RejectionRow {
    pub seed: u64,
    pub accepted: bool,
    pub rejects: usize,
}

pub fn rejection_csv(rows: &[RejectionRow]) -> String {
    let mut s = String::from("seed,accepted,rejects\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{}", r.seed, r.accepted, r.rejects);
    }
    s
}
