mod args;

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccs_core::empirical::{self, AngleSampler};
use ccs_core::io::{self, fmt_f64, RejectionRow};
use ccs_core::ops::{self, StableKind};
use ccs_core::randgen::{self, FixedAreaOutcome, TrigDensity};
use ccs_core::rng::stream;
use ccs_core::{boundary, chirotope, CircleMeasure, Error};
use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::*;

const EXIT_VALIDATION: u8 = 2;
const EXIT_USAGE: u8 = 64;

enum Failure {
    Core(Error),
    Io { path: PathBuf, err: std::io::Error },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|err| Failure::Io {
        path: path.to_path_buf(),
        err,
    })
}

fn write_file(path: &Path, text: &str) -> Run<()> {
    fs::write(path, text).map_err(|err| Failure::Io {
        path: path.to_path_buf(),
        err,
    })
}

fn emit(out: &Output, text: &str) -> Run<()> {
    match &out.out {
        Some(p) => write_file(p, text),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).map_err(|err| Failure::Io {
                path: PathBuf::from("<stdout>"),
                err,
            })
        }
    }
}

// Reader errors carry the file name in front of the field path.
fn in_file(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { path: p, message } => Error::Parse {
            path: format!("{}: {p}", path.display()),
            message,
        },
        other => other,
    }
}

fn load_measure(path: &Path) -> Run<CircleMeasure> {
    Ok(io::measure_from_json(&read(path)?).map_err(|e| in_file(path, e))?)
}

fn load_points(path: &Path) -> Run<Vec<[f64; 2]>> {
    Ok(io::points_from_json(&read(path)?).map_err(|e| in_file(path, e))?)
}

fn load_sample(path: &Path) -> Run<empirical::ComplexSample> {
    Ok(io::sample_from_json(&read(path)?).map_err(|e| in_file(path, e))?)
}

// Object from pre-rendered JSON values, keeping 17-digit floats intact.
fn obj(fields: &[(&str, String)]) -> String {
    let body: Vec<String> = fields.iter().map(|(k, v)| format!("\"{k}\":{v}")).collect();
    format!("{{{}}}", body.join(","))
}

fn line(s: String) -> String {
    s + "\n"
}

fn f(x: f64) -> String {
    fmt_f64(x)
}

fn svg_of(b: &boundary::ConvexBoundary) -> String {
    io::boundaries_svg(&[b.closed_polyline()])
}

fn positive(name: &str, v: usize) -> Run<()> {
    if v == 0 {
        return Err(Error::Domain {
            value: 0.0,
            domain: format!("{name} ≥ 1"),
        }
        .into());
    }
    Ok(())
}

fn run_measure(cmd: MeasureCmd) -> Run<()> {
    match cmd {
        MeasureCmd::Fourier { m, k, out } => {
            positive("K", k)?;
            let fc = load_measure(&m.input)?.fourier(k);
            emit(&out, &io::fourier_to_json(&fc))
        }
        MeasureCmd::Check { m, tol, out } => {
            let mu = load_measure(&m.input)?;
            let (c, s) = mu.first_moment();
            let v = obj(&[
                ("mass", f(mu.mass())),
                ("first_moment", format!("[{},{}]", f(c), f(s))),
                ("closed", mu.is_closed(tol).to_string()),
                ("atoms", mu.atoms().len().to_string()),
                ("cells", mu.grid().map_or(0, |g| g.cells()).to_string()),
            ]);
            emit(&out, &line(v))
        }
    }
}

fn run_boundary(cmd: BoundaryCmd) -> Run<()> {
    match cmd {
        BoundaryCmd::Build { m, arc_subdiv, svg, out } => {
            let b = boundary::boundary_from_measure(&load_measure(&m.input)?, arc_subdiv)?;
            if let Some(p) = svg {
                write_file(&p, &svg_of(&b))?;
            }
            emit(&out, &io::vertices_to_json(b.vertices()))
        }
        BoundaryCmd::Area { m, k, arc_subdiv, out } => {
            let mu = load_measure(&m.input)?;
            let b = boundary::boundary_from_measure(&mu, arc_subdiv)?;
            let fourier = boundary::area_fourier(&mu.fourier(k))?;
            let pairs = if mu.is_atomic() { Some(boundary::area_pairs(&mu)?) } else { None };
            let v = obj(&[
                ("fourier", obj(&[("value", f(fourier.value)), ("bound", f(fourier.bound))])),
                ("shoelace", f(boundary::area_shoelace(&b))),
                ("pairs", pairs.map_or("null".to_string(), f)),
                ("perimeter", f(b.perimeter())),
            ]);
            emit(&out, &line(v))
        }
        BoundaryCmd::Svg { m, arc_subdiv, out } => {
            let b = boundary::boundary_from_measure(&load_measure(&m.input)?, arc_subdiv)?;
            emit(&out, &svg_of(&b))
        }
    }
}

fn run_op(cmd: OpCmd) -> Run<()> {
    match cmd {
        OpCmd::Minkowski {
            pair,
            lambda,
            arc_subdiv,
            svg,
            out,
        } => {
            let b = ops::minkowski_ccs(lambda, &load_measure(&pair.a)?, &load_measure(&pair.b)?, arc_subdiv)?;
            if let Some(p) = svg {
                write_file(&p, &svg_of(&b))?;
            }
            emit(&out, &io::vertices_to_json(b.vertices()))
        }
        OpCmd::Mixture { pair, lambda, out } => {
            if !(0.0..=1.0).contains(&lambda) {
                return Err(Error::Domain {
                    value: lambda,
                    domain: "[0, 1]".into(),
                }
                .into());
            }
            let (a, b) = (load_measure(&pair.a)?, load_measure(&pair.b)?);
            let mix = ccs_core::mixture(&[(lambda, &a), (1.0 - lambda, &b)])?;
            emit(&out, &io::measure_to_json(&mix))
        }
        OpCmd::Convolve { pair, out } => {
            let c = ccs_core::circ_convolve(&load_measure(&pair.a)?, &load_measure(&pair.b)?);
            emit(&out, &io::measure_to_json(&c))
        }
        OpCmd::SymMinkowski { m, theta, out } => {
            let s = ops::minkowski_symmetrize(&load_measure(&m.input)?, theta)?;
            emit(&out, &io::measure_to_json(&s))
        }
        OpCmd::SymConvolve { m, out } => {
            let s = ops::convolution_symmetrize(&load_measure(&m.input)?);
            emit(&out, &io::measure_to_json(&s))
        }
        OpCmd::IterateSym { m, k, measure_out, out } => {
            let mut cur = load_measure(&m.input)?;
            let mut steps = Vec::with_capacity(k);
            for j in 1..=k {
                cur = ops::minkowski_symmetrize(&cur, TAU / 2f64.powi(j as i32 - 1))?;
                let d = ops::distance_to_circle(&cur, ops::PARAM_GRID);
                let bound = std::f64::consts::PI / 2f64.powi(j as i32);
                steps.push(obj(&[("k", j.to_string()), ("distance", f(d)), ("bound", f(bound))]));
            }
            if let Some(p) = measure_out {
                write_file(&p, &io::measure_to_json(&cur))?;
            }
            emit(&out, &line(obj(&[("steps", format!("[{}]", steps.join(",")))])))
        }
        OpCmd::StableLimit { m, max_iter, tol, out } => {
            let s = ops::classify_stable_limit(&load_measure(&m.input)?, max_iter, tol);
            let (kind, order) = match s.kind {
                StableKind::Uniform => ("uniform", None),
                StableKind::Dirac => ("dirac", Some(1)),
                StableKind::MGon(m) => ("mgon", Some(m)),
                StableKind::Undecided => ("undecided", None),
            };
            let m = order.map_or("null".to_string(), |m: usize| m.to_string());
            let v = obj(&[("kind", format!("\"{kind}\"")), ("m", m), ("centering", f(s.centering))]);
            emit(&out, &line(v))
        }
    }
}

fn equal_partition(k: usize) -> Vec<f64> {
    (0..=k).map(|j| if j == k { TAU } else { TAU * j as f64 / k as f64 }).collect()
}

fn run_sample(cmd: SampleCmd) -> Run<()> {
    match cmd {
        SampleCmd::Converge {
            m,
            ns,
            replicas,
            seed,
            arc_subdiv,
            out,
        } => {
            positive("replicas", replicas)?;
            let rows = empirical::convergence_experiment(&load_measure(&m.measure)?, &ns, replicas, seed, arc_subdiv)?;
            emit(&out, &io::convergence_csv(&rows))
        }
        SampleCmd::Fdd {
            m,
            intervals,
            partition,
            mc_replicas,
            n,
            seed,
            mc_out,
            out,
        } => {
            let mu = load_measure(&m.measure)?;
            let partition = match partition {
                Some(p) => p,
                None => {
                    positive("intervals", intervals)?;
                    equal_partition(intervals)
                }
            };
            let c = empirical::fdd_covariance(&mu, &partition)?;
            if let Some(r) = mc_replicas {
                let seed = seed.ok_or_else(|| Error::Invalid("--mc-replicas needs --seed".into()))?;
                let path = mc_out.ok_or_else(|| Error::Invalid("--mc-replicas needs --mc-out".into()))?;
                let mc = empirical::fdd_monte_carlo(&mu, &partition, n, r, seed)?;
                write_file(&path, &io::covariance_csv(&mc))?;
            }
            emit(&out, &io::covariance_csv(&c))
        }
        SampleCmd::Curve {
            m,
            n,
            seed,
            points,
            curve_out,
            out,
        } => {
            positive("n", n)?;
            positive("points", points)?;
            let mu = load_measure(&m.measure)?;
            let angles = AngleSampler::new(&mu).draw_n(n, &mut stream(seed, 0));
            let thetas: Vec<f64> = (0..=points).map(|i| TAU * i as f64 / points as f64).collect();
            let w = empirical::fluctuation_process(&mu, &angles, &thetas)?;
            if let Some(p) = curve_out {
                write_file(&p, &io::vertices_to_json(&empirical::empirical_curve(&angles)?))?;
            }
            emit(&out, &io::trace_csv(&thetas, &w))
        }
    }
}

fn run_reorder(cmd: ReorderCmd) -> Run<()> {
    match cmd {
        ReorderCmd::Complex { input, seed, svg, out } => {
            let pts = empirical::reorder_complex(&load_sample(&input)?, &mut stream(seed, 0))?;
            if let Some(p) = svg {
                write_file(&p, &io::boundaries_svg(&[pts.clone()]))?;
            }
            emit(&out, &io::vertices_to_json(&pts))
        }
        ReorderCmd::Polygon { input, seed, svg, out } => {
            let pts = empirical::reorder_polygon(&load_points(&input)?, &mut stream(seed, 0))?;
            if let Some(p) = svg {
                write_file(&p, &io::boundaries_svg(&[pts.clone()]))?;
            }
            emit(&out, &io::vertices_to_json(&pts))
        }
        ReorderCmd::KOperator { input, cells, out } => {
            let m = empirical::k_operator(&load_sample(&input)?, cells)?;
            emit(&out, &io::measure_to_json(&m))
        }
    }
}

fn emit_density(d: &TrigDensity, g: &GenCommon, out: &Output) -> Run<()> {
    let m = randgen::measure_from_density(d, g.cells)?;
    if let Some(p) = &g.svg {
        write_file(p, &svg_of(&boundary::boundary_from_measure(&m, g.arc_subdiv)?))?;
    }
    emit(out, &io::measure_to_json(&m))
}

fn run_generate(cmd: GenerateCmd) -> Run<()> {
    match cmd {
        GenerateCmd::ClosedFirst { g, out } => emit_density(&randgen::gen_closed_first(g.k, g.seed)?, &g, &out),
        GenerateCmd::Sparse { g, out } => emit_density(&randgen::gen_sparse(g.k, g.seed)?, &g, &out),
        GenerateCmd::FixedArea {
            g,
            beta,
            max_rejects,
            count,
            report,
            out,
        } => {
            positive("max-rejects", max_rejects)?;
            positive("count", count as usize)?;
            let outcomes: Vec<(u64, FixedAreaOutcome)> = {
                use rayon::prelude::*;
                (0..count)
                    .into_par_iter()
                    .map(|i| {
                        let s = g.seed.wrapping_add(i);
                        randgen::gen_fixed_area(beta, g.k, s, max_rejects).map(|o| (s, o))
                    })
                    .collect::<ccs_core::Result<_>>()?
            };
            let rows: Vec<RejectionRow> = outcomes
                .iter()
                .map(|(s, o)| RejectionRow {
                    seed: *s,
                    accepted: matches!(o, FixedAreaOutcome::Accepted { .. }),
                    rejects: o.rejects(),
                })
                .collect();
            let csv = io::rejection_csv(&rows);
            if let Some(p) = &report {
                write_file(p, &csv)?;
            }
            match (&outcomes[..], count) {
                ([(_, FixedAreaOutcome::Accepted { density, .. })], 1) => emit_density(density, &g, &out),
                _ if report.is_none() => emit(&out, &csv),
                _ => Ok(()),
            }
        }
    }
}

fn run_chirotope(cmd: ChirotopeCmd) -> Run<()> {
    match cmd {
        ChirotopeCmd::Signs { input, out } => {
            let ps = chirotope::PointSet::new(load_points(&input)?)?;
            let signs = chirotope::chirotope_signs(&ps)?;
            let map: Vec<String> = signs.iter().map(|(t, s)| format!("\"{},{},{}\":{s}", t.0, t.1, t.2)).collect();
            let v = obj(&[
                ("n", ps.len().to_string()),
                ("signs", format!("{{{}}}", map.join(","))),
                ("convex_sequence", chirotope::is_convex_position(&ps)?.to_string()),
                ("convex_hull", chirotope::is_convex_position_hull(&ps)?.to_string()),
            ]);
            emit(&out, &line(v))
        }
        ChirotopeCmd::LaplaceMc {
            lambdas,
            n,
            replicas,
            seed,
            out,
        } => {
            let l = io::lambdas_from_json(&read(&lambdas)?).map_err(|e| in_file(&lambdas, e))?;
            let e = chirotope::mc_laplace(&l, n, replicas, seed)?;
            emit(&out, &line(obj(&[("estimate", f(e.estimate)), ("stderr", f(e.stderr))])))
        }
        ChirotopeCmd::LaplaceN3 { lambda, out } => {
            let v = chirotope::laplace_n3(lambda)?;
            emit(&out, &line(obj(&[("lambda", f(lambda)), ("value", f(v))])))
        }
    }
}

fn run(cli: Cli) -> Run<()> {
    match cli.command {
        Command::Measure(c) => run_measure(c),
        Command::Boundary(c) => run_boundary(c),
        Command::Op(c) => run_op(c),
        Command::Sample(c) => run_sample(c),
        Command::Reorder(c) => run_reorder(c),
        Command::Generate(c) => run_generate(c),
        Command::Chirotope(c) => run_chirotope(c),
    }
}

fn diagnostic(f: &Failure) -> serde_json::Value {
    match f {
        Failure::Core(e) => {
            let mut v = json!({"error": e.kind(), "message": e.to_string()});
            match e {
                Error::Parse { path, message } => {
                    v["path"] = json!(path);
                    v["message"] = json!(message);
                }
                Error::Domain { value, .. } => v["value"] = json!(value),
                Error::NonConvex { index } => v["index"] = json!(index),
                _ => {}
            }
            v
        }
        Failure::Io { path, err } => json!({"error": "io", "path": path.display().to_string(), "message": err.to_string()}),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 || rayon::ThreadPoolBuilder::new().num_threads(t).build_global().is_err() {
            eprintln!("{}", json!({"error": "invalid", "message": format!("cannot start {t} worker threads")}));
            return ExitCode::from(EXIT_VALIDATION);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", diagnostic(&f));
            ExitCode::from(EXIT_VALIDATION)
        }
    }
}

