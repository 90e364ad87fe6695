use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use annulab_core::cover::{CoverPoint, LiftedMap};
use annulab_core::manifolds::{
    detect_intersections, grow_manifold, lambda_rotation_interval, rasterize_periodic, write_pgm, write_svg, Branch,
    ManifoldArc, RasterGrid, Stability, Window,
};
use annulab_core::orbits::{
    birkhoff_orbit_billiard, find_periodic_newton, poincare_birkhoff_audit, reduced_rationals, refine_periodic_point,
    AuditSettings, NewtonSettings, PeriodicOrbit,
};
use annulab_core::rotation::{
    mean_translation, rotation_interval, rotation_number, translation_number, QuadratureGrid,
};
use annulab_core::systems::{
    billiard_map, billiard_measure_check, parse_table, standard_map, BilliardMap, RigidRotation, StandardMap,
    StandardMapParams,
};
use annulab_core::{exec, Error};
use serde_json::{json, Value};

use crate::config::{
    parse_grid, parse_pair, parse_window, BranchArg, CommandKind, ConfigError, DensityKind, Params, StabilityArg,
    SystemKind,
};

const CIRCLE_TABLE: &str = include_str!("../tables/circle.tbl");
const OVAL_TABLE: &str = include_str!("../tables/oval.tbl");

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(msg) => Failure::Config(msg),
            other => Failure::Numerical(other),
        }
    }
}

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

pub enum System {
    Standard(StandardMap),
    Billiard(BilliardMap),
    Rigid(RigidRotation),
}

impl System {
    pub fn map(&self) -> &dyn LiftedMap {
        match self {
            System::Standard(m) => m,
            System::Billiard(m) => m,
            System::Rigid(m) => m,
        }
    }

    fn billiard(&self) -> Option<&BilliardMap> {
        match self {
            System::Billiard(b) => Some(b),
            _ => None,
        }
    }
}

/// Table text from a file, falling back to the bundled tables by file stem.
fn table_text(path: &Path) -> Result<String, Failure> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(text),
        Err(e) => match path.file_stem().and_then(|s| s.to_str()) {
            Some("circle") => Ok(CIRCLE_TABLE.to_string()),
            Some("oval") => Ok(OVAL_TABLE.to_string()),
            _ => Err(config(format!("cannot read table {}: {e}", path.display()))),
        },
    }
}

pub fn build_system(p: &Params) -> Result<System, Failure> {
    match p.system {
        Some(SystemKind::StandardMap) => {
            let k = p.k.ok_or_else(|| config("standard-map needs 'k'"))?;
            Ok(System::Standard(standard_map(StandardMapParams::new(k)?)))
        }
        Some(SystemKind::RigidRotation) => {
            let alpha = p.alpha.ok_or_else(|| config("rigid-rotation needs 'alpha'"))?;
            Ok(System::Rigid(RigidRotation::new(alpha)?))
        }
        Some(SystemKind::Billiard) => {
            let path = p.table.as_ref().ok_or_else(|| config("billiard needs 'table'"))?;
            let spec = parse_table(&table_text(path)?)?;
            Ok(System::Billiard(billiard_map(spec.build()?)))
        }
        None => Err(config("missing 'system'")),
    }
}

pub struct Outcome {
    pub results: Value,
    pub diagnostics: Value,
    /// Image files to write next to the JSON report: (extension, bytes).
    pub images: Vec<(&'static str, Vec<u8>)>,
}

fn outcome(results: Value, diagnostics: Value) -> Outcome {
    Outcome { results, diagnostics, images: Vec::new() }
}

fn point(m: &dyn LiftedMap, x: f64, y: f64) -> Result<CoverPoint, Failure> {
    let w = if m.phase_space() == annulab_core::cover::PhaseSpace::Annulus {
        CoverPoint::on_annulus(x, y)?
    } else {
        CoverPoint::new(x, y)?
    };
    Ok(w)
}

fn y_range(p: &Params, lo: f64, hi: f64) -> Result<(f64, f64), Failure> {
    let (lo, hi) = (p.y_lo.unwrap_or(lo), p.y_hi.unwrap_or(hi));
    if !(hi > lo) {
        return Err(config("'y-lo' must be below 'y-hi'"));
    }
    Ok((lo, hi))
}

pub fn run(command: CommandKind, p: &Params) -> Result<Outcome, Failure> {
    let system = build_system(p)?;
    let m = system.map();
    let seed = p.seed.unwrap_or(0);
    match command {
        CommandKind::Rot => {
            let x = p.x.ok_or_else(|| config("rot needs 'x'"))?;
            let y = p.y.ok_or_else(|| config("rot needs 'y'"))?;
            let est = translation_number(m, point(m, x, y)?, p.n.unwrap_or(100_000), p.tol.unwrap_or(1e-6))?;
            let rho = rotation_number(&est).ok();
            Ok(outcome(
                json!({ "translation_number": est, "rotation_number": rho }),
                json!({ "converged": est.converged }),
            ))
        }
        CommandKind::MeanRot => {
            let default = if system.billiard().is_some() { DensityKind::Birkhoff } else { DensityKind::Lebesgue };
            let density = p.density.unwrap_or(default);
            let (lo, hi) = y_range(p, 0.0, 1.0)?;
            let grid = QuadratureGrid { nx: p.nx.unwrap_or(256), ny: p.ny.unwrap_or(256), y_lo: lo, y_hi: hi };
            let tau = match density {
                DensityKind::Lebesgue => mean_translation(m, grid, |_| 1.0 / (hi - lo))?,
                DensityKind::Birkhoff => {
                    let norm = 1.0 / grid.mass(|z| (PI * z.y).sin());
                    mean_translation(m, grid, move |z| norm * (PI * z.y).sin())?
                }
            };
            Ok(outcome(json!({ "mean_translation": tau, "density": density, "grid": grid }), json!({})))
        }
        CommandKind::Interval => interval(m, p),
        CommandKind::Orbit => {
            let (pp, q) =
                (p.p.ok_or_else(|| config("orbit needs 'p'"))?, p.q.ok_or_else(|| config("orbit needs 'q'"))?);
            let (lo, hi) = y_range(p, 0.0, 1.0)?;
            let report =
                find_periodic_newton(m, pp, q, &NewtonSettings::new(p.nx.unwrap_or(64), p.ny.unwrap_or(64), lo, hi))?;
            Ok(outcome(
                json!({ "orbits": report.orbits, "degenerate": report.degenerate }),
                json!({ "newton": report.diagnostics, "degeneracy_flagged": report.degeneracy_flagged() }),
            ))
        }
        CommandKind::AuditPb => {
            let (lo, hi) = y_range(p, 0.0, 1.0)?;
            let settings = AuditSettings {
                newton: NewtonSettings::new(p.nx.unwrap_or(16), p.ny.unwrap_or(16), lo, hi),
                restarts: p.restarts.unwrap_or(4),
                seed,
            };
            let bounds = (p.lo.unwrap_or(0.0), p.hi.unwrap_or(1.0));
            let report = poincare_birkhoff_audit(m, system.billiard(), bounds, p.qmax.unwrap_or(5), &settings)?;
            let failures = report.failures.len();
            Ok(outcome(json!(report), json!({ "rationals": report.entries.len(), "failures": failures })))
        }
        CommandKind::BilliardOrbit => {
            let b = system.billiard().ok_or_else(|| config("billiard-orbit needs system 'billiard'"))?;
            let (pp, q) = (
                p.p.ok_or_else(|| config("billiard-orbit needs 'p'"))?,
                p.q.ok_or_else(|| config("billiard-orbit needs 'q'"))?,
            );
            let orbit = birkhoff_orbit_billiard(b, pp, q, p.restarts.unwrap_or(8), seed)?;
            Ok(outcome(json!(orbit), json!({ "verified": orbit.orbit.verified() })))
        }
        CommandKind::Manifold => {
            let anchor = anchor(m, p)?;
            let arcs = grow_arcs(m, &anchor, p, p.stability.unwrap_or(StabilityArg::Unstable))?;
            let mut out = outcome(json!({ "anchor": anchor, "arcs": arcs }), arc_diagnostics(&arcs));
            if p.output.is_some() {
                let (w, h) = parse_grid(p.grid.as_deref().unwrap_or("800x400"))?;
                let mut svg = Vec::new();
                write_svg(&arcs, window(p)?, w, h, &mut svg).map_err(|e| config(e.to_string()))?;
                out.images.push(("svg", svg));
            }
            Ok(out)
        }
        CommandKind::Raster => {
            let anchor = anchor(m, p)?;
            let arcs = grow_arcs(m, &anchor, p, p.stability.unwrap_or(StabilityArg::Unstable))?;
            let (w, h) = parse_grid(p.grid.as_deref().unwrap_or("800x400"))?;
            let win = window(p)?;
            let raster = rasterize_periodic(&arcs, RasterGrid::new(w, h)?, win, p.y_period);
            let mut out = outcome(
                json!({ "anchor": anchor, "raster": raster, "occupied": raster.count() }),
                arc_diagnostics(&arcs),
            );
            if p.output.is_some() {
                let mut pgm = Vec::new();
                write_pgm(&raster, &mut pgm).map_err(|e| config(e.to_string()))?;
                let mut svg = Vec::new();
                write_svg(&arcs, win, w, h, &mut svg).map_err(|e| config(e.to_string()))?;
                out.images.push(("pgm", pgm));
                out.images.push(("svg", svg));
            }
            Ok(out)
        }
        CommandKind::Intersect => {
            let anchor = anchor(m, p)?;
            let branch = match p.branch.unwrap_or(BranchArg::Plus) {
                BranchArg::Minus => Branch::Minus,
                _ => Branch::Plus,
            };
            let budget = p.budget.unwrap_or(30.0);
            let tol = p.refine_tol.unwrap_or(1e-3);
            let kinds = [Stability::Unstable, Stability::Stable];
            let grown = exec::map_collect(&kinds, |&s| grow_manifold(m, &anchor, s, branch, budget, tol));
            let mut grown = grown.into_iter();
            let (unstable, stable) = (grown.next().unwrap()?, grown.next().unwrap()?);
            let hits = detect_intersections(&unstable, &stable, Some(m));
            let approach = exec::map_collect(&hits, |h| forward_approach(m, h.location, &anchor, 50));
            let points: Vec<Value> = hits
                .iter()
                .zip(approach)
                .map(|(h, a)| json!({ "intersection": h, "closest_approach_50": a.ok() }))
                .collect();
            let transverse = hits.iter().filter(|h| h.angle > 1e-3).count();
            Ok(outcome(
                json!({ "anchor": anchor, "count": hits.len(), "transverse": transverse, "points": points }),
                json!({ "unstable_points": unstable.polyline.len(), "stable_points": stable.polyline.len(),
                        "found_at_budget": !hits.is_empty() }),
            ))
        }
        CommandKind::MeasureCheck => {
            let samples = p.samples.unwrap_or(200);
            match system.billiard() {
                Some(b) => {
                    let dev = billiard_measure_check(b, samples, seed)?;
                    Ok(outcome(
                        json!({ "max_deviation": dev, "measure": "sin(theta) ds dtheta" }),
                        json!({ "samples": samples }),
                    ))
                }
                None => {
                    let dev = determinant_deviation(m, samples, seed)?;
                    Ok(outcome(json!({ "max_deviation": dev, "measure": "lebesgue" }), json!({ "samples": samples })))
                }
            }
        }
    }
}

/// Largest `|det DF − 1|` over a low-discrepancy point set.
fn determinant_deviation(m: &dyn LiftedMap, samples: usize, seed: u64) -> Result<f64, Failure> {
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    const PLASTIC: f64 = 0.754_877_666_246_692_7;
    let offset = (seed as f64 * GOLDEN).fract();
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let x = (offset + i as f64 * GOLDEN).fract();
        let y = (offset + i as f64 * PLASTIC).fract();
        worst = worst.max((m.jacobian(CoverPoint { x, y })?.det() - 1.0).abs());
    }
    Ok(worst)
}

fn forward_approach(m: &dyn LiftedMap, start: CoverPoint, anchor: &PeriodicOrbit, steps: usize) -> Result<f64, Error> {
    let mut w = start;
    let mut best = f64::INFINITY;
    for _ in 0..steps {
        w = m.forward(w)?;
        for a in &anchor.points {
            let dx = w.x - a.x;
            best = best.min((dx - dx.round()).hypot(w.y - a.y));
        }
    }
    Ok(best)
}

fn anchor(m: &dyn LiftedMap, p: &Params) -> Result<PeriodicOrbit, Failure> {
    let (x, y): (f64, f64) = parse_pair("fixed-point", p.fixed_point.as_deref().unwrap_or("0,0"))?;
    let (pp, q): (i64, i64) = parse_pair("period", p.period.as_deref().unwrap_or("0,1"))?;
    let q = usize::try_from(q).map_err(|_| config("'period' needs q >= 1"))?;
    Ok(refine_periodic_point(m, CoverPoint::new(x, y)?, pp, q)?)
}

fn window(p: &Params) -> Result<Window, Failure> {
    let [a, b, c, d] = parse_window(p.window.as_deref().unwrap_or("0,2,-0.5,0.5"))?;
    Ok(Window::new(a, b, c, d)?)
}

fn grow_arcs(
    m: &dyn LiftedMap,
    anchor: &PeriodicOrbit,
    p: &Params,
    stability: StabilityArg,
) -> Result<Vec<ManifoldArc>, Failure> {
    let stabilities: &[Stability] = match stability {
        StabilityArg::Stable => &[Stability::Stable],
        StabilityArg::Unstable => &[Stability::Unstable],
        StabilityArg::Both => &[Stability::Unstable, Stability::Stable],
    };
    let branches: &[Branch] = match p.branch.unwrap_or(BranchArg::Plus) {
        BranchArg::Plus => &[Branch::Plus],
        BranchArg::Minus => &[Branch::Minus],
        BranchArg::Both => &[Branch::Plus, Branch::Minus],
    };
    let requests: Vec<(Stability, Branch)> =
        stabilities.iter().flat_map(|&s| branches.iter().map(move |&b| (s, b))).collect();
    let budget = p.budget.unwrap_or(50.0);
    let tol = p.refine_tol.unwrap_or(1e-3);
    let arcs = exec::map_collect(&requests, |&(s, b)| grow_manifold(m, anchor, s, b, budget, tol));
    Ok(arcs.into_iter().collect::<Result<Vec<_>, _>>()?)
}

fn arc_diagnostics(arcs: &[ManifoldArc]) -> Value {
    let per_arc: Vec<Value> = arcs
        .iter()
        .map(|a| {
            json!({ "stability": a.stability, "branch": a.branch, "points": a.polyline.len(),
                    "arclength": a.arclength, "unresolved": a.unresolved, "budget_reached": a.budget_reached })
        })
        .collect();
    json!({ "arcs": per_arc })
}

fn interval(m: &dyn LiftedMap, p: &Params) -> Result<Outcome, Failure> {
    if p.fixed_point.is_some() {
        let anchor = anchor(m, p)?;
        let branch = match p.branch.unwrap_or(BranchArg::Plus) {
            BranchArg::Minus => Branch::Minus,
            _ => Branch::Plus,
        };
        let arc = grow_manifold(
            m,
            &anchor,
            Stability::Unstable,
            branch,
            p.budget.unwrap_or(30.0),
            p.refine_tol.unwrap_or(1e-3),
        )?;
        let iv =
            lambda_rotation_interval(m, &arc, p.samples.unwrap_or(400), p.n.unwrap_or(50_000), p.tol.unwrap_or(1e-3))?;
        let rationals: Vec<(i64, usize)> = reduced_rationals(iv.lo, iv.hi, 5);
        return Ok(outcome(
            json!({ "interval": iv, "rationals_q_le_5": rationals, "anchor": anchor }),
            json!({ "arc_points": arc.polyline.len(), "arclength": arc.arclength }),
        ));
    }
    let (lo, hi) = y_range(p, 0.0, 1.0)?;
    let count = p.seeds.unwrap_or(64);
    const GOLDEN: f64 = 0.618_033_988_749_894_8;
    let seeds: Vec<CoverPoint> = (0..count)
        .map(|i| CoverPoint { x: (i as f64 * GOLDEN).fract(), y: lo + (i as f64 + 0.5) / count as f64 * (hi - lo) })
        .collect();
    let iv = rotation_interval(m, &seeds, p.n.unwrap_or(10_000), p.tol.unwrap_or(1e-6))?;
    Ok(outcome(json!({ "interval": iv }), json!({ "seeds": count })))
}

/// Path of an output artefact: `<prefix>.<ext>`.
pub fn artefact_path(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}
