//! Subcommand orchestration. Every run loads and validates the problem
//! file, dispatches to the matching library operation, and emits one
//! report. Exit code 0 means a converged (or purely structural) run, 2 a
//! solve that hit its round limit, 1 any error.

use std::path::{Path, PathBuf};

use condfix_core::l0_linalg::norm;
use condfix_core::labeling::parity_audit;
use condfix_core::oracle::{grid_fixed_point, GridSpec};
use condfix_core::simplex::m_fold_subdivide;
use condfix_core::solver::{project, solve_convex_fixed_point, solve_simplex_fixed_point};
use condfix_core::{
    ConditionalSimplex, LabeledVertexSet, RandomPoint, SolverConfig, SubdivisionCell,
};

use crate::problem::{self, Problem};
use crate::report::{
    self, CellOut, IvtReport, LabelReport, LabeledVertexOut, OracleOut, ProjectReport,
    SolveReport, SubdivideReport,
};

pub struct CommonFlags {
    pub output: Option<PathBuf>,
    pub tol: Option<f64>,
    pub max_rounds: Option<usize>,
    pub cell_budget: Option<usize>,
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_MAX_ROUNDS: i32 = 2;

fn emit(output: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load(path: &Path, flags: &CommonFlags) -> Result<Problem, String> {
    let mut p = problem::load(path).map_err(|e| e.to_string())?;
    if let Some(tol) = flags.tol {
        p.config.tol_residual = tol;
    }
    if let Some(mr) = flags.max_rounds {
        p.config.max_rounds = mr;
    }
    if let Some(cb) = flags.cell_budget {
        p.config.cell_budget = cb;
    }
    validate_config(&p.config)?;
    Ok(p)
}

fn validate_config(cfg: &SolverConfig) -> Result<(), String> {
    if !(cfg.tol_residual > 0.0) || !(cfg.tol_diam > 0.0) {
        return Err("config: tolerances must be positive".to_string());
    }
    if cfg.max_rounds == 0 {
        return Err("config: max_rounds must be at least 1".to_string());
    }
    Ok(())
}

/// The simplex a structural subcommand works on; ball and box geometries
/// have no canonical subdivision.
fn base_simplex(p: &Problem, what: &str) -> Result<ConditionalSimplex, String> {
    match p.geometry.solve_simplex().map_err(|e| e.to_string())? {
        Some(s) => Ok(s),
        None => Err(format!("{what} requires simplex or interval geometry")),
    }
}

/// Distinct subdivision vertices in first-seen cell order, keyed by exact
/// bits; shared faces are computed bit-identically upstream.
fn distinct_vertices(cells: &[SubdivisionCell]) -> Vec<RandomPoint> {
    let mut seen: std::collections::BTreeMap<Vec<u64>, ()> = Default::default();
    let mut out = Vec::new();
    for cell in cells {
        for v in &cell.vertices {
            let key: Vec<u64> = v.values().iter().map(|x| x.to_bits()).collect();
            if seen.insert(key, ()).is_none() {
                out.push(v.clone());
            }
        }
    }
    out
}

pub fn solve(
    path: &Path,
    flags: &CommonFlags,
    oracle: Option<&str>,
    trace: Option<&Path>,
) -> Result<i32, String> {
    let p = load(path, flags)?;
    let (result, geometry) = match p.geometry.solve_simplex().map_err(|e| e.to_string())? {
        Some(s) => {
            let r = solve_simplex_fixed_point(&p.function, &s, &p.config)
                .map_err(|e| format!("solve: {e}"))?;
            (r, p.geometry.kind())
        }
        None => {
            let body = p.geometry.convex_body().expect("non-simplex geometry is a body");
            let r = solve_convex_fixed_point(&p.function, &body, &p.config)
                .map_err(|e| format!("solve: {e}"))?;
            (r, p.geometry.kind())
        }
    };

    let oracle_block = match oracle {
        None => None,
        Some(spec) => {
            let resolution = parse_oracle(spec)?;
            let s = base_simplex(&p, "--oracle")?;
            let g = GridSpec { resolution, point_budget: p.config.cell_budget };
            let gp = grid_fixed_point(&p.function, &s, &g)
                .map_err(|e| format!("--oracle: {e}"))?;
            let dist = norm(&result.point.sub(&gp).map_err(|e| format!("--oracle: {e}"))?);
            Some(OracleOut {
                kind: "grid",
                resolution,
                point: report::point_rows(&gp),
                distance: report::scalar_values(&dist),
            })
        }
    };

    if let Some(tp) = trace {
        std::fs::write(tp, report::trace_csv(&result.diam_trace))
            .map_err(|e| format!("{}: {e}", tp.display()))?;
    }
    let rep = SolveReport::new(&p.name, geometry, &result, oracle_block);
    emit(&flags.output, &report::to_json(&rep))?;
    Ok(if result.converged { EXIT_OK } else { EXIT_MAX_ROUNDS })
}

fn parse_oracle(spec: &str) -> Result<usize, String> {
    let rest = spec
        .strip_prefix("grid:")
        .ok_or_else(|| format!("--oracle: expected `grid:<resolution>`, got `{spec}`"))?;
    let resolution: usize = rest
        .parse()
        .map_err(|_| format!("--oracle: `{rest}` is not a resolution"))?;
    if resolution < 2 {
        return Err("--oracle: resolution must be at least 2".to_string());
    }
    Ok(resolution)
}

pub fn ivt(path: &Path, flags: &CommonFlags) -> Result<i32, String> {
    let p = load(path, flags)?;
    let (lo, hi) = match &p.geometry {
        problem::Geometry::Interval { lo, hi } => (lo.clone(), hi.clone()),
        _ => return Err("ivt requires interval geometry".to_string()),
    };
    let target = p
        .target
        .clone()
        .ok_or_else(|| "ivt requires a `target` in the problem file".to_string())?;
    let r = condfix_core::solver::ivt_solve(&p.function, &lo, &hi, &target, &p.config)
        .map_err(|e| format!("ivt: {e}"))?;
    let rep = IvtReport::new(&p.name, &r, &target);
    emit(&flags.output, &report::to_json(&rep))?;
    Ok(if r.converged { EXIT_OK } else { EXIT_MAX_ROUNDS })
}

pub fn subdivide(path: &Path, flags: &CommonFlags, depth: usize) -> Result<i32, String> {
    let p = load(path, flags)?;
    let s = base_simplex(&p, "subdivide")?;
    let cells = m_fold_subdivide(&s, depth, p.config.cell_budget)
        .map_err(|e| format!("subdivide: {e}"))?;
    let out: Vec<CellOut> = cells
        .iter()
        .map(|c| CellOut {
            path: c.path.clone(),
            vertices: c.vertices.iter().map(report::point_rows).collect(),
        })
        .collect();
    let rep = SubdivideReport {
        problem: p.name.clone(),
        mode: "subdivide",
        depth,
        cell_count: out.len(),
        cells: out,
    };
    emit(&flags.output, &report::to_json(&rep))?;
    Ok(EXIT_OK)
}

pub fn label(path: &Path, flags: &CommonFlags, depth: usize) -> Result<i32, String> {
    let p = load(path, flags)?;
    let s = base_simplex(&p, "label")?;
    let cells = m_fold_subdivide(&s, depth, p.config.cell_budget)
        .map_err(|e| format!("label: {e}"))?;
    let points = distinct_vertices(&cells);
    let lvs = LabeledVertexSet::canonical(&p.function, s, points)
        .map_err(|e| format!("label: {e}"))?;
    let vertices: Vec<LabeledVertexOut> = lvs
        .vertices()
        .iter()
        .zip(lvs.labels())
        .map(|(v, f)| LabeledVertexOut {
            point: report::point_rows(v),
            labels: f.labels().to_vec(),
        })
        .collect();
    let rep = LabelReport {
        problem: p.name.clone(),
        mode: "label",
        depth,
        vertex_count: vertices.len(),
        vertices,
    };
    emit(&flags.output, &report::to_json(&rep))?;
    Ok(EXIT_OK)
}

pub fn audit_parity(path: &Path, flags: &CommonFlags, depth: usize) -> Result<i32, String> {
    let p = load(path, flags)?;
    let s = base_simplex(&p, "audit-parity")?;
    let cells = m_fold_subdivide(&s, depth, p.config.cell_budget)
        .map_err(|e| format!("audit-parity: {e}"))?;
    let points = distinct_vertices(&cells);
    let lvs = LabeledVertexSet::canonical(&p.function, s, points)
        .map_err(|e| format!("audit-parity: {e}"))?;
    let counts = parity_audit(&cells, &lvs).map_err(|e| format!("audit-parity: {e}"))?;
    emit(&flags.output, &report::parity_csv(&counts))?;
    Ok(EXIT_OK)
}

pub fn project_point(path: &Path, flags: &CommonFlags) -> Result<i32, String> {
    let p = load(path, flags)?;
    let x = p
        .point
        .clone()
        .ok_or_else(|| "project requires a `point` in the problem file".to_string())?;
    let body = match &p.geometry {
        problem::Geometry::Interval { lo, hi } => condfix_core::ConvexBody::Box {
            lower: RandomPoint::from_scalar(lo),
            upper: RandomPoint::from_scalar(hi),
        },
        other => other.convex_body().expect("ball, box, and simplex are bodies"),
    };
    let proj = project(&body, &x).map_err(|e| format!("project: {e}"))?;
    let dist = norm(&x.sub(&proj).map_err(|e| format!("project: {e}"))?);
    let rep = ProjectReport {
        problem: p.name.clone(),
        mode: "project",
        geometry: p.geometry.kind(),
        point: report::point_rows(&x),
        projection: report::point_rows(&proj),
        distance: report::scalar_values(&dist),
    };
    emit(&flags.output, &report::to_json(&rep))?;
    Ok(EXIT_OK)
}
