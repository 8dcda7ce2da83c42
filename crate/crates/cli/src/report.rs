//! Report structures and emission. Reports are JSON with a fixed field
//! order and shortest round-trip float formatting, so rerunning the same
//! problem yields byte-identical output. Traces and parity audits are
//! mirrored as CSV for plotting.

use condfix_core::{Certificate, FixedPointResult, IvtResult, RandomPoint, RandomScalar};
use serde::Serialize;

fn rows(p: &RandomPoint) -> Vec<Vec<f64>> {
    (0..p.atoms()).map(|w| p.atom(w).to_vec()).collect()
}

fn scalars(s: &RandomScalar) -> Vec<f64> {
    s.values().to_vec()
}

#[derive(Serialize)]
pub struct CertificateOut {
    /// Per vertex, one row per atom.
    pub vertices: Vec<Vec<Vec<f64>>>,
    /// Per vertex, one label per atom.
    pub labels: Vec<Vec<usize>>,
}

impl CertificateOut {
    pub fn from_core(c: &Certificate) -> CertificateOut {
        CertificateOut {
            vertices: c.vertices.iter().map(rows).collect(),
            labels: c.labels.iter().map(|f| f.labels().to_vec()).collect(),
        }
    }
}

#[derive(Serialize)]
pub struct OracleOut {
    pub kind: &'static str,
    pub resolution: usize,
    /// The oracle's own answer, one row per atom.
    pub point: Vec<Vec<f64>>,
    /// Per-atom distance between the solver's point and the oracle's.
    pub distance: Vec<f64>,
}

#[derive(Serialize)]
pub struct SolveReport {
    pub problem: String,
    pub mode: &'static str,
    pub geometry: &'static str,
    pub converged: bool,
    pub rounds_used: usize,
    /// One row per atom.
    pub point: Vec<Vec<f64>>,
    /// Per-atom residual at the reported point.
    pub residual: Vec<f64>,
    pub atoms_converged: Vec<bool>,
    pub diam_trace: Vec<f64>,
    pub certificate: CertificateOut,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleOut>,
}

impl SolveReport {
    pub fn new(
        problem: &str,
        geometry: &'static str,
        r: &FixedPointResult,
        oracle: Option<OracleOut>,
    ) -> SolveReport {
        SolveReport {
            problem: problem.to_string(),
            mode: "solve",
            geometry,
            converged: r.converged,
            rounds_used: r.rounds_used,
            point: rows(&r.point),
            residual: scalars(&r.residual),
            atoms_converged: r.atoms_converged.clone(),
            diam_trace: r.diam_trace.clone(),
            certificate: CertificateOut::from_core(&r.certificate),
            oracle,
        }
    }
}

#[derive(Serialize)]
pub struct IvtReport {
    pub problem: String,
    pub mode: &'static str,
    pub converged: bool,
    pub rounds_used: usize,
    /// The located preimage, one value per atom.
    pub value: Vec<f64>,
    /// Per-atom |f(value) - target|.
    pub residual: Vec<f64>,
    pub atoms_converged: Vec<bool>,
    pub target: Vec<f64>,
}

impl IvtReport {
    pub fn new(problem: &str, r: &IvtResult, target: &RandomScalar) -> IvtReport {
        IvtReport {
            problem: problem.to_string(),
            mode: "ivt",
            converged: r.converged,
            rounds_used: r.rounds_used,
            value: scalars(&r.value),
            residual: scalars(&r.residual),
            atoms_converged: r.atoms_converged.clone(),
            target: scalars(target),
        }
    }
}

#[derive(Serialize)]
pub struct CellOut {
    /// Permutation path from the root subdivision to this cell.
    pub path: Vec<Vec<usize>>,
    /// One row per atom, per vertex.
    pub vertices: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize)]
pub struct SubdivideReport {
    pub problem: String,
    pub mode: &'static str,
    pub depth: usize,
    pub cell_count: usize,
    pub cells: Vec<CellOut>,
}

#[derive(Serialize)]
pub struct LabeledVertexOut {
    /// One row per atom.
    pub point: Vec<Vec<f64>>,
    /// One label per atom.
    pub labels: Vec<usize>,
}

#[derive(Serialize)]
pub struct LabelReport {
    pub problem: String,
    pub mode: &'static str,
    pub depth: usize,
    pub vertex_count: usize,
    pub vertices: Vec<LabeledVertexOut>,
}

#[derive(Serialize)]
pub struct ProjectReport {
    pub problem: String,
    pub mode: &'static str,
    pub geometry: &'static str,
    /// The query point, one row per atom.
    pub point: Vec<Vec<f64>>,
    /// Its projection, one row per atom.
    pub projection: Vec<Vec<f64>>,
    /// Per-atom distance moved.
    pub distance: Vec<f64>,
}

pub fn point_rows(p: &RandomPoint) -> Vec<Vec<f64>> {
    rows(p)
}

pub fn scalar_values(s: &RandomScalar) -> Vec<f64> {
    scalars(s)
}

/// Pretty JSON plus trailing newline; field order comes from the struct
/// definitions above and float text from shortest round-trip formatting,
/// which together make the bytes reproducible.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

/// Diameter trace as CSV: round index and traced maximum diameter.
pub fn trace_csv(diam_trace: &[f64]) -> String {
    let mut out = String::from("round,max_diam\n");
    for (i, d) in diam_trace.iter().enumerate() {
        out.push_str(&format!("{i},{d}\n"));
    }
    out
}

/// Parity audit as CSV: per atom, the number of completely labeled cells
/// and whether that count is odd.
pub fn parity_csv(counts: &[usize]) -> String {
    let mut out = String::from("atom,completely_labeled,parity_ok\n");
    for (w, c) in counts.iter().enumerate() {
        out.push_str(&format!("{w},{c},{}\n", c % 2 == 1));
    }
    out
}
