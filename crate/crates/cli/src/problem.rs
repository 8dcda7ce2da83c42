//! Problem-file ingestion: a self-describing JSON schema, validated into
//! library objects. Scalars and vectors accept either one shared value or
//! one value per atom, so desk-scale files stay short while conditional
//! problems remain expressible.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use condfix_core::{
    ConditionalSimplex, ConvexBody, DomainHint, LocalFunction, ProbSpace, RandomPoint,
    RandomScalar, SolverConfig,
};
use serde::Deserialize;

use crate::expr::{self, Expr, Scope};

/// Schema violation with a human-readable location.
#[derive(Debug)]
pub struct ValidationError {
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

fn invalid<T>(message: impl Into<String>) -> Result<T, ValidationError> {
    Err(ValidationError { message: message.into() })
}

fn core_err(context: &str, e: condfix_core::Error) -> ValidationError {
    ValidationError { message: format!("{context}: {e}") }
}

/// A scalar that is either shared across atoms or given per atom.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScalarSpec {
    Shared(f64),
    PerAtom(Vec<f64>),
}

impl ScalarSpec {
    fn build(&self, space: &Arc<ProbSpace>, what: &str) -> Result<RandomScalar, ValidationError> {
        match self {
            ScalarSpec::Shared(v) => {
                RandomScalar::constant(space.clone(), *v).map_err(|e| core_err(what, e))
            }
            ScalarSpec::PerAtom(vs) => {
                if vs.len() != space.atoms() {
                    return invalid(format!(
                        "{what}: expected {} per-atom values, got {}",
                        space.atoms(),
                        vs.len()
                    ));
                }
                RandomScalar::new(space.clone(), vs.clone()).map_err(|e| core_err(what, e))
            }
        }
    }
}

/// A d-vector that is either shared across atoms or given as one row per
/// atom.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Shared(Vec<f64>),
    PerAtom(Vec<Vec<f64>>),
}

impl VectorSpec {
    fn dim(&self) -> usize {
        match self {
            VectorSpec::Shared(row) => row.len(),
            VectorSpec::PerAtom(rows) => rows.first().map(Vec::len).unwrap_or(0),
        }
    }

    fn build(&self, space: &Arc<ProbSpace>, what: &str) -> Result<RandomPoint, ValidationError> {
        match self {
            VectorSpec::Shared(row) => {
                RandomPoint::constant(space.clone(), row).map_err(|e| core_err(what, e))
            }
            VectorSpec::PerAtom(rows) => {
                if rows.len() != space.atoms() {
                    return invalid(format!(
                        "{what}: expected {} per-atom rows, got {}",
                        space.atoms(),
                        rows.len()
                    ));
                }
                RandomPoint::from_atom_rows(space.clone(), rows).map_err(|e| core_err(what, e))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeometrySpec {
    /// One-dimensional order interval [lo, hi] per atom.
    Interval { lo: ScalarSpec, hi: ScalarSpec },
    /// Conditional simplex given by its vertices.
    Simplex { vertices: Vec<VectorSpec> },
    Ball { center: VectorSpec, radius: ScalarSpec },
    Box { lower: VectorSpec, upper: VectorSpec },
}

/// One output coordinate of the function: one expression shared across
/// atoms, or one expression per atom.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FunctionEntry {
    Shared(String),
    PerAtom(Vec<String>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ConstSpec {
    Shared(f64),
    PerAtom(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigSpec {
    pub tol_residual: Option<f64>,
    pub tol_diam: Option<f64>,
    pub max_rounds: Option<usize>,
    pub cell_budget: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub probs: Vec<f64>,
}

/// The raw problem file, straight from JSON.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default)]
    pub name: Option<String>,
    pub space: SpaceSpec,
    pub geometry: GeometrySpec,
    /// Named per-atom constants usable in every expression.
    #[serde(default)]
    pub constants: BTreeMap<String, ConstSpec>,
    /// One entry per output coordinate f1..fd.
    pub function: Vec<FunctionEntry>,
    /// Target value for the intermediate-value mode.
    #[serde(default)]
    pub target: Option<ScalarSpec>,
    /// Query point for the projection mode.
    #[serde(default)]
    pub point: Option<VectorSpec>,
    #[serde(default)]
    pub config: ConfigSpec,
}

/// Geometry after validation, as library objects.
#[derive(Debug)]
pub enum Geometry {
    Interval { lo: RandomScalar, hi: RandomScalar },
    Simplex(ConditionalSimplex),
    Ball { center: RandomPoint, radius: RandomScalar },
    Box { lower: RandomPoint, upper: RandomPoint },
}

impl Geometry {
    pub fn kind(&self) -> &'static str {
        match self {
            Geometry::Interval { .. } => "interval",
            Geometry::Simplex(_) => "simplex",
            Geometry::Ball { .. } => "ball",
            Geometry::Box { .. } => "box",
        }
    }

    /// The simplex a plain fixed-point solve runs on, when the geometry is
    /// simplicial. Ball and box geometries go through the convex-body
    /// solver instead.
    pub fn solve_simplex(&self) -> Result<Option<ConditionalSimplex>, ValidationError> {
        match self {
            Geometry::Simplex(s) => Ok(Some(s.clone())),
            Geometry::Interval { lo, hi } => {
                let a = RandomPoint::from_scalar(lo);
                let b = RandomPoint::from_scalar(hi);
                ConditionalSimplex::new(vec![a, b])
                    .map(Some)
                    .map_err(|e| core_err("geometry.interval", e))
            }
            _ => Ok(None),
        }
    }

    pub fn convex_body(&self) -> Option<ConvexBody> {
        match self {
            Geometry::Ball { center, radius } => Some(ConvexBody::Ball {
                center: center.clone(),
                radius: radius.clone(),
            }),
            Geometry::Box { lower, upper } => Some(ConvexBody::Box {
                lower: lower.clone(),
                upper: upper.clone(),
            }),
            Geometry::Simplex(s) => Some(ConvexBody::Simplex(s.clone())),
            Geometry::Interval { .. } => None,
        }
    }
}

/// A validated problem, ready to run.
#[derive(Debug)]
pub struct Problem {
    pub name: String,
    #[allow(dead_code)]
    pub space: Arc<ProbSpace>,
    #[allow(dead_code)]
    pub dim: usize,
    pub geometry: Geometry,
    pub function: LocalFunction,
    pub target: Option<RandomScalar>,
    pub point: Option<RandomPoint>,
    pub config: SolverConfig,
}

impl ProblemFile {
    pub fn validate(&self, fallback_name: &str) -> Result<Problem, ValidationError> {
        let space = ProbSpace::new(&self.space.probs)
            .map_err(|e| core_err("space.probs", e))?;
        let atoms = space.atoms();

        let dim = match &self.geometry {
            GeometrySpec::Interval { .. } => 1,
            GeometrySpec::Simplex { vertices } => match vertices.first() {
                Some(v) => v.dim(),
                None => return invalid("geometry.simplex: needs at least one vertex"),
            },
            GeometrySpec::Ball { center, .. } => center.dim(),
            GeometrySpec::Box { lower, .. } => lower.dim(),
        };
        if dim == 0 {
            return invalid("geometry: dimension must be at least 1");
        }

        let geometry = match &self.geometry {
            GeometrySpec::Interval { lo, hi } => {
                let lo = lo.build(&space, "geometry.interval.lo")?;
                let hi = hi.build(&space, "geometry.interval.hi")?;
                for w in 0..atoms {
                    if lo.value(w) >= hi.value(w) {
                        return invalid(format!(
                            "geometry.interval: lo >= hi at atom {w}"
                        ));
                    }
                }
                Geometry::Interval { lo, hi }
            }
            GeometrySpec::Simplex { vertices } => {
                let mut built = Vec::with_capacity(vertices.len());
                for (i, v) in vertices.iter().enumerate() {
                    if v.dim() != dim {
                        return invalid(format!(
                            "geometry.simplex.vertices[{i}]: dimension {} != {dim}",
                            v.dim()
                        ));
                    }
                    built.push(v.build(&space, &format!("geometry.simplex.vertices[{i}]"))?);
                }
                Geometry::Simplex(
                    ConditionalSimplex::new(built)
                        .map_err(|e| core_err("geometry.simplex", e))?,
                )
            }
            GeometrySpec::Ball { center, radius } => Geometry::Ball {
                center: center.build(&space, "geometry.ball.center")?,
                radius: radius.build(&space, "geometry.ball.radius")?,
            },
            GeometrySpec::Box { lower, upper } => Geometry::Box {
                lower: lower.build(&space, "geometry.box.lower")?,
                upper: upper.build(&space, "geometry.box.upper")?,
            },
        };

        // Constant table in name order (BTreeMap iteration is sorted, so
        // the indices are reproducible).
        let mut const_names = Vec::with_capacity(self.constants.len());
        let mut const_table: Vec<Vec<f64>> = Vec::with_capacity(self.constants.len());
        for (name, spec) in &self.constants {
            let values = match spec {
                ConstSpec::Shared(v) => vec![*v; atoms],
                ConstSpec::PerAtom(vs) => {
                    if vs.len() != atoms {
                        return invalid(format!(
                            "constants.{name}: expected {atoms} per-atom values, got {}",
                            vs.len()
                        ));
                    }
                    vs.clone()
                }
            };
            const_names.push(name.clone());
            const_table.push(values);
        }

        if self.function.len() != dim {
            return invalid(format!(
                "function: expected {dim} entries (one per output coordinate), got {}",
                self.function.len()
            ));
        }
        let scope = Scope { dim, constants: &const_names };
        // compiled[j] holds either one shared expression or one per atom.
        let mut compiled: Vec<Vec<Expr>> = Vec::with_capacity(dim);
        let mut shared_flags = Vec::with_capacity(dim);
        for (j, entry) in self.function.iter().enumerate() {
            match entry {
                FunctionEntry::Shared(src) => {
                    let e = expr::parse(src, &scope).map_err(|pe| ValidationError {
                        message: format!("function[{j}]: parse error at {pe}"),
                    })?;
                    compiled.push(vec![e]);
                    shared_flags.push(true);
                }
                FunctionEntry::PerAtom(srcs) => {
                    if srcs.len() != atoms {
                        return invalid(format!(
                            "function[{j}]: expected {atoms} per-atom expressions, got {}",
                            srcs.len()
                        ));
                    }
                    let mut per = Vec::with_capacity(atoms);
                    for (w, src) in srcs.iter().enumerate() {
                        per.push(expr::parse(src, &scope).map_err(|pe| ValidationError {
                            message: format!("function[{j}][{w}]: parse error at {pe}"),
                        })?);
                    }
                    compiled.push(per);
                    shared_flags.push(false);
                }
            }
        }

        let hint = match &geometry {
            Geometry::Interval { .. } => DomainHint::Interval,
            Geometry::Simplex(_) => DomainHint::Simplex,
            Geometry::Ball { .. } => DomainHint::Ball,
            Geometry::Box { .. } => DomainHint::Box,
        };
        let table = const_table;
        let function = LocalFunction::atom_wise(dim, hint, move |atom, x, out| {
            for (j, exprs) in compiled.iter().enumerate() {
                let e = if shared_flags[j] { &exprs[0] } else { &exprs[atom] };
                let v = e.eval(x, &table, atom);
                if !v.is_finite() {
                    return Err(condfix_core::Error::EvalFailed {
                        message: format!(
                            "function[{j}] is not finite at atom {atom} for input {x:?}"
                        ),
                    });
                }
                out[j] = v;
            }
            Ok(())
        });

        let target = match &self.target {
            Some(t) => Some(t.build(&space, "target")?),
            None => None,
        };
        let point = match &self.point {
            Some(p) => {
                if p.dim() != dim {
                    return invalid(format!("point: dimension {} != {dim}", p.dim()));
                }
                Some(p.build(&space, "point")?)
            }
            None => None,
        };

        let defaults = SolverConfig::default();
        let config = SolverConfig {
            tol_residual: self.config.tol_residual.unwrap_or(defaults.tol_residual),
            tol_diam: self.config.tol_diam.unwrap_or(defaults.tol_diam),
            max_rounds: self.config.max_rounds.unwrap_or(defaults.max_rounds),
            cell_budget: self.config.cell_budget.unwrap_or(defaults.cell_budget),
        };

        let name = self
            .name
            .clone()
            .unwrap_or_else(|| fallback_name.to_string());
        Ok(Problem { name, space, dim, geometry, function, target, point, config })
    }
}

/// Reads and validates a problem file. IO and JSON failures are reported
/// as validation errors with the path in the message.
pub fn load(path: &std::path::Path) -> Result<Problem, ValidationError> {
    let text = std::fs::read_to_string(path).map_err(|e| ValidationError {
        message: format!("{}: {e}", path.display()),
    })?;
    let file: ProblemFile = serde_json::from_str(&text).map_err(|e| ValidationError {
        message: format!("{}: {e}", path.display()),
    })?;
    let fallback = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("problem");
    file.validate(fallback)
}
