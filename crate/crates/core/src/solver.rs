//! Fixed point engines.
//!
//! The core routine walks a chain of completely labeled cells: subdivide
//! the current simplex barycentrically, label every extremal point in the
//! current simplex's own frame, and recurse into the first completely
//! labeled cell whose labels are all certified by the dominance rule.
//! When an atom only has fallback-labeled winners the crossing has left
//! the current simplex, and that atom's cell is re-anchored: translated
//! after the image of its own barycenter, clipped to the base simplex.
//! Stopping is per atom, so a frozen atom's answer never changes while
//! other atoms keep iterating; this is what makes solver output local,
//! bit for bit.
//!
//! On top of that sit projection onto convex bodies, the fixed point
//! theorem on bounded convex sets (via an enclosing simplex), and a
//! conditional intermediate-value solver on intervals.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::l0_linalg::{affine_coords, coords_for_vertices, dist};
use crate::labeling::{pick_label, LabelField};
use crate::math;
use crate::prob_space::{check_same_space, ProbSpace, RandomPoint, RandomScalar};
use crate::simplex::{factorial, mean_point, permutations, subset_points, ConditionalSimplex};
use crate::tol;
use alloc::sync::Arc;

/// Canonical domain a function promises to accept. Consumed by
/// [`crate::prob_space::check_local`], which needs a concrete region to
/// sample; the solvers pass whatever simplex or body they iterate on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainHint {
    /// Standard corner simplex: all coordinates >= 0, summing to <= 1.
    Simplex,
    /// Closed unit ball.
    Ball,
    /// Unit box [0, 1]^d.
    Box,
    /// Unit interval [0, 1]; requires d = 1.
    Interval,
}

type AtomEval = dyn Fn(usize, &[f64], &mut [f64]) -> Result<()> + Send + Sync;
type PointEval = dyn Fn(&RandomPoint) -> Result<RandomPoint> + Send + Sync;

enum Evaluator {
    AtomWise(Box<AtomEval>),
    Whole(Box<PointEval>),
}

/// A local, continuous map R^d -> R^d over the atoms.
///
/// Atom-wise evaluators are local by construction. Whole-point evaluators
/// are trusted to be local; [`crate::prob_space::check_local`] exists to
/// vet them. Continuity is the caller's obligation.
pub struct LocalFunction {
    dim: usize,
    hint: DomainHint,
    evaluator: Evaluator,
}

impl core::fmt::Debug for LocalFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("LocalFunction")
            .field("dim", &self.dim)
            .field("hint", &self.hint)
            .finish_non_exhaustive()
    }
}

impl LocalFunction {
    /// Builds from a per-atom callback `(atom, input row, output row)`.
    pub fn atom_wise<F>(dim: usize, hint: DomainHint, f: F) -> LocalFunction
    where
        F: Fn(usize, &[f64], &mut [f64]) -> Result<()> + Send + Sync + 'static,
    {
        LocalFunction { dim, hint, evaluator: Evaluator::AtomWise(Box::new(f)) }
    }

    /// Builds from a whole-point callback. The callback must be local;
    /// use [`crate::prob_space::check_local`] to test foreign ones.
    pub fn from_point_map<F>(dim: usize, hint: DomainHint, f: F) -> LocalFunction
    where
        F: Fn(&RandomPoint) -> Result<RandomPoint> + Send + Sync + 'static,
    {
        LocalFunction { dim, hint, evaluator: Evaluator::Whole(Box::new(f)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain_hint(&self) -> DomainHint {
        self.hint
    }

    /// Evaluates at `x`, validating dimensions and finiteness.
    pub fn eval(&self, x: &RandomPoint) -> Result<RandomPoint> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        match &self.evaluator {
            Evaluator::AtomWise(f) => {
                let atoms = x.atoms();
                let mut values = vec![0.0; atoms * self.dim];
                let mut row = vec![0.0; self.dim];
                for atom in 0..atoms {
                    row.fill(0.0);
                    f(atom, x.atom(atom), &mut row)?;
                    for (j, &v) in row.iter().enumerate() {
                        if !v.is_finite() {
                            return Err(Error::NonFiniteValue { atom });
                        }
                        values[atom * self.dim + j] = v;
                    }
                }
                RandomPoint::new(x.space().clone(), self.dim, values)
            }
            Evaluator::Whole(f) => {
                let out = f(x)?;
                check_same_space(x.space(), out.space())?;
                if out.dim() != self.dim {
                    return Err(Error::DimensionMismatch { expected: self.dim, got: out.dim() });
                }
                Ok(out)
            }
        }
    }

    /// Checks that `x` lies in the canonical domain named by the hint,
    /// within [`tol::BODY_TOL`].
    pub fn check_domain(&self, x: &RandomPoint) -> Result<()> {
        if x.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        if self.hint == DomainHint::Interval && self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.dim });
        }
        let t = tol::BODY_TOL;
        for atom in 0..x.atoms() {
            let row = x.atom(atom);
            let ok = match self.hint {
                DomainHint::Interval | DomainHint::Box => {
                    row.iter().all(|&v| (-t..=1.0 + t).contains(&v))
                }
                DomainHint::Ball => math::sqrt(crate::l0_linalg::dot(row, row)) <= 1.0 + t,
                DomainHint::Simplex => {
                    row.iter().all(|&v| v >= -t) && row.iter().sum::<f64>() <= 1.0 + t
                }
            };
            if !ok {
                return Err(Error::DomainViolation { atom });
            }
        }
        Ok(())
    }
}

/// Stopping rules and budgets for the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Accept an atom once the residual at the barycenter drops to this.
    pub tol_residual: f64,
    /// Accept an atom once its simplex diameter drops to this.
    pub tol_diam: f64,
    /// Hard cap on subdivision rounds; exceeding it returns the best
    /// point so far flagged non-converged.
    pub max_rounds: usize,
    /// Hard cap on subdivision cells materialized over the whole run.
    pub cell_budget: usize,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig {
            tol_residual: 1e-6,
            tol_diam: 1e-9,
            max_rounds: 200,
            cell_budget: 1_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) || !self.tol_residual.is_finite() {
            return Err(Error::InvalidConfig { reason: "tol_residual must be positive" });
        }
        if !(self.tol_diam > 0.0) || !self.tol_diam.is_finite() {
            return Err(Error::InvalidConfig { reason: "tol_diam must be positive" });
        }
        if self.max_rounds == 0 {
            return Err(Error::InvalidConfig { reason: "max_rounds must be at least 1" });
        }
        if self.cell_budget == 0 {
            return Err(Error::InvalidConfig { reason: "cell_budget must be at least 1" });
        }
        Ok(())
    }
}

/// The completely labeled simplex backing an accepted point: vertex j
/// carries label j+1 at every atom.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub vertices: Vec<RandomPoint>,
    pub labels: Vec<LabelField>,
}

/// Outcome of a fixed point solve.
#[derive(Debug, Clone)]
pub struct FixedPointResult {
    /// Barycenter of each atom's final simplex (sigma-combined).
    pub point: RandomPoint,
    /// Per-atom ||f(Y) - Y|| measured at acceptance time.
    pub residual: RandomScalar,
    /// Subdivision rounds performed (max over atoms).
    pub rounds_used: usize,
    /// Entry 0 is the initial diameter; entry r > 0 is the max diameter
    /// over the atoms still active after round r's subdivision.
    pub diam_trace: Vec<f64>,
    pub certificate: Certificate,
    /// True when every atom stopped on a tolerance, not on max_rounds.
    pub converged: bool,
    pub atoms_converged: Vec<bool>,
}

/// Internal object-safe view of a map, so the solver core can run both
/// plain functions and composed (projection-wrapped) ones.
pub(crate) trait Map {
    fn dim(&self) -> usize;
    fn eval(&self, x: &RandomPoint) -> Result<RandomPoint>;
}

impl Map for LocalFunction {
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &RandomPoint) -> Result<RandomPoint> {
        LocalFunction::eval(self, x)
    }
}

fn escape_coords(
    base: &[RandomPoint],
    x: &RandomPoint,
) -> Result<crate::l0_linalg::ConvexWeights> {
    match coords_for_vertices(base, x, tol::COORD_TOL) {
        Err(Error::NotInSimplex { atom, violation }) => {
            Err(Error::ImageEscapedSimplex { atom, violation })
        }
        other => other,
    }
}

fn per_atom_diams(points: &[RandomPoint]) -> Vec<f64> {
    crate::l0_linalg::diam(points)
        .expect("vertex family is nonempty")
        .values()
        .to_vec()
}

/// Sperner-walk fixed point solve on a conditional simplex.
///
/// The image is required to stay in `s` at every evaluated point
/// (`ImageEscapedSimplex` otherwise). Stopping is per atom; see
/// [`FixedPointResult`] for what is reported. Atoms that exhaust
/// `max_rounds` keep their best point and are flagged non-converged.
pub fn solve_simplex_fixed_point(
    f: &LocalFunction,
    s: &ConditionalSimplex,
    cfg: &SolverConfig,
) -> Result<FixedPointResult> {
    solve_core(f, s, cfg)
}

pub(crate) fn solve_core(
    map: &dyn Map,
    base: &ConditionalSimplex,
    cfg: &SolverConfig,
) -> Result<FixedPointResult> {
    cfg.validate()?;
    if map.dim() != base.dim() {
        return Err(Error::DimensionMismatch { expected: base.dim(), got: map.dim() });
    }
    let n = base.n();
    let atoms = base.atoms();
    let dim = base.dim();
    let space = base.space().clone();

    let mut current: Vec<RandomPoint> = base.vertices().to_vec();
    let mut active = vec![true; atoms];
    let mut conv = vec![false; atoms];
    let mut point_rows: Vec<Vec<f64>> = vec![vec![0.0; dim]; atoms];
    let mut resid_vals = vec![0.0; atoms];
    let mut cert_rows: Vec<Vec<Vec<f64>>> = vec![Vec::new(); atoms];
    let mut rounds_used = 0usize;
    let mut diam_trace = Vec::new();

    let perms = permutations(n);
    let prefix_masks: Vec<Vec<u32>> = perms
        .iter()
        .map(|p| {
            let mut mask = 0u32;
            p.iter()
                .map(|&i| {
                    mask |= 1 << i;
                    mask
                })
                .collect()
        })
        .collect();
    let cells_per_round = factorial(n);
    let mut cells_used = 0usize;

    let init_diams = per_atom_diams(&current);
    diam_trace.push(init_diams.iter().fold(0.0f64, |a, &b| a.max(b)));

    for round in 0..=cfg.max_rounds {
        let bary = mean_point(&current, &(0..n).collect::<Vec<_>>());
        let fb = map.eval(&bary)?;
        escape_coords(base.vertices(), &fb)?;
        let diams = per_atom_diams(&current);
        for w in 0..atoms {
            if !active[w] {
                continue;
            }
            let r = dist(fb.atom(w), bary.atom(w));
            let hit = r <= cfg.tol_residual || diams[w] <= cfg.tol_diam;
            if hit || round == cfg.max_rounds {
                active[w] = false;
                conv[w] = hit;
                point_rows[w] = bary.atom(w).to_vec();
                resid_vals[w] = r;
                cert_rows[w] = current.iter().map(|v| v.atom(w).to_vec()).collect();
                rounds_used = round;
            }
        }
        if !active.iter().any(|&a| a) {
            break;
        }

        // One subdivision round for the atoms still active.
        let needed = cells_per_round.and_then(|c| cells_used.checked_add(c));
        match needed {
            Some(total) if total <= cfg.cell_budget => cells_used = total,
            _ => {
                return Err(Error::BudgetExceeded {
                    needed: needed.unwrap_or(usize::MAX),
                    budget: cfg.cell_budget,
                })
            }
        }
        let shared = subset_points(&current);
        // Canonical label of every extremal point at every atom. The
        // simplex coordinates are taken against the round's own simplex,
        // where a subset average has exactly uniform weight on its mask;
        // the image coordinates are affine in the same frame and may
        // leave [0,1] once the image escapes the current simplex. The
        // parity argument that guarantees a winner applies per round only
        // in this frame.
        let mut labels: Vec<Vec<(usize, bool)>> = Vec::with_capacity(shared.len());
        let mut lrow = vec![0.0; n];
        for (idx, pt) in shared.iter().enumerate() {
            let fpt = map.eval(pt)?;
            escape_coords(base.vertices(), &fpt)?;
            let mu = affine_coords(&current, &fpt)?;
            let mask = idx + 1;
            let k = (mask as u32).count_ones() as f64;
            for (i, slot) in lrow.iter_mut().enumerate() {
                *slot = if mask & (1 << i) != 0 { 1.0 / k } else { 0.0 };
            }
            let mut per_atom = Vec::with_capacity(atoms);
            for w in 0..atoms {
                per_atom.push(pick_label(&lrow, &mu[w]));
            }
            labels.push(per_atom);
        }
        // Per active atom: prefer the first completely labeled cell whose
        // labels all come from the dominance rule; such a cell certifies
        // the crossing is inside it and the recursion stays nested. When
        // only fallback-tainted winners exist the crossing has left this
        // simplex, and the atom is flagged for re-anchoring below. Vertex
        // j of the next simplex carries label j (0-based here).
        let mut rows: Vec<Vec<Vec<f64>>> = (0..n)
            .map(|j| (0..atoms).map(|w| current[j].atom(w).to_vec()).collect())
            .collect();
        let mut reanchor = vec![false; atoms];
        for w in 0..atoms {
            if !active[w] {
                continue;
            }
            let mut first_cert: Option<&Vec<u32>> = None;
            let mut first_any: Option<&Vec<u32>> = None;
            for pm in &prefix_masks {
                let mut seen = 0u32;
                let mut cert = true;
                let mut complete = true;
                for &mask in pm {
                    let (lab, c) = labels[(mask - 1) as usize][w];
                    let bit = 1u32 << lab;
                    if seen & bit != 0 {
                        complete = false;
                        break;
                    }
                    seen |= bit;
                    cert &= c;
                }
                if !complete {
                    continue;
                }
                if first_any.is_none() {
                    first_any = Some(pm);
                }
                if cert {
                    first_cert = Some(pm);
                    break;
                }
            }
            let pm = match first_cert.or(first_any) {
                Some(pm) => pm,
                None => return Err(Error::NoCompletelyLabeledCell { atom: w }),
            };
            reanchor[w] = first_cert.is_none();
            for &mask in pm {
                let idx = (mask - 1) as usize;
                let lab = labels[idx][w].0;
                rows[lab][w] = shared[idx].atom(w).to_vec();
            }
        }
        // Re-anchoring translates the cell after the image of its own
        // barycenter, clipped so every vertex stays inside the base
        // simplex. Translation preserves the diameter (hence the decay
        // trace) and works on one atom's rows only, keeping runs on
        // sigma-combined problems bit-identical to the per-atom runs.
        if reanchor.iter().any(|&b| b) {
            let next = rows
                .iter()
                .map(|vr| RandomPoint::from_atom_rows(space.clone(), vr))
                .collect::<Result<Vec<_>>>()?;
            let zp = mean_point(&next, &(0..n).collect::<Vec<_>>());
            let fz = map.eval(&zp)?;
            escape_coords(base.vertices(), &fz)?;
            let mut shift = vec![vec![0.0; dim]; atoms];
            for w in 0..atoms {
                if reanchor[w] {
                    for i in 0..dim {
                        shift[w][i] = fz.atom(w)[i] - zp.atom(w)[i];
                    }
                }
            }
            const CLIP_EPS: f64 = 1e-12;
            let mut t = vec![1.0f64; atoms];
            for (j, vr) in rows.iter().enumerate() {
                let mut q_rows: Vec<Vec<f64>> = Vec::with_capacity(atoms);
                for w in 0..atoms {
                    let mut row = vr[w].clone();
                    for i in 0..dim {
                        row[i] += shift[w][i];
                    }
                    q_rows.push(row);
                }
                let q = RandomPoint::from_atom_rows(space.clone(), &q_rows)?;
                let lam_p = affine_coords(base.vertices(), &next[j])?;
                let lam_q = affine_coords(base.vertices(), &q)?;
                for w in 0..atoms {
                    if !reanchor[w] {
                        continue;
                    }
                    for i in 0..n {
                        let a = lam_p[w][i].max(0.0);
                        let b = lam_q[w][i];
                        if b < -CLIP_EPS && b < a {
                            let lim = (a + CLIP_EPS) / (a - b);
                            if lim < t[w] {
                                t[w] = lim.max(0.0);
                            }
                        }
                    }
                }
            }
            for w in 0..atoms {
                if !reanchor[w] {
                    continue;
                }
                for vr in rows.iter_mut() {
                    for i in 0..dim {
                        vr[w][i] += t[w] * shift[w][i];
                    }
                }
            }
        }
        current = rows
            .into_iter()
            .map(|vr| RandomPoint::from_atom_rows(space.clone(), &vr))
            .collect::<Result<Vec<_>>>()?;
        let post = per_atom_diams(&current);
        let entry = (0..atoms)
            .filter(|&w| active[w])
            .map(|w| post[w])
            .fold(0.0f64, f64::max);
        diam_trace.push(entry);
    }

    let mut point_values = Vec::with_capacity(atoms * dim);
    for row in &point_rows {
        point_values.extend_from_slice(row);
    }
    let point = RandomPoint::new(space.clone(), dim, point_values)?;
    let residual = RandomScalar::new(space.clone(), resid_vals)?;
    let mut cert_vertices = Vec::with_capacity(n);
    for j in 0..n {
        let rows: Vec<Vec<f64>> = (0..atoms).map(|w| cert_rows[w][j].clone()).collect();
        cert_vertices.push(RandomPoint::from_atom_rows(space.clone(), &rows)?);
    }
    let cert_labels = (1..=n)
        .map(|j| LabelField::constant(space.clone(), n, j))
        .collect::<Result<Vec<_>>>()?;
    let converged = conv.iter().all(|&c| c);
    Ok(FixedPointResult {
        point,
        residual,
        rounds_used,
        diam_trace,
        certificate: Certificate { vertices: cert_vertices, labels: cert_labels },
        converged,
        atoms_converged: conv,
    })
}

/// How to project onto a custom convex body.
pub trait ProjectionOracle {
    fn space(&self) -> &Arc<ProbSpace>;
    fn dim(&self) -> usize;
    /// Writes the projection of one atom's coordinates into `out`.
    fn project_atom(&self, atom: usize, x: &[f64], out: &mut [f64]);
    /// Writes a distinguished interior point (the body's center).
    fn center_atom(&self, atom: usize, out: &mut [f64]);
    /// Per-atom radius R with body contained in ball(center, R), if known.
    fn radius_bound(&self) -> Option<RandomScalar>;
}

/// An L0-convex, closed, bounded body.
pub enum ConvexBody {
    Ball { center: RandomPoint, radius: RandomScalar },
    Box { lower: RandomPoint, upper: RandomPoint },
    Simplex(ConditionalSimplex),
    Custom(Box<dyn ProjectionOracle + Send + Sync>),
}

impl core::fmt::Debug for ConvexBody {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ConvexBody::Ball { center, radius } => f
                .debug_struct("Ball")
                .field("center", center)
                .field("radius", radius)
                .finish(),
            ConvexBody::Box { lower, upper } => {
                f.debug_struct("Box").field("lower", lower).field("upper", upper).finish()
            }
            ConvexBody::Simplex(s) => f.debug_tuple("Simplex").field(s).finish(),
            ConvexBody::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl ConvexBody {
    pub fn space(&self) -> &Arc<ProbSpace> {
        match self {
            ConvexBody::Ball { center, .. } => center.space(),
            ConvexBody::Box { lower, .. } => lower.space(),
            ConvexBody::Simplex(s) => s.space(),
            ConvexBody::Custom(o) => o.space(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { center, .. } => center.dim(),
            ConvexBody::Box { lower, .. } => lower.dim(),
            ConvexBody::Simplex(s) => s.dim(),
            ConvexBody::Custom(o) => o.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexBody::Ball { center, radius } => {
                check_same_space(center.space(), radius.space())?;
                for atom in 0..radius.atoms() {
                    if radius.value(atom) <= 0.0 {
                        return Err(Error::InvalidBody {
                            reason: "ball radius must be positive at every atom",
                        });
                    }
                }
                Ok(())
            }
            ConvexBody::Box { lower, upper } => {
                check_same_space(lower.space(), upper.space())?;
                if lower.dim() != upper.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: lower.dim(),
                        got: upper.dim(),
                    });
                }
                for atom in 0..lower.atoms() {
                    let l = lower.atom(atom);
                    let u = upper.atom(atom);
                    for j in 0..l.len() {
                        if l[j] > u[j] {
                            return Err(Error::InvalidBody {
                                reason: "box lower bound exceeds upper bound",
                            });
                        }
                    }
                }
                Ok(())
            }
            ConvexBody::Simplex(_) => Ok(()),
            ConvexBody::Custom(o) => {
                if o.dim() == 0 {
                    return Err(Error::InvalidBody { reason: "oracle dimension must be positive" });
                }
                Ok(())
            }
        }
    }
}

/// Metric projection onto a convex body, per atom.
///
/// Ball and box have closed forms; simplex projection enumerates faces
/// and keeps the feasible minimizer; custom bodies delegate to their
/// oracle. The identity on the body, nonexpansive, and characterized by
/// the variational inequality `<x - h(x), z - h(x)> <= 0` for z in the
/// body.
pub fn project(k: &ConvexBody, x: &RandomPoint) -> Result<RandomPoint> {
    k.validate()?;
    check_same_space(k.space(), x.space())?;
    if x.dim() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: x.dim() });
    }
    let dim = x.dim();
    let atoms = x.atoms();
    let mut values = vec![0.0; atoms * dim];
    for atom in 0..atoms {
        let row = x.atom(atom);
        let out = &mut values[atom * dim..(atom + 1) * dim];
        match k {
            ConvexBody::Ball { center, radius } => {
                let c = center.atom(atom);
                let r = radius.value(atom);
                let mut norm_sq = 0.0;
                for j in 0..dim {
                    let d = row[j] - c[j];
                    norm_sq += d * d;
                }
                let norm = math::sqrt(norm_sq);
                if norm <= r {
                    out.copy_from_slice(row);
                } else {
                    let scale = r / norm;
                    for j in 0..dim {
                        out[j] = c[j] + scale * (row[j] - c[j]);
                    }
                }
            }
            ConvexBody::Box { lower, upper } => {
                let l = lower.atom(atom);
                let u = upper.atom(atom);
                for j in 0..dim {
                    out[j] = row[j].max(l[j]).min(u[j]);
                }
            }
            ConvexBody::Simplex(s) => {
                project_simplex_atom(s, atom, row, out);
            }
            ConvexBody::Custom(o) => {
                o.project_atom(atom, row, out);
            }
        }
    }
    RandomPoint::new(x.space().clone(), dim, values)
}

/// Exhaustive face enumeration: for every nonempty vertex subset, solve
/// the equality-constrained least squares projection onto its affine
/// hull (KKT system) and keep the feasible candidate closest to `x`.
/// The optimal face is always feasible, so a candidate always exists.
fn project_simplex_atom(s: &ConditionalSimplex, atom: usize, x: &[f64], out: &mut [f64]) {
    let n = s.n();
    let dim = s.dim();
    let mut best_d2 = f64::INFINITY;
    for mask in 1u32..(1u32 << n) {
        let ids: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let k = ids.len();
        // KKT for min ||V w - x||^2 s.t. 1' w = 1:
        // [2 V'V  1] [w ]   [2 V'x]
        // [1'     0] [nu] = [1    ]
        let m = k + 1;
        let mut a = vec![0.0; m * m];
        let mut b = vec![0.0; m];
        for p in 0..k {
            let vp = s.vertex(ids[p]).atom(atom);
            for q in 0..k {
                let vq = s.vertex(ids[q]).atom(atom);
                a[p * m + q] = 2.0 * crate::l0_linalg::dot(vp, vq);
            }
            a[p * m + k] = 1.0;
            a[k * m + p] = 1.0;
            b[p] = 2.0 * crate::l0_linalg::dot(vp, x);
        }
        b[k] = 1.0;
        let w = match solve_dense(&mut a, &mut b, m) {
            Some(sol) => sol,
            None => continue,
        };
        if w[..k].iter().any(|&wi| wi < -tol::WEIGHT_CLAMP) {
            continue;
        }
        let mut cand = vec![0.0; dim];
        for p in 0..k {
            let vp = s.vertex(ids[p]).atom(atom);
            for j in 0..dim {
                cand[j] += w[p] * vp[j];
            }
        }
        let mut d2 = 0.0;
        for j in 0..dim {
            let d = cand[j] - x[j];
            d2 += d * d;
        }
        if d2 < best_d2 {
            best_d2 = d2;
            out.copy_from_slice(&cand);
        }
    }
    debug_assert!(best_d2.is_finite(), "some face is always feasible");
}

/// Gaussian elimination with partial pivoting on a row-major n x n
/// system. Returns None on a (near-)singular pivot.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    let scale = a.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    let eps = 1e-13 * scale;
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() <= eps {
            return None;
        }
        if piv != col {
            for j in 0..n {
                a.swap(col * n + j, piv * n + j);
            }
            b.swap(col, piv);
        }
        let p = a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                a[r * n + j] -= f * a[col * n + j];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for j in (r + 1)..n {
            s -= a[r * n + j] * x[j];
        }
        x[r] = s / a[r * n + r];
    }
    Some(x)
}

/// Unit-circumradius regular simplex directions in R^d: d+1 vectors with
/// pairwise inner products -1/d, the first along +x1. Axis-canonical for
/// reproducibility.
fn regular_simplex_directions(d: usize) -> Vec<Vec<f64>> {
    let mut dirs = vec![vec![0.0; d]; d + 1];
    // s[j] is the shared j-th coordinate of every vertex after the j-th.
    let mut s = vec![0.0; d];
    let target = -1.0 / d as f64;
    for i in 0..=d {
        for j in 0..i {
            dirs[i][j] = s[j];
        }
        if i < d {
            let mut acc = 1.0f64;
            for j in 0..i {
                acc -= s[j] * s[j];
            }
            let t = math::sqrt(acc.max(0.0));
            dirs[i][i] = t;
            let mut dot_prefix = 0.0;
            for j in 0..i {
                dot_prefix += s[j] * s[j];
            }
            s[i] = (target - dot_prefix) / t;
        }
    }
    dirs
}

/// Per-atom center and radius bound of a body: a ball around the center
/// with this radius contains the body.
fn body_center_radius(k: &ConvexBody) -> Result<(RandomPoint, Vec<f64>)> {
    match k {
        ConvexBody::Ball { center, radius } => Ok((center.clone(), radius.values().to_vec())),
        ConvexBody::Box { lower, upper } => {
            let center = lower.add(upper)?.scale(0.5);
            let radii = (0..lower.atoms())
                .map(|w| {
                    let l = lower.atom(w);
                    let u = upper.atom(w);
                    let mut s = 0.0;
                    for j in 0..l.len() {
                        let h = (u[j] - l[j]) / 2.0;
                        s += h * h;
                    }
                    math::sqrt(s)
                })
                .collect();
            Ok((center, radii))
        }
        ConvexBody::Simplex(s) => {
            let center = s.barycenter();
            let radii = (0..s.atoms())
                .map(|w| {
                    let c = center.atom(w);
                    (0..s.n())
                        .map(|i| dist(s.vertex(i).atom(w), c))
                        .fold(0.0f64, f64::max)
                })
                .collect();
            Ok((center, radii))
        }
        ConvexBody::Custom(o) => {
            let dim = o.dim();
            let atoms = o.space().atoms();
            let mut values = vec![0.0; atoms * dim];
            for atom in 0..atoms {
                o.center_atom(atom, &mut values[atom * dim..(atom + 1) * dim]);
            }
            let center = RandomPoint::new(o.space().clone(), dim, values)?;
            let bound = o.radius_bound().ok_or(Error::UnboundedBody)?;
            Ok((center, bound.values().to_vec()))
        }
    }
}

/// A regular d-simplex containing the body: centered at the body's
/// center, scaled so its inscribed ball has radius (1+margin) times the
/// body's radius bound. Degenerate bodies (radius 0) get a tiny positive
/// scale so the simplex stays nondegenerate.
pub fn enclosing_simplex(k: &ConvexBody, margin: f64) -> Result<ConditionalSimplex> {
    k.validate()?;
    if !(margin >= 0.0) || !margin.is_finite() {
        return Err(Error::InvalidConfig { reason: "margin must be nonnegative and finite" });
    }
    let (center, radii) = body_center_radius(k)?;
    let d = k.dim();
    let dirs = regular_simplex_directions(d);
    let atoms = center.atoms();
    let mut vertices = Vec::with_capacity(d + 1);
    for dir in &dirs {
        let mut values = vec![0.0; atoms * d];
        for atom in 0..atoms {
            // Inradius (1+margin) R means circumradius d (1+margin) R.
            let rho = ((1.0 + margin) * radii[atom]).max(1e-9);
            let circ = rho * d as f64;
            let c = center.atom(atom);
            for j in 0..d {
                values[atom * d + j] = c[j] + circ * dir[j];
            }
        }
        vertices.push(RandomPoint::new(center.space().clone(), d, values)?);
    }
    ConditionalSimplex::new(vertices)
}

/// Per-atom distance from `x` to the body (0 inside).
fn body_violation(k: &ConvexBody, x: &RandomPoint) -> Result<Vec<f64>> {
    let p = project(k, x)?;
    Ok((0..x.atoms()).map(|w| dist(x.atom(w), p.atom(w))).collect())
}

struct Composed<'a> {
    f: &'a LocalFunction,
    body: &'a ConvexBody,
}

impl Map for Composed<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn eval(&self, x: &RandomPoint) -> Result<RandomPoint> {
        let h = project(self.body, x)?;
        let w = self.f.eval(&h)?;
        let viol = body_violation(self.body, &w)?;
        for (atom, &v) in viol.iter().enumerate() {
            if v > tol::BODY_TOL {
                return Err(Error::ImageEscapedBody { atom, violation: v });
            }
        }
        Ok(w)
    }
}

/// Fixed point of `f` on a convex bounded body: runs the simplex solver
/// on f composed with the metric projection over an enclosing simplex.
/// The returned point is projected back onto the body and the residual is
/// measured for `f` itself at that point.
pub fn solve_convex_fixed_point(
    f: &LocalFunction,
    k: &ConvexBody,
    cfg: &SolverConfig,
) -> Result<FixedPointResult> {
    k.validate()?;
    if f.dim() != k.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: f.dim() });
    }
    let s = enclosing_simplex(k, 0.0)?;
    let composed = Composed { f, body: k };
    let inner = solve_core(&composed, &s, cfg)?;
    let point = project(k, &inner.point)?;
    let image = f.eval(&point)?;
    let resid: Vec<f64> = (0..point.atoms())
        .map(|w| dist(image.atom(w), point.atom(w)))
        .collect();
    let residual = RandomScalar::new(point.space().clone(), resid)?;
    Ok(FixedPointResult { point, residual, ..inner })
}

/// Outcome of an intermediate-value solve.
#[derive(Debug, Clone)]
pub struct IvtResult {
    /// The located preimage of the target.
    pub value: RandomScalar,
    /// Per-atom |f(value) - target|.
    pub residual: RandomScalar,
    pub rounds_used: usize,
    pub converged: bool,
    pub atoms_converged: Vec<bool>,
}

struct IvtMap<'a> {
    f: &'a LocalFunction,
    lo: Vec<f64>,
    hi: Vec<f64>,
    target: Vec<f64>,
    // +1 where f is set up increasing (f(lo) <= f(hi)), -1 otherwise.
    sign: Vec<f64>,
    // Atoms solved exactly at an endpoint; the map is a constant there.
    pinned: Vec<Option<f64>>,
}

impl Map for IvtMap<'_> {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: &RandomPoint) -> Result<RandomPoint> {
        let atoms = x.atoms();
        // Clamp into the true interval before evaluating f, so pinned
        // atoms with degenerate intervals never feed f out-of-domain
        // values from their placeholder interval.
        let mut z = Vec::with_capacity(atoms);
        for w in 0..atoms {
            z.push(x.atom(w)[0].max(self.lo[w]).min(self.hi[w]));
        }
        let zp = RandomPoint::new(x.space().clone(), 1, z.clone())?;
        let fx = self.f.eval(&zp)?;
        let mut out = Vec::with_capacity(atoms);
        for w in 0..atoms {
            match self.pinned[w] {
                Some(v) => out.push(v),
                None => {
                    let step = z[w] - self.sign[w] * (fx.atom(w)[0] - self.target[w]);
                    out.push(step.max(self.lo[w]).min(self.hi[w]));
                }
            }
        }
        RandomPoint::new(x.space().clone(), 1, out)
    }
}

/// Conditional intermediate-value solver: finds a value whose image under
/// `f` matches `target` within tolerance on [x_low, x_high], per atom.
///
/// Per atom, with a = f(x_low) and b = f(x_high), the target must lie
/// between min(a, b) and max(a, b) (`TargetOutOfRange` otherwise; also
/// raised when x_low > x_high). Atoms where the target equals a or b
/// resolve exactly to the endpoint; the rest run the d=1 simplex solver
/// on g(v) = clamp(v - sign (f(v) - target)), whose interior fixed points
/// are exactly the preimages of the target.
pub fn ivt_solve(
    f: &LocalFunction,
    x_low: &RandomScalar,
    x_high: &RandomScalar,
    target: &RandomScalar,
    cfg: &SolverConfig,
) -> Result<IvtResult> {
    cfg.validate()?;
    if f.dim() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: f.dim() });
    }
    check_same_space(x_low.space(), x_high.space())?;
    check_same_space(x_low.space(), target.space())?;
    let space = x_low.space().clone();
    let atoms = space.atoms();
    let lo_pt = RandomPoint::from_scalar(x_low);
    let hi_pt = RandomPoint::from_scalar(x_high);
    let f_lo = f.eval(&lo_pt)?;
    let f_hi = f.eval(&hi_pt)?;

    let mut sign = vec![1.0; atoms];
    let mut pinned: Vec<Option<f64>> = vec![None; atoms];
    // Per-atom endpoint answer, filled for pinned atoms.
    let mut exact: Vec<Option<f64>> = vec![None; atoms];
    for w in 0..atoms {
        let lo = x_low.value(w);
        let hi = x_high.value(w);
        if lo > hi {
            return Err(Error::TargetOutOfRange { atom: w });
        }
        let a = f_lo.atom(w)[0];
        let b = f_hi.atom(w)[0];
        let y = target.value(w);
        if y < a.min(b) || y > a.max(b) {
            return Err(Error::TargetOutOfRange { atom: w });
        }
        sign[w] = if a <= b { 1.0 } else { -1.0 };
        if y == a {
            exact[w] = Some(lo);
        } else if y == b {
            exact[w] = Some(hi);
        }
    }

    // Solver interval per atom: the real one where the atom still
    // searches, a placeholder where the answer is already pinned (the
    // real interval may be degenerate there).
    let mut v_lo = vec![0.0; atoms];
    let mut v_hi = vec![0.0; atoms];
    for w in 0..atoms {
        let lo = x_low.value(w);
        let hi = x_high.value(w);
        if exact[w].is_some() && lo == hi {
            v_lo[w] = lo;
            v_hi[w] = lo + 1.0;
        } else {
            v_lo[w] = lo;
            v_hi[w] = hi;
        }
        if exact[w].is_some() {
            pinned[w] = Some((v_lo[w] + v_hi[w]) / 2.0);
        }
    }
    let interval = ConditionalSimplex::new(vec![
        RandomPoint::new(space.clone(), 1, v_lo.clone())?,
        RandomPoint::new(space.clone(), 1, v_hi.clone())?,
    ])?;
    let map = IvtMap {
        f,
        lo: (0..atoms).map(|w| x_low.value(w)).collect(),
        hi: (0..atoms).map(|w| x_high.value(w)).collect(),
        target: (0..atoms).map(|w| target.value(w)).collect(),
        sign,
        pinned,
    };
    let inner = solve_core(&map, &interval, cfg)?;

    let mut values = Vec::with_capacity(atoms);
    let mut conv = Vec::with_capacity(atoms);
    for w in 0..atoms {
        match exact[w] {
            Some(v) => {
                values.push(v);
                conv.push(true);
            }
            None => {
                values.push(inner.point.atom(w)[0]);
                conv.push(inner.atoms_converged[w]);
            }
        }
    }
    let value = RandomScalar::new(space.clone(), values.clone())?;
    let value_pt = RandomPoint::new(space.clone(), 1, values)?;
    let image = f.eval(&value_pt)?;
    let resid: Vec<f64> = (0..atoms)
        .map(|w| (image.atom(w)[0] - target.value(w)).abs())
        .collect();
    let residual = RandomScalar::new(space, resid)?;
    let converged = conv.iter().all(|&c| c);
    Ok(IvtResult {
        value,
        residual,
        rounds_used: inner.rounds_used,
        converged,
        atoms_converged: conv,
    })
}
