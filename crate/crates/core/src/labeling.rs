//! Canonical Sperner labeling and completely labeled cells.
//!
//! Labels live in 1..=N and are assigned from the barycentric coordinates
//! lambda of a point and mu of its image, both taken with respect to the
//! ambient base simplex: the label is the smallest index that carries
//! positive weight and does not lose weight under the map. Such labelings
//! are proper by construction, and properness forces an odd number of
//! completely labeled cells in every full subdivision, atom by atom.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::l0_linalg::barycentric_coords;
use crate::prob_space::{check_same_space, Partition, ProbSpace, RandomPoint};
use crate::simplex::{ConditionalSimplex, SubdivisionCell};
use crate::solver::LocalFunction;
use crate::tol;
use alloc::sync::Arc;

/// One label in 1..=N per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelField {
    space: Arc<ProbSpace>,
    n: usize,
    labels: Vec<usize>,
}

impl LabelField {
    pub fn new(space: Arc<ProbSpace>, n: usize, labels: Vec<usize>) -> Result<LabelField> {
        if labels.len() != space.atoms() {
            return Err(Error::DimensionMismatch { expected: space.atoms(), got: labels.len() });
        }
        for &l in &labels {
            if l == 0 || l > n {
                return Err(Error::IndexOutOfRange { index: l, limit: n });
            }
        }
        Ok(LabelField { space, n, labels })
    }

    /// The constant label `value` at every atom.
    pub fn constant(space: Arc<ProbSpace>, n: usize, value: usize) -> Result<LabelField> {
        let atoms = space.atoms();
        LabelField::new(space, n, vec![value; atoms])
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    /// Number of admissible labels (the N of the ambient simplex).
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self, atom: usize) -> usize {
        self.labels[atom]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }
}

/// A family of labeled points together with the ambient simplex their
/// labels refer to.
#[derive(Debug, Clone)]
pub struct LabeledVertexSet {
    base: ConditionalSimplex,
    vertices: Vec<RandomPoint>,
    labels: Vec<LabelField>,
}

impl LabeledVertexSet {
    pub fn new(
        base: ConditionalSimplex,
        vertices: Vec<RandomPoint>,
        labels: Vec<LabelField>,
    ) -> Result<LabeledVertexSet> {
        if vertices.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: vertices.len(),
                got: labels.len(),
            });
        }
        for v in &vertices {
            check_same_space(base.space(), v.space())?;
            if v.dim() != base.dim() {
                return Err(Error::DimensionMismatch { expected: base.dim(), got: v.dim() });
            }
        }
        for l in &labels {
            check_same_space(base.space(), l.space())?;
            if l.n() != base.n() {
                return Err(Error::DimensionMismatch { expected: base.n(), got: l.n() });
            }
        }
        Ok(LabeledVertexSet { base, vertices, labels })
    }

    /// Labels every vertex canonically with respect to `f` and `base`.
    pub fn canonical(
        f: &LocalFunction,
        base: ConditionalSimplex,
        vertices: Vec<RandomPoint>,
    ) -> Result<LabeledVertexSet> {
        let labels = vertices
            .iter()
            .map(|v| canonical_label(f, &base, v))
            .collect::<Result<Vec<_>>>()?;
        LabeledVertexSet::new(base, vertices, labels)
    }

    pub fn base(&self) -> &ConditionalSimplex {
        &self.base
    }

    pub fn vertices(&self) -> &[RandomPoint] {
        &self.vertices
    }

    pub fn labels(&self) -> &[LabelField] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// First (vertex, atom) where the labeled coordinate is not positive,
    /// if any. Errors if some vertex leaves the base simplex.
    fn properness_violation(&self) -> Result<Option<(usize, usize)>> {
        for (v_idx, v) in self.vertices.iter().enumerate() {
            let lambda = barycentric_coords(&self.base, v, tol::COORD_TOL)?;
            let field = &self.labels[v_idx];
            for atom in 0..self.base.atoms() {
                let l = field.label(atom);
                if lambda.at(atom, l - 1) <= tol::LABEL_POS_EPS {
                    return Ok(Some((atom, v_idx)));
                }
            }
        }
        Ok(None)
    }
}

/// Picks the canonical label from one atom's coordinate rows: the smallest
/// index with positive lambda whose weight does not drop under the map.
/// Such an index exists whenever mu is itself a convex weight row; if
/// rounding dust empties the candidate set, the largest lambda stands in
/// (still a positive coordinate, so properness survives). Returns 0-based.
/// Returns the 0-based canonical label and whether the dominance rule
/// fired. `false` means the dust fallback (largest weight) was used; a
/// fallback label keeps the labeling proper but certifies nothing about
/// the image, which the solver uses to detect a lost crossing.
pub(crate) fn pick_label(lambda: &[f64], mu: &[f64]) -> (usize, bool) {
    debug_assert_eq!(lambda.len(), mu.len());
    for i in 0..lambda.len() {
        if lambda[i] > tol::LABEL_POS_EPS && lambda[i] >= mu[i] - tol::LABEL_GE_SLACK {
            return (i, true);
        }
    }
    let mut best = 0;
    for i in 1..lambda.len() {
        if lambda[i] > lambda[best] {
            best = i;
        }
    }
    (best, false)
}

/// Canonical label of `y` under `f`, relative to `base`.
///
/// Errors with `NotInSimplex` if `y` leaves the base simplex and with
/// `ImageEscapedSimplex` if `f(y)` does.
pub fn canonical_label(
    f: &LocalFunction,
    base: &ConditionalSimplex,
    y: &RandomPoint,
) -> Result<LabelField> {
    let lambda = barycentric_coords(base, y, tol::COORD_TOL)?;
    let fy = f.eval(y)?;
    let mu = match barycentric_coords(base, &fy, tol::COORD_TOL) {
        Ok(w) => w,
        Err(Error::NotInSimplex { atom, violation }) => {
            return Err(Error::ImageEscapedSimplex { atom, violation })
        }
        Err(e) => return Err(e),
    };
    let n = base.n();
    let labels = (0..base.atoms())
        .map(|atom| {
            let lrow: Vec<f64> = (0..n).map(|i| lambda.at(atom, i)).collect();
            let mrow: Vec<f64> = (0..n).map(|i| mu.at(atom, i)).collect();
            pick_label(&lrow, &mrow).0 + 1
        })
        .collect();
    LabelField::new(base.space().clone(), n, labels)
}

/// True when every vertex's label sits on a positive coordinate at every
/// atom (the Sperner properness condition).
pub fn is_proper(l: &LabeledVertexSet) -> Result<bool> {
    Ok(l.properness_violation()?.is_none())
}

/// Winning cells of a labeled subdivision, sigma-combined.
#[derive(Debug, Clone)]
pub struct CompletelyLabeled {
    /// Groups atoms by which cell wins for them.
    pub partition: Partition,
    /// Per part, the index of the winning cell in the input list.
    pub cell_indices: Vec<usize>,
    /// Per part, the winning cell itself.
    pub cells: Vec<SubdivisionCell>,
    /// The combined simplex; vertex j carries label j+1 at every atom.
    pub simplex: ConditionalSimplex,
}

/// Resolves each cell vertex to its index in the labeled set, matching
/// stored values bit for bit (subdivision cells share their vertex values,
/// so exact matching is the correct notion of identity here).
fn resolve_cell_vertices(
    cells: &[SubdivisionCell],
    l: &LabeledVertexSet,
) -> Result<Vec<Vec<usize>>> {
    let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
    for (i, v) in l.vertices().iter().enumerate() {
        let key: Vec<u64> = v.values().iter().map(|x| x.to_bits()).collect();
        index.entry(key).or_insert(i);
    }
    cells
        .iter()
        .enumerate()
        .map(|(c_idx, cell)| {
            cell.vertices
                .iter()
                .enumerate()
                .map(|(v_idx, v)| {
                    let key: Vec<u64> = v.values().iter().map(|x| x.to_bits()).collect();
                    index
                        .get(&key)
                        .copied()
                        .ok_or(Error::UnlabeledVertex { cell: c_idx, vertex: v_idx })
                })
                .collect()
        })
        .collect()
}

/// Per-atom indices of completely labeled cells, in input order.
fn complete_cells_per_atom(
    cells: &[SubdivisionCell],
    l: &LabeledVertexSet,
    resolved: &[Vec<usize>],
) -> Vec<Vec<usize>> {
    let n = l.base().n();
    let full: u64 = (1u64 << n) - 1;
    (0..l.base().atoms())
        .map(|atom| {
            let mut hits = Vec::new();
            for (c_idx, vertex_ids) in resolved.iter().enumerate() {
                let mut mask = 0u64;
                for &vid in vertex_ids {
                    mask |= 1 << (l.labels()[vid].label(atom) - 1);
                }
                if mask == full && cells[c_idx].vertices.len() == n {
                    hits.push(c_idx);
                }
            }
            hits
        })
        .collect()
}

/// Finds, per atom, the first completely labeled cell, groups atoms by
/// winner, and assembles the combined simplex whose vertex j carries label
/// j+1 everywhere.
pub fn find_completely_labeled(
    cells: &[SubdivisionCell],
    l: &LabeledVertexSet,
) -> Result<CompletelyLabeled> {
    if cells.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if let Some((atom, vertex)) = l.properness_violation()? {
        return Err(Error::ImproperLabeling { atom, vertex });
    }
    let resolved = resolve_cell_vertices(cells, l)?;
    let per_atom = complete_cells_per_atom(cells, l, &resolved);
    let atoms = l.base().atoms();
    let n = l.base().n();
    let mut winner = vec![0usize; atoms];
    for atom in 0..atoms {
        match per_atom[atom].first() {
            Some(&c) => winner[atom] = c,
            None => return Err(Error::NoCompletelyLabeledCell { atom }),
        }
    }
    let mut part_of = vec![0usize; atoms];
    let mut cell_indices: Vec<usize> = Vec::new();
    for atom in 0..atoms {
        let part = match cell_indices.iter().position(|&c| c == winner[atom]) {
            Some(k) => k,
            None => {
                cell_indices.push(winner[atom]);
                cell_indices.len() - 1
            }
        };
        part_of[atom] = part;
    }
    let partition = Partition::new(l.base().space().clone(), part_of)?;
    let picked: Vec<SubdivisionCell> =
        cell_indices.iter().map(|&c| cells[c].clone()).collect();
    // Vertex j of the combined simplex: at each atom, the winning cell's
    // vertex labeled j+1 there. Completeness makes the choice unique.
    let mut assembled = Vec::with_capacity(n);
    for j in 0..n {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(atoms);
        for atom in 0..atoms {
            let c_idx = winner[atom];
            let vertex_ids = &resolved[c_idx];
            let mut row = None;
            for (slot, &vid) in vertex_ids.iter().enumerate() {
                if l.labels()[vid].label(atom) == j + 1 {
                    row = Some(cells[c_idx].vertices[slot].atom(atom).to_vec());
                    break;
                }
            }
            rows.push(row.expect("complete cell carries every label"));
        }
        assembled.push(RandomPoint::from_atom_rows(l.base().space().clone(), &rows)?);
    }
    let simplex = ConditionalSimplex::new(assembled)?;
    Ok(CompletelyLabeled { partition, cell_indices, cells: picked, simplex })
}

/// Counts completely labeled cells per atom. Callers assert oddness; the
/// count itself is the audit artifact.
pub fn parity_audit(cells: &[SubdivisionCell], l: &LabeledVertexSet) -> Result<Vec<usize>> {
    if cells.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if let Some((atom, vertex)) = l.properness_violation()? {
        return Err(Error::ImproperLabeling { atom, vertex });
    }
    let resolved = resolve_cell_vertices(cells, l)?;
    Ok(complete_cells_per_atom(cells, l, &resolved)
        .into_iter()
        .map(|hits| hits.len())
        .collect())
}
