//! Conditional simplexes and their barycentric subdivision.
//!
//! A conditional simplex is a family of N random points whose realizations
//! are affinely independent at every atom. Its subdivision has one cell per
//! permutation of the vertex set; cell vertices are prefix averages, so
//! cells agree with their siblings on shared faces bit for bit (the shared
//! subset points are computed once per subdivision).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::l0_linalg::{self, barycentric_coords};
use crate::prob_space::{check_same_space, Partition, ProbSpace, RandomPoint, RandomScalar};
use crate::tol;
use alloc::sync::Arc;

/// Default ceiling on the number of cells any one call may materialize.
pub const DEFAULT_CELL_BUDGET: usize = 1_000_000;

/// N affinely independent random points in (L0)^d over a finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalSimplex {
    vertices: Vec<RandomPoint>,
}

impl ConditionalSimplex {
    /// Validates shared space and dimension, then affine independence at
    /// every atom; reports the first offending atom.
    pub fn new(vertices: Vec<RandomPoint>) -> Result<ConditionalSimplex> {
        if vertices.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let dim = vertices[0].dim();
        for v in &vertices {
            check_same_space(vertices[0].space(), v.space())?;
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
            }
        }
        let ind = l0_linalg::affinely_independent(&vertices)?;
        for atom in 0..vertices[0].atoms() {
            if ind.value(atom) != 1.0 {
                return Err(Error::AffinelyDependent { atom });
            }
        }
        Ok(ConditionalSimplex { vertices })
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        self.vertices[0].space()
    }

    pub fn atoms(&self) -> usize {
        self.vertices[0].atoms()
    }

    pub fn vertices(&self) -> &[RandomPoint] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &RandomPoint {
        &self.vertices[i]
    }

    /// Equal-weight average of the vertices.
    pub fn barycenter(&self) -> RandomPoint {
        mean_point(&self.vertices, (0..self.n()).collect::<Vec<_>>().as_slice())
    }

    /// Per-atom diameter of the vertex set.
    pub fn diam(&self) -> RandomScalar {
        l0_linalg::diam(&self.vertices).expect("simplex is nonempty")
    }

    /// The face spanned by the first `s` vertices, 1 <= s <= N.
    pub fn face(&self, s: usize) -> Result<ConditionalSimplex> {
        if s == 0 || s > self.n() {
            return Err(Error::IndexOutOfRange { index: s, limit: self.n() });
        }
        // Any subfamily of an affinely independent family stays independent,
        // so reconstruction cannot fail.
        ConditionalSimplex::new(self.vertices[..s].to_vec())
    }
}

/// One cell of an iterated barycentric subdivision.
///
/// `path` lists the permutation chosen at each level, outermost first; the
/// last entry is this cell's own permutation (0-based positions into the
/// parent's vertex list). `vertices[k]` is the average of the parent
/// vertices at positions `path.last()[0..=k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdivisionCell {
    pub depth: usize,
    pub path: Vec<Vec<usize>>,
    pub vertices: Vec<RandomPoint>,
}

impl SubdivisionCell {
    /// This cell's own permutation (last step of the path).
    pub fn perm(&self) -> &[usize] {
        self.path.last().expect("cell path is nonempty")
    }

    /// Rebuilds the cell as a simplex in its own right.
    pub fn to_simplex(&self) -> Result<ConditionalSimplex> {
        ConditionalSimplex::new(self.vertices.clone())
    }
}

/// Average of the points selected by `idx` (ascending order fixes the
/// floating-point summation order, which keeps shared faces bit-identical).
pub(crate) fn mean_point(points: &[RandomPoint], idx: &[usize]) -> RandomPoint {
    let space = points[0].space().clone();
    let dim = points[0].dim();
    let atoms = points[0].atoms();
    let mut values = vec![0.0; atoms * dim];
    for &i in idx {
        let v = points[i].values();
        for (slot, &x) in values.iter_mut().zip(v.iter()) {
            *slot += x;
        }
    }
    let inv = 1.0 / idx.len() as f64;
    for slot in values.iter_mut() {
        *slot *= inv;
    }
    RandomPoint::new(space, dim, values).expect("average of valid points is valid")
}

/// All permutations of 0..n in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(factorial(n).unwrap_or(usize::MAX));
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(n, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}

pub(crate) fn factorial(n: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for k in 2..=n {
        acc = acc.checked_mul(k)?;
    }
    Some(acc)
}

/// Averages of every nonempty subset of `points`, indexed by bitmask - 1.
/// Summation is in ascending vertex order, so every cell that references a
/// subset sees the identical floating-point value.
pub(crate) fn subset_points(points: &[RandomPoint]) -> Vec<RandomPoint> {
    let n = points.len();
    let mut out = Vec::with_capacity((1usize << n) - 1);
    for mask in 1u32..(1u32 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        out.push(mean_point(points, &idx));
    }
    out
}

/// Cells of one barycentric subdivision round over the given vertex list,
/// in lexicographic permutation order.
pub(crate) fn subdivide_vertices(
    vertices: &[RandomPoint],
    parent_path: &[Vec<usize>],
) -> Vec<SubdivisionCell> {
    let n = vertices.len();
    let shared = subset_points(vertices);
    let perms = permutations(n);
    let mut cells = Vec::with_capacity(perms.len());
    for perm in perms {
        let mut cell_vertices = Vec::with_capacity(n);
        let mut mask = 0u32;
        for &p in &perm {
            mask |= 1 << p;
            cell_vertices.push(shared[(mask - 1) as usize].clone());
        }
        let mut path = parent_path.to_vec();
        path.push(perm);
        cells.push(SubdivisionCell { depth: path.len(), path, vertices: cell_vertices });
    }
    cells
}

/// One round of barycentric subdivision: N! cells in lexicographic
/// permutation order. Cell vertices are averages of affinely independent
/// points with strictly nested index sets, so they are themselves affinely
/// independent at every atom; no per-cell recheck is run here.
pub fn barycentric_subdivide(s: &ConditionalSimplex) -> Result<Vec<SubdivisionCell>> {
    let n = s.n();
    let needed = factorial(n).ok_or(Error::BudgetExceeded {
        needed: usize::MAX,
        budget: DEFAULT_CELL_BUDGET,
    })?;
    if needed > DEFAULT_CELL_BUDGET {
        return Err(Error::BudgetExceeded { needed, budget: DEFAULT_CELL_BUDGET });
    }
    Ok(subdivide_vertices(s.vertices(), &[]))
}

/// `m`-fold iterated subdivision: (N!)^m cells, paths in lexicographic
/// order level by level. The cell count is checked against `cell_budget`
/// before anything is materialized.
pub fn m_fold_subdivide(
    s: &ConditionalSimplex,
    m: usize,
    cell_budget: usize,
) -> Result<Vec<SubdivisionCell>> {
    if m == 0 {
        return Err(Error::InvalidConfig { reason: "subdivision depth must be at least 1" });
    }
    let fact = factorial(s.n());
    let needed = fact.and_then(|f| {
        let mut acc: usize = 1;
        for _ in 0..m {
            acc = acc.checked_mul(f)?;
        }
        Some(acc)
    });
    match needed {
        Some(c) if c <= cell_budget => {}
        _ => {
            return Err(Error::BudgetExceeded {
                needed: needed.unwrap_or(usize::MAX),
                budget: cell_budget,
            })
        }
    }
    // Depth-first expansion keeps paths in lexicographic order and only
    // holds one branch of intermediate cells at a time.
    let mut out = Vec::with_capacity(needed.unwrap());
    let mut stack: Vec<SubdivisionCell> = subdivide_vertices(s.vertices(), &[]);
    stack.reverse();
    while let Some(cell) = stack.pop() {
        if cell.depth == m {
            out.push(cell);
        } else {
            let children = subdivide_vertices(&cell.vertices, &cell.path);
            for child in children.into_iter().rev() {
                stack.push(child);
            }
        }
    }
    Ok(out)
}

/// Intersection of two sibling cells (same parent path, same depth).
///
/// With prefix sets P_j = pi({1..j}), the shared face is spanned by the
/// prefix averages at positions j where both permutations have equal
/// prefix sets. Position N always qualifies, so siblings always intersect.
pub fn cell_intersection(
    a: &SubdivisionCell,
    b: &SubdivisionCell,
) -> Result<ConditionalSimplex> {
    if a.depth != b.depth || a.path.len() != b.path.len() {
        return Err(Error::NotSiblings);
    }
    let lead = a.path.len() - 1;
    if a.path[..lead] != b.path[..lead] {
        return Err(Error::NotSiblings);
    }
    let pa = a.perm();
    let pb = b.perm();
    if pa.len() != pb.len() {
        return Err(Error::NotSiblings);
    }
    let n = pa.len();
    let mut mask_a = 0u32;
    let mut mask_b = 0u32;
    let mut shared = Vec::new();
    for j in 0..n {
        mask_a |= 1 << pa[j];
        mask_b |= 1 << pb[j];
        if mask_a == mask_b {
            // Equal prefix sets mean both cells hold the identical average
            // at position j, so either copy works.
            shared.push(a.vertices[j].clone());
        }
    }
    ConditionalSimplex::new(shared)
}

/// Locates, per atom, the first-round cell containing `x`, and groups atoms
/// by cell. Order-by-weight with a stable sort: descending weight, original
/// index breaking ties, which picks the lexicographically least admissible
/// permutation.
pub fn locate_cell(
    s: &ConditionalSimplex,
    x: &RandomPoint,
) -> Result<(Partition, Vec<SubdivisionCell>)> {
    let w = barycentric_coords(s, x, tol::COORD_TOL)?;
    let n = s.n();
    let atoms = s.atoms();
    let mut part_of = vec![0usize; atoms];
    let mut perms: Vec<Vec<usize>> = Vec::new();
    for atom in 0..atoms {
        let mut order: Vec<usize> = (0..n).collect();
        // Stable sort by descending clamped weight keeps smaller indices
        // first among ties.
        order.sort_by(|&i, &j| {
            w.at(atom, j)
                .partial_cmp(&w.at(atom, i))
                .expect("weights are finite")
        });
        let part = match perms.iter().position(|p| p == &order) {
            Some(k) => k,
            None => {
                perms.push(order);
                perms.len() - 1
            }
        };
        part_of[atom] = part;
    }
    let partition = Partition::new(s.space().clone(), part_of)?;
    let shared = subset_points(s.vertices());
    let cells = perms
        .into_iter()
        .map(|perm| {
            let mut vertices = Vec::with_capacity(n);
            let mut mask = 0u32;
            for &p in &perm {
                mask |= 1 << p;
                vertices.push(shared[(mask - 1) as usize].clone());
            }
            SubdivisionCell { depth: 1, path: vec![perm], vertices }
        })
        .collect();
    Ok((partition, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob_space::ProbSpace;

    fn unit_triangle(space: Arc<ProbSpace>) -> ConditionalSimplex {
        ConditionalSimplex::new(vec![
            RandomPoint::constant(space.clone(), &[0.0, 0.0]).unwrap(),
            RandomPoint::constant(space.clone(), &[1.0, 0.0]).unwrap(),
            RandomPoint::constant(space, &[0.0, 1.0]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_dependent_vertices() {
        let sp = ProbSpace::new(&[0.25, 0.75]).unwrap();
        let r = ConditionalSimplex::new(vec![
            RandomPoint::constant(sp.clone(), &[0.0]).unwrap(),
            RandomPoint::from_atom_rows(sp, &[vec![1.0], vec![0.0]]).unwrap(),
        ]);
        // Dependent only at the second atom, where both vertices collapse
        // to 0.
        assert_eq!(r.unwrap_err(), Error::AffinelyDependent { atom: 1 });
    }

    #[test]
    fn face_of_triangle() {
        let sp = ProbSpace::trivial();
        let t = unit_triangle(sp);
        let f = t.face(2).unwrap();
        assert_eq!(f.n(), 2);
        assert_eq!(f.vertex(1).atom(0), &[1.0, 0.0]);
        assert_eq!(t.face(0).unwrap_err(), Error::IndexOutOfRange { index: 0, limit: 3 });
        assert_eq!(t.face(4).unwrap_err(), Error::IndexOutOfRange { index: 4, limit: 3 });
    }

    #[test]
    fn subdivide_counts_and_order() {
        let sp = ProbSpace::trivial();
        let t = unit_triangle(sp);
        let cells = barycentric_subdivide(&t).unwrap();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].perm(), &[0, 1, 2]);
        assert_eq!(cells[5].perm(), &[2, 1, 0]);
        // Every cell ends at the barycenter.
        for cell in &cells {
            let last = cell.vertices.last().unwrap().atom(0);
            assert!((last[0] - 1.0 / 3.0).abs() < 1e-15);
            assert!((last[1] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn interval_subdivision_is_two_halves() {
        let sp = ProbSpace::trivial();
        let s = ConditionalSimplex::new(vec![
            RandomPoint::constant(sp.clone(), &[0.0]).unwrap(),
            RandomPoint::constant(sp, &[1.0]).unwrap(),
        ])
        .unwrap();
        let cells = barycentric_subdivide(&s).unwrap();
        assert_eq!(cells.len(), 2);
        assert_eq!(cells[0].vertices[0].atom(0), &[0.0]);
        assert_eq!(cells[0].vertices[1].atom(0), &[0.5]);
        assert_eq!(cells[1].vertices[0].atom(0), &[1.0]);
        assert_eq!(cells[1].vertices[1].atom(0), &[0.5]);
    }

    #[test]
    fn diameter_shrinks_by_the_stated_factor() {
        let sp = ProbSpace::trivial();
        let t = unit_triangle(sp);
        let bound = 2.0 / 3.0 * t.diam().value(0);
        for cell in barycentric_subdivide(&t).unwrap() {
            let d = cell.to_simplex().unwrap().diam().value(0);
            assert!(d <= bound + 1e-15, "cell diameter {d} exceeds bound {bound}");
        }
    }

    #[test]
    fn m_fold_counts_and_budget() {
        let sp = ProbSpace::trivial();
        let t = unit_triangle(sp);
        let cells = m_fold_subdivide(&t, 2, DEFAULT_CELL_BUDGET).unwrap();
        assert_eq!(cells.len(), 36);
        assert!(cells.iter().all(|c| c.depth == 2 && c.path.len() == 2));
        match m_fold_subdivide(&t, 2, 10) {
            Err(Error::BudgetExceeded { needed: 36, budget: 10 }) => {}
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn sibling_intersection_shared_face() {
        let sp = ProbSpace::trivial();
        let t = unit_triangle(sp);
        let cells = barycentric_subdivide(&t).unwrap();
        // perms [0,1,2] and [1,0,2] share prefix sets at positions 2 and 3.
        let shared = cell_intersection(&cells[0], &cells[2]).unwrap();
        assert_eq!(shared.n(), 2);
        assert_eq!(shared.vertex(0).atom(0), &[0.5, 0.0]);
        // Any two subdivision cells share at least the barycenter.
        for a in &cells {
            for b in &cells {
                let s = cell_intersection(a, b).unwrap();
                assert!(s.n() >= 1);
            }
        }
    }

    #[test]
    fn intersection_rejects_non_siblings() {
        let sp = ProbSpace::trivial();
        let t = unit_triangle(sp);
        let depth1 = barycentric_subdivide(&t).unwrap();
        let depth2 = m_fold_subdivide(&t, 2, DEFAULT_CELL_BUDGET).unwrap();
        assert_eq!(
            cell_intersection(&depth1[0], &depth2[0]).unwrap_err(),
            Error::NotSiblings
        );
        // Same depth, different parent.
        assert_eq!(
            cell_intersection(&depth2[0], &depth2[7]).unwrap_err(),
            Error::NotSiblings
        );
    }

    #[test]
    fn locate_cell_interior_point() {
        let sp = ProbSpace::trivial();
        let t = unit_triangle(sp.clone());
        // Weights (0.2, 0.5, 0.3) sort to permutation [1, 2, 0].
        let x = RandomPoint::constant(sp, &[0.5, 0.3]).unwrap();
        let (partition, cells) = locate_cell(&t, &x).unwrap();
        assert_eq!(partition.parts(), 1);
        assert_eq!(cells.len(), 1);
        assert_eq!(cells[0].perm(), &[1, 2, 0]);
    }

    #[test]
    fn locate_cell_splits_atoms() {
        let sp = ProbSpace::new(&[0.5, 0.5]).unwrap();
        let t = unit_triangle(sp.clone());
        let x = RandomPoint::from_atom_rows(
            sp,
            &[vec![0.6, 0.3], vec![0.3, 0.6]],
        )
        .unwrap();
        let (partition, cells) = locate_cell(&t, &x).unwrap();
        assert_eq!(partition.parts(), 2);
        assert_eq!(cells[0].perm(), &[1, 2, 0]);
        assert_eq!(cells[1].perm(), &[2, 1, 0]);
    }

    #[test]
    fn locate_cell_midpoint_tie_prefers_lower_index() {
        // On [0, 1] the midpoint solves to exactly (0.5, 0.5); the stable
        // sort must keep the identity permutation.
        let sp = ProbSpace::trivial();
        let s = ConditionalSimplex::new(vec![
            RandomPoint::constant(sp.clone(), &[0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0]).unwrap(),
        ])
        .unwrap();
        let x = RandomPoint::constant(sp, &[0.5]).unwrap();
        let (partition, cells) = locate_cell(&s, &x).unwrap();
        assert_eq!(partition.parts(), 1);
        assert_eq!(cells[0].perm(), &[0, 1]);
    }

    #[test]
    fn locate_cell_rejects_outside_point() {
        let sp = ProbSpace::trivial();
        let t = unit_triangle(sp.clone());
        let x = RandomPoint::constant(sp, &[0.9, 0.9]).unwrap();
        assert!(matches!(
            locate_cell(&t, &x),
            Err(Error::NotInSimplex { atom: 0, .. })
        ));
    }
}
