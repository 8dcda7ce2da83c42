//! Per-atom linear algebra on L0 objects: scalar product, norm, diameter,
//! affine independence, and barycentric coordinates.
//!
//! Everything here is a plain real computation repeated at every atom. The
//! matrices are tiny (N <= d+1 <= 8 at desk scale), so the solvers favor
//! numerical robustness and determinism over speed: Householder QR for the
//! coordinate least squares, one-sided Jacobi for singular values.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::prob_space::{check_same_space, ProbSpace, RandomPoint, RandomScalar};
use crate::simplex::ConditionalSimplex;
use crate::tol;

/// Convex combination weights: one N-vector per atom, entries >= -1e-10
/// (read back as 0), summing to 1 within 1e-9 at every atom.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexWeights {
    space: Arc<ProbSpace>,
    n: usize,
    weights: Vec<f64>,
}

impl ConvexWeights {
    /// `weights` is atom-major: atom w occupies `weights[w*n .. (w+1)*n]`.
    pub fn new(space: Arc<ProbSpace>, n: usize, weights: Vec<f64>) -> Result<ConvexWeights> {
        if n == 0 || weights.len() != space.atoms() * n {
            return Err(Error::DimensionMismatch {
                expected: space.atoms() * n.max(1),
                got: weights.len(),
            });
        }
        for atom in 0..space.atoms() {
            let row = &weights[atom * n..(atom + 1) * n];
            let mut sum = 0.0;
            for &w in row {
                if !w.is_finite() {
                    return Err(Error::NonFiniteValue { atom });
                }
                if w < -tol::WEIGHT_CLAMP {
                    return Err(Error::NotInSimplex { atom, violation: -w });
                }
                sum += w;
            }
            if (sum - 1.0).abs() > tol::WEIGHT_SUM_TOL {
                return Err(Error::NotInSimplex { atom, violation: (sum - 1.0).abs() });
            }
        }
        Ok(ConvexWeights { space, n, weights })
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> usize {
        self.space.atoms()
    }

    /// Weight i at the given atom; negative dust reads as 0.
    pub fn at(&self, atom: usize, i: usize) -> f64 {
        let w = self.weights[atom * self.n + i];
        if w < 0.0 {
            0.0
        } else {
            w
        }
    }

    /// The raw stored row, dust and all.
    pub fn row(&self, atom: usize) -> &[f64] {
        &self.weights[atom * self.n..(atom + 1) * self.n]
    }

    /// Forms the convex combination of `vertices` with these weights.
    pub fn combine(&self, vertices: &[RandomPoint]) -> Result<RandomPoint> {
        if vertices.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: vertices.len() });
        }
        let dim = vertices[0].dim();
        for v in vertices {
            check_same_space(&self.space, v.space())?;
            if v.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
            }
        }
        let atoms = self.space.atoms();
        let mut values = vec![0.0; atoms * dim];
        for atom in 0..atoms {
            for i in 0..self.n {
                let w = self.at(atom, i);
                let row = vertices[i].atom(atom);
                for j in 0..dim {
                    values[atom * dim + j] += w * row[j];
                }
            }
        }
        RandomPoint::new(self.space.clone(), dim, values)
    }
}

/// Per-atom Euclidean scalar product.
pub fn inner(x: &RandomPoint, y: &RandomPoint) -> Result<RandomScalar> {
    check_same_space(x.space(), y.space())?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: y.dim() });
    }
    let values = (0..x.atoms())
        .map(|w| dot(x.atom(w), y.atom(w)))
        .collect();
    RandomScalar::new(x.space().clone(), values)
}

/// Per-atom Euclidean norm.
pub fn norm(x: &RandomPoint) -> RandomScalar {
    let values = (0..x.atoms())
        .map(|w| math::sqrt(dot(x.atom(w), x.atom(w))))
        .collect();
    RandomScalar::new(x.space().clone(), values).expect("norm of a valid point is finite")
}

/// Per-atom max over pairs of ||X_i - X_j|| (the essential supremum is the
/// atom-wise max on finite spaces).
pub fn diam(points: &[RandomPoint]) -> Result<RandomScalar> {
    if points.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let space = points[0].space();
    let dim = points[0].dim();
    for p in points {
        check_same_space(space, p.space())?;
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
    }
    let values = (0..space.atoms())
        .map(|w| {
            let mut best: f64 = 0.0;
            for i in 0..points.len() {
                for j in (i + 1)..points.len() {
                    best = best.max(dist(points[i].atom(w), points[j].atom(w)));
                }
            }
            best
        })
        .collect();
    RandomScalar::new(space.clone(), values)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        s += d * d;
    }
    math::sqrt(s)
}

/// Per-atom 0/1 indicator of affine independence: 1 where the difference
/// vectors {X_i - X_N} have rank N-1. Rank uses singular values with the
/// relative threshold of [`tol::RANK_REL_TOL`], so the decision is
/// invariant under positive scaling and translation.
pub fn affinely_independent(points: &[RandomPoint]) -> Result<RandomScalar> {
    if points.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let space = points[0].space();
    let dim = points[0].dim();
    for p in points {
        check_same_space(space, p.space())?;
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
    }
    let n = points.len();
    let values = (0..space.atoms())
        .map(|w| {
            if n == 1 {
                // A single point is affinely independent by convention.
                return 1.0;
            }
            // Difference matrix, d rows, n-1 columns, column-major.
            let rows = dim;
            let cols = n - 1;
            let mut mat = vec![0.0; rows * cols];
            let last = points[n - 1].atom(w);
            for c in 0..cols {
                let p = points[c].atom(w);
                for r in 0..rows {
                    mat[c * rows + r] = p[r] - last[r];
                }
            }
            let sv = jacobi_singular_values(&mut mat, rows, cols);
            let smax = sv.iter().fold(0.0f64, |a, &b| a.max(b));
            let rank = sv.iter().filter(|&&s| s > tol::RANK_REL_TOL * smax).count();
            if smax > 0.0 && rank == cols {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    RandomScalar::new(space.clone(), values)
}

/// One-sided Jacobi: orthogonalizes the columns of a column-major matrix
/// in place; the singular values are the resulting column norms. Exact
/// enough for rank decisions on the tiny matrices used here.
fn jacobi_singular_values(mat: &mut [f64], rows: usize, cols: usize) -> Vec<f64> {
    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..cols {
            for j in (i + 1)..cols {
                let (ci, cj) = (i * rows, j * rows);
                let mut a = 0.0;
                let mut b = 0.0;
                let mut c = 0.0;
                for r in 0..rows {
                    a += mat[ci + r] * mat[ci + r];
                    b += mat[cj + r] * mat[cj + r];
                    c += mat[ci + r] * mat[cj + r];
                }
                if c.abs() <= 1e-15 * math::sqrt(a * b) || c == 0.0 {
                    continue;
                }
                rotated = true;
                // Rotation angle zeroing the (i, j) inner product.
                let zeta = (b - a) / (2.0 * c);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + math::sqrt(1.0 + zeta * zeta))
                } else {
                    -1.0 / (-zeta + math::sqrt(1.0 + zeta * zeta))
                };
                let cs = 1.0 / math::sqrt(1.0 + t * t);
                let sn = cs * t;
                for r in 0..rows {
                    let vi = mat[ci + r];
                    let vj = mat[cj + r];
                    mat[ci + r] = cs * vi - sn * vj;
                    mat[cj + r] = sn * vi + cs * vj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (0..cols)
        .map(|cidx| {
            let mut s = 0.0;
            for r in 0..rows {
                s += mat[cidx * rows + r] * mat[cidx * rows + r];
            }
            math::sqrt(s)
        })
        .collect()
}

/// Barycentric coordinates of `x` with respect to a simplex.
///
/// Per atom this solves the (d+1) x N system [vertices; 1] λ = [x; 1] by
/// Householder least squares. The point passes when the fit residual stays
/// within `tol` and no weight drops below -`tol`; offending weights inside
/// the tolerance are clamped to 0 and the row renormalized, so the result
/// is a valid [`ConvexWeights`]. Uniqueness of the weights is exactly the
/// affine independence of the vertices.
pub fn barycentric_coords(
    simplex: &ConditionalSimplex,
    x: &RandomPoint,
    tol: f64,
) -> Result<ConvexWeights> {
    coords_for_vertices(simplex.vertices(), x, tol)
}

pub(crate) fn coords_for_vertices(
    vertices: &[RandomPoint],
    x: &RandomPoint,
    tol: f64,
) -> Result<ConvexWeights> {
    if vertices.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let space = x.space();
    let dim = x.dim();
    for v in vertices {
        check_same_space(space, v.space())?;
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
        }
    }
    let n = vertices.len();
    let m = dim + 1;
    let mut weights = vec![0.0; space.atoms() * n];
    let mut a = vec![0.0; m * n];
    let mut b = vec![0.0; m];
    for atom in 0..space.atoms() {
        // Row-major system matrix: vertex coordinates stacked over a row
        // of ones enforcing the affine constraint.
        for (c, v) in vertices.iter().enumerate() {
            let col = v.atom(atom);
            for r in 0..dim {
                a[r * n + c] = col[r];
            }
            a[dim * n + c] = 1.0;
        }
        b[..dim].copy_from_slice(x.atom(atom));
        b[dim] = 1.0;
        let (lambda, residual) = match householder_lstsq(&mut a, &mut b, m, n) {
            Some(out) => out,
            None => return Err(Error::DegenerateVertices { atom }),
        };
        if residual > tol {
            return Err(Error::NotInSimplex { atom, violation: residual });
        }
        let worst = lambda.iter().cloned().fold(0.0f64, f64::min);
        if worst < -tol {
            return Err(Error::NotInSimplex { atom, violation: -worst });
        }
        // Clamp dust and renormalize so the stored weights are convex.
        let mut sum = 0.0;
        let row = &mut weights[atom * n..(atom + 1) * n];
        for (slot, &l) in row.iter_mut().zip(lambda.iter()) {
            *slot = l.max(0.0);
            sum += *slot;
        }
        for slot in row.iter_mut() {
            *slot /= sum;
        }
    }
    ConvexWeights::new(space.clone(), n, weights)
}

/// Affine coordinates of `x` with respect to `vertices`, atom-major.
/// Unlike `coords_for_vertices` the entries may be negative or exceed one:
/// the rows solve the same stacked system but no hull membership is
/// requested, only affine independence of the vertices.
pub(crate) fn affine_coords(vertices: &[RandomPoint], x: &RandomPoint) -> Result<Vec<Vec<f64>>> {
    if vertices.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let space = x.space();
    let dim = x.dim();
    for v in vertices {
        check_same_space(space, v.space())?;
        if v.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: v.dim() });
        }
    }
    let n = vertices.len();
    let m = dim + 1;
    let mut rows = Vec::with_capacity(space.atoms());
    let mut a = vec![0.0; m * n];
    let mut b = vec![0.0; m];
    for atom in 0..space.atoms() {
        for (c, v) in vertices.iter().enumerate() {
            let col = v.atom(atom);
            for r in 0..dim {
                a[r * n + c] = col[r];
            }
            a[dim * n + c] = 1.0;
        }
        b[..dim].copy_from_slice(x.atom(atom));
        b[dim] = 1.0;
        match householder_lstsq(&mut a, &mut b, m, n) {
            Some((mu, _)) => rows.push(mu),
            None => return Err(Error::DegenerateVertices { atom }),
        }
    }
    Ok(rows)
}

/// Householder QR least squares for a row-major m x n system, m >= n.
/// Returns the solution and the residual norm, or None when a diagonal of
/// R falls below the relative rank threshold (dependent columns).
fn householder_lstsq(a: &mut [f64], b: &mut [f64], m: usize, n: usize) -> Option<(Vec<f64>, f64)> {
    debug_assert!(m >= n);
    let mut rdiag = vec![0.0; n];
    for k in 0..n {
        let mut norm_sq = 0.0;
        for i in k..m {
            norm_sq += a[i * n + k] * a[i * n + k];
        }
        let norm = math::sqrt(norm_sq);
        if norm == 0.0 {
            rdiag[k] = 0.0;
            continue;
        }
        let alpha = if a[k * n + k] >= 0.0 { -norm } else { norm };
        // Householder vector v = column - alpha e_k, stored in place.
        a[k * n + k] -= alpha;
        let mut vtv = 0.0;
        for i in k..m {
            vtv += a[i * n + k] * a[i * n + k];
        }
        if vtv > 0.0 {
            for col in (k + 1)..n {
                let mut vta = 0.0;
                for i in k..m {
                    vta += a[i * n + k] * a[i * n + col];
                }
                let f = 2.0 * vta / vtv;
                for i in k..m {
                    a[i * n + col] -= f * a[i * n + k];
                }
            }
            let mut vtb = 0.0;
            for i in k..m {
                vtb += a[i * n + k] * b[i];
            }
            let f = 2.0 * vtb / vtv;
            for i in k..m {
                b[i] -= f * a[i * n + k];
            }
        }
        rdiag[k] = alpha;
    }
    let scale = rdiag.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
    if scale == 0.0 {
        return None;
    }
    for r in &rdiag {
        if r.abs() <= 1e-12 * scale {
            return None;
        }
    }
    // Back substitution on R (strict upper part still lives in `a`).
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = b[k];
        for col in (k + 1)..n {
            s -= a[k * n + col] * x[col];
        }
        x[k] = s / rdiag[k];
    }
    let mut res_sq = 0.0;
    for i in n..m {
        res_sq += b[i] * b[i];
    }
    Some((x, math::sqrt(res_sq)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob_space::ProbSpace;
    use crate::simplex::ConditionalSimplex;
    use alloc::vec;

    fn two_atom() -> Arc<ProbSpace> {
        ProbSpace::new(&[0.5, 0.5]).unwrap()
    }

    #[test]
    fn inner_orthogonal_basis() {
        let sp = two_atom();
        let e1 = RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap();
        let e2 = RandomPoint::constant(sp, &[0.0, 1.0]).unwrap();
        let ip = inner(&e1, &e2).unwrap();
        assert_eq!(ip.values(), &[0.0, 0.0]);
    }

    #[test]
    fn inner_all_ones() {
        let sp = two_atom();
        let x = RandomPoint::constant(sp, &[1.0, 1.0, 1.0]).unwrap();
        let ip = inner(&x, &x).unwrap();
        assert_eq!(ip.values(), &[3.0, 3.0]);
    }

    #[test]
    fn inner_hand_computed() {
        let sp = two_atom();
        let x = RandomPoint::from_atom_rows(sp.clone(), &[vec![1.0, 2.0], vec![0.0, 1.0]]).unwrap();
        let y = RandomPoint::from_atom_rows(sp, &[vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let ip = inner(&x, &y).unwrap();
        assert_eq!(ip.values(), &[11.0, 6.0]);
    }

    #[test]
    fn norm_cases() {
        let sp = ProbSpace::trivial();
        let zero = RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap();
        assert_eq!(norm(&zero).values(), &[0.0]);
        let p = RandomPoint::constant(sp, &[3.0, 4.0]).unwrap();
        assert_eq!(norm(&p).values(), &[5.0]);
    }

    #[test]
    fn diam_cases() {
        let sp = two_atom();
        let o = RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap();
        let e1 = RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap();
        let e2 = RandomPoint::constant(sp, &[0.0, 1.0]).unwrap();
        assert_eq!(diam(core::slice::from_ref(&o)).unwrap().values(), &[0.0, 0.0]);
        assert_eq!(diam(&[o.clone(), e1.clone()]).unwrap().values(), &[1.0, 1.0]);
        let d = diam(&[o, e1, e2]).unwrap();
        for &v in d.values() {
            assert!((v - core::f64::consts::SQRT_2).abs() < 1e-15);
        }
    }

    #[test]
    fn indicator_pair_is_independent() {
        // 1_A and 1_{A^c} on a two-atom space: values (1,0) and (0,1).
        let sp = two_atom();
        let a = RandomPoint::from_atom_rows(sp.clone(), &[vec![1.0], vec![0.0]]).unwrap();
        let ac = RandomPoint::from_atom_rows(sp, &[vec![0.0], vec![1.0]]).unwrap();
        let ind = affinely_independent(&[a, ac]).unwrap();
        assert_eq!(ind.values(), &[1.0, 1.0]);
    }

    #[test]
    fn four_points_in_plane_dependent() {
        let sp = two_atom();
        let pts = [
            RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[0.0, 1.0]).unwrap(),
            RandomPoint::constant(sp, &[1.0, 1.0]).unwrap(),
        ];
        let ind = affinely_independent(&pts).unwrap();
        assert_eq!(ind.values(), &[0.0, 0.0]);
    }

    #[test]
    fn corner_triangle_independent() {
        let sp = two_atom();
        let pts = [
            RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap(),
            RandomPoint::constant(sp, &[0.0, 1.0]).unwrap(),
        ];
        let ind = affinely_independent(&pts).unwrap();
        assert_eq!(ind.values(), &[1.0, 1.0]);
    }

    #[test]
    fn collinear_dependent() {
        let sp = ProbSpace::trivial();
        let pts = [
            RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap(),
            RandomPoint::constant(sp, &[2.0, 0.0]).unwrap(),
        ];
        let ind = affinely_independent(&pts).unwrap();
        assert_eq!(ind.values(), &[0.0]);
    }

    #[test]
    fn coords_at_vertices_and_barycenter() {
        let sp = two_atom();
        let verts = vec![
            RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[0.0, 1.0]).unwrap(),
        ];
        let s = ConditionalSimplex::new(verts.clone()).unwrap();
        let w = barycentric_coords(&s, &verts[1], tol::COORD_TOL).unwrap();
        for atom in 0..2 {
            assert!((w.at(atom, 0) - 0.0).abs() < 1e-12);
            assert!((w.at(atom, 1) - 1.0).abs() < 1e-12);
            assert!((w.at(atom, 2) - 0.0).abs() < 1e-12);
        }
        let bary = RandomPoint::constant(sp, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        let w = barycentric_coords(&s, &bary, tol::COORD_TOL).unwrap();
        for atom in 0..2 {
            for i in 0..3 {
                assert!((w.at(atom, i) - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coords_indicator_interval() {
        // Vertices 1_A, 1_{A^c}; X = 0.25 everywhere. On the A atom the
        // vertex values are (1, 0), so lambda = (0.25, 0.75); mirrored on
        // the other atom.
        let sp = two_atom();
        let a = RandomPoint::from_atom_rows(sp.clone(), &[vec![1.0], vec![0.0]]).unwrap();
        let ac = RandomPoint::from_atom_rows(sp.clone(), &[vec![0.0], vec![1.0]]).unwrap();
        let s = ConditionalSimplex::new(vec![a, ac]).unwrap();
        let x = RandomPoint::constant(sp, &[0.25]).unwrap();
        let w = barycentric_coords(&s, &x, tol::COORD_TOL).unwrap();
        assert!((w.at(0, 0) - 0.25).abs() < 1e-12);
        assert!((w.at(0, 1) - 0.75).abs() < 1e-12);
        assert!((w.at(1, 0) - 0.75).abs() < 1e-12);
        assert!((w.at(1, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn coords_reject_outside_point() {
        let sp = ProbSpace::trivial();
        let verts = vec![
            RandomPoint::constant(sp.clone(), &[0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0]).unwrap(),
        ];
        let s = ConditionalSimplex::new(verts).unwrap();
        let x = RandomPoint::constant(sp, &[1.5]).unwrap();
        match barycentric_coords(&s, &x, tol::COORD_TOL) {
            Err(Error::NotInSimplex { atom: 0, violation }) => assert!(violation > 0.4),
            other => panic!("expected NotInSimplex, got {other:?}"),
        }
    }

    #[test]
    fn coords_reject_off_hull_point() {
        // A 2-vertex simplex in d=2: points off the segment's line fail on
        // the fit residual.
        let sp = ProbSpace::trivial();
        let verts = vec![
            RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap(),
        ];
        let s = ConditionalSimplex::new(verts).unwrap();
        let x = RandomPoint::constant(sp, &[0.5, 0.3]).unwrap();
        match barycentric_coords(&s, &x, tol::COORD_TOL) {
            Err(Error::NotInSimplex { atom: 0, violation }) => {
                assert!((violation - 0.3).abs() < 1e-9)
            }
            other => panic!("expected NotInSimplex, got {other:?}"),
        }
    }

    #[test]
    fn lstsq_exact_square() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![5.0, 10.0];
        let (x, res) = householder_lstsq(&mut a, &mut b, 2, 2).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn lstsq_detects_dependent_columns() {
        let mut a = vec![1.0, 2.0, 2.0, 4.0, 3.0, 6.0];
        let mut b = vec![1.0, 2.0, 3.0];
        assert!(householder_lstsq(&mut a, &mut b, 3, 2).is_none());
    }
}
