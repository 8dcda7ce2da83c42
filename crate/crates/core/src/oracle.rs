//! Independent brute-force references.
//!
//! Nothing here shares logic with the solvers: the grid search scans
//! barycentric lattice points, the root finder bisects, and the Sperner
//! scan sorts label multisets. Tests compare the fast paths against these.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::labeling::LabeledVertexSet;
use crate::prob_space::{check_same_space, RandomPoint, RandomScalar};
use crate::simplex::{ConditionalSimplex, SubdivisionCell};

/// Barycentric grid density for [`grid_fixed_point`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    /// Subdivisions per barycentric axis; the grid holds all weight
    /// vectors (k_1/r, ..., k_N/r) with nonnegative integer k summing
    /// to r.
    pub resolution: usize,
    /// Ceiling on the number of grid points visited.
    pub point_budget: usize,
}

impl Default for GridSpec {
    fn default() -> GridSpec {
        GridSpec { resolution: 1000, point_budget: 10_000_000 }
    }
}

/// C(res + n - 1, n - 1): the number of compositions of `res` into n
/// nonnegative parts.
fn composition_count(res: u128, parts: u128) -> u128 {
    if parts == 0 {
        return 0;
    }
    let k = parts - 1;
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..k {
        num = num.saturating_mul(res + k - i);
        den *= i + 1;
    }
    num / den
}

/// Exhaustive fixed point search: evaluates the residual ||f(X) - X|| at
/// every barycentric grid point of `s` and returns, per atom, the first
/// strict minimizer in lexicographic composition order (sigma-combined).
pub fn grid_fixed_point(
    f: &crate::solver::LocalFunction,
    s: &ConditionalSimplex,
    grid: &GridSpec,
) -> Result<RandomPoint> {
    if grid.resolution < 2 {
        return Err(Error::InvalidConfig { reason: "grid resolution must be at least 2" });
    }
    if f.dim() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: f.dim() });
    }
    let n = s.n();
    let count = composition_count(grid.resolution as u128, n as u128);
    if count > grid.point_budget as u128 {
        let needed = if count > usize::MAX as u128 { usize::MAX } else { count as usize };
        return Err(Error::BudgetExceeded { needed, budget: grid.point_budget });
    }
    let atoms = s.atoms();
    let dim = s.dim();
    let mut best_res = vec![f64::INFINITY; atoms];
    let mut best_rows: Vec<Vec<f64>> = vec![vec![0.0; dim]; atoms];
    let mut counts = vec![0usize; n];
    visit_compositions(grid.resolution, 0, &mut counts, &mut |counts| {
        let mut values = vec![0.0; atoms * dim];
        for (i, &k) in counts.iter().enumerate() {
            if k == 0 {
                continue;
            }
            let w = k as f64 / grid.resolution as f64;
            let vert = s.vertex(i).values();
            for (slot, &v) in values.iter_mut().zip(vert.iter()) {
                *slot += w * v;
            }
        }
        let x = RandomPoint::new(s.space().clone(), dim, values)?;
        let fx = f.eval(&x)?;
        for atom in 0..atoms {
            let r = crate::l0_linalg::dist(fx.atom(atom), x.atom(atom));
            if r < best_res[atom] {
                best_res[atom] = r;
                best_rows[atom].copy_from_slice(x.atom(atom));
            }
        }
        Ok(())
    })?;
    let mut values = Vec::with_capacity(atoms * dim);
    for row in &best_rows {
        values.extend_from_slice(row);
    }
    RandomPoint::new(s.space().clone(), dim, values)
}

/// Visits every composition of `res` into `counts.len()` parts, in
/// lexicographic order of the count vector.
fn visit_compositions(
    res: usize,
    depth: usize,
    counts: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]) -> Result<()>,
) -> Result<()> {
    let n = counts.len();
    let used: usize = counts[..depth].iter().sum();
    if depth + 1 == n {
        counts[depth] = res - used;
        visit(counts)?;
        return Ok(());
    }
    for k in 0..=(res - used) {
        counts[depth] = k;
        visit_compositions(res, depth + 1, counts, visit)?;
    }
    Ok(())
}

/// Per-atom bisection for a root of `g(atom, x)` on [lo, hi], run until
/// the bracket width drops to `tol`. The endpoint signs must differ
/// (`NoSignChange` otherwise); exact zeros at an endpoint short-circuit.
pub fn bisection_root<F>(
    g: F,
    lo: &RandomScalar,
    hi: &RandomScalar,
    tol: f64,
) -> Result<RandomScalar>
where
    F: Fn(usize, f64) -> Result<f64>,
{
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidConfig { reason: "bisection tolerance must be positive" });
    }
    check_same_space(lo.space(), hi.space())?;
    let atoms = lo.atoms();
    let mut out = Vec::with_capacity(atoms);
    for w in 0..atoms {
        let (mut a, mut b) = (lo.value(w), hi.value(w));
        if a > b {
            core::mem::swap(&mut a, &mut b);
        }
        let fa = g(w, a)?;
        let fb = g(w, b)?;
        if fa == 0.0 {
            out.push(a);
            continue;
        }
        if fb == 0.0 {
            out.push(b);
            continue;
        }
        if (fa > 0.0) == (fb > 0.0) {
            return Err(Error::NoSignChange { atom: w });
        }
        let mut iterations = 0;
        while b - a > tol && iterations < 200 {
            let m = 0.5 * (a + b);
            let fm = g(w, m)?;
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if (fm > 0.0) == (fa > 0.0) {
                a = m;
            } else {
                b = m;
            }
            iterations += 1;
        }
        out.push(0.5 * (a + b));
    }
    RandomScalar::new(lo.space().clone(), out)
}

/// Exhaustive Sperner scan: per atom, the indices of all cells whose
/// vertex labels form exactly {1, ..., N}. Independent of the fast path
/// in every step: vertices resolve by value equality and completeness by
/// sorting the label multiset.
pub fn sperner_enumerate(
    cells: &[SubdivisionCell],
    l: &LabeledVertexSet,
) -> Result<Vec<Vec<usize>>> {
    let n = l.base().n();
    let atoms = l.base().atoms();
    let mut out = vec![Vec::new(); atoms];
    for (c_idx, cell) in cells.iter().enumerate() {
        let mut fields = Vec::with_capacity(cell.vertices.len());
        for (v_idx, v) in cell.vertices.iter().enumerate() {
            let pos = l
                .vertices()
                .iter()
                .position(|u| u.values() == v.values())
                .ok_or(Error::UnlabeledVertex { cell: c_idx, vertex: v_idx })?;
            fields.push(&l.labels()[pos]);
        }
        for atom in 0..atoms {
            let mut labs: Vec<usize> = fields.iter().map(|f| f.label(atom)).collect();
            labs.sort_unstable();
            let complete =
                labs.len() == n && labs.iter().enumerate().all(|(i, &v)| v == i + 1);
            if complete {
                out[atom].push(c_idx);
            }
        }
    }
    Ok(out)
}

pub mod builtin {
    //! Small one-atom fixed point problems with independently known
    //! answers, used as regression anchors and oracle cross-checks.

    use alloc::vec;
    use alloc::vec::Vec;

    use crate::math;
    use crate::prob_space::{ProbSpace, RandomPoint};
    use crate::simplex::ConditionalSimplex;
    use crate::solver::{DomainHint, LocalFunction};

    /// A test problem: a self-map of a simplex with one known fixed point.
    pub struct BuiltinProblem {
        pub name: &'static str,
        /// What the map is and where the fixed point value comes from.
        pub description: &'static str,
        pub simplex: ConditionalSimplex,
        pub function: LocalFunction,
        /// The unique fixed point in the simplex.
        pub fixed_point: RandomPoint,
        /// A Lipschitz constant of the map on the simplex.
        pub lipschitz: f64,
        /// Grid density giving the oracle roughly the accuracy of the
        /// solver's default tolerances at desk scale.
        pub oracle_resolution: usize,
    }

    fn interval01() -> ConditionalSimplex {
        let sp = ProbSpace::trivial();
        ConditionalSimplex::new(vec![
            RandomPoint::constant(sp.clone(), &[0.0]).unwrap(),
            RandomPoint::constant(sp, &[1.0]).unwrap(),
        ])
        .unwrap()
    }

    fn corner_triangle() -> ConditionalSimplex {
        let sp = ProbSpace::trivial();
        ConditionalSimplex::new(vec![
            RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap(),
            RandomPoint::constant(sp, &[0.0, 1.0]).unwrap(),
        ])
        .unwrap()
    }

    fn scalar_problem(
        name: &'static str,
        description: &'static str,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        fixed_point: f64,
        lipschitz: f64,
    ) -> BuiltinProblem {
        let sp = ProbSpace::trivial();
        BuiltinProblem {
            name,
            description,
            simplex: interval01(),
            function: LocalFunction::atom_wise(1, DomainHint::Interval, move |_, x, out| {
                out[0] = f(x[0]);
                Ok(())
            }),
            fixed_point: RandomPoint::constant(sp, &[fixed_point]).unwrap(),
            lipschitz,
            oracle_resolution: 10_000,
        }
    }

    /// The five stock problems, one-atom spaces throughout.
    pub fn problems() -> Vec<BuiltinProblem> {
        let sp = ProbSpace::trivial();
        let mut out = vec![
            scalar_problem(
                "cos-interval",
                "x -> cos x on [0,1]; fixed point is the Dottie number, \
                 the root of cos x = x",
                math::cos,
                0.739_085_133_215_160_7,
                // sup |sin| on [0,1] = sin 1.
                0.841_470_984_807_896_5,
            ),
            scalar_problem(
                "exp-decay",
                "x -> exp(-x) on [0,1]; fixed point is the omega constant, \
                 the root of x e^x = 1",
                |x| math::exp(-x),
                0.567_143_290_409_783_8,
                // sup |e^{-x}| on [0,1] = 1 at x = 0.
                1.0,
            ),
            scalar_problem(
                "quadratic-third",
                "x -> (x^2 + 1)/3 on [0,1]; fixed point is the smaller root \
                 of x^2 - 3x + 1 = 0",
                |x| (x * x + 1.0) / 3.0,
                (3.0 - math::sqrt(5.0)) / 2.0,
                // sup |2x/3| on [0,1].
                2.0 / 3.0,
            ),
        ];

        let c = [0.25, 0.25];
        out.push(BuiltinProblem {
            name: "planar-contraction",
            description: "x -> c + (x - c)/2 on the corner triangle, with c \
                          an interior point; the unique fixed point is c",
            simplex: corner_triangle(),
            function: LocalFunction::atom_wise(2, DomainHint::Simplex, move |_, x, out| {
                out[0] = c[0] + (x[0] - c[0]) / 2.0;
                out[1] = c[1] + (x[1] - c[1]) / 2.0;
                Ok(())
            }),
            fixed_point: RandomPoint::constant(sp.clone(), &c).unwrap(),
            lipschitz: 0.5,
            oracle_resolution: 300,
        });

        // Rotation by 30 degrees scaled by 0.3 about c. The image of the
        // triangle is a disk of radius 0.3 x 0.79 around c, inside the
        // triangle (c is at distance 0.25 from the nearest side).
        let cos30 = math::sqrt(3.0) / 2.0;
        let sin30 = 0.5;
        out.push(BuiltinProblem {
            name: "planar-rotation",
            description: "x -> c + 0.3 R(30 deg) (x - c) on the corner \
                          triangle; the unique fixed point is c",
            simplex: corner_triangle(),
            function: LocalFunction::atom_wise(2, DomainHint::Simplex, move |_, x, out| {
                let u = x[0] - c[0];
                let v = x[1] - c[1];
                out[0] = c[0] + 0.3 * (cos30 * u - sin30 * v);
                out[1] = c[1] + 0.3 * (sin30 * u + cos30 * v);
                Ok(())
            }),
            fixed_point: RandomPoint::constant(sp, &c).unwrap(),
            lipschitz: 0.3,
            oracle_resolution: 300,
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::LabeledVertexSet;
    use crate::math;
    use crate::prob_space::ProbSpace;
    use crate::simplex::barycentric_subdivide;
    use crate::solver::{DomainHint, LocalFunction};

    fn interval(space: alloc::sync::Arc<ProbSpace>) -> ConditionalSimplex {
        ConditionalSimplex::new(vec![
            RandomPoint::constant(space.clone(), &[0.0]).unwrap(),
            RandomPoint::constant(space, &[1.0]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn grid_identity_returns_first_point() {
        let sp = ProbSpace::trivial();
        let s = interval(sp);
        let f = LocalFunction::from_point_map(1, DomainHint::Interval, |x| Ok(x.clone()));
        let g = GridSpec { resolution: 10, point_budget: 1000 };
        let p = grid_fixed_point(&f, &s, &g).unwrap();
        // Composition (0, 10) comes first: all weight on the last vertex.
        assert_eq!(p.atom(0), &[1.0]);
    }

    #[test]
    fn grid_constant_at_node_is_exact() {
        let sp = ProbSpace::trivial();
        let s = interval(sp.clone());
        let c = RandomPoint::constant(sp, &[0.25]).unwrap();
        let f = LocalFunction::from_point_map(1, DomainHint::Interval, move |_| Ok(c.clone()));
        let g = GridSpec { resolution: 4, point_budget: 1000 };
        let p = grid_fixed_point(&f, &s, &g).unwrap();
        assert_eq!(p.atom(0), &[0.25]);
    }

    #[test]
    fn grid_locates_cosine_fixed_point() {
        let sp = ProbSpace::trivial();
        let s = interval(sp);
        let f = LocalFunction::atom_wise(1, DomainHint::Interval, |_, x, out| {
            out[0] = math::cos(x[0]);
            Ok(())
        });
        let g = GridSpec { resolution: 100_000, point_budget: 200_000 };
        let p = grid_fixed_point(&f, &s, &g).unwrap();
        assert!((p.atom(0)[0] - 0.7390851332151607).abs() <= 1e-5);
    }

    #[test]
    fn grid_budget_is_enforced() {
        let sp = ProbSpace::trivial();
        let s = ConditionalSimplex::new(vec![
            RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
            RandomPoint::constant(sp.clone(), &[1.0, 0.0]).unwrap(),
            RandomPoint::constant(sp, &[0.0, 1.0]).unwrap(),
        ])
        .unwrap();
        let f = LocalFunction::from_point_map(2, DomainHint::Simplex, |x| Ok(x.clone()));
        let g = GridSpec { resolution: 100, point_budget: 10 };
        assert!(matches!(
            grid_fixed_point(&f, &s, &g),
            Err(Error::BudgetExceeded { needed: 5151, budget: 10 })
        ));
    }

    #[test]
    fn grid_is_per_atom_argmin() {
        let sp = ProbSpace::new(&[0.5, 0.5]).unwrap();
        let s = interval(sp);
        let f = LocalFunction::atom_wise(1, DomainHint::Interval, |atom, x, out| {
            out[0] = if atom == 0 { 0.25 } else { 0.75 };
            let _ = x;
            Ok(())
        });
        let g = GridSpec { resolution: 4, point_budget: 1000 };
        let p = grid_fixed_point(&f, &s, &g).unwrap();
        assert_eq!(p.atom(0), &[0.25]);
        assert_eq!(p.atom(1), &[0.75]);
    }

    #[test]
    fn bisection_finds_simple_roots() {
        let sp = ProbSpace::trivial();
        let lo = RandomScalar::constant(sp.clone(), 0.0).unwrap();
        let hi = RandomScalar::constant(sp.clone(), 1.0).unwrap();
        let r = bisection_root(|_, x| Ok(x - 0.5), &lo, &hi, 1e-12).unwrap();
        assert!((r.value(0) - 0.5).abs() <= 1e-12);
        let r = bisection_root(|_, x| Ok(math::cos(x) - x), &lo, &hi, 1e-12).unwrap();
        assert!((r.value(0) - 0.7390851332151607).abs() <= 1e-11);
        let hi2 = RandomScalar::constant(sp, 2.0).unwrap();
        let r = bisection_root(|_, x| Ok(x * x * x - 1.0), &lo, &hi2, 1e-12).unwrap();
        assert!((r.value(0) - 1.0).abs() <= 1e-11);
    }

    #[test]
    fn bisection_requires_sign_change() {
        let sp = ProbSpace::trivial();
        let lo = RandomScalar::constant(sp.clone(), 0.0).unwrap();
        let hi = RandomScalar::constant(sp, 1.0).unwrap();
        assert_eq!(
            bisection_root(|_, x| Ok(x * x + 1.0), &lo, &hi, 1e-9).unwrap_err(),
            Error::NoSignChange { atom: 0 }
        );
    }

    #[test]
    fn sperner_matches_hand_count() {
        let sp = ProbSpace::trivial();
        let base = interval(sp);
        let f = LocalFunction::atom_wise(1, DomainHint::Interval, |_, x, out| {
            out[0] = x[0] * x[0];
            Ok(())
        });
        let cells = barycentric_subdivide(&base).unwrap();
        let vertices = vec![
            base.vertex(0).clone(),
            base.vertex(1).clone(),
            cells[0].vertices[1].clone(),
        ];
        let l = LabeledVertexSet::canonical(&f, base, vertices).unwrap();
        assert_eq!(sperner_enumerate(&cells, &l).unwrap(), vec![vec![0]]);
    }

    #[test]
    fn builtins_are_fixed_points_with_valid_metadata() {
        for p in builtin::problems() {
            let image = p.function.eval(&p.fixed_point).unwrap();
            let d = crate::l0_linalg::dist(image.atom(0), p.fixed_point.atom(0));
            assert!(d <= 1e-12, "{}: fixed point drifts by {d}", p.name);
            assert!(
                crate::l0_linalg::barycentric_coords(
                    &p.simplex,
                    &p.fixed_point,
                    crate::tol::COORD_TOL
                )
                .is_ok(),
                "{}: fixed point outside its simplex",
                p.name
            );
            assert!(p.lipschitz > 0.0 && p.lipschitz <= 1.0, "{}", p.name);
            assert!(p.oracle_resolution >= 2, "{}", p.name);
        }
    }

    #[test]
    fn builtin_values_agree_with_bisection() {
        let sp = ProbSpace::trivial();
        let lo = RandomScalar::constant(sp.clone(), 0.0).unwrap();
        let hi = RandomScalar::constant(sp, 1.0).unwrap();
        let cases: [(usize, fn(f64) -> f64); 3] = [
            (0, |x| math::cos(x) - x),
            (1, |x| math::exp(-x) - x),
            (2, |x| (x * x + 1.0) / 3.0 - x),
        ];
        let problems = builtin::problems();
        for (idx, g) in cases {
            let root = bisection_root(|_, x| Ok(g(x)), &lo, &hi, 1e-13).unwrap();
            let stored = problems[idx].fixed_point.atom(0)[0];
            assert!(
                (root.value(0) - stored).abs() <= 1e-11,
                "{}: stored {} vs bisection {}",
                problems[idx].name,
                stored,
                root.value(0)
            );
        }
    }
}
