//! Acceptance checks for the shipped library: each test covers one numbered
//! release criterion at its stated tolerance and time budget and prints a
//! single PASS line on success. Quantitative expectations come from
//! independent oracles (grid search, bisection, exhaustive enumeration) or
//! from closed-form solutions computed inline; nothing is compared against
//! the solver's own output.

use std::sync::Arc;
use std::time::{Duration, Instant};

use condfix_core::l0_linalg::{affinely_independent, barycentric_coords, inner, norm};
use condfix_core::labeling::{canonical_label, find_completely_labeled, is_proper, parity_audit};
use condfix_core::oracle::{bisection_root, builtin, grid_fixed_point, sperner_enumerate, GridSpec};
use condfix_core::prob_space::sigma_combine;
use condfix_core::simplex::m_fold_subdivide;
use condfix_core::solver::{ivt_solve, project, solve_convex_fixed_point, solve_simplex_fixed_point};
use condfix_core::{
    ConditionalSimplex, ConvexBody, DomainHint, LabelField, LabeledVertexSet, LocalFunction,
    Partition, ProbSpace, ProjectionOracle, RandomPoint, RandomScalar, SolverConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn assert_within(start: Instant, budget: Duration, what: &str) {
    let used = start.elapsed();
    assert!(used <= budget, "{what} took {used:?}, budget {budget:?}");
}

/// Random simplex with n vertices in R^d, distinct geometry per atom.
/// Difference vectors form a lower-triangular matrix with diagonal
/// entries at least 0.8, so affine independence holds by construction.
fn random_simplex(rng: &mut ChaCha8Rng, space: &Arc<ProbSpace>, n: usize, d: usize) -> ConditionalSimplex {
    assert!(n >= 1 && n <= d + 1);
    let atoms = space.atoms();
    let base: Vec<Vec<f64>> = (0..atoms)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut vertices = Vec::with_capacity(n);
    vertices.push(RandomPoint::from_atom_rows(space.clone(), &base).unwrap());
    for i in 1..n {
        let rows: Vec<Vec<f64>> = base
            .iter()
            .map(|row| {
                (0..d)
                    .map(|j| {
                        if j + 1 == i {
                            row[j] + rng.random_range(0.8..1.5)
                        } else if j + 1 < i {
                            row[j] + rng.random_range(-0.3..0.3)
                        } else {
                            row[j]
                        }
                    })
                    .collect()
            })
            .collect();
        vertices.push(RandomPoint::from_atom_rows(space.clone(), &rows).unwrap());
    }
    ConditionalSimplex::new(vertices).unwrap()
}

fn unit_interval(space: Arc<ProbSpace>) -> ConditionalSimplex {
    ConditionalSimplex::new(vec![
        RandomPoint::constant(space.clone(), &[0.0]).unwrap(),
        RandomPoint::constant(space, &[1.0]).unwrap(),
    ])
    .unwrap()
}

fn factorial(n: usize) -> usize {
    (2..=n).product::<usize>().max(1)
}

// Criterion 1: every cell of the m-fold subdivision, m in 1..=3 and
// N in 2..=4, has per-atom diameter at most ((N-1)/N)^m times the base
// diameter, within 1e-9 relative. Budget 10 s.
#[test]
fn criterion_01_subdivision_diameter_decay() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let space = ProbSpace::new(&[0.3, 0.7]).unwrap();
    for n in 2..=4usize {
        let s = random_simplex(&mut rng, &space, n, n - 1);
        let d0 = s.diam();
        for m in 1..=3usize {
            let cells = m_fold_subdivide(&s, m, 1_000_000).unwrap();
            assert_eq!(cells.len(), factorial(n).pow(m as u32), "cell count N={n} m={m}");
            let factor = ((n as f64 - 1.0) / n as f64).powi(m as i32);
            for cell in &cells {
                let dc = cell.to_simplex().unwrap().diam();
                for w in 0..space.atoms() {
                    let bound = factor * d0.value(w) * (1.0 + 1e-9);
                    assert!(
                        dc.value(w) <= bound,
                        "N={n} m={m} atom {w}: diam {} > bound {bound}",
                        dc.value(w)
                    );
                }
            }
        }
    }
    assert_within(start, Duration::from_secs(10), "criterion 01");
    println!("criterion 01 PASS: m-fold subdivision diameter decay within 1e-9 relative");
}

// Criterion 2: 500 random proper labelings (N <= 4, up to 4 atoms) have an
// odd number of completely labeled cells at every atom, in exact agreement
// with the exhaustive enumeration oracle. Budget 30 s.
#[test]
fn criterion_02_sperner_parity_vs_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for trial in 0..500usize {
        let n = rng.random_range(2..=4usize);
        let atoms = rng.random_range(1..=4usize);
        let m = if n <= 3 { rng.random_range(1..=2usize) } else { 1 };
        let probs = vec![1.0 / atoms as f64; atoms];
        let space = ProbSpace::new(&probs).unwrap();
        // Corner simplex in d = n-1, constant across atoms.
        let mut verts = Vec::with_capacity(n);
        verts.push(RandomPoint::constant(space.clone(), &vec![0.0; n - 1]).unwrap());
        for i in 0..n - 1 {
            let mut c = vec![0.0; n - 1];
            c[i] = 1.0;
            verts.push(RandomPoint::constant(space.clone(), &c).unwrap());
        }
        let s = ConditionalSimplex::new(verts).unwrap();
        let cells = m_fold_subdivide(&s, m, 10_000).unwrap();

        // Distinct subdivision vertices, keyed by exact bits. Shared faces
        // are summed in a fixed order upstream, so the keying is sound.
        let mut seen: std::collections::BTreeMap<Vec<u64>, usize> = Default::default();
        let mut points: Vec<RandomPoint> = Vec::new();
        for cell in &cells {
            for v in &cell.vertices {
                let key: Vec<u64> = v.values().iter().map(|x| x.to_bits()).collect();
                seen.entry(key).or_insert_with(|| {
                    points.push(v.clone());
                    points.len() - 1
                });
            }
        }

        // Proper labels drawn uniformly from the support of each vertex's
        // coordinates, independently per atom.
        let mut fields = Vec::with_capacity(points.len());
        for p in &points {
            let coords = barycentric_coords(&s, p, 1e-8).unwrap();
            let mut labels = Vec::with_capacity(atoms);
            for w in 0..atoms {
                let support: Vec<usize> =
                    (0..n).filter(|&i| coords.at(w, i) > 1e-6).collect();
                assert!(!support.is_empty(), "trial {trial}: empty support");
                labels.push(support[rng.random_range(0..support.len())] + 1);
            }
            fields.push(LabelField::new(space.clone(), n, labels).unwrap());
        }
        let lvs = LabeledVertexSet::new(s.clone(), points, fields).unwrap();
        assert!(is_proper(&lvs).unwrap(), "trial {trial}: labeling not proper");

        let counts = parity_audit(&cells, &lvs).unwrap();
        let oracle = sperner_enumerate(&cells, &lvs).unwrap();
        let found = find_completely_labeled(&cells, &lvs).unwrap();
        for w in 0..atoms {
            assert_eq!(counts[w] % 2, 1, "trial {trial} atom {w}: even count {}", counts[w]);
            assert_eq!(counts[w], oracle[w].len(), "trial {trial} atom {w}: oracle disagrees");
            let chosen = found.cell_indices[found.partition.part_of(w)];
            assert!(oracle[w].contains(&chosen), "trial {trial} atom {w}: winner not in oracle set");
        }
    }
    assert_within(start, Duration::from_secs(30), "criterion 02");
    println!("criterion 02 PASS: 500 random proper labelings, parity odd and equal to enumeration oracle");
}

// Criterion 3: the two-atom, four-vertex labeling fixture. At the first
// atom the image has weights (1/4, 0, 3/4, 0), so label 1 is the smallest
// admissible; at the second atom weights (2/5, 2/5, 0, 1/5) force label 3.
// Budget 1 s.
#[test]
fn criterion_03_two_atom_labeling_fixture() {
    let start = Instant::now();
    let space = ProbSpace::new(&[0.5, 0.5]).unwrap();
    let s = ConditionalSimplex::new(vec![
        RandomPoint::constant(space.clone(), &[0.0, 0.0, 0.0]).unwrap(),
        RandomPoint::constant(space.clone(), &[1.0, 0.0, 0.0]).unwrap(),
        RandomPoint::constant(space.clone(), &[0.0, 1.0, 0.0]).unwrap(),
        RandomPoint::constant(space.clone(), &[0.0, 0.0, 1.0]).unwrap(),
    ])
    .unwrap();
    // Y = (X1 + X2 + X3) / 3.
    let y = RandomPoint::constant(space.clone(), &[1.0 / 3.0, 1.0 / 3.0, 0.0]).unwrap();
    // f(Y) = (1/4) X1 + (3/4) X3 at atom 0 and
    // f(Y) = (2/5) X1 + (2/5) X2 + (1/5) X4 at atom 1.
    let f = LocalFunction::atom_wise(3, DomainHint::Simplex, |atom, _x, out| {
        if atom == 0 {
            out.copy_from_slice(&[0.0, 0.75, 0.0]);
        } else {
            out.copy_from_slice(&[0.4, 0.0, 0.2]);
        }
        Ok(())
    });
    let field = canonical_label(&f, &s, &y).unwrap();
    assert_eq!(field.label(0), 1, "atom 0 label");
    assert_eq!(field.label(1), 3, "atom 1 label");
    assert_within(start, Duration::from_secs(1), "criterion 03");
    println!("criterion 03 PASS: fixture labels (1, 3) reproduced");
}

// Criterion 4: the cosine problem on [0, 1] converges with residual at
// most 1e-6 in at most 60 rounds, and the answer is within 1e-4 of the
// bisection oracle's root of cos(x) - x. Budget 5 s.
#[test]
fn criterion_04_cosine_fixed_point() {
    let start = Instant::now();
    let space = ProbSpace::trivial();
    let s = unit_interval(space.clone());
    let f = LocalFunction::atom_wise(1, DomainHint::Interval, |_, x, out| {
        out[0] = x[0].cos();
        Ok(())
    });
    let cfg = SolverConfig::default();
    let r = solve_simplex_fixed_point(&f, &s, &cfg).unwrap();
    assert!(r.converged, "cosine solve did not converge");
    assert!(r.rounds_used <= 60, "rounds used {}", r.rounds_used);
    assert!(r.residual.max_value() <= 1e-6, "residual {}", r.residual.max_value());

    let lo = RandomScalar::constant(space.clone(), 0.0).unwrap();
    let hi = RandomScalar::constant(space, 1.0).unwrap();
    let root = bisection_root(|_, x| Ok(x.cos() - x), &lo, &hi, 1e-10).unwrap();
    assert!((root.value(0) - 0.739_085_1).abs() <= 1e-6, "oracle sanity {}", root.value(0));

    let y = r.point.atom(0)[0];
    assert!((y - 0.739_085_1).abs() <= 1e-4, "solution {y}");
    assert!((y - root.value(0)).abs() <= 1e-4, "solution {y} vs oracle {}", root.value(0));
    assert_within(start, Duration::from_secs(5), "criterion 04");
    println!("criterion 04 PASS: cosine fixed point {y:.7} within 1e-4 of bisection oracle");
}

// Criterion 5: 20 random two-atom problems glued from one-atom problems.
// The conditional solve must equal the sigma-combination of the one-atom
// solves bit for bit. Budget 60 s.
#[test]
fn criterion_05_solver_locality_bitwise() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let cfg = SolverConfig::default();
    for trial in 0..20usize {
        // Self-maps of [0, 1]: a + b sin(x + phi) stays in [0.05, 0.85].
        let a: [f64; 2] = [rng.random_range(0.35..0.55), rng.random_range(0.35..0.55)];
        let b: [f64; 2] = [rng.random_range(0.05..0.25), rng.random_range(0.05..0.25)];
        let phi: [f64; 2] = [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)];

        let glued = LocalFunction::atom_wise(1, DomainHint::Interval, move |w, x, out| {
            out[0] = a[w] + b[w] * (x[0] + phi[w]).sin();
            Ok(())
        });
        let sp2 = ProbSpace::new(&[0.5, 0.5]).unwrap();
        let both = solve_simplex_fixed_point(&glued, &unit_interval(sp2.clone()), &cfg).unwrap();
        assert!(both.converged, "trial {trial}: glued solve did not converge");

        let mut lifted = Vec::with_capacity(2);
        for w in 0..2usize {
            let (aw, bw, pw) = (a[w], b[w], phi[w]);
            let solo = LocalFunction::atom_wise(1, DomainHint::Interval, move |_, x, out| {
                out[0] = aw + bw * (x[0] + pw).sin();
                Ok(())
            });
            let sp1 = ProbSpace::trivial();
            let r = solve_simplex_fixed_point(&solo, &unit_interval(sp1), &cfg).unwrap();
            assert!(r.converged, "trial {trial} atom {w}: solo solve did not converge");
            assert_eq!(
                both.point.atom(w)[0].to_bits(),
                r.point.atom(0)[0].to_bits(),
                "trial {trial} atom {w}: point differs"
            );
            assert_eq!(
                both.residual.value(w).to_bits(),
                r.residual.value(0).to_bits(),
                "trial {trial} atom {w}: residual differs"
            );
            lifted.push(RandomPoint::constant(sp2.clone(), r.point.atom(0)).unwrap());
        }
        let combined = sigma_combine(&Partition::discrete(sp2), &lifted).unwrap();
        let lhs: Vec<u64> = both.point.values().iter().map(|x| x.to_bits()).collect();
        let rhs: Vec<u64> = combined.values().iter().map(|x| x.to_bits()).collect();
        assert_eq!(lhs, rhs, "trial {trial}: sigma-combination differs");
    }
    assert_within(start, Duration::from_secs(60), "criterion 05");
    println!("criterion 05 PASS: 20 glued solves equal sigma-combined one-atom solves bitwise");
}

/// Axis box with per-coordinate bounds, used to exercise the custom
/// projection oracle path. Projection is coordinate clamping.
struct ClampBody {
    space: Arc<ProbSpace>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl ProjectionOracle for ClampBody {
    fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }
    fn dim(&self) -> usize {
        self.lo.len()
    }
    fn project_atom(&self, _atom: usize, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = x[i].clamp(self.lo[i], self.hi[i]);
        }
    }
    fn center_atom(&self, _atom: usize, out: &mut [f64]) {
        for i in 0..out.len() {
            out[i] = 0.5 * (self.lo[i] + self.hi[i]);
        }
    }
    fn radius_bound(&self) -> Option<RandomScalar> {
        let r: f64 = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| 0.25 * (b - a) * (b - a))
            .sum::<f64>()
            .sqrt();
        Some(RandomScalar::constant(self.space.clone(), r).unwrap())
    }
}

// Criterion 6: nonexpansiveness and the variational inequality of the
// projection, within 1e-8, for 1000 random draws per body kind. Budget 30 s.
#[test]
fn criterion_06_projection_properties() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for kind in 0..4usize {
        for draw in 0..1000usize {
            let atoms = rng.random_range(1..=3usize);
            let d = rng.random_range(1..=3usize);
            let probs = vec![1.0 / atoms as f64; atoms];
            let space = ProbSpace::new(&probs).unwrap();
            let body = match kind {
                0 => {
                    let c: Vec<Vec<f64>> = (0..atoms)
                        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
                        .collect();
                    let radius: Vec<f64> =
                        (0..atoms).map(|_| rng.random_range(0.3..1.5)).collect();
                    ConvexBody::Ball {
                        center: RandomPoint::from_atom_rows(space.clone(), &c).unwrap(),
                        radius: RandomScalar::new(space.clone(), radius).unwrap(),
                    }
                }
                1 => {
                    let lo: Vec<Vec<f64>> = (0..atoms)
                        .map(|_| (0..d).map(|_| rng.random_range(-1.0..0.0)).collect())
                        .collect();
                    let hi: Vec<Vec<f64>> = lo
                        .iter()
                        .map(|row| row.iter().map(|x| x + rng.random_range(0.2..2.0)).collect())
                        .collect();
                    ConvexBody::Box {
                        lower: RandomPoint::from_atom_rows(space.clone(), &lo).unwrap(),
                        upper: RandomPoint::from_atom_rows(space.clone(), &hi).unwrap(),
                    }
                }
                2 => ConvexBody::Simplex(random_simplex(&mut rng, &space, d + 1, d)),
                _ => {
                    let lo: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..0.0)).collect();
                    let hi: Vec<f64> = lo.iter().map(|x| x + rng.random_range(0.2..2.0)).collect();
                    ConvexBody::Custom(Box::new(ClampBody { space: space.clone(), lo, hi }))
                }
            };
            let sample = |rng: &mut ChaCha8Rng| {
                let rows: Vec<Vec<f64>> = (0..atoms)
                    .map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect())
                    .collect();
                RandomPoint::from_atom_rows(space.clone(), &rows).unwrap()
            };
            let x = sample(&mut rng);
            let y = sample(&mut rng);
            let z = project(&body, &sample(&mut rng)).unwrap();
            let px = project(&body, &x).unwrap();
            let py = project(&body, &y).unwrap();
            let lhs = norm(&px.sub(&py).unwrap());
            let rhs = norm(&x.sub(&y).unwrap());
            let vi = inner(&x.sub(&px).unwrap(), &z.sub(&px).unwrap()).unwrap();
            for w in 0..atoms {
                assert!(
                    lhs.value(w) <= rhs.value(w) + 1e-8,
                    "kind {kind} draw {draw} atom {w}: expansion {} > {}",
                    lhs.value(w),
                    rhs.value(w)
                );
                assert!(
                    vi.value(w) <= 1e-8,
                    "kind {kind} draw {draw} atom {w}: variational inequality {}",
                    vi.value(w)
                );
            }
        }
    }
    assert_within(start, Duration::from_secs(30), "criterion 06");
    println!("criterion 06 PASS: projection nonexpansive and variational inequality within 1e-8, 1000 draws x 4 body kinds");
}

// Criterion 7: the quarter-turn on the unit ball fixes only the origin, and
// the box-constrained linear system matches its closed-form solution to
// 1e-6. Budget 10 s.
#[test]
fn criterion_07_convex_body_fixed_points() {
    let start = Instant::now();
    let sp = ProbSpace::trivial();
    let ball = ConvexBody::Ball {
        center: RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
        radius: RandomScalar::constant(sp.clone(), 1.0).unwrap(),
    };
    let rot = LocalFunction::atom_wise(2, DomainHint::Ball, |_, x, out| {
        out[0] = -x[1];
        out[1] = x[0];
        Ok(())
    });
    let r = solve_convex_fixed_point(&rot, &ball, &SolverConfig::default()).unwrap();
    assert!(r.converged, "rotation solve did not converge");
    let p = r.point.atom(0);
    let nrm = (p[0] * p[0] + p[1] * p[1]).sqrt();
    assert!(nrm <= 1e-4, "rotation fixed point norm {nrm}");

    let boxy = ConvexBody::Box {
        lower: RandomPoint::constant(sp.clone(), &[0.0, 0.0]).unwrap(),
        upper: RandomPoint::constant(sp, &[1.0, 1.0]).unwrap(),
    };
    let f = LocalFunction::atom_wise(2, DomainHint::Box, |_, x, out| {
        out[0] = 0.5 + x[1] / 4.0;
        out[1] = 0.5 - x[0] / 4.0;
        Ok(())
    });
    let cfg = SolverConfig { tol_residual: 1e-7, ..SolverConfig::default() };
    let r = solve_convex_fixed_point(&f, &boxy, &cfg).unwrap();
    assert!(r.converged, "linear solve did not converge");
    // Cramer's rule on (I - A) z = b with A = [[0, 1/4], [-1/4, 0]],
    // b = (1/2, 1/2): the unconstrained solution is interior to the box.
    let det = 1.0 + 0.25 * 0.25;
    let z = [(0.5 + 0.25 * 0.5) / det, (0.5 - 0.25 * 0.5) / det];
    let p = r.point.atom(0);
    assert!((p[0] - z[0]).abs() <= 1e-6, "x {} vs oracle {}", p[0], z[0]);
    assert!((p[1] - z[1]).abs() <= 1e-6, "y {} vs oracle {}", p[1], z[1]);
    assert_within(start, Duration::from_secs(10), "criterion 07");
    println!("criterion 07 PASS: rotation fixes origin within 1e-4, linear system matches Cramer oracle to 1e-6");
}

// Criterion 8: the two-atom intermediate value fixture, increasing on one
// atom and decreasing on the other, lands within 1e-5 of the per-atom
// bisection roots. Budget 10 s.
#[test]
fn criterion_08_ivt_two_atom_fixture() {
    let start = Instant::now();
    let space = ProbSpace::new(&[0.5, 0.5]).unwrap();
    // Increasing x^3 at atom 0, decreasing 1 - x at atom 1: the solve must
    // split the atoms between the two monotonicity branches.
    let f = LocalFunction::atom_wise(1, DomainHint::Interval, |atom, x, out| {
        out[0] = if atom == 0 { x[0] * x[0] * x[0] } else { 1.0 - x[0] };
        Ok(())
    });
    let lo = RandomScalar::constant(space.clone(), 0.0).unwrap();
    let hi = RandomScalar::constant(space.clone(), 1.0).unwrap();
    let target = RandomScalar::constant(space, 0.5).unwrap();
    let r = ivt_solve(&f, &lo, &hi, &target, &SolverConfig::default()).unwrap();
    assert!(r.converged, "ivt solve did not converge");

    let root = bisection_root(
        |atom, x| Ok(if atom == 0 { x * x * x - 0.5 } else { 0.5 - x }),
        &lo,
        &hi,
        1e-10,
    )
    .unwrap();
    assert!((root.value(0) - 0.5f64.powf(1.0 / 3.0)).abs() <= 1e-9, "oracle sanity");
    assert!((root.value(1) - 0.5).abs() <= 1e-9, "oracle sanity");
    for w in 0..2 {
        assert!(
            (r.value.value(w) - root.value(w)).abs() <= 1e-5,
            "atom {w}: {} vs oracle {}",
            r.value.value(w),
            root.value(w)
        );
    }
    assert_within(start, Duration::from_secs(10), "criterion 08");
    println!(
        "criterion 08 PASS: ivt solution ({:.6}, {:.6}) within 1e-5 of bisection roots",
        r.value.value(0),
        r.value.value(1)
    );
}

// Criterion 9: on one-atom spaces the solver agrees with brute-force grid
// search on every built-in problem, within 10 * (tol + grid spacing), at
// resolution 10^4 for intervals and 300 per axis in the plane. Budget 2 min.
#[test]
fn criterion_09_classical_reduction_vs_grid() {
    let start = Instant::now();
    let cfg = SolverConfig::default();
    let problems = builtin::problems();
    assert_eq!(problems.len(), 5, "expected five built-in problems");
    for p in &problems {
        let d = p.simplex.dim();
        let resolution = if d == 1 { 10_000 } else { 300 };
        let r = solve_simplex_fixed_point(&p.function, &p.simplex, &cfg).unwrap();
        assert!(r.converged, "{}: solve did not converge", p.name);
        let grid = GridSpec { resolution, point_budget: 10_000_000 };
        let g = grid_fixed_point(&p.function, &p.simplex, &grid).unwrap();
        let spacing = p.simplex.diam().max_value() / resolution as f64;
        let bound = 10.0 * (cfg.tol_residual + spacing);
        let vs_grid = norm(&r.point.sub(&g).unwrap()).max_value();
        let vs_known = norm(&r.point.sub(&p.fixed_point).unwrap()).max_value();
        assert!(vs_grid <= bound, "{}: |solver - grid| = {vs_grid} > {bound}", p.name);
        assert!(vs_known <= bound, "{}: |solver - known| = {vs_known} > {bound}", p.name);
    }
    assert_within(start, Duration::from_secs(120), "criterion 09");
    println!("criterion 09 PASS: solver matches grid oracle on all 5 built-in problems");
}

// Criterion 10: structural invariants. Coefficient round-trip to 1e-8,
// affine independence invariant under positive scaling and translation,
// sigma-combined simplexes valid with per-atom diameters preserved, and
// solver iterates contained in the base simplex with the per-round
// diameter factor (N-1)/N honored. Budget 2 min.
#[test]
fn criterion_10_structural_invariants() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1010);

    // Coefficient round-trip.
    for _ in 0..60 {
        let atoms = rng.random_range(1..=3usize);
        let n = rng.random_range(2..=4usize);
        let d = rng.random_range(n - 1..=4usize);
        let probs = vec![1.0 / atoms as f64; atoms];
        let space = ProbSpace::new(&probs).unwrap();
        let s = random_simplex(&mut rng, &space, n, d);
        let mut weights = vec![0.0; atoms * n];
        for w in 0..atoms {
            let row: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
            let total: f64 = row.iter().sum();
            for i in 0..n {
                weights[w * n + i] = row[i] / total;
            }
        }
        let cw = condfix_core::ConvexWeights::new(space.clone(), n, weights.clone()).unwrap();
        let x = cw.combine(s.vertices()).unwrap();
        let back = barycentric_coords(&s, &x, 1e-8).unwrap();
        for w in 0..atoms {
            for i in 0..n {
                let err = (back.at(w, i) - weights[w * n + i]).abs();
                assert!(err <= 1e-8, "round-trip error {err} at atom {w} index {i}");
            }
        }
        let again = back.combine(s.vertices()).unwrap();
        assert!(norm(&again.sub(&x).unwrap()).max_value() <= 1e-8, "recombination drift");
    }

    // Affine independence under positive scaling and translation, and
    // degeneracy detection stability under the same maps.
    for _ in 0..40 {
        let atoms = rng.random_range(1..=3usize);
        let n = rng.random_range(2..=4usize);
        let d = rng.random_range(n - 1..=4usize);
        let probs = vec![1.0 / atoms as f64; atoms];
        let space = ProbSpace::new(&probs).unwrap();
        let s = random_simplex(&mut rng, &space, n, d);
        let scale: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.2..5.0)).collect();
        let shift_rows: Vec<Vec<f64>> = (0..atoms)
            .map(|_| (0..d).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let shift = RandomPoint::from_atom_rows(space.clone(), &shift_rows).unwrap();
        let transform = |p: &RandomPoint| {
            let rows: Vec<Vec<f64>> = (0..atoms)
                .map(|w| p.atom(w).iter().map(|x| scale[w] * x).collect())
                .collect();
            RandomPoint::from_atom_rows(space.clone(), &rows).unwrap().add(&shift).unwrap()
        };
        let moved: Vec<RandomPoint> = s.vertices().iter().map(|v| transform(v)).collect();
        let ind = affinely_independent(&moved).unwrap();
        for w in 0..atoms {
            assert_eq!(ind.value(w), 1.0, "transformed simplex dependent at atom {w}");
        }
        // A duplicated vertex stays dependent after the same transform.
        let mut degenerate = moved.clone();
        degenerate[0] = degenerate[n - 1].clone();
        let dep = affinely_independent(&degenerate).unwrap();
        for w in 0..atoms {
            assert_eq!(dep.value(w), 0.0, "duplicate vertex read as independent at atom {w}");
        }
    }

    // Sigma-combined simplexes are valid and inherit per-atom diameters.
    for _ in 0..40 {
        let atoms = rng.random_range(2..=4usize);
        let n = rng.random_range(2..=4usize);
        let d = n - 1;
        let probs = vec![1.0 / atoms as f64; atoms];
        let space = ProbSpace::new(&probs).unwrap();
        let sa = random_simplex(&mut rng, &space, n, d);
        let sb = random_simplex(&mut rng, &space, n, d);
        let part_of: Vec<usize> = (0..atoms).map(|_| rng.random_range(0..2usize)).collect();
        let norm_part: Vec<usize> = if part_of.iter().all(|&p| p == part_of[0]) {
            vec![0; atoms]
        } else {
            part_of
        };
        let parts = *norm_part.iter().max().unwrap() + 1;
        let partition = Partition::new(space.clone(), norm_part.clone()).unwrap();
        let sources = [&sa, &sb];
        let mut verts = Vec::with_capacity(n);
        for i in 0..n {
            let picks: Vec<RandomPoint> =
                (0..parts).map(|p| sources[p].vertex(i).clone()).collect();
            verts.push(sigma_combine(&partition, &picks).unwrap());
        }
        let glued = ConditionalSimplex::new(verts).unwrap();
        let dg = glued.diam();
        for w in 0..atoms {
            let src = sources[norm_part[w]].diam().value(w);
            assert_eq!(dg.value(w).to_bits(), src.to_bits(), "diameter not inherited at atom {w}");
        }
    }

    // Iterate containment and per-round diameter decay on the built-in
    // problems: the answer and the certificate stay in the base simplex,
    // and each round shrinks the traced diameter by at least (N-1)/N.
    for p in builtin::problems() {
        let cfg = SolverConfig::default();
        let r = solve_simplex_fixed_point(&p.function, &p.simplex, &cfg).unwrap();
        assert!(r.converged, "{}: solve did not converge", p.name);
        assert!(
            barycentric_coords(&p.simplex, &r.point, 1e-7).is_ok(),
            "{}: answer left the base simplex",
            p.name
        );
        for v in &r.certificate.vertices {
            assert!(
                barycentric_coords(&p.simplex, v, 1e-7).is_ok(),
                "{}: certificate vertex left the base simplex",
                p.name
            );
        }
        let n = p.simplex.n() as f64;
        let factor = (n - 1.0) / n * (1.0 + 1e-9);
        for r2 in 1..r.diam_trace.len() {
            assert!(
                r.diam_trace[r2] <= r.diam_trace[r2 - 1] * factor,
                "{}: trace ratio {} at round {r2}",
                p.name,
                r.diam_trace[r2] / r.diam_trace[r2 - 1]
            );
        }
        // The reported residual is reproducible from the reported point.
        let fy = p.function.eval(&r.point).unwrap();
        let again = norm(&fy.sub(&r.point).unwrap());
        for w in 0..p.simplex.atoms() {
            assert!(
                (again.value(w) - r.residual.value(w)).abs() <= 1e-12,
                "{}: residual not reproducible at atom {w}",
                p.name
            );
        }
    }
    assert_within(start, Duration::from_secs(120), "criterion 10");
    println!("criterion 10 PASS: round-trip, invariance, sigma-combination, and containment invariants hold");
}
