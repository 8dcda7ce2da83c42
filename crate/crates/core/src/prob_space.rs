//! Finite probability spaces and the random objects living on them.
//!
//! Atoms all carry strictly positive mass, so "almost surely" means "at
//! every atom" throughout the crate: equalities and inequalities of random
//! objects are checked at each atom with no null-set escape hatch.
//!
//! Atom order is the input order and every per-atom vector uses it, which
//! keeps serialization and parallel evaluation deterministic.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::solver::LocalFunction;
use crate::tol;

/// A finite probability space: atoms 0..K-1 with positive masses summing
/// to 1. Masses are renormalized on construction when the input sum is
/// within 1e-9 of 1, and rejected otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbSpace {
    probs: Vec<f64>,
}

impl ProbSpace {
    pub fn new(probs: &[f64]) -> Result<Arc<ProbSpace>> {
        if probs.is_empty() {
            return Err(Error::EmptySpace);
        }
        for (atom, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFiniteValue { atom });
            }
            if p <= 0.0 {
                return Err(Error::NonPositiveProbability { atom, value: p });
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > tol::MASS_INPUT_TOL {
            return Err(Error::MassNotOne { sum });
        }
        let normalized = probs.iter().map(|p| p / sum).collect();
        Ok(Arc::new(ProbSpace { probs: normalized }))
    }

    /// The one-atom space, the classical setting.
    pub fn trivial() -> Arc<ProbSpace> {
        ProbSpace::new(&[1.0]).expect("one-atom space is valid")
    }

    pub fn atoms(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, atom: usize) -> f64 {
        self.probs[atom]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Two space handles refer to the same space when they are the same
/// allocation or hold identical masses. Value comparison keeps spaces
/// round-tripped through files compatible with freshly built ones.
pub(crate) fn same_space(a: &Arc<ProbSpace>, b: &Arc<ProbSpace>) -> bool {
    Arc::ptr_eq(a, b) || a.probs == b.probs
}

pub(crate) fn check_same_space(a: &Arc<ProbSpace>, b: &Arc<ProbSpace>) -> Result<()> {
    if same_space(a, b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch)
    }
}

/// An element of L0: one real per atom.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomScalar {
    space: Arc<ProbSpace>,
    values: Vec<f64>,
}

impl RandomScalar {
    pub fn new(space: Arc<ProbSpace>, values: Vec<f64>) -> Result<RandomScalar> {
        if values.len() != space.atoms() {
            return Err(Error::DimensionMismatch {
                expected: space.atoms(),
                got: values.len(),
            });
        }
        if let Some(atom) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { atom });
        }
        Ok(RandomScalar { space, values })
    }

    pub fn constant(space: Arc<ProbSpace>, value: f64) -> Result<RandomScalar> {
        let atoms = space.atoms();
        RandomScalar::new(space, alloc::vec![value; atoms])
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn atoms(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, atom: usize) -> f64 {
        self.values[atom]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Atom-wise maximum, the finite-space essential supremum.
    pub fn max_value(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
    }
}

/// An element of (L0)^d: one real d-vector per atom, stored atom-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomPoint {
    space: Arc<ProbSpace>,
    dim: usize,
    values: Vec<f64>,
}

impl RandomPoint {
    /// `values` is atom-major: atom w occupies `values[w*dim .. (w+1)*dim]`.
    pub fn new(space: Arc<ProbSpace>, dim: usize, values: Vec<f64>) -> Result<RandomPoint> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        if values.len() != space.atoms() * dim {
            return Err(Error::DimensionMismatch {
                expected: space.atoms() * dim,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue { atom: i / dim });
        }
        Ok(RandomPoint { space, dim, values })
    }

    /// The deterministic point with the same coordinates at every atom.
    pub fn constant(space: Arc<ProbSpace>, coords: &[f64]) -> Result<RandomPoint> {
        let atoms = space.atoms();
        let mut values = Vec::with_capacity(atoms * coords.len());
        for _ in 0..atoms {
            values.extend_from_slice(coords);
        }
        RandomPoint::new(space, coords.len(), values)
    }

    /// Builds a point from one row per atom.
    pub fn from_atom_rows(space: Arc<ProbSpace>, rows: &[Vec<f64>]) -> Result<RandomPoint> {
        if rows.len() != space.atoms() {
            return Err(Error::DimensionMismatch {
                expected: space.atoms(),
                got: rows.len(),
            });
        }
        let dim = rows.first().map(Vec::len).unwrap_or(0);
        let mut values = Vec::with_capacity(space.atoms() * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            values.extend_from_slice(row);
        }
        RandomPoint::new(space, dim, values)
    }

    /// Wraps a scalar as a 1-dimensional point.
    pub fn from_scalar(x: &RandomScalar) -> RandomPoint {
        RandomPoint {
            space: x.space().clone(),
            dim: 1,
            values: x.values().to_vec(),
        }
    }

    /// The 1-dimensional point read back as a scalar.
    pub fn to_scalar(&self) -> Result<RandomScalar> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, got: self.dim });
        }
        RandomScalar::new(self.space.clone(), self.values.clone())
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> usize {
        self.space.atoms()
    }

    pub fn atom(&self, atom: usize) -> &[f64] {
        &self.values[atom * self.dim..(atom + 1) * self.dim]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn from_parts_unchecked(
        space: Arc<ProbSpace>,
        dim: usize,
        values: Vec<f64>,
    ) -> RandomPoint {
        debug_assert_eq!(values.len(), space.atoms() * dim);
        RandomPoint { space, dim, values }
    }

    pub fn add(&self, other: &RandomPoint) -> Result<RandomPoint> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RandomPoint) -> Result<RandomPoint> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> RandomPoint {
        let values = self.values.iter().map(|v| v * factor).collect();
        RandomPoint::from_parts_unchecked(self.space.clone(), self.dim, values)
    }

    fn zip_with(&self, other: &RandomPoint, op: impl Fn(f64, f64) -> f64) -> Result<RandomPoint> {
        check_same_space(&self.space, &other.space)?;
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(RandomPoint::from_parts_unchecked(self.space.clone(), self.dim, values))
    }
}

/// A partition of the atom space into parts 0..parts-1. Every atom belongs
/// to exactly one part and every part owns at least one atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    space: Arc<ProbSpace>,
    part_of: Vec<usize>,
    parts: usize,
}

impl Partition {
    pub fn new(space: Arc<ProbSpace>, part_of: Vec<usize>) -> Result<Partition> {
        if part_of.len() != space.atoms() {
            return Err(Error::DimensionMismatch {
                expected: space.atoms(),
                got: part_of.len(),
            });
        }
        let parts = part_of.iter().max().map(|m| m + 1).unwrap_or(0);
        let mut seen = alloc::vec![false; parts];
        for &p in &part_of {
            seen[p] = true;
        }
        if let Some(part) = seen.iter().position(|s| !s) {
            return Err(Error::MissingPart { part, available: parts });
        }
        Ok(Partition { space, part_of, parts })
    }

    /// Puts every atom in its own part.
    pub fn discrete(space: Arc<ProbSpace>) -> Partition {
        let part_of: Vec<usize> = (0..space.atoms()).collect();
        let parts = part_of.len();
        Partition { space, part_of, parts }
    }

    pub fn space(&self) -> &Arc<ProbSpace> {
        &self.space
    }

    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn part_of(&self, atom: usize) -> usize {
        self.part_of[atom]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.part_of
    }
}

/// Glues one point per part into a single random point: the result at atom
/// w is `points[partition.part_of(w)]` at w. This realizes the sigma
/// combination sum of indicator-weighted points.
pub fn sigma_combine(partition: &Partition, points: &[RandomPoint]) -> Result<RandomPoint> {
    if points.len() < partition.parts() {
        return Err(Error::MissingPart {
            part: points.len(),
            available: partition.parts(),
        });
    }
    let space = partition.space();
    let dim = points.first().map(RandomPoint::dim).unwrap_or(0);
    for p in points {
        check_same_space(space, p.space())?;
        if p.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
        }
    }
    let mut values = Vec::with_capacity(space.atoms() * dim);
    for atom in 0..space.atoms() {
        values.extend_from_slice(points[partition.part_of(atom)].atom(atom));
    }
    Ok(RandomPoint::from_parts_unchecked(space.clone(), dim, values))
}

/// Checks that `f` commutes with sigma combination: for every partition,
/// f applied to the glued sample equals the gluing of f applied to the
/// parts, bit for bit at every atom. Atom-wise evaluators pass by
/// construction; the check exists to vet foreign whole-point callbacks.
///
/// Samples must lie in the canonical domain named by `f`'s domain hint
/// (unit ball, unit box, unit interval, or the standard corner simplex).
pub fn check_local(
    f: &LocalFunction,
    samples: &[RandomPoint],
    partitions: &[Partition],
) -> Result<bool> {
    if samples.is_empty() {
        return Err(Error::EmptyFamily);
    }
    for s in samples {
        f.check_domain(s)?;
    }
    for partition in partitions {
        let k = partition.parts();
        // Cycle the samples when a partition has more parts than samples.
        let selection: Vec<RandomPoint> =
            (0..k).map(|i| samples[i % samples.len()].clone()).collect();
        let glued = sigma_combine(partition, &selection)?;
        let lhs = f.eval(&glued)?;
        let mut images = Vec::with_capacity(k);
        for s in &selection {
            images.push(f.eval(s)?);
        }
        let rhs = sigma_combine(partition, &images)?;
        if lhs.values() != rhs.values() {
            return Ok(false);
        }
    }
    Ok(true)
}
