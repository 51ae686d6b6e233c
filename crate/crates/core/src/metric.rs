//! Metric spaces over a finite ground set and the powered-distance primitives.
//!
//! A [`MetricSpace`] owns every point an instance can mention (clients and
//! candidate centers alike); everything else refers to points through
//! [`PointRef`] indices into that table.

use std::fmt;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ground sets up to this size get a precomputed powered-distance table.
const CACHE_LIMIT: usize = 4096;

/// Relative slack for the triangle-inequality audit of matrix metrics.
const TRIANGLE_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("point {index} has {found} coordinates, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("point {index} is not a permutation of 1..={len}")]
    NotPermutation { index: usize, len: usize },
    #[error("distance matrix is not square: row {row} has {found} entries, expected {expected}")]
    NotSquare { row: usize, expected: usize, found: usize },
    #[error("distance matrix entry ({0}, {1}) is negative or not finite")]
    BadEntry(usize, usize),
    #[error("distance matrix is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("distance matrix has nonzero diagonal at {0}")]
    NonzeroDiagonal(usize),
    #[error("triangle inequality violated for ({0}, {1}, {2})")]
    Triangle(usize, usize, usize),
    #[error("point reference {0} is out of range for a ground set of {1} points")]
    InvalidRef(usize, usize),
    #[error("cost exponent must be 1 or 2, got {0}")]
    BadExponent(u32),
    #[error("euclidean dimension must be positive")]
    ZeroDimension,
    #[error("permutation length must be positive")]
    ZeroLength,
    #[error("point set is empty")]
    EmptySet,
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Index of a point in the ground-set table of a [`MetricSpace`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PointRef(pub usize);

impl PointRef {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for PointRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Cost exponent: 1 for k-median, 2 for k-means.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub enum Power {
    Median,
    Means,
}

impl Power {
    pub fn exponent(self) -> u32 {
        match self {
            Power::Median => 1,
            Power::Means => 2,
        }
    }

    #[inline]
    pub fn apply(self, d: f64) -> f64 {
        match self {
            Power::Median => d,
            Power::Means => d * d,
        }
    }
}

impl TryFrom<u32> for Power {
    type Error = MetricError;

    fn try_from(z: u32) -> Result<Self, Self::Error> {
        match z {
            1 => Ok(Power::Median),
            2 => Ok(Power::Means),
            other => Err(MetricError::BadExponent(other)),
        }
    }
}

impl From<Power> for u32 {
    fn from(p: Power) -> u32 {
        p.exponent()
    }
}

/// The concrete point table behind a metric space.
#[derive(Debug, Clone, PartialEq)]
pub enum Ground {
    Euclidean {
        dim: usize,
        coords: Vec<Vec<f64>>,
    },
    Matrix {
        distances: Vec<Vec<f64>>,
    },
    /// Permutations of `1..=perm_len`, stored 1-based as given.
    Ulam {
        perm_len: usize,
        perms: Vec<Vec<u32>>,
    },
}

impl Ground {
    pub fn len(&self) -> usize {
        match self {
            Ground::Euclidean { coords, .. } => coords.len(),
            Ground::Matrix { distances } => distances.len(),
            Ground::Ulam { perms, .. } => perms.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn raw_distance(&self, a: usize, b: usize) -> f64 {
        match self {
            Ground::Euclidean { coords, .. } => coords[a]
                .iter()
                .zip(&coords[b])
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Ground::Matrix { distances } => distances[a][b],
            Ground::Ulam { perms, .. } => ulam_distance(&perms[a], &perms[b]) as f64,
        }
    }
}

/// A finite metric space together with the cost exponent `z`.
///
/// Read-only after construction.
#[derive(Debug, Clone)]
pub struct MetricSpace {
    ground: Ground,
    power: Power,
    powered: Option<Vec<f64>>,
}

impl MetricSpace {
    pub fn euclidean(dim: usize, coords: Vec<Vec<f64>>, power: Power) -> Result<Self, MetricError> {
        if dim == 0 {
            return Err(MetricError::ZeroDimension);
        }
        for (index, c) in coords.iter().enumerate() {
            if c.len() != dim {
                return Err(MetricError::DimensionMismatch {
                    index,
                    expected: dim,
                    found: c.len(),
                });
            }
        }
        Ok(Self::build(Ground::Euclidean { dim, coords }, power))
    }

    /// Validates squareness, nonnegativity, symmetry and a zero diagonal.
    /// The triangle inequality is only audited on request, see
    /// [`MetricSpace::audit_triangle_inequality`].
    pub fn matrix(distances: Vec<Vec<f64>>, power: Power) -> Result<Self, MetricError> {
        let n = distances.len();
        for (i, row) in distances.iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::NotSquare {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(MetricError::BadEntry(i, j));
                }
            }
        }
        for (i, row) in distances.iter().enumerate() {
            if row[i] != 0.0 {
                return Err(MetricError::NonzeroDiagonal(i));
            }
            for (j, &d) in row.iter().enumerate().skip(i + 1) {
                if d != distances[j][i] {
                    return Err(MetricError::Asymmetric(i, j));
                }
            }
        }
        Ok(Self::build(Ground::Matrix { distances }, power))
    }

    pub fn ulam(perm_len: usize, perms: Vec<Vec<u32>>, power: Power) -> Result<Self, MetricError> {
        if perm_len == 0 {
            return Err(MetricError::ZeroLength);
        }
        for (index, p) in perms.iter().enumerate() {
            if !is_permutation(p, perm_len) {
                return Err(MetricError::NotPermutation { index, len: perm_len });
            }
        }
        Ok(Self::build(Ground::Ulam { perm_len, perms }, power))
    }

    fn build(ground: Ground, power: Power) -> Self {
        let n = ground.len();
        let powered = (n <= CACHE_LIMIT).then(|| {
            let mut table = vec![0.0; n * n];
            for a in 0..n {
                for b in (a + 1)..n {
                    let d = power.apply(ground.raw_distance(a, b));
                    table[a * n + b] = d;
                    table[b * n + a] = d;
                }
            }
            table
        });
        Self { ground, power, powered }
    }

    pub fn ground(&self) -> &Ground {
        &self.ground
    }

    pub fn power(&self) -> Power {
        self.power
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    pub fn contains(&self, p: PointRef) -> bool {
        p.0 < self.len()
    }

    fn check_ref(&self, p: PointRef) -> Result<(), MetricError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(MetricError::InvalidRef(p.0, self.len()))
        }
    }

    pub fn distance(&self, a: PointRef, b: PointRef) -> Result<f64, MetricError> {
        self.check_ref(a)?;
        self.check_ref(b)?;
        if a == b {
            return Ok(0.0);
        }
        Ok(self.ground.raw_distance(a.0, b.0))
    }

    /// `distance(a, b)^z`.
    pub fn powered_distance(&self, a: PointRef, b: PointRef) -> Result<f64, MetricError> {
        self.check_ref(a)?;
        self.check_ref(b)?;
        Ok(self.dz(a, b))
    }

    /// Unchecked powered distance for hot loops. Panics on invalid refs.
    #[inline]
    pub(crate) fn dz(&self, a: PointRef, b: PointRef) -> f64 {
        match &self.powered {
            Some(table) => table[a.0 * self.len() + b.0],
            None if a == b => 0.0,
            None => self.power.apply(self.ground.raw_distance(a.0, b.0)),
        }
    }

    /// Minimum powered distance from `x` to `set`, with the achieving member.
    /// Ties go to the lowest ground index.
    pub fn point_to_set(&self, x: PointRef, set: &[PointRef]) -> Result<(f64, PointRef), MetricError> {
        self.check_ref(x)?;
        for &s in set {
            self.check_ref(s)?;
        }
        self.nearest(x, set).ok_or(MetricError::EmptySet)
    }

    pub(crate) fn nearest(&self, x: PointRef, set: &[PointRef]) -> Option<(f64, PointRef)> {
        let mut best: Option<(f64, PointRef)> = None;
        for &s in set {
            let d = self.dz(x, s);
            best = match best {
                Some((bd, bp)) if bd < d || (bd == d && bp < s) => Some((bd, bp)),
                _ => Some((d, s)),
            };
        }
        best
    }

    /// Checks `D(a,c) <= D(a,b) + D(b,c)` on `samples` random triples
    /// (every triple when the ground set has at most 12 points).
    pub fn audit_triangle_inequality(&self, samples: usize, seed: u64) -> Result<(), MetricError> {
        let n = self.len();
        if n == 0 {
            return Ok(());
        }
        let check = |a: usize, b: usize, c: usize| -> Result<(), MetricError> {
            let ab = self.ground.raw_distance(a, b);
            let bc = self.ground.raw_distance(b, c);
            let ac = self.ground.raw_distance(a, c);
            if ac > (ab + bc) * (1.0 + TRIANGLE_SLACK) + TRIANGLE_SLACK {
                Err(MetricError::Triangle(a, b, c))
            } else {
                Ok(())
            }
        };
        if n <= 12 {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
            return Ok(());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            check(rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n))?;
        }
        Ok(())
    }
}

fn is_permutation(p: &[u32], len: usize) -> bool {
    if p.len() != len {
        return false;
    }
    let mut seen = vec![false; len];
    for &v in p {
        let v = v as usize;
        if v == 0 || v > len || seen[v - 1] {
            return false;
        }
        seen[v - 1] = true;
    }
    true
}

/// Length of a longest strictly increasing subsequence (patience sorting).
pub fn longest_increasing_subsequence(seq: &[usize]) -> usize {
    let mut tails: Vec<usize> = Vec::with_capacity(seq.len());
    for &v in seq {
        let pos = tails.partition_point(|&t| t < v);
        if pos == tails.len() {
            tails.push(v);
        } else {
            tails[pos] = v;
        }
    }
    tails.len()
}

/// Ulam distance between two permutations of equal length: the minimum
/// number of single-element moves turning `p` into `q`, computed as
/// `len - LIS(q ∘ p⁻¹)`.
///
/// Both inputs must be permutations of `1..=len`; use
/// [`MetricSpace::ulam`] to validate untrusted data.
pub fn ulam_distance(p: &[u32], q: &[u32]) -> usize {
    debug_assert_eq!(p.len(), q.len());
    let mut pos_in_p = vec![0usize; p.len() + 1];
    for (i, &v) in p.iter().enumerate() {
        pos_in_p[v as usize] = i;
    }
    let mapped: Vec<usize> = q.iter().map(|&v| pos_in_p[v as usize]).collect();
    p.len() - longest_increasing_subsequence(&mapped)
}

/// Reads a distance matrix from headerless CSV, one row per line.
pub fn read_distance_matrix_csv<R: BufRead>(reader: R) -> Result<Vec<Vec<f64>>, MetricError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| MetricError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row = record
            .iter()
            .map(|cell| {
                cell.parse::<f64>().map_err(|e| MetricError::Parse {
                    line,
                    message: format!("{cell:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// Reads permutations, one per line, as space-separated 1-based integers.
pub fn read_permutations<R: BufRead>(reader: R) -> Result<Vec<Vec<u32>>, MetricError> {
    let mut perms = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| MetricError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let perm = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u32>().map_err(|e| MetricError::Parse {
                    line: i + 1,
                    message: format!("{tok:?}: {e}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        perms.push(perm);
    }
    Ok(perms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(points: &[f64], power: Power) -> MetricSpace {
        MetricSpace::euclidean(1, points.iter().map(|&x| vec![x]).collect(), power).unwrap()
    }

    #[test]
    fn euclidean_absolute_difference() {
        let s = line(&[0.0, 3.0], Power::Median);
        assert_eq!(s.distance(PointRef(0), PointRef(1)).unwrap(), 3.0);
        let s2 = line(&[0.0, 3.0], Power::Means);
        assert_eq!(s2.powered_distance(PointRef(0), PointRef(1)).unwrap(), 9.0);
        assert_eq!(s.powered_distance(PointRef(0), PointRef(1)).unwrap(), 3.0);
    }

    #[test]
    fn matrix_powered() {
        let s = MetricSpace::matrix(vec![vec![0.0, 2.0], vec![2.0, 0.0]], Power::Means).unwrap();
        assert_eq!(s.powered_distance(PointRef(0), PointRef(1)).unwrap(), 4.0);
    }

    #[test]
    fn ulam_small_cases() {
        assert_eq!(ulam_distance(&[1, 2, 3], &[1, 2, 3]), 0);
        assert_eq!(ulam_distance(&[1, 2, 3], &[3, 1, 2]), 1);
        assert_eq!(ulam_distance(&[1, 2, 3], &[3, 2, 1]), 2);
    }

    #[test]
    fn point_to_set_nearest_and_ties() {
        let s = line(&[5.0, 0.0, 4.0, 9.0], Power::Median);
        let (d, p) = s
            .point_to_set(PointRef(0), &[PointRef(1), PointRef(2), PointRef(3)])
            .unwrap();
        assert_eq!((d, p), (1.0, PointRef(2)));
        assert_eq!(s.point_to_set(PointRef(0), &[PointRef(0)]).unwrap(), (0.0, PointRef(0)));

        // 3 and 7 both sit at powered distance 4; the lower index wins
        let s = line(&[5.0, 3.0, 7.0], Power::Means);
        let (d, p) = s.point_to_set(PointRef(0), &[PointRef(2), PointRef(1)]).unwrap();
        assert_eq!((d, p), (4.0, PointRef(1)));
        assert_eq!(s.point_to_set(PointRef(0), &[]), Err(MetricError::EmptySet));
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            MetricSpace::euclidean(2, vec![vec![0.0, 1.0], vec![1.0]], Power::Median),
            Err(MetricError::DimensionMismatch { index: 1, .. })
        ));
        assert!(matches!(
            MetricSpace::ulam(3, vec![vec![1, 2, 2]], Power::Median),
            Err(MetricError::NotPermutation { index: 0, .. })
        ));
        assert!(matches!(
            MetricSpace::ulam(3, vec![vec![1, 2]], Power::Median),
            Err(MetricError::NotPermutation { .. })
        ));
        assert_eq!(
            MetricSpace::matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]], Power::Median).unwrap_err(),
            MetricError::Asymmetric(0, 1)
        );
        assert_eq!(
            MetricSpace::matrix(vec![vec![1.0]], Power::Median).unwrap_err(),
            MetricError::NonzeroDiagonal(0)
        );
        assert_eq!(Power::try_from(3).unwrap_err(), MetricError::BadExponent(3));
        let s = line(&[0.0], Power::Median);
        assert_eq!(
            s.distance(PointRef(0), PointRef(4)).unwrap_err(),
            MetricError::InvalidRef(4, 1)
        );
    }

    #[test]
    fn triangle_audit_catches_bad_matrix() {
        let bad = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        let s = MetricSpace::matrix(bad, Power::Median).unwrap();
        assert!(matches!(
            s.audit_triangle_inequality(100, 1),
            Err(MetricError::Triangle(..))
        ));
    }

    #[test]
    fn parses_files() {
        let m = read_distance_matrix_csv("0,1.5\n1.5,0\n".as_bytes()).unwrap();
        assert_eq!(m, vec![vec![0.0, 1.5], vec![1.5, 0.0]]);
        assert!(matches!(
            read_distance_matrix_csv("0, 1\n1, x\n".as_bytes()),
            Err(MetricError::Parse { line: 2, .. })
        ));
        let p = read_permutations("1 2 3\n3 1 2\n\n".as_bytes()).unwrap();
        assert_eq!(p, vec![vec![1, 2, 3], vec![3, 1, 2]]);
        assert!(read_permutations("1 x\n".as_bytes()).is_err());
    }

    fn perm_strategy(len: usize) -> impl Strategy<Value = Vec<u32>> {
        Just((1..=len as u32).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn euclidean_metric_axioms(pts in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 2), 3)) {
            let s = MetricSpace::euclidean(2, pts.clone(), Power::Median).unwrap();
            let s2 = MetricSpace::euclidean(2, pts, Power::Means).unwrap();
            let (a, b, c) = (PointRef(0), PointRef(1), PointRef(2));
            prop_assert_eq!(s.distance(a, b).unwrap(), s.distance(b, a).unwrap());
            prop_assert_eq!(s.distance(a, a).unwrap(), 0.0);
            prop_assert!(s.distance(a, c).unwrap() <= s.distance(a, b).unwrap() + s.distance(b, c).unwrap() + 1e-9);
            prop_assert!(s2.dz(a, c) <= 2.0 * (s2.dz(a, b) + s2.dz(b, c)) + 1e-9);
        }

        #[test]
        fn ulam_metric_axioms(p in perm_strategy(7), q in perm_strategy(7), r in perm_strategy(7)) {
            let s = MetricSpace::ulam(7, vec![p, q, r], Power::Means).unwrap();
            let (a, b, c) = (PointRef(0), PointRef(1), PointRef(2));
            prop_assert_eq!(s.distance(a, b).unwrap(), s.distance(b, a).unwrap());
            prop_assert_eq!(s.distance(a, a).unwrap(), 0.0);
            prop_assert!(s.distance(a, c).unwrap() <= s.distance(a, b).unwrap() + s.distance(b, c).unwrap());
            prop_assert!(s.dz(a, c) <= 2.0 * (s.dz(a, b) + s.dz(b, c)));
        }
    }
}
