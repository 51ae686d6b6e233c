//! JSON file formats for instances and solutions.
//!
//! An instance file looks like
//!
//! ```json
//! {
//!   "metric": {"kind": "euclidean", "dim": 2},
//!   "z": 1,
//!   "points": [[0.0, 0.0], [1.0, 0.5], [40.0, 40.0]],
//!   "facilities": [[0.0, 0.0], [40.0, 40.0]],
//!   "k": 1,
//!   "m": 1,
//!   "constraint": {"kind": "capacitated", "capacities": [2, 2]}
//! }
//! ```
//!
//! * `metric.kind = "euclidean"`: points and facilities are coordinate arrays
//!   of length `dim`.
//! * `metric.kind = "matrix"`: either inline `distances` or a `csv` path; points
//!   and facilities are row indices.
//! * `metric.kind = "ulam"`: points and facilities are permutations of
//!   `1..=perm_len`, or row indices into a permutation `file` when given.
//!
//! `facilities` defaults to the point set. A coordinate facility identical to
//! a point is the same ground element as that point. `labels` (one per point)
//! is required exactly when the constraint looks at labels, and `constraint`
//! defaults to unconstrained. Relative file paths resolve against the
//! instance file's directory. Unknown fields are rejected.
//!
//! Solution files index points by their position in `points` and centers by
//! their position in `facilities`.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ClusteringInstance, ConstraintSpec, InstanceError, Label, Solution};
use crate::metric::{read_distance_matrix_csv, read_permutations, MetricError, MetricSpace, PointRef, Power};
use crate::reduction::{IterationRecord, ReductionOutcome, ValidTuple};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: PathBuf, source: std::io::Error },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("schema error: {0}")]
    Schema(String),
}

fn schema<T>(msg: impl Into<String>) -> Result<T, IoError> {
    Err(IoError::Schema(msg.into()))
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, IoError> {
    fs::read(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Euclidean {
        dim: usize,
    },
    Matrix {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        distances: Option<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        csv: Option<PathBuf>,
    },
    Ulam {
        perm_len: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
    },
}

/// A point as written in a file: a ground index, a permutation, or a
/// coordinate vector. Arrays of nonnegative integers parse as permutations
/// and are accepted as coordinates too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Index(usize),
    Permutation(Vec<u32>),
    Vector(Vec<f64>),
}

fn default_constraint() -> ConstraintSpec {
    ConstraintSpec::Unconstrained
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub metric: MetricSpec,
    pub z: u32,
    pub points: Vec<PointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub facilities: Option<Vec<PointSpec>>,
    pub k: usize,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Label>>,
    #[serde(default = "default_constraint")]
    pub constraint: ConstraintSpec,
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Builds the instance; `base_dir` resolves relative metric file paths.
    pub fn build(&self, base_dir: Option<&Path>) -> Result<ClusteringInstance, IoError> {
        let power = match self.z {
            1 => Power::Median,
            2 => Power::Means,
            z => return Err(MetricError::BadExponent(z).into()),
        };
        let resolve = |p: &Path| match base_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        };
        let (space, clients, facilities) = match &self.metric {
            MetricSpec::Euclidean { dim } => {
                let pts = self.vectors(&self.points, *dim, "point")?;
                let facs = match &self.facilities {
                    Some(f) => Some(self.vectors(f, *dim, "facility")?),
                    None => None,
                };
                let (coords, clients, facilities) = merge_ground(pts, facs);
                (MetricSpace::euclidean(*dim, coords, power)?, clients, facilities)
            }
            MetricSpec::Ulam { perm_len, file: None } => {
                let pts = self.perms(&self.points, "point")?;
                let facs = match &self.facilities {
                    Some(f) => Some(self.perms(f, "facility")?),
                    None => None,
                };
                let (perms, clients, facilities) = merge_ground(pts, facs);
                (MetricSpace::ulam(*perm_len, perms, power)?, clients, facilities)
            }
            MetricSpec::Ulam {
                perm_len,
                file: Some(path),
            } => {
                let path = resolve(path);
                let bytes = read_file(&path)?;
                let perms = read_permutations(BufReader::new(bytes.as_slice()))?;
                let space = MetricSpace::ulam(*perm_len, perms, power)?;
                let (c, f) = self.indices()?;
                (space, c, f)
            }
            MetricSpec::Matrix { distances, csv } => {
                let rows = match (distances, csv) {
                    (Some(d), None) => d.clone(),
                    (None, Some(path)) => {
                        let path = resolve(path);
                        let bytes = read_file(&path)?;
                        read_distance_matrix_csv(BufReader::new(bytes.as_slice()))?
                    }
                    _ => return schema("matrix metric needs exactly one of `distances` or `csv`"),
                };
                let space = MetricSpace::matrix(rows, power)?;
                let (c, f) = self.indices()?;
                (space, c, f)
            }
        };
        Ok(ClusteringInstance::new(
            space,
            clients,
            facilities,
            self.k,
            self.m,
            self.labels.clone(),
            self.constraint.clone(),
        )?)
    }

    fn vectors(&self, specs: &[PointSpec], dim: usize, what: &str) -> Result<Vec<Vec<f64>>, IoError> {
        specs
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                PointSpec::Vector(v) if v.len() == dim => Ok(v.clone()),
                PointSpec::Permutation(v) if v.len() == dim => Ok(v.iter().map(|&x| f64::from(x)).collect()),
                PointSpec::Vector(v) => schema(format!("{what} {i} has {} coordinates, expected {dim}", v.len())),
                PointSpec::Permutation(v) => schema(format!("{what} {i} has {} coordinates, expected {dim}", v.len())),
                PointSpec::Index(_) => schema(format!("{what} {i} must be a coordinate array")),
            })
            .collect()
    }

    fn perms(&self, specs: &[PointSpec], what: &str) -> Result<Vec<Vec<u32>>, IoError> {
        specs
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                PointSpec::Permutation(v) => Ok(v.clone()),
                _ => schema(format!("{what} {i} must be an array of positive integers")),
            })
            .collect()
    }

    fn indices(&self) -> Result<(Vec<PointRef>, Vec<PointRef>), IoError> {
        let idx = |specs: &[PointSpec], what: &str| -> Result<Vec<PointRef>, IoError> {
            specs
                .iter()
                .enumerate()
                .map(|(i, s)| match s {
                    PointSpec::Index(j) => Ok(PointRef(*j)),
                    _ => schema(format!("{what} {i} must be a ground index")),
                })
                .collect()
        };
        let clients = idx(&self.points, "point")?;
        let facilities = match &self.facilities {
            Some(f) => idx(f, "facility")?,
            None => clients.clone(),
        };
        Ok((clients, facilities))
    }
}

/// Lays points out first (point `i` gets ground index `i`), then adds each
/// facility, reusing the first not-yet-claimed point with equal value.
fn merge_ground<T: PartialEq>(points: Vec<T>, facilities: Option<Vec<T>>) -> (Vec<T>, Vec<PointRef>, Vec<PointRef>) {
    let n = points.len();
    let clients: Vec<PointRef> = (0..n).map(PointRef).collect();
    let Some(facilities) = facilities else {
        return (points, clients.clone(), clients);
    };
    let mut ground = points;
    let mut claimed = vec![false; n];
    let mut refs = Vec::with_capacity(facilities.len());
    for f in facilities {
        match (0..n).find(|&i| !claimed[i] && ground[i] == f) {
            Some(i) => {
                claimed[i] = true;
                refs.push(PointRef(i));
            }
            None => {
                refs.push(PointRef(ground.len()));
                ground.push(f);
            }
        }
    }
    (ground, clients, refs)
}

pub fn load_instance(path: &Path) -> Result<ClusteringInstance, IoError> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|e| IoError::Schema(e.to_string()))?;
    InstanceFile::parse(&text)?.build(path.parent())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationStat {
    pub y: Vec<usize>,
    pub tau: ValidTuple,
    pub matching_weight: Option<f64>,
    pub solver_cost: Option<f64>,
    pub feasible: bool,
    pub wall_time_us: u64,
}

/// Solution as written to disk, with positions instead of ground indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub cost: f64,
    pub centers: Vec<usize>,
    pub clusters: Vec<Vec<usize>>,
    pub outliers: Vec<usize>,
    #[serde(rename = "chosen_Y", default, skip_serializing_if = "Option::is_none")]
    pub chosen_y: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_tau: Option<ValidTuple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iteration_stats: Option<Vec<IterationStat>>,
}

fn client_positions(inst: &ClusteringInstance, pts: &[PointRef]) -> Vec<usize> {
    pts.iter()
        .map(|&p| inst.client_position(p).expect("solution point is a client"))
        .collect()
}

impl SolutionFile {
    pub fn from_solution(inst: &ClusteringInstance, sol: &Solution) -> Self {
        Self {
            cost: sol.cost,
            centers: sol
                .centers
                .iter()
                .map(|&c| inst.facility_position(c).expect("center is a facility"))
                .collect(),
            clusters: sol.clusters.iter().map(|c| client_positions(inst, c)).collect(),
            outliers: client_positions(inst, &sol.outliers),
            chosen_y: None,
            chosen_tau: None,
            q: None,
            iteration_stats: None,
        }
    }

    pub fn from_outcome(inst: &ClusteringInstance, out: &ReductionOutcome, with_stats: bool) -> Self {
        let stat = |r: &IterationRecord| IterationStat {
            y: client_positions(inst, &r.y),
            tau: r.tau.clone(),
            matching_weight: r.matching_weight,
            solver_cost: r.solver_cost,
            feasible: r.feasible,
            wall_time_us: r.wall_time.as_micros() as u64,
        };
        Self {
            chosen_y: Some(client_positions(inst, &out.chosen_y)),
            chosen_tau: Some(out.chosen_tau.clone()),
            q: Some(out.q),
            iteration_stats: with_stats.then(|| out.records.iter().map(stat).collect()),
            ..Self::from_solution(inst, &out.solution)
        }
    }

    /// Maps positions back to ground references.
    pub fn to_solution(&self, inst: &ClusteringInstance) -> Result<Solution, IoError> {
        let client = |i: usize| {
            inst.clients()
                .get(i)
                .copied()
                .ok_or_else(|| IoError::Schema(format!("point position {i} out of range")))
        };
        let clients = |v: &[usize]| v.iter().map(|&i| client(i)).collect::<Result<Vec<_>, _>>();
        Ok(Solution {
            outliers: clients(&self.outliers)?,
            clusters: self.clusters.iter().map(|c| clients(c)).collect::<Result<_, _>>()?,
            centers: self
                .centers
                .iter()
                .map(|&i| {
                    inst.facilities()
                        .get(i)
                        .copied()
                        .ok_or_else(|| IoError::Schema(format!("facility position {i} out of range")))
                })
                .collect::<Result<_, _>>()?,
            cost: self.cost,
        })
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        Ok(serde_json::from_slice(&read_file(path)?)?)
    }
}
