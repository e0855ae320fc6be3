//! The compact domain as a finite box grid, finite point sets standing in for
//! closed subsets, target functions sampled on the grid, and the residual
//! level sets used by the refinement step.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};

/// Largest grid the crate will enumerate.
pub const MAX_GRID_POINTS: usize = 100_000_000;
/// Relative (to the axis span) tolerance for recognizing grid coordinates.
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Axis-aligned box with `resolution[i]` equispaced points per axis,
/// endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
    resolution: Vec<usize>,
    len: usize,
}

impl GridDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, resolution: Vec<usize>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != resolution.len() {
            return Err(invalid(
                "domain bounds and resolutions must share one positive dimension",
            ));
        }
        for i in 0..lower.len() {
            if !(lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]) {
                return Err(invalid(format!(
                    "axis {i}: need finite lower < upper, got [{}, {}]",
                    lower[i], upper[i]
                )));
            }
            if resolution[i] < 2 {
                return Err(invalid(format!("axis {i}: resolution must be at least 2")));
            }
        }
        let requested: u128 = resolution.iter().map(|&r| r as u128).product();
        if requested > MAX_GRID_POINTS as u128 {
            return Err(Error::Capacity {
                requested,
                limit: MAX_GRID_POINTS,
            });
        }
        Ok(Self {
            lower,
            upper,
            resolution,
            len: requested as usize,
        })
    }

    /// `[0, 1]^dim` with `resolution` points per axis.
    pub fn unit_cube(dim: usize, resolution: usize) -> Result<Self> {
        Self::new(vec![0.0; dim], vec![1.0; dim], vec![resolution; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    /// Coordinate of grid index `k` along `axis`; both endpoints are exact.
    pub fn coordinate(&self, axis: usize, k: usize) -> f64 {
        let last = self.resolution[axis] - 1;
        if k == last {
            return self.upper[axis];
        }
        let (lo, hi) = (self.lower[axis], self.upper[axis]);
        lo + (hi - lo) * (k as f64 / last as f64)
    }

    /// Point at a flat index (first axis varies slowest).
    pub fn point(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.dim()];
        for axis in (0..self.dim()).rev() {
            let r = self.resolution[axis];
            out[axis] = self.coordinate(axis, rem % r);
            rem /= r;
        }
        out
    }

    /// Flat index of a point, if every coordinate is within tolerance of a
    /// grid coordinate.
    pub fn index_of(&self, point: &[f64]) -> Option<usize> {
        if point.len() != self.dim() || point.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let mut index = 0usize;
        for (axis, &x) in point.iter().enumerate() {
            let (lo, hi) = (self.lower[axis], self.upper[axis]);
            let last = self.resolution[axis] - 1;
            let u = (x - lo) / (hi - lo) * last as f64;
            let k = u.round();
            if k < 0.0 || k > last as f64 {
                return None;
            }
            let k = k as usize;
            if (x - self.coordinate(axis, k)).abs() > GRID_TOLERANCE * (hi - lo) {
                return None;
            }
            index = index * self.resolution[axis] + k;
        }
        Some(index)
    }

    /// The same box with `(res - 1)·multiplier + 1` points per axis, so the
    /// original grid is a subgrid.
    pub fn refined(&self, multiplier: usize) -> Result<Self> {
        if multiplier == 0 {
            return Err(invalid("refinement multiplier must be positive"));
        }
        let resolution = self
            .resolution
            .iter()
            .map(|&r| {
                (r - 1)
                    .checked_mul(multiplier)
                    .and_then(|v| v.checked_add(1))
            })
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::Capacity {
                requested: u128::MAX,
                limit: MAX_GRID_POINTS,
            })?;
        Self::new(self.lower.clone(), self.upper.clone(), resolution)
    }
}

/// Parses `lo,hi,res[;lo,hi,res...]`, one axis per group.
impl FromStr for GridDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut resolution = Vec::new();
        for (axis, group) in s.split(';').enumerate() {
            let fields: Vec<&str> = group.split(',').map(str::trim).collect();
            let [lo, hi, res] = fields[..] else {
                return Err(invalid(format!(
                    "domain axis {axis}: expected lo,hi,res but found {group:?}"
                )));
            };
            let parse = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| invalid(format!("domain axis {axis}: bad number {v:?}")))
            };
            lower.push(parse(lo)?);
            upper.push(parse(hi)?);
            resolution.push(
                res.parse::<usize>()
                    .map_err(|_| invalid(format!("domain axis {axis}: bad resolution {res:?}")))?,
            );
        }
        GridDomain::new(lower, upper, resolution)
    }
}

/// Every grid point, in flat-index order.
pub fn grid_points(domain: &GridDomain) -> Vec<Vec<f64>> {
    (0..domain.len()).map(|i| domain.point(i)).collect()
}

/// A finite set of distinct grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    domain: GridDomain,
    indices: Vec<usize>,
    points: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn empty(domain: &GridDomain) -> Self {
        Self {
            domain: domain.clone(),
            indices: Vec::new(),
            points: Vec::new(),
        }
    }

    /// Builds a set from grid indices, keeping their order.
    pub fn from_indices(domain: &GridDomain, indices: Vec<usize>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(indices.len());
        for (row, &i) in indices.iter().enumerate() {
            if i >= domain.len() {
                return Err(invalid(format!("grid index {i} out of range")));
            }
            if !seen.insert(i) {
                return Err(Error::DuplicatePoint {
                    row,
                    point: domain.point(i),
                });
            }
        }
        let points = indices.iter().map(|&i| domain.point(i)).collect();
        Ok(Self {
            domain: domain.clone(),
            indices,
            points,
        })
    }

    /// Builds a set from coordinates, snapping each to its grid point.
    pub fn from_points(domain: &GridDomain, points: &[Vec<f64>]) -> Result<Self> {
        let indices = points
            .iter()
            .enumerate()
            .map(|(row, p)| {
                domain.index_of(p).ok_or_else(|| Error::OffGrid {
                    row,
                    point: p.clone(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(domain, indices)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// First point shared with `other`, if any.
    pub fn first_common_point(&self, other: &PointSet) -> Option<&[f64]> {
        let theirs: HashSet<usize> = other.indices.iter().copied().collect();
        self.indices
            .iter()
            .position(|i| theirs.contains(i))
            .map(|k| self.points[k].as_slice())
    }
}

/// One `sin(2π·frequency·x_i + phase)` factor of a sinusoid product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineFactor {
    pub frequency: f64,
    pub phase: f64,
}

/// Function to approximate: an analytic builtin or grid samples.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetFunction {
    Constant(f64),
    /// `x_axis`.
    Projection(usize),
    /// `Π_i sin(2π f_i x_i + φ_i)`, one factor per axis.
    SinusoidProduct(Vec<SineFactor>),
    /// `amplitude · exp(-|x - center|² / (2 width²))`.
    GaussianBump {
        center: Vec<f64>,
        width: f64,
        amplitude: f64,
    },
    /// `max_i x_i`.
    MaxOfCoordinates,
    /// `(point, value)` rows, matched to grid points on sampling.
    Tabulated(Vec<(Vec<f64>, f64)>),
}

impl TargetFunction {
    /// `sin(2πx)` in one dimension.
    pub fn sin_2pi_x() -> Self {
        Self::SinusoidProduct(vec![SineFactor {
            frequency: 1.0,
            phase: 0.0,
        }])
    }

    /// `sin(2πx)·cos(2πy)`.
    pub fn sin_2pi_x_cos_2pi_y() -> Self {
        Self::SinusoidProduct(vec![
            SineFactor {
                frequency: 1.0,
                phase: 0.0,
            },
            SineFactor {
                frequency: 1.0,
                phase: PI / 2.0,
            },
        ])
    }

    fn eval_analytic(&self, x: &[f64]) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Projection(axis) => x[*axis],
            Self::SinusoidProduct(factors) => factors
                .iter()
                .zip(x)
                .map(|(f, &v)| (2.0 * PI * f.frequency * v + f.phase).sin())
                .product(),
            Self::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let r2: f64 = center.iter().zip(x).map(|(c, v)| (v - c) * (v - c)).sum();
                amplitude * (-r2 / (2.0 * width * width)).exp()
            }
            Self::MaxOfCoordinates => x.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Self::Tabulated(_) => unreachable!("tabulated targets are sampled by lookup"),
        }
    }

    fn check_dimension(&self, dim: usize) -> Result<()> {
        let ok = match self {
            Self::Constant(c) => c.is_finite(),
            Self::Projection(axis) => *axis < dim,
            Self::SinusoidProduct(factors) => {
                factors.len() == dim
                    && factors
                        .iter()
                        .all(|f| f.frequency.is_finite() && f.phase.is_finite())
            }
            Self::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                center.len() == dim
                    && center.iter().all(|c| c.is_finite())
                    && *width > 0.0
                    && width.is_finite()
                    && amplitude.is_finite()
            }
            Self::MaxOfCoordinates => true,
            Self::Tabulated(rows) => rows.iter().all(|(p, v)| p.len() == dim && v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!(
                "target is not defined on a {dim}-dimensional domain"
            )))
        }
    }
}

/// Target values at every grid point, in grid order.
pub fn sample_target(target: &TargetFunction, domain: &GridDomain) -> Result<Vec<f64>> {
    target.check_dimension(domain.dim())?;
    match target {
        TargetFunction::Tabulated(rows) => {
            let mut values: Vec<Option<f64>> = vec![None; domain.len()];
            for (row, (p, v)) in rows.iter().enumerate() {
                let i = domain.index_of(p).ok_or_else(|| Error::OffGrid {
                    row,
                    point: p.clone(),
                })?;
                if values[i].replace(*v).is_some() {
                    return Err(Error::DuplicatePoint {
                        row,
                        point: p.clone(),
                    });
                }
            }
            values
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    v.ok_or_else(|| Error::MissingPoint {
                        point: domain.point(i),
                    })
                })
                .collect()
        }
        analytic => Ok((0..domain.len())
            .map(|i| analytic.eval_analytic(&domain.point(i)))
            .collect()),
    }
}

/// Splits grid points by residual level:
/// `U⁺ = {α/3 ≤ r ≤ 4α/3}` and `U⁻ = {-4α/3 ≤ r ≤ -α/3}`.
pub fn residual_sets(
    residual: &[f64],
    domain: &GridDomain,
    alpha: f64,
) -> Result<(PointSet, PointSet)> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    if residual.len() != domain.len() {
        return Err(invalid(format!(
            "{} residual values for a grid of {} points",
            residual.len(),
            domain.len()
        )));
    }
    let low = alpha / 3.0;
    let high = 4.0 * alpha / 3.0;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for (i, &r) in residual.iter().enumerate() {
        if (low..=high).contains(&r) {
            plus.push(i);
        } else if (-high..=-low).contains(&r) {
            minus.push(i);
        }
    }
    Ok((
        PointSet::from_indices(domain, plus)?,
        PointSet::from_indices(domain, minus)?,
    ))
}

fn csv_reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn parse_row(record: &csv::StringRecord, expected: usize, row: usize) -> Result<Vec<f64>> {
    if record.len() != expected {
        return Err(invalid(format!(
            "row {row}: expected {expected} columns, found {}",
            record.len()
        )));
    }
    record
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| invalid(format!("row {row}: unparsable number {f:?}")))
        })
        .collect()
}

/// Reads a target CSV (`n` coordinate columns then a value column, header
/// required, any row order). Rows are numbered from 1 after the header.
pub fn load_target_csv(path: impl AsRef<Path>, domain: &GridDomain) -> Result<TargetFunction> {
    let mut reader = csv_reader(path.as_ref())?;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (k, record) in reader.records().enumerate() {
        let row = k + 1;
        let mut fields = parse_row(&record?, domain.dim() + 1, row)?;
        let value = fields.pop().expect("row has a value column");
        let index = domain.index_of(&fields).ok_or_else(|| Error::OffGrid {
            row,
            point: fields.clone(),
        })?;
        if !seen.insert(index) {
            return Err(Error::DuplicatePoint { row, point: fields });
        }
        rows.push((domain.point(index), value));
    }
    Ok(TargetFunction::Tabulated(rows))
}

/// Reads a point-set CSV (`n` coordinate columns, header required).
pub fn load_set_csv(path: impl AsRef<Path>, domain: &GridDomain) -> Result<PointSet> {
    let mut reader = csv_reader(path.as_ref())?;
    let mut points = Vec::new();
    for (k, record) in reader.records().enumerate() {
        points.push(parse_row(&record?, domain.dim(), k + 1)?);
    }
    // from_points numbers rows from 0
    PointSet::from_points(domain, &points).map_err(|e| match e {
        Error::OffGrid { row, point } => Error::OffGrid {
            row: row + 1,
            point,
        },
        Error::DuplicatePoint { row, point } => Error::DuplicatePoint {
            row: row + 1,
            point,
        },
        other => other,
    })
}

fn coordinate_header(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

/// Writes grid-ordered values in the target CSV schema.
pub fn write_target_csv(out: impl Write, domain: &GridDomain, values: &[f64]) -> Result<()> {
    if values.len() != domain.len() {
        return Err(invalid("value count does not match the grid"));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = coordinate_header(domain.dim());
    header.push("value".into());
    w.write_record(&header)?;
    for (i, v) in values.iter().enumerate() {
        let mut rec: Vec<String> = domain.point(i).iter().map(f64::to_string).collect();
        rec.push(v.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a point set in the point-set CSV schema.
pub fn write_set_csv(out: impl Write, set: &PointSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(coordinate_header(set.domain().dim()))?;
    for p in set.points() {
        w.write_record(p.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}
