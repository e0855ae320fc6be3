//! 0-1 squashing functions: evaluation, generalized inverses and a numerical
//! check of the squashing assumptions (monotone, tails at 0 and 1).

use std::path::Path;

use crate::error::{invalid, Error, Result};

/// Absolute tolerance on `value(x) - p` used by the table bisection.
const BISECTION_TOL: f64 = 1e-12;
const BISECTION_MAX_ITER: usize = 200;

/// Default half-width of the probe interval used to check the tails.
pub const DEFAULT_PROBE_HALFWIDTH: f64 = 40.0;
/// Maximum distance of the probe tails from 0 and 1 for a pass.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// A monotone activation `σ: ℝ → [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum SquashingFunction {
    /// `1 / (1 + e^(-x))`.
    Logistic,
    /// `(1 + tanh x) / 2`.
    TanhRescaled,
    /// 0 below `lo`, 1 above `hi`, linear in between.
    Ramp { lo: f64, hi: f64 },
    /// Piecewise-linear interpolation of `(x, σ(x))` samples, constant
    /// outside the sampled range.
    Tabulated(MonotoneTable),
}

/// Samples of a tabulated activation, sorted by strictly increasing `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl MonotoneTable {
    /// Builds a table. `xs` must be finite and strictly increasing and every
    /// `ys` value must lie in `[0, 1]`; monotonicity of `ys` is not required
    /// here (see [`verify_squashing`]).
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(invalid("table columns differ in length"));
        }
        if xs.len() < 2 {
            return Err(invalid("table needs at least two rows"));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(invalid("table abscissae must be finite"));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("table abscissae must be strictly increasing"));
        }
        if ys.iter().any(|y| !(0.0..=1.0).contains(y)) {
            return Err(invalid("table values must lie in [0, 1]"));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    fn value(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        // first index with xs[i] > x; 1 <= i <= n-1
        let i = self.xs.partition_point(|&v| v <= x);
        let (x0, x1) = (self.xs[i - 1], self.xs[i]);
        let (y0, y1) = (self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * ((x - x0) / (x1 - x0))
    }

    fn strictly_increasing(&self) -> bool {
        self.ys.windows(2).all(|w| w[0] < w[1])
    }

    /// Reads a two-column `x, σ(x)` CSV sorted by `x`. A header row is
    /// optional and detected by a non-numeric first field.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(invalid(format!(
                    "activation table row {}: expected 2 columns, found {}",
                    row + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(invalid(format!(
                        "activation table row {}: unparsable number",
                        row + 1
                    )))
                }
            }
        }
        Self::new(xs, ys)
    }
}

impl SquashingFunction {
    pub fn ramp(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid(format!(
                "ramp needs finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self::Ramp { lo, hi })
    }

    /// Stable name used by the network file format.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::Logistic => "logistic",
            Self::TanhRescaled => "tanh-rescaled",
            Self::Ramp { .. } => "piecewise-linear-ramp",
            Self::Tabulated(_) => "tabulated-monotone",
        }
    }

    /// Kind-specific parameters. Tables are flattened as `x0, y0, x1, y1, ...`.
    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::Logistic | Self::TanhRescaled => Vec::new(),
            Self::Ramp { lo, hi } => vec![*lo, *hi],
            Self::Tabulated(table) => table
                .xs
                .iter()
                .zip(&table.ys)
                .flat_map(|(&x, &y)| [x, y])
                .collect(),
        }
    }

    /// Inverse of [`kind_name`](Self::kind_name) + [`params`](Self::params).
    pub fn from_parts(kind: &str, params: &[f64]) -> Result<Self> {
        match kind {
            "logistic" | "tanh-rescaled" if !params.is_empty() => {
                Err(invalid(format!("{kind} takes no parameters")))
            }
            "logistic" => Ok(Self::Logistic),
            "tanh-rescaled" => Ok(Self::TanhRescaled),
            "piecewise-linear-ramp" => match params {
                [lo, hi] => Self::ramp(*lo, *hi),
                _ => Err(invalid("ramp takes exactly two parameters")),
            },
            "tabulated-monotone" => {
                if !params.len().is_multiple_of(2) {
                    return Err(invalid("table parameters must come in (x, y) pairs"));
                }
                let xs = params.iter().step_by(2).copied().collect();
                let ys = params.iter().skip(1).step_by(2).copied().collect();
                Ok(Self::Tabulated(MonotoneTable::new(xs, ys)?))
            }
            other => Err(invalid(format!("unknown activation kind {other:?}"))),
        }
    }

    /// Whether quantiles exist at every level in `(0, 1)` reachable by the
    /// kind and the function is strictly increasing on its transition range.
    /// The separation constructors require this.
    pub fn supports_construction(&self) -> bool {
        match self {
            Self::Logistic | Self::TanhRescaled => true,
            Self::Ramp { .. } => false,
            Self::Tabulated(table) => table.strictly_increasing(),
        }
    }

    /// Evaluates `σ(x)` for finite `x`.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(invalid(format!(
                "activation argument must be finite, got {x}"
            )));
        }
        Ok(self.eval(x))
    }

    /// Unchecked evaluation used on hot paths; `x` is assumed finite.
    #[inline]
    pub(crate) fn eval(&self, x: f64) -> f64 {
        match self {
            Self::Logistic => {
                if x >= 0.0 {
                    1.0 / (1.0 + (-x).exp())
                } else {
                    let e = x.exp();
                    e / (1.0 + e)
                }
            }
            Self::TanhRescaled => 0.5 * (1.0 + x.tanh()),
            Self::Ramp { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Self::Tabulated(table) => table.value(x),
        }
    }

    /// Generalized inverse: returns `y` with `σ(y) = p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!(
                "quantile level must lie in (0, 1), got {p}"
            )));
        }
        match self {
            Self::Logistic => Ok(p.ln() - (-p).ln_1p()),
            Self::TanhRescaled => Ok((2.0 * p - 1.0).atanh()),
            Self::Ramp { lo, hi } => Ok(lo + p * (hi - lo)),
            Self::Tabulated(table) => {
                let n = table.xs.len();
                let (lo_val, hi_val) = (table.ys[0], table.ys[n - 1]);
                if p < lo_val.min(hi_val) || p > lo_val.max(hi_val) {
                    return Err(Error::UnattainableLevel { level: p });
                }
                Ok(bisect(|x| table.value(x), table.xs[0], table.xs[n - 1], p))
            }
        }
    }
}

/// Bisection for `f(x) = target` on `[lo, hi]` with `f` non-decreasing and
/// `f(lo) <= target <= f(hi)`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, target: f64) -> f64 {
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..BISECTION_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v - target).abs() <= BISECTION_TOL || mid <= lo || mid >= hi {
            break;
        }
        if v < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// A monotonicity violation between two consecutive probes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub left: f64,
    pub right: f64,
    pub left_value: f64,
    pub right_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SquashingReport {
    pub violations: Vec<MonotonicityViolation>,
    pub lower_tail: f64,
    pub upper_tail: f64,
    pub passed: bool,
}

/// Sweeps `probe_count` equispaced points of `[-halfwidth, halfwidth]`,
/// recording every decrease and the tail values at the two ends.
pub fn verify_squashing(
    sigma: &SquashingFunction,
    probe_count: usize,
    probe_halfwidth: f64,
) -> Result<SquashingReport> {
    if probe_count < 2 {
        return Err(invalid("verify_squashing needs at least two probes"));
    }
    if !(probe_halfwidth > 0.0 && probe_halfwidth.is_finite()) {
        return Err(invalid("probe half-width must be positive and finite"));
    }
    let step = 2.0 * probe_halfwidth / (probe_count - 1) as f64;
    let probes: Vec<f64> = (0..probe_count)
        .map(|i| {
            if i == probe_count - 1 {
                probe_halfwidth
            } else {
                -probe_halfwidth + step * i as f64
            }
        })
        .collect();
    let values: Vec<f64> = probes.iter().map(|&x| sigma.eval(x)).collect();
    let violations: Vec<_> = (1..probe_count)
        .filter(|&i| values[i] < values[i - 1])
        .map(|i| MonotonicityViolation {
            left: probes[i - 1],
            right: probes[i],
            left_value: values[i - 1],
            right_value: values[i],
        })
        .collect();
    let lower_tail = values[0];
    let upper_tail = values[probe_count - 1];
    let passed = violations.is_empty()
        && lower_tail.abs() <= TAIL_TOLERANCE
        && (1.0 - upper_tail).abs() <= TAIL_TOLERANCE;
    Ok(SquashingReport {
        violations,
        lower_tail,
        upper_tail,
        passed,
    })
}
