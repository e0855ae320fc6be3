//! Parsers for the textual argument forms shared by several commands.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use squashnet_core::domain::load_target_csv;
use squashnet_core::{GridDomain, MonotoneTable, SquashingFunction, TargetFunction};

/// `logistic`, `tanh`, `ramp:lo,hi` or `table:PATH`.
pub fn parse_sigma(spec: &str) -> Result<SquashingFunction> {
    let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match kind {
        "logistic" => SquashingFunction::Logistic,
        "tanh" | "tanh-rescaled" => SquashingFunction::TanhRescaled,
        "ramp" => {
            let [lo, hi] = parse_floats(rest)?[..] else {
                bail!("ramp activation takes two bounds, as in ramp:-1,1");
            };
            SquashingFunction::ramp(lo, hi)?
        }
        "table" if !rest.is_empty() => SquashingFunction::Tabulated(
            MonotoneTable::from_csv_path(rest)
                .with_context(|| format!("loading activation table {rest}"))?,
        ),
        _ => {
            bail!("unknown activation {spec:?} (expected logistic, tanh, ramp:lo,hi or table:PATH)")
        }
    })
}

/// Comma-separated finite floats.
pub fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| {
            let x: f64 = v
                .trim()
                .parse()
                .with_context(|| format!("bad number {v:?}"))?;
            if !x.is_finite() {
                bail!("non-finite number {v:?}");
            }
            Ok(x)
        })
        .collect()
}

/// A target as written on the command line. CSV targets are resolved against
/// the grid once the domain is known.
#[derive(Debug, Clone)]
pub enum TargetSpec {
    Builtin(TargetFunction),
    Csv(PathBuf),
}

impl TargetSpec {
    pub fn resolve(&self, domain: &GridDomain) -> Result<TargetFunction> {
        match self {
            Self::Builtin(t) => Ok(t.clone()),
            Self::Csv(path) => load_target_csv(path, domain)
                .with_context(|| format!("loading target {}", path.display())),
        }
    }
}

impl FromStr for TargetSpec {
    type Err = anyhow::Error;

    /// `const:C`, `proj:AXIS`, `sin2pix`, `sin2pix-cos2piy`,
    /// `gauss:CENTER;WIDTH[;AMPLITUDE]`, `maxcoord` or `csv:PATH`.
    fn from_str(spec: &str) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let target = match kind {
            "const" => TargetFunction::Constant(
                parse_floats(rest)?
                    .first()
                    .copied()
                    .context("const target needs a value")?,
            ),
            "proj" => TargetFunction::Projection(
                rest.parse().with_context(|| format!("bad axis {rest:?}"))?,
            ),
            "sin2pix" => TargetFunction::sin_2pi_x(),
            "sin2pix-cos2piy" => TargetFunction::sin_2pi_x_cos_2pi_y(),
            "maxcoord" => TargetFunction::MaxOfCoordinates,
            "gauss" => {
                let parts: Vec<&str> = rest.split(';').collect();
                let (center, width, amplitude) = match parts[..] {
                    [c, w] => (c, w, "1"),
                    [c, w, a] => (c, w, a),
                    _ => bail!("gauss target is gauss:CENTER;WIDTH[;AMPLITUDE]"),
                };
                TargetFunction::GaussianBump {
                    center: parse_floats(center)?,
                    width: parse_floats(width)?[0],
                    amplitude: parse_floats(amplitude)?[0],
                }
            }
            "csv" if !rest.is_empty() => return Ok(Self::Csv(rest.into())),
            _ => bail!("unknown target {spec:?}"),
        };
        Ok(Self::Builtin(target))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_forms() {
        assert_eq!(
            parse_sigma("logistic").unwrap(),
            SquashingFunction::Logistic
        );
        assert_eq!(
            parse_sigma("tanh").unwrap(),
            SquashingFunction::TanhRescaled
        );
        assert_eq!(
            parse_sigma("ramp:-1,2").unwrap(),
            SquashingFunction::ramp(-1.0, 2.0).unwrap()
        );
        assert!(parse_sigma("ramp:1").is_err());
        assert!(parse_sigma("relu").is_err());
        assert!(parse_sigma("table:").is_err());
    }

    #[test]
    fn target_forms() {
        let builtin = |s: &str| match s.parse::<TargetSpec>().unwrap() {
            TargetSpec::Builtin(t) => t,
            TargetSpec::Csv(_) => panic!("expected a builtin"),
        };
        assert_eq!(builtin("const:2.5"), TargetFunction::Constant(2.5));
        assert_eq!(builtin("proj:1"), TargetFunction::Projection(1));
        assert_eq!(builtin("sin2pix"), TargetFunction::sin_2pi_x());
        assert_eq!(
            builtin("gauss:0.5,0.5;0.2"),
            TargetFunction::GaussianBump {
                center: vec![0.5, 0.5],
                width: 0.2,
                amplitude: 1.0
            }
        );
        assert!(matches!(
            "csv:t.csv".parse::<TargetSpec>().unwrap(),
            TargetSpec::Csv(_)
        ));
        assert!("gauss:1".parse::<TargetSpec>().is_err());
        assert!("proj:x".parse::<TargetSpec>().is_err());
        assert!("wave".parse::<TargetSpec>().is_err());
    }

    #[test]
    fn floats_reject_garbage() {
        assert_eq!(parse_floats("1, -2.5,3e2").unwrap(), vec![1.0, -2.5, 300.0]);
        assert!(parse_floats("1,,2").is_err());
        assert!(parse_floats("inf").is_err());
    }
}
