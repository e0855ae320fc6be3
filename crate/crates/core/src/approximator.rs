//! Constructive sup-norm approximation by elements of `N_4`.
//!
//! Starting from the midrange constant, every step takes the current error
//! `e`, sets `α = β·e` with `β ∈ (3/4, 1)` so that `e < 4α/3`, separates the
//! overshoot set `U⁺` from the undershoot set `U⁻` with some `H ∈ N_3^σ` at
//! tolerance 1/6, and replaces `f̂` by `f̂ - α·H + α/2`. On the grid the new
//! error is below `α`, so the error contracts geometrically with rate `β`.
//!
//! All guarantees are about grid points only.

use std::io::Write;

use rayon::prelude::*;

use crate::activation::SquashingFunction;
use crate::domain::{residual_sets, sample_target, GridDomain, TargetFunction};
use crate::error::{invalid, Error, Result};
use crate::network::{recombine, Construction, LayeredNetwork, Term};
use crate::separation::separate_sets_squashed;

/// Separation tolerance used inside every refinement step.
pub const STEP_TOLERANCE: f64 = 1.0 / 6.0;
pub const DEFAULT_BETA: f64 = 0.8;

/// One refinement step.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub index: usize,
    pub error_before: f64,
    pub alpha: f64,
    pub size_u_plus: usize,
    pub size_u_minus: usize,
    pub cover_sizes: Vec<usize>,
    pub error_after: f64,
    pub parameter_count_after: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefinementTrace {
    pub iterations: Vec<IterationRecord>,
}

impl RefinementTrace {
    /// Writes one CSV row per iteration. `cover_sizes` is a single
    /// semicolon-separated field.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "index",
            "error_before",
            "alpha",
            "size_u_plus",
            "size_u_minus",
            "cover_sizes",
            "error_after",
            "parameter_count_after",
        ])?;
        for r in &self.iterations {
            let covers: Vec<String> = r.cover_sizes.iter().map(usize::to_string).collect();
            w.write_record([
                r.index.to_string(),
                r.error_before.to_string(),
                r.alpha.to_string(),
                r.size_u_plus.to_string(),
                r.size_u_minus.to_string(),
                covers.join(";"),
                r.error_after.to_string(),
                r.parameter_count_after.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Value and location of the largest absolute deviation on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SupError {
    pub value: f64,
    pub argmax: Vec<f64>,
    pub argmax_index: usize,
}

fn values_on_grid(net: &LayeredNetwork, domain: &GridDomain) -> Result<Vec<f64>> {
    if net.input_dim() != domain.dim() {
        return Err(invalid(format!(
            "network input dimension {} does not match the {}-dimensional domain",
            net.input_dim(),
            domain.dim()
        )));
    }
    Ok((0..domain.len())
        .into_par_iter()
        .map(|i| net.eval(&domain.point(i)))
        .collect())
}

fn max_abs_deviation(values: &[f64], target: &[f64]) -> (f64, usize) {
    values
        .iter()
        .zip(target)
        .map(|(v, t)| (v - t).abs())
        .enumerate()
        .fold(
            (0.0, 0),
            |best, (i, e)| if e > best.0 { (e, i) } else { best },
        )
}

/// `max_p |net(p) - T(p)|` over the grid.
pub fn sup_error(
    net: &LayeredNetwork,
    target: &TargetFunction,
    domain: &GridDomain,
) -> Result<f64> {
    Ok(sup_error_report(net, target, domain)?.value)
}

/// [`sup_error`] together with the first grid point attaining it.
pub fn sup_error_report(
    net: &LayeredNetwork,
    target: &TargetFunction,
    domain: &GridDomain,
) -> Result<SupError> {
    let samples = sample_target(target, domain)?;
    let values = values_on_grid(net, domain)?;
    let (value, argmax_index) = max_abs_deviation(&values, &samples);
    Ok(SupError {
        value,
        argmax: domain.point(argmax_index),
        argmax_index,
    })
}

/// Result of one refinement step.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub approximant: Construction,
    pub record: IterationRecord,
}

fn check_member_of_n4(net: &LayeredNetwork) -> Result<()> {
    if net.depth() != 4 || net.is_squashed() {
        return Err(invalid(format!(
            "approximants must have three hidden layers and an affine output (depth {}, squashed {})",
            net.depth(),
            net.is_squashed()
        )));
    }
    Ok(())
}

/// One step `f = f̂ - α·H + α/2`. Requires `sup |f̂ - T| < 4α/3` on the grid and
/// guarantees `sup |f - T| < α` there (checked by evaluating `f`).
pub fn refine_once(
    f_hat: &Construction,
    target: &TargetFunction,
    domain: &GridDomain,
    alpha: f64,
    sigma: &SquashingFunction,
) -> Result<Refinement> {
    let samples = sample_target(target, domain)?;
    refine_sampled(f_hat, &samples, domain, alpha, sigma, 0)
}

fn refine_sampled(
    f_hat: &Construction,
    samples: &[f64],
    domain: &GridDomain,
    alpha: f64,
    sigma: &SquashingFunction,
    index: usize,
) -> Result<Refinement> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(invalid(format!("alpha must be positive, got {alpha}")));
    }
    check_member_of_n4(&f_hat.network)?;
    if f_hat.network.sigma() != sigma {
        return Err(invalid("approximant and step use different activations"));
    }
    let before = values_on_grid(&f_hat.network, domain)?;
    let residual: Vec<f64> = before.iter().zip(samples).map(|(f, t)| f - t).collect();
    let (error_before, worst) = max_abs_deviation(&before, samples);
    if !(error_before < 4.0 * alpha / 3.0) {
        return Err(Error::Precondition(format!(
            "sup error {error_before} at {:?} is not below 4·alpha/3 = {}",
            domain.point(worst),
            4.0 * alpha / 3.0
        )));
    }

    let (u_plus, u_minus) = residual_sets(&residual, domain, alpha)?;
    let h = separate_sets_squashed(&u_plus, &u_minus, STEP_TOLERANCE, sigma)?;
    let lifted = h.network.lift()?;
    let network = recombine(&[&f_hat.network, &lifted], &[1.0, -alpha], alpha / 2.0)?;
    let term = Term::Sum {
        bias: alpha / 2.0,
        terms: vec![(1.0, f_hat.term.clone()), (-alpha, h.term)],
    };

    let after = values_on_grid(&network, domain)?;
    let (error_after, worst) = max_abs_deviation(&after, samples);
    if !(error_after < alpha) {
        let p = domain.point(worst);
        return Err(Error::ConstructionFailed {
            value: after[worst] - samples[worst],
            point: p,
            bound: format!("|f - T| < alpha = {alpha}"),
        });
    }

    let record = IterationRecord {
        index,
        error_before,
        alpha,
        size_u_plus: u_plus.len(),
        size_u_minus: u_minus.len(),
        cover_sizes: h.cover_sizes,
        error_after,
        parameter_count_after: network.stats().parameter_count,
    };
    Ok(Refinement {
        approximant: Construction { network, term },
        record,
    })
}

/// Final network and trace of a converged run.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub approximant: Construction,
    pub trace: RefinementTrace,
    pub final_error: f64,
}

/// State of a run that exhausted its iteration budget.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialApproximation {
    pub approximant: Construction,
    pub trace: RefinementTrace,
    pub final_error: f64,
}

/// The midrange constant `(max T + min T)/2` as an element of `N_4`.
pub fn initial_approximant(
    samples: &[f64],
    dim: usize,
    sigma: &SquashingFunction,
) -> Result<Construction> {
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(invalid("target samples must be finite"));
    }
    let c = 0.5 * (lo + hi);
    Ok(Construction {
        network: LayeredNetwork::constant(dim, 3, c, false, sigma.clone())?,
        term: Term::constant(c),
    })
}

/// Upper bound `⌈ln(e0/eps) / ln(1/β)⌉` on the number of steps (0 when the
/// start is already within `eps`).
pub fn geometric_iteration_bound(initial_error: f64, eps: f64, beta: f64) -> usize {
    if initial_error < eps {
        return 0;
    }
    ((initial_error / eps).ln() / (1.0 / beta).ln()).ceil() as usize
}

/// Runs refinement steps until the grid sup error is below `eps`.
pub fn approximate(
    target: &TargetFunction,
    domain: &GridDomain,
    eps: f64,
    sigma: &SquashingFunction,
    beta: f64,
    max_iterations: usize,
) -> Result<Approximation> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    if !(beta > 0.75 && beta < 1.0) {
        return Err(invalid(format!(
            "beta must lie in (3/4, 1) so that alpha = beta·e keeps e < 4·alpha/3, got {beta}"
        )));
    }
    if max_iterations == 0 {
        return Err(invalid("max_iterations must be at least 1"));
    }
    if !sigma.supports_construction() {
        return Err(invalid(format!(
            "{} activation cannot drive the construction",
            sigma.kind_name()
        )));
    }
    let samples = sample_target(target, domain)?;
    let mut current = initial_approximant(&samples, domain.dim(), sigma)?;
    let mut error = max_abs_deviation(&values_on_grid(&current.network, domain)?, &samples).0;
    let mut trace = RefinementTrace::default();

    while error >= eps {
        if trace.iterations.len() == max_iterations {
            return Err(Error::NotConverged(Box::new(PartialApproximation {
                approximant: current,
                trace,
                final_error: error,
            })));
        }
        let alpha = beta * error;
        let step = refine_sampled(
            &current,
            &samples,
            domain,
            alpha,
            sigma,
            trace.iterations.len(),
        )?;
        error = step.record.error_after;
        trace.iterations.push(step.record);
        current = step.approximant;
    }

    Ok(Approximation {
        approximant: current,
        trace,
        final_error: error,
    })
}
