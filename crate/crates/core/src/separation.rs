//! Explicit separating networks.
//!
//! * [`separate_scalar_points`]: a gate `σ(s + t·x)` below `ε` at one real
//!   number and above `1 - ε` at another.
//! * [`separate_point_from_set`]: `g ∈ N_2` small at a point and close to one
//!   on a finite set.
//! * [`separate_sets_affine`] and [`separate_sets_squashed`]: `h ∈ N_3` and
//!   `H ∈ N_3^σ` close to one on `A` and small on `B`.
//!
//! The compactness arguments become exact finite covers over grid point
//! sets, extracted greedily. Every constructor evaluates its own result on
//! the defining sets and fails with [`Error::ConstructionFailed`] if a bound
//! does not hold.

use rayon::prelude::*;

use crate::activation::SquashingFunction;
use crate::domain::PointSet;
use crate::error::{invalid, Error, Result};
use crate::network::{affine_combine, recombine, AffineMap, Construction, LayeredNetwork, Term};

/// Slack allowed on the `≥ 1 - ε` side of the point-versus-set bound, which
/// the quantile solve only meets up to rounding.
pub const CONTRACT_SLACK: f64 = 1e-9;

/// Parameters of `x ↦ σ(s + t·x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarGate {
    pub s: f64,
    pub t: f64,
}

impl ScalarGate {
    pub fn apply(&self, sigma: &SquashingFunction, x: f64) -> f64 {
        sigma.eval(self.s + self.t * x)
    }
}

/// Solves `s + t·x0 = σ⁻¹(ε/2)`, `s + t·x1 = σ⁻¹(1 - ε/2)`.
///
/// The gate is increasing in `x` when `x0 < x1`, so for `ε < 1/2` it also
/// stays below `ε` on `(-∞, x0]` and above `1 - ε` on `[x1, ∞)`.
pub fn separate_scalar_points(
    sigma: &SquashingFunction,
    x0: f64,
    x1: f64,
    eps: f64,
) -> Result<ScalarGate> {
    if !(x0.is_finite() && x1.is_finite()) {
        return Err(invalid("gate abscissae must be finite"));
    }
    if x0 == x1 {
        return Err(Error::DegeneratePair(x0));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!(
            "gate tolerance must lie in (0, 1), got {eps}"
        )));
    }
    let y0 = sigma.quantile(eps / 2.0)?;
    let y1 = sigma.quantile(1.0 - eps / 2.0)?;
    let t = (y1 - y0) / (x1 - x0);
    let s = y0 - t * x0;
    Ok(ScalarGate { s, t })
}

/// The affine map with value exactly 0 at `x0` and 1 at `b` (up to
/// rounding): `f(x) = (b - x0)·(x - x0) / |b - x0|²`.
pub fn hyperplane_witness(x0: &[f64], b: &[f64]) -> Result<AffineMap> {
    if x0.len() != b.len() {
        return Err(invalid("witness points differ in dimension"));
    }
    let d: Vec<f64> = b.iter().zip(x0).map(|(bi, xi)| bi - xi).collect();
    let norm2: f64 = d.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    let weights: Vec<f64> = d.iter().map(|v| v / norm2).collect();
    let bias = -weights.iter().zip(x0).map(|(w, x)| w * x).sum::<f64>();
    Ok(AffineMap::new(bias, weights))
}

/// Greedy set cover. `member[c][t]` says candidate `c` covers target `t`.
/// Repeatedly takes the candidate covering the most still-uncovered targets,
/// smallest index first on ties.
pub fn greedy_cover(member: &[Vec<bool>]) -> Result<Vec<usize>> {
    let cols = member.first().map_or(0, Vec::len);
    if member.iter().any(|r| r.len() != cols) {
        return Err(invalid("membership matrix rows differ in length"));
    }
    if let Some(target) = (0..cols).find(|&t| member.iter().all(|r| !r[t])) {
        return Err(Error::InfeasibleCover { target });
    }

    let words = cols.div_ceil(64);
    let bits: Vec<Vec<u64>> = member
        .iter()
        .map(|row| {
            let mut w = vec![0u64; words];
            for (t, _) in row.iter().enumerate().filter(|(_, &m)| m) {
                w[t / 64] |= 1 << (t % 64);
            }
            w
        })
        .collect();
    let mut uncovered = vec![0u64; words];
    for t in 0..cols {
        uncovered[t / 64] |= 1 << (t % 64);
    }

    let mut chosen = Vec::new();
    let mut remaining = cols;
    while remaining > 0 {
        let mut best = (0usize, 0u32);
        for (c, row) in bits.iter().enumerate() {
            let gain: u32 = row
                .iter()
                .zip(&uncovered)
                .map(|(r, u)| (r & u).count_ones())
                .sum();
            if gain > best.1 {
                best = (c, gain);
            }
        }
        let (c, gain) = best;
        debug_assert!(gain > 0, "feasibility was checked up front");
        for (u, r) in uncovered.iter_mut().zip(&bits[c]) {
            *u &= !r;
        }
        remaining -= gain as usize;
        chosen.push(c);
    }
    Ok(chosen)
}

/// Output of a set-level constructor.
#[derive(Debug, Clone, PartialEq)]
pub struct Separator {
    pub network: LayeredNetwork,
    pub term: Term,
    /// Cover sizes in construction order. Point-versus-set: `[N]`.
    /// Set-versus-set: `[N, N_1, ..., N_N]` with the outer cover first and the
    /// inner cover of every selected point after it. Empty for the constant
    /// degenerate separators.
    pub cover_sizes: Vec<usize>,
}

impl Separator {
    pub fn into_construction(self) -> Construction {
        Construction {
            network: self.network,
            term: self.term,
        }
    }
}

fn check_sigma(sigma: &SquashingFunction) -> Result<()> {
    if sigma.supports_construction() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{} activation is not strictly increasing; separators need quantiles at arbitrary levels",
            sigma.kind_name()
        )))
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 / 3.0 {
        Ok(())
    } else {
        Err(invalid(format!(
            "separation tolerance must lie in (0, 1/3), got {eps}"
        )))
    }
}

fn failed(point: &[f64], value: f64, bound: impl Into<String>) -> Error {
    Error::ConstructionFailed {
        point: point.to_vec(),
        value,
        bound: bound.into(),
    }
}

/// Gate below `eps/cover` on `(-∞, eps]` and above `1 - eps/cover` on
/// `[1 - eps, ∞)`.
fn threshold_gate(sigma: &SquashingFunction, eps: f64, cover: usize) -> Result<ScalarGate> {
    separate_scalar_points(sigma, eps, 1.0 - eps, 2.0 * eps / cover as f64)
}

/// Builds `g ∈ N_2` with `g(x0) < eps` and `g ≥ 1 - eps` on `set`
/// (to within [`CONTRACT_SLACK`]).
pub fn separate_point_from_set(
    x0: &[f64],
    set: &PointSet,
    eps: f64,
    sigma: &SquashingFunction,
) -> Result<Separator> {
    check_sigma(sigma)?;
    check_eps(eps)?;
    if set.is_empty() {
        return Err(invalid("cannot separate a point from an empty set"));
    }
    if x0.len() != set.domain().dim() || x0.iter().any(|v| !v.is_finite()) {
        return Err(invalid(
            "separated point must be finite and match the domain dimension",
        ));
    }
    let points = set.points();
    if points.iter().any(|b| b.as_slice() == x0) {
        return Err(Error::PointInSet { point: x0.to_vec() });
    }

    let witnesses = points
        .iter()
        .map(|b| hyperplane_witness(x0, b))
        .collect::<Result<Vec<_>>>()?;
    let member: Vec<Vec<bool>> = witnesses
        .iter()
        .map(|f| points.iter().map(|p| f.eval(p) > 1.0 - eps).collect())
        .collect();
    let cover = greedy_cover(&member)?;
    let gate = threshold_gate(sigma, eps, cover.len())?;

    let gates = cover
        .iter()
        .map(|&j| {
            LayeredNetwork::affine(&witnesses[j], sigma.clone())?.squash_affine_of(gate.s, gate.t)
        })
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&LayeredNetwork> = gates.iter().collect();
    let network = affine_combine(&refs, &vec![1.0; refs.len()], 0.0)?;
    let term = Term::Sum {
        bias: 0.0,
        terms: cover
            .iter()
            .map(|&j| {
                (
                    1.0,
                    Term::gate(Term::Affine(witnesses[j].clone()), gate.s, gate.t),
                )
            })
            .collect(),
    };

    let at_x0 = network.eval(x0);
    if !(at_x0 < eps) {
        return Err(failed(x0, at_x0, format!("g(x0) < {eps}")));
    }
    let values = network.evaluate_many(points)?;
    if let Some((p, &v)) = points
        .iter()
        .zip(&values)
        .find(|(_, &v)| !(v > 1.0 - eps - CONTRACT_SLACK))
    {
        return Err(failed(p, v, format!("g >= 1 - {eps} on B")));
    }

    Ok(Separator {
        network,
        term,
        cover_sizes: vec![cover.len()],
    })
}

fn check_pair(a: &PointSet, b: &PointSet) -> Result<()> {
    if a.domain().dim() != b.domain().dim() {
        return Err(invalid("sets live in domains of different dimension"));
    }
    if let Some(p) = a.first_common_point(b) {
        return Err(Error::Overlap { point: p.to_vec() });
    }
    // sets may come from different grids over the same space
    if let Some(p) = a.points().iter().find(|p| b.points().contains(p)) {
        return Err(Error::Overlap { point: p.clone() });
    }
    Ok(())
}

/// Builds `h ∈ N_3` with `h > 1 - eps` on `a` and `h < eps` on `b`.
pub fn separate_sets_affine(
    a: &PointSet,
    b: &PointSet,
    eps: f64,
    sigma: &SquashingFunction,
) -> Result<Separator> {
    check_sigma(sigma)?;
    check_eps(eps)?;
    if a.is_empty() || b.is_empty() {
        return Err(invalid(
            "set-versus-set separation needs two non-empty sets",
        ));
    }
    check_pair(a, b)?;
    let a_points = a.points();

    // g_a = 1 - g̃_a where g̃_a separates a from B at tolerance eps/2
    let per_point = a_points
        .par_iter()
        .map(|p| {
            let inner = separate_point_from_set(p, b, eps / 2.0, sigma)?;
            let g = recombine(&[&inner.network], &[-1.0], 1.0)?;
            let term = Term::Sum {
                bias: 1.0,
                terms: vec![(-1.0, inner.term)],
            };
            let row = g.evaluate_many(a_points)?;
            Ok((g, term, inner.cover_sizes[0], row))
        })
        .collect::<Result<Vec<_>>>()?;

    let member: Vec<Vec<bool>> = per_point
        .iter()
        .map(|(_, _, _, row)| row.iter().map(|&v| v > 1.0 - eps).collect())
        .collect();
    let cover = greedy_cover(&member)?;
    let gate = threshold_gate(sigma, eps, cover.len())?;

    let gated = cover
        .iter()
        .map(|&j| per_point[j].0.squash_affine_of(gate.s, gate.t))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&LayeredNetwork> = gated.iter().collect();
    let network = affine_combine(&refs, &vec![1.0; refs.len()], 0.0)?;
    let term = Term::Sum {
        bias: 0.0,
        terms: cover
            .iter()
            .map(|&j| (1.0, Term::gate(per_point[j].1.clone(), gate.s, gate.t)))
            .collect(),
    };
    let mut cover_sizes = vec![cover.len()];
    cover_sizes.extend(cover.iter().map(|&j| per_point[j].2));

    let on_a = network.evaluate_many(a_points)?;
    if let Some((p, &v)) = a_points.iter().zip(&on_a).find(|(_, &v)| !(v > 1.0 - eps)) {
        return Err(failed(p, v, format!("h > 1 - {eps} on A")));
    }
    let on_b = network.evaluate_many(b.points())?;
    if let Some((p, &v)) = b.points().iter().zip(&on_b).find(|(_, &v)| !(v < eps)) {
        return Err(failed(p, v, format!("h < {eps} on B")));
    }

    Ok(Separator {
        network,
        term,
        cover_sizes,
    })
}

/// Builds `H ∈ N_3^σ` with `1 - eps < H ≤ 1` on `a` and `0 ≤ H < eps` on `b`.
///
/// An empty `a` gives the constant `σ(σ⁻¹(eps/2)) ≈ eps/2`; an empty `b` gives
/// the constant `≈ 1 - eps/2`. Both are stored with zero-weight hidden layers
/// so the depth matches the general case.
pub fn separate_sets_squashed(
    a: &PointSet,
    b: &PointSet,
    eps: f64,
    sigma: &SquashingFunction,
) -> Result<Separator> {
    check_sigma(sigma)?;
    check_eps(eps)?;
    let dim = a.domain().dim();
    if dim != b.domain().dim() {
        return Err(invalid("sets live in domains of different dimension"));
    }
    if a.is_empty() || b.is_empty() {
        let level = if a.is_empty() {
            eps / 2.0
        } else {
            1.0 - eps / 2.0
        };
        let q = sigma.quantile(level)?;
        return Ok(Separator {
            network: LayeredNetwork::constant(dim, 2, q, true, sigma.clone())?,
            term: Term::Squash(Box::new(Term::constant(q))),
            cover_sizes: Vec::new(),
        });
    }

    let inner = separate_sets_affine(a, b, eps, sigma)?;
    let gate = separate_scalar_points(sigma, eps, 1.0 - eps, eps)?;
    let network = inner.network.squash_affine_of(gate.s, gate.t)?;
    let term = Term::gate(inner.term, gate.s, gate.t);

    let on_a = network.evaluate_many(a.points())?;
    if let Some((p, &v)) = a
        .points()
        .iter()
        .zip(&on_a)
        .find(|(_, &v)| !(v > 1.0 - eps && v <= 1.0))
    {
        return Err(failed(p, v, format!("1 - {eps} < H <= 1 on A")));
    }
    let on_b = network.evaluate_many(b.points())?;
    if let Some((p, &v)) = b
        .points()
        .iter()
        .zip(&on_b)
        .find(|(_, &v)| !(v >= 0.0 && v < eps))
    {
        return Err(failed(p, v, format!("0 <= H < {eps} on B")));
    }

    Ok(Separator {
        network,
        term,
        cover_sizes: inner.cover_sizes,
    })
}
