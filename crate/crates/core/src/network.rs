//! Explicit layered networks for the families `N_k` (affine output) and
//! `N_k^σ` (squashed output), with the algebra the constructions need:
//! affine combination, σ-composition, embedding one level up, and the JSON
//! file format.
//!
//! A network with `k - 1` hidden σ layers and an affine output is an element
//! of `N_k`; the same network with a squashed output is an element of
//! `N_k^σ`. Storage is dense and row-major; block-diagonal merges keep their
//! zero blocks explicitly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::activation::SquashingFunction;
use crate::error::{invalid, Error, Result};

/// `x ↦ bias + weights · x`, an element of `N_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub bias: f64,
    pub weights: Vec<f64>,
}

impl AffineMap {
    pub fn new(bias: f64, weights: Vec<f64>) -> Self {
        Self { bias, weights }
    }

    pub fn constant(value: f64, input_dim: usize) -> Self {
        Self::new(value, vec![0.0; input_dim])
    }

    pub fn input_dim(&self) -> usize {
        self.weights.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        affine(self.bias, &self.weights, x)
    }
}

#[inline]
fn affine(bias: f64, weights: &[f64], x: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (w, v) in weights.iter().zip(x) {
        acc += w * v;
    }
    bias + acc
}

/// One hidden layer: `rows × cols` weights (row-major) and `rows` biases,
/// followed by elementwise σ.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    rows: usize,
    cols: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(rows: usize, cols: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if weights.len() != rows * cols || bias.len() != rows {
            return Err(invalid(format!(
                "layer shape {rows}x{cols} does not match {} weights and {} biases",
                weights.len(),
                bias.len()
            )));
        }
        if rows == 0 {
            return Err(invalid("hidden layers must have at least one unit"));
        }
        if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
            return Err(invalid("layer parameters must be finite"));
        }
        Ok(Self {
            rows,
            cols,
            weights,
            bias,
        })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(invalid("ragged weight matrix"));
        }
        let n = rows.len();
        Self::new(n, cols, rows.into_iter().flatten().collect(), bias)
    }

    /// Number of units (outputs).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of inputs.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.cols..(i + 1) * self.cols]
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    fn forward(&self, sigma: &SquashingFunction, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend((0..self.rows).map(|i| sigma.eval(affine(self.bias[i], self.row(i), input))));
    }
}

/// An element of `N_k` or `N_k^σ` in explicit layered form.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredNetwork {
    input_dim: usize,
    hidden: Vec<DenseLayer>,
    output_weights: Vec<f64>,
    output_bias: f64,
    output_squashed: bool,
    sigma: SquashingFunction,
}

/// Depth, hidden widths and parameter count of a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkStats {
    pub depth: usize,
    pub widths: Vec<usize>,
    pub parameter_count: usize,
}

impl LayeredNetwork {
    pub fn new(
        input_dim: usize,
        hidden: Vec<DenseLayer>,
        output_weights: Vec<f64>,
        output_bias: f64,
        output_squashed: bool,
        sigma: SquashingFunction,
    ) -> Result<Self> {
        if input_dim == 0 {
            return Err(invalid("input dimension must be positive"));
        }
        let mut width = input_dim;
        for (i, layer) in hidden.iter().enumerate() {
            if layer.cols != width {
                return Err(invalid(format!(
                    "hidden layer {i} expects {} inputs but receives {width}",
                    layer.cols
                )));
            }
            width = layer.rows;
        }
        if output_weights.len() != width {
            return Err(invalid(format!(
                "output row has {} weights but the last layer has width {width}",
                output_weights.len()
            )));
        }
        if !output_bias.is_finite() || output_weights.iter().any(|v| !v.is_finite()) {
            return Err(invalid("output parameters must be finite"));
        }
        Ok(Self {
            input_dim,
            hidden,
            output_weights,
            output_bias,
            output_squashed,
            sigma,
        })
    }

    /// The affine map itself as an element of `N_1`.
    pub fn affine(map: &AffineMap, sigma: SquashingFunction) -> Result<Self> {
        Self::new(
            map.input_dim(),
            Vec::new(),
            map.weights.clone(),
            map.bias,
            false,
            sigma,
        )
    }

    /// A constant function with `hidden_layers` zero-weight hidden layers of
    /// width one. With `squashed`, the output is `σ(pre_activation)`; otherwise
    /// the output is `pre_activation` itself.
    pub fn constant(
        input_dim: usize,
        hidden_layers: usize,
        pre_activation: f64,
        squashed: bool,
        sigma: SquashingFunction,
    ) -> Result<Self> {
        let mut hidden = Vec::with_capacity(hidden_layers);
        let mut width = input_dim;
        for _ in 0..hidden_layers {
            hidden.push(DenseLayer::new(1, width, vec![0.0; width], vec![0.0])?);
            width = 1;
        }
        Self::new(
            input_dim,
            hidden,
            vec![0.0; width],
            pre_activation,
            squashed,
            sigma,
        )
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_layers(&self) -> &[DenseLayer] {
        &self.hidden
    }

    pub fn output_weights(&self) -> &[f64] {
        &self.output_weights
    }

    pub fn output_bias(&self) -> f64 {
        self.output_bias
    }

    pub fn is_squashed(&self) -> bool {
        self.output_squashed
    }

    pub fn sigma(&self) -> &SquashingFunction {
        &self.sigma
    }

    /// `k` such that the network lies in `N_k` (or `N_k^σ` when squashed).
    pub fn depth(&self) -> usize {
        self.hidden.len() + 1
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(invalid(format!(
                "point has dimension {} but the network expects {}",
                x.len(),
                self.input_dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("evaluation point must be finite"));
        }
        Ok(self.eval(x))
    }

    /// Evaluates at many points in parallel; results are in input order and
    /// each value is computed exactly as by [`evaluate`](Self::evaluate).
    pub fn evaluate_many<P>(&self, points: &[P]) -> Result<Vec<f64>>
    where
        P: AsRef<[f64]> + Sync,
    {
        points
            .par_iter()
            .map(|p| self.evaluate(p.as_ref()))
            .collect()
    }

    pub(crate) fn eval(&self, x: &[f64]) -> f64 {
        let mut current: Vec<f64> = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.hidden {
            layer.forward(&self.sigma, &current, &mut next);
            std::mem::swap(&mut current, &mut next);
        }
        let out = affine(self.output_bias, &self.output_weights, &current);
        if self.output_squashed {
            self.sigma.eval(out)
        } else {
            out
        }
    }

    pub fn stats(&self) -> NetworkStats {
        let widths: Vec<usize> = self.hidden.iter().map(|l| l.rows).collect();
        let hidden_params: usize = self.hidden.iter().map(|l| (l.cols + 1) * l.rows).sum();
        NetworkStats {
            depth: self.depth(),
            parameter_count: hidden_params + self.output_weights.len() + 1,
            widths,
        }
    }

    /// `σ(s + t·net)`: folds `(s, t)` into the output row and squashes it.
    pub fn squash_affine_of(&self, s: f64, t: f64) -> Result<Self> {
        if self.output_squashed {
            return Err(invalid("squash_affine_of needs an unsquashed network"));
        }
        if !(s.is_finite() && t.is_finite()) {
            return Err(invalid("gate parameters must be finite"));
        }
        let mut out = self.clone();
        out.output_weights.iter_mut().for_each(|w| *w *= t);
        out.output_bias = s + t * self.output_bias;
        out.output_squashed = true;
        Ok(out)
    }

    /// Embeds `N_k^σ` into `N_{k+1}`: the squashed output node becomes a
    /// hidden layer of width one read out with weight 1 and bias 0.
    pub fn lift(&self) -> Result<Self> {
        if !self.output_squashed {
            return Err(invalid("lift needs a squashed network"));
        }
        let width = self.output_weights.len();
        let node = DenseLayer::new(
            1,
            width,
            self.output_weights.clone(),
            vec![self.output_bias],
        )?;
        let mut hidden = self.hidden.clone();
        hidden.push(node);
        Ok(Self {
            input_dim: self.input_dim,
            hidden,
            output_weights: vec![1.0],
            output_bias: 0.0,
            output_squashed: false,
            sigma: self.sigma.clone(),
        })
    }

    pub fn to_json(&self) -> Vec<u8> {
        serialize(self)
    }
}

fn check_compatible(nets: &[&LayeredNetwork], squashed: bool) -> Result<()> {
    let first = nets
        .first()
        .ok_or_else(|| invalid("cannot combine an empty list"))?;
    for (i, net) in nets.iter().enumerate() {
        if net.output_squashed != squashed {
            return Err(invalid(format!(
                "network {i} must be {}",
                if squashed { "squashed" } else { "unsquashed" }
            )));
        }
        if net.input_dim != first.input_dim {
            return Err(invalid(format!(
                "network {i} has a different input dimension"
            )));
        }
        if net.depth() != first.depth() {
            return Err(invalid(format!(
                "network {i} has depth {} but network 0 has depth {}; lift explicitly",
                net.depth(),
                first.depth()
            )));
        }
        if net.sigma != first.sigma {
            return Err(invalid(format!("network {i} uses a different activation")));
        }
    }
    Ok(())
}

fn check_coeffs(count: usize, coeffs: &[f64], bias: f64) -> Result<()> {
    if coeffs.len() != count {
        return Err(invalid(format!(
            "{} coefficients for {count} networks",
            coeffs.len()
        )));
    }
    if !bias.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(invalid("combination coefficients must be finite"));
    }
    Ok(())
}

/// `a_0 + Σ a_j F_j` for squashed networks `F_j ∈ N_k^σ` of equal depth,
/// returning an element of `N_{k+1}`.
pub fn affine_combine(
    nets: &[&LayeredNetwork],
    coeffs: &[f64],
    bias: f64,
) -> Result<LayeredNetwork> {
    check_compatible(nets, true)?;
    check_coeffs(nets.len(), coeffs, bias)?;
    let lifted = nets.iter().map(|n| n.lift()).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&LayeredNetwork> = lifted.iter().collect();
    recombine(&refs, coeffs, bias)
}

/// `a_0 + Σ a_j g_j` for unsquashed networks `g_j ∈ N_k` of equal depth,
/// returning another element of `N_k` (closure of `N_k` under affine
/// combination). Hidden layers are merged block-diagonally over the shared
/// input.
pub fn recombine(nets: &[&LayeredNetwork], coeffs: &[f64], bias: f64) -> Result<LayeredNetwork> {
    check_compatible(nets, false)?;
    check_coeffs(nets.len(), coeffs, bias)?;
    let first = nets[0];
    let mut out_bias = bias;
    for (net, &a) in nets.iter().zip(coeffs) {
        out_bias += a * net.output_bias;
    }

    if first.hidden.is_empty() {
        let mut weights = vec![0.0; first.input_dim];
        for (net, &a) in nets.iter().zip(coeffs) {
            for (w, &v) in weights.iter_mut().zip(&net.output_weights) {
                *w += a * v;
            }
        }
        return LayeredNetwork::new(
            first.input_dim,
            Vec::new(),
            weights,
            out_bias,
            false,
            first.sigma.clone(),
        );
    }

    let mut hidden = Vec::with_capacity(first.hidden.len());
    for depth in 0..first.hidden.len() {
        let blocks: Vec<&DenseLayer> = nets.iter().map(|n| &n.hidden[depth]).collect();
        hidden.push(if depth == 0 {
            stack_rows(&blocks)
        } else {
            block_diagonal(&blocks)
        });
    }
    let mut weights = Vec::with_capacity(hidden.last().map_or(0, |l| l.rows));
    for (net, &a) in nets.iter().zip(coeffs) {
        weights.extend(net.output_weights.iter().map(|w| a * w));
    }
    LayeredNetwork::new(
        first.input_dim,
        hidden,
        weights,
        out_bias,
        false,
        first.sigma.clone(),
    )
}

fn stack_rows(blocks: &[&DenseLayer]) -> DenseLayer {
    let cols = blocks[0].cols;
    let mut weights = Vec::new();
    let mut bias = Vec::new();
    for b in blocks {
        weights.extend_from_slice(&b.weights);
        bias.extend_from_slice(&b.bias);
    }
    DenseLayer {
        rows: bias.len(),
        cols,
        weights,
        bias,
    }
}

fn block_diagonal(blocks: &[&DenseLayer]) -> DenseLayer {
    let rows: usize = blocks.iter().map(|b| b.rows).sum();
    let cols: usize = blocks.iter().map(|b| b.cols).sum();
    let mut weights = vec![0.0; rows * cols];
    let mut bias = Vec::with_capacity(rows);
    let (mut r0, mut c0) = (0, 0);
    for b in blocks {
        for i in 0..b.rows {
            let dst = (r0 + i) * cols + c0;
            weights[dst..dst + b.cols].copy_from_slice(b.row(i));
        }
        bias.extend_from_slice(&b.bias);
        r0 += b.rows;
        c0 += b.cols;
    }
    DenseLayer {
        rows,
        cols,
        weights,
        bias,
    }
}

/// Symbolic record of how a network was assembled, mirroring the recursive
/// definition of `N_k` rather than the layered storage. Constructors return
/// it next to the network so the two can be evaluated independently.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Affine(AffineMap),
    /// `σ(inner)`.
    Squash(Box<Term>),
    /// `bias + Σ coeff·term`.
    Sum {
        bias: f64,
        terms: Vec<(f64, Term)>,
    },
}

impl Term {
    /// `σ(s + t·inner)`.
    pub fn gate(inner: Term, s: f64, t: f64) -> Term {
        Term::Squash(Box::new(Term::Sum {
            bias: s,
            terms: vec![(t, inner)],
        }))
    }

    pub fn constant(value: f64) -> Term {
        Term::Sum {
            bias: value,
            terms: Vec::new(),
        }
    }
}

/// A network together with its construction record.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub network: LayeredNetwork,
    pub term: Term,
}

// --- file format -----------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaFile {
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputFile {
    weights: Vec<f64>,
    bias: f64,
    squashed: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    input_dim: usize,
    sigma: SigmaFile,
    hidden_layers: Vec<LayerFile>,
    output: OutputFile,
}

/// Encodes a network as UTF-8 JSON. Reals use the shortest decimal form that
/// parses back to the same `f64`.
pub fn serialize(net: &LayeredNetwork) -> Vec<u8> {
    let file = NetworkFile {
        input_dim: net.input_dim,
        sigma: SigmaFile {
            kind: net.sigma.kind_name().to_string(),
            params: net.sigma.params(),
        },
        hidden_layers: net
            .hidden
            .iter()
            .map(|l| LayerFile {
                weights: (0..l.rows).map(|i| l.row(i).to_vec()).collect(),
                bias: l.bias.clone(),
            })
            .collect(),
        output: OutputFile {
            weights: net.output_weights.clone(),
            bias: net.output_bias,
            squashed: net.output_squashed,
        },
    };
    // all reals are finite by construction, so encoding cannot fail
    serde_json::to_vec(&file).expect("network encodes as JSON")
}

pub fn deserialize(bytes: &[u8]) -> Result<LayeredNetwork> {
    let file: NetworkFile = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        offset: byte_offset(bytes, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let sigma = SquashingFunction::from_parts(&file.sigma.kind, &file.sigma.params)?;
    let hidden = file
        .hidden_layers
        .into_iter()
        .map(|l| DenseLayer::from_rows(l.weights, l.bias))
        .collect::<Result<Vec<_>>>()?;
    LayeredNetwork::new(
        file.input_dim,
        hidden,
        file.output.weights,
        file.output.bias,
        file.output.squashed,
        sigma,
    )
}

/// serde_json reports 1-based lines and columns; convert to a byte offset.
fn byte_offset(bytes: &[u8], line: usize, column: usize) -> usize {
    let start = if line <= 1 {
        0
    } else {
        bytes
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == b'\n')
            .nth(line - 2)
            .map_or(bytes.len(), |(i, _)| i + 1)
    };
    (start + column.saturating_sub(1)).min(bytes.len())
}
