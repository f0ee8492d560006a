//! Gated relational graph convolution.
//!
//! Two propagation rules are provided over a [`DependencyGraph`]:
//!
//! ```text
//! ungated:  h'_i = psi( sum_r [ sum_{j in N_i^r} (1/c_{i,r}) W_r h_j + B_r ] )
//! gated:    h'_i = ReLU( sum_r sum_{j in N_i^r} g_{j,r} * ( (1/c_{i,r}) W_r h_j + B_r ) )
//!           g_{j,r} = sigmoid(h_j . w_r + b_r)
//! ```
//!
//! In the ungated rule the relation bias is added once per node and relation;
//! in the gated rule it sits inside every gated edge message. Gate parameters
//! are shared by all edges of one relation kind.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{neighbor_index, DependencyGraph, RelationKind};

/// Hidden states of all nodes at one layer, one row per node.
pub type NodeStates = Array2<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct RelationParams {
    /// `d_in x d_out`; messages are computed as `h_j . weight`.
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
    pub gate_weight: Array1<f64>,
    pub gate_bias: f64,
}

impl RelationParams {
    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        RelationParams {
            weight: Array2::zeros((d_in, d_out)),
            bias: Array1::zeros(d_out),
            gate_weight: Array1::zeros(d_in),
            gate_bias: 0.0,
        }
    }
}

/// Per-relation weights, biases and gate parameters of one layer.
#[derive(Clone, Debug, PartialEq)]
pub struct RgcnLayerParams {
    relations: [RelationParams; 3],
}

impl RgcnLayerParams {
    /// Relations are given in [`RelationKind::ALL`] order.
    pub fn new(relations: [RelationParams; 3]) -> Result<Self> {
        let d_in = relations[0].weight.nrows();
        let d_out = relations[0].weight.ncols();
        for (r, p) in RelationKind::ALL.iter().zip(&relations) {
            if p.weight.dim() != (d_in, d_out)
                || p.bias.len() != d_out
                || p.gate_weight.len() != d_in
            {
                return Err(Error::dim(format!(
                    "{} relation parameters disagree with {d_in}x{d_out}",
                    r.name()
                )));
            }
            let finite = p.weight.iter().all(|v| v.is_finite())
                && p.bias.iter().all(|v| v.is_finite())
                && p.gate_weight.iter().all(|v| v.is_finite())
                && p.gate_bias.is_finite();
            if !finite {
                return Err(Error::Numeric(format!(
                    "{} relation parameters contain non-finite values",
                    r.name()
                )));
            }
        }
        Ok(RgcnLayerParams { relations })
    }

    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        RgcnLayerParams {
            relations: std::array::from_fn(|_| RelationParams::zeros(d_in, d_out)),
        }
    }

    /// Glorot-uniform weights and gate weights, zero biases, gate biases at +1
    /// so that gates start mostly open.
    pub fn init<R: Rng + ?Sized>(d_in: usize, d_out: usize, rng: &mut R) -> Self {
        let mut params = Self::zeros(d_in, d_out);
        let w_limit = glorot_limit(d_in, d_out);
        let g_limit = glorot_limit(d_in, 1);
        for p in &mut params.relations {
            p.weight.mapv_inplace(|_| rng.random_range(-w_limit..=w_limit));
            p.gate_weight
                .mapv_inplace(|_| rng.random_range(-g_limit..=g_limit));
            p.gate_bias = 1.0;
        }
        params
    }

    pub fn d_in(&self) -> usize {
        self.relations[0].weight.nrows()
    }

    pub fn d_out(&self) -> usize {
        self.relations[0].weight.ncols()
    }

    pub fn relation(&self, r: RelationKind) -> &RelationParams {
        &self.relations[r.index()]
    }

    pub fn relation_mut(&mut self, r: RelationKind) -> &mut RelationParams {
        &mut self.relations[r.index()]
    }

    pub fn relations(&self) -> &[RelationParams; 3] {
        &self.relations
    }

    pub fn relations_mut(&mut self) -> &mut [RelationParams; 3] {
        &mut self.relations
    }
}

pub(crate) fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

/// Logistic function, kept strictly inside (0, 1).
pub fn sigmoid(x: f64) -> f64 {
    let s = if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

fn check_input(params: &RgcnLayerParams, graph: &DependencyGraph, h: &NodeStates) -> Result<()> {
    if h.nrows() != graph.node_count() {
        return Err(Error::dim(format!(
            "{} state rows for a {}-node graph",
            h.nrows(),
            graph.node_count()
        )));
    }
    if h.ncols() != params.d_in() {
        return Err(Error::dim(format!(
            "state width {} but layer expects {}",
            h.ncols(),
            params.d_in()
        )));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite node state".into()));
    }
    Ok(())
}

/// Ungated relational convolution with a caller-chosen activation.
pub fn rgcn_forward(
    params: &RgcnLayerParams,
    graph: &DependencyGraph,
    h: &NodeStates,
    activation: Activation,
) -> Result<NodeStates> {
    check_input(params, graph, h)?;
    let index = neighbor_index(graph);
    let n = graph.node_count();
    let mut out = Array2::zeros((n, params.d_out()));
    for r in RelationKind::ALL {
        let p = params.relation(r);
        let messages = h.dot(&p.weight);
        for i in 0..n {
            let inv_c = 1.0 / index.norm(i, r) as f64;
            let mut row = out.row_mut(i);
            for &j in index.neighbors(i, r) {
                row.scaled_add(inv_c, &messages.row(j));
            }
            row += &p.bias;
        }
    }
    if activation == Activation::Relu {
        out.mapv_inplace(|v| v.max(0.0));
    }
    Ok(out)
}

/// Edge gate for a message leaving a node with state `h_u` under relation `r`.
pub fn gate_value(params: &RgcnLayerParams, r: RelationKind, h_u: ArrayView1<f64>) -> Result<f64> {
    let p = params.relation(r);
    if h_u.len() != p.gate_weight.len() {
        return Err(Error::dim(format!(
            "gate input width {} but layer expects {}",
            h_u.len(),
            p.gate_weight.len()
        )));
    }
    Ok(sigmoid(h_u.dot(&p.gate_weight) + p.gate_bias))
}

/// Per-relation intermediates shared by the gated forward and backward passes.
struct GatedTerms {
    messages: [Array2<f64>; 3],
    gates: [Array1<f64>; 3],
    pre_activation: Array2<f64>,
}

fn gated_terms(params: &RgcnLayerParams, graph: &DependencyGraph, h: &NodeStates) -> GatedTerms {
    let index = neighbor_index(graph);
    let n = graph.node_count();
    let mut pre = Array2::zeros((n, params.d_out()));
    let messages: [Array2<f64>; 3] = std::array::from_fn(|k| h.dot(&params.relations[k].weight));
    let gates: [Array1<f64>; 3] = std::array::from_fn(|k| {
        let p = &params.relations[k];
        h.dot(&p.gate_weight).mapv(|z| sigmoid(z + p.gate_bias))
    });
    for r in RelationKind::ALL {
        let k = r.index();
        let bias = &params.relations[k].bias;
        for i in 0..n {
            let inv_c = 1.0 / index.norm(i, r) as f64;
            let mut row = pre.row_mut(i);
            for &j in index.neighbors(i, r) {
                let g = gates[k][j];
                row.scaled_add(g * inv_c, &messages[k].row(j));
                row.scaled_add(g, bias);
            }
        }
    }
    GatedTerms {
        messages,
        gates,
        pre_activation: pre,
    }
}

pub fn gated_rgcn_forward(
    params: &RgcnLayerParams,
    graph: &DependencyGraph,
    h: &NodeStates,
) -> Result<NodeStates> {
    check_input(params, graph, h)?;
    Ok(gated_terms(params, graph, h).pre_activation.mapv(|v| v.max(0.0)))
}

/// Arithmetic mean of the node states.
pub fn mean_pool(h: &NodeStates) -> Result<Array1<f64>> {
    h.mean_axis(Axis(0)).ok_or(Error::EmptyGraph)
}

/// Gradients of a gated layer: parameter-shaped gradients plus the gradient
/// with respect to the layer input.
#[derive(Clone, Debug, PartialEq)]
pub struct RgcnGradients {
    pub params: RgcnLayerParams,
    pub input: NodeStates,
}

/// Exact gradients of `sum(upstream * gated_rgcn_forward(params, graph, h))`.
///
/// The ReLU derivative is taken as 0 at a pre-activation of exactly zero.
pub fn gated_rgcn_backward(
    params: &RgcnLayerParams,
    graph: &DependencyGraph,
    h: &NodeStates,
    upstream: &NodeStates,
) -> Result<RgcnGradients> {
    check_input(params, graph, h)?;
    let n = graph.node_count();
    if upstream.dim() != (n, params.d_out()) {
        return Err(Error::dim(format!(
            "upstream gradient is {:?}, forward output is {:?}",
            upstream.dim(),
            (n, params.d_out())
        )));
    }
    let terms = gated_terms(params, graph, h);
    let index = neighbor_index(graph);
    let delta = ndarray::Zip::from(upstream)
        .and(&terms.pre_activation)
        .map_collect(|&u, &a| if a > 0.0 { u } else { 0.0 });

    let mut grads = RgcnLayerParams::zeros(params.d_in(), params.d_out());
    let mut input_grad = Array2::zeros(h.raw_dim());
    for r in RelationKind::ALL {
        let k = r.index();
        let p = &params.relations[k];
        let gates = &terms.gates[k];
        let messages = &terms.messages[k];
        // routed[j] = sum over out-edges j -> i of (g_j / c_i) * delta_i
        let mut routed = Array2::<f64>::zeros((n, params.d_out()));
        let mut gate_grad = Array1::<f64>::zeros(n);
        let g = &mut grads.relations[k];
        for i in 0..n {
            let inv_c = 1.0 / index.norm(i, r) as f64;
            let d_i = delta.row(i);
            for &j in index.neighbors(i, r) {
                routed.row_mut(j).scaled_add(gates[j] * inv_c, &d_i);
                g.bias.scaled_add(gates[j], &d_i);
                let msg_dot = inv_c * messages.row(j).dot(&d_i) + p.bias.dot(&d_i);
                gate_grad[j] += msg_dot;
            }
        }
        // through the sigmoid
        gate_grad.zip_mut_with(gates, |dz, &gv| *dz *= gv * (1.0 - gv));

        g.weight = h.t().dot(&routed).as_standard_layout().into_owned();
        g.gate_weight = h.t().dot(&gate_grad);
        g.gate_bias = gate_grad.sum();
        input_grad += &routed.dot(&p.weight.t());
        for j in 0..n {
            input_grad
                .row_mut(j)
                .scaled_add(gate_grad[j], &p.gate_weight);
        }
    }
    Ok(RgcnGradients {
        params: grads,
        input: input_grad,
    })
}
