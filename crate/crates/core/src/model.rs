//! Dual-branch multi-label classifier.
//!
//! A post is represented by a sentence-level context embedding and by the
//! mean-pooled output of a gated R-GCN stack run over its dependency graph.
//! The two vectors are concatenated (context first) and fed to a single
//! affine layer with five sigmoid heads: hostile, fake, hate, defamation,
//! offensive. Fine labels are only predicted when the hostile head fires.

use ndarray::{s, Array1, Array2, Axis};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, DependencyGraph, Sentence};
use crate::rgcn::{
    gated_rgcn_backward, gated_rgcn_forward, glorot_limit, mean_pool, sigmoid, RgcnLayerParams,
};

pub const NUM_LABELS: usize = 5;
pub const LABEL_NAMES: [&str; NUM_LABELS] = ["hostile", "fake", "hate", "defamation", "offensive"];
pub const PROBABILITY_EPS: f64 = 1e-7;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelVector {
    pub hostile: bool,
    pub fake: bool,
    pub hate: bool,
    pub defamation: bool,
    pub offensive: bool,
}

impl LabelVector {
    pub fn from_array(a: [bool; NUM_LABELS]) -> Self {
        LabelVector {
            hostile: a[0],
            fake: a[1],
            hate: a[2],
            defamation: a[3],
            offensive: a[4],
        }
    }

    pub fn to_array(self) -> [bool; NUM_LABELS] {
        [
            self.hostile,
            self.fake,
            self.hate,
            self.defamation,
            self.offensive,
        ]
    }

    /// Hostile iff the hostile head clears the threshold; fine labels also
    /// need the hostile decision.
    pub fn from_probabilities(p: &[f64; NUM_LABELS], threshold: f64) -> Self {
        let hostile = p[0] >= threshold;
        let mut labels = [hostile; NUM_LABELS];
        for k in 1..NUM_LABELS {
            labels[k] = hostile && p[k] >= threshold;
        }
        Self::from_array(labels)
    }

    /// The first fine label set on a non-hostile vector, if any.
    pub fn hierarchy_violation(&self) -> Option<&'static str> {
        if self.hostile {
            return None;
        }
        let a = self.to_array();
        (1..NUM_LABELS).find(|&k| a[k]).map(|k| LABEL_NAMES[k])
    }

    /// Display label for projections: `non-hostile`, `hostile`, or the fine labels joined by `+`.
    pub fn describe(&self) -> String {
        if !self.hostile {
            return "non-hostile".into();
        }
        let a = self.to_array();
        let fine: Vec<&str> = (1..NUM_LABELS).filter(|&k| a[k]).map(|k| LABEL_NAMES[k]).collect();
        if fine.is_empty() {
            "hostile".into()
        } else {
            fine.join("+")
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExampleRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub parse: Sentence,
    pub context_embedding: Array1<f64>,
    pub node_embeddings: Array2<f64>,
    pub gold: Option<LabelVector>,
}

impl ExampleRecord {
    pub fn new(
        id: impl Into<String>,
        tokens: Vec<String>,
        parse: Sentence,
        context_embedding: Array1<f64>,
        node_embeddings: Array2<f64>,
        gold: Option<LabelVector>,
    ) -> Result<Self> {
        let record = ExampleRecord {
            id: id.into(),
            tokens,
            parse,
            context_embedding,
            node_embeddings,
            gold,
        };
        record.validate()?;
        Ok(record)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.parse.len();
        if self.tokens.len() != n || self.node_embeddings.nrows() != n {
            return Err(Error::dim(format!(
                "record {}: {} tokens, {} parse nodes, {} embedding rows",
                self.id,
                self.tokens.len(),
                n,
                self.node_embeddings.nrows()
            )));
        }
        if let Some(label) = self.gold.and_then(|g| g.hierarchy_violation()) {
            return Err(Error::Hierarchy {
                record: self.id.clone(),
                label: label.into(),
            });
        }
        Ok(())
    }

    pub fn graph(&self) -> Result<DependencyGraph> {
        build_graph(&self.parse, self.node_embeddings.clone())
    }
}

/// Input widths and R-GCN layer widths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub d_ctx: usize,
    pub d_node: usize,
    pub widths: Vec<usize>,
}

impl Architecture {
    pub fn d_graph(&self) -> usize {
        self.widths.last().copied().unwrap_or(self.d_node)
    }

    fn validate(&self) -> Result<()> {
        if self.d_ctx == 0 || self.d_node == 0 || self.widths.is_empty() || self.widths.contains(&0) {
            return Err(Error::Config(format!(
                "invalid architecture {self:?}: widths must be non-empty and positive"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifierParams {
    pub rgcn_stack: Vec<RgcnLayerParams>,
    /// `(d_ctx + d_g) x 5`.
    pub fc_weight: Array2<f64>,
    pub fc_bias: Array1<f64>,
}

impl ClassifierParams {
    pub fn zeros(arch: &Architecture) -> Result<Self> {
        arch.validate()?;
        let mut d_in = arch.d_node;
        let mut stack = Vec::with_capacity(arch.widths.len());
        for &w in &arch.widths {
            stack.push(RgcnLayerParams::zeros(d_in, w));
            d_in = w;
        }
        Ok(ClassifierParams {
            rgcn_stack: stack,
            fc_weight: Array2::zeros((arch.d_ctx + arch.d_graph(), NUM_LABELS)),
            fc_bias: Array1::zeros(NUM_LABELS),
        })
    }

    /// Glorot-uniform weights, zero biases, gate biases at +1.
    pub fn init<R: Rng + ?Sized>(arch: &Architecture, rng: &mut R) -> Result<Self> {
        arch.validate()?;
        let mut d_in = arch.d_node;
        let mut stack = Vec::with_capacity(arch.widths.len());
        for &w in &arch.widths {
            stack.push(RgcnLayerParams::init(d_in, w, rng));
            d_in = w;
        }
        let fan_in = arch.d_ctx + arch.d_graph();
        let limit = glorot_limit(fan_in, NUM_LABELS);
        let fc_weight =
            Array2::from_shape_simple_fn((fan_in, NUM_LABELS), || rng.random_range(-limit..=limit));
        Ok(ClassifierParams {
            rgcn_stack: stack,
            fc_weight,
            fc_bias: Array1::zeros(NUM_LABELS),
        })
    }

    pub fn architecture(&self) -> Architecture {
        let d_graph = self.rgcn_stack.last().map_or(0, RgcnLayerParams::d_out);
        Architecture {
            d_ctx: self.fc_weight.nrows() - d_graph,
            d_node: self.rgcn_stack.first().map_or(0, RgcnLayerParams::d_in),
            widths: self.rgcn_stack.iter().map(RgcnLayerParams::d_out).collect(),
        }
    }

    pub fn d_ctx(&self) -> usize {
        self.architecture().d_ctx
    }

    /// All parameter tensors as `(name, shape, data)`, in a fixed order.
    pub fn tensors(&self) -> Vec<(String, Vec<usize>, &[f64])> {
        let mut out = Vec::new();
        for (l, layer) in self.rgcn_stack.iter().enumerate() {
            for (r, p) in crate::graph::RelationKind::ALL.iter().zip(layer.relations()) {
                let prefix = format!("rgcn.{l}.{}", r.name());
                out.push((format!("{prefix}.weight"), p.weight.shape().to_vec(), standard(p.weight.as_slice())));
                out.push((format!("{prefix}.bias"), p.bias.shape().to_vec(), standard(p.bias.as_slice())));
                out.push((
                    format!("{prefix}.gate_weight"),
                    p.gate_weight.shape().to_vec(),
                    standard(p.gate_weight.as_slice()),
                ));
                out.push((format!("{prefix}.gate_bias"), vec![], std::slice::from_ref(&p.gate_bias)));
            }
        }
        out.push(("fc.weight".into(), self.fc_weight.shape().to_vec(), standard(self.fc_weight.as_slice())));
        out.push(("fc.bias".into(), self.fc_bias.shape().to_vec(), standard(self.fc_bias.as_slice())));
        out
    }

    /// Mutable view of the same tensors, in the same order as [`Self::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out = Vec::new();
        for (l, layer) in self.rgcn_stack.iter_mut().enumerate() {
            for (r, p) in crate::graph::RelationKind::ALL.iter().zip(layer.relations_mut()) {
                let prefix = format!("rgcn.{l}.{}", r.name());
                out.push((format!("{prefix}.weight"), standard(p.weight.as_slice_mut())));
                out.push((format!("{prefix}.bias"), standard(p.bias.as_slice_mut())));
                out.push((format!("{prefix}.gate_weight"), standard(p.gate_weight.as_slice_mut())));
                out.push((format!("{prefix}.gate_bias"), std::slice::from_mut(&mut p.gate_bias)));
            }
        }
        out.push(("fc.weight".into(), standard(self.fc_weight.as_slice_mut())));
        out.push(("fc.bias".into(), standard(self.fc_bias.as_slice_mut())));
        out
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn add_scaled(&mut self, other: &ClassifierParams, scale: f64) {
        let theirs = other.tensors();
        for ((_, mine), (_, _, src)) in self.tensors_mut().into_iter().zip(theirs) {
            for (a, b) in mine.iter_mut().zip(src) {
                *a += scale * b;
            }
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|(_, _, d)| d.len()).sum()
    }
}

fn standard<T>(slice: Option<T>) -> T {
    slice.expect("parameter tensors are kept in standard layout")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probabilities: [f64; NUM_LABELS],
    pub labels: LabelVector,
}

/// Sentence-level vectors produced on the way to the classifier head.
#[derive(Clone, Debug, PartialEq)]
pub struct Embeddings {
    pub context: Array1<f64>,
    pub graph: Array1<f64>,
}

impl Embeddings {
    /// Context first, then the pooled graph embedding.
    pub fn concat(&self) -> Array1<f64> {
        ndarray::concatenate![Axis(0), self.context, self.graph]
    }
}

struct ForwardPass {
    graph: DependencyGraph,
    /// Input of every layer plus the final output.
    states: Vec<Array2<f64>>,
    features: Array1<f64>,
    probabilities: [f64; NUM_LABELS],
}

fn check_shapes(params: &ClassifierParams, example: &ExampleRecord) -> Result<()> {
    let arch = params.architecture();
    if example.context_embedding.len() != arch.d_ctx {
        return Err(Error::dim(format!(
            "record {}: context embedding has width {}, model expects {}",
            example.id,
            example.context_embedding.len(),
            arch.d_ctx
        )));
    }
    if example.node_embeddings.ncols() != arch.d_node {
        return Err(Error::dim(format!(
            "record {}: node embeddings have width {}, model expects {}",
            example.id,
            example.node_embeddings.ncols(),
            arch.d_node
        )));
    }
    Ok(())
}

fn forward(params: &ClassifierParams, example: &ExampleRecord) -> Result<ForwardPass> {
    check_shapes(params, example)?;
    let graph = example.graph()?;
    let mut states = vec![example.node_embeddings.clone()];
    for layer in &params.rgcn_stack {
        let next = gated_rgcn_forward(layer, &graph, states.last().expect("non-empty"))?;
        states.push(next);
    }
    let pooled = mean_pool(states.last().expect("non-empty"))?;
    let features = ndarray::concatenate![Axis(0), example.context_embedding, pooled];
    let logits = features.dot(&params.fc_weight) + &params.fc_bias;
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(Error::Numeric(format!("record {}: non-finite logits", example.id)));
    }
    let probabilities = std::array::from_fn(|k| sigmoid(logits[k]));
    Ok(ForwardPass {
        graph,
        states,
        features,
        probabilities,
    })
}

pub fn classify(params: &ClassifierParams, example: &ExampleRecord, threshold: f64) -> Result<Prediction> {
    let pass = forward(params, example)?;
    Ok(Prediction {
        labels: LabelVector::from_probabilities(&pass.probabilities, threshold),
        probabilities: pass.probabilities,
    })
}

/// [`classify`] over many examples, in parallel, results in input order.
pub fn classify_all(params: &ClassifierParams, examples: &[ExampleRecord], threshold: f64) -> Result<Vec<Prediction>> {
    examples.par_iter().map(|e| classify(params, e, threshold)).collect()
}

pub fn embed(params: &ClassifierParams, example: &ExampleRecord) -> Result<Embeddings> {
    let pass = forward(params, example)?;
    let d_ctx = example.context_embedding.len();
    Ok(Embeddings {
        context: pass.features.slice(s![..d_ctx]).to_owned(),
        graph: pass.features.slice(s![d_ctx..]).to_owned(),
    })
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(PROBABILITY_EPS, 1.0 - PROBABILITY_EPS)
}

/// Mean binary cross-entropy over the five heads.
pub fn bce_loss(probabilities: &[f64; NUM_LABELS], gold: &LabelVector) -> f64 {
    let y = gold.to_array();
    probabilities
        .iter()
        .zip(y)
        .map(|(&p, y)| {
            let p = clamp_probability(p);
            if y {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / NUM_LABELS as f64
}

/// Loss and its exact gradient with respect to every parameter.
pub fn classifier_backward(
    params: &ClassifierParams,
    example: &ExampleRecord,
    gold: &LabelVector,
) -> Result<(f64, ClassifierParams)> {
    let pass = forward(params, example)?;
    let loss = bce_loss(&pass.probabilities, gold);
    let y = gold.to_array();
    let dlogits: Array1<f64> = (0..NUM_LABELS)
        .map(|k| {
            let p = pass.probabilities[k];
            if !(PROBABILITY_EPS..=1.0 - PROBABILITY_EPS).contains(&p) {
                0.0
            } else {
                (p - if y[k] { 1.0 } else { 0.0 }) / NUM_LABELS as f64
            }
        })
        .collect();

    let mut grads = ClassifierParams::zeros(&params.architecture())?;
    grads.fc_weight = pass
        .features
        .view()
        .insert_axis(Axis(1))
        .dot(&dlogits.view().insert_axis(Axis(0)))
        .as_standard_layout()
        .into_owned();
    grads.fc_bias = dlogits.clone();
    let dfeatures = params.fc_weight.dot(&dlogits);
    let d_ctx = example.context_embedding.len();
    let dpooled = dfeatures.slice(s![d_ctx..]);

    let n = pass.graph.node_count();
    let mut upstream = Array2::zeros((n, dpooled.len()));
    for mut row in upstream.rows_mut() {
        row.scaled_add(1.0 / n as f64, &dpooled);
    }
    for (l, layer) in params.rgcn_stack.iter().enumerate().rev() {
        let g = gated_rgcn_backward(layer, &pass.graph, &pass.states[l], &upstream)?;
        grads.rgcn_stack[l] = g.params;
        upstream = g.input;
    }
    Ok((loss, grads))
}
