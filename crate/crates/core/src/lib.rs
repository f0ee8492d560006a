//! Gated relational graph convolution over dependency parses for
//! multi-label hostile-post classification.
//!
//! Modules follow the pipeline: [`graph`] reads CoNLL-U into three-relation
//! graphs, [`rgcn`] propagates node states, [`model`] joins them with a
//! context embedding into five sigmoid heads, [`training`] fits the model,
//! [`eval`] scores it. [`tokenizers`] holds the BPE and unigram subword
//! models.

pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod rgcn;
pub mod synthetic;
pub mod tokenizers;
pub mod training;

pub use error::{Error, Result};
pub use eval::{evaluate, EvalReport, PcaProjection};
pub use graph::{parse_conllu, DependencyGraph, RelationKind, Sentence};
pub use model::{Architecture, ClassifierParams, ExampleRecord, LabelVector, Prediction, LABEL_NAMES};
pub use rgcn::RgcnLayerParams;
pub use training::{Checkpoint, TrainConfig};
