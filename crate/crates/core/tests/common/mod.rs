//! Independent oracles shared by the integration tests and the acceptance
//! suite. Nothing here calls the library code it is used to check.

#![allow(dead_code)]

use hostnet_core::graph::{Sentence, Token};
use hostnet_core::model::{bce_loss, classify, Architecture, ClassifierParams, ExampleRecord, LabelVector};
use hostnet_core::rgcn::{RgcnLayerParams, RelationParams};
use hostnet_core::RelationKind;
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------- graphs

/// Random head array (0 = root, 1-based otherwise) for `n` tokens.
pub fn random_heads<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0; n];
    for k in 1..n {
        heads[order[k] - 1] = order[rng.random_range(0..k)];
    }
    heads
}

pub fn sentence(heads: &[usize]) -> Sentence {
    let tokens = heads
        .iter()
        .enumerate()
        .map(|(i, &h)| Token {
            index: i + 1,
            surface: format!("t{i}"),
            head: h,
            deprel: "dep".into(),
        })
        .collect();
    Sentence::new("s", tokens).unwrap()
}

pub fn uniform_matrix<R: Rng>(rows: usize, cols: usize, scale: f64, rng: &mut R) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-scale..scale))
}

pub fn uniform_vector<R: Rng>(len: usize, scale: f64, rng: &mut R) -> Array1<f64> {
    Array1::from_shape_simple_fn(len, || rng.random_range(-scale..scale))
}

pub fn random_layer<R: Rng>(d_in: usize, d_out: usize, rng: &mut R) -> RgcnLayerParams {
    let relations = std::array::from_fn(|_| RelationParams {
        weight: uniform_matrix(d_in, d_out, 1.0, rng),
        bias: uniform_vector(d_out, 0.5, rng),
        gate_weight: uniform_vector(d_in, 1.0, rng),
        gate_bias: rng.random_range(-1.0..1.0),
    });
    RgcnLayerParams::new(relations).unwrap()
}

/// In-neighbours of every node for each relation, read straight off the
/// head array: the head for Forward, the children for Inverse, itself for
/// SelfLoop.
pub fn oracle_neighbors(heads: &[usize]) -> [Vec<Vec<usize>>; 3] {
    let n = heads.len();
    let mut fwd = vec![Vec::new(); n];
    let mut inv = vec![Vec::new(); n];
    let slf: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    for (t, &h) in heads.iter().enumerate() {
        if h > 0 {
            fwd[t].push(h - 1);
            inv[h - 1].push(t);
        }
    }
    [fwd, inv, slf]
}

fn relation_slot(r: usize) -> RelationKind {
    RelationKind::ALL[r]
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Pre-activation of one layer computed with explicit scalar loops.
pub fn oracle_pre_activation(params: &RgcnLayerParams, heads: &[usize], h: &Array2<f64>, gated: bool) -> Array2<f64> {
    let n = heads.len();
    let (d_in, d_out) = (params.d_in(), params.d_out());
    let nbrs = oracle_neighbors(heads);
    let mut out = Array2::zeros((n, d_out));
    for i in 0..n {
        for r in 0..3 {
            let p = params.relation(relation_slot(r));
            let c = nbrs[r][i].len().max(1) as f64;
            for &j in &nbrs[r][i] {
                let mut z = p.gate_bias;
                for a in 0..d_in {
                    z += h[[j, a]] * p.gate_weight[a];
                }
                let g = if gated { sig(z) } else { 1.0 };
                for o in 0..d_out {
                    let mut msg = 0.0;
                    for a in 0..d_in {
                        msg += h[[j, a]] * p.weight[[a, o]];
                    }
                    out[[i, o]] += if gated { g * (msg / c + p.bias[o]) } else { msg / c };
                }
            }
            if !gated {
                for o in 0..d_out {
                    out[[i, o]] += p.bias[o];
                }
            }
        }
    }
    out
}

pub fn relu(a: &Array2<f64>) -> Array2<f64> {
    a.mapv(|v| v.max(0.0))
}

// ---------------------------------------------------------------- classifier

pub fn random_example<R: Rng>(n: usize, d_ctx: usize, d_node: usize, rng: &mut R) -> (ExampleRecord, Vec<usize>) {
    let heads = random_heads(n, rng);
    let s = sentence(&heads);
    let words = s.tokens.iter().map(|t| t.surface.clone()).collect();
    let ex = ExampleRecord::new(
        "x",
        words,
        s,
        uniform_vector(d_ctx, 1.0, rng),
        uniform_matrix(n, d_node, 1.0, rng),
        None,
    )
    .unwrap();
    (ex, heads)
}

pub fn random_params<R: Rng>(arch: &Architecture, rng: &mut R) -> ClassifierParams {
    let mut p = ClassifierParams::zeros(arch).unwrap();
    let mut d_in = arch.d_node;
    for (l, &w) in arch.widths.iter().enumerate() {
        p.rgcn_stack[l] = random_layer(d_in, w, rng);
        d_in = w;
    }
    p.fc_weight = uniform_matrix(p.fc_weight.nrows(), p.fc_weight.ncols(), 1.0, rng);
    p.fc_bias = uniform_vector(p.fc_bias.len(), 0.5, rng);
    p
}

pub fn random_labels<R: Rng>(rng: &mut R) -> LabelVector {
    let hostile = rng.random_bool(0.6);
    let mut a = [hostile; 5];
    for bit in a.iter_mut().skip(1) {
        *bit = hostile && rng.random_bool(0.5);
    }
    LabelVector::from_array(a)
}

/// Smallest |pre-activation| over every layer, and the head probabilities,
/// from the scalar oracle.
pub fn oracle_margins(params: &ClassifierParams, ex: &ExampleRecord, heads: &[usize]) -> (f64, [f64; 5]) {
    let mut h = ex.node_embeddings.clone();
    let mut margin = f64::INFINITY;
    for layer in &params.rgcn_stack {
        let pre = oracle_pre_activation(layer, heads, &h, true);
        margin = pre.iter().fold(margin, |m, v| m.min(v.abs()));
        h = relu(&pre);
    }
    let n = h.nrows() as f64;
    let mut feats: Vec<f64> = ex.context_embedding.to_vec();
    for c in 0..h.ncols() {
        feats.push(h.column(c).sum() / n);
    }
    let mut probs = [0.0; 5];
    for (k, p) in probs.iter_mut().enumerate() {
        let mut z = params.fc_bias[k];
        for (f, x) in feats.iter().enumerate() {
            z += x * params.fc_weight[[f, k]];
        }
        *p = sig(z);
    }
    (margin, probs)
}

pub fn loss_at(params: &ClassifierParams, ex: &ExampleRecord, gold: &LabelVector) -> f64 {
    bce_loss(&classify(params, ex, 0.5).unwrap().probabilities, gold)
}

/// Central differences over every scalar parameter, in tensor order.
pub fn finite_difference(params: &ClassifierParams, ex: &ExampleRecord, gold: &LabelVector, step: f64) -> Vec<(String, Vec<f64>)> {
    let names: Vec<(String, usize)> = params
        .tensors()
        .into_iter()
        .map(|(n, _, d)| (n, d.len()))
        .collect();
    let mut out = Vec::new();
    for (k, (name, len)) in names.into_iter().enumerate() {
        let mut grads = Vec::with_capacity(len);
        for i in 0..len {
            let mut plus = params.clone();
            plus.tensors_mut()[k].1[i] += step;
            let mut minus = params.clone();
            minus.tensors_mut()[k].1[i] -= step;
            grads.push((loss_at(&plus, ex, gold) - loss_at(&minus, ex, gold)) / (2.0 * step));
        }
        out.push((name, grads));
    }
    out
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `||a - b|| / max(||a||, ||b||)`; 0 when both are below `floor`.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale < floor {
        norm(&diff) / floor
    } else {
        norm(&diff) / scale
    }
}

// ---------------------------------------------------------------- metrics

/// `(precision, recall, f1, support)` per head by direct counting.
pub fn oracle_per_class(preds: &[[bool; 5]], golds: &[[bool; 5]]) -> Vec<(f64, f64, f64, usize)> {
    (0..5)
        .map(|k| {
            let mut tp = 0usize;
            let mut pred_pos = 0usize;
            let mut gold_pos = 0usize;
            for (p, g) in preds.iter().zip(golds) {
                if p[k] {
                    pred_pos += 1;
                }
                if g[k] {
                    gold_pos += 1;
                }
                if p[k] && g[k] {
                    tp += 1;
                }
            }
            let precision = if pred_pos == 0 { 0.0 } else { tp as f64 / pred_pos as f64 };
            let recall = if gold_pos == 0 { 0.0 } else { tp as f64 / gold_pos as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            (precision, recall, f1, gold_pos)
        })
        .collect()
}

pub fn oracle_weighted_fine(preds: &[[bool; 5]], golds: &[[bool; 5]]) -> Option<f64> {
    let per = oracle_per_class(preds, golds);
    let support: usize = per[1..].iter().map(|c| c.3).sum();
    if support == 0 {
        return None;
    }
    Some(per[1..].iter().map(|c| c.2 * c.3 as f64).sum::<f64>() / support as f64)
}

/// Weighted two-class F1 with class "hostile" and class "not hostile".
pub fn oracle_coarse(preds: &[[bool; 5]], golds: &[[bool; 5]]) -> f64 {
    let hostile_p: Vec<[bool; 5]> = preds.iter().map(|p| [p[0]; 5]).collect();
    let hostile_g: Vec<[bool; 5]> = golds.iter().map(|g| [g[0]; 5]).collect();
    let neg_p: Vec<[bool; 5]> = preds.iter().map(|p| [!p[0]; 5]).collect();
    let neg_g: Vec<[bool; 5]> = golds.iter().map(|g| [!g[0]; 5]).collect();
    let pos = oracle_per_class(&hostile_p, &hostile_g)[0];
    let neg = oracle_per_class(&neg_p, &neg_g)[0];
    (pos.2 * pos.3 as f64 + neg.2 * neg.3 as f64) / preds.len() as f64
}

pub fn random_label_sets<R: Rng>(n: usize, rng: &mut R) -> (Vec<LabelVector>, Vec<LabelVector>) {
    let golds: Vec<LabelVector> = (0..n).map(|_| random_labels(rng)).collect();
    let preds: Vec<LabelVector> = golds
        .iter()
        .map(|g| if rng.random_bool(0.4) { *g } else { random_labels(rng) })
        .collect();
    (preds, golds)
}

// ---------------------------------------------------------------- linear algebra

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
pub fn jacobi_eigenvalues(a: &Array2<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[[i, j]] * m[[i, j]])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[[p, q]].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * m[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[[i, i]]).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Sample covariance with explicit loops.
pub fn oracle_covariance(x: &Array2<f64>) -> Array2<f64> {
    let (n, d) = x.dim();
    let mean: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x[[i, j]]).sum::<f64>() / n as f64).collect();
    let mut cov = Array2::zeros((d, d));
    for a in 0..d {
        for b in 0..d {
            let mut s = 0.0;
            for i in 0..n {
                s += (x[[i, a]] - mean[a]) * (x[[i, b]] - mean[b]);
            }
            cov[[a, b]] = s / (n - 1) as f64;
        }
    }
    cov
}

// ---------------------------------------------------------------- segmentation

/// Every segmentation of `text` into vocabulary pieces, with its score.
pub fn all_segmentations(text: &[char], vocab: &[(String, f64)]) -> Vec<(Vec<String>, f64)> {
    if text.is_empty() {
        return vec![(Vec::new(), 0.0)];
    }
    let mut out = Vec::new();
    for (piece, lp) in vocab {
        let pc: Vec<char> = piece.chars().collect();
        if text.starts_with(&pc) {
            for (mut rest, s) in all_segmentations(&text[pc.len()..], vocab) {
                rest.insert(0, piece.clone());
                out.push((rest, s + lp));
            }
        }
    }
    out
}

/// All strings over `alphabet` with length `1..=max_len`.
pub fn all_strings(alphabet: &[char], max_len: usize) -> Vec<String> {
    let mut out = Vec::new();
    let mut frontier = vec![String::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alphabet {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Deterministic pseudo-text: lines of words built from a small syllable set.
pub fn synthetic_corpus<R: Rng>(min_bytes: usize, rng: &mut R) -> Vec<String> {
    const SYLLABLES: [&str; 24] = [
        "ka", "lo", "mi", "ne", "ra", "tu", "shi", "pa", "do", "ven", "gar", "ul", "is", "on", "et",
        "bri", "sto", "an", "re", "qu", "zy", "ha", "ow", "el",
    ];
    let mut lines = Vec::new();
    let mut bytes = 0;
    while bytes < min_bytes {
        let words: Vec<String> = (0..rng.random_range(3..12))
            .map(|_| {
                (0..rng.random_range(1..4))
                    .map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())])
                    .collect::<String>()
            })
            .collect();
        let line = words.join(" ");
        bytes += line.len() + 1;
        lines.push(line);
    }
    lines
}
