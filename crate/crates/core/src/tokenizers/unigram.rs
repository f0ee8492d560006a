//! Unigram language-model segmentation.
//!
//! A model assigns each piece a probability; a segmentation is scored by the
//! sum of its pieces' log-probabilities and text is encoded with the
//! best-scoring segmentation. Training seeds a large vocabulary of frequent
//! substrings, fits piece probabilities by EM over each line's segmentation
//! lattice, and repeatedly drops the multi-character pieces whose removal
//! costs the least corpus log-likelihood.
//!
//! Lines are segmented whole: the space character is an ordinary piece, and
//! seeded multi-character pieces never contain a space.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Score used for a character that is not in the vocabulary.
pub const UNKNOWN_LOG_PROB: f64 = -1e9;
const HEADER: &str = "unigram v1";
const MAX_SEED_PIECES: usize = 100_000;
const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct UnigramModel {
    /// Sorted by piece.
    pieces: Vec<(String, f64)>,
    index: HashMap<String, u32>,
    max_piece_chars: usize,
}

impl UnigramModel {
    /// Builds a model from `(piece, log p)` pairs. Probabilities must sum to 1.
    pub fn from_log_probs<I, S>(pieces: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (piece, lp) in pieces {
            let piece = piece.into();
            if piece.is_empty() {
                return Err(Error::Vocabulary("empty piece".into()));
            }
            if lp.is_nan() || lp > 0.0 {
                return Err(Error::Vocabulary(format!("piece `{piece}` has log-probability {lp}")));
            }
            if map.insert(piece.clone(), lp).is_some() {
                return Err(Error::Vocabulary(format!("duplicate piece `{piece}`")));
            }
        }
        let total: f64 = map.values().map(|lp| lp.exp()).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Vocabulary(format!(
                "piece probabilities sum to {total}, not 1"
            )));
        }
        let pieces: Vec<(String, f64)> = map.into_iter().collect();
        let index = pieces
            .iter()
            .enumerate()
            .map(|(i, (p, _))| (p.clone(), i as u32))
            .collect();
        let max_piece_chars = pieces.iter().map(|(p, _)| p.chars().count()).max().unwrap_or(1);
        Ok(UnigramModel {
            pieces,
            index,
            max_piece_chars,
        })
    }

    pub fn pieces(&self) -> &[(String, f64)] {
        &self.pieces
    }

    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn log_prob(&self, piece: &str) -> Option<f64> {
        self.index.get(piece).map(|&i| self.pieces[i as usize].1)
    }

    pub fn id_of(&self, piece: &str) -> Option<u32> {
        self.index.get(piece).copied()
    }

    /// Most probable segmentation. Ties go to fewer pieces, then to the
    /// segmentation whose pieces are longest from the left.
    pub fn encode(&self, text: &str) -> Vec<String> {
        let chars: Vec<char> = text.chars().collect();
        viterbi(&chars, self.max_piece_chars, |piece, single| {
            self.log_prob(piece)
                .or(if single { Some(UNKNOWN_LOG_PROB) } else { None })
        })
        .into_iter()
        .map(|(start, end)| chars[start..end].iter().collect())
        .collect()
    }

    /// Piece ids; characters outside the vocabulary map to `len + codepoint`.
    pub fn encode_ids(&self, text: &str) -> Vec<u32> {
        self.encode(text)
            .iter()
            .map(|p| {
                self.id_of(p).unwrap_or_else(|| {
                    self.pieces.len() as u32 + p.chars().next().expect("non-empty piece") as u32
                })
            })
            .collect()
    }

    pub fn decode_ids(&self, ids: &[u32]) -> Result<String> {
        let mut text = String::new();
        for &id in ids {
            match self.pieces.get(id as usize) {
                Some((p, _)) => text.push_str(p),
                None => text.push(
                    id.checked_sub(self.pieces.len() as u32)
                        .and_then(char::from_u32)
                        .ok_or_else(|| Error::Decode(format!("unknown piece id {id}")))?,
                ),
            }
        }
        Ok(text)
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for (p, lp) in &self.pieces {
            let _ = writeln!(out, "{p}\t{lp}");
        }
        out
    }

    pub fn from_file_str(text: &str) -> Result<Self> {
        let mut lines = text.split('\n');
        if lines.next() != Some(HEADER) {
            return Err(Error::Load(format!("expected header `{HEADER}`")));
        }
        let mut pieces = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let (piece, lp) = line
                .rsplit_once('\t')
                .ok_or_else(|| Error::Load(format!("malformed piece on line {}", i + 2)))?;
            let lp: f64 = lp
                .parse()
                .map_err(|_| Error::Load(format!("bad log-probability on line {}", i + 2)))?;
            pieces.push((piece.to_string(), lp));
        }
        Self::from_log_probs(pieces)
    }
}

/// Best segmentation of `chars` as `(start, end)` spans.
///
/// `score(piece, is_single_char)` returns the piece's log-probability or
/// `None` when it is not a piece; single characters must always score.
fn viterbi<F>(chars: &[char], max_len: usize, mut score: F) -> Vec<(usize, usize)>
where
    F: FnMut(&str, bool) -> Option<f64>,
{
    let n = chars.len();
    // best[i] = (score, piece count, end of first piece) for the suffix starting at i
    let mut best: Vec<(f64, usize, usize)> = vec![(0.0, 0, n); n + 1];
    let mut buf = String::new();
    for i in (0..n).rev() {
        let mut choice: Option<(f64, usize, usize)> = None;
        buf.clear();
        for j in i + 1..=n.min(i + max_len.max(1)) {
            buf.push(chars[j - 1]);
            let Some(lp) = score(&buf, j == i + 1) else {
                continue;
            };
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let cand = (lp + best[j].0, best[j].1 + 1, j);
            let better = match choice {
                None => true,
                // later candidates are longer, so an exact tie replaces
                Some(cur) => cand.0 > cur.0 || (cand.0 == cur.0 && cand.1 <= cur.1),
            };
            if better {
                choice = Some(cand);
            }
        }
        best[i] = choice.unwrap_or_else(|| {
            // zero-probability single character: still emit it
            (UNKNOWN_LOG_PROB + best[i + 1].0, best[i + 1].1 + 1, i + 1)
        });
    }
    let mut spans = Vec::with_capacity(best[0].1);
    let mut i = 0;
    while i < n {
        let end = best[i].2;
        spans.push((i, end));
        i = end;
    }
    spans
}

/// `sum log p(x_i)` for a piece sequence.
pub fn sequence_probability<S: AsRef<str>>(pieces: &[S], model: &UnigramModel) -> Result<f64> {
    pieces.iter().try_fold(0.0, |acc, p| {
        let p = p.as_ref();
        model
            .log_prob(p)
            .map(|lp| acc + lp)
            .ok_or_else(|| Error::Vocabulary(format!("`{p}` is not in the vocabulary")))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnigramConfig {
    pub vocab_size: usize,
    /// Fraction of multi-character pieces dropped per pruning round.
    pub prune_fraction: f64,
    /// Longest seeded substring, in characters.
    pub seed_max_len: usize,
    pub max_em_iterations: usize,
    /// Relative likelihood improvement below which EM stops.
    pub em_tolerance: f64,
}

impl Default for UnigramConfig {
    fn default() -> Self {
        UnigramConfig {
            vocab_size: 20_000,
            prune_fraction: 0.2,
            seed_max_len: 8,
            max_em_iterations: 20,
            em_tolerance: 1e-8,
        }
    }
}

/// One lattice arc: the piece `piece` spans characters `start..end`.
#[derive(Clone, Copy, Debug)]
struct Arc {
    start: u32,
    end: u32,
    piece: u32,
}

/// EM state over a deduplicated corpus.
pub struct UnigramTrainer {
    config: UnigramConfig,
    lines: Vec<(Vec<char>, f64)>,
    pieces: Vec<String>,
    log_probs: Vec<f64>,
    expected: Vec<f64>,
    lattices: Vec<Vec<Arc>>,
    log_likelihood: Option<f64>,
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl UnigramTrainer {
    pub fn new<S: AsRef<str>>(corpus: &[S], config: UnigramConfig) -> Result<Self> {
        if !(config.prune_fraction > 0.0 && config.prune_fraction < 1.0) {
            return Err(Error::Config("prune_fraction must lie in (0, 1)".into()));
        }
        if config.seed_max_len == 0 {
            return Err(Error::Config("seed_max_len must be positive".into()));
        }
        let mut line_counts: BTreeMap<String, f64> = BTreeMap::new();
        for line in corpus {
            let normalized = line.as_ref().split_whitespace().collect::<Vec<_>>().join(" ");
            if !normalized.is_empty() {
                *line_counts.entry(normalized).or_default() += 1.0;
            }
        }
        if line_counts.is_empty() {
            return Err(Error::Training("cannot train a unigram model on an empty corpus".into()));
        }

        let mut char_freq: BTreeMap<char, f64> = BTreeMap::new();
        let mut substr_freq: HashMap<String, f64> = HashMap::new();
        for (line, &count) in &line_counts {
            for c in line.chars() {
                *char_freq.entry(c).or_default() += count;
            }
            for word in line.split(' ') {
                let chars: Vec<char> = word.chars().collect();
                for start in 0..chars.len() {
                    let mut s = String::new();
                    s.push(chars[start]);
                    for end in start + 2..=chars.len().min(start + config.seed_max_len) {
                        s.push(chars[end - 1]);
                        *substr_freq.entry(s.clone()).or_default() += count;
                    }
                }
            }
        }
        if config.vocab_size < char_freq.len() {
            return Err(Error::Config(format!(
                "vocab_size {} is below the {} distinct corpus characters",
                config.vocab_size,
                char_freq.len()
            )));
        }
        let mut seeds: Vec<(String, f64)> = substr_freq.into_iter().collect();
        seeds.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        seeds.truncate(MAX_SEED_PIECES);

        let mut all: Vec<(String, f64)> = char_freq
            .into_iter()
            .map(|(c, f)| (c.to_string(), f))
            .chain(seeds)
            .collect();
        all.sort_by(|a, b| a.0.cmp(&b.0));
        let total: f64 = all.iter().map(|(_, f)| f).sum();
        let (pieces, log_probs) = all
            .into_iter()
            .map(|(p, f)| (p, (f / total).ln()))
            .unzip();

        let mut trainer = UnigramTrainer {
            config,
            lines: line_counts
                .into_iter()
                .map(|(l, c)| (l.chars().collect(), c))
                .collect(),
            pieces,
            log_probs,
            expected: Vec::new(),
            lattices: Vec::new(),
            log_likelihood: None,
        };
        trainer.rebuild_lattices();
        Ok(trainer)
    }

    fn rebuild_lattices(&mut self) {
        let index: HashMap<&str, u32> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i as u32))
            .collect();
        let max_len = self.pieces.iter().map(|p| p.chars().count()).max().unwrap_or(1);
        self.lattices = self
            .lines
            .iter()
            .map(|(chars, _)| {
                let mut arcs = Vec::new();
                for start in 0..chars.len() {
                    let mut buf = String::new();
                    for end in start + 1..=chars.len().min(start + max_len) {
                        buf.push(chars[end - 1]);
                        if let Some(&piece) = index.get(buf.as_str()) {
                            arcs.push(Arc {
                                start: start as u32,
                                end: end as u32,
                                piece,
                            });
                        }
                    }
                }
                arcs
            })
            .collect();
    }

    pub fn vocab_len(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[String] {
        &self.pieces
    }

    /// Corpus log-likelihood evaluated by the most recent E-step.
    pub fn log_likelihood(&self) -> Option<f64> {
        self.log_likelihood
    }

    /// Current piece probabilities keyed by piece.
    pub fn probabilities(&self) -> BTreeMap<&str, f64> {
        self.pieces
            .iter()
            .map(String::as_str)
            .zip(self.log_probs.iter().map(|lp| lp.exp()))
            .collect()
    }

    /// One EM iteration. Returns the log-likelihood under the parameters
    /// in effect before the M-step.
    pub fn em_step(&mut self) -> f64 {
        let log_probs = &self.log_probs;
        let per_line: Vec<(f64, Vec<(u32, f64)>)> = self
            .lines
            .par_iter()
            .zip(self.lattices.par_iter())
            .map(|((chars, count), arcs)| {
                let n = chars.len();
                let mut alpha = vec![f64::NEG_INFINITY; n + 1];
                let mut beta = vec![f64::NEG_INFINITY; n + 1];
                alpha[0] = 0.0;
                beta[n] = 0.0;
                // arcs are ordered by start, so a forward sweep needs them by end
                let mut by_end: Vec<&Arc> = arcs.iter().collect();
                by_end.sort_by_key(|a| (a.end, a.start));
                for a in &by_end {
                    let v = alpha[a.start as usize] + log_probs[a.piece as usize];
                    alpha[a.end as usize] = log_add(alpha[a.end as usize], v);
                }
                for a in arcs.iter().rev() {
                    let v = beta[a.end as usize] + log_probs[a.piece as usize];
                    beta[a.start as usize] = log_add(beta[a.start as usize], v);
                }
                let z = alpha[n];
                let counts = arcs
                    .iter()
                    .map(|a| {
                        let post = (alpha[a.start as usize] + log_probs[a.piece as usize]
                            + beta[a.end as usize]
                            - z)
                            .exp();
                        (a.piece, count * post)
                    })
                    .collect();
                (count * z, counts)
            })
            .collect();

        let mut expected = vec![0.0; self.pieces.len()];
        let mut total_ll = 0.0;
        for (ll, counts) in per_line {
            total_ll += ll;
            for (piece, c) in counts {
                expected[piece as usize] += c;
            }
        }
        let total: f64 = expected.iter().sum();
        self.log_probs = expected.iter().map(|c| (c / total).ln()).collect();
        self.expected = expected;
        self.log_likelihood = Some(total_ll);
        total_ll
    }

    /// Runs EM until the relative improvement drops below the tolerance.
    /// Returns the per-iteration log-likelihoods.
    pub fn run_em(&mut self) -> Vec<f64> {
        let mut history: Vec<f64> = Vec::new();
        for _ in 0..self.config.max_em_iterations.max(1) {
            let ll = self.em_step();
            let converged = history
                .last()
                .is_some_and(|&prev| (ll - prev) <= self.config.em_tolerance * ll.abs().max(1.0));
            history.push(ll);
            if converged {
                break;
            }
        }
        history
    }

    fn is_single_char(piece: &str) -> bool {
        let mut it = piece.chars();
        it.next().is_some() && it.next().is_none()
    }

    /// Drops the lowest-loss multi-character pieces. The loss of a piece is
    /// its expected count times the log-probability it wins over its best
    /// segmentation by the remaining pieces. Returns the number removed.
    pub fn prune_round(&mut self) -> usize {
        let excess = self.pieces.len().saturating_sub(self.config.vocab_size);
        if excess == 0 {
            return 0;
        }
        if self.expected.is_empty() {
            self.em_step();
        }
        let index: HashMap<&str, usize> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let max_len = self.pieces.iter().map(|p| p.chars().count()).max().unwrap_or(1);
        let mut scored: Vec<(f64, usize)> = Vec::new();
        for (k, piece) in self.pieces.iter().enumerate() {
            if Self::is_single_char(piece) {
                continue;
            }
            let chars: Vec<char> = piece.chars().collect();
            let alt = viterbi(&chars, max_len, |sub, _| {
                if sub == piece {
                    None
                } else {
                    index.get(sub).map(|&i| self.log_probs[i])
                }
            });
            let alt_lp: f64 = alt
                .iter()
                .map(|&(s, e)| {
                    let sub: String = chars[s..e].iter().collect();
                    index
                        .get(sub.as_str())
                        .map_or(UNKNOWN_LOG_PROB, |&i| self.log_probs[i])
                })
                .sum();
            let loss = if self.expected[k] > 0.0 {
                self.expected[k] * (self.log_probs[k] - alt_lp)
            } else {
                0.0
            };
            scored.push((loss, k));
        }
        scored.sort_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then_with(|| self.pieces[a.1].cmp(&self.pieces[b.1]))
        });
        let quota = ((scored.len() as f64) * self.config.prune_fraction).ceil() as usize;
        let drop = quota.max(1).min(excess).min(scored.len());
        if drop == 0 {
            return 0;
        }
        let mut remove = vec![false; self.pieces.len()];
        for &(_, k) in &scored[..drop] {
            remove[k] = true;
        }

        let mut pieces = Vec::with_capacity(self.pieces.len() - drop);
        let mut counts = Vec::with_capacity(self.pieces.len() - drop);
        for (k, piece) in self.pieces.drain(..).enumerate() {
            if remove[k] {
                continue;
            }
            let c = self.expected[k];
            // keep every character reachable after renormalizing
            let c = if Self::is_single_char(&piece) { c.max(0.5) } else { c };
            pieces.push(piece);
            counts.push(c);
        }
        let total: f64 = counts.iter().sum();
        self.pieces = pieces;
        self.log_probs = counts.iter().map(|c| (c / total).ln()).collect();
        self.expected.clear();
        self.log_likelihood = None;
        self.rebuild_lattices();
        drop
    }

    pub fn train(mut self) -> Result<UnigramModel> {
        loop {
            self.run_em();
            if self.pieces.len() <= self.config.vocab_size {
                break;
            }
            if self.prune_round() == 0 {
                break;
            }
        }
        self.into_model()
    }

    pub fn into_model(self) -> Result<UnigramModel> {
        UnigramModel::from_log_probs(self.pieces.into_iter().zip(self.log_probs))
    }
}

pub fn unigram_train<S: AsRef<str>>(corpus: &[S], config: UnigramConfig) -> Result<UnigramModel> {
    UnigramTrainer::new(corpus, config)?.train()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(pieces: &[(&str, f64)]) -> UnigramModel {
        UnigramModel::from_log_probs(pieces.iter().map(|&(p, pr)| (p, pr.ln()))).unwrap()
    }

    #[test]
    fn sequence_probability_examples() {
        let m = toy(&[("a", 0.5), ("b", 0.25), ("c", 0.25)]);
        let lp = sequence_probability(&["a", "b"], &m).unwrap();
        assert!((lp - 0.125f64.ln()).abs() < 1e-12);
        assert_eq!(sequence_probability::<&str>(&[], &m).unwrap(), 0.0);
        let lp = sequence_probability(&["c", "a", "b"], &m).unwrap();
        assert!((lp - (0.25f64.ln() + 0.5f64.ln() + 0.25f64.ln())).abs() < 1e-12);
        assert!(matches!(
            sequence_probability(&["z"], &m),
            Err(Error::Vocabulary(_))
        ));
    }

    #[test]
    fn encode_examples() {
        let m = toy(&[("a", 0.4), ("b", 0.4), ("ab", 0.2)]);
        // 0.2 for [ab] beats 0.16 for [a, b]
        assert_eq!(m.encode("ab"), vec!["ab"]);
        assert_eq!(m.encode("a"), vec!["a"]);
        assert_eq!(m.encode("azb"), vec!["a", "z", "b"]);
        let ids = m.encode_ids("az");
        assert_eq!(ids[1], 3 + 'z' as u32);
        assert_eq!(m.decode_ids(&ids).unwrap(), "az");
    }

    #[test]
    fn ties_prefer_fewer_then_leftmost_longest() {
        // [aa] and [a, a] tie on probability only if p(aa) = p(a)^2
        let m = toy(&[("a", 0.5), ("aa", 0.25), ("b", 0.25)]);
        assert_eq!(m.encode("aa"), vec!["aa"]);
        let m = toy(&[("a", 0.2), ("ab", 0.2), ("b", 0.2), ("ba", 0.2), ("x", 0.2)]);
        // [ab, a] and [a, ba] tie on score and count; leftmost-longest wins
        assert_eq!(m.encode("aba"), vec!["ab", "a"]);
    }

    #[test]
    fn model_validation() {
        assert!(UnigramModel::from_log_probs([("a", 0.5f64.ln())]).is_err());
        assert!(UnigramModel::from_log_probs([("a", 0.0), ("a", 0.0)]).is_err());
        assert!(UnigramModel::from_log_probs([("", 0.0)]).is_err());
    }

    #[test]
    fn single_piece_degenerate_corpus() {
        let config = UnigramConfig {
            vocab_size: 1,
            ..UnigramConfig::default()
        };
        let m = unigram_train(&["aaa"], config).unwrap();
        assert_eq!(m.pieces(), &[("a".to_string(), 0.0)]);
        let ll = sequence_probability(&m.encode("aaa"), &m).unwrap();
        assert_eq!(ll, 0.0);
    }

    #[test]
    fn em_on_ab_matches_enumeration() {
        // seeded vocabulary for "ab" is {a, b, ab} with counts 1 each
        let mut trainer = UnigramTrainer::new(&["ab"], UnigramConfig::default()).unwrap();
        assert_eq!(trainer.pieces(), &["a", "ab", "b"]);
        let (pa, pab, pb) = (1.0f64 / 3.0, 1.0 / 3.0, 1.0 / 3.0);
        // segmentations: [a, b] with weight pa*pb, [ab] with weight pab
        let w_split = pa * pb;
        let w_whole = pab;
        let z = w_split + w_whole;
        let ll = trainer.em_step();
        assert!((ll - z.ln()).abs() < 1e-12);
        let expected_split = w_split / z;
        let expected_whole = w_whole / z;
        let total = 2.0 * expected_split + expected_whole;
        let probs = trainer.probabilities();
        assert!((probs["a"] - expected_split / total).abs() < 1e-12);
        assert!((probs["b"] - expected_split / total).abs() < 1e-12);
        assert!((probs["ab"] - expected_whole / total).abs() < 1e-12);
    }

    #[test]
    fn em_log_likelihood_non_decreasing() {
        let corpus = [
            "the cat sat on the mat",
            "the dog sat on the log",
            "a cat and a dog",
            "that hat is the cat's hat",
        ];
        let mut trainer = UnigramTrainer::new(&corpus, UnigramConfig::default()).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for _ in 0..15 {
            let ll = trainer.em_step();
            assert!(ll >= prev - 1e-9, "{ll} < {prev}");
            let total: f64 = trainer.probabilities().values().sum();
            assert!((total - 1.0).abs() < 1e-9);
            prev = ll;
        }
    }

    #[test]
    fn training_keeps_characters_and_budget() {
        let corpus = [
            "the cat sat on the mat",
            "the dog sat on the log",
            "a cat and a dog went to the market",
        ];
        let config = UnigramConfig {
            vocab_size: 40,
            ..UnigramConfig::default()
        };
        let m = unigram_train(&corpus, config).unwrap();
        assert!(m.len() <= 40);
        for line in corpus {
            for c in line.chars() {
                assert!(m.log_prob(&c.to_string()).is_some(), "lost {c:?}");
            }
        }
        let total: f64 = m.pieces().iter().map(|(_, lp)| lp.exp()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn config_errors() {
        let small = UnigramConfig {
            vocab_size: 2,
            ..UnigramConfig::default()
        };
        assert!(matches!(
            UnigramTrainer::new(&["abc"], small),
            Err(Error::Config(_))
        ));
        assert!(UnigramTrainer::new::<&str>(&[], UnigramConfig::default()).is_err());
        let bad = UnigramConfig {
            prune_fraction: 1.0,
            ..UnigramConfig::default()
        };
        assert!(UnigramTrainer::new(&["abc"], bad).is_err());
    }

    #[test]
    fn file_round_trip() {
        let m = unigram_train(
            &["hello world", "hello there"],
            UnigramConfig {
                vocab_size: 15,
                ..UnigramConfig::default()
            },
        )
        .unwrap();
        let text = m.to_file_string();
        assert!(text.starts_with("unigram v1\n"));
        assert_eq!(UnigramModel::from_file_str(&text).unwrap(), m);
        assert!(UnigramModel::from_file_str("bpe v1 eow=</w>\n").is_err());
    }
}
