//! Byte-pair encoding over characters with an end-of-word marker.
//!
//! Training splits lines on whitespace, spells each word as its characters
//! followed by `</w>`, and repeatedly merges the most frequent adjacent pair
//! (ties broken by the lexicographically smallest pair) while that pair
//! occurs at least twice.
//!
//! A model is fully determined by its merge list. Its vocabulary is `</w>`,
//! then the base characters that take part in some merge (sorted), then the
//! merge results in training order. Characters outside the vocabulary are
//! encoded as `vocab_len + codepoint`.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub const EOW: &str = "</w>";
const HEADER: &str = "bpe v1 eow=</w>";
const MIN_PAIR_COUNT: u64 = 2;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpeModel {
    merges: Vec<(String, String)>,
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    ranks: HashMap<(String, String), usize>,
}

impl BpeModel {
    pub fn from_merges(merges: Vec<(String, String)>) -> Self {
        let outputs: HashSet<String> = merges.iter().map(|(a, b)| format!("{a}{b}")).collect();
        let mut base: Vec<&String> = merges
            .iter()
            .flat_map(|(a, b)| [a, b])
            .filter(|s| s.as_str() != EOW && !outputs.contains(*s))
            .collect();
        base.sort();
        base.dedup();

        let mut vocab = vec![EOW.to_string()];
        vocab.extend(base.into_iter().cloned());
        let mut ids: HashMap<String, u32> = vocab
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i as u32))
            .collect();
        let mut ranks = HashMap::with_capacity(merges.len());
        for (rank, (a, b)) in merges.iter().enumerate() {
            let merged = format!("{a}{b}");
            if !ids.contains_key(&merged) {
                ids.insert(merged.clone(), vocab.len() as u32);
                vocab.push(merged);
            }
            ranks.entry((a.clone(), b.clone())).or_insert(rank);
        }
        BpeModel {
            merges,
            vocab,
            ids,
            ranks,
        }
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn id_of(&self, symbol: &str) -> Option<u32> {
        self.ids.get(symbol).copied()
    }

    /// Splits text into merged symbols, word by word.
    pub fn segment(&self, text: &str) -> Vec<String> {
        let mut out = Vec::new();
        for word in text.split_whitespace() {
            out.extend(self.segment_word(word));
        }
        out
    }

    fn segment_word(&self, word: &str) -> Vec<String> {
        let mut symbols: Vec<String> = word.chars().map(String::from).collect();
        symbols.push(EOW.to_string());
        loop {
            let best = symbols
                .windows(2)
                .filter_map(|w| self.ranks.get(&(w[0].clone(), w[1].clone())).copied())
                .min();
            let Some(rank) = best else { break };
            let (a, b) = &self.merges[rank];
            let mut merged = Vec::with_capacity(symbols.len());
            let mut i = 0;
            while i < symbols.len() {
                if i + 1 < symbols.len() && &symbols[i] == a && &symbols[i + 1] == b {
                    merged.push(format!("{a}{b}"));
                    i += 2;
                } else {
                    merged.push(std::mem::take(&mut symbols[i]));
                    i += 1;
                }
            }
            symbols = merged;
        }
        symbols
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        self.segment(text)
            .iter()
            .map(|s| match self.ids.get(s) {
                Some(&id) => id,
                None => {
                    // only unmerged single characters can miss the vocabulary
                    let c = s.chars().next().expect("non-empty symbol");
                    self.vocab.len() as u32 + c as u32
                }
            })
            .collect()
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        let mut text = String::new();
        for &id in ids {
            match self.vocab.get(id as usize) {
                Some(sym) => text.push_str(sym),
                None => {
                    let c = id
                        .checked_sub(self.vocab.len() as u32)
                        .and_then(char::from_u32)
                        .ok_or_else(|| Error::Decode(format!("unknown symbol id {id}")))?;
                    text.push(c);
                }
            }
        }
        let text = text.replace(EOW, " ");
        Ok(text.strip_suffix(' ').unwrap_or(&text).to_string())
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::from(HEADER);
        out.push('\n');
        for (a, b) in &self.merges {
            let _ = writeln!(out, "{a}\t{b}");
        }
        out
    }

    pub fn from_file_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next() {
            Some(HEADER) => {}
            other => {
                return Err(Error::Load(format!(
                    "expected BPE header `{HEADER}`, found {other:?}"
                )))
            }
        }
        let merges = lines
            .enumerate()
            .filter(|(_, l)| !l.is_empty())
            .map(|(i, l)| {
                l.split_once('\t')
                    .filter(|(a, b)| !a.is_empty() && !b.is_empty())
                    .map(|(a, b)| (a.to_string(), b.to_string()))
                    .ok_or_else(|| Error::Load(format!("malformed merge on line {}", i + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_merges(merges))
    }
}

/// Learns merges until the vocabulary holds `vocab_size` symbols or no pair
/// repeats. The budget counts the initial characters and `</w>`.
pub fn bpe_train<S: AsRef<str>>(corpus: &[S], vocab_size: usize) -> Result<BpeModel> {
    let mut word_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for line in corpus {
        for word in line.as_ref().split_whitespace() {
            *word_counts.entry(word).or_default() += 1;
        }
    }
    if word_counts.is_empty() {
        return Err(Error::Training("cannot train BPE on an empty corpus".into()));
    }

    let mut symbols: Vec<String> = Vec::new();
    let mut symbol_ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |s: String, symbols: &mut Vec<String>| -> u32 {
        *symbol_ids.entry(s.clone()).or_insert_with(|| {
            symbols.push(s);
            symbols.len() as u32 - 1
        })
    };
    let eow = intern(EOW.to_string(), &mut symbols);
    let mut words: Vec<(Vec<u32>, u64)> = word_counts
        .iter()
        .map(|(w, &count)| {
            let mut seq: Vec<u32> = w
                .chars()
                .map(|c| intern(c.to_string(), &mut symbols))
                .collect();
            seq.push(eow);
            (seq, count)
        })
        .collect();
    let initial = symbols.len();
    if vocab_size < initial {
        return Err(Error::Config(format!(
            "vocab_size {vocab_size} is below the {initial} initial symbols"
        )));
    }

    let mut vocab_len = initial;
    let mut merges = Vec::new();
    while vocab_len < vocab_size {
        let mut pair_counts: HashMap<(u32, u32), u64> = HashMap::new();
        for (seq, count) in &words {
            for w in seq.windows(2) {
                *pair_counts.entry((w[0], w[1])).or_default() += count;
            }
        }
        let best = pair_counts.into_iter().max_by(|(pa, ca), (pb, cb)| {
            ca.cmp(cb).then_with(|| {
                // smaller pair wins a tie, so it must compare as greater here
                let key = |p: &(u32, u32)| (symbols[p.0 as usize].clone(), symbols[p.1 as usize].clone());
                key(pb).cmp(&key(pa))
            })
        });
        let Some(((a, b), count)) = best else { break };
        if count < MIN_PAIR_COUNT {
            break;
        }
        let merged_str = format!("{}{}", symbols[a as usize], symbols[b as usize]);
        let before = symbols.len();
        let merged = intern(merged_str, &mut symbols);
        if symbols.len() > before {
            vocab_len += 1;
        }
        merges.push((symbols[a as usize].clone(), symbols[b as usize].clone()));
        for (seq, _) in &mut words {
            if seq.len() < 2 {
                continue;
            }
            let mut out = Vec::with_capacity(seq.len());
            let mut i = 0;
            while i < seq.len() {
                if i + 1 < seq.len() && seq[i] == a && seq[i + 1] == b {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(seq[i]);
                    i += 1;
                }
            }
            *seq = out;
        }
    }
    Ok(BpeModel::from_merges(merges))
}
