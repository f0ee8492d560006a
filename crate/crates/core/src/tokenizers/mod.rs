//! Text cleaning and subword tokenizers (BPE and unigram LM).

mod bpe;
mod clean;
mod unigram;

pub use bpe::{bpe_train, BpeModel, EOW};
pub use clean::clean_text;
pub use unigram::{
    sequence_probability, unigram_train, UnigramConfig, UnigramModel, UnigramTrainer,
    UNKNOWN_LOG_PROB,
};

use crate::error::{Error, Result};

/// Either tokenizer, as read from a vocabulary file.
#[derive(Clone, Debug, PartialEq)]
pub enum SubwordModel {
    Bpe(BpeModel),
    Unigram(UnigramModel),
}

impl SubwordModel {
    /// Dispatches on the file's header line.
    pub fn from_file_str(text: &str) -> Result<Self> {
        let header = text.split('\n').next().unwrap_or_default();
        if header.starts_with("bpe ") {
            BpeModel::from_file_str(text).map(SubwordModel::Bpe)
        } else if header.starts_with("unigram ") {
            UnigramModel::from_file_str(text).map(SubwordModel::Unigram)
        } else {
            Err(Error::Load(format!("unrecognized vocabulary header `{header}`")))
        }
    }

    pub fn to_file_string(&self) -> String {
        match self {
            SubwordModel::Bpe(m) => m.to_file_string(),
            SubwordModel::Unigram(m) => m.to_file_string(),
        }
    }

    pub fn encode(&self, text: &str) -> Vec<u32> {
        match self {
            SubwordModel::Bpe(m) => m.encode(text),
            SubwordModel::Unigram(m) => m.encode_ids(text),
        }
    }

    pub fn decode(&self, ids: &[u32]) -> Result<String> {
        match self {
            SubwordModel::Bpe(m) => m.decode(ids),
            SubwordModel::Unigram(m) => m.decode_ids(ids),
        }
    }
}
