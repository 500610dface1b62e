//! Sentence similarity backends used to pick the story sentence behind a rule statement.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::text;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityKind {
    TokenF1,
    TfidfCosine,
    EmbeddingCosine,
}

impl FromStr for SimilarityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "token-f1" => Ok(Self::TokenF1),
            "tfidf" | "tfidf-cosine" => Ok(Self::TfidfCosine),
            "embedding" | "embedding-cosine" => Ok(Self::EmbeddingCosine),
            other => Err(Error::Config(format!(
                "unknown similarity backend {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::TokenF1 => "token-f1",
            Self::TfidfCosine => "tfidf",
            Self::EmbeddingCosine => "embedding",
        })
    }
}

#[derive(Debug, Clone)]
pub enum SimilarityBackend {
    /// Unigram F1 over normalized tokens, in [0, 1].
    TokenF1,
    /// Cosine of raw-count TF x IDF vectors, in [0, 1].
    TfidfCosine(IdfTable),
    /// Cosine of precomputed unit vectors, in [-1, 1].
    EmbeddingCosine(EmbeddingTable),
}

impl SimilarityBackend {
    pub fn kind(&self) -> SimilarityKind {
        match self {
            Self::TokenF1 => SimilarityKind::TokenF1,
            Self::TfidfCosine(_) => SimilarityKind::TfidfCosine,
            Self::EmbeddingCosine(_) => SimilarityKind::EmbeddingCosine,
        }
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64> {
        match self {
            Self::TokenF1 => Ok(text::token_f1(a, b)),
            Self::TfidfCosine(idf) => Ok(idf.cosine(a, b)),
            Self::EmbeddingCosine(table) => table.cosine(a, b),
        }
    }
}

/// Smoothed inverse document frequencies over normalized unigrams.
#[derive(Debug, Clone)]
pub struct IdfTable {
    documents: usize,
    idf: HashMap<String, f64>,
}

/// `idf(t) = ln((1 + N) / (1 + df(t))) + 1`.
pub fn fit_idf<I, S>(corpus: I) -> Result<IdfTable>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut documents = 0usize;
    let mut df: HashMap<String, usize> = HashMap::new();
    for doc in corpus {
        documents += 1;
        let unique: BTreeSet<String> = text::tokens(doc.as_ref()).into_iter().collect();
        for t in unique {
            *df.entry(t).or_insert(0) += 1;
        }
    }
    if documents == 0 {
        return Err(Error::EmptyCorpus);
    }
    let idf = df
        .into_iter()
        .map(|(t, n)| (t, smoothed_idf(documents, n)))
        .collect();
    Ok(IdfTable { documents, idf })
}

fn smoothed_idf(documents: usize, df: usize) -> f64 {
    ((1 + documents) as f64 / (1 + df) as f64).ln() + 1.0
}

impl IdfTable {
    pub fn documents(&self) -> usize {
        self.documents
    }

    /// IDF of a normalized token; unseen tokens get the df = 0 value.
    pub fn idf(&self, token: &str) -> f64 {
        self.idf
            .get(token)
            .copied()
            .unwrap_or_else(|| smoothed_idf(self.documents, 0))
    }

    fn weights(&self, sentence: &str) -> HashMap<String, f64> {
        let mut w: HashMap<String, f64> = HashMap::new();
        for t in text::tokens(sentence) {
            *w.entry(t).or_insert(0.0) += 1.0;
        }
        for (t, v) in w.iter_mut() {
            *v *= self.idf(t);
        }
        w
    }

    pub fn cosine(&self, a: &str, b: &str) -> f64 {
        let wa = self.weights(a);
        let wb = self.weights(b);
        if wa.is_empty() || wb.is_empty() {
            return if wa.is_empty() && wb.is_empty() {
                1.0
            } else {
                0.0
            };
        }
        if wa == wb {
            return 1.0;
        }
        // sorted keys keep the sum independent of argument order
        let shared: BTreeSet<&String> = wa.keys().filter(|k| wb.contains_key(*k)).collect();
        if shared.is_empty() {
            return 0.0;
        }
        let dot: f64 = shared.iter().map(|k| wa[*k] * wb[*k]).sum();
        let norm = |w: &HashMap<String, f64>| {
            let keys: BTreeSet<&String> = w.keys().collect();
            keys.iter().map(|k| w[*k] * w[*k]).sum::<f64>().sqrt()
        };
        (dot / (norm(&wa) * norm(&wb))).clamp(0.0, 1.0)
    }
}

/// Exact sentence string -> unit vector, all of one dimension.
#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f64>>,
}

#[derive(Deserialize)]
struct EmbeddingRow {
    text: String,
    vector: Vec<f64>,
}

impl EmbeddingTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, text: &str) -> Option<&[f64]> {
        self.vectors.get(text).map(Vec::as_slice)
    }

    /// Reads `{"text": ..., "vector": [...]}` lines, renormalizing every vector.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = Self::default();
        for (i, line) in reader.lines().enumerate() {
            let line_no = i + 1;
            let line = line.map_err(|e| Error::Format {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let row: EmbeddingRow = serde_json::from_str(&line).map_err(|e| Error::Format {
                line: line_no,
                message: e.to_string(),
            })?;
            table.insert(line_no, row.text, row.vector)?;
        }
        Ok(table)
    }

    fn insert(&mut self, line: usize, text: String, mut vector: Vec<f64>) -> Result<()> {
        if vector.is_empty() {
            return Err(Error::Format {
                line,
                message: "empty vector".into(),
            });
        }
        if self.vectors.is_empty() {
            self.dim = vector.len();
        } else if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                line,
                expected: self.dim,
                found: vector.len(),
            });
        }
        if self.vectors.contains_key(&text) {
            return Err(Error::DuplicateKey { line, key: text });
        }
        let norm = vector.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Format {
                line,
                message: "vector has zero or non-finite norm".into(),
            });
        }
        vector.iter_mut().for_each(|x| *x /= norm);
        self.vectors.insert(text, vector);
        Ok(())
    }

    pub fn cosine(&self, a: &str, b: &str) -> Result<f64> {
        let va = self
            .get(a)
            .ok_or_else(|| Error::EmbeddingMiss(a.to_owned()))?;
        let vb = self
            .get(b)
            .ok_or_else(|| Error::EmbeddingMiss(b.to_owned()))?;
        if a == b {
            return Ok(1.0);
        }
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| x * y).sum();
        Ok(dot.clamp(-1.0, 1.0))
    }
}

pub fn load_embedding_table(path: &Path) -> Result<EmbeddingTable> {
    EmbeddingTable::from_reader(crate::io::open(path)?)
}
