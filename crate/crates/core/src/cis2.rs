//! Sentence-selection labels `<s_a> REL <s_b>` and the heuristic that derives
//! them from free-text rules.
//!
//! Two tokens come straight from the input: X's story index, and (through the
//! dimension) whether X sits in the first or second slot. The third is the
//! non-X story sentence most similar to the rule's other statement.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config;
use crate::error::{Error, Result};
use crate::model::{
    parse_specific_rule, Dimension, RelationToken, RelationVocabulary, StoryEntry, STORY_LEN,
};
use crate::similarity::SimilarityBackend;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cis2Label {
    pub a: usize,
    pub relation: RelationToken,
    pub b: usize,
}

impl Cis2Label {
    pub fn new(a: usize, relation: RelationToken, b: usize) -> Result<Self> {
        for index in [a, b] {
            if index >= STORY_LEN {
                return Err(Error::IndexOutOfRange { index });
            }
        }
        if a == b {
            return Err(Error::SelfLoop { index: a });
        }
        Ok(Self { a, relation, b })
    }
}

impl fmt::Display for Cis2Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<s_{}> {} <s_{}>", self.a, self.relation, self.b)
    }
}

impl Serialize for Cis2Label {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Every label over the given relations: 20 ordered index pairs per relation.
/// Duplicate relations are counted once.
pub fn enumerate_label_space(relations: &[RelationToken]) -> Vec<Cis2Label> {
    let vocab = RelationVocabulary::new(relations.iter().cloned());
    let mut out = Vec::with_capacity(vocab.tokens().len() * 20);
    for rel in vocab.tokens() {
        for a in 0..STORY_LEN {
            for b in (0..STORY_LEN).filter(|&b| b != a) {
                out.push(Cis2Label {
                    a,
                    relation: rel.clone(),
                    b,
                });
            }
        }
    }
    out
}

fn parse_index(text: &str, digits: &str) -> Result<usize> {
    let syntax = |reason| Error::LabelSyntax {
        text: text.to_owned(),
        reason,
    };
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return Err(syntax("sentence index must be decimal digits"));
    }
    if digits.len() > 1 && digits.starts_with('0') {
        return Err(syntax("sentence index has a leading zero"));
    }
    digits
        .parse()
        .map_err(|_| syntax("sentence index too large"))
}

/// Parses a canonical label, allowing only surrounding whitespace. The
/// relation must be one of `relations`.
pub fn parse_label(text: &str, relations: &[RelationToken]) -> Result<Cis2Label> {
    let syntax = |reason| Error::LabelSyntax {
        text: text.to_owned(),
        reason,
    };
    let body = text.trim();
    let rest = body
        .strip_prefix("<s_")
        .ok_or_else(|| syntax("expected leading <s_i>"))?;
    let close = rest.find('>').ok_or_else(|| syntax("unterminated <s_i>"))?;
    let a_digits = &rest[..close];
    let rest = rest[close + 1..]
        .strip_prefix(' ')
        .ok_or_else(|| syntax("expected a space after <s_i>"))?;
    let rest = rest
        .strip_suffix('>')
        .ok_or_else(|| syntax("expected trailing <s_j>"))?;
    let open = rest
        .rfind("<s_")
        .ok_or_else(|| syntax("expected trailing <s_j>"))?;
    let b_digits = &rest[open + 3..];
    let relation = rest[..open]
        .strip_suffix(' ')
        .ok_or_else(|| syntax("expected a space before <s_j>"))?;
    if relation.is_empty() {
        return Err(syntax("missing relation"));
    }
    if relation.trim() != relation {
        return Err(syntax("tokens must be separated by single spaces"));
    }
    let a = parse_index(text, a_digits)?;
    let b = parse_index(text, b_digits)?;
    let relation = relations
        .iter()
        .find(|r| r.as_str() == relation)
        .cloned()
        .ok_or_else(|| Error::UnknownRelation(relation.to_owned()))?;
    Cis2Label::new(a, relation, b)
}

/// Relation surface for each of the ten dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionRelationMap {
    by_dimension: [RelationToken; 10],
}

impl DimensionRelationMap {
    pub fn uniform(relation: RelationToken) -> Self {
        Self {
            by_dimension: std::array::from_fn(|_| relation.clone()),
        }
    }

    /// One distinct token per dimension, `>dim1>` .. `>dim10>`.
    pub fn dimension_tokens() -> Self {
        Self {
            by_dimension: std::array::from_fn(|i| {
                RelationToken::new(format!(">dim{}>", i + 1)).expect("well-formed")
            }),
        }
    }

    /// Starts from `>Causes/Enables>` everywhere and applies `dimension=surface` overrides.
    pub fn from_pairs<K, V>(pairs: impl IntoIterator<Item = (K, V)>) -> Result<Self>
    where
        K: AsRef<str>,
        V: Into<String>,
    {
        let mut map = Self::default();
        for (key, surface) in pairs {
            let dim = Dimension::parse(key.as_ref())
                .map_err(|_| Error::Config(format!("bad dimension key {:?}", key.as_ref())))?;
            map.by_dimension[usize::from(dim.get() - 1)] = RelationToken::new(surface)?;
        }
        Ok(map)
    }

    /// `uniform`, `dimension`, or a path to a `dimension=surface` file.
    pub fn from_spec(spec: &str) -> Result<Self> {
        match spec {
            "uniform" => Ok(Self::default()),
            "dimension" => Ok(Self::dimension_tokens()),
            path => Self::from_pairs(config::read_file(std::path::Path::new(path))?),
        }
    }

    pub fn get(&self, dimension: Dimension) -> &RelationToken {
        &self.by_dimension[usize::from(dimension.get() - 1)]
    }

    /// Distinct surfaces in dimension order.
    pub fn relations(&self) -> Vec<RelationToken> {
        RelationVocabulary::new(self.by_dimension.iter().cloned())
            .tokens()
            .to_vec()
    }
}

impl Default for DimensionRelationMap {
    fn default() -> Self {
        Self::uniform(RelationToken::causes_enables())
    }
}

/// Where a label's relation token comes from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[allow(clippy::large_enum_variant)]
pub enum RelationSource {
    /// The connective written in the rule being converted.
    #[default]
    Rule,
    /// The surface mapped to the entry's dimension.
    Dimension(DimensionRelationMap),
}

#[derive(Debug, Clone, Default)]
pub struct ConvertOptions {
    pub relation_source: RelationSource,
    /// Reject conversions whose best candidate scores below this. Off by default.
    pub min_similarity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionResult {
    pub label: Cis2Label,
    pub x_index: usize,
    pub y_index: usize,
    pub candidate_scores: BTreeMap<usize, f64>,
}

/// One line of conversion output.
#[derive(Debug, Clone, Serialize)]
pub struct ConversionRecord<'a> {
    pub entry_id: &'a str,
    pub label: Option<&'a Cis2Label>,
    pub x_index: usize,
    pub y_index: Option<usize>,
    pub scores: Option<&'a BTreeMap<usize, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<'a> ConversionRecord<'a> {
    pub fn new(entry: &'a StoryEntry, result: &'a Result<ConversionResult>) -> Self {
        match result {
            Ok(r) => Self {
                entry_id: &entry.entry_id,
                label: Some(&r.label),
                x_index: r.x_index,
                y_index: Some(r.y_index),
                scores: Some(&r.candidate_scores),
                error: None,
            },
            Err(e) => Self {
                entry_id: &entry.entry_id,
                label: None,
                x_index: entry.selected_index,
                y_index: None,
                scores: None,
                error: Some(e.root().to_string()),
            },
        }
    }
}

/// Read side of [`ConversionRecord`]: only the label matters downstream.
#[derive(Debug, Clone, Deserialize)]
pub struct ConversionLine {
    pub entry_id: String,
    pub label: Option<String>,
}

impl Error {
    /// Prediction failures that make the prediction count as unparseable.
    pub fn is_unparseable_prediction(&self) -> bool {
        matches!(
            self.root(),
            Error::NoRelation { .. }
                | Error::AmbiguousRelation { .. }
                | Error::EmptyStatement { .. }
                | Error::DegenerateStatement
        )
    }
}

/// Runs the conversion heuristic with a fixed backend and options.
#[derive(Debug, Clone)]
pub struct Converter {
    pub backend: SimilarityBackend,
    pub options: ConvertOptions,
    pub vocabulary: RelationVocabulary,
}

impl Converter {
    pub fn new(backend: SimilarityBackend) -> Self {
        Self {
            backend,
            options: ConvertOptions::default(),
            vocabulary: RelationVocabulary::default(),
        }
    }

    pub fn with_options(mut self, options: ConvertOptions) -> Self {
        self.options = options;
        self
    }

    pub fn with_vocabulary(mut self, vocabulary: RelationVocabulary) -> Self {
        self.vocabulary = vocabulary;
        self
    }

    /// Every relation a label produced by this converter can carry.
    pub fn label_relations(&self) -> Vec<RelationToken> {
        match &self.options.relation_source {
            RelationSource::Rule => self.vocabulary.tokens().to_vec(),
            RelationSource::Dimension(map) => map.relations(),
        }
    }

    pub fn parse_label(&self, text: &str) -> Result<Cis2Label> {
        parse_label(text, &self.label_relations())
    }

    /// Places X and Y in label order for the entry's dimension.
    pub fn assemble(
        &self,
        entry: &StoryEntry,
        rule_relation: &RelationToken,
        y_index: usize,
    ) -> Result<Cis2Label> {
        let relation = match &self.options.relation_source {
            RelationSource::Rule => rule_relation.clone(),
            RelationSource::Dimension(map) => map.get(entry.dimension).clone(),
        };
        let x = entry.selected_index;
        if entry.dimension.x_is_first() {
            Cis2Label::new(x, relation, y_index)
        } else {
            Cis2Label::new(y_index, relation, x)
        }
    }

    fn match_statement(
        &self,
        entry: &StoryEntry,
        statement: &str,
        relation: &RelationToken,
    ) -> Result<ConversionResult> {
        if statement.trim().is_empty() {
            return Err(Error::DegenerateStatement);
        }
        let x = entry.selected_index;
        let mut candidate_scores = BTreeMap::new();
        for (i, sentence) in entry.sentences.iter().enumerate().filter(|(i, _)| *i != x) {
            candidate_scores.insert(i, self.backend.similarity(statement, sentence)?);
        }
        let (y_index, best) = best_candidate(&candidate_scores);
        if let Some(min) = self.options.min_similarity {
            if best < min {
                return Err(Error::BelowMinSimilarity { best, min });
            }
        }
        Ok(ConversionResult {
            label: self.assemble(entry, relation, y_index)?,
            x_index: x,
            y_index,
            candidate_scores,
        })
    }

    /// Label for an entry's gold specific rule.
    pub fn convert_gold_entry(&self, entry: &StoryEntry) -> Result<ConversionResult> {
        let rule = &entry.specific;
        let other = if entry.dimension.x_is_first() {
            &rule.statement_2
        } else {
            &rule.statement_1
        };
        self.match_statement(entry, other, &rule.relation)
            .map_err(|e| e.in_entry(&entry.entry_id))
    }

    /// Label for a model's free-text output on `entry`. Only the text before
    /// ` ** ` is used; X's index always comes from the entry.
    pub fn convert_prediction(
        &self,
        entry: &StoryEntry,
        predicted_output: &str,
    ) -> Result<ConversionResult> {
        let specific = predicted_output
            .split_once(" ** ")
            .map_or(predicted_output, |(s, _)| s);
        let convert = || {
            let rule = parse_specific_rule(specific, &self.vocabulary)?;
            let other = if entry.dimension.x_is_first() {
                &rule.statement_2
            } else {
                &rule.statement_1
            };
            self.match_statement(entry, other, &rule.relation)
        };
        convert().map_err(|e| e.in_entry(&entry.entry_id))
    }
}

/// Highest score, lowest index on ties. Independent of map iteration order.
fn best_candidate(scores: &BTreeMap<usize, f64>) -> (usize, f64) {
    scores
        .iter()
        .map(|(&i, &s)| (i, s))
        .max_by(|(ia, sa), (ib, sb)| sa.total_cmp(sb).then(ib.cmp(ia)))
        .expect("four candidates")
}
