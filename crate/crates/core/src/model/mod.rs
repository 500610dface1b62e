//! Annotated story entries and the rule types they carry.

mod import;
mod parse;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text;

pub use import::{import_csv, ColumnMap, ImportOutcome};
pub use parse::{
    locate_selected_sentence, parse_glucose_record, parse_specific_rule,
    split_story_into_sentences, ParseOptions, DEFAULT_MATCH_THRESHOLD,
};

/// Number of sentences in every story.
pub const STORY_LEN: usize = 5;

/// A relation connective such as `>Causes/Enables>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RelationToken(String);

impl RelationToken {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        let ok = surface.len() >= 3
            && surface.starts_with('>')
            && surface.ends_with('>')
            && surface.trim() == surface
            && !surface[1..surface.len() - 1].contains('>');
        if ok {
            Ok(Self(surface))
        } else {
            Err(Error::InvalidRelation(surface))
        }
    }

    pub fn causes_enables() -> Self {
        Self(">Causes/Enables>".to_owned())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for RelationToken {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Self::new(value)
    }
}

impl From<RelationToken> for String {
    fn from(value: RelationToken) -> Self {
        value.0
    }
}

impl fmt::Display for RelationToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The set of connectives a rule may use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationVocabulary {
    tokens: Vec<RelationToken>,
}

pub const DEFAULT_RELATIONS: [&str; 5] = [
    ">Causes/Enables>",
    ">Motivates>",
    ">Enables>",
    ">Causes>",
    ">Results in>",
];

impl RelationVocabulary {
    /// Builds a vocabulary, dropping duplicates while keeping first-seen order.
    pub fn new(tokens: impl IntoIterator<Item = RelationToken>) -> Self {
        let mut out: Vec<RelationToken> = Vec::new();
        for t in tokens {
            if !out.contains(&t) {
                out.push(t);
            }
        }
        Self { tokens: out }
    }

    pub fn tokens(&self) -> &[RelationToken] {
        &self.tokens
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.tokens.iter().any(|t| t.as_str() == surface)
    }
}

impl Default for RelationVocabulary {
    fn default() -> Self {
        Self::new(
            DEFAULT_RELATIONS
                .iter()
                .map(|s| RelationToken::new(*s).expect("default relations are well-formed")),
        )
    }
}

/// One of the ten causal dimensions, 1..=10.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Dimension(u8);

const DIMENSION_DESCRIPTIONS: [&str; 10] = [
    "Event that directly causes or enables X",
    "Emotion/basic human drive that motivates X",
    "Location state that enables X",
    "Possession state that enables X",
    "Other attributes enabling X",
    "Event that X directly causes or enables",
    "An emotion that is caused by X",
    "A change in location that X results in",
    "A change of possession that X results in",
    "Other changes in property that X results in",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionInfo {
    pub dimension: Dimension,
    /// X is the first statement of the rule (dimensions 6-10) rather than the second.
    pub x_is_first: bool,
    pub description: &'static str,
}

impl Dimension {
    pub fn new(value: u8) -> Result<Self> {
        if (1..=10).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::DimensionRange {
                value: value.to_string(),
            })
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let range_err = || Error::DimensionRange {
            value: text.to_owned(),
        };
        let value: u8 = text.trim().parse().map_err(|_| range_err())?;
        Self::new(value).map_err(|_| range_err())
    }

    pub fn all() -> impl Iterator<Item = Dimension> {
        (1..=10).map(Dimension)
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn x_is_first(self) -> bool {
        self.0 >= 6
    }

    pub fn info(self) -> DimensionInfo {
        DimensionInfo {
            dimension: self,
            x_is_first: self.x_is_first(),
            description: DIMENSION_DESCRIPTIONS[usize::from(self.0 - 1)],
        }
    }
}

impl TryFrom<u8> for Dimension {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        Self::new(value)
    }
}

impl From<Dimension> for u8 {
    fn from(value: Dimension) -> Self {
        value.0
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `statement_1 REL statement_2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecificRule {
    pub statement_1: String,
    pub relation: RelationToken,
    pub statement_2: String,
}

impl SpecificRule {
    pub fn new(
        statement_1: impl Into<String>,
        relation: RelationToken,
        statement_2: impl Into<String>,
    ) -> Result<Self> {
        let rule = Self {
            statement_1: statement_1.into(),
            relation,
            statement_2: statement_2.into(),
        };
        rule.validate()?;
        Ok(rule)
    }

    fn validate(&self) -> Result<()> {
        if self.statement_1.trim().is_empty() || self.statement_2.trim().is_empty() {
            return Err(Error::EmptyStatement {
                rule: self.to_string(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for SpecificRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.statement_1, self.relation, self.statement_2
        )
    }
}

/// One annotated record: a five-sentence story, the selected sentence X,
/// the causal dimension and the gold specific and general rules.
///
/// X is stored by position; [`StoryEntry::selected_text`] returns the story's
/// own rendering of it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawEntry")]
pub struct StoryEntry {
    pub entry_id: String,
    pub sentences: [String; STORY_LEN],
    pub selected_index: usize,
    pub dimension: Dimension,
    pub specific: SpecificRule,
    pub general: SpecificRule,
}

#[derive(Deserialize)]
struct RawEntry {
    entry_id: String,
    sentences: Vec<String>,
    selected_index: usize,
    dimension: Dimension,
    specific: SpecificRule,
    general: SpecificRule,
}

impl TryFrom<RawEntry> for StoryEntry {
    type Error = Error;

    fn try_from(raw: RawEntry) -> Result<Self> {
        let found = raw.sentences.len();
        let sentences: [String; STORY_LEN] = raw
            .sentences
            .try_into()
            .map_err(|_| Error::SentenceCount { found })?;
        StoryEntry::new(
            raw.entry_id,
            sentences,
            raw.selected_index,
            raw.dimension,
            raw.specific,
            raw.general,
        )
    }
}

impl StoryEntry {
    pub fn new(
        entry_id: impl Into<String>,
        sentences: [String; STORY_LEN],
        selected_index: usize,
        dimension: Dimension,
        specific: SpecificRule,
        general: SpecificRule,
    ) -> Result<Self> {
        let entry = Self {
            entry_id: entry_id.into(),
            sentences,
            selected_index,
            dimension,
            specific,
            general,
        };
        entry.validate().map_err(|e| e.in_entry(&entry.entry_id))?;
        Ok(entry)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.sentences.iter().position(|s| s.trim().is_empty()) {
            return Err(Error::InvalidEntry(format!("sentence {i} is empty")));
        }
        if self.selected_index >= STORY_LEN {
            return Err(Error::IndexOutOfRange {
                index: self.selected_index,
            });
        }
        self.specific.validate()?;
        self.general.validate()?;
        Ok(())
    }

    pub fn selected_text(&self) -> &str {
        &self.sentences[self.selected_index]
    }

    pub fn pre_context(&self) -> &[String] {
        &self.sentences[..self.selected_index]
    }

    pub fn post_context(&self) -> &[String] {
        &self.sentences[self.selected_index + 1..]
    }

    /// The story as a single whitespace-normalized string.
    pub fn story_text(&self) -> String {
        text::collapse_whitespace(&self.sentences.join(" "))
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("entries always serialize")
    }
}

/// Share of entries whose rule puts X on the side the dimension predicts,
/// judged by token F1 against X. `None` for an empty slice.
///
/// For dimensions 6-10 X should be statement 1, for 1-5 statement 2.
pub fn x_side_agreement_rate(entries: &[StoryEntry]) -> Option<f64> {
    if entries.is_empty() {
        return None;
    }
    let agree = entries
        .iter()
        .filter(|e| {
            let x = e.selected_text();
            let s1 = text::token_f1(&e.specific.statement_1, x);
            let s2 = text::token_f1(&e.specific.statement_2, x);
            if e.dimension.x_is_first() {
                s1 >= s2
            } else {
                s2 >= s1
            }
        })
        .count();
    Some(agree as f64 / entries.len() as f64)
}
