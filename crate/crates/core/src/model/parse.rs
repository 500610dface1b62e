use std::collections::HashMap;

use super::{
    ColumnMap, Dimension, RelationToken, RelationVocabulary, SpecificRule, StoryEntry, STORY_LEN,
};
use crate::error::{Error, Result};
use crate::text;

/// Minimum token F1 for a fuzzy match of the selected sentence.
pub const DEFAULT_MATCH_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone)]
pub struct ParseOptions {
    pub vocabulary: RelationVocabulary,
    pub match_threshold: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            vocabulary: RelationVocabulary::default(),
            match_threshold: DEFAULT_MATCH_THRESHOLD,
        }
    }
}

fn ends_sentence(word: &str) -> bool {
    let core = word.trim_end_matches(['"', '\'', '\u{201d}', '\u{2019}', ')']);
    core.ends_with(['.', '!', '?'])
}

/// Splits a story into its five sentences.
///
/// Whitespace is collapsed first; a sentence ends at `.`, `!` or `?`
/// (optionally followed by closing quotes or a bracket) before whitespace.
pub fn split_story_into_sentences(story_text: &str) -> Result<[String; STORY_LEN]> {
    let mut sentences = Vec::with_capacity(STORY_LEN);
    let mut current: Vec<&str> = Vec::new();
    for word in story_text.split_whitespace() {
        current.push(word);
        if ends_sentence(word) {
            sentences.push(current.join(" "));
            current.clear();
        }
    }
    if !current.is_empty() {
        sentences.push(current.join(" "));
    }
    let found = sentences.len();
    sentences
        .try_into()
        .map_err(|_| Error::SentenceCount { found })
}

/// Splits `statement_1 REL statement_2` on the leftmost vocabulary connective.
pub fn parse_specific_rule(
    rule_text: &str,
    vocabulary: &RelationVocabulary,
) -> Result<SpecificRule> {
    // (start, end, token) for every occurrence of every connective
    let mut hits: Vec<(usize, usize, &RelationToken)> = Vec::new();
    for token in vocabulary.tokens() {
        for (start, m) in rule_text.match_indices(token.as_str()) {
            hits.push((start, start + m.len(), token));
        }
    }
    // a hit nested inside a longer hit is part of that connective
    let mut maximal: Vec<_> = hits
        .iter()
        .filter(|(s, e, _)| {
            !hits
                .iter()
                .any(|(s2, e2, _)| s2 <= s && e <= e2 && (e2 - s2) > (e - s))
        })
        .copied()
        .collect();

    maximal.sort_by_key(|(s, _, _)| *s);

    let Some(&(start, end, relation)) = maximal.first() else {
        return Err(Error::NoRelation {
            rule: rule_text.to_owned(),
        });
    };
    if let Some((_, _, other)) = maximal.iter().find(|(_, _, t)| *t != relation) {
        return Err(Error::AmbiguousRelation {
            rule: rule_text.to_owned(),
            first: relation.to_string(),
            second: other.to_string(),
        });
    }
    SpecificRule::new(
        rule_text[..start].trim(),
        relation.clone(),
        rule_text[end..].trim(),
    )
}

/// Finds X in the story: exact match on normalized text, else the best
/// token-F1 candidate at or above `threshold` (lowest index on ties).
pub fn locate_selected_sentence(
    sentences: &[String],
    selected_text: &str,
    threshold: f64,
) -> Result<usize> {
    let target = text::normalize(selected_text);
    if let Some(i) = sentences.iter().position(|s| text::normalize(s) == target) {
        return Ok(i);
    }
    let target_tokens = text::tokens(selected_text);
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in sentences.iter().enumerate() {
        let score = text::token_f1_tokens(&text::tokens(s), &target_tokens);
        if best.is_none_or(|(_, b)| score > b) {
            best = Some((i, score));
        }
    }
    match best {
        Some((i, score)) if score >= threshold => Ok(i),
        other => Err(Error::SelectedSentenceNotFound {
            selected: selected_text.to_owned(),
            best: other.map_or(0.0, |(_, s)| s),
        }),
    }
}

/// Builds a validated entry from one source row, given which columns hold which field.
pub fn parse_glucose_record(
    row: &HashMap<String, String>,
    columns: &ColumnMap,
    options: &ParseOptions,
) -> Result<StoryEntry> {
    let field = |name: &str| -> Result<&str> {
        row.get(name)
            .map(String::as_str)
            .ok_or_else(|| Error::MissingColumn {
                column: name.to_owned(),
            })
    };
    let entry_id = field(&columns.entry_id)?.trim().to_owned();
    let inner = || -> Result<StoryEntry> {
        let dimension = Dimension::parse(field(&columns.dimension)?)?;
        let sentences = split_story_into_sentences(field(&columns.story)?)?;
        let selected_index = locate_selected_sentence(
            &sentences,
            field(&columns.selected_sentence)?,
            options.match_threshold,
        )?;
        let specific = parse_specific_rule(field(&columns.specific_rule)?, &options.vocabulary)?;
        let general = parse_specific_rule(field(&columns.general_rule)?, &options.vocabulary)?;
        StoryEntry::new(
            entry_id.clone(),
            sentences,
            selected_index,
            dimension,
            specific,
            general,
        )
    };
    inner().map_err(|e| e.in_entry(&entry_id))
}

#[cfg(test)]
mod tests {
    use super::*;

    const FRED: &str =
        "Fred woke up late. He just missed his bus. He then went to his mom's room. \
                        His mom then drives him   to school. He makes it to first class on time.";

    #[test]
    fn splits_the_fred_story() {
        let s = split_story_into_sentences(FRED).unwrap();
        assert_eq!(s[0], "Fred woke up late.");
        assert_eq!(s[3], "His mom then drives him to school.");
        assert_eq!(s.join(" "), text::collapse_whitespace(FRED));
    }

    #[test]
    fn split_edge_cases() {
        assert_eq!(
            split_story_into_sentences("A. B. C. D. E.").unwrap(),
            ["A.", "B.", "C.", "D.", "E."]
        );
        assert!(matches!(
            split_story_into_sentences("One sentence only."),
            Err(Error::SentenceCount { found: 1 })
        ));
        assert!(matches!(
            split_story_into_sentences("   "),
            Err(Error::SentenceCount { found: 0 })
        ));
        assert_eq!(
            split_story_into_sentences("He said \"Go!\" Then A. B? C! D")
                .unwrap()
                .to_vec(),
            ["He said \"Go!\"", "Then A.", "B?", "C!", "D"]
        );
        // decimal point is not followed by whitespace
        assert!(split_story_into_sentences("It was 3.5 miles. B. C. D. E.").is_ok());
    }

    #[test]
    fn rule_parsing() {
        let vocab = RelationVocabulary::default();
        let r = parse_specific_rule(
            "Fred wakes up late >Causes/Enables> Fred misses his bus",
            &vocab,
        )
        .unwrap();
        assert_eq!(r.statement_1, "Fred wakes up late");
        assert_eq!(r.relation.as_str(), ">Causes/Enables>");
        assert_eq!(r.statement_2, "Fred misses his bus");

        let r = parse_specific_rule("A >Causes/Enables> B", &vocab).unwrap();
        assert_eq!((r.statement_1.as_str(), r.statement_2.as_str()), ("A", "B"));

        assert!(matches!(
            parse_specific_rule("A causes B", &vocab),
            Err(Error::NoRelation { .. })
        ));
        assert!(matches!(
            parse_specific_rule("", &vocab),
            Err(Error::NoRelation { .. })
        ));
        match parse_specific_rule("A >Motivates> B >Enables> C", &vocab) {
            Err(Error::AmbiguousRelation { first, second, .. }) => {
                assert_eq!(first, ">Motivates>");
                assert_eq!(second, ">Enables>");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_specific_rule(">Causes> B", &vocab),
            Err(Error::EmptyStatement { .. })
        ));
        let r = parse_specific_rule("A >Causes> B >Causes> C", &vocab).unwrap();
        assert_eq!(r.statement_2, "B >Causes> C");
    }

    #[test]
    fn nested_connectives_are_not_ambiguous() {
        let vocab = RelationVocabulary::new([
            RelationToken::new(">Causes/Enables>").unwrap(),
            RelationToken::new(">Causes/E>").unwrap(),
        ]);
        assert!(parse_specific_rule("a >Causes/Enables> b", &vocab).is_ok());
    }

    #[test]
    fn locating_x() {
        let s = split_story_into_sentences(FRED).unwrap();
        assert_eq!(
            locate_selected_sentence(&s, "Fred woke up late.", 0.8).unwrap(),
            0
        );
        let abc: Vec<String> = ["a.", "b.", "c.", "d.", "e."].map(String::from).to_vec();
        assert_eq!(locate_selected_sentence(&abc, "C.", 0.8).unwrap(), 2);
        assert!(matches!(
            locate_selected_sentence(&s, "Nothing matches here at all.", 0.8),
            Err(Error::SelectedSentenceNotFound { .. })
        ));
        // one dropped word out of seven: F1 = 12/13
        assert_eq!(
            locate_selected_sentence(&s, "He then went to his mom room.", 0.8).unwrap(),
            2
        );
    }

    fn row(pairs: &[(&str, &str)]) -> HashMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    fn fred_row(dimension: &str, specific: &str) -> HashMap<String, String> {
        row(&[
            ("entry_id", "fred-1"),
            ("story", FRED),
            ("selected_sentence", "Fred woke up late."),
            ("dimension", dimension),
            ("specific_rule", specific),
            (
                "general_rule",
                "Someone_A wakes up late >Causes/Enables> Someone_A misses Something_A",
            ),
        ])
    }

    #[test]
    fn record_parsing() {
        let cols = ColumnMap::default();
        let opts = ParseOptions::default();
        let e = parse_glucose_record(
            &fred_row(
                "6",
                "Fred wakes up late >Causes/Enables> Fred misses his bus",
            ),
            &cols,
            &opts,
        )
        .unwrap();
        assert_eq!(e.selected_index, 0);
        assert_eq!(e.dimension.get(), 6);
        assert_eq!(e.specific.statement_2, "Fred misses his bus");

        let err = parse_glucose_record(&fred_row("11", "a >Causes> b"), &cols, &opts).unwrap_err();
        assert!(matches!(err.root(), Error::DimensionRange { .. }));

        let err = parse_glucose_record(&fred_row("6", "a causes b"), &cols, &opts).unwrap_err();
        match &err {
            Error::Entry { entry_id, source } => {
                assert_eq!(entry_id, "fred-1");
                assert!(matches!(**source, Error::NoRelation { .. }));
            }
            other => panic!("{other:?}"),
        }

        let mut missing = fred_row("6", "a >Causes> b");
        missing.remove("story");
        assert!(matches!(
            parse_glucose_record(&missing, &cols, &opts)
                .unwrap_err()
                .root(),
            Error::MissingColumn { .. }
        ));
    }
}
