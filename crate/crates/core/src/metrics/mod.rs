//! Generation scoring (per-dimension BLEU) and label scoring (exact match).

pub mod bleu;
mod report;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cis2::{Cis2Label, Converter};
use crate::error::{Error, Result};
use crate::model::{Dimension, StoryEntry, STORY_LEN};
use crate::parallel;
use crate::tasks::{generation_target, RULE_SEPARATOR};

pub use bleu::{corpus_bleu, tokenize_13a, BleuStats};
pub use report::{format_generation_table, EvalReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RulePart {
    Specific,
    General,
}

impl std::str::FromStr for RulePart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "specific" => Ok(Self::Specific),
            "general" => Ok(Self::General),
            other => Err(Error::Config(format!("unknown rule part {other:?}"))),
        }
    }
}

/// Splits `specific ** general`. `None` when the separator is missing.
pub fn split_rule_output(text: &str) -> Option<(&str, &str)> {
    text.split_once(RULE_SEPARATOR)
}

fn select_part(text: &str, part: RulePart) -> (&str, bool) {
    match (split_rule_output(text), part) {
        (Some((s, _)), RulePart::Specific) => (s, true),
        (Some((_, g)), RulePart::General) => (g, true),
        (None, RulePart::Specific) => (text, false),
        (None, RulePart::General) => ("", false),
    }
}

/// Per-dimension corpus BLEU of `hypothesis` against each entry's gold
/// output, restricted to one half of the rule.
///
/// Hypotheses without ` ** ` count as all-specific and are tallied in
/// `unparseable_count`.
pub fn evaluate_generation<S: AsRef<str> + Sync>(
    samples: &[(StoryEntry, S)],
    part: RulePart,
) -> Result<EvalReport> {
    if samples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut groups: BTreeMap<Dimension, (Vec<&str>, Vec<String>)> = BTreeMap::new();
    let mut unparseable = 0;
    for (entry, hyp) in samples {
        let (hyp_part, ok) = select_part(hyp.as_ref(), part);
        if !ok {
            unparseable += 1;
        }
        let gold = generation_target(entry);
        let ref_part = select_part(&gold, part).0.to_owned();
        let group = groups.entry(entry.dimension).or_default();
        group.0.push(hyp_part);
        group.1.push(ref_part);
    }
    let groups: Vec<_> = groups.into_iter().collect();
    let scored = parallel::map_ordered(&groups, |(dim, (h, r))| {
        corpus_bleu(h, r).map(|s| (*dim, s, h.len()))
    });
    let scored = scored.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(EvalReport::from_groups(scored, unparseable))
}

fn check_lengths(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    if left == 0 {
        return Err(Error::EmptyCorpus);
    }
    Ok(())
}

/// Share of positions where the prediction equals the reference label.
/// `None` predictions (unparseable) never match.
pub fn exact_match_accuracy(
    predicted: &[Option<Cis2Label>],
    reference: &[Cis2Label],
) -> Result<f64> {
    check_lengths(predicted.len(), reference.len())?;
    let hits = predicted
        .iter()
        .zip(reference)
        .filter(|(p, r)| p.as_ref() == Some(*r))
        .count();
    Ok(hits as f64 / reference.len() as f64)
}

/// Exact-match accuracy broken down by dimension.
pub fn accuracy_report(
    predicted: &[Option<Cis2Label>],
    reference: &[Cis2Label],
    dimensions: &[Dimension],
) -> Result<EvalReport> {
    check_lengths(predicted.len(), reference.len())?;
    check_lengths(dimensions.len(), reference.len())?;
    let mut groups: BTreeMap<Dimension, (usize, usize)> = BTreeMap::new();
    for ((p, r), d) in predicted.iter().zip(reference).zip(dimensions) {
        let g = groups.entry(*d).or_default();
        g.1 += 1;
        if p.as_ref() == Some(r) {
            g.0 += 1;
        }
    }
    let unparseable = predicted.iter().filter(|p| p.is_none()).count();
    Ok(EvalReport::from_groups(
        groups
            .into_iter()
            .map(|(d, (hit, n))| (d, hit as f64 / n as f64, n)),
        unparseable,
    ))
}

/// Labels with Y drawn uniformly from the four non-X sentences; X's slot and
/// the relation follow `converter` exactly as for gold conversion.
pub fn random_baseline(
    entries: &[StoryEntry],
    seed: u64,
    converter: &Converter,
) -> Result<Vec<Cis2Label>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    entries
        .iter()
        .map(|e| {
            let others: Vec<usize> = (0..STORY_LEN).filter(|&i| i != e.selected_index).collect();
            let y = others[rng.random_range(0..others.len())];
            converter.assemble(e, &e.specific.relation, y)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RelationToken;
    use crate::similarity::SimilarityBackend;
    use crate::synth;

    fn label(a: usize, b: usize) -> Cis2Label {
        Cis2Label::new(a, RelationToken::causes_enables(), b).unwrap()
    }

    #[test]
    fn accuracy_examples() {
        let refs: Vec<_> = (0..8).map(|i| label(i % 5, (i + 1) % 5)).collect();
        let same: Vec<_> = refs.iter().cloned().map(Some).collect();
        assert_eq!(exact_match_accuracy(&same, &refs).unwrap(), 1.0);
        let mut half = same.clone();
        for p in half.iter_mut().take(4) {
            *p = Some(label(0, 4));
        }
        half[0] = Some(label(1, 4));
        assert_eq!(exact_match_accuracy(&half, &refs).unwrap(), 0.5);
        let mut one_bad: Vec<_> = same[..4].to_vec();
        one_bad[2] = None;
        assert_eq!(exact_match_accuracy(&one_bad, &refs[..4]).unwrap(), 0.75);
        assert!(matches!(
            exact_match_accuracy(&same[..3], &refs),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn accuracy_breakdown() {
        let refs = vec![label(0, 1), label(1, 2), label(2, 3)];
        let pred = vec![Some(label(0, 1)), None, Some(label(2, 3))];
        let dims = [1, 1, 7].map(|d| Dimension::new(d).unwrap());
        let r = accuracy_report(&pred, &refs, &dims).unwrap();
        assert_eq!(r.per_dimension[&1], 0.5);
        assert_eq!(r.per_dimension[&7], 1.0);
        assert!((r.avg_all.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.avg_1_5, Some(0.5));
        assert_eq!(r.avg_6_10, Some(1.0));
        assert_eq!(r.macro_avg, Some(0.75));
        assert_eq!(r.unparseable_count, 1);
    }

    #[test]
    fn generation_report() {
        let entries = synth::corpus(40, 3);
        let gold: Vec<_> = entries
            .iter()
            .map(|e| (e.clone(), generation_target(e)))
            .collect();
        let r = evaluate_generation(&gold, RulePart::Specific).unwrap();
        assert!(r.per_dimension.values().all(|s| (s - 100.0).abs() < 1e-9));
        assert_eq!(r.n_entries.values().sum::<usize>(), 40);
        assert_eq!(r.unparseable_count, 0);

        let no_sep: Vec<_> = entries
            .iter()
            .map(|e| (e.clone(), e.specific.to_string()))
            .collect();
        let r = evaluate_generation(&no_sep, RulePart::Specific).unwrap();
        assert_eq!(r.unparseable_count, 40);
        assert!(r.per_dimension.values().all(|s| (s - 100.0).abs() < 1e-9));
        let r = evaluate_generation(&no_sep, RulePart::General).unwrap();
        assert!(r.per_dimension.values().all(|s| *s == 0.0));
    }

    #[test]
    fn baseline_never_picks_x() {
        let entries = synth::corpus(500, 11);
        let conv = Converter::new(SimilarityBackend::TokenF1);
        let a = random_baseline(&entries, 5, &conv).unwrap();
        assert_eq!(a, random_baseline(&entries, 5, &conv).unwrap());
        assert_ne!(a, random_baseline(&entries, 6, &conv).unwrap());
        for (e, l) in entries.iter().zip(&a) {
            let x = e.selected_index;
            let (xs, y) = if e.dimension.x_is_first() {
                (l.a, l.b)
            } else {
                (l.b, l.a)
            };
            assert_eq!(xs, x);
            assert_ne!(y, x);
        }
    }
}
