//! Renders entries into the five task formats and applies the drop rules.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cis2::Converter;
use crate::error::{Error, Result};
use crate::model::{StoryEntry, STORY_LEN};
use crate::parallel;
use crate::text::collapse_whitespace;

pub const MASK_TOKEN: &str = "<masked>";
pub const RULE_SEPARATOR: &str = " ** ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Original,
    History,
    MaskX,
    HistoryX,
    Cis2,
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::Original,
        TaskKind::History,
        TaskKind::MaskX,
        TaskKind::HistoryX,
        TaskKind::Cis2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Original => "original",
            TaskKind::History => "history",
            TaskKind::MaskX => "mask-x",
            TaskKind::HistoryX => "history-x",
            TaskKind::Cis2 => "cis2",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TaskKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown task {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSample {
    pub entry_id: String,
    pub task: TaskKind,
    pub input_text: String,
    pub target_text: String,
    pub dimension: u8,
}

impl TaskSample {
    /// `input<TAB>target`, with tabs and newlines inside fields turned into spaces.
    pub fn to_tsv(&self) -> String {
        let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
        format!("{}\t{}", clean(&self.input_text), clean(&self.target_text))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// History+X input would equal the original input.
    XIsLast,
    ConversionError,
    RenderError,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DropReport {
    pub counts: BTreeMap<DropReason, usize>,
    /// (entry id, message) for entries dropped because of an error.
    pub errors: Vec<(String, String)>,
}

impl DropReport {
    pub fn count(&self, reason: DropReason) -> usize {
        self.counts.get(&reason).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    fn record(&mut self, reason: DropReason) {
        *self.counts.entry(reason).or_insert(0) += 1;
    }
}

enum Rendered {
    Sample(TaskSample),
    Dropped(DropReason, Option<String>),
}

#[derive(Debug, Clone)]
pub struct TaskBuilder {
    pub converter: Converter,
    /// Prefix Mask X inputs with the dimension like every other task.
    pub mask_dimension_prefix: bool,
}

impl TaskBuilder {
    pub fn new(converter: Converter) -> Self {
        Self {
            converter,
            mask_dimension_prefix: true,
        }
    }

    pub fn render_input(&self, entry: &StoryEntry, task: TaskKind) -> String {
        let x = entry.selected_index;
        let marked = || format!("* {} *", collapse_whitespace(entry.selected_text()));
        let plain = |range: std::ops::Range<usize>| {
            entry.sentences[range]
                .iter()
                .map(|s| collapse_whitespace(s))
                .collect::<Vec<_>>()
        };
        let parts: Vec<String> = match task {
            TaskKind::Original | TaskKind::Cis2 => {
                let mut p = plain(0..x);
                p.push(marked());
                p.extend(plain(x + 1..STORY_LEN));
                p
            }
            TaskKind::History => plain(0..x),
            TaskKind::HistoryX => {
                let mut p = plain(0..x);
                p.push(marked());
                p
            }
            TaskKind::MaskX => {
                let mut p = plain(0..x);
                p.push(MASK_TOKEN.to_owned());
                p.extend(plain(x + 1..STORY_LEN));
                p
            }
        };
        let body = parts.join(" ");
        if task == TaskKind::MaskX && !self.mask_dimension_prefix {
            return body;
        }
        if body.is_empty() {
            format!("{}:", entry.dimension)
        } else {
            format!("{}: {}", entry.dimension, body)
        }
    }

    pub fn render_target(&self, entry: &StoryEntry, task: TaskKind) -> Result<String> {
        match task {
            TaskKind::Cis2 => Ok(self.converter.convert_gold_entry(entry)?.label.to_string()),
            _ => Ok(generation_target(entry)),
        }
    }

    fn render(&self, entry: &StoryEntry, task: TaskKind) -> Rendered {
        if task == TaskKind::HistoryX && entry.selected_index == STORY_LEN - 1 {
            return Rendered::Dropped(DropReason::XIsLast, None);
        }
        let target_text = match self.render_target(entry, task) {
            Ok(t) => t,
            Err(e) => {
                let reason = if task == TaskKind::Cis2 {
                    DropReason::ConversionError
                } else {
                    DropReason::RenderError
                };
                return Rendered::Dropped(reason, Some(e.to_string()));
            }
        };
        if task != TaskKind::Cis2 && target_text.matches(RULE_SEPARATOR).count() != 1 {
            return Rendered::Dropped(
                DropReason::RenderError,
                Some(format!(
                    "entry {}: target must contain exactly one {RULE_SEPARATOR:?}",
                    entry.entry_id
                )),
            );
        }
        Rendered::Sample(TaskSample {
            entry_id: entry.entry_id.clone(),
            task,
            input_text: self.render_input(entry, task),
            target_text,
            dimension: entry.dimension.get(),
        })
    }

    /// Renders every entry, in input order. Dropped entries and per-entry
    /// failures are counted in the report rather than aborting the run.
    pub fn build_dataset(
        &self,
        entries: &[StoryEntry],
        task: TaskKind,
    ) -> (Vec<TaskSample>, DropReport) {
        let rendered = parallel::map_ordered(entries, |e| self.render(e, task));
        let mut samples = Vec::with_capacity(entries.len());
        let mut report = DropReport::default();
        for (entry, r) in entries.iter().zip(rendered) {
            match r {
                Rendered::Sample(s) => samples.push(s),
                Rendered::Dropped(reason, message) => {
                    report.record(reason);
                    if let Some(m) = message {
                        report.errors.push((entry.entry_id.clone(), m));
                    }
                }
            }
        }
        (samples, report)
    }
}

/// `specific ** general`, the output shared by every generation task.
pub fn generation_target(entry: &StoryEntry) -> String {
    format!("{}{RULE_SEPARATOR}{}", entry.specific, entry.general)
}

/// Shuffles indices `0..n` with `seed` and returns (train, dev), each sorted.
/// The dev side gets `round(n * dev_fraction)` items.
pub fn seeded_split(n: usize, dev_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let dev_n = ((n as f64) * dev_fraction.clamp(0.0, 1.0)).round() as usize;
    let mut dev = idx[..dev_n].to_vec();
    let mut train = idx[dev_n..].to_vec();
    dev.sort_unstable();
    train.sort_unstable();
    (train, dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dimension, RelationToken, SpecificRule};
    use crate::similarity::SimilarityBackend;

    fn tools_entry() -> StoryEntry {
        let rel = RelationToken::causes_enables();
        StoryEntry::new(
            "tools",
            [
                "My mother told me to fix the car.",
                "I was unable to do this right away.",
                "I could not find my tools.",
                "I looked everywhere for them.",
                "It turns out they were stolen the night before.",
            ]
            .map(String::from),
            2,
            Dimension::new(1).unwrap(),
            SpecificRule::new(
                "They were stolen the night before",
                rel.clone(),
                "I could not find my tools",
            )
            .unwrap(),
            SpecificRule::new(
                "Something_A is stolen",
                rel,
                "Someone_A cannot find Something_A",
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn builder() -> TaskBuilder {
        TaskBuilder::new(Converter::new(SimilarityBackend::TokenF1))
    }

    #[test]
    fn renders_tools_inputs() {
        let e = tools_entry();
        let b = builder();
        assert_eq!(
            b.render_input(&e, TaskKind::Original),
            "1: My mother told me to fix the car. I was unable to do this right away. \
             * I could not find my tools. * I looked everywhere for them. \
             It turns out they were stolen the night before."
        );
        assert_eq!(
            b.render_input(&e, TaskKind::MaskX),
            "1: My mother told me to fix the car. I was unable to do this right away. \
             <masked> I looked everywhere for them. It turns out they were stolen the night before."
        );
        assert_eq!(
            b.render_input(&e, TaskKind::History),
            "1: My mother told me to fix the car. I was unable to do this right away."
        );
        assert_eq!(
            b.render_input(&e, TaskKind::HistoryX),
            "1: My mother told me to fix the car. I was unable to do this right away. \
             * I could not find my tools. *"
        );
        assert_eq!(
            b.render_input(&e, TaskKind::Cis2),
            b.render_input(&e, TaskKind::Original)
        );
        let mut no_prefix = b.clone();
        no_prefix.mask_dimension_prefix = false;
        assert!(no_prefix
            .render_input(&e, TaskKind::MaskX)
            .starts_with("My mother told me"));
    }

    #[test]
    fn renders_tools_targets() {
        let e = tools_entry();
        let b = builder();
        assert_eq!(
            b.render_target(&e, TaskKind::Original).unwrap(),
            "They were stolen the night before >Causes/Enables> I could not find my tools ** \
             Something_A is stolen >Causes/Enables> Someone_A cannot find Something_A"
        );
        assert_eq!(
            b.render_target(&e, TaskKind::Cis2).unwrap(),
            "<s_4> >Causes/Enables> <s_2>"
        );
    }

    #[test]
    fn history_with_x_first_is_just_the_prefix() {
        let mut e = tools_entry();
        e.selected_index = 0;
        assert_eq!(builder().render_input(&e, TaskKind::History), "1:");
    }

    #[test]
    fn x_last_dropped_only_for_history_x() {
        let mut e = tools_entry();
        e.selected_index = 4;
        let entries = vec![tools_entry(), e];
        let b = builder();
        let (s, r) = b.build_dataset(&entries, TaskKind::HistoryX);
        assert_eq!(s.len(), 1);
        assert_eq!(r.count(DropReason::XIsLast), 1);
        let (s, r) = b.build_dataset(&entries, TaskKind::Original);
        assert_eq!(s.len(), 2);
        assert_eq!(r, DropReport::default());
    }

    #[test]
    fn failed_conversion_is_counted() {
        let e = tools_entry();
        let mut b = builder();
        b.converter.options.min_similarity = Some(1.1);
        let (s, r) = b.build_dataset(&[e], TaskKind::Cis2);
        assert!(s.is_empty());
        assert_eq!(r.count(DropReason::ConversionError), 1);
        assert_eq!(r.errors.len(), 1);
    }

    #[test]
    fn task_names_round_trip() {
        for k in TaskKind::ALL {
            assert_eq!(k.as_str().parse::<TaskKind>().unwrap(), k);
            assert_eq!(
                serde_json::to_string(&k).unwrap(),
                format!("\"{}\"", k.as_str())
            );
        }
        assert!("history_x".parse::<TaskKind>().is_err());
    }

    #[test]
    fn split_is_seeded_and_partitions() {
        let (t1, d1) = seeded_split(100, 0.1, 7);
        let (t2, d2) = seeded_split(100, 0.1, 7);
        assert_eq!((&t1, &d1), (&t2, &d2));
        assert_eq!(d1.len(), 10);
        let mut all: Vec<usize> = t1.iter().chain(&d1).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_ne!(seeded_split(100, 0.1, 8).1, d1);
    }
}
