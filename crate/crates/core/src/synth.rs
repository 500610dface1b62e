//! Seeded synthetic corpora for tests, benchmarks and demos.
//!
//! Each story has one protagonist and five events with distinct verbs and
//! objects. The rule's non-X statement paraphrases one other story sentence,
//! so the conversion heuristic has a clear intended answer.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Dimension, RelationToken, SpecificRule, StoryEntry, STORY_LEN};

const NAMES: [&str; 12] = [
    "Fred", "Anna", "Tom", "Maria", "Kim", "Omar", "Lucy", "Ravi", "Jack", "Nina", "Ben", "Sofia",
];

// (past, present)
const VERBS: [(&str, &str); 16] = [
    ("found", "finds"),
    ("lost", "loses"),
    ("bought", "buys"),
    ("washed", "washes"),
    ("painted", "paints"),
    ("fixed", "fixes"),
    ("sold", "sells"),
    ("cooked", "cooks"),
    ("opened", "opens"),
    ("carried", "carries"),
    ("cleaned", "cleans"),
    ("hid", "hides"),
    ("borrowed", "borrows"),
    ("dropped", "drops"),
    ("wrapped", "wraps"),
    ("checked", "checks"),
];

const OBJECTS: [&str; 20] = [
    "bike", "lamp", "kettle", "garden", "letter", "ticket", "jacket", "window", "piano", "basket",
    "camera", "ladder", "blanket", "wallet", "mirror", "helmet", "notebook", "umbrella", "guitar",
    "bucket",
];

/// Connective used in synthetic rules for each dimension.
pub fn relation_for(dimension: Dimension) -> RelationToken {
    let surface = match dimension.get() {
        1 | 6 => ">Causes/Enables>",
        2 => ">Motivates>",
        3..=5 => ">Enables>",
        7 => ">Causes>",
        _ => ">Results in>",
    };
    RelationToken::new(surface).expect("well-formed")
}

/// A synthetic entry and the sentence index its rule was written from.
pub struct SyntheticEntry {
    pub entry: StoryEntry,
    pub intended_y: usize,
}

pub fn corpus_with_truth(n: usize, seed: u64) -> Vec<SyntheticEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|i| one(&mut rng, i)).collect()
}

pub fn corpus(n: usize, seed: u64) -> Vec<StoryEntry> {
    corpus_with_truth(n, seed)
        .into_iter()
        .map(|s| s.entry)
        .collect()
}

fn one(rng: &mut ChaCha8Rng, i: usize) -> SyntheticEntry {
    let name = *NAMES.choose(rng).expect("non-empty");
    let verbs: Vec<_> = VERBS.choose_multiple(rng, STORY_LEN).copied().collect();
    let objects: Vec<_> = OBJECTS.choose_multiple(rng, STORY_LEN).copied().collect();
    let sentences: [String; STORY_LEN] =
        std::array::from_fn(|k| format!("{name} {} the {}.", verbs[k].0, objects[k]));

    let x = rng.random_range(0..STORY_LEN);
    let y = loop {
        let y = rng.random_range(0..STORY_LEN);
        if y != x {
            break y;
        }
    };
    let dimension = Dimension::new(rng.random_range(1..=10)).expect("in range");
    let relation = relation_for(dimension);

    let specific_of = |k: usize| format!("{name} {} the {}", verbs[k].1, objects[k]);
    let general_of = |k: usize| format!("Someone_A {} Something_A", verbs[k].1);
    let (s1, s2) = if dimension.x_is_first() {
        (x, y)
    } else {
        (y, x)
    };
    let rule = |f: &dyn Fn(usize) -> String| {
        SpecificRule::new(f(s1), relation.clone(), f(s2)).expect("non-empty statements")
    };
    let entry = StoryEntry::new(
        format!("synth-{i:06}"),
        sentences,
        x,
        dimension,
        rule(&specific_of),
        rule(&general_of),
    )
    .expect("valid synthetic entry");
    SyntheticEntry {
        entry,
        intended_y: y,
    }
}

/// CSV with the default column names, one row per entry.
pub fn to_csv(entries: &[StoryEntry]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "entry_id",
        "story",
        "selected_sentence",
        "dimension",
        "specific_rule",
        "general_rule",
    ])
    .expect("in-memory write");
    for e in entries {
        w.write_record([
            e.entry_id.clone(),
            e.story_text(),
            e.selected_text().to_owned(),
            e.dimension.to_string(),
            e.specific.to_string(),
            e.general.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
