use std::collections::HashMap;
use std::io::Read;

use super::{parse_glucose_record, ParseOptions, StoryEntry};
use crate::error::{Error, Result};
use crate::parallel;

/// Which source column holds each entry field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub entry_id: String,
    pub story: String,
    pub selected_sentence: String,
    pub dimension: String,
    pub specific_rule: String,
    pub general_rule: String,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            entry_id: "entry_id".into(),
            story: "story".into(),
            selected_sentence: "selected_sentence".into(),
            dimension: "dimension".into(),
            specific_rule: "specific_rule".into(),
            general_rule: "general_rule".into(),
        }
    }
}

impl ColumnMap {
    /// Overrides defaults from `field=column` pairs.
    pub fn with_pairs<K, V>(mut self, pairs: impl IntoIterator<Item = (K, V)>) -> Result<Self>
    where
        K: AsRef<str>,
        V: Into<String>,
    {
        for (key, column) in pairs {
            let slot = match key.as_ref() {
                "entry_id" => &mut self.entry_id,
                "story" => &mut self.story,
                "selected_sentence" => &mut self.selected_sentence,
                "dimension" => &mut self.dimension,
                "specific_rule" => &mut self.specific_rule,
                "general_rule" => &mut self.general_rule,
                other => return Err(Error::Config(format!("unknown column field {other:?}"))),
            };
            *slot = column.into();
        }
        Ok(self)
    }
}

#[derive(Debug, Default)]
pub struct ImportOutcome {
    pub entries: Vec<StoryEntry>,
    /// (1-based data row, error) for every row that failed to parse.
    pub errors: Vec<(usize, Error)>,
    pub rows: usize,
}

/// Reads a headed CSV and parses every row. Rows that fail are reported in
/// [`ImportOutcome::errors`]; entries keep input order.
///
/// Without an id column in the header, ids are `row-<n>`.
pub fn import_csv<R: Read>(
    reader: R,
    columns: &ColumnMap,
    options: &ParseOptions,
) -> Result<ImportOutcome> {
    let mut csv = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(reader);
    let headers = csv.headers()?.clone();
    let synth_ids = !headers.iter().any(|h| h == columns.entry_id);

    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let mut row: HashMap<String, String> = headers
            .iter()
            .zip(record.iter())
            .map(|(h, v)| (h.to_owned(), v.to_owned()))
            .collect();
        if synth_ids {
            row.insert(columns.entry_id.clone(), format!("row-{}", i + 1));
        }
        rows.push(row);
    }

    let parsed = parallel::map_ordered(&rows, |row| parse_glucose_record(row, columns, options));
    let mut outcome = ImportOutcome {
        rows: rows.len(),
        ..Default::default()
    };
    for (i, result) in parsed.into_iter().enumerate() {
        match result {
            Ok(entry) => outcome.entries.push(entry),
            Err(e) => outcome.errors.push((i + 1, e)),
        }
    }
    Ok(outcome)
}
