use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::model::Dimension;

/// Scores per dimension plus grouped averages.
///
/// `avg_all`, `avg_1_5` and `avg_6_10` weight each dimension by its entry
/// count; `macro_avg` is the unweighted mean over the dimensions present.
/// Averages over a group with no entries are `None`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct EvalReport {
    pub per_dimension: BTreeMap<u8, f64>,
    pub n_entries: BTreeMap<u8, usize>,
    pub avg_all: Option<f64>,
    pub avg_1_5: Option<f64>,
    pub avg_6_10: Option<f64>,
    pub macro_avg: Option<f64>,
    pub unparseable_count: usize,
}

fn weighted<'a>(items: impl Iterator<Item = (&'a f64, &'a usize)>) -> Option<f64> {
    let (num, den) = items.fold((0.0, 0usize), |(num, den), (s, n)| {
        (num + s * *n as f64, den + n)
    });
    (den > 0).then(|| num / den as f64)
}

impl EvalReport {
    pub fn from_groups(
        groups: impl IntoIterator<Item = (Dimension, f64, usize)>,
        unparseable_count: usize,
    ) -> Self {
        let mut report = EvalReport {
            unparseable_count,
            ..Default::default()
        };
        for (dim, score, n) in groups {
            if n == 0 {
                continue;
            }
            report.per_dimension.insert(dim.get(), score);
            report.n_entries.insert(dim.get(), n);
        }
        let avg = |range: std::ops::RangeInclusive<u8>| {
            weighted(
                report
                    .per_dimension
                    .iter()
                    .filter(|(d, _)| range.contains(d))
                    .map(|(d, s)| (s, &report.n_entries[d])),
            )
        };
        report.avg_all = avg(1..=10);
        report.avg_1_5 = avg(1..=5);
        report.avg_6_10 = avg(6..=10);
        report.macro_avg = (!report.per_dimension.is_empty()).then(|| {
            report.per_dimension.values().sum::<f64>() / report.per_dimension.len() as f64
        });
        report
    }

    pub fn total_entries(&self) -> usize {
        self.n_entries.values().sum()
    }

    /// One line per dimension followed by the aggregates.
    pub fn to_text(&self, title: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{title}");
        let _ = writeln!(out, "{:>9} {:>9} {:>7}", "dimension", "score", "n");
        for (d, s) in &self.per_dimension {
            let _ = writeln!(out, "{d:>9} {s:>9.2} {:>7}", self.n_entries[d]);
        }
        for (name, v) in [
            ("all", self.avg_all),
            ("1-5", self.avg_1_5),
            ("6-10", self.avg_6_10),
            ("macro", self.macro_avg),
        ] {
            let _ = writeln!(out, "{name:>9} {:>9} {:>7}", fmt_opt(v), "");
        }
        let _ = writeln!(out, "unparseable: {}", self.unparseable_count);
        out
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.2}"))
}

/// Aligned table with one row per run:
/// `spec  spec1-5  spec6-10  gen  gen1-5  gen6-10`.
pub fn format_generation_table(rows: &[(String, EvalReport, EvalReport)]) -> String {
    let name_w = rows
        .iter()
        .map(|(n, _, _)| n.len())
        .max()
        .unwrap_or(0)
        .max(4);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<name_w$} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
        "task", "spec", "spec1-5", "spec6-10", "gen", "gen1-5", "gen6-10"
    );
    for (name, spec, general) in rows {
        let _ = writeln!(
            out,
            "{:<name_w$} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}",
            name,
            fmt_opt(spec.avg_all),
            fmt_opt(spec.avg_1_5),
            fmt_opt(spec.avg_6_10),
            fmt_opt(general.avg_all),
            fmt_opt(general.avg_1_5),
            fmt_opt(general.avg_6_10),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(x: u8) -> Dimension {
        Dimension::new(x).unwrap()
    }

    #[test]
    fn weighted_aggregates() {
        let r = EvalReport::from_groups([(d(1), 50.0, 1), (d(2), 80.0, 3), (d(6), 10.0, 2)], 0);
        assert_eq!(r.avg_1_5, Some(72.5));
        assert_eq!(r.avg_6_10, Some(10.0));
        assert!((r.avg_all.unwrap() - (50.0 + 240.0 + 20.0) / 6.0).abs() < 1e-12);
        assert!((r.macro_avg.unwrap() - 140.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn empty_groups_are_absent() {
        let r = EvalReport::from_groups([(d(3), 40.0, 2), (d(8), 99.0, 0)], 0);
        assert!(!r.per_dimension.contains_key(&8));
        assert_eq!(r.avg_6_10, None);
        assert_eq!(r.avg_all, Some(40.0));
    }

    #[test]
    fn table_layout() {
        let spec = EvalReport::from_groups([(d(1), 70.7, 1), (d(6), 60.0, 1)], 0);
        let gen = EvalReport::from_groups([(d(1), 50.0, 1)], 0);
        let t = format_generation_table(&[("original".into(), spec, gen)]);
        let lines: Vec<_> = t.lines().collect();
        assert_eq!(
            lines[0],
            "task         spec  spec1-5 spec6-10      gen   gen1-5  gen6-10"
        );
        assert_eq!(
            lines[1],
            "original    65.35    70.70    60.00    50.00    50.00        -"
        );
    }
}
