//! Text normalization shared by sentence matching and the similarity backends.
//!
//! Normalized form: lowercase, ASCII punctuation removed, whitespace runs
//! collapsed to a single space, no leading or trailing space.

use std::collections::HashMap;

pub fn normalize(text: &str) -> String {
    let lowered: String = text
        .chars()
        .filter(|c| !c.is_ascii_punctuation())
        .flat_map(char::to_lowercase)
        .collect();
    collapse_whitespace(&lowered)
}

pub fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn tokens(text: &str) -> Vec<String> {
    normalize(text)
        .split(' ')
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

pub(crate) fn bag<'a, I: IntoIterator<Item = &'a str>>(tokens: I) -> HashMap<&'a str, usize> {
    let mut counts = HashMap::new();
    for t in tokens {
        *counts.entry(t).or_insert(0) += 1;
    }
    counts
}

/// Unigram F1 over normalized token multisets.
///
/// Two token-less strings score 1.0; a token-less string against a non-empty one scores 0.0.
pub fn token_f1(a: &str, b: &str) -> f64 {
    let ta = tokens(a);
    let tb = tokens(b);
    token_f1_tokens(&ta, &tb)
}

pub(crate) fn token_f1_tokens(ta: &[String], tb: &[String]) -> f64 {
    if ta.is_empty() || tb.is_empty() {
        return if ta.is_empty() && tb.is_empty() {
            1.0
        } else {
            0.0
        };
    }
    let ca = bag(ta.iter().map(String::as_str));
    let cb = bag(tb.iter().map(String::as_str));
    let overlap: usize = ca
        .iter()
        .map(|(t, n)| cb.get(t).map_or(0, |m| (*n).min(*m)))
        .sum();
    if overlap == 0 {
        return 0.0;
    }
    // 2PR/(P+R) reduces to 2*overlap/(|a|+|b|)
    2.0 * overlap as f64 / (ta.len() + tb.len()) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Fred misses  his bus. "), "fred misses his bus");
        assert_eq!(
            normalize("He went to his mom's room!"),
            "he went to his moms room"
        );
        assert_eq!(normalize("..."), "");
    }

    #[test]
    fn f1_values() {
        assert_eq!(token_f1("fred misses his bus", "Fred misses his bus."), 1.0);
        assert_eq!(token_f1("a b c d", "a b x y"), 0.5);
        assert_eq!(token_f1("a", "b"), 0.0);
        assert_eq!(token_f1("!!", "?"), 1.0);
        assert_eq!(token_f1("!!", "a"), 0.0);
        // multiset clipping: one shared "a"
        assert!((token_f1("a a", "a b") - 0.5).abs() < 1e-12);
    }
}
