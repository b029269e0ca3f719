use std::collections::HashSet;
use std::sync::OnceLock;

use crate::registry::Language;

/// Lowercase terms extracted from one free-text value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub language: Language,
}

fn stopwords(language: Language) -> &'static HashSet<&'static str> {
    static ENGLISH: OnceLock<HashSet<&'static str>> = OnceLock::new();
    static GERMAN: OnceLock<HashSet<&'static str>> = OnceLock::new();
    let (cell, list) = match language {
        Language::English => (&ENGLISH, include_str!("stopwords/english.txt")),
        Language::German => (&GERMAN, include_str!("stopwords/german.txt")),
    };
    cell.get_or_init(|| list.lines().map(str::trim).filter(|w| !w.is_empty()).collect())
}

pub fn is_stopword(term: &str, language: Language) -> bool {
    stopwords(language).contains(term)
}

/// Simple (single code point) lowercase mapping.
fn lower(ch: char) -> char {
    // U+0130 is the only code point whose full lowercase mapping is longer
    // than one char; its simple mapping is plain `i`.
    if ch == '\u{130}' {
        return 'i';
    }
    let mut it = ch.to_lowercase();
    match (it.next(), it.next()) {
        (Some(c), None) => c,
        _ => ch,
    }
}

/// Splits on non-alphanumeric boundaries, lowercases, and drops stopwords
/// and single-character tokens.
pub fn tokenize(text: &str, language: Language) -> TokenStream {
    let stop = stopwords(language);
    let tokens = text
        .split(|c: char| !c.is_alphanumeric())
        .filter(|raw| raw.chars().nth(1).is_some())
        .map(|raw| raw.chars().map(lower).collect::<String>())
        .filter(|term| !stop.contains(term.as_str()))
        .collect();
    TokenStream { tokens, language }
}
