//! Text normalization shared by signatures, the matcher and the mocks.

use alloc::string::String;
use alloc::vec::Vec;

/// Lowercase, trim, and collapse internal whitespace runs to a single `_`.
pub fn normalize_token(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for (i, part) in raw.split_whitespace().enumerate() {
        if i > 0 {
            out.push('_');
        }
        for c in part.chars() {
            out.extend(c.to_lowercase());
        }
    }
    out
}

/// Uppercase, trim, and collapse internal whitespace runs to a single `_`.
pub fn normalize_table(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for (i, part) in raw.split_whitespace().enumerate() {
        if i > 0 {
            out.push('_');
        }
        for c in part.chars() {
            out.extend(c.to_uppercase());
        }
    }
    out
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '_'
}

/// A word of the input with its original spelling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word<'a> {
    pub text: &'a str,
    pub lower: String,
}

/// Split text into words. Word characters are alphanumerics, `-` and `_`;
/// leading and trailing hyphens are trimmed so `Plant-A?` yields `Plant-A`.
pub fn words(text: &str) -> Vec<Word<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in text.char_indices() {
        match (is_word_char(c), start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                push_word(&mut out, &text[s..i]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        push_word(&mut out, &text[s..]);
    }
    out
}

fn push_word<'a>(out: &mut Vec<Word<'a>>, raw: &'a str) {
    let trimmed = raw.trim_matches(|c| c == '-' || c == '_');
    if !trimmed.is_empty() {
        out.push(Word {
            text: trimmed,
            lower: trimmed.to_lowercase(),
        });
    }
}

/// Lowercased words joined by single spaces; punctuation dropped.
pub fn normalize_text(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for (i, w) in words(text).iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&w.lower);
    }
    out
}

/// Whether `phrase` occurs as a contiguous word sequence in `haystack`
/// (both compared lowercase, on word boundaries).
pub fn contains_phrase(haystack: &[Word<'_>], phrase: &str) -> bool {
    let needle: Vec<String> = words(phrase).into_iter().map(|w| w.lower).collect();
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack
        .windows(needle.len())
        .any(|win| win.iter().zip(&needle).all(|(w, n)| &w.lower == n))
}

/// Replace whole-word occurrences of `value` in `text` with `replacement`.
/// A match must not be adjacent to another word character on either side.
pub fn replace_word(text: &str, value: &str, replacement: &str) -> String {
    if value.is_empty() {
        return String::from(text);
    }
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    let mut prev: Option<char> = None;
    while let Some(pos) = rest.find(value) {
        let before = rest[..pos].chars().next_back().or(prev);
        let after = rest[pos + value.len()..].chars().next();
        let bounded = !before.is_some_and(|c| c.is_alphanumeric() || c == '_')
            && !after.is_some_and(|c| c.is_alphanumeric() || c == '_');
        out.push_str(&rest[..pos]);
        if bounded {
            out.push_str(replacement);
        } else {
            out.push_str(value);
        }
        prev = value.chars().next_back();
        rest = &rest[pos + value.len()..];
    }
    out.push_str(rest);
    out
}
