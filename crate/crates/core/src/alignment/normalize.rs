use unicode_normalization::UnicodeNormalization;

use crate::data::WikiLanguage;

const OPENERS: [char; 5] = ['(', '（', '[', '【', '「'];
const CLOSERS: [char; 5] = [')', '）', ']', '】', '」'];

/// Matching key for a film title.
///
/// NFC, lowercased, bracketed qualifiers such as `(Film)` or
/// `(2013年の映画)` removed, apostrophes dropped, any other run of
/// non-alphanumeric characters collapsed to one space. Only used for
/// candidate diagnostics and fixture keys; URLs are always compared exactly.
pub fn normalize_title(title: &str, _language: WikiLanguage) -> String {
    let composed: String = title.nfc().collect();
    let folded: String = composed.to_lowercase().nfc().collect();
    let unbracketed = strip_bracketed(&folded);
    let mut out = String::with_capacity(unbracketed.len());
    let mut pending_space = false;
    for c in unbracketed.chars() {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else if !matches!(c, '\'' | '’' | '`') {
            pending_space = true;
        }
    }
    out
}

/// Search-fixture key of a query: the normalized query with spaces as `+`,
/// e.g. `Gravity 映画` → `gravity+映画`.
pub fn query_key(query: &str, language: WikiLanguage) -> String {
    normalize_title(query, language).replace(' ', "+")
}

fn strip_bracketed(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut open: Vec<(char, usize)> = Vec::new();
    for c in s.chars() {
        if let Some(i) = OPENERS.iter().position(|&o| o == c) {
            open.push((CLOSERS[i], out.len()));
            out.push(c);
        } else if CLOSERS.contains(&c) {
            match open.last() {
                Some(&(want, at)) if want == c => {
                    out.truncate(at);
                    out.push(' ');
                    open.pop();
                }
                _ => out.push(c),
            }
        } else {
            out.push(c);
        }
    }
    out
}
