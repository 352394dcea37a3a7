use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenClass {
    /// At least one letter, no digits.
    Word,
    /// Digits and digit punctuation only.
    Number,
    /// Neither letters nor digits.
    Symbol,
    /// Letters and digits.
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub surface: &'a str,
    /// Char offsets into the source text, half-open.
    pub char_start: usize,
    pub char_end: usize,
    pub class: TokenClass,
}

impl Token<'_> {
    /// Lowercased term key.
    pub fn key(&self) -> String {
        self.surface.to_lowercase()
    }

    pub fn is_term_candidate(&self) -> bool {
        matches!(self.class, TokenClass::Word | TokenClass::Mixed)
            && self.surface.chars().count() >= MIN_TERM_CHARS
    }
}

pub const MIN_TERM_CHARS: usize = 2;

fn is_word_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '\u{2010}')
}

fn is_digit_joiner(c: char) -> bool {
    matches!(c, '.' | ',' | ':' | '/')
}

fn classify(surface: &str) -> TokenClass {
    let letters = surface.chars().any(char::is_alphabetic);
    let digits = surface.chars().any(char::is_numeric);
    match (letters, digits) {
        (true, false) => TokenClass::Word,
        (true, true) => TokenClass::Mixed,
        (false, true) => TokenClass::Number,
        (false, false) => TokenClass::Symbol,
    }
}

/// Splits text into alphanumeric runs and symbol runs.
///
/// Apostrophes and hyphens stay inside a token when flanked by
/// alphanumerics; `.`, `,`, `:` and `/` stay inside when flanked by digits.
/// Whitespace separates tokens and is never part of one.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let byte_at = |i: usize| chars.get(i).map_or(text.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i].1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_alphanumeric() {
            i += 1;
            while i < chars.len() {
                let c = chars[i].1;
                if c.is_alphanumeric() {
                    i += 1;
                    continue;
                }
                let prev = chars[i - 1].1;
                let next = chars.get(i + 1).map(|&(_, n)| n);
                let joins = match next {
                    Some(n) if is_word_joiner(c) => prev.is_alphanumeric() && n.is_alphanumeric(),
                    Some(n) if is_digit_joiner(c) => prev.is_numeric() && n.is_numeric(),
                    _ => false,
                };
                if joins {
                    i += 2;
                } else {
                    break;
                }
            }
        } else {
            i += 1;
            while i < chars.len() && !chars[i].1.is_whitespace() && !chars[i].1.is_alphanumeric() {
                i += 1;
            }
        }
        let surface = &text[byte_at(start)..byte_at(i)];
        tokens.push(Token {
            surface,
            char_start: start,
            char_end: i,
            class: classify(surface),
        });
    }
    tokens
}
