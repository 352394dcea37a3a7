//! Plain-text extraction, tokenization and the term index.

pub mod html;
mod index;
mod tokenize;

pub use html::html_to_text;
pub use index::{build_term_index, field_terms, IndexOptions, TermIndex};
pub use tokenize::{tokenize, Token, TokenClass, MIN_TERM_CHARS};
