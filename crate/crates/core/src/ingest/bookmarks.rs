//! Netscape bookmark file format (`<DL>`/`<DT>`/`<H3>`/`<A>` nesting), as
//! exported by every major browser.

use chrono::DateTime;

use super::Parsed;
use crate::model::{FieldKind, ItemId, PimItem, Silo};
use crate::textprep::html::{lex, normalize_lines, HtmlToken};

enum Capture {
    None,
    Folder(String),
    Anchor { href: String, added: Option<i64>, text: String },
    Description { target: usize, text: String },
}

fn flat(text: &str) -> String {
    normalize_lines(text).replace('\n', " ")
}

/// Parses a bookmark export into one item per anchor. The enclosing `<H3>`
/// chain becomes the folder path. Malformed documents yield the bookmarks
/// recovered so far plus a note.
pub fn parse_bookmarks_html(bytes: &[u8]) -> Parsed {
    let text = String::from_utf8_lossy(bytes);
    let lexed = lex(&text);
    let mut parsed = Parsed::default();
    if lexed.truncated {
        parsed.note("document ends inside markup");
    }

    let mut folders: Vec<Option<String>> = Vec::new();
    let mut pending_folder: Option<String> = None;
    let mut capture = Capture::None;
    let mut last_anchor: Option<usize> = None;
    let mut stray_closes = 0usize;

    let mut items: Vec<PimItem> = Vec::new();

    for token in &lexed.tokens {
        match token {
            HtmlToken::Text(t) => match &mut capture {
                Capture::Folder(buf) | Capture::Anchor { text: buf, .. } | Capture::Description { text: buf, .. } => {
                    buf.push_str(&crate::textprep::html::decode_entities(t));
                }
                Capture::None => {}
            },
            HtmlToken::Start { name, .. } => {
                match name.as_str() {
                    "a" | "h3" | "dt" | "dl" => {
                        close_capture(&mut capture, &mut items, &folders, &mut pending_folder, &mut last_anchor);
                    }
                    _ => {}
                }
                match name.as_str() {
                    "h3" => {
                        last_anchor = None;
                        capture = Capture::Folder(String::new());
                    }
                    "a" => {
                        capture = Capture::Anchor {
                            href: token.attr("href").unwrap_or_default().trim().to_string(),
                            added: token.attr("add_date").and_then(|d| d.trim().parse().ok()),
                            text: String::new(),
                        };
                    }
                    "dl" => folders.push(pending_folder.take()),
                    "dd" => {
                        if let (Capture::None, Some(target)) = (&capture, last_anchor) {
                            capture = Capture::Description { target, text: String::new() };
                        }
                    }
                    "dt" => last_anchor = None,
                    _ => {}
                }
            }
            HtmlToken::End { name } => match name.as_str() {
                "a" | "h3" => {
                    close_capture(&mut capture, &mut items, &folders, &mut pending_folder, &mut last_anchor);
                }
                "dl" => {
                    close_capture(&mut capture, &mut items, &folders, &mut pending_folder, &mut last_anchor);
                    if folders.pop().is_none() {
                        stray_closes += 1;
                    }
                    last_anchor = None;
                }
                _ => {}
            },
            HtmlToken::Markup => {}
        }
    }
    if matches!(capture, Capture::Anchor { .. }) {
        parsed.note("unterminated anchor at end of document");
    }
    close_capture(&mut capture, &mut items, &folders, &mut pending_folder, &mut last_anchor);
    if !folders.is_empty() {
        parsed.note(format!("{} folder list(s) not closed", folders.len()));
    }
    if stray_closes > 0 {
        parsed.note(format!("{stray_closes} unmatched </DL>"));
    }
    parsed.items = items;
    parsed
}

fn close_capture(
    capture: &mut Capture,
    items: &mut Vec<PimItem>,
    folders: &[Option<String>],
    pending_folder: &mut Option<String>,
    last_anchor: &mut Option<usize>,
) {
    match std::mem::replace(capture, Capture::None) {
        Capture::None => {}
        Capture::Folder(buf) => {
            let name = flat(&buf);
            *pending_folder = (!name.is_empty()).then_some(name);
        }
        Capture::Anchor { href, added, text } => {
            let title = flat(&text);
            let folder_path: Vec<String> = folders.iter().flatten().cloned().collect();
            let mut key = href.clone().into_bytes();
            key.push(0);
            key.extend_from_slice(title.as_bytes());
            let mut item = PimItem::new(ItemId::derive(Silo::Bookmark, &key), Silo::Bookmark);
            item.set_field(FieldKind::BookmarkTitle, title);
            item.set_field(FieldKind::BookmarkUrl, href);
            if !folder_path.is_empty() {
                item.fields.insert(FieldKind::BookmarkFolder, folder_path.clone());
            }
            item.folder_path = folder_path;
            item.timestamp = added.and_then(|secs| DateTime::from_timestamp(secs, 0));
            items.push(item);
            *last_anchor = Some(items.len() - 1);
        }
        Capture::Description { target, text } => {
            let description = normalize_lines(&text);
            if !description.is_empty() {
                if let Some(item) = items.get_mut(target) {
                    item.set_field(FieldKind::BookmarkDescription, description);
                }
            }
            *last_anchor = None;
        }
    }
}
