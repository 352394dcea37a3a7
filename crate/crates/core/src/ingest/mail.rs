//! RFC 5322 messages, either from an mbox stream or a directory tree of
//! `.eml` files.

use std::path::Path;

use chrono::DateTime;
use mailparse::{MailAddr, MailHeaderMap, ParsedMail};
use walkdir::WalkDir;

use super::{IngestError, Parsed};
use crate::model::{FieldKind, ItemId, PimItem, Silo};
use crate::textprep::html_to_text;

/// Splits an mbox stream on `From ` separator lines and parses every
/// message. `folder` becomes the folder path of each item.
pub fn parse_mbox(bytes: &[u8], folder: Option<&str>) -> Parsed {
    let mut parsed = Parsed::default();
    let folder_path: Vec<String> = folder
        .filter(|f| !f.is_empty())
        .map(|f| vec![f.to_string()])
        .unwrap_or_default();

    let mut messages: Vec<Vec<u8>> = Vec::new();
    let mut current: Option<Vec<u8>> = None;
    let mut preamble = false;
    for line in bytes.split_inclusive(|&b| b == b'\n') {
        if line.starts_with(b"From ") {
            if let Some(msg) = current.take() {
                messages.push(msg);
            }
            current = Some(Vec::new());
            continue;
        }
        match current.as_mut() {
            Some(msg) => msg.extend_from_slice(unescape_from_line(line)),
            None => preamble |= !line.iter().all(u8::is_ascii_whitespace),
        }
    }
    if let Some(msg) = current {
        messages.push(msg);
    }
    if preamble {
        parsed.note("content before the first From_ line ignored");
    }

    for (n, mut raw) in messages.into_iter().enumerate() {
        // The blank line that separates messages belongs to the mbox framing.
        if raw.ends_with(b"\r\n\r\n") {
            raw.truncate(raw.len() - 2);
        } else if raw.ends_with(b"\n\n") {
            raw.truncate(raw.len() - 1);
        }
        match parse_message(&raw, &folder_path) {
            Ok(item) => parsed.items.push(item),
            Err(e) => parsed.note(format!("message {}: {e}", n + 1)),
        }
    }
    parsed
}

fn unescape_from_line(line: &[u8]) -> &[u8] {
    let quoted = line.iter().take_while(|&&b| b == b'>').count();
    if quoted > 0 && line[quoted..].starts_with(b"From ") {
        &line[1..]
    } else {
        line
    }
}

/// Parses every message file below `dir`; sub-directories become the folder
/// path of the items they contain.
pub fn parse_eml_directory(dir: &Path) -> Result<Parsed, IngestError> {
    let unreadable = |e: std::io::Error| IngestError::UnreadableSource {
        path: dir.display().to_string(),
        source: e,
    };
    if !std::fs::metadata(dir).map_err(unreadable)?.is_dir() {
        return Err(unreadable(std::io::Error::other("not a directory")));
    }
    let mut parsed = Parsed::default();
    let walker = WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walker {
        let entry = match entry {
            Ok(e) => e,
            Err(e) => {
                parsed.note(format!("skipped unreadable entry: {e}"));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(dir).unwrap_or(entry.path());
        let folder_path: Vec<String> = rel
            .parent()
            .into_iter()
            .flat_map(|p| p.components())
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .filter(|s| !s.is_empty())
            .collect();
        let bytes = match std::fs::read(entry.path()) {
            Ok(b) => b,
            Err(e) => {
                parsed.note(format!("{}: unreadable: {e}", rel.display()));
                continue;
            }
        };
        match parse_message(&bytes, &folder_path) {
            Ok(item) => parsed.items.push(item),
            Err(e) => parsed.note(format!("{}: skipped: {e}", rel.display())),
        }
    }
    Ok(parsed)
}

const IDENTIFYING_HEADERS: [&str; 5] = ["From", "To", "Subject", "Date", "Message-ID"];

/// Parses one RFC 5322 message into a mail item.
pub fn parse_message(raw: &[u8], folder_path: &[String]) -> Result<PimItem, IngestError> {
    let mail = mailparse::parse_mail(raw)
        .map_err(|e| IngestError::MalformedMessage(e.to_string()))?;
    let headers = &mail.headers;
    if !IDENTIFYING_HEADERS
        .iter()
        .any(|h| headers.get_first_header(h).is_some())
    {
        return Err(IngestError::MalformedMessage("no message headers".into()));
    }

    let key = match headers.get_first_value("Message-ID") {
        Some(mid) if !mid.trim().is_empty() => {
            let mut k = b"message-id:".to_vec();
            k.extend_from_slice(mid.trim().as_bytes());
            k
        }
        _ => {
            let mut k = b"bytes:".to_vec();
            k.extend_from_slice(raw);
            k
        }
    };
    let mut item = PimItem::new(ItemId::derive(Silo::Mail, &key), Silo::Mail);
    item.folder_path = folder_path.to_vec();
    if !folder_path.is_empty() {
        item.fields.insert(FieldKind::MailFolder, folder_path.to_vec());
    }

    if let Some(subject) = headers.get_first_value("Subject") {
        item.set_field(FieldKind::MailSubject, single_line(&subject));
    }
    for (header, kind) in [("From", FieldKind::MailFrom), ("To", FieldKind::MailTo)] {
        for value in addresses(&mail, header) {
            item.push_field(kind, value);
        }
    }
    if let Some(date) = headers.get_first_value("Date") {
        if let Some(ts) = mailparse::dateparse(&date)
            .ok()
            .and_then(|secs| DateTime::from_timestamp(secs, 0))
        {
            item.timestamp = Some(ts);
            item.set_field(FieldKind::MailDate, ts.to_rfc3339());
        }
    }
    if let Some(body) = body_text(&mail) {
        if !body.is_empty() {
            item.set_field(FieldKind::MailBody, body);
        }
    }
    Ok(item)
}

fn single_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Address header values rendered as `Display Name <addr>` or `addr`.
fn addresses(mail: &ParsedMail<'_>, header: &str) -> Vec<String> {
    let mut out = Vec::new();
    for h in mail.headers.get_all_headers(header) {
        match mailparse::addrparse_header(h) {
            Ok(list) => {
                for addr in list.iter() {
                    match addr {
                        MailAddr::Single(info) => out.push(render_address(info)),
                        MailAddr::Group(group) => {
                            out.extend(group.addrs.iter().map(render_address));
                        }
                    }
                }
            }
            Err(_) => {
                let raw = single_line(&h.get_value());
                if !raw.is_empty() {
                    out.push(raw);
                }
            }
        }
    }
    out
}

fn render_address(info: &mailparse::SingleInfo) -> String {
    match info.display_name.as_deref().map(single_line) {
        Some(name) if !name.is_empty() => format!("{name} <{}>", info.addr),
        _ => info.addr.clone(),
    }
}

/// Splits a rendered address back into display name and address.
pub fn split_address(value: &str) -> (Option<&str>, &str) {
    let value = value.trim();
    if let (Some(open), true) = (value.rfind('<'), value.ends_with('>')) {
        let name = value[..open].trim().trim_matches('"').trim();
        let addr = value[open + 1..value.len() - 1].trim();
        ((!name.is_empty()).then_some(name), addr)
    } else {
        (None, value)
    }
}

/// First text part of the message, preferring text/plain over text/html.
/// Parts marked as attachments are ignored.
fn body_text(mail: &ParsedMail<'_>) -> Option<String> {
    let mut plain = None;
    let mut html = None;
    collect_text_parts(mail, &mut plain, &mut html, 0);
    if let Some(part) = plain {
        return Some(normalize_newlines(&decoded_body(part)));
    }
    html.map(|part| html_to_text(&decoded_body(part)))
}

fn collect_text_parts<'a, 'b>(
    part: &'a ParsedMail<'b>,
    plain: &mut Option<&'a ParsedMail<'b>>,
    html: &mut Option<&'a ParsedMail<'b>>,
    depth: usize,
) {
    if depth > 32 {
        return;
    }
    if !part.subparts.is_empty() {
        for sub in &part.subparts {
            collect_text_parts(sub, plain, html, depth + 1);
        }
        return;
    }
    let disposition = part.get_content_disposition();
    if disposition.disposition == mailparse::DispositionType::Attachment {
        return;
    }
    match part.ctype.mimetype.to_ascii_lowercase().as_str() {
        "text/plain" if plain.is_none() => *plain = Some(part),
        "text/html" if html.is_none() => *html = Some(part),
        _ => {}
    }
}

fn decoded_body(part: &ParsedMail<'_>) -> String {
    part.get_body().unwrap_or_else(|_| {
        part.get_body_raw()
            .map(|raw| String::from_utf8_lossy(&raw).into_owned())
            .unwrap_or_default()
    })
}

fn normalize_newlines(s: &str) -> String {
    s.replace("\r\n", "\n").trim_end().to_string()
}
