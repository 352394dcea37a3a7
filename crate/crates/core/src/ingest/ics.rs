//! RFC 5545 iCalendar VEVENT extraction.
//!
//! Only the properties the miner needs are interpreted. Recurring events
//! are kept as a single item at their DTSTART.

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};

use super::Parsed;
use crate::model::{FieldKind, ItemId, PimItem, Silo};

/// Removes line folding: a line break followed by a space or tab.
pub fn unfold(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        let newline = match c {
            '\r' if chars.peek() == Some(&'\n') => {
                chars.next();
                true
            }
            '\n' => true,
            _ => false,
        };
        if !newline {
            out.push(c);
            continue;
        }
        if matches!(chars.peek(), Some(' ') | Some('\t')) {
            chars.next();
        } else {
            out.push('\n');
        }
    }
    out
}

/// Resolves TEXT escapes (`\\`, `\;`, `\,`, `\n`).
pub fn unescape_text(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') | Some('N') => out.push('\n'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}

#[derive(Debug, PartialEq, Eq)]
struct ContentLine<'a> {
    name: String,
    value: &'a str,
}

fn parse_content_line(line: &str) -> Option<ContentLine<'_>> {
    let mut in_quotes = false;
    let mut colon = None;
    for (i, c) in line.char_indices() {
        match c {
            '"' => in_quotes = !in_quotes,
            ':' if !in_quotes => {
                colon = Some(i);
                break;
            }
            _ => {}
        }
    }
    let colon = colon?;
    let head = &line[..colon];
    // Parameters (after the first ';') carry nothing the miner uses.
    let name = head.split(';').next()?.trim().to_ascii_uppercase();
    if name.is_empty() {
        return None;
    }
    Some(ContentLine {
        name,
        value: &line[colon + 1..],
    })
}

/// Parses DATE and DATE-TIME values. Floating and TZID-qualified times are
/// taken as UTC.
pub fn parse_ics_datetime(value: &str) -> Option<DateTime<Utc>> {
    let v = value.trim();
    let v = v.strip_suffix('Z').unwrap_or(v);
    if let Ok(dt) = NaiveDateTime::parse_from_str(v, "%Y%m%dT%H%M%S") {
        return Some(dt.and_utc());
    }
    if v.len() == 8 {
        if let Ok(d) = NaiveDate::parse_from_str(v, "%Y%m%d") {
            return d.and_hms_opt(0, 0, 0).map(|dt| dt.and_utc());
        }
    }
    None
}

#[derive(Default)]
struct EventBuilder {
    lines: Vec<String>,
    summary: Option<String>,
    description: Option<String>,
    location: Option<String>,
    uid: Option<String>,
    start: Option<String>,
    end: Option<String>,
    malformed: Option<String>,
}

impl EventBuilder {
    fn build(self) -> PimItem {
        let key = match &self.uid {
            Some(uid) if !uid.trim().is_empty() => format!("uid:{}", uid.trim()).into_bytes(),
            _ => format!("lines:{}", self.lines.join("\n")).into_bytes(),
        };
        let mut item = PimItem::new(ItemId::derive(Silo::Calendar, &key), Silo::Calendar);
        let text_fields = [
            (FieldKind::EventSummary, self.summary),
            (FieldKind::EventDescription, self.description),
            (FieldKind::EventLocation, self.location),
        ];
        for (kind, value) in text_fields {
            if let Some(v) = value {
                item.set_field(kind, v);
            }
        }
        for (kind, value) in [(FieldKind::EventStart, &self.start), (FieldKind::EventEnd, &self.end)] {
            if let Some(raw) = value {
                match parse_ics_datetime(raw) {
                    Some(ts) => {
                        item.set_field(kind, ts.to_rfc3339());
                        if kind == FieldKind::EventStart {
                            item.timestamp = Some(ts);
                        }
                    }
                    None => item.set_field(kind, raw.trim()),
                }
            }
        }
        item
    }
}

/// Extracts one calendar item per VEVENT component.
pub fn parse_ics(bytes: &[u8]) -> Parsed {
    let text = String::from_utf8_lossy(bytes);
    let unfolded = unfold(&text);
    let mut parsed = Parsed::default();
    let mut stack: Vec<String> = Vec::new();
    let mut event: Option<EventBuilder> = None;
    let mut event_no = 0usize;

    for (lineno, line) in unfolded.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let Some(cl) = parse_content_line(line) else {
            if let Some(ev) = event.as_mut() {
                ev.malformed.get_or_insert_with(|| format!("line {}: not a content line", lineno + 1));
            }
            continue;
        };
        match cl.name.as_str() {
            "BEGIN" => {
                let comp = cl.value.trim().to_ascii_uppercase();
                if comp == "VEVENT" {
                    if let Some(open) = event.take() {
                        event_no += 1;
                        finish(&mut parsed, open, event_no, Some("nested VEVENT"));
                    }
                    event = Some(EventBuilder::default());
                }
                stack.push(comp);
            }
            "END" => {
                let comp = cl.value.trim().to_ascii_uppercase();
                match stack.iter().rposition(|c| *c == comp) {
                    Some(pos) => {
                        let unclosed = stack.len() - pos - 1;
                        stack.truncate(pos);
                        if comp == "VEVENT" {
                            if let Some(ev) = event.take() {
                                event_no += 1;
                                let problem = (unclosed > 0).then_some("unclosed sub-component");
                                finish(&mut parsed, ev, event_no, problem);
                            }
                        } else if event.is_some() && !stack.iter().any(|c| c == "VEVENT") {
                            event_no += 1;
                            let ev = event.take().expect("checked");
                            finish(&mut parsed, ev, event_no, Some("missing END:VEVENT"));
                        }
                    }
                    None => {
                        if let Some(ev) = event.as_mut() {
                            ev.malformed.get_or_insert_with(|| format!("line {}: unmatched END:{comp}", lineno + 1));
                        }
                    }
                }
            }
            _ => {
                // Properties of sub-components (e.g. VALARM) are not the event's.
                if stack.last().map(String::as_str) != Some("VEVENT") {
                    continue;
                }
                let Some(ev) = event.as_mut() else { continue };
                ev.lines.push(line.to_string());
                let value = Some(unescape_text(cl.value));
                match cl.name.as_str() {
                    "SUMMARY" => ev.summary = value,
                    "DESCRIPTION" => ev.description = value,
                    "LOCATION" => ev.location = value,
                    "UID" => ev.uid = Some(cl.value.to_string()),
                    "DTSTART" => ev.start = Some(cl.value.to_string()),
                    "DTEND" => ev.end = Some(cl.value.to_string()),
                    _ => {}
                }
            }
        }
    }
    if let Some(ev) = event {
        event_no += 1;
        finish(&mut parsed, ev, event_no, Some("missing END:VEVENT"));
    }
    parsed
}

fn finish(parsed: &mut Parsed, ev: EventBuilder, n: usize, problem: Option<&str>) {
    match problem.map(str::to_string).or_else(|| ev.malformed.clone()) {
        Some(p) => parsed.note(format!("VEVENT {n} skipped: {p}")),
        None => parsed.items.push(ev.build()),
    }
}
