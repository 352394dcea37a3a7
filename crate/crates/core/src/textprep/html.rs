//! A small, forgiving HTML tokenizer and an HTML-to-text converter.
//!
//! The lexer never fails: unterminated tags run to the end of input and a
//! stray `<` that does not open a tag is kept as text.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HtmlToken<'a> {
    Text(&'a str),
    Start {
        name: String,
        attrs: Vec<(String, String)>,
        self_closing: bool,
    },
    End {
        name: String,
    },
    /// Comments, doctypes and processing instructions.
    Markup,
}

impl HtmlToken<'_> {
    pub fn attr(&self, wanted: &str) -> Option<&str> {
        match self {
            HtmlToken::Start { attrs, .. } => attrs
                .iter()
                .find(|(k, _)| k == wanted)
                .map(|(_, v)| v.as_str()),
            _ => None,
        }
    }
}

/// Result of lexing a document.
#[derive(Debug, Default)]
pub struct Lexed<'a> {
    pub tokens: Vec<HtmlToken<'a>>,
    /// Set when input ended inside a tag, comment or raw-text element.
    pub truncated: bool,
}

const RAW_TEXT: [&str; 2] = ["script", "style"];

pub fn lex(input: &str) -> Lexed<'_> {
    let bytes = input.as_bytes();
    let mut out = Lexed::default();
    let mut pos = 0;
    let mut text_start = 0;

    while pos < bytes.len() {
        if bytes[pos] != b'<' {
            pos += 1;
            continue;
        }
        let next = bytes.get(pos + 1).copied();
        let opens_tag = matches!(next, Some(b) if b.is_ascii_alphabetic() || b == b'/' || b == b'!' || b == b'?');
        if !opens_tag {
            pos += 1;
            continue;
        }
        if text_start < pos {
            out.tokens.push(HtmlToken::Text(&input[text_start..pos]));
        }
        match next {
            Some(b'!') if input[pos..].starts_with("<!--") => {
                match input[pos + 4..].find("-->") {
                    Some(end) => pos = pos + 4 + end + 3,
                    None => {
                        pos = bytes.len();
                        out.truncated = true;
                    }
                }
                out.tokens.push(HtmlToken::Markup);
            }
            Some(b'!') | Some(b'?') => {
                match input[pos..].find('>') {
                    Some(end) => pos += end + 1,
                    None => {
                        pos = bytes.len();
                        out.truncated = true;
                    }
                }
                out.tokens.push(HtmlToken::Markup);
            }
            Some(b'/') => {
                let name_start = pos + 2;
                let name_end = scan(bytes, name_start, |b| b.is_ascii_alphanumeric() || b == b'-' || b == b':');
                let name = input[name_start..name_end].to_ascii_lowercase();
                match input[name_end..].find('>') {
                    Some(end) => pos = name_end + end + 1,
                    None => {
                        pos = bytes.len();
                        out.truncated = true;
                    }
                }
                if !name.is_empty() {
                    out.tokens.push(HtmlToken::End { name });
                }
            }
            _ => {
                let (token, end, complete) = start_tag(input, pos + 1);
                pos = end;
                if !complete {
                    out.truncated = true;
                }
                let raw = match &token {
                    HtmlToken::Start { name, self_closing: false, .. } if RAW_TEXT.contains(&name.as_str()) => {
                        Some(name.clone())
                    }
                    _ => None,
                };
                out.tokens.push(token);
                if let Some(name) = raw {
                    let close = format!("</{name}");
                    match find_ascii_ci(&input[pos..], &close) {
                        Some(off) => {
                            let after = pos + off;
                            pos = match input[after..].find('>') {
                                Some(gt) => after + gt + 1,
                                None => bytes.len(),
                            };
                        }
                        None => {
                            pos = bytes.len();
                            out.truncated = true;
                        }
                    }
                    out.tokens.push(HtmlToken::End { name });
                }
            }
        }
        text_start = pos;
    }
    if text_start < bytes.len() {
        out.tokens.push(HtmlToken::Text(&input[text_start..]));
    }
    out
}

fn scan(bytes: &[u8], mut pos: usize, keep: impl Fn(u8) -> bool) -> usize {
    while pos < bytes.len() && keep(bytes[pos]) {
        pos += 1;
    }
    pos
}

fn find_ascii_ci(haystack: &str, needle: &str) -> Option<usize> {
    let h = haystack.as_bytes();
    let n = needle.as_bytes();
    if n.len() > h.len() {
        return None;
    }
    (0..=h.len() - n.len()).find(|&i| h[i..i + n.len()].eq_ignore_ascii_case(n))
}

/// Parses a start tag beginning at the tag name. Returns the token, the
/// position after `>`, and whether `>` was found.
fn start_tag(input: &str, name_start: usize) -> (HtmlToken<'_>, usize, bool) {
    let bytes = input.as_bytes();
    let name_end = scan(bytes, name_start, |b| b.is_ascii_alphanumeric() || b == b'-' || b == b':');
    let name = input[name_start..name_end].to_ascii_lowercase();
    let mut attrs = Vec::new();
    let mut self_closing = false;
    let mut pos = name_end;
    loop {
        pos = scan(bytes, pos, |b| b.is_ascii_whitespace());
        match bytes.get(pos) {
            None => {
                return (HtmlToken::Start { name, attrs, self_closing }, pos, false);
            }
            Some(b'>') => {
                return (HtmlToken::Start { name, attrs, self_closing }, pos + 1, true);
            }
            Some(b'/') => {
                self_closing = bytes.get(pos + 1) == Some(&b'>');
                pos += 1;
                continue;
            }
            _ => {}
        }
        let key_start = pos;
        let key_end = scan(bytes, pos, |b| {
            !(b.is_ascii_whitespace() || b == b'=' || b == b'>' || b == b'/')
        });
        let key = input[key_start..key_end].to_ascii_lowercase();
        pos = scan(bytes, key_end, |b| b.is_ascii_whitespace());
        let mut value = String::new();
        if bytes.get(pos) == Some(&b'=') {
            pos = scan(bytes, pos + 1, |b| b.is_ascii_whitespace());
            match bytes.get(pos) {
                Some(&q) if q == b'"' || q == b'\'' => {
                    let vstart = pos + 1;
                    let vend = scan(bytes, vstart, |b| b != q);
                    value = decode_entities(&input[vstart..vend]);
                    pos = (vend + 1).min(bytes.len());
                }
                _ => {
                    let vend = scan(bytes, pos, |b| !(b.is_ascii_whitespace() || b == b'>'));
                    value = decode_entities(&input[pos..vend]);
                    pos = vend;
                }
            }
        }
        if !key.is_empty() {
            attrs.push((key, value));
        } else if pos == key_start {
            // Unparseable byte; step over it.
            pos += 1;
        }
    }
}

pub fn decode_entities(text: &str) -> String {
    html_escape::decode_html_entities(text).into_owned()
}

const BLOCK: &[&str] = &[
    "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "fieldset",
    "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr",
    "li", "main", "nav", "ol", "p", "pre", "section", "table", "tbody", "thead", "tfoot", "tr",
    "ul", "title", "body", "head", "html",
];

/// Converts HTML to plain text: tags stripped, entities decoded, block
/// elements become line breaks, whitespace runs collapse to one space and
/// empty lines are dropped. Script and style content is removed.
pub fn html_to_text(html: &str) -> String {
    let lexed = lex(html);
    let mut raw = String::with_capacity(html.len());
    let mut skipping: Option<String> = None;
    for token in &lexed.tokens {
        match token {
            HtmlToken::Text(t) => {
                if skipping.is_none() {
                    raw.push_str(&decode_entities(t));
                }
            }
            HtmlToken::Start { name, self_closing, .. } => {
                if RAW_TEXT.contains(&name.as_str()) && !self_closing {
                    skipping = Some(name.clone());
                } else if BLOCK.contains(&name.as_str()) {
                    raw.push('\n');
                } else if name == "td" || name == "th" {
                    raw.push(' ');
                }
            }
            HtmlToken::End { name } => {
                if skipping.as_deref() == Some(name.as_str()) {
                    skipping = None;
                } else if BLOCK.contains(&name.as_str()) {
                    raw.push('\n');
                }
            }
            HtmlToken::Markup => {}
        }
    }
    normalize_lines(&raw)
}

/// Collapses whitespace within lines, trims them and drops empty ones.
pub fn normalize_lines(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for line in raw.lines() {
        let mut first = true;
        for word in line.split(char::is_whitespace).filter(|w| !w.is_empty()) {
            if first {
                if !out.is_empty() {
                    out.push('\n');
                }
                first = false;
            } else {
                out.push(' ');
            }
            out.push_str(word);
        }
    }
    out
}
