//! Shared domain model: items, fields, folder trees, terms and occurrences.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::metrics::MetricVector;

/// The three personal data silos covered by the miner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Silo {
    Mail,
    Calendar,
    Bookmark,
}

impl Silo {
    pub const ALL: [Silo; 3] = [Silo::Mail, Silo::Calendar, Silo::Bookmark];

    pub fn as_str(self) -> &'static str {
        match self {
            Silo::Mail => "Mail",
            Silo::Calendar => "Calendar",
            Silo::Bookmark => "Bookmark",
        }
    }
}

impl fmt::Display for Silo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Who wrote the text of a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Authorship {
    UserAuthored,
    ExternalAuthored,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    MailSubject,
    MailBody,
    MailFrom,
    MailTo,
    MailFolder,
    MailDate,
    EventSummary,
    EventDescription,
    EventLocation,
    EventStart,
    EventEnd,
    BookmarkTitle,
    BookmarkDescription,
    BookmarkUrl,
    BookmarkFolder,
}

impl FieldKind {
    pub const ALL: [FieldKind; 15] = [
        FieldKind::MailSubject,
        FieldKind::MailBody,
        FieldKind::MailFrom,
        FieldKind::MailTo,
        FieldKind::MailFolder,
        FieldKind::MailDate,
        FieldKind::EventSummary,
        FieldKind::EventDescription,
        FieldKind::EventLocation,
        FieldKind::EventStart,
        FieldKind::EventEnd,
        FieldKind::BookmarkTitle,
        FieldKind::BookmarkDescription,
        FieldKind::BookmarkUrl,
        FieldKind::BookmarkFolder,
    ];

    /// Free-text fields that are tokenized into terms. Header, URL and date
    /// fields are left to the schema extractors.
    pub const TEXT: [FieldKind; 9] = [
        FieldKind::MailFolder,
        FieldKind::MailSubject,
        FieldKind::MailBody,
        FieldKind::EventSummary,
        FieldKind::EventDescription,
        FieldKind::EventLocation,
        FieldKind::BookmarkFolder,
        FieldKind::BookmarkTitle,
        FieldKind::BookmarkDescription,
    ];

    pub fn authorship(self) -> Authorship {
        use FieldKind::*;
        match self {
            MailSubject | MailFolder | EventSummary | EventDescription | BookmarkFolder => {
                Authorship::UserAuthored
            }
            BookmarkTitle | MailBody | BookmarkDescription => Authorship::ExternalAuthored,
            MailFrom | MailTo | MailDate | EventStart | EventEnd | EventLocation | BookmarkUrl => {
                Authorship::Structured
            }
        }
    }

    pub fn silo(self) -> Silo {
        use FieldKind::*;
        match self {
            MailSubject | MailBody | MailFrom | MailTo | MailFolder | MailDate => Silo::Mail,
            EventSummary | EventDescription | EventLocation | EventStart | EventEnd => {
                Silo::Calendar
            }
            BookmarkTitle | BookmarkDescription | BookmarkUrl | BookmarkFolder => Silo::Bookmark,
        }
    }

    pub fn is_text(self) -> bool {
        Self::TEXT.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        use FieldKind::*;
        match self {
            MailSubject => "MailSubject",
            MailBody => "MailBody",
            MailFrom => "MailFrom",
            MailTo => "MailTo",
            MailFolder => "MailFolder",
            MailDate => "MailDate",
            EventSummary => "EventSummary",
            EventDescription => "EventDescription",
            EventLocation => "EventLocation",
            EventStart => "EventStart",
            EventEnd => "EventEnd",
            BookmarkTitle => "BookmarkTitle",
            BookmarkDescription => "BookmarkDescription",
            BookmarkUrl => "BookmarkUrl",
            BookmarkFolder => "BookmarkFolder",
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Content-derived item identifier (hex of a truncated SHA-256).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ItemId(String);

impl ItemId {
    /// Hashes the silo together with the canonical source key of an item.
    pub fn derive(silo: Silo, source_key: &[u8]) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(silo.as_str().as_bytes());
        hasher.update([0u8]);
        hasher.update(source_key);
        let digest = hasher.finalize();
        ItemId(hex::encode(&digest[..16]))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for ItemId {
    fn from(s: &str) -> Self {
        ItemId(s.to_string())
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PimItem {
    pub id: ItemId,
    pub silo: Silo,
    /// Plain-text values per field; multi-valued fields keep their order.
    pub fields: BTreeMap<FieldKind, Vec<String>>,
    pub folder_path: Vec<String>,
    #[serde(default)]
    pub timestamp: Option<DateTime<Utc>>,
}

impl PimItem {
    pub fn new(id: ItemId, silo: Silo) -> Self {
        PimItem {
            id,
            silo,
            fields: BTreeMap::new(),
            folder_path: Vec::new(),
            timestamp: None,
        }
    }

    pub fn set_field(&mut self, kind: FieldKind, value: impl Into<String>) {
        self.fields.insert(kind, vec![value.into()]);
    }

    pub fn push_field(&mut self, kind: FieldKind, value: impl Into<String>) {
        self.fields.entry(kind).or_default().push(value.into());
    }

    /// Plain text of a field; multiple values are joined with newlines.
    pub fn text(&self, kind: FieldKind) -> Option<String> {
        self.fields.get(&kind).map(|values| values.join("\n"))
    }

    /// Short human-readable label: subject, event summary or bookmark title.
    pub fn summary(&self) -> String {
        let kind = match self.silo {
            Silo::Mail => FieldKind::MailSubject,
            Silo::Calendar => FieldKind::EventSummary,
            Silo::Bookmark => FieldKind::BookmarkTitle,
        };
        self.text(kind).unwrap_or_default()
    }
}

/// Returns the extracted plain text of `kind`, if the item has that field.
pub fn item_text(item: &PimItem, kind: FieldKind) -> Option<String> {
    item.text(kind)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FolderNode {
    pub name: String,
    #[serde(default)]
    pub children: Vec<FolderNode>,
}

impl FolderNode {
    fn root() -> Self {
        FolderNode::default()
    }

    fn insert_path(&mut self, path: &[String]) {
        let Some((head, rest)) = path.split_first() else {
            return;
        };
        let pos = match self.children.binary_search_by(|c| c.name.as_str().cmp(head)) {
            Ok(pos) => pos,
            Err(pos) => {
                self.children.insert(
                    pos,
                    FolderNode {
                        name: head.clone(),
                        children: Vec::new(),
                    },
                );
                pos
            }
        };
        self.children[pos].insert_path(rest);
    }

    pub fn contains_path(&self, path: &[String]) -> bool {
        match path.split_first() {
            None => true,
            Some((head, rest)) => self
                .children
                .iter()
                .any(|c| &c.name == head && c.contains_path(rest)),
        }
    }

    /// Visits every node below this one with its depth (children of the root
    /// have depth 1).
    pub fn walk(&self, visit: &mut impl FnMut(&FolderNode, usize)) {
        fn go(node: &FolderNode, depth: usize, visit: &mut impl FnMut(&FolderNode, usize)) {
            for child in &node.children {
                visit(child, depth);
                go(child, depth + 1, visit);
            }
        }
        go(self, 1, visit);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceFormat {
    Mbox,
    EmlDirectory,
    Ics,
    BookmarksHtml,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SourceEntry {
    pub path: String,
    pub format: SourceFormat,
    /// Items emitted by the parser for this source.
    pub item_count: usize,
    /// Items dropped because an earlier source produced the same id.
    #[serde(default)]
    pub duplicates: usize,
    #[serde(default)]
    pub notes: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct CorpusFile {
    items: Vec<PimItem>,
    folder_trees: BTreeMap<Silo, FolderNode>,
    manifest: Vec<SourceEntry>,
}

/// An immutable collection of crawled items plus their folder trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "CorpusFile", into = "CorpusFile")]
pub struct Corpus {
    items: Vec<PimItem>,
    folder_trees: BTreeMap<Silo, FolderNode>,
    manifest: Vec<SourceEntry>,
    lookup: HashMap<ItemId, usize>,
}

impl From<CorpusFile> for Corpus {
    fn from(file: CorpusFile) -> Self {
        let lookup = build_lookup(&file.items);
        Corpus {
            items: file.items,
            folder_trees: file.folder_trees,
            manifest: file.manifest,
            lookup,
        }
    }
}

impl From<Corpus> for CorpusFile {
    fn from(c: Corpus) -> Self {
        CorpusFile {
            items: c.items,
            folder_trees: c.folder_trees,
            manifest: c.manifest,
        }
    }
}

fn build_lookup(items: &[PimItem]) -> HashMap<ItemId, usize> {
    items
        .iter()
        .enumerate()
        .map(|(i, item)| (item.id.clone(), i))
        .collect()
}

impl Default for Corpus {
    fn default() -> Self {
        Corpus::from_items(Vec::new(), Vec::new())
    }
}

impl Corpus {
    /// Builds a corpus, ordering items by silo then id and assembling folder
    /// trees from the items' folder paths. Later duplicates of an id are
    /// dropped.
    pub fn from_items(mut items: Vec<PimItem>, manifest: Vec<SourceEntry>) -> Self {
        items.sort_by(|a, b| (a.silo, &a.id).cmp(&(b.silo, &b.id)));
        items.dedup_by(|b, a| a.id == b.id);
        let mut folder_trees: BTreeMap<Silo, FolderNode> =
            Silo::ALL.iter().map(|s| (*s, FolderNode::root())).collect();
        for item in &items {
            if let Some(tree) = folder_trees.get_mut(&item.silo) {
                tree.insert_path(&item.folder_path);
            }
        }
        let lookup = build_lookup(&items);
        Corpus {
            items,
            folder_trees,
            manifest,
            lookup,
        }
    }

    pub fn items(&self) -> &[PimItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn item(&self, id: &ItemId) -> Option<&PimItem> {
        self.lookup.get(id).map(|&i| &self.items[i])
    }

    pub fn item_position(&self, id: &ItemId) -> Option<usize> {
        self.lookup.get(id).copied()
    }

    pub fn folder_tree(&self, silo: Silo) -> Option<&FolderNode> {
        self.folder_trees.get(&silo)
    }

    pub fn folder_trees(&self) -> &BTreeMap<Silo, FolderNode> {
        &self.folder_trees
    }

    pub fn manifest(&self) -> &[SourceEntry] {
        &self.manifest
    }

    pub fn count_in(&self, silo: Silo) -> usize {
        self.items.iter().filter(|i| i.silo == silo).count()
    }

    /// Minimum depth of a folder whose case-folded name equals `folder_name`.
    pub fn folder_depth(&self, silo: Silo, folder_name: &str) -> Option<usize> {
        let wanted = folder_name.to_lowercase();
        let tree = self.folder_trees.get(&silo)?;
        let mut best: Option<usize> = None;
        tree.walk(&mut |node, depth| {
            if node.name.to_lowercase() == wanted && best.is_none_or(|b| depth < b) {
                best = Some(depth);
            }
        });
        best
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("corpus serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self, CorpusFileError> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_json(&text)?)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        crate::persist::atomic_write(path, self.to_json().as_bytes())
    }

    /// Content hash of the canonical serialization.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusFileError {
    #[error("cannot read corpus file: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt corpus file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// One located occurrence of a term or entity inside an item field.
///
/// Offsets count Unicode scalar values in the field's plain text.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TermOccurrence {
    pub item_id: ItemId,
    pub field_kind: FieldKind,
    pub char_start: usize,
    pub char_end: usize,
    pub surface: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TermRecord {
    pub key: String,
    /// Observed casings with their counts.
    pub surfaces: BTreeMap<String, usize>,
    pub occurrences: Vec<TermOccurrence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricVector>,
}

impl TermRecord {
    pub fn new(key: impl Into<String>) -> Self {
        TermRecord {
            key: key.into(),
            surfaces: BTreeMap::new(),
            occurrences: Vec::new(),
            metrics: None,
        }
    }

    pub fn count(&self) -> usize {
        self.occurrences.len()
    }

    /// Most frequent casing; ties go to the lexicographically smallest.
    pub fn display_surface(&self) -> &str {
        self.surfaces
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(a.0)))
            .map(|(s, _)| s.as_str())
            .unwrap_or(&self.key)
    }
}

/// Substring of `text` between two char offsets.
pub fn char_slice(text: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let mut indices = text.char_indices().map(|(b, _)| b).chain(std::iter::once(text.len()));
    let from = indices.nth(start)?;
    let to = if end == start {
        from
    } else {
        indices.nth(end - start - 1)?
    };
    text.get(from..to)
}
