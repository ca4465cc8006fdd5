//! Mail Filter View and Recipient View extraction.
//!
//! The document is flattened into a stream of [`Piece`]s in source order.
//! The mail filter reads every text piece; the recipient reads the visible
//! ones. Block boundaries and `<br>` separate words in both views, so a
//! document with nothing concealed yields identical token lists.
//!
//! Hidden pieces are grouped into runs: maximal stretches with no visible
//! non-whitespace text in between. Each run gets one boundary class that
//! every span in it shares.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dom::{NodeId, NodeKind};
use crate::metrics::jaccard_distance;
use crate::style::{default_display, resolve_styles, Display, StyledDom};
use crate::visibility::{judge_first_letter, judge_visibility, ConcealReason, VisibilityThresholds};

/// Elements whose content is never rendered text.
const EXCLUDED_TAGS: &[&str] = &["head", "title", "style", "script", "template", "noscript"];

/// Longest line (in non-whitespace characters) a cell may hold to count
/// as a fragment of a word assembled across table cells.
const ASSEMBLY_FRAGMENT_MAX: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewSource {
    MailFilter,
    Recipient,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList {
    pub tokens: Vec<String>,
    pub source: ViewSource,
}

impl TokenList {
    pub fn set(&self) -> BTreeSet<&str> {
        self.tokens.iter().map(String::as_str).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    SplitsVisibleWord,
    WholeWordBetweenVisible,
    BlockRun,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcealedSpan {
    pub path: String,
    pub text: String,
    pub reasons: BTreeSet<ConcealReason>,
    pub boundary: Boundary,
    pub run_length_tokens: usize,
    pub run_length_chars: usize,
}

impl ConcealedSpan {
    pub fn has_token_char(&self) -> bool {
        self.text.chars().any(is_token_char)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewPair {
    pub mail_filter: TokenList,
    pub recipient: TokenList,
    pub concealed_spans: Vec<ConcealedSpan>,
    pub jaccard: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewConfig {
    pub visibility: VisibilityThresholds,
    /// A hidden run with at least this many tokens is a concealed block.
    pub paragraph_tokens: usize,
    /// A hidden run with at least this many non-whitespace characters is a
    /// concealed block.
    pub paragraph_chars: usize,
}

impl Default for ViewConfig {
    fn default() -> Self {
        ViewConfig {
            visibility: VisibilityThresholds::default(),
            paragraph_tokens: 4,
            paragraph_chars: 20,
        }
    }
}

pub fn is_token_char(c: char) -> bool {
    c.is_alphanumeric()
}

/// Splits on every non-alphanumeric character and lowercases.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !is_token_char(c))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone)]
enum Piece {
    Break {
        filter: bool,
        recipient: bool,
    },
    Text(TextPiece),
}

#[derive(Debug, Clone)]
struct TextPiece {
    node: Option<NodeId>,
    text: String,
    in_filter: bool,
    visible: bool,
    reasons: BTreeSet<ConcealReason>,
    /// Table-assembly fragments carry their own boundary and sit outside
    /// run grouping.
    assembled: bool,
}

impl TextPiece {
    fn has_content(&self) -> bool {
        self.text.chars().any(|c| !c.is_whitespace())
    }
}

fn breaks_line(tag: &str, display: Display) -> bool {
    let blockish = |d: Display| !matches!(d, Display::Inline | Display::InlineBlock | Display::None);
    blockish(default_display(tag)) || blockish(display)
}

struct Flattener<'a> {
    sdom: &'a StyledDom,
    t: VisibilityThresholds,
    first_letter_targets: HashMap<NodeId, NodeId>,
    pieces: Vec<Piece>,
}

impl<'a> Flattener<'a> {
    fn new(sdom: &'a StyledDom, t: VisibilityThresholds) -> Self {
        let mut f = Flattener {
            sdom,
            t,
            first_letter_targets: HashMap::new(),
            pieces: Vec::new(),
        };
        f.find_first_letter_targets();
        f
    }

    fn excluded(&self, id: NodeId) -> bool {
        self.sdom
            .dom
            .tag(id)
            .is_some_and(|t| EXCLUDED_TAGS.contains(&t))
    }

    fn find_first_letter_targets(&mut self) {
        let dom = &self.sdom.dom;
        for id in dom.preorder() {
            let has_override = self
                .sdom
                .element_style(id)
                .is_some_and(|s| s.first_letter_override.is_some() && dom.is_element(id));
            if !has_override || self.excluded(id) {
                continue;
            }
            let mut stack: Vec<NodeId> = dom.children(id).iter().rev().copied().collect();
            while let Some(n) = stack.pop() {
                if self.excluded(n) {
                    continue;
                }
                if let Some(text) = dom.text(n) {
                    if text.chars().any(|c| !c.is_whitespace()) {
                        self.first_letter_targets.entry(n).or_insert(id);
                        break;
                    }
                }
                stack.extend(dom.children(n).iter().rev());
            }
        }
    }

    fn push_break(&mut self, recipient: bool) {
        self.pieces.push(Piece::Break {
            filter: true,
            recipient,
        });
    }

    fn walk(&mut self, id: NodeId) {
        let dom = &self.sdom.dom;
        match &dom.node(id).kind {
            NodeKind::Document => {
                for &c in dom.children(id) {
                    self.walk(c);
                }
            }
            NodeKind::Comment { .. } => {}
            NodeKind::Text { .. } => self.text(id),
            NodeKind::Element { tag, .. } => {
                if EXCLUDED_TAGS.contains(&tag.as_str()) {
                    return;
                }
                let style = self.sdom.style(id);
                let shown = !style.display_none;
                if tag == "br" {
                    self.push_break(shown);
                    return;
                }
                let block = breaks_line(tag, style.display);
                if block {
                    self.push_break(shown);
                }
                let assembled = tag == "tr" && self.assemble_row(id);
                if !assembled {
                    for &c in dom.children(id) {
                        self.walk(c);
                    }
                }
                if block {
                    self.push_break(shown);
                }
            }
        }
    }

    fn text(&mut self, id: NodeId) {
        let dom = &self.sdom.dom;
        let text = dom.text(id).unwrap_or_default().to_string();
        let main = judge_visibility(self.sdom, id, &self.t);
        let piece = |text: String, visible: bool, reasons: BTreeSet<ConcealReason>| {
            Piece::Text(TextPiece {
                node: Some(id),
                text,
                in_filter: true,
                visible,
                reasons,
                assembled: false,
            })
        };
        let first_letter = self
            .first_letter_targets
            .get(&id)
            .and_then(|&block| judge_first_letter(self.sdom, id, block, &self.t));
        match first_letter {
            Some(fl) if fl.visible != main.visible => {
                let start = text.find(|c: char| !c.is_whitespace()).unwrap_or(0);
                let letter_len = text[start..].chars().next().map_or(0, char::len_utf8);
                let (head, rest) = text.split_at(start + letter_len);
                let mut head_reasons = fl.reasons.clone();
                let mut rest_reasons = main.reasons.clone();
                if fl.visible {
                    rest_reasons.insert(ConcealReason::Other);
                } else {
                    head_reasons.insert(ConcealReason::Other);
                }
                self.pieces.push(piece(head.to_string(), fl.visible, head_reasons));
                if !rest.is_empty() {
                    self.pieces.push(piece(rest.to_string(), main.visible, rest_reasons));
                }
            }
            _ => self.pieces.push(piece(text, main.visible, main.reasons)),
        }
    }

    /// Lines of one cell split at `<br>` and block boundaries, with the
    /// text nodes that make them up.
    fn cell_lines(&self, cell: NodeId) -> Option<(Vec<String>, Vec<NodeId>)> {
        let dom = &self.sdom.dom;
        let mut lines = vec![String::new()];
        let mut nodes = Vec::new();
        let mut stack: Vec<NodeId> = dom.children(cell).iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            match &dom.node(n).kind {
                NodeKind::Text { text } => {
                    if !judge_visibility(self.sdom, n, &self.t).visible {
                        return None;
                    }
                    lines.last_mut().expect("non-empty").push_str(text);
                    nodes.push(n);
                }
                NodeKind::Element { tag, .. } => {
                    if EXCLUDED_TAGS.contains(&tag.as_str()) {
                        continue;
                    }
                    if tag == "br" || breaks_line(tag, self.sdom.style(n).display) {
                        lines.push(String::new());
                    }
                    stack.extend(dom.children(n).iter().rev());
                }
                _ => {}
            }
        }
        while lines.last().is_some_and(|l| l.trim().is_empty()) {
            lines.pop();
        }
        Some((lines, nodes))
    }

    /// Detects a row whose cells hold short stacked fragments that read as
    /// whole words across the row, and emits it in reading order.
    fn assemble_row(&mut self, row: NodeId) -> bool {
        let dom = &self.sdom.dom;
        let cells: Vec<NodeId> = dom
            .children(row)
            .iter()
            .copied()
            .filter(|&c| matches!(dom.tag(c), Some("td" | "th")))
            .collect();
        if cells.len() < 2 {
            return false;
        }
        let mut columns = Vec::new();
        for &cell in &cells {
            let Some((lines, nodes)) = self.cell_lines(cell) else {
                return false;
            };
            let fragments_ok = lines.len() >= 2
                && lines.iter().all(|l| {
                    l.chars().filter(|c| !c.is_whitespace()).count() <= ASSEMBLY_FRAGMENT_MAX
                });
            if !fragments_ok {
                return false;
            }
            columns.push((lines, nodes));
        }

        for (_, nodes) in &columns {
            for &n in nodes {
                self.pieces.push(Piece::Text(TextPiece {
                    node: Some(n),
                    text: dom.text(n).unwrap_or_default().to_string(),
                    in_filter: true,
                    visible: false,
                    reasons: BTreeSet::from([ConcealReason::TableManipulation]),
                    assembled: true,
                }));
                self.pieces.push(Piece::Break {
                    filter: true,
                    recipient: false,
                });
            }
        }
        let depth = columns.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
        for i in 0..depth {
            let word: String = columns
                .iter()
                .filter_map(|(lines, _)| lines.get(i))
                .map(|l| l.trim())
                .collect();
            self.pieces.push(Piece::Text(TextPiece {
                node: None,
                text: word,
                in_filter: false,
                visible: true,
                reasons: BTreeSet::new(),
                assembled: false,
            }));
            self.pieces.push(Piece::Break {
                filter: false,
                recipient: true,
            });
        }
        true
    }
}

fn stream_text(pieces: &[Piece], recipient: bool) -> String {
    let mut out = String::new();
    for p in pieces {
        match p {
            Piece::Break { filter, recipient: r } => {
                if (recipient && *r) || (!recipient && *filter) {
                    out.push('\n');
                }
            }
            Piece::Text(t) => {
                if (recipient && t.visible) || (!recipient && t.in_filter) {
                    out.push_str(&t.text);
                }
            }
        }
    }
    out
}

/// Recipient-stream neighbours of a piece range: the last rendered
/// character before `start` and the first after `end`.
fn rendered_neighbours(pieces: &[Piece], start: usize, end: usize) -> (Option<char>, Option<char>) {
    let rendered = |p: &Piece| -> Option<String> {
        match p {
            Piece::Break { recipient: true, .. } => Some("\n".to_string()),
            Piece::Text(t) if t.visible && !t.text.is_empty() => Some(t.text.clone()),
            _ => None,
        }
    };
    let before = pieces[..start]
        .iter()
        .rev()
        .find_map(rendered)
        .and_then(|s| s.chars().last());
    let after = pieces[end + 1..]
        .iter()
        .find_map(rendered)
        .and_then(|s| s.chars().next());
    (before, after)
}

struct Run {
    start: usize,
    end: usize,
}

fn group_runs(pieces: &[Piece]) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut open: Option<Run> = None;
    for (i, p) in pieces.iter().enumerate() {
        let Piece::Text(t) = p else {
            continue;
        };
        if t.assembled {
            continue;
        }
        if !t.visible && t.in_filter {
            match &mut open {
                Some(run) => run.end = i,
                None => open = Some(Run { start: i, end: i }),
            }
        } else if t.visible && t.has_content() {
            runs.extend(open.take());
        }
    }
    runs.extend(open);
    runs
}

fn spans_from_pieces(sdom: &StyledDom, pieces: &[Piece], config: &ViewConfig) -> Vec<ConcealedSpan> {
    let mut indexed: Vec<(usize, ConcealedSpan)> = Vec::new();
    let path = |node: Option<NodeId>| node.map(|n| sdom.dom.path(n)).unwrap_or_default();

    for run in group_runs(pieces) {
        let mut text = String::new();
        for p in &pieces[run.start..=run.end] {
            match p {
                Piece::Break { filter: true, .. } => text.push('\n'),
                Piece::Text(t) if t.assembled => text.push(' '),
                Piece::Text(t) if t.in_filter => text.push_str(&t.text),
                _ => {}
            }
        }
        let tokens = tokenize(&text).len();
        let chars = text.chars().filter(|c| !c.is_whitespace()).count();
        let boundary = if tokens >= config.paragraph_tokens || chars >= config.paragraph_chars {
            Boundary::BlockRun
        } else {
            let (before, after) = rendered_neighbours(pieces, run.start, run.end);
            let glued_before = before.is_some_and(is_token_char)
                && text.chars().next().is_some_and(|c| !c.is_whitespace());
            let glued_after = after.is_some_and(is_token_char)
                && text.chars().last().is_some_and(|c| !c.is_whitespace());
            if glued_before || glued_after {
                Boundary::SplitsVisibleWord
            } else {
                Boundary::WholeWordBetweenVisible
            }
        };
        for (i, p) in pieces.iter().enumerate().take(run.end + 1).skip(run.start) {
            if let Piece::Text(t) = p {
                if !t.visible && t.in_filter && !t.assembled && t.has_content() {
                    indexed.push((
                        i,
                        ConcealedSpan {
                            path: path(t.node),
                            text: t.text.clone(),
                            reasons: t.reasons.clone(),
                            boundary,
                            run_length_tokens: tokens,
                            run_length_chars: chars,
                        },
                    ));
                }
            }
        }
    }

    for (i, p) in pieces.iter().enumerate() {
        if let Piece::Text(t) = p {
            if t.assembled && t.has_content() {
                indexed.push((
                    i,
                    ConcealedSpan {
                        path: path(t.node),
                        text: t.text.clone(),
                        reasons: t.reasons.clone(),
                        boundary: Boundary::SplitsVisibleWord,
                        run_length_tokens: tokenize(&t.text).len(),
                        run_length_chars: t.text.chars().filter(|c| !c.is_whitespace()).count(),
                    },
                ));
            }
        }
    }
    indexed.sort_by_key(|(i, _)| *i);
    indexed.into_iter().map(|(_, s)| s).collect()
}

fn flatten(sdom: &StyledDom, config: &ViewConfig) -> Vec<Piece> {
    let mut f = Flattener::new(sdom, config.visibility);
    f.walk(sdom.dom.root());
    f.pieces
}

/// Both views and the concealed spans of an already-styled document.
pub fn views_from_styled(sdom: &StyledDom, config: &ViewConfig) -> ViewPair {
    let pieces = flatten(sdom, config);
    let mail_filter = TokenList {
        tokens: tokenize(&stream_text(&pieces, false)),
        source: ViewSource::MailFilter,
    };
    let recipient = TokenList {
        tokens: tokenize(&stream_text(&pieces, true)),
        source: ViewSource::Recipient,
    };
    let concealed_spans = spans_from_pieces(sdom, &pieces, config);
    let jaccard = jaccard_distance(&mail_filter.set(), &recipient.set());
    ViewPair {
        mail_filter,
        recipient,
        concealed_spans,
        jaccard,
    }
}

/// Parses, resolves and extracts both views from an HTML string.
pub fn extract_views(html: &str, config: &ViewConfig) -> ViewPair {
    let sdom = resolve_styles(crate::dom::parse_html(html));
    views_from_styled(&sdom, config)
}

/// Every renderable text node in source order, tokenized.
pub fn mail_filter_view(html: &str) -> TokenList {
    extract_views(html, &ViewConfig::default()).mail_filter
}

/// Visible text tokens and the concealed spans of a styled document.
pub fn recipient_view(sdom: &StyledDom, config: &ViewConfig) -> (TokenList, Vec<ConcealedSpan>) {
    let pair = views_from_styled(sdom, config);
    (pair.recipient, pair.concealed_spans)
}
