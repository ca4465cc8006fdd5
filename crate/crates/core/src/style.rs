//! Cascade resolution for the visibility-relevant property subset.
//!
//! Origins, weakest first: user-agent defaults, HTML presentational
//! attributes, `<style>` rules (ordered by specificity then source order),
//! the inline `style` attribute. `!important` declarations outrank all
//! normal ones. `color`, `font-size` and `visibility` inherit; everything
//! else resets per element. A few derived values are propagated down the
//! tree during resolution so that judging a text node never needs another
//! cascade pass: the effective background, `display:none` ancestry,
//! float ancestry, accumulated opacity and table collapse flags.

use serde::Serialize;

use crate::color::{parse_css_color, parse_legacy_color, Rgba};
use crate::css::{parse_declarations, parse_stylesheet, Declaration, PseudoElement, Specificity, Stylesheet};
use crate::dom::{Dom, NodeId, NodeKind};

pub const DEFAULT_FONT_SIZE: f64 = 16.0;

/// `<font size=N>` in pixels for N = 1..=7.
pub const FONT_SIZE_ATTR_PX: [f64; 7] = [10.0, 13.0, 16.0, 18.0, 24.0, 32.0, 48.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Display {
    Inline,
    Block,
    InlineBlock,
    ListItem,
    Table,
    TableRowGroup,
    TableRow,
    TableCell,
    TableColumn,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Visibility {
    Visible,
    Hidden,
    Collapse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Float {
    None,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Static,
    Relative,
    Absolute,
    Fixed,
}

/// Declared box offsets in px; `None` when unset or not resolvable.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Offsets {
    pub left: Option<f64>,
    pub top: Option<f64>,
    pub right: Option<f64>,
    pub margin_left: Option<f64>,
    pub margin_top: Option<f64>,
    pub text_indent: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FirstLetterOverride {
    pub color: Rgba,
    pub font_size: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct TableCollapse {
    pub zero_width_cell: bool,
    pub zero_height_cell: bool,
    pub zero_height_row: bool,
    pub zero_width_column: bool,
    pub zero_size_table: bool,
}

impl TableCollapse {
    pub fn any(&self) -> bool {
        self.zero_width_cell
            || self.zero_height_cell
            || self.zero_height_row
            || self.zero_width_column
            || self.zero_size_table
    }

    fn union(self, other: TableCollapse) -> TableCollapse {
        TableCollapse {
            zero_width_cell: self.zero_width_cell || other.zero_width_cell,
            zero_height_cell: self.zero_height_cell || other.zero_height_cell,
            zero_height_row: self.zero_height_row || other.zero_height_row,
            zero_width_column: self.zero_width_column || other.zero_width_column,
            zero_size_table: self.zero_size_table || other.zero_size_table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedStyle {
    pub color: Rgba,
    /// Own background; `None` is transparent.
    pub background: Option<Rgba>,
    /// Nearest non-transparent background up the tree, white at the root.
    pub effective_background: Rgba,
    pub font_size: f64,
    pub display: Display,
    /// This element or an ancestor has `display: none`.
    pub display_none: bool,
    pub visibility: Visibility,
    pub float: Float,
    /// This element or an ancestor is floated out of normal flow.
    pub floated: bool,
    pub position: Position,
    pub offsets: Offsets,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub max_width: Option<f64>,
    pub max_height: Option<f64>,
    pub overflow_hidden: bool,
    pub opacity: f64,
    pub effective_opacity: f64,
    /// This element or an ancestor is a zero-size, overflow-clipped box
    /// outside table structure.
    pub zero_box_clip: bool,
    pub first_letter_override: Option<FirstLetterOverride>,
    pub table_collapse: TableCollapse,
}

impl ResolvedStyle {
    pub fn root() -> ResolvedStyle {
        ResolvedStyle {
            color: Rgba::BLACK,
            background: None,
            effective_background: Rgba::WHITE,
            font_size: DEFAULT_FONT_SIZE,
            display: Display::Block,
            display_none: false,
            visibility: Visibility::Visible,
            float: Float::None,
            floated: false,
            position: Position::Static,
            offsets: Offsets::default(),
            width: None,
            height: None,
            max_width: None,
            max_height: None,
            overflow_hidden: false,
            opacity: 1.0,
            effective_opacity: 1.0,
            zero_box_clip: false,
            first_letter_override: None,
            table_collapse: TableCollapse::default(),
        }
    }

    fn inherit_from(parent: &ResolvedStyle) -> ResolvedStyle {
        ResolvedStyle {
            color: parent.color,
            font_size: parent.font_size,
            visibility: parent.visibility,
            display: Display::Inline,
            ..ResolvedStyle::root()
        }
    }
}

/// A parsed document with one resolved style per element (and the root).
#[derive(Debug, Clone)]
pub struct StyledDom {
    pub dom: Dom,
    styles: Vec<Option<ResolvedStyle>>,
}

impl StyledDom {
    /// Style of an element, or of a text/comment node's parent element.
    pub fn style(&self, id: NodeId) -> &ResolvedStyle {
        let mut cur = id;
        loop {
            if let Some(s) = &self.styles[cur] {
                return s;
            }
            match self.dom.parent(cur) {
                Some(p) => cur = p,
                None => unreachable!("root always carries a style"),
            }
        }
    }

    pub fn element_style(&self, id: NodeId) -> Option<&ResolvedStyle> {
        self.styles[id].as_ref()
    }
}

const BLOCK_TAGS: &[&str] = &[
    "address", "article", "aside", "blockquote", "body", "center", "dd", "details", "dialog", "dir",
    "div", "dl", "dt", "fieldset", "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4",
    "h5", "h6", "header", "hgroup", "hr", "html", "legend", "main", "menu", "nav", "ol", "p", "pre",
    "section", "summary", "ul", "caption", "listing", "plaintext", "xmp",
];

const NON_RENDERED_TAGS: &[&str] = &[
    "head", "title", "style", "script", "meta", "link", "base", "template", "noscript", "area",
    "datalist", "param", "source", "track", "noembed", "noframes",
];

/// Display value a user agent assigns by tag name.
pub fn default_display(tag: &str) -> Display {
    match tag {
        "li" => Display::ListItem,
        "table" => Display::Table,
        "tr" => Display::TableRow,
        "td" | "th" => Display::TableCell,
        "thead" | "tbody" | "tfoot" => Display::TableRowGroup,
        "col" | "colgroup" => Display::TableColumn,
        t if BLOCK_TAGS.contains(&t) => Display::Block,
        t if NON_RENDERED_TAGS.contains(&t) => Display::None,
        _ => Display::Inline,
    }
}

fn decl(property: &str, value: impl Into<String>) -> Declaration {
    Declaration {
        property: property.to_string(),
        value: value.into(),
        important: false,
    }
}

fn user_agent_declarations(dom: &Dom, id: NodeId, tag: &str) -> Vec<Declaration> {
    let mut out = Vec::new();
    let size = match tag {
        "h1" => Some("2em"),
        "h2" => Some("1.5em"),
        "h3" => Some("1.17em"),
        "h5" => Some("0.83em"),
        "h6" => Some("0.67em"),
        "small" | "sub" | "sup" => Some("smaller"),
        "big" => Some("larger"),
        _ => None,
    };
    if let Some(s) = size {
        out.push(decl("font-size", s));
    }
    if tag == "a" && dom.attr(id, "href").is_some() {
        out.push(decl("color", "#0000EE"));
    }
    if dom.attr(id, "hidden").is_some()
        || (tag == "input" && dom.attr(id, "type").is_some_and(|t| t.eq_ignore_ascii_case("hidden")))
    {
        out.push(decl("display", "none"));
    }
    out
}

/// Legacy `<font size>` value in px. Relative forms (`+1`, `-2`) offset the
/// default size 3.
pub fn font_size_attr_px(value: &str) -> Option<f64> {
    let v = value.trim();
    let (relative, digits) = match v.as_bytes().first()? {
        b'+' => (1, &v[1..]),
        b'-' => (-1, &v[1..]),
        _ => (0, v),
    };
    let digits: String = digits.chars().take_while(|c| c.is_ascii_digit()).collect();
    let n: i64 = digits.parse().ok()?;
    let level = if relative == 0 { n } else { 3 + relative * n };
    let level = level.clamp(1, 7) as usize;
    Some(FONT_SIZE_ATTR_PX[level - 1])
}

/// Legacy dimension attribute (`width=0`, `height="0px"`, `width=50%`).
fn dimension_attr(value: &str) -> Option<String> {
    let v = value.trim();
    let digits: String = v.chars().take_while(|c| c.is_ascii_digit() || *c == '.').collect();
    if digits.is_empty() {
        return None;
    }
    let rest = v[digits.len()..].trim_start();
    if rest.starts_with('%') {
        Some(format!("{digits}%"))
    } else {
        Some(format!("{digits}px"))
    }
}

fn presentational_declarations(dom: &Dom, id: NodeId, tag: &str) -> Vec<Declaration> {
    let mut out = Vec::new();
    let color_attr = |name: &str| dom.attr(id, name).and_then(parse_legacy_color);
    match tag {
        "font" => {
            if let Some(c) = color_attr("color") {
                out.push(decl("color", c.to_string()));
            }
            if let Some(px) = dom.attr(id, "size").and_then(font_size_attr_px) {
                out.push(decl("font-size", format!("{px}px")));
            }
        }
        "body" => {
            if let Some(c) = color_attr("text") {
                out.push(decl("color", c.to_string()));
            }
        }
        _ => {}
    }
    if matches!(tag, "body" | "table" | "tr" | "td" | "th" | "tbody" | "thead" | "tfoot") {
        if let Some(c) = color_attr("bgcolor") {
            out.push(decl("background-color", c.to_string()));
        }
    }
    if matches!(tag, "table" | "tr" | "td" | "th" | "col" | "colgroup" | "div" | "img" | "iframe") {
        for dim in ["width", "height"] {
            if let Some(v) = dom.attr(id, dim).and_then(dimension_attr) {
                out.push(decl(dim, v));
            }
        }
    }
    out
}

/// A length in px. Unitless numbers are px, as quirks mode allows.
/// `em`-relative values resolve against `em_base`; percentages against
/// `percent_base` when one is given.
pub fn parse_length(value: &str, em_base: f64, percent_base: Option<f64>) -> Option<f64> {
    let v = value.trim().to_ascii_lowercase();
    let split = v
        .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+'))
        .unwrap_or(v.len());
    let (num, unit) = v.split_at(split);
    let n: f64 = num.parse().ok()?;
    if !n.is_finite() {
        return None;
    }
    let px = match unit.trim() {
        "" | "px" => n,
        "pt" => n * 96.0 / 72.0,
        "pc" => n * 16.0,
        "in" => n * 96.0,
        "cm" => n * 96.0 / 2.54,
        "mm" => n * 96.0 / 25.4,
        "em" => n * em_base,
        "rem" => n * DEFAULT_FONT_SIZE,
        "ex" | "ch" => n * em_base * 0.5,
        "%" => n / 100.0 * percent_base?,
        _ => return None,
    };
    Some(px)
}

/// Computed `font-size` in px given the parent's computed size.
pub fn parse_font_size(value: &str, parent_px: f64) -> Option<f64> {
    let v = value.trim().to_ascii_lowercase();
    let keyword = match v.as_str() {
        "xx-small" => Some(9.0),
        "x-small" => Some(10.0),
        "small" => Some(13.0),
        "medium" => Some(16.0),
        "large" => Some(18.0),
        "x-large" => Some(24.0),
        "xx-large" => Some(32.0),
        "xxx-large" => Some(48.0),
        "smaller" => Some(parent_px / 1.2),
        "larger" => Some(parent_px * 1.2),
        _ => None,
    };
    if keyword.is_some() {
        return keyword;
    }
    let px = parse_length(&v, parent_px, Some(parent_px))?;
    (px >= 0.0).then_some(px)
}

/// Splits a shorthand value on whitespace, keeping `fn(...)` groups whole.
fn shorthand_tokens(value: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for ch in value.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                cur.push(ch);
            }
            c if c.is_whitespace() && depth <= 0 => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_display(v: &str) -> Option<Display> {
    Some(match v {
        "none" => Display::None,
        "inline" | "contents" => Display::Inline,
        "block" | "flex" | "grid" | "flow-root" => Display::Block,
        "inline-block" | "inline-flex" | "inline-grid" | "inline-table" => Display::InlineBlock,
        "list-item" => Display::ListItem,
        "table" => Display::Table,
        "table-row" => Display::TableRow,
        "table-cell" => Display::TableCell,
        "table-row-group" | "table-header-group" | "table-footer-group" => Display::TableRowGroup,
        "table-column" | "table-column-group" => Display::TableColumn,
        _ => return None,
    })
}

fn apply(decl: &Declaration, style: &mut ResolvedStyle, parent: &ResolvedStyle) {
    let raw = decl.value.trim();
    let v = raw.to_ascii_lowercase();
    let inherit = v == "inherit";
    let length = |s: &str| parse_length(s, style.font_size, None);
    match decl.property.as_str() {
        "color" => {
            if inherit {
                style.color = parent.color;
            } else if v == "initial" {
                style.color = Rgba::BLACK;
            } else if let Some(c) = parse_css_color(raw) {
                style.color = c;
            }
        }
        "background-color" => {
            if inherit {
                style.background = parent.background;
            } else if let Some(c) = parse_css_color(raw) {
                style.background = (!c.is_transparent()).then_some(c);
            }
        }
        "background" => {
            if inherit {
                style.background = parent.background;
            } else {
                // the shorthand resets the colour when none is listed
                style.background = shorthand_tokens(raw)
                    .iter()
                    .filter(|t| !t.to_ascii_lowercase().starts_with("url("))
                    .find_map(|t| parse_css_color(t))
                    .filter(|c| !c.is_transparent());
            }
        }
        "font-size" => {
            if inherit {
                style.font_size = parent.font_size;
            } else if let Some(px) = parse_font_size(&v, parent.font_size) {
                style.font_size = px;
            }
        }
        "font" => {
            let size = shorthand_tokens(&v).iter().find_map(|t| {
                let head = t.split('/').next().unwrap_or("");
                let starts_numeric = head.starts_with(|c: char| c.is_ascii_digit() || c == '.');
                let is_keyword = matches!(
                    head,
                    "xx-small" | "x-small" | "small" | "medium" | "large" | "x-large" | "xx-large"
                        | "smaller" | "larger"
                );
                // a bare number in the shorthand is a weight, not a size
                let has_unit = head.ends_with(|c: char| c.is_ascii_alphabetic() || c == '%');
                if (starts_numeric && has_unit) || is_keyword {
                    parse_font_size(head, parent.font_size)
                } else {
                    None
                }
            });
            if let Some(px) = size {
                style.font_size = px;
            }
        }
        "display" => {
            if inherit {
                style.display = parent.display;
            } else if let Some(d) = parse_display(&v) {
                style.display = d;
            }
        }
        "visibility" => match v.as_str() {
            "visible" => style.visibility = Visibility::Visible,
            "hidden" => style.visibility = Visibility::Hidden,
            "collapse" => style.visibility = Visibility::Collapse,
            "inherit" => style.visibility = parent.visibility,
            _ => {}
        },
        "float" => match v.as_str() {
            "left" => style.float = Float::Left,
            "right" => style.float = Float::Right,
            "none" => style.float = Float::None,
            _ => {}
        },
        "position" => match v.as_str() {
            "static" => style.position = Position::Static,
            "relative" | "sticky" => style.position = Position::Relative,
            "absolute" => style.position = Position::Absolute,
            "fixed" => style.position = Position::Fixed,
            _ => {}
        },
        "left" => style.offsets.left = length(&v),
        "top" => style.offsets.top = length(&v),
        "right" => style.offsets.right = length(&v),
        "margin-left" => style.offsets.margin_left = length(&v),
        "margin-top" => style.offsets.margin_top = length(&v),
        "text-indent" => style.offsets.text_indent = length(&v),
        "margin" => {
            let parts: Vec<Option<f64>> = shorthand_tokens(&v).iter().map(|t| length(t)).collect();
            if !parts.is_empty() {
                style.offsets.margin_top = parts[0];
                style.offsets.margin_left = match parts.len() {
                    1 => parts[0],
                    2 | 3 => parts[1],
                    _ => parts[3],
                };
            }
        }
        "width" => style.width = length(&v).or_else(|| zero_percent(&v)),
        "height" => style.height = length(&v).or_else(|| zero_percent(&v)),
        "max-width" => style.max_width = length(&v).or_else(|| zero_percent(&v)),
        "max-height" => style.max_height = length(&v).or_else(|| zero_percent(&v)),
        "overflow" | "overflow-x" | "overflow-y" => {
            if matches!(v.as_str(), "hidden" | "clip") {
                style.overflow_hidden = true;
            }
        }
        "opacity" => {
            let parsed = match v.strip_suffix('%') {
                Some(p) => p.trim().parse::<f64>().ok().map(|x| x / 100.0),
                None => v.parse::<f64>().ok(),
            };
            if let Some(o) = parsed {
                style.opacity = o.clamp(0.0, 1.0);
            }
        }
        _ => {}
    }
}

fn zero_percent(v: &str) -> Option<f64> {
    let n: f64 = v.strip_suffix('%')?.trim().parse().ok()?;
    (n == 0.0).then_some(0.0)
}

type Weighted = ((bool, u8, Specificity, usize), Declaration);

fn sort_and_apply(mut decls: Vec<Weighted>, style: &mut ResolvedStyle, parent: &ResolvedStyle) {
    decls.sort_by_key(|d| d.0);
    for (_, d) in &decls {
        apply(d, style, parent);
    }
}

fn collect_stylesheet(dom: &Dom) -> Stylesheet {
    let mut sheet = Stylesheet::default();
    for id in dom.preorder() {
        if dom.tag(id) == Some("style") {
            let css: String = dom
                .children(id)
                .iter()
                .filter_map(|&c| dom.text(c))
                .collect();
            let parsed = parse_stylesheet(&css, sheet.rules.len());
            sheet.rules.extend(parsed.rules);
        }
    }
    sheet
}

/// Resolves styles for every element of `dom`.
pub fn resolve_styles(dom: Dom) -> StyledDom {
    let sheet = collect_stylesheet(&dom);
    let mut styles: Vec<Option<ResolvedStyle>> = vec![None; dom.len()];
    styles[dom.root()] = Some(ResolvedStyle::root());

    for id in dom.preorder() {
        let NodeKind::Element { tag, .. } = &dom.node(id).kind else {
            continue;
        };
        let parent_id = dom.parent(id).expect("elements have parents");
        let parent = styles[parent_id]
            .clone()
            .expect("parents are resolved before children");
        let mut style = ResolvedStyle::inherit_from(&parent);
        style.display = default_display(tag);

        let mut decls: Vec<Weighted> = Vec::new();
        let mut first_letter: Vec<Weighted> = Vec::new();
        for d in user_agent_declarations(&dom, id, tag) {
            decls.push(((d.important, 0, (0, 0, 0), 0), d));
        }
        for d in presentational_declarations(&dom, id, tag) {
            decls.push(((d.important, 1, (0, 0, 0), 0), d));
        }
        for rule in &sheet.rules {
            if !rule.selector.matches(&dom, id) {
                continue;
            }
            let target = match rule.selector.pseudo {
                Some(PseudoElement::FirstLetter) => &mut first_letter,
                None => &mut decls,
            };
            for d in &rule.declarations {
                target.push(((d.important, 2, rule.selector.specificity(), rule.order), d.clone()));
            }
        }
        if let Some(inline) = dom.attr(id, "style") {
            for d in parse_declarations(inline) {
                decls.push(((d.important, 3, (0, 0, 0), 0), d));
            }
        }
        sort_and_apply(decls, &mut style, &parent);

        if !first_letter.is_empty() && is_block_container(style.display) {
            let mut pseudo = style.clone();
            sort_and_apply(first_letter, &mut pseudo, &style);
            style.first_letter_override = Some(FirstLetterOverride {
                color: pseudo.color,
                font_size: pseudo.font_size,
            });
        }

        style.display_none = parent.display_none || style.display == Display::None;
        style.floated = parent.floated || style.float != Float::None;
        style.effective_opacity = parent.effective_opacity * style.opacity;
        style.effective_background = match style.background {
            Some(bg) if bg.is_opaque() => bg,
            Some(bg) => bg.over(parent.effective_background),
            None => parent.effective_background,
        };
        let in_table = matches!(
            style.display,
            Display::Table | Display::TableRow | Display::TableCell | Display::TableRowGroup
        );
        let zero = |v: Option<f64>| v.is_some_and(|x| x <= 0.0);
        let own_clip = !in_table
            && style.overflow_hidden
            && (zero(style.width) || zero(style.height) || zero(style.max_width) || zero(style.max_height));
        style.zero_box_clip = parent.zero_box_clip || own_clip;
        style.table_collapse = parent
            .table_collapse
            .union(own_table_collapse(&dom, id, tag, &style, &styles));

        styles[id] = Some(style);
    }
    StyledDom { dom, styles }
}

fn is_block_container(d: Display) -> bool {
    matches!(
        d,
        Display::Block | Display::ListItem | Display::TableCell | Display::InlineBlock
    )
}

fn own_table_collapse(
    dom: &Dom,
    id: NodeId,
    tag: &str,
    style: &ResolvedStyle,
    styles: &[Option<ResolvedStyle>],
) -> TableCollapse {
    let zero = |v: Option<f64>| v.is_some_and(|x| x <= 0.0);
    let mut out = TableCollapse::default();
    match style.display {
        Display::Table => {
            out.zero_size_table = zero(style.width) || zero(style.height);
        }
        Display::TableRow => out.zero_height_row = zero(style.height),
        Display::TableCell => {
            out.zero_width_cell = zero(style.width);
            out.zero_height_cell = zero(style.height);
            if tag == "td" || tag == "th" {
                out.zero_width_column = in_zero_width_column(dom, id, styles);
            }
        }
        _ => {}
    }
    out
}

/// Whether the cell's column is declared zero-width through `<col>`.
fn in_zero_width_column(dom: &Dom, cell: NodeId, styles: &[Option<ResolvedStyle>]) -> bool {
    let Some(row) = dom.parent(cell) else {
        return false;
    };
    let Some(table) = dom.ancestors(cell).find(|&a| dom.tag(a) == Some("table")) else {
        return false;
    };
    let span_of = |n: NodeId, attr: &str| -> usize {
        dom.attr(n, attr)
            .and_then(|s| s.trim().parse::<usize>().ok())
            .unwrap_or(1)
            .max(1)
    };
    let mut column = 0;
    for &sibling in dom.children(row) {
        if sibling == cell {
            break;
        }
        if matches!(dom.tag(sibling), Some("td" | "th")) {
            column += span_of(sibling, "colspan");
        }
    }
    let mut index = 0;
    let mut cols = Vec::new();
    for &child in dom.children(table) {
        match dom.tag(child) {
            Some("col") => cols.push(child),
            Some("colgroup") => {
                let inner: Vec<_> = dom
                    .children(child)
                    .iter()
                    .copied()
                    .filter(|&c| dom.tag(c) == Some("col"))
                    .collect();
                if inner.is_empty() {
                    cols.push(child);
                } else {
                    cols.extend(inner);
                }
            }
            _ => {}
        }
    }
    for col in cols {
        let span = span_of(col, "span");
        if column >= index && column < index + span {
            return styles[col]
                .as_ref()
                .is_some_and(|s| s.width.is_some_and(|w| w <= 0.0));
        }
        index += span;
    }
    false
}
