//! Per-text-node visibility decisions over a [`StyledDom`].
//!
//! Each predicate reads declared values only; there is no layout engine.
//! A node is concealed when any hard predicate holds. Floating is a soft
//! predicate: on its own a float just moves text, so it is only reported
//! as a contributing [`ConcealReason::TextPosition`] for text that is
//! already concealed by something else.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::color::{contrast_ratio, Rgba};
use crate::dom::{NodeId, NodeKind};
use crate::style::{Position, ResolvedStyle, StyledDom, Visibility};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConcealReason {
    FontColour,
    FontSize,
    TextPosition,
    TableManipulation,
    Other,
}

impl ConcealReason {
    pub const ALL: [ConcealReason; 5] = [
        ConcealReason::FontColour,
        ConcealReason::FontSize,
        ConcealReason::TextPosition,
        ConcealReason::TableManipulation,
        ConcealReason::Other,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityThresholds {
    /// Text whose contrast ratio against its effective background is
    /// below this value is unreadable.
    pub contrast_min: f64,
    /// Text at or below this computed size (px) is unreadable.
    pub font_size_max: f64,
    /// Nominal viewport width (px) for off-screen offsets.
    pub viewport_width: f64,
}

impl Default for VisibilityThresholds {
    fn default() -> Self {
        VisibilityThresholds {
            contrast_min: 1.05,
            font_size_max: 3.0,
            viewport_width: 800.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisibilityJudgment {
    pub visible: bool,
    pub reasons: BTreeSet<ConcealReason>,
}

impl VisibilityJudgment {
    pub fn visible() -> Self {
        VisibilityJudgment {
            visible: true,
            reasons: BTreeSet::new(),
        }
    }

    pub fn from_reasons(reasons: BTreeSet<ConcealReason>) -> Self {
        VisibilityJudgment {
            visible: reasons.is_empty(),
            reasons,
        }
    }
}

/// Judges a text node (or element) using the style of its element.
pub fn judge_visibility(sdom: &StyledDom, node: NodeId, t: &VisibilityThresholds) -> VisibilityJudgment {
    let style = sdom.style(node);
    judge_with(sdom, node, style.color, style.font_size, t)
}

/// Judges the `:first-letter` box of `block` for a letter that sits in
/// `node`. `None` when the block has no first-letter override.
pub fn judge_first_letter(
    sdom: &StyledDom,
    node: NodeId,
    block: NodeId,
    t: &VisibilityThresholds,
) -> Option<VisibilityJudgment> {
    let over = sdom.element_style(block)?.first_letter_override?;
    Some(judge_with(sdom, node, over.color, over.font_size, t))
}

fn judge_with(
    sdom: &StyledDom,
    node: NodeId,
    color: Rgba,
    font_size: f64,
    t: &VisibilityThresholds,
) -> VisibilityJudgment {
    let style = sdom.style(node);
    let mut reasons = BTreeSet::new();
    if color.is_transparent() || contrast_ratio(color, style.effective_background) < t.contrast_min {
        reasons.insert(ConcealReason::FontColour);
    }
    if font_size <= t.font_size_max {
        reasons.insert(ConcealReason::FontSize);
    }
    if style.display_none || style.visibility != Visibility::Visible || offscreen(sdom, node, t) {
        reasons.insert(ConcealReason::TextPosition);
    }
    if style.table_collapse.any() {
        reasons.insert(ConcealReason::TableManipulation);
    }
    if style.effective_opacity <= 0.0 || style.zero_box_clip {
        reasons.insert(ConcealReason::Other);
    }
    if !reasons.is_empty() && style.floated {
        reasons.insert(ConcealReason::TextPosition);
    }
    VisibilityJudgment::from_reasons(reasons)
}

/// Whether the node or an ancestor declares an offset that moves it a full
/// viewport width (or more) away from the visible page.
fn offscreen(sdom: &StyledDom, node: NodeId, t: &VisibilityThresholds) -> bool {
    let w = t.viewport_width;
    let far = |v: Option<f64>| v.is_some_and(|x| x <= -w || x >= w);
    let far_negative = |v: Option<f64>| v.is_some_and(|x| x <= -w);
    let start = if sdom.dom.is_element(node) {
        Some(node)
    } else {
        sdom.dom.parent(node)
    };
    let chain = start.into_iter().chain(start.into_iter().flat_map(|s| sdom.dom.ancestors(s)));
    for id in chain {
        let Some(s) = sdom.element_style(id) else {
            continue;
        };
        let o = &s.offsets;
        if s.position != Position::Static && (far(o.left) || far(o.right) || far_negative(o.top)) {
            return true;
        }
        if far(o.margin_left) || far_negative(o.margin_top) || far(o.text_indent) {
            return true;
        }
    }
    false
}

/// One row of the `--dump-styles` debug output.
#[derive(Debug, Clone, Serialize)]
pub struct StyleDumpEntry<'a> {
    pub node: NodeId,
    pub path: String,
    #[serde(flatten)]
    pub kind: &'a NodeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub style: Option<&'a ResolvedStyle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub judgment: Option<VisibilityJudgment>,
}

/// Every element with its resolved style and every non-blank text node
/// with its judgment, in document order.
pub fn dump_styles<'a>(sdom: &'a StyledDom, t: &VisibilityThresholds) -> Vec<StyleDumpEntry<'a>> {
    let dom = &sdom.dom;
    dom.preorder()
        .into_iter()
        .filter_map(|id| {
            let kind = &dom.node(id).kind;
            let (style, judgment) = match kind {
                NodeKind::Element { .. } => (sdom.element_style(id), None),
                NodeKind::Text { text } if !text.trim().is_empty() => (None, Some(judge_visibility(sdom, id, t))),
                _ => return None,
            };
            Some(StyleDumpEntry {
                node: id,
                path: dom.path(id),
                kind,
                style,
                judgment,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dom::{parse_html, NodeKind};
    use crate::style::resolve_styles;

    fn judge_text(html: &str, needle: &str) -> VisibilityJudgment {
        let sdom = resolve_styles(parse_html(html));
        let node = sdom
            .dom
            .preorder()
            .into_iter()
            .find(|&n| matches!(&sdom.dom.node(n).kind, NodeKind::Text { text } if text.contains(needle)))
            .expect("needle present");
        judge_visibility(&sdom, node, &VisibilityThresholds::default())
    }

    fn reasons(list: &[ConcealReason]) -> BTreeSet<ConcealReason> {
        list.iter().copied().collect()
    }

    #[test]
    fn plain_paragraph_is_visible() {
        assert_eq!(judge_text("<p>hello</p>", "hello"), VisibilityJudgment::visible());
    }

    #[test]
    fn one_pixel_font() {
        let j = judge_text(r#"Pil<font style="FONT-SIZE: 1px">#</font>l"#, "#");
        assert_eq!(j.reasons, reasons(&[ConcealReason::FontSize]));
    }

    #[test]
    fn float_small_white_span() {
        let j = judge_text(
            r#"<td align="left">Get the great di<span style="FONT-SIZE: 2px; FLOAT: right; COLOR: white"> jzw </span>scou"#,
            "jzw",
        );
        assert_eq!(
            j.reasons,
            reasons(&[ConcealReason::FontColour, ConcealReason::FontSize, ConcealReason::TextPosition])
        );
    }

    #[test]
    fn float_alone_is_not_concealment() {
        assert!(judge_text(r#"<span style="float:right">menu</span>"#, "menu").visible);
    }

    #[test]
    fn near_white_font_colour() {
        let j = judge_text("<font color=#fffffc size=2>prolate balfour</font>", "prolate");
        assert_eq!(j.reasons, reasons(&[ConcealReason::FontColour]));
    }

    #[test]
    fn white_on_dark_background_is_visible() {
        assert!(judge_text(r##"<table bgcolor="#000000"><tr><td><font color=white>shown</font></td></tr></table>"##, "shown").visible);
    }

    #[test]
    fn transparent_text() {
        let j = judge_text(r#"<span style="color: rgba(0,0,0,0)">gone</span>"#, "gone");
        assert_eq!(j.reasons, reasons(&[ConcealReason::FontColour]));
    }

    #[test]
    fn display_none_and_visibility_hidden() {
        let j = judge_text(r#"<div style="display:none"><p><b>deep</b></p></div>"#, "deep");
        assert_eq!(j.reasons, reasons(&[ConcealReason::TextPosition]));
        let j = judge_text(r#"<span style="visibility:hidden">v</span>"#, "v");
        assert_eq!(j.reasons, reasons(&[ConcealReason::TextPosition]));
    }

    #[test]
    fn dump_lists_elements_and_judged_text() {
        let sdom = resolve_styles(parse_html(r#"<p>shown <span style="font-size:1px">tiny</span></p>"#));
        let dump = dump_styles(&sdom, &VisibilityThresholds::default());
        let json = serde_json::to_value(&dump).unwrap();
        let rows = json.as_array().unwrap();
        let span = rows.iter().find(|r| r["tag"] == "span").unwrap();
        assert_eq!(span["style"]["font_size"], 1.0);
        let tiny = rows.iter().find(|r| r["text"] == "tiny").unwrap();
        assert_eq!(tiny["judgment"]["reasons"], serde_json::json!(["FontSize"]));
        assert!(rows.iter().all(|r| r["kind"] != "comment"));
    }

    #[test]
    fn offscreen_positioning() {
        let j = judge_text(r#"<div style="position:absolute; left:-9999px">away</div>"#, "away");
        assert_eq!(j.reasons, reasons(&[ConcealReason::TextPosition]));
        assert!(judge_text(r#"<div style="position:absolute; left:-20px">near</div>"#, "near").visible);
        assert!(!judge_text(r#"<p style="text-indent:-5000px">ind</p>"#, "ind").visible);
    }

    #[test]
    fn zero_height_row() {
        let j = judge_text(r#"<table><tr style="height:0"><td>cell</td></tr></table>"#, "cell");
        assert_eq!(j.reasons, reasons(&[ConcealReason::TableManipulation]));
    }

    #[test]
    fn opacity_and_clipped_box() {
        let j = judge_text(r#"<span style="opacity:0">o</span>"#, "o");
        assert_eq!(j.reasons, reasons(&[ConcealReason::Other]));
        let j = judge_text(r#"<div style="height:0; overflow:hidden">c</div>"#, "c");
        assert_eq!(j.reasons, reasons(&[ConcealReason::Other]));
    }

    #[test]
    fn size_threshold_edges() {
        assert!(!judge_text(r#"<span style="font-size:1px">a</span>"#, "a").visible);
        assert!(!judge_text(r#"<span style="font-size:3px">a</span>"#, "a").visible);
        assert!(judge_text(r#"<span style="font-size:4px">a</span>"#, "a").visible);
    }

    #[test]
    fn first_letter_judged_separately() {
        let html = "<style>DIV {COLOR: #FAFFFB}\n DIV.b:first-letter {COLOR: #28ED2A}\n DIV:first-letter {FONT-SIZE: 300%}</style><DIV class=b>Seet!</DIV>";
        let sdom = resolve_styles(parse_html(html));
        let div = sdom.dom.find_tag("div").unwrap();
        let text = sdom.dom.children(div)[0];
        let t = VisibilityThresholds::default();
        assert_eq!(judge_visibility(&sdom, text, &t).reasons, reasons(&[ConcealReason::FontColour]));
        assert!(judge_first_letter(&sdom, text, div, &t).unwrap().visible);
    }
}
