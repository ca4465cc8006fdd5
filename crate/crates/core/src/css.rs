//! A small CSS reader covering what email visibility judgments need.
//!
//! Supported selectors: type, universal, `.class`, `#id`, descendant and
//! child combinators, `:link`/`:visited` (matched as `a[href]`) and the
//! `:first-letter` pseudo-element. Selectors using anything else are
//! dropped individually; the rest of their rule still applies. At-rules
//! (`@media`, `@font-face`, ...) are skipped. Declarations recover one at a
//! time, so a malformed declaration never takes its neighbours with it.

use crate::dom::{Dom, NodeId};

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub property: String,
    pub value: String,
    pub important: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combinator {
    Descendant,
    Child,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Compound {
    pub tag: Option<String>,
    pub id: Option<String>,
    pub classes: Vec<String>,
    pub link: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoElement {
    FirstLetter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selector {
    /// Rightmost compound is the subject; each entry's combinator links it
    /// to the compound on its left (ignored for the first entry).
    pub parts: Vec<(Combinator, Compound)>,
    pub pseudo: Option<PseudoElement>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub selector: Selector,
    pub declarations: Vec<Declaration>,
    /// Position in the document's combined stylesheet order.
    pub order: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Stylesheet {
    pub rules: Vec<Rule>,
}

pub type Specificity = (u32, u32, u32);

impl Selector {
    pub fn specificity(&self) -> Specificity {
        let mut s = (0, 0, 0);
        for (_, c) in &self.parts {
            s.0 += u32::from(c.id.is_some());
            s.1 += c.classes.len() as u32 + u32::from(c.link);
            s.2 += u32::from(c.tag.is_some());
        }
        s.2 += u32::from(self.pseudo.is_some());
        s
    }

    pub fn matches(&self, dom: &Dom, element: NodeId) -> bool {
        let Some(((_, subject), rest)) = self.parts.split_last() else {
            return false;
        };
        if !compound_matches(subject, dom, element) {
            return false;
        }
        // the combinator to the left of each compound is stored on that compound's right neighbour
        let combinator = self.parts.last().map(|(c, _)| *c).unwrap_or(Combinator::Descendant);
        match_left(rest, combinator, dom, element)
    }
}

fn match_left(parts: &[(Combinator, Compound)], link: Combinator, dom: &Dom, from: NodeId) -> bool {
    let Some(((next_link, compound), rest)) = parts.split_last() else {
        return true;
    };
    match link {
        Combinator::Child => match dom.parent(from) {
            Some(p) if dom.is_element(p) && compound_matches(compound, dom, p) => {
                match_left(rest, *next_link, dom, p)
            }
            _ => false,
        },
        Combinator::Descendant => dom
            .ancestors(from)
            .filter(|&a| dom.is_element(a))
            .any(|a| compound_matches(compound, dom, a) && match_left(rest, *next_link, dom, a)),
    }
}

fn compound_matches(c: &Compound, dom: &Dom, element: NodeId) -> bool {
    let Some(tag) = dom.tag(element) else {
        return false;
    };
    if let Some(t) = &c.tag {
        if t != tag {
            return false;
        }
    }
    if let Some(id) = &c.id {
        // quirks mode: ids and classes compare case-insensitively
        if !dom
            .attr(element, "id")
            .is_some_and(|v| v.trim().eq_ignore_ascii_case(id))
        {
            return false;
        }
    }
    if !c.classes.is_empty() {
        let classes = dom.attr(element, "class").unwrap_or("");
        let has = |want: &str| classes.split_ascii_whitespace().any(|c| c.eq_ignore_ascii_case(want));
        if !c.classes.iter().all(|want| has(want)) {
            return false;
        }
    }
    if c.link && !(tag == "a" && dom.attr(element, "href").is_some()) {
        return false;
    }
    true
}

/// Removes `/* ... */` comments and the HTML comment delimiters that email
/// authors wrap around style blocks.
pub fn strip_comments(css: &str) -> String {
    let mut out = String::with_capacity(css.len());
    let mut rest = css;
    while let Some(start) = rest.find("/*") {
        out.push_str(&rest[..start]);
        match rest[start + 2..].find("*/") {
            Some(end) => rest = &rest[start + 2 + end + 2..],
            None => {
                rest = "";
                break;
            }
        }
    }
    out.push_str(rest);
    out.replace("<!--", " ").replace("-->", " ")
}

/// Splits on `sep` outside parentheses and quotes.
fn split_top_level(s: &str, sep: char) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut quote: Option<char> = None;
    let mut start = 0;
    for (i, ch) in s.char_indices() {
        match quote {
            Some(q) if ch == q => quote = None,
            Some(_) => {}
            None => match ch {
                '"' | '\'' => quote = Some(ch),
                '(' => depth += 1,
                ')' => depth -= 1,
                c if c == sep && depth <= 0 => {
                    parts.push(&s[start..i]);
                    start = i + ch.len_utf8();
                }
                _ => {}
            },
        }
    }
    parts.push(&s[start..]);
    parts
}

/// Parses a declaration block body (`a: b; c: d !important`).
pub fn parse_declarations(block: &str) -> Vec<Declaration> {
    let block = strip_comments(block);
    split_top_level(&block, ';')
        .into_iter()
        .filter_map(|decl| {
            let (prop, value) = decl.split_once(':')?;
            let property = prop.trim().to_ascii_lowercase();
            if property.is_empty()
                || !property
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
            {
                return None;
            }
            let mut value = value.trim().to_string();
            let mut important = false;
            let lower = value.to_ascii_lowercase();
            if let Some(pos) = lower.rfind("!important") {
                if lower[pos + "!important".len()..].trim().is_empty() {
                    important = true;
                    value.truncate(pos);
                    value = value.trim().to_string();
                }
            } else if let Some(pos) = lower.rfind('!') {
                if lower[pos + 1..].trim() == "important" {
                    important = true;
                    value.truncate(pos);
                    value = value.trim().to_string();
                }
            }
            if value.is_empty() {
                return None;
            }
            Some(Declaration {
                property,
                value,
                important,
            })
        })
        .collect()
}

/// Parses one selector; `None` when it uses unsupported syntax.
pub fn parse_selector(text: &str) -> Option<Selector> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    let mut parts: Vec<(Combinator, Compound)> = Vec::new();
    let mut pseudo = None;
    let mut pending = Combinator::Descendant;
    let spaced = text.replace('>', " > ");
    for token in spaced.split_ascii_whitespace() {
        if token == ">" {
            if parts.is_empty() {
                return None;
            }
            pending = Combinator::Child;
            continue;
        }
        if token == "+" || token == "~" || pseudo.is_some() {
            return None;
        }
        let (compound, pe) = parse_compound(token)?;
        parts.push((pending, compound));
        pending = Combinator::Descendant;
        pseudo = pe;
    }
    if parts.is_empty() || pending == Combinator::Child {
        return None;
    }
    Some(Selector { parts, pseudo })
}

fn parse_compound(token: &str) -> Option<(Compound, Option<PseudoElement>)> {
    let mut c = Compound::default();
    let mut pseudo = None;
    let bytes: Vec<char> = token.chars().collect();
    let mut i = 0;
    let ident_end = |from: usize| {
        let mut j = from;
        while j < bytes.len() && (bytes[j].is_alphanumeric() || bytes[j] == '-' || bytes[j] == '_') {
            j += 1;
        }
        j
    };
    if i < bytes.len() && bytes[i] == '*' {
        i += 1;
    } else {
        let j = ident_end(i);
        if j > i {
            c.tag = Some(bytes[i..j].iter().collect::<String>().to_ascii_lowercase());
            i = j;
        }
    }
    while i < bytes.len() {
        if pseudo.is_some() {
            return None;
        }
        match bytes[i] {
            '.' | '#' => {
                let j = ident_end(i + 1);
                if j == i + 1 {
                    return None;
                }
                let name: String = bytes[i + 1..j].iter().collect();
                if bytes[i] == '.' {
                    c.classes.push(name);
                } else {
                    c.id = Some(name);
                }
                i = j;
            }
            ':' => {
                let start = if bytes.get(i + 1) == Some(&':') { i + 2 } else { i + 1 };
                let j = ident_end(start);
                let name: String = bytes[start..j].iter().collect::<String>().to_ascii_lowercase();
                match name.as_str() {
                    "first-letter" => pseudo = Some(PseudoElement::FirstLetter),
                    "link" | "visited" => c.link = true,
                    _ => return None,
                }
                i = j;
            }
            _ => return None,
        }
    }
    Some((c, pseudo))
}

/// Parses a stylesheet. `order_base` offsets rule order so that several
/// `<style>` blocks keep their relative document order.
pub fn parse_stylesheet(css: &str, order_base: usize) -> Stylesheet {
    let css = strip_comments(css);
    let chars: Vec<char> = css.chars().collect();
    let mut rules = Vec::new();
    let mut i = 0;
    let mut order = order_base;
    while i < chars.len() {
        while i < chars.len() && chars[i].is_whitespace() {
            i += 1;
        }
        if i >= chars.len() {
            break;
        }
        if chars[i] == '@' {
            // skip the at-rule: up to ';' or through its balanced block
            while i < chars.len() && chars[i] != ';' && chars[i] != '{' {
                i += 1;
            }
            if i < chars.len() && chars[i] == '{' {
                i = skip_block(&chars, i);
            } else {
                i += 1;
            }
            continue;
        }
        let prelude_start = i;
        while i < chars.len() && chars[i] != '{' {
            if chars[i] == '}' {
                // stray closing brace; resynchronise after it
                break;
            }
            i += 1;
        }
        if i >= chars.len() {
            break;
        }
        if chars[i] == '}' {
            i += 1;
            continue;
        }
        let prelude: String = chars[prelude_start..i].iter().collect();
        let block_end = skip_block(&chars, i);
        let body_end = block_end.saturating_sub(1).max(i + 1).min(chars.len());
        let body: String = chars[i + 1..body_end].iter().collect();
        i = block_end;
        let declarations = parse_declarations(&body);
        for sel in prelude.split(',').filter_map(parse_selector) {
            rules.push(Rule {
                selector: sel,
                declarations: declarations.clone(),
                order,
            });
            order += 1;
        }
    }
    Stylesheet { rules }
}

/// Returns the index just past the block opened at `open` (a `{`).
fn skip_block(chars: &[char], open: usize) -> usize {
    let mut depth = 0;
    let mut i = open;
    while i < chars.len() {
        match chars[i] {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    return i + 1;
                }
            }
            _ => {}
        }
        i += 1;
    }
    chars.len()
}
