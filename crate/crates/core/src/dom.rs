//! Error-tolerant HTML parsing into a flat node arena.
//!
//! Tree construction follows the HTML5 algorithm (via `scraper`/html5ever),
//! so unclosed tags, stray end tags and table foster-parenting recover the
//! same way a browser would. The result is copied into [`Dom`], an arena
//! with parent links that the style resolver and view extraction walk.

use serde::Serialize;

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeKind {
    Document,
    Element {
        tag: String,
        attrs: Vec<(String, String)>,
    },
    Text {
        text: String,
    },
    Comment {
        text: String,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct DomNode {
    #[serde(flatten)]
    pub kind: NodeKind,
    #[serde(skip)]
    pub parent: Option<NodeId>,
    #[serde(skip)]
    pub children: Vec<NodeId>,
}

/// Parsed document. Node 0 is always the document root.
#[derive(Debug, Clone)]
pub struct Dom {
    nodes: Vec<DomNode>,
}

impl Dom {
    pub fn parse(html: &str) -> Dom {
        let parsed = scraper::Html::parse_document(html);
        let mut dom = Dom {
            nodes: vec![DomNode {
                kind: NodeKind::Document,
                parent: None,
                children: Vec::new(),
            }],
        };
        for child in parsed.tree.root().children() {
            dom.copy_subtree(child, 0);
        }
        dom
    }

    fn copy_subtree(&mut self, node: ego_tree::NodeRef<'_, scraper::Node>, parent: NodeId) {
        let kind = match node.value() {
            scraper::Node::Element(el) => NodeKind::Element {
                tag: el.name().to_ascii_lowercase(),
                attrs: el
                    .attrs()
                    .map(|(k, v)| (k.to_ascii_lowercase(), v.to_string()))
                    .collect(),
            },
            scraper::Node::Text(t) => NodeKind::Text {
                text: t.to_string(),
            },
            scraper::Node::Comment(c) => NodeKind::Comment {
                text: c.to_string(),
            },
            // doctypes and processing instructions carry nothing renderable
            _ => return,
        };
        let id = self.push(kind, parent);
        for child in node.children() {
            self.copy_subtree(child, id);
        }
    }

    fn push(&mut self, kind: NodeKind, parent: NodeId) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(DomNode {
            kind,
            parent: Some(parent),
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 1
    }

    pub fn node(&self, id: NodeId) -> &DomNode {
        &self.nodes[id]
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id].parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id].children
    }

    pub fn tag(&self, id: NodeId) -> Option<&str> {
        match &self.nodes[id].kind {
            NodeKind::Element { tag, .. } => Some(tag),
            _ => None,
        }
    }

    pub fn text(&self, id: NodeId) -> Option<&str> {
        match &self.nodes[id].kind {
            NodeKind::Text { text } => Some(text),
            _ => None,
        }
    }

    pub fn is_element(&self, id: NodeId) -> bool {
        matches!(self.nodes[id].kind, NodeKind::Element { .. })
    }

    /// Attribute lookup; names are stored lowercased.
    pub fn attr(&self, id: NodeId, name: &str) -> Option<&str> {
        match &self.nodes[id].kind {
            NodeKind::Element { attrs, .. } => attrs
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case(name))
                .map(|(_, v)| v.as_str()),
            _ => None,
        }
    }

    pub fn ancestors(&self, id: NodeId) -> Ancestors<'_> {
        Ancestors {
            dom: self,
            next: self.nodes[id].parent,
        }
    }

    /// All nodes in document (pre-)order, root first.
    pub fn preorder(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root()];
        while let Some(id) = stack.pop() {
            out.push(id);
            stack.extend(self.nodes[id].children.iter().rev());
        }
        out
    }

    /// Descendants of `id` (excluding itself) in document order.
    pub fn descendants(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.nodes[id].children.iter().rev().copied().collect();
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(self.nodes[n].children.iter().rev());
        }
        out
    }

    /// XPath-like location, e.g. `/html[1]/body[1]/p[2]/text()[1]`.
    pub fn path(&self, id: NodeId) -> String {
        let mut segments = Vec::new();
        let mut cur = id;
        while let Some(parent) = self.nodes[cur].parent {
            let name = match &self.nodes[cur].kind {
                NodeKind::Element { tag, .. } => tag.clone(),
                NodeKind::Text { .. } => "text()".to_string(),
                NodeKind::Comment { .. } => "comment()".to_string(),
                NodeKind::Document => String::new(),
            };
            let position = self.nodes[parent]
                .children
                .iter()
                .take_while(|&&c| c != cur)
                .filter(|&&c| self.same_step(c, cur))
                .count()
                + 1;
            segments.push(format!("{name}[{position}]"));
            cur = parent;
        }
        segments.reverse();
        format!("/{}", segments.join("/"))
    }

    fn same_step(&self, a: NodeId, b: NodeId) -> bool {
        match (&self.nodes[a].kind, &self.nodes[b].kind) {
            (NodeKind::Element { tag: x, .. }, NodeKind::Element { tag: y, .. }) => x == y,
            (NodeKind::Text { .. }, NodeKind::Text { .. }) => true,
            (NodeKind::Comment { .. }, NodeKind::Comment { .. }) => true,
            _ => false,
        }
    }

    /// First element with the given tag, in document order.
    pub fn find_tag(&self, tag: &str) -> Option<NodeId> {
        self.preorder().into_iter().find(|&n| self.tag(n) == Some(tag))
    }
}

pub struct Ancestors<'a> {
    dom: &'a Dom,
    next: Option<NodeId>,
}

impl Iterator for Ancestors<'_> {
    type Item = NodeId;

    fn next(&mut self) -> Option<NodeId> {
        let cur = self.next?;
        self.next = self.dom.nodes[cur].parent;
        Some(cur)
    }
}

/// Convenience wrapper matching the operation name used across the crate.
pub fn parse_html(html: &str) -> Dom {
    Dom::parse(html)
}
