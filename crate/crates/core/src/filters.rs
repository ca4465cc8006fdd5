//! The eligibility pipeline: which emails can be judged statically.

use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::dom::{parse_html, Dom, NodeKind};
use crate::ingest::{parse_rfc5322, select_renderable_html, EmailDocument, RawEmail, YearMonth};
use crate::lang::LanguageIdentifier;
use crate::views::{extract_views, ViewConfig, ViewPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Stage {
    ParseError,
    NoHtml,
    RemoteContent,
    NonEnglish,
    EncodingError,
    MsoDirectives,
    Eligible,
}

impl Stage {
    pub const ORDER: [Stage; 7] = [
        Stage::ParseError,
        Stage::NoHtml,
        Stage::RemoteContent,
        Stage::NonEnglish,
        Stage::EncodingError,
        Stage::MsoDirectives,
        Stage::Eligible,
    ];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterVerdict {
    pub id: String,
    pub date: Option<YearMonth>,
    pub stage_outcome: Stage,
    /// Detected language when the outcome is `NonEnglish`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
    pub detail: String,
    pub html_length: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineCounts {
    pub parse_error: usize,
    pub no_html: usize,
    pub remote_content: usize,
    pub non_english: usize,
    pub encoding_error: usize,
    pub mso_directives: usize,
    pub eligible: usize,
    pub total: usize,
}

impl PipelineCounts {
    pub fn record(&mut self, stage: Stage) {
        *self.slot(stage) += 1;
        self.total += 1;
    }

    fn slot(&mut self, stage: Stage) -> &mut usize {
        match stage {
            Stage::ParseError => &mut self.parse_error,
            Stage::NoHtml => &mut self.no_html,
            Stage::RemoteContent => &mut self.remote_content,
            Stage::NonEnglish => &mut self.non_english,
            Stage::EncodingError => &mut self.encoding_error,
            Stage::MsoDirectives => &mut self.mso_directives,
            Stage::Eligible => &mut self.eligible,
        }
    }

    pub fn get(&self, stage: Stage) -> usize {
        let mut copy = *self;
        *copy.slot(stage)
    }

    pub fn merge(&mut self, other: &PipelineCounts) {
        for stage in Stage::ORDER {
            *self.slot(stage) += other.get(stage);
        }
        self.total += other.total;
    }

    pub fn removed(&self) -> usize {
        self.total - self.eligible
    }

    /// `total == Σ removed + eligible`.
    pub fn is_conserved(&self) -> bool {
        Stage::ORDER.iter().map(|&s| self.get(s)).sum::<usize>() == self.total
    }

    pub fn from_verdicts<'a>(verdicts: impl IntoIterator<Item = &'a FilterVerdict>) -> PipelineCounts {
        let mut c = PipelineCounts::default();
        for v in verdicts {
            c.record(v.stage_outcome);
        }
        c
    }
}

fn is_remote_url(url: &str) -> bool {
    let u = url.trim().trim_matches(['"', '\'']).trim().to_ascii_lowercase();
    u.starts_with("http://") || u.starts_with("https://") || u.starts_with("//")
}

static CSS_URL: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"(?i)url\(\s*([^)]*)\)"#).expect("valid regex"));

fn css_has_remote_url(css: &str) -> bool {
    CSS_URL.captures_iter(css).any(|c| is_remote_url(&c[1]))
}

fn dom_has_remote_content(dom: &Dom) -> bool {
    for id in dom.preorder() {
        let NodeKind::Element { tag, .. } = &dom.node(id).kind else {
            continue;
        };
        let src_remote = || dom.attr(id, "src").is_some_and(is_remote_url);
        match tag.as_str() {
            "img" if src_remote() => return true,
            "input"
                if dom.attr(id, "type").is_some_and(|t| t.eq_ignore_ascii_case("image")) && src_remote() =>
            {
                return true
            }
            "style" => {
                let css: String = dom.children(id).iter().filter_map(|&c| dom.text(c)).collect();
                if css_has_remote_url(&css) {
                    return true;
                }
            }
            _ => {}
        }
        if dom.attr(id, "background").is_some_and(is_remote_url) {
            return true;
        }
        if dom.attr(id, "style").is_some_and(css_has_remote_url) {
            return true;
        }
    }
    false
}

/// Whether rendering would fetch a remote resource: images, image inputs,
/// `background` attributes or CSS `url(...)` with an http(s) or
/// protocol-relative address.
pub fn detect_remote_content(html: &str) -> bool {
    dom_has_remote_content(&parse_html(html))
}

/// Conditional comments (`<!--[if`, `<![if`, `<![endif]`) mark
/// client-specific versions of the same email.
pub fn detect_mso_directives(html: &str) -> bool {
    let lower = html.to_ascii_lowercase();
    ["<!--[if", "<![if", "<![endif]"].iter().any(|m| lower.contains(m))
}

static SCRIPT_ELEMENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)<script\b[^>]*>.*?</script\s*>").expect("valid regex"));
static STYLESHEET_LINK: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)<link\b[^>]*\brel\s*=\s*["']?[^"'>]*stylesheet[^>]*>"#).expect("valid regex")
});
static STYLE_ELEMENT: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?is)(<style\b[^>]*>)(.*?)(</style\s*>)").expect("valid regex"));
static STYLE_ATTR: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"(?i)(\sstyle\s*=\s*)("[^"]*"|'[^']*')"#).expect("valid regex")
});
static KEYFRAMES_START: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)@(?:-[a-z]+-)?keyframes\b[^{]*\{").expect("valid regex"));
static IMPORT_RULE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)@import\b[^;]*;?").expect("valid regex"));
static MOTION_DECL: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?i)(^|[{;\s])\s*(?:-[a-z]+-)?(?:animation|transition)[a-z-]*\s*:[^;{}]*;?")
        .expect("valid regex")
});

fn strip_keyframes(css: &str) -> String {
    let mut out = String::with_capacity(css.len());
    let mut rest = css;
    while let Some(m) = KEYFRAMES_START.find(rest) {
        out.push_str(&rest[..m.start()]);
        let mut depth = 1usize;
        let mut end = rest.len();
        for (i, c) in rest[m.end()..].char_indices() {
            match c {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = m.end() + i + 1;
                        break;
                    }
                }
                _ => {}
            }
        }
        rest = &rest[end..];
    }
    out.push_str(rest);
    out
}

fn strip_motion_declarations(css: &str) -> String {
    MOTION_DECL.replace_all(css, "$1").into_owned()
}

fn normalize_once(html: &str) -> String {
    let html = SCRIPT_ELEMENT.replace_all(html, "");
    let html = STYLESHEET_LINK.replace_all(&html, "");
    let html = STYLE_ELEMENT.replace_all(&html, |c: &regex::Captures<'_>| {
        let css = strip_keyframes(&c[2]);
        let css = IMPORT_RULE.replace_all(&css, "");
        let css = strip_motion_declarations(&css);
        format!("{}{}{}", &c[1], css, &c[3])
    });
    let html = STYLE_ATTR.replace_all(&html, |c: &regex::Captures<'_>| {
        let quoted = &c[2];
        let quote = &quoted[..1];
        let inner = &quoted[1..quoted.len() - 1];
        let cleaned = strip_motion_declarations(inner);
        format!("{}{quote}{}{quote}", &c[1], cleaned.trim_start())
    });
    html.into_owned()
}

/// Removes scripts, external stylesheet links, `@import`, keyframes and
/// animation/transition declarations. Repeats until nothing changes, so
/// the result is a fixed point.
pub fn normalize_css_availability(html: &str) -> String {
    let mut current = html.to_string();
    loop {
        let next = normalize_once(&current);
        if next == current {
            return current;
        }
        current = next;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub views: ViewConfig,
}

/// Everything the pipeline learned about one email.
#[derive(Debug, Clone)]
pub struct ProcessedEmail {
    pub verdict: FilterVerdict,
    pub document: Option<EmailDocument>,
    pub normalized_html: Option<String>,
    pub views: Option<ViewPair>,
}

/// Runs the stages in order on one email; the first failing stage wins.
pub fn evaluate(raw: &RawEmail, lang: &dyn LanguageIdentifier, config: &PipelineConfig) -> ProcessedEmail {
    let verdict = |stage: Stage, detail: String, html_length: Option<usize>| FilterVerdict {
        id: raw.id.clone(),
        date: raw.received_date,
        stage_outcome: stage,
        language: None,
        detail,
        html_length,
    };
    let parsed = match parse_rfc5322(raw) {
        Ok(p) => p,
        Err(e) => {
            return ProcessedEmail {
                verdict: verdict(Stage::ParseError, e.to_string(), None),
                document: None,
                normalized_html: None,
                views: None,
            }
        }
    };
    let Some(doc) = select_renderable_html(raw, &parsed) else {
        return ProcessedEmail {
            verdict: verdict(Stage::NoHtml, "no non-attachment text/html part".into(), None),
            document: None,
            normalized_html: None,
            views: None,
        };
    };
    let len = Some(doc.html_length);
    let finish = |v: FilterVerdict, normalized: Option<String>, views: Option<ViewPair>, doc: EmailDocument| {
        ProcessedEmail {
            verdict: v,
            document: Some(doc),
            normalized_html: normalized,
            views,
        }
    };

    if detect_remote_content(&doc.html) {
        return finish(verdict(Stage::RemoteContent, "references a remote resource".into(), len), None, None, doc);
    }
    let normalized = normalize_css_availability(&doc.html);
    let views = extract_views(&normalized, &config.views);
    let guess = lang.identify(&views.mail_filter.tokens.join(" "));
    if guess.code != "en" {
        let mut v = verdict(
            Stage::NonEnglish,
            format!("language {} (confidence {:.2})", guess.code, guess.confidence),
            len,
        );
        v.language = Some(guess.code);
        return finish(v, Some(normalized), Some(views), doc);
    }
    if let Some(failure) = &doc.encoding_failure {
        let v = verdict(Stage::EncodingError, failure.to_string(), len);
        return finish(v, Some(normalized), Some(views), doc);
    }
    if detect_mso_directives(&doc.html) {
        let v = verdict(Stage::MsoDirectives, "conditional comment directives".into(), len);
        return finish(v, Some(normalized), Some(views), doc);
    }
    let v = verdict(Stage::Eligible, "eligible".into(), len);
    finish(v, Some(normalized), Some(views), doc)
}

/// Evaluates a corpus; results are ordered by id whatever the input order.
pub fn run_pipeline(
    corpus: &[RawEmail],
    lang: &dyn LanguageIdentifier,
    config: &PipelineConfig,
) -> (Vec<ProcessedEmail>, PipelineCounts) {
    let mut results: Vec<ProcessedEmail> = corpus.iter().map(|r| evaluate(r, lang, config)).collect();
    results.sort_by(|a, b| a.verdict.id.cmp(&b.verdict.id));
    let counts = PipelineCounts::from_verdicts(results.iter().map(|r| &r.verdict));
    (results, counts)
}
