//! Corpus walking, RFC 5322 / MIME structure parsing, and body decoding.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use base64::engine::general_purpose::{GeneralPurpose, GeneralPurposeConfig};
use base64::engine::DecodePaddingMode;
use base64::Engine as _;
use encoding_rs::{DecoderResult, Encoding};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("malformed message: {0}")]
    MalformedMessage(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("walking corpus: {0}")]
    Walk(#[from] walkdir::Error),
}

/// Archive month an email was filed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct YearMonth {
    pub year: u16,
    pub month: u8,
}

impl YearMonth {
    pub fn new(year: u16, month: u8) -> Option<YearMonth> {
        (1..=12).contains(&month).then_some(YearMonth { year, month })
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}/{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (y, m) = s
            .split_once(['/', '-'])
            .ok_or_else(|| format!("expected YYYY/MM, got {s:?}"))?;
        let year = y.parse().map_err(|_| format!("bad year in {s:?}"))?;
        let month = m.parse().map_err(|_| format!("bad month in {s:?}"))?;
        YearMonth::new(year, month).ok_or_else(|| format!("bad month in {s:?}"))
    }
}

impl Serialize for YearMonth {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for YearMonth {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawEmail {
    pub id: String,
    pub received_date: Option<YearMonth>,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferEncoding {
    #[serde(rename = "7bit")]
    SevenBit,
    #[serde(rename = "8bit")]
    EightBit,
    #[serde(rename = "binary")]
    Binary,
    #[serde(rename = "quoted-printable")]
    QuotedPrintable,
    #[serde(rename = "base64")]
    Base64,
    #[serde(rename = "unknown")]
    Unknown,
}

impl TransferEncoding {
    pub fn from_header(value: Option<&str>) -> TransferEncoding {
        let Some(v) = value else {
            return TransferEncoding::SevenBit;
        };
        match v.trim().to_ascii_lowercase().as_str() {
            "7bit" | "" => TransferEncoding::SevenBit,
            "8bit" => TransferEncoding::EightBit,
            "binary" => TransferEncoding::Binary,
            "quoted-printable" => TransferEncoding::QuotedPrintable,
            "base64" => TransferEncoding::Base64,
            _ => TransferEncoding::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Disposition {
    Inline,
    Attachment,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("undecodable input at byte {offset}: {reason}")]
pub struct EncodingFailure {
    pub offset: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodedBody {
    Text(String),
    /// Decoding failed; `lossy` holds a best-effort rendering so later
    /// stages can still inspect the part.
    Failed { failure: EncodingFailure, lossy: String },
}

impl DecodedBody {
    pub fn text(&self) -> &str {
        match self {
            DecodedBody::Text(t) => t,
            DecodedBody::Failed { lossy, .. } => lossy,
        }
    }

    pub fn failure(&self) -> Option<&EncodingFailure> {
        match self {
            DecodedBody::Text(_) => None,
            DecodedBody::Failed { failure, .. } => Some(failure),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MimePart {
    pub content_type: String,
    pub charset: Option<String>,
    pub transfer_encoding: TransferEncoding,
    pub disposition: Disposition,
    pub body: DecodedBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MimePartSummary {
    pub content_type: String,
    pub charset: Option<String>,
    pub transfer_encoding: TransferEncoding,
    pub disposition: Disposition,
    pub decoded: bool,
    pub length: usize,
}

impl From<&MimePart> for MimePartSummary {
    fn from(p: &MimePart) -> Self {
        MimePartSummary {
            content_type: p.content_type.clone(),
            charset: p.charset.clone(),
            transfer_encoding: p.transfer_encoding,
            disposition: p.disposition,
            decoded: p.body.failure().is_none(),
            length: p.body.text().chars().count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedEmail {
    pub headers: Vec<(String, String)>,
    pub parts: Vec<MimePart>,
}

impl ParsedEmail {
    pub fn header(&self, name: &str) -> Option<&str> {
        header_lookup(&self.headers, name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmailDocument {
    pub id: String,
    pub received_date: Option<YearMonth>,
    pub html: String,
    pub html_length: usize,
    pub all_parts: Vec<MimePartSummary>,
    /// Index into `all_parts` of the selected HTML part.
    pub selected_part: usize,
    /// How many non-attachment HTML parts competed for selection.
    pub html_candidates: usize,
    pub encoding_failure: Option<EncodingFailure>,
}

fn header_lookup<'a>(headers: &'a [(String, String)], name: &str) -> Option<&'a str> {
    headers
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case(name))
        .map(|(_, v)| v.as_str())
}

/// Finds the header/body separator. Returns (header block end, body start).
fn split_head(bytes: &[u8]) -> Option<(usize, usize)> {
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'\n' {
            if bytes.get(i + 1) == Some(&b'\n') {
                return Some((i + 1, i + 2));
            }
            if bytes.get(i + 1) == Some(&b'\r') && bytes.get(i + 2) == Some(&b'\n') {
                return Some((i + 1, i + 3));
            }
        }
        i += 1;
    }
    // a message may also start with the blank line (no headers at all)
    if bytes.starts_with(b"\r\n") {
        return Some((0, 2));
    }
    if bytes.starts_with(b"\n") {
        return Some((0, 1));
    }
    None
}

fn latin1(bytes: &[u8]) -> String {
    bytes.iter().map(|&b| b as char).collect()
}

fn header_text(bytes: &[u8]) -> String {
    match std::str::from_utf8(bytes) {
        Ok(s) => s.to_string(),
        Err(_) => latin1(bytes),
    }
}

fn is_field_name(name: &str) -> bool {
    !name.is_empty() && name.bytes().all(|b| (33..=126).contains(&b) && b != b':')
}

/// Parses a header block into unfolded (name, value) pairs.
fn parse_header_block(block: &[u8], allow_mbox_from: bool) -> Result<Vec<(String, String)>, String> {
    let text = header_text(block);
    let mut headers: Vec<(String, String)> = Vec::new();
    for (n, raw_line) in text.split('\n').enumerate() {
        let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
        if line.is_empty() {
            continue;
        }
        if n == 0 && allow_mbox_from && line.starts_with("From ") {
            continue;
        }
        if line.starts_with([' ', '\t']) {
            match headers.last_mut() {
                Some((_, v)) => {
                    v.push(' ');
                    v.push_str(line.trim());
                }
                None => return Err(format!("continuation line before any header: {line:?}")),
            }
            continue;
        }
        match line.split_once(':') {
            Some((name, value)) if is_field_name(name.trim_end()) => {
                headers.push((name.trim_end().to_string(), value.trim().to_string()));
            }
            _ => return Err(format!("invalid header line {}: {line:?}", n + 1)),
        }
    }
    Ok(headers)
}

/// Splits a structured header value like `text/html; charset="utf-8"` into
/// its lowercased main value and parameters (lowercased names).
pub fn parse_header_params(value: &str) -> (String, BTreeMap<String, String>) {
    let mut parts = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut escaped = false;
    for c in value.chars() {
        if escaped {
            cur.push(c);
            escaped = false;
            continue;
        }
        match c {
            '\\' if quoted => escaped = true,
            '"' => {
                quoted = !quoted;
                cur.push(c);
            }
            ';' if !quoted => parts.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    parts.push(cur);
    let main = parts[0].trim().to_ascii_lowercase();
    let mut params = BTreeMap::new();
    for p in &parts[1..] {
        if let Some((k, v)) = p.split_once('=') {
            let v = v.trim();
            let v = v
                .strip_prefix('"')
                .and_then(|s| s.strip_suffix('"'))
                .unwrap_or(v);
            params.insert(k.trim().to_ascii_lowercase(), v.to_string());
        }
    }
    (main, params)
}

struct Entity<'a> {
    headers: Vec<(String, String)>,
    body: &'a [u8],
}

fn parse_entity(bytes: &[u8]) -> Entity<'_> {
    // MIME parts are parsed leniently: a part whose head does not parse is
    // treated as header-less content
    if let Some((head_end, body_start)) = split_head(bytes) {
        if let Ok(headers) = parse_header_block(&bytes[..head_end], false) {
            return Entity {
                headers,
                body: &bytes[body_start..],
            };
        }
    }
    Entity {
        headers: Vec::new(),
        body: bytes,
    }
}

fn strip_trailing_newline(b: &[u8]) -> &[u8] {
    let b = b.strip_suffix(b"\n").unwrap_or(b);
    b.strip_suffix(b"\r").unwrap_or(b)
}

/// Splits a multipart body at `--boundary` delimiter lines.
fn split_multipart<'a>(body: &'a [u8], boundary: &str) -> Vec<&'a [u8]> {
    let delim = format!("--{boundary}");
    let delim = delim.as_bytes();
    let mut parts = Vec::new();
    let mut current_start: Option<usize> = None;
    let mut line_start = 0;
    while line_start < body.len() {
        let line_end = body[line_start..]
            .iter()
            .position(|&b| b == b'\n')
            .map_or(body.len(), |p| line_start + p + 1);
        let line = &body[line_start..line_end];
        let trimmed = strip_trailing_newline(line);
        if trimmed.starts_with(delim) {
            let rest = &trimmed[delim.len()..];
            let is_close = rest.starts_with(b"--");
            let rest_ok = rest.iter().all(|b| b.is_ascii_whitespace()) || is_close;
            if rest_ok {
                if let Some(start) = current_start {
                    parts.push(strip_trailing_newline(&body[start..line_start]));
                }
                if is_close {
                    return parts;
                }
                current_start = Some(line_end);
            }
        }
        line_start = line_end;
    }
    if let Some(start) = current_start {
        if start <= body.len() {
            parts.push(&body[start..]);
        }
    }
    parts
}

fn collect_leaves(entity: Entity<'_>, depth: usize, out: &mut Vec<MimePart>) {
    let (content_type, params) = header_lookup(&entity.headers, "content-type")
        .map(parse_header_params)
        .unwrap_or_else(|| ("text/plain".to_string(), BTreeMap::new()));
    if content_type.starts_with("multipart/") && depth < 32 {
        if let Some(boundary) = params.get("boundary").filter(|b| !b.is_empty()) {
            for raw in split_multipart(entity.body, boundary) {
                collect_leaves(parse_entity(raw), depth + 1, out);
            }
            return;
        }
    }
    let transfer_encoding =
        TransferEncoding::from_header(header_lookup(&entity.headers, "content-transfer-encoding"));
    let disposition = match header_lookup(&entity.headers, "content-disposition") {
        None => Disposition::Absent,
        Some(v) => match parse_header_params(v).0.as_str() {
            "attachment" => Disposition::Attachment,
            _ => Disposition::Inline,
        },
    };
    let charset = params.get("charset").map(|c| c.trim().to_string()).filter(|c| !c.is_empty());
    let content_type = if content_type.is_empty() {
        "text/plain".to_string()
    } else {
        content_type
    };
    let body = if content_type.starts_with("text/") {
        match decode_body(entity.body, transfer_encoding, charset.as_deref()) {
            Ok(text) => DecodedBody::Text(text),
            Err(failure) => DecodedBody::Failed {
                failure,
                lossy: decode_body_lossy(entity.body, transfer_encoding, charset.as_deref()),
            },
        }
    } else {
        DecodedBody::Text(String::new())
    };
    out.push(MimePart {
        content_type,
        charset,
        transfer_encoding,
        disposition,
        body,
    });
}

/// Header map plus leaf parts in depth-first order.
pub fn parse_rfc5322(raw: &RawEmail) -> Result<ParsedEmail, IngestError> {
    let bytes = &raw.bytes;
    let (head_end, body_start) = split_head(bytes)
        .ok_or_else(|| IngestError::MalformedMessage("no blank line between headers and body".into()))?;
    let headers = parse_header_block(&bytes[..head_end], true).map_err(IngestError::MalformedMessage)?;
    let mut parts = Vec::new();
    collect_leaves(
        Entity {
            headers: headers.clone(),
            body: &bytes[body_start..],
        },
        0,
        &mut parts,
    );
    Ok(ParsedEmail { headers, parts })
}

fn base64_engine() -> GeneralPurpose {
    GeneralPurpose::new(
        &base64::alphabet::STANDARD,
        GeneralPurposeConfig::new()
            .with_decode_padding_mode(DecodePaddingMode::Indifferent)
            .with_decode_allow_trailing_bits(true),
    )
}

/// Base64 with whitespace ignored. On failure the offset refers to the
/// original (whitespace-including) input; the second value is the decoded
/// prefix before the failure.
fn decode_base64(input: &[u8]) -> Result<Vec<u8>, (EncodingFailure, Vec<u8>)> {
    let mut clean = Vec::with_capacity(input.len());
    let mut origin = Vec::with_capacity(input.len());
    for (i, &b) in input.iter().enumerate() {
        if !b.is_ascii_whitespace() {
            clean.push(b);
            origin.push(i);
        }
    }
    let engine = base64_engine();
    match engine.decode(&clean) {
        Ok(v) => Ok(v),
        Err(e) => {
            let clean_offset = match e {
                base64::DecodeError::InvalidByte(i, _) | base64::DecodeError::InvalidLastSymbol(i, _) => i,
                base64::DecodeError::InvalidLength(_) | base64::DecodeError::InvalidPadding => {
                    clean.len().saturating_sub(clean.len() % 4)
                }
            };
            let offset = origin.get(clean_offset).copied().unwrap_or(input.len());
            let prefix_len = clean_offset / 4 * 4;
            let prefix = engine.decode(&clean[..prefix_len]).unwrap_or_default();
            Err((
                EncodingFailure {
                    offset,
                    reason: format!("invalid base64: {e}"),
                },
                prefix,
            ))
        }
    }
}

fn transfer_decode(raw: &[u8], te: TransferEncoding) -> Result<Vec<u8>, (EncodingFailure, Vec<u8>)> {
    match te {
        TransferEncoding::QuotedPrintable => {
            quoted_printable::decode(raw, quoted_printable::ParseMode::Robust).map_err(|e| {
                (
                    EncodingFailure {
                        offset: 0,
                        reason: format!("invalid quoted-printable: {e}"),
                    },
                    raw.to_vec(),
                )
            })
        }
        TransferEncoding::Base64 => decode_base64(raw),
        _ => Ok(raw.to_vec()),
    }
}

enum Charset {
    Ascii,
    Latin1,
    Utf8,
    Other(&'static Encoding),
}

fn resolve_charset(label: &str) -> Option<Charset> {
    let l = label.trim().trim_matches(['"', '\'']).to_ascii_lowercase();
    match l.as_str() {
        "us-ascii" | "ascii" | "ansi_x3.4-1968" | "iso646-us" | "us" | "cp367" => Some(Charset::Ascii),
        "iso-8859-1" | "iso8859-1" | "iso_8859-1" | "latin1" | "latin-1" | "l1" | "iso_8859-1:1987"
        | "cp819" | "ibm819" => Some(Charset::Latin1),
        "utf-8" | "utf8" | "unicode-1-1-utf-8" => Some(Charset::Utf8),
        _ => Encoding::for_label(l.as_bytes()).map(|e| {
            if e == encoding_rs::UTF_8 {
                Charset::Utf8
            } else {
                Charset::Other(e)
            }
        }),
    }
}

fn charset_decode(bytes: &[u8], charset: Option<&str>) -> Result<String, EncodingFailure> {
    let resolved = match charset {
        None => {
            return Ok(match std::str::from_utf8(bytes) {
                Ok(s) => s.to_string(),
                Err(_) => encoding_rs::WINDOWS_1252.decode_without_bom_handling(bytes).0.into_owned(),
            })
        }
        Some(label) => resolve_charset(label).ok_or_else(|| EncodingFailure {
            offset: 0,
            reason: format!("unknown charset {label:?}"),
        })?,
    };
    match resolved {
        Charset::Ascii => match bytes.iter().position(|&b| b >= 0x80) {
            Some(offset) => Err(EncodingFailure {
                offset,
                reason: format!("byte 0x{:02X} is not us-ascii", bytes[offset]),
            }),
            None => Ok(latin1(bytes)),
        },
        Charset::Latin1 => Ok(latin1(bytes)),
        Charset::Utf8 => std::str::from_utf8(bytes)
            .map(str::to_string)
            .map_err(|e| EncodingFailure {
                offset: e.valid_up_to(),
                reason: "invalid utf-8 sequence".into(),
            }),
        Charset::Other(enc) => {
            let mut decoder = enc.new_decoder_without_bom_handling();
            let cap = decoder
                .max_utf8_buffer_length_without_replacement(bytes.len())
                .unwrap_or(bytes.len() * 4 + 16);
            let mut out = String::with_capacity(cap);
            let (result, read) = decoder.decode_to_string_without_replacement(bytes, &mut out, true);
            match result {
                DecoderResult::InputEmpty => Ok(out),
                DecoderResult::Malformed(bad, after) => Err(EncodingFailure {
                    offset: read - bad as usize - after as usize,
                    reason: format!("invalid {} sequence", enc.name()),
                }),
                DecoderResult::OutputFull => Err(EncodingFailure {
                    offset: read,
                    reason: "decoder output overflow".into(),
                }),
            }
        }
    }
}

/// Reverses the transfer encoding, then decodes the charset strictly.
pub fn decode_body(raw: &[u8], te: TransferEncoding, charset: Option<&str>) -> Result<String, EncodingFailure> {
    let bytes = transfer_decode(raw, te).map_err(|(f, _)| f)?;
    charset_decode(&bytes, charset)
}

/// Best-effort decoding that never fails.
pub fn decode_body_lossy(raw: &[u8], te: TransferEncoding, charset: Option<&str>) -> String {
    let bytes = match transfer_decode(raw, te) {
        Ok(b) => b,
        Err((_, prefix)) => prefix,
    };
    match charset.and_then(resolve_charset) {
        Some(Charset::Other(enc)) => enc.decode_without_bom_handling(&bytes).0.into_owned(),
        Some(Charset::Latin1) => latin1(&bytes),
        _ => String::from_utf8_lossy(&bytes).into_owned(),
    }
}

/// Picks the HTML part to render: among non-attachment `text/html` leaves,
/// the last one wins. `None` when there is no such part.
pub fn select_renderable_html(raw: &RawEmail, parsed: &ParsedEmail) -> Option<EmailDocument> {
    let candidates: Vec<usize> = parsed
        .parts
        .iter()
        .enumerate()
        .filter(|(_, p)| p.content_type == "text/html" && p.disposition != Disposition::Attachment)
        .map(|(i, _)| i)
        .collect();
    let &selected = candidates.last()?;
    let part = &parsed.parts[selected];
    let html = part.body.text().to_string();
    let html_length = html.chars().count();
    if html_length == 0 {
        return None;
    }
    Some(EmailDocument {
        id: raw.id.clone(),
        received_date: raw.received_date,
        html,
        html_length,
        all_parts: parsed.parts.iter().map(MimePartSummary::from).collect(),
        selected_part: selected,
        html_candidates: candidates.len(),
        encoding_failure: part.body.failure().cloned(),
    })
}

/// Year/month from `YYYY/MM/` or `YYYY-MM/` path components.
pub fn date_from_path(relative: &Path) -> Option<YearMonth> {
    let comps: Vec<String> = relative
        .parent()?
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    let four_digits = |s: &str| s.len() == 4 && s.bytes().all(|b| b.is_ascii_digit());
    let two_digits = |s: &str| s.len() == 2 && s.bytes().all(|b| b.is_ascii_digit());
    for (i, c) in comps.iter().enumerate().rev() {
        if let Some((y, m)) = c.split_once('-') {
            if four_digits(y) && two_digits(m) {
                return YearMonth::new(y.parse().ok()?, m.parse().ok()?);
            }
        }
        if two_digits(c) && i > 0 && four_digits(&comps[i - 1]) {
            return YearMonth::new(comps[i - 1].parse().ok()?, c.parse().ok()?);
        }
    }
    None
}

/// Reads every regular, non-hidden file under `root`, sorted by id.
pub fn load_corpus(root: &Path) -> Result<Vec<RawEmail>, IngestError> {
    let mut out = Vec::new();
    let walker = walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.depth() == 0 || !e.file_name().to_string_lossy().starts_with('.'));
    for entry in walker {
        let entry = entry?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy().into_owned())
            .collect::<Vec<_>>()
            .join("/");
        let bytes = std::fs::read(entry.path()).map_err(|source| IngestError::Io {
            path: entry.path().to_path_buf(),
            source,
        })?;
        out.push(RawEmail {
            id,
            received_date: date_from_path(rel),
            bytes,
        });
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(text: &str) -> RawEmail {
        RawEmail {
            id: "t".into(),
            received_date: None,
            bytes: text.as_bytes().to_vec(),
        }
    }

    #[test]
    fn single_part_plain() {
        let p = parse_rfc5322(&raw("Subject: hi\r\nContent-Type: text/plain\r\n\r\nhello\r\n")).unwrap();
        assert_eq!(p.parts.len(), 1);
        assert_eq!(p.parts[0].content_type, "text/plain");
        assert_eq!(p.parts[0].body.text(), "hello\r\n");
        assert_eq!(p.header("subject"), Some("hi"));
    }

    #[test]
    fn multipart_alternative_leaves_in_order() {
        let msg = "Content-Type: multipart/alternative; boundary=\"XX\"\n\npreamble\n--XX\nContent-Type: text/plain\n\nplain\n--XX\nContent-Type: text/html\n\n<p>html</p>\n--XX--\nepilogue\n";
        let p = parse_rfc5322(&raw(msg)).unwrap();
        let types: Vec<_> = p.parts.iter().map(|p| p.content_type.as_str()).collect();
        assert_eq!(types, ["text/plain", "text/html"]);
        assert_eq!(p.parts[1].body.text(), "<p>html</p>");
        let doc = select_renderable_html(&raw(msg), &p).unwrap();
        assert_eq!(doc.html, "<p>html</p>");
        assert_eq!(doc.html_length, 11);
    }

    #[test]
    fn nested_multipart_is_depth_first() {
        let msg = "Content-Type: multipart/mixed; boundary=a\n\n--a\nContent-Type: multipart/alternative; boundary=b\n\n--b\nContent-Type: text/plain\n\n1\n--b\nContent-Type: text/html\n\n2\n--b--\n--a\nContent-Type: image/gif\nContent-Disposition: attachment; filename=x.gif\n\nGIF\n--a--\n";
        let p = parse_rfc5322(&raw(msg)).unwrap();
        let types: Vec<_> = p.parts.iter().map(|p| p.content_type.as_str()).collect();
        assert_eq!(types, ["text/plain", "text/html", "image/gif"]);
        assert_eq!(p.parts[2].disposition, Disposition::Attachment);
    }

    #[test]
    fn missing_separator_is_malformed() {
        let err = parse_rfc5322(&raw("Subject: x\nContent-Type: text/plain")).unwrap_err();
        assert!(matches!(err, IngestError::MalformedMessage(_)));
        let err = parse_rfc5322(&raw("Subject: x\nthis is body text\n\nmore")).unwrap_err();
        assert!(matches!(err, IngestError::MalformedMessage(_)));
    }

    #[test]
    fn mbox_from_line_tolerated() {
        let p = parse_rfc5322(&raw("From spammer Mon Jul 23 2007\nSubject: x\n\nbody")).unwrap();
        assert_eq!(p.header("Subject"), Some("x"));
    }

    #[test]
    fn folded_headers() {
        let msg = "Content-Type: text/html;\n\tcharset=\"iso-8859-1\"\n\n<p>caf\u{e9}</p>";
        let p = parse_rfc5322(&raw(msg)).unwrap();
        assert_eq!(p.parts[0].charset.as_deref(), Some("iso-8859-1"));
    }

    #[test]
    fn transfer_encodings() {
        assert_eq!(decode_body(b"a=3Db", TransferEncoding::QuotedPrintable, None).unwrap(), "a=b");
        assert_eq!(decode_body(b"aGVsbG8=", TransferEncoding::Base64, None).unwrap(), "hello");
        assert_eq!(decode_body(b"aGVs\r\nbG8=", TransferEncoding::Base64, None).unwrap(), "hello");
        assert_eq!(decode_body(b"soft=\r\nbreak", TransferEncoding::QuotedPrintable, None).unwrap(), "softbreak");
    }

    #[test]
    fn bad_base64_reports_original_offset() {
        let err = decode_body(b"aGVs\nbG*8", TransferEncoding::Base64, None).unwrap_err();
        assert_eq!(err.offset, 7);
        let lossy = decode_body_lossy(b"aGVs\nbG*8", TransferEncoding::Base64, None);
        assert_eq!(lossy, "hel");
    }

    #[test]
    fn charset_rules() {
        let err = decode_body(b"ab\xC3\xA9", TransferEncoding::EightBit, Some("us-ascii")).unwrap_err();
        assert_eq!(err.offset, 2);
        assert_eq!(decode_body(b"\xE9", TransferEncoding::EightBit, Some("latin1")).unwrap(), "\u{e9}");
        assert_eq!(decode_body(b"\xC3\xA9", TransferEncoding::EightBit, Some("UTF-8")).unwrap(), "\u{e9}");
        let err = decode_body(b"ok\xFF", TransferEncoding::EightBit, Some("utf-8")).unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(decode_body(b"x", TransferEncoding::EightBit, Some("x-klingon")).is_err());
        assert_eq!(decode_body(b"\x80", TransferEncoding::EightBit, Some("windows-1252")).unwrap(), "\u{20ac}");
        let err = decode_body(b"ab\x82\xFF", TransferEncoding::EightBit, Some("shift_jis")).unwrap_err();
        assert_eq!(err.offset, 2);
        // absent charset: utf-8 when valid, windows-1252 otherwise
        assert_eq!(decode_body(b"\xE9t\xE9", TransferEncoding::EightBit, None).unwrap(), "\u{e9}t\u{e9}");
    }

    #[test]
    fn html_selection() {
        let plain = "Content-Type: text/plain\n\nhi";
        assert!(select_renderable_html(&raw(plain), &parse_rfc5322(&raw(plain)).unwrap()).is_none());
        let attached = "Content-Type: text/html\nContent-Disposition: attachment; filename=a.html\n\n<p>x</p>";
        assert!(select_renderable_html(&raw(attached), &parse_rfc5322(&raw(attached)).unwrap()).is_none());
        let two = "Content-Type: multipart/alternative; boundary=q\n\n--q\nContent-Type: text/html\n\nfirst\n--q\nContent-Type: text/html\n\nsecond\n--q--\n";
        let doc = select_renderable_html(&raw(two), &parse_rfc5322(&raw(two)).unwrap()).unwrap();
        assert_eq!(doc.html, "second");
        assert_eq!(doc.html_candidates, 2);
    }

    #[test]
    fn dates_from_layout() {
        assert_eq!(date_from_path(Path::new("2007/07/1185318861.15426_491.txt")), YearMonth::new(2007, 7));
        assert_eq!(date_from_path(Path::new("archive/2004-08/x.txt")), YearMonth::new(2004, 8));
        assert_eq!(date_from_path(Path::new("x.txt")), None);
        assert_eq!("2005/07".parse::<YearMonth>().unwrap(), YearMonth::new(2005, 7).unwrap());
    }

    #[test]
    fn corpus_loading() {
        let dir = tempfile::tempdir().unwrap();
        let month = dir.path().join("2007").join("07");
        std::fs::create_dir_all(&month).unwrap();
        std::fs::write(month.join("b.txt"), "Subject: b\n\nx").unwrap();
        std::fs::write(month.join("a.txt"), "Subject: a\n\nx").unwrap();
        std::fs::write(month.join(".hidden"), "x").unwrap();
        let corpus = load_corpus(dir.path()).unwrap();
        let ids: Vec<_> = corpus.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["2007/07/a.txt", "2007/07/b.txt"]);
        assert_eq!(corpus[0].received_date, YearMonth::new(2007, 7));
    }
}
