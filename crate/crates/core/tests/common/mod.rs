#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use conceal_core::ingest::{load_corpus, RawEmail, YearMonth};
use conceal_core::{SubType, Trick};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn load_fixture_dir(name: &str) -> Vec<RawEmail> {
    load_corpus(&fixtures().join(name)).expect("fixture corpus loads")
}

pub fn message(subject: &str, html: &str) -> Vec<u8> {
    format!(
        "From: promo@example.net\r\nTo: user@example.org\r\nSubject: {subject}\r\n\
         MIME-Version: 1.0\r\nContent-Type: text/html; charset=utf-8\r\n\
         Content-Transfer-Encoding: 8bit\r\n\r\n{html}\r\n"
    )
    .into_bytes()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    AddParagraph,
    DisruptWord,
    InsertWord,
    Clean,
}

#[derive(Debug, Clone)]
pub struct SyntheticEmail {
    pub raw: RawEmail,
    pub kind: Kind,
    pub subtypes: BTreeSet<SubType>,
    pub tricks: BTreeSet<Trick>,
}

impl SyntheticEmail {
    pub fn concealed(&self) -> bool {
        self.kind != Kind::Clean
    }
}

const VISIBLE: [&str; 10] = [
    "Dear customer, we are happy to tell you that your account has been selected for our summer offer.",
    "Thank you for being with us this year. You can now save more on the products that you like.",
    "Our team has prepared a new catalogue for you and your family with the best prices in town.",
    "This is a reminder that your free trial is about to end. Please let us know if you want to keep it.",
    "We have made some changes to the way we ship orders so that they arrive at your door faster.",
    "Your monthly statement is ready. You can read it online at any time from your home page.",
    "It was a pleasure to meet you at the show last week and we would like to stay in touch with you.",
    "Here is the list of courses that start next month. Most of them are open to new students.",
    "We are writing to let you know that the price of your plan will not change for the next year.",
    "All of our stores will be open on the holiday weekend, and there will be a special gift for you.",
];

const FILLER: [&str; 5] = [
    "the river runs past the old mill and the children walk along it to school every morning in the spring",
    "a good garden needs water and light and a patient hand to pull the weeds before they take over the beds",
    "when the train left the station the rain had stopped and the fields were bright under a pale blue sky",
    "she kept the letters in a box under the stairs and read them again whenever the house was quiet at night",
    "there is a small shop on the corner that sells bread and coffee and the owner knows everyone by name",
];

const SPAM_WORDS: [(&str, usize); 10] = [
    ("mortgage", 4),
    ("discount", 3),
    ("pharmacy", 5),
    ("replica", 3),
    ("casino", 3),
    ("lottery", 4),
    ("investment", 5),
    ("medication", 3),
    ("guaranteed", 5),
    ("prescription", 6),
];

const DICTIONARY: [&str; 10] = [
    "etruscan",
    "thermograph",
    "alodial",
    "supersaturate",
    "vilayet",
    "inflorescence",
    "decipherable",
    "polychromatic",
    "perambulate",
    "egregious",
];

fn set<T: Ord + Copy>(items: &[T]) -> BTreeSet<T> {
    items.iter().copied().collect()
}

fn wrap(body: &str) -> String {
    format!("<html><body bgcolor=\"#ffffff\">\n{body}\n</body></html>")
}

fn add_paragraph(i: usize) -> (String, BTreeSet<Trick>) {
    use Trick::*;
    let para = format!("{} {}", FILLER[i % 5], FILLER[(i + 2) % 5]);
    let (hidden, tricks) = match i {
        0 => (format!("<font color=#fffffc size=2>{para}</font>"), set(&[FontColour])),
        1 => (format!("<div style=\"color:#ffffff\">{para}</div>"), set(&[FontColour])),
        2 => (format!("<div style=\"font-size:1px\">{para}</div>"), set(&[FontSize])),
        3 => (format!("<div style=\"display:none\">{para}</div>"), set(&[TextPosition])),
        4 => (
            format!("<div style=\"position:absolute; left:-5000px\">{para}</div>"),
            set(&[TextPosition]),
        ),
        5 => (
            format!("<table><tr style=\"height:0\"><td>{para}</td></tr></table>"),
            set(&[TableManipulation]),
        ),
        6 => (
            format!("<font color=white style=\"font-size:2px\">{para}</font>"),
            set(&[FontColour, FontSize]),
        ),
        7 => (format!("<div style=\"opacity:0\">{para}</div>"), set(&[Other])),
        8 => (format!("<p style=\"visibility:hidden\">{para}</p>"), set(&[TextPosition])),
        _ => (
            format!("<div style=\"color:#fafffb; font-size:1px; float:right\">{para}</div>"),
            set(&[FontColour, FontSize, TextPosition]),
        ),
    };
    let body = format!("<p>{}</p>\n<p>{}</p>\n{hidden}", VISIBLE[i], VISIBLE[(i + 1) % 10]);
    (wrap(&body), tricks)
}

fn disrupt_word(i: usize) -> (String, BTreeSet<Trick>) {
    use Trick::*;
    let (open, tricks) = match i {
        0 | 1 | 9 => ("<font style=\"FONT-SIZE: 1px\">", set(&[FontSize])),
        2 | 3 => ("<font style=\"color:#ffffff\">", set(&[FontColour])),
        4 => ("<span style=\"display:none\">", set(&[TextPosition])),
        5 => ("<span style=\"font-size:1px; color:white\">", set(&[FontColour, FontSize])),
        6 => ("<span style=\"visibility:hidden\">", set(&[TextPosition])),
        7 => ("<span style=\"opacity:0\">", set(&[Other])),
        _ => ("<font color=#fefefe>", set(&[FontColour])),
    };
    let close = if open.starts_with("<font") { "</font>" } else { "</span>" };
    let split = |(word, at): (&str, usize), junk: &str| format!("{}{open}{junk}{close}{}", &word[..at], &word[at..]);
    let a = split(SPAM_WORDS[i], "q7");
    let b = split(SPAM_WORDS[(i + 3) % 10], "x");
    let body = format!(
        "<p>{} Ask us about our {a} plans.</p>\n<p>Every {b} comes with free delivery.</p>",
        VISIBLE[i]
    );
    (wrap(&body), tricks)
}

fn insert_word(i: usize) -> (String, BTreeSet<Trick>) {
    use Trick::*;
    let (open, close, tricks) = match i {
        0..=3 => ("<span style=\"display:none\">", "</span>", set(&[TextPosition])),
        4 | 5 => (
            "<span style=\"FONT-SIZE: 2px; FLOAT: right; COLOR: white\">",
            "</span>",
            set(&[FontColour, FontSize, TextPosition]),
        ),
        6 | 7 => ("<i style=\"font-size:11px; color:#FFFAFA;\">", "</i>", set(&[FontColour])),
        8 => ("<span style=\"font-size:1px\">", "</span>", set(&[FontSize])),
        _ => ("<span style=\"opacity:0\">", "</span>", set(&[Other])),
    };
    let w1 = DICTIONARY[i];
    let w2 = DICTIONARY[(i + 5) % 10];
    let body = format!(
        "<p>How to save on your{open} {w1} {close} money this season.</p>\n\
         <p>{}</p>\n<p>Order today and{open} {w2} {close} save.</p>",
        VISIBLE[i]
    );
    (wrap(&body), tricks)
}

fn clean(i: usize) -> String {
    let body = match i % 3 {
        0 => format!("<p>{}</p>\n<p>{}</p>", VISIBLE[i], VISIBLE[(i + 4) % 10]),
        1 => format!(
            "<div style=\"font-size:12px; color:#222222\"><b>{}</b><br>{}</div>",
            VISIBLE[i],
            VISIBLE[(i + 4) % 10]
        ),
        _ => format!(
            "<table><tr><td>{}</td><td style=\"color:black\">{}</td></tr></table>",
            VISIBLE[i],
            VISIBLE[(i + 4) % 10]
        ),
    };
    wrap(&body)
}

/// 10 emails per sub-type plus 10 clean controls, spread over 2003..=2018.
pub fn synthetic_corpus() -> Vec<SyntheticEmail> {
    let mut out = Vec::new();
    let kinds = [Kind::AddParagraph, Kind::DisruptWord, Kind::InsertWord, Kind::Clean];
    for (k, kind) in kinds.into_iter().enumerate() {
        for i in 0..10 {
            let n = k * 10 + i;
            let year = 2003 + (n % 16) as u16;
            let month = 1 + (n % 12) as u8;
            let (html, subtypes, tricks) = match kind {
                Kind::AddParagraph => {
                    let (h, t) = add_paragraph(i);
                    (h, set(&[SubType::AddParagraph]), t)
                }
                Kind::DisruptWord => {
                    let (h, t) = disrupt_word(i);
                    (h, set(&[SubType::DisruptWord]), t)
                }
                Kind::InsertWord => {
                    let (h, t) = insert_word(i);
                    (h, set(&[SubType::InsertWord]), t)
                }
                Kind::Clean => (clean(i), BTreeSet::new(), BTreeSet::new()),
            };
            let id = format!("{year}/{month:02}/synthetic_{n:02}.txt");
            out.push(SyntheticEmail {
                raw: RawEmail {
                    id,
                    received_date: YearMonth::new(year, month),
                    bytes: message(&format!("Offer {n}"), &html),
                },
                kind,
                subtypes,
                tricks,
            });
        }
    }
    out
}
