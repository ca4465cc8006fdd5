//! Acceptance gate. Each criterion prints one PASS/FAIL line. The test
//! fails on any FAIL outside [`KNOWN_UNATTAINABLE`], and on any listed
//! criterion that starts passing.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{load_fixture_dir, synthetic_corpus, Kind};
use conceal_core::classify::classify;
use conceal_core::color::{contrast_ratio, Rgba};
use conceal_core::dom::{Dom, NodeKind};
use conceal_core::filters::{evaluate, run_pipeline, PipelineConfig, ProcessedEmail, Stage};
use conceal_core::lang::HeuristicIdentifier;
use conceal_core::metrics::jaccard_distance;
use conceal_core::report::{aggregate, VennRegions};
use conceal_core::sampler::{
    draw_sample, jaccard_bin, LengthBins, SamplePlan, StratumInput, StratumLabel, JACCARD_EDGES,
};
use conceal_core::style::resolve_styles;
use conceal_core::views::{extract_views, tokenize, Boundary, ViewConfig, ViewPair};
use conceal_core::visibility::{judge_visibility, ConcealReason, VisibilityThresholds};
use conceal_core::{ConcealmentRecord, PipelineCounts, SubType, Trick};

const JACCARD_TRIALS: usize = 10_000;
const JACCARD_BUDGET: Duration = Duration::from_secs(5);
const GOLDEN_BUDGET: Duration = Duration::from_secs(1);
const SYNTHETIC_BUDGET: Duration = Duration::from_secs(10);
const BLACK_ON_WHITE: f64 = 21.0;
const RATIO_TOL: f64 = 1e-9;

/// Evaluated as written and expected to print FAIL: the recipient view
/// joins the visible halves of a word split by hidden characters, so that
/// word is absent from the mail filter view whenever word splitting occurs.
const KNOWN_UNATTAINABLE: &[&str] = &["containment property"];

struct Gate {
    failures: Vec<String>,
}

impl Gate {
    fn check(&mut self, name: &str, outcome: Result<String, String>) {
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                self.failures.push(name.to_string());
            }
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($msg)+));
        }
    };
}

fn set(tokens: &[String]) -> BTreeSet<&str> {
    tokens.iter().map(String::as_str).collect()
}

fn words(s: &str) -> Vec<String> {
    s.split_whitespace().map(String::from).collect()
}

fn lang() -> HeuristicIdentifier {
    HeuristicIdentifier::default()
}

fn record_for(p: &ProcessedEmail) -> ConcealmentRecord {
    let views = p.views.as_ref().expect("eligible email has views");
    let mut r = classify(&p.verdict.id, views, ViewConfig::default().paragraph_tokens);
    r.date = p.verdict.date;
    r.html_length = p.verdict.html_length;
    r
}

fn fragment(html: &str) -> (ViewPair, ConcealmentRecord) {
    let config = ViewConfig::default();
    let views = extract_views(html, &config);
    let record = classify("fragment", &views, config.paragraph_tokens);
    (views, record)
}

// brute-force oracle over a small universe encoded as bitmasks
fn oracle_counts(a: u16, b: u16) -> (u32, u32) {
    let (mut inter, mut union) = (0, 0);
    for bit in 0..16 {
        let (x, y) = (a >> bit & 1 == 1, b >> bit & 1 == 1);
        inter += (x && y) as u32;
        union += (x || y) as u32;
    }
    (inter, union)
}

fn oracle_distance(a: u16, b: u16) -> f64 {
    let (inter, union) = oracle_counts(a, b);
    if union == 0 {
        0.0
    } else {
        1.0 - inter as f64 / union as f64
    }
}

fn to_set(mask: u16, width: u32) -> BTreeSet<u32> {
    (0..width).filter(|bit| mask >> bit & 1 == 1).collect()
}

fn criterion_jaccard() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x01ac_ca4d);
    for trial in 0..JACCARD_TRIALS {
        let width = rng.random_range(0..=10u32);
        let limit = 1u16 << width;
        let (a, b, c) = (
            rng.random_range(0..limit),
            rng.random_range(0..limit),
            rng.random_range(0..limit),
        );
        let (sa, sb, sc) = (to_set(a, width), to_set(b, width), to_set(c, width));
        let dab = jaccard_distance(&sa, &sb);
        let dba = jaccard_distance(&sb, &sa);
        ensure!(dab == oracle_distance(a, b), "trial {trial}: {dab} != oracle {}", oracle_distance(a, b));
        ensure!(dab == dba, "trial {trial}: asymmetric {dab} vs {dba}");
        ensure!((0.0..=1.0).contains(&dab), "trial {trial}: {dab} out of bounds");
        ensure!((dab == 0.0) == (a == b), "trial {trial}: zero-iff-equal broken for {a:#b} {b:#b}");

        // triangle inequality in exact rationals: d(a,c) <= d(a,b) + d(b,c)
        let frac = |x: u16, y: u16| {
            let (i, u) = oracle_counts(x, y);
            if u == 0 {
                (0i64, 1i64)
            } else {
                ((u - i) as i64, u as i64)
            }
        };
        let ((n1, d1), (n2, d2), (n3, d3)) = (frac(a, c), frac(a, b), frac(b, c));
        ensure!(n1 * d2 * d3 <= (n2 * d3 + n3 * d2) * d1, "trial {trial}: triangle inequality violated");
        let dac = jaccard_distance(&sa, &sc);
        let dbc = jaccard_distance(&sb, &sc);
        ensure!(dac <= dab + dbc + 1e-12, "trial {trial}: float triangle {dac} > {dab} + {dbc}");
    }
    let took = start.elapsed();
    ensure!(took < JACCARD_BUDGET, "took {took:?}");
    Ok(format!("{JACCARD_TRIALS} triples agree with brute force in {took:?}"))
}

fn all_fixture_views() -> Vec<(String, ViewPair)> {
    let mut out = Vec::new();
    let config = PipelineConfig::default();
    for dir in ["golden", "preprocess", "stage_order"] {
        for raw in load_fixture_dir(dir) {
            if let Some(v) = evaluate(&raw, &lang(), &config).views {
                out.push((format!("{dir}/{}", raw.id), v));
            }
        }
    }
    for s in synthetic_corpus() {
        if let Some(v) = evaluate(&s.raw, &lang(), &config).views {
            out.push((format!("synthetic/{}", s.raw.id), v));
        }
    }
    for (name, html) in trick_fragments() {
        out.push((format!("fragment/{name}"), extract_views(&html, &ViewConfig::default())));
    }
    out
}

fn splits_words(v: &ViewPair) -> bool {
    v.concealed_spans.iter().any(|sp| sp.boundary == Boundary::SplitsVisibleWord)
}

fn criterion_containment() -> Result<String, String> {
    let views = all_fixture_views();
    let mut violations = Vec::new();
    let mut bound_failures = Vec::new();
    let (mut bounded, mut clean_of_splits) = (0, 0);
    for (id, v) in &views {
        let filter = set(&v.mail_filter.tokens);
        let recipient = set(&v.recipient.tokens);
        let expected = jaccard_distance(&filter, &recipient);
        ensure!(v.jaccard == expected, "{id}: stored jaccard {} != {expected}", v.jaccard);
        if !splits_words(v) {
            clean_of_splits += 1;
        }
        let missing: Vec<&str> = recipient.difference(&filter).copied().collect();
        if !missing.is_empty() {
            violations.push(format!("{id} ({} words, e.g. {:?})", missing.len(), missing[0]));
            continue;
        }
        let concealed_only = filter.difference(&recipient).count();
        if concealed_only < recipient.len() {
            bounded += 1;
            if v.jaccard >= 0.5 {
                bound_failures.push(format!("{id} jaccard {}", v.jaccard));
            }
        }
    }
    ensure!(
        bound_failures.is_empty(),
        "jaccard >= 0.5 despite fewer concealed than visible tokens: {bound_failures:?}"
    );
    ensure!(
        violations.is_empty(),
        "{} of {} emails have recipient tokens absent from the filter view (hidden text inside a rendered word): {}",
        violations.len(),
        views.len(),
        violations.join("; ")
    );
    Ok(format!("{} emails contained ({clean_of_splits} without split words), {bounded} under the 0.5 bound", views.len()))
}

const ADD_RECIPIENT: &str = "good morning customer you have problems we can solve it click this link below";
const ADD_FILTER: &str = "good morning customer you have problems we can solve it click this link below be wrong and what when to use them how used in the java api put you to sleep we think you get to take learned by those to use them and when you don t want to patterns look in to do instead you want what to expect a visually rich own with your co worker your time is too important used in the java api look in the wild to learn how those about inheritance might sounds how the factory secret language is so often misunderstood is so often misunderstood brain in a way that sticks or on the real relationship put you to sleep we think the trading spaces show you don t want to own with your co worker decorator is something from want to see how and adapter with head first when to use them how that you can hold your with design patterns of design patterns so the next time you re also want to learn";
const DISRUPT_RECIPIENT: &str = "hello dear home owner we have been notified that your mortgage rate is fixed at a very high interest rate therefore you are currently overpaying which sums up to thousands of dollars annually luckily for you we can guarantee the lowest rates in the us 3 39 so hurry because the rate forecast is not looking good there is no obligation and it s free lock on the 3 39 even with bad credit click here now for details remove here";
const DISRUPT_FILTER: &str = "hello dekaa r home owner we have b5een n8lotified tzhfma1t your motrtgsfxage ralte is fiqnxed at a very high interest ra te therex6fore you are cugtrrently ovtcerpaying whnkich sums 2kup tmvo tlhou6syarnzds of dolaxlars alnnu5all y lu3ckiily f5or you we can guarannjtee the lowest rates in the u sd 3 39 so hurry bec8aufmse the rate forecast is not looking goomrd thdere is no obligation and it s f rxdee l ock on the 3 39 e ve n wghith bjad cr e3dit clpsick her e ngo82w fkor dcetaqtials remove htoe re";
const INSERT_RECIPIENT: &str = "how to save on your medications over 70 pharmshop successfull and proven way to save your money viagra cialis valium and many other best prices worldwide shipping easy order form total confidentiality 250000 satisfied customers order today and save";
const INSERT_FILTER: &str = "how to save on your m etruscan edlcations over 70 p thermograph harmshop successfull and proven way to sa alodial ve your supersaturate money playedout v resource ag a vilayet l intimacy lu selfhealing l inflorescence ra decipherable cl polychromatic is v galenic al respecting m and many other best p crotch rlces worl registrar dwide shlpplng ea depredate sy order form total confidenti perambulate aiity 250 000 satisf coralisland ied customers order to egregious day and save";

fn criterion_golden() -> Result<String, String> {
    let start = Instant::now();
    let emails = load_fixture_dir("golden");
    let by_name: BTreeMap<&str, &conceal_core::RawEmail> = emails
        .iter()
        .map(|e| (e.id.rsplit('/').next().unwrap_or(&e.id), e))
        .collect();
    let cases = [
        ("1185318861.15426_491.txt", "2007/07", SubType::AddParagraph, Trick::FontColour),
        ("1091394472.23940_30.txt", "2004/08", SubType::DisruptWord, Trick::FontSize),
        ("1121574039.27681_5.txt", "2005/07", SubType::InsertWord, Trick::TextPosition),
    ];
    for (name, date, subtype, trick) in cases {
        let raw = by_name.get(name).ok_or(format!("missing golden {name}"))?;
        let p = evaluate(raw, &lang(), &PipelineConfig::default());
        ensure!(p.verdict.stage_outcome == Stage::Eligible, "{name}: {:?} ({})", p.verdict.stage_outcome, p.verdict.detail);
        ensure!(p.verdict.date.map(|d| d.to_string()).as_deref() == Some(date), "{name}: date {:?}", p.verdict.date);
        let r = record_for(&p);
        let v = p.views.as_ref().expect("views");
        ensure!(r.subtypes == BTreeSet::from([subtype]), "{name}: subtypes {:?}", r.subtypes);
        ensure!(r.tricks == BTreeSet::from([trick]), "{name}: tricks {:?}", r.tricks);
        match subtype {
            SubType::AddParagraph => {
                ensure!(v.recipient.tokens == words(ADD_RECIPIENT), "{name}: recipient {:?}", v.recipient.tokens);
                ensure!(v.mail_filter.tokens == words(ADD_FILTER), "{name}: filter view differs");
            }
            SubType::DisruptWord => {
                ensure!(v.recipient.tokens == words(DISRUPT_RECIPIENT), "{name}: recipient {:?}", v.recipient.tokens);
                ensure!(v.mail_filter.tokens == words(DISRUPT_FILTER), "{name}: filter {:?}", v.mail_filter.tokens);
            }
            SubType::InsertWord => {
                ensure!(v.recipient.tokens == words(INSERT_RECIPIENT), "{name}: recipient {:?}", v.recipient.tokens);
                let row = words(INSERT_FILTER);
                let row = set(&row);
                let hidden: BTreeSet<String> = v.concealed_spans.iter().flat_map(|sp| tokenize(&sp.text)).collect();
                ensure!(hidden.len() >= 15, "{name}: only {} inserted words", hidden.len());
                let foreign: Vec<&String> = hidden.iter().filter(|t| !row.contains(t.as_str())).collect();
                ensure!(foreign.is_empty(), "{name}: inserted words {foreign:?} not in the filter row");
                let filter = set(&v.mail_filter.tokens);
                let recipient = set(&v.recipient.tokens);
                ensure!(hidden.iter().all(|t| filter.contains(t.as_str()) && !recipient.contains(t.as_str())), "{name}: inserted words leak into the recipient view");
            }
        }
    }

    let (v, _) = fragment(r#"Pil<FONT style="FONT-SIZE: 1px">#</font>l<FONT style="FONT-SIZE: 1px">= /</font>s"#);
    ensure!(v.recipient.tokens.contains(&"pills".to_string()), "pills fragment recipient {:?}", v.recipient.tokens);
    ensure!(!v.mail_filter.tokens.contains(&"pills".to_string()), "pills fragment filter {:?}", v.mail_filter.tokens);

    let took = start.elapsed();
    ensure!(took < GOLDEN_BUDGET, "took {took:?}");
    Ok(format!("3 goldens match token rows, sub-types and tricks in {took:?}"))
}

fn trick_fragments() -> Vec<(&'static str, String)> {
    vec![
        (
            "font_colour",
            r#"<A href="cid:shop">Cool shop in a one click</A> <br>
               <font color=white> In their native </font>
               <font color=white>(or worse, a flat tire), </font>"#
                .to_string(),
        ),
        (
            "font_colour_fffffc",
            r#"<FONT color=#fffffc size=2>prolate balfour rabid pliant embroider</FONT>
               <font face=Arial color=#000000>Each Order Includes</font>"#
                .to_string(),
        ),
        (
            "font_size",
            r#"<style>DIV FONT {FONT-SIZE: 2px}</style>
               Please watch this one trade Tuesday and all week!<br>
               <DIV><FONT size=2>moth-eat sail twine<BR>
               bracket capital south-southwesterly<BR></FONT></DIV>"#
                .to_string(),
        ),
        (
            "text_position",
            r#"<table><tr><td align="left">Get the great di<span style="FONT-SIZE: 2px; FLOAT: right; COLOR: white"> jzw </span>scou<span style="FONT-SIZE: 2px; FLOAT: right; COLOR: white"> kl </span>nts on popular products</td></tr></table>"#
                .to_string(),
        ),
        (
            "table_manipulation",
            r#"<table><tr>
               <td>Ac<br>Cl<br>De</td>
               <td>om<br>om<br>fl</td>
               <td>pl<br>id<br>uc</td>
               <td>ia<br>&nbsp;&nbsp;<br>an</td>
               </tr></table>"#
                .to_string(),
        ),
        (
            "other_first_letter",
            r#"<STYLE>
               DIV {COLOR: #FAFFFB}
               DIV.b:first-letter {COLOR: #28ED2A}
               DIV:first-letter {FONT-SIZE: 300%}
               </STYLE>
               <DIV class=b>Seet!</DIV>
               <DIV class=b>Expired,</DIV>
               <DIV class=b>Lodgings,</DIV>
               <DIV class=b>Lake:</DIV>"#
                .to_string(),
        ),
    ]
}

fn criterion_trick_table() -> Result<String, String> {
    let expected = [
        ("font_colour", Trick::FontColour),
        ("font_colour_fffffc", Trick::FontColour),
        ("font_size", Trick::FontSize),
        ("text_position", Trick::TextPosition),
        ("table_manipulation", Trick::TableManipulation),
        ("other_first_letter", Trick::Other),
    ];
    let fragments: BTreeMap<_, _> = trick_fragments().into_iter().collect();
    for (name, trick) in expected {
        let (v, r) = fragment(&fragments[name]);
        ensure!(r.has_concealment, "{name}: not detected");
        ensure!(r.tricks.contains(&trick), "{name}: tricks {:?} lack {trick}", r.tricks);
        match name {
            "table_manipulation" => {
                for w in ["acomplia", "clomid", "deflucan"] {
                    ensure!(v.recipient.tokens.iter().any(|t| t == w), "{name}: recipient {:?} lacks {w}", v.recipient.tokens);
                }
            }
            "other_first_letter" => {
                ensure!(v.recipient.tokens == words("s e l l"), "{name}: recipient {:?}", v.recipient.tokens);
                ensure!(v.mail_filter.tokens == words("seet expired lodgings lake"), "{name}: filter {:?}", v.mail_filter.tokens);
            }
            "font_colour" => {
                ensure!(v.recipient.tokens == words("cool shop in a one click"), "{name}: recipient {:?}", v.recipient.tokens);
            }
            _ => {}
        }
    }
    Ok("6 fragments carry their row's trick; first-letter recipient is [s, e, l, l]".into())
}

fn judge_word(html: &str, word: &str) -> BTreeSet<ConcealReason> {
    let sdom = resolve_styles(Dom::parse(html));
    let node = sdom
        .dom
        .preorder()
        .into_iter()
        .find(|&id| matches!(&sdom.dom.node(id).kind, NodeKind::Text { text } if text.contains(word)))
        .expect("text node present");
    judge_visibility(&sdom, node, &VisibilityThresholds::default()).reasons
}

fn criterion_thresholds() -> Result<String, String> {
    let t = VisibilityThresholds::default();
    ensure!(t.contrast_min == 1.05 && t.font_size_max == 3.0, "defaults {t:?}");
    let white = Rgba::from_hex("#ffffff").expect("hex");
    let ratio = contrast_ratio(Rgba::from_hex("#000000").expect("hex"), white);
    ensure!((ratio - BLACK_ON_WHITE).abs() <= RATIO_TOL, "black on white ratio {ratio}");
    let pale = contrast_ratio(Rgba::from_hex("#fffffc").expect("hex"), white);
    ensure!(pale < 1.05, "#fffffc ratio {pale}");

    let colour = judge_word(r##"<body bgcolor="#FFFFFF"><p style="color:#FFFFFC">pale</p></body>"##, "pale");
    ensure!(colour == BTreeSet::from([ConcealReason::FontColour]), "#FFFFFC reasons {colour:?}");
    let black = judge_word(r##"<body bgcolor="#FFFFFF"><p style="color:#000000">dark</p></body>"##, "dark");
    ensure!(black.is_empty(), "black reasons {black:?}");
    for (px, hidden) in [(1, true), (3, true), (4, false)] {
        let r = judge_word(&format!(r#"<p style="font-size:{px}px">tiny</p>"#), "tiny");
        let expect = if hidden { BTreeSet::from([ConcealReason::FontSize]) } else { BTreeSet::new() };
        ensure!(r == expect, "{px}px reasons {r:?}");
    }
    Ok(format!("black/white ratio {ratio}, #FFFFFC ratio {pale:.4}, 1px and 3px hidden, 4px visible"))
}

fn criterion_synthetic() -> Result<String, String> {
    let corpus = synthetic_corpus();
    let raws: Vec<_> = corpus.iter().map(|s| s.raw.clone()).collect();
    let start = Instant::now();
    let (processed, counts) = run_pipeline(&raws, &lang(), &PipelineConfig::default());
    let records: Vec<ConcealmentRecord> = processed.iter().filter(|p| p.views.is_some()).map(record_for).collect();
    let took = start.elapsed();
    ensure!(counts.eligible == corpus.len(), "only {} of {} eligible: {:?}", counts.eligible, corpus.len(),
        processed.iter().filter(|p| p.verdict.stage_outcome != Stage::Eligible).map(|p| (&p.verdict.id, &p.verdict.detail)).collect::<Vec<_>>());
    let by_id: BTreeMap<&str, &ConcealmentRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for s in &corpus {
        let r = by_id[s.raw.id.as_str()];
        match (s.concealed(), r.has_concealment) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            _ => {}
        }
        ensure!(r.subtypes == s.subtypes, "{}: subtypes {:?}, expected {:?}", s.raw.id, r.subtypes, s.subtypes);
        ensure!(r.tricks == s.tricks, "{}: tricks {:?}, expected {:?}", s.raw.id, r.tricks, s.tricks);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fn_) as f64;
    ensure!(precision == 1.0 && recall == 1.0, "precision {precision} recall {recall}");
    ensure!(took < SYNTHETIC_BUDGET, "took {took:?}");
    Ok(format!("{} emails, precision 1.0, recall 1.0, labels exact, {took:?}", corpus.len()))
}

fn criterion_sankey() -> Result<String, String> {
    let corpus = load_fixture_dir("preprocess");
    ensure!(corpus.len() == 7, "{} fixture emails", corpus.len());
    let (processed, counts) = run_pipeline(&corpus, &lang(), &PipelineConfig::default());
    let expected = PipelineCounts {
        parse_error: 0,
        no_html: 1,
        remote_content: 1,
        non_english: 1,
        encoding_error: 1,
        mso_directives: 1,
        eligible: 2,
        total: 7,
    };
    ensure!(counts == expected, "counts {counts:?}; verdicts {:?}",
        processed.iter().map(|p| (&p.verdict.id, p.verdict.stage_outcome)).collect::<Vec<_>>());
    ensure!(counts.is_conserved(), "counts not conserved");

    let spanish = processed.iter().find(|p| p.verdict.stage_outcome == Stage::NonEnglish).expect("one non-English");
    let text = spanish.views.as_ref().expect("views").mail_filter.tokens.join(" ");
    let oracle = whatlang::detect_lang(&text);
    ensure!(oracle == Some(whatlang::Lang::Spa), "oracle language {oracle:?}");

    let order = load_fixture_dir("stage_order");
    let p = evaluate(&order[0], &lang(), &PipelineConfig::default());
    ensure!(p.verdict.stage_outcome == Stage::RemoteContent, "remote+Spanish email -> {:?}", p.verdict.stage_outcome);
    Ok("counts {no_html 1, remote 1, non_english 1, encoding 1, mso 1, eligible 2}; remote precedes language".into())
}

fn criterion_sampler() -> Result<String, String> {
    let bins = LengthBins::from_edges(&[129.0, 3656.0, 7183.0, 10710.0, 14237.0, 17764.0]).map_err(|e| e.to_string())?;
    let tick_labels: Vec<String> = bins.edges.windows(2).map(|w| format!("{}-{}", w[0], w[1])).collect();
    ensure!(tick_labels == ["129-3656", "3656-7183", "7183-10710", "10710-14237", "14237-17764"], "length labels {tick_labels:?}");
    let mut jedges = vec![0.0];
    jedges.extend(JACCARD_EDGES);
    jedges.push(1.0);
    let jlabels: Vec<String> = jedges.windows(2).map(|w| format!("{:.1}-{:.1}", w[0], w[1])).collect();
    ensure!(jlabels == ["0.0-0.2", "0.2-0.4", "0.4-0.6", "0.6-0.8", "0.8-1.0"], "jaccard labels {jlabels:?}");
    for (j, bin) in [(0.0, 0), (0.19, 0), (0.2, 1), (0.4, 2), (0.6, 3), (0.8, 4), (1.0, 4)] {
        ensure!(jaccard_bin(j) == Some(bin), "jaccard {j} -> {:?}", jaccard_bin(j));
    }

    // 16 years x 5 jaccard bins x 2 length bins = 160 occupied strata
    let jmid = [0.1, 0.3, 0.5, 0.7, 0.9];
    let lmid = [1000usize, 5000];
    let mut inputs = Vec::new();
    for year in 2003..=2018u16 {
        for (jb, j) in jmid.iter().enumerate() {
            for (lb, l) in lmid.iter().enumerate() {
                for m in 0..13 {
                    inputs.push(StratumInput {
                        id: format!("{year}-{jb}-{lb}-{m:02}"),
                        year,
                        jaccard: *j,
                        html_length: *l,
                    });
                }
            }
        }
    }
    let plan = SamplePlan {
        target_per_stratum: 7,
        cap_per_stratum: 13,
        seed: 20240601,
        top_up: false,
    };
    let runs: Vec<_> = (0..3).map(|_| draw_sample(&inputs, &bins, &plan)).collect();
    let first = &runs[0];
    ensure!(first.population.len() == 160, "{} strata", first.population.len());
    ensure!(first.items.len() == 1120, "{} drawn", first.items.len());
    let unique: BTreeSet<&str> = first.items.iter().map(|i| i.id.as_str()).collect();
    ensure!(unique.len() == first.items.len(), "duplicates drawn");
    for item in &first.items {
        let parts: Vec<u8> = item.id.split('-').skip(1).take(2).map(|p| p.parse().expect("numeric")).collect();
        let want = StratumLabel {
            year: item.id[..4].parse().expect("year"),
            jaccard_bin: parts[0],
            length_bin: parts[1],
        };
        ensure!(item.stratum == want, "{} drawn for {}", item.id, item.stratum);
    }
    ensure!(runs.iter().all(|r| r.items == first.items), "runs differ under one seed");
    let other = draw_sample(&inputs, &bins, &SamplePlan { seed: 7, ..plan });
    ensure!(other.items != first.items, "a different seed gave the same sample");
    Ok("160 strata x 13 -> 1120 unique, stable over 3 runs, seed-sensitive; bin labels reproduced".into())
}

fn synthetic_records() -> Vec<(Kind, ConcealmentRecord)> {
    let corpus = synthetic_corpus();
    corpus
        .iter()
        .map(|s| (s.kind, record_for(&evaluate(&s.raw, &lang(), &PipelineConfig::default()))))
        .collect()
}

fn criterion_conservation() -> Result<String, String> {
    let records: Vec<ConcealmentRecord> = synthetic_records().into_iter().map(|(_, r)| r).collect();
    let bundle = aggregate(&records, &[]).map_err(|e| e.to_string())?;
    let concealed = records.iter().filter(|r| r.has_concealment).count();
    let year_sum: usize = bundle.by_year.iter().map(|r| r.with_concealment).sum();
    ensure!(bundle.subtype_venn.sum() == concealed, "venn {} vs concealed {concealed}", bundle.subtype_venn.sum());
    ensure!(year_sum == concealed, "year rows {year_sum} vs concealed {concealed}");

    // region order: AP, DW, IW, AP+DW, AP+IW, DW+IW, all three
    let published = VennRegions::from_values([171, 139, 8, 37, 5, 9, 1]);
    ensure!(published.sum() == 370, "published regions sum to {}", published.sum());
    ensure!(published.total_for(SubType::AddParagraph) == 214, "add paragraph total");
    ensure!(published.total_for(SubType::DisruptWord) == 186, "disrupt word total");
    ensure!(published.total_for(SubType::InsertWord) == 23, "insert word total");
    Ok(format!("venn {concealed} = concealed = year rows; 139+8+171+9+5+37+1 = 370"))
}

fn criterion_separation() -> Result<String, String> {
    let records = synthetic_records();
    let mean = |concealed: bool| {
        let js: Vec<f64> = records
            .iter()
            .filter(|(k, _)| (*k != Kind::Clean) == concealed)
            .map(|(_, r)| r.jaccard.expect("jaccard"))
            .collect();
        js.iter().sum::<f64>() / js.len() as f64
    };
    for (kind, r) in &records {
        if *kind == Kind::Clean {
            ensure!(r.jaccard == Some(0.0), "{}: clean jaccard {:?}", r.id, r.jaccard);
        }
    }
    let (with, without) = (mean(true), mean(false));
    ensure!(with > without, "mean concealed {with} <= clean {without}");
    Ok(format!("mean jaccard concealed {with:.3} > clean {without:.3}; clean all 0"))
}

fn main() {
    let mut gate = Gate { failures: Vec::new() };
    gate.check("jaccard metric suite", criterion_jaccard());
    gate.check("containment property", criterion_containment());
    gate.check("golden emails", criterion_golden());
    gate.check("css trick table", criterion_trick_table());
    gate.check("visibility thresholds", criterion_thresholds());
    gate.check("synthetic end-to-end", criterion_synthetic());
    gate.check("preprocessing sankey", criterion_sankey());
    gate.check("stratified sampler", criterion_sampler());
    gate.check("report conservation", criterion_conservation());
    gate.check("separation property", criterion_separation());
    let unexpected: Vec<&String> = gate
        .failures
        .iter()
        .filter(|f| !KNOWN_UNATTAINABLE.contains(&f.as_str()))
        .collect();
    let recovered: Vec<&&str> = KNOWN_UNATTAINABLE
        .iter()
        .filter(|k| !gate.failures.iter().any(|f| f == *k))
        .collect();
    println!(
        "{} of 10 criteria passed; failed: {:?}; known unattainable: {:?}",
        10 - gate.failures.len(),
        gate.failures,
        KNOWN_UNATTAINABLE
    );
    if !recovered.is_empty() {
        println!("listed as unattainable but passing: {recovered:?}");
    }
    if !unexpected.is_empty() || !recovered.is_empty() {
        std::process::exit(1);
    }
}
