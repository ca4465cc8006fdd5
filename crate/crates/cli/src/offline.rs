use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::Serialize;

use conceal_core::artifacts::{SampleRecord, ViewRecord};
use conceal_core::classify::{classify as classify_views, ConcealmentRecord};
use conceal_core::filters::{evaluate, PipelineConfig, ProcessedEmail};
use conceal_core::ingest::{date_from_path, load_corpus, parse_rfc5322, MimePartSummary};
use conceal_core::jsonl::{read_jsonl, write_jsonl};
use conceal_core::labels::LabelRecord;
use conceal_core::lang::HeuristicIdentifier;
use conceal_core::report::{aggregate, apply_labels, emit_reports};
use conceal_core::sampler::{draw_sample, LengthBins, SamplePlan, StratumInput, StratumLabel};
use conceal_core::style::resolve_styles;
use conceal_core::views::ConcealedSpan;
use conceal_core::visibility::dump_styles;
use conceal_core::{dom::parse_html, FilterVerdict, PipelineCounts, RawEmail, Stage, YearMonth};

fn print_json<T: Serialize>(value: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn process_all(corpus: &[RawEmail]) -> Vec<ProcessedEmail> {
    let lang = HeuristicIdentifier::default();
    let config = PipelineConfig::default();
    let mut out: Vec<ProcessedEmail> = corpus.par_iter().map(|raw| evaluate(raw, &lang, &config)).collect();
    out.sort_by(|a, b| a.verdict.id.cmp(&b.verdict.id));
    out
}

#[derive(Serialize)]
struct IngestEntry {
    id: String,
    date: Option<YearMonth>,
    bytes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    parts: Option<Vec<MimePartSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct IngestSummary {
    emails: usize,
    parse_errors: usize,
    undated: usize,
    by_year: BTreeMap<u16, usize>,
}

pub fn ingest(corpus: &Path, out: Option<&Path>) -> anyhow::Result<()> {
    let emails = load_corpus(corpus)?;
    let entries: Vec<IngestEntry> = emails
        .par_iter()
        .map(|raw| {
            let (parts, error) = match parse_rfc5322(raw) {
                Ok(p) => (Some(p.parts.iter().map(MimePartSummary::from).collect()), None),
                Err(e) => (None, Some(e.to_string())),
            };
            IngestEntry {
                id: raw.id.clone(),
                date: raw.received_date,
                bytes: raw.bytes.len(),
                parts,
                error,
            }
        })
        .collect();
    let mut by_year = BTreeMap::new();
    for e in &entries {
        if let Some(d) = e.date {
            *by_year.entry(d.year).or_insert(0) += 1;
        }
    }
    if let Some(out) = out {
        write_jsonl(out, &entries)?;
    }
    print_json(&IngestSummary {
        emails: entries.len(),
        parse_errors: entries.iter().filter(|e| e.error.is_some()).count(),
        undated: entries.iter().filter(|e| e.date.is_none()).count(),
        by_year,
    })
}

pub fn filter(corpus: &Path, out: &Path, counts_path: &Path, views: Option<&Path>) -> anyhow::Result<()> {
    let emails = load_corpus(corpus)?;
    let processed = process_all(&emails);
    let counts = PipelineCounts::from_verdicts(processed.iter().map(|p| &p.verdict));
    write_jsonl(out, processed.iter().map(|p| &p.verdict))?;
    write_json(counts_path, &counts)?;
    if let Some(views) = views {
        let by_id: BTreeMap<&str, &RawEmail> = emails.iter().map(|r| (r.id.as_str(), r)).collect();
        let records: Vec<ViewRecord> = processed
            .iter()
            .filter(|p| p.verdict.stage_outcome == Stage::Eligible)
            .filter_map(|p| ViewRecord::from_processed(by_id[p.verdict.id.as_str()], p))
            .collect();
        write_jsonl(views, &records)?;
    }
    print_json(&counts)
}

fn load_one(email: &str, corpus: Option<&Path>) -> anyhow::Result<RawEmail> {
    let (path, id) = match corpus {
        Some(root) => (root.join(email), email.trim_start_matches('/').to_string()),
        None => (PathBuf::from(email), email.to_string()),
    };
    let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok(RawEmail {
        received_date: date_from_path(Path::new(&id)),
        id,
        bytes,
    })
}

#[derive(Serialize)]
struct ViewsOutput<'a> {
    id: &'a str,
    stage_outcome: Stage,
    mail_filter_tokens: &'a [String],
    recipient_tokens: &'a [String],
    concealed_spans: &'a [ConcealedSpan],
    jaccard: f64,
}

pub fn views(email: &str, corpus: Option<&Path>) -> anyhow::Result<()> {
    let raw = load_one(email, corpus)?;
    let p = evaluate(&raw, &HeuristicIdentifier::default(), &PipelineConfig::default());
    let Some(v) = &p.views else {
        bail!("{}: {:?}, {}", raw.id, p.verdict.stage_outcome, p.verdict.detail);
    };
    print_json(&ViewsOutput {
        id: &raw.id,
        stage_outcome: p.verdict.stage_outcome,
        mail_filter_tokens: &v.mail_filter.tokens,
        recipient_tokens: &v.recipient.tokens,
        concealed_spans: &v.concealed_spans,
        jaccard: v.jaccard,
    })
}

pub fn inspect(email: &str, corpus: Option<&Path>, dump: bool) -> anyhow::Result<()> {
    let raw = load_one(email, corpus)?;
    let p = evaluate(&raw, &HeuristicIdentifier::default(), &PipelineConfig::default());
    if !dump {
        return print_json(&serde_json::json!({
            "verdict": p.verdict,
            "document": p.document,
        }));
    }
    let Some(html) = &p.normalized_html else {
        bail!("{}: {:?}, {}", raw.id, p.verdict.stage_outcome, p.verdict.detail);
    };
    let sdom = resolve_styles(parse_html(html));
    print_json(&dump_styles(&sdom, &PipelineConfig::default().views.visibility))
}

pub struct SampleArgs {
    pub verdicts: PathBuf,
    pub views: PathBuf,
    pub target: usize,
    pub cap: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub length_edges: Option<Vec<f64>>,
    pub top_up: bool,
    pub shortfall: Option<PathBuf>,
}

#[derive(Serialize)]
struct SampleReport {
    drawn: usize,
    strata: usize,
    length_edges: Vec<f64>,
    population: BTreeMap<StratumLabel, usize>,
    drawn_per_stratum: BTreeMap<StratumLabel, usize>,
    shortfall: BTreeMap<StratumLabel, usize>,
    skipped: Vec<String>,
}

pub fn sample(args: SampleArgs) -> anyhow::Result<()> {
    if args.cap < args.target {
        bail!("--cap {} is below --target {}", args.cap, args.target);
    }
    let verdicts: Vec<FilterVerdict> = read_jsonl(&args.verdicts)?;
    let eligible: BTreeMap<&str, &FilterVerdict> = verdicts
        .iter()
        .filter(|v| v.stage_outcome == Stage::Eligible)
        .map(|v| (v.id.as_str(), v))
        .collect();
    let views: Vec<ViewRecord> = read_jsonl(&args.views)?;
    let views: BTreeMap<String, ViewRecord> = views
        .into_iter()
        .filter(|v| eligible.contains_key(v.id.as_str()))
        .map(|v| (v.id.clone(), v))
        .collect();

    let mut undated = 0;
    let inputs: Vec<StratumInput> = views
        .values()
        .filter_map(|v| {
            let date = v.date.or(eligible[v.id.as_str()].date);
            if date.is_none() {
                undated += 1;
            }
            Some(StratumInput {
                id: v.id.clone(),
                year: date?.year,
                jaccard: v.views.jaccard,
                html_length: v.html_length,
            })
        })
        .collect();
    let bins = match &args.length_edges {
        Some(edges) => LengthBins::from_edges(edges)?,
        None => {
            let lengths: Vec<usize> = inputs.iter().map(|i| i.html_length).collect();
            LengthBins::from_lengths(&lengths).context("no eligible emails with views to sample from")?
        }
    };
    let plan = SamplePlan {
        target_per_stratum: args.target,
        cap_per_stratum: args.cap,
        seed: args.seed,
        top_up: args.top_up,
    };
    let outcome = draw_sample(&inputs, &bins, &plan);
    let mut records: Vec<SampleRecord> = outcome
        .items
        .iter()
        .map(|item| SampleRecord {
            view: views[&item.id].clone(),
            stratum: item.stratum,
            round: item.round,
        })
        .collect();
    records.sort_by(|a, b| a.view.id.cmp(&b.view.id));
    write_jsonl(&args.out, &records)?;

    let mut skipped: Vec<String> = outcome.skipped.iter().map(ToString::to_string).collect();
    if undated > 0 {
        skipped.push(format!("{undated} emails without a date"));
    }
    let report = SampleReport {
        drawn: records.len(),
        strata: outcome.population.len(),
        length_edges: bins.edges.clone(),
        drawn_per_stratum: outcome.per_stratum(),
        population: outcome.population,
        shortfall: outcome.shortfall,
        skipped,
    };
    if let Some(path) = &args.shortfall {
        write_json(path, &report)?;
    }
    eprintln!(
        "drew {} emails from {} strata, first-round shortfall {}, {} skipped",
        report.drawn,
        report.strata,
        report.shortfall.values().sum::<usize>(),
        report.skipped.len()
    );
    Ok(())
}

pub fn classify(sample: &Path, out: &Path) -> anyhow::Result<()> {
    let sample: Vec<SampleRecord> = read_jsonl(sample)?;
    let p_tok = PipelineConfig::default().views.paragraph_tokens;
    let records: Vec<ConcealmentRecord> = sample
        .par_iter()
        .map(|s| {
            let mut r = classify_views(&s.view.id, &s.view.views, p_tok);
            r.date = s.view.date;
            r.stratum = Some(s.stratum);
            r.html_length = Some(s.view.html_length);
            r
        })
        .collect();
    write_jsonl(out, &records)?;
    let concealed = records.iter().filter(|r| r.has_concealment).count();
    eprintln!("classified {} emails, {} with concealment", records.len(), concealed);
    Ok(())
}

pub fn report(records: &Path, verdicts: &Path, labels: Option<&Path>, out: &Path) -> anyhow::Result<()> {
    let records: Vec<ConcealmentRecord> = read_jsonl(records)?;
    let verdicts: Vec<FilterVerdict> = read_jsonl(verdicts)?;
    let records = match labels {
        Some(path) => {
            // File order is append order, so the last label per id wins.
            let labels: Vec<LabelRecord> = read_jsonl(path)?;
            let ids: BTreeSet<&str> = records.iter().map(|r| r.id.as_str()).collect();
            let unmatched = labels.iter().filter(|l| !ids.contains(l.id.as_str())).count();
            if unmatched > 0 {
                eprintln!("{unmatched} labels refer to emails outside the records");
            }
            apply_labels(&records, &labels)
        }
        None => records,
    };
    let bundle = aggregate(&records, &verdicts)?;
    let files = emit_reports(&bundle, out)?;
    eprintln!("wrote {} files to {}", files.len(), out.display());
    print_json(&bundle.counts)
}
