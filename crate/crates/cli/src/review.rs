use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Context;
use clap::Subcommand;

use conceal_client::ReviewClient;
use conceal_core::artifacts::SampleRecord;
use conceal_core::classify::ConcealmentRecord;
use conceal_core::jsonl::read_jsonl;
use conceal_core::labels::{LabelInput, LabelLog};
use conceal_core::review::{DiffKind, Perspectives, ReviewStore, SampleQuery};
use conceal_core::sampler::StratumLabel;
use conceal_core::FilterVerdict;

pub struct ServeArgs {
    pub sample: PathBuf,
    pub records: Option<PathBuf>,
    pub labels: PathBuf,
    pub verdicts: Option<PathBuf>,
    pub addr: SocketAddr,
    pub static_dir: Option<PathBuf>,
}

fn runtime() -> anyhow::Result<tokio::runtime::Runtime> {
    Ok(tokio::runtime::Builder::new_multi_thread().enable_all().build()?)
}

pub fn serve(args: ServeArgs) -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let sample: Vec<SampleRecord> = read_jsonl(&args.sample)?;
    let records: Vec<ConcealmentRecord> = match &args.records {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    let verdicts: Vec<FilterVerdict> = match &args.verdicts {
        Some(p) => read_jsonl(p)?,
        None => Vec::new(),
    };
    let labels = LabelLog::open(&args.labels)?;
    eprintln!(
        "{} sampled emails, {} labeled, label log {}",
        sample.len(),
        labels.labeled_count(),
        args.labels.display()
    );
    let app = conceal_service::router(ReviewStore::new(sample, records, verdicts, labels), args.static_dir);
    runtime()?.block_on(async move {
        let (addr, server) = conceal_service::bind(args.addr, app).await?;
        eprintln!("listening on http://{addr}");
        server.await
    })?;
    Ok(())
}

#[derive(Subcommand)]
pub enum Action {
    /// List sampled emails.
    List {
        /// Stratum as year,jaccard_bin,length_bin (0-based bins).
        #[arg(long)]
        stratum: Option<StratumLabel>,
        #[arg(long)]
        labeled: Option<bool>,
        #[arg(long)]
        page: Option<usize>,
        #[arg(long)]
        page_size: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Show one email's views, token diff and labels.
    Show {
        id: String,
        #[arg(long)]
        json: bool,
    },
    /// Record an analyst label.
    Label {
        id: String,
        /// The email conceals content; omit for a clean verdict.
        #[arg(long)]
        concealed: bool,
        #[arg(long = "subtype")]
        subtypes: Vec<String>,
        #[arg(long = "trick")]
        tricks: Vec<String>,
        #[arg(long, default_value = "")]
        note: String,
    },
    /// Print the live report over the sample.
    Stats {
        #[arg(long)]
        json: bool,
    },
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|t| t.to_string()).collect();
    if v.is_empty() {
        "-".to_string()
    } else {
        v.join(",")
    }
}

fn render(p: &Perspectives) -> String {
    let mut out = format!("{}  stratum {}\n", p.id, p.stratum);
    out += &format!(
        "auto:  concealed={} subtypes={} tricks={}\n",
        p.auto_labels.has_concealment,
        join(p.auto_labels.subtypes.iter().map(|s| s.as_str())),
        join(p.auto_labels.tricks.iter().map(|t| t.as_str())),
    );
    match &p.human_label {
        Some(l) => {
            out += &format!(
                "human: concealed={} subtypes={} tricks={} at {}",
                l.has_concealment,
                join(l.subtypes.iter().map(|s| s.as_str())),
                join(l.tricks.iter().map(|t| t.as_str())),
                l.timestamp.to_rfc3339(),
            );
            if !l.note.is_empty() {
                out += &format!(" note={:?}", l.note);
            }
            out.push('\n');
        }
        None => out += "human: unlabeled\n",
    }
    out += "\nrecipient view:\n";
    out += &p.recipient_tokens.join(" ");
    out += "\n\ndiff ([-filter only-] {+recipient only+}):\n";
    let diff: Vec<String> = p
        .token_diff
        .iter()
        .map(|s| {
            let text = s.tokens.join(" ");
            match s.op {
                DiffKind::Equal => text,
                DiffKind::Delete => format!("[-{text}-]"),
                DiffKind::Insert => format!("{{+{text}+}}"),
            }
        })
        .collect();
    out += &diff.join(" ");
    out.push('\n');
    out
}

pub fn run(server: &str, action: Action) -> anyhow::Result<()> {
    let client = ReviewClient::new(server)?;
    runtime()?.block_on(async move {
        match action {
            Action::List {
                stratum,
                labeled,
                page,
                page_size,
                json,
            } => {
                let query = SampleQuery {
                    stratum,
                    labeled,
                    page,
                    page_size,
                };
                let page = client.list_sample(&query).await?;
                if json {
                    println!("{}", serde_json::to_string_pretty(&page)?);
                    return Ok(());
                }
                for item in &page.items {
                    println!(
                        "{}\t{}\tround {}\t{}\t{}\t{}",
                        item.id,
                        item.stratum,
                        item.round,
                        if item.labeled { "labeled" } else { "unlabeled" },
                        join(item.auto.subtypes.iter().map(|s| s.as_str())),
                        join(item.auto.tricks.iter().map(|t| t.as_str())),
                    );
                }
                eprintln!("page {} of {}, {} emails", page.page, page.pages, page.total);
            }
            Action::Show { id, json } => {
                let p = client.perspectives(&id).await?;
                if json {
                    println!("{}", serde_json::to_string_pretty(&p)?);
                } else {
                    print!("{}", render(&p));
                }
            }
            Action::Label {
                id,
                concealed,
                subtypes,
                tricks,
                note,
            } => {
                let input = LabelInput {
                    has_concealment: concealed,
                    subtypes,
                    tricks,
                    note,
                };
                let stored = client.post_label(&id, &input).await?;
                println!("{}", serde_json::to_string_pretty(&stored)?);
            }
            Action::Stats { json } => {
                let bundle = client.stats().await?;
                if json {
                    println!("{}", serde_json::to_string_pretty(&bundle)?);
                } else {
                    println!("{}", serde_json::to_string_pretty(&bundle.counts)?);
                }
            }
        }
        Ok::<_, anyhow::Error>(())
    })
    .with_context(|| format!("talking to {server}"))
}
