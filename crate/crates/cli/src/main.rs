mod offline;
mod review;

use std::net::IpAddr;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "conceal-scan", version, about = "Find concealed text in HTML email")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Walk a corpus and summarise what was found.
    Ingest {
        #[arg(long)]
        corpus: PathBuf,
        /// Per-email MIME summaries as JSONL.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the eligibility pipeline over a corpus.
    Filter {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        counts: PathBuf,
        /// Views of eligible emails as JSONL, input to `sample`.
        #[arg(long)]
        views: Option<PathBuf>,
    },
    /// Print both views of one email as JSON.
    Views {
        /// Email id relative to --corpus, or a file path.
        email: String,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Print the resolved style and judgment of every node of one email.
    Inspect {
        email: String,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        dump_styles: bool,
    },
    /// Draw the stratified review sample.
    Sample {
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long)]
        views: PathBuf,
        #[arg(long, default_value_t = 7)]
        target: usize,
        #[arg(long, default_value_t = 13)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Six ascending HTML length bin edges instead of the data-derived ones.
        #[arg(long, value_delimiter = ',')]
        length_edges: Option<Vec<f64>>,
        #[arg(long)]
        no_top_up: bool,
        /// Population and shortfall per stratum as JSON.
        #[arg(long)]
        shortfall: Option<PathBuf>,
    },
    /// Label sampled emails automatically.
    Classify {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate records into report tables.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        verdicts: PathBuf,
        /// Analyst label log; its latest labels override automatic ones.
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the review API.
    Serve {
        #[arg(long)]
        sample: PathBuf,
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        verdicts: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Directory with the triage UI bundle.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
    /// Talk to a running review service.
    Review {
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        server: String,
        #[command(subcommand)]
        action: review::Action,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Ingest { corpus, out } => offline::ingest(&corpus, out.as_deref()),
        Command::Filter {
            corpus,
            out,
            counts,
            views,
        } => offline::filter(&corpus, &out, &counts, views.as_deref()),
        Command::Views { email, corpus } => offline::views(&email, corpus.as_deref()),
        Command::Inspect {
            email,
            corpus,
            dump_styles,
        } => offline::inspect(&email, corpus.as_deref(), dump_styles),
        Command::Sample {
            verdicts,
            views,
            target,
            cap,
            seed,
            out,
            length_edges,
            no_top_up,
            shortfall,
        } => offline::sample(offline::SampleArgs {
            verdicts,
            views,
            target,
            cap,
            seed,
            out,
            length_edges,
            top_up: !no_top_up,
            shortfall,
        }),
        Command::Classify { sample, out } => offline::classify(&sample, &out),
        Command::Report {
            records,
            verdicts,
            labels,
            out,
        } => offline::report(&records, &verdicts, labels.as_deref(), &out),
        Command::Serve {
            sample,
            records,
            labels,
            verdicts,
            port,
            host,
            static_dir,
        } => review::serve(review::ServeArgs {
            sample,
            records,
            labels,
            verdicts,
            addr: (host, port).into(),
            static_dir,
        }),
        Command::Review { server, action } => review::run(&server, action),
    }
}
