//! The `polyrec` command line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use polyrec::annotate::{AgreementReport, EvaluationReport, Scores};
use polyrec::jsonl;
use polyrec::store::{export, RecordFilter, RecordStore, ScatterScope};

use crate::api::{self, AppState};
use crate::config::PipelineConfig;
use crate::pipeline;

#[derive(Debug, Parser)]
#[command(name = "polyrec", version, about = "Extract and query material property records from polymer abstracts")]
pub struct Cli {
    /// TOML pipeline config; relative paths in it resolve against its directory.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads for per-document stages (1 runs serially).
    #[arg(long, global = true, value_name = "N")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Strip markup, normalise and split sentences; writes documents as JSON lines.
    Preprocess {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tokenize and label the corpus; writes the annotated-corpus format.
    Tag {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        /// Replay these predictions instead of running the dictionary tagger.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the full pipeline; writes records and a diagnostics sidecar and
    /// prints a summary.
    Extract {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        vocab: Option<PathBuf>,
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[arg(long)]
        gazetteer: Option<PathBuf>,
        /// Records file; defaults to `paths.records` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        diagnostics: Option<PathBuf>,
    },
    /// Strict entity-level precision, recall and F1 of predictions against gold.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Token-level Cohen's and Fleiss' kappa between annotator files.
    Kappa {
        #[arg(required = true, num_args = 2..)]
        files: Vec<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Composition counts, unique polymers, property histogram and yearly counts.
    Stats {
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        min_count: usize,
        #[arg(long)]
        histogram_csv: Option<PathBuf>,
        #[arg(long)]
        yearly_csv: Option<PathBuf>,
    },
    /// Pairs of canonical values of two properties, as CSV.
    Scatter {
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// SAME_RECORD_MATERIALS or SAME_DOCUMENT.
        #[arg(long, default_value = "SAME_RECORD_MATERIALS")]
        scope: ScatterScope,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve a records file over HTTP. SIGHUP reloads the file.
    Serve {
        #[arg(long)]
        records: Option<PathBuf>,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
    },
}

fn set(slot: &mut Option<PathBuf>, flag: &Option<PathBuf>) {
    if let Some(p) = flag {
        *slot = Some(p.clone());
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_store(config: &PipelineConfig) -> Result<RecordStore> {
    let path = config.records.as_deref().context("no records path configured")?;
    RecordStore::load(path).with_context(|| format!("loading records {}", path.display()))
}

pub fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(n) = cli.workers {
        config.workers = n;
    }

    match &cli.command {
        Command::Preprocess { corpus, .. } => set(&mut config.corpus, corpus),
        Command::Tag { corpus, vocab, predictions, gazetteer, .. }
        | Command::Extract { corpus, vocab, predictions, gazetteer, .. } => {
            set(&mut config.corpus, corpus);
            set(&mut config.vocab, vocab);
            set(&mut config.predictions, predictions);
            set(&mut config.gazetteer, gazetteer);
        }
        Command::Stats { records, .. } | Command::Scatter { records, .. } | Command::Serve { records, .. } => {
            set(&mut config.records, records)
        }
        Command::Eval { .. } | Command::Kappa { .. } => {}
    }
    if let Command::Extract { out, diagnostics, .. } = &cli.command {
        set(&mut config.records, out);
        set(&mut config.diagnostics, diagnostics);
    }
    config.validate()?;

    match cli.command {
        Command::Preprocess { out, .. } => {
            let docs = pipeline::preprocess(&config)?;
            jsonl::write_to(open_out(out.as_deref())?, &docs)?;
        }
        Command::Tag { out, .. } => {
            let tagged = pipeline::tag(&config)?;
            jsonl::write_to(open_out(out.as_deref())?, &pipeline::annotated(&tagged))?;
        }
        Command::Extract { .. } => {
            let records_path = config.records.clone().context("extract needs --out or paths.records")?;
            let extraction = pipeline::extract(&config)?;
            let diagnostics_path = pipeline::diagnostics_path(&config, &records_path);
            jsonl::write_to(open_out(Some(&records_path))?, &extraction.records)?;
            jsonl::write_to(open_out(Some(&diagnostics_path))?, &extraction.diagnostics)?;
            let c = extraction.counts;
            println!("{c}");
            println!(
                "{} polymer relevant / {} unpaired values / {} unconverted units / {} unlinked amounts",
                c.polymer_relevant, c.unpaired_values, c.unconverted, c.unlinked_amounts
            );
        }
        Command::Eval { pred, gold, json } => {
            let report = pipeline::evaluate(&pred, &gold)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", format_evaluation(&report));
            }
        }
        Command::Kappa { files, json } => {
            let report = pipeline::kappa(&files)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", format_agreement(&report));
            }
        }
        Command::Stats { min_count, histogram_csv, yearly_csv, .. } => {
            let store = load_store(&config)?;
            let stats = api::stats_view(&store, &RecordFilter::default())?;
            let histogram = store.property_histogram(min_count);
            if let Some(p) = histogram_csv {
                export::histogram_csv(open_out(Some(&p))?, &histogram)?;
            }
            if let Some(p) = yearly_csv {
                export::yearly_csv(open_out(Some(&p))?, &stats.yearly)?;
            }
            let view = serde_json::json!({
                "records": store.len(),
                "composition": stats.composition,
                "unique_polymers": stats.unique_polymers,
                "properties": api::properties_view(&store, min_count).properties,
                "yearly": stats.yearly,
            });
            println!("{}", serde_json::to_string_pretty(&view)?);
        }
        Command::Scatter { x, y, scope, out, .. } => {
            let store = load_store(&config)?;
            let view = api::scatter_view(&store, &config.registry()?, &x, &y, scope)
                .map_err(|name| anyhow::anyhow!("no records for property {name:?}"))?;
            export::scatter_csv(open_out(out.as_deref())?, &view.points)?;
        }
        Command::Serve { port, host, .. } => {
            let path = config.records.clone().context("serve needs --records or paths.records")?;
            let state = AppState::from_file(&path, config.registry()?)?;
            let runtime =
                tokio::runtime::Builder::new_multi_thread().worker_threads(config.workers).enable_all().build()?;
            runtime.block_on(serve(state, host, port))?;
        }
    }
    Ok(())
}

async fn serve(state: AppState, host: IpAddr, port: u16) -> Result<()> {
    let listener =
        tokio::net::TcpListener::bind((host, port)).await.with_context(|| format!("binding {host}:{port}"))?;
    eprintln!("listening on http://{} ({} records)", listener.local_addr()?, state.snapshot().len());
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        let mut hangup = signal(SignalKind::hangup())?;
        let reload = state.clone();
        tokio::spawn(async move {
            while hangup.recv().await.is_some() {
                match reload.reload() {
                    Ok(n) => eprintln!("reloaded {n} records"),
                    Err(e) => eprintln!("reload failed, keeping the current snapshot: {e:#}"),
                }
            }
        });
    }
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    axum::serve(listener, api::router(state)).with_graceful_shutdown(shutdown).await?;
    Ok(())
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

fn score_row(name: &str, s: &Scores) -> String {
    format!(
        "{name:<20} {:>6} {:>6} {:>6} {:>9} {:>7} {:>7.2}\n",
        s.tp,
        s.fp,
        s.fn_,
        pct(s.precision),
        pct(s.recall),
        s.f1
    )
}

pub fn format_evaluation(report: &EvaluationReport) -> String {
    let mut out =
        format!("{:<20} {:>6} {:>6} {:>6} {:>9} {:>7} {:>7}\n", "label", "tp", "fp", "fn", "precision", "recall", "f1");
    for (label, s) in &report.per_label {
        out.push_str(&score_row(label.as_str(), s));
    }
    out.push_str(&score_row("OVERALL", &report.overall));
    out.push_str(&format!("overall F1 {:.2}\n", report.overall.f1));
    out
}

pub fn format_agreement(report: &AgreementReport) -> String {
    let mut out = String::new();
    for p in &report.cohen_pairwise {
        out.push_str(&format!("cohen {} {} {:.4}\n", p.a, p.b, p.kappa));
    }
    out.push_str(&format!(
        "fleiss {:.4} (p_o {:.4}, p_e {:.4}) over {} tokens\n",
        report.fleiss, report.p_o, report.p_e, report.items
    ));
    out
}

/// Entry point for the binary: runs the command and maps failure to a
/// diagnostic on stderr and a nonzero exit code.
pub fn main_with(cli: Cli) -> i32 {
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            let broken_pipe = e
                .chain()
                .any(|c| c.downcast_ref::<io::Error>().is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe));
            if broken_pipe {
                return 0;
            }
            eprintln!("error: {e:#}");
            1
        }
    }
}
