//! `expertvote <stage> --config <file>`.
//!
//! Every stage prints one `stage key=value ...` summary line on stdout.
//! Exit status: 0 on success, 2 for usage, configuration and missing-file
//! errors, 1 for anything else.

use std::future::IntoFuture;
use std::io::Write as _;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expertvote::embedder::TextEncoder;
use expertvote::engine::{self, Engine, EngineConfig, StageSummary};
use expertvote::evaluation::{
    evaluate_run, load_queries, parse_queries, read_judgments, write_judgments, ReportHeader, TEST_QUERIES,
};
use expertvote::vindex::Backend;
use expertvote::voting::{read_run, write_run};
use expertvote::Error;

use crate::http::{router, AppState};
use crate::ExpertsResponse;

#[derive(Debug, Parser)]
#[command(name = "expertvote", version, about = "Academic expert search by document voting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Engine configuration (TOML); EXPERTVOTE_* variables override keys.
    #[arg(long)]
    pub config: PathBuf,
    /// Artifact directory, overriding `artifacts` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Clean the corpus and derive the stopword list.
    Ingest(ConfigArgs),
    /// Embed every paper with the configured embedder.
    Embed(ConfigArgs),
    /// Pull paper vectors toward their citation neighbours.
    Retrofit(ConfigArgs),
    /// Build the vector index.
    Index {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        backend: Option<Backend>,
    },
    /// Rank experts for one query or a query file.
    Search {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, conflicts_with = "queries")]
        query: Option<String>,
        /// One query per line; results go to `--run`.
        #[arg(long, requires = "run")]
        queries: Option<PathBuf>,
        /// Run file (JSON lines) to write.
        #[arg(long)]
        run: Option<PathBuf>,
        #[arg(long)]
        experts: Option<usize>,
        /// Print the JSON body the HTTP service would return.
        #[arg(long)]
        json: bool,
    },
    /// Score a run against judgments, or build judgments.
    Eval {
        #[arg(long, required_unless_present = "build_judgments")]
        run: Option<PathBuf>,
        #[arg(long)]
        judgments: PathBuf,
        /// Write judgments for `--queries` (default: the bundled test set)
        /// instead of scoring a run; needs `--config`.
        #[arg(long, requires = "config")]
        build_judgments: bool,
        #[arg(long)]
        queries: Option<PathBuf>,
        /// Records the embedder and threshold in the report header.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Machine-readable report to write.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Serve `GET /experts` and `GET /healthz`.
    Serve {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

fn load_config(path: &Path, out: Option<&Path>) -> Result<EngineConfig, Error> {
    let mut config = EngineConfig::load(path)?;
    if let Some(out) = out {
        config.artifacts = out.to_path_buf();
    }
    Ok(config)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Io { .. } | Error::Config(_) | Error::Argument(_)) => 2,
        _ => 1,
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn print_summary(s: &StageSummary) {
    println!("{s}");
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Ingest(a) => print_summary(&engine::run_ingest(&load_config(&a.config, a.out.as_deref())?)?),
        Command::Embed(a) => print_summary(&engine::run_embed(&load_config(&a.config, a.out.as_deref())?)?),
        Command::Retrofit(a) => print_summary(&engine::run_retrofit(&load_config(&a.config, a.out.as_deref())?)?),
        Command::Index { cfg, backend } => {
            let mut config = load_config(&cfg.config, cfg.out.as_deref())?;
            if let Some(b) = backend {
                config.backend = b;
            }
            print_summary(&engine::run_index(&config)?);
        }
        Command::Search {
            cfg,
            query,
            queries,
            run,
            experts,
            json,
        } => {
            let config = load_config(&cfg.config, cfg.out.as_deref())?;
            let engine = Engine::open(config)?;
            search(&engine, query, queries, run, experts, json)?;
        }
        Command::Eval {
            run,
            judgments,
            build_judgments,
            queries,
            config,
            out,
            report,
            json,
        } => {
            let config = config.map(|c| load_config(&c, out.as_deref())).transpose()?;
            if build_judgments {
                let engine = Engine::open(config.expect("clap requires --config"))?;
                let qs = match &queries {
                    Some(p) => load_queries(p)?,
                    None => parse_queries(TEST_QUERIES),
                };
                let js = engine.judgments(&qs)?;
                write_judgments(&judgments, &js)?;
                print_summary(&StageSummary {
                    stage: "judgments",
                    fields: vec![
                        ("queries", js.len().to_string()),
                        ("unusable", js.iter().filter(|j| !j.is_usable()).count().to_string()),
                        ("encoder", engine.encoder().describe()),
                    ],
                });
                return Ok(());
            }
            let run = read_run(&run.expect("clap requires --run"))?;
            let js = read_judgments(&judgments)?;
            let header = match &config {
                Some(c) => ReportHeader {
                    embedder: c.embedder.to_string(),
                    threshold: Some(c.threshold),
                },
                None => ReportHeader {
                    embedder: "unspecified".into(),
                    threshold: None,
                },
            };
            let r = evaluate_run(&run, &js, header)?;
            if let Some(path) = &report {
                std::fs::write(path, r.to_json() + "\n").map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
            }
            if json {
                println!("{}", r.to_json());
            } else {
                print!("{}", r.to_table());
            }
        }
        Command::Serve { cfg, addr } => {
            let config = load_config(&cfg.config, cfg.out.as_deref())?;
            serve(config, addr)?;
        }
    }
    Ok(())
}

fn search(
    engine: &Engine,
    query: Option<String>,
    queries: Option<PathBuf>,
    run: Option<PathBuf>,
    experts: Option<usize>,
    json: bool,
) -> anyhow::Result<()> {
    let n = experts.unwrap_or(engine.config().experts);
    let qs = match (query, &queries) {
        (Some(q), _) => vec![q],
        (None, Some(p)) => load_queries(p)?,
        (None, None) => return Err(Error::Argument("give --query or --queries".into()).into()),
    };
    let mut lines = Vec::with_capacity(qs.len());
    for q in &qs {
        let ranking = engine.search(q, n)?;
        if queries.is_none() {
            if json {
                println!("{}", serde_json::to_string_pretty(&ExpertsResponse::from_ranking(engine, q, &ranking))?);
            } else {
                let mut out = std::io::stdout().lock();
                for (i, e) in ranking.entries.iter().enumerate() {
                    let name = engine.corpus().author(&e.author_id).map_or("", |a| a.name.as_str());
                    writeln!(out, "{}\t{:.6}\t{}\t{}", i + 1, e.score, e.author_id, name)?;
                }
            }
        }
        lines.push(expertvote::voting::RunLine {
            query: q.clone(),
            experts: ranking.entries,
        });
    }
    if let Some(path) = &run {
        write_run(path, &lines)?;
        println!(
            "{}",
            StageSummary {
                stage: "search",
                fields: vec![("queries", lines.len().to_string()), ("experts", n.to_string())],
            }
        );
    }
    Ok(())
}

fn serve(config: EngineConfig, addr: SocketAddr) -> anyhow::Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let state = AppState::default();
        let listener = tokio::net::TcpListener::bind(addr).await?;
        eprintln!("listening on {}", listener.local_addr()?);
        let loading = state.clone();
        let loader = tokio::task::spawn_blocking(move || Engine::open(config).map(|e| loading.set_engine(e)));
        let server = tokio::spawn(axum::serve(listener, router(state)).into_future());
        loader.await??;
        eprintln!("index ready");
        server.await??;
        anyhow::Ok(())
    })
}
