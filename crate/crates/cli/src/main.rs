//! `picky`: train models, parse sentences, and produce evaluation tables.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser as ClapParser, Subcommand, ValueEnum};
use picky::engine::{parse_edge_limit, ParseStatus, Parser, ParserConfig, PhaseSet};
use picky::eval::{
    accuracy_by_phase, default_phase_sweep, render_csv, render_phase_table, render_text, EvalSetup, Overrides,
    TableKind, DEFAULT_EDGE_GRID,
};
use picky::grammar::Grammar;
use picky::model::{load_models, save_models, tree_prob, Models};
use picky::oracle::{all_parses, DEFAULT_CAP};
use picky::par::Execution;
use picky::treebank::{induce_grammar, parse_treebank, ParseTree, Sentence};

#[derive(ClapParser)]
#[command(name = "picky", version, about = "Three-phase probabilistic chart parser")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train models from a treebank.
    Train(TrainArgs),
    /// Parse sentences, one per line.
    Parse(ParseArgs),
    /// Evaluate one configuration against a test treebank.
    Eval(EvalArgs),
    /// Evaluate a grid of phase subsets or edge limits.
    Sweep(SweepArgs),
    /// List every parse of a sentence.
    Oracle(OracleArgs),
}

#[derive(Args)]
struct TrainArgs {
    /// Bracketed training trees.
    treebank: PathBuf,
    /// Grammar to train against; induced from the trees when omitted.
    #[arg(long)]
    grammar: Option<PathBuf>,
    /// Model file to write. An induced grammar goes next to it.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long)]
    model: PathBuf,
}

#[derive(Args)]
struct SearchArgs {
    /// Comma-separated phases, e.g. `I,II,III`.
    #[arg(long, default_value = "I,II,III")]
    phases: PhaseSet,
    /// Edge budget per sentence: a number or `unlimited`.
    #[arg(long, default_value = "unlimited", value_parser = edge_limit)]
    max_edges: Limit,
    /// Stop a phase once no candidate scores at least this much.
    #[arg(long)]
    min_score: Option<f64>,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Clone, Copy)]
struct Limit(Option<usize>);

fn edge_limit(s: &str) -> Result<Limit, String> {
    parse_edge_limit(s).map(Limit).map_err(|e| e.to_string())
}

impl SearchArgs {
    fn config(&self) -> Result<ParserConfig> {
        let cfg = ParserConfig {
            min_score: self.min_score,
            ..ParserConfig::default().with_phases(self.phases).with_max_edges(self.max_edges.0)
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        Execution::from_jobs(self.jobs)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct ParseArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Input file; standard input when omitted. Tokens may be `word_TAG`.
    input: Option<PathBuf>,
    /// Print the best completed sentence constituent when nothing spans.
    #[arg(long)]
    allow_partial: bool,
    /// Print a statistics line after each result.
    #[arg(long)]
    stats: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// Gold test trees.
    #[arg(long)]
    test: PathBuf,
    /// Per-sentence verdicts: `<n> correct|incorrect`, 1-based.
    #[arg(long)]
    overrides: Option<PathBuf>,
    /// Also print accuracy by the phase each sentence reached.
    #[arg(long)]
    by_phase: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    test: PathBuf,
    /// One row per phase subset: I; I,II; II; I,III; III; I,II,III; II,III.
    #[arg(long)]
    sweep_phases: bool,
    /// One row per edge limit, e.g. `100,150,300,500,1000,15000`.
    #[arg(long, value_delimiter = ',', num_args = 0.., value_parser = edge_limit)]
    sweep_edges: Option<Vec<Limit>>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    grammar: PathBuf,
    /// Models for probabilities; trees are listed unscored without it.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Refuse sentences with more parses than this.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// The sentence; tokens may be `word_TAG`.
    #[arg(required = true, num_args = 1..)]
    words: Vec<String>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_grammar(path: &Path) -> Result<Grammar> {
    Grammar::parse(&read(path)?).with_context(|| format!("in grammar {}", path.display()))
}

fn load_treebank(path: &Path) -> Result<Vec<ParseTree>> {
    parse_treebank(&read(path)?).with_context(|| format!("in treebank {}", path.display()))
}

fn load(args: &ModelArgs) -> Result<(Grammar, Models)> {
    let g = load_grammar(&args.grammar)?;
    let m = load_models(&read(&args.model)?, &g).with_context(|| format!("in model {}", args.model.display()))?;
    Ok((g, m))
}

fn train(args: &TrainArgs) -> Result<ExitCode> {
    let trees = load_treebank(&args.treebank)?;
    let grammar = match &args.grammar {
        Some(p) => load_grammar(p)?,
        None => {
            let g = induce_grammar(&trees)?;
            let path = args.out.with_extension("grammar");
            fs::write(&path, g.serialize()).with_context(|| format!("cannot write {}", path.display()))?;
            log::info!("induced {} rules into {}", g.rules().len(), path.display());
            g
        }
    };
    let models = Models::train_trees(&grammar, &trees)?;
    fs::write(&args.out, save_models(&models, &grammar))
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    log::info!("trained on {} trees", trees.len());
    Ok(ExitCode::SUCCESS)
}

fn parse(args: &ParseArgs) -> Result<ExitCode> {
    let (g, m) = load(&args.model)?;
    let parser = Parser::new(&g, &m, args.search.config()?)?;
    let text = match &args.input {
        Some(p) => read(p)?,
        None => io::read_to_string(io::stdin().lock()).context("cannot read standard input")?,
    };
    let sentences: Vec<Sentence> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Sentence::from_line(&g, l))
        .collect();
    let results = args.search.execution().map(&sentences, |_, s| parser.parse(s));
    let mut out = io::stdout().lock();
    let mut failed = false;
    for r in &results {
        let line = match (r.status, &r.tree) {
            (ParseStatus::Parsed, Some(t)) => t.to_string(),
            (ParseStatus::Partial, Some(t)) if args.allow_partial => format!("PARTIAL({t})"),
            _ => "NOPARSE".to_string(),
        };
        failed |= r.status != ParseStatus::Parsed;
        writeln!(out, "{line}")?;
        if args.stats {
            let s = &r.stats;
            let lp = r.log_prob.map_or("-".to_string(), |lp| format!("{lp:.6}"));
            writeln!(
                out,
                "# status={} predictions={} completions={} edges={} phase={} log_prob={lp}{}",
                r.status.name(),
                s.predictions,
                s.completions,
                s.edges_created,
                r.phase_reached.map_or("-", |p| p.name()),
                if r.budget_exhausted { " budget_exhausted" } else { "" }
            )?;
        }
    }
    Ok(if failed { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn eval(args: &EvalArgs) -> Result<ExitCode> {
    let (g, m) = load(&args.model)?;
    let test = load_treebank(&args.test)?;
    let overrides = match &args.overrides {
        Some(p) => Some(Overrides::parse(&read(p)?)?),
        None => None,
    };
    let mut setup = EvalSetup::new(&g, &m).with_execution(args.search.execution());
    setup.overrides = overrides.as_ref();
    let cfg = args.search.config()?;
    let ev = setup.evaluate(&test, &cfg, &args.search.phases.to_string())?;
    let rows = [ev.row.clone()];
    let mut out = io::stdout().lock();
    match args.format {
        Format::Text => write!(out, "{}", render_text(TableKind::Phases, &rows))?,
        Format::Csv => write!(out, "{}", render_csv(&rows))?,
    }
    if args.by_phase {
        writeln!(out)?;
        write!(out, "{}", render_phase_table(&accuracy_by_phase(&ev.outcomes)))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: &SweepArgs) -> Result<ExitCode> {
    if !args.sweep_phases && args.sweep_edges.is_none() {
        bail!("choose --sweep-phases, --sweep-edges, or both");
    }
    let (g, m) = load(&args.model)?;
    let test = load_treebank(&args.test)?;
    let setup = EvalSetup::new(&g, &m).with_execution(args.search.execution());
    let base = args.search.config()?;
    let mut rows = Vec::new();
    if args.sweep_phases {
        let evs = setup.sweep_phases(&test, &base, &default_phase_sweep())?;
        rows.push((TableKind::Phases, evs.into_iter().map(|e| e.row).collect::<Vec<_>>()));
    }
    if let Some(limits) = &args.sweep_edges {
        let limits: Vec<Option<usize>> = if limits.is_empty() {
            DEFAULT_EDGE_GRID.iter().map(|&l| Some(l)).collect()
        } else {
            limits.iter().map(|l| l.0).collect()
        };
        let evs = setup.sweep_edge_limit(&test, &base, &limits)?;
        rows.push((TableKind::EdgeLimit, evs.into_iter().map(|e| e.row).collect()));
    }
    let mut out = io::stdout().lock();
    match args.format {
        Format::Text => {
            for (i, (kind, r)) in rows.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                write!(out, "{}", render_text(*kind, r))?;
            }
        }
        Format::Csv => {
            let all: Vec<_> = rows.into_iter().flat_map(|(_, r)| r).collect();
            write!(out, "{}", render_csv(&all))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn oracle(args: &OracleArgs) -> Result<ExitCode> {
    let g = load_grammar(&args.grammar)?;
    let models = match &args.model {
        Some(p) => Some(load_models(&read(p)?, &g).with_context(|| format!("in model {}", p.display()))?),
        None => None,
    };
    let s = Sentence::from_line(&g, &args.words.join(" "));
    let trees = match all_parses(&g, &s, args.cap) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("picky: {e}");
            return Ok(ExitCode::from(1));
        }
    };
    let mut out = io::stdout().lock();
    match &models {
        Some(m) => {
            let mut scored: Vec<(f64, &ParseTree)> = trees
                .iter()
                .map(|t| Ok((tree_prob(&g, &m.csp, t, &s)?, t)))
                .collect::<Result<_>>()?;
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            for (p, t) in scored {
                writeln!(out, "{p:.6}\t{t}")?;
            }
        }
        None => {
            for t in &trees {
                writeln!(out, "{t}")?;
            }
        }
    }
    writeln!(out, "# {} parses", trees.len())?;
    Ok(if trees.is_empty() { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("PICKY_LOG")).init();
    let cli = Cli::parse();
    let run = match &cli.command {
        Command::Train(a) => train(a),
        Command::Parse(a) => parse(a),
        Command::Eval(a) => eval(a),
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("picky: {e:#}");
            ExitCode::from(2)
        }
    }
}
