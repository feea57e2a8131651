use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nmt_core::corpus::{load_corpus, write_jsonl_corpus, Corpus};
use nmt_core::pipeline::{import_splits, label_to_dir};
use nmt_core::semparser::{parse_sentences, Explanation, ExplanationRecord, Lexicon};
use nmt_core::supervision::{evaluate, predict_corpus, train_student, Student, TrainConfig, TrainMode};
use nmt_core::synth;
use nmt_core::teacher::{build_teachers, from_bundle, load_bundles, load_explanation_records, write_bundles, Engine, SearchConfig};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "nmt", version, about = "Explanation-compiled teachers for reading comprehension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse explanations and print one logical form per rule sentence.
    Parse(ParseArgs),
    /// Compile explanations into teacher bundles.
    Teach(TeachArgs),
    /// Label a corpus into strict, soft and unlabeled splits.
    Label(LabelArgs),
    /// Train a span-prediction student from labeled splits.
    Train(TrainArgs),
    /// Predict answers with a trained student.
    Predict(PredictArgs),
    /// Score predictions with exact match and F1.
    Eval(EvalArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Write the synthetic corpus and its explanations.
    Synth(SynthArgs),
}

#[derive(Args)]
struct LexiconArg {
    /// Lexicon JSON file; the bundled lexicon is used when absent.
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

impl LexiconArg {
    fn load(&self) -> Result<Lexicon> {
        match &self.lexicon {
            Some(p) => Lexicon::load(p).with_context(|| format!("loading lexicon {}", p.display())),
            None => Ok(Lexicon::builtin()),
        }
    }
}

#[derive(Args)]
struct ParseArgs {
    /// Explanation text to parse.
    #[arg(long, conflicts_with = "explanations")]
    text: Option<String>,
    /// JSONL file of {id, instance_id, text} records.
    #[arg(long)]
    explanations: Option<PathBuf>,
    #[command(flatten)]
    lexicon: LexiconArg,
}

#[derive(Args)]
struct SearchArgs {
    /// Confidence threshold; answers at or below it are dropped.
    #[arg(long, default_value_t = 0.6)]
    threshold: f64,
    /// Beam width.
    #[arg(long, default_value_t = 10)]
    beam: usize,
    /// Use strict module semantics only.
    #[arg(long)]
    strict_only: bool,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig> {
        if !(0.0..=1.0).contains(&self.threshold) {
            bail!("--threshold must be in [0, 1], got {}", self.threshold);
        }
        if self.beam == 0 {
            bail!("--beam must be at least 1");
        }
        Ok(SearchConfig { beam_width: self.beam, threshold: self.threshold, soft: !self.strict_only, ..SearchConfig::default() })
    }
}

#[derive(Args)]
struct TeachArgs {
    #[arg(long)]
    explanations: PathBuf,
    /// Corpus holding the reference instances (SQuAD JSON or JSONL cache).
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArg,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// Teacher bundles written by `nmt teach`.
    #[arg(long)]
    teachers: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory holding the split files.
    #[arg(long)]
    splits: PathBuf,
    /// Corpus the splits refer to.
    #[arg(long)]
    corpus: PathBuf,
    /// sa, da or da+pl.
    #[arg(long, default_value = "da")]
    mode: TrainMode,
    /// JSON training config; unspecified fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    /// JSON object of id to answer text.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    /// JSON object of id to predicted text.
    #[arg(long)]
    pred: PathBuf,
    /// Corpus with gold answers (SQuAD JSON or JSONL cache).
    #[arg(long)]
    gold: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    lexicon: LexiconArg,
    #[arg(long, env = "NMT_DATA_DIR")]
    data_dir: PathBuf,
    #[command(flatten)]
    search: SearchArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    size: usize,
    #[arg(long, default_value_t = 300)]
    heldout: usize,
    #[arg(long)]
    out: PathBuf,
}

fn corpus(path: &Path) -> Result<Corpus> {
    load_corpus(path).with_context(|| format!("loading corpus {}", path.display()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let body = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

#[derive(Serialize)]
struct ParsedSentence {
    text: String,
    parse: Option<String>,
    skipped: Vec<usize>,
}

#[derive(Serialize)]
struct ParsedExplanation {
    id: String,
    variables: BTreeMap<String, String>,
    sentences: Vec<ParsedSentence>,
}

fn parse(args: ParseArgs) -> Result<()> {
    let lex = args.lexicon.load()?;
    let records = match (args.text, args.explanations) {
        (Some(text), None) => vec![ExplanationRecord { id: "cli".into(), instance_id: String::new(), text }],
        (None, Some(path)) => load_explanation_records(&path)?,
        _ => bail!("pass exactly one of --text or --explanations"),
    };
    let mut unparsable = 0;
    let mut stdout = std::io::stdout().lock();
    for rec in records {
        let expl = Explanation::from_record(&rec).with_context(|| format!("explanation {}", rec.id))?;
        let sentences: Vec<ParsedSentence> = parse_sentences(&expl, &lex)
            .into_iter()
            .map(|sp| {
                let best = sp.parses.first();
                ParsedSentence { text: sp.text.clone(), parse: best.map(|p| p.lf.to_string()), skipped: best.map(|p| p.skipped.clone()).unwrap_or_default() }
            })
            .collect();
        unparsable += sentences.iter().filter(|s| s.parse.is_none()).count();
        let out = ParsedExplanation { id: rec.id, variables: expl.variable_defs.into_iter().collect(), sentences };
        match writeln!(stdout, "{}", serde_json::to_string(&out)?) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => return Ok(()),
            r => r?,
        }
    }
    if unparsable > 0 {
        log::warn!("{unparsable} sentence(s) did not parse");
    }
    Ok(())
}

fn teach(args: TeachArgs) -> Result<()> {
    let lex = args.lexicon.load()?;
    let corpus = corpus(&args.corpus)?;
    let records = load_explanation_records(&args.explanations)?;
    let engine = Engine::new(args.search.config()?);
    let (progs, failed) = build_teachers(&records, &lex, &corpus, &engine);
    for (id, e) in &failed {
        log::warn!("explanation {id}: {e}");
    }
    write_bundles(&progs, &args.out)?;
    let validated = progs.iter().filter(|p| p.validated).count();
    eprintln!("{} teachers written ({validated} validated, {} failed)", progs.len(), failed.len());
    Ok(())
}

fn label(args: LabelArgs) -> Result<()> {
    let corpus = corpus(&args.corpus)?;
    let engine = Engine::new(args.search.config()?);
    let progs = load_bundles(&args.teachers)?
        .iter()
        .map(|b| from_bundle(b, &corpus, &engine).with_context(|| format!("teacher {}", b.id)))
        .collect::<Result<Vec<_>>>()?;
    let stats = label_to_dir(&progs, &corpus, &engine, &args.out)?;
    eprintln!(
        "scanned {} instances: {} strict, {} soft, {} unlabeled in {} ms",
        stats.scanned, stats.strict, stats.soft, stats.unlabeled, stats.wall_time_ms
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let cfg: TrainConfig = match &args.config {
        Some(p) => serde_json::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
            .with_context(|| format!("parsing {}", p.display()))?,
        None => TrainConfig::default(),
    };
    let corpus = corpus(&args.corpus)?;
    let splits = import_splits(&args.splits)?;
    let (student, report) = train_student(&splits, &corpus, &cfg, args.mode)?;
    write_json(&args.out, &student)?;
    if let Some(l) = report.epoch_losses.last() {
        eprintln!("{} steps, final epoch loss {l:.4}", report.steps);
    }
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let text = fs::read_to_string(&args.model).with_context(|| format!("reading {}", args.model.display()))?;
    let student: Student = serde_json::from_str(&text).context("parsing model")?;
    let corpus = corpus(&args.corpus)?;
    write_json(&args.out, &predict_corpus(&student, corpus.iter().map(|i| i.as_ref())))
}

fn eval(args: EvalArgs) -> Result<()> {
    let text = fs::read_to_string(&args.pred).with_context(|| format!("reading {}", args.pred.display()))?;
    let preds: BTreeMap<String, String> = serde_json::from_str(&text).context("predictions must be a JSON object of id to text")?;
    let gold: BTreeMap<String, Vec<String>> =
        corpus(&args.gold)?.iter().filter_map(|i| i.gold_text().map(|g| (i.id.clone(), vec![g.to_string()]))).collect();
    let m = evaluate(&preds, &gold)?;
    println!("{}", serde_json::to_string(&m)?);
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let corpus = corpus(&args.corpus)?;
    let state = nmt_service::AppState::open(corpus, args.lexicon.load()?, args.search.config()?, &args.data_dir)?;
    let addr: SocketAddr = format!("{}:{}", args.host, args.port).parse().context("bad --host/--port")?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        log::info!("listening on {}", listener.local_addr()?);
        nmt_service::serve(listener, Arc::new(state)).await?;
        Ok(())
    })
}

fn synth_cmd(args: SynthArgs) -> Result<()> {
    let s = synth::generate(args.seed, args.size, args.heldout);
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    write_jsonl_corpus(&s.corpus, &args.out.join("corpus.jsonl"))?;
    write_jsonl_corpus(&s.heldout.into_iter().collect(), &args.out.join("heldout.jsonl"))?;
    let mut lines = String::new();
    for rec in &s.explanations {
        lines.push_str(&serde_json::to_string(rec)?);
        lines.push('\n');
    }
    let path = args.out.join("explanations.jsonl");
    fs::write(&path, lines).with_context(|| format!("writing {}", path.display()))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Parse(a) => parse(a),
        Command::Teach(a) => teach(a),
        Command::Label(a) => label(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Serve(a) => serve(a),
        Command::Synth(a) => synth_cmd(a),
    }
}
