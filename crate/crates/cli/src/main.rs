use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eventree::config::{parse_sweep, DetectionConfig};
use eventree::export::{graph_dot, read_graph_json, tree_dot, write_graph_json, EventSetFile};
use eventree::graph::{build, BuildOptions};
use eventree::interaction::{
    attach_tfidf, ingest, merge_similar, validate_topic_dims, write_jsonl, DatasetMeta,
};
use eventree::select::{top_k_events, RootOrder};
use eventree::synth::{generate, run_sweep, write_sweep_csv, SynthParams};
use eventree::text::TfIdf;
use eventree::{Error, MetaGraph};

#[derive(Parser)]
#[command(
    name = "eventree",
    version,
    about = "Event detection in interaction networks"
)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a JSON-lines log and write its interaction meta-graph.
    Build(BuildArgs),
    /// Find the top-k events in a meta-graph.
    Detect(DetectArgs),
    /// Run a synthetic sweep and write mean metrics as CSV.
    Sweep(SweepArgs),
    /// Convert a meta-graph file to DOT or JSON.
    Export(ExportArgs),
    /// Write a synthetic dataset and its ground truth.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct BuildArgs {
    input: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Sidecar JSON declaring topic_dim and vocabulary.
    #[arg(long)]
    meta: Option<PathBuf>,
    /// Add tf-idf vectors computed from message text.
    #[arg(long)]
    tfidf: bool,
    #[arg(long)]
    no_merge: bool,
    #[arg(long)]
    merge_edit_ratio: Option<f64>,
    /// Duration such as 3600s, 1d.
    #[arg(long)]
    merge_max_gap: Option<String>,
    /// Also write the graph as DOT.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct DetectArgs {
    graph: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// key = value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    top_k: Option<String>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    sampling: Option<String>,
    #[arg(long)]
    root_limit: Option<String>,
    #[arg(long)]
    dp_decimals: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Directory for one DOT file per event.
    #[arg(long)]
    dot_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    spec: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Args)]
struct ExportArgs {
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "dot")]
    format: Format,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 1)]
    events: usize,
    #[arg(long, default_value_t = 20)]
    size: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 50)]
    participants: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Io(String),
    Invalid(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Io(_) => 2,
            Failure::Invalid(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Io(m) | Failure::Invalid(m) => m,
        }
    }

    /// Classifies a library error raised while handling `path`.
    fn from_error(path: &Path, e: Error) -> Self {
        let msg = format!("{}: {e}", path.display());
        if e.is_io() {
            Failure::Io(msg)
        } else {
            Failure::Invalid(msg)
        }
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn open(path: &Path) -> Outcome<File> {
    File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Outcome<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Outcome {
    w.flush()
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load_graph(path: &Path) -> Outcome<MetaGraph<f64>> {
    read_graph_json(BufReader::new(open(path)?)).map_err(|e| Failure::from_error(path, e))
}

fn cmd_build(a: &BuildArgs) -> Outcome {
    let meta: DatasetMeta = match &a.meta {
        Some(p) => serde_json::from_reader(BufReader::new(open(p)?))
            .map_err(|e| Failure::from_error(p, e.into()))?,
        None => DatasetMeta::default(),
    };
    let mut msgs = ingest::<f64, _>(BufReader::new(open(&a.input)?))
        .map_err(|e| Failure::from_error(&a.input, e))?;
    validate_topic_dims(&msgs, meta.topic_dim).map_err(|e| Failure::from_error(&a.input, e))?;
    if a.tfidf {
        attach_tfidf(&mut msgs, meta.vocabulary.as_deref());
    }
    if !a.no_merge {
        let mut cfg = DetectionConfig::default();
        if let Some(r) = a.merge_edit_ratio {
            cfg.set("merge_edit_ratio", &r.to_string()).map_err(usage)?;
        }
        if let Some(g) = &a.merge_max_gap {
            cfg.set("merge_max_gap", g).map_err(usage)?;
        }
        cfg.merge.validate().map_err(usage)?;
        msgs = merge_similar(&msgs, &cfg.merge);
    }
    let g = build(&msgs, &BuildOptions::default())
        .map_err(|e| Failure::from_error(&a.input, e))?
        .strip_singletons();
    let mut w = create(&a.output)?;
    write_graph_json(&g, &mut w).map_err(|e| Failure::from_error(&a.output, e))?;
    finish(&a.output, w)?;
    if let Some(p) = &a.dot {
        write_text(p, &graph_dot(&g, "metagraph"))?;
    }
    println!("{} vertices, {} edges", g.len(), g.edge_count());
    Ok(())
}

fn detection_config(a: &DetectArgs) -> Outcome<DetectionConfig> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            DetectionConfig::parse(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => DetectionConfig::default(),
    };
    let flags = [
        ("budget", &a.budget),
        ("window", &a.window),
        ("top_k", &a.top_k),
        ("algorithm", &a.algorithm),
        ("sampling", &a.sampling),
        ("root_limit", &a.root_limit),
        ("dp_decimals", &a.dp_decimals),
        ("seed", &a.seed),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v).map_err(usage)?;
        }
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn cmd_detect(a: &DetectArgs) -> Outcome {
    let cfg = detection_config(a)?;
    let g = load_graph(&a.graph)?;
    let params = cfg.solve_params::<f64>();
    let invalid = |e| Failure::from_error(&a.graph, e);
    let order = RootOrder::for_sampling(&g, &params, cfg.sampling, cfg.seed).map_err(invalid)?;
    let set = top_k_events(&g, &params, cfg.top_k, &order, cfg.root_limit).map_err(invalid)?;

    let mut file = EventSetFile::of(&set, &g, &cfg).map_err(invalid)?;
    let texts: Vec<&str> = g
        .vertices()
        .iter()
        .filter_map(|v| v.text.as_deref())
        .collect();
    if !texts.is_empty() {
        let model = TfIdf::fit(texts.iter().copied(), None);
        for ev in &mut file.events {
            let vectors: Vec<_> = ev
                .nodes
                .iter()
                .filter_map(|n| g.vertex(g.position(n.id)?).text.as_deref())
                .map(|t| model.transform::<f64>(t))
                .collect();
            ev.top_terms = model
                .top_terms(&vectors, 5)
                .into_iter()
                .map(String::from)
                .collect();
        }
    }

    let mut w = create(&a.output)?;
    serde_json::to_writer_pretty(&mut w, &file)
        .map_err(|e| Failure::from_error(&a.output, e.into()))?;
    w.write_all(b"\n").map_err(|e| Failure::Io(e.to_string()))?;
    finish(&a.output, w)?;
    if let Some(dir) = &a.dot_dir {
        fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
        for (i, t) in set.trees.iter().enumerate() {
            write_text(
                &dir.join(format!("event_{}.dot", i + 1)),
                &tree_dot(t, &g, &format!("event {}", i + 1)),
            )?;
        }
    }

    println!(
        "coverage: {} of {} interactions in {} events",
        set.coverage(),
        g.len(),
        set.trees.len()
    );
    if set.shortfall {
        println!(
            "shortfall: only {} events found for k = {}",
            set.trees.len(),
            cfg.top_k
        );
    }
    for (i, ev) in file.events.iter().enumerate() {
        print!(
            "event {}: root {}, size {}, cost {:.6}, span {}s",
            i + 1,
            ev.root,
            ev.size,
            ev.cost,
            ev.time_span
        );
        if !ev.top_terms.is_empty() {
            print!(", terms: {}", ev.top_terms.join(" "));
        }
        println!();
    }
    Ok(())
}

fn cmd_sweep(a: &SweepArgs) -> Outcome {
    let text = fs::read_to_string(&a.spec)
        .map_err(|e| Failure::Io(format!("{}: {e}", a.spec.display())))?;
    let spec =
        parse_sweep(&text).map_err(|e| Failure::Usage(format!("{}: {e}", a.spec.display())))?;
    let rows = run_sweep(&spec).map_err(|e| Failure::from_error(&a.spec, e))?;
    let mut w = create(&a.output)?;
    write_sweep_csv(&mut w, &rows).map_err(|e| Failure::from_error(&a.output, e))?;
    finish(&a.output, w)?;
    println!("{} rows", rows.len());
    Ok(())
}

fn cmd_export(a: &ExportArgs) -> Outcome {
    let g = load_graph(&a.graph)?;
    match a.format {
        Format::Dot => write_text(&a.output, &graph_dot(&g, "metagraph")),
        Format::Json => {
            let mut w = create(&a.output)?;
            write_graph_json(&g, &mut w).map_err(|e| Failure::from_error(&a.output, e))?;
            finish(&a.output, w)
        }
    }
}

fn cmd_generate(a: &GenerateArgs) -> Outcome {
    let params = SynthParams {
        n_events: a.events,
        event_size: a.size,
        noise_level: a.noise,
        n_participants: a.participants,
        seed: a.seed,
        ..SynthParams::default()
    };
    let data = generate::<f64>(&params).map_err(usage)?;
    let mut w = create(&a.output)?;
    write_jsonl(&mut w, &data.interactions).map_err(|e| Failure::from_error(&a.output, e))?;
    finish(&a.output, w)?;
    let mut w = create(&a.truth)?;
    serde_json::to_writer_pretty(&mut w, &data.truth)
        .map_err(|e| Failure::from_error(&a.truth, e.into()))?;
    finish(&a.truth, w)?;
    println!(
        "{} interactions, {} events",
        data.interactions.len(),
        data.truth.events.len()
    );
    Ok(())
}

fn run(cli: &Cli) -> Outcome {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Failure::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    match &cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Export(a) => cmd_export(a),
        Command::Generate(a) => cmd_generate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let _ = writeln!(io::stderr(), "error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
