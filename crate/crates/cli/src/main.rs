use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hiergame::influence::GraphInfluence;
use hiergame::io::{parse_graph, read_game, read_graph, read_tensor, write_tensor};
use hiergame::ising::{coupling_from_hierarchy, KPointQuery};
use hiergame::sweep::{format_decimal, run_sweep, InfluenceSource, Range, SweepParam, SweepSpec};
use hiergame::vote::{conditional_influence, ForwardSampler};
use hiergame::{
    transform_game, Game, Graph, InfluenceModel, Mechanism, Params, Spin, SpinAssignment, Summary, Transformed,
    VertexSet, VoteMode, DEFAULT_CAP,
};

mod error;

use error::CliError;

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "hiergame", version, about = "Games played through voting hierarchies")]
struct Cli {
    /// Maximum number of spins enumerated exactly.
    #[arg(long, global = true, env = "HIERGAME_CAP", default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a hierarchy file and list every violation.
    Validate {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Conditional probability of +1 on target vertices under the vote process.
    Influence {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        query: QueryArgs,
        /// Print x, y, x_bar, y_bar of a two-decider, two-executive hierarchy.
        #[arg(long, conflicts_with_all = ["condition", "target"])]
        summary: bool,
    },
    /// Couplings, k-point functions and conditionals of the equivalent Ising model.
    Ising {
        #[arg(long)]
        graph: PathBuf,
        /// Fixed boundary spins, e.g. `λ1=-1,λ2=+1`.
        #[arg(long)]
        condition: Option<String>,
        /// Spins whose k-point function is evaluated against the condition.
        #[arg(long, requires = "condition")]
        query: Option<String>,
    },
    /// Transform a game on the executives into the deciders' game.
    Transform {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        game: PathBuf,
        #[arg(long, default_value = "shapley")]
        mechanism: Mechanism,
    },
    /// Pure Nash equilibria of a transformed game.
    Nash {
        /// Tensor written by `transform`.
        #[arg(long, conflicts_with_all = ["graph", "game"], required_unless_present_all = ["graph", "game"])]
        tensor: Option<PathBuf>,
        #[arg(long, requires = "game")]
        graph: Option<PathBuf>,
        #[arg(long, requires = "graph")]
        game: Option<PathBuf>,
        #[arg(long, default_value = "shapley")]
        mechanism: Mechanism,
        #[arg(long, default_value = "vote")]
        model: InfluenceModel,
        #[arg(long, default_value = "tanh")]
        mode: VoteMode,
    },
    /// Empirical frequencies of +1 from forward samples of the vote process.
    Sample {
        #[arg(long)]
        graph: PathBuf,
        /// Commands of every decider, e.g. `λ1=-1,λ2=+1`.
        #[arg(long)]
        condition: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[arg(long, default_value = "tanh")]
        mode: VoteMode,
    },
    /// Regime, value and equilibria of the prisoner's dilemma over a grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "vote")]
    model: InfluenceModel,
    #[arg(long, default_value = "tanh")]
    mode: VoteMode,
}

#[derive(Args)]
struct QueryArgs {
    /// Fixed spins, e.g. `λ1=-1,λ2=+1`. Without it every decider command
    /// pattern is tabulated.
    #[arg(long)]
    condition: Option<String>,
    /// Comma-separated target ids (default: the executives).
    #[arg(long)]
    target: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// `name=start:end:steps`; repeat for a grid, outermost first.
    #[arg(long, required = true)]
    vary: Vec<String>,
    /// `name=value`.
    #[arg(long)]
    fix: Vec<String>,
    /// Source of (x, y) for chain sweeps: closed-form, vote or ising.
    #[arg(long, default_value = "closed-form")]
    influence: InfluenceSource,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "code": e.code(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let text = match &cli.command {
        Command::Validate { graph } => validate(graph)?,
        Command::Influence { model, query, summary } => influence(model, query, *summary, cli.cap)?,
        Command::Ising { graph, condition, query } => ising(graph, condition.as_deref(), query.as_deref(), cli.cap)?,
        Command::Transform { model, game, mechanism } => {
            let t = transform(&model.graph, game, *mechanism, model.model, model.mode, cli.cap)?;
            write_tensor(&t) + "\n"
        }
        Command::Nash { tensor, graph, game, mechanism, model, mode } => {
            let t = match (tensor, graph, game) {
                (Some(path), _, _) => read_tensor(&read(path)?)?,
                (None, Some(graph), Some(game)) => transform(graph, game, *mechanism, *model, *mode, cli.cap)?,
                _ => unreachable!("enforced by argument groups"),
            };
            nash(&t)
        }
        Command::Sample { graph, condition, seed, samples, mode } => sample(graph, condition, *seed, *samples, *mode)?,
        Command::Sweep(args) => sweep(args, cli.cap)?,
    };
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path.display(), e)),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e)),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))
}

fn load_graph(path: &Path) -> Result<Graph> {
    Ok(read_graph(&read(path)?)?)
}

fn params(g: &Graph, mode: VoteMode, cap: usize) -> Result<Params> {
    Ok(Params::from_graph(g)?.with_mode(mode).with_cap(cap))
}

/// Parses `id=±1` pairs separated by commas.
fn parse_assignment(g: &Graph, text: &str) -> Result<SpinAssignment> {
    let mut out = SpinAssignment::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let bad = || hiergame::Error::Parse(format!("spin {item:?} is not id=+1 or id=-1"));
        let (id, value) = item.split_once('=').ok_or_else(bad)?;
        let spin = value.trim().parse().ok().and_then(Spin::from_value).ok_or_else(bad)?;
        let v = g
            .lookup(id.trim())
            .map_err(|_| hiergame::Error::Parse(format!("no vertex {:?} in the graph", id.trim())))?;
        if out.insert(v, spin).is_some() {
            return Err(hiergame::Error::Parse(format!("vertex {id} is assigned twice")).into());
        }
    }
    Ok(out)
}

fn validate(path: &Path) -> Result<String> {
    let g: Graph = parse_graph(&read(path)?)?;
    let report = g.validate();
    let mut text = String::new();
    for w in &report.warnings {
        text += &format!("warning: {w}\n");
    }
    if !report.is_valid() {
        for v in &report.violations {
            text += &format!("error: {v}\n");
        }
        io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::io("stdout", e))?;
        return Err(hiergame::Error::InvalidGraph(report).into());
    }
    text += &format!(
        "valid: {} vertices, {} edges, {} deciders, {} executives{}\n",
        g.vertex_count(),
        g.edges().len(),
        g.deciders().len(),
        g.executives().len(),
        if g.has_directed_cycle() { ", cyclic" } else { "" }
    );
    Ok(text)
}

fn influence(args: &ModelArgs, query: &QueryArgs, summary: bool, cap: usize) -> Result<String> {
    let g = load_graph(&args.graph)?;
    let p = params(&g, args.mode, cap)?;
    if summary {
        let s = Summary::from_oracle(&GraphInfluence::for_graph(&g, p, args.model)?)?;
        return Ok(format!(
            "x\t{}\ny\t{}\nx_bar\t{}\ny_bar\t{}\n",
            format_decimal(s.x),
            format_decimal(s.y),
            format_decimal(s.x_bar),
            format_decimal(s.y_bar)
        ));
    }

    let conditions: Vec<SpinAssignment> = match &query.condition {
        Some(text) => vec![parse_assignment(&g, text)?],
        None => {
            let deciders = g.deciders().to_vec();
            (0..1usize << deciders.len().min(20))
                .map(|pattern| {
                    deciders.iter().enumerate().map(|(k, &v)| (v, Spin::from_bit(pattern >> k & 1 == 1))).collect()
                })
                .collect()
        }
    };
    let fixed = conditions[0].domain();
    let targets = match &query.target {
        Some(ids) => ids.split(',').map(|id| g.lookup(id.trim())).collect::<hiergame::Result<Vec<_>>>()?,
        None => g.executives().iter().filter(|&v| !fixed.contains(v)).collect(),
    };
    let ising = match args.model {
        InfluenceModel::Ising => Some(coupling_from_hierarchy(&g)?.with_cap(cap)),
        InfluenceModel::Vote => None,
    };

    let mut text: Vec<String> = fixed.iter().map(|v| g.id(v).to_string()).collect();
    text.extend(targets.iter().map(|&v| format!("P({}=+1)", g.id(v))));
    let mut out = text.join("\t") + "\n";
    for sigma in &conditions {
        let mut row: Vec<String> = sigma.iter().map(|(_, s)| s.to_string()).collect();
        for &v in &targets {
            let prob = match &ising {
                Some(m) => m.conditional(v, &fixed, sigma)?,
                None => conditional_influence(&g, &fixed, &VertexSet::single(v), sigma, &p)?.probs[0],
            };
            row.push(format_decimal(prob));
        }
        out += &(row.join("\t") + "\n");
    }
    Ok(out)
}

fn ising(path: &Path, condition: Option<&str>, query: Option<&str>, cap: usize) -> Result<String> {
    let g = load_graph(path)?;
    let model = coupling_from_hierarchy(&g)?.with_cap(cap);
    let mut out = format!("beta\t{}\n", format_decimal(model.beta()));
    let Some(condition) = condition else {
        out += "from\tto\tJ\n";
        for &(v, w, j) in model.couplings() {
            out += &format!("{}\t{}\t{}\n", model.id(v), model.id(w), format_decimal(j));
        }
        return Ok(out);
    };
    let a = parse_assignment(&g, condition)?;
    let Some(query) = query else {
        let free = model.nodes_between(&a.domain(), &g.executives())?;
        out += &format!("nodes_between\t{}\n", g.ids(&free).join(","));
        return Ok(out);
    };
    let b = parse_assignment(&g, query)?;
    let value = model.k_point(&KPointQuery::new(a.clone(), b.clone())?)?;
    // Normalize over every configuration of the query vertices.
    let targets = b.domain().to_vec();
    let mut total = 0.0;
    for pattern in 0..1usize << targets.len() {
        let tau = targets.iter().enumerate().map(|(k, &v)| (v, Spin::from_bit(pattern >> k & 1 == 1))).collect();
        total += model.k_point(&KPointQuery::new(a.clone(), tau)?)?;
    }
    out += &format!("k_point\t{}\nconditional\t{}\n", format_decimal(value), format_decimal(value / total));
    Ok(out)
}

fn transform(
    graph: &Path,
    game: &Path,
    mechanism: Mechanism,
    model: InfluenceModel,
    mode: VoteMode,
    cap: usize,
) -> Result<Transformed> {
    let g = load_graph(graph)?;
    let game: Game = read_game(&read(game)?)?;
    let p = params(&g, mode, cap)?;
    Ok(transform_game(&game, &g, &p, mechanism, model)?.with_source(graph.display().to_string()))
}

fn nash(t: &Transformed) -> String {
    let mut out = String::new();
    for sigma in t.pure_nash() {
        let nu: Vec<String> = t.payoff(&sigma).iter().map(|&v| format_decimal(v)).collect();
        out += &format!("{}\t{}\n", sigma.render(&t.labels), nu.join("\t"));
    }
    out
}

fn sample(path: &Path, condition: &str, seed: u64, samples: u64, mode: VoteMode) -> Result<String> {
    let g = load_graph(path)?;
    let commands = parse_assignment(&g, condition)?;
    let mut sampler = ForwardSampler::new(&g, params(&g, mode, DEFAULT_CAP)?, seed)?;
    let mut ups = vec![0u64; g.vertex_count()];
    for _ in 0..samples {
        for (v, s) in sampler.draw(&commands)?.iter() {
            ups[v.0] += u64::from(s == Spin::Up);
        }
    }
    let mut out = String::from("vertex\tP(+1)\tstderr\n");
    for (v, vertex) in g.vertices().iter().enumerate() {
        let p = ups[v] as f64 / samples.max(1) as f64;
        let se = (p * (1.0 - p) / samples.max(1) as f64).sqrt();
        out += &format!("{}\t{}\t{}\n", vertex.id, format_decimal(p), format_decimal(se));
    }
    Ok(out)
}

fn sweep(args: &SweepArgs, cap: usize) -> Result<String> {
    let pair = |item: &str| -> hiergame::Result<(SweepParam, String)> {
        let (name, rest) = item
            .split_once('=')
            .ok_or_else(|| hiergame::Error::Parse(format!("{item:?} is not name=value")))?;
        Ok((name.trim().parse()?, rest.trim().to_string()))
    };
    let vary = args
        .vary
        .iter()
        .map(|item| {
            let (p, range) = pair(item)?;
            Ok((p, range.parse::<Range>()?))
        })
        .collect::<hiergame::Result<Vec<_>>>()?;
    let fixed = args
        .fix
        .iter()
        .map(|item| {
            let (p, value) = pair(item)?;
            let value = value.parse().map_err(|_| hiergame::Error::Parse(format!("{item:?}: not a number")))?;
            Ok((p, value))
        })
        .collect::<hiergame::Result<Vec<_>>>()?;
    let spec = SweepSpec { vary, fixed, source: args.influence, cap };
    let rows = run_sweep(&spec)?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(spec.header())?;
    for row in &rows {
        w.write_record(row.record())?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io("csv buffer", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
