//! `nmchase`: chase, acyclicity checks and stable sets for existential rules
//! with negation.

use std::fmt::Write as _;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nmchase_core::acyclicity::{
    analyze, position_graph, AnalysisOptions, GraphKind, Outcome, Report, Verdict, PROPERTIES,
};
use nmchase_core::chase::{answer, run, Answer, Budget, Criterion};
use nmchase_core::nonmonotonic::{nm_analyze, nm_grd, pos, stable_sets, TreeBudget};
use nmchase_core::parser::{parse, parse_query, print_facts};
use nmchase_core::unification::grd;
use nmchase_core::{AtomSet, KnowledgeBase, NmeRule};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "nmchase", version, about = "Chase and termination analysis for existential rules with negation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check acyclicity properties and report which chase variants are
    /// guaranteed to terminate.
    ///
    /// Exit code 0 if a requested property holds, 1 if all are violated,
    /// 2 if none holds and some are unknown.
    Check(CheckArgs),
    /// Run the chase on the facts of a knowledge base.
    Run(RunArgs),
    /// Answer a conjunctive query by chasing.
    Ask(AskArgs),
    /// Compute the stable sets of a knowledge base with negation.
    Stable(StableArgs),
    /// Print the rule dependency graph or a position graph.
    Graph(GraphArgs),
}

#[derive(Args)]
struct Input {
    /// Knowledge base file, or `-` for stdin.
    path: PathBuf,
}

#[derive(Args)]
struct ChaseOpts {
    /// Chase criterion.
    #[arg(long = "chase", default_value = "skolem", value_parser = parse_criterion)]
    criterion: Criterion,
    #[arg(long, default_value_t = 64)]
    max_rounds: usize,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
}

impl ChaseOpts {
    fn budget(&self) -> Budget {
        Budget {
            max_rounds: self.max_rounds,
            max_steps: self.max_steps,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: Input,
    /// Comma-separated properties to report: aGRD, wa, wa^D, wa^U, wa^U+.
    #[arg(long, value_delimiter = ',')]
    properties: Vec<String>,
    /// Use negative bodies to discard dependencies (implied when the input
    /// contains negation).
    #[arg(long)]
    negation_aware: bool,
    /// Analyze the positive parts of the rules even if negation is present.
    #[arg(long, conflicts_with = "negation_aware")]
    positive_only: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    chase: ChaseOpts,
    /// Emit every derivation step as one JSON object per line before the
    /// result.
    #[arg(long)]
    trace: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct AskArgs {
    #[command(flatten)]
    input: Input,
    /// Query such as `? p(a, X).`; defaults to the queries of the file.
    query: Option<String>,
    #[command(flatten)]
    chase: ChaseOpts,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct StableArgs {
    #[command(flatten)]
    input: Input,
    /// Chase criterion: skolem or core.
    #[arg(long = "chase", default_value = "skolem", value_parser = parse_stable_criterion)]
    criterion: Criterion,
    #[arg(long, default_value_t = 10_000)]
    max_nodes: usize,
    #[arg(long, default_value_t = 64)]
    max_depth: usize,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Grd,
    Pgf,
    Pgd,
    Pgu,
}

#[derive(Args)]
struct GraphArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value = "grd")]
    kind: Kind,
    /// Build the dependency-based graphs with negative bodies taken into
    /// account.
    #[arg(long)]
    negation_aware: bool,
    #[arg(long, value_enum, default_value = "dot")]
    format: Format,
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse()
}

fn parse_stable_criterion(s: &str) -> Result<Criterion, String> {
    match s.parse()? {
        c @ (Criterion::Skolem | Criterion::Core) => Ok(c),
        c => Err(format!("stable sets need the skolem or core criterion, not {c}")),
    }
}

fn load(input: &Input) -> Result<KnowledgeBase> {
    let text = if input.path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).context("reading stdin")?;
        s
    } else {
        std::fs::read_to_string(&input.path).with_context(|| format!("reading {}", input.path.display()))?
    };
    parse(&text).with_context(|| format!("parsing {}", input.path.display()))
}

fn strings(atoms: &AtomSet) -> Vec<String> {
    atoms.iter().map(|a| a.to_string()).collect()
}

fn no_negation(kb: &KnowledgeBase, command: &str) -> Result<()> {
    if kb.has_negation() {
        bail!("`{command}` needs rules without negation; use `stable` instead");
    }
    Ok(())
}

fn verdict_line(v: &Verdict) -> String {
    let mut line = format!("{:<6} {}", v.property, v.outcome);
    if let Some(w) = &v.witness {
        if !w.cycle.is_empty() {
            let _ = write!(line, "  cycle: {}", w.cycle.join(" -> "));
        } else if !w.rules.is_empty() {
            let _ = write!(line, "  rules: {}", w.rules.join(" -> "));
        }
        if let Some(c) = &w.composed {
            let _ = write!(line, "  composed: {c}");
        }
    }
    if let Some(n) = &v.note {
        let _ = write!(line, "  ({n})");
    }
    line
}

fn check(args: CheckArgs) -> Result<u8> {
    let kb = load(&args.input)?;
    for p in &args.properties {
        if !PROPERTIES.contains(&p.as_str()) {
            bail!("unknown property `{p}`; expected one of {}", PROPERTIES.join(", "));
        }
    }
    let options = AnalysisOptions::default();
    let (mut report, dropped): (Report, Vec<String>) =
        if (kb.has_negation() || args.negation_aware) && !args.positive_only {
            let nm = nm_analyze(&kb.rules, options)?;
            (nm.report, nm.dropped.iter().map(|d| d.to_string()).collect())
        } else {
            let rules: Vec<NmeRule> = pos(&kb.rules).into_iter().map(NmeRule::from).collect();
            (analyze(&rules, options)?, Vec::new())
        };
    if !args.properties.is_empty() {
        report.verdicts.retain(|v| args.properties.contains(&v.property));
    }
    let outcomes: Vec<Outcome> = report.verdicts.iter().map(|v| v.outcome).collect();
    match args.format {
        Format::Json => {
            let mut v = report.to_json();
            v["dropped"] = json!(dropped);
            println!("{v}");
        }
        Format::Text | Format::Dot => {
            let mode = if report.negation_aware { " (negation-aware)" } else { "" };
            println!("rules: {}{mode}", report.rules.join(", "));
            if !dropped.is_empty() {
                println!("self-blocking, ignored: {}", dropped.join(", "));
            }
            for v in &report.verdicts {
                println!("{}", verdict_line(v));
            }
            println!("termination guaranteed:");
            for (c, ok) in &report.guarantees {
                println!("  {:<10} {}", c.name(), if *ok { "yes" } else { "no" });
            }
        }
    }
    Ok(if outcomes.contains(&Outcome::Satisfied) {
        0
    } else if outcomes.contains(&Outcome::Unknown) {
        2
    } else {
        1
    })
}

fn run_cmd(args: RunArgs) -> Result<u8> {
    let kb = load(&args.input)?;
    no_negation(&kb, "run")?;
    let res = run(&kb.facts, &kb.positive_rules(), args.chase.criterion, args.chase.budget());
    if args.trace {
        for step in &res.trace {
            let mut v = serde_json::to_value(step)?;
            v["version"] = json!(1);
            println!("{v}");
        }
    }
    let status = serde_json::to_value(res.status)?;
    match args.format {
        Format::Json => println!(
            "{}",
            json!({
                "version": 1,
                "criterion": args.chase.criterion,
                "status": status,
                "rounds": res.rounds,
                "atoms": strings(&res.produced),
            })
        ),
        Format::Text | Format::Dot => {
            println!("status: {} after {} rounds", status.as_str().unwrap_or_default(), res.rounds);
            print!("{}", print_facts(&res.produced));
        }
    }
    Ok(if res.terminated() { 0 } else { 2 })
}

fn ask(args: AskArgs) -> Result<u8> {
    let kb = load(&args.input)?;
    no_negation(&kb, "ask")?;
    let queries = match &args.query {
        Some(q) => vec![parse_query(q)?],
        None if kb.queries.is_empty() => bail!("no query given and the file has none"),
        None => kb.queries.clone(),
    };
    let rules = kb.positive_rules();
    let mut code = 0;
    let mut results = Vec::new();
    for q in &queries {
        let a = answer(&kb.facts, &rules, q, args.chase.criterion, args.chase.budget());
        code = code.max(match a {
            Answer::Yes { .. } => 0,
            Answer::No => 1,
            Answer::NoWithinBudget => 2,
        });
        results.push((q, a));
    }
    match args.format {
        Format::Json => {
            let answers: Vec<Value> = results
                .iter()
                .map(|(q, a)| {
                    let mut v = serde_json::to_value(a).expect("answer serializes");
                    v["query"] = json!(strings(q));
                    v
                })
                .collect();
            println!("{}", json!({"version": 1, "criterion": args.chase.criterion, "answers": answers}));
        }
        Format::Text | Format::Dot => {
            for (q, a) in &results {
                let text = match a {
                    Answer::Yes { round } => format!("yes (round {round})"),
                    Answer::No => "no".to_string(),
                    Answer::NoWithinBudget => "no within budget".to_string(),
                };
                println!("? {}: {text}", strings(q).join(", "));
            }
        }
    }
    Ok(code)
}

fn stable(args: StableArgs) -> Result<u8> {
    let kb = load(&args.input)?;
    let budget = TreeBudget {
        max_depth: args.max_depth,
        max_nodes: args.max_nodes,
    };
    let s = stable_sets(&kb.facts, &kb.rules, args.criterion, budget)?;
    match args.format {
        Format::Json => println!("{}", s.to_json()),
        Format::Text | Format::Dot => {
            println!(
                "{} {}-stable set(s), {} nodes explored{}",
                s.sets.len(),
                s.criterion,
                s.explored_nodes,
                if s.exhaustive { "" } else { ", budget exhausted" }
            );
            for (i, set) in s.sets.iter().enumerate() {
                println!("set {}: {{{}}}", i + 1, strings(&set.atoms).join(", "));
            }
        }
    }
    Ok(if s.exhaustive { 0 } else { 2 })
}

fn graph(args: GraphArgs) -> Result<u8> {
    let kb = load(&args.input)?;
    let json = args.format == Format::Json;
    let out = match args.kind {
        Kind::Grd => {
            let g = if args.negation_aware { nm_grd(&kb.rules) } else { grd(&pos(&kb.rules)) };
            if json {
                let edges: Vec<[String; 2]> = g.edge_ids().iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect();
                json!({"version": 1, "kind": "grd", "nodes": g.ids, "edges": edges, "capped": g.capped}).to_string()
            } else {
                g.to_dot()
            }
        }
        kind => {
            let kind = match kind {
                Kind::Pgf => GraphKind::Full,
                Kind::Pgd => GraphKind::Dependency,
                _ => GraphKind::Unifier,
            };
            let g = position_graph(&kb.rules, kind, args.negation_aware)?;
            if json {
                g.to_json().to_string()
            } else {
                g.to_dot()
            }
        }
    };
    println!("{}", out.trim_end());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Check(a) => check(a),
        Command::Run(a) => run_cmd(a),
        Command::Ask(a) => ask(a),
        Command::Stable(a) => stable(a),
        Command::Graph(a) => graph(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
