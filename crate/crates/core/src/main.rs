use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use confound::bench::{
    format_table, inject_confounders, run_benchmark, BenchmarkConfig, DiscreteBayesNet,
    InjectionConfig,
};
use confound::graphs::{simple_trails, Blocker, DagJson};
use confound::{
    d_separated, find_separator, learn, run_algorithm1, Dataset, Error, LearnerConfig,
    LearnerMode, ScoreContext, SeparatorQuery,
};

#[derive(Parser)]
#[command(name = "confound", version, about = "Score-based causal discovery with latent confounder recovery")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn a DAG from data and write it as JSON.
    Learn {
        #[command(flatten)]
        input: DataArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a DAG, classify its triangles and recreate latent confounders.
    Discover {
        #[command(flatten)]
        input: DataArgs,
        #[command(flatten)]
        learner: LearnerArgs,
        #[command(flatten)]
        test: TestArgs,
        /// Where to write the JSON result; the text report goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Greedy separator search between two variables, with its trace.
    Sepset {
        #[command(flatten)]
        input: DataArgs,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
        #[command(flatten)]
        test: TestArgs,
        #[arg(long, value_delimiter = ',')]
        compulsory: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        forbidden: Vec<String>,
    },
    /// d-separation query on a graph, with the status of every trail.
    Dsep {
        /// DAG JSON (`nodes`, `arcs`) or network JSON.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        x: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        given: Vec<String>,
        /// Maximum number of trails listed per pair.
        #[arg(long, default_value_t = 100)]
        max_trails: usize,
    },
    /// Forward-sample a network into a CSV file.
    Sample {
        #[arg(long)]
        bn: PathBuf,
        #[arg(long)]
        rows: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Variables left out of the output.
        #[arg(long, value_delimiter = ',')]
        hide: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Plant latent confounders in a network.
    Inject {
        #[arg(long)]
        bn: PathBuf,
        #[command(flatten)]
        injection: InjectionArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inject, sample, discover and score over a grid of sizes and repetitions.
    Benchmark {
        #[arg(long)]
        bn: PathBuf,
        #[command(flatten)]
        injection: InjectionArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [5000, 20000, 50000, 100000])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        learner: LearnerArgs,
        #[command(flatten)]
        test: TestArgs,
        /// Leave out the timing column.
        #[arg(long)]
        no_time: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args)]
struct LearnerArgs {
    #[arg(long, default_value = "auto")]
    mode: LearnerMode,
    #[arg(long, default_value_t = 4)]
    max_parents: usize,
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Seed of the hill-climbing restarts.
    #[arg(long = "learner-seed", default_value_t = 0)]
    learner_seed: u64,
    /// Largest node count learnt exactly in auto mode.
    #[arg(long, default_value_t = 20)]
    auto_threshold: usize,
}

impl LearnerArgs {
    fn config(&self) -> LearnerConfig {
        LearnerConfig {
            max_parents: self.max_parents,
            mode: self.mode,
            restarts: self.restarts,
            seed: self.learner_seed,
            auto_threshold: self.auto_threshold,
        }
    }
}

#[derive(Args)]
struct TestArgs {
    /// Largest conditioning set size.
    #[arg(long, default_value_t = 7)]
    h: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct InjectionArgs {
    #[arg(long, default_value_t = 2)]
    confounders: usize,
    #[arg(long, default_value_t = 2)]
    latent_card: usize,
}

impl InjectionArgs {
    fn config(&self, seed: u64) -> InjectionConfig {
        InjectionConfig {
            n_confounders: self.confounders,
            latent_cardinality: self.latent_card,
            seed,
            ..InjectionConfig::default()
        }
    }
}

/// Failure that should exit with 1 rather than 2.
#[derive(Debug)]
struct AlgorithmicFailure(String);

impl std::fmt::Display for AlgorithmicFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for AlgorithmicFailure {}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<AlgorithmicFailure>().is_some() {
        return 1;
    }
    match e.downcast_ref::<Error>() {
        Some(Error::NoEligiblePair(_) | Error::InjectionExhausted { .. }) => 1,
        _ => 2,
    }
}

fn delimiter(c: char) -> anyhow::Result<u8> {
    u8::try_from(c).map_err(|_| anyhow::anyhow!("delimiter must be a single-byte character"))
}

fn load_data(a: &DataArgs) -> anyhow::Result<Dataset> {
    Ok(Dataset::load(&a.input, delimiter(a.delimiter)?)?)
}

fn write_out(path: &Path, contents: &str) -> anyhow::Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(so: &mut String, out: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write_out(p, contents),
        None => {
            so.push_str(contents);
            Ok(())
        }
    }
}

fn ids(d: &Dataset, names: &[String]) -> anyhow::Result<Vec<usize>> {
    Ok(names.iter().map(|n| d.index_of(n)).collect::<Result<_, _>>()?)
}

fn named(names: &[String], set: impl IntoIterator<Item = usize>) -> String {
    let v: Vec<&str> = set.into_iter().map(|x| names[x].as_str()).collect();
    format!("{{{}}}", v.join(", "))
}

fn load_graph(path: &Path) -> anyhow::Result<DagJson> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(g) = serde_json::from_str::<DagJson>(&text) {
        return Ok(g);
    }
    let bn = DiscreteBayesNet::from_json(&serde_json::from_str(&text).map_err(Error::from)?)?;
    Ok(DagJson::from_dag(bn.dag(), &bn.names()))
}

fn run(cli: Cli, so: &mut String) -> anyhow::Result<()> {
    use std::fmt::Write as _;
    match cli.command {
        Command::Learn { input, learner, out } => {
            let d = load_data(&input)?;
            let g = learn(&d, &learner.config())?;
            let json = serde_json::to_string_pretty(&DagJson::from_dag(&g, &d.names()))?;
            emit(so, out.as_deref(), &(json + "\n"))
        }
        Command::Discover { input, learner, test, out } => {
            let d = load_data(&input)?;
            let found = run_algorithm1(&d, &learner.config(), test.h, test.alpha)?;
            if let Some(p) = out {
                write_out(&p, &(serde_json::to_string_pretty(&found.to_json())? + "\n"))?;
            }
            so.push_str(&found.report());
            Ok(())
        }
        Command::Sepset { input, u, v, test, compulsory, forbidden } => {
            let d = load_data(&input)?;
            let names = d.names();
            let q = SeparatorQuery::new(d.index_of(&u)?, d.index_of(&v)?, test.h, test.alpha)
                .compulsory(ids(&d, &compulsory)?)
                .forbidden(ids(&d, &forbidden)?);
            let ctx = ScoreContext::new(&d)?;
            let r = find_separator(&q, &ctx)?;
            let mut z: BTreeSet<usize> = q.compulsory.clone();
            for step in &r.trace {
                if let Some(y) = step.added {
                    z.insert(y);
                    write!(so, "add {}: ", names[y])?;
                } else {
                    write!(so, "start: ")?;
                }
                let s = &step.verdict;
                writeln!(
                    so, "Z = {} G2 = {:.4} dof = {} critical = {:.4} {}",
                    named(&names, z.iter().copied()),
                    s.statistic,
                    s.dof,
                    s.critical,
                    if s.independent { "independent" } else { "dependent" }
                )?;
            }
            match r.separator() {
                Some(z) => writeln!(so, "separator: {}", named(&names, z.iter().copied()))?,
                None => writeln!(so, "no separator found")?,
            };
            Ok(())
        }
        Command::Dsep { graph, x, y, given, max_trails } => {
            let gj = load_graph(&graph)?;
            let g = gj.to_dag()?;
            let names = &gj.nodes;
            let index = |n: &String| {
                names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| Error::UnknownName(n.clone()))
            };
            let xs: BTreeSet<usize> = x.iter().map(index).collect::<Result<_, _>>()?;
            let ys: BTreeSet<usize> = y.iter().map(index).collect::<Result<_, _>>()?;
            let z: BTreeSet<usize> = given.iter().map(index).collect::<Result<_, _>>()?;
            let sep = d_separated(&g, &xs, &ys, &z)?;
            writeln!(
                so, "{} _||_ {} | {}: {sep}",
                named(names, xs.iter().copied()),
                named(names, ys.iter().copied()),
                named(names, z.iter().copied())
            )?;
            for &a in &xs {
                for &b in &ys {
                    for t in simple_trails(&g, a, b, Some(max_trails)) {
                        let mut path = names[t.nodes[0]].clone();
                        for (i, &n) in t.nodes.iter().enumerate().skip(1) {
                            path.push_str(if t.forward[i - 1] { " -> " } else { " <- " });
                            path.push_str(&names[n]);
                        }
                        let status = match t.blocker(&g, &z) {
                            None => "active".to_owned(),
                            Some(Blocker::Collider(c)) => format!("blocked at collider {}", names[c]),
                            Some(Blocker::Conditioned(c)) => format!("blocked by {}", names[c]),
                        };
                        writeln!(so, "  {path}: {status}")?;
                    }
                }
            }
            Ok(())
        }
        Command::Sample { bn, rows, seed, hide, out } => {
            let bn = DiscreteBayesNet::load(&bn)?;
            let hidden: BTreeSet<usize> = hide.iter().map(|n| bn.index_of(n)).collect::<Result<_, _>>()?;
            let keep: BTreeSet<usize> = (0..bn.n_nodes()).filter(|v| !hidden.contains(v)).collect();
            bn.sample(rows, seed)?.project(&keep)?.write(&out, b',')?;
            Ok(())
        }
        Command::Inject { bn, injection, seed, out } => {
            let base = DiscreteBayesNet::load(&bn)?;
            let inj = inject_confounders(&base, &injection.config(seed))?;
            inj.bn.save(&out)?;
            let names = inj.bn.names();
            for l in &inj.latents {
                writeln!(
                    so, "{} -> {}, {}",
                    names[l.node], names[l.children.0], names[l.children.1]
                )?;
            }
            Ok(())
        }
        Command::Benchmark {
            bn,
            injection,
            sizes,
            reps,
            seed,
            learner,
            test,
            no_time,
            out,
        } => {
            let base = DiscreteBayesNet::load(&bn)?;
            let cfg = BenchmarkConfig {
                sizes,
                reps,
                seed,
                injection: injection.config(seed),
                learner: learner.config(),
                h: test.h,
                alpha: test.alpha,
            };
            let report = run_benchmark(&base, &cfg)?;
            emit(so, out.as_deref(), &format_table(&report.rows, !no_time))?;
            for f in &report.failures {
                eprintln!("size {} repetition {}: {}", f.size, f.rep, f.error);
            }
            if !report.failures.is_empty() {
                bail!(AlgorithmicFailure(format!("{} run(s) failed", report.failures.len())));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut so = String::new();
    let result = run(cli, &mut so);
    let _ = std::io::stdout().write_all(so.as_bytes());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
