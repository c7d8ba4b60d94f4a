//! Command implementations behind the `ustrix` binary.
//!
//! Every command writes its normal output to the supplied writer so the
//! integration tests can drive them without spawning a process.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ustrix::container::BuildOptions;
use ustrix::datagen::{chunk_corpus, generate, random_corpus};
use ustrix::model::pattern;
use ustrix::oracle::oracle_probabilities;
use ustrix::verify::{self, check_approx, check_conservation, check_listing, check_substring, tau_grid};
use ustrix::{
    DocumentCollection, Error, GenConfig, IndexConfig, IndexContainer, LinkIndex, ListingIndex, Metric,
    SubstringIndex, Symbol, TransformConfig, UncertainString,
};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_THRESHOLD: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "ustrix", version, about = "Probabilistic-threshold indexes over uncertain strings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an uncertain string (or collection) in UST format.
    Gen(GenArgs),
    /// Build an index container from UST files.
    Build(BuildArgs),
    /// Substring search: positions whose occurrence probability reaches tau.
    Query(QueryArgs),
    /// Document listing: documents whose relevance reaches tau.
    List(QueryArgs),
    /// Approximate substring search.
    Approx(QueryArgs),
    /// Cross-check the indexes against the possible-worlds oracle.
    Verify(VerifyArgs),
    /// Time queries over a seeded workload and print CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Deterministic corpus file (whitespace is ignored).
    #[arg(long, conflicts_with = "random")]
    pub corpus: Option<PathBuf>,
    /// Use a uniform random corpus of this length instead.
    #[arg(long)]
    pub random: Option<usize>,
    /// Letters for the random corpus and for substitutions.
    #[arg(long)]
    pub alphabet: Option<String>,
    #[arg(long, default_value = "s")]
    pub name: String,
    #[arg(long, default_value_t = 0.3)]
    pub theta: f64,
    #[arg(long, default_value_t = 5)]
    pub choices: usize,
    #[arg(long, default_value_t = 4)]
    pub edit_radius: usize,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Chance that an uncertain position is correlated with a nearby one.
    #[arg(long, default_value_t = 0.0)]
    pub correlation_rate: f64,
    /// Split the corpus into documents of normally distributed length.
    #[arg(long, requires = "chunk_sd")]
    pub chunk_mean: Option<f64>,
    #[arg(long)]
    pub chunk_sd: Option<f64>,
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Max,
    Or,
    Orx,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Max => Metric::Max,
            MetricArg::Or => Metric::Or,
            MetricArg::Orx => Metric::OrIndependent,
        }
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// UST files; their blocks are concatenated into one collection.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub tau_min: f64,
    /// Also build the approximate index with this error bound.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Also build the listing index (always built for collections).
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
    /// Cap on the transformed text length (default 64 n / tau_min^2).
    #[arg(long)]
    pub max_text_len: Option<usize>,
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    /// Index container written by `build`.
    pub index: PathBuf,
    /// Pattern to search; repeat for a batch.
    #[arg(short, long = "pattern")]
    pub patterns: Vec<String>,
    /// File with one pattern per line.
    #[arg(long)]
    pub pattern_file: Option<PathBuf>,
    #[arg(long)]
    pub tau: f64,
    /// One JSON object per result instead of plain lists.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check every pattern occurring in this UST file instead of seeded
    /// random strings.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Number of seeded random strings.
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Longest random string.
    #[arg(long, default_value_t = 40)]
    pub max_len: usize,
    /// Construction floor for `--input`.
    #[arg(long, default_value_t = 0.1)]
    pub tau_min: f64,
    /// Error bound of the approximate index for `--input`.
    #[arg(long, default_value_t = 0.05)]
    pub epsilon: f64,
    /// Longest pattern enumerated for `--input`.
    #[arg(long, default_value_t = 4)]
    pub max_pattern: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    N,
    Tau,
    TauMin,
    M,
    Theta,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated values for the swept axis.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0.3)]
    pub tau: f64,
    #[arg(long, default_value_t = 0.2)]
    pub tau_min: f64,
    /// Pattern length.
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    #[arg(long, default_value_t = 200)]
    pub queries: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "ACDEFGHIKLMNPQRSTVWY")]
    pub alphabet: String,
}

/// A failed command and the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. } | Error::Invalid { .. } => EXIT_PARSE,
            Error::Threshold { .. } => EXIT_THRESHOLD,
            Error::Capacity { .. } => EXIT_CAPACITY,
            _ => EXIT_OTHER,
        };
        let mut message = e.to_string();
        if let Error::Capacity { cap_name, .. } = e {
            message.push_str(&format!(" (raise it with --{cap_name})"));
        }
        Failure { code, message }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::from(Error::Io(e))
    }
}

pub type CmdResult = Result<(), Failure>;

pub fn run(cli: Cli, out: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Build(a) => cmd_build(&a, out),
        Command::Query(a) => cmd_query(&a, out),
        Command::List(a) => cmd_list(&a, out),
        Command::Approx(a) => cmd_approx(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
        Command::Bench(a) => cmd_bench(&a, out),
    }
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CmdResult {
    let corpus = match (&a.corpus, a.random) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            text.split_whitespace().collect::<String>()
        }
        (None, Some(n)) => random_corpus(n, a.alphabet.as_deref().unwrap_or("ACGT"), a.seed)?,
        (None, None) => return Err(Error::Argument("give --corpus or --random".into()).into()),
    };
    let cfg = GenConfig {
        theta: a.theta,
        choices: a.choices,
        edit_radius: a.edit_radius,
        neighborhood_samples: a.samples,
        seed: a.seed,
        alphabet: a.alphabet.clone(),
        correlation_rate: a.correlation_rate,
    };
    let docs = match (a.chunk_mean, a.chunk_sd) {
        (Some(mean), Some(sd)) => chunk_corpus(&corpus, mean, sd, a.seed)?
            .iter()
            .enumerate()
            .map(|(j, chunk)| {
                let c = GenConfig {
                    seed: cfg.seed.wrapping_add(j as u64),
                    ..cfg.clone()
                };
                generate(&format!("{}{}", a.name, j + 1), chunk, &c)
            })
            .collect::<ustrix::Result<Vec<_>>>()?,
        _ => vec![generate(&a.name, &corpus, &cfg)?],
    };
    let text = ustrix::ust::write(&docs);
    match &a.out {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn read_inputs(paths: &[PathBuf]) -> Result<DocumentCollection, Failure> {
    let mut docs = Vec::new();
    for p in paths {
        let src = std::fs::read_to_string(p)?;
        docs.extend(ustrix::ust::parse(&src, &p.display().to_string())?);
    }
    Ok(DocumentCollection::checked(docs)?)
}

pub fn cmd_build(a: &BuildArgs, out: &mut dyn Write) -> CmdResult {
    let docs = read_inputs(&a.inputs)?;
    let mut opts = BuildOptions::new(a.tau_min);
    opts.epsilon = a.epsilon;
    opts.metric = a.metric.map(Metric::from);
    opts.config = IndexConfig {
        transform: TransformConfig { max_len: a.max_text_len },
        ..IndexConfig::default()
    };
    let c = IndexContainer::build(docs, &opts)?;
    c.save(&a.out)?;
    let n = c.docs.docs().iter().map(|u| u.len()).sum::<usize>();
    writeln!(
        out,
        "wrote {} ({} document(s), {} positions, tau_min {})",
        a.out.display(),
        c.docs.len(),
        n,
        c.tau_min
    )?;
    Ok(())
}

fn batch(a: &QueryArgs) -> Result<Vec<(String, Vec<Symbol>)>, Failure> {
    let mut raw = a.patterns.clone();
    if let Some(path) = &a.pattern_file {
        let text = std::fs::read_to_string(path)?;
        raw.extend(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from));
    }
    if raw.is_empty() {
        return Err(Error::Argument("no pattern given (use --pattern or --pattern-file)".into()).into());
    }
    raw.into_iter()
        .map(|s| {
            let p = pattern(&s)?;
            Ok((s, p))
        })
        .collect()
}

fn load(path: &Path) -> Result<IndexContainer, Failure> {
    Ok(IndexContainer::load(path)?)
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn print_hits(
    a: &QueryArgs,
    out: &mut dyn Write,
    mut search: impl FnMut(&[Symbol]) -> ustrix::Result<Vec<(usize, f64)>>,
) -> CmdResult {
    for (text, p) in batch(a)? {
        let hits = search(&p)?;
        if a.json {
            for (pos, prob) in hits {
                let row = json!({"pattern": text, "tau": a.tau, "position": pos, "probability": prob});
                writeln!(out, "{row}")?;
            }
        } else {
            writeln!(out, "{}", join(hits.iter().map(|h| h.0)))?;
        }
    }
    Ok(())
}

pub fn cmd_query(a: &QueryArgs, out: &mut dyn Write) -> CmdResult {
    let c = load(&a.index)?;
    let ix = c.substring()?;
    print_hits(a, out, |p| Ok(ix.query_detailed(p, a.tau)?.0))
}

pub fn cmd_approx(a: &QueryArgs, out: &mut dyn Write) -> CmdResult {
    let c = load(&a.index)?;
    let ix = c.approx()?;
    print_hits(a, out, |p| Ok(ix.query_detailed(p, a.tau)?.0))
}

pub fn cmd_list(a: &QueryArgs, out: &mut dyn Write) -> CmdResult {
    let c = load(&a.index)?;
    let ix = c.listing()?;
    for (text, p) in batch(a)? {
        let (hits, _) = ix.list_detailed(&p, a.tau)?;
        let names = ix.names();
        if a.json {
            for (d, rel) in hits {
                let row = json!({"pattern": text, "tau": a.tau, "doc": names[d], "relevance": rel});
                writeln!(out, "{row}")?;
            }
        } else {
            writeln!(out, "{}", join(hits.iter().map(|h| &names[h.0])))?;
        }
    }
    Ok(())
}

/// Every pattern of length `1..=max_len` with a nonzero-probability
/// occurrence in `u`, stopping after `limit` patterns.
pub fn occurring_patterns(u: &UncertainString, max_len: usize, limit: usize) -> Vec<Vec<Symbol>> {
    let mut seen = BTreeSet::new();
    let pos = u.positions();
    'starts: for start in 0..pos.len() {
        let mut frontier: Vec<Vec<Symbol>> = vec![Vec::new()];
        for d in pos.iter().skip(start).take(max_len) {
            let mut next = Vec::with_capacity(frontier.len() * d.len());
            for prefix in &frontier {
                for &(s, _) in d.entries() {
                    let mut p = prefix.clone();
                    p.push(s);
                    seen.insert(p.clone());
                    next.push(p);
                    if seen.len() >= limit {
                        break 'starts;
                    }
                }
            }
            frontier = next;
        }
    }
    seen.into_iter()
        .filter(|p| !oracle_probabilities(u, p).is_empty())
        .collect()
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let (checked, queries, mismatch) = match &a.input {
        None => {
            let r = verify::verify_seeded(a.count, a.seed, a.max_len)?;
            (r.instances, r.queries, r.mismatch)
        }
        Some(path) => verify_file(path, a)?,
    };
    if let Some(m) = mismatch {
        writeln!(out, "MISMATCH {m}")?;
        return Err(Failure {
            code: EXIT_MISMATCH,
            message: format!("verification failed: {m}"),
        });
    }
    writeln!(out, "ok: {checked} instance(s), {queries} queries agree with the oracle")?;
    Ok(())
}

type VerifyOutcome = (usize, usize, Option<verify::Mismatch>);

fn verify_file(path: &Path, a: &VerifyArgs) -> Result<VerifyOutcome, Failure> {
    let docs = read_inputs(&[path.to_path_buf()])?;
    let cfg = IndexConfig::default();
    let taus = tau_grid(a.tau_min);
    let mut queries = 0;
    let mut all = Vec::new();
    for u in docs.docs() {
        let patterns = occurring_patterns(u, a.max_pattern, 20_000);
        let ix = SubstringIndex::build(u, a.tau_min, &cfg)?;
        queries += 2 * patterns.len() * taus.len();
        if let Some(m) = check_substring(u, &ix, &patterns, &taus)? {
            return Ok((docs.len(), queries, Some(m)));
        }
        if u.len() <= 40 {
            if let Some(m) = check_conservation(u, ix.transformed()) {
                return Ok((docs.len(), queries, Some(m)));
            }
        }
        let ax = LinkIndex::from_transformed(ix.transformed().clone(), a.epsilon);
        if let Some(m) = check_approx(u, &ax, &patterns, &taus)? {
            return Ok((docs.len(), queries, Some(m)));
        }
        all.extend(patterns);
    }
    all.sort();
    all.dedup();
    for metric in [Metric::Max, Metric::Or, Metric::OrIndependent] {
        let lx = ListingIndex::build(&docs, a.tau_min, metric, &cfg)?;
        queries += all.len() * taus.len();
        if let Some(m) = check_listing(&docs, &lx, &all, &taus)? {
            return Ok((docs.len(), queries, Some(m)));
        }
    }
    Ok((docs.len(), queries, None))
}

struct Workload {
    n: usize,
    tau: f64,
    tau_min: f64,
    m: usize,
    theta: f64,
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> CmdResult {
    writeln!(out, "axis,value,mean_query_us,mean_outputs")?;
    let axis = match a.axis {
        Axis::N => "n",
        Axis::Tau => "tau",
        Axis::TauMin => "tau_min",
        Axis::M => "m",
        Axis::Theta => "theta",
    };
    for &v in &a.values {
        let mut w = Workload {
            n: a.n,
            tau: a.tau,
            tau_min: a.tau_min,
            m: a.m,
            theta: a.theta,
        };
        match a.axis {
            Axis::N => w.n = v as usize,
            Axis::Tau => w.tau = v,
            Axis::TauMin => {
                w.tau_min = v;
                w.tau = w.tau.max(v);
            }
            Axis::M => w.m = v as usize,
            Axis::Theta => w.theta = v,
        }
        let (us, outputs) = bench_point(&w, a)?;
        writeln!(out, "{axis},{v},{us:.3},{outputs:.2}")?;
    }
    Ok(())
}

fn bench_point(w: &Workload, a: &BenchArgs) -> Result<(f64, f64), Failure> {
    let corpus = random_corpus(w.n, &a.alphabet, a.seed)?;
    let cfg = GenConfig {
        theta: w.theta,
        choices: 5,
        neighborhood_samples: 4,
        seed: a.seed,
        alphabet: Some(a.alphabet.clone()),
        ..GenConfig::default()
    };
    let u = generate("bench", &corpus, &cfg)?;
    let ix = SubstringIndex::build(&u, w.tau_min, &IndexConfig::default())?;
    let patterns = verify::sampled_windows(&u, a.queries, w.m, a.seed ^ 0xbe4c);
    if patterns.is_empty() {
        return Ok((0.0, 0.0));
    }
    let mut outputs = 0usize;
    let t = Instant::now();
    for p in &patterns {
        outputs += ix.query(p, w.tau)?.len();
    }
    let us = t.elapsed().as_secs_f64() * 1e6 / patterns.len() as f64;
    Ok((us, outputs as f64 / patterns.len() as f64))
}
