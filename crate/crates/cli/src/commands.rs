//! Subcommand definitions and their implementations.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::{ArgGroup, Args, Parser, Subcommand};
use cpd_core::border_search::{border_concise, border_cost_log2, border_search_rank_le, embed_scaled, BorderSearchConfig};
use cpd_core::cpd_search::{
    search_cost_log2, search_rank_le, trivial_upper_bound, Branch, Progress, PrunerSet, SearchConfig, SearchStats,
};
use cpd_core::maxrank::{
    canonical_count, maxrank_exhaustive, shape_bounds, slice_rank_filter, CanonicalOptions, MaxRankConfig, SliceFilter,
};
use cpd_core::oracle::first_mismatch;
use cpd_core::tensor::generate;
use cpd_core::{algebra, BorderRing, Cpd, Poly, PrimeField, Tensor};
use serde_json::{json, Value};
use thiserror::Error;

use crate::format::{
    border_cpd_file, field_cpd_file, looks_like_tensor_file, parse_char_matrix, parse_cpd_file, parse_tensor_file,
    write_char_matrix, CpdEntries, Entries, ParseError, TensorFile,
};

/// Default refusal threshold, as `log2` of the step estimate.
pub const DEFAULT_BUDGET_LOG2: f64 = 34.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{err}")]
    Parse { path: String, err: ParseError },
    #[error("refused: {0}")]
    Budget(String),
    #[error("{0}")]
    Core(cpd_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Budget(_) => 3,
            CliError::Core(e) => match e {
                cpd_core::Error::BudgetExceeded(_) | cpd_core::Error::TooLarge(_) => 3,
                cpd_core::Error::InternalInconsistency(_) => 4,
                _ => 2,
            },
        }
    }
}

impl From<cpd_core::Error> for CliError {
    fn from(e: cpd_core::Error) -> Self {
        CliError::Core(e)
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "cpdsearch", version, about = "Exact CPD, border rank and maximum rank search over finite fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide `rank <= R` or compute the exact rank over GF(p).
    Rank(RankArgs),
    /// Decide or compute the border rank at threshold H.
    BorderRank(BorderArgs),
    /// Maximum rank over canonical GF(2) tensors of a shape.
    Maxrank(MaxrankArgs),
    /// Known lower and upper bounds on the maximum rank of a shape.
    Bounds(BoundsArgs),
    /// Check a CPD file against a tensor file.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// Tensor file or characteristic matrix; `-` reads standard input.
    pub input: Option<PathBuf>,
    /// Generate a named tensor instead, e.g. `wstate` or `mm:2,2,2`.
    #[arg(long, conflicts_with = "input")]
    pub gen: Option<String>,
    /// Prime field size for generated tensors and characteristic matrices.
    #[arg(long)]
    pub field: Option<u64>,
    /// First side length of a characteristic matrix (default: largest vi + 1).
    #[arg(long)]
    pub slices: Option<usize>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("query").required(true).args(["le", "exact"])))]
pub struct RankArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Decide whether a CPD with at most R terms exists.
    #[arg(long, value_name = "R")]
    pub le: Option<usize>,
    /// Compute the exact rank.
    #[arg(long)]
    pub exact: bool,
    /// Comma-separated pruners: rref, lask, heuristic, rref-k[:K], frequency, none.
    #[arg(long, default_value = "rref,lask,heuristic")]
    pub pruners: String,
    /// auto, enumerate-v or kernel.
    #[arg(long, default_value = "auto")]
    pub branch: String,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Search sequentially in canonical order.
    #[arg(long)]
    pub deterministic: bool,
    /// Run even when the step estimate exceeds the budget.
    #[arg(long)]
    pub long_ok: bool,
    /// Budget as log2 of the step estimate.
    #[arg(long, default_value_t = DEFAULT_BUDGET_LOG2)]
    pub budget: f64,
    /// Seconds between progress lines on standard error; 0 disables them.
    #[arg(long, default_value_t = 1.0)]
    pub progress: f64,
    /// Print one JSON object instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("query").required(true).args(["le", "exact"])))]
pub struct BorderArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Exponent threshold; the tensor T is searched as x^(H-1) T.
    #[arg(long = "H", value_name = "H")]
    pub h: Option<usize>,
    #[arg(long, value_name = "R")]
    pub le: Option<usize>,
    #[arg(long)]
    pub exact: bool,
    /// Budget as log2 of the step estimate.
    #[arg(long, default_value_t = DEFAULT_BUDGET_LOG2)]
    pub budget: f64,
    #[arg(long)]
    pub long_ok: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub deterministic: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct MaxrankArgs {
    /// Shape as `m,n,p`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub field: u64,
    /// Known lower bound on the maximum rank (default: best known bound).
    #[arg(long = "R0", value_name = "R0")]
    pub r0: Option<usize>,
    /// Only count canonical tensors.
    #[arg(long)]
    pub count_only: bool,
    /// Also require later slices to have rank at most that of slice 0.
    #[arg(long)]
    pub slice_filter: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub shape: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    pub field: u64,
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Tensor file or characteristic matrix.
    pub tensor: PathBuf,
    pub cpd: PathBuf,
    /// Field for a characteristic-matrix tensor (default: the CPD file's field).
    #[arg(long)]
    pub slices: Option<usize>,
}

struct Io<'a> {
    out: &'a mut dyn Write,
}

impl Io<'_> {
    fn line(&mut self, s: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", s.as_ref());
    }
}

/// Runs a command line and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    2
                }
            };
        }
    };
    let mut io = Io { out };
    let res = match &cli.command {
        Command::Rank(a) => cmd_rank(a, &mut io),
        Command::BorderRank(a) => cmd_border_rank(a, &mut io),
        Command::Maxrank(a) => cmd_maxrank(a, &mut io),
        Command::Bounds(a) => cmd_bounds(a, &mut io),
        Command::Verify(a) => cmd_verify(a, &mut io),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn read_source(path: &PathBuf) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Usage(format!("reading standard input: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn field_of(p: u64) -> CliResult<PrimeField> {
    PrimeField::new(p).map_err(|e| CliError::Usage(e.to_string()))
}

/// Reads a tensor file or a characteristic matrix.
fn load_file(path: &PathBuf, field: Option<u64>, slices: Option<usize>) -> CliResult<TensorFile> {
    let src = read_source(path)?;
    let name = path.display().to_string();
    if looks_like_tensor_file(&src) {
        let f = parse_tensor_file(&src).map_err(|err| CliError::Parse { path: name, err })?;
        if let Some(p) = field {
            if p != f.field.modulus() as u64 {
                return Err(CliError::Usage(format!(
                    "--field {p} conflicts with `field {}` in {}",
                    f.field.modulus(),
                    path.display()
                )));
            }
        }
        return Ok(f);
    }
    let fd = field_of(field.unwrap_or(2))?;
    let t = parse_char_matrix(&fd, &src, slices).map_err(|err| CliError::Parse { path: name, err })?;
    Ok(TensorFile {
        field: fd,
        entries: Entries::Field(t),
    })
}

fn load_input(a: &InputArgs) -> CliResult<TensorFile> {
    match (&a.input, &a.gen) {
        (Some(p), None) => load_file(p, a.field, a.slices),
        (None, Some(fam)) => {
            let (name, params) = cpd_core::tensor::parse_family(fam)?;
            let t = generate(&name, &params)?;
            Ok(TensorFile {
                field: field_of(a.field.unwrap_or(2))?,
                entries: Entries::Field(t),
            })
        }
        _ => Err(CliError::Usage("give an input file or --gen FAMILY".into())),
    }
}

fn concise_shape(field: &PrimeField, t: &Tensor<u32>) -> Vec<usize> {
    let mut s: Vec<usize> = (0..t.ndim()).map(|d| algebra::rank(field, &t.unfold(d))).collect();
    s.sort_unstable_by(|a, b| b.cmp(a));
    s
}

fn check_budget(cost: f64, budget: f64, long_ok: bool, what: &str) -> CliResult<()> {
    if cost > budget && !long_ok {
        return Err(CliError::Budget(format!(
            "{what}: step estimate 2^{cost:.1} exceeds the budget 2^{budget}; pass --long-ok to run anyway"
        )));
    }
    Ok(())
}

fn stats_line(s: &SearchStats) -> String {
    let h = &s.pruner_hits;
    format!(
        "stats: nodes {:?} leaves {} pruner-hits rref={} lask={} heuristic={} rref-k={} frequency={} time {:.3}s",
        s.nodes_per_level, s.leaves, h.rref, h.lask, h.heuristic, h.rref_k, h.frequency, s.wall_time_secs
    )
}

fn matrix_json<E: Clone>(m: &cpd_core::Matrix<E>, show: impl Fn(&E) -> Value) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(&show).collect())).collect())
}

fn field_cpd_json(c: &Cpd<u32>) -> Value {
    json!({
        "rank": c.rank(),
        "factors": c.factors.iter().map(|m| matrix_json(m, |&e| json!(e))).collect::<Vec<_>>(),
    })
}

fn border_cpd_json(c: &Cpd<Poly>) -> Value {
    json!({
        "rank": c.rank(),
        "factors": c.factors.iter().map(|m| matrix_json(m, |e| json!(e.to_string()))).collect::<Vec<_>>(),
    })
}

fn field_tensor(f: TensorFile) -> CliResult<(PrimeField, Tensor<u32>)> {
    match f.entries {
        Entries::Field(t) => Ok((f.field, t)),
        Entries::Border(r, t) if r.threshold() == 1 => Ok((f.field, t.map(|p| p.0[0]))),
        Entries::Border(..) => Err(CliError::Usage(
            "rank works over fields; use border-rank for inputs with H > 1".into(),
        )),
    }
}

fn cmd_rank(a: &RankArgs, io: &mut Io<'_>) -> CliResult<i32> {
    let (field, t) = field_tensor(load_input(&a.input)?)?;
    let p = field.modulus() as u64;
    let pruners = PrunerSet::parse(&a.pruners).map_err(CliError::Usage)?;
    let branch: Branch = a.branch.parse().map_err(CliError::Usage)?;
    let progress = if a.progress > 0.0 && !a.json {
        let f: cpd_core::cpd_search::ProgressFn = Arc::new(move |pr: &Progress| {
            let pct = if pr.total == 0 { 100.0 } else { 100.0 * pr.done as f64 / pr.total as f64 };
            eprintln!(
                "progress: level {} {}/{} ({pct:.1}%) pruner-hits {}",
                pr.level, pr.done, pr.total, pr.pruner_hits
            );
        });
        Some(f)
    } else {
        None
    };
    let cfg = SearchConfig {
        pruners,
        branch,
        deterministic: a.deterministic,
        threads: a.threads,
        progress,
        progress_interval: Duration::from_secs_f64(a.progress.max(0.001)),
        ..SearchConfig::default()
    };
    let cshape = concise_shape(&field, &t);
    let shape_str = format!("{:?}", t.shape());
    if let Some(r) = a.le {
        let cost = search_cost_log2(&cshape, r, p);
        if !a.json {
            io.line(format!("estimate: 2^{cost:.1} steps (budget 2^{})", a.budget));
        }
        check_budget(cost, a.budget, a.long_ok, &format!("rank <= {r}"))?;
        let out = search_rank_le(&field, &t, r, &cfg)?;
        if a.json {
            io.line(
                json!({
                    "command": "rank",
                    "field": p,
                    "shape": t.shape(),
                    "concise_shape": out.concise_shape,
                    "query": {"le": r},
                    "answer": out.witness.is_some(),
                    "estimate_log2": cost,
                    "witness": out.witness.as_ref().map(field_cpd_json),
                    "stats": out.stats,
                })
                .to_string(),
            );
            return Ok(0);
        }
        io.line(format!("rank <= {r}: {}", if out.witness.is_some() { "yes" } else { "no" }));
        if let Some(w) = &out.witness {
            io.line("witness:");
            let _ = write!(io.out, "{}", field_cpd_file(field, w));
        }
        io.line(stats_line(&out.stats));
        return Ok(0);
    }
    if t.is_zero(&field) {
        let w = Cpd::empty(t.shape());
        if a.json {
            io.line(json!({"command": "rank", "field": p, "shape": t.shape(), "query": "exact", "answer": 0, "witness": field_cpd_json(&w)}).to_string());
        } else {
            io.line("rank = 0");
            io.line("witness:");
            let _ = write!(io.out, "{}", field_cpd_file(field, &w));
        }
        return Ok(0);
    }
    let lower = cshape[0];
    let upper = trivial_upper_bound(&cshape).max(lower);
    let mut attempts = Vec::new();
    for r in lower..=upper {
        let cost = search_cost_log2(&cshape, r, p);
        if !a.json {
            io.line(format!("estimate at R = {r}: 2^{cost:.1} steps (budget 2^{})", a.budget));
        }
        if let Err(e) = check_budget(cost, a.budget, a.long_ok, &format!("rank <= {r}")) {
            if !a.json && r > lower {
                io.line(format!("rank > {}", r - 1));
            }
            return Err(e);
        }
        let out = search_rank_le(&field, &t, r, &cfg)?;
        if !a.json {
            io.line(format!("R = {r}: {}", if out.witness.is_some() { "yes" } else { "no" }));
            io.line(stats_line(&out.stats));
        }
        attempts.push(json!({"R": r, "estimate_log2": cost, "stats": out.stats}));
        if let Some(w) = out.witness {
            if a.json {
                io.line(
                    json!({
                        "command": "rank",
                        "field": p,
                        "shape": t.shape(),
                        "concise_shape": cshape,
                        "query": "exact",
                        "answer": w.rank(),
                        "witness": field_cpd_json(&w),
                        "attempts": attempts,
                    })
                    .to_string(),
                );
            } else {
                io.line(format!("rank = {}", w.rank()));
                io.line("witness:");
                let _ = write!(io.out, "{}", field_cpd_file(field, &w));
            }
            return Ok(0);
        }
    }
    Err(CliError::Core(cpd_core::Error::InternalInconsistency(format!(
        "no CPD of {shape_str} found up to the trivial bound {upper}"
    ))))
}

fn cmd_border_rank(a: &BorderArgs, io: &mut Io<'_>) -> CliResult<i32> {
    let file = load_input(&a.input)?;
    let field = file.field;
    let p = field.modulus() as u64;
    let (ring, bt, base_shape) = match file.entries {
        Entries::Field(t) => {
            let h = a.h.ok_or_else(|| CliError::Usage("--H is required for field tensors".into()))?;
            if h == 0 {
                return Err(CliError::Usage("--H must be at least 1".into()));
            }
            let ring = BorderRing::new(field, h)?;
            let bt = embed_scaled(&ring, &t);
            (ring, bt, t.shape().to_vec())
        }
        Entries::Border(r, t) => {
            if let Some(h) = a.h {
                if h != r.threshold() {
                    return Err(CliError::Usage(format!(
                        "--H {h} conflicts with `H {}` in the input",
                        r.threshold()
                    )));
                }
            }
            let s = t.shape().to_vec();
            (r, t, s)
        }
    };
    let h = ring.threshold();
    let cfg = BorderSearchConfig {
        budget_log2: a.budget,
        force: a.long_ok,
        deterministic: a.deterministic,
        threads: a.threads,
    };
    let (_, _, cshape) = border_concise(&ring, &bt);
    let targets: Vec<usize> = match a.le {
        Some(r) => vec![r],
        None => (0..=trivial_upper_bound(&base_shape)).collect(),
    };
    let mut attempts = Vec::new();
    for &r in &targets {
        let cost = border_cost_log2(&cshape, r, p, h);
        if !a.json {
            io.line(format!("estimate at R = {r}: 2^{cost:.1} steps (budget 2^{})", a.budget));
        }
        check_budget(cost, a.budget, a.long_ok, &format!("border-rank(H={h}) <= {r}"))?;
        let out = border_search_rank_le(&ring, &bt, r, &cfg)?;
        let stats = format!(
            "stats: nodes {:?} too-long {:?} zero {:?} time {:.3}s",
            out.stats.nodes_per_depth, out.stats.too_long_per_depth, out.stats.zero_per_depth, out.stats.wall_time_secs
        );
        attempts.push(json!({"R": r, "estimate_log2": cost, "found": out.witness.is_some(), "nodes_per_depth": out.stats.nodes_per_depth}));
        let decided = a.le.is_some() || out.witness.is_some();
        if !decided {
            if !a.json {
                io.line(format!("R = {r}: no"));
                io.line(stats);
            }
            continue;
        }
        if a.json {
            let answer = match a.le {
                Some(_) => json!(out.witness.is_some()),
                None => json!(r),
            };
            io.line(
                json!({
                    "command": "border-rank",
                    "field": p,
                    "H": h,
                    "shape": bt.shape(),
                    "query": a.le.map_or(json!("exact"), |r| json!({"le": r})),
                    "answer": answer,
                    "witness": out.witness.as_ref().map(border_cpd_json),
                    "attempts": attempts,
                })
                .to_string(),
            );
            return Ok(0);
        }
        match a.le {
            Some(_) => io.line(format!(
                "border-rank(H={h}) <= {r}: {}",
                if out.witness.is_some() { "yes" } else { "no" }
            )),
            None => io.line(format!("border-rank(H={h}) = {r}")),
        }
        if let Some(w) = &out.witness {
            io.line("witness:");
            let _ = write!(io.out, "{}", border_cpd_file(&ring, w));
        }
        io.line(stats);
        return Ok(0);
    }
    Err(CliError::Core(cpd_core::Error::InternalInconsistency(
        "no border CPD found up to the trivial bound".into(),
    )))
}

fn cmd_maxrank(a: &MaxrankArgs, io: &mut Io<'_>) -> CliResult<i32> {
    if a.field != 2 {
        return Err(CliError::Usage("maxrank enumerates GF(2) tensors only; use --field 2".into()));
    }
    if a.shape.len() != 3 {
        return Err(CliError::Usage(format!("maxrank needs a 3-axis shape, got {:?}", a.shape)));
    }
    let prior = match a.r0 {
        Some(v) => v,
        None => shape_bounds(&a.shape, 2)?.best_lower().value,
    };
    let r0 = slice_rank_filter(prior, a.shape[0]);
    let filter = if a.slice_filter { SliceFilter::SliceZeroMaxRank } else { SliceFilter::None };
    if a.count_only {
        let opts = CanonicalOptions {
            filter,
            ..CanonicalOptions::new(r0)
        };
        let n = canonical_count(&a.shape, &opts)?;
        if a.json {
            io.line(json!({"command": "maxrank", "shape": a.shape, "R0": prior, "r0": r0, "count": n}).to_string());
        } else {
            io.line(n.to_string());
        }
        return Ok(0);
    }
    let cfg = MaxRankConfig {
        filter,
        ..MaxRankConfig::default()
    };
    let rep = maxrank_exhaustive(&a.shape, prior, &cfg)?;
    if a.json {
        io.line(
            json!({
                "command": "maxrank",
                "shape": rep.shape,
                "field": rep.field,
                "R0": rep.prior_lower,
                "r0": rep.r0,
                "tensors_searched": rep.tensors_searched,
                "max_rank": rep.max_rank,
                "witness_characteristic": write_char_matrix(&rep.witness).lines().collect::<Vec<_>>(),
                "witness_cpd": field_cpd_json(&rep.witness_cpd),
                "wall_time_secs": rep.wall_time_secs,
            })
            .to_string(),
        );
        return Ok(0);
    }
    io.line(format!(
        "shape {:?} over GF(2), R0 = {}, slice-0 rank >= {}",
        rep.shape, rep.prior_lower, rep.r0
    ));
    io.line(format!("tensors searched: {}", rep.tensors_searched));
    io.line(format!("max rank: {}", rep.max_rank));
    io.line("witness (characteristic matrix):");
    let _ = write!(io.out, "{}", write_char_matrix(&rep.witness));
    io.line("witness CPD:");
    let _ = write!(io.out, "{}", field_cpd_file(PrimeField::gf2(), &rep.witness_cpd));
    io.line(format!("time: {:.2}s", rep.wall_time_secs));
    Ok(0)
}

fn cmd_bounds(a: &BoundsArgs, io: &mut Io<'_>) -> CliResult<i32> {
    if a.shape.len() != 3 {
        return Err(CliError::Usage(format!("bounds needs a 3-axis shape, got {:?}", a.shape)));
    }
    if a.shape.contains(&0) {
        return Err(CliError::Usage("side lengths must be positive".into()));
    }
    field_of(a.field)?;
    let b = shape_bounds(&a.shape, a.field)?;
    if a.json {
        io.line(serde_json::to_string(&b).expect("bounds serialize"));
        return Ok(0);
    }
    io.line(format!("shape {:?} over GF({})", b.shape, b.field));
    let mut lower = b.lower.clone();
    let mut upper = b.upper.clone();
    lower.dedup();
    upper.dedup();
    for l in &lower {
        if upper.contains(l) {
            io.line(format!("{} exact {}", l.source, l.value));
        } else {
            io.line(format!("lower {} {}", l.source, l.value));
        }
    }
    for u in &upper {
        if !lower.contains(u) {
            io.line(format!("upper {} {}", u.source, u.value));
        }
    }
    let (lo, hi) = (b.best_lower(), b.best_upper());
    io.line(format!(
        "best: {} ({}) <= max rank <= {} ({})",
        lo.value, lo.source, hi.value, hi.source
    ));
    Ok(0)
}

fn cmd_verify(a: &VerifyArgs, io: &mut Io<'_>) -> CliResult<i32> {
    let csrc = read_source(&a.cpd)?;
    let cpd = parse_cpd_file(&csrc).map_err(|err| CliError::Parse {
        path: a.cpd.display().to_string(),
        err,
    })?;
    let tf = load_file(&a.tensor, Some(cpd.field.modulus() as u64), a.slices)?;
    let mismatch = match (&tf.entries, &cpd.cpd) {
        (Entries::Field(t), CpdEntries::Field(c)) => check_shapes(t.shape(), &c.shape()).and_then(|_| {
            first_mismatch(&tf.field, t, c).map_err(CliError::from)
        })?,
        (Entries::Border(r1, t), CpdEntries::Border(r2, c)) => {
            if r1.threshold() != r2.threshold() {
                return Err(CliError::Usage(format!(
                    "tensor has H = {}, CPD has H = {}",
                    r1.threshold(),
                    r2.threshold()
                )));
            }
            check_shapes(t.shape(), &c.shape())?;
            first_mismatch(r1, t, c)?
        }
        _ => return Err(CliError::Usage("tensor and CPD must both be over a field or both over a border ring".into())),
    };
    match mismatch {
        None => {
            io.line("OK");
            Ok(0)
        }
        Some(idx) => {
            let coords: Vec<String> = idx.iter().map(ToString::to_string).collect();
            io.line(format!("MISMATCH at ({})", coords.join(",")));
            Ok(1)
        }
    }
}

fn check_shapes(t: &[usize], c: &[usize]) -> CliResult<()> {
    if t != c {
        return Err(CliError::Usage(format!("CPD shape {c:?} does not match tensor shape {t:?}")));
    }
    Ok(())
}
