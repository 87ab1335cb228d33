//! Command-line front end. Every artifact starts with a provenance header
//! carrying the version, seed and a hash of the resolved configuration.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::brw::{evolve, BranchingLaw, Mode, ParticleMeasure, StepConfig};
use crate::error::{Error, Result};
use crate::gaussian::clt_uniformity_scan;
use crate::interval::IntervalSet;
use crate::ldp::{
    concentration_probe, ldp_lower_bound, log_frequency_slope, rate_fit, typical_deviation_probe, Simulation,
    StrategyKind, StrategySpec,
};
use crate::rate::{classify, interpolation_cost_exponent, lower_tail_rate, Regime};

#[derive(Debug, Parser)]
#[command(name = "brwlab", version, about = "Large deviations of branching random walk empirical distributions")]
pub struct Cli {
    /// TOML file with default values; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, env = "BRWLAB_SEED")]
    pub seed: Option<u64>,
    /// Worker threads for replica-parallel runs.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate coefficients, regime and witnesses.
    Rate(RateArgs),
    /// Trajectories of |Z_n|, |Zhat_n|, mean position and fraction in sqrt(n) A.
    Simulate(SimulateArgs),
    /// Lower-bound estimates from the shift or dilation strategy over an n grid.
    Ldp(LdpArgs),
    /// Growth exponent of the strategy cost for the interpolation family.
    Interp(InterpArgs),
    /// Exact P(Zbar_n(sqrt(n) A) >= p) by enumeration.
    Enumerate(EnumerateArgs),
    /// Concentration of N-root populations around nu_n(A).
    ProbeConcentration(ConcentrationArgs),
    /// Typical deviations of order 1/sqrt(n).
    ProbeTypical(TypicalArgs),
    /// Sup distance between the random walk law and its Gaussian limit.
    CltScan(CltArgs),
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub b: Option<u32>,
    /// Lower tail P(Zbar_n(sqrt(n) A) <= p) instead.
    #[arg(long)]
    pub lower: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    /// exact, aggregated, hybrid or hybrid:<cap>.
    #[arg(long)]
    pub mode: Option<String>,
    /// Writes the final particle measure of every replica here.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LdpArgs {
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    /// shift or dilation (default: the regime of (A, p)).
    #[arg(long)]
    pub kind: Option<String>,
    /// Shift x (default: the rate witness).
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<f64>,
    /// Time fraction r (default: the rate witness).
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct InterpArgs {
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub k0: Option<u64>,
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    #[arg(long)]
    pub b: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ConcentrationArgs {
    /// Numbers of root particles.
    #[arg(long, value_delimiter = ',')]
    pub roots: Option<Vec<u64>>,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct TypicalArgs {
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    #[arg(long)]
    pub law: Option<String>,
    #[arg(long)]
    pub replicas: Option<u64>,
    #[arg(long)]
    pub mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[arg(long)]
    pub set: Option<String>,
    /// Dilations range over [1/R, R].
    #[arg(long = "radius")]
    pub radius: Option<f64>,
    #[arg(long = "n-grid", value_delimiter = ',')]
    pub n_grid: Option<Vec<u64>>,
    #[arg(long = "rho-points")]
    pub rho_points: Option<usize>,
}

/// Optional defaults read from `--config`. Keys match the long flag names
/// with dashes replaced by underscores.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub set: Option<String>,
    pub p: Option<f64>,
    pub b: Option<u32>,
    pub law: Option<String>,
    pub n: Option<u64>,
    pub n_grid: Option<Vec<u64>>,
    pub replicas: Option<u64>,
    pub mode: Option<String>,
    pub kind: Option<String>,
    pub x: Option<f64>,
    pub r: Option<f64>,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub k0: Option<u64>,
    pub roots: Option<Vec<u64>>,
    pub t: Option<f64>,
    pub radius: Option<f64>,
    pub rho_points: Option<usize>,
    pub offspring_exact_max: Option<u64>,
    pub split_exact_max: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            pos: e.span().map_or(0, |s| s.start),
            msg: format!("config {}: {}", path.display(), e.message()),
        })
    }
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } | Error::InvalidArgument(_) | Error::Io(_) => 2,
        Error::Infeasible(_) | Error::EnumerationTooLarge { .. } | Error::CapExceeded { .. } => 3,
        Error::Numeric(_) => 4,
    }
}

/// Resolved parameters, recorded in the output header.
struct Resolved {
    values: BTreeMap<&'static str, String>,
}

impl Resolved {
    fn new() -> Self {
        Resolved { values: BTreeMap::new() }
    }

    fn pick<T: Clone + ToString>(
        &mut self,
        key: &'static str,
        flag: Option<T>,
        file: Option<T>,
        default: Option<T>,
    ) -> Result<T> {
        let v = flag
            .or(file)
            .or(default)
            .ok_or_else(|| Error::invalid(format!("missing required option --{}", key.replace('_', "-"))))?;
        self.values.insert(key, v.to_string());
        Ok(v)
    }

    fn pick_list(
        &mut self,
        key: &'static str,
        flag: Option<Vec<u64>>,
        file: Option<Vec<u64>>,
        default: &[u64],
    ) -> Result<Vec<u64>> {
        let v = flag.or(file).unwrap_or_else(|| default.to_vec());
        if v.is_empty() {
            return Err(Error::invalid(format!("--{} must not be empty", key.replace('_', "-"))));
        }
        let text: Vec<String> = v.iter().map(u64::to_string).collect();
        self.values.insert(key, text.join(","));
        Ok(v)
    }

    fn record(&mut self, key: &'static str, value: impl ToString) {
        self.values.insert(key, value.to_string());
    }

    fn json(&self) -> String {
        serde_json::to_string(&self.values).expect("string map serializes")
    }

    fn hash(&self) -> String {
        let digest = Sha256::digest(self.json().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

fn parse_set(text: &str) -> Result<IntervalSet> {
    text.parse()
}

fn parse_law(text: &str) -> Result<BranchingLaw> {
    text.parse()
}

fn check_replicas(r: u64) -> Result<u64> {
    if r == 0 {
        Err(Error::invalid("--replicas must be positive"))
    } else {
        Ok(r)
    }
}

struct Context<'a> {
    file: &'a FileConfig,
    resolved: Resolved,
    seed: u64,
}

impl Context<'_> {
    fn simulation(&mut self, mode: Option<String>) -> Result<Simulation> {
        let mode: Mode =
            self.resolved.pick("mode", mode, self.file.mode.clone(), Some("hybrid:10000".to_string()))?.parse()?;
        let defaults = StepConfig::default();
        let step = StepConfig {
            offspring_exact_max: self.resolved.pick(
                "offspring_exact_max",
                None,
                self.file.offspring_exact_max,
                Some(defaults.offspring_exact_max),
            )?,
            split_exact_max: self.resolved.pick(
                "split_exact_max",
                None,
                self.file.split_exact_max,
                Some(defaults.split_exact_max),
            )?,
            particle_cap: defaults.particle_cap,
        };
        Ok(Simulation { mode, step, seed: self.seed })
    }
}

/// Runs a parsed command line and returns the artifact text.
pub fn run(cli: Cli) -> Result<(String, Option<PathBuf>)> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    let threads = cli.threads.or(file.threads);
    let out = cli.out.clone().or(file.out.clone());
    let mut ctx = Context { file: &file, resolved: Resolved::new(), seed };
    ctx.resolved.record("seed", seed);

    let body = match threads {
        Some(0) => return Err(Error::invalid("--threads must be positive")),
        Some(t) => {
            let pool =
                rayon::ThreadPoolBuilder::new().num_threads(t).build().map_err(|e| Error::invalid(e.to_string()))?;
            pool.install(|| dispatch(&cli.command, &mut ctx))?
        }
        None => dispatch(&cli.command, &mut ctx)?,
    };
    let mut text = String::new();
    writeln!(text, "# brwlab {} seed={} config_hash={}", env!("CARGO_PKG_VERSION"), seed, ctx.resolved.hash())
        .expect("string write");
    writeln!(text, "# config {}", ctx.resolved.json()).expect("string write");
    text.push_str(&body);
    Ok((text, out))
}

fn dispatch(command: &Command, ctx: &mut Context<'_>) -> Result<String> {
    match command {
        Command::Rate(a) => cmd_rate(a, ctx),
        Command::Simulate(a) => cmd_simulate(a, ctx),
        Command::Ldp(a) => cmd_ldp(a, ctx),
        Command::Interp(a) => cmd_interp(a, ctx),
        Command::Enumerate(a) => cmd_enumerate(a, ctx),
        Command::ProbeConcentration(a) => cmd_concentration(a, ctx),
        Command::ProbeTypical(a) => cmd_typical(a, ctx),
        Command::CltScan(a) => cmd_clt(a, ctx),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

fn cmd_rate(args: &RateArgs, ctx: &mut Context<'_>) -> Result<String> {
    let f = ctx.file;
    let r = &mut ctx.resolved;
    r.record("command", "rate");
    let set_text = r.pick("set", args.set.clone(), f.set.clone(), None)?;
    let set = parse_set(&set_text)?;
    let p = r.pick("p", args.p, f.p, None)?;
    let b = r.pick("b", args.b, f.b, Some(2))?;
    r.record("lower", args.lower);
    let report = if args.lower { lower_tail_rate(&set, p, b)? } else { classify(&set, p, b)? };
    let mut out = String::from(
        "set,p,b,tail,nu_a,regime,scale,i_tilde,x_star,j_tilde,r_star,x_star_dilation,i_rate,j_rate,near_critical,non_monotone\n",
    );
    writeln!(
        out,
        "\"{set}\",{p},{b},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        if args.lower { "lower" } else { "upper" },
        report.nu_a,
        report.regime,
        report.scale,
        report.i_tilde,
        opt(report.x_star),
        report.j_tilde,
        report.r_star,
        report.x_star_dilation,
        report.i_rate,
        report.j_rate,
        report.near_critical,
        report.non_monotone
    )
    .expect("string write");
    Ok(out)
}

fn cmd_simulate(args: &SimulateArgs, ctx: &mut Context<'_>) -> Result<String> {
    let f = ctx.file;
    ctx.resolved.record("command", "simulate");
    let set = parse_set(&ctx.resolved.pick("set", args.set.clone(), f.set.clone(), Some("(-inf,0]".into()))?)?;
    let law = parse_law(&ctx.resolved.pick("law", args.law.clone(), f.law.clone(), Some("2:0.5,3:0.5".into()))?)?;
    let n = ctx.resolved.pick("n", args.n, f.n, None)?;
    let replicas = check_replicas(ctx.resolved.pick("replicas", args.replicas, f.replicas, Some(1))?)?;
    let sim = ctx.simulation(args.mode.clone())?;
    let root = ParticleMeasure::root();
    let runs =
        sim.replicate("simulate", replicas, |rng| evolve(&root, &law, n, sim.mode, &sim.step, Some(&set), rng))?;
    let mut out = String::from("replica,generation,total_log,normalized_total,mean_position,fraction_A\n");
    for (i, run) in runs.iter().enumerate() {
        for s in &run.stats {
            writeln!(
                out,
                "{i},{},{},{},{},{}",
                s.generation,
                s.total_log,
                s.normalized_total,
                s.mean_position,
                s.fraction.expect("tracked set")
            )
            .expect("string write");
        }
    }
    if let Some(path) = &args.snapshot {
        let mut snap = String::new();
        for (i, run) in runs.iter().enumerate() {
            writeln!(snap, "# replica {i} generation {}", run.last.generation()).expect("string write");
            snap.push_str(&run.last.snapshot());
        }
        std::fs::write(path, snap)?;
    }
    Ok(out)
}

fn cmd_ldp(args: &LdpArgs, ctx: &mut Context<'_>) -> Result<String> {
    let f = ctx.file;
    ctx.resolved.record("command", "ldp");
    let set = parse_set(&ctx.resolved.pick("set", args.set.clone(), f.set.clone(), None)?)?;
    let p = ctx.resolved.pick("p", args.p, f.p, None)?;
    let law = parse_law(&ctx.resolved.pick("law", args.law.clone(), f.law.clone(), Some("2:0.5,3:0.5".into()))?)?;
    let grid = ctx.resolved.pick_list("n_grid", args.n_grid.clone(), f.n_grid.clone(), &[100, 400, 900])?;
    let replicas = check_replicas(ctx.resolved.pick("replicas", args.replicas, f.replicas, Some(1000))?)?;
    let sim = ctx.simulation(args.mode.clone())?;
    let report = classify(&set, p, law.b() as u32)?;
    let default_kind = if report.regime == Regime::Dilation { "dilation" } else { "shift" };
    let kind = match ctx.resolved.pick("kind", args.kind.clone(), f.kind.clone(), Some(default_kind.into()))?.as_str() {
        "shift" => StrategyKind::Shift,
        "dilation" => StrategyKind::Dilation,
        other => return Err(Error::invalid(format!("unknown strategy kind '{other}'"))),
    };
    let (x_default, r_default) = match kind {
        StrategyKind::Shift => (report.x_star.unwrap_or(0.0), 0.0),
        StrategyKind::Dilation => (report.x_star_dilation, report.r_star),
    };
    let x = ctx.resolved.pick("x", args.x, f.x, Some(x_default))?;
    let r = ctx.resolved.pick("r", args.r, f.r, Some(r_default))?;
    let mut out = String::from("n,kind,x,r,w,q,s,log_prefix,q_hat,ci_lo,ci_hi,log_neg_log,theory_rate,gap\n");
    let mut points = Vec::new();
    for &n in &grid {
        let spec = match kind {
            StrategyKind::Shift => StrategySpec::shift(x, n)?,
            StrategyKind::Dilation => StrategySpec::dilation(x, r, n)?,
        };
        let e = ldp_lower_bound(&spec, &set, p, &law, replicas, &sim)?;
        writeln!(
            out,
            "{n},{kind},{x},{r},{},{},{},{},{},{},{},{},{},{}",
            spec.w,
            spec.q,
            spec.s,
            e.log_prefix,
            e.success.q_hat,
            e.success.ci_lo,
            e.success.ci_hi,
            e.log_neg_log,
            e.theory_rate,
            e.relative_gap
        )
        .expect("string write");
        points.push((n, e.log_neg_log));
    }
    if points.len() >= 3 {
        let fit = rate_fit(&points, report.scale)?;
        writeln!(out, "# fit scale={} slope={} intercept={}", report.scale, fit.slope, fit.intercept)
            .expect("string write");
    }
    Ok(out)
}

fn cmd_interp(args: &InterpArgs, ctx: &mut Context<'_>) -> Result<String> {
    let f = ctx.file;
    let r = &mut ctx.resolved;
    r.record("command", "interp");
    let alpha = r.pick("alpha", args.alpha, f.alpha, None)?;
    let p = r.pick("p", args.p, f.p, None)?;
    let delta = r.pick("delta", args.delta, f.delta, None)?;
    let k0 = r.pick("k0", args.k0, f.k0, Some(2))?;
    let b = r.pick("b", args.b, f.b, Some(2))?;
    let grid = r.pick_list("n_grid", args.n_grid.clone(), f.n_grid.clone(), &[100, 1_000, 10_000, 100_000])?;
    let fit = interpolation_cost_exponent(alpha, p, delta, k0, &grid, b, 0.0)?;
    let mut out = String::from("n,k,w,cost_exponent,measure,prescribed_k,alpha_hat\n");
    for row in &fit.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.n, row.k, row.w, row.cost_exponent, row.measure, row.prescribed_k, fit.alpha_hat
        )
        .expect("string write");
    }
    writeln!(out, "# disjoint_from_k={}", fit.disjoint_from).expect("string write");
    Ok(out)
}

fn cmd_enumerate(args: &EnumerateArgs, ctx: &mut Context<'_>) -> Result<String> {
    let f = ctx.file;
    let r = &mut ctx.resolved;
    r.record("command", "enumerate");
    let n = r.pick("n", args.n, f.n, None)?;
    let law_text = r.pick("law", args.law.clone(), f.law.clone(), None)?;
    let law = parse_law(&law_text)?;
    let set = parse_set(&r.pick("set", args.set.clone(), f.set.clone(), None)?)?;
    let p = r.pick("p", args.p, f.p, None)?;
    let prob = crate::brw::enumerate_exact(n, &law, &set, p)?;
    let float = num_traits::ToPrimitive::to_f64(&prob).unwrap_or(f64::NAN);
    Ok(format!("n,law,set,p,probability,exact\n{n},\"{law}\",\"{set}\",{p},{float},{prob}\n"))
}

fn cmd_concentration(args: &ConcentrationArgs, ctx: &mut Context<'_>) -> Result<String> {
    let f = ctx.file;
    ctx.resolved.record("command", "probe-concentration");
    let roots = ctx.resolved.pick_list("roots", args.roots.clone(), f.roots.clone(), &[100, 400, 1600])?;
    let set = parse_set(&ctx.resolved.pick("set", args.set.clone(), f.set.clone(), Some("(0,inf)".into()))?)?;
    let delta = ctx.resolved.pick("delta", args.delta, f.delta, Some(0.05))?;
    let n = ctx.resolved.pick("n", args.n, f.n, Some(16))?;
    let law =
        parse_law(&ctx.resolved.pick("law", args.law.clone(), f.law.clone(), Some("2:0.999,2000:0.001".into()))?)?;
    let replicas = check_replicas(ctx.resolved.pick("replicas", args.replicas, f.replicas, Some(10_000))?)?;
    let mut sim = ctx.simulation(args.mode.clone().or_else(|| Some("aggregated".into())))?;
    if args.mode.is_none() && f.mode.is_none() {
        sim.step = StepConfig::exact_in_law();
    }
    let mut out = String::from("roots,events,replicas,frequency,reference,ci_lo,ci_hi\n");
    let mut points = Vec::new();
    for &big_n in &roots {
        let res = concentration_probe(big_n, &set, delta, n, &law, replicas, &sim)?;
        writeln!(
            out,
            "{big_n},{},{},{},{},{},{}",
            res.events, res.replicas, res.frequency, res.reference, res.ci.0, res.ci.1
        )
        .expect("string write");
        points.push((big_n as f64, res));
    }
    if points.len() >= 2 && points.iter().all(|(_, r)| r.events > 0) {
        let s = log_frequency_slope(&points)?;
        writeln!(out, "# log_frequency_slope={} stderr={}", s.slope, s.stderr).expect("string write");
    }
    Ok(out)
}

fn cmd_typical(args: &TypicalArgs, ctx: &mut Context<'_>) -> Result<String> {
    let f = ctx.file;
    ctx.resolved.record("command", "probe-typical");
    let set = parse_set(&ctx.resolved.pick("set", args.set.clone(), f.set.clone(), Some("(-inf,0]".into()))?)?;
    let t = ctx.resolved.pick("t", args.t, f.t, Some(2.0))?;
    let grid = ctx.resolved.pick_list("n_grid", args.n_grid.clone(), f.n_grid.clone(), &[64, 256, 1024])?;
    let law = parse_law(&ctx.resolved.pick(
        "law",
        args.law.clone(),
        f.law.clone(),
        Some("2:0.9999,100000:0.0001".into()),
    )?)?;
    let replicas = check_replicas(ctx.resolved.pick("replicas", args.replicas, f.replicas, Some(200))?)?;
    let sim = ctx.simulation(args.mode.clone())?;
    let mut out = String::from("n,t,events,replicas,frequency,threshold,ci_lo,ci_hi\n");
    for &n in &grid {
        let res = typical_deviation_probe(&set, t, n, &law, replicas, &sim)?;
        writeln!(
            out,
            "{n},{t},{},{},{},{},{},{}",
            res.events, res.replicas, res.frequency, res.threshold, res.ci.0, res.ci.1
        )
        .expect("string write");
    }
    Ok(out)
}

fn cmd_clt(args: &CltArgs, ctx: &mut Context<'_>) -> Result<String> {
    let f = ctx.file;
    let r = &mut ctx.resolved;
    r.record("command", "clt-scan");
    let set = parse_set(&r.pick("set", args.set.clone(), f.set.clone(), Some("(-inf,0]".into()))?)?;
    let radius = r.pick("radius", args.radius, f.radius, Some(2.0))?;
    let grid = r.pick_list("n_grid", args.n_grid.clone(), f.n_grid.clone(), &[25, 100, 400])?;
    let rho_points = r.pick("rho_points", args.rho_points, f.rho_points, Some(41))?;
    let mut out = String::from("n,sup_error,argmax_rho,argmax_xi,xi_radius\n");
    for &n in &grid {
        let s = clt_uniformity_scan(&set, radius, n, rho_points)?;
        writeln!(out, "{n},{},{},{},{}", s.sup_error, s.argmax_rho, s.argmax_xi, s.xi_radius).expect("string write");
    }
    Ok(out)
}

/// Parses `args`, runs the command and writes its artifact; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli).and_then(|(text, out)| match out {
        Some(path) => std::fs::write(&path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("brwlab: {e}");
            exit_code(&e)
        }
    }
}
