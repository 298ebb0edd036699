//! `qmask` — evaluate rate-leakage regions of state-dependent quantum
//! channels with encoder side information, and simulate the random-binning
//! coding scheme on measurement channels with classical side information.

use clap::{Args, Parser, Subcommand};
use qmask_core::channels::json::{emit_channel_spec, parse_channel_spec, ParsedChannel};
use qmask_core::channels::Channel;
use qmask_core::error::Error;
use qmask_core::presets;
use qmask_core::region::{
    evaluate_strategy_detailed, format_bits, optimize_rate, region_boundary, region_csv,
    OptimizeOptions, Strategy,
};
use qmask_core::sim::{self, induced_table, mod_add_table, simulate, EncoderMode, SimConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qmask",
    about = "Rate-leakage regions and coding simulation for state-dependent quantum channels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every invariant of a channel-spec JSON file and report residuals.
    Validate {
        /// Channel-spec JSON file.
        file: PathBuf,
    },
    /// Sweep leakage budgets into a rate-leakage boundary CSV.
    Region {
        #[command(flatten)]
        channel: ChannelArg,
        /// Budget grid start:end:step, inclusive, in bits.
        #[arg(long)]
        budgets: String,
        #[command(flatten)]
        opt: OptArgs,
        /// Output CSV path (header: budget_bits,R_bits,L_bits,n,seed).
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Best achievable rate under one leakage budget.
    Capacity {
        #[command(flatten)]
        channel: ChannelArg,
        /// Leakage budget in bits.
        #[arg(long)]
        budget: f64,
        #[command(flatten)]
        opt: OptArgs,
        /// Write the optimizing strategy as JSON.
        #[arg(long)]
        strategy_out: Option<PathBuf>,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Monte Carlo simulation of the binned random-coding scheme.
    Simulate {
        /// Simulation config JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Seed for all random streams.
        #[arg(long)]
        seed: u64,
        /// Output JSON path.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        threads: ThreadsArg,
    },
    /// Built-in example channels and their closed-form points.
    Example {
        /// One of: projection, depolarizing, projection-meas.
        name: String,
        /// Channel noise parameter ε in (0, 1].
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Strategy parameter α in [0, 1/2] (projection example).
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Write the channel-spec fixture JSON for this example.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ChannelArg {
    /// Channel-spec JSON file.
    #[arg(long)]
    channel: PathBuf,
}

#[derive(Args)]
struct OptArgs {
    /// Independent optimizer restarts.
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    /// Outer alternation sweeps per solve.
    #[arg(long, default_value_t = 24)]
    iterations: usize,
    /// Seed; restart i uses seed ⊕ i.
    #[arg(long)]
    seed: u64,
    /// Auxiliary alphabet size (default: the cardinality cap (dimA²+1)·dimE0).
    #[arg(long)]
    x_size: Option<usize>,
}

impl OptArgs {
    fn options(&self) -> OptimizeOptions {
        OptimizeOptions {
            restarts: self.restarts,
            iterations: self.iterations,
            seed: self.seed,
            x_size: self.x_size,
        }
    }
}

#[derive(Args)]
struct ThreadsArg {
    /// Worker threads (default: env QMASK_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl ThreadsArg {
    fn install(&self) {
        let n = self.threads.or_else(|| {
            std::env::var("QMASK_THREADS").ok().and_then(|v| v.parse().ok())
        });
        if let Some(n) = n {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Validate { file } => {
            let text = std::fs::read_to_string(&file)?;
            let parsed = parse_channel_spec(&text)?;
            let report = parsed.validate();
            println!("{report}");
            Ok(if report.is_valid() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Region { channel, budgets, opt, out, threads } => {
            threads.install();
            let (channel, source) = load_channel(&channel.channel)?;
            let grid = parse_budgets(&budgets)?;
            let options = opt.options();
            let rows = region_boundary(&source, &channel, &grid, &options)?;
            let csv = region_csv(&rows, options.seed);
            write_atomic(&out, csv.as_bytes())?;
            println!("wrote {} rows to {}", rows.len(), out.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Capacity { channel, budget, opt, strategy_out, threads } => {
            threads.install();
            let (channel, source) = load_channel(&channel.channel)?;
            let options = opt.options();
            let (point, strategy) = optimize_rate(&source, &channel, budget, &options)?;
            println!("R={} L={}", format_bits(point.rate), format_bits(point.leakage));
            if let Some(path) = strategy_out {
                write_atomic(&path, strategy.to_json().as_bytes())?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { config, seed, out, threads } => {
            threads.install();
            let text = std::fs::read_to_string(&config)?;
            let doc: SimDoc = serde_json::from_str(&text)
                .map_err(|e| Error::Schema(format!("malformed simulation config: {e}")))?;
            let result = run_simulation(&doc, seed, config.parent())?;
            write_atomic(&out, result.to_json().as_bytes())?;
            println!(
                "error_rate={} covering_failure_rate={} leakage={}",
                format_bits(result.error_rate),
                format_bits(result.covering_failure_rate),
                result
                    .leakage_bits_per_letter
                    .map(format_bits)
                    .unwrap_or_else(|| "n/a".to_string())
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Example { name, epsilon, alpha, emit } => run_example(&name, epsilon, alpha, emit),
    }
}

fn load_channel(path: &Path) -> Result<(Channel, qmask_core::channels::StateSource), Error> {
    let text = std::fs::read_to_string(path)?;
    let parsed = parse_channel_spec(&text)?;
    parsed.into_pair()
}

/// Inclusive start:end:step budget grid (half-step endpoint tolerance).
fn parse_budgets(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = |what: &str| Error::Domain(format!("budgets `{text}`: {what}"));
    match parts.as_slice() {
        [single] => {
            let v: f64 = single.parse().map_err(|_| bad("not a number"))?;
            Ok(vec![v])
        }
        [start, end, step] => {
            let start: f64 = start.parse().map_err(|_| bad("bad start"))?;
            let end: f64 = end.parse().map_err(|_| bad("bad end"))?;
            let step: f64 = step.parse().map_err(|_| bad("bad step"))?;
            if step <= 0.0 || end < start {
                return Err(bad("need start ≤ end and step > 0"));
            }
            let mut grid = Vec::new();
            let mut k = 0u32;
            loop {
                let v = start + step * k as f64;
                if v > end + step / 2.0 {
                    break;
                }
                grid.push(v.min(end));
                k += 1;
                if k > 100_000 {
                    return Err(bad("too many grid points"));
                }
            }
            Ok(grid)
        }
        _ => Err(bad("expected start:end:step")),
    }
}

#[derive(serde::Deserialize)]
struct SimDoc {
    n: usize,
    rate: f64,
    #[serde(default)]
    rtilde: Option<f64>,
    delta: f64,
    trials: u64,
    /// "binning" or "correction".
    encoder: String,
    model: ModelDoc,
}

#[derive(serde::Deserialize)]
#[serde(tag = "kind")]
enum ModelDoc {
    /// Binary additive test channel y = x ⊕ s with S ~ Bernoulli(ps).
    #[serde(rename = "mod_add")]
    ModAdd { ps: f64 },
    /// Measurement channel with a classical-copy source plus a strategy file
    /// supplying p(x|s) and the input states.
    #[serde(rename = "channel")]
    Channel { channel_file: String, strategy_file: String },
}

fn run_simulation(doc: &SimDoc, seed: u64, base: Option<&Path>) -> Result<sim::SimResult, Error> {
    let encoder = match doc.encoder.as_str() {
        "binning" => EncoderMode::Binning,
        "correction" => EncoderMode::Custom(presets::correction_coder()),
        other => {
            return Err(Error::Schema(format!(
                "unknown encoder `{other}` (expected binning | correction)"
            )))
        }
    };
    let config = SimConfig {
        n: doc.n,
        rate: doc.rate,
        rtilde: doc.rtilde,
        delta: doc.delta,
        trials: doc.trials,
        seed,
        encoder,
    };
    let resolve = |name: &str| -> PathBuf {
        let p = PathBuf::from(name);
        if p.is_absolute() || base.is_none() {
            p
        } else {
            base.unwrap().join(p)
        }
    };
    match &doc.model {
        ModelDoc::ModAdd { ps } => {
            if !(0.0..=1.0).contains(ps) {
                return Err(Error::Domain(format!("ps = {ps} must lie in [0, 1]")));
            }
            let table = mod_add_table();
            let q = [1.0 - ps, *ps];
            let cond = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
            simulate(&config, &table, &q, &cond)
        }
        ModelDoc::Channel { channel_file, strategy_file } => {
            let text = std::fs::read_to_string(resolve(channel_file))?;
            let parsed = parse_channel_spec(&text)?;
            let ParsedChannel::Measurement { channel, source } = parsed else {
                return Err(Error::Domain(
                    "simulation requires a measurement channel with a classical source".into(),
                ));
            };
            let source = source.ok_or_else(|| {
                Error::Domain("simulation channel needs an embedded source".into())
            })?;
            let q = classical_state_pmf(&source)?;
            let text = std::fs::read_to_string(resolve(strategy_file))?;
            let strategy = Strategy::from_json(&text)?;
            require_canonical_csi(&strategy)?;
            let table = induced_table(&channel, strategy.input_states())?;
            simulate(&config, &table, &q, strategy.cond_pmf())
        }
    }
}

/// Extract `q(s)` from a classical-copy source `Σ_s √q(s)|s,s,s⟩`.
fn classical_state_pmf(source: &qmask_core::channels::StateSource) -> Result<Vec<f64>, Error> {
    let s = source.dim_e0();
    if source.dim_e() != s || source.dim_c() != s {
        return Err(Error::Domain(
            "simulation requires a classical source with E0 ≡ E ≡ C".into(),
        ));
    }
    let v = source.vector();
    let mut q = vec![0.0; s];
    let mut off_support = 0.0f64;
    for i in 0..v.len() {
        let (a, rest) = (i / (s * s), i % (s * s));
        let (b, c) = (rest / s, rest % s);
        if a == b && b == c {
            q[a] = v[i].norm_sqr();
        } else {
            off_support = off_support.max(v[i].norm());
        }
    }
    if off_support > 1e-9 {
        return Err(Error::Domain(format!(
            "source is not a classical copy state (off-support amplitude {off_support:.3e})"
        )));
    }
    Ok(q)
}

fn require_canonical_csi(strategy: &Strategy) -> Result<(), Error> {
    let dim = strategy.csi_povm().dim();
    if strategy.csi_povm().len() != dim {
        return Err(Error::Domain(
            "simulation requires the canonical-basis CSI measurement".into(),
        ));
    }
    for (s, (_, m)) in strategy.csi_povm().elements().iter().enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                let expect = if i == s && j == s { 1.0 } else { 0.0 };
                if (m[(i, j)] - qmask_core::linalg::cplx(expect, 0.0)).norm() > 1e-9 {
                    return Err(Error::Domain(
                        "simulation requires the canonical-basis CSI measurement".into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn run_example(name: &str, epsilon: f64, alpha: f64, emit: Option<PathBuf>) -> Result<ExitCode, Error> {
    match name {
        "projection" => {
            let point = presets::projection_analytic(epsilon, alpha)?;
            println!("R={} L={}", format_bits(point.rate), format_bits(point.leakage));
            if let Some(path) = emit {
                let rpc = presets::build_projection(epsilon, &presets::default_psi())?;
                let doc = emit_channel_spec(&ParsedChannel::RandomParameter(rpc));
                write_atomic(&path, doc.as_bytes())?;
            }
        }
        "depolarizing" => {
            let rpc = presets::build_depolarizing(epsilon)?;
            // The correction scheme sends one noiseless bit with no leakage.
            println!("R={} L={}", format_bits(1.0), format_bits(0.0));
            let (channel, source) = rpc.lift()?;
            let strategy = presets::depolarizing_correction_strategy()?;
            let eval =
                evaluate_strategy_detailed(&source, &strategy, &Channel::Kraus(channel))?;
            println!(
                "single_letter_R={} single_letter_L={} (correction strategy under the one-shot functional)",
                format_bits(eval.point.rate),
                format_bits(eval.point.leakage)
            );
            if let Some(path) = emit {
                let rpc = presets::build_depolarizing(epsilon)?;
                let doc = emit_channel_spec(&ParsedChannel::RandomParameter(rpc));
                write_atomic(&path, doc.as_bytes())?;
            }
        }
        "projection-meas" => {
            let point = presets::projection_analytic(epsilon, alpha)?;
            println!("R={} L={}", format_bits(point.rate), format_bits(point.leakage));
            if let Some(path) = emit {
                let (channel, source) = presets::projection_measurement(epsilon)?;
                let doc = emit_channel_spec(&ParsedChannel::Measurement {
                    channel,
                    source: Some(source),
                });
                write_atomic(&path, doc.as_bytes())?;
            }
        }
        other => {
            return Err(Error::Domain(format!(
                "unknown example `{other}` (expected projection | depolarizing | projection-meas)"
            )))
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Write through a temp file in the same directory, then rename.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let tmp = path.with_extension("tmp.partial");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
