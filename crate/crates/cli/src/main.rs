use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use padic_sea::ensembles::{run_chain, sample_ensemble, EnsembleKind, EnsembleSpec};
use padic_sea::generator::build_q;
use padic_sea::harness::stats::{compare_pmf, histogram, Pmf};
use padic_sea::harness::{run_bulk_convergence, run_edge_convergence, ExperimentConfig, ExperimentReport};
use padic_sea::padic::{smith_sn, CappedSn, MatModPd};
use padic_sea::qcalc::{
    c_n, coker_single_box_prob, corank_pmf_corner, corank_pmf_iid, lowest_positive_pmf, single_box_bounds,
    stay_prob, two_jump_bound, CnMode, Cutoff, Q,
};
use padic_sea::rng::RngHandle;
use padic_sea::sea::{
    approx_2inf, simulate_edge, simulate_finite, simulate_truncated, ClockStreams, Replayed, TruncState,
    DEFAULT_EVENT_BUDGET,
};
use padic_sea::signatures::{Signature, WindowSignature};

#[derive(Parser)]
#[command(name = "psea", version, about = "p-adic matrix products and the reflecting Poisson sea")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Singular numbers of a matrix mod p^d.
    Snf {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        d: u32,
        /// Rows as JSON, e.g. [[2,0],[0,4]].
        #[arg(long)]
        matrix: String,
    },
    /// Closed-form quantities.
    Formulas {
        #[command(subcommand)]
        which: Formula,
    },
    /// Draw matrices from an ensemble.
    Sample {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Simulate the walkers.
    Sea(SeaArgs),
    /// Singular numbers of the matrix product chain.
    Chain {
        #[command(flatten)]
        ens: EnsembleArgs,
        /// Initial singular numbers, JSON array.
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        steps: usize,
        /// Comma-separated steps to record (default: the last).
        #[arg(long, value_delimiter = ',')]
        record: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Transient probability from the exact generator.
    GenProb {
        #[arg(long)]
        d: i64,
        /// Rational t, e.g. 1/2.
        #[arg(long)]
        t: String,
        /// Index of the last walker, or "inf".
        #[arg(long = "N")]
        n: String,
        /// Window signature JSON of the start (and lower end of the interval).
        #[arg(long)]
        from: String,
        /// Window signature JSON of the target (and upper end).
        #[arg(long)]
        to: String,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = 1e-12)]
        eps: f64,
    },
    /// Matrix chain versus bulk sea.
    BulkConverge(ConvergeArgs),
    /// Matrix chain versus edge sea.
    EdgeConverge(ConvergeArgs),
    /// Compare two pmf files ({"key": prob, ...}).
    Compare {
        #[arg(long)]
        empirical: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        /// Samples behind the empirical pmf.
        #[arg(long)]
        n: u64,
        /// Samples behind the reference, if it is itself empirical.
        #[arg(long)]
        m: Option<u64>,
    },
}

#[derive(Subcommand)]
enum Formula {
    /// Time-scaling constant c_N.
    Cn {
        #[command(flatten)]
        ens: EnsembleArgs,
        #[arg(long = "r")]
        r: u64,
        #[arg(long, value_enum, default_value_t = CnArg::Indicator)]
        mode: CnArg,
    },
    /// Law of the corank of A mod p.
    Corank {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        q: u64,
        /// Corner ensemble with this many extra dimensions.
        #[arg(long = "D")]
        extra: Option<u64>,
    },
    /// Pmf of the lowest positive path index, flat zero start.
    LowestPmf {
        #[arg(long)]
        t: f64,
        #[arg(long = "T")]
        horizon: f64,
        #[arg(long, default_value_t = -8, allow_negative_numbers = true)]
        from: i64,
        #[arg(long, default_value_t = 6, allow_negative_numbers = true)]
        to: i64,
    },
    /// Probability that no box is added at or after r.
    Stay(LemmaArgs),
    /// Bounds on adding exactly one box at or after r.
    SingleBox {
        #[command(flatten)]
        l: LemmaArgs,
        #[arg(long)]
        m: u64,
    },
    /// Bound on adding two or more boxes at or after r.
    TwoJump(LemmaArgs),
    /// Probability that a single box appears in the cokernel.
    Coker {
        #[arg(long = "N")]
        big_n: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        t: String,
    },
}

#[derive(Args)]
struct LemmaArgs {
    #[arg(long)]
    r: u64,
    #[arg(long = "N")]
    n: u64,
    #[arg(long)]
    len: u64,
    #[arg(long)]
    t: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum CnArg {
    Indicator,
    Full,
    Asymptotic,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum KindArg {
    IidHaar,
    Corner,
    FixedSn,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Full ensemble spec as JSON; overrides the other ensemble flags.
    #[arg(long)]
    ensemble: Option<String>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long = "D")]
    extra: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    lambda: Option<Vec<u32>>,
}

impl EnsembleArgs {
    fn spec(&self) -> Result<EnsembleSpec> {
        if let Some(j) = &self.ensemble {
            return Ok(serde_json::from_str(j)?);
        }
        let p = self.p.ok_or_else(|| anyhow!("--p is required"))?;
        let d = self.d.ok_or_else(|| anyhow!("--d is required"))?;
        let kind = match self.kind.ok_or_else(|| anyhow!("--kind is required"))? {
            KindArg::IidHaar => EnsembleKind::IidHaar,
            KindArg::Corner => EnsembleKind::Corner { extra: self.extra.ok_or_else(|| anyhow!("--D is required"))? },
            KindArg::FixedSn => EnsembleKind::FixedSn { lambda: self.lambda.clone().ok_or_else(|| anyhow!("--lambda is required"))? },
        };
        let n = match (&kind, self.n) {
            (_, Some(n)) => n,
            (EnsembleKind::FixedSn { lambda }, None) => lambda.len(),
            _ => bail!("--N is required"),
        };
        let spec = EnsembleSpec { kind, n, p, d };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SeaMode {
    Finite,
    Trunc,
    Approx2inf,
    Edge,
}

#[derive(Args)]
struct SeaArgs {
    #[arg(long, value_enum)]
    mode: SeaMode,
    #[arg(long)]
    t: f64,
    #[arg(long = "T")]
    horizon: f64,
    /// Cap (ignored by finite mode).
    #[arg(long, default_value_t = 1)]
    d: i64,
    #[arg(long, default_value_t = 10)]
    depth: u32,
    /// JSON: an integer array (finite, edge) or a window signature (trunc, approx2inf).
    #[arg(long)]
    init: String,
    #[arg(long, default_value_t = 1)]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergeArgs {
    /// Experiment config JSON file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    ens: EnsembleArgs,
    #[arg(long = "r")]
    r_n: Option<u64>,
    #[arg(long = "T", value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    init: Option<Vec<u32>>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    seed: u64,
    /// Report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConvergeArgs {
    fn config(&self, name: &str) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
                serde_json::from_reader(f)?
            }
            None => ExperimentConfig {
                experiment: name.into(),
                ensemble: self.ens.spec()?,
                r_n: 1,
                times: vec![1.0],
                samples: 1000,
                init: None,
                window: (-2, 2),
                depth: 10,
                reference_samples: None,
                seed: self.seed,
            },
        };
        if self.config.is_some() && (self.ens.ensemble.is_some() || self.ens.kind.is_some()) {
            cfg.ensemble = self.ens.spec()?;
        }
        if let Some(r) = self.r_n {
            cfg.r_n = r;
        }
        if let Some(t) = &self.times {
            cfg.times = t.clone();
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(i) = &self.init {
            cfg.init = Some(i.clone());
        }
        if let Some(d) = self.depth {
            cfg.depth = d;
        }
        cfg.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_q(s: &str) -> Result<Q> {
    s.trim().parse::<Q>().map_err(|e| anyhow!("rational {s:?}: {e}"))
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn emit(line: &str) -> Result<()> {
    writeln!(io::stdout().lock(), "{line}")?;
    Ok(())
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)?;
    Ok(())
}

fn run_sea(a: &SeaArgs) -> Result<()> {
    let mut w = output(&a.out)?;
    let single = a.samples == 1;
    let mut finals: Vec<String> = Vec::new();
    for k in 0..a.samples {
        let clocks = ClockStreams::new(a.seed, k, a.t);
        let mut rng = RngHandle::new(a.seed, k).rng();
        let traj = match a.mode {
            SeaMode::Finite => {
                let v: Vec<i64> = serde_json::from_str(&a.init)?;
                Some(simulate_finite(&Signature::from_ints(&v)?, a.horizon, &clocks)?)
            }
            SeaMode::Edge => {
                let v: Vec<i64> = serde_json::from_str(&a.init)?;
                Some(simulate_edge(&Signature::from_ints(&v)?, a.d, a.t, a.horizon, &mut rng)?)
            }
            SeaMode::Trunc => {
                let mu: WindowSignature = serde_json::from_str(&a.init)?;
                Some(simulate_truncated(&TruncState::from_window(&mu, a.d)?, a.t, a.horizon, &mut rng)?)
            }
            SeaMode::Approx2inf => {
                let mu: WindowSignature = serde_json::from_str(&a.init)?;
                let s = approx_2inf(&mu, a.d, a.depth, &[a.horizon], &clocks, DEFAULT_EVENT_BUDGET)?;
                finals.push(serde_json::to_string(&s[0].to_window())?);
                None
            }
        };
        if let Some(traj) = traj {
            if single {
                traj.write_csv(&mut w)?;
                return Ok(w.flush()?);
            }
            let end = match traj.state_at(a.horizon)? {
                Replayed::Finite(v) => serde_json::to_string(&v)?,
                Replayed::Truncated(s) => serde_json::to_string(&s.to_window())?,
            };
            finals.push(end);
        }
    }
    writeln!(w, "state,count")?;
    for (state, count) in histogram(finals) {
        writeln!(w, "\"{}\",{count}", state.replace('"', "\"\""))?;
    }
    Ok(w.flush()?)
}

fn write_report(report: &ExperimentReport, out: &Option<PathBuf>) -> Result<ExitCode> {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, report)?;
    writeln!(w)?;
    w.flush()?;
    for warn in &report.warnings {
        eprintln!("warning: {warn}");
    }
    eprintln!("max single-time TV {:.4}", report.max_single_tv());
    if let Some(j) = &report.joint {
        eprintln!("joint TV {:.4}", j.total_variation);
    }
    Ok(if report.warnings.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Snf { p, d, matrix } => {
            let rows: Vec<Vec<u64>> = serde_json::from_str(&matrix)?;
            let m = MatModPd::from_rows(p, d, &rows)?;
            print_json(&json!({ "p": p, "d": d, "sn": smith_sn(&m).parts }))?;
        }
        Cmd::Formulas { which } => match which {
            Formula::Cn { ens, r, mode } => {
                let mode = match mode {
                    CnArg::Indicator => CnMode::Exact(Cutoff::Indicator),
                    CnArg::Full => CnMode::Exact(Cutoff::Full),
                    CnArg::Asymptotic => CnMode::Asymptotic,
                };
                let v = c_n(&ens.spec()?, r, mode)?;
                print_json(&json!({ "c_n": v.value, "exact": v.exact.map(|q| q.to_string()) }))?;
            }
            Formula::Corank { n, q, extra } => {
                let pmf = match extra {
                    Some(e) => corank_pmf_corner(n, e, q),
                    None => corank_pmf_iid(n, q),
                };
                print_json(&json!(pmf.iter().map(|x| x.to_string()).collect::<Vec<_>>()))?;
            }
            Formula::LowestPmf { t, horizon, from, to } => {
                let rows = (from..=to)
                    .map(|n| lowest_positive_pmf(n, t, horizon).map(|v| json!({ "n": n, "p": v.value, "terms": v.terms })))
                    .collect::<padic_sea::Result<Vec<_>>>()?;
                print_json(&json!(rows))?;
            }
            Formula::Stay(l) => {
                let v = stay_prob(l.r, l.n, l.len, &parse_q(&l.t)?)?;
                print_json(&json!({ "prob": v.to_string() }))?;
            }
            Formula::SingleBox { l, m } => {
                let b = single_box_bounds(l.r, l.n, m, l.len, &parse_q(&l.t)?)?;
                print_json(&json!({ "lower": b.lower.to_string(), "upper": b.upper.to_string() }))?;
            }
            Formula::TwoJump(l) => {
                let v = two_jump_bound(l.r, l.n, l.len, &parse_q(&l.t)?)?;
                print_json(&json!({ "bound": v.to_string() }))?;
            }
            Formula::Coker { big_n, n, m, t } => {
                let v = coker_single_box_prob(big_n, n, m, &parse_q(&t)?)?;
                print_json(&json!({ "prob": v.to_string() }))?;
            }
        },
        Cmd::Sample { ens, samples, seed } => {
            let spec = ens.spec()?;
            for k in 0..samples {
                let a = sample_ensemble(&spec, &mut RngHandle::new(seed, k).rng())?;
                emit(&json!({ "sample": k, "matrix": a, "sn": smith_sn(&a).parts }).to_string())?;
            }
        }
        Cmd::Sea(a) => run_sea(&a)?,
        Cmd::Chain { ens, init, steps, record, samples, seed } => {
            let spec = ens.spec()?;
            let mut parts: Vec<u32> = match init {
                Some(j) => serde_json::from_str(&j)?,
                None => Vec::new(),
            };
            parts.resize(spec.n, 0);
            let start = CappedSn::new(spec.d, parts.into_iter().map(|x| x.min(spec.d)).collect())?;
            let record = record.unwrap_or_else(|| vec![steps]);
            for k in 0..samples {
                let states = run_chain(&start, &spec, steps, &record, &mut RngHandle::new(seed, k).rng())?;
                let sn: Vec<_> = states.iter().map(|s| &s.parts).collect();
                emit(&json!({ "sample": k, "steps": record, "sn": sn }).to_string())?;
            }
        }
        Cmd::GenProb { d, t, n, from, to, horizon, eps } => {
            let last = match n.trim() {
                "inf" => None,
                x => Some(x.parse::<i64>().context("--N must be an integer or inf")?),
            };
            let nu: WindowSignature = serde_json::from_str(&from)?;
            let kappa: WindowSignature = serde_json::from_str(&to)?;
            let g = build_q(&nu, &kappa, d, &parse_q(&t)?, last)?;
            let i = g.state_id(&nu).ok_or_else(|| anyhow!("start state not in interval"))?;
            let j = g.state_id(&kappa).ok_or_else(|| anyhow!("target state not in interval"))?;
            let v = g.transient_prob(horizon, i, j, eps)?;
            print_json(&json!({ "prob": v.prob, "terms": v.terms, "states": g.len() }))?;
        }
        Cmd::BulkConverge(a) => {
            let started = Instant::now();
            let report = run_bulk_convergence(&a.config("bulk")?)?;
            eprintln!("wall clock {:.2}s", started.elapsed().as_secs_f64());
            return write_report(&report, &a.out);
        }
        Cmd::EdgeConverge(a) => {
            let started = Instant::now();
            let report = run_edge_convergence(&a.config("edge")?)?;
            eprintln!("wall clock {:.2}s", started.elapsed().as_secs_f64());
            return write_report(&report, &a.out);
        }
        Cmd::Compare { empirical, reference, n, m } => {
            let read = |p: &PathBuf| -> Result<Pmf<String>> { Ok(serde_json::from_reader(File::open(p)?)?) };
            let report = compare_pmf(&read(&empirical)?, &read(&reference)?, n, m)?;
            print_json(&serde_json::to_value(&report)?)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) if e.downcast_ref::<io::Error>().is_some_and(|x| x.kind() == io::ErrorKind::BrokenPipe) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

