//! `dmt` subcommands. Bad flags exit with 2, solver failures and failed
//! validation with 1.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use dmt_core::channel::CutForm;
use dmt_core::closed_form::{d_mimo_2x2, r_star};
use dmt_core::exponents::{equalized_cut, f_global, in_outage};
use dmt_core::optimize::{d_blind_numeric, d_global_numeric, d_local_numeric, InnerMode, OptimizerConfig};
use dmt_core::outage::{McConfig, ScheduleRule};
use dmt_core::slope::fit_slope;
use dmt_core::{ChannelExponents, NetworkParams, Strategy};

use crate::format::{curve_rows, round_sig, sig, write_curve_csv, write_mc_csv};
use crate::manifest::RunManifest;
use crate::parallel::{compute_curves, estimate_outage_par};
use crate::validate::{self, Options};
use crate::ToolError;

#[derive(Debug, Parser)]
#[command(name = "dmt", version, about = "Diversity-multiplexing tradeoff of a half-duplex relay channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tradeoff curves d(r) as CSV.
    Curve(CurveArgs),
    /// Optimal schedule and exponent at one rate, as one JSON line.
    Schedule(ScheduleArgs),
    /// Monte Carlo outage sweep as CSV with a slope trailer.
    Montecarlo(McArgs),
    /// Runs the self-check suite.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(name = "exact_lp")]
    ExactLp,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutFormArg {
    Exact,
    Max,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Inner minimisation over the outage region.
    #[arg(long, value_enum, default_value = "exact_lp")]
    pub mode: ModeArg,
    #[arg(long = "f-step", default_value_t = 1e-3, value_parser = unit_step)]
    pub f_step: f64,
    #[arg(long = "alpha-step", default_value_t = 0.01, value_parser = unit_step)]
    pub alpha_step: f64,
}

impl SolverArgs {
    fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            f_grid_step: self.f_step,
            alpha_grid_step: self.alpha_step,
            mode: match self.mode {
                ModeArg::ExactLp => InnerMode::ExactLp,
                ModeArg::Grid => InnerMode::Grid,
            },
            ..OptimizerConfig::default()
        }
    }

    fn record(&self, p: &mut BTreeMap<String, Value>) {
        let mode = match self.mode {
            ModeArg::ExactLp => "exact_lp",
            ModeArg::Grid => "grid",
        };
        p.insert("mode".into(), mode.into());
        p.insert("f_step".into(), self.f_step.into());
        p.insert("alpha_step".into(), self.alpha_step.into());
    }
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, required = true, value_parser = eta_value)]
    pub eta: Vec<f64>,
    #[arg(long, default_value = "global", value_parser = strategy_value)]
    pub strategy: Vec<Strategy>,
    #[arg(long = "r-step", default_value_t = 0.01, value_parser = positive)]
    pub r_step: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long, value_parser = eta_value)]
    pub eta: f64,
    #[arg(long, value_parser = rate)]
    pub r: f64,
    #[arg(long, value_parser = strategy_value)]
    pub strategy: Strategy,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    #[arg(long)]
    pub alphasr: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, value_parser = eta_value)]
    pub eta: f64,
    #[arg(long, value_parser = rate)]
    pub r: f64,
    /// fixed:<f> | global | local | blind | blind:<f>
    #[arg(long, value_parser = rule_value)]
    pub rule: ScheduleRule,
    /// start:stop:step in dB, stop included when it lands on the grid.
    #[arg(long = "snr-db", value_parser = snr_range)]
    pub snr_db: SnrRange,
    #[arg(long, value_parser = at_least_one)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = workers_value)]
    pub workers: usize,
    #[arg(long = "cut-form", value_enum, default_value = "exact")]
    pub cut_form: CutFormArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Skip the Lemma 1 tail slopes and use smaller sample counts.
    #[arg(long)]
    pub fast: bool,
    #[arg(long, value_parser = workers_value)]
    pub workers: Option<usize>,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrRange {
    pub spec: String,
    pub values: Vec<f64>,
}

/// Parses `start:stop:step`; a bare number is a single point.
pub fn parse_snr_range(s: &str) -> Result<SnrRange, String> {
    let nums: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("`{p}` is not a number")))
        .collect::<Result<_, _>>()?;
    if nums.iter().any(|x| !x.is_finite()) {
        return Err("values must be finite".into());
    }
    let values = match nums[..] {
        [x] => vec![x],
        [start, stop, step] => {
            if !(step > 0.0) {
                return Err("step must be positive".into());
            }
            if stop < start {
                return Err("stop must not be below start".into());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=n).map(|k| start + k as f64 * step).collect()
        }
        _ => return Err("expected start:stop:step".into()),
    };
    Ok(SnrRange {
        spec: s.to_string(),
        values,
    })
}

fn snr_range(s: &str) -> Result<SnrRange, String> {
    parse_snr_range(s)
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err("value must be finite".into())
    }
}

fn eta_value(s: &str) -> Result<f64, String> {
    let x = number(s)?;
    if x >= 1.0 {
        Ok(x)
    } else {
        Err("eta must be >= 1".into())
    }
}

fn rate(s: &str) -> Result<f64, String> {
    let x = number(s)?;
    if (0.0..=2.0).contains(&x) {
        Ok(x)
    } else {
        Err("r must lie in [0, 2]".into())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let x = number(s)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err("must be positive".into())
    }
}

fn unit_step(s: &str) -> Result<f64, String> {
    let x = number(s)?;
    if x > 0.0 && x <= 1.0 {
        Ok(x)
    } else {
        Err("step must lie in (0, 1]".into())
    }
}

fn at_least_one(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(n) if n >= 1 => Ok(n),
        Ok(_) => Err("must be at least 1".into()),
        Err(_) => Err(format!("`{s}` is not a positive integer")),
    }
}

fn workers_value(s: &str) -> Result<usize, String> {
    at_least_one(s).map(|n| n as usize)
}

fn strategy_value(s: &str) -> Result<Strategy, String> {
    s.parse()
        .map_err(|_| "expected global, local, blind or mimo2x2".to_string())
}

fn rule_value(s: &str) -> Result<ScheduleRule, String> {
    let fraction = |v: &str| {
        let f = number(v)?;
        if (0.0..=1.0).contains(&f) {
            Ok(f)
        } else {
            Err("schedule fraction must lie in [0, 1]".to_string())
        }
    };
    match s.split_once(':') {
        None if s == "global" => Ok(ScheduleRule::Global),
        None if s == "local" => Ok(ScheduleRule::Local),
        None if s == "blind" => Ok(ScheduleRule::Blind(None)),
        Some(("fixed", f)) => Ok(ScheduleRule::Fixed(fraction(f)?)),
        Some(("blind", f)) => Ok(ScheduleRule::Blind(Some(fraction(f)?))),
        _ => Err("expected fixed:<f>, global, local, blind or blind:<f>".into()),
    }
}

fn rule_name(rule: ScheduleRule) -> String {
    match rule {
        ScheduleRule::Fixed(f) => format!("fixed:{}", sig(f)),
        ScheduleRule::Global => "global".into(),
        ScheduleRule::Local => "local".into(),
        ScheduleRule::Blind(None) => "blind".into(),
        ScheduleRule::Blind(Some(f)) => format!("blind:{}", sig(f)),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return 2;
        }
    };
    let result = match cli.command {
        Command::Curve(a) => cmd_curve(&a),
        Command::Schedule(a) => cmd_schedule(&a),
        Command::Montecarlo(a) => cmd_montecarlo(&a),
        Command::Validate(a) => cmd_validate(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn emit(out: Option<&Path>, text: &str, manifest: RunManifest) -> Result<(), ToolError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| ToolError::io(path, e))?;
            manifest.write_beside(path)?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| ToolError::io(Path::new("<stdout>"), e))?;
        }
    }
    Ok(())
}

/// Core failures during a run are solver failures, whatever their kind.
fn solver(e: ToolError) -> ToolError {
    match e {
        ToolError::Core(c) => ToolError::Solver(c.to_string()),
        other => other,
    }
}

fn cmd_curve(a: &CurveArgs) -> Result<i32, ToolError> {
    let cfg = a.solver.config();
    let curves = compute_curves(&a.strategy, &a.eta, a.r_step, &cfg).map_err(solver)?;
    let text = write_curve_csv(&curve_rows(&curves));

    let mut p = BTreeMap::new();
    p.insert("eta".into(), Value::from(a.eta.clone()));
    p.insert(
        "strategy".into(),
        Value::from(a.strategy.iter().map(|s| s.as_str()).collect::<Vec<_>>()),
    );
    p.insert("r_step".into(), a.r_step.into());
    a.solver.record(&mut p);
    emit(a.out.as_deref(), &text, RunManifest::new("curve", p, None))?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct ScheduleOutput {
    strategy: &'static str,
    eta: f64,
    r: f64,
    f_opt: Option<f64>,
    d_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    equalized_cut: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    in_outage: Option<bool>,
}

fn realisation(a: &ScheduleArgs, params: &NetworkParams) -> Result<Option<ChannelExponents>, ToolError> {
    let given = [a.alpha1, a.alpha2, a.alphasr];
    if given.iter().all(Option::is_none) {
        return Ok(None);
    }
    if a.strategy != Strategy::Global {
        return Err(ToolError::Usage(
            "--alpha1/--alpha2/--alphasr: only meaningful with --strategy global".into(),
        ));
    }
    let [Some(a1), Some(a2), Some(asr)] = given else {
        return Err(ToolError::Usage(
            "--alpha1, --alpha2 and --alphasr must be given together".into(),
        ));
    };
    for (flag, v, hi) in [("--alpha1", a1, 1.0), ("--alpha2", a2, 1.0), ("--alphasr", asr, params.eta())] {
        if !(0.0..=hi).contains(&v) {
            return Err(ToolError::Usage(format!(
                "{flag}: {v} is outside its support [0, {}]",
                sig(hi)
            )));
        }
    }
    Ok(Some(ChannelExponents::new(a1, a2, asr, params)?))
}

fn cmd_schedule(a: &ScheduleArgs) -> Result<i32, ToolError> {
    let params = NetworkParams::new(a.eta)?;
    let cfg = a.solver.config();
    let alpha = realisation(a, &params)?;
    let (f_opt, d_value) = match a.strategy {
        Strategy::Global => {
            let d = if a.r < r_star(&params) {
                Some(d_global_numeric(a.r, &params, &cfg).map_err(|e| solver(e.into()))?)
            } else {
                None
            };
            let f = match alpha {
                Some(x) => Some(f_global(&x).f()),
                None => d.map(|res| res.f_opt),
            };
            (f, d.map_or(0.0, |res| res.d_value))
        }
        Strategy::Blind => {
            let res = d_blind_numeric(a.r, &params, &cfg).map_err(|e| solver(e.into()))?;
            (Some(res.f_opt), res.d_value)
        }
        Strategy::Local => {
            let res = d_local_numeric(a.r, &params, &cfg).map_err(|e| solver(e.into()))?;
            (Some(res.f_opt), res.d_value)
        }
        Strategy::Mimo2x2 => (None, d_mimo_2x2(a.r)?),
    };
    let out = ScheduleOutput {
        strategy: a.strategy.as_str(),
        eta: round_sig(a.eta),
        r: round_sig(a.r),
        f_opt: f_opt.map(round_sig),
        d_value: round_sig(d_value),
        equalized_cut: alpha.map(|x| round_sig(equalized_cut(&x))),
        in_outage: alpha.map(|x| in_outage(&x, f_global(&x), a.r)),
    };
    let line = serde_json::to_string(&out).map_err(|e| ToolError::Solver(e.to_string()))?;
    println!("{line}");
    Ok(0)
}

fn cmd_montecarlo(a: &McArgs) -> Result<i32, ToolError> {
    if a.rule == ScheduleRule::Local && a.snr_db.values[0] <= 0.0 {
        return Err(ToolError::Usage(
            "--snr-db: the local rule needs every SNR above 0 dB".into(),
        ));
    }
    let cfg = McConfig {
        eta: a.eta,
        r: a.r,
        rule: a.rule,
        snr_db: a.snr_db.values.clone(),
        samples_per_point: a.samples,
        seed: a.seed,
        workers: a.workers,
        cut_form: match a.cut_form {
            CutFormArg::Exact => CutForm::Exact,
            CutFormArg::Max => CutForm::MaxApprox,
        },
    };
    cfg.validate()?;
    let estimates = estimate_outage_par(&cfg, &a.solver.config()).map_err(solver)?;
    let usable = estimates.iter().filter(|e| e.n_outages > 0).count();
    let fit = if usable >= 3 {
        Some(fit_slope(&estimates).map_err(|e| solver(e.into()))?)
    } else {
        eprintln!(
            "warning: only {usable} SNR points saw an outage; slope trailer omitted"
        );
        None
    };
    let text = write_mc_csv(&estimates, fit.as_ref());

    let mut p = BTreeMap::new();
    p.insert("eta".into(), a.eta.into());
    p.insert("r".into(), a.r.into());
    p.insert("rule".into(), rule_name(a.rule).into());
    p.insert("snr_db".into(), a.snr_db.spec.clone().into());
    p.insert("samples".into(), a.samples.into());
    p.insert("workers".into(), a.workers.into());
    let form = match a.cut_form {
        CutFormArg::Exact => "exact",
        CutFormArg::Max => "max",
    };
    p.insert("cut_form".into(), form.into());
    a.solver.record(&mut p);
    emit(a.out.as_deref(), &text, RunManifest::new("montecarlo", p, Some(a.seed)))?;
    Ok(0)
}

fn cmd_validate(a: &ValidateArgs) -> Result<i32, ToolError> {
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let checks = validate::run(&Options {
        fast: a.fast,
        workers,
        seed: a.seed,
    });
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{c}");
    }
    println!("{} checks, {failed} failed", checks.len());
    Ok(if failed == 0 { 0 } else { 1 })
}
