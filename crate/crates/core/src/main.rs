use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Parser, Subcommand};

use copo::harness::{cmd_asymmetry, cmd_evaluate, cmd_train, cmd_verify, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "copo", version, about = "Cost-oriented prediction for day-ahead unit commitment")]
struct Cli {
    /// TOML run configuration; `COPO_*` variables override its keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train predictors on the days before a target day.
    Train {
        /// Target day (YYYY-MM-DD); defaults to `start`.
        #[arg(long)]
        target: Option<NaiveDate>,
    },
    /// Weekly rolling evaluation of the configured methods.
    Evaluate,
    /// Run the oracle checks; exits with status 2 if any fails.
    Verify {
        /// Big-M for the KKT-equivalence suite.
        #[arg(long)]
        big_m: Option<f64>,
    },
    /// Loss under over- and under-prediction of RES on one day.
    Asymmetry,
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    if let Some(o) = cli.out {
        cfg.out = o;
    }
    cfg.validate()?;
    match cli.command {
        Command::Train { target } => {
            let t = cmd_train(&cfg, target)?;
            println!(
                "trained for {} on |S| = {} days; status {:?}, UB {:.4}, gap {:.4}%",
                t.target,
                t.days.len(),
                t.state.status,
                t.state.ub,
                100.0 * t.state.gap()
            );
            println!("predictor: {}\nlog: {}", t.predictor_path.display(), t.log_path.display());
        }
        Command::Evaluate => {
            let o = cmd_evaluate(&cfg)?;
            for m in &o.summary.methods {
                let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
                println!("{:<10} days {:>3}  avg cost {:>14.2}  EI% {:>8}  VoI {:>8}", m.method.to_string(), m.days, m.average_cost, show(m.ei), show(m.voi));
            }
            for f in &o.summary.flagged_ppo_days {
                println!("flagged: {} P-PO exceeds O-PO by {:.2}", f.day, f.excess);
            }
            for f in &o.summary.failures {
                println!("failed: {} {}: {}", f.day, f.method, f.error);
            }
            println!("records: {}\nsummary: {}", o.csv_path.display(), o.summary_path.display());
        }
        Command::Verify { big_m } => {
            if let Some(m) = big_m {
                cfg.verify.big_m = m;
            }
            let r = cmd_verify(&cfg, true)?;
            for p in &r.enumeration {
                println!("enum  {:<12} {} rel diff {:.2e} ({} patterns)", p.name, verdict(p.agrees), p.relative_difference, p.patterns);
            }
            println!("kkt   big-M {:e}: {}/{} agree", r.kkt.big_m, r.kkt.passed, r.kkt.checked);
            for f in &r.kkt.failures {
                println!("kkt   FAIL {}: direct {:.6} embedded {:?} binding {}", f.name, f.check.direct, f.check.embedded, f.check.binding_big_m);
            }
            for b in &r.bounds {
                println!("bound {:<12} {} {} iterations, gap {:.2e}, {:?}", b.fixture, verdict(b.ok()), b.iterations, b.final_gap, b.status);
            }
            println!("verify: {}", verdict(r.passed));
            if !r.passed {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Asymmetry => {
            let t = cmd_asymmetry(&cfg)?;
            println!("perfect cost {:.2}", t.perfect_cost);
            for p in &t.points {
                println!("error {:>+6.2}  cost {:>12.2}  loss {:>8.3}%", p.error, p.actual_cost, p.loss);
            }
            println!("over slope {:.4}, under slope {:.4}", t.over.slope, t.under.slope);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
