//! `hubsim`: batch studies of the offshore wind power hub.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use hubsim_core::config::{parse_config, serialize_config, ConfigError, RunConfig};
use hubsim_core::devices::Fidelity;
use hubsim_core::report::{
    figure3, figure4, metric_csv, metric_text, mismatch_csv, mismatch_text, techno_report, write_table, write_text,
    write_trace,
};
use hubsim_core::scenario::{compute_metrics, mismatch, run_mode, run_scenario, ModeSelection, ScenarioConfig, ScenarioError};
use hubsim_core::sim::{linearize, SimSystem};
use hubsim_core::techno::{crossover, tco_sweep, tco_with, GridOption, GridFrequency, CollectionVoltage};

#[derive(Parser)]
#[command(name = "hubsim", version, about = "Offshore wind power hub: cost of ownership and EMT/phasor dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Emt,
    Phasor,
}

impl From<Mode> for Fidelity {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Emt => Fidelity::Emt,
            Mode::Phasor => Fidelity::Phasor,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Cost of ownership of the four collection options.
    Tco {
        #[arg(long)]
        config: Option<PathBuf>,
        /// km; overrides [tco] distance
        #[arg(long)]
        distance: Option<f64>,
        /// MW; overrides [tco] wind_power
        #[arg(long)]
        power: Option<f64>,
        /// sweep 0..max_distance instead of a single distance
        #[arg(long)]
        sweep: bool,
        /// directory for report.md, figure3.csv and figure4.csv (with --sweep)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Initial operating point of the hub.
    Powerflow {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Runs the configured scenario in one fidelity.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Runs both fidelities and compares them.
    Compare {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Small-signal modes at the initial operating point.
    Linearize {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "phasor")]
        mode: Mode,
        /// list modes up to this |lambda|, rad/s
        #[arg(long, default_value_t = 200.0)]
        cutoff: f64,
    },
    /// Prints the default configuration.
    PrintDefaults,
}

/// Configuration problems the user has to fix; reported with exit code 2.
#[derive(Debug)]
struct Invalid(Vec<String>);

impl std::fmt::Display for Invalid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0.join("\n"))
    }
}

impl std::error::Error for Invalid {}

fn load(path: Option<&Path>) -> Result<RunConfig> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).map_err(|ConfigError { errors }| {
        anyhow::Error::new(Invalid(errors.into_iter().map(|e| format!("{}: {e}", path.display())).collect()))
    })
}

fn scenario_err(e: ScenarioError) -> anyhow::Error {
    match e {
        ScenarioError::Invalid(errs) => anyhow::Error::new(Invalid(errs)),
        e => anyhow::Error::new(e),
    }
}

fn invalid(msg: String) -> anyhow::Error {
    anyhow::Error::new(Invalid(vec![msg]))
}

fn stem(cfg: &ScenarioConfig, mode: Fidelity) -> String {
    format!("{}_{}_{}", cfg.scenario.id(), cfg.inertia().name(), mode.name())
}

fn tco(config: Option<&Path>, distance: Option<f64>, power: Option<f64>, sweep: bool, out: Option<&Path>) -> Result<()> {
    let mut cfg = load(config)?.tco;
    if let Some(d) = distance {
        if !(d >= 0.0) {
            return Err(invalid(format!("--distance must be >= 0, got {d}")));
        }
        cfg.distance_km = d;
    }
    if let Some(p) = power {
        if !(p > 0.0) {
            return Err(invalid(format!("--power must be > 0, got {p}")));
        }
        cfg.wind_power_mw = p;
    }
    if out.is_some() && !sweep {
        return Err(invalid("--out needs --sweep".into()));
    }
    let a = &cfg.assumptions;
    if !sweep {
        println!("{} MW over {} km (MEUR)", cfg.wind_power_mw, cfg.distance_km);
        println!("{:<14} {:>12} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}", "option", "transformers", "platform", "supply", "install", "losses", "finance", "total");
        for &(v, f) in &GridOption::ALL {
            let opt = GridOption { voltage: v, frequency: f, wind_power_mw: cfg.wind_power_mw, distance_km: cfg.distance_km };
            let c = tco_with(&opt, a)?;
            println!(
                "{:<14} {:>12.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2}",
                opt.label(),
                c.transformers,
                c.platform,
                c.cables_supply,
                c.cables_install,
                c.losses_20yr,
                c.financing,
                c.total
            );
        }
        return Ok(());
    }
    let s = tco_sweep(cfg.wind_power_mw, cfg.max_distance_km, cfg.step_km, a)?;
    let best = s.argmin();
    let mut start = 0;
    for k in 1..=best.len() {
        if k == best.len() || best[k] != best[start] {
            println!("{:>6.1} - {:>6.1} km: {} cheapest", s.distances_km[start], s.distances_km[k - 1], s.labels[best[start]]);
            start = k;
        }
    }
    let idx = |v, f| GridOption::ALL.iter().position(|o| *o == (v, f)).expect("option listed");
    let (a50, a16) = (idx(CollectionVoltage::Kv66, GridFrequency::Nominal), idx(CollectionVoltage::Kv66, GridFrequency::Low));
    match crossover(&s, a50, a16) {
        Some(d) => println!("66 kV crossover 50 Hz -> 16.67 Hz at {d:.1} km"),
        None => println!("66 kV: no crossover within {} km", cfg.max_distance_km),
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_text(&dir.join("report.md"), &techno_report(a, cfg.wind_power_mw, cfg.max_distance_km, cfg.step_km)?)?;
        let (h, rows) = figure3(1000.0, 5.0);
        write_table(&dir.join("figure3.csv"), &h, &rows)?;
        let (h, rows) = figure4(&s);
        write_table(&dir.join("figure4.csv"), &h, &rows)?;
        println!("wrote report.md, figure3.csv, figure4.csv to {}", dir.display());
    }
    Ok(())
}

fn powerflow(config: Option<&Path>) -> Result<()> {
    let cfg = load(config)?.scenario;
    cfg.validate().map_err(scenario_err)?;
    let (sys, x) = SimSystem::build(cfg.system.clone(), Fidelity::Phasor)?;
    let o = sys.observe(&x)?;
    let sb = cfg.system.base.s_base_mva;
    println!("{} inertia, base {} MVA", cfg.inertia().name(), sb);
    println!("{:<10} {:>9} {:>10}", "bus", "|V| pu", "angle deg");
    for (b, v) in sys.net.buses.iter().zip(&o.v) {
        println!("{:<10} {:>9.5} {:>10.4}", b.name, v.norm(), v.arg().to_degrees());
    }
    for (k, name) in sys.converter_names().iter().enumerate() {
        println!("{name}: P {:>8.2} MW  Q {:>8.2} Mvar (absorbed)", o.conv_p[k] * sb, o.conv_q[k] * sb);
    }
    for k in 0..o.sc_q.len() {
        println!("sc{}: P {:>8.2} MW  Q {:>8.2} Mvar (injected)", k + 1, o.sc_p[k] * sb, o.sc_q[k] * sb);
    }
    for (k, p) in o.wf_p.iter().enumerate() {
        println!("wf{}: P {:>8.2} MW", k + 1, p * sb);
    }
    println!("derivative norm {:.3e}", sys.derivative_norm(&x)?);
    Ok(())
}

fn simulate(config: Option<&Path>, mode: Fidelity, out: &Path) -> Result<()> {
    let rc = load(config)?;
    let cfg = rc.scenario;
    cfg.validate().map_err(scenario_err)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let run = run_mode(&cfg, mode).map_err(scenario_err)?;
    let name = stem(&cfg, mode);
    write_trace(&run.trace, &out.join(format!("{name}.csv")))?;
    let m = compute_metrics(&run.trace, cfg.t_event, rc.analysis.bands)?;
    let text = metric_text(&cfg.label(mode), &m);
    write_text(&out.join(format!("{name}.metrics.txt")), &text)?;
    let (h, rows) = metric_csv(&m);
    write_table(&out.join(format!("{name}.metrics.csv")), &h, &rows)?;
    print!("{text}");
    eprintln!("{} steps, {} Newton iterations, {} Jacobians, {:.2} s", run.stats.steps, run.stats.solver.iterations, run.stats.solver.jacobians, run.stats.wall_s);
    Ok(())
}

fn compare(config: Option<&Path>, out: &Path) -> Result<()> {
    let rc = load(config)?;
    let mut cfg = rc.scenario;
    cfg.mode = ModeSelection::Both;
    cfg.validate().map_err(scenario_err)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let run = run_scenario(&cfg).map_err(scenario_err)?;
    let mut summary = String::new();
    for r in &run.runs {
        let name = stem(&cfg, r.mode);
        write_trace(&r.trace, &out.join(format!("{name}.csv")))?;
        let m = compute_metrics(&r.trace, cfg.t_event, rc.analysis.bands)?;
        summary.push_str(&metric_text(&cfg.label(r.mode), &m));
        eprintln!("{}: {} steps, {:.2} s", cfg.label(r.mode), r.stats.steps, r.stats.wall_s);
    }
    let (emt, ph) = (run.get(Fidelity::Emt).expect("emt run"), run.get(Fidelity::Phasor).expect("phasor run"));
    let mm = mismatch(&emt.trace, &ph.trace, rc.analysis.epsilon)?;
    summary.push_str(&mismatch_text(&mm));
    let base = format!("{}_{}", cfg.scenario.id(), cfg.inertia().name());
    mismatch_csv(&out.join(format!("{base}_mismatch.csv")), &mm)?;
    write_text(&out.join(format!("{base}_summary.txt")), &summary)?;
    print!("{summary}");
    Ok(())
}

fn linearize_cmd(config: Option<&Path>, mode: Fidelity, cutoff: f64) -> Result<()> {
    let cfg = load(config)?.scenario;
    cfg.validate().map_err(scenario_err)?;
    let (sys, x) = SimSystem::build(cfg.system.clone(), mode)?;
    let ss = linearize(&sys, &x)?;
    println!("{} inertia, {}: {} modes, max Re {:.4} 1/s, min damping {:.4}", cfg.inertia().name(), mode.name(), ss.modes.len(), ss.max_real(), ss.min_damping());
    println!("eigenvalue change on halving the perturbation: {:.2e}", ss.eps_sensitivity);
    if let Some(w) = &ss.warning {
        println!("warning: {w}");
    }
    println!("{:>12} {:>12} {:>10} {:>9}", "Re", "Im", "f Hz", "damping");
    for m in ss.slow(cutoff).iter().filter(|m| m.lambda.im >= 0.0) {
        println!("{:>12.4} {:>12.4} {:>10.3} {:>9.4}", m.lambda.re, m.lambda.im, m.freq_hz, m.damping);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Tco { config, distance, power, sweep, out } => tco(config.as_deref(), distance, power, sweep, out.as_deref()),
        Command::Powerflow { config } => powerflow(config.as_deref()),
        Command::Simulate { config, mode, out } => simulate(config.as_deref(), mode.into(), &out),
        Command::Compare { config, out } => compare(config.as_deref(), &out),
        Command::Linearize { config, mode, cutoff } => linearize_cmd(config.as_deref(), mode.into(), cutoff),
        Command::PrintDefaults => {
            print!("{}", serialize_config(&RunConfig::default()));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(Invalid(msgs)) = e.downcast_ref::<Invalid>() {
                for m in msgs {
                    eprintln!("error: {m}");
                }
                ExitCode::from(2)
            } else {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        }
    }
}
