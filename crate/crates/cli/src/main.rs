//! `palprender`: synthesize, fit, segment, plan, simulate and compare
//! palpation renderings from the command line.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use palprender_core::characterization::{
    fit_bubble_powerlaw, fit_platform_poly, load_model_file, load_samples, save_model_file,
    write_samples, ModelFile, SampleKind,
};
use palprender_core::config::Config;
use palprender_core::metrics::{
    augmentation_report, classify_lump_plans, classify_lump_traces, tracking_report, LumpChoice,
    LumpDecision,
};
use palprender_core::recording::{
    load_trial, resample_to_100hz, save_trial, synth_trial, SynthParams, TrialRecording,
    DEFAULT_PHANTOM_HEIGHT_MM,
};
use palprender_core::reference;
use palprender_core::rendering::{
    calibrate_estar, plan_hybrid_a, plan_hybrid_b, plan_platform_only, write_plan, DeviceModels,
    HybridBMode, RenderPlan, Strategy,
};
use palprender_core::segmentation::{segment_pokes, write_events, PokeEvent};
use palprender_core::simulator::{run_simulation, write_trace, SimConfig, SimTrace};

#[derive(Parser)]
#[command(
    name = "palprender",
    version,
    about = "Hybrid platform + bubble haptic rendering toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic palpation trial CSV.
    Synth {
        #[arg(long, default_value_t = 3)]
        pokes: usize,
        /// Stiffen the phantom with a lump.
        #[arg(long)]
        lump: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Nominal peak indentation depth, mm.
        #[arg(long, default_value_t = reference::DEPTH_PEAK)]
        depth: f64,
        /// Sampling rate, Hz.
        #[arg(long, default_value_t = 100.0)]
        rate: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Fit a platform (quadratic) or bubble (power-law) model to samples.
    Fit {
        kind: ModelKind,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Split a trial into pokes and write the events CSV.
    Segment {
        #[command(flatten)]
        trial: TrialArgs,
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute a per-tick render plan.
    Plan {
        #[arg(long)]
        strategy: StrategyArg,
        #[arg(long)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        trial: TrialArgs,
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run a plan through the closed-loop simulator and write the trace.
    Simulate {
        #[arg(long)]
        strategy: StrategyArg,
        #[arg(long)]
        mode: Option<ModeArg>,
        #[command(flatten)]
        trial: TrialArgs,
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Score strategies on a lump / no-lump trial pair and write a JSON report.
    Compare {
        #[arg(long, default_value = "all")]
        strategy: CompareArg,
        /// First trial.
        #[arg(short, long)]
        input: PathBuf,
        /// Second trial.
        #[arg(short = 'j', long)]
        second: PathBuf,
        #[arg(long, default_value_t = DEFAULT_PHANTOM_HEIGHT_MM)]
        phantom_height: f64,
        #[command(flatten)]
        setup: SetupArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Margins at or below this are undecidable, N.
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Least-squares E* from a trial's sustain-phase forces.
    CalibrateEstar {
        #[command(flatten)]
        trial: TrialArgs,
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Write a hertz model file here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the reference models, config and characterization samples.
    Reference {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

#[derive(clap::Args)]
struct TrialArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PHANTOM_HEIGHT_MM)]
    phantom_height: f64,
}

#[derive(clap::Args)]
struct SetupArgs {
    /// Directory with platform.txt, bubble.txt and optionally hertz.txt.
    /// Defaults to the reference models.
    #[arg(short, long)]
    models: Option<PathBuf>,
    /// Config file laid over the reference config.
    #[arg(short, long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Platform,
    Bubble,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    PlatformOnly,
    HybridA,
    HybridB,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::PlatformOnly => Strategy::PlatformOnly,
            StrategyArg::HybridA => Strategy::HybridA,
            StrategyArg::HybridB => Strategy::HybridB,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CompareArg {
    All,
    PlatformOnly,
    HybridA,
    HybridB,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Preloaded,
    Causal,
}

impl From<ModeArg> for HybridBMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Preloaded => HybridBMode::Preloaded,
            ModeArg::Causal => HybridBMode::Causal,
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Config::load(p, Config::reference())
            .with_context(|| format!("loading config {}", p.display())),
        None => Ok(Config::reference()),
    }
}

struct Setup {
    config: Config,
    models: DeviceModels,
}

fn load_setup(args: &SetupArgs) -> Result<Setup> {
    let mut config = load_config(args.config.as_deref())?;
    let Some(dir) = &args.models else {
        return Ok(Setup {
            config,
            models: reference::device_models(),
        });
    };
    let platform = match load_model_file(dir.join("platform.txt"))? {
        ModelFile::Platform { model, .. } => model,
        _ => bail!(
            "{}: expected model_type=platform_poly",
            dir.join("platform.txt").display()
        ),
    };
    let bubble = match load_model_file(dir.join("bubble.txt"))? {
        ModelFile::Bubble { model, .. } => model,
        _ => bail!(
            "{}: expected model_type=bubble_power",
            dir.join("bubble.txt").display()
        ),
    };
    let hertz = dir.join("hertz.txt");
    if hertz.exists() {
        match load_model_file(&hertz)? {
            ModelFile::Hertz(h) => config.hertz = h,
            _ => bail!("{}: expected model_type=hertz", hertz.display()),
        }
    }
    Ok(Setup {
        config,
        models: DeviceModels::new(platform, bubble)?,
    })
}

fn load_resampled(path: &Path, phantom_height: f64) -> Result<TrialRecording> {
    let trial = load_trial(path, phantom_height)
        .with_context(|| format!("loading trial {}", path.display()))?;
    Ok(resample_to_100hz(&trial)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn make_plan(
    strategy: Strategy,
    mode: HybridBMode,
    trial: &TrialRecording,
    setup: &Setup,
) -> Result<(RenderPlan, Vec<PokeEvent>)> {
    let c = &setup.config;
    let events = segment_pokes(trial, &c.segmentation)?;
    let plan = match strategy {
        Strategy::PlatformOnly => plan_platform_only(trial),
        Strategy::HybridA => plan_hybrid_a(trial, &setup.models, &c.hertz, &c.render)?,
        Strategy::HybridB => {
            plan_hybrid_b(trial, &setup.models, &c.hertz, &c.render, &events, mode)?
        }
    };
    Ok((plan, events))
}

fn choice_name(d: &LumpDecision) -> &'static str {
    match d.choice {
        LumpChoice::First => "first",
        LumpChoice::Second => "second",
        LumpChoice::Undecidable => "undecidable",
    }
}

fn compare(
    strategies: &[Strategy],
    first: &TrialRecording,
    second: &TrialRecording,
    setup: &Setup,
    seed: u64,
    threshold: f64,
) -> Result<Map<String, Value>> {
    let mut report = Map::new();
    let mode = setup.config.hybrid_b_mode;
    let off = SimConfig {
        bubble_enabled: false,
        ..setup.config.sim
    };
    for &s in strategies {
        let (pa, ea) = make_plan(s, mode, first, setup)?;
        let (pb, eb) = make_plan(s, mode, second, setup)?;
        let ta = run_simulation(&pa, &setup.models, &setup.config.sim, seed)?;
        let tb = run_simulation(&pb, &setup.models, &setup.config.sim, seed)?;
        let mut put = |key: String, v: Value| {
            report.insert(format!("{s}.{key}"), v);
        };
        for (label, trace) in [("first", &ta), ("second", &tb)] {
            let t = tracking_report(trace)?;
            put(format!("{label}.tracking_rmse"), json!(t.rmse));
            put(format!("{label}.tracking_r"), json!(t.pearson_r));
            put(format!("{label}.max_desired"), json!(t.max_desired));
            put(format!("{label}.max_rendered"), json!(t.max_rendered));
            put(format!("{label}.peak_total_n"), json!(peak_total(trace)));
        }
        let decision = if s.is_hybrid() {
            for (label, plan, trace) in [("first", &pa, &ta), ("second", &pb, &tb)] {
                let base = run_simulation(plan, &setup.models, &off, seed)?;
                let a = augmentation_report(trace, &base)?;
                put(format!("{label}.baseline_peak_n"), json!(a.baseline_peak));
                put(format!("{label}.augmented_peak_n"), json!(a.augmented_peak));
                put(
                    format!("{label}.bubble_contribution_n"),
                    json!(a.bubble_contribution),
                );
            }
            classify_lump_plans((&pa, &ea), (&pb, &eb), &setup.models.bubble, threshold)?
        } else {
            classify_lump_traces(&ta, &tb, threshold)?
        };
        put("lump_choice".into(), json!(choice_name(&decision)));
        put("lump_margin".into(), json!(decision.margin));
    }
    Ok(report)
}

fn peak_total(trace: &SimTrace) -> f64 {
    trace
        .rows
        .iter()
        .map(|r| r.total_n)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            pokes,
            lump,
            seed,
            depth,
            rate,
            output,
        } => {
            let trial = synth_trial(&SynthParams::new(lump, pokes, depth, rate, seed))?;
            save_trial(&trial, &output)?;
        }
        Command::Fit {
            kind,
            input,
            output,
        } => {
            let (found, samples) = load_samples(&input)?;
            let model = match (kind, found) {
                (ModelKind::Platform, SampleKind::Platform) => {
                    let fit = fit_platform_poly(&samples)?;
                    ModelFile::Platform {
                        model: fit.model,
                        r_squared: Some(fit.r_squared),
                    }
                }
                (ModelKind::Bubble, SampleKind::Bubble) => {
                    let fit = fit_bubble_powerlaw(&samples)?;
                    ModelFile::Bubble {
                        model: fit.model,
                        r_squared: Some(fit.r_squared),
                    }
                }
                (kind, found) => {
                    let want = match kind {
                        ModelKind::Platform => SampleKind::Platform,
                        ModelKind::Bubble => SampleKind::Bubble,
                    };
                    bail!(
                        "{} has header {}, expected {}",
                        input.display(),
                        found.header(),
                        want.header()
                    )
                }
            };
            save_model_file(&model, &output)?;
        }
        Command::Segment {
            trial,
            config,
            output,
        } => {
            let c = load_config(config.as_deref())?;
            let t = load_resampled(&trial.input, trial.phantom_height)?;
            let events = segment_pokes(&t, &c.segmentation)?;
            let mut w = create(&output)?;
            write_events(&t, &events, &mut w)?;
            w.flush()?;
        }
        Command::Plan {
            strategy,
            mode,
            trial,
            setup,
            output,
        } => {
            let setup = load_setup(&setup)?;
            let mode = mode.map_or(setup.config.hybrid_b_mode, Into::into);
            let t = load_resampled(&trial.input, trial.phantom_height)?;
            let (plan, _) = make_plan(strategy.into(), mode, &t, &setup)?;
            let mut w = create(&output)?;
            write_plan(&plan, &mut w)?;
        }
        Command::Simulate {
            strategy,
            mode,
            trial,
            setup,
            seed,
            output,
        } => {
            let setup = load_setup(&setup)?;
            let mode = mode.map_or(setup.config.hybrid_b_mode, Into::into);
            let t = load_resampled(&trial.input, trial.phantom_height)?;
            let (plan, _) = make_plan(strategy.into(), mode, &t, &setup)?;
            let trace = run_simulation(&plan, &setup.models, &setup.config.sim, seed)?;
            let mut w = create(&output)?;
            write_trace(&trace, &mut w)?;
        }
        Command::Compare {
            strategy,
            input,
            second,
            phantom_height,
            setup,
            seed,
            threshold,
            output,
        } => {
            let setup = load_setup(&setup)?;
            let strategies: Vec<Strategy> = match strategy {
                CompareArg::All => Strategy::ALL.to_vec(),
                CompareArg::PlatformOnly => vec![Strategy::PlatformOnly],
                CompareArg::HybridA => vec![Strategy::HybridA],
                CompareArg::HybridB => vec![Strategy::HybridB],
            };
            let a = load_resampled(&input, phantom_height)?;
            let b = load_resampled(&second, phantom_height)?;
            let report = compare(&strategies, &a, &b, &setup, seed, threshold)?;
            let mut w = create(&output)?;
            serde_json::to_writer_pretty(&mut w, &Value::Object(report))?;
            writeln!(w)?;
            w.flush()?;
        }
        Command::CalibrateEstar {
            trial,
            config,
            output,
        } => {
            let c = load_config(config.as_deref())?;
            let t = load_resampled(&trial.input, trial.phantom_height)?;
            let events = segment_pokes(&t, &c.segmentation)?;
            let (params, r2) = calibrate_estar(&t, &events, c.hertz.radius)?;
            println!(
                "e_star={:?} radius={:?} r_squared={r2:.6}",
                params.e_star, params.radius
            );
            if let Some(path) = output {
                save_model_file(&ModelFile::Hertz(params), path)?;
            }
        }
        Command::Reference { seed, output } => {
            let models = output.join("models");
            fs::create_dir_all(&models)
                .with_context(|| format!("creating {}", models.display()))?;
            save_model_file(
                &ModelFile::Platform {
                    model: reference::platform_model(),
                    r_squared: None,
                },
                models.join("platform.txt"),
            )?;
            save_model_file(
                &ModelFile::Bubble {
                    model: reference::bubble_model(),
                    r_squared: None,
                },
                models.join("bubble.txt"),
            )?;
            save_model_file(
                &ModelFile::Hertz(reference::hertz_params()),
                models.join("hertz.txt"),
            )?;
            fs::write(
                output.join("config.toml"),
                Config::reference().to_toml_string(),
            )?;
            for (kind, samples, name) in [
                (
                    SampleKind::Platform,
                    reference::platform_samples(seed),
                    "platform_samples.csv",
                ),
                (
                    SampleKind::Bubble,
                    reference::bubble_samples(seed),
                    "bubble_samples.csv",
                ),
            ] {
                let mut w = create(&output.join(name))?;
                write_samples(kind, &samples, &mut w)?;
            }
            save_trial(&reference::session()?, output.join("session.csv"))?;
            let (lump, clean) = reference::trial_pair(seed)?;
            save_trial(&lump, output.join("lump.csv"))?;
            save_trial(&clean, output.join("nolump.csv"))?;
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
