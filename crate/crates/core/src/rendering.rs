//! Rendering strategies: turn a trial into per-tick actuator targets.
//!
//! * Platform-Only: the platform replays the summed recorded force.
//! * Hybrid A: the platform follows the Hertz/inverse-map position; the
//!   bubble tracks the residual force every tick.
//! * Hybrid B: same platform path; the bubble holds one constant pressure
//!   per poke, derived from the sustain-phase mean residual.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::characterization::{
    eval_inverse, eval_platform, fit_inverse_map, invert_bubble, BubbleModel, Clamped,
    InversePlatformMap, PlatformModel,
};
use crate::recording::{indentation_depth, TrialRecording};
use crate::segmentation::PokeEvent;
use crate::textfmt::num;
use crate::{Error, Flags, Result};

/// Hertz contact parameters for the finger/tissue interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HertzParams {
    /// Effective modulus E*, N/mm².
    pub e_star: f64,
    /// Effective finger radius, mm.
    pub radius: f64,
}

impl HertzParams {
    pub fn new(e_star: f64) -> Self {
        HertzParams {
            e_star,
            radius: 7.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.e_star > 0.0 && self.radius > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "Hertz parameters must be positive, got E*={} R={}",
                self.e_star, self.radius
            )))
        }
    }
}

/// `(4/3)·E*·√R·d^1.5` for `d > 0`, else 0.
pub fn hertz_force(params: &HertzParams, d: f64) -> f64 {
    if d > 0.0 {
        4.0 / 3.0 * params.e_star * params.radius.sqrt() * d * d.sqrt()
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    PlatformOnly,
    HybridA,
    HybridB,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::PlatformOnly, Strategy::HybridA, Strategy::HybridB];

    pub fn is_hybrid(self) -> bool {
        !matches!(self, Strategy::PlatformOnly)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::PlatformOnly => "platform-only",
            Strategy::HybridA => "hybrid-a",
            Strategy::HybridB => "hybrid-b",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "platform-only" => Ok(Strategy::PlatformOnly),
            "hybrid-a" => Ok(Strategy::HybridA),
            "hybrid-b" => Ok(Strategy::HybridB),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy {other:?}"
            ))),
        }
    }
}

/// Where Hybrid B takes each poke's pressure level from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HybridBMode {
    /// The poke's own sustain mean: offline playback, pressure known before contact.
    Preloaded,
    /// The previous poke's sustain mean; the first poke gets 0 kPa.
    Causal,
}

impl FromStr for HybridBMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "preloaded" => Ok(HybridBMode::Preloaded),
            "causal" => Ok(HybridBMode::Causal),
            other => Err(Error::InvalidParameter(format!(
                "unknown Hybrid B mode {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    /// Disengaged platform position, mm (negative).
    pub x_retract: f64,
    /// Upper platform travel, mm.
    pub x_max: f64,
    /// Contact force that zeroes the platform coordinate at startup, N.
    pub contact_force_baseline: f64,
    /// Scale on the mapped platform position when the bubble is active, (0, 1].
    pub attenuation: f64,
    pub strategy: Strategy,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            x_retract: -6.0,
            x_max: 10.0,
            contact_force_baseline: 0.5,
            attenuation: 0.7,
            strategy: Strategy::HybridA,
        }
    }
}

impl RenderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_retract < 0.0) {
            return Err(Error::InvalidParameter("x_retract must be negative".into()));
        }
        if !(self.contact_force_baseline > 0.0) {
            return Err(Error::InvalidParameter(
                "contact_force_baseline must be positive".into(),
            ));
        }
        if !(self.attenuation > 0.0 && self.attenuation <= 1.0) {
            return Err(Error::InvalidParameter(
                "attenuation must be in (0, 1]".into(),
            ));
        }
        if !(self.x_max > 0.0) {
            return Err(Error::InvalidParameter("x_max must be positive".into()));
        }
        Ok(())
    }
}

/// Fitted device models bundled for planning and simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceModels {
    pub platform: PlatformModel,
    pub inverse: InversePlatformMap,
    pub bubble: BubbleModel,
}

impl DeviceModels {
    /// Bundle the forward models and fit the platform inverse map.
    pub fn new(platform: PlatformModel, bubble: BubbleModel) -> Result<Self> {
        Ok(DeviceModels {
            platform,
            inverse: fit_inverse_map(&platform)?,
            bubble,
        })
    }
}

/// Unattenuated platform position for depth `d`: `x_retract` when `d <= 0`,
/// otherwise the inverse map of the Hertz force, floored at contact (0 mm).
fn full_position(
    d: f64,
    inv: &InversePlatformMap,
    params: &HertzParams,
    cfg: &RenderConfig,
) -> Clamped {
    if d <= 0.0 {
        return Clamped {
            value: cfg.x_retract,
            clamped: false,
        };
    }
    let x = eval_inverse(inv, hertz_force(params, d));
    Clamped {
        value: x.value.max(0.0),
        clamped: x.clamped,
    }
}

/// Platform target for depth `d`: `x_retract` when `d <= 0`, otherwise the
/// attenuated inverse-map position of the Hertz force, clamped to
/// `[x_retract, x_max]`.
pub fn position_mapping(
    d: f64,
    inv: &InversePlatformMap,
    params: &HertzParams,
    cfg: &RenderConfig,
) -> Clamped {
    if d <= 0.0 {
        return Clamped {
            value: cfg.x_retract,
            clamped: false,
        };
    }
    let full = full_position(d, inv, params, cfg);
    let x = cfg.attenuation * full.value;
    let bounded = x.clamp(cfg.x_retract, cfg.x_max);
    Clamped {
        value: bounded,
        clamped: full.clamped || bounded != x,
    }
}

/// Recorded force not explained by the platform at `x_p`, floored at 0.
/// A retracted platform (`x_p <= 0`) contributes nothing.
pub fn residual_force(recorded_total: f64, platform: &PlatformModel, x_p: f64) -> f64 {
    let platform_force = eval_platform(platform, x_p.max(0.0)).value;
    (recorded_total - platform_force).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlatformTarget {
    /// Desired contact force, N.
    Force(f64),
    /// Desired platform position, mm.
    Position(f64),
}

impl PlatformTarget {
    pub fn value(self) -> f64 {
        match self {
            PlatformTarget::Force(v) | PlatformTarget::Position(v) => v,
        }
    }

    pub fn kind(self) -> &'static str {
        match self {
            PlatformTarget::Force(_) => "force_n",
            PlatformTarget::Position(_) => "position_mm",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BubbleTarget {
    /// Pressure command, kPa.
    Pressure(f64),
    /// Residual force to track, N.
    Residual(f64),
}

impl BubbleTarget {
    pub fn value(self) -> f64 {
        match self {
            BubbleTarget::Pressure(v) | BubbleTarget::Residual(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanTick {
    pub t: f64,
    pub platform: PlatformTarget,
    pub bubble: BubbleTarget,
    /// Residual force at this tick (after clamping to the bubble ceiling), N.
    /// Zero for Platform-Only.
    pub residual: f64,
    pub poke_id: Option<usize>,
    pub flags: Flags,
}

/// Constant pressure assigned to one poke by Hybrid B.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PokeLevel {
    pub poke_id: usize,
    /// Mean residual over the poke's own sustain span, N.
    pub sustain_mean_residual: Option<f64>,
    /// Pressure held over the contact span, kPa.
    pub pressure: f64,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderPlan {
    pub strategy: Strategy,
    pub ticks: Vec<PlanTick>,
    /// Hybrid B only.
    pub poke_levels: Vec<PokeLevel>,
}

impl RenderPlan {
    pub fn len(&self) -> usize {
        self.ticks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ticks.is_empty()
    }

    /// Tick spacing, s. `None` for plans shorter than two ticks.
    pub fn dt(&self) -> Option<f64> {
        (self.ticks.len() >= 2).then(|| self.ticks[1].t - self.ticks[0].t)
    }

    /// Same platform targets with every bubble command zeroed: the
    /// position-only baseline used for augmentation measurements.
    pub fn without_bubble(&self) -> RenderPlan {
        let ticks = self
            .ticks
            .iter()
            .map(|t| PlanTick {
                bubble: match t.bubble {
                    BubbleTarget::Pressure(_) => BubbleTarget::Pressure(0.0),
                    BubbleTarget::Residual(_) => BubbleTarget::Residual(0.0),
                },
                residual: 0.0,
                ..*t
            })
            .collect();
        RenderPlan {
            strategy: self.strategy,
            ticks,
            poke_levels: Vec::new(),
        }
    }
}

/// Replay the summed recorded force; the bubble stays at 0 kPa.
///
/// Poke ids mark runs of positive depth and only annotate the plan.
pub fn plan_platform_only(trial: &TrialRecording) -> RenderPlan {
    let ids = engaged_spans(&indentation_depth(trial));
    let ticks = trial
        .timestamps()
        .iter()
        .zip(trial.force_grid())
        .zip(ids)
        .map(|((t, g), poke_id)| PlanTick {
            t: *t,
            platform: PlatformTarget::Force(g.total()),
            bubble: BubbleTarget::Pressure(0.0),
            residual: 0.0,
            poke_id,
            flags: Flags::empty(),
        })
        .collect();
    RenderPlan {
        strategy: Strategy::PlatformOnly,
        ticks,
        poke_levels: Vec::new(),
    }
}

/// Per-tick platform target, residual and flags shared by both hybrids.
struct HybridTrack {
    position: Vec<f64>,
    residual: Vec<f64>,
    flags: Vec<Flags>,
}

fn hybrid_track(
    trial: &TrialRecording,
    models: &DeviceModels,
    params: &HertzParams,
    cfg: &RenderConfig,
) -> Result<HybridTrack> {
    params.validate()?;
    cfg.validate()?;
    let depth = indentation_depth(trial);
    let forces = trial.total_forces();
    let ceiling = models.bubble.max_force();
    let n = depth.len();
    let mut track = HybridTrack {
        position: Vec::with_capacity(n),
        residual: Vec::with_capacity(n),
        flags: Vec::with_capacity(n),
    };
    for (d, f) in depth.iter().zip(&forces) {
        let mut flags = Flags::empty();
        let target = position_mapping(*d, &models.inverse, params, cfg);
        if target.clamped {
            flags |= Flags::DOMAIN;
        }
        // Residual is taken against the full (unattenuated) platform motion:
        // attenuation is a perceptual split, not a change in what the platform
        // is meant to account for.
        let full = full_position(*d, &models.inverse, params, cfg);
        let mut r = residual_force(*f, &models.platform, full.value);
        if r > ceiling {
            r = ceiling;
            flags |= Flags::RESIDUAL;
        }
        track.position.push(target.value);
        track.residual.push(r);
        track.flags.push(flags);
    }
    Ok(track)
}

/// Contiguous runs of `d > 0`, numbered from 0.
fn engaged_spans(depth: &[f64]) -> Vec<Option<usize>> {
    let mut ids = Vec::with_capacity(depth.len());
    let mut next = 0;
    let mut prev_engaged = false;
    for d in depth {
        let engaged = *d > 0.0;
        if engaged && !prev_engaged {
            next += 1;
        }
        ids.push(engaged.then(|| next - 1));
        prev_engaged = engaged;
    }
    ids
}

/// Position-mapped platform plus a bubble that tracks the residual force.
pub fn plan_hybrid_a(
    trial: &TrialRecording,
    models: &DeviceModels,
    params: &HertzParams,
    cfg: &RenderConfig,
) -> Result<RenderPlan> {
    let track = hybrid_track(trial, models, params, cfg)?;
    let ids = engaged_spans(&indentation_depth(trial));
    let ticks = trial
        .timestamps()
        .iter()
        .enumerate()
        .map(|(i, t)| PlanTick {
            t: *t,
            platform: PlatformTarget::Position(track.position[i]),
            bubble: BubbleTarget::Residual(track.residual[i]),
            residual: track.residual[i],
            poke_id: ids[i],
            flags: track.flags[i],
        })
        .collect();
    Ok(RenderPlan {
        strategy: Strategy::HybridA,
        ticks,
        poke_levels: Vec::new(),
    })
}

/// Position-mapped platform plus one constant bubble pressure per poke.
pub fn plan_hybrid_b(
    trial: &TrialRecording,
    models: &DeviceModels,
    params: &HertzParams,
    cfg: &RenderConfig,
    events: &[PokeEvent],
    mode: HybridBMode,
) -> Result<RenderPlan> {
    let track = hybrid_track(trial, models, params, cfg)?;
    let n = trial.len();

    let own: Vec<(Option<f64>, f64, Flags)> = events
        .iter()
        .map(|e| match e.sustain {
            Some((a, b)) if b < n => {
                let mean = track.residual[a..=b].iter().sum::<f64>() / (b - a + 1) as f64;
                let p = invert_bubble(&models.bubble, mean);
                let flags = if p.clamped && mean > models.bubble.c2 {
                    Flags::PRESSURE
                } else {
                    Flags::empty()
                };
                (Some(mean), p.value, flags)
            }
            _ => (None, 0.0, Flags::EMPTY_SUSTAIN),
        })
        .collect();

    let levels: Vec<PokeLevel> = events
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let (pressure, flags) = match mode {
                HybridBMode::Preloaded => (own[k].1, own[k].2),
                HybridBMode::Causal if k == 0 => (0.0, Flags::empty()),
                HybridBMode::Causal => (own[k - 1].1, own[k - 1].2),
            };
            PokeLevel {
                poke_id: e.poke_id,
                sustain_mean_residual: own[k].0,
                pressure,
                flags,
            }
        })
        .collect();

    let mut pressure = vec![0.0; n];
    let mut ids = vec![None; n];
    let mut flags = track.flags.clone();
    for (e, level) in events.iter().zip(&levels) {
        for i in e.start_index..=e.end_index.min(n.saturating_sub(1)) {
            pressure[i] = level.pressure;
            ids[i] = Some(e.poke_id);
            flags[i] |= level.flags;
        }
    }
    let ticks = trial
        .timestamps()
        .iter()
        .enumerate()
        .map(|(i, t)| PlanTick {
            t: *t,
            platform: PlatformTarget::Position(track.position[i]),
            bubble: BubbleTarget::Pressure(pressure[i]),
            residual: track.residual[i],
            poke_id: ids[i],
            flags: flags[i],
        })
        .collect();
    Ok(RenderPlan {
        strategy: Strategy::HybridB,
        ticks,
        poke_levels: levels,
    })
}

/// Copy Hybrid B's sustain-mean residuals back onto the events.
pub fn annotate_events(events: &mut [PokeEvent], plan: &RenderPlan) {
    for level in &plan.poke_levels {
        if let Some(e) = events.iter_mut().find(|e| e.poke_id == level.poke_id) {
            e.sustain_mean_residual_force = level.sustain_mean_residual;
        }
    }
}

/// Least-squares E* fitting `hertz_force` to the recorded total force over
/// all sustain samples. Returns the parameters and the fit's R².
pub fn calibrate_estar(
    trial: &TrialRecording,
    events: &[PokeEvent],
    radius: f64,
) -> Result<(HertzParams, f64)> {
    let depth = indentation_depth(trial);
    let forces = trial.total_forces();
    let unit = HertzParams {
        e_star: 1.0,
        radius,
    };
    let mut basis = Vec::new();
    let mut observed = Vec::new();
    for e in events {
        if let Some((a, b)) = e.sustain {
            for i in a..=b {
                basis.push(hertz_force(&unit, depth[i]));
                observed.push(forces[i]);
            }
        }
    }
    if basis.is_empty() {
        return Err(Error::NoSustain);
    }
    let hh: f64 = basis.iter().map(|h| h * h).sum();
    if hh == 0.0 {
        return Err(Error::DegenerateModel(
            "no positive depth in sustain samples".into(),
        ));
    }
    let e_star = basis.iter().zip(&observed).map(|(h, f)| h * f).sum::<f64>() / hh;
    let pred: Vec<f64> = basis.iter().map(|h| e_star * h).collect();
    let params = HertzParams { e_star, radius };
    params.validate()?;
    Ok((params, crate::characterization::r_squared(&observed, &pred)))
}

/// Plan CSV: `t_s,strategy,platform_target,target_kind,bubble_kpa_or_residual_n,poke_id,clamp_flag`.
pub fn write_plan<W: Write>(plan: &RenderPlan, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "t_s,strategy,platform_target,target_kind,bubble_kpa_or_residual_n,poke_id,clamp_flag"
    )?;
    for t in &plan.ticks {
        let id = t.poke_id.map(|i| i.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(t.t),
            plan.strategy,
            num(t.platform.value()),
            t.platform.kind(),
            num(t.bubble.value()),
            id,
            u8::from(!t.flags.is_empty())
        )?;
    }
    w.flush()
}
