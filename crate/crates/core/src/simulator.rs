//! Fixed-rate closed-loop playback of a [`RenderPlan`] against plant models.
//!
//! The platform plant is a rate-limited stage whose force follows the
//! platform characterization curve. The bubble plant delays each command by
//! a fixed dead time, then follows it through a first-order lag; its force
//! follows the bubble curve. Plant statics reuse the planner's fitted models
//! unless a mismatch is configured.

use std::collections::VecDeque;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::characterization::{eval_bubble, eval_platform, BubbleModel, PlatformModel};
use crate::control::{bubble_ff_fb_step, pd_step, ControllerState, PdGains};
use crate::rendering::{BubbleTarget, DeviceModels, PlatformTarget, RenderPlan, Strategy};
use crate::textfmt::num;
use crate::{Error, Flags, Result, TICK_S};

const PLATFORM_NOISE_STREAM: u64 = 0x706c_6174;
const LATENCY_STREAM: u64 = 0x6c61_7465;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformPlantConfig {
    /// mm/s
    pub max_speed: f64,
    /// Hardware travel `[min, max]`, mm.
    pub travel: (f64, f64),
    /// Force sensor noise std, N.
    pub noise_std: f64,
}

impl Default for PlatformPlantConfig {
    fn default() -> Self {
        PlatformPlantConfig {
            max_speed: 50.0,
            travel: (-6.0, 10.0),
            noise_std: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubblePlantConfig {
    /// Command-to-onset delay, s.
    pub dead_time: f64,
    /// First-order lag after the dead time, s.
    pub time_constant: f64,
    /// Std of a per-run dead-time perturbation, s. 0 disables it.
    pub latency_jitter: f64,
}

impl Default for BubblePlantConfig {
    fn default() -> Self {
        BubblePlantConfig {
            dead_time: 0.16465,
            time_constant: 0.05,
            latency_jitter: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Loop period, s. Must match the plan's tick.
    pub dt: f64,
    pub force_pd: PdGains,
    pub position_pd: PdGains,
    pub bubble_fb: PdGains,
    pub platform: PlatformPlantConfig,
    pub bubble: BubblePlantConfig,
    /// When false every bubble command is forced to 0 kPa.
    pub bubble_enabled: bool,
    /// Force the platform servos to before playback, N.
    pub contact_force_baseline: f64,
    /// Length of the startup servo phase, ticks. Not part of the trace.
    pub preroll_ticks: usize,
    /// Relative perturbation of plant model coefficients, percent.
    pub mismatch_pct: f64,
    /// Hidden offset between hardware and model platform coordinates, mm.
    pub contact_offset: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: TICK_S,
            force_pd: PdGains::platform_force(),
            position_pd: PdGains::platform_position(),
            bubble_fb: PdGains::bubble_feedback(),
            platform: PlatformPlantConfig::default(),
            bubble: BubblePlantConfig::default(),
            bubble_enabled: true,
            contact_force_baseline: 0.5,
            preroll_ticks: 100,
            mismatch_pct: 0.0,
            contact_offset: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        self.force_pd.validate()?;
        self.position_pd.validate()?;
        self.bubble_fb.validate()?;
        let p = &self.platform;
        if !(p.max_speed > 0.0 && p.travel.0 < p.travel.1 && p.noise_std >= 0.0) {
            return Err(Error::InvalidParameter(
                "platform plant parameters out of range".into(),
            ));
        }
        let b = &self.bubble;
        if !(b.dead_time >= 0.0 && b.time_constant >= 0.0 && b.latency_jitter >= 0.0) {
            return Err(Error::InvalidParameter(
                "bubble plant parameters out of range".into(),
            ));
        }
        if !(self.contact_force_baseline > 0.0) {
            return Err(Error::InvalidParameter(
                "contact_force_baseline must be positive".into(),
            ));
        }
        if !(self.mismatch_pct > -100.0) {
            return Err(Error::InvalidParameter(
                "mismatch_pct must exceed -100".into(),
            ));
        }
        Ok(())
    }

    /// Dead time in whole ticks, before jitter.
    pub fn dead_time_ticks(&self) -> usize {
        (self.bubble.dead_time / self.dt).round() as usize
    }
}

/// Rigid platform stage.
#[derive(Debug, Clone)]
pub struct PlatformPlant {
    /// Hardware position, mm.
    pub position: f64,
    pub max_speed: f64,
    pub force_model: PlatformModel,
    pub noise_std: f64,
    pub travel: (f64, f64),
    /// Hardware position where the model's zero displacement sits, mm.
    pub contact_offset: f64,
    noise: Option<(Normal<f64>, ChaCha8Rng)>,
}

/// Result of one plant tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformStep {
    pub position: f64,
    pub force: f64,
    /// Target lay outside the travel range.
    pub travel_limited: bool,
}

impl PlatformPlant {
    pub fn new(
        force_model: PlatformModel,
        config: &PlatformPlantConfig,
        seed: u64,
    ) -> Result<Self> {
        let noise = if config.noise_std > 0.0 {
            let dist = Normal::new(0.0, config.noise_std)
                .map_err(|e| Error::InvalidParameter(e.to_string()))?;
            Some((
                dist,
                ChaCha8Rng::seed_from_u64(seed ^ PLATFORM_NOISE_STREAM),
            ))
        } else {
            None
        };
        Ok(PlatformPlant {
            position: config.travel.0,
            max_speed: config.max_speed,
            force_model,
            noise_std: config.noise_std,
            travel: config.travel,
            contact_offset: 0.0,
            noise,
        })
    }

    /// Noise-free contact force at hardware position `x`.
    pub fn force_at(&self, x: f64) -> f64 {
        eval_platform(&self.force_model, (x - self.contact_offset).max(0.0)).value
    }

    pub fn step(&mut self, target: f64, dt: f64) -> PlatformStep {
        let (lo, hi) = self.travel;
        let bounded = target.clamp(lo, hi);
        let step = self.max_speed * dt;
        self.position =
            (self.position + (bounded - self.position).clamp(-step, step)).clamp(lo, hi);
        let mut force = self.force_at(self.position);
        if let Some((dist, rng)) = self.noise.as_mut() {
            force += dist.sample(rng);
        }
        PlatformStep {
            position: self.position,
            force,
            travel_limited: bounded != target,
        }
    }
}

/// Move the platform one tick toward `target`; returns (position mm, force N).
pub fn step_platform_plant(plant: &mut PlatformPlant, target: f64, dt: f64) -> (f64, f64) {
    let s = plant.step(target, dt);
    (s.position, s.force)
}

/// Pneumatic chamber: dead-time queue followed by a first-order lag.
#[derive(Debug, Clone)]
pub struct BubblePlant {
    pub force_model: BubbleModel,
    /// Internal pressure, kPa.
    pub pressure: f64,
    pub time_constant: f64,
    queue: VecDeque<f64>,
}

impl BubblePlant {
    pub fn new(force_model: BubbleModel, dead_time_ticks: usize, time_constant: f64) -> Self {
        BubblePlant {
            force_model,
            pressure: 0.0,
            time_constant,
            queue: std::iter::repeat_n(0.0, dead_time_ticks).collect(),
        }
    }

    pub fn dead_time_ticks(&self) -> usize {
        self.queue.len()
    }

    /// True while a queued command differs from the one reaching the chamber.
    pub fn command_in_flight(&self) -> bool {
        self.queue
            .front()
            .is_some_and(|head| self.queue.iter().any(|c| c != head))
    }

    /// Returns (internal pressure kPa, force N).
    pub fn step(&mut self, command: f64, dt: f64) -> (f64, f64) {
        self.queue
            .push_back(command.clamp(0.0, self.force_model.p_max));
        let delivered = self.queue.pop_front().unwrap_or(0.0);
        if self.time_constant > 0.0 {
            let alpha = 1.0 - (-dt / self.time_constant).exp();
            self.pressure += (delivered - self.pressure) * alpha;
        } else {
            self.pressure = delivered;
        }
        (
            self.pressure,
            eval_bubble(&self.force_model, self.pressure).value,
        )
    }
}

pub fn step_bubble_plant(plant: &mut BubblePlant, command: f64, dt: f64) -> (f64, f64) {
    plant.step(command, dt)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// Desired force (N) for Platform-Only, desired position (mm) otherwise.
    pub desired: f64,
    /// Platform position in model coordinates, mm.
    pub platform_mm: f64,
    pub platform_n: f64,
    /// Commanded bubble pressure this tick, kPa.
    pub bubble_cmd_kpa: f64,
    /// Internal bubble pressure, kPa.
    pub bubble_kpa: f64,
    pub bubble_n: f64,
    pub total_n: f64,
    pub poke_id: Option<usize>,
    pub flags: Flags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub strategy: Strategy,
    pub rows: Vec<TraceRow>,
    /// Dead time actually used, ticks.
    pub dead_time_ticks: usize,
    /// Hardware position registered as model zero during startup, mm.
    pub zero_offset: f64,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column(&self, f: impl Fn(&TraceRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

fn perturbed_platform(m: &PlatformModel, scale: f64) -> PlatformModel {
    PlatformModel {
        k2: m.k2 * scale,
        k1: m.k1 * scale,
        k0: m.k0 * scale,
        domain: m.domain,
    }
}

/// Displacement where the non-decreasing model reaches `force`, by bisection.
fn displacement_for_force(m: &PlatformModel, force: f64) -> f64 {
    let (mut lo, mut hi) = m.domain;
    if m.force(lo) >= force {
        return lo;
    }
    if m.force(hi) <= force {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if m.force(mid) < force {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Play `plan` through the controllers and plants at `config.dt`.
///
/// Before the first plan tick the platform force-servos from the bottom of
/// its travel to the contact baseline; the position reached there, minus
/// the model's displacement for that force, becomes the coordinate zero.
/// The platform then parks at that zero and playback starts.
pub fn run_simulation(
    plan: &RenderPlan,
    models: &DeviceModels,
    config: &SimConfig,
    seed: u64,
) -> Result<SimTrace> {
    config.validate()?;
    if let Some(plan_dt) = plan.dt() {
        if (plan_dt - config.dt).abs() > 1e-9 {
            return Err(Error::TickMismatch {
                plan_dt,
                sim_dt: config.dt,
            });
        }
    }
    let dt = config.dt;
    let scale = 1.0 + config.mismatch_pct / 100.0;

    let mut platform = PlatformPlant::new(
        perturbed_platform(&models.platform, scale),
        &config.platform,
        seed,
    )?;
    platform.contact_offset = config.contact_offset;

    let mut dead_ticks = config.dead_time_ticks();
    if config.bubble.latency_jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ LATENCY_STREAM);
        let jitter = Normal::new(0.0, config.bubble.latency_jitter)
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .sample(&mut rng);
        dead_ticks = ((config.bubble.dead_time + jitter).max(0.0) / dt).round() as usize;
    }
    let bubble_model = BubbleModel {
        a: models.bubble.a * scale,
        ..models.bubble
    };
    let mut bubble = BubblePlant::new(bubble_model, dead_ticks, config.bubble.time_constant);

    // Startup zeroing.
    let mut force_ctl = ControllerState::new(platform.position);
    let mut measured = platform.force_at(platform.position);
    for _ in 0..config.preroll_ticks {
        let cmd = pd_step(
            &config.force_pd,
            &mut force_ctl,
            config.contact_force_baseline - measured,
            dt,
        );
        measured = platform.step(cmd.output, dt).force;
    }
    let zero_offset =
        platform.position - displacement_for_force(&models.platform, config.contact_force_baseline);
    // Park at the registered contact point.
    let park_ticks = ((config.platform.travel.1 - config.platform.travel.0)
        / (config.platform.max_speed * dt))
        .ceil();
    for _ in 0..park_ticks as usize + 1 {
        measured = platform.step(zero_offset, dt).force;
    }

    force_ctl.reset(platform.position);
    let mut position_ctl = ControllerState::new(platform.position - zero_offset);
    let mut bubble_ctl = ControllerState::new(0.0);
    let mut bubble_force = 0.0;

    let mut rows = Vec::with_capacity(plan.len());
    for tick in &plan.ticks {
        let mut flags = tick.flags;
        let (desired, hw_target) = match tick.platform {
            PlatformTarget::Force(f) => {
                let cmd = pd_step(&config.force_pd, &mut force_ctl, f - measured, dt);
                (f, cmd.output)
            }
            PlatformTarget::Position(x) => {
                let cmd = pd_step(
                    &config.position_pd,
                    &mut position_ctl,
                    x - (platform.position - zero_offset),
                    dt,
                );
                (x, cmd.output + zero_offset)
            }
        };
        let step = platform.step(hw_target, dt);
        measured = step.force;
        if step.travel_limited {
            flags |= Flags::TRAVEL;
        }

        let command = if !config.bubble_enabled {
            0.0
        } else {
            match tick.bubble {
                BubbleTarget::Pressure(p) => p,
                BubbleTarget::Residual(r) => bubble_ff_fb_step(
                    &models.bubble,
                    &config.bubble_fb,
                    &mut bubble_ctl,
                    r,
                    bubble_force,
                    dt,
                ),
            }
        };
        if command <= 0.0 && tick.bubble.value() > 0.0 || command >= bubble_model.p_max {
            flags |= Flags::PRESSURE;
        }
        let (pressure, bf) = bubble.step(command, dt);
        bubble_force = bf;
        if bubble.command_in_flight() {
            flags |= Flags::LATENCY;
        }

        rows.push(TraceRow {
            t: tick.t,
            desired,
            platform_mm: step.position - zero_offset,
            platform_n: step.force,
            bubble_cmd_kpa: command,
            bubble_kpa: pressure,
            bubble_n: bf,
            total_n: step.force + bf,
            poke_id: tick.poke_id,
            flags,
        });
    }
    Ok(SimTrace {
        strategy: plan.strategy,
        rows,
        dead_time_ticks: dead_ticks,
        zero_offset,
    })
}

/// Trace CSV: `t_s,desired,platform_mm,platform_n,bubble_kpa,bubble_n,total_n,flags`.
pub fn write_trace<W: Write>(trace: &SimTrace, mut w: W) -> std::io::Result<()> {
    writeln!(
        w,
        "t_s,desired,platform_mm,platform_n,bubble_kpa,bubble_n,total_n,flags"
    )?;
    for r in &trace.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            num(r.t),
            num(r.desired),
            num(r.platform_mm),
            num(r.platform_n),
            num(r.bubble_kpa),
            num(r.bubble_n),
            num(r.total_n),
            r.flags
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference;
    use crate::rendering::PlanTick;
    use crate::rendering::Strategy;
    use proptest::prelude::*;

    fn plan_from(strategy: Strategy, ticks: Vec<(PlatformTarget, BubbleTarget)>) -> RenderPlan {
        RenderPlan {
            strategy,
            ticks: ticks
                .into_iter()
                .enumerate()
                .map(|(i, (platform, bubble))| PlanTick {
                    t: i as f64 * TICK_S,
                    platform,
                    bubble,
                    residual: 0.0,
                    poke_id: None,
                    flags: Flags::empty(),
                })
                .collect(),
            poke_levels: Vec::new(),
        }
    }

    #[test]
    fn platform_rate_limit_and_travel() {
        let mut p = PlatformPlant::new(
            reference::platform_model(),
            &PlatformPlantConfig::default(),
            0,
        )
        .unwrap();
        p.position = 0.0;
        assert!((step_platform_plant(&mut p, 10.0, 0.01).0 - 0.5).abs() < 1e-15);
        p.position = -5.9;
        let s = p.step(-20.0, 0.01);
        assert_eq!(s.position, -6.0);
        assert!(s.travel_limited);
    }

    #[test]
    fn platform_force_follows_model() {
        let m = reference::platform_model();
        let mut p = PlatformPlant::new(m, &PlatformPlantConfig::default(), 0).unwrap();
        let x = displacement_for_force(&m, 4.231);
        p.position = x;
        let (_, f) = step_platform_plant(&mut p, x, 0.01);
        assert!((f - 4.231).abs() < 1e-9);
    }

    #[test]
    fn bubble_zero_command_stays_zero() {
        let mut b = BubblePlant::new(reference::bubble_model(), 16, 0.05);
        for _ in 0..100 {
            assert_eq!(step_bubble_plant(&mut b, 0.0, 0.01), (0.0, 0.0));
        }
    }

    #[test]
    fn bubble_step_response() {
        let m = reference::bubble_model();
        let mut b = BubblePlant::new(m, 16, 0.05);
        let out: Vec<(f64, f64)> = (0..300).map(|_| b.step(41.0, 0.01)).collect();
        for (p, _) in &out[..16] {
            assert_eq!(*p, 0.0);
        }
        assert!(out[16].0 > 0.0);
        let (p_end, f_end) = out[299];
        assert!((p_end - 41.0).abs() < 1e-9);
        assert!(f_end <= 1.175 + 1e-12 && (f_end - m.max_force()).abs() < 1e-9);
        // 63.2 % one time constant (5 ticks) after the dead time, ±1 tick
        let first = out
            .iter()
            .position(|(p, _)| *p >= 41.0 * (1.0 - (-1.0f64).exp()) - 1e-9)
            .unwrap();
        assert!(
            (first as i64 - (16 + 5)).abs() <= 1,
            "63.2% at tick {first}"
        );
    }

    #[test]
    fn zero_plan_rests() {
        let m = reference::device_models();
        let plan = plan_from(
            Strategy::PlatformOnly,
            vec![(PlatformTarget::Force(0.0), BubbleTarget::Pressure(0.0)); 200],
        );
        let trace = run_simulation(&plan, &m, &SimConfig::default(), 7).unwrap();
        assert_eq!(trace.len(), 200);
        for r in &trace.rows {
            assert!(r.platform_mm.abs() < 1e-12);
            assert!(r.platform_n.abs() < 1e-12);
            assert_eq!(r.bubble_n, 0.0);
            assert_eq!(r.total_n, r.platform_n);
        }
    }

    #[test]
    fn tick_mismatch_rejected() {
        let mut plan = plan_from(
            Strategy::PlatformOnly,
            vec![(PlatformTarget::Force(0.0), BubbleTarget::Pressure(0.0)); 5],
        );
        for (i, t) in plan.ticks.iter_mut().enumerate() {
            t.t = i as f64 * 0.02;
        }
        let err = run_simulation(&plan, &reference::device_models(), &SimConfig::default(), 0)
            .unwrap_err();
        assert!(matches!(err, Error::TickMismatch { .. }));
    }

    #[test]
    fn hybrid_b_onset_lag() {
        let mut ticks = vec![(PlatformTarget::Position(-6.0), BubbleTarget::Pressure(0.0)); 100];
        ticks.extend(vec![
            (
                PlatformTarget::Position(-6.0),
                BubbleTarget::Pressure(20.0)
            );
            100
        ]);
        let plan = plan_from(Strategy::HybridB, ticks);
        let trace =
            run_simulation(&plan, &reference::device_models(), &SimConfig::default(), 0).unwrap();
        let onset = trace.rows.iter().position(|r| r.bubble_n > 0.0).unwrap();
        assert_eq!(onset - 100, 16);
        assert_eq!((0.16465f64 / 0.01).round() as usize, 16);
    }

    #[test]
    fn force_loop_settles_one_newton_step() {
        let mut ticks = vec![(PlatformTarget::Force(0.5), BubbleTarget::Pressure(0.0)); 50];
        ticks.extend(vec![
            (
                PlatformTarget::Force(1.5),
                BubbleTarget::Pressure(0.0)
            );
            100
        ]);
        let plan = plan_from(Strategy::PlatformOnly, ticks);
        let trace =
            run_simulation(&plan, &reference::device_models(), &SimConfig::default(), 0).unwrap();
        let settle = trace.rows[50..]
            .iter()
            .rposition(|r| (r.platform_n - 1.5).abs() > 0.05)
            .map_or(0, |i| i + 1);
        assert!(
            settle as f64 * TICK_S <= 0.3,
            "settled after {settle} ticks"
        );
    }

    #[test]
    fn startup_registers_hidden_offset() {
        let cfg = SimConfig {
            contact_offset: 1.25,
            ..SimConfig::default()
        };
        let plan = plan_from(
            Strategy::HybridA,
            vec![(PlatformTarget::Position(2.0), BubbleTarget::Residual(0.0)); 100],
        );
        let m = reference::device_models();
        let trace = run_simulation(&plan, &m, &cfg, 0).unwrap();
        assert!((trace.zero_offset - 1.25).abs() < 1e-6);
        let last = trace.rows.last().unwrap();
        assert!((last.platform_mm - 2.0).abs() < 1e-6);
        assert!((last.platform_n - m.platform.force(2.0)).abs() < 1e-5);
    }

    #[test]
    fn noise_is_seeded() {
        let cfg = SimConfig {
            platform: PlatformPlantConfig {
                noise_std: 0.05,
                ..PlatformPlantConfig::default()
            },
            ..SimConfig::default()
        };
        let plan = plan_from(
            Strategy::HybridA,
            vec![(PlatformTarget::Position(3.0), BubbleTarget::Residual(0.2)); 80],
        );
        let m = reference::device_models();
        let a = run_simulation(&plan, &m, &cfg, 11).unwrap();
        let b = run_simulation(&plan, &m, &cfg, 11).unwrap();
        let c = run_simulation(&plan, &m, &cfg, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn trace_csv_shape() {
        let plan = plan_from(
            Strategy::HybridB,
            vec![(PlatformTarget::Position(1.0), BubbleTarget::Pressure(5.0)); 3],
        );
        let trace =
            run_simulation(&plan, &reference::device_models(), &SimConfig::default(), 0).unwrap();
        let mut buf = Vec::new();
        write_trace(&trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "t_s,desired,platform_mm,platform_n,bubble_kpa,bubble_n,total_n,flags"
        );
        assert_eq!(lines.len(), 4);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 8));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn no_teleportation_and_composition(targets in proptest::collection::vec(-8.0f64..12.0, 2..200), seed in 0u64..1000) {
            let plan = plan_from(
                Strategy::HybridA,
                targets.iter().map(|x| (PlatformTarget::Position(*x), BubbleTarget::Residual((x / 10.0).clamp(0.0, 1.0)))).collect(),
            );
            let cfg = SimConfig::default();
            let trace = run_simulation(&plan, &reference::device_models(), &cfg, seed).unwrap();
            prop_assert_eq!(trace.len(), plan.len());
            for w in trace.rows.windows(2) {
                prop_assert!((w[1].platform_mm - w[0].platform_mm).abs() <= cfg.platform.max_speed * cfg.dt + 1e-12);
            }
            for r in &trace.rows {
                prop_assert_eq!(r.total_n, r.platform_n + r.bubble_n);
                prop_assert!(r.platform_mm + trace.zero_offset >= cfg.platform.travel.0 - 1e-12);
                prop_assert!(r.platform_mm + trace.zero_offset <= cfg.platform.travel.1 + 1e-12);
                prop_assert!(r.bubble_kpa >= 0.0 && r.bubble_kpa <= 41.0);
            }
        }
    }
}
