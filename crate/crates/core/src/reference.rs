//! Reference device models, rendering parameters and trials.
//!
//! These are simulation-tuned stand-ins for hardware that is not available:
//! force magnitudes match the published ones, but coefficients such as E*
//! and the attenuation factor were chosen in simulation, not measured.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::characterization::{BubbleModel, PlatformModel};
use crate::recording::{synth_trial, ForceGrid, PokeProfile, SynthParams, TrialRecording};
use crate::rendering::{DeviceModels, HertzParams, RenderConfig};
use crate::Result;

/// Rendering modulus, N/mm². Gives 6.10 N at the 6 mm reference depth.
pub const E_STAR: f64 = 0.11367;
pub const ATTENUATION: f64 = 0.31;
/// Peak indentation depth of the reference pokes, mm.
pub const DEPTH_PEAK: f64 = 6.0;
pub const POKES: usize = 3;
/// Rest between the no-lump and lump halves of the session, s.
pub const SESSION_GAP_S: f64 = 3.0;
pub const SESSION_TAIL_S: f64 = 2.0;

pub fn platform_model() -> PlatformModel {
    PlatformModel::new(0.01, 0.858, 0.0)
}

pub fn bubble_model() -> BubbleModel {
    BubbleModel::new(1.175 / 41f64.powf(1.2), 1.2, 0.0)
}

pub fn device_models() -> DeviceModels {
    DeviceModels::new(platform_model(), bubble_model())
        .expect("reference platform model is invertible")
}

pub fn hertz_params() -> HertzParams {
    HertzParams::new(E_STAR)
}

pub fn render_config() -> RenderConfig {
    RenderConfig {
        attenuation: ATTENUATION,
        ..RenderConfig::default()
    }
}

/// Parameters of a seeded 3-poke, 6 mm, 100 Hz trial with the default
/// jitter and sensor noise.
pub fn trial_params(lump: bool, seed: u64) -> SynthParams {
    SynthParams::new(lump, POKES, DEPTH_PEAK, 100.0, seed)
}

/// Depth-matched (lump, no-lump) trials sharing `seed`.
pub fn trial_pair(seed: u64) -> Result<(TrialRecording, TrialRecording)> {
    Ok((
        synth_trial(&trial_params(true, seed))?,
        synth_trial(&trial_params(false, seed))?,
    ))
}

/// Jitter- and noise-free version of [`trial_params`].
pub fn clean_trial_params(lump: bool) -> SynthParams {
    SynthParams {
        profile: PokeProfile {
            depth_jitter: 0.0,
            start_jitter: 0.0,
            dwell_jitter: 0.0,
            force_noise: 0.0,
            ..PokeProfile::default()
        },
        ..trial_params(lump, 0)
    }
}

/// The 25 s reference session at 100 Hz: the clean no-lump trial (0–10 s),
/// 3 s rest, the clean lump trial (13–23 s), 2 s rest.
pub fn session() -> Result<TrialRecording> {
    let halves = [
        synth_trial(&clean_trial_params(false))?,
        synth_trial(&clean_trial_params(true))?,
    ];
    let h = halves[0].phantom_height();
    let rest_height = h - PokeProfile::default().rest_depth;
    let gap = (SESSION_GAP_S * 100.0).round() as usize;
    let tail = (SESSION_TAIL_S * 100.0).round() as usize;

    let mut heights = Vec::new();
    let mut grids = Vec::new();
    for (k, trial) in halves.iter().enumerate() {
        heights.extend_from_slice(trial.finger_height());
        grids.extend_from_slice(trial.force_grid());
        let pad = if k == 0 { gap } else { tail };
        heights.extend(std::iter::repeat_n(rest_height, pad));
        grids.extend(std::iter::repeat_n(ForceGrid::ZERO, pad));
    }
    let ts = (0..heights.len()).map(|i| i as f64 * 0.01).collect();
    TrialRecording::new(ts, heights, grids, h)
}

/// Index of the first sample of the lump half of [`session`].
pub fn session_lump_start() -> usize {
    (clean_trial_params(false).profile.period * POKES as f64 * 100.0).round() as usize
        + (SESSION_GAP_S * 100.0).round() as usize
}

/// Noisy platform characterization: 11 displacement levels over 0–10 mm,
/// three repeats each, 0.1 N Gaussian noise.
pub fn platform_samples(seed: u64) -> Vec<(f64, f64)> {
    noisy_samples(
        &platform_model(),
        seed,
        0.1,
        (0..=10).map(f64::from).collect(),
        |m, x| m.force(x),
    )
}

/// Noisy bubble characterization: 2–40 kPa in 2 kPa steps plus 41 kPa,
/// three repeats each, 0.008 N Gaussian noise.
pub fn bubble_samples(seed: u64) -> Vec<(f64, f64)> {
    let mut levels: Vec<f64> = (1..=20).map(|k| 2.0 * f64::from(k)).collect();
    levels.push(41.0);
    noisy_samples(&bubble_model(), seed, 0.008, levels, |m, p| m.force(p))
}

fn noisy_samples<M>(
    model: &M,
    seed: u64,
    std: f64,
    levels: Vec<f64>,
    f: impl Fn(&M, f64) -> f64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, std).expect("positive std");
    let mut out = Vec::with_capacity(levels.len() * 3);
    for _ in 0..3 {
        for x in &levels {
            out.push((*x, f(model, *x) + noise.sample(&mut rng)));
        }
    }
    out
}
