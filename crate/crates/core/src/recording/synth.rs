//! Deterministic synthetic palpation trials standing in for recorded data.
//!
//! Each poke is a trapezoid in indentation depth: rest → ramp down at
//! constant speed → dwell at peak depth → ramp back → rest. Contact force
//! follows the Hertz law with a tissue modulus chosen so the no-lump peak
//! hits `peak_force`; with a lump the modulus is raised across a depth band
//! (smoothstep between the band edges) so the peak hits `lump_peak_force`.
//! Lump and no-lump trials with the same seed share the depth profile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{ForceGrid, TrialRecording, DEFAULT_PHANTOM_HEIGHT_MM};
use crate::rendering::{hertz_force, HertzParams};
use crate::{Error, Result};

const PROFILE_STREAM: u64 = 0x7072_6f66;
const NOISE_STREAM: u64 = 0x6e6f_6973;
const CLOCK_STREAM: u64 = 0x636c_6f63;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleRate {
    Uniform(f64),
    /// Sample intervals drawn uniformly from `[1/max_hz, 1/min_hz]`; the
    /// trapezoid corners are always included as sample times.
    Irregular {
        min_hz: f64,
        max_hz: f64,
    },
}

/// Shape and force calibration of the synthetic pokes.
#[derive(Debug, Clone, PartialEq)]
pub struct PokeProfile {
    /// Depth between pokes, mm (negative: finger above the surface).
    pub rest_depth: f64,
    /// Depth rate on the ramps, mm/s.
    pub ramp_speed: f64,
    /// Dwell at peak depth, s.
    pub dwell: f64,
    /// Poke repetition period, s.
    pub period: f64,
    /// Time before the first ramp starts within each period, s.
    pub lead: f64,
    /// Relative peak-depth jitter per poke (uniform ±).
    pub depth_jitter: f64,
    /// Start-time jitter per poke, s (uniform ±).
    pub start_jitter: f64,
    /// Dwell jitter per poke, s (uniform ±).
    pub dwell_jitter: f64,
    /// Total force at nominal peak depth without a lump, N.
    pub peak_force: f64,
    /// Total force at nominal peak depth with a lump, N.
    pub lump_peak_force: f64,
    /// Lump stiffening band as fractions of the nominal peak depth.
    pub lump_band: (f64, f64),
    /// Relative per-cell multiplicative force noise (std).
    pub force_noise: f64,
    /// Effective finger radius for the Hertz law, mm.
    pub radius: f64,
    pub phantom_height: f64,
}

impl Default for PokeProfile {
    fn default() -> Self {
        PokeProfile {
            rest_depth: -3.0,
            ramp_speed: 45.0,
            dwell: 1.5,
            period: 10.0 / 3.0,
            lead: 0.5,
            depth_jitter: 0.02,
            start_jitter: 0.05,
            dwell_jitter: 0.1,
            peak_force: 4.231,
            lump_peak_force: 7.043,
            lump_band: (0.3, 0.8),
            force_noise: 0.01,
            radius: 7.5,
            phantom_height: DEFAULT_PHANTOM_HEIGHT_MM,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub lump: bool,
    pub pokes: usize,
    /// Nominal peak indentation depth, mm, in (0, 10].
    pub depth_peak: f64,
    pub rate: SampleRate,
    pub seed: u64,
    pub profile: PokeProfile,
}

impl SynthParams {
    pub fn new(lump: bool, pokes: usize, depth_peak: f64, rate_hz: f64, seed: u64) -> Self {
        SynthParams {
            lump,
            pokes,
            depth_peak,
            rate: SampleRate::Uniform(rate_hz),
            seed,
            profile: PokeProfile::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.profile;
        if self.pokes == 0 {
            return Err(Error::InvalidParameter("pokes must be >= 1".into()));
        }
        if !(self.depth_peak > 0.0 && self.depth_peak <= 10.0) {
            return Err(Error::InvalidParameter(format!(
                "depth_peak must be in (0, 10] mm, got {}",
                self.depth_peak
            )));
        }
        match self.rate {
            SampleRate::Uniform(hz) if !(hz.is_finite() && hz > 0.0) => {
                return Err(Error::InvalidParameter(format!(
                    "rate must be positive, got {hz}"
                )));
            }
            SampleRate::Irregular { min_hz, max_hz } if !(min_hz > 0.0 && max_hz >= min_hz) => {
                return Err(Error::InvalidParameter(format!(
                    "irregular rate needs 0 < min <= max, got {min_hz}..{max_hz}"
                )));
            }
            _ => {}
        }
        if !(p.ramp_speed > 0.0 && p.dwell >= 0.0 && p.period > 0.0 && p.rest_depth < 0.0) {
            return Err(Error::InvalidParameter(
                "poke profile shape out of range".into(),
            ));
        }
        if !(p.peak_force > 0.0 && p.lump_peak_force >= p.peak_force) {
            return Err(Error::InvalidParameter(
                "lump peak force must be >= peak force > 0".into(),
            ));
        }
        let max_peak = self.depth_peak * (1.0 + p.depth_jitter);
        let active = 2.0 * (max_peak - p.rest_depth) / p.ramp_speed + p.dwell + p.dwell_jitter;
        if p.lead < p.start_jitter || p.lead + p.start_jitter + active >= p.period {
            return Err(Error::InvalidParameter(format!(
                "poke of {active:.3} s does not fit a {:.3} s period",
                p.period
            )));
        }
        if max_peak > p.phantom_height {
            return Err(Error::InvalidParameter(
                "depth exceeds phantom height".into(),
            ));
        }
        Ok(())
    }

    /// Hertz modulus giving `peak_force` at the nominal peak depth, N/mm².
    pub fn tissue_modulus(&self) -> f64 {
        let unit = HertzParams {
            e_star: 1.0,
            radius: self.profile.radius,
        };
        self.profile.peak_force / hertz_force(&unit, self.depth_peak)
    }

    /// Noise-free total force at depth `d` for this trial's lump setting.
    pub fn analytic_force(&self, d: f64) -> f64 {
        let (base, extra) = self.force_parts(d);
        base + extra
    }

    /// (tissue force, lump excess) at depth `d`.
    fn force_parts(&self, d: f64) -> (f64, f64) {
        let p = &self.profile;
        let e0 = self.tissue_modulus();
        let base = hertz_force(
            &HertzParams {
                e_star: e0,
                radius: p.radius,
            },
            d,
        );
        if !self.lump || d <= 0.0 {
            return (base, 0.0);
        }
        let gain = p.lump_peak_force / p.peak_force - 1.0;
        let (lo, hi) = p.lump_band;
        let u = ((d / self.depth_peak - lo) / (hi - lo)).clamp(0.0, 1.0);
        let s = u * u * (3.0 - 2.0 * u);
        (base, base * gain * s)
    }
}

/// Corner times (s) and peak depth (mm) of one trapezoidal poke.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PokeKnots {
    /// Ramp down starts (depth leaves rest).
    pub start: f64,
    /// Peak depth reached, dwell begins.
    pub reach: f64,
    /// Dwell ends, ramp back begins.
    pub leave: f64,
    /// Back at rest depth.
    pub end: f64,
    pub peak_depth: f64,
}

/// Realized depth profile of a synthetic trial.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthProfile {
    pub knots: Vec<PokeKnots>,
    pub rest_depth: f64,
    /// Trial length, s. Samples cover `[0, duration)`.
    pub duration: f64,
}

impl SynthProfile {
    /// Analytic indentation depth at time `t`.
    pub fn depth_at(&self, t: f64) -> f64 {
        for k in &self.knots {
            if t > k.start && t < k.end {
                let rest = self.rest_depth;
                return if t < k.reach {
                    rest + (k.peak_depth - rest) * (t - k.start) / (k.reach - k.start)
                } else if t <= k.leave {
                    k.peak_depth
                } else {
                    k.peak_depth + (rest - k.peak_depth) * (t - k.leave) / (k.end - k.leave)
                };
            }
        }
        self.rest_depth
    }
}

/// Realize the per-poke jitter for `params`.
pub fn synth_profile(params: &SynthParams) -> Result<SynthProfile> {
    params.validate()?;
    let p = &params.profile;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ PROFILE_STREAM);
    let mut knots = Vec::with_capacity(params.pokes);
    for k in 0..params.pokes {
        let peak = params.depth_peak * (1.0 + p.depth_jitter * rng.random_range(-1.0..=1.0));
        let start = p.lead + k as f64 * p.period + p.start_jitter * rng.random_range(-1.0..=1.0);
        let dwell = (p.dwell + p.dwell_jitter * rng.random_range(-1.0..=1.0)).max(0.0);
        let ramp = (peak - p.rest_depth) / p.ramp_speed;
        knots.push(PokeKnots {
            start,
            reach: start + ramp,
            leave: start + ramp + dwell,
            end: start + 2.0 * ramp + dwell,
            peak_depth: peak,
        });
    }
    Ok(SynthProfile {
        knots,
        rest_depth: p.rest_depth,
        duration: params.pokes as f64 * p.period,
    })
}

fn cell_weights(sigma: f64) -> [[f64; 4]; 4] {
    let mut w = [[0.0; 4]; 4];
    let mut sum = 0.0;
    for (r, row) in w.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            let dr = r as f64 - 1.5;
            let dc = c as f64 - 1.5;
            *cell = (-(dr * dr + dc * dc) / (2.0 * sigma * sigma)).exp();
            sum += *cell;
        }
    }
    for row in w.iter_mut() {
        for cell in row.iter_mut() {
            *cell /= sum;
        }
    }
    w
}

fn sample_times(params: &SynthParams, profile: &SynthProfile) -> Vec<f64> {
    match params.rate {
        SampleRate::Uniform(hz) => {
            let n = (profile.duration * hz).round() as usize;
            let dt = 1.0 / hz;
            (0..n).map(|i| i as f64 * dt).collect()
        }
        SampleRate::Irregular { min_hz, max_hz } => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ CLOCK_STREAM);
            let mut ts = vec![0.0];
            let mut t = 0.0;
            loop {
                t += rng.random_range(1.0 / max_hz..=1.0 / min_hz);
                if t >= profile.duration {
                    break;
                }
                ts.push(t);
            }
            for k in &profile.knots {
                ts.extend(
                    [k.start, k.reach, k.leave, k.end]
                        .into_iter()
                        .filter(|t| *t < profile.duration),
                );
            }
            ts.sort_by(f64::total_cmp);
            ts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            ts
        }
    }
}

/// Generate a synthetic trial. Identical parameters give identical output.
pub fn synth_trial(params: &SynthParams) -> Result<TrialRecording> {
    let profile = synth_profile(params)?;
    let h = params.profile.phantom_height;
    let ts = sample_times(params, &profile);
    let base_w = cell_weights(1.2);
    let lump_w = cell_weights(0.6);
    let noise = Normal::new(0.0, params.profile.force_noise.max(0.0))
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ NOISE_STREAM);

    let mut heights = Vec::with_capacity(ts.len());
    let mut grids = Vec::with_capacity(ts.len());
    for t in &ts {
        let d = profile.depth_at(*t);
        heights.push(h - d);
        let (base, extra) = params.force_parts(d);
        let mut g = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                let clean = base * base_w[r][c] + extra * lump_w[r][c];
                let m: f64 = 1.0 + noise.sample(&mut rng);
                g[r][c] = (clean * m).max(0.0);
            }
        }
        grids.push(ForceGrid(g));
    }
    Ok(TrialRecording::new(ts, heights, grids, h)?.with_label(Some(params.lump)))
}
