//! Palpation trial recordings: validation, CSV interchange, resampling onto
//! the 100 Hz control grid, and derived kinematics.

mod csv;
pub mod synth;

pub use self::csv::{load_trial, read_trial, save_trial, write_trial};
pub use synth::{
    synth_profile, synth_trial, PokeKnots, PokeProfile, SampleRate, SynthParams, SynthProfile,
};

use crate::{Error, Result, TICK_S};

/// Default phantom height in mm.
pub const DEFAULT_PHANTOM_HEIGHT_MM: f64 = 39.0;

/// One 4×4 frame of fingertip force cells, in N, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForceGrid(pub [[f64; 4]; 4]);

impl ForceGrid {
    pub const ZERO: ForceGrid = ForceGrid([[0.0; 4]; 4]);

    /// Build from 16 row-major values.
    pub fn from_row_major(cells: &[f64]) -> Option<Self> {
        if cells.len() != 16 {
            return None;
        }
        let mut g = [[0.0; 4]; 4];
        for (i, v) in cells.iter().enumerate() {
            g[i / 4][i % 4] = *v;
        }
        Some(ForceGrid(g))
    }

    pub fn cells(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().flat_map(|row| row.iter().copied())
    }

    /// Summed force over all 16 cells.
    pub fn total(&self) -> f64 {
        total_force(self)
    }
}

/// Sum of all 16 cells of a force frame.
pub fn total_force(grid: &ForceGrid) -> f64 {
    grid.cells().sum()
}

/// Synchronized finger-height and fingertip-force time series.
///
/// Invariants are checked on construction: timestamps strictly increasing,
/// finger height ≥ 0, all force cells ≥ 0, equal lengths, at least one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecording {
    timestamps: Vec<f64>,
    finger_height: Vec<f64>,
    force_grid: Vec<ForceGrid>,
    phantom_height: f64,
    label: Option<bool>,
}

impl TrialRecording {
    pub fn new(
        timestamps: Vec<f64>,
        finger_height: Vec<f64>,
        force_grid: Vec<ForceGrid>,
        phantom_height: f64,
    ) -> Result<Self> {
        if timestamps.is_empty() {
            return Err(Error::Empty);
        }
        if finger_height.len() != timestamps.len() {
            return Err(Error::LengthMismatch {
                left: timestamps.len(),
                right: finger_height.len(),
            });
        }
        if force_grid.len() != timestamps.len() {
            return Err(Error::LengthMismatch {
                left: timestamps.len(),
                right: force_grid.len(),
            });
        }
        if !(phantom_height.is_finite() && phantom_height > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "phantom height must be positive, got {phantom_height}"
            )));
        }
        for (i, t) in timestamps.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::NonMonotoneTime { index: i });
            }
            if i > 0 && *t <= timestamps[i - 1] {
                return Err(Error::NonMonotoneTime { index: i });
            }
        }
        for (i, z) in finger_height.iter().enumerate() {
            if !(z.is_finite() && *z >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "finger height {z} at sample {i} must be finite and >= 0"
                )));
            }
        }
        for (i, g) in force_grid.iter().enumerate() {
            if let Some(v) = g.cells().find(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::NegativeForce { index: i, value: v });
            }
        }
        Ok(TrialRecording {
            timestamps,
            finger_height,
            force_grid,
            phantom_height,
            label: None,
        })
    }

    /// Attach the lump-present flag. Metadata only: planning never reads it.
    pub fn with_label(mut self, lump: Option<bool>) -> Self {
        self.label = lump;
        self
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn timestamps(&self) -> &[f64] {
        &self.timestamps
    }

    pub fn finger_height(&self) -> &[f64] {
        &self.finger_height
    }

    pub fn force_grid(&self) -> &[ForceGrid] {
        &self.force_grid
    }

    pub fn phantom_height(&self) -> f64 {
        self.phantom_height
    }

    pub fn label(&self) -> Option<bool> {
        self.label
    }

    /// Per-sample summed force.
    pub fn total_forces(&self) -> Vec<f64> {
        self.force_grid.iter().map(total_force).collect()
    }

    /// Duration from first to last sample, s.
    pub fn duration(&self) -> f64 {
        self.timestamps[self.len() - 1] - self.timestamps[0]
    }

    /// True when timestamps sit exactly on `t0 + k·10 ms`.
    pub fn is_on_tick_grid(&self) -> bool {
        let t0 = self.timestamps[0];
        self.timestamps
            .iter()
            .enumerate()
            .all(|(k, t)| *t == t0 + k as f64 * TICK_S)
    }

    /// Same samples with every timestamp shifted by `offset` seconds.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        let ts = self.timestamps.iter().map(|t| t + offset).collect();
        Ok(TrialRecording::new(
            ts,
            self.finger_height.clone(),
            self.force_grid.clone(),
            self.phantom_height,
        )?
        .with_label(self.label))
    }
}

/// Depth and depth-rate series derived from a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct KinematicSeries {
    /// Indentation depth d = H_phantom − z_finger, mm. Negative out of contact.
    pub depth: Vec<f64>,
    /// Depth rate ḋ in mm/s (equal to −ż).
    pub velocity: Vec<f64>,
}

/// Indentation depth per sample, unclamped.
pub fn indentation_depth(trial: &TrialRecording) -> Vec<f64> {
    let h = trial.phantom_height;
    trial.finger_height.iter().map(|z| h - z).collect()
}

/// Linearly interpolate a trial onto the exact 10 ms grid `t0 + k·0.01`
/// covering `[t0, tN]`. Input already on the grid is returned unchanged.
pub fn resample_to_100hz(trial: &TrialRecording) -> Result<TrialRecording> {
    let n_in = trial.len();
    if n_in < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: n_in,
        });
    }
    if trial.is_on_tick_grid() {
        return Ok(trial.clone());
    }
    let ts = &trial.timestamps;
    let t0 = ts[0];
    let t_end = ts[n_in - 1];
    let n_out = ((t_end - t0) / TICK_S + 1e-9).floor() as usize + 1;

    let mut times = Vec::with_capacity(n_out);
    let mut heights = Vec::with_capacity(n_out);
    let mut grids = Vec::with_capacity(n_out);
    let mut j = 0;
    for k in 0..n_out {
        let t = t0 + k as f64 * TICK_S;
        while j + 2 < n_in && ts[j + 1] <= t {
            j += 1;
        }
        let (ta, tb) = (ts[j], ts[j + 1]);
        let w = ((t - ta) / (tb - ta)).clamp(0.0, 1.0);
        let lerp = |a: f64, b: f64| if w == 0.0 { a } else { a + (b - a) * w };
        times.push(t);
        heights.push(lerp(trial.finger_height[j], trial.finger_height[j + 1]).max(0.0));
        let (ga, gb) = (&trial.force_grid[j], &trial.force_grid[j + 1]);
        let g =
            std::array::from_fn(|r| std::array::from_fn(|c| lerp(ga.0[r][c], gb.0[r][c]).max(0.0)));
        grids.push(ForceGrid(g));
    }
    Ok(TrialRecording::new(times, heights, grids, trial.phantom_height)?.with_label(trial.label))
}
