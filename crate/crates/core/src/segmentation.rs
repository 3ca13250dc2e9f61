//! Poke segmentation: depth-rate estimation and four-phase labeling.
//!
//! Depth rate ḋ is the derivative of indentation depth, so it is positive
//! while the finger presses in. Approach is `ḋ > +v_thresh`, release is
//! `ḋ < −v_thresh`; the thresholds act on the smoothed rate.

use std::io::Write;

use crate::recording::{indentation_depth, KinematicSeries, TrialRecording};
use crate::textfmt::num;
use crate::{Error, Result, TICK_S};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationConfig {
    /// Contact threshold on depth, mm. `d < d_contact` is no contact.
    pub d_contact: f64,
    /// Depth-rate magnitude separating approach/release from sustain, mm/s.
    pub v_thresh: f64,
    /// Centered moving-average width applied to the rate, samples (odd).
    pub smoothing_window: usize,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            d_contact: 0.5,
            v_thresh: 35.0,
            smoothing_window: 5,
        }
    }
}

impl SegmentationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_contact > 0.0) {
            return Err(Error::InvalidParameter("d_contact must be > 0".into()));
        }
        if !(self.v_thresh > 0.0) {
            return Err(Error::InvalidParameter("v_thresh must be > 0".into()));
        }
        if self.smoothing_window == 0 || self.smoothing_window % 2 == 0 {
            return Err(Error::InvalidParameter(
                "smoothing_window must be odd and >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PokePhase {
    NoContact,
    Approach,
    Sustain,
    Release,
}

/// One contiguous contact span. Indices are inclusive sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PokeEvent {
    pub poke_id: usize,
    pub start_index: usize,
    pub end_index: usize,
    /// Longest run of sustain samples inside the span; `None` when the poke
    /// never slowed below the rate threshold.
    pub sustain: Option<(usize, usize)>,
    pub sustain_mean_depth: Option<f64>,
    /// Filled in by the renderer.
    pub sustain_mean_residual_force: Option<f64>,
}

impl PokeEvent {
    pub fn empty_sustain(&self) -> bool {
        self.sustain.is_none()
    }

    pub fn contains(&self, i: usize) -> bool {
        (self.start_index..=self.end_index).contains(&i)
    }
}

/// Central difference of `depth` (one-sided at the ends), smoothed by a
/// centered moving average truncated at the series ends. `dt` in seconds.
pub fn estimate_velocity(depth: &[f64], dt: f64, config: &SegmentationConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let n = depth.len();
    let needed = config.smoothing_window + 2;
    if n < needed {
        return Err(Error::TooFewSamples { needed, got: n });
    }
    let mut raw = Vec::with_capacity(n);
    raw.push((depth[1] - depth[0]) / dt);
    for i in 1..n - 1 {
        raw.push((depth[i + 1] - depth[i - 1]) / (2.0 * dt));
    }
    raw.push((depth[n - 1] - depth[n - 2]) / dt);

    let half = config.smoothing_window / 2;
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let window = &raw[lo..=hi];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect())
}

/// Phase of a single sample. `d == d_contact` counts as contact.
pub fn classify_phase(d: f64, d_dot: f64, config: &SegmentationConfig) -> PokePhase {
    if d < config.d_contact {
        PokePhase::NoContact
    } else if d_dot > config.v_thresh {
        PokePhase::Approach
    } else if d_dot < -config.v_thresh {
        PokePhase::Release
    } else {
        PokePhase::Sustain
    }
}

/// Depth, depth rate and per-sample phase of a 100 Hz trial.
pub fn label_phases(
    trial: &TrialRecording,
    config: &SegmentationConfig,
) -> Result<(KinematicSeries, Vec<PokePhase>)> {
    let depth = indentation_depth(trial);
    let velocity = estimate_velocity(&depth, TICK_S, config)?;
    let phases = depth
        .iter()
        .zip(&velocity)
        .map(|(d, v)| classify_phase(*d, *v, config))
        .collect();
    Ok((KinematicSeries { depth, velocity }, phases))
}

/// Split a 100 Hz trial into poke events, ordered by time.
pub fn segment_pokes(
    trial: &TrialRecording,
    config: &SegmentationConfig,
) -> Result<Vec<PokeEvent>> {
    let (kin, phases) = label_phases(trial, config)?;
    let n = phases.len();
    let mut events = Vec::new();
    let mut i = 0;
    while i < n {
        if phases[i] == PokePhase::NoContact {
            i += 1;
            continue;
        }
        let start = i;
        while i < n && phases[i] != PokePhase::NoContact {
            i += 1;
        }
        let end = i - 1;

        let mut best: Option<(usize, usize)> = None;
        let mut j = start;
        while j <= end {
            if phases[j] == PokePhase::Sustain {
                let s = j;
                while j <= end && phases[j] == PokePhase::Sustain {
                    j += 1;
                }
                let run = (s, j - 1);
                if best.is_none_or(|(a, b)| run.1 - run.0 > b - a) {
                    best = Some(run);
                }
            } else {
                j += 1;
            }
        }
        let mean_depth =
            best.map(|(a, b)| kin.depth[a..=b].iter().sum::<f64>() / (b - a + 1) as f64);
        events.push(PokeEvent {
            poke_id: events.len(),
            start_index: start,
            end_index: end,
            sustain: best,
            sustain_mean_depth: mean_depth,
            sustain_mean_residual_force: None,
        });
    }
    Ok(events)
}

/// Events CSV: `poke_id,start_s,end_s,sustain_start_s,sustain_end_s,mean_depth_mm`.
/// Empty-sustain pokes leave the last three fields blank.
pub fn write_events<W: Write>(
    trial: &TrialRecording,
    events: &[PokeEvent],
    mut w: W,
) -> std::io::Result<()> {
    let ts = trial.timestamps();
    writeln!(
        w,
        "poke_id,start_s,end_s,sustain_start_s,sustain_end_s,mean_depth_mm"
    )?;
    for e in events {
        write!(
            w,
            "{},{},{}",
            e.poke_id,
            num(ts[e.start_index]),
            num(ts[e.end_index])
        )?;
        match (e.sustain, e.sustain_mean_depth) {
            (Some((a, b)), Some(d)) => writeln!(w, ",{},{},{}", num(ts[a]), num(ts[b]), num(d))?,
            _ => writeln!(w, ",,,")?,
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recording::ForceGrid;
    use proptest::prelude::*;

    fn cfg() -> SegmentationConfig {
        SegmentationConfig::default()
    }

    fn trial_from_depth(depth: &[f64]) -> TrialRecording {
        let n = depth.len();
        TrialRecording::new(
            (0..n).map(|i| i as f64 * TICK_S).collect(),
            depth.iter().map(|d| 39.0 - d).collect(),
            vec![ForceGrid::ZERO; n],
            39.0,
        )
        .unwrap()
    }

    #[test]
    fn velocity_constant_and_ramp() {
        let v = estimate_velocity(&[2.0; 20], TICK_S, &cfg()).unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
        let ramp: Vec<f64> = (0..40).map(|i| 0.5 * i as f64).collect(); // 50 mm/s
        let v = estimate_velocity(&ramp, TICK_S, &cfg()).unwrap();
        for x in &v[3..37] {
            assert!((x - 50.0).abs() < 1e-9);
        }
    }

    #[test]
    fn velocity_sinusoid_within_two_percent() {
        // d = 3 sin(2π t), ḋ = 6π cos(2π t)
        let w = 2.0 * std::f64::consts::PI;
        let d: Vec<f64> = (0..300)
            .map(|i| 3.0 * (w * i as f64 * TICK_S).sin())
            .collect();
        let v = estimate_velocity(&d, TICK_S, &cfg()).unwrap();
        let amp = 3.0 * w;
        for (i, x) in v.iter().enumerate().take(297).skip(3) {
            let exact = amp * (w * i as f64 * TICK_S).cos();
            assert!((x - exact).abs() <= 0.02 * amp, "i={i} {x} vs {exact}");
        }
    }

    #[test]
    fn velocity_too_short() {
        assert!(matches!(
            estimate_velocity(&[0.0; 6], TICK_S, &cfg()),
            Err(Error::TooFewSamples { needed: 7, got: 6 })
        ));
    }

    #[test]
    fn phase_examples() {
        let c = cfg();
        assert_eq!(classify_phase(0.3, 100.0, &c), PokePhase::NoContact);
        assert_eq!(classify_phase(2.0, 50.0, &c), PokePhase::Approach);
        assert_eq!(classify_phase(2.0, -50.0, &c), PokePhase::Release);
        assert_eq!(classify_phase(2.0, 10.0, &c), PokePhase::Sustain);
        assert_eq!(classify_phase(0.5, 0.0, &c), PokePhase::Sustain);
    }

    #[test]
    fn config_validation() {
        assert!(SegmentationConfig {
            smoothing_window: 4,
            ..cfg()
        }
        .validate()
        .is_err());
        assert!(SegmentationConfig {
            d_contact: 0.0,
            ..cfg()
        }
        .validate()
        .is_err());
        assert!(SegmentationConfig {
            v_thresh: -1.0,
            ..cfg()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn no_contact_gives_no_events() {
        let t = trial_from_depth(&[-3.0; 100]);
        assert!(segment_pokes(&t, &cfg()).unwrap().is_empty());
    }

    #[test]
    fn truncated_approach_has_empty_sustain() {
        // recording stops mid-approach at 80 mm/s: the poke is kept and flagged
        let mut d: Vec<f64> = vec![-2.0; 20];
        d.extend((1..=10).map(|i| -2.0 + 0.8 * i as f64));
        let events = segment_pokes(&trial_from_depth(&d), &cfg()).unwrap();
        assert_eq!(events.len(), 1);
        assert!(events[0].empty_sustain());
        assert_eq!(events[0].sustain_mean_depth, None);
    }

    #[test]
    fn events_csv_blank_for_empty_sustain() {
        let d: Vec<f64> = (0..30)
            .map(|i| {
                if (10..14).contains(&i) {
                    1.0 + 0.8 * (i as f64 - 10.0)
                } else {
                    -1.0
                }
            })
            .collect();
        let t = trial_from_depth(&d);
        let events = segment_pokes(&t, &cfg()).unwrap();
        let mut buf = Vec::new();
        write_events(&t, &events, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(
            text.starts_with("poke_id,start_s,end_s,sustain_start_s,sustain_end_s,mean_depth_mm\n")
        );
        assert_eq!(text.lines().count(), 1 + events.len());
    }

    fn poke_depths() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-3.0f64..8.0, 12..150).prop_map(|mut v| {
            // smooth a little so there are sustained stretches
            for i in 1..v.len() {
                v[i] = 0.7 * v[i - 1] + 0.3 * v[i];
            }
            v
        })
    }

    proptest! {
        #[test]
        fn time_shift_invariant(d in poke_depths(), shift in -100.0f64..100.0) {
            let t = trial_from_depth(&d);
            let a = segment_pokes(&t, &cfg()).unwrap();
            let b = segment_pokes(&t.shifted(shift).unwrap(), &cfg()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn raising_threshold_never_loses_sustain(d in poke_depths(), v1 in 5.0f64..80.0, dv in 0.0f64..80.0) {
            let t = trial_from_depth(&d);
            let count = |v| label_phases(&t, &SegmentationConfig { v_thresh: v, ..cfg() })
                .unwrap().1.iter().filter(|p| **p == PokePhase::Sustain).count();
            prop_assert!(count(v1 + dv) >= count(v1));
        }

        #[test]
        fn contact_spans_respect_threshold(d in poke_depths()) {
            let t = trial_from_depth(&d);
            let (kin, phases) = label_phases(&t, &cfg()).unwrap();
            prop_assert_eq!(phases.len(), t.len());
            for e in segment_pokes(&t, &cfg()).unwrap() {
                for i in e.start_index..=e.end_index {
                    prop_assert!(kin.depth[i] >= 0.5);
                }
                if let Some((a, b)) = e.sustain {
                    prop_assert!(e.start_index <= a && b <= e.end_index);
                }
            }
        }
    }
}
