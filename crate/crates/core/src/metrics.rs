//! Tracking, augmentation and lump-detection metrics.

use crate::characterization::BubbleModel;
use crate::rendering::{BubbleTarget, RenderPlan, Strategy};
use crate::segmentation::PokeEvent;
use crate::simulator::SimTrace;
use crate::{Error, Result};

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Root-mean-square difference.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    if a.is_empty() {
        return Err(Error::Empty);
    }
    let ss: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((ss / a.len() as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correlation {
    pub r: f64,
    /// One of the series was constant; `r` is reported as 0.
    pub degenerate: bool,
}

/// Sample Pearson correlation. Constant input gives `r = 0` with the
/// degenerate flag set.
pub fn pearson_r(a: &[f64], b: &[f64]) -> Result<Correlation> {
    check_lengths(a, b)?;
    if a.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: a.len(),
        });
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Ok(Correlation {
            r: 0.0,
            degenerate: true,
        });
    }
    Ok(Correlation {
        r: (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0),
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingReport {
    pub rmse: f64,
    pub pearson_r: f64,
    pub degenerate: bool,
    /// Peaks over contact-span rows; over all rows when no row has a poke id.
    pub max_desired: f64,
    pub max_rendered: f64,
}

fn contact_max(trace: &SimTrace, f: impl Fn(&crate::simulator::TraceRow) -> f64) -> f64 {
    let in_contact = trace.rows.iter().any(|r| r.poke_id.is_some());
    trace
        .rows
        .iter()
        .filter(|r| !in_contact || r.poke_id.is_some())
        .map(f)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Desired vs rendered: total force for Platform-Only, platform position for
/// the hybrids.
pub fn tracking_report(trace: &SimTrace) -> Result<TrackingReport> {
    if trace.is_empty() {
        return Err(Error::Empty);
    }
    let rendered = |r: &crate::simulator::TraceRow| match trace.strategy {
        Strategy::PlatformOnly => r.total_n,
        Strategy::HybridA | Strategy::HybridB => r.platform_mm,
    };
    let desired = trace.column(|r| r.desired);
    let actual = trace.column(rendered);
    let corr = pearson_r(&desired, &actual).unwrap_or(Correlation {
        r: 0.0,
        degenerate: true,
    });
    Ok(TrackingReport {
        rmse: rmse(&desired, &actual)?,
        pearson_r: corr.r,
        degenerate: corr.degenerate,
        max_desired: contact_max(trace, |r| r.desired),
        max_rendered: contact_max(trace, rendered),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentationReport {
    pub baseline_peak: f64,
    pub augmented_peak: f64,
    pub bubble_contribution: f64,
}

/// Peak total force with and without the bubble over contact-span rows.
pub fn augmentation_report(hybrid: &SimTrace, baseline: &SimTrace) -> Result<AugmentationReport> {
    if hybrid.is_empty() || baseline.is_empty() {
        return Err(Error::Empty);
    }
    if hybrid.len() != baseline.len() {
        return Err(Error::LengthMismatch {
            left: hybrid.len(),
            right: baseline.len(),
        });
    }
    if let Some(r) = hybrid
        .rows
        .iter()
        .zip(&baseline.rows)
        .find(|(a, b)| a.t != b.t)
    {
        return Err(Error::TickMismatch {
            plan_dt: r.0.t,
            sim_dt: r.1.t,
        });
    }
    let baseline_peak = contact_max(baseline, |r| r.total_n);
    let augmented_peak = contact_max(hybrid, |r| r.total_n);
    Ok(AugmentationReport {
        baseline_peak,
        augmented_peak,
        bubble_contribution: augmented_peak - baseline_peak,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LumpChoice {
    First,
    Second,
    Undecidable,
}

impl LumpChoice {
    pub fn swapped(self) -> Self {
        match self {
            LumpChoice::First => LumpChoice::Second,
            LumpChoice::Second => LumpChoice::First,
            LumpChoice::Undecidable => LumpChoice::Undecidable,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpDecision {
    pub choice: LumpChoice,
    /// |signal_first − signal_second|.
    pub margin: f64,
    pub signal_first: f64,
    pub signal_second: f64,
}

/// Mean planned bubble force over all sustain samples of `events`: the
/// residual target for Hybrid A, the force of the held pressure for Hybrid
/// B, 0 for Platform-Only.
pub fn sustain_bubble_signal(
    plan: &RenderPlan,
    events: &[PokeEvent],
    bubble: &BubbleModel,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut n = 0usize;
    for e in events {
        if let Some((a, b)) = e.sustain {
            for tick in plan.ticks.get(a..=b).unwrap_or(&[]) {
                sum += match tick.bubble {
                    BubbleTarget::Residual(r) => r,
                    BubbleTarget::Pressure(p) if p > 0.0 => bubble.force(p),
                    BubbleTarget::Pressure(_) => 0.0,
                };
                n += 1;
            }
        }
    }
    if n == 0 {
        return Err(Error::NoSustain);
    }
    Ok(sum / n as f64)
}

/// Peak rendered total force over contact-span rows.
pub fn peak_total_signal(trace: &SimTrace) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::Empty);
    }
    Ok(contact_max(trace, |r| r.total_n))
}

/// Pick the stimulus with the larger signal. Margins at or below
/// `threshold` are undecidable.
pub fn classify_lump(first: f64, second: f64, threshold: f64) -> LumpDecision {
    let margin = (first - second).abs();
    let choice = if margin <= threshold || margin.is_nan() {
        LumpChoice::Undecidable
    } else if first > second {
        LumpChoice::First
    } else {
        LumpChoice::Second
    };
    LumpDecision {
        choice,
        margin,
        signal_first: first,
        signal_second: second,
    }
}

/// [`classify_lump`] on the sustain-mean planned bubble force of two trials.
/// Fails only when neither trial has a sustain phase.
pub fn classify_lump_plans(
    first: (&RenderPlan, &[PokeEvent]),
    second: (&RenderPlan, &[PokeEvent]),
    bubble: &BubbleModel,
    threshold: f64,
) -> Result<LumpDecision> {
    let a = sustain_bubble_signal(first.0, first.1, bubble);
    let b = sustain_bubble_signal(second.0, second.1, bubble);
    match (a, b) {
        (Err(Error::NoSustain), Err(Error::NoSustain)) => Err(Error::NoSustain),
        (a, b) => Ok(classify_lump(a.unwrap_or(0.0), b.unwrap_or(0.0), threshold)),
    }
}

/// [`classify_lump`] on the peak total force of two traces.
pub fn classify_lump_traces(
    first: &SimTrace,
    second: &SimTrace,
    threshold: f64,
) -> Result<LumpDecision> {
    Ok(classify_lump(
        peak_total_signal(first)?,
        peak_total_signal(second)?,
        threshold,
    ))
}
