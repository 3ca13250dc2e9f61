//! Global configuration file: sectioned TOML covering every tunable default.
//!
//! Every key is optional. Missing keys keep the value of the base
//! configuration the file is laid over.
//!
//! ```toml
//! [render]
//! attenuation = 0.31
//! e_star = 0.11367
//!
//! [platform_force_pd]
//! kp = 1.0
//! kd = 0.002
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::control::PdGains;
use crate::rendering::{HertzParams, HybridBMode, RenderConfig};
use crate::segmentation::SegmentationConfig;
use crate::simulator::SimConfig;
use crate::{Error, Result};

/// Resolved configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    pub render: RenderConfig,
    pub hertz: HertzParams,
    pub hybrid_b_mode: HybridBMode,
    pub segmentation: SegmentationConfig,
    pub sim: SimConfig,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            render: RenderConfig::default(),
            hertz: crate::reference::hertz_params(),
            hybrid_b_mode: HybridBMode::Preloaded,
            segmentation: SegmentationConfig::default(),
            sim: SimConfig::default(),
        }
    }
}

impl Config {
    /// Defaults with the simulation-tuned rendering parameters of the
    /// reference scenario.
    pub fn reference() -> Self {
        Config {
            render: crate::reference::render_config(),
            ..Config::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.render.validate()?;
        self.hertz.validate()?;
        self.segmentation.validate()?;
        self.sim.validate()
    }

    /// Parse `text` over [`Config::default`].
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Config::default().overlay(text)
    }

    pub fn load(path: impl AsRef<Path>, base: Config) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        base.overlay(&text)
    }

    /// Apply the keys present in `text` to a copy of `self`.
    pub fn overlay(self, text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let cfg = file.apply(self)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Full TOML rendering of every key.
    pub fn to_toml_string(&self) -> String {
        toml::to_string(&ConfigFile::from(*self)).expect("config sections serialize")
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    render: RenderSection,
    segmentation: SegmentationSection,
    platform_force_pd: PdSection,
    platform_pos_pd: PdSection,
    bubble_fb_pd: PdSection,
    platform_plant: PlatformPlantSection,
    bubble_plant: BubblePlantSection,
    simulation: SimulationSection,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RenderSection {
    x_retract: Option<f64>,
    x_max: Option<f64>,
    contact_force_baseline: Option<f64>,
    attenuation: Option<f64>,
    e_star: Option<f64>,
    radius: Option<f64>,
    hybrid_b_mode: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SegmentationSection {
    d_contact: Option<f64>,
    v_thresh: Option<f64>,
    smoothing_window: Option<usize>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PdSection {
    kp: Option<f64>,
    kd: Option<f64>,
    output_min: Option<f64>,
    output_max: Option<f64>,
    rate_limit: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PlatformPlantSection {
    max_speed: Option<f64>,
    travel_min: Option<f64>,
    travel_max: Option<f64>,
    noise_std: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BubblePlantSection {
    dead_time: Option<f64>,
    time_constant: Option<f64>,
    latency_jitter: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SimulationSection {
    dt: Option<f64>,
    bubble_enabled: Option<bool>,
    preroll_ticks: Option<usize>,
    mismatch_pct: Option<f64>,
    contact_offset: Option<f64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl PdSection {
    fn apply(self, g: &mut PdGains) {
        set(&mut g.kp, self.kp);
        set(&mut g.kd, self.kd);
        set(&mut g.output_min, self.output_min);
        set(&mut g.output_max, self.output_max);
        set(&mut g.rate_limit, self.rate_limit);
    }
}

impl From<PdGains> for PdSection {
    fn from(g: PdGains) -> Self {
        PdSection {
            kp: Some(g.kp),
            kd: Some(g.kd),
            output_min: Some(g.output_min),
            output_max: Some(g.output_max),
            rate_limit: Some(g.rate_limit),
        }
    }
}

fn mode_name(mode: HybridBMode) -> &'static str {
    match mode {
        HybridBMode::Preloaded => "preloaded",
        HybridBMode::Causal => "causal",
    }
}

impl ConfigFile {
    fn apply(self, mut c: Config) -> Result<Config> {
        let r = self.render;
        set(&mut c.render.x_retract, r.x_retract);
        set(&mut c.render.x_max, r.x_max);
        set(
            &mut c.render.contact_force_baseline,
            r.contact_force_baseline,
        );
        set(&mut c.render.attenuation, r.attenuation);
        set(&mut c.hertz.e_star, r.e_star);
        set(&mut c.hertz.radius, r.radius);
        if let Some(m) = r.hybrid_b_mode {
            c.hybrid_b_mode = m.parse()?;
        }
        // The startup servo target is the rendering baseline.
        c.sim.contact_force_baseline = c.render.contact_force_baseline;

        let s = self.segmentation;
        set(&mut c.segmentation.d_contact, s.d_contact);
        set(&mut c.segmentation.v_thresh, s.v_thresh);
        set(&mut c.segmentation.smoothing_window, s.smoothing_window);

        self.platform_force_pd.apply(&mut c.sim.force_pd);
        self.platform_pos_pd.apply(&mut c.sim.position_pd);
        self.bubble_fb_pd.apply(&mut c.sim.bubble_fb);

        let p = self.platform_plant;
        set(&mut c.sim.platform.max_speed, p.max_speed);
        set(&mut c.sim.platform.travel.0, p.travel_min);
        set(&mut c.sim.platform.travel.1, p.travel_max);
        set(&mut c.sim.platform.noise_std, p.noise_std);

        let b = self.bubble_plant;
        set(&mut c.sim.bubble.dead_time, b.dead_time);
        set(&mut c.sim.bubble.time_constant, b.time_constant);
        set(&mut c.sim.bubble.latency_jitter, b.latency_jitter);

        let m = self.simulation;
        set(&mut c.sim.dt, m.dt);
        set(&mut c.sim.bubble_enabled, m.bubble_enabled);
        set(&mut c.sim.preroll_ticks, m.preroll_ticks);
        set(&mut c.sim.mismatch_pct, m.mismatch_pct);
        set(&mut c.sim.contact_offset, m.contact_offset);
        Ok(c)
    }
}

impl From<Config> for ConfigFile {
    fn from(c: Config) -> Self {
        ConfigFile {
            render: RenderSection {
                x_retract: Some(c.render.x_retract),
                x_max: Some(c.render.x_max),
                contact_force_baseline: Some(c.render.contact_force_baseline),
                attenuation: Some(c.render.attenuation),
                e_star: Some(c.hertz.e_star),
                radius: Some(c.hertz.radius),
                hybrid_b_mode: Some(mode_name(c.hybrid_b_mode).to_string()),
            },
            segmentation: SegmentationSection {
                d_contact: Some(c.segmentation.d_contact),
                v_thresh: Some(c.segmentation.v_thresh),
                smoothing_window: Some(c.segmentation.smoothing_window),
            },
            platform_force_pd: c.sim.force_pd.into(),
            platform_pos_pd: c.sim.position_pd.into(),
            bubble_fb_pd: c.sim.bubble_fb.into(),
            platform_plant: PlatformPlantSection {
                max_speed: Some(c.sim.platform.max_speed),
                travel_min: Some(c.sim.platform.travel.0),
                travel_max: Some(c.sim.platform.travel.1),
                noise_std: Some(c.sim.platform.noise_std),
            },
            bubble_plant: BubblePlantSection {
                dead_time: Some(c.sim.bubble.dead_time),
                time_constant: Some(c.sim.bubble.time_constant),
                latency_jitter: Some(c.sim.bubble.latency_jitter),
            },
            simulation: SimulationSection {
                dt: Some(c.sim.dt),
                bubble_enabled: Some(c.sim.bubble_enabled),
                preroll_ticks: Some(c.sim.preroll_ticks),
                mismatch_pct: Some(c.sim.mismatch_pct),
                contact_offset: Some(c.sim.contact_offset),
            },
        }
    }
}
