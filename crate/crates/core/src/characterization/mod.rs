//! Device characterization models: the platform's quadratic
//! displacement→force curve, its quadratic inverse, and the bubble's
//! power-law pressure→force curve.
//!
//! Evaluation outside a model's validity domain never fails. The input is
//! clamped to the domain and the returned [`Clamped`] carries a flag.

mod fit;
mod io;

pub use fit::{
    fit_bubble_powerlaw, fit_inverse_map, fit_platform_poly, r_squared, Fit, PowerLawSolver,
};
pub use io::{
    load_model_file, load_samples, read_model, read_samples, save_model_file, write_model,
    write_samples, ModelFile, SampleKind,
};

/// A value computed after clamping its input to a validity domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clamped {
    pub value: f64,
    pub clamped: bool,
}

fn clamp_to(x: f64, lo: f64, hi: f64) -> (f64, bool) {
    if x < lo {
        (lo, true)
    } else if x > hi {
        (hi, true)
    } else {
        (x, false)
    }
}

/// Platform displacement→force model `F = k2·x² + k1·x + k0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlatformModel {
    /// N/mm²
    pub k2: f64,
    /// N/mm
    pub k1: f64,
    /// N
    pub k0: f64,
    /// Valid displacement range `[x_min, x_max]`, mm.
    pub domain: (f64, f64),
}

impl PlatformModel {
    pub fn new(k2: f64, k1: f64, k0: f64) -> Self {
        PlatformModel {
            k2,
            k1,
            k0,
            domain: (0.0, 10.0),
        }
    }

    /// Slope is linear in x, so checking both domain ends covers the domain.
    pub fn is_non_decreasing(&self) -> bool {
        let slope = |x: f64| 2.0 * self.k2 * x + self.k1;
        slope(self.domain.0) >= 0.0 && slope(self.domain.1) >= 0.0
    }

    pub fn force(&self, x: f64) -> f64 {
        eval_platform(self, x).value
    }

    /// Force range over the domain, `(F(x_min), F(x_max))`.
    pub fn force_range(&self) -> (f64, f64) {
        (self.force(self.domain.0), self.force(self.domain.1))
    }
}

/// `k2·x² + k1·x + k0` with `x` clamped to the model domain.
pub fn eval_platform(model: &PlatformModel, x: f64) -> Clamped {
    let (x, clamped) = clamp_to(x, model.domain.0, model.domain.1);
    Clamped {
        value: (model.k2 * x + model.k1) * x + model.k0,
        clamped,
    }
}

/// Force→displacement map `x = α·F² + β·F + γ` fitted to a platform model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversePlatformMap {
    /// mm/N²
    pub alpha: f64,
    /// mm/N
    pub beta: f64,
    /// mm
    pub gamma: f64,
    /// Valid force range, N.
    pub domain: (f64, f64),
}

impl InversePlatformMap {
    pub fn position(&self, force: f64) -> f64 {
        eval_inverse(self, force).value
    }
}

/// `α·F² + β·F + γ` with `F` clamped to the map's force domain.
pub fn eval_inverse(map: &InversePlatformMap, force: f64) -> Clamped {
    let (f, clamped) = clamp_to(force, map.domain.0, map.domain.1);
    Clamped {
        value: (map.alpha * f + map.beta) * f + map.gamma,
        clamped,
    }
}

/// Bubble pressure→force model `F = a·P^b + c2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleModel {
    /// N/kPa^b
    pub a: f64,
    pub b: f64,
    /// N
    pub c2: f64,
    /// Maximum chamber pressure, kPa. The domain is `[0, p_max]`.
    pub p_max: f64,
}

impl BubbleModel {
    pub fn new(a: f64, b: f64, c2: f64) -> Self {
        BubbleModel {
            a,
            b,
            c2,
            p_max: 41.0,
        }
    }

    pub fn force(&self, pressure: f64) -> f64 {
        eval_bubble(self, pressure).value
    }

    /// Force at full pressure, the chamber's force ceiling.
    pub fn max_force(&self) -> f64 {
        self.force(self.p_max)
    }

    pub fn is_valid(&self) -> bool {
        self.a > 0.0 && self.b > 0.0 && self.p_max > 0.0
    }

    /// True when the force over `[0, p_max]` stays inside `[lo − tol, hi + tol]`
    /// above the chamber's rest force `c2`.
    pub fn within_force_span(&self, lo: f64, hi: f64, tol: f64) -> bool {
        self.c2 >= 0.0 - tol && self.c2 <= lo + tol && self.max_force() <= hi + tol
    }
}

/// `a·P^b + c2` with `P` clamped to `[0, p_max]`.
pub fn eval_bubble(model: &BubbleModel, pressure: f64) -> Clamped {
    let (p, clamped) = clamp_to(pressure, 0.0, model.p_max);
    Clamped {
        value: model.a * p.powf(model.b) + model.c2,
        clamped,
    }
}

/// `((F − c2)/a)^(1/b)` with `F` clamped to the model's force range.
/// Forces below `c2` give 0 kPa; above the ceiling give `p_max`.
pub fn invert_bubble(model: &BubbleModel, force: f64) -> Clamped {
    if force < model.c2 {
        return Clamped {
            value: 0.0,
            clamped: true,
        };
    }
    let ceiling = model.max_force();
    if force > ceiling {
        return Clamped {
            value: model.p_max,
            clamped: true,
        };
    }
    Clamped {
        value: ((force - model.c2) / model.a).powf(1.0 / model.b),
        clamped: false,
    }
}
