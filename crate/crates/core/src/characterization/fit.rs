use nalgebra::{DMatrix, DVector};

use super::{eval_bubble, BubbleModel, InversePlatformMap, PlatformModel};
use crate::{Error, Result};

/// A fitted model together with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fit<M> {
    pub model: M,
    pub r_squared: f64,
}

/// `1 − SS_res / SS_tot`. A zero-variance target gives 1 when the residuals
/// are all zero and 0 otherwise.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> f64 {
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let ss_tot: f64 = observed.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

fn distinct_count(xs: impl Iterator<Item = f64>) -> usize {
    let mut v: Vec<f64> = xs.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v.len()
}

/// Least-squares quadratic through `(x, y)` pairs, returns `[c2, c1, c0]`.
fn quadratic_lstsq(xs: &[f64], ys: &[f64]) -> Result<[f64; 3]> {
    if distinct_count(xs.iter().copied()) < 3 {
        return Err(Error::RankDeficient(
            "need at least 3 distinct abscissae for a quadratic".into(),
        ));
    }
    // Center and scale the abscissa so the Vandermonde matrix stays well
    // conditioned, then expand back.
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let a = DMatrix::from_fn(xs.len(), 3, |i, j| {
        let u = (xs[i] - mid) / half;
        u.powi(2 - j as i32)
    });
    let b = DVector::from_column_slice(ys);
    let sol = a
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    let (q2, q1, q0) = (sol[0], sol[1], sol[2]);
    // q2·((x−m)/h)² + q1·(x−m)/h + q0
    let c2 = q2 / (half * half);
    let c1 = q1 / half - 2.0 * q2 * mid / (half * half);
    let c0 = q0 - q1 * mid / half + q2 * mid * mid / (half * half);
    Ok([c2, c1, c0])
}

/// Least-squares quadratic `F(x)` through characterization samples `(x mm, F N)`.
/// The model domain is the sampled displacement range.
pub fn fit_platform_poly(samples: &[(f64, f64)]) -> Result<Fit<PlatformModel>> {
    if samples.len() < 3 {
        return Err(Error::RankDeficient(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let [k2, k1, k0] = quadratic_lstsq(&xs, &ys)?;
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let model = PlatformModel {
        k2,
        k1,
        k0,
        domain: (lo, hi),
    };
    let pred: Vec<f64> = xs.iter().map(|x| model.force(*x)).collect();
    Ok(Fit {
        model,
        r_squared: r_squared(&ys, &pred),
    })
}

/// Number of forward-model grid points used to fit the inverse map.
pub const INVERSE_GRID_POINTS: usize = 1001;

/// Fit `x = α·F² + β·F + γ` by least squares over a dense grid of the
/// forward model's displacement domain.
pub fn fit_inverse_map(model: &PlatformModel) -> Result<InversePlatformMap> {
    if !model.is_non_decreasing() {
        return Err(Error::InvalidParameter(
            "platform model must be non-decreasing on its domain".into(),
        ));
    }
    let (x0, x1) = model.domain;
    let (f0, f1) = model.force_range();
    if !(f1 - f0 > 1e-12) {
        return Err(Error::DegenerateModel(
            "platform force is constant over its domain".into(),
        ));
    }
    let n = INVERSE_GRID_POINTS;
    let xs: Vec<f64> = (0..n)
        .map(|i| x0 + (x1 - x0) * i as f64 / (n - 1) as f64)
        .collect();
    let fs: Vec<f64> = xs.iter().map(|x| model.force(*x)).collect();
    let [alpha, beta, gamma] = quadratic_lstsq(&fs, &xs)?;
    Ok(InversePlatformMap {
        alpha,
        beta,
        gamma,
        domain: (f0, f1),
    })
}

/// Damped Gauss-Newton settings for the power-law fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawSolver {
    pub max_iterations: usize,
    /// Converged when every parameter step is below this, relative to the parameter.
    pub step_tolerance: f64,
    /// Maximum step halvings per iteration.
    pub max_halvings: usize,
}

impl Default for PowerLawSolver {
    fn default() -> Self {
        PowerLawSolver {
            max_iterations: 100,
            step_tolerance: 1e-10,
            max_halvings: 40,
        }
    }
}

fn sse(model: &BubbleModel, samples: &[(f64, f64)]) -> f64 {
    samples
        .iter()
        .map(|(p, f)| {
            let r = model.a * p.powf(model.b) + model.c2 - f;
            r * r
        })
        .sum()
}

/// Power-law fit `F = a·P^b + c2` with the default solver settings.
pub fn fit_bubble_powerlaw(samples: &[(f64, f64)]) -> Result<Fit<BubbleModel>> {
    PowerLawSolver::default().fit(samples)
}

impl PowerLawSolver {
    /// Damped Gauss-Newton on `(a, b, c2)`, started from a log-log line through
    /// `(P, F − min F)`. `p_max` of the result is the largest sampled pressure.
    pub fn fit(&self, samples: &[(f64, f64)]) -> Result<Fit<BubbleModel>> {
        if samples.len() < 4 {
            return Err(Error::RankDeficient(format!(
                "need at least 4 samples, got {}",
                samples.len()
            )));
        }
        if samples
            .iter()
            .any(|(p, f)| !(p.is_finite() && f.is_finite() && *p >= 0.0))
        {
            return Err(Error::InvalidParameter(
                "pressures must be finite and >= 0".into(),
            ));
        }
        if distinct_count(samples.iter().map(|s| s.0).filter(|p| *p > 0.0)) < 3 {
            return Err(Error::RankDeficient(
                "need at least 3 distinct positive pressures".into(),
            ));
        }
        let p_max = samples.iter().map(|s| s.0).fold(0.0, f64::max);
        let f_min = samples.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);

        // log-log initialization
        let pts: Vec<(f64, f64)> = samples
            .iter()
            .filter(|(p, f)| *p > 0.0 && f - f_min > 0.0)
            .map(|(p, f)| (p.ln(), (f - f_min).ln()))
            .collect();
        let (mut a, mut b) = (1.0, 1.0);
        if distinct_count(pts.iter().map(|s| s.0)) >= 2 {
            let n = pts.len() as f64;
            let mx = pts.iter().map(|s| s.0).sum::<f64>() / n;
            let my = pts.iter().map(|s| s.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
            let slope = sxy / sxx;
            if slope > 0.0 {
                b = slope;
                a = (my - slope * mx).exp();
            }
        }
        let mut model = BubbleModel {
            a,
            b,
            c2: f_min,
            p_max,
        };
        let mut cost = sse(&model, samples);

        let m = samples.len();
        for _ in 0..self.max_iterations {
            let mut jac = DMatrix::zeros(m, 3);
            let mut res = DVector::zeros(m);
            for (i, (p, f)) in samples.iter().enumerate() {
                let pb = if *p > 0.0 { p.powf(model.b) } else { 0.0 };
                jac[(i, 0)] = pb;
                jac[(i, 1)] = if *p > 0.0 { model.a * pb * p.ln() } else { 0.0 };
                jac[(i, 2)] = 1.0;
                res[i] = f - (model.a * pb + model.c2);
            }
            let step = jac
                .svd(true, true)
                .solve(&res, 1e-14)
                .map_err(|e| Error::RankDeficient(e.to_string()))?;

            let params = [model.a, model.b, model.c2];
            let small = step
                .iter()
                .zip(params)
                .all(|(s, v)| s.abs() <= self.step_tolerance * v.abs().max(1e-3));
            if small {
                return finish(model, samples);
            }

            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..self.max_halvings {
                let trial = BubbleModel {
                    a: model.a + scale * step[0],
                    b: model.b + scale * step[1],
                    c2: model.c2 + scale * step[2],
                    p_max,
                };
                if trial.a > 0.0 && trial.b > 0.0 {
                    let c = sse(&trial, samples);
                    if c <= cost {
                        let stalled = cost - c <= 4.0 * f64::EPSILON * cost;
                        model = trial;
                        cost = c;
                        if stalled {
                            // Cost flat to rounding: a nonzero-residual minimum.
                            return finish(model, samples);
                        }
                        accepted = true;
                        break;
                    }
                }
                scale *= 0.5;
            }
            if !accepted {
                // No descent along the Gauss-Newton direction: at a minimum to
                // within floating-point resolution.
                return finish(model, samples);
            }
        }
        Err(Error::NotConverged {
            iterations: self.max_iterations,
        })
    }
}

fn finish(model: BubbleModel, samples: &[(f64, f64)]) -> Result<Fit<BubbleModel>> {
    if !model.is_valid() {
        return Err(Error::DegenerateModel(format!(
            "fitted power law has a={} b={}",
            model.a, model.b
        )));
    }
    let obs: Vec<f64> = samples.iter().map(|s| s.1).collect();
    let pred: Vec<f64> = samples
        .iter()
        .map(|s| eval_bubble(&model, s.0).value)
        .collect();
    Ok(Fit {
        model,
        r_squared: r_squared(&obs, &pred),
    })
}
