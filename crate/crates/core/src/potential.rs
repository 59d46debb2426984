//! Radial potentials, their positive part, the d-functionals controlling
//! quadratic-form bounds, the decay-hypothesis check, and the constant
//! C_W = lambda0^2 (1 + lambda0 d_{W+}) d_{W^2}.

use crate::error::{PfError, Result};
use crate::numerics::{integrate_radial_piecewise, RadialQuadrature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

/// Decay hypothesis |W(r)| <= c (1 + r)^{-2-delta} for r > a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayParams {
    pub a: f64,
    pub c: f64,
    pub delta: f64,
}

#[derive(Clone)]
enum Profile {
    /// W = -depth on [0, radius).
    IndicatorWell { depth: f64, radius: f64 },
    /// C^1 well: -depth inside, cubic smoothstep to 0 across [radius - width, radius].
    SmoothWell { depth: f64, radius: f64, width: f64 },
    /// Piecewise-linear table (r_i, W_i), zero beyond the last knot.
    Tabulated { rs: Arc<Vec<f64>>, ws: Arc<Vec<f64>> },
    /// Pointwise transform of a base profile.
    Mapped { base: Arc<Profile>, op: MapOp },
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum MapOp {
    PositivePart,
    Square,
    Abs,
}

impl Profile {
    fn value(&self, r: f64) -> f64 {
        match self {
            Profile::IndicatorWell { depth, radius } => {
                if r < *radius {
                    -depth
                } else {
                    0.0
                }
            }
            Profile::SmoothWell {
                depth,
                radius,
                width,
            } => {
                if r >= *radius {
                    0.0
                } else if r <= radius - width {
                    -depth
                } else {
                    let t = (r - (radius - width)) / width;
                    -depth * (1.0 - t * t * (3.0 - 2.0 * t))
                }
            }
            Profile::Tabulated { rs, ws } => {
                if rs.is_empty() || r > *rs.last().unwrap() {
                    return 0.0;
                }
                if r <= rs[0] {
                    return ws[0];
                }
                let idx = rs.partition_point(|&x| x < r);
                let (r0, r1) = (rs[idx - 1], rs[idx]);
                let (w0, w1) = (ws[idx - 1], ws[idx]);
                if r1 == r0 {
                    w1
                } else {
                    w0 + (w1 - w0) * (r - r0) / (r1 - r0)
                }
            }
            Profile::Mapped { base, op } => {
                let v = base.value(r);
                match op {
                    MapOp::PositivePart => v.max(0.0),
                    MapOp::Square => v * v,
                    MapOp::Abs => v.abs(),
                }
            }
        }
    }

    fn support_radius(&self) -> f64 {
        match self {
            Profile::IndicatorWell { radius, .. } => *radius,
            Profile::SmoothWell { radius, .. } => *radius,
            Profile::Tabulated { rs, .. } => rs.last().copied().unwrap_or(0.0),
            Profile::Mapped { base, .. } => base.support_radius(),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Profile::IndicatorWell { radius, .. } => vec![*radius],
            Profile::SmoothWell { radius, width, .. } => vec![radius - width, *radius],
            Profile::Tabulated { rs, .. } => rs.as_ref().clone(),
            Profile::Mapped { base, .. } => base.breakpoints(),
        }
    }
}

/// A radial potential W(r) with an evaluation cap and decay parameters.
#[derive(Clone)]
pub struct RadialPotential {
    profile: Profile,
    /// Evaluation domain cap; W is treated as 0 beyond its support radius.
    pub r_max: f64,
    pub decay: DecayParams,
}

impl RadialPotential {
    pub fn indicator_well(depth: f64, radius: f64) -> Result<Self> {
        if depth <= 0.0 || radius <= 0.0 {
            return Err(PfError::InvalidInput(
                "indicator well needs positive depth and radius".into(),
            ));
        }
        let profile = Profile::IndicatorWell { depth, radius };
        Ok(Self::with_default_decay(profile, 4.0 * radius))
    }

    pub fn smooth_well(depth: f64, radius: f64, width: f64) -> Result<Self> {
        if depth <= 0.0 || radius <= 0.0 || width <= 0.0 || width >= radius {
            return Err(PfError::InvalidInput(
                "smooth well needs 0 < width < radius and depth > 0".into(),
            ));
        }
        let profile = Profile::SmoothWell {
            depth,
            radius,
            width,
        };
        Ok(Self::with_default_decay(profile, 4.0 * radius))
    }

    /// Tabulated radial profile; radii must be strictly increasing.
    pub fn tabulated(rs: Vec<f64>, ws: Vec<f64>, decay: DecayParams) -> Result<Self> {
        if rs.len() != ws.len() || rs.len() < 2 {
            return Err(PfError::InvalidInput(
                "tabulated profile needs >= 2 matched rows".into(),
            ));
        }
        if rs.windows(2).any(|w| w[1] <= w[0]) || rs[0] < 0.0 {
            return Err(PfError::InvalidInput(
                "tabulated radii must be nonnegative and strictly increasing".into(),
            ));
        }
        let r_max = 4.0 * rs.last().unwrap();
        Ok(RadialPotential {
            profile: Profile::Tabulated {
                rs: Arc::new(rs),
                ws: Arc::new(ws),
            },
            r_max,
            decay,
        })
    }

    fn with_default_decay(profile: Profile, r_max: f64) -> Self {
        // Compactly supported profiles satisfy the decay bound trivially for
        // any c covering the interior values.
        let a = profile.support_radius();
        let sup = (0..512)
            .map(|i| profile.value(a * i as f64 / 511.0).abs())
            .fold(0.0, f64::max);
        let delta = 1.0;
        let c = (sup * (1.0 + a).powf(2.0 + delta)).max(1.0);
        RadialPotential {
            profile,
            r_max,
            decay: DecayParams { a, c, delta },
        }
    }

    pub fn with_decay(mut self, decay: DecayParams) -> Self {
        self.decay = decay;
        self
    }

    pub fn value(&self, r: f64) -> f64 {
        self.profile.value(r)
    }

    pub fn support_radius(&self) -> f64 {
        self.profile.support_radius()
    }

    /// Radii where the profile is non-smooth; quadrature and ODE segments
    /// split here.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.profile.breakpoints()
    }

    /// W+ = (|W| + W)/2.
    pub fn positive_part(&self) -> RadialPotential {
        self.mapped(MapOp::PositivePart)
    }

    /// W^2 as a potential.
    pub fn squared(&self) -> RadialPotential {
        self.mapped(MapOp::Square)
    }

    /// |W| as a potential.
    pub fn abs(&self) -> RadialPotential {
        self.mapped(MapOp::Abs)
    }

    fn mapped(&self, op: MapOp) -> RadialPotential {
        RadialPotential {
            profile: Profile::Mapped {
                base: Arc::new(self.profile.clone()),
                op,
            },
            r_max: self.r_max,
            decay: self.decay,
        }
    }

    /// Largest sampled |W| over the support (for brackets and diagnostics).
    pub fn sup_abs(&self) -> f64 {
        let top = self.support_radius();
        (0..2048)
            .map(|i| self.value(top * i as f64 / 2047.0).abs())
            .fold(0.0, f64::max)
    }

    /// True if W takes negative values somewhere.
    pub fn has_negative_part(&self) -> bool {
        let top = self.support_radius();
        (0..2048).any(|i| self.value(top * i as f64 / 2047.0) < -1e-300)
    }
}

/// Both branches of the d-functional and their selected minimum.
#[derive(Debug, Clone, Copy)]
pub struct DFunctionalReport {
    /// (1/2pi) (iint |v(x)||v(y)| / |x-y|^2 dx dy)^{1/2}
    pub double_integral_branch: f64,
    /// int_0^inf t |v(t)| dt (radial potentials only)
    pub radial_branch: Option<f64>,
    pub selected: f64,
}

/// d-functional of a radial potential.
///
/// The double-integral branch uses the angular identity
/// int_{S^2} dOmega_y / |x-y|^2 = (2 pi / (r s)) ln((r+s)/|r-s|),
/// which reduces the six-dimensional integral to
/// iint = 8 pi^2 iint r s |v(r)||v(s)| ln((r+s)/|r-s|) dr ds.
pub fn d_functional(v: &RadialPotential, quad: &RadialQuadrature) -> Result<DFunctionalReport> {
    let top = v.support_radius().min(v.r_max);
    let breaks = v.breakpoints();

    let radial = integrate_radial_piecewise(|t| t * v.value(t).abs(), 0.0, top, &breaks, quad)
        .map_err(|_| PfError::DivergentBranch { branch: "radial" })?
        .value;

    // Outer integral in r; the inner log singularity at s = r is integrable,
    // split there so the adaptive rule sees smooth endpoints.
    let inner_quad = RadialQuadrature {
        abs_tol: quad.abs_tol.max(1e-9),
        ..*quad
    };
    let inner = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let mut cuts = breaks.clone();
        cuts.push(r);
        let f = |s: f64| {
            if s <= 0.0 || (s - r).abs() < 1e-15 {
                return 0.0;
            }
            r * s * v.value(r).abs() * v.value(s).abs() * (((r + s) / (r - s).abs()).ln())
        };
        integrate_radial_piecewise(f, 0.0, top, &cuts, &inner_quad)
            .map(|q| q.value)
            .unwrap_or(f64::NAN)
    };
    let outer = integrate_radial_piecewise(inner, 0.0, top, &breaks, &inner_quad)
        .map_err(|_| PfError::DivergentBranch { branch: "double-integral" })?;
    if !outer.value.is_finite() {
        return Err(PfError::DivergentBranch {
            branch: "double-integral",
        });
    }
    // d = (1/2pi) sqrt(8 pi^2 I) = sqrt(2 I)
    let double_branch = (2.0 * outer.value).sqrt();

    Ok(DFunctionalReport {
        double_integral_branch: double_branch,
        radial_branch: Some(radial),
        selected: double_branch.min(radial),
    })
}

/// Monte Carlo estimate of the double-integral branch for a general (not
/// necessarily radial) potential supported in a ball of radius `support`.
/// Returns (value, standard error). Deterministic for a fixed seed.
pub fn d_functional_monte_carlo<F: Fn(&[f64; 3]) -> f64>(
    v: F,
    support: f64,
    samples: usize,
    seed: u64,
) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> [f64; 3] {
        loop {
            let p = [
                support * (2.0 * rng.gen::<f64>() - 1.0),
                support * (2.0 * rng.gen::<f64>() - 1.0),
                support * (2.0 * rng.gen::<f64>() - 1.0),
            ];
            if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= support * support {
                return p;
            }
        }
    };
    let vol = 4.0 / 3.0 * PI * support.powi(3);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let d2 = (0..3).map(|i| (x[i] - y[i]) * (x[i] - y[i])).sum::<f64>();
        if d2 < 1e-12 {
            continue;
        }
        let f = v(&x).abs() * v(&y).abs() / d2;
        sum += f;
        sum2 += f * f;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum2 / n - mean * mean).max(0.0) / n;
    let integral = vol * vol * mean;
    let integral_se = vol * vol * var.sqrt();
    // delta method through d = sqrt(I)/(2 pi)
    let d = integral.sqrt() / (2.0 * PI);
    let se = if integral > 0.0 {
        integral_se / (2.0 * integral.sqrt()) / (2.0 * PI)
    } else {
        0.0
    };
    (d, se)
}

#[derive(Debug, Clone, Copy)]
pub struct CwReport {
    pub d_w_plus: f64,
    pub d_w_squared: f64,
    pub c_w: f64,
}

/// C_W = lambda0^2 (1 + lambda0 d_{W+}) d_{W^2}.
pub fn c_w_constant(
    lambda0: f64,
    w: &RadialPotential,
    quad: &RadialQuadrature,
) -> Result<CwReport> {
    if lambda0 <= 0.0 {
        return Err(PfError::InvalidInput("lambda0 must be positive".into()));
    }
    let d_plus = d_functional(&w.positive_part(), quad)?.selected;
    let d_sq = d_functional(&w.squared(), quad)?.selected;
    Ok(CwReport {
        d_w_plus: d_plus,
        d_w_squared: d_sq,
        c_w: lambda0 * lambda0 * (1.0 + lambda0 * d_plus) * d_sq,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct DecayCheck {
    pub pass: bool,
    /// max over samples of |W(r)| / (c (1+r)^{-2-delta})
    pub worst_ratio: f64,
    pub worst_radius: f64,
}

/// Verify |W(r)| <= c (1+r)^{-2-delta} on a logarithmic grid in (a, r_max].
pub fn decay_check(w: &RadialPotential, samples: usize) -> DecayCheck {
    let DecayParams { a, c, delta } = w.decay;
    let lo = a.max(1e-6);
    let hi = w.r_max.max(lo * 1.0001);
    let mut worst = 0.0;
    let mut worst_r = lo;
    for i in 0..samples {
        let t = i as f64 / (samples.max(2) - 1) as f64;
        let r = lo * (hi / lo).powf(t);
        let bound = c * (1.0 + r).powf(-2.0 - delta);
        let ratio = w.value(r).abs() / bound;
        if ratio > worst {
            worst = ratio;
            worst_r = r;
        }
    }
    DecayCheck {
        pass: worst <= 1.0 + 1e-12,
        worst_ratio: worst,
        worst_radius: worst_r,
    }
}
