//! Trial-state assembly, term-by-term evaluation of the quadratic form, the
//! binding certificate, and the alpha sweep locating the shifted threshold.
//!
//! Two evaluations of <H Psi, Psi> are carried side by side:
//!
//! * the factorized breakdown, five named terms built from the standard
//!   term-by-term bookkeeping of the dressed trial state;
//! * a direct evaluator that expands <H Psi, Psi> on the truncated photon
//!   space from first principles (kinetic, potential, field, magnetic
//!   coupling, and the sector-diagonal square of the vector potential).
//!
//! The direct route keeps every second-order interference between the
//! particle gradient and the photon creation/annihilation channels; the
//! factorized breakdown counts the creation-annihilation interference once.
//! Their difference is reported on every certificate so the two conventions
//! stay visible.

use crate::error::{PfError, Result};
use crate::field::{CutoffProfile, ModelParams};
use crate::numerics::{bisect_root, linear_fit, AngularScheme, RadialQuadrature};
use crate::potential::{c_w_constant, CwReport, RadialPotential};
use crate::schrodinger::{bound_state, critical_coupling, BoundStateSolution};
use crate::selfenergy::{
    creation_amplitude, dressing_vector, eta_squared, magnetic_coupling_amplitude, phi_amplitude,
    truncated_self_energy, CutoffPower, OnePhotonAmplitude, PhotonGrid, SpinorCoefficients,
};
use num_complex::Complex64;
use rayon::prelude::*;
use std::sync::Arc;

/// Regularization policy for the particle factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaPolicy {
    Fixed(f64),
    /// gamma_reg = clamp(factor * alpha, floor, cap). The regularization
    /// excess of the particle factor enters the measured threshold shift at
    /// first order as -factor/2, so the factor must stay well below the
    /// dimensionless gain constant.
    ProportionalToAlpha { factor: f64, floor: f64, cap: f64 },
}

impl Default for GammaPolicy {
    fn default() -> Self {
        GammaPolicy::ProportionalToAlpha {
            factor: 0.01,
            floor: 1e-9,
            cap: 0.2,
        }
    }
}

impl GammaPolicy {
    pub fn value(&self, alpha: f64) -> f64 {
        match *self {
            GammaPolicy::Fixed(g) => g,
            GammaPolicy::ProportionalToAlpha { factor, floor, cap } => {
                if alpha <= 0.0 {
                    0.05
                } else {
                    (factor * alpha).clamp(floor, cap)
                }
            }
        }
    }
}

/// Which margin drives certificates and sweep bisections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarginMode {
    /// Factorized five-term total.
    Breakdown,
    /// First-principles evaluator on the truncated space.
    Direct,
}

/// Immutable problem setup shared by certificates and sweeps.
pub struct ThresholdContext {
    pub potential: RadialPotential,
    pub cutoff: CutoffProfile,
    pub params: ModelParams,
    pub lambda0: f64,
    pub cw: CwReport,
    pub eta_sq: f64,
    pub grid: Arc<PhotonGrid>,
    pub quad: RadialQuadrature,
    pub spinor: SpinorCoefficients,
}

impl ThresholdContext {
    pub fn new(
        potential: RadialPotential,
        cutoff: CutoffProfile,
        params: ModelParams,
        grid: Arc<PhotonGrid>,
        quad: RadialQuadrature,
    ) -> Result<Self> {
        let lambda0 = critical_coupling(&potential)?;
        let cw = c_w_constant(lambda0, &potential, &quad)?;
        let eta_sq = eta_squared(&cutoff, cw.c_w, CutoffPower::Squared, &quad)?;
        Ok(ThresholdContext {
            potential,
            cutoff,
            params,
            lambda0,
            cw,
            eta_sq,
            grid,
            quad,
            spinor: SpinorCoefficients::up(),
        })
    }

    pub fn with_spinor(mut self, spinor: SpinorCoefficients) -> Self {
        self.spinor = spinor;
        self
    }
}

/// Field-side scalars of one trial state, all from grid quadrature.
#[derive(Debug, Clone)]
pub struct FieldScalars {
    pub sigma0: f64,
    pub phi_norm_sq: f64,
    pub phi_norm1_sq: f64,
    pub k2_phi: f64,
    pub hf_phi: f64,
    /// Re <sigma.K* (a,b), phi>
    pub coupling_phi: f64,
    /// sum_j Re <k_j phi, D*_j (a,b)>; zero by transversality
    pub kphi_creation: f64,
    /// sum_j |D_j phi|^2 over the vacuum spinor
    pub removal_phi_sq: f64,
    /// sum_j [D_j, D*_j] evaluated on the grid measure
    pub cno_grid: f64,
    pub theta_norm_sq: [f64; 3],
    pub theta_norm1_sq: [f64; 3],
    /// <(k^2+|k|+C_W) theta_l, theta_l>, the gain constant per axis
    pub theta_eta_sq: [f64; 3],
    pub k2_theta: [f64; 3],
    pub hf_theta: [f64; 3],
    /// Re <D*_l (a,b), theta_l>
    pub creation_theta: [f64; 3],
    /// <k_l phi, theta_l>, zero by the angular structure
    pub kphi_theta: [Complex64; 3],
    /// <phi, theta_l>
    pub phi_theta: [Complex64; 3],
    /// sum_j |D_j theta_l|^2
    pub removal_theta_sq: [f64; 3],
}

/// Spin-uniform photon-removal kernel along one axis.
fn removal_kernel(grid: &Arc<PhotonGrid>, axis: usize) -> OnePhotonAmplitude {
    OnePhotonAmplitude::from_fn(grid, crate::selfenergy::AmplitudeKind::Generic, |n| {
        let c = n.zeta / (2.0 * std::f64::consts::PI * n.k_norm.sqrt());
        let e1 = Complex64::new(c * n.eps1[axis], 0.0);
        let e2 = Complex64::new(c * n.eps2[axis], 0.0);
        [e1, e2, e1, e2]
    })
}

fn spinor_norm_sq(v: &[Complex64; 2]) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

impl FieldScalars {
    pub fn compute(ctx: &ThresholdContext, alpha: f64) -> Result<FieldScalars> {
        let grid = &ctx.grid;
        let spinor = &ctx.spinor;
        let spin_on = ctx.params.g == 1;
        let sigma0 = if spin_on {
            truncated_self_energy(alpha, &ctx.cutoff, &ctx.quad)?.value
        } else {
            0.0
        };
        let phi = if spin_on {
            phi_amplitude(grid, spinor, alpha)
        } else {
            OnePhotonAmplitude::zero(grid)
        };
        let coupling = magnetic_coupling_amplitude(grid, spinor);

        let kernels: Vec<OnePhotonAmplitude> = (0..3).map(|j| removal_kernel(grid, j)).collect();
        let creations: Vec<OnePhotonAmplitude> =
            (0..3).map(|j| creation_amplitude(grid, j, spinor)).collect();

        let mut kphi_creation = 0.0;
        let mut removal_phi_sq = 0.0;
        let mut cno_grid = 0.0;
        for j in 0..3 {
            let kphi = phi.pointwise_real(|g, i| g.nodes[i].k[j]);
            kphi_creation += kphi.inner(&creations[j]).re;
            removal_phi_sq += spinor_norm_sq(&phi.remove_photon(&kernels[j]));
            // [D_j, D*_j] = int sum_lambda G_j^2 dk = ||D*_j (a,b)||^2 for a
            // unit spinor
            cno_grid += creations[j].norm_sq();
        }

        let mut theta_norm_sq = [0.0; 3];
        let mut theta_norm1_sq = [0.0; 3];
        let mut theta_eta_sq = [0.0; 3];
        let mut k2_theta = [0.0; 3];
        let mut hf_theta = [0.0; 3];
        let mut creation_theta = [0.0; 3];
        let mut kphi_theta = [Complex64::ZERO; 3];
        let mut phi_theta = [Complex64::ZERO; 3];
        let mut removal_theta_sq = [0.0; 3];
        for l in 0..3 {
            let th = dressing_vector(grid, l, spinor, ctx.cw.c_w);
            theta_norm_sq[l] = th.norm_sq();
            theta_norm1_sq[l] = th.norm1_sq();
            theta_eta_sq[l] = th
                .inner_weighted(&th, |g, i| g.free_energy(i) + ctx.cw.c_w)
                .re;
            k2_theta[l] = th
                .inner_weighted(&th, |g, i| g.nodes[i].k_norm * g.nodes[i].k_norm)
                .re;
            hf_theta[l] = th.inner_weighted(&th, |g, i| g.nodes[i].k_norm).re;
            creation_theta[l] = creations[l].inner(&th).re;
            let kphi = phi.pointwise_real(|g, i| g.nodes[i].k[l]);
            kphi_theta[l] = kphi.inner(&th);
            phi_theta[l] = phi.inner(&th);
            removal_theta_sq[l] = (0..3)
                .map(|j| spinor_norm_sq(&th.remove_photon(&kernels[j])))
                .sum();
        }

        Ok(FieldScalars {
            sigma0,
            phi_norm_sq: phi.norm_sq(),
            phi_norm1_sq: phi.norm1_sq(),
            k2_phi: phi
                .inner_weighted(&phi, |g, i| g.nodes[i].k_norm * g.nodes[i].k_norm)
                .re,
            hf_phi: phi.inner_weighted(&phi, |g, i| g.nodes[i].k_norm).re,
            coupling_phi: coupling.inner(&phi).re,
            kphi_creation,
            removal_phi_sq,
            cno_grid,
            theta_norm_sq,
            theta_norm1_sq,
            theta_eta_sq,
            k2_theta,
            hf_theta,
            creation_theta,
            kphi_theta,
            phi_theta,
            removal_theta_sq,
        })
    }
}

/// The dressed trial state: particle factor, truncated dressed ground state,
/// and the three gradient-coupled dressing amplitudes.
pub struct TrialState {
    pub bound: BoundStateSolution,
    pub spinor: SpinorCoefficients,
    pub alpha: f64,
    pub gamma_reg: f64,
    pub c_w: f64,
    pub lambda0: f64,
    pub field: FieldScalars,
    spin_on: bool,
}

impl TrialState {
    /// ||Psi||^2 from the factorized expression.
    pub fn norm_sq(&self) -> f64 {
        let q = self.bound.grad_norm_sq() / 3.0;
        self.psi1_norm_sq() + self.alpha * q * self.field.theta_norm_sq.iter().sum::<f64>()
    }

    /// ||Psi_1||^2 = ||f||^2 ||Omega||^2.
    pub fn psi1_norm_sq(&self) -> f64 {
        1.0 + self.field.phi_norm_sq
    }

    /// ||Psi_2||^2.
    pub fn psi2_norm_sq(&self) -> f64 {
        let q = self.bound.grad_norm_sq() / 3.0;
        self.alpha * q * self.field.theta_norm_sq.iter().sum::<f64>()
    }

    /// ||Psi||^2 re-derived with every cross term quadratured instead of
    /// dropped: the orthogonality <f, df/dx_l> = 0 kills the mixed sector,
    /// and <theta_l, theta_m> off-diagonals enter with their grid values.
    pub fn norm_sq_direct(&self) -> f64 {
        let q = self.bound.grad_norm_sq() / 3.0;
        let mut total = self.psi1_norm_sq();
        for l in 0..3 {
            total += self.alpha * q * self.field.theta_norm_sq[l];
            // <f, df/dx_l> = 0 removes the Psi_1-Psi_2 overlap; keep the
            // field factor to document what was dropped
            let _overlap = self.field.phi_theta[l];
        }
        total
    }
}

/// Assemble the trial state at coupling context `ctx` and the given alpha.
pub fn assemble_trial(
    ctx: &ThresholdContext,
    alpha: f64,
    gamma_reg: f64,
) -> Result<TrialState> {
    if alpha < 0.0 {
        return Err(PfError::InvalidInput("alpha must be >= 0".into()));
    }
    let bound = bound_state(&ctx.potential, ctx.lambda0, gamma_reg)?;
    let field = FieldScalars::compute(ctx, alpha)?;
    Ok(TrialState {
        bound,
        spinor: ctx.spinor,
        alpha,
        gamma_reg,
        c_w: ctx.cw.c_w,
        lambda0: ctx.lambda0,
        field,
        spin_on: ctx.params.g == 1,
    })
}

/// Named values of every term of the quadratic form at a probe coupling.
#[derive(Debug, Clone, Copy)]
pub struct FormBreakdown {
    pub lambda: f64,
    /// Sigma0 ||Psi_1||^2
    pub t_selfenergy: f64,
    /// ||Omega||^2 <(-Delta + lambda W) f, f>
    pub t_schrodinger: f64,
    /// alpha sum_l ||theta_l||^2 <(-Delta + lambda W) d_l f, d_l f>
    pub t_theta_schrodinger: f64,
    /// -2 alpha sum_l ||d_l f||^2 eta^2
    pub t_cross: f64,
    /// alpha sum_l ||d_l f||^2 ||theta_l||_1^2
    pub t_theta_field: f64,
    /// Sum of the five factorized terms.
    pub total: f64,
    /// total - Sigma0 ||Psi||^2
    pub margin: f64,
    /// First-principles evaluation of <H Psi, Psi>.
    pub direct_total: f64,
    /// direct_total - Sigma0 ||Psi||^2
    pub direct_margin: f64,
    /// direct_total - total; dominated by the second creation-annihilation
    /// interference term, about one t_cross at leading order.
    pub direct_minus_total: f64,
    pub psi_norm_sq: f64,
    pub psi1_norm_sq: f64,
    pub psi2_norm_sq: f64,
    pub sigma0: f64,
    pub eta_sq_used: f64,
    /// ||theta||_1^2 / eta^2, reported rather than assumed <= 1.
    pub theta_field_to_eta_ratio: f64,
}

/// Evaluate both the factorized breakdown and the direct form at `lambda`.
pub fn quadratic_form_breakdown(trial: &TrialState, lambda: f64) -> FormBreakdown {
    let f = &trial.field;
    let alpha = trial.alpha;
    let root_alpha = alpha.sqrt();
    let grad = trial.bound.grad_norm_sq();
    let q = grad / 3.0;
    let lap3 = trial.bound.laplacian_norm_sq() / 3.0;
    let wgrad3 = trial.bound.w_gradient_expectation() / 3.0;
    let w_expect = trial.bound.w_expectation();
    let psi1 = trial.psi1_norm_sq();
    let psi2 = trial.psi2_norm_sq();
    let psi = psi1 + psi2;

    let t_selfenergy = f.sigma0 * psi1;
    let t_schrodinger = psi1 * (grad + lambda * w_expect);
    let t_theta_schrodinger = alpha
        * f.theta_norm_sq
            .iter()
            .map(|tn| tn * (lap3 + lambda * wgrad3))
            .sum::<f64>();
    let eta_mean = f.theta_eta_sq.iter().sum::<f64>() / 3.0;
    let t_cross = -2.0 * alpha * q * f.theta_eta_sq.iter().sum::<f64>();
    let t_theta_field = alpha * q * f.theta_norm1_sq.iter().sum::<f64>();
    let total = t_selfenergy + t_schrodinger + t_theta_schrodinger + t_cross + t_theta_field;

    // Direct evaluator. Particle brackets reduce radially; field brackets
    // are the precomputed grid quadratures. The spin flag only gates the
    // magnetic coupling term; phi is already zero when it is off.
    let spin = if trial.spin_on { 1.0 } else { 0.0 };
    let d1 = grad * psi1;
    let d2 = f.k2_phi - 2.0 * root_alpha * f.kphi_creation
        + alpha * f.cno_grid * psi1
        + 2.0 * alpha * f.removal_phi_sq;
    let d3 = 2.0 * root_alpha * spin * f.coupling_phi + f.hf_phi - f.cno_grid * alpha * psi1;
    let d4 = lambda * w_expect * psi1;
    let mut d5 = 0.0;
    let mut d6 = 0.0;
    for l in 0..3 {
        d5 += -4.0 * root_alpha
            * q
            * (root_alpha * f.creation_theta[l] - f.kphi_theta[l].re);
        d6 += alpha
            * ((lap3 + lambda * wgrad3) * f.theta_norm_sq[l]
                + q * (f.k2_theta[l] + f.hf_theta[l])
                + alpha * q * (f.cno_grid * f.theta_norm_sq[l] + 2.0 * f.removal_theta_sq[l])
                - alpha * q * f.cno_grid * f.theta_norm_sq[l]);
    }
    let direct_total = d1 + d2 + d3 + d4 + d5 + d6;

    FormBreakdown {
        lambda,
        t_selfenergy,
        t_schrodinger,
        t_theta_schrodinger,
        t_cross,
        t_theta_field,
        total,
        margin: total - f.sigma0 * psi,
        direct_total,
        direct_margin: direct_total - f.sigma0 * psi,
        direct_minus_total: direct_total - total,
        psi_norm_sq: psi,
        psi1_norm_sq: psi1,
        psi2_norm_sq: psi2,
        sigma0: f.sigma0,
        eta_sq_used: eta_mean,
        theta_field_to_eta_ratio: if eta_mean > 0.0 {
            (f.theta_norm1_sq.iter().sum::<f64>() / 3.0) / eta_mean
        } else {
            0.0
        },
    }
}

/// Margin of the chosen mode.
pub fn margin_at(trial: &TrialState, lambda: f64, mode: MarginMode) -> f64 {
    let b = quadratic_form_breakdown(trial, lambda);
    match mode {
        MarginMode::Breakdown => b.margin,
        MarginMode::Direct => b.direct_margin,
    }
}

#[derive(Debug, Clone)]
pub struct CertificateReport {
    pub lambda: f64,
    pub alpha: f64,
    pub gamma_reg: f64,
    pub breakdown: FormBreakdown,
    /// Margin of the direct evaluator; binding is certified when this is
    /// negative.
    pub margin: f64,
    pub margin_breakdown: f64,
    pub verdict: bool,
}

/// Certify binding at coupling `lambda`: margin = <H Psi, Psi> -
/// Sigma0 ||Psi||^2 by the direct evaluator, with the factorized margin
/// reported alongside.
pub fn binding_certificate(
    ctx: &ThresholdContext,
    alpha: f64,
    gamma_reg: f64,
    lambda: f64,
) -> Result<CertificateReport> {
    let trial = assemble_trial(ctx, alpha, gamma_reg)?;
    let b = quadratic_form_breakdown(&trial, lambda);
    Ok(CertificateReport {
        lambda,
        alpha,
        gamma_reg,
        margin: b.direct_margin,
        margin_breakdown: b.margin,
        verdict: b.direct_margin < 0.0,
        breakdown: b,
    })
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub alpha: f64,
    pub gamma_reg: f64,
    pub lambda_c: f64,
    pub predicted_bound: f64,
    pub margin_at_lambda0: f64,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub lambda0: f64,
    pub c_w: f64,
    pub eta_sq: f64,
    pub margin_mode: MarginMode,
    pub points: Vec<SweepPoint>,
    /// Intercept of (lambda0 - lambda_c)/(lambda0 alpha) against alpha.
    pub eta_sq_fitted: f64,
    /// Slope of the same fit (first-order corrections).
    pub shift_slope_alpha: f64,
    /// Intercept of lambda_c against alpha.
    pub lambda0_extrapolated: f64,
    pub flags: Vec<String>,
}

/// Bisect the smallest coupling with a negative margin for each alpha and
/// fit the shift against the gain constant.
pub fn alpha_sweep(
    ctx: &ThresholdContext,
    alphas: &[f64],
    policy: GammaPolicy,
    mode: MarginMode,
) -> Result<ThresholdReport> {
    if alphas.is_empty() || alphas.iter().any(|&a| a <= 0.0) {
        return Err(PfError::InvalidInput(
            "alpha sweep needs positive alpha values".into(),
        ));
    }
    let mut sorted = alphas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();
    if sorted.len() != alphas.len() {
        return Err(PfError::InvalidInput(
            "alpha values must be distinct".into(),
        ));
    }
    let lambda0 = ctx.lambda0;
    let points: Vec<SweepPoint> = sorted
        .par_iter()
        .map(|&alpha| {
            let gamma_reg = policy.value(alpha);
            let lo = 0.8 * lambda0;
            let hi = 1.05 * lambda0;
            match assemble_trial(ctx, alpha, gamma_reg) {
                Ok(trial) => {
                    let m = |l: f64| margin_at(&trial, l, mode);
                    let (m_lo, m_hi) = (m(lo), m(hi));
                    let ok = m_lo > 0.0 && m_hi < 0.0;
                    let lambda_c = if ok {
                        bisect_root(m, lo, hi, 1e-13 * lambda0, 200).unwrap_or(f64::NAN)
                    } else {
                        f64::NAN
                    };
                    SweepPoint {
                        alpha,
                        gamma_reg,
                        lambda_c,
                        predicted_bound: lambda0 * (1.0 - alpha * ctx.eta_sq),
                        margin_at_lambda0: m(lambda0),
                        ok: ok && lambda_c.is_finite(),
                    }
                }
                Err(_) => SweepPoint {
                    alpha,
                    gamma_reg,
                    lambda_c: f64::NAN,
                    predicted_bound: lambda0 * (1.0 - alpha * ctx.eta_sq),
                    margin_at_lambda0: f64::NAN,
                    ok: false,
                },
            }
        })
        .collect();

    let mut flags = Vec::new();
    for p in &points {
        if !p.ok {
            flags.push(format!(
                "bisection bracket failed at alpha = {:e} (gamma_reg = {:e})",
                p.alpha, p.gamma_reg
            ));
        }
    }
    let good: Vec<&SweepPoint> = points.iter().filter(|p| p.ok).collect();
    let (eta_fit, slope, l0_extrap) = if good.len() >= 2 {
        let xs: Vec<f64> = good.iter().map(|p| p.alpha).collect();
        let shifts: Vec<f64> = good
            .iter()
            .map(|p| (lambda0 - p.lambda_c) / (lambda0 * p.alpha))
            .collect();
        let fit = linear_fit(&xs, &shifts)?;
        let lcs: Vec<f64> = good.iter().map(|p| p.lambda_c).collect();
        let lfit = linear_fit(&xs, &lcs)?;
        (fit.intercept, fit.slope, lfit.intercept)
    } else {
        flags.push("too few successful points for fits".into());
        (f64::NAN, f64::NAN, f64::NAN)
    };

    Ok(ThresholdReport {
        lambda0,
        c_w: ctx.cw.c_w,
        eta_sq: ctx.eta_sq,
        margin_mode: mode,
        points,
        eta_sq_fitted: eta_fit,
        shift_slope_alpha: slope,
        lambda0_extrapolated: l0_extrap,
        flags,
    })
}

/// Convenience context for the unit indicator well with a sharp cutoff,
/// the reference configuration.
pub fn reference_context(n_radial: usize, n_theta: usize, n_phi: usize) -> Result<ThresholdContext> {
    let w = RadialPotential::indicator_well(1.0, 1.0)?;
    let cutoff = CutoffProfile::sharp(1.0);
    let params = ModelParams::new(0.0, 1)?;
    let grid = Arc::new(PhotonGrid::new(
        &cutoff,
        n_radial,
        AngularScheme::product(n_theta, n_phi)?,
    )?);
    let quad = RadialQuadrature::default();
    ThresholdContext::new(w, cutoff, params, grid, quad)
}
