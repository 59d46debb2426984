//! The six batch commands: lambda0, eta2, sigma0, certify, sweep, selftest.

use crate::config::RunConfig;
use crate::report::{fnum, write_csv, Report};
use anyhow::{Context, Result};
use pfbind::field::{normal_ordering_constant, polarization_pair, ModelParams};
use pfbind::numerics::{angular_average, AngularScheme, RadialQuadrature};
use pfbind::potential::d_functional;
use pfbind::schrodinger::critical_coupling;
use pfbind::selfenergy::{
    coupling_strength, dressing_vector, energy_functional_with, eta_squared,
    magnetic_coupling_amplitude, minimize_energy_functional, phi_amplitude, truncated_self_energy,
    CutoffPower, OnePhotonAmplitude, PhotonGrid, SpinorCoefficients,
};
use pfbind::threshold::{alpha_sweep, binding_certificate, ThresholdContext};
use std::path::Path;
use std::sync::Arc;

fn quadrature(cfg: &RunConfig) -> RadialQuadrature {
    RadialQuadrature::with_tolerance(cfg.tol.min(1e-8))
}

fn grid(cfg: &RunConfig) -> Result<Arc<PhotonGrid>> {
    Ok(Arc::new(PhotonGrid::new(
        &cfg.build_cutoff(),
        cfg.grid_radial,
        AngularScheme::product(cfg.grid_theta, cfg.grid_phi)?,
    )?))
}

fn context(cfg: &RunConfig) -> Result<ThresholdContext> {
    let w = cfg.build_potential()?;
    let cutoff = cfg.build_cutoff();
    let params = ModelParams::new(cfg.alpha.max(0.0), cfg.spin)?;
    Ok(ThresholdContext::new(
        w,
        cutoff,
        params,
        grid(cfg)?,
        quadrature(cfg),
    )?)
}

fn config_section(report: &mut Report, cfg: &RunConfig) {
    let sec = report.section("config");
    for (k, v) in cfg.resolved_entries() {
        sec.push((k, v));
    }
}

pub fn cmd_lambda0(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let w = cfg.build_potential()?;
    let lambda0 = critical_coupling(&w)?;
    let mut rep = Report::new("lambda0");
    config_section(&mut rep, cfg);
    let sec = rep.section("results");
    Report::push_kv(sec, "lambda0", fnum(lambda0));
    rep.write(out, "lambda0_report.txt")?;
    println!("lambda0 = {lambda0:.10e}");
    Ok(true)
}

pub fn cmd_eta2(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let w = cfg.build_potential()?;
    let cutoff = cfg.build_cutoff();
    let quad = quadrature(cfg);
    let lambda0 = critical_coupling(&w)?;
    let d_plus = d_functional(&w.positive_part(), &quad)?;
    let d_sq = d_functional(&w.squared(), &quad)?;
    let c_w = lambda0 * lambda0 * (1.0 + lambda0 * d_plus.selected) * d_sq.selected;
    let eta = eta_squared(&cutoff, c_w, CutoffPower::Squared, &quad)?;
    let eta_literal = eta_squared(&cutoff, c_w, CutoffPower::Literal, &quad)?;
    let eta_c0 = eta_squared(&cutoff, 0.0, CutoffPower::Squared, &quad)?;
    let c_no = normal_ordering_constant(&cutoff, &quad)?;

    let mut rep = Report::new("eta2");
    config_section(&mut rep, cfg);
    let sec = rep.section("results");
    Report::push_kv(sec, "lambda0", fnum(lambda0));
    Report::push_kv(sec, "d_wplus.double_branch", fnum(d_plus.double_integral_branch));
    Report::push_kv(
        sec,
        "d_wplus.radial_branch",
        fnum(d_plus.radial_branch.unwrap_or(f64::NAN)),
    );
    Report::push_kv(sec, "d_wplus.selected", fnum(d_plus.selected));
    Report::push_kv(sec, "d_w2.double_branch", fnum(d_sq.double_integral_branch));
    Report::push_kv(
        sec,
        "d_w2.radial_branch",
        fnum(d_sq.radial_branch.unwrap_or(f64::NAN)),
    );
    Report::push_kv(sec, "d_w2.selected", fnum(d_sq.selected));
    Report::push_kv(sec, "c_w", fnum(c_w));
    Report::push_kv(sec, "eta_sq", fnum(eta));
    Report::push_kv(sec, "eta_sq_literal_cutoff", fnum(eta_literal));
    Report::push_kv(sec, "eta_sq_cw0_diagnostic", fnum(eta_c0));
    Report::push_kv(sec, "normal_ordering_constant", fnum(c_no));
    rep.write(out, "eta2_report.txt")?;
    println!("eta^2(C_W) = {eta:.10e}, C_W = {c_w:.10e}");
    Ok(true)
}

pub fn cmd_sigma0(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let cutoff = cfg.build_cutoff();
    let quad = quadrature(cfg);
    let alpha = cfg.alpha;
    let s = truncated_self_energy(alpha, &cutoff, &quad)?;
    let inf_l = -alpha * s.coupling_at_zero;
    let gap = s.value - inf_l;
    let mut rep = Report::new("sigma0");
    config_section(&mut rep, cfg);
    let sec = rep.section("results");
    Report::push_kv(sec, "alpha", fnum(alpha));
    Report::push_kv(sec, "sigma0_truncated", fnum(s.value));
    Report::push_kv(sec, "fixed_point_iterations", s.iterations.to_string());
    Report::push_kv(sec, "coupling_strength_at_zero", fnum(s.coupling_at_zero));
    Report::push_kv(sec, "inf_energy_functional", fnum(inf_l));
    Report::push_kv(sec, "gap", fnum(gap));
    if alpha > 0.0 {
        Report::push_kv(sec, "gap_over_alpha_sq", fnum(gap / (alpha * alpha)));
    }
    rep.write(out, "sigma0_report.txt")?;
    println!("sigma0 = {:.10e} (inf L = {inf_l:.10e})", s.value);
    Ok(true)
}

pub fn cmd_certify(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let ctx = context(cfg)?;
    let gamma = cfg.gamma_policy().value(cfg.alpha);
    let mut rep = Report::new("certify");
    config_section(&mut rep, cfg);
    {
        let sec = rep.section("setup");
        Report::push_kv(sec, "lambda0", fnum(ctx.lambda0));
        Report::push_kv(sec, "c_w", fnum(ctx.cw.c_w));
        Report::push_kv(sec, "eta_sq", fnum(ctx.eta_sq));
        Report::push_kv(sec, "alpha", fnum(cfg.alpha));
        Report::push_kv(sec, "gamma_reg", fnum(gamma));
    }
    let mut all_certified = true;
    for (i, factor) in cfg.lambda_factors.iter().enumerate() {
        let lambda = factor * ctx.lambda0;
        let cert = binding_certificate(&ctx, cfg.alpha, gamma, lambda)?;
        let b = &cert.breakdown;
        let sec = rep.section(&format!("probe_{i}"));
        Report::push_kv(sec, "lambda_factor", fnum(*factor));
        Report::push_kv(sec, "lambda", fnum(lambda));
        Report::push_kv(sec, "t_selfenergy", fnum(b.t_selfenergy));
        Report::push_kv(sec, "t_schrodinger", fnum(b.t_schrodinger));
        Report::push_kv(sec, "t_theta_schrodinger", fnum(b.t_theta_schrodinger));
        Report::push_kv(sec, "t_cross", fnum(b.t_cross));
        Report::push_kv(sec, "t_theta_field", fnum(b.t_theta_field));
        Report::push_kv(sec, "total", fnum(b.total));
        Report::push_kv(sec, "margin_breakdown", fnum(b.margin));
        Report::push_kv(sec, "direct_total", fnum(b.direct_total));
        Report::push_kv(sec, "margin_direct", fnum(b.direct_margin));
        Report::push_kv(sec, "direct_minus_total", fnum(b.direct_minus_total));
        Report::push_kv(sec, "psi_norm_sq", fnum(b.psi_norm_sq));
        Report::push_kv(sec, "psi1_norm_sq", fnum(b.psi1_norm_sq));
        Report::push_kv(sec, "psi2_norm_sq", fnum(b.psi2_norm_sq));
        Report::push_kv(sec, "sigma0", fnum(b.sigma0));
        Report::push_kv(sec, "eta_sq_used", fnum(b.eta_sq_used));
        Report::push_kv(
            sec,
            "theta_field_to_eta_ratio",
            fnum(b.theta_field_to_eta_ratio),
        );
        Report::push_kv(sec, "certified", cert.verdict.to_string());
        println!(
            "lambda = {lambda:.8e}: margin_direct = {:+.6e}, margin_breakdown = {:+.6e} -> {}",
            cert.margin,
            cert.margin_breakdown,
            if cert.verdict { "BINDING" } else { "no certificate" }
        );
        all_certified &= cert.verdict;
    }
    rep.write(out, "certify_report.txt")?;
    Ok(all_certified)
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<bool> {
    let ctx = context(cfg)?;
    let alphas = if cfg.alpha_list.is_empty() {
        vec![1e-4, 2.5e-4, 6.3e-4, 1.6e-3, 4e-3, 1e-2]
    } else {
        cfg.alpha_list.clone()
    };
    let report = alpha_sweep(&ctx, &alphas, cfg.gamma_policy(), cfg.margin_mode)?;
    let mut rep = Report::new("sweep");
    config_section(&mut rep, cfg);
    {
        let sec = rep.section("results");
        Report::push_kv(sec, "lambda0", fnum(report.lambda0));
        Report::push_kv(sec, "c_w", fnum(report.c_w));
        Report::push_kv(sec, "eta_sq", fnum(report.eta_sq));
        Report::push_kv(sec, "eta_sq_fitted_intercept", fnum(report.eta_sq_fitted));
        Report::push_kv(sec, "shift_slope_alpha", fnum(report.shift_slope_alpha));
        Report::push_kv(
            sec,
            "lambda0_extrapolated",
            fnum(report.lambda0_extrapolated),
        );
        Report::push_kv(sec, "points", report.points.len().to_string());
        Report::push_kv(sec, "flags", report.flags.len().to_string());
    }
    for (i, f) in report.flags.iter().enumerate() {
        let sec = rep.section(&format!("flag_{i}"));
        Report::push_kv(sec, "message", f.clone());
    }
    for (i, p) in report.points.iter().enumerate() {
        let sec = rep.section(&format!("point_{i}"));
        Report::push_kv(sec, "alpha", fnum(p.alpha));
        Report::push_kv(sec, "gamma_reg", fnum(p.gamma_reg));
        Report::push_kv(sec, "lambda_c", fnum(p.lambda_c));
        Report::push_kv(sec, "predicted_bound", fnum(p.predicted_bound));
        Report::push_kv(sec, "margin_at_lambda0", fnum(p.margin_at_lambda0));
        Report::push_kv(sec, "ok", p.ok.to_string());
    }
    rep.write(out, "sweep_report.txt")?;
    let rows: Vec<Vec<f64>> = report
        .points
        .iter()
        .map(|p| vec![p.alpha, p.lambda_c, p.predicted_bound])
        .collect();
    write_csv(out, "sweep.csv", "alpha,lambda_c,predicted_bound", &rows)?;
    println!(
        "sweep: lambda0 = {:.8e}, fitted eta^2 = {:.6e} (reference {:.6e}), {} flags",
        report.lambda0,
        report.eta_sq_fitted,
        report.eta_sq,
        report.flags.len()
    );
    Ok(report.flags.is_empty())
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

pub fn cmd_selftest(cfg: &RunConfig, out: &Path) -> Result<bool> {
    use pfbind::field::CutoffProfile;
    let quad = RadialQuadrature::default();
    let cutoff = CutoffProfile::sharp(1.0);
    let coarse = Arc::new(PhotonGrid::new(
        &cutoff,
        16,
        AngularScheme::product(6, 12)?,
    )?);
    let spinor = SpinorCoefficients::up();
    let mut checks: Vec<Check> = Vec::new();

    {
        let (e1, e2) = polarization_pair(&[0.3, -0.4, 0.8])?;
        let dot = e1[0] * e2[0] + e1[1] * e2[1] + e1[2] * e2[2];
        let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
        checks.push(check(
            "polarization_orthonormal",
            dot.abs() < 1e-13 && (n1 - 1.0).abs() < 1e-13,
            format!("dot = {dot:.2e}"),
        ));
    }
    {
        let s = AngularScheme::product(8, 16)?;
        let m = angular_average(|k| 1.0 - k[2] * k[2], &s);
        checks.push(check(
            "angular_transverse_average",
            (m - 2.0 / 3.0).abs() < 1e-13,
            format!("<1-k3^2> = {m:.15}"),
        ));
    }
    {
        let c = normal_ordering_constant(&cutoff, &quad)?;
        let expect = 1.0 / std::f64::consts::PI;
        checks.push(check(
            "normal_ordering_sharp",
            (c - expect).abs() < 1e-10,
            format!("c = {c:.12}"),
        ));
    }
    {
        let w = pfbind::potential::RadialPotential::indicator_well(1.0, 1.0)?;
        let l0 = critical_coupling(&w)?;
        let expect = std::f64::consts::PI.powi(2) / 4.0;
        checks.push(check(
            "critical_coupling_unit_well",
            ((l0 - expect) / expect).abs() < 1e-6,
            format!("lambda0 = {l0:.10}"),
        ));
    }
    {
        let eta = eta_squared(&cutoff, 0.0, CutoffPower::Squared, &quad)?;
        let expect = 2.0 / (3.0 * std::f64::consts::PI) * std::f64::consts::LN_2;
        checks.push(check(
            "eta_sq_closed_form",
            ((eta - expect) / expect).abs() < 1e-8,
            format!("eta^2 = {eta:.12}"),
        ));
    }
    {
        let alpha = 0.01;
        let coupling = magnetic_coupling_amplitude(&coarse, &spinor);
        let g = coupling.pointwise_real(|gr, i| 1.0 / gr.free_energy(i));
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for seed in 0..5u64 {
            let xi = OnePhotonAmplitude::from_fn(
                &coarse,
                pfbind::selfenergy::AmplitudeKind::Generic,
                |n| {
                    let t = (seed as f64 + 1.0) * 0.37;
                    std::array::from_fn(|c| {
                        pfbind::num_complex::Complex64::new(
                            n.zeta * (n.k[c % 3] + t).sin(),
                            n.zeta * (n.k_norm * t).cos() * 0.3,
                        )
                    })
                },
            );
            let lhs = energy_functional_with(&xi, &coupling, alpha);
            let shifted = xi.add_scaled(pfbind::num_complex::Complex64::new(alpha.sqrt(), 0.0), &g);
            let rhs = shifted.norm1_sq() - alpha * g.norm1_sq();
            let scale = xi.norm1_sq().max(1e-300);
            worst = worst.max(((lhs - rhs) / scale).abs());
            ok &= ((lhs - rhs) / scale).abs() < 1e-10;
        }
        checks.push(check(
            "completing_the_square",
            ok,
            format!("worst relative {worst:.2e}"),
        ));
    }
    {
        let alpha = 0.01;
        let phi = phi_amplitude(&coarse, &spinor, alpha);
        let coupling = magnetic_coupling_amplitude(&coarse, &spinor);
        let expect = coupling.pointwise_real(|gr, i| -alpha.sqrt() / gr.free_energy(i));
        let mut worst: f64 = 0.0;
        for (a, b) in phi.values.iter().zip(&expect.values) {
            for c in 0..4 {
                worst = worst.max((a[c] - b[c]).norm());
            }
        }
        checks.push(check(
            "minimizer_matches_kernel_route",
            worst < 1e-12,
            format!("pointwise {worst:.2e}"),
        ));
    }
    {
        let alpha = 0.01;
        let s = truncated_self_energy(alpha, &cutoff, &quad)?;
        let f0 = coupling_strength(0.0, &cutoff, &quad)?;
        let ok = s.value > -alpha * f0 && s.value < -0.98 * alpha * f0;
        checks.push(check(
            "self_energy_fixed_point",
            ok,
            format!("sigma0 = {:.6e}", s.value),
        ));
    }
    {
        let c_w = std::f64::consts::PI.powi(4) / 32.0;
        let t0 = dressing_vector(&coarse, 0, &spinor, c_w);
        let t1 = dressing_vector(&coarse, 1, &spinor, c_w);
        let cross = t0.inner(&t1).norm();
        let eta_grid = t0
            .inner_weighted(&t0, |g, i| g.free_energy(i) + c_w)
            .re;
        let eta_int = eta_squared(&cutoff, c_w, CutoffPower::Squared, &quad)?;
        checks.push(check(
            "dressing_orthogonality_and_norm",
            cross < 1e-12 * t0.norm_sq() && ((eta_grid - eta_int) / eta_int).abs() < 1e-6,
            format!("cross {cross:.2e}, norms {eta_grid:.8e} vs {eta_int:.8e}"),
        ));
    }
    {
        let rep = minimize_energy_functional(&coarse, &spinor, 0.01);
        checks.push(check(
            "descent_minimizer",
            rep.descent_converged && (rep.gamma_coeff - 1.0).abs() < 1e-8,
            format!("gamma = {:.10}", rep.gamma_coeff),
        ));
    }

    let mut rep = Report::new("selftest");
    config_section(&mut rep, cfg);
    let mut all = true;
    {
        let sec = rep.section("checks");
        for c in &checks {
            all &= c.pass;
            Report::push_kv(
                sec,
                c.name,
                format!("{} ({})", if c.pass { "PASS" } else { "FAIL" }, c.detail),
            );
        }
    }
    for c in &checks {
        println!(
            "selftest {}: {} ({})",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
    }
    rep.write(out, "selftest_report.txt")?;
    Ok(all)
}

pub fn dispatch(name: &str, cfg: &RunConfig, out: &Path) -> Result<bool> {
    match name {
        "lambda0" => cmd_lambda0(cfg, out),
        "eta2" => cmd_eta2(cfg, out),
        "sigma0" => cmd_sigma0(cfg, out),
        "certify" => cmd_certify(cfg, out),
        "sweep" => cmd_sweep(cfg, out),
        "selftest" => cmd_selftest(cfg, out),
        other => anyhow::bail!("unknown command `{other}`"),
    }
    .with_context(|| format!("command {name} failed"))
}
