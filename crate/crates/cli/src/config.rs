//! Flat sectioned key-value run configuration.
//!
//! Three sections drive a run: `[potential]`, `[cutoff]`, `[run]`. Unknown
//! keys are rejected so typos fail loudly before any output is produced.

use anyhow::{anyhow, bail, Context, Result};
use pfbind::field::CutoffProfile;
use pfbind::potential::{DecayParams, RadialPotential};
use pfbind::threshold::{GammaPolicy, MarginMode};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub potential_family: String,
    pub depth: f64,
    pub radius: f64,
    pub well_width: f64,
    pub profile_file: Option<PathBuf>,
    pub decay: Option<(f64, f64, f64)>,

    pub cutoff_variant: String,
    pub cutoff_lambda: f64,
    pub cutoff_width: f64,

    pub alpha: f64,
    pub alpha_list: Vec<f64>,
    /// None = policy-driven.
    pub gamma_reg: Option<f64>,
    pub gamma_factor: f64,
    /// Probe couplings for `certify`, as multiples of lambda0.
    pub lambda_factors: Vec<f64>,
    pub margin_mode: MarginMode,
    pub spin: u8,
    pub grid_radial: usize,
    pub grid_theta: usize,
    pub grid_phi: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            potential_family: "indicator-well".into(),
            depth: 1.0,
            radius: 1.0,
            well_width: 0.2,
            profile_file: None,
            decay: None,
            cutoff_variant: "sharp".into(),
            cutoff_lambda: 1.0,
            cutoff_width: 0.2,
            alpha: 1e-3,
            alpha_list: vec![],
            gamma_reg: None,
            gamma_factor: 0.01,
            lambda_factors: vec![1.0],
            margin_mode: MarginMode::Breakdown,
            spin: 1,
            grid_radial: 40,
            grid_theta: 12,
            grid_phi: 24,
            tol: 1e-10,
            seed: 42,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .with_context(|| format!("key `{key}`: cannot parse `{v}` as a number"))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',')
        .map(|s| parse_f64(key, s.trim()))
        .collect::<Result<Vec<_>>>()
}

impl RunConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut decay: BTreeMap<&str, f64> = BTreeMap::new();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| anyhow!("line {}: unterminated section header", lineno + 1))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            match (section.as_str(), key) {
                ("potential", "family") => cfg.potential_family = value.to_string(),
                ("potential", "depth") => cfg.depth = parse_f64(key, value)?,
                ("potential", "radius") => cfg.radius = parse_f64(key, value)?,
                ("potential", "width") => cfg.well_width = parse_f64(key, value)?,
                ("potential", "profile_file") => {
                    cfg.profile_file = Some(base_dir.join(value));
                }
                ("potential", "decay_a") => {
                    decay.insert("a", parse_f64(key, value)?);
                }
                ("potential", "decay_c") => {
                    decay.insert("c", parse_f64(key, value)?);
                }
                ("potential", "decay_delta") => {
                    decay.insert("delta", parse_f64(key, value)?);
                }
                ("cutoff", "variant") => cfg.cutoff_variant = value.to_string(),
                ("cutoff", "lambda") => cfg.cutoff_lambda = parse_f64(key, value)?,
                ("cutoff", "width") => cfg.cutoff_width = parse_f64(key, value)?,
                ("run", "alpha") => cfg.alpha = parse_f64(key, value)?,
                ("run", "alpha_list") => cfg.alpha_list = parse_list(key, value)?,
                ("run", "gamma_reg") => {
                    cfg.gamma_reg = if value == "auto" {
                        None
                    } else {
                        Some(parse_f64(key, value)?)
                    }
                }
                ("run", "gamma_factor") => cfg.gamma_factor = parse_f64(key, value)?,
                ("run", "lambda_factors") => cfg.lambda_factors = parse_list(key, value)?,
                ("run", "margin_mode") => {
                    cfg.margin_mode = match value {
                        "breakdown" => MarginMode::Breakdown,
                        "direct" => MarginMode::Direct,
                        other => bail!("margin_mode must be breakdown or direct, got `{other}`"),
                    }
                }
                ("run", "spin") => {
                    cfg.spin = value
                        .parse::<u8>()
                        .with_context(|| format!("bad spin flag `{value}`"))?
                }
                ("run", "grid_radial") => cfg.grid_radial = value.parse()?,
                ("run", "grid_theta") => cfg.grid_theta = value.parse()?,
                ("run", "grid_phi") => cfg.grid_phi = value.parse()?,
                ("run", "tol") => cfg.tol = parse_f64(key, value)?,
                ("run", "seed") => cfg.seed = value.parse()?,
                (sec, key) => bail!("unknown key `{key}` in section [{sec}]"),
            }
        }
        if decay.len() == 3 {
            cfg.decay = Some((decay["a"], decay["c"], decay["delta"]));
        } else if !decay.is_empty() {
            bail!("decay hypothesis needs all of decay_a, decay_c, decay_delta");
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    fn validate(&self) -> Result<()> {
        if self.tol <= 0.0 {
            bail!("tol must be > 0");
        }
        if self.alpha < 0.0 {
            bail!("alpha must be >= 0");
        }
        let mut seen = self.alpha_list.clone();
        seen.sort_by(|a, b| a.partial_cmp(b).unwrap());
        seen.dedup();
        if seen.len() != self.alpha_list.len() || self.alpha_list.iter().any(|&a| a <= 0.0) {
            bail!("alpha_list values must be distinct and positive");
        }
        if let Some(g) = self.gamma_reg {
            if !(0.0..1.0).contains(&g) {
                bail!("gamma_reg must lie in [0, 1)");
            }
        }
        if self.spin > 1 {
            bail!("spin must be 0 or 1");
        }
        match self.potential_family.as_str() {
            "indicator-well" | "smooth-well" => {}
            "tabulated" => {
                let f = self
                    .profile_file
                    .as_ref()
                    .ok_or_else(|| anyhow!("tabulated potential needs profile_file"))?;
                if !f.exists() {
                    bail!("profile file {} does not exist", f.display());
                }
                if self.decay.is_none() {
                    bail!("tabulated potential needs explicit decay parameters");
                }
            }
            other => bail!("unknown potential family `{other}`"),
        }
        match self.cutoff_variant.as_str() {
            "sharp" | "smooth-bump" => {}
            other => bail!("unknown cutoff variant `{other}`"),
        }
        Ok(())
    }

    pub fn build_potential(&self) -> Result<RadialPotential> {
        let mut w = match self.potential_family.as_str() {
            "indicator-well" => RadialPotential::indicator_well(self.depth, self.radius)?,
            "smooth-well" => {
                RadialPotential::smooth_well(self.depth, self.radius, self.well_width)?
            }
            "tabulated" => {
                let path = self.profile_file.as_ref().unwrap();
                let text = std::fs::read_to_string(path)?;
                let mut rs = Vec::new();
                let mut ws = Vec::new();
                for (lineno, raw) in text.lines().enumerate() {
                    let line = raw.split('#').next().unwrap_or("").trim();
                    if line.is_empty() {
                        continue;
                    }
                    let mut it = line.split_whitespace();
                    let r: f64 = it
                        .next()
                        .ok_or_else(|| anyhow!("profile line {}: missing radius", lineno + 1))?
                        .parse()?;
                    let v: f64 = it
                        .next()
                        .ok_or_else(|| anyhow!("profile line {}: missing value", lineno + 1))?
                        .parse()?;
                    rs.push(r);
                    ws.push(v);
                }
                let (a, c, delta) = self.decay.unwrap();
                RadialPotential::tabulated(rs, ws, DecayParams { a, c, delta })?
            }
            _ => unreachable!("validated"),
        };
        if let Some((a, c, delta)) = self.decay {
            w = w.with_decay(DecayParams { a, c, delta });
        }
        Ok(w)
    }

    pub fn build_cutoff(&self) -> CutoffProfile {
        match self.cutoff_variant.as_str() {
            "sharp" => CutoffProfile::sharp(self.cutoff_lambda),
            _ => CutoffProfile::smooth(self.cutoff_lambda, self.cutoff_width),
        }
    }

    pub fn gamma_policy(&self) -> GammaPolicy {
        match self.gamma_reg {
            Some(g) => GammaPolicy::Fixed(g),
            None => GammaPolicy::ProportionalToAlpha {
                factor: self.gamma_factor,
                floor: 1e-9,
                cap: 0.2,
            },
        }
    }

    /// Resolved key-value view embedded into every report.
    pub fn resolved_entries(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("potential.family".into(), self.potential_family.clone()),
            ("potential.depth".into(), format!("{:e}", self.depth)),
            ("potential.radius".into(), format!("{:e}", self.radius)),
        ];
        if self.potential_family == "smooth-well" {
            out.push(("potential.width".into(), format!("{:e}", self.well_width)));
        }
        if let Some(f) = &self.profile_file {
            out.push(("potential.profile_file".into(), f.display().to_string()));
        }
        if let Some((a, c, d)) = self.decay {
            out.push(("potential.decay_a".into(), format!("{a:e}")));
            out.push(("potential.decay_c".into(), format!("{c:e}")));
            out.push(("potential.decay_delta".into(), format!("{d:e}")));
        }
        out.push(("cutoff.variant".into(), self.cutoff_variant.clone()));
        out.push(("cutoff.lambda".into(), format!("{:e}", self.cutoff_lambda)));
        if self.cutoff_variant == "smooth-bump" {
            out.push(("cutoff.width".into(), format!("{:e}", self.cutoff_width)));
        }
        out.push(("run.alpha".into(), format!("{:e}", self.alpha)));
        if !self.alpha_list.is_empty() {
            out.push((
                "run.alpha_list".into(),
                self.alpha_list
                    .iter()
                    .map(|a| format!("{a:e}"))
                    .collect::<Vec<_>>()
                    .join(","),
            ));
        }
        out.push((
            "run.gamma_reg".into(),
            match self.gamma_reg {
                Some(g) => format!("{g:e}"),
                None => "auto".into(),
            },
        ));
        out.push(("run.gamma_factor".into(), format!("{:e}", self.gamma_factor)));
        out.push((
            "run.lambda_factors".into(),
            self.lambda_factors
                .iter()
                .map(|a| format!("{a:e}"))
                .collect::<Vec<_>>()
                .join(","),
        ));
        out.push((
            "run.margin_mode".into(),
            match self.margin_mode {
                MarginMode::Breakdown => "breakdown".into(),
                MarginMode::Direct => "direct".into(),
            },
        ));
        out.push(("run.spin".into(), self.spin.to_string()));
        out.push(("run.grid_radial".into(), self.grid_radial.to_string()));
        out.push(("run.grid_theta".into(), self.grid_theta.to_string()));
        out.push(("run.grid_phi".into(), self.grid_phi.to_string()));
        out.push(("run.tol".into(), format!("{:e}", self.tol)));
        out.push(("run.seed".into(), self.seed.to_string()));
        out
    }
}
