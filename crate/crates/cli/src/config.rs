//! Experiment configuration: a single JSON document, resolved against
//! defaults and validated before anything runs.

use std::fmt;

use clap::ValueEnum;
use rough_laplace::fbm::{window_violations, HurstParams};
use rough_laplace::functional::{FieldSpec, FunctionalSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    Lift,
    Pvar,
    Rde,
    TaylorSlope,
    Hessian,
    Laplace,
    ScaleTest,
    Kappa,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        Self::Simulate,
        Self::Lift,
        Self::Pvar,
        Self::Rde,
        Self::TaylorSlope,
        Self::Hessian,
        Self::Laplace,
        Self::ScaleTest,
        Self::Kappa,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Simulate => "simulate",
            Self::Lift => "lift",
            Self::Pvar => "pvar",
            Self::Rde => "rde",
            Self::TaylorSlope => "taylor-slope",
            Self::Hessian => "hessian",
            Self::Laplace => "laplace",
            Self::ScaleTest => "scale-test",
            Self::Kappa => "kappa",
        }
    }

    fn uses_field(self) -> bool {
        matches!(self, Self::Rde | Self::TaylorSlope | Self::Hessian | Self::Laplace | Self::ScaleTest)
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The configuration as written by the user; every field except `kind` may
/// be omitted.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub hurst: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub grid_steps: Option<usize>,
    /// State dimension; checked against the field.
    pub n: Option<usize>,
    /// Noise dimension; checked against the field.
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub eps_list: Option<Vec<f64>>,
    /// Number of Cameron–Martin basis elements `N` (a multiple of `d`).
    pub truncation: Option<usize>,
    pub samples: Option<usize>,
    pub field: Option<FieldSpec>,
    pub f: Option<FunctionalSpec>,
    pub g: Option<FunctionalSpec>,
    pub y0: Option<Vec<f64>>,
    /// Lift level (2 or 3).
    pub level: Option<usize>,
    pub p_list: Option<Vec<f64>>,
    /// Number of ladder entries.
    pub count: Option<usize>,
    /// Short-time horizon `T`.
    pub horizon: Option<f64>,
    pub hs_truncations: Option<Vec<usize>>,
    pub fit_degree: Option<usize>,
    /// Taylor-slope ensemble size.
    pub drivers: Option<usize>,
}

/// Fully resolved configuration. Its JSON serialisation is what the run
/// hash covers, so every field that can change a number lives here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedConfig {
    pub kind: ExperimentKind,
    pub hurst: f64,
    pub p: f64,
    pub q: f64,
    pub grid_steps: usize,
    pub n: usize,
    pub d: usize,
    pub seed: u64,
    pub eps_list: Vec<f64>,
    pub truncation: usize,
    pub samples: usize,
    pub field: FieldSpec,
    pub f: FunctionalSpec,
    pub g: FunctionalSpec,
    pub y0: Vec<f64>,
    pub level: usize,
    pub p_list: Vec<f64>,
    pub count: usize,
    pub horizon: f64,
    pub hs_truncations: Vec<usize>,
    pub fit_degree: usize,
    pub drivers: usize,
}

/// Every violated constraint of a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub Vec<String>);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem{}):", self.0.len(), if self.0.len() == 1 { "" } else { "s" })?;
        for v in &self.0 {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn default_eps(kind: ExperimentKind) -> Vec<f64> {
    match kind {
        ExperimentKind::TaylorSlope => rough_laplace::taylor::default_eps_list(),
        ExperimentKind::Laplace => vec![0.5, 0.35, 0.25, 0.18, 0.125],
        _ => vec![0.5, 0.25, 0.125],
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(vec![format!("cannot parse configuration: {e}")]))
    }

    /// Fills defaults and checks every constraint, reporting all failures at once.
    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        let mut errs = Vec::new();
        let Some(kind) = self.kind else {
            return Err(ConfigError(vec!["experiment kind is missing".into()]));
        };
        let hurst = self.hurst.unwrap_or(0.4);
        let (p, q) = match HurstParams::new(hurst) {
            Ok(def) => {
                let (p, q) = (self.p.unwrap_or(def.p), self.q.unwrap_or(def.q));
                errs.extend(window_violations(hurst, p, q));
                (p, q)
            }
            Err(e) => {
                errs.push(e.to_string());
                (self.p.unwrap_or(f64::NAN), self.q.unwrap_or(f64::NAN))
            }
        };

        let field = self.field.clone().unwrap_or(FieldSpec::TanhStandard);
        let (mut n, mut d) = (self.n.unwrap_or(2), self.d.unwrap_or(2));
        if kind.uses_field() {
            match field.build() {
                Ok(f) => {
                    for (name, given, actual) in [("n", self.n, f.state_dim()), ("d", self.d, f.noise_dim())] {
                        if let Some(g) = given {
                            if g != actual {
                                errs.push(format!("{name} = {g} but the field has {name} = {actual}"));
                            }
                        }
                    }
                    n = f.state_dim();
                    d = f.noise_dim();
                }
                Err(e) => errs.push(e.to_string()),
            }
        }
        if n == 0 || d == 0 {
            errs.push("dimensions n and d must be positive".into());
        }

        let grid_steps = self.grid_steps.unwrap_or(64);
        if grid_steps < 2 {
            errs.push(format!("grid_steps must be at least 2, got {grid_steps}"));
        }
        let eps_list = self.eps_list.clone().unwrap_or_else(|| default_eps(kind));
        if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            errs.push("eps_list must be non-empty with positive finite entries".into());
        }
        let truncation = self.truncation.unwrap_or(4 * d);
        if truncation == 0 || d == 0 || !truncation.is_multiple_of(d) {
            errs.push(format!("truncation {truncation} must be a positive multiple of d = {d}"));
        }
        let samples = self.samples.unwrap_or(1000);
        if samples < 2 {
            errs.push(format!("samples must be at least 2, got {samples}"));
        }
        let default_f = FunctionalSpec::EndpointQuadratic {
            c0: 0.0,
            v: vec![0.5; n],
            q: (0..n * n).map(|k| if k % (n + 1) == 0 { 0.4 } else { 0.0 }).collect(),
        };
        let f = self.f.clone().unwrap_or(default_f);
        let g = self.g.clone().unwrap_or(FunctionalSpec::Constant { value: 1.0 });
        if matches!(kind, ExperimentKind::Hessian | ExperimentKind::Laplace) {
            for (name, spec) in [("f", &f), ("g", &g)] {
                if let Err(e) = spec.build(n) {
                    errs.push(format!("{name}: {e}"));
                }
            }
        }
        let y0 = self.y0.clone().unwrap_or_else(|| vec![0.0; n]);
        if y0.len() != n {
            errs.push(format!("y0 has {} entries, state dimension is {n}", y0.len()));
        }
        let level = self.level.unwrap_or(2);
        if !(2..=3).contains(&level) {
            errs.push(format!("lift level must be 2 or 3, got {level}"));
        }
        let p_list = self.p_list.clone().unwrap_or_else(|| vec![1.5, 2.0, 3.5]);
        if p_list.iter().any(|p| !(*p >= 1.0)) {
            errs.push("every entry of p_list must be at least 1".into());
        }
        let count = self.count.unwrap_or(9);
        let horizon = self.horizon.unwrap_or(0.25);
        let hs_truncations = self.hs_truncations.clone().unwrap_or_else(|| vec![8, 16, 32]);
        let fit_degree = self.fit_degree.unwrap_or(1);
        let drivers = self.drivers.unwrap_or(16);

        match kind {
            ExperimentKind::Kappa => {
                if !(hurst > 0.25 && hurst < 0.5) || (hurst - 1.0 / 3.0).abs() < 1e-12 {
                    errs.push(format!("kappa ladder needs H in (1/4, 1/3) ∪ (1/3, 1/2), got {hurst}"));
                }
                if count == 0 {
                    errs.push("count must be positive".into());
                }
            }
            ExperimentKind::ScaleTest => {
                let coarse = horizon * grid_steps as f64;
                if !(horizon > 0.0 && horizon <= 1.0) {
                    errs.push(format!("horizon {horizon} outside (0, 1]"));
                } else if (coarse - coarse.round()).abs() > 1e-9 || coarse.round() < 2.0 {
                    errs.push(format!("horizon · grid_steps = {coarse} must be an integer of at least 2"));
                }
            }
            ExperimentKind::TaylorSlope => {
                if eps_list.len() < 4 {
                    errs.push(format!("taylor-slope needs at least 4 ε values, got {}", eps_list.len()));
                }
                if drivers == 0 {
                    errs.push("drivers must be positive".into());
                }
            }
            ExperimentKind::Hessian => {
                if hs_truncations.iter().copied().max().unwrap_or(0) < 8 {
                    errs.push("the largest entry of hs_truncations must be at least 8".into());
                }
            }
            ExperimentKind::Laplace
                if eps_list.len() < fit_degree + 1 => {
                    errs.push(format!("fit of degree {fit_degree} needs at least {} ε values", fit_degree + 1));
                }
            _ => {}
        }
        if !errs.is_empty() {
            return Err(ConfigError(errs));
        }
        Ok(ResolvedConfig {
            kind,
            hurst,
            p,
            q,
            grid_steps,
            n,
            d,
            seed: self.seed.unwrap_or(0),
            eps_list,
            truncation,
            samples,
            field,
            f,
            g,
            y0,
            level,
            p_list,
            count,
            horizon,
            hs_truncations,
            fit_degree,
            drivers,
        })
    }
}

impl ResolvedConfig {
    pub fn params(&self) -> HurstParams {
        HurstParams::with_exponents(self.hurst, self.p, self.q).expect("validated")
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("serialisable");
        hex::encode(Sha256::digest(bytes))
    }
}
