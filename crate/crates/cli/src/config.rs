//! Run configuration: flat keys, layered as defaults < file < command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use heatbie::geometry::SHAPE_NAMES;
use heatbie::{make_shape, Curve, Mode, ReconConfig, ShapeParams, TikhonovNorm};
use serde::{Deserialize, Serialize};

/// How the linearised system is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSetting {
    /// Final-step for exact data, multi-step when `delta > 0`.
    #[default]
    Auto,
    FinalStep,
    MultiStep,
}

impl ModeSetting {
    pub fn resolve(self, delta: f64) -> Mode {
        match self {
            ModeSetting::Auto => Mode::for_noise(delta),
            ModeSetting::FinalStep => Mode::FinalStep,
            ModeSetting::MultiStep => Mode::MultiStep,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kappa: f64,
    pub alpha: f64,
    /// Highest Laguerre order `N`.
    pub n: usize,
    /// Half the number of quadrature nodes.
    pub m: usize,
    /// Degree `J` of the radial basis.
    pub j: usize,
    pub r0: f64,
    pub lambda0: f64,
    pub lambda_decay: f64,
    pub delta: f64,
    pub seed: u64,
    pub mode: ModeSetting,
    pub max_iters: usize,
    pub stop_tol: f64,
    pub tikhonov_norm: TikhonovNorm,
    /// Name of the curve the data are synthesised on (and compared with).
    pub inner: String,
    pub outer: String,
    /// Radius used when `inner` is `circle`.
    pub inner_radius: f64,
    /// Radius used when `outer` is `circle`.
    pub outer_radius: f64,
    /// Ratio of forward to inverse half node counts.
    pub forward_refinement: usize,
    /// Points per exported curve.
    pub curve_samples: usize,
    /// Cauchy data file read by `invert`; synthesised in memory when absent.
    pub data: Option<PathBuf>,
    /// Whether `invert` reports errors against the `inner` curve.
    pub compare_truth: bool,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            alpha: 1.0,
            n: 10,
            m: 64,
            j: 5,
            r0: 0.4,
            lambda0: 1e-4,
            lambda_decay: 0.9,
            delta: 0.0,
            seed: 0,
            mode: ModeSetting::Auto,
            max_iters: 50,
            stop_tol: 1e-6,
            tikhonov_norm: TikhonovNorm::L2,
            inner: "peanut".into(),
            outer: "circle".into(),
            inner_radius: 0.5,
            outer_radius: 1.0,
            forward_refinement: 2,
            curve_samples: 256,
            data: None,
            compare_truth: true,
            out: PathBuf::from("out"),
        }
    }
}

/// Keys written into sidecars next to the configuration that are not
/// configuration themselves.
pub const SIDECAR_EXTRA_KEYS: [&str; 3] = ["command", "geometry", "resolved_mode"];

/// Command-line overrides; every flag mirrors a configuration key.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Configuration file (TOML or JSON, including a previous run's sidecar).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Highest Laguerre order N.
    #[arg(long)]
    pub n: Option<usize>,
    /// Half the number of quadrature nodes M.
    #[arg(long)]
    pub m: Option<usize>,
    /// Radial basis degree J.
    #[arg(long)]
    pub j: Option<usize>,
    #[arg(long)]
    pub r0: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub lambda_decay: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// auto, final_step or multi_step.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub stop_tol: Option<f64>,
    /// l2 or euclidean.
    #[arg(long)]
    pub tikhonov_norm: Option<String>,
    #[arg(long)]
    pub inner: Option<String>,
    #[arg(long)]
    pub outer: Option<String>,
    #[arg(long)]
    pub inner_radius: Option<f64>,
    #[arg(long)]
    pub outer_radius: Option<f64>,
    #[arg(long)]
    pub forward_refinement: Option<usize>,
    #[arg(long)]
    pub curve_samples: Option<usize>,
    /// Cauchy data CSV for `invert`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub compare_truth: Option<bool>,
}

fn parse_keyword<T: for<'de> Deserialize<'de>>(key: &str, value: &str) -> anyhow::Result<T> {
    serde_json::from_value(serde_json::Value::String(value.to_owned()))
        .with_context(|| format!("invalid value '{value}' for {key}"))
}

fn read_file(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    let mut value: serde_json::Value = if is_json {
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
    } else {
        let table: toml::Table = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        serde_json::to_value(table)?
    };
    if let Some(map) = value.as_object_mut() {
        for key in SIDECAR_EXTRA_KEYS {
            map.remove(key);
        }
    }
    serde_json::from_value(value).with_context(|| format!("invalid configuration in {}", path.display()))
}

impl RunConfig {
    /// Applies the file named by `--config`, then the remaining flags.
    pub fn load(overrides: &Overrides) -> anyhow::Result<Self> {
        let mut c = match &overrides.config {
            Some(path) => read_file(path)?,
            None => RunConfig::default(),
        };
        let o = overrides.clone();
        macro_rules! set {
            ($($field:ident),*) => {$(if let Some(v) = o.$field { c.$field = v; })*};
        }
        set!(out, seed, kappa, alpha, n, m, j, r0, lambda0, lambda_decay, delta, max_iters, stop_tol);
        set!(inner, outer, inner_radius, outer_radius, forward_refinement, curve_samples, compare_truth);
        if let Some(d) = o.data {
            c.data = Some(d);
        }
        if let Some(mode) = &o.mode {
            c.mode = parse_keyword("mode", mode)?;
        }
        if let Some(norm) = &o.tikhonov_norm {
            c.tikhonov_norm = parse_keyword("tikhonov_norm", norm)?;
        }
        Ok(c)
    }

    /// Range checks that must pass before any computation starts.
    pub fn validate(&self) -> anyhow::Result<()> {
        if self.m < 4 {
            bail!("M must be at least 4, got {}", self.m);
        }
        if self.j >= self.m {
            bail!("J = {} must be smaller than M = {}", self.j, self.m);
        }
        if !(self.r0 > 0.0) {
            bail!("r0 must be positive, got {}", self.r0);
        }
        if !(self.lambda0 > 0.0) || !self.lambda0.is_finite() {
            bail!("lambda0 must be positive, got {}", self.lambda0);
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            bail!("delta must be non-negative, got {}", self.delta);
        }
        if !(self.kappa > 0.0) || !(self.alpha > 0.0) {
            bail!("kappa and alpha must be positive, got {} and {}", self.kappa, self.alpha);
        }
        if self.forward_refinement == 0 {
            bail!("forward_refinement must be at least 1");
        }
        if self.curve_samples < 2 {
            bail!("curve_samples must be at least 2, got {}", self.curve_samples);
        }
        for name in [&self.inner, &self.outer] {
            if !SHAPE_NAMES.contains(&name.as_str()) {
                bail!("unknown curve '{name}' (expected one of {})", SHAPE_NAMES.join(", "));
            }
        }
        self.recon().validate()?;
        self.inner_curve()?;
        self.outer_curve()?;
        Ok(())
    }

    pub fn inner_curve(&self) -> heatbie::Result<Curve> {
        make_shape(
            &self.inner,
            &ShapeParams {
                radius: self.inner_radius,
                ..Default::default()
            },
        )
    }

    pub fn outer_curve(&self) -> heatbie::Result<Curve> {
        make_shape(
            &self.outer,
            &ShapeParams {
                radius: self.outer_radius,
                ..Default::default()
            },
        )
    }

    pub fn recon(&self) -> ReconConfig {
        ReconConfig {
            kappa: self.kappa,
            alpha: self.alpha,
            n_max: self.n,
            m: self.m,
            degree: self.j,
            r0: self.r0,
            lambda0: self.lambda0,
            lambda_decay: self.lambda_decay,
            mode: self.mode.resolve(self.delta),
            max_iters: self.max_iters,
            stop_tol: self.stop_tol,
            tikhonov_norm: self.tikhonov_norm,
        }
    }
}
