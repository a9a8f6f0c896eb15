//! Run configuration: TOML file with dotted sections, overridden by flags.
//!
//! Every section field is optional in the file. After merging, missing
//! values are filled with defaults so the effective configuration written
//! into output metadata is complete.
//!
//! ```toml
//! scenario = "helical"
//!
//! [curve]
//! preset = "helix"      # line | circle | helix | torus_knot
//! a = 1.0
//! c = 1.0
//!
//! [shape]
//! preset = "separable"  # constant | linear_chi | separable
//! axial = "exponential" # constant | linear | exponential
//!
//! [tube]
//! linking = 1
//!
//! [quadrature]
//! rule = "gauss_legendre"
//! n_s = 16
//!
//! [dynamo]
//! lambda = 0.5
//! a0 = -0.1
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::curve::{ArcCurve, CurvePreset, SpaceCurve};
use crate::dynamo::{DynamoParams, FieldMode};
use crate::energy::{EpsilonMode, FieldRatio};
use crate::metric::{SampleGrid, TubeConfig};
use crate::quadrature::{QuadratureSpec, Rule};
use crate::shape::{AxialFactor, ShapeFunction, ShapePreset};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    pub curve: CurveSection,
    pub shape: ShapeSection,
    pub tube: TubeSection,
    pub quadrature: QuadratureSection,
    pub grid: GridSection,
    pub energy: EnergySection,
    pub dynamo: DynamoSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CurveSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub major: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    /// Panels of the arclength table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_samples: Option<usize>,
    /// Output rows of the `frenet` command.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    /// Arclength step of the frame stencils; defaults to `1e-4 L`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShapeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_amp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_mode: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axial_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axial_a0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axial_a1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axial_base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axial_amp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axial_rate: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TubeSection {
    /// Defaults to the curve length.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linking: Option<i64>,
    /// Defaults to the curve curvature at `sample_s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa0: Option<f64>,
    /// Defaults to the curve torsion at `sample_s`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    /// Fraction of the curve length where curvature and torsion are sampled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_chi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_chi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_phi: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi_min: Option<f64>,
}

/// `b = <number>` or `b = "unstretched"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatioSetting {
    Value(f64),
    Keyword(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<RatioSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b3_sq_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_mode: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DynamoSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    /// Output file; defaults to `<command>.<format>` in the working directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// `csv` or `json`; reports are always JSON.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
}

/// Parse a config file, rejecting every unknown key at once.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let de = toml::Deserializer::parse(text).map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
    let mut unknown = Vec::new();
    let cfg: RunConfig = serde_ignored::deserialize(de, |path| unknown.push(path.to_string()))
        .map_err(|e| CliError::Config(format!("config error: {e}")))?;
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown config key(s): {}", unknown.join(", "))));
    }
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Overwrite `dst` with `src` where `src` is set.
macro_rules! overlay {
    ($dst:expr, $src:expr, [$($field:ident),* $(,)?]) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

/// Fill a missing value.
macro_rules! fill {
    ($slot:expr, $value:expr) => {
        if $slot.is_none() {
            $slot = Some($value);
        }
    };
}

impl RunConfig {
    /// Apply flag values on top of this configuration.
    pub fn overlay(&mut self, flags: &RunConfig) {
        if flags.scenario.is_some() {
            self.scenario = flags.scenario.clone();
        }
        overlay!(self.curve, flags.curve, [preset, a, c, p, q, major, minor, direction, t_min, t_max, table_samples, n_points, step]);
        overlay!(
            self.shape,
            flags.shape,
            [
                preset, radius, chi_rate, r0, slope, c0, c1, phi_amp, phi_mode, axial, axial_value, axial_a0, axial_a1,
                axial_base, axial_amp, axial_rate
            ]
        );
        overlay!(self.tube, flags.tube, [length, linking, kappa0, tau0, sample_fraction]);
        overlay!(self.quadrature, flags.quadrature, [rule, n_s, n_chi, n_phi]);
        overlay!(self.grid, flags.grid, [n_s, n_chi, n_phi, chi_min]);
        overlay!(self.energy, flags.energy, [b, levels, b3_sq_mean, epsilon_mode]);
        overlay!(
            self.dynamo,
            flags.dynamo,
            [lambda, v1, v3, kappa0, b0, a0, r0, theta, omega_s, eta, s_max, n_samples, mode, t0, t1]
        );
        overlay!(self.output, flags.output, [path, format]);
    }

    /// The built-in helical scenario used by `validate`: a unit helix, a
    /// tapering, slightly elliptic tube with one unit of linking.
    pub fn default_helical() -> Self {
        let mut cfg = RunConfig {
            scenario: Some("helical".into()),
            ..Default::default()
        };
        cfg.curve.preset = Some("helix".into());
        cfg.curve.a = Some(1.0);
        cfg.curve.c = Some(1.0);
        cfg.shape = ShapeSection {
            preset: Some("separable".into()),
            c0: Some(0.05),
            c1: Some(1.0),
            phi_amp: Some(0.1),
            phi_mode: Some(2.0),
            axial: Some("exponential".into()),
            axial_base: Some(0.2),
            axial_amp: Some(0.05),
            axial_rate: Some(0.3),
            ..Default::default()
        };
        cfg.tube.linking = Some(1);
        cfg
    }

    /// The preset and its geometric parameters have no defaults; only the
    /// line direction, table resolution and output row count do.
    pub fn fill_curve_defaults(&mut self) {
        let c = &mut self.curve;
        if c.preset.as_deref() == Some("line") {
            fill!(c.direction, [1.0, 0.0, 0.0]);
        }
        fill!(c.table_samples, 512);
        fill!(c.n_points, 101);
    }

    pub fn fill_shape_defaults(&mut self) {
        let s = &mut self.shape;
        fill!(s.preset, "constant".to_string());
        match s.preset.as_deref() {
            Some("constant") => {
                fill!(s.radius, 0.5);
                fill!(s.chi_rate, 0.5);
            }
            Some("linear_chi") | Some("linear-chi") => {
                fill!(s.r0, 0.0);
                fill!(s.slope, 1.0);
            }
            Some("separable") => {
                fill!(s.c0, 0.0);
                fill!(s.c1, 1.0);
                fill!(s.phi_amp, 0.0);
                fill!(s.phi_mode, 0.0);
                fill!(s.axial, "constant".to_string());
                match s.axial.as_deref() {
                    Some("constant") => fill!(s.axial_value, 1.0),
                    Some("linear") => {
                        fill!(s.axial_a0, 1.0);
                        fill!(s.axial_a1, 0.0);
                    }
                    Some("exponential") => {
                        fill!(s.axial_base, 1.0);
                        fill!(s.axial_amp, 0.0);
                        fill!(s.axial_rate, 0.0);
                    }
                    _ => {}
                }
            }
            _ => {}
        }
    }

    pub fn fill_tube_defaults(&mut self) {
        fill!(self.tube.linking, 0);
        fill!(self.tube.sample_fraction, 0.5);
    }

    pub fn fill_grid_defaults(&mut self) {
        let g = &mut self.grid;
        fill!(g.n_s, 9);
        fill!(g.n_chi, 5);
        fill!(g.n_phi, 16);
        fill!(g.chi_min, 0.2);
    }

    pub fn fill_quadrature_defaults(&mut self) {
        let q = &mut self.quadrature;
        fill!(q.rule, "gauss_legendre".to_string());
        fill!(q.n_s, 16);
        fill!(q.n_chi, 16);
        fill!(q.n_phi, 32);
    }

    pub fn fill_energy_defaults(&mut self) {
        let e = &mut self.energy;
        fill!(e.b, RatioSetting::Value(0.0));
        fill!(e.levels, vec![0.25, 0.5, 0.75, 1.0]);
        fill!(e.b3_sq_mean, 1.0);
        fill!(e.epsilon_mode, "as_printed".to_string());
    }

    /// Fill optional dynamo values; `lambda`, `v1`, `v3`, `a0` and `r0`
    /// are required unless `all` is set.
    pub fn fill_dynamo_defaults(&mut self, all: bool) -> Result<(), CliError> {
        let d = &mut self.dynamo;
        let base = DynamoParams::default();
        if all {
            fill!(d.lambda, base.lambda);
            fill!(d.v1, base.v1);
            fill!(d.v3, base.v3);
            fill!(d.a0, base.a0);
            fill!(d.r0, base.r0);
        }
        for (flag, key, v) in [
            ("--lambda", "lambda", d.lambda),
            ("--v1", "v1", d.v1),
            ("--v3", "v3", d.v3),
            ("--A0", "a0", d.a0),
            ("--R0", "r0", d.r0),
        ] {
            if v.is_none() {
                return Err(CliError::Config(format!(
                    "missing required flag {flag} (or dynamo.{key} in the config file)"
                )));
            }
        }
        fill!(d.kappa0, base.kappa0);
        fill!(d.b0, base.b0);
        fill!(d.theta, base.theta);
        fill!(d.omega_s, base.omega_s);
        fill!(d.eta, base.eta);
        fill!(d.s_max, 10.0);
        fill!(d.n_samples, 101);
        fill!(d.mode, "exact".to_string());
        fill!(d.t0, 0.0);
        fill!(d.t1, 1.0);
        Ok(())
    }

    pub fn output_format(&self) -> Result<OutputFormat, CliError> {
        match self.output.format.as_deref() {
            None | Some("csv") => Ok(OutputFormat::Csv),
            Some("json") => Ok(OutputFormat::Json),
            Some(other) => Err(CliError::Config(format!("output.format: expected csv or json, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Command-line flag that sets a config key, if there is one.
fn flag_for(key: &str) -> Option<String> {
    let (section, field) = key.split_once('.')?;
    let flag = match (section, field) {
        ("curve", "preset") => "curve".to_string(),
        ("shape", "preset") => "shape".to_string(),
        ("shape", "r0") => "shape-r0".to_string(),
        ("dynamo", "a0") => "A0".to_string(),
        ("dynamo", "r0") => "R0".to_string(),
        ("curve", "direction") | ("tube", "sample_fraction") | ("dynamo", "eta") => return None,
        ("shape", f) if f.starts_with("axial") || matches!(f, "c0" | "c1" | "phi_amp" | "phi_mode") => return None,
        (_, f) => f.replace('_', "-"),
    };
    Some(format!("--{flag}"))
}

fn need<T: Clone>(v: &Option<T>, key: &str) -> Result<T, CliError> {
    v.clone().ok_or_else(|| {
        CliError::Config(match flag_for(key) {
            Some(flag) => format!("missing required flag {flag} (or `{key}` in the config file)"),
            None => format!("missing value for `{key}` in the config file"),
        })
    })
}

fn field_error(key: &str) -> impl Fn(crate::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{key}: {e}"))
}

/// Curve and arclength table from a filled configuration.
pub fn build_curve(cfg: &RunConfig) -> Result<ArcCurve, CliError> {
    let c = &cfg.curve;
    let preset = match need(&c.preset, "curve.preset")?.as_str() {
        "line" => CurvePreset::Line {
            direction: need(&c.direction, "curve.direction")?,
        },
        "circle" => CurvePreset::Circle { a: need(&c.a, "curve.a")? },
        "helix" => CurvePreset::Helix {
            a: need(&c.a, "curve.a")?,
            c: need(&c.c, "curve.c")?,
        },
        "torus_knot" | "torus-knot" => CurvePreset::TorusKnot {
            p: need(&c.p, "curve.p")?,
            q: need(&c.q, "curve.q")?,
            major: need(&c.major, "curve.major")?,
            minor: need(&c.minor, "curve.minor")?,
        },
        other => {
            return Err(CliError::Config(format!(
                "curve.preset: unknown preset `{other}` (expected line, circle, helix or torus_knot)"
            )))
        }
    };
    let mut curve = SpaceCurve::from_preset(preset).map_err(field_error("curve"))?;
    if c.t_min.is_some() || c.t_max.is_some() {
        let (a, b) = curve.interval();
        curve = curve
            .with_interval(c.t_min.unwrap_or(a), c.t_max.unwrap_or(b))
            .map_err(field_error("curve"))?;
    }
    curve.arclength(need(&c.table_samples, "curve.table_samples")?).map_err(CliError::Numeric)
}

pub fn build_shape(cfg: &RunConfig) -> Result<ShapeFunction, CliError> {
    let s = &cfg.shape;
    let preset = match need(&s.preset, "shape.preset")?.as_str() {
        "constant" => ShapePreset::Constant {
            radius: need(&s.radius, "shape.radius")?,
            chi_rate: need(&s.chi_rate, "shape.chi_rate")?,
        },
        "linear_chi" | "linear-chi" => ShapePreset::LinearChi {
            r0: need(&s.r0, "shape.r0")?,
            slope: need(&s.slope, "shape.slope")?,
        },
        "separable" => {
            let axial = match need(&s.axial, "shape.axial")?.as_str() {
                "constant" => AxialFactor::Constant {
                    value: need(&s.axial_value, "shape.axial_value")?,
                },
                "linear" => AxialFactor::Linear {
                    a0: need(&s.axial_a0, "shape.axial_a0")?,
                    a1: need(&s.axial_a1, "shape.axial_a1")?,
                },
                "exponential" => AxialFactor::Exponential {
                    base: need(&s.axial_base, "shape.axial_base")?,
                    amp: need(&s.axial_amp, "shape.axial_amp")?,
                    rate: need(&s.axial_rate, "shape.axial_rate")?,
                },
                other => {
                    return Err(CliError::Config(format!(
                        "shape.axial: unknown factor `{other}` (expected constant, linear or exponential)"
                    )))
                }
            };
            ShapePreset::Separable {
                axial,
                c0: need(&s.c0, "shape.c0")?,
                c1: need(&s.c1, "shape.c1")?,
                phi_amp: need(&s.phi_amp, "shape.phi_amp")?,
                phi_mode: need(&s.phi_mode, "shape.phi_mode")?,
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "shape.preset: unknown preset `{other}` (expected constant, linear_chi or separable)"
            )))
        }
    };
    Ok(preset.into())
}

/// Tube parameters; unset length, curvature and torsion come from the curve.
pub fn build_tube(cfg: &RunConfig, curve: Option<&ArcCurve>) -> Result<TubeConfig, CliError> {
    let t = &cfg.tube;
    let linking = need(&t.linking, "tube.linking")?;
    let (length, kappa0, tau0) = match (t.length, t.kappa0, t.tau0) {
        (Some(l), Some(k), Some(tau)) => (l, k, tau),
        (l, k, tau) => {
            let curve = curve.ok_or_else(|| CliError::Config("tube.length, tube.kappa0 and tube.tau0 are required without a curve".into()))?;
            let frac = need(&t.sample_fraction, "tube.sample_fraction")?;
            if !(0.0..=1.0).contains(&frac) {
                return Err(CliError::Config(format!("tube.sample_fraction must lie in [0, 1], got {frac}")));
            }
            let f = curve
                .frenet_at(frac * curve.length(), curve.default_step())
                .map_err(CliError::Numeric)?;
            (l.unwrap_or(curve.length()), k.unwrap_or(f.kappa), tau.unwrap_or(f.tau))
        }
    };
    TubeConfig::new(length, linking, kappa0, tau0).map_err(field_error("tube"))
}

pub fn build_grid(cfg: &RunConfig, length: f64) -> Result<SampleGrid, CliError> {
    let g = &cfg.grid;
    let chi_min = need(&g.chi_min, "grid.chi_min")?;
    if !(chi_min > 0.0 && chi_min <= 1.0) {
        return Err(CliError::Config(format!("grid.chi_min must lie in (0, 1], got {chi_min}")));
    }
    let (n_s, n_chi, n_phi) = (need(&g.n_s, "grid.n_s")?, need(&g.n_chi, "grid.n_chi")?, need(&g.n_phi, "grid.n_phi")?);
    if n_s == 0 || n_chi == 0 || n_phi == 0 {
        return Err(CliError::Config("grid sizes must be positive".into()));
    }
    Ok(SampleGrid::uniform(length, chi_min, n_s, n_chi, n_phi))
}

pub fn build_quadrature(cfg: &RunConfig) -> Result<QuadratureSpec, CliError> {
    let q = &cfg.quadrature;
    let rule: Rule = need(&q.rule, "quadrature.rule")?
        .parse()
        .map_err(|e| CliError::Config(format!("quadrature.rule: {e}")))?;
    QuadratureSpec::new(
        rule,
        need(&q.n_s, "quadrature.n_s")?,
        need(&q.n_chi, "quadrature.n_chi")?,
        need(&q.n_phi, "quadrature.n_phi")?,
    )
    .map_err(field_error("quadrature"))
}

pub struct EnergySettings {
    pub ratio: FieldRatio,
    pub levels: Vec<f64>,
    pub b3_sq_mean: f64,
    pub mode: EpsilonMode,
}

pub fn build_energy(cfg: &RunConfig) -> Result<EnergySettings, CliError> {
    let e = &cfg.energy;
    let ratio = match need(&e.b, "energy.b")? {
        RatioSetting::Value(b) if b.is_finite() => FieldRatio::Constant(b),
        RatioSetting::Keyword(k) if k == "unstretched" => FieldRatio::Unstretched,
        other => {
            return Err(CliError::Config(format!(
                "energy.b: expected a finite number or \"unstretched\", got {other:?}"
            )))
        }
    };
    let levels = need(&e.levels, "energy.levels")?;
    if let Some(bad) = levels.iter().find(|c| !(0.0..=1.0).contains(*c)) {
        return Err(CliError::Config(format!("energy.levels: level {bad} outside [0, 1]")));
    }
    let b3_sq_mean = need(&e.b3_sq_mean, "energy.b3_sq_mean")?;
    if !(b3_sq_mean >= 0.0) {
        return Err(CliError::Config(format!("energy.b3_sq_mean must be non-negative, got {b3_sq_mean}")));
    }
    let mode = need(&e.epsilon_mode, "energy.epsilon_mode")?
        .parse()
        .map_err(|e| CliError::Config(format!("energy.epsilon_mode: {e}")))?;
    Ok(EnergySettings {
        ratio,
        levels,
        b3_sq_mean,
        mode,
    })
}

pub struct DynamoSettings {
    pub params: DynamoParams,
    pub s_grid: Vec<f64>,
    pub mode: FieldMode,
    pub t0: f64,
    pub t1: f64,
}

pub fn build_dynamo(cfg: &RunConfig) -> Result<DynamoSettings, CliError> {
    let d = &cfg.dynamo;
    let params = DynamoParams {
        lambda: need(&d.lambda, "dynamo.lambda")?,
        v1: need(&d.v1, "dynamo.v1")?,
        v3: need(&d.v3, "dynamo.v3")?,
        kappa0: need(&d.kappa0, "dynamo.kappa0")?,
        b0: need(&d.b0, "dynamo.b0")?,
        a0: need(&d.a0, "dynamo.a0")?,
        r0: need(&d.r0, "dynamo.r0")?,
        theta: need(&d.theta, "dynamo.theta")?,
        omega_s: need(&d.omega_s, "dynamo.omega_s")?,
        eta: need(&d.eta, "dynamo.eta")?,
    };
    params.validate().map_err(field_error("dynamo"))?;
    let s_max = need(&d.s_max, "dynamo.s_max")?;
    let n = need(&d.n_samples, "dynamo.n_samples")?;
    if !(s_max > 0.0) || n < 2 {
        return Err(CliError::Config(format!(
            "dynamo: need s_max > 0 and n_samples >= 2, got {s_max} and {n}"
        )));
    }
    let mode = need(&d.mode, "dynamo.mode")?
        .parse()
        .map_err(|e| CliError::Config(format!("dynamo.mode: {e}")))?;
    Ok(DynamoSettings {
        params,
        s_grid: (0..n).map(|i| s_max * i as f64 / (n - 1) as f64).collect(),
        mode,
        t0: need(&d.t0, "dynamo.t0")?,
        t1: need(&d.t1, "dynamo.t1")?,
    })
}
