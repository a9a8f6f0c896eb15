//! Magnetic-surface volumes and the knot magnetic energy of a tube.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::metric::{metric_at, MetricBundle, TubeConfig};
use crate::quadrature::QuadratureSpec;
use crate::rrc::unstretch_ratio;
use crate::shape::ShapeFunction;

/// Grid points listed in an invalid-region error.
const MAX_LISTED_POINTS: usize = 16;

/// Integrate `f(metric, s, chi, phi)` over `[0, L] x [0, chi0] x [0, 2 pi]`
/// after checking that the metric is valid at every node.
fn integrate_over_tube<F>(shape: &ShapeFunction, cfg: &TubeConfig, chi0: f64, quad: &QuadratureSpec, f: F) -> Result<f64>
where
    F: Fn(&MetricBundle, f64, f64, f64) -> f64 + Sync,
{
    let s_range = (0.0, cfg.length);
    let chi_range = (0.0, chi0);
    let phi_range = (0.0, 2.0 * PI);
    let [xs, xc, xp] = quad.nodes(s_range, chi_range, phi_range)?;
    let bad: Vec<[f64; 3]> = xs
        .par_iter()
        .map(|&s| {
            let mut out = Vec::new();
            for &c in &xc {
                for &p in &xp {
                    let m = metric_at(shape, cfg, s, c, p);
                    let triple = m.triad.triple_product();
                    if !m.valid || !(triple >= 0.0) || !triple.is_finite() {
                        out.push([s, c, p]);
                    }
                }
            }
            out
        })
        .collect::<Vec<_>>()
        .concat();
    if !bad.is_empty() {
        return Err(Error::InvalidMetricRegion {
            count: bad.len(),
            points: bad.into_iter().take(MAX_LISTED_POINTS).collect(),
        });
    }
    quad.integrate_box(
        |s, c, p| {
            let m = metric_at(shape, cfg, s, c, p);
            f(&m, s, c, p)
        },
        s_range,
        chi_range,
        phi_range,
    )
}

/// Volume enclosed by the magnetic surface `chi = chi0`.
pub fn surface_volume(shape: &ShapeFunction, cfg: &TubeConfig, chi0: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(0.0..=1.0).contains(&chi0) {
        return Err(invalid("chi0", format!("surface level must lie in [0, 1], got {chi0}")));
    }
    if chi0 == 0.0 {
        return Ok(0.0);
    }
    integrate_over_tube(shape, cfg, chi0, quad, |m, _, _, _| m.sqrt_g)
}

/// Toroidal-to-poloidal ratio `b` used in the energy integrand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FieldRatio {
    Constant(f64),
    /// Pointwise `b` from the unstretching constraint.
    Unstretched,
}

/// Profile of the poloidal component `B3` over the tube.
#[derive(Clone, Copy)]
pub enum B3Profile<'a> {
    /// `B3 = 1`
    Uniform,
    Field(&'a (dyn Fn(f64, f64, f64) -> f64 + Sync)),
}

/// `M = 1/2 int sqrt(g) [g11 b^2 + g33 - 2 b g13] (B3)^2 ds dchi dphi`.
pub fn knot_energy(
    shape: &ShapeFunction,
    cfg: &TubeConfig,
    ratio: FieldRatio,
    profile: B3Profile<'_>,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if let FieldRatio::Constant(b) = ratio {
        if !b.is_finite() {
            return Err(invalid("b", format!("ratio must be finite, got {b}")));
        }
    }
    if ratio == FieldRatio::Unstretched {
        // Fail early (and with the right error) on a degenerate tube.
        unstretch_ratio(shape, cfg, 0.0, 1.0, 0.0)?;
    }
    let integral = integrate_over_tube(shape, cfg, 1.0, quad, |m, s, c, p| {
        let b = match ratio {
            FieldRatio::Constant(b) => b,
            FieldRatio::Unstretched => unstretch_ratio(shape, cfg, s, c, p).map(|r| r.b).unwrap_or(f64::NAN),
        };
        let b3 = match profile {
            B3Profile::Uniform => 1.0,
            B3Profile::Field(f) => f(s, c, p),
        };
        let g = &m.g;
        m.sqrt_g * (g[(0, 0)] * b * b + g[(2, 2)] - 2.0 * b * g[(0, 2)]) * b3 * b3
    })?;
    Ok(0.5 * integral)
}

/// Exponent applied to `V_T / (pi L^3)` when forming `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonMode {
    /// Cube of the ratio.
    AsPrinted,
    /// Cube root of the ratio (aspect-ratio reading).
    OneThird,
}

impl std::str::FromStr for EpsilonMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "as_printed" | "as-printed" | "printed" => Ok(Self::AsPrinted),
            "one_third" | "one-third" => Ok(Self::OneThird),
            other => Err(format!("unknown epsilon mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanEnergy {
    pub mean_m: f64,
    pub epsilon: f64,
    pub mode: EpsilonMode,
}

pub fn epsilon(v_total: f64, length: f64, mode: EpsilonMode) -> f64 {
    let ratio = v_total / (PI * length.powi(3));
    match mode {
        EpsilonMode::AsPrinted => ratio.powi(3),
        EpsilonMode::OneThird => ratio.cbrt(),
    }
}

/// `<M> = 1/2 eps^3 L^2 V <(B3)^2>`.
pub fn mean_energy(v_total: f64, length: f64, v_chi: f64, b3_sq_mean: f64, mode: EpsilonMode) -> Result<MeanEnergy> {
    for (name, v) in [("v_total", v_total), ("length", length), ("volume", v_chi)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(name, format!("must be positive, got {v}")));
        }
    }
    if !(b3_sq_mean >= 0.0) {
        return Err(invalid("b3_sq_mean", format!("must be non-negative, got {b3_sq_mean}")));
    }
    let eps = epsilon(v_total, length, mode);
    Ok(MeanEnergy {
        mean_m: 0.5 * eps.powi(3) * length * length * v_chi * b3_sq_mean,
        epsilon: eps,
        mode,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarginalCheck {
    pub constant: bool,
    pub max_relative_drift: f64,
    /// `true` when `tau* = 0` forced the toroidal component to zero.
    pub toroidal_suppressed: bool,
    pub energies: Vec<f64>,
}

/// Evaluate the energy of an unstretched tube at each time sample under
/// the unstretching constraint and report the drift.
///
/// Nothing in the integrand depends on time for such a tube, so the check
/// confirms that no hidden time dependence enters the pipeline.
pub fn marginal_energy_check(shape: &ShapeFunction, cfg: &TubeConfig, quad: &QuadratureSpec, times: &[f64]) -> Result<MarginalCheck> {
    if !shape.is_unstretched(cfg.length) {
        return Err(Error::Precondition(
            "marginal energy check needs an unstretched tube (R_s = R_phi = 0)".into(),
        ));
    }
    let toroidal_suppressed = matches!(
        unstretch_ratio(shape, cfg, 0.0, 1.0, 0.0),
        Err(Error::NoDynamoDegenerate { .. })
    );
    let ratio = if toroidal_suppressed {
        FieldRatio::Constant(0.0)
    } else {
        FieldRatio::Unstretched
    };
    let energies = times
        .iter()
        .map(|_| knot_energy(shape, cfg, ratio, B3Profile::Uniform, quad))
        .collect::<Result<Vec<_>>>()?;
    let reference = energies.first().copied().unwrap_or(0.0);
    let max_relative_drift = energies
        .iter()
        .map(|m| {
            if reference == 0.0 {
                m.abs()
            } else {
                ((m - reference) / reference).abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(MarginalCheck {
        constant: max_relative_drift < 1e-10,
        max_relative_drift,
        toroidal_suppressed,
        energies,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeLevel {
    pub chi: f64,
    #[serde(rename = "V")]
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    #[serde(rename = "M")]
    pub m: f64,
    #[serde(rename = "V_levels")]
    pub volumes: Vec<VolumeLevel>,
    #[serde(rename = "V_T")]
    pub v_total: f64,
    pub mean_m: f64,
    pub epsilon_mode: EpsilonMode,
    pub epsilon: f64,
    /// `epsilon` and `<M>` under the other exponent reading.
    pub epsilon_alternate: f64,
    pub mean_m_alternate: f64,
}

/// Energy, volumes at the requested levels and the mean-field estimate.
pub fn energy_report(
    shape: &ShapeFunction,
    cfg: &TubeConfig,
    ratio: FieldRatio,
    quad: &QuadratureSpec,
    levels: &[f64],
    b3_sq_mean: f64,
    mode: EpsilonMode,
) -> Result<EnergyReport> {
    let m = knot_energy(shape, cfg, ratio, B3Profile::Uniform, quad)?;
    let v_total = surface_volume(shape, cfg, 1.0, quad)?;
    let volumes = levels
        .iter()
        .map(|&chi| Ok(VolumeLevel { chi, v: surface_volume(shape, cfg, chi, quad)? }))
        .collect::<Result<Vec<_>>>()?;
    let mean = mean_energy(v_total, cfg.length, v_total, b3_sq_mean, mode)?;
    let other = match mode {
        EpsilonMode::AsPrinted => EpsilonMode::OneThird,
        EpsilonMode::OneThird => EpsilonMode::AsPrinted,
    };
    let alt = mean_energy(v_total, cfg.length, v_total, b3_sq_mean, other)?;
    Ok(EnergyReport {
        m,
        volumes,
        v_total,
        mean_m: mean.mean_m,
        epsilon_mode: mode,
        epsilon: mean.epsilon,
        epsilon_alternate: alt.epsilon,
        mean_m_alternate: alt.mean_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::Rule;

    fn straight_unit() -> (ShapeFunction, TubeConfig) {
        (ShapeFunction::linear_chi(0.0, 1.0), TubeConfig::new(1.0, 0, 0.0, 0.0).unwrap())
    }

    #[test]
    fn straight_tube_volumes() {
        let (shape, cfg) = straight_unit();
        let q = QuadratureSpec::new(Rule::Simpson, 8, 8, 16).unwrap();
        let v1 = surface_volume(&shape, &cfg, 1.0, &q).unwrap();
        assert!((v1 - PI).abs() < 1e-8);
        assert_eq!(surface_volume(&shape, &cfg, 0.0, &q).unwrap(), 0.0);
        let v_half = surface_volume(&shape, &cfg, 0.5, &q).unwrap();
        assert!((v_half / v1 - 0.25).abs() < 1e-12);
    }

    #[test]
    fn straight_tube_energy() {
        let (shape, cfg) = straight_unit();
        let q = QuadratureSpec::new(Rule::GaussLegendre, 6, 6, 16).unwrap();
        let m = knot_energy(&shape, &cfg, FieldRatio::Constant(0.0), B3Profile::Uniform, &q).unwrap();
        assert!((m - PI / 4.0).abs() < 1e-8);
        let twice = TubeConfig::new(2.0, 0, 0.0, 0.0).unwrap();
        let m2 = knot_energy(&shape, &twice, FieldRatio::Constant(0.0), B3Profile::Uniform, &q).unwrap();
        assert!((m2 - 2.0 * m).abs() < 1e-12);
    }

    #[test]
    fn energy_is_quadratic_in_ratio() {
        let (shape, cfg) = straight_unit();
        let q = QuadratureSpec::new(Rule::GaussLegendre, 6, 6, 8).unwrap();
        let m0 = knot_energy(&shape, &cfg, FieldRatio::Constant(0.0), B3Profile::Uniform, &q).unwrap();
        let b = 1.7;
        let mb = knot_energy(&shape, &cfg, FieldRatio::Constant(b), B3Profile::Uniform, &q).unwrap();
        let g11_moment = q
            .integrate_box(
                |s, c, p| {
                    let m = metric_at(&shape, &cfg, s, c, p);
                    m.sqrt_g * m.g[(0, 0)]
                },
                (0.0, 1.0),
                (0.0, 1.0),
                (0.0, 2.0 * PI),
            )
            .unwrap();
        assert!((mb - m0 - b * b * 0.5 * g11_moment).abs() < 1e-10);
    }

    #[test]
    fn invalid_region_lists_points() {
        // 1 - R kappa cos(theta) < 0 for R near 1 and kappa = 2.
        let shape = ShapeFunction::linear_chi(0.0, 1.0);
        let cfg = TubeConfig::new(1.0, 0, 2.0, 0.0).unwrap();
        let q = QuadratureSpec::new(Rule::GaussLegendre, 4, 4, 4).unwrap();
        match surface_volume(&shape, &cfg, 1.0, &q) {
            Err(Error::InvalidMetricRegion { count, points }) => {
                assert!(count > 0 && !points.is_empty());
            }
            other => panic!("expected invalid region, got {other:?}"),
        }
    }

    #[test]
    fn mean_energy_examples() {
        let r = mean_energy(PI, 1.0, PI, 1.0, EpsilonMode::AsPrinted).unwrap();
        assert!((r.epsilon - 1.0).abs() < 1e-15);
        assert!((r.mean_m - PI / 2.0).abs() < 1e-15);
        assert_eq!(mean_energy(PI, 1.0, PI, 0.0, EpsilonMode::OneThird).unwrap().mean_m, 0.0);
        let (vt, l) = (0.3, 1.2);
        let a = mean_energy(vt, l, 0.2, 1.0, EpsilonMode::AsPrinted).unwrap();
        let b = mean_energy(vt, l, 0.2, 1.0, EpsilonMode::OneThird).unwrap();
        let ratio = vt / (PI * l.powi(3));
        assert!((a.mean_m / b.mean_m / ratio.powi(8) - 1.0).abs() < 1e-12);
        assert!(mean_energy(0.0, 1.0, 1.0, 1.0, EpsilonMode::AsPrinted).is_err());
    }

    #[test]
    fn marginal_check() {
        let q = QuadratureSpec::new(Rule::GaussLegendre, 4, 4, 8).unwrap();
        let shape = ShapeFunction::uniform(1.5, 1.0);
        let cfg = TubeConfig::new(3.0, 0, 0.2, 0.3).unwrap();
        let r = marginal_energy_check(&shape, &cfg, &q, &[0.0, 1.0, 5.0]).unwrap();
        assert!(r.constant && r.max_relative_drift == 0.0 && !r.toroidal_suppressed);

        let flat = TubeConfig::new(3.0, 0, 0.2, 0.0).unwrap();
        let r = marginal_energy_check(&shape, &flat, &q, &[0.0, 2.0]).unwrap();
        assert!(r.constant && r.toroidal_suppressed);

        let stretched = ShapeFunction::separable(crate::shape::AxialFactor::Linear { a0: 1.0, a1: 0.1 }, 0.5, 1.0);
        assert!(matches!(
            marginal_energy_check(&stretched, &cfg, &q, &[0.0]),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn volumes_are_monotone() {
        let shape = ShapeFunction::linear_chi(0.1, 0.8);
        let cfg = TubeConfig::new(2.0, 1, 0.3, 0.5).unwrap();
        let q = QuadratureSpec::new(Rule::GaussLegendre, 6, 6, 8).unwrap();
        let levels = [0.1, 0.3, 0.5, 0.9, 1.0];
        let v: Vec<f64> = levels.iter().map(|&c| surface_volume(&shape, &cfg, c, &q).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }
}
