//! Tube radius fields `R(s, chi, phi)` with the partial derivatives the
//! triad and rotation coefficients consume.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Value and partial derivatives of the shape function at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ShapeJet {
    pub r: f64,
    pub r_s: f64,
    pub r_chi: f64,
    pub r_phi: f64,
    pub r_ss: f64,
    pub r_s_chi: f64,
    pub r_s_phi: f64,
    pub r_chi_chi: f64,
    pub r_chi_phi: f64,
    pub r_phi_phi: f64,
}

impl ShapeJet {
    /// Jet of an s- and phi-independent radius `r` with `dR/dchi = r_chi`.
    pub fn uniform(r: f64, r_chi: f64) -> Self {
        Self {
            r,
            r_chi,
            ..Self::default()
        }
    }
}

/// Axial factor `f(s)` of a separable shape.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxialFactor {
    Constant { value: f64 },
    /// `a0 + a1 s`
    Linear { a0: f64, a1: f64 },
    /// `base + amp exp(-rate s)`
    Exponential { base: f64, amp: f64, rate: f64 },
}

impl AxialFactor {
    fn eval(&self, s: f64) -> (f64, f64, f64) {
        match *self {
            AxialFactor::Constant { value } => (value, 0.0, 0.0),
            AxialFactor::Linear { a0, a1 } => (a0 + a1 * s, a1, 0.0),
            AxialFactor::Exponential { base, amp, rate } => {
                let e = amp * (-rate * s).exp();
                (base + e, -rate * e, rate * rate * e)
            }
        }
    }
}

/// Built-in shape families with analytic partials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum ShapePreset {
    /// Uniform cross-section, `R = radius + chi_rate (chi - 1)`: the
    /// boundary surface `chi = 1` has radius `radius`, and `R` does not
    /// vary along the tube or around it.
    Constant {
        radius: f64,
        #[serde(default = "unit_rate")]
        chi_rate: f64,
    },
    /// `R = r0 + slope * chi`.
    LinearChi { r0: f64, slope: f64 },
    /// `R = f(s) (c0 + c1 chi) (1 + phi_amp cos(phi_mode phi))`.
    Separable {
        axial: AxialFactor,
        c0: f64,
        c1: f64,
        #[serde(default)]
        phi_amp: f64,
        #[serde(default)]
        phi_mode: f64,
    },
}

fn unit_rate() -> f64 {
    1.0
}

type ShapeFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Preset(ShapePreset),
    Custom { f: ShapeFn, scale: f64 },
}

/// Radius of the magnetic surface `chi` at `(s, phi)`.
#[derive(Clone)]
pub struct ShapeFunction {
    source: Source,
}

impl fmt::Debug for ShapeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.source {
            Source::Preset(p) => f.debug_tuple("ShapeFunction").field(p).finish(),
            Source::Custom { scale, .. } => f.debug_struct("ShapeFunction").field("custom_scale", scale).finish(),
        }
    }
}

impl From<ShapePreset> for ShapeFunction {
    fn from(p: ShapePreset) -> Self {
        Self {
            source: Source::Preset(p),
        }
    }
}

impl ShapeFunction {
    /// Uniform tube with boundary radius `radius` and `R_chi = 1`.
    pub fn constant(radius: f64) -> Self {
        Self::uniform(radius, 1.0)
    }

    pub fn uniform(radius: f64, chi_rate: f64) -> Self {
        ShapePreset::Constant { radius, chi_rate }.into()
    }

    pub fn linear_chi(r0: f64, slope: f64) -> Self {
        ShapePreset::LinearChi { r0, slope }.into()
    }

    pub fn separable(axial: AxialFactor, c0: f64, c1: f64) -> Self {
        ShapePreset::Separable {
            axial,
            c0,
            c1,
            phi_amp: 0.0,
            phi_mode: 0.0,
        }
        .into()
    }

    /// Arbitrary radius field; partials come from central differences with
    /// step `1e-5 * scale` (first order) and `1e-3 * scale` (second order).
    pub fn custom<F>(f: F, scale: f64) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            source: Source::Custom {
                f: Arc::new(f),
                scale: scale.abs().max(f64::MIN_POSITIVE),
            },
        }
    }

    pub fn preset(&self) -> Option<&ShapePreset> {
        match &self.source {
            Source::Preset(p) => Some(p),
            Source::Custom { .. } => None,
        }
    }

    pub fn radius(&self, s: f64, chi: f64, phi: f64) -> f64 {
        self.jet(s, chi, phi).r
    }

    pub fn jet(&self, s: f64, chi: f64, phi: f64) -> ShapeJet {
        match &self.source {
            Source::Preset(p) => preset_jet(p, s, chi, phi),
            Source::Custom { f, scale } => finite_difference_jet(f.as_ref(), *scale, s, chi, phi),
        }
    }

    /// True when `R_s` and `R_phi` vanish identically (uniform, constant
    /// cross-section tube). Custom shapes are sampled on a coarse grid.
    pub fn is_unstretched(&self, length: f64) -> bool {
        match &self.source {
            Source::Preset(ShapePreset::Constant { .. }) | Source::Preset(ShapePreset::LinearChi { .. }) => true,
            Source::Preset(ShapePreset::Separable { axial, phi_amp, .. }) => {
                let axial_flat = match *axial {
                    AxialFactor::Constant { .. } => true,
                    AxialFactor::Linear { a1, .. } => a1 == 0.0,
                    AxialFactor::Exponential { amp, rate, .. } => amp == 0.0 || rate == 0.0,
                };
                axial_flat && *phi_amp == 0.0
            }
            Source::Custom { .. } => sample_grid(length).all(|(s, chi, phi)| {
                let j = self.jet(s, chi, phi);
                j.r_s.abs() < 1e-9 && j.r_phi.abs() < 1e-9
            }),
        }
    }

    /// Check `R > 0` and `R_chi > 0` on a coarse grid over `s in [0, L]`,
    /// `chi in (0, 1]`, `phi in [0, 2 pi)`.
    pub fn validate_domain(&self, length: f64) -> Result<()> {
        for (s, chi, phi) in sample_grid(length) {
            let j = self.jet(s, chi, phi);
            if !(j.r > 0.0) {
                return Err(invalid(
                    "shape",
                    format!("R = {} <= 0 at (s, chi, phi) = ({s}, {chi}, {phi})", j.r),
                ));
            }
            if !(j.r_chi > 0.0) {
                return Err(invalid(
                    "shape",
                    format!("R_chi = {} <= 0 at (s, chi, phi) = ({s}, {chi}, {phi}); surfaces must be nested", j.r_chi),
                ));
            }
        }
        Ok(())
    }
}

fn sample_grid(length: f64) -> impl Iterator<Item = (f64, f64, f64)> {
    let n = 9;
    (0..n).flat_map(move |i| {
        (1..=n).flat_map(move |j| {
            (0..n).map(move |k| {
                (
                    length * i as f64 / (n - 1) as f64,
                    j as f64 / n as f64,
                    2.0 * std::f64::consts::PI * k as f64 / n as f64,
                )
            })
        })
    })
}

fn preset_jet(p: &ShapePreset, s: f64, chi: f64, phi: f64) -> ShapeJet {
    match *p {
        ShapePreset::Constant { radius, chi_rate } => ShapeJet::uniform(radius + chi_rate * (chi - 1.0), chi_rate),
        ShapePreset::LinearChi { r0, slope } => ShapeJet::uniform(r0 + slope * chi, slope),
        ShapePreset::Separable {
            axial,
            c0,
            c1,
            phi_amp,
            phi_mode,
        } => {
            let (f, fs, fss) = axial.eval(s);
            let g = c0 + c1 * chi;
            let gc = c1;
            let h = 1.0 + phi_amp * (phi_mode * phi).cos();
            let hp = -phi_amp * phi_mode * (phi_mode * phi).sin();
            let hpp = -phi_amp * phi_mode * phi_mode * (phi_mode * phi).cos();
            ShapeJet {
                r: f * g * h,
                r_s: fs * g * h,
                r_chi: f * gc * h,
                r_phi: f * g * hp,
                r_ss: fss * g * h,
                r_s_chi: fs * gc * h,
                r_s_phi: fs * g * hp,
                r_chi_chi: 0.0,
                r_chi_phi: f * gc * hp,
                r_phi_phi: f * g * hpp,
            }
        }
    }
}

fn finite_difference_jet(f: &(dyn Fn(f64, f64, f64) -> f64 + Send + Sync), scale: f64, s: f64, chi: f64, phi: f64) -> ShapeJet {
    let h1 = 1e-5 * scale;
    let h2 = 1e-3 * scale;
    let at = |ds: f64, dc: f64, dp: f64| f(s + ds, chi + dc, phi + dp);
    let d1 = |e: [f64; 3]| (at(e[0] * h1, e[1] * h1, e[2] * h1) - at(-e[0] * h1, -e[1] * h1, -e[2] * h1)) / (2.0 * h1);
    let pure2 = |e: [f64; 3]| {
        (at(e[0] * h2, e[1] * h2, e[2] * h2) - 2.0 * at(0.0, 0.0, 0.0) + at(-e[0] * h2, -e[1] * h2, -e[2] * h2)) / (h2 * h2)
    };
    let mixed = |a: [f64; 3], b: [f64; 3]| {
        let p = |sa: f64, sb: f64| {
            at(
                (sa * a[0] + sb * b[0]) * h2,
                (sa * a[1] + sb * b[1]) * h2,
                (sa * a[2] + sb * b[2]) * h2,
            )
        };
        (p(1.0, 1.0) - p(1.0, -1.0) - p(-1.0, 1.0) + p(-1.0, -1.0)) / (4.0 * h2 * h2)
    };
    let es = [1.0, 0.0, 0.0];
    let ec = [0.0, 1.0, 0.0];
    let ep = [0.0, 0.0, 1.0];
    ShapeJet {
        r: at(0.0, 0.0, 0.0),
        r_s: d1(es),
        r_chi: d1(ec),
        r_phi: d1(ep),
        r_ss: pure2(es),
        r_s_chi: mixed(es, ec),
        r_s_phi: mixed(es, ep),
        r_chi_chi: pure2(ec),
        r_chi_phi: mixed(ec, ep),
        r_phi_phi: pure2(ep),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn separable_modulated() -> ShapeFunction {
        ShapePreset::Separable {
            axial: AxialFactor::Exponential {
                base: 0.8,
                amp: 0.3,
                rate: 0.7,
            },
            c0: 0.2,
            c1: 1.1,
            phi_amp: 0.15,
            phi_mode: 2.0,
        }
        .into()
    }

    #[test]
    fn separable_partials_match_custom_finite_differences() {
        let analytic = separable_modulated();
        let a = analytic.clone();
        let numeric = ShapeFunction::custom(move |s, c, p| a.radius(s, c, p), 1.0);
        for &(s, c, p) in &[(0.3, 0.4, 1.0), (1.7, 0.9, 4.0), (2.5, 0.1, 0.2)] {
            let x = analytic.jet(s, c, p);
            let y = numeric.jet(s, c, p);
            assert!((x.r - y.r).abs() < 1e-15);
            for (u, v) in [(x.r_s, y.r_s), (x.r_chi, y.r_chi), (x.r_phi, y.r_phi)] {
                assert!((u - v).abs() < 1e-9, "{u} vs {v}");
            }
            for (u, v) in [
                (x.r_ss, y.r_ss),
                (x.r_s_chi, y.r_s_chi),
                (x.r_s_phi, y.r_s_phi),
                (x.r_chi_chi, y.r_chi_chi),
                (x.r_chi_phi, y.r_chi_phi),
                (x.r_phi_phi, y.r_phi_phi),
            ] {
                assert!((u - v).abs() < 1e-6, "{u} vs {v}");
            }
        }
    }

    #[test]
    fn linear_chi_domain() {
        assert!(ShapeFunction::linear_chi(0.0, 1.0).validate_domain(1.0).is_ok());
        assert!(ShapeFunction::linear_chi(1.0, -0.5).validate_domain(1.0).is_err());
        assert!(ShapeFunction::constant(-1.0).validate_domain(1.0).is_err());
        // radius 0.5 with unit rate reaches R <= 0 inside the tube
        assert!(ShapeFunction::constant(0.5).validate_domain(1.0).is_err());
        assert!(ShapeFunction::uniform(2.0, 0.5).validate_domain(1.0).is_ok());
    }

    #[test]
    fn unstretched_detection() {
        assert!(ShapeFunction::constant(1.0).is_unstretched(1.0));
        assert!(!separable_modulated().is_unstretched(1.0));
        let flat = ShapeFunction::separable(AxialFactor::Constant { value: 2.0 }, 0.5, 1.0);
        assert!(flat.is_unstretched(3.0));
        assert!(ShapeFunction::custom(|_, c, _| 1.0 + c, 1.0).is_unstretched(2.0));
        assert!(!ShapeFunction::custom(|s, c, _| 1.0 + c + 0.1 * s, 1.0).is_unstretched(2.0));
    }
}
