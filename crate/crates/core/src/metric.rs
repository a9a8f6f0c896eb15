//! The non-orthogonal tube triad `(e1, e2, e3)` in the working chart
//! `(s, chi, phi)`, its Gram metric, and the orthogonal and circular limits.
//!
//! Triad vectors are stored by their components on the local Frenet frame
//! `(t, n, b)`. Since that frame is orthonormal, dot products of component
//! vectors are the metric entries.

use std::f64::consts::PI;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::curve::{ArcCurve, Vec3};
use crate::error::{invalid, Result};
use crate::shape::{ShapeFunction, ShapeJet};

/// Length, linking number and base curvature/torsion of a tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TubeConfig {
    pub length: f64,
    pub linking: i64,
    pub kappa0: f64,
    pub tau0: f64,
}

impl TubeConfig {
    pub fn new(length: f64, linking: i64, kappa0: f64, tau0: f64) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(invalid("length", format!("tube length must be positive, got {length}")));
        }
        if !(kappa0 >= 0.0) || !tau0.is_finite() {
            return Err(invalid(
                "kappa0",
                format!("need kappa0 >= 0 and finite tau0, got {kappa0}, {tau0}"),
            ));
        }
        Ok(Self {
            length,
            linking,
            kappa0,
            tau0,
        })
    }

    /// Length from the curve, curvature and torsion sampled at arclength `s`.
    pub fn sampled_from(curve: &ArcCurve, s: f64, linking: i64) -> Result<Self> {
        let f = curve.frenet_at(s, curve.default_step())?;
        Self::new(curve.length(), linking, f.kappa, f.tau)
    }

    /// Twist rate `2 pi N / L`.
    pub fn twist_rate(&self) -> f64 {
        2.0 * PI * self.linking as f64 / self.length
    }

    /// `tau* = tau0 - 2 pi N / L`.
    pub fn tau_star(&self) -> f64 {
        self.tau0 - self.twist_rate()
    }
}

/// `phi = theta + 2 pi N s / L`.
pub fn twist_angle(theta: f64, s: f64, cfg: &TubeConfig) -> f64 {
    theta + cfg.twist_rate() * s
}

/// Inverse of [`twist_angle`].
pub fn theta_from_twist(phi: f64, s: f64, cfg: &TubeConfig) -> f64 {
    phi - cfg.twist_rate() * s
}

pub fn effective_torsion(cfg: &TubeConfig) -> f64 {
    cfg.tau_star()
}

/// Form of the tangential coefficient of `e1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LeadTerm {
    /// `1 - R kappa cos(theta)`, consistent with the metric's `g11`.
    Scaled,
    /// `1 - kappa cos(theta)`, the radius factor dropped.
    Unscaled,
}

/// Tube triad in Frenet components, with the scalars it was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Triad {
    pub e: [Vec3; 3],
    pub theta: f64,
    pub kappa: f64,
    pub tau_star: f64,
    pub jet: ShapeJet,
    /// `K = 1 - R kappa cos(theta)`
    pub k_factor: f64,
}

impl Triad {
    pub fn triple_product(&self) -> f64 {
        self.e[0].dot(&self.e[1].cross(&self.e[2]))
    }

    /// Triad from a shape jet and local scalars.
    pub fn from_jet(jet: ShapeJet, kappa: f64, tau_star: f64, theta: f64, lead: LeadTerm) -> Self {
        let (sn, c) = theta.sin_cos();
        let r = jet.r;
        let k_factor = 1.0 - r * kappa * c;
        let lead_coeff = match lead {
            LeadTerm::Scaled => k_factor,
            LeadTerm::Unscaled => 1.0 - kappa * c,
        };
        let e1 = Vec3::new(
            lead_coeff,
            jet.r_s * c - r * tau_star * sn,
            jet.r_s * sn + r * tau_star * c,
        );
        let e2 = Vec3::new(0.0, jet.r_chi * c, jet.r_chi * sn);
        let e3 = Vec3::new(0.0, jet.r_phi * c - r * sn, r * c + jet.r_phi * sn);
        Self {
            e: [e1, e2, e3],
            theta,
            kappa,
            tau_star,
            jet,
            k_factor,
        }
    }
}

/// Unit radial vector `cos(theta) n + sin(theta) b` in Frenet components.
pub fn radial_unit(theta: f64) -> Vec3 {
    Vec3::new(0.0, theta.cos(), theta.sin())
}

/// Unit poloidal vector `-sin(theta) n + cos(theta) b` in Frenet components.
pub fn poloidal_unit(theta: f64) -> Vec3 {
    Vec3::new(0.0, -theta.sin(), theta.cos())
}

/// Triad at `(s, chi, phi)`; `theta` follows from the twist angle.
pub fn basis_triad(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64) -> Triad {
    let theta = theta_from_twist(phi, s, cfg);
    Triad::from_jet(shape.jet(s, chi, phi), cfg.kappa0, cfg.tau_star(), theta, LeadTerm::Scaled)
}

/// Metric and volume element built from a triad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricBundle {
    pub triad: Triad,
    pub g: Matrix3<f64>,
    pub det_g: f64,
    pub sqrt_g: f64,
    /// `1 - R kappa cos(theta) > 0`
    pub valid: bool,
}

pub fn metric_from_triad(triad: Triad) -> MetricBundle {
    let g = Matrix3::from_fn(|i, j| triad.e[i].dot(&triad.e[j]));
    let triple = triad.triple_product();
    MetricBundle {
        triad,
        g,
        det_g: g.determinant(),
        sqrt_g: triple.abs(),
        valid: triad.k_factor > 0.0,
    }
}

pub fn metric_at(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64) -> MetricBundle {
    metric_from_triad(basis_triad(shape, cfg, s, chi, phi))
}

/// Diagonal coefficients `(1, r^2, K^2)` of `dl^2 = dr^2 + r^2 dtheta^2 + K^2 ds^2`
/// in `(r, theta, s)` order, `K = 1 - kappa r cos(theta)`.
pub fn orthogonal_limit_metric(r: f64, theta: f64, kappa: f64) -> Matrix3<f64> {
    let k = 1.0 - kappa * r * theta.cos();
    Matrix3::from_diagonal(&Vec3::new(1.0, r * r, k * k))
}

/// Entries of the metric matrix in the form printed alongside the triad.
pub fn printed_matrix(jet: &ShapeJet, kappa: f64, tau_star: f64, theta: f64) -> Matrix3<f64> {
    let r = jet.r;
    let k = 1.0 - r * kappa * theta.cos();
    let rt2 = r * r * tau_star * tau_star;
    Matrix3::new(
        k * k + rt2 + jet.r_s * jet.r_s,
        jet.r_chi * jet.r_s,
        rt2 + jet.r_s * jet.r_phi,
        jet.r_chi * jet.r_s,
        jet.r_chi * jet.r_chi,
        jet.r_chi * jet.r_phi,
        rt2 + jet.r_s * jet.r_s,
        jet.r_chi * jet.r_phi * r * r + jet.r_phi * jet.r_phi,
        r * r + jet.r_phi * jet.r_phi,
    )
}

/// Tensor grid of sample points in `(s, chi, phi)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub s: Vec<f64>,
    pub chi: Vec<f64>,
    pub phi: Vec<f64>,
}

impl SampleGrid {
    /// Uniform grid with `s in [0, L]`, `chi in [chi_min, 1]` and
    /// `phi in [0, 2 pi)` (periodic, right end excluded).
    pub fn uniform(length: f64, chi_min: f64, n_s: usize, n_chi: usize, n_phi: usize) -> Self {
        let lin = |a: f64, b: f64, n: usize| -> Vec<f64> {
            if n <= 1 {
                return vec![a];
            }
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        };
        Self {
            s: lin(0.0, length, n_s),
            chi: lin(chi_min, 1.0, n_chi),
            phi: (0..n_phi.max(1)).map(|k| 2.0 * PI * k as f64 / n_phi.max(1) as f64).collect(),
        }
    }

    pub fn points(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.s.iter().flat_map(move |&s| {
            self.chi
                .iter()
                .flat_map(move |&c| self.phi.iter().map(move |&p| [s, c, p]))
        })
    }

    pub fn len(&self) -> usize {
        self.s.len() * self.chi.len() * self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Worst deviation of one matrix entry over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntryDeviation {
    pub entry: String,
    pub max_abs_dev: f64,
    /// Grid point `(s, chi, phi)` of the largest deviation.
    pub at: [f64; 3],
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixReport {
    /// Printed entries against the Gram matrix of the scaled triad.
    pub entries: Vec<EntryDeviation>,
    /// Printed `g11` against the Gram `g11` of the triad with the radius
    /// factor dropped from the tangential coefficient of `e1`.
    pub unscaled_lead_g11: EntryDeviation,
}

impl MatrixReport {
    pub fn max_abs_dev(&self) -> f64 {
        self.entries.iter().map(|e| e.max_abs_dev).fold(0.0, f64::max)
    }

    pub fn flagged(&self) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|e| e.flagged)
            .map(|e| e.entry.as_str())
            .collect()
    }
}

/// Absolute tolerance, relative to the entry magnitude, below which a
/// deviation counts as rounding.
const REPORT_TOL: f64 = 1e-12;

/// Compare the printed metric matrix with the Gram construction on a grid.
pub fn printed_matrix_report(shape: &ShapeFunction, cfg: &TubeConfig, grid: &SampleGrid) -> MatrixReport {
    let mut dev = [[0.0f64; 3]; 3];
    let mut at = [[[0.0; 3]; 3]; 3];
    let mut scale = [[0.0f64; 3]; 3];
    let mut lead_dev = 0.0f64;
    let mut lead_at = [0.0; 3];
    let mut lead_scale = 0.0f64;
    for p in grid.points() {
        let [s, chi, phi] = p;
        let triad = basis_triad(shape, cfg, s, chi, phi);
        let gram = metric_from_triad(triad).g;
        let printed = printed_matrix(&triad.jet, cfg.kappa0, cfg.tau_star(), triad.theta);
        for i in 0..3 {
            for j in 0..3 {
                let d = (printed[(i, j)] - gram[(i, j)]).abs();
                scale[i][j] = scale[i][j].max(gram[(i, j)].abs()).max(printed[(i, j)].abs());
                if d > dev[i][j] {
                    dev[i][j] = d;
                    at[i][j] = p;
                }
            }
        }
        let unscaled = Triad::from_jet(triad.jet, cfg.kappa0, cfg.tau_star(), triad.theta, LeadTerm::Unscaled);
        let g11 = unscaled.e[0].dot(&unscaled.e[0]);
        let d = (printed[(0, 0)] - g11).abs();
        lead_scale = lead_scale.max(g11.abs()).max(printed[(0, 0)].abs());
        if d > lead_dev {
            lead_dev = d;
            lead_at = p;
        }
    }
    let mut entries = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            entries.push(EntryDeviation {
                entry: format!("g{}{}", i + 1, j + 1),
                max_abs_dev: dev[i][j],
                at: at[i][j],
                flagged: dev[i][j] > REPORT_TOL * scale[i][j].max(1.0),
            });
        }
    }
    MatrixReport {
        entries,
        unscaled_lead_g11: EntryDeviation {
            entry: "g11_unscaled_lead".into(),
            max_abs_dev: lead_dev,
            at: lead_at,
            flagged: lead_dev > REPORT_TOL * lead_scale.max(1.0),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{AxialFactor, ShapePreset};

    fn straight(radius: f64) -> (ShapeFunction, TubeConfig) {
        (ShapeFunction::constant(radius), TubeConfig::new(1.0, 0, 0.0, 0.0).unwrap())
    }

    #[test]
    fn twist_angle_examples() {
        let cfg = TubeConfig::new(2.0 * PI, 2, 0.0, 0.0).unwrap();
        assert!((twist_angle(0.3, 1.0, &cfg) - 2.3).abs() < 1e-15);
        let untwisted = TubeConfig::new(3.0, 0, 0.1, 0.2).unwrap();
        assert_eq!(twist_angle(0.7, 5.0, &untwisted), 0.7);
        let phi = twist_angle(0.3, 1.0, &cfg);
        assert!((theta_from_twist(phi, 1.0, &cfg) - 0.3).abs() <= 1e-15);
    }

    #[test]
    fn effective_torsion_examples() {
        assert!(effective_torsion(&TubeConfig::new(8.0 * PI, 2, 1.0, 0.5).unwrap()).abs() < 1e-16);
        assert_eq!(effective_torsion(&TubeConfig::new(3.0, 0, 1.0, 0.4).unwrap()), 0.4);
        assert!(effective_torsion(&TubeConfig::new(2.0 * PI, 1, 1.0, 1.0).unwrap()).abs() < 1e-16);
    }

    #[test]
    fn config_rejects_bad_length() {
        assert!(TubeConfig::new(0.0, 1, 0.0, 0.0).is_err());
        assert!(TubeConfig::new(-1.0, 1, 0.0, 0.0).is_err());
    }

    #[test]
    fn straight_tube_triad_is_orthogonal() {
        let (shape, cfg) = straight(2.0);
        let theta = 0.4;
        let t = basis_triad(&shape, &cfg, 0.3, 1.0, theta);
        assert_eq!(t.e[0], Vec3::new(1.0, 0.0, 0.0));
        assert!((t.e[1] - radial_unit(theta)).norm() < 1e-16);
        assert!((t.e[2] - 2.0 * poloidal_unit(theta)).norm() < 1e-15);
        let m = metric_from_triad(t);
        assert!((m.g - Matrix3::from_diagonal(&Vec3::new(1.0, 1.0, 4.0))).norm() < 1e-15);
        assert!(m.valid);
    }

    #[test]
    fn curved_lead_coefficient() {
        let t = Triad::from_jet(ShapeJet::uniform(1.0, 1.0), 0.5, 0.0, 0.0, LeadTerm::Scaled);
        assert_eq!(t.e[0], Vec3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn circular_section_entries() {
        let jet = ShapeJet {
            r: 1.0,
            r_chi: 1.3,
            r_s: 0.0,
            ..ShapeJet::default()
        };
        let m = metric_from_triad(Triad::from_jet(jet, 0.5, 0.0, 0.0, LeadTerm::Scaled));
        assert!((m.g[(0, 0)] - 0.25).abs() < 1e-16);
        assert_eq!(m.g[(0, 2)], 0.0);
        assert_eq!(m.g[(1, 2)], 0.0);
        assert!((m.g[(2, 2)] - 1.0).abs() < 1e-16);
    }

    #[test]
    fn orthogonal_limit_examples() {
        let m = orthogonal_limit_metric(0.7, 1.1, 0.0);
        assert!((m - Matrix3::from_diagonal(&Vec3::new(1.0, 0.49, 1.0))).norm() < 1e-16);
        let m = orthogonal_limit_metric(1.0, 0.0, 0.5);
        assert_eq!(m[(2, 2)], 0.25);
    }

    #[test]
    fn orthogonal_limit_agrees_with_triad_metric_up_to_ordering() {
        // R = chi plays the role of r; chart (s, chi, phi) vs (r, theta, s).
        let shape = ShapeFunction::linear_chi(0.0, 1.0);
        let cfg = TubeConfig::new(5.0, 0, 0.3, 0.0).unwrap();
        for &(s, r, theta) in &[(0.2, 0.4, 0.0), (1.0, 0.9, 2.0), (4.0, 0.1, 5.0)] {
            let g = metric_at(&shape, &cfg, s, r, theta).g;
            let o = orthogonal_limit_metric(r, theta, cfg.kappa0);
            assert!((g[(0, 0)] - o[(2, 2)]).abs() < 1e-15);
            assert!((g[(1, 1)] - o[(0, 0)]).abs() < 1e-15);
            assert!((g[(2, 2)] - o[(1, 1)]).abs() < 1e-15);
        }
    }

    #[test]
    fn report_is_clean_in_orthogonal_limit() {
        let (shape, cfg) = straight(2.0);
        let grid = SampleGrid::uniform(1.0, 0.1, 3, 3, 6);
        let r = printed_matrix_report(&shape, &cfg, &grid);
        // cos^2 + sin^2 may differ from 1 by an ulp
        assert!(r.max_abs_dev() < 1e-15);
        assert!(r.flagged().is_empty());
    }

    #[test]
    fn report_flags_asymmetric_entries_for_generic_draw() {
        let shape: ShapeFunction = ShapePreset::Separable {
            axial: AxialFactor::Linear { a0: 1.0, a1: 0.2 },
            c0: 0.1,
            c1: 0.8,
            phi_amp: 0.2,
            phi_mode: 1.0,
        }
        .into();
        let cfg = TubeConfig::new(4.0, 1, 0.4, 0.9).unwrap();
        let grid = SampleGrid::uniform(4.0, 0.2, 4, 3, 8);
        let r = printed_matrix_report(&shape, &cfg, &grid);
        let flagged = r.flagged();
        assert!(flagged.contains(&"g13"));
        assert!(flagged.contains(&"g31"));
        assert!(flagged.contains(&"g32"));
        let g22 = r.entries.iter().find(|e| e.entry == "g22").unwrap();
        assert!(g22.max_abs_dev < 1e-15 && !g22.flagged);
        assert!(r.unscaled_lead_g11.flagged);
    }
}
