//! Rotation coefficients of the Frenet frame and of the tube triad, the
//! stretching term `(B . grad) v`, and the unstretching field ratio.
//!
//! Derivative slots are indexed `0 = s`, `1 = chi`, `2 = phi`. Triad
//! vectors and probes are given by their Frenet components `(t, n, b)`.
//! Lowered coefficients are `Gamma_{iAj} = e_i . d_A e_j`; mixed ones are
//! `Gamma^j_{Ai} = e^j . d_A e_i` with `e^j` the dual basis.

use nalgebra::{Matrix3, Rotation3, Unit};
use serde::Serialize;

use crate::curve::Vec3;
use crate::error::{Error, Result};
use crate::metric::{basis_triad, theta_from_twist, SampleGrid, TubeConfig};
use crate::shape::{ShapeFunction, ShapeJet};

pub const SLOT_S: usize = 0;
pub const SLOT_CHI: usize = 1;
pub const SLOT_PHI: usize = 2;

/// Frenet-frame rotation coefficients `E_a . d_s E_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrenetRrc {
    /// `n . d_s t = kappa`
    pub n_s_t: f64,
    /// `n . d_s b = -tau`
    pub n_s_b: f64,
    /// `t . d_s n = -kappa`
    pub t_s_n: f64,
    /// `b . d_s n = tau`
    pub b_s_n: f64,
}

impl FrenetRrc {
    /// Full 3x3 table `C[a][b] = E_a . d_s E_b` in `(t, n, b)` order.
    pub fn table(&self) -> Matrix3<f64> {
        Matrix3::new(
            0.0, self.t_s_n, 0.0, //
            self.n_s_t, 0.0, self.n_s_b, //
            0.0, self.b_s_n, 0.0,
        )
    }

    pub fn is_flat(&self) -> bool {
        self.n_s_t == 0.0 && self.n_s_b == 0.0 && self.t_s_n == 0.0 && self.b_s_n == 0.0
    }
}

/// Frenet rotation coefficients from the Frenet-Serret equations.
pub fn frenet_rrc(kappa: f64, tau: f64) -> FrenetRrc {
    FrenetRrc {
        n_s_t: kappa,
        n_s_b: -tau,
        t_s_n: -kappa,
        b_s_n: tau,
    }
}

/// `b . d_s n` with the sign as printed in the coefficient list (`-tau`),
/// which disagrees with `d_s n = -kappa t + tau b`.
pub fn printed_b_s_n(tau: f64) -> f64 {
    -tau
}

/// Triad components on the Frenet frame, `e_i = gamma_{i a} E_a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrenetGamma {
    /// Row `i` holds the components of `e_i`.
    pub gamma: Matrix3<f64>,
}

impl FrenetGamma {
    /// Rebuild `e_i` in space from an explicit Frenet frame.
    pub fn reconstruct(&self, frame: &[Vec3; 3]) -> [Vec3; 3] {
        std::array::from_fn(|i| (0..3).map(|a| self.gamma[(i, a)] * frame[a]).sum())
    }
}

pub fn gamma_components(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64) -> FrenetGamma {
    let t = basis_triad(shape, cfg, s, chi, phi);
    FrenetGamma {
        gamma: Matrix3::from_rows(&[t.e[0].transpose(), t.e[1].transpose(), t.e[2].transpose()]),
    }
}

/// Derivatives of the jet entries `(R, R_s, R_chi, R_phi)` along one slot.
fn jet_along(jet: &ShapeJet, slot: usize) -> [f64; 4] {
    match slot {
        SLOT_S => [jet.r_s, jet.r_ss, jet.r_s_chi, jet.r_s_phi],
        SLOT_CHI => [jet.r_chi, jet.r_s_chi, jet.r_chi_chi, jet.r_chi_phi],
        SLOT_PHI => [jet.r_phi, jet.r_s_phi, jet.r_chi_phi, jet.r_phi_phi],
        _ => panic!("derivative slot must be 0, 1 or 2, got {slot}"),
    }
}

/// Analytic `d_A e_i` in Frenet components at `(s, chi, phi)`.
///
/// Along `s` the chain rule runs through `theta(s, phi)` and through the
/// Frenet-Serret rotation of the frame with the base curvature and torsion.
pub fn triad_derivative(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64, slot: usize) -> [Vec3; 3] {
    let jet = shape.jet(s, chi, phi);
    let theta = theta_from_twist(phi, s, cfg);
    let (sn, c) = theta.sin_cos();
    let kappa = cfg.kappa0;
    let ts = cfg.tau_star();
    let d_theta = match slot {
        SLOT_S => -cfg.twist_rate(),
        SLOT_CHI => 0.0,
        _ => 1.0,
    };
    let [d_r, d_rs, d_rchi, d_rphi] = jet_along(&jet, slot);
    let (r, rs, rchi, rphi) = (jet.r, jet.r_s, jet.r_chi, jet.r_phi);

    let de1 = Vec3::new(
        -d_r * kappa * c + r * kappa * sn * d_theta,
        d_rs * c - rs * sn * d_theta - d_r * ts * sn - r * ts * c * d_theta,
        d_rs * sn + rs * c * d_theta + d_r * ts * c - r * ts * sn * d_theta,
    );
    let de2 = Vec3::new(
        0.0,
        d_rchi * c - rchi * sn * d_theta,
        d_rchi * sn + rchi * c * d_theta,
    );
    let de3 = Vec3::new(
        0.0,
        d_rphi * c - rphi * sn * d_theta - d_r * sn - r * c * d_theta,
        d_r * c - r * sn * d_theta + d_rphi * sn + rphi * c * d_theta,
    );
    let mut d = [de1, de2, de3];
    if slot == SLOT_S {
        let triad = crate::metric::Triad::from_jet(jet, kappa, ts, theta, crate::metric::LeadTerm::Scaled);
        for (di, ei) in d.iter_mut().zip(triad.e.iter()) {
            *di += frame_rotation(ei, kappa, cfg.tau0);
        }
    }
    d
}

/// Contribution `gamma_a d_s E_a` of the rotating Frenet frame.
fn frame_rotation(components: &Vec3, kappa: f64, tau: f64) -> Vec3 {
    let (gt, gn, gb) = (components.x, components.y, components.z);
    Vec3::new(-kappa * gn, kappa * gt - tau * gb, tau * gn)
}

/// `probe . d_s e_i` with the probe given in Frenet components.
pub fn triad_rrc(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64, probe: &Vec3, i: usize) -> f64 {
    probe.dot(&triad_derivative(shape, cfg, s, chi, phi, SLOT_S)[i])
}

/// Frenet frame of the helical centreline with constant `(kappa0, tau0)`,
/// placed at `s = 0` on the coordinate axes.
///
/// The frame rotates rigidly about the Darboux vector `tau t + kappa b`.
pub fn helical_frame(cfg: &TubeConfig, s: f64) -> [Vec3; 3] {
    let darboux = Vec3::new(cfg.tau0, 0.0, cfg.kappa0);
    let rate = darboux.norm();
    let base = [Vec3::x(), Vec3::y(), Vec3::z()];
    if rate == 0.0 {
        return base;
    }
    let rot = Rotation3::from_axis_angle(&Unit::new_normalize(darboux), rate * s);
    base.map(|v| rot * v)
}

/// Finite-difference cross-check of [`triad_rrc`]: `e_i` is realised in
/// space along the helical centreline and differentiated with a
/// fourth-order central stencil of step `h`.
#[allow(clippy::too_many_arguments)]
pub fn triad_rrc_fd(
    shape: &ShapeFunction,
    cfg: &TubeConfig,
    s: f64,
    chi: f64,
    phi: f64,
    probe: &Vec3,
    i: usize,
    h: f64,
) -> f64 {
    let spatial = |sv: f64| {
        let frame = helical_frame(cfg, sv);
        let e = basis_triad(shape, cfg, sv, chi, phi).e[i];
        e.x * frame[0] + e.y * frame[1] + e.z * frame[2]
    };
    let d = (-spatial(s + 2.0 * h) + 8.0 * spatial(s + h) - 8.0 * spatial(s - h) + spatial(s - 2.0 * h)) / (12.0 * h);
    let frame = helical_frame(cfg, s);
    let p = probe.x * frame[0] + probe.y * frame[1] + probe.z * frame[2];
    p.dot(&d)
}

/// Rotation coefficients at one point of the tube.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RrcTable {
    pub frenet: FrenetRrc,
    /// `lowered[A][i][j] = e_i . d_A e_j`
    pub lowered: [[[f64; 3]; 3]; 3],
    /// `mixed[A][j][i] = e^j . d_A e_i`, so that `d_A e_i = mixed[A][j][i] e_j`
    pub mixed: [[[f64; 3]; 3]; 3],
    /// `frenet_proj[A][a][i] = E_a . d_A e_i`
    pub frenet_proj: [[[f64; 3]; 3]; 3],
}

impl RrcTable {
    pub fn zero() -> Self {
        Self {
            frenet: frenet_rrc(0.0, 0.0),
            lowered: [[[0.0; 3]; 3]; 3],
            mixed: [[[0.0; 3]; 3]; 3],
            frenet_proj: [[[0.0; 3]; 3]; 3],
        }
    }

    pub fn build(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64) -> Result<Self> {
        let triad = basis_triad(shape, cfg, s, chi, phi);
        let e = triad.e;
        let triple = triad.triple_product();
        let scale = e.iter().map(|v| v.norm()).product::<f64>();
        if !(triple.abs() > 1e-14 * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::DegenerateTriad { s, chi, phi, triple });
        }
        let dual = [
            e[1].cross(&e[2]) / triple,
            e[2].cross(&e[0]) / triple,
            e[0].cross(&e[1]) / triple,
        ];
        let mut table = Self::zero();
        table.frenet = frenet_rrc(cfg.kappa0, cfg.tau0);
        for a in 0..3 {
            let d = triad_derivative(shape, cfg, s, chi, phi, a);
            for i in 0..3 {
                for j in 0..3 {
                    table.lowered[a][i][j] = e[i].dot(&d[j]);
                    table.mixed[a][j][i] = dual[j].dot(&d[i]);
                }
                for (alpha, x) in d[i].iter().enumerate() {
                    table.frenet_proj[a][alpha][i] = *x;
                }
            }
        }
        Ok(table)
    }
}

/// Contravariant field components along `e1` and `e3`; the `e2` component
/// is absent because the field lies in the magnetic surfaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldState {
    pub b1: f64,
    pub b3: f64,
}

impl FieldState {
    /// `b = -B1 / B3`
    pub fn ratio(&self) -> f64 {
        -self.b1 / self.b3
    }

    fn slot_components(&self) -> [f64; 3] {
        [self.b1, 0.0, self.b3]
    }
}

/// `(B . grad) v = B^A v^i d_A e_i` for constant flow components `v^i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StretchingTerm {
    /// Components on the triad, `S^j = B^A v^i Gamma^j_{Ai}`.
    pub triad: [f64; 3],
    /// Covariant components, `S_k = e_k . S = B^A v^j Gamma_{kAj}`.
    pub covariant: [f64; 3],
    /// Components on the Frenet frame, `E_a . S`.
    pub frenet: [f64; 3],
}

impl StretchingTerm {
    pub fn is_unstretching(&self, tol: f64) -> bool {
        self.triad.iter().chain(self.covariant.iter()).all(|x| x.abs() <= tol)
    }
}

pub fn stretching_term(field: &FieldState, v: &[f64; 3], rrc: &RrcTable) -> StretchingTerm {
    let b = field.slot_components();
    let mut out = StretchingTerm {
        triad: [0.0; 3],
        covariant: [0.0; 3],
        frenet: [0.0; 3],
    };
    for (a, ba) in b.iter().enumerate() {
        if *ba == 0.0 {
            continue;
        }
        for (i, vi) in v.iter().enumerate() {
            for k in 0..3 {
                out.triad[k] += ba * vi * rrc.mixed[a][k][i];
                out.covariant[k] += ba * vi * rrc.lowered[a][k][i];
                out.frenet[k] += ba * vi * rrc.frenet_proj[a][k][i];
            }
        }
    }
    out
}

/// The two readings of `Gamma_112` for a uniform tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gamma112 {
    /// `(K^2 + tau*^2 R^2) / 2`
    pub as_printed: f64,
    /// `(1/2) d_s (gamma_11^2 + gamma_12^2 + gamma_13^2)`
    pub derivative_form: f64,
    pub difference: f64,
    /// `e1 . d_s e2`, the entry under the lowered index convention.
    pub direct: f64,
}

pub fn gamma_112(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64) -> Gamma112 {
    let triad = basis_triad(shape, cfg, s, chi, phi);
    let r = triad.jet.r;
    let ts = cfg.tau_star();
    let as_printed = 0.5 * (triad.k_factor * triad.k_factor + ts * ts * r * r);
    // Only the components are differentiated, so undo the frame rotation
    // (which is orthogonal to e1 anyway).
    let d = triad_derivative(shape, cfg, s, chi, phi, SLOT_S)[0] - frame_rotation(&triad.e[0], cfg.kappa0, cfg.tau0);
    let derivative_form = triad.e[0].dot(&d);
    let direct = triad.e[0].dot(&triad_derivative(shape, cfg, s, chi, phi, SLOT_S)[1]);
    Gamma112 {
        as_printed,
        derivative_form,
        difference: as_printed - derivative_form,
        direct,
    }
}

/// `Gamma_132 = R R_chi tau*`.
pub fn gamma_132(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64) -> f64 {
    let jet = shape.jet(s, chi, phi);
    jet.r * jet.r_chi * cfg.tau_star()
}

/// Toroidal/poloidal ratio imposed by unstretching.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnstretchRatio {
    /// `b = Gamma_132 / Gamma_112`, so that `B1 / B3 = -b` solves
    /// `B1 Gamma_112 + B3 Gamma_132 = 0`.
    pub b: f64,
    /// `Gamma_112 / Gamma_132`, the quotient as printed next to the
    /// constraint; it does not solve it unless `|Gamma_112| = |Gamma_132|`.
    pub b_as_printed: f64,
    pub gamma_112: f64,
    pub gamma_132: f64,
    /// Thin-tube, weak-torsion approximation `-2 R R_chi tau*` of
    /// `B1 / B3`; reported only.
    pub thin_tube_approximation: f64,
}

impl UnstretchRatio {
    pub fn field(&self, b3: f64) -> FieldState {
        FieldState { b1: -self.b * b3, b3 }
    }

    /// `B1 Gamma_112 + B3 Gamma_132` for `B3 = 1`.
    pub fn constraint_residual(&self) -> f64 {
        let f = self.field(1.0);
        f.b1 * self.gamma_112 + f.b3 * self.gamma_132
    }
}

pub fn unstretch_ratio(shape: &ShapeFunction, cfg: &TubeConfig, s: f64, chi: f64, phi: f64) -> Result<UnstretchRatio> {
    let g112 = gamma_112(shape, cfg, s, chi, phi).as_printed;
    let g132 = gamma_132(shape, cfg, s, chi, phi);
    if !(g132.abs() > 1e-15 * g112.abs().max(1.0)) {
        return Err(Error::NoDynamoDegenerate { gamma_132: g132 });
    }
    if g112 == 0.0 {
        return Err(Error::Precondition(format!(
            "Gamma_112 vanishes at (s, chi, phi) = ({s}, {chi}, {phi}); the toroidal/poloidal ratio is unbounded"
        )));
    }
    let jet = shape.jet(s, chi, phi);
    Ok(UnstretchRatio {
        b: g132 / g112,
        b_as_printed: g112 / g132,
        gamma_112: g112,
        gamma_132: g132,
        thin_tube_approximation: -2.0 * jet.r * jet.r_chi * cfg.tau_star(),
    })
}

/// Printed closed forms for `n . d_s e_i` (i = 1, 2, 3) and `t . d_s e_2`.
///
/// Unbalanced brackets are read as: `-R_chis cos - R_chi (w + tau*) cos`
/// for `e2` and `(R_phis + R (w - tau*)) cos - (R_phi (w + tau*) + R_s) sin`
/// for `e3`, with `w = 2 pi N / L`.
pub fn printed_triad_rrc(jet: &ShapeJet, cfg: &TubeConfig, theta: f64) -> [f64; 4] {
    let (sn, c) = theta.sin_cos();
    let w = cfg.twist_rate();
    let ts = cfg.tau_star();
    let k0 = cfg.kappa0;
    let half = jet.r * 0.5 * w;
    [
        k0 + (jet.r_s * w + ts * (jet.r_s + half)) * sn + ts * (jet.r_s + half) * c,
        -jet.r_s_chi * c - jet.r_chi * (w + ts) * c,
        (jet.r_s_phi + jet.r * (w - ts)) * c - (jet.r_phi * (w + ts) + jet.r_s) * sn,
        -jet.r_chi * k0 * c,
    ]
}

/// Worst disagreement between a printed expression and the direct value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormulaDeviation {
    pub quantity: String,
    pub max_abs_dev: f64,
    pub at: [f64; 3],
    pub consistent: bool,
}

/// Compare printed rotation-coefficient expressions with direct
/// differentiation over a grid.
pub fn rrc_check_report(shape: &ShapeFunction, cfg: &TubeConfig, grid: &SampleGrid) -> Vec<FormulaDeviation> {
    const NAMES: [&str; 8] = [
        "Gamma^n_s1",
        "Gamma^n_s2",
        "Gamma^n_s3",
        "Gamma^s_s2",
        "Gamma_bsn",
        "Gamma_112_derivative_form",
        "Gamma_112_lowered",
        "Gamma_132",
    ];
    let mut worst = [(0.0f64, [0.0; 3], 0.0f64); 8];
    let n = Vec3::y();
    let t = Vec3::x();
    for p in grid.points() {
        let [s, chi, phi] = p;
        let jet = shape.jet(s, chi, phi);
        let theta = theta_from_twist(phi, s, cfg);
        let printed = printed_triad_rrc(&jet, cfg, theta);
        let d = triad_derivative(shape, cfg, s, chi, phi, SLOT_S);
        let e = basis_triad(shape, cfg, s, chi, phi).e;
        let d_phi = triad_derivative(shape, cfg, s, chi, phi, SLOT_PHI);
        let g112 = gamma_112(shape, cfg, s, chi, phi);
        let pairs = [
            (printed[0], n.dot(&d[0])),
            (printed[1], n.dot(&d[1])),
            (printed[2], n.dot(&d[2])),
            (printed[3], t.dot(&d[1])),
            (printed_b_s_n(cfg.tau0), frenet_rrc(cfg.kappa0, cfg.tau0).b_s_n),
            (g112.as_printed, g112.derivative_form),
            (g112.as_printed, g112.direct),
            (gamma_132(shape, cfg, s, chi, phi), e[0].dot(&d_phi[1])),
        ];
        for (k, (a, b)) in pairs.iter().enumerate() {
            let dev = (a - b).abs();
            worst[k].2 = worst[k].2.max(a.abs()).max(b.abs());
            if dev > worst[k].0 {
                worst[k].0 = dev;
                worst[k].1 = p;
            }
        }
    }
    NAMES
        .iter()
        .zip(worst)
        .map(|(name, (dev, at, scale))| FormulaDeviation {
            quantity: (*name).to_string(),
            max_abs_dev: dev,
            at,
            consistent: dev <= 1e-12 * scale.max(1.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shape::{AxialFactor, ShapePreset};
    use std::f64::consts::PI;

    #[test]
    fn frenet_entries() {
        assert!(frenet_rrc(0.0, 0.0).is_flat());
        let f = frenet_rrc(0.5, 0.5);
        assert_eq!((f.n_s_t, f.n_s_b, f.t_s_n, f.b_s_n), (0.5, -0.5, -0.5, 0.5));
        let c = f.table();
        assert_eq!(c + c.transpose(), Matrix3::zeros());
        assert_eq!(printed_b_s_n(0.5), -0.5);
    }

    #[test]
    fn tangential_projection_of_d_e2() {
        let shape = ShapeFunction::uniform(1.0, 1.0);
        let cfg = TubeConfig::new(2.0 * PI, 0, 0.5, 0.3).unwrap();
        let v = triad_rrc(&shape, &cfg, 0.0, 1.0, 0.0, &Vec3::x(), 1);
        assert!((v + 0.5).abs() < 1e-15);
    }

    #[test]
    fn straight_constant_tube_has_no_s_coefficients() {
        let shape = ShapeFunction::constant(1.5);
        let cfg = TubeConfig::new(3.0, 0, 0.0, 0.0).unwrap();
        let table = RrcTable::build(&shape, &cfg, 1.0, 0.7, 0.4).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(table.lowered[SLOT_S][i][j], 0.0);
                assert_eq!(table.mixed[SLOT_S][i][j], 0.0);
            }
        }
    }

    #[test]
    fn normal_projection_of_d_e1_reduces_to_curvature() {
        // tau* = 0 with tau0 = 2 pi N / L; theta = pi/2 at s = 0.
        let shape = ShapeFunction::constant(1.0);
        let cfg = TubeConfig::new(2.0 * PI, 1, 0.5, 1.0).unwrap();
        assert!(cfg.tau_star().abs() < 1e-16);
        let v = triad_rrc(&shape, &cfg, 0.0, 1.0, PI / 2.0, &Vec3::y(), 0);
        assert!((v - 0.5).abs() < 1e-15, "{v}");
    }

    #[test]
    fn gamma_examples() {
        let shape = ShapeFunction::constant(1.0);
        let cfg = TubeConfig::new(1.0, 0, 0.0, 0.5).unwrap();
        let g = gamma_components(&shape, &cfg, 0.0, 1.0, PI / 2.0).gamma;
        assert!((g[(0, 1)] + 0.5).abs() < 1e-16);
        assert!(g[(0, 2)].abs() < 1e-16);
        assert_eq!(g[(0, 0)], 1.0);
        let g = gamma_components(&shape, &cfg, 0.0, 1.0, 0.0).gamma;
        assert_eq!((g[(1, 1)], g[(1, 2)]), (1.0, 0.0));
    }

    #[test]
    fn gamma_112_examples() {
        let cfg = TubeConfig::new(1.0, 0, 0.0, 0.5).unwrap();
        let g = gamma_112(&ShapeFunction::constant(2.0), &cfg, 0.3, 1.0, 0.2);
        assert!((g.as_printed - 1.0).abs() < 1e-15);
        assert_eq!(g.derivative_form, 0.0);
        let flat = TubeConfig::new(1.0, 0, 0.0, 0.0).unwrap();
        assert_eq!(gamma_112(&ShapeFunction::constant(3.0), &flat, 0.1, 1.0, 1.0).as_printed, 0.5);
    }

    #[test]
    fn gamma_132_examples() {
        let shape = ShapeFunction::constant(2.0);
        let cfg = TubeConfig::new(1.0, 0, 0.1, 0.25).unwrap();
        assert_eq!(gamma_132(&shape, &cfg, 0.0, 1.0, 0.0), 0.5);
        let untwisted = TubeConfig::new(1.0, 0, 0.1, 0.0).unwrap();
        assert_eq!(gamma_132(&shape, &untwisted, 0.0, 1.0, 0.0), 0.0);
        let plus = TubeConfig::new(2.0 * PI, 1, 0.1, 0.0).unwrap();
        let minus = TubeConfig::new(2.0 * PI, -1, 0.1, 0.0).unwrap();
        let (a, b) = (gamma_132(&shape, &plus, 0.0, 1.0, 0.0), gamma_132(&shape, &minus, 0.0, 1.0, 0.0));
        assert!(a < 0.0 && b > 0.0 && (a + b).abs() < 1e-15);
    }

    #[test]
    fn gamma_132_matches_phi_derivative() {
        let shape = ShapeFunction::separable(AxialFactor::Linear { a0: 1.0, a1: 0.3 }, 0.2, 0.9);
        let cfg = TubeConfig::new(5.0, 2, 0.4, 0.8).unwrap();
        let table = RrcTable::build(&shape, &cfg, 1.2, 0.6, 2.0).unwrap();
        let g = gamma_132(&shape, &cfg, 1.2, 0.6, 2.0);
        assert!((table.lowered[SLOT_PHI][0][1] - g).abs() < 1e-14);
    }

    #[test]
    fn unstretch_ratio_examples() {
        let cfg = TubeConfig::new(1.0, 0, 0.0, 0.1).unwrap();
        let r = unstretch_ratio(&ShapeFunction::constant(1.0), &cfg, 0.0, 1.0, 0.0).unwrap();
        assert!((r.b_as_printed - 5.05).abs() < 1e-14);
        assert!((r.b - 1.0 / 5.05).abs() < 1e-15);
        assert!(r.constraint_residual().abs() < 1e-15);
        let degenerate = TubeConfig::new(1.0, 0, 0.3, 0.0).unwrap();
        assert!(matches!(
            unstretch_ratio(&ShapeFunction::constant(1.0), &degenerate, 0.0, 1.0, 0.0),
            Err(Error::NoDynamoDegenerate { .. })
        ));
        let scaled = unstretch_ratio(&ShapeFunction::uniform(1.0, 4.0), &cfg, 0.0, 1.0, 0.0).unwrap();
        assert!((scaled.b_as_printed - r.b_as_printed / 4.0).abs() < 1e-14);
        assert!((scaled.b - 4.0 * r.b).abs() < 1e-15);
    }

    #[test]
    fn thin_tube_approximation_tracks_constraint_ratio() {
        // K = 1 and weak torsion: Gamma_112 -> 1/2, so -b -> -2 R R_chi tau*.
        let cfg = TubeConfig::new(1.0, 0, 0.0, 1e-4).unwrap();
        let r = unstretch_ratio(&ShapeFunction::uniform(1.0, 0.5), &cfg, 0.0, 1.0, 0.0).unwrap();
        assert!((-r.b / r.thin_tube_approximation - 1.0).abs() < 1e-7);
    }

    #[test]
    fn stretching_examples() {
        let zero = RrcTable::zero();
        let st = stretching_term(&FieldState { b1: 2.0, b3: -1.0 }, &[1.0, 2.0, 3.0], &zero);
        assert!(st.is_unstretching(0.0));

        let mut t = RrcTable::zero();
        t.lowered[SLOT_S][0][1] = 1.01 / 2.0;
        t.lowered[SLOT_PHI][0][1] = 0.1;
        let b = 0.1 / 0.505;
        let st = stretching_term(&FieldState { b1: -b, b3: 1.0 }, &[0.0, 1.0, 0.0], &t);
        assert!(st.covariant[0].abs() < 1e-12);

        let mut t = RrcTable::zero();
        t.frenet_proj[SLOT_S][1][0] = 0.7;
        let st = stretching_term(&FieldState { b1: 1.0, b3: 0.0 }, &[1.0, 0.0, 0.0], &t);
        assert_eq!(st.frenet, [0.0, 0.7, 0.0]);
    }

    #[test]
    fn analytic_and_fd_agree_on_generic_tube() {
        let shape: ShapeFunction = ShapePreset::Separable {
            axial: AxialFactor::Exponential {
                base: 0.9,
                amp: 0.2,
                rate: 0.5,
            },
            c0: 0.3,
            c1: 0.7,
            phi_amp: 0.1,
            phi_mode: 2.0,
        }
        .into();
        let cfg = TubeConfig::new(6.0, 1, 0.6, 0.4).unwrap();
        for i in 0..3 {
            for probe in [Vec3::x(), Vec3::y(), Vec3::z()] {
                let a = triad_rrc(&shape, &cfg, 1.3, 0.8, 2.1, &probe, i);
                let b = triad_rrc_fd(&shape, &cfg, 1.3, 0.8, 2.1, &probe, i, 1e-3);
                assert!((a - b).abs() < 1e-9, "i={i}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn check_report_marks_exact_identities_consistent() {
        let shape = ShapeFunction::separable(AxialFactor::Linear { a0: 1.0, a1: 0.2 }, 0.2, 0.8);
        let cfg = TubeConfig::new(4.0, 1, 0.4, 0.9).unwrap();
        let grid = SampleGrid::uniform(4.0, 0.2, 3, 3, 6);
        let report = rrc_check_report(&shape, &cfg, &grid);
        let get = |n: &str| report.iter().find(|r| r.quantity == n).unwrap();
        assert!(get("Gamma^s_s2").consistent);
        assert!(get("Gamma_132").consistent);
        assert!(!get("Gamma_bsn").consistent);
        assert!(!get("Gamma^n_s2").consistent);
    }
}
