//! Parametric space curves, arclength tables and finite-difference Frenet frames.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{gauss_legendre, pairwise_sum};

pub type Vec3 = Vector3<f64>;

/// Step multipliers for the first, second and third derivative stencils,
/// relative to the base step.
const ORDER_STEP: [f64; 3] = [1.0, 8.0, 32.0];

/// Curvature below this is treated as an inflection regardless of noise.
pub const KAPPA_FLOOR: f64 = 1e-12;

/// Built-in curve families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum CurvePreset {
    /// Straight line through the origin, `x(t) = t * direction`.
    Line { direction: [f64; 3] },
    /// Circle of radius `a` in the xy-plane.
    Circle { a: f64 },
    /// Circular helix `(a cos t, a sin t, c t)`.
    Helix { a: f64, c: f64 },
    /// (p, q) torus knot on a torus of radii `major > minor`.
    TorusKnot { p: u32, q: u32, major: f64, minor: f64 },
}

impl CurvePreset {
    fn position(&self, t: f64) -> Vec3 {
        match *self {
            CurvePreset::Line { direction } => Vec3::from(direction) * t,
            CurvePreset::Circle { a } => Vec3::new(a * t.cos(), a * t.sin(), 0.0),
            CurvePreset::Helix { a, c } => Vec3::new(a * t.cos(), a * t.sin(), c * t),
            CurvePreset::TorusKnot { p, q, major, minor } => {
                let (p, q) = (p as f64, q as f64);
                let rho = major + minor * (q * t).cos();
                Vec3::new(rho * (p * t).cos(), rho * (p * t).sin(), minor * (q * t).sin())
            }
        }
    }

    fn velocity(&self, t: f64) -> Vec3 {
        match *self {
            CurvePreset::Line { direction } => Vec3::from(direction),
            CurvePreset::Circle { a } => Vec3::new(-a * t.sin(), a * t.cos(), 0.0),
            CurvePreset::Helix { a, c } => Vec3::new(-a * t.sin(), a * t.cos(), c),
            CurvePreset::TorusKnot { p, q, major, minor } => {
                let (p, q) = (p as f64, q as f64);
                let rho = major + minor * (q * t).cos();
                let rho_t = -minor * q * (q * t).sin();
                let (sp, cp) = (p * t).sin_cos();
                Vec3::new(rho_t * cp - rho * p * sp, rho_t * sp + rho * p * cp, minor * q * (q * t).cos())
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            CurvePreset::Line { direction } => {
                if Vec3::from(direction).norm() == 0.0 {
                    return Err(invalid("direction", "line direction must be nonzero"));
                }
            }
            CurvePreset::Circle { a } => {
                if !(a > 0.0) {
                    return Err(invalid("a", format!("circle radius must be positive, got {a}")));
                }
            }
            CurvePreset::Helix { a, c } => {
                if !(a > 0.0) || !c.is_finite() {
                    return Err(invalid("a", format!("helix needs a > 0 and finite c, got a={a}, c={c}")));
                }
            }
            CurvePreset::TorusKnot { p, q, major, minor } => {
                if p == 0 || q == 0 {
                    return Err(invalid("p", "torus knot winding numbers must be positive"));
                }
                if !(minor > 0.0 && major > minor) {
                    return Err(invalid(
                        "major",
                        format!("torus knot needs major > minor > 0, got {major}, {minor}"),
                    ));
                }
            }
        }
        Ok(())
    }

    fn default_interval(&self) -> (f64, f64) {
        match self {
            CurvePreset::Line { .. } => (0.0, 1.0),
            _ => (0.0, 2.0 * PI),
        }
    }
}

type Sampler = Arc<dyn Fn(f64) -> Vec3 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Preset(CurvePreset),
    Sampler { f: Sampler, smoothness: u32 },
}

/// A regular parametric curve `t -> x(t)` on `[t_min, t_max]`.
///
/// Evaluators must be defined slightly beyond the interval: derivative
/// stencils at the end points reach outside it.
#[derive(Clone)]
pub struct SpaceCurve {
    source: Source,
    t_min: f64,
    t_max: f64,
}

impl fmt::Debug for SpaceCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("SpaceCurve");
        match &self.source {
            Source::Preset(p) => d.field("preset", p),
            Source::Sampler { smoothness, .. } => d.field("sampler_smoothness", smoothness),
        };
        d.field("t_min", &self.t_min).field("t_max", &self.t_max).finish()
    }
}

impl SpaceCurve {
    pub fn from_preset(preset: CurvePreset) -> Result<Self> {
        preset.validate()?;
        let (t_min, t_max) = preset.default_interval();
        Ok(Self {
            source: Source::Preset(preset),
            t_min,
            t_max,
        })
    }

    pub fn line(direction: [f64; 3]) -> Result<Self> {
        Self::from_preset(CurvePreset::Line { direction })
    }

    pub fn circle(a: f64) -> Result<Self> {
        Self::from_preset(CurvePreset::Circle { a })
    }

    pub fn helix(a: f64, c: f64) -> Result<Self> {
        Self::from_preset(CurvePreset::Helix { a, c })
    }

    pub fn torus_knot(p: u32, q: u32, major: f64, minor: f64) -> Result<Self> {
        Self::from_preset(CurvePreset::TorusKnot { p, q, major, minor })
    }

    /// Wrap a user evaluator. `smoothness` is the number of continuous
    /// derivatives the evaluator guarantees; frames need at least three.
    pub fn from_sampler<F>(f: F, t_min: f64, t_max: f64, smoothness: u32) -> Result<Self>
    where
        F: Fn(f64) -> Vec3 + Send + Sync + 'static,
    {
        if smoothness < 3 {
            return Err(invalid(
                "smoothness",
                format!("frames need a C3 evaluator, declared C{smoothness}"),
            ));
        }
        Self {
            source: Source::Sampler {
                f: Arc::new(f),
                smoothness,
            },
            t_min,
            t_max,
        }
        .with_interval(t_min, t_max)
    }

    pub fn with_interval(mut self, t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_max > t_min) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(invalid("interval", format!("need t_min < t_max, got [{t_min}, {t_max}]")));
        }
        self.t_min = t_min;
        self.t_max = t_max;
        Ok(self)
    }

    pub fn preset(&self) -> Option<&CurvePreset> {
        match &self.source {
            Source::Preset(p) => Some(p),
            Source::Sampler { .. } => None,
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn position(&self, t: f64) -> Vec3 {
        match &self.source {
            Source::Preset(p) => p.position(t),
            Source::Sampler { f, .. } => f(t),
        }
    }

    fn range(&self) -> f64 {
        self.t_max - self.t_min
    }

    /// Step used for sampler speeds inside arclength integrals.
    fn speed_step(&self) -> f64 {
        2e-4 * self.range()
    }

    fn velocity(&self, t: f64, h: f64) -> Vec3 {
        richardson(|k| first_difference(self, t, k), h)
    }

    /// `|dx/dt|`: analytic for presets, differenced for samplers.
    fn speed(&self, t: f64) -> f64 {
        match &self.source {
            Source::Preset(p) => p.velocity(t).norm(),
            Source::Sampler { .. } => self.velocity(t, self.speed_step()).norm(),
        }
    }

    /// Build the arclength table with `n_samples` Simpson panels.
    pub fn arclength(self, n_samples: usize) -> Result<ArcCurve> {
        let table = ArclengthTable::build(&self, n_samples)?;
        Ok(ArcCurve { curve: self, table })
    }
}

fn first_difference(curve: &SpaceCurve, t: f64, h: f64) -> Vec3 {
    (curve.position(t + h) - curve.position(t - h)) / (2.0 * h)
}

fn second_difference(curve: &SpaceCurve, t: f64, h: f64) -> Vec3 {
    (curve.position(t + h) - 2.0 * curve.position(t) + curve.position(t - h)) / (h * h)
}

fn third_difference(curve: &SpaceCurve, t: f64, h: f64) -> Vec3 {
    (curve.position(t + 2.0 * h) - 2.0 * curve.position(t + h) + 2.0 * curve.position(t - h)
        - curve.position(t - 2.0 * h))
        / (2.0 * h * h * h)
}

/// One Richardson step for a second-order central stencil.
fn richardson(d: impl Fn(f64) -> Vec3, h: f64) -> Vec3 {
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

/// Cumulative arclength `s(t)` on a uniform parameter grid.
///
/// Each panel is integrated with Simpson's rule on `|dx/dt|`; the inverse
/// `t(s)` is a monotone cubic Hermite interpolant whose slopes are the exact
/// `dt/ds = 1/|dx/dt|` at the knots, limited Fritsch-Carlson style.
#[derive(Debug, Clone)]
pub struct ArclengthTable {
    t: Vec<f64>,
    s: Vec<f64>,
    dt_ds: Vec<f64>,
}

impl ArclengthTable {
    fn build(curve: &SpaceCurve, n_samples: usize) -> Result<Self> {
        if n_samples < 16 {
            return Err(invalid("n_samples", format!("need at least 16 samples, got {n_samples}")));
        }
        let (t0, t1) = curve.interval();
        let dt = (t1 - t0) / n_samples as f64;
        let t: Vec<f64> = (0..=n_samples).map(|i| t0 + i as f64 * dt).collect();
        let speed: Vec<f64> = t.iter().map(|&ti| curve.speed(ti)).collect();
        let mut s = Vec::with_capacity(t.len());
        s.push(0.0);
        for i in 0..n_samples {
            let mid = curve.speed(0.5 * (t[i] + t[i + 1]));
            let panel = (t[i + 1] - t[i]) / 6.0 * (speed[i] + 4.0 * mid + speed[i + 1]);
            let next = s[i] + panel;
            if !(next > s[i]) {
                return Err(Error::NonMonotoneArclength { index: i + 1, t: t[i + 1] });
            }
            s.push(next);
        }
        let mut dt_ds = Vec::with_capacity(t.len());
        for (i, &v) in speed.iter().enumerate() {
            if !(v > 0.0) {
                return Err(Error::ZeroSpeed { t: t[i], speed: v });
            }
            dt_ds.push(1.0 / v);
        }
        limit_slopes(&s, &t, &mut dt_ds);
        Ok(Self { t, s, dt_ds })
    }

    pub fn length(&self) -> f64 {
        *self.s.last().expect("table is never empty")
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.t.iter().copied().zip(self.s.iter().copied())
    }

    /// Parameter value at arclength `s` (clamped to the table).
    pub fn t_of_s(&self, s: f64) -> f64 {
        let n = self.s.len();
        let s = s.clamp(self.s[0], self.s[n - 1]);
        let k = match self.s.partition_point(|&x| x <= s) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let (s0, s1) = (self.s[k], self.s[k + 1]);
        let (y0, y1) = (self.t[k], self.t[k + 1]);
        let (m0, m1) = (self.dt_ds[k], self.dt_ds[k + 1]);
        let h = s1 - s0;
        let u = (s - s0) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1
    }
}

/// Fritsch-Carlson limiter keeping the Hermite interpolant monotone.
fn limit_slopes(x: &[f64], y: &[f64], m: &mut [f64]) {
    for k in 0..x.len() - 1 {
        let delta = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
        let a = m[k] / delta;
        let b = m[k + 1] / delta;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[k] = tau * a * delta;
            m[k + 1] = tau * b * delta;
        }
    }
}

/// Tangent, normal, binormal, curvature and torsion at arclength `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrenetData {
    pub s: f64,
    pub position: Vec3,
    pub tangent: Vec3,
    pub normal: Vec3,
    pub binormal: Vec3,
    pub kappa: f64,
    pub tau: f64,
}

impl FrenetData {
    /// Largest deviation of the triad from a right-handed orthonormal frame.
    pub fn orthonormality_defect(&self) -> f64 {
        let (t, n, b) = (self.tangent, self.normal, self.binormal);
        [
            (t.norm() - 1.0).abs(),
            (n.norm() - 1.0).abs(),
            (b.norm() - 1.0).abs(),
            t.dot(&n).abs(),
            t.dot(&b).abs(),
            n.dot(&b).abs(),
            (t.cross(&n) - b).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// A curve together with its arclength table; all queries are in arclength.
#[derive(Debug, Clone)]
pub struct ArcCurve {
    curve: SpaceCurve,
    table: ArclengthTable,
}

impl ArcCurve {
    pub fn curve(&self) -> &SpaceCurve {
        &self.curve
    }

    pub fn table(&self) -> &ArclengthTable {
        &self.table
    }

    pub fn length(&self) -> f64 {
        self.table.length()
    }

    /// Default finite-difference step, `1e-4` of the arclength range.
    pub fn default_step(&self) -> f64 {
        1e-4 * self.length()
    }

    fn check_range(&self, s: f64) -> Result<()> {
        let l = self.length();
        let slack = 1e-12 * l;
        if !(s >= -slack && s <= l + slack) {
            return Err(Error::OutOfRange { s, length: l });
        }
        Ok(())
    }

    /// Parameter reached by moving an arclength `ds` from `t0`.
    ///
    /// Newton iteration on a 16-point Gauss-Legendre integral of the speed,
    /// so the offset is exact to rounding and smooth in `ds`.
    pub fn advance(&self, t0: f64, ds: f64) -> Result<f64> {
        if ds == 0.0 {
            return Ok(t0);
        }
        let (x, w) = gauss_legendre(16);
        let arc = |t1: f64| {
            let half = 0.5 * (t1 - t0);
            let mid = 0.5 * (t1 + t0);
            let terms: Vec<f64> = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| wi * half * self.curve.speed(mid + half * xi))
                .collect();
            pairwise_sum(&terms)
        };
        let v0 = self.curve.speed(t0);
        if !(v0 > 0.0) {
            return Err(Error::ZeroSpeed { t: t0, speed: v0 });
        }
        let mut t = t0 + ds / v0;
        for _ in 0..50 {
            let v = self.curve.speed(t);
            if !(v > 0.0) {
                return Err(Error::ZeroSpeed { t, speed: v });
            }
            let step = (arc(t) - ds) / v;
            t -= step;
            if step.abs() <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                break;
            }
        }
        Ok(t)
    }

    /// Frenet data at arclength `s` from finite-difference derivatives with
    /// base step `h` (arclength units).
    pub fn frenet_at(&self, s: f64, h: f64) -> Result<FrenetData> {
        self.check_range(s)?;
        if !(h > 0.0) {
            return Err(invalid("h", format!("step must be positive, got {h}")));
        }
        let t = self.table.t_of_s(s);
        self.frenet_at_parameter(s, t, h)
    }

    fn frenet_at_parameter(&self, s: f64, t: f64, h: f64) -> Result<FrenetData> {
        let c = &self.curve;
        let local_speed = c.speed(t);
        if !(local_speed > 0.0) || !local_speed.is_finite() {
            return Err(Error::ZeroSpeed { t, speed: local_speed });
        }
        let ht = h / local_speed;

        let d1 = c.velocity(t, ORDER_STEP[0] * ht);
        let h2 = ORDER_STEP[1] * ht;
        let d2 = richardson(|k| second_difference(c, t, k), h2);
        let d3 = richardson(|k| third_difference(c, t, k), ORDER_STEP[2] * ht);

        let position = c.position(t);
        let speed = d1.norm();
        let scale = position.norm() + t.abs() * speed + speed * ht;
        if speed <= 1e-14 * scale.max(1.0) {
            return Err(Error::ZeroSpeed { t, speed });
        }
        let cross = d1.cross(&d2);
        let cross_norm = cross.norm();
        let kappa = cross_norm / speed.powi(3);
        // Rounding in the second difference bounds the resolvable curvature.
        let accel_noise = 8.0 * f64::EPSILON * scale / (h2 * h2);
        let threshold = KAPPA_FLOOR.max(accel_noise / (speed * speed));
        if kappa < threshold {
            return Err(Error::StraightSegment { s, kappa, threshold });
        }
        let tau = cross.dot(&d3) / (cross_norm * cross_norm);
        let tangent = d1 / speed;
        let binormal = cross / cross_norm;
        let normal = binormal.cross(&tangent);
        Ok(FrenetData {
            s,
            position,
            tangent,
            normal,
            binormal,
            kappa,
            tau,
        })
    }

    /// Norms of the three Frenet-Serret residuals at `s`, with frame
    /// derivatives taken by central differences of step `h` in arclength.
    ///
    /// Frames at `s` and `s +/- h` use the curve's default derivative step.
    pub fn frenet_serret_residual(&self, s: f64, h: f64) -> Result<[f64; 3]> {
        self.check_range(s)?;
        if !(h > 0.0) {
            return Err(invalid("h", format!("step must be positive, got {h}")));
        }
        let step = self.default_step();
        let t0 = self.table.t_of_s(s);
        let centre = self.frenet_at_parameter(s, t0, step)?;
        let tp = self.advance(t0, h)?;
        let tm = self.advance(t0, -h)?;
        let plus = self.frenet_at_parameter(s + h, tp, step)?;
        let minus = self.frenet_at_parameter(s - h, tm, step)?;
        let inv = 1.0 / (2.0 * h);
        let dt = (plus.tangent - minus.tangent) * inv;
        let dn = (plus.normal - minus.normal) * inv;
        let db = (plus.binormal - minus.binormal) * inv;
        let (k, tau) = (centre.kappa, centre.tau);
        Ok([
            (dt - k * centre.normal).norm(),
            (dn + k * centre.tangent - tau * centre.binormal).norm(),
            (db + tau * centre.normal).norm(),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helix_curvature_and_torsion() {
        let c = SpaceCurve::helix(1.0, 1.0).unwrap().arclength(256).unwrap();
        for s in [0.5, 2.0, 4.4, 8.0] {
            let f = c.frenet_at(s, c.default_step()).unwrap();
            assert!((f.kappa - 0.5).abs() < 5e-7, "kappa {}", f.kappa);
            assert!((f.tau - 0.5).abs() < 5e-7, "tau {}", f.tau);
            assert!(f.orthonormality_defect() < 1e-10);
        }
    }

    #[test]
    fn circle_has_zero_torsion() {
        let c = SpaceCurve::circle(2.0).unwrap().arclength(64).unwrap();
        let f = c.frenet_at(3.0, 1e-4).unwrap();
        assert!((f.kappa - 0.5).abs() < 5e-7);
        assert_eq!(f.tau, 0.0);
    }

    #[test]
    fn line_is_a_straight_segment_error() {
        let c = SpaceCurve::line([1.0, 0.0, 0.0]).unwrap().arclength(16).unwrap();
        match c.frenet_at(0.5, 1e-4) {
            Err(Error::StraightSegment { kappa, .. }) => assert!(kappa < 1e-6),
            other => panic!("expected straight segment error, got {other:?}"),
        }
    }

    #[test]
    fn circle_and_helix_lengths() {
        let c = SpaceCurve::circle(2.0).unwrap().arclength(64).unwrap();
        assert!((c.length() - 4.0 * PI).abs() < 1e-8);
        let h = SpaceCurve::helix(1.0, 1.0).unwrap().arclength(64).unwrap();
        assert!((h.length() - 2.0 * PI * 2f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn unit_line_reparametrization_is_identity() {
        let c = SpaceCurve::line([0.0, 1.0, 0.0]).unwrap().arclength(16).unwrap();
        for (t, s) in c.table().samples() {
            assert!((t - s).abs() < 1e-14);
        }
        for s in [0.0, 0.1, 0.33, 0.5, 0.97, 1.0] {
            assert!((c.table().t_of_s(s) - s).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_speed_curve_is_rejected() {
        let c = SpaceCurve::from_sampler(|_| Vec3::new(1.0, 2.0, 3.0), 0.0, 1.0, 5).unwrap();
        assert!(matches!(c.arclength(16), Err(Error::NonMonotoneArclength { .. })));
    }

    #[test]
    fn sampler_needs_c3() {
        assert!(SpaceCurve::from_sampler(|t| Vec3::new(t, 0.0, 0.0), 0.0, 1.0, 2).is_err());
    }

    #[test]
    fn too_few_samples() {
        assert!(SpaceCurve::circle(1.0).unwrap().arclength(8).is_err());
    }

    #[test]
    fn out_of_range_query() {
        let c = SpaceCurve::circle(1.0).unwrap().arclength(32).unwrap();
        assert!(matches!(c.frenet_at(10.0, 1e-4), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn advance_moves_exact_arclength_on_helix() {
        let c = SpaceCurve::helix(1.0, 1.0).unwrap().arclength(64).unwrap();
        let t1 = c.advance(1.0, 0.1).unwrap();
        assert!(((t1 - 1.0) * 2f64.sqrt() - 0.1).abs() < 1e-13);
    }
}
