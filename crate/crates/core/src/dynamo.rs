//! Reduced kinematic dynamo on circular-section tubes: resonance, the
//! shrinking radius profile, the poloidal field solution, growth-rate
//! classification and residuals of the scalar induction equations.

pub mod curl;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Rule};

/// Gauss-Legendre nodes used for `int_0^s R(u) du`.
const RADIUS_INTEGRAL_NODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamoParams {
    /// Growth rate.
    pub lambda: f64,
    /// Toroidal flow modulus.
    pub v1: f64,
    /// Poloidal flow modulus.
    pub v3: f64,
    pub kappa0: f64,
    /// Field amplitude.
    pub b0: f64,
    /// Radius slope at `s = 0`; must be negative on the growing branch.
    pub a0: f64,
    /// Radius at `s = 0`.
    pub r0: f64,
    /// Poloidal angle at which the growth constraint is evaluated.
    pub theta: f64,
    pub omega_s: f64,
    /// Magnetic diffusivity; carried along but only `eta = 0` is evolved.
    pub eta: f64,
}

impl Default for DynamoParams {
    fn default() -> Self {
        Self {
            lambda: 0.5,
            v1: 1.0,
            v3: 1.0,
            kappa0: 0.5,
            b0: 1.0,
            a0: -0.1,
            r0: 1.0,
            theta: std::f64::consts::FRAC_PI_2,
            omega_s: 1.0,
            eta: 0.0,
        }
    }
}

impl DynamoParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("lambda", self.lambda),
            ("v1", self.v1),
            ("v3", self.v3),
            ("kappa0", self.kappa0),
            ("b0", self.b0),
            ("a0", self.a0),
            ("r0", self.r0),
            ("theta", self.theta),
            ("omega_s", self.omega_s),
            ("eta", self.eta),
        ];
        for (name, v) in all {
            if !v.is_finite() {
                return Err(invalid(name, format!("must be finite, got {v}")));
            }
        }
        for (name, v) in [("v1", self.v1), ("v3", self.v3), ("r0", self.r0)] {
            if v <= 0.0 {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.eta != 0.0 {
            return Err(invalid("eta", "only the diffusionless regime eta = 0 is solved"));
        }
        Ok(())
    }
}

/// Torsion `tau0 = -1 / R` that makes poloidal and toroidal frequencies equal.
pub fn resonance_torsion(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(invalid("R", format!("radius must be positive, got {r}")));
    }
    Ok(-1.0 / r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyRelation {
    /// `omega_theta = -tau0 R omega_s`
    pub omega_theta: f64,
    /// `omega_theta / omega_s = -tau0 R`
    pub ratio: f64,
    /// `-omega_s / kappa_R` with `kappa_R = 1 / R`.
    pub operator_factor: f64,
}

pub fn frequency_operator_relation(tau0: f64, r: f64, omega_s: f64) -> Result<FrequencyRelation> {
    if !(r > 0.0) {
        return Err(invalid("R", format!("radius must be positive, got {r}")));
    }
    let ratio = -tau0 * r;
    Ok(FrequencyRelation {
        omega_theta: ratio * omega_s,
        ratio,
        operator_factor: -omega_s * r,
    })
}

/// `(1 - exp(-x)) / x`, continuous at zero.
fn phi1(x: f64) -> f64 {
    if x.abs() < 1e-300 {
        1.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Solution of `2 v3 R_ss + lambda R_s = 0` with `R(0) = r0`, `R_s(0) = A0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiusProfile {
    pub r0: f64,
    pub a0: f64,
    /// Exact decay rate `lambda / (2 v3)`.
    pub exact_rate: f64,
    /// Decay rate `lambda / v1` of the printed closed form.
    pub printed_rate: f64,
    /// `A0 > 0` with `lambda > 0`: the branch the sign argument excludes.
    pub excluded_branch: bool,
}

impl RadiusProfile {
    pub fn new(params: &DynamoParams) -> Result<Self> {
        params.validate()?;
        if params.lambda < 0.0 {
            return Err(invalid("lambda", format!("radius profile needs lambda >= 0, got {}", params.lambda)));
        }
        Ok(Self {
            r0: params.r0,
            a0: params.a0,
            exact_rate: params.lambda / (2.0 * params.v3),
            printed_rate: params.lambda / params.v1,
            excluded_branch: params.lambda > 0.0 && params.a0 > 0.0,
        })
    }

    pub fn r(&self, s: f64) -> f64 {
        self.r0 + self.a0 * s * phi1(self.exact_rate * s)
    }

    pub fn r_s(&self, s: f64) -> f64 {
        self.a0 * (-self.exact_rate * s).exp()
    }

    pub fn r_ss(&self, s: f64) -> f64 {
        -self.exact_rate * self.r_s(s)
    }

    /// `R(0) + A0 / k`, or `None` when the profile is linear.
    pub fn r_infinity(&self) -> Option<f64> {
        (self.exact_rate > 0.0).then(|| self.r0 + self.a0 / self.exact_rate)
    }

    /// Slope from the printed closed form, `A0 exp(-lambda s / v1)`.
    pub fn printed_r_s(&self, s: f64) -> f64 {
        self.a0 * (-self.printed_rate * s).exp()
    }

    /// `printed_rate / exact_rate`; 2 when `v1 = v3`.
    pub fn rate_ratio(&self) -> Option<f64> {
        (self.exact_rate > 0.0).then(|| self.printed_rate / self.exact_rate)
    }

    /// First `s >= 0` with `R(s) = 0`, if any.
    pub fn zero_crossing(&self) -> Option<f64> {
        if self.a0 >= 0.0 {
            return None;
        }
        let k = self.exact_rate;
        if k == 0.0 {
            return Some(-self.r0 / self.a0);
        }
        let arg = 1.0 + self.r0 * k / self.a0;
        (arg > 0.0).then(|| -arg.ln() / k)
    }

    /// Error if `R <= 0` at any grid point.
    pub fn check_positive(&self, s_grid: &[f64]) -> Result<()> {
        for &s in s_grid {
            let r = self.r(s);
            if !(r > 0.0) {
                return Err(Error::ShrinkThroughZero {
                    s,
                    radius: r,
                    crossing: self.zero_crossing(),
                });
            }
        }
        Ok(())
    }
}

/// Sampled radius profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSamples {
    pub profile: RadiusProfile,
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub r_s: Vec<f64>,
    pub r_infinity: Option<f64>,
}

pub fn radius_profile(params: &DynamoParams, s_grid: &[f64]) -> Result<RadiusSamples> {
    let profile = RadiusProfile::new(params)?;
    profile.check_positive(s_grid)?;
    Ok(RadiusSamples {
        profile,
        s: s_grid.to_vec(),
        r: s_grid.iter().map(|&s| profile.r(s)).collect(),
        r_s: s_grid.iter().map(|&s| profile.r_s(s)).collect(),
        r_infinity: profile.r_infinity(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldMode {
    /// `B3 = B0 exp(lambda [t - int R / v1])`
    Printed,
    /// `B3 = B0 exp(lambda t - (R - R(0)) - (lambda / v1) int R)`
    Exact,
}

impl std::str::FromStr for FieldMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "printed" | "as_printed" | "as-printed" => Ok(Self::Printed),
            "exact" => Ok(Self::Exact),
            other => Err(format!("unknown field mode `{other}` (expected printed or exact)")),
        }
    }
}

/// Poloidal field `B3(s, t)` along a radius profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldSolution {
    pub profile: RadiusProfile,
    pub mode: FieldMode,
    pub lambda: f64,
    pub v1: f64,
    pub b0: f64,
}

pub fn field_solution(params: &DynamoParams, profile: RadiusProfile, mode: FieldMode) -> Result<FieldSolution> {
    params.validate()?;
    Ok(FieldSolution {
        profile,
        mode,
        lambda: params.lambda,
        v1: params.v1,
        b0: params.b0,
    })
}

impl FieldSolution {
    /// `int_0^s R(u) du` by Gauss-Legendre quadrature.
    pub fn radius_integral(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        integrate(|u| self.profile.r(u), 0.0, s, Rule::GaussLegendre, RADIUS_INTEGRAL_NODES)
            .expect("fixed node count is valid")
    }

    fn exponent(&self, s: f64) -> f64 {
        let transport = self.lambda * self.radius_integral(s) / self.v1;
        match self.mode {
            FieldMode::Printed => -transport,
            FieldMode::Exact => -(self.profile.r(s) - self.profile.r0) - transport,
        }
    }

    pub fn b3(&self, s: f64, t: f64) -> f64 {
        self.b0 * (self.lambda * t + self.exponent(s)).exp()
    }

    /// `d_s B3` by a sixth-order central difference.
    pub fn b3_s(&self, s: f64, t: f64) -> f64 {
        let rate = 1.0 + (self.lambda / self.v1 * self.profile.r0).abs() + self.profile.a0.abs();
        let h = 1e-2 / rate;
        let f = |x: f64| self.b3(x, t);
        (45.0 * (f(s + h) - f(s - h)) - 9.0 * (f(s + 2.0 * h) - f(s - 2.0 * h)) + (f(s + 3.0 * h) - f(s - 3.0 * h)))
            / (60.0 * h)
    }

    /// `[R_s + (lambda / v1) R] B3 + d_s B3`.
    pub fn transport_residual(&self, s: f64, t: f64) -> f64 {
        let p = &self.profile;
        (p.r_s(s) + self.lambda / self.v1 * p.r(s)) * self.b3(s, t) + self.b3_s(s, t)
    }
}

/// Growth rate `kappa0 / (1 - R kappa0 cos(theta))` from the reduced
/// equipartition constraint.
pub fn growth_rate_from_constraint(r: f64, kappa0: f64, theta: f64) -> Result<f64> {
    let denominator = 1.0 - r * kappa0 * theta.cos();
    if denominator.abs() < 1e-14 {
        return Err(Error::ValidityBoundary { denominator });
    }
    Ok(kappa0 / denominator)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthSensitivity {
    pub lambda: f64,
    /// `d lambda / d R = kappa0^2 cos(theta) / (1 - R kappa0 cos(theta))^2`
    pub d_lambda_d_r: f64,
    /// Shrinking the tube raises the growth rate (`d lambda / d R < 0`).
    pub shrinking_enhances: bool,
}

pub fn growth_sensitivity(r: f64, kappa0: f64, theta: f64) -> Result<GrowthSensitivity> {
    let lambda = growth_rate_from_constraint(r, kappa0, theta)?;
    let c = theta.cos();
    let d = 1.0 - r * kappa0 * c;
    let d_lambda_d_r = kappa0 * kappa0 * c / (d * d);
    Ok(GrowthSensitivity {
        lambda,
        d_lambda_d_r,
        shrinking_enhances: d_lambda_d_r < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Grow,
    Marginal,
    Decay,
}

pub fn classify(lambda: f64) -> Classification {
    if lambda > 0.0 {
        Classification::Grow
    } else if lambda < 0.0 {
        Classification::Decay
    } else {
        Classification::Marginal
    }
}

/// Signed residuals of the scalar induction equations at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InductionResiduals {
    /// `[R_ss (v1 + v3) + lambda R_s] B1 - [B3 v1 - v3 B1] R_ss`
    pub toroidal: f64,
    /// `[R_s + (lambda / v1) R] B3 + d_s B3`
    pub transport: f64,
    /// `lambda (1 - R kappa0 cos(theta)) B1 - kappa0 B3`
    pub toroidal_growth: f64,
    /// `2 R_ss v3 + lambda R_s`
    pub radius_balance: f64,
    /// `lambda (1 - R kappa0 cos(theta)) - kappa0`
    pub growth_constraint: f64,
    /// `toroidal - B radius_balance` under equipartition with `v1 = v3`; `None` otherwise.
    pub toroidal_reduction: Option<f64>,
    /// `toroidal_growth - B growth_constraint` under equipartition; `None` otherwise.
    pub growth_reduction: Option<f64>,
}

/// Field values entering the induction residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InductionFields {
    pub b1: f64,
    pub b3: f64,
    pub b3_s: f64,
}

impl InductionFields {
    /// Equipartition `B1 = B3` with the solution's poloidal field.
    pub fn equipartition(solution: &FieldSolution, s: f64, t: f64) -> Self {
        let b3 = solution.b3(s, t);
        Self {
            b1: b3,
            b3,
            b3_s: solution.b3_s(s, t),
        }
    }
}

pub fn induction_scalar_system(params: &DynamoParams, profile: &RadiusProfile, fields: &InductionFields, s: f64) -> InductionResiduals {
    let (lambda, v1, v3, k0) = (params.lambda, params.v1, params.v3, params.kappa0);
    let (r, r_s, r_ss) = (profile.r(s), profile.r_s(s), profile.r_ss(s));
    let InductionFields { b1, b3, b3_s } = *fields;
    let k_factor = 1.0 - r * k0 * params.theta.cos();
    let toroidal = (r_ss * (v1 + v3) + lambda * r_s) * b1 - (b3 * v1 - v3 * b1) * r_ss;
    let transport = (r_s + lambda / v1 * r) * b3 + b3_s;
    let toroidal_growth = lambda * k_factor * b1 - k0 * b3;
    let radius_balance = 2.0 * r_ss * v3 + lambda * r_s;
    let growth_constraint = lambda * k_factor - k0;
    let equipartition = b1 == b3;
    InductionResiduals {
        toroidal,
        transport,
        toroidal_growth,
        radius_balance,
        growth_constraint,
        toroidal_reduction: (equipartition && v1 == v3).then_some(toroidal - b1 * radius_balance),
        growth_reduction: equipartition.then_some(toroidal_growth - b1 * growth_constraint),
    }
}

/// Printed-vs-exact comparisons over an s grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamoReport {
    pub classification: Classification,
    /// `lambda / v1` against `lambda / (2 v3)`.
    pub printed_rate: f64,
    pub exact_rate: f64,
    pub rate_ratio: Option<f64>,
    /// Largest `|R_s printed - R_s exact|` over the grid.
    pub slope_max_abs_dev: f64,
    pub excluded_branch: bool,
    pub r_infinity: Option<f64>,
    /// Largest `|residual|` of the printed field in the governing equation.
    pub printed_field_max_residual: f64,
    /// Largest `|residual - R_s B3|` for the printed field.
    pub printed_residual_vs_rs_b3: f64,
    pub exact_field_max_residual: f64,
    pub growth: Option<GrowthSensitivity>,
}

pub fn dynamo_report(params: &DynamoParams, s_grid: &[f64], t: f64) -> Result<DynamoReport> {
    let samples = radius_profile(params, s_grid)?;
    let p = samples.profile;
    let printed = field_solution(params, p, FieldMode::Printed)?;
    let exact = field_solution(params, p, FieldMode::Exact)?;
    let mut slope = 0.0f64;
    let mut pr = 0.0f64;
    let mut pr_vs = 0.0f64;
    let mut ex = 0.0f64;
    for &s in s_grid {
        slope = slope.max((p.printed_r_s(s) - p.r_s(s)).abs());
        let rp = printed.transport_residual(s, t);
        pr = pr.max(rp.abs());
        pr_vs = pr_vs.max((rp - p.r_s(s) * printed.b3(s, t)).abs());
        ex = ex.max(exact.transport_residual(s, t).abs());
    }
    Ok(DynamoReport {
        classification: classify(params.lambda),
        printed_rate: p.printed_rate,
        exact_rate: p.exact_rate,
        rate_ratio: p.rate_ratio(),
        slope_max_abs_dev: slope,
        excluded_branch: p.excluded_branch,
        r_infinity: p.r_infinity(),
        printed_field_max_residual: pr,
        printed_residual_vs_rs_b3: pr_vs,
        exact_field_max_residual: ex,
        growth: growth_sensitivity(params.r0, params.kappa0, params.theta).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(lambda: f64, a0: f64) -> DynamoParams {
        DynamoParams {
            lambda,
            a0,
            ..DynamoParams::default()
        }
    }

    fn grid(n: usize, s_max: f64) -> Vec<f64> {
        (0..n).map(|i| s_max * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn resonance_examples() {
        assert_eq!(resonance_torsion(2.0).unwrap(), -0.5);
        assert_eq!(resonance_torsion(1.0).unwrap(), -1.0);
        assert!(resonance_torsion(0.0).is_err());
        for r in [0.3, 1.0, 7.0] {
            let rel = frequency_operator_relation(resonance_torsion(r).unwrap(), r, 1.3).unwrap();
            assert!((rel.ratio - 1.0).abs() < 1e-15);
        }
        assert_eq!(frequency_operator_relation(0.0, 2.0, 1.0).unwrap().omega_theta, 0.0);
        let rel = frequency_operator_relation(0.25, 2.0, 1.0).unwrap();
        assert_eq!(rel.omega_theta, -0.5);
        assert_eq!(rel.operator_factor, -2.0);
    }

    #[test]
    fn radius_profile_example() {
        let p = RadiusProfile::new(&params(0.5, -0.1)).unwrap();
        for s in [0.0, 0.5, 3.0, 20.0] {
            assert!((p.r_s(s) + 0.1 * (-0.25 * s).exp()).abs() < 1e-15);
            let oracle = 1.0 - 0.4 * (1.0 - (-0.25 * s).exp());
            assert!((p.r(s) - oracle).abs() < 1e-14);
        }
        assert!((p.r_infinity().unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(p.rate_ratio(), Some(2.0));
        assert!(!p.excluded_branch);
        assert!(RadiusProfile::new(&params(0.5, 0.1)).unwrap().excluded_branch);
    }

    #[test]
    fn marginal_radius_profile_is_linear() {
        let p = RadiusProfile::new(&params(0.0, -0.1)).unwrap();
        assert_eq!(p.r_s(3.0), -0.1);
        assert!((p.r(3.0) - 0.7).abs() < 1e-15);
        assert_eq!(p.r_infinity(), None);
        let near = RadiusProfile::new(&params(1e-8, -0.1)).unwrap();
        for s in [0.5, 2.0, 5.0] {
            assert!((near.r(s) - (1.0 - 0.1 * s)).abs() < 1e-6);
        }
    }

    #[test]
    fn shrink_through_zero_names_crossing() {
        let prm = params(0.1, -0.5);
        match radius_profile(&prm, &grid(50, 10.0)) {
            Err(Error::ShrinkThroughZero { crossing: Some(c), .. }) => {
                let p = RadiusProfile::new(&prm).unwrap();
                assert!(p.r(c).abs() < 1e-12);
            }
            other => panic!("expected shrink error, got {other:?}"),
        }
        assert!(radius_profile(&params(-0.1, -0.1), &grid(3, 1.0)).is_err());
    }

    #[test]
    fn exact_field_satisfies_transport_equation() {
        let prm = params(0.5, -0.1);
        let p = RadiusProfile::new(&prm).unwrap();
        let sol = field_solution(&prm, p, FieldMode::Exact).unwrap();
        for s in [0.0, 0.7, 2.5, 6.0] {
            assert!(sol.transport_residual(s, 0.3).abs() < 1e-10, "{}", sol.transport_residual(s, 0.3));
        }
        let printed = field_solution(&prm, p, FieldMode::Printed).unwrap();
        for s in [0.7, 2.5] {
            let r = printed.transport_residual(s, 0.3);
            assert!((r - p.r_s(s) * printed.b3(s, 0.3)).abs() < 1e-10);
        }
    }

    #[test]
    fn time_scaling_and_constant_radius_limit() {
        let prm = params(0.5, 0.0);
        let p = RadiusProfile::new(&prm).unwrap();
        for mode in [FieldMode::Printed, FieldMode::Exact] {
            let sol = field_solution(&prm, p, mode).unwrap();
            for s in [0.0, 1.5, 4.0] {
                let ratio = sol.b3(s, 2.0) / sol.b3(s, 0.5);
                assert!((ratio / (0.5f64 * 1.5).exp() - 1.0).abs() < 1e-13);
                let closed = (0.5 * (1.2 - s)).exp();
                assert!((sol.b3(s, 1.2) - closed).abs() < 1e-13 * closed);
            }
        }
    }

    #[test]
    fn growth_rate_examples() {
        assert!((growth_rate_from_constraint(1.0, 0.5, PI / 2.0).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(growth_rate_from_constraint(1.0, 0.0, 0.3).unwrap(), 0.0);
        assert!(matches!(
            growth_rate_from_constraint(2.0, 0.5, 0.0),
            Err(Error::ValidityBoundary { .. })
        ));
        let at_zero = growth_sensitivity(1.0, 0.5, 0.0).unwrap();
        assert!(at_zero.d_lambda_d_r > 0.0 && !at_zero.shrinking_enhances);
        let opposite = growth_sensitivity(1.0, 0.5, PI).unwrap();
        assert!(opposite.shrinking_enhances);
        assert_eq!(classify(0.5), Classification::Grow);
        assert_eq!(classify(0.0), Classification::Marginal);
        assert_eq!(classify(-1.0), Classification::Decay);
    }

    #[test]
    fn induction_system_reductions() {
        let prm = params(0.5, -0.1);
        let p = RadiusProfile::new(&prm).unwrap();
        let sol = field_solution(&prm, p, FieldMode::Exact).unwrap();
        for s in [0.0, 1.0, 3.0] {
            let f = InductionFields::equipartition(&sol, s, 0.2);
            let r = induction_scalar_system(&prm, &p, &f, s);
            assert!(r.toroidal_reduction.unwrap().abs() < 1e-12);
            assert!(r.growth_reduction.unwrap().abs() < 1e-12);
            assert!(r.radius_balance.abs() < 1e-15);
        }
        let flat = RadiusProfile::new(&params(0.5, 0.0)).unwrap();
        let f = InductionFields { b1: 0.3, b3: -2.0, b3_s: 1.0 };
        assert_eq!(induction_scalar_system(&prm, &flat, &f, 1.0).toroidal, 0.0);
    }

    #[test]
    fn report_shows_discrepancies() {
        let r = dynamo_report(&params(0.5, -0.1), &grid(21, 8.0), 0.0).unwrap();
        assert_eq!(r.rate_ratio, Some(2.0));
        assert!(r.slope_max_abs_dev > 0.0);
        assert!(r.exact_field_max_residual < 1e-10);
        assert!(r.printed_field_max_residual > 1e-3);
        assert!(r.printed_residual_vs_rs_b3 < 1e-10);
    }
}
