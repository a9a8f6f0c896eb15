//! Deterministic one- and three-dimensional quadrature.
//!
//! Every reduction goes through [`pairwise_sum`], which splits the input at
//! fixed midpoints. The result depends only on the ordered list of weighted
//! samples, never on how the samples were produced or partitioned across
//! worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const PAIRWISE_LEAF: usize = 8;

/// Sum in a fixed binary tree over the slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_LEAF {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Gauss-Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Simpson,
    GaussLegendre,
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "simpson" => Ok(Rule::Simpson),
            "gauss_legendre" | "gauss-legendre" | "gl" => Ok(Rule::GaussLegendre),
            other => Err(format!("unknown quadrature rule `{other}`")),
        }
    }
}

/// Nodes and weights of a rule on `[a, b]`.
///
/// For Simpson, `n` is the number of intervals (even); `n + 1` nodes result.
/// For Gauss-Legendre, `n` is the number of nodes.
pub fn axis_rule(rule: Rule, n: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    match rule {
        Rule::Simpson => {
            if n < 2 || !n.is_multiple_of(2) {
                return Err(invalid("n", format!("Simpson needs an even interval count >= 2, got {n}")));
            }
            let h = (b - a) / n as f64;
            let nodes = (0..=n).map(|i| a + i as f64 * h).collect();
            let weights = (0..=n)
                .map(|i| {
                    let c = if i == 0 || i == n {
                        1.0
                    } else if i % 2 == 1 {
                        4.0
                    } else {
                        2.0
                    };
                    c * h / 3.0
                })
                .collect();
            Ok((nodes, weights))
        }
        Rule::GaussLegendre => {
            if n < 1 {
                return Err(invalid("n", "Gauss-Legendre needs at least one node"));
            }
            let (x, w) = gauss_legendre(n);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            Ok((
                x.iter().map(|xi| mid + half * xi).collect(),
                w.iter().map(|wi| half * wi).collect(),
            ))
        }
    }
}

/// One-dimensional integral with pairwise reduction.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rule: Rule, n: usize) -> Result<f64> {
    let (x, w) = axis_rule(rule, n, a, b)?;
    let terms: Vec<f64> = x.iter().zip(&w).map(|(xi, wi)| wi * f(*xi)).collect();
    Ok(pairwise_sum(&terms))
}

/// Tensor-product rule per axis over a box in (s, chi, phi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub n_s: usize,
    pub n_chi: usize,
    pub n_phi: usize,
}

impl QuadratureSpec {
    pub fn new(rule: Rule, n_s: usize, n_chi: usize, n_phi: usize) -> Result<Self> {
        let spec = Self {
            rule,
            n_s,
            n_chi,
            n_phi,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, n) in [("n_s", self.n_s), ("n_chi", self.n_chi), ("n_phi", self.n_phi)] {
            if n < 4 {
                return Err(invalid(name, format!("needs at least 4 points per axis, got {n}")));
            }
            if self.rule == Rule::Simpson && n % 2 != 0 {
                return Err(invalid(name, format!("Simpson needs an even interval count, got {n}")));
            }
        }
        Ok(())
    }

    pub fn with_rule(self, rule: Rule) -> Self {
        Self { rule, ..self }
    }

    /// Evaluate the tensor-product rule over `[s0,s1] x [c0,c1] x [p0,p1]`.
    ///
    /// Samples are evaluated in parallel along the s axis, collected in
    /// canonical (s, chi, phi) order, then reduced pairwise.
    pub fn integrate_box<F>(&self, f: F, s: (f64, f64), chi: (f64, f64), phi: (f64, f64)) -> Result<f64>
    where
        F: Fn(f64, f64, f64) -> f64 + Sync,
    {
        let terms = self.weighted_samples(f, s, chi, phi)?;
        Ok(pairwise_sum(&terms))
    }

    pub(crate) fn weighted_samples<F>(
        &self,
        f: F,
        s: (f64, f64),
        chi: (f64, f64),
        phi: (f64, f64),
    ) -> Result<Vec<f64>>
    where
        F: Fn(f64, f64, f64) -> f64 + Sync,
    {
        self.validate()?;
        let (xs, ws) = axis_rule(self.rule, self.n_s, s.0, s.1)?;
        let (xc, wc) = axis_rule(self.rule, self.n_chi, chi.0, chi.1)?;
        let (xp, wp) = axis_rule(self.rule, self.n_phi, phi.0, phi.1)?;
        let slabs: Vec<Vec<f64>> = xs
            .par_iter()
            .zip(ws.par_iter())
            .map(|(si, wsi)| {
                let mut slab = Vec::with_capacity(xc.len() * xp.len());
                for (ci, wci) in xc.iter().zip(&wc) {
                    for (pi, wpi) in xp.iter().zip(&wp) {
                        slab.push(wsi * wci * wpi * f(*si, *ci, *pi));
                    }
                }
                slab
            })
            .collect();
        Ok(slabs.concat())
    }

    /// Grid nodes per axis, in the order used by [`Self::integrate_box`].
    pub fn nodes(&self, s: (f64, f64), chi: (f64, f64), phi: (f64, f64)) -> Result<[Vec<f64>; 3]> {
        Ok([
            axis_rule(self.rule, self.n_s, s.0, s.1)?.0,
            axis_rule(self.rule, self.n_chi, chi.0, chi.1)?.0,
            axis_rule(self.rule, self.n_phi, phi.0, phi.1)?.0,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two_for_large_n() {
        let (_, w) = gauss_legendre(64);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, Rule::Simpson, 4).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_rejects_odd_counts() {
        assert!(axis_rule(Rule::Simpson, 5, 0.0, 1.0).is_err());
        assert!(QuadratureSpec::new(Rule::Simpson, 4, 3, 4).is_err());
        assert!(QuadratureSpec::new(Rule::GaussLegendre, 4, 3, 4).is_err());
    }

    #[test]
    fn pairwise_sum_is_order_fixed() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64).sin() * 1e-3 + 1.0).collect();
        assert_eq!(pairwise_sum(&v).to_bits(), pairwise_sum(&v.clone()).to_bits());
        assert!((pairwise_sum(&v) - v.iter().sum::<f64>()).abs() < 1e-10);
    }

    #[test]
    fn box_integral_of_separable_function() {
        let q = QuadratureSpec::new(Rule::GaussLegendre, 6, 6, 6).unwrap();
        let v = q
            .integrate_box(|s, c, p| s * c * c * p, (0.0, 1.0), (0.0, 2.0), (0.0, 3.0))
            .unwrap();
        // (1/2)(8/3)(9/2) = 6
        assert!((v - 6.0).abs() < 1e-12);
    }
}
