//! Finite-difference check of `curl(v x B) = (B . grad) v - (v . grad) B`
//! for divergence-free fields.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};

type Vec3 = Vector3<f64>;

/// Divergence above which a test field is rejected.
pub const DIVERGENCE_TOL: f64 = 1e-8;

/// Analytic vector field on `R^3`.
#[derive(Clone)]
pub struct VectorField {
    f: Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>,
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("VectorField")
    }
}

/// One Arnold-Beltrami-Childress mode of wavenumber `k`; each component is
/// independent of its own coordinate, so the field is solenoidal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbcMode {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub k: f64,
    pub phase: [f64; 3],
}

impl AbcMode {
    fn eval(&self, x: &Vec3) -> Vec3 {
        let (sx, cx) = (self.k * x.x + self.phase[0]).sin_cos();
        let (sy, cy) = (self.k * x.y + self.phase[1]).sin_cos();
        let (sz, cz) = (self.k * x.z + self.phase[2]).sin_cos();
        Vec3::new(
            self.a * sz + self.c * cy,
            self.b * sx + self.a * cz,
            self.c * sy + self.b * cx,
        )
    }
}

impl VectorField {
    pub fn new(f: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f) }
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        (self.f)(x)
    }

    pub fn uniform(v: [f64; 3]) -> Self {
        let v = Vec3::from(v);
        Self::new(move |_| v)
    }

    /// Rigid rotation `omega x x`.
    pub fn rigid_rotation(omega: [f64; 3]) -> Self {
        let w = Vec3::from(omega);
        Self::new(move |x| w.cross(x))
    }

    pub fn abc(modes: Vec<AbcMode>) -> Self {
        Self::new(move |x| modes.iter().map(|m| m.eval(x)).sum())
    }

    /// Random periodic solenoidal field: the curl of a sum of `n_modes`
    /// potentials `a cos(k . x + p)` with integer wavevectors, components
    /// in `[-k_max, k_max]`, and amplitudes in `[-1, 1]`. Each mode is
    /// `(a x k) sin(k . x + p)`.
    pub fn random_trig<R: Rng>(rng: &mut R, n_modes: usize, k_max: i32) -> Self {
        let k_max = k_max.max(1);
        let modes: Vec<FourierMode> = (0..n_modes)
            .map(|_| {
                let k = loop {
                    let k = Vec3::new(
                        rng.random_range(-k_max..=k_max) as f64,
                        rng.random_range(-k_max..=k_max) as f64,
                        rng.random_range(-k_max..=k_max) as f64,
                    );
                    if k != Vec3::zeros() {
                        break k;
                    }
                };
                let a = Vec3::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                FourierMode {
                    amplitude: a.cross(&k),
                    wavevector: k,
                    phase: rng.random_range(0.0..2.0 * PI),
                }
            })
            .collect();
        Self::new(move |x| modes.iter().map(|m| m.amplitude * (m.wavevector.dot(x) + m.phase).sin()).sum())
    }
}

#[derive(Debug, Clone, Copy)]
struct FourierMode {
    amplitude: Vec3,
    wavevector: Vec3,
    phase: f64,
}

/// Periodic Cartesian grid `n^3` on `[0, 2 pi)^3` and the finite-difference
/// step used for derivatives at its points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurlGrid {
    pub n: usize,
    pub fd_step: f64,
}

impl CurlGrid {
    pub fn new(n: usize, fd_step: f64) -> Result<Self> {
        if n < 2 {
            return Err(invalid("n", format!("grid needs at least 2 points per axis, got {n}")));
        }
        if !(fd_step > 0.0) {
            return Err(invalid("fd_step", format!("must be positive, got {fd_step}")));
        }
        Ok(Self { n, fd_step })
    }

    fn point(&self, idx: usize) -> Vec3 {
        let n = self.n;
        let d = 2.0 * PI / n as f64;
        Vec3::new((idx / (n * n)) as f64 * d, ((idx / n) % n) as f64 * d, (idx % n) as f64 * d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurlReport {
    pub max_deviation: f64,
    pub at: [f64; 3],
    pub max_divergence: f64,
    pub grid: CurlGrid,
}

/// Central-difference Jacobian `J[(i, j)] = d_j F_i`.
fn jacobian(f: &VectorField, x: &Vec3, h: f64) -> nalgebra::Matrix3<f64> {
    let mut j = nalgebra::Matrix3::zeros();
    for axis in 0..3 {
        let mut e = Vec3::zeros();
        e[axis] = h;
        let d = (f.eval(&(x + e)) - f.eval(&(x - e))) / (2.0 * h);
        j.set_column(axis, &d);
    }
    j
}

/// Step of the fourth-order stencil used to screen inputs for divergence.
const DIVERGENCE_STEP: f64 = 1e-3;

/// Fourth-order central-difference divergence, independent of the step
/// used for the identity itself.
fn divergence(f: &VectorField, x: &Vec3) -> f64 {
    let h = DIVERGENCE_STEP;
    (0..3)
        .map(|axis| {
            let mut e = Vec3::zeros();
            e[axis] = h;
            let at = |m: f64| f.eval(&(x + m * e))[axis];
            (8.0 * (at(1.0) - at(-1.0)) - (at(2.0) - at(-2.0))) / (12.0 * h)
        })
        .sum()
}

/// Largest deviation between both sides of the identity over the grid.
pub fn curl_advective_identity_check(v: &VectorField, b: &VectorField, grid: &CurlGrid) -> Result<CurlReport> {
    let h = grid.fd_step;
    let total = grid.n.pow(3);
    let div = (0..total)
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let dv = divergence(v, &x).abs();
            let db = divergence(b, &x).abs();
            (dv.max(db), i)
        })
        .reduce(|| (0.0, 0), max_by_value);
    if div.0 > DIVERGENCE_TOL {
        let p = grid.point(div.1);
        return Err(Error::NonSolenoidal {
            divergence: div.0,
            point: [p.x, p.y, p.z],
        });
    }
    let cross = {
        let (v, b) = (v.clone(), b.clone());
        VectorField::new(move |x| v.eval(x).cross(&b.eval(x)))
    };
    let dev = (0..total)
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let jw = jacobian(&cross, &x, h);
            let curl = Vec3::new(jw[(2, 1)] - jw[(1, 2)], jw[(0, 2)] - jw[(2, 0)], jw[(1, 0)] - jw[(0, 1)]);
            let jv = jacobian(v, &x, h);
            let jb = jacobian(b, &x, h);
            let rhs = jv * b.eval(&x) - jb * v.eval(&x);
            ((curl - rhs).amax(), i)
        })
        .reduce(|| (0.0, 0), max_by_value);
    let p = grid.point(dev.1);
    Ok(CurlReport {
        max_deviation: dev.0,
        at: [p.x, p.y, p.z],
        max_divergence: div.0,
        grid: *grid,
    })
}

/// Larger value wins; ties go to the lower index so the result does not
/// depend on how the reduction was split.
fn max_by_value(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parallel_fields_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = VectorField::random_trig(&mut rng, 2, 2);
        let g = CurlGrid::new(8, 1e-4).unwrap();
        let r = curl_advective_identity_check(&v, &v, &g).unwrap();
        assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
    }

    #[test]
    fn rigid_rotation_against_uniform_field() {
        let v = VectorField::rigid_rotation([0.0, 0.0, 1.0]);
        let b = VectorField::uniform([0.0, 0.0, 1.0]);
        let r = curl_advective_identity_check(&v, &b, &CurlGrid::new(8, 1e-3).unwrap()).unwrap();
        assert!(r.max_deviation < 1e-8);
    }

    #[test]
    fn rejects_compressible_field() {
        let v = VectorField::new(|x| Vec3::new(x.x, 0.0, 0.0));
        let b = VectorField::uniform([1.0, 0.0, 0.0]);
        assert!(matches!(
            curl_advective_identity_check(&v, &b, &CurlGrid::new(4, 1e-3).unwrap()),
            Err(Error::NonSolenoidal { .. })
        ));
    }

    #[test]
    fn random_fields_converge_at_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v = VectorField::random_trig(&mut rng, 3, 2);
        let b = VectorField::random_trig(&mut rng, 3, 2);
        let coarse = curl_advective_identity_check(&v, &b, &CurlGrid::new(8, 1e-2).unwrap()).unwrap();
        let fine = curl_advective_identity_check(&v, &b, &CurlGrid::new(8, 5e-3).unwrap()).unwrap();
        let order = (coarse.max_deviation / fine.max_deviation).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }
}
