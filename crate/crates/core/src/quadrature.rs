//! Integration over ℝⁿ against Gaussian envelopes, over the n-torus, and over
//! U(n) with Haar measure.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::phase_space::{haar_sample, UnitaryElement};

/// Largest Gauss–Hermite order the rule builder accepts.
pub const GH_MAX_ORDER: usize = 512;

/// Default per-coordinate Gauss–Hermite order for complexified integrands.
pub const GH_DEFAULT_ORDER: usize = 160;

/// Gauss–Hermite order and doubling tolerance shared by the deterministic
/// integrals of the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadConfig {
    pub gh_order: usize,
    pub rtol: f64,
    pub torus_points: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            gh_order: GH_DEFAULT_ORDER,
            rtol: 1e-10,
            torus_points: 32,
        }
    }
}

/// Gauss–Hermite nodes and weights for `∫ f(ξ) e^{-ξ²} dξ`.
#[derive(Debug, Clone)]
pub struct GaussHermiteRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    // w_i e^{ξ_i²}, computed without forming the exponential
    scaled_weights: Vec<f64>,
}

impl GaussHermiteRule {
    /// Golub–Welsch nodes, polished by Newton steps on the normalised Hermite
    /// function `h_m`; weights from `w_i e^{ξ_i²} = 1/(m h_{m-1}(ξ_i)²)`.
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 || order > GH_MAX_ORDER {
            return Err(input(format!(
                "Gauss-Hermite order must be in 1..={GH_MAX_ORDER}, got {order}"
            )));
        }
        let m = order;
        let jacobi = DMatrix::from_fn(m, m, |i, j| {
            if i + 1 == j || j + 1 == i {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.total_cmp(b));

        let mut scaled_weights = Vec::with_capacity(m);
        for x in nodes.iter_mut() {
            for _ in 0..3 {
                let (hm, hm1) = hermite_pair(m, *x);
                let deriv = (2.0 * m as f64).sqrt() * hm1 - *x * hm;
                if deriv == 0.0 {
                    break;
                }
                *x -= hm / deriv;
            }
            let (_, hm1) = hermite_pair(m, *x);
            scaled_weights.push(1.0 / (m as f64 * hm1 * hm1));
        }
        // enforce exact symmetry about 0
        for i in 0..m / 2 {
            let j = m - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (scaled_weights[i] + scaled_weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            scaled_weights[i] = w;
            scaled_weights[j] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        let weights = nodes
            .iter()
            .zip(&scaled_weights)
            .map(|(x, s)| s * (-x * x).exp())
            .collect();
        Ok(Self {
            nodes,
            weights,
            scaled_weights,
        })
    }

    /// Shared, lazily built rule of the given order.
    pub fn cached(order: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussHermiteRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&order) {
            return Ok(rule.clone());
        }
        let rule = Arc::new(Self::new(order)?);
        cache
            .lock()
            .expect("rule cache poisoned")
            .insert(order, rule.clone());
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights multiplied by `e^{ξ_i²}`, for integrands that carry their own Gaussian.
    pub fn scaled_weights(&self) -> &[f64] {
        &self.scaled_weights
    }

    /// `Σ w_i f(ξ_i) ≈ ∫ f(ξ) e^{-ξ²} dξ`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

// (h_m(x), h_{m-1}(x)) for real x
fn hermite_pair(m: usize, x: f64) -> (f64, f64) {
    let mut prev = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if m == 0 {
        return (prev, 0.0);
    }
    let mut cur = 2f64.sqrt() * x * prev;
    for k in 1..m {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// Affine change of variables `ξ = center + scale ∘ t` applied per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Envelope {
    pub fn new(center: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if center.len() != scale.len() || center.is_empty() {
            return Err(input("envelope center and scale must have equal nonzero length"));
        }
        if scale.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(input("envelope scales must be positive and finite"));
        }
        Ok(Self { center, scale })
    }

    pub fn standard(n: usize) -> Self {
        Self {
            center: vec![0.0; n],
            scale: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// Value of a tensor Gauss–Hermite sum together with `Σ |w_i g_i|`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RawSum {
    pub value: Complex64,
    pub mass: f64,
}

pub(crate) fn envelope_sum<G>(mut g: G, env: &Envelope, rule: &GaussHermiteRule) -> RawSum
where
    G: FnMut(&[f64]) -> Complex64,
{
    let n = env.dim();
    let m = rule.order();
    let jac: f64 = env.scale.iter().product();
    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    let mut value = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    loop {
        let mut w = 1.0;
        for j in 0..n {
            let t = rule.nodes[idx[j]];
            point[j] = env.center[j] + env.scale[j] * t;
            w *= rule.scaled_weights[idx[j]];
        }
        let gv = g(&point);
        value += w * gv;
        mass += w * gv.norm();
        // odometer
        let mut j = 0;
        loop {
            if j == n {
                return RawSum {
                    value: value * jac,
                    mass: mass * jac,
                };
            }
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// `∫_{ℝⁿ} g(ξ) dξ` for `g` carrying a Gaussian envelope located at `center`
/// with width `scale`: `Π_j scale_j · Σ_i W_i e^{t_i²} g(center + scale·t_i)`.
pub fn gaussian_envelope_integral<G>(g: G, env: &Envelope, rule: &GaussHermiteRule) -> Complex64
where
    G: FnMut(&[f64]) -> Complex64,
{
    envelope_sum(g, env, rule).value
}

/// An integral accepted by an order-doubling test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadEstimate {
    pub value: Complex64,
    pub order: usize,
    pub check_order: usize,
    /// `|I_fine - I_coarse| / ∫|g|`
    pub rel_change: f64,
}

pub(crate) fn doubled(order: usize) -> Result<usize> {
    let fine = (2 * order).min(GH_MAX_ORDER);
    if fine <= order {
        return Err(input(format!(
            "order {order} leaves no room for a doubling check (max {GH_MAX_ORDER})"
        )));
    }
    Ok(fine)
}

/// [`gaussian_envelope_integral`] at `order` and `2·order`; fails with
/// [`Error::Accuracy`] when the relative change exceeds `rtol`. The finer
/// value is returned.
pub fn integrate_with_doubling<G>(
    mut g: G,
    env: &Envelope,
    order: usize,
    rtol: f64,
    what: &str,
) -> Result<QuadEstimate>
where
    G: FnMut(&[f64]) -> Complex64,
{
    let fine_order = doubled(order)?;
    let coarse = envelope_sum(&mut g, env, &*GaussHermiteRule::cached(order)?);
    let fine = envelope_sum(&mut g, env, &*GaussHermiteRule::cached(fine_order)?);
    let rel_change = relative_change(coarse.value, fine.value, fine.mass);
    if !(rel_change <= rtol) {
        return Err(Error::Accuracy {
            what: what.to_string(),
            coarse_order: order,
            fine_order,
            coarse: format!("{}", coarse.value),
            fine: format!("{}", fine.value),
            change: rel_change,
        });
    }
    Ok(QuadEstimate {
        value: fine.value,
        order: fine_order,
        check_order: order,
        rel_change,
    })
}

pub(crate) fn relative_change(coarse: Complex64, fine: Complex64, mass: f64) -> f64 {
    let diff = (coarse - fine).norm();
    if diff == 0.0 {
        return 0.0;
    }
    let denom = mass.max(fine.norm());
    if denom == 0.0 || !denom.is_finite() {
        return f64::INFINITY;
    }
    diff / denom
}

/// Uniform (trapezoid) rule on `[0, 2π)` with `points` nodes per angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusRule {
    pub points: usize,
}

impl TorusRule {
    pub fn new(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(input("torus rule needs at least one point"));
        }
        Ok(Self { points })
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.points)
            .map(|i| 2.0 * PI * i as f64 / self.points as f64)
            .collect()
    }
}

/// `∫_{[0,2π)ⁿ} g(θ) dθ` by the tensor trapezoid rule.
pub fn torus_integral<G>(g: G, n: usize, rule: TorusRule) -> Complex64
where
    G: FnMut(&[f64]) -> Complex64,
{
    let (fine, _) = torus_sums(g, n, rule.points, false);
    fine
}

/// Torus integral on `2M` points per angle, checked against the `M`-point
/// subgrid; returns the finer value.
pub fn torus_integral_with_doubling<G>(
    g: G,
    n: usize,
    rule: TorusRule,
    rtol: f64,
    what: &str,
) -> Result<QuadEstimate>
where
    G: FnMut(&[f64]) -> Complex64,
{
    let fine_points = 2 * rule.points;
    let (fine, (coarse, mass)) = torus_sums(g, n, fine_points, true);
    let rel_change = relative_change(coarse, fine, mass);
    if !(rel_change <= rtol) {
        return Err(Error::Accuracy {
            what: what.to_string(),
            coarse_order: rule.points,
            fine_order: fine_points,
            coarse: format!("{coarse}"),
            fine: format!("{fine}"),
            change: rel_change,
        });
    }
    Ok(QuadEstimate {
        value: fine,
        order: fine_points,
        check_order: rule.points,
        rel_change,
    })
}

// Returns (integral on the full grid, (integral on the even subgrid, ∫|g|)).
fn torus_sums<G>(mut g: G, n: usize, points: usize, with_subgrid: bool) -> (Complex64, (Complex64, f64))
where
    G: FnMut(&[f64]) -> Complex64,
{
    let vol = (2.0 * PI).powi(n as i32);
    let step = 2.0 * PI / points as f64;
    let mut idx = vec![0usize; n];
    let mut theta = vec![0.0; n];
    let mut full = Complex64::new(0.0, 0.0);
    let mut sub = Complex64::new(0.0, 0.0);
    let mut mass = 0.0;
    let total = points.pow(n as u32);
    for _ in 0..total {
        for j in 0..n {
            theta[j] = step * idx[j] as f64;
        }
        let v = g(&theta);
        full += v;
        mass += v.norm();
        if with_subgrid && idx.iter().all(|i| i % 2 == 0) {
            sub += v;
        }
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < points {
                break;
            }
            idx[j] = 0;
        }
    }
    let full = full * vol / total as f64;
    let sub_total = (points / 2).max(1).pow(n as u32);
    let sub = sub * vol / sub_total as f64;
    (full, (sub, mass * vol / total as f64))
}

/// Monte Carlo estimate over Haar-distributed unitaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Complex-valued Monte Carlo estimate; `stderr` covers both parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McComplexEstimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Rng for sample `index` of a sweep seeded by `seed`. Streams are derived by
/// counter so the draw for a given index never depends on the worker schedule.
pub fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `samples` Haar unitaries in parallel and maps each through `g`;
/// results are returned in sample order.
pub fn haar_map<T, G>(g: G, n: usize, samples: usize, seed: u64) -> Result<Vec<T>>
where
    T: Send,
    G: Fn(&UnitaryElement) -> Result<T> + Sync,
{
    if n == 0 {
        return Err(input("Haar sampling needs n >= 1"));
    }
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i as u64);
            let sigma = haar_sample(n, &mut rng)?;
            g(&sigma)
        })
        .collect()
}

/// `∫_{U(n)} g(σ) dσ` by Monte Carlo with per-sample seeds; deterministic for a
/// fixed seed regardless of worker count.
pub fn haar_integral_mc<G>(g: G, n: usize, samples: usize, seed: u64) -> Result<McEstimate>
where
    G: Fn(&UnitaryElement) -> Result<f64> + Sync,
{
    if samples < 2 {
        return Err(input("Monte Carlo needs at least two samples"));
    }
    let values = haar_map(g, n, samples, seed)?;
    let (mean, stderr) = mean_stderr(&values);
    Ok(McEstimate {
        mean,
        stderr,
        samples,
        seed,
    })
}

/// Complex-valued variant of [`haar_integral_mc`].
pub fn haar_integral_mc_complex<G>(
    g: G,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<McComplexEstimate>
where
    G: Fn(&UnitaryElement) -> Result<Complex64> + Sync,
{
    if samples < 2 {
        return Err(input("Monte Carlo needs at least two samples"));
    }
    let values = haar_map(g, n, samples, seed)?;
    let re: Vec<f64> = values.iter().map(|c| c.re).collect();
    let im: Vec<f64> = values.iter().map(|c| c.im).collect();
    let (mr, sr) = mean_stderr(&re);
    let (mi, si) = mean_stderr(&im);
    Ok(McComplexEstimate {
        mean: Complex64::new(mr, mi),
        stderr: sr.hypot(si),
        samples,
        seed,
    })
}

/// Sample mean and standard error of the mean, reduced in index order.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
