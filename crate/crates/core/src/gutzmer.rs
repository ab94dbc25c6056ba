//! Both sides of Gutzmer's formula for Hermite expansions, the `K`-average of
//! diagonal special Hermite functions, the polarized identity, the explicit
//! one-dimensional orthogonality relations, and the Hermite-semigroup image
//! norm with its heat-kernel ingredients.
//!
//! The left side `∫_{ℝⁿ}∫_K |π(σ.(z,w))F(ξ)|² dσ dξ` is computed directly:
//! for every point of the orbit the `ξ`-integral is a polynomial of degree
//! `2K_max` against a shifted Gaussian, so a Gauss–Hermite rule of order
//! `K_max + 2` is exact. For `n = 1`, `K` is the circle and the orbit average is
//! a trapezoid sum; for `n >= 2` the Haar average is split as a deterministic
//! average over the diagonal torus inside a Monte Carlo average over `U(n)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{domain, input, Error, Result};
use crate::phase_space::{
    group_action, special_hermite, special_hermite_with_rule, torus_action, MultiIndex,
    PhasePoint, TorusElement, UnitaryElement,
};
use crate::quadrature::{
    doubled, haar_integral_mc, haar_integral_mc_complex, haar_map, integrate_with_doubling,
    mean_stderr, relative_change, torus_integral, torus_integral_with_doubling, Envelope,
    GaussHermiteRule, McEstimate, QuadConfig, TorusRule,
};
use crate::special_functions::{
    hermite_fns_scaled, hermite_fns_upto, laguerre_fn, laguerre_fn_imaginary_upto, laguerre_polys_upto, level_weight,
};
use crate::spectral::HermiteExpansion;

/// Quadrature and Monte Carlo settings for the Gutzmer left side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GutzmerConfig {
    /// Per-coordinate Gauss–Hermite order; `None` uses the exact order `K_max + 2`.
    pub gh_order: Option<usize>,
    /// Circle points for `n = 1`.
    pub torus_points: usize,
    /// Points per angle of the diagonal torus for `n >= 2`.
    pub torus_points_nd: usize,
    pub mc_samples: usize,
    pub seed: u64,
    /// Tolerance of the order-doubling checks.
    pub rtol: f64,
}

impl Default for GutzmerConfig {
    fn default() -> Self {
        Self {
            gh_order: None,
            torus_points: 64,
            torus_points_nd: 4,
            mc_samples: 20_000,
            seed: 0x5eed,
            rtol: 1e-10,
        }
    }
}

// Values of a dense coefficient tensor on a product grid:
// out[i_1, …, i_n] = Σ_α c_α Π_j tables[j][i_j][α_j].
fn grid_values(dense: &[Complex64], side: usize, tables: &[Vec<Vec<Complex64>>]) -> Vec<Complex64> {
    let n = tables.len();
    let mut dims = vec![side; n];
    let mut cur = dense.to_vec();
    for j in 0..n {
        let m = tables[j].len();
        let outer: usize = dims[..j].iter().product();
        let inner: usize = dims[j + 1..].iter().product();
        let mut next = vec![Complex64::new(0.0, 0.0); outer * m * inner];
        for o in 0..outer {
            for a in 0..side {
                let src = &cur[(o * side + a) * inner..(o * side + a + 1) * inner];
                if src.iter().all(|c| c.re == 0.0 && c.im == 0.0) {
                    continue;
                }
                for i in 0..m {
                    let h = tables[j][i][a];
                    let dst = &mut next[(o * m + i) * inner..(o * m + i + 1) * inner];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += h * s;
                    }
                }
            }
        }
        dims[j] = m;
        cur = next;
    }
    cur
}

// Σ_i Π_j weights[j][i_j] · values[i] over a row-major product grid.
fn weighted_grid_sum(values: &[Complex64], weights: &[Vec<f64>]) -> Complex64 {
    let n = weights.len();
    let mut idx = vec![0usize; n];
    let mut acc = Complex64::new(0.0, 0.0);
    for v in values {
        let w: f64 = (0..n).map(|j| weights[j][idx[j]]).product();
        acc += w * v;
        for j in (0..n).rev() {
            idx[j] += 1;
            if idx[j] < weights[j].len() {
                break;
            }
            idx[j] = 0;
        }
    }
    acc
}

/// `ξ`-integrals `∫ π(z,w)F(ξ) · conj(π(z,w)G(ξ)) dξ` along an orbit.
struct OrbitIntegrator {
    n: usize,
    side: usize,
    dense_f: Vec<Complex64>,
    dense_g: Option<Vec<Complex64>>,
    rule: Arc<GaussHermiteRule>,
}

impl OrbitIntegrator {
    fn new(f: &HermiteExpansion, g: Option<&HermiteExpansion>, order: usize) -> Result<Self> {
        let k_max = f.k_max().max(g.map_or(0, |g| g.k_max()));
        let widen = |e: &HermiteExpansion| -> Result<Vec<Complex64>> {
            let mut w = HermiteExpansion::new(e.dim(), k_max)?;
            for (a, c) in e.iter() {
                w.set(a.clone(), *c)?;
            }
            Ok(w.dense())
        };
        if let Some(g) = g {
            if g.dim() != f.dim() {
                return Err(input("expansions have different dimensions"));
            }
        }
        Ok(Self {
            n: f.dim(),
            side: k_max + 1,
            dense_f: widen(f)?,
            dense_g: g.map(widen).transpose()?,
            rule: GaussHermiteRule::cached(order)?,
        })
    }

    fn with_order(&self, order: usize) -> Result<Self> {
        Ok(Self {
            n: self.n,
            side: self.side,
            dense_f: self.dense_f.clone(),
            dense_g: self.dense_g.clone(),
            rule: GaussHermiteRule::cached(order)?,
        })
    }

    fn inner(&self, p: &PhasePoint) -> Result<Complex64> {
        if p.dim() != self.n {
            return Err(input("phase point and expansion dimensions differ"));
        }
        let k_max = self.side - 1;
        let mut tables = Vec::with_capacity(self.n);
        let mut weights = Vec::with_capacity(self.n);
        let mut buf = Vec::with_capacity(self.side);
        for j in 0..self.n {
            let (z, w) = (p.z()[j], p.w()[j]);
            // |e^{i(zξ+½zw)}|² |h(ξ+w)|² ∝ e^{-(ξ+u+y)²}
            let center = -(w.re + z.im);
            let mut tab = Vec::with_capacity(self.rule.order());
            let mut wts = Vec::with_capacity(self.rule.order());
            for (&t, &sw) in self.rule.nodes().iter().zip(self.rule.scaled_weights()) {
                let xi = center + t;
                hermite_fns_upto(k_max, Complex64::new(xi, 0.0) + w, &mut buf)?;
                tab.push(buf.clone());
                let im_phase = (z * xi + 0.5 * z * w).im;
                wts.push(sw * (-2.0 * im_phase).exp());
            }
            tables.push(tab);
            weights.push(wts);
        }
        let fv = grid_values(&self.dense_f, self.side, &tables);
        let prod: Vec<Complex64> = match &self.dense_g {
            None => fv.iter().map(|c| Complex64::new(c.norm_sqr(), 0.0)).collect(),
            Some(dg) => {
                let gv = grid_values(dg, self.side, &tables);
                fv.iter().zip(&gv).map(|(a, b)| a * b.conj()).collect()
            }
        };
        Ok(weighted_grid_sum(&prod, &weights))
    }

    /// `(2π)^{-n} ∫_D inner(k(θ).p) dθ` on an `M`-point-per-angle grid.
    fn torus_average(&self, p: &PhasePoint, points: usize) -> Result<Complex64> {
        let mut failure = None;
        let v = torus_integral(
            |theta| self.rotated(p, theta, &mut failure),
            self.n,
            TorusRule::new(points)?,
        );
        match failure {
            Some(e) => Err(e),
            None => Ok(v / (2.0 * PI).powi(self.n as i32)),
        }
    }

    fn rotated(&self, p: &PhasePoint, theta: &[f64], failure: &mut Option<Error>) -> Complex64 {
        torus_action(&TorusElement(theta.to_vec()), p)
            .and_then(|q| self.inner(&q))
            .unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            })
    }
}

fn gh_order_for(f: &HermiteExpansion, g: Option<&HermiteExpansion>, cfg: &GutzmerConfig) -> usize {
    let k_max = f.k_max().max(g.map_or(0, |g| g.k_max()));
    cfg.gh_order.unwrap_or(k_max + 2)
}

/// Left side of the Gutzmer identity with its quadrature metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LhsValue {
    pub value: Complex64,
    /// Monte Carlo standard error (`n >= 2` only).
    pub stderr: Option<f64>,
    pub gh_order: usize,
    pub torus_points: usize,
    pub mc_samples: Option<usize>,
    pub seed: Option<u64>,
    /// Largest relative change seen in the enforced doubling checks.
    pub doubling_change: f64,
    /// Base-point change of the diagonal-torus average from `M` to `2M`
    /// points (`n >= 2`); a variance diagnostic, not a bias.
    pub torus_change: Option<f64>,
}

fn sesquilinear_lhs(
    f: &HermiteExpansion,
    g: Option<&HermiteExpansion>,
    p: &PhasePoint,
    cfg: &GutzmerConfig,
) -> Result<LhsValue> {
    let n = f.dim();
    if p.dim() != n {
        return Err(input("phase point and expansion dimensions differ"));
    }
    p.check_caps()?;
    let order = gh_order_for(f, g, cfg);
    let orbit = OrbitIntegrator::new(f, g, order)?;

    // exactness check of the ξ-rule at the base point
    let fine = orbit.with_order(doubled(order)?)?;
    let (a, b) = (orbit.inner(p)?, fine.inner(p)?);
    let gh_change = relative_change(a, b, b.norm());
    if !(gh_change <= cfg.rtol) {
        return Err(Error::Accuracy {
            what: "Gutzmer ξ-integral".into(),
            coarse_order: order,
            fine_order: doubled(order)?,
            coarse: format!("{a}"),
            fine: format!("{b}"),
            change: gh_change,
        });
    }

    if n == 1 {
        let mut failure = None;
        let est = torus_integral_with_doubling(
            |theta| orbit.rotated(p, theta, &mut failure),
            1,
            TorusRule::new(cfg.torus_points)?,
            cfg.rtol,
            "Gutzmer circle average",
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let est = est?;
        return Ok(LhsValue {
            value: est.value / (2.0 * PI),
            stderr: None,
            gh_order: order,
            torus_points: est.order,
            mc_samples: None,
            seed: None,
            doubling_change: gh_change.max(est.rel_change),
            torus_change: None,
        });
    }

    // For every fixed θ, σ ↦ k(θ)σ preserves Haar measure, so the torus
    // average is unbiased for any M; M only trades cost against variance.
    // The M vs 2M change at the base point is reported, not enforced.
    let coarse_t = orbit.torus_average(p, cfg.torus_points_nd)?;
    let fine_t = orbit.torus_average(p, 2 * cfg.torus_points_nd)?;
    let torus_change = relative_change(coarse_t, fine_t, fine_t.norm());

    let est = haar_integral_mc_complex(
        |sigma| orbit.torus_average(&group_action(sigma, p)?, cfg.torus_points_nd),
        n,
        cfg.mc_samples,
        cfg.seed,
    )?;
    Ok(LhsValue {
        value: est.mean,
        stderr: Some(est.stderr),
        gh_order: order,
        torus_points: cfg.torus_points_nd,
        mc_samples: Some(cfg.mc_samples),
        seed: Some(cfg.seed),
        doubling_change: gh_change,
        torus_change: Some(torus_change),
    })
}

/// `∫_{ℝⁿ}∫_K |π(σ.(z,w))F(ξ)|² dσ dξ`.
pub fn gutzmer_lhs(f: &HermiteExpansion, p: &PhasePoint, cfg: &GutzmerConfig) -> Result<LhsValue> {
    sesquilinear_lhs(f, None, p, cfg)
}

/// Right side of the Gutzmer identity with its per-level terms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GutzmerRhs {
    pub value: f64,
    /// `e^{u·y−v·x} k!(n−1)!/(k+n−1)! φ_k(2iy,2iv) ∥P_k f∥²` for each level.
    pub terms: Vec<f64>,
}

/// `e^{u·y − v·x} Σ_k k!(n−1)!/(k+n−1)! φ_k(2iy,2iv) ∥P_k f∥²`; exact for a
/// truncated expansion.
pub fn gutzmer_rhs(f: &HermiteExpansion, p: &PhasePoint) -> Result<GutzmerRhs> {
    let n = f.dim();
    if p.dim() != n {
        return Err(input("phase point and expansion dimensions differ"));
    }
    let rho = f.level_norms();
    let phi = laguerre_fn_imaginary_upto(f.k_max(), n, p.imaginary_radius_sq())?;
    let pref = p.symplectic_exponent().exp();
    let terms: Vec<f64> = rho
        .iter()
        .enumerate()
        .map(|(k, r)| pref * level_weight(k, n) * phi[k] * r * r)
        .collect();
    Ok(GutzmerRhs {
        value: terms.iter().sum(),
        terms,
    })
}

/// Exponential rate `s` of `term_k ≈ A e^{-s√k}` fitted over the upper half of
/// the nonzero terms; a positive rate means the series converges.
pub fn series_decay_rate(terms: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = terms
        .iter()
        .enumerate()
        .skip(terms.len() / 2)
        .filter(|(_, t)| **t > 0.0)
        .map(|(k, t)| ((k as f64).sqrt(), t.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(input("too few nonzero terms to fit a decay rate"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Ok(-sxy / sxx)
}

/// Acceptance thresholds for a Gutzmer comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative tolerance on deterministic paths.
    pub rtol: f64,
    /// Monte Carlo paths accept deviations up to `mc_sigma` standard errors.
    pub mc_sigma: f64,
    /// Largest acceptable Monte Carlo standard error relative to the right side.
    pub mc_budget: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-6,
            mc_sigma: 3.0,
            mc_budget: 1e-2,
        }
    }
}

/// Both sides of Gutzmer's identity at one phase point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GutzmerReport {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub lhs: LhsValue,
    pub rhs: f64,
    /// Contribution of levels above `K_max`; zero for a truncated expansion.
    pub rhs_tail: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Accepted deviation: `rtol·rhs` deterministically, `mc_sigma·stderr` under Monte Carlo.
    pub tolerance: f64,
    /// Monte Carlo only: whether `stderr <= mc_budget·rhs`.
    pub stderr_within_budget: Option<bool>,
    pub pass: bool,
}

/// Evaluates both sides and compares them. A Monte Carlo comparison passes
/// when the deviation is within `mc_sigma` standard errors and the standard
/// error itself is within budget.
pub fn gutzmer_report(
    f: &HermiteExpansion,
    p: &PhasePoint,
    cfg: &GutzmerConfig,
    tol: &Tolerances,
) -> Result<GutzmerReport> {
    let lhs = gutzmer_lhs(f, p, cfg)?;
    let rhs = gutzmer_rhs(f, p)?.value;
    let abs_err = (lhs.value - rhs).norm();
    let rel_err = abs_err / rhs.abs();
    let (tolerance, budget) = match lhs.stderr {
        None => (tol.rtol * rhs.abs(), None),
        Some(se) => (tol.mc_sigma * se, Some(se <= tol.mc_budget * rhs.abs())),
    };
    Ok(GutzmerReport {
        z: p.z().to_vec(),
        w: p.w().to_vec(),
        lhs,
        rhs,
        rhs_tail: 0.0,
        abs_err,
        rel_err,
        tolerance,
        stderr_within_budget: budget,
        pass: abs_err <= tolerance && budget.unwrap_or(true),
    })
}

/// `∫∫ π(σ.(z,w))F(ξ) · conj(π(σ.(z,w))G(ξ)) dσ dξ` and
/// `e^{u·y−v·x} Σ_k k!(n−1)!/(k+n−1)! φ_k(2iy,2iv) (P_k f, P_k g)`.
pub fn polarized_gutzmer(
    f: &HermiteExpansion,
    g: &HermiteExpansion,
    p: &PhasePoint,
    cfg: &GutzmerConfig,
) -> Result<(LhsValue, Complex64)> {
    let lhs = sesquilinear_lhs(f, Some(g), p, cfg)?;
    let n = f.dim();
    let inner = f.level_inner(g)?;
    let phi = laguerre_fn_imaginary_upto(inner.len() - 1, n, p.imaginary_radius_sq())?;
    let pref = p.symplectic_exponent().exp();
    let rhs: Complex64 = inner
        .iter()
        .enumerate()
        .map(|(k, c)| c * (pref * level_weight(k, n) * phi[k]))
        .sum();
    Ok((lhs, rhs))
}

/// `(2π)^{n/2} ∫_K Φ_{α,α}(σ.(x,u)) dσ` against `k!(n−1)!/(k+n−1)! φ_k(x,u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KAverage {
    pub lhs: f64,
    /// Monte Carlo standard error; zero on the deterministic `n = 1` path.
    pub stderr: f64,
    pub rhs: f64,
    pub residual: f64,
    pub samples: usize,
    pub seed: Option<u64>,
}

/// Verifies the `K`-average of a diagonal special Hermite function at a real
/// point. `n = 1` integrates over the circle; `n >= 2` samples Haar measure.
pub fn k_average_verify(
    alpha: &MultiIndex,
    xu: &PhasePoint,
    quad: &QuadConfig,
    mc_samples: usize,
    seed: u64,
) -> Result<KAverage> {
    let n = xu.dim();
    if alpha.dim() != n {
        return Err(input("multi-index and phase point dimensions differ"));
    }
    if !xu.is_real() {
        return Err(input("K-average identity is checked at real points"));
    }
    let k = alpha.level();
    let rhs = level_weight(k, n) * laguerre_fn(k, n, xu)?.re;
    let norm = (2.0 * PI).powf(0.5 * n as f64);
    if n == 1 {
        let rule = GaussHermiteRule::cached(quad.gh_order)?;
        let mut failure = None;
        let est = torus_integral_with_doubling(
            |theta| {
                torus_action(&TorusElement(theta.to_vec()), xu)
                    .and_then(|q| special_hermite_with_rule(alpha, alpha, &q, &rule))
                    .unwrap_or_else(|e| {
                        failure.get_or_insert(e);
                        Complex64::new(0.0, 0.0)
                    })
            },
            1,
            TorusRule::new(quad.torus_points)?,
            quad.rtol,
            "K-average over the circle",
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let lhs = norm * est?.value.re / (2.0 * PI);
        return Ok(KAverage {
            lhs,
            stderr: 0.0,
            rhs,
            residual: (lhs - rhs).abs(),
            samples: 0,
            seed: None,
        });
    }
    // validate the fixed rule once at the base point
    special_hermite(alpha, alpha, xu, quad)?;
    let rule = GaussHermiteRule::cached(quad.gh_order)?;
    let est = haar_integral_mc(
        |sigma| Ok(norm * special_hermite_with_rule(alpha, alpha, &group_action(sigma, xu)?, &rule)?.re),
        n,
        mc_samples,
        seed,
    )?;
    Ok(KAverage {
        lhs: est.mean,
        stderr: est.stderr,
        rhs,
        residual: (est.mean - rhs).abs(),
        samples: mc_samples,
        seed: Some(seed),
    })
}

/// Paired Monte Carlo estimate of
/// `(2π)^{n/2} ∫_K [Φ_{α,α} − Φ_{β,β}](σ.(x,u)) dσ` with common Haar draws.
pub fn k_average_difference(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    xu: &PhasePoint,
    quad: &QuadConfig,
    mc_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    let n = xu.dim();
    if n < 2 {
        return Err(input("paired K-average difference needs n >= 2"));
    }
    let rule = GaussHermiteRule::cached(quad.gh_order)?;
    let norm = (2.0 * PI).powf(0.5 * n as f64);
    let diffs = haar_map(
        |sigma: &UnitaryElement| {
            let q = group_action(sigma, xu)?;
            let a = special_hermite_with_rule(alpha, alpha, &q, &rule)?.re;
            let b = special_hermite_with_rule(beta, beta, &q, &rule)?.re;
            Ok(norm * (a - b))
        },
        n,
        mc_samples,
        seed,
    )?;
    let (mean, stderr) = mean_stderr(&diffs);
    Ok(McEstimate {
        mean,
        stderr,
        samples: mc_samples,
        seed,
    })
}

/// The two explicit one-dimensional orthogonality relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrthogonalityVariant {
    /// `z = iη, w = 0`: kernel `e^{-2ξη cos θ}`, shift `iη sin θ`.
    A,
    /// `z = η, w = iη`: kernel `e^{2ξη sin θ − η² cos 2θ}`, shift `iη e^{-iθ}`.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthogonalityValue {
    pub value: Complex64,
    pub expected: f64,
    pub rel_change: f64,
}

/// `∫_ℝ∫_0^{2π} kernel · h_k(ξ+s(θ)) conj(h_j(ξ+s(θ))) dθ dξ` together with
/// `2π L_k^0(−2η²) e^{η²} δ_{kj}` (variant A) or `2π L_k^0(−2η²) δ_{kj}` (B).
pub fn orthogonality_1d(
    k: usize,
    j: usize,
    eta: f64,
    variant: OrthogonalityVariant,
    cfg: &QuadConfig,
) -> Result<OrthogonalityValue> {
    if !eta.is_finite() || eta.abs() > crate::special_functions::Y_CAP {
        return Err(input(format!("η = {eta} outside the supported range")));
    }
    let top = k.max(j);
    let rule = GaussHermiteRule::cached(cfg.gh_order)?;
    let mut buf = Vec::with_capacity(top + 1);
    let mut failure: Option<Error> = None;
    let inner = |theta: f64, buf: &mut Vec<Complex64>, failure: &mut Option<Error>| {
        let (s, c) = theta.sin_cos();
        let (shift, center) = match variant {
            OrthogonalityVariant::A => (Complex64::new(0.0, eta * s), -eta * c),
            OrthogonalityVariant::B => (Complex64::new(eta * s, eta * c), 0.0),
        };
        let env = Envelope {
            center: vec![center],
            scale: vec![1.0],
        };
        crate::quadrature::gaussian_envelope_integral(
            |x| {
                let xi = x[0];
                if let Err(e) = hermite_fns_upto(top, Complex64::new(xi, 0.0) + shift, buf) {
                    failure.get_or_insert(e);
                    return Complex64::new(0.0, 0.0);
                }
                let kernel = match variant {
                    OrthogonalityVariant::A => (-2.0 * xi * eta * c).exp(),
                    OrthogonalityVariant::B => {
                        (2.0 * xi * eta * s - eta * eta * (2.0 * theta).cos()).exp()
                    }
                };
                kernel * buf[k] * buf[j].conj()
            },
            &env,
            &rule,
        )
    };
    let est = torus_integral_with_doubling(
        |t| inner(t[0], &mut buf, &mut failure),
        1,
        TorusRule::new(cfg.torus_points)?,
        cfg.rtol,
        "orthogonality relation",
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let est = est?;
    let expected = if k == j {
        let l = laguerre_polys_upto(k, 0.0, Complex64::new(-2.0 * eta * eta, 0.0))?[k].re;
        match variant {
            OrthogonalityVariant::A => 2.0 * PI * l * (eta * eta).exp(),
            OrthogonalityVariant::B => 2.0 * PI * l,
        }
    } else {
        0.0
    };
    Ok(OrthogonalityValue {
        value: est.value,
        expected,
        rel_change: est.rel_change,
    })
}

/// `p_t(y,v) = (2π)^{-n} (sinh t)^{-n} e^{-¼ coth(t)(|y|²+|v|²)}`.
pub fn heat_kernel_p(t: f64, y: &[f64], v: &[f64]) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(input(format!("heat kernel time must be positive, got {t}")));
    }
    if y.len() != v.len() {
        return Err(input("heat kernel: y and v dimensions differ"));
    }
    let n = y.len() as i32;
    let r2: f64 = y.iter().chain(v).map(|a| a * a).sum();
    Ok((2.0 * PI * t.sinh()).powi(-n) * (-0.25 / t.tanh() * r2).exp())
}

/// Integral of the heat-weighted Laguerre function and its model value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatIntegral {
    /// `k!(n−1)!/(k+n−1)! ∫_{ℝ^{2n}} φ_k(2iy,2iv) p_{2t}(2y,2v) dy dv`.
    pub value: f64,
    /// `e^{2(2k+n)t}`.
    pub model: f64,
    pub rel_change: f64,
}

/// Computes the heat-weighted Laguerre integral by a tensor Gauss–Hermite rule
/// in `2n` variables. The integrand is `L_k^{n−1}(−2r²) e^{−(coth 2t − 1) r²}`
/// up to constants, so the rule is exact once its order exceeds `k`.
/// Requires `coth(2t) > 2`.
pub fn laguerre_heat_integral(k: usize, n: usize, t: f64, cfg: &QuadConfig) -> Result<HeatIntegral> {
    if n == 0 {
        return Err(input("dimension must be >= 1"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(input(format!("time must be positive, got {t}")));
    }
    let coth = 1.0 / (2.0 * t).tanh();
    if !(coth > 2.0) {
        return Err(domain(format!(
            "t = {t}: coth(2t) = {coth:.6} is not above 2; the Laguerre–heat integral is only evaluated for coth(2t) > 2"
        )));
    }
    let decay = coth - 1.0;
    let order = (k + 2).max(4).min(cfg.gh_order);
    let env = Envelope::new(vec![0.0; 2 * n], vec![decay.sqrt().recip(); 2 * n])?;
    let weight = level_weight(k, n);
    let pre = (2.0 * PI * (2.0 * t).sinh()).powi(-(n as i32));
    let mut failure = None;
    let est = integrate_with_doubling(
        |yv| {
            let r2: f64 = yv.iter().map(|a| a * a).sum();
            match laguerre_polys_upto(k, n as f64 - 1.0, Complex64::new(-2.0 * r2, 0.0)) {
                Ok(l) => Complex64::new(weight * pre * l[k].re * (-decay * r2).exp(), 0.0),
                Err(e) => {
                    failure.get_or_insert(e);
                    Complex64::new(0.0, 0.0)
                }
            }
        },
        &env,
        order,
        cfg.rtol,
        "Laguerre–heat integral",
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let est = est?;
    Ok(HeatIntegral {
        value: est.value.re,
        model: (2.0 * (2 * k + n) as f64 * t).exp(),
        rel_change: est.rel_change,
    })
}

/// Weight `U_t(x,y) = 2ⁿ (sinh 4t)^{-n/2} e^{tanh(2t)|x|² − coth(2t)|y|²}`.
pub fn heat_weight(t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(input(format!("time must be positive, got {t}")));
    }
    let n = x.len() as f64;
    let x2: f64 = x.iter().map(|a| a * a).sum();
    let y2: f64 = y.iter().map(|a| a * a).sum();
    Ok(2f64.powf(n) * (4.0 * t).sinh().powf(-0.5 * n) * ((2.0 * t).tanh() * x2 - y2 / (2.0 * t).tanh()).exp())
}

/// Settings for [`image_norm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImageConfig {
    /// Gauss–Hermite order per real variable; checked against twice this order.
    pub gh_order: usize,
    pub rtol: f64,
}

impl Default for ImageConfig {
    fn default() -> Self {
        Self {
            gh_order: 160,
            rtol: 1e-9,
        }
    }
}

/// The `U_t`-weighted norm and its quadrature metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImageNorm {
    /// `∫_{ℝⁿ}∫_{ℝⁿ} |F(x+iy)|² U_t(x,y) dx dy`.
    pub value: f64,
    pub order: usize,
    pub rel_change: f64,
}

/// Constant `c_n` with `∫∫|e^{-tH}f(x+iy)|² U_t dx dy = c_n ∥f∥²`, obtained in
/// closed form from `f = Φ_0`.
pub fn image_norm_constant(n: usize) -> f64 {
    (2.0 * PI).powf(0.5 * n as f64)
}

/// `∫∫ |F(x+iy)|² U_t(x,y) dx dy`. `F` should be a semigroup image `e^{-tH}f`;
/// when the order-doubling test fails the weighted integral is not resolved,
/// which is reported as a domain error (`F` behaves as if outside the image).
pub fn image_norm(f: &HermiteExpansion, t: f64, cfg: &ImageConfig) -> Result<ImageNorm> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(input(format!("time must be positive, got {t}")));
    }
    let n = f.dim();
    let sx = (1.0 - (2.0 * t).tanh()).sqrt().recip();
    let sy = (1.0 / (2.0 * t).tanh() - 1.0).sqrt().recip();
    let coarse = image_sum(f, t, cfg.gh_order, sx, sy)?;
    let fine_order = doubled(cfg.gh_order)?;
    let fine = image_sum(f, t, fine_order, sx, sy)?;
    let rel_change = relative_change(
        Complex64::new(coarse, 0.0),
        Complex64::new(fine, 0.0),
        fine.abs(),
    );
    if !(rel_change <= cfg.rtol) {
        return Err(domain(format!(
            "U_t-weighted integral not resolved at t = {t} (order {}: {coarse:e}, order {fine_order}: {fine:e}); F is not in the image of e^(-tH) at this resolution",
            cfg.gh_order
        )));
    }
    let _ = n;
    Ok(ImageNorm {
        value: fine,
        order: fine_order,
        rel_change,
    })
}

fn image_sum(f: &HermiteExpansion, t: f64, order: usize, sx: f64, sy: f64) -> Result<f64> {
    let n = f.dim();
    let rule = GaussHermiteRule::cached(order)?;
    let m = rule.order();
    let k_max = f.k_max();
    let tanh = (2.0 * t).tanh();
    let coth = 1.0 / tanh;
    let pre = 2f64.powi(n as i32) * (4.0 * t).sinh().powf(-0.5 * n as f64) * (sx * sy).powi(n as i32);
    // each coordinate ranges over the m×m complex points x + iy
    let mut table = Vec::with_capacity(m * m);
    let mut weights = Vec::with_capacity(m * m);
    let mut buf = Vec::with_capacity(k_max + 1);
    for (&tx, &wx) in rule.nodes().iter().zip(rule.scaled_weights()) {
        for (&ty, &wy) in rule.nodes().iter().zip(rule.scaled_weights()) {
            let (x, y) = (sx * tx, sy * ty);
            // outer nodes lie far beyond the evaluation cap; the square root
            // of the weight's exponential goes into the table so that
            // neither factor overflows
            let log_w = tanh * x * x - coth * y * y;
            hermite_fns_scaled(k_max, Complex64::new(x, y), 0.5 * log_w, &mut buf);
            table.push(buf.clone());
            weights.push(wx * wy);
        }
    }
    let tables = vec![table; n];
    let wts = vec![weights; n];
    let vals = grid_values(&f.dense(), k_max + 1, &tables);
    let sq: Vec<Complex64> = vals.iter().map(|c| Complex64::new(c.norm_sqr(), 0.0)).collect();
    Ok(pre * weighted_grid_sum(&sq, &wts).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::semigroup;
    use approx::assert_relative_eq;

    fn h(coeffs: &[f64]) -> HermiteExpansion {
        let c: Vec<Complex64> = coeffs.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        HermiteExpansion::from_coefficients_1d(&c).unwrap()
    }

    #[test]
    fn grid_values_match_direct_evaluation() {
        let mut f = HermiteExpansion::new(2, 3).unwrap();
        f.set(MultiIndex::new(vec![1, 2]), Complex64::new(0.5, -0.2)).unwrap();
        f.set(MultiIndex::new(vec![0, 0]), Complex64::new(1.0, 0.0)).unwrap();
        f.set(MultiIndex::new(vec![3, 0]), Complex64::new(0.0, 0.3)).unwrap();
        let pts1 = [Complex64::new(0.2, 0.1), Complex64::new(-0.7, 0.4)];
        let pts2 = [Complex64::new(1.1, -0.3), Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.5)];
        let tab = |pts: &[Complex64]| -> Vec<Vec<Complex64>> {
            pts.iter()
                .map(|&z| {
                    let mut b = Vec::new();
                    hermite_fns_upto(3, z, &mut b).unwrap();
                    b
                })
                .collect()
        };
        let vals = grid_values(&f.dense(), 4, &[tab(&pts1), tab(&pts2)]);
        for (i, &a) in pts1.iter().enumerate() {
            for (j, &b) in pts2.iter().enumerate() {
                let direct = f.evaluate_entire(&[a, b]).unwrap();
                assert!((vals[i * 3 + j] - direct).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn real_point_reduces_to_plancherel() {
        let f = h(&[0.3, -0.7, 0.0, 0.25]);
        let p = PhasePoint::real(&[0.8], &[-0.5]).unwrap();
        let lhs = gutzmer_lhs(&f, &p, &GutzmerConfig::default()).unwrap();
        assert_relative_eq!(lhs.value.re, f.norm_sq(), max_relative = 1e-12);
        assert_relative_eq!(gutzmer_rhs(&f, &p).unwrap().value, f.norm_sq(), max_relative = 1e-14);
    }

    #[test]
    fn h0_on_imaginary_axis() {
        let y: f64 = 0.9;
        let f = h(&[1.0]);
        let p = PhasePoint::from_parts(&[0.0], &[y], &[0.0], &[0.0]).unwrap();
        let lhs = gutzmer_lhs(&f, &p, &GutzmerConfig::default()).unwrap();
        assert_relative_eq!(lhs.value.re, (y * y).exp(), max_relative = 1e-12);
        assert_relative_eq!(gutzmer_rhs(&f, &p).unwrap().value, (y * y).exp(), max_relative = 1e-14);
    }

    #[test]
    fn cross_side_agreement() {
        let f = h(&[1.0, 0.0, 0.0, 0.5]);
        let p = PhasePoint::from_parts(&[0.0], &[0.5], &[0.0], &[0.0]).unwrap();
        let lhs = gutzmer_lhs(&f, &p, &GutzmerConfig::default()).unwrap();
        let rhs = gutzmer_rhs(&f, &p).unwrap().value;
        assert_relative_eq!(lhs.value.re, rhs, max_relative = 1e-6);
    }

    #[test]
    fn rhs_two_dimensional_example() {
        let f = HermiteExpansion::basis(&MultiIndex::new(vec![1, 0]), 1).unwrap();
        let p = PhasePoint::from_parts(&[0.0, 0.0], &[0.3, 0.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let l = laguerre_polys_upto(1, 1.0, Complex64::new(-0.18, 0.0)).unwrap()[1].re;
        assert_relative_eq!(
            gutzmer_rhs(&f, &p).unwrap().value,
            0.5 * l * 0.09f64.exp(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn polarized_disjoint_levels_vanish() {
        let f = h(&[1.0]);
        let g = h(&[0.0, 1.0]);
        let p = PhasePoint::from_parts(&[0.2], &[0.4], &[-0.1], &[0.3]).unwrap();
        let (lhs, rhs) = polarized_gutzmer(&f, &g, &p, &GutzmerConfig::default()).unwrap();
        assert_eq!(rhs, Complex64::new(0.0, 0.0));
        assert!(lhs.value.norm() < 1e-10);
    }

    #[test]
    fn orthogonality_examples() {
        let cfg = QuadConfig::default();
        let v = orthogonality_1d(0, 0, 1.0, OrthogonalityVariant::A, &cfg).unwrap();
        assert_relative_eq!(v.value.re, 2.0 * PI * 1f64.exp(), max_relative = 1e-10);
        assert_relative_eq!(v.expected, 2.0 * PI * 1f64.exp(), max_relative = 1e-14);

        let v = orthogonality_1d(1, 1, 1.0, OrthogonalityVariant::B, &cfg).unwrap();
        assert_relative_eq!(v.expected, 6.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(v.value.re, 6.0 * PI, max_relative = 1e-8);

        for variant in [OrthogonalityVariant::A, OrthogonalityVariant::B] {
            let v = orthogonality_1d(0, 1, 0.7, variant, &cfg).unwrap();
            assert_eq!(v.expected, 0.0);
            assert!(v.value.norm() < 1e-8);
        }
    }

    #[test]
    fn heat_kernel_values() {
        let t = 0.4f64;
        assert_relative_eq!(
            heat_kernel_p(t, &[0.0], &[0.0]).unwrap(),
            1.0 / (2.0 * PI * t.sinh()),
            max_relative = 1e-15
        );
        assert!(heat_kernel_p(0.0, &[0.0], &[0.0]).is_err());
    }

    #[test]
    fn laguerre_heat_base_case_and_guard() {
        let t = 0.1f64;
        let v = laguerre_heat_integral(0, 1, t, &QuadConfig::default()).unwrap();
        assert_relative_eq!(v.value, 0.5 * (2.0 * t).exp(), max_relative = 1e-12);
        assert!(matches!(
            laguerre_heat_integral(0, 1, 0.3, &QuadConfig::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn image_norm_of_smoothed_ground_state() {
        let t = 0.25;
        let f = semigroup(&h(&[1.0]), t).unwrap();
        let v = image_norm(&f, t, &ImageConfig::default()).unwrap();
        assert_relative_eq!(v.value, (2.0 * PI).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn decay_rate_sign() {
        let conv: Vec<f64> = (0..100).map(|k| (-(k as f64).sqrt()).exp()).collect();
        let div: Vec<f64> = (0..100).map(|k| (0.5 * (k as f64).sqrt()).exp()).collect();
        assert!((series_decay_rate(&conv).unwrap() - 1.0).abs() < 1e-12);
        assert!(series_decay_rate(&div).unwrap() < 0.0);
    }
}
