//! Phase-space operators `π(z,w)` on entire functions, special Hermite
//! functions `Φ_{α,β}`, and the action of `K ≅ U(n)` on `ℂⁿ×ℂⁿ`.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{capability, input, Result};
use crate::quadrature::{
    doubled, integrate_with_doubling, relative_change, torus_integral_with_doubling, Envelope,
    GaussHermiteRule, QuadConfig, TorusRule,
};
use crate::special_functions::{hermite_fns_unchecked, Y_CAP};
use crate::spectral::HermiteExpansion;
use crate::Error;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `α ∈ ℕⁿ`. Ordered by level first, then lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zero(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α| = Σ α_j`.
    pub fn level(&self) -> usize {
        self.0.iter().sum()
    }

    /// All `α ∈ ℕⁿ` with `|α| = k`, in lexicographically decreasing order of
    /// the leading entry.
    pub fn level_set(n: usize, k: usize) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut cur = vec![0; n];
        fill_level(&mut cur, 0, k, &mut out);
        out
    }

    /// All `α` with `|α| <= k_max`, level by level.
    pub fn up_to(n: usize, k_max: usize) -> Vec<MultiIndex> {
        (0..=k_max).flat_map(|k| Self::level_set(n, k)).collect()
    }

    /// `α + m` if every entry stays nonnegative.
    pub fn shifted(&self, m: &[i64]) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(m)
            .map(|(&a, &d)| usize::try_from(a as i64 + d).ok())
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }
}

fn fill_level(cur: &mut Vec<usize>, pos: usize, remaining: usize, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        fill_level(cur, pos + 1, remaining - a, out);
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.level()
            .cmp(&other.level())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// A point `(z, w) ∈ ℂⁿ×ℂⁿ` with `z = x+iy`, `w = u+iv`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    z: Vec<Complex64>,
    w: Vec<Complex64>,
}

impl PhasePoint {
    pub fn new(z: Vec<Complex64>, w: Vec<Complex64>) -> Result<Self> {
        if z.len() != w.len() || z.is_empty() {
            return Err(input(format!(
                "phase point needs equal nonzero dimensions, got {} and {}",
                z.len(),
                w.len()
            )));
        }
        if z.iter().chain(&w).any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(input("phase point has non-finite coordinates"));
        }
        Ok(Self { z, w })
    }

    /// Builds `(x+iy, u+iv)` from its four real parts.
    pub fn from_parts(x: &[f64], y: &[f64], u: &[f64], v: &[f64]) -> Result<Self> {
        let n = x.len();
        if y.len() != n || u.len() != n || v.len() != n {
            return Err(input("phase point parts must share one dimension"));
        }
        let z = x.iter().zip(y).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let w = u.iter().zip(v).map(|(&a, &b)| Complex64::new(a, b)).collect();
        Self::new(z, w)
    }

    /// A real point `(x, u)`.
    pub fn real(x: &[f64], u: &[f64]) -> Result<Self> {
        let zero = vec![0.0; x.len()];
        Self::from_parts(x, &zero, u, &zero)
    }

    pub fn origin(n: usize) -> Self {
        Self {
            z: vec![Complex64::new(0.0, 0.0); n],
            w: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn w(&self) -> &[Complex64] {
        &self.w
    }

    pub fn x(&self) -> Vec<f64> {
        self.z.iter().map(|c| c.re).collect()
    }

    pub fn y(&self) -> Vec<f64> {
        self.z.iter().map(|c| c.im).collect()
    }

    pub fn u(&self) -> Vec<f64> {
        self.w.iter().map(|c| c.re).collect()
    }

    pub fn v(&self) -> Vec<f64> {
        self.w.iter().map(|c| c.im).collect()
    }

    /// `u·y − v·x`, the symplectic pairing of the real and imaginary parts.
    pub fn symplectic_exponent(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.w)
            .map(|(z, w)| w.re * z.im - w.im * z.re)
            .sum()
    }

    /// `|y|² + |v|²`.
    pub fn imaginary_radius_sq(&self) -> f64 {
        self.z
            .iter()
            .zip(&self.w)
            .map(|(z, w)| z.im * z.im + w.im * w.im)
            .sum()
    }

    /// `(2iy, 2iv)`, the argument at which the Laguerre weights are evaluated.
    pub fn doubled_imaginary(&self) -> PhasePoint {
        let z = self.z.iter().map(|c| Complex64::new(0.0, 2.0 * c.im)).collect();
        let w = self.w.iter().map(|c| Complex64::new(0.0, 2.0 * c.im)).collect();
        PhasePoint { z, w }
    }

    pub fn is_real(&self) -> bool {
        self.z.iter().chain(&self.w).all(|c| c.im == 0.0)
    }

    pub(crate) fn check_caps(&self) -> Result<()> {
        for c in &self.w {
            if c.im.abs() > Y_CAP {
                return Err(capability(format!("|Im w| = {} exceeds cap {Y_CAP}", c.im.abs())));
            }
        }
        Ok(())
    }
}

/// `σ = a + ib ∈ U(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryElement {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

/// Entrywise tolerance on `σ*σ − I` accepted by [`UnitaryElement::new`].
pub const UNITARITY_TOL: f64 = 1e-12;

impl UnitaryElement {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<Self> {
        if !a.is_square() || a.shape() != b.shape() || a.nrows() == 0 {
            return Err(input("unitary element needs square real and imaginary parts of one size"));
        }
        let s = Self { a, b };
        let defect = s.unitarity_defect();
        if !(defect <= UNITARITY_TOL) {
            return Err(input(format!("matrix is not unitary: max |σ*σ − I| = {defect:.3e}")));
        }
        Ok(s)
    }

    pub fn from_complex(sigma: &DMatrix<Complex64>) -> Result<Self> {
        Self::new(sigma.map(|c| c.re), sigma.map(|c| c.im))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            a: DMatrix::identity(n, n),
            b: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn real_part(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn imag_part(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.a[(i, j)], self.b[(i, j)])
    }

    pub fn as_complex(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.entry(i, j))
    }

    /// `max |σ*σ − I|` entrywise.
    pub fn unitarity_defect(&self) -> f64 {
        let s = self.as_complex();
        let g = s.adjoint() * &s;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g[(i, j)] - target).norm());
            }
        }
        worst
    }

    /// The realisation `A = [[a, −b], [b, a]] ∈ Sp(n,ℝ) ∩ O(2n,ℝ)`.
    pub fn symplectic_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => self.a[(i, j)],
            (true, false) => -self.b[(i, j - n)],
            (false, true) => self.b[(i - n, j)],
            (false, false) => self.a[(i - n, j - n)],
        })
    }

    /// Product `self · other`.
    pub fn compose(&self, other: &UnitaryElement) -> UnitaryElement {
        let p = self.as_complex() * other.as_complex();
        UnitaryElement {
            a: p.map(|c| c.re),
            b: p.map(|c| c.im),
        }
    }
}

/// `θ ∈ ℝⁿ`, standing for `k(θ) = diag(e^{iθ_j})`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusElement(pub Vec<f64>);

impl TorusElement {
    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn to_unitary(&self) -> UnitaryElement {
        let n = self.0.len();
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { self.0[i].cos() } else { 0.0 });
        let b = DMatrix::from_fn(n, n, |i, j| if i == j { self.0[i].sin() } else { 0.0 });
        UnitaryElement { a, b }
    }
}

/// `σ.(z,w) = (a z − b w, a w + b z)`.
pub fn group_action(sigma: &UnitaryElement, p: &PhasePoint) -> Result<PhasePoint> {
    let n = sigma.dim();
    if p.dim() != n {
        return Err(input(format!(
            "unitary of size {n} cannot act on a phase point of dimension {}",
            p.dim()
        )));
    }
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (sigma.a[(i, j)], sigma.b[(i, j)]);
            z[i] += a * p.z[j] - b * p.w[j];
            w[i] += a * p.w[j] + b * p.z[j];
        }
    }
    Ok(PhasePoint { z, w })
}

/// `k(θ).(z,w)`: a coordinatewise rotation of each pair `(z_j, w_j)`.
pub fn torus_action(theta: &TorusElement, p: &PhasePoint) -> Result<PhasePoint> {
    if theta.0.len() != p.dim() {
        return Err(input("torus element and phase point dimensions differ"));
    }
    let mut z = Vec::with_capacity(p.dim());
    let mut w = Vec::with_capacity(p.dim());
    for ((&t, &zj), &wj) in theta.0.iter().zip(&p.z).zip(&p.w) {
        let (s, c) = t.sin_cos();
        z.push(zj * c - wj * s);
        w.push(wj * c + zj * s);
    }
    Ok(PhasePoint { z, w })
}

/// Haar-distributed `σ ∈ U(n)`: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal moved into `Q`.
pub fn haar_sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitaryElement> {
    if n == 0 {
        return Err(input("Haar sampling needs n >= 1"));
    }
    let scale = 0.5f64.sqrt();
    let g = DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    UnitaryElement::from_complex(&q)
}

/// The phase factor `e^{i(z·ξ + ½ z·w)}` of `π(z,w)` at a (possibly complex) `ξ`.
pub fn pi_phase(p: &PhasePoint, xi: &[Complex64]) -> Complex64 {
    let mut expo = Complex64::new(0.0, 0.0);
    for ((z, w), x) in p.z.iter().zip(&p.w).zip(xi) {
        expo += z * x + 0.5 * z * w;
    }
    (I * expo).exp()
}

/// `π(z,w)F(ξ) = e^{i(z·ξ + ½z·w)} F(ξ + w)` for an entire `F` given as a
/// closure; `ξ` may be complex so that operators can be composed.
pub fn pi_apply_fn<F>(p: &PhasePoint, xi: &[Complex64], f: F) -> Result<Complex64>
where
    F: FnOnce(&[Complex64]) -> Result<Complex64>,
{
    if xi.len() != p.dim() {
        return Err(input("π(z,w): argument dimension mismatch"));
    }
    let shifted: Vec<Complex64> = xi.iter().zip(&p.w).map(|(a, b)| a + b).collect();
    Ok(pi_phase(p, xi) * f(&shifted)?)
}

/// `π(z,w)F(ξ)` at a real `ξ` for `F` the entire extension of a Hermite expansion.
pub fn pi_apply(p: &PhasePoint, f: &HermiteExpansion, xi: &[f64]) -> Result<Complex64> {
    if f.dim() != p.dim() {
        return Err(input("expansion and phase point dimensions differ"));
    }
    p.check_caps()?;
    let xi: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    pi_apply_fn(p, &xi, |s| f.evaluate_entire(s))
}

/// One-dimensional row `b ↦ Φ_{a,b}(z,w)` for `b = 0..=b_max` under a single
/// rule, with the per-entry `∫|integrand|` alongside.
fn special_hermite_row_raw(
    a: usize,
    b_max: usize,
    z: Complex64,
    w: Complex64,
    rule: &GaussHermiteRule,
) -> (Vec<Complex64>, Vec<f64>) {
    let center = -0.5 * (w.re + z.im);
    let norm = (2.0 * PI).powf(-0.5);
    let mut vals = vec![Complex64::new(0.0, 0.0); b_max + 1];
    let mut mass = vec![0.0; b_max + 1];
    let mut ha = Vec::with_capacity(a + 1);
    let mut hb = Vec::with_capacity(b_max + 1);
    for (&t, &sw) in rule.nodes().iter().zip(rule.scaled_weights()) {
        let xi = center + t;
        let xc = Complex64::new(xi, 0.0);
        hermite_fns_unchecked(a, xc + w, &mut ha);
        hermite_fns_unchecked(b_max, xc, &mut hb);
        let lead = norm * (I * (z * xi + 0.5 * z * w)).exp() * ha[a] * sw;
        let lead_abs = lead.norm();
        for b in 0..=b_max {
            vals[b] += lead * hb[b].re;
            mass[b] += lead_abs * hb[b].re.abs();
        }
    }
    (vals, mass)
}

fn check_row_args(a: usize, b_max: usize, z: Complex64, w: Complex64) -> Result<()> {
    use crate::special_functions::K_CAP;
    if a.max(b_max) > K_CAP {
        return Err(capability(format!("degree {} exceeds cap {K_CAP}", a.max(b_max))));
    }
    if !z.re.is_finite() || !z.im.is_finite() || !w.re.is_finite() || !w.im.is_finite() {
        return Err(input("non-finite phase point"));
    }
    if w.im.abs() > Y_CAP {
        return Err(capability(format!("|Im w| = {} exceeds cap {Y_CAP}", w.im.abs())));
    }
    Ok(())
}

/// One-dimensional `Φ_{a,b}(z,w)` for `b = 0..=b_max`, accepted by an
/// order-doubling test (entrywise, relative to `∫|integrand|`).
pub fn special_hermite_row(
    a: usize,
    b_max: usize,
    z: Complex64,
    w: Complex64,
    cfg: &QuadConfig,
) -> Result<Vec<Complex64>> {
    check_row_args(a, b_max, z, w)?;
    let fine_order = doubled(cfg.gh_order)?;
    let (coarse, _) = special_hermite_row_raw(a, b_max, z, w, &*GaussHermiteRule::cached(cfg.gh_order)?);
    let (fine, mass) = special_hermite_row_raw(a, b_max, z, w, &*GaussHermiteRule::cached(fine_order)?);
    for b in 0..=b_max {
        let change = relative_change(coarse[b], fine[b], mass[b]);
        if !(change <= cfg.rtol) {
            return Err(Error::Accuracy {
                what: format!("special Hermite Φ_{{{a},{b}}}({z}, {w})"),
                coarse_order: cfg.gh_order,
                fine_order,
                coarse: format!("{}", coarse[b]),
                fine: format!("{}", fine[b]),
                change,
            });
        }
    }
    Ok(fine)
}

/// `Φ_{α,β}(z,w) = (2π)^{-n/2} (π(z,w)Φ_α, Φ_β)` by Gauss–Hermite quadrature of
/// the defining inner product (one factor per coordinate), order-doubling checked.
pub fn special_hermite(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    p: &PhasePoint,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    check_pair(alpha, beta, p)?;
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 0..p.dim() {
        let (a, b) = (alpha.0[j], beta.0[j]);
        let row = special_hermite_row(a, b, p.z[j], p.w[j], cfg)?;
        acc *= row[b];
    }
    Ok(acc)
}

/// [`special_hermite`] under one fixed rule and without the doubling check;
/// for Monte Carlo inner loops whose rule was validated beforehand.
pub fn special_hermite_with_rule(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    p: &PhasePoint,
    rule: &GaussHermiteRule,
) -> Result<Complex64> {
    check_pair(alpha, beta, p)?;
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 0..p.dim() {
        let (a, b) = (alpha.0[j], beta.0[j]);
        check_row_args(a, b, p.z[j], p.w[j])?;
        let (row, _) = special_hermite_row_raw(a, b, p.z[j], p.w[j], rule);
        acc *= row[b];
    }
    Ok(acc)
}

fn check_pair(alpha: &MultiIndex, beta: &MultiIndex, p: &PhasePoint) -> Result<()> {
    if alpha.dim() != p.dim() || beta.dim() != p.dim() {
        return Err(input("multi-index and phase point dimensions differ"));
    }
    Ok(())
}

/// `|Φ_{α,β}(k(θ).(x,u)) − e^{i(β−α)·θ} Φ_{α,β}(x,u)|` at a real point.
pub fn homogeneity_check(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    theta: &TorusElement,
    xu: &PhasePoint,
    cfg: &QuadConfig,
) -> Result<f64> {
    if !xu.is_real() {
        return Err(input("homogeneity is stated at real phase points"));
    }
    let rotated = torus_action(theta, xu)?;
    let lhs = special_hermite(alpha, beta, &rotated, cfg)?;
    let phase: f64 = alpha
        .0
        .iter()
        .zip(&beta.0)
        .zip(&theta.0)
        .map(|((&a, &b), &t)| (b as f64 - a as f64) * t)
        .sum();
    let rhs = Complex64::from_polar(1.0, phase) * special_hermite(alpha, beta, xu, cfg)?;
    Ok((lhs - rhs).norm())
}

/// `(π_m(z,w)Φ_α, Φ_β)`, the `m`-th Fourier coefficient of
/// `θ ↦ (π(k(θ).(z,w))Φ_α, Φ_β)` normalised by `(2π)^{-n}`.
pub fn torus_fourier_coefficient(
    alpha: &MultiIndex,
    beta: &MultiIndex,
    m: &[i64],
    p: &PhasePoint,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let n = p.dim();
    if m.len() != n {
        return Err(input("Fourier mode and phase point dimensions differ"));
    }
    let rule = GaussHermiteRule::cached(cfg.gh_order)?;
    let mut failure = None;
    let est = torus_integral_with_doubling(
        |theta| {
            let q = match torus_action(&TorusElement(theta.to_vec()), p) {
                Ok(q) => q,
                Err(e) => {
                    failure.get_or_insert(e);
                    return Complex64::new(0.0, 0.0);
                }
            };
            let v = special_hermite_with_rule(alpha, beta, &q, &rule).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                Complex64::new(0.0, 0.0)
            });
            let dot: f64 = m.iter().zip(theta).map(|(&mj, &t)| mj as f64 * t).sum();
            v * Complex64::from_polar(1.0, -dot)
        },
        n,
        TorusRule::new(cfg.torus_points)?,
        cfg.rtol,
        "torus Fourier coefficient",
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let value = est?.value;
    Ok(value * (2.0 * PI).powf(0.5 * n as f64) * (2.0 * PI).powf(-(n as f64)))
}

/// `∫_{ℝⁿ} |π(z,w)Φ_α(ξ)|² dξ` by quadrature, one factor per coordinate.
pub fn pi_norm_sq(alpha: &MultiIndex, p: &PhasePoint, cfg: &QuadConfig) -> Result<f64> {
    if alpha.dim() != p.dim() {
        return Err(input("multi-index and phase point dimensions differ"));
    }
    p.check_caps()?;
    let mut acc = 1.0;
    for j in 0..p.dim() {
        let (z, w, a) = (p.z[j], p.w[j], alpha.0[j]);
        let env = Envelope::new(vec![-(w.re + z.im)], vec![1.0])?;
        let mut buf = Vec::with_capacity(a + 1);
        let est = integrate_with_doubling(
            |xi| {
                let xc = Complex64::new(xi[0], 0.0);
                hermite_fns_unchecked(a, xc + w, &mut buf);
                let v = (I * (z * xc + 0.5 * z * w)).exp() * buf[a];
                Complex64::new(v.norm_sqr(), 0.0)
            },
            &env,
            cfg.gh_order,
            cfg.rtol,
            "∫|π(z,w)h_a|²",
        )?;
        acc *= est.value.re;
    }
    Ok(acc)
}

/// `(2π)^{n/2} e^{u·y − v·x} Φ_{α,α}(2iy, 2iv)`.
pub fn pi_norm_sq_closed(alpha: &MultiIndex, p: &PhasePoint, cfg: &QuadConfig) -> Result<f64> {
    let n = p.dim() as f64;
    let diag = special_hermite(alpha, alpha, &p.doubled_imaginary(), cfg)?;
    Ok((2.0 * PI).powf(0.5 * n) * p.symplectic_exponent().exp() * diag.re)
}

/// Adaptively truncated `Σ_β |Φ_{α,β}(z,w)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaSum {
    pub value: f64,
    /// Estimated remainder relative to `value`.
    pub relative_tail: f64,
    /// Highest per-coordinate `β_j` included.
    pub b_max: usize,
}

/// `Σ_β |Φ_{α,β}(z,w)|²`, grown per coordinate until the estimated remainder
/// falls below `tail_tol` of the partial sum.
pub fn beta_sum(alpha: &MultiIndex, p: &PhasePoint, tail_tol: f64, cfg: &QuadConfig) -> Result<BetaSum> {
    if alpha.dim() != p.dim() {
        return Err(input("multi-index and phase point dimensions differ"));
    }
    let mut total = 1.0;
    let mut rel_tail = 0.0;
    let mut widest = 0;
    for j in 0..p.dim() {
        let (value, tail, b_max) = beta_sum_1d(alpha.0[j], p.z[j], p.w[j], tail_tol, cfg)?;
        total *= value;
        rel_tail += tail / value;
        widest = widest.max(b_max);
    }
    Ok(BetaSum {
        value: total,
        relative_tail: rel_tail,
        b_max: widest,
    })
}

fn beta_sum_1d(
    a: usize,
    z: Complex64,
    w: Complex64,
    tail_tol: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64, usize)> {
    const WINDOW: usize = 6;
    let mut b_max = 24 + 2 * a;
    loop {
        let row = special_hermite_row(a, b_max, z, w, cfg)?;
        let mut terms: Vec<f64> = row.iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = terms.iter().sum();
        // amplitudes carry an absolute quadrature error near ε·√sum, so
        // squared terms below (100ε)²·sum are noise; drop them past the peak
        let floor = (100.0 * f64::EPSILON).powi(2) * total;
        let peak = terms
            .iter()
            .enumerate()
            .fold(0, |best, (i, &t)| if t > terms[best] { i } else { best });
        if let Some(cut) = terms[peak..].iter().position(|&t| t < floor) {
            terms.truncate((peak + cut).max(2));
        }
        let sum: f64 = terms.iter().sum();
        let window = WINDOW.min(terms.len());
        let last = &terms[terms.len() - window..];
        // past the peak the terms fall off faster than geometrically; bound the
        // remainder by the largest successive ratio in the window
        let ratio = last
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .fold(0.0f64, f64::max);
        if ratio < 1.0 {
            let tail = last[window - 1] * ratio / (1.0 - ratio);
            if tail <= tail_tol * sum {
                return Ok((sum, tail, terms.len() - 1));
            }
        }
        if b_max >= cfg.gh_order {
            return Err(Error::Accuracy {
                what: format!("Σ_b |Φ_{{{a},b}}({z}, {w})|² tail"),
                coarse_order: b_max,
                fine_order: b_max,
                coarse: format!("{sum}"),
                fine: format!("{sum}"),
                change: ratio,
            });
        }
        b_max = (2 * b_max).min(cfg.gh_order);
    }
}
