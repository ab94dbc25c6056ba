//! Hermite functions, Laguerre polynomials and functions, the Mehler kernel and
//! the Hermite projection kernel, all at complex arguments.
//!
//! Hermite functions are produced by the three-term recurrence on the
//! L²-normalised functions themselves (Gaussian folded into the seed), so the
//! polynomial factor never overflows for degrees in the hundreds.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{capability, domain, input, Result};
use crate::phase_space::{MultiIndex, PhasePoint};

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

/// Highest Hermite/Laguerre degree accepted by the evaluators.
pub const K_CAP: usize = 512;

/// Largest accepted `|Im z|` for Hermite functions; growth is `e^{√(2k)|y|}`.
pub const Y_CAP: f64 = 12.0;

/// Mehler kernel requires `|r| <= 1 - MEHLER_EPS`.
pub const MEHLER_EPS: f64 = 1e-6;

fn check_degree(k: usize) -> Result<()> {
    if k > K_CAP {
        return Err(capability(format!("degree {k} exceeds cap {K_CAP}")));
    }
    Ok(())
}

fn check_arg(z: Complex64) -> Result<()> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(input(format!("non-finite argument {z}")));
    }
    if z.im.abs() > Y_CAP {
        return Err(capability(format!(
            "|Im z| = {} exceeds cap {Y_CAP}",
            z.im.abs()
        )));
    }
    Ok(())
}

/// Fills `out[0..=k_max]` with `h_0(z), …, h_{k_max}(z)`.
pub fn hermite_fns_upto(k_max: usize, z: Complex64, out: &mut Vec<Complex64>) -> Result<()> {
    check_degree(k_max)?;
    check_arg(z)?;
    hermite_fns_unchecked(k_max, z, out);
    Ok(())
}

// Callers guarantee the caps; used in quadrature inner loops.
pub(crate) fn hermite_fns_unchecked(k_max: usize, z: Complex64, out: &mut Vec<Complex64>) {
    hermite_fns_scaled(k_max, z, 0.0, out)
}

// h_k(z)·e^{log_scale}; lets far-off-axis callers keep the Gaussian in range.
pub(crate) fn hermite_fns_scaled(k_max: usize, z: Complex64, log_scale: f64, out: &mut Vec<Complex64>) {
    out.clear();
    out.reserve(k_max + 1);
    let h0 = PI.powf(-0.25) * (-0.5 * z * z + log_scale).exp();
    out.push(h0);
    if k_max == 0 {
        return;
    }
    out.push(2f64.sqrt() * z * h0);
    for k in 1..k_max {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * z * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
        out.push(next);
    }
}

/// The normalised Hermite function `h_k(z)`, extended to complex `z`.
pub fn hermite_fn_1d(k: usize, z: Complex64) -> Result<Complex64> {
    let mut buf = Vec::with_capacity(k + 1);
    hermite_fns_upto(k, z, &mut buf)?;
    Ok(buf[k])
}

/// `Φ_α(z) = Π_j h_{α_j}(z_j)`.
pub fn hermite_fn_nd(alpha: &MultiIndex, z: &[Complex64]) -> Result<Complex64> {
    if alpha.dim() != z.len() {
        return Err(input(format!(
            "multi-index has dimension {} but point has dimension {}",
            alpha.dim(),
            z.len()
        )));
    }
    let mut acc = Complex64::new(1.0, 0.0);
    for (&a, &zj) in alpha.entries().iter().zip(z) {
        acc *= hermite_fn_1d(a, zj)?;
    }
    Ok(acc)
}

/// Degree and type of a generalised Laguerre polynomial `L_k^ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreOrder {
    pub degree: usize,
    pub alpha: f64,
}

impl LaguerreOrder {
    pub fn new(degree: usize, alpha: f64) -> Result<Self> {
        check_degree(degree)?;
        if !(alpha >= -0.5) {
            return Err(input(format!("Laguerre type {alpha} below -1/2")));
        }
        Ok(Self { degree, alpha })
    }
}

/// `L_0^ν(x), …, L_{k_max}^ν(x)` by the forward recurrence.
pub fn laguerre_polys_upto(k_max: usize, alpha: f64, x: Complex64) -> Result<Vec<Complex64>> {
    check_degree(k_max)?;
    if !x.re.is_finite() || !x.im.is_finite() {
        return Err(input(format!("non-finite argument {x}")));
    }
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(Complex64::new(1.0, 0.0));
    if k_max == 0 {
        return Ok(out);
    }
    out.push(1.0 + alpha - x);
    for k in 1..k_max {
        let kf = k as f64;
        let next = ((2.0 * kf + alpha + 1.0 - x) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
    Ok(out)
}

/// `L_k^ν(x)`.
pub fn laguerre_poly(order: LaguerreOrder, x: Complex64) -> Result<Complex64> {
    Ok(laguerre_polys_upto(order.degree, order.alpha, x)?[order.degree])
}

/// Laguerre function of type `n-1` on `ℂⁿ×ℂⁿ`:
/// `φ_k(z,w) = L_k^{n-1}(½(z²+w²)) e^{-¼(z²+w²)}` with `z² = Σ z_j²`.
pub fn laguerre_fn(k: usize, n: usize, p: &PhasePoint) -> Result<Complex64> {
    if p.dim() != n {
        return Err(input(format!(
            "phase point has dimension {} but n = {n}",
            p.dim()
        )));
    }
    let s: Complex64 = p.z().iter().chain(p.w()).map(|c| c * c).sum();
    let l = laguerre_poly(LaguerreOrder::new(k, n as f64 - 1.0)?, 0.5 * s)?;
    Ok(l * (-0.25 * s).exp())
}

/// `φ_k(2iy, 2iv) = L_k^{n-1}(-2r²) e^{r²}` with `r² = |y|²+|v|²`; real and positive.
pub fn laguerre_fn_imaginary(k: usize, n: usize, r_sq: f64) -> Result<f64> {
    let l = laguerre_polys_upto(k, n as f64 - 1.0, Complex64::new(-2.0 * r_sq, 0.0))?;
    Ok(l[k].re * r_sq.exp())
}

/// Same as [`laguerre_fn_imaginary`] for every level `0..=k_max`.
pub fn laguerre_fn_imaginary_upto(k_max: usize, n: usize, r_sq: f64) -> Result<Vec<f64>> {
    let l = laguerre_polys_upto(k_max, n as f64 - 1.0, Complex64::new(-2.0 * r_sq, 0.0))?;
    let g = r_sq.exp();
    Ok(l.into_iter().map(|c| c.re * g).collect())
}

/// `k!(n-1)!/(k+n-1)!`, the reciprocal of the dimension of the level-`k` eigenspace.
pub fn level_weight(k: usize, n: usize) -> f64 {
    // 1 / C(k+n-1, n-1)
    let mut w = 1.0;
    for j in 1..n {
        w *= j as f64 / (k + j) as f64;
    }
    w
}

/// Closed form of `Σ_k h_k(ξ) h_k(η) r^k`.
pub fn mehler_kernel(r: f64, xi: Complex64, eta: Complex64) -> Result<Complex64> {
    if !r.is_finite() || r.abs() > 1.0 - MEHLER_EPS {
        return Err(domain(format!(
            "Mehler kernel needs |r| <= 1 - {MEHLER_EPS}, got {r}"
        )));
    }
    let one_m = 1.0 - r * r;
    let expo = -0.5 * (1.0 + r * r) / one_m * (xi * xi + eta * eta) + 2.0 * r / one_m * xi * eta;
    Ok(expo.exp() / (PI.sqrt() * one_m.sqrt()))
}

/// Truncated Mehler series `Σ_{k<terms} h_k(ξ) h_k(η) r^k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MehlerSeries {
    pub value: Complex64,
    pub terms: usize,
    /// Largest `|h_k(ξ)h_k(η)r^k|` divided by `|value|`; the cancellation the
    /// summation had to absorb.
    pub peak_ratio: f64,
    /// Mantissa bits used for the summation.
    pub precision: usize,
}

/// Hard ceiling on the number of series terms.
pub const MEHLER_SERIES_MAX_TERMS: usize = 50_000;

/// Sums the Mehler series until two consecutive terms fall below `1e-20` of
/// the partial sum. For complex arguments the terms can exceed the sum by
/// dozens of orders of magnitude, so the polynomial parts `h_k e^{z²/2}` are
/// carried in multiprecision; precision is doubled until it covers the
/// observed peak-to-sum ratio with 20 digits to spare.
pub fn mehler_series(r: f64, xi: Complex64, eta: Complex64) -> Result<MehlerSeries> {
    if !r.is_finite() || r.abs() > 1.0 - MEHLER_EPS {
        return Err(domain(format!(
            "Mehler series needs |r| <= 1 - {MEHLER_EPS}, got {r}"
        )));
    }
    for z in [xi, eta] {
        check_arg(z)?;
    }
    let seed = (-0.5 * (xi * xi + eta * eta)).exp() / PI.sqrt();
    let mut bits = 192;
    loop {
        let (sum, terms, peak) = multiprecision::mehler_polynomial_sum(r, xi, eta, bits)?;
        let value = seed * sum;
        let peak_ratio = peak / sum.norm();
        // digits lost to cancellation plus a 20-digit margin
        let needed = (peak_ratio.max(1.0).log2() + 20.0 * std::f64::consts::LOG2_10).ceil() as usize;
        if needed <= bits || bits >= 4096 {
            return Ok(MehlerSeries {
                value,
                terms,
                peak_ratio,
                precision: bits,
            });
        }
        bits = (2 * bits).max(needed + 64);
    }
}

mod multiprecision {
    use dashu_float::round::mode::HalfEven;
    use dashu_float::FBig;
    use num_complex::Complex64;

    use super::MEHLER_SERIES_MAX_TERMS;
    use crate::error::{Error, Result};

    type Big = FBig<HalfEven, 2>;

    #[derive(Clone)]
    struct BigComplex {
        re: Big,
        im: Big,
    }

    impl BigComplex {
        fn mul(&self, o: &BigComplex) -> BigComplex {
            BigComplex {
                re: &self.re * &o.re - &self.im * &o.im,
                im: &self.re * &o.im + &self.im * &o.re,
            }
        }

        fn norm_f64(&self) -> f64 {
            self.re.to_f64().value().hypot(self.im.to_f64().value())
        }
    }

    fn big(x: f64, bits: usize) -> Big {
        Big::try_from(x)
            .expect("finite input")
            .with_precision(bits)
            .value()
    }

    fn big_c(z: Complex64, bits: usize) -> BigComplex {
        BigComplex {
            re: big(z.re, bits),
            im: big(z.im, bits),
        }
    }

    // Σ p_k(ξ)p_k(η)r^k with h_k = π^{-1/4} e^{-z²/2} p_k; returns the sum,
    // the number of terms and the largest term modulus.
    pub(super) fn mehler_polynomial_sum(
        r: f64,
        xi: Complex64,
        eta: Complex64,
        bits: usize,
    ) -> Result<(Complex64, usize, f64)> {
        let x = big_c(xi, bits);
        let e = big_c(eta, bits);
        let rr = big(r, bits);
        let one = BigComplex {
            re: big(1.0, bits),
            im: big(0.0, bits),
        };
        let sqrt2 = big(2.0, bits).sqrt();
        let scale = |z: &BigComplex, s: &Big| BigComplex {
            re: &z.re * s,
            im: &z.im * s,
        };
        let (mut px0, mut px1) = (one.clone(), scale(&x, &sqrt2));
        let (mut pe0, mut pe1) = (one.clone(), scale(&e, &sqrt2));
        let mut rk = rr.clone();
        let first = px1.mul(&pe1);
        let mut sum = BigComplex {
            re: &one.re + &first.re * &rk,
            im: &first.im * &rk,
        };
        let mut peak = 1f64.max(first.norm_f64() * r.abs());
        let mut prev_small = false;
        for k in 1..MEHLER_SERIES_MAX_TERMS {
            let a = (big(2.0, bits) / big((k + 1) as f64, bits)).sqrt();
            let b = (big(k as f64, bits) / big((k + 1) as f64, bits)).sqrt();
            let step = |z: &BigComplex, p1: &BigComplex, p0: &BigComplex| {
                let zp = z.mul(p1);
                BigComplex {
                    re: &zp.re * &a - &p0.re * &b,
                    im: &zp.im * &a - &p0.im * &b,
                }
            };
            let nx = step(&x, &px1, &px0);
            let ne = step(&e, &pe1, &pe0);
            px0 = std::mem::replace(&mut px1, nx);
            pe0 = std::mem::replace(&mut pe1, ne);
            rk = &rk * &rr;
            let t = px1.mul(&pe1);
            let term = BigComplex {
                re: &t.re * &rk,
                im: &t.im * &rk,
            };
            sum = BigComplex {
                re: &sum.re + &term.re,
                im: &sum.im + &term.im,
            };
            let tn = term.norm_f64();
            peak = peak.max(tn);
            let small = tn <= 1e-20 * sum.norm_f64();
            if small && prev_small {
                let value = Complex64::new(sum.re.to_f64().value(), sum.im.to_f64().value());
                return Ok((value, k + 2, peak));
            }
            prev_small = small;
        }
        Err(Error::Domain(format!(
            "Mehler series at r = {r}, ξ = {xi}, η = {eta} not converged within {MEHLER_SERIES_MAX_TERMS} terms"
        )))
    }
}

/// Kernel of the level-`k` Hermite projection via the Laguerre convolution
/// `π^{-n/2} Σ_j (-1)^j L_j^{n/2-1}(½(z+w)²) L_{k-j}^{n/2-1}(½(z-w)²) e^{-½(z²+w²)}`.
pub fn projection_kernel(k: usize, n: usize, z: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    if z.len() != n || w.len() != n {
        return Err(input("projection kernel: dimension mismatch"));
    }
    let mut sp = Complex64::new(0.0, 0.0);
    let mut sm = Complex64::new(0.0, 0.0);
    for (&a, &b) in z.iter().zip(w) {
        sp += (a + b) * (a + b);
        sm += (a - b) * (a - b);
    }
    let nu = 0.5 * n as f64 - 1.0;
    let lp = laguerre_polys_upto(k, nu, 0.5 * sp)?;
    let lm = laguerre_polys_upto(k, nu, 0.5 * sm)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..=k {
        let term = lp[j] * lm[k - j];
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    // z² + w² = ½((z+w)² + (z-w)²)
    let gauss = (-0.25 * (sp + sm)).exp();
    Ok(acc * gauss * PI.powf(-0.5 * n as f64))
}

/// `Φ_k(z,w) = Σ_{|α|=k} Φ_α(z) Φ_α(w)` by direct enumeration of the level.
pub fn projection_kernel_direct(
    k: usize,
    n: usize,
    z: &[Complex64],
    w: &[Complex64],
) -> Result<Complex64> {
    if z.len() != n || w.len() != n {
        return Err(input("projection kernel: dimension mismatch"));
    }
    let hz = per_coordinate(k, z)?;
    let hw = per_coordinate(k, w)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for alpha in MultiIndex::level_set(n, k) {
        let mut prod = Complex64::new(1.0, 0.0);
        for (j, &a) in alpha.entries().iter().enumerate() {
            prod *= hz[j][a] * hw[j][a];
        }
        acc += prod;
    }
    Ok(acc)
}

/// `Φ_k(z, z̄) = Σ_{|α|=k} |Φ_α(z)|²`, summed over the level as a sum of
/// nonnegative terms (no cancellation); used for growth sweeps at large `k`.
pub fn projection_kernel_diagonal(k: usize, z: &[Complex64]) -> Result<f64> {
    let table = per_coordinate(k, z)?;
    // Convolve |h_a(z_j)|² over coordinates, keeping only total degree <= k.
    let mut conv = vec![0.0; k + 1];
    conv[0] = 1.0;
    for row in &table {
        let mut next = vec![0.0; k + 1];
        for (deg, &c) in conv.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for a in 0..=(k - deg) {
                next[deg + a] += c * row[a].norm_sqr();
            }
        }
        conv = next;
    }
    Ok(conv[k])
}

fn per_coordinate(k: usize, z: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
    z.iter()
        .map(|&zj| {
            let mut buf = Vec::new();
            hermite_fns_upto(k, zj, &mut buf)?;
            Ok(buf)
        })
        .collect()
}

/// Growth model `k^{3(n-1)/4} e^{2√k |y|}` for `|Φ_k(z, z̄)|`.
pub fn perron_growth_bound(k: usize, y: &[f64], n: usize) -> Result<f64> {
    if k == 0 {
        return Err(input("growth bound is stated for k >= 1"));
    }
    let ynorm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let kf = k as f64;
    Ok(kf.powf(0.75 * (n as f64 - 1.0)) * (2.0 * kf.sqrt() * ynorm).exp())
}
