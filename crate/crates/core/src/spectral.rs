//! Finite Hermite expansions: analysis, synthesis at complex points, level
//! projections `P_k`, the Hermite semigroup `e^{-tH}` and decay fits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{capability, input, Error, Result};
use crate::phase_space::MultiIndex;
use crate::quadrature::{doubled, relative_change, GaussHermiteRule, QuadConfig};
use crate::special_functions::{
    hermite_fns_upto, projection_kernel_diagonal, K_CAP, Y_CAP,
};

/// Coefficients `c_α = (f, Φ_α)` for `|α| <= k_max`; absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteExpansion {
    n: usize,
    k_max: usize,
    coeffs: BTreeMap<MultiIndex, Complex64>,
}

impl HermiteExpansion {
    pub fn new(n: usize, k_max: usize) -> Result<Self> {
        if n == 0 {
            return Err(input("expansion dimension must be >= 1"));
        }
        if k_max > K_CAP {
            return Err(capability(format!("K_max = {k_max} exceeds cap {K_CAP}")));
        }
        Ok(Self {
            n,
            k_max,
            coeffs: BTreeMap::new(),
        })
    }

    /// `Φ_α` itself, truncated at `k_max` (at least `|α|`).
    pub fn basis(alpha: &MultiIndex, k_max: usize) -> Result<Self> {
        let mut f = Self::new(alpha.dim(), k_max.max(alpha.level()))?;
        f.set(alpha.clone(), Complex64::new(1.0, 0.0))?;
        Ok(f)
    }

    /// One-dimensional expansion from a coefficient list `c_0, c_1, …`.
    pub fn from_coefficients_1d(coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(input("empty coefficient list"));
        }
        let mut f = Self::new(1, coeffs.len() - 1)?;
        for (k, &c) in coeffs.iter().enumerate() {
            f.set(MultiIndex::new(vec![k]), c)?;
        }
        Ok(f)
    }

    /// Random expansion with complex Gaussian coefficients damped by
    /// `e^{-decay·|α|}`; reproducible from `seed`.
    pub fn random(n: usize, k_max: usize, decay: f64, seed: u64) -> Result<Self> {
        if !decay.is_finite() {
            return Err(input("decay rate must be finite"));
        }
        let mut f = Self::new(n, k_max)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for alpha in MultiIndex::up_to(n, k_max) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let damp = (-decay * alpha.level() as f64).exp();
            f.set(alpha, Complex64::new(re, im) * damp)?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn get(&self, alpha: &MultiIndex) -> Complex64 {
        self.coeffs.get(alpha).copied().unwrap_or_default()
    }

    pub fn set(&mut self, alpha: MultiIndex, c: Complex64) -> Result<()> {
        if alpha.dim() != self.n {
            return Err(input(format!(
                "multi-index {alpha} does not match dimension {}",
                self.n
            )));
        }
        if alpha.level() > self.k_max {
            return Err(input(format!(
                "multi-index {alpha} above truncation level {}",
                self.k_max
            )));
        }
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(input(format!("non-finite coefficient at {alpha}")));
        }
        if c == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, c);
        }
        Ok(())
    }

    /// Nonzero coefficients in level order.
    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.coeffs.iter()
    }

    /// `∥f∥² = Σ |c_α|²`.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum()
    }

    /// `ρ_k = ∥P_k f∥` for `k = 0..=k_max`.
    pub fn level_norms(&self) -> Vec<f64> {
        let mut sq = vec![0.0; self.k_max + 1];
        for (a, c) in &self.coeffs {
            sq[a.level()] += c.norm_sqr();
        }
        sq.into_iter().map(f64::sqrt).collect()
    }

    /// `(P_k f, P_k g)` for every level.
    pub fn level_inner(&self, other: &HermiteExpansion) -> Result<Vec<Complex64>> {
        if self.n != other.n {
            return Err(input("expansions have different dimensions"));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.k_max.max(other.k_max) + 1];
        for (a, c) in &self.coeffs {
            out[a.level()] += c * other.get(a).conj();
        }
        Ok(out)
    }

    /// Dense coefficient tensor with side `k_max + 1` (row-major, first index slowest).
    pub(crate) fn dense(&self) -> Vec<Complex64> {
        let side = self.k_max + 1;
        let mut out = vec![Complex64::new(0.0, 0.0); side.pow(self.n as u32)];
        for (a, c) in &self.coeffs {
            let idx = a.entries().iter().fold(0, |acc, &e| acc * side + e);
            out[idx] = *c;
        }
        out
    }

    /// `F(z) = Σ c_α Φ_α(z)` at a complex point.
    pub fn evaluate_entire(&self, z: &[Complex64]) -> Result<Complex64> {
        if z.len() != self.n {
            return Err(input(format!(
                "point of dimension {} for an expansion in dimension {}",
                z.len(),
                self.n
            )));
        }
        let tables = self.tables(z)?;
        Ok(self
            .coeffs
            .iter()
            .map(|(a, c)| {
                a.entries()
                    .iter()
                    .enumerate()
                    .fold(*c, |acc, (j, &e)| acc * tables[j][e])
            })
            .sum())
    }

    /// Restriction of the expansion to real arguments.
    pub fn synthesize(&self, xi: &[f64]) -> Result<Complex64> {
        let z: Vec<Complex64> = xi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.evaluate_entire(&z)
    }

    /// `Σ_{|α|=k} c_α Φ_α(z)`, the level-`k` part of `F` at `z`.
    pub fn level_partial(&self, k: usize, z: &[Complex64]) -> Result<Complex64> {
        let (p, _) = project(self, k)?;
        p.evaluate_entire(z)
    }

    fn tables(&self, z: &[Complex64]) -> Result<Vec<Vec<Complex64>>> {
        z.iter()
            .map(|&zj| {
                let mut buf = Vec::new();
                hermite_fns_upto(self.k_max, zj, &mut buf)?;
                Ok(buf)
            })
            .collect()
    }
}

/// `c_α = (f, Φ_α)` for `|α| <= k_max`, by tensor Gauss–Hermite quadrature of
/// order `cfg.gh_order` checked against twice that order. `f` must carry its
/// own Gaussian decay.
pub fn analyze<F>(f: F, n: usize, k_max: usize, cfg: &QuadConfig) -> Result<HermiteExpansion>
where
    F: Fn(&[f64]) -> Complex64,
{
    let fine_order = doubled(cfg.gh_order)?;
    let coarse = analyze_with_rule(&f, n, k_max, &*GaussHermiteRule::cached(cfg.gh_order)?)?;
    let fine = analyze_with_rule(&f, n, k_max, &*GaussHermiteRule::cached(fine_order)?)?;
    let scale = fine.norm_sq().sqrt().max(f64::MIN_POSITIVE);
    for alpha in MultiIndex::up_to(n, k_max) {
        let change = relative_change(coarse.get(&alpha), fine.get(&alpha), scale);
        if !(change <= cfg.rtol) {
            return Err(Error::Accuracy {
                what: format!("Hermite coefficient {alpha}"),
                coarse_order: cfg.gh_order,
                fine_order,
                coarse: format!("{}", coarse.get(&alpha)),
                fine: format!("{}", fine.get(&alpha)),
                change,
            });
        }
    }
    Ok(fine)
}

/// [`analyze`] under a single rule, without the doubling check.
pub fn analyze_with_rule<F>(
    f: F,
    n: usize,
    k_max: usize,
    rule: &GaussHermiteRule,
) -> Result<HermiteExpansion>
where
    F: Fn(&[f64]) -> Complex64,
{
    let mut out = HermiteExpansion::new(n, k_max)?;
    let m = rule.order();
    // h_k at every node, shared by all coordinates
    let table: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .map(|&x| {
            let mut buf = Vec::new();
            hermite_fns_upto(k_max, Complex64::new(x, 0.0), &mut buf)?;
            Ok(buf.into_iter().map(|c| c.re).collect())
        })
        .collect::<Result<_>>()?;
    let indices = MultiIndex::up_to(n, k_max);
    let mut acc = vec![Complex64::new(0.0, 0.0); indices.len()];
    let mut idx = vec![0usize; n];
    let mut point = vec![0.0; n];
    for _ in 0..m.pow(n as u32) {
        let mut w = 1.0;
        for j in 0..n {
            point[j] = rule.nodes()[idx[j]];
            w *= rule.scaled_weights()[idx[j]];
        }
        let fv = f(&point) * w;
        for (slot, alpha) in acc.iter_mut().zip(&indices) {
            let phi: f64 = alpha
                .entries()
                .iter()
                .enumerate()
                .map(|(j, &a)| table[idx[j]][a])
                .product();
            *slot += fv * phi;
        }
        for j in 0..n {
            idx[j] += 1;
            if idx[j] < m {
                break;
            }
            idx[j] = 0;
        }
    }
    for (alpha, c) in indices.into_iter().zip(acc) {
        if c.re.is_finite() && c.im.is_finite() {
            out.set(alpha, c)?;
        } else {
            return Err(input("integrand produced a non-finite coefficient"));
        }
    }
    Ok(out)
}

/// `P_k F` and `ρ_k = ∥P_k f∥`.
pub fn project(f: &HermiteExpansion, k: usize) -> Result<(HermiteExpansion, f64)> {
    if k > f.k_max {
        return Err(input(format!("level {k} above truncation {}", f.k_max)));
    }
    let mut out = HermiteExpansion::new(f.n, f.k_max)?;
    for (a, c) in f.iter().filter(|(a, _)| a.level() == k) {
        out.set(a.clone(), *c)?;
    }
    let rho = out.norm_sq().sqrt();
    Ok((out, rho))
}

/// `e^{-tH} f`: level-`k` coefficients scaled by `e^{-(2k+n)t}`.
pub fn semigroup(f: &HermiteExpansion, t: f64) -> Result<HermiteExpansion> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(input(format!("semigroup time must be positive, got {t}")));
    }
    let mut out = HermiteExpansion::new(f.n, f.k_max)?;
    for (a, c) in f.iter() {
        let eig = (2 * a.level() + f.n) as f64;
        out.set(a.clone(), c * (-eig * t).exp())?;
    }
    Ok(out)
}

/// Level norms with a fitted `ρ_k ≈ Ĉ e^{-2√k t̂}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayProfile {
    pub level_norms: Vec<f64>,
    pub t_hat: f64,
    pub c_hat: f64,
    /// Root-mean-square residual of `log ρ_k` over the fitted window.
    pub residual_rms: f64,
    pub window: (usize, usize),
}

impl DecayProfile {
    /// Radius of the tube `|Im z| < t̂` on which the fitted profile guarantees
    /// a holomorphic extension.
    pub fn extension_radius(&self) -> f64 {
        self.t_hat
    }

    /// `Ĉ e^{-2√k t̂}`.
    pub fn model(&self, k: usize) -> f64 {
        self.c_hat * (-2.0 * (k as f64).sqrt() * self.t_hat).exp()
    }
}

/// Lowest level used by [`decay_estimate`].
pub const DECAY_FIT_MIN_LEVEL: usize = 4;

/// Least-squares fit of `log ρ_k` against `-2√k` over nonzero levels `k >= 4`.
pub fn decay_estimate(f: &HermiteExpansion) -> Result<DecayProfile> {
    decay_estimate_window(f, DECAY_FIT_MIN_LEVEL, f.k_max)
}

/// [`decay_estimate`] over the level window `lo..=hi`.
pub fn decay_estimate_window(f: &HermiteExpansion, lo: usize, hi: usize) -> Result<DecayProfile> {
    let rho = f.level_norms();
    let hi = hi.min(f.k_max);
    let pts: Vec<(f64, f64)> = (lo..=hi)
        .filter(|&k| rho[k] > 0.0)
        .map(|k| (-2.0 * (k as f64).sqrt(), rho[k].ln()))
        .collect();
    if pts.len() < 5 {
        return Err(input(format!(
            "decay fit needs at least 5 nonzero levels in {lo}..={hi}, found {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual_rms = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayProfile {
        level_norms: rho,
        t_hat: slope,
        c_hat: intercept.exp(),
        residual_rms,
        window: (lo, hi),
    })
}

/// `F(z)` with a bound on the contribution of the levels above `K_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntireEvaluation {
    pub value: Complex64,
    /// `Σ_{k>K_max} √Φ_k(z, z̄) · Ĉe^{-2√k t̂}`; infinite when the series
    /// does not settle before the degree cap.
    pub tail_bound: f64,
    /// `|Im z| >= t̂`: outside the tube guaranteed by the profile.
    pub outside_tube: bool,
}

/// [`HermiteExpansion::evaluate_entire`] plus a Cauchy–Schwarz tail bound from
/// a decay profile: `|Σ_{|α|=k} c_α Φ_α(z)| <= √Φ_k(z, z̄) ρ_k`.
pub fn evaluate_entire_with_tail(
    f: &HermiteExpansion,
    z: &[Complex64],
    profile: &DecayProfile,
) -> Result<EntireEvaluation> {
    let value = f.evaluate_entire(z)?;
    let ynorm = z.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    if z.iter().any(|c| c.im.abs() > Y_CAP) {
        return Err(capability("imaginary part above cap"));
    }
    let mut tail = 0.0;
    let mut settled = false;
    for k in f.k_max + 1..=K_CAP {
        let term = projection_kernel_diagonal(k, z)?.sqrt() * profile.model(k);
        tail += term;
        if term <= 1e-17 * tail.max(value.norm()) {
            settled = true;
            break;
        }
    }
    Ok(EntireEvaluation {
        value,
        tail_bound: if settled { tail } else { f64::INFINITY },
        outside_tube: ynorm >= profile.extension_radius(),
    })
}

/// Magic line of the coefficient-table format.
pub const FORMAT_MAGIC: &str = "hermite-expansion";
/// Current coefficient-table format version.
pub const FORMAT_VERSION: u32 = 1;

impl HermiteExpansion {
    /// Plain-text coefficient table:
    ///
    /// ```text
    /// hermite-expansion 1
    /// n 2
    /// k_max 3
    /// 0 0 1 0
    /// 2 1 0.25 -0.5
    /// ```
    ///
    /// After the header each row is `α_1 … α_n re im`. Lines starting with `#`
    /// and blank lines are ignored. Floats use the shortest round-trip form.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{FORMAT_MAGIC} {FORMAT_VERSION}");
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "k_max {}", self.k_max);
        for (a, c) in &self.coeffs {
            for e in a.entries() {
                let _ = write!(s, "{e} ");
            }
            let _ = writeln!(s, "{:?} {:?}", c.re, c.im);
        }
        s
    }

    pub fn from_table(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Format {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (ln, magic) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
        let version = magic
            .strip_prefix(FORMAT_MAGIC)
            .map(str::trim)
            .ok_or_else(|| err(ln, format!("expected `{FORMAT_MAGIC} <version>`")))?;
        match version.parse::<u32>() {
            Ok(FORMAT_VERSION) => {}
            Ok(v) => return Err(err(ln, format!("unsupported version {v} (expected {FORMAT_VERSION})"))),
            Err(_) => return Err(err(ln, format!("bad version `{version}`"))),
        }
        let mut header = |key: &str| -> Result<usize> {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| err(ln, format!("missing `{key}` header")))?;
            l.strip_prefix(key)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| err(ln, format!("expected `{key} <integer>`")))
        };
        let n = header("n")?;
        let k_max = header("k_max")?;
        let mut out = Self::new(n, k_max).map_err(|e| err(ln, e.to_string()))?;
        for (ln, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != n + 2 {
                return Err(err(
                    ln,
                    format!("expected {} fields, found {}", n + 2, fields.len()),
                ));
            }
            let alpha = fields[..n]
                .iter()
                .map(|f| f.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| err(ln, format!("bad multi-index: {e}")))?;
            let re: f64 = fields[n]
                .parse()
                .map_err(|e| err(ln, format!("bad real part: {e}")))?;
            let im: f64 = fields[n + 1]
                .parse()
                .map_err(|e| err(ln, format!("bad imaginary part: {e}")))?;
            let alpha = MultiIndex::new(alpha);
            if out.coeffs.contains_key(&alpha) {
                return Err(err(ln, format!("duplicate multi-index {alpha}")));
            }
            out.set(alpha, Complex64::new(re, im))
                .map_err(|e| err(ln, e.to_string()))?;
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_table())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_table(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn h0_plus_half_h3() -> HermiteExpansion {
        HermiteExpansion::from_coefficients_1d(&[c(1.0), c(0.0), c(0.0), c(0.5)]).unwrap()
    }

    #[test]
    fn analyze_basis_function() {
        let cfg = QuadConfig {
            gh_order: 40,
            ..QuadConfig::default()
        };
        let alpha = MultiIndex::new(vec![2, 1]);
        let f = analyze(
            |x| {
                crate::special_functions::hermite_fn_nd(
                    &alpha,
                    &[Complex64::new(x[0], 0.0), Complex64::new(x[1], 0.0)],
                )
                .unwrap()
            },
            2,
            5,
            &cfg,
        )
        .unwrap();
        for (a, v) in f.iter() {
            if *a == alpha {
                assert_relative_eq!(v.re, 1.0, max_relative = 1e-12);
            } else {
                assert!(v.norm() <= 1e-10, "{a}: {v}");
            }
        }
    }

    #[test]
    fn gaussian_has_only_even_coefficients() {
        let cfg = QuadConfig {
            gh_order: 60,
            ..QuadConfig::default()
        };
        let f = analyze(|x| c((-x[0] * x[0]).exp()), 1, 15, &cfg).unwrap();
        for (a, v) in f.iter() {
            if a.level() % 2 == 1 {
                assert!(v.norm() < 1e-15, "{a}: {v}");
            }
        }
        assert!(f.get(&MultiIndex::new(vec![2])).norm() > 1e-3);
    }

    #[test]
    fn parseval_and_projection() {
        let f = h0_plus_half_h3();
        assert_relative_eq!(f.norm_sq(), 1.25);
        let (p3, rho3) = project(&f, 3).unwrap();
        assert_relative_eq!(rho3, 0.5);
        assert_eq!(p3.iter().count(), 1);
        assert_eq!(project(&f, 1).unwrap().1, 0.0);
        let total: f64 = f.level_norms().iter().map(|r| r * r).sum();
        assert_relative_eq!(total, f.norm_sq());
        assert!(project(&f, 4).is_err());
    }

    #[test]
    fn semigroup_factors() {
        let t = 0.3;
        let f = HermiteExpansion::basis(&MultiIndex::zero(1), 0).unwrap();
        let g = semigroup(&f, t).unwrap();
        assert_relative_eq!(g.get(&MultiIndex::zero(1)).re, (-t).exp(), max_relative = 1e-15);

        let f = HermiteExpansion::basis(&MultiIndex::new(vec![3]), 3).unwrap();
        let g = semigroup(&f, 0.1).unwrap();
        assert_relative_eq!(g.get(&MultiIndex::new(vec![3])).re, (-0.7f64).exp(), max_relative = 1e-15);
        assert!(semigroup(&f, 0.0).is_err());
    }

    #[test]
    fn entire_extension_values() {
        let f = HermiteExpansion::basis(&MultiIndex::new(vec![1]), 1).unwrap();
        let v = f.evaluate_entire(&[Complex64::new(0.0, 1.0)]).unwrap();
        let expected = 2f64.sqrt() * std::f64::consts::PI.powf(-0.25) * 0.5f64.exp();
        assert_relative_eq!(v.im, expected, max_relative = 1e-14);
        assert!(v.re.abs() < 1e-15);
    }

    #[test]
    fn decay_fit_recovers_rate() {
        let t0 = 0.5;
        let coeffs: Vec<Complex64> = (0..=40)
            .map(|k| c((-2.0 * (k as f64).sqrt() * t0).exp()))
            .collect();
        let f = HermiteExpansion::from_coefficients_1d(&coeffs).unwrap();
        let prof = decay_estimate(&f).unwrap();
        assert!((prof.t_hat - t0).abs() <= 0.025);
        assert_relative_eq!(prof.c_hat, 1.0, max_relative = 1e-10);
        assert_eq!(prof.window, (4, 40));
    }

    #[test]
    fn decay_fit_needs_levels() {
        let f = HermiteExpansion::basis(&MultiIndex::new(vec![6]), 10).unwrap();
        assert!(matches!(decay_estimate(&f), Err(Error::Input(_))));
    }

    #[test]
    fn table_round_trip_and_errors() {
        let mut f = HermiteExpansion::new(2, 3).unwrap();
        f.set(MultiIndex::new(vec![0, 0]), Complex64::new(1.0, 0.0)).unwrap();
        f.set(MultiIndex::new(vec![2, 1]), Complex64::new(0.1, -1.0 / 3.0)).unwrap();
        let text = f.to_table();
        let g = HermiteExpansion::from_table(&text, Path::new("mem")).unwrap();
        assert_eq!(f, g);

        let bad = text.replace("hermite-expansion 1", "hermite-expansion 7");
        assert!(matches!(
            HermiteExpansion::from_table(&bad, Path::new("mem")),
            Err(Error::Format { line: 1, .. })
        ));
        let truncated = format!("{}2 1 0.5\n", text);
        match HermiteExpansion::from_table(&truncated, Path::new("mem")) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
        let above = format!("{}4 0 1 0\n", text);
        assert!(HermiteExpansion::from_table(&above, Path::new("mem")).is_err());
    }
}
