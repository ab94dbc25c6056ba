//! Batch runner for the verification suites.
//!
//! A run evaluates every instance of the selected suites, writes one JSON
//! record per instance to the report (after a single header line holding the
//! timestamp) and maps the outcome to an exit status: 0 when every record
//! passes, 1 when any fails, 2 when the configuration is rejected.

use std::f64::consts::PI;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gutzmer::{
    gutzmer_report, image_norm, image_norm_constant, k_average_difference, k_average_verify,
    laguerre_heat_integral, orthogonality_1d, GutzmerConfig, ImageConfig, OrthogonalityVariant,
    Tolerances,
};
use crate::phase_space::{beta_sum, pi_norm_sq, pi_norm_sq_closed, MultiIndex, PhasePoint};
use crate::quadrature::QuadConfig;
use crate::special_functions::{
    laguerre_fn, laguerre_polys_upto, level_weight, mehler_kernel, mehler_series, projection_kernel, projection_kernel_direct,
};
use crate::spectral::{semigroup, HermiteExpansion};

/// Report format version written into the header line.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Gutzmer,
    Mehler,
    Lemmas,
    Ortho,
    Image,
    Kaverage,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Mehler,
        Suite::Lemmas,
        Suite::Ortho,
        Suite::Image,
        Suite::Kaverage,
        Suite::Gutzmer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Gutzmer => "gutzmer",
            Suite::Mehler => "mehler",
            Suite::Lemmas => "lemmas",
            Suite::Ortho => "ortho",
            Suite::Image => "image",
            Suite::Kaverage => "kaverage",
            Suite::All => "all",
        }
    }

    fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::ALL.to_vec(),
            s => vec![s],
        }
    }

    fn uses_mc(self) -> bool {
        matches!(self, Suite::Gutzmer | Suite::Kaverage | Suite::All)
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "gutzmer" => Suite::Gutzmer,
            "mehler" => Suite::Mehler,
            "lemmas" => Suite::Lemmas,
            "ortho" => Suite::Ortho,
            "image" => Suite::Image,
            "kaverage" => Suite::Kaverage,
            "all" => Suite::All,
            other => return Err(format!("unknown suite `{other}`")),
        })
    }
}

/// Validated run configuration. Everything except `out` is echoed into the
/// report body.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub suite: Suite,
    pub n: usize,
    pub k_max: usize,
    pub gh_order: usize,
    pub torus_points: usize,
    pub torus_points_nd: usize,
    pub mc_samples: usize,
    pub seed: Option<u64>,
    pub rtol: f64,
    pub mc_sigma: f64,
    pub mc_budget: f64,
    pub tail_tol: f64,
    pub grid_points: usize,
    pub grid_extent: f64,
    pub mehler_extent: f64,
    pub functions: usize,
    pub kaverage_points: usize,
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn defaults(suite: Suite) -> Self {
        Self {
            suite,
            n: 1,
            k_max: 12,
            gh_order: 160,
            torus_points: 64,
            torus_points_nd: 4,
            mc_samples: 20_000,
            seed: None,
            rtol: 1e-6,
            mc_sigma: 3.0,
            mc_budget: 1e-2,
            tail_tol: 1e-12,
            grid_points: 25,
            grid_extent: 1.5,
            mehler_extent: 2.0,
            functions: 3,
            kaverage_points: 4,
            out: None,
        }
    }

    fn quad(&self) -> QuadConfig {
        QuadConfig {
            gh_order: self.gh_order,
            rtol: 1e-10,
            torus_points: self.torus_points,
        }
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            mc_sigma: self.mc_sigma,
            mc_budget: self.mc_budget,
        }
    }

    fn seed(&self) -> u64 {
        self.seed.expect("validated: seed present for Monte Carlo suites")
    }
}

/// Unvalidated settings from a config file and/or command-line flags. Numeric
/// fields are kept signed so that negative input is reported by field name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    pub suite: Option<String>,
    pub n: Option<i64>,
    pub k_max: Option<i64>,
    pub gh_order: Option<i64>,
    pub torus_points: Option<i64>,
    pub torus_points_nd: Option<i64>,
    pub mc_samples: Option<i64>,
    pub seed: Option<i64>,
    pub rtol: Option<f64>,
    pub mc_sigma: Option<f64>,
    pub mc_budget: Option<f64>,
    pub tail_tol: Option<f64>,
    pub grid_points: Option<i64>,
    pub grid_extent: Option<f64>,
    pub mehler_extent: Option<f64>,
    pub functions: Option<i64>,
    pub kaverage_points: Option<i64>,
    pub out: Option<PathBuf>,
    /// Where each key was set in the config file, for diagnostics.
    lines: Vec<(String, usize)>,
}

fn config_err(field: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        msg: msg.into(),
    }
}

impl RawConfig {
    /// Parses a `key = value` TOML file. Unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path)
    }

    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
            let line = e
                .span()
                .map(|s| text[..s.start].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Format {
                path: origin.to_path_buf(),
                line,
                msg: e.message().to_string(),
            }
        })?;
        let mut raw = RawConfig::default();
        let lines: Vec<(String, usize)> = text
            .lines()
            .enumerate()
            .filter_map(|(i, l)| l.split_once('=').map(|(k, _)| (k.trim().to_string(), i + 1)))
            .collect();
        for (key, value) in &table {
            let line = lines.iter().find(|(k, _)| k == key).map_or(0, |(_, l)| *l);
            let at = |msg: &str| config_err(key, format!("{}: line {line}: {msg}", origin.display()));
            let int = || value.as_integer().ok_or_else(|| at("expected an integer"));
            let float = || {
                value
                    .as_float()
                    .or_else(|| value.as_integer().map(|i| i as f64))
                    .ok_or_else(|| at("expected a number"))
            };
            match key.as_str() {
                "suite" => {
                    raw.suite = Some(value.as_str().ok_or_else(|| at("expected a string"))?.to_string())
                }
                "n" => raw.n = Some(int()?),
                "k_max" => raw.k_max = Some(int()?),
                "gh_order" => raw.gh_order = Some(int()?),
                "torus_points" => raw.torus_points = Some(int()?),
                "torus_points_nd" => raw.torus_points_nd = Some(int()?),
                "mc_samples" => raw.mc_samples = Some(int()?),
                "seed" => raw.seed = Some(int()?),
                "rtol" => raw.rtol = Some(float()?),
                "mc_sigma" => raw.mc_sigma = Some(float()?),
                "mc_budget" => raw.mc_budget = Some(float()?),
                "tail_tol" => raw.tail_tol = Some(float()?),
                "grid_points" => raw.grid_points = Some(int()?),
                "grid_extent" => raw.grid_extent = Some(float()?),
                "mehler_extent" => raw.mehler_extent = Some(float()?),
                "functions" => raw.functions = Some(int()?),
                "kaverage_points" => raw.kaverage_points = Some(int()?),
                "out" => {
                    raw.out = Some(PathBuf::from(
                        value.as_str().ok_or_else(|| at("expected a path string"))?,
                    ))
                }
                _ => return Err(at("unknown key")),
            }
        }
        raw.lines = lines;
        Ok(raw)
    }

    fn line_of(&self, key: &str) -> usize {
        self.lines
            .iter()
            .find(|(k, _)| k == key)
            .map_or(0, |(_, l)| *l)
    }

    /// Fields set in `over` replace those in `self`.
    pub fn merge(mut self, over: RawConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(
            suite, n, k_max, gh_order, torus_points, torus_points_nd, mc_samples, seed, rtol,
            mc_sigma, mc_budget, tail_tol, grid_points, grid_extent, mehler_extent, functions,
            kaverage_points, out
        );
        self
    }

    pub fn validate(&self) -> Result<RunConfig> {
        let where_ = |field: &str| match self.line_of(field) {
            0 => String::new(),
            l => format!(" (config line {l})"),
        };
        let suite: Suite = match &self.suite {
            None => return Err(config_err("suite", "no suite selected")),
            Some(s) => s.parse().map_err(|e: String| config_err("suite", e))?,
        };
        let d = RunConfig::defaults(suite);
        let pos_int = |field: &str, v: Option<i64>, default: usize| -> Result<usize> {
            match v {
                None => Ok(default),
                Some(x) if x > 0 => Ok(x as usize),
                Some(x) => Err(config_err(field, format!("must be positive, got {x}{}", where_(field)))),
            }
        };
        let nonneg_int = |field: &str, v: Option<i64>, default: usize| -> Result<usize> {
            match v {
                None => Ok(default),
                Some(x) if x >= 0 => Ok(x as usize),
                Some(x) => Err(config_err(field, format!("must be non-negative, got {x}{}", where_(field)))),
            }
        };
        let pos_f = |field: &str, v: Option<f64>, default: f64| -> Result<f64> {
            match v {
                None => Ok(default),
                Some(x) if x > 0.0 && x.is_finite() => Ok(x),
                Some(x) => Err(config_err(field, format!("must be positive and finite, got {x}{}", where_(field)))),
            }
        };
        // a zero tolerance is legal; it simply cannot be met
        let tol_f = |field: &str, v: Option<f64>, default: f64| -> Result<f64> {
            match v {
                None => Ok(default),
                Some(x) if x >= 0.0 && x.is_finite() => Ok(x),
                Some(x) => Err(config_err(field, format!("must be non-negative and finite, got {x}{}", where_(field)))),
            }
        };
        let seed = match self.seed {
            None => None,
            Some(s) if s >= 0 => Some(s as u64),
            Some(s) => return Err(config_err("seed", format!("must be non-negative, got {s}{}", where_("seed")))),
        };
        if suite.uses_mc() && seed.is_none() {
            return Err(config_err(
                "seed",
                format!("suite `{suite}` draws Haar samples and needs an explicit seed"),
            ));
        }
        let cfg = RunConfig {
            suite,
            n: pos_int("n", self.n, d.n)?,
            k_max: nonneg_int("k_max", self.k_max, d.k_max)?,
            gh_order: pos_int("gh_order", self.gh_order, d.gh_order)?,
            torus_points: pos_int("torus_points", self.torus_points, d.torus_points)?,
            torus_points_nd: pos_int("torus_points_nd", self.torus_points_nd, d.torus_points_nd)?,
            mc_samples: pos_int("mc_samples", self.mc_samples, d.mc_samples)?,
            seed,
            rtol: tol_f("rtol", self.rtol, d.rtol)?,
            mc_sigma: tol_f("mc_sigma", self.mc_sigma, d.mc_sigma)?,
            mc_budget: tol_f("mc_budget", self.mc_budget, d.mc_budget)?,
            tail_tol: pos_f("tail_tol", self.tail_tol, d.tail_tol)?,
            grid_points: pos_int("grid_points", self.grid_points, d.grid_points)?,
            grid_extent: pos_f("grid_extent", self.grid_extent, d.grid_extent)?,
            mehler_extent: pos_f("mehler_extent", self.mehler_extent, d.mehler_extent)?,
            functions: pos_int("functions", self.functions, d.functions)?,
            kaverage_points: pos_int("kaverage_points", self.kaverage_points, d.kaverage_points)?,
            out: self.out.clone(),
        };
        if cfg.gh_order > crate::quadrature::GH_MAX_ORDER / 2 {
            return Err(config_err(
                "gh_order",
                format!(
                    "must leave room for the doubling check (at most {})",
                    crate::quadrature::GH_MAX_ORDER / 2
                ),
            ));
        }
        if cfg.mc_samples < 2 {
            return Err(config_err("mc_samples", "Monte Carlo needs at least two samples"));
        }
        if cfg.k_max > crate::special_functions::K_CAP {
            return Err(config_err("k_max", format!("exceeds cap {}", crate::special_functions::K_CAP)));
        }
        Ok(cfg)
    }
}

/// One identity instance in the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub suite: &'static str,
    pub identity: String,
    pub instance: usize,
    pub inputs: Value,
    pub lhs: Value,
    pub rhs: Value,
    pub abs_err: f64,
    pub rel_err: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub meta: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record {
    fn new(suite: Suite, identity: &str, inputs: Value) -> Self {
        Self {
            suite: suite.name(),
            identity: identity.to_string(),
            instance: 0,
            inputs,
            lhs: Value::Null,
            rhs: Value::Null,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            tolerance: f64::NAN,
            pass: false,
            meta: Value::Null,
            error: None,
        }
    }

    /// Relative comparison: passes when `|lhs − rhs| <= rtol·scale`.
    fn compare(mut self, lhs: Complex64, rhs: Complex64, scale: f64, rtol: f64) -> Self {
        self.lhs = json!([lhs.re, lhs.im]);
        self.rhs = json!([rhs.re, rhs.im]);
        self.abs_err = (lhs - rhs).norm();
        self.rel_err = self.abs_err / scale;
        self.tolerance = rtol * scale;
        self.pass = self.abs_err <= self.tolerance;
        self
    }

    fn meta(mut self, meta: Value) -> Self {
        self.meta = meta;
        self
    }

    fn failed(mut self, e: &Error) -> Self {
        self.pass = false;
        self.error = Some(e.to_string());
        self
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn finish(base: Record, outcome: Result<Record>) -> Record {
    outcome.unwrap_or_else(|e| base.failed(&e))
}

/// Halton points in `[-extent, extent]^dim` (bases: the first `dim` primes).
pub fn halton_box(count: usize, dim: usize, extent: f64) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];
    assert!(dim <= PRIMES.len(), "Halton dimension too large");
    (1..=count as u64)
        .map(|i| {
            PRIMES[..dim]
                .iter()
                .map(|&b| {
                    let (mut f, mut r, mut k) = (1.0, 0.0, i);
                    while k > 0 {
                        f /= b as f64;
                        r += f * (k % b) as f64;
                        k /= b;
                    }
                    extent * (2.0 * r - 1.0)
                })
                .collect()
        })
        .collect()
}

/// Phase points `(x,y,u,v)` from a Halton sequence in `[-extent, extent]^{4n}`.
pub fn phase_grid(count: usize, n: usize, extent: f64) -> Result<Vec<PhasePoint>> {
    halton_box(count, 4 * n, extent)
        .into_iter()
        .map(|c| PhasePoint::from_parts(&c[..n], &c[n..2 * n], &c[2 * n..3 * n], &c[3 * n..]))
        .collect()
}

fn point_json(p: &PhasePoint) -> Value {
    json!({
        "z": p.z().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
        "w": p.w().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
    })
}

fn suite_mehler(cfg: &RunConfig) -> Vec<Record> {
    let s = Suite::Mehler;
    let pts = halton_box(cfg.grid_points, 4, 1.0);
    let mut jobs = Vec::new();
    for r in [0.3, 0.6, 0.9] {
        for c in &pts {
            let e = cfg.mehler_extent;
            jobs.push((r, Complex64::new(e * c[0], e * c[1]), Complex64::new(e * c[2], e * c[3])));
        }
    }
    jobs.par_iter()
        .map(|&(r, xi, eta)| {
            let base = Record::new(s, "mehler", json!({"r": r, "xi": [xi.re, xi.im], "eta": [eta.re, eta.im]}));
            finish(base.clone(), (|| {
                let series = mehler_series(r, xi, eta)?;
                let closed = mehler_kernel(r, xi, eta)?;
                Ok(base.compare(series.value, closed, closed.norm(), cfg.rtol).meta(json!({
                    "terms": series.terms,
                    "peak_ratio": series.peak_ratio,
                    "precision_bits": series.precision,
                })))
            })())
        })
        .collect()
}

fn suite_lemmas(cfg: &RunConfig) -> Result<Vec<Record>> {
    let s = Suite::Lemmas;
    let n = cfg.n;
    let quad = cfg.quad();
    let pts = phase_grid(cfg.grid_points, n, cfg.grid_extent)?;
    let alphas = MultiIndex::up_to(n, cfg.k_max.min(6));
    let mut jobs: Vec<(u8, usize, &PhasePoint)> = Vec::new();
    for p in &pts {
        for (i, _) in alphas.iter().enumerate() {
            jobs.push((1, i, p));
            jobs.push((2, i, p));
        }
        for k in 0..=cfg.k_max {
            jobs.push((3, k, p));
        }
    }
    Ok(jobs
        .par_iter()
        .map(|&(lemma, i, p)| match lemma {
            1 | 2 => {
                let alpha = &alphas[i];
                let name = if lemma == 1 { "pi_norm" } else { "beta_sum" };
                let base = Record::new(s, name, json!({"alpha": alpha.entries(), "point": point_json(p)}));
                finish(base.clone(), (|| {
                    let closed = pi_norm_sq_closed(alpha, p, &quad)?;
                    if lemma == 1 {
                        let lhs = pi_norm_sq(alpha, p, &quad)?;
                        Ok(base.compare(real(lhs), real(closed), closed.abs(), cfg.rtol))
                    } else {
                        let rhs = closed / (2.0 * PI).powi(n as i32);
                        let sum = beta_sum(alpha, p, cfg.tail_tol, &quad)?;
                        let mut rec = base.compare(real(sum.value), real(rhs), rhs.abs(), cfg.rtol);
                        rec.pass &= sum.relative_tail < cfg.tail_tol;
                        Ok(rec.meta(json!({"relative_tail": sum.relative_tail, "b_max": sum.b_max})))
                    }
                })())
            }
            _ => {
                let k = i;
                let base = Record::new(s, "projection_kernel", json!({"k": k, "point": point_json(p)}));
                finish(base.clone(), (|| {
                    let closed = projection_kernel(k, n, p.z(), p.w())?;
                    let direct = projection_kernel_direct(k, n, p.z(), p.w())?;
                    let scale = direct.norm().max(f64::MIN_POSITIVE);
                    Ok(base.compare(closed, direct, scale, cfg.rtol))
                })())
            }
        })
        .collect())
}

fn suite_ortho(cfg: &RunConfig) -> Vec<Record> {
    let s = Suite::Ortho;
    let quad = cfg.quad();
    let top = cfg.k_max.min(5);
    let mut jobs = Vec::new();
    for variant in [OrthogonalityVariant::A, OrthogonalityVariant::B] {
        for eta in [0.5, 1.0, 1.5] {
            for k in 0..=top {
                for j in 0..=top {
                    jobs.push((variant, eta, k, j));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|&(variant, eta, k, j)| {
            let base = Record::new(
                s,
                "orthogonality",
                json!({"variant": variant, "eta": eta, "k": k, "j": j}),
            );
            finish(base.clone(), (|| {
                let v = orthogonality_1d(k, j, eta, variant, &quad)?;
                // off-diagonal entries are measured against the diagonal scale
                let scale = if k == j {
                    v.expected.abs()
                } else {
                    let l = laguerre_polys_upto(top, 0.0, real(-2.0 * eta * eta))?;
                    let g = match variant {
                        OrthogonalityVariant::A => (eta * eta).exp(),
                        OrthogonalityVariant::B => 1.0,
                    };
                    2.0 * PI * g * l[k].re.min(l[j].re)
                };
                Ok(base
                    .compare(v.value, real(v.expected), scale, cfg.rtol)
                    .meta(json!({"rel_change": v.rel_change})))
            })())
        })
        .collect()
}

/// Surrogate for data outside the semigroup image: a flat spectrum over many
/// levels, fed to the weighted norm without smoothing.
pub fn unsmoothed_surrogate(k_max: usize) -> Result<HermiteExpansion> {
    let c = vec![real(1.0 / ((k_max + 1) as f64).sqrt()); k_max + 1];
    HermiteExpansion::from_coefficients_1d(&c)
}

fn image_cases() -> Result<Vec<(&'static str, HermiteExpansion)>> {
    let c = |v: &[f64]| HermiteExpansion::from_coefficients_1d(&v.iter().map(|&x| real(x)).collect::<Vec<_>>());
    Ok(vec![
        ("h0", c(&[1.0])?),
        ("h1", c(&[0.0, 1.0])?),
        ("h0+h3/2", c(&[1.0, 0.0, 0.0, 0.5])?),
    ])
}

fn suite_image(cfg: &RunConfig) -> Result<Vec<Record>> {
    let s = Suite::Image;
    let quad = cfg.quad();
    let icfg = ImageConfig {
        gh_order: cfg.gh_order,
        rtol: 1e-9,
    };
    let cases = image_cases()?;
    let mut jobs: Vec<(usize, f64)> = Vec::new();
    for (i, _) in cases.iter().enumerate() {
        for t in [0.1, 0.25, 0.5] {
            jobs.push((i, t));
        }
    }
    let mut out: Vec<Record> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let (name, f) = &cases[i];
            let base = Record::new(s, "image_norm", json!({"f": name, "t": t, "n": 1}));
            finish(base.clone(), (|| {
                let v = image_norm(&semigroup(f, t)?, t, &icfg)?;
                let c = image_norm_constant(1);
                Ok(base
                    .compare(real(v.value / f.norm_sq()), real(c), c, cfg.rtol)
                    .meta(json!({"order": v.order, "rel_change": v.rel_change})))
            })())
        })
        .collect();

    let surrogate_k = 2 * cfg.gh_order;
    let mut rec = Record::new(
        s,
        "image_divergence",
        json!({"f": format!("flat spectrum over levels 0..={surrogate_k}"), "t": 0.5, "n": 1}),
    );
    rec.rhs = json!("domain error");
    match unsmoothed_surrogate(surrogate_k).and_then(|f| image_norm(&f, 0.5, &icfg)) {
        Err(Error::Domain(msg)) => {
            rec.lhs = json!("domain error");
            rec.meta = json!({ "message": msg });
            rec.pass = true;
        }
        Ok(v) => rec.lhs = json!(v.value),
        Err(e) => rec = rec.failed(&e),
    }
    out.push(rec);

    let n = cfg.n;
    for t in [0.05, 0.1] {
        let mut prev: Option<f64> = None;
        for k in 0..=6 {
            let base = Record::new(s, "laguerre_heat", json!({"k": k, "n": n, "t": t}));
            let rec = match laguerre_heat_integral(k, n, t, &quad) {
                Err(e) => base.failed(&e),
                Ok(v) => {
                    let rec = if let Some(p) = prev {
                        let ratio = v.value / p;
                        let want = (4.0 * t).exp();
                        let mut r = base.compare(real(ratio), real(want), want, cfg.rtol);
                        r.identity = "laguerre_heat_ratio".into();
                        r
                    } else {
                        let closed = 2f64.powi(-(n as i32)) * v.model;
                        base.compare(real(v.value), real(closed), closed, cfg.rtol)
                    };
                    prev = Some(v.value);
                    rec.meta(json!({"model": v.model, "rel_change": v.rel_change}))
                }
            };
            out.push(rec);
        }
    }
    Ok(out)
}

fn suite_kaverage(cfg: &RunConfig) -> Result<Vec<Record>> {
    let s = Suite::Kaverage;
    let n = cfg.n;
    let quad = cfg.quad();
    let seed = cfg.seed();
    let pts: Vec<PhasePoint> = halton_box(cfg.kaverage_points, 2 * n, cfg.grid_extent)
        .into_iter()
        .map(|c| PhasePoint::real(&c[..n], &c[n..]))
        .collect::<Result<_>>()?;
    let top = cfg.k_max.min(3);
    let mut out = Vec::new();
    for (pi, p) in pts.iter().enumerate() {
        for alpha in MultiIndex::up_to(n, top) {
            let base = Record::new(s, "k_average", json!({"alpha": alpha.entries(), "point": point_json(p)}));
            let rec = match k_average_verify(&alpha, p, &quad, cfg.mc_samples, seed) {
                Err(e) => base.failed(&e),
                Ok(v) => {
                    let mut r = base.compare(real(v.lhs), real(v.rhs), v.rhs.abs(), cfg.rtol);
                    if v.samples > 0 {
                        // radial integrands (α = 0) have no sampling variance;
                        // the deterministic tolerance is then the floor
                        r.tolerance = (cfg.mc_sigma * v.stderr).max(cfg.rtol * v.rhs.abs());
                        r.pass = r.abs_err <= r.tolerance;
                    }
                    r.meta(json!({"stderr": v.stderr, "samples": v.samples, "seed": v.seed, "point_index": pi}))
                }
            };
            out.push(rec);
        }
        if n < 2 {
            continue;
        }
        for k in 2..=top {
            let level = MultiIndex::level_set(n, k);
            for pair in level.windows(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let base = Record::new(
                    s,
                    "k_average_permutation",
                    json!({"alpha": a.entries(), "beta": b.entries(), "point": point_json(p)}),
                );
                let rec = match k_average_difference(a, b, p, &quad, cfg.mc_samples, seed) {
                    Err(e) => base.failed(&e),
                    Ok(d) => {
                        let scale = level_weight(k, n) * laguerre_fn(k, n, p).map_or(f64::NAN, |c| c.re.abs());
                        let mut r = base.compare(real(d.mean), real(0.0), 1.0, 0.0);
                        r.tolerance = (cfg.mc_sigma * d.stderr).max(cfg.rtol * scale);
                        r.rel_err = f64::NAN;
                        r.pass = r.abs_err <= r.tolerance;
                        r.meta(json!({"stderr": d.stderr, "samples": d.samples, "seed": d.seed}))
                    }
                };
                out.push(rec);
            }
        }
    }
    Ok(out)
}

fn suite_gutzmer(cfg: &RunConfig) -> Result<Vec<Record>> {
    let s = Suite::Gutzmer;
    let n = cfg.n;
    let seed = cfg.seed();
    let gcfg = GutzmerConfig {
        gh_order: None,
        torus_points: cfg.torus_points,
        torus_points_nd: cfg.torus_points_nd,
        mc_samples: cfg.mc_samples,
        seed,
        rtol: 1e-10,
    };
    let tol = cfg.tolerances();
    let pts = phase_grid(cfg.grid_points, n, cfg.grid_extent)?;
    let fs: Vec<HermiteExpansion> = (0..cfg.functions)
        .map(|i| HermiteExpansion::random(n, cfg.k_max, 0.3, seed.wrapping_add(i as u64)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, usize)> = (0..pts.len())
        .flat_map(|p| (0..fs.len()).map(move |f| (p, f)))
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(pi, fi)| {
            let p = &pts[pi];
            let base = Record::new(
                s,
                "gutzmer",
                json!({"point": point_json(p), "function": fi, "function_seed": seed.wrapping_add(fi as u64), "k_max": cfg.k_max, "n": n}),
            );
            match gutzmer_report(&fs[fi], p, &gcfg, &tol) {
                Err(e) => base.failed(&e),
                Ok(r) => {
                    let mut rec = base;
                    rec.lhs = json!([r.lhs.value.re, r.lhs.value.im]);
                    rec.rhs = json!([r.rhs, 0.0]);
                    rec.abs_err = r.abs_err;
                    rec.rel_err = r.rel_err;
                    rec.tolerance = r.tolerance;
                    rec.pass = r.pass;
                    rec.meta(json!({
                        "lhs": r.lhs,
                        "rhs_tail": r.rhs_tail,
                        "stderr_within_budget": r.stderr_within_budget,
                    }))
                }
            }
        })
        .collect())
}

fn run_suite(suite: Suite, cfg: &RunConfig) -> Vec<Record> {
    let res = match suite {
        Suite::Mehler => Ok(suite_mehler(cfg)),
        Suite::Lemmas => suite_lemmas(cfg),
        Suite::Ortho => Ok(suite_ortho(cfg)),
        Suite::Image => suite_image(cfg),
        Suite::Kaverage => suite_kaverage(cfg),
        Suite::Gutzmer => suite_gutzmer(cfg),
        Suite::All => unreachable!("expanded by the caller"),
    };
    let mut records = res.unwrap_or_else(|e| vec![Record::new(suite, "setup", Value::Null).failed(&e)]);
    for (i, r) in records.iter_mut().enumerate() {
        r.instance = i;
    }
    records
}

/// Outcome of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub records: usize,
    pub failures: Vec<(String, String, usize)>,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            0
        } else {
            1
        }
    }
}

/// Runs the selected suites and streams records to `sink`. The header line
/// carries the wall-clock timestamp; every later line is a pure function of
/// the configuration.
pub fn run_to<W: Write>(cfg: &RunConfig, sink: &mut W) -> Result<RunSummary> {
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let header = json!({"kind": "header", "version": REPORT_VERSION, "timestamp_unix": stamp});
    writeln!(sink, "{header}")?;
    let conf = json!({"kind": "config", "config": cfg});
    writeln!(sink, "{conf}")?;
    let mut summary = RunSummary {
        records: 0,
        failures: Vec::new(),
    };
    for suite in cfg.suite.expand() {
        for rec in run_suite(suite, cfg) {
            if !rec.pass {
                summary
                    .failures
                    .push((rec.suite.to_string(), rec.identity.clone(), rec.instance));
            }
            summary.records += 1;
            let line = serde_json::to_string(&json!({"kind": "record", "record": rec}))
                .map_err(|e| Error::Io(io::Error::other(e)))?;
            writeln!(sink, "{line}")?;
        }
        sink.flush()?;
    }
    let tail = json!({"kind": "summary", "records": summary.records, "failures": summary.failures.len()});
    writeln!(sink, "{tail}")?;
    sink.flush()?;
    Ok(summary)
}

/// [`run_to`] on the configured output file, or stdout when none is set.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    match &cfg.out {
        Some(path) => run_to(cfg, &mut BufWriter::new(File::create(path)?)),
        None => run_to(cfg, &mut io::stdout().lock()),
    }
}

/// Drops the header line so two reports can be compared byte for byte.
pub fn report_body(report: &str) -> &str {
    report.split_once('\n').map_or("", |(_, body)| body)
}
