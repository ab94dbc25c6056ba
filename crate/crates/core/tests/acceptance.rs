//! Acceptance criteria 1–13. Prints one PASS/FAIL line per criterion.
//!
//! Criterion 5 asks the log-ratio of `Φ_k(z,z̄)` to `k^{3(n-1)/4}e^{2√k|y|}`
//! to be flat in `k`. The kernel actually grows like `e^{2√(2k)|y|}`, so the
//! check is reported faithfully and expected to fail; it does not affect the
//! exit status. Every other failure does.

use std::f64::consts::PI;
use std::path::Path;
use std::time::{Duration, Instant};

use hermite_gutzmer::cli::{halton_box, phase_grid, report_body, run_to, unsmoothed_surrogate, RawConfig};
use hermite_gutzmer::gutzmer::{
    gutzmer_lhs, gutzmer_report, gutzmer_rhs, image_norm, image_norm_constant,
    k_average_difference, k_average_verify, laguerre_heat_integral, orthogonality_1d,
    series_decay_rate, GutzmerConfig, ImageConfig, OrthogonalityVariant, Tolerances,
};
use hermite_gutzmer::phase_space::{beta_sum, pi_norm_sq, pi_norm_sq_closed, MultiIndex, PhasePoint};
use hermite_gutzmer::quadrature::QuadConfig;
use hermite_gutzmer::special_functions::{
    laguerre_polys_upto, mehler_kernel, mehler_series, perron_growth_bound, projection_kernel,
    projection_kernel_diagonal, projection_kernel_direct,
};
use hermite_gutzmer::spectral::{decay_estimate, semigroup, HermiteExpansion};
use hermite_gutzmer::Error;
use num_complex::Complex64;

/// Criteria that cannot pass as stated; see the module comment.
const UNATTAINABLE: &[u32] = &[5];

const SEED: u64 = 20_240_611;

type Check = (u32, &'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut peak = 0.0f64;
    for r in [0.3, 0.6, 0.9] {
        for p in halton_box(25, 4, 2.0) {
            let (xi, eta) = (c(p[0], p[1]), c(p[2], p[3]));
            let closed = mehler_kernel(r, xi, eta).unwrap();
            let series = mehler_series(r, xi, eta).unwrap();
            worst = worst.max((series.value - closed).norm() / closed.norm());
            peak = peak.max(series.peak_ratio);
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-10 && elapsed < Duration::from_secs(5),
        format!(
            "75 (ξ,η,r) cases, max rel err {worst:.2e} (≤ 1e-10), largest term/sum {peak:.1e}, {:.2} s (< 5 s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn box_grid() -> Vec<PhasePoint> {
    phase_grid(25, 1, 1.5).unwrap()
}

fn criterion_2() -> Outcome {
    let cfg = QuadConfig::default();
    let mut worst = 0.0f64;
    for p in box_grid() {
        for a in 0..=6 {
            let alpha = MultiIndex::new(vec![a]);
            let lhs = pi_norm_sq(&alpha, &p, &cfg).unwrap();
            let rhs = pi_norm_sq_closed(&alpha, &p, &cfg).unwrap();
            worst = worst.max(rel(lhs, rhs));
        }
    }
    let mut oracle = 0.0f64;
    for y in [-1.5, -0.4, 0.0, 0.9, 1.5] {
        let p = PhasePoint::from_parts(&[0.0], &[y], &[0.0], &[0.0]).unwrap();
        oracle = oracle.max(rel(pi_norm_sq(&MultiIndex::zero(1), &p, &cfg).unwrap(), (y * y).exp()));
    }
    outcome(
        worst <= 1e-8 && oracle <= 1e-13,
        format!("175 cases, max rel err {worst:.2e} (≤ 1e-8); α=0,w=0 against e^(y²): {oracle:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let cfg = QuadConfig::default();
    let (mut worst, mut tail) = (0.0f64, 0.0f64);
    for p in box_grid() {
        for a in 0..=6 {
            let alpha = MultiIndex::new(vec![a]);
            let sum = beta_sum(&alpha, &p, 1e-12, &cfg).unwrap();
            let rhs = pi_norm_sq_closed(&alpha, &p, &cfg).unwrap() / (2.0 * PI);
            worst = worst.max(rel(sum.value, rhs));
            tail = tail.max(sum.relative_tail);
        }
    }
    outcome(
        worst <= 1e-8 && tail < 1e-12,
        format!("175 cases, max rel err {worst:.2e} (≤ 1e-8), max reported tail {tail:.2e} (< 1e-12)"),
    )
}

fn criterion_4() -> Outcome {
    let mut worst = [0.0f64; 2];
    for (slot, (n, k_top)) in [(1usize, 20usize), (2, 8)].into_iter().enumerate() {
        for p in phase_grid(10, n, 1.0).unwrap() {
            for k in 0..=k_top {
                let closed = projection_kernel(k, n, p.z(), p.w()).unwrap();
                let direct = projection_kernel_direct(k, n, p.z(), p.w()).unwrap();
                worst[slot] = worst[slot].max((closed - direct).norm() / direct.norm());
            }
        }
    }
    outcome(
        worst.iter().all(|&w| w <= 1e-10),
        format!("max rel err n=1 (k ≤ 20): {:.2e}, n=2 (k ≤ 8): {:.2e} (≤ 1e-10)", worst[0], worst[1]),
    )
}

fn load_c_y() -> Vec<(usize, f64, f64)> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/perron_c_y.txt");
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let v: Vec<&str> = l.split_whitespace().collect();
            (v[0].parse().unwrap(), v[1].parse().unwrap(), v[2].parse().unwrap())
        })
        .collect()
}

fn slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn criterion_5() -> Outcome {
    let mut bounded = true;
    let mut worst_slope = (0.0f64, 0usize, 0.0f64);
    let mut corrected_worst = 0.0f64;
    let mut flat = 0;
    let table = load_c_y();
    for &(n, y, c_y) in &table {
        let mut z = vec![c(0.0, 0.0); n];
        z[0] = c(0.0, y);
        let mut logs = Vec::new();
        let mut logs_sqrt2 = Vec::new();
        for k in 1..=200usize {
            let phi = projection_kernel_diagonal(k, &z).unwrap();
            let ratio = phi / perron_growth_bound(k, &[y], n).unwrap();
            bounded &= ratio <= c_y * (1.0 + 1e-9);
            if phi > 0.0 {
                logs.push((k as f64, ratio.ln()));
                let alt = (k as f64).powf(0.75 * (n as f64 - 1.0)) * (2.0 * (2.0 * k as f64).sqrt() * y).exp();
                logs_sqrt2.push((k as f64, (phi / alt).ln()));
            }
        }
        let s = slope(&logs);
        if s.abs() <= 1e-3 {
            flat += 1;
        }
        if s.abs() > worst_slope.0.abs() {
            worst_slope = (s, n, y);
        }
        corrected_worst = corrected_worst.max(slope(&logs_sqrt2).abs());
    }
    outcome(
        bounded && flat == table.len(),
        format!(
            "ratio ≤ frozen C(y): {bounded}; log-ratio slope within ±1e-3 at {flat}/{} (n,|y|) points, worst {:.3e} at n={}, |y|={}; \
             with e^(2√(2k)|y|) the worst |slope| is {corrected_worst:.3e}",
            table.len(),
            worst_slope.0,
            worst_slope.1,
            worst_slope.2
        ),
    )
}

fn random_functions(n: usize) -> Vec<HermiteExpansion> {
    (0..3)
        .map(|i| HermiteExpansion::random(n, 12, 0.3, SEED + i).unwrap())
        .collect()
}

fn criterion_6() -> Outcome {
    let tol = Tolerances::default();
    let start = Instant::now();
    let fs = random_functions(1);
    let cfg = GutzmerConfig {
        seed: SEED,
        ..Default::default()
    };
    let mut worst1 = 0.0f64;
    for p in phase_grid(20, 1, 1.5).unwrap() {
        for f in &fs {
            let r = gutzmer_report(f, &p, &cfg, &tol).unwrap();
            worst1 = worst1.max(r.rel_err);
        }
    }
    let t1 = start.elapsed();

    let start = Instant::now();
    let fs = random_functions(2);
    let (mut worst_sigma, mut worst_se, mut all_pass) = (0.0f64, 0.0f64, true);
    for (i, p) in phase_grid(20, 2, 1.5).unwrap().iter().enumerate() {
        let r = gutzmer_report(&fs[i % 3], p, &cfg, &tol).unwrap();
        let se = r.lhs.stderr.unwrap();
        worst_sigma = worst_sigma.max(r.abs_err / se);
        worst_se = worst_se.max(se / r.rhs);
        all_pass &= r.pass;
    }
    let t2 = start.elapsed();
    outcome(
        worst1 <= 1e-6 && t1 < Duration::from_secs(120) && all_pass && worst_se <= 1e-2 && t2 < Duration::from_secs(600),
        format!(
            "n=1: 60 cases, max rel err {worst1:.2e} (≤ 1e-6), {:.1} s (< 120 s); \
             n=2: 20 points, {} samples, max |lhs−rhs|/stderr {worst_sigma:.2} (≤ 3), max stderr/rhs {worst_se:.2e} (≤ 1e-2), {:.1} s (< 600 s)",
            t1.as_secs_f64(),
            cfg.mc_samples,
            t2.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut worst = 0.0f64;
    for n in [1usize, 2] {
        let cfg = GutzmerConfig {
            mc_samples: 200,
            seed: SEED,
            ..Default::default()
        };
        for f in &random_functions(n) {
            for xu in halton_box(5, 2 * n, 1.5) {
                let p = PhasePoint::real(&xu[..n], &xu[n..]).unwrap();
                let lhs = gutzmer_lhs(f, &p, &cfg).unwrap().value;
                let rhs = gutzmer_rhs(f, &p).unwrap().value;
                let norm = f.norm_sq();
                worst = worst.max((lhs - norm).norm() / norm).max(rel(rhs, norm));
            }
        }
    }
    outcome(worst <= 1e-10, format!("n ∈ {{1,2}}, 30 real points, max rel deviation from ∥f∥² {worst:.2e} (≤ 1e-10)"))
}

fn criterion_8() -> Outcome {
    let cfg = QuadConfig::default();
    let samples = 20_000;
    let pts: Vec<PhasePoint> = halton_box(3, 4, 1.5)
        .into_iter()
        .map(|v| PhasePoint::real(&v[..2], &v[2..]).unwrap())
        .collect();
    let (mut worst, mut all) = (0.0f64, true);
    for p in &pts {
        for alpha in MultiIndex::up_to(2, 3) {
            let v = k_average_verify(&alpha, p, &cfg, samples, SEED).unwrap();
            // α = 0 is radial: zero sampling variance, quadrature floor instead
            let allowed = (3.0 * v.stderr).max(1e-10 * v.rhs.abs());
            all &= v.residual <= allowed;
            worst = worst.max(v.residual / allowed * 3.0);
        }
    }
    let (mut worst_perm, mut perm_ok) = (0.0f64, true);
    for p in &pts {
        for k in 2..=3 {
            let level = MultiIndex::level_set(2, k);
            for pair in level.windows(2) {
                let d = k_average_difference(&pair[0], &pair[1], p, &cfg, samples, SEED).unwrap();
                perm_ok &= d.mean.abs() <= 3.0 * d.stderr;
                worst_perm = worst_perm.max(d.mean.abs() / d.stderr);
            }
        }
    }
    outcome(
        all && perm_ok,
        format!(
            "n=2, |α| ≤ 3, 3 points, {samples} samples: worst residual {worst:.2} stderr (≤ 3); permutation pairs worst {worst_perm:.2} stderr (≤ 3)"
        ),
    )
}

fn criterion_9() -> Outcome {
    let k_max = 400;
    let mut lines = Vec::new();
    let mut ok = true;
    for t0 in [0.3, 0.7] {
        let rho: Vec<Complex64> = (0..=k_max)
            .map(|k| c((-2.0 * (k as f64).sqrt() * t0).exp(), 0.0))
            .collect();
        let f = HermiteExpansion::from_coefficients_1d(&rho).unwrap();
        let fit = decay_estimate(&f).unwrap();
        let recovered = rel(fit.t_hat, t0) <= 0.05;
        let mut finite = true;
        for frac in [0.25, 0.5, 0.9] {
            let r = frac * t0;
            let (y, v) = (r * 0.6, r * 0.8);
            let p = PhasePoint::from_parts(&[0.2], &[y], &[-0.4], &[v]).unwrap();
            let rhs = gutzmer_rhs(&f, &p).unwrap();
            let rate = series_decay_rate(&rhs.terms).unwrap();
            finite &= rhs.value.is_finite() && rate > 0.0;
        }
        ok &= recovered && finite;
        lines.push(format!("t0={t0}: t̂={:.4} ({}), series convergent for r < t0: {finite}", fit.t_hat, if recovered { "within 5%" } else { "off" }));
    }
    outcome(ok, lines.join("; "))
}

fn criterion_10() -> Outcome {
    let cfg = QuadConfig::default();
    let (mut off, mut diag) = (0.0f64, 0.0f64);
    for variant in [OrthogonalityVariant::A, OrthogonalityVariant::B] {
        for eta in [0.5, 1.0, 1.5] {
            let l = laguerre_polys_upto(5, 0.0, c(-2.0 * eta * eta, 0.0)).unwrap();
            let g = match variant {
                OrthogonalityVariant::A => (eta * eta).exp(),
                OrthogonalityVariant::B => 1.0,
            };
            let scale = 2.0 * PI * g * l[0].re;
            for k in 0..=5 {
                for j in 0..=5 {
                    let v = orthogonality_1d(k, j, eta, variant, &cfg).unwrap();
                    if k == j {
                        diag = diag.max((v.value - v.expected).norm() / v.expected);
                    } else {
                        off = off.max(v.value.norm() / scale);
                    }
                }
            }
        }
    }
    let v = orthogonality_1d(0, 0, 1.0, OrthogonalityVariant::A, &cfg).unwrap();
    let e = rel(v.value.re, 2.0 * PI * 1f64.exp());
    outcome(
        off <= 1e-8 && diag <= 1e-6 && e <= 1e-10,
        format!("off-diagonal max {off:.2e} (≤ 1e-8 of diagonal scale), diagonal max rel {diag:.2e} (≤ 1e-6), (0,0,η=1,A) vs 2πe {e:.2e}"),
    )
}

fn criterion_11() -> Outcome {
    let icfg = ImageConfig::default();
    let fs = [
        HermiteExpansion::from_coefficients_1d(&[c(1.0, 0.0)]).unwrap(),
        HermiteExpansion::from_coefficients_1d(&[c(0.0, 0.0), c(1.0, 0.0)]).unwrap(),
        HermiteExpansion::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/h0_plus_half_h3.txt")).unwrap(),
    ];
    let oracle = (2.0 * PI).sqrt();
    let mut ratios = Vec::new();
    for f in &fs {
        for t in [0.1, 0.25, 0.5] {
            let v = image_norm(&semigroup(f, t).unwrap(), t, &icfg).unwrap();
            ratios.push(v.value / f.norm_sq());
        }
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / lo;
    let off = ratios.iter().map(|r| rel(*r, oracle)).fold(0.0, f64::max);
    let constant_ok = rel(image_norm_constant(1), oracle) < 1e-15;
    let diverges = matches!(
        image_norm(&unsmoothed_surrogate(320).unwrap(), 0.5, &icfg),
        Err(Error::Domain(_))
    );
    outcome(
        spread <= 1e-6 && off <= 1e-6 && constant_ok && diverges,
        format!("9 (f,t) cases, ratio spread {spread:.2e} (≤ 1e-6), max deviation from √(2π) {off:.2e}; unsmoothed surrogate raises domain error: {diverges}"),
    )
}

fn criterion_12() -> Outcome {
    let cfg = QuadConfig::default();
    let (mut worst_ratio, mut worst_base) = (0.0f64, 0.0f64);
    for n in [1usize, 2] {
        for t in [0.05, 0.1] {
            let vals: Vec<f64> = (0..=6)
                .map(|k| laguerre_heat_integral(k, n, t, &cfg).unwrap().value)
                .collect();
            for k in 0..6 {
                worst_ratio = worst_ratio.max(rel(vals[k + 1] / vals[k], (4.0 * t).exp()));
            }
            // k = 0: 2^{-n} e^{2nt} from the Gaussian integral
            worst_base = worst_base.max(rel(vals[0], 2f64.powi(-(n as i32)) * (2.0 * n as f64 * t).exp()));
        }
    }
    outcome(
        worst_ratio <= 1e-6 && worst_base <= 1e-10,
        format!("n ∈ {{1,2}}, t ∈ {{0.05,0.1}}, k ≤ 6: ratio vs e^(4t) max rel {worst_ratio:.2e} (≤ 1e-6); k=0 vs 2^(-n)e^(2nt) {worst_base:.2e}"),
    )
}

fn criterion_13() -> Outcome {
    let text = "suite = \"all\"\nn = 2\nk_max = 4\nseed = 99\nmc_samples = 300\ngrid_points = 3\nfunctions = 1\nkaverage_points = 1\n";
    let cfg = RawConfig::from_toml(text, Path::new("determinism.toml"))
        .unwrap()
        .validate()
        .unwrap();
    let mut a = Vec::new();
    let mut b = Vec::new();
    run_to(&cfg, &mut a).unwrap();
    run_to(&cfg, &mut b).unwrap();
    let (a, b) = (String::from_utf8(a).unwrap(), String::from_utf8(b).unwrap());
    let same = report_body(&a) == report_body(&b);
    let lines = report_body(&a).lines().count();
    outcome(same && lines > 10, format!("two runs of suite=all (n=2, seed 99): {lines} body lines, byte-identical: {same}"))
}

fn main() {
    let criteria: [Check; 13] = [
        (1, "Mehler closed form vs series", criterion_1),
        (2, "norm of π(z,w)Φ_α", criterion_2),
        (3, "β-sum of |Φ_{α,β}|²", criterion_3),
        (4, "projection kernel", criterion_4),
        (5, "growth of Φ_k(z,z̄)", criterion_5),
        (6, "Gutzmer formula", criterion_6),
        (7, "real-point reduction", criterion_7),
        (8, "K-average identity", criterion_8),
        (9, "converse: decay from finiteness", criterion_9),
        (10, "orthogonality relations", criterion_10),
        (11, "semigroup image norm", criterion_11),
        (12, "Laguerre–heat integral", criterion_12),
        (13, "report determinism", criterion_13),
    ];
    let mut unexpected = Vec::new();
    for (id, name, check) in criteria {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let note = if !o.pass && UNATTAINABLE.contains(&id) {
            " [unattainable as stated]"
        } else {
            ""
        };
        println!(
            "criterion {id:>2} {verdict}{note} ({name}, {:.1} s): {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass && !UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
