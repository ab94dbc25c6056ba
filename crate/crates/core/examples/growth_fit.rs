//! Growth of the diagonal projection kernel `Φ_k(z, z̄)` off the real axis.
//!
//! Prints, for each `|y|` on a grid, the largest ratio of `Φ_k(iy, -iy)` to the
//! model `k^{3(n-1)/4} e^{2√k|y|}` over `1 <= k <= 200`, together with the
//! least-squares slope of the log-ratio against `k`. The same sweep against
//! `e^{2√(2k)|y|}` shows which exponent actually matches the data.
//!
//! With `--fixture` the output is the frozen `C(y)` table shipped in
//! `fixtures/perron_c_y.txt`.
//!
//!     cargo run --release --example growth_fit
//!     cargo run --release --example growth_fit -- --fixture > fixtures/perron_c_y.txt

use hermite_gutzmer::special_functions::{perron_growth_bound, projection_kernel_diagonal};
use num_complex::Complex64;

const K_MAX: usize = 200;

fn log_ratios(n: usize, y: f64, sqrt2: bool) -> Vec<(f64, f64)> {
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    z[0] = Complex64::new(0.0, y);
    let ynorm = [y];
    (1..=K_MAX)
        .map(|k| {
            let phi = projection_kernel_diagonal(k, &z).expect("within caps");
            let model = if sqrt2 {
                (k as f64).powf(0.75 * (n as f64 - 1.0)) * (2.0 * (2.0 * k as f64).sqrt() * y).exp()
            } else {
                perron_growth_bound(k, &ynorm, n).expect("k >= 1")
            };
            (k as f64, (phi / model).ln())
        })
        // odd-k kernels vanish at the origin; a zero ratio is trivially bounded
        .filter(|p| p.1.is_finite())
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

fn main() {
    let fixture = std::env::args().any(|a| a == "--fixture");
    let ys: Vec<f64> = (0..=12).map(|i| 0.25 * i as f64).collect();
    if fixture {
        println!("# C(y) = max over 1 <= k <= {K_MAX} of Phi_k(z, conj z) / (k^(3(n-1)/4) e^(2 sqrt(k) |y|))");
        println!("# with z = (iy, 0, ..., 0); generated by `cargo run --release --example growth_fit -- --fixture`");
        println!("# columns: n y C(y)");
        for n in [1, 2] {
            for &y in &ys {
                let c = log_ratios(n, y, false)
                    .iter()
                    .map(|p| p.1)
                    .fold(f64::NEG_INFINITY, f64::max)
                    .exp();
                println!("{n} {y} {c:e}");
            }
        }
        return;
    }
    println!("   n     y      C(y)     slope e^(2√k|y|)   slope e^(2√(2k)|y|)");
    for n in [1, 2] {
        for &y in &ys {
            let plain = log_ratios(n, y, false);
            let c = plain.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).exp();
            let corrected = log_ratios(n, y, true);
            println!(
                "{n:>4} {y:>5.2} {c:>10.3e} {:>18.3e} {:>21.3e}",
                slope(&plain),
                slope(&corrected)
            );
        }
    }
}
