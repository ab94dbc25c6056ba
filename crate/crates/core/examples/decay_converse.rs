//! Coefficients decaying like `e^{-2√k t₀}`: the fitted rate, and where the
//! Gutzmer series stops converging as the imaginary radius grows.

use hermite_gutzmer::gutzmer::{gutzmer_rhs, series_decay_rate};
use hermite_gutzmer::phase_space::PhasePoint;
use hermite_gutzmer::spectral::{decay_estimate, HermiteExpansion};
use num_complex::Complex64;

fn main() -> hermite_gutzmer::Result<()> {
    let t0 = 0.5;
    let coeffs: Vec<Complex64> = (0..=400)
        .map(|k| Complex64::new((-2.0 * (k as f64).sqrt() * t0).exp(), 0.0))
        .collect();
    let f = HermiteExpansion::from_coefficients_1d(&coeffs)?;
    let fit = decay_estimate(&f)?;
    println!("t0 = {t0}, fitted t̂ = {:.6} (rms residual {:.1e})", fit.t_hat, fit.residual_rms);
    println!("  r      series value   term decay rate");
    for r in [0.2, 0.4, 0.6, 0.7, 0.8, 1.0] {
        let p = PhasePoint::from_parts(&[0.0], &[r], &[0.0], &[0.0])?;
        let rhs = gutzmer_rhs(&f, &p)?;
        let rate = series_decay_rate(&rhs.terms)?;
        println!("  {r:.1}    {:12.6e}   {rate:+.4}", rhs.value);
    }
    println!("terms decay while r < √2·t0 = {:.4}", 2f64.sqrt() * t0);
    Ok(())
}
