//! The weighted norm characterising the image of the Hermite semigroup, and
//! the Laguerre–heat integral behind it.

use hermite_gutzmer::cli::unsmoothed_surrogate;
use hermite_gutzmer::gutzmer::{image_norm, image_norm_constant, laguerre_heat_integral, ImageConfig};
use hermite_gutzmer::quadrature::QuadConfig;
use hermite_gutzmer::spectral::{semigroup, HermiteExpansion};
use num_complex::Complex64;

fn main() -> hermite_gutzmer::Result<()> {
    let icfg = ImageConfig::default();
    let f = HermiteExpansion::from_coefficients_1d(&[
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, -0.4),
        Complex64::new(0.5, 0.0),
    ])?;
    println!("expected ratio c_1 = {:.12}", image_norm_constant(1));
    for t in [0.1, 0.25, 0.5] {
        let v = image_norm(&semigroup(&f, t)?, t, &icfg)?;
        println!("t={t}: ∫∫|F|²U_t / ∥f∥² = {:.12}", v.value / f.norm_sq());
    }
    match image_norm(&unsmoothed_surrogate(320)?, 0.5, &icfg) {
        Ok(v) => println!("unsmoothed data: {:.3e} (unexpected)", v.value),
        Err(e) => println!("unsmoothed data: {e}"),
    }

    let cfg = QuadConfig::default();
    for t in [0.05, 0.1] {
        let v: Vec<f64> = (0..=4)
            .map(|k| laguerre_heat_integral(k, 1, t, &cfg).map(|h| h.value))
            .collect::<Result<_, _>>()?;
        let ratios: Vec<String> = v.windows(2).map(|w| format!("{:.10}", w[1] / w[0])).collect();
        println!("t={t}: successive ratios {} (e^4t = {:.10})", ratios.join(" "), (4.0 * t).exp());
    }
    Ok(())
}
