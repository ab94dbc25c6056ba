//! Special Hermite functions: `∥π(z,w)Φ_α∥²`, the β-sum of `|Φ_{α,β}|²`, and
//! the level projection kernel by two routes.

use std::f64::consts::PI;

use hermite_gutzmer::phase_space::{beta_sum, pi_norm_sq, pi_norm_sq_closed, MultiIndex, PhasePoint};
use hermite_gutzmer::quadrature::QuadConfig;
use hermite_gutzmer::special_functions::{projection_kernel, projection_kernel_direct};

fn main() -> hermite_gutzmer::Result<()> {
    let cfg = QuadConfig::default();
    let p = PhasePoint::from_parts(&[0.4, -0.2], &[0.9, 0.3], &[-0.5, 0.1], &[0.6, -1.0])?;
    let alpha = MultiIndex::new(vec![2, 1]);

    let q = pi_norm_sq(&alpha, &p, &cfg)?;
    let closed = pi_norm_sq_closed(&alpha, &p, &cfg)?;
    println!("∥π(z,w)Φ_α∥²: quadrature {q:.14e}, closed form {closed:.14e}");

    let s = beta_sum(&alpha, &p, 1e-12, &cfg)?;
    println!(
        "Σ_β |Φ_αβ|² = {:.14e} (β_j ≤ {}, tail {:.1e}); closed/(2π)² = {:.14e}",
        s.value,
        s.b_max,
        s.relative_tail,
        closed / (2.0 * PI).powi(2)
    );

    for k in [0, 3, 8] {
        let a = projection_kernel(k, 2, p.z(), p.w())?;
        let b = projection_kernel_direct(k, 2, p.z(), p.w())?;
        println!("Φ_{k}(z,w): Laguerre {a:.12e}, sum over |α|={k} {b:.12e}");
    }
    Ok(())
}
