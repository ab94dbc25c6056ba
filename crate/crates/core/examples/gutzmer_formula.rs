//! Both sides of Gutzmer's identity for random Hermite expansions: exact
//! quadrature on the circle for n = 1, Haar Monte Carlo for n = 2.

use std::time::Instant;

use hermite_gutzmer::gutzmer::{gutzmer_report, GutzmerConfig, Tolerances};
use hermite_gutzmer::phase_space::PhasePoint;
use hermite_gutzmer::spectral::HermiteExpansion;

fn main() -> hermite_gutzmer::Result<()> {
    let tol = Tolerances::default();

    let f = HermiteExpansion::random(1, 12, 0.3, 1)?;
    let p = PhasePoint::from_parts(&[0.3], &[1.1], &[-0.4], &[0.7])?;
    let r = gutzmer_report(&f, &p, &GutzmerConfig::default(), &tol)?;
    println!("n=1: lhs {:.15e}  rhs {:.15e}  rel err {:.1e}", r.lhs.value.re, r.rhs, r.rel_err);

    let f = HermiteExpansion::random(2, 8, 0.3, 2)?;
    let p = PhasePoint::from_parts(&[0.3, -0.6], &[0.5, 0.8], &[-0.4, 0.2], &[0.7, -0.3])?;
    let cfg = GutzmerConfig {
        mc_samples: 5_000,
        seed: 42,
        ..Default::default()
    };
    let start = Instant::now();
    let r = gutzmer_report(&f, &p, &cfg, &tol)?;
    let se = r.lhs.stderr.unwrap_or(0.0);
    println!(
        "n=2: lhs {:.6e} ± {se:.1e}  rhs {:.6e}  deviation {:.2}σ  ({} samples, {:.1} s)",
        r.lhs.value.re,
        r.rhs,
        r.abs_err / se,
        cfg.mc_samples,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
