//! Averaging `Φ_{α,α}` over the unitary group recovers the Laguerre function
//! of the level, for every α of that level.

use hermite_gutzmer::gutzmer::{k_average_difference, k_average_verify};
use hermite_gutzmer::phase_space::{MultiIndex, PhasePoint};
use hermite_gutzmer::quadrature::QuadConfig;

fn main() -> hermite_gutzmer::Result<()> {
    let cfg = QuadConfig::default();
    let p = PhasePoint::real(&[0.6, -0.3], &[0.2, 0.9])?;
    for alpha in MultiIndex::level_set(2, 2) {
        let v = k_average_verify(&alpha, &p, &cfg, 4_000, 7)?;
        println!(
            "α={alpha}: average {:.6e} ± {:.1e}, Laguerre side {:.6e}",
            v.lhs, v.stderr, v.rhs
        );
    }
    let d = k_average_difference(
        &MultiIndex::new(vec![2, 0]),
        &MultiIndex::new(vec![0, 2]),
        &p,
        &cfg,
        4_000,
        7,
    )?;
    println!("paired difference (2,0) − (0,2): {:.2e} ± {:.1e}", d.mean, d.stderr);
    Ok(())
}
