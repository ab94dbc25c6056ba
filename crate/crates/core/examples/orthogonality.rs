//! Gram matrices of the two one-dimensional orthogonality relations.

use hermite_gutzmer::gutzmer::{orthogonality_1d, OrthogonalityVariant};
use hermite_gutzmer::quadrature::QuadConfig;

fn main() -> hermite_gutzmer::Result<()> {
    let cfg = QuadConfig::default();
    for variant in [OrthogonalityVariant::A, OrthogonalityVariant::B] {
        println!("variant {variant:?}, η = 1");
        for k in 0..=4 {
            let row: Vec<String> = (0..=4)
                .map(|j| orthogonality_1d(k, j, 1.0, variant, &cfg).map(|v| format!("{:10.3e}", v.value.norm())))
                .collect::<Result<_, _>>()?;
            println!("  {}", row.join(" "));
        }
    }
    Ok(())
}
