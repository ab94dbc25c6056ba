//! Reading, writing and inspecting coefficient tables.

use std::path::Path;

use hermite_gutzmer::spectral::{project, HermiteExpansion};

fn main() -> hermite_gutzmer::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/h0_plus_half_h3.txt");
    let f = HermiteExpansion::load(&path)?;
    println!("{}: n={} k_max={} ∥f∥²={}", path.display(), f.dim(), f.k_max(), f.norm_sq());
    println!("level norms: {:?}", f.level_norms());
    let (p3, rho) = project(&f, 3)?;
    println!("P_3 f has norm {rho}:\n{}", p3.to_table());

    let g = HermiteExpansion::random(2, 3, 0.5, 11)?;
    let text = g.to_table();
    print!("random n=2 table:\n{text}");
    let back = HermiteExpansion::from_table(&text, Path::new("<memory>"))?;
    println!("round trip exact: {}", back == g);

    match HermiteExpansion::from_table("hermite-expansion 1\nn 1\nk_max 2\n0 1.0\n", Path::new("<bad>")) {
        Ok(_) => println!("malformed table accepted (unexpected)"),
        Err(e) => println!("malformed table: {e}"),
    }
    Ok(())
}
