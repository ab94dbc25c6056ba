//! Normalized Hermite functions at complex arguments, and the growth of
//! `|h_k(x+iy)|` along a vertical line.

use hermite_gutzmer::special_functions::{hermite_fn_1d, hermite_fns_upto};
use num_complex::Complex64;

fn main() -> hermite_gutzmer::Result<()> {
    let mut row = Vec::new();
    hermite_fns_upto(6, Complex64::new(0.5, 0.0), &mut row)?;
    for (k, h) in row.iter().enumerate() {
        println!("h_{k}(0.5) = {:+.12}", h.re);
    }
    println!();
    for y in [0.0, 0.5, 1.0, 2.0] {
        let h = hermite_fn_1d(20, Complex64::new(0.3, y))?;
        println!("|h_20(0.3 + {y}i)| = {:.6e}", h.norm());
    }
    Ok(())
}
