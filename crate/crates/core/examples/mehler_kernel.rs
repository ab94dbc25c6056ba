//! Mehler's closed form against the generating series, summed in extended
//! precision because individual terms dwarf the total once `r` nears 1.

use hermite_gutzmer::special_functions::{mehler_kernel, mehler_series};
use num_complex::Complex64;

fn main() -> hermite_gutzmer::Result<()> {
    let cases = [
        (0.5, Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)),
        (0.9, Complex64::new(0.7, 1.9), Complex64::new(-1.3, -1.8)),
        (0.3, Complex64::new(1.5, 0.2), Complex64::new(0.4, 0.0)),
    ];
    for (r, xi, eta) in cases {
        let closed = mehler_kernel(r, xi, eta)?;
        let s = mehler_series(r, xi, eta)?;
        println!(
            "r={r} ξ={xi} η={eta}\n  closed {closed:.15e}\n  series {:.15e}  ({} terms, {} bits, peak term/sum {:.1e})\n  rel diff {:.2e}",
            s.value,
            s.terms,
            s.precision,
            s.peak_ratio,
            (s.value - closed).norm() / closed.norm()
        );
    }
    Ok(())
}
