//! Build the su(d) basis, expand a state in it and reconstruct it.
//!
//! $ cargo run --example gell_mann_basis

use dimcert::qmat::{family_state, gell_mann_basis, partial_trace, Family, Party};

fn main() -> dimcert::Result<()> {
    for d in 2..=5 {
        let basis = gell_mann_basis(d)?;
        let mut worst: f64 = 0.0;
        for (i, gi) in basis.generators().iter().enumerate() {
            for (j, gj) in basis.generators().iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gi.hs_inner(gj).re - want).abs());
            }
        }
        println!(
            "d = {d}: {} generators, max |tr(g_i g_j) - δ_ij| = {worst:.1e}",
            basis.len()
        );
    }

    let rho = family_state(Family::A, 0.5)?;
    let rho_a = partial_trace(&rho, Party::A);
    let basis = gell_mann_basis(3)?;
    let coeffs = basis.coefficients(&rho_a);
    let back = basis.reconstruct(rho_a.trace().re, &coeffs);
    println!("marginal of family A at p = 0.5: su coefficients {coeffs:.3?}");
    println!("reconstruction error {:.1e}", back.max_abs_diff(&rho_a));
    Ok(())
}
