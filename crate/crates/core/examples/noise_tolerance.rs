//! White-noise tolerance of the isotropic family, exact and from data.
//!
//! $ cargo run --release --example noise_tolerance

use dimcert::randsim::{noise_tolerance, SamplingPath};

fn main() -> dimcert::Result<()> {
    for bound in [2, 3] {
        let t = noise_tolerance(3, bound, 10_000, 2.0, 5, SamplingPath::HaarObservable)?;
        println!(
            "bound {bound}: analytic p* = {:.4}, exact moments {:.4}, N = 10^4 at 2σ {}",
            t.analytic,
            t.exact_moments,
            t.finite.map_or("none".to_string(), |p| format!("{p:.4}"))
        );
    }
    Ok(())
}
