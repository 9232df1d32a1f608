//! Estimate S2 and S4 from simulated randomized measurements and compare
//! the spread with the predicted variance.
//!
//! $ cargo run --release --example finite_statistics

use dimcert::qmat::max_entangled;
use dimcert::randsim::{
    detect_with_confidence, estimate_moments, predicted_variance, SamplingPath,
};

fn main() -> dimcert::Result<()> {
    let rho = max_entangled(3, 3)?.to_density();
    println!("|Psi+^3>, exact (S2, S4) = (2, 5/3)");
    for n in [1_000, 10_000, 100_000] {
        let est = estimate_moments(&rho, n, 1, SamplingPath::HaarObservable)?;
        let pred = predicted_variance(&rho, SamplingPath::HaarObservable, n, 200_000, 1)?;
        println!(
            "N = {n:>6}: S2 = {:.4} ± {:.4} (3σ predicted {:.4}), S4 = {:.4} ± {:.4} (3σ predicted {:.4})",
            est.s2,
            3.0 * est.std_s2,
            3.0 * pred.std_s2(),
            est.s4,
            3.0 * est.std_s4,
            3.0 * pred.std_s4()
        );
    }

    let bloch = estimate_moments(&rho, 100_000, 2, SamplingPath::BlochSphere)?;
    println!(
        "Bloch-sphere sampling, N = 100000: S2 = {:.4} ± {:.4}",
        bloch.s2,
        3.0 * bloch.std_s2
    );

    let det = detect_with_confidence(&rho, 1_000, 3.0, 7, SamplingPath::HaarObservable)?;
    println!(
        "N = 1000 at 3σ: certified Schmidt number >= {} ({})",
        det.certificate.certified_lower_bound,
        det.certificate.note.unwrap_or_default()
    );
    Ok(())
}
