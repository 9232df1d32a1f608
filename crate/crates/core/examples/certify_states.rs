//! Run every Schmidt-number criterion on a few known states.
//!
//! $ cargo run --example certify_states

use dimcert::correlation::CorrelationData;
use dimcert::criteria::compare_all;
use dimcert::qmat::{isotropic, max_entangled, rho_w, DensityMatrix};

fn show(name: &str, rho: &DensityMatrix) -> dimcert::Result<()> {
    let report = compare_all(rho)?;
    let corr = CorrelationData::canonical(rho)?;
    println!(
        "{name} ({}x{}), tr|X^su| = {:.4}, Σξ = {:.4}",
        rho.dim_a(),
        rho.dim_b(),
        corr.su_trace_norm(),
        corr.xi.iter().sum::<f64>()
    );
    for c in &report.certificates {
        let note = c.note.as_deref().unwrap_or("");
        println!(
            "  {:<14} bound {}  margin {:+.4}  {note}",
            format!("{:?}", c.criterion_id),
            c.certified_lower_bound,
            c.margin
        );
    }
    println!(
        "  best bound {}, best fidelity bound {}",
        report.max_bound, report.max_fidelity_bound
    );
    Ok(())
}

fn main() -> dimcert::Result<()> {
    show("rho_W", &rho_w())?;
    show("|Psi+^3>", &max_entangled(3, 3)?.to_density())?;
    show("isotropic(3, 0.3)", &isotropic(3, 0.3)?)?;
    show("isotropic(3, 0.9)", &isotropic(3, 0.9)?)?;
    Ok(())
}
