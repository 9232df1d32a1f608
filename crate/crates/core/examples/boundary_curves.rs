//! Schmidt-number boundaries in the moment plane and exact classification.
//!
//! $ cargo run --example boundary_curves > curves.csv

use std::io::stdout;

use dimcert::boundary::{
    classify_point, curve_table, lower_boundary, numeric_min_oracle, two_norm_line,
    write_curve_csv, ClassifyMode,
};
use dimcert::correlation::CorrelationData;
use dimcert::moments::exact_moments;
use dimcert::qmat::{max_entangled, rho_w};

fn main() -> dimcert::Result<()> {
    for (d, r, s2) in [(3, 3, 2.0), (3, 2, 1.75), (3, 2, 2.0), (4, 3, 1.5)] {
        eprintln!(
            "d={d} r={r} S2={s2}: curve {:.9}, KKT oracle {:.9}, two-norm line at {:.4}",
            lower_boundary(d, r, s2)?,
            numeric_min_oracle(d, r, s2)?,
            two_norm_line(d, r)?
        );
    }

    let m = exact_moments(&CorrelationData::canonical(&rho_w())?)?;
    let cert = classify_point(m.s2, m.s4, 4, &ClassifyMode::Exact)?;
    eprintln!(
        "rho_W: (S2, S4) = ({:.6}, {:.6}) -> Schmidt number >= {}",
        m.s2, m.s4, cert.certified_lower_bound
    );

    let psi = exact_moments(&CorrelationData::canonical(
        &max_entangled(2, 3)?.to_density(),
    )?)?;
    eprintln!(
        "|Psi+^2> in d=3: ({:.4}, {:.6}) sits on the r=2 curve",
        psi.s2, psi.s4
    );

    write_curve_csv(stdout().lock(), &curve_table(3, &[1, 2, 3], 101)?)
}
