//! Write a state to JSON, read it back and certify it.
//!
//! $ cargo run --example state_file

use dimcert::criteria::compare_all;
use dimcert::qmat::{read_state, rho_w, write_state, StateFile};

fn main() -> dimcert::Result<()> {
    let path = std::env::temp_dir().join("dimcert_rho_w.json");
    write_state(&path, &rho_w())?;
    let rho = read_state(&path)?;
    println!(
        "read {} ({}x{}), purity {:.6}",
        path.display(),
        rho.dim_a(),
        rho.dim_b(),
        rho.purity()
    );
    println!("best certified bound {}", compare_all(&rho)?.max_bound);

    let json =
        r#"{"dim_a": 1, "dim_b": 2, "re": [[0.5, 0.0], [0.0, 0.6]], "im": [[0, 0], [0, 0]]}"#;
    let bad: StateFile =
        serde_json::from_str(json).map_err(|e| dimcert::Error::Parse(e.to_string()))?;
    match bad.into_density() {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
