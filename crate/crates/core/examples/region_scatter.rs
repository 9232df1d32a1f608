//! Exact moments of random d = 3 states against the outer region boundary.
//!
//! $ cargo run --release --example region_scatter > scatter.csv

use std::io::stdout;

use dimcert::boundary::{outer_boundary_d3, region_scatter, write_scatter_csv};

fn main() -> dimcert::Result<()> {
    let points = region_scatter(3, 5_000, 42)?;
    let mut outside = 0;
    let mut min_gap = f64::INFINITY;
    for p in &points {
        let o = outer_boundary_d3(p.s2)?;
        if p.s4 > o.upper + 1e-9 || p.s4 < o.lower - 1e-9 {
            outside += 1;
        }
        min_gap = min_gap.min(o.upper - p.s4).min(p.s4 - o.lower);
    }
    eprintln!(
        "{} points, {outside} outside the A/B/C and D curves, closest approach {min_gap:.2e}",
        points.len()
    );
    write_scatter_csv(stdout().lock(), &points)
}
