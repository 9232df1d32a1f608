//! Schmidt-number regions in the `(S2, S4)` plane.
//!
//! A state of Schmidt number at most `r` has su singular values obeying
//! `Σ ε_i <= r - 1/d`. Minimizing `S4` at fixed `S2` under that constraint
//! gives the lower boundary curves evaluated here; a moment pair strictly
//! below the `r` curve, or beyond its domain `S2 <= B_r²`, certifies
//! Schmidt number at least `r + 1`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlation::correlation_data;
use crate::criteria::{CriterionId, RankTest, SchmidtCertificate, VIOLATION_TOL};
use crate::error::{Error, Result};
use crate::moments::exact_moments;
use crate::qmat::{
    gell_mann_basis, random_mixed_with, random_pure_with, random_pure_with_rank, Family,
};
use crate::rng::{stream, Domain};

fn check_dr(d: usize, r: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!(
            "boundary curves need d >= 2, got {d}"
        )));
    }
    if r < 1 || r > d {
        return Err(Error::InvalidRank { rank: r, dim: d });
    }
    Ok(())
}

/// Relative rounding allowance at the `B_r²` cap; states on the cap, such
/// as pure product states for `r = 1`, land there only up to rounding.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// `B_r = (d r - 1)/(d - 1)`, the normalized bound on `Σ ε_i`.
pub fn b_r(d: usize, r: usize) -> f64 {
    let (d, r) = (d as f64, r as f64);
    (d * r - 1.0) / (d - 1.0)
}

/// Evaluate piece `n` of the `(d, r)` curve at `s2` without domain checks.
/// `n = 0` is the all-equal piece.
pub fn boundary_piece(d: usize, r: usize, n: usize, s2: f64) -> f64 {
    let df = d as f64;
    let b = b_r(d, r);
    if n == 0 {
        return (df * df + 1.0) / (3.0 * (df * df - 1.0)) * s2 * s2;
    }
    let nf = n as f64;
    let g = (nf * (nf + 1.0) * s2 - nf * b * b).max(0.0);
    let sg = g.sqrt();
    2.0 / (3.0 * (nf + 1.0).powi(4)) * ((sg - b).powi(4) + (sg + nf * b).powi(4) / nf.powi(3))
        + s2 * s2 / 3.0
}

/// Index of the piece covering `s2` (0 for the all-equal piece).
pub fn piece_index(d: usize, r: usize, s2: f64) -> usize {
    let b2 = b_r(d, r).powi(2);
    let top = d * d - 2;
    if s2 <= b2 / (top + 1) as f64 {
        return 0;
    }
    ((b2 / s2).floor() as usize).clamp(1, top)
}

/// Minimal `S4` over Schmidt-number-`r` states with the given `S2`.
pub fn lower_boundary(d: usize, r: usize, s2: f64) -> Result<f64> {
    check_dr(d, r)?;
    let b2 = b_r(d, r).powi(2);
    if !(s2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("s2 = {s2} must be >= 0")));
    }
    if s2 > b2 * (1.0 + DOMAIN_SLACK) {
        return Err(Error::OutOfDomain(format!(
            "s2 = {s2} exceeds B_r² = {b2} for d = {d}, r = {r}: no Schmidt-number-{r} state reaches it"
        )));
    }
    let s2 = s2.min(b2);
    Ok(boundary_piece(d, r, piece_index(d, r, s2), s2))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePiece {
    pub s2_lo: f64,
    pub s2_hi: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub d: usize,
    pub r: usize,
    pub b_r: f64,
    /// Ordered by increasing `s2`, tiling `[0, B_r²]`.
    pub pieces: Vec<CurvePiece>,
}

impl BoundaryCurve {
    pub fn new(d: usize, r: usize) -> Result<Self> {
        check_dr(d, r)?;
        let b = b_r(d, r);
        let b2 = b * b;
        let top = d * d - 2;
        let mut pieces = vec![CurvePiece {
            s2_lo: 0.0,
            s2_hi: b2 / (top + 1) as f64,
            n: 0,
        }];
        for n in (1..=top).rev() {
            pieces.push(CurvePiece {
                s2_lo: b2 / (n + 1) as f64,
                s2_hi: b2 / n as f64,
                n,
            });
        }
        Ok(Self {
            d,
            r,
            b_r: b,
            pieces,
        })
    }

    pub fn s2_max(&self) -> f64 {
        self.b_r * self.b_r
    }

    pub fn eval(&self, s2: f64) -> Result<f64> {
        lower_boundary(self.d, self.r, s2)
    }
}

/// Brute-force minimum over the candidate stationary structures: `n_s`
/// equal small values, `n_l` equal large values and zeros elsewhere with
/// the sum constraint active, or `n` equal values with it inactive.
pub fn numeric_min_oracle(d: usize, r: usize, s2: f64) -> Result<f64> {
    check_dr(d, r)?;
    if !(s2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("s2 = {s2} must be >= 0")));
    }
    let df = d as f64;
    let k = df / (df - 1.0);
    let a = r as f64 - 1.0 / df;
    let b = s2 / (k * k);
    if b > a * a * (1.0 + DOMAIN_SLACK) {
        return Err(Error::OutOfDomain(format!(
            "s2 = {s2} infeasible for d = {d}, r = {r}"
        )));
    }
    let dim = d * d - 1;
    let to_s4 = |sum4: f64| 2.0 * k.powi(4) / 3.0 * sum4 + s2 * s2 / 3.0;
    if b == 0.0 {
        return Ok(0.0);
    }

    let mut best = f64::INFINITY;
    for n in 1..=dim {
        let nf = n as f64;
        if nf * b <= a * a * (1.0 + 1e-12) {
            best = best.min(b * b / nf);
        }
    }
    for ns in 1..=dim {
        for nl in 0..=(dim - ns) {
            let q = (ns + nl) as f64;
            let disc = q * b - a * a;
            if disc < -1e-12 * a * a {
                continue;
            }
            let (s, l) = if nl == 0 {
                if disc.abs() > 1e-12 * a * a {
                    continue;
                }
                (a / q, a / q)
            } else {
                let gap = (disc.max(0.0) / (ns as f64 * nl as f64)).sqrt();
                let m = a / q;
                (m - nl as f64 / q * gap, m + ns as f64 / q * gap)
            };
            if s < -1e-12 {
                continue;
            }
            let s = s.max(0.0);
            best = best.min(ns as f64 * s.powi(4) + nl as f64 * l.powi(4));
        }
    }
    Ok(to_s4(best))
}

/// Vertical line in the moment plane equivalent to the two-norm criterion:
/// Schmidt number `r` forces `S2` to at most this value.
pub fn two_norm_line(d: usize, r: usize) -> Result<f64> {
    check_dr(d, r)?;
    let (df, rf) = (d as f64, r as f64);
    Ok(df * df / (df - 1.0).powi(2) * (1.0 + (rf - 2.0 * df) / (df * df * rf)))
}

/// How uncertainty in an estimated moment pair enters classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ClassifyMode {
    /// The point itself.
    Exact,
    /// Every point of `[s2 ± kσ2] x [s4 ± kσ4]` must violate.
    Rectangle { std_s2: f64, std_s4: f64, k: f64 },
    /// The Mahalanobis distance, under `cov` of `(ŝ2, ŝ4)`, from the point
    /// to the allowed region must exceed `k`.
    Ellipse { cov: [[f64; 2]; 2], k: f64 },
}

impl ClassifyMode {
    fn label(&self) -> String {
        match self {
            ClassifyMode::Exact => "exact moment pair".into(),
            ClassifyMode::Rectangle { k, .. } => {
                format!("rectangle of {k} standard deviations per axis")
            }
            ClassifyMode::Ellipse { k, .. } => format!("{k}-sigma confidence ellipse"),
        }
    }
}

fn exact_test(d: usize, r: usize, s2: f64, s4: f64) -> RankTest {
    let b2 = b_r(d, r).powi(2);
    if s2 > b2 {
        RankTest {
            r,
            lhs: s2,
            rhs: b2,
            violated: s2 > b2 + VIOLATION_TOL,
        }
    } else {
        let f = boundary_piece(d, r, piece_index(d, r, s2.max(0.0)), s2.max(0.0));
        RankTest {
            r,
            lhs: f,
            rhs: s4,
            violated: f > s4 + VIOLATION_TOL,
        }
    }
}

fn rectangle_test(d: usize, r: usize, s2: f64, s4: f64, h2: f64, h4: f64) -> RankTest {
    let b2 = b_r(d, r).powi(2);
    let lo = s2 - h2;
    let hi4 = s4 + h4;
    if lo > b2 + VIOLATION_TOL {
        return RankTest {
            r,
            lhs: lo,
            rhs: b2,
            violated: true,
        };
    }
    // The curve is non-decreasing, so (lo, hi4) is the hardest corner.
    let x = lo.clamp(0.0, b2);
    let f = boundary_piece(d, r, piece_index(d, r, x), x);
    RankTest {
        r,
        lhs: f,
        rhs: hi4,
        violated: lo >= 0.0 && f > hi4 + VIOLATION_TOL,
    }
}

struct Metric {
    p11: f64,
    p12: f64,
    p22: f64,
}

impl Metric {
    fn dist2(&self, dx: f64, dy: f64) -> f64 {
        self.p11 * dx * dx + 2.0 * self.p12 * dx * dy + self.p22 * dy * dy
    }
}

fn golden_min(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.min(f2)
}

/// Mahalanobis distance from an exactly violating point to the rank-`r`
/// allowed region `{x <= B², x < 0 or y >= f(x)}`.
fn ellipse_distance(d: usize, r: usize, s2: f64, s4: f64, m: &Metric, sd2: f64) -> f64 {
    let b2 = b_r(d, r).powi(2);
    let f = |x: f64| boundary_piece(d, r, piece_index(d, r, x), x);
    let mut best2 = f64::INFINITY;

    // Half-plane x < 0.
    if sd2 > 0.0 {
        best2 = best2.min((s2.max(0.0) / sd2).powi(2));
    }

    // Vertical ray x = B², y >= f(B²).
    let dx = b2 - s2;
    let dy = (-m.p12 * dx / m.p22).max(f(b2) - s4);
    best2 = best2.min(m.dist2(dx, dy));

    // The curve itself, on [0, min(B², ...)].
    let curve = |x: f64| m.dist2(x - s2, f(x) - s4);
    let grid = 4000;
    let mut arg = 0;
    let mut val = f64::INFINITY;
    for i in 0..=grid {
        let v = curve(b2 * i as f64 / grid as f64);
        if v < val {
            val = v;
            arg = i;
        }
    }
    let h = b2 / grid as f64;
    let lo = (arg as f64 - 1.0).max(0.0) * h;
    let hi = ((arg + 1) as f64 * h).min(b2);
    best2 = best2.min(val).min(golden_min(lo, hi, curve));
    best2.sqrt()
}

fn ellipse_test(d: usize, r: usize, s2: f64, s4: f64, cov: &[[f64; 2]; 2], k: f64) -> RankTest {
    let center = exact_test(d, r, s2, s4);
    let (c11, c12, c22) = (cov[0][0], cov[0][1], cov[1][1]);
    if c11 == 0.0 && c12 == 0.0 && c22 == 0.0 {
        return center;
    }
    if !center.violated {
        return RankTest {
            r,
            lhs: 0.0,
            rhs: k,
            violated: false,
        };
    }
    let det = c11 * c22 - c12 * c12;
    if det <= 1e-14 * c11 * c22 || c11 <= 0.0 || c22 <= 0.0 {
        // Degenerate: the ellipse collapses to a segment along the principal axis.
        let tr = c11 + c22;
        let lam = 0.5 * (tr + ((c11 - c22).powi(2) + 4.0 * c12 * c12).sqrt());
        let (vx, vy) = if c12.abs() > 0.0 {
            (lam - c22, c12)
        } else if c11 >= c22 {
            (1.0, 0.0)
        } else {
            (0.0, 1.0)
        };
        let norm = (vx * vx + vy * vy).sqrt();
        let half = k * lam.max(0.0).sqrt();
        let (ux, uy) = (vx / norm * half, vy / norm * half);
        let all = (0..=400).all(|i| {
            let t = -1.0 + 2.0 * i as f64 / 400.0;
            exact_test(d, r, s2 + t * ux, s4 + t * uy).violated
        });
        return RankTest {
            r,
            lhs: if all { k + 1.0 } else { 0.0 },
            rhs: k,
            violated: all,
        };
    }
    let metric = Metric {
        p11: c22 / det,
        p12: -c12 / det,
        p22: c11 / det,
    };
    let dist = ellipse_distance(d, r, s2, s4, &metric, c11.sqrt());
    RankTest {
        r,
        lhs: dist,
        rhs: k,
        violated: dist > k,
    }
}

/// Schmidt-number certificate for a moment pair in local dimension `d`.
pub fn classify_point(
    s2: f64,
    s4: f64,
    d: usize,
    mode: &ClassifyMode,
) -> Result<SchmidtCertificate> {
    if d < 2 {
        return Err(Error::InvalidDimension(format!("d = {d}")));
    }
    if !s2.is_finite() || !s4.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "non-finite moment pair ({s2}, {s4})"
        )));
    }
    let tests = (1..d)
        .map(|r| match *mode {
            ClassifyMode::Exact => exact_test(d, r, s2, s4),
            ClassifyMode::Rectangle { std_s2, std_s4, k } => {
                rectangle_test(d, r, s2, s4, k * std_s2, k * std_s4)
            }
            ClassifyMode::Ellipse { ref cov, k } => ellipse_test(d, r, s2, s4, cov, k),
        })
        .collect();
    Ok(SchmidtCertificate::from_tests(CriterionId::MomentBoundary, tests).with_note(mode.label()))
}

/// Outer boundary pieces of the d = 3 physical region, one per family.
pub fn outer_curve(family: Family, x: f64) -> Result<f64> {
    let (lo, hi) = match family {
        Family::A => (0.0, 1.0),
        Family::B => (1.0, 1.75),
        Family::C => (1.75, 2.0),
        Family::D => (0.0, 2.0),
    };
    if !(x >= lo - 1e-12 && x <= hi + 1e-12) {
        return Err(Error::OutOfDomain(format!(
            "curve {} is defined on [{lo}, {hi}], got x = {x}",
            family.label()
        )));
    }
    let x = x.clamp(lo, hi);
    Ok(match family {
        Family::A => x * x,
        Family::B => 7.0 * x * x / 6.0 - 7.0 * x / 3.0 + 13.0 / 6.0,
        Family::C => 7.0 * x * x / 6.0 + (2.0 - x).powf(1.5) - 23.0 * x / 6.0 + 14.0 / 3.0,
        Family::D => 5.0 * x * x / 12.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OuterBoundary {
    pub upper: f64,
    pub upper_family: Family,
    pub lower: f64,
}

/// Upper (A, B or C) and lower (D) edge of the d = 3 region at `x = S2`.
pub fn outer_boundary_d3(x: f64) -> Result<OuterBoundary> {
    let family = if x <= 1.0 {
        Family::A
    } else if x <= 1.75 {
        Family::B
    } else {
        Family::C
    };
    Ok(OuterBoundary {
        upper: outer_curve(family, x)?,
        upper_family: family,
        lower: outer_curve(Family::D, x)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterKind {
    /// Haar-random pure state; `param` is its numerical Schmidt rank.
    Pure,
    /// Pure state of prescribed Schmidt rank `param`.
    PureRank,
    /// Induced-measure mixed state with ancilla dimension `param`.
    Mixed,
}

impl ScatterKind {
    pub fn label(self) -> &'static str {
        match self {
            ScatterKind::Pure => "pure",
            ScatterKind::PureRank => "pure_rank",
            ScatterKind::Mixed => "mixed",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatterPoint {
    pub s2: f64,
    pub s4: f64,
    pub kind: ScatterKind,
    pub param: usize,
    /// Exact Schmidt rank, known for pure samples.
    pub schmidt_rank: Option<usize>,
}

/// Exact moment pairs of random states, cycling through pure, fixed-rank
/// pure and mixed samples. Sample `i` uses its own stream, so the output
/// does not depend on the thread count.
pub fn region_scatter(d: usize, n_states: usize, seed: u64) -> Result<Vec<ScatterPoint>> {
    if n_states < 1 {
        return Err(Error::InvalidParameter("n_states must be >= 1".into()));
    }
    let basis = gell_mann_basis(d)?;
    (0..n_states)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, Domain::Scatter, i as u64);
            let (rho, kind, param, rank) = match i % 3 {
                0 => {
                    let psi = random_pure_with(&mut rng, d, d)?;
                    let rank = psi.schmidt_rank(1e-10);
                    (psi.to_density(), ScatterKind::Pure, rank, Some(rank))
                }
                1 => {
                    let k = rand::Rng::random_range(&mut rng, 1..=d);
                    let psi = random_pure_with_rank(&mut rng, d, d, k)?;
                    (psi.to_density(), ScatterKind::PureRank, k, Some(k))
                }
                _ => {
                    let k = rand::Rng::random_range(&mut rng, 1..=d * d);
                    (
                        random_mixed_with(&mut rng, d, d, k)?,
                        ScatterKind::Mixed,
                        k,
                        None,
                    )
                }
            };
            let corr = correlation_data(&rho, &basis, &basis)?;
            let m = exact_moments(&corr)?;
            Ok(ScatterPoint {
                s2: m.s2,
                s4: m.s4,
                kind,
                param,
                schmidt_rank: rank,
            })
        })
        .collect()
}

/// Curves sampled on a uniform `S2` grid; `None` marks points outside a
/// curve's domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveTable {
    pub d: usize,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

/// Lower curves and two-norm lines for each `r` in `ranks`, plus the outer
/// curves when `d = 3`, on `grid` points spanning `[0, (d+1)/(d-1)]`. The
/// right end is the largest `S2` of any state.
pub fn curve_table(d: usize, ranks: &[usize], grid: usize) -> Result<CurveTable> {
    if grid < 2 {
        return Err(Error::InvalidParameter(format!(
            "grid must be >= 2, got {grid}"
        )));
    }
    check_dr(d, 1)?;
    for &r in ranks {
        check_dr(d, r)?;
    }
    let mut columns = vec!["s2".to_string()];
    columns.extend(ranks.iter().map(|r| format!("s4_min_r{r}")));
    columns.extend(ranks.iter().map(|r| format!("vline_r{r}")));
    if d == 3 {
        columns.extend(["outer_a", "outer_b", "outer_c", "outer_d"].map(String::from));
    }
    let lines: Vec<f64> = ranks
        .iter()
        .map(|&r| two_norm_line(d, r))
        .collect::<Result<_>>()?;
    let s2_max = (d as f64 + 1.0) / (d as f64 - 1.0);
    let rows = (0..grid)
        .map(|i| {
            let x = s2_max * i as f64 / (grid - 1) as f64;
            let mut row = vec![Some(x)];
            row.extend(ranks.iter().map(|&r| lower_boundary(d, r, x).ok()));
            row.extend(lines.iter().map(|&v| Some(v)));
            if d == 3 {
                row.extend(Family::ALL.iter().map(|&fam| outer_curve(fam, x).ok()));
            }
            row
        })
        .collect();
    Ok(CurveTable { d, columns, rows })
}

pub fn write_curve_csv<W: Write>(mut w: W, table: &CurveTable) -> Result<()> {
    let io = |e| Error::io("csv output", e);
    writeln!(w, "{}", table.columns.join(",")).map_err(io)?;
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|c| c.map(fmt).unwrap_or_default()).collect();
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    Ok(())
}

pub fn write_scatter_csv<W: Write>(mut w: W, points: &[ScatterPoint]) -> Result<()> {
    let io = |e| Error::io("csv output", e);
    writeln!(w, "s2,s4,kind,param").map_err(io)?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{}",
            fmt(p.s2),
            fmt(p.s4),
            p.kind.label(),
            p.param
        )
        .map_err(io)?;
    }
    Ok(())
}

/// Full double precision, 17 significant digits.
pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::CorrelationData;
    use crate::qmat::{family_state, max_entangled, rho_w};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn fixtures_d3() {
        assert!(close(lower_boundary(3, 3, 2.0).unwrap(), 5.0 / 3.0, 1e-12));
        assert!(close(
            lower_boundary(3, 2, 1.75).unwrap(),
            53.0 / 32.0,
            1e-12
        ));
        assert!(close(lower_boundary(3, 2, 2.0).unwrap(), 2.219_81, 1e-5));
        assert!(close(lower_boundary(3, 1, 1.0).unwrap(), 1.0, 1e-12));
        assert!(matches!(
            lower_boundary(3, 1, 1.0 + 1e-6),
            Err(Error::OutOfDomain(_))
        ));
        assert!(lower_boundary(3, 4, 1.0).is_err());
        assert!(lower_boundary(3, 0, 1.0).is_err());
    }

    #[test]
    fn oracle_agrees_on_fixtures() {
        for (d, r, x) in [
            (3, 1, 1.0),
            (3, 2, 1.75),
            (3, 2, 2.0),
            (3, 3, 2.0),
            (4, 3, b_r(4, 3).powi(2) / 5.0),
        ] {
            let a = lower_boundary(d, r, x).unwrap();
            let o = numeric_min_oracle(d, r, x).unwrap();
            assert!(close(a, o, 1e-9), "d={d} r={r} x={x}: {a} vs {o}");
        }
        assert!(matches!(
            numeric_min_oracle(3, 2, 6.3),
            Err(Error::OutOfDomain(_))
        ));
    }

    #[test]
    fn pieces_tile_and_join() {
        for d in 2..=5 {
            for r in 1..=d {
                let c = BoundaryCurve::new(d, r).unwrap();
                assert_eq!(c.pieces[0].s2_lo, 0.0);
                assert!(close(c.pieces.last().unwrap().s2_hi, c.s2_max(), 1e-12));
                for w in c.pieces.windows(2) {
                    assert!(close(w[0].s2_hi, w[1].s2_lo, 1e-12));
                    let x = w[0].s2_hi;
                    let left = boundary_piece(d, r, w[0].n, x);
                    let right = boundary_piece(d, r, w[1].n, x);
                    assert!(
                        close(left, right, 1e-9 * left.max(1.0)),
                        "d={d} r={r} at {x}"
                    );
                }
            }
        }
    }

    #[test]
    fn two_norm_lines() {
        assert!(close(two_norm_line(3, 3).unwrap(), 2.0, 1e-12));
        assert!(close(two_norm_line(3, 1).unwrap(), 1.0, 1e-12));
        let l = two_norm_line(4, 2).unwrap();
        assert!(close(l, 16.0 / 9.0 * (1.0 - 6.0 / 32.0), 1e-12));
    }

    #[test]
    fn classify_exact_examples() {
        let c = classify_point(2.0, 5.0 / 3.0, 3, &ClassifyMode::Exact).unwrap();
        assert_eq!(c.certified_lower_bound, 3);
        let c = classify_point(1.0, 1.0, 3, &ClassifyMode::Exact).unwrap();
        assert_eq!(c.certified_lower_bound, 1);
        let m = exact_moments(&CorrelationData::canonical(&rho_w()).unwrap()).unwrap();
        let c = classify_point(m.s2, m.s4, 4, &ClassifyMode::Exact).unwrap();
        assert_eq!(c.certified_lower_bound, 3);
        assert_eq!(c.criterion_id, CriterionId::MomentBoundary);
    }

    #[test]
    fn max_entangled_states_touch_their_curve() {
        for d in 2..=5 {
            for r in 1..=d {
                let m = exact_moments(
                    &CorrelationData::canonical(&max_entangled(r, d).unwrap().to_density())
                        .unwrap(),
                )
                .unwrap();
                let f = lower_boundary(d, r, m.s2).unwrap();
                assert!(
                    close(f, m.s4, 1e-9),
                    "d={d} r={r}: curve {f} vs state {}",
                    m.s4
                );
            }
        }
    }

    #[test]
    fn uncertainty_modes() {
        let exact = classify_point(2.0, 5.0 / 3.0, 3, &ClassifyMode::Exact).unwrap();
        let zero = ClassifyMode::Ellipse {
            cov: [[0.0; 2]; 2],
            k: 3.0,
        };
        assert_eq!(
            classify_point(2.0, 5.0 / 3.0, 3, &zero)
                .unwrap()
                .certified_lower_bound,
            exact.certified_lower_bound
        );

        // A tiny round ellipse still certifies; a huge one never does.
        let small = ClassifyMode::Ellipse {
            cov: [[1e-6, 0.0], [0.0, 1e-6]],
            k: 3.0,
        };
        assert_eq!(
            classify_point(2.0, 5.0 / 3.0, 3, &small)
                .unwrap()
                .certified_lower_bound,
            3
        );
        let big = ClassifyMode::Ellipse {
            cov: [[1.0, 0.0], [0.0, 1.0]],
            k: 3.0,
        };
        assert_eq!(
            classify_point(2.0, 5.0 / 3.0, 3, &big)
                .unwrap()
                .certified_lower_bound,
            1
        );

        let rect = ClassifyMode::Rectangle {
            std_s2: 1e-4,
            std_s4: 1e-4,
            k: 2.0,
        };
        assert_eq!(
            classify_point(2.0, 5.0 / 3.0, 3, &rect)
                .unwrap()
                .certified_lower_bound,
            3
        );
        let wide = ClassifyMode::Rectangle {
            std_s2: 0.1,
            std_s4: 0.1,
            k: 3.0,
        };
        assert!(
            classify_point(2.0, 5.0 / 3.0, 3, &wide)
                .unwrap()
                .certified_lower_bound
                < 3
        );
    }

    #[test]
    fn ellipse_distance_matches_half_plane_case() {
        // Far from the curve, the nearest allowed point is the cap x = B².
        let d = 3;
        let b2 = b_r(d, 1).powi(2);
        let sd = 0.01;
        let cov = [[sd * sd, 0.0], [0.0, 1e-12]];
        let t = ellipse_test(d, 1, b2 + 0.05, 10.0, &cov, 3.0);
        assert!(close(t.lhs, 5.0, 1e-6), "{}", t.lhs);
    }

    #[test]
    fn degenerate_covariance_is_a_segment() {
        let cov = [[1e-4, 1e-4], [1e-4, 1e-4]];
        let c = classify_point(2.0, 5.0 / 3.0, 3, &ClassifyMode::Ellipse { cov, k: 1.0 }).unwrap();
        assert_eq!(c.certified_lower_bound, 3);
    }

    #[test]
    fn outer_curves() {
        assert!(close(outer_curve(Family::A, 1.0).unwrap(), 1.0, 1e-15));
        assert!(close(
            outer_curve(Family::C, 2.0).unwrap(),
            5.0 / 3.0,
            1e-12
        ));
        assert!(close(
            outer_curve(Family::D, 2.0).unwrap(),
            5.0 / 3.0,
            1e-12
        ));
        assert!(close(
            outer_curve(Family::B, 1.75).unwrap(),
            53.0 / 32.0,
            1e-12
        ));
        assert!(close(
            outer_curve(Family::B, 1.75).unwrap(),
            outer_curve(Family::C, 1.75).unwrap(),
            1e-12
        ));
        assert!(close(
            outer_curve(Family::A, 1.0).unwrap(),
            outer_curve(Family::B, 1.0).unwrap(),
            1e-12
        ));
        assert!(matches!(
            outer_curve(Family::A, 1.5),
            Err(Error::OutOfDomain(_))
        ));
        let o = outer_boundary_d3(1.5).unwrap();
        assert_eq!(o.upper_family, Family::B);
        assert!(o.lower < o.upper);
        assert!(outer_boundary_d3(2.5).is_err());
    }

    #[test]
    fn outer_curves_follow_their_families() {
        for fam in Family::ALL {
            let (lo, hi) = fam.param_range();
            for i in 0..=10 {
                let t = lo + (hi - lo) * i as f64 / 10.0;
                let rho = family_state(fam, t).unwrap();
                let m = exact_moments(&CorrelationData::canonical(&rho).unwrap()).unwrap();
                let y = outer_curve(fam, m.s2).unwrap();
                assert!(
                    close(y, m.s4, 1e-9),
                    "family {} t={t}: {y} vs {}",
                    fam.label(),
                    m.s4
                );
            }
        }
        let rho = family_state(Family::D, 0.5).unwrap();
        let m = exact_moments(&CorrelationData::canonical(&rho).unwrap()).unwrap();
        assert!(close(m.s2, 0.5, 1e-12));
    }

    #[test]
    fn scatter_is_deterministic_and_physical() {
        let a = region_scatter(3, 60, 11).unwrap();
        let b = region_scatter(3, 60, 11).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(p.s4 >= p.s2 * p.s2 / 3.0 - 1e-9 && p.s4 <= p.s2 * p.s2 + 1e-9);
        }
        let mut buf = Vec::new();
        write_scatter_csv(&mut buf, &a).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 61);
        assert!(text.starts_with("s2,s4,kind,param\n"));
    }

    #[test]
    fn curve_csv_layout() {
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &curve_table(3, &[1, 2, 3], 5).unwrap()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "s2,s4_min_r1,s4_min_r2,s4_min_r3,vline_r1,vline_r2,vline_r3,outer_a,outer_b,outer_c,outer_d"
        );
        let last: Vec<&str> = lines.last().unwrap().split(',').collect();
        assert_eq!(last[0].parse::<f64>().unwrap(), 2.0);
        assert!(last[1].is_empty());
        assert!(close(last[3].parse::<f64>().unwrap(), 5.0 / 3.0, 1e-12));
    }
}
