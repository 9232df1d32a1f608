use proptest::prelude::*;

use dimcert::boundary::{b_r, classify_point, lower_boundary, numeric_min_oracle, ClassifyMode};
use dimcert::correlation::CorrelationData;
use dimcert::criteria::{compare_all, sn_ccnr, sn_fidelity, CriterionId};
use dimcert::moments::exact_moments;
use dimcert::qmat::{
    gell_mann_basis, isotropic, max_entangled, random_mixed_with, random_pure_with, ComplexMatrix,
    DensityMatrix,
};
use dimcert::randsim::{estimate_moments, haar_unitary, SamplingPath};
use dimcert::rng::{stream, Domain};

fn random_state(seed: u64, d: usize) -> DensityMatrix {
    let mut rng = stream(seed, Domain::State, 0);
    let rank = 1 + (seed as usize % (d * d));
    random_mixed_with(&mut rng, d, d, rank).unwrap()
}

fn separable_mixture(seed: u64, d: usize, terms: usize) -> DensityMatrix {
    let mut rng = stream(seed, Domain::State, 7);
    let parts: Vec<DensityMatrix> = (0..terms)
        .map(|_| {
            let a = random_pure_with(&mut rng, d, 1).unwrap().to_density();
            let b = random_pure_with(&mut rng, d, 1).unwrap().to_density();
            DensityMatrix::product(a.matrix(), b.matrix()).unwrap()
        })
        .collect();
    let w = 1.0 / terms as f64;
    let weighted: Vec<(f64, &DensityMatrix)> = parts.iter().map(|p| (w, p)).collect();
    DensityMatrix::mixture(&weighted).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn local_unitaries_leave_everything_invariant(seed in 0u64..10_000, d in 2usize..=4) {
        let rho = random_state(seed, d);
        let mut rng = stream(seed, Domain::State, 3);
        let rot = rho.conjugate_local(&haar_unitary(d, &mut rng), &haar_unitary(d, &mut rng)).unwrap();
        let (c0, c1) = (CorrelationData::canonical(&rho).unwrap(), CorrelationData::canonical(&rot).unwrap());
        for (a, b) in c0.epsilon.iter().zip(&c1.epsilon) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        let (m0, m1) = (exact_moments(&c0).unwrap(), exact_moments(&c1).unwrap());
        prop_assert!((m0.s2 - m1.s2).abs() < 1e-9 && (m0.s4 - m1.s4).abs() < 1e-9);
        let (r0, r1) = (compare_all(&rho).unwrap(), compare_all(&rot).unwrap());
        for (a, b) in r0.certificates.iter().zip(&r1.certificates) {
            if a.criterion_id != CriterionId::Fidelity {
                prop_assert_eq!(a.certified_lower_bound, b.certified_lower_bound);
            }
        }
    }

    #[test]
    fn moments_stay_in_cone(seed in 0u64..100_000, d in 2usize..=5) {
        let m = exact_moments(&CorrelationData::canonical(&random_state(seed, d)).unwrap()).unwrap();
        prop_assert!(m.in_physical_cone(1e-9), "{:?}", m);
    }

    #[test]
    fn basis_reconstructs_hermitian_matrices(seed in 0u64..10_000, d in 2usize..=5) {
        let mut rng = stream(seed, Domain::State, 4);
        let g = haar_unitary(d, &mut rng);
        let h = g.add(&g.adjoint()).scale(0.5);
        let basis = gell_mann_basis(d).unwrap();
        let coeffs = basis.coefficients(&h);
        let back = basis.reconstruct(h.trace().re, &coeffs);
        prop_assert!(back.max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn separable_mixtures_get_bound_one(seed in 0u64..10_000, d in 2usize..=4, terms in 1usize..6) {
        let rho = separable_mixture(seed, d, terms);
        let report = compare_all(&rho).unwrap();
        prop_assert_eq!(report.max_bound, 1);
        let m = exact_moments(&CorrelationData::canonical(&rho).unwrap()).unwrap();
        prop_assert_eq!(classify_point(m.s2, m.s4, d, &ClassifyMode::Exact).unwrap().certified_lower_bound, 1);
    }

    #[test]
    fn ccnr_dominates_max_entangled_fidelity(seed in 0u64..10_000) {
        let d = 3;
        let rho = random_state(seed, d);
        let corr = CorrelationData::canonical(&rho).unwrap();
        let ccnr = sn_ccnr(&corr.xi, d, d).certified_lower_bound;
        for r in 2..=d {
            let fid = sn_fidelity(&rho, &max_entangled(r, d).unwrap()).unwrap().certified_lower_bound;
            prop_assert!(ccnr >= fid);
        }
    }

    #[test]
    fn curves_are_nested_and_non_decreasing(d in 2usize..=6, r in 1usize..6, t in 0.0f64..1.0) {
        prop_assume!(r < d);
        let x = t * b_r(d, r).powi(2);
        let lo = lower_boundary(d, r + 1, x).unwrap();
        let hi = lower_boundary(d, r, x).unwrap();
        prop_assert!(lo <= hi + 1e-12);
        let x2 = (x * 1.001).min(b_r(d, r).powi(2));
        prop_assert!(lower_boundary(d, r, x2).unwrap() >= hi - 1e-12);
    }

    #[test]
    fn oracle_matches_analytic(d in 3usize..=5, r in 1usize..=5, t in 0.0f64..=1.0) {
        prop_assume!(r <= d);
        let x = t * b_r(d, r).powi(2);
        let a = lower_boundary(d, r, x).unwrap();
        let o = numeric_min_oracle(d, r, x).unwrap();
        prop_assert!((a - o).abs() < 1e-6, "d={} r={} x={}: {} vs {}", d, r, x, a, o);
    }
}

#[test]
fn isotropic_bounds_are_monotone_in_noise() {
    for d in [2usize, 3, 4] {
        let mut prev: Option<Vec<usize>> = None;
        for i in 0..=40 {
            let p = i as f64 / 40.0;
            let rho = isotropic(d, p).unwrap();
            let report = compare_all(&rho).unwrap();
            let mut bounds: Vec<usize> = report
                .certificates
                .iter()
                .map(|c| c.certified_lower_bound)
                .collect();
            let m = exact_moments(&CorrelationData::canonical(&rho).unwrap()).unwrap();
            bounds.push(
                classify_point(m.s2, m.s4, d, &ClassifyMode::Exact)
                    .unwrap()
                    .certified_lower_bound,
            );
            if let Some(prev) = &prev {
                for (a, b) in prev.iter().zip(&bounds) {
                    assert!(b <= a, "d={d} p={p}: {prev:?} -> {bounds:?}");
                }
            }
            prev = Some(bounds);
        }
    }
}

#[test]
fn random_pure_states_never_beat_their_schmidt_rank() {
    for d in [3usize, 4] {
        for seed in 0..300u64 {
            let mut rng = stream(seed, Domain::State, 5);
            let psi = random_pure_with(&mut rng, d, d).unwrap();
            let rank = psi.schmidt_rank(1e-10);
            let report = compare_all(&psi.to_density()).unwrap();
            assert!(report.max_bound <= rank);
        }
    }
}

#[test]
fn estimators_are_unbiased() {
    let rho = max_entangled(3, 3).unwrap().to_density();
    let runs = 200;
    let (mut s2, mut s4, mut v2, mut v4) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..runs {
        let e = estimate_moments(&rho, 1000, 50_000 + i, SamplingPath::HaarObservable).unwrap();
        s2 += e.s2;
        s4 += e.s4;
        v2 += e.std_s2 * e.std_s2;
        v4 += e.std_s4 * e.std_s4;
    }
    let n = runs as f64;
    let (m2, m4) = (s2 / n, s4 / n);
    let (se2, se4) = ((v2 / n / n).sqrt(), (v4 / n / n).sqrt());
    assert!((m2 - 2.0).abs() < 4.0 * se2, "{m2} ± {se2}");
    assert!((m4 - 5.0 / 3.0).abs() < 4.0 * se4, "{m4} ± {se4}");
}

#[test]
fn variance_scales_inversely_with_samples() {
    let rho = max_entangled(3, 3).unwrap().to_density();
    let runs = 200;
    let mut scaled = Vec::new();
    for (j, n) in [1_000usize, 10_000, 100_000].into_iter().enumerate() {
        let xs: Vec<f64> = (0..runs)
            .map(|i| {
                estimate_moments(
                    &rho,
                    n,
                    70_000 + 1000 * j as u64 + i,
                    SamplingPath::HaarObservable,
                )
                .unwrap()
                .s2
            })
            .collect();
        let mean = xs.iter().sum::<f64>() / runs as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        scaled.push(var * n as f64);
    }
    for v in &scaled {
        assert!((v / scaled[0] - 1.0).abs() < 0.25, "{scaled:?}");
        assert!((v / 5.6 - 1.0).abs() < 0.25, "{scaled:?}");
    }
}

#[test]
fn sampling_paths_agree() {
    let states = [
        max_entangled(3, 3).unwrap().to_density(),
        isotropic(3, 0.4).unwrap(),
        random_state(17, 3),
    ];
    for rho in &states {
        let h = estimate_moments(rho, 200_000, 1, SamplingPath::HaarObservable).unwrap();
        let b = estimate_moments(rho, 200_000, 2, SamplingPath::BlochSphere).unwrap();
        let t2 = (h.s2 - b.s2).abs() / (h.std_s2.powi(2) + b.std_s2.powi(2)).sqrt();
        let t4 = (h.s4 - b.s4).abs() / (h.std_s4.powi(2) + b.std_s4.powi(2)).sqrt();
        assert!(t2 < 4.0 && t4 < 4.0, "{t2} {t4}");
    }
}

#[test]
fn bloch_sphere_path_matches_exact_moments_in_even_dimension() {
    let rho = max_entangled(2, 4).unwrap().to_density();
    let exact = exact_moments(&CorrelationData::canonical(&rho).unwrap()).unwrap();
    let e = estimate_moments(&rho, 200_000, 3, SamplingPath::BlochSphere).unwrap();
    assert!((e.s2 - exact.s2).abs() < 4.0 * e.std_s2);
    assert!((e.s4 - exact.s4).abs() < 4.0 * e.std_s4);
}

#[test]
fn haar_first_moment_of_entries() {
    let mut rng = stream(99, Domain::Sampling, 0);
    let n = 100_000;
    let d = 3;
    let mut acc = vec![0.0; d * d];
    let mut sq = vec![0.0; d * d];
    for _ in 0..n {
        let u: ComplexMatrix = haar_unitary(d, &mut rng);
        for i in 0..d {
            for j in 0..d {
                let v = u[(i, j)].norm_sqr();
                acc[i * d + j] += v;
                sq[i * d + j] += v * v;
            }
        }
    }
    for k in 0..d * d {
        let mean = acc[k] / n as f64;
        let se = ((sq[k] / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - 1.0 / 3.0).abs() < 4.0 * se, "entry {k}: {mean}");
    }
}
