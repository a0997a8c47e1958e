use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use trotterkit::linalg::{frobenius_distance, random_hermitian, HermitianEigen};
use trotterkit::multistage::{apply_two_stage, Direction};
use trotterkit::schemes::{
    efficiency, empirical_order, estimate_error_coefficients, geometric_grid, Catalog, EstimateOptions,
    TwoStageScheme,
};
use trotterkit::stats::ls_slope;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 100,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

/// Coefficients in [-1, 1] shifted so that both lists sum to one.
fn consistent(q: usize, raw_a: &[f64], raw_b: &[f64]) -> TwoStageScheme {
    let shift = |v: &[f64]| {
        let s: f64 = v.iter().sum();
        let d = (1.0 - s) / v.len() as f64;
        v.iter().map(|x| x + d).collect::<Vec<f64>>()
    };
    TwoStageScheme::real("random", 1, &shift(&raw_a[..q + 1]), &shift(&raw_b[..q]))
}

fn palindrome(half: &[f64], len: usize) -> Vec<f64> {
    (0..len).map(|i| half[i.min(len - 1 - i)]).collect()
}

fn random_pair(seed: u64) -> (trotterkit::linalg::CMatrix, trotterkit::linalg::CMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_hermitian(&mut rng, 8), random_hermitian(&mut rng, 8))
}

fn catalog() -> &'static Catalog {
    static CAT: OnceLock<Catalog> = OnceLock::new();
    CAT.get_or_init(|| Catalog::bundled().unwrap())
}

proptest! {
    #![proptest_config(config())]

    /// One step of a consistent scheme is exact to first order: the local
    /// error falls at least like h^2.
    #[test]
    fn consistent_schemes_are_first_order_exact(
        q in 1usize..=4,
        raw_a in prop::collection::vec(-1.0f64..1.0, 5),
        raw_b in prop::collection::vec(-1.0f64..1.0, 4),
        seed in any::<u64>(),
    ) {
        let s = consistent(q, &raw_a, &raw_b);
        let (a, b) = random_pair(seed);
        let sum = &a + &b;
        let eig = HermitianEigen::new(&sum).unwrap();
        let hs = geometric_grid(0.02, 0.5, 4);
        let mut errs = Vec::new();
        for &h in &hs {
            let approx = apply_two_stage(&a, &b, &s, h, Direction::Forward).unwrap();
            let exact = eig.exp(Complex64::new(0.0, -h));
            errs.push(frobenius_distance(&approx, &exact).unwrap());
        }
        let lx: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
        let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let slope = ls_slope(&lx, &ly).unwrap();
        prop_assert!(slope >= 1.9, "local slope {slope}, errors {errs:?}");
    }

    /// Palindromic consistent schemes converge with an even order.
    #[test]
    fn symmetric_schemes_have_even_order(
        q in 1usize..=4,
        half_a in prop::collection::vec(-1.0f64..1.0, 3),
        half_b in prop::collection::vec(-1.0f64..1.0, 2),
        seed in any::<u64>(),
    ) {
        let norm = |v: Vec<f64>| {
            let s: f64 = v.iter().sum();
            let d = (1.0 - s) / v.len() as f64;
            v.into_iter().map(|x| x + d).collect::<Vec<f64>>()
        };
        // Shifting every entry by the same amount keeps a palindrome.
        let a = norm(palindrome(&half_a, q + 1));
        let b = norm(palindrome(&half_b, q));
        let s = TwoStageScheme::real("random-symmetric", 2, &a, &b);
        prop_assert!(s.symmetric);
        let fit = empirical_order(&s, 8, &geometric_grid(0.05, 0.5, 5), seed).unwrap();
        let rounded = fit.slope.round() as i64;
        prop_assert!(rounded % 2 == 0 && rounded >= 2, "slope {}", fit.slope);
    }

    /// The adjoint (reversed) scheme has leading error coefficients of the
    /// same size.
    #[test]
    fn reversal_keeps_alpha_beta_magnitudes(
        q in 1usize..=3,
        raw_a in prop::collection::vec(-1.0f64..1.0, 4),
        raw_b in prop::collection::vec(-1.0f64..1.0, 3),
        seed in 0u64..1_000_000,
    ) {
        let s = consistent(q, &raw_a, &raw_b);
        let opts = EstimateOptions { max_order: 3, draws: 2, seed, ..Default::default() };
        let fwd = estimate_error_coefficients(&s, &opts).unwrap();
        let rev = estimate_error_coefficients(&s.reversed(), &opts).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-6 * x.abs().max(y.abs()) + 1e-10;
        prop_assert!(close(fwd.alpha.norm(), rev.alpha.norm()), "{} vs {}", fwd.alpha, rev.alpha);
        prop_assert!(close(fwd.beta.norm(), rev.beta.norm()), "{} vs {}", fwd.beta, rev.beta);
    }

    /// Efficiency does not depend on which random operators were drawn.
    #[test]
    fn efficiency_is_seed_independent(pick in 0usize..4, seed in 0u64..1_000_000) {
        static REFERENCE: OnceLock<Vec<f64>> = OnceLock::new();
        let names = ["strang", "forest-ruth", "suzuki", "blanes-moan"];
        let opts = |seed| EstimateOptions { draws: 1, seed, ..Default::default() };
        let reference = REFERENCE.get_or_init(|| {
            names
                .iter()
                .map(|n| efficiency(catalog().get(n).unwrap(), &opts(1)).unwrap().eff)
                .collect()
        });
        let eff = efficiency(catalog().get(names[pick]).unwrap(), &opts(seed)).unwrap().eff;
        let rel = (eff - reference[pick]).abs() / reference[pick];
        prop_assert!(rel < 1e-6, "{}: {eff} vs {} (rel {rel:e})", names[pick], reference[pick]);
    }
}

#[test]
fn catalog_efficiency_hierarchy() {
    let opts = EstimateOptions::default();
    let eff = |n: &str| efficiency(catalog().get(n).unwrap(), &opts).unwrap().eff;
    let (fr, suz, bm) = (eff("forest-ruth"), eff("suzuki"), eff("blanes-moan"));
    assert!(fr < suz && suz < bm, "{fr} {suz} {bm}");
}

#[test]
fn every_catalog_scheme_is_even_order() {
    for s in catalog().iter() {
        let fit = empirical_order(s, 8, &geometric_grid(0.2, 0.5, 5), 3).unwrap();
        assert!((fit.slope - s.order_n as f64).abs() < 0.3, "{}: {}", s.name, fit.slope);
        assert_eq!(fit.slope.round() as i64 % 2, 0);
    }
}
