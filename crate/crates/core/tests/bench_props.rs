use proptest::prelude::*;
use std::sync::OnceLock;
use trotterkit::bench::{
    hierarchy, plan_metadata, records_csv, run_benchmark, BenchPlan, BenchmarkRecord, MethodSpec,
};
use trotterkit::schemes::Catalog;
use trotterkit::spinmodel::{Boundary, XxzConfig};

const HIERARCHY: [&str; 3] = ["forest-ruth", "suzuki", "blanes-moan"];

fn catalog() -> &'static Catalog {
    static CAT: OnceLock<Catalog> = OnceLock::new();
    CAT.get_or_init(|| Catalog::bundled().unwrap())
}

/// The default L = 8, t = 10 sweep, run once per test binary.
fn desk() -> &'static [BenchmarkRecord] {
    static RECORDS: OnceLock<Vec<BenchmarkRecord>> = OnceLock::new();
    RECORDS.get_or_init(|| run_benchmark(&BenchPlan::desk_default(), catalog(), None).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    /// Halving the step of a splitting scheme doubles its cost exactly.
    #[test]
    fn halving_h_doubles_cost(steps in 1usize..40, t_total in 0.1f64..5.0, pick in 0usize..5) {
        let name = catalog().names()[pick].to_string();
        let h = t_total / steps as f64;
        let plan = BenchPlan {
            model: XxzConfig::new(2, 1.0, Boundary::Open),
            t_total,
            methods: vec![MethodSpec::scheme(&name)],
            h_grid: vec![h, h / 2.0],
            kappa: 6.0,
            timing: false,
        };
        let r = run_benchmark(&plan, catalog(), None).unwrap();
        prop_assert_eq!(r[0].steps, steps);
        prop_assert_eq!(r[1].steps, 2 * steps);
        prop_assert_eq!(r[1].cost, 2.0 * r[0].cost);
    }
}

/// The ordering as stated: everywhere all three errors exceed 1e-11. At the
/// two or three coarsest costs the errors are O(1) and the ordering of
/// Suzuki and Blanes-Moan flips, so this does not hold on the default grid.
#[test]
#[ignore = "fails at the coarsest matched costs; see README, Known limitations"]
fn hierarchy_wherever_above_floor() {
    let report = hierarchy(desk(), &HIERARCHY, 1e-11);
    assert!(report.compared > 0);
    assert!(report.violations.is_empty(), "{:?}", report.violations);
}

#[test]
fn hierarchy_in_the_converged_region() {
    // Restrict to costs at which every method has an error below 1.
    let converged: Vec<BenchmarkRecord> = desk()
        .iter()
        .filter(|r| r.error < 1.0)
        .cloned()
        .collect();
    let report = hierarchy(&converged, &HIERARCHY, 1e-11);
    assert!(report.compared >= 5, "{report:?}");
    assert!(report.violations.is_empty(), "{:?}", report.violations);
}

#[test]
fn polynomial_plateaus_agree() {
    let floor = |m: &str| {
        desk()
            .iter()
            .filter(|r| r.method == m)
            .map(|r| r.error)
            .fold(f64::INFINITY, f64::min)
    };
    let (t, c) = (floor("taylor-prod"), floor("chebyshev-prod"));
    assert!(t < 1e-10 && c < 1e-10, "{t:e} {c:e}");
    let ratio = t.max(c) / t.min(c);
    assert!(ratio < 10.0, "{t:e} vs {c:e}");
}

#[test]
fn csv_is_reproducible() {
    let plan = BenchPlan {
        model: XxzConfig::new(5, 0.5, Boundary::Periodic),
        t_total: 2.0,
        methods: vec![MethodSpec::scheme("suzuki"), MethodSpec::scheme("strang")],
        h_grid: vec![0.5, 0.25, 0.125],
        kappa: 6.0,
        timing: false,
    };
    let a = run_benchmark(&plan, catalog(), None).unwrap();
    let b = run_benchmark(&plan, catalog(), None).unwrap();
    let meta = plan_metadata(&plan);
    assert_eq!(records_csv(&a, &meta), records_csv(&b, &meta));
}

#[test]
fn scheme_errors_fall_with_cost() {
    for m in HIERARCHY {
        let mut rows: Vec<&BenchmarkRecord> = desk().iter().filter(|r| r.method == m).collect();
        rows.sort_by(|a, b| a.cost.total_cmp(&b.cost));
        // Past the first two (pre-asymptotic) points the error keeps dropping.
        assert!(rows[2..].windows(2).all(|w| w[1].error < w[0].error), "{m}");
    }
}
