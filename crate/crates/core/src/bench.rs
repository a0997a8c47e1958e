//! Error-versus-cost sweeps on the XXZ chain.
//!
//! Every method is run at each step size of the grid up to a fixed total time
//! and compared with the exact propagator. Cost is counted in cycles per unit
//! time: `q * steps / t_total` for a splitting scheme with `q` cycles, and
//! `(k / kappa) * steps / t_total` for a polynomial of degree `k`.

use crate::error::{Error, Result};
use crate::linalg::{identity, power, CMatrix, HermitianEigen};
use crate::multistage::{evolve_prepared, to_multistage, Direction};
use crate::polyexp::{
    chebyshev_cutoff, eval_factorized, eval_summed, gamma_for_bound, taylor_cutoff, truncated_reference, Axis,
    Family, FactorizedPolynomial, SeriesSpec, ZeroCache,
};
use crate::schemes::Catalog;
use crate::spinmodel::{build_xxz, frobenius_error, Boundary, XxzConfig, XxzStages};
use crate::stats::loglog_interpolate;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

pub const DEFAULT_KAPPA: f64 = 6.0;
pub const DEFAULT_EPSILON: f64 = 1e-14;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Evaluation {
    /// Product over the zeros.
    #[default]
    Prod,
    /// Direct summation of the series.
    Sum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MethodSpec {
    /// A catalog scheme applied through the multi-stage transform.
    Scheme {
        name: String,
        #[serde(default)]
        alternate_reversal: bool,
    },
    /// A polynomial approximation of the one-step propagator. With `k`
    /// unset, the degree follows from the cutoff rule at each step size.
    Polynomial {
        family: Family,
        #[serde(default)]
        k: Option<usize>,
        #[serde(default)]
        epsilon: Option<f64>,
        #[serde(default)]
        evaluation: Evaluation,
    },
    /// The exact propagator itself, as a control.
    Exact,
}

impl MethodSpec {
    pub fn scheme(name: &str) -> Self {
        MethodSpec::Scheme {
            name: name.into(),
            alternate_reversal: false,
        }
    }

    pub fn polynomial(family: Family, evaluation: Evaluation) -> Self {
        MethodSpec::Polynomial {
            family,
            k: None,
            epsilon: None,
            evaluation,
        }
    }

    pub fn id(&self) -> String {
        match self {
            MethodSpec::Scheme {
                name,
                alternate_reversal,
            } => {
                if *alternate_reversal {
                    format!("{name}+reversal")
                } else {
                    name.clone()
                }
            }
            MethodSpec::Polynomial {
                family, k, evaluation, ..
            } => {
                let fam = match family {
                    Family::Taylor => "taylor",
                    Family::Chebyshev => "chebyshev",
                };
                let ev = match evaluation {
                    Evaluation::Prod => "prod",
                    Evaluation::Sum => "sum",
                };
                match k {
                    Some(k) => format!("{fam}-{ev}-k{k}"),
                    None => format!("{fam}-{ev}"),
                }
            }
            MethodSpec::Exact => "exact".into(),
        }
    }
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchPlan {
    pub model: XxzConfig,
    pub t_total: f64,
    pub methods: Vec<MethodSpec>,
    pub h_grid: Vec<f64>,
    /// Polynomial cost equivalence: degree `k` counts as `k / kappa` cycles.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Record measured wall times. Off by default so that output files are
    /// reproducible byte for byte; the column then holds zeros.
    #[serde(default)]
    pub timing: bool,
}

impl BenchPlan {
    /// L = 8 open chain, Delta = 1, t = 10, h from 1 down to 1/64, the three
    /// real fourth-order catalog schemes and both factorized polynomials.
    pub fn desk_default() -> Self {
        BenchPlan {
            model: XxzConfig::new(8, 1.0, Boundary::Open),
            t_total: 10.0,
            methods: vec![
                MethodSpec::scheme("forest-ruth"),
                MethodSpec::scheme("suzuki"),
                MethodSpec::scheme("blanes-moan"),
                MethodSpec::polynomial(Family::Taylor, Evaluation::Prod),
                MethodSpec::polynomial(Family::Chebyshev, Evaluation::Prod),
            ],
            h_grid: (0..7).map(|i| 0.5f64.powi(i)).collect(),
            kappa: DEFAULT_KAPPA,
            timing: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: BenchPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Invalid(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.t_total > 0.0 && self.t_total.is_finite()) {
            return Err(Error::Invalid(format!("t_total must be positive, got {}", self.t_total)));
        }
        if self.methods.is_empty() || self.h_grid.is_empty() {
            return Err(Error::Invalid("a plan needs at least one method and one step size".into()));
        }
        if self.h_grid.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::Invalid("step sizes must be positive".into()));
        }
        Ok(())
    }

    /// Step count and effective step for a nominal `h`.
    pub fn steps_for(&self, h: f64) -> (usize, f64) {
        let steps = ((self.t_total / h).round() as usize).max(1);
        (steps, self.t_total / steps as f64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord {
    pub method: String,
    /// Effective step size `t_total / steps`.
    pub h: f64,
    pub steps: usize,
    /// Cycles per unit time.
    pub cost: f64,
    pub error: f64,
    /// Seconds; informational only.
    pub wall_time: f64,
}

struct Context<'a> {
    plan: &'a BenchPlan,
    catalog: &'a Catalog,
    cache: Option<&'a ZeroCache>,
    h_mat: CMatrix,
    stages: XxzStages,
    exact: CMatrix,
    gamma: f64,
}

impl Context<'_> {
    fn run_cell(&self, method: &MethodSpec, h_nominal: f64) -> Result<BenchmarkRecord> {
        let (steps, h) = self.plan.steps_for(h_nominal);
        let started = Instant::now();
        let (u, cycles) = match method {
            MethodSpec::Scheme {
                name,
                alternate_reversal,
            } => {
                let scheme = self.catalog.get(name)?;
                let ms = to_multistage(scheme)?;
                let u = evolve_prepared(&self.stages, &ms, h, steps, *alternate_reversal, Direction::Forward)?;
                (u, scheme.q() as f64)
            }
            MethodSpec::Polynomial {
                family,
                k,
                epsilon,
                evaluation,
            } => {
                let eps = epsilon.unwrap_or(DEFAULT_EPSILON);
                let spec = match family {
                    Family::Taylor => {
                        let k = match k {
                            Some(k) => *k,
                            None => taylor_cutoff(self.gamma, h, eps)?,
                        };
                        SeriesSpec::taylor(k).with_h(h)
                    }
                    Family::Chebyshev => {
                        let k = match k {
                            Some(k) => *k,
                            None => chebyshev_cutoff(self.gamma * h, Axis::Imaginary, eps)?,
                        };
                        SeriesSpec::chebyshev(k, self.gamma, h, Axis::Imaginary)
                    }
                };
                let id = identity(self.h_mat.nrows());
                let step = match evaluation {
                    Evaluation::Prod => {
                        let fact = FactorizedPolynomial::new(spec, self.cache)?;
                        eval_factorized(&self.h_mat, &id, &fact, Direction::Forward)?
                    }
                    Evaluation::Sum => eval_summed(&self.h_mat, &id, &spec, Direction::Forward)?,
                };
                (power(&step, steps), spec.k as f64 / self.plan.kappa)
            }
            MethodSpec::Exact => (self.exact.clone(), 0.0),
        };
        let error = frobenius_error(&u, &self.exact)?;
        Ok(BenchmarkRecord {
            method: method.id(),
            h,
            steps,
            cost: cycles * steps as f64 / self.plan.t_total,
            error,
            wall_time: if self.plan.timing {
                started.elapsed().as_secs_f64()
            } else {
                0.0
            },
        })
    }
}

/// Runs every `(method, h)` cell of the plan. Records come back in plan
/// order: methods outer, step sizes inner.
pub fn run_benchmark(plan: &BenchPlan, catalog: &Catalog, cache: Option<&ZeroCache>) -> Result<Vec<BenchmarkRecord>> {
    plan.validate()?;
    // Resolve names before doing any heavy work.
    for m in &plan.methods {
        if let MethodSpec::Scheme { name, .. } = m {
            catalog.get(name)?;
        }
    }
    let split = build_xxz(&plan.model)?;
    let eig = HermitianEigen::new(&split.total)?;
    let exact = eig.exp(Direction::Forward.prefactor() * plan.t_total);
    let ctx = Context {
        plan,
        catalog,
        cache,
        stages: XxzStages::new(&plan.model, &split)?,
        gamma: gamma_for_bound(eig.spectral_radius()),
        h_mat: split.total,
        exact,
    };
    let cells: Vec<(&MethodSpec, f64)> = plan
        .methods
        .iter()
        .flat_map(|m| plan.h_grid.iter().map(move |&h| (m, h)))
        .collect();
    cells.par_iter().map(|&(m, h)| ctx.run_cell(m, h)).collect()
}

fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Records sorted by method, then cost, then step size.
pub fn sorted_records(records: &[BenchmarkRecord]) -> Vec<BenchmarkRecord> {
    let mut r = records.to_vec();
    r.sort_by(|a, b| {
        a.method
            .cmp(&b.method)
            .then(a.cost.total_cmp(&b.cost))
            .then(b.h.total_cmp(&a.h))
    });
    r
}

/// CSV text: `#` metadata lines, the header, then one row per record.
pub fn records_csv(records: &[BenchmarkRecord], metadata: &[String]) -> String {
    let mut out = String::new();
    for m in metadata {
        let _ = writeln!(out, "# {m}");
    }
    out.push_str("method,h,steps,cost,error,wall_time\n");
    for r in sorted_records(records) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method,
            sci(r.h),
            r.steps,
            sci(r.cost),
            sci(r.error),
            sci(r.wall_time)
        );
    }
    out
}

/// Plot data: one block per method, `cost error` columns, blocks separated
/// by two blank lines so that each can be addressed by index.
pub fn plot_data(records: &[BenchmarkRecord]) -> String {
    let sorted = sorted_records(records);
    let mut out = String::new();
    let mut current: Option<&str> = None;
    for r in &sorted {
        if current != Some(r.method.as_str()) {
            if current.is_some() {
                out.push_str("\n\n");
            }
            let _ = writeln!(out, "# {}\n# cost error", r.method);
            current = Some(r.method.as_str());
        }
        let _ = writeln!(out, "{} {}", sci(r.cost), sci(r.error));
    }
    out
}

pub fn plan_metadata(plan: &BenchPlan) -> Vec<String> {
    let bc = match plan.model.boundary {
        Boundary::Open => "open",
        Boundary::Periodic => "periodic",
    };
    vec![
        format!(
            "model=xxz L={} delta={} bc={} J={}",
            plan.model.sites, plan.model.anisotropy, bc, plan.model.coupling
        ),
        format!("t_total={} kappa={} timing={}", plan.t_total, plan.kappa, plan.timing),
        "cost = cycles * steps / t_total; polynomial degree k counts as k/kappa cycles".into(),
    ]
}

/// Writes the CSV and, when `plot_path` is given, the plot-data file.
pub fn emit_records(
    records: &[BenchmarkRecord],
    metadata: &[String],
    path: &Path,
    plot_path: Option<&Path>,
) -> Result<()> {
    if records.is_empty() {
        return Err(Error::Invalid("no records to write".into()));
    }
    std::fs::write(path, records_csv(records, metadata)).map_err(|e| Error::io(path, e))?;
    if let Some(p) = plot_path {
        std::fs::write(p, plot_data(records)).map_err(|e| Error::io(p, e))?;
    }
    Ok(())
}

/// Error of `method` interpolated log-log to `cost`; `None` outside the
/// sampled cost range.
pub fn error_at_cost(records: &[BenchmarkRecord], method: &str, cost: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = sorted_records(records)
        .into_iter()
        .filter(|r| r.method == method && r.cost > 0.0 && r.error > 0.0)
        .map(|r| (r.cost, r.error))
        .collect();
    loglog_interpolate(&pts, cost)
}

#[derive(Clone, Debug, Serialize)]
pub struct HierarchyReport {
    /// Cost values at which all methods were above the floor.
    pub compared: usize,
    /// `(cost, errors in method order)` where the ordering failed.
    pub violations: Vec<(f64, Vec<f64>)>,
}

/// Checks that errors strictly decrease along `methods` (worst first) at
/// every sampled cost where all methods are interpolable and above `floor`.
pub fn hierarchy(records: &[BenchmarkRecord], methods: &[&str], floor: f64) -> HierarchyReport {
    let mut costs: Vec<f64> = records
        .iter()
        .filter(|r| methods.contains(&r.method.as_str()) && r.cost > 0.0)
        .map(|r| r.cost)
        .collect();
    costs.sort_by(f64::total_cmp);
    costs.dedup();
    let mut compared = 0;
    let mut violations = Vec::new();
    for c in costs {
        let errs: Option<Vec<f64>> = methods.iter().map(|m| error_at_cost(records, m, c)).collect();
        let Some(errs) = errs else { continue };
        if errs.iter().any(|&e| e <= floor) {
            continue;
        }
        compared += 1;
        if errs.windows(2).any(|w| w[0] <= w[1]) {
            violations.push((c, errs));
        }
    }
    HierarchyReport { compared, violations }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeRow {
    pub k: usize,
    pub z: Complex64,
    /// The truncated Taylor polynomial at `z`, evaluated stably in
    /// double-double.
    pub exact: Complex64,
    /// Relative error of direct summation against `exact`.
    pub err_sum: f64,
    /// Relative error of the factorized product against `exact`.
    pub err_prod: f64,
}

/// Summed versus factorized Taylor evaluation at each `(k, z)`.
pub fn stability_probe(k_list: &[usize], z_samples: &[Complex64], cache: Option<&ZeroCache>) -> Result<Vec<ProbeRow>> {
    let mut rows = Vec::with_capacity(k_list.len() * z_samples.len());
    for &k in k_list {
        let fact = FactorizedPolynomial::taylor(k, cache)?;
        for &z in z_samples {
            let exact = truncated_reference(&fact.spec, z)?;
            let summed = crate::polyexp::eval_summed_scalar(&fact.spec, z)?;
            let prod = fact.eval_scalar(z);
            let scale = exact.norm();
            rows.push(ProbeRow {
                k,
                z,
                exact,
                err_sum: (summed - exact).norm() / scale,
                err_prod: (prod - exact).norm() / scale,
            });
        }
    }
    Ok(rows)
}

pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut out = String::from("k,z_re,z_im,err_sum,err_prod\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.k,
            sci(r.z.re),
            sci(r.z.im),
            sci(r.err_sum),
            sci(r.err_prod)
        );
    }
    out
}
