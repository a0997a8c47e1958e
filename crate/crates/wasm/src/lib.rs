//! Browser bindings for three small demos: the zeros of a truncated Taylor
//! series against the Szegő curve, summed versus factorized evaluation along
//! the negative real axis, and the fitted order of a scheme applied to more
//! than two operators.
//!
//! Each exported function returns a JSON string. The work is done by plain
//! Rust functions so that it can be tested natively.

use num_complex::Complex64;
use serde::Serialize;
use trotterkit::multistage::{multistage_order, to_multistage};
use trotterkit::polyexp::{szego_curve, truncated_reference, FactorizedPolynomial, SzegoDatum};
use trotterkit::schemes::{geometric_grid, Catalog};
use wasm_bindgen::prelude::*;

const MAX_DEMO_DEGREE: usize = 200;
const MAX_DEMO_DIM: usize = 16;

#[derive(Serialize)]
pub struct ZerosView {
    pub k: usize,
    /// Zeros divided by `k`, as `[re, im]`.
    pub normalized: Vec<[f64; 2]>,
    /// The limit curve `|w e^{1-w}| = 1`, `|w| <= 1`.
    pub szego: Vec<[f64; 2]>,
    pub min_modulus_over_k: f64,
}

pub fn zeros_view(k: usize) -> Result<ZerosView, String> {
    if k == 0 || k > MAX_DEMO_DEGREE {
        return Err(format!("degree must be between 1 and {MAX_DEMO_DEGREE}"));
    }
    let datum = SzegoDatum::new(k).map_err(|e| e.to_string())?;
    let pair = |z: &Complex64| [z.re, z.im];
    let min = datum
        .normalized_zeros
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min);
    Ok(ZerosView {
        k,
        normalized: datum.normalized_zeros.iter().map(pair).collect(),
        szego: szego_curve(256).iter().map(pair).collect(),
        min_modulus_over_k: min,
    })
}

#[derive(Serialize)]
pub struct SweepPoint {
    pub x: f64,
    pub err_sum: f64,
    pub err_prod: f64,
}

/// Relative errors of both evaluation orders against the exact truncated
/// polynomial at `n` points of `[x_min, x_max]` on the real axis.
pub fn error_sweep(k: usize, x_min: f64, x_max: f64, n: usize) -> Result<Vec<SweepPoint>, String> {
    if k == 0 || k > MAX_DEMO_DEGREE {
        return Err(format!("degree must be between 1 and {MAX_DEMO_DEGREE}"));
    }
    if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) || !(2..=400).contains(&n) {
        return Err("need a finite interval and 2 to 400 points".into());
    }
    let fact = FactorizedPolynomial::taylor(k, None).map_err(|e| e.to_string())?;
    (0..n)
        .map(|i| {
            let x = x_min + (x_max - x_min) * i as f64 / (n - 1) as f64;
            let z = Complex64::new(x, 0.0);
            let exact = truncated_reference(&fact.spec, z).map_err(|e| e.to_string())?;
            let summed = trotterkit::polyexp::eval_summed_scalar(&fact.spec, z).map_err(|e| e.to_string())?;
            let prod = fact.eval_scalar(z);
            let scale = exact.norm();
            Ok(SweepPoint {
                x,
                err_sum: (summed - exact).norm() / scale,
                err_prod: (prod - exact).norm() / scale,
            })
        })
        .collect()
}

#[derive(Serialize)]
pub struct OrderScan {
    pub scheme: String,
    pub stages: usize,
    pub claimed_order: u32,
    pub slope: f64,
    /// `[h, error]` pairs.
    pub points: Vec<[f64; 2]>,
}

pub fn order_scan(scheme: &str, stages: usize, dim: usize, seed: u64) -> Result<OrderScan, String> {
    if !(2..=6).contains(&stages) || !(2..=MAX_DEMO_DIM).contains(&dim) {
        return Err(format!("need 2 to 6 operators of dimension 2 to {MAX_DEMO_DIM}"));
    }
    let catalog = Catalog::bundled().map_err(|e| e.to_string())?;
    let two = catalog.get(scheme).map_err(|e| e.to_string())?;
    let ms = to_multistage(two).map_err(|e| e.to_string())?;
    let fit = multistage_order(&ms, stages, dim, &geometric_grid(0.2, 0.5, 5), seed, false)
        .map_err(|e| e.to_string())?;
    Ok(OrderScan {
        scheme: scheme.into(),
        stages,
        claimed_order: ms.order_n,
        slope: fit.slope,
        points: fit.points.iter().map(|&(h, e)| [h, e]).collect(),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = taylorZeros)]
pub fn taylor_zeros(k: u32) -> Result<String, JsValue> {
    to_js(zeros_view(k as usize))
}

#[wasm_bindgen(js_name = errorSweep)]
pub fn js_error_sweep(k: u32, x_min: f64, x_max: f64, n: u32) -> Result<String, JsValue> {
    to_js(error_sweep(k as usize, x_min, x_max, n as usize))
}

#[wasm_bindgen(js_name = orderScan)]
pub fn js_order_scan(scheme: &str, stages: u32, dim: u32, seed: u32) -> Result<String, JsValue> {
    to_js(order_scan(scheme, stages as usize, dim as usize, seed as u64))
}

#[wasm_bindgen(js_name = schemeNames)]
pub fn scheme_names() -> Result<String, JsValue> {
    to_js(
        Catalog::bundled()
            .map(|c| c.names().iter().map(|s| s.to_string()).collect::<Vec<_>>())
            .map_err(|e| e.to_string()),
    )
}
