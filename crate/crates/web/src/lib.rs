//! Browser bindings: Leibman bases, Gowers norms of quadratic phases, and
//! projected Haar samples of a Leibman subtorus.

use formavg_core::cyclic::{gowers_norm_pow, quadratic_phase};
use formavg_core::lattice::leibman_lattice;
use formavg_core::linsys::LinearFormSystem;
use formavg_core::torus::{build_model, sample_haar, FilteredTorusSpec};
use formavg_core::{Error, Result};
use wasm_bindgen::prelude::*;

/// Upper limit on scatter points so the page stays responsive.
pub const MAX_SCATTER: usize = 200_000;

/// HNF basis of `Λ^[degree]`, one `(a,b,…)` row per line after a rank line.
pub fn leibman_text(system: &str, degree: u32) -> Result<String> {
    let system = LinearFormSystem::named(system)?;
    if degree == 0 {
        return Err(Error::InvalidParameter("degree must be ≥ 1".into()));
    }
    let lattice = leibman_lattice(&system, degree);
    let mut out = format!("{}: rank {} in Z^{}\n", system.label(), lattice.rank(), lattice.ambient_dim());
    for v in lattice.basis() {
        let cells: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("({})\n", cells.join(",")));
    }
    Ok(out)
}

/// `‖e(x²/p)‖_{U^d}^{2^d}` for each prime.
pub fn gowers_values(primes: &[u32], d: u32) -> Result<Vec<f64>> {
    primes.iter().map(|&p| gowers_norm_pow(&quadratic_phase(p as u64)?, d)).collect()
}

/// Haar samples of the subtorus of `system` under filtration `spec`,
/// projected to the plane by `x = Σ wx_a y_a`, `y = Σ wy_a y_a` (first
/// coordinate of each slot, mod 1). Returned flat as `x0, y0, x1, y1, …`.
pub fn scatter_points(system: &str, spec: &str, count: usize, seed: u64, wx: &[i32], wy: &[i32]) -> Result<Vec<f64>> {
    let system = LinearFormSystem::named(system)?;
    let spec: FilteredTorusSpec = spec.parse()?;
    let t = system.forms();
    for w in [wx, wy] {
        if w.len() != t {
            return Err(Error::Dimension { expected: t, got: w.len() });
        }
    }
    if count == 0 || count > MAX_SCATTER {
        return Err(Error::InvalidParameter(format!("point count must be in 1..={MAX_SCATTER}")));
    }
    let model = build_model(&spec, &system)?;
    let m = model.coords();
    let project = |y: &[f64], w: &[i32]| -> f64 {
        let s: f64 = w.iter().enumerate().map(|(a, &c)| c as f64 * y[a * m]).sum();
        s.rem_euclid(1.0)
    };
    Ok(sample_haar(&model, seed, count)
        .iter()
        .flat_map(|y| [project(y, wx), project(y, wy)])
        .collect())
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn leibman_basis(system: &str, degree: u32) -> std::result::Result<String, JsError> {
    leibman_text(system, degree).map_err(js)
}

#[wasm_bindgen]
pub fn gowers_curve(primes: Vec<u32>, d: u32) -> std::result::Result<Vec<f64>, JsError> {
    gowers_values(&primes, d).map_err(js)
}

#[wasm_bindgen]
pub fn haar_scatter(
    system: &str,
    spec: &str,
    count: usize,
    seed: u32,
    wx: Vec<i32>,
    wy: Vec<i32>,
) -> std::result::Result<Vec<f64>, JsError> {
    scatter_points(system, spec, count, seed as u64, &wx, &wy).map_err(js)
}
