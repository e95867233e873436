//! Python bindings. Structured results cross the boundary as JSON strings.

use gepner::{classify, extcalc, hearts, mfcore::WeightedType, quiverrep};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn parse(ty: &str) -> PyResult<WeightedType> {
    WeightedType::parse(ty).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// The twelve reference types as a JSON array.
#[pyfunction]
pub fn table1() -> String {
    serde_json::to_string(&classify::table1()).expect("rows serialize")
}

/// Whether Z∘τ = ζ·Z holds on the heart lattice of the type.
#[pyfunction]
pub fn gepner_check(ty: &str) -> PyResult<bool> {
    Ok(hearts::build_lattice(&parse(ty)?).map_err(err)?.verify_gepner())
}

/// Z_G^† and Z_G of a lattice class, as exact strings.
#[pyfunction]
pub fn zg(ty: &str, class: Vec<i64>) -> PyResult<(String, String)> {
    let l = hearts::build_lattice(&parse(ty)?).map_err(err)?;
    if class.len() != l.rank() {
        return Err(PyValueError::new_err(format!("rank is {}", l.rank())));
    }
    Ok((l.zg_class(&class).to_string(), l.zg_full(&class).to_string()))
}

/// dim Hom^i(C(j), C(0)).
#[pyfunction]
pub fn ext_cc(ty: &str, j: i64, i: usize) -> PyResult<usize> {
    Ok(extcalc::ext_cc(&parse(ty)?, j, i).map_err(err)?.dim)
}

/// Stability summary line of a named object over the given primes.
#[pyfunction]
#[pyo3(signature = (ty, object, primes, point=1))]
pub fn stability(ty: &str, object: &str, primes: Vec<u64>, point: usize) -> PyResult<String> {
    Ok(quiverrep::stability_over_primes(&parse(ty)?, object, point, &primes).map_err(err)?.summary())
}

/// Runs the command-line interface; returns (exit code, stdout).
#[pyfunction]
pub fn run_cli(args: Vec<String>) -> (i32, String) {
    let out = gepner::cli::run(std::iter::once("gepner".to_string()).chain(args));
    (out.code, out.stdout + &out.stderr)
}

#[pymodule]
fn gepner_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(gepner_check, m)?)?;
    m.add_function(wrap_pyfunction!(zg, m)?)?;
    m.add_function(wrap_pyfunction!(ext_cc, m)?)?;
    m.add_function(wrap_pyfunction!(stability, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
