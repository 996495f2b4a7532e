//! Python bindings for the rydberg-gauge workbench.

use std::collections::HashMap;
use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rydberg_gauge::cli;
use rydberg_gauge::ed;
use rydberg_gauge::gauge;
use rydberg_gauge::io::Manifest;
use rydberg_gauge::sac::{self, SacConfig};
use rydberg_gauge::sector;
use rydberg_gauge::sse::{self, chain_rng, Chain, MeasureSpec, RunConfig, RunResult};
use rydberg_gauge::{CouplingTable, Lattice, ModelParams, SpinConfig};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn table(omega: f64, u2_over_omega: f64, u3_over_omega: f64) -> PyResult<CouplingTable> {
    rydberg_gauge::model::coupling_table(&ModelParams::from_omega_ratios(
        omega,
        u2_over_omega,
        u3_over_omega,
    ))
    .map_err(err)
}

fn summary(res: &RunResult) -> HashMap<String, (f64, f64)> {
    res.series
        .iter()
        .map(|(name, s)| (name.clone(), (s.mean(), s.error())))
        .collect()
}

/// Energy by exact diagonalization; `beta=None` gives the ground state.
#[pyfunction]
#[pyo3(signature = (lx, ly, omega, u2_over_omega, u3_over_omega, beta=None))]
fn ed_energy(
    lx: usize,
    ly: usize,
    omega: f64,
    u2_over_omega: f64,
    u3_over_omega: f64,
    beta: Option<f64>,
) -> PyResult<f64> {
    let lat = Lattice::new(lx, ly).map_err(err)?;
    let spec =
        ed::build_and_solve(&table(omega, u2_over_omega, u3_over_omega)?, &lat).map_err(err)?;
    Ok(match beta {
        Some(b) => spec.energy(b),
        None => spec.ground_energy(),
    })
}

/// SSE run at half filling; returns `{observable: (mean, error)}`.
#[pyfunction]
#[pyo3(signature = (lx, ly, omega, u2_over_omega, u3_over_omega, beta, n_therm=2000, n_meas=10000, n_bins=100, seed=1, sector=None))]
#[allow(clippy::too_many_arguments)]
fn sse_run(
    lx: usize,
    ly: usize,
    omega: f64,
    u2_over_omega: f64,
    u3_over_omega: f64,
    beta: f64,
    n_therm: usize,
    n_meas: usize,
    n_bins: usize,
    seed: u64,
    sector: Option<f64>,
) -> PyResult<HashMap<String, (f64, f64)>> {
    let lat = Lattice::new(lx, ly).map_err(err)?;
    let tbl = table(omega, u2_over_omega, u3_over_omega)?;
    let start = SpinConfig::all_down(lat.n_sites());
    let mut chain = Chain::for_lattice(&lat, &tbl, beta, start, chain_rng(seed, 0)).map_err(err)?;
    if let Some(f) = sector {
        chain.constrain_sector(f).map_err(err)?;
    }
    let cfg = RunConfig {
        n_therm,
        n_meas,
        n_bins,
    };
    let res = sse::run(&mut chain, &cfg, &MeasureSpec::default()).map_err(err)?;
    Ok(summary(&res))
}

/// Winding numbers `(F_x, F_y)` and flux density of a 0/1 occupation list.
#[pyfunction]
fn flux(lx: usize, ly: usize, occupations: Vec<u8>) -> PyResult<(i64, i64, f64)> {
    let lat = Lattice::new(lx, ly).map_err(err)?;
    let cfg = SpinConfig(occupations);
    cfg.check(&lat).map_err(err)?;
    let w = gauge::spin_winding(&cfg, &lat);
    Ok((w.fx, w.fy, w.f(&lat)))
}

/// Occupations of the reference configuration in the sector of flux density `f`.
#[pyfunction]
fn sector_reference(lx: usize, ly: usize, f: f64) -> PyResult<Vec<u8>> {
    let lat = Lattice::new(lx, ly).map_err(err)?;
    Ok(sector::sector_reference(&lat, f).map_err(err)?.0)
}

/// Power-law exponents `(C_E, C_R)` of the uniform dimer ensemble on an `l × l` torus.
#[pyfunction]
#[pyo3(signature = (l, samples=30000, therm=2000, blocks=20, seed=1))]
fn rk_exponents(
    l: usize,
    samples: usize,
    therm: usize,
    blocks: usize,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let r = cli::rk_oracle(l, therm, samples, blocks, seed).map_err(err)?;
    Ok((r.c_e.exponent, r.c_r.exponent))
}

/// Stochastic analytic continuation of a noisy synthetic correlator built
/// from `peaks = [(omega, weight), ...]`; returns `(omega, S(omega))`.
#[pyfunction]
#[pyo3(signature = (beta, n_tau, peaks, rel_noise=1e-5, seed=1))]
fn sac_synthetic(
    beta: f64,
    n_tau: usize,
    peaks: Vec<(f64, f64)>,
    rel_noise: f64,
    seed: u64,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let tau = sse::tau_grid(beta, n_tau);
    let input = sac::synthetic_input(beta, &tau, &peaks, rel_noise, seed).map_err(err)?;
    let r = sac::run(
        &input,
        &SacConfig {
            seed,
            ..Default::default()
        },
    )
    .map_err(err)?;
    Ok((r.omega, r.s))
}

/// Run a TOML manifest, writing all outputs into `out`; returns the summary.
#[pyfunction]
fn run_manifest(manifest: PathBuf, out: PathBuf) -> PyResult<HashMap<String, (f64, f64)>> {
    let (m, hash) = Manifest::load(&manifest).map_err(err)?;
    let res = cli::run_manifest(&m, &hash, &out, false).map_err(err)?;
    Ok(summary(&res))
}

#[pymodule]
fn rydberg_gauge_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(ed_energy, m)?)?;
    m.add_function(wrap_pyfunction!(sse_run, m)?)?;
    m.add_function(wrap_pyfunction!(flux, m)?)?;
    m.add_function(wrap_pyfunction!(sector_reference, m)?)?;
    m.add_function(wrap_pyfunction!(rk_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(sac_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(run_manifest, m)?)?;
    Ok(())
}
