//! Dense exact diagonalization of the spin Hamiltonian for small clusters.

use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::model::{classical_energy, CouplingTable, SpinConfig};

pub const MAX_SITES: usize = 14;

/// Eigenvalues and eigenvector weights `|⟨s|n⟩|²` of a `2^N` Hamiltonian.
#[derive(Debug, Clone)]
pub struct DenseSpectrum {
    pub n_sites: usize,
    /// Sorted ascending.
    pub energies: Vec<f64>,
    /// `weights[n · dim + s] = |⟨s|n⟩|²`.
    weights: Vec<f64>,
}

/// Dense Hamiltonian with the given diagonal and a uniform `−Ω/2` single-flip term.
pub fn hamiltonian_matrix(n_sites: usize, diagonal: &[f64], omega: f64) -> Result<Mat<f64>> {
    if n_sites > MAX_SITES {
        return Err(Error::TooLarge(n_sites, MAX_SITES));
    }
    let dim = 1usize << n_sites;
    if diagonal.len() != dim {
        return Err(Error::SizeMismatch {
            expected: dim,
            got: diagonal.len(),
        });
    }
    let mut h = Mat::<f64>::zeros(dim, dim);
    for s in 0..dim {
        h[(s, s)] = diagonal[s];
        for i in 0..n_sites {
            h[(s, s ^ (1 << i))] = -0.5 * omega;
        }
    }
    Ok(h)
}

impl DenseSpectrum {
    /// Diagonalize a Hamiltonian given by its basis-state energies and field.
    pub fn solve(n_sites: usize, diagonal: &[f64], omega: f64) -> Result<Self> {
        let h = hamiltonian_matrix(n_sites, diagonal, omega)?;
        let dim = h.nrows();
        let eig = h
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::InvalidModel(format!("eigensolver failed: {e:?}")))?;
        let s = eig.S().column_vector();
        let u = eig.U();
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&a, &b| s[a].partial_cmp(&s[b]).unwrap());
        let energies = order.iter().map(|&k| s[k]).collect();
        let mut weights = vec![0.0; dim * dim];
        for (n, &k) in order.iter().enumerate() {
            for st in 0..dim {
                weights[n * dim + st] = u[(st, k)] * u[(st, k)];
            }
        }
        Ok(Self {
            n_sites,
            energies,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    /// Boltzmann factors relative to the ground state; `β = ∞` keeps the
    /// (numerically) degenerate ground manifold.
    fn boltzmann(&self, beta: f64) -> Vec<f64> {
        let e0 = self.energies[0];
        self.energies
            .iter()
            .map(|&e| {
                if beta.is_infinite() {
                    ((e - e0).abs() < 1e-9 * e0.abs().max(1.0)) as u8 as f64
                } else {
                    (-beta * (e - e0)).exp()
                }
            })
            .collect()
    }

    /// `ln Z(β)`.
    pub fn log_partition(&self, beta: f64) -> f64 {
        let w: f64 = self.boltzmann(beta).iter().sum();
        w.ln() - beta * self.energies[0]
    }

    /// `⟨H⟩` at inverse temperature `β`.
    pub fn energy(&self, beta: f64) -> f64 {
        let w = self.boltzmann(beta);
        let z: f64 = w.iter().sum();
        w.iter()
            .zip(&self.energies)
            .map(|(w, e)| w * e)
            .sum::<f64>()
            / z
    }

    /// Thermal average of a diagonal observable given per basis state.
    pub fn thermal_expectation(&self, observable: &[f64], beta: f64) -> Result<f64> {
        let dim = self.dim();
        if observable.len() != dim {
            return Err(Error::SizeMismatch {
                expected: dim,
                got: observable.len(),
            });
        }
        let w = self.boltzmann(beta);
        let z: f64 = w.iter().sum();
        let mut acc = 0.0;
        for (n, &wn) in w.iter().enumerate() {
            if wn < 1e-300 {
                continue;
            }
            let row = &self.weights[n * dim..(n + 1) * dim];
            acc += wn * row.iter().zip(observable).map(|(p, o)| p * o).sum::<f64>();
        }
        Ok(acc / z)
    }

    /// Ground-state (`β → ∞`) expectation of a diagonal observable.
    pub fn ground_expectation(&self, observable: &[f64]) -> Result<f64> {
        self.thermal_expectation(observable, f64::INFINITY)
    }
}

/// Basis-state values of a function of the spin configuration.
pub fn diagonal_observable(n_sites: usize, f: impl Fn(&SpinConfig) -> f64) -> Vec<f64> {
    (0..1u64 << n_sites)
        .map(|s| f(&SpinConfig::from_bits(s, n_sites)))
        .collect()
}

/// Build and diagonalize the lattice spin Hamiltonian.
pub fn build_and_solve(tbl: &CouplingTable, lat: &Lattice) -> Result<DenseSpectrum> {
    let n = lat.n_sites();
    if n > MAX_SITES {
        return Err(Error::TooLarge(n, MAX_SITES));
    }
    let diag: Vec<f64> = (0..1u64 << n)
        .map(|s| classical_energy(&SpinConfig::from_bits(s, n), tbl, lat))
        .collect::<Result<_>>()?;
    DenseSpectrum::solve(n, &diag, tbl.omega)
}
