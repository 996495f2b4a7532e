//! Imaginary-time correlators `G(q, τ) = ⟨ρ_q(τ) ρ_q(0)*⟩ / N`.
//!
//! The `n` operators of the string are placed at sorted uniform random times
//! in `[0, β)`, which reproduces the continuous-time distribution exactly.
//! Several reference times per measurement are averaged.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::measure::NamedMomentum;
use super::{index, kind, Chain, SITE_FLIP};
use crate::error::{Error, Result};
use crate::gauge::PhaseTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImagTimeObservable {
    /// Rydberg occupations `n_i`.
    Density,
    /// Electric field on the vertical (b₁) link of each up triangle.
    ElectricY,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagTimeSpec {
    pub observable: ImagTimeObservable,
    pub momenta: Vec<NamedMomentum>,
    /// Explicit τ points; `None` uses [`tau_grid`] with `n_tau` points.
    pub tau: Option<Vec<f64>>,
    pub n_tau: usize,
    /// Reference times per measurement.
    pub n_ref: usize,
}

impl ImagTimeSpec {
    pub fn new(observable: ImagTimeObservable, momenta: Vec<NamedMomentum>) -> Self {
        Self {
            observable,
            momenta,
            tau: None,
            n_tau: 50,
            n_ref: 4,
        }
    }
}

/// `n` points on `[0, β/2]`, quadratically denser near `τ = 0`.
pub fn tau_grid(beta: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.0];
    }
    (0..n)
        .map(|k| 0.5 * beta * (k as f64 / (n - 1) as f64).powi(2))
        .collect()
}

/// Binned `G(q, τ)` for one observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagTimeCorrelator {
    pub observable: ImagTimeObservable,
    pub beta: f64,
    pub tau: Vec<f64>,
    pub momenta: Vec<NamedMomentum>,
    /// `bins[q][b][τ]`.
    pub bins: Vec<Vec<Vec<f64>>>,
}

impl ImagTimeCorrelator {
    pub fn n_bins(&self) -> usize {
        self.bins.first().map_or(0, |b| b.len())
    }

    pub fn mean(&self, q: usize) -> Vec<f64> {
        let nb = self.bins[q].len() as f64;
        (0..self.tau.len())
            .map(|t| self.bins[q].iter().map(|b| b[t]).sum::<f64>() / nb)
            .collect()
    }

    /// `C_ij = Σ_b (G_b,i − Ḡ_i)(G_b,j − Ḡ_j) / (N_B (N_B − 1))`.
    pub fn covariance(&self, q: usize) -> Vec<Vec<f64>> {
        let g = self.mean(q);
        let nb = self.bins[q].len() as f64;
        let nt = self.tau.len();
        let norm = nb * (nb - 1.0);
        let mut c = vec![vec![0.0; nt]; nt];
        for b in &self.bins[q] {
            for i in 0..nt {
                let di = b[i] - g[i];
                for j in i..nt {
                    c[i][j] += di * (b[j] - g[j]) / norm;
                }
            }
        }
        for i in 0..nt {
            for j in 0..i {
                c[i][j] = c[j][i];
            }
        }
        c
    }

    pub fn errors(&self, q: usize) -> Vec<f64> {
        let c = self.covariance(q);
        (0..self.tau.len()).map(|i| c[i][i].sqrt()).collect()
    }
}

pub(crate) struct ImagTimeAccumulator {
    observable: ImagTimeObservable,
    beta: f64,
    tau: Vec<f64>,
    momenta: Vec<NamedMomentum>,
    n_ref: usize,
    table: PhaseTable,
    n_sites: usize,
    per_bin: usize,
    count: usize,
    current: Vec<Vec<f64>>,
    bins: Vec<Vec<Vec<f64>>>,
    times: Vec<f64>,
    queries: Vec<(f64, usize, usize)>,
    rho: Vec<Vec<Complex64>>,
    values: Vec<f64>,
}

impl ImagTimeAccumulator {
    pub(crate) fn new(spec: &ImagTimeSpec, chain: &Chain, per_bin: usize) -> Result<Self> {
        let lat = chain
            .lat
            .as_ref()
            .ok_or_else(|| Error::InvalidRun("imaginary-time data need a lattice".into()))?;
        let beta = chain.state.beta;
        let tau = spec
            .tau
            .clone()
            .unwrap_or_else(|| tau_grid(beta, spec.n_tau));
        if let Some(&t) = tau.iter().find(|&&t| !(0.0..=beta).contains(&t)) {
            return Err(Error::TauOutOfRange(t));
        }
        let qs: Vec<[f64; 2]> = spec.momenta.iter().map(|m| m.q).collect();
        let table = match spec.observable {
            ImagTimeObservable::Density => PhaseTable::sites(lat, &qs),
            ImagTimeObservable::ElectricY => PhaseTable::a_vertices(lat, &qs),
        };
        let nq = qs.len();
        let n_ref = spec.n_ref.max(1);
        Ok(Self {
            observable: spec.observable,
            beta,
            tau: tau.clone(),
            momenta: spec.momenta.clone(),
            n_ref,
            table,
            n_sites: lat.n_sites(),
            per_bin,
            count: 0,
            current: vec![vec![0.0; tau.len()]; nq],
            bins: vec![Vec::new(); nq],
            times: Vec::new(),
            queries: Vec::new(),
            rho: vec![vec![Complex64::default(); nq]; n_ref * tau.len()],
            values: vec![0.0; lat.n_sites()],
        })
    }

    fn observe(&mut self, spins: &[u8], chain: &Chain, slot: usize) {
        match self.observable {
            ImagTimeObservable::Density => {
                for (v, &s) in self.values.iter_mut().zip(spins) {
                    *v = s as f64;
                }
            }
            ImagTimeObservable::ElectricY => {
                let lat = chain.lat.as_ref().expect("lattice checked at construction");
                for r in 0..self.n_sites {
                    let (i, j) = lat.nn_bonds()[3 * r];
                    self.values[r] = if spins[i] == spins[j] { 2.0 } else { -1.0 };
                }
            }
        }
        self.rho[slot] = self.table.transform(&self.values);
    }

    pub(crate) fn measure(&mut self, chain: &mut Chain) {
        let beta = self.beta;
        let nt = self.tau.len();
        let n_ops = chain.state.n_ops;
        self.times.clear();
        for _ in 0..n_ops {
            let t = chain.state.rng.gen::<f64>() * beta;
            self.times.push(t);
        }
        self.times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let offset = chain.state.rng.gen::<f64>() * beta / self.n_ref as f64;
        self.queries.clear();
        for r in 0..self.n_ref {
            let t0 = offset + r as f64 * beta / self.n_ref as f64;
            for (k, &tau) in self.tau.iter().enumerate() {
                self.queries.push(((t0 + tau) % beta, r, k));
            }
        }
        self.queries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

        let mut spins = chain.state.spins.clone();
        let mut qi = 0;
        let mut ti = 0;
        let queries = std::mem::take(&mut self.queries);
        for &op in &chain.state.ops {
            let k = kind(op);
            if k == 0 {
                continue;
            }
            let t_op = self.times[ti];
            ti += 1;
            while qi < queries.len() && queries[qi].0 < t_op {
                let (_, r, k) = queries[qi];
                self.observe(&spins, chain, r * nt + k);
                qi += 1;
            }
            if k == SITE_FLIP {
                spins[index(op)] ^= 1;
            }
        }
        while qi < queries.len() {
            let (_, r, k) = queries[qi];
            self.observe(&spins, chain, r * nt + k);
            qi += 1;
        }
        self.queries = queries;

        let norm = 1.0 / (self.n_sites as f64 * self.n_ref as f64);
        for q in 0..self.momenta.len() {
            for r in 0..self.n_ref {
                let rho0 = self.rho[r * nt][q];
                for k in 0..nt {
                    self.current[q][k] += (self.rho[r * nt + k][q] * rho0.conj()).re * norm;
                }
            }
        }
        self.count += 1;
        if self.count == self.per_bin {
            for q in 0..self.momenta.len() {
                let bin: Vec<f64> = self.current[q]
                    .iter()
                    .map(|v| v / self.per_bin as f64)
                    .collect();
                self.bins[q].push(bin);
                self.current[q].iter_mut().for_each(|v| *v = 0.0);
            }
            self.count = 0;
        }
    }

    pub(crate) fn finish(self) -> ImagTimeCorrelator {
        ImagTimeCorrelator {
            observable: self.observable,
            beta: self.beta,
            tau: self.tau,
            momenta: self.momenta,
            bins: self.bins,
        }
    }
}
