//! Stochastic series expansion for the transverse-field Ising form of the
//! Rydberg Hamiltonian.
//!
//! The Hamiltonian is written as `H = C − Σ_k H_k` with non-negative
//! operators
//!
//! - site off-diagonal `Ω/2 (S⁺ + S⁻)`,
//! - site diagonal `Ω/2`,
//! - bond diagonal `U (1/4 − Sᶻ_i Sᶻ_j)`, weight `U/2` on antiparallel pairs,
//! - triangle diagonal `U/4 (9/4 − (Sᶻ_i + Sᶻ_j + Sᶻ_k)²)`, weight `U/2` on
//!   the six configurations with one minority spin and zero otherwise.
//!
//! A triangle term of strength `U` equals `U/2 Sᶻ Sᶻ` on each of its edges up
//! to a constant, so nearest-neighbour bonds covered by exactly two triangles
//! can be expressed through triangles. In the cluster update a triangle links
//! its minority spin to one randomly chosen majority spin.
//!
//! Lattice chains also apply a random lattice translation after every sweep.
//! Translations commute with `H`, so the move is always accepted; it mixes
//! the degenerate ordered states related by translation.

mod checkpoint;
mod imag_time;
mod measure;
mod symmetry;
mod update;

pub use checkpoint::Checkpoint;
pub use imag_time::{tau_grid, ImagTimeCorrelator, ImagTimeObservable, ImagTimeSpec};
pub use measure::{run, MeasureSpec, NamedMomentum, RunConfig, RunResult};

use rand::distributions::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{self, WindingNumbers};
use crate::lattice::Lattice;
use crate::model::{CouplingTable, SpinConfig};
use crate::sector;

pub(crate) const IDENTITY: u32 = 0;
pub(crate) const SITE_DIAG: u32 = 1;
pub(crate) const SITE_FLIP: u32 = 2;
pub(crate) const BOND: u32 = 3;

/// Third site of a two-site term.
pub(crate) const NO_SITE: usize = usize::MAX;

#[inline]
pub(crate) fn kind(op: u32) -> u32 {
    op & 3
}

#[inline]
pub(crate) fn index(op: u32) -> usize {
    (op >> 2) as usize
}

#[inline]
pub(crate) fn encode(kind: u32, idx: usize) -> u32 {
    ((idx as u32) << 2) | kind
}

/// One slot of the operator string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Identity,
    SiteDiag(usize),
    SiteOffDiag(usize),
    /// Diagonal interaction term (bond or triangle), indexed into
    /// [`SseHamiltonian::terms`].
    BondDiag(usize),
}

impl Operator {
    pub fn decode(op: u32) -> Self {
        match kind(op) {
            SITE_DIAG => Operator::SiteDiag(index(op)),
            SITE_FLIP => Operator::SiteOffDiag(index(op)),
            BOND => Operator::BondDiag(index(op)),
            _ => Operator::Identity,
        }
    }
}

/// Whether a diagonal interaction term has non-zero weight on `spins`.
#[inline]
pub(crate) fn term_allowed(t: &[usize; 3], spins: &[u8]) -> bool {
    let (a, b) = (spins[t[0]], spins[t[1]]);
    if t[2] == NO_SITE {
        a != b
    } else {
        !(a == b && b == spins[t[2]])
    }
}

/// Decomposition of the nearest-neighbour interaction into SSE vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vertices {
    #[default]
    Bond,
    Triangle,
}

/// Interaction terms, transverse field and operator weights of a spin model.
#[derive(Debug, Clone)]
pub struct SseHamiltonian {
    n_sites: usize,
    terms: Vec<[usize; 3]>,
    term_u: Vec<f64>,
    omega: f64,
    total_weight: f64,
    site_weight: f64,
    term_picker: Option<WeightedIndex<f64>>,
    constant: f64,
}

impl SseHamiltonian {
    /// Arbitrary antiferromagnetic bonds `(i, j, U)` plus field `Ω`.
    pub fn custom(n_sites: usize, bonds: &[(usize, usize, f64)], omega: f64) -> Result<Self> {
        Self::with_triangles(n_sites, bonds, &[], omega)
    }

    /// Bonds `(i, j, U)`, triangle terms `([i, j, k], U)` and field `Ω`.
    pub fn with_triangles(
        n_sites: usize,
        bonds: &[(usize, usize, f64)],
        triangles: &[([usize; 3], f64)],
        omega: f64,
    ) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::InvalidModel("no sites".into()));
        }
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(Error::InvalidModel(format!(
                "Omega = {omega} must be non-negative"
            )));
        }
        let mut terms = Vec::with_capacity(bonds.len() + triangles.len());
        let mut us = Vec::with_capacity(terms.capacity());
        let mut constant = 0.5 * omega * n_sites as f64;
        for &(i, j, u) in bonds {
            if i >= n_sites || j >= n_sites || i == j {
                return Err(Error::InvalidModel(format!("bad bond ({i}, {j})")));
            }
            if !(u >= 0.0) || !u.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "bond coupling {u} must be non-negative"
                )));
            }
            if u > 0.0 {
                terms.push([i, j, NO_SITE]);
                us.push(u);
                constant += 0.25 * u;
            }
        }
        for &(t, u) in triangles {
            let [i, j, k] = t;
            if t.iter().any(|&s| s >= n_sites) || i == j || j == k || i == k {
                return Err(Error::InvalidModel(format!("bad triangle {t:?}")));
            }
            if !(u >= 0.0) || !u.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "triangle coupling {u} must be non-negative"
                )));
            }
            if u > 0.0 {
                terms.push(t);
                us.push(u);
                constant += 0.375 * u;
            }
        }
        let site_weight = 0.5 * omega * n_sites as f64;
        let total_weight = site_weight + us.iter().map(|u| 0.5 * u).sum::<f64>();
        if total_weight <= 0.0 {
            return Err(Error::InvalidModel("Hamiltonian has no terms".into()));
        }
        let term_picker = if us.is_empty() {
            None
        } else {
            WeightedIndex::new(&us).ok()
        };
        Ok(Self {
            n_sites,
            terms,
            term_u: us,
            omega,
            total_weight,
            site_weight,
            term_picker,
            constant,
        })
    }

    /// Lattice model at half-filling detuning with bond vertices.
    pub fn from_model(lat: &Lattice, tbl: &CouplingTable) -> Result<Self> {
        Self::from_model_with(lat, tbl, Vertices::Bond)
    }

    /// Lattice model at half-filling detuning. With [`Vertices::Triangle`] the
    /// nearest-neighbour couplings become triangle terms, provided every bond
    /// lies on exactly two triangles.
    pub fn from_model_with(lat: &Lattice, tbl: &CouplingTable, vertices: Vertices) -> Result<Self> {
        if !tbl.is_half_filling() {
            return Err(Error::InvalidModel(format!(
                "the SSE engine needs the half-filling detuning {} (got {})",
                tbl.half_filling_detuning(),
                tbl.delta
            )));
        }
        let u1 = tbl.shell(1);
        if vertices == Vertices::Triangle && u1 > 0.0 && triangles_cover_bonds(lat) {
            let bonds: Vec<_> = (2..=3)
                .filter(|&s| tbl.shell(s) != 0.0)
                .flat_map(|s| lat.bonds(s).iter().map(move |&(i, j)| (i, j, tbl.shell(s))))
                .collect();
            let tris: Vec<_> = lat.triangles().iter().map(|&t| (t, u1)).collect();
            Self::with_triangles(lat.n_sites(), &bonds, &tris, tbl.omega)
        } else {
            Self::custom(lat.n_sites(), &tbl.weighted_bonds(lat), tbl.omega)
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Interaction terms; two-site terms carry `NO_SITE` as third entry.
    pub fn terms(&self) -> &[[usize; 3]] {
        &self.terms
    }

    /// `C` in `E = C − ⟨n⟩/β`.
    pub fn energy_shift(&self) -> f64 {
        self.constant
    }

    /// Diagonal energy `Σ U Sᶻ Sᶻ` of a basis state.
    pub fn diagonal_energy(&self, spins: &[u8]) -> f64 {
        self.terms
            .iter()
            .zip(&self.term_u)
            .map(|(t, u)| {
                let c = if t[2] == NO_SITE { 0.25 * u } else { 0.375 * u };
                if term_allowed(t, spins) {
                    c - 0.5 * u
                } else {
                    c
                }
            })
            .sum()
    }
}

/// Every nearest-neighbour bond (with multiplicity) is an edge of exactly two
/// lattice triangles.
fn triangles_cover_bonds(lat: &Lattice) -> bool {
    use std::collections::HashMap;
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut count: HashMap<(usize, usize), i64> = HashMap::new();
    for &(i, j) in lat.bonds(1) {
        *count.entry(key(i, j)).or_default() += 2;
    }
    for t in lat.triangles() {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[0], t[2])] {
            *count.entry(key(a, b)).or_default() -= 1;
        }
    }
    count.values().all(|&c| c == 0)
}

/// Restriction of the trial state to one winding sector.
#[derive(Debug, Clone)]
pub(crate) struct SectorGuard {
    lat: Lattice,
    target: WindingNumbers,
    guard_triangles: Vec<usize>,
    guarded: Vec<bool>,
}

impl SectorGuard {
    fn new(lat: &Lattice, target: WindingNumbers) -> Self {
        let mut guard_triangles: Vec<usize> = lat
            .cut_x_links()
            .chain(lat.cut_y_links())
            .flat_map(|l| [lat.links()[l].tail, lat.links()[l].head])
            .collect();
        guard_triangles.sort_unstable();
        guard_triangles.dedup();
        let mut guarded = vec![false; lat.n_sites()];
        for &t in &guard_triangles {
            for s in lat.triangles()[t] {
                guarded[s] = true;
            }
        }
        Self {
            lat: lat.clone(),
            target,
            guard_triangles,
            guarded,
        }
    }

    /// No broken triangle touches a cut and the fluxes match the target.
    fn allows(&self, spins: &[u8]) -> bool {
        let ok = self.guard_triangles.iter().all(|&t| {
            let [a, b, c] = self.lat.triangles()[t].map(|s| spins[s]);
            (a == b) as u8 + (b == c) as u8 + (a == c) as u8 == 1
        });
        ok && gauge::spin_winding(&SpinConfig(spins.to_vec()), &self.lat) == self.target
    }
}

/// Serializable part of a Markov chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub spins: Vec<u8>,
    pub ops: Vec<u32>,
    pub n_ops: usize,
    pub beta: f64,
    pub rng: ChaCha8Rng,
    pub sweeps: u64,
    pub sector: Option<f64>,
}

/// SSE Markov chain: trial state, operator string and RNG.
#[derive(Debug, Clone)]
pub struct Chain {
    pub(crate) ham: SseHamiltonian,
    pub(crate) lat: Option<Lattice>,
    pub(crate) state: ChainState,
    pub(crate) guard: Option<SectorGuard>,
    pub(crate) scratch: update::Scratch,
    pub(crate) translations: Vec<symmetry::Translation>,
}

/// Independent RNG stream `stream` of the generator seeded with `seed`.
pub fn chain_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl Chain {
    pub fn new(
        ham: SseHamiltonian,
        beta: f64,
        initial: SpinConfig,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidRun(format!("beta = {beta} must be positive")));
        }
        if initial.len() != ham.n_sites {
            return Err(Error::SizeMismatch {
                expected: ham.n_sites,
                got: initial.len(),
            });
        }
        // large enough that the first diagonal sweep already fills the string
        let m = 20.max((1.25 * beta * ham.total_weight).ceil() as usize);
        let state = ChainState {
            spins: initial.0,
            ops: vec![IDENTITY; m],
            n_ops: 0,
            beta,
            rng,
            sweeps: 0,
            sector: None,
        };
        Ok(Self {
            ham,
            lat: None,
            state,
            guard: None,
            scratch: Default::default(),
            translations: Vec::new(),
        })
    }

    /// Chain for a lattice model; attaches the lattice for gauge observables.
    pub fn for_lattice(
        lat: &Lattice,
        tbl: &CouplingTable,
        beta: f64,
        initial: SpinConfig,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        Self::for_lattice_with(
            lat,
            SseHamiltonian::from_model(lat, tbl)?,
            beta,
            initial,
            rng,
        )
    }

    /// Lattice chain with a prepared Hamiltonian (e.g. triangle vertices).
    pub fn for_lattice_with(
        lat: &Lattice,
        ham: SseHamiltonian,
        beta: f64,
        initial: SpinConfig,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        initial.check(lat)?;
        let mut c = Self::new(ham, beta, initial, rng)?;
        c.translations = symmetry::translations(lat, &c.ham);
        c.lat = Some(lat.clone());
        Ok(c)
    }

    /// Start from the sector reference state and keep the trial state in the
    /// sector of flux density `f` for the rest of the run.
    pub fn constrain_sector(&mut self, f: f64) -> Result<()> {
        let lat = self
            .lat
            .clone()
            .ok_or_else(|| Error::InvalidRun("sector constraint needs a lattice".into()))?;
        let cfg = sector::sector_reference(&lat, f)?;
        let target = gauge::spin_winding(&cfg, &lat);
        self.state.spins = cfg.0;
        self.state.ops.iter_mut().for_each(|o| *o = IDENTITY);
        self.state.n_ops = 0;
        self.state.sector = Some(f);
        self.guard = Some(SectorGuard::new(&lat, target));
        Ok(())
    }

    pub(crate) fn restore(
        ham: SseHamiltonian,
        lat: Option<Lattice>,
        state: ChainState,
    ) -> Result<Self> {
        if state.spins.len() != ham.n_sites {
            return Err(Error::SizeMismatch {
                expected: ham.n_sites,
                got: state.spins.len(),
            });
        }
        let guard = match (state.sector, &lat) {
            (Some(f), Some(l)) => {
                let target = gauge::spin_winding(&sector::sector_reference(l, f)?, l);
                Some(SectorGuard::new(l, target))
            }
            (Some(_), None) => {
                return Err(Error::Checkpoint("sector state without lattice".into()))
            }
            _ => None,
        };
        let translations = lat
            .as_ref()
            .map_or_else(Vec::new, |l| symmetry::translations(l, &ham));
        let chain = Self {
            ham,
            lat,
            state,
            guard,
            scratch: Default::default(),
            translations,
        };
        chain
            .check_periodic()
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        Ok(chain)
    }

    pub fn hamiltonian(&self) -> &SseHamiltonian {
        &self.ham
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lat.as_ref()
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn beta(&self) -> f64 {
        self.state.beta
    }

    pub fn spins(&self) -> SpinConfig {
        SpinConfig(self.state.spins.clone())
    }

    pub fn n_ops(&self) -> usize {
        self.state.n_ops
    }

    pub fn cutoff(&self) -> usize {
        self.state.ops.len()
    }

    pub fn operators(&self) -> impl Iterator<Item = Operator> + '_ {
        self.state.ops.iter().map(|&o| Operator::decode(o))
    }

    /// Single-sample energy estimate `C − n/β`.
    pub fn energy_estimate(&self) -> f64 {
        self.ham.constant - self.state.n_ops as f64 / self.state.beta
    }

    /// Grow the cutoff to `⌈5n/4⌉` by appending identities.
    pub fn grow_cutoff(&mut self) {
        let want = (5 * self.state.n_ops).div_ceil(4);
        if want > self.state.ops.len() {
            self.state.ops.resize(want, IDENTITY);
        }
    }

    pub fn diagonal_update(&mut self) {
        update::diagonal_update(&self.ham, &mut self.state);
    }

    pub fn cluster_update(&mut self) {
        update::cluster_update(
            &self.ham,
            self.guard.as_ref(),
            &mut self.state,
            &mut self.scratch,
        );
    }

    /// Propagating the trial state through the string must return it.
    pub fn check_periodic(&self) -> Result<()> {
        let mut s = self.state.spins.clone();
        let mut n = 0;
        for &op in &self.state.ops {
            match kind(op) {
                SITE_FLIP => {
                    s[index(op)] ^= 1;
                    n += 1;
                }
                BOND => {
                    if !term_allowed(&self.ham.terms[index(op)], &s) {
                        return Err(Error::InvalidRun(
                            "interaction operator on a zero-weight state".into(),
                        ));
                    }
                    n += 1;
                }
                SITE_DIAG => n += 1,
                _ => {}
            }
        }
        if s != self.state.spins {
            return Err(Error::InvalidRun("operator string is not periodic".into()));
        }
        if n != self.state.n_ops {
            return Err(Error::InvalidRun("operator count out of sync".into()));
        }
        Ok(())
    }

    /// One diagonal update, one cluster update and, for unconstrained
    /// lattice chains, one random lattice translation.
    pub fn sweep(&mut self) {
        self.diagonal_update();
        self.cluster_update();
        if self.guard.is_none() && !self.translations.is_empty() {
            let k = self.state.rng.gen_range(0..self.translations.len());
            self.translations[k].apply(&mut self.state);
        }
        self.state.sweeps += 1;
        debug_assert!(self.check_periodic().is_ok());
    }
}

#[cfg(test)]
mod tests;
