//! Rydberg Hamiltonian parameters and its transverse-field Ising form.
//!
//! Spin convention: `Sᶻ = n − ½`, so `|r⟩` is spin up. Substituting into the
//! Rydberg form gives
//!
//! ```text
//! H_ryd = H_spin + Σ_b U_b/4 − N·δ/2
//! H_spin = Σ_b U_b SᶻSᶻ + (δ½ − δ) Σᵢ Sᶻᵢ − Ω Σᵢ Sˣᵢ
//! ```
//!
//! with `δ½ = ½ Σⱼ U_ij` the particle-hole symmetric detuning.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, SQRT3};

/// Radial interaction profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Interaction {
    /// Bare van der Waals `c6 / r⁶`.
    Vdw { c6: f64 },
    /// Soft-core dressed potential `Ũ₀ / (1 + (r/R_c)⁶)`.
    Dressed { omega_d: f64, delta_d: f64, c6: f64 },
    /// Shell couplings given directly.
    Explicit { u1: f64, u2: f64, u3: f64 },
}

impl Interaction {
    fn at(&self, r: f64) -> f64 {
        match *self {
            Interaction::Vdw { c6 } => c6 / r.powi(6),
            Interaction::Dressed {
                omega_d,
                delta_d,
                c6,
            } => {
                let (u0, rc) = dressed_parameters(omega_d, delta_d, c6);
                u0 / (1.0 + (r / rc).powi(6))
            }
            Interaction::Explicit { .. } => unreachable!("explicit couplings have no profile"),
        }
    }
}

/// `(Ũ₀, R_c)` of the weak-dressing soft-core potential.
pub fn dressed_parameters(omega_d: f64, delta_d: f64, c6: f64) -> (f64, f64) {
    let u0 = (omega_d / (2.0 * delta_d)).powi(4) * 2.0 * delta_d;
    let rc = (c6 / (2.0 * delta_d)).powf(1.0 / 6.0);
    (u0, rc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Rabi frequency Ω.
    pub omega: f64,
    /// Detuning δ; `None` selects the half-filling value.
    pub delta: Option<f64>,
    pub interaction: Interaction,
    /// Lattice spacing a.
    pub spacing: f64,
    /// Last interaction shell kept (1..=3).
    pub truncation: usize,
}

impl ModelParams {
    /// Explicit shell couplings at half filling, truncated after shell 3.
    pub fn explicit(omega: f64, u1: f64, u2: f64, u3: f64) -> Self {
        Self {
            omega,
            delta: None,
            interaction: Interaction::Explicit { u1, u2, u3 },
            spacing: 1.0,
            truncation: 3,
        }
    }

    /// Couplings in units of `U1 = 1` from ratios to Ω.
    pub fn from_omega_ratios(omega: f64, u2_over_omega: f64, u3_over_omega: f64) -> Self {
        Self::explicit(omega, 1.0, u2_over_omega * omega, u3_over_omega * omega)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "omega = {} must be >= 0",
                self.omega
            )));
        }
        if !(1..=3).contains(&self.truncation) {
            return Err(Error::InvalidModel(format!(
                "truncation shell {} outside 1..=3",
                self.truncation
            )));
        }
        if !(self.spacing > 0.0) {
            return Err(Error::InvalidModel(
                "lattice spacing must be positive".into(),
            ));
        }
        match self.interaction {
            Interaction::Vdw { c6 } | Interaction::Dressed { c6, .. } if c6 == 0.0 => {
                return Err(Error::InvalidModel("c6 must be non-zero".into()));
            }
            Interaction::Dressed { delta_d, .. } if delta_d == 0.0 => {
                return Err(Error::InvalidModel(
                    "dressing detuning must be non-zero".into(),
                ));
            }
            _ => {}
        }
        Ok(())
    }
}

/// Shell couplings `U₁, U₂, U₃` (zero beyond the truncation) and detuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingTable {
    pub u: [f64; 3],
    pub omega: f64,
    pub delta: f64,
}

impl CouplingTable {
    pub fn u1(&self) -> f64 {
        self.u[0]
    }

    /// Coupling of shell 1..=3.
    pub fn shell(&self, s: usize) -> f64 {
        self.u[s - 1]
    }

    /// `δ½ = ½ Σ_{j≠i} U_ij = 3 (U₁ + U₂ + U₃)`.
    pub fn half_filling_detuning(&self) -> f64 {
        3.0 * self.u.iter().sum::<f64>()
    }

    /// Coefficient of `Σ Sᶻ` in the spin Hamiltonian.
    pub fn longitudinal_field(&self) -> f64 {
        self.half_filling_detuning() - self.delta
    }

    pub fn is_half_filling(&self) -> bool {
        self.longitudinal_field().abs() <= 1e-12 * self.half_filling_detuning().abs().max(1.0)
    }

    /// Sum of bond couplings over all stored bonds.
    pub fn total_bond_coupling(&self, lat: &Lattice) -> f64 {
        (1..=3)
            .map(|s| self.shell(s) * lat.bonds(s).len() as f64)
            .sum()
    }

    /// `(i, j, U)` for every stored bond with non-zero coupling.
    pub fn weighted_bonds(&self, lat: &Lattice) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for s in 1..=3 {
            let u = self.shell(s);
            if u == 0.0 {
                continue;
            }
            out.extend(lat.bonds(s).iter().map(|&(i, j)| (i, j, u)));
        }
        out
    }

    /// Constant `H_ryd − H_spin`.
    pub fn rydberg_offset(&self, lat: &Lattice) -> f64 {
        0.25 * self.total_bond_coupling(lat) - 0.5 * lat.n_sites() as f64 * self.delta
    }
}

pub fn coupling_table(p: &ModelParams) -> Result<CouplingTable> {
    p.validate()?;
    let mut u = match p.interaction {
        Interaction::Explicit { u1, u2, u3 } => [u1, u2, u3],
        profile => {
            let radii = [1.0, SQRT3, 2.0].map(|r| r * p.spacing);
            radii.map(|r| profile.at(r))
        }
    };
    for s in p.truncation..3 {
        u[s] = 0.0;
    }
    if !(u[0] > 0.0) {
        return Err(Error::InvalidModel(format!(
            "U1 = {} must be positive",
            u[0]
        )));
    }
    let half = 3.0 * u.iter().sum::<f64>();
    Ok(CouplingTable {
        u,
        omega: p.omega,
        delta: p.delta.unwrap_or(half),
    })
}

/// `δ½ = 3 (U₁ + U₂ + U₃)`; the lattice only fixes the six neighbours per shell.
pub fn half_filling_detuning(tbl: &CouplingTable, _lat: &Lattice) -> f64 {
    tbl.half_filling_detuning()
}

/// Rydberg occupations, one per site: 1 = |r⟩ = spin up.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfig(pub Vec<u8>);

impl SpinConfig {
    pub fn all_down(n: usize) -> Self {
        Self(vec![0; n])
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Configuration from the bits of `bits` (site i ↔ bit i).
    pub fn from_bits(bits: u64, n: usize) -> Self {
        Self((0..n).map(|i| ((bits >> i) & 1) as u8).collect())
    }

    pub fn to_bits(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn n(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn sz(&self, i: usize) -> f64 {
        self.0[i] as f64 - 0.5
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] ^= 1;
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|&b| b ^ 1).collect())
    }

    pub fn total_sz(&self) -> f64 {
        self.0.iter().map(|&b| b as f64 - 0.5).sum()
    }

    pub fn check(&self, lat: &Lattice) -> Result<()> {
        if self.len() != lat.n_sites() {
            return Err(Error::SizeMismatch {
                expected: lat.n_sites(),
                got: self.len(),
            });
        }
        Ok(())
    }

    /// Two-sublattice stripe: rows alternate, every a₁ bond frustrated.
    pub fn stripe(lat: &Lattice) -> Self {
        Self(
            (0..lat.n_sites())
                .map(|i| (lat.coords(i).1 % 2) as u8)
                .collect(),
        )
    }

    /// Three-sublattice clock state (↑↑↓ on the `(x − y) mod 3` colouring).
    pub fn clock(lat: &Lattice) -> Self {
        Self(
            (0..lat.n_sites())
                .map(|i| (lat.sublattice3(i) != 2) as u8)
                .collect(),
        )
    }
}

/// Diagonal energy of the spin Hamiltonian.
pub fn classical_energy(cfg: &SpinConfig, tbl: &CouplingTable, lat: &Lattice) -> Result<f64> {
    cfg.check(lat)?;
    let mut e = 0.0;
    for s in 1..=3 {
        let u = tbl.shell(s);
        if u == 0.0 {
            continue;
        }
        let sum: f64 = lat
            .bonds(s)
            .iter()
            .map(|&(i, j)| cfg.sz(i) * cfg.sz(j))
            .sum();
        e += u * sum;
    }
    Ok(e + tbl.longitudinal_field() * cfg.total_sz())
}

/// Diagonal energy of the Rydberg Hamiltonian `Σ U nn − δ Σ n`.
pub fn rydberg_energy(cfg: &SpinConfig, tbl: &CouplingTable, lat: &Lattice) -> Result<f64> {
    cfg.check(lat)?;
    let mut e = 0.0;
    for s in 1..=3 {
        let u = tbl.shell(s);
        let pairs = lat
            .bonds(s)
            .iter()
            .filter(|&&(i, j)| cfg.n(i) == 1 && cfg.n(j) == 1)
            .count();
        e += u * pairs as f64;
    }
    let filled = cfg.0.iter().filter(|&&b| b == 1).count() as f64;
    Ok(e - tbl.delta * filled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn vdw_ratios() {
        let p = ModelParams {
            omega: 1.0,
            delta: None,
            interaction: Interaction::Vdw { c6: 1.0 },
            spacing: 1.0,
            truncation: 3,
        };
        let t = coupling_table(&p).unwrap();
        assert!(approx(t.u[0], 1.0, 1e-14));
        assert!(approx(t.u[1], 1.0 / 27.0, 1e-14));
        assert!(approx(t.u[2], 1.0 / 64.0, 1e-14));
        assert!(t.u[0] > t.u[1] && t.u[1] > t.u[2]);
        let lat = Lattice::new(6, 6).unwrap();
        let d = half_filling_detuning(&t, &lat);
        assert!(approx(d, 3.0 * (1.0 + 1.0 / 27.0 + 1.0 / 64.0), 1e-14));
        assert!((d - 3.158).abs() < 5e-4);
    }

    #[test]
    fn explicit_multicritical_table() {
        let omega = 0.2;
        let p = ModelParams::from_omega_ratios(omega, 0.547, 0.215);
        let t = coupling_table(&p).unwrap();
        assert_eq!(t.u1(), 1.0);
        assert!(approx(t.u[1] / omega, 0.547, 1e-12));
        assert!(approx(t.u[2] / omega, 0.215, 1e-12));
    }

    #[test]
    fn dressed_small_core_reduces_to_vdw() {
        // R_c ≪ a: strong dressing detuning shrinks the soft core
        let p = ModelParams {
            omega: 1.0,
            delta: None,
            interaction: Interaction::Dressed {
                omega_d: 1.0,
                delta_d: 1e4,
                c6: 1.0,
            },
            spacing: 1.0,
            truncation: 3,
        };
        let t = coupling_table(&p).unwrap();
        assert!(approx(t.u[1] / t.u[0], 1.0 / 27.0, 1e-2));
        assert!(approx(t.u[2] / t.u[0], 1.0 / 64.0, 1e-2));
    }

    #[test]
    fn dressed_decays_slower_at_short_distance() {
        let p = ModelParams {
            omega: 1.0,
            delta: None,
            interaction: Interaction::Dressed {
                omega_d: 10.0,
                delta_d: 100.0,
                c6: 1000.0,
            },
            spacing: 1.5,
            truncation: 3,
        };
        let t = coupling_table(&p).unwrap();
        assert!(t.u[1] / t.u[0] > 1.0 / 27.0);
    }

    #[test]
    fn truncation_and_errors() {
        let mut p = ModelParams::explicit(1.0, 1.0, 0.5, 0.2);
        p.truncation = 1;
        let t = coupling_table(&p).unwrap();
        assert_eq!(t.u, [1.0, 0.0, 0.0]);
        p.truncation = 4;
        assert!(coupling_table(&p).is_err());
        let p = ModelParams {
            omega: 1.0,
            delta: None,
            interaction: Interaction::Vdw { c6: 0.0 },
            spacing: 1.0,
            truncation: 3,
        };
        assert!(coupling_table(&p).is_err());
        assert!(coupling_table(&ModelParams::explicit(1.0, 0.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn detuning_examples() {
        let lat = Lattice::new(3, 3).unwrap();
        let t = coupling_table(&ModelParams::explicit(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(half_filling_detuning(&t, &lat), 3.0);
        let t = coupling_table(&ModelParams::explicit(1.0, 1.0, 0.5, 0.2)).unwrap();
        assert!(approx(half_filling_detuning(&t, &lat), 5.1, 1e-14));
    }

    #[test]
    fn all_down_energy() {
        for l in [3, 4, 6] {
            let lat = Lattice::new(l, l).unwrap();
            let t = coupling_table(&ModelParams::explicit(1.0, 1.0, 0.0, 0.0)).unwrap();
            let e = classical_energy(&SpinConfig::all_down(l * l), &t, &lat).unwrap();
            assert!(approx(e, 0.25 * 3.0 * (l * l) as f64, 1e-14));
        }
    }

    #[test]
    fn stripe_is_a_classical_ground_state_on_4x4() {
        let lat = Lattice::new(4, 4).unwrap();
        let t = coupling_table(&ModelParams::explicit(1.0, 1.0, 0.0, 0.0)).unwrap();
        let mut min = f64::INFINITY;
        for bits in 0..(1u64 << 16) {
            let e = classical_energy(&SpinConfig::from_bits(bits, 16), &t, &lat).unwrap();
            min = min.min(e);
        }
        let e = classical_energy(&SpinConfig::stripe(&lat), &t, &lat).unwrap();
        // one frustrated bond per triangle: 2N triangles share each bond twice
        assert!(approx(e, -0.25 * 16.0, 1e-14));
        assert!(approx(e, min, 1e-14));
    }

    #[test]
    fn single_flip_from_all_down() {
        let lat = Lattice::new(6, 6).unwrap();
        let t = coupling_table(&ModelParams::explicit(1.0, 1.0, 0.3, 0.1)).unwrap();
        let base = SpinConfig::all_down(36);
        let mut one = base.clone();
        one.flip(7);
        let de =
            classical_energy(&one, &t, &lat).unwrap() - classical_energy(&base, &t, &lat).unwrap();
        // six neighbours per shell, each bond SᶻSᶻ goes from +¼ to −¼
        let expected = -0.5 * 6.0 * (1.0 + 0.3 + 0.1);
        assert!(approx(de, expected, 1e-12));
    }

    #[test]
    fn size_mismatch() {
        let lat = Lattice::new(3, 3).unwrap();
        let t = coupling_table(&ModelParams::explicit(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert!(classical_energy(&SpinConfig::all_down(8), &t, &lat).is_err());
    }

    proptest! {
        #[test]
        fn particle_hole_symmetry(bits in 0u64..(1 << 36), u2 in 0.0..0.8f64, u3 in 0.0..0.5f64) {
            let lat = Lattice::new(6, 6).unwrap();
            let t = coupling_table(&ModelParams::explicit(0.3, 1.0, u2, u3)).unwrap();
            let c = SpinConfig::from_bits(bits, 36);
            let e1 = classical_energy(&c, &t, &lat).unwrap();
            let e2 = classical_energy(&c.flipped(), &t, &lat).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-12);
        }

        #[test]
        fn rydberg_and_spin_forms_differ_by_constant(
            bits in 0u64..(1 << 36), delta in 0.0..6.0f64, u2 in 0.0..0.8f64,
        ) {
            let lat = Lattice::new(6, 6).unwrap();
            let mut p = ModelParams::explicit(0.3, 1.0, u2, 0.1);
            p.delta = Some(delta);
            let t = coupling_table(&p).unwrap();
            let c = SpinConfig::from_bits(bits, 36);
            let diff = rydberg_energy(&c, &t, &lat).unwrap() - classical_energy(&c, &t, &lat).unwrap();
            prop_assert!((diff - t.rydberg_offset(&lat)).abs() < 1e-10);
        }
    }
}
