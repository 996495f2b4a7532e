//! Spin → gauge-field dictionary.
//!
//! A nearest-neighbour bond is frustrated when both ends carry the same
//! state. The electric field on the dual link crossing it (oriented from the
//! up triangle to the down triangle) is `+2` if frustrated and `−1`
//! otherwise, so a triangle with exactly one frustrated bond is charge free
//! and the `+2` links form a perfect matching of the honeycomb lattice.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::model::SpinConfig;

/// `e^{2πi/3}`.
pub fn omega3() -> Complex64 {
    Complex64::new(-0.5, 0.5 * crate::lattice::SQRT3)
}

pub fn frustrated_bonds(cfg: &SpinConfig, lat: &Lattice) -> Vec<bool> {
    lat.nn_bonds()
        .iter()
        .map(|&(i, j)| cfg.n(i) == cfg.n(j))
        .collect()
}

/// Number of frustrated bonds in each triangle.
pub fn frustration_per_triangle(cfg: &SpinConfig, lat: &Lattice) -> Vec<u8> {
    lat.triangles()
        .iter()
        .map(|t| {
            let [a, b, c] = t.map(|s| cfg.n(s));
            (a == b) as u8 + (b == c) as u8 + (a == c) as u8
        })
        .collect()
}

/// Triangles violating the one-frustrated-bond rule.
pub fn violated_triangles(cfg: &SpinConfig, lat: &Lattice) -> usize {
    frustration_per_triangle(cfg, lat)
        .iter()
        .filter(|&&k| k != 1)
        .count()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectricField(pub Vec<i8>);

pub fn electric_field(cfg: &SpinConfig, lat: &Lattice) -> ElectricField {
    ElectricField(
        lat.nn_bonds()
            .iter()
            .map(|&(i, j)| if cfg.n(i) == cfg.n(j) { 2 } else { -1 })
            .collect(),
    )
}

impl ElectricField {
    pub fn from_cover(cover: &DimerCover) -> Self {
        Self(cover.0.iter().map(|&d| if d { 2 } else { -1 }).collect())
    }
}

/// Lattice divergence: outgoing flux at up triangles, minus incoming at down
/// triangles.
pub fn divergence(e: &ElectricField, lat: &Lattice) -> Vec<i32> {
    let mut q = vec![0i32; lat.n_dual_vertices()];
    for (l, link) in lat.links().iter().enumerate() {
        let v = e.0[l] as i32;
        q[link.tail] += v;
        q[link.head] -= v;
    }
    q
}

/// Fully packed dimer configuration: one flag per dual link.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DimerCover(pub Vec<bool>);

impl DimerCover {
    pub fn is_perfect_matching(&self, lat: &Lattice) -> bool {
        (0..lat.n_dual_vertices())
            .all(|v| lat.vertex_links(v).iter().filter(|&&l| self.0[l]).count() == 1)
    }

    /// Dimer partner of each dual vertex.
    pub fn partners(&self, lat: &Lattice) -> Vec<usize> {
        let mut p = vec![usize::MAX; lat.n_dual_vertices()];
        for (l, link) in lat.links().iter().enumerate() {
            if self.0[l] {
                p[link.tail] = link.head;
                p[link.head] = link.tail;
            }
        }
        p
    }
}

/// `+2` links as a dimer cover; fails with the charged vertices otherwise.
pub fn dimer_cover(e: &ElectricField, lat: &Lattice) -> Result<DimerCover> {
    let bad: Vec<usize> = divergence(e, lat)
        .iter()
        .enumerate()
        .filter(|(_, &q)| q != 0)
        .map(|(v, _)| v)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NotDivergenceFree(bad));
    }
    Ok(DimerCover(e.0.iter().map(|&v| v == 2).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindingNumbers {
    pub fx: i64,
    pub fy: i64,
}

impl WindingNumbers {
    /// Flux density `f = Fₓ / Lₓ`.
    pub fn f(&self, lat: &Lattice) -> f64 {
        self.fx as f64 / lat.lx() as f64
    }
}

/// Fluxes through the reference cuts 𝒞ₓ (row 0) and 𝒞ᵧ (column 0).
pub fn winding_flux(e: &ElectricField, lat: &Lattice) -> WindingNumbers {
    WindingNumbers {
        fx: lat.cut_x_links().map(|l| e.0[l] as i64).sum(),
        fy: lat.cut_y_links().map(|l| e.0[l] as i64).sum(),
    }
}

/// Flux through the a₁ bonds of row `y`.
pub fn flux_x_at_row(e: &ElectricField, lat: &Lattice, y: usize) -> i64 {
    (0..lat.lx())
        .map(|x| e.0[3 * lat.site(x as i64, y as i64)] as i64)
        .sum()
}

/// Flux through the a₂ bonds of column `x`.
pub fn flux_y_at_column(e: &ElectricField, lat: &Lattice, x: usize) -> i64 {
    (0..lat.ly())
        .map(|y| e.0[3 * lat.site(x as i64, y as i64) + 1] as i64)
        .sum()
}

/// Winding numbers straight from spins, without allocating the field.
pub fn spin_winding(cfg: &SpinConfig, lat: &Lattice) -> WindingNumbers {
    let val = |b: usize| {
        let (i, j) = lat.nn_bonds()[b];
        if cfg.n(i) == cfg.n(j) {
            2
        } else {
            -1
        }
    };
    WindingNumbers {
        fx: lat.cut_x_links().map(val).sum(),
        fy: lat.cut_y_links().map(val).sum(),
    }
}

/// Integer height on every hexagonal plaquette (= triangular site).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightField {
    pub h: Vec<i64>,
    /// Height gained along a₁ once around the torus.
    pub offset_x: i64,
    /// Height gained along a₂ once around the torus.
    pub offset_y: i64,
}

/// Height change across link `l` when turning clockwise around its up
/// triangle, expressed as `h(second) − h(first)` for the bond `(first, second)`
/// stored in the lattice tables.
fn height_step(lat: &Lattice, l: usize, occupied: bool) -> i64 {
    let d = if occupied { -2 } else { 1 };
    // clockwise around an up triangle crosses bond dir 0 from its second to
    // its first site, dir 1 from first to second, dir 2 from second to first
    match lat.links()[l].dir {
        1 => d,
        _ => -d,
    }
}

pub fn height_field(cover: &DimerCover, lat: &Lattice) -> Result<HeightField> {
    let (lx, ly) = (lat.lx() as i64, lat.ly() as i64);
    let n = lat.n_sites();
    let mut h = vec![0i64; n];
    for x in 1..lx {
        let prev = lat.site(x - 1, 0);
        h[lat.site(x, 0)] = h[prev] + height_step(lat, 3 * prev, cover.0[3 * prev]);
    }
    for y in 1..ly {
        for x in 0..lx {
            let prev = lat.site(x, y - 1);
            h[lat.site(x, y)] = h[prev] + height_step(lat, 3 * prev + 1, cover.0[3 * prev + 1]);
        }
    }
    let last = lat.site(lx - 1, 0);
    let offset_x = h[last] + height_step(lat, 3 * last, cover.0[3 * last]);
    let top = lat.site(0, ly - 1);
    let offset_y = h[top] + height_step(lat, 3 * top + 1, cover.0[3 * top + 1]);

    // every bond, with the torus winding of its unwrapped endpoint
    for i in 0..n {
        let (x, y) = lat.coords(i);
        let (x, y) = (x as i64, y as i64);
        let ends = [
            ((x, y), (x + 1, y)),
            ((x, y), (x, y + 1)),
            ((x + 1, y), (x, y + 1)),
        ];
        for (dir, &(a, b)) in ends.iter().enumerate() {
            let l = 3 * i + dir;
            let lift = |(px, py): (i64, i64)| {
                let s = lat.site(px, py);
                h[s] + px.div_euclid(lx) * offset_x + py.div_euclid(ly) * offset_y
            };
            if lift(b) - lift(a) != height_step(lat, l, cover.0[l]) {
                return Err(Error::InconsistentHeight(i));
            }
        }
    }
    Ok(HeightField {
        h,
        offset_x,
        offset_y,
    })
}

/// `Σᵢ (nᵢ − ½) e^{iQ·rᵢ}`.
pub fn density_fourier(cfg: &SpinConfig, lat: &Lattice, q: [f64; 2]) -> Complex64 {
    (0..lat.n_sites())
        .map(|i| {
            let r = lat.position(i);
            Complex64::from_polar(cfg.sz(i), q[0] * r[0] + q[1] * r[1])
        })
        .sum()
}

/// Precomputed `e^{iQ·rᵢ}` for a fixed list of momenta.
#[derive(Debug, Clone)]
pub struct PhaseTable {
    pub momenta: Vec<[f64; 2]>,
    phases: Vec<Vec<Complex64>>,
}

impl PhaseTable {
    pub fn sites(lat: &Lattice, momenta: &[[f64; 2]]) -> Self {
        let pos: Vec<[f64; 2]> = (0..lat.n_sites()).map(|i| lat.position(i)).collect();
        Self::at_positions(&pos, momenta)
    }

    /// Phases at the up-triangle (dual A) vertices.
    pub fn a_vertices(lat: &Lattice, momenta: &[[f64; 2]]) -> Self {
        let pos: Vec<[f64; 2]> = (0..lat.n_sites()).map(|v| lat.dual_position(v)).collect();
        Self::at_positions(&pos, momenta)
    }

    fn at_positions(pos: &[[f64; 2]], momenta: &[[f64; 2]]) -> Self {
        let phases = momenta
            .iter()
            .map(|q| {
                pos.iter()
                    .map(|r| Complex64::from_polar(1.0, q[0] * r[0] + q[1] * r[1]))
                    .collect()
            })
            .collect();
        Self {
            momenta: momenta.to_vec(),
            phases,
        }
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    /// `Σᵢ values[i] e^{iQₖ·rᵢ}` for every momentum k.
    pub fn transform(&self, values: &[f64]) -> Vec<Complex64> {
        self.phases
            .iter()
            .map(|ph| ph.iter().zip(values).map(|(p, &v)| p * v).sum())
            .collect()
    }
}

/// Single-sample `S(Q) = |Σ (n − ½) e^{iQr}|² / N` at each momentum.
pub fn structure_factor_sample(cfg: &SpinConfig, table: &PhaseTable) -> Vec<f64> {
    let sz: Vec<f64> = (0..cfg.len()).map(|i| cfg.sz(i)).collect();
    let n = cfg.len() as f64;
    table
        .transform(&sz)
        .iter()
        .map(|z| z.norm_sqr() / n)
        .collect()
}

/// Sample-averaged structure factor.
pub fn structure_factor(samples: &[SpinConfig], lat: &Lattice, momenta: &[[f64; 2]]) -> Vec<f64> {
    let table = PhaseTable::sites(lat, momenta);
    let mut acc = vec![0.0; momenta.len()];
    for cfg in samples {
        for (a, s) in acc.iter_mut().zip(structure_factor_sample(cfg, &table)) {
            *a += s;
        }
    }
    let m = samples.len().max(1) as f64;
    acc.iter().map(|a| a / m).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderParameterSample {
    /// Clock order parameter, `|ψ_R| ≤ 1`.
    pub psi_r: Complex64,
    /// Electric-field order parameter averaged over up triangles.
    pub psi_e: Complex64,
}

/// `ψ_R` on each up triangle from its three (distinct-sublattice) sites.
pub fn local_psi_r(cfg: &SpinConfig, lat: &Lattice) -> Vec<Complex64> {
    let w = [Complex64::new(1.0, 0.0), omega3(), omega3().conj()];
    lat.triangles()[..lat.n_sites()]
        .iter()
        .map(|t| t.iter().map(|&s| w[lat.sublattice3(s)] * cfg.sz(s)).sum())
        .collect()
}

/// `ψ_E = E_b₁ + E_b₂ e^{−2πi/3} + E_b₃ e^{2πi/3}` on each up triangle.
pub fn local_psi_e(e: &ElectricField, lat: &Lattice) -> Vec<Complex64> {
    let w = [Complex64::new(1.0, 0.0), omega3().conj(), omega3()];
    (0..lat.n_sites())
        .map(|v| {
            lat.vertex_links(v)
                .iter()
                .enumerate()
                .map(|(dir, &l)| w[dir] * e.0[l] as f64)
                .sum()
        })
        .collect()
}

pub fn order_params(cfg: &SpinConfig, lat: &Lattice) -> OrderParameterSample {
    let n = lat.n_sites() as f64;
    let w = [Complex64::new(1.0, 0.0), omega3(), omega3().conj()];
    let psi_r: Complex64 = (0..lat.n_sites())
        .map(|i| w[lat.sublattice3(i)] * cfg.sz(i))
        .sum::<Complex64>()
        * (3.0 / n);
    let e = electric_field(cfg, lat);
    let psi_e = local_psi_e(&e, lat).iter().sum::<Complex64>() / n;
    OrderParameterSample { psi_r, psi_e }
}

/// `C(r) = ⟨Re ψ*(R) ψ(R + r·a₁)⟩_R` for `r = 0..=lx/2`.
pub fn axis_correlation(field: &[Complex64], lat: &Lattice) -> Vec<f64> {
    let rmax = lat.lx() / 2;
    let n = lat.n_sites();
    (0..=rmax)
        .map(|r| {
            let s: f64 = (0..n)
                .map(|i| {
                    let (x, y) = lat.coords(i);
                    let j = lat.site((x + r) as i64, y as i64);
                    (field[i].conj() * field[j]).re
                })
                .sum();
            s / n as f64
        })
        .collect()
}

/// Single-configuration `(C_E(r), C_R(r))` along a₁.
pub fn correlators_sample(cfg: &SpinConfig, lat: &Lattice) -> (Vec<f64>, Vec<f64>) {
    let e = electric_field(cfg, lat);
    (
        axis_correlation(&local_psi_e(&e, lat), lat),
        axis_correlation(&local_psi_r(cfg, lat), lat),
    )
}

/// Sample-averaged `(C_E(r), C_R(r))`.
pub fn correlators(samples: &[SpinConfig], lat: &Lattice) -> (Vec<f64>, Vec<f64>) {
    let len = lat.lx() / 2 + 1;
    let (mut ce, mut cr) = (vec![0.0; len], vec![0.0; len]);
    for s in samples {
        let (a, b) = correlators_sample(s, lat);
        ce.iter_mut().zip(a).for_each(|(x, v)| *x += v);
        cr.iter_mut().zip(b).for_each(|(x, v)| *x += v);
    }
    let m = samples.len().max(1) as f64;
    (
        ce.iter().map(|x| x / m).collect(),
        cr.iter().map(|x| x / m).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{MomentumGrid, K_POINT, M_POINT};
    use proptest::prelude::*;

    fn lat(l: usize) -> Lattice {
        Lattice::new(l, l).unwrap()
    }

    #[test]
    fn all_up_is_fully_frustrated() {
        let lat = lat(6);
        let c = SpinConfig::all_up(36);
        assert!(frustrated_bonds(&c, &lat).iter().all(|&f| f));
        let q = divergence(&electric_field(&c, &lat), &lat);
        for (v, &qv) in q.iter().enumerate() {
            assert_eq!(qv, if v < 36 { 6 } else { -6 });
        }
        assert!(dimer_cover(&electric_field(&c, &lat), &lat).is_err());
    }

    #[test]
    fn clock_has_one_frustrated_bond_per_triangle() {
        let lat = lat(6);
        let c = SpinConfig::clock(&lat);
        assert!(frustration_per_triangle(&c, &lat).iter().all(|&k| k == 1));
        assert!(divergence(&electric_field(&c, &lat), &lat)
            .iter()
            .all(|&q| q == 0));
    }

    #[test]
    fn frustration_matches_direct_recomputation() {
        let lat = lat(3);
        for bits in [0u64, 0b101_011_110, 0b111_000_101, 0b010_101_010] {
            let c = SpinConfig::from_bits(bits, 9);
            let fb = frustrated_bonds(&c, &lat);
            for (b, &(i, j)) in lat.nn_bonds().iter().enumerate() {
                let (xi, yi) = (i % 3, i / 3);
                let (xj, yj) = (j % 3, j / 3);
                let same = (bits >> (xi + 3 * yi)) & 1 == (bits >> (xj + 3 * yj)) & 1;
                assert_eq!(fb[b], same);
            }
        }
    }

    #[test]
    fn charge_free_iff_triangle_rule_exhaustive_3x3() {
        let lat = lat(3);
        for bits in 0..(1u64 << 9) {
            let c = SpinConfig::from_bits(bits, 9);
            let q = divergence(&electric_field(&c, &lat), &lat);
            let rule = frustration_per_triangle(&c, &lat);
            for v in 0..18 {
                assert_eq!(q[v] == 0, rule[v] == 1);
            }
        }
    }

    #[test]
    fn sector_labels_of_ordered_states() {
        let lat = lat(6);
        let clock = electric_field(&SpinConfig::clock(&lat), &lat);
        assert_eq!(winding_flux(&clock, &lat).f(&lat), 0.0);
        let stripe = electric_field(&SpinConfig::stripe(&lat), &lat);
        assert_eq!(winding_flux(&stripe, &lat).f(&lat), 2.0);
        for cfg in [SpinConfig::clock(&lat), SpinConfig::stripe(&lat)] {
            assert_eq!(
                spin_winding(&cfg, &lat),
                winding_flux(&electric_field(&cfg, &lat), &lat)
            );
        }
    }

    #[test]
    fn parallel_cuts_carry_equal_flux() {
        let lat = lat(6);
        for cfg in [SpinConfig::clock(&lat), SpinConfig::stripe(&lat)] {
            let e = electric_field(&cfg, &lat);
            let w = winding_flux(&e, &lat);
            for k in 0..6 {
                assert_eq!(flux_x_at_row(&e, &lat, k), w.fx);
                assert_eq!(flux_y_at_column(&e, &lat, k), w.fy);
            }
        }
    }

    #[test]
    fn stripe_cover_is_parallel_columns() {
        let lat = lat(6);
        let cover = dimer_cover(&electric_field(&SpinConfig::stripe(&lat), &lat), &lat).unwrap();
        for (l, link) in lat.links().iter().enumerate() {
            assert_eq!(cover.0[l], link.dir == 0);
        }
    }

    #[test]
    fn clock_cover_is_period_three_star_pattern() {
        let lat = lat(6);
        let cover = dimer_cover(&electric_field(&SpinConfig::clock(&lat), &lat), &lat).unwrap();
        assert!(cover.is_perfect_matching(&lat));
        // invariant under translation by three sites along a₁ and along a₂
        for i in 0..36 {
            let (x, y) = lat.coords(i);
            for (dx, dy) in [(3, 0), (0, 3), (1, 1)] {
                let j = lat.site((x + dx) as i64, (y + dy) as i64);
                for d in 0..3 {
                    assert_eq!(cover.0[3 * i + d], cover.0[3 * j + d]);
                }
            }
        }
        // each orientation occupies a third of its links
        for d in 0..3 {
            let k = (0..36).filter(|&i| cover.0[3 * i + d]).count();
            assert_eq!(k, 12);
        }
    }

    #[test]
    fn height_of_clock_is_flat_and_stripe_is_tilted() {
        let lat = lat(6);
        let clock = dimer_cover(&electric_field(&SpinConfig::clock(&lat), &lat), &lat).unwrap();
        let h = height_field(&clock, &lat).unwrap();
        assert_eq!((h.offset_x, h.offset_y), (0, 0));
        let stripe = dimer_cover(&electric_field(&SpinConfig::stripe(&lat), &lat), &lat).unwrap();
        let h = height_field(&stripe, &lat).unwrap();
        let w = winding_flux(&ElectricField::from_cover(&stripe), &lat);
        assert_eq!(h.offset_x, 12);
        assert_eq!((h.offset_x, h.offset_y), (w.fx, -w.fy));
    }

    #[test]
    fn height_rejects_broken_cover() {
        let lat = lat(6);
        let mut cover =
            dimer_cover(&electric_field(&SpinConfig::stripe(&lat), &lat), &lat).unwrap();
        cover.0[4] = true;
        assert!(height_field(&cover, &lat).is_err());
    }

    #[test]
    fn clock_structure_factor_peak() {
        let lat = lat(6);
        let n = 36.0f64;
        // ↑↑↓ with Sᶻ = ±½: Σ Sᶻ e^{iKr} = (N/3)·½·(1 + ω − ω̄)·phase, modulus N/3
        let s = structure_factor(&[SpinConfig::clock(&lat)], &lat, &[K_POINT]);
        assert!((s[0] - (n / 3.0).powi(2) / n).abs() < 1e-10);
    }

    #[test]
    fn stripe_peaks_at_m() {
        let lat = lat(6);
        let stripe = SpinConfig::stripe(&lat);
        let grid = MomentumGrid::new(6, 6);
        let s = structure_factor(&[stripe], &lat, grid.points());
        let (imax, smax) = s
            .iter()
            .enumerate()
            .fold((0, 0.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert!((smax - 36.0 / 4.0).abs() < 1e-10);
        let m_equiv = [
            M_POINT,
            [0.0, 2.0 * std::f64::consts::PI / crate::lattice::SQRT3],
        ];
        assert!(m_equiv
            .iter()
            .any(|&m| crate::lattice::reciprocal_distance(grid.points()[imax], m) < 1e-9));
        let sk = structure_factor(&[SpinConfig::stripe(&lat)], &lat, &[K_POINT]);
        assert!(sk[0].abs() < 1e-12);
    }

    #[test]
    fn psi_r_transforms_under_translation() {
        let lat = lat(6);
        let c = SpinConfig::clock(&lat);
        let shifted = SpinConfig(
            (0..36)
                .map(|i| {
                    let (x, y) = lat.coords(i);
                    c.n(lat.site(x as i64 - 1, y as i64))
                })
                .collect(),
        );
        let a = order_params(&c, &lat).psi_r;
        let b = order_params(&shifted, &lat).psi_r;
        assert!((a.norm() - 1.0).abs() < 1e-12);
        let ratio = b / a;
        let w = omega3();
        assert!((ratio - w).norm() < 1e-12 || (ratio - w.conj()).norm() < 1e-12);
    }

    #[test]
    fn clock_correlators_are_long_ranged() {
        let lat = lat(6);
        let (ce, cr) = correlators(&[SpinConfig::clock(&lat)], &lat);
        assert!(cr.iter().all(|&v| (v - 1.0).abs() < 1e-12));
        // one dimer per up triangle, ψ_E = 3ω^d rotating with period 3 along a₁
        assert!((ce[0] - 9.0).abs() < 1e-12 && (ce[3] - 9.0).abs() < 1e-12);
        assert!((ce[1] + 4.5).abs() < 1e-12 && (ce[2] + 4.5).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn structure_factor_sum_rule_and_symmetry(bits in 0u64..(1 << 36)) {
            let lat = lat(6);
            let grid = MomentumGrid::new(6, 6);
            let c = SpinConfig::from_bits(bits, 36);
            let s = structure_factor(&[c], &lat, grid.points());
            let total: f64 = s.iter().sum();
            prop_assert!((total - 36.0 / 4.0).abs() < 1e-9);
            for i in 0..grid.len() {
                prop_assert!((s[i] - s[grid.negate(i)]).abs() < 1e-9);
            }
        }

        #[test]
        fn psi_r_bounded(bits in 0u64..(1 << 36)) {
            let lat = lat(6);
            let p = order_params(&SpinConfig::from_bits(bits, 36), &lat);
            prop_assert!(p.psi_r.norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn height_closes_on_valid_covers(bits in 0u64..(1 << 9)) {
            // every triangle-rule configuration yields a consistent height
            let lat = lat(3);
            let c = SpinConfig::from_bits(bits, 9);
            if violated_triangles(&c, &lat) == 0 {
                let e = electric_field(&c, &lat);
                let cover = dimer_cover(&e, &lat).unwrap();
                let h = height_field(&cover, &lat).unwrap();
                let w = winding_flux(&e, &lat);
                prop_assert_eq!((h.offset_x, h.offset_y), (w.fx, -w.fy));
            }
        }
    }
}
