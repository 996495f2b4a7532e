//! Reference configurations for fixed topological sectors.
//!
//! A cover with `D` a₁ dimers per row and `W` a₂ dimers per column has
//! `Fₓ = 3D − Lₓ` and `F_y = 3W − L_y`. It lifts to a spin configuration only
//! when `Lₓ − D` and `L_y − W` are both even (going once around the torus
//! must cross an even number of unfrustrated bonds).

use crate::error::{Error, Result};
use crate::gauge::{self, DimerCover, ElectricField};
use crate::lattice::Lattice;
use crate::model::SpinConfig;

/// Cover with `d` a₁ dimers per row and `w` a₂ dimers per column, built from
/// evenly spaced staircases.
pub fn tilted_cover(lat: &Lattice, d: usize, w: usize) -> Result<DimerCover> {
    let (lx, ly) = (lat.lx(), lat.ly());
    if d > lx || w > ly {
        return Err(Error::InvalidRun(format!(
            "tilt ({d}, {w}) exceeds lattice {lx}x{ly}"
        )));
    }
    let mut occ = vec![false; 3 * lat.n_sites()];
    if d == 0 {
        for y in 0..ly {
            let dir = if y < w { 1 } else { 2 };
            for x in 0..lx {
                occ[3 * lat.site(x as i64, y as i64) + dir] = true;
            }
        }
    } else {
        let (lx_, ly_, d_, w_) = (lx as i64, ly as i64, d as i64, w as i64);
        let pos = |j: i64, y: i64| (j * lx_ * ly_ + y * lx_ * w_).div_euclid(d_ * ly_);
        for y in 0..ly_ {
            for j in 0..d_ {
                let s = pos(j, y);
                let k = pos(j, y + 1);
                let next = pos(j + 1, y);
                if k < s || k >= next {
                    return Err(Error::InvalidRun(format!(
                        "tilt ({d}, {w}) has no staircase cover on {lx}x{ly}"
                    )));
                }
                occ[3 * lat.site(s, y)] = true;
                for x in s + 1..=k {
                    occ[3 * lat.site(x, y) + 1] = true;
                }
                for x in k + 1..next {
                    occ[3 * lat.site(x, y) + 2] = true;
                }
            }
        }
    }
    let cover = DimerCover(occ);
    debug_assert!(cover.is_perfect_matching(lat));
    Ok(cover)
}

/// Spin configuration whose frustrated bonds are exactly the cover's dimers,
/// normalised to `n₀ = 1`. The partner configuration is its global flip.
pub fn spins_from_cover(cover: &DimerCover, lat: &Lattice) -> Result<SpinConfig> {
    let (lx, ly) = (lat.lx() as i64, lat.ly() as i64);
    let mut n = vec![0u8; lat.n_sites()];
    n[0] = 1;
    let step = |v: u8, dimer: bool| if dimer { v } else { 1 - v };
    for x in 1..lx {
        let prev = lat.site(x - 1, 0);
        n[lat.site(x, 0)] = step(n[prev], cover.0[3 * prev]);
    }
    for y in 1..ly {
        for x in 0..lx {
            let prev = lat.site(x, y - 1);
            n[lat.site(x, y)] = step(n[prev], cover.0[3 * prev + 1]);
        }
    }
    let cfg = SpinConfig(n);
    let e = gauge::electric_field(&cfg, lat);
    if ElectricField::from_cover(cover) != e {
        return Err(Error::InvalidRun(
            "dimer cover has no spin preimage on this torus".into(),
        ));
    }
    Ok(cfg)
}

fn dimers_per_row(lat: &Lattice, f: f64) -> Result<usize> {
    let lx = lat.lx();
    let unreachable = |reason: &str| Error::UnreachableSector {
        f,
        lx,
        reason: reason.into(),
    };
    if !(-1.0 - 1e-12..=2.0 + 1e-12).contains(&f) {
        return Err(unreachable("f must lie in [-1, 2]"));
    }
    let fx = f * lx as f64;
    let d = (fx + lx as f64) / 3.0;
    if (fx - fx.round()).abs() > 1e-9 || (d - d.round()).abs() > 1e-9 {
        return Err(unreachable(
            "f·Lx must be an integer congruent to -Lx mod 3",
        ));
    }
    let d = d.round() as usize;
    if (lx - d) % 2 != 0 {
        return Err(unreachable("odd number of unfrustrated bonds around a row"));
    }
    Ok(d)
}

/// Column tilt paired with `d`: closest to `(1 − f/2)·L_y/3` with the right
/// parity, ties to the smaller value.
fn dimers_per_column(lat: &Lattice, d: usize, f: f64) -> Option<usize> {
    let ly = lat.ly();
    let target = (1.0 - f / 2.0) * ly as f64 / 3.0;
    let wmax = if d == 0 { ly } else { ly.min(lat.lx() - d) };
    (0..=wmax).filter(|w| (ly - w) % 2 == 0).min_by(|a, b| {
        let da = (*a as f64 - target).abs();
        let db = (*b as f64 - target).abs();
        da.partial_cmp(&db).unwrap().then(a.cmp(b))
    })
}

/// A spin configuration inside the sector of flux density `f`.
///
/// `f = 0` gives the clock state and `f = 2` the stripe state when the
/// lattice admits them; other sectors use staircase covers.
pub fn sector_reference(lat: &Lattice, f: f64) -> Result<SpinConfig> {
    let d = dimers_per_row(lat, f)?;
    if f == 0.0 && lat.lx() % 3 == 0 && lat.ly() % 3 == 0 {
        return Ok(SpinConfig::clock(lat));
    }
    if f == 2.0 && lat.ly() % 2 == 0 {
        return Ok(SpinConfig::stripe(lat));
    }
    let mut candidates: Vec<usize> = dimers_per_column(lat, d, f).into_iter().collect();
    candidates.extend((0..=lat.ly()).filter(|w| (lat.ly() - w) % 2 == 0));
    for w in candidates {
        if let Ok(cover) = tilted_cover(lat, d, w) {
            if let Ok(cfg) = spins_from_cover(&cover, lat) {
                return Ok(cfg);
            }
        }
    }
    Err(Error::UnreachableSector {
        f,
        lx: lat.lx(),
        reason: "no staircase cover".into(),
    })
}

/// Flux densities that have a spin-realisable reference configuration.
pub fn reachable_sectors(lat: &Lattice) -> Vec<f64> {
    let lx = lat.lx();
    (0..=lx)
        .map(|d| (3 * d as i64 - lx as i64) as f64 / lx as f64)
        .filter(|&f| sector_reference(lat, f).is_ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::{electric_field, spin_winding, violated_triangles, winding_flux};

    #[test]
    fn staircase_covers_have_requested_fluxes() {
        let lat = Lattice::new(12, 12).unwrap();
        for (d, w) in [(4, 4), (6, 2), (8, 2), (12, 0), (0, 5), (3, 7), (10, 2)] {
            let c = tilted_cover(&lat, d, w).unwrap();
            assert!(c.is_perfect_matching(&lat), "({d},{w})");
            let wn = winding_flux(&ElectricField::from_cover(&c), &lat);
            assert_eq!((wn.fx, wn.fy), (3 * d as i64 - 12, 3 * w as i64 - 12));
        }
    }

    #[test]
    fn rectangular_staircase() {
        let lat = Lattice::new(6, 4).unwrap();
        let c = tilted_cover(&lat, 2, 2).unwrap();
        assert!(c.is_perfect_matching(&lat));
    }

    #[test]
    fn spin_lift_respects_parity() {
        let lat = Lattice::new(12, 12).unwrap();
        assert!(spins_from_cover(&tilted_cover(&lat, 4, 4).unwrap(), &lat).is_ok());
        assert!(spins_from_cover(&tilted_cover(&lat, 11, 0).unwrap(), &lat).is_err());
        assert!(spins_from_cover(&tilted_cover(&lat, 4, 3).unwrap(), &lat).is_err());
    }

    #[test]
    fn reference_configs_sit_in_their_sectors() {
        let lat = Lattice::new(12, 12).unwrap();
        for f in [0.0, 0.5, 1.0, 1.5, 2.0, -1.0] {
            let cfg = sector_reference(&lat, f).unwrap();
            assert_eq!(violated_triangles(&cfg, &lat), 0);
            assert_eq!(spin_winding(&cfg, &lat).f(&lat), f);
        }
        assert_eq!(
            sector_reference(&lat, 0.0).unwrap(),
            SpinConfig::clock(&lat)
        );
        assert_eq!(
            sector_reference(&lat, 2.0).unwrap(),
            SpinConfig::stripe(&lat)
        );
    }

    #[test]
    fn one_shifted_column_is_not_spin_realisable() {
        let lat = Lattice::new(12, 12).unwrap();
        let err = sector_reference(&lat, 2.0 - 3.0 / 12.0).unwrap_err();
        assert!(matches!(err, Error::UnreachableSector { .. }));
        assert!(sector_reference(&lat, 0.3).is_err());
        assert!(sector_reference(&lat, 2.5).is_err());
    }

    #[test]
    fn reachable_list_on_l12() {
        let lat = Lattice::new(12, 12).unwrap();
        assert_eq!(
            reachable_sectors(&lat),
            vec![-1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]
        );
    }

    #[test]
    fn lifted_spins_reproduce_cover() {
        let lat = Lattice::new(6, 6).unwrap();
        let cover = tilted_cover(&lat, 2, 2).unwrap();
        let cfg = spins_from_cover(&cover, &lat).unwrap();
        assert_eq!(cfg.n(0), 1);
        assert_eq!(
            gauge::dimer_cover(&electric_field(&cfg, &lat), &lat).unwrap(),
            cover
        );
    }
}
