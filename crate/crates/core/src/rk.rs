//! Equal-weight honeycomb dimer ensemble (the RK wavefunction's statistics).
//!
//! Covers are enumerated exhaustively on small tori and sampled with a worm
//! that picks uniformly among the three neighbours of its head.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{self, DimerCover, ElectricField, WindingNumbers};
use crate::lattice::Lattice;
use crate::sector;
use crate::stats::jackknife;

/// Largest dual lattice handled by [`enumerate_covers`].
pub const MAX_ENUMERATION_VERTICES: usize = 24;

/// Perfect matchings of an arbitrary graph given as an edge list.
pub fn perfect_matchings(n_vertices: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut adj = vec![Vec::new(); n_vertices];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((e, b));
        adj[b].push((e, a));
    }
    let mut out = Vec::new();
    let mut used = vec![false; n_vertices];
    let mut chosen = vec![false; edges.len()];
    fn rec(
        adj: &[Vec<(usize, usize)>],
        used: &mut [bool],
        chosen: &mut [bool],
        out: &mut Vec<Vec<bool>>,
    ) {
        let Some(v) = used.iter().position(|&u| !u) else {
            out.push(chosen.to_vec());
            return;
        };
        used[v] = true;
        for &(e, w) in &adj[v] {
            if !used[w] {
                used[w] = true;
                chosen[e] = true;
                rec(adj, used, chosen, out);
                chosen[e] = false;
                used[w] = false;
            }
        }
        used[v] = false;
    }
    rec(&adj, &mut used, &mut chosen, &mut out);
    out
}

/// Every dimer cover of the dual honeycomb lattice.
pub fn enumerate_covers(lat: &Lattice) -> Result<Vec<DimerCover>> {
    if lat.n_dual_vertices() > MAX_ENUMERATION_VERTICES {
        return Err(Error::TooLarge(
            lat.n_dual_vertices(),
            MAX_ENUMERATION_VERTICES,
        ));
    }
    let edges: Vec<(usize, usize)> = lat.links().iter().map(|l| (l.tail, l.head)).collect();
    Ok(perfect_matchings(lat.n_dual_vertices(), &edges)
        .into_iter()
        .map(DimerCover)
        .collect())
}

pub fn winding_of(cover: &DimerCover, lat: &Lattice) -> WindingNumbers {
    gauge::winding_flux(&ElectricField::from_cover(cover), lat)
}

/// Covers grouped by `(Fₓ, F_y)`.
pub fn by_sector(covers: &[DimerCover], lat: &Lattice) -> BTreeMap<(i64, i64), Vec<DimerCover>> {
    let mut m: BTreeMap<(i64, i64), Vec<DimerCover>> = BTreeMap::new();
    for c in covers {
        let w = winding_of(c, lat);
        m.entry((w.fx, w.fy)).or_default().push(c.clone());
    }
    m
}

/// Permanent by Ryser's inclusion–exclusion formula.
pub fn permanent(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 0 {
        return 1.0;
    }
    let mut total = 0.0;
    for subset in 1u64..(1u64 << n) {
        let mut prod = 1.0;
        for row in a {
            let s: f64 = (0..n)
                .filter(|&j| subset >> j & 1 == 1)
                .map(|j| row[j])
                .sum();
            prod *= s;
            if prod == 0.0 {
                break;
            }
        }
        let sign = if (n as u32 - subset.count_ones()) % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        total += sign * prod;
    }
    total
}

/// Up-by-down link-count matrix; its permanent counts the covers.
pub fn biadjacency(lat: &Lattice) -> Vec<Vec<f64>> {
    let n = lat.n_sites();
    let mut a = vec![vec![0.0; n]; n];
    for l in lat.links() {
        a[l.tail][l.head - n] += 1.0;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorPolicy {
    /// Reject worms that change the winding numbers.
    Fixed,
    /// Accept every worm.
    Free,
}

/// Worm sampler of uniformly weighted covers.
#[derive(Debug, Clone)]
pub struct RkSampler {
    lat: Lattice,
    occ: Vec<bool>,
    /// Link holding the dimer at each vertex.
    mate: Vec<usize>,
    policy: SectorPolicy,
    rng: ChaCha8Rng,
    changed: Vec<usize>,
    pub accepted: u64,
    pub rejected: u64,
}

impl RkSampler {
    pub fn new(
        lat: &Lattice,
        initial: DimerCover,
        policy: SectorPolicy,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if initial.0.len() != lat.links().len() || !initial.is_perfect_matching(lat) {
            return Err(Error::InvalidRun(
                "initial configuration is not a dimer cover".into(),
            ));
        }
        let mut mate = vec![usize::MAX; lat.n_dual_vertices()];
        for (l, link) in lat.links().iter().enumerate() {
            if initial.0[l] {
                mate[link.tail] = l;
                mate[link.head] = l;
            }
        }
        Ok(Self {
            lat: lat.clone(),
            occ: initial.0,
            mate,
            policy,
            rng,
            changed: Vec::new(),
            accepted: 0,
            rejected: 0,
        })
    }

    /// Sampler started from the spin-realisable reference cover of sector `f`.
    pub fn in_sector(lat: &Lattice, f: f64, policy: SectorPolicy, rng: ChaCha8Rng) -> Result<Self> {
        let cfg = sector::sector_reference(lat, f)?;
        let cover = gauge::dimer_cover(&gauge::electric_field(&cfg, lat), lat)?;
        Self::new(lat, cover, policy, rng)
    }

    pub fn cover(&self) -> DimerCover {
        DimerCover(self.occ.clone())
    }

    pub fn winding(&self) -> WindingNumbers {
        let fx = self
            .lat
            .cut_x_links()
            .map(|l| if self.occ[l] { 2 } else { -1 })
            .sum();
        let fy = self
            .lat
            .cut_y_links()
            .map(|l| if self.occ[l] { 2 } else { -1 })
            .sum();
        WindingNumbers { fx, fy }
    }

    fn toggle(&mut self, l: usize) {
        self.occ[l] = !self.occ[l];
        self.changed.push(l);
    }

    /// One closed worm; returns the number of dimers moved (0 if rejected).
    pub fn worm(&mut self) -> usize {
        let before = (self.policy == SectorPolicy::Fixed).then(|| self.winding());
        self.changed.clear();
        let nv = self.lat.n_dual_vertices();
        let tail = self.rng.gen_range(0..nv);
        let l0 = self.mate[tail];
        self.toggle(l0);
        let mut head = self.lat.across(l0, tail);
        let mut steps = 0;
        loop {
            let links = self.lat.vertex_links(head);
            let l = links[self.rng.gen_range(0..3)];
            let u = self.lat.across(l, head);
            self.toggle(l);
            self.mate[head] = l;
            steps += 1;
            if u == tail {
                self.mate[u] = l;
                break;
            }
            let old = self.mate[u];
            self.toggle(old);
            self.mate[u] = l;
            head = self.lat.across(old, u);
        }
        if let Some(w) = before {
            if self.winding() != w {
                for k in (0..self.changed.len()).rev() {
                    let l = self.changed[k];
                    self.occ[l] = !self.occ[l];
                }
                for k in 0..self.changed.len() {
                    let l = self.changed[k];
                    if self.occ[l] {
                        let link = self.lat.links()[l];
                        self.mate[link.tail] = l;
                        self.mate[link.head] = l;
                    }
                }
                self.rejected += 1;
                return 0;
            }
        }
        self.accepted += 1;
        debug_assert!(DimerCover(self.occ.clone()).is_perfect_matching(&self.lat));
        steps
    }

    /// Worms until about one move per dual vertex has been made.
    pub fn sweep(&mut self) {
        let target = self.lat.n_dual_vertices();
        let mut moved = 0;
        let mut attempts = 0;
        while moved < target && attempts < 4 * target {
            moved += self.worm();
            attempts += 1;
        }
    }

    pub fn sample(&mut self, n_therm: usize, n_samples: usize, every: usize) -> Vec<DimerCover> {
        for _ in 0..n_therm {
            self.sweep();
        }
        (0..n_samples)
            .map(|_| {
                for _ in 0..every.max(1) {
                    self.sweep();
                }
                self.cover()
            })
            .collect()
    }
}

/// Correlators along a₁ with jackknife errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkCorrelators {
    pub r: Vec<usize>,
    pub c_e: Vec<f64>,
    pub c_e_err: Vec<f64>,
    pub c_r: Vec<f64>,
    pub c_r_err: Vec<f64>,
}

/// Per-sample `(C_E(r), C_R(r))` of one cover.
pub fn cover_correlators(cover: &DimerCover, lat: &Lattice) -> Result<(Vec<f64>, Vec<f64>)> {
    let spins = sector::spins_from_cover(cover, lat)?;
    let e = ElectricField::from_cover(cover);
    let ce = gauge::axis_correlation(&gauge::local_psi_e(&e, lat), lat);
    let psi: Vec<Complex64> = gauge::local_psi_r(&spins, lat);
    Ok((ce, gauge::axis_correlation(&psi, lat)))
}

/// Sample-averaged correlators, jackknifed over `n_blocks` blocks.
pub fn rk_correlators(
    samples: &[DimerCover],
    lat: &Lattice,
    n_blocks: usize,
) -> Result<RkCorrelators> {
    if samples.is_empty() {
        return Err(Error::InvalidRun("no samples".into()));
    }
    let per: Vec<(Vec<f64>, Vec<f64>)> = samples
        .iter()
        .map(|c| cover_correlators(c, lat))
        .collect::<Result<_>>()?;
    let nr = per[0].0.len();
    let nb = n_blocks.clamp(2, samples.len().max(2));
    let block = (samples.len() / nb).max(1);
    let blocks: Vec<(Vec<f64>, Vec<f64>)> = per
        .chunks(block)
        .take(nb)
        .map(|ch| {
            let mut e = vec![0.0; nr];
            let mut r = vec![0.0; nr];
            for (a, b) in ch {
                e.iter_mut()
                    .zip(a)
                    .for_each(|(x, v)| *x += v / ch.len() as f64);
                r.iter_mut()
                    .zip(b)
                    .for_each(|(x, v)| *x += v / ch.len() as f64);
            }
            (e, r)
        })
        .collect();
    let mean_at = |d: &[(Vec<f64>, Vec<f64>)], k: usize, which: bool| {
        d.iter()
            .map(|(e, r)| if which { e[k] } else { r[k] })
            .sum::<f64>()
            / d.len() as f64
    };
    let mut out = RkCorrelators {
        r: (0..nr).collect(),
        c_e: vec![],
        c_e_err: vec![],
        c_r: vec![],
        c_r_err: vec![],
    };
    for k in 0..nr {
        let (m, e) = jackknife(&blocks, |d| mean_at(d, k, true));
        out.c_e.push(m);
        out.c_e_err.push(e);
        let (m, e) = jackknife(&blocks, |d| mean_at(d, k, false));
        out.c_r.push(m);
        out.c_r_err.push(e);
    }
    Ok(out)
}
