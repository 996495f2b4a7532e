//! Periodic triangular lattice, its dual honeycomb lattice and momentum grid.
//!
//! Sites sit at `r = x·a₁ + y·a₂` with `a₁ = (1, 0)` and `a₂ = (1/2, √3/2)`,
//! indexed row-major as `x + lx·y`. Every site owns three nearest-neighbour
//! bonds:
//!
//! - direction 0: `(x, y) – (x+1, y)` (along a₁)
//! - direction 1: `(x, y) – (x, y+1)` (along a₂)
//! - direction 2: `(x+1, y) – (x, y+1)` (along a₂ − a₁)
//!
//! All three belong to the up triangle `(x, y)`, so shell-1 bond `3·site + dir`
//! is crossed by dual link `3·site + dir`, whose tail is the up triangle
//! (dual A sublattice) and whose head is a down triangle (dual B sublattice).

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Displacements `(dx, dy)` generating the three bond shells.
const SHELL_VECTORS: [[(i64, i64); 3]; 3] = [
    [(1, 0), (0, 1), (-1, 1)],
    [(1, 1), (-1, 2), (2, -1)],
    [(2, 0), (0, 2), (-2, 2)],
];

/// Oriented link of the dual honeycomb lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DualLink {
    /// Up triangle (A sublattice), index in `0..n_sites`.
    pub tail: usize,
    /// Down triangle (B sublattice), index in `n_sites..2·n_sites`.
    pub head: usize,
    /// Index of the crossed shell-1 bond.
    pub bond: usize,
    /// Orientation class b₁, b₂, b₃ (0, 1, 2).
    pub dir: usize,
}

#[derive(Debug, Clone)]
pub struct Lattice {
    lx: usize,
    ly: usize,
    shells: [Vec<(usize, usize)>; 3],
    triangles: Vec<[usize; 3]>,
    links: Vec<DualLink>,
    vertex_links: Vec<[usize; 3]>,
}

impl Lattice {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        if lx < 3 || ly < 3 {
            return Err(Error::InvalidLattice(format!(
                "{lx}x{ly}: both extents must be at least 3"
            )));
        }
        let n = lx * ly;
        let idx = |x: i64, y: i64| -> usize {
            let xm = x.rem_euclid(lx as i64) as usize;
            let ym = y.rem_euclid(ly as i64) as usize;
            xm + lx * ym
        };

        let mut shells: [Vec<(usize, usize)>; 3] = Default::default();
        for (s, vectors) in SHELL_VECTORS.iter().enumerate() {
            let list = &mut shells[s];
            list.reserve(3 * n);
            for i in 0..n {
                let (x, y) = ((i % lx) as i64, (i / lx) as i64);
                for &(dx, dy) in vectors {
                    if s == 0 && dx == -1 {
                        // direction 2 runs from (x+1, y) to (x, y+1)
                        list.push((idx(x + 1, y), idx(x, y + 1)));
                    } else {
                        list.push((i, idx(x + dx, y + dy)));
                    }
                }
            }
        }

        let mut triangles = Vec::with_capacity(2 * n);
        for i in 0..n {
            let (x, y) = ((i % lx) as i64, (i / lx) as i64);
            triangles.push([i, idx(x + 1, y), idx(x, y + 1)]);
        }
        for i in 0..n {
            let (x, y) = ((i % lx) as i64, (i / lx) as i64);
            triangles.push([idx(x + 1, y), idx(x, y + 1), idx(x + 1, y + 1)]);
        }

        let mut links = Vec::with_capacity(3 * n);
        let mut vertex_links = vec![[usize::MAX; 3]; 2 * n];
        for i in 0..n {
            let (x, y) = ((i % lx) as i64, (i / lx) as i64);
            let heads = [n + idx(x, y - 1), n + idx(x - 1, y), n + i];
            for (dir, &head) in heads.iter().enumerate() {
                let id = 3 * i + dir;
                links.push(DualLink {
                    tail: i,
                    head,
                    bond: id,
                    dir,
                });
                vertex_links[i][dir] = id;
                vertex_links[head][dir] = id;
            }
        }

        Ok(Self {
            lx,
            ly,
            shells,
            triangles,
            links,
            vertex_links,
        })
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.ly
    }

    pub fn n_sites(&self) -> usize {
        self.lx * self.ly
    }

    pub fn site(&self, x: i64, y: i64) -> usize {
        let xm = x.rem_euclid(self.lx as i64) as usize;
        let ym = y.rem_euclid(self.ly as i64) as usize;
        xm + self.lx * ym
    }

    /// Integer lattice coordinates `(x, y)` of a site.
    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site % self.lx, site / self.lx)
    }

    /// Cartesian position in units of the lattice spacing.
    pub fn position(&self, site: usize) -> [f64; 2] {
        let (x, y) = self.coords(site);
        [x as f64 + 0.5 * y as f64, 0.5 * SQRT3 * y as f64]
    }

    /// Three-colouring used by the clock order parameter: `(x − y) mod 3`.
    pub fn sublattice3(&self, site: usize) -> usize {
        let (x, y) = self.coords(site);
        (x + 3 * self.ly - y % 3) % 3
    }

    /// Bonds of shell 1, 2 or 3 (3·N each).
    pub fn bonds(&self, shell: usize) -> &[(usize, usize)] {
        &self.shells[shell - 1]
    }

    /// Nearest-neighbour bonds; index `3·site + dir`.
    pub fn nn_bonds(&self) -> &[(usize, usize)] {
        &self.shells[0]
    }

    /// Up triangles occupy `0..N`, down triangles `N..2N`; the triangle index
    /// equals the dual vertex index.
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn n_dual_vertices(&self) -> usize {
        2 * self.n_sites()
    }

    pub fn links(&self) -> &[DualLink] {
        &self.links
    }

    /// The three links meeting at a dual vertex, ordered by orientation class.
    pub fn vertex_links(&self, vertex: usize) -> [usize; 3] {
        self.vertex_links[vertex]
    }

    pub fn is_a_vertex(&self, vertex: usize) -> bool {
        vertex < self.n_sites()
    }

    /// The other endpoint of `link` seen from `vertex`.
    pub fn across(&self, link: usize, vertex: usize) -> usize {
        let l = &self.links[link];
        if l.tail == vertex {
            l.head
        } else {
            l.tail
        }
    }

    /// Cartesian position of a dual vertex (triangle centre).
    pub fn dual_position(&self, vertex: usize) -> [f64; 2] {
        let n = self.n_sites();
        let (x, y) = self.coords(vertex % n);
        let (fx, fy) = (x as f64, y as f64);
        if vertex < n {
            [fx + 0.5 * fy + 0.5, 0.5 * SQRT3 * (fy + 1.0 / 3.0)]
        } else {
            [fx + 0.5 * fy + 1.0, 0.5 * SQRT3 * (fy + 2.0 / 3.0)]
        }
    }

    /// Minimum-image displacement in lattice units.
    pub fn min_image(&self, i: usize, j: usize) -> (i64, i64, i64) {
        let (xi, yi) = self.coords(i);
        let (xj, yj) = self.coords(j);
        let (lx, ly) = (self.lx as i64, self.ly as i64);
        let mut best = (0, 0, i64::MAX);
        for kx in -1..=1 {
            for ky in -1..=1 {
                let dx = (xj as i64 - xi as i64).rem_euclid(lx) + kx * lx;
                let dy = (yj as i64 - yi as i64).rem_euclid(ly) + ky * ly;
                // |dx a1 + dy a2|^2 = dx^2 + dx dy + dy^2
                let d2 = dx * dx + dx * dy + dy * dy;
                if d2 < best.2 {
                    best = (dx, dy, d2);
                }
            }
        }
        best
    }

    /// Shell (1, 2 or 3) of a site pair by minimum-image distance.
    pub fn shell_of(&self, i: usize, j: usize) -> Option<usize> {
        if i == j {
            return None;
        }
        match self.min_image(i, j).2 {
            1 => Some(1),
            3 => Some(2),
            4 => Some(3),
            _ => None,
        }
    }

    /// Index of the shell-1 bond joining `i` and `j`.
    pub fn nn_bond_index(&self, i: usize, j: usize) -> Result<usize> {
        if self.shell_of(i, j) != Some(1) {
            return Err(Error::NotNearestNeighbour(i, j));
        }
        let (dx, dy, _) = self.min_image(i, j);
        let (x, y) = self.coords(i);
        let (x, y) = (x as i64, y as i64);
        let b = match (dx, dy) {
            (1, 0) => 3 * i,
            (-1, 0) => 3 * j,
            (0, 1) => 3 * i + 1,
            (0, -1) => 3 * j + 1,
            (-1, 1) => 3 * self.site(x - 1, y) + 2,
            (1, -1) => 3 * self.site(x, y - 1) + 2,
            _ => unreachable!("shell-1 displacement"),
        };
        Ok(b)
    }

    /// Dual link crossing the nearest-neighbour bond `(i, j)`.
    pub fn dual_link_for_bond(&self, i: usize, j: usize) -> Result<DualLink> {
        Ok(self.links[self.nn_bond_index(i, j)?])
    }

    /// Links crossed by the reference cut 𝒞ₓ: the a₁ bonds of row 0.
    pub fn cut_x_links(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.lx).map(move |x| 3 * x)
    }

    /// Links crossed by the reference cut 𝒞ᵧ: the a₂ bonds of column 0.
    pub fn cut_y_links(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ly).map(move |y| 3 * (self.lx * y) + 1)
    }

    pub fn momentum_grid(&self) -> MomentumGrid {
        MomentumGrid::new(self.lx, self.ly)
    }
}

/// Allowed momenta `q = (m/lx)·b₁ + (n/ly)·b₂` in Cartesian form.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    lx: usize,
    ly: usize,
    points: Vec<[f64; 2]>,
}

/// Reciprocal basis with `aᵢ·bⱼ = 2π δᵢⱼ`.
pub const B1: [f64; 2] = [2.0 * PI, -2.0 * PI / SQRT3];
pub const B2: [f64; 2] = [0.0, 4.0 * PI / SQRT3];

pub const GAMMA: [f64; 2] = [0.0, 0.0];
pub const K_POINT: [f64; 2] = [4.0 * PI / 3.0, 0.0];
pub const M_POINT: [f64; 2] = [PI, -PI / SQRT3];

impl MomentumGrid {
    pub fn new(lx: usize, ly: usize) -> Self {
        let mut points = Vec::with_capacity(lx * ly);
        for n in 0..ly {
            for m in 0..lx {
                points.push(Self::from_fractions(
                    m as f64 / lx as f64,
                    n as f64 / ly as f64,
                ));
            }
        }
        Self { lx, ly, points }
    }

    fn from_fractions(u: f64, v: f64) -> [f64; 2] {
        [u * B1[0] + v * B2[0], u * B1[1] + v * B2[1]]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Index `m + lx·n` of the grid point equivalent to `q`, if any.
    pub fn index_of(&self, q: [f64; 2]) -> Option<usize> {
        let (u, v) = fractions(q);
        let m = u * self.lx as f64;
        let n = v * self.ly as f64;
        if (m - m.round()).abs() > 1e-8 || (n - n.round()).abs() > 1e-8 {
            return None;
        }
        let m = (m.round() as i64).rem_euclid(self.lx as i64) as usize;
        let n = (n.round() as i64).rem_euclid(self.ly as i64) as usize;
        Some(m + self.lx * n)
    }

    /// Index of the grid point `-q`.
    pub fn negate(&self, idx: usize) -> usize {
        let (m, n) = (idx % self.lx, idx / self.lx);
        (self.lx - m) % self.lx + self.lx * ((self.ly - n) % self.ly)
    }

    /// Smallest step between neighbouring grid points.
    pub fn spacing(&self) -> f64 {
        let s1 = norm(B1) / self.lx as f64;
        let s2 = norm(B2) / self.ly as f64;
        s1.min(s2)
    }
}

/// Components `(q·a₁, q·a₂) / 2π`.
pub fn fractions(q: [f64; 2]) -> (f64, f64) {
    let qa1 = q[0];
    let qa2 = 0.5 * q[0] + 0.5 * SQRT3 * q[1];
    (qa1 / (2.0 * PI), qa2 / (2.0 * PI))
}

pub fn norm(q: [f64; 2]) -> f64 {
    (q[0] * q[0] + q[1] * q[1]).sqrt()
}

/// Distance between `p` and `q` modulo the reciprocal lattice.
pub fn reciprocal_distance(p: [f64; 2], q: [f64; 2]) -> f64 {
    let d = [p[0] - q[0], p[1] - q[1]];
    let (u, v) = fractions(d);
    let (u0, v0) = (u - u.round(), v - v.round());
    let mut best = f64::INFINITY;
    for du in -1..=1 {
        for dv in -1..=1 {
            let uu = u0 + du as f64;
            let vv = v0 + dv as f64;
            let c = [uu * B1[0] + vv * B2[0], uu * B1[1] + vv * B2[1]];
            best = best.min(norm(c));
        }
    }
    best
}

/// The twelve images of `q` under the point group of the triangular lattice.
pub fn point_group_orbit(q: [f64; 2]) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(12);
    for k in 0..6 {
        let t = k as f64 * PI / 3.0;
        let (c, s) = (t.cos(), t.sin());
        let r = [c * q[0] - s * q[1], s * q[0] + c * q[1]];
        out.push(r);
        out.push([r[0], -r[1]]);
    }
    out
}
