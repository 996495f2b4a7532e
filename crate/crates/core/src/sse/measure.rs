use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::imag_time::{ImagTimeAccumulator, ImagTimeCorrelator, ImagTimeSpec};
use super::{kind, Chain, SITE_DIAG, SITE_FLIP};
use crate::error::{Error, Result};
use crate::gauge::{self, PhaseTable};
use crate::model::SpinConfig;
use crate::stats::{BinAccumulator, BinnedSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedMomentum {
    pub label: String,
    pub q: [f64; 2],
}

impl NamedMomentum {
    pub fn new(label: &str, q: [f64; 2]) -> Self {
        Self {
            label: label.to_string(),
            q,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n_therm: usize,
    pub n_meas: usize,
    pub n_bins: usize,
}

/// Observables recorded during the measurement phase.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureSpec {
    /// `S(Q)` at named momenta.
    pub momenta: Vec<NamedMomentum>,
    /// `S(Q)` on the whole momentum grid.
    pub full_grid: bool,
    pub order_params: bool,
    pub correlators: bool,
    /// Keep every `ψ_R` sample for histograms.
    pub psi_samples: bool,
    pub imag_time: Vec<ImagTimeSpec>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RunResult {
    /// Scalar observables in recording order.
    pub series: Vec<(String, BinnedSeries)>,
    pub grid: Vec<[f64; 2]>,
    pub grid_sq: Vec<BinnedSeries>,
    pub c_e: Vec<BinnedSeries>,
    pub c_r: Vec<BinnedSeries>,
    pub psi_r_samples: Vec<[f64; 2]>,
    pub imag_time: Vec<ImagTimeCorrelator>,
    /// Largest first-half/second-half disagreement of the energies, in σ.
    pub drift_sigma: f64,
    pub equilibrated: bool,
    pub cutoff: usize,
    pub sweeps: u64,
}

impl RunResult {
    pub fn get(&self, name: &str) -> Option<&BinnedSeries> {
        self.series.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn mean(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |s| s.mean())
    }

    pub fn error(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |s| s.error())
    }
}

struct Recorder {
    names: Vec<String>,
    accs: Vec<BinAccumulator>,
    per_bin: usize,
    idx: usize,
}

impl Recorder {
    fn new(per_bin: usize) -> Self {
        Self {
            names: Vec::new(),
            accs: Vec::new(),
            per_bin,
            idx: 0,
        }
    }

    fn start(&mut self) {
        self.idx = 0;
    }

    fn push(&mut self, name: impl FnOnce() -> String, v: f64) {
        if self.idx == self.accs.len() {
            self.names.push(name());
            self.accs.push(BinAccumulator::new(self.per_bin));
        }
        self.accs[self.idx].push(v);
        self.idx += 1;
    }

    fn finish(self) -> Vec<(String, BinnedSeries)> {
        self.names
            .into_iter()
            .zip(self.accs.iter().map(|a| a.series()))
            .collect()
    }
}

/// Thermalize, then measure with binning.
pub fn run(chain: &mut Chain, cfg: &RunConfig, spec: &MeasureSpec) -> Result<RunResult> {
    if cfg.n_bins == 0 || cfg.n_meas == 0 || cfg.n_meas % cfg.n_bins != 0 {
        return Err(Error::InvalidRun(format!(
            "measurement sweeps {} must be a positive multiple of the bin count {}",
            cfg.n_meas, cfg.n_bins
        )));
    }
    let lattice_needed = spec.full_grid
        || spec.order_params
        || spec.correlators
        || spec.psi_samples
        || !spec.momenta.is_empty()
        || !spec.imag_time.is_empty();
    if lattice_needed && chain.lat.is_none() {
        return Err(Error::InvalidRun(
            "lattice observables requested for a lattice-free chain".into(),
        ));
    }
    let per_bin = cfg.n_meas / cfg.n_bins;
    let mut imag: Vec<ImagTimeAccumulator> = spec
        .imag_time
        .iter()
        .map(|s| ImagTimeAccumulator::new(s, chain, per_bin))
        .collect::<Result<_>>()?;

    for _ in 0..cfg.n_therm {
        chain.sweep();
        chain.grow_cutoff();
    }

    let lat = chain.lat.clone();
    let named = lat
        .as_ref()
        .map(|l| PhaseTable::sites(l, &spec.momenta.iter().map(|m| m.q).collect::<Vec<_>>()));
    let grid = match (&lat, spec.full_grid) {
        (Some(l), true) => l.momentum_grid().points().to_vec(),
        _ => Vec::new(),
    };
    let grid_table = lat
        .as_ref()
        .filter(|_| spec.full_grid)
        .map(|l| PhaseTable::sites(l, &grid));
    let mut grid_acc: Vec<BinAccumulator> =
        grid.iter().map(|_| BinAccumulator::new(per_bin)).collect();
    let half = lat.as_ref().map_or(0, |l| l.lx() / 2 + 1);
    let mut ce_acc: Vec<BinAccumulator> = Vec::new();
    let mut cr_acc: Vec<BinAccumulator> = Vec::new();
    if spec.correlators {
        ce_acc = (0..half).map(|_| BinAccumulator::new(per_bin)).collect();
        cr_acc = (0..half).map(|_| BinAccumulator::new(per_bin)).collect();
    }
    let mut psi_samples = Vec::new();
    let mut rec = Recorder::new(per_bin);
    let n = chain.ham.n_sites as f64;

    for _ in 0..cfg.n_meas {
        chain.sweep();
        rec.start();
        let beta = chain.state.beta;
        let e = chain.energy_estimate();
        rec.push(|| "energy".into(), e);
        rec.push(|| "energy_per_site".into(), e / n);
        rec.push(
            || "diag_energy".into(),
            chain.ham.diagonal_energy(&chain.state.spins),
        );
        rec.push(|| "n_ops".into(), chain.state.n_ops as f64);
        if chain.ham.omega > 0.0 {
            let site_ops = chain
                .state
                .ops
                .iter()
                .filter(|&&o| matches!(kind(o), SITE_DIAG | SITE_FLIP))
                .count();
            rec.push(
                || "sx_per_site".into(),
                (site_ops as f64 / (beta * chain.ham.omega) - 0.5 * n) / n,
            );
        }
        let sz: f64 = chain.state.spins.iter().map(|&s| s as f64 - 0.5).sum();
        rec.push(|| "sz".into(), sz);

        if let Some(l) = &lat {
            let cfg_now = SpinConfig(chain.state.spins.clone());
            let tri = 2.0 * n;
            rec.push(
                || "violated_fraction".into(),
                gauge::violated_triangles(&cfg_now, l) as f64 / tri,
            );
            let w = gauge::spin_winding(&cfg_now, l);
            rec.push(|| "fx".into(), w.fx as f64);
            rec.push(|| "fy".into(), w.fy as f64);
            if let Some(t) = &named {
                for (k, s) in gauge::structure_factor_sample(&cfg_now, t)
                    .into_iter()
                    .enumerate()
                {
                    rec.push(|| format!("S({})", spec.momenta[k].label), s);
                }
            }
            if let Some(t) = &grid_table {
                for (acc, s) in grid_acc
                    .iter_mut()
                    .zip(gauge::structure_factor_sample(&cfg_now, t))
                {
                    acc.push(s);
                }
            }
            if spec.order_params || spec.psi_samples {
                let p = gauge::order_params(&cfg_now, l);
                if spec.order_params {
                    rec.push(|| "|psi_r|".into(), p.psi_r.norm());
                    rec.push(|| "|psi_r|^2".into(), p.psi_r.norm_sqr());
                    rec.push(|| "|psi_e|".into(), p.psi_e.norm());
                    rec.push(|| "|psi_e|^2".into(), p.psi_e.norm_sqr());
                    rec.push(
                        || "re psi_r^6".into(),
                        (p.psi_r.powu(6) / Complex64::from(p.psi_r.norm().powi(5).max(1e-300))).re,
                    );
                }
                if spec.psi_samples {
                    psi_samples.push([p.psi_r.re, p.psi_r.im]);
                }
            }
            if spec.correlators {
                let (ce, cr) = gauge::correlators_sample(&cfg_now, l);
                ce_acc.iter_mut().zip(ce).for_each(|(a, v)| a.push(v));
                cr_acc.iter_mut().zip(cr).for_each(|(a, v)| a.push(v));
            }
        }
        for acc in imag.iter_mut() {
            acc.measure(chain);
        }
    }

    let series = rec.finish();
    let drift_sigma = series
        .iter()
        .filter(|(name, _)| name == "energy" || name == "diag_energy")
        .map(|(_, s)| s.drift_sigma())
        .fold(0.0, f64::max);
    Ok(RunResult {
        series,
        grid,
        grid_sq: grid_acc.iter().map(|a| a.series()).collect(),
        c_e: ce_acc.iter().map(|a| a.series()).collect(),
        c_r: cr_acc.iter().map(|a| a.series()).collect(),
        psi_r_samples: psi_samples,
        imag_time: imag.into_iter().map(|a| a.finish()).collect(),
        drift_sigma,
        equilibrated: drift_sigma <= 5.0,
        cutoff: chain.cutoff(),
        sweeps: chain.state.sweeps,
    })
}
