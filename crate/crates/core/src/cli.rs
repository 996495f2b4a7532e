//! Command-line drivers: run, scan, sac, oracle, analyze.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    compare, fit_curvature, fit_power_law, histogram_order_parameter, locate_multicritical,
    spectral_peak, PeakMethod, PowerLawFit, SectorEnergyScan, SectorSeries,
};
use crate::ed;
use crate::error::Result;
use crate::gauge::{structure_factor_sample, PhaseTable};
use crate::io::{column, num, read_csv, write_csv, Manifest, Provenance};
use crate::lattice::{Lattice, GAMMA, K_POINT, M_POINT};
use crate::rk::{rk_correlators, RkCorrelators, RkSampler, SectorPolicy};
use crate::sac::{self, SacConfig, SacInput};
use crate::sse::{
    self, chain_rng, Chain, Checkpoint, ImagTimeCorrelator, RunResult, SseHamiltonian,
};

#[derive(Debug, Parser)]
#[command(
    name = "rydberg-gauge",
    version,
    about = "Rydberg triangular-array QMC, oracles and analysis"
)]
pub struct Cli {
    /// Worker threads for scans and SAC (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct RunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Pin the flux density f.
    #[arg(long)]
    pub sector: Option<f64>,
    /// Continue from `<out>/checkpoint.json` without thermalization.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One QMC run.
    Run(RunArgs),
    /// QMC runs over the manifest's [scan] points and sectors.
    Scan(RunArgs),
    /// Analytic continuation of every momentum in an imaginary-time archive.
    Sac {
        #[arg(long)]
        input: PathBuf,
        /// Manifest whose [sac] table configures the sampler.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    #[command(subcommand)]
    Oracle(OracleCommand),
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Debug, Subcommand)]
pub enum OracleCommand {
    /// Exact diagonalization at the manifest's parameters.
    Ed {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Ground state instead of the manifest β.
        #[arg(long)]
        ground: bool,
    },
    /// Classical dimer sampler at the RK point.
    Rk {
        #[arg(long, default_value_t = 36)]
        l: usize,
        #[arg(long, default_value_t = 30_000)]
        samples: usize,
        #[arg(long, default_value_t = 2_000)]
        therm: usize,
        #[arg(long, default_value_t = 20)]
        blocks: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Multicritical point from sector-energy scans at several sizes.
    Multicritical {
        #[arg(long, num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        f_clock: f64,
        #[arg(long, default_value_t = 2.0)]
        f_stripe: f64,
        /// Intermediate sector; default 2 − 6/L of the first scan.
        #[arg(long)]
        f_inter: Option<f64>,
    },
    /// Power-law exponent of a correlator table.
    Powerlaw {
        #[arg(long)]
        input: PathBuf,
        /// `c_e` or `c_r`.
        #[arg(long, default_value = "c_e")]
        column: String,
        #[arg(long, default_value_t = 2.0)]
        rmin: f64,
        /// Default L/4.
        #[arg(long)]
        rmax: Option<f64>,
    },
    /// Curvature of a dispersion table (qx, qy, omega).
    Curvature {
        #[arg(long)]
        input: PathBuf,
        /// `K`, `M`, `Gamma` or `qx,qy`.
        #[arg(long, default_value = "K")]
        q0: String,
        #[arg(long)]
        radius: f64,
    },
    /// Z₆ anisotropy of ψ_R samples.
    Histogram {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 40)]
        bins: usize,
    },
    /// SSE summary against ED values.
    Compare {
        #[arg(long)]
        ed: PathBuf,
        #[arg(long)]
        sse: PathBuf,
        #[arg(long, default_value_t = 3.0)]
        sigma: f64,
    },
}

/// Imaginary-time correlators of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagTimeArchive {
    pub manifest_sha256: String,
    pub correlators: Vec<ImagTimeCorrelator>,
}

pub fn main_with<I, T>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    match cli.command {
        Command::Run(a) => {
            let (m, hash, out) = load_overridden(&a)?;
            run_manifest(&m, &hash, &out, a.resume)?;
            println!("wrote {}", out.display());
        }
        Command::Scan(a) => {
            let (m, hash, out) = load_overridden(&a)?;
            let rows = scan_manifest(&m, &hash, &out)?;
            println!("wrote {} scan points to {}", rows.len(), out.display());
        }
        Command::Sac {
            input,
            manifest,
            seed,
            out,
        } => {
            let mut cfg = match manifest {
                Some(p) => Manifest::load(&p)?.0.sac.unwrap_or_default(),
                None => SacConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let rows = sac_archive(&input, &cfg, &out)?;
            for r in rows {
                println!(
                    "{} {}: peak {:.6} χ²/Nτ {:.3} converged {}",
                    r.observable, r.label, r.peak_mode, r.chi2_per_tau, r.converged
                );
            }
        }
        Command::Oracle(OracleCommand::Ed {
            manifest,
            out,
            ground,
        }) => {
            let (m, hash) = Manifest::load(&manifest)?;
            let rows = ed_oracle(&m, ground)?;
            std::fs::create_dir_all(&out)?;
            let table: Vec<Vec<String>> =
                rows.iter().map(|(k, v)| vec![k.clone(), num(*v)]).collect();
            write_csv(&out.join("ed.csv"), &hash, &["observable", "value"], &table)?;
            Provenance::new(&hash, 0, "oracle ed").write(&out)?;
            for (k, v) in rows {
                println!("{k} = {v}");
            }
        }
        Command::Oracle(OracleCommand::Rk {
            l,
            samples,
            therm,
            blocks,
            seed,
            out,
        }) => {
            let rep = rk_oracle(l, therm, samples, blocks, seed)?;
            std::fs::create_dir_all(&out)?;
            let hash = format!("rk-oracle-l{l}-n{samples}-seed{seed}");
            write_correlators(&out.join("rk_correlators.csv"), &hash, &rep.correlators)?;
            std::fs::write(out.join("rk_fits.json"), serde_json::to_vec_pretty(&rep)?)?;
            Provenance::new(&hash, seed, "oracle rk").write(&out)?;
            println!(
                "C_E exponent {:.3} ± {:.3}",
                rep.c_e.exponent, rep.c_e.error
            );
            println!(
                "C_R exponent {:.3} ± {:.3}",
                rep.c_r.exponent, rep.c_r.error
            );
        }
        Command::Analyze(a) => analyze(a)?,
    }
    Ok(())
}

fn load_overridden(a: &RunArgs) -> anyhow::Result<(Manifest, String, PathBuf)> {
    let (mut m, hash) = Manifest::load(&a.manifest)?;
    if let Some(s) = a.seed {
        m.run.seed = s;
    }
    if let Some(f) = a.sector {
        m.run.sector = Some(f);
    }
    let out = a.out.clone().unwrap_or_else(|| m.output.dir.clone());
    Ok((m, hash, out))
}

/// Chain for the manifest, pinned to `run.sector` if given.
pub fn build_chain(m: &Manifest) -> Result<Chain> {
    let lat = m.lattice()?;
    let tbl = m.model.table()?;
    let rng = chain_rng(m.run.seed, 0);
    let ham = SseHamiltonian::from_model_with(&lat, &tbl, m.run.vertices)?;
    let mut chain = Chain::for_lattice_with(&lat, ham, m.beta(), m.initial_state(&lat), rng)?;
    if let Some(f) = m.run.sector {
        chain.constrain_sector(f)?;
    }
    Ok(chain)
}

/// Run one manifest and write all outputs into `out`.
pub fn run_manifest(
    m: &Manifest,
    hash: &str,
    out: &Path,
    resume: bool,
) -> anyhow::Result<RunResult> {
    std::fs::create_dir_all(out)?;
    let spec = m.measure.spec()?;
    let mut cfg = m.run_config();
    let mut chain = if resume {
        let ck = Checkpoint::load(&out.join("checkpoint.json"))?;
        if ck.manifest_sha256.as_deref() != Some(hash) {
            bail!(
                "checkpoint in {} was written by a different manifest",
                out.display()
            );
        }
        cfg.n_therm = 0;
        let lat = m.lattice()?;
        ck.resume(
            SseHamiltonian::from_model_with(&lat, &m.model.table()?, m.run.vertices)?,
            Some(lat),
        )?
    } else {
        build_chain(m)?
    };
    let res = sse::run(&mut chain, &cfg, &spec)?;
    write_run_outputs(&res, hash, out)?;
    Checkpoint::of(&chain, Some(hash.to_string())).save(&out.join("checkpoint.json"))?;
    Provenance::new(hash, m.run.seed, "run").write(out)?;
    Ok(res)
}

fn write_correlators(path: &Path, hash: &str, c: &RkCorrelators) -> Result<()> {
    let rows: Vec<Vec<String>> = (0..c.r.len())
        .map(|k| {
            vec![
                c.r[k].to_string(),
                num(c.c_e[k]),
                num(c.c_e_err[k]),
                num(c.c_r[k]),
                num(c.c_r_err[k]),
            ]
        })
        .collect();
    write_csv(
        path,
        hash,
        &["r", "c_e", "c_e_err", "c_r", "c_r_err"],
        &rows,
    )
}

pub fn write_run_outputs(res: &RunResult, hash: &str, out: &Path) -> Result<()> {
    let mut bins = Vec::new();
    let mut summary = Vec::new();
    for (name, s) in &res.series {
        for (b, v) in s.bins.iter().enumerate() {
            bins.push(vec![name.clone(), b.to_string(), num(*v)]);
        }
        summary.push(vec![
            name.clone(),
            num(s.mean()),
            num(s.error()),
            s.len().to_string(),
        ]);
    }
    write_csv(
        &out.join("observables.csv"),
        hash,
        &["observable", "bin", "value"],
        &bins,
    )?;
    write_csv(
        &out.join("summary.csv"),
        hash,
        &["observable", "mean", "error", "n_bins"],
        &summary,
    )?;
    write_csv(
        &out.join("run_info.csv"),
        hash,
        &["key", "value"],
        &[
            vec!["drift_sigma".into(), num(res.drift_sigma)],
            vec!["equilibrated".into(), res.equilibrated.to_string()],
            vec!["cutoff".into(), res.cutoff.to_string()],
            vec!["sweeps".into(), res.sweeps.to_string()],
        ],
    )?;
    if !res.grid.is_empty() {
        let rows: Vec<Vec<String>> = res
            .grid
            .iter()
            .zip(&res.grid_sq)
            .map(|(q, s)| vec![num(q[0]), num(q[1]), num(s.mean()), num(s.error())])
            .collect();
        write_csv(
            &out.join("structure_factor.csv"),
            hash,
            &["qx", "qy", "mean", "error"],
            &rows,
        )?;
    }
    if !res.c_e.is_empty() {
        let c = RkCorrelators {
            r: (0..res.c_e.len()).collect(),
            c_e: res.c_e.iter().map(|s| s.mean()).collect(),
            c_e_err: res.c_e.iter().map(|s| s.error()).collect(),
            c_r: res.c_r.iter().map(|s| s.mean()).collect(),
            c_r_err: res.c_r.iter().map(|s| s.error()).collect(),
        };
        write_correlators(&out.join("correlators.csv"), hash, &c)?;
    }
    if !res.psi_r_samples.is_empty() {
        let rows: Vec<Vec<String>> = res
            .psi_r_samples
            .iter()
            .map(|p| vec![num(p[0]), num(p[1])])
            .collect();
        write_csv(&out.join("psi_samples.csv"), hash, &["re", "im"], &rows)?;
    }
    if !res.imag_time.is_empty() {
        let a = ImagTimeArchive {
            manifest_sha256: hash.to_string(),
            correlators: res.imag_time.clone(),
        };
        std::fs::write(out.join("imag_time.json"), serde_json::to_vec(&a)?)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub u2_over_omega: f64,
    pub u3_over_omega: f64,
    pub sector: Option<f64>,
    pub energy_per_site: f64,
    pub error: f64,
    pub equilibrated: bool,
}

/// Run every scan point (in parallel) into `out/point_<k>`.
pub fn scan_manifest(m: &Manifest, hash: &str, out: &Path) -> anyhow::Result<Vec<ScanRow>> {
    let scan = m.scan.as_ref().context("manifest has no [scan] table")?;
    let sectors: Vec<Option<f64>> = if scan.sectors.is_empty() {
        vec![m.run.sector]
    } else {
        scan.sectors.iter().map(|&f| Some(f)).collect()
    };
    let jobs: Vec<(f64, f64, Option<f64>)> = scan
        .points()?
        .into_iter()
        .flat_map(|(u2, u3)| sectors.iter().map(move |&f| (u2, u3, f)))
        .collect();
    std::fs::create_dir_all(out)?;
    let rows = jobs
        .par_iter()
        .enumerate()
        .map(|(k, &(u2, u3, f))| {
            let pm = m.at_point(u2, u3, f);
            let res = run_manifest(&pm, hash, &out.join(format!("point_{k:03}")), false)
                .with_context(|| format!("scan point U2/Ω = {u2}, U3/Ω = {u3}, f = {f:?}"))?;
            let e = res.get("energy_per_site").context("missing energy")?;
            Ok(ScanRow {
                u2_over_omega: u2,
                u3_over_omega: u3,
                sector: f,
                energy_per_site: e.mean(),
                error: e.error(),
                equilibrated: res.equilibrated,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                num(r.u2_over_omega),
                num(r.u3_over_omega),
                r.sector.map_or("free".into(), num),
                num(r.energy_per_site),
                num(r.error),
                r.equilibrated.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("scan.csv"),
        hash,
        &[
            "u2_over_omega",
            "u3_over_omega",
            "sector",
            "energy_per_site",
            "error",
            "equilibrated",
        ],
        &table,
    )?;
    if scan.u3_over_omega.is_some() && !scan.sectors.is_empty() {
        let s = sector_scan(m.lattice.lx, &rows)?;
        std::fs::write(out.join("sector_scan.json"), serde_json::to_vec_pretty(&s)?)?;
    }
    Provenance::new(hash, m.run.seed, "scan").write(out)?;
    Ok(rows)
}

/// Collect scan rows at fixed `U₃/Ω` into a sector-energy scan.
pub fn sector_scan(l: usize, rows: &[ScanRow]) -> anyhow::Result<SectorEnergyScan> {
    let mut params: Vec<f64> = rows.iter().map(|r| r.u2_over_omega).collect();
    params.sort_by(|a, b| a.partial_cmp(b).unwrap());
    params.dedup();
    let mut fs: Vec<f64> = rows.iter().filter_map(|r| r.sector).collect();
    fs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    fs.dedup();
    let sectors = fs
        .iter()
        .map(|&f| {
            let pick = |p: f64| {
                rows.iter()
                    .find(|r| r.sector == Some(f) && r.u2_over_omega == p)
                    .context("incomplete scan")
            };
            let energy = params
                .iter()
                .map(|&p| pick(p).map(|r| r.energy_per_site))
                .collect::<anyhow::Result<_>>()?;
            let error = params
                .iter()
                .map(|&p| pick(p).map(|r| r.error))
                .collect::<anyhow::Result<_>>()?;
            Ok(SectorSeries { f, energy, error })
        })
        .collect::<anyhow::Result<_>>()?;
    Ok(SectorEnergyScan {
        l,
        fixed: rows[0].u3_over_omega,
        params,
        sectors,
    })
}

/// Energy and `S(q)` at the manifest parameters by exact diagonalization.
pub fn ed_oracle(m: &Manifest, ground: bool) -> Result<Vec<(String, f64)>> {
    let lat = m.lattice()?;
    let tbl = m.model.table()?;
    let spec = ed::build_and_solve(&tbl, &lat)?;
    let beta = if ground { f64::INFINITY } else { m.beta() };
    let n = lat.n_sites();
    let energy = if ground {
        spec.ground_energy()
    } else {
        spec.energy(beta)
    };
    let mut rows = vec![
        ("energy".to_string(), energy),
        ("energy_per_site".to_string(), energy / n as f64),
    ];
    let momenta = m.measure.spec()?.momenta;
    let table = PhaseTable::sites(&lat, &momenta.iter().map(|q| q.q).collect::<Vec<_>>());
    let mut per_q = vec![vec![0.0; 1 << n]; momenta.len()];
    for s in 0..1u64 << n {
        let v = structure_factor_sample(&crate::model::SpinConfig::from_bits(s, n), &table);
        for (k, x) in v.into_iter().enumerate() {
            per_q[k][s as usize] = x;
        }
    }
    for (q, obs) in momenta.iter().zip(&per_q) {
        rows.push((
            format!("S({})", q.label),
            spec.thermal_expectation(obs, beta)?,
        ));
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RkReport {
    pub l: usize,
    pub samples: usize,
    pub correlators: RkCorrelators,
    pub c_e: PowerLawFit,
    pub c_r: PowerLawFit,
}

/// Correlators and exponents of uniformly sampled dimer covers in the clock sector.
pub fn rk_oracle(
    l: usize,
    therm: usize,
    samples: usize,
    blocks: usize,
    seed: u64,
) -> Result<RkReport> {
    let lat = Lattice::new(l, l)?;
    let mut s = RkSampler::in_sector(&lat, 0.0, SectorPolicy::Fixed, chain_rng(seed, 0))?;
    let covers = s.sample(therm, samples, 1);
    let c = rk_correlators(&covers, &lat, blocks)?;
    let rmax = l as f64 / 4.0;
    let r: Vec<f64> = c.r.iter().map(|&x| x as f64).collect();
    let c_e = fit_power_law(&r, &c.c_e, &c.c_e_err, 2.0, rmax)?;
    let c_r = fit_power_law(&r, &c.c_r, &c.c_r_err, 2.0, rmax)?;
    Ok(RkReport {
        l,
        samples,
        correlators: c,
        c_e,
        c_r,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SacSummary {
    pub observable: String,
    pub label: String,
    pub peak_mode: f64,
    pub peak_mean: f64,
    pub theta_star: f64,
    pub chi2_per_tau: f64,
    pub converged: bool,
}

/// Continue every momentum of an archive; writes `spectrum_<obs>_<label>.csv`.
pub fn sac_archive(input: &Path, cfg: &SacConfig, out: &Path) -> anyhow::Result<Vec<SacSummary>> {
    let a: ImagTimeArchive = serde_json::from_slice(&std::fs::read(input)?)
        .with_context(|| format!("reading imaginary-time archive {}", input.display()))?;
    std::fs::create_dir_all(out)?;
    let jobs: Vec<(usize, usize)> = a
        .correlators
        .iter()
        .enumerate()
        .flat_map(|(c, g)| (0..g.momenta.len()).map(move |q| (c, q)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(c, q)| {
            let g = &a.correlators[c];
            let obs = serde_json::to_value(g.observable)?
                .as_str()
                .unwrap_or("obs")
                .to_string();
            let label = g.momenta[q].label.clone();
            let input =
                SacInput::from_correlator(g, q).with_context(|| format!("{obs} at {label}"))?;
            let r = sac::run(&input, cfg)?;
            let rows: Vec<Vec<String>> = (0..r.omega.len())
                .map(|i| vec![num(r.omega[i]), num(r.b[i]), num(r.s[i])])
                .collect();
            let safe: String = label
                .chars()
                .map(|ch| if ch.is_alphanumeric() { ch } else { '_' })
                .collect();
            write_csv(
                &out.join(format!("spectrum_{obs}_{safe}.csv")),
                &a.manifest_sha256,
                &["omega", "b", "s"],
                &rows,
            )?;
            Ok(SacSummary {
                observable: obs,
                label,
                peak_mode: spectral_peak(&r.omega, &r.s, PeakMethod::Mode),
                peak_mean: spectral_peak(&r.omega, &r.s, PeakMethod::FirstMoment),
                theta_star: r.theta_star,
                chi2_per_tau: r.chi2_average / r.n_tau as f64,
                converged: r.converged,
            })
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.observable.clone(),
                r.label.clone(),
                num(r.peak_mode),
                num(r.peak_mean),
                num(r.theta_star),
                num(r.chi2_per_tau),
                r.converged.to_string(),
            ]
        })
        .collect();
    write_csv(
        &out.join("sac_summary.csv"),
        &a.manifest_sha256,
        &[
            "observable",
            "label",
            "peak_mode",
            "peak_mean",
            "theta_star",
            "chi2_per_tau",
            "converged",
        ],
        &table,
    )?;
    Provenance::new(&a.manifest_sha256, cfg.seed, "sac").write(out)?;
    Ok(rows)
}

fn parse_q0(s: &str) -> anyhow::Result<[f64; 2]> {
    Ok(match s {
        "K" => K_POINT,
        "M" => M_POINT,
        "Gamma" => GAMMA,
        _ => {
            let v: Vec<f64> = s
                .split(',')
                .map(|x| x.trim().parse())
                .collect::<std::result::Result<_, _>>()?;
            if v.len() != 2 {
                bail!("q0 must be K, M, Gamma or qx,qy");
            }
            [v[0], v[1]]
        }
    })
}

fn analyze(cmd: AnalyzeCommand) -> anyhow::Result<()> {
    match cmd {
        AnalyzeCommand::Multicritical {
            input,
            f_clock,
            f_stripe,
            f_inter,
        } => {
            let scans = input
                .iter()
                .map(|p| {
                    Ok(serde_json::from_slice::<SectorEnergyScan>(&std::fs::read(
                        p,
                    )?)?)
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let fi = f_inter.unwrap_or(2.0 - 6.0 / scans[0].l as f64);
            let m = locate_multicritical(&scans, f_clock, f_stripe, fi)?;
            for (l, u2, u3) in &m.per_size {
                println!("L = {l}: U2/Ω = {u2:.5}, U3/Ω = {u3:.5}");
            }
            println!("1/L → 0: U2/Ω = {:.5}, U3/Ω = {:.5}", m.scanned, m.fixed);
        }
        AnalyzeCommand::Powerlaw {
            input,
            column: col,
            rmin,
            rmax,
        } => {
            let (_, h, rows) = read_csv(&input)?;
            let r = column(&h, &rows, "r")?;
            let c = column(&h, &rows, &col)?;
            let e = column(&h, &rows, &format!("{col}_err")).unwrap_or_default();
            let rmax = rmax.unwrap_or(r.iter().cloned().fold(0.0, f64::max) / 2.0);
            let f = fit_power_law(&r, &c, &e, rmin, rmax)?;
            println!(
                "{col}: exponent {:.4} ± {:.4} ({} points in [{rmin}, {rmax}])",
                f.exponent, f.error, f.n_points
            );
        }
        AnalyzeCommand::Curvature { input, q0, radius } => {
            let (_, h, rows) = read_csv(&input)?;
            let qx = column(&h, &rows, "qx")?;
            let qy = column(&h, &rows, "qy")?;
            let w = column(&h, &rows, "omega")?;
            let qs: Vec<[f64; 2]> = qx.iter().zip(&qy).map(|(a, b)| [*a, *b]).collect();
            let f = fit_curvature(&qs, &w, parse_q0(&q0)?, radius)?;
            println!(
                "C2 = {:.5} ({} momenta, residual {:.3e})",
                f.c2, f.n_points, f.residual
            );
        }
        AnalyzeCommand::Histogram { input, bins } => {
            let (_, h, rows) = read_csv(&input)?;
            let re = column(&h, &rows, "re")?;
            let im = column(&h, &rows, "im")?;
            let s: Vec<[f64; 2]> = re.iter().zip(&im).map(|(a, b)| [*a, *b]).collect();
            let r = histogram_order_parameter(&s, bins)?;
            println!(
                "anisotropy {:.4}, angular maxima {}, ring {}, <|psi|> {:.4}",
                r.anisotropy, r.angular_maxima, r.ring, r.mean_abs
            );
        }
        AnalyzeCommand::Compare { ed, sse, sigma } => {
            let (_, eh, erows) = read_csv(&ed)?;
            let (_, sh, srows) = read_csv(&sse)?;
            let ev = column(&eh, &erows, "value")?;
            let sm = column(&sh, &srows, "mean")?;
            let se = column(&sh, &srows, "error")?;
            let mut all = true;
            for (k, row) in erows.iter().enumerate() {
                let Some(j) = srows.iter().position(|r| r[0] == row[0]) else {
                    continue;
                };
                let (z, ok) = compare(sm[j], se[j], ev[k], sigma);
                all &= ok;
                println!(
                    "{} {}: SSE {} ± {} vs ED {} ({z:.2}σ)",
                    if ok { "PASS" } else { "FAIL" },
                    row[0],
                    sm[j],
                    se[j],
                    ev[k]
                );
            }
            if !all {
                bail!("SSE and ED disagree beyond {sigma}σ");
            }
        }
    }
    Ok(())
}
