//! Run manifests, provenance records and CSV tables.

use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, GAMMA, K_POINT, M_POINT};
use crate::model::{coupling_table, CouplingTable, Interaction, ModelParams, SpinConfig};
use crate::sac::SacConfig;
use crate::sse::{
    chain_rng, ImagTimeObservable, ImagTimeSpec, MeasureSpec, NamedMomentum, RunConfig, Vertices,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub lattice: LatticeSection,
    pub model: ModelSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub measure: MeasureSection,
    pub scan: Option<ScanSection>,
    pub sac: Option<SacConfig>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub lx: usize,
    pub ly: usize,
}

/// Couplings in units of `U₁ = 1`. Give exactly one of `u2`/`u3`,
/// `u2_over_omega`/`u3_over_omega`, or `interaction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub omega: f64,
    pub u2: Option<f64>,
    pub u3: Option<f64>,
    pub u2_over_omega: Option<f64>,
    pub u3_over_omega: Option<f64>,
    pub interaction: Option<Interaction>,
    /// Detuning; omitted means the half-filling value.
    pub delta: Option<f64>,
    #[serde(default = "one")]
    pub spacing: f64,
    #[serde(default = "three")]
    pub truncation: usize,
}

fn one() -> f64 {
    1.0
}

fn three() -> usize {
    3
}

impl ModelSection {
    pub fn params(&self) -> Result<ModelParams> {
        let explicit = self.u2.is_some() || self.u3.is_some();
        let ratios = self.u2_over_omega.is_some() || self.u3_over_omega.is_some();
        let profile = self.interaction.is_some();
        if explicit as u8 + ratios as u8 + profile as u8 != 1 {
            return Err(Error::Manifest(
                "[model] needs exactly one of u2/u3, u2_over_omega/u3_over_omega or interaction"
                    .into(),
            ));
        }
        let mut p = if explicit {
            ModelParams::explicit(
                self.omega,
                1.0,
                self.u2.unwrap_or(0.0),
                self.u3.unwrap_or(0.0),
            )
        } else if ratios {
            ModelParams::from_omega_ratios(
                self.omega,
                self.u2_over_omega.unwrap_or(0.0),
                self.u3_over_omega.unwrap_or(0.0),
            )
        } else {
            let mut p = ModelParams::explicit(self.omega, 1.0, 0.0, 0.0);
            p.interaction = self.interaction.unwrap();
            p
        };
        p.delta = self.delta;
        p.spacing = self.spacing;
        p.truncation = self.truncation;
        p.validate()?;
        Ok(p)
    }

    pub fn table(&self) -> Result<CouplingTable> {
        coupling_table(&self.params()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    Random,
    Stripe,
    Clock,
    AllDown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    /// Inverse temperature in units of `1/U₁`; omitted means `Lx·Ly`.
    pub beta: Option<f64>,
    pub n_therm: usize,
    pub n_meas: usize,
    pub n_bins: usize,
    pub seed: u64,
    pub initial: InitialState,
    /// Flux density to pin; overrides `initial`.
    pub sector: Option<f64>,
    /// `bond` (default) or `triangle` nearest-neighbour vertices.
    pub vertices: Vertices,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            beta: None,
            n_therm: 2000,
            n_meas: 10_000,
            n_bins: 100,
            seed: 1,
            initial: InitialState::Random,
            sector: None,
            vertices: Vertices::Bond,
        }
    }
}

/// A momentum given by label (`K`, `M`, `Gamma`) or coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentumEntry {
    Label(String),
    Point { label: String, q: [f64; 2] },
}

impl MomentumEntry {
    pub fn resolve(&self) -> Result<NamedMomentum> {
        match self {
            MomentumEntry::Label(l) => {
                let q = match l.as_str() {
                    "K" => K_POINT,
                    "M" => M_POINT,
                    "Gamma" => GAMMA,
                    other => {
                        return Err(Error::Manifest(format!("unknown momentum label {other:?}")))
                    }
                };
                Ok(NamedMomentum::new(l, q))
            }
            MomentumEntry::Point { label, q } => Ok(NamedMomentum::new(label, *q)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImagTimeSection {
    pub observable: ImagTimeObservable,
    pub momenta: Vec<MomentumEntry>,
    #[serde(default = "fifty")]
    pub n_tau: usize,
    #[serde(default = "four")]
    pub n_ref: usize,
    pub tau: Option<Vec<f64>>,
}

fn fifty() -> usize {
    50
}

fn four() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureSection {
    pub momenta: Vec<MomentumEntry>,
    pub full_grid: bool,
    pub order_params: bool,
    pub correlators: bool,
    pub psi_samples: bool,
    pub imag_time: Vec<ImagTimeSection>,
}

impl Default for MeasureSection {
    fn default() -> Self {
        Self {
            momenta: vec![
                MomentumEntry::Label("K".into()),
                MomentumEntry::Label("M".into()),
            ],
            full_grid: false,
            order_params: false,
            correlators: false,
            psi_samples: false,
            imag_time: vec![],
        }
    }
}

impl MeasureSection {
    pub fn spec(&self) -> Result<MeasureSpec> {
        let momenta = self
            .momenta
            .iter()
            .map(|m| m.resolve())
            .collect::<Result<Vec<_>>>()?;
        let imag_time = self
            .imag_time
            .iter()
            .map(|s| {
                let mut spec = ImagTimeSpec::new(
                    s.observable,
                    s.momenta
                        .iter()
                        .map(|m| m.resolve())
                        .collect::<Result<_>>()?,
                );
                spec.n_tau = s.n_tau;
                spec.n_ref = s.n_ref;
                spec.tau = s.tau.clone();
                Ok(spec)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MeasureSpec {
            momenta,
            full_grid: self.full_grid,
            order_params: self.order_params,
            correlators: self.correlators,
            psi_samples: self.psi_samples,
            imag_time,
        })
    }
}

/// Grid of points in `U₂/Ω`, with `U₃/Ω` either fixed or proportional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub u2_over_omega: Vec<f64>,
    /// Fixed `U₃/Ω` along the scan.
    pub u3_over_omega: Option<f64>,
    /// `U₃ = u3_per_u2 · U₂` along the scan (0.5 for the `U₂ = 2U₃` line).
    pub u3_per_u2: Option<f64>,
    /// Flux sectors to pin at every point; empty means unconstrained.
    #[serde(default)]
    pub sectors: Vec<f64>,
}

impl ScanSection {
    /// `(U₂/Ω, U₃/Ω)` per point.
    pub fn points(&self) -> Result<Vec<(f64, f64)>> {
        match (self.u3_over_omega, self.u3_per_u2) {
            (Some(u3), None) => Ok(self.u2_over_omega.iter().map(|&u2| (u2, u3)).collect()),
            (None, Some(r)) => Ok(self.u2_over_omega.iter().map(|&u2| (u2, r * u2)).collect()),
            _ => Err(Error::Manifest(
                "[scan] needs exactly one of u3_over_omega or u3_per_u2".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
        }
    }
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self> {
        let m: Manifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Parsed manifest and the SHA-256 of its bytes.
    pub fn load(path: &Path) -> Result<(Self, String)> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Manifest(format!("cannot read {}: {e}", path.display())))?;
        Ok((Self::parse(&text)?, sha256_hex(text.as_bytes())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Manifest(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.lattice()?;
        self.model.params()?;
        let r = &self.run;
        if r.n_bins == 0 || r.n_meas % r.n_bins != 0 {
            return Err(Error::Manifest(format!(
                "n_meas = {} must be a positive multiple of n_bins = {}",
                r.n_meas, r.n_bins
            )));
        }
        if let Some(b) = r.beta {
            if !(b > 0.0) {
                return Err(Error::Manifest(format!("beta = {b} must be positive")));
            }
        }
        self.measure.spec()?;
        if let Some(s) = &self.scan {
            s.points()?;
            if self.model.u2_over_omega.is_none() && self.model.u3_over_omega.is_none() {
                return Err(Error::Manifest(
                    "[scan] requires [model] given by u2_over_omega/u3_over_omega".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.lattice.lx, self.lattice.ly)
    }

    pub fn beta(&self) -> f64 {
        self.run
            .beta
            .unwrap_or((self.lattice.lx * self.lattice.ly) as f64)
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            n_therm: self.run.n_therm,
            n_meas: self.run.n_meas,
            n_bins: self.run.n_bins,
        }
    }

    /// Copy with the model couplings replaced by the given ratios.
    pub fn at_point(&self, u2_over_omega: f64, u3_over_omega: f64, sector: Option<f64>) -> Self {
        let mut m = self.clone();
        m.model.u2_over_omega = Some(u2_over_omega);
        m.model.u3_over_omega = Some(u3_over_omega);
        m.run.sector = sector;
        m.scan = None;
        m
    }

    pub fn initial_state(&self, lat: &Lattice) -> SpinConfig {
        match self.run.initial {
            InitialState::Stripe => SpinConfig::stripe(lat),
            InitialState::Clock => SpinConfig::clock(lat),
            InitialState::AllDown => SpinConfig::all_down(lat.n_sites()),
            InitialState::Random => {
                let mut rng = chain_rng(self.run.seed, 1);
                SpinConfig((0..lat.n_sites()).map(|_| rng.gen_range(0..2u8)).collect())
            }
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub manifest_sha256: String,
    pub code_version: String,
    pub seed: u64,
    pub command: String,
}

impl Provenance {
    pub fn new(manifest_sha256: &str, seed: u64, command: &str) -> Self {
        Self {
            manifest_sha256: manifest_sha256.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            command: command.to_string(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(
            dir.join("provenance.json"),
            serde_json::to_vec_pretty(self)?,
        )?;
        Ok(())
    }
}

/// CSV file with a `# manifest_sha256=` first line.
pub fn write_csv(path: &Path, hash: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "# manifest_sha256={hash}")?;
    let mut w = csv::Writer::from_writer(f);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Manifest hash, header and rows of a file written by [`write_csv`].
pub fn read_csv(path: &Path) -> Result<(String, Vec<String>, Vec<Vec<String>>)> {
    let text = std::fs::read_to_string(path)?;
    let hash = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# manifest_sha256="))
        .unwrap_or("none")
        .to_string();
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.map(|x| x.iter().map(String::from).collect())
                .map_err(csv_err)
        })
        .collect::<Result<_>>()?;
    Ok((hash, header, rows))
}

/// Numeric column `name` of a table from [`read_csv`].
pub fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Result<Vec<f64>> {
    let k = header
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Analysis(format!("missing column {name:?}")))?;
    rows.iter()
        .map(|r| {
            r[k].parse::<f64>()
                .map_err(|e| Error::Analysis(format!("column {name}: {e}")))
        })
        .collect()
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Shortest round-trip formatting.
pub fn num(x: f64) -> String {
    format!("{x}")
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[lattice]
lx = 3
ly = 3
[model]
omega = 0.5
u2_over_omega = 0.547
u3_over_omega = 0.215
[run]
beta = 2.0
n_therm = 100
n_meas = 1000
n_bins = 10
"#;

    #[test]
    fn minimal_manifest_parses() {
        let m = Manifest::parse(MINIMAL).unwrap();
        assert_eq!(m.beta(), 2.0);
        let t = m.model.table().unwrap();
        assert!((t.u[1] - 0.547 * 0.5).abs() < 1e-15);
        assert_eq!(m.measure.spec().unwrap().momenta.len(), 2);
    }

    #[test]
    fn unknown_keys_are_errors_with_line() {
        let bad = MINIMAL.replace("n_bins = 10", "n_bins = 10\nn_sweeps = 4");
        let e = Manifest::parse(&bad).unwrap_err().to_string();
        assert!(e.contains("n_sweeps") && e.contains("line"), "{e}");
    }

    #[test]
    fn inconsistent_manifests_rejected() {
        assert!(Manifest::parse(&MINIMAL.replace("n_bins = 10", "n_bins = 7")).is_err());
        assert!(
            Manifest::parse(&MINIMAL.replace("schema_version = 1", "schema_version = 2")).is_err()
        );
        assert!(Manifest::parse(&MINIMAL.replace("omega = 0.5", "omega = 0.5\nu2 = 0.1")).is_err());
        assert!(Manifest::parse(&format!("{MINIMAL}[scan]\nu2_over_omega = [0.4]\n")).is_err());
    }

    #[test]
    fn scan_lines() {
        let m = Manifest::parse(&format!(
            "{MINIMAL}[scan]\nu2_over_omega = [0.4, 0.6]\nu3_per_u2 = 0.5\nsectors = [0.0, 2.0]\n"
        ))
        .unwrap();
        assert_eq!(
            m.scan.unwrap().points().unwrap(),
            vec![(0.4, 0.2), (0.6, 0.3)]
        );
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write_csv(&p, "abc", &["a", "b"], &[vec![num(1.5), num(-0.25)]]).unwrap();
        let (h, hd, rows) = read_csv(&p).unwrap();
        assert_eq!(h, "abc");
        assert_eq!(column(&hd, &rows, "b").unwrap(), vec![-0.25]);
    }
}
