//! Stochastic analytic continuation of imaginary-time correlators.
//!
//! `G(τ) = ∫₀^∞ dω K(τ, ω) B(ω)` with `B(ω) = S(ω)(1 + e^{−βω})` sampled as
//! `N_ω` equal-amplitude δ-functions at weight `exp(−χ²/2Θ)`.

use std::f64::consts::PI;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sse::ImagTimeCorrelator;

/// Minimum number of bins behind a measured covariance.
pub const MIN_BINS: usize = 100;

/// `(e^{−τω} + e^{−(β−τ)ω}) / (π (1 + e^{−βω}))`.
pub fn kernel(tau: f64, omega: f64, beta: f64) -> f64 {
    ((-tau * omega).exp() + (-(beta - tau) * omega).exp()) / (PI * (1.0 + (-beta * omega).exp()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SacInput {
    pub beta: f64,
    pub tau: Vec<f64>,
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

/// Eigen-decomposed covariance with floored eigenvalues.
struct Metric {
    /// `rows[k][i] = U_ik / sqrt(λ_k)`.
    rows: Vec<Vec<f64>>,
}

impl Metric {
    fn new(cov: &[Vec<f64>]) -> Result<Self> {
        let n = cov.len();
        let m = Mat::<f64>::from_fn(n, n, |i, j| cov[i][j]);
        let eig = m
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Sac(format!("covariance eigensolver failed: {e:?}")))?;
        let s = eig.S().column_vector();
        let u = eig.U();
        let lmax = (0..n).map(|k| s[k]).fold(0.0f64, f64::max);
        if lmax <= 0.0 {
            return Err(Error::Sac("covariance has no positive eigenvalue".into()));
        }
        let floor = 1e-12 * lmax;
        let rows = (0..n)
            .map(|k| {
                let inv = 1.0 / s[k].max(floor).sqrt();
                (0..n).map(|i| u[(i, k)] * inv).collect()
            })
            .collect();
        Ok(Self { rows })
    }

    fn project(&self, v: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl SacInput {
    pub fn new(
        beta: f64,
        tau: Vec<f64>,
        mean: Vec<f64>,
        covariance: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = tau.len();
        if n == 0
            || mean.len() != n
            || covariance.len() != n
            || covariance.iter().any(|r| r.len() != n)
        {
            return Err(Error::Sac(
                "inconsistent τ, mean and covariance sizes".into(),
            ));
        }
        if !(beta > 0.0) {
            return Err(Error::Sac(format!("β must be positive, got {beta}")));
        }
        if let Some(&t) = tau.iter().find(|&&t| !(0.0..=beta).contains(&t)) {
            return Err(Error::TauOutOfRange(t));
        }
        if tau[0] != 0.0 {
            return Err(Error::Sac(
                "the τ grid must start at 0 for the G(0) normalization".into(),
            ));
        }
        if !(mean[0] > 0.0) {
            return Err(Error::Sac(format!(
                "G(τ₀) must be positive, got {}",
                mean[0]
            )));
        }
        for i in 0..n {
            if covariance[i][i] < 0.0 {
                return Err(Error::Sac("covariance has a negative diagonal".into()));
            }
            for j in 0..i {
                if (covariance[i][j] - covariance[j][i]).abs()
                    > 1e-12 * (covariance[i][i] * covariance[j][j]).sqrt().max(1e-300)
                {
                    return Err(Error::Sac("covariance is not symmetric".into()));
                }
            }
        }
        Ok(Self {
            beta,
            tau,
            mean,
            covariance,
        })
    }

    /// Independent errors, `C = diag(σ²)`.
    pub fn diagonal(beta: f64, tau: Vec<f64>, mean: Vec<f64>, sigma: &[f64]) -> Result<Self> {
        let n = sigma.len();
        let cov = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { sigma[i] * sigma[i] } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::new(beta, tau, mean, cov)
    }

    /// From per-bin measurements `bins[b][τ]`.
    pub fn from_bins(beta: f64, tau: Vec<f64>, bins: &[Vec<f64>]) -> Result<Self> {
        if bins.len() < MIN_BINS {
            return Err(Error::Sac(format!(
                "{} bins behind the covariance, need {MIN_BINS}",
                bins.len()
            )));
        }
        let c = ImagTimeCorrelator {
            observable: crate::sse::ImagTimeObservable::Density,
            beta,
            tau: tau.clone(),
            momenta: vec![],
            bins: vec![bins.to_vec()],
        };
        Self::new(beta, tau, c.mean(0), c.covariance(0))
    }

    pub fn from_correlator(c: &ImagTimeCorrelator, q: usize) -> Result<Self> {
        Self::from_bins(c.beta, c.tau.clone(), &c.bins[q])
    }

    /// Total weight `Σ a_i = π G(0)` implied by the normalization.
    pub fn total_weight(&self) -> f64 {
        PI * self.mean[0]
    }

    /// `G̃(τ_i)` of a δ-spectrum.
    pub fn model(&self, omega: &[f64], amp: &[f64]) -> Vec<f64> {
        self.tau
            .iter()
            .map(|&t| {
                omega
                    .iter()
                    .zip(amp)
                    .map(|(&w, &a)| a * kernel(t, w, self.beta))
                    .sum()
            })
            .collect()
    }

    /// Goodness of fit of a δ-spectrum in the regularized inverse-covariance metric.
    pub fn chi2(&self, omega: &[f64], amp: &[f64]) -> Result<f64> {
        let m = Metric::new(&self.covariance)?;
        let r: Vec<f64> = self
            .model(omega, amp)
            .iter()
            .zip(&self.mean)
            .map(|(a, b)| a - b)
            .collect();
        Ok(m.project(&r).iter().map(|x| x * x).sum())
    }

    /// Decay-rate estimate from the first two τ points.
    pub fn bandwidth_guess(&self) -> Result<f64> {
        let k = self
            .tau
            .iter()
            .position(|&t| t > self.tau[0])
            .ok_or_else(|| Error::Sac("need two distinct τ".into()))?;
        let g = (self.mean[0] / self.mean[k]).ln() / (self.tau[k] - self.tau[0]);
        if g.is_finite() && g > 0.0 {
            Ok(g)
        } else {
            Err(Error::Sac(format!(
                "cannot infer a bandwidth from G(τ): decay rate {g}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SacConfig {
    pub n_omega: usize,
    /// Upper frequency; `None` uses `10 ×` [`SacInput::bandwidth_guess`].
    pub omega_max: Option<f64>,
    /// Fine grid for δ positions.
    pub n_grid: usize,
    /// Output histogram bins.
    pub n_hist: usize,
    /// Θ* criterion: `⟨χ²⟩ = χ²_min + a sqrt(2 χ²_min)`.
    pub a: f64,
    pub anneal_factor: f64,
    pub max_anneal_steps: usize,
    pub sweeps_per_step: usize,
    pub sample_sweeps: usize,
    pub seed: u64,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            n_omega: 500,
            omega_max: None,
            n_grid: 100_000,
            n_hist: 500,
            a: 0.5,
            anneal_factor: 1.2,
            max_anneal_steps: 250,
            sweeps_per_step: 100,
            sample_sweeps: 2000,
            seed: 1,
        }
    }
}

/// Metropolis sampler over δ positions on a fine frequency grid.
pub struct SacSampler {
    /// `kt[g · n_tau + k]`: projected kernel times amplitude.
    kt: Vec<f64>,
    target: Vec<f64>,
    n_tau: usize,
    pub omega_max: f64,
    pub n_grid: usize,
    pub amplitude: f64,
    pos: Vec<u32>,
    model: Vec<f64>,
    chi2: f64,
    window: f64,
    rng: ChaCha8Rng,
}

impl SacSampler {
    pub fn new(
        input: &SacInput,
        n_omega: usize,
        omega_max: f64,
        n_grid: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_omega == 0 || n_grid < 2 || !(omega_max > 0.0) {
            return Err(Error::Sac(
                "need n_omega > 0, n_grid > 1, omega_max > 0".into(),
            ));
        }
        let metric = Metric::new(&input.covariance)?;
        let n_tau = input.tau.len();
        let amplitude = input.total_weight() / n_omega as f64;
        let mut kt = Vec::with_capacity(n_grid * n_tau);
        for g in 0..n_grid {
            let w = omega_max * g as f64 / (n_grid - 1) as f64;
            let col: Vec<f64> = input
                .tau
                .iter()
                .map(|&t| amplitude * kernel(t, w, input.beta))
                .collect();
            kt.extend(metric.project(&col));
        }
        let target = metric.project(&input.mean);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pos: Vec<u32> = (0..n_omega)
            .map(|_| rng.gen_range(0..n_grid as u32))
            .collect();
        let mut s = Self {
            kt,
            target,
            n_tau,
            omega_max,
            n_grid,
            amplitude,
            pos,
            model: vec![0.0; n_tau],
            chi2: 0.0,
            window: n_grid as f64 / 10.0,
            rng,
        };
        s.recompute();
        Ok(s)
    }

    fn recompute(&mut self) {
        self.model.iter_mut().for_each(|m| *m = 0.0);
        for &p in &self.pos {
            let row = &self.kt[p as usize * self.n_tau..(p as usize + 1) * self.n_tau];
            self.model.iter_mut().zip(row).for_each(|(m, k)| *m += k);
        }
        self.chi2 = self
            .model
            .iter()
            .zip(&self.target)
            .map(|(m, t)| (m - t).powi(2))
            .sum();
    }

    pub fn chi2(&self) -> f64 {
        self.chi2
    }

    pub fn omegas(&self) -> Vec<f64> {
        self.pos.iter().map(|&p| self.omega(p)).collect()
    }

    fn omega(&self, p: u32) -> f64 {
        self.omega_max * p as f64 / (self.n_grid - 1) as f64
    }

    pub fn total_weight(&self) -> f64 {
        self.amplitude * self.pos.len() as f64
    }

    fn shift(&mut self) -> i64 {
        let w = self.window.max(1.0);
        let d = (self.rng.gen_range(-w..=w)).round() as i64;
        if d == 0 {
            if self.rng.gen() {
                1
            } else {
                -1
            }
        } else {
            d
        }
    }

    /// Try moving the listed δs by the given grid offsets.
    fn try_move(&mut self, moves: &[(usize, i64)], theta: f64) -> bool {
        let n = self.n_grid as i64;
        let mut new_pos = [0u32; 2];
        for (k, &(i, d)) in moves.iter().enumerate() {
            let p = self.pos[i] as i64 + d;
            if p < 0 || p >= n {
                return false;
            }
            new_pos[k] = p as u32;
        }
        let nt = self.n_tau;
        let mut delta = vec![0.0; nt];
        for (k, &(i, _)) in moves.iter().enumerate() {
            let (o, q) = (self.pos[i] as usize * nt, new_pos[k] as usize * nt);
            for t in 0..nt {
                delta[t] += self.kt[q + t] - self.kt[o + t];
            }
        }
        let mut chi2 = 0.0;
        for t in 0..nt {
            chi2 += (self.model[t] + delta[t] - self.target[t]).powi(2);
        }
        let dchi = chi2 - self.chi2;
        if dchi <= 0.0 || self.rng.gen::<f64>() < (-dchi / (2.0 * theta)).exp() {
            for (k, &(i, _)) in moves.iter().enumerate() {
                self.pos[i] = new_pos[k];
            }
            self.model.iter_mut().zip(&delta).for_each(|(m, d)| *m += d);
            self.chi2 = chi2;
            true
        } else {
            false
        }
    }

    /// One sweep of single-δ and opposite-shift pair moves; returns the acceptance rate.
    pub fn sweep(&mut self, theta: f64) -> f64 {
        let n = self.pos.len();
        let mut acc = 0usize;
        let mut tried = 0usize;
        for _ in 0..n {
            let i = self.rng.gen_range(0..n);
            let d = self.shift();
            acc += self.try_move(&[(i, d)], theta) as usize;
            tried += 1;
        }
        if n > 1 {
            for _ in 0..n / 2 {
                let i = self.rng.gen_range(0..n);
                let mut j = self.rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                let d = self.shift();
                acc += self.try_move(&[(i, d), (j, -d)], theta) as usize;
                tried += 1;
            }
        }
        let rate = acc as f64 / tried as f64;
        if rate > 0.5 {
            self.window = (self.window * 1.5).min(self.n_grid as f64);
        } else if rate < 0.3 {
            self.window = (self.window / 1.5).max(1.0);
        }
        // guard against drift from incremental updates
        self.recompute();
        rate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealStep {
    pub theta: f64,
    pub mean_chi2: f64,
    pub min_chi2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SacResult {
    pub beta: f64,
    /// Histogram bin centres.
    pub omega: Vec<f64>,
    /// Renormalized spectral density, `∫ B dω = π G(0)`.
    pub b: Vec<f64>,
    /// `S(ω) = B(ω) / (1 + e^{−βω})`.
    pub s: Vec<f64>,
    pub theta_star: f64,
    pub chi2_min: f64,
    pub chi2_at_theta_star: f64,
    /// χ² of the averaged spectrum.
    pub chi2_average: f64,
    pub n_tau: usize,
    pub anneal: Vec<AnnealStep>,
    /// `false` if χ²_min did not plateau within the allowed anneal steps.
    pub converged: bool,
}

impl SacResult {
    /// Positions of the `n` highest local maxima of `S(ω)`, ascending in ω.
    pub fn peaks(&self, n: usize) -> Vec<f64> {
        let s = &self.s;
        let mut m: Vec<usize> = (1..s.len().saturating_sub(1))
            .filter(|&i| s[i] > s[i - 1] && s[i] >= s[i + 1])
            .collect();
        if s.len() > 1 && s[0] > s[1] {
            m.push(0);
        }
        m.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
        m.truncate(n);
        let mut w: Vec<f64> = m.iter().map(|&i| self.omega[i]).collect();
        w.sort_by(|a, b| a.partial_cmp(b).unwrap());
        w
    }
}

/// Anneal, pick Θ*, then sample the averaged spectrum there.
pub fn run(input: &SacInput, cfg: &SacConfig) -> Result<SacResult> {
    let omega_max = match cfg.omega_max {
        Some(w) => w,
        None => 10.0 * input.bandwidth_guess()?,
    };
    let mut sm = SacSampler::new(input, cfg.n_omega, omega_max, cfg.n_grid, cfg.seed)?;
    let mut theta = sm.chi2().max(1.0);
    let mut steps = Vec::new();
    let mut saved: Vec<Vec<u32>> = Vec::new();
    let mut chi2_min = sm.chi2();
    let mut converged = false;
    for _ in 0..cfg.max_anneal_steps {
        let mut sum = 0.0;
        let mut lo = f64::INFINITY;
        for _ in 0..cfg.sweeps_per_step {
            sm.sweep(theta);
            sum += sm.chi2();
            lo = lo.min(sm.chi2());
        }
        let mean = sum / cfg.sweeps_per_step as f64;
        chi2_min = chi2_min.min(lo);
        steps.push(AnnealStep {
            theta,
            mean_chi2: mean,
            min_chi2: lo,
        });
        saved.push(sm.pos.clone());
        let tol = (cfg.a * (2.0 * chi2_min).sqrt()).max(1e-12 * input.tau.len() as f64);
        if mean - chi2_min < 0.05 * tol {
            converged = true;
            break;
        }
        theta /= cfg.anneal_factor;
    }
    let target = chi2_min + cfg.a * (2.0 * chi2_min).sqrt();
    let k = steps
        .iter()
        .position(|s| s.mean_chi2 <= target)
        .unwrap_or(steps.len() - 1);
    let theta_star = steps[k].theta;
    sm.pos = saved[k].clone();
    sm.recompute();

    let nh = cfg.n_hist;
    let dw = omega_max / nh as f64;
    let mut hist = vec![0.0; nh];
    let mut chi_sum = 0.0;
    let mut model_sum = vec![0.0; input.tau.len()];
    for _ in 0..cfg.sweeps_per_step {
        sm.sweep(theta_star);
    }
    for _ in 0..cfg.sample_sweeps {
        sm.sweep(theta_star);
        chi_sum += sm.chi2();
        for &p in &sm.pos {
            hist[((sm.omega(p) / dw) as usize).min(nh - 1)] += 1.0;
        }
        model_sum
            .iter_mut()
            .zip(&sm.model)
            .for_each(|(a, m)| *a += m);
    }
    let ns = cfg.sample_sweeps as f64;
    let chi2_average = model_sum
        .iter()
        .zip(&sm.target)
        .map(|(m, t)| (m / ns - t).powi(2))
        .sum();
    let omega: Vec<f64> = (0..nh).map(|i| (i as f64 + 0.5) * dw).collect();
    let b: Vec<f64> = hist.iter().map(|h| h / ns * sm.amplitude / dw).collect();
    let s = b
        .iter()
        .zip(&omega)
        .map(|(b, w)| b / (1.0 + (-input.beta * w).exp()))
        .collect();
    Ok(SacResult {
        beta: input.beta,
        omega,
        b,
        s,
        theta_star,
        chi2_min,
        chi2_at_theta_star: chi_sum / ns,
        chi2_average,
        n_tau: input.tau.len(),
        anneal: steps,
        converged,
    })
}

/// Noisy synthetic `G(τ)` of a δ-spectrum `B(ω) = Σ w_i δ(ω − ω_i)`.
pub fn synthetic_input(
    beta: f64,
    tau: &[f64],
    peaks: &[(f64, f64)],
    rel_noise: f64,
    seed: u64,
) -> Result<SacInput> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exact: Vec<f64> = tau
        .iter()
        .map(|&t| peaks.iter().map(|&(w, a)| a * kernel(t, w, beta)).sum())
        .collect();
    let sigma: Vec<f64> = exact.iter().map(|g| rel_noise * g).collect();
    let mean = exact
        .iter()
        .zip(&sigma)
        .map(|(g, s)| {
            let (u, v): (f64, f64) = (rng.gen::<f64>().max(f64::MIN_POSITIVE), rng.gen());
            g + s * (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
        })
        .collect();
    let floor = sigma.iter().cloned().fold(0.0, f64::max) * 1e-6;
    let sig: Vec<f64> = sigma.iter().map(|s| s.max(floor).max(1e-300)).collect();
    SacInput::diagonal(beta, tau.to_vec(), mean, &sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sse::tau_grid;

    #[test]
    fn kernel_limits() {
        for t in [0.0, 0.7, 3.0] {
            assert!((kernel(t, 0.0, 5.0) - 1.0 / PI).abs() < 1e-15);
            assert!((kernel(t, 1.3, 5.0) - kernel(5.0 - t, 1.3, 5.0)).abs() < 1e-15);
        }
        let (b, w) = (40.0, 2.0);
        assert!((kernel(b / 2.0, w, b) / (2.0 * (-b * w / 2.0).exp() / PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi2_reductions() {
        let tau = vec![0.0, 0.5, 1.0];
        let mean: Vec<f64> = tau.iter().map(|&t| 2.0 * kernel(t, 1.5, 4.0)).collect();
        let sig = [0.01, 0.02, 0.03];
        let inp = SacInput::diagonal(4.0, tau.clone(), mean.clone(), &sig).unwrap();
        assert!(inp.chi2(&[1.5], &[2.0]).unwrap() < 1e-20);
        let g = inp.model(&[1.0], &[2.0]);
        let direct: f64 = (0..3).map(|i| ((g[i] - mean[i]) / sig[i]).powi(2)).sum();
        assert!((inp.chi2(&[1.0], &[2.0]).unwrap() - direct).abs() < 1e-9 * direct);
    }

    #[test]
    fn input_validation() {
        assert!(SacInput::diagonal(2.0, vec![0.0, 3.0], vec![1.0, 0.5], &[0.1, 0.1]).is_err());
        assert!(SacInput::diagonal(2.0, vec![0.0, 1.0], vec![-1.0, 0.5], &[0.1, 0.1]).is_err());
        assert!(SacInput::diagonal(2.0, vec![0.1, 1.0], vec![1.0, 0.5], &[0.1, 0.1]).is_err());
        assert!(SacInput::from_bins(2.0, vec![0.0, 1.0], &vec![vec![1.0, 0.5]; 10]).is_err());
    }

    #[test]
    fn weight_conserved_and_flat_prior_at_infinite_theta() {
        let tau = tau_grid(10.0, 20);
        let inp = synthetic_input(10.0, &tau, &[(1.0, 1.0)], 1e-4, 3).unwrap();
        let mut s = SacSampler::new(&inp, 500, 8.0, 4000, 5).unwrap();
        let w0 = s.total_weight();
        for _ in 0..200 {
            s.sweep(1e300);
        }
        assert_eq!(s.total_weight(), w0);
        // Kolmogorov–Smirnov against uniform on [0, ω_max]
        let mut x: Vec<f64> = s.omegas().iter().map(|w| w / 8.0).collect();
        x.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = x.len() as f64;
        let d = x
            .iter()
            .enumerate()
            .map(|(i, &v)| (v - i as f64 / n).abs().max(((i + 1) as f64 / n - v).abs()))
            .fold(0.0, f64::max);
        assert!(d < 1.95 / n.sqrt(), "KS D = {d}");
    }

    #[test]
    fn noiseless_single_delta() {
        let beta = 10.0;
        let tau = tau_grid(beta, 30);
        let exact: Vec<f64> = tau.iter().map(|&t| kernel(t, 1.2, beta)).collect();
        let sig: Vec<f64> = exact.iter().map(|g| 1e-5 * g).collect();
        let inp = SacInput::diagonal(beta, tau, exact, &sig).unwrap();
        let cfg = SacConfig {
            n_omega: 200,
            sample_sweeps: 500,
            ..Default::default()
        };
        let r = run(&inp, &cfg).unwrap();
        let spacing = r.omega[1] - r.omega[0];
        let p = r.peaks(1)[0];
        assert!((p - 1.2).abs() <= spacing, "peak {p}, spacing {spacing}");
        assert!(
            r.chi2_average / r.n_tau as f64 <= 2.0,
            "χ²/N_τ = {}",
            r.chi2_average / r.n_tau as f64
        );
        let total: f64 = r.b.iter().sum::<f64>() * spacing;
        assert!((total - PI * inp.mean[0]).abs() < 1e-9 * total);
    }
}
