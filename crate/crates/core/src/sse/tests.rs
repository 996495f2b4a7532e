use super::*;
use crate::model::{classical_energy, coupling_table, ModelParams};
use crate::stats::BinnedSeries;

fn free_spin(omega: f64, beta: f64, seed: u64) -> Chain {
    let ham = SseHamiltonian::custom(1, &[], omega).unwrap();
    Chain::new(ham, beta, SpinConfig(vec![0]), chain_rng(seed, 0)).unwrap()
}

fn cfg(t: usize, m: usize, b: usize) -> RunConfig {
    RunConfig {
        n_therm: t,
        n_meas: m,
        n_bins: b,
    }
}

#[test]
fn free_spin_energy_and_transverse_field() {
    let (omega, beta) = (1.3, 2.0);
    let mut c = free_spin(omega, beta, 1);
    let r = run(&mut c, &cfg(1000, 100_000, 50), &MeasureSpec::default()).unwrap();
    let exact = -0.5 * omega * (0.5 * beta * omega).tanh();
    assert!(
        (r.mean("energy") - exact).abs() < 3.0 * r.error("energy"),
        "{} vs {exact}",
        r.mean("energy")
    );
    let sx = 0.5 * (0.5 * beta * omega).tanh();
    assert!((r.mean("sx_per_site") - sx).abs() < 3.0 * r.error("sx_per_site"));
}

#[test]
fn error_bars_cover_truth_at_expected_rate() {
    let (omega, beta) = (1.0f64, 1.0f64);
    let exact = -0.5 * omega * (0.5 * beta * omega).tanh();
    let hits = (0..100)
        .filter(|&seed| {
            let mut c = free_spin(omega, beta, 1000 + seed);
            let r = run(&mut c, &cfg(200, 4000, 20), &MeasureSpec::default()).unwrap();
            (r.mean("energy") - exact).abs() < r.error("energy")
        })
        .count();
    // binomial(100, 0.683): 3σ band
    assert!(
        (54..=82).contains(&hits),
        "{hits} of 100 intervals cover the exact value"
    );
}

#[test]
fn single_bond_classical_order_is_poisson() {
    let (u, beta) = (1.0f64, 6.0f64);
    let ham = SseHamiltonian::custom(2, &[(0, 1, u)], 0.0).unwrap();
    let mut c = Chain::new(ham, beta, SpinConfig(vec![0, 1]), chain_rng(3, 0)).unwrap();
    let r = run(&mut c, &cfg(500, 40_000, 40), &MeasureSpec::default()).unwrap();
    // antiparallel states carry weight e^{βU/2}, parallel ones only n = 0
    let p_anti = 1.0 / (1.0 + (-0.5 * beta * u).exp());
    let mean = 0.5 * beta * u * p_anti;
    assert!((r.mean("n_ops") - mean).abs() < 3.0 * r.error("n_ops"));
    let e = -0.25 * u * p_anti + 0.25 * u * (1.0 - p_anti);
    assert!((r.mean("diag_energy") - e).abs() < 3.0 * r.error("diag_energy"));
}

/// `Tr(H̃ⁿ)` for two spins with bond `u` and field `ω`, with `H̃ = C − H`.
fn two_site_traces(u: f64, omega: f64, nmax: usize) -> Vec<f64> {
    let mut h = [[0.0f64; 4]; 4];
    for s in 0..4 {
        let (a, b) = (s & 1, (s >> 1) & 1);
        h[s][s] = omega + if a != b { 0.5 * u } else { 0.0 };
        h[s][s ^ 1] += 0.5 * omega;
        h[s][s ^ 2] += 0.5 * omega;
    }
    let mut p = [[0.0f64; 4]; 4];
    (0..4).for_each(|i| p[i][i] = 1.0);
    let mut out = Vec::new();
    for _ in 0..=nmax {
        out.push((0..4).map(|i| p[i][i]).sum());
        let mut q = [[0.0f64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                q[i][j] = (0..4).map(|k| p[i][k] * h[k][j]).sum();
            }
        }
        p = q;
    }
    out
}

#[test]
fn two_site_expansion_order_distribution() {
    let (u, omega, beta) = (1.0, 0.8, 1.5f64);
    let nmax = 8;
    let tr = two_site_traces(u, omega, nmax + 30);
    let mut w: Vec<f64> = Vec::new();
    let mut fact = 1.0;
    for (n, t) in tr.iter().enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        w.push(beta.powi(n as i32) / fact * t);
    }
    let z: f64 = w.iter().sum();

    let ham = SseHamiltonian::custom(2, &[(0, 1, u)], omega).unwrap();
    let mut c = Chain::new(ham, beta, SpinConfig(vec![0, 0]), chain_rng(4, 0)).unwrap();
    for _ in 0..2000 {
        c.sweep();
        c.grow_cutoff();
    }
    c.state.ops.resize(c.cutoff().max(40), IDENTITY);
    let sweeps = 200_000;
    let mut hits = vec![Vec::with_capacity(sweeps); nmax + 1];
    for _ in 0..sweeps {
        c.sweep();
        for (n, h) in hits.iter_mut().enumerate() {
            h.push((c.n_ops() == n) as u8 as f64);
        }
    }
    for (n, h) in hits.iter().enumerate() {
        let s = BinnedSeries::from_samples(h, 100);
        let p = w[n] / z;
        assert!(
            (s.mean() - p).abs() < 3.0 * s.error() + 1e-4,
            "n = {n}: {} vs {p}",
            s.mean()
        );
    }
}

fn lattice_chain(l: usize, omega: f64, u2: f64, u3: f64, beta: f64, seed: u64) -> (Lattice, Chain) {
    let lat = Lattice::new(l, l).unwrap();
    let tbl = coupling_table(&ModelParams::explicit(omega, 1.0, u2, u3)).unwrap();
    let c = Chain::for_lattice(
        &lat,
        &tbl,
        beta,
        SpinConfig::all_down(l * l),
        chain_rng(seed, 0),
    )
    .unwrap();
    (lat, c)
}

#[test]
fn classical_limit_inserts_only_diagonal_operators() {
    let (lat, mut c) = lattice_chain(6, 0.0, 0.0, 0.0, 36.0, 5);
    c.state.spins = SpinConfig::stripe(&lat).0;
    for _ in 0..200 {
        c.sweep();
        c.grow_cutoff();
        assert!(c
            .operators()
            .all(|o| matches!(o, Operator::Identity | Operator::BondDiag(_))));
    }
    let tbl = coupling_table(&ModelParams::explicit(0.0, 1.0, 0.0, 0.0)).unwrap();
    let e0 = classical_energy(&SpinConfig::stripe(&lat), &tbl, &lat).unwrap();
    assert_eq!(c.hamiltonian().diagonal_energy(&c.state.spins), e0);
}

#[test]
fn updates_keep_the_string_periodic() {
    let (_, mut c) = lattice_chain(3, 0.7, 0.3, 0.1, 4.0, 6);
    for _ in 0..300 {
        c.diagonal_update();
        c.check_periodic().unwrap();
        c.cluster_update();
        c.check_periodic().unwrap();
        c.grow_cutoff();
    }
}

#[test]
fn same_seed_same_bits() {
    let spec = MeasureSpec {
        momenta: vec![NamedMomentum::new("K", crate::lattice::K_POINT)],
        order_params: true,
        ..Default::default()
    };
    let go = || {
        let (_, mut c) = lattice_chain(3, 0.5, 0.2, 0.1, 2.0, 7);
        let r = run(&mut c, &cfg(100, 400, 4), &spec).unwrap();
        serde_json::to_string(&r.series).unwrap()
    };
    assert_eq!(go(), go());
}

#[test]
fn half_filling_magnetization_vanishes() {
    let (_, mut c) = lattice_chain(3, 1.0, 0.2, 0.1, 2.0, 8);
    let r = run(&mut c, &cfg(500, 20_000, 20), &MeasureSpec::default()).unwrap();
    assert!(r.mean("sz").abs() < 3.0 * r.error("sz") + 1e-3);
}

#[test]
fn rejects_bad_run_and_model() {
    let (_, mut c) = lattice_chain(3, 1.0, 0.0, 0.0, 2.0, 9);
    assert!(run(&mut c, &cfg(1, 10, 3), &MeasureSpec::default()).is_err());
    let lat = Lattice::new(3, 3).unwrap();
    let mut p = ModelParams::explicit(1.0, 1.0, 0.0, 0.0);
    p.delta = Some(1.0);
    let tbl = coupling_table(&p).unwrap();
    assert!(SseHamiltonian::from_model(&lat, &tbl).is_err());
    assert!(SseHamiltonian::custom(2, &[(0, 0, 1.0)], 1.0).is_err());
    let ham = SseHamiltonian::custom(1, &[], 1.0).unwrap();
    assert!(Chain::new(ham, -1.0, SpinConfig(vec![0]), chain_rng(0, 0)).is_err());
}

#[test]
fn checkpoint_resume_is_bit_exact() {
    let (lat, mut a) = lattice_chain(3, 0.6, 0.2, 0.1, 3.0, 10);
    let rc = cfg(50, 100, 5);
    run(&mut a, &rc, &MeasureSpec::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ck.json");
    Checkpoint::of(&a, None).save(&path).unwrap();
    let tbl = coupling_table(&ModelParams::explicit(0.6, 1.0, 0.2, 0.1)).unwrap();
    let ham = SseHamiltonian::from_model(&lat, &tbl).unwrap();
    let mut b = Checkpoint::load(&path)
        .unwrap()
        .resume(ham, Some(lat))
        .unwrap();
    let ra = run(&mut a, &cfg(0, 100, 5), &MeasureSpec::default()).unwrap();
    let rb = run(&mut b, &cfg(0, 100, 5), &MeasureSpec::default()).unwrap();
    assert_eq!(
        serde_json::to_string(&ra.series).unwrap(),
        serde_json::to_string(&rb.series).unwrap()
    );
    assert_eq!(a.state, b.state);
}

#[test]
fn sector_constraint_pins_trial_state_fluxes() {
    let (lat, mut c) = lattice_chain(6, 0.3, 0.0, 0.0, 36.0, 11);
    for f in [0.0, 2.0, 1.0] {
        c.constrain_sector(f).unwrap();
        let target = gauge::spin_winding(&c.spins(), &lat);
        assert_eq!(target.f(&lat), f);
        for _ in 0..300 {
            c.sweep();
            c.grow_cutoff();
            assert_eq!(gauge::spin_winding(&c.spins(), &lat), target);
        }
    }
    assert!(c.constrain_sector(0.25).is_err());
}

#[test]
fn classical_imaginary_time_correlator_is_flat() {
    let (lat, mut c) = lattice_chain(6, 0.0, 0.0, 0.0, 8.0, 12);
    c.state.spins = SpinConfig::clock(&lat).0;
    let spec = MeasureSpec {
        imag_time: vec![ImagTimeSpec::new(
            ImagTimeObservable::Density,
            vec![NamedMomentum::new("K", crate::lattice::K_POINT)],
        )],
        ..Default::default()
    };
    let r = run(&mut c, &cfg(20, 40, 4), &spec).unwrap();
    let g = r.imag_time[0].mean(0);
    assert!(g
        .iter()
        .all(|v| (v - g[0]).abs() < 1e-9 * g[0].abs().max(1.0)));
}

#[test]
fn imaginary_time_symmetry_and_equal_time_limit() {
    let (_, mut c) = lattice_chain(3, 1.0, 0.2, 0.1, 2.0, 13);
    let beta = 2.0;
    let tau: Vec<f64> = (0..=8).map(|k| k as f64 * beta / 8.0).collect();
    let k = NamedMomentum::new("K", crate::lattice::K_POINT);
    let mut it = ImagTimeSpec::new(ImagTimeObservable::Density, vec![k.clone()]);
    it.tau = Some(tau);
    let spec = MeasureSpec {
        momenta: vec![k],
        imag_time: vec![it],
        ..Default::default()
    };
    let r = run(&mut c, &cfg(500, 20_000, 20), &spec).unwrap();
    let g = r.imag_time[0].mean(0);
    let e = r.imag_time[0].errors(0);
    for i in 0..=8 {
        let j = 8 - i;
        assert!((g[i] - g[j]).abs() < 3.0 * (e[i].powi(2) + e[j].powi(2)).sqrt() + 1e-12);
    }
    assert!(g[4] < g[0]);
    let s = r.get("S(K)").unwrap();
    assert!((g[0] - s.mean()).abs() < 3.0 * (e[0].powi(2) + s.error().powi(2)).sqrt());
}

#[test]
fn tau_outside_range_is_rejected() {
    let (_, mut c) = lattice_chain(3, 1.0, 0.0, 0.0, 2.0, 14);
    let mut it = ImagTimeSpec::new(
        ImagTimeObservable::ElectricY,
        vec![NamedMomentum::new("G", [0.0, 0.0])],
    );
    it.tau = Some(vec![0.0, 3.0]);
    let spec = MeasureSpec {
        imag_time: vec![it],
        ..Default::default()
    };
    assert!(matches!(
        run(&mut c, &cfg(1, 2, 1), &spec),
        Err(Error::TauOutOfRange(_))
    ));
}

#[test]
fn tau_grid_is_quadratic() {
    let t = tau_grid(8.0, 50);
    assert_eq!(t.len(), 50);
    assert_eq!(t[0], 0.0);
    assert!((t[49] - 4.0).abs() < 1e-12);
    assert!(t.windows(3).all(|w| w[2] - w[1] > w[1] - w[0]));
}

#[test]
fn translations_are_consistent_permutations() {
    for vertices in [Vertices::Bond, Vertices::Triangle] {
        let lat = Lattice::new(6, 3).unwrap();
        let tbl = coupling_table(&ModelParams::from_omega_ratios(0.5, 0.547, 0.215)).unwrap();
        let ham = SseHamiltonian::from_model_with(&lat, &tbl, vertices).unwrap();
        let mut c =
            Chain::for_lattice_with(&lat, ham, 4.0, SpinConfig::clock(&lat), chain_rng(9, 0))
                .unwrap();
        assert_eq!(c.translations.len(), 4);
        for _ in 0..50 {
            c.sweep();
            c.grow_cutoff();
        }
        let before = c.state.clone();
        let e = c.hamiltonian().diagonal_energy(&c.state.spins);
        c.translations[0].apply(&mut c.state);
        c.check_periodic().unwrap();
        assert!((c.hamiltonian().diagonal_energy(&c.state.spins) - e).abs() < 1e-12);
        c.translations[1].apply(&mut c.state);
        assert_eq!(c.state, before);
        for _ in 0..3 {
            c.translations[2].apply(&mut c.state);
        }
        assert_eq!(c.state, before);
    }
}
