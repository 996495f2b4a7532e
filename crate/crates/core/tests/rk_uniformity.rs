use std::collections::HashMap;

use rydberg_gauge::gauge::DimerCover;
use rydberg_gauge::lattice::Lattice;
use rydberg_gauge::rk::{by_sector, enumerate_covers, winding_of, RkSampler, SectorPolicy};
use rydberg_gauge::sse::chain_rng;

/// Pearson χ² of visit counts against a uniform distribution over `support`.
fn chi2_uniform(samples: &[DimerCover], support: &[DimerCover]) -> (f64, usize) {
    let index: HashMap<&Vec<bool>, usize> =
        support.iter().enumerate().map(|(i, c)| (&c.0, i)).collect();
    let mut counts = vec![0usize; support.len()];
    for s in samples {
        counts[*index
            .get(&s.0)
            .expect("sampled cover outside the enumerated support")] += 1;
    }
    let e = samples.len() as f64 / support.len() as f64;
    (
        counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum(),
        support.len() - 1,
    )
}

fn accept(chi2: f64, dof: usize) -> bool {
    chi2 < dof as f64 + 5.0 * (2.0 * dof as f64).sqrt()
}

#[test]
fn free_worms_sample_all_covers_uniformly() {
    for (lx, ly, seed) in [(3, 3, 1), (4, 3, 2)] {
        let lat = Lattice::new(lx, ly).unwrap();
        let all = enumerate_covers(&lat).unwrap();
        let mut s =
            RkSampler::new(&lat, all[0].clone(), SectorPolicy::Free, chain_rng(seed, 0)).unwrap();
        let samples = s.sample(100, 300 * all.len(), 2);
        let (chi2, dof) = chi2_uniform(&samples, &all);
        assert!(accept(chi2, dof), "{lx}x{ly}: χ² = {chi2:.1} for {dof} dof");
    }
}

#[test]
fn fixed_worms_sample_their_sector_uniformly() {
    for (lx, ly, seed) in [(3, 3, 3), (4, 3, 4)] {
        let lat = Lattice::new(lx, ly).unwrap();
        let all = enumerate_covers(&lat).unwrap();
        let sectors = by_sector(&all, &lat);
        let (_, largest) = sectors.iter().max_by_key(|(_, v)| v.len()).unwrap();
        let mut s = RkSampler::new(
            &lat,
            largest[0].clone(),
            SectorPolicy::Fixed,
            chain_rng(seed, 0),
        )
        .unwrap();
        let w0 = winding_of(&largest[0], &lat);
        let samples = s.sample(100, 300 * largest.len(), 2);
        assert!(samples.iter().all(|c| winding_of(c, &lat) == w0));
        let (chi2, dof) = chi2_uniform(&samples, largest);
        assert!(accept(chi2, dof), "{lx}x{ly}: χ² = {chi2:.1} for {dof} dof");
    }
}
