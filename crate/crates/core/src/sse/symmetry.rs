//! Lattice translations acting on a whole SSE configuration.

use std::collections::HashMap;

use super::{encode, index, kind, ChainState, SseHamiltonian, BOND, IDENTITY, NO_SITE};
use crate::lattice::Lattice;

/// Images of sites and interaction terms under one lattice translation.
#[derive(Debug, Clone)]
pub(crate) struct Translation {
    sites: Vec<usize>,
    terms: Vec<usize>,
}

/// Translations by `±a₁` and `±a₂`; empty if the term list is not invariant.
pub(crate) fn translations(lat: &Lattice, ham: &SseHamiltonian) -> Vec<Translation> {
    let key = |t: &[usize; 3]| {
        let mut k = *t;
        k.sort_unstable();
        k
    };
    let mut lookup: HashMap<[usize; 3], Vec<usize>> = HashMap::new();
    for (i, t) in ham.terms.iter().enumerate() {
        lookup.entry(key(t)).or_default().push(i);
    }
    let build = |dx: i64, dy: i64| -> Option<Translation> {
        let sites: Vec<usize> = (0..lat.n_sites())
            .map(|s| {
                let (x, y) = lat.coords(s);
                lat.site(x as i64 + dx, y as i64 + dy)
            })
            .collect();
        let mut used: HashMap<[usize; 3], usize> = HashMap::new();
        let mut terms = Vec::with_capacity(ham.terms.len());
        for (i, t) in ham.terms.iter().enumerate() {
            let k = key(&t.map(|s| if s == NO_SITE { NO_SITE } else { sites[s] }));
            let c = used.entry(k).or_default();
            let j = *lookup.get(&k)?.get(*c)?;
            *c += 1;
            if ham.term_u[j] != ham.term_u[i] {
                return None;
            }
            terms.push(j);
        }
        Some(Translation { sites, terms })
    };
    [(1, 0), (-1, 0), (0, 1), (0, -1)]
        .into_iter()
        .map(|(dx, dy)| build(dx, dy))
        .collect::<Option<Vec<_>>>()
        .unwrap_or_default()
}

impl Translation {
    /// Translate the trial state and every operator.
    pub(crate) fn apply(&self, st: &mut ChainState) {
        let mut spins = vec![0u8; st.spins.len()];
        for (s, &v) in st.spins.iter().enumerate() {
            spins[self.sites[s]] = v;
        }
        st.spins = spins;
        for op in st.ops.iter_mut() {
            *op = match kind(*op) {
                IDENTITY => continue,
                BOND => encode(BOND, self.terms[index(*op)]),
                k => encode(k, self.sites[index(*op)]),
            };
        }
    }
}
