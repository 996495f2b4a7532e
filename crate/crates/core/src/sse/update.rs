use rand::distributions::Distribution;
use rand::Rng;

use super::{
    encode, index, kind, term_allowed, ChainState, SectorGuard, SseHamiltonian, BOND, IDENTITY,
    NO_SITE, SITE_DIAG, SITE_FLIP,
};

const NONE: usize = usize::MAX;
/// Legs per slot: three lower, then three upper.
const LEGS: usize = 6;

/// Reusable buffers for the cluster update.
#[derive(Debug, Clone, Default)]
pub(crate) struct Scratch {
    parent: Vec<usize>,
    first: Vec<usize>,
    last: Vec<usize>,
    /// 0 undecided, 1 keep, 2 flip.
    decision: Vec<u8>,
    members: Vec<Vec<usize>>,
    root_slot: Vec<usize>,
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}

/// Exchange identities and diagonal operators slot by slot.
pub(crate) fn diagonal_update(ham: &SseHamiltonian, st: &mut ChainState) {
    let m = st.ops.len();
    let bw = st.beta * ham.total_weight;
    let mut spins = std::mem::take(&mut st.spins);
    for p in 0..m {
        let op = st.ops[p];
        match kind(op) {
            IDENTITY => {
                if st.rng.gen::<f64>() * ((m - st.n_ops) as f64) >= bw {
                    continue;
                }
                let new = if st.rng.gen::<f64>() * ham.total_weight < ham.site_weight {
                    encode(SITE_DIAG, st.rng.gen_range(0..ham.n_sites))
                } else {
                    let b = match &ham.term_picker {
                        Some(pick) => pick.sample(&mut st.rng),
                        None => continue,
                    };
                    if !term_allowed(&ham.terms[b], &spins) {
                        continue;
                    }
                    encode(BOND, b)
                };
                st.ops[p] = new;
                st.n_ops += 1;
            }
            SITE_DIAG | BOND => {
                if st.rng.gen::<f64>() * bw < (m - st.n_ops + 1) as f64 {
                    st.ops[p] = IDENTITY;
                    st.n_ops -= 1;
                }
            }
            _ => spins[index(op)] ^= 1,
        }
    }
    st.spins = spins;
}

/// Build clusters, flip each with probability ½ (subject to the sector
/// guard for clusters reaching the trial state near the cuts).
pub(crate) fn cluster_update(
    ham: &SseHamiltonian,
    guard: Option<&SectorGuard>,
    st: &mut ChainState,
    sc: &mut Scratch,
) {
    let n = ham.n_sites;
    let m = st.ops.len();
    sc.parent.clear();
    sc.parent.extend(0..LEGS * m);
    sc.first.clear();
    sc.first.resize(n, NONE);
    sc.last.clear();
    sc.last.resize(n, NONE);

    let rng = &mut st.rng;
    let mut cur = st.spins.clone();
    for (p, &op) in st.ops.iter().enumerate() {
        let sites: [usize; 3] = match kind(op) {
            IDENTITY => continue,
            BOND => ham.terms[index(op)],
            _ => [index(op), NO_SITE, NO_SITE],
        };
        for (leg, &s) in sites.iter().enumerate() {
            if s == NO_SITE {
                continue;
            }
            let lower = LEGS * p + leg;
            if sc.last[s] == NONE {
                sc.first[s] = lower;
            } else {
                union(&mut sc.parent, sc.last[s], lower);
            }
            sc.last[s] = lower + 3;
        }
        let base = LEGS * p;
        match kind(op) {
            BOND if sites[2] == NO_SITE => {
                union(&mut sc.parent, base, base + 1);
                union(&mut sc.parent, base, base + 3);
                union(&mut sc.parent, base, base + 4);
            }
            BOND => {
                for leg in 0..3 {
                    union(&mut sc.parent, base + leg, base + leg + 3);
                }
                let v = sites.map(|s| cur[s]);
                let minority = if v[0] == v[1] {
                    2
                } else if v[0] == v[2] {
                    1
                } else {
                    0
                };
                let partner = (minority + if rng.gen::<bool>() { 1 } else { 2 }) % 3;
                union(&mut sc.parent, base + minority, base + partner);
            }
            SITE_FLIP => cur[sites[0]] ^= 1,
            _ => {}
        }
    }
    for s in 0..n {
        if sc.first[s] != NONE {
            union(&mut sc.parent, sc.last[s], sc.first[s]);
        }
    }

    // clusters are labelled by root leg; free sites by 4m + site
    sc.decision.clear();
    sc.decision.resize(LEGS * m + n, 0);
    let mut decide = |decision: &mut [u8], r: usize| {
        if decision[r] == 0 {
            decision[r] = if rng.gen::<bool>() { 2 } else { 1 };
        }
        decision[r] == 2
    };

    let label = |sc: &mut Scratch, s: usize| {
        if sc.first[s] == NONE {
            LEGS * m + s
        } else {
            find(&mut sc.parent, sc.first[s])
        }
    };

    let spins = &mut st.spins;
    match guard {
        None => {
            for s in 0..n {
                let r = label(sc, s);
                if decide(&mut sc.decision, r) {
                    spins[s] ^= 1;
                }
            }
        }
        Some(guard) => {
            // unguarded clusters flip freely; guarded ones are tested one by one
            sc.root_slot.clear();
            sc.root_slot.resize(LEGS * m + n, NONE);
            let mut used = 0;
            for s in 0..n {
                let r = label(sc, s);
                if guard.guarded[s] && sc.root_slot[r] == NONE {
                    sc.root_slot[r] = used;
                    if sc.members.len() <= used {
                        sc.members.push(Vec::new());
                    }
                    sc.members[used].clear();
                    used += 1;
                }
            }
            for s in 0..n {
                let r = label(sc, s);
                if sc.root_slot[r] != NONE {
                    sc.members[sc.root_slot[r]].push(s);
                } else if decide(&mut sc.decision, r) {
                    spins[s] ^= 1;
                }
            }
            for k in 0..used {
                let r = label(sc, sc.members[k][0]);
                if !decide(&mut sc.decision, r) {
                    continue;
                }
                for &s in &sc.members[k] {
                    spins[s] ^= 1;
                }
                if !guard.allows(spins) {
                    for &s in &sc.members[k] {
                        spins[s] ^= 1;
                    }
                    sc.decision[r] = 1;
                }
            }
        }
    }

    for p in 0..m {
        let op = st.ops[p];
        let k = kind(op);
        if k != SITE_DIAG && k != SITE_FLIP {
            continue;
        }
        let mut toggles = 0;
        for leg in [LEGS * p, LEGS * p + 3] {
            let r = find(&mut sc.parent, leg);
            if decide(&mut sc.decision, r) {
                toggles ^= 1;
            }
        }
        if toggles == 1 {
            st.ops[p] = encode(k ^ 3, index(op));
        }
    }
}
