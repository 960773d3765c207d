//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use entangle_core::verify::{derive_seed, random_pure_state};
use entangle_core::{
    subset_rank, tensor_product, EntanglementCombination, PartySubset, PureState, SystemShape,
    Tolerances,
};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `ρ_keep` by summing `ψ_i ψ_j*` over every pair of full basis indices
/// whose traced digits agree. Rows and columns use the kept parties'
/// mixed-radix index.
pub fn brute_force_partial_trace(state: &PureState, keep: &[usize]) -> Vec<Vec<Complex64>> {
    let dims = state.dims();
    let n = dims.len();
    let digits = |mut idx: usize| {
        let mut d = vec![0; n];
        for k in (0..n).rev() {
            d[k] = idx % dims[k];
            idx /= dims[k];
        }
        d
    };
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let mut rho = vec![vec![Complex64::new(0.0, 0.0); kept_dim]; kept_dim];
    let amps = state.amplitudes();
    for i in 0..amps.len() {
        let di = digits(i);
        for j in 0..amps.len() {
            let dj = digits(j);
            if (0..n).any(|k| !keep.contains(&k) && di[k] != dj[k]) {
                continue;
            }
            let row = keep.iter().fold(0, |acc, &k| acc * dims[k] + di[k]);
            let col = keep.iter().fold(0, |acc, &k| acc * dims[k] + dj[k]);
            rho[row][col] += amps[i] * amps[j].conj();
        }
    }
    rho
}

/// Finest product partition: parties `a` and `b` share a block iff every
/// separable bipartition keeps them on the same side. All `2^n - 2`
/// bipartitions are tested.
pub fn exhaustive_ec(state: &PureState, tol: &Tolerances) -> EntanglementCombination {
    let n = state.parties();
    let separable: Vec<u64> = (1..(1u64 << n) - 1)
        .filter(|&mask| {
            let s = PartySubset::new(mask, n).unwrap();
            subset_rank(state, s, tol).unwrap() == 1
        })
        .collect();
    let mut block_of = vec![usize::MAX; n];
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for a in 0..n {
        if block_of[a] != usize::MAX {
            continue;
        }
        let mut block = vec![a];
        block_of[a] = blocks.len();
        let id = blocks.len();
        for (b, slot) in block_of.iter_mut().enumerate().skip(a + 1) {
            let together = separable.iter().all(|&m| (m >> a & 1) == (m >> b & 1));
            if together && *slot == usize::MAX {
                *slot = id;
                block.push(b);
            }
        }
        blocks.push(block);
    }
    let subsets = blocks
        .iter()
        .map(|b| PartySubset::from_parties(b, n).unwrap())
        .collect();
    EntanglementCombination::new(subsets, n).unwrap()
}

/// Random state with a random block structure: a random partition of `n`
/// qubits into blocks, a random state on each block, tensored together and
/// with the parties shuffled. Returns the state and its true partition.
pub fn structured_state(n: usize, seed: u64) -> (PureState, Vec<Vec<usize>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sizes = Vec::new();
    let mut left = n;
    while left > 0 {
        let s = rng.random_range(1..=left);
        sizes.push(s);
        left -= s;
    }
    let mut state: Option<PureState> = None;
    for (i, &s) in sizes.iter().enumerate() {
        let shape = SystemShape::qubits(s).unwrap();
        let block = random_pure_state(&shape, derive_seed(seed, i as u64)).unwrap();
        state = Some(match state {
            None => block,
            Some(acc) => tensor_product(&acc, &block).unwrap(),
        });
    }
    let state = state.unwrap();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut blocks = Vec::new();
    let mut start = 0;
    for &s in &sizes {
        let mut b: Vec<usize> = (start..start + s).map(|k| perm[k]).collect();
        b.sort();
        blocks.push(b);
        start += s;
    }
    blocks.sort();
    (state.permute_parties(&perm).unwrap(), blocks)
}

pub fn max_amp_diff(a: &PureState, b: &PureState) -> f64 {
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Closed-form binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -(p * p.log2() + (1.0 - p) * (1.0 - p).log2())
}
