//! Combinatorial entropy of fully entangled states (CEF), the entanglement
//! combination (EC) partition and the combinatorial entropy (CE).

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::state::{
    extract_factor, full_mask, probe_rank, subset_entropy, PartySubset, PureState, Tolerances,
};

/// Partition of the parties into fully entangled blocks, in the order the
/// blocks were discovered.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntanglementCombination {
    blocks: Vec<PartySubset>,
    n: usize,
}

impl EntanglementCombination {
    /// Checks that `blocks` are nonempty, pairwise disjoint and cover all
    /// `n` parties.
    pub fn new(blocks: Vec<PartySubset>, n: usize) -> Result<Self> {
        let mut seen = 0u64;
        for b in &blocks {
            if b.parties() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: b.parties(),
                });
            }
            if b.is_empty() || seen & b.mask() != 0 {
                return Err(Error::InvalidShape(format!(
                    "blocks do not form a partition of {n} parties"
                )));
            }
            seen |= b.mask();
        }
        if seen != full_mask(n) {
            return Err(Error::InvalidShape(format!(
                "blocks do not cover all {n} parties"
            )));
        }
        Ok(EntanglementCombination { blocks, n })
    }

    pub fn blocks(&self) -> &[PartySubset] {
        &self.blocks
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Every party is its own block.
    pub fn is_separable(&self) -> bool {
        self.blocks.len() == self.n
    }

    pub fn is_fully_entangled(&self) -> bool {
        self.blocks.len() == 1
    }

    /// Blocks sorted by their lowest party.
    pub fn canonical(&self) -> EntanglementCombination {
        let mut blocks = self.blocks.clone();
        blocks.sort_by_key(|b| b.min_party());
        EntanglementCombination { blocks, n: self.n }
    }

    /// Equality of the underlying partitions, ignoring block order.
    pub fn same_partition(&self, other: &EntanglementCombination) -> bool {
        self.canonical() == other.canonical()
    }

    /// 0-based party lists, one per block.
    pub fn to_vecs(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.to_vec()).collect()
    }
}

/// Renders as `[(A3),(A1,A2),(A4,A5,A6)]`.
impl fmt::Display for EntanglementCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCef {
    pub block: PartySubset,
    pub cef: f64,
}

/// Result of [`ce`].
#[derive(Debug, Clone, PartialEq)]
pub struct CEReport {
    pub dims: Vec<usize>,
    pub ce: f64,
    pub ec: EntanglementCombination,
    pub block_cefs: Vec<BlockCef>,
    /// Entropy of every nontrivial subset of every block, in block order,
    /// labelled with the original parties. Present only on request.
    pub subset_entropies: Option<Vec<(PartySubset, f64)>>,
    pub tolerances: Tolerances,
    /// Set by callers that rescaled a non-normalized input.
    pub normalized_input: bool,
}

/// Entropies of all nontrivial subsets of `state`'s parties, indexed by
/// mask (entries 0 and `2^n - 1` are unused zeros).
pub fn subset_entropies(state: &PureState) -> Result<Vec<f64>> {
    let n = state.parties();
    state.shape().limits().check_parties(n)?;
    let full = full_mask(n);
    let last = 1u64 << (n - 1);
    // S_I = S_complement: evaluate the half without the last party
    let half: Vec<u64> = (1..last).collect();
    let values = half
        .par_iter()
        .map(|&mask| subset_entropy(state, PartySubset::new(mask, n)?))
        .collect::<Result<Vec<f64>>>()?;
    let mut out = vec![0.0; full as usize + 1];
    for (&mask, &s) in half.iter().zip(&values) {
        out[mask as usize] = s;
        out[(full ^ mask) as usize] = s;
    }
    Ok(out)
}

/// Half the sum of the partial entropies over all `2^n - 2` nontrivial
/// subsets; 0 for a single party. Intended for fully entangled states but
/// evaluated for any input.
pub fn cef(state: &PureState) -> Result<f64> {
    cef_with_entropies(state).map(|(v, _)| v)
}

fn cef_with_entropies(state: &PureState) -> Result<(f64, Vec<f64>)> {
    let n = state.parties();
    if n == 1 {
        return Ok((0.0, Vec::new()));
    }
    let entropies = subset_entropies(state)?;
    let full = full_mask(n) as usize;
    let sum: f64 = entropies[1..full].iter().sum();
    Ok((0.5 * sum, entropies))
}

/// Whether `subset` splits off as a pure product factor, i.e. `ρ_subset`
/// has rank one.
pub fn is_block_separable(
    state: &PureState,
    subset: PartySubset,
    tol: &Tolerances,
) -> Result<bool> {
    if subset.parties() != state.parties() {
        return Err(Error::DimensionMismatch {
            expected: state.parties(),
            actual: subset.parties(),
        });
    }
    if !subset.is_nontrivial() {
        return Err(Error::TrivialSubset);
    }
    Ok(probe_rank(state, subset, tol)?.rank == 1)
}

/// Lexicographic `m`-combinations of `0..n`.
struct Combinations {
    idx: Vec<usize>,
    n: usize,
    done: bool,
}

impl Combinations {
    fn new(n: usize, m: usize) -> Self {
        Combinations {
            idx: (0..m).collect(),
            n,
            done: m > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let m = self.idx.len();
        let mut i = m;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - m + i {
                self.idx[i] += 1;
                for j in i + 1..m {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Splits `state` into its fully entangled blocks, returning each block
/// (over the original parties) with its pure factor.
///
/// Subsets of the remaining parties are tried in order of size `m`, and
/// lexicographically within a size, for `m` up to half the remaining party
/// count. A rank-one subset becomes the next block and is traced out; the
/// search then resumes at the same `m`, since removing a product factor
/// leaves the marginals of the other parties unchanged. Whatever remains at
/// the end forms the last block.
pub fn decompose(state: &PureState, tol: &Tolerances) -> Result<Vec<(PartySubset, PureState)>> {
    let n = state.parties();
    state.shape().limits().check_parties(n)?;
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut current = state.clone();
    let mut out = Vec::new();
    let mut m = 1;
    while m <= remaining.len() / 2 {
        let local_n = remaining.len();
        let mut found = None;
        for combo in Combinations::new(local_n, m) {
            let local = PartySubset::from_parties(&combo, local_n)?;
            let probe = probe_rank(&current, local, tol)?;
            if let Some(eigenvalue) = probe.ambiguous {
                let parties: Vec<usize> = probe.side.iter().map(|k| remaining[k]).collect();
                return Err(Error::NumericalAmbiguity {
                    subset: PartySubset::from_parties(&parties, n)?.to_string(),
                    eigenvalue,
                    threshold: probe.threshold,
                });
            }
            if probe.rank == 1 {
                found = Some((combo, local, probe));
                break;
            }
        }
        let Some((combo, local, probe)) = found else {
            m += 1;
            continue;
        };
        let parties: Vec<usize> = combo.iter().map(|&k| remaining[k]).collect();
        let block = PartySubset::from_parties(&parties, n)?;
        let factor = extract_factor(&current, local, probe.clone())?;
        current = extract_factor(&current, local.complement(), probe)?;
        remaining.retain(|p| !parties.contains(p));
        out.push((block, factor));
    }
    if !remaining.is_empty() {
        out.push((PartySubset::from_parties(&remaining, n)?, current));
    }
    Ok(out)
}

/// The entanglement combination of `state`, blocks in discovery order.
pub fn entanglement_combination(
    state: &PureState,
    tol: &Tolerances,
) -> Result<EntanglementCombination> {
    let blocks = decompose(state, tol)?.into_iter().map(|(b, _)| b).collect();
    EntanglementCombination::new(blocks, state.parties())
}

/// Sum of the CEF values of each EC block's pure factor.
pub fn ce(state: &PureState, tol: &Tolerances, detail: bool) -> Result<CEReport> {
    let n = state.parties();
    let parts = decompose(state, tol)?;
    let mut block_cefs = Vec::with_capacity(parts.len());
    let mut entropies = detail.then(Vec::new);
    for (block, factor) in &parts {
        let (value, local) = cef_with_entropies(factor)?;
        if let Some(list) = entropies.as_mut() {
            let members = block.to_vec();
            let k = members.len();
            for local_mask in 1..full_mask(k) {
                let parties: Vec<usize> = (0..k)
                    .filter(|i| local_mask >> i & 1 == 1)
                    .map(|i| members[i])
                    .collect();
                list.push((
                    PartySubset::from_parties(&parties, n)?,
                    local[local_mask as usize],
                ));
            }
        }
        block_cefs.push(BlockCef {
            block: *block,
            cef: value,
        });
    }
    let ec = EntanglementCombination::new(parts.iter().map(|(b, _)| *b).collect(), n)?;
    Ok(CEReport {
        dims: state.dims().to_vec(),
        ce: block_cefs.iter().map(|b| b.cef).sum(),
        ec,
        block_cefs,
        subset_entropies: entropies,
        tolerances: *tol,
        normalized_input: false,
    })
}
