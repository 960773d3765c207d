//! Randomized checks of the measures' invariance and monotonicity
//! properties: local-unitary invariance, additivity under tensor products,
//! and the behaviour of partial entropies and CE under local projective
//! measurements.
//!
//! Every check is deterministic for a given seed. Trials draw their random
//! numbers from per-trial streams derived from the seed, so they can run in
//! parallel without changing the result.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{ce, entanglement_combination, subset_entropies, EntanglementCombination};
use crate::state::{
    normalize, strides, tensor_product, PartySubset, PureState, SystemShape, Tolerances,
};

/// Tolerance on entropy and CE differences, in bits.
pub const PROPERTY_TOL: f64 = 1e-8;

const UNITARITY_TOL: f64 = 1e-10;
const MIN_OUTCOME_PROBABILITY: f64 = 1e-12;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for stream `index` of `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state: i.i.d. complex Gaussian amplitudes, normalized.
pub fn random_pure_state(shape: &SystemShape, seed: u64) -> Result<PureState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..shape.dim()).map(|_| gaussian(&mut rng)).collect();
    normalize(shape.clone(), amps)
}

/// Random unitary from Gram–Schmidt orthonormalization of a complex
/// Gaussian matrix. Gram–Schmidt leaves the triangular factor with a
/// positive real diagonal, which fixes the column phases.
pub fn random_local_unitary(dim: usize, seed: u64) -> Result<DMatrix<Complex64>> {
    if dim < 2 {
        return Err(Error::InvalidShape(format!(
            "local dimension must be at least 2, got {dim}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = DMatrix::from_fn(dim, dim, |_, _| gaussian(&mut rng));
    for j in 0..dim {
        // two passes of modified Gram–Schmidt
        for _ in 0..2 {
            for k in 0..j {
                let proj: Complex64 = (0..dim).map(|r| m[(r, k)].conj() * m[(r, j)]).sum();
                for r in 0..dim {
                    let v = m[(r, k)];
                    m[(r, j)] -= proj * v;
                }
            }
        }
        let norm = (0..dim).map(|r| m[(r, j)].norm_sqr()).sum::<f64>().sqrt();
        for r in 0..dim {
            m[(r, j)] /= norm;
        }
    }
    Ok(m)
}

/// Largest entry of `|U†U - 1|`.
pub fn unitarity_error(u: &DMatrix<Complex64>) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
        }
    }
    err
}

fn check_unitary(u: &DMatrix<Complex64>, expected_dim: usize) -> Result<()> {
    if u.nrows() != expected_dim || u.ncols() != expected_dim {
        return Err(Error::DimensionMismatch {
            expected: expected_dim,
            actual: u.nrows(),
        });
    }
    let err = unitarity_error(u);
    if err > UNITARITY_TOL {
        return Err(Error::InvalidShape(format!(
            "matrix is not unitary (max |U†U - 1| = {err:e})"
        )));
    }
    Ok(())
}

/// One unitary per party.
#[derive(Debug, Clone)]
pub struct LocalUnitarySet {
    unitaries: Vec<DMatrix<Complex64>>,
}

impl LocalUnitarySet {
    pub fn new(unitaries: Vec<DMatrix<Complex64>>) -> Result<Self> {
        for u in &unitaries {
            check_unitary(u, u.nrows())?;
        }
        Ok(LocalUnitarySet { unitaries })
    }

    pub fn identity(shape: &SystemShape) -> Self {
        LocalUnitarySet {
            unitaries: shape
                .dims()
                .iter()
                .map(|&d| DMatrix::identity(d, d))
                .collect(),
        }
    }

    pub fn random(shape: &SystemShape, seed: u64) -> Result<Self> {
        let unitaries = shape
            .dims()
            .iter()
            .enumerate()
            .map(|(k, &d)| random_local_unitary(d, derive_seed(seed, k as u64)))
            .collect::<Result<_>>()?;
        Ok(LocalUnitarySet { unitaries })
    }

    pub fn unitaries(&self) -> &[DMatrix<Complex64>] {
        &self.unitaries
    }

    /// Conjugate transposes of every unitary.
    pub fn adjoint(&self) -> Self {
        LocalUnitarySet {
            unitaries: self.unitaries.iter().map(|u| u.adjoint()).collect(),
        }
    }
}

/// Applies `op` to the index of `party`, leaving the others untouched.
fn apply_on_party(
    amps: &[Complex64],
    dims: &[usize],
    party: usize,
    op: &DMatrix<Complex64>,
) -> Vec<Complex64> {
    let d = dims[party];
    let stride = strides(dims)[party];
    let outer = amps.len() / (d * stride);
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    let mut fiber = vec![Complex64::new(0.0, 0.0); d];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * d * stride + inner;
            for (j, f) in fiber.iter_mut().enumerate() {
                *f = amps[base + j * stride];
            }
            for i in 0..d {
                out[base + i * stride] = (0..d).map(|j| op[(i, j)] * fiber[j]).sum();
            }
        }
    }
    out
}

/// `(U_1 ⊗ ... ⊗ U_n)|ψ>`.
pub fn apply_local_unitaries(state: &PureState, us: &LocalUnitarySet) -> Result<PureState> {
    if us.unitaries.len() != state.parties() {
        return Err(Error::DimensionMismatch {
            expected: state.parties(),
            actual: us.unitaries.len(),
        });
    }
    let mut amps = state.amplitudes().to_vec();
    for (k, (u, &d)) in us.unitaries.iter().zip(state.dims()).enumerate() {
        if u.nrows() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                actual: u.nrows(),
            });
        }
        amps = apply_on_party(&amps, state.dims(), k, u);
    }
    normalize(state.shape().clone(), amps)
}

#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    /// Index of the basis vector (column of the basis matrix) observed.
    pub outcome: usize,
    pub probability: f64,
    pub state: PureState,
}

/// Rank-one projective measurement of `party` in the orthonormal basis
/// formed by the columns of `basis`. The measured party stays in the state,
/// collapsed onto the observed basis vector. Outcomes with probability
/// below 1e-12 are dropped.
pub fn locc_measure(
    state: &PureState,
    party: usize,
    basis: &DMatrix<Complex64>,
) -> Result<Vec<MeasurementOutcome>> {
    let n = state.parties();
    if party >= n {
        return Err(Error::PartyOutOfRange {
            index: party,
            parties: n,
        });
    }
    let d = state.dims()[party];
    check_unitary(basis, d)?;
    let mut outcomes = Vec::new();
    for i in 0..d {
        let b = basis.column(i);
        // |b_i><b_i| acting on the party
        let projector = b * b.adjoint();
        let projected = apply_on_party(state.amplitudes(), state.dims(), party, &projector);
        let probability: f64 = projected.iter().map(|a| a.norm_sqr()).sum();
        if probability < MIN_OUTCOME_PROBABILITY {
            continue;
        }
        outcomes.push(MeasurementOutcome {
            outcome: i,
            probability,
            state: normalize(state.shape().clone(), projected)?,
        });
    }
    Ok(outcomes)
}

/// Outcome of one randomized property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheckResult {
    pub property: String,
    pub trials: usize,
    /// Largest observed violation, in bits.
    pub max_violation: f64,
    pub tolerance: f64,
    /// Trials whose EC partition disagreed with the expected one.
    pub ec_mismatches: usize,
    pub passed: bool,
    pub seed: u64,
}

impl PropertyCheckResult {
    fn new(
        property: &str,
        trials: usize,
        max_violation: f64,
        ec_mismatches: usize,
        seed: u64,
    ) -> Self {
        PropertyCheckResult {
            property: property.to_string(),
            trials,
            max_violation,
            tolerance: PROPERTY_TOL,
            ec_mismatches,
            passed: max_violation <= PROPERTY_TOL && ec_mismatches == 0,
            seed,
        }
    }
}

fn require_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidShape("at least one trial is required".into()));
    }
    Ok(())
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Applies random local unitaries and compares CE, every partial entropy
/// and the EC partition against the untouched state.
pub fn lu_invariance_check(
    state: &PureState,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<PropertyCheckResult> {
    require_trials(trials)?;
    let base = ce(state, tol, false)?;
    let base_entropies = subset_entropies(state)?;
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, bool)> {
            let us = LocalUnitarySet::random(state.shape(), derive_seed(seed, t as u64))?;
            let rotated = apply_local_unitaries(state, &us)?;
            let report = ce(&rotated, tol, false)?;
            let entropies = subset_entropies(&rotated)?;
            let violation = (report.ce - base.ce)
                .abs()
                .max(max_abs_diff(&entropies, &base_entropies));
            Ok((violation, report.ec.same_partition(&base.ec)))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_violation = per_trial.iter().map(|r| r.0).fold(0.0, f64::max);
    let mismatches = per_trial.iter().filter(|r| !r.1).count();
    Ok(PropertyCheckResult::new(
        "lu-invariance",
        trials,
        max_violation,
        mismatches,
        seed,
    ))
}

/// EC of `b` with its parties shifted past the `offset` parties of `a`.
fn joint_partition(
    a: &EntanglementCombination,
    b: &EntanglementCombination,
) -> Result<EntanglementCombination> {
    let n = a.parties() + b.parties();
    let mut blocks = Vec::new();
    for blk in a.blocks() {
        blocks.push(PartySubset::from_parties(&blk.to_vec(), n)?);
    }
    for blk in b.blocks() {
        let shifted: Vec<usize> = blk.iter().map(|k| k + a.parties()).collect();
        blocks.push(PartySubset::from_parties(&shifted, n)?);
    }
    EntanglementCombination::new(blocks, n)
}

/// `|CE(a ⊗ b) - CE(a) - CE(b)|`, plus agreement of `EC(a ⊗ b)` with the
/// union of the factors' partitions.
pub fn additivity_check(
    a: &PureState,
    b: &PureState,
    tol: &Tolerances,
) -> Result<PropertyCheckResult> {
    let joint = tensor_product(a, b)?;
    let ra = ce(a, tol, false)?;
    let rb = ce(b, tol, false)?;
    let rj = ce(&joint, tol, false)?;
    let violation = (rj.ce - ra.ce - rb.ce).abs();
    let expected = joint_partition(&ra.ec, &rb.ec)?;
    let mismatches = usize::from(!rj.ec.same_partition(&expected));
    Ok(PropertyCheckResult::new(
        "additivity",
        1,
        violation,
        mismatches,
        0,
    ))
}

/// Separate verdicts for the per-subset entropy inequality and for CE
/// monotonicity under the same measurement sequences.
#[derive(Debug, Clone, PartialEq)]
pub struct LoccCheckResult {
    pub subset_entropy: PropertyCheckResult,
    pub ce_monotonicity: PropertyCheckResult,
}

impl LoccCheckResult {
    pub fn passed(&self) -> bool {
        self.subset_entropy.passed && self.ce_monotonicity.passed
    }
}

/// Runs `rounds` sequential single-party projective measurements per
/// trial, each on a random party in a random basis chosen independently on
/// every branch of the outcome tree. Checks that the outcome-averaged
/// partial entropy of every nontrivial subset, and the averaged CE, do not
/// exceed their initial values.
pub fn locc_monotonicity_check(
    state: &PureState,
    rounds: usize,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<LoccCheckResult> {
    require_trials(trials)?;
    if rounds == 0 {
        return Err(Error::InvalidShape("at least one round is required".into()));
    }
    let n = state.parties();
    let base_ce = ce(state, tol, false)?.ce;
    let base_entropies = subset_entropies(state)?;
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(f64, f64)> {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
            let mut branches = vec![(1.0, state.clone())];
            for _ in 0..rounds {
                let mut next = Vec::new();
                for (p, psi) in branches {
                    let party = rng.random_range(0..n);
                    let basis = random_local_unitary(psi.dims()[party], rng.random())?;
                    for o in locc_measure(&psi, party, &basis)? {
                        next.push((p * o.probability, o.state));
                    }
                }
                branches = next;
            }
            let mut averaged = vec![0.0; base_entropies.len()];
            let mut averaged_ce = 0.0;
            for (p, phi) in &branches {
                for (acc, s) in averaged.iter_mut().zip(subset_entropies(phi)?) {
                    *acc += p * s;
                }
                averaged_ce += p * ce(phi, tol, false)?.ce;
            }
            let entropy_violation = averaged
                .iter()
                .zip(&base_entropies)
                .map(|(after, before)| after - before)
                .fold(0.0, f64::max);
            Ok((entropy_violation, (averaged_ce - base_ce).max(0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let entropy_max = per_trial.iter().map(|r| r.0).fold(0.0, f64::max);
    let ce_max = per_trial.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(LoccCheckResult {
        subset_entropy: PropertyCheckResult::new(
            "locc-subset-entropy",
            trials,
            entropy_max,
            0,
            seed,
        ),
        ce_monotonicity: PropertyCheckResult::new("locc-ce-monotonicity", trials, ce_max, 0, seed),
    })
}

/// EC partitions of `n` random states over `shape`, for sanity sampling.
pub fn random_partitions(
    shape: &SystemShape,
    samples: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<Vec<EntanglementCombination>> {
    (0..samples)
        .map(|i| {
            let s = random_pure_state(shape, derive_seed(seed, i as u64))?;
            entanglement_combination(&s, tol)
        })
        .collect()
}
