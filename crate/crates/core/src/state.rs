//! Dense pure-state representation and the linear-algebra primitives used by
//! the entanglement measures: tensor products, partial traces, von Neumann
//! entropies and reduced-density-matrix ranks.
//!
//! Amplitudes are stored in mixed-radix order with party 0 as the most
//! significant digit, so the basis ket `|i_1 i_2 ... i_n>` sits at index
//! `((i_1 * d_2 + i_2) * d_3 + i_3) ...`.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_DIM: usize = 1 << 20;
pub const DEFAULT_MAX_PARTIES: usize = 20;

/// Largest party count a [`PartySubset`] bitmask can address.
pub const MAX_MASK_PARTIES: usize = 64;

const NORMALIZE_FLOOR: f64 = 1e-12;
const NEGATIVE_EIGENVALUE_LIMIT: f64 = -1e-6;
const EIGEN_MAX_ITER: usize = 10_000;

/// Caps on total Hilbert-space dimension and on the party count used by the
/// `2^n` subset enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_dim: usize,
    pub max_parties: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_dim: DEFAULT_MAX_DIM,
            max_parties: DEFAULT_MAX_PARTIES,
        }
    }
}

impl Limits {
    /// The stricter of two sets of limits.
    pub fn min(self, other: Limits) -> Limits {
        Limits {
            max_dim: self.max_dim.min(other.max_dim),
            max_parties: self.max_parties.min(other.max_parties),
        }
    }

    pub(crate) fn check_parties(&self, n: usize) -> Result<()> {
        if n > self.max_parties {
            return Err(Error::SizeLimit {
                what: "party count",
                actual: n,
                limit: self.max_parties,
            });
        }
        Ok(())
    }
}

/// Numerical thresholds for rank decisions and norm checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Eigenvalues at or below `rank_eps * lambda_max` count as zero.
    pub rank_eps: f64,
    pub norm_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_eps: 1e-9,
            norm_eps: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn new(rank_eps: f64, norm_eps: f64) -> Result<Self> {
        for (name, v) in [("rank_eps", rank_eps), ("norm_eps", norm_eps)] {
            if !(v > 0.0 && v < 1e-2) {
                return Err(Error::InvalidTolerance(format!(
                    "{name} must lie in (0, 1e-2), got {v}"
                )));
            }
        }
        Ok(Tolerances { rank_eps, norm_eps })
    }
}

/// Local dimensions of each party.
#[derive(Debug, Clone)]
pub struct SystemShape {
    dims: Vec<usize>,
    total: usize,
    limits: Limits,
}

impl PartialEq for SystemShape {
    fn eq(&self, other: &Self) -> bool {
        self.dims == other.dims
    }
}

impl Eq for SystemShape {}

impl SystemShape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_limits(dims, Limits::default())
    }

    pub fn with_limits(dims: Vec<usize>, limits: Limits) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidShape("at least one party is required".into()));
        }
        if dims.len() > MAX_MASK_PARTIES {
            return Err(Error::SizeLimit {
                what: "party count",
                actual: dims.len(),
                limit: MAX_MASK_PARTIES,
            });
        }
        if let Some((k, &d)) = dims.iter().enumerate().find(|(_, &d)| d < 2) {
            return Err(Error::InvalidShape(format!(
                "party A{} has local dimension {d}, must be at least 2",
                k + 1
            )));
        }
        let mut total = 1usize;
        for &d in &dims {
            total = match total.checked_mul(d) {
                Some(t) if t <= limits.max_dim => t,
                _ => {
                    return Err(Error::SizeLimit {
                        what: "total dimension",
                        actual: total.saturating_mul(d),
                        limit: limits.max_dim,
                    })
                }
            };
        }
        Ok(SystemShape {
            dims,
            total,
            limits,
        })
    }

    /// `n` qubits.
    pub fn qubits(n: usize) -> Result<Self> {
        Self::new(vec![2; n])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn parties(&self) -> usize {
        self.dims.len()
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.total
    }

    pub fn limits(&self) -> Limits {
        self.limits
    }

    /// Product of the local dimensions of the parties in `subset`.
    pub fn subset_dim(&self, subset: PartySubset) -> usize {
        subset.iter().map(|k| self.dims[k]).product()
    }

    /// Shape of the parties in `subset`, in ascending party order.
    pub fn restrict(&self, subset: PartySubset) -> Result<SystemShape> {
        let dims = subset.iter().map(|k| self.dims[k]).collect();
        SystemShape::with_limits(dims, self.limits)
    }
}

/// A set of parties, stored as a bitmask over party indices `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartySubset {
    mask: u64,
    n: usize,
}

impl PartySubset {
    pub fn new(mask: u64, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_MASK_PARTIES {
            return Err(Error::InvalidShape(format!("party count {n} out of range")));
        }
        if n < 64 && mask >> n != 0 {
            return Err(Error::PartyOutOfRange {
                index: 63 - mask.leading_zeros() as usize,
                parties: n,
            });
        }
        Ok(PartySubset { mask, n })
    }

    /// Builds a subset from 0-based party indices.
    pub fn from_parties(parties: &[usize], n: usize) -> Result<Self> {
        let mut mask = 0u64;
        for &p in parties {
            if p >= n {
                return Err(Error::PartyOutOfRange {
                    index: p,
                    parties: n,
                });
            }
            mask |= 1 << p;
        }
        Self::new(mask, n)
    }

    pub fn full(n: usize) -> Self {
        PartySubset {
            mask: full_mask(n),
            n,
        }
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    /// Party count of the system this subset refers to.
    pub fn parties(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn is_full(&self) -> bool {
        self.mask == full_mask(self.n)
    }

    pub fn is_nontrivial(&self) -> bool {
        !self.is_empty() && !self.is_full()
    }

    pub fn contains(&self, party: usize) -> bool {
        party < self.n && self.mask >> party & 1 == 1
    }

    pub fn complement(&self) -> Self {
        PartySubset {
            mask: !self.mask & full_mask(self.n),
            n: self.n,
        }
    }

    /// Member parties in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let mask = self.mask;
        (0..self.n).filter(move |k| mask >> k & 1 == 1)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Lowest member party, if any.
    pub fn min_party(&self) -> Option<usize> {
        (self.mask != 0).then(|| self.mask.trailing_zeros() as usize)
    }
}

/// Renders as `(A1,A3)` with 1-based party labels.
impl fmt::Display for PartySubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "A{}", k + 1)?;
        }
        write!(f, ")")
    }
}

pub(crate) fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// A unit-norm pure state over a [`SystemShape`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    shape: SystemShape,
    amps: Vec<Complex64>,
}

/// Divides `amps` by their Euclidean norm.
pub fn normalize(shape: SystemShape, amps: Vec<Complex64>) -> Result<PureState> {
    normalize_with_norm(shape, amps).map(|(s, _)| s)
}

/// Like [`normalize`], also returning the norm of the input.
pub fn normalize_with_norm(
    shape: SystemShape,
    mut amps: Vec<Complex64>,
) -> Result<(PureState, f64)> {
    if amps.len() != shape.dim() {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(),
            actual: amps.len(),
        });
    }
    let norm = amplitude_norm(&amps);
    if !norm.is_finite() {
        return Err(Error::NonFinite);
    }
    if norm < NORMALIZE_FLOOR {
        return Err(Error::ZeroState);
    }
    for a in amps.iter_mut() {
        *a /= norm;
    }
    Ok((PureState { shape, amps }, norm))
}

pub(crate) fn amplitude_norm(amps: &[Complex64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

impl PureState {
    /// Accepts `amps` only if already normalized within `norm_eps`; the
    /// stored amplitudes are then rescaled to unit norm exactly.
    pub fn from_normalized(
        shape: SystemShape,
        amps: Vec<Complex64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let (state, norm) = normalize_with_norm(shape, amps)?;
        if (norm - 1.0).abs() > tol.norm_eps {
            return Err(Error::NotNormalized {
                norm,
                eps: tol.norm_eps,
            });
        }
        Ok(state)
    }

    /// Computational basis state `|digits>`.
    pub fn basis(shape: SystemShape, digits: &[usize]) -> Result<Self> {
        if digits.len() != shape.parties() {
            return Err(Error::DimensionMismatch {
                expected: shape.parties(),
                actual: digits.len(),
            });
        }
        let mut idx = 0;
        for (&digit, &d) in digits.iter().zip(shape.dims()) {
            if digit >= d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: digit,
                });
            }
            idx = idx * d + digit;
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); shape.dim()];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(PureState { shape, amps })
    }

    /// `(|0...0> + |1...1>)/sqrt(2)` on `n >= 2` qubits (EPR for n = 2, GHZ for n = 3).
    pub fn cat(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidShape(
                "cat state needs at least 2 qubits".into(),
            ));
        }
        let shape = SystemShape::qubits(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); shape.dim()];
        amps[0] = Complex64::new(1.0, 0.0);
        amps[shape.dim() - 1] = Complex64::new(1.0, 0.0);
        normalize(shape, amps)
    }

    /// Uniform superposition of the `n` single-excitation kets.
    pub fn w(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidShape(
                "W state needs at least 2 qubits".into(),
            ));
        }
        let shape = SystemShape::qubits(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); shape.dim()];
        for k in 0..n {
            amps[1 << k] = Complex64::new(1.0, 0.0);
        }
        normalize(shape, amps)
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn dims(&self) -> &[usize] {
        self.shape.dims()
    }

    pub fn parties(&self) -> usize {
        self.shape.parties()
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        amplitude_norm(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|`, insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        self.inner(other).map(|z| z.norm())
    }

    pub fn full_subset(&self) -> PartySubset {
        PartySubset::full(self.parties())
    }

    /// Subset over this state's parties from 0-based indices.
    pub fn subset(&self, parties: &[usize]) -> Result<PartySubset> {
        PartySubset::from_parties(parties, self.parties())
    }

    /// Relabels parties: old party `k` becomes new party `perm[k]`.
    pub fn permute_parties(&self, perm: &[usize]) -> Result<PureState> {
        let n = self.parties();
        let mut seen = vec![false; n];
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: perm.len(),
            });
        }
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidShape(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            seen[p] = true;
        }
        let old_dims = self.dims();
        let mut new_dims = vec![0; n];
        for k in 0..n {
            new_dims[perm[k]] = old_dims[k];
        }
        let new_strides = strides(&new_dims);
        let shape = SystemShape::with_limits(new_dims, self.shape.limits())?;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.dim()];
        let mut digits = vec![0usize; n];
        for &a in &self.amps {
            let target: usize = (0..n).map(|k| digits[k] * new_strides[perm[k]]).sum();
            amps[target] = a;
            increment(&mut digits, old_dims);
        }
        Ok(PureState { shape, amps })
    }

    /// Multiplies by a global phase so the first amplitude of largest
    /// modulus is real and positive.
    pub(crate) fn fix_global_phase(&mut self) {
        let mut best = 0;
        let mut best_norm = -1.0;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > best_norm * (1.0 + 1e-12) {
                best = i;
                best_norm = a.norm_sqr();
            }
        }
        if best_norm > 0.0 {
            let phase = self.amps[best].conj() / self.amps[best].norm();
            for a in self.amps.iter_mut() {
                *a *= phase;
            }
        }
    }
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Mixed-radix odometer step; the last digit varies fastest.
fn increment(digits: &mut [usize], dims: &[usize]) {
    for k in (0..digits.len()).rev() {
        digits[k] += 1;
        if digits[k] < dims[k] {
            return;
        }
        digits[k] = 0;
    }
}

/// `a ⊗ b`; parties of `b` follow those of `a`.
pub fn tensor_product(a: &PureState, b: &PureState) -> Result<PureState> {
    let limits = a.shape.limits().min(b.shape.limits());
    let dims = a.dims().iter().chain(b.dims()).copied().collect();
    let shape = SystemShape::with_limits(dims, limits)?;
    let mut amps = Vec::with_capacity(shape.dim());
    for x in &a.amps {
        amps.extend(b.amps.iter().map(|y| x * y));
    }
    Ok(PureState { shape, amps })
}

/// Reduced density operator of a set of retained parties.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    retained: PartySubset,
    dims: Vec<usize>,
    matrix: DMatrix<Complex64>,
}

/// Eigen-decomposition of a density matrix with eigenvalues clamped to
/// `[0, 1]` and sorted in descending order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    /// Column `i` belongs to `values[i]`.
    pub vectors: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Wraps a raw matrix, checking that it is square, Hermitian and of unit
    /// trace.
    pub fn from_matrix(
        retained: PartySubset,
        dims: Vec<usize>,
        matrix: DMatrix<Complex64>,
    ) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: matrix.nrows(),
            });
        }
        let rho = DensityMatrix {
            retained,
            dims,
            matrix,
        };
        rho.check_invariants()?;
        Ok(rho)
    }

    pub fn retained(&self) -> PartySubset {
        self.retained
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest entry of `|M - M†|` relative to the largest entry of `|M|`.
    pub fn hermiticity_error(&self) -> f64 {
        let scale = self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let diff = (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        diff / scale
    }

    pub fn check_invariants(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::InvalidShape(format!(
                "density matrix is not Hermitian (relative error {herm:e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
            return Err(Error::InvalidShape(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        Ok(())
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        let n = self.dim();
        let eig = SymmetricEigen::try_new(self.matrix.clone(), f64::EPSILON, EIGEN_MAX_ITER)
            .ok_or(Error::EigenFailure(n))?;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let mut values = Vec::with_capacity(n);
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            let lambda = eig.eigenvalues[i];
            if !lambda.is_finite() {
                return Err(Error::EigenFailure(n));
            }
            if lambda < NEGATIVE_EIGENVALUE_LIMIT {
                return Err(Error::NegativeEigenvalue(lambda));
            }
            values.push(lambda.clamp(0.0, 1.0));
            vectors.set_column(col, &eig.eigenvectors.column(i));
        }
        Ok(Spectrum { values, vectors })
    }

    /// Clamped eigenvalues, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.spectrum().map(|s| s.values)
    }
}

/// Entropy in bits of a probability vector, with `0 log 0 = 0`.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    let s: f64 = probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum();
    s.max(0.0)
}

/// Index of every full-system basis state split into (retained, traced)
/// indices, both in the parties' natural order.
fn split_indices(dims: &[usize], keep: u64) -> (Vec<usize>, Vec<usize>, usize, usize) {
    let n = dims.len();
    let mut keep_dims = Vec::new();
    let mut trace_dims = Vec::new();
    for (k, &d) in dims.iter().enumerate() {
        if keep >> k & 1 == 1 {
            keep_dims.push(d);
        } else {
            trace_dims.push(d);
        }
    }
    let keep_strides = strides(&keep_dims);
    let trace_strides = strides(&trace_dims);
    // per-party stride within its own side
    let mut side_stride = vec![0; n];
    let (mut ki, mut ti) = (0, 0);
    for (k, stride) in side_stride.iter_mut().enumerate() {
        if keep >> k & 1 == 1 {
            *stride = keep_strides[ki];
            ki += 1;
        } else {
            *stride = trace_strides[ti];
            ti += 1;
        }
    }
    let total: usize = dims.iter().product();
    let mut kept_idx = Vec::with_capacity(total);
    let mut traced_idx = Vec::with_capacity(total);
    let mut digits = vec![0usize; n];
    let (mut kidx, mut tidx) = (0usize, 0usize);
    for _ in 0..total {
        kept_idx.push(kidx);
        traced_idx.push(tidx);
        for k in (0..n).rev() {
            let kept = keep >> k & 1 == 1;
            digits[k] += 1;
            if digits[k] < dims[k] {
                if kept {
                    kidx += side_stride[k];
                } else {
                    tidx += side_stride[k];
                }
                break;
            }
            if kept {
                kidx -= side_stride[k] * (dims[k] - 1);
            } else {
                tidx -= side_stride[k] * (dims[k] - 1);
            }
            digits[k] = 0;
        }
    }
    (
        kept_idx,
        traced_idx,
        keep_dims.iter().product(),
        trace_dims.iter().product(),
    )
}

/// The state's amplitudes arranged as a `dim(keep) × dim(complement)` matrix.
fn bipartite_matrix(state: &PureState, keep: PartySubset) -> DMatrix<Complex64> {
    let (kept, traced, dk, dt) = split_indices(state.dims(), keep.mask());
    let mut m = DMatrix::zeros(dk, dt);
    for ((&a, &k), &t) in state.amps.iter().zip(&kept).zip(&traced) {
        m[(k, t)] = a;
    }
    m
}

fn check_subset(state: &PureState, subset: PartySubset) -> Result<()> {
    if subset.parties() != state.parties() {
        return Err(Error::DimensionMismatch {
            expected: state.parties(),
            actual: subset.parties(),
        });
    }
    Ok(())
}

/// `tr_complement(|ψ><ψ|)` for the retained parties `keep`.
pub fn partial_trace(state: &PureState, keep: PartySubset) -> Result<DensityMatrix> {
    check_subset(state, keep)?;
    if keep.is_empty() {
        return Err(Error::EmptySubset);
    }
    let m = bipartite_matrix(state, keep);
    let mut rho = &m * m.adjoint();
    // exact Hermitian symmetrization
    let n = rho.nrows();
    for i in 0..n {
        rho[(i, i)].im = 0.0;
        for j in 0..i {
            let z = (rho[(i, j)] + rho[(j, i)].conj()) * 0.5;
            rho[(i, j)] = z;
            rho[(j, i)] = z.conj();
        }
    }
    Ok(DensityMatrix {
        retained: keep,
        dims: keep.iter().map(|k| state.dims()[k]).collect(),
        matrix: rho,
    })
}

/// `-Σ λ log2 λ` over the clamped eigenvalues of `rho`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(shannon_entropy(&rho.eigenvalues()?))
}

/// The side of the bipartition `subset | complement` with the smaller
/// dimension; ties go to the side that does not hold the last party, so a
/// subset and its complement always resolve to the same side.
pub fn smaller_side(shape: &SystemShape, subset: PartySubset) -> PartySubset {
    let comp = subset.complement();
    let (di, dc) = (shape.subset_dim(subset), shape.subset_dim(comp));
    if di < dc || (di == dc && !subset.contains(shape.parties() - 1)) {
        subset
    } else {
        comp
    }
}

fn require_nontrivial(state: &PureState, subset: PartySubset) -> Result<()> {
    check_subset(state, subset)?;
    if !subset.is_nontrivial() {
        return Err(Error::TrivialSubset);
    }
    Ok(())
}

/// Partial entropy `S_I` in bits, evaluated on the smaller side of the cut.
pub fn subset_entropy(state: &PureState, subset: PartySubset) -> Result<f64> {
    require_nontrivial(state, subset)?;
    let side = smaller_side(state.shape(), subset);
    von_neumann_entropy(&partial_trace(state, side)?)
}

/// Outcome of a rank decision on a reduced density matrix.
#[derive(Debug, Clone)]
pub struct RankProbe {
    /// Side of the cut whose density matrix was diagonalized.
    pub side: PartySubset,
    pub rank: usize,
    pub threshold: f64,
    /// An eigenvalue lying within a factor of 10 of `threshold`, if any.
    pub ambiguous: Option<f64>,
    pub spectrum: Spectrum,
}

impl RankProbe {
    pub fn into_ambiguity_error(self) -> Result<RankProbe> {
        match self.ambiguous {
            Some(eigenvalue) => Err(Error::NumericalAmbiguity {
                subset: self.side.to_string(),
                eigenvalue,
                threshold: self.threshold,
            }),
            None => Ok(self),
        }
    }
}

/// Rank of `ρ_subset` together with the spectrum it was decided from.
/// Rank symmetry lets the smaller side of the cut stand in for `subset`.
pub fn probe_rank(state: &PureState, subset: PartySubset, tol: &Tolerances) -> Result<RankProbe> {
    check_subset(state, subset)?;
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    if subset.is_full() {
        // a pure state is its own rank-1 density operator
        return Ok(RankProbe {
            side: subset,
            rank: 1,
            threshold: tol.rank_eps,
            ambiguous: None,
            spectrum: Spectrum {
                values: vec![1.0],
                vectors: DMatrix::from_column_slice(state.dim(), 1, state.amplitudes()),
            },
        });
    }
    let side = smaller_side(state.shape(), subset);
    let spectrum = partial_trace(state, side)?.spectrum()?;
    let lambda_max = spectrum.values[0];
    let threshold = tol.rank_eps * lambda_max;
    let rank = spectrum
        .values
        .iter()
        .filter(|&&l| l > threshold)
        .count()
        .max(1);
    let ambiguous = spectrum
        .values
        .iter()
        .copied()
        .find(|&l| l > threshold / 10.0 && l <= threshold * 10.0);
    Ok(RankProbe {
        side,
        rank,
        threshold,
        ambiguous,
        spectrum,
    })
}

/// Number of eigenvalues of `ρ_subset` above `rank_eps · λ_max`.
pub fn subset_rank(state: &PureState, subset: PartySubset, tol: &Tolerances) -> Result<usize> {
    probe_rank(state, subset, tol).map(|p| p.rank)
}

/// The pure factor `|ψ_keep>` with `ρ_keep = |ψ_keep><ψ_keep|`, over the
/// kept parties in ascending order. Its global phase is fixed so that the
/// largest amplitude is real and positive.
pub fn reduced_pure_state(
    state: &PureState,
    keep: PartySubset,
    tol: &Tolerances,
) -> Result<PureState> {
    let probe = probe_rank(state, keep, tol)?;
    extract_factor(state, keep, probe)
}

/// Builds `|ψ_keep>` from a rank probe already taken on `keep`.
pub(crate) fn extract_factor(
    state: &PureState,
    keep: PartySubset,
    probe: RankProbe,
) -> Result<PureState> {
    if keep.is_full() {
        let mut out = state.clone();
        out.fix_global_phase();
        return Ok(out);
    }
    if probe.rank != 1 {
        return Err(Error::NotSeparable {
            subset: keep.to_string(),
            rank: probe.rank,
        });
    }
    let shape = state.shape().restrict(keep)?;
    let top: DVector<Complex64> = probe.spectrum.vectors.column(0).into_owned();
    let amps: Vec<Complex64> = if probe.side == keep {
        top.iter().copied().collect()
    } else {
        // contract the complement with its own pure factor
        let m = bipartite_matrix(state, keep);
        let v = m * top.map(|z| z.conj());
        v.iter().copied().collect()
    };
    let mut out = normalize(shape, amps)?;
    out.fix_global_phase();
    Ok(out)
}
