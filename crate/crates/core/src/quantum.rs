//! Dense complex linear algebra for small qubit systems.
//!
//! Qubit slots are big-endian: slot 0 is the leftmost ket label, so the
//! computational-basis index of |b₀b₁…b₍ₙ₋₁₎⟩ is Σ bₛ · 2^(n−1−s). All
//! modules of this crate share that convention. Information quantities are
//! in bits (base-2 logarithms).

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, ALGEBRAIC_TOL, C64, STRUCTURAL_TOL};

/// Eigenvalues below this are treated as exact zeros in entropies, so that
/// numerical noise never reaches `log`.
pub const ENTROPY_EIGEN_FLOOR: f64 = 1e-12;

fn is_finite(z: &C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// A pure state of `n` qubits as a complex amplitude vector of length 2^n.
///
/// States may be unnormalized; operations that require unit norm say so.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amps: DVector<C64>,
}

impl PureState {
    /// Builds a state from amplitudes in computational-basis order.
    pub fn new(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if amps.len() != dim {
            return Err(Error::InvalidLength {
                expected: dim,
                got: amps.len(),
            });
        }
        if !amps.iter().all(is_finite) {
            return Err(Error::NonFinite);
        }
        Ok(Self {
            n_qubits,
            amps: DVector::from_vec(amps),
        })
    }

    /// The computational basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1usize << n_qubits;
        assert!(index < dim, "basis index out of range");
        let mut amps = DVector::zeros(dim);
        amps[index] = C64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Returns the unit-norm version of this state.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amps: self.amps.map(|z| z / n),
        })
    }

    /// Kronecker product; `self`'s slots come first.
    pub fn tensor(&self, rhs: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits + rhs.n_qubits,
            amps: self.amps.kronecker(&rhs.amps),
        }
    }

    /// The normalized projector |ψ⟩⟨ψ| / ⟨ψ|ψ⟩.
    pub fn projector(&self) -> Result<DensityOperator> {
        let ns = self.norm_sqr();
        if ns <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mat = &self.amps * self.amps.adjoint() / C64::new(ns, 0.0);
        Ok(DensityOperator { mat })
    }

    /// Moves the amplitude of each slot `s` to slot `perm[s]`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_qubits;
        if !is_permutation(perm, n) {
            return Err(Error::InvalidPermutation);
        }
        let mut amps = DVector::zeros(self.dim());
        for idx in 0..self.dim() {
            let mut out = 0usize;
            for (s, &target) in perm.iter().enumerate() {
                let bit = (idx >> (n - 1 - s)) & 1;
                out |= bit << (n - 1 - target);
            }
            amps[out] = self.amps[idx];
        }
        Ok(Self { n_qubits: n, amps })
    }

    /// Euclidean distance to `target` after the optimal global-phase
    /// alignment of `self`. Both states keep their norms.
    pub fn phase_aligned_distance(&self, target: &Self) -> f64 {
        let z = self.amps.dotc(&target.amps); // ⟨self|target⟩
        let lambda = if z.norm() > 0.0 {
            z / z.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        (self.amps.map(|a| a * lambda) - &target.amps).norm()
    }
}

fn is_permutation(perm: &[usize], n: usize) -> bool {
    if perm.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

/// A Hermitian positive-semidefinite operator on a d-dimensional space.
///
/// Construction checks Hermiticity within 1e-12 and eigenvalues ≥ −1e-10.
/// The trace is 1 only for normalized operators; [`Self::is_normalized`]
/// reports whether that holds within 1e-10.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    mat: DMatrix<C64>,
}

impl DensityOperator {
    pub fn new(mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                left: mat.nrows(),
                right: mat.ncols(),
            });
        }
        if !mat.iter().all(is_finite) {
            return Err(Error::NonFinite);
        }
        let max_asym = (&mat - mat.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if max_asym > ALGEBRAIC_TOL {
            return Err(Error::NotHermitian {
                max_asymmetry: max_asym,
            });
        }
        let op = Self { mat };
        let min_eig = op.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min_eig < -STRUCTURAL_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min_eig,
            });
        }
        Ok(op)
    }

    /// I/d on a d-dimensional space.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - 1.0).abs() <= STRUCTURAL_TOL
    }

    /// Kronecker product; `self`'s slots come first.
    pub fn tensor(&self, rhs: &Self) -> Self {
        Self {
            mat: self.mat.kronecker(&rhs.mat),
        }
    }

    /// Real eigenvalues of the Hermitian matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.mat.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    /// Reduced operator on the (ascending) `keep` slots, tracing the rest out.
    ///
    /// The dimension must be a power of two; keeping every slot returns the
    /// operator unchanged.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let dim = self.dim();
        assert!(dim.is_power_of_two(), "partial trace needs a qubit system");
        let n = dim.trailing_zeros() as usize;
        if keep.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        for &s in &keep {
            if s >= n {
                return Err(Error::SlotOutOfRange {
                    slot: s,
                    n_qubits: n,
                });
            }
        }
        let traced: Vec<usize> = (0..n).filter(|s| !keep.contains(s)).collect();
        let dk = 1usize << keep.len();
        let dt = 1usize << traced.len();

        // Assemble a full-space index from kept and traced sub-indices.
        let compose = |kbits: usize, tbits: usize| -> usize {
            let mut idx = 0usize;
            for (pos, &s) in keep.iter().enumerate() {
                idx |= ((kbits >> (keep.len() - 1 - pos)) & 1) << (n - 1 - s);
            }
            for (pos, &s) in traced.iter().enumerate() {
                idx |= ((tbits >> (traced.len() - 1 - pos)) & 1) << (n - 1 - s);
            }
            idx
        };

        let mut out = DMatrix::zeros(dk, dk);
        for ik in 0..dk {
            for jk in 0..dk {
                let mut acc = C64::new(0.0, 0.0);
                for t in 0..dt {
                    acc += self.mat[(compose(ik, t), compose(jk, t))];
                }
                out[(ik, jk)] = acc;
            }
        }
        Ok(Self { mat: out })
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        (&self.mat - &other.mat).norm()
    }
}

/// ⟨ψ|ρ|ψ⟩ for a normalized state and a normalized operator, clamped to `[0, 1]`.
pub fn fidelity_pure_mixed(rho: &DensityOperator, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: psi.dim(),
        });
    }
    let v = psi.amplitudes();
    let f = (v.adjoint() * &rho.mat * v)[(0, 0)].re;
    Ok(f.clamp(0.0, 1.0))
}

/// Von Neumann entropy −Σ λ log₂ λ in bits, with 0·log 0 = 0.
///
/// Expects a normalized operator.
pub fn von_neumann_entropy(rho: &DensityOperator) -> f64 {
    rho.eigenvalues()
        .into_iter()
        .filter(|&l| l > ENTROPY_EIGEN_FLOOR)
        .map(|l| -l * l.log2())
        .sum()
}

/// Holevo quantity S(Σ pᵢ ρᵢ) − Σ pᵢ S(ρᵢ) of an ensemble, in bits.
pub fn holevo_bound(ensemble: &[(f64, DensityOperator)]) -> Result<f64> {
    let Some((_, first)) = ensemble.first() else {
        return Err(Error::EmptyInput);
    };
    let dim = first.dim();
    let mut prior_sum = 0.0;
    let mut avg = DMatrix::<C64>::zeros(dim, dim);
    for (p, rho) in ensemble {
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: rho.dim(),
            });
        }
        if *p <= 0.0 {
            return Err(Error::BadPriors { sum: *p });
        }
        prior_sum += p;
        avg += &rho.mat * C64::new(*p, 0.0);
    }
    if (prior_sum - 1.0).abs() > ALGEBRAIC_TOL {
        return Err(Error::BadPriors { sum: prior_sum });
    }
    let avg = DensityOperator { mat: avg };
    let conditional: f64 = ensemble
        .iter()
        .map(|(p, rho)| p * von_neumann_entropy(rho))
        .sum();
    Ok(von_neumann_entropy(&avg) - conditional)
}

/// An ordered list of PSD operators summing to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    elements: Vec<DMatrix<C64>>,
}

impl Povm {
    /// Validates positivity of each element (within 1e-10) and entrywise
    /// completeness Σ Mₖ = I (within 1e-10).
    pub fn new(elements: Vec<DMatrix<C64>>) -> Result<Self> {
        let Some(first) = elements.first() else {
            return Err(Error::EmptyInput);
        };
        let dim = first.nrows();
        let mut sum = DMatrix::<C64>::zeros(dim, dim);
        for m in &elements {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: m.nrows(),
                });
            }
            // PSD implies Hermitian; DensityOperator::new performs both checks.
            DensityOperator::new(m.clone())?;
            sum += m;
        }
        let dev = (&sum - DMatrix::<C64>::identity(dim, dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > STRUCTURAL_TOL {
            return Err(Error::IncompletePovm { max_deviation: dev });
        }
        Ok(Self { elements })
    }

    pub fn elements(&self) -> &[DMatrix<C64>] {
        &self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Outcome distribution Tr(ρ Mₖ), clamped to non-negative values.
    pub fn outcome_probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: rho.dim(),
                right: self.dim(),
            });
        }
        Ok(self
            .elements
            .iter()
            .map(|m| (rho.matrix() * m).trace().re.max(0.0))
            .collect())
    }
}
