//! Core value types for bipartite states: pure states as coefficient
//! matrices, density matrices over the composite index `i·d_b + j`,
//! decompositions into unnormalized pure states, and the unitaries that act
//! on them.
//!
//! All types are immutable after construction and every operation is a pure
//! function of its inputs.

mod families;

pub use families::{
    generate, random_density, random_pure, random_separable, Generated, StateFamily,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::linalg;
use crate::{Error, Result};

/// Frobenius-norm tolerance for the `normalized` flag on pure states.
pub const NORMALIZED_TOL: f64 = 1e-12;
/// Max-entry Hermiticity tolerance for density matrices; deviations at or
/// below this are Hermitized away, anything larger is rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalue floor for positive semidefiniteness checks.
pub const PSD_TOL: f64 = 1e-10;
/// Max-entry tolerance for unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default relative cutoff separating numerical rank from noise.
pub const RANK_TOL_DEFAULT: f64 = 1e-10;
/// Default cap on local dimensions; everything here is dense.
pub const DIM_CAP_DEFAULT: usize = 8;

/// Local dimensions `(d_a, d_b)` of a bipartite system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    d_a: usize,
    d_b: usize,
}

impl Dims {
    /// Dimensions with the default cap of [`DIM_CAP_DEFAULT`].
    pub fn new(d_a: usize, d_b: usize) -> Result<Self> {
        Self::with_cap(d_a, d_b, DIM_CAP_DEFAULT)
    }

    /// Dimensions with an explicit cap.
    pub fn with_cap(d_a: usize, d_b: usize, cap: usize) -> Result<Self> {
        for dim in [d_a, d_b] {
            if dim < 2 {
                return Err(Error::DimensionTooSmall { dim, min: 2 });
            }
            if dim > cap {
                return Err(Error::DimensionTooLarge { dim, cap });
            }
        }
        Ok(Self { d_a, d_b })
    }

    pub fn d_a(&self) -> usize {
        self.d_a
    }

    pub fn d_b(&self) -> usize {
        self.d_b
    }

    /// Dimension of the composite space, `d_a · d_b`.
    pub fn total(&self) -> usize {
        self.d_a * self.d_b
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.d_a, self.d_b)
    }
}

/// Which subsystem an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// A bipartite pure state, stored as its `d_a × d_b` coefficient matrix:
/// entry `(i, j)` is the amplitude of `|i⟩_A ⊗ |j⟩_B`.
///
/// States are allowed to be unnormalized (decomposition members carry their
/// weights inside the vector); the `normalized` flag records whether the
/// Frobenius norm is 1 within [`NORMALIZED_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Dims,
    coeffs: DMatrix<C64>,
    normalized: bool,
}

/// Build a pure state from its coefficient matrix.
pub fn new_pure(dims: Dims, coeffs: DMatrix<C64>) -> Result<PureState> {
    PureState::new(dims, coeffs)
}

impl PureState {
    pub fn new(dims: Dims, coeffs: DMatrix<C64>) -> Result<Self> {
        if coeffs.nrows() != dims.d_a() || coeffs.ncols() != dims.d_b() {
            return Err(Error::ShapeMismatch {
                want_rows: dims.d_a(),
                want_cols: dims.d_b(),
                got_rows: coeffs.nrows(),
                got_cols: coeffs.ncols(),
            });
        }
        if let Some(index) = coeffs
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            // iteration is column-major; report the row-major position
            let (i, j) = (index % coeffs.nrows(), index / coeffs.nrows());
            return Err(Error::NonFiniteEntry {
                index: i * dims.d_b() + j,
            });
        }
        let normalized = (coeffs.norm() - 1.0).abs() <= NORMALIZED_TOL;
        Ok(Self {
            dims,
            coeffs,
            normalized,
        })
    }

    /// The zero vector, used for decomposition padding.
    pub fn zero(dims: Dims) -> Self {
        Self {
            dims,
            coeffs: DMatrix::zeros(dims.d_a(), dims.d_b()),
            normalized: false,
        }
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Frobenius norm of the coefficient matrix.
    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Rescale to unit norm.
    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroState);
        }
        Self::new(self.dims, self.coeffs.map(|z| z / n))
    }

    /// The state as a vector over the composite index `i·d_b + j`.
    pub fn to_composite_vector(&self) -> DVector<C64> {
        let (d_a, d_b) = (self.dims.d_a(), self.dims.d_b());
        DVector::from_fn(d_a * d_b, |k, _| self.coeffs[(k / d_b, k % d_b)])
    }

    /// Inverse of [`to_composite_vector`](Self::to_composite_vector).
    pub fn from_composite_vector(dims: Dims, v: &DVector<C64>) -> Result<Self> {
        if v.len() != dims.total() {
            return Err(Error::SizeMismatch {
                expected: dims.total(),
                got: v.len(),
            });
        }
        Self::new(
            dims,
            DMatrix::from_fn(dims.d_a(), dims.d_b(), |i, j| v[i * dims.d_b() + j]),
        )
    }

    /// The projector `|ψ⟩⟨ψ|` as a raw matrix (no trace normalization).
    pub fn projector(&self) -> DMatrix<C64> {
        let v = self.to_composite_vector();
        let n = v.len();
        DMatrix::from_fn(n, n, |r, c| v[r] * v[c].conj())
    }

    /// Local basis change `[ψ] → V [ψ] Wᵀ`.
    pub fn apply_local(&self, lu: &LocalUnitaryPair) -> Result<Self> {
        if lu.v().nrows() != self.dims.d_a() {
            return Err(Error::SizeMismatch {
                expected: self.dims.d_a(),
                got: lu.v().nrows(),
            });
        }
        if lu.w().nrows() != self.dims.d_b() {
            return Err(Error::SizeMismatch {
                expected: self.dims.d_b(),
                got: lu.w().nrows(),
            });
        }
        Self::new(self.dims, lu.v() * &self.coeffs * lu.w().transpose())
    }
}

/// A density matrix on the composite space, basis ordered as `i·d_b + j`.
///
/// Constructors enforce Hermiticity (inputs within [`HERMITIAN_TOL`] are
/// symmetrized as `(ρ + ρ^H)/2`, anything worse is rejected), unit trace, and
/// positive semidefiniteness down to `-`[`PSD_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Dims,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(dims: Dims, matrix: DMatrix<C64>) -> Result<Self> {
        let n = dims.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::ShapeMismatch {
                want_rows: n,
                want_cols: n,
                got_rows: matrix.nrows(),
                got_cols: matrix.ncols(),
            });
        }
        Self::validated(dims, matrix)
    }

    fn validated(dims: Dims, matrix: DMatrix<C64>) -> Result<Self> {
        if let Some(index) = matrix
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFiniteEntry { index });
        }
        let herm_dev = linalg::hermiticity_deviation(&matrix);
        if herm_dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                deviation: herm_dev,
                tolerance: HERMITIAN_TOL,
            });
        }
        let matrix = (&matrix + matrix.adjoint()).scale(0.5);
        let trace_dev = (matrix.trace().re - 1.0).abs().max(matrix.trace().im.abs());
        if trace_dev > TRACE_TOL {
            return Err(Error::TraceError {
                deviation: trace_dev,
                tolerance: TRACE_TOL,
            });
        }
        let (eigenvalues, _) = linalg::hermitian_eigen(&matrix)?;
        let min_eig = eigenvalues.last().copied().unwrap_or(0.0);
        if min_eig < -PSD_TOL {
            return Err(Error::NotPositiveSemidefinite {
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self { dims, matrix })
    }

    /// The projector onto a normalized pure state.
    pub fn from_pure(state: &PureState) -> Result<Self> {
        if !state.is_normalized() {
            return Err(Error::NotNormalized {
                deviation: (state.norm() - 1.0).abs(),
            });
        }
        Self::new(state.dims(), state.projector())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(linalg::hermitian_eigen(&self.matrix)?.0)
    }

    /// Numerical rank at a relative tolerance.
    pub fn rank(&self, rank_tol: f64) -> Result<usize> {
        let eigenvalues = self.eigenvalues()?;
        let max = eigenvalues.first().copied().unwrap_or(0.0);
        Ok(eigenvalues.iter().filter(|&&v| v > rank_tol * max).count())
    }

    /// Purity `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Conjugation by local unitaries: `ρ → (V⊗W) ρ (V⊗W)^H`.
    pub fn apply_local(&self, lu: &LocalUnitaryPair) -> Result<Self> {
        if lu.v().nrows() != self.dims.d_a() {
            return Err(Error::SizeMismatch {
                expected: self.dims.d_a(),
                got: lu.v().nrows(),
            });
        }
        if lu.w().nrows() != self.dims.d_b() {
            return Err(Error::SizeMismatch {
                expected: self.dims.d_b(),
                got: lu.w().nrows(),
            });
        }
        let u = linalg::kron(lu.v(), lu.w());
        Self::new(self.dims, &u * &self.matrix * u.adjoint())
    }
}

/// Schmidt (singular value) decomposition of a pure state's coefficient
/// matrix: `[ψ] = left_basis · diag(λ) · right_basisᵀ` with both bases square
/// unitaries and `λ` descending.
#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    pub singular_values: Vec<f64>,
    pub left_basis: DMatrix<C64>,
    pub right_basis: DMatrix<C64>,
    pub rank: usize,
}

impl SchmidtDecomposition {
    /// Rebuild the coefficient matrix from the factors.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let (d_a, d_b) = (self.left_basis.nrows(), self.right_basis.nrows());
        let mut sigma = DMatrix::<C64>::zeros(d_a, d_b);
        for (k, &s) in self.singular_values.iter().enumerate() {
            sigma[(k, k)] = C64::new(s, 0.0);
        }
        &self.left_basis * sigma * self.right_basis.transpose()
    }
}

/// Schmidt decomposition with rank counted at `λ > rank_tol · λ_max`.
pub fn schmidt(state: &PureState, rank_tol: f64) -> Result<SchmidtDecomposition> {
    let (u, sigma, v) = linalg::svd_square(state.coeffs())?;
    // svd_square returns A = u Σ v^H; with right_basis = conj(v) the
    // reconstruction reads u Σ right_basisᵀ.
    let right_basis = v.conjugate();
    let max = sigma.first().copied().unwrap_or(0.0);
    let rank = sigma.iter().filter(|&&s| s > rank_tol * max && s > 0.0).count();
    Ok(SchmidtDecomposition {
        singular_values: sigma,
        left_basis: u,
        right_basis,
        rank,
    })
}

/// Marginal of a pure state on one side, normalized to unit trace.
///
/// The result lives on a single subsystem; it is returned as a
/// [`DensityMatrix`] whose dims are `(d, 1)` with the trivial B factor.
pub fn reduced_density(state: &PureState, side: Side) -> Result<DensityMatrix> {
    let n2 = state.norm_sq();
    if n2 == 0.0 {
        return Err(Error::ZeroState);
    }
    let psi = state.coeffs();
    let m = match side {
        Side::A => psi * psi.adjoint(),
        Side::B => psi.transpose() * psi.conjugate(),
    };
    let dims = Dims {
        d_a: m.nrows(),
        d_b: 1,
    };
    DensityMatrix::validated(dims, m.map(|z| z / n2))
}

/// Von Neumann entropy of the marginal, in bits: `−Σ λ² log₂ λ²`.
pub fn entanglement_entropy(state: &PureState) -> Result<f64> {
    if !state.is_normalized() {
        return Err(Error::NotNormalized {
            deviation: (state.norm() - 1.0).abs(),
        });
    }
    let dec = schmidt(state, RANK_TOL_DEFAULT)?;
    let mut entropy = 0.0;
    for &s in &dec.singular_values {
        let p = s * s;
        if p > 0.0 {
            entropy -= p * p.log2();
        }
    }
    Ok(entropy.max(0.0))
}

/// A decomposition of a density matrix into unnormalized pure states:
/// `ρ = Σ_μ |ψ^μ⟩⟨ψ^μ|` with the weights carried inside the vectors.
#[derive(Debug, Clone)]
pub struct Decomposition {
    dims: Dims,
    members: Vec<PureState>,
}

impl Decomposition {
    pub fn new(dims: Dims, members: Vec<PureState>) -> Result<Self> {
        for member in &members {
            if member.dims() != dims {
                return Err(Error::ShapeMismatch {
                    want_rows: dims.d_a(),
                    want_cols: dims.d_b(),
                    got_rows: member.dims().d_a(),
                    got_cols: member.dims().d_b(),
                });
            }
        }
        Ok(Self { dims, members })
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[PureState] {
        &self.members
    }

    /// `Σ_μ |ψ^μ⟩⟨ψ^μ|` as a raw matrix.
    pub fn reconstruction(&self) -> DMatrix<C64> {
        let n = self.dims.total();
        let mut acc = DMatrix::<C64>::zeros(n, n);
        for member in &self.members {
            acc += member.projector();
        }
        acc
    }

    /// Max-entry deviation of the reconstruction from a reference matrix.
    pub fn reconstruction_deviation(&self, reference: &DensityMatrix) -> f64 {
        linalg::max_abs_diff(&self.reconstruction(), reference.matrix())
    }
}

/// Canonical eigendecomposition of `ρ` into `√λ_k · v_k` members, one per
/// eigenvalue above `rank_tol · λ_max`.
pub fn eig_decomposition(rho: &DensityMatrix, rank_tol: f64) -> Result<Decomposition> {
    let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(rho.matrix())?;
    let max = eigenvalues.first().copied().unwrap_or(0.0);
    let mut members = Vec::new();
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        if lambda > rank_tol * max && lambda > 0.0 {
            let scaled = eigenvectors.column(k).into_owned() * C64::new(lambda.sqrt(), 0.0);
            members.push(PureState::from_composite_vector(
                rho.dims(),
                &DVector::from_column_slice(scaled.as_slice()),
            )?);
        }
    }
    Decomposition::new(rho.dims(), members)
}

/// Extend a decomposition to `m` members by appending zero vectors.
pub fn pad(dec: &Decomposition, m: usize) -> Result<Decomposition> {
    if m < dec.len() {
        return Err(Error::ShrinkNotAllowed {
            current: dec.len(),
            requested: m,
        });
    }
    let mut members = dec.members().to_vec();
    members.resize_with(m, || PureState::zero(dec.dims()));
    Decomposition::new(dec.dims(), members)
}

/// Change of decomposition: `ψ′^μ = Σ_ν U^{μν} ψ^ν`. Reconstructs the same
/// density matrix for any unitary `U`.
pub fn mix(dec: &Decomposition, u: &MixingUnitary) -> Result<Decomposition> {
    if u.size() != dec.len() {
        return Err(Error::SizeMismatch {
            expected: dec.len(),
            got: u.size(),
        });
    }
    let m = dec.len();
    let (d_a, d_b) = (dec.dims().d_a(), dec.dims().d_b());
    let mut members = Vec::with_capacity(m);
    for mu in 0..m {
        let mut coeffs = DMatrix::<C64>::zeros(d_a, d_b);
        for (nu, member) in dec.members().iter().enumerate() {
            coeffs += member.coeffs() * u.matrix()[(mu, nu)];
        }
        members.push(PureState::new(dec.dims(), coeffs)?);
    }
    Decomposition::new(dec.dims(), members)
}

/// Apply a local unitary pair to every member of a decomposition.
pub fn apply_local_decomposition(
    dec: &Decomposition,
    lu: &LocalUnitaryPair,
) -> Result<Decomposition> {
    let members = dec
        .members()
        .iter()
        .map(|member| member.apply_local(lu))
        .collect::<Result<Vec<_>>>()?;
    Decomposition::new(dec.dims(), members)
}

/// An `m × m` unitary relating two decompositions of the same state.
#[derive(Debug, Clone, PartialEq)]
pub struct MixingUnitary {
    matrix: DMatrix<C64>,
}

impl MixingUnitary {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::SizeMismatch {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        let dev = linalg::unitarity_deviation(&matrix);
        if dev > UNITARY_TOL {
            return Err(Error::NotUnitary { deviation: dev });
        }
        Ok(Self { matrix })
    }

    pub fn identity(m: usize) -> Self {
        Self {
            matrix: DMatrix::identity(m, m),
        }
    }

    /// Haar-random unitary from the given RNG stream.
    pub fn haar<R: rand::Rng + ?Sized>(m: usize, rng: &mut R) -> Self {
        Self {
            matrix: linalg::haar_unitary(m, rng),
        }
    }

    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Composition `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.size() != other.size() {
            return Err(Error::SizeMismatch {
                expected: self.size(),
                got: other.size(),
            });
        }
        Self::new(self.matrix() * other.matrix())
    }
}

/// A pair of local basis rotations `(V, W)` acting on the A and B sides.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalUnitaryPair {
    v: DMatrix<C64>,
    w: DMatrix<C64>,
}

impl LocalUnitaryPair {
    pub fn new(v: DMatrix<C64>, w: DMatrix<C64>) -> Result<Self> {
        for m in [&v, &w] {
            if m.nrows() != m.ncols() {
                return Err(Error::SizeMismatch {
                    expected: m.nrows(),
                    got: m.ncols(),
                });
            }
            let dev = linalg::unitarity_deviation(m);
            if dev > UNITARY_TOL {
                return Err(Error::NotUnitary { deviation: dev });
            }
        }
        Ok(Self { v, w })
    }

    pub fn identity(dims: Dims) -> Self {
        Self {
            v: DMatrix::identity(dims.d_a(), dims.d_a()),
            w: DMatrix::identity(dims.d_b(), dims.d_b()),
        }
    }

    pub fn haar<R: rand::Rng + ?Sized>(dims: Dims, rng: &mut R) -> Self {
        Self {
            v: linalg::haar_unitary(dims.d_a(), rng),
            w: linalg::haar_unitary(dims.d_b(), rng),
        }
    }

    pub fn v(&self) -> &DMatrix<C64> {
        &self.v
    }

    pub fn w(&self) -> &DMatrix<C64> {
        &self.w
    }
}
