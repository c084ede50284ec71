//! The fourth-order biconcurrence operator `B^{μνmn}` of a decomposition and
//! the diagonal-trace functional whose minimum over mixing unitaries decides
//! separability.
//!
//! Three independent constructions are kept in the build permanently and must
//! agree entrywise:
//!
//! * the reduction-map route `B^{μνmn} = −⟨ψ_μ| I⊗Λ(|ψ_ν⟩⟨ψ_m|) |ψ_n⟩` with
//!   `Λ(A) = Tr(A)·I − A` ([`biconcurrence_operator_lambda`]),
//! * the algebraic route `⟨ψ_μ|ψ_ν⟩⟨ψ_m|ψ_n⟩ − Tr([ψ_μ]^H[ψ_ν][ψ_m]^H[ψ_n])`
//!   ([`biconcurrence_operator`]),
//! * the contraction of the preconcurrence tensor with its conjugate,
//!   `c · Σ_κ C_κ^{nν} (C_κ^{mμ})*` ([`from_preconcurrence`]).
//!
//! The stored operator is the compression of the raw fourth-order tensor onto
//! the subspace symmetric under the simultaneous index swaps `ν ↔ n` and
//! `μ ↔ m`. The contraction route lands on that subspace identically, and the
//! compression changes nothing observable: diagonal entries, the diagonal
//! trace after any change of decomposition, Hermiticity, positivity, and the
//! local-unitary invariance are all those of the raw tensor. On the symmetric
//! subspace the three routes coincide exactly, with contraction constant 1/2;
//! the alternative constant 1/4 remains selectable for audit via
//! [`ContractionConstant::Quarter`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::concurrence::PreconcurrenceTensor;
use crate::linalg;
use crate::optim::UnitaryObjective;
use crate::states::{reduced_density, Decomposition, MixingUnitary, PureState, Side};
use crate::{Error, Result};

/// Entrywise tolerance for the internal dual-route consistency assertions.
const DUAL_ROUTE_TOL: f64 = 1e-12;

/// Prefactor of the preconcurrence contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContractionConstant {
    /// `c = 1/2`: the value forced by the Bell single-member calibration and
    /// by consistency with the other two constructions.
    #[default]
    Calibrated,
    /// `c = 1/4`, kept reachable for audit. Does not reproduce the other
    /// constructions.
    Quarter,
}

impl ContractionConstant {
    pub fn value(self) -> f64 {
        match self {
            ContractionConstant::Calibrated => 0.5,
            ContractionConstant::Quarter => 0.25,
        }
    }
}

/// Hermitian positive operator with entries `B^{μνmn}`, stored as an m²×m²
/// matrix with row composite index `(μ, m)` and column composite index
/// `(ν, n)`, both row-major.
#[derive(Debug, Clone)]
pub struct BiconcurrenceOperator {
    m: usize,
    matrix: DMatrix<C64>,
}

impl BiconcurrenceOperator {
    /// Decomposition length m.
    pub fn m(&self) -> usize {
        self.m
    }

    /// The m²×m² matrix form.
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Entry `B^{μνmn}`.
    pub fn entry(&self, mu: usize, nu: usize, mm: usize, n: usize) -> C64 {
        self.matrix[(mu * self.m + mm, nu * self.m + n)]
    }

    /// Max-entry deviation from Hermiticity.
    pub fn hermiticity_residual(&self) -> f64 {
        linalg::hermiticity_deviation(&self.matrix)
    }

    /// Smallest eigenvalue; at or above `-1e-10` for every valid operator.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let (values, _) = linalg::hermitian_eigen(&self.matrix)?;
        Ok(values.last().copied().unwrap_or(0.0))
    }

    /// Max-entry difference against another operator.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.matrix, &other.matrix)
    }

    /// Compress a raw fourth-order tensor onto the swap-symmetric subspace:
    /// the average over the simultaneous exchanges `ν ↔ n` (columns) and
    /// `μ ↔ m` (rows).
    fn symmetrized(m: usize, raw: DMatrix<C64>) -> Self {
        let swap = |composite: usize| -> usize {
            let (first, second) = (composite / m, composite % m);
            second * m + first
        };
        let n2 = m * m;
        let matrix = DMatrix::from_fn(n2, n2, |row, col| {
            (raw[(row, col)] + raw[(row, swap(col))]
                + raw[(swap(row), col)]
                + raw[(swap(row), swap(col))])
                .scale(0.25)
        });
        Self { m, matrix }
    }
}

/// The scalar `B(ψ) = 1 − Tr ρ_A²` of a normalized pure state, evaluated both
/// through the marginal and through the reduction map `Λ(A) = Tr(A)·I − A`;
/// the two routes are asserted to agree to 1e-12.
pub fn b_scalar(state: &PureState) -> Result<f64> {
    if !state.is_normalized() {
        return Err(Error::NotNormalized {
            deviation: (state.norm() - 1.0).abs(),
        });
    }
    let via_reduction = 1.0 - reduced_density(state, Side::A)?.purity();

    let (d_a, d_b) = (state.dims().d_a(), state.dims().d_b());
    let x = state.projector();
    let y = linalg::kron(
        &linalg::partial_trace_b(&x, d_a, d_b),
        &DMatrix::identity(d_b, d_b),
    ) - &x;
    let v = state.to_composite_vector();
    let via_lambda = -(v.adjoint() * &y * &v)[(0, 0)].re;

    assert!(
        (via_reduction - via_lambda).abs() < DUAL_ROUTE_TOL,
        "reduction and Λ-map evaluations disagree: {via_reduction} vs {via_lambda}"
    );
    Ok(via_reduction)
}

fn member_matrices(dec: &Decomposition) -> Vec<&DMatrix<C64>> {
    dec.members().iter().map(|p| p.coeffs()).collect()
}

/// Algebraic construction: `B^{μνmn} = ⟨ψ_μ|ψ_ν⟩⟨ψ_m|ψ_n⟩ −
/// Tr([ψ_μ]^H [ψ_ν] [ψ_m]^H [ψ_n])`, compressed onto the symmetric subspace.
pub fn biconcurrence_operator(dec: &Decomposition) -> BiconcurrenceOperator {
    let psi = member_matrices(dec);
    let m = psi.len();
    // Gram matrix and all pairwise cross products [ψ_α]^H [ψ_β]
    let mut gram = vec![C64::default(); m * m];
    let mut cross: Vec<DMatrix<C64>> = Vec::with_capacity(m * m);
    for alpha in 0..m {
        for beta in 0..m {
            let product = psi[alpha].adjoint() * psi[beta];
            gram[alpha * m + beta] = product.trace();
            cross.push(product);
        }
    }
    let raw = DMatrix::from_fn(m * m, m * m, |row, col| {
        let (mu, mm) = (row / m, row % m);
        let (nu, n) = (col / m, col % m);
        let trace = (&cross[mu * m + nu] * &cross[mm * m + n]).trace();
        gram[mu * m + nu] * gram[mm * m + n] - trace
    });
    BiconcurrenceOperator::symmetrized(m, raw)
}

/// Reduction-map construction: `B^{μνmn} = −⟨ψ_μ| I⊗Λ(|ψ_ν⟩⟨ψ_m|) |ψ_n⟩`,
/// compressed onto the symmetric subspace. Independent of
/// [`biconcurrence_operator`] down to the arithmetic.
pub fn biconcurrence_operator_lambda(dec: &Decomposition) -> BiconcurrenceOperator {
    let m = dec.len();
    let (d_a, d_b) = (dec.dims().d_a(), dec.dims().d_b());
    let total = dec.dims().total();
    let vecs: Vec<DVector<C64>> = dec
        .members()
        .iter()
        .map(|p| p.to_composite_vector())
        .collect();
    let eye_b = DMatrix::<C64>::identity(d_b, d_b);

    let mut raw = DMatrix::<C64>::zeros(m * m, m * m);
    for nu in 0..m {
        for mm in 0..m {
            // X = |ψ_ν⟩⟨ψ_m|, Y = (I ⊗ Λ)(X) = Tr_B(X) ⊗ I − X
            let x = DMatrix::from_fn(total, total, |r, c| vecs[nu][r] * vecs[mm][c].conj());
            let y = linalg::kron(&linalg::partial_trace_b(&x, d_a, d_b), &eye_b) - x;
            let mapped: Vec<DVector<C64>> = (0..m).map(|n| &y * &vecs[n]).collect();
            for mu in 0..m {
                for n in 0..m {
                    raw[(mu * m + mm, nu * m + n)] = -vecs[mu].dotc(&mapped[n]);
                }
            }
        }
    }
    BiconcurrenceOperator::symmetrized(m, raw)
}

/// Contraction construction: `B^{μνmn} = c · Σ_κ C_κ^{nν} (C_κ^{mμ})*` with
/// the calibrated constant `c = 1/2`.
pub fn from_preconcurrence(t: &PreconcurrenceTensor) -> BiconcurrenceOperator {
    from_preconcurrence_with(t, ContractionConstant::Calibrated)
}

/// Contraction construction with an explicit choice of prefactor.
pub fn from_preconcurrence_with(
    t: &PreconcurrenceTensor,
    constant: ContractionConstant,
) -> BiconcurrenceOperator {
    let m = t.m();
    let c = constant.value();
    let matrix = DMatrix::from_fn(m * m, m * m, |row, col| {
        let (mu, mm) = (row / m, row % m);
        let (nu, n) = (col / m, col % m);
        let mut acc = C64::default();
        for kappa in 0..t.num_wedge() {
            acc += t.entry(kappa, n, nu) * t.entry(kappa, mm, mu).conj();
        }
        acc.scale(c)
    });
    // already symmetric under both index swaps because the preconcurrence
    // tensor is symmetric in its member indices
    BiconcurrenceOperator { m, matrix }
}

/// Change-of-decomposition transform:
/// `B̃ = (U*⊗U*) B (U*⊗U*)^H`, matching [`crate::states::mix`] member-wise.
pub fn transform(b: &BiconcurrenceOperator, u: &MixingUnitary) -> Result<BiconcurrenceOperator> {
    if u.size() != b.m() {
        return Err(Error::SizeMismatch {
            expected: b.m(),
            got: u.size(),
        });
    }
    let conj = u.matrix().conjugate();
    let k = linalg::kron(&conj, &conj);
    let matrix = &k * b.matrix() * k.adjoint();
    Ok(BiconcurrenceOperator { m: b.m(), matrix })
}

/// The diagonal trace `Σ_μ B^{μμμμ}` with its per-member breakdown.
#[derive(Debug, Clone)]
pub struct DiagTrace {
    pub value: f64,
    pub per_member: Vec<f64>,
}

/// Sum of the main-diagonal elements `B^{μμμμ}`; real and nonnegative for
/// every valid operator.
pub fn diag_trace(b: &BiconcurrenceOperator) -> DiagTrace {
    let m = b.m();
    let per_member: Vec<f64> = (0..m).map(|mu| b.entry(mu, mu, mu, mu).re).collect();
    DiagTrace {
        value: per_member.iter().sum(),
        per_member,
    }
}

/// The minimization functional at a specific mixing unitary, with the unitary
/// and the per-member diagonal contributions that produced it.
#[derive(Debug, Clone)]
pub struct ObjectiveValue {
    pub value: f64,
    pub u: MixingUnitary,
    pub per_member: Vec<f64>,
}

/// Evaluate the diagonal trace after mixing by `u`, by two routes that are
/// asserted to agree: transforming the operator and reading its diagonal, and
/// the projector form `Tr(P · (U*⊗U*) B (U*⊗U*)^H)` with
/// `P = Σ_i |ii⟩⟨ii|`.
pub fn objective(b: &BiconcurrenceOperator, u: &MixingUnitary) -> Result<f64> {
    let transformed = transform(b, u)?;
    let via_diag = diag_trace(&transformed).value;

    let m = b.m();
    let mut projector = DMatrix::<C64>::zeros(m * m, m * m);
    for mu in 0..m {
        let idx = mu * m + mu;
        projector[(idx, idx)] = C64::new(1.0, 0.0);
    }
    let via_projector = (projector * transformed.matrix()).trace().re;

    assert!(
        (via_diag - via_projector).abs() < DUAL_ROUTE_TOL,
        "diagonal and projector objective routes disagree: {via_diag} vs {via_projector}"
    );
    Ok(via_diag)
}

/// The diagonal-trace objective in the fast per-member form used by the
/// optimizer: `f(U) = Σ_μ [ ‖φ_μ‖⁴ − Tr((φ_μ^H φ_μ)²) ]` with
/// `φ_μ = Σ_β U_{μβ} [ψ_β]`.
///
/// Algebraically identical to `diag_trace(transform(B, U))`; deterministic
/// (fixed summation order), so same input gives bit-identical output.
pub struct DiagObjective {
    members: Vec<DMatrix<C64>>,
    m: usize,
}

impl DiagObjective {
    pub fn new(dec: &Decomposition) -> Self {
        Self {
            members: dec.members().iter().map(|p| p.coeffs().clone()).collect(),
            m: dec.len(),
        }
    }

    fn mixed_member(&self, u: &DMatrix<C64>, mu: usize) -> DMatrix<C64> {
        let (rows, cols) = self.members[0].shape();
        let mut phi = DMatrix::<C64>::zeros(rows, cols);
        for (beta, member) in self.members.iter().enumerate() {
            phi += member * u[(mu, beta)];
        }
        phi
    }

    /// Per-member diagonal contributions `B̃^{μμμμ}` at `u`.
    pub fn per_member(&self, u: &DMatrix<C64>) -> Vec<f64> {
        (0..self.m)
            .map(|mu| {
                let phi = self.mixed_member(u, mu);
                let gram = phi.adjoint() * &phi;
                let norm_sq = gram.trace().re;
                norm_sq * norm_sq - (&gram * &gram).trace().re
            })
            .collect()
    }

    /// Structured evaluation carrying the unitary and the breakdown.
    pub fn evaluate(&self, u: &MixingUnitary) -> Result<ObjectiveValue> {
        if u.size() != self.m {
            return Err(Error::SizeMismatch {
                expected: self.m,
                got: u.size(),
            });
        }
        let per_member = self.per_member(u.matrix());
        Ok(ObjectiveValue {
            value: per_member.iter().sum(),
            u: u.clone(),
            per_member,
        })
    }
}

impl UnitaryObjective for DiagObjective {
    fn dim(&self) -> usize {
        self.m
    }

    fn value(&self, u: &DMatrix<C64>) -> f64 {
        self.per_member(u).iter().sum()
    }

    fn euclidean_grad(&self, u: &DMatrix<C64>) -> Option<DMatrix<C64>> {
        // ∂f/∂conj(U_{pq}) = Tr([ψ_q]^H Z_p) with
        // Z_p = 2(‖φ_p‖² φ_p − φ_p (φ_p^H φ_p))
        let mut grad = DMatrix::<C64>::zeros(self.m, self.m);
        for p in 0..self.m {
            let phi = self.mixed_member(u, p);
            let gram = phi.adjoint() * &phi;
            let norm_sq = gram.trace().re;
            let z = (phi.scale(norm_sq) - &phi * &gram).scale(2.0);
            for q in 0..self.m {
                grad[(p, q)] = (self.members[q].adjoint() * &z).trace();
            }
        }
        Some(grad)
    }
}
