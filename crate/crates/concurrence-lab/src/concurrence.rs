//! Concurrence matrices of pure states, higher-order minor tensors, and
//! preconcurrence tensors over decompositions.
//!
//! The concurrence matrix of a pure state collects twice the 2×2 minors of
//! its coefficient matrix, indexed by wedge indices `(i₁∧j₁; i₂∧j₂)`. It is
//! all-zero exactly on product states. Over a decomposition the same minors
//! polarize to the preconcurrence tensor `C_κ^{μν}`, which transforms
//! bilinearly under changes of decomposition and through second compound
//! matrices under local basis rotations.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::states::{Decomposition, Dims, LocalUnitaryPair, MixingUnitary, PureState};
use crate::{Error, Result};

/// A pair of strictly ordered index pairs labeling one antisymmetric 2-plane
/// on each side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WedgeIndex {
    pub a_pair: (usize, usize),
    pub b_pair: (usize, usize),
}

impl WedgeIndex {
    /// All wedge indices for the given dims, lexicographic over
    /// `(a_pair, b_pair)`. This ordering is part of the public contract:
    /// file outputs list entries in exactly this order.
    pub fn enumerate(dims: Dims) -> Vec<WedgeIndex> {
        let mut out = Vec::new();
        for a_pair in ordered_pairs(dims.d_a()) {
            for b_pair in ordered_pairs(dims.d_b()) {
                out.push(WedgeIndex { a_pair, b_pair });
            }
        }
        out
    }
}

impl std::fmt::Display for WedgeIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({}^{}; {}^{})",
            self.a_pair.0, self.a_pair.1, self.b_pair.0, self.b_pair.1
        )
    }
}

/// Strictly ordered pairs `(i, j)` with `i < j < d`, lexicographic.
pub fn ordered_pairs(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            out.push((i, j));
        }
    }
    out
}

/// Lexicographically ordered k-element subsets of `0..n`.
pub fn ordered_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k == 0 {
            out.push(prefix.clone());
            return;
        }
        for i in start..=(n - k) {
            prefix.push(i);
            rec(i + 1, n, k - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::new(), &mut out);
    }
    out
}

/// The concurrence matrix of a pure state: entry `2·(ψ_{i₁,i₂}ψ_{j₁,j₂} −
/// ψ_{i₁,j₂}ψ_{j₁,i₂})` per wedge index, in enumeration order.
#[derive(Debug, Clone)]
pub struct ConcurrenceMatrix {
    dims: Dims,
    entries: Vec<C64>,
}

impl ConcurrenceMatrix {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn wedge_indices(&self) -> Vec<WedgeIndex> {
        WedgeIndex::enumerate(self.dims)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

/// Squared trace norm of a concurrence matrix together with its square root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrenceNorm {
    pub norm_sq: f64,
    pub norm: f64,
}

/// Twice the 2×2 minors of the coefficient matrix.
pub fn concurrence_matrix(state: &PureState) -> Result<ConcurrenceMatrix> {
    let dims = state.dims();
    require_wedge_dims(dims)?;
    let psi = state.coeffs();
    let mut entries = Vec::new();
    for (i1, j1) in ordered_pairs(dims.d_a()) {
        for (i2, j2) in ordered_pairs(dims.d_b()) {
            let minor = psi[(i1, i2)] * psi[(j1, j2)] - psi[(i1, j2)] * psi[(j1, i2)];
            entries.push(minor * 2.0);
        }
    }
    Ok(ConcurrenceMatrix { dims, entries })
}

/// `|C|² = Σ_κ |C_κ|²`, with its square root.
pub fn concurrence_norm(c: &ConcurrenceMatrix) -> ConcurrenceNorm {
    let norm_sq: f64 = c.entries.iter().map(|z| z.norm_sqr()).sum();
    ConcurrenceNorm {
        norm_sq,
        norm: norm_sq.sqrt(),
    }
}

fn require_wedge_dims(dims: Dims) -> Result<()> {
    for dim in [dims.d_a(), dims.d_b()] {
        if dim < 2 {
            return Err(Error::DimensionTooSmall { dim, min: 2 });
        }
    }
    Ok(())
}

/// All `k×k` minors of the coefficient matrix, indexed by pairs of size-k
/// ordered index subsets. Entries are plain determinants; the factor 2 of the
/// concurrence matrix applies only at `k = 2` in [`concurrence_matrix`].
#[derive(Debug, Clone)]
pub struct KMinorTensor {
    pub k: usize,
    pub row_subsets: Vec<Vec<usize>>,
    pub col_subsets: Vec<Vec<usize>>,
    entries: Vec<C64>,
}

impl KMinorTensor {
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn entry(&self, row_subset: usize, col_subset: usize) -> C64 {
        self.entries[row_subset * self.col_subsets.len() + col_subset]
    }

    /// `Σ |entries|²`; equals the k-th elementary symmetric polynomial of the
    /// squared singular values.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, z| acc.max(z.norm()))
    }
}

/// All k×k determinants of the coefficient matrix, `2 ≤ k ≤ min(d_a, d_b)`.
pub fn k_minors(state: &PureState, k: usize) -> Result<KMinorTensor> {
    let dims = state.dims();
    let max = dims.d_a().min(dims.d_b());
    if k < 2 || k > max {
        return Err(Error::BadOrder { k, max });
    }
    let psi = state.coeffs();
    let row_subsets = ordered_subsets(dims.d_a(), k);
    let col_subsets = ordered_subsets(dims.d_b(), k);
    let mut entries = Vec::with_capacity(row_subsets.len() * col_subsets.len());
    for rows in &row_subsets {
        for cols in &col_subsets {
            let sub = DMatrix::from_fn(k, k, |r, c| psi[(rows[r], cols[c])]);
            entries.push(sub.determinant());
        }
    }
    Ok(KMinorTensor {
        k,
        row_subsets,
        col_subsets,
        entries,
    })
}

/// The preconcurrence tensor `C_κ^{μν}` of a decomposition: the symmetrized
/// bilinear extension of the 2×2 minors over member pairs. Symmetric in
/// `μ ↔ ν` by construction; the diagonal slice `C_κ^{μμ}` is the concurrence
/// matrix of member `ψ^μ`.
#[derive(Debug, Clone)]
pub struct PreconcurrenceTensor {
    dims: Dims,
    m: usize,
    num_wedge: usize,
    // layout: [kappa][mu][nu]
    entries: Vec<C64>,
}

impl PreconcurrenceTensor {
    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn num_wedge(&self) -> usize {
        self.num_wedge
    }

    pub fn entry(&self, kappa: usize, mu: usize, nu: usize) -> C64 {
        self.entries[(kappa * self.m + mu) * self.m + nu]
    }

    /// The `m × m` matrix `C_κ` at a fixed wedge index.
    pub fn slice(&self, kappa: usize) -> DMatrix<C64> {
        DMatrix::from_fn(self.m, self.m, |mu, nu| self.entry(kappa, mu, nu))
    }

    /// The diagonal `C_κ^{μμ}` over κ for a fixed member.
    pub fn member_diagonal(&self, mu: usize) -> Vec<C64> {
        (0..self.num_wedge)
            .map(|kappa| self.entry(kappa, mu, mu))
            .collect()
    }

    /// `Σ_{κ,μ,ν} |C_κ^{μν}|²`.
    pub fn norm_sq(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn wedge_indices(&self) -> Vec<WedgeIndex> {
        WedgeIndex::enumerate(self.dims)
    }

    fn from_slices(dims: Dims, m: usize, slices: Vec<DMatrix<C64>>) -> Self {
        let num_wedge = slices.len();
        let mut entries = Vec::with_capacity(num_wedge * m * m);
        for slice in &slices {
            for mu in 0..m {
                for nu in 0..m {
                    entries.push(slice[(mu, nu)]);
                }
            }
        }
        Self {
            dims,
            m,
            num_wedge,
            entries,
        }
    }
}

/// Build the preconcurrence tensor of a decomposition.
pub fn preconcurrence(dec: &Decomposition) -> Result<PreconcurrenceTensor> {
    let dims = dec.dims();
    require_wedge_dims(dims)?;
    let m = dec.len();
    let wedges = WedgeIndex::enumerate(dims);
    let mut entries = vec![C64::default(); wedges.len() * m * m];
    for (k, w) in wedges.iter().enumerate() {
        let (i1, j1) = w.a_pair;
        let (i2, j2) = w.b_pair;
        // each unordered member pair is evaluated once and mirrored, so the
        // μ ↔ ν symmetry holds bit for bit; the diagonal uses the exact
        // arithmetic of `concurrence_matrix`
        for mu in 0..m {
            for nu in mu..m {
                let p = dec.members()[mu].coeffs();
                let q = dec.members()[nu].coeffs();
                let value = if mu == nu {
                    let minor = p[(i1, i2)] * p[(j1, j2)] - p[(i1, j2)] * p[(j1, i2)];
                    minor * 2.0
                } else {
                    p[(i1, i2)] * q[(j1, j2)] - p[(i1, j2)] * q[(j1, i2)]
                        + q[(i1, i2)] * p[(j1, j2)]
                        - q[(i1, j2)] * p[(j1, i2)]
                };
                entries[(k * m + mu) * m + nu] = value;
                entries[(k * m + nu) * m + mu] = value;
            }
        }
    }
    Ok(PreconcurrenceTensor {
        dims,
        m,
        num_wedge: wedges.len(),
        entries,
    })
}

/// Change-of-decomposition transform: `C′_κ = U C_κ Uᵀ` (bilinear, no
/// conjugation) applied slice by slice.
pub fn transform_mix(
    t: &PreconcurrenceTensor,
    u: &MixingUnitary,
) -> Result<PreconcurrenceTensor> {
    if u.size() != t.m {
        return Err(Error::SizeMismatch {
            expected: t.m,
            got: u.size(),
        });
    }
    let um = u.matrix();
    let slices = (0..t.num_wedge)
        .map(|kappa| um * t.slice(kappa) * um.transpose())
        .collect();
    Ok(PreconcurrenceTensor::from_slices(t.dims, t.m, slices))
}

/// Second compound matrix: entry `[(i∧j), (k∧l)] = M_{ik} M_{jl} − M_{il} M_{jk}`,
/// the action of `M` on 2×2 minors.
pub fn second_compound(m: &DMatrix<C64>, pairs: &[(usize, usize)]) -> DMatrix<C64> {
    DMatrix::from_fn(pairs.len(), pairs.len(), |row, col| {
        let (i, j) = pairs[row];
        let (k, l) = pairs[col];
        m[(i, k)] * m[(j, l)] - m[(i, l)] * m[(j, k)]
    })
}

/// Local basis transform of the wedge components: the second compounds of
/// `V` and `W` act on the κ index, matching `[ψ] → V [ψ] Wᵀ` member-wise.
pub fn transform_local(
    t: &PreconcurrenceTensor,
    lu: &LocalUnitaryPair,
) -> Result<PreconcurrenceTensor> {
    let dims = t.dims;
    if lu.v().nrows() != dims.d_a() {
        return Err(Error::SizeMismatch {
            expected: dims.d_a(),
            got: lu.v().nrows(),
        });
    }
    if lu.w().nrows() != dims.d_b() {
        return Err(Error::SizeMismatch {
            expected: dims.d_b(),
            got: lu.w().nrows(),
        });
    }
    let pairs_a = ordered_pairs(dims.d_a());
    let pairs_b = ordered_pairs(dims.d_b());
    let comp_v = second_compound(lu.v(), &pairs_a);
    let comp_w = second_compound(lu.w(), &pairs_b);
    let nb = pairs_b.len();

    let old: Vec<DMatrix<C64>> = (0..t.num_wedge).map(|kappa| t.slice(kappa)).collect();
    let mut slices = Vec::with_capacity(t.num_wedge);
    for a_new in 0..pairs_a.len() {
        for b_new in 0..nb {
            let mut acc = DMatrix::<C64>::zeros(t.m, t.m);
            for a_old in 0..pairs_a.len() {
                for b_old in 0..nb {
                    let coeff = comp_v[(a_new, a_old)] * comp_w[(b_new, b_old)];
                    acc += &old[a_old * nb + b_old] * coeff;
                }
            }
            slices.push(acc);
        }
    }
    Ok(PreconcurrenceTensor::from_slices(dims, t.m, slices))
}

/// The Hermitian positive matrix `D^{μν} = Σ_{κ,α} C_κ^{μα} · conj(C_κ^{να})`,
/// the trace of `C C†` over the wedge factor.
#[derive(Debug, Clone)]
pub struct PreconcurrenceGram {
    pub matrix: DMatrix<C64>,
}

/// Contract a preconcurrence tensor to its decomposition-space Gram matrix.
pub fn d_matrix(t: &PreconcurrenceTensor) -> PreconcurrenceGram {
    let m = t.m;
    let matrix = DMatrix::from_fn(m, m, |mu, nu| {
        let mut acc = C64::default();
        for kappa in 0..t.num_wedge {
            for alpha in 0..m {
                acc += t.entry(kappa, mu, alpha) * t.entry(kappa, nu, alpha).conj();
            }
        }
        acc
    });
    PreconcurrenceGram { matrix }
}
