//! Dense complex linear algebra helpers shared across the crate.
//!
//! Everything here operates on `nalgebra::DMatrix<Complex64>`. Dimensions are
//! capped small throughout the crate, so dense algorithms are always adequate.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Max absolute entry of a complex matrix.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max absolute entry of `A - B`.
pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Max absolute entry of `A - A^H`. Zero iff Hermitian.
pub fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let adj = m.adjoint();
    max_abs_diff(m, &adj)
}

/// Max absolute entry of `U^H U - I`. Zero iff the columns are orthonormal.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    let gram = u.adjoint() * u;
    let eye = DMatrix::<C64>::identity(u.ncols(), u.ncols());
    max_abs_diff(&gram, &eye)
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues descending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors in columns, ordered
/// to match. The input is Hermitized as `(A + A^H)/2` first so that tiny
/// asymmetries from upstream arithmetic cannot poison the solver.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let herm = (m + m.adjoint()).scale(0.5);
    let eig = herm.symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .ok_or(())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::ComputationFailed(
            "eigensolver returned non-finite eigenvalues".into(),
        ));
    }
    let mut vectors = DMatrix::<C64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Singular value decomposition with *square* unitary factors.
///
/// Returns `(u, sigma, v)` with `u` (rows × rows) and `v` (cols × cols)
/// unitary and `sigma` of length `min(rows, cols)`, descending, such that
/// `A = u · diag(sigma) · v^H` (with the rectangular diagonal embedding).
pub fn svd_square(a: &DMatrix<C64>) -> Result<(DMatrix<C64>, Vec<f64>, DMatrix<C64>)> {
    let (rows, cols) = a.shape();
    let svd = a.clone().svd(true, true);
    let u_thin = svd
        .u
        .ok_or_else(|| Error::ComputationFailed("SVD produced no left factor".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::ComputationFailed("SVD produced no right factor".into()))?;
    let k = svd.singular_values.len();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| {
        svd.singular_values[y]
            .partial_cmp(&svd.singular_values[x])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    if sigma.iter().any(|s| !s.is_finite()) {
        return Err(Error::ComputationFailed(
            "SVD returned non-finite singular values".into(),
        ));
    }

    let mut u_sorted = DMatrix::<C64>::zeros(rows, k);
    let mut v_sorted = DMatrix::<C64>::zeros(cols, k);
    for (dst, &src) in order.iter().enumerate() {
        u_sorted.set_column(dst, &u_thin.column(src));
        v_sorted.set_column(dst, &v_t.row(src).adjoint().column(0).into_owned().column(0));
    }

    Ok((
        complete_unitary(&u_sorted),
        sigma,
        complete_unitary(&v_sorted),
    ))
}

/// Extend a matrix with orthonormal columns to a full square unitary.
///
/// Columns already present are kept verbatim; the complement is filled by
/// Gram-Schmidt over the standard basis, always picking the candidate with the
/// largest residual for stability.
pub fn complete_unitary(thin: &DMatrix<C64>) -> DMatrix<C64> {
    let (n, r) = thin.shape();
    assert!(r <= n, "cannot complete a matrix with more columns than rows");
    let mut full = DMatrix::<C64>::zeros(n, n);
    full.view_mut((0, 0), (n, r)).copy_from(thin);
    for col in r..n {
        // residuals of every standard basis vector against the current columns
        let mut best: Option<(usize, f64)> = None;
        for cand in 0..n {
            let mut v = DMatrix::<C64>::zeros(n, 1);
            v[(cand, 0)] = C64::new(1.0, 0.0);
            for j in 0..col {
                let overlap = full.column(j).dotc(&v.column(0));
                let basis = full.column(j).into_owned();
                v.column_mut(0).axpy(-overlap, &basis, C64::new(1.0, 0.0));
            }
            let norm = v.column(0).norm();
            if best.is_none_or(|(_, b)| norm > b) {
                best = Some((cand, norm));
            }
        }
        let (cand, _) = best.expect("nonzero dimension");
        let mut v = DMatrix::<C64>::zeros(n, 1);
        v[(cand, 0)] = C64::new(1.0, 0.0);
        // re-orthogonalize twice for numerical safety
        for _ in 0..2 {
            for j in 0..col {
                let overlap = full.column(j).dotc(&v.column(0));
                let basis = full.column(j).into_owned();
                v.column_mut(0).axpy(-overlap, &basis, C64::new(1.0, 0.0));
            }
        }
        let norm = v.column(0).norm();
        v /= C64::new(norm, 0.0);
        full.set_column(col, &v.column(0));
    }
    full
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    a.kronecker(b)
}

/// Matrix exponential of an anti-Hermitian matrix, via the Hermitian
/// eigendecomposition of `-iA`. The result is unitary by construction.
pub fn exp_antihermitian(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let n = a.nrows();
    let i = C64::new(0.0, 1.0);
    // H = -i A is Hermitian when A is anti-Hermitian
    let h = a.map(|z| -i * z);
    let (values, vectors) = hermitian_eigen(&h)?;
    let mut phases = DMatrix::<C64>::zeros(n, n);
    for (k, &lambda) in values.iter().enumerate() {
        phases[(k, k)] = (i * C64::new(lambda, 0.0)).exp();
    }
    Ok(&vectors * phases * vectors.adjoint())
}

/// Sample a matrix of iid standard complex Gaussian entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * inv_sqrt2, im * inv_sqrt2)
    })
}

/// Haar-distributed random unitary: QR of a complex Gaussian matrix with the
/// diagonal of R phase-fixed so the distribution is exactly Haar.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let g = complex_gaussian(n, n, rng);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let col = q.column(k).into_owned() * phase;
        q.set_column(k, &col.column(0));
    }
    q
}

/// Haar-distributed isometry: the first `cols` columns of a Haar unitary.
pub fn haar_isometry<R: Rng + ?Sized>(n: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    assert!(cols <= n);
    haar_unitary(n, rng).columns(0, cols).into_owned()
}

/// Project a near-unitary matrix back onto the unitary group.
///
/// QR with phase-fixed diagonal; for inputs already close to unitary this is a
/// small correction that keeps the result near the input.
pub fn project_unitary(u: &DMatrix<C64>) -> DMatrix<C64> {
    let n = u.nrows();
    let qr = u.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let col = q.column(k).into_owned() * phase;
        q.set_column(k, &col.column(0));
    }
    q
}

/// Partial trace over the second (B) factor of an operator on `A ⊗ B`,
/// with the composite index `i·d_b + j`.
pub fn partial_trace_b(m: &DMatrix<C64>, d_a: usize, d_b: usize) -> DMatrix<C64> {
    debug_assert_eq!(m.nrows(), d_a * d_b);
    DMatrix::from_fn(d_a, d_a, |i, ip| {
        (0..d_b).map(|j| m[(i * d_b + j, ip * d_b + j)]).sum()
    })
}

/// Partial trace over the first (A) factor.
pub fn partial_trace_a(m: &DMatrix<C64>, d_a: usize, d_b: usize) -> DMatrix<C64> {
    debug_assert_eq!(m.nrows(), d_a * d_b);
    DMatrix::from_fn(d_b, d_b, |j, jp| {
        (0..d_a).map(|i| m[(i * d_b + j, i * d_b + jp)]).sum()
    })
}

/// Partial transpose on the second (B) factor.
pub fn partial_transpose_b(m: &DMatrix<C64>, d_a: usize, d_b: usize) -> DMatrix<C64> {
    debug_assert_eq!(m.nrows(), d_a * d_b);
    DMatrix::from_fn(d_a * d_b, d_a * d_b, |row, col| {
        let (i, j) = (row / d_b, row % d_b);
        let (ip, jp) = (col / d_b, col % d_b);
        m[(i * d_b + jp, ip * d_b + j)]
    })
}

/// Deterministic RNG used everywhere randomness is needed.
pub fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
