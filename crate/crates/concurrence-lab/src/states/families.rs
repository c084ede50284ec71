//! Generators for benchmark state families used by tests and the CLI.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;

use super::{Decomposition, DensityMatrix, Dims, PureState};
use crate::linalg;
use crate::{Error, Result};

/// A named state family with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    /// Maximally entangled `Σ_i |ii⟩ / √d` on a `(d, d)` system.
    Bell { d: usize },
    /// The product state `|00⟩`.
    Product { d_a: usize, d_b: usize },
    /// `(|00⟩ + |11⟩)/√2` embedded in a 3×3 system.
    IntroPsi,
    /// `√x · (|00⟩+|11⟩)/√2 + √(1−x) · |22⟩` in a 3×3 system.
    IntroPhi { x: f64 },
    /// Two-qubit Werner state `p |Ψ−⟩⟨Ψ−| + (1−p) I/4`.
    Werner2 { p: f64 },
    /// Isotropic state `F |Φ+⟩⟨Φ+| + (1−F)(I − |Φ+⟩⟨Φ+|)/(d²−1)`.
    Isotropic { d: usize, f: f64 },
    /// Haar-like random pure state (normalized complex Gaussian).
    RandomPure { dims: Dims, seed: u64 },
    /// Random mixed state of prescribed rank, `G G† / Tr` with Gaussian `G`.
    RandomDensity { dims: Dims, rank: usize, seed: u64 },
    /// Explicit convex mixture of random product states; the product
    /// decomposition is retained as a separability certificate.
    RandomSeparable { dims: Dims, terms: usize, seed: u64 },
    /// The 3×3 PPT-entangled state built from the "tiles" unextendible
    /// product basis: `(I − Σ_k |v_k⟩⟨v_k|)/4`.
    TilesUpb,
}

/// Output of [`generate`]: a pure state, a density matrix, or a density
/// matrix together with its product-decomposition certificate.
#[derive(Debug, Clone)]
pub enum Generated {
    Pure(PureState),
    Density(DensityMatrix),
    SeparableDensity {
        rho: DensityMatrix,
        certificate: Decomposition,
    },
}

impl Generated {
    pub fn as_pure(&self) -> Option<&PureState> {
        match self {
            Generated::Pure(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_density(&self) -> Option<&DensityMatrix> {
        match self {
            Generated::Density(rho) => Some(rho),
            Generated::SeparableDensity { rho, .. } => Some(rho),
            Generated::Pure(_) => None,
        }
    }

    /// The state as a density matrix, projecting pure states.
    pub fn into_density(self) -> Result<DensityMatrix> {
        match self {
            Generated::Pure(p) => DensityMatrix::from_pure(&p.normalize()?),
            Generated::Density(rho) => Ok(rho),
            Generated::SeparableDensity { rho, .. } => Ok(rho),
        }
    }
}

fn bad(family: &str, reason: impl Into<String>) -> Error {
    Error::BadParameter {
        family: family.into(),
        reason: reason.into(),
    }
}

/// Build a member of a state family.
pub fn generate(family: &StateFamily) -> Result<Generated> {
    match family {
        StateFamily::Bell { d } => {
            let dims = Dims::new(*d, *d)?;
            let amp = C64::new(1.0 / (*d as f64).sqrt(), 0.0);
            let coeffs = DMatrix::from_fn(*d, *d, |i, j| if i == j { amp } else { C64::default() });
            Ok(Generated::Pure(PureState::new(dims, coeffs)?))
        }
        StateFamily::Product { d_a, d_b } => {
            let dims = Dims::new(*d_a, *d_b)?;
            let mut coeffs = DMatrix::<C64>::zeros(*d_a, *d_b);
            coeffs[(0, 0)] = C64::new(1.0, 0.0);
            Ok(Generated::Pure(PureState::new(dims, coeffs)?))
        }
        StateFamily::IntroPsi => {
            let dims = Dims::new(3, 3)?;
            let amp = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            let mut coeffs = DMatrix::<C64>::zeros(3, 3);
            coeffs[(0, 0)] = amp;
            coeffs[(1, 1)] = amp;
            Ok(Generated::Pure(PureState::new(dims, coeffs)?))
        }
        StateFamily::IntroPhi { x } => {
            if !(0.0..=1.0).contains(x) {
                return Err(bad("intro_phi", format!("x = {x} outside [0, 1]")));
            }
            let dims = Dims::new(3, 3)?;
            let mut coeffs = DMatrix::<C64>::zeros(3, 3);
            let a = (x / 2.0).sqrt();
            coeffs[(0, 0)] = C64::new(a, 0.0);
            coeffs[(1, 1)] = C64::new(a, 0.0);
            coeffs[(2, 2)] = C64::new((1.0 - x).sqrt(), 0.0);
            Ok(Generated::Pure(PureState::new(dims, coeffs)?))
        }
        StateFamily::Werner2 { p } => {
            if !(0.0..=1.0).contains(p) {
                return Err(bad("werner2", format!("p = {p} outside [0, 1]")));
            }
            let dims = Dims::new(2, 2)?;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            let mut psi_minus = DVector::<C64>::zeros(4);
            psi_minus[1] = C64::new(s, 0.0);
            psi_minus[2] = C64::new(-s, 0.0);
            let proj = DMatrix::from_fn(4, 4, |r, c| psi_minus[r] * psi_minus[c].conj());
            let matrix = proj.scale(*p) + DMatrix::identity(4, 4).scale((1.0 - p) / 4.0);
            Ok(Generated::Density(DensityMatrix::new(dims, matrix)?))
        }
        StateFamily::Isotropic { d, f } => {
            if !(0.0..=1.0).contains(f) {
                return Err(bad("isotropic", format!("F = {f} outside [0, 1]")));
            }
            let dims = Dims::new(*d, *d)?;
            let n = d * d;
            let amp = 1.0 / (*d as f64).sqrt();
            let phi_plus =
                DVector::<C64>::from_fn(n, |k, _| {
                    if k / d == k % d {
                        C64::new(amp, 0.0)
                    } else {
                        C64::default()
                    }
                });
            let proj = DMatrix::from_fn(n, n, |r, c| phi_plus[r] * phi_plus[c].conj());
            let rest = (DMatrix::identity(n, n) - &proj).scale((1.0 - f) / ((n - 1) as f64));
            Ok(Generated::Density(DensityMatrix::new(
                dims,
                proj.scale(*f) + rest,
            )?))
        }
        StateFamily::RandomPure { dims, seed } => {
            let mut rng = linalg::seeded_rng(*seed);
            Ok(Generated::Pure(random_pure(*dims, &mut rng)?))
        }
        StateFamily::RandomDensity { dims, rank, seed } => {
            let n = dims.total();
            if *rank < 1 || *rank > n {
                return Err(bad("random_density", format!("rank = {rank} outside 1..={n}")));
            }
            let mut rng = linalg::seeded_rng(*seed);
            Ok(Generated::Density(random_density(*dims, *rank, &mut rng)?))
        }
        StateFamily::RandomSeparable { dims, terms, seed } => {
            if *terms < 1 {
                return Err(bad("random_separable", "terms must be at least 1"));
            }
            let mut rng = linalg::seeded_rng(*seed);
            let (rho, certificate) = random_separable(*dims, *terms, &mut rng)?;
            Ok(Generated::SeparableDensity { rho, certificate })
        }
        StateFamily::TilesUpb => tiles_upb(),
    }
}

/// Random pure state: normalized complex Gaussian coefficients.
pub fn random_pure<R: Rng + ?Sized>(dims: Dims, rng: &mut R) -> Result<PureState> {
    let g = linalg::complex_gaussian(dims.d_a(), dims.d_b(), rng);
    let norm = g.norm();
    PureState::new(dims, g.map(|z| z / norm))
}

/// Random density matrix of prescribed rank: `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(
    dims: Dims,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let n = dims.total();
    let g = linalg::complex_gaussian(n, rank, rng);
    let gram = &g * g.adjoint();
    let trace = gram.trace().re;
    DensityMatrix::new(dims, gram.map(|z| z / trace))
}

/// Random separable state as an explicit convex mixture of product states.
/// Returns the state together with the weighted product decomposition that
/// certifies separability.
pub fn random_separable<R: Rng + ?Sized>(
    dims: Dims,
    terms: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, Decomposition)> {
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let mut members = Vec::with_capacity(terms);
    for &w in &weights {
        let a = linalg::complex_gaussian(dims.d_a(), 1, rng);
        let b = linalg::complex_gaussian(dims.d_b(), 1, rng);
        let a = a.map(|z| z / a.norm());
        let b = b.map(|z| z / b.norm());
        let coeffs =
            DMatrix::from_fn(dims.d_a(), dims.d_b(), |i, j| a[(i, 0)] * b[(j, 0)])
                .scale(w.sqrt());
        members.push(PureState::new(dims, coeffs)?);
    }
    let certificate = Decomposition::new(dims, members)?;
    let rho = DensityMatrix::new(dims, certificate.reconstruction())?;
    Ok((rho, certificate))
}

fn tiles_upb() -> Result<Generated> {
    let dims = Dims::new(3, 3)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // the five "tiles" product vectors, as (a, b) factor pairs
    let third: f64 = 1.0 / 3.0;
    let tiles: [(Vec<f64>, Vec<f64>); 5] = [
        (vec![1.0, 0.0, 0.0], vec![s, -s, 0.0]),
        (vec![0.0, 0.0, 1.0], vec![0.0, s, -s]),
        (vec![s, -s, 0.0], vec![0.0, 0.0, 1.0]),
        (vec![0.0, s, -s], vec![1.0, 0.0, 0.0]),
        (
            vec![third.sqrt(), third.sqrt(), third.sqrt()],
            vec![third.sqrt(), third.sqrt(), third.sqrt()],
        ),
    ];
    let mut sum = DMatrix::<C64>::zeros(9, 9);
    for (a, b) in &tiles {
        let v = DVector::<C64>::from_fn(9, |k, _| C64::new(a[k / 3] * b[k % 3], 0.0));
        sum += DMatrix::from_fn(9, 9, |r, c| v[r] * v[c].conj());
    }
    let matrix = (DMatrix::identity(9, 9) - sum).scale(0.25);
    Ok(Generated::Density(DensityMatrix::new(dims, matrix)?))
}
