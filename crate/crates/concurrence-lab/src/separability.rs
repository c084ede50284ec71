//! The separability decision at fixed decomposition length, its oracle
//! cross-checks (partial transpose, two-qubit Wootters concurrence), the
//! rank-2 dichotomy classifier, and the random search for two-qubit
//! entanglement inside local 2-dimensional subspaces.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde_json::json;

use crate::biconcurrence::{biconcurrence_operator, diag_trace, DiagObjective};
use crate::concurrence::{preconcurrence, transform_mix};
use crate::linalg;
use crate::optim::{minimize_unitary, OptimConfig};
use crate::states::{
    eig_decomposition, mix, pad, DensityMatrix, Dims, MixingUnitary, RANK_TOL_DEFAULT,
};
use crate::{Error, Result};

/// Base of the m-aware decision threshold: `threshold = 1e-6 / m`. Entangled
/// minima scale like `1/m`, so a fixed absolute threshold would misclassify
/// at large m.
pub const THRESHOLD_BASE: f64 = 1e-6;
/// Width of the inconclusive band, as a multiple of the threshold.
pub const INCONCLUSIVE_BAND: f64 = 10.0;
/// Residual below which a rank-2 state is classified separable.
pub const RANK2_RESIDUAL_THRESHOLD: f64 = 1e-8;
/// Projected states with trace below this are discarded by the witness
/// search.
pub const WITNESS_TRACE_FLOOR: f64 = 1e-8;

/// Outcome of the numerical separability test. Verdicts are explicitly
/// numerical: no certification is claimed either way, and the band between
/// `threshold` and `10 × threshold` stays inconclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    SeparableNumerical,
    EntangledNumerical,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::SeparableNumerical => "separable-numerical",
            Verdict::EntangledNumerical => "entangled-numerical",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// CLI exit-code contract: 0 separable, 1 entangled, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::SeparableNumerical => 0,
            Verdict::EntangledNumerical => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Partial-transpose oracle result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PptResult {
    pub min_eigenvalue: f64,
    pub npt: bool,
}

/// Full report of one separability decision.
#[derive(Debug, Clone)]
pub struct SeparabilityReport {
    pub dims: Dims,
    pub rank: usize,
    pub m: usize,
    pub best_value: f64,
    pub threshold: f64,
    pub verdict: Verdict,
    pub per_start_values: Vec<f64>,
    pub ppt: PptResult,
    /// Wootters concurrence, present exactly when dims are (2, 2).
    pub wootters: Option<f64>,
    /// Accepted objective values of every optimizer start, present when the
    /// config asked for traces. Deterministic at fixed seed.
    pub optimizer_trace: Option<Vec<Vec<f64>>>,
    /// Wall time of the decision. Not serialized: reports must be
    /// reproducible byte for byte at fixed seed.
    pub wall_time_ms: f64,
}

impl SeparabilityReport {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut value = json!({
            "dims": [self.dims.d_a(), self.dims.d_b()],
            "rank": self.rank,
            "m": self.m,
            "best_value": self.best_value,
            "threshold": self.threshold,
            "verdict": self.verdict.as_str(),
            "per_start_values": self.per_start_values,
            "ppt": {
                "min_eigenvalue": self.ppt.min_eigenvalue,
                "npt": self.ppt.npt,
            },
            "wootters": self.wootters,
        });
        if let Some(trace) = &self.optimizer_trace {
            value["optimizer_trace"] = json!(trace);
        }
        value
    }
}

/// Decide separability by minimizing the biconcurrence diagonal trace over
/// mixing unitaries of a length-`m` decomposition.
///
/// `m` defaults to `min(rank², (d_a·d_b)²)`; `threshold` defaults to
/// `1e-6 / m`. The PPT oracle always runs; the Wootters oracle runs at
/// dims (2, 2).
pub fn test_separability(
    rho: &DensityMatrix,
    m: Option<usize>,
    cfg: &OptimConfig,
    threshold: Option<f64>,
) -> Result<SeparabilityReport> {
    let started = std::time::Instant::now();
    let dec = eig_decomposition(rho, RANK_TOL_DEFAULT)?;
    let rank = dec.len();
    let total = rho.dims().total();
    let m = m.unwrap_or_else(|| (rank * rank).min(total * total));
    let padded = pad(&dec, m)?;

    // the operator is built once; its diagonal trace anchors the objective
    let operator = biconcurrence_operator(&padded);
    let objective = DiagObjective::new(&padded);
    let at_identity = objective.evaluate(&MixingUnitary::identity(m))?.value;
    debug_assert!((diag_trace(&operator).value - at_identity).abs() < 1e-10);

    let mut result = minimize_unitary(&objective, cfg)?;
    let threshold = threshold.unwrap_or(THRESHOLD_BASE / m as f64);
    let verdict = if result.best_value < threshold {
        Verdict::SeparableNumerical
    } else if result.best_value >= INCONCLUSIVE_BAND * threshold {
        Verdict::EntangledNumerical
    } else {
        Verdict::Inconclusive
    };

    Ok(SeparabilityReport {
        dims: rho.dims(),
        rank,
        m,
        best_value: result.best_value,
        threshold,
        verdict,
        per_start_values: std::mem::take(&mut result.per_start_values),
        optimizer_trace: result.traces,
        ppt: ppt(rho)?,
        wootters: if rho.dims().d_a() == 2 && rho.dims().d_b() == 2 {
            Some(wootters(rho)?)
        } else {
            None
        },
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Partial transpose on the B subsystem; `npt` when the smallest eigenvalue
/// is below `-1e-10`. Necessary for separability in all dimensions,
/// sufficient only at 2×2 and 2×3.
pub fn ppt(rho: &DensityMatrix) -> Result<PptResult> {
    let pt = linalg::partial_transpose_b(rho.matrix(), rho.dims().d_a(), rho.dims().d_b());
    let (eigenvalues, _) = linalg::hermitian_eigen(&pt)?;
    let min_eigenvalue = eigenvalues.last().copied().unwrap_or(0.0);
    Ok(PptResult {
        min_eigenvalue,
        npt: min_eigenvalue < -1e-10,
    })
}

/// Relative floor under which eigenvalues of the Wootters core matrix are
/// treated as exact zeros. Rank-deficient states produce null-space noise of
/// order machine epsilon there; letting it through the square root would
/// pollute the concurrence at the 1e-8 level.
const WOOTTERS_CORE_FLOOR: f64 = 1e-14;

/// Wootters concurrence of a two-qubit state:
/// `C = max(0, λ₁ − λ₂ − λ₃ − λ₄)` with `λ_i` the descending square roots of
/// the eigenvalues of `ρ · ρ̃`, `ρ̃ = (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`, evaluated
/// through the Hermitian core `√ρ · ρ̃ · √ρ`.
pub fn wootters(rho: &DensityMatrix) -> Result<f64> {
    let dims = rho.dims();
    if dims.d_a() != 2 || dims.d_b() != 2 {
        return Err(Error::WrongDims {
            d_a: dims.d_a(),
            d_b: dims.d_b(),
        });
    }
    let syy = {
        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(0, 3)] = C64::new(-1.0, 0.0);
        m[(1, 2)] = C64::new(1.0, 0.0);
        m[(2, 1)] = C64::new(1.0, 0.0);
        m[(3, 0)] = C64::new(-1.0, 0.0);
        m
    };
    let rho_tilde = &syy * rho.matrix().conjugate() * &syy;

    let (eigenvalues, eigenvectors) = linalg::hermitian_eigen(rho.matrix())?;
    let mut sqrt_diag = DMatrix::<C64>::zeros(4, 4);
    for (k, &lambda) in eigenvalues.iter().enumerate() {
        sqrt_diag[(k, k)] = C64::new(lambda.max(0.0).sqrt(), 0.0);
    }
    let sqrt_rho = &eigenvectors * sqrt_diag * eigenvectors.adjoint();

    let core = &sqrt_rho * rho_tilde * &sqrt_rho;
    let (core_eigs, _) = linalg::hermitian_eigen(&core)?;
    let floor = core_eigs.first().copied().unwrap_or(0.0).max(0.0) * WOOTTERS_CORE_FLOOR;
    let lambdas: Vec<f64> = core_eigs
        .iter()
        .map(|&e| if e > floor { e.sqrt() } else { 0.0 })
        .collect();
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// Rank-2 dichotomy outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank2Class {
    Separable,
    OneCopyPseudoDistillable,
}

impl Rank2Class {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rank2Class::Separable => "separable",
            Rank2Class::OneCopyPseudoDistillable => "one-copy-pseudo-distillable",
        }
    }
}

/// Verdict of [`rank2_classify`].
#[derive(Debug, Clone)]
pub struct Rank2Verdict {
    pub verdict: Rank2Class,
    /// The 2×2 mixing unitary minimizing the diagonal residual.
    pub minimizing_u: MixingUnitary,
    /// Minimized `Σ_μ ‖C^{μμ}‖²`.
    pub residual: f64,
    /// On the separable branch: the `x_κ` of the simultaneous diagonal form
    /// reached after the balanced remixing, one per wedge index.
    pub diagonal_values: Option<Vec<C64>>,
    /// On the separable branch: how far the remixed slices are from the
    /// exact `diag(x_κ, −x_κ)` form.
    pub diag_form_residual: Option<f64>,
}

impl Rank2Verdict {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "verdict": self.verdict.as_str(),
            "residual": self.residual,
            "minimizing_u": matrix_to_json(self.minimizing_u.matrix()),
            "diagonal_values": self.diagonal_values.as_ref().map(|values| {
                values.iter().map(|z| vec![z.re, z.im]).collect::<Vec<_>>()
            }),
            "diag_form_residual": self.diag_form_residual,
        })
    }
}

/// Classify a rank ≤ 2 state as separable or one-copy pseudo-distillable by
/// minimizing the summed diagonal concurrence norm `Σ_μ ‖C^{μμ}‖²` over U(2).
///
/// On the separable branch the minimizing decomposition is remixed by the
/// balanced unitary `[[1, 1], [−1, 1]]/√2`, which must bring every slice to
/// the form `diag(x_κ, −x_κ)`; the `x_κ` are reported.
pub fn rank2_classify(rho: &DensityMatrix, cfg: &OptimConfig) -> Result<Rank2Verdict> {
    let rank = rho.rank(RANK_TOL_DEFAULT)?;
    if rank > 2 {
        return Err(Error::RankTooHigh { rank });
    }
    let dec = pad(&eig_decomposition(rho, RANK_TOL_DEFAULT)?, 2)?;
    let objective = DiagObjective::new(&dec);
    let result = minimize_unitary(&objective, cfg)?;
    // B^{μμμμ} = ½ Σ_κ |C_κ^{μμ}|², so the concurrence-norm residual is
    // twice the biconcurrence objective
    let residual = 2.0 * result.best_value;

    if residual >= RANK2_RESIDUAL_THRESHOLD {
        return Ok(Rank2Verdict {
            verdict: Rank2Class::OneCopyPseudoDistillable,
            minimizing_u: result.best_u,
            residual,
            diagonal_values: None,
            diag_form_residual: None,
        });
    }

    // separable branch: verify the simultaneous diagonal form
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u_q = MixingUnitary::new(DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(s, 0.0),
            C64::new(s, 0.0),
            C64::new(-s, 0.0),
            C64::new(s, 0.0),
        ],
    ))?;
    let minimizing = mix(&dec, &result.best_u)?;
    let tensor = transform_mix(&preconcurrence(&minimizing)?, &u_q)?;
    let mut diagonal_values = Vec::with_capacity(tensor.num_wedge());
    let mut diag_form_residual: f64 = 0.0;
    for kappa in 0..tensor.num_wedge() {
        let slice = tensor.slice(kappa);
        diagonal_values.push(slice[(0, 0)]);
        diag_form_residual = diag_form_residual
            .max(slice[(0, 1)].norm())
            .max(slice[(1, 0)].norm())
            .max((slice[(0, 0)] + slice[(1, 1)]).norm());
    }

    Ok(Rank2Verdict {
        verdict: Rank2Class::Separable,
        minimizing_u: result.best_u,
        residual,
        diagonal_values: Some(diagonal_values),
        diag_form_residual: Some(diag_form_residual),
    })
}

/// Best two-qubit entanglement found inside random local 2-dim subspaces.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub best_concurrence: f64,
    /// `d_a × 2` isometry onto the A-side subspace achieving the best value.
    pub isometry_a: DMatrix<C64>,
    /// `d_b × 2` isometry onto the B-side subspace.
    pub isometry_b: DMatrix<C64>,
    pub samples_used: usize,
}

impl WitnessReport {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "best_concurrence": self.best_concurrence,
            "isometry_a": matrix_to_json(&self.isometry_a),
            "isometry_b": matrix_to_json(&self.isometry_b),
            "samples_used": self.samples_used,
        })
    }
}

fn matrix_to_json(m: &DMatrix<C64>) -> serde_json::Value {
    let rows: Vec<Vec<Vec<f64>>> = (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| vec![m[(r, c)].re, m[(r, c)].im]).collect())
        .collect();
    json!(rows)
}

/// Random search for two-qubit entanglement: sample `budget` Haar-random
/// local isometry pairs `(d_a→2, d_b→2)`, project, renormalize, and evaluate
/// the Wootters concurrence. Deterministic for a fixed seed.
pub fn witness_2q(rho: &DensityMatrix, budget: usize, seed: u64) -> Result<WitnessReport> {
    if budget < 1 {
        return Err(Error::BadParameter {
            family: "witness_2q".into(),
            reason: "budget must be at least 1".into(),
        });
    }
    let dims = rho.dims();
    let mut rng = linalg::seeded_rng(seed);
    let qubit_dims = Dims::new(2, 2)?;
    let mut best_concurrence = 0.0;
    let mut best_pair: Option<(DMatrix<C64>, DMatrix<C64>)> = None;

    for _ in 0..budget {
        let va = linalg::haar_isometry(dims.d_a(), 2, &mut rng);
        let wb = linalg::haar_isometry(dims.d_b(), 2, &mut rng);
        let projector = linalg::kron(&va, &wb);
        let projected = projector.adjoint() * rho.matrix() * &projector;
        let trace = projected.trace().re;
        if trace < WITNESS_TRACE_FLOOR {
            continue;
        }
        let normalized = DensityMatrix::new(qubit_dims, projected.map(|z| z / trace))?;
        let concurrence = wootters(&normalized)?;
        if best_pair.is_none() || concurrence > best_concurrence {
            best_concurrence = concurrence;
            best_pair = Some((va, wb));
        }
    }

    let (isometry_a, isometry_b) = best_pair.unwrap_or_else(|| {
        (
            DMatrix::identity(dims.d_a(), 2),
            DMatrix::identity(dims.d_b(), 2),
        )
    });
    Ok(WitnessReport {
        best_concurrence,
        isometry_a,
        isometry_b,
        samples_used: budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::seeded_rng;
    use crate::states::{generate, random_separable, PureState, StateFamily};

    fn bell_projector() -> DensityMatrix {
        let bell = generate(&StateFamily::Bell { d: 2 })
            .unwrap()
            .as_pure()
            .unwrap()
            .clone();
        DensityMatrix::from_pure(&bell).unwrap()
    }

    fn quick_cfg(seed: u64) -> OptimConfig {
        OptimConfig {
            starts: 4,
            seed,
            ..OptimConfig::default()
        }
    }

    #[test]
    fn ppt_bell_and_maximally_mixed() {
        let result = ppt(&bell_projector()).unwrap();
        assert!((result.min_eigenvalue + 0.5).abs() < 1e-12);
        assert!(result.npt);

        let mixed = generate(&StateFamily::Werner2 { p: 0.0 }).unwrap();
        let result = ppt(mixed.as_density().unwrap()).unwrap();
        assert!((result.min_eigenvalue - 0.25).abs() < 1e-12);
        assert!(!result.npt);
    }

    #[test]
    fn ppt_tiles_is_positive() {
        let tiles = generate(&StateFamily::TilesUpb).unwrap();
        let result = ppt(tiles.as_density().unwrap()).unwrap();
        assert!(result.min_eigenvalue >= -1e-10, "{}", result.min_eigenvalue);
        assert!(!result.npt);
    }

    #[test]
    fn wootters_anchors() {
        assert!((wootters(&bell_projector()).unwrap() - 1.0).abs() < 1e-10);

        let mixed = generate(&StateFamily::Werner2 { p: 0.0 }).unwrap();
        assert!(wootters(mixed.as_density().unwrap()).unwrap() < 1e-12);

        for p in [0.2, 0.5, 1.0] {
            let werner = generate(&StateFamily::Werner2 { p }).unwrap();
            let expected = f64::max(0.0, (3.0 * p - 1.0) / 2.0);
            let got = wootters(werner.as_density().unwrap()).unwrap();
            assert!((got - expected).abs() < 1e-10, "p = {p}: {got} vs {expected}");
        }
    }

    #[test]
    fn wootters_rejects_wrong_dims() {
        let mut rng = seeded_rng(61);
        let rho = crate::states::random_density(Dims::new(2, 3).unwrap(), 2, &mut rng).unwrap();
        assert!(matches!(
            wootters(&rho),
            Err(Error::WrongDims { d_a: 2, d_b: 3 })
        ));
    }

    #[test]
    fn separability_of_manifestly_separable_state() {
        let dims = Dims::new(2, 2).unwrap();
        let mut m = DMatrix::<C64>::zeros(4, 4);
        m[(0, 0)] = C64::new(0.5, 0.0);
        m[(3, 3)] = C64::new(0.5, 0.0);
        let rho = DensityMatrix::new(dims, m).unwrap();
        let report = test_separability(&rho, None, &quick_cfg(0), None).unwrap();
        assert_eq!(report.verdict, Verdict::SeparableNumerical);
        assert!(report.best_value < 1e-8, "best = {}", report.best_value);
        assert!(!report.ppt.npt);
        assert_eq!(report.exit_code(), 0);
    }

    #[test]
    fn separability_of_bell_projector_at_m4() {
        let report =
            test_separability(&bell_projector(), Some(4), &quick_cfg(0), None).unwrap();
        assert_eq!(report.verdict, Verdict::EntangledNumerical);
        assert!(
            (report.best_value - 0.125).abs() < 1e-6,
            "best = {}",
            report.best_value
        );
        assert!(report.ppt.npt);
        assert!((report.ppt.min_eigenvalue + 0.5).abs() < 1e-10);
        assert!((report.wootters.unwrap() - 1.0).abs() < 1e-10);
        assert_eq!(report.exit_code(), 1);
    }

    #[test]
    fn rank2_separable_mixture() {
        // mixture of |00> and |1>(|0>+|1>)/sqrt(2): product decomposition
        // exists by construction
        let dims = Dims::new(2, 2).unwrap();
        let mut a = DMatrix::<C64>::zeros(2, 2);
        a[(0, 0)] = C64::new(1.0, 0.0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut b = DMatrix::<C64>::zeros(2, 2);
        b[(1, 0)] = C64::new(s, 0.0);
        b[(1, 1)] = C64::new(s, 0.0);
        let pa = PureState::new(dims, a).unwrap();
        let pb = PureState::new(dims, b).unwrap();
        let m = pa.projector().scale(0.6) + pb.projector().scale(0.4);
        let rho = DensityMatrix::new(dims, m).unwrap();

        let verdict = rank2_classify(&rho, &quick_cfg(0)).unwrap();
        assert_eq!(verdict.verdict, Rank2Class::Separable);
        assert!(verdict.residual < 1e-8, "residual = {}", verdict.residual);
        assert!(verdict.diag_form_residual.unwrap() < 1e-4);
        // cross-check with the exact 2x2 oracle
        assert!(!ppt(&rho).unwrap().npt);
    }

    #[test]
    fn rank2_entangled_mixture() {
        let dims = Dims::new(2, 2).unwrap();
        let bell = generate(&StateFamily::Bell { d: 2 })
            .unwrap()
            .as_pure()
            .unwrap()
            .clone();
        let mut product = DMatrix::<C64>::zeros(2, 2);
        product[(0, 1)] = C64::new(1.0, 0.0);
        let zero_one = PureState::new(dims, product).unwrap();
        let m = bell.projector().scale(0.5) + zero_one.projector().scale(0.5);
        let rho = DensityMatrix::new(dims, m).unwrap();

        let verdict = rank2_classify(&rho, &quick_cfg(0)).unwrap();
        assert_eq!(verdict.verdict, Rank2Class::OneCopyPseudoDistillable);
        assert!(ppt(&rho).unwrap().npt);
    }

    #[test]
    fn rank2_pure_entangled_projector() {
        let verdict = rank2_classify(&bell_projector(), &quick_cfg(0)).unwrap();
        assert_eq!(verdict.verdict, Rank2Class::OneCopyPseudoDistillable);
    }

    #[test]
    fn rank2_rejects_higher_rank() {
        let mut rng = seeded_rng(62);
        let rho = crate::states::random_density(Dims::new(2, 2).unwrap(), 3, &mut rng).unwrap();
        assert!(matches!(
            rank2_classify(&rho, &quick_cfg(0)),
            Err(Error::RankTooHigh { rank: 3 })
        ));
    }

    #[test]
    fn witness_finds_bell_entanglement_immediately() {
        let report = witness_2q(&bell_projector(), 100, 0).unwrap();
        assert!(
            report.best_concurrence >= 0.99,
            "c = {}",
            report.best_concurrence
        );
        assert!(report.best_concurrence <= 1.0 + 1e-12);
        assert_eq!(report.samples_used, 100);
        assert!(linalg::unitarity_deviation(&report.isometry_a) < 1e-10);
        assert!(linalg::unitarity_deviation(&report.isometry_b) < 1e-10);
    }

    #[test]
    fn witness_stays_low_on_separable_states() {
        let mut rng = seeded_rng(63);
        let (rho, _) = random_separable(Dims::new(3, 3).unwrap(), 5, &mut rng).unwrap();
        let report = witness_2q(&rho, 500, 7).unwrap();
        assert!(
            report.best_concurrence < 1e-6,
            "c = {}",
            report.best_concurrence
        );
    }

    #[test]
    fn witness_is_deterministic() {
        let a = witness_2q(&bell_projector(), 50, 3).unwrap();
        let b = witness_2q(&bell_projector(), 50, 3).unwrap();
        assert_eq!(a.best_concurrence.to_bits(), b.best_concurrence.to_bits());
    }
}
