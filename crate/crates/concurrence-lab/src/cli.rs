//! Command-line front end: state file I/O, command dispatch, and text/JSON
//! report emission.
//!
//! Exit codes: separability verdicts map to 0 (separable), 1 (entangled),
//! 2 (inconclusive); usage errors exit 64, file/schema errors 65, and
//! computation failures 70.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::biconcurrence::{biconcurrence_operator, diag_trace};
use crate::concurrence::{concurrence_matrix, concurrence_norm, k_minors, preconcurrence};
use crate::io::{self, ParsedState};
use crate::optim::OptimConfig;
use crate::separability::{ppt, rank2_classify, test_separability, witness_2q, Rank2Class};
use crate::states::{
    self, eig_decomposition, entanglement_entropy, pad, schmidt, Decomposition, Dims,
    StateFamily, RANK_TOL_DEFAULT,
};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SCHEMA: i32 = 65;
pub const EXIT_COMPUTE: i32 = 70;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "concurrence-lab",
    version,
    about = "Generalized concurrence objects and numerical separability tests for bipartite states"
)]
struct Cli {
    /// Report format on standard output.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Seed for every randomized computation.
    #[arg(long, global = true, env = "CONCURRENCE_LAB_SEED", default_value_t = 0)]
    seed: u64,

    /// Worker threads for optimizer starts; 1 keeps everything sequential.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a state from a named family and write it as a state file.
    #[command(name = "gen")]
    Gen {
        /// Family name: bell, product, intro_psi, intro_phi, werner2,
        /// isotropic, random_pure, random_density, random_separable,
        /// tiles_upb.
        #[arg(long)]
        family: String,
        /// Family parameter as key=value (repeatable), e.g. --param d=3.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Output state file.
        #[arg(long)]
        out: PathBuf,
    },

    /// Schmidt spectrum, entropy, concurrence matrix, and k-minor norms of a
    /// pure state.
    #[command(name = "pure-analyze")]
    PureAnalyze { file: PathBuf },

    /// Preconcurrence tensor of a decomposition of the state.
    #[command(name = "preconcurrence")]
    Preconcurrence {
        file: PathBuf,
        /// Pad the decomposition to this many members.
        #[arg(long)]
        m: Option<usize>,
    },

    /// Biconcurrence operator summary (diagonal trace at identity, minimum
    /// eigenvalue, Hermiticity residual).
    #[command(name = "biconc")]
    Biconc {
        file: PathBuf,
        /// Pad the decomposition to this many members.
        #[arg(long)]
        m: Option<usize>,
        /// Also list every operator entry with its index labels.
        #[arg(long)]
        full: bool,
    },

    /// Decide separability by minimizing the biconcurrence diagonal trace.
    #[command(name = "separability")]
    Separability {
        file: PathBuf,
        /// Decomposition length (default min(rank², (d_a·d_b)²)).
        #[arg(long)]
        m: Option<usize>,
        /// Optimizer multistart count (default 8).
        #[arg(long)]
        starts: Option<usize>,
        /// Decision threshold (default 1e-6/m).
        #[arg(long)]
        threshold: Option<f64>,
        /// Record and emit the per-start optimizer value sequences as JSON.
        #[arg(long)]
        verbose: bool,
    },

    /// Classify a rank-2 state as separable or one-copy pseudo-distillable.
    #[command(name = "rank2")]
    Rank2 {
        file: PathBuf,
        /// Optimizer multistart count (default 8).
        #[arg(long)]
        starts: Option<usize>,
    },

    /// Search random local 2-dim subspaces for two-qubit entanglement.
    #[command(name = "witness2q")]
    Witness2q {
        file: PathBuf,
        /// Number of random isometry pairs to sample.
        #[arg(long)]
        budget: usize,
    },

    /// Partial-transpose oracle: minimum eigenvalue of the partial transpose.
    #[command(name = "oracle-ppt")]
    OraclePpt { file: PathBuf },

    /// Wootters concurrence oracle (two-qubit states only).
    #[command(name = "oracle-wootters")]
    OracleWootters { file: PathBuf },
}

struct Failure {
    code: i32,
    message: String,
}

type CliResult<T> = std::result::Result<T, Failure>;

fn fail(code: i32, error: impl std::fmt::Display) -> Failure {
    Failure {
        code,
        message: error.to_string(),
    }
}

trait Phase<T> {
    fn or_exit(self, code: i32) -> CliResult<T>;
}

impl<T> Phase<T> for crate::Result<T> {
    fn or_exit(self, code: i32) -> CliResult<T> {
        self.map_err(|e| fail(code, e))
    }
}

/// Run the CLI and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    }
}

/// 12-significant-digit rendering used by text reports.
fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

fn emit(format: Format, text: String, value: serde_json::Value) {
    match format {
        Format::Text => println!("{text}"),
        Format::Json => println!("{}", io::to_json_string_full(&value)),
    }
}

fn load(path: &Path) -> CliResult<ParsedState> {
    io::parse_state_file(path).or_exit(EXIT_SCHEMA)
}

fn load_density(path: &Path) -> CliResult<crate::states::DensityMatrix> {
    load(path)?.to_density().or_exit(EXIT_SCHEMA)
}

/// Decomposition of a parsed state: pure states become their own single
/// member; density matrices are eigendecomposed.
fn decompose(state: &ParsedState, m: Option<usize>) -> CliResult<Decomposition> {
    let dec = match state {
        ParsedState::Pure(p) => {
            let normalized = p.normalize().or_exit(EXIT_SCHEMA)?;
            Decomposition::new(p.dims(), vec![normalized]).or_exit(EXIT_COMPUTE)?
        }
        ParsedState::Density(rho) => {
            eig_decomposition(rho, RANK_TOL_DEFAULT).or_exit(EXIT_COMPUTE)?
        }
    };
    match m {
        Some(m) => pad(&dec, m).or_exit(EXIT_USAGE),
        None => Ok(dec),
    }
}

fn execute(cli: Cli) -> CliResult<i32> {
    let format = cli.format;
    let seed = cli.seed;
    let threads = cli.threads;
    match cli.command {
        Command::Gen { family, params, out } => gen(format, seed, &family, &params, &out),
        Command::PureAnalyze { file } => pure_analyze(format, &file),
        Command::Preconcurrence { file, m } => preconcurrence_cmd(format, &file, m),
        Command::Biconc { file, m, full } => biconc(format, &file, m, full),
        Command::Separability {
            file,
            m,
            starts,
            threshold,
            verbose,
        } => separability(format, seed, threads, &file, m, starts, threshold, verbose),
        Command::Rank2 { file, starts } => rank2(format, seed, threads, &file, starts),
        Command::Witness2q { file, budget } => witness2q(format, seed, &file, budget),
        Command::OraclePpt { file } => oracle_ppt(format, &file),
        Command::OracleWootters { file } => oracle_wootters(format, &file),
    }
}

// ---------------------------------------------------------------------------
// gen

struct Params {
    family: String,
    map: BTreeMap<String, String>,
}

impl Params {
    fn parse(family: &str, raw: &[String]) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        for item in raw {
            let (key, value) = item.split_once('=').ok_or_else(|| {
                fail(EXIT_USAGE, format!("--param `{item}` is not of the form key=value"))
            })?;
            map.insert(key.to_string(), value.to_string());
        }
        Ok(Self {
            family: family.to_string(),
            map,
        })
    }

    fn take<V: std::str::FromStr>(&mut self, key: &str, default: V) -> CliResult<V> {
        match self.map.remove(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                fail(
                    EXIT_USAGE,
                    format!("family `{}`: parameter `{key}`: cannot parse `{raw}`", self.family),
                )
            }),
        }
    }

    fn require<V: std::str::FromStr>(&mut self, key: &str) -> CliResult<V> {
        let raw = self.map.remove(key).ok_or_else(|| {
            fail(
                EXIT_USAGE,
                format!("family `{}` requires --param {key}=<value>", self.family),
            )
        })?;
        raw.parse().map_err(|_| {
            fail(
                EXIT_USAGE,
                format!("family `{}`: parameter `{key}`: cannot parse `{raw}`", self.family),
            )
        })
    }

    fn finish(self) -> CliResult<()> {
        if let Some(key) = self.map.keys().next() {
            return Err(fail(
                EXIT_USAGE,
                format!("family `{}` does not take parameter `{key}`", self.family),
            ));
        }
        Ok(())
    }
}

fn parse_family(name: &str, raw: &[String], default_seed: u64) -> CliResult<StateFamily> {
    let mut p = Params::parse(name, raw)?;
    let dims = |p: &mut Params| -> CliResult<Dims> {
        let d_a = p.take("da", 2usize)?;
        let d_b = p.take("db", 2usize)?;
        Dims::new(d_a, d_b).or_exit(EXIT_USAGE)
    };
    let family = match name {
        "bell" => StateFamily::Bell {
            d: p.take("d", 2usize)?,
        },
        "product" => StateFamily::Product {
            d_a: p.take("da", 2usize)?,
            d_b: p.take("db", 2usize)?,
        },
        "intro_psi" => StateFamily::IntroPsi,
        "intro_phi" => StateFamily::IntroPhi {
            x: p.take("x", 0.2271f64)?,
        },
        "werner2" => StateFamily::Werner2 {
            p: p.require("p")?,
        },
        "isotropic" => StateFamily::Isotropic {
            d: p.take("d", 2usize)?,
            f: p.require("f")?,
        },
        "random_pure" => StateFamily::RandomPure {
            dims: dims(&mut p)?,
            seed: p.take("seed", default_seed)?,
        },
        "random_density" => {
            let dims = dims(&mut p)?;
            StateFamily::RandomDensity {
                dims,
                rank: p.take("rank", dims.total())?,
                seed: p.take("seed", default_seed)?,
            }
        }
        "random_separable" => StateFamily::RandomSeparable {
            dims: dims(&mut p)?,
            terms: p.take("terms", 4usize)?,
            seed: p.take("seed", default_seed)?,
        },
        "tiles_upb" => StateFamily::TilesUpb,
        other => {
            return Err(fail(
                EXIT_USAGE,
                format!(
                    "unknown family `{other}`; expected one of bell, product, intro_psi, \
                     intro_phi, werner2, isotropic, random_pure, random_density, \
                     random_separable, tiles_upb"
                ),
            ))
        }
    };
    p.finish()?;
    Ok(family)
}

fn gen(format: Format, seed: u64, family: &str, params: &[String], out: &Path) -> CliResult<i32> {
    let family = parse_family(family, params, seed)?;
    let generated = states::generate(&family).or_exit(EXIT_USAGE)?;
    let state = match generated {
        states::Generated::Pure(p) => ParsedState::Pure(p),
        states::Generated::Density(rho) => ParsedState::Density(rho),
        states::Generated::SeparableDensity { rho, .. } => ParsedState::Density(rho),
    };
    io::write_state_file(out, &state).or_exit(EXIT_SCHEMA)?;
    let dims = state.dims();
    emit(
        format,
        format!(
            "wrote {} state of dims ({}, {}) to {}",
            state.kind(),
            dims.d_a(),
            dims.d_b(),
            out.display()
        ),
        json!({
            "written": out.display().to_string(),
            "kind": state.kind(),
            "dims": [dims.d_a(), dims.d_b()],
        }),
    );
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// pure-analyze

fn pure_analyze(format: Format, file: &Path) -> CliResult<i32> {
    let state = match load(file)? {
        ParsedState::Pure(p) => p,
        ParsedState::Density(_) => {
            return Err(fail(
                EXIT_SCHEMA,
                format!("{}: pure-analyze requires a pure state file", file.display()),
            ))
        }
    };
    let norm = state.norm();
    let normalized = state.normalize().or_exit(EXIT_SCHEMA)?;
    let dec = schmidt(&normalized, RANK_TOL_DEFAULT).or_exit(EXIT_COMPUTE)?;
    let entropy = entanglement_entropy(&normalized).or_exit(EXIT_COMPUTE)?;
    let c = concurrence_matrix(&normalized).or_exit(EXIT_COMPUTE)?;
    let c_norm = concurrence_norm(&c);
    let max_k = normalized.dims().d_a().min(normalized.dims().d_b());
    let mut minor_norms = Vec::new();
    for k in 2..=max_k {
        let tensor = k_minors(&normalized, k).or_exit(EXIT_COMPUTE)?;
        minor_norms.push((k, tensor.norm_sq()));
    }

    let dims = normalized.dims();
    let mut text = String::new();
    text += &format!("dims: ({}, {})\n", dims.d_a(), dims.d_b());
    text += &format!("input norm: {}\n", sig12(norm));
    text += &format!(
        "schmidt values: [{}]\n",
        dec.singular_values
            .iter()
            .map(|s| sig12(*s))
            .collect::<Vec<_>>()
            .join(", ")
    );
    text += &format!("schmidt rank: {}\n", dec.rank);
    text += &format!("entanglement entropy (bits): {}\n", sig12(entropy));
    text += &format!(
        "concurrence |C|^2: {}  |C|: {}\n",
        sig12(c_norm.norm_sq),
        sig12(c_norm.norm)
    );
    text += "concurrence matrix entries:\n";
    for (w, entry) in c.wedge_indices().iter().zip(c.entries()) {
        text += &format!("  {} : {} + {}i\n", w, sig12(entry.re), sig12(entry.im));
    }
    for (k, norm_sq) in &minor_norms {
        text += &format!("k-minor norm^2 (k={k}): {}\n", sig12(*norm_sq));
    }
    text.pop();

    let value = json!({
        "dims": [dims.d_a(), dims.d_b()],
        "input_norm": norm,
        "schmidt_values": dec.singular_values,
        "schmidt_rank": dec.rank,
        "entropy_bits": entropy,
        "concurrence_norm_sq": c_norm.norm_sq,
        "concurrence_norm": c_norm.norm,
        "concurrence_entries": c.wedge_indices().iter().zip(c.entries()).map(|(w, e)| json!({
            "kappa": {"a": [w.a_pair.0, w.a_pair.1], "b": [w.b_pair.0, w.b_pair.1]},
            "value": [e.re, e.im],
        })).collect::<Vec<_>>(),
        "k_minor_norms_sq": minor_norms
            .iter()
            .map(|(k, n)| json!({"k": k, "norm_sq": n}))
            .collect::<Vec<_>>(),
    });
    emit(format, text, value);
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// preconcurrence

fn preconcurrence_cmd(format: Format, file: &Path, m: Option<usize>) -> CliResult<i32> {
    let state = load(file)?;
    let dec = decompose(&state, m)?;
    let tensor = preconcurrence(&dec).or_exit(EXIT_COMPUTE)?;
    let wedges = tensor.wedge_indices();

    let mut text = format!(
        "dims: ({}, {})\nm: {}\nwedge indices: {}\nentries (kappa, mu, nu):\n",
        tensor.dims().d_a(),
        tensor.dims().d_b(),
        tensor.m(),
        tensor.num_wedge()
    );
    let mut entries = Vec::new();
    for (kappa, w) in wedges.iter().enumerate() {
        for mu in 0..tensor.m() {
            for nu in 0..tensor.m() {
                let z = tensor.entry(kappa, mu, nu);
                text += &format!(
                    "  {} mu={mu} nu={nu} : {} + {}i\n",
                    w,
                    sig12(z.re),
                    sig12(z.im)
                );
                entries.push(json!({
                    "kappa": {"a": [w.a_pair.0, w.a_pair.1], "b": [w.b_pair.0, w.b_pair.1]},
                    "mu": mu,
                    "nu": nu,
                    "value": [z.re, z.im],
                }));
            }
        }
    }
    text.pop();

    let value = json!({
        "dims": [tensor.dims().d_a(), tensor.dims().d_b()],
        "m": tensor.m(),
        "num_wedge": tensor.num_wedge(),
        "entries": entries,
    });
    emit(format, text, value);
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// biconc

fn biconc(format: Format, file: &Path, m: Option<usize>, full: bool) -> CliResult<i32> {
    let state = load(file)?;
    let dec = decompose(&state, m)?;
    let operator = biconcurrence_operator(&dec);
    let dt = diag_trace(&operator);
    let min_eig = operator.min_eigenvalue().or_exit(EXIT_COMPUTE)?;
    let herm = operator.hermiticity_residual();

    let mut text = format!(
        "m: {}\ndiag trace at identity: {}\nper-member: [{}]\nmin eigenvalue: {}\nhermiticity residual: {}",
        operator.m(),
        sig12(dt.value),
        dt.per_member
            .iter()
            .map(|v| sig12(*v))
            .collect::<Vec<_>>()
            .join(", "),
        sig12(min_eig),
        sig12(herm),
    );
    let mut entries = Vec::new();
    if full {
        text += "\nentries (mu, nu, m, n):";
        let m = operator.m();
        for mu in 0..m {
            for nu in 0..m {
                for mm in 0..m {
                    for n in 0..m {
                        let z = operator.entry(mu, nu, mm, n);
                        text += &format!(
                            "\n  mu={mu} nu={nu} m={mm} n={n} : {} + {}i",
                            sig12(z.re),
                            sig12(z.im)
                        );
                        entries.push(json!({
                            "mu": mu, "nu": nu, "m": mm, "n": n,
                            "value": [z.re, z.im],
                        }));
                    }
                }
            }
        }
    }

    let mut value = json!({
        "m": operator.m(),
        "diag_trace_identity": dt.value,
        "per_member": dt.per_member,
        "min_eigenvalue": min_eig,
        "hermiticity_residual": herm,
    });
    if full {
        value["entries"] = json!(entries);
    }
    emit(format, text, value);
    Ok(EXIT_OK)
}

// ---------------------------------------------------------------------------
// separability / rank2 / witness2q / oracles

fn optim_config(seed: u64, threads: usize, starts: Option<usize>) -> OptimConfig {
    OptimConfig {
        starts: starts.unwrap_or(OptimConfig::default().starts),
        seed,
        threads,
        ..OptimConfig::default()
    }
}

#[allow(clippy::too_many_arguments)]
fn separability(
    format: Format,
    seed: u64,
    threads: usize,
    file: &Path,
    m: Option<usize>,
    starts: Option<usize>,
    threshold: Option<f64>,
    verbose: bool,
) -> CliResult<i32> {
    let rho = load_density(file)?;
    let mut cfg = optim_config(seed, threads, starts);
    cfg.record_trace = verbose;
    let report = test_separability(&rho, m, &cfg, threshold).or_exit(EXIT_COMPUTE)?;

    let mut text = format!(
        "dims: ({}, {})\nrank: {}\nm: {}\nbest value: {}\nthreshold: {}\nverdict: {}\nper-start: [{}]\nppt min eigenvalue: {} (npt: {})\nwootters concurrence: {}",
        report.dims.d_a(),
        report.dims.d_b(),
        report.rank,
        report.m,
        sig12(report.best_value),
        sig12(report.threshold),
        report.verdict,
        report
            .per_start_values
            .iter()
            .map(|v| sig12(*v))
            .collect::<Vec<_>>()
            .join(", "),
        sig12(report.ppt.min_eigenvalue),
        report.ppt.npt,
        report
            .wootters
            .map(sig12)
            .unwrap_or_else(|| "n/a".to_string()),
    );
    if let Some(trace) = &report.optimizer_trace {
        text += &format!(
            "\noptimizer trace: {}",
            io::to_json_string_full(&serde_json::json!(trace))
        );
    }
    emit(format, text, report.to_json());
    Ok(report.exit_code())
}

fn rank2(
    format: Format,
    seed: u64,
    threads: usize,
    file: &Path,
    starts: Option<usize>,
) -> CliResult<i32> {
    let rho = load_density(file)?;
    let cfg = optim_config(seed, threads, starts);
    let verdict = rank2_classify(&rho, &cfg).or_exit(EXIT_COMPUTE)?;

    let mut text = format!(
        "verdict: {}\nresidual: {}",
        verdict.verdict.as_str(),
        sig12(verdict.residual)
    );
    if let Some(values) = &verdict.diagonal_values {
        text += "\ndiagonal values x_kappa:";
        for (kappa, z) in values.iter().enumerate() {
            text += &format!("\n  kappa {kappa}: {} + {}i", sig12(z.re), sig12(z.im));
        }
        text += &format!(
            "\ndiag form residual: {}",
            sig12(verdict.diag_form_residual.unwrap_or(0.0))
        );
    }
    emit(format, text, verdict.to_json());
    Ok(match verdict.verdict {
        Rank2Class::Separable => 0,
        Rank2Class::OneCopyPseudoDistillable => 1,
    })
}

fn witness2q(format: Format, seed: u64, file: &Path, budget: usize) -> CliResult<i32> {
    let rho = load_density(file)?;
    let report = witness_2q(&rho, budget, seed).or_exit(EXIT_USAGE)?;
    let text = format!(
        "best wootters concurrence: {}\nsamples used: {}",
        sig12(report.best_concurrence),
        report.samples_used
    );
    emit(format, text, report.to_json());
    Ok(EXIT_OK)
}

fn oracle_ppt(format: Format, file: &Path) -> CliResult<i32> {
    let rho = load_density(file)?;
    let result = ppt(&rho).or_exit(EXIT_COMPUTE)?;
    emit(
        format,
        format!(
            "ppt min eigenvalue: {}\nnpt: {}",
            sig12(result.min_eigenvalue),
            result.npt
        ),
        json!({"min_eigenvalue": result.min_eigenvalue, "npt": result.npt}),
    );
    Ok(EXIT_OK)
}

fn oracle_wootters(format: Format, file: &Path) -> CliResult<i32> {
    let rho = load_density(file)?;
    let concurrence = match crate::separability::wootters(&rho) {
        Ok(c) => c,
        Err(e @ Error::WrongDims { .. }) => return Err(fail(EXIT_SCHEMA, e)),
        Err(e) => return Err(fail(EXIT_COMPUTE, e)),
    };
    emit(
        format,
        sig12(concurrence),
        json!({"wootters_concurrence": concurrence}),
    );
    Ok(EXIT_OK)
}
