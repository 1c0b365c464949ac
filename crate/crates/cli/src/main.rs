//! `stabgs` — stabilizer ground-state search, Clifford circuit emission, and
//! MITE weak-measurement ensembles from the command line.
//!
//! Exit codes: 0 success, 1 user/config error, 2 capacity error, 3 internal
//! invariant violation. `RAYON_NUM_THREADS` overrides the worker count.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use stabgs_core::analysis::{self, SpectralParams};
use stabgs_core::gaopt::{self, GaConfig};
use stabgs_core::mite::{self, MiteConfig, ResetPolicy};
use stabgs_core::stabsearch::{self};
use stabgs_core::state::{random_product_state, StateVector};
use stabgs_core::tableau;
use stabgs_core::{Error, Hamiltonian};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "stabgs", version, about = "Stabilizer ground states and measurement-based imaginary time evolution")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Find the optimal stabilizer ground state of a Hamiltonian.
    Osgs(OsgsArgs),
    /// Run the MITE weak-measurement ensemble seeded by the OSGS.
    Mite(MiteArgs),
    /// Evaluate the complexity and convergence-error calculators.
    Analyze(AnalyzeArgs),
    /// Enumerate stabilizer generator sets exhaustively.
    Enumerate(EnumerateArgs),
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// Hamiltonian file: one `<coeff> <pauli>` term per line.
    #[arg(long, value_name = "PATH", conflicts_with = "tfim")]
    hamiltonian: Option<PathBuf>,
    /// Built-in transverse-field Ising chain, written as `L,LAMBDA`.
    #[arg(long, value_name = "L,LAMBDA")]
    tfim: Option<String>,
}

impl SourceArgs {
    fn load(&self) -> Result<Hamiltonian, CliErr> {
        match (&self.hamiltonian, &self.tfim) {
            (Some(path), None) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliErr::user(format!("cannot read {}: {e}", path.display())))?;
                text.parse().map_err(CliErr::from)
            }
            (None, Some(spec)) => {
                let (l, lambda) = spec
                    .split_once(',')
                    .ok_or_else(|| CliErr::user(format!("--tfim expects `L,LAMBDA`, got `{spec}`")))?;
                let l: usize = l
                    .trim()
                    .parse()
                    .map_err(|_| CliErr::user(format!("bad L in --tfim `{spec}`")))?;
                let lambda: f64 = lambda
                    .trim()
                    .parse()
                    .map_err(|_| CliErr::user(format!("bad LAMBDA in --tfim `{spec}`")))?;
                Hamiltonian::tfim(l, lambda).map_err(CliErr::from)
            }
            _ => Err(CliErr::user(
                "exactly one of --hamiltonian or --tfim is required".into(),
            )),
        }
    }
}

#[derive(Args)]
struct OsgsArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Exhaustive enumeration (qubits within --cap).
    #[arg(long, conflicts_with = "ga")]
    exact: bool,
    /// Genetic-algorithm clique search.
    #[arg(long)]
    ga: bool,
    /// Enumeration cap for --exact.
    #[arg(long, default_value_t = stabsearch::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    /// RNG seed for the GA.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// GA population size override.
    #[arg(long)]
    pop: Option<usize>,
    /// GA generation count override.
    #[arg(long)]
    gens: Option<usize>,
    /// Write the preparation circuit of the first set here.
    #[arg(long, value_name = "PATH")]
    emit_circuit: Option<PathBuf>,
    /// Machine-readable JSON on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InitKind {
    Osgs,
    Zeros,
    Random,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EpsPolicy {
    /// (pi/4) / (sum |h_p|): safe without any eigensolve.
    Bound,
    /// (pi/4) / max|E_n| from the dense spectrum (diagnostic).
    Spectrum,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ResetArg {
    AppendixC,
    None,
}

#[derive(Args)]
struct MiteArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Initial state of every trajectory.
    #[arg(long, value_enum, default_value_t = InitKind::Osgs)]
    init: InitKind,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 600)]
    steps: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Record every STRIDE-th step in the curve.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Explicit epsilon (overrides --eps-policy).
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = EpsPolicy::Bound)]
    eps_policy: EpsPolicy,
    /// Energy threshold override (default: E_min^S from the OSGS stage).
    #[arg(long)]
    threshold: Option<f64>,
    /// Gap heuristic feeding the k' counting rule.
    #[arg(long)]
    gap_guess: Option<f64>,
    #[arg(long, value_enum, default_value_t = ResetArg::AppendixC)]
    reset_policy: ResetArg,
    /// Output directory for curve.csv / manifest.json / trajectories.jsonl.
    #[arg(long, value_name = "DIR", default_value = "mite-out")]
    out: PathBuf,
    /// Dump the first N trajectories to trajectories.jsonl.
    #[arg(long, default_value_t = 0)]
    dump_trajectories: usize,
    /// GA seed for the OSGS stage.
    #[arg(long, default_value_t = 42)]
    ga_seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// JSON file with {e0, e1, e_th, epsilon, f0, f1}.
    #[arg(long, value_name = "PATH")]
    params: PathBuf,
    /// Iteration count for the convergence-error formula.
    #[arg(long, default_value_t = 0)]
    k: u64,
}

#[derive(Args)]
struct EnumerateArgs {
    #[arg(long)]
    qubits: usize,
    #[arg(long, default_value_t = stabsearch::DEFAULT_ENUMERATION_CAP)]
    cap: usize,
    /// List at most this many sets.
    #[arg(long, default_value_t = 64)]
    limit: usize,
    #[arg(long)]
    json: bool,
}

// ---------------------------------------------------------------------------
// error plumbing
// ---------------------------------------------------------------------------

struct CliErr {
    code: u8,
    kind: &'static str,
    message: String,
}

impl CliErr {
    fn user(message: String) -> Self {
        Self { code: 1, kind: "user", message }
    }
}

impl From<Error> for CliErr {
    fn from(e: Error) -> Self {
        let (code, kind) = match &e {
            Error::Capacity(_) => (2, "capacity"),
            _ => (1, "user"),
        };
        Self { code, kind, message: e.to_string() }
    }
}

fn fail(json: bool, e: &CliErr) {
    if json {
        println!(
            "{}",
            serde_json::json!({ "error": e.message, "kind": e.kind })
        );
    } else {
        eprintln!("error: {}", e.message);
    }
}

// ---------------------------------------------------------------------------
// osgs
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct OsgsReport {
    e_min_s: f64,
    generator_sets: Vec<String>,
    method: String,
    /// Completion degeneracy 2^{N-l}·prod(2^i+1) for the clique rank l.
    completion_degeneracy: Option<u128>,
    optimal_set_count: usize,
    /// Ground-space projection fidelity of the first set (when feasible).
    fidelity: Option<f64>,
    warnings: Vec<String>,
}

fn cmd_osgs(args: &OsgsArgs) -> Result<(), CliErr> {
    let h = args.source.load()?;
    let n = h.n_qubits();
    let use_exact = args.exact || (!args.ga && n <= args.cap);

    let (sets, e_min, degeneracy, warnings, method) = if use_exact {
        let out = stabsearch::refine_optimal_with_cap(&h, args.cap)?;
        (out.sets, out.e_min, None, out.warnings, "exact".to_string())
    } else {
        let mut cfg = GaConfig::defaults_for(&h, args.seed);
        if let Some(p) = args.pop {
            cfg.population_size = p;
        }
        if let Some(g) = args.gens {
            cfg.generations = g;
        }
        let clique = gaopt::ga_search(&h, &cfg)?;
        let terms: Vec<_> = h.pauli_terms().collect();
        let chosen: Vec<_> = clique
            .selected_terms
            .iter()
            .map(|&i| terms[i].pauli.clone())
            .collect();
        let l = stabgs_core::gf2::rank(&chosen)? as u32;
        let deg = gaopt::degeneracy_count(n as u32, l)?;
        let full = gaopt::complete_generators(&clique, &h, &cfg)?;
        let canon = full.canonical()?;
        (vec![canon], clique.energy, Some(deg), Vec::new(), "ga".to_string())
    };

    let fidelity = if n <= mite::DEFAULT_DENSE_CAP {
        let eig = mite::eigensolve(&h)?;
        let psi = tableau::stabilized_state(&sets[0])?;
        Some(eig.ground_space_fidelity(&psi)?)
    } else {
        None
    };

    if let Some(path) = &args.emit_circuit {
        let circuit = tableau::synthesize_circuit(&sets[0])?;
        fs::write(path, circuit.dump())
            .map_err(|e| CliErr::user(format!("cannot write {}: {e}", path.display())))?;
    }

    let report = OsgsReport {
        e_min_s: e_min,
        generator_sets: sets.iter().map(|s| s.to_text()).collect(),
        method,
        completion_degeneracy: degeneracy,
        optimal_set_count: sets.len(),
        fidelity,
        warnings,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        println!("E_min^S = {}", report.e_min_s);
        for s in &report.generator_sets {
            println!("generators: {s}");
        }
        if let Some(d) = report.completion_degeneracy {
            println!("completion degeneracy: {d}");
        }
        println!("optimal sets: {}", report.optimal_set_count);
        if let Some(f) = report.fidelity {
            println!("ground-space fidelity: {f:.6}");
        }
        for w in &report.warnings {
            println!("warning: {w}");
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// mite
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RunManifest {
    tool_version: String,
    command: String,
    hamiltonian_digest: String,
    n_qubits: usize,
    init: String,
    trials: usize,
    max_steps: usize,
    record_stride: usize,
    seed: u64,
    ga_seed: u64,
    epsilon: f64,
    epsilon_policy: String,
    threshold_energy: f64,
    gap_guess: f64,
    reset_policy: String,
    required_zeros: String,
    e_min_s: f64,
    generator_set: Option<String>,
    /// Convention resolved against the dense oracle: the 0.707 of TFIM(5,0.6)
    /// is the squared ground-space projection of the OSGS.
    fidelity_convention: String,
    mean_initial_fidelity: f64,
    min_fidelity: f64,
    final_mean_fidelity: f64,
    total_resets: usize,
    converged_fraction: f64,
    convergence_quantiles: [Option<usize>; 3],
    created_unix: u64,
}

fn quantile(sorted: &[usize], q: f64) -> Option<usize> {
    if sorted.is_empty() {
        return None;
    }
    let idx = ((sorted.len() as f64 - 1.0) * q).round() as usize;
    sorted.get(idx).copied()
}

fn cmd_mite(args: &MiteArgs) -> Result<(), CliErr> {
    let h = args.source.load()?;
    let n = h.n_qubits();

    // OSGS stage: clique search + completion fixes E_min^S and the state
    let ga_cfg = GaConfig::defaults_for(&h, args.ga_seed);
    let clique = gaopt::ga_search(&h, &ga_cfg)?;
    let e_min_s = clique.energy;
    let osgs_set = gaopt::complete_generators(&clique, &h, &ga_cfg)?.canonical()?;

    let eig = mite::eigensolve(&h)?;
    let epsilon = match (args.epsilon, args.eps_policy) {
        (Some(e), _) => e,
        (None, EpsPolicy::Bound) => mite::epsilon_safe_bound(&h),
        (None, EpsPolicy::Spectrum) => mite::epsilon_from_spectrum(&eig),
    };
    let threshold = args.threshold.unwrap_or(e_min_s);

    let mut cfg = MiteConfig::defaults_for(&h, threshold, args.seed);
    cfg.epsilon = epsilon;
    cfg.max_steps = args.steps;
    cfg.trials = args.trials;
    cfg.record_stride = args.stride;
    cfg.archive_trajectories = args.dump_trajectories;
    cfg.reset_policy = match args.reset_policy {
        ResetArg::AppendixC => ResetPolicy::AppendixC,
        ResetArg::None => ResetPolicy::None,
    };
    if let Some(g) = args.gap_guess {
        cfg.gap_guess = g;
    }

    let result = match args.init {
        InitKind::Osgs => {
            let psi = tableau::stabilized_state(&osgs_set)?;
            mite::run_ensemble(&h, &psi, &cfg)?
        }
        InitKind::Zeros => mite::run_ensemble(&h, &StateVector::zeros(n), &cfg)?,
        InitKind::Random => {
            mite::run_ensemble_with(&h, &cfg, |_, rng| random_product_state(n, rng))?
        }
    };

    fs::create_dir_all(&args.out)
        .map_err(|e| CliErr::user(format!("cannot create {}: {e}", args.out.display())))?;

    let mut csv = String::from("step,mean_fidelity,stderr,reset_rate\n");
    for p in &result.curve {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            p.step, p.mean_fidelity, p.stderr, p.reset_rate
        ));
    }
    fs::write(args.out.join("curve.csv"), csv)
        .map_err(|e| CliErr::user(format!("cannot write curve.csv: {e}")))?;

    if args.dump_trajectories > 0 {
        let mut lines = String::new();
        for t in &result.trajectories {
            lines.push_str(&serde_json::to_string(t).expect("serializable"));
            lines.push('\n');
        }
        fs::write(args.out.join("trajectories.jsonl"), lines)
            .map_err(|e| CliErr::user(format!("cannot write trajectories.jsonl: {e}")))?;
    }

    let mut converged: Vec<usize> = result.converged_at.iter().flatten().copied().collect();
    converged.sort_unstable();
    let final_mean = result.curve.last().map_or(0.0, |p| p.mean_fidelity);
    let k_req = cfg.required_zeros();
    let manifest = RunManifest {
        tool_version: VERSION.to_string(),
        command: "mite".into(),
        hamiltonian_digest: hex_digest(&h),
        n_qubits: n,
        init: match args.init {
            InitKind::Osgs => "osgs",
            InitKind::Zeros => "zeros",
            InitKind::Random => "random",
        }
        .into(),
        trials: cfg.trials,
        max_steps: cfg.max_steps,
        record_stride: cfg.record_stride,
        seed: cfg.rng_seed,
        ga_seed: args.ga_seed,
        epsilon,
        epsilon_policy: match (args.epsilon, args.eps_policy) {
            (Some(_), _) => "explicit",
            (None, EpsPolicy::Bound) => "bound",
            (None, EpsPolicy::Spectrum) => "spectrum",
        }
        .into(),
        threshold_energy: threshold,
        gap_guess: cfg.gap_guess,
        reset_policy: match cfg.reset_policy {
            ResetPolicy::AppendixC => "appendix_c",
            ResetPolicy::None => "none",
        }
        .into(),
        required_zeros: if k_req == u64::MAX {
            "unbounded".into()
        } else {
            k_req.to_string()
        },
        e_min_s,
        generator_set: Some(osgs_set.to_text()),
        fidelity_convention: "squared_ground_space_projection".into(),
        mean_initial_fidelity: result.mean_initial_fidelity,
        min_fidelity: result.min_fidelity,
        final_mean_fidelity: final_mean,
        total_resets: result.total_resets,
        converged_fraction: converged.len() as f64 / cfg.trials as f64,
        convergence_quantiles: [
            quantile(&converged, 0.25),
            quantile(&converged, 0.5),
            quantile(&converged, 0.75),
        ],
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    fs::write(
        args.out.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("serializable"),
    )
    .map_err(|e| CliErr::user(format!("cannot write manifest.json: {e}")))?;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&manifest).expect("serializable"));
    } else {
        println!("E_min^S = {e_min_s}, epsilon = {epsilon:.6}, threshold = {threshold}");
        println!(
            "mean initial fidelity = {:.6}, final mean fidelity = {:.6}",
            result.mean_initial_fidelity, final_mean
        );
        println!(
            "min fidelity = {:.6}, resets = {}, converged = {:.1}%",
            result.min_fidelity,
            result.total_resets,
            100.0 * converged.len() as f64 / cfg.trials as f64
        );
        let [q25, q50, q75] = manifest.convergence_quantiles;
        println!(
            "convergence steps (25/50/75%): {} / {} / {}",
            q25.map_or("-".into(), |v: usize| v.to_string()),
            q50.map_or("-".into(), |v: usize| v.to_string()),
            q75.map_or("-".into(), |v: usize| v.to_string()),
        );
        println!("outputs in {}", args.out.display());
    }
    Ok(())
}

fn hex_digest(h: &Hamiltonian) -> String {
    let mut hasher = Sha256::new();
    hasher.update(h.to_text().as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AnalyzeReport {
    params: SpectralParams,
    k: u64,
    k_min: Option<f64>,
    k_prime: Option<f64>,
    t_fail: Option<f64>,
    t_total: Option<f64>,
    convergence_error_raw: Option<f64>,
    convergence_error: Option<f64>,
    errors: Vec<String>,
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliErr> {
    let text = fs::read_to_string(&args.params)
        .map_err(|e| CliErr::user(format!("cannot read {}: {e}", args.params.display())))?;
    let params: SpectralParams = serde_json::from_str(&text)
        .map_err(|e| CliErr::user(format!("bad params JSON: {e}")))?;
    params.validate().map_err(CliErr::from)?;

    let mut errors = Vec::new();
    let grab = |name: &str, r: stabgs_core::Result<f64>, errors: &mut Vec<String>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push(format!("{name}: {e}"));
            None
        }
    };
    let k_min = grab("k_min", analysis::k_min(&params), &mut errors);
    let k_prime = grab("k_prime", analysis::k_prime(&params), &mut errors);
    let t_fail = match k_prime {
        Some(kp) => grab("t_fail", analysis::t_fail(&params, kp), &mut errors),
        None => None,
    };
    let t_total = grab("t_total", analysis::t_total(&params), &mut errors);
    let conv = match analysis::convergence_error(&params, args.k) {
        Ok(c) => Some(c),
        Err(e) => {
            errors.push(format!("convergence_error: {e}"));
            None
        }
    };

    let report = AnalyzeReport {
        params,
        k: args.k,
        k_min,
        k_prime,
        t_fail,
        t_total,
        convergence_error_raw: conv.map(|c| c.raw),
        convergence_error: conv.map(|c| c.clamped),
        errors,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    Ok(())
}

// ---------------------------------------------------------------------------
// enumerate
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct EnumerateReport {
    qubits: usize,
    count: usize,
    sets: Vec<String>,
}

fn cmd_enumerate(args: &EnumerateArgs) -> Result<(), CliErr> {
    let iter = stabsearch::enumerate_generator_sets_with_cap(args.qubits, args.cap)?;
    let mut count = 0usize;
    let mut sets = Vec::new();
    for g in iter {
        if sets.len() < args.limit {
            sets.push(g.to_text());
        }
        count += 1;
    }
    let report = EnumerateReport { qubits: args.qubits, count, sets };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));
    } else {
        for s in &report.sets {
            println!("{s}");
        }
        if report.sets.len() < report.count {
            println!("... ({} more)", report.count - report.sets.len());
        }
        println!("total: {}", report.count);
    }
    Ok(())
}

// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap's default error exit code collides with the capacity code;
            // help and version stay success, everything else is a user error
            use clap::error::ErrorKind::{DisplayHelp, DisplayVersion};
            let code = match e.kind() {
                DisplayHelp | DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json = match &cli.cmd {
        Cmd::Osgs(a) => a.json,
        Cmd::Mite(a) => a.json,
        Cmd::Analyze(_) => false,
        Cmd::Enumerate(a) => a.json,
    };
    // a panic is an internal invariant violation: exit code 3
    let result = std::panic::catch_unwind(move || match &cli.cmd {
        Cmd::Osgs(a) => cmd_osgs(a),
        Cmd::Mite(a) => cmd_mite(a),
        Cmd::Analyze(a) => cmd_analyze(a),
        Cmd::Enumerate(a) => cmd_enumerate(a),
    });
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            fail(json, &e);
            ExitCode::from(e.code)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "internal invariant violation".into());
            fail(json, &CliErr { code: 3, kind: "internal", message: msg });
            ExitCode::from(3)
        }
    }
}
