//! Measurement-based imaginary time evolution by weak-measurement pairs.
//!
//! The two Kraus operators act diagonally in the energy eigenbasis with
//! eigenvalues (cos εE_n ∓ sin εE_n)/√2 = cos(εE_n + π/4), sin(εE_n + π/4),
//! so trajectories evolve the eigenbasis weights exactly. Outcome 0 biases
//! the weights toward low energy; the threshold rule demands ⌈k′⌉ outcome-0
//! events between consecutive outcome-1 events (the run starts armed, so a
//! leading outcome-1 resets immediately), and a violation re-prepares the
//! initial state.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{k_prime, SpectralParams};
use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::state::{hamiltonian_dense, StateVector};

/// Default qubit cap for the dense eigensolve.
pub const DEFAULT_DENSE_CAP: usize = 12;

/// Relative tolerance grouping eigenvalues into the ground space.
const GROUND_SPACE_RTOL: f64 = 1e-9;

/// Full Hermitian eigendecomposition, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, matching `eigenvalues`.
    pub eigenvectors: DMatrix<Complex64>,
    pub ground_space_dim: usize,
}

impl EigenDecomposition {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_abs_energy(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0f64, |m, &e| m.max(e.abs()))
    }

    /// Eigenbasis weights |⟨E_m|ψ⟩|².
    pub fn weights(&self, state: &StateVector) -> Result<Vec<f64>> {
        if 1usize << state.n_qubits() != self.eigenvalues.len() {
            return Err(Error::Dimension("state/eigenbasis dimension mismatch".into()));
        }
        let v = DVector::from_column_slice(state.amplitudes());
        let coeffs = self.eigenvectors.adjoint() * v;
        Ok(coeffs.iter().map(|c| c.norm_sqr()).collect())
    }

    /// Squared projection onto the (possibly degenerate) ground space.
    pub fn ground_space_fidelity(&self, state: &StateVector) -> Result<f64> {
        let w = self.weights(state)?;
        Ok(w[..self.ground_space_dim].iter().sum())
    }
}

/// Dense eigensolve of the Hamiltonian (default cap 12 qubits).
pub fn eigensolve(h: &Hamiltonian) -> Result<EigenDecomposition> {
    eigensolve_with_cap(h, DEFAULT_DENSE_CAP)
}

/// Dense eigensolve with an explicit qubit cap.
pub fn eigensolve_with_cap(h: &Hamiltonian, cap: usize) -> Result<EigenDecomposition> {
    let n = h.n_qubits();
    if n > cap {
        return Err(Error::Capacity(format!(
            "dense eigensolve is capped at {cap} qubits (requested {n})"
        )));
    }
    let m = hamiltonian_dense(h)?;
    let eig = m.symmetric_eigen();
    let dim = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(dim, dim);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &eig.eigenvectors.column(i));
    }
    let e0 = eigenvalues[0];
    let tol = GROUND_SPACE_RTOL * (1.0 + e0.abs());
    let ground_space_dim = eigenvalues.iter().take_while(|&&e| e - e0 <= tol).count();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        ground_space_dim,
    })
}

/// Safe ε from the coefficient weight: (π/4)/(Σ|h_p| + |h_I|).
pub fn epsilon_safe_bound(h: &Hamiltonian) -> f64 {
    std::f64::consts::FRAC_PI_4 / h.sum_abs_coeff().max(f64::MIN_POSITIVE)
}

/// ε saturating the bound on the computed spectrum: (π/4)/max|E_n|.
pub fn epsilon_from_spectrum(eig: &EigenDecomposition) -> f64 {
    std::f64::consts::FRAC_PI_4 / eig.max_abs_energy().max(f64::MIN_POSITIVE)
}

/// Reset behavior of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetPolicy {
    /// Threshold counting rule with re-preparation of the initial state.
    AppendixC,
    /// Never reset.
    None,
}

/// Configuration of a MITE run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiteConfig {
    pub epsilon: f64,
    pub max_steps: usize,
    pub trials: usize,
    pub threshold_energy: f64,
    pub rng_seed: u64,
    pub reset_policy: ResetPolicy,
    pub record_stride: usize,
    /// Gap heuristic feeding k′ (the spectrum is never consulted in-protocol).
    pub gap_guess: f64,
    /// Keep the first this-many trajectories in the ensemble archive.
    pub archive_trajectories: usize,
}

impl MiteConfig {
    /// Defaults for a Hamiltonian: safe ε bound, gap guess 0.1·Σ|h_p|/N.
    pub fn defaults_for(h: &Hamiltonian, threshold_energy: f64, rng_seed: u64) -> Self {
        Self {
            epsilon: epsilon_safe_bound(h),
            max_steps: 600,
            trials: 1,
            threshold_energy,
            rng_seed,
            reset_policy: ResetPolicy::AppendixC,
            record_stride: 1,
            gap_guess: 0.1 * h.sum_abs_coeff() / h.n_qubits() as f64,
            archive_trajectories: 0,
        }
    }

    /// Enforce ε·max|E_n| ≤ π/4 against the computed spectrum.
    pub fn validate(&self, eig: &EigenDecomposition) -> Result<()> {
        if self.epsilon <= 0.0 {
            return Err(Error::Invalid("epsilon must be positive".into()));
        }
        let bound = self.epsilon * eig.max_abs_energy();
        if bound > std::f64::consts::FRAC_PI_4 + 1e-12 {
            return Err(Error::Invalid(format!(
                "epsilon * max|E| = {bound:.6} exceeds pi/4; shrink epsilon"
            )));
        }
        if self.record_stride == 0 {
            return Err(Error::Invalid("record_stride must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        Ok(())
    }

    /// ⌈k′⌉ of the counting rule, evaluated at (threshold, threshold + gap).
    ///
    /// A non-finite k′ (threshold at the ε saturation point) disables
    /// compensation entirely: every outcome-1 resets.
    pub fn required_zeros(&self) -> u64 {
        let params = SpectralParams {
            e0: self.threshold_energy,
            e1: self.threshold_energy + self.gap_guess.max(0.0),
            e_th: self.threshold_energy,
            epsilon: self.epsilon,
            f0: 1.0,
            f1: 0.0,
        };
        match k_prime(&params) {
            Ok(k) if k.is_finite() && k >= 0.0 => k.ceil() as u64,
            _ => u64::MAX,
        }
    }
}

/// One recorded trajectory step.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub outcome: u8,
    pub fidelity: f64,
    pub energy: f64,
    pub reset: bool,
}

/// Per-trajectory record of a MITE run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_fidelity: f64,
    pub initial_energy: f64,
    pub steps: Vec<StepRecord>,
    /// First step index with fidelity ≥ 0.999 (0 = already converged).
    pub converged_at: Option<usize>,
    pub reset_count: usize,
}

/// One weak measurement on a state vector: outcome, post state, and p₀.
pub fn weak_measure<R: Rng>(
    state: &StateVector,
    eig: &EigenDecomposition,
    epsilon: f64,
    rng: &mut R,
) -> Result<(u8, StateVector, f64)> {
    let v = DVector::from_column_slice(state.amplitudes());
    let mut coeffs = eig.eigenvectors.adjoint() * v;
    let angles: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&e| epsilon * e + std::f64::consts::FRAC_PI_4)
        .collect();
    let p0: f64 = coeffs
        .iter()
        .zip(&angles)
        .map(|(c, a)| c.norm_sqr() * a.cos() * a.cos())
        .sum();
    let outcome = u8::from(rng.gen::<f64>() >= p0);
    let norm = if outcome == 0 { p0 } else { 1.0 - p0 }.sqrt();
    for (c, a) in coeffs.iter_mut().zip(&angles) {
        let f = if outcome == 0 { a.cos() } else { a.sin() };
        *c *= Complex64::new(f / norm, 0.0);
    }
    let back = &eig.eigenvectors * coeffs;
    let post = StateVector::from_amplitudes(state.n_qubits(), back.iter().cloned().collect())?;
    Ok((outcome, post, p0))
}

/// Internal trajectory engine on eigenbasis weights (phases never change).
struct WeightEngine<'a> {
    energies: &'a [f64],
    cos2: Vec<f64>,
    sin2: Vec<f64>,
    ground_dim: usize,
    k_req: u64,
}

impl<'a> WeightEngine<'a> {
    fn new(eig: &'a EigenDecomposition, cfg: &MiteConfig) -> Self {
        let angles: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&e| cfg.epsilon * e + std::f64::consts::FRAC_PI_4)
            .collect();
        Self {
            energies: &eig.eigenvalues,
            cos2: angles.iter().map(|a| a.cos() * a.cos()).collect(),
            sin2: angles.iter().map(|a| a.sin() * a.sin()).collect(),
            ground_dim: eig.ground_space_dim,
            k_req: match cfg.reset_policy {
                ResetPolicy::AppendixC => cfg.required_zeros(),
                ResetPolicy::None => 0,
            },
        }
    }

    fn fidelity(&self, w: &[f64]) -> f64 {
        w[..self.ground_dim].iter().sum()
    }

    fn energy(&self, w: &[f64]) -> f64 {
        w.iter().zip(self.energies).map(|(wi, e)| wi * e).sum()
    }

    fn run(
        &self,
        initial: &[f64],
        cfg: &MiteConfig,
        rng: &mut ChaCha12Rng,
        use_reset: bool,
    ) -> Trajectory {
        let mut w = initial.to_vec();
        let mut steps = Vec::with_capacity(cfg.max_steps / cfg.record_stride + 1);
        let f0 = self.fidelity(&w);
        let e0 = self.energy(&w);
        let mut converged_at = if f0 >= 0.999 { Some(0) } else { None };
        let mut zeros_since_one = 0u64;
        let mut reset_count = 0usize;
        for step in 1..=cfg.max_steps {
            let p0: f64 = w.iter().zip(&self.cos2).map(|(wi, c)| wi * c).sum();
            let outcome = u8::from(rng.gen::<f64>() >= p0);
            let mut reset = false;
            if outcome == 0 {
                let norm = p0;
                for (wi, c) in w.iter_mut().zip(&self.cos2) {
                    *wi *= c / norm;
                }
                zeros_since_one = zeros_since_one.saturating_add(1);
            } else if use_reset && zeros_since_one < self.k_req {
                // the outcome-1 arrived before its compensation: re-prepare
                w.copy_from_slice(initial);
                zeros_since_one = 0;
                reset = true;
                reset_count += 1;
            } else {
                let norm = 1.0 - p0;
                for (wi, s) in w.iter_mut().zip(&self.sin2) {
                    *wi *= s / norm;
                }
                zeros_since_one = 0;
            }
            let f = self.fidelity(&w);
            if converged_at.is_none() && f >= 0.999 {
                converged_at = Some(step);
            }
            if step.is_multiple_of(cfg.record_stride) || step == cfg.max_steps {
                steps.push(StepRecord {
                    step,
                    outcome,
                    fidelity: f,
                    energy: self.energy(&w),
                    reset,
                });
            }
        }
        Trajectory {
            initial_fidelity: f0,
            initial_energy: e0,
            steps,
            converged_at,
            reset_count,
        }
    }
}

/// Run a single trajectory from a fixed initial state.
pub fn run_trajectory(
    h: &Hamiltonian,
    initial: &StateVector,
    cfg: &MiteConfig,
) -> Result<Trajectory> {
    let eig = eigensolve(h)?;
    cfg.validate(&eig)?;
    let engine = WeightEngine::new(&eig, cfg);
    let w0 = eig.weights(initial)?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.rng_seed);
    rng.set_stream(1);
    Ok(engine.run(&w0, cfg, &mut rng, matches!(cfg.reset_policy, ResetPolicy::AppendixC)))
}

/// One point of the ensemble-averaged fidelity curve.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurvePoint {
    pub step: usize,
    pub mean_fidelity: f64,
    pub stderr: f64,
    /// Fraction of trials that reset within the window ending at this step.
    pub reset_rate: f64,
}

/// Ensemble statistics plus the optional trajectory archive.
#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub curve: Vec<CurvePoint>,
    /// Minimum fidelity over every step of every trajectory.
    pub min_fidelity: f64,
    pub mean_initial_fidelity: f64,
    pub converged_at: Vec<Option<usize>>,
    pub total_resets: usize,
    pub trajectories: Vec<Trajectory>,
}

/// Run an ensemble from one fixed initial state.
pub fn run_ensemble(
    h: &Hamiltonian,
    initial: &StateVector,
    cfg: &MiteConfig,
) -> Result<EnsembleResult> {
    run_ensemble_with(h, cfg, |_, _| initial.clone())
}

/// Run an ensemble with a per-trial initial-state sampler.
///
/// Trial t draws from an RNG substream derived from (rng_seed, t), so the
/// result is bit-identical for any thread count or execution order.
pub fn run_ensemble_with<F>(h: &Hamiltonian, cfg: &MiteConfig, init: F) -> Result<EnsembleResult>
where
    F: Fn(usize, &mut ChaCha12Rng) -> StateVector + Sync,
{
    let eig = eigensolve(h)?;
    cfg.validate(&eig)?;
    let engine = WeightEngine::new(&eig, cfg);
    let use_reset = matches!(cfg.reset_policy, ResetPolicy::AppendixC);

    // (fidelities, reset flags, initial fidelity, converged_at, reset count,
    // minimum fidelity, archived trajectory)
    type TrialStats = (Vec<f64>, Vec<bool>, f64, Option<usize>, usize, f64, Option<Trajectory>);
    let per_trial: Result<Vec<TrialStats>> =
        (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha12Rng::seed_from_u64(cfg.rng_seed);
                rng.set_stream(trial as u64 + 1);
                let psi = init(trial, &mut rng);
                let w0 = eig.weights(&psi)?;
                let traj = engine.run(&w0, cfg, &mut rng, use_reset);
                let fids: Vec<f64> = traj.steps.iter().map(|s| s.fidelity).collect();
                let resets: Vec<bool> = traj.steps.iter().map(|s| s.reset).collect();
                let mut min_f = traj.initial_fidelity;
                for s in &traj.steps {
                    min_f = min_f.min(s.fidelity);
                }
                // the stride may hide steps; recompute the true minimum when
                // stride is 1, otherwise the recorded minimum is reported
                let keep = (trial < cfg.archive_trajectories).then(|| traj.clone());
                Ok((fids, resets, traj.initial_fidelity, traj.converged_at, traj.reset_count, min_f, keep))
            })
            .collect();
    let per_trial = per_trial?;

    let points = per_trial.first().map_or(0, |(f, ..)| f.len());
    let trials = cfg.trials as f64;
    let mut curve = Vec::with_capacity(points + 1);

    // step-0 row from the initial states
    let init_fids: Vec<f64> = per_trial.iter().map(|t| t.2).collect();
    let mean0 = init_fids.iter().sum::<f64>() / trials;
    let var0 = if cfg.trials > 1 {
        init_fids.iter().map(|f| (f - mean0) * (f - mean0)).sum::<f64>()
            / ((trials - 1.0) * trials)
    } else {
        0.0
    };
    curve.push(CurvePoint {
        step: 0,
        mean_fidelity: mean0,
        stderr: var0.sqrt(),
        reset_rate: 0.0,
    });

    for k in 0..points {
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let mut resets = 0usize;
        for (fids, rsts, ..) in &per_trial {
            sum += fids[k];
            sumsq += fids[k] * fids[k];
            resets += usize::from(rsts[k]);
        }
        let mean = sum / trials;
        let var = if cfg.trials > 1 {
            ((sumsq - sum * sum / trials) / (trials - 1.0) / trials).max(0.0)
        } else {
            0.0
        };
        let step = (k + 1) * cfg.record_stride;
        curve.push(CurvePoint {
            step: step.min(cfg.max_steps),
            mean_fidelity: mean,
            stderr: var.sqrt(),
            reset_rate: resets as f64 / trials,
        });
    }

    let min_fidelity = per_trial
        .iter()
        .map(|t| t.5)
        .fold(f64::INFINITY, f64::min);
    let converged_at = per_trial.iter().map(|t| t.3).collect();
    let total_resets = per_trial.iter().map(|t| t.4).sum();
    let trajectories = per_trial.into_iter().filter_map(|t| t.6).collect();

    Ok(EnsembleResult {
        curve,
        min_fidelity,
        mean_initial_fidelity: mean0,
        converged_at,
        total_resets,
        trajectories,
    })
}
