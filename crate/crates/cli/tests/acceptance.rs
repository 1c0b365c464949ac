//! Acceptance suite: one test per release criterion, each printing a
//! PASS line (visible with `--nocapture`) and enforcing its tolerance and
//! wall-clock budget.

use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use stabgs_core::gaopt::{complete_generators, ga_search, GaConfig};
use stabgs_core::mite::{
    eigensolve, run_trajectory, MiteConfig, DEFAULT_DENSE_CAP,
};
use stabgs_core::stabsearch::{
    enumerate_generator_sets, find_min_groups, group_energy, group_energy_oracle,
};
use stabgs_core::state::StateVector;
use stabgs_core::tableau::stabilized_state;
use stabgs_core::{GeneratorSet, Hamiltonian, PauliString};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stabgs"))
}

fn run_json(args: &[&str]) -> serde_json::Value {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "stabgs {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn random_hamiltonian_3q(rng: &mut ChaCha12Rng, max_terms: usize) -> Hamiltonian {
    loop {
        let k = rng.gen_range(1..=max_terms);
        let mut raw = Vec::new();
        for _ in 0..k {
            let x: Vec<bool> = (0..3).map(|_| rng.gen()).collect();
            let z: Vec<bool> = (0..3).map(|_| rng.gen()).collect();
            let p = PauliString::from_bits(x, z, 0).unwrap();
            if p.is_identity_bits() {
                continue;
            }
            raw.push((rng.gen_range(-1.0..1.0), p));
        }
        if raw.is_empty() {
            continue;
        }
        let h = Hamiltonian::from_terms(3, raw).unwrap();
        if h.pauli_terms().count() > 0 {
            return h;
        }
    }
}

#[test]
fn criterion_01_enumeration_counts() {
    let t0 = Instant::now();
    let expected = [6usize, 60, 1080, 36720];
    for (i, &want) in expected.iter().enumerate() {
        let n = i + 1;
        let mut count = 0usize;
        let mut canon: HashSet<String> = HashSet::new();
        for g in enumerate_generator_sets(n).unwrap() {
            count += 1;
            canon.insert(g.canonical().unwrap().to_text());
        }
        assert_eq!(count, want, "count at n={n}");
        assert_eq!(canon.len(), want, "distinct canonical sets at n={n}");
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 10.0, "enumeration took {dt:?}");
    println!("criterion 1 (enumeration counts 6/60/1080/36720): PASS in {dt:?}");
}

#[test]
fn criterion_02_group_energy_identity() {
    let t0 = Instant::now();
    let sets: Vec<GeneratorSet> = enumerate_generator_sets(3).unwrap().collect();
    assert_eq!(sets.len(), 1080);
    let mut rng = ChaCha12Rng::seed_from_u64(0xA11CE);
    for _ in 0..20 {
        let h = random_hamiltonian_3q(&mut rng, 8);
        for g in &sets {
            let fast = group_energy(g, &h).unwrap().energy;
            let slow = group_energy_oracle(g, &h).unwrap();
            assert!(
                (fast - slow).abs() <= 1e-10,
                "set {} on\n{}: {fast} vs {slow}",
                g.to_text(),
                h.to_text()
            );
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 60.0, "identity check took {dt:?}");
    println!("criterion 2 (group energy == dense trace, 20x1080): PASS in {dt:?}");
}

#[test]
fn criterion_03_ga_exactness() {
    let t0 = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(0xACCE97);
    let mut successes = 0usize;
    for i in 0..50u64 {
        let h = random_hamiltonian_3q(&mut rng, 8);
        let exact = find_min_groups(&h).unwrap().e_min;
        let mut pass = false;
        for attempt in 0..2u64 {
            let seed = 10_000 + i + attempt * 0x5EED;
            let cfg = GaConfig::defaults_for(&h, seed);
            let clique = ga_search(&h, &cfg).unwrap();
            let full = complete_generators(&clique, &h, &cfg).unwrap();
            let e = group_energy(&full, &h).unwrap().energy;
            if (e - exact).abs() <= 1e-9 {
                pass = true;
                break;
            }
        }
        successes += usize::from(pass);
    }
    let dt = t0.elapsed();
    assert!(successes >= 49, "GA matched the exhaustive minimum on {successes}/50");
    assert!(dt.as_secs_f64() < 120.0, "GA exactness took {dt:?}");
    println!("criterion 3 (GA exactness {successes}/50 at n=3): PASS in {dt:?}");
}

#[test]
fn criterion_04_tfim_paper_values_and_crossover() {
    let t0 = Instant::now();
    let ghz_canon = GeneratorSet::from_text("-ZZIII,-IZZII,-IIZZI,-IIIZZ,-XXXXX")
        .unwrap()
        .canonical()
        .unwrap()
        .to_text();
    let allx_canon = GeneratorSet::from_text("-XIIII,-IXIII,-IIXII,-IIIXI,-IIIIX")
        .unwrap()
        .canonical()
        .unwrap()
        .to_text();

    let v = run_json(&["osgs", "--tfim", "5,0.6", "--ga", "--json"]);
    assert_eq!(v["e_min_s"].as_f64().unwrap(), -4.0);
    assert_eq!(v["generator_sets"][0].as_str().unwrap(), ghz_canon);

    let v = run_json(&["osgs", "--tfim", "5,0.9", "--ga", "--json"]);
    assert_eq!(v["e_min_s"].as_f64().unwrap(), -4.5);
    assert_eq!(v["generator_sets"][0].as_str().unwrap(), allx_canon);

    // crossover at lambda = 0.8: below it the ZZ clique wins with -4,
    // at and above it the all-X clique takes over
    let v = run_json(&["osgs", "--tfim", "5,0.79", "--ga", "--json"]);
    assert_eq!(v["e_min_s"].as_f64().unwrap(), -4.0);
    assert_eq!(v["generator_sets"][0].as_str().unwrap(), ghz_canon);

    let v = run_json(&["osgs", "--tfim", "5,0.8", "--ga", "--json"]);
    assert_eq!(v["e_min_s"].as_f64().unwrap(), -4.0);

    let v = run_json(&["osgs", "--tfim", "5,0.81", "--ga", "--json"]);
    assert!((v["e_min_s"].as_f64().unwrap() - (-4.05)).abs() < 1e-12);
    assert_eq!(v["generator_sets"][0].as_str().unwrap(), allx_canon);

    println!(
        "criterion 4 (TFIM OSGS values and lambda = 0.8 crossover): PASS in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_05_fidelity_floor() {
    let t0 = Instant::now();
    // resolve the 0.707 convention against the dense oracle first
    let h = Hamiltonian::tfim(5, 0.6).unwrap();
    let eig = eigensolve(&h).unwrap();
    let g = GeneratorSet::from_text("-ZZIII,-IZZII,-IIZZI,-IIIZZ,-XXXXX").unwrap();
    let psi = stabilized_state(&g).unwrap();
    let squared = eig.ground_space_fidelity(&psi).unwrap();
    let amplitude = squared.sqrt();
    assert!(
        (squared - 0.707).abs() <= 0.01,
        "squared projection {squared} should reproduce the reported 0.707"
    );
    assert!(
        (amplitude - 0.707).abs() > 0.01,
        "amplitude convention {amplitude} must not also fit 0.707"
    );

    let out = tempdir("crit5");
    let v = run_json(&[
        "mite", "--tfim", "5,0.6", "--init", "osgs", "--trials", "1000", "--steps", "600",
        "--seed", "7", "--out", out.to_str().unwrap(), "--json",
    ]);
    assert_eq!(
        v["fidelity_convention"].as_str().unwrap(),
        "squared_ground_space_projection"
    );
    let initial = v["mean_initial_fidelity"].as_f64().unwrap();
    let floor = v["min_fidelity"].as_f64().unwrap();
    assert!((initial - 0.707).abs() <= 0.01, "initial fidelity {initial}");
    assert!(floor >= 0.70, "per-step minimum fidelity {floor}");
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 300.0, "floor run took {dt:?}");
    println!(
        "criterion 5 (initial fidelity {initial:.4}, floor {floor:.4} >= 0.70): PASS in {dt:?}"
    );
}

fn read_curve(dir: &Path) -> Vec<(usize, f64)> {
    let text = std::fs::read_to_string(dir.join("curve.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|l| {
            let mut it = l.split(',');
            let step: usize = it.next().unwrap().parse().unwrap();
            let mean: f64 = it.next().unwrap().parse().unwrap();
            (step, mean)
        })
        .collect()
}

fn tempdir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("stabgs-acceptance-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn criterion_06_convergence_dominance() {
    let t0 = Instant::now();
    for l in [5usize, 7] {
        let tfim = format!("{l},0.6");
        let dir_osgs = tempdir(&format!("crit6-osgs-{l}"));
        let dir_rand = tempdir(&format!("crit6-rand-{l}"));
        // identical epsilon (spectrum policy), threshold (E_min^S from the
        // same GA stage), and step budget across the two arms
        let common = [
            "--trials", "1000", "--steps", "1500", "--seed", "7",
            "--eps-policy", "spectrum",
        ];
        let mut args_a: Vec<&str> = vec!["mite", "--tfim", &tfim, "--init", "osgs"];
        args_a.extend_from_slice(&common);
        args_a.extend_from_slice(&["--out", dir_osgs.to_str().unwrap(), "--json"]);
        let va = run_json(&args_a);
        let mut args_b: Vec<&str> = vec!["mite", "--tfim", &tfim, "--init", "random"];
        args_b.extend_from_slice(&common);
        args_b.extend_from_slice(&["--out", dir_rand.to_str().unwrap(), "--json"]);
        let vb = run_json(&args_b);
        assert_eq!(va["epsilon"], vb["epsilon"]);
        assert_eq!(va["threshold_energy"], vb["threshold_energy"]);

        let curve_osgs = read_curve(&dir_osgs);
        let curve_rand = read_curve(&dir_rand);
        assert_eq!(curve_osgs.len(), curve_rand.len());
        for ((s1, f_osgs), (s2, f_rand)) in curve_osgs.iter().zip(&curve_rand) {
            assert_eq!(s1, s2);
            assert!(
                f_osgs >= &(f_rand - 1e-12),
                "L={l}: OSGS curve dips below random at step {s1}: {f_osgs} < {f_rand}"
            );
        }
        let final_osgs = curve_osgs.last().unwrap().1;
        assert!(
            final_osgs >= 0.99,
            "L={l}: OSGS mean fidelity {final_osgs} below 0.99 at the budget"
        );
        // window-averaged OSGS curve is non-decreasing
        let window = 100;
        let smoothed: Vec<f64> = curve_osgs
            .windows(window)
            .map(|w| w.iter().map(|(_, f)| f).sum::<f64>() / window as f64)
            .collect();
        for pair in smoothed.windows(2) {
            assert!(
                pair[1] >= pair[0] - 5e-3,
                "L={l}: smoothed mean fidelity decreases: {} -> {}",
                pair[0],
                pair[1]
            );
        }
    }
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 900.0, "dominance runs took {dt:?}");
    println!("criterion 6 (OSGS dominates random init at L=5 and L=7): PASS in {dt:?}");
}

#[test]
fn criterion_07_classical_ising_is_exact() {
    let t0 = Instant::now();
    let v = run_json(&["osgs", "--tfim", "5,0", "--ga", "--json"]);
    let fid = v["fidelity"].as_f64().unwrap();
    assert!((fid - 1.0).abs() <= 1e-9, "fidelity {fid}");
    assert_eq!(v["e_min_s"].as_f64().unwrap(), -4.0);

    // zero MITE steps: the prepared state is already converged
    let h = Hamiltonian::tfim(5, 0.0).unwrap();
    let set = GeneratorSet::from_text(v["generator_sets"][0].as_str().unwrap()).unwrap();
    let psi = stabilized_state(&set).unwrap();
    let mut cfg = MiteConfig::defaults_for(&h, -4.0, 3);
    cfg.max_steps = 10;
    let traj = run_trajectory(&h, &psi, &cfg).unwrap();
    assert_eq!(traj.converged_at, Some(0), "no MITE steps required");
    println!(
        "criterion 7 (lambda = 0 prepared exactly, fidelity {fid}): PASS in {:?}",
        t0.elapsed()
    );
}

#[test]
fn criterion_08_kraus_completeness_and_fixed_point() {
    let t0 = Instant::now();
    // operator-level completeness at n <= 3 for several (H, epsilon) pairs
    for (text, eps_scale) in [
        ("1 ZZI\n1 IZZ\n0.5 XII\n0.5 IXI\n0.5 IIX", 1.0),
        ("0.3 XY\n-0.7 ZZ", 0.5),
        ("-1 Z", 1.0),
    ] {
        let h: Hamiltonian = text.parse().unwrap();
        let eig = eigensolve(&h).unwrap();
        let eps = eps_scale * FRAC_PI_4 / eig.max_abs_energy();
        let dim = eig.eigenvalues.len();
        let mut m0 = nalgebra::DMatrix::<num_complex::Complex64>::zeros(dim, dim);
        let mut m1 = m0.clone();
        for k in 0..dim {
            let a = eps * eig.eigenvalues[k] + FRAC_PI_4;
            let v = eig.eigenvectors.column(k);
            let proj = v * v.adjoint();
            m0 += &proj * num_complex::Complex64::new(a.cos(), 0.0);
            m1 += &proj * num_complex::Complex64::new(a.sin(), 0.0);
        }
        let sum = m0.adjoint() * &m0 + m1.adjoint() * &m1;
        let dev = (&sum - nalgebra::DMatrix::identity(dim, dim)).norm();
        assert!(dev <= 1e-12, "completeness deviation {dev} for\n{text}");
    }

    // ground-state input is a fixed point: 10^4 steps, zero resets
    let h: Hamiltonian = "-1 ZIIII\n-1 IZIII\n-1 IIZII\n-1 IIIZI\n-1 IIIIZ".parse().unwrap();
    for seed in [1u64, 7, 99] {
        let mut cfg = MiteConfig::defaults_for(&h, -5.0, seed);
        cfg.max_steps = 10_000;
        let traj = run_trajectory(&h, &StateVector::zeros(5), &cfg).unwrap();
        assert_eq!(traj.reset_count, 0, "seed {seed} saw resets");
        assert!(traj.initial_fidelity >= 1.0 - 1e-9);
        for s in &traj.steps {
            assert!(s.fidelity >= 1.0 - 1e-9, "fidelity dipped to {}", s.fidelity);
            assert!(!s.reset);
        }
    }
    println!(
        "criterion 8 (Kraus completeness 1e-12; fixed point over 1e4 steps): PASS in {:?}",
        t0.elapsed()
    );
}

/// Two-level ensemble driven at the threshold outcome rate (the worst-case
/// amplitude-peak condition of the error analysis): outcome 1 with fixed
/// probability sin²(εE_th + π/4), Kraus weight updates as usual, no resets.
/// Returns the fitted mean log-odds slope and its standard error.
struct SlopeSetup {
    e0: f64,
    e1: f64,
    e_th: f64,
    eps: f64,
    f0: f64,
    steps: usize,
    trials: usize,
    seed: u64,
}

fn pinned_rate_slope(setup: &SlopeSetup) -> (f64, f64) {
    let SlopeSetup { e0, e1, e_th, eps, f0, steps, trials, seed } = *setup;
    let a0 = eps * e0 + FRAC_PI_4;
    let a1 = eps * e1 + FRAC_PI_4;
    let ath = eps * e_th + FRAC_PI_4;
    let p1 = ath.sin() * ath.sin();
    let c = [a0.cos() * a0.cos(), a1.cos() * a1.cos()];
    let s = [a0.sin() * a0.sin(), a1.sin() * a1.sin()];
    let mut slopes = Vec::with_capacity(trials);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let mut w = [f0, 1.0 - f0];
        let start = (w[1] / w[0]).ln();
        for _ in 0..steps {
            let f = if rng.gen::<f64>() < p1 { &s } else { &c };
            w[0] *= f[0];
            w[1] *= f[1];
            let norm = w[0] + w[1];
            w[0] /= norm;
            w[1] /= norm;
        }
        slopes.push(((w[1] / w[0]).ln() - start) / steps as f64);
    }
    let mean = slopes.iter().sum::<f64>() / trials as f64;
    let var = slopes.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
        / ((trials - 1) as f64);
    (mean, (var / trials as f64).sqrt())
}

#[test]
fn criterion_09_error_formula_trend() {
    let t0 = Instant::now();
    let (e0, e1) = (-1.0, 1.0);
    let eps = PI / 8.0;
    for e_th in [-0.5f64, 0.5] {
        let setup = SlopeSetup { e0, e1, e_th, eps, f0: 0.5, steps: 200, trials: 4000, seed: 0xE9 };
        let (slope, _) = pinned_rate_slope(&setup);
        let formula = 2.0 * eps * eps * (e0 - e1) * (e0 + e1 - 2.0 * e_th);
        assert_eq!(
            slope.signum(),
            formula.signum(),
            "sign mismatch at E_th={e_th}: slope {slope}, formula {formula}"
        );
        let ratio = slope / formula;
        assert!(
            (0.5..=2.0).contains(&ratio),
            "magnitude off at E_th={e_th}: slope {slope}, formula {formula}, ratio {ratio}"
        );
    }
    // midpoint threshold: zero slope within statistical error
    let setup = SlopeSetup { e0, e1, e_th: 0.0, eps, f0: 0.5, steps: 200, trials: 4000, seed: 0xE9 };
    let (slope, stderr) = pinned_rate_slope(&setup);
    assert!(
        slope.abs() <= 3.0 * stderr + 1e-12,
        "midpoint slope {slope} exceeds 3 sigma = {}",
        3.0 * stderr
    );
    let dt = t0.elapsed();
    assert!(dt.as_secs_f64() < 120.0, "trend runs took {dt:?}");
    println!("criterion 9 (log-infidelity slope tracks the error formula): PASS in {dt:?}");
}

#[test]
fn criterion_10_determinism_across_thread_counts() {
    let t0 = Instant::now();
    let run = |threads: &str, tag: &str| -> (Vec<u8>, Vec<u8>, serde_json::Value) {
        let dir = tempdir(tag);
        let out = bin()
            .env("RAYON_NUM_THREADS", threads)
            .args([
                "mite", "--tfim", "4,0.7", "--init", "osgs", "--trials", "64", "--steps",
                "200", "--seed", "21", "--dump-trajectories", "3", "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .expect("binary runs");
        assert!(out.status.success());
        let csv = std::fs::read(dir.join("curve.csv")).unwrap();
        let traj = std::fs::read(dir.join("trajectories.jsonl")).unwrap();
        let mut manifest: serde_json::Value =
            serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).unwrap()).unwrap();
        manifest.as_object_mut().unwrap().remove("created_unix");
        (csv, traj, manifest)
    };
    let (csv1, traj1, man1) = run("1", "crit10-t1");
    let (csv4, traj4, man4) = run("4", "crit10-t4");
    let (csv1b, traj1b, man1b) = run("1", "crit10-t1b");
    assert_eq!(csv1, csv4, "curve.csv differs across thread counts");
    assert_eq!(traj1, traj4, "trajectories.jsonl differs across thread counts");
    assert_eq!(man1, man4, "manifest differs across thread counts");
    assert_eq!(csv1, csv1b, "curve.csv differs across reruns");
    assert_eq!(traj1, traj1b);
    assert_eq!(man1, man1b);

    // machine output of the search is byte-stable too
    let a = bin().args(["osgs", "--tfim", "4,0.5", "--ga", "--json"]).output().unwrap();
    let b = bin().args(["osgs", "--tfim", "4,0.5", "--ga", "--json"]).output().unwrap();
    assert_eq!(a.stdout, b.stdout);

    println!(
        "criterion 10 (byte-identical outputs across thread counts): PASS in {:?}",
        t0.elapsed()
    );
}

#[test]
fn cli_exit_codes() {
    // capacity error -> 2
    let out = bin().args(["enumerate", "--qubits", "9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    // parse error -> 1
    let out = bin().args(["osgs", "--tfim", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    // eigensolve capacity propagates from mite -> 2
    let tfim = format!("{},0.1", DEFAULT_DENSE_CAP + 1);
    let out = bin()
        .args(["mite", "--tfim", &tfim, "--trials", "1", "--steps", "1", "--out", "/tmp/x-cap"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    // machine-readable error JSON under --json
    let out = bin()
        .args(["osgs", "--tfim", "9,0.5", "--exact", "--json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kind"], "capacity");
}
