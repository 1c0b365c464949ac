//! Genetic-algorithm search for the minimum-energy maximal commuting clique
//! of Hamiltonian terms, and completion of the clique to a full generator set.
//!
//! Individuals are bitstrings over the Hamiltonian's Pauli terms. Commuting
//! selections are scored by the exact minimum group energy over generator
//! signs (GF(2)-dependent terms carry forced signs, so −Σ|h_p| alone would
//! overestimate frustrated cliques); anticommuting pairs pay a large penalty.

use std::collections::{BTreeMap, HashMap};

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2;
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use crate::stabsearch::GeneratorSet;

/// Symmetric 0/1 matrix; entry true iff terms i and j anticommute.
#[derive(Debug, Clone)]
pub struct CommutationMatrix {
    anti: Vec<Vec<bool>>,
}

impl CommutationMatrix {
    pub fn size(&self) -> usize {
        self.anti.len()
    }

    pub fn anticommute(&self, i: usize, j: usize) -> bool {
        self.anti[i][j]
    }
}

/// Build the anticommutation matrix over the Hamiltonian's stored terms.
pub fn commutation_matrix(h: &Hamiltonian) -> Result<CommutationMatrix> {
    let terms = h.terms();
    if terms.is_empty() {
        return Err(Error::Invalid("commutation matrix needs at least one term".into()));
    }
    let p = terms.len();
    let mut anti = vec![vec![false; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            let a = !terms[i].pauli.commutes(&terms[j].pauli)?;
            anti[i][j] = a;
            anti[j][i] = a;
        }
    }
    Ok(CommutationMatrix { anti })
}

/// Genetic-algorithm hyperparameters.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub penalty_weight: f64,
    pub rng_seed: u64,
    pub elitism_count: usize,
}

impl GaConfig {
    /// Defaults scaled to the Hamiltonian: population 64, 200·N generations,
    /// per-bit mutation 1/p, penalty 2Σ|h_p|+1.
    pub fn defaults_for(h: &Hamiltonian, rng_seed: u64) -> Self {
        let p = h.pauli_terms().count().max(1);
        Self {
            population_size: 64,
            generations: 200 * h.n_qubits(),
            crossover_rate: 0.7,
            mutation_rate: 1.0 / p as f64,
            penalty_weight: 2.0 * h.sum_abs_coeff() + 1.0,
            rng_seed,
            elitism_count: 2,
        }
    }

    pub fn validate(&self, h: &Hamiltonian) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Invalid("population_size must be at least 2".into()));
        }
        if self.penalty_weight <= h.sum_abs_coeff() {
            return Err(Error::Invalid(
                "penalty_weight must exceed the total coefficient weight".into(),
            ));
        }
        for (name, r) in [("crossover_rate", self.crossover_rate), ("mutation_rate", self.mutation_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return Err(Error::Invalid(format!("{name} must lie in [0,1]")));
            }
        }
        Ok(())
    }
}

/// A commuting term selection with its exact minimum group energy.
#[derive(Debug, Clone)]
pub struct CliqueResult {
    /// Indices into the Hamiltonian's non-identity term list.
    pub selected_terms: Vec<usize>,
    /// Achieved sign per selected term under the optimal assignment.
    pub signs: BTreeMap<usize, i8>,
    pub energy: f64,
    pub is_maximal: bool,
}

/// Exact minimum group energy of the subgroup generated by a commuting term
/// selection, minimizing over generator sign vectors.
///
/// Returns (energy, signed basis rows, sign per selected index).
fn resolve_signs(
    h: &Hamiltonian,
    selected: &[usize],
) -> Result<(f64, Vec<PauliString>, BTreeMap<usize, i8>)> {
    let terms: Vec<&crate::hamiltonian::HamiltonianTerm> = h.pauli_terms().collect();
    let chosen: Vec<PauliString> = selected.iter().map(|&i| terms[i].pauli.clone()).collect();
    if chosen.is_empty() {
        return Ok((h.identity_coeff(), Vec::new(), BTreeMap::new()));
    }
    let (basis, _) = gf2::rref_signed(&chosen)?;
    let l = basis.len();
    let n = h.n_qubits();

    // coordinates and base sign of every H term inside the span
    let pivots: Vec<usize> = basis
        .iter()
        .map(|r| (0..2 * n).find(|&c| gf2::sym_bit(r, c)).expect("nonzero row"))
        .collect();
    let mut contained: Vec<(usize, f64, f64, u64)> = Vec::new(); // (term idx, h_p, base sign, coords)
    for (idx, t) in terms.iter().enumerate() {
        let mut residual = t.pauli.unsigned();
        let mut mask = 0u64;
        for (i, row) in basis.iter().enumerate() {
            if gf2::sym_bit(&residual, pivots[i]) {
                residual = residual.multiply(&row.unsigned())?;
                mask |= 1 << i;
            }
        }
        if residual.is_identity_bits() {
            let mut acc = PauliString::identity(n);
            for (i, row) in basis.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    acc = acc.multiply(row)?;
                }
            }
            let base = acc
                .sign()
                .ok_or_else(|| Error::Invalid("non-Hermitian group element".into()))?;
            contained.push((idx, t.coeff, base, mask));
        }
    }

    let energy_of = |smask: u64| -> f64 {
        let mut e = h.identity_coeff();
        for &(_, hp, base, m) in &contained {
            let flip = (smask & m).count_ones() & 1 == 1;
            e += if flip { -base * hp } else { base * hp };
        }
        e
    };

    let best_mask = if l <= 16 {
        let mut best = (f64::INFINITY, 0u64);
        for smask in 0..(1u64 << l) {
            let e = energy_of(smask);
            if e < best.0 - 0.0 {
                best = (e, smask);
            }
        }
        best.1
    } else {
        // greedy single-flip descent, deterministic
        let mut mask = 0u64;
        let mut e = energy_of(mask);
        let mut improved = true;
        while improved {
            improved = false;
            for b in 0..l {
                let cand = mask ^ (1 << b);
                let ec = energy_of(cand);
                if ec < e - 1e-15 {
                    mask = cand;
                    e = ec;
                    improved = true;
                }
            }
        }
        mask
    };

    let energy = energy_of(best_mask);
    let signed_basis: Vec<PauliString> = basis
        .iter()
        .enumerate()
        .map(|(i, r)| if best_mask >> i & 1 == 1 { r.negated() } else { r.clone() })
        .collect();
    let mut signs = BTreeMap::new();
    for &(idx, _, base, m) in &contained {
        if selected.contains(&idx) {
            let flip = (best_mask & m).count_ones() & 1 == 1;
            let s = if flip { -base } else { base };
            signs.insert(idx, s as i8);
        }
    }
    Ok((energy, signed_basis, signs))
}

fn violations(bits: &[bool], anti: &CommutationMatrix) -> usize {
    let idx: Vec<usize> = bits
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    let mut v = 0;
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            if anti.anticommute(idx[a], idx[b]) {
                v += 1;
            }
        }
    }
    v
}

/// GA search for the minimum-energy commuting clique of Hamiltonian terms.
pub fn ga_search(h: &Hamiltonian, cfg: &GaConfig) -> Result<CliqueResult> {
    cfg.validate(h)?;
    let terms: Vec<&crate::hamiltonian::HamiltonianTerm> = h.pauli_terms().collect();
    let p = terms.len();
    if p == 0 {
        return Ok(CliqueResult {
            selected_terms: Vec::new(),
            signs: BTreeMap::new(),
            energy: h.identity_coeff(),
            is_maximal: true,
        });
    }
    // anticommutation over the non-identity terms only
    let sub = Hamiltonian::from_terms(
        h.n_qubits(),
        terms.iter().map(|t| (t.coeff, t.pauli.clone())).collect(),
    )?;
    let anti = commutation_matrix(&sub)?;

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.rng_seed);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        terms[b]
            .coeff
            .abs()
            .total_cmp(&terms[a].coeff.abs())
            .then(a.cmp(&b))
    });

    // seed with heavy singletons, then random bitstrings
    let mut population: Vec<Vec<bool>> = Vec::with_capacity(cfg.population_size);
    for &i in order.iter().take(cfg.population_size.min(p)) {
        let mut bits = vec![false; p];
        bits[i] = true;
        population.push(bits);
    }
    while population.len() < cfg.population_size {
        population.push((0..p).map(|_| rng.gen::<bool>()).collect());
    }

    let mut cache: HashMap<Vec<bool>, f64> = HashMap::new();
    let mut best_feasible: Option<(f64, Vec<bool>)> = None;

    for _gen in 0..=cfg.generations {
        // parallel fitness evaluation after all RNG use for this generation
        let fresh: Vec<Vec<bool>> = population
            .iter()
            .filter(|b| !cache.contains_key(*b))
            .cloned()
            .collect();
        let scored: Vec<(Vec<bool>, f64)> = fresh
            .par_iter()
            .map(|bits| {
                let v = violations(bits, &anti);
                let fit = if v == 0 {
                    let sel: Vec<usize> = bits
                        .iter()
                        .enumerate()
                        .filter_map(|(i, &b)| b.then_some(i))
                        .collect();
                    resolve_signs(h, &sel).map(|(e, _, _)| e).unwrap_or(f64::INFINITY)
                } else {
                    let w: f64 = bits
                        .iter()
                        .enumerate()
                        .filter(|&(_, &b)| b)
                        .map(|(i, _)| terms[i].coeff.abs())
                        .sum();
                    h.identity_coeff() - w + cfg.penalty_weight * v as f64
                };
                (bits.clone(), fit)
            })
            .collect();
        cache.extend(scored);

        for bits in &population {
            let fit = cache[bits];
            if violations(bits, &anti) == 0 {
                let better = match &best_feasible {
                    None => true,
                    Some((bf, bb)) => fit < *bf || (fit == *bf && bits < bb),
                };
                if better {
                    best_feasible = Some((fit, bits.clone()));
                }
            }
        }
        if _gen == cfg.generations {
            break;
        }

        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&a, &b| {
            cache[&population[a]]
                .total_cmp(&cache[&population[b]])
                .then(population[a].cmp(&population[b]))
        });

        let mut next: Vec<Vec<bool>> = ranked
            .iter()
            .take(cfg.elitism_count.min(population.len()))
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < cfg.population_size {
            let pick = |rng: &mut ChaCha12Rng| {
                let a = rng.gen_range(0..population.len());
                let b = rng.gen_range(0..population.len());
                if cache[&population[a]] <= cache[&population[b]] {
                    a
                } else {
                    b
                }
            };
            let pa = pick(&mut rng);
            let pb = pick(&mut rng);
            let mut child = if rng.gen::<f64>() < cfg.crossover_rate {
                (0..p)
                    .map(|i| {
                        if rng.gen::<bool>() {
                            population[pa][i]
                        } else {
                            population[pb][i]
                        }
                    })
                    .collect::<Vec<bool>>()
            } else {
                population[pa].clone()
            };
            for bit in child.iter_mut() {
                if rng.gen::<f64>() < cfg.mutation_rate {
                    *bit = !*bit;
                }
            }
            next.push(child);
        }
        population = next;
    }

    let (_, bits) = best_feasible.ok_or_else(|| {
        Error::SearchFailure("no commuting selection found within the generation budget".into())
    })?;

    // greedy extension to maximality within the term set (never raises the
    // minimum: every added coset gains a free overall sign)
    let mut selected: Vec<usize> = bits
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| b.then_some(i))
        .collect();
    loop {
        let mut added = false;
        for &cand in &order {
            if selected.contains(&cand) {
                continue;
            }
            if selected.iter().all(|&s| !anti.anticommute(s, cand)) {
                selected.push(cand);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    selected.sort_unstable();

    let (energy, _, signs) = resolve_signs(h, &selected)?;
    Ok(CliqueResult {
        selected_terms: selected,
        signs,
        energy,
        is_maximal: true,
    })
}

/// Number of generator-set completions of an l-generator group on n qubits:
/// 2^{n−l}·∏_{i=1..n−l}(2^i+1).
pub fn degeneracy_count(n: u32, l: u32) -> Result<u128> {
    if l > n {
        return Err(Error::Invalid(format!("l = {l} exceeds n = {n}")));
    }
    let m = n - l;
    let mut acc: u128 = 1u128
        .checked_shl(m)
        .ok_or_else(|| Error::Capacity("degeneracy count overflows 128 bits".into()))?;
    for i in 1..=m {
        let factor = 1u128
            .checked_shl(i)
            .and_then(|v| v.checked_add(1))
            .ok_or_else(|| Error::Capacity("degeneracy count overflows 128 bits".into()))?;
        acc = acc
            .checked_mul(factor)
            .ok_or_else(|| Error::Capacity("degeneracy count overflows 128 bits".into()))?;
    }
    Ok(acc)
}

/// Coset energy contribution of appending `g` (its sign as given).
fn coset_energy(
    h: &Hamiltonian,
    current_rref: &[PauliString],
    g: &PauliString,
) -> Result<f64> {
    let mut acc = 0.0;
    for t in h.pauli_terms() {
        let shifted = t.pauli.multiply(&g.unsigned())?;
        if let Some(el) = gf2::span_element(current_rref, &shifted)? {
            let coset_el = g.multiply(&el)?;
            let sign = coset_el
                .sign()
                .ok_or_else(|| Error::Invalid("non-Hermitian coset element".into()))?;
            acc += sign * t.coeff;
        }
    }
    Ok(acc)
}

/// Candidate ordering for appended generators: weight descending, then text.
fn candidate_order(a: &PauliString, b: &PauliString) -> std::cmp::Ordering {
    b.weight().cmp(&a.weight()).then(a.to_string().cmp(&b.to_string()))
}

/// Signed elements spanned by `basis` (masks 1..2^l), capped for sanity.
fn signed_combinations(basis: &[PauliString], n: usize) -> Result<Vec<PauliString>> {
    let l = basis.len().min(16);
    let mut out = Vec::new();
    for mask in 1..(1u64 << l) {
        let mut acc = PauliString::identity(n);
        for (i, b) in basis.iter().take(l).enumerate() {
            if mask >> i & 1 == 1 {
                acc = acc.multiply(b)?;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// Complete a commuting clique to a full independent generator set.
///
/// Appended generators satisfy, in priority order: commutation with the
/// current set, independence, and commutation with the whole Hamiltonian.
/// Candidates come first from the signed group of the remaining terms'
/// maximal commuting subset, then from the exact commutant of (current, H),
/// and finally from the symplectic complement of the current set alone.
pub fn complete_generators(
    clique: &CliqueResult,
    h: &Hamiltonian,
    cfg: &GaConfig,
) -> Result<GeneratorSet> {
    let n = h.n_qubits();
    let (_, signed_basis, _) = resolve_signs(h, &clique.selected_terms)?;
    let mut current = signed_basis;
    let mut step = 0u64;

    while current.len() < n {
        step += 1;
        let (rref, _) = gf2::rref_signed(&current)?;
        let in_span = |p: &PauliString| -> Result<bool> {
            if current.is_empty() {
                return Ok(p.is_identity_bits());
            }
            Ok(gf2::span_element(&rref, p)?.is_some())
        };

        let mut pick: Option<(PauliString, bool)> = None; // (candidate, sign inherited)

        // ladder 1: signed group of the remaining terms' maximal commuting subset
        let remaining: Vec<(f64, PauliString)> = h
            .pauli_terms()
            .filter(|t| !in_span(&t.pauli).unwrap_or(false))
            .map(|t| (t.coeff, t.pauli.clone()))
            .collect();
        if !remaining.is_empty() {
            let sub_h = Hamiltonian::from_terms(n, remaining)?;
            if sub_h.pauli_terms().count() > 0 {
                let mut sub_cfg = cfg.clone();
                sub_cfg.rng_seed = cfg
                    .rng_seed
                    .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(step));
                sub_cfg.penalty_weight = 2.0 * sub_h.sum_abs_coeff() + 1.0;
                let sub_clique = ga_search(&sub_h, &sub_cfg)?;
                let (_, sub_basis, _) = resolve_signs(&sub_h, &sub_clique.selected_terms)?;
                if !sub_basis.is_empty() {
                    let mut cands: Vec<PauliString> = signed_combinations(&sub_basis, n)?
                        .into_iter()
                        .filter(|e| {
                            current.iter().all(|g| e.commutes(g).unwrap_or(false))
                                && !in_span(e).unwrap_or(true)
                                && h.terms()
                                    .iter()
                                    .all(|t| e.commutes(&t.pauli).unwrap_or(false))
                        })
                        .collect();
                    cands.sort_by(candidate_order);
                    if let Some(c) = cands.into_iter().next() {
                        pick = Some((c, true));
                    }
                }
            }
        }

        // ladder 2: exact commutant of the current set and the Hamiltonian
        // (basis elements need not commute pairwise, so combinations are
        // canonicalized to sign +; the sign rule below decides the phase)
        if pick.is_none() {
            let mut constraints: Vec<PauliString> =
                current.iter().map(|g| g.unsigned()).collect();
            constraints.extend(h.pauli_terms().map(|t| t.pauli.clone()));
            let basis = gf2::commutant_basis(&constraints, n);
            let mut cands: Vec<PauliString> = signed_combinations(&basis, n)?
                .into_iter()
                .map(|e| e.unsigned())
                .filter(|e| !e.is_identity_bits() && !in_span(e).unwrap_or(true))
                .collect();
            cands.sort_by(candidate_order);
            if let Some(c) = cands.into_iter().next() {
                pick = Some((c, false));
            }
        }

        // ladder 3: symplectic complement of the current set alone
        if pick.is_none() {
            let constraints: Vec<PauliString> =
                current.iter().map(|g| g.unsigned()).collect();
            let basis = gf2::commutant_basis(&constraints, n);
            let mut cands: Vec<PauliString> = signed_combinations(&basis, n)?
                .into_iter()
                .map(|e| e.unsigned())
                .filter(|e| !e.is_identity_bits() && !in_span(e).unwrap_or(true))
                .collect();
            cands.sort_by(candidate_order);
            pick = cands.into_iter().next().map(|c| (c, false));
        }

        let (cand, inherited) = pick.ok_or_else(|| {
            Error::SearchFailure("symplectic completion found no candidate".into())
        })?;

        // sign rule: never raise the group energy; ties keep the inherited
        // sign (ladder 1) or '+' (ladders 2-3)
        let e_plus = coset_energy(h, &rref, &cand)?;
        let e_minus = coset_energy(h, &rref, &cand.negated())?;
        let tie = (e_plus - e_minus).abs() <= 1e-15;
        let negate = (e_minus < e_plus && !tie)
            || (tie && !inherited && cand.sign() == Some(-1.0));
        let chosen = if negate { cand.negated() } else { cand };
        current.push(chosen);
    }

    GeneratorSet::new(current)
}
