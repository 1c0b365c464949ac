//! Exhaustive stabilizer-group search at small qubit counts.
//!
//! Stabilizer states are enumerated through the unique reduced row-echelon
//! basis of each maximal isotropic subspace of F₂^{2n}, expanded by all 2^n
//! generator sign vectors. The group energy of a set is the signed sum of
//! Hamiltonian coefficients whose strings lie in the generated group; a dense
//! ρ_s = 2^{-N}·∏(I+g_j) trace serves as the independent oracle for it.

use std::collections::HashSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf2;
use crate::hamiltonian::Hamiltonian;
use crate::pauli::PauliString;
use crate::state::{hamiltonian_dense, pauli_dense};

/// Default qubit cap for exhaustive enumeration (36 720 sets at n = 4).
pub const DEFAULT_ENUMERATION_CAP: usize = 4;

/// Qubit cap for the dense group-energy oracle.
pub const ORACLE_CAP: usize = 6;

/// N independent, mutually commuting, ±1-signed Pauli strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GeneratorSet {
    n_qubits: usize,
    generators: Vec<PauliString>,
}

impl GeneratorSet {
    /// Validate and build: pairwise commuting, independent, Hermitian signs.
    pub fn new(generators: Vec<PauliString>) -> Result<Self> {
        let n = match generators.first() {
            Some(g) => g.n_qubits(),
            None => return Err(Error::Invalid("empty generator list".into())),
        };
        if generators.len() != n {
            return Err(Error::Invalid(format!(
                "need exactly {n} generators for {n} qubits, got {}",
                generators.len()
            )));
        }
        for g in &generators {
            if g.n_qubits() != n {
                return Err(Error::Dimension("mixed qubit counts in generator set".into()));
            }
            if g.sign().is_none() {
                return Err(Error::Invalid(format!("generator {g} carries a ±i phase")));
            }
            if g.is_identity_bits() {
                return Err(Error::Invalid("identity cannot be a generator".into()));
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if !generators[i].commutes(&generators[j])? {
                    return Err(Error::Invalid(format!(
                        "generators {} and {} anticommute",
                        generators[i], generators[j]
                    )));
                }
            }
        }
        if gf2::rank(&generators)? != n {
            return Err(Error::Invalid("generators are not independent".into()));
        }
        Ok(Self { n_qubits: n, generators })
    }

    fn new_unchecked(generators: Vec<PauliString>) -> Self {
        Self { n_qubits: generators[0].n_qubits(), generators }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    /// Canonical form: signed RREF rows sorted by pivot column.
    ///
    /// Two sets stabilize the same state iff their canonical forms agree.
    pub fn canonical(&self) -> Result<GeneratorSet> {
        let (rows, _) = gf2::rref_signed(&self.generators)?;
        Ok(Self { n_qubits: self.n_qubits, generators: rows })
    }

    /// The signed group element matching `p`'s bits, if the bits lie in the span.
    pub fn group_element(&self, p: &PauliString) -> Result<Option<PauliString>> {
        let (rows, _) = gf2::rref_signed(&self.generators)?;
        gf2::span_element(&rows, p)
    }

    /// True when the signed string `w` (bits and sign) is a group element.
    pub fn contains_signed(&self, w: &PauliString) -> Result<bool> {
        Ok(self
            .group_element(w)?
            .is_some_and(|el| el.phase_exp() == w.phase_exp()))
    }

    /// All 2^n signed group elements (identity included).
    pub fn signed_elements(&self) -> Result<Vec<PauliString>> {
        let n = self.n_qubits;
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1u64 << n) {
            let mut acc = PauliString::identity(n);
            for (i, g) in self.generators.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    acc = acc.multiply(g)?;
                }
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Text form: comma-joined signed generators.
    pub fn to_text(&self) -> String {
        self.generators
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }

    /// Parse the comma-joined text form.
    pub fn from_text(text: &str) -> Result<Self> {
        let gens: Result<Vec<PauliString>> = text.split(',').map(|s| s.trim().parse()).collect();
        Self::new(gens?)
    }
}

// ---------------------------------------------------------------------------
// enumeration
// ---------------------------------------------------------------------------

fn symp(a: u64, b: u64, n: usize) -> bool {
    let xa = a & ((1 << n) - 1);
    let za = a >> n;
    let xb = b & ((1 << n) - 1);
    let zb = b >> n;
    (((xa & zb).count_ones() + (za & xb).count_ones()) & 1) == 1
}

fn packed_to_pauli(row: u64, n: usize) -> PauliString {
    let x = (0..n).map(|q| row >> q & 1 == 1).collect();
    let z = (0..n).map(|q| row >> (n + q) & 1 == 1).collect();
    PauliString::from_bits(x, z, 0).expect("equal lengths")
}

fn dfs_rows(
    n: usize,
    pivots: &[usize],
    free_cols: &[Vec<usize>],
    rows: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    let i = rows.len();
    if i == n {
        out.push(rows.clone());
        return;
    }
    let frees = &free_cols[i];
    for assign in 0..(1u64 << frees.len()) {
        let mut row = 1u64 << pivots[i];
        for (k, &c) in frees.iter().enumerate() {
            if assign >> k & 1 == 1 {
                row |= 1 << c;
            }
        }
        if rows.iter().all(|&r| !symp(r, row, n)) {
            rows.push(row);
            dfs_rows(n, pivots, free_cols, rows, out);
            rows.pop();
        }
    }
}

/// RREF bases (packed bit rows) of every maximal isotropic subspace.
fn isotropic_bases(n: usize) -> Vec<Vec<u64>> {
    let cols = 2 * n;
    let mut out = Vec::new();
    // pivot-column subsets in lexicographic order
    let mut pivots: Vec<usize> = (0..n).collect();
    loop {
        let free_cols: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                (pivots[i] + 1..cols)
                    .filter(|c| !pivots.contains(c))
                    .collect()
            })
            .collect();
        let mut rows = Vec::with_capacity(n);
        dfs_rows(n, &pivots, &free_cols, &mut rows, &mut out);
        // advance the combination
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if pivots[i] < cols - (n - i) {
                pivots[i] += 1;
                for j in i + 1..n {
                    pivots[j] = pivots[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Invalid("qubit count must be positive".into()));
    }
    if n > cap {
        return Err(Error::Capacity(format!(
            "exhaustive enumeration is capped at {cap} qubits (requested {n})"
        )));
    }
    Ok(())
}

/// Stream every distinct stabilizer state's canonical generator set once.
pub fn enumerate_generator_sets(n: usize) -> Result<impl Iterator<Item = GeneratorSet>> {
    enumerate_generator_sets_with_cap(n, DEFAULT_ENUMERATION_CAP)
}

/// Enumeration with an explicit qubit cap.
pub fn enumerate_generator_sets_with_cap(
    n: usize,
    cap: usize,
) -> Result<impl Iterator<Item = GeneratorSet>> {
    check_cap(n, cap)?;
    let bases = isotropic_bases(n);
    Ok(bases.into_iter().flat_map(move |rows| {
        let gens: Vec<PauliString> = rows.iter().map(|&r| packed_to_pauli(r, n)).collect();
        (0..(1u64 << n)).map(move |mask| {
            let signed = gens
                .iter()
                .enumerate()
                .map(|(i, g)| if mask >> i & 1 == 1 { g.negated() } else { g.clone() })
                .collect();
            GeneratorSet::new_unchecked(signed)
        })
    }))
}

// ---------------------------------------------------------------------------
// group energy
// ---------------------------------------------------------------------------

/// Group energy with the list of contributing Hamiltonian terms.
#[derive(Debug, Clone)]
pub struct GroupEnergyReport {
    pub energy: f64,
    pub generator_set: GeneratorSet,
    /// (term string, group-element sign, h_p) for every contained term.
    pub contributing_terms: Vec<(PauliString, f64, f64)>,
}

/// Signed sum of coefficients over Hamiltonian terms inside the group.
pub fn group_energy(g: &GeneratorSet, h: &Hamiltonian) -> Result<GroupEnergyReport> {
    if g.n_qubits() != h.n_qubits() {
        return Err(Error::Dimension(format!(
            "generator set on {} qubits, Hamiltonian on {}",
            g.n_qubits(),
            h.n_qubits()
        )));
    }
    let (rows, _) = gf2::rref_signed(g.generators())?;
    let mut energy = h.identity_coeff();
    let mut contributing = Vec::new();
    if h.identity_coeff() != 0.0 {
        contributing.push((
            PauliString::identity(h.n_qubits()),
            1.0,
            h.identity_coeff(),
        ));
    }
    for t in h.pauli_terms() {
        if let Some(el) = gf2::span_element(&rows, &t.pauli)? {
            let sign = el.sign().ok_or_else(|| {
                Error::Invalid(format!("group element {el} is not Hermitian"))
            })?;
            energy += sign * t.coeff;
            contributing.push((t.pauli.clone(), sign, t.coeff));
        }
    }
    Ok(GroupEnergyReport {
        energy,
        generator_set: g.clone(),
        contributing_terms: contributing,
    })
}

/// Dense-trace oracle: Tr(H·ρ_s) with ρ_s = 2^{-N}·∏(I+g_j).
pub fn group_energy_oracle(g: &GeneratorSet, h: &Hamiltonian) -> Result<f64> {
    let n = g.n_qubits();
    if n > ORACLE_CAP {
        return Err(Error::Capacity(format!(
            "dense oracle is capped at {ORACLE_CAP} qubits (requested {n})"
        )));
    }
    if n != h.n_qubits() {
        return Err(Error::Dimension("oracle dimension mismatch".into()));
    }
    let rho = stabilizer_density(g)?;
    let hm = hamiltonian_dense(h)?;
    Ok((hm * rho).diagonal().sum().re)
}

/// ρ_s = 2^{-N}·∏(I+g_j) as a dense matrix.
pub fn stabilizer_density(g: &GeneratorSet) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << g.n_qubits();
    let mut rho = DMatrix::<Complex64>::identity(dim, dim);
    for gen in g.generators() {
        let gm = pauli_dense(gen)?;
        let proj = (DMatrix::identity(dim, dim) + gm) * Complex64::new(0.5, 0.0);
        rho *= proj;
    }
    Ok(rho)
}

// ---------------------------------------------------------------------------
// minimum search
// ---------------------------------------------------------------------------

/// The exact minimum group energy and every generator set attaining it.
#[derive(Debug, Clone)]
pub struct MinGroups {
    pub e_min: f64,
    pub groups: Vec<GeneratorSet>,
}

/// Exhaustive minimum of the group energy over all stabilizer states.
pub fn find_min_groups(h: &Hamiltonian) -> Result<MinGroups> {
    find_min_groups_with_cap(h, DEFAULT_ENUMERATION_CAP)
}

/// Exhaustive minimum with an explicit enumeration cap.
pub fn find_min_groups_with_cap(h: &Hamiltonian, cap: usize) -> Result<MinGroups> {
    let n = h.n_qubits();
    check_cap(n, cap)?;
    let bases = isotropic_bases(n);
    let const_term = h.identity_coeff();
    let terms: Vec<(f64, PauliString, u64)> = h
        .pauli_terms()
        .map(|t| {
            let mut packed = 0u64;
            for q in 0..n {
                if t.pauli.x_bits()[q] {
                    packed |= 1 << q;
                }
                if t.pauli.z_bits()[q] {
                    packed |= 1 << (n + q);
                }
            }
            (t.coeff, t.pauli.clone(), packed)
        })
        .collect();

    // per-base scan over the 2^n sign masks, deterministic merge afterwards
    let per_base: Vec<(f64, Vec<u64>)> = bases
        .par_iter()
        .map(|rows| {
            // membership/coords of每 term against the packed RREF rows
            let pivots: Vec<u32> = rows.iter().map(|r| r.trailing_zeros()).collect();
            let mut inside: Vec<(f64, f64, u64)> = Vec::new(); // (h_p, base sign, row mask)
            let pstrings: Vec<PauliString> =
                rows.iter().map(|&r| packed_to_pauli(r, n)).collect();
            for (coeff, pauli, packed) in &terms {
                let mut residual = *packed;
                let mut mask = 0u64;
                for (i, &row) in rows.iter().enumerate() {
                    if residual >> pivots[i] & 1 == 1 {
                        residual ^= row;
                        mask |= 1 << i;
                    }
                }
                if residual == 0 {
                    let mut acc = PauliString::identity(n);
                    for (i, ps) in pstrings.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            acc = acc.multiply(ps).expect("same register");
                        }
                    }
                    debug_assert!(acc.same_bits(pauli));
                    let sign = acc.sign().expect("commuting Hermitian product");
                    inside.push((*coeff, sign, mask));
                }
            }
            let mut best = f64::INFINITY;
            let mut best_masks: Vec<u64> = Vec::new();
            for smask in 0..(1u64 << n) {
                let mut e = const_term;
                for &(hp, s, m) in &inside {
                    let flips = (smask & m).count_ones() & 1;
                    e += if flips == 1 { -s * hp } else { s * hp };
                }
                if e < best - 1e-12 {
                    best = e;
                    best_masks.clear();
                    best_masks.push(smask);
                } else if (e - best).abs() <= 1e-12 {
                    best_masks.push(smask);
                }
            }
            (best, best_masks)
        })
        .collect();

    let mut e_min = f64::INFINITY;
    for (e, _) in &per_base {
        if *e < e_min {
            e_min = *e;
        }
    }
    let tol = 1e-9 * (1.0 + e_min.abs());
    let mut groups = Vec::new();
    for (base_idx, (e, masks)) in per_base.iter().enumerate() {
        if (*e - e_min).abs() <= tol {
            let gens: Vec<PauliString> = bases[base_idx]
                .iter()
                .map(|&r| packed_to_pauli(r, n))
                .collect();
            for &mask in masks {
                let signed = gens
                    .iter()
                    .enumerate()
                    .map(|(i, g)| if mask >> i & 1 == 1 { g.negated() } else { g.clone() })
                    .collect();
                groups.push(GeneratorSet::new_unchecked(signed));
            }
        }
    }
    Ok(MinGroups { e_min, groups })
}

// ---------------------------------------------------------------------------
// two-step refinement
// ---------------------------------------------------------------------------

/// ξ = 1 iff at least one generator commutes with every Hamiltonian term.
pub fn filter_xi(g: &GeneratorSet, h: &Hamiltonian) -> bool {
    g.generators().iter().any(|gen| {
        h.terms()
            .iter()
            .all(|t| gen.commutes(&t.pauli).unwrap_or(false))
    })
}

/// Result of the two-step optimal-set refinement.
#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub e_min: f64,
    /// Canonical surviving generator sets.
    pub sets: Vec<GeneratorSet>,
    /// Diagnostics for the fallback paths.
    pub warnings: Vec<String>,
}

/// Two-step selection of the optimal stabilizer generator sets.
///
/// Step 1 keeps minimizers containing a generator that commutes with the
/// whole Hamiltonian. Step 2 removes the common subgroup's terms from H,
/// minimizes the remainder, and keeps step-1 survivors whose group shares a
/// Hamiltonian-commuting signed element with a step-2 minimizer.
pub fn refine_optimal(h: &Hamiltonian) -> Result<RefineOutcome> {
    refine_optimal_with_cap(h, DEFAULT_ENUMERATION_CAP)
}

/// Refinement with an explicit enumeration cap.
pub fn refine_optimal_with_cap(h: &Hamiltonian, cap: usize) -> Result<RefineOutcome> {
    const GROUP_SCAN_LIMIT: usize = 4096;
    let mg = find_min_groups_with_cap(h, cap)?;
    let mut warnings = Vec::new();

    let canonical_all: Result<Vec<GeneratorSet>> =
        mg.groups.iter().map(|g| g.canonical()).collect();
    let canonical_all = canonical_all?;

    let survivors: Vec<GeneratorSet> = canonical_all
        .iter()
        .filter(|g| filter_xi(g, h))
        .cloned()
        .collect();
    if survivors.is_empty() {
        warnings.push(
            "no minimizer passes the commuting-generator filter; returning all minimizers"
                .into(),
        );
        return Ok(RefineOutcome { e_min: mg.e_min, sets: canonical_all, warnings });
    }
    if survivors.len() == 1 {
        return Ok(RefineOutcome { e_min: mg.e_min, sets: survivors, warnings });
    }
    if canonical_all.len() > GROUP_SCAN_LIMIT {
        warnings.push(format!(
            "minimizer manifold too large for the common-subgroup scan ({} sets); \
             returning step-1 survivors",
            canonical_all.len()
        ));
        return Ok(RefineOutcome { e_min: mg.e_min, sets: survivors, warnings });
    }

    // common signed subgroup of all minimizers, identity excluded
    let first_elements = canonical_all[0].signed_elements()?;
    let mut common: Vec<PauliString> = Vec::new();
    for el in first_elements {
        if el.is_identity_bits() {
            continue;
        }
        let mut shared = true;
        for g in &canonical_all[1..] {
            if !g.contains_signed(&el)? {
                shared = false;
                break;
            }
        }
        if shared {
            common.push(el);
        }
    }

    // sub-Hamiltonian: drop terms whose bits appear in the common subgroup
    let sub_terms: Vec<(f64, PauliString)> = h
        .pauli_terms()
        .filter(|t| !common.iter().any(|c| c.same_bits(&t.pauli)))
        .map(|t| (t.coeff, t.pauli.clone()))
        .collect();
    if sub_terms.is_empty() {
        return Ok(RefineOutcome { e_min: mg.e_min, sets: survivors, warnings });
    }
    let h_sub = Hamiltonian::from_terms(h.n_qubits(), sub_terms)?;
    if h_sub.terms().is_empty() {
        return Ok(RefineOutcome { e_min: mg.e_min, sets: survivors, warnings });
    }

    let sub_mg = find_min_groups_with_cap(&h_sub, cap)?;
    if sub_mg.groups.len() > GROUP_SCAN_LIMIT {
        warnings.push(format!(
            "sub-Hamiltonian minimizer manifold too large ({} sets); \
             returning step-1 survivors",
            sub_mg.groups.len()
        ));
        return Ok(RefineOutcome { e_min: mg.e_min, sets: survivors, warnings });
    }

    // signed elements of sub-minimizers that commute with the original H
    let mut witness: Vec<PauliString> = Vec::new();
    let mut seen: HashSet<(String, u8)> = HashSet::new();
    for g in &sub_mg.groups {
        for el in g.signed_elements()? {
            if el.is_identity_bits() {
                continue;
            }
            let commutes_all = h
                .terms()
                .iter()
                .all(|t| el.commutes(&t.pauli).unwrap_or(false));
            if commutes_all && seen.insert((el.to_string(), el.phase_exp())) {
                witness.push(el);
            }
        }
    }
    if witness.is_empty() {
        warnings.push(
            "step 2 produced no Hamiltonian-commuting witness element; \
             returning step-1 survivors"
                .into(),
        );
        return Ok(RefineOutcome { e_min: mg.e_min, sets: survivors, warnings });
    }

    let mut finals = Vec::new();
    for g in &survivors {
        let mut keep = false;
        for w in &witness {
            if g.contains_signed(w)? {
                keep = true;
                break;
            }
        }
        if keep {
            finals.push(g.clone());
        }
    }
    if finals.is_empty() {
        warnings.push(
            "step 2 eliminated every step-1 survivor; returning step-1 survivors".into(),
        );
        return Ok(RefineOutcome { e_min: mg.e_min, sets: survivors, warnings });
    }
    Ok(RefineOutcome { e_min: mg.e_min, sets: finals, warnings })
}
