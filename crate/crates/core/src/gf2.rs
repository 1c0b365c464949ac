//! GF(2) linear algebra over symplectic Pauli rows.
//!
//! Pauli strings map to length-2n bit rows (x block then z block). Row
//! reduction is performed by multiplying the signed strings themselves, so
//! signs propagate exactly through every elimination step.

use crate::error::Result;
use crate::pauli::PauliString;

/// Bit at symplectic column `col` (x block first, then z block).
pub fn sym_bit(p: &PauliString, col: usize) -> bool {
    let n = p.n_qubits();
    if col < n {
        p.x_bits()[col]
    } else {
        p.z_bits()[col - n]
    }
}

/// Row-reduced echelon basis of the span of `rows`, signs tracked exactly.
///
/// Returns (reduced rows sorted by pivot column, pivot columns). Identity
/// rows produced by dependencies are dropped.
pub fn rref_signed(rows: &[PauliString]) -> Result<(Vec<PauliString>, Vec<usize>)> {
    let mut work: Vec<PauliString> = rows.to_vec();
    let n2 = match work.first() {
        Some(r) => 2 * r.n_qubits(),
        None => return Ok((Vec::new(), Vec::new())),
    };
    let mut reduced: Vec<PauliString> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for col in 0..n2 {
        let Some(idx) = work.iter().position(|r| sym_bit(r, col)) else {
            continue;
        };
        let pivot_row = work.swap_remove(idx);
        for r in work.iter_mut() {
            if sym_bit(r, col) {
                *r = r.multiply(&pivot_row)?;
            }
        }
        for r in reduced.iter_mut() {
            if sym_bit(r, col) {
                *r = r.multiply(&pivot_row)?;
            }
        }
        reduced.push(pivot_row);
        pivots.push(col);
    }
    // sort rows by pivot column for a canonical presentation
    let mut order: Vec<usize> = (0..pivots.len()).collect();
    order.sort_by_key(|&i| pivots[i]);
    let reduced = order.iter().map(|&i| reduced[i].clone()).collect();
    let mut pivots_sorted = pivots.clone();
    pivots_sorted.sort_unstable();
    Ok((reduced, pivots_sorted))
}

/// GF(2) rank of the symplectic rows.
pub fn rank(rows: &[PauliString]) -> Result<usize> {
    Ok(rref_signed(rows)?.0.len())
}

/// Membership of `target`'s bits in the row span, with the exact sign.
///
/// If the unsigned bits of `target` lie in the span, returns the signed
/// group element carrying those bits (the product of the reducing rows).
pub fn span_element(
    rref_rows: &[PauliString],
    target: &PauliString,
) -> Result<Option<PauliString>> {
    let n = target.n_qubits();
    let mut acc = PauliString::identity(n);
    let mut residual = target.unsigned();
    for row in rref_rows {
        let pivot = (0..2 * n).find(|&c| sym_bit(row, c)).expect("nonzero row");
        if sym_bit(&residual, pivot) {
            acc = acc.multiply(row)?;
            residual = residual.multiply(&row.unsigned())?;
        }
    }
    if residual.is_identity_bits() {
        Ok(Some(acc))
    } else {
        Ok(None)
    }
}

/// Nullspace basis of the linear map v ↦ (⟨c, v⟩_symp)_c over F₂^{2n}.
///
/// Each returned row is a sign-positive Pauli commuting with every
/// constraint. The basis vectors are in echelon order of the free columns.
pub fn commutant_basis(constraints: &[PauliString], n_qubits: usize) -> Vec<PauliString> {
    let cols = 2 * n_qubits;
    // constraint row for symplectic product: (z | x) of the constraint
    let mut mat: Vec<Vec<bool>> = constraints
        .iter()
        .map(|c| {
            let mut row = vec![false; cols];
            row[..n_qubits].copy_from_slice(c.z_bits());
            row[n_qubits..].copy_from_slice(c.x_bits());
            row
        })
        .collect();
    // plain GF(2) elimination
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if let Some(sel) = (r..mat.len()).find(|&i| mat[i][c]) {
            mat.swap(r, sel);
            for i in 0..mat.len() {
                if i != r && mat[i][c] {
                    let (head, tail) = mat.split_at_mut(r.max(i));
                    let (a, b) = if i < r {
                        (&mut head[i], &tail[0])
                    } else {
                        (&mut tail[0], &head[r])
                    };
                    for j in 0..cols {
                        a[j] ^= b[j];
                    }
                }
            }
            pivot_cols.push(c);
            r += 1;
            if r == mat.len() {
                break;
            }
        }
    }
    let free_cols: Vec<usize> = (0..cols).filter(|c| !pivot_cols.contains(c)).collect();
    let mut basis = Vec::with_capacity(free_cols.len());
    for &fc in &free_cols {
        let mut v = vec![false; cols];
        v[fc] = true;
        for (ri, &pc) in pivot_cols.iter().enumerate() {
            if mat[ri][fc] {
                v[pc] = true;
            }
        }
        let x = v[..n_qubits].to_vec();
        let z = v[n_qubits..].to_vec();
        basis.push(PauliString::from_bits(x, z, 0).expect("equal lengths"));
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn rref_tracks_signs() {
        // {-Z1Z2, -Z2Z3} reduce cleanly; the product -Z1Z3... (+Z1Z3 * phases)
        let rows = vec![p("-ZZI"), p("-IZZ")];
        let (rref, pivots) = rref_signed(&rows).unwrap();
        assert_eq!(rref.len(), 2);
        assert_eq!(pivots, vec![3, 4]);
        // Z1Z3 = (-ZZI)(-IZZ) must be in the span with sign +1
        let el = span_element(&rref, &p("ZIZ")).unwrap().unwrap();
        assert_eq!(el.sign(), Some(1.0));
        // Z1Z2 itself carries its -1
        let el = span_element(&rref, &p("ZZI")).unwrap().unwrap();
        assert_eq!(el.sign(), Some(-1.0));
        assert!(span_element(&rref, &p("XII")).unwrap().is_none());
    }

    #[test]
    fn rank_counts_independent_rows() {
        let rows = vec![p("ZZI"), p("IZZ"), p("ZIZ")];
        assert_eq!(rank(&rows).unwrap(), 2);
        let rows = vec![p("XII"), p("IXI"), p("IIX")];
        assert_eq!(rank(&rows).unwrap(), 3);
    }

    #[test]
    fn commutant_contains_exactly_the_commuting_strings() {
        let cons = vec![p("ZZI"), p("IZZ"), p("XXX")];
        let basis = commutant_basis(&cons, 3);
        // commutant of the GHZ-type group is the group itself: dimension 3
        assert_eq!(basis.len(), 3);
        for b in &basis {
            for c in &cons {
                assert!(b.commutes(c).unwrap());
            }
        }
    }
}
