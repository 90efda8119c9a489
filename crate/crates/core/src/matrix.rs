//! Matrices over a truncated Witt ring, with the entrywise Frobenius,
//! exact inversion over the local ring, and residue-field rank/nullspace.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::witt::{RingDescriptor, WittElement, WittRing};

#[derive(Clone, PartialEq, Eq)]
pub struct MatrixW {
    ring: WittRing,
    rows: usize,
    cols: usize,
    entries: Vec<WittElement>,
}

impl std::fmt::Debug for MatrixW {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "MatrixW {}x{} over {:?} [", self.rows, self.cols, self.ring)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl MatrixW {
    pub fn new(ring: WittRing, rows: usize, cols: usize, entries: Vec<WittElement>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{} = {} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|e| *e.ring() != ring) {
            return Err(Error::RingMismatch);
        }
        Ok(MatrixW {
            ring,
            rows,
            cols,
            entries,
        })
    }

    pub fn from_fn(
        ring: &WittRing,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> WittElement,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        MatrixW {
            ring: ring.clone(),
            rows,
            cols,
            entries,
        }
    }

    pub fn zero(ring: &WittRing, rows: usize, cols: usize) -> Self {
        Self::from_fn(ring, rows, cols, |_, _| ring.zero())
    }

    pub fn identity(ring: &WittRing, n: usize) -> Self {
        Self::from_fn(ring, n, n, |i, j| if i == j { ring.one() } else { ring.zero() })
    }

    /// diag(1_c, p * 1_d) and friends.
    pub fn diagonal_from(ring: &WittRing, values: &[WittElement]) -> Self {
        let n = values.len();
        Self::from_fn(ring, n, n, |i, j| {
            if i == j {
                values[i].clone()
            } else {
                ring.zero()
            }
        })
    }

    /// Permutation matrix: column i holds the indicator of pi(i).
    pub fn permutation(ring: &WittRing, pi: &[usize]) -> Self {
        let n = pi.len();
        Self::from_fn(ring, n, n, |i, j| {
            if pi[j] == i {
                ring.one()
            } else {
                ring.zero()
            }
        })
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &WittElement {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: WittElement) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = self.get(i, j);
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    fn check_same_ring(&self, rhs: &Self) -> Result<()> {
        if self.ring != rhs.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_ring(rhs)?;
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch("add: dimension mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        MatrixW::new(self.ring.clone(), self.rows, self.cols, entries)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_ring(rhs)?;
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch("sub: dimension mismatch".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        MatrixW::new(self.ring.clone(), self.rows, self.cols, entries)
    }

    pub fn neg(&self) -> Self {
        let entries = self.entries.iter().map(|a| a.neg()).collect();
        MatrixW {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_ring(rhs)?;
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "mul: {}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Vec::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = self.ring.zero();
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(rhs.get(k, j))?)?;
                }
                out.push(acc);
            }
        }
        MatrixW::new(self.ring.clone(), self.rows, rhs.cols, out)
    }

    pub fn scale(&self, s: &WittElement) -> Result<Self> {
        if *s.ring() != self.ring {
            return Err(Error::RingMismatch);
        }
        let entries = self
            .entries
            .iter()
            .map(|a| a.mul(s))
            .collect::<Result<Vec<_>>>()?;
        MatrixW::new(self.ring.clone(), self.rows, self.cols, entries)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.ring, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Entrywise sigma^e.
    pub fn map_sigma(&self, e: i64) -> Self {
        let entries = self.entries.iter().map(|a| a.frobenius_pow(e)).collect();
        MatrixW {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    /// Exact inverse over the local ring; fails iff the residue matrix is
    /// singular. Gauss-Jordan with unit pivots.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = MatrixW::identity(&self.ring, n);
        for col in 0..n {
            let pivot_row = (col..n).find(|&r| a.get(r, col).is_unit());
            let pivot_row = match pivot_row {
                Some(r) => r,
                None => return Err(Error::NotInvertible),
            };
            if pivot_row != col {
                for j in 0..n {
                    let tmp = a.get(pivot_row, j).clone();
                    a.set(pivot_row, j, a.get(col, j).clone());
                    a.set(col, j, tmp);
                    let tmp = inv.get(pivot_row, j).clone();
                    inv.set(pivot_row, j, inv.get(col, j).clone());
                    inv.set(col, j, tmp);
                }
            }
            let scale = a.get(col, col).unit_inverse()?;
            for j in 0..n {
                a.set(col, j, a.get(col, j).mul(&scale)?);
                inv.set(col, j, inv.get(col, j).mul(&scale)?);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in 0..n {
                    let v = a.get(r, j).sub(&a.get(col, j).mul(&factor)?)?;
                    a.set(r, j, v);
                    let v = inv.get(r, j).sub(&inv.get(col, j).mul(&factor)?)?;
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.residue().rank_over_field() == self.rows
    }

    /// Reduce every entry to length m2.
    pub fn change_precision(&self, m2: u32) -> Result<Self> {
        let target = self.ring.reduce(m2)?;
        let entries = self
            .entries
            .iter()
            .map(|e| e.change_precision(m2))
            .collect::<Result<Vec<_>>>()?;
        MatrixW::new(target, self.rows, self.cols, entries)
    }

    /// The matrix over the residue field W_1.
    pub fn residue(&self) -> Self {
        self.change_precision(1).expect("reduction to length 1")
    }

    /// Rank by Gaussian elimination; valid only over a length-1 ring.
    pub fn rank_over_field(&self) -> usize {
        assert_eq!(self.ring.length(), 1, "rank requires a residue-field matrix");
        let mut a = self.clone();
        let mut rank = 0usize;
        let mut row = 0usize;
        for col in 0..a.cols {
            let pivot = (row..a.rows).find(|&r| !a.get(r, col).is_zero());
            let pivot = match pivot {
                Some(r) => r,
                None => continue,
            };
            if pivot != row {
                for j in 0..a.cols {
                    let tmp = a.get(pivot, j).clone();
                    a.set(pivot, j, a.get(row, j).clone());
                    a.set(row, j, tmp);
                }
            }
            let inv = a.get(row, col).unit_inverse().expect("nonzero field element");
            for j in 0..a.cols {
                a.set(row, j, a.get(row, j).mul(&inv).unwrap());
            }
            for r in 0..a.rows {
                if r == row || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..a.cols {
                    let v = a.get(r, j).sub(&a.get(row, j).mul(&f).unwrap()).unwrap();
                    a.set(r, j, v);
                }
            }
            rank += 1;
            row += 1;
            if row == a.rows {
                break;
            }
        }
        rank
    }

    /// Basis of the right nullspace over the residue field (length-1 ring).
    pub fn nullspace_over_field(&self) -> Vec<Vec<WittElement>> {
        assert_eq!(self.ring.length(), 1, "nullspace requires a residue-field matrix");
        let mut a = self.clone();
        let mut pivot_col_of_row = Vec::new();
        let mut row = 0usize;
        for col in 0..a.cols {
            let pivot = (row..a.rows).find(|&r| !a.get(r, col).is_zero());
            let pivot = match pivot {
                Some(r) => r,
                None => continue,
            };
            if pivot != row {
                for j in 0..a.cols {
                    let tmp = a.get(pivot, j).clone();
                    a.set(pivot, j, a.get(row, j).clone());
                    a.set(row, j, tmp);
                }
            }
            let inv = a.get(row, col).unit_inverse().unwrap();
            for j in 0..a.cols {
                a.set(row, j, a.get(row, j).mul(&inv).unwrap());
            }
            for r in 0..a.rows {
                if r == row || a.get(r, col).is_zero() {
                    continue;
                }
                let f = a.get(r, col).clone();
                for j in 0..a.cols {
                    let v = a.get(r, j).sub(&a.get(row, j).mul(&f).unwrap()).unwrap();
                    a.set(r, j, v);
                }
            }
            pivot_col_of_row.push(col);
            row += 1;
            if row == a.rows {
                break;
            }
        }
        let pivot_cols: std::collections::HashSet<usize> =
            pivot_col_of_row.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..a.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![self.ring.reduce(1).unwrap().zero(); a.cols];
            v[free] = self.ring.reduce(1).unwrap().one();
            for (r, &pc) in pivot_col_of_row.iter().enumerate() {
                v[pc] = a.get(r, free).neg();
            }
            basis.push(v);
        }
        basis
    }

    /// Rank of [self | extra columns] over the residue field, for
    /// column-span comparisons.
    pub fn column_rank_with(&self, extra_cols: &[Vec<WittElement>]) -> usize {
        let cols = self.cols;
        let total = cols + extra_cols.len();
        let aug = Self::from_fn(&self.ring, self.rows, total, |i, j| {
            if j < cols {
                self.get(i, j).clone()
            } else {
                extra_cols[j - cols][i].clone()
            }
        });
        aug.rank_over_field()
    }

    /// Blocks: rows [r0, r1), cols [c0, c1).
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(&self.ring, r1 - r0, c1 - c0, |i, j| {
            self.get(r0 + i, c0 + j).clone()
        })
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &MatrixW) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    /// Canonical key: row-major coefficient stream. Lexicographic order on
    /// keys is the canonical-representative order used by orbit search.
    pub fn canonical_key(&self) -> Vec<u64> {
        let mut key = Vec::with_capacity(self.entries.len() * self.ring.residue_degree());
        for e in &self.entries {
            key.extend_from_slice(e.coefficients());
        }
        key
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixWire {
    ring: RingDescriptor,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Vec<u64>>>,
}

impl Serialize for MatrixW {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).coefficients().to_vec())
                    .collect()
            })
            .collect();
        MatrixWire {
            ring: self.ring.descriptor().clone(),
            rows: self.rows,
            cols: self.cols,
            entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MatrixW {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(d)?;
        let ring = WittRing::new(wire.ring).map_err(D::Error::custom)?;
        if wire.entries.len() != wire.rows {
            return Err(D::Error::custom("row count mismatch"));
        }
        let mut entries = Vec::with_capacity(wire.rows * wire.cols);
        for row in wire.entries {
            if row.len() != wire.cols {
                return Err(D::Error::custom("column count mismatch"));
            }
            for coeffs in row {
                entries.push(ring.element(coeffs).map_err(D::Error::custom)?);
            }
        }
        MatrixW::new(ring, wire.rows, wire.cols, entries).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z4() -> WittRing {
        WittRing::with_default_modulus(2, 1, 2).unwrap()
    }

    #[test]
    fn inverse_of_identity() {
        let r = z4();
        let id = MatrixW::identity(&r, 3);
        assert_eq!(id.inverse().unwrap(), id);
    }

    #[test]
    fn unipotent_inverse_over_z4() {
        // (I + 2E)^2 = I since 4E = 0
        let r = z4();
        let mut a = MatrixW::identity(&r, 2);
        a.set(0, 1, r.from_integer(2));
        assert_eq!(a.inverse().unwrap(), a);
        assert!(a.mul(&a.inverse().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn singular_matrix_rejected() {
        let r = z4();
        let mut a = MatrixW::zero(&r, 2, 2);
        a.set(0, 0, r.from_integer(1));
        a.set(0, 1, r.from_integer(1));
        a.set(1, 0, r.from_integer(3));
        a.set(1, 1, r.from_integer(3));
        assert!(matches!(a.inverse(), Err(Error::NotInvertible)));
        // 2 is nilpotent, not a pivot
        let mut b = MatrixW::identity(&r, 2);
        b.set(1, 1, r.from_integer(2));
        assert!(matches!(b.inverse(), Err(Error::NotInvertible)));
    }

    #[test]
    fn sigma_entrywise_trivial_on_prime_field() {
        let r = z4();
        let mut a = MatrixW::identity(&r, 2);
        a.set(1, 0, r.from_integer(3));
        assert_eq!(a.map_sigma(1), a);
    }

    #[test]
    fn random_inverses_roundtrip() {
        let r = WittRing::with_default_modulus(3, 2, 2).unwrap();
        // a small deterministic family of invertible matrices
        for s in 0..20u64 {
            let a = MatrixW::from_fn(&r, 2, 2, |i, j| {
                let v = (s * 7 + 3 * i as u64 + 5 * j as u64) % 9;
                r.from_integer(v as i64)
            });
            let a = {
                // force invertibility by putting units on the diagonal
                let mut a = a;
                a.set(0, 0, r.from_integer(1));
                a.set(1, 1, r.from_integer(1 + (s % 2) as i64 * 3));
                a
            };
            if !a.is_invertible() {
                continue;
            }
            let inv = a.inverse().unwrap();
            assert!(a.mul(&inv).unwrap().is_identity());
            assert!(inv.mul(&a).unwrap().is_identity());
        }
    }

    #[test]
    fn rank_and_nullspace_over_f4() {
        let r = WittRing::with_default_modulus(2, 2, 1).unwrap();
        let x = r.generator();
        let mut a = MatrixW::zero(&r, 2, 2);
        a.set(0, 0, r.one());
        a.set(0, 1, x.clone());
        a.set(1, 0, x.clone());
        a.set(1, 1, x.mul(&x).unwrap());
        // second row = x * first row, so rank 1
        assert_eq!(a.rank_over_field(), 1);
        let ns = a.nullspace_over_field();
        assert_eq!(ns.len(), 1);
        for v in &ns {
            for i in 0..2 {
                let mut acc = r.zero();
                for j in 0..2 {
                    acc = acc.add(&a.get(i, j).mul(&v[j]).unwrap()).unwrap();
                }
                assert!(acc.is_zero());
            }
        }
    }

    #[test]
    fn serde_roundtrip() {
        let r = WittRing::with_default_modulus(2, 2, 2).unwrap();
        let a = MatrixW::from_fn(&r, 2, 2, |i, j| r.from_integer((i * 2 + j) as i64));
        let json = serde_json::to_string(&a).unwrap();
        let b: MatrixW = serde_json::from_str(&json).unwrap();
        assert_eq!(a, b);
    }
}
