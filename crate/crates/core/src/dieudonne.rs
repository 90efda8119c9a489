//! Sigma-semilinear module truncations: Frobenius/Verschiebung pairs over
//! `W_m(F_q)`, homomorphism modules via linear solving over Z/p^m, exact
//! automorphism counts, and Cartier duality.
//!
//! A truncation is stored by its defining data `(c, d, S, g)`: the base
//! matrix `S` (an invertible matrix realizing the sigma-linear base
//! automorphism) and a twist `g`. Frobenius and Verschiebung matrices are
//! always derived through the integral formulas
//!
//! ```text
//!   A = g * S * diag(1_c, p 1_d)
//!   V = sigma^{-1}( diag(p 1_c, 1_d) * S^{-1} * g^{-1} )
//! ```
//!
//! so no division by p is ever performed and the data is well-defined from
//! residues mod p^m alone. The constructor verifies `A sigma(V) = p I`,
//! `V sigma^{-1}(A) = p I`, the residue ranks, and the level-1 exactness
//! (kernel of Frobenius = image of Verschiebung and vice versa).

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linsolve::{solve_homogeneous, SolutionModule, ZpmContext};
use crate::matrix::MatrixW;
use crate::witt::{RingDescriptor, WittElement, WittRing};

/// A matrix together with a Frobenius twist: the map `y -> M * sigma^e(y)`.
/// Twist +1 models Frobenius-type maps, -1 Verschiebung-type, 0 linear.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiLinearMap {
    pub matrix: MatrixW,
    pub twist: i64,
}

impl SemiLinearMap {
    pub fn apply(&self, v: &[WittElement]) -> Result<Vec<WittElement>> {
        let n = self.matrix.cols();
        if v.len() != n {
            return Err(Error::ShapeMismatch("vector length".into()));
        }
        let ring = self.matrix.ring();
        let mut out = Vec::with_capacity(self.matrix.rows());
        for i in 0..self.matrix.rows() {
            let mut acc = ring.zero();
            for j in 0..n {
                acc = acc.add(&self.matrix.get(i, j).mul(&v[j].frobenius_pow(self.twist))?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Composition `self . other`: the matrix picks up a twisted factor.
    pub fn compose(&self, other: &SemiLinearMap) -> Result<SemiLinearMap> {
        Ok(SemiLinearMap {
            matrix: self.matrix.mul(&other.matrix.map_sigma(self.twist))?,
            twist: self.twist + other.twist,
        })
    }
}

/// A level-m truncation of a sigma-semilinear module of codimension `c`
/// and dimension `d`: coordinates `1..=c` span the conserved block, the
/// last `d` coordinates span the block scaled by p under Frobenius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DieudonneTruncation {
    c: usize,
    d: usize,
    ring: WittRing,
    base: MatrixW,
    twist: MatrixW,
    frobenius: MatrixW,
    verschiebung: MatrixW,
}

/// diag(1_c, p * 1_d)
fn delta(ring: &WittRing, c: usize, d: usize) -> MatrixW {
    let p = ring.from_integer(ring.p() as i64);
    let vals: Vec<WittElement> = (0..c + d)
        .map(|i| if i < c { ring.one() } else { p.clone() })
        .collect();
    MatrixW::diagonal_from(ring, &vals)
}

/// diag(p * 1_c, 1_d)
fn delta_tilde(ring: &WittRing, c: usize, d: usize) -> MatrixW {
    let p = ring.from_integer(ring.p() as i64);
    let vals: Vec<WittElement> = (0..c + d)
        .map(|i| if i < c { p.clone() } else { ring.one() })
        .collect();
    MatrixW::diagonal_from(ring, &vals)
}

pub fn make_truncation(
    c: usize,
    d: usize,
    ring: &WittRing,
    base: MatrixW,
    twist: MatrixW,
) -> Result<DieudonneTruncation> {
    let r = c + d;
    if r == 0 {
        return Err(Error::BadInput("height c + d must be positive".into()));
    }
    for (name, m) in [("base", &base), ("twist", &twist)] {
        if m.rows() != r || m.cols() != r {
            return Err(Error::ShapeMismatch(format!("{} matrix must be {}x{}", name, r, r)));
        }
        if m.ring() != ring {
            return Err(Error::RingMismatch);
        }
    }
    let base_inv = base.inverse()?;
    let twist_inv = twist.inverse()?;

    let frobenius = twist.mul(&base)?.mul(&delta(ring, c, d))?;
    let verschiebung = delta_tilde(ring, c, d)
        .mul(&base_inv)?
        .mul(&twist_inv)?
        .map_sigma(-1);

    let t = DieudonneTruncation {
        c,
        d,
        ring: ring.clone(),
        base,
        twist,
        frobenius,
        verschiebung,
    };
    t.verify_invariants()?;
    Ok(t)
}

impl DieudonneTruncation {
    pub fn codimension(&self) -> usize {
        self.c
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn height(&self) -> usize {
        self.c + self.d
    }

    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn base(&self) -> &MatrixW {
        &self.base
    }

    pub fn twist(&self) -> &MatrixW {
        &self.twist
    }

    pub fn frobenius_matrix(&self) -> &MatrixW {
        &self.frobenius
    }

    pub fn verschiebung_matrix(&self) -> &MatrixW {
        &self.verschiebung
    }

    pub fn frobenius_map(&self) -> SemiLinearMap {
        SemiLinearMap {
            matrix: self.frobenius.clone(),
            twist: 1,
        }
    }

    pub fn verschiebung_map(&self) -> SemiLinearMap {
        SemiLinearMap {
            matrix: self.verschiebung.clone(),
            twist: -1,
        }
    }

    fn verify_invariants(&self) -> Result<()> {
        let r = self.height();
        let p_identity = MatrixW::identity(&self.ring, r)
            .scale(&self.ring.from_integer(self.ring.p() as i64))?;
        let fv = self.frobenius.mul(&self.verschiebung.map_sigma(1))?;
        if fv != p_identity {
            return Err(Error::InvariantViolation(
                "A * sigma(V) != p * I".into(),
            ));
        }
        let vf = self.verschiebung.mul(&self.frobenius.map_sigma(-1))?;
        if vf != p_identity {
            return Err(Error::InvariantViolation(
                "V * sigma^{-1}(A) != p * I".into(),
            ));
        }
        let abar = self.frobenius.residue();
        let vbar = self.verschiebung.residue();
        if abar.rank_over_field() != self.c {
            return Err(Error::InvariantViolation(format!(
                "residue rank of Frobenius is not c = {}",
                self.c
            )));
        }
        if vbar.rank_over_field() != self.d {
            return Err(Error::InvariantViolation(format!(
                "residue rank of Verschiebung is not d = {}",
                self.d
            )));
        }
        // level-1 exactness: ker(Frobenius) = im(Verschiebung) and dually.
        // ker of v -> Abar sigma(v) is sigma^{-1}(nullspace(Abar)); the image
        // of w -> Vbar sigma^{-1}(w) is the column space of Vbar.
        let ker_f: Vec<Vec<WittElement>> = abar
            .nullspace_over_field()
            .into_iter()
            .map(|v| v.into_iter().map(|e| e.frobenius_pow(-1)).collect())
            .collect();
        if ker_f.len() != self.d
            || vbar.column_rank_with(&ker_f) != self.d
        {
            return Err(Error::InvariantViolation(
                "ker(Frobenius) != im(Verschiebung) at level 1".into(),
            ));
        }
        let ker_v: Vec<Vec<WittElement>> = vbar
            .nullspace_over_field()
            .into_iter()
            .map(|v| v.into_iter().map(|e| e.frobenius_pow(1)).collect())
            .collect();
        if ker_v.len() != self.c
            || abar.column_rank_with(&ker_v) != self.c
        {
            return Err(Error::InvariantViolation(
                "ker(Verschiebung) != im(Frobenius) at level 1".into(),
            ));
        }
        Ok(())
    }

    /// Matrix of the j-fold Frobenius composite:
    /// `A * sigma(A) * ... * sigma^(j-1)(A)`. For `j = n` this is a linear
    /// map (sigma^n is the identity).
    pub fn linearize(&self, j: u32) -> Result<MatrixW> {
        if j == 0 {
            return Err(Error::BadInput("linearize requires j >= 1".into()));
        }
        let mut acc = self.frobenius.clone();
        for t in 1..j {
            acc = acc.mul(&self.frobenius.map_sigma(t as i64))?;
        }
        Ok(acc)
    }

    /// Rebuild the truncation at a lower length.
    pub fn change_precision(&self, m2: u32) -> Result<DieudonneTruncation> {
        let ring2 = self.ring.reduce(m2)?;
        make_truncation(
            self.c,
            self.d,
            &ring2,
            self.base.change_precision(m2)?,
            self.twist.change_precision(m2)?,
        )
    }

    /// Cartier dual: (c, d) swap with Frobenius `tr(sigma(V))` and
    /// Verschiebung `tr(sigma^{-1}(A))`, reindexed so the conserved block
    /// comes first. Realized through defining data so the constructor
    /// re-verifies every invariant.
    pub fn cartier_dual(&self) -> Result<DieudonneTruncation> {
        let r = self.height();
        let ring = &self.ring;
        // block-swap permutation: new order = (old c+1..r, old 1..c)
        let rho: Vec<usize> = (0..r).map(|i| (i + self.c) % r).collect();
        let p_rho = MatrixW::permutation(ring, &rho);
        let p_rho_inv = p_rho.inverse()?;

        let gs_inv_t = self.twist.mul(&self.base)?.inverse()?.transpose();
        let new_base = p_rho_inv.mul(&gs_inv_t)?.mul(&p_rho)?;
        let dual = make_truncation(self.d, self.c, ring, new_base, MatrixW::identity(ring, r))?;

        // contract: the dual pair is the transposed, sigma-shifted original
        let want_a = p_rho_inv
            .mul(&self.verschiebung.map_sigma(1).transpose())?
            .mul(&p_rho)?;
        if dual.frobenius != want_a {
            return Err(Error::InvariantViolation(
                "dual Frobenius does not match transpose(sigma(V))".into(),
            ));
        }
        let want_v = p_rho_inv
            .mul(&self.frobenius.map_sigma(-1).transpose())?
            .mul(&p_rho)?;
        if dual.verschiebung != want_v {
            return Err(Error::InvariantViolation(
                "dual Verschiebung does not match transpose(sigma^{-1}(A))".into(),
            ));
        }
        Ok(dual)
    }
}

#[derive(Serialize, Deserialize)]
struct TruncationWire {
    c: usize,
    d: usize,
    ring: RingDescriptor,
    #[serde(rename = "S")]
    base: MatrixW,
    g: MatrixW,
}

impl Serialize for DieudonneTruncation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TruncationWire {
            c: self.c,
            d: self.d,
            ring: self.ring.descriptor().clone(),
            base: self.base.clone(),
            g: self.twist.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DieudonneTruncation {
    /// Frobenius and Verschiebung are recomputed on load and every type
    /// invariant is re-verified.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = TruncationWire::deserialize(d)?;
        let ring = WittRing::new(wire.ring).map_err(D::Error::custom)?;
        if wire.base.ring() != &ring || wire.g.ring() != &ring {
            return Err(D::Error::custom("S and g must live over the stated ring"));
        }
        make_truncation(wire.c, wire.d, &ring, wire.base, wire.g).map_err(D::Error::custom)
    }
}

/// The module of homomorphisms between two truncations: matrices `x` with
/// `x A1 = A2 sigma(x)` and `x V1 = V2 sigma^{-1}(x)`. Both conditions are
/// imposed; neither implies the other at finite level.
pub struct HomModule {
    pub module: SolutionModule,
    ring: WittRing,
    r: usize,
}

impl HomModule {
    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn matrix_from_flat(&self, flat: &[u64]) -> MatrixW {
        let n = self.ring.residue_degree();
        let r = self.r;
        MatrixW::from_fn(&self.ring, r, r, |i, j| {
            let base = (i * r + j) * n;
            self.ring
                .element(flat[base..base + n].to_vec())
                .expect("canonical solver output")
        })
    }

    pub fn cardinality(&self) -> u128 {
        self.module.cardinality()
    }

    /// Every solution matrix, in solver order.
    pub fn solutions(&self, cap: u64) -> Result<Vec<MatrixW>> {
        Ok(self
            .module
            .enumerate(cap)?
            .map(|flat| self.matrix_from_flat(&flat))
            .collect())
    }

    /// Solutions invertible mod p: the automorphism set when both sides
    /// coincide.
    pub fn invertible_solutions(&self, cap: u64) -> Result<Vec<MatrixW>> {
        Ok(self
            .solutions(cap)?
            .into_iter()
            .filter(|x| x.residue().rank_over_field() == self.r)
            .collect())
    }
}

/// Flattened index of coefficient `l` of entry `(i, j)`.
fn flat_idx(r: usize, n: usize, i: usize, j: usize, l: usize) -> usize {
    (i * r + j) * n + l
}

pub fn hom_module(d1: &DieudonneTruncation, d2: &DieudonneTruncation) -> Result<HomModule> {
    if d1.ring != d2.ring {
        return Err(Error::RingMismatch);
    }
    if d1.height() != d2.height() {
        return Err(Error::ShapeMismatch("hom requires equal heights".into()));
    }
    let ring = &d1.ring;
    let r = d1.height();
    let n = ring.residue_degree();
    let unknowns = r * r * n;
    let ctx = ZpmContext::new(ring.p(), ring.length());

    let sigma_fwd = ring.sigma_matrix(1);
    let sigma_inv = ring.sigma_matrix(-1);

    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(2 * unknowns);
    // one block of conditions per (semilinear pair); for x A1 = A2 sigma(x):
    // entry (i,j): sum_k x_{ik} A1_{kj} - sum_k A2_{ik} sigma(x_{kj}) = 0
    let mut push_conditions = |m1: &MatrixW, m2: &MatrixW, twist: &Vec<Vec<u64>>| -> Result<()> {
        for i in 0..r {
            for j in 0..r {
                let mut block_rows = vec![vec![0u64; unknowns]; n];
                for k in 0..r {
                    let mul_a1 = ring.mul_matrix(m1.get(k, j))?;
                    for t in 0..n {
                        for l in 0..n {
                            let idx = flat_idx(r, n, i, k, l);
                            block_rows[t][idx] =
                                (block_rows[t][idx] + mul_a1[t][l]) % ctx.pm;
                        }
                    }
                    let mul_a2 = ring.mul_matrix(m2.get(i, k))?;
                    // compose multiplication with the twist matrix
                    for t in 0..n {
                        for l in 0..n {
                            let mut acc = 0u128;
                            for s in 0..n {
                                acc += mul_a2[t][s] as u128 * twist[s][l] as u128;
                            }
                            let idx = flat_idx(r, n, k, j, l);
                            let sub = (acc % ctx.pm as u128) as u64;
                            block_rows[t][idx] =
                                (block_rows[t][idx] + ctx.pm - sub) % ctx.pm;
                        }
                    }
                }
                rows.extend(block_rows);
            }
        }
        Ok(())
    };
    push_conditions(&d1.frobenius, &d2.frobenius, &sigma_fwd)?;
    push_conditions(&d1.verschiebung, &d2.verschiebung, &sigma_inv)?;

    let module = solve_homogeneous(ctx, &rows, unknowns);
    Ok(HomModule {
        module,
        ring: ring.clone(),
        r,
    })
}

/// Number of invertible endomorphism solutions: the point count of the
/// automorphism group of the truncation over F_q.
pub fn aut_count(d: &DieudonneTruncation, cap: u64) -> Result<u64> {
    let endos = hom_module(d, d)?;
    let r = d.height();
    let mut count = 0u64;
    for flat in endos.module.enumerate(cap)? {
        let x = endos.matrix_from_flat(&flat);
        if x.residue().rank_over_field() == r {
            count += 1;
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witt::WittRing;

    fn zpm(p: u64, m: u32) -> WittRing {
        WittRing::with_default_modulus(p, 1, m).unwrap()
    }

    fn ordinary(ring: &WittRing) -> DieudonneTruncation {
        let id = MatrixW::identity(ring, 2);
        make_truncation(1, 1, ring, id.clone(), id).unwrap()
    }

    fn supersingular(ring: &WittRing) -> DieudonneTruncation {
        let s = MatrixW::permutation(ring, &[1, 0]);
        make_truncation(1, 1, ring, s, MatrixW::identity(ring, 2)).unwrap()
    }

    #[test]
    fn ordinary_base_matrices() {
        let ring = zpm(2, 2);
        let t = ordinary(&ring);
        let p = ring.from_integer(2);
        let want_a = MatrixW::diagonal_from(&ring, &[ring.one(), p.clone()]);
        let want_v = MatrixW::diagonal_from(&ring, &[p, ring.one()]);
        assert_eq!(*t.frobenius_matrix(), want_a);
        assert_eq!(*t.verschiebung_matrix(), want_v);
    }

    #[test]
    fn supersingular_base_matrices() {
        // direct matrix-product oracle for A = [[0,p],[1,0]]
        let ring = zpm(3, 2);
        let t = supersingular(&ring);
        let a = t.frobenius_matrix();
        assert!(a.get(0, 0).is_zero());
        assert_eq!(*a.get(0, 1), ring.from_integer(3));
        assert!(a.get(1, 0).is_one());
        assert!(a.get(1, 1).is_zero());
        // A * sigma(V) = p I rechecked by hand here
        let prod = a.mul(&t.verschiebung_matrix().map_sigma(1)).unwrap();
        let p_id = MatrixW::identity(&ring, 2)
            .scale(&ring.from_integer(3))
            .unwrap();
        assert_eq!(prod, p_id);
    }

    #[test]
    fn linearize_examples() {
        let ring = zpm(2, 3);
        let t = supersingular(&ring);
        assert_eq!(t.linearize(1).unwrap(), *t.frobenius_matrix());
        // n = 1: squaring the supersingular base gives p * I
        let sq = t.linearize(2).unwrap();
        let p_id = MatrixW::identity(&ring, 2)
            .scale(&ring.from_integer(2))
            .unwrap();
        assert_eq!(sq, p_id);
    }

    #[test]
    fn semilinear_apply_twists_the_argument() {
        let ring = WittRing::with_default_modulus(2, 2, 2).unwrap();
        let t = {
            let s = MatrixW::permutation(&ring, &[1, 0]);
            make_truncation(1, 1, &ring, s, MatrixW::identity(&ring, 2)).unwrap()
        };
        let f = t.frobenius_map();
        let x = ring.generator();
        let v = vec![x.clone(), ring.zero()];
        // A = [[0,p],[1,0]]: applying to (x, 0) gives (0, sigma(x))
        let out = f.apply(&v).unwrap();
        assert!(out[0].is_zero());
        assert_eq!(out[1], x.frobenius());
    }

    #[test]
    fn semilinear_composition_is_multiplication_by_p() {
        let ring = WittRing::with_default_modulus(2, 2, 2).unwrap();
        let s = MatrixW::permutation(&ring, &[1, 0]);
        let t = make_truncation(1, 1, &ring, s, MatrixW::identity(&ring, 2)).unwrap();
        let fv = t.frobenius_map().compose(&t.verschiebung_map()).unwrap();
        assert_eq!(fv.twist, 0);
        let p_id = MatrixW::identity(&ring, 2)
            .scale(&ring.from_integer(2))
            .unwrap();
        assert_eq!(fv.matrix, p_id);
    }

    #[test]
    fn hom_module_ordinary_brute_force() {
        // independent oracle: filter all 2x2 matrices over F_p directly
        for p in [2u64, 3] {
            let ring = zpm(p, 1);
            let t = ordinary(&ring);
            let a = t.frobenius_matrix();
            let v = t.verschiebung_matrix();
            let mut brute = Vec::new();
            let elems: Vec<_> = ring
                .enumerate(crate::witt::EnumerationFilter::All, 100)
                .unwrap()
                .collect();
            for e00 in &elems {
                for e01 in &elems {
                    for e10 in &elems {
                        for e11 in &elems {
                            let x = MatrixW::new(
                                ring.clone(),
                                2,
                                2,
                                vec![e00.clone(), e01.clone(), e10.clone(), e11.clone()],
                            )
                            .unwrap();
                            let c1 = x.mul(a).unwrap() == a.mul(&x.map_sigma(1)).unwrap();
                            let c2 = x.mul(v).unwrap() == v.mul(&x.map_sigma(-1)).unwrap();
                            if c1 && c2 {
                                brute.push(x);
                            }
                        }
                    }
                }
            }
            assert_eq!(brute.len() as u128, (p * p) as u128);
            let hom = hom_module(&t, &t).unwrap();
            assert_eq!(hom.cardinality(), (p * p) as u128);
            let sols = hom.solutions(1 << 20).unwrap();
            for x in &sols {
                assert!(brute.contains(x));
            }
            // solutions are diagonal
            for x in &sols {
                assert!(x.get(0, 1).is_zero() && x.get(1, 0).is_zero());
            }
            assert_eq!(aut_count(&t, 1 << 20).unwrap(), (p - 1) * (p - 1));
        }
    }

    #[test]
    fn aut_count_supersingular_level_one() {
        let ring = zpm(2, 1);
        let t = supersingular(&ring);
        assert_eq!(aut_count(&t, 1 << 20).unwrap(), 2);
    }

    #[test]
    fn scalars_always_act() {
        let ring = WittRing::with_default_modulus(2, 2, 2).unwrap();
        let t = supersingular_ext(&ring);
        let count = aut_count(&t, 1 << 22).unwrap();
        assert!(count as u128 >= ring.unit_count());
        fn supersingular_ext(ring: &WittRing) -> DieudonneTruncation {
            let s = MatrixW::permutation(ring, &[1, 0]);
            make_truncation(1, 1, ring, s, MatrixW::identity(ring, 2)).unwrap()
        }
    }

    #[test]
    fn residue_of_homs_normalizes_kernel_block() {
        // x mod p must map the kernel block into itself: lower-left
        // block-triangular shape in these coordinates
        let ring = zpm(2, 2);
        for t in [ordinary(&ring), supersingular(&ring)] {
            let hom = hom_module(&t, &t).unwrap();
            for x in hom.solutions(1 << 20).unwrap() {
                let xb = x.residue();
                assert!(xb.get(0, 1).is_zero(), "upper-right residue must vanish");
            }
        }
    }

    #[test]
    fn hom_cardinality_is_conjugation_invariant() {
        let ring = zpm(2, 2);
        let t1 = supersingular(&ring);
        // conjugate the defining data by a fixed invertible matrix:
        // replace twist g by  h g sigma_phi(h)^{-1}-style change of basis is
        // downstream; here we check Hom against the unchanged module after
        // tweaking g by a unipotent that fixes the module up to isomorphism
        let mut u = MatrixW::identity(&ring, 2);
        u.set(1, 0, ring.from_integer(2));
        // g' = u: a different point of the same orbit need not be
        // isomorphic; this test only checks invariance under simultaneous
        // base change of BOTH sides, which must hold on the nose.
        let s = MatrixW::permutation(&ring, &[1, 0]);
        let t2 = make_truncation(1, 1, &ring, s, u).unwrap();
        let h11 = hom_module(&t1, &t1).unwrap().cardinality();
        let h22 = hom_module(&t2, &t2).unwrap().cardinality();
        let h12 = hom_module(&t1, &t2).unwrap().cardinality();
        let h21 = hom_module(&t2, &t1).unwrap().cardinality();
        // duality oracle: Hom(D1, D2) and Hom(dual D2, dual D1) agree
        let dual_h12 = hom_module(&t2.cartier_dual().unwrap(), &t1.cartier_dual().unwrap())
            .unwrap()
            .cardinality();
        assert_eq!(h12, dual_h12);
        let dual_h21 = hom_module(&t1.cartier_dual().unwrap(), &t2.cartier_dual().unwrap())
            .unwrap()
            .cardinality();
        assert_eq!(h21, dual_h21);
        let _ = (h11, h22);
    }

    #[test]
    fn cartier_dual_contracts() {
        let ring = zpm(2, 2);
        for t in [ordinary(&ring), supersingular(&ring)] {
            let dual = t.cartier_dual().unwrap();
            assert_eq!(dual.codimension(), t.dimension());
            assert_eq!(dual.dimension(), t.codimension());
            // aut preserved under duality
            assert_eq!(
                aut_count(&t, 1 << 20).unwrap(),
                aut_count(&dual, 1 << 20).unwrap()
            );
            // double dual is isomorphic: an invertible hom exists
            let dd = dual.cartier_dual().unwrap();
            let hom = hom_module(&t, &dd).unwrap();
            assert!(!hom.invertible_solutions(1 << 20).unwrap().is_empty());
        }
    }

    #[test]
    fn serde_recomputes_and_reverifies() {
        let ring = WittRing::with_default_modulus(2, 2, 2).unwrap();
        let s = MatrixW::permutation(&ring, &[1, 0]);
        let t = make_truncation(1, 1, &ring, s, MatrixW::identity(&ring, 2)).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"S\":"));
        assert!(!json.contains("frobenius"), "derived maps are not serialized");
        let back: DieudonneTruncation = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        // a tampered document with a singular twist is rejected on load
        let bad = json.replace(
            "\"g\":{\"ring\":{\"p\":2,\"n\":2,\"m\":2,\"modulus\":[1,1]},\"rows\":2,\"cols\":2,\"entries\":[[[1,0],[0,0]],[[0,0],[1,0]]]}",
            "\"g\":{\"ring\":{\"p\":2,\"n\":2,\"m\":2,\"modulus\":[1,1]},\"rows\":2,\"cols\":2,\"entries\":[[[2,0],[0,0]],[[0,0],[1,0]]]}",
        );
        assert_ne!(bad, json, "tamper target must match the emitted layout");
        assert!(serde_json::from_str::<DieudonneTruncation>(&bad).is_err());
    }

    #[test]
    fn level_m_solutions_reduce_to_level_lower() {
        let ring = zpm(2, 2);
        let t = supersingular(&ring);
        let t1 = t.change_precision(1).unwrap();
        let hom2 = hom_module(&t, &t).unwrap();
        let a1 = t1.frobenius_matrix();
        let v1 = t1.verschiebung_matrix();
        for x in hom2.solutions(1 << 20).unwrap() {
            let xr = x.change_precision(1).unwrap();
            assert_eq!(xr.mul(a1).unwrap(), a1.mul(&xr.map_sigma(1)).unwrap());
            assert_eq!(xr.mul(v1).unwrap(), v1.mul(&xr.map_sigma(-1)).unwrap());
        }
    }
}
