//! Kraft normal forms of level-1 truncations as permutation data, and the
//! combinatorial computation of the level-1 automorphism dimension.
//!
//! A datum `(r, c, pi)` encodes the semilinear structure on a basis
//! `e_1..e_r`: Frobenius sends `e_i` to `e_{pi(i)}` for `i <= c` and to 0
//! otherwise; Verschiebung sends `e_{pi(i)}` to `e_i` for `i > c` and to 0
//! otherwise. Index pairs split into the positive region (j <= c < i), the
//! neutral region (both sides of the cut), and the negative region
//! (i <= c < j). The level-1 automorphism dimension is the number of
//! negative pairs whose pi-orbit first re-enters the non-neutral regions
//! on the positive side.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dieudonne::{make_truncation, DieudonneTruncation};
use crate::error::{Error, Result};
use crate::matrix::MatrixW;
use crate::witt::WittRing;

/// Region of an index pair relative to the cut `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    /// j <= c < i
    Positive,
    /// both <= c or both > c
    Neutral,
    /// i <= c < j
    Negative,
}

/// Classify a 1-indexed pair.
pub fn classify(c: usize, i: usize, j: usize) -> PairClass {
    let i_low = i <= c;
    let j_low = j <= c;
    match (i_low, j_low) {
        (false, true) => PairClass::Positive,
        (true, false) => PairClass::Negative,
        _ => PairClass::Neutral,
    }
}

/// Permutation normal form of a level-1 truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KraftDatum {
    r: usize,
    c: usize,
    /// 0-indexed image list: pi[i] is the image of index i.
    pi: Vec<usize>,
}

impl KraftDatum {
    /// `pi` is the 1-indexed image list; degenerate cuts `c = 0` and
    /// `c = r` are allowed (purely etale / multiplicative pieces).
    pub fn new(r: usize, c: usize, pi_one_indexed: &[usize]) -> Result<Self> {
        if r == 0 {
            return Err(Error::BadInput("height r must be >= 1".into()));
        }
        if c > r {
            return Err(Error::BadInput(format!("cut c = {} exceeds r = {}", c, r)));
        }
        if pi_one_indexed.len() != r {
            return Err(Error::BadInput("permutation length must equal r".into()));
        }
        let mut seen = vec![false; r];
        let mut pi = Vec::with_capacity(r);
        for &img in pi_one_indexed {
            if img == 0 || img > r {
                return Err(Error::BadInput(format!("image {} out of range 1..={}", img, r)));
            }
            if seen[img - 1] {
                return Err(Error::BadInput("permutation is not a bijection".into()));
            }
            seen[img - 1] = true;
            pi.push(img - 1);
        }
        Ok(KraftDatum { r, c, pi })
    }

    pub fn height(&self) -> usize {
        self.r
    }

    pub fn cut(&self) -> usize {
        self.c
    }

    pub fn dimension(&self) -> usize {
        self.r - self.c
    }

    /// 1-indexed image list.
    pub fn pi_one_indexed(&self) -> Vec<usize> {
        self.pi.iter().map(|&x| x + 1).collect()
    }

    fn apply(&self, i: usize) -> usize {
        // 1-indexed in, 1-indexed out
        self.pi[i - 1] + 1
    }

    /// All pairs in the negative region, ascending.
    pub fn negative_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 1..=self.c {
            for j in self.c + 1..=self.r {
                out.push((i, j));
            }
        }
        out
    }

    /// First return step of a negative pair to the non-neutral regions:
    /// the smallest nu >= 1 with `(pi^nu(i), pi^nu(j))` positive or
    /// negative. Exists because the pair orbit is periodic and passes
    /// through the starting pair again.
    pub fn nu_pi(&self, i: usize, j: usize) -> Result<u32> {
        if classify(self.c, i, j) != PairClass::Negative {
            return Err(Error::PairNotInJMinus { i, j });
        }
        let bound = (self.r * self.r + 1) as u32;
        let (mut a, mut b) = (i, j);
        for nu in 1..=bound {
            a = self.apply(a);
            b = self.apply(b);
            if classify(self.c, a, b) != PairClass::Neutral {
                return Ok(nu);
            }
        }
        Err(Error::InvariantViolation(
            "pair orbit failed to leave the neutral region within its period".into(),
        ))
    }

    /// Negative pairs whose first return lands on the positive side.
    pub fn j_minus_pi(&self) -> Vec<(usize, usize)> {
        self.negative_pairs()
            .into_iter()
            .filter(|&(i, j)| {
                let nu = self.nu_pi(i, j).expect("pair from the negative region");
                let mut a = i;
                let mut b = j;
                for _ in 0..nu {
                    a = self.apply(a);
                    b = self.apply(b);
                }
                classify(self.c, a, b) == PairClass::Positive
            })
            .collect()
    }

    /// Dimension of the level-1 automorphism group.
    pub fn gamma1(&self) -> usize {
        self.j_minus_pi().len()
    }

    /// Dimension of the level-1 orbit: r^2 - gamma1.
    pub fn dim_orbit1(&self) -> usize {
        self.r * self.r - self.gamma1()
    }

    /// Number of indices i <= c with pi(i) > c; the dimension of
    /// ker(Frobenius) meet ker(Verschiebung) at level 1.
    pub fn a_number(&self) -> usize {
        (1..=self.c).filter(|&i| self.apply(i) > self.c).count()
    }

    /// The matrix model: base = permutation matrix of pi, twist as given
    /// (identity by default).
    pub fn to_truncation(
        &self,
        ring: &WittRing,
        twist: Option<MatrixW>,
    ) -> Result<DieudonneTruncation> {
        let base = MatrixW::permutation(ring, &self.pi);
        let g = twist.unwrap_or_else(|| MatrixW::identity(ring, self.r));
        make_truncation(self.c, self.dimension(), ring, base, g)
    }

    /// Conjugate by a permutation `tau` (1-indexed) that preserves the
    /// blocks {1..c} and {c+1..r}. Used by invariance tests.
    pub fn relabel(&self, tau_one_indexed: &[usize]) -> Result<KraftDatum> {
        if tau_one_indexed.len() != self.r {
            return Err(Error::BadInput("relabeling length must equal r".into()));
        }
        for (i, &t) in tau_one_indexed.iter().enumerate() {
            let i = i + 1;
            if (i <= self.c) != (t <= self.c) {
                return Err(Error::BadInput(
                    "relabeling must preserve the two index blocks".into(),
                ));
            }
        }
        // new_pi = tau . pi . tau^{-1}
        let mut tau_inv = vec![0usize; self.r];
        for (i, &t) in tau_one_indexed.iter().enumerate() {
            tau_inv[t - 1] = i + 1;
        }
        let new_pi: Vec<usize> = (1..=self.r)
            .map(|i| tau_one_indexed[self.apply(tau_inv[i - 1]) - 1])
            .collect();
        KraftDatum::new(self.r, self.c, &new_pi)
    }
}

/// The isoclinic datum of a coprime pair: `pi` is the shift by d on
/// `Z/(c + d)`.
pub fn minimal_datum(c: u64, d: u64) -> Result<KraftDatum> {
    if c + d == 0 {
        return Err(Error::BadInput("c + d must be positive".into()));
    }
    if num::integer::gcd(c, d) != 1 {
        return Err(Error::NotCoprime { c, d });
    }
    let r = (c + d) as usize;
    let pi: Vec<usize> = (1..=r)
        .map(|i| ((i as u64 + d - 1) % r as u64 + 1) as usize)
        .collect();
    KraftDatum::new(r, c as usize, &pi)
}

/// Direct sum with the fixed relabeling: first summand's low indices, then
/// the second's, then the two high blocks in the same order.
pub fn direct_sum(a: &KraftDatum, b: &KraftDatum) -> KraftDatum {
    let r = a.r + b.r;
    let c = a.c + b.c;
    // position of an index of summand a (1-indexed) in the sum
    let map_a = |i: usize| -> usize {
        if i <= a.c {
            i
        } else {
            c + (i - a.c)
        }
    };
    let map_b = |j: usize| -> usize {
        if j <= b.c {
            a.c + j
        } else {
            c + a.dimension() + (j - b.c)
        }
    };
    let mut pi = vec![0usize; r];
    for i in 1..=a.r {
        pi[map_a(i) - 1] = map_a(a.apply(i));
    }
    for j in 1..=b.r {
        pi[map_b(j) - 1] = map_b(b.apply(j));
    }
    KraftDatum::new(r, c, &pi).expect("disjoint relabeled union is a bijection")
}

#[derive(Serialize, Deserialize)]
struct KraftWire {
    r: usize,
    c: usize,
    pi: Vec<usize>,
}

impl Serialize for KraftDatum {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KraftWire {
            r: self.r,
            c: self.c,
            pi: self.pi_one_indexed(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KraftDatum {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let wire = KraftWire::deserialize(d)?;
        KraftDatum::new(wire.r, wire.c, &wire.pi).map_err(D::Error::custom)
    }
}
