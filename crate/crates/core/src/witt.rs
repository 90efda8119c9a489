//! Exact arithmetic in truncated Witt rings `W_m(F_{p^n})`.
//!
//! The ring is realized as the unramified extension `(Z/p^m)[x]/(f)` where
//! `f` is a monic degree-`n` lift of a polynomial irreducible mod `p`.
//! Elements are coefficient vectors of length `n` with entries in
//! `[0, p^m)`, lowest degree first; this canonical encoding doubles as the
//! serialization format and as the key order for canonical representatives
//! downstream.
//!
//! The Frobenius automorphism is the unique ring automorphism fixing
//! `Z/p^m` and reducing to `a -> a^p` on the residue field. It is computed
//! once per ring by Hensel-lifting the root of `f` congruent to
//! `x^p mod p`; applying it to an element is evaluation at that root.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable description of a ring `W_m(F_{p^n})`.
///
/// `modulus` holds the `n` low coefficients of the monic defining
/// polynomial, each in `[0, p^m)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingDescriptor {
    pub p: u64,
    pub n: usize,
    pub m: u32,
    pub modulus: Vec<u64>,
}

#[derive(Debug)]
struct RingInner {
    desc: RingDescriptor,
    /// p^m, the coefficient modulus. Bounded by 2^31 at construction.
    pm: u64,
    /// Coefficients of `x^n mod f`, i.e. the negated low part of `f`.
    neg_xn: Vec<u64>,
    /// Image of the generator under Frobenius (Hensel-lifted root of `f`).
    sigma_gen: Vec<u64>,
}

/// Shared handle to a truncated Witt ring. Cheap to clone; all state is
/// immutable after construction.
#[derive(Clone)]
pub struct WittRing {
    inner: Arc<RingInner>,
}

impl fmt::Debug for WittRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.inner.desc;
        write!(f, "W_{}(F_{}^{})", d.m, d.p, d.n)
    }
}

impl PartialEq for WittRing {
    fn eq(&self, other: &Self) -> bool {
        self.inner.desc == other.inner.desc
    }
}
impl Eq for WittRing {}

/// One element of a `WittRing`. Always in canonical form.
#[derive(Clone, PartialEq, Eq)]
pub struct WittElement {
    ring: WittRing,
    coeffs: Vec<u64>,
}

impl fmt::Debug for WittElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

// ---------------------------------------------------------------------------
// integer and F_p[x] helpers

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d.checked_mul(d).is_some_and(|dd| dd <= p) {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn fp_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn fp_rem(a: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    // f monic (leading coefficient 1 after normalization by caller).
    let mut r: Vec<u64> = a.to_vec();
    fp_trim(&mut r);
    let df = f.len() - 1;
    while r.len() > df {
        let lead = *r.last().unwrap() % p;
        let shift = r.len() - 1 - df;
        if lead != 0 {
            for i in 0..df {
                let sub = (lead as u128 * f[i] as u128 % p as u128) as u64;
                let idx = shift + i;
                r[idx] = (r[idx] + p - sub % p) % p;
            }
        }
        r.pop();
        fp_trim(&mut r);
    }
    r
}

fn fp_mulmod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u128 + ai as u128 * bj as u128) % p as u128) as u64;
        }
    }
    fp_rem(&prod, f, p)
}

/// x^(p^k) mod f over F_p, by square-and-multiply on the exponent.
fn fp_frobenius_power(f: &[u64], p: u64, k: u32) -> Vec<u64> {
    let mut exp: u128 = 1;
    for _ in 0..k {
        exp = exp.checked_mul(p as u128).expect("exponent overflow");
    }
    let mut base = fp_rem(&[0, 1], f, p);
    let mut acc = vec![1u64];
    while exp > 0 {
        if exp & 1 == 1 {
            acc = fp_mulmod(&acc, &base, f, p);
        }
        base = fp_mulmod(&base, &base, f, p);
        exp >>= 1;
    }
    acc
}

fn fp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    fp_trim(&mut a);
    fp_trim(&mut b);
    while !b.is_empty() {
        // make b monic before taking remainders
        let lead = *b.last().unwrap();
        let inv = mod_inverse_prime(lead, p);
        let monic: Vec<u64> = b
            .iter()
            .map(|&c| (c as u128 * inv as u128 % p as u128) as u64)
            .collect();
        let r = fp_rem(&a, &monic, p);
        a = b;
        b = r;
    }
    a
}

fn mod_inverse_prime(a: u64, p: u64) -> u64 {
    // Fermat
    let mut acc: u64 = 1;
    let mut base = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Irreducibility over F_p via the Rabin test.
fn fp_is_irreducible(f: &[u64], p: u64) -> bool {
    let n = (f.len() - 1) as u32;
    if n == 0 {
        return false;
    }
    // x^(p^n) == x mod f
    let xpn = fp_frobenius_power(f, p, n);
    let x = fp_rem(&[0, 1], f, p);
    if xpn != x {
        return false;
    }
    // for each prime l | n: gcd(x^(p^(n/l)) - x, f) must be constant
    let mut nn = n;
    let mut l = 2u32;
    let mut prime_divisors = vec![];
    while l * l <= nn {
        if nn.is_multiple_of(l) {
            prime_divisors.push(l);
            while nn.is_multiple_of(l) {
                nn /= l;
            }
        }
        l += 1;
    }
    if nn > 1 {
        prime_divisors.push(nn);
    }
    for l in prime_divisors {
        let mut h = fp_frobenius_power(f, p, n / l);
        // h - x
        if h.len() < 2 {
            h.resize(2, 0);
        }
        h[1] = (h[1] + p - 1) % p;
        fp_trim(&mut h);
        let g = fp_gcd(f, &h, p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// raw coefficient-vector arithmetic

fn raw_add(r: &RingInner, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter().zip(b).map(|(&x, &y)| (x + y) % r.pm).collect()
}

fn raw_sub(r: &RingInner, a: &[u64], b: &[u64]) -> Vec<u64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x + r.pm - y) % r.pm)
        .collect()
}

fn raw_neg(r: &RingInner, a: &[u64]) -> Vec<u64> {
    a.iter().map(|&x| (r.pm - x) % r.pm).collect()
}

fn raw_mul(r: &RingInner, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = r.desc.n;
    let pm = r.pm as u128;
    let mut acc = vec![0u128; 2 * n - 1];
    for i in 0..n {
        if a[i] == 0 {
            continue;
        }
        for j in 0..n {
            acc[i + j] = (acc[i + j] + a[i] as u128 * b[j] as u128) % pm;
        }
    }
    // fold x^k = x^(k-n) * (x^n mod f) from the top down
    for k in (n..2 * n - 1).rev() {
        let c = acc[k];
        acc[k] = 0;
        if c == 0 {
            continue;
        }
        for i in 0..n {
            if r.neg_xn[i] == 0 {
                continue;
            }
            acc[k - n + i] = (acc[k - n + i] + c * r.neg_xn[i] as u128) % pm;
        }
    }
    acc[..n].iter().map(|&c| c as u64).collect()
}

fn raw_pow(r: &RingInner, a: &[u64], mut e: u128) -> Vec<u64> {
    let mut acc = raw_one(r);
    let mut base = a.to_vec();
    while e > 0 {
        if e & 1 == 1 {
            acc = raw_mul(r, &acc, &base);
        }
        base = raw_mul(r, &base, &base);
        e >>= 1;
    }
    acc
}

fn raw_one(r: &RingInner) -> Vec<u64> {
    let mut v = vec![0u64; r.desc.n];
    v[0] = 1 % r.pm;
    v
}

fn raw_is_zero(a: &[u64]) -> bool {
    a.iter().all(|&c| c == 0)
}

fn raw_is_unit(r: &RingInner, a: &[u64]) -> bool {
    a.iter().any(|&c| c % r.desc.p != 0)
}

/// Inverse of a unit via the unit-group order: a^(|W^x| - 1).
fn raw_inv(r: &RingInner, a: &[u64]) -> Vec<u64> {
    let p = r.desc.p as u128;
    let n = r.desc.n as u32;
    let m = r.desc.m;
    let q: u128 = p.pow(n);
    let order = q.pow(m - 1) * (q - 1);
    raw_pow(r, a, order - 1)
}

/// Evaluate the monic modulus at `y`.
fn raw_eval_modulus(r: &RingInner, y: &[u64]) -> Vec<u64> {
    let n = r.desc.n;
    // Horner on y^n + c_{n-1} x^{n-1} + ... + c_0
    let mut acc = raw_one(r);
    for i in (0..n).rev() {
        acc = raw_mul(r, &acc, y);
        let mut ci = vec![0u64; n];
        ci[0] = r.desc.modulus[i] % r.pm;
        acc = raw_add(r, &acc, &ci);
    }
    acc
}

/// Evaluate the derivative of the modulus at `y`.
fn raw_eval_modulus_derivative(r: &RingInner, y: &[u64]) -> Vec<u64> {
    let n = r.desc.n;
    let mut acc = {
        let mut v = vec![0u64; n];
        v[0] = (n as u64) % r.pm;
        v
    };
    for i in (1..n).rev() {
        acc = raw_mul(r, &acc, y);
        let mut ci = vec![0u64; n];
        ci[0] = (r.desc.modulus[i] as u128 * i as u128 % r.pm as u128) as u64;
        acc = raw_add(r, &acc, &ci);
    }
    acc
}

fn raw_sigma(r: &RingInner, a: &[u64]) -> Vec<u64> {
    if r.desc.n == 1 {
        return a.to_vec();
    }
    // evaluate the polynomial a at sigma_gen
    let n = r.desc.n;
    let mut acc = vec![0u64; n];
    for i in (0..n).rev() {
        acc = raw_mul(r, &acc, &r.sigma_gen);
        acc[0] = (acc[0] + a[i]) % r.pm;
    }
    acc
}

// ---------------------------------------------------------------------------

impl WittRing {
    /// Build a ring from a full descriptor, validating every invariant.
    pub fn new(desc: RingDescriptor) -> Result<Self> {
        if !is_prime(desc.p) {
            return Err(Error::BadInput(format!("p = {} is not prime", desc.p)));
        }
        if desc.n == 0 {
            return Err(Error::BadInput("residue degree n must be >= 1".into()));
        }
        if desc.m == 0 {
            return Err(Error::BadInput("truncation length m must be >= 1".into()));
        }
        let pm = (desc.p as u128).checked_pow(desc.m);
        let pm = match pm {
            Some(v) if v <= (1u128 << 31) => v as u64,
            _ => {
                return Err(Error::BadInput(format!(
                    "p^m = {}^{} exceeds the 2^31 coefficient bound",
                    desc.p, desc.m
                )))
            }
        };
        if desc.modulus.len() != desc.n {
            return Err(Error::BadInput(format!(
                "modulus must list exactly n = {} low coefficients",
                desc.n
            )));
        }
        if desc.modulus.iter().any(|&c| c >= pm) {
            return Err(Error::BadInput(
                "modulus coefficients must lie in [0, p^m)".into(),
            ));
        }
        // residue modulus must be irreducible over F_p
        let mut fbar: Vec<u64> = desc.modulus.iter().map(|&c| c % desc.p).collect();
        fbar.push(1);
        if !fp_is_irreducible(&fbar, desc.p) {
            return Err(Error::BadInput(
                "modulus is reducible over the prime field".into(),
            ));
        }

        let neg_xn: Vec<u64> = desc.modulus.iter().map(|&c| (pm - c % pm) % pm).collect();
        let mut inner = RingInner {
            desc,
            pm,
            neg_xn,
            sigma_gen: vec![],
        };
        inner.sigma_gen = Self::lift_frobenius_root(&inner)?;
        Ok(WittRing {
            inner: Arc::new(inner),
        })
    }

    /// Hensel-lift the root of the modulus congruent to x^p mod p.
    ///
    /// Newton iteration doubles the precision each step; the derivative is
    /// a unit because the residue modulus is separable.
    fn lift_frobenius_root(r: &RingInner) -> Result<Vec<u64>> {
        let n = r.desc.n;
        if n == 1 {
            return Ok(vec![0u64]);
        }
        let mut x = vec![0u64; n];
        x[1] = 1;
        let mut y = raw_pow(r, &x, r.desc.p as u128);
        let max_iter = 2 + r.desc.m.ilog2() + 1;
        for _ in 0..=max_iter {
            let fy = raw_eval_modulus(r, &y);
            if raw_is_zero(&fy) {
                return Ok(y);
            }
            let dfy = raw_eval_modulus_derivative(r, &y);
            if !raw_is_unit(r, &dfy) {
                return Err(Error::InvariantViolation(
                    "modulus derivative not a unit at the Frobenius root".into(),
                ));
            }
            let step = raw_mul(r, &fy, &raw_inv(r, &dfy));
            y = raw_sub(r, &y, &step);
        }
        Err(Error::InvariantViolation(
            "Frobenius root lift did not converge".into(),
        ))
    }

    /// The ring with the lexicographically smallest monic modulus:
    /// digits in `[0, p)`, scanned in ascending coefficient order.
    pub fn with_default_modulus(p: u64, n: usize, m: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::BadInput(format!("p = {} is not prime", p)));
        }
        if n == 0 {
            return Err(Error::BadInput("residue degree n must be >= 1".into()));
        }
        let total = (p as u128).checked_pow(n as u32).ok_or_else(|| {
            Error::BadInput("p^n too large while searching for a modulus".into())
        })?;
        let mut tail = vec![0u64; n];
        for _ in 0..total {
            let mut fbar = tail.clone();
            fbar.push(1);
            if fp_is_irreducible(&fbar, p) {
                return Self::new(RingDescriptor {
                    p,
                    n,
                    m,
                    modulus: tail,
                });
            }
            // lexicographic odometer, last index fastest
            for i in (0..n).rev() {
                tail[i] += 1;
                if tail[i] < p {
                    break;
                }
                tail[i] = 0;
            }
        }
        Err(Error::BadInput(format!(
            "no irreducible degree-{} polynomial found over F_{}",
            n, p
        )))
    }

    pub fn descriptor(&self) -> &RingDescriptor {
        &self.inner.desc
    }

    pub fn p(&self) -> u64 {
        self.inner.desc.p
    }

    pub fn residue_degree(&self) -> usize {
        self.inner.desc.n
    }

    pub fn length(&self) -> u32 {
        self.inner.desc.m
    }

    /// p^m, the coefficient modulus.
    pub fn coefficient_modulus(&self) -> u64 {
        self.inner.pm
    }

    /// q = p^n, the residue field size.
    pub fn residue_size(&self) -> u128 {
        (self.inner.desc.p as u128).pow(self.inner.desc.n as u32)
    }

    /// p^(nm), the number of elements.
    pub fn size(&self) -> u128 {
        (self.inner.pm as u128).pow(self.inner.desc.n as u32)
    }

    /// p^(n(m-1)) * (p^n - 1), the number of units.
    pub fn unit_count(&self) -> u128 {
        let q = self.residue_size();
        q.pow(self.inner.desc.m - 1) * (q - 1)
    }

    pub fn element(&self, coeffs: Vec<u64>) -> Result<WittElement> {
        if coeffs.len() != self.inner.desc.n {
            return Err(Error::BadInput(format!(
                "expected {} coefficients, got {}",
                self.inner.desc.n,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|&c| c >= self.inner.pm) {
            return Err(Error::BadInput(
                "coefficient out of canonical range [0, p^m)".into(),
            ));
        }
        Ok(WittElement {
            ring: self.clone(),
            coeffs,
        })
    }

    pub fn zero(&self) -> WittElement {
        WittElement {
            ring: self.clone(),
            coeffs: vec![0; self.inner.desc.n],
        }
    }

    pub fn one(&self) -> WittElement {
        WittElement {
            ring: self.clone(),
            coeffs: raw_one(&self.inner),
        }
    }

    /// The image of an integer under Z -> W_m.
    pub fn from_integer(&self, v: i64) -> WittElement {
        let pm = self.inner.pm as i128;
        let mut c = (v as i128) % pm;
        if c < 0 {
            c += pm;
        }
        let mut coeffs = vec![0u64; self.inner.desc.n];
        coeffs[0] = c as u64;
        WittElement {
            ring: self.clone(),
            coeffs,
        }
    }

    /// The polynomial generator x (a lift of a residue-field generator).
    pub fn generator(&self) -> WittElement {
        let mut coeffs = vec![0u64; self.inner.desc.n];
        if self.inner.desc.n > 1 {
            coeffs[1] = 1;
        } else {
            coeffs[0] = 1 % self.inner.pm;
        }
        WittElement {
            ring: self.clone(),
            coeffs,
        }
    }

    /// Teichmuller lift: the unique root of x^(p^n) = x over a residue.
    ///
    /// `residue` lists coefficients in `[0, p)`. Iterating the q-power map
    /// m-1 times lands on the multiplicative representative.
    pub fn teichmuller(&self, residue: &[u64]) -> Result<WittElement> {
        if residue.len() != self.inner.desc.n {
            return Err(Error::BadInput("residue has wrong length".into()));
        }
        if residue.iter().any(|&c| c >= self.inner.desc.p) {
            return Err(Error::BadInput("residue digits must lie in [0, p)".into()));
        }
        let mut e = residue.to_vec();
        let q = self.residue_size();
        for _ in 1..self.inner.desc.m {
            e = raw_pow(&self.inner, &e, q);
        }
        Ok(WittElement {
            ring: self.clone(),
            coeffs: e,
        })
    }

    /// Reduce the whole ring to length `m2 <= m`.
    pub fn reduce(&self, m2: u32) -> Result<WittRing> {
        let d = &self.inner.desc;
        if m2 > d.m {
            return Err(Error::PrecisionIncrease {
                have: d.m,
                want: m2,
            });
        }
        if m2 == d.m {
            return Ok(self.clone());
        }
        let pm2 = d.p.pow(m2);
        WittRing::new(RingDescriptor {
            p: d.p,
            n: d.n,
            m: m2,
            modulus: d.modulus.iter().map(|&c| c % pm2).collect(),
        })
    }

    /// Deterministic enumeration, lexicographic on coefficient vectors.
    pub fn enumerate(&self, filter: EnumerationFilter, cap: u64) -> Result<ElementIter> {
        if self.size() > cap as u128 {
            return Err(Error::EnumerationTooLarge {
                required: self.size(),
                cap,
            });
        }
        Ok(ElementIter {
            ring: self.clone(),
            current: Some(vec![0; self.inner.desc.n]),
            filter,
        })
    }

    /// A multiplicative generator of the residue field, found by scan.
    pub fn residue_multiplicative_generator(&self) -> Result<WittElement> {
        let q = self.residue_size();
        let level1 = self.reduce(1)?;
        for e in level1.enumerate(EnumerationFilter::Units, 1 << 40)? {
            let mut ord = 1u128;
            let mut acc = e.clone();
            while !acc.is_one() {
                acc = acc.mul(&e)?;
                ord += 1;
                if ord > q {
                    return Err(Error::InvariantViolation(
                        "runaway order scan in residue field".into(),
                    ));
                }
            }
            if ord == q - 1 {
                // lift the found generator back into this ring
                return self.teichmuller(e.coefficients());
            }
        }
        Err(Error::InvariantViolation(
            "residue field has no multiplicative generator".into(),
        ))
    }

    /// The n x n matrix of sigma^e acting on the coefficient basis
    /// {1, x, ..., x^(n-1)} over Z/p^m. Column l holds sigma^e(x^l).
    pub fn sigma_matrix(&self, e: i64) -> Vec<Vec<u64>> {
        let n = self.inner.desc.n;
        let mut cols = Vec::with_capacity(n);
        for l in 0..n {
            let mut v = vec![0u64; n];
            v[l] = 1 % self.inner.pm;
            let w = WittElement {
                ring: self.clone(),
                coeffs: v,
            };
            cols.push(w.frobenius_pow(e).coeffs);
        }
        let mut mat = vec![vec![0u64; n]; n];
        for (l, col) in cols.iter().enumerate() {
            for t in 0..n {
                mat[t][l] = col[t];
            }
        }
        mat
    }

    /// The n x n matrix of multiplication by `w` on the coefficient basis.
    pub fn mul_matrix(&self, w: &WittElement) -> Result<Vec<Vec<u64>>> {
        if w.ring != *self {
            return Err(Error::RingMismatch);
        }
        let n = self.inner.desc.n;
        let mut mat = vec![vec![0u64; n]; n];
        for l in 0..n {
            let mut v = vec![0u64; n];
            v[l] = 1 % self.inner.pm;
            let col = raw_mul(&self.inner, &w.coeffs, &v);
            for t in 0..n {
                mat[t][l] = col[t];
            }
        }
        Ok(mat)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationFilter {
    All,
    Units,
}

pub struct ElementIter {
    ring: WittRing,
    current: Option<Vec<u64>>,
    filter: EnumerationFilter,
}

impl Iterator for ElementIter {
    type Item = WittElement;

    fn next(&mut self) -> Option<WittElement> {
        loop {
            let cur = self.current.as_ref()?.clone();
            // advance the odometer (last index fastest)
            let pm = self.ring.inner.pm;
            let mut next = cur.clone();
            let mut done = true;
            for i in (0..next.len()).rev() {
                next[i] += 1;
                if next[i] < pm {
                    done = false;
                    break;
                }
                next[i] = 0;
            }
            self.current = if done { None } else { Some(next) };

            let keep = match self.filter {
                EnumerationFilter::All => true,
                EnumerationFilter::Units => raw_is_unit(&self.ring.inner, &cur),
            };
            if keep {
                return Some(WittElement {
                    ring: self.ring.clone(),
                    coeffs: cur,
                });
            }
            self.current.as_ref()?;
        }
    }
}

impl WittElement {
    pub fn ring(&self) -> &WittRing {
        &self.ring
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        raw_is_zero(&self.coeffs)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == raw_one(&self.ring.inner)
    }

    pub fn is_unit(&self) -> bool {
        raw_is_unit(&self.ring.inner, &self.coeffs)
    }

    fn check_same_ring(&self, rhs: &Self) -> Result<()> {
        if self.ring != rhs.ring {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_ring(rhs)?;
        Ok(WittElement {
            ring: self.ring.clone(),
            coeffs: raw_add(&self.ring.inner, &self.coeffs, &rhs.coeffs),
        })
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_ring(rhs)?;
        Ok(WittElement {
            ring: self.ring.clone(),
            coeffs: raw_sub(&self.ring.inner, &self.coeffs, &rhs.coeffs),
        })
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same_ring(rhs)?;
        Ok(WittElement {
            ring: self.ring.clone(),
            coeffs: raw_mul(&self.ring.inner, &self.coeffs, &rhs.coeffs),
        })
    }

    pub fn neg(&self) -> Self {
        WittElement {
            ring: self.ring.clone(),
            coeffs: raw_neg(&self.ring.inner, &self.coeffs),
        }
    }

    pub fn pow(&self, e: u128) -> Self {
        WittElement {
            ring: self.ring.clone(),
            coeffs: raw_pow(&self.ring.inner, &self.coeffs, e),
        }
    }

    /// Multiplicative inverse of a unit; the result satisfies a * a^-1 = 1
    /// exactly.
    pub fn unit_inverse(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotAUnit);
        }
        Ok(WittElement {
            ring: self.ring.clone(),
            coeffs: raw_inv(&self.ring.inner, &self.coeffs),
        })
    }

    /// Forward Frobenius sigma (e = 1) or its inverse sigma^(n-1) (e = -1);
    /// any integer power is accepted.
    pub fn frobenius_pow(&self, e: i64) -> Self {
        let n = self.ring.inner.desc.n as i64;
        let steps = e.rem_euclid(n) as usize;
        let mut c = self.coeffs.clone();
        for _ in 0..steps {
            c = raw_sigma(&self.ring.inner, &c);
        }
        WittElement {
            ring: self.ring.clone(),
            coeffs: c,
        }
    }

    pub fn frobenius(&self) -> Self {
        self.frobenius_pow(1)
    }

    pub fn frobenius_inverse(&self) -> Self {
        self.frobenius_pow(-1)
    }

    /// Largest k < m with a in p^k * W_m; `None` encodes infinity (a = 0).
    pub fn valuation(&self) -> Option<u32> {
        if self.is_zero() {
            return None;
        }
        let p = self.ring.inner.desc.p;
        let mut best = u32::MAX;
        for &c in &self.coeffs {
            if c == 0 {
                continue;
            }
            let mut v = 0u32;
            let mut x = c;
            while x % p == 0 {
                x /= p;
                v += 1;
            }
            best = best.min(v);
        }
        Some(best)
    }

    /// Reduce to length m2; only reduction is allowed.
    pub fn change_precision(&self, m2: u32) -> Result<Self> {
        let target = self.ring.reduce(m2)?;
        let pm2 = target.inner.pm;
        Ok(WittElement {
            ring: target,
            coeffs: self.coeffs.iter().map(|&c| c % pm2).collect(),
        })
    }

    /// The residue in W_1 = F_{p^n}.
    pub fn residue(&self) -> Self {
        self.change_precision(1).expect("reduction to length 1")
    }
}

impl Serialize for WittElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}
