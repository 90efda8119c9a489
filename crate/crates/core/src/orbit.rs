//! The orbit action on invertible matrices over `W_m(F_q)` whose orbits
//! classify level-m truncations, together with the divided-matrix group
//! law, generator sets, orbit/stabilizer enumeration, and the symplectic
//! restriction.
//!
//! A group element is a triple `(h1, h2, h3)` with `h1 = I + L` (lower-left
//! block), `h2 = diag(u0, u1)` block-invertible, and `h3 = I + U`
//! (upper-right block). It acts on `g` by
//!
//! ```text
//!   g  ->  h1 h2 h3^p  g  sigma_S(h3)^{-1} sigma_S(h2)^{-1} sigma_S(h1^p)^{-1}
//! ```
//!
//! where `sigma_S(X) = S sigma(X) S^{-1}` conjugates by the base matrix and
//! `(I + N)^p = I + pN` exactly for the one-sided blocks. Group
//! composition is performed on divided matrices: the pair `(B, Y)` of the
//! assembled product `B = h1 h2 h3^p` and its exactly-divided upper-right
//! block `Y` (so `B`'s upper-right block is `p Y` with `Y` kept to full
//! precision). Multiplication is `(B, Y)(B', Y') = (B B', B_00 Y' + Y B'_11)`.

use std::collections::{HashMap, HashSet, VecDeque};

use num::bigint::BigUint;
use num::One;

use crate::dieudonne::{make_truncation, DieudonneTruncation};
use crate::error::{Error, Result};
use crate::matrix::MatrixW;
use crate::witt::{EnumerationFilter, WittElement, WittRing};

/// Entry position in a one-sided block, with the mirrored slot that
/// symplectic contexts fill in tandem.
type BlockSlot = (usize, usize, Option<(usize, usize)>);

pub const DEFAULT_ORBIT_CAP: u64 = 5_000_000;
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;

/// Standard alternating form `[[0, I_d], [-I_d, 0]]` and the block
/// conventions of the symplectic subgroup: symmetric one-sided blocks and
/// paired diagonal `(u, u^{-T})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymplecticDescriptor {
    pub form: MatrixW,
    pub d: usize,
}

impl SymplecticDescriptor {
    pub fn standard(ring: &WittRing, d: usize) -> Self {
        let r = 2 * d;
        let mut j = MatrixW::zero(ring, r, r);
        for i in 0..d {
            j.set(i, d + i, ring.one());
            j.set(d + i, i, ring.from_integer(-1));
        }
        SymplecticDescriptor {
            form: j,
            d,
        }
    }

    /// x^T J x = J
    pub fn contains(&self, x: &MatrixW) -> Result<bool> {
        Ok(x.transpose().mul(&self.form)?.mul(x)? == self.form)
    }

    /// Free parameter count of each one-sided factor: d(d+1)/2.
    pub fn side_parameter_count(&self) -> usize {
        self.d * (self.d + 1) / 2
    }

    /// Free parameter count of the block-diagonal factor: d^2.
    pub fn diagonal_parameter_count(&self) -> usize {
        self.d * self.d
    }
}

/// Context of an action instance: block sizes, ring, base matrix, and the
/// optional symplectic restriction.
#[derive(Debug, Clone)]
pub struct ActionContext {
    c: usize,
    d: usize,
    ring: WittRing,
    base: MatrixW,
    base_inv: MatrixW,
    symplectic: Option<SymplecticDescriptor>,
}

impl ActionContext {
    pub fn new(
        c: usize,
        d: usize,
        ring: &WittRing,
        base: MatrixW,
        symplectic: Option<SymplecticDescriptor>,
    ) -> Result<Self> {
        let r = c + d;
        if base.rows() != r || base.cols() != r {
            return Err(Error::ShapeMismatch(format!("base matrix must be {0}x{0}", r)));
        }
        if base.ring() != ring {
            return Err(Error::RingMismatch);
        }
        let base_inv = base.inverse()?;
        if let Some(sp) = &symplectic {
            if c != d {
                return Err(Error::SymplecticViolation(
                    "symplectic contexts require c = d".into(),
                ));
            }
            if sp.d != d {
                return Err(Error::SymplecticViolation("form size mismatch".into()));
            }
            if !sp.contains(&base)? {
                return Err(Error::SymplecticViolation(
                    "base matrix does not preserve the form".into(),
                ));
            }
        }
        Ok(ActionContext {
            c,
            d,
            ring: ring.clone(),
            base,
            base_inv,
            symplectic,
        })
    }

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

    pub fn symplectic(&self) -> Option<&SymplecticDescriptor> {
        self.symplectic.as_ref()
    }

    /// `sigma_S(X) = S sigma(X) S^{-1}`.
    pub fn twisted_sigma(&self, x: &MatrixW) -> Result<MatrixW> {
        self.base.mul(&x.map_sigma(1))?.mul(&self.base_inv)
    }

    /// The truncation classified by the point `g`.
    pub fn truncation_of(&self, g: &MatrixW) -> Result<DieudonneTruncation> {
        make_truncation(self.c, self.d, &self.ring, self.base.clone(), g.clone())
    }
}

/// A group element in factored form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionTriple {
    /// d x c block of `h1 = I + L`.
    pub lower: MatrixW,
    /// c x c invertible block of `h2`.
    pub diag0: MatrixW,
    /// d x d invertible block of `h2`.
    pub diag1: MatrixW,
    /// c x d block of `h3 = I + U`.
    pub upper: MatrixW,
}

impl ActionTriple {
    pub fn identity(ctx: &ActionContext) -> Self {
        ActionTriple {
            lower: MatrixW::zero(&ctx.ring, ctx.d, ctx.c),
            diag0: MatrixW::identity(&ctx.ring, ctx.c),
            diag1: MatrixW::identity(&ctx.ring, ctx.d),
            upper: MatrixW::zero(&ctx.ring, ctx.c, ctx.d),
        }
    }

    pub fn validate(&self, ctx: &ActionContext) -> Result<()> {
        if self.lower.rows() != ctx.d
            || self.lower.cols() != ctx.c
            || self.diag0.rows() != ctx.c
            || self.diag1.rows() != ctx.d
            || self.upper.rows() != ctx.c
            || self.upper.cols() != ctx.d
        {
            return Err(Error::ShapeMismatch("triple block sizes".into()));
        }
        if !self.diag0.is_invertible() || !self.diag1.is_invertible() {
            return Err(Error::NotInvertible);
        }
        if let Some(_sp) = &ctx.symplectic {
            if self.lower != self.lower.transpose() || self.upper != self.upper.transpose() {
                return Err(Error::SymplecticViolation(
                    "one-sided blocks must be symmetric".into(),
                ));
            }
            let want = self.diag0.transpose().inverse()?;
            if self.diag1 != want {
                return Err(Error::SymplecticViolation(
                    "diagonal blocks must pair as (u, u^{-T})".into(),
                ));
            }
        }
        Ok(())
    }

    /// `h1` as a full matrix.
    pub fn h1(&self, ctx: &ActionContext) -> MatrixW {
        let mut m = MatrixW::identity(&ctx.ring, ctx.height());
        m.set_block(ctx.c, 0, &self.lower);
        m
    }

    /// `h2` as a full matrix.
    pub fn h2(&self, ctx: &ActionContext) -> MatrixW {
        let mut m = MatrixW::zero(&ctx.ring, ctx.height(), ctx.height());
        m.set_block(0, 0, &self.diag0);
        m.set_block(ctx.c, ctx.c, &self.diag1);
        m
    }

    /// `h3` as a full matrix.
    pub fn h3(&self, ctx: &ActionContext) -> MatrixW {
        let mut m = MatrixW::identity(&ctx.ring, ctx.height());
        m.set_block(0, ctx.c, &self.upper);
        m
    }

    pub fn to_divided(&self, ctx: &ActionContext) -> Result<DividedMatrix> {
        let r = ctx.height();
        let ring = &ctx.ring;
        let p = ring.from_integer(ring.p() as i64);
        // B = h1 h2 h3^p assembled blockwise:
        //   [ u0,            p u0 U        ]
        //   [ L u0,  u1 + p L u0 U ]
        let u0 = &self.diag0;
        let u1 = &self.diag1;
        let l_u0 = self.lower.mul(u0)?;
        let y = u0.mul(&self.upper)?;
        let mut b = MatrixW::zero(ring, r, r);
        b.set_block(0, 0, u0);
        b.set_block(0, ctx.c, &y.scale(&p)?);
        b.set_block(ctx.c, 0, &l_u0);
        b.set_block(ctx.c, ctx.c, &u1.add(&l_u0.mul(&self.upper)?.scale(&p)?)?);
        Ok(DividedMatrix { b, y })
    }
}

/// The pair `(B, Y)`: `B` in the image of the one-sided p-scaling with
/// residue in the block lower-triangular subgroup, and the exactly divided
/// upper-right block `Y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DividedMatrix {
    pub b: MatrixW,
    pub y: MatrixW,
}

impl DividedMatrix {
    pub fn identity(ctx: &ActionContext) -> Self {
        DividedMatrix {
            b: MatrixW::identity(&ctx.ring, ctx.height()),
            y: MatrixW::zero(&ctx.ring, ctx.c, ctx.d),
        }
    }

    fn b00(&self, ctx: &ActionContext) -> MatrixW {
        self.b.block(0, ctx.c, 0, ctx.c)
    }

    fn b10(&self, ctx: &ActionContext) -> MatrixW {
        self.b.block(ctx.c, ctx.height(), 0, ctx.c)
    }

    fn b11(&self, ctx: &ActionContext) -> MatrixW {
        self.b.block(ctx.c, ctx.height(), ctx.c, ctx.height())
    }

    /// Group multiplication in divided form.
    pub fn mul(&self, ctx: &ActionContext, rhs: &DividedMatrix) -> Result<DividedMatrix> {
        let b = self.b.mul(&rhs.b)?;
        let y = self
            .b00(ctx)
            .mul(&rhs.y)?
            .add(&self.y.mul(&rhs.b11(ctx))?)?;
        Ok(DividedMatrix { b, y })
    }

    pub fn inverse(&self, ctx: &ActionContext) -> Result<DividedMatrix> {
        let b_inv = self.b.inverse()?;
        let b_inv_11 = b_inv.block(ctx.c, ctx.height(), ctx.c, ctx.height());
        let y = self
            .b00(ctx)
            .inverse()?
            .mul(&self.y)?
            .mul(&b_inv_11)?
            .neg();
        Ok(DividedMatrix { b: b_inv, y })
    }

    /// Refactor into the triple `(L, u0, u1, U)`.
    pub fn to_triple(&self, ctx: &ActionContext) -> Result<ActionTriple> {
        let p = ctx.ring.from_integer(ctx.ring.p() as i64);
        let u0 = self.b00(ctx);
        let u0_inv = u0.inverse()?;
        let lower = self.b10(ctx).mul(&u0_inv)?;
        let upper = u0_inv.mul(&self.y)?;
        let diag1 = self
            .b11(ctx)
            .sub(&self.b10(ctx).mul(&u0_inv)?.mul(&self.y)?.scale(&p)?)?;
        let triple = ActionTriple {
            lower,
            diag0: u0,
            diag1,
            upper,
        };
        triple.validate(ctx).map_err(|_| {
            Error::InvariantViolation("divided matrix does not refactor into a triple".into())
        })?;
        Ok(triple)
    }

    /// The companion `h1^p h2 h3` whose twisted sigma enters the action:
    /// blockwise `[[B00, Y], [p B10, B11]]`.
    fn phi_companion(&self, ctx: &ActionContext) -> Result<MatrixW> {
        let r = ctx.height();
        let p = ctx.ring.from_integer(ctx.ring.p() as i64);
        let mut m = MatrixW::zero(&ctx.ring, r, r);
        m.set_block(0, 0, &self.b00(ctx));
        m.set_block(0, ctx.c, &self.y);
        m.set_block(ctx.c, 0, &self.b10(ctx).scale(&p)?);
        m.set_block(ctx.c, ctx.c, &self.b11(ctx));
        Ok(m)
    }

    /// Serialization key for closure enumeration: B and Y streams.
    pub fn group_key(&self) -> Vec<u64> {
        let mut k = self.b.canonical_key();
        k.extend(self.y.canonical_key());
        k
    }
}

/// A group element with the g-independent factors of its action frozen:
/// acting is two matrix multiplications.
#[derive(Debug, Clone)]
pub struct PreparedAction {
    left: MatrixW,
    right_inverse: MatrixW,
}

impl PreparedAction {
    pub fn new(ctx: &ActionContext, h: &DividedMatrix) -> Result<Self> {
        let companion = h.phi_companion(ctx)?;
        Ok(PreparedAction {
            left: h.b.clone(),
            right_inverse: ctx.twisted_sigma(&companion)?.inverse()?,
        })
    }

    pub fn apply(&self, g: &MatrixW) -> Result<MatrixW> {
        self.left.mul(g)?.mul(&self.right_inverse)
    }
}

/// Apply the action of `h` (in divided form) to `g`.
pub fn act_divided(ctx: &ActionContext, h: &DividedMatrix, g: &MatrixW) -> Result<MatrixW> {
    PreparedAction::new(ctx, h)?.apply(g)
}

/// Apply the action of a factored triple to `g`, validating the inputs.
pub fn act(ctx: &ActionContext, h: &ActionTriple, g: &MatrixW) -> Result<MatrixW> {
    h.validate(ctx)?;
    if g.rows() != ctx.height() || g.cols() != ctx.height() {
        return Err(Error::ShapeMismatch("action point must be r x r".into()));
    }
    if !g.is_invertible() {
        return Err(Error::NotInvertible);
    }
    if let Some(sp) = &ctx.symplectic {
        if !sp.contains(g)? {
            return Err(Error::SymplecticViolation(
                "action point is not in the symplectic group".into(),
            ));
        }
    }
    let out = act_divided(ctx, &h.to_divided(ctx)?, g)?;
    if let Some(sp) = &ctx.symplectic {
        if !sp.contains(&out)? {
            return Err(Error::InvariantViolation(
                "action left the symplectic group".into(),
            ));
        }
    }
    Ok(out)
}

/// Group composition of triples; satisfies
/// `act(compose(h, h'), g) = act(h, act(h', g))`.
pub fn compose_triples(
    ctx: &ActionContext,
    h: &ActionTriple,
    h2: &ActionTriple,
) -> Result<ActionTriple> {
    h.to_divided(ctx)?
        .mul(ctx, &h2.to_divided(ctx)?)?
        .to_triple(ctx)
}

pub fn inverse_triple(ctx: &ActionContext, h: &ActionTriple) -> Result<ActionTriple> {
    h.to_divided(ctx)?.inverse(ctx)?.to_triple(ctx)
}

/// One-parameter generators of the full group over `W_m(F_q)`:
/// elementary one-sided blocks and elementary/diagonal block-diagonal
/// parts, with parameters `p^a tau(beta_b)` over a Z/p^m-generating set of
/// the ring. Symplectic contexts emit symmetric-block and paired-diagonal
/// generators only.
pub fn h_generators(ctx: &ActionContext) -> Result<Vec<ActionTriple>> {
    let ring = &ctx.ring;
    let n = ring.residue_degree();
    let m = ring.length();
    let mut out = Vec::new();

    // additive parameter values p^a tau(x^b)
    let mut add_params = Vec::new();
    for b in 0..n {
        let mut residue = vec![0u64; n];
        residue[b] = 1 % ring.p();
        if n == 1 {
            residue[b] = 1;
        }
        let tau = ring.teichmuller(&residue)?;
        for a in 0..m {
            let scale = ring.from_integer((ring.p() as i64).pow(a));
            add_params.push(tau.mul(&scale)?);
        }
    }
    let id = ActionTriple::identity(ctx);

    // positions of the one-sided blocks
    let lower_positions: Vec<BlockSlot> = if ctx.symplectic.is_some() {
        // symmetric basis E_ii and E_ij + E_ji
        let mut v = Vec::new();
        for i in 0..ctx.d {
            for j in i..ctx.c {
                v.push((i, j, if i != j { Some((j, i)) } else { None }));
            }
        }
        v
    } else {
        (0..ctx.d)
            .flat_map(|i| (0..ctx.c).map(move |j| (i, j, None)))
            .collect()
    };

    for &(i, j, mirror) in &lower_positions {
        for t in &add_params {
            let mut g = id.clone();
            g.lower.set(i, j, t.clone());
            if let Some((mi, mj)) = mirror {
                g.lower.set(mi, mj, t.clone());
            }
            out.push(g);
        }
    }
    let upper_positions: Vec<BlockSlot> = if ctx.symplectic.is_some() {
        let mut v = Vec::new();
        for i in 0..ctx.c {
            for j in i..ctx.d {
                v.push((i, j, if i != j { Some((j, i)) } else { None }));
            }
        }
        v
    } else {
        (0..ctx.c)
            .flat_map(|i| (0..ctx.d).map(move |j| (i, j, None)))
            .collect()
    };
    for &(i, j, mirror) in &upper_positions {
        for t in &add_params {
            let mut g = id.clone();
            g.upper.set(i, j, t.clone());
            if let Some((mi, mj)) = mirror {
                g.upper.set(mi, mj, t.clone());
            }
            out.push(g);
        }
    }

    // block-diagonal factor
    let mut diag_blocks: Vec<MatrixW> = Vec::new();
    let push_gl_generators = |k: usize, sink: &mut Vec<MatrixW>| -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        // elementary off-diagonal
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                for t in &add_params {
                    let mut u = MatrixW::identity(ring, k);
                    u.set(i, j, t.clone());
                    sink.push(u);
                }
            }
        }
        // diagonal units: a residue generator and the 1 + p^a tau units
        let zeta = ring.residue_multiplicative_generator()?;
        for i in 0..k {
            let mut u = MatrixW::identity(ring, k);
            u.set(i, i, zeta.clone());
            sink.push(u);
            for t in &add_params {
                if t.valuation() == Some(0) {
                    continue; // only 1 + (p-divisible) stays a unit family
                }
                let mut u = MatrixW::identity(ring, k);
                u.set(i, i, ring.one().add(t)?);
                sink.push(u);
            }
        }
        Ok(())
    };

    if ctx.symplectic.is_some() {
        let mut u0s = Vec::new();
        push_gl_generators(ctx.c, &mut u0s)?;
        for u0 in u0s {
            let mut g = id.clone();
            g.diag1 = u0.transpose().inverse()?;
            g.diag0 = u0;
            out.push(g);
        }
    } else {
        push_gl_generators(ctx.c, &mut diag_blocks)?;
        for u0 in diag_blocks.drain(..) {
            let mut g = id.clone();
            g.diag0 = u0;
            out.push(g);
        }
        push_gl_generators(ctx.d, &mut diag_blocks)?;
        for u1 in diag_blocks.drain(..) {
            let mut g = id.clone();
            g.diag1 = u1;
            out.push(g);
        }
    }
    Ok(out)
}

fn gl_order(k: usize, q: &BigUint) -> BigUint {
    // |GL_k(F_q)| = prod_{i<k} (q^k - q^i)
    let mut acc = BigUint::one();
    let qk = num::pow::pow(q.clone(), k);
    for i in 0..k {
        let qi = num::pow::pow(q.clone(), i);
        acc *= &qk - qi;
    }
    acc
}

/// Exact order of the acting group over `W_m(F_q)`.
pub fn group_order(ctx: &ActionContext) -> BigUint {
    let q = BigUint::from(ctx.ring.residue_size());
    let m = ctx.ring.length() as usize;
    if let Some(sp) = &ctx.symplectic {
        let d = sp.d;
        // q^(m d(d+1)) * q^((m-1) d^2) * |GL_d(F_q)|
        num::pow::pow(q.clone(), m * d * (d + 1))
            * num::pow::pow(q.clone(), (m - 1) * d * d)
            * gl_order(d, &q)
    } else {
        let (c, d) = (ctx.c, ctx.d);
        num::pow::pow(q.clone(), 2 * c * d * m)
            * num::pow::pow(q.clone(), (m - 1) * (c * c + d * d))
            * gl_order(c, &q)
            * gl_order(d, &q)
    }
}

/// Closure of the generator set under the divided group law. Used to
/// validate the generator recipe against the closed-form order.
pub fn generator_closure_order(ctx: &ActionContext, cap: u64) -> Result<u64> {
    let gens: Vec<DividedMatrix> = h_generators(ctx)?
        .iter()
        .map(|t| t.to_divided(ctx))
        .collect::<Result<Vec<_>>>()?;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut queue = VecDeque::new();
    let e = DividedMatrix::identity(ctx);
    seen.insert(e.group_key());
    queue.push_back(e);
    while let Some(x) = queue.pop_front() {
        for g in &gens {
            let y = x.mul(ctx, g)?;
            let key = y.group_key();
            if seen.insert(key) {
                if seen.len() as u64 > cap {
                    return Err(Error::EnumerationTooLarge {
                        required: seen.len() as u128,
                        cap,
                    });
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen.len() as u64)
}

#[derive(Debug, Clone)]
pub struct Orbit {
    pub size: u64,
    pub canonical: MatrixW,
    /// Present when the search was asked to keep the point set.
    pub elements: Option<Vec<MatrixW>>,
}

/// Breadth-first orbit of `g0` under the generator set. Deterministic: the
/// orbit set and the lexicographically least serialized point do not
/// depend on traversal order.
pub fn orbit_bfs(ctx: &ActionContext, g0: &MatrixW, cap: u64, keep: bool) -> Result<Orbit> {
    if !g0.is_invertible() {
        return Err(Error::NotInvertible);
    }
    if let Some(sp) = &ctx.symplectic {
        if !sp.contains(g0)? {
            return Err(Error::SymplecticViolation("seed not in the group".into()));
        }
    }
    let gens: Vec<PreparedAction> = h_generators(ctx)?
        .iter()
        .map(|t| PreparedAction::new(ctx, &t.to_divided(ctx)?))
        .collect::<Result<Vec<_>>>()?;
    let mut seen: HashMap<Vec<u64>, ()> = HashMap::new();
    let mut elements = Vec::new();
    let mut queue = VecDeque::new();
    let key0 = g0.canonical_key();
    let mut canonical = (key0.clone(), g0.clone());
    seen.insert(key0, ());
    if keep {
        elements.push(g0.clone());
    }
    queue.push_back(g0.clone());
    while let Some(g) = queue.pop_front() {
        for h in &gens {
            let g2 = h.apply(&g)?;
            let key = g2.canonical_key();
            if !seen.contains_key(&key) {
                if seen.len() as u64 >= cap {
                    return Err(Error::OrbitTooLarge {
                        partial: seen.len() as u64,
                        cap,
                    });
                }
                if key < canonical.0 {
                    canonical = (key.clone(), g2.clone());
                }
                seen.insert(key, ());
                if keep {
                    elements.push(g2.clone());
                }
                queue.push_back(g2);
            }
        }
    }
    Ok(Orbit {
        size: seen.len() as u64,
        canonical: canonical.1,
        elements: if keep { Some(elements) } else { None },
    })
}

/// Two points lie in the same orbit iff they share the canonical
/// representative; computed by search from the first point.
pub fn same_orbit(ctx: &ActionContext, g1: &MatrixW, g2: &MatrixW, cap: u64) -> Result<bool> {
    let key2 = g2.canonical_key();
    if g1.canonical_key() == key2 {
        return Ok(true);
    }
    let orbit = orbit_bfs(ctx, g1, cap, true)?;
    Ok(orbit
        .elements
        .expect("kept by request")
        .iter()
        .any(|g| g.canonical_key() == key2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilizerMode {
    Count,
    Enumerate,
}

#[derive(Debug, Clone)]
pub struct Stabilizer {
    pub count: BigUint,
    pub elements: Option<Vec<ActionTriple>>,
}

/// Stabilizer of `g0`: exact count via orbit size (the quotient must divide
/// exactly) or brute-force filtering of every group element.
pub fn stabilizer(
    ctx: &ActionContext,
    g0: &MatrixW,
    mode: StabilizerMode,
    orbit_cap: u64,
    enum_cap: u64,
) -> Result<Stabilizer> {
    match mode {
        StabilizerMode::Count => {
            let orbit = orbit_bfs(ctx, g0, orbit_cap, false)?;
            let total = group_order(ctx);
            let size = BigUint::from(orbit.size);
            let (q, rem) = num::Integer::div_rem(&total, &size);
            if rem != BigUint::ZERO {
                return Err(Error::NonIntegralQuotient(format!(
                    "group order {} not divisible by orbit size {}",
                    total, orbit.size
                )));
            }
            Ok(Stabilizer {
                count: q,
                elements: None,
            })
        }
        StabilizerMode::Enumerate => {
            let order = group_order(ctx);
            if order > BigUint::from(enum_cap) {
                return Err(Error::EnumerationTooLarge {
                    required: u128::try_from(&order).unwrap_or(u128::MAX),
                    cap: enum_cap,
                });
            }
            let mut found = Vec::new();
            for h in enumerate_triples(ctx, enum_cap)? {
                if act_divided(ctx, &h.to_divided(ctx)?, g0)? == *g0 {
                    found.push(h);
                }
            }
            Ok(Stabilizer {
                count: BigUint::from(found.len()),
                elements: Some(found),
            })
        }
    }
}

/// Every group element in factored form. Only for desk-scale instances.
pub fn enumerate_triples(ctx: &ActionContext, cap: u64) -> Result<Vec<ActionTriple>> {
    let order = group_order(ctx);
    if order > BigUint::from(cap) {
        return Err(Error::EnumerationTooLarge {
            required: u128::try_from(&order).unwrap_or(u128::MAX),
            cap,
        });
    }
    let ring = &ctx.ring;
    let elems: Vec<WittElement> = ring
        .enumerate(EnumerationFilter::All, cap)?
        .collect();

    // matrices with freely chosen entries at the listed positions
    let free_matrices = |rows: usize,
                         cols: usize,
                         positions: &[BlockSlot]|
     -> Vec<MatrixW> {
        let mut out = Vec::new();
        let k = positions.len();
        let mut idx = vec![0usize; k];
        loop {
            let mut m = MatrixW::zero(ring, rows, cols);
            for (slot, &(i, j, mirror)) in positions.iter().enumerate() {
                m.set(i, j, elems[idx[slot]].clone());
                if let Some((mi, mj)) = mirror {
                    m.set(mi, mj, elems[idx[slot]].clone());
                }
            }
            out.push(m);
            let mut carry = true;
            for slot in (0..k).rev() {
                idx[slot] += 1;
                if idx[slot] < elems.len() {
                    carry = false;
                    break;
                }
                idx[slot] = 0;
            }
            if carry {
                break;
            }
        }
        out
    };

    let lower_pos: Vec<BlockSlot> = if ctx.symplectic.is_some() {
        (0..ctx.d)
            .flat_map(|i| {
                (i..ctx.c).map(move |j| (i, j, if i != j { Some((j, i)) } else { None }))
            })
            .collect()
    } else {
        (0..ctx.d)
            .flat_map(|i| (0..ctx.c).map(move |j| (i, j, None)))
            .collect()
    };
    let upper_pos: Vec<BlockSlot> = if ctx.symplectic.is_some() {
        (0..ctx.c)
            .flat_map(|i| {
                (i..ctx.d).map(move |j| (i, j, if i != j { Some((j, i)) } else { None }))
            })
            .collect()
    } else {
        (0..ctx.c)
            .flat_map(|i| (0..ctx.d).map(move |j| (i, j, None)))
            .collect()
    };
    let all_pos = |k: usize| -> Vec<BlockSlot> {
        (0..k).flat_map(|i| (0..k).map(move |j| (i, j, None))).collect()
    };

    let lowers = free_matrices(ctx.d, ctx.c, &lower_pos);
    let uppers = free_matrices(ctx.c, ctx.d, &upper_pos);
    let diag0s: Vec<MatrixW> = free_matrices(ctx.c, ctx.c, &all_pos(ctx.c))
        .into_iter()
        .filter(|u| u.is_invertible())
        .collect();
    let diag1s: Vec<MatrixW> = if ctx.symplectic.is_some() {
        Vec::new()
    } else {
        free_matrices(ctx.d, ctx.d, &all_pos(ctx.d))
            .into_iter()
            .filter(|u| u.is_invertible())
            .collect()
    };

    let mut out = Vec::new();
    for l in &lowers {
        for u0 in &diag0s {
            let paired: Vec<MatrixW> = if ctx.symplectic.is_some() {
                vec![u0.transpose().inverse()?]
            } else {
                diag1s.clone()
            };
            for u1 in &paired {
                for u in &uppers {
                    out.push(ActionTriple {
                        lower: l.clone(),
                        diag0: u0.clone(),
                        diag1: u1.clone(),
                        upper: u.clone(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// The matrix `h1 h2 h3^p` of a stabilizer element, checked to be an
/// automorphism of the truncation classified by `g0`.
pub fn stabilizer_to_aut(
    ctx: &ActionContext,
    g0: &MatrixW,
    h: &ActionTriple,
) -> Result<MatrixW> {
    let x = h.to_divided(ctx)?.b;
    let t = ctx.truncation_of(g0)?;
    let a = t.frobenius_matrix();
    let v = t.verschiebung_matrix();
    if x.mul(a)? != a.mul(&x.map_sigma(1))? {
        return Err(Error::NotAnAutomorphism(
            "image does not commute with Frobenius".into(),
        ));
    }
    if x.mul(v)? != v.mul(&x.map_sigma(-1))? {
        return Err(Error::NotAnAutomorphism(
            "image does not commute with Verschiebung".into(),
        ));
    }
    if !x.is_invertible() {
        return Err(Error::NotAnAutomorphism("image is not invertible".into()));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dieudonne::{aut_count, hom_module};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring(p: u64, n: usize, m: u32) -> WittRing {
        WittRing::with_default_modulus(p, n, m).unwrap()
    }

    fn ordinary_ctx(r: &WittRing) -> ActionContext {
        ActionContext::new(1, 1, r, MatrixW::identity(r, 2), None).unwrap()
    }

    fn supersingular_ctx(r: &WittRing) -> ActionContext {
        ActionContext::new(1, 1, r, MatrixW::permutation(r, &[1, 0]), None).unwrap()
    }

    fn random_triple(ctx: &ActionContext, rng: &mut ChaCha8Rng) -> ActionTriple {
        let ring = ctx.ring();
        let pm = ring.coefficient_modulus() as i64;
        let rand_elem = |rng: &mut ChaCha8Rng| {
            let coeffs: Vec<u64> = (0..ring.residue_degree())
                .map(|_| rng.gen_range(0..pm) as u64)
                .collect();
            ring.element(coeffs).unwrap()
        };
        let rand_unit_matrix = |rng: &mut ChaCha8Rng, k: usize| loop {
            let m = MatrixW::from_fn(ring, k, k, |_, _| rand_elem(rng));
            if m.is_invertible() {
                return m;
            }
        };
        ActionTriple {
            lower: MatrixW::from_fn(ring, ctx.dimension(), ctx.codimension(), |_, _| {
                rand_elem(rng)
            }),
            diag0: rand_unit_matrix(rng, ctx.codimension()),
            diag1: rand_unit_matrix(rng, ctx.dimension()),
            upper: MatrixW::from_fn(ring, ctx.codimension(), ctx.dimension(), |_, _| {
                rand_elem(rng)
            }),
        }
    }

    fn random_point(ctx: &ActionContext, rng: &mut ChaCha8Rng) -> MatrixW {
        let ring = ctx.ring();
        let pm = ring.coefficient_modulus() as i64;
        loop {
            let g = MatrixW::from_fn(ring, ctx.height(), ctx.height(), |_, _| {
                let coeffs: Vec<u64> = (0..ring.residue_degree())
                    .map(|_| rng.gen_range(0..pm) as u64)
                    .collect();
                ring.element(coeffs).unwrap()
            });
            if g.is_invertible() {
                return g;
            }
        }
    }

    #[test]
    fn identity_acts_trivially() {
        let r = ring(2, 1, 2);
        let ctx = ordinary_ctx(&r);
        let id = ActionTriple::identity(&ctx);
        let mut g = MatrixW::identity(&r, 2);
        g.set(1, 0, r.from_integer(3));
        assert_eq!(act(&ctx, &id, &g).unwrap(), g);
    }

    #[test]
    fn pure_upper_triple_matches_direct_substitution() {
        let r = ring(2, 1, 2);
        let ctx = ordinary_ctx(&r);
        let mut h = ActionTriple::identity(&ctx);
        h.upper.set(0, 0, r.from_integer(1));
        let g = MatrixW::identity(&r, 2);
        // act(h, I) = (I + pU) * sigma_S(I + U)^{-1}
        let h3 = h.h3(&ctx);
        let h3p = {
            let mut m = MatrixW::identity(&r, 2);
            m.set(0, 1, r.from_integer(2));
            m
        };
        let want = h3p
            .mul(&ctx.twisted_sigma(&h3).unwrap().inverse().unwrap())
            .unwrap();
        assert_eq!(act(&ctx, &h, &g).unwrap(), want);
    }

    #[test]
    fn composition_is_action_compatible() {
        let r = ring(2, 1, 2);
        for ctx in [ordinary_ctx(&r), supersingular_ctx(&r)] {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..100 {
                let h1 = random_triple(&ctx, &mut rng);
                let h2 = random_triple(&ctx, &mut rng);
                let g = random_point(&ctx, &mut rng);
                let lhs = act(&ctx, &compose_triples(&ctx, &h1, &h2).unwrap(), &g).unwrap();
                let rhs = act(&ctx, &h1, &act(&ctx, &h2, &g).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn compose_identity_and_inverse_laws() {
        let r = ring(3, 1, 2);
        let ctx = supersingular_ctx(&r);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let id = ActionTriple::identity(&ctx);
        for _ in 0..20 {
            let h = random_triple(&ctx, &mut rng);
            assert_eq!(compose_triples(&ctx, &id, &h).unwrap(), h);
            assert_eq!(compose_triples(&ctx, &h, &id).unwrap(), h);
            let hinv = inverse_triple(&ctx, &h).unwrap();
            assert_eq!(compose_triples(&ctx, &h, &hinv).unwrap(), id);
        }
    }

    #[test]
    fn closure_matches_group_order() {
        let r1 = ring(2, 1, 1);
        let ctx1 = ordinary_ctx(&r1);
        assert_eq!(group_order(&ctx1), BigUint::from(4u32));
        assert_eq!(generator_closure_order(&ctx1, 1 << 16).unwrap(), 4);

        let r2 = ring(2, 1, 2);
        let ctx2 = ordinary_ctx(&r2);
        assert_eq!(group_order(&ctx2), BigUint::from(64u32));
        assert_eq!(generator_closure_order(&ctx2, 1 << 16).unwrap(), 64);

        let r3 = ring(2, 2, 1);
        let ctx3 = supersingular_ctx(&r3);
        assert_eq!(group_order(&ctx3), BigUint::from(144u32));
        assert_eq!(generator_closure_order(&ctx3, 1 << 16).unwrap(), 144);
    }

    #[test]
    fn group_order_leading_exponent_is_m_r_squared() {
        // the order is q^(m r^2) times (1 - q^-i) factors, so at large q it
        // is sandwiched between q^(m r^2 - 1) and q^(m r^2)
        let r = ring(2, 10, 1); // q = 1024
        for (c, d, m) in [(1usize, 1usize, 1u32), (1, 2, 1), (2, 2, 1)] {
            let ctx = ActionContext::new(c, d, &r, MatrixW::identity(&r, c + d), None).unwrap();
            let order = group_order(&ctx);
            let rr = (c + d) * (c + d);
            let q = BigUint::from(r.residue_size());
            let upper = num::pow::pow(q.clone(), m as usize * rr);
            let lower = num::pow::pow(q, m as usize * rr - 1);
            assert!(order <= upper && order > lower);
        }
    }

    #[test]
    fn enumerate_triples_counts() {
        let r = ring(2, 1, 2);
        let ctx = ordinary_ctx(&r);
        let all = enumerate_triples(&ctx, 1 << 16).unwrap();
        assert_eq!(BigUint::from(all.len()), group_order(&ctx));
    }

    #[test]
    fn orbit_stabilizer_exactness_small() {
        let r = ring(2, 1, 1);
        for ctx in [ordinary_ctx(&r), supersingular_ctx(&r)] {
            let g0 = MatrixW::identity(&r, 2);
            let orbit = orbit_bfs(&ctx, &g0, 1 << 20, false).unwrap();
            let stab = stabilizer(&ctx, &g0, StabilizerMode::Count, 1 << 20, 1 << 20).unwrap();
            assert_eq!(
                BigUint::from(orbit.size) * stab.count.clone(),
                group_order(&ctx)
            );
            let enumerated =
                stabilizer(&ctx, &g0, StabilizerMode::Enumerate, 1 << 20, 1 << 20).unwrap();
            assert_eq!(enumerated.count, stab.count);
        }
    }

    #[test]
    fn ordinary_and_supersingular_orbits_partition_gl2_f2() {
        let r = ring(2, 1, 1);
        let ctx = ordinary_ctx(&r);
        let g_ord = MatrixW::identity(&r, 2);
        let g_ss = MatrixW::permutation(&r, &[1, 0]);
        let o1 = orbit_bfs(&ctx, &g_ord, 1 << 20, true).unwrap();
        let o2 = orbit_bfs(&ctx, &g_ss, 1 << 20, true).unwrap();
        assert_eq!(o1.size, 4);
        assert_eq!(o2.size, 2);
        let mut keys: HashSet<Vec<u64>> = HashSet::new();
        for g in o1.elements.unwrap().iter().chain(o2.elements.unwrap().iter()) {
            assert!(keys.insert(g.canonical_key()), "orbits must be disjoint");
        }
        assert_eq!(keys.len(), 6); // |GL_2(F_2)|
        assert!(!same_orbit(&ctx, &g_ord, &g_ss, 1 << 20).unwrap());
        assert!(same_orbit(&ctx, &g_ord, &g_ord, 1 << 20).unwrap());
    }

    #[test]
    fn orbit_invariant_under_seed_replacement() {
        let r = ring(2, 1, 2);
        let ctx = supersingular_ctx(&r);
        let g0 = MatrixW::identity(&r, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_triple(&ctx, &mut rng);
        let g1 = act(&ctx, &h, &g0).unwrap();
        let o0 = orbit_bfs(&ctx, &g0, 1 << 20, false).unwrap();
        let o1 = orbit_bfs(&ctx, &g1, 1 << 20, false).unwrap();
        assert_eq!(o0.size, o1.size);
        assert_eq!(o0.canonical, o1.canonical);
        // conjugate stabilizers share cardinality
        let s0 = stabilizer(&ctx, &g0, StabilizerMode::Count, 1 << 20, 1 << 20).unwrap();
        let s1 = stabilizer(&ctx, &g1, StabilizerMode::Count, 1 << 20, 1 << 20).unwrap();
        assert_eq!(s0.count, s1.count);
    }

    #[test]
    fn stabilizer_images_are_the_automorphisms() {
        let r = ring(2, 1, 1);
        for ctx in [ordinary_ctx(&r), supersingular_ctx(&r)] {
            let g0 = MatrixW::identity(&r, 2);
            let stab = stabilizer(&ctx, &g0, StabilizerMode::Enumerate, 1 << 20, 1 << 20).unwrap();
            let t = ctx.truncation_of(&g0).unwrap();
            let autos = hom_module(&t, &t)
                .unwrap()
                .invertible_solutions(1 << 20)
                .unwrap();
            let mut images = HashSet::new();
            for h in stab.elements.as_ref().unwrap() {
                let x = stabilizer_to_aut(&ctx, &g0, h).unwrap();
                assert!(images.insert(x.canonical_key()), "images must be distinct");
            }
            let auto_keys: HashSet<Vec<u64>> =
                autos.iter().map(|x| x.canonical_key()).collect();
            assert_eq!(images, auto_keys);
            assert_eq!(images.len() as u64, aut_count(&t, 1 << 20).unwrap());
        }
    }

    #[test]
    fn image_of_composition_is_product_of_images() {
        let r = ring(2, 1, 2);
        let ctx = supersingular_ctx(&r);
        let g0 = MatrixW::identity(&r, 2);
        let stab = stabilizer(&ctx, &g0, StabilizerMode::Enumerate, 1 << 20, 1 << 20).unwrap();
        let elems = stab.elements.unwrap();
        for h1 in elems.iter().take(4) {
            for h2 in elems.iter().take(4) {
                let lhs = stabilizer_to_aut(
                    &ctx,
                    &g0,
                    &compose_triples(&ctx, h1, h2).unwrap(),
                )
                .unwrap();
                let rhs = stabilizer_to_aut(&ctx, &g0, h1)
                    .unwrap()
                    .mul(&stabilizer_to_aut(&ctx, &g0, h2).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn same_orbit_matches_isomorphism_oracle() {
        // two points lie in one orbit iff an invertible hom exists between
        // their truncations (checked exhaustively over GL_2(F_2))
        let r = ring(2, 1, 1);
        let ctx = ordinary_ctx(&r);
        let elems: Vec<MatrixW> = {
            let mut v = Vec::new();
            let field: Vec<WittElement> =
                r.enumerate(EnumerationFilter::All, 100).unwrap().collect();
            for a in &field {
                for b in &field {
                    for c in &field {
                        for d in &field {
                            let g = MatrixW::new(
                                r.clone(),
                                2,
                                2,
                                vec![a.clone(), b.clone(), c.clone(), d.clone()],
                            )
                            .unwrap();
                            if g.is_invertible() {
                                v.push(g);
                            }
                        }
                    }
                }
            }
            v
        };
        assert_eq!(elems.len(), 6);
        for g1 in &elems {
            for g2 in &elems {
                let same = same_orbit(&ctx, g1, g2, 1 << 20).unwrap();
                let t1 = ctx.truncation_of(g1).unwrap();
                let t2 = ctx.truncation_of(g2).unwrap();
                let iso = !hom_module(&t1, &t2)
                    .unwrap()
                    .invertible_solutions(1 << 20)
                    .unwrap()
                    .is_empty();
                assert_eq!(same, iso, "orbit vs isomorphism mismatch");
            }
        }
    }

    #[test]
    fn symplectic_context_basics() {
        let r = ring(2, 1, 1);
        let sp = SymplecticDescriptor::standard(&r, 1);
        assert_eq!(sp.side_parameter_count(), 1);
        // ordinary base I is symplectic; the supersingular symplectic base
        // uses the rotation [[0,-1],[1,0]]
        let ctx_ord = ActionContext::new(1, 1, &r, MatrixW::identity(&r, 2), Some(sp.clone())).unwrap();
        let mut rot = MatrixW::zero(&r, 2, 2);
        rot.set(0, 1, r.from_integer(-1));
        rot.set(1, 0, r.one());
        let ctx_ss = ActionContext::new(1, 1, &r, rot, Some(sp)).unwrap();
        for ctx in [ctx_ord, ctx_ss] {
            let g0 = MatrixW::identity(&r, 2);
            let orbit = orbit_bfs(&ctx, &g0, 1 << 20, true).unwrap();
            let stab = stabilizer(&ctx, &g0, StabilizerMode::Enumerate, 1 << 20, 1 << 20).unwrap();
            assert_eq!(
                BigUint::from(orbit.size) * stab.count,
                group_order(&ctx)
            );
            // closure under the restricted generators stays inside Sp
            for g in orbit.elements.unwrap() {
                assert!(ctx.symplectic().unwrap().contains(&g).unwrap());
            }
        }
    }

    #[test]
    fn symplectic_parameter_counts() {
        let r = ring(2, 1, 1);
        for d in [1usize, 2, 3] {
            let sp = SymplecticDescriptor::standard(&r, d);
            assert_eq!(sp.side_parameter_count(), d * (d + 1) / 2);
            assert_eq!(sp.diagonal_parameter_count(), d * d);
        }
    }

    #[test]
    fn symplectic_rejects_bad_inputs() {
        let r = ring(2, 1, 1);
        let sp = SymplecticDescriptor::standard(&r, 1);
        let ctx = ActionContext::new(1, 1, &r, MatrixW::identity(&r, 2), Some(sp)).unwrap();
        // non-symplectic point: det != 1
        let mut g = MatrixW::identity(&r, 2);
        g.set(0, 1, r.one());
        g.set(1, 0, r.one());
        let id = ActionTriple::identity(&ctx);
        assert!(matches!(
            act(&ctx, &id, &g),
            Err(Error::SymplecticViolation(_)) | Err(Error::NotInvertible)
        ));
    }
}
