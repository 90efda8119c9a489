//! Homogeneous linear systems over Z/p^m.
//!
//! A coefficient matrix is diagonalized to p-power pivots by row and column
//! operations (the column operations are accumulated), which exposes the
//! solution module of `C x = 0` as an internal direct sum of cyclic
//! p-groups: one generator per unknown, with a p-power order. Cardinality
//! and enumeration are exact; there is no rank/pivot guessing over the
//! non-field base.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZpmContext {
    pub p: u64,
    pub m: u32,
    pub pm: u64,
}

impl ZpmContext {
    pub fn new(p: u64, m: u32) -> Self {
        let pm = p.pow(m);
        ZpmContext { p, m, pm }
    }

    fn val(&self, a: u64) -> u32 {
        // valuation censored at m
        if a == 0 {
            return self.m;
        }
        let mut v = 0;
        let mut x = a;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            v += 1;
        }
        v
    }

    fn inv_unit(&self, a: u64) -> u64 {
        // unit group of Z/p^m has order p^(m-1)(p-1)
        let order = (self.p as u128).pow(self.m - 1) * (self.p as u128 - 1);
        let mut acc: u64 = 1;
        let mut base = a % self.pm;
        let mut e = order - 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = (acc as u128 * base as u128 % self.pm as u128) as u64;
            }
            base = (base as u128 * base as u128 % self.pm as u128) as u64;
            e >>= 1;
        }
        acc
    }
}

/// The solution module of a homogeneous system, presented by generators
/// whose orders are p-powers. The module is the internal direct sum of the
/// cyclic groups generated; cardinality is p^(sum of order exponents).
#[derive(Debug, Clone)]
pub struct SolutionModule {
    pub ctx: ZpmContext,
    pub unknowns: usize,
    /// Generators, each a vector of length `unknowns` over Z/p^m.
    pub generators: Vec<Vec<u64>>,
    /// Order exponent of each generator: order = p^exponent, exponent >= 1.
    pub order_exponents: Vec<u32>,
}

impl SolutionModule {
    /// log_p of the module cardinality.
    pub fn log_p_cardinality(&self) -> u64 {
        self.order_exponents.iter().map(|&e| e as u64).sum()
    }

    pub fn cardinality(&self) -> u128 {
        (self.ctx.p as u128).pow(self.log_p_cardinality() as u32)
    }

    /// Enumerate every solution exactly once (deterministic order).
    pub fn enumerate(&self, cap: u64) -> Result<SolutionIter<'_>> {
        let card = self.cardinality();
        if card > cap as u128 {
            return Err(Error::EnumerationTooLarge {
                required: card,
                cap,
            });
        }
        Ok(SolutionIter {
            module: self,
            counters: Some(vec![0u64; self.generators.len()]),
        })
    }

    pub fn contains(&self, candidate: &[u64]) -> bool {
        // membership by re-solving: candidate must be a Z-combination of
        // generators; with p-power orders the straightforward check is to
        // enumerate when small, otherwise reduce against the generators.
        // Used only in tests and cross-checks at desk scale.
        match self.enumerate(1 << 22) {
            Ok(iter) => iter.into_iter().any(|s| s == candidate),
            Err(_) => false,
        }
    }
}

pub struct SolutionIter<'a> {
    module: &'a SolutionModule,
    counters: Option<Vec<u64>>,
}

impl<'a> Iterator for SolutionIter<'a> {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        let counters = self.counters.as_ref()?.clone();
        let m = self.module;
        let mut out = vec![0u64; m.unknowns];
        for (g, (gen, &t)) in m.generators.iter().zip(counters.iter()).enumerate() {
            let _ = g;
            if t == 0 {
                continue;
            }
            for (o, &gv) in out.iter_mut().zip(gen.iter()) {
                *o = ((*o as u128 + t as u128 * gv as u128) % m.ctx.pm as u128) as u64;
            }
        }
        // advance mixed-radix counters; radix p^exponent per generator
        let mut next = counters;
        let mut done = true;
        for i in (0..next.len()).rev() {
            let radix = m.ctx.p.pow(m.order_exponents[i]);
            next[i] += 1;
            if next[i] < radix {
                done = false;
                break;
            }
            next[i] = 0;
        }
        self.counters = if done { None } else { Some(next) };
        Some(out)
    }
}

/// Solve `C x = 0` over Z/p^m. `rows` are the equations.
pub fn solve_homogeneous(ctx: ZpmContext, rows: &[Vec<u64>], unknowns: usize) -> SolutionModule {
    let n_rows = rows.len();
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), unknowns, "equation width mismatch");
            r.iter().map(|&x| x % ctx.pm).collect()
        })
        .collect();
    // column-operation accumulator: x = w * y
    let mut w: Vec<Vec<u64>> = (0..unknowns)
        .map(|i| {
            let mut row = vec![0u64; unknowns];
            row[i] = 1 % ctx.pm;
            row
        })
        .collect();

    let steps = n_rows.min(unknowns);
    let mut pivot_exponents: Vec<u32> = Vec::new();
    for t in 0..steps {
        // global minimum-valuation pivot in the remaining submatrix
        let mut best: Option<(usize, usize, u32)> = None;
        for i in t..n_rows {
            for j in t..unknowns {
                if a[i][j] == 0 {
                    continue;
                }
                let v = ctx.val(a[i][j]);
                if best.is_none_or(|(_, _, bv)| v < bv) {
                    best = Some((i, j, v));
                }
            }
        }
        let (pi, pj, pv) = match best {
            Some(b) => b,
            None => break,
        };
        a.swap(t, pi);
        if pj != t {
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in w.iter_mut() {
                row.swap(t, pj);
            }
        }
        // normalize pivot to exactly p^pv
        let unit = a[t][t] / ctx.p.pow(pv);
        let unit_inv = ctx.inv_unit(unit);
        for j in t..unknowns {
            a[t][j] = (a[t][j] as u128 * unit_inv as u128 % ctx.pm as u128) as u64;
        }
        let pivot = ctx.p.pow(pv);
        debug_assert_eq!(a[t][t], pivot % ctx.pm);
        // clear the pivot column (rows), then the pivot row (columns)
        for i in 0..n_rows {
            if i == t || a[i][t] == 0 {
                continue;
            }
            let factor = a[i][t] / pivot;
            for j in t..unknowns {
                let sub = (factor as u128 * a[t][j] as u128 % ctx.pm as u128) as u64;
                a[i][j] = (a[i][j] + ctx.pm - sub) % ctx.pm;
            }
        }
        for j in (t + 1)..unknowns {
            if a[t][j] == 0 {
                continue;
            }
            let factor = a[t][j] / pivot;
            for i in 0..n_rows {
                let sub = (factor as u128 * a[i][t] as u128 % ctx.pm as u128) as u64;
                a[i][j] = (a[i][j] + ctx.pm - sub) % ctx.pm;
            }
            for i in 0..unknowns {
                let sub = (factor as u128 * w[i][t] as u128 % ctx.pm as u128) as u64;
                w[i][j] = (w[i][j] + ctx.pm - sub) % ctx.pm;
            }
        }
        pivot_exponents.push(pv);
    }

    // column i of w gives the direction; pivot p^v bounds y_i to p^(m-v)Z
    let mut generators = Vec::new();
    let mut order_exponents = Vec::new();
    for i in 0..unknowns {
        let exp = pivot_exponents.get(i).copied().unwrap_or(ctx.m);
        if exp == 0 {
            continue; // unit pivot: the coordinate is forced to zero
        }
        let scale = ctx.p.pow(ctx.m - exp) % ctx.pm;
        let gen: Vec<u64> = (0..unknowns)
            .map(|r| (w[r][i] as u128 * scale as u128 % ctx.pm as u128) as u64)
            .collect();
        generators.push(gen);
        order_exponents.push(exp);
    }

    SolutionModule {
        ctx,
        unknowns,
        generators,
        order_exponents,
    }
}
