//! Newton polygons with exact rational slopes, the closed-form dimension
//! formulas attached to them, and slope recovery from a truncation at
//! finite precision.
//!
//! Slope recovery computes the characteristic polynomial of the linearized
//! Frobenius power and takes the lower convex hull of coefficient
//! valuations. A valuation is only known exactly below the truncation
//! length; the hull is therefore computed twice, once with censored values
//! pinned at m and once with them removed, and the result is accepted only
//! when both hulls agree as piecewise-linear functions.

use num::rational::Ratio;
use num::Zero;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};

use crate::dieudonne::DieudonneTruncation;
use crate::error::{Error, Result};
use crate::matrix::MatrixW;
use crate::witt::WittElement;

/// A multiset of coprime blocks `(c_s, d_s)`; slopes are `d_s / (c_s + d_s)`.
/// Canonical order: ascending slope, then ascending c.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    blocks: Vec<(u64, u64)>,
}

impl<'de> Deserialize<'de> for NewtonPolygon {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            blocks: Vec<(u64, u64)>,
        }
        let wire = Wire::deserialize(d)?;
        NewtonPolygon::new(wire.blocks).map_err(D::Error::custom)
    }
}

impl NewtonPolygon {
    pub fn new(mut blocks: Vec<(u64, u64)>) -> Result<Self> {
        for &(c, d) in &blocks {
            if c + d == 0 {
                return Err(Error::BadInput("block with c + d = 0".into()));
            }
            if num::integer::gcd(c, d) != 1 {
                return Err(Error::NotCoprime { c, d });
            }
        }
        blocks.sort_by(|a, b| {
            let sa = Ratio::new(a.1 as i128, (a.0 + a.1) as i128);
            let sb = Ratio::new(b.1 as i128, (b.0 + b.1) as i128);
            sa.cmp(&sb).then(a.0.cmp(&b.0))
        });
        Ok(NewtonPolygon { blocks })
    }

    pub fn blocks(&self) -> &[(u64, u64)] {
        &self.blocks
    }

    pub fn codimension(&self) -> u64 {
        self.blocks.iter().map(|b| b.0).sum()
    }

    pub fn dimension(&self) -> u64 {
        self.blocks.iter().map(|b| b.1).sum()
    }

    pub fn height(&self) -> u64 {
        self.codimension() + self.dimension()
    }

    pub fn slopes(&self) -> Vec<Ratio<i128>> {
        self.blocks
            .iter()
            .map(|&(c, d)| Ratio::new(d as i128, (c + d) as i128))
            .collect()
    }
}

/// Codimension of the stable stratum: evaluated through both closed forms
/// (slope form and cross-product form) which are asserted equal.
///
/// ```text
///   (1/2) sum_{s,t} r_s r_t |alpha_s - alpha_t|
///     = (1/2) sum_{s,t} |c_s d_t - c_t d_s|
/// ```
pub fn traverso_codim(np: &NewtonPolygon) -> Result<u64> {
    let blocks = np.blocks();
    let mut slope_form = Ratio::<i128>::zero();
    let mut cross_form: i128 = 0;
    for &(cs, ds) in blocks {
        for &(ct, dt) in blocks {
            let rs = (cs + ds) as i128;
            let rt = (ct + dt) as i128;
            let alpha_s = Ratio::new(ds as i128, rs);
            let alpha_t = Ratio::new(dt as i128, rt);
            let diff = alpha_s - alpha_t;
            let abs = if diff < Ratio::zero() { -diff } else { diff };
            slope_form += Ratio::from_integer(rs * rt) * abs;
            cross_form += (cs as i128 * dt as i128 - ct as i128 * ds as i128).abs();
        }
    }
    let slope_form = slope_form / Ratio::from_integer(2);
    if cross_form % 2 != 0 {
        return Err(Error::InvariantViolation(
            "cross-product double sum is odd".into(),
        ));
    }
    let cross_form = cross_form / 2;
    if slope_form != Ratio::from_integer(cross_form) {
        return Err(Error::InvariantViolation(
            "slope form and cross-product form disagree".into(),
        ));
    }
    if !slope_form.is_integer() || cross_form < 0 {
        return Err(Error::InvariantViolation(
            "codimension is not a non-negative integer".into(),
        ));
    }
    Ok(cross_form as u64)
}

/// The specializing height: `c d - codim`, also computed through the
/// order-free pairwise form
///
/// ```text
///   sum_s c_s d_s + 2 sum_{s < t} min(c_s d_t, c_t d_s)
/// ```
///
/// and asserted equal.
pub fn specializing_height(np: &NewtonPolygon) -> Result<u64> {
    let codim = traverso_codim(np)?;
    let c = np.codimension();
    let d = np.dimension();
    let principal = c
        .checked_mul(d)
        .and_then(|cd| cd.checked_sub(codim))
        .ok_or_else(|| Error::InvariantViolation("codim exceeds c*d".into()))?;

    let blocks = np.blocks();
    let mut pairwise: u64 = blocks.iter().map(|&(cs, ds)| cs * ds).sum();
    for s in 0..blocks.len() {
        for t in s + 1..blocks.len() {
            let (cs, ds) = blocks[s];
            let (ct, dt) = blocks[t];
            pairwise += 2 * (cs * dt).min(ct * ds);
        }
    }
    if pairwise != principal {
        return Err(Error::InvariantViolation(
            "pairwise minimum form disagrees with c d - codim".into(),
        ));
    }
    Ok(principal)
}

/// Truncation level that already determines the polygon: ceil(cd / (c+d)).
/// Zero when cd = 0; experiment drivers clamp to at least 1.
pub fn traverso_level(c: u64, d: u64) -> Result<u64> {
    let r = c + d;
    if r == 0 {
        return Err(Error::BadInput("c + d must be positive".into()));
    }
    Ok((c * d).div_ceil(r))
}

#[derive(Debug, Clone, Serialize)]
pub struct CentralizingReport {
    pub ok: bool,
    pub violations: Vec<String>,
}

/// Check `0 <= gamma(m_1) <= gamma(m_2) <= ... <= s` for an ascending
/// list of levels.
pub fn validate_centralizing_sequence(seq: &[(u32, i64)], s: i64) -> CentralizingReport {
    let mut violations = Vec::new();
    let mut prev: Option<(u32, i64)> = None;
    for &(m, gamma) in seq {
        if gamma < 0 {
            violations.push(format!("gamma({}) = {} is negative", m, gamma));
        }
        if gamma > s {
            violations.push(format!("gamma({}) = {} exceeds the bound {}", m, gamma, s));
        }
        if let Some((pm, pg)) = prev {
            if m <= pm {
                violations.push(format!("levels not ascending: {} after {}", m, pm));
            }
            if gamma < pg {
                violations.push(format!(
                    "gamma({}) = {} < gamma({}) = {} breaks monotonicity",
                    m, gamma, pm, pg
                ));
            }
        }
        prev = Some((m, gamma));
    }
    CentralizingReport {
        ok: violations.is_empty(),
        violations,
    }
}

const CHARPOLY_MAX_DIM: usize = 6;

/// Characteristic polynomial det(x I - B) by signed permutation expansion,
/// ascending coefficient order. Division-free; restricted to r <= 6.
pub fn char_poly(b: &MatrixW) -> Result<Vec<WittElement>> {
    if !b.is_square() {
        return Err(Error::ShapeMismatch("characteristic polynomial of non-square".into()));
    }
    let r = b.rows();
    if r > CHARPOLY_MAX_DIM {
        return Err(Error::EnumerationTooLarge {
            required: (1..=r as u128).product(),
            cap: (1..=CHARPOLY_MAX_DIM as u128).product::<u128>() as u64,
        });
    }
    let ring = b.ring();
    let zero_poly = vec![ring.zero(); r + 1];

    // polynomial helpers over the ring, dense ascending representation
    let add_poly = |a: &mut Vec<WittElement>, b: &[WittElement]| {
        for (x, y) in a.iter_mut().zip(b) {
            *x = x.add(y).expect("same ring");
        }
    };
    let mul_linear = |a: &[WittElement], constant: &WittElement, with_x: bool| {
        // a * (constant + [x]) truncated at degree r
        let mut out = vec![ring.zero(); a.len()];
        for (i, ai) in a.iter().enumerate() {
            let t = ai.mul(constant).expect("same ring");
            out[i] = out[i].add(&t).expect("same ring");
            if with_x && i + 1 < out.len() {
                out[i + 1] = out[i + 1].add(ai).expect("same ring");
            }
        }
        out
    };

    let mut acc = zero_poly.clone();
    // Heap's algorithm over permutations with incremental sign
    let mut perm: Vec<usize> = (0..r).collect();
    let mut counters = vec![0usize; r];
    let mut sign_positive = true;
    let add_term = |perm: &[usize], positive: bool, acc: &mut Vec<WittElement>| {
        let mut term = vec![ring.zero(); r + 1];
        term[0] = ring.one();
        for i in 0..r {
            let j = perm[i];
            // entry of x I - B
            let c = b.get(i, j).neg();
            term = mul_linear(&term[..], &c, i == j);
        }
        if !positive {
            for t in term.iter_mut() {
                *t = t.neg();
            }
        }
        add_poly(acc, &term);
    };
    add_term(&perm, sign_positive, &mut acc);
    let mut i = 0;
    while i < r {
        if counters[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(counters[i], i);
            }
            sign_positive = !sign_positive;
            add_term(&perm, sign_positive, &mut acc);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(acc)
}

type HullPoint = (i64, i64);

/// Lower convex hull of points with strictly increasing x.
fn lower_hull(points: &[HullPoint]) -> Vec<HullPoint> {
    let mut hull: Vec<HullPoint> = Vec::new();
    for &p in points {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep b only if it is strictly below the chord a-p
            let cross = (b.0 - a.0) as i128 * (p.1 - a.1) as i128
                - (b.1 - a.1) as i128 * (p.0 - a.0) as i128;
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Height of the hull above integer x, None outside the domain.
fn hull_height(hull: &[HullPoint], x: i64) -> Option<Ratio<i128>> {
    if hull.is_empty() || x < hull[0].0 || x > hull[hull.len() - 1].0 {
        return None;
    }
    for w in hull.windows(2) {
        let (x0, y0) = w[0];
        let (x1, y1) = w[1];
        if x >= x0 && x <= x1 {
            let t = Ratio::new((x - x0) as i128, (x1 - x0) as i128);
            return Some(
                Ratio::from_integer(y0 as i128)
                    + t * Ratio::from_integer((y1 - y0) as i128),
            );
        }
    }
    // single data point
    if hull.len() == 1 && x == hull[0].0 {
        return Some(Ratio::from_integer(hull[0].1 as i128));
    }
    None
}

/// Recover the Newton polygon of a truncation from the characteristic
/// polynomial of its linearized Frobenius power.
///
/// A coefficient that vanishes mod p^m has an unknown valuation >= m; the
/// hull is accepted only if pinning those valuations at m and removing
/// them entirely produce the same piecewise-linear lower boundary.
pub fn np_from_matrix(d: &DieudonneTruncation) -> Result<NewtonPolygon> {
    let ring = d.ring();
    let n = ring.residue_degree() as u32;
    let m = ring.length() as i64;
    let r = d.height() as i64;

    let b = d.linearize(n)?;
    let coeffs = char_poly(&b)?;

    let mut censored = Vec::new();
    let mut pts_pinned: Vec<HullPoint> = Vec::new();
    let mut pts_known: Vec<HullPoint> = Vec::new();
    for (i, cf) in coeffs.iter().enumerate() {
        match cf.valuation() {
            Some(v) => {
                pts_pinned.push((i as i64, v as i64));
                pts_known.push((i as i64, v as i64));
            }
            None => {
                censored.push(i);
                pts_pinned.push((i as i64, m));
            }
        }
    }
    let hull_pinned = lower_hull(&pts_pinned);
    let hull_known = lower_hull(&pts_known);

    let agree = (0..=r).all(|x| hull_height(&hull_pinned, x) == hull_height(&hull_known, x));
    if !agree {
        return Err(Error::InsufficientPrecision { uncertain: censored });
    }

    // Segment of horizontal extent w and drop h carries w roots of
    // valuation h / w; de-scaling by n gives the slope of the truncation.
    let mut blocks = Vec::new();
    for seg in hull_pinned.windows(2) {
        let (x0, y0) = seg[0];
        let (x1, y1) = seg[1];
        let width = x1 - x0;
        let drop = y0 - y1;
        let slope = Ratio::new(drop as i128, width as i128 * n as i128);
        if slope < Ratio::zero() || slope > Ratio::from_integer(1) {
            return Err(Error::InvariantViolation(format!(
                "slope {} outside [0, 1]",
                slope
            )));
        }
        let ds = *slope.numer() as u64;
        let rs = *slope.denom() as u64;
        if !(width as u64).is_multiple_of(rs) {
            return Err(Error::InvariantViolation(
                "segment width is not a multiple of the slope denominator".into(),
            ));
        }
        let copies = width as u64 / rs;
        for _ in 0..copies {
            blocks.push((rs - ds, ds));
        }
    }
    let np = NewtonPolygon::new(blocks)?;
    if np.dimension() != d.dimension() as u64 || np.height() != d.height() as u64 {
        return Err(Error::InvariantViolation(
            "recovered polygon has wrong totals".into(),
        ));
    }
    Ok(np)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dieudonne::make_truncation;
    use crate::kraft::{direct_sum, minimal_datum};
    use crate::witt::WittRing;

    fn np(blocks: &[(u64, u64)]) -> NewtonPolygon {
        NewtonPolygon::new(blocks.to_vec()).unwrap()
    }

    #[test]
    fn codim_examples() {
        assert_eq!(traverso_codim(&np(&[(1, 1)])).unwrap(), 0);
        assert_eq!(traverso_codim(&np(&[(1, 0), (0, 1)])).unwrap(), 1);
        assert_eq!(traverso_codim(&np(&[(2, 1), (1, 1)])).unwrap(), 1);
    }

    #[test]
    fn height_examples() {
        assert_eq!(specializing_height(&np(&[(1, 0), (0, 1)])).unwrap(), 0);
        assert_eq!(specializing_height(&np(&[(1, 1)])).unwrap(), 1);
        let s = specializing_height(&np(&[(2, 1), (1, 1)])).unwrap();
        assert_eq!(s, 5);
        // matches the permutation-side value of the corresponding sum
        let datum = direct_sum(&minimal_datum(2, 1).unwrap(), &minimal_datum(1, 1).unwrap());
        assert_eq!(s as usize, datum.gamma1());
    }

    #[test]
    fn single_block_height_is_cd() {
        for (c, d) in [(1u64, 1u64), (1, 2), (2, 3), (3, 5), (2, 7), (4, 9)] {
            assert_eq!(specializing_height(&np(&[(c, d)])).unwrap(), c * d);
        }
    }

    #[test]
    fn level_examples() {
        assert_eq!(traverso_level(1, 1).unwrap(), 1);
        assert_eq!(traverso_level(3, 2).unwrap(), 2);
        assert_eq!(traverso_level(5, 0).unwrap(), 0);
    }

    #[test]
    fn centralizing_reports() {
        assert!(validate_centralizing_sequence(&[(1, 0), (2, 0)], 0).ok);
        assert!(validate_centralizing_sequence(&[(1, 1)], 1).ok);
        let bad = validate_centralizing_sequence(&[(1, 2), (2, 1)], 5);
        assert!(!bad.ok);
    }

    #[test]
    fn char_poly_diagonal() {
        let ring = WittRing::with_default_modulus(2, 1, 3).unwrap();
        let b = MatrixW::diagonal_from(&ring, &[ring.from_integer(1), ring.from_integer(2)]);
        // (x - 1)(x - 2) = x^2 - 3x + 2 = x^2 + 5x + 2 mod 8
        let cp = char_poly(&b).unwrap();
        assert_eq!(cp[0], ring.from_integer(2));
        assert_eq!(cp[1], ring.from_integer(5));
        assert_eq!(cp[2], ring.one());
    }

    #[test]
    fn np_ordinary_and_supersingular() {
        let ring = WittRing::with_default_modulus(2, 1, 2).unwrap();
        let id = MatrixW::identity(&ring, 2);
        let ord = make_truncation(1, 1, &ring, id.clone(), id.clone()).unwrap();
        assert_eq!(np_from_matrix(&ord).unwrap(), np(&[(1, 0), (0, 1)]));

        let s = MatrixW::permutation(&ring, &[1, 0]);
        let ss = make_truncation(1, 1, &ring, s, id).unwrap();
        assert_eq!(np_from_matrix(&ss).unwrap(), np(&[(1, 1)]));
    }

    #[test]
    fn np_insufficient_precision_at_level_one() {
        let ring = WittRing::with_default_modulus(2, 1, 1).unwrap();
        let s = MatrixW::permutation(&ring, &[1, 0]);
        let ss = make_truncation(1, 1, &ring, s, MatrixW::identity(&ring, 2)).unwrap();
        assert!(matches!(
            np_from_matrix(&ss),
            Err(Error::InsufficientPrecision { .. })
        ));
    }

    #[test]
    fn np_of_minimal_sums_recovers_blocks() {
        let ring = WittRing::with_default_modulus(2, 1, 4).unwrap();
        for blocks in [
            vec![(1u64, 1u64)],
            vec![(1, 0), (0, 1)],
            vec![(2, 1), (1, 1)],
            vec![(1, 0), (1, 1), (0, 1)],
        ] {
            let mut datum = minimal_datum(blocks[0].0, blocks[0].1).unwrap();
            for &(c, d) in &blocks[1..] {
                datum = direct_sum(&datum, &minimal_datum(c, d).unwrap());
            }
            let trunc = datum.to_truncation(&ring, None).unwrap();
            let got = np_from_matrix(&trunc).unwrap();
            assert_eq!(got, np(&blocks), "blocks {:?}", blocks);
        }
    }

    #[test]
    fn np_over_extension_field() {
        // same computation with n = 2 exercises the sigma-twisted product
        let ring = WittRing::with_default_modulus(2, 2, 3).unwrap();
        let s = MatrixW::permutation(&ring, &[1, 0]);
        let ss = make_truncation(1, 1, &ring, s, MatrixW::identity(&ring, 2)).unwrap();
        assert_eq!(np_from_matrix(&ss).unwrap(), np(&[(1, 1)]));
    }

    #[test]
    fn polygon_canonical_order_and_bounds() {
        let a = np(&[(0, 1), (1, 0), (1, 1)]);
        let b = np(&[(1, 1), (1, 0), (0, 1)]);
        assert_eq!(a, b);
        let s = specializing_height(&a).unwrap();
        assert!(s <= a.codimension() * a.dimension());
    }
}
