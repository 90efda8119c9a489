//! Experiment drivers built on the orbit machinery: dimension estimation
//! from point counts over a tower of residue fields, the
//! truncation-level experiment, and the finiteness probe for the
//! block-diagonal image of the automorphism group.

use std::collections::HashMap;

use num::bigint::BigUint;
use serde::Serialize;

use crate::dieudonne::{hom_module, DieudonneTruncation};
use crate::error::{Error, Result};
use crate::matrix::MatrixW;
use crate::newton::{np_from_matrix, NewtonPolygon};
use crate::orbit::{orbit_bfs, ActionContext};

/// Outcome of a log-ratio dimension fit.
#[derive(Debug, Clone, Serialize)]
pub struct DimFit {
    pub estimate: i64,
    pub raw: f64,
    pub residual: f64,
    pub reliable: bool,
}

/// Residual threshold above which a fit is flagged unreliable.
pub const FIT_RESIDUAL_GUARD: f64 = 0.2;

fn big_to_f64(x: &BigUint) -> f64 {
    // adequate far beyond desk scale; BigUint -> decimal string -> f64
    x.to_string().parse::<f64>().unwrap_or(f64::INFINITY)
}

/// Fit a dimension from exact counts over `F_{p^n}` for consecutive `n`:
/// the mean of consecutive log_p ratios, rounded, with the distance to the
/// nearest integer as residual. Component counts can oscillate with n, so
/// spanning an even window (n = 1..3) lets periodic factors cancel.
pub fn dim_fit(p: u64, counts: &[(u32, BigUint)]) -> Result<DimFit> {
    if counts.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two point counts".into(),
        ));
    }
    for w in counts.windows(2) {
        if w[1].0 != w[0].0 + 1 {
            return Err(Error::InsufficientData(
                "field degrees must be consecutive".into(),
            ));
        }
    }
    let logs: Vec<f64> = counts
        .iter()
        .map(|(_, c)| big_to_f64(c).ln() / (p as f64).ln())
        .collect();
    let diffs: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let raw = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let estimate = raw.round() as i64;
    let residual = (raw - estimate as f64).abs();
    Ok(DimFit {
        estimate,
        raw,
        residual,
        reliable: residual <= FIT_RESIDUAL_GUARD,
    })
}

/// Same fit on real-valued counts (used for normalized coset-model counts
/// that are exact rationals rather than integers).
pub fn dim_fit_f64(p: u64, counts: &[(u32, f64)]) -> Result<DimFit> {
    if counts.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two point counts".into(),
        ));
    }
    let logs: Vec<f64> = counts
        .iter()
        .map(|(_, c)| c.ln() / (p as f64).ln())
        .collect();
    let diffs: Vec<f64> = logs.windows(2).map(|w| w[1] - w[0]).collect();
    let raw = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let estimate = raw.round() as i64;
    let residual = (raw - estimate as f64).abs();
    Ok(DimFit {
        estimate,
        raw,
        residual,
        reliable: residual <= FIT_RESIDUAL_GUARD,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelClass {
    /// Canonical representative key of the class at the truncation level.
    pub representative: Vec<u64>,
    pub members: Vec<usize>,
    pub polygons: Vec<NewtonPolygon>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelExperimentReport {
    pub level: u32,
    pub classes: Vec<LevelClass>,
    /// Indices of classes carrying more than one polygon.
    pub violations: Vec<usize>,
    /// Smallest level in 1..=level at which no class mixes polygons;
    /// None when even the requested level has violations.
    pub minimal_separating_level: Option<u32>,
}

/// Partition points by orbit equivalence at a truncation level and check
/// that each class carries a single Newton polygon.
///
/// `ctx_full` must live at a precision strictly above `level` that is
/// sufficient for certain slope recovery; `points` are given at full
/// precision. `level = 0` is the degenerate control: a single class with
/// no truncation information.
pub fn level_experiment(
    ctx_full: &ActionContext,
    points: &[MatrixW],
    level: u32,
    orbit_cap: u64,
) -> Result<LevelExperimentReport> {
    if ctx_full.ring().length() <= level {
        return Err(Error::BadInput(
            "context precision must exceed the truncation level".into(),
        ));
    }
    let polygons: Vec<NewtonPolygon> = points
        .iter()
        .map(|g| np_from_matrix(&ctx_full.truncation_of(g)?))
        .collect::<Result<Vec<_>>>()?;

    let classes_at = |lvl: u32| -> Result<Vec<LevelClass>> {
        if lvl == 0 {
            let mut polys: Vec<NewtonPolygon> = Vec::new();
            for p in &polygons {
                if !polys.contains(p) {
                    polys.push(p.clone());
                }
            }
            return Ok(vec![LevelClass {
                representative: vec![],
                members: (0..points.len()).collect(),
                polygons: polys,
            }]);
        }
        let ring_lvl = ctx_full.ring().reduce(lvl)?;
        let ctx_lvl = ActionContext::new(
            ctx_full.codimension(),
            ctx_full.dimension(),
            &ring_lvl,
            ctx_full.base().change_precision(lvl)?,
            ctx_full.symplectic().cloned().map(|sp| {
                crate::orbit::SymplecticDescriptor::standard(&ring_lvl, sp.d)
            }),
        )?;
        let mut class_of_key: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut classes: Vec<LevelClass> = Vec::new();
        for (idx, g) in points.iter().enumerate() {
            let g_lvl = g.change_precision(lvl)?;
            let key = g_lvl.canonical_key();
            let class_idx = match class_of_key.get(&key) {
                Some(&ci) => ci,
                None => {
                    let orbit = orbit_bfs(&ctx_lvl, &g_lvl, orbit_cap, true)?;
                    let rep_key = orbit.canonical.canonical_key();
                    let ci = classes.len();
                    classes.push(LevelClass {
                        representative: rep_key,
                        members: vec![],
                        polygons: vec![],
                    });
                    for e in orbit.elements.expect("kept") {
                        class_of_key.insert(e.canonical_key(), ci);
                    }
                    ci
                }
            };
            classes[class_idx].members.push(idx);
            if !classes[class_idx].polygons.contains(&polygons[idx]) {
                classes[class_idx].polygons.push(polygons[idx].clone());
            }
        }
        Ok(classes)
    };

    let classes = classes_at(level)?;
    let violations: Vec<usize> = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.polygons.len() > 1)
        .map(|(i, _)| i)
        .collect();

    let mut minimal_separating_level = None;
    for lvl in 1..=level {
        let cls = classes_at(lvl)?;
        if cls.iter().all(|c| c.polygons.len() <= 1) {
            minimal_separating_level = Some(lvl);
            break;
        }
    }
    Ok(LevelExperimentReport {
        level,
        classes,
        violations,
        minimal_separating_level,
    })
}

/// Count the distinct block-diagonal residues of the automorphism
/// solutions: the image size of the composite map from automorphisms to
/// the block-diagonal quotient at level 1.
pub fn chi_image_count(d: &DieudonneTruncation, cap: u64) -> Result<u64> {
    let c = d.codimension();
    let r = d.height();
    let endos = hom_module(d, d)?;
    let mut seen: std::collections::HashSet<Vec<u64>> = std::collections::HashSet::new();
    for flat in endos.module.enumerate(cap)? {
        let x = endos.matrix_from_flat(&flat);
        let xb = x.residue();
        if xb.rank_over_field() != r {
            continue;
        }
        let mut key = xb.block(0, c, 0, c).canonical_key();
        key.extend(xb.block(c, r, c, r).canonical_key());
        seen.insert(key);
    }
    Ok(seen.len() as u64)
}

/// Verdict of the finiteness probe for the block-diagonal image across a
/// tower of residue fields.
#[derive(Debug, Clone, Serialize)]
pub struct ChiProbe {
    pub counts: Vec<(u32, u64)>,
    pub fit: DimFit,
    pub verdict: &'static str,
}

pub fn chi_finiteness_probe(p: u64, counts: &[(u32, u64)]) -> Result<ChiProbe> {
    let big: Vec<(u32, BigUint)> = counts
        .iter()
        .map(|&(n, c)| (n, BigUint::from(c)))
        .collect();
    let fit = dim_fit(p, &big)?;
    let verdict = if fit.estimate == 0 && fit.reliable {
        "finite block-diagonal image"
    } else {
        "finiteness criterion inapplicable"
    };
    Ok(ChiProbe {
        counts: counts.to_vec(),
        fit,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dieudonne::make_truncation;
    use crate::witt::{EnumerationFilter, WittRing};

    #[test]
    fn fit_pure_power() {
        let counts: Vec<(u32, BigUint)> = (1..=3u32)
            .map(|n| (n, BigUint::from(2u64).pow(3 * n)))
            .collect();
        let fit = dim_fit(2, &counts).unwrap();
        assert_eq!(fit.estimate, 3);
        assert!(fit.residual < 1e-9);
        assert!(fit.reliable);
    }

    #[test]
    fn fit_constant_factor_cancels() {
        let counts: Vec<(u32, BigUint)> = (1..=3u32)
            .map(|n| (n, BigUint::from(2u64) * BigUint::from(2u64).pow(n)))
            .collect();
        let fit = dim_fit(2, &counts).unwrap();
        assert_eq!(fit.estimate, 1);
        assert!(fit.residual < 1e-9);
    }

    #[test]
    fn fit_oscillating_component_counts() {
        // the supersingular stabilizer counts over q = 2, 4, 8
        let counts: Vec<(u32, BigUint)> = vec![
            (1, BigUint::from(2u64)),
            (2, BigUint::from(12u64)),
            (3, BigUint::from(8u64)),
        ];
        let fit = dim_fit(2, &counts).unwrap();
        assert_eq!(fit.estimate, 1);
        assert!(fit.residual < 1e-9, "odd-window cancellation");
    }

    #[test]
    fn fit_guard_catches_period_three_components() {
        // the height-3 isoclinic module (slope 2/3) has automorphism
        // counts q^2 * (2^gcd(3,n) - 1): the component factor has period 3
        // in n, so the n = 1..3 window cannot cancel it and must be
        // flagged, while n = 1..4 telescopes to the true dimension cd = 2
        let mut counts = Vec::new();
        for n in 1..=4usize {
            let ring = WittRing::with_default_modulus(2, n, 1).unwrap();
            let datum = crate::kraft::minimal_datum(1, 2).unwrap();
            let t = datum.to_truncation(&ring, None).unwrap();
            counts.push((
                n as u32,
                BigUint::from(crate::dieudonne::aut_count(&t, 1 << 22).unwrap()),
            ));
        }
        assert_eq!(
            counts.iter().map(|(_, c)| c.to_string()).collect::<Vec<_>>(),
            ["4", "16", "448", "256"]
        );
        let short = dim_fit(2, &counts[..3]).unwrap();
        assert!(!short.reliable, "short window must be flagged");
        let wide = dim_fit(2, &counts).unwrap();
        assert_eq!(wide.estimate, 2);
        assert!(wide.residual < 1e-9);
    }

    #[test]
    fn fit_requires_consecutive_degrees() {
        let counts = vec![(1u32, BigUint::from(2u64)), (3, BigUint::from(8u64))];
        assert!(matches!(
            dim_fit(2, &counts),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            dim_fit(2, &counts[..1]),
            Err(Error::InsufficientData(_))
        ));
    }

    fn all_gl2(ring: &WittRing) -> Vec<MatrixW> {
        let elems: Vec<_> = ring
            .enumerate(EnumerationFilter::All, 1 << 20)
            .unwrap()
            .collect();
        let mut out = Vec::new();
        for a in &elems {
            for b in &elems {
                for c in &elems {
                    for d in &elems {
                        let g = MatrixW::new(
                            ring.clone(),
                            2,
                            2,
                            vec![a.clone(), b.clone(), c.clone(), d.clone()],
                        )
                        .unwrap();
                        if g.is_invertible() {
                            out.push(g);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn level_one_separates_polygons_over_f2() {
        let hi = WittRing::with_default_modulus(2, 1, 3).unwrap();
        let ctx = ActionContext::new(1, 1, &hi, MatrixW::identity(&hi, 2), None).unwrap();
        // lift every point of GL_2(F_2) to the full ring
        let f2 = hi.reduce(1).unwrap();
        let points: Vec<MatrixW> = all_gl2(&f2)
            .into_iter()
            .map(|g| {
                MatrixW::from_fn(&hi, 2, 2, |i, j| {
                    hi.element(g.get(i, j).coefficients().to_vec()).unwrap()
                })
            })
            .collect();
        assert_eq!(points.len(), 6);
        let report = level_experiment(&ctx, &points, 1, 1 << 20).unwrap();
        assert!(report.violations.is_empty());
        assert_eq!(report.minimal_separating_level, Some(1));
        // both polygons appear across classes
        let mut all_polys = Vec::new();
        for cls in &report.classes {
            for p in &cls.polygons {
                if !all_polys.contains(p) {
                    all_polys.push(p.clone());
                }
            }
        }
        assert_eq!(all_polys.len(), 2);
    }

    #[test]
    fn level_zero_is_a_negative_control() {
        let hi = WittRing::with_default_modulus(2, 1, 3).unwrap();
        let ctx = ActionContext::new(1, 1, &hi, MatrixW::identity(&hi, 2), None).unwrap();
        let id = MatrixW::identity(&hi, 2);
        let swap = MatrixW::permutation(&hi, &[1, 0]);
        let report = level_experiment(&ctx, &[id.clone(), swap], 0, 1 << 20).unwrap();
        assert_eq!(report.violations, vec![0]);
        // singletons never violate
        let single = level_experiment(&ctx, &[id], 0, 1 << 20).unwrap();
        assert!(single.violations.is_empty());
    }

    #[test]
    fn chi_count_ordinary() {
        for p in [2u64, 3] {
            let ring = WittRing::with_default_modulus(p, 1, 1).unwrap();
            let id = MatrixW::identity(&ring, 2);
            let t = make_truncation(1, 1, &ring, id.clone(), id).unwrap();
            assert_eq!(chi_image_count(&t, 1 << 20).unwrap(), (p - 1) * (p - 1));
        }
    }

    #[test]
    fn chi_lower_bound_scalars() {
        let ring = WittRing::with_default_modulus(2, 2, 1).unwrap();
        let s = MatrixW::permutation(&ring, &[1, 0]);
        let t = make_truncation(1, 1, &ring, s, MatrixW::identity(&ring, 2)).unwrap();
        let count = chi_image_count(&t, 1 << 20).unwrap();
        assert!(count >= ring.residue_size() as u64 - 1);
    }

    #[test]
    fn chi_probe_verdicts() {
        let probe = chi_finiteness_probe(2, &[(1, 1), (2, 1), (3, 1)]).unwrap();
        assert_eq!(probe.verdict, "finite block-diagonal image");
        let probe = chi_finiteness_probe(2, &[(1, 2), (2, 4), (3, 8)]).unwrap();
        assert_eq!(probe.verdict, "finiteness criterion inapplicable");
    }
}
