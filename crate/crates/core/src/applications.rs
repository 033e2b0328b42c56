//! Exact constructions for the applications: representation counts, the
//! Beck-type dichotomy statistics, two expanders and projective-equivalence
//! counting.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, MoebiusMap, PrimeField, ProjectivePoint};
use crate::incidence::transforms_defined_by;
use crate::incidence::{richness, PointSet};

/// A deduplicated subset of F_p in increasing order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScalarSet {
    field: PrimeField,
    elems: BTreeSet<FieldElement>,
}

impl ScalarSet {
    pub fn new(field: PrimeField, elems: impl IntoIterator<Item = FieldElement>) -> Self {
        ScalarSet {
            field,
            elems: elems.into_iter().collect(),
        }
    }

    pub fn from_ints(field: PrimeField, vals: impl IntoIterator<Item = i64>) -> Self {
        Self::new(field, vals.into_iter().map(|v| field.elem(v)))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, x: FieldElement) -> bool {
        self.elems.contains(&x)
    }

    pub fn iter(&self) -> impl Iterator<Item = FieldElement> + Clone + '_ {
        self.elems.iter().copied()
    }

    /// `{a + t : a ∈ A}`
    pub fn shift(&self, t: FieldElement) -> ScalarSet {
        ScalarSet::new(self.field, self.iter().map(|a| self.field.add(a, t)))
    }

    pub fn sumset(&self, other: &ScalarSet) -> ScalarSet {
        let f = self.field;
        ScalarSet::new(
            f,
            self.iter()
                .flat_map(|a| other.iter().map(move |b| f.add(a, b))),
        )
    }

    pub fn values(&self) -> Vec<u64> {
        self.iter().map(FieldElement::value).collect()
    }
}

/// `λ ↦ r_AB(λ) = |{(a, b) ∈ A × B : ab = λ}|` over attained products.
pub fn representation_counts(a: &ScalarSet, b: &ScalarSet) -> BTreeMap<FieldElement, u64> {
    let f = a.field();
    let mut table = BTreeMap::new();
    for x in a.iter() {
        for y in b.iter() {
            *table.entry(f.mul(x, y)).or_default() += 1;
        }
    }
    table
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RepresentationReport {
    pub n: usize,
    pub sumset_size: usize,
    pub k: f64,
    /// Largest `r_AB(λ)` over nonzero `λ`; 0 when no nonzero product occurs.
    pub max_r: u64,
    /// `K^{6/5} N^{9/10}`
    pub bound_shape: f64,
    pub ratio: f64,
    /// `KN <= p^{1/2}`
    pub hypothesis_ok: bool,
}

/// Largest nonzero representation count against `K^{6/5} N^{9/10}`, for
/// balanced `|A| = |B| = N` and `K = |A + B| / N`.
pub fn corollary4_report(a: &ScalarSet, b: &ScalarSet) -> Result<RepresentationReport> {
    if a.len() != b.len() {
        return Err(Error::Unbalanced(a.len(), b.len()));
    }
    let n = a.len();
    if n == 0 {
        return Err(Error::Infeasible("empty scalar sets".into()));
    }
    let sumset_size = a.sumset(b).len();
    let k = sumset_size as f64 / n as f64;
    let max_r = representation_counts(a, b)
        .into_iter()
        .filter(|(l, _)| !l.is_zero())
        .map(|(_, r)| r)
        .max()
        .unwrap_or(0);
    let bound_shape = k.powf(6.0 / 5.0) * (n as f64).powf(9.0 / 10.0);
    let p = a.field().modulus() as f64;
    Ok(RepresentationReport {
        n,
        sumset_size,
        k,
        max_r,
        bound_shape,
        ratio: max_r as f64 / bound_shape,
        hypothesis_ok: (sumset_size as f64) <= p.sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BeckStatistics {
    pub n: usize,
    pub max_richness: usize,
    pub defined_count: usize,
    pub c: f64,
    /// `C n^{3/7}`
    pub rich_threshold_lo: f64,
    /// `n / C^{7/4}`
    pub rich_threshold_hi: f64,
    /// Number of defined maps with richness in `[2^j, 2^{j+1})`, keyed by `j`.
    pub dyadic_classes: BTreeMap<u32, usize>,
}

/// Statistics of the transformations defined by `P` (through at least three
/// of its points), with the dyadic window endpoints for a user constant `C`.
pub fn beck_statistics(points: &PointSet, c: f64) -> Result<BeckStatistics> {
    let n = points.len();
    if n < 3 {
        return Err(Error::TooFewPoints(n));
    }
    let defined = transforms_defined_by(points);
    let mut max_richness = 0;
    let mut dyadic_classes = BTreeMap::new();
    for f in defined.iter() {
        let r = richness(f, points);
        max_richness = max_richness.max(r);
        *dyadic_classes.entry(r.ilog2()).or_default() += 1;
    }
    let nf = n as f64;
    Ok(BeckStatistics {
        n,
        max_richness,
        defined_count: defined.len(),
        c,
        rich_threshold_lo: c * nf.powf(3.0 / 7.0),
        rich_threshold_hi: nf / c.powf(7.0 / 4.0),
        dyadic_classes,
    })
}

/// `{a + 1/(b - c) : a, b, c ∈ A, b != c}`
pub fn expander_shift_invert(a: &ScalarSet) -> ScalarSet {
    let f = a.field();
    let mut out = BTreeSet::new();
    let reciprocals: BTreeSet<FieldElement> = a
        .iter()
        .flat_map(|b| a.iter().filter_map(move |c| f.inv(f.sub(b, c)).ok()))
        .collect();
    for x in a.iter() {
        for r in &reciprocals {
            out.insert(f.add(x, *r));
        }
    }
    ScalarSet {
        field: f,
        elems: out,
    }
}

/// `{(ab + c)/(b + d) : a, b, c, d ∈ A, b + d != 0}`
pub fn expander_rational(a: &ScalarSet) -> ScalarSet {
    let f = a.field();
    let mut out = BTreeSet::new();
    for b in a.iter() {
        for d in a.iter() {
            let Ok(den) = f.inv(f.add(b, d)) else {
                continue;
            };
            for x in a.iter() {
                for c in a.iter() {
                    out.insert(f.mul(f.add(f.mul(x, b), c), den));
                }
            }
        }
    }
    ScalarSet {
        field: f,
        elems: out,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpanderReport {
    pub input_size: usize,
    pub size: usize,
    pub exponent: f64,
    /// `size / |A|^exponent`
    pub ratio: f64,
    pub values: Vec<u64>,
}

impl ExpanderReport {
    pub fn new(input: &ScalarSet, output: &ScalarSet, exponent: f64) -> Self {
        let size = output.len();
        ExpanderReport {
            input_size: input.len(),
            size,
            exponent,
            ratio: size as f64 / (input.len().max(1) as f64).powf(exponent),
            values: output.values(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceCount {
    /// Distinct maps `f` with `f(S) ⊆ A`.
    pub map_count: usize,
    /// Distinct image sets `f(S)`.
    pub subset_count: usize,
}

/// Counts maps sending the pattern `S` into `A` and the distinct subsets of
/// `A` so obtained. One ordered reference triple of `S` is sent to every
/// ordered triple of distinct elements of `A`.
pub fn projective_equivalence_count(a: &ScalarSet, s: &ScalarSet) -> Result<EquivalenceCount> {
    if s.len() < 3 {
        return Err(Error::PatternTooSmall(s.len()));
    }
    let field = a.field();
    if s.len() > a.len() {
        return Ok(EquivalenceCount {
            map_count: 0,
            subset_count: 0,
        });
    }
    let pattern: Vec<FieldElement> = s.iter().collect();
    let src = [pattern[0], pattern[1], pattern[2]].map(ProjectivePoint::Finite);
    let targets: Vec<FieldElement> = a.iter().collect();
    let mut maps: BTreeSet<MoebiusMap> = BTreeSet::new();
    let mut images: BTreeSet<Vec<FieldElement>> = BTreeSet::new();
    for &t1 in &targets {
        for &t2 in targets.iter().filter(|&&t| t != t1) {
            for &t3 in targets.iter().filter(|&&t| t != t1 && t != t2) {
                let dst = [t1, t2, t3].map(ProjectivePoint::Finite);
                let f = MoebiusMap::through(field, src, dst)?;
                let image: Option<BTreeSet<FieldElement>> = pattern
                    .iter()
                    .map(|&x| f.eval_affine(x).filter(|&y| a.contains(y)))
                    .collect();
                if let Some(image) = image {
                    maps.insert(f);
                    images.insert(image.into_iter().collect());
                }
            }
        }
    }
    Ok(EquivalenceCount {
        map_count: maps.len(),
        subset_count: images.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::incidence::{rich_transforms_brute, BruteMode};

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn sc(field: PrimeField, v: &[i64]) -> ScalarSet {
        ScalarSet::from_ints(field, v.iter().copied())
    }

    fn table(field: PrimeField, pairs: &[(i64, u64)]) -> BTreeMap<FieldElement, u64> {
        pairs.iter().map(|&(l, r)| (field.elem(l), r)).collect()
    }

    #[test]
    fn representation_examples() {
        let f7 = fp(7);
        assert_eq!(
            representation_counts(&sc(f7, &[1]), &sc(f7, &[1])),
            table(f7, &[(1, 1)])
        );
        let f5 = fp(5);
        assert_eq!(
            representation_counts(&sc(f5, &[1, 2]), &sc(f5, &[1, 3])),
            table(f5, &[(1, 2), (2, 1), (3, 1)])
        );
        assert_eq!(
            representation_counts(&sc(f5, &[0]), &sc(f5, &[1, 2, 4])),
            table(f5, &[(0, 3)])
        );
    }

    #[test]
    fn corollary4_examples() {
        let f7 = fp(7);
        let r = corollary4_report(&sc(f7, &[1]), &sc(f7, &[1])).unwrap();
        assert_eq!((r.k, r.max_r, r.bound_shape, r.ratio), (1.0, 1, 1.0, 1.0));
        assert!(r.hypothesis_ok);

        let f = fp(101);
        let ap = sc(f, &[1, 2, 3, 4]);
        let r = corollary4_report(&ap, &ap).unwrap();
        assert_eq!(r.sumset_size, 7);
        assert_eq!(r.k, 1.75);
        // 4 = 1·4 = 2·2 = 4·1
        assert_eq!(r.max_r, 3);
        assert!((r.bound_shape - 6.815530264306177).abs() < 1e-12);
        assert!((r.ratio - 0.4401711801811507).abs() < 1e-12);
        assert!(r.hypothesis_ok);

        let gp = sc(f, &[2, 4, 8, 16]);
        let r = corollary4_report(&gp, &gp).unwrap();
        // {4, 6, 8, 10, 12, 16, 18, 20, 24, 32}
        assert_eq!(r.sumset_size, 10);
        // 32 = 2·16 = 4·8 = 8·4 = 16·2
        assert_eq!(r.max_r, 4);
        // 10 <= sqrt(101)
        assert!(r.hypothesis_ok);

        assert_eq!(
            corollary4_report(&sc(f, &[1, 2]), &sc(f, &[1])),
            Err(Error::Unbalanced(2, 1))
        );
    }

    #[test]
    fn beck_examples() {
        let f5 = fp(5);
        let diag = PointSet::from_ints(f5, (0..5).map(|x| (x, x)));
        let s = beck_statistics(&diag, 1.0).unwrap();
        assert_eq!((s.max_richness, s.defined_count), (5, 1));
        assert_eq!(s.dyadic_classes, BTreeMap::from([(2, 1)]));

        let f7 = fp(7);
        let three = PointSet::from_ints(f7, [(0, 1), (2, 3), (4, 6)]);
        let s = beck_statistics(&three, 1.0).unwrap();
        assert_eq!((s.max_richness, s.defined_count), (3, 1));
        assert!((s.rich_threshold_lo - 3f64.powf(3.0 / 7.0)).abs() < 1e-12);
        assert_eq!(s.rich_threshold_hi, 3.0);

        let f11 = fp(11);
        let pts = PointSet::from_ints(
            f11,
            [
                (0, 3),
                (1, 7),
                (2, 2),
                (3, 9),
                (4, 4),
                (5, 0),
                (6, 10),
                (7, 7),
                (8, 1),
                (9, 5),
            ],
        );
        let s = beck_statistics(&pts, 2.0).unwrap();
        let oracle = rich_transforms_brute(&pts, 3, BruteMode::FullGroup).unwrap();
        assert_eq!(s.defined_count, oracle.len());
        let oracle_max = oracle.iter().map(|f| richness(f, &pts)).max().unwrap_or(0);
        assert_eq!(s.max_richness, oracle_max);

        let two = PointSet::from_ints(f7, [(0, 1), (2, 3)]);
        assert_eq!(beck_statistics(&two, 1.0), Err(Error::TooFewPoints(2)));
    }

    #[test]
    fn shift_invert_examples() {
        let f7 = fp(7);
        assert!(expander_shift_invert(&sc(f7, &[3])).is_empty());
        assert_eq!(
            expander_shift_invert(&sc(f7, &[1, 2])).values(),
            vec![0, 1, 2, 3]
        );
        assert_eq!(expander_shift_invert(&sc(f7, &[1, 2, 4])).len(), 7);
    }

    #[test]
    fn rational_examples() {
        let f5 = fp(5);
        assert!(expander_rational(&sc(f5, &[0])).is_empty());
        assert_eq!(
            expander_rational(&sc(f5, &[0, 1])).values(),
            vec![0, 1, 2, 3]
        );
        let f13 = fp(13);
        let out = expander_rational(&sc(f13, &[1, 2, 3]));
        // Direct enumeration of the 81 quadruples.
        let mut oracle = BTreeSet::new();
        for a in 1..=3i64 {
            for b in 1..=3i64 {
                for c in 1..=3i64 {
                    for d in 1..=3i64 {
                        let num = f13.elem(a * b + c);
                        oracle.insert(f13.div(num, f13.elem(b + d)).unwrap().value());
                    }
                }
            }
        }
        assert_eq!(out.values(), oracle.into_iter().collect::<Vec<_>>());
        assert_eq!(out.len(), 12);
    }

    #[test]
    fn equivalence_examples() {
        let f7 = fp(7);
        assert_eq!(
            projective_equivalence_count(&sc(f7, &[0, 1, 2]), &sc(f7, &[0, 1, 2, 3])).unwrap(),
            EquivalenceCount {
                map_count: 0,
                subset_count: 0
            }
        );
        let f5 = fp(5);
        let all = sc(f5, &[0, 1, 2, 3, 4]);
        assert_eq!(
            projective_equivalence_count(&all, &sc(f5, &[0, 1, 2]))
                .unwrap()
                .subset_count,
            10
        );
        assert_eq!(
            projective_equivalence_count(&sc(f7, &[0, 1, 2]), &sc(f7, &[0, 1, 2])).unwrap(),
            EquivalenceCount {
                map_count: 6,
                subset_count: 1
            }
        );
        assert_eq!(
            projective_equivalence_count(&all, &sc(f5, &[0, 1])),
            Err(Error::PatternTooSmall(2))
        );
    }

    #[test]
    fn equivalence_matches_group_scan() {
        let f = fp(11);
        let a = sc(f, &[0, 1, 2, 3, 5, 8, 9]);
        let s = sc(f, &[0, 1, 3, 4]);
        let got = projective_equivalence_count(&a, &s).unwrap();
        let mut maps = 0;
        let mut images = BTreeSet::new();
        for g in f.pgl2() {
            let image: Option<Vec<u64>> = s
                .iter()
                .map(|x| {
                    g.eval_affine(x)
                        .filter(|y| a.contains(*y))
                        .map(|y| y.value())
                })
                .collect();
            if let Some(mut image) = image {
                maps += 1;
                image.sort();
                images.insert(image);
            }
        }
        assert_eq!(got.map_count, maps);
        assert_eq!(got.subset_count, images.len());
    }
}
