//! Pivot reduction: transformations through a fixed point `q` are conjugated
//! into affine lines, and the point set is transplanted so that incidences
//! survive. Rich transformations are then recovered from rich lines.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::AddAssign;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, Matrix2, MoebiusMap, PrimeField};
use crate::incidence::{lies_on, richness, Point, PointSet, TransformSet};

/// A line of F_p² in canonical form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AffineLine {
    /// `y = slope * x + intercept`
    NonVertical {
        slope: FieldElement,
        intercept: FieldElement,
    },
    /// `x = c`
    Vertical(FieldElement),
}

impl AffineLine {
    /// The line through two distinct points.
    pub fn through(field: &PrimeField, s: &Point, t: &Point) -> AffineLine {
        debug_assert_ne!(s, t);
        if s.x == t.x {
            return AffineLine::Vertical(s.x);
        }
        let slope = field
            .div(field.sub(t.y, s.y), field.sub(t.x, s.x))
            .expect("distinct abscissae");
        let intercept = field.sub(s.y, field.mul(slope, s.x));
        AffineLine::NonVertical { slope, intercept }
    }

    pub fn contains(&self, field: &PrimeField, s: &Point) -> bool {
        match *self {
            AffineLine::NonVertical { slope, intercept } => {
                s.y == field.add(field.mul(slope, s.x), intercept)
            }
            AffineLine::Vertical(c) => s.x == c,
        }
    }
}

impl fmt::Display for AffineLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AffineLine::NonVertical { slope, intercept } => write!(f, "y={slope}x+{intercept}"),
            AffineLine::Vertical(c) => write!(f, "x={c}"),
        }
    }
}

/// Splits the members of `T` passing through `q` into affine (`c = 0`) and
/// curved (`c != 0`) parts.
pub fn transforms_through(maps: &TransformSet, q: &Point) -> (TransformSet, TransformSet) {
    let field = maps.field();
    let mut lines = TransformSet::empty(field);
    let mut curved = TransformSet::empty(field);
    for f in maps.iter().filter(|f| lies_on(q, f)) {
        let part = if f.is_affine() {
            &mut lines
        } else {
            &mut curved
        };
        part.insert(*f).expect("same field");
    }
    (lines, curved)
}

/// `f` rescaled so that `c = 1`; requires `f` to pass through `q`.
fn normalized_through(f: &MoebiusMap, q: &Point) -> Result<Matrix2> {
    if f.is_affine() {
        return Err(Error::WrongBranch);
    }
    if !lies_on(q, f) {
        return Err(Error::PivotMismatch);
    }
    let field = f.field();
    Ok(f.matrix().scale(field.inv(f.c())?, &field))
}

/// `g1 ∘ f ∘ g2` as a raw matrix product, with `f` normalized to `c = 1`,
/// `g1(x) = 1/(q2 - x)` and `g2(x) = q1 - 1/x`. The result is upper
/// triangular with the same determinant as the normalized `f`.
pub fn conjugate_matrix(f: &MoebiusMap, q: &Point) -> Result<Matrix2> {
    let field = f.field();
    let mf = normalized_through(f, q)?;
    let zero = FieldElement::ZERO;
    let one = FieldElement::ONE;
    let g1 = Matrix2::new(zero, one, field.neg(one), q.y);
    let g2 = Matrix2::new(q.x, field.neg(one), one, zero);
    Ok(g1.mul(&mf, &field).mul(&g2, &field))
}

/// Image of a curved transformation through `q` as the line
/// `y = ((q1 + d) x - 1) / (a - q2)`.
pub fn phi_q(f: &MoebiusMap, q: &Point) -> Result<AffineLine> {
    let field = f.field();
    let mf = normalized_through(f, q)?;
    let u = field.sub(mf.a, q.y);
    // u = 0 would make f singular.
    let u_inv = field.inv(u).expect("a != q2 for nonsingular f");
    Ok(AffineLine::NonVertical {
        slope: field.mul(field.add(q.x, mf.d), u_inv),
        intercept: field.neg(u_inv),
    })
}

/// `ψ(s) = (1/(q1 - s1), 1/(q2 - s2))`, undefined on the row and column of `q`.
pub fn psi_point(field: &PrimeField, s: &Point, q: &Point) -> Option<Point> {
    let x = field.inv(field.sub(q.x, s.x)).ok()?;
    let y = field.inv(field.sub(q.y, s.y)).ok()?;
    Some(Point::new(x, y))
}

/// Transplants `P` through `ψ`, returning the image and how many points were
/// dropped for sharing a row or column with `q`.
pub fn psi_q(points: &PointSet, q: &Point) -> (PointSet, usize) {
    let field = points.field();
    let mut image = PointSet::empty(field);
    let mut excluded = 0;
    for s in points.iter() {
        match psi_point(&field, s, q) {
            Some(t) => {
                image.insert(t);
            }
            None => excluded += 1,
        }
    }
    (image, excluded)
}

/// Number of points of `P` on every line spanned by at least two of them.
pub fn line_point_counts(points: &PointSet) -> BTreeMap<AffineLine, usize> {
    let field = points.field();
    let pts: Vec<Point> = points.iter().copied().collect();
    let mut pairs: HashMap<AffineLine, usize> = HashMap::new();
    for (i, s) in pts.iter().enumerate() {
        for t in &pts[i + 1..] {
            *pairs.entry(AffineLine::through(&field, s, t)).or_default() += 1;
        }
    }
    pairs
        .into_iter()
        .map(|(line, c)| (line, points_from_pairs(c)))
        .collect()
}

/// Solves `m(m - 1)/2 = pairs` for `m`.
fn points_from_pairs(pairs: usize) -> usize {
    let mut m = ((1.0 + (1.0 + 8.0 * pairs as f64).sqrt()) / 2.0).round() as usize;
    while m * (m - 1) / 2 > pairs {
        m -= 1;
    }
    while m * (m + 1) / 2 <= pairs {
        m += 1;
    }
    debug_assert_eq!(m * (m - 1) / 2, pairs);
    m
}

/// Lines containing at least `j >= 2` points of `P`.
pub fn rich_lines(points: &PointSet, j: usize) -> Result<BTreeSet<AffineLine>> {
    if j < 2 {
        return Err(Error::UnsupportedThreshold { k: j, min: 2 });
    }
    Ok(line_point_counts(points)
        .into_iter()
        .filter(|&(_, n)| n >= j)
        .map(|(line, _)| line)
        .collect())
}

/// Inverts `phi_q`. Lines outside its image (vertical, zero intercept, or zero
/// slope) give `None`.
pub fn pullback_line(line: &AffineLine, q: &Point, field: PrimeField) -> Option<MoebiusMap> {
    let AffineLine::NonVertical { slope, intercept } = *line else {
        return None;
    };
    if intercept.is_zero() {
        return None;
    }
    let f = &field;
    let u = f.neg(f.inv(intercept).ok()?);
    let a = f.add(q.y, u);
    let d = f.sub(f.mul(slope, u), q.x);
    let b = f.sub(f.mul(q.y, f.add(q.x, d)), f.mul(a, q.x));
    // det = u * (q1 + d) = slope * u², so slope = 0 is singular.
    MoebiusMap::new(field, a, b, FieldElement::ONE, d).ok()
}

/// Affine (`c = 0`) maps through `q` carrying at least `k` points of `P`,
/// found by grouping the other points by their slope from `q`.
pub fn affine_rich_through(points: &PointSet, q: &Point, k: usize) -> Vec<MoebiusMap> {
    let field = points.field();
    let mut by_slope: BTreeMap<FieldElement, usize> = BTreeMap::new();
    for s in points.iter() {
        if s.x == q.x || s.y == q.y {
            continue;
        }
        let slope = field
            .div(field.sub(s.y, q.y), field.sub(s.x, q.x))
            .expect("s.x != q.x");
        *by_slope.entry(slope).or_default() += 1;
    }
    let on_q = usize::from(points.contains(q));
    by_slope
        .into_iter()
        .filter(|&(_, n)| n + on_q >= k)
        .map(|(slope, _)| {
            let b = field.sub(q.y, field.mul(slope, q.x));
            MoebiusMap::new(field, slope, b, FieldElement::ZERO, FieldElement::ONE)
                .expect("nonzero slope")
        })
        .collect()
}

/// Result of the pivot enumeration: the rich set plus, for each member, how
/// many pivots produced it before deduplication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotEnumeration {
    pub maps: TransformSet,
    pub multiplicity: BTreeMap<MoebiusMap, usize>,
}

/// k-rich transformations for a single pivot `q ∈ P`, taken from the whole group.
pub fn rich_through_pivot(points: &PointSet, q: &Point, k: usize) -> Result<Vec<MoebiusMap>> {
    if k < 3 {
        return Err(Error::UnsupportedThreshold { k, min: 3 });
    }
    let field = points.field();
    let (image, _) = psi_q(points, q);
    let mut found: BTreeSet<MoebiusMap> = rich_lines(&image, k - 1)?
        .iter()
        .filter_map(|line| pullback_line(line, q, field))
        .collect();
    found.extend(affine_rich_through(points, q, k));
    // ψ(P) can carry collinearities with no preimage among curved maps.
    found.retain(|f| richness(f, points) >= k);
    Ok(found.into_iter().collect())
}

/// All k-rich transformations with respect to `P` (k >= 3), recovered pivot by
/// pivot from (k - 1)-rich lines of the transplanted point sets.
pub fn rich_transforms_via_pivots(points: &PointSet, k: usize) -> Result<PivotEnumeration> {
    if k < 3 {
        return Err(Error::UnsupportedThreshold { k, min: 3 });
    }
    let pivots: Vec<Point> = points.iter().copied().collect();
    let per_pivot = pivots
        .par_iter()
        .map(|q| rich_through_pivot(points, q, k))
        .collect::<Result<Vec<_>>>()?;
    let mut multiplicity: BTreeMap<MoebiusMap, usize> = BTreeMap::new();
    for f in per_pivot.into_iter().flatten() {
        *multiplicity.entry(f).or_default() += 1;
    }
    let maps = TransformSet::new(points.field(), multiplicity.keys().copied())?;
    Ok(PivotEnumeration { maps, multiplicity })
}

/// The k-rich members of an explicit set `T`, found through the pivot
/// reduction: curved members through `q` are counted as lines against
/// `ψ(P)`, affine members directly.
pub fn rich_members_via_pivots(
    points: &PointSet,
    maps: &TransformSet,
    k: usize,
) -> Result<PivotEnumeration> {
    if k < 3 {
        return Err(Error::UnsupportedThreshold { k, min: 3 });
    }
    if points.field() != maps.field() {
        return Err(Error::ModulusMismatch(
            points.field().modulus(),
            maps.field().modulus(),
        ));
    }
    let field = points.field();
    let pivots: Vec<Point> = points.iter().copied().collect();
    let per_pivot = pivots
        .par_iter()
        .map(|q| -> Result<Vec<MoebiusMap>> {
            let (lines, curved) = transforms_through(maps, q);
            let (image, _) = psi_q(points, q);
            let mut out = Vec::new();
            for f in curved.iter() {
                let line = phi_q(f, q)?;
                if image.iter().filter(|t| line.contains(&field, t)).count() + 1 >= k {
                    out.push(*f);
                }
            }
            out.extend(lines.iter().filter(|f| richness(f, points) >= k).copied());
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut multiplicity: BTreeMap<MoebiusMap, usize> = BTreeMap::new();
    for f in per_pivot.into_iter().flatten() {
        *multiplicity.entry(f).or_default() += 1;
    }
    let maps = TransformSet::new(field, multiplicity.keys().copied())?;
    Ok(PivotEnumeration { maps, multiplicity })
}

/// The dyadic split point `max(3, |P|^{15/19} / |T|^{4/19})`.
pub fn dyadic_threshold(num_points: usize, num_maps: usize) -> f64 {
    let lp = (num_points.max(1) as f64).ln();
    let lt = (num_maps.max(1) as f64).ln();
    (15.0 / 19.0 * lp - 4.0 / 19.0 * lt).exp().max(3.0)
}

/// Tallies from an exhaustive check of the reduction over one field.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ReductionReport {
    pub p: u64,
    pub pivots: u64,
    pub maps_checked: u64,
    pub triples_checked: u64,
    pub incidence_violations: u64,
    pub injectivity_collisions: u64,
    pub determinant_mismatches: u64,
    pub round_trip_failures: u64,
}

impl ReductionReport {
    pub fn violations(&self) -> u64 {
        self.incidence_violations
            + self.injectivity_collisions
            + self.determinant_mismatches
            + self.round_trip_failures
    }
}

impl AddAssign for ReductionReport {
    fn add_assign(&mut self, o: Self) {
        self.pivots += o.pivots;
        self.maps_checked += o.maps_checked;
        self.triples_checked += o.triples_checked;
        self.incidence_violations += o.incidence_violations;
        self.injectivity_collisions += o.injectivity_collisions;
        self.determinant_mismatches += o.determinant_mismatches;
        self.round_trip_failures += o.round_trip_failures;
    }
}

/// Checks the pivot reduction over every pivot `q ∈ F_p²`, every curved map
/// through `q`, and every point off the row and column of `q`:
/// incidence equivalence, injectivity of `φ_q`, determinant preservation of
/// the conjugate matrix, and the pullback round trip.
pub fn verify_reduction(field: PrimeField) -> ReductionReport {
    verify_reduction_at(&PointSet::grid(field))
}

/// [`verify_reduction`] restricted to the given pivots.
pub fn verify_reduction_at(pivots: &PointSet) -> ReductionReport {
    let field = pivots.field();
    let group: Vec<MoebiusMap> = field.pgl2().filter(|f| !f.is_affine()).collect();
    let grid: Vec<Point> = PointSet::grid(field).iter().copied().collect();
    let qs: Vec<Point> = pivots.iter().copied().collect();
    let partials: Vec<ReductionReport> = qs
        .par_iter()
        .map(|q| {
            let mut rep = ReductionReport {
                pivots: 1,
                ..Default::default()
            };
            let others: Vec<(Point, Point)> = grid
                .iter()
                .filter_map(|s| psi_point(&field, s, q).map(|t| (*s, t)))
                .collect();
            let mut seen = HashSet::new();
            for f in group.iter().filter(|f| lies_on(q, f)) {
                rep.maps_checked += 1;
                let line = phi_q(f, q).expect("curved map through q");
                if !seen.insert(line) {
                    rep.injectivity_collisions += 1;
                }
                let conj = conjugate_matrix(f, q).expect("curved map through q");
                let mf = normalized_through(f, q).expect("curved map through q");
                if conj.det(&field) != mf.det(&field) {
                    rep.determinant_mismatches += 1;
                }
                if pullback_line(&line, q, field) != Some(*f) {
                    rep.round_trip_failures += 1;
                }
                for (s, t) in &others {
                    rep.triples_checked += 1;
                    if lies_on(s, f) != line.contains(&field, t) {
                        rep.incidence_violations += 1;
                    }
                }
            }
            rep
        })
        .collect();
    let mut total = ReductionReport {
        p: field.modulus(),
        ..Default::default()
    };
    for r in partials {
        total += r;
    }
    total
}
