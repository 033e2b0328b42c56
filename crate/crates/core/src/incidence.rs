//! Point sets, transformation sets and exact incidence counting, including the
//! brute-force enumerations of rich transformations used as oracles elsewhere.

use std::collections::BTreeSet;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldElement, MoebiusMap, PrimeField, ProjectivePoint};

/// An affine point of F_p².
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub x: FieldElement,
    pub y: FieldElement,
}

impl Point {
    pub fn new(x: FieldElement, y: FieldElement) -> Self {
        Point { x, y }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.x, self.y)
    }
}

/// A deduplicated set of affine points, iterated in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    field: PrimeField,
    points: BTreeSet<Point>,
}

impl PointSet {
    pub fn new(field: PrimeField, points: impl IntoIterator<Item = Point>) -> Self {
        PointSet {
            field,
            points: points.into_iter().collect(),
        }
    }

    pub fn empty(field: PrimeField) -> Self {
        Self::new(field, [])
    }

    pub fn from_ints(field: PrimeField, pts: impl IntoIterator<Item = (i64, i64)>) -> Self {
        Self::new(
            field,
            pts.into_iter()
                .map(|(x, y)| Point::new(field.elem(x), field.elem(y))),
        )
    }

    /// The whole plane F_p².
    pub fn grid(field: PrimeField) -> Self {
        Self::new(
            field,
            field
                .elements()
                .flat_map(|x| field.elements().map(move |y| Point::new(x, y))),
        )
    }

    /// The Cartesian product A × B.
    pub fn cartesian(
        field: PrimeField,
        a: impl IntoIterator<Item = FieldElement>,
        b: impl IntoIterator<Item = FieldElement> + Clone,
    ) -> Self {
        Self::new(
            field,
            a.into_iter()
                .flat_map(|x| b.clone().into_iter().map(move |y| Point::new(x, y))),
        )
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, s: &Point) -> bool {
        self.points.contains(s)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Point> + Clone {
        self.points.iter()
    }

    pub fn insert(&mut self, s: Point) -> bool {
        self.points.insert(s)
    }
}

/// A deduplicated set of Moebius transformations over one field, iterated in
/// lexicographic order of canonical tuples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformSet {
    field: PrimeField,
    maps: BTreeSet<MoebiusMap>,
}

impl TransformSet {
    pub fn new(field: PrimeField, maps: impl IntoIterator<Item = MoebiusMap>) -> Result<Self> {
        let mut set = Self::empty(field);
        for f in maps {
            set.insert(f)?;
        }
        Ok(set)
    }

    pub fn empty(field: PrimeField) -> Self {
        TransformSet {
            field,
            maps: BTreeSet::new(),
        }
    }

    /// The whole of PGL(2, p).
    pub fn full_group(field: PrimeField) -> Self {
        TransformSet {
            field,
            maps: field.pgl2().collect(),
        }
    }

    pub fn insert(&mut self, f: MoebiusMap) -> Result<bool> {
        if f.field() != self.field {
            return Err(Error::ModulusMismatch(
                self.field.modulus(),
                f.field().modulus(),
            ));
        }
        Ok(self.maps.insert(f))
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn contains(&self, f: &MoebiusMap) -> bool {
        self.maps.contains(f)
    }

    pub fn iter(&self) -> impl Iterator<Item = &MoebiusMap> + Clone {
        self.maps.iter()
    }

    pub fn is_subset(&self, other: &TransformSet) -> bool {
        self.maps.is_subset(&other.maps)
    }

    pub(crate) fn par_iter(&self) -> rayon::collections::btree_set::Iter<'_, MoebiusMap> {
        self.maps.par_iter()
    }
}

/// Affine incidence: `y = f(x)` with `x` not the pole of `f`.
pub fn lies_on(s: &Point, f: &MoebiusMap) -> bool {
    let field = f.field();
    let den = field.add(field.mul(f.c(), s.x), f.d());
    if den.is_zero() {
        return false;
    }
    let num = field.add(field.mul(f.a(), s.x), f.b());
    field.mul(s.y, den) == num
}

/// `|{s ∈ P : s lies on f}|`.
pub fn richness(f: &MoebiusMap, points: &PointSet) -> usize {
    points.iter().filter(|s| lies_on(s, f)).count()
}

fn check_fields(a: PrimeField, b: PrimeField) -> Result<()> {
    if a != b {
        return Err(Error::ModulusMismatch(a.modulus(), b.modulus()));
    }
    Ok(())
}

/// I(P, T): the number of pairs `(s, f)` with `s` on `f`.
pub fn count_incidences(points: &PointSet, maps: &TransformSet) -> Result<u64> {
    check_fields(points.field(), maps.field())?;
    Ok(maps.par_iter().map(|f| richness(f, points) as u64).sum())
}

/// How the brute-force enumeration of rich transformations proceeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BruteMode {
    /// Scan every element of PGL(2, p).
    FullGroup,
    /// Interpolate through every admissible triple of points.
    Triples,
}

/// All transformations (from the whole group) with at least `k` points of `P`
/// on them.
pub fn rich_transforms_brute(points: &PointSet, k: usize, mode: BruteMode) -> Result<TransformSet> {
    let field = points.field();
    match mode {
        BruteMode::FullGroup => {
            if k < 1 {
                return Err(Error::UnsupportedThreshold { k, min: 1 });
            }
            let maps: BTreeSet<_> = field
                .pgl2()
                .par_bridge()
                .filter(|f| richness(f, points) >= k)
                .collect();
            Ok(TransformSet { field, maps })
        }
        BruteMode::Triples => {
            if k < 3 {
                return Err(Error::UnsupportedThreshold { k, min: 3 });
            }
            let maps = interpolate_triples(points)
                .into_iter()
                .filter(|f| richness(f, points) >= k)
                .collect();
            Ok(TransformSet { field, maps })
        }
    }
}

/// Transformations defined by `P`, i.e. passing through at least three of its points.
pub fn transforms_defined_by(points: &PointSet) -> TransformSet {
    rich_transforms_brute(points, 3, BruteMode::Triples).expect("k = 3 is supported")
}

/// Every map through a triple of points with pairwise-distinct abscissae and
/// pairwise-distinct ordinates.
fn interpolate_triples(points: &PointSet) -> BTreeSet<MoebiusMap> {
    let field = points.field();
    let pts: Vec<Point> = points.iter().copied().collect();
    let n = pts.len();
    (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let pts = &pts;
            (i + 1..n).flat_map(move |j| {
                (j + 1..n).filter_map(move |l| {
                    let (s, t, u) = (pts[i], pts[j], pts[l]);
                    let distinct = |a: FieldElement, b, c| a != b && b != c && a != c;
                    if !distinct(s.x, t.x, u.x) || !distinct(s.y, t.y, u.y) {
                        return None;
                    }
                    let src = [s.x, t.x, u.x].map(ProjectivePoint::Finite);
                    let dst = [s.y, t.y, u.y].map(ProjectivePoint::Finite);
                    Some(MoebiusMap::through(field, src, dst).expect("distinct triples"))
                })
            })
        })
        .collect()
}
