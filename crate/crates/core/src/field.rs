//! Arithmetic in F_p, the projective line P(F_p), and Moebius transformations
//! as canonical representatives of PGL(2, p).

use std::fmt;

use crate::error::{Error, Result};

/// Largest accepted modulus (exclusive). Keeps every product of two residues
/// well inside `u64`.
pub const MAX_MODULUS: u64 = 1 << 20;

/// The prime field F_p. Cheap to copy; every element operation goes through it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeField {
    p: u64,
}

/// A residue in `[0, p)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p >= MAX_MODULUS {
            return Err(Error::ModulusTooLarge(p));
        }
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(PrimeField { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    /// Reduces an arbitrary integer into the field.
    pub fn elem(&self, v: i64) -> FieldElement {
        FieldElement(v.rem_euclid(self.p as i64) as u64)
    }

    pub fn add(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        FieldElement((x.0 + y.0) % self.p)
    }

    pub fn sub(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        FieldElement((x.0 + self.p - y.0) % self.p)
    }

    pub fn neg(&self, x: FieldElement) -> FieldElement {
        FieldElement((self.p - x.0) % self.p)
    }

    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        FieldElement(x.0 * y.0 % self.p)
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, x: FieldElement) -> Result<FieldElement> {
        if x.0 == 0 {
            return Err(Error::DivisionByZero);
        }
        let (mut r0, mut r1) = (self.p as i64, x.0 as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(self.elem(t0))
    }

    pub fn div(&self, x: FieldElement, y: FieldElement) -> Result<FieldElement> {
        Ok(self.mul(x, self.inv(y)?))
    }

    /// All residues in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> + Clone {
        (0..self.p).map(FieldElement)
    }

    /// The p + 1 points of the projective line: the finite residues, then infinity.
    pub fn projective_points(&self) -> impl Iterator<Item = ProjectivePoint> {
        self.elements()
            .map(ProjectivePoint::Finite)
            .chain(std::iter::once(ProjectivePoint::Infinity))
    }

    /// Order of PGL(2, p), i.e. p(p - 1)(p + 1).
    pub fn pgl2_order(&self) -> u64 {
        self.p * (self.p - 1) * (self.p + 1)
    }

    /// Every element of PGL(2, p) in lexicographic order of canonical tuples.
    pub fn pgl2(&self) -> impl Iterator<Item = MoebiusMap> + '_ {
        let field = *self;
        let p = self.p;
        // (0, 1, c, d) with c != 0, then (1, b, c, d) with d != bc.
        let inverted = (1..p).flat_map(move |c| {
            (0..p).map(move |d| MoebiusMap {
                field,
                m: [0, 1, c, d].map(FieldElement),
            })
        });
        let monic = (0..p).flat_map(move |b| {
            (0..p).flat_map(move |c| {
                (0..p)
                    .filter(move |&d| d != b * c % p)
                    .map(move |d| MoebiusMap {
                        field,
                        m: [1, b, c, d].map(FieldElement),
                    })
            })
        });
        inverted.chain(monic)
    }
}

/// A point of P(F_p) = F_p ∪ {∞}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjectivePoint {
    Finite(FieldElement),
    Infinity,
}

impl ProjectivePoint {
    pub fn finite(self) -> Option<FieldElement> {
        match self {
            ProjectivePoint::Finite(x) => Some(x),
            ProjectivePoint::Infinity => None,
        }
    }
}

impl From<FieldElement> for ProjectivePoint {
    fn from(x: FieldElement) -> Self {
        ProjectivePoint::Finite(x)
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectivePoint::Finite(x) => write!(f, "{x}"),
            ProjectivePoint::Infinity => f.write_str("inf"),
        }
    }
}

/// A raw 2x2 matrix `[[a, b], [c, d]]` over F_p, not reduced modulo scalars.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Matrix2 {
    pub a: FieldElement,
    pub b: FieldElement,
    pub c: FieldElement,
    pub d: FieldElement,
}

impl Matrix2 {
    pub fn new(a: FieldElement, b: FieldElement, c: FieldElement, d: FieldElement) -> Self {
        Matrix2 { a, b, c, d }
    }

    pub fn det(&self, field: &PrimeField) -> FieldElement {
        field.sub(field.mul(self.a, self.d), field.mul(self.b, self.c))
    }

    pub fn mul(&self, rhs: &Matrix2, field: &PrimeField) -> Matrix2 {
        let dot = |x1, y1, x2, y2| field.add(field.mul(x1, y1), field.mul(x2, y2));
        Matrix2 {
            a: dot(self.a, rhs.a, self.b, rhs.c),
            b: dot(self.a, rhs.b, self.b, rhs.d),
            c: dot(self.c, rhs.a, self.d, rhs.c),
            d: dot(self.c, rhs.b, self.d, rhs.d),
        }
    }

    pub fn scale(&self, s: FieldElement, field: &PrimeField) -> Matrix2 {
        Matrix2 {
            a: field.mul(self.a, s),
            b: field.mul(self.b, s),
            c: field.mul(self.c, s),
            d: field.mul(self.d, s),
        }
    }
}

/// A Moebius transformation `x ↦ (ax + b) / (cx + d)`, stored as the unique
/// representative of its PGL(2, p) class whose first nonzero entry among
/// `(a, b, c, d)` is 1.
///
/// Ordering is lexicographic on `(a, b, c, d)` within one field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MoebiusMap {
    m: [FieldElement; 4],
    field: PrimeField,
}

impl MoebiusMap {
    pub fn new(
        field: PrimeField,
        a: FieldElement,
        b: FieldElement,
        c: FieldElement,
        d: FieldElement,
    ) -> Result<Self> {
        Self::from_matrix(field, Matrix2::new(a, b, c, d))
    }

    /// Convenience constructor reducing arbitrary integers mod p.
    pub fn from_ints(field: PrimeField, [a, b, c, d]: [i64; 4]) -> Result<Self> {
        Self::new(
            field,
            field.elem(a),
            field.elem(b),
            field.elem(c),
            field.elem(d),
        )
    }

    pub fn from_matrix(field: PrimeField, m: Matrix2) -> Result<Self> {
        if m.det(&field).is_zero() {
            return Err(Error::SingularMatrix);
        }
        let lead = [m.a, m.b, m.c, m.d]
            .into_iter()
            .find(|x| !x.is_zero())
            .expect("nonsingular matrix has a nonzero entry");
        let m = m.scale(field.inv(lead)?, &field);
        Ok(MoebiusMap {
            m: [m.a, m.b, m.c, m.d],
            field,
        })
    }

    pub fn identity(field: PrimeField) -> Self {
        MoebiusMap {
            m: [
                FieldElement::ONE,
                FieldElement::ZERO,
                FieldElement::ZERO,
                FieldElement::ONE,
            ],
            field,
        }
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn a(&self) -> FieldElement {
        self.m[0]
    }
    pub fn b(&self) -> FieldElement {
        self.m[1]
    }
    pub fn c(&self) -> FieldElement {
        self.m[2]
    }
    pub fn d(&self) -> FieldElement {
        self.m[3]
    }

    /// The canonical tuple `(a, b, c, d)` as plain integers.
    pub fn tuple(&self) -> [u64; 4] {
        self.m.map(FieldElement::value)
    }

    pub fn matrix(&self) -> Matrix2 {
        Matrix2::new(self.m[0], self.m[1], self.m[2], self.m[3])
    }

    /// True when `c = 0`, i.e. the map is the affine line `y = (a/d) x + b/d`.
    pub fn is_affine(&self) -> bool {
        self.c().is_zero()
    }

    pub fn eval(&self, x: ProjectivePoint) -> ProjectivePoint {
        let f = &self.field;
        let [a, b, c, d] = self.m;
        match x {
            ProjectivePoint::Infinity => {
                if c.is_zero() {
                    ProjectivePoint::Infinity
                } else {
                    ProjectivePoint::Finite(f.div(a, c).expect("c != 0"))
                }
            }
            ProjectivePoint::Finite(x) => {
                let num = f.add(f.mul(a, x), b);
                let den = f.add(f.mul(c, x), d);
                match f.div(num, den) {
                    Ok(y) => ProjectivePoint::Finite(y),
                    Err(_) => ProjectivePoint::Infinity,
                }
            }
        }
    }

    /// Evaluates at an affine argument; `None` at the pole.
    pub fn eval_affine(&self, x: FieldElement) -> Option<FieldElement> {
        self.eval(ProjectivePoint::Finite(x)).finite()
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &MoebiusMap) -> Result<MoebiusMap> {
        self.check_same_field(other)?;
        let prod = self.matrix().mul(&other.matrix(), &self.field);
        MoebiusMap::from_matrix(self.field, prod)
    }

    pub fn inverse(&self) -> MoebiusMap {
        let f = &self.field;
        let [a, b, c, d] = self.m;
        let adj = Matrix2::new(d, f.neg(b), f.neg(c), a);
        MoebiusMap::from_matrix(self.field, adj).expect("adjugate of a nonsingular matrix")
    }

    /// The unique map sending `src[i]` to `dst[i]` for i = 0, 1, 2.
    pub fn through(
        field: PrimeField,
        src: [ProjectivePoint; 3],
        dst: [ProjectivePoint; 3],
    ) -> Result<MoebiusMap> {
        let to_src = to_zero_one_infinity(field, src)?;
        let to_dst = to_zero_one_infinity(field, dst)?;
        to_dst.inverse().compose(&to_src)
    }

    fn check_same_field(&self, other: &MoebiusMap) -> Result<()> {
        if self.field != other.field {
            return Err(Error::ModulusMismatch(self.field.p, other.field.p));
        }
        Ok(())
    }
}

impl fmt::Display for MoebiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.m;
        write!(f, "{a},{b},{c},{d}")
    }
}

/// The map sending `z[0] ↦ 0`, `z[1] ↦ 1`, `z[2] ↦ ∞`.
fn to_zero_one_infinity(field: PrimeField, z: [ProjectivePoint; 3]) -> Result<MoebiusMap> {
    if z[0] == z[1] || z[1] == z[2] || z[0] == z[2] {
        return Err(Error::DegenerateTriple);
    }
    let f = &field;
    let one = FieldElement::ONE;
    let zero = FieldElement::ZERO;
    use ProjectivePoint::{Finite, Infinity};
    let m = match z {
        // (z2 - z3) / (x - z3)
        [Infinity, Finite(z2), Finite(z3)] => Matrix2::new(zero, f.sub(z2, z3), one, f.neg(z3)),
        // (x - z1) / (x - z3)
        [Finite(z1), Infinity, Finite(z3)] => Matrix2::new(one, f.neg(z1), one, f.neg(z3)),
        // (x - z1) / (z2 - z1)
        [Finite(z1), Finite(z2), Infinity] => Matrix2::new(one, f.neg(z1), zero, f.sub(z2, z1)),
        // (x - z1)(z2 - z3) / ((x - z3)(z2 - z1))
        [Finite(z1), Finite(z2), Finite(z3)] => {
            let u = f.sub(z2, z3);
            let v = f.sub(z2, z1);
            Matrix2::new(u, f.neg(f.mul(z1, u)), v, f.neg(f.mul(z3, v)))
        }
        _ => unreachable!("at most one point is infinite once distinctness holds"),
    };
    MoebiusMap::from_matrix(field, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;
    use ProjectivePoint::{Finite, Infinity};

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn map(p: u64, t: [i64; 4]) -> MoebiusMap {
        MoebiusMap::from_ints(fp(p), t).unwrap()
    }

    fn pt(field: &PrimeField, v: i64) -> ProjectivePoint {
        Finite(field.elem(v))
    }

    #[test]
    fn primality_guard() {
        assert_eq!(PrimeField::new(9), Err(Error::NotPrime(9)));
        assert_eq!(PrimeField::new(1), Err(Error::NotPrime(1)));
        assert!(PrimeField::new(2).is_ok());
        assert!(PrimeField::new(3).is_ok());
        assert_eq!(
            PrimeField::new(MAX_MODULUS + 7),
            Err(Error::ModulusTooLarge(MAX_MODULUS + 7))
        );
    }

    #[test]
    fn inverse_examples() {
        let f = fp(7);
        assert_eq!(f.inv(f.elem(1)).unwrap(), f.elem(1));
        assert_eq!(f.inv(f.elem(3)).unwrap(), f.elem(5));
        assert_eq!(f.inv(f.elem(6)).unwrap(), f.elem(6));
        assert_eq!(f.inv(f.elem(0)), Err(Error::DivisionByZero));
        let big = fp(1_000_003);
        for x in [2, 17, 999_999, 123_456] {
            let x = big.elem(x);
            assert_eq!(big.mul(x, big.inv(x).unwrap()), FieldElement::ONE);
        }
    }

    #[test]
    fn canonicalization_examples() {
        assert_eq!(map(5, [2, 4, 0, 2]).tuple(), [1, 2, 0, 1]);
        assert_eq!(map(5, [1, 0, 0, 1]).tuple(), [1, 0, 0, 1]);
        assert_eq!(
            MoebiusMap::from_ints(fp(5), [1, 2, 2, 4]),
            Err(Error::SingularMatrix)
        );
    }

    #[test]
    fn eval_examples() {
        let f7 = fp(7);
        assert_eq!(MoebiusMap::identity(f7).eval(pt(&f7, 4)), pt(&f7, 4));
        let f5 = fp(5);
        let recip = map(5, [0, 1, 1, 0]);
        assert_eq!(recip.eval(pt(&f5, 0)), Infinity);
        assert_eq!(recip.eval(Infinity), pt(&f5, 0));
        let g = map(7, [3, 1, 1, 2]);
        assert_eq!(g.eval(pt(&f7, 5)), Infinity);
        assert_eq!(g.eval(pt(&f7, 1)), pt(&f7, 6));
        assert_eq!(g.eval(Infinity), pt(&f7, 3));
        let affine = map(7, [2, 1, 0, 1]);
        assert_eq!(affine.eval(Infinity), Infinity);
    }

    #[test]
    fn compose_examples() {
        let f5 = fp(5);
        let f = map(5, [1, 1, 0, 1]);
        let g = map(5, [2, 0, 0, 1]);
        assert_eq!(g.tuple(), [1, 0, 0, 3]);
        assert_eq!(MoebiusMap::identity(f5).compose(&f).unwrap(), f);
        assert_eq!(f.compose(&g).unwrap().tuple(), [1, 3, 0, 3]);
        assert_eq!(f.compose(&f.inverse()).unwrap(), MoebiusMap::identity(f5));
        let other = MoebiusMap::identity(fp(7));
        assert_eq!(f.compose(&other), Err(Error::ModulusMismatch(5, 7)));
    }

    #[test]
    fn inverse_examples_moebius() {
        let f5 = fp(5);
        assert_eq!(MoebiusMap::identity(f5).inverse(), MoebiusMap::identity(f5));
        assert_eq!(map(5, [1, 1, 0, 1]).inverse().tuple(), [1, 4, 0, 1]);
        assert_eq!(map(5, [0, 1, 1, 0]).inverse().tuple(), [0, 1, 1, 0]);
    }

    #[test]
    fn through_examples() {
        let f5 = fp(5);
        let t = |a, b, c| [pt(&f5, a), pt(&f5, b), pt(&f5, c)];
        assert_eq!(
            MoebiusMap::through(f5, t(0, 1, 2), t(0, 1, 2)).unwrap(),
            MoebiusMap::identity(f5)
        );
        let r = MoebiusMap::through(
            f5,
            [pt(&f5, 0), pt(&f5, 1), Infinity],
            [Infinity, pt(&f5, 1), pt(&f5, 0)],
        )
        .unwrap();
        assert_eq!(r.tuple(), [0, 1, 1, 0]);

        // Brute-force the unique class for (0,1,2) -> (1,0,3).
        let src = t(0, 1, 2);
        let dst = t(1, 0, 3);
        let hits: Vec<_> = f5
            .pgl2()
            .filter(|g| (0..3).all(|i| g.eval(src[i]) == dst[i]))
            .collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(MoebiusMap::through(f5, src, dst).unwrap(), hits[0]);

        assert_eq!(
            MoebiusMap::through(f5, t(0, 0, 2), t(0, 1, 2)),
            Err(Error::DegenerateTriple)
        );
        assert_eq!(
            MoebiusMap::through(f5, t(0, 1, 2), [Infinity, pt(&f5, 1), Infinity]),
            Err(Error::DegenerateTriple)
        );
    }

    #[test]
    fn pgl2_enumeration_is_sorted_and_complete() {
        for p in [2, 3, 5, 7] {
            let f = fp(p);
            let all: Vec<_> = f.pgl2().collect();
            assert_eq!(all.len() as u64, f.pgl2_order());
            assert!(all.windows(2).all(|w| w[0] < w[1]));
            // Each enumerated tuple is already canonical.
            for g in &all {
                let [a, b, c, d] = g.tuple().map(|v| v as i64);
                assert_eq!(map(p, [a, b, c, d]), *g);
            }
        }
    }

    #[test]
    fn canonical_forms_exhaustive_p5() {
        let f = fp(5);
        let mut forms = BTreeSet::new();
        for a in 0..5 {
            for b in 0..5 {
                for c in 0..5 {
                    for d in 0..5 {
                        let Ok(g) = MoebiusMap::from_ints(f, [a, b, c, d]) else {
                            continue;
                        };
                        for l in 1..5 {
                            let scaled = MoebiusMap::from_ints(f, [l * a, l * b, l * c, l * d]);
                            assert_eq!(scaled.unwrap(), g);
                        }
                        forms.insert(g);
                    }
                }
            }
        }
        assert_eq!(forms.len(), 120);
    }

    #[test]
    fn through_uniqueness_small_primes() {
        for p in [5u64, 7, 11] {
            let f = fp(p);
            let group: Vec<_> = f.pgl2().collect();
            let pts: Vec<_> = f.projective_points().collect();
            let triples = [(0, 1, 2), (p as usize, 3, 1), (2, p as usize - 1, 3)];
            for &(i, j, k) in &triples {
                for &(u, v, w) in &triples {
                    let src = [pts[i], pts[j], pts[k]];
                    let dst = [pts[v], pts[u], pts[w]];
                    let got = MoebiusMap::through(f, src, dst).unwrap();
                    let hits: Vec<_> = group
                        .iter()
                        .filter(|g| (0..3).all(|t| g.eval(src[t]) == dst[t]))
                        .collect();
                    assert_eq!(hits, vec![&got]);
                }
            }
        }
    }

    #[test]
    fn bijective_on_projective_line() {
        let f = fp(7);
        for g in f.pgl2() {
            let image: BTreeSet<_> = f.projective_points().map(|x| g.eval(x)).collect();
            assert_eq!(image.len(), 8);
        }
    }
}
