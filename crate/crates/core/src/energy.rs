//! Energy of transformation sets and translates of the hyperbolas `xy = ±1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{FieldElement, Matrix2, MoebiusMap, PrimeField, ProjectivePoint};
use crate::incidence::TransformSet;

/// Largest set accepted by [`energy_brute`].
pub const DEFAULT_ORACLE_CAP: usize = 64;

/// `E(T) = |{(f1, f2, f3, f4) ∈ T⁴ : f1 f2⁻¹ = f3 f4⁻¹}|`, computed as the sum
/// of squared multiplicities of the quotients `f1 ∘ f2⁻¹`.
pub fn energy(maps: &TransformSet) -> u64 {
    let inverses: Vec<MoebiusMap> = maps.iter().map(MoebiusMap::inverse).collect();
    let mut quotients: HashMap<MoebiusMap, u64> = HashMap::with_capacity(maps.len() * maps.len());
    for f1 in maps.iter() {
        for g in &inverses {
            let q = f1.compose(g).expect("same field");
            *quotients.entry(q).or_default() += 1;
        }
    }
    quotients.values().map(|m| m * m).sum()
}

/// Literal four-fold loop over `T⁴`. Quotients are compared by their action on
/// `0, 1, ∞`, with `f2⁻¹` found by searching the projective line rather than
/// by matrix inversion.
pub fn energy_brute(maps: &TransformSet, cap: usize) -> Result<u64> {
    let n = maps.len();
    if n > cap {
        return Err(Error::OracleTooLarge { size: n, cap });
    }
    let field = maps.field();
    let probes = [
        ProjectivePoint::Finite(FieldElement::ZERO),
        ProjectivePoint::Finite(FieldElement::ONE),
        ProjectivePoint::Infinity,
    ];
    let line: Vec<ProjectivePoint> = field.projective_points().collect();
    let ms: Vec<&MoebiusMap> = maps.iter().collect();
    let preimage = |f: &MoebiusMap, y: ProjectivePoint| {
        *line.iter().find(|&&x| f.eval(x) == y).expect("bijection")
    };
    let pre: Vec<[ProjectivePoint; 3]> =
        ms.iter().map(|f| probes.map(|y| preimage(f, y))).collect();
    let mut sig = vec![[ProjectivePoint::Infinity; 3]; n * n];
    for i in 0..n {
        for j in 0..n {
            sig[i * n + j] = pre[j].map(|x| ms[i].eval(x));
        }
    }
    let mut count = 0u64;
    for i1 in 0..n {
        for i2 in 0..n {
            for i3 in 0..n {
                for i4 in 0..n {
                    if sig[i1 * n + i2] == sig[i3 * n + i4] {
                        count += 1;
                    }
                }
            }
        }
    }
    Ok(count)
}

/// Sign of a hyperbola translate: `(y - a)(x - b) = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// The curve `(y - a)(x - b) = sign`: `a` is the y-translate, `b` the x-translate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HyperbolaTranslate {
    pub a: FieldElement,
    pub b: FieldElement,
    pub sign: Sign,
}

impl HyperbolaTranslate {
    pub fn new(a: FieldElement, b: FieldElement, sign: Sign) -> Self {
        HyperbolaTranslate { a, b, sign }
    }

    pub fn from_ints(field: PrimeField, a: i64, b: i64, sign: Sign) -> Self {
        Self::new(field.elem(a), field.elem(b), sign)
    }

    /// The unreduced matrix of `y = (a x + (ε - ab)) / (x - b)`; determinant `-ε`.
    pub fn matrix(&self, field: PrimeField) -> Matrix2 {
        let f = &field;
        let eps = f.elem(self.sign.as_i64());
        Matrix2::new(
            self.a,
            f.sub(eps, f.mul(self.a, self.b)),
            FieldElement::ONE,
            f.neg(self.b),
        )
    }

    pub fn to_moebius(&self, field: PrimeField) -> MoebiusMap {
        MoebiusMap::from_matrix(field, self.matrix(field)).expect("determinant is -ε")
    }

    /// Whether the affine point `(x, y)` satisfies the curve equation.
    pub fn contains(&self, field: &PrimeField, x: FieldElement, y: FieldElement) -> bool {
        let lhs = field.mul(field.sub(y, self.a), field.sub(x, self.b));
        lhs == field.elem(self.sign.as_i64())
    }
}

impl fmt::Display for HyperbolaTranslate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.sign.as_i64())
    }
}

/// Largest number of translates sharing a y-translate or sharing an x-translate.
pub fn m_statistic(family: &[HyperbolaTranslate]) -> Result<usize> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut rows: BTreeMap<FieldElement, usize> = BTreeMap::new();
    let mut cols: BTreeMap<FieldElement, usize> = BTreeMap::new();
    for h in family {
        *rows.entry(h.a).or_default() += 1;
        *cols.entry(h.b).or_default() += 1;
    }
    Ok(rows
        .values()
        .chain(cols.values())
        .copied()
        .max()
        .unwrap_or(0))
}

/// The family encoded as a transformation set. Distinct translates always
/// give distinct maps.
pub fn family_to_transforms(field: PrimeField, family: &[HyperbolaTranslate]) -> TransformSet {
    TransformSet::new(field, family.iter().map(|h| h.to_moebius(field))).expect("same field")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyReport {
    pub size: usize,
    pub energy: u64,
    pub m: usize,
    /// `E / (|H|² M)`
    pub ratio: f64,
}

/// Exact energy of the family against `|H|² M`.
pub fn energy_m_report(field: PrimeField, family: &[HyperbolaTranslate]) -> Result<EnergyReport> {
    let m = m_statistic(family)?;
    let maps = family_to_transforms(field, family);
    let size = maps.len();
    let e = energy(&maps);
    Ok(EnergyReport {
        size,
        energy: e,
        m,
        ratio: e as f64 / ((size * size * m) as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn set(field: PrimeField, maps: &[[i64; 4]]) -> TransformSet {
        TransformSet::new(
            field,
            maps.iter()
                .map(|t| MoebiusMap::from_ints(field, *t).unwrap()),
        )
        .unwrap()
    }

    #[test]
    fn energy_examples() {
        let f5 = fp(5);
        let cases = [
            (set(f5, &[[1, 0, 0, 1]]), 1),
            (set(f5, &[[1, 0, 0, 1], [1, 1, 0, 1]]), 6),
            (set(f5, &[[1, 0, 0, 1], [2, 0, 0, 1]]), 6),
        ];
        for (t, e) in cases {
            assert_eq!(energy(&t), e);
            assert_eq!(energy_brute(&t, DEFAULT_ORACLE_CAP).unwrap(), e);
        }
    }

    #[test]
    fn oracle_cap() {
        let f = fp(7);
        let t = TransformSet::new(f, f.pgl2().take(65)).unwrap();
        assert_eq!(
            energy_brute(&t, DEFAULT_ORACLE_CAP),
            Err(Error::OracleTooLarge { size: 65, cap: 64 })
        );
    }

    #[test]
    fn whole_group_energy() {
        // Every quotient is hit |G| times, so E(G) = |G|³.
        let f = fp(3);
        let g = TransformSet::full_group(f);
        assert_eq!(energy(&g), 24u64.pow(3));
        assert_eq!(energy_brute(&g, DEFAULT_ORACLE_CAP).unwrap(), 24u64.pow(3));
    }

    #[test]
    fn hyperbola_encoding_examples() {
        let f5 = fp(5);
        let h = HyperbolaTranslate::from_ints(f5, 0, 0, Sign::Plus);
        assert_eq!(h.to_moebius(f5).tuple(), [0, 1, 1, 0]);
        let h = HyperbolaTranslate::from_ints(f5, 1, 1, Sign::Plus);
        assert_eq!(
            h.to_moebius(f5),
            MoebiusMap::from_ints(f5, [1, 0, 1, -1]).unwrap()
        );
        let f7 = fp(7);
        let h = HyperbolaTranslate::from_ints(f7, 2, 3, Sign::Minus);
        assert_eq!(
            h.to_moebius(f7),
            MoebiusMap::from_ints(f7, [2, 0, 1, 4]).unwrap()
        );
        assert_eq!(h.to_moebius(f7).tuple(), [1, 0, 4, 2]);
        for x in 0..7 {
            let x = f7.elem(x);
            if let Some(y) = h.to_moebius(f7).eval_affine(x) {
                assert!(h.contains(&f7, x, y));
            }
        }
    }

    #[test]
    fn m_statistic_examples() {
        let f = fp(7);
        let h = |a, b| HyperbolaTranslate::from_ints(f, a, b, Sign::Plus);
        assert_eq!(m_statistic(&[h(1, 1)]).unwrap(), 1);
        assert_eq!(m_statistic(&[h(1, 1), h(1, 2), h(2, 3)]).unwrap(), 2);
        let row: Vec<_> = (0..5).map(|b| h(4, b)).collect();
        assert_eq!(m_statistic(&row).unwrap(), 5);
        assert_eq!(m_statistic(&[]), Err(Error::EmptyFamily));
    }

    #[test]
    fn energy_m_report_examples() {
        let f = fp(7);
        let h = |a, b| HyperbolaTranslate::from_ints(f, a, b, Sign::Plus);
        let r = energy_m_report(f, &[h(0, 0)]).unwrap();
        assert_eq!((r.energy, r.m, r.ratio), (1, 1, 1.0));

        let grid = [h(0, 0), h(0, 1), h(1, 0), h(1, 1)];
        let r = energy_m_report(f, &grid).unwrap();
        let oracle = energy_brute(&family_to_transforms(f, &grid), 64).unwrap();
        assert_eq!(r.energy, oracle);
        assert_eq!(r.m, 2);
        assert_eq!(r.ratio, oracle as f64 / 32.0);

        let diag = [h(0, 0), h(1, 1), h(2, 2)];
        let r = energy_m_report(f, &diag).unwrap();
        assert_eq!(r.m, 1);
        let oracle = energy_brute(&family_to_transforms(f, &diag), 64).unwrap();
        assert_eq!(r.ratio, oracle as f64 / 9.0);
    }
}
