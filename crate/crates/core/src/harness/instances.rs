//! Seeded instance generators.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::applications::ScalarSet;
use crate::energy::{HyperbolaTranslate, Sign};
use crate::error::{Error, Result};
use crate::field::{MoebiusMap, PrimeField};
use crate::incidence::{transforms_defined_by, Point, PointSet, TransformSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InstanceKind {
    /// `n` distinct uniform points of F_p².
    RandomPoints {
        n: usize,
    },
    /// The explicit product `A × B`.
    Cartesian {
        a: Vec<i64>,
        b: Vec<i64>,
    },
    /// `A × B` with `A`, `B` uniform subsets of the given sizes.
    RandomCartesian {
        a: usize,
        b: usize,
    },
    ArithmeticProgression {
        len: usize,
        start: i64,
        step: i64,
    },
    GeometricProgression {
        len: usize,
        start: i64,
        ratio: i64,
    },
    RandomScalars {
        n: usize,
    },
    /// Translates `(y - a)(x - b) = sign` for `a < rows`, `b < cols`.
    HyperbolaGrid {
        rows: usize,
        cols: usize,
        sign: Sign,
    },
    /// `n` distinct translates with uniform `a`, `b` and sign.
    RandomHyperbolas {
        n: usize,
    },
    /// `n` distinct uniform elements of PGL(2, p).
    RandomTransforms {
        n: usize,
    },
    /// The transformations defined by `n` random points.
    DefinedBy {
        n: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Instance {
    Points(PointSet),
    Scalars(ScalarSet),
    Hyperbolas(Vec<HyperbolaTranslate>),
    Transforms(TransformSet),
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn generate_instance(kind: &InstanceKind, field: PrimeField, seed: u64) -> Result<Instance> {
    let mut rng = rng_from_seed(seed);
    let p = field.modulus() as usize;
    let inst = match kind {
        InstanceKind::RandomPoints { n } => Instance::Points(random_points(field, *n, &mut rng)?),
        InstanceKind::Cartesian { a, b } => {
            let a = ScalarSet::from_ints(field, a.iter().copied());
            let b = ScalarSet::from_ints(field, b.iter().copied());
            Instance::Points(PointSet::cartesian(field, a.iter(), b.iter()))
        }
        InstanceKind::RandomCartesian { a, b } => {
            let (a, b) = random_cartesian(field, *a, *b, &mut rng)?;
            Instance::Points(PointSet::cartesian(field, a.iter(), b.iter()))
        }
        InstanceKind::ArithmeticProgression { len, start, step } => {
            if *len > p || (*len > 1 && field.elem(*step).is_zero()) {
                return Err(Error::Infeasible(format!(
                    "progression of length {len} with step {step} repeats mod {p}"
                )));
            }
            let s = ScalarSet::from_ints(field, (0..*len as i64).map(|i| start + i * step));
            Instance::Scalars(s)
        }
        InstanceKind::GeometricProgression { len, start, ratio } => {
            let r = field.elem(*ratio);
            let mut x = field.elem(*start);
            let mut vals = Vec::with_capacity(*len);
            for _ in 0..*len {
                vals.push(x);
                x = field.mul(x, r);
            }
            let s = ScalarSet::new(field, vals);
            if s.len() != *len {
                return Err(Error::Infeasible(format!(
                    "geometric progression {start}·{ratio}^i repeats before {len} terms mod {p}"
                )));
            }
            Instance::Scalars(s)
        }
        InstanceKind::RandomScalars { n } => {
            Instance::Scalars(random_scalars(field, *n, &mut rng)?)
        }
        InstanceKind::HyperbolaGrid { rows, cols, sign } => {
            if *rows > p || *cols > p {
                return Err(Error::Infeasible(format!(
                    "{rows}x{cols} grid exceeds F_{p}"
                )));
            }
            let mut fam = Vec::with_capacity(rows * cols);
            for a in 0..*rows as i64 {
                for b in 0..*cols as i64 {
                    fam.push(HyperbolaTranslate::from_ints(field, a, b, *sign));
                }
            }
            Instance::Hyperbolas(fam)
        }
        InstanceKind::RandomHyperbolas { n } => {
            Instance::Hyperbolas(random_hyperbolas(field, *n, &mut rng)?)
        }
        InstanceKind::RandomTransforms { n } => {
            Instance::Transforms(random_transforms(field, *n, &mut rng)?)
        }
        InstanceKind::DefinedBy { n } => {
            Instance::Transforms(transforms_defined_by(&random_points(field, *n, &mut rng)?))
        }
    };
    Ok(inst)
}

pub fn random_points(field: PrimeField, n: usize, rng: &mut impl Rng) -> Result<PointSet> {
    let p = field.modulus() as usize;
    if n > p * p {
        return Err(Error::Infeasible(format!(
            "{n} points exceed |F_{p}^2| = {}",
            p * p
        )));
    }
    let pts = index::sample(rng, p * p, n)
        .into_iter()
        .map(|i| Point::new(field.elem((i / p) as i64), field.elem((i % p) as i64)));
    Ok(PointSet::new(field, pts))
}

pub fn random_scalars(field: PrimeField, n: usize, rng: &mut impl Rng) -> Result<ScalarSet> {
    let p = field.modulus() as usize;
    if n > p {
        return Err(Error::Infeasible(format!(
            "{n} scalars exceed |F_{p}| = {p}"
        )));
    }
    Ok(ScalarSet::from_ints(
        field,
        index::sample(rng, p, n).into_iter().map(|i| i as i64),
    ))
}

pub fn random_cartesian(
    field: PrimeField,
    a: usize,
    b: usize,
    rng: &mut impl Rng,
) -> Result<(ScalarSet, ScalarSet)> {
    Ok((
        random_scalars(field, a, rng)?,
        random_scalars(field, b, rng)?,
    ))
}

pub fn random_hyperbolas(
    field: PrimeField,
    n: usize,
    rng: &mut impl Rng,
) -> Result<Vec<HyperbolaTranslate>> {
    let p = field.modulus() as usize;
    // For p = 2 the two signs coincide.
    let signs = if p == 2 { 1 } else { 2 };
    if n > signs * p * p {
        return Err(Error::Infeasible(format!(
            "{n} hyperbola translates exceed {}",
            signs * p * p
        )));
    }
    let fam: BTreeSet<HyperbolaTranslate> = index::sample(rng, signs * p * p, n)
        .into_iter()
        .map(|i| {
            let sign = if i / (p * p) == 0 {
                Sign::Plus
            } else {
                Sign::Minus
            };
            let r = i % (p * p);
            HyperbolaTranslate::from_ints(field, (r / p) as i64, (r % p) as i64, sign)
        })
        .collect();
    Ok(fam.into_iter().collect())
}

/// Uniform distinct classes: nonsingular tuples are drawn uniformly (each
/// class has p - 1 scalar representatives) and repeats are rejected.
pub fn random_transforms(field: PrimeField, n: usize, rng: &mut impl Rng) -> Result<TransformSet> {
    if n as u64 > field.pgl2_order() {
        return Err(Error::Infeasible(format!(
            "{n} transformations exceed |PGL(2,{})| = {}",
            field.modulus(),
            field.pgl2_order()
        )));
    }
    let p = field.modulus() as i64;
    let mut set = TransformSet::empty(field);
    while set.len() < n {
        let t = [0; 4].map(|_| rng.gen_range(0..p));
        if let Ok(f) = MoebiusMap::from_ints(field, t) {
            set.insert(f)?;
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    #[test]
    fn ap_example() {
        let got = generate_instance(
            &InstanceKind::ArithmeticProgression {
                len: 4,
                start: 1,
                step: 1,
            },
            fp(101),
            0,
        )
        .unwrap();
        assert_eq!(
            got,
            Instance::Scalars(ScalarSet::from_ints(fp(101), [1, 2, 3, 4]))
        );
        assert!(generate_instance(
            &InstanceKind::ArithmeticProgression {
                len: 3,
                start: 0,
                step: 7
            },
            fp(7),
            0
        )
        .is_err());
    }

    #[test]
    fn gp_repeats_rejected() {
        // 2 has order 3 mod 7.
        let kind = InstanceKind::GeometricProgression {
            len: 4,
            start: 1,
            ratio: 2,
        };
        assert!(matches!(
            generate_instance(&kind, fp(7), 0),
            Err(Error::Infeasible(_))
        ));
        let kind = InstanceKind::GeometricProgression {
            len: 4,
            start: 2,
            ratio: 2,
        };
        let Instance::Scalars(s) = generate_instance(&kind, fp(101), 0).unwrap() else {
            panic!()
        };
        assert_eq!(s.values(), vec![2, 4, 8, 16]);
    }

    #[test]
    fn cartesian_example() {
        let kind = InstanceKind::Cartesian {
            a: vec![0, 1],
            b: vec![0, 2],
        };
        let Instance::Points(p) = generate_instance(&kind, fp(5), 0).unwrap() else {
            panic!()
        };
        assert_eq!(p.len(), 4);
    }

    #[test]
    fn random_transforms_reproducible() {
        let kind = InstanceKind::RandomTransforms { n: 10 };
        let a = generate_instance(&kind, fp(11), 7).unwrap();
        let b = generate_instance(&kind, fp(11), 7).unwrap();
        let Instance::Transforms(t) = &a else {
            panic!()
        };
        assert_eq!(t.len(), 10);
        assert_eq!(a, b);
        let c = generate_instance(&kind, fp(11), 8).unwrap();
        assert_ne!(a, c);
        let all = InstanceKind::RandomTransforms { n: 1320 };
        let Instance::Transforms(t) = generate_instance(&all, fp(11), 1).unwrap() else {
            panic!()
        };
        assert_eq!(t, TransformSet::full_group(fp(11)));
        assert!(generate_instance(&InstanceKind::RandomTransforms { n: 1321 }, fp(11), 1).is_err());
    }

    #[test]
    fn size_guards() {
        let f = fp(5);
        assert!(generate_instance(&InstanceKind::RandomPoints { n: 26 }, f, 0).is_err());
        assert!(generate_instance(&InstanceKind::RandomScalars { n: 6 }, f, 0).is_err());
        assert!(generate_instance(&InstanceKind::RandomCartesian { a: 2, b: 6 }, f, 0).is_err());
        assert!(generate_instance(&InstanceKind::RandomHyperbolas { n: 51 }, f, 0).is_err());
        let Instance::Hyperbolas(h) =
            generate_instance(&InstanceKind::RandomHyperbolas { n: 50 }, f, 0).unwrap()
        else {
            panic!()
        };
        assert_eq!(h.len(), 50);
        let grid = InstanceKind::HyperbolaGrid {
            rows: 2,
            cols: 3,
            sign: Sign::Minus,
        };
        let Instance::Hyperbolas(h) = generate_instance(&grid, f, 0).unwrap() else {
            panic!()
        };
        assert_eq!(h.len(), 6);
        let Instance::Points(p) =
            generate_instance(&InstanceKind::RandomPoints { n: 25 }, f, 3).unwrap()
        else {
            panic!()
        };
        assert_eq!(p, PointSet::grid(f));
    }

    #[test]
    fn defined_by_instance() {
        let Instance::Transforms(t) =
            generate_instance(&InstanceKind::DefinedBy { n: 8 }, fp(11), 2).unwrap()
        else {
            panic!()
        };
        assert!(!t.is_empty());
    }
}
