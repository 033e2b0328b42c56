//! Right-hand sides of the incidence, richness and energy bounds, evaluated
//! without implied constants, and their side conditions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundId {
    Thm1Incidence,
    Thm1Rich,
    Thm2Incidence,
    Thm2Rich,
    Thm3Energy,
    Thm4Hyperbola,
    CorKrichLines,
}

impl BoundId {
    pub const ALL: [BoundId; 7] = [
        BoundId::Thm1Incidence,
        BoundId::Thm1Rich,
        BoundId::Thm2Incidence,
        BoundId::Thm2Rich,
        BoundId::Thm3Energy,
        BoundId::Thm4Hyperbola,
        BoundId::CorKrichLines,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Thm1Incidence => "thm1-incidence",
            BoundId::Thm1Rich => "thm1-rich",
            BoundId::Thm2Incidence => "thm2-incidence",
            BoundId::Thm2Rich => "thm2-rich",
            BoundId::Thm3Energy => "thm3-energy",
            BoundId::Thm4Hyperbola => "thm4-hyperbola",
            BoundId::CorKrichLines => "cor-krich-lines",
        }
    }

    /// Whether the bound is stated for Cartesian products `A × B`.
    pub fn needs_cartesian(self) -> bool {
        matches!(
            self,
            BoundId::Thm2Incidence
                | BoundId::Thm2Rich
                | BoundId::Thm3Energy
                | BoundId::Thm4Hyperbola
        )
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown bound identifier {s:?}")))
    }
}

/// Sizes feeding a bound. Which fields are required depends on the identifier.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BoundParams {
    /// |P|
    pub points: Option<f64>,
    /// |T|
    pub transforms: Option<f64>,
    /// |A|
    pub a: Option<f64>,
    /// |B|
    pub b: Option<f64>,
    pub k: Option<f64>,
    /// E(T)
    pub energy: Option<f64>,
    /// |H|
    pub hyperbolas: Option<f64>,
    pub m: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSpec {
    pub id: BoundId,
    pub params: BoundParams,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundTerms {
    pub terms: Vec<f64>,
    pub max_term: f64,
    pub sum: f64,
}

/// `Π base^exp`, through logarithms.
fn monomial(factors: &[(f64, f64)]) -> f64 {
    factors.iter().map(|&(x, e)| e * x.ln()).sum::<f64>().exp()
}

impl BoundSpec {
    pub fn new(id: BoundId, params: BoundParams) -> Self {
        BoundSpec { id, params }
    }

    fn get(&self, v: Option<f64>, param: &'static str) -> Result<f64> {
        let x = v.ok_or(Error::MissingParameter {
            bound: self.id.as_str(),
            param,
        })?;
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Infeasible(format!(
                "{}: parameter {param} must be positive, got {x}",
                self.id
            )));
        }
        Ok(x)
    }

    /// Each additive term of the right-hand side, no constant applied.
    pub fn rhs(&self) -> Result<BoundTerms> {
        let p = &self.params;
        let terms = match self.id {
            BoundId::Thm1Incidence => {
                let (np, nt) = (
                    self.get(p.points, "points")?,
                    self.get(p.transforms, "transforms")?,
                );
                vec![
                    monomial(&[(np, 15.0 / 19.0), (nt, 15.0 / 19.0)]),
                    monomial(&[(np, 23.0 / 19.0), (nt, 4.0 / 19.0)]),
                    nt,
                ]
            }
            BoundId::Thm1Rich => {
                let (np, k) = (self.get(p.points, "points")?, self.get(p.k, "k")?);
                vec![
                    monomial(&[(np, 15.0 / 4.0), (k, -19.0 / 4.0)]),
                    monomial(&[(np, 2.0), (k, -2.0)]),
                ]
            }
            BoundId::Thm2Incidence => {
                let a = self.get(p.a, "a")?;
                let b = self.get(p.b, "b")?;
                let nt = self.get(p.transforms, "transforms")?;
                vec![
                    monomial(&[(a, 4.0 / 5.0), (b, 3.0 / 5.0), (nt, 4.0 / 5.0)]),
                    monomial(&[(a, 6.0 / 5.0), (b, 7.0 / 5.0), (nt, 1.0 / 5.0)]),
                    nt,
                ]
            }
            BoundId::Thm2Rich => {
                let a = self.get(p.a, "a")?;
                let b = self.get(p.b, "b")?;
                let k = self.get(p.k, "k")?;
                vec![
                    monomial(&[(a, 4.0), (b, 3.0), (k, -5.0)]),
                    monomial(&[(a, 2.0), (b, 2.0), (k, -2.0)]),
                ]
            }
            BoundId::Thm3Energy => {
                let a = self.get(p.a, "a")?;
                let b = self.get(p.b, "b")?;
                let nt = self.get(p.transforms, "transforms")?;
                let e = self.get(p.energy, "energy")?;
                vec![
                    monomial(&[(a, 0.5), (b, 7.0 / 10.0), (nt, 3.0 / 5.0), (e, 1.0 / 10.0)]),
                    monomial(&[(b, 0.5), (nt, 1.0)]),
                ]
            }
            BoundId::Thm4Hyperbola => {
                let a = self.get(p.a, "a")?;
                let b = self.get(p.b, "b")?;
                let h = self.get(p.hyperbolas, "hyperbolas")?;
                let m = self.get(p.m, "m")?;
                vec![
                    monomial(&[(a, 0.5), (b, 7.0 / 10.0), (h, 4.0 / 5.0), (m, 1.0 / 10.0)]),
                    monomial(&[(b, 0.5), (h, 1.0)]),
                ]
            }
            BoundId::CorKrichLines => {
                let (np, k) = (self.get(p.points, "points")?, self.get(p.k, "k")?);
                vec![
                    monomial(&[(np, 11.0 / 4.0), (k, -15.0 / 4.0)]),
                    monomial(&[(np, 1.0), (k, -1.0)]),
                ]
            }
        };
        let max_term = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum = terms.iter().sum();
        Ok(BoundTerms {
            terms,
            max_term,
            sum,
        })
    }

    /// Side conditions of the bound at modulus `p`. Conditions stated with `≪`
    /// are tested as `lhs <= constant * rhs` and flagged as constant-dependent.
    /// Absent parameters count as zero.
    pub fn hypotheses(&self, p: u64, constant: f64) -> Vec<Hypothesis> {
        let v = |x: Option<f64>| x.unwrap_or(0.0);
        let pf = p as f64;
        let prm = &self.params;
        let plain = |name, lhs: f64, rhs: f64| Hypothesis {
            name,
            lhs,
            rhs,
            holds: lhs <= rhs,
            constant_dependent: false,
        };
        match self.id {
            BoundId::Thm1Incidence | BoundId::CorKrichLines => {
                vec![plain(
                    "|P| <= p^(15/13)",
                    v(prm.points),
                    pf.powf(15.0 / 13.0),
                )]
            }
            BoundId::Thm1Rich => vec![plain(
                "|P| <= p^(15/26)",
                v(prm.points),
                pf.powf(15.0 / 26.0),
            )],
            BoundId::Thm2Incidence => {
                let lhs = v(prm.a) * v(prm.transforms);
                let rhs = constant * pf * pf;
                vec![Hypothesis {
                    name: "|A||T| << p^2",
                    lhs,
                    rhs,
                    holds: lhs <= rhs,
                    constant_dependent: true,
                }]
            }
            BoundId::Thm2Rich => vec![plain(
                "|A|^3|B|^2 <= p^2",
                v(prm.a).powi(3) * v(prm.b).powi(2),
                pf * pf,
            )],
            BoundId::Thm3Energy | BoundId::Thm4Hyperbola => {
                vec![plain("|B| <= p^(1/2)", v(prm.b), pf.sqrt())]
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub constant_dependent: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(x: f64, y: f64) -> bool {
        (x - y).abs() <= 1e-9 * y.abs().max(1.0)
    }

    #[test]
    fn thm1_incidence_unit() {
        let s = BoundSpec::new(
            BoundId::Thm1Incidence,
            BoundParams {
                points: Some(1.0),
                transforms: Some(1.0),
                ..Default::default()
            },
        );
        let r = s.rhs().unwrap();
        assert_eq!(r.terms, vec![1.0, 1.0, 1.0]);
        assert_eq!(r.sum, 3.0);
    }

    #[test]
    fn thm1_incidence_hundred() {
        let s = BoundSpec::new(
            BoundId::Thm1Incidence,
            BoundParams {
                points: Some(100.0),
                transforms: Some(100.0),
                ..Default::default()
            },
        );
        let r = s.rhs().unwrap();
        assert!(close(r.terms[0], 10f64.powf(60.0 / 19.0)));
        assert!((r.terms[0] - 1438.45).abs() < 0.01);
    }

    #[test]
    fn thm1_rich_example() {
        let s = BoundSpec::new(
            BoundId::Thm1Rich,
            BoundParams {
                points: Some(100.0),
                k: Some(10.0),
                ..Default::default()
            },
        );
        let r = s.rhs().unwrap();
        assert!(close(r.sum, 10f64.powf(11.0 / 4.0) + 100.0));
        assert!((r.sum - 662.34).abs() < 0.01);
    }

    #[test]
    fn other_bounds_against_direct_powers() {
        let prm = BoundParams {
            points: Some(20.0),
            transforms: Some(30.0),
            a: Some(4.0),
            b: Some(5.0),
            k: Some(3.0),
            energy: Some(2000.0),
            hyperbolas: Some(12.0),
            m: Some(2.0),
        };
        let t = |id| BoundSpec::new(id, prm).rhs().unwrap().terms;
        let (a, b, nt, k) = (4f64, 5f64, 30f64, 3f64);
        let exp = [
            (
                BoundId::Thm2Incidence,
                vec![
                    a.powf(0.8) * b.powf(0.6) * nt.powf(0.8),
                    a.powf(1.2) * b.powf(1.4) * nt.powf(0.2),
                    nt,
                ],
            ),
            (
                BoundId::Thm2Rich,
                vec![a.powi(4) * b.powi(3) / k.powi(5), a * a * b * b / (k * k)],
            ),
            (
                BoundId::Thm3Energy,
                vec![
                    a.sqrt() * b.powf(0.7) * nt.powf(0.6) * 2000f64.powf(0.1),
                    b.sqrt() * nt,
                ],
            ),
            (
                BoundId::Thm4Hyperbola,
                vec![
                    a.sqrt() * b.powf(0.7) * 12f64.powf(0.8) * 2f64.powf(0.1),
                    b.sqrt() * 12.0,
                ],
            ),
            (
                BoundId::CorKrichLines,
                vec![20f64.powf(2.75) / k.powf(3.75), 20.0 / k],
            ),
        ];
        for (id, want) in exp {
            let got = t(id);
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert!(close(*g, *w), "{id}: {g} vs {w}");
            }
        }
    }

    #[test]
    fn missing_and_nonpositive_parameters() {
        let s = BoundSpec::new(BoundId::Thm4Hyperbola, BoundParams::default());
        assert_eq!(
            s.rhs(),
            Err(Error::MissingParameter {
                bound: "thm4-hyperbola",
                param: "a"
            })
        );
        let s = BoundSpec::new(
            BoundId::Thm1Rich,
            BoundParams {
                points: Some(0.0),
                k: Some(3.0),
                ..Default::default()
            },
        );
        assert!(matches!(s.rhs(), Err(Error::Infeasible(_))));
    }

    #[test]
    fn hypothesis_examples() {
        let s = BoundSpec::new(
            BoundId::Thm1Incidence,
            BoundParams {
                points: Some(10.0),
                ..Default::default()
            },
        );
        let h = s.hypotheses(101, 1.0);
        assert!(h[0].holds);
        assert!((h[0].rhs - 205.7).abs() < 0.5);

        let s = BoundSpec::new(
            BoundId::Thm4Hyperbola,
            BoundParams {
                b: Some(3.0),
                ..Default::default()
            },
        );
        assert!(!s.hypotheses(7, 1.0)[0].holds);

        for id in BoundId::ALL {
            let s = BoundSpec::new(id, BoundParams::default());
            assert!(s.hypotheses(7, 1.0).iter().all(|h| h.holds), "{id}");
        }
        let s = BoundSpec::new(
            BoundId::Thm2Incidence,
            BoundParams {
                a: Some(10.0),
                transforms: Some(10.0),
                ..Default::default()
            },
        );
        let h = &s.hypotheses(7, 1.0)[0];
        assert!(h.constant_dependent && !h.holds);
        assert!(s.hypotheses(7, 3.0)[0].holds);
    }

    #[test]
    fn identifiers_round_trip() {
        for id in BoundId::ALL {
            assert_eq!(id.as_str().parse::<BoundId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{id}\""));
        }
        assert!("thm9".parse::<BoundId>().is_err());
    }

    proptest! {
        #[test]
        fn terms_monotone_in_sizes(
            base in prop::array::uniform7(1.0f64..500.0),
            bump in 1.0f64..50.0,
            which in 0usize..7,
        ) {
            let mk = |v: [f64; 7]| BoundParams {
                points: Some(v[0]), transforms: Some(v[1]), a: Some(v[2]), b: Some(v[3]),
                energy: Some(v[4]), hyperbolas: Some(v[5]), m: Some(v[6]), k: Some(4.0),
            };
            let mut bigger = base;
            bigger[which] += bump;
            for id in BoundId::ALL {
                let lo = BoundSpec::new(id, mk(base)).rhs().unwrap();
                let hi = BoundSpec::new(id, mk(bigger)).rhs().unwrap();
                for (l, h) in lo.terms.iter().zip(&hi.terms) {
                    prop_assert!(h >= l, "{} {} {}", id, l, h);
                }
            }
        }
    }
}
