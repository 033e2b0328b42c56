//! Plain-text set formats. One record per line, comma-separated integers,
//! `#` starts a comment, blank lines are skipped. Values are reduced mod p.
//!
//! | file           | record        |
//! |----------------|---------------|
//! | point set      | `x,y`         |
//! | transform set  | `a,b,c,d`     |
//! | hyperbolas     | `a,b,ε` (ε = ±1) |
//! | scalar set     | `x`           |

use std::collections::BTreeSet;
use std::path::Path;

use crate::applications::ScalarSet;
use crate::energy::{HyperbolaTranslate, Sign};
use crate::error::{Error, Result};
use crate::field::{MoebiusMap, PrimeField};
use crate::incidence::{PointSet, TransformSet};

fn records(text: &str, arity: usize) -> impl Iterator<Item = Result<(usize, Vec<i64>)>> + '_ {
    text.lines().enumerate().filter_map(move |(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            return None;
        }
        let lineno = i + 1;
        let fields: Result<Vec<i64>> = line
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<i64>().map_err(|_| Error::Parse {
                    line: lineno,
                    msg: format!("not an integer: {tok:?}"),
                })
            })
            .collect();
        Some(fields.and_then(|v| {
            if v.len() == arity {
                Ok((lineno, v))
            } else {
                Err(Error::Parse {
                    line: lineno,
                    msg: format!("expected {arity} values, found {}", v.len()),
                })
            }
        }))
    })
}

pub fn parse_points(field: PrimeField, text: &str) -> Result<PointSet> {
    let pts = records(text, 2)
        .map(|r| r.map(|(_, v)| (v[0], v[1])))
        .collect::<Result<Vec<_>>>()?;
    Ok(PointSet::from_ints(field, pts))
}

pub fn parse_transforms(field: PrimeField, text: &str) -> Result<TransformSet> {
    let mut set = TransformSet::empty(field);
    for r in records(text, 4) {
        let (line, v) = r?;
        let f =
            MoebiusMap::from_ints(field, [v[0], v[1], v[2], v[3]]).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        set.insert(f)?;
    }
    Ok(set)
}

/// Translates are deduplicated and returned in sorted order.
pub fn parse_hyperbolas(field: PrimeField, text: &str) -> Result<Vec<HyperbolaTranslate>> {
    let mut out = BTreeSet::new();
    for r in records(text, 3) {
        let (line, v) = r?;
        let sign = match v[2] {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("sign must be 1 or -1, found {other}"),
                })
            }
        };
        out.insert(HyperbolaTranslate::from_ints(field, v[0], v[1], sign));
    }
    Ok(out.into_iter().collect())
}

pub fn parse_scalars(field: PrimeField, text: &str) -> Result<ScalarSet> {
    let vals = records(text, 1)
        .map(|r| r.map(|(_, v)| v[0]))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScalarSet::from_ints(field, vals))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load_points(field: PrimeField, path: &Path) -> Result<PointSet> {
    parse_points(field, &read(path)?)
}

pub fn load_transforms(field: PrimeField, path: &Path) -> Result<TransformSet> {
    parse_transforms(field, &read(path)?)
}

pub fn load_hyperbolas(field: PrimeField, path: &Path) -> Result<Vec<HyperbolaTranslate>> {
    parse_hyperbolas(field, &read(path)?)
}

pub fn load_scalars(field: PrimeField, path: &Path) -> Result<ScalarSet> {
    parse_scalars(field, &read(path)?)
}

pub fn format_points(points: &PointSet) -> String {
    points.iter().map(|s| format!("{s}\n")).collect()
}

pub fn format_transforms(maps: &TransformSet) -> String {
    maps.iter().map(|f| format!("{f}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f7() -> PrimeField {
        PrimeField::new(7).unwrap()
    }

    #[test]
    fn points_with_comments_and_duplicates() {
        let text = "# header\n1,2\n  3 , 4  # trailing\n\n8,9\n1,2\n-1,0\n";
        let p = parse_points(f7(), text).unwrap();
        assert_eq!(
            p,
            PointSet::from_ints(f7(), [(1, 2), (3, 4), (1, 2), (6, 0)])
        );
        assert_eq!(format_points(&p), "1,2\n3,4\n6,0\n");
    }

    #[test]
    fn transforms_canonicalized_on_load() {
        let t = parse_transforms(f7(), "2,4,0,2\n1,2,0,1\n").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(format_transforms(&t), "1,2,0,1\n");
        let err = parse_transforms(f7(), "1,1\n1,2,2,4\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 1,
                msg: "expected 4 values, found 2".into()
            }
        );
        let err = parse_transforms(f7(), "1,2,2,4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn hyperbolas_and_scalars() {
        let h = parse_hyperbolas(f7(), "0,0,1\n2,3,-1\n0,0,1\n").unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h[1].to_string(), "2,3,-1");
        assert!(parse_hyperbolas(f7(), "0,0,2\n").is_err());
        let s = parse_scalars(f7(), "1\n8\n3 # three\nx\n").unwrap_err();
        assert!(matches!(s, Error::Parse { line: 4, .. }));
        assert_eq!(
            parse_scalars(f7(), "1\n8\n3\n").unwrap().values(),
            vec![1, 3]
        );
    }
}
