//! Seeded sweeps: exact left-hand sides against bound shapes, emitted as
//! JSON lines or CSV, plus regression baselines of the largest ratios.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{BoundId, BoundParams, BoundSpec, Hypothesis};
use super::instances::{random_cartesian, random_hyperbolas, random_points, random_transforms};
use crate::applications::ScalarSet;
use crate::energy::{energy, family_to_transforms, m_statistic, HyperbolaTranslate};
use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::incidence::{count_incidences, PointSet, TransformSet};
use crate::pivot::{dyadic_threshold, rich_lines, rich_transforms_via_pivots};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointGenerator {
    RandomPoints,
    Cartesian,
}

impl PointGenerator {
    pub fn as_str(self) -> &'static str {
        match self {
            PointGenerator::RandomPoints => "random-points",
            PointGenerator::Cartesian => "cartesian",
        }
    }
}

impl FromStr for PointGenerator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-points" => Ok(PointGenerator::RandomPoints),
            "cartesian" => Ok(PointGenerator::Cartesian),
            _ => Err(Error::Config(format!("unknown generator {s:?}"))),
        }
    }
}

/// One entry of the size schedule: `n` (n points, or n × n for Cartesian
/// products) or `AxB`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeSpec {
    pub first: usize,
    pub second: Option<usize>,
}

impl fmt::Display for SizeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.second {
            Some(b) => write!(f, "{}x{}", self.first, b),
            None => write!(f, "{}", self.first),
        }
    }
}

impl FromStr for SizeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad size {s:?}")))
        };
        match s.split_once('x') {
            Some((a, b)) => Ok(SizeSpec {
                first: num(a)?,
                second: Some(num(b)?),
            }),
            None => Ok(SizeSpec {
                first: num(s)?,
                second: None,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub primes: Vec<u64>,
    pub generator: PointGenerator,
    pub sizes: Vec<SizeSpec>,
    pub seed: u64,
    pub reps: usize,
    pub bounds: Vec<BoundId>,
    /// Richness threshold for the `*-rich` and `cor-krich-lines` bounds.
    pub k: usize,
    /// Size of the random transformation set or hyperbola family; defaults
    /// to the number of points of the instance.
    pub transforms: Option<usize>,
    /// Constant used for `≪` side conditions.
    pub constant: f64,
    /// Record wall time per row. Off by default since it breaks byte-identical reruns.
    pub timings: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            primes: Vec::new(),
            generator: PointGenerator::RandomPoints,
            sizes: Vec::new(),
            seed: 0,
            reps: 1,
            bounds: Vec::new(),
            k: 3,
            transforms: None,
            constant: 1.0,
            timings: false,
        }
    }
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, T::Err> {
    v.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

impl SweepConfig {
    /// Parses flat `key = value` text; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SweepConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let num_err = |_| bad(format!("bad value for {key}: {value:?}"));
            match key {
                "primes" => cfg.primes = list(value).map_err(num_err)?,
                "generator" => {
                    cfg.generator = value.parse().map_err(|e: Error| bad(e.to_string()))?
                }
                "sizes" => cfg.sizes = list(value).map_err(|e: Error| bad(e.to_string()))?,
                "seed" => cfg.seed = value.parse().map_err(num_err)?,
                "reps" => cfg.reps = value.parse().map_err(num_err)?,
                "bounds" => cfg.bounds = list(value).map_err(|e: Error| bad(e.to_string()))?,
                "k" => cfg.k = value.parse().map_err(num_err)?,
                "transforms" => cfg.transforms = Some(value.parse().map_err(num_err)?),
                "constant" => {
                    cfg.constant = value
                        .parse()
                        .map_err(|_| bad(format!("bad value for constant: {value:?}")))?
                }
                "timings" => {
                    cfg.timings = value
                        .parse()
                        .map_err(|_| bad(format!("bad value for timings: {value:?}")))?
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for &p in &self.primes {
            PrimeField::new(p)?;
        }
        if self.generator == PointGenerator::RandomPoints {
            if let Some(b) = self.bounds.iter().find(|b| b.needs_cartesian()) {
                return Err(Error::Config(format!(
                    "bound {b} needs generator = cartesian"
                )));
            }
            if let Some(s) = self.sizes.iter().find(|s| s.second.is_some()) {
                return Err(Error::Config(format!(
                    "size {s} needs generator = cartesian"
                )));
            }
        }
        let needs_k = self.bounds.iter().any(|b| {
            matches!(
                b,
                BoundId::Thm1Rich | BoundId::Thm2Rich | BoundId::CorKrichLines
            )
        });
        let rich_only = self
            .bounds
            .iter()
            .any(|b| matches!(b, BoundId::Thm1Rich | BoundId::Thm2Rich));
        if needs_k && self.k < 2 || rich_only && self.k < 3 {
            return Err(Error::UnsupportedThreshold {
                k: self.k,
                min: if rich_only { 3 } else { 2 },
            });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisFlag {
    pub name: &'static str,
    pub holds: bool,
    pub constant_dependent: bool,
}

impl From<&Hypothesis> for HypothesisFlag {
    fn from(h: &Hypothesis) -> Self {
        HypothesisFlag {
            name: h.name,
            holds: h.holds,
            constant_dependent: h.constant_dependent,
        }
    }
}

/// One sweep row. Field order is the output key order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: u64,
    pub generator: &'static str,
    pub size: String,
    pub rep: usize,
    pub bound: BoundId,
    pub points: usize,
    /// |T| or |H|; 0 when the bound takes no curve family.
    pub curves: usize,
    pub k: Option<usize>,
    pub lhs: u64,
    pub rhs_terms: Vec<f64>,
    pub max_term: f64,
    pub ratio: f64,
    pub hypotheses: Vec<HypothesisFlag>,
    pub hypotheses_hold: bool,
    pub delta: Option<f64>,
    pub trivial_ok: bool,
    pub energy: Option<u64>,
    pub m: Option<usize>,
    pub wall_ms: Option<f64>,
}

pub const CSV_HEADER: [&str; 19] = [
    "p",
    "generator",
    "size",
    "rep",
    "bound",
    "points",
    "curves",
    "k",
    "lhs",
    "rhs_terms",
    "max_term",
    "ratio",
    "hypotheses",
    "hypotheses_hold",
    "delta",
    "trivial_ok",
    "energy",
    "m",
    "wall_ms",
];

impl SweepRow {
    fn csv_record(&self) -> Vec<String> {
        fn opt<T: ToString>(v: &Option<T>) -> String {
            v.as_ref().map(T::to_string).unwrap_or_default()
        }
        let terms: Vec<String> = self.rhs_terms.iter().map(f64::to_string).collect();
        let hyps: Vec<String> = self
            .hypotheses
            .iter()
            .map(|h| format!("{}={}", h.name, h.holds))
            .collect();
        vec![
            self.p.to_string(),
            self.generator.to_string(),
            self.size.clone(),
            self.rep.to_string(),
            self.bound.to_string(),
            self.points.to_string(),
            self.curves.to_string(),
            opt(&self.k),
            self.lhs.to_string(),
            terms.join(";"),
            self.max_term.to_string(),
            self.ratio.to_string(),
            hyps.join(";"),
            self.hypotheses_hold.to_string(),
            opt(&self.delta),
            self.trivial_ok.to_string(),
            opt(&self.energy),
            opt(&self.m),
            opt(&self.wall_ms),
        ]
    }
}

/// Everything one (p, size, rep) cell needs, drawn up front so that
/// evaluation order cannot affect the random stream.
struct Cell {
    field: PrimeField,
    size: SizeSpec,
    rep: usize,
    points: PointSet,
    factors: Option<(ScalarSet, ScalarSet)>,
    transforms: Option<TransformSet>,
    hyperbolas: Option<Vec<HyperbolaTranslate>>,
}

// Separate ChaCha streams keep point sets independent of which curve
// families a config asks for.
const POINT_STREAM: u64 = 0;
const TRANSFORM_STREAM: u64 = 1;
const HYPERBOLA_STREAM: u64 = 2;

fn draw_cells(cfg: &SweepConfig) -> Result<Vec<Cell>> {
    let stream = |s| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(s);
        rng
    };
    let mut point_rng = stream(POINT_STREAM);
    let mut transform_rng = stream(TRANSFORM_STREAM);
    let mut hyperbola_rng = stream(HYPERBOLA_STREAM);
    let need_t = cfg.bounds.iter().any(|b| {
        matches!(
            b,
            BoundId::Thm1Incidence | BoundId::Thm2Incidence | BoundId::Thm3Energy
        )
    });
    let need_h = cfg.bounds.contains(&BoundId::Thm4Hyperbola);
    let mut cells = Vec::new();
    for &p in &cfg.primes {
        let field = PrimeField::new(p)?;
        for &size in &cfg.sizes {
            for rep in 0..cfg.reps {
                let (points, factors) = match cfg.generator {
                    PointGenerator::RandomPoints => {
                        (random_points(field, size.first, &mut point_rng)?, None)
                    }
                    PointGenerator::Cartesian => {
                        let nb = size.second.unwrap_or(size.first);
                        let (a, b) = random_cartesian(field, size.first, nb, &mut point_rng)?;
                        (PointSet::cartesian(field, a.iter(), b.iter()), Some((a, b)))
                    }
                };
                let n_curves = cfg.transforms.unwrap_or(points.len());
                let transforms = need_t
                    .then(|| random_transforms(field, n_curves, &mut transform_rng))
                    .transpose()?;
                let hyperbolas = need_h
                    .then(|| random_hyperbolas(field, n_curves, &mut hyperbola_rng))
                    .transpose()?;
                cells.push(Cell {
                    field,
                    size,
                    rep,
                    points,
                    factors,
                    transforms,
                    hyperbolas,
                });
            }
        }
    }
    Ok(cells)
}

fn evaluate(cfg: &SweepConfig, cell: &Cell, bound: BoundId) -> Result<SweepRow> {
    let start = Instant::now();
    let field = cell.field;
    let p = field.modulus();
    let np = cell.points.len();
    let (na, nb) = cell
        .factors
        .as_ref()
        .map(|(a, b)| (a.len(), b.len()))
        .unwrap_or((0, 0));
    let group = field.pgl2_order();
    let f = |n: usize| Some(n as f64);
    let mut params = BoundParams {
        points: f(np),
        ..Default::default()
    };
    let mut curves = 0;
    let mut k = None;
    let mut delta = None;
    let mut energy_val = None;
    let mut m_val = None;
    let (lhs, trivial_ok) = match bound {
        BoundId::Thm1Incidence | BoundId::Thm2Incidence | BoundId::Thm3Energy => {
            let t = cell.transforms.as_ref().expect("drawn when needed");
            curves = t.len();
            params.transforms = f(curves);
            params.a = f(na);
            params.b = f(nb);
            if bound == BoundId::Thm1Incidence {
                delta = Some(dyadic_threshold(np, curves));
            }
            let mut ok = true;
            if bound == BoundId::Thm3Energy {
                let e = energy(t);
                energy_val = Some(e);
                params.energy = Some(e as f64);
                ok &= e <= (curves as u64).pow(3);
            }
            let lhs = count_incidences(&cell.points, t)?;
            ok &= lhs <= (np.min(p as usize) * curves) as u64;
            (lhs, ok)
        }
        BoundId::Thm1Rich | BoundId::Thm2Rich => {
            k = Some(cfg.k);
            params.k = f(cfg.k);
            params.a = f(na);
            params.b = f(nb);
            if bound == BoundId::Thm1Rich {
                delta = Some(dyadic_threshold(np, group as usize));
            }
            let lhs = rich_transforms_via_pivots(&cell.points, cfg.k)?.maps.len() as u64;
            (lhs, lhs <= group)
        }
        BoundId::Thm4Hyperbola => {
            let h = cell.hyperbolas.as_ref().expect("drawn when needed");
            let t = family_to_transforms(field, h);
            curves = h.len();
            let m = m_statistic(h)?;
            m_val = Some(m);
            params.a = f(na);
            params.b = f(nb);
            params.hyperbolas = f(curves);
            params.m = f(m);
            let lhs = count_incidences(&cell.points, &t)?;
            (lhs, lhs <= (np.min(p as usize) * curves) as u64)
        }
        BoundId::CorKrichLines => {
            k = Some(cfg.k);
            params.k = f(cfg.k);
            let lhs = rich_lines(&cell.points, cfg.k)?.len() as u64;
            (lhs, lhs <= p * p + p)
        }
    };
    let spec = BoundSpec::new(bound, params);
    let rhs = spec.rhs()?;
    let hyps = spec.hypotheses(p, cfg.constant);
    Ok(SweepRow {
        p,
        generator: cfg.generator.as_str(),
        size: cell.size.to_string(),
        rep: cell.rep,
        bound,
        points: np,
        curves,
        k,
        lhs,
        ratio: lhs as f64 / rhs.max_term,
        rhs_terms: rhs.terms,
        max_term: rhs.max_term,
        hypotheses_hold: hyps.iter().all(|h| h.holds),
        hypotheses: hyps.iter().map(HypothesisFlag::from).collect(),
        delta,
        trivial_ok,
        energy: energy_val,
        m: m_val,
        wall_ms: cfg.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
    })
}

/// Runs every (prime, size, rep, bound) combination. Rows come out ordered by
/// prime, then size schedule position, then repetition, then bound order.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let cells = draw_cells(cfg)?;
    let jobs: Vec<(&Cell, BoundId)> = cells
        .iter()
        .flat_map(|c| cfg.bounds.iter().map(move |&b| (c, b)))
        .collect();
    jobs.par_iter().map(|&(c, b)| evaluate(cfg, c, b)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Jsonl,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(OutputFormat::Jsonl),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

pub fn write_rows(rows: &[SweepRow], format: OutputFormat, out: &mut impl Write) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    match format {
        OutputFormat::Jsonl => {
            for row in rows {
                let line = serde_json::to_string(row).map_err(|e| Error::Io(e.to_string()))?;
                writeln!(out, "{line}").map_err(io)?;
            }
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            let csv_err = |e: csv::Error| Error::Io(e.to_string());
            w.write_record(CSV_HEADER).map_err(csv_err)?;
            for row in rows {
                w.write_record(row.csv_record()).map_err(csv_err)?;
            }
            w.flush().map_err(io)?;
        }
    }
    Ok(())
}

pub fn render_rows(rows: &[SweepRow], format: OutputFormat) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(rows, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("rows are UTF-8"))
}

/// Largest LHS/RHS ratio observed per bound.
pub fn max_ratios(rows: &[SweepRow]) -> BTreeMap<BoundId, f64> {
    let mut out: BTreeMap<BoundId, f64> = BTreeMap::new();
    for r in rows {
        let e = out.entry(r.bound).or_insert(r.ratio);
        *e = e.max(r.ratio);
    }
    out
}

/// `bound = ratio` lines, full round-trip precision.
pub fn format_baseline(ratios: &BTreeMap<BoundId, f64>) -> String {
    ratios.iter().map(|(b, r)| format!("{b} = {r}\n")).collect()
}

pub fn parse_baseline(text: &str) -> Result<BTreeMap<BoundId, f64>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse { line: i + 1, msg };
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("expected bound = ratio, got {line:?}")))?;
        let bound: BoundId = k.trim().parse().map_err(|e: Error| bad(e.to_string()))?;
        let ratio: f64 = v
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad ratio {:?}", v.trim())))?;
        out.insert(bound, ratio);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionCheck {
    pub bound: BoundId,
    pub stored: Option<f64>,
    pub observed: Option<f64>,
    pub ok: bool,
}

/// Compares observed maxima with stored ones: each must be present on both
/// sides and agree within `tol`.
pub fn check_regression(
    stored: &BTreeMap<BoundId, f64>,
    observed: &BTreeMap<BoundId, f64>,
    tol: f64,
) -> Vec<RegressionCheck> {
    let mut keys: Vec<BoundId> = stored.keys().chain(observed.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|bound| {
            let s = stored.get(&bound).copied();
            let o = observed.get(&bound).copied();
            let ok = matches!((s, o), (Some(s), Some(o)) if (o - s).abs() <= tol);
            RegressionCheck {
                bound,
                stored: s,
                observed: o,
                ok,
            }
        })
        .collect()
}
