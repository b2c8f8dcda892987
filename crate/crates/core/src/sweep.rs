//! Parameter sweeps over the transformed prisoner's dilemma.
//!
//! A sweep either varies the summary influences `(x, y)` directly or
//! derives them from the symmetric crossed-chain hierarchy with chain
//! lengths `a`, `c`, inverse temperature `β` and free float `D`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::game::{classify_regime, transform_summary, NormalFormGame, Regime};
use crate::graph::{crossed_chains, sigma_for_beta, ChainLengths};
use crate::influence::{GraphInfluence, InfluenceModel, Summary};
use crate::ising::chain_xy_coupled;
use crate::vote::VoteParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SweepParam {
    A,
    C,
    Beta,
    FreeFloat,
    X,
    Y,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::A => "a",
            SweepParam::C => "c",
            SweepParam::Beta => "beta",
            SweepParam::FreeFloat => "D",
            SweepParam::X => "x",
            SweepParam::Y => "y",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "a" => SweepParam::A,
            "c" => SweepParam::C,
            "beta" | "β" => SweepParam::Beta,
            "D" => SweepParam::FreeFloat,
            "x" => SweepParam::X,
            "y" => SweepParam::Y,
            _ => return Err(Error::Parse(format!("unknown sweep parameter {s:?}"))),
        })
    }
}

/// `steps` evenly spaced values from `start` to `end` inclusive.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl Range {
    pub fn new(start: f64, end: f64, steps: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite()) || steps < 2 {
            return Err(Error::InvalidParameter(format!("range {start}:{end}:{steps} needs finite ends and at least 2 steps")));
        }
        Ok(Self { start, end, steps })
    }

    pub fn value(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            return self.end;
        }
        self.start + (self.end - self.start) * k as f64 / (self.steps - 1) as f64
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(|k| self.value(k))
    }
}

impl FromStr for Range {
    type Err = Error;
    /// `start:end:steps`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("range {s:?} is not start:end:steps"));
        let parts: Vec<&str> = s.split(':').collect();
        let [start, end, steps] = parts[..] else {
            return Err(bad());
        };
        Range::new(
            start.trim().parse().map_err(|_| bad())?,
            end.trim().parse().map_err(|_| bad())?,
            steps.trim().parse().map_err(|_| bad())?,
        )
    }
}

/// How chain-derived sweeps obtain `(x, y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum InfluenceSource {
    #[default]
    ClosedForm,
    Graph(InfluenceModel),
}

impl FromStr for InfluenceSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed-form" => Ok(InfluenceSource::ClosedForm),
            other => other.parse().map(InfluenceSource::Graph),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// Outermost first.
    pub vary: Vec<(SweepParam, Range)>,
    pub fixed: Vec<(SweepParam, f64)>,
    pub source: InfluenceSource,
    pub cap: usize,
}

/// Free float used by chain sweeps that do not set `D`.
pub const DEFAULT_FREE_FLOAT: f64 = 0.5;

/// Upper bound on grid points.
pub const MAX_GRID: usize = 1 << 24;

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let mut names: Vec<SweepParam> = self.vary.iter().map(|v| v.0).chain(self.fixed.iter().map(|f| f.0)).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter(format!("parameter {} given twice", w[0])));
        }
        if self.vary.is_empty() {
            return Err(Error::InvalidParameter("nothing to vary".into()));
        }
        let grid = self.vary.iter().try_fold(1usize, |acc, (_, r)| acc.checked_mul(r.steps));
        if grid.is_none_or(|g| g > MAX_GRID) {
            return Err(Error::InvalidParameter(format!("grid exceeds {MAX_GRID} points")));
        }
        let has = |p| names.contains(&p);
        let direct = has(SweepParam::X) || has(SweepParam::Y);
        if direct {
            if !(has(SweepParam::X) && has(SweepParam::Y)) {
                return Err(Error::InvalidParameter("x and y must both be given".into()));
            }
            if let Some(p) = [SweepParam::A, SweepParam::C, SweepParam::Beta, SweepParam::FreeFloat]
                .into_iter()
                .find(|&p| has(p))
            {
                return Err(Error::InvalidParameter(format!("{p} cannot be combined with x and y")));
            }
        } else if let Some(p) = [SweepParam::A, SweepParam::C, SweepParam::Beta].into_iter().find(|&p| !has(p)) {
            return Err(Error::InvalidParameter(format!("chain sweeps need a, c and beta; {p} is missing")));
        }
        for (p, values) in self.value_sets() {
            for v in values {
                check_value(p, v, self.source)?;
            }
        }
        Ok(())
    }

    fn value_sets(&self) -> Vec<(SweepParam, Vec<f64>)> {
        self.vary
            .iter()
            .map(|(p, r)| (*p, r.values().collect()))
            .chain(self.fixed.iter().map(|&(p, v)| (p, vec![v])))
            .collect()
    }

    pub fn grid_size(&self) -> usize {
        self.vary.iter().map(|(_, r)| r.steps).product()
    }

    /// Values of the varied parameters at grid point `k` (last one fastest).
    pub fn point(&self, mut k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.vary.len()];
        for (slot, (_, r)) in out.iter_mut().zip(&self.vary).rev() {
            *slot = r.value(k % r.steps);
            k /= r.steps;
        }
        out
    }

    /// Swept parameters that get their own column; `x` and `y` are always
    /// reported in their fixed columns.
    fn leading(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.vary.len()).filter(|&i| !matches!(self.vary[i].0, SweepParam::X | SweepParam::Y))
    }

    pub fn header(&self) -> Vec<String> {
        self.leading()
            .map(|i| self.vary[i].0.name().to_string())
            .chain(["x", "y", "regime", "value", "nash-profile"].map(String::from))
            .collect()
    }
}

fn check_value(p: SweepParam, v: f64, source: InfluenceSource) -> Result<()> {
    let ok = match p {
        SweepParam::A | SweepParam::C => v >= 1.0 && v.fract() == 0.0 && v <= 64.0,
        SweepParam::Beta => match source {
            InfluenceSource::ClosedForm => v >= 0.0 && v.is_finite(),
            InfluenceSource::Graph(_) => v > 0.0 && v.is_finite(),
        },
        SweepParam::FreeFloat => v > 0.0 && v < 1.0,
        SweepParam::X | SweepParam::Y => (0.0..=1.0).contains(&v),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{p} = {v} is out of range")))
    }
}

/// One evaluated grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// Values of the swept parameters other than `x` and `y`.
    pub params: Vec<f64>,
    pub x: f64,
    pub y: f64,
    /// `None` when the shares are undefined (`y <= 1/2`).
    pub outcome: Option<RowOutcome>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowOutcome {
    pub regime: Regime,
    pub value: Option<f64>,
    /// Pure equilibria of the full payoff tensor.
    pub nash: Vec<String>,
}

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        let mut out: Vec<String> = self.params.iter().map(|&v| format_decimal(v)).collect();
        out.push(format_decimal(self.x));
        out.push(format_decimal(self.y));
        match &self.outcome {
            None => out.extend(["degenerate".to_string(), String::new(), String::new()]),
            Some(o) => {
                out.push(o.regime.to_string());
                out.push(o.value.map(format_decimal).unwrap_or_default());
                out.push(o.nash.join(" "));
            }
        }
        out
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let game = NormalFormGame::<f64>::prisoners_dilemma();
    (0..spec.grid_size())
        .into_par_iter()
        .map(|k| {
            let params = spec.point(k);
            let get = |p: SweepParam| {
                spec.vary
                    .iter()
                    .position(|v| v.0 == p)
                    .map(|i| params[i])
                    .or_else(|| spec.fixed.iter().find(|f| f.0 == p).map(|f| f.1))
            };
            let summary = summary_at(&get, spec)?;
            Ok(SweepRow {
                outcome: evaluate(&game, summary)?,
                x: summary.x,
                y: summary.y,
                params: spec.leading().map(|i| params[i]).collect(),
            })
        })
        .collect()
}

fn summary_at(get: &impl Fn(SweepParam) -> Option<f64>, spec: &SweepSpec) -> Result<Summary<f64>> {
    if let (Some(x), Some(y)) = (get(SweepParam::X), get(SweepParam::Y)) {
        return Ok(Summary::symmetric(x, y));
    }
    let need = |p| get(p).ok_or_else(|| Error::InvalidParameter(format!("{p} is not set")));
    let (a, c, beta) = (need(SweepParam::A)?, need(SweepParam::C)?, need(SweepParam::Beta)?);
    let d = get(SweepParam::FreeFloat).unwrap_or(DEFAULT_FREE_FLOAT);
    let (a, c) = (a as u32, c as u32);
    match spec.source {
        InfluenceSource::ClosedForm => {
            let (x, y) = chain_xy_coupled(a, c, beta * (1.0 - d) / d);
            Ok(Summary::symmetric(x, y))
        }
        InfluenceSource::Graph(model) => {
            let g = crossed_chains(ChainLengths::symmetric(a as usize, c as usize), d, sigma_for_beta(beta))?;
            let params = VoteParams::from_graph(&g)?.with_cap(spec.cap);
            Summary::from_oracle(&GraphInfluence::for_graph(&g, params, model)?)
        }
    }
}

fn evaluate(game: &NormalFormGame<f64>, summary: Summary<f64>) -> Result<Option<RowOutcome>> {
    if summary.y <= 0.5 || summary.y_bar <= 0.5 {
        return Ok(None);
    }
    let tensor = match transform_summary(game, summary) {
        Err(Error::DegenerateInfluence { .. }) => return Ok(None),
        other => other?,
    };
    let nash = tensor.pure_nash().iter().map(|p| p.render(&tensor.labels)).collect();
    let class = classify_regime(summary)?;
    Ok(Some(RowOutcome { regime: class.regime, value: class.value.ok(), nash }))
}

/// Decimal notation with at most 15 significant digits.
pub fn format_decimal(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (14 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { &s };
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::chain_xy;

    fn direct(x: Range, y: Range) -> SweepSpec {
        SweepSpec {
            vary: vec![(SweepParam::Y, y), (SweepParam::X, x)],
            fixed: vec![],
            source: InfluenceSource::ClosedForm,
            cap: crate::DEFAULT_CAP,
        }
    }

    #[test]
    fn decimal_formatting() {
        assert_eq!(format_decimal(0.5), "0.5");
        assert_eq!(format_decimal(1.0 / 3.0), "0.333333333333333");
        assert_eq!(format_decimal(2.0 / 3.0), "0.666666666666667");
        assert_eq!(format_decimal(4.0), "4");
        assert_eq!(format_decimal(-0.6), "-0.6");
        assert_eq!(format_decimal(123.456), "123.456");
        assert_eq!(format_decimal(1e-20), "0.00000000000000000001");
    }

    #[test]
    fn ranges() {
        let r: Range = "0:1:5".parse().unwrap();
        assert_eq!(r.values().collect::<Vec<_>>(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!("0:1:1".parse::<Range>().is_err());
        assert!("0:1".parse::<Range>().is_err());
    }

    #[test]
    fn grid_order_is_row_major() {
        let s = direct(Range::new(0.0, 1.0, 3).unwrap(), Range::new(0.6, 1.0, 2).unwrap());
        assert_eq!(s.point(0), vec![0.6, 0.0]);
        assert_eq!(s.point(1), vec![0.6, 0.5]);
        assert_eq!(s.point(3), vec![1.0, 0.0]);
    }

    #[test]
    fn regime_rows() {
        let s = direct(Range::new(0.2, 0.7, 3).unwrap(), Range::new(0.5, 0.9, 2).unwrap());
        let rows = run_sweep(&s).unwrap();
        assert!(rows[..3].iter().all(|r| r.outcome.is_none()));
        let regimes: Vec<Regime> = rows[3..].iter().map(|r| r.outcome.as_ref().unwrap().regime).collect();
        assert_eq!(regimes, vec![Regime::PdV1, Regime::Cooperation, Regime::PdV2]);
        assert_eq!(s.header(), ["x", "y", "regime", "value", "nash-profile"]);
        assert_eq!(rows[3].record(), ["0.2", "0.9", "pd-v1", "-0.6", "((D,C),(C,D))"]);
    }

    #[test]
    fn chain_sweep_uses_closed_form() {
        let s = SweepSpec {
            vary: vec![(SweepParam::A, Range::new(1.0, 3.0, 3).unwrap())],
            fixed: vec![(SweepParam::C, 4.0), (SweepParam::Beta, 1.0)],
            source: InfluenceSource::ClosedForm,
            cap: crate::DEFAULT_CAP,
        };
        let rows = run_sweep(&s).unwrap();
        for (row, a) in rows.iter().zip(1..) {
            let (x, y) = chain_xy(a, 4, 1.0);
            assert_eq!((row.x, row.y), (x, y));
        }
    }

    #[test]
    fn bad_specs() {
        let mut s = direct(Range::new(0.0, 1.0, 3).unwrap(), Range::new(0.5, 1.0, 3).unwrap());
        s.fixed.push((SweepParam::A, 2.0));
        assert!(run_sweep(&s).is_err());
        let s = SweepSpec {
            vary: vec![(SweepParam::A, Range::new(1.0, 3.0, 3).unwrap())],
            fixed: vec![(SweepParam::C, 4.0)],
            source: InfluenceSource::ClosedForm,
            cap: crate::DEFAULT_CAP,
        };
        assert!(run_sweep(&s).is_err());
        let s = direct(Range::new(0.0, 1.5, 3).unwrap(), Range::new(0.5, 1.0, 3).unwrap());
        assert!(run_sweep(&s).is_err());
    }
}
