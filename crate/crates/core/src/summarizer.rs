//! Degree-vector summarizers.
//!
//! A summarizer maps an induced degree vector (and the node's own layer
//! weights) to a `d`-dimensional nonnegative vector. Every built-in family is
//! non-decreasing in the degree vector, which is what makes peeling sound.

use std::fmt;
use std::fs;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::LayerId;

/// Grid used to turn real summaries into exact bucket keys and threshold comparisons.
pub const SUMMARY_QUANTUM: f64 = 1e-9;

/// Slack on cumulative-weight comparisons.
pub const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Maps a summary value onto the `SUMMARY_QUANTUM` grid.
#[inline]
pub fn quantize(x: f64) -> i64 {
    (x / SUMMARY_QUANTUM).round() as i64
}

#[inline]
pub fn dequantize(key: i64) -> f64 {
    key as f64 * SUMMARY_QUANTUM
}

/// Distribution family of a layer group; determines its sufficient statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Sum of degrees.
    PoissonBinomial,
    /// Maximum degree.
    Uniform,
    /// Sum of `ln(1 + deg)`.
    Powerlaw,
    /// Sum of degrees.
    Exponential,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poisson_binomial" => Ok(Family::PoissonBinomial),
            "uniform" => Ok(Family::Uniform),
            "powerlaw" => Ok(Family::Powerlaw),
            "exponential" => Ok(Family::Exponential),
            other => Err(Error::InvalidSummarizer(format!(
                "unknown family {other:?}"
            ))),
        }
    }
}

impl Family {
    fn statistic(self, degrees: impl Iterator<Item = u32>) -> f64 {
        match self {
            Family::PoissonBinomial | Family::Exponential => degrees.map(f64::from).sum(),
            Family::Uniform => degrees.max().map(f64::from).unwrap_or(0.0),
            Family::Powerlaw => degrees.map(|d| (1.0 + f64::from(d)).ln()).sum(),
        }
    }
}

/// Partition of the layers into groups with a declared degree distribution each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub groups: Vec<Vec<LayerId>>,
    pub families: Vec<String>,
}

impl PartitionSpec {
    fn validate(&self, num_layers: usize) -> Result<Vec<Family>> {
        if self.groups.len() != self.families.len() {
            return Err(Error::InvalidSummarizer(format!(
                "{} groups but {} families",
                self.groups.len(),
                self.families.len()
            )));
        }
        let families = self
            .families
            .iter()
            .map(|f| f.parse())
            .collect::<Result<Vec<Family>>>()?;
        let mut seen = vec![false; num_layers];
        for group in &self.groups {
            if group.is_empty() {
                return Err(Error::InvalidSummarizer("empty layer group".into()));
            }
            for &l in group {
                if l >= num_layers {
                    return Err(Error::UnknownLayer(l as u64));
                }
                if seen[l] {
                    return Err(Error::InvalidSummarizer(format!(
                        "layer {l} appears in more than one group"
                    )));
                }
                seen[l] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidSummarizer(format!(
                "incomplete partition: layer {missing} is not covered"
            )));
        }
        Ok(families)
    }
}

/// Unbound summarizer description, as written on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum SummarizerSpec {
    Identity,
    TopLambda(usize),
    Subset(Vec<LayerId>),
    Sum,
    WSum,
    MinMax,
    OrderStats(Vec<usize>),
    Stat(PartitionSpec),
    WTopLambda(f64),
}

fn parse_list<T: FromStr>(body: &str, what: &str) -> Result<Vec<T>> {
    body.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidSummarizer(format!("invalid {what} {t:?}")))
        })
        .collect()
}

impl FromStr for SummarizerSpec {
    type Err = Error;

    /// Accepts `identity`, `sum`, `wsum`, `minmax`, `top:λ`, `wtop:λ`,
    /// `subset:0,2,5`, `order:1,3` and `stat:@spec.json`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, body) = match s.split_once(':') {
            Some((h, b)) => (h, Some(b)),
            None => (s, None),
        };
        let need_body = || {
            body.filter(|b| !b.trim().is_empty())
                .ok_or_else(|| Error::InvalidSummarizer(format!("{head:?} needs a parameter")))
        };
        match head {
            "identity" => Ok(SummarizerSpec::Identity),
            "sum" => Ok(SummarizerSpec::Sum),
            "wsum" => Ok(SummarizerSpec::WSum),
            "minmax" => Ok(SummarizerSpec::MinMax),
            "top" => {
                let b = need_body()?;
                let lambda = b
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidSummarizer(format!("invalid λ {b:?}")))?;
                Ok(SummarizerSpec::TopLambda(lambda))
            }
            "wtop" => {
                let b = need_body()?;
                let lambda: f64 = b
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidSummarizer(format!("invalid λ {b:?}")))?;
                Ok(SummarizerSpec::WTopLambda(lambda))
            }
            "subset" => Ok(SummarizerSpec::Subset(parse_list(need_body()?, "layer")?)),
            "order" => Ok(SummarizerSpec::OrderStats(parse_list(need_body()?, "λ")?)),
            "stat" => {
                let b = need_body()?;
                let text = match b.strip_prefix('@') {
                    Some(path) => fs::read_to_string(path).map_err(|source| Error::Io {
                        path: path.into(),
                        source,
                    })?,
                    None => b.to_string(),
                };
                let spec: PartitionSpec = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidSummarizer(format!("partition spec: {e}")))?;
                Ok(SummarizerSpec::Stat(spec))
            }
            other => Err(Error::InvalidSummarizer(format!(
                "unknown summarizer {other:?}"
            ))),
        }
    }
}

impl fmt::Display for SummarizerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            SummarizerSpec::Identity => write!(f, "identity"),
            SummarizerSpec::Sum => write!(f, "sum"),
            SummarizerSpec::WSum => write!(f, "wsum"),
            SummarizerSpec::MinMax => write!(f, "minmax"),
            SummarizerSpec::TopLambda(l) => write!(f, "top:{l}"),
            SummarizerSpec::WTopLambda(l) => write!(f, "wtop:{l}"),
            SummarizerSpec::Subset(layers) => write!(f, "subset:{}", join(layers)),
            SummarizerSpec::OrderStats(ls) => write!(f, "order:{}", join(ls)),
            SummarizerSpec::Stat(spec) => write!(
                f,
                "stat:{}",
                serde_json::to_string(spec).map_err(|_| fmt::Error)?
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Identity,
    TopLambda(usize),
    Subset(Vec<LayerId>),
    Sum,
    WSum,
    MinMax,
    OrderStats(Vec<usize>),
    Stat {
        groups: Vec<Vec<LayerId>>,
        families: Vec<Family>,
    },
    WTopLambda(f64),
}

/// A summarizer bound to a layer count. Immutable; `eval` is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct Summarizer {
    spec: SummarizerSpec,
    kind: Kind,
    num_layers: usize,
    dim: usize,
}

impl Summarizer {
    pub fn new(spec: SummarizerSpec, num_layers: usize) -> Result<Self> {
        if num_layers == 0 {
            return Err(Error::InvalidSummarizer("graph has no layers".into()));
        }
        let check_lambda = |l: usize| {
            if l == 0 || l > num_layers {
                Err(Error::LambdaOutOfRange {
                    value: l,
                    max: num_layers,
                })
            } else {
                Ok(())
            }
        };
        let (kind, dim) = match &spec {
            SummarizerSpec::Identity => (Kind::Identity, num_layers),
            SummarizerSpec::Sum => (Kind::Sum, 1),
            SummarizerSpec::WSum => (Kind::WSum, 1),
            SummarizerSpec::MinMax => (Kind::MinMax, 2),
            SummarizerSpec::TopLambda(l) => {
                check_lambda(*l)?;
                (Kind::TopLambda(*l), 1)
            }
            SummarizerSpec::WTopLambda(l) => {
                if !(l.is_finite() && *l >= 0.0) {
                    return Err(Error::InvalidSummarizer(format!(
                        "weighted λ must be a nonnegative real, got {l}"
                    )));
                }
                (Kind::WTopLambda(*l), 1)
            }
            SummarizerSpec::Subset(layers) => {
                if layers.is_empty() {
                    return Err(Error::InvalidSummarizer("empty layer subset".into()));
                }
                if let Some(&l) = layers.iter().find(|&&l| l >= num_layers) {
                    return Err(Error::UnknownLayer(l as u64));
                }
                let mut layers = layers.clone();
                layers.sort_unstable();
                layers.dedup();
                (Kind::Subset(layers), 1)
            }
            SummarizerSpec::OrderStats(ls) => {
                if ls.is_empty() {
                    return Err(Error::InvalidSummarizer("no order statistics given".into()));
                }
                for &l in ls {
                    check_lambda(l)?;
                }
                (Kind::OrderStats(ls.clone()), ls.len())
            }
            SummarizerSpec::Stat(p) => {
                let families = p.validate(num_layers)?;
                let dim = families.len();
                (
                    Kind::Stat {
                        groups: p.groups.clone(),
                        families,
                    },
                    dim,
                )
            }
        };
        Ok(Summarizer {
            spec,
            kind,
            num_layers,
            dim,
        })
    }

    pub fn parse(spec: &str, num_layers: usize) -> Result<Self> {
        Self::new(spec.parse()?, num_layers)
    }

    pub fn identity(num_layers: usize) -> Self {
        Self::new(SummarizerSpec::Identity, num_layers).expect("identity on ≥1 layer")
    }

    pub fn sum(num_layers: usize) -> Self {
        Self::new(SummarizerSpec::Sum, num_layers).expect("sum on ≥1 layer")
    }

    pub fn minmax(num_layers: usize) -> Self {
        Self::new(SummarizerSpec::MinMax, num_layers).expect("minmax on ≥1 layer")
    }

    pub fn top_lambda(lambda: usize, num_layers: usize) -> Result<Self> {
        Self::new(SummarizerSpec::TopLambda(lambda), num_layers)
    }

    pub fn weighted_top_lambda(lambda: f64, num_layers: usize) -> Result<Self> {
        Self::new(SummarizerSpec::WTopLambda(lambda), num_layers)
    }

    pub fn subset(layers: Vec<LayerId>, num_layers: usize) -> Result<Self> {
        Self::new(SummarizerSpec::Subset(layers), num_layers)
    }

    pub fn spec(&self) -> &SummarizerSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    /// True when every output is an integer for integer degree input.
    pub fn is_integral(&self) -> bool {
        match &self.kind {
            Kind::WSum => false,
            Kind::Stat { families, .. } => !families.contains(&Family::Powerlaw),
            _ => true,
        }
    }

    /// `S(deg, w)`.
    pub fn eval(&self, deg: &[u32], w: &[f64]) -> Result<Vec<f64>> {
        if deg.len() != self.num_layers {
            return Err(Error::DimensionMismatch {
                expected: self.num_layers,
                got: deg.len(),
            });
        }
        if w.len() != self.num_layers {
            return Err(Error::DimensionMismatch {
                expected: self.num_layers,
                got: w.len(),
            });
        }
        let mut out = vec![0.0; self.dim];
        self.eval_into(deg, w, &mut out);
        Ok(out)
    }

    /// Unchecked variant of [`eval`](Self::eval) for hot loops.
    /// `deg` and `w` must have `num_layers` entries and `out` must have `dim`.
    pub fn eval_into(&self, deg: &[u32], w: &[f64], out: &mut [f64]) {
        match &self.kind {
            Kind::Identity => {
                for (o, &d) in out.iter_mut().zip(deg) {
                    *o = f64::from(d);
                }
            }
            Kind::Sum => out[0] = deg.iter().map(|&d| f64::from(d)).sum(),
            Kind::WSum => out[0] = deg.iter().zip(w).map(|(&d, &w)| f64::from(d) * w).sum(),
            Kind::MinMax => {
                out[0] = f64::from(*deg.iter().min().unwrap());
                out[1] = f64::from(*deg.iter().max().unwrap());
            }
            Kind::TopLambda(l) => out[0] = f64::from(kth_largest(deg, *l)),
            Kind::WTopLambda(l) => out[0] = f64::from(top_lambda_weighted(deg, w, *l)),
            Kind::Subset(layers) => {
                out[0] = f64::from(layers.iter().map(|&l| deg[l]).min().unwrap());
            }
            Kind::OrderStats(ls) => {
                let mut sorted = deg.to_vec();
                sorted.sort_unstable_by(|a, b| b.cmp(a));
                for (o, &l) in out.iter_mut().zip(ls) {
                    *o = f64::from(sorted[l - 1]);
                }
            }
            Kind::Stat { groups, families } => {
                for ((o, group), family) in out.iter_mut().zip(groups).zip(families) {
                    *o = family.statistic(group.iter().map(|&l| deg[l]));
                }
            }
        }
    }

    /// Single output coordinate; avoids allocating for `d = 1` hot paths.
    pub fn eval_coord(&self, deg: &[u32], w: &[f64], i: usize) -> f64 {
        if self.dim == 1 {
            let mut out = [0.0];
            self.eval_into(deg, w, &mut out);
            out[0]
        } else {
            let mut out = vec![0.0; self.dim];
            self.eval_into(deg, w, &mut out);
            out[i]
        }
    }
}

impl fmt::Display for Summarizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.spec.fmt(f)
    }
}

/// λ-th largest entry (1-based).
fn kth_largest(deg: &[u32], lambda: usize) -> u32 {
    let mut sorted = deg.to_vec();
    let idx = lambda - 1;
    let (_, kth, _) = sorted.select_nth_unstable_by(idx, |a, b| b.cmp(a));
    *kth
}

/// Largest `k` such that the layers where `deg ≥ k` carry total weight at
/// least `lambda` (weights taken relative to the node itself).
///
/// The qualifying layer set must be non-empty, so `lambda = 0` yields the
/// maximum degree entry. Returns 0 when even all layers together weigh less
/// than `lambda`.
pub fn top_lambda_weighted(deg: &[u32], w: &[f64], lambda: f64) -> u32 {
    let mut order: Vec<usize> = (0..deg.len()).collect();
    order.sort_unstable_by(|&a, &b| deg[b].cmp(&deg[a]).then(a.cmp(&b)));
    let mut cumulative = 0.0;
    for &l in &order {
        cumulative += w[l];
        if cumulative >= lambda - WEIGHT_TOLERANCE {
            return deg[l];
        }
    }
    0
}

pub fn make_stat_summarizer(spec: PartitionSpec, num_layers: usize) -> Result<Summarizer> {
    Summarizer::new(SummarizerSpec::Stat(spec), num_layers)
}

pub fn make_order_stat_summarizer(lambdas: Vec<usize>, num_layers: usize) -> Result<Summarizer> {
    Summarizer::new(SummarizerSpec::OrderStats(lambdas), num_layers)
}
