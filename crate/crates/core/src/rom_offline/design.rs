use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How the points of a [`TrainingDesign`] were generated. Every scheme is a
/// tensor product of one-dimensional fractions `t` of each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DesignScheme {
    /// `t = i/n`, `i = 1..=n` (the lower bound is excluded).
    Uniform { n: usize },
    /// `t = k/2^level`, `k = 0..=2^level`.
    Nested { level: u32 },
    /// Midpoints between consecutive `Uniform { n }` points.
    Midpoints { n: usize },
    /// Points of `Nested { level }` that are not in `Nested { level - 1 }`.
    NestedComplement { level: u32 },
    /// Points given explicitly.
    Explicit,
}

impl fmt::Display for DesignScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DesignScheme::Uniform { n } => write!(f, "uniform:{n}"),
            DesignScheme::Nested { level } => write!(f, "nested:{level}"),
            DesignScheme::Midpoints { n } => write!(f, "midpoints:{n}"),
            DesignScheme::NestedComplement { level } => write!(f, "nested-complement:{level}"),
            DesignScheme::Explicit => write!(f, "explicit"),
        }
    }
}

impl FromStr for DesignScheme {
    type Err = Error;

    /// `uniform:N`, `nested:L`, `midpoints:N` or `nested-complement:L`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad design `{s}` (expected e.g. uniform:12 or nested:4)"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        let num: usize = arg.trim().parse().map_err(|_| bad())?;
        let level = || u32::try_from(num).ok().filter(|&l| l <= 30).ok_or_else(bad);
        let scheme = match kind.trim() {
            "uniform" if num > 0 => DesignScheme::Uniform { n: num },
            "nested" => DesignScheme::Nested { level: level()? },
            "midpoints" if num > 1 => DesignScheme::Midpoints { n: num },
            "nested-complement" if num > 0 => DesignScheme::NestedComplement { level: level()? },
            _ => return Err(bad()),
        };
        Ok(scheme)
    }
}

/// Ordered parameter points in a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingDesign {
    pub bounds: Vec<(f64, f64)>,
    pub scheme: DesignScheme,
    /// Lexicographic order, first parameter outermost.
    pub points: Vec<Vec<f64>>,
}

/// `(1 - t) lo + t hi`, exact at both ends.
fn lerp((lo, hi): (f64, f64), t: f64) -> f64 {
    (1.0 - t) * lo + t * hi
}

fn tensor(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        out = out.iter().flat_map(|p| axis.iter().map(move |&v| [p.as_slice(), &[v]].concat())).collect();
    }
    out
}

impl TrainingDesign {
    pub fn new(bounds: &[(f64, f64)], scheme: DesignScheme) -> Result<Self> {
        if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo <= hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad parameter box {bounds:?}")));
        }
        let fractions: Vec<f64> = match scheme {
            DesignScheme::Uniform { n } if n > 0 => (1..=n).map(|i| i as f64 / n as f64).collect(),
            DesignScheme::Nested { level } => {
                let m = 1usize << level;
                (0..=m).map(|k| k as f64 / m as f64).collect()
            }
            DesignScheme::Midpoints { n } if n > 1 => (1..n).map(|i| (2 * i + 1) as f64 / (2 * n) as f64).collect(),
            DesignScheme::NestedComplement { level } if level > 0 => {
                let fine = Self::new(bounds, DesignScheme::Nested { level })?;
                let coarse = Self::new(bounds, DesignScheme::Nested { level: level - 1 })?;
                let points = fine.points.into_iter().filter(|p| !coarse.points.contains(p)).collect();
                return Ok(Self { bounds: bounds.to_vec(), scheme, points });
            }
            _ => return Err(Error::InvalidArgument(format!("design {scheme} cannot be generated"))),
        };
        let axes: Vec<Vec<f64>> = bounds.iter().map(|&b| fractions.iter().map(|&t| lerp(b, t)).collect()).collect();
        Ok(Self { bounds: bounds.to_vec(), scheme, points: tensor(&axes) })
    }

    pub fn uniform(bounds: &[(f64, f64)], n: usize) -> Result<Self> {
        Self::new(bounds, DesignScheme::Uniform { n })
    }

    pub fn nested(bounds: &[(f64, f64)], level: u32) -> Result<Self> {
        Self::new(bounds, DesignScheme::Nested { level })
    }

    /// Explicit points; they must lie in the box.
    pub fn explicit(bounds: &[(f64, f64)], points: Vec<Vec<f64>>) -> Result<Self> {
        for p in &points {
            let inside = p.len() == bounds.len() && p.iter().zip(bounds).all(|(&v, &(lo, hi))| v >= lo && v <= hi);
            if !inside {
                return Err(Error::ParameterOutOfBox { mu: p.clone(), bounds: bounds.to_vec() });
            }
        }
        Ok(Self { bounds: bounds.to_vec(), scheme: DesignScheme::Explicit, points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        self.points.iter().any(|p| p.as_slice() == mu)
    }
}
