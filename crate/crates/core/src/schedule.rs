//! Integration-rate schedules.
//!
//! Textual form (used on the command line and in CSV output):
//! `0.5` or `const:0.5`, `linear:0:1`, `piecewise:1=0.2;500=0.8`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AlphaSchedule {
    Constant(f64),
    /// Interpolates from `start` at round 1 to `end` at the final round.
    Linear {
        start: f64,
        end: f64,
    },
    /// `(round, value)` pairs with strictly increasing rounds, the first at round 1.
    Piecewise(Vec<(usize, f64)>),
}

fn check_rate(a: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::param(format!(
            "integration rate must be in [0, 1], got {a}"
        )));
    }
    Ok(())
}

impl AlphaSchedule {
    pub fn constant(value: f64) -> Result<Self> {
        check_rate(value)?;
        Ok(Self::Constant(value))
    }

    pub fn linear(start: f64, end: f64) -> Result<Self> {
        check_rate(start)?;
        check_rate(end)?;
        Ok(Self::Linear { start, end })
    }

    pub fn piecewise(breakpoints: Vec<(usize, f64)>) -> Result<Self> {
        let s = Self::Piecewise(breakpoints);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant(v) => check_rate(*v),
            Self::Linear { start, end } => check_rate(*start).and(check_rate(*end)),
            Self::Piecewise(points) => {
                match points.first() {
                    None => return Err(Error::param("piecewise schedule needs a breakpoint")),
                    Some((r, _)) if *r != 1 => {
                        return Err(Error::param("piecewise schedule must start at round 1"))
                    }
                    _ => {}
                }
                if points.windows(2).any(|w| w[0].0 >= w[1].0) {
                    return Err(Error::param("piecewise rounds must strictly increase"));
                }
                points.iter().try_for_each(|(_, v)| check_rate(*v))
            }
        }
    }

    /// Rate in force at round `t` (1-based) of a run of `t_max` rounds.
    pub fn alpha_at(&self, t: usize, t_max: usize) -> Result<f64> {
        if t == 0 || t > t_max {
            return Err(Error::param(format!("round {t} outside [1, {t_max}]")));
        }
        let a = match self {
            Self::Constant(v) => *v,
            Self::Linear { start, .. } if t_max == 1 => *start,
            Self::Linear { end, .. } if t == t_max => *end,
            Self::Linear { start, end } => {
                start + (end - start) * (t - 1) as f64 / (t_max - 1) as f64
            }
            Self::Piecewise(points) => points
                .iter()
                .take_while(|(r, _)| *r <= t)
                .last()
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::param("piecewise schedule must start at round 1"))?,
        };
        Ok(a.clamp(0.0, 1.0))
    }
}

impl fmt::Display for AlphaSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(v) => write!(f, "const:{v}"),
            Self::Linear { start, end } => write!(f, "linear:{start}:{end}"),
            Self::Piecewise(points) => {
                f.write_str("piecewise:")?;
                for (i, (r, v)) in points.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    write!(f, "{r}={v}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_rate(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::param(format!("not a number: {s:?}")))
}

impl FromStr for AlphaSchedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or(("const", s));
        match kind {
            "const" | "constant" => Self::constant(parse_rate(rest)?),
            "linear" => {
                let (a, b) = rest.split_once(':').ok_or_else(|| {
                    Error::param(format!("linear schedule needs start:end, got {rest:?}"))
                })?;
                Self::linear(parse_rate(a)?, parse_rate(b)?)
            }
            "piecewise" => {
                let points = rest
                    .split(';')
                    .map(|p| {
                        let (r, v) = p.split_once('=').ok_or_else(|| {
                            Error::param(format!("breakpoint needs round=value, got {p:?}"))
                        })?;
                        let r = r
                            .trim()
                            .parse::<usize>()
                            .map_err(|_| Error::param(format!("bad round {r:?}")))?;
                        Ok((r, parse_rate(v)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Self::piecewise(points)
            }
            other => Err(Error::param(format!("unknown schedule kind {other:?}"))),
        }
    }
}
