//! Flags and config-file keys. Every flag has a config key of the same
//! name; flags win when both are given.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use hypercone::constants::{Exponent, ExponentPair};
use hypercone::spaces::{ConePoint, ConeSpace, Space, SurfaceSpace};
use serde::{Deserialize, Deserializer};

use crate::CliError;

/// A real number written as a decimal or as a multiple of `pi`
/// (`pi`, `2pi`, `3*pi/2`, `pi/4`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

fn parse_factor(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Some(coef) = s.strip_suffix("pi") {
        let coef = coef.trim().trim_end_matches('*').trim();
        let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().ok()? };
        Some(c * PI)
    } else {
        s.parse::<f64>().ok()
    }
}

impl FromStr for Real {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let lower = s.trim().to_ascii_lowercase();
        let value = match lower.split_once('/') {
            Some((num, den)) => parse_factor(num).zip(parse_factor(den)).map(|(a, b)| a / b),
            None => parse_factor(&lower),
        };
        match value {
            Some(v) if v.is_finite() => Ok(Real(v)),
            _ => Err(format!("cannot read '{s}' as a number or multiple of pi")),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Real(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A point `r,phi` of a two-dimensional cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointArg(pub ConePoint);

impl FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (r, phi) = s.split_once(',').ok_or_else(|| format!("expected 'r,phi', got '{s}'"))?;
        let (r, phi) = (r.parse::<Real>()?.0, phi.parse::<Real>()?.0);
        if !(r >= 0.0) {
            return Err(format!("radius must be >= 0, got {r}"));
        }
        Ok(PointArg(ConePoint::new(r, phi)))
    }
}

impl fmt::Display for PointArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.r, self.0.phi)
    }
}

impl<'de> Deserialize<'de> for PointArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pair([f64; 2]),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Pair([r, phi]) => format!("{r},{phi}").parse().map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Subcommand to run; config files only.
    #[arg(skip)]
    pub command: Option<String>,
    /// Space kind: cone, surface or euclidean.
    #[arg(long)]
    pub space: Option<String>,
    /// Cone angle of a 2-D cone, e.g. `pi` or `3pi/2`.
    #[arg(long)]
    pub theta: Option<Real>,
    /// Cross-section measure of an N-dimensional cone.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Asymptotic slope of the surface profile.
    #[arg(long)]
    pub c: Option<f64>,
    /// Dimension.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub dim: Option<f64>,
    /// Asymptotic volume ratio, for closed forms.
    #[arg(long)]
    pub avr: Option<f64>,
    /// Source exponent; `inf` allowed.
    #[arg(long)]
    pub p: Option<Exponent>,
    /// Target exponent; `inf` allowed.
    #[arg(long)]
    pub q: Option<Exponent>,
    /// Time.
    #[arg(long)]
    pub t: Option<f64>,
    /// Comma-separated time grid.
    #[arg(long, value_delimiter = ',')]
    pub times: Option<Vec<f64>>,
    /// Radial grid size for cones.
    #[arg(long)]
    pub points: Option<usize>,
    /// Time steps of a flow trace.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Initial data of a flow: extremizer, gaussian:<c0> or plateau:<radius>.
    #[arg(long)]
    pub data: Option<String>,
    /// Comma-separated Gaussian rates for the log-Sobolev check.
    #[arg(long, value_delimiter = ',')]
    pub c0: Option<Vec<f64>>,
    /// Number of random functions in a sweep.
    #[arg(long)]
    pub samples: Option<usize>,
    /// First point `r,phi`.
    #[arg(long)]
    pub x: Option<PointArg>,
    /// Second point `r,phi`.
    #[arg(long)]
    pub y: Option<PointArg>,
    /// Manifold dimension for the rigidity constants.
    #[arg(long)]
    pub n: Option<usize>,
    /// Lower bound on AVR for the topology report.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<f64>,
    /// Comma-separated acceptance criteria to run (default: all).
    #[arg(long, value_delimiter = ',')]
    pub criterion: Option<Vec<u8>>,
    /// Seed of randomised sweeps.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance of the headline check, overriding the default.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output format of `rigidity`: json or text.
    #[arg(long)]
    pub format: Option<String>,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for CSV traces.
    #[arg(long)]
    pub trace_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($flags:ident, $config:ident; $($field:ident),*) => {
        Params { $($field: $flags.$field.or($config.$field)),* }
    };
}

impl Params {
    /// Flags over config values.
    pub fn overlay(self, config: Params) -> Params {
        let flags = self;
        overlay!(flags, config; command, space, theta, sigma, c, dim, avr, p, q, t, times, points, steps, data,
            c0, samples, x, y, n, k, criterion, seed, tol, format, out, trace_dir)
    }

    pub fn pair(&self) -> Result<ExponentPair, CliError> {
        let p = self.p.ok_or_else(|| missing("p"))?;
        let q = self.q.ok_or_else(|| missing("q"))?;
        Ok(ExponentPair::new(p, q)?)
    }

    pub fn time(&self) -> Result<f64, CliError> {
        let t = self.t.ok_or_else(|| missing("t"))?;
        positive("t", t)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn space(&self) -> Result<Space, CliError> {
        let kind = self.space.as_deref().ok_or_else(|| missing("space"))?;
        match kind {
            "cone" => {
                let dim = self.dim.unwrap_or(2.0);
                let cone = match (self.theta, self.sigma) {
                    (Some(theta), None) if dim == 2.0 => ConeSpace::planar(theta.0)?,
                    (Some(_), _) => return Err(CliError::Validation("theta needs N = 2 and no sigma".into())),
                    (None, Some(sigma)) => ConeSpace::new(dim, sigma)?,
                    (None, None) => return Err(CliError::Validation("a cone needs --theta or --sigma".into())),
                };
                Ok(Space::Cone(cone))
            }
            "euclidean" => Ok(Space::Cone(ConeSpace::euclidean(self.dim.ok_or_else(|| missing("N"))?)?)),
            "surface" => Ok(Space::Surface(SurfaceSpace::new(self.c.ok_or_else(|| missing("c"))?)?)),
            other => Err(CliError::Validation(format!("unknown space '{other}'; use cone, surface or euclidean"))),
        }
    }

    pub fn points(&self) -> Result<usize, CliError> {
        let points = self.points.unwrap_or(1024);
        if points < 16 {
            return Err(CliError::Validation(format!("points must be at least 16, got {points}")));
        }
        Ok(points)
    }
}

pub fn missing(key: &str) -> CliError {
    CliError::Validation(format!("missing required value '{key}'"))
}

pub fn positive(key: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Validation(format!("{key} must be positive, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_expressions() {
        let v = |s: &str| s.parse::<Real>().unwrap().0;
        assert_eq!(v("pi"), PI);
        assert_eq!(v("3pi/2"), 1.5 * PI);
        assert_eq!(v("3*pi/2"), 1.5 * PI);
        assert_eq!(v("pi/4"), 0.25 * PI);
        assert_eq!(v("2.5"), 2.5);
        assert!("pie".parse::<Real>().is_err());
        assert!("1/0".parse::<Real>().is_err());
    }

    #[test]
    fn flags_override_config() {
        let config: Params = serde_json::from_str(r#"{"p": 2, "q": "inf", "t": 1, "theta": "pi"}"#).unwrap();
        let flags = Params { t: Some(3.0), ..Params::default() };
        let merged = flags.overlay(config);
        assert_eq!(merged.t, Some(3.0));
        assert_eq!(merged.q, Some(Exponent::Infinity));
        assert_eq!(merged.theta, Some(Real(PI)));
    }

    #[test]
    fn unknown_config_keys_rejected() {
        assert!(serde_json::from_str::<Params>(r#"{"p": 2, "bogus": 1}"#).is_err());
    }

    #[test]
    fn points_from_text_and_arrays() {
        let p: PointArg = "1,pi/2".parse().unwrap();
        assert_eq!(p.0.phi, 0.5 * PI);
        let q: PointArg = serde_json::from_str("[2, 1]").unwrap();
        assert_eq!((q.0.r, q.0.phi), (2.0, 1.0));
    }
}
