//! Vectors, norms on ℝⁿ, normalization and seeded unit-sphere sampling.
//!
//! Every other module consumes a [`NormSpec`] plus [`Vector`]s. The norm menu
//! is deliberately closed: ℓp (p ≥ 1), ℓ∞, weighted ℓp and scaled Euclidean.
//! The inner-product members of the menu are ℓ2, weighted ℓ2 and scaled
//! Euclidean.
//!
//! Comparisons elsewhere in the crate use a mixed absolute/relative
//! tolerance whose default is [`DEFAULT_TOL`].

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default mixed absolute/relative tolerance for exact relations.
pub const DEFAULT_TOL: f64 = 1e-9;

/// A finite real vector of dimension at least one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::EmptyVector);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite { context: "vector coordinate" });
        }
        Ok(Self(coords))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![0.0; dim])
    }

    /// The `i`-th standard basis vector of ℝ^dim.
    pub fn basis(dim: usize, i: usize) -> Result<Self> {
        let mut c = vec![0.0; dim];
        if i >= dim {
            return Err(Error::DimensionMismatch { expected: dim, found: i + 1 });
        }
        c[i] = 1.0;
        Self::new(c)
    }

    /// Builds a vector from values known to be finite; used on internal hot paths.
    pub(crate) fn from_finite(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Self(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn scale(&self, a: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|c| a * c).collect())
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Vector, b: f64) -> Result<Self> {
        same_dim(self, other)?;
        Self::new(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl FromStr for Vector {
    type Err = Error;

    /// Comma-separated decimals, e.g. `1,0.5,-2`.
    fn from_str(s: &str) -> Result<Self> {
        let coords = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                tok.parse::<f64>().map_err(|e| Error::Parse {
                    token: tok.to_string(),
                    reason: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(coords)
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

pub(crate) fn same_dim(u: &Vector, v: &Vector) -> Result<()> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

/// A norm on ℝⁿ drawn from the supported menu.
#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    /// `(Σ|vᵢ|ᵖ)^(1/p)`, p ≥ 1 finite.
    Lp(f64),
    /// `max |vᵢ|`.
    LInf,
    /// `(Σ wᵢ|vᵢ|ᵖ)^(1/p)` with positive weights; fixes the dimension.
    WeightedLp { p: f64, weights: Vec<f64> },
    /// `λ·‖v‖₂`.
    ScaledEuclidean(f64),
}

impl NormSpec {
    pub fn l1() -> Self {
        Self::Lp(1.0)
    }

    pub fn l2() -> Self {
        Self::Lp(2.0)
    }

    pub fn linf() -> Self {
        Self::LInf
    }

    pub fn lp(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self::Lp(p))
    }

    pub fn weighted(p: f64, weights: Vec<f64>) -> Result<Self> {
        check_p(p)?;
        if weights.is_empty() {
            return Err(Error::EmptyVector);
        }
        for &w in &weights {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "weight",
                    value: w,
                    constraint: "weights must be finite and > 0",
                });
            }
        }
        Ok(Self::WeightedLp { p, weights })
    }

    pub fn scaled_euclidean(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: scale,
                constraint: "scale must be finite and > 0",
            });
        }
        Ok(Self::ScaledEuclidean(scale))
    }

    /// True exactly for the members of the menu induced by an inner product.
    pub fn is_inner_product(&self) -> bool {
        match self {
            Self::Lp(p) => *p == 2.0,
            Self::LInf => false,
            Self::WeightedLp { p, .. } => *p == 2.0,
            Self::ScaledEuclidean(_) => true,
        }
    }

    /// Dimension fixed by the norm itself (weighted norms only).
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            Self::WeightedLp { weights, .. } => Some(weights.len()),
            _ => None,
        }
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        match self.fixed_dim() {
            Some(d) if d != dim => Err(Error::DimensionMismatch {
                expected: d,
                found: dim,
            }),
            _ => Ok(()),
        }
    }

    /// Checked norm evaluation.
    pub fn norm(&self, v: &Vector) -> Result<f64> {
        self.check_dim(v.dim())?;
        let n = self.norm_slice(v.as_slice());
        if !n.is_finite() {
            return Err(Error::NonFinite { context: "norm value" });
        }
        Ok(n)
    }

    pub(crate) fn norm_slice(&self, v: &[f64]) -> f64 {
        self.eval(v.len(), |i| v[i])
    }

    /// ‖v‖², summed directly for the inner-product members so that exact
    /// integer cases stay exact.
    pub(crate) fn norm_sq_combo(&self, a: f64, x: &[f64], b: f64, y: &[f64]) -> f64 {
        let sq = |i: usize| {
            let c = a * x[i] + b * y[i];
            c * c
        };
        match self {
            Self::Lp(p) if *p == 2.0 => (0..x.len()).map(sq).sum(),
            Self::WeightedLp { p, weights } if *p == 2.0 => {
                (0..x.len()).map(|i| weights[i] * sq(i)).sum()
            }
            Self::ScaledEuclidean(s) => s * s * (0..x.len()).map(sq).sum::<f64>(),
            _ => self.norm_combo(a, x, b, y).powi(2),
        }
    }

    /// ‖a·x + b·y‖ without allocating.
    #[inline]
    pub(crate) fn norm_combo(&self, a: f64, x: &[f64], b: f64, y: &[f64]) -> f64 {
        self.eval(x.len(), |i| a * x[i] + b * y[i])
    }

    /// Norm of the vector whose `i`-th coordinate is `coord(i)`.
    #[inline]
    pub(crate) fn eval<F: Fn(usize) -> f64>(&self, dim: usize, coord: F) -> f64 {
        match self {
            Self::LInf => (0..dim).fold(0.0_f64, |m, i| m.max(coord(i).abs())),
            Self::Lp(p) => lp_eval(*p, dim, &coord, |_| 1.0),
            Self::WeightedLp { p, weights } => lp_eval(*p, dim, &coord, |i| weights[i]),
            Self::ScaledEuclidean(s) => s * lp_eval(2.0, dim, &coord, |_| 1.0),
        }
    }

    /// `‖x + t·y‖² − ‖x‖²`, evaluated without the cancellation of the naive
    /// difference so that difference quotients stay accurate for tiny `t`.
    pub(crate) fn norm_sq_increment(&self, x: &[f64], y: &[f64], t: f64) -> f64 {
        match self {
            Self::LInf => {
                let m = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
                let mut delta = f64::NEG_INFINITY;
                for (&a, &b) in x.iter().zip(y) {
                    let h = t * b;
                    let v = a + h;
                    let d = if v == 0.0 {
                        -m
                    } else {
                        let s = v.signum();
                        (s * a - m) + s * h
                    };
                    delta = delta.max(d);
                }
                delta * (2.0 * m + delta)
            }
            Self::ScaledEuclidean(s) => {
                let inc: f64 = x
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| {
                        let h = t * b;
                        h * (2.0 * a + h)
                    })
                    .sum();
                s * s * inc
            }
            Self::Lp(p) => lp_sq_increment(*p, x, y, t, |_| 1.0),
            Self::WeightedLp { p, weights } => lp_sq_increment(*p, x, y, t, |i| weights[i]),
        }
    }

    /// The bilinear form inducing the norm, for inner-product members only.
    pub fn inner_product(&self, u: &Vector, v: &Vector) -> Result<Option<f64>> {
        same_dim(u, v)?;
        self.check_dim(u.dim())?;
        let (u, v) = (u.as_slice(), v.as_slice());
        Ok(match self {
            Self::Lp(p) if *p == 2.0 => Some(dot(u, v)),
            Self::WeightedLp { p, weights } if *p == 2.0 => Some(
                u.iter()
                    .zip(v)
                    .zip(weights)
                    .map(|((a, b), w)| w * a * b)
                    .sum(),
            ),
            Self::ScaledEuclidean(s) => Some(s * s * dot(u, v)),
            _ => None,
        })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "p",
            value: p,
            constraint: "p must be finite and >= 1",
        });
    }
    Ok(())
}

#[inline]
fn lp_eval<F, W>(p: f64, dim: usize, coord: &F, weight: W) -> f64
where
    F: Fn(usize) -> f64,
    W: Fn(usize) -> f64,
{
    if p == 1.0 {
        return (0..dim).map(|i| weight(i) * coord(i).abs()).sum();
    }
    let direct: f64 = if p == 2.0 {
        (0..dim).map(|i| weight(i) * coord(i) * coord(i)).sum()
    } else {
        (0..dim).map(|i| weight(i) * coord(i).abs().powf(p)).sum()
    };
    if direct.is_normal() && direct < 1e290 {
        return if p == 2.0 { direct.sqrt() } else { direct.powf(1.0 / p) };
    }
    if direct == 0.0 && (0..dim).all(|i| coord(i) == 0.0) {
        return 0.0;
    }
    // Rescale by the largest magnitude to dodge overflow and underflow.
    let m = (0..dim).fold(0.0_f64, |m, i| m.max(coord(i).abs()));
    let s: f64 = (0..dim)
        .map(|i| weight(i) * (coord(i).abs() / m).powf(p))
        .sum();
    m * s.powf(1.0 / p)
}

/// `|a+h|^p − |a|^p` without catastrophic cancellation.
#[inline]
fn pow_increment(p: f64, a: f64, h: f64) -> f64 {
    if a == 0.0 {
        return h.abs().powf(p);
    }
    if p == 2.0 {
        return h * (2.0 * a + h);
    }
    let r = h / a;
    if r > -1.0 {
        if p == 1.0 {
            a.signum() * h
        } else {
            a.abs().powf(p) * (p * r.ln_1p()).exp_m1()
        }
    } else {
        (a + h).abs().powf(p) - a.abs().powf(p)
    }
}

fn lp_sq_increment<W: Fn(usize) -> f64>(p: f64, x: &[f64], y: &[f64], t: f64, weight: W) -> f64 {
    let mut s0 = 0.0;
    let mut ds = 0.0;
    for (i, (&a, &b)) in x.iter().zip(y).enumerate() {
        let w = weight(i);
        s0 += w * a.abs().powf(p);
        ds += w * pow_increment(p, a, t * b);
    }
    // ‖v‖² = S^(2/p); the increment of S^(2/p) is formed through ln_1p/exp_m1.
    if p == 2.0 {
        ds
    } else if s0 == 0.0 {
        ds.max(0.0).powf(2.0 / p)
    } else if p == 1.0 {
        ds * (2.0 * s0 + ds)
    } else {
        s0.powf(2.0 / p) * ((2.0 / p) * (ds / s0).ln_1p()).exp_m1()
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Lp(p) if *p == 1.0 => f.write_str("l1"),
            Self::Lp(p) if *p == 2.0 => f.write_str("l2"),
            Self::Lp(p) => write!(f, "lp:{p}"),
            Self::LInf => f.write_str("linf"),
            Self::WeightedLp { p, weights } => {
                write!(f, "wlp:{p}:")?;
                for (i, w) in weights.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}")?;
                }
                Ok(())
            }
            Self::ScaledEuclidean(s) => write!(f, "euclid*{s}"),
        }
    }
}

impl FromStr for NormSpec {
    type Err = Error;

    /// Grammar: `l1`, `l2`, `linf`, `lp:<p>`, `wlp:<p>:<w1,w2,...>`, `euclid*<λ>`.
    fn from_str(s: &str) -> Result<Self> {
        let spec = s.trim();
        let invalid = |reason: &str| Error::InvalidNorm {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        let num = |tok: &str| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| invalid(&format!("`{tok}`: {e}")))
        };
        let wrap = |e: Error| invalid(&e.to_string());
        match spec {
            "l1" => return Ok(Self::l1()),
            "l2" => return Ok(Self::l2()),
            "linf" => return Ok(Self::LInf),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("lp:") {
            return Self::lp(num(rest)?).map_err(wrap);
        }
        if let Some(rest) = spec.strip_prefix("wlp:") {
            let (p, ws) = rest
                .split_once(':')
                .ok_or_else(|| invalid("expected wlp:<p>:<w1,w2,...>"))?;
            let weights = ws.split(',').map(num).collect::<Result<Vec<_>>>()?;
            return Self::weighted(num(p)?, weights).map_err(wrap);
        }
        if let Some(rest) = spec.strip_prefix("euclid*") {
            return Self::scaled_euclidean(num(rest)?).map_err(wrap);
        }
        Err(invalid("unknown norm"))
    }
}

impl Serialize for NormSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NormSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// ‖v‖ in `space`.
pub fn norm(space: &NormSpec, v: &Vector) -> Result<f64> {
    space.norm(v)
}

/// `v / ‖v‖`.
pub fn unit(space: &NormSpec, v: &Vector) -> Result<Vector> {
    let n = space.norm(v)?;
    if n == 0.0 {
        return Err(Error::ZeroVector { context: "unit" });
    }
    Vector::new(v.as_slice().iter().map(|c| c / n).collect())
}

/// Standard bilinear dot product.
pub fn euclid_dot(u: &Vector, v: &Vector) -> Result<f64> {
    same_dim(u, v)?;
    Ok(dot(u.as_slice(), v.as_slice()))
}

#[inline]
pub(crate) fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent per-task seed derived from a base seed (splitmix64 finalizer).
pub(crate) fn sub_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn gaussian_coords<R: rand::Rng>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        if v.iter().any(|&c| c != 0.0) {
            return v;
        }
    }
}

/// One unit vector of `space`, drawn by normalizing a standard Gaussian.
pub(crate) fn random_unit<R: rand::Rng>(space: &NormSpec, dim: usize, rng: &mut R) -> Vector {
    let g = gaussian_coords(rng, dim);
    let n = space.norm_slice(&g);
    Vector::from_finite(g.into_iter().map(|c| c / n).collect())
}

/// `count` unit vectors of `space`, deterministic per `seed`.
pub fn sample_unit_sphere(
    space: &NormSpec,
    dim: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Vector>> {
    space.check_dim(dim)?;
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            value: 0.0,
            constraint: "count >= 1",
        });
    }
    let mut rng = rng(seed);
    Ok((0..count).map(|_| random_unit(space, dim, &mut rng)).collect())
}
