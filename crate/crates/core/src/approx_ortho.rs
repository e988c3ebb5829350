//! Approximate bisectrix and isosceles orthogonality.
//!
//! Each approximate relation has the shape `A ≤ ε·B` for nonnegative norm
//! expressions `A`, `B` of the pair:
//!
//! | relation          | A                          | B                  |
//! |-------------------|----------------------------|--------------------|
//! | `≈ε_W` (ratio)    | `|n − √2·s|`               | `n + √2·s`         |
//! | `⊥ε_W` (quad)     | `|n² − 2s²|`               | `2s²`              |
//! | `≈ε_I` (ratio)    | `|‖x+y‖ − ‖x−y‖|`          | `‖x+y‖ + ‖x−y‖`    |
//! | `⊥ε_I` (quad)     | `|‖x+y‖² − ‖x−y‖²|`        | `4‖x‖‖y‖`          |
//!
//! with `n = ‖ ‖y‖x + ‖x‖y ‖` and `s = ‖x‖‖y‖`. ε itself is the only slack:
//! no extra floating tolerance is added and comparisons are non-strict.
//! [`min_epsilon`] returns the smallest double for which the same comparison
//! accepts, so the predicate is true at the returned value and false below it.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normed_space::{NormSpec, Vector};
use crate::ortho_core::{bisectrix_terms, check_pair, RelationKind};

/// A value in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..1.0).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::EpsilonOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ApproxRelationKind {
    /// `x ≈ε_W y`
    BisectrixRatio,
    /// `x ⊥ε_W y`
    BisectrixQuad,
    /// `x ≈ε_I y`
    IsoscelesRatio,
    /// `x ⊥ε_I y`
    IsoscelesQuad,
}

impl ApproxRelationKind {
    pub const ALL: [ApproxRelationKind; 4] = [
        ApproxRelationKind::BisectrixRatio,
        ApproxRelationKind::BisectrixQuad,
        ApproxRelationKind::IsoscelesRatio,
        ApproxRelationKind::IsoscelesQuad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::BisectrixRatio => "approx-w-ratio",
            Self::BisectrixQuad => "approx-w-quad",
            Self::IsoscelesRatio => "approx-i-ratio",
            Self::IsoscelesQuad => "approx-i-quad",
        }
    }
}

impl fmt::Display for ApproxRelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ApproxRelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse {
                token: s.to_string(),
                reason: "expected one of approx-w-ratio, approx-w-quad, approx-i-ratio, approx-i-quad"
                    .to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxRelation {
    pub kind: ApproxRelationKind,
    pub eps: Epsilon,
}

/// Any relation the toolkit can check: one of the six exact relations or an
/// approximate relation with its ε.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Exact(RelationKind),
    Approx(ApproxRelation),
}

impl Relation {
    /// Parses a relation name; approximate relations require `eps`.
    pub fn parse(name: &str, eps: Option<f64>) -> Result<Self> {
        if let Ok(kind) = name.parse::<RelationKind>() {
            return Ok(Self::Exact(kind));
        }
        let kind: ApproxRelationKind = name.parse().map_err(|_| Error::Parse {
            token: name.to_string(),
            reason: "unknown relation".to_string(),
        })?;
        let eps = eps.ok_or_else(|| Error::Parse {
            token: name.to_string(),
            reason: "approximate relations need an epsilon".to_string(),
        })?;
        Ok(Self::Approx(ApproxRelation {
            kind,
            eps: Epsilon::new(eps)?,
        }))
    }
}

/// `(A, B)` from the module table; relation holds iff `A ≤ ε·B`.
fn terms(space: &NormSpec, kind: ApproxRelationKind, x: &[f64], y: &[f64]) -> (f64, f64) {
    match kind {
        ApproxRelationKind::BisectrixRatio => {
            let (n, s) = bisectrix_terms(space, x, y);
            let r = SQRT_2 * s;
            ((n - r).abs(), n + r)
        }
        ApproxRelationKind::BisectrixQuad => {
            let nx = space.norm_slice(x);
            let ny = space.norm_slice(y);
            let n2 = space.norm_sq_combo(ny, x, nx, y);
            let s2 = 2.0 * (nx * nx) * (ny * ny);
            ((n2 - s2).abs(), s2)
        }
        ApproxRelationKind::IsoscelesRatio => {
            let p = space.norm_combo(1.0, x, 1.0, y);
            let m = space.norm_combo(1.0, x, -1.0, y);
            ((p - m).abs(), p + m)
        }
        ApproxRelationKind::IsoscelesQuad => {
            let p2 = space.norm_sq_combo(1.0, x, 1.0, y);
            let m2 = space.norm_sq_combo(1.0, x, -1.0, y);
            let nx = space.norm_slice(x);
            let ny = space.norm_slice(y);
            ((p2 - m2).abs(), 4.0 * nx * ny)
        }
    }
}

fn holds_raw(space: &NormSpec, kind: ApproxRelationKind, x: &[f64], y: &[f64], eps: f64) -> bool {
    let (a, b) = terms(space, kind, x, y);
    a <= eps * b
}

fn check_approx_inputs(space: &NormSpec, x: &Vector, y: &Vector, eps: f64) -> Result<()> {
    check_pair(space, x, y)?;
    Epsilon::new(eps).map(|_| ())
}

/// Generic approximate-relation check.
pub fn check_approx(space: &NormSpec, rel: ApproxRelation, x: &Vector, y: &Vector) -> Result<bool> {
    check_pair(space, x, y)?;
    Ok(holds_raw(space, rel.kind, x.as_slice(), y.as_slice(), rel.eps.value()))
}

/// `x ≈ε_W y`: `|n − √2s| ≤ ε(n + √2s)`, equivalently
/// `√2(1−ε)/(1+ε)·s ≤ n ≤ √2(1+ε)/(1−ε)·s`. Holds when either vector is zero.
pub fn approx_bisectrix_ratio(space: &NormSpec, x: &Vector, y: &Vector, eps: f64) -> Result<bool> {
    check_approx_inputs(space, x, y, eps)?;
    Ok(holds_raw(space, ApproxRelationKind::BisectrixRatio, x.as_slice(), y.as_slice(), eps))
}

/// `x ⊥ε_W y`: `|n² − 2s²| ≤ 2εs²`.
pub fn approx_bisectrix_quad(space: &NormSpec, x: &Vector, y: &Vector, eps: f64) -> Result<bool> {
    check_approx_inputs(space, x, y, eps)?;
    Ok(holds_raw(space, ApproxRelationKind::BisectrixQuad, x.as_slice(), y.as_slice(), eps))
}

/// `x ≈ε_I y`: `|‖x+y‖ − ‖x−y‖| ≤ ε(‖x+y‖ + ‖x−y‖)`.
pub fn approx_isosceles_ratio(space: &NormSpec, x: &Vector, y: &Vector, eps: f64) -> Result<bool> {
    check_approx_inputs(space, x, y, eps)?;
    Ok(holds_raw(space, ApproxRelationKind::IsoscelesRatio, x.as_slice(), y.as_slice(), eps))
}

/// `x ⊥ε_I y`: `|‖x+y‖² − ‖x−y‖²| ≤ 4ε‖x‖‖y‖`.
pub fn approx_isosceles_quad(space: &NormSpec, x: &Vector, y: &Vector, eps: f64) -> Result<bool> {
    check_approx_inputs(space, x, y, eps)?;
    Ok(holds_raw(space, ApproxRelationKind::IsoscelesQuad, x.as_slice(), y.as_slice(), eps))
}

/// Smallest ε accepting a pair; `saturated` when that ε is ≥ 1 and hence
/// outside the admissible range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinEpsilon {
    pub value: f64,
    pub saturated: bool,
}

/// Closed-form minimal ε, `A/B`, rounded up to the first double at which
/// `A ≤ ε·B` evaluates true.
pub fn min_epsilon(space: &NormSpec, x: &Vector, y: &Vector, kind: ApproxRelationKind) -> Result<MinEpsilon> {
    check_pair(space, x, y)?;
    if x.is_zero() || y.is_zero() {
        return Err(Error::ZeroVector { context: "min_epsilon" });
    }
    Ok(min_epsilon_raw(space, kind, x.as_slice(), y.as_slice()))
}

pub(crate) fn min_epsilon_raw(space: &NormSpec, kind: ApproxRelationKind, x: &[f64], y: &[f64]) -> MinEpsilon {
    let (a, b) = terms(space, kind, x, y);
    let mut e = a / b;
    while e * b < a {
        e = e.next_up();
    }
    // Several neighbouring floats can round to the same product; take the lowest.
    while e > 0.0 && e.next_down() * b >= a {
        e = e.next_down();
    }
    MinEpsilon {
        value: e,
        saturated: e >= 1.0,
    }
}

/// `16ε`: for ε < 1/16, `x ≈ε_W y` implies `x ⊥^{16ε}_W y`.
pub fn remark_conversion_bound(eps: f64) -> Result<f64> {
    if !(0.0..1.0 / 16.0).contains(&eps) {
        return Err(Error::InvalidParameter {
            name: "eps",
            value: eps,
            constraint: "0 <= eps < 1/16",
        });
    }
    Ok(16.0 * eps)
}

/// Exact cosine band of `≈ε_W` in an inner-product space:
/// `[−4ε/(1+ε)², 4ε/(1−ε)²]`.
///
/// Expanding `‖x̂+ŷ‖² = 2 + 2cos` against the squared ratio bounds gives this
/// asymmetric interval. The symmetric condition `|cos| ≤ 4ε/(1−ε)²` is implied
/// by membership but does not imply it.
pub fn ip_cos_band(eps: f64) -> Result<(f64, f64)> {
    let e = Epsilon::new(eps)?.value();
    Ok((-4.0 * e / ((1.0 + e) * (1.0 + e)), 4.0 * e / ((1.0 - e) * (1.0 - e))))
}

/// Cosine band of `⊥ε_W` in an inner-product space: `[−ε, ε]`.
pub fn ip_cos_band_quad(eps: f64) -> Result<(f64, f64)> {
    let e = Epsilon::new(eps)?.value();
    Ok((-e, e))
}

/// Reverse triangle sandwich for nonzero `x`, `y`:
/// `‖x‖+‖y‖+(‖x̂+ŷ‖−2)·max ≤ ‖x+y‖ ≤ ‖x‖+‖y‖+(‖x̂+ŷ‖−2)·min`,
/// with max/min taken over `{‖x‖, ‖y‖}`. Returns `(lower, upper)`.
pub fn reverse_triangle_bounds(space: &NormSpec, x: &Vector, y: &Vector) -> Result<(f64, f64)> {
    check_pair(space, x, y)?;
    let nx = space.norm_slice(x.as_slice());
    let ny = space.norm_slice(y.as_slice());
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::ZeroVector { context: "reverse_triangle_bounds" });
    }
    let hat_sum = space.norm_combo(1.0 / nx, x.as_slice(), 1.0 / ny, y.as_slice());
    let base = nx + ny;
    Ok((base + (hat_sum - 2.0) * nx.max(ny), base + (hat_sum - 2.0) * nx.min(ny)))
}
