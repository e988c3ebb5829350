//! Linear maps between normed spaces: operator norm and minimum modulus,
//! approximate-similarity fits, the preservation bound θ and Monte-Carlo
//! checks of approximate bisectrix-orthogonality preservation.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx_ortho::{min_epsilon_raw, ApproxRelationKind};
use crate::error::{Error, Result};
use crate::normed_space::{gaussian_coords, random_unit, rng, sub_seed, NormSpec, Vector};
use crate::search::sample_approx_orthogonal_pair;

/// Sphere samples used when a caller does not choose a budget.
pub const DEFAULT_BUDGET: usize = 2000;

/// Seed used by the convenience wrappers that estimate bounds internally.
pub const DEFAULT_SEED: u64 = 0x5eed;

/// Number of best samples that are polished.
const POLISH_STARTS: usize = 8;

/// Relative residual above which [`theta`] reports an identity failure.
pub const THETA_IDENTITY_LIMIT: f64 = 1e-12;

/// Witnesses kept by a [`VerificationReport`].
pub const MAX_WITNESSES: usize = 10;

/// A real `rows × cols` matrix acting from `domain` (dimension `cols`) to
/// `codomain` (dimension `rows`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapRepr", into = "MapRepr")]
pub struct LinearMapSpec {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    domain: NormSpec,
    codomain: NormSpec,
}

#[derive(Serialize, Deserialize)]
struct MapRepr {
    matrix: Vec<Vec<f64>>,
    domain: NormSpec,
    codomain: NormSpec,
}

impl TryFrom<MapRepr> for LinearMapSpec {
    type Error = Error;

    fn try_from(r: MapRepr) -> Result<Self> {
        LinearMapSpec::new(r.matrix, r.domain, r.codomain)
    }
}

impl From<LinearMapSpec> for MapRepr {
    fn from(m: LinearMapSpec) -> Self {
        MapRepr {
            matrix: m.row_vecs(),
            domain: m.domain,
            codomain: m.codomain,
        }
    }
}

impl LinearMapSpec {
    pub fn new(matrix: Vec<Vec<f64>>, domain: NormSpec, codomain: NormSpec) -> Result<Self> {
        let rows = matrix.len();
        let cols = matrix.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyVector);
        }
        if let Some(r) = matrix.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: r.len(),
            });
        }
        let data: Vec<f64> = matrix.into_iter().flatten().collect();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "matrix entry" });
        }
        domain.check_dim(cols)?;
        codomain.check_dim(rows)?;
        Ok(Self {
            rows,
            cols,
            data,
            domain,
            codomain,
        })
    }

    /// Parses `2,0;0,3` (rows separated by `;`, entries by `,`).
    pub fn parse(matrix: &str, domain: NormSpec, codomain: NormSpec) -> Result<Self> {
        let rows = matrix
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|t| {
                        let t = t.trim();
                        t.parse::<f64>().map_err(|e| Error::Parse {
                            token: t.to_string(),
                            reason: e.to_string(),
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, domain, codomain)
    }

    /// `scale` times the identity on `space` in dimension `dim`.
    pub fn scaled_identity(dim: usize, scale: f64, space: NormSpec) -> Result<Self> {
        let m = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { scale } else { 0.0 }).collect())
            .collect();
        Self::new(m, space.clone(), space)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn domain(&self) -> &NormSpec {
        &self.domain
    }

    pub fn codomain(&self) -> &NormSpec {
        &self.codomain
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn row_vecs(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    /// `Tx`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        if x.dim() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: x.dim(),
            });
        }
        Ok(Vector::from_finite(self.apply_raw(x.as_slice())))
    }

    pub(crate) fn apply_raw(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Same spaces, matrix `self − other`.
    pub fn sub(&self, other: &LinearMapSpec) -> Result<Self> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                found: other.rows * other.cols,
            });
        }
        Ok(Self {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
            ..self.clone()
        })
    }

    fn with_data(&self, data: Vec<f64>) -> Self {
        Self { data, ..self.clone() }
    }

    fn ratio(&self, x: &[f64]) -> f64 {
        self.codomain.norm_slice(&self.apply_raw(x)) / self.domain.norm_slice(x)
    }

    fn nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(Error::ZeroMap)
        } else {
            Ok(())
        }
    }
}

impl fmt::Display for LinearMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.data.chunks(self.cols).enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundMethod {
    ClosedForm,
    SampledPolished,
}

impl fmt::Display for BoundMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed_form",
            Self::SampledPolished => "sampled_polished",
        })
    }
}

/// One extreme value of `‖Tx‖` over the unit sphere, with the unit vector
/// attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    pub witness: Vector,
    pub method: BoundMethod,
    /// Final polish step size; zero for closed forms.
    pub certified_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorBounds {
    /// `‖T‖ = sup{‖Tx‖ : ‖x‖ = 1}`.
    pub op_norm: Bound,
    /// `[T] = inf{‖Tx‖ : ‖x‖ = 1}`.
    pub min_modulus: Bound,
}

/// Diagonal `D` with `‖v‖ = ‖Dv‖₂`, for the inner-product members of the menu.
fn euclid_weights(space: &NormSpec, dim: usize) -> Option<Vec<f64>> {
    match space {
        NormSpec::Lp(p) if *p == 2.0 => Some(vec![1.0; dim]),
        NormSpec::ScaledEuclidean(s) => Some(vec![*s; dim]),
        NormSpec::WeightedLp { p, weights } if *p == 2.0 => Some(weights.iter().map(|w| w.sqrt()).collect()),
        _ => None,
    }
}

fn unit_in(space: &NormSpec, v: Vec<f64>) -> Vector {
    let n = space.norm_slice(&v);
    Vector::from_finite(v.into_iter().map(|c| c / n).collect())
}

/// Right singular vectors and singular values of `D_c T D_d⁻¹`, padded with
/// zero rows so that a kernel vector is available when `rows < cols`.
struct Svd {
    values: Vec<f64>,
    right: DMatrix<f64>,
}

fn weighted_svd(t: &LinearMapSpec, dw: &[f64], cw: &[f64]) -> Svd {
    let n = t.cols;
    let m = t.rows.max(n);
    let b = DMatrix::from_fn(m, n, |i, j| if i < t.rows { cw[i] * t.entry(i, j) / dw[j] } else { 0.0 });
    let svd = b.svd(false, true);
    let right = svd.v_t.expect("requested").transpose();
    Svd {
        values: svd.singular_values.iter().copied().collect(),
        right,
    }
}

fn closed_from_svd(t: &LinearMapSpec, svd: &Svd, dw: &[f64], want_max: bool) -> Bound {
    let pick = svd
        .values
        .iter()
        .enumerate()
        .reduce(|a, b| if (b.1 > a.1) == want_max && b.1 != a.1 { b } else { a })
        .map(|(i, _)| i)
        .expect("nonempty");
    let v: Vec<f64> = (0..t.cols).map(|j| svd.right[(j, pick)] / dw[j]).collect();
    let mut value = svd.values[pick];
    if !want_max && t.rows < t.cols {
        value = 0.0;
    }
    Bound {
        value,
        witness: unit_in(&t.domain, v),
        method: BoundMethod::ClosedForm,
        certified_gap: 0.0,
    }
}

/// Closed-form `‖T‖` when an induced-norm formula is known.
fn closed_op_norm(t: &LinearMapSpec) -> Option<Bound> {
    if let (Some(dw), Some(cw)) = (euclid_weights(&t.domain, t.cols), euclid_weights(&t.codomain, t.rows)) {
        return Some(closed_from_svd(t, &weighted_svd(t, &dw, &cw), &dw, true));
    }
    match (&t.domain, &t.codomain) {
        (NormSpec::LInf, NormSpec::LInf) => {
            let (i, value) = (0..t.rows)
                .map(|i| (i, (0..t.cols).map(|j| t.entry(i, j).abs()).sum::<f64>()))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let w = (0..t.cols).map(|j| if t.entry(i, j) < 0.0 { -1.0 } else { 1.0 }).collect();
            Some(Bound {
                value,
                witness: Vector::from_finite(w),
                method: BoundMethod::ClosedForm,
                certified_gap: 0.0,
            })
        }
        (NormSpec::Lp(p), NormSpec::Lp(q)) if *p == 1.0 && *q == 1.0 => {
            let (j, value) = (0..t.cols)
                .map(|j| (j, (0..t.rows).map(|i| t.entry(i, j).abs()).sum::<f64>()))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let mut w = vec![0.0; t.cols];
            w[j] = 1.0;
            Some(Bound {
                value,
                witness: Vector::from_finite(w),
                method: BoundMethod::ClosedForm,
                certified_gap: 0.0,
            })
        }
        _ => None,
    }
}

/// Closed-form `[T]`: inner-product pairs, or any pair when `T` has a kernel
/// because it maps into a lower dimension.
fn closed_min_modulus(t: &LinearMapSpec) -> Option<Bound> {
    let dw = euclid_weights(&t.domain, t.cols);
    let cw = euclid_weights(&t.codomain, t.rows);
    match (dw, cw) {
        (Some(dw), Some(cw)) => Some(closed_from_svd(t, &weighted_svd(t, &dw, &cw), &dw, false)),
        _ if t.rows < t.cols => {
            let ones = vec![1.0; t.cols];
            let svd = weighted_svd(t, &ones, &vec![1.0; t.rows]);
            let b = closed_from_svd(t, &svd, &ones, false);
            Some(Bound {
                witness: unit_in(&t.domain, b.witness.into_inner()),
                ..b
            })
        }
        _ => None,
    }
}

/// Multi-start sampling followed by coordinate polish on the unit sphere.
///
/// `budget` random unit vectors and the basis vectors are scored; the best
/// [`POLISH_STARTS`] are polished by trying `±h` moves along each coordinate
/// (re-normalizing after each step), halving `h` whenever a sweep improves the
/// objective by less than `1e−10` relative, until `h < 1e−10`.
fn sampled(t: &LinearMapSpec, maximize: bool, budget: usize, seed: u64) -> Bound {
    let sign = if maximize { -1.0 } else { 1.0 };
    let objective = |x: &[f64]| sign * t.ratio(x);
    let mut r = rng(seed);
    let mut starts: Vec<Vec<f64>> = (0..budget).map(|_| random_unit(&t.domain, t.cols, &mut r).into_inner()).collect();
    starts.extend((0..t.cols).map(|j| {
        let mut e = vec![0.0; t.cols];
        e[j] = 1.0;
        e
    }));
    let mut scored: Vec<(f64, Vec<f64>)> = starts.into_iter().map(|x| (objective(&x), x)).collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.truncate(POLISH_STARTS);
    let (value, x, gap) = scored
        .into_par_iter()
        .map(|(f, x)| polish(&t.domain, &objective, x, f))
        .reduce_with(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one start");
    Bound {
        value: sign * value,
        witness: unit_in(&t.domain, x),
        method: BoundMethod::SampledPolished,
        certified_gap: gap,
    }
}

fn polish<F: Fn(&[f64]) -> f64>(space: &NormSpec, objective: &F, mut x: Vec<f64>, mut f: f64) -> (f64, Vec<f64>, f64) {
    let mut h = 0.1;
    let mut rounds = 0;
    while h >= 1e-10 && rounds < 100_000 {
        rounds += 1;
        let start = f;
        for i in 0..x.len() {
            for step in [h, -h] {
                let mut y = x.clone();
                y[i] += step;
                let n = space.norm_slice(&y);
                if n == 0.0 {
                    continue;
                }
                y.iter_mut().for_each(|c| *c /= n);
                let fy = objective(&y);
                if fy < f {
                    x = y;
                    f = fy;
                }
            }
        }
        if start - f <= 1e-10 * start.abs() {
            h *= 0.5;
        }
    }
    (f, x, h)
}

fn check_budget(budget: usize) -> Result<()> {
    if budget == 0 {
        return Err(Error::InvalidParameter {
            name: "budget",
            value: 0.0,
            constraint: "budget >= 1",
        });
    }
    Ok(())
}

/// `‖T‖` and `[T]`, each by closed form where one is known and otherwise by
/// [`sampled`] search with `budget` starting samples.
pub fn operator_bounds(t: &LinearMapSpec, budget: usize, seed: u64) -> Result<OperatorBounds> {
    t.nonzero()?;
    check_budget(budget)?;
    let op_norm = closed_op_norm(t).unwrap_or_else(|| sampled(t, true, budget, seed));
    let min_modulus = closed_min_modulus(t).unwrap_or_else(|| sampled(t, false, budget, sub_seed(seed, 1)));
    Ok(OperatorBounds { op_norm, min_modulus })
}

/// As [`operator_bounds`] but always sampled, for cross-checking closed forms.
pub fn operator_bounds_sampled(t: &LinearMapSpec, budget: usize, seed: u64) -> Result<OperatorBounds> {
    t.nonzero()?;
    check_budget(budget)?;
    Ok(OperatorBounds {
        op_norm: sampled(t, true, budget, seed),
        min_modulus: sampled(t, false, budget, sub_seed(seed, 1)),
    })
}

/// Outcome of [`theta`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaBound {
    pub value: f64,
    /// `θ ≥ 1` or `(1−φ₁) − ε(1+φ₂) ≤ 0`: the bound carries no information.
    pub vacuous: bool,
    /// Residual of `(1+θ)/(1−θ)·((1−φ₁)−ε(1+φ₂))(1−δ) = (1+ε)(1+φ₂)(1+δ)` in the
    /// numerator/denominator form checked by [`theta`], relative to the
    /// denominator; zero when vacuous.
    pub identity_residual: f64,
}

fn unit_interval(name: &'static str, v: f64) -> Result<()> {
    if (0.0..1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v,
            constraint: "value must lie in [0, 1)",
        })
    }
}

fn check_theta_args(delta: f64, eps: f64, phi1: f64, phi2: f64) -> Result<()> {
    unit_interval("delta", delta)?;
    unit_interval("eps", eps)?;
    unit_interval("phi1", phi1)?;
    if !(phi2.is_finite() && phi2 >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "phi2",
            value: phi2,
            constraint: "phi2 must be finite and >= 0",
        });
    }
    Ok(())
}

/// Relative residual of the θ identity evaluated at `theta`. Near `θ = 1`
/// this grows like `ulp(θ)/(1−θ)` even for a correctly rounded `θ`.
pub fn theta_identity_residual(theta: f64, delta: f64, eps: f64, phi1: f64, phi2: f64) -> f64 {
    let lhs = (1.0 + theta) / (1.0 - theta) * ((1.0 - phi1) - eps * (1.0 + phi2)) * (1.0 - delta);
    let rhs = (1.0 + eps) * (1.0 + phi2) * (1.0 + delta);
    (lhs - rhs).abs() / rhs
}

/// Checks `θ = num/den` through `den + num = 2(1+δ)(1+ε)(1+φ₂)` and
/// `den − num = 2(1−δ)((1−φ₁)−ε(1+φ₂))`, i.e. the identity with `(1+θ)/(1−θ)`
/// written as `(den+num)/(den−num)`. Both residuals are measured against
/// `den`, so the check does not degrade as `θ → 1`.
fn finish_theta(num: f64, den: f64, delta: f64, eps: f64, phi1: f64, phi2: f64) -> Result<ThetaBound> {
    let k = (1.0 - phi1) - eps * (1.0 + phi2);
    let value = num / den;
    let vacuous = value >= 1.0 || k <= 0.0;
    let identity_residual = if vacuous {
        0.0
    } else {
        let sum = 2.0 * (1.0 + delta) * (1.0 + eps) * (1.0 + phi2);
        let diff = 2.0 * (1.0 - delta) * k;
        (den + num - sum).abs().max((den - num - diff).abs()) / den
    };
    if identity_residual > THETA_IDENTITY_LIMIT {
        return Err(Error::IdentityMismatch {
            residual: identity_residual,
            limit: THETA_IDENTITY_LIMIT,
        });
    }
    Ok(ThetaBound {
        value,
        vacuous,
        identity_residual,
    })
}

/// `θ = (2δ + 2ε + (1−δ)φ₁ + (1+δ+2ε)φ₂) / (2 + 2δε − (1−δ)φ₁ + (1+δ+2δε)φ₂)`.
pub fn theta(delta: f64, eps: f64, phi1: f64, phi2: f64) -> Result<ThetaBound> {
    check_theta_args(delta, eps, phi1, phi2)?;
    let num = 2.0 * delta + 2.0 * eps + (1.0 - delta) * phi1 + (1.0 + delta + 2.0 * eps) * phi2;
    let den = 2.0 + 2.0 * delta * eps - (1.0 - delta) * phi1 + (1.0 + delta + 2.0 * delta * eps) * phi2;
    finish_theta(num, den, delta, eps, phi1, phi2)
}

/// `θ = (2δ + (1−δ)φ₁ + (1+δ)φ₂) / (2 − (1−δ)φ₁ + (1+δ)φ₂)`, the case `ε = 0`
/// of [`theta`]. Evaluated in the same order so the two agree bit for bit.
pub fn corollary_theta(delta: f64, phi1: f64, phi2: f64) -> Result<ThetaBound> {
    check_theta_args(delta, 0.0, phi1, phi2)?;
    let num = 2.0 * delta + (1.0 - delta) * phi1 + (1.0 + delta) * phi2;
    let den = 2.0 - (1.0 - delta) * phi1 + (1.0 + delta) * phi2;
    finish_theta(num, den, delta, 0.0, phi1, phi2)
}

/// Scalar form of the uniform hypothesis
/// `(1+δ)/(1−δ)·‖Tz‖‖u‖ ≤ (1+ε)/(1−ε)·‖Tu‖‖z‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub holds: bool,
    /// `(1+ε)/(1−ε)·[T] − (1+δ)/(1−δ)·‖T‖`.
    pub margin: f64,
}

/// The hypothesis reduced to `(1+δ)/(1−δ)·‖T‖ ≤ (1+ε)/(1−ε)·[T]`.
pub fn preservation_hypothesis_from_bounds(b: &OperatorBounds, delta: f64, eps: f64) -> Result<HypothesisCheck> {
    unit_interval("delta", delta)?;
    unit_interval("eps", eps)?;
    let lhs = (1.0 + delta) / (1.0 - delta) * b.op_norm.value;
    let rhs = (1.0 + eps) / (1.0 - eps) * b.min_modulus.value;
    Ok(HypothesisCheck {
        holds: lhs <= rhs,
        margin: rhs - lhs,
    })
}

/// [`preservation_hypothesis_from_bounds`] with bounds from [`operator_bounds`].
pub fn preservation_hypothesis_holds(t: &LinearMapSpec, delta: f64, eps: f64) -> Result<HypothesisCheck> {
    let b = operator_bounds(t, DEFAULT_BUDGET, DEFAULT_SEED)?;
    preservation_hypothesis_from_bounds(&b, delta, eps)
}

/// `[(1−δ)/(1+δ)·[T], (1+δ)/(1−δ)·‖T‖]`.
pub fn gamma_band_from_bounds(b: &OperatorBounds, delta: f64) -> Result<(f64, f64)> {
    unit_interval("delta", delta)?;
    Ok((
        (1.0 - delta) / (1.0 + delta) * b.min_modulus.value,
        (1.0 + delta) / (1.0 - delta) * b.op_norm.value,
    ))
}

pub fn lemma1_gamma_band(t: &LinearMapSpec, delta: f64) -> Result<(f64, f64)> {
    let b = operator_bounds(t, DEFAULT_BUDGET, DEFAULT_SEED)?;
    gamma_band_from_bounds(&b, delta)
}

/// Whether `(1−ε)/(1+ε)·γ‖x‖ ≤ ‖Tx‖ ≤ (1+ε)/(1−ε)·γ‖x‖` holds for all `x`
/// at both ends `γ` of the band, i.e. `(1−ε)/(1+ε)·γ ≤ [T]` and
/// `‖T‖ ≤ (1+ε)/(1−ε)·γ` for each.
pub fn sandwich_at_band_ends(b: &OperatorBounds, delta: f64, eps: f64) -> Result<bool> {
    let (lo, hi) = gamma_band_from_bounds(b, delta)?;
    unit_interval("eps", eps)?;
    let down = (1.0 - eps) / (1.0 + eps);
    let up = (1.0 + eps) / (1.0 - eps);
    Ok([lo, hi]
        .iter()
        .all(|&g| down * g <= b.min_modulus.value && b.op_norm.value <= up * g))
}

/// `λ(1−φ₁)‖w‖ ≤ ‖Uw‖ ≤ λ(1+φ₂)‖w‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityParams {
    pub lambda: f64,
    pub phi1: f64,
    pub phi2: f64,
}

/// `λ = √(‖U‖·[U])`, `φ₁ = 1 − [U]/λ`, `φ₂ = ‖U‖/λ − 1` (both clamped at 0
/// against rounding).
pub fn fit_similarity_from_bounds(b: &OperatorBounds) -> Result<SimilarityParams> {
    let (hi, lo) = (b.op_norm.value, b.min_modulus.value);
    if hi == 0.0 {
        return Err(Error::ZeroMap);
    }
    if lo <= 0.0 {
        return Err(Error::NotSimilarityCandidate);
    }
    let lambda = (hi * lo).sqrt();
    Ok(SimilarityParams {
        lambda,
        phi1: (1.0 - lo / lambda).max(0.0),
        phi2: (hi / lambda - 1.0).max(0.0),
    })
}

pub fn fit_similarity(u: &LinearMapSpec) -> Result<SimilarityParams> {
    fit_similarity_from_bounds(&operator_bounds(u, DEFAULT_BUDGET, DEFAULT_SEED)?)
}

/// A uniformly random rotation of ℝⁿ (Haar measure on SO(n)), as rows.
pub fn random_rotation(dim: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if dim == 0 {
        return Err(Error::EmptyVector);
    }
    let mut r = rng(seed);
    let g = DMatrix::from_column_slice(dim, dim, &gaussian_coords(&mut r, dim * dim));
    let qr = g.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..dim {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    Ok((0..dim).map(|i| (0..dim).map(|j| q[(i, j)]).collect()).collect())
}

/// `T = U + E` with `‖E‖ = ε′‖U‖` for `ε′` drawn uniformly from `[0, ε]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub map: LinearMapSpec,
    /// The drawn `ε′`.
    pub drawn_ratio: f64,
    /// `‖T − U‖ / ‖U‖` as measured by [`operator_bounds`].
    pub achieved_ratio: f64,
}

/// Upper bound `Σⱼ ‖Eeⱼ‖/‖eⱼ‖` on `‖E‖`, valid for every norm in the menu
/// since each satisfies `|xⱼ|·‖eⱼ‖ ≤ ‖x‖`.
fn column_bound(e: &LinearMapSpec) -> f64 {
    (0..e.cols)
        .map(|j| {
            let mut b = vec![0.0; e.cols];
            b[j] = 1.0;
            e.ratio(&b)
        })
        .sum()
}

pub fn perturb_similarity(u: &LinearMapSpec, eps: f64, seed: u64) -> Result<Perturbation> {
    unit_interval("eps", eps)?;
    let ub = operator_bounds(u, DEFAULT_BUDGET, DEFAULT_SEED)?;
    if eps == 0.0 {
        return Ok(Perturbation {
            map: u.clone(),
            drawn_ratio: 0.0,
            achieved_ratio: 0.0,
        });
    }
    let mut r = rng(seed);
    let drawn = eps * r.random::<f64>();
    let e = u.with_data(gaussian_coords(&mut r, u.rows * u.cols));
    // Closed forms are exact; otherwise scale by an upper bound so the
    // requested ratio is never exceeded.
    let en = match closed_op_norm(&e) {
        Some(b) => b.value,
        None => column_bound(&e),
    };
    let k = drawn * ub.op_norm.value / en;
    let t = u.with_data(u.data.iter().zip(&e.data).map(|(a, b)| a + k * b).collect());
    let diff = t.sub(u)?;
    let achieved = if diff.is_zero() {
        0.0
    } else {
        operator_bounds(&diff, DEFAULT_BUDGET, DEFAULT_SEED)?.op_norm.value / ub.op_norm.value
    };
    Ok(Perturbation {
        map: t,
        drawn_ratio: drawn,
        achieved_ratio: achieved,
    })
}

/// A sampled pair whose image violated the target bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairWitness {
    pub trial: usize,
    pub x: Vector,
    pub y: Vector,
    /// Minimal ε accepting `(Tx, Ty)` for `≈ε_W`.
    pub image_min_epsilon: f64,
}

/// Monte-Carlo evidence for `x ≈δ_W y ⟹ Tx ≈θ_W Ty`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub trials: usize,
    /// Pairs whose image needs `ε > θ + tolerance`.
    pub violations: usize,
    /// Pairs with `Tx = 0` or `Ty = 0`, where the conclusion holds trivially;
    /// counted in `trials` but not evaluated.
    pub zero_images: usize,
    /// Largest `ε*(Tx, Ty) − θ` over evaluated pairs.
    pub worst_defect: Option<f64>,
    pub theta_target: f64,
    pub tolerance: f64,
    /// The lowest-index violating pairs, at most [`MAX_WITNESSES`].
    pub witnesses: Vec<PairWitness>,
    pub flags: Vec<String>,
}

impl VerificationReport {
    fn empty(theta_target: f64, tolerance: f64) -> Self {
        Self {
            trials: 0,
            violations: 0,
            zero_images: 0,
            worst_defect: None,
            theta_target,
            tolerance,
            witnesses: Vec::new(),
            flags: Vec::new(),
        }
    }

    /// Combines two reports over disjoint trials. Associative and commutative.
    pub fn merge(mut self, other: Self) -> Self {
        self.trials += other.trials;
        self.violations += other.violations;
        self.zero_images += other.zero_images;
        self.worst_defect = match (self.worst_defect, other.worst_defect) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        self.witnesses.extend(other.witnesses);
        self.witnesses.sort_by_key(|w| w.trial);
        self.witnesses.truncate(MAX_WITNESSES);
        self.flags.extend(other.flags);
        self.flags.sort();
        self.flags.dedup();
        self
    }
}

/// Samples `trials` pairs with `x ≈δ_W y` and checks `Tx ≈θ_W Ty` in the
/// codomain. A pair counts as a violation when the minimal ε of its image
/// exceeds `θ` by more than `tol`, which absorbs the rounding of `Tx`, `Ty`.
pub fn verify_preservation(
    t: &LinearMapSpec,
    delta: f64,
    theta_target: f64,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<VerificationReport> {
    unit_interval("delta", delta)?;
    unit_interval("theta", theta_target)?;
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            value: 0.0,
            constraint: "trials >= 1",
        });
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            constraint: "tol must be finite and >= 0",
        });
    }
    t.nonzero()?;
    let empty = || VerificationReport::empty(theta_target, tol);
    let mut report = (0..trials)
        .into_par_iter()
        .try_fold(empty, |mut acc, i| -> Result<VerificationReport> {
            let (x, y) = sample_approx_orthogonal_pair(&t.domain, t.cols, delta, sub_seed(seed, i as u64))?;
            acc.trials += 1;
            let tx = t.apply_raw(x.as_slice());
            let ty = t.apply_raw(y.as_slice());
            if t.codomain.norm_slice(&tx) == 0.0 || t.codomain.norm_slice(&ty) == 0.0 {
                acc.zero_images += 1;
                return Ok(acc);
            }
            let m = min_epsilon_raw(&t.codomain, ApproxRelationKind::BisectrixRatio, &tx, &ty).value;
            let d = m - theta_target;
            acc.worst_defect = Some(acc.worst_defect.map_or(d, |w| w.max(d)));
            if d > tol {
                acc.violations += 1;
                if acc.witnesses.len() < MAX_WITNESSES {
                    acc.witnesses.push(PairWitness {
                        trial: i,
                        x,
                        y,
                        image_min_epsilon: m,
                    });
                }
            }
            Ok(acc)
        })
        .try_reduce(empty, |a, b| Ok(a.merge(b)))?;
    if report.zero_images > 0 {
        report.flags.push("zero_images".to_string());
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx_ortho::approx_bisectrix_ratio;

    fn l2map(m: &str) -> LinearMapSpec {
        LinearMapSpec::parse(m, NormSpec::l2(), NormSpec::l2()).unwrap()
    }

    fn bounds(t: &LinearMapSpec) -> OperatorBounds {
        operator_bounds(t, 500, 1).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let t = l2map("2, 0; 0,3");
        assert_eq!(t.to_string(), "2,0;0,3");
        assert_eq!((t.rows(), t.cols()), (2, 2));
        assert!(LinearMapSpec::parse("1,2;3", NormSpec::l2(), NormSpec::l2()).is_err());
        assert!(LinearMapSpec::parse("1,x", NormSpec::l2(), NormSpec::l2()).is_err());
        assert_eq!(t.row_vecs(), vec![vec![2.0, 0.0], vec![0.0, 3.0]]);
    }

    #[test]
    fn diagonal_and_shear() {
        let b = bounds(&l2map("2,0;0,3"));
        assert_eq!(b.op_norm.value, 3.0);
        assert_eq!(b.min_modulus.value, 2.0);
        assert_eq!(b.op_norm.method, BoundMethod::ClosedForm);
        let s = bounds(&l2map("1,1;0,1"));
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((s.op_norm.value - golden).abs() < 1e-12);
        assert!((s.min_modulus.value - (golden - 1.0)).abs() < 1e-12);
        for b in [&s.op_norm, &s.min_modulus] {
            let t = l2map("1,1;0,1");
            assert!((NormSpec::l2().norm(&b.witness).unwrap() - 1.0).abs() < 1e-12);
            assert!((NormSpec::l2().norm(&t.apply(&b.witness).unwrap()).unwrap() - b.value).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_in_every_norm() {
        for space in [NormSpec::l1(), NormSpec::linf(), NormSpec::lp(3.0).unwrap(), NormSpec::l2()] {
            let t = LinearMapSpec::scaled_identity(3, 1.0, space).unwrap();
            let b = bounds(&t);
            assert!((b.op_norm.value - 1.0).abs() < 1e-12);
            assert!((b.min_modulus.value - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn wide_map_has_zero_min_modulus() {
        let t = LinearMapSpec::parse("1,2,3;0,1,1", NormSpec::linf(), NormSpec::l1()).unwrap();
        let b = bounds(&t);
        assert_eq!(b.min_modulus.value, 0.0);
        let image = t.apply(&b.min_modulus.witness).unwrap();
        assert!(NormSpec::l1().norm(&image).unwrap() < 1e-12);
    }

    #[test]
    fn weighted_closed_form_matches_sampling() {
        let w = NormSpec::weighted(2.0, vec![1.0, 4.0]).unwrap();
        let t = LinearMapSpec::parse("1,1;0,1", w.clone(), w).unwrap();
        let c = bounds(&t);
        let s = operator_bounds_sampled(&t, 500, 3).unwrap();
        assert!(s.op_norm.value <= c.op_norm.value * (1.0 + 1e-12));
        assert!(c.op_norm.value - s.op_norm.value < 1e-6);
        assert!(s.min_modulus.value >= c.min_modulus.value * (1.0 - 1e-12));
        assert!(s.min_modulus.value - c.min_modulus.value < 1e-6);
    }

    #[test]
    fn zero_map_rejected() {
        let t = l2map("0,0;0,0");
        assert_eq!(operator_bounds(&t, 10, 0), Err(Error::ZeroMap));
        assert!(operator_bounds(&l2map("1,0;0,1"), 0, 0).is_err());
    }

    #[test]
    fn theta_examples() {
        assert_eq!(theta(0.0, 0.0, 0.0, 0.0).unwrap().value, 0.0);
        assert_eq!(theta(0.1, 0.0, 0.0, 0.0).unwrap().value, 0.1);
        let t = theta(0.0, 0.3, 0.0, 0.0).unwrap().value;
        assert!((t - 0.3).abs() < 1e-15);
        assert!(((1.0 + t) / (1.0 - t) - 1.3 / 0.7).abs() < 1e-12);
        assert_eq!(
            corollary_theta(0.2, 0.01, 0.01).unwrap().value.to_bits(),
            theta(0.2, 0.0, 0.01, 0.01).unwrap().value.to_bits()
        );
        assert!(theta(0.5, 0.5, 0.5, 0.5).unwrap().vacuous);
        assert!(theta(1.0, 0.0, 0.0, 0.0).is_err());
        assert!(theta(0.0, 0.0, 0.0, -0.1).is_err());
    }

    #[test]
    fn theta_near_one_is_accepted() {
        for delta in [0.999_999, 0.999_999_9, 1.0 - 1e-12] {
            let t = theta(delta, 0.0, 0.0, 0.0).unwrap();
            assert!(!t.vacuous && t.identity_residual <= 1e-15);
            assert_eq!(t.value, delta);
        }
        let t = theta(0.5, 0.3, 0.69, 0.0).unwrap();
        assert!(t.value < 1.0 && t.value > 0.99);
    }

    #[test]
    fn hypothesis_examples() {
        let id = LinearMapSpec::scaled_identity(2, 1.0, NormSpec::l2()).unwrap();
        let h = preservation_hypothesis_holds(&id, 0.2, 0.2).unwrap();
        assert!(h.holds);
        assert_eq!(h.margin, 0.0);
        assert!(!preservation_hypothesis_holds(&l2map("1,0;0,2"), 0.0, 0.2).unwrap().holds);
        assert!(preservation_hypothesis_holds(&l2map("1,0;0,1.1"), 0.0, 0.1).unwrap().holds);
    }

    #[test]
    fn gamma_band_examples() {
        let id = LinearMapSpec::scaled_identity(2, 1.0, NormSpec::l2()).unwrap();
        assert_eq!(lemma1_gamma_band(&id, 0.0).unwrap(), (1.0, 1.0));
        assert_eq!(lemma1_gamma_band(&l2map("2,0;0,3"), 0.0).unwrap(), (2.0, 3.0));
        let (lo, hi) = lemma1_gamma_band(&l2map("2,0;0,3"), 1.0 / 3.0).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 6.0).abs() < 1e-14);
    }

    #[test]
    fn similarity_fits() {
        let rot = random_rotation(3, 4).unwrap();
        let u = LinearMapSpec::new(rot.clone(), NormSpec::l2(), NormSpec::l2()).unwrap();
        let p = fit_similarity(&u).unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-12 && p.phi1 < 1e-12 && p.phi2 < 1e-12);
        let u3 = LinearMapSpec::new(rot.iter().map(|r| r.iter().map(|v| 3.0 * v).collect()).collect(), NormSpec::l2(), NormSpec::l2()).unwrap();
        let p = fit_similarity(&u3).unwrap();
        assert!((p.lambda - 3.0).abs() < 1e-12 && p.phi1 < 1e-12 && p.phi2 < 1e-12);
        let p = fit_similarity(&l2map("2,0;0,2.2")).unwrap();
        assert!((p.lambda - 4.4f64.sqrt()).abs() < 1e-12);
        assert!((p.phi1 - (1.0 - 2.0 / 4.4f64.sqrt())).abs() < 1e-12);
        assert!((p.phi2 - (2.2 / 4.4f64.sqrt() - 1.0)).abs() < 1e-12);
        assert_eq!(fit_similarity(&l2map("1,0;0,0")), Err(Error::NotSimilarityCandidate));
    }

    #[test]
    fn rotations_are_orthogonal() {
        for dim in 1..5 {
            let q = random_rotation(dim, dim as u64).unwrap();
            let m = DMatrix::from_fn(dim, dim, |i, j| q[i][j]);
            let e = &m.transpose() * &m - DMatrix::<f64>::identity(dim, dim);
            assert!(e.amax() < 1e-12);
            assert!((m.determinant() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbation_respects_the_budget() {
        let u = LinearMapSpec::new(random_rotation(3, 2).unwrap(), NormSpec::l2(), NormSpec::l2()).unwrap();
        assert_eq!(perturb_similarity(&u, 0.0, 5).unwrap().map, u);
        for seed in 0..20 {
            let p = perturb_similarity(&u, 0.05, seed).unwrap();
            assert!(p.achieved_ratio <= 0.05 + 1e-9);
            assert!((p.achieved_ratio - p.drawn_ratio).abs() < 1e-12);
        }
        assert_eq!(perturb_similarity(&u, 0.05, 7).unwrap(), perturb_similarity(&u, 0.05, 7).unwrap());
        let l1 = LinearMapSpec::scaled_identity(3, 2.0, NormSpec::lp(3.0).unwrap()).unwrap();
        let p = perturb_similarity(&l1, 0.1, 1).unwrap();
        assert!(p.achieved_ratio <= p.drawn_ratio + 1e-9);
    }

    #[test]
    fn identity_preserves_exactly() {
        let id = LinearMapSpec::scaled_identity(3, 1.0, NormSpec::l1()).unwrap();
        let r = verify_preservation(&id, 0.2, 0.2, 2000, 1, 0.0).unwrap();
        assert_eq!(r.trials, 2000);
        assert_eq!(r.violations, 0);
        assert!(r.worst_defect.unwrap() <= 0.0);
    }

    #[test]
    fn non_preserving_map_is_caught() {
        let t = LinearMapSpec::parse("1,0;0,5", NormSpec::l2(), NormSpec::l2()).unwrap();
        let r = verify_preservation(&t, 0.0, 0.1, 2000, 3, 1e-9).unwrap();
        assert!(r.violations > 0);
        assert!(!r.witnesses.is_empty() && r.witnesses.len() <= MAX_WITNESSES);
        let w = &r.witnesses[0];
        assert!(!approx_bisectrix_ratio(&NormSpec::l2(), &t.apply(&w.x).unwrap(), &t.apply(&w.y).unwrap(), 0.1).unwrap());
        assert!(r.witnesses.windows(2).all(|p| p[0].trial < p[1].trial));
    }

    #[test]
    fn merge_is_order_independent() {
        let t = LinearMapSpec::parse("1,0;0,3", NormSpec::l2(), NormSpec::l2()).unwrap();
        let a = verify_preservation(&t, 0.1, 0.1, 300, 1, 1e-9).unwrap();
        let b = verify_preservation(&t, 0.1, 0.1, 300, 2, 1e-9).unwrap();
        let ab = a.clone().merge(b.clone());
        let ba = b.clone().merge(a.clone());
        assert_eq!((ab.trials, ab.violations, ab.worst_defect), (ba.trials, ba.violations, ba.worst_defect));
        assert_eq!(ab.trials, 600);
        assert_eq!(ab.violations, a.violations + b.violations);
    }
}
