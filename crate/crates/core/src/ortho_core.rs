//! Exact orthogonality relations and the one-sided norm derivatives behind
//! the ρ-orthogonality.
//!
//! Equality in the definitions is checked with a mixed absolute/relative
//! tolerance; each predicate documents the exact comparison it performs and
//! returns the raw defect in its [`Verdict`] so that callers can apply their
//! own thresholds. All six predicates hold trivially when either argument is
//! the zero vector.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimize::golden_section;
use crate::normed_space::{same_dim, NormSpec, Vector};

/// Convergence target for the difference quotients of `t ↦ ‖x+ty‖²`.
pub const DERIVATIVE_TOL: f64 = 1e-12;

/// Smallest step tried by [`rho_one_sided`].
pub const MIN_STEP: f64 = 1e-12;

/// Grid size of the Roberts check.
pub const ROBERTS_GRID: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// One one-sided limit with the gap between its last two quotients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneSided {
    pub value: f64,
    pub bracket_width: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalDerivatives {
    pub rho_minus: f64,
    pub rho_plus: f64,
    /// Larger of the two one-sided bracket widths.
    pub bracket_width: f64,
    pub converged: bool,
}

impl DirectionalDerivatives {
    /// Mean of the two one-sided values: the semi-inner product `⟨y|x⟩_g`.
    pub fn semi_inner(&self) -> f64 {
        0.5 * (self.rho_plus + self.rho_minus)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationKind {
    Birkhoff,
    Pythagorean,
    Isosceles,
    Roberts,
    Rho,
    Bisectrix,
}

impl RelationKind {
    pub const ALL: [RelationKind; 6] = [
        RelationKind::Birkhoff,
        RelationKind::Pythagorean,
        RelationKind::Isosceles,
        RelationKind::Roberts,
        RelationKind::Rho,
        RelationKind::Bisectrix,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Birkhoff => "birkhoff",
            Self::Pythagorean => "pythagorean",
            Self::Isosceles => "isosceles",
            Self::Roberts => "roberts",
            Self::Rho => "rho",
            Self::Bisectrix => "bisectrix",
        }
    }

    /// Whether `x ⊥ y` is invariant under `y ↦ βy` for β > 0.
    pub fn is_cone(self) -> bool {
        !matches!(self, Self::Pythagorean | Self::Isosceles)
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RelationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse {
                token: s.to_string(),
                reason: "expected one of birkhoff, pythagorean, isosceles, roberts, rho, bisectrix"
                    .to_string(),
            })
    }
}

/// Extra diagnostics attached by some predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Detail {
    None,
    /// Minimum of `t ↦ ‖x+ty‖` and where it was attained.
    Birkhoff { min_value: f64, argmin: f64 },
    /// Grid location of the largest `|‖x+ty‖ − ‖x−ty‖|` and the grid step.
    Roberts { worst_t: f64, grid_step: f64 },
    Rho { derivatives: DirectionalDerivatives },
}

/// Outcome of a relation check: `holds` iff `|defect| ≤ threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub holds: bool,
    pub defect: f64,
    pub threshold: f64,
    pub detail: Detail,
}

impl Verdict {
    fn new(defect: f64, threshold: f64, detail: Detail) -> Self {
        Self {
            holds: defect.abs() <= threshold,
            defect,
            threshold,
            detail,
        }
    }

    fn trivial() -> Self {
        Self::new(0.0, 0.0, Detail::None)
    }
}

pub(crate) fn check_pair(space: &NormSpec, x: &Vector, y: &Vector) -> Result<()> {
    same_dim(x, y)?;
    space.check_dim(x.dim())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            constraint: "tolerance must be finite and >= 0",
        });
    }
    Ok(())
}

/// One-sided limit `ρ′±(x, y) = lim_{t→0±} (‖x+ty‖² − ‖x‖²)/(2t)`.
///
/// The quotient of the convex map `t ↦ ‖x+ty‖²` is nondecreasing in `t`, so
/// the quotients at `t₀·2^(−k)` form a monotone sequence and the final step
/// gap brackets the remaining error. Steps start at
/// `t₀ = 0.1·(‖x‖+1)/(‖y‖+1)` and stop when the gap drops below
/// `tol·(1 + ‖x‖‖y‖)` or the step falls under [`MIN_STEP`]; the latter is
/// reported through `converged = false`.
pub fn rho_one_sided(space: &NormSpec, x: &Vector, y: &Vector, side: Side, tol: f64) -> Result<OneSided> {
    check_pair(space, x, y)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            constraint: "tolerance must be finite and > 0",
        });
    }
    let nx = space.norm_slice(x.as_slice());
    let ny = space.norm_slice(y.as_slice());
    Ok(one_sided_raw(space, x.as_slice(), y.as_slice(), nx, ny, side, tol))
}

pub(crate) fn one_sided_raw(
    space: &NormSpec,
    x: &[f64],
    y: &[f64],
    nx: f64,
    ny: f64,
    side: Side,
    tol: f64,
) -> OneSided {
    if ny == 0.0 {
        return OneSided {
            value: 0.0,
            bracket_width: 0.0,
            converged: true,
        };
    }
    let sign = match side {
        Side::Plus => 1.0,
        Side::Minus => -1.0,
    };
    let quotient = |t: f64| {
        let st = sign * t;
        space.norm_sq_increment(x, y, st) / (2.0 * st)
    };
    let stop = tol * (1.0 + nx * ny);
    let mut t = 0.1 * (nx + 1.0) / (ny + 1.0);
    let mut prev = quotient(t);
    let mut gap = f64::INFINITY;
    loop {
        t *= 0.5;
        if t < MIN_STEP {
            break;
        }
        let q = quotient(t);
        gap = (q - prev).abs();
        prev = q;
        if gap <= stop {
            return OneSided {
                value: prev,
                bracket_width: gap,
                converged: true,
            };
        }
    }
    OneSided {
        value: prev,
        bracket_width: gap,
        converged: false,
    }
}

/// Both one-sided derivatives of `t ↦ ‖x+ty‖²/2` at 0.
pub fn directional_derivatives(space: &NormSpec, x: &Vector, y: &Vector, tol: f64) -> Result<DirectionalDerivatives> {
    let plus = rho_one_sided(space, x, y, Side::Plus, tol)?;
    let minus = rho_one_sided(space, x, y, Side::Minus, tol)?;
    Ok(combine_sides(plus, minus))
}

fn combine_sides(plus: OneSided, minus: OneSided) -> DirectionalDerivatives {
    DirectionalDerivatives {
        rho_minus: minus.value,
        rho_plus: plus.value,
        bracket_width: plus.bracket_width.max(minus.bracket_width),
        converged: plus.converged && minus.converged,
    }
}

pub(crate) fn derivatives_raw(space: &NormSpec, x: &[f64], y: &[f64], nx: f64, ny: f64) -> DirectionalDerivatives {
    combine_sides(
        one_sided_raw(space, x, y, nx, ny, Side::Plus, DERIVATIVE_TOL),
        one_sided_raw(space, x, y, nx, ny, Side::Minus, DERIVATIVE_TOL),
    )
}

/// The semi-inner product `⟨y|x⟩_g = (ρ′₊(x,y) + ρ′₋(x,y))/2`.
///
/// Use [`directional_derivatives`] to inspect the convergence flag.
pub fn semi_inner(space: &NormSpec, x: &Vector, y: &Vector) -> Result<f64> {
    Ok(directional_derivatives(space, x, y, DERIVATIVE_TOL)?.semi_inner())
}

/// Birkhoff–James: `‖x‖ ≤ ‖x+ty‖` for all real `t`.
///
/// `t ↦ ‖x+ty‖` is convex and its minimizer lies in `[−2‖x‖/‖y‖, 2‖x‖/‖y‖]`,
/// so a golden-section search on that bracket finds the minimum. Holds iff
/// `min ≥ ‖x‖ − tol·(1 + ‖x‖)`; the defect is `max(0, ‖x‖ − min)`.
pub fn is_birkhoff(space: &NormSpec, x: &Vector, y: &Vector, tol: f64) -> Result<Verdict> {
    check_pair(space, x, y)?;
    check_tol(tol)?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let nx = space.norm_slice(xs);
    let ny = space.norm_slice(ys);
    Ok(birkhoff_raw(space, xs, ys, nx, ny, tol))
}

pub(crate) fn birkhoff_raw(space: &NormSpec, x: &[f64], y: &[f64], nx: f64, ny: f64, tol: f64) -> Verdict {
    if nx == 0.0 || ny == 0.0 {
        return Verdict::trivial();
    }
    let r = 2.0 * nx / ny;
    let m = golden_section(|t| space.norm_combo(1.0, x, t, y), -r, r, 1e-12);
    // t = 0 is always admissible; never report a minimum above ‖x‖.
    let (min_value, argmin) = if m.value <= nx { (m.value, m.arg) } else { (nx, 0.0) };
    Verdict::new(
        (nx - min_value).max(0.0),
        tol * (1.0 + nx),
        Detail::Birkhoff { min_value, argmin },
    )
}

/// Pythagorean: `|‖x+y‖² − ‖x‖² − ‖y‖²| ≤ tol·(1 + ‖x‖² + ‖y‖²)`.
pub fn is_pythagorean(space: &NormSpec, x: &Vector, y: &Vector, tol: f64) -> Result<Verdict> {
    check_pair(space, x, y)?;
    check_tol(tol)?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let nx2 = space.norm_slice(xs).powi(2);
    let ny2 = space.norm_slice(ys).powi(2);
    let s2 = space.norm_combo(1.0, xs, 1.0, ys).powi(2);
    Ok(Verdict::new(s2 - nx2 - ny2, tol * (1.0 + nx2 + ny2), Detail::None))
}

/// Isosceles: `|‖x+y‖ − ‖x−y‖| ≤ tol·(1 + ‖x+y‖ + ‖x−y‖)`.
pub fn is_isosceles(space: &NormSpec, x: &Vector, y: &Vector, tol: f64) -> Result<Verdict> {
    check_pair(space, x, y)?;
    check_tol(tol)?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let p = space.norm_combo(1.0, xs, 1.0, ys);
    let m = space.norm_combo(1.0, xs, -1.0, ys);
    Ok(Verdict::new(p - m, tol * (1.0 + p + m), Detail::None))
}

/// Roberts: `‖x+ty‖ = ‖x−ty‖` for all real `t`.
///
/// `g(t) = ‖x+ty‖ − ‖x−ty‖` is odd and `2‖y‖`-Lipschitz. It is evaluated on a
/// [`ROBERTS_GRID`]-point grid over `[−T, T]`, `T = 4‖x‖/‖y‖` (only the
/// nonnegative half is computed since the grid is symmetric), and at the far
/// point `t = 10⁶‖x‖/‖y‖`. Holds iff the largest `|g|` found is at most
/// `tol·(1 + ‖x‖) + 2‖y‖Δt`, the second term being the inter-grid slack.
pub fn is_roberts(space: &NormSpec, x: &Vector, y: &Vector, tol: f64) -> Result<Verdict> {
    check_pair(space, x, y)?;
    check_tol(tol)?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let nx = space.norm_slice(xs);
    let ny = space.norm_slice(ys);
    Ok(roberts_raw(space, xs, ys, nx, ny, tol))
}

pub(crate) fn roberts_raw(space: &NormSpec, x: &[f64], y: &[f64], nx: f64, ny: f64, tol: f64) -> Verdict {
    if nx == 0.0 || ny == 0.0 {
        return Verdict::trivial();
    }
    let big_t = 4.0 * nx / ny;
    let dt = 2.0 * big_t / (ROBERTS_GRID - 1) as f64;
    let g = |t: f64| space.norm_combo(1.0, x, t, y) - space.norm_combo(1.0, x, -t, y);
    let mut worst = 0.0_f64;
    let mut worst_t = 0.0;
    for k in ROBERTS_GRID / 2..ROBERTS_GRID {
        let t = -big_t + k as f64 * dt;
        let v = g(t).abs();
        if v > worst {
            worst = v;
            worst_t = t;
        }
    }
    let far = 1e6 * nx / ny;
    let v = g(far).abs();
    if v > worst {
        worst = v;
        worst_t = far;
    }
    Verdict::new(
        worst,
        tol * (1.0 + nx) + 2.0 * ny * dt,
        Detail::Roberts {
            worst_t,
            grid_step: dt,
        },
    )
}

/// ρ-orthogonality: `|⟨y|x⟩_g| ≤ tol·(1 + ‖x‖‖y‖)`.
pub fn is_rho(space: &NormSpec, x: &Vector, y: &Vector, tol: f64) -> Result<Verdict> {
    check_pair(space, x, y)?;
    check_tol(tol)?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let nx = space.norm_slice(xs);
    let ny = space.norm_slice(ys);
    Ok(rho_raw(space, xs, ys, nx, ny, tol))
}

pub(crate) fn rho_raw(space: &NormSpec, x: &[f64], y: &[f64], nx: f64, ny: f64, tol: f64) -> Verdict {
    if nx == 0.0 || ny == 0.0 {
        return Verdict::trivial();
    }
    let d = derivatives_raw(space, x, y, nx, ny);
    Verdict::new(d.semi_inner(), tol * (1.0 + nx * ny), Detail::Rho { derivatives: d })
}

/// `(‖ ‖y‖x + ‖x‖y ‖, ‖x‖‖y‖)`, the two sides of the bisectrix equation.
#[inline]
pub(crate) fn bisectrix_terms(space: &NormSpec, x: &[f64], y: &[f64]) -> (f64, f64) {
    let nx = space.norm_slice(x);
    let ny = space.norm_slice(y);
    (space.norm_combo(ny, x, nx, y), nx * ny)
}

/// Bisectrix: `|‖ ‖y‖x + ‖x‖y ‖ − √2‖x‖‖y‖| ≤ tol·(1 + ‖x‖‖y‖)`.
pub fn is_bisectrix(space: &NormSpec, x: &Vector, y: &Vector, tol: f64) -> Result<Verdict> {
    check_pair(space, x, y)?;
    check_tol(tol)?;
    let (n, s) = bisectrix_terms(space, x.as_slice(), y.as_slice());
    Ok(Verdict::new(n - SQRT_2 * s, tol * (1.0 + s), Detail::None))
}

/// Dispatches to the predicate for `kind`.
pub fn check_relation(space: &NormSpec, kind: RelationKind, x: &Vector, y: &Vector, tol: f64) -> Result<Verdict> {
    match kind {
        RelationKind::Birkhoff => is_birkhoff(space, x, y, tol),
        RelationKind::Pythagorean => is_pythagorean(space, x, y, tol),
        RelationKind::Isosceles => is_isosceles(space, x, y, tol),
        RelationKind::Roberts => is_roberts(space, x, y, tol),
        RelationKind::Rho => is_rho(space, x, y, tol),
        RelationKind::Bisectrix => is_bisectrix(space, x, y, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normed_space::DEFAULT_TOL;

    fn v(c: &[f64]) -> Vector {
        Vector::new(c.to_vec()).unwrap()
    }

    const R2M1: f64 = SQRT_2 - 1.0;

    #[test]
    fn rho_in_euclidean_plane_is_the_dot_product() {
        let d = directional_derivatives(&NormSpec::l2(), &v(&[1.0, 0.0]), &v(&[1.0, 1.0]), DERIVATIVE_TOL).unwrap();
        assert!((d.rho_plus - 1.0).abs() < 1e-9 && (d.rho_minus - 1.0).abs() < 1e-9);
        assert!(d.converged);
    }

    #[test]
    fn rho_on_flat_face_of_linf_ball_is_zero() {
        // ‖(1, t)‖∞ = 1 for |t| ≤ 1, so every quotient vanishes.
        let d = directional_derivatives(&NormSpec::linf(), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), DERIVATIVE_TOL).unwrap();
        assert_eq!((d.rho_minus, d.rho_plus), (0.0, 0.0));
    }

    #[test]
    fn rho_at_linf_vertex_has_a_kink() {
        // max(|1+t|, 1)²: right quotient 1 + t/2, left quotient 0.
        let d = directional_derivatives(&NormSpec::linf(), &v(&[1.0, 1.0]), &v(&[1.0, 0.0]), DERIVATIVE_TOL).unwrap();
        assert!((d.rho_plus - 1.0).abs() < 1e-10, "{d:?}");
        assert!(d.rho_minus.abs() < 1e-12, "{d:?}");
        assert!((d.semi_inner() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn semi_inner_examples() {
        let x = v(&[0.3, -1.1]);
        let y = v(&[2.0, 0.7]);
        let s = semi_inner(&NormSpec::l2(), &x, &y).unwrap();
        assert!((s - (0.6 - 0.77)).abs() < 1e-8);
        for space in [NormSpec::l1(), NormSpec::linf(), NormSpec::lp(3.0).unwrap()] {
            assert_eq!(semi_inner(&space, &x, &v(&[0.0, 0.0])).unwrap(), 0.0);
        }
    }

    #[test]
    fn birkhoff_examples() {
        let tol = DEFAULT_TOL;
        assert!(is_birkhoff(&NormSpec::l2(), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), tol).unwrap().holds);
        assert!(is_birkhoff(&NormSpec::linf(), &v(&[1.0, 1.0]), &v(&[-1.0, 1.0]), tol).unwrap().holds);
        let f = is_birkhoff(&NormSpec::linf(), &v(&[1.0, 0.0]), &v(&[R2M1, 1.0]), tol).unwrap();
        assert!(!f.holds);
        // Grid oracle: at t = −0.5 the norm is already below 1.
        let at_half = NormSpec::linf().norm(&v(&[1.0 - 0.5 * R2M1, -0.5])).unwrap();
        assert!((at_half - 0.792_893_218_813_452_5).abs() < 1e-12);
        if let Detail::Birkhoff { min_value, .. } = f.detail {
            assert!(min_value <= at_half);
        } else {
            panic!("missing birkhoff detail");
        }
        assert!(is_birkhoff(&NormSpec::l1(), &v(&[0.0, 0.0]), &v(&[1.0, 3.0]), 0.0).unwrap().holds);
        assert!(is_birkhoff(&NormSpec::l1(), &v(&[1.0, 3.0]), &v(&[0.0, 0.0]), 0.0).unwrap().holds);
    }

    #[test]
    fn pythagorean_examples() {
        let tol = DEFAULT_TOL;
        assert!(is_pythagorean(&NormSpec::l2(), &v(&[3.0, 0.0]), &v(&[0.0, 4.0]), tol).unwrap().holds);
        let f = is_pythagorean(&NormSpec::linf(), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), tol).unwrap();
        assert!(!f.holds);
        assert_eq!(f.defect, -1.0);
        assert!(is_pythagorean(&NormSpec::lp(3.0).unwrap(), &v(&[1.0, 2.0]), &v(&[0.0, 0.0]), tol).unwrap().holds);
    }

    #[test]
    fn isosceles_examples() {
        let tol = DEFAULT_TOL;
        assert!(is_isosceles(&NormSpec::l2(), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), tol).unwrap().holds);
        assert!(is_isosceles(&NormSpec::linf(), &v(&[1.0, 0.0]), &v(&[0.0, SQRT_2]), tol).unwrap().holds);
        let f = is_isosceles(&NormSpec::linf(), &v(&[1.0, 0.0]), &v(&[R2M1, 1.0]), tol).unwrap();
        assert!(!f.holds);
        assert!((f.defect - (SQRT_2 - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn roberts_examples() {
        let tol = DEFAULT_TOL;
        assert!(is_roberts(&NormSpec::l2(), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), tol).unwrap().holds);
        assert!(is_roberts(&NormSpec::linf(), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), tol).unwrap().holds);
        let f = is_roberts(&NormSpec::linf(), &v(&[1.0, 1.0]), &v(&[1.0, 0.0]), tol).unwrap();
        assert!(!f.holds);
        assert!(f.defect >= 1.0 - 1e-12);
    }

    #[test]
    fn rho_examples() {
        let tol = DEFAULT_TOL;
        assert!(is_rho(&NormSpec::l2(), &v(&[1.0, 0.0]), &v(&[0.0, 1.0]), tol).unwrap().holds);
        let f = is_rho(&NormSpec::linf(), &v(&[1.0, 1.0]), &v(&[1.0, 0.0]), tol).unwrap();
        assert!(!f.holds && (f.defect - 0.5).abs() < 1e-10);
        // max(|1+t|, |1−t|)² = (1+|t|)²: ρ′₊ = 1, ρ′₋ = −1, mean 0.
        let t = is_rho(&NormSpec::linf(), &v(&[1.0, 1.0]), &v(&[1.0, -1.0]), tol).unwrap();
        assert!(t.holds);
        if let Detail::Rho { derivatives } = t.detail {
            assert!((derivatives.rho_plus - 1.0).abs() < 1e-10);
            assert!((derivatives.rho_minus + 1.0).abs() < 1e-10);
        } else {
            panic!("missing rho detail");
        }
    }

    #[test]
    fn bisectrix_examples() {
        let tol = DEFAULT_TOL;
        assert!(is_bisectrix(&NormSpec::l2(), &v(&[5.0, 0.0]), &v(&[0.0, 3.0]), tol).unwrap().holds);
        let t = is_bisectrix(&NormSpec::linf(), &v(&[1.0, 0.0]), &v(&[R2M1, 1.0]), tol).unwrap();
        assert!(t.holds, "{t:?}");
        let f = is_bisectrix(&NormSpec::linf(), &v(&[1.0, 0.0]), &v(&[R2M1, 0.1]), tol).unwrap();
        assert!(!f.holds);
        // ŷ = (1, 0.1/(√2−1)), x̂ + ŷ = (2, ·): norm 2.
        assert!((f.defect - (2.0 - SQRT_2) * R2M1).abs() < 1e-12);
        assert!(is_bisectrix(&NormSpec::l1(), &v(&[0.0, 0.0]), &v(&[1.0, 2.0]), 0.0).unwrap().holds);
    }

    #[test]
    fn dispatcher_examples() {
        let tol = DEFAULT_TOL;
        let (e1, e2) = (v(&[1.0, 0.0]), v(&[0.0, 1.0]));
        assert!(check_relation(&NormSpec::l2(), RelationKind::Bisectrix, &e1, &e2, tol).unwrap().holds);
        assert!(!check_relation(&NormSpec::linf(), RelationKind::Pythagorean, &e1, &e2, tol).unwrap().holds);
        assert!(check_relation(&NormSpec::l1(), RelationKind::Isosceles, &e1, &e2, tol).unwrap().holds);
        assert!(check_relation(&NormSpec::l1(), RelationKind::Isosceles, &e1, &v(&[0.0, 1.0, 2.0]), tol).is_err());
    }

    #[test]
    fn zero_vectors_satisfy_every_relation() {
        let z = v(&[0.0, 0.0, 0.0]);
        let y = v(&[0.2, -1.0, 3.0]);
        for space in [NormSpec::l1(), NormSpec::linf(), NormSpec::lp(1.5).unwrap()] {
            for kind in RelationKind::ALL {
                assert!(check_relation(&space, kind, &z, &y, 0.0).unwrap().holds, "{kind} 0,y");
                assert!(check_relation(&space, kind, &y, &z, 0.0).unwrap().holds, "{kind} y,0");
            }
        }
    }

    #[test]
    fn relation_names_parse() {
        for k in RelationKind::ALL {
            assert_eq!(k.name().parse::<RelationKind>().unwrap(), k);
        }
        assert!("singer".parse::<RelationKind>().is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        // A tolerance below what 1e-12 steps can resolve on a smooth norm.
        let r = rho_one_sided(&NormSpec::l2(), &v(&[1.0, 0.0]), &v(&[1e6, 1e6]), Side::Plus, 1e-30).unwrap();
        assert!(!r.converged);
        assert!(r.bracket_width > 0.0);
    }
}
