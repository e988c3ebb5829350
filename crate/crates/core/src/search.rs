//! Geometric exploration: orthogonality sets of a probe vector in the plane,
//! a sampler for approximately bisectrix-orthogonal pairs, counterexample
//! search between relations, and parallelogram defects.

use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx_ortho::{min_epsilon_raw, ApproxRelationKind};
use crate::error::{Error, Result};
use crate::minimize::{bisect, bracketed_root, golden_section};
use crate::normed_space::{dot, random_unit, rng, same_dim, sub_seed, NormSpec, Vector};
use crate::ortho_core::{
    birkhoff_raw, bisectrix_terms, check_relation, derivatives_raw, roberts_raw, RelationKind, Verdict,
};

/// Angular resolution to which ray directions are refined.
pub const ANGLE_TOL: f64 = 1e-10;

/// Runs of accepted directions narrower than this are reported as a single ray.
pub const MIN_ARC_WIDTH: f64 = 1e-6;

/// Radial samples per direction for the point clouds of non-conic relations.
pub const RADIAL_STEPS: usize = 64;

/// A witness must violate the target relation by this multiple of its threshold.
pub const SEPARATION: f64 = 10.0;

/// Draw attempts before the pair sampler gives up.
const SAMPLER_ATTEMPTS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Angle of the direction in `(−π, π]`.
    pub angle: f64,
    /// Unit vector (in the space's norm) along the ray.
    pub direction: Vector,
    /// Defect reported by the relation predicate for this direction.
    pub defect: f64,
}

/// Closed angular interval `[start, end]` (counterclockwise, `end > start`,
/// possibly extending past π) on which every direction is accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaySet2D {
    pub probe: Vector,
    pub kind: RelationKind,
    pub rays: Vec<Ray>,
    pub arcs: Vec<Arc>,
    pub includes_zero: bool,
    /// Candidate directions dropped because the predicate rejected them
    /// (typically sign flips of a discontinuous score).
    pub rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub angle: f64,
    pub radius: f64,
    pub point: Vector,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub probe: Vector,
    pub kind: RelationKind,
    pub points: Vec<CloudPoint>,
    pub includes_zero: bool,
}

/// Rays for relations invariant under positive scaling, a point cloud otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum OrthoSet {
    Rays(RaySet2D),
    Cloud(PointCloud),
}

impl OrthoSet {
    /// CSV with columns `angle,dir_x,dir_y,defect`. Rays give their unit
    /// direction, arcs are listed at the angular grid, and cloud rows carry
    /// the point itself in the `dir` columns.
    pub fn to_csv(&self, space: &NormSpec, arc_step: f64) -> String {
        let mut out = String::from("angle,dir_x,dir_y,defect\n");
        let mut row = |a: f64, p: &[f64], d: f64| {
            let _ = writeln!(out, "{a:?},{:?},{:?},{d:?}", p[0], p[1]);
        };
        match self {
            OrthoSet::Rays(set) => {
                for r in &set.rays {
                    row(r.angle, r.direction.as_slice(), r.defect);
                }
                for arc in &set.arcs {
                    let n = ((arc.end - arc.start) / arc_step).ceil().max(1.0) as usize;
                    for k in 0..=n {
                        let a = arc.start + (arc.end - arc.start) * k as f64 / n as f64;
                        let d = unit_direction(space, a);
                        row(wrap_angle(a), &d, 0.0);
                    }
                }
            }
            OrthoSet::Cloud(cloud) => {
                for p in &cloud.points {
                    row(p.angle, p.point.as_slice(), p.defect);
                }
            }
        }
        out
    }
}

/// Maps an angle into `(−π, π]`.
fn wrap_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(TAU);
    if r > PI {
        r -= TAU;
    }
    r
}

fn unit_direction(space: &NormSpec, alpha: f64) -> [f64; 2] {
    let d = [alpha.cos(), alpha.sin()];
    let n = space.norm_slice(&d);
    [d[0] / n, d[1] / n]
}

/// Signed score for the conic relations: zero on the set, and of constant sign
/// on each side of an isolated ray. Scale-free in both arguments.
fn cone_score(space: &NormSpec, kind: RelationKind, x: &[f64], nx: f64, d: &[f64]) -> f64 {
    match kind {
        RelationKind::Bisectrix => {
            let (n, s) = bisectrix_terms(space, x, d);
            n / s - SQRT_2
        }
        RelationKind::Rho => derivatives_raw(space, x, d, nx, 1.0).semi_inner() / nx,
        RelationKind::Birkhoff => {
            // James: x ⊥_B d iff ρ′₋(x, d) ≤ 0 ≤ ρ′₊(x, d).
            let g = derivatives_raw(space, x, d, nx, 1.0);
            if g.rho_minus > 0.0 {
                g.rho_minus / nx
            } else if g.rho_plus < 0.0 {
                g.rho_plus / nx
            } else {
                0.0
            }
        }
        _ => unreachable!("no signed score for {kind}"),
    }
}

/// Traces the set `{y : x ⊥ y}` for a planar probe `x`.
///
/// Conic relations are scanned over `angular_steps` unit directions; each
/// sign change of a signed score is refined to [`ANGLE_TOL`], and runs of
/// accepted directions wider than [`MIN_ARC_WIDTH`] become arcs. Roberts has
/// no signed score, so its rays are the refined local minima of its defect.
/// Every ray is re-checked with the relation's predicate before it is kept.
/// Pythagorean and isosceles orthogonality are not homogeneous in `y`; for
/// them a point cloud over an angle × radius grid (radii up to `3‖x‖`) is
/// returned, containing accepted grid points and refined radial sign changes.
pub fn ortho_set_2d(
    space: &NormSpec,
    x: &Vector,
    kind: RelationKind,
    angular_steps: usize,
    tol: f64,
) -> Result<OrthoSet> {
    if x.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.dim(),
        });
    }
    space.check_dim(2)?;
    if x.is_zero() {
        return Err(Error::ZeroVector { context: "ortho_set_2d probe" });
    }
    if angular_steps < 360 {
        return Err(Error::InvalidParameter {
            name: "angular_steps",
            value: angular_steps as f64,
            constraint: "angular_steps >= 360",
        });
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            constraint: "tol must be finite and >= 0",
        });
    }
    Ok(match kind {
        RelationKind::Pythagorean | RelationKind::Isosceles => {
            OrthoSet::Cloud(point_cloud(space, x, kind, angular_steps, tol))
        }
        RelationKind::Roberts => OrthoSet::Rays(roberts_rays(space, x, angular_steps, tol)),
        _ => OrthoSet::Rays(signed_rays(space, x, kind, angular_steps, tol)),
    })
}

fn grid_angle(k: usize, n: usize) -> f64 {
    -PI + TAU * k as f64 / n as f64
}

fn make_ray(space: &NormSpec, x: &Vector, kind: RelationKind, angle: f64, tol: f64) -> Option<Ray> {
    let d = Vector::from_finite(unit_direction(space, angle).to_vec());
    let v = check_relation(space, kind, x, &d, tol).ok()?;
    v.holds.then(|| Ray {
        angle: wrap_angle(angle),
        direction: d,
        defect: v.defect,
    })
}

fn finish(space: &NormSpec, x: &Vector, kind: RelationKind, candidates: Vec<f64>, arcs: Vec<Arc>, tol: f64) -> RaySet2D {
    let mut rays = Vec::new();
    let mut rejected = 0;
    for a in candidates {
        match make_ray(space, x, kind, a, tol) {
            Some(r) => rays.push(r),
            None => rejected += 1,
        }
    }
    rays.sort_by(|a, b| a.angle.total_cmp(&b.angle));
    rays.dedup_by(|b, a| (b.angle - a.angle).abs() < 1e-8);
    if rays.len() > 1 {
        let (first, last) = (rays[0].angle, rays[rays.len() - 1].angle);
        if first + TAU - last < 1e-8 {
            rays.pop();
        }
    }
    RaySet2D {
        probe: x.clone(),
        kind,
        rays,
        arcs,
        includes_zero: true,
        rejected,
    }
}

/// Walks the grid cyclically starting from a rejected direction and turns
/// sign changes into ray candidates and accepted runs into arcs or rays.
fn signed_rays(space: &NormSpec, x: &Vector, kind: RelationKind, n: usize, tol: f64) -> RaySet2D {
    let xs = x.as_slice();
    let nx = space.norm_slice(xs);
    let score = |a: f64| cone_score(space, kind, xs, nx, &unit_direction(space, a));
    let vals: Vec<f64> = (0..n).into_par_iter().map(|k| score(grid_angle(k, n))).collect();
    let accepted = |v: f64| v.abs() <= tol;
    let Some(k0) = vals.iter().position(|&v| !accepted(v)) else {
        let arcs = vec![Arc { start: -PI, end: PI }];
        return finish(space, x, kind, Vec::new(), arcs, tol);
    };
    let angle = |j: usize| grid_angle(k0, n) + TAU * j as f64 / n as f64;
    let val = |j: usize| vals[(k0 + j) % n];
    let mut candidates = Vec::new();
    let mut arcs = Vec::new();
    let mut j = 0;
    while j < n {
        if accepted(val(j + 1)) {
            // Accepted run from j+1 up to the next rejected grid point j2.
            let mut j2 = j + 1;
            while accepted(val(j2)) {
                j2 += 1;
            }
            let left = bisect(|a| !accepted(score(a)), angle(j), angle(j + 1), ANGLE_TOL);
            let right = bisect(|a| accepted(score(a)), angle(j2 - 1), angle(j2), ANGLE_TOL);
            if right - left < MIN_ARC_WIDTH {
                let c = if val(j).signum() != val(j2).signum() {
                    bracketed_root(score, angle(j), angle(j2), ANGLE_TOL).unwrap_or(0.5 * (left + right))
                } else {
                    0.5 * (left + right)
                };
                candidates.push(c);
            } else {
                arcs.push(Arc { start: wrap_angle(left), end: wrap_angle(left) + (right - left) });
            }
            j = j2;
        } else {
            if val(j).signum() != val(j + 1).signum() {
                if let Some(c) = bracketed_root(score, angle(j), angle(j + 1), ANGLE_TOL) {
                    candidates.push(c);
                }
            }
            j += 1;
        }
    }
    finish(space, x, kind, candidates, arcs, tol)
}

fn roberts_rays(space: &NormSpec, x: &Vector, n: usize, tol: f64) -> RaySet2D {
    let xs = x.as_slice();
    let nx = space.norm_slice(xs);
    let defect = |a: f64| roberts_raw(space, xs, &unit_direction(space, a), nx, 1.0, tol).defect;
    let vals: Vec<f64> = (0..n).into_par_iter().map(|k| defect(grid_angle(k, n))).collect();
    // Accepted without the inter-grid slack, so that arcs are genuine.
    let strict = tol * (1.0 + nx);
    let accepted = |v: f64| v <= strict;
    let mut candidates = Vec::new();
    let mut arcs = Vec::new();
    let Some(k0) = vals.iter().position(|&v| !accepted(v)) else {
        return finish(space, x, RelationKind::Roberts, Vec::new(), vec![Arc { start: -PI, end: PI }], tol);
    };
    let angle = |j: usize| grid_angle(k0, n) + TAU * j as f64 / n as f64;
    let val = |j: usize| vals[(k0 + j) % n];
    let mut j = 0;
    while j < n {
        if accepted(val(j + 1)) {
            let mut j2 = j + 1;
            while accepted(val(j2)) {
                j2 += 1;
            }
            let left = bisect(|a| !accepted(defect(a)), angle(j), angle(j + 1), ANGLE_TOL);
            let right = bisect(|a| accepted(defect(a)), angle(j2 - 1), angle(j2), ANGLE_TOL);
            if right - left < MIN_ARC_WIDTH {
                candidates.push(0.5 * (left + right));
            } else {
                arcs.push(Arc { start: wrap_angle(left), end: wrap_angle(left) + (right - left) });
            }
            j = j2;
        } else {
            let (prev, cur, next) = (val(j + n - 1), val(j), val(j + 1));
            if j > 0 && cur <= prev && cur <= next {
                let m = golden_section(defect, angle(j - 1), angle(j + 1), 1e-12);
                candidates.push(m.arg);
            }
            j += 1;
        }
    }
    finish(space, x, RelationKind::Roberts, candidates, arcs, tol)
}

fn radial_score(space: &NormSpec, kind: RelationKind, x: &[f64], nx: f64, d: &[f64], r: f64) -> f64 {
    match kind {
        RelationKind::Isosceles => (space.norm_combo(1.0, x, r, d) - space.norm_combo(1.0, x, -r, d)) / nx,
        RelationKind::Pythagorean => (space.norm_combo(1.0, x, r, d).powi(2) - nx * nx - r * r) / (nx * nx),
        _ => unreachable!(),
    }
}

fn point_cloud(space: &NormSpec, x: &Vector, kind: RelationKind, n: usize, tol: f64) -> PointCloud {
    let xs = x.as_slice();
    let nx = space.norm_slice(xs);
    let r_max = 3.0 * nx;
    let radius = |j: usize| r_max * j as f64 / RADIAL_STEPS as f64;
    let per_angle = |k: usize| {
        let a = grid_angle(k, n);
        let d = unit_direction(space, a);
        let mut pts = Vec::new();
        let mut push = |r: f64| {
            let p = Vector::from_finite(vec![r * d[0], r * d[1]]);
            if let Ok(v) = check_relation(space, kind, x, &p, tol) {
                if v.holds {
                    pts.push(CloudPoint { angle: a, radius: r, point: p, defect: v.defect });
                }
            }
        };
        let f = |r: f64| radial_score(space, kind, xs, nx, &d, r);
        let mut prev = f(radius(1));
        push(radius(1));
        for j in 2..=RADIAL_STEPS {
            let cur = f(radius(j));
            push(radius(j));
            if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
                if let Some(r) = bracketed_root(f, radius(j - 1), radius(j), 1e-12 * r_max) {
                    push(r);
                }
            }
            prev = cur;
        }
        pts.sort_by(|a, b| a.radius.total_cmp(&b.radius));
        pts.dedup_by(|b, a| (b.radius - a.radius).abs() < 1e-12 * r_max);
        pts
    };
    let points = (0..n).into_par_iter().flat_map_iter(per_angle).collect();
    PointCloud {
        probe: x.clone(),
        kind,
        points,
        includes_zero: true,
    }
}

/// A Euclidean-orthonormal pair `(u, e)` with `u ∥ x`, spanning a random plane
/// through `x`.
fn random_plane<R: Rng>(x: &[f64], rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let nx = dot(x, x).sqrt();
    let u: Vec<f64> = x.iter().map(|c| c / nx).collect();
    loop {
        let g = crate::normed_space::gaussian_coords(rng, x.len());
        let p = dot(&g, &u);
        let e: Vec<f64> = g.iter().zip(&u).map(|(a, b)| a - p * b).collect();
        let ne = dot(&e, &e).sqrt();
        if ne > 1e-6 {
            return (u, e.into_iter().map(|c| c / ne).collect());
        }
    }
}

/// `cos φ·u + sin φ·e`, normalized in `space`.
fn plane_unit(space: &NormSpec, u: &[f64], e: &[f64], phi: f64) -> Vec<f64> {
    let (s, c) = phi.sin_cos();
    let d: Vec<f64> = u.iter().zip(e).map(|(a, b)| c * a + s * b).collect();
    let n = space.norm_slice(&d);
    d.into_iter().map(|v| v / n).collect()
}

fn log_uniform<R: Rng>(rng: &mut R) -> f64 {
    10f64.powf(rng.random_range(-1.0..=1.0))
}

fn scaled(v: &[f64], a: f64) -> Vec<f64> {
    v.iter().map(|c| c * a).collect()
}

/// Draws `(x, y)` with `x ≈δ_W y`.
///
/// `x` is a random unit vector and `y` lies in a random plane through `x`, at
/// the angle where `‖x̂ + ŷ‖` meets a target drawn from the edge of the band
/// of defect `δ·u`, `u` uniform in `[0, 1]`; both are then rescaled by
/// log-uniform factors in `[0.1, 10]`. The pair is re-checked and redrawn if
/// rounding pushed it out of the band. With `δ = 0` the pair satisfies the
/// exact relation within [`crate::DEFAULT_TOL`] instead.
pub fn sample_approx_orthogonal_pair(space: &NormSpec, dim: usize, delta: f64, seed: u64) -> Result<(Vector, Vector)> {
    space.check_dim(dim)?;
    if dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            value: dim as f64,
            constraint: "dim >= 2",
        });
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::InvalidParameter {
            name: "delta",
            value: delta,
            constraint: "0 <= delta < 1",
        });
    }
    let mut rng = rng(seed);
    for _ in 0..SAMPLER_ATTEMPTS {
        if let Some(pair) = draw_pair(space, dim, delta, &mut rng) {
            return Ok(pair);
        }
    }
    Err(Error::RootFinding("no approximately orthogonal pair found"))
}

fn draw_pair<R: Rng>(space: &NormSpec, dim: usize, delta: f64, rng: &mut R) -> Option<(Vector, Vector)> {
    let x = random_unit(space, dim, rng).into_inner();
    let (u, e) = random_plane(&x, rng);
    let level = delta * rng.random::<f64>();
    let widen = (1.0 + level) / (1.0 - level);
    let mut target = if rng.random_bool(0.5) { SQRT_2 * widen } else { SQRT_2 / widen };
    if target >= 2.0 {
        // The band reaches past ‖x̂+ŷ‖ = 2; every value in [√2, 2) is then inside.
        target = SQRT_2 + (2.0 - SQRT_2) * 0.999 * rng.random::<f64>();
    }
    let offset = if rng.random_bool(0.5) { 0.0 } else { PI };
    let f = |phi: f64| space.norm_combo(1.0, &x, 1.0, &plane_unit(space, &u, &e, phi)) - target;
    // f(0) = 2 − target > 0 and f(π) = −target < 0 on either half-plane.
    let (a, b) = if offset == 0.0 { (0.0, PI) } else { (TAU, PI) };
    let phi = bracketed_root(f, a, b, 1e-15)?;
    let y = plane_unit(space, &u, &e, phi);
    let x = scaled(&x, log_uniform(rng));
    let y = scaled(&y, log_uniform(rng));
    let ok = if delta == 0.0 {
        let (n, s) = bisectrix_terms(space, &x, &y);
        (n - SQRT_2 * s).abs() <= crate::DEFAULT_TOL * (1.0 + s)
    } else {
        min_epsilon_raw(space, ApproxRelationKind::BisectrixRatio, &x, &y).value <= delta
    };
    ok.then(|| (Vector::from_finite(x), Vector::from_finite(y)))
}

/// Settings shared by the counterexample searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub dim: usize,
    /// Confine both vectors to the unit sphere.
    pub unit_sphere: bool,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            dim: 2,
            unit_sphere: false,
            trials: 10_000,
            seed: 0,
            tol: crate::DEFAULT_TOL,
        }
    }
}

/// A pair satisfying `from` and violating `to` by more than
/// [`SEPARATION`] times the threshold of `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub from: RelationKind,
    pub to: RelationKind,
    pub x: Vector,
    pub y: Vector,
    pub from_defect: f64,
    pub to_defect: f64,
    pub to_threshold: f64,
    pub trial: usize,
}

/// Generates a pair that should satisfy `from`, before verification.
fn candidate<R: Rng>(space: &NormSpec, from: RelationKind, cfg: &SearchConfig, rng: &mut R) -> Option<(Vec<f64>, Vec<f64>)> {
    let x = random_unit(space, cfg.dim, rng).into_inner();
    let (u, e) = random_plane(&x, rng);
    let upper = rng.random_bool(0.5);
    let (a, b) = if upper { (0.0, PI) } else { (TAU, PI) };
    let d = |phi: f64| plane_unit(space, &u, &e, phi);
    let (x, y) = match from {
        RelationKind::Bisectrix => {
            let phi = bracketed_root(|p| space.norm_combo(1.0, &x, 1.0, &d(p)) - SQRT_2, a, b, 1e-15)?;
            (x, d(phi))
        }
        RelationKind::Rho => {
            let phi = bracketed_root(|p| derivatives_raw(space, &x, &d(p), 1.0, 1.0).semi_inner(), a, b, 1e-15)?;
            (x, d(phi))
        }
        RelationKind::Birkhoff => {
            // Shift x along a random direction to the minimizer of t ↦ ‖x+ty‖,
            // located as the zero of its monotone derivative.
            let y = d(rng.random_range(0.0..TAU));
            let g = |t: f64| {
                let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + t * q).collect();
                let nz = space.norm_slice(&z);
                derivatives_raw(space, &z, &y, nz, 1.0).semi_inner()
            };
            let t = bracketed_root(g, -2.0, 2.0, 1e-15)?;
            let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + t * q).collect();
            let nz = space.norm_slice(&z);
            if nz == 0.0 {
                return None;
            }
            (scaled(&z, 1.0 / nz), y)
        }
        RelationKind::Isosceles | RelationKind::Roberts => {
            let r = if cfg.unit_sphere || from == RelationKind::Roberts { 1.0 } else { log_uniform(rng) };
            let f = |p: f64| {
                let w = d(p);
                space.norm_combo(1.0, &x, r, &w) - space.norm_combo(1.0, &x, -r, &w)
            };
            let phi = bracketed_root(f, a, b, 1e-15)?;
            (x, scaled(&d(phi), r))
        }
        RelationKind::Pythagorean => {
            let r = if cfg.unit_sphere { 1.0 } else { log_uniform(rng) };
            let f = |p: f64| space.norm_combo(1.0, &x, r, &d(p)).powi(2) - 1.0 - r * r;
            let phi = bracketed_root(f, a, b, 1e-15)?;
            (x, scaled(&d(phi), r))
        }
    };
    if cfg.unit_sphere {
        return Some((x, y));
    }
    if from.is_cone() {
        Some((scaled(&x, log_uniform(rng)), scaled(&y, log_uniform(rng))))
    } else {
        let s = log_uniform(rng);
        Some((scaled(&x, s), scaled(&y, s)))
    }
}

fn verdict(space: &NormSpec, kind: RelationKind, x: &[f64], y: &[f64], tol: f64) -> Verdict {
    let nx = space.norm_slice(x);
    let ny = space.norm_slice(y);
    match kind {
        RelationKind::Birkhoff => birkhoff_raw(space, x, y, nx, ny, tol),
        RelationKind::Roberts => roberts_raw(space, x, y, nx, ny, tol),
        _ => check_relation(space, kind, &Vector::from_finite(x.to_vec()), &Vector::from_finite(y.to_vec()), tol)
            .expect("dimensions already checked"),
    }
}

/// Searches for a pair with `x ⊥_from y` but not `x ⊥_to y`.
///
/// Each trial builds a candidate satisfying `from` in a random plane (root
/// finding along the plane angle, or the Birkhoff minimizer), confirms it
/// with the `from` predicate, and accepts it as a witness only if the `to`
/// defect exceeds [`SEPARATION`] times the `to` threshold. Trials are
/// independent per-index seeds; the lowest-index witness is returned, so the
/// result does not depend on scheduling.
pub fn find_counterexample(
    space: &NormSpec,
    from: RelationKind,
    to: RelationKind,
    cfg: &SearchConfig,
) -> Result<Option<Witness>> {
    if from == to {
        return Err(Error::Precondition("rel_from and rel_to must differ"));
    }
    check_search(space, cfg)?;
    Ok((0..cfg.trials).into_par_iter().find_map_first(|i| {
        let mut rng = rng(sub_seed(cfg.seed, i as u64));
        let (x, y) = candidate(space, from, cfg, &mut rng)?;
        let f = verdict(space, from, &x, &y, cfg.tol);
        if !f.holds {
            return None;
        }
        let t = verdict(space, to, &x, &y, cfg.tol);
        (t.defect.abs() > SEPARATION * t.threshold).then(|| Witness {
            from,
            to,
            x: Vector::from_finite(x),
            y: Vector::from_finite(y),
            from_defect: f.defect,
            to_defect: t.defect,
            to_threshold: t.threshold,
            trial: i,
        })
    }))
}

fn check_search(space: &NormSpec, cfg: &SearchConfig) -> Result<()> {
    space.check_dim(cfg.dim)?;
    if cfg.dim < 2 {
        return Err(Error::InvalidParameter {
            name: "dim",
            value: cfg.dim as f64,
            constraint: "dim >= 2",
        });
    }
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            value: 0.0,
            constraint: "trials >= 1",
        });
    }
    if !(cfg.tol.is_finite() && cfg.tol >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: cfg.tol,
            constraint: "tol must be finite and >= 0",
        });
    }
    Ok(())
}

/// `‖x+y‖² + ‖x−y‖² − 2‖x‖² − 2‖y‖²`; zero for every pair exactly when the
/// norm comes from an inner product.
pub fn parallelogram_defect(space: &NormSpec, x: &Vector, y: &Vector) -> Result<f64> {
    same_dim(x, y)?;
    space.check_dim(x.dim())?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    Ok(parallelogram_raw(space, xs, ys))
}

fn parallelogram_raw(space: &NormSpec, x: &[f64], y: &[f64]) -> f64 {
    let p = space.norm_sq_combo(1.0, x, 1.0, y);
    let m = space.norm_sq_combo(1.0, x, -1.0, y);
    let nx = space.norm_sq_combo(1.0, x, 0.0, x);
    let ny = space.norm_sq_combo(1.0, y, 0.0, y);
    p + m - 2.0 * nx - 2.0 * ny
}

/// Signs of the parallelogram defect over sampled bisectrix-orthogonal pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignProfile {
    pub trials: usize,
    pub positive: usize,
    pub negative: usize,
    /// Defects within `tol·(‖x‖² + ‖y‖²)` of zero.
    pub zero: usize,
    pub min: f64,
    pub max: f64,
}

/// Tallies the sign of the parallelogram defect on `trials` pairs drawn with
/// [`sample_approx_orthogonal_pair`] at `δ = 0`, normalized by `‖x‖² + ‖y‖²`.
pub fn parallelogram_sign_profile(space: &NormSpec, dim: usize, trials: usize, seed: u64, tol: f64) -> Result<SignProfile> {
    if trials == 0 {
        return Err(Error::InvalidParameter {
            name: "trials",
            value: 0.0,
            constraint: "trials >= 1",
        });
    }
    let rel: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let (x, y) = sample_approx_orthogonal_pair(space, dim, 0.0, sub_seed(seed, i as u64))?;
            let (xs, ys) = (x.as_slice(), y.as_slice());
            let scale = space.norm_slice(xs).powi(2) + space.norm_slice(ys).powi(2);
            Ok(parallelogram_raw(space, xs, ys) / scale)
        })
        .collect::<Result<_>>()?;
    let mut p = SignProfile {
        trials,
        positive: 0,
        negative: 0,
        zero: 0,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    for v in rel {
        if v.abs() <= tol {
            p.zero += 1;
        } else if v > 0.0 {
            p.positive += 1;
        } else {
            p.negative += 1;
        }
        p.min = p.min.min(v);
        p.max = p.max.max(v);
    }
    Ok(p)
}

/// Comparison of the traced bisectrix set of `(1, 0)` in `(ℝ², ℓ∞)` with the
/// rectangle boundary `∂([−√2−1, √2−1] × [−√2, √2])` sometimes quoted for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinfBisectrixReport {
    pub steps: usize,
    /// Sign changes of `‖x̂+ŷ‖ − √2` over the full angular scan.
    pub sign_changes: usize,
    pub rays: Vec<Ray>,
    /// `(√2−1, ±1)`, already of unit ℓ∞ norm.
    pub expected: Vec<Vector>,
    /// Largest angular distance from an expected direction to the nearest ray.
    pub max_angular_error: f64,
    pub rectangle_samples: usize,
    /// Largest `|‖x+y‖∞ − √2|` over the sampled rectangle boundary.
    pub rectangle_max_deviation: f64,
    /// Whether the sampled boundary points stay on the boundary after scaling by 1/2 and 2.
    pub rectangle_is_cone: bool,
    /// Sampled boundary points `y` with `x ⊥_W y` false.
    pub rectangle_bisectrix_violations: usize,
    /// True when the rectangle boundary is not the bisectrix set.
    pub deviates_from_rectangle: bool,
}

/// Builds the ℓ∞ example report with an angular scan of `steps` directions
/// and `per_edge` samples on each rectangle edge.
pub fn linf_bisectrix_example(steps: usize, per_edge: usize, tol: f64) -> Result<LinfBisectrixReport> {
    let space = NormSpec::linf();
    let x = Vector::from_finite(vec![1.0, 0.0]);
    let OrthoSet::Rays(set) = ortho_set_2d(&space, &x, RelationKind::Bisectrix, steps, tol)? else {
        unreachable!("bisectrix is conic")
    };
    let signs: Vec<f64> = (0..steps)
        .into_par_iter()
        .map(|k| cone_score(&space, RelationKind::Bisectrix, x.as_slice(), 1.0, &unit_direction(&space, grid_angle(k, steps))))
        .collect();
    let nonzero: Vec<f64> = signs.into_iter().filter(|v| *v != 0.0).collect();
    let sign_changes = (0..nonzero.len())
        .filter(|&k| nonzero[k].signum() != nonzero[(k + 1) % nonzero.len()].signum())
        .count();

    let r = SQRT_2 - 1.0;
    let expected = vec![Vector::from_finite(vec![r, 1.0]), Vector::from_finite(vec![r, -1.0])];
    let max_angular_error = expected
        .iter()
        .map(|e| {
            let a = e.as_slice()[1].atan2(e.as_slice()[0]);
            set.rays
                .iter()
                .map(|ray| wrap_angle(ray.angle - a).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);

    let (x0, x1, y0, y1) = (-SQRT_2 - 1.0, SQRT_2 - 1.0, -SQRT_2, SQRT_2);
    let mut boundary = Vec::with_capacity(4 * per_edge);
    for k in 0..per_edge {
        let s = k as f64 / per_edge as f64;
        boundary.push([x0 + s * (x1 - x0), y0]);
        boundary.push([x1, y0 + s * (y1 - y0)]);
        boundary.push([x1 - s * (x1 - x0), y1]);
        boundary.push([x0, y1 - s * (y1 - y0)]);
    }
    let on_boundary = |p: &[f64]| (space.norm_combo(1.0, x.as_slice(), 1.0, p) - SQRT_2).abs();
    let rectangle_max_deviation = boundary.iter().map(|p| on_boundary(p)).fold(0.0, f64::max);
    let rectangle_is_cone = boundary.iter().all(|p| {
        [0.5, 2.0].iter().all(|&b| on_boundary(&[b * p[0], b * p[1]]) <= 1e-9)
    });
    let rectangle_bisectrix_violations = boundary
        .iter()
        .filter(|p| {
            let y = Vector::from_finite(p.to_vec());
            !check_relation(&space, RelationKind::Bisectrix, &x, &y, tol)
                .map(|v| v.holds)
                .unwrap_or(false)
        })
        .count();
    Ok(LinfBisectrixReport {
        steps,
        sign_changes,
        rays: set.rays,
        expected,
        max_angular_error,
        rectangle_samples: boundary.len(),
        rectangle_max_deviation,
        rectangle_is_cone,
        rectangle_bisectrix_violations,
        deviates_from_rectangle: !rectangle_is_cone || rectangle_bisectrix_violations > 0,
    })
}
