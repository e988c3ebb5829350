//! One-dimensional helpers: golden-section minimization and bracketed roots.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a golden-section run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub arg: f64,
    pub value: f64,
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket is narrower than `rel_width·(b − a)`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, rel_width: f64) -> Minimum {
    let target = rel_width * (b - a).abs();
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // Track the best evaluation including endpoints in case the minimum sits there.
    let (fa, fb) = (f(a), f(b));
    let mut best = if fa <= fb {
        Minimum { arg: a, value: fa }
    } else {
        Minimum { arg: b, value: fb }
    };
    for _ in 0..200 {
        if (b - a).abs() <= target {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    for (arg, value) in [(x1, f1), (x2, f2)] {
        if value < best.value {
            best = Minimum { arg, value };
        }
    }
    best
}

/// Root of `f` on a sign-changing bracket `[a, b]` via the Illinois variant of
/// regula falsi, falling back to bisection steps when progress stalls.
/// Returns the endpoint-side estimate once the bracket is narrower than `xtol`.
pub fn bracketed_root<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> Option<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let mut side = 0i8;
    for it in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        // Every fourth step is a plain bisection, which bounds the worst case.
        let c = if it % 4 == 3 {
            0.5 * (a + b)
        } else {
            let c = (a * fb - b * fa) / (fb - fa);
            if c.is_finite() && c > a.min(b) && c < a.max(b) {
                c
            } else {
                0.5 * (a + b)
            }
        };
        let fc = f(c);
        if fc == 0.0 {
            return Some(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Some(if fa.abs() <= fb.abs() { a } else { b })
}

/// Plain bisection to width `xtol`; used where `f` may be discontinuous in value
/// but a sign flip is all that matters.
pub fn bisect<F: FnMut(f64) -> bool>(mut is_left: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    // `is_left(a)` is assumed true and `is_left(b)` false.
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let m = 0.5 * (a + b);
        if is_left(m) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section(|t| (t - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-12);
        assert!((m.arg - 0.3).abs() < 1e-6);
        assert!((m.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_handles_kinks_and_endpoints() {
        let m = golden_section(|t: f64| (t + 0.7).abs(), -1.0, 1.0, 1e-12);
        assert!((m.arg + 0.7).abs() < 1e-11);
        let e = golden_section(|t| t, 0.0, 1.0, 1e-12);
        assert_eq!(e.arg, 0.0);
    }

    #[test]
    fn root_of_cubic() {
        let r = bracketed_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn root_of_kinked_function() {
        let r = bracketed_root(|x: f64| if x < 0.4 { x - 0.4 } else { 10.0 * (x - 0.4) }, 0.0, 1.0, 1e-14).unwrap();
        assert!((r - 0.4).abs() < 1e-13);
    }

    #[test]
    fn bisect_locates_step() {
        let s = bisect(|x| x < 0.125, 0.0, 1.0, 1e-12);
        assert!((s - 0.125).abs() < 1e-12);
    }
}
