//! One-dimensional search: golden section for unimodal functions and
//! bisection on monotone predicates.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn clean(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
/// NaN values count as `-∞`. Returns the best point evaluated.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = clean(f(x1));
    let mut f2 = clean(f(x2));
    let (mut best_x, mut best_f) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = clean(f(x2));
            if f2 > best_f {
                best_f = f2;
                best_x = x2;
            }
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = clean(f(x1));
            if f1 > best_f {
                best_f = f1;
                best_x = x1;
            }
        }
    }
    (best_x, best_f)
}

/// Golden-section search for the minimum of a unimodal `f`.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_max(|x| -f(x), lo, hi, tol);
    (x, -v)
}

/// Scan a sorted grid, then refine the best cell by golden section.
///
/// `f` must be unimodal on the bracket formed by the neighbours of the grid
/// maximum (true for concave functions). Ties keep the first grid point.
pub fn grid_refine_max<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64], tol: f64) -> (f64, f64) {
    assert!(!grid.is_empty(), "grid_refine_max needs a grid");
    let values: Vec<f64> = grid.iter().map(|&x| clean(f(x))).collect();
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let (mut bx, mut bv) = (grid[best], values[best]);
    if grid.len() > 1 {
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        if hi > lo {
            let (x, v) = golden_max(&mut f, lo, hi, tol);
            if v > bv {
                bx = x;
                bv = v;
            }
        }
    }
    (bx, bv)
}

/// Minimum counterpart of [`grid_refine_max`].
pub fn grid_refine_min<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64], tol: f64) -> (f64, f64) {
    let (x, v) = grid_refine_max(|x| -f(x), grid, tol);
    (x, -v)
}

/// Boundary of a monotone predicate that is `false` at `lo` and `true` at
/// `hi`. Returns the midpoint of the final bracket of width `<= tol`.
pub fn bisect_transition<P: FnMut(f64) -> bool>(mut pred: P, lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..400 {
        if b - a <= tol {
            break;
        }
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x| -(x - 0.3) * (x - 0.3) + 2.0, 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-5);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn grid_refine_at_boundary() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let (x, v) = grid_refine_max(|x| x, &grid, 1e-12);
        assert_eq!(x, 1.0);
        assert_eq!(v, 1.0);
        let (x, _) = grid_refine_min(|x| (x - 0.55).abs(), &grid, 1e-12);
        assert!((x - 0.55).abs() < 1e-9);
    }

    #[test]
    fn bisection_locates_threshold() {
        let t = bisect_transition(|x| x >= std::f64::consts::E, 0.0, 10.0, 1e-13);
        assert!((t - std::f64::consts::E).abs() < 1e-12);
    }
}
