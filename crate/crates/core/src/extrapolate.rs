//! Richardson extrapolation of sequences sampled on a geometric step grid.

use serde::{Deserialize, Serialize};

use crate::num::ext_real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    /// Extrapolated limit as the step goes to zero.
    #[serde(with = "ext_real")]
    pub value: f64,
    /// The same extrapolation from one grid point coarser.
    #[serde(with = "ext_real")]
    pub previous: f64,
    /// Leading error order `p`; the table eliminates `p, 2p, ...`.
    pub order: f64,
    /// `|value - previous| <= tol·|value|`.
    pub stable: bool,
    /// Raw sequence was not monotone; `value` is the finest raw entry.
    pub fallback: bool,
}

/// Extrapolate `values[i] ≈ L + c₁ h_i^p + c₂ h_i^{2p} + …` to `h → 0`.
///
/// `steps` must be strictly decreasing and roughly geometric. At most
/// `levels + 2` of the finest entries are used.
pub fn richardson_to_zero(steps: &[f64], values: &[f64], order: f64, levels: usize, tol: f64) -> Extrapolation {
    assert_eq!(steps.len(), values.len());
    assert!(!steps.is_empty());
    let n = steps.len();
    let last = values[n - 1];

    if values.iter().any(|v| v.is_infinite()) {
        let all_inf = values.iter().all(|v| *v == last);
        return Extrapolation {
            value: last,
            previous: values[n.saturating_sub(2)],
            order,
            stable: all_inf,
            fallback: !all_inf,
        };
    }
    if n == 1 {
        return Extrapolation {
            value: last,
            previous: last,
            order,
            stable: false,
            fallback: true,
        };
    }

    let levels = levels.min(n - 2);
    let used = levels + 2;
    let h = &steps[n - used..];
    let v = &values[n - used..];

    let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let noise = 1e-13 * scale;
    let mut sign = 0.0;
    let mut monotone = true;
    for w in v.windows(2) {
        let d = w[1] - w[0];
        if d.abs() <= noise {
            continue;
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            monotone = false;
        }
    }
    // Constant to within rounding: nothing to extrapolate.
    let spread = v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(x)) - v.iter().fold(f64::INFINITY, |m, &x| m.min(x));
    if spread <= 1e-9 * scale {
        return Extrapolation {
            value: last,
            previous: v[used - 2],
            order,
            stable: true,
            fallback: false,
        };
    }
    if !monotone {
        return Extrapolation {
            value: last,
            previous: v[used - 2],
            order,
            stable: false,
            fallback: true,
        };
    }

    // Neville-style table on the used points.
    let mut table: Vec<Vec<f64>> = v.iter().map(|&x| vec![x]).collect();
    for k in 1..=levels {
        for i in k..used {
            let ratio = h[i - k] / h[i];
            let factor = ratio.powf(order) - 1.0;
            let t = table[i][k - 1] + (table[i][k - 1] - table[i - 1][k - 1]) / factor;
            table[i].push(t);
        }
    }
    let value = table[used - 1][levels];
    let previous = table[used - 2][levels];
    let stable = (value - previous).abs() <= tol * value.abs().max(1e-300);
    Extrapolation {
        value,
        previous,
        order,
        stable,
        fallback: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_first_two_orders() {
        let steps: Vec<f64> = (0..6).map(|i| 0.1 * 0.5_f64.powi(i)).collect();
        let values: Vec<f64> = steps.iter().map(|h| 1.0 + 0.5 * h + h * h / 3.0).collect();
        let e = richardson_to_zero(&steps, &values, 1.0, 2, 1e-6);
        assert!((e.value - 1.0).abs() < 1e-9, "{e:?}");
        assert!(e.stable && !e.fallback);
    }

    #[test]
    fn constant_sequence_is_exact() {
        let steps = [1e-2, 1e-3, 1e-4, 1e-5];
        let e = richardson_to_zero(&steps, &[2.0; 4], 1.0, 2, 1e-9);
        assert_eq!(e.value, 2.0);
        assert!(e.stable);
    }

    #[test]
    fn zigzag_falls_back() {
        let steps = [1e-2, 1e-3, 1e-4, 1e-5];
        let e = richardson_to_zero(&steps, &[1.0, 1.2, 0.9, 1.1], 1.0, 2, 1e-3);
        assert!(e.fallback);
        assert_eq!(e.value, 1.1);
    }
}
