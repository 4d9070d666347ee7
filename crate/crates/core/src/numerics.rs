//! Small numerical kernels shared by the evaluators.

use std::ops::AddAssign;

/// Kahan-Babuska-Neumaier compensated accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for NeumaierSum {
    fn add_assign(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = NeumaierSum::new();
    for x in xs {
        acc += x;
    }
    acc.value()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm, rescaled so tiny or huge coordinates neither underflow nor
/// overflow.
pub fn norm(a: &[f64]) -> f64 {
    if a.iter().any(|x| x.is_nan()) {
        return f64::NAN;
    }
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    a.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt() * scale
}

/// Root of a strictly decreasing function by exponential bracketing from `start`
/// followed by bisection. Returns `None` if no sign change is found within
/// `|s - start| <= limit`.
pub fn decreasing_root<F>(g: F, start: f64, limit: f64, max_bisections: usize) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let g0 = g(start);
    if g0 == 0.0 {
        return Some(start);
    }
    // g decreasing: positive means the root lies ahead.
    let dir = if g0 > 0.0 { 1.0 } else { -1.0 };
    let mut step = 1.0;
    let mut near = start;
    let mut far;
    loop {
        far = start + dir * step;
        let gf = g(far);
        if gf == 0.0 {
            return Some(far);
        }
        if (gf > 0.0) != (g0 > 0.0) {
            break;
        }
        if step > limit {
            return None;
        }
        near = far;
        step *= 2.0;
    }
    let (mut lo, mut hi) = if dir > 0.0 { (near, far) } else { (far, near) };
    for _ in 0..max_bisections {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let total = compensated_sum([1e100, 1.0, -1e100]);
        assert_eq!(total, 1.0);
        let naive: f64 = [1e100, 1.0, -1e100].iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn bracketed_root_of_line() {
        let r = decreasing_root(|s| 3.0 - s, 0.0, 1e3, 200).unwrap();
        assert!((r - 3.0).abs() < 1e-12);
        let r = decreasing_root(|s| -7.5 - s, 0.0, 1e3, 200).unwrap();
        assert!((r + 7.5).abs() < 1e-12);
        assert!(decreasing_root(|_| 1.0, 0.0, 1e3, 200).is_none());
    }
}
