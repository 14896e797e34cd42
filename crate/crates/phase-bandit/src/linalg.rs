//! Small dense-vector helpers shared across the crate.

/// Inner product of two equal-length vectors.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

/// `a + s * b`, elementwise.
pub fn add_scaled(a: &[f64], s: f64, b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    add_scaled(a, -1.0, b)
}

/// Unit vector in the direction of `a`, or `None` when `a` is numerically zero.
pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n <= 1e-12 {
        None
    } else {
        Some(scaled(a, 1.0 / n))
    }
}

/// Squared distance between two vectors.
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = [1.0, 2.0, 2.0];
        let b = [2.0, 0.0, -1.0];
        assert_eq!(dot(&a, &b), 0.0);
        assert_eq!(norm(&a), 3.0);
        assert_eq!(sub(&a, &a), vec![0.0, 0.0, 0.0]);
        let u = normalized(&a).unwrap();
        assert!((norm(&u) - 1.0).abs() < 1e-15);
        assert!(normalized(&[0.0, 0.0]).is_none());
    }
}
