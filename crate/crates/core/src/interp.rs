//! Cubic Hermite interpolation on a node pair; derivatives are in the
//! parameter of the nodes.

pub(crate) fn hermite_eval(t0: f64, t1: f64, y0: f64, y1: f64, m0: f64, m1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let th = (t - t0) / h;
    let th2 = th * th;
    let th3 = th2 * th;
    let h00 = 2.0 * th3 - 3.0 * th2 + 1.0;
    let h10 = th3 - 2.0 * th2 + th;
    let h01 = -2.0 * th3 + 3.0 * th2;
    let h11 = th3 - th2;
    y0 * h00 + h * m0 * h10 + y1 * h01 + h * m1 * h11
}

/// Derivative of the Hermite cubic with respect to the node parameter.
pub(crate) fn hermite_deriv(t0: f64, t1: f64, y0: f64, y1: f64, m0: f64, m1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let th = (t - t0) / h;
    let th2 = th * th;
    let d00 = (6.0 * th2 - 6.0 * th) / h;
    let d10 = 3.0 * th2 - 4.0 * th + 1.0;
    let d01 = (-6.0 * th2 + 6.0 * th) / h;
    let d11 = 3.0 * th2 - 2.0 * th;
    y0 * d00 + m0 * d10 + y1 * d01 + m1 * d11
}

/// Index of the interval containing `t` in a sorted node vector; clamped to
/// the boundary intervals.
pub(crate) fn locate(nodes: &[f64], t: f64) -> usize {
    debug_assert!(nodes.len() >= 2);
    let idx = nodes.partition_point(|&v| v <= t);
    idx.clamp(1, nodes.len() - 1) - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubic_exactly() {
        let f = |t: f64| 2.0 - t + 3.0 * t * t - 0.5 * t * t * t;
        let fp = |t: f64| -1.0 + 6.0 * t - 1.5 * t * t;
        let (t0, t1) = (0.3, 1.1);
        for k in 0..=10 {
            let t = t0 + (t1 - t0) * k as f64 / 10.0;
            let y = hermite_eval(t0, t1, f(t0), f(t1), fp(t0), fp(t1), t);
            let yp = hermite_deriv(t0, t1, f(t0), f(t1), fp(t0), fp(t1), t);
            assert!((y - f(t)).abs() < 1e-13);
            assert!((yp - fp(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn locate_clamps() {
        let nodes = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(locate(&nodes, -5.0), 0);
        assert_eq!(locate(&nodes, 0.5), 0);
        assert_eq!(locate(&nodes, 1.0), 1);
        assert_eq!(locate(&nodes, 2.7), 2);
        assert_eq!(locate(&nodes, 9.0), 2);
    }
}
