//! Hessian structure of generalized symmetric functions `u(x) = U(s)`,
//! `s = (1/2) sum a_i x_i^2`: the Hessian is `U' diag(a) + U'' v v^T` with
//! `v = (a_1 x_1, ..., a_n x_n)`, so its spectrum is a symmetric rank-one
//! update of a diagonal matrix and every `sigma_k` of it has a closed form.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::operators::Spectrum;
use crate::sympoly::sigma_table;

/// A pointwise radial frame: diagonal `a` (ascending, positive), the point
/// `x`, the radial coordinate `s = (1/2) sum a_i x_i^2` and the profile
/// derivatives `U'(s)`, `U''(s)` there.
#[derive(Debug, Clone)]
pub struct RadialFrame {
    a: Vec<f64>,
    x: Vec<f64>,
    s: f64,
    up: f64,
    upp: f64,
}

impl RadialFrame {
    /// Builds a frame, computing `s` from `x`. `a` must be sorted ascending
    /// and strictly positive.
    pub fn new(a: Vec<f64>, x: Vec<f64>, up: f64, upp: f64) -> Result<Self> {
        if a.len() != x.len() {
            return Err(Error::InvalidInput("a and x length mismatch".into()));
        }
        if a.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidInput("a must be strictly positive".into()));
        }
        if a.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("a must be sorted ascending".into()));
        }
        let s = 0.5 * a.iter().zip(&x).map(|(ai, xi)| ai * xi * xi).sum::<f64>();
        Ok(RadialFrame { a, x, s, up, upp })
    }

    /// Builds a frame with a prescribed `s`, verifying consistency with `x`
    /// to `1e-12` relative.
    pub fn with_s(a: Vec<f64>, x: Vec<f64>, s: f64, up: f64, upp: f64) -> Result<Self> {
        let f = Self::new(a, x, up, upp)?;
        if (f.s - s).abs() > 1e-12 * s.abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "s = {s} inconsistent with x (computed {})",
                f.s
            )));
        }
        Ok(RadialFrame { s, ..f })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn up(&self) -> f64 {
        self.up
    }

    pub fn upp(&self) -> f64 {
        self.upp
    }

    /// `v = (a_1 x_1, ..., a_n x_n)`, the rank-one direction.
    pub fn rank_one_vector(&self) -> Vec<f64> {
        self.a.iter().zip(&self.x).map(|(a, x)| a * x).collect()
    }
}

/// Hessian matrix `U' diag(a) + U'' v v^T` of the frame.
pub fn hessian_matrix(frame: &RadialFrame) -> DMatrix<f64> {
    let n = frame.a.len();
    let v = frame.rank_one_vector();
    DMatrix::from_fn(n, n, |i, j| {
        let diag = if i == j { frame.up * frame.a[i] } else { 0.0 };
        diag + frame.upp * v[i] * v[j]
    })
}

/// Gradient `D_i u = U'(s) a_i x_i`.
pub fn gradient(frame: &RadialFrame) -> Vec<f64> {
    frame
        .a
        .iter()
        .zip(&frame.x)
        .map(|(a, x)| frame.up * a * x)
        .collect()
}

/// Eigenvalues of `diag(d) + rho v v^T`, sorted ascending.
///
/// The secular solver is used first; if its trace residual exceeds
/// `1e-8` relative to the matrix scale the dense symmetric eigensolver is
/// used instead. In practice the fallback never triggers; it exists to keep
/// degenerate inputs safe.
pub fn eigen_rank_one(d: &[f64], v: &[f64], rho: f64) -> Spectrum {
    match eigen_rank_one_secular(d, v, rho) {
        Ok(s) => s,
        Err(_) => {
            let n = d.len();
            let m = DMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j { d[i] } else { 0.0 };
                diag + rho * v[i] * v[j]
            });
            Spectrum::new(dense_symmetric_eigenvalues(&m))
        }
    }
}

/// Secular-equation solver for the eigenvalues of `diag(d) + rho v v^T`.
///
/// Coordinates with `|v_i| <= 1e-14 ||v||` are deflated (their `d_i` is an
/// eigenvalue directly), clusters of equal poles keep one representative with
/// the combined weight, and the remaining roots are isolated by the pole
/// ordering and bisected to a few ulps. The secular function is strictly
/// monotone between consecutive poles, so every bracket holds exactly one
/// root.
pub fn eigen_rank_one_secular(d: &[f64], v: &[f64], rho: f64) -> Result<Spectrum> {
    if d.len() != v.len() {
        return Err(Error::InvalidInput("d and v length mismatch".into()));
    }
    let n = d.len();
    if n == 0 {
        return Ok(Spectrum::new(vec![]));
    }
    let vnorm2: f64 = v.iter().map(|x| x * x).sum();
    let scale = d
        .iter()
        .map(|x| x.abs())
        .fold(0.0f64, f64::max)
        .max(rho.abs() * vnorm2)
        .max(1e-300);
    if rho == 0.0 || vnorm2 == 0.0 {
        return Ok(Spectrum::new(d.to_vec()));
    }

    let vnorm = vnorm2.sqrt();
    let mut fixed: Vec<f64> = Vec::new();
    let mut poles: Vec<(f64, f64)> = Vec::new();
    for i in 0..n {
        if v[i].abs() <= 1e-14 * vnorm {
            fixed.push(d[i]);
        } else {
            poles.push((d[i], v[i] * v[i]));
        }
    }
    poles.sort_by(|p, q| p.0.partial_cmp(&q.0).expect("finite poles"));

    // Merge (numerically) repeated poles: m coincident poles contribute m-1
    // unchanged eigenvalues plus one pole with the summed weight.
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for (dv, w) in poles {
        match merged.last_mut() {
            Some((dm, wm)) if (dv - *dm).abs() <= 1e-15 * scale => {
                fixed.push(*dm);
                *wm += w;
            }
            _ => merged.push((dv, w)),
        }
    }

    let wsum: f64 = merged.iter().map(|p| p.1).sum();
    let p = merged.len();
    let secular = |lam: f64| -> f64 {
        1.0 + rho * merged.iter().map(|&(dv, w)| w / (dv - lam)).sum::<f64>()
    };

    let mut roots = Vec::with_capacity(p);
    for j in 0..p {
        let (lo, hi) = if rho > 0.0 {
            if j + 1 < p {
                (merged[j].0, merged[j + 1].0)
            } else {
                (merged[p - 1].0, merged[p - 1].0 + rho * wsum)
            }
        } else if j == 0 {
            (merged[0].0 + rho * wsum, merged[0].0)
        } else {
            (merged[j - 1].0, merged[j].0)
        };
        roots.push(bisect_secular(&secular, lo, hi, rho));
    }

    let mut all = fixed;
    all.extend(roots);
    if all.len() != n {
        return Err(Error::ToleranceFailure("secular root count mismatch".into()));
    }
    let trace_expected: f64 = d.iter().sum::<f64>() + rho * vnorm2;
    let trace: f64 = all.iter().sum();
    if (trace - trace_expected).abs() > 1e-8 * scale * n as f64 {
        return Err(Error::ToleranceFailure(format!(
            "secular trace residual {} too large",
            (trace - trace_expected).abs()
        )));
    }
    Ok(Spectrum::new(all))
}

/// Bisection on an open pole interval. `f` diverges at the endpoints, with
/// the sign pattern fixed by the sign of `rho`, so only interior points are
/// ever evaluated.
fn bisect_secular(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, rho: f64) -> f64 {
    // f -> -inf at the pole side and is positive at the far side for rho > 0
    // (increasing); mirrored for rho < 0 (decreasing).
    let increasing = rho > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        let go_right = if increasing { fm < 0.0 } else { fm > 0.0 };
        if fm == 0.0 {
            return mid;
        }
        if go_right {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense symmetric eigenvalue oracle (sorted ascending).
pub fn dense_symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    vals
}

/// `sigma_k(lambda(D^2 u))` through the representation formula
/// `(U')^k sigma_k(a) + U'' (U')^{k-1} sum_i (a_i x_i)^2 sigma_{k-1;i}(a)`.
pub fn sigma_k_profile(frame: &RadialFrame, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let table = sigma_table(&frame.a);
    let up_k = frame.up.powi(k as i32);
    let up_km1 = frame.up.powi(k as i32 - 1);
    let corr: f64 = (0..frame.a.len())
        .map(|i| {
            let axi = frame.a[i] * frame.x[i];
            axi * axi * table.sigma_excl(k - 1, i)
        })
        .sum();
    up_k * table.sigma(k) + frame.upp * up_km1 * corr
}

/// `sigma_n` of the shifted Hessian `D^2(u + (shift/2) |x|^2)` with
/// `shift = 2b`:
/// `sigma_n(a) prod (U' + shift/a_i) + U'' sigma_n(a) sum_i a_i x_i^2
///  prod_{j != i} (U' + shift/a_j)`.
pub fn sigma_n_shifted(frame: &RadialFrame, shift: f64) -> f64 {
    let n = frame.a.len();
    let table = sigma_table(&frame.a);
    let sig_n = table.sigma(n);
    let terms: Vec<f64> = frame.a.iter().map(|&ai| frame.up + shift / ai).collect();
    let full: f64 = terms.iter().product();
    let mut corr = 0.0;
    for i in 0..n {
        let mut prod = 1.0;
        for (j, t) in terms.iter().enumerate() {
            if j != i {
                prod *= t;
            }
        }
        corr += frame.a[i] * frame.x[i] * frame.x[i] * prod;
    }
    sig_n * full + frame.upp * sig_n * corr
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(rng: &mut ChaCha8Rng, n: usize) -> RadialFrame {
        let mut a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.4..3.0)).collect();
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let up = rng.gen_range(1.0..2.5);
        let upp = rng.gen_range(-0.4..-0.01);
        RadialFrame::new(a, x, up, upp).unwrap()
    }

    #[test]
    fn eigen_trivial_cases() {
        let s = eigen_rank_one(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0], 1.0);
        assert_eq!(s.values(), &[1.0, 2.0, 3.0]);

        for t in [0.25, 1.5, -0.2] {
            let s = eigen_rank_one(&[1.0, 1.0], &[1.0, 1.0], t);
            let expect = if t > 0.0 {
                [1.0, 1.0 + 2.0 * t]
            } else {
                [1.0 + 2.0 * t, 1.0]
            };
            for (got, want) in s.values().iter().zip(expect.iter()) {
                assert!((got - want).abs() < 1e-14, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn eigen_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.gen_range(2..=8);
            let d: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..4.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let rho = rng.gen_range(-1.5..1.5);
            let sec = eigen_rank_one_secular(&d, &v, rho).unwrap();
            let m = DMatrix::from_fn(n, n, |i, j| {
                (if i == j { d[i] } else { 0.0 }) + rho * v[i] * v[j]
            });
            let oracle = dense_symmetric_eigenvalues(&m);
            let scale = oracle.iter().fold(1.0f64, |acc, x| acc.max(x.abs()));
            for (got, want) in sec.values().iter().zip(oracle.iter()) {
                assert!(
                    (got - want).abs() <= 1e-10 * scale,
                    "secular {got} vs dense {want}"
                );
            }
        }
    }

    #[test]
    fn eigen_interlacing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.gen_range(2..=7);
            let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..4.0)).collect();
            d.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let rho: f64 = rng.gen_range(0.05..1.0);
            let tol = 1e-12;
            let up = eigen_rank_one(&d, &v, rho);
            for i in 0..n {
                assert!(up.values()[i] >= d[i] - tol);
                if i + 1 < n {
                    assert!(up.values()[i] <= d[i + 1] + tol);
                }
            }
            let down = eigen_rank_one(&d, &v, -rho);
            for i in 0..n {
                assert!(down.values()[i] <= d[i] + tol);
                if i > 0 {
                    assert!(down.values()[i] >= d[i - 1] - tol);
                }
            }
        }
    }

    #[test]
    fn hessian_degenerate_cases() {
        let f = RadialFrame::new(vec![1.0, 2.0, 3.0], vec![0.3, -0.2, 0.5], 1.7, 0.0).unwrap();
        let h = hessian_matrix(&f);
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.7 * f.a()[i] } else { 0.0 };
                assert_eq!(h[(i, j)], want);
            }
        }
        let f0 = RadialFrame::new(vec![1.0, 2.0, 3.0], vec![0.0, 0.0, 0.0], 1.3, -5.0).unwrap();
        let h0 = hessian_matrix(&f0);
        assert_eq!(h0[(0, 1)], 0.0);
        assert_eq!(h0[(2, 2)], 1.3 * 3.0);
    }

    #[test]
    fn hessian_matches_finite_differences() {
        // Quadratic test profile U(s) = 3 + 2 s - 0.25 s^2.
        let a = vec![0.7, 1.1, 2.3];
        let u = |x: &[f64]| {
            let s = 0.5 * a.iter().zip(x).map(|(ai, xi)| ai * xi * xi).sum::<f64>();
            3.0 + 2.0 * s - 0.25 * s * s
        };
        let x0 = [0.4, -0.8, 0.6];
        let s0 = 0.5 * a.iter().zip(&x0).map(|(ai, xi)| ai * xi * xi).sum::<f64>();
        let frame = RadialFrame::new(a.clone(), x0.to_vec(), 2.0 - 0.5 * s0, -0.5).unwrap();
        let h = hessian_matrix(&frame);
        let grad = gradient(&frame);
        let eps = 1e-5;
        for i in 0..3 {
            let mut xp = x0;
            let mut xm = x0;
            xp[i] += eps;
            xm[i] -= eps;
            let fd = (u(&xp) - u(&xm)) / (2.0 * eps);
            assert!((fd - grad[i]).abs() < 1e-6);
            for j in 0..3 {
                let mut xpp = x0;
                let mut xpm = x0;
                let mut xmp = x0;
                let mut xmm = x0;
                xpp[i] += eps;
                xpp[j] += eps;
                xpm[i] += eps;
                xpm[j] -= eps;
                xmp[i] -= eps;
                xmp[j] += eps;
                xmm[i] -= eps;
                xmm[j] -= eps;
                let fd = (u(&xpp) - u(&xpm) - u(&xmp) + u(&xmm)) / (4.0 * eps * eps);
                assert!((fd - h[(i, j)]).abs() < 1e-6, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn sigma_profile_matches_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let n = rng.gen_range(3..=8);
            let frame = random_frame(&mut rng, n);
            let d: Vec<f64> = frame.a().iter().map(|&ai| frame.up() * ai).collect();
            let v = frame.rank_one_vector();
            let spec = eigen_rank_one(&d, &v, frame.upp());
            let table = sigma_table(spec.values());
            for k in 1..=n {
                let formula = sigma_k_profile(&frame, k);
                let oracle = table.sigma(k);
                assert!(
                    (formula - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
                    "k = {k}: {formula} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn sigma_n_profile_axis_point() {
        // Along a coordinate axis sigma_n reduces to
        // (U')^n sigma_n(a) + 2 s U'' (U')^{n-1} sigma_n(a).
        let a = vec![0.5, 1.0, 2.0];
        let s = 1.7f64;
        for i0 in 0..3 {
            let mut x = vec![0.0; 3];
            x[i0] = (2.0 * s / a[i0]).sqrt();
            let frame = RadialFrame::with_s(a.clone(), x, s, 1.4, -0.2).unwrap();
            let sig_n: f64 = a.iter().product();
            let expect = 1.4f64.powi(3) * sig_n + 2.0 * s * (-0.2) * 1.4f64.powi(2) * sig_n;
            let got = sigma_k_profile(&frame, 3);
            assert!((got - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_n_shifted_matches_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.gen_range(3..=7);
            let frame = random_frame(&mut rng, n);
            let shift = rng.gen_range(0.2..2.0);
            let v = frame.rank_one_vector();
            let m = DMatrix::from_fn(n, n, |i, j| {
                let diag = if i == j {
                    frame.up() * frame.a()[i] + shift
                } else {
                    0.0
                };
                diag + frame.upp() * v[i] * v[j]
            });
            let oracle = m.lu().determinant();
            let got = sigma_n_shifted(&frame, shift);
            assert!(
                (got - oracle).abs() <= 1e-9 * oracle.abs().max(1.0),
                "{got} vs {oracle}"
            );
        }
    }

    #[test]
    fn sigma_n_shifted_degenerate() {
        let a = vec![1.0, 2.0, 4.0];
        let shift = 0.6;
        let f = RadialFrame::new(a.clone(), vec![0.0; 3], 1.5, -3.0).unwrap();
        let expect: f64 = a.iter().map(|&ai| 1.5 * ai + shift).product();
        let got = sigma_n_shifted(&f, shift);
        assert!((got - expect).abs() < 1e-12 * expect.abs());
    }

    #[test]
    fn gradient_trivial() {
        let f = RadialFrame::new(vec![1.0, 1.0, 1.0], vec![0.2, -0.4, 0.9], 1.0, -0.1).unwrap();
        let g = gradient(&f);
        assert_eq!(g, vec![0.2, -0.4, 0.9]);
        let f0 = RadialFrame::new(vec![1.0, 2.0, 3.0], vec![0.0; 3], 2.0, -0.1).unwrap();
        assert_eq!(gradient(&f0), vec![0.0; 3]);
    }
}
