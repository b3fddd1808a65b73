//! Assembly of punctured-space solutions from a radial profile and a
//! quadratic frame `(A, beta, c, u0)`, for general symmetric positive `A`
//! through its eigendecomposition `A = O^T Lambda O`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odeflow::Profile;
use crate::operators::{OperatorParams, Spectrum};
use crate::radial::eigen_rank_one;

/// The asymptotic quadratic `(1/2) x^T A x + beta x + c` plus the prescribed
/// value at the puncture `u0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadraticModel {
    a_matrix: DMatrix<f64>,
    eigvals: Vec<f64>,
    // A = o^T diag(eigvals) o; rows of `o` are the eigenvectors.
    o: DMatrix<f64>,
    beta: Vec<f64>,
    c: f64,
    u0: f64,
}

impl QuadraticModel {
    /// Builds the frame from a full symmetric positive matrix. Checks the
    /// eigendecomposition round trip to `1e-12` and `G_tau(lambda(A)) = C0`
    /// to `1e-8`.
    pub fn from_matrix(
        params: &OperatorParams,
        a: DMatrix<f64>,
        beta: Vec<f64>,
        c: f64,
        u0: f64,
    ) -> Result<Self> {
        let n = params.dim();
        if a.nrows() != n || a.ncols() != n || beta.len() != n {
            return Err(Error::InvalidInput("matrix/vector dimension mismatch".into()));
        }
        let scale = a.iter().fold(1.0f64, |m, &x| m.max(x.abs()));
        for i in 0..n {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput("A is not symmetric".into()));
                }
            }
        }
        let eig = a.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            eig.eigenvalues[i]
                .partial_cmp(&eig.eigenvalues[j])
                .expect("finite eigenvalues")
        });
        let eigvals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        // Row k of `o` is the eigenvector of the k-th smallest eigenvalue.
        let o = DMatrix::from_fn(n, n, |k, j| eig.eigenvectors[(j, order[k])]);
        Self::assemble(params, a, eigvals, o, beta, c, u0)
    }

    /// Builds a diagonal frame directly from eigenvalues (`O = I`).
    pub fn from_eigenvalues(
        params: &OperatorParams,
        mut eigvals: Vec<f64>,
        beta: Vec<f64>,
        c: f64,
        u0: f64,
    ) -> Result<Self> {
        let n = params.dim();
        if eigvals.len() != n || beta.len() != n {
            return Err(Error::InvalidInput("dimension mismatch".into()));
        }
        eigvals.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { eigvals[i] } else { 0.0 });
        let o = DMatrix::identity(n, n);
        Self::assemble(params, a, eigvals, o, beta, c, u0)
    }

    fn assemble(
        params: &OperatorParams,
        a: DMatrix<f64>,
        eigvals: Vec<f64>,
        o: DMatrix<f64>,
        beta: Vec<f64>,
        c: f64,
        u0: f64,
    ) -> Result<Self> {
        let n = params.dim();
        if eigvals.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::DomainViolation(
                "A must be symmetric positive definite".into(),
            ));
        }
        let scale = eigvals.last().unwrap().max(1.0);
        let id_defect = (&o * o.transpose() - DMatrix::<f64>::identity(n, n))
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        if id_defect > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "O is not orthogonal (defect {id_defect})"
            )));
        }
        let lam = DMatrix::from_fn(n, n, |i, j| if i == j { eigvals[i] } else { 0.0 });
        let recon_defect = (o.transpose() * &lam * &o - &a)
            .iter()
            .fold(0.0f64, |m, &x| m.max(x.abs()));
        if recon_defect > 1e-12 * scale {
            return Err(Error::InvalidInput(format!(
                "eigendecomposition does not reconstruct A (defect {recon_defect})"
            )));
        }
        let level_defect =
            (params.eval_g(&Spectrum::new(eigvals.clone()))? - params.level()).abs();
        if level_defect > 1e-8 {
            return Err(Error::InvalidInput(format!(
                "G_tau(lambda(A)) misses C0 by {level_defect}"
            )));
        }
        if c < u0 - 1e-12 {
            return Err(Error::InvalidInput(format!(
                "asymptotic constant c = {c} must be >= u0 = {u0}"
            )));
        }
        Ok(QuadraticModel {
            a_matrix: a,
            eigvals,
            o,
            beta,
            c,
            u0,
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a_matrix
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigvals
    }

    /// Orthogonal frame with `A = O^T Lambda O`.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.o
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    /// `(1/2) x^T A x + beta x + c`.
    pub fn quadratic_at(&self, x: &[f64]) -> f64 {
        let xv = DVector::from_column_slice(x);
        let ax = &self.a_matrix * &xv;
        0.5 * xv.dot(&ax) + dot(&self.beta, x) + self.c
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Construction kind of an assembled solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionKind {
    Quadratic,
    Subsolution,
    ExactIsotropic,
    ExactMa,
}

/// A generalized symmetric function on punctured space, evaluated through
/// `u(x) = U((1/2) y^T Lambda y) + beta x`, `y = O x`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PuncturedSolution {
    params: OperatorParams,
    model: QuadraticModel,
    profile: Profile,
}

/// Pointwise evaluation data: the value, gradient and Hessian spectrum
/// together with the radial frame quantities behind them.
#[derive(Debug, Clone)]
pub struct PointEval {
    pub u: f64,
    pub du: Vec<f64>,
    pub spectrum: Spectrum,
    /// Rotated coordinates `y = O x`.
    pub y: Vec<f64>,
    pub s: f64,
    pub up: f64,
    pub upp: f64,
}

/// Gradient at the puncture.
#[derive(Debug, Clone)]
pub enum OriginGradient {
    /// The profile has bounded slope at `s = 0`; the gradient is `beta`.
    Vector(Vec<f64>),
    /// Conical profiles have a set-valued gradient image; along the `i`-th
    /// eigen-axis the modulus tends to `scale * sqrt(a_i)`.
    Conical { radial_scale: f64 },
}

impl PuncturedSolution {
    /// Assembles a solution, checking that the profile and frame agree:
    /// `u0` matches and `c = u0 + mu` within `1e-6` (when `mu` is finite).
    pub fn new(params: OperatorParams, model: QuadraticModel, profile: Profile) -> Result<Self> {
        if (profile.u0() - model.u0()).abs() > 1e-12 * model.u0().abs().max(1.0) {
            return Err(Error::InvalidInput(format!(
                "profile u0 = {} disagrees with model u0 = {}",
                profile.u0(),
                model.u0()
            )));
        }
        if let Some(mu) = profile.mu() {
            let defect = (model.c() - model.u0() - mu).abs();
            if defect > 1e-6 {
                return Err(Error::InvalidInput(format!(
                    "c - u0 = {} disagrees with mu = {mu}",
                    model.c() - model.u0()
                )));
            }
        }
        if matches!(profile, Profile::ExactMa(_)) && params.regime() != crate::operators::Regime::MongeAmpere
        {
            return Err(Error::RegimeMismatch(
                "exact Monge-Ampere profiles require the tau = 0 regime".into(),
            ));
        }
        Ok(PuncturedSolution {
            params,
            model,
            profile,
        })
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn model(&self) -> &QuadraticModel {
        &self.model
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Mutable access to the profile; used by artifact tooling (tamper
    /// tests), not by regular callers.
    pub fn profile_mut(&mut self) -> &mut Profile {
        &mut self.profile
    }

    pub fn kind(&self) -> SolutionKind {
        match &self.profile {
            Profile::Quadratic { .. } => SolutionKind::Quadratic,
            Profile::Shooting(_) => SolutionKind::Subsolution,
            Profile::ExactIsotropic(_) => SolutionKind::ExactIsotropic,
            Profile::ExactMa(_) => SolutionKind::ExactMa,
        }
    }

    fn rotate(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let o = self.model.frame();
        (0..n)
            .map(|i| (0..n).map(|j| o[(i, j)] * x[j]).sum())
            .collect()
    }

    fn rotate_back(&self, y: &[f64]) -> Vec<f64> {
        let n = y.len();
        let o = self.model.frame();
        (0..n)
            .map(|i| (0..n).map(|j| o[(j, i)] * y[j]).sum())
            .collect()
    }

    fn s_of(&self, y: &[f64]) -> f64 {
        0.5 * self
            .model
            .eigenvalues()
            .iter()
            .zip(y)
            .map(|(a, yi)| a * yi * yi)
            .sum::<f64>()
    }

    /// Full evaluation at `x != 0`: value, gradient, Hessian spectrum.
    pub fn evaluate(&self, x: &[f64]) -> Result<PointEval> {
        if x.len() != self.params.dim() {
            return Err(Error::InvalidInput("point dimension mismatch".into()));
        }
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::OriginHessian);
        }
        let y = self.rotate(x);
        let s = self.s_of(&y);
        let up = self.profile.psi_at(s);
        let upp = self.profile.dpsi_at(s);
        let a = self.model.eigenvalues();
        let u = self.profile.u_at(s) + dot(self.model.beta(), x);
        let grad_y: Vec<f64> = a.iter().zip(&y).map(|(ai, yi)| up * ai * yi).collect();
        let mut du = self.rotate_back(&grad_y);
        for (d, b) in du.iter_mut().zip(self.model.beta()) {
            *d += b;
        }
        let d: Vec<f64> = a.iter().map(|&ai| up * ai).collect();
        let v: Vec<f64> = a.iter().zip(&y).map(|(ai, yi)| ai * yi).collect();
        let spectrum = eigen_rank_one(&d, &v, upp);
        Ok(PointEval {
            u,
            du,
            spectrum,
            y,
            s,
            up,
            upp,
        })
    }

    /// `u(x)`, defined everywhere including the puncture.
    pub fn value(&self, x: &[f64]) -> f64 {
        let y = self.rotate(x);
        let s = self.s_of(&y);
        self.profile.u_at(s) + dot(self.model.beta(), x)
    }

    /// Gradient, defined at the puncture through the profile's origin
    /// behavior.
    pub fn gradient(&self, x: &[f64]) -> OriginGradient {
        if x.iter().all(|&v| v == 0.0) {
            if self.profile.conical_origin() {
                return OriginGradient::Conical {
                    radial_scale: self.profile.origin_scale(),
                };
            }
            return OriginGradient::Vector(self.model.beta().to_vec());
        }
        let ev = self.evaluate(x).expect("x != 0");
        OriginGradient::Vector(ev.du)
    }

    /// Reflection `x~ = O^T diag(signs) O x` across the eigen-axes.
    pub fn reflect(&self, x: &[f64], signs: &[f64]) -> Vec<f64> {
        let mut y = self.rotate(x);
        for (yi, sg) in y.iter_mut().zip(signs) {
            *yi *= sg;
        }
        self.rotate_back(&y)
    }

    /// `(1/2) x^T A x + beta x + c - u(x)`; nonnegative for every
    /// constructed kind, zero identically for the quadratic kind.
    pub fn comparison_gap(&self, x: &[f64]) -> f64 {
        self.model.quadratic_at(x) - self.value(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odeflow::{build_profile, shoot_alpha, GData, SolveControls};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quadratic_solution(eigvals: Vec<f64>, beta: Vec<f64>, c: f64) -> PuncturedSolution {
        let params = OperatorParams::log_quotient_matching(1.0, &eigvals).unwrap();
        let model =
            QuadraticModel::from_eigenvalues(&params, eigvals, beta, c, c).unwrap();
        PuncturedSolution::new(params, model, Profile::Quadratic { u0: c }).unwrap()
    }

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let qr = m.qr();
        qr.q()
    }

    #[test]
    fn quadratic_kind_matches_formula() {
        let sol = quadratic_solution(vec![1.0, 2.0, 3.0], vec![0.5, -1.0, 0.25], 2.0);
        let x = [0.7, -0.3, 1.1];
        let ev = sol.evaluate(&x).unwrap();
        let expect = sol.model().quadratic_at(&x);
        assert!((ev.u - expect).abs() < 1e-12);
        assert_eq!(sol.comparison_gap(&x), expect - ev.u);
        for (got, want) in ev.spectrum.values().iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-10);
        }
        // Gradient: A x + beta.
        let want_grad = [1.0 * 0.7 + 0.5, 2.0 * -0.3 - 1.0, 3.0 * 1.1 + 0.25];
        for (g, w) in ev.du.iter().zip(want_grad) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn subsolution_diagonal_matches_radial_formulas() {
        let a = vec![1.0, 2.0, 2.0];
        let gd = GData::from_eigenvalues(1.0, a.clone()).unwrap();
        let controls = SolveControls::default();
        let alpha = shoot_alpha(&gd, 1.0, &controls).unwrap();
        let profile = build_profile(&gd, alpha, 0.5, &controls).unwrap();
        let mu = profile.mu().unwrap();
        let params = gd.params().clone();
        let model =
            QuadraticModel::from_eigenvalues(&params, a.clone(), vec![0.0; 3], 0.5 + mu, 0.5)
                .unwrap();
        let sol =
            PuncturedSolution::new(params, model, Profile::Shooting(profile.clone())).unwrap();

        let x = [0.4, -0.9, 0.3];
        let s = 0.5 * (a[0] * x[0] * x[0] + a[1] * x[1] * x[1] + a[2] * x[2] * x[2]);
        let ev = sol.evaluate(&x).unwrap();
        assert!((ev.s - s).abs() < 1e-14);
        assert!((ev.u - (profile.u_at(s))).abs() < 1e-12);
        assert!((ev.up - profile.psi_at(s)).abs() < 1e-14);
        // u(0) = u0, gap(0) = c - u0 = mu.
        assert!((sol.value(&[0.0; 3]) - 0.5).abs() < 1e-13);
        assert!((sol.comparison_gap(&[0.0; 3]) - mu).abs() < 1e-12);
    }

    #[test]
    fn rotated_frame_is_covariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let eig = vec![1.0, 2.0, 2.0];
        let params = OperatorParams::log_quotient_matching(1.0, &eig).unwrap();
        let diag_model =
            QuadraticModel::from_eigenvalues(&params, eig.clone(), vec![0.0; 3], 1.0, 1.0)
                .unwrap();
        let diag_sol =
            PuncturedSolution::new(params.clone(), diag_model, Profile::Quadratic { u0: 1.0 })
                .unwrap();

        let q = random_orthogonal(3, &mut rng);
        let lam = DMatrix::from_fn(3, 3, |i, j| if i == j { eig[i] } else { 0.0 });
        let a_full = q.transpose() * &lam * &q;
        let model = QuadraticModel::from_matrix(&params, a_full, vec![0.0; 3], 1.0, 1.0).unwrap();
        let sol =
            PuncturedSolution::new(params, model, Profile::Quadratic { u0: 1.0 }).unwrap();

        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if x.iter().all(|&v| v == 0.0) {
                continue;
            }
            let ev = sol.evaluate(&x).unwrap();
            // Spectrum equals the diagonal solution's spectrum at O x.
            let ox = sol.rotate(&x);
            let ev_diag = diag_sol.evaluate(&ox).unwrap();
            for (g, w) in ev.spectrum.values().iter().zip(ev_diag.spectrum.values()) {
                assert!((g - w).abs() < 1e-10);
            }
            assert!((ev.u - ev_diag.u).abs() < 1e-10);
        }
    }

    #[test]
    fn reflection_preserves_u_minus_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sol = quadratic_solution(vec![1.0, 2.0, 3.0], vec![0.3, -0.7, 0.1], 1.5);
        let x = [0.9, 0.4, -1.3];
        let id = sol.reflect(&x, &[1.0, 1.0, 1.0]);
        for (a, b) in id.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
        let neg = sol.reflect(&x, &[-1.0, -1.0, -1.0]);
        for (a, b) in neg.iter().zip(&x) {
            assert!((a + b).abs() < 1e-14);
        }
        for mask in 0..8u32 {
            let signs: Vec<f64> = (0..3)
                .map(|i| if mask & (1 << i) != 0 { -1.0 } else { 1.0 })
                .collect();
            let xr = sol.reflect(&x, &signs);
            let lhs = sol.value(&xr) - dot(sol.model().beta(), &xr);
            let rhs = sol.value(&x) - dot(sol.model().beta(), &x);
            assert!((lhs - rhs).abs() < 1e-10);
            let _ = rng.gen::<f64>();
        }
    }

    #[test]
    fn origin_gradient_kinds() {
        let sol = quadratic_solution(vec![1.0, 1.0, 1.0], vec![0.2, 0.0, -0.1], 0.0);
        match sol.gradient(&[0.0; 3]) {
            OriginGradient::Vector(v) => assert_eq!(v, vec![0.2, 0.0, -0.1]),
            _ => panic!("quadratic kind has a gradient vector at 0"),
        }

        let params = OperatorParams::monge_ampere(3, 0.0).unwrap();
        let profile = crate::odeflow::ma_closed_form(3, 0.0, 1.0, &[1.0, 1.0, 1.0]).unwrap();
        let mu = profile.mu();
        let model = QuadraticModel::from_eigenvalues(
            &params,
            vec![1.0, 1.0, 1.0],
            vec![0.0; 3],
            mu,
            0.0,
        )
        .unwrap();
        let sol =
            PuncturedSolution::new(params, model, Profile::ExactMa(profile)).unwrap();
        match sol.gradient(&[0.0; 3]) {
            OriginGradient::Conical { radial_scale } => {
                assert!((radial_scale - 1.0).abs() < 1e-12)
            }
            _ => panic!("conical kind"),
        }
    }

    #[test]
    fn model_rejections() {
        let params = OperatorParams::log_quotient_matching(1.0, &[1.0, 1.0, 1.0]).unwrap();
        // c < u0.
        assert!(QuadraticModel::from_eigenvalues(
            &params,
            vec![1.0, 1.0, 1.0],
            vec![0.0; 3],
            -1.0,
            0.0
        )
        .is_err());
        // Level mismatch.
        assert!(QuadraticModel::from_eigenvalues(
            &params,
            vec![1.0, 1.0, 2.0],
            vec![0.0; 3],
            0.0,
            0.0
        )
        .is_err());
        // Nonpositive A.
        assert!(QuadraticModel::from_eigenvalues(
            &params,
            vec![-1.0, 1.0, 1.0],
            vec![0.0; 3],
            0.0,
            0.0
        )
        .is_err());
    }
}
