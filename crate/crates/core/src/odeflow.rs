//! The radial ODE flow behind the log-quotient construction.
//!
//! After the substitution `t = ln(1+s)` the initial value problem
//! `psi'(s) = g(psi)/(s+1)` becomes autonomous and is integrated with an
//! adaptive embedded Runge-Kutta stepper. The numerator of `g` is evaluated
//! in the factored form
//!
//! `psi^n - c0 prod(psi + 2b/a_i) = (psi - 1) * P(psi)`
//!
//! (telescoping the product difference against the level identity
//! `c0 prod(1 + 2b/a_i) = 1`), which makes `g(1) = 0` exact in floating
//! point and keeps full relative accuracy in the tail where `psi - 1`
//! underflows toward zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interp::{hermite_deriv, hermite_eval, locate};
use crate::ivp::{dopri5, StepOpts};
use crate::operators::{OperatorParams, Regime};
use crate::quad::adaptive_simpson;
use crate::sympoly::{delta0, DecayExponent};

/// Grid data of one log-quotient configuration: operator parameters, the
/// eigenvalues `a` of the asymptotic matrix, the level constant `c0`, the
/// decay exponent and `g'(1) = -delta0/2`.
#[derive(Debug, Clone)]
pub struct GData {
    params: OperatorParams,
    a: Vec<f64>,
    c_over: Vec<f64>, // 2b / a_i
    c0: f64,
    delta: DecayExponent,
    gprime1: f64,
}

impl GData {
    /// Builds the data, rejecting inputs that violate the level identity
    /// `c0 prod(1 + 2b/a_i) = 1` beyond `1e-10`.
    pub fn new(params: OperatorParams, a: Vec<f64>) -> Result<Self> {
        if params.regime() != Regime::LogQuotient {
            return Err(Error::RegimeMismatch(format!(
                "the radial flow is defined for the log-quotient regime, got {}",
                params.regime()
            )));
        }
        if a.len() != params.dim() {
            return Err(Error::InvalidInput(format!(
                "eigenvalue count {} does not match dimension {}",
                a.len(),
                params.dim()
            )));
        }
        if a.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::InvalidInput("eigenvalues must be positive".into()));
        }
        if a.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("eigenvalues must be sorted ascending".into()));
        }
        let b = params.b().expect("log-quotient has b");
        let c0 = params.c0().expect("log-quotient has c0");
        let c_over: Vec<f64> = a.iter().map(|&ai| 2.0 * b / ai).collect();
        let prod: f64 = c_over.iter().map(|&c| 1.0 + c).product();
        let defect = (c0 * prod - 1.0).abs();
        if defect > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "level identity violated: |c0 prod(1 + 2b/a_i) - 1| = {defect}"
            )));
        }
        let delta = delta0(&params, &a)?;
        let gprime1 = -delta.delta0 / 2.0;
        Ok(GData {
            params,
            a,
            c_over,
            c0,
            delta,
            gprime1,
        })
    }

    /// Convenience constructor: derives the level from the eigenvalues so
    /// the identity holds by construction.
    pub fn from_eigenvalues(b: f64, mut a: Vec<f64>) -> Result<Self> {
        a.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        let params = OperatorParams::log_quotient_matching(b, &a)?;
        Self::new(params, a)
    }

    pub fn params(&self) -> &OperatorParams {
        &self.params
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.a
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn delta(&self) -> &DecayExponent {
        &self.delta
    }

    pub fn g_prime_at_one(&self) -> f64 {
        self.gprime1
    }

    pub fn admissible(&self) -> bool {
        self.delta.admissible
    }

    /// `P(psi)` and `Q(psi)` of the factored numerator/denominator:
    /// `g = -(psi - 1) P / (2 Q)`.
    fn p_q(&self, psi: f64) -> (f64, f64) {
        let n = self.a.len();
        // P = sum psi^k - c0 sum_i prod_{j<i}(psi + c_j) prod_{j>i}(1 + c_j)
        let mut geom = 0.0;
        let mut pk = 1.0;
        for _ in 0..n {
            geom += pk;
            pk *= psi;
        }
        let mut suffix = vec![1.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] * (1.0 + self.c_over[i]);
        }
        let mut tele = 0.0;
        let mut prefix = 1.0;
        for i in 0..n {
            tele += prefix * suffix[i + 1];
            prefix *= psi + self.c_over[i];
        }
        let p = geom - self.c0 * tele;
        // Q = psi^{n-1} - c0 prod_{i >= 2}(psi + c_i)  (excluding the
        // smallest eigenvalue, index 0).
        let tail_prod: f64 = self.c_over[1..].iter().map(|&c| psi + c).product();
        let q = psi.powi(n as i32 - 1) - self.c0 * tail_prod;
        (p, q)
    }

    /// `g(psi)` for `psi >= 1`. `g(1) = 0` exactly; `g < 0` for `psi > 1`.
    pub fn g_eval(&self, psi: f64) -> Result<f64> {
        if !(psi >= 1.0) {
            return Err(Error::DomainViolation(format!(
                "g is defined for psi >= 1, got {psi}"
            )));
        }
        Ok(self.g_raw(psi))
    }

    fn g_raw(&self, psi: f64) -> f64 {
        let (p, q) = self.p_q(psi);
        -(psi - 1.0) * p / (2.0 * q)
    }

    /// Rate of `phi = psi - 1` in the autonomous variable `t = ln(1+s)`.
    fn phi_rate(&self, phi: f64) -> f64 {
        let (p, q) = self.p_q(1.0 + phi);
        -phi * p / (2.0 * q)
    }
}

/// Tolerances and caps for the ODE constructions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveControls {
    /// Relative step tolerance of the adaptive integrator.
    pub rtol: f64,
    /// Absolute step tolerance.
    pub atol: f64,
    /// Maximum step in the autonomous variable; bounds the dense-output error.
    pub max_dt: f64,
    /// The tail model takes over once `psi - 1` drops below this.
    pub tail_threshold: f64,
    /// Tolerance on the shooting functional value `mu`.
    pub mu_tol: f64,
    /// Cap on bracket doublings in the shooting solver.
    pub bracket_cap: u32,
    /// Inward integration of the exact isotropic profile stops here.
    pub s_min_exact: f64,
    /// ... and starts here, on the power-law tail.
    pub s_max_exact: f64,
    /// Step budget per solve.
    pub max_steps: usize,
}

impl Default for SolveControls {
    fn default() -> Self {
        SolveControls {
            rtol: 1e-10,
            atol: 1e-12,
            max_dt: 4e-3,
            tail_threshold: 1e-6,
            mu_tol: 1e-8,
            bracket_cap: 60,
            s_min_exact: 1e-6,
            s_max_exact: 1e8,
            max_steps: 4_000_000,
        }
    }
}

impl SolveControls {
    fn step_opts(&self) -> StepOpts {
        StepOpts {
            rtol: self.rtol,
            atol: self.atol,
            max_dt: self.max_dt,
            max_steps: self.max_steps,
        }
    }
}

/// The tail model is only trusted once the grid has left the near field;
/// below this `s` the distinction between `s` and `1+s` would corrupt the
/// fitted power law.
const TAIL_MIN_S: f64 = 1e3;

/// Sampled solution of the shooting IVP: nodes `(s, psi, dpsi/ds)` with the
/// accumulated excess `E(s) = int_0^s (psi - 1)`, plus the fitted power-law
/// tail `psi ~ 1 + kappa s^{g'(1)}` beyond `s_cut`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadialProfile {
    alpha: f64,
    u0: f64,
    gprime1: f64,
    s_cut: f64,
    kappa: f64,
    mu: Option<f64>,
    s: Vec<f64>,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    excess: Vec<f64>,
}

impl RadialProfile {
    fn constant(gprime1: f64) -> Self {
        RadialProfile {
            alpha: 1.0,
            u0: 0.0,
            gprime1,
            s_cut: 0.0,
            kappa: 0.0,
            mu: Some(0.0),
            s: vec![0.0],
            psi: vec![1.0],
            dpsi: vec![0.0],
            excess: vec![0.0],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn set_u0(&mut self, u0: f64) {
        self.u0 = u0;
    }

    pub fn g_prime_at_one(&self) -> f64 {
        self.gprime1
    }

    pub fn s_cut(&self) -> f64 {
        self.s_cut
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `mu = int_0^inf (psi - 1) ds`; `None` when the configuration is not
    /// admissible (the integral diverges).
    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    /// Grid nodes `(s, psi, dpsi/ds)`.
    pub fn nodes(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.s, &self.psi, &self.dpsi)
    }

    fn t_nodes(&self) -> Vec<f64> {
        self.s.iter().map(|&s| s.ln_1p()).collect()
    }

    pub fn psi_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.alpha;
        }
        if s >= self.s_cut || self.s.len() < 2 {
            if self.kappa == 0.0 {
                return 1.0;
            }
            return 1.0 + self.kappa * s.powf(self.gprime1);
        }
        let t = s.ln_1p();
        let tn = self.t_nodes();
        let i = locate(&tn, t);
        let m0 = self.dpsi[i] * (1.0 + self.s[i]);
        let m1 = self.dpsi[i + 1] * (1.0 + self.s[i + 1]);
        hermite_eval(tn[i], tn[i + 1], self.psi[i], self.psi[i + 1], m0, m1, t)
    }

    pub fn dpsi_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return *self.dpsi.first().unwrap_or(&0.0);
        }
        if s >= self.s_cut || self.s.len() < 2 {
            if self.kappa == 0.0 {
                return 0.0;
            }
            return self.kappa * self.gprime1 * s.powf(self.gprime1 - 1.0);
        }
        let t = s.ln_1p();
        let tn = self.t_nodes();
        let i = locate(&tn, t);
        let m0 = self.dpsi[i] * (1.0 + self.s[i]);
        let m1 = self.dpsi[i + 1] * (1.0 + self.s[i + 1]);
        hermite_deriv(tn[i], tn[i + 1], self.psi[i], self.psi[i + 1], m0, m1, t) / (1.0 + s)
    }

    /// `E(s) = int_0^s (psi - 1) dr`.
    pub fn excess_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.s_cut || self.s.len() < 2 {
            let base = *self.excess.last().unwrap_or(&0.0);
            if self.kappa == 0.0 {
                return base;
            }
            let p = self.gprime1 + 1.0;
            return base + self.kappa * (s.powf(p) - self.s_cut.powf(p)) / p;
        }
        let t = s.ln_1p();
        let tn = self.t_nodes();
        let i = locate(&tn, t);
        let m0 = (self.psi[i] - 1.0) * (1.0 + self.s[i]);
        let m1 = (self.psi[i + 1] - 1.0) * (1.0 + self.s[i + 1]);
        hermite_eval(tn[i], tn[i + 1], self.excess[i], self.excess[i + 1], m0, m1, t)
    }

    pub fn u_at(&self, s: f64) -> f64 {
        self.u0 + s + self.excess_at(s)
    }
}

/// Integrates the shooting IVP `psi' = g(psi)/(s+1)`, `psi(0) = alpha`.
/// The `alpha = 1` branch is the exact constant profile and never enters the
/// integrator.
pub fn solve_psi(gd: &GData, alpha: f64, controls: &SolveControls) -> Result<RadialProfile> {
    if !(alpha >= 1.0) {
        return Err(Error::DomainViolation(format!(
            "initial slope alpha must be >= 1, got {alpha}"
        )));
    }
    if alpha == 1.0 {
        return Ok(RadialProfile::constant(gd.gprime1));
    }

    let mut ts: Vec<f64> = Vec::new();
    let mut phis: Vec<f64> = Vec::new();
    let mut excess: Vec<f64> = Vec::new();
    let mut rates: Vec<f64> = Vec::new();

    let threshold = controls.tail_threshold;
    let t_gate = (TAIL_MIN_S + 1.0).ln();
    let mut f = |t: f64, y: &[f64; 2]| [gd.phi_rate(y[0]), y[0] * t.exp()];
    dopri5(
        &mut f,
        0.0,
        [alpha - 1.0, 0.0],
        400.0,
        &controls.step_opts(),
        &mut |t, y, dy| {
            ts.push(t);
            phis.push(y[0]);
            excess.push(y[1]);
            rates.push(dy[0]);
        },
        &mut |t, y| y[0] <= threshold && t >= t_gate,
    )?;

    let last_phi = *phis.last().unwrap();
    if last_phi > threshold {
        return Err(Error::ToleranceFailure(
            "tail threshold not reached within the integration span".into(),
        ));
    }
    for w in phis.windows(2) {
        if !(w[1] < w[0]) || !(w[1] > 0.0) {
            return Err(Error::ToleranceFailure(
                "psi failed to decrease strictly toward 1".into(),
            ));
        }
    }

    let s: Vec<f64> = ts.iter().map(|&t| t.exp_m1()).collect();
    let psi: Vec<f64> = phis.iter().map(|&p| 1.0 + p).collect();
    let dpsi: Vec<f64> = rates
        .iter()
        .zip(&ts)
        .map(|(&r, &t)| r * (-t).exp())
        .collect();

    // Fit the tail constant over the final decade of s by least squares with
    // the slope pinned to g'(1).
    let t_cut = *ts.last().unwrap();
    let window_lo = t_cut - std::f64::consts::LN_10;
    let mut acc = 0.0;
    let mut count = 0usize;
    for (i, &t) in ts.iter().enumerate() {
        if t >= window_lo && s[i] > 0.0 {
            acc += phis[i].ln() - gd.gprime1 * s[i].ln();
            count += 1;
        }
    }
    if count < 4 {
        return Err(Error::ToleranceFailure("tail fit window too small".into()));
    }
    let kappa = (acc / count as f64).exp();
    let s_cut = *s.last().unwrap();
    let tail_defect = (last_phi - kappa * s_cut.powf(gd.gprime1)).abs();
    if tail_defect > 1e-8 {
        return Err(Error::ToleranceFailure(format!(
            "tail continuity defect {tail_defect} exceeds 1e-8"
        )));
    }

    let mu = if gd.delta.admissible {
        let p = gd.gprime1 + 1.0;
        Some(excess.last().unwrap() + kappa * s_cut.powf(p) / (-p))
    } else {
        None
    };

    Ok(RadialProfile {
        alpha,
        u0: 0.0,
        gprime1: gd.gprime1,
        s_cut,
        kappa,
        mu,
        s,
        psi,
        dpsi,
        excess,
    })
}

/// The shooting functional `mu(alpha) = int_0^inf (psi(s, alpha) - 1) ds`.
pub fn mu(gd: &GData, alpha: f64, controls: &SolveControls) -> Result<f64> {
    if !gd.delta.admissible {
        return Err(Error::NotAdmissible {
            delta0: gd.delta.delta0,
        });
    }
    Ok(solve_psi(gd, alpha, controls)?
        .mu()
        .expect("admissible profile has finite mu"))
}

/// Finds `alpha` with `mu(alpha)` within `controls.mu_tol` of the target
/// `c - u0 >= 0` by bracket doubling from `[1, 2]` followed by bisection.
pub fn shoot_alpha(gd: &GData, target: f64, controls: &SolveControls) -> Result<f64> {
    if !(target >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "shooting target c - u0 must be >= 0, got {target}"
        )));
    }
    if !gd.delta.admissible {
        return Err(Error::NotAdmissible {
            delta0: gd.delta.delta0,
        });
    }
    if target == 0.0 {
        return Ok(1.0);
    }
    let mut lo = 1.0f64;
    let mut hi = 2.0f64;
    let mut mu_hi = mu(gd, hi, controls)?;
    let mut doublings = 0;
    while mu_hi < target {
        doublings += 1;
        if doublings > controls.bracket_cap {
            return Err(Error::BracketFailure(format!(
                "mu({hi}) = {mu_hi} still below target {target} after {doublings} doublings"
            )));
        }
        lo = hi;
        hi = 1.0 + 2.0 * (hi - 1.0);
        mu_hi = mu(gd, hi, controls)?;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mu_mid = mu(gd, mid, controls)?;
        if (mu_mid - target).abs() <= controls.mu_tol {
            return Ok(mid);
        }
        if mu_mid < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::ToleranceFailure(
        "mu bisection failed to meet its tolerance".into(),
    ))
}

/// Shooting profile with `U(0) = u0`: `U(s) = u0 + int_0^s psi`.
pub fn build_profile(
    gd: &GData,
    alpha: f64,
    u0: f64,
    controls: &SolveControls,
) -> Result<RadialProfile> {
    let mut p = solve_psi(gd, alpha, controls)?;
    p.set_u0(u0);
    Ok(p)
}

/// Exact generalized symmetric profile for isotropic `a`, built by inward
/// integration of the singular radial ODE `psi' = g(psi)/s` from the
/// power-law tail down to `s_min`; near the origin `psi` follows the fitted
/// two-term model `C/sqrt(s) + d0`, which keeps `U(0)` finite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsotropicProfile {
    kappa: f64,
    u0: f64,
    gprime1: f64,
    d0: f64,
    c_origin: f64,
    s_min: f64,
    s_max: f64,
    mu: f64,
    s: Vec<f64>,
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    w: Vec<f64>,
}

impl IsotropicProfile {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn set_u0(&mut self, u0: f64) {
        self.u0 = u0;
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn g_prime_at_one(&self) -> f64 {
        self.gprime1
    }

    /// Radial gradient scale at the puncture: `lim_{s->0} psi sqrt(2s)`.
    pub fn origin_scale(&self) -> f64 {
        if self.kappa == 0.0 {
            0.0
        } else {
            self.c_origin * 2f64.sqrt()
        }
    }

    pub fn nodes(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.s, &self.psi, &self.dpsi)
    }

    fn t_nodes(&self) -> Vec<f64> {
        self.s.iter().map(|&s| s.ln()).collect()
    }

    pub fn psi_at(&self, s: f64) -> f64 {
        if self.kappa == 0.0 {
            return 1.0;
        }
        if s >= self.s_max {
            return 1.0 + self.kappa * s.powf(self.gprime1);
        }
        if s <= self.s_min {
            return self.c_origin / s.sqrt() + self.d0;
        }
        let t = s.ln();
        let tn = self.t_nodes();
        let i = locate(&tn, t);
        let m0 = self.dpsi[i] * self.s[i];
        let m1 = self.dpsi[i + 1] * self.s[i + 1];
        hermite_eval(tn[i], tn[i + 1], self.psi[i], self.psi[i + 1], m0, m1, t)
    }

    pub fn dpsi_at(&self, s: f64) -> f64 {
        if self.kappa == 0.0 {
            return 0.0;
        }
        if s >= self.s_max {
            return self.kappa * self.gprime1 * s.powf(self.gprime1 - 1.0);
        }
        if s <= self.s_min {
            return -0.5 * self.c_origin / (s * s.sqrt());
        }
        let t = s.ln();
        let tn = self.t_nodes();
        let i = locate(&tn, t);
        let m0 = self.dpsi[i] * self.s[i];
        let m1 = self.dpsi[i + 1] * self.s[i + 1];
        hermite_deriv(tn[i], tn[i + 1], self.psi[i], self.psi[i + 1], m0, m1, t) / s
    }

    /// `E(s) = int_0^s (psi - 1)`; stored as `mu - W(s)` on the grid with
    /// `W(s) = int_s^inf (psi - 1)`.
    pub fn excess_at(&self, s: f64) -> f64 {
        if self.kappa == 0.0 || s <= 0.0 {
            return 0.0;
        }
        if s <= self.s_min {
            return 2.0 * self.c_origin * s.sqrt() + (self.d0 - 1.0) * s;
        }
        if s >= self.s_max {
            let p = self.gprime1 + 1.0;
            return self.mu - self.kappa * s.powf(p) / (-p);
        }
        let t = s.ln();
        let tn = self.t_nodes();
        let i = locate(&tn, t);
        let m0 = -(self.psi[i] - 1.0) * self.s[i];
        let m1 = -(self.psi[i + 1] - 1.0) * self.s[i + 1];
        self.mu - hermite_eval(tn[i], tn[i + 1], self.w[i], self.w[i + 1], m0, m1, t)
    }

    pub fn u_at(&self, s: f64) -> f64 {
        self.u0 + s + self.excess_at(s)
    }
}

/// Builds the exact isotropic profile with prescribed tail constant
/// `kappa >= 0`. `kappa = 0` is the quadratic profile.
pub fn exact_isotropic_profile(
    gd: &GData,
    kappa: f64,
    controls: &SolveControls,
) -> Result<IsotropicProfile> {
    let a = gd.eigenvalues();
    let spread = a.last().unwrap() - a.first().unwrap();
    if spread > 1e-12 * a[0] {
        return Err(Error::InvalidInput(
            "exact profile requires isotropic eigenvalues".into(),
        ));
    }
    if !(kappa >= 0.0) {
        return Err(Error::InvalidInput(format!("kappa must be >= 0, got {kappa}")));
    }
    let b = gd.params().b().unwrap();
    let abar = a[0];
    let cbar = 2.0 * b / abar;
    let d0 = gd.c0 * cbar / (1.0 - gd.c0);
    if kappa == 0.0 {
        return Ok(IsotropicProfile {
            kappa: 0.0,
            u0: 0.0,
            gprime1: gd.gprime1,
            d0,
            c_origin: 0.0,
            s_min: 0.0,
            s_max: 0.0,
            mu: 0.0,
            s: vec![],
            psi: vec![],
            dpsi: vec![],
            w: vec![],
        })
    }

    let s_max = controls.s_max_exact;
    let s_min = controls.s_min_exact;
    let psi_init = 1.0 + kappa * s_max.powf(gd.gprime1);

    let mut ts = Vec::new();
    let mut psis = Vec::new();
    let mut vs = Vec::new();
    let mut f = |t: f64, y: &[f64; 2]| [gd.g_raw(y[0]), (y[0] - 1.0) * t.exp()];
    dopri5(
        &mut f,
        s_max.ln(),
        [psi_init, 0.0],
        s_min.ln(),
        &controls.step_opts(),
        &mut |t, y, _| {
            ts.push(t);
            psis.push(y[0]);
            vs.push(y[1]);
        },
        &mut |_, _| false,
    )?;

    // Reorder ascending in s and convert the running integral V(t) into
    // W(s) = int_s^inf (psi - 1) = W(s_max) - V.
    ts.reverse();
    psis.reverse();
    vs.reverse();
    let p = gd.gprime1 + 1.0;
    let w_tail = kappa * s_max.powf(p) / (-p);
    let s: Vec<f64> = ts.iter().map(|&t| t.exp()).collect();
    let dpsi: Vec<f64> = psis.iter().zip(&s).map(|(&ps, &sv)| gd.g_raw(ps) / sv).collect();
    let w: Vec<f64> = vs.iter().map(|&v| w_tail - v).collect();

    // Two-term origin model psi ~ C/sqrt(s) + d0, C averaged over the lowest
    // nodes.
    let fit_hi = 8.0 * s_min;
    let mut acc = 0.0;
    let mut count = 0usize;
    for (i, &sv) in s.iter().enumerate() {
        if sv <= fit_hi {
            acc += (psis[i] - d0) * sv.sqrt();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::ToleranceFailure("origin fit window empty".into()));
    }
    let c_origin = acc / count as f64;
    let e_origin = 2.0 * c_origin * s_min.sqrt() + (d0 - 1.0) * s_min;
    let mu = e_origin + w[0];

    Ok(IsotropicProfile {
        kappa,
        u0: 0.0,
        gprime1: gd.gprime1,
        d0,
        c_origin,
        s_min,
        s_max,
        mu,
        s,
        psi: psis,
        dpsi,
        w,
    })
}

/// Inward integration of an autonomous-in-`ln s` singular radial ODE
/// `d psi / d ln s = g(psi)`, from `(s_max, psi_at_smax)` down to `s_min`.
/// Returns the grid ascending in `s`. This is the scheme behind
/// [`exact_isotropic_profile`]; exposed so alternative right-hand sides (for
/// instance the `tau = 0` determinant equation) can reuse it.
pub fn inward_singular_solve(
    g: &dyn Fn(f64) -> f64,
    psi_at_smax: f64,
    s_min: f64,
    s_max: f64,
    controls: &SolveControls,
) -> Result<Vec<(f64, f64)>> {
    if !(s_min > 0.0 && s_max > s_min) {
        return Err(Error::InvalidInput("need 0 < s_min < s_max".into()));
    }
    let mut out = Vec::new();
    let mut f = |_t: f64, y: &[f64; 1]| [g(y[0])];
    dopri5(
        &mut f,
        s_max.ln(),
        [psi_at_smax],
        s_min.ln(),
        &controls.step_opts(),
        &mut |t, y, _| out.push((t.exp(), y[0])),
        &mut |_, _| false,
    )?;
    out.reverse();
    Ok(out)
}

/// Closed-form Monge-Ampere profile `U'(s) = (1 + c1 (2s)^{-n/2})^{1/n}`,
/// the solution of `(U')^n + 2 s U'' (U')^{n-1} = 1`. Assembled over a
/// positive diagonal `A` with `(1/n) sum ln(lambda_i(A)) = C0` it satisfies
/// `det D^2 u = e^{n C0}` pointwise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaProfile {
    n: usize,
    c1: f64,
    u0: f64,
    mu: f64,
}

impl MaProfile {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn set_u0(&mut self, u0: f64) {
        self.u0 = u0;
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Radial gradient scale at the puncture: `lim_{s->0} psi sqrt(2s) = c1^{1/n}`.
    pub fn origin_scale(&self) -> f64 {
        self.c1.powf(1.0 / self.n as f64)
    }

    pub fn psi_at(&self, s: f64) -> f64 {
        if self.c1 == 0.0 {
            return 1.0;
        }
        (1.0 + self.c1 * (2.0 * s).powf(-0.5 * self.n as f64)).powf(1.0 / self.n as f64)
    }

    pub fn dpsi_at(&self, s: f64) -> f64 {
        if self.c1 == 0.0 {
            return 0.0;
        }
        let psi = self.psi_at(s);
        -self.c1 * (2.0 * s).powf(-0.5 * self.n as f64 - 1.0) / psi.powi(self.n as i32 - 1)
    }

    /// `E(s) = int_0^s (psi - 1) dr = 2 int_0^{sqrt(s)} (q(w) - w) dw` with
    /// `q(w) = (w^n + c1 2^{-n/2})^{1/n}` (the substitution `r = w^2`
    /// removes the inverse square-root singularity at the origin).
    pub fn excess_at(&self, s: f64) -> f64 {
        if self.c1 == 0.0 || s <= 0.0 {
            return 0.0;
        }
        let k = self.c1 * (0.5f64).powf(0.5 * self.n as f64);
        let nf = self.n as f64;
        let top = s.sqrt();
        if top >= MA_FAR_FIELD {
            return self.mu - 2.0 * ma_tail(k, nf, top);
        }
        let integrand = move |w: f64| ma_gap_integrand(k, nf, w);
        2.0 * adaptive_simpson(&integrand, 0.0, top, 1e-13)
    }

    pub fn u_at(&self, s: f64) -> f64 {
        self.u0 + s + self.excess_at(s)
    }
}

const MA_FAR_FIELD: f64 = 1e4;

fn ma_tail(k: f64, nf: f64, w: f64) -> f64 {
    // int_w^inf (q - r) dr to second order in k.
    k / (nf * (nf - 2.0) * w.powf(nf - 2.0))
        - (nf - 1.0) * k * k / (2.0 * nf * nf * (2.0 * nf - 2.0) * w.powf(2.0 * nf - 2.0))
}

/// Validates the determinant compatibility and builds the profile.
pub fn ma_closed_form(n: usize, level: f64, c1: f64, lambda_a: &[f64]) -> Result<MaProfile> {
    if lambda_a.len() != n {
        return Err(Error::InvalidInput("eigenvalue count mismatch".into()));
    }
    if lambda_a.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DomainViolation("A must be positive definite".into()));
    }
    if !(c1 >= 0.0) {
        return Err(Error::InvalidInput(format!("c1 must be >= 0, got {c1}")));
    }
    let mean_log: f64 = lambda_a.iter().map(|&x| x.ln()).sum::<f64>() / n as f64;
    if (mean_log - level).abs() > 1e-8 {
        return Err(Error::IncompatibleMatrix(format!(
            "(1/n) sum ln lambda_i = {mean_log} does not match C0 = {level}"
        )));
    }
    let mu = if c1 == 0.0 {
        0.0
    } else {
        let k = c1 * (0.5f64).powf(0.5 * n as f64);
        let nf = n as f64;
        let integrand = move |w: f64| (w.powf(nf) + k).powf(1.0 / nf) - w;
        2.0 * (adaptive_simpson(&integrand, 0.0, MA_FAR_FIELD, 1e-13) + ma_tail(k, nf, MA_FAR_FIELD))
    };
    Ok(MaProfile { n, c1, u0: 0.0, mu })
}

/// A radial profile of any construction kind, with uniform evaluation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Profile {
    Quadratic { u0: f64 },
    Shooting(RadialProfile),
    ExactIsotropic(IsotropicProfile),
    ExactMa(MaProfile),
}

impl Profile {
    pub fn psi_at(&self, s: f64) -> f64 {
        match self {
            Profile::Quadratic { .. } => 1.0,
            Profile::Shooting(p) => p.psi_at(s),
            Profile::ExactIsotropic(p) => p.psi_at(s),
            Profile::ExactMa(p) => p.psi_at(s),
        }
    }

    pub fn dpsi_at(&self, s: f64) -> f64 {
        match self {
            Profile::Quadratic { .. } => 0.0,
            Profile::Shooting(p) => p.dpsi_at(s),
            Profile::ExactIsotropic(p) => p.dpsi_at(s),
            Profile::ExactMa(p) => p.dpsi_at(s),
        }
    }

    pub fn excess_at(&self, s: f64) -> f64 {
        match self {
            Profile::Quadratic { .. } => 0.0,
            Profile::Shooting(p) => p.excess_at(s),
            Profile::ExactIsotropic(p) => p.excess_at(s),
            Profile::ExactMa(p) => p.excess_at(s),
        }
    }

    pub fn u_at(&self, s: f64) -> f64 {
        self.u0() + s + self.excess_at(s)
    }

    pub fn u0(&self) -> f64 {
        match self {
            Profile::Quadratic { u0 } => *u0,
            Profile::Shooting(p) => p.u0(),
            Profile::ExactIsotropic(p) => p.u0(),
            Profile::ExactMa(p) => p.u0(),
        }
    }

    pub fn set_u0(&mut self, value: f64) {
        match self {
            Profile::Quadratic { u0 } => *u0 = value,
            Profile::Shooting(p) => p.set_u0(value),
            Profile::ExactIsotropic(p) => p.set_u0(value),
            Profile::ExactMa(p) => p.set_u0(value),
        }
    }

    /// Total excess `mu = lim E(s)`; `None` for non-admissible shooting data.
    pub fn mu(&self) -> Option<f64> {
        match self {
            Profile::Quadratic { .. } => Some(0.0),
            Profile::Shooting(p) => p.mu(),
            Profile::ExactIsotropic(p) => Some(p.mu()),
            Profile::ExactMa(p) => Some(p.mu()),
        }
    }

    /// Whether the gradient image at the puncture is a cone rather than a
    /// single vector.
    pub fn conical_origin(&self) -> bool {
        match self {
            Profile::Quadratic { .. } => false,
            Profile::Shooting(_) => false,
            Profile::ExactIsotropic(p) => p.kappa() > 0.0,
            Profile::ExactMa(p) => p.c1() > 0.0,
        }
    }

    /// `lim_{s->0} psi sqrt(2s)` for conical kinds.
    pub fn origin_scale(&self) -> f64 {
        match self {
            Profile::Quadratic { .. } | Profile::Shooting(_) => 0.0,
            Profile::ExactIsotropic(p) => p.origin_scale(),
            Profile::ExactMa(p) => p.origin_scale(),
        }
    }

    /// Grid nodes where the profile was sampled, if any.
    pub fn grid_s(&self) -> Option<&[f64]> {
        match self {
            Profile::Quadratic { .. } | Profile::ExactMa(_) => None,
            Profile::Shooting(p) => Some(p.nodes().0),
            Profile::ExactIsotropic(p) => Some(p.nodes().0),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Profile::Quadratic { .. } => "quadratic",
            Profile::Shooting(_) => "subsolution",
            Profile::ExactIsotropic(_) => "exact-isotropic",
            Profile::ExactMa(_) => "exact-ma",
        }
    }
}
