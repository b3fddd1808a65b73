//! The operator family `F_tau` / `G_tau` on Hessian eigenvalues.
//!
//! Five regimes are distinguished by the angle `tau` of the underlying
//! metric: `tau = 0` (logarithm of the determinant, Monge-Ampere),
//! `0 < tau < pi/4` (log-quotient branch), `tau = pi/4` (inverse harmonic),
//! `pi/4 < tau < pi/2` (shifted arctangent) and `tau = pi/2` (special
//! Lagrangian). Each regime is dispatched to its own exact formula; no
//! branch is obtained as a limit of another.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootfind;

/// The five branches of the operator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `tau = 0`: `(1/n) sum ln(lambda_i)`.
    MongeAmpere,
    /// `0 < tau < pi/4`: `sqrt(a^2+1)/(2b) sum ln(lambda_i / (lambda_i + 2b))`.
    LogQuotient,
    /// `tau = pi/4`: `-sqrt(2) sum 1/lambda_i`.
    InverseHarmonic,
    /// `pi/4 < tau < pi/2`: `sqrt(a^2+1)/b (sum arctan lambda_i - n pi/4)`.
    ArcTanShifted,
    /// `tau = pi/2`: `sum arctan lambda_i`.
    SpecialLagrangian,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Regime::MongeAmpere => "monge-ampere",
            Regime::LogQuotient => "log-quotient",
            Regime::InverseHarmonic => "inverse-harmonic",
            Regime::ArcTanShifted => "arctan-shifted",
            Regime::SpecialLagrangian => "special-lagrangian",
        };
        f.write_str(s)
    }
}

/// Ordered Hessian spectrum `lambda_1 <= ... <= lambda_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Builds a spectrum, sorting the values ascending. All operator formulas
    /// are permutation invariant, so sorting only canonicalizes comparisons.
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|x, y| x.partial_cmp(y).expect("finite eigenvalues"));
        Spectrum(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.0[0]
    }
}

/// Parameters of one member of the operator family: the regime, the angle,
/// the derived constants `a = cot(tau)`, `b = sqrt(|cot^2(tau) - 1|)`, the
/// dimension and the level `C0`. For the log-quotient regime the derived
/// level constant `c0 = exp(2 b C0 / sqrt(a^2+1))` is stored as well.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OperatorParams {
    regime: Regime,
    tau: f64,
    n: usize,
    level: f64,
    a: Option<f64>,
    b: Option<f64>,
    c0: Option<f64>,
}

fn check_dim(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidInput(format!(
            "dimension n = {n} not supported, need n >= 3"
        )));
    }
    Ok(())
}

impl OperatorParams {
    /// Classifies `tau` in `[0, pi/2]` into its regime and derives `a`, `b`.
    /// The endpoint and quarter angles are matched exactly; use the named
    /// constructors when in doubt.
    pub fn from_tau(tau: f64, n: usize, level: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&tau) {
            return Err(Error::InvalidInput(format!("tau = {tau} outside [0, pi/2]")));
        }
        if tau == 0.0 {
            return Self::monge_ampere(n, level);
        }
        if tau == FRAC_PI_2 {
            return Self::special_lagrangian(n, level);
        }
        if tau == FRAC_PI_4 {
            return Self::inverse_harmonic(n, level);
        }
        let a = tau.cos() / tau.sin();
        let b = (a * a - 1.0).abs().sqrt();
        if tau < FRAC_PI_4 {
            Self::log_quotient_from_a(a, n, level).map(|mut p| {
                p.tau = tau;
                p.b = Some(b);
                p.c0 = Some(log_quotient_c0(a, b, level));
                p
            })
        } else {
            Self::arctan_shifted_from_a(a, n, level).map(|mut p| {
                p.tau = tau;
                p.b = Some(b);
                p
            })
        }
    }

    /// `tau = 0`. `a`, `b` are undefined here.
    pub fn monge_ampere(n: usize, level: f64) -> Result<Self> {
        check_dim(n)?;
        Ok(OperatorParams {
            regime: Regime::MongeAmpere,
            tau: 0.0,
            n,
            level,
            a: None,
            b: None,
            c0: None,
        })
    }

    /// `tau = pi/4`, where `a = 1` and `b = 0`.
    pub fn inverse_harmonic(n: usize, level: f64) -> Result<Self> {
        check_dim(n)?;
        Ok(OperatorParams {
            regime: Regime::InverseHarmonic,
            tau: FRAC_PI_4,
            n,
            level,
            a: Some(1.0),
            b: Some(0.0),
            c0: None,
        })
    }

    /// `tau = pi/2`, where `a = 0` and `b = 1`.
    pub fn special_lagrangian(n: usize, level: f64) -> Result<Self> {
        check_dim(n)?;
        Ok(OperatorParams {
            regime: Regime::SpecialLagrangian,
            tau: FRAC_PI_2,
            n,
            level,
            a: Some(0.0),
            b: Some(1.0),
            c0: None,
        })
    }

    /// Log-quotient regime from `a = cot(tau) > 1`; `b = sqrt(a^2 - 1)`.
    /// Rejects `level >= 0`: the branch needs a strictly positive spectrum,
    /// on which `G_tau < 0`.
    pub fn log_quotient_from_a(a: f64, n: usize, level: f64) -> Result<Self> {
        check_dim(n)?;
        if !(a > 1.0) {
            return Err(Error::InvalidInput(format!(
                "log-quotient regime requires a = cot(tau) > 1, got {a}"
            )));
        }
        if level >= 0.0 {
            return Err(Error::Unattainable {
                what: "log-quotient level must be negative on positive spectra".into(),
                level,
            });
        }
        let b = (a * a - 1.0).sqrt();
        Ok(OperatorParams {
            regime: Regime::LogQuotient,
            tau: (1.0 / a).atan(),
            n,
            level,
            a: Some(a),
            b: Some(b),
            c0: Some(log_quotient_c0(a, b, level)),
        })
    }

    /// Log-quotient regime parameterized by `b > 0`, with `a = sqrt(1 + b^2)`.
    pub fn log_quotient_from_b(b: f64, n: usize, level: f64) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidInput(format!("need b > 0, got {b}")));
        }
        Self::log_quotient_from_a((1.0 + b * b).sqrt(), n, level)
    }

    /// Log-quotient parameters whose level is consistent with a prescribed
    /// positive spectrum `lambda`, i.e. `G_tau(lambda) = C0` holds by
    /// construction.
    pub fn log_quotient_matching(b: f64, lambda: &[f64]) -> Result<Self> {
        if !(b > 0.0) {
            return Err(Error::InvalidInput(format!("need b > 0, got {b}")));
        }
        if lambda.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::DomainViolation(
                "log-quotient level requires a strictly positive spectrum".into(),
            ));
        }
        let a = (1.0 + b * b).sqrt();
        let ln_c0: f64 = lambda.iter().map(|&x| (x / (x + 2.0 * b)).ln()).sum();
        let level = (a * a + 1.0).sqrt() / (2.0 * b) * ln_c0;
        Self::log_quotient_from_a(a, lambda.len(), level)
    }

    /// Arctangent regime from `0 < a = cot(tau) < 1`; `b = sqrt(1 - a^2)`.
    pub fn arctan_shifted_from_a(a: f64, n: usize, level: f64) -> Result<Self> {
        check_dim(n)?;
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidInput(format!(
                "arctan-shifted regime requires 0 < a = cot(tau) < 1, got {a}"
            )));
        }
        let b = (1.0 - a * a).sqrt();
        Ok(OperatorParams {
            regime: Regime::ArcTanShifted,
            tau: (1.0 / a).atan(),
            n,
            level,
            a: Some(a),
            b: Some(b),
            c0: None,
        })
    }

    /// Raw constructor taking `(a, b)` verbatim, without enforcing the
    /// `b = sqrt(|a^2 - 1|)` coupling. Intended for algebraic parameter
    /// studies of the branch formulas (e.g. the arctangent identity, which
    /// holds for any `a` and `b > 0`); regular callers should construct
    /// through `from_tau` or the named regimes.
    pub fn from_ab(regime: Regime, a: f64, b: f64, n: usize, level: f64) -> Result<Self> {
        check_dim(n)?;
        match regime {
            Regime::MongeAmpere => Self::monge_ampere(n, level),
            Regime::InverseHarmonic => Self::inverse_harmonic(n, level),
            Regime::SpecialLagrangian => Self::special_lagrangian(n, level),
            Regime::LogQuotient | Regime::ArcTanShifted => {
                if !(a > 0.0) || !(b > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "need a > 0 and b > 0, got a = {a}, b = {b}"
                    )));
                }
                let c0 = if regime == Regime::LogQuotient {
                    Some(log_quotient_c0(a, b, level))
                } else {
                    None
                };
                Ok(OperatorParams {
                    regime,
                    tau: (1.0 / a).atan(),
                    n,
                    level,
                    a: Some(a),
                    b: Some(b),
                    c0,
                })
            }
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The operator level `C0`.
    pub fn level(&self) -> f64 {
        self.level
    }

    /// `a = cot(tau)`, defined away from `tau = 0`.
    pub fn a(&self) -> Option<f64> {
        self.a
    }

    /// `b = sqrt(|cot^2(tau) - 1|)`, defined away from `tau = 0`.
    pub fn b(&self) -> Option<f64> {
        self.b
    }

    /// The log-quotient level constant `c0 = exp(2 b C0 / sqrt(a^2+1))`.
    pub fn c0(&self) -> Option<f64> {
        self.c0
    }

    fn ab(&self) -> Result<(f64, f64)> {
        match (self.a, self.b) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::RegimeMismatch(format!(
                "a, b undefined for regime {}",
                self.regime
            ))),
        }
    }

    fn check_len(&self, spec: &Spectrum) -> Result<()> {
        if spec.len() != self.n {
            return Err(Error::InvalidInput(format!(
                "spectrum length {} does not match dimension {}",
                spec.len(),
                self.n
            )));
        }
        Ok(())
    }

    /// Evaluates the translated operator `G_tau` on a spectrum.
    pub fn eval_g(&self, spec: &Spectrum) -> Result<f64> {
        self.check_len(spec)?;
        let l = spec.values();
        match self.regime {
            Regime::MongeAmpere => {
                gate_positive(l, "G_0 requires lambda_i > 0")?;
                Ok(l.iter().map(|&x| x.ln()).sum::<f64>() / self.n as f64)
            }
            Regime::LogQuotient => {
                gate_positive(l, "log-quotient G requires lambda_i > 0")?;
                let (a, b) = self.ab()?;
                let coef = (a * a + 1.0).sqrt() / (2.0 * b);
                Ok(coef * l.iter().map(|&x| (x / (x + 2.0 * b)).ln()).sum::<f64>())
            }
            Regime::InverseHarmonic => {
                if l.iter().any(|&x| x == 0.0) {
                    return Err(Error::DomainViolation(
                        "inverse harmonic G requires lambda_i != 0".into(),
                    ));
                }
                Ok(-2f64.sqrt() * l.iter().map(|&x| 1.0 / x).sum::<f64>())
            }
            Regime::ArcTanShifted => {
                let (a, b) = self.ab()?;
                let coef = (a * a + 1.0).sqrt() / b;
                let s: f64 = l.iter().map(|&x| x.atan()).sum();
                Ok(coef * (s - self.n as f64 * FRAC_PI_4))
            }
            Regime::SpecialLagrangian => Ok(l.iter().map(|&x| x.atan()).sum()),
        }
    }

    /// Evaluates the original operator `F_tau` on a spectrum.
    pub fn eval_f(&self, spec: &Spectrum) -> Result<f64> {
        self.check_len(spec)?;
        let l = spec.values();
        match self.regime {
            Regime::MongeAmpere | Regime::SpecialLagrangian => self.eval_g(spec),
            Regime::LogQuotient => {
                let (a, b) = self.ab()?;
                if l.iter().any(|&x| x + a - b <= 0.0) {
                    return Err(Error::DomainViolation(format!(
                        "log-quotient F requires lambda_i > b - a = {}",
                        b - a
                    )));
                }
                let coef = (a * a + 1.0).sqrt() / (2.0 * b);
                Ok(coef
                    * l.iter()
                        .map(|&x| ((x + a - b) / (x + a + b)).ln())
                        .sum::<f64>())
            }
            Regime::InverseHarmonic => {
                if l.iter().any(|&x| x == -1.0) {
                    return Err(Error::DomainViolation(
                        "inverse harmonic F requires lambda_i != -1".into(),
                    ));
                }
                Ok(-2f64.sqrt() * l.iter().map(|&x| 1.0 / (1.0 + x)).sum::<f64>())
            }
            Regime::ArcTanShifted => {
                let (a, b) = self.ab()?;
                if l.iter().any(|&x| x == -(a + b)) {
                    return Err(Error::DomainViolation(format!(
                        "arctan-shifted F undefined at lambda_i = {}",
                        -(a + b)
                    )));
                }
                let coef = (a * a + 1.0).sqrt() / b;
                Ok(coef
                    * l.iter()
                        .map(|&x| ((x + a - b) / (x + a + b)).atan())
                        .sum::<f64>())
            }
        }
    }

    /// Translates an F-form spectrum into the G-form spectrum, so that
    /// `eval_f(spec) == eval_g(translate_spectrum(spec))` whenever both sides
    /// are defined. Identity regimes (Monge-Ampere, special Lagrangian) are a
    /// regime mismatch: the caller should not invoke the translation there.
    pub fn translate_spectrum(&self, spec: &Spectrum) -> Result<Spectrum> {
        self.check_len(spec)?;
        let l = spec.values();
        match self.regime {
            Regime::LogQuotient => {
                let (a, b) = self.ab()?;
                Ok(Spectrum::new(l.iter().map(|&x| x + a - b).collect()))
            }
            Regime::InverseHarmonic => Ok(Spectrum::new(l.iter().map(|&x| x + 1.0).collect())),
            Regime::ArcTanShifted => {
                let (a, b) = self.ab()?;
                Ok(Spectrum::new(l.iter().map(|&x| (x + a) / b).collect()))
            }
            Regime::MongeAmpere | Regime::SpecialLagrangian => Err(Error::RegimeMismatch(format!(
                "translation is the identity for regime {}",
                self.regime
            ))),
        }
    }

    /// Absolute defect of the arctangent sum identity for this regime's
    /// `(a, b)`. Requires `b > 0`.
    pub fn arctan_identity_defect(&self, spec: &Spectrum) -> Result<f64> {
        self.check_len(spec)?;
        let (a, b) = self.ab()?;
        arctan_identity_defect(a, b, spec.values())
    }

    /// Value of `G_tau` on the isotropic spectrum `(x, ..., x)`.
    fn isotropic_g(&self, x: f64) -> f64 {
        let nf = self.n as f64;
        match self.regime {
            Regime::MongeAmpere => x.ln(),
            Regime::LogQuotient => {
                let (a, b) = (self.a.unwrap(), self.b.unwrap());
                nf * (a * a + 1.0).sqrt() / (2.0 * b) * (x / (x + 2.0 * b)).ln()
            }
            Regime::InverseHarmonic => -2f64.sqrt() * nf / x,
            Regime::ArcTanShifted => {
                let (a, b) = (self.a.unwrap(), self.b.unwrap());
                (a * a + 1.0).sqrt() / b * nf * (x.atan() - FRAC_PI_4)
            }
            Regime::SpecialLagrangian => nf * x.atan(),
        }
    }

    /// Solves `G_tau(x, ..., x) = C0` for the isotropic eigenvalue by
    /// monotone bracketing and safeguarded refinement. The residual of the
    /// returned root is below `1e-12` times the level scale.
    pub fn isotropic_root(&self) -> Result<f64> {
        let c = self.level;
        let scale = c.abs().max(1.0);
        let f_tol = 1e-13 * scale;
        let mut f = |x: f64| self.isotropic_g(x) - c;

        let bracket = match self.regime {
            Regime::MongeAmpere | Regime::LogQuotient => {
                if self.regime == Regime::LogQuotient && c >= 0.0 {
                    return Err(Error::Unattainable {
                        what: "log-quotient isotropic root needs C0 < 0".into(),
                        level: c,
                    });
                }
                let grid = (-360..=360).map(|k| (k as f64 * 0.25).exp2());
                rootfind::scan_sign_change(&mut f, grid)
            }
            Regime::InverseHarmonic => {
                if c == 0.0 {
                    return Err(Error::Unattainable {
                        what: "inverse harmonic isotropic root needs C0 != 0".into(),
                        level: c,
                    });
                }
                if c < 0.0 {
                    let grid = (-360..=360).map(|k| (k as f64 * 0.25).exp2());
                    rootfind::scan_sign_change(&mut f, grid)
                } else {
                    let grid = (-360..=360).map(|k| -((-k as f64) * 0.25).exp2());
                    rootfind::scan_sign_change(&mut f, grid)
                }
            }
            Regime::ArcTanShifted | Regime::SpecialLagrangian => {
                // tan-spaced grid covers the whole real line.
                let m = 2000;
                let grid = (1..m).map(move |k| (-FRAC_PI_2 + PI * k as f64 / m as f64).tan());
                rootfind::scan_sign_change(&mut f, grid)
            }
        };

        let (lo, hi, flo, fhi) = bracket.ok_or(Error::Unattainable {
            what: format!("C0 outside the range of the {} branch", self.regime),
            level: c,
        })?;
        let root = rootfind::refine(&mut f, lo, hi, flo, fhi, f_tol)?;
        let resid = (self.isotropic_g(root) - c).abs();
        if resid > 1e-12 * scale {
            return Err(Error::ToleranceFailure(format!(
                "isotropic root residual {resid} exceeds 1e-12"
            )));
        }
        Ok(root)
    }

    /// Root-solved isotropic eigenvalue together with the closed form printed
    /// for the regime, when one exists. For the inverse harmonic regime the
    /// printed form `-sqrt(2) C0 / (2n)` does not satisfy the defining
    /// equation unless `C0^2 = 2 n^2`; the root-solved value is authoritative
    /// and the mismatch is surfaced through `printed_matches`.
    pub fn isotropic_root_report(&self) -> Result<IsotropicRootReport> {
        let solved = self.isotropic_root()?;
        let residual = (self.isotropic_g(solved) - self.level).abs();
        let nf = self.n as f64;
        let c = self.level;
        let printed = match self.regime {
            Regime::MongeAmpere => None,
            Regime::LogQuotient => {
                let (a, b) = self.ab()?;
                let q = (2.0 * b * c / (nf * (a * a + 1.0).sqrt())).exp();
                Some(2.0 * b / (1.0 - q) - 2.0 * b)
            }
            Regime::InverseHarmonic => Some(-2f64.sqrt() * c / (2.0 * nf)),
            Regime::ArcTanShifted => {
                let (a, b) = self.ab()?;
                Some((b * c / (nf * (a * a + 1.0).sqrt()) + FRAC_PI_4).tan())
            }
            Regime::SpecialLagrangian => Some((c / nf).tan()),
        };
        let printed_matches = printed
            .map(|p| (p - solved).abs() <= 1e-8 * solved.abs().max(1.0))
            .unwrap_or(true);
        Ok(IsotropicRootReport {
            solved,
            residual,
            printed_form: printed,
            printed_matches,
        })
    }
}

/// Result of [`OperatorParams::isotropic_root_report`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsotropicRootReport {
    /// Root of `G_tau(x 1) = C0` found by the solver (authoritative).
    pub solved: f64,
    /// `|G_tau(solved 1) - C0|`.
    pub residual: f64,
    /// The closed form printed for this regime, if any.
    pub printed_form: Option<f64>,
    /// Whether the printed form agrees with the solved root.
    pub printed_matches: bool,
}

fn log_quotient_c0(a: f64, b: f64, level: f64) -> f64 {
    (2.0 * b * level / (a * a + 1.0).sqrt()).exp()
}

fn gate_positive(l: &[f64], msg: &str) -> Result<()> {
    if l.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DomainViolation(msg.into()));
    }
    Ok(())
}

/// Absolute defect of the identity
/// `sum arctan((l+a-b)/(l+a+b)) = sum arctan((l+a)/b) - n pi/4`,
/// valid for `b > 0` and every `l_i > -a-b`. Inputs at or below the gate are
/// rejected.
pub fn arctan_identity_defect(a: f64, b: f64, lambda: &[f64]) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::DomainViolation(format!("identity requires b > 0, got {b}")));
    }
    if lambda.iter().any(|&x| x <= -a - b) {
        return Err(Error::DomainViolation(format!(
            "identity requires lambda_i > -a-b = {}",
            -a - b
        )));
    }
    let lhs: f64 = lambda
        .iter()
        .map(|&x| ((x + a - b) / (x + a + b)).atan())
        .sum();
    let rhs: f64 = lambda.iter().map(|&x| ((x + a) / b).atan()).sum::<f64>()
        - lambda.len() as f64 * FRAC_PI_4;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(v: &[f64]) -> Spectrum {
        Spectrum::new(v.to_vec())
    }

    #[test]
    fn g_monge_ampere_equal_eigenvalues() {
        // The branch averages the logs; (2,2,2) keeps the value ln 2 while
        // honoring the n >= 3 gate.
        let p = OperatorParams::monge_ampere(3, 0.0).unwrap();
        let g = p.eval_g(&spec(&[2.0, 2.0, 2.0])).unwrap();
        assert!((g - 2f64.ln()).abs() < 1e-15);
        assert!(p.eval_g(&spec(&[2.0, -1.0, 2.0])).is_err());
    }

    #[test]
    fn g_special_lagrangian_ones() {
        let p = OperatorParams::special_lagrangian(3, 0.0).unwrap();
        let g = p.eval_g(&spec(&[1.0, 1.0, 1.0])).unwrap();
        assert!((g - 3.0 * FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn g_inverse_harmonic() {
        let p = OperatorParams::inverse_harmonic(3, 0.0).unwrap();
        let g = p.eval_g(&spec(&[1.0, 2.0, 2.0])).unwrap();
        assert!((g + 2.0 * 2f64.sqrt()).abs() < 1e-14);
        assert!(p.eval_g(&spec(&[0.0, 1.0, 2.0])).is_err());
    }

    #[test]
    fn g_log_quotient_ones() {
        let p = OperatorParams::log_quotient_from_a(2f64.sqrt(), 3, -1.0).unwrap();
        let g = p.eval_g(&spec(&[1.0, 1.0, 1.0])).unwrap();
        let expect = 1.5 * 3f64.sqrt() * (1f64 / 3.0).ln();
        assert!((g - expect).abs() < 1e-13, "{g} vs {expect}");
    }

    #[test]
    fn f_special_lagrangian_zero() {
        let p = OperatorParams::special_lagrangian(3, 0.0).unwrap();
        assert_eq!(p.eval_f(&spec(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
    }

    #[test]
    fn f_arctan_shifted_at_b_minus_a() {
        // With lambda_i = b - a every fraction vanishes, so F = 0 for any
        // (a, b) plugged into this branch.
        let a = 2f64.sqrt();
        let b = 1.0;
        let p = OperatorParams::from_ab(Regime::ArcTanShifted, a, b, 3, 0.0).unwrap();
        let f = p.eval_f(&spec(&[b - a, b - a, b - a])).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn f_equals_g_after_translation_log_quotient() {
        let a = 2f64.sqrt();
        let p = OperatorParams::log_quotient_from_a(a, 3, -1.0).unwrap();
        let lam = 2.0 - a; // translates to 1
        let s = spec(&[lam, lam, lam]);
        let f = p.eval_f(&s).unwrap();
        let g = p.eval_g(&p.translate_spectrum(&s).unwrap()).unwrap();
        assert!((f - g).abs() < 1e-13);
        let ones = p.eval_g(&spec(&[1.0, 1.0, 1.0])).unwrap();
        assert!((f - ones).abs() < 1e-13);
    }

    #[test]
    fn translate_inverse_harmonic_and_affine() {
        let p = OperatorParams::inverse_harmonic(3, -1.0).unwrap();
        let t = p.translate_spectrum(&spec(&[0.0, 1.0, 2.0])).unwrap();
        assert_eq!(t.values(), &[1.0, 2.0, 3.0]);

        let a = 2f64.sqrt();
        let q = OperatorParams::from_ab(Regime::ArcTanShifted, a, 1.0, 3, 0.0).unwrap();
        let t = q.translate_spectrum(&spec(&[-a, 0.0, a])).unwrap();
        let expect = [0.0, a, 2.0 * a];
        for (x, e) in t.values().iter().zip(expect.iter()) {
            assert!((x - e).abs() < 1e-15);
        }

        let ma = OperatorParams::monge_ampere(3, 0.0).unwrap();
        assert!(ma.translate_spectrum(&spec(&[1.0, 1.0, 1.0])).is_err());
    }

    #[test]
    fn translate_log_quotient_shift() {
        let a = 2f64.sqrt();
        let p = OperatorParams::log_quotient_from_a(a, 3, -1.0).unwrap();
        let t = p.translate_spectrum(&spec(&[1.0, 1.0, 1.0])).unwrap();
        for x in t.values() {
            assert!((x - a).abs() < 1e-15);
        }
    }

    #[test]
    fn arctan_identity_cases() {
        // Exact zero per coordinate at lambda = b - a.
        let d = arctan_identity_defect(2f64.sqrt(), 1.0, &[1.0 - 2f64.sqrt(); 3]).unwrap();
        assert!(d < 1e-15);
        let d = arctan_identity_defect(2f64.sqrt(), 1.0, &[0.0, 1.0, 5.0]).unwrap();
        assert!(d < 1e-12);
        // Gate: at a = 2, b = sqrt(3), -a-b ~ -3.732; -3.74 is below it.
        let r = arctan_identity_defect(2.0, 3f64.sqrt(), &[-3.74, 0.0, 1.0]);
        assert!(matches!(r, Err(Error::DomainViolation(_))));
        // -3.7 is above the gate and satisfies the identity.
        let d = arctan_identity_defect(2.0, 3f64.sqrt(), &[-3.7, 0.0, 1.0]).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn isotropic_root_special_lagrangian() {
        let p = OperatorParams::special_lagrangian(3, 3.0 * FRAC_PI_4).unwrap();
        let r = p.isotropic_root().unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let rep = p.isotropic_root_report().unwrap();
        assert!(rep.printed_matches);
        assert!((rep.printed_form.unwrap() - (p.level() / 3.0).tan()).abs() < 1e-15);
    }

    #[test]
    fn isotropic_root_log_quotient() {
        let level = 1.5 * 3f64.sqrt() * (1f64 / 3.0).ln();
        let p = OperatorParams::log_quotient_from_a(2f64.sqrt(), 3, level).unwrap();
        let r = p.isotropic_root().unwrap();
        assert!((r - 1.0).abs() < 1e-11);
        let rep = p.isotropic_root_report().unwrap();
        assert!(rep.printed_matches);
    }

    #[test]
    fn isotropic_root_inverse_harmonic() {
        // C0 = -3 sqrt(2) happens to sit at C0^2 = 2 n^2 where the printed
        // form coincides with the true root 1.
        let p = OperatorParams::inverse_harmonic(3, -3.0 * 2f64.sqrt()).unwrap();
        assert!((p.isotropic_root().unwrap() - 1.0).abs() < 1e-12);

        // Away from that coincidence the printed form disagrees.
        let q = OperatorParams::inverse_harmonic(3, -2.0).unwrap();
        let rep = q.isotropic_root_report().unwrap();
        let expect = 3.0 * 2f64.sqrt() / 2.0;
        assert!((rep.solved - expect).abs() < 1e-12);
        assert!(!rep.printed_matches);
        assert!(rep.residual < 1e-12);
    }

    #[test]
    fn isotropic_root_unattainable() {
        let p = OperatorParams::special_lagrangian(3, 3.0 * FRAC_PI_2 + 0.5).unwrap();
        assert!(matches!(p.isotropic_root(), Err(Error::Unattainable { .. })));
        assert!(OperatorParams::log_quotient_from_a(2.0, 3, 1.0).is_err());
        let ih = OperatorParams::inverse_harmonic(3, 0.0).unwrap();
        assert!(ih.isotropic_root().is_err());
    }

    #[test]
    fn permutation_invariance_and_monotonicity_spot() {
        let p = OperatorParams::special_lagrangian(4, 0.0).unwrap();
        let g1 = p.eval_g(&spec(&[0.3, -0.2, 1.5, 0.9])).unwrap();
        let g2 = p.eval_g(&spec(&[1.5, 0.9, 0.3, -0.2])).unwrap();
        assert_eq!(g1, g2);

        // Finite-difference slope in one coordinate is positive.
        let h = 1e-6;
        let gp = p.eval_g(&spec(&[0.3 + h, -0.2, 1.5, 0.9])).unwrap();
        assert!(gp > g1);
    }
}
