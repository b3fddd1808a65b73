//! Elementary symmetric polynomials, the trigonometric coefficient family
//! `c_k`, the direction extremes of the ratio `Xi_k`, and the decay exponent
//! `delta_0` for every operator regime.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{OperatorParams, Regime};

/// Table of elementary symmetric polynomials `sigma_k` of a base sequence,
/// together with the exclusion values `sigma_{k;i}` (the same polynomial on
/// the base with entry `i` removed).
#[derive(Debug, Clone)]
pub struct SigmaTable {
    base: Vec<f64>,
    sigma: Vec<f64>,
    // sigma_excl[k][i] = sigma_{k;i}, k = 0..n-1
    sigma_excl: Vec<Vec<f64>>,
}

/// Builds the full table. `sigma_k` by the standard one-pass update,
/// `sigma_{k;i}` by the division-free forward recurrence
/// `sigma_{k;i} = sigma_k - a_i sigma_{k-1;i}`.
pub fn sigma_table(base: &[f64]) -> SigmaTable {
    let n = base.len();
    let mut sigma = vec![0.0; n + 1];
    sigma[0] = 1.0;
    for (i, &x) in base.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            sigma[k] += x * sigma[k - 1];
        }
    }
    let mut sigma_excl = vec![vec![0.0; n]; n.max(1)];
    for i in 0..n {
        sigma_excl[0][i] = 1.0;
        for k in 1..n {
            sigma_excl[k][i] = sigma[k] - base[i] * sigma_excl[k - 1][i];
        }
    }
    SigmaTable {
        base: base.to_vec(),
        sigma,
        sigma_excl,
    }
}

impl SigmaTable {
    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// `sigma_k`, `k = 0..=n`.
    pub fn sigma(&self, k: usize) -> f64 {
        self.sigma[k]
    }

    /// `sigma_{k;i}` with entry `i` excluded. For `k >= n` this is zero.
    pub fn sigma_excl(&self, k: usize, i: usize) -> f64 {
        if k >= self.base.len() {
            0.0
        } else {
            self.sigma_excl[k][i]
        }
    }
}

/// Coefficients `c_0 .. c_n`: `c_{2j} = (-1)^{j+1} sin C`,
/// `c_{2j+1} = (-1)^j cos C`.
pub fn ck_coefficients(c: f64, n: usize) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let j = k / 2;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                -sign * c.sin()
            } else {
                sign * c.cos()
            }
        })
        .collect()
}

/// Direction extremes of `Xi_k` for one `k`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct XiBounds {
    pub lower: f64,
    pub upper: f64,
    pub argmin: usize,
    pub argmax: usize,
}

/// `Xi_k(lambda, x) = sum_i sigma_{k-1;i} lambda_i^2 x_i^2 /
/// (sigma_k sum_i lambda_i x_i^2)` at a concrete direction `x != 0`.
pub fn xi_direction_value(lambda: &[f64], k: usize, x: &[f64]) -> f64 {
    let table = sigma_table(lambda);
    let num: f64 = (0..lambda.len())
        .map(|i| table.sigma_excl(k - 1, i) * lambda[i] * lambda[i] * x[i] * x[i])
        .sum();
    let den: f64 = table.sigma(k)
        * (0..lambda.len())
            .map(|i| lambda[i] * x[i] * x[i])
            .sum::<f64>();
    num / den
}

/// Extremes of `Xi_k` over all directions, for `k = 1..=n`.
///
/// With `t_i = x_i^2 >= 0` the ratio is a quotient of two linear forms over
/// the simplex, so its extremes sit at vertices: the candidate values are
/// `lambda_i sigma_{k-1;i} / sigma_k` and the bounds are their min and max.
pub fn xi_bounds(lambda: &[f64]) -> Result<Vec<XiBounds>> {
    if lambda.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DomainViolation(
            "xi bounds require strictly positive eigenvalues".into(),
        ));
    }
    let n = lambda.len();
    let table = sigma_table(lambda);
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut argmin = 0;
        let mut argmax = 0;
        for i in 0..n {
            let v = lambda[i] * table.sigma_excl(k - 1, i) / table.sigma(k);
            if v < lo {
                lo = v;
                argmin = i;
            }
            if v > hi {
                hi = v;
                argmax = i;
            }
        }
        out.push(XiBounds {
            lower: lo,
            upper: hi,
            argmin,
            argmax,
        });
    }
    Ok(out)
}

/// Decay exponent of the quadratic asymptote, per regime.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayExponent {
    pub delta0: f64,
    pub regime: Regime,
    /// The admissibility gate `delta0 > 2`.
    pub admissible: bool,
    /// `|G_tau(lambda(A)) - C0|`; the exponent formulas assume the
    /// eigenvalues sit on the level set, so a large defect here means the
    /// input pair was inconsistent.
    pub level_defect: f64,
}

/// Computes `delta_0` for positive eigenvalues of `A`:
///
/// - log-quotient: `sum (lambda_min + 2b) / (lambda_i + 2b)`;
/// - inverse harmonic: `sigma_{n-1} lambda_min / sigma_n`;
/// - arctan-shifted and special Lagrangian: the `c_k`/`xi_k` quotient with
///   `C = n pi/4 + b C0 / sqrt(a^2+1)` resp. `C = C0`;
/// - Monge-Ampere: unsupported (handled by cited literature, not here).
pub fn delta0(params: &OperatorParams, lambda: &[f64]) -> Result<DecayExponent> {
    if lambda.len() != params.dim() {
        return Err(Error::InvalidInput(format!(
            "eigenvalue count {} does not match dimension {}",
            lambda.len(),
            params.dim()
        )));
    }
    if lambda.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DomainViolation(
            "delta0 requires strictly positive eigenvalues".into(),
        ));
    }
    let spec = crate::operators::Spectrum::new(lambda.to_vec());
    let level_defect = (params.eval_g(&spec)? - params.level()).abs();
    let lambda_min = lambda.iter().cloned().fold(f64::INFINITY, f64::min);
    let n = lambda.len();
    let value = match params.regime() {
        Regime::MongeAmpere => {
            return Err(Error::Unsupported(
                "delta0 for the Monge-Ampere regime is out of scope".into(),
            ))
        }
        Regime::LogQuotient => {
            let b = params.b().unwrap();
            lambda
                .iter()
                .map(|&x| (lambda_min + 2.0 * b) / (x + 2.0 * b))
                .sum()
        }
        Regime::InverseHarmonic => {
            let table = sigma_table(lambda);
            table.sigma(n - 1) * lambda_min / table.sigma(n)
        }
        Regime::ArcTanShifted | Regime::SpecialLagrangian => {
            let c_arg = if params.regime() == Regime::SpecialLagrangian {
                params.level()
            } else {
                let (a, b) = (params.a().unwrap(), params.b().unwrap());
                n as f64 * std::f64::consts::FRAC_PI_4
                    + b * params.level() / (a * a + 1.0).sqrt()
            };
            let ck = ck_coefficients(c_arg, n);
            let bounds = xi_bounds(lambda)?;
            let table = sigma_table(lambda);
            let mut num = 0.0;
            let mut den = 0.0;
            for k in 0..=n {
                let term = ck[k] * table.sigma(k);
                num += k as f64 * term;
                // Xi_0 = 0 (empty numerator sum), so k = 0 contributes nothing.
                if k >= 1 {
                    let xi = if ck[k] > 0.0 {
                        bounds[k - 1].upper
                    } else {
                        bounds[k - 1].lower
                    };
                    den += xi * term;
                }
            }
            num / den
        }
    };
    Ok(DecayExponent {
        delta0: value,
        regime: params.regime(),
        admissible: value > 2.0,
        level_defect,
    })
}

/// Left-hand side of the algebraic form of the arctangent level set:
/// `cos(C0) sum (-1)^k sigma_{2k+1}(lambda) - sin(C0) sum (-1)^k sigma_{2k}(lambda)`.
/// Vanishes exactly when `sum arctan(lambda_i) = C0` (mod pi).
pub fn arctan_algebraic_form(c0: f64, lambda: &[f64]) -> f64 {
    let n = lambda.len();
    let table = sigma_table(lambda);
    let mut odd = 0.0;
    let mut even = 0.0;
    let mut k = 0usize;
    while 2 * k <= n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        even += sign * table.sigma(2 * k);
        if 2 * k + 1 <= n {
            odd += sign * table.sigma(2 * k + 1);
        }
        k += 1;
    }
    c0.cos() * odd - c0.sin() * even
}
