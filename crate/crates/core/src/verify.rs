//! Independent verification of assembled solutions: residual sign and
//! equality checks through two separate evaluation paths, convexity, decay
//! fits, the admissibility gate, and the per-axis rigidity probes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::odeflow::Profile;
use crate::operators::{OperatorParams, Regime};
use crate::radial::{sigma_k_profile, RadialFrame};
use crate::solution::{PuncturedSolution, SolutionKind};
use crate::sympoly::{delta0, sigma_table, DecayExponent};

/// Deterministic point sampler: log-uniform radii, uniform directions.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sampler {
    pub seed: u64,
    pub count: usize,
    pub r_min: f64,
    pub r_max: f64,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            seed: 7,
            count: 1000,
            r_min: 1e-2,
            r_max: 1e3,
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller on (0, 1] uniforms.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

impl Sampler {
    pub fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count);
        while out.len() < self.count {
            let dir: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            let r = (self.r_min.ln() + rng.gen::<f64>() * (self.r_max / self.r_min).ln()).exp();
            out.push(dir.into_iter().map(|v| v / norm * r).collect());
        }
        out
    }

    pub fn directions(&self, dim: usize, count: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let dir: Vec<f64> = (0..dim).map(|_| gaussian(&mut rng)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            out.push(dir.into_iter().map(|v| v / norm).collect());
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The measured quantity underflowed (e.g. the gap of a quadratic
    /// solution); the claim holds exactly rather than by a fitted rate.
    ExactMatch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub status: CheckStatus,
    pub measured: f64,
    pub tolerance: f64,
    pub samples: usize,
}

impl CheckEntry {
    fn passed(&self) -> bool {
        !matches!(self.status, CheckStatus::Fail)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
    pub overall: bool,
}

impl VerificationReport {
    pub fn from_checks(mut checks: Vec<CheckEntry>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let overall = checks.iter().all(|c| c.passed());
        VerificationReport { checks, overall }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualMode {
    /// `G_tau(lambda(D^2 u)) >= C0` (subsolution certificate).
    AtLeast,
    /// `G_tau(lambda(D^2 u)) = C0` (exact kinds).
    Equality,
}

/// Per-sample statistics of the residual check.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResidualStats {
    pub min_defect: f64,
    pub max_defect: f64,
    pub max_abs_defect: f64,
    /// Worst disagreement between the eigenvalue path and the sigma-form path.
    pub max_path_gap: f64,
}

fn conical_filter(sol: &PuncturedSolution, points: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    if !sol.profile().conical_origin() {
        return points;
    }
    points
        .into_iter()
        .filter(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt() >= 1e-3)
        .collect()
}

/// Defect `G_tau - C0` through the sigma-form path, which never touches the
/// eigensolver: the log-quotient quotient against `c0`, the determinant
/// representation for `tau = 0`, the `sigma_{n-1}/sigma_n` ratio at
/// `tau = pi/4`, and the algebraic form of the arctangent level set for the
/// remaining regimes.
fn sigma_path_defect(
    params: &OperatorParams,
    a: &[f64],
    y: &[f64],
    s: f64,
    up: f64,
    upp: f64,
) -> Result<f64> {
    let n = a.len();
    let nf = n as f64;
    match params.regime() {
        Regime::LogQuotient => {
            let b = params.b().unwrap();
            let (aa, _) = (params.a().unwrap(), b);
            let num = up.powi(n as i32) + 2.0 * s * upp * up.powi(n as i32 - 1);
            let terms: Vec<f64> = a.iter().map(|&ai| up + 2.0 * b / ai).collect();
            let full: f64 = terms.iter().product();
            let mut corr = 0.0;
            for i in 0..n {
                let mut prod = 1.0;
                for (j, t) in terms.iter().enumerate() {
                    if j != i {
                        prod *= t;
                    }
                }
                corr += a[i] * y[i] * y[i] * prod;
            }
            let den = full + upp * corr;
            if !(num > 0.0 && den > 0.0) {
                return Err(Error::DomainViolation(
                    "sigma-form quotient left the positive cone".into(),
                ));
            }
            let g = (aa * aa + 1.0).sqrt() / (2.0 * b) * (num / den).ln();
            Ok(g - params.level())
        }
        Regime::MongeAmpere => {
            let sig_n: f64 = a.iter().product();
            let det = sig_n * (up.powi(n as i32) + 2.0 * s * upp * up.powi(n as i32 - 1));
            if !(det > 0.0) {
                return Err(Error::DomainViolation("determinant not positive".into()));
            }
            Ok(det.ln() / nf - params.level())
        }
        Regime::InverseHarmonic => {
            let frame = RadialFrame::new(a.to_vec(), y.to_vec(), up, upp)?;
            let sn1 = sigma_k_profile(&frame, n - 1);
            let sn = sigma_k_profile(&frame, n);
            Ok(-2f64.sqrt() * sn1 / sn - params.level())
        }
        Regime::ArcTanShifted | Regime::SpecialLagrangian => {
            let frame = RadialFrame::new(a.to_vec(), y.to_vec(), up, upp)?;
            let mut even = 0.0;
            let mut odd = 0.0;
            for k in 0..=(n / 2) {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                if 2 * k <= n {
                    even += sign * sigma_k_profile(&frame, 2 * k);
                }
                if 2 * k + 1 <= n {
                    odd += sign * sigma_k_profile(&frame, 2 * k + 1);
                }
            }
            let c_arg = if params.regime() == Regime::SpecialLagrangian {
                params.level()
            } else {
                let (aa, b) = (params.a().unwrap(), params.b().unwrap());
                nf * std::f64::consts::FRAC_PI_4 + b * params.level() / (aa * aa + 1.0).sqrt()
            };
            let alg = c_arg.cos() * odd - c_arg.sin() * even;
            let norm = even.hypot(odd);
            let angle = (alg / norm).clamp(-1.0, 1.0).asin();
            if params.regime() == Regime::SpecialLagrangian {
                Ok(angle)
            } else {
                let (aa, b) = (params.a().unwrap(), params.b().unwrap());
                Ok((aa * aa + 1.0).sqrt() / b * angle)
            }
        }
    }
}

/// Residual check in the requested mode. A sample passes only when the
/// eigenvalue path and the sigma-form path agree to `1e-9`; the mode
/// condition itself is `min defect >= -1e-9` (AtLeast) or
/// `max |defect| <= 1e-7` (Equality).
pub fn residual_check(
    sol: &PuncturedSolution,
    sampler: &Sampler,
    mode: ResidualMode,
) -> Result<(Vec<CheckEntry>, ResidualStats)> {
    let points = conical_filter(sol, sampler.points(sol.params().dim()));
    let a = sol.model().eigenvalues().to_vec();
    let mut min_defect = f64::INFINITY;
    let mut max_defect = f64::NEG_INFINITY;
    let mut max_abs = 0.0f64;
    let mut max_gap = 0.0f64;
    for x in &points {
        let ev = sol.evaluate(x)?;
        let g_eigen = sol.params().eval_g(&ev.spectrum)?;
        let defect_a = g_eigen - sol.params().level();
        let defect_b = sigma_path_defect(sol.params(), &a, &ev.y, ev.s, ev.up, ev.upp)?;
        min_defect = min_defect.min(defect_a);
        max_defect = max_defect.max(defect_a);
        max_abs = max_abs.max(defect_a.abs());
        max_gap = max_gap.max((defect_a - defect_b).abs());
    }
    let stats = ResidualStats {
        min_defect,
        max_defect,
        max_abs_defect: max_abs,
        max_path_gap: max_gap,
    };
    let (name, measured, tolerance, ok) = match mode {
        ResidualMode::AtLeast => (
            "residual-atleast",
            min_defect,
            1e-9,
            min_defect >= -1e-9,
        ),
        ResidualMode::Equality => ("residual-equality", max_abs, 1e-7, max_abs <= 1e-7),
    };
    let entries = vec![
        CheckEntry {
            name: name.into(),
            status: if ok { CheckStatus::Pass } else { CheckStatus::Fail },
            measured,
            tolerance,
            samples: points.len(),
        },
        CheckEntry {
            name: "residual-paths".into(),
            status: if max_gap <= 1e-9 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured: max_gap,
            tolerance: 1e-9,
            samples: points.len(),
        },
    ];
    Ok((entries, stats))
}

/// Convexity: positive Hessian spectrum over samples and the scalar
/// inequality `U' + 2 s U'' > 0` over the profile grid.
pub fn convexity_check(sol: &PuncturedSolution, sampler: &Sampler) -> Result<Vec<CheckEntry>> {
    let points = conical_filter(sol, sampler.points(sol.params().dim()));
    let mut min_eig = f64::INFINITY;
    for x in &points {
        let ev = sol.evaluate(x)?;
        min_eig = min_eig.min(ev.spectrum.min());
    }
    let grid: Vec<f64> = match sol.profile().grid_s() {
        Some(s) => s.iter().cloned().filter(|&v| v > 0.0).collect(),
        None => (0..200)
            .map(|k| 10f64.powf(-4.0 + 10.0 * k as f64 / 199.0))
            .collect(),
    };
    let mut min_scalar = f64::INFINITY;
    for &s in &grid {
        let v = sol.profile().psi_at(s) + 2.0 * s * sol.profile().dpsi_at(s);
        min_scalar = min_scalar.min(v);
    }
    Ok(vec![
        CheckEntry {
            name: "convexity-hessian".into(),
            status: if min_eig > 0.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured: min_eig,
            tolerance: 0.0,
            samples: points.len(),
        },
        CheckEntry {
            name: "convexity-scalar".into(),
            status: if min_scalar > 0.0 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured: min_scalar,
            tolerance: 0.0,
            samples: grid.len(),
        },
    ])
}

/// Residual of the profile's own ODE at grid midpoints, normalized by the
/// magnitude of its terms. The interpolated pair `(psi, psi')` is taken from
/// the stored nodes, so tampering with the stored grid breaks this check.
pub fn ode_residual_check(sol: &PuncturedSolution) -> CheckEntry {
    let profile = sol.profile();
    let params = sol.params();
    let a = sol.model().eigenvalues();
    let n = a.len() as i32;
    let residual_at = |s: f64| -> f64 {
        let up = profile.psi_at(s);
        let upp = profile.dpsi_at(s);
        match profile {
            Profile::Quadratic { .. } => 0.0,
            Profile::Shooting(_) | Profile::ExactIsotropic(_) => {
                let b = params.b().unwrap();
                let c0 = params.c0().unwrap();
                let prod: f64 = a.iter().map(|&ai| up + 2.0 * b / ai).product();
                let prod_tail: f64 = a[1..].iter().map(|&ai| up + 2.0 * b / ai).product();
                let lag = if matches!(profile, Profile::Shooting(_)) {
                    s + 1.0
                } else {
                    s
                };
                let r = up.powi(n) - c0 * prod
                    + 2.0 * lag * upp * (up.powi(n - 1) - c0 * prod_tail);
                let scale =
                    up.powi(n) + c0 * prod + (2.0 * lag * upp * (up.powi(n - 1) + c0 * prod_tail)).abs();
                r / scale.max(1e-300)
            }
            Profile::ExactMa(_) => {
                let r = up.powi(n) + 2.0 * s * upp * up.powi(n - 1) - 1.0;
                let scale = up.powi(n) + (2.0 * s * upp * up.powi(n - 1)).abs() + 1.0;
                r / scale
            }
        }
    };
    let mids: Vec<f64> = match profile.grid_s() {
        Some(grid) => grid
            .windows(2)
            .filter(|w| w[0] > 0.0 || w[1] > 0.0)
            .map(|w| 0.5 * (w[0] + w[1]))
            .collect(),
        None => (0..400)
            .map(|k| 10f64.powf(-4.0 + 10.0 * k as f64 / 399.0))
            .collect(),
    };
    let mut worst = 0.0f64;
    for &s in &mids {
        worst = worst.max(residual_at(s).abs());
    }
    CheckEntry {
        name: "ode-residual".into(),
        status: if worst <= 1e-8 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        measured: worst,
        tolerance: 1e-8,
        samples: mids.len(),
    }
}

/// Comparison bound `u <= (1/2) x^T A x + beta x + c` over samples, plus the
/// origin identity `gap(0) = c - u0`.
pub fn comparison_check(sol: &PuncturedSolution, sampler: &Sampler) -> Vec<CheckEntry> {
    let points = sampler.points(sol.params().dim());
    let mut min_gap = f64::INFINITY;
    for x in &points {
        min_gap = min_gap.min(sol.comparison_gap(x));
    }
    let origin_defect =
        (sol.comparison_gap(&vec![0.0; sol.params().dim()]) - (sol.model().c() - sol.model().u0()))
            .abs();
    vec![
        CheckEntry {
            name: "comparison".into(),
            status: if min_gap >= -1e-9 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured: min_gap,
            tolerance: 1e-9,
            samples: points.len(),
        },
        CheckEntry {
            name: "comparison-origin".into(),
            status: if origin_defect <= 1e-12 {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured: origin_defect,
            tolerance: 1e-12,
            samples: 1,
        },
    ]
}

/// Reflection symmetry: `u - beta x` is invariant under all `2^n` sign
/// patterns in the eigen-frame.
pub fn symmetry_check(sol: &PuncturedSolution, sampler: &Sampler) -> CheckEntry {
    let n = sol.params().dim();
    let points = sampler.points(n);
    let beta = sol.model().beta().to_vec();
    let base = |x: &[f64]| sol.value(x) - beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>();
    let mut worst = 0.0f64;
    for x in &points {
        let reference = base(x);
        for mask in 0..(1u32 << n.min(16)) {
            let signs: Vec<f64> = (0..n)
                .map(|i| if mask & (1 << i) != 0 { -1.0 } else { 1.0 })
                .collect();
            let xr = sol.reflect(x, &signs);
            worst = worst.max((base(&xr) - reference).abs());
        }
    }
    CheckEntry {
        name: "symmetry".into(),
        status: if worst < 1e-10 {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        measured: worst,
        tolerance: 1e-10,
        samples: points.len(),
    }
}

/// Fit of the gap decay `|u - quadratic| ~ r^{2 - delta0}` along one ray.
/// Returns the entry and the fitted exponent (when not degenerate).
pub fn decay_fit(
    sol: &PuncturedSolution,
    direction: &[f64],
    radii: &[f64],
) -> Result<(CheckEntry, Option<f64>)> {
    let expected = match sol.params().regime() {
        Regime::MongeAmpere => 2.0 - sol.params().dim() as f64,
        _ => 2.0 - delta0(sol.params(), sol.model().eigenvalues())?.delta0,
    };
    let mut logs: Vec<(f64, f64)> = Vec::new();
    let mut degenerate = 0usize;
    for &r in radii {
        let x: Vec<f64> = direction.iter().map(|d| d * r).collect();
        let gap = sol.comparison_gap(&x);
        let scale = sol.model().quadratic_at(&x).abs().max(1.0);
        if gap <= 1e-12 * scale {
            degenerate += 1;
        } else {
            logs.push((r.ln(), gap.ln()));
        }
    }
    if degenerate > radii.len() / 2 {
        return Ok((
            CheckEntry {
                name: "decay".into(),
                status: CheckStatus::ExactMatch,
                measured: 0.0,
                tolerance: 0.05 * expected.abs(),
                samples: radii.len(),
            },
            None,
        ));
    }
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let cov: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let var: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = cov / var;
    let tol = 0.05 * expected.abs();
    Ok((
        CheckEntry {
            name: "decay".into(),
            status: if (slope - expected).abs() <= tol {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            measured: slope,
            tolerance: tol,
            samples: radii.len(),
        },
        Some(slope),
    ))
}

/// Admissibility gate `delta0 > 2`.
pub fn admissibility(
    params: &OperatorParams,
    lambda: &[f64],
) -> Result<(DecayExponent, CheckEntry)> {
    let d = delta0(params, lambda)?;
    let entry = CheckEntry {
        name: "admissibility".into(),
        status: if d.admissible {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        },
        measured: d.delta0,
        tolerance: 2.0,
        samples: 1,
    };
    Ok((d, entry))
}

/// Result of a rigidity probe sweep.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProbeResult {
    /// Largest spread `max_i - min_i` of the axis-dependent identity side.
    pub max_spread: f64,
    /// The `s` where it was attained.
    pub s_at_max: f64,
}

/// Evaluates the regime's per-axis identity side at points on each
/// coordinate axis with `(1/2) a_i x_i^2 = s` and measures how much it
/// depends on the axis. The spread vanishes identically when `U'' = 0` or
/// the eigenvalues are isotropic; a nonzero spread certifies that no
/// non-quadratic generalized symmetric solution can exist over this `A`.
pub fn rigidity_probe(
    params: &OperatorParams,
    lambda: &[f64],
    profile: &Profile,
    window: (f64, f64),
    samples: usize,
) -> Result<ProbeResult> {
    if lambda.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::DomainViolation("probe requires positive eigenvalues".into()));
    }
    let n = lambda.len();
    let table = sigma_table(lambda);
    let (s1, s2) = window;
    if !(s1 > 0.0 && s2 > s1) || samples < 2 {
        return Err(Error::InvalidInput("bad probe window".into()));
    }
    let axis_side = |s: f64, up: f64, upp: f64, i0: usize| -> Result<f64> {
        match params.regime() {
            Regime::LogQuotient => {
                let b = params.b().unwrap();
                let c0 = params.c0().unwrap();
                let mut prod = 1.0;
                for (i, &ai) in lambda.iter().enumerate() {
                    if i != i0 {
                        prod *= up + 2.0 * b / ai;
                    }
                }
                Ok(c0 * 2.0 * s * upp * prod)
            }
            Regime::InverseHarmonic => Ok(2.0
                * s
                * upp
                * up.powi(n as i32 - 2)
                * lambda[i0]
                * table.sigma_excl(n - 2, i0)),
            Regime::SpecialLagrangian => {
                let c0 = params.level();
                let mut acc = 0.0;
                for k in 0..=n.saturating_sub(2) {
                    let frac = k as f64 / 2.0 - (k / 2) as f64;
                    let pk = (-1f64).powi(k as i32) * (c0 + frac * std::f64::consts::PI).cos();
                    acc += 2.0 * s * pk * upp * up.powi(k as i32) * lambda[i0]
                        * table.sigma_excl(k, i0);
                }
                Ok(acc)
            }
            other => Err(Error::Unsupported(format!(
                "rigidity probe has no identity for regime {other}"
            ))),
        }
    };
    let mut max_spread = 0.0f64;
    let mut s_at_max = s1;
    for j in 0..samples {
        let s = s1 * (s2 / s1).powf(j as f64 / (samples - 1) as f64);
        let up = profile.psi_at(s);
        let upp = profile.dpsi_at(s);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i0 in 0..n {
            let v = axis_side(s, up, upp, i0)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if hi - lo > max_spread {
            max_spread = hi - lo;
            s_at_max = s;
        }
    }
    Ok(ProbeResult { max_spread, s_at_max })
}

/// Standard check battery for a solution kind.
pub fn run_standard_checks(sol: &PuncturedSolution, sampler: &Sampler) -> Result<VerificationReport> {
    let names: Vec<&str> = match sol.kind() {
        SolutionKind::Quadratic => vec![
            "residual-equality",
            "convexity",
            "comparison",
            "symmetry",
            "ode-residual",
            "decay",
        ],
        SolutionKind::Subsolution => vec![
            "residual-atleast",
            "convexity",
            "comparison",
            "symmetry",
            "ode-residual",
            "decay",
            "admissibility",
        ],
        SolutionKind::ExactIsotropic => vec![
            "residual-equality",
            "convexity",
            "comparison",
            "symmetry",
            "ode-residual",
            "decay",
            "admissibility",
        ],
        SolutionKind::ExactMa => vec![
            "residual-equality",
            "convexity",
            "comparison",
            "symmetry",
            "ode-residual",
            "decay",
        ],
    };
    run_checks(sol, sampler, &names)
}

/// Runs the named checks and merges them into a report.
pub fn run_checks(
    sol: &PuncturedSolution,
    sampler: &Sampler,
    names: &[&str],
) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    for &name in names {
        match name {
            "residual-atleast" => {
                checks.extend(residual_check(sol, sampler, ResidualMode::AtLeast)?.0)
            }
            "residual-equality" => {
                checks.extend(residual_check(sol, sampler, ResidualMode::Equality)?.0)
            }
            "convexity" => checks.extend(convexity_check(sol, sampler)?),
            "comparison" => checks.extend(comparison_check(sol, sampler)),
            "symmetry" => checks.push(symmetry_check(sol, sampler)),
            "ode-residual" => checks.push(ode_residual_check(sol)),
            "decay" => {
                let radii: Vec<f64> = (0..24)
                    .map(|k| 10f64.powf(1.0 + 2.0 * k as f64 / 23.0))
                    .collect();
                for (i, dir) in sampler
                    .directions(sol.params().dim(), 3)
                    .iter()
                    .enumerate()
                {
                    let (mut entry, _) = decay_fit(sol, dir, &radii)?;
                    entry.name = format!("decay-ray{i}");
                    checks.push(entry);
                }
            }
            "admissibility" => {
                checks.push(admissibility(sol.params(), sol.model().eigenvalues())?.1)
            }
            other => {
                return Err(Error::InvalidInput(format!("unknown check '{other}'")));
            }
        }
    }
    Ok(VerificationReport::from_checks(checks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::odeflow::{build_profile, shoot_alpha, GData, SolveControls};
    use crate::solution::QuadraticModel;

    fn quadratic_sl() -> PuncturedSolution {
        let level: f64 = 1.0f64.atan() + 2.0 * 2.0f64.atan();
        let params = OperatorParams::special_lagrangian(3, level).unwrap();
        let model = QuadraticModel::from_eigenvalues(
            &params,
            vec![1.0, 2.0, 2.0],
            vec![0.1, 0.0, -0.2],
            0.7,
            0.7,
        )
        .unwrap();
        PuncturedSolution::new(params, model, Profile::Quadratic { u0: 0.7 }).unwrap()
    }

    fn subsolution(a: Vec<f64>, target: f64) -> PuncturedSolution {
        let gd = GData::from_eigenvalues(1.0, a.clone()).unwrap();
        let controls = SolveControls::default();
        let alpha = shoot_alpha(&gd, target, &controls).unwrap();
        let profile = build_profile(&gd, alpha, 0.0, &controls).unwrap();
        let mu = profile.mu().unwrap();
        let params = gd.params().clone();
        let model =
            QuadraticModel::from_eigenvalues(&params, a, vec![0.0; 3], mu, 0.0).unwrap();
        PuncturedSolution::new(params, model, Profile::Shooting(profile)).unwrap()
    }

    #[test]
    fn quadratic_passes_standard_battery() {
        let sol = quadratic_sl();
        let sampler = Sampler {
            count: 120,
            ..Sampler::default()
        };
        let report = run_standard_checks(&sol, &sampler).unwrap();
        assert!(report.overall, "{:#?}", report.checks);
        assert!(report
            .checks
            .iter()
            .any(|c| c.name.starts_with("decay") && c.status == CheckStatus::ExactMatch));
    }

    #[test]
    fn subsolution_is_strict_and_fails_equality() {
        let sol = subsolution(vec![1.0, 2.0, 2.0], 1.0);
        let sampler = Sampler {
            count: 150,
            ..Sampler::default()
        };
        let (entries, stats) = residual_check(&sol, &sampler, ResidualMode::AtLeast).unwrap();
        assert!(entries.iter().all(|e| e.passed()), "{entries:#?}");
        assert!(stats.min_defect >= -1e-9);
        assert!(stats.max_defect > 1e-6, "strictly positive somewhere");

        let (entries, _) = residual_check(&sol, &sampler, ResidualMode::Equality).unwrap();
        let eq = entries.iter().find(|e| e.name == "residual-equality").unwrap();
        assert_eq!(eq.status, CheckStatus::Fail);
    }

    #[test]
    fn subsolution_standard_battery_passes() {
        let sol = subsolution(vec![1.0, 1.0, 2.0], 0.5);
        let sampler = Sampler {
            count: 150,
            ..Sampler::default()
        };
        let report = run_standard_checks(&sol, &sampler).unwrap();
        assert!(report.overall, "{:#?}", report.checks);
    }

    #[test]
    fn tampered_profile_fails_ode_residual() {
        let mut sol = subsolution(vec![1.0, 2.0, 2.0], 1.0);
        assert_eq!(ode_residual_check(&sol).status, CheckStatus::Pass);
        if let Profile::Shooting(p) = sol.profile_mut() {
            // Serialization round trip is the supported mutation path; here
            // we poke the node table directly through serde.
            let mut v = serde_json::to_value(&*p).unwrap();
            let psi = v["psi"].as_array_mut().unwrap();
            let mid = psi.len() / 2;
            let old = psi[mid].as_f64().unwrap();
            psi[mid] = serde_json::Value::from(old + 1e-3);
            *p = serde_json::from_value(v).unwrap();
        }
        assert_eq!(ode_residual_check(&sol).status, CheckStatus::Fail);
    }

    #[test]
    fn rigidity_probe_contract() {
        let a = vec![1.0, 2.0, 2.0];
        let gd = GData::from_eigenvalues(1.0, a.clone()).unwrap();
        let controls = SolveControls::default();
        let profile =
            Profile::Shooting(build_profile(&gd, 2.0, 0.0, &controls).unwrap());
        let quad = Profile::Quadratic { u0: 0.0 };

        // Quadratic profile: spread identically zero in every probe regime.
        let lq = gd.params().clone();
        let ih = OperatorParams::inverse_harmonic(3, -2f64.sqrt() * 2.0).unwrap();
        let sl_level: f64 = 1.0f64.atan() + 2.0 * 2.0f64.atan();
        let sl = OperatorParams::special_lagrangian(3, sl_level).unwrap();
        for params in [&lq, &ih, &sl] {
            let r = rigidity_probe(params, &a, &quad, (0.1, 10.0), 32).unwrap();
            assert!(r.max_spread < 1e-12);
            let r = rigidity_probe(params, &a, &profile, (0.1, 10.0), 32).unwrap();
            assert!(r.max_spread > 1e-6, "{} spread {}", params.regime(), r.max_spread);
        }

        // Isotropic eigenvalues: spread zero even for a curved profile.
        let iso = vec![1.0, 1.0, 1.0];
        let gd_iso = GData::from_eigenvalues(1.0, iso.clone()).unwrap();
        let profile_iso =
            Profile::Shooting(build_profile(&gd_iso, 2.0, 0.0, &controls).unwrap());
        let r = rigidity_probe(gd_iso.params(), &iso, &profile_iso, (0.1, 10.0), 32).unwrap();
        assert!(r.max_spread < 1e-12);

        let ma = OperatorParams::monge_ampere(3, 0.0).unwrap();
        assert!(rigidity_probe(&ma, &a, &quad, (0.1, 10.0), 8).is_err());
    }

    #[test]
    fn report_merging_and_overall() {
        let pass = CheckEntry {
            name: "b".into(),
            status: CheckStatus::Pass,
            measured: 0.0,
            tolerance: 1.0,
            samples: 1,
        };
        let fail = CheckEntry {
            name: "a".into(),
            status: CheckStatus::Fail,
            measured: 9.0,
            tolerance: 1.0,
            samples: 1,
        };
        let r = VerificationReport::from_checks(vec![pass.clone(), fail]);
        assert!(!r.overall);
        assert_eq!(r.checks[0].name, "a");
        let r = VerificationReport::from_checks(vec![pass]);
        assert!(r.overall);
    }
}
