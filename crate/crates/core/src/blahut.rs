//! Power-constrained Blahut optimization of the photon-number prior.
//!
//! For a multiplier `mu >= 0` on the mean photon number, the recursion
//!
//! c_n = exp( sum_k Q_{k,n} ln(Q_{k,n} / f_k) - mu n ),
//! p'_n = p_n c_n / sum_m p_m c_m,
//!
//! with `f_k = sum_m p_m Q_{k,m}` the output weights of the current
//! prior, climbs the objective `J = I - mu N` monotonically and converges
//! to the capacity-cost optimum. Sweeping `mu` traces the capacity versus
//! power curve; [`solve_power`] inverts that map by bisection to land on a
//! prescribed mean photon number.
//!
//! The update is multiplicative, so letters whose initial probability is
//! zero stay zero forever. Letters that start positive are kept at or
//! above a tiny floor ([`PROB_FLOOR`]): without it, letters that crash
//! early (while the output weights are still far from their final shape)
//! underflow to exact zero and can never regrow, which freezes the
//! recursion short of the optimum at strong attenuation. The floor is
//! twenty-odd orders of magnitude below every threshold used elsewhere,
//! so it never shows up in results.

use crate::error::{Error, Result};
use crate::number::{column_divergence, discrete_mi, LossKernel, POSTERIOR_FLOOR};
use crate::types::{thermal_prior, Information, PhotonDistribution};

/// Smallest probability kept for a letter that started positive.
pub const PROB_FLOOR: f64 = 1e-60;

/// Objective decreases beyond this tolerance signal a numerical fault.
pub const OBJECTIVE_TOL: f64 = 1e-12;

/// A prior entry below this is "zero probability" when looking for gaps.
pub const GAP_THRESHOLD: f64 = 1e-8;

/// A prior entry above this counts as support when looking for gaps.
pub const SUPPORT_THRESHOLD: f64 = 1e-3;

/// Parameters of one optimization run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlahutConfig {
    /// Lagrange multiplier for the average-power constraint.
    pub mu: f64,
    /// Hard iteration cap.
    pub max_iters: usize,
    /// Truncation dimension of the Fock space.
    pub dim: usize,
    /// Early stop once the objective increment falls to this...
    pub eps_i_target: f64,
    /// ...and the max-norm change of the prior falls to this.
    pub eps_p_target: f64,
}

impl Default for BlahutConfig {
    fn default() -> Self {
        Self {
            mu: 0.0,
            max_iters: 100_000,
            dim: 200,
            eps_i_target: 1e-14,
            eps_p_target: 1e-12,
        }
    }
}

impl BlahutConfig {
    pub fn with_mu(mu: f64) -> Self {
        Self {
            mu,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "mu must be finite and nonnegative, got {}",
                self.mu
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.dim < 2 {
            return Err(Error::DimTooSmall {
                min: 2,
                got: self.dim,
            });
        }
        if !(self.eps_i_target >= 0.0 && self.eps_p_target >= 0.0) {
            return Err(Error::InvalidConfig(
                "eps targets must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of a run: the converged prior plus the convergence story.
#[derive(Debug, Clone)]
pub struct BlahutRun {
    /// Final prior p^(r).
    pub prior: PhotonDistribution,
    /// Mutual information of the final prior.
    pub mi: Information,
    /// Mean photon number of the final prior.
    pub n_mean: f64,
    /// Multiplier the run was performed at.
    pub mu: f64,
    /// J^(r) = I^(r) - mu N^(r) for every visited prior, final included.
    pub objective_trace: Vec<f64>,
    /// Last objective increment.
    pub eps_i: f64,
    /// Last max-norm change of the prior.
    pub eps_p: f64,
    /// Number of multiplicative updates applied.
    pub iters_used: usize,
}

/// Scratch buffers reused across iterations.
struct Workspace {
    output: Vec<f64>,
    ln_output: Vec<f64>,
    gain: Vec<f64>,
    next: Vec<f64>,
}

impl Workspace {
    fn new(dim: usize) -> Self {
        Self {
            output: vec![0.0; dim],
            ln_output: vec![0.0; dim],
            gain: vec![0.0; dim],
            next: vec![0.0; dim],
        }
    }
}

struct StepOutcome {
    /// Objective of the prior the step started from.
    objective: f64,
    /// Max-norm change produced by the update.
    max_delta: f64,
}

/// One multiplicative sweep: fills `ws.next` from `prior`.
fn step_into(
    kernel: &LossKernel,
    mu: f64,
    prior: &[f64],
    ws: &mut Workspace,
) -> Result<StepOutcome> {
    kernel.accumulate_output(prior, &mut ws.output);
    for (lf, &f) in ws.ln_output.iter_mut().zip(&ws.output) {
        *lf = if f >= POSTERIOR_FLOOR { f.ln() } else { 0.0 };
    }

    let mut objective = 0.0;
    let mut max_gain = f64::NEG_INFINITY;
    for (n, &p) in prior.iter().enumerate() {
        if p > 0.0 {
            let g = column_divergence(kernel, n, &ws.output, &ws.ln_output) - mu * n as f64;
            ws.gain[n] = g;
            objective += p * g;
            if g > max_gain {
                max_gain = g;
            }
        }
    }
    if !max_gain.is_finite() {
        return Err(Error::DegeneratePrior);
    }

    // Exponentiate relative to the largest gain so nothing overflows.
    let mut total = 0.0;
    for (n, &p) in prior.iter().enumerate() {
        let w = if p > 0.0 {
            p * (ws.gain[n] - max_gain).exp()
        } else {
            0.0
        };
        ws.next[n] = w;
        total += w;
    }
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegeneratePrior);
    }

    // Normalize, then pin surviving letters at the floor and renormalize;
    // the correction is ~1e-58 in total mass.
    let mut floored = 0.0;
    for (n, &p) in prior.iter().enumerate() {
        let mut w = ws.next[n] / total;
        if p > 0.0 && w < PROB_FLOOR {
            w = PROB_FLOOR;
        }
        ws.next[n] = w;
        floored += w;
    }
    let mut max_delta = 0.0f64;
    for (w, &p) in ws.next.iter_mut().zip(prior) {
        *w /= floored;
        max_delta = max_delta.max((*w - p).abs());
    }

    Ok(StepOutcome {
        objective,
        max_delta,
    })
}

/// Objective, mutual information, and mean power of a prior, evaluated
/// with the same guarded sums the recursion itself uses.
fn evaluate(kernel: &LossKernel, mu: f64, prior: &[f64], ws: &mut Workspace) -> (f64, f64, f64) {
    kernel.accumulate_output(prior, &mut ws.output);
    for (lf, &f) in ws.ln_output.iter_mut().zip(&ws.output) {
        *lf = if f >= POSTERIOR_FLOOR { f.ln() } else { 0.0 };
    }
    let mut mi = 0.0;
    let mut power = 0.0;
    for (n, &p) in prior.iter().enumerate() {
        if p > 0.0 {
            mi += p * column_divergence(kernel, n, &ws.output, &ws.ln_output);
            power += p * n as f64;
        }
    }
    (mi - mu * power, mi, power)
}

/// One public recursion sweep at multiplier `mu`.
///
/// Zeros of the prior stay zero; the output is normalized.
pub fn blahut_step(
    prior: &PhotonDistribution,
    kernel: &LossKernel,
    mu: f64,
) -> Result<PhotonDistribution> {
    if prior.dim() != kernel.dim() {
        return Err(Error::DimMismatch {
            prior: prior.dim(),
            kernel: kernel.dim(),
        });
    }
    if !mu.is_finite() || mu < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "mu must be finite and nonnegative, got {mu}"
        )));
    }
    let mut ws = Workspace::new(kernel.dim());
    step_into(kernel, mu, prior.probs(), &mut ws)?;
    PhotonDistribution::from_probs(std::mem::take(&mut ws.next))
}

/// Runs the recursion at `cfg.mu` until both eps targets are met or the
/// iteration budget is exhausted. `init` defaults to the uniform prior
/// and must be strictly positive: the update cannot move mass onto a
/// letter the initializer excluded.
pub fn blahut_run(
    cfg: &BlahutConfig,
    eta: f64,
    init: Option<&PhotonDistribution>,
) -> Result<BlahutRun> {
    cfg.validate()?;
    let kernel = LossKernel::new(eta, cfg.dim)?;
    run_with_kernel(cfg, &kernel, init)
}

pub(crate) fn run_with_kernel(
    cfg: &BlahutConfig,
    kernel: &LossKernel,
    init: Option<&PhotonDistribution>,
) -> Result<BlahutRun> {
    cfg.validate()?;
    let mut prior = match init {
        Some(p) => {
            if p.dim() != cfg.dim {
                return Err(Error::DimMismatch {
                    prior: p.dim(),
                    kernel: cfg.dim,
                });
            }
            if p.probs().iter().any(|&x| x <= 0.0) {
                return Err(Error::InvalidConfig(
                    "the initial prior must be strictly positive".into(),
                ));
            }
            p.probs().to_vec()
        }
        None => vec![1.0 / cfg.dim as f64; cfg.dim],
    };

    let mut ws = Workspace::new(cfg.dim);
    let mut trace = Vec::with_capacity(cfg.max_iters.min(1 << 20) + 1);
    let mut eps_i = f64::INFINITY;
    let mut eps_p = f64::INFINITY;
    let mut iters_used = 0;

    for iter in 0..cfg.max_iters {
        let outcome = step_into(kernel, cfg.mu, &prior, &mut ws)?;
        if let Some(&prev) = trace.last() {
            let drop = prev - outcome.objective;
            if drop > OBJECTIVE_TOL {
                return Err(Error::ObjectiveDecreased { iter, delta: drop });
            }
            eps_i = outcome.objective - prev;
        }
        trace.push(outcome.objective);
        std::mem::swap(&mut prior, &mut ws.next);
        eps_p = outcome.max_delta;
        iters_used = iter + 1;
        if eps_i <= cfg.eps_i_target && eps_p <= cfg.eps_p_target {
            break;
        }
    }

    let (objective, mi, n_mean) = evaluate(kernel, cfg.mu, &prior, &mut ws);
    if let Some(&prev) = trace.last() {
        let drop = prev - objective;
        if drop > OBJECTIVE_TOL {
            return Err(Error::ObjectiveDecreased {
                iter: iters_used,
                delta: drop,
            });
        }
        eps_i = objective - prev;
    }
    trace.push(objective);

    Ok(BlahutRun {
        prior: PhotonDistribution::from_probs(prior)?,
        mi: Information::from_nats(mi),
        n_mean,
        mu: cfg.mu,
        objective_trace: trace,
        eps_i,
        eps_p,
        iters_used,
    })
}

/// Iteration budget used while hunting for the right multiplier; the
/// achieved power stabilizes orders of magnitude sooner than the fine
/// structure of the prior, so a short run is enough to steer bisection.
const PROBE_ITERS: usize = 1500;

/// Relative tolerance on the achieved mean photon number.
const POWER_REL_TOL: f64 = 1e-3;

const MAX_BRACKET_EXPANSIONS: usize = 60;
const MAX_BISECTION_STEPS: usize = 100;

/// Finds the multiplier whose converged prior carries mean photon number
/// `n_target` (within 0.1%) and returns the full-budget run at that
/// multiplier.
///
/// The achieved power decreases monotonically in `mu`; bisection starts
/// from `mu_0 = ln(1 + 1/N)`, the exact multiplier of the lossless
/// channel, and expands by doubling/halving until the target is
/// bracketed.
pub fn solve_power(eta: f64, n_target: f64, cfg_template: &BlahutConfig) -> Result<BlahutRun> {
    cfg_template.validate()?;
    if !n_target.is_finite() || n_target <= 0.0 {
        return Err(Error::InvalidMeanPhotons(n_target));
    }
    if n_target > 0.45 * cfg_template.dim as f64 {
        return Err(Error::InvalidConfig(format!(
            "target power {n_target} is too close to the truncation {}; raise dim",
            cfg_template.dim
        )));
    }
    let kernel = LossKernel::new(eta, cfg_template.dim)?;

    let probe_cfg = BlahutConfig {
        max_iters: cfg_template.max_iters.min(PROBE_ITERS),
        ..*cfg_template
    };
    let probe = |mu: f64| -> Result<f64> {
        let cfg = BlahutConfig { mu, ..probe_cfg };
        Ok(run_with_kernel(&cfg, &kernel, None)?.n_mean)
    };
    let full = |mu: f64| -> Result<BlahutRun> {
        let cfg = BlahutConfig {
            mu,
            ..*cfg_template
        };
        run_with_kernel(&cfg, &kernel, None)
    };
    let on_target = |n: f64| (n - n_target).abs() <= POWER_REL_TOL * n_target;

    // Bracket: mu_lo with N >= target, mu_hi with N <= target.
    let mu0 = (1.0 + 1.0 / n_target).ln();
    let mut mu_lo = mu0;
    let mut n_lo = probe(mu_lo)?;
    let mut mu_hi = mu_lo;
    let mut n_hi = n_lo;
    if n_lo < n_target {
        // Need a smaller multiplier; watch for saturation at the
        // unconstrained optimum, where no multiplier can reach the target.
        let mut expansions = 0;
        while n_lo < n_target {
            if expansions >= MAX_BRACKET_EXPANSIONS {
                return Err(Error::BracketNotFound {
                    target: n_target,
                    reachable: n_lo,
                    expansions,
                });
            }
            let mu_next = mu_lo / 2.0;
            let n_next = probe(mu_next)?;
            if n_next < n_lo - 1e-9 {
                return Err(Error::NonMonotonePower {
                    mu_lo: mu_next,
                    mu_hi: mu_lo,
                    n_lo: n_next,
                    n_hi: n_lo,
                });
            }
            if n_next - n_lo < 1e-9 * n_target {
                return Err(Error::BracketNotFound {
                    target: n_target,
                    reachable: n_next,
                    expansions,
                });
            }
            mu_lo = mu_next;
            n_lo = n_next;
            expansions += 1;
        }
    } else {
        let mut expansions = 0;
        while n_hi > n_target {
            if expansions >= MAX_BRACKET_EXPANSIONS {
                return Err(Error::BracketNotFound {
                    target: n_target,
                    reachable: n_hi,
                    expansions,
                });
            }
            let mu_next = mu_hi * 2.0;
            let n_next = probe(mu_next)?;
            if n_next > n_hi + 1e-9 {
                return Err(Error::NonMonotonePower {
                    mu_lo: mu_hi,
                    mu_hi: mu_next,
                    n_lo: n_hi,
                    n_hi: n_next,
                });
            }
            mu_hi = mu_next;
            n_hi = n_next;
            expansions += 1;
        }
    }
    if n_lo < n_hi - 1e-9 {
        return Err(Error::NonMonotonePower {
            mu_lo,
            mu_hi,
            n_lo,
            n_hi,
        });
    }

    // Bisect on cheap probes until the achieved power lands, then confirm
    // with the full budget; the tail of the loop refines against the
    // full-budget runs in the rare case the probe drifted.
    let mut steps = 0;
    let mut best: Option<BlahutRun> = None;
    while steps < MAX_BISECTION_STEPS {
        let mu_mid = 0.5 * (mu_lo + mu_hi);
        steps += 1;
        let n_mid = probe(mu_mid)?;
        if on_target(n_mid) {
            let run = full(mu_mid)?;
            if on_target(run.n_mean) {
                return Ok(run);
            }
            // The probe landed but the converged run drifted off; keep
            // bisecting with the full-budget power.
            if run.n_mean > n_target {
                mu_lo = mu_mid;
            } else {
                mu_hi = mu_mid;
            }
            best = Some(run);
            continue;
        }
        if n_mid > n_target {
            mu_lo = mu_mid;
        } else {
            mu_hi = mu_mid;
        }
    }
    if let Some(run) = best {
        if on_target(run.n_mean) {
            return Ok(run);
        }
        return Err(Error::BisectionStalled {
            target: n_target,
            achieved: run.n_mean,
            steps,
        });
    }
    let run = full(0.5 * (mu_lo + mu_hi))?;
    if on_target(run.n_mean) {
        return Ok(run);
    }
    Err(Error::BisectionStalled {
        target: n_target,
        achieved: run.n_mean,
        steps,
    })
}

/// Percent gain of the optimized prior over the thermal prior at the same
/// attenuation and the same (achieved) power:
/// `100 (I_opt - I_th) / I_th`.
pub fn percent_improvement(run: &BlahutRun, eta: f64) -> Result<f64> {
    let dim = run.prior.dim();
    let kernel = LossKernel::new(eta, dim)?;
    let reference = thermal_prior(run.n_mean, dim)?;
    let i_th = discrete_mi(&reference, &kernel)?.nats();
    if i_th <= 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok(100.0 * (run.mi.nats() - i_th) / i_th)
}

/// Optimality certificate for a prior at multiplier `mu`.
///
/// With `D_n = sum_k Q_{k,n} ln(Q_{k,n}/f_k) - mu n` and `J = I - mu N`,
/// the optimum satisfies `D_n = J` wherever the prior has mass and
/// `D_n <= J` everywhere else.
#[derive(Debug, Clone, Copy)]
pub struct KuhnTuckerReport {
    /// J = I - mu N of the prior under inspection.
    pub objective: f64,
    /// max_n (D_n - J) over every letter, support or not.
    pub max_excess: f64,
    /// max |D_n - J| over the letters above `support_threshold`.
    pub max_support_deviation: f64,
    pub support_threshold: f64,
}

pub fn kuhn_tucker_report(
    prior: &PhotonDistribution,
    kernel: &LossKernel,
    mu: f64,
    support_threshold: f64,
) -> Result<KuhnTuckerReport> {
    if prior.dim() != kernel.dim() {
        return Err(Error::DimMismatch {
            prior: prior.dim(),
            kernel: kernel.dim(),
        });
    }
    let mut ws = Workspace::new(kernel.dim());
    let (objective, _, _) = evaluate(kernel, mu, prior.probs(), &mut ws);
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_support_deviation = 0.0f64;
    for n in 0..kernel.dim() {
        let gain = column_divergence(kernel, n, &ws.output, &ws.ln_output) - mu * n as f64;
        max_excess = max_excess.max(gain - objective);
        if prior.prob(n) > support_threshold {
            max_support_deviation = max_support_deviation.max((gain - objective).abs());
        }
    }
    Ok(KuhnTuckerReport {
        objective,
        max_excess,
        max_support_deviation,
        support_threshold,
    })
}

/// Indices with probability below `gap_threshold` lying strictly between
/// two letters above `support_threshold` — the zero-probability gaps that
/// open in the optimal prior at strong attenuation.
pub fn gap_indices(
    prior: &PhotonDistribution,
    gap_threshold: f64,
    support_threshold: f64,
) -> Vec<usize> {
    let probs = prior.probs();
    let first = probs.iter().position(|&p| p > support_threshold);
    let last = probs.iter().rposition(|&p| p > support_threshold);
    let (Some(first), Some(last)) = (first, last) else {
        return Vec::new();
    };
    (first + 1..last)
        .filter(|&n| probs[n] < gap_threshold)
        .collect()
}
