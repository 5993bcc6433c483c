//! Log-barrier interior-point solver for the resource-allocation subproblems.
//!
//! The problem shape is fixed: minimize the sum of slot durations subject to
//! per-device throughput constraints whose concave side is a sum of
//! perspective-log terms `tau * log2(1 + (sum c_j z_j)/tau + d)`, minus a
//! linear part (the first-order expansion of the interference terms), plus
//! box and budget constraints on the slot energies `z`.
//!
//! A phase-I pass maximizes the minimum scaled constraint slack from the
//! caller's warm start; a negative certified optimum rejects the problem as
//! infeasible. Phase II follows the central path with Newton inner steps and
//! a geometrically increasing barrier parameter.

use crate::error::{Error, Result};

const LN_2: f64 = std::f64::consts::LN_2;

/// Tolerances and limits for the barrier solver.
#[derive(Debug, Clone)]
pub struct SolverSettings {
    /// Feasibility tolerance for the returned point.
    pub feas_tol: f64,
    /// Duality-gap target relative to the objective scale.
    pub kkt_tol: f64,
    /// Newton iterations allowed per barrier stage.
    pub max_newton_iters: usize,
    /// Barrier stages allowed per phase.
    pub max_barrier_stages: usize,
    /// Slot durations at or below this floor are reported as zero.
    pub tau_floor: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            kkt_tol: 1e-6,
            max_newton_iters: 80,
            max_barrier_stages: 30,
            tau_floor: 1e-9,
        }
    }
}

/// `tau_s * log2(1 + (sum_j c_j z_j)/tau_s + inside_const)`.
#[derive(Debug, Clone)]
pub struct PerspectiveTerm {
    pub slot: usize,
    /// (z variable index, coefficient) pairs.
    pub z_terms: Vec<(usize, f64)>,
    /// Constant added inside the log, from variables pinned to `tau`.
    pub inside_const: f64,
}

/// Concave throughput constraint: perspective terms plus a linear part,
/// required to be >= 0.
#[derive(Debug, Clone)]
pub struct QosConstraint {
    pub terms: Vec<PerspectiveTerm>,
    pub linear_tau: Vec<(usize, f64)>,
    pub linear_z: Vec<(usize, f64)>,
    pub constant: f64,
    /// Characteristic magnitude, used to normalize phase-I slacks.
    pub scale: f64,
}

/// `z <= coeff * tau_slot`.
#[derive(Debug, Clone)]
pub struct TauLinkedBound {
    pub z: usize,
    pub slot: usize,
    pub coeff: f64,
}

/// `sum_j z_j <= limit`.
#[derive(Debug, Clone)]
pub struct SumBound {
    pub zs: Vec<usize>,
    pub limit: f64,
}

#[derive(Debug, Clone)]
pub struct StructuredConvexProblem {
    pub slots: usize,
    pub z_vars: usize,
    pub qos: Vec<QosConstraint>,
    pub tau_linked: Vec<TauLinkedBound>,
    pub sum_bounds: Vec<SumBound>,
    /// Optional upper bound per slot duration.
    pub tau_caps: Vec<Option<f64>>,
    /// Optional objective weights on the durations (defaults to all ones,
    /// the sum delay).
    pub objective_tau: Option<Vec<f64>>,
    /// Optional cap on the total duration.
    pub total_cap: Option<f64>,
}

impl StructuredConvexProblem {
    fn dim(&self) -> usize {
        self.slots + self.z_vars
    }

    fn cap_count(&self) -> usize {
        self.tau_caps.iter().filter(|c| c.is_some()).count()
    }

    fn constraint_count(&self) -> usize {
        self.qos.len()
            + self.tau_linked.len()
            + self.sum_bounds.len()
            + self.z_vars
            + self.slots
            + self.cap_count()
            + usize::from(self.total_cap.is_some())
    }
}

/// Outcome metadata for one solve.
#[derive(Debug, Clone)]
pub struct ConvexReport {
    pub converged: bool,
    pub barrier_stages: usize,
    pub newton_steps: usize,
    /// Objective value after each phase-II barrier stage.
    pub objective_trace: Vec<f64>,
    /// Final duality gap estimate (constraint count / barrier parameter).
    pub gap: f64,
    /// Worst constraint violation of the returned point (positive = violated).
    pub max_violation: f64,
}

/// Plain recomputation of every constraint residual at `(tau, z)`.
///
/// Kept free of solver state so it independently checks returned points:
/// residuals are slacks, negative values are violations.
pub fn evaluate_constraints(
    prob: &StructuredConvexProblem,
    tau: &[f64],
    z: &[f64],
) -> Vec<f64> {
    let mut slacks = Vec::with_capacity(prob.constraint_count());
    for q in &prob.qos {
        let mut v = q.constant;
        for term in &q.terms {
            let t = tau[term.slot];
            let s: f64 = term.z_terms.iter().map(|(j, c)| c * z[*j]).sum();
            if t > 0.0 {
                v += t * (1.0 + s / t + term.inside_const).log2();
            } else {
                // continuous extension of the perspective at tau = 0
                v += 0.0;
            }
        }
        for (i, c) in &q.linear_tau {
            v += c * tau[*i];
        }
        for (j, c) in &q.linear_z {
            v += c * z[*j];
        }
        slacks.push(v);
    }
    for b in &prob.tau_linked {
        slacks.push(b.coeff * tau[b.slot] - z[b.z]);
    }
    for b in &prob.sum_bounds {
        slacks.push(b.limit - b.zs.iter().map(|j| z[*j]).sum::<f64>());
    }
    for (i, cap) in prob.tau_caps.iter().enumerate() {
        if let Some(cap) = cap {
            slacks.push(cap - tau[i]);
        }
    }
    if let Some(cap) = prob.total_cap {
        slacks.push(cap - tau.iter().sum::<f64>());
    }
    for zj in z {
        slacks.push(*zj);
    }
    for ti in tau {
        slacks.push(*ti);
    }
    slacks
}

// --- internal evaluation ----------------------------------------------------

struct QosEval {
    value: f64,
    grad: Vec<(usize, f64)>,
    /// Rank-one curvature factors: H_term = -factor * w w^T.
    curvature: Vec<(Vec<(usize, f64)>, f64)>,
}

/// Evaluate one throughput constraint; `None` if outside the log domain.
fn eval_qos(q: &QosConstraint, tau: &[f64], z: &[f64], derivs: bool) -> Option<QosEval> {
    let mut value = q.constant;
    let mut grad = Vec::new();
    let mut curvature = Vec::new();
    for term in &q.terms {
        let t = tau[term.slot];
        if !(t > 0.0) {
            return None;
        }
        let s: f64 = term.z_terms.iter().map(|(j, c)| c * z[*j]).sum();
        let u = s / t + term.inside_const;
        let one_u = 1.0 + u;
        if !(one_u > 1e-300) {
            return None;
        }
        value += t * one_u.log2();
        if derivs {
            let denom = one_u * LN_2;
            grad.push((term.slot, one_u.ln() / LN_2 - (u - term.inside_const) / denom));
            let mut w = Vec::with_capacity(term.z_terms.len() + 1);
            w.push((term.slot, -(u - term.inside_const)));
            for (j, c) in &term.z_terms {
                grad.push((tau.len() + j, c / denom));
                w.push((tau.len() + j, *c));
            }
            let factor = 1.0 / (t * one_u * one_u * LN_2);
            curvature.push((w, factor));
        }
    }
    for (i, c) in &q.linear_tau {
        value += c * tau[*i];
        if derivs {
            grad.push((*i, *c));
        }
    }
    for (j, c) in &q.linear_z {
        value += c * z[*j];
        if derivs {
            grad.push((tau.len() + j, *c));
        }
    }
    Some(QosEval {
        value,
        grad,
        curvature,
    })
}

/// Internal barrier view: problem constraints, optionally shifted by the
/// phase-I slack variable (the last coordinate of `x`).
struct Barrier<'a> {
    prob: &'a StructuredConvexProblem,
    /// Phase-I normalization per shifted constraint; empty in phase II.
    sigma: Vec<f64>,
    /// Phase-I trust caps on slot durations; without them the phase-I
    /// objective is unbounded (every slack grows with tau). Empty in phase II.
    trust_caps: Vec<f64>,
    phase_one: bool,
}

const PHASE1_CAP: f64 = 10.0;

impl<'a> Barrier<'a> {
    fn dim(&self) -> usize {
        self.prob.dim() + usize::from(self.phase_one)
    }

    fn constraint_count(&self) -> usize {
        // phase I adds a cap on the slack variable and on each duration
        self.prob.constraint_count() + usize::from(self.phase_one) * (1 + self.trust_caps.len())
    }

    /// Dimensionless slack of every barrier constraint, or `None` when out of
    /// the evaluation domain. Order matches `sigma`.
    fn scaled_slacks(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n_tau = self.prob.slots;
        let n_z = self.prob.z_vars;
        let (tau, rest) = x.split_at(n_tau);
        let z = &rest[..n_z];
        let s = if self.phase_one { x[x.len() - 1] } else { 0.0 };

        let mut out = Vec::with_capacity(self.constraint_count());
        let mut idx = 0usize;
        let mut push = |raw: f64, shiftable: bool, sigma: &[f64], out: &mut Vec<f64>| {
            let v = if shiftable && self.phase_one {
                raw / sigma[idx] - s
            } else {
                raw
            };
            idx += 1;
            out.push(v);
        };
        for q in &self.prob.qos {
            let e = eval_qos(q, tau, z, false)?;
            push(e.value, true, &self.sigma, &mut out);
        }
        for b in &self.prob.tau_linked {
            push(b.coeff * tau[b.slot] - z[b.z], true, &self.sigma, &mut out);
        }
        for b in &self.prob.sum_bounds {
            let total: f64 = b.zs.iter().map(|j| z[*j]).sum();
            push(b.limit - total, true, &self.sigma, &mut out);
        }
        for (i, cap) in self.prob.tau_caps.iter().enumerate() {
            if let Some(cap) = cap {
                push(cap - tau[i], true, &self.sigma, &mut out);
            }
        }
        if let Some(cap) = self.prob.total_cap {
            push(cap - tau.iter().sum::<f64>(), true, &self.sigma, &mut out);
        }
        for j in 0..n_z {
            push(z[j], true, &self.sigma, &mut out);
        }
        for i in 0..n_tau {
            // slot durations stay unshifted: the perspective terms need tau > 0
            push(tau[i], false, &self.sigma, &mut out);
        }
        if self.phase_one {
            out.push(PHASE1_CAP - s);
            for (i, cap) in self.trust_caps.iter().enumerate() {
                out.push(cap - tau[i]);
            }
        }
        if out.iter().all(|g| *g > 0.0) {
            Some(out)
        } else {
            None
        }
    }

    fn barrier_value(&self, x: &[f64], t: f64, c: &[f64]) -> Option<f64> {
        let slacks = self.scaled_slacks(x)?;
        let lin: f64 = c.iter().zip(x).map(|(ci, xi)| ci * xi).sum();
        Some(t * lin - slacks.iter().map(|g| g.ln()).sum::<f64>())
    }

    /// Gradient and Hessian of the barrier at `x`; assumes `x` is interior.
    fn assemble(&self, x: &[f64], t: f64, c: &[f64], grad: &mut [f64], hess: &mut [f64]) {
        let n = self.dim();
        let n_tau = self.prob.slots;
        let n_z = self.prob.z_vars;
        let (tau, rest) = x.split_at(n_tau);
        let z = &rest[..n_z];
        let s = if self.phase_one { x[n - 1] } else { 0.0 };

        for gi in grad.iter_mut() {
            *gi = 0.0;
        }
        for hij in hess.iter_mut() {
            *hij = 0.0;
        }
        for (gi, ci) in grad.iter_mut().zip(c) {
            *gi += t * ci;
        }

        let mut idx = 0usize;

        let add_constraint =
            |grad: &mut [f64], hess: &mut [f64], sparse_grad: &[(usize, f64)], value: f64,
             curvature: &[(Vec<(usize, f64)>, f64)], shiftable: bool, idx: &mut usize| {
                let sigma = if shiftable && self.phase_one {
                    self.sigma[*idx]
                } else {
                    1.0
                };
                *idx += 1;
                let g = if shiftable && self.phase_one {
                    value / sigma - s
                } else {
                    value
                };
                debug_assert!(g > 0.0);
                // effective gradient of the shifted constraint
                let mut eff: Vec<(usize, f64)> = sparse_grad
                    .iter()
                    .map(|(i, v)| (*i, v / sigma))
                    .collect();
                if shiftable && self.phase_one {
                    eff.push((n - 1, -1.0));
                }
                let inv_g = 1.0 / g;
                for (i, v) in &eff {
                    grad[*i] -= v * inv_g;
                }
                // grad g grad g^T / g^2
                for (i, vi) in &eff {
                    for (j, vj) in &eff {
                        hess[i * n + j] += vi * vj * inv_g * inv_g;
                    }
                }
                // minus the constraint curvature over g
                for (w, factor) in curvature {
                    let f = factor / sigma * inv_g;
                    for (i, wi) in w {
                        for (j, wj) in w {
                            hess[i * n + j] += f * wi * wj;
                        }
                    }
                }
            };

        for q in &self.prob.qos {
            let e = eval_qos(q, tau, z, true).expect("interior point left the domain");
            // merge duplicate gradient indices
            let mut merged = vec![0.0; n];
            for (i, v) in &e.grad {
                merged[*i] += v;
            }
            let sparse: Vec<(usize, f64)> = merged
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i, *v))
                .collect();
            add_constraint(grad, hess, &sparse, e.value, &e.curvature, true, &mut idx);
        }
        for b in &self.prob.tau_linked {
            let sparse = [(b.slot, b.coeff), (n_tau + b.z, -1.0)];
            let value = b.coeff * tau[b.slot] - z[b.z];
            add_constraint(grad, hess, &sparse, value, &[], true, &mut idx);
        }
        for b in &self.prob.sum_bounds {
            let sparse: Vec<(usize, f64)> = b.zs.iter().map(|j| (n_tau + j, -1.0)).collect();
            let value = b.limit - b.zs.iter().map(|j| z[*j]).sum::<f64>();
            add_constraint(grad, hess, &sparse, value, &[], true, &mut idx);
        }
        for (i, cap) in self.prob.tau_caps.iter().enumerate() {
            if let Some(cap) = cap {
                let sparse = [(i, -1.0)];
                add_constraint(grad, hess, &sparse, cap - tau[i], &[], true, &mut idx);
            }
        }
        if let Some(cap) = self.prob.total_cap {
            let sparse: Vec<(usize, f64)> = (0..n_tau).map(|i| (i, -1.0)).collect();
            let value = cap - tau.iter().sum::<f64>();
            add_constraint(grad, hess, &sparse, value, &[], true, &mut idx);
        }
        for j in 0..n_z {
            let sparse = [(n_tau + j, 1.0)];
            add_constraint(grad, hess, &sparse, z[j], &[], true, &mut idx);
        }
        for i in 0..n_tau {
            let sparse = [(i, 1.0)];
            add_constraint(grad, hess, &sparse, tau[i], &[], false, &mut idx);
        }
        if self.phase_one {
            let g = PHASE1_CAP - s;
            grad[n - 1] += 1.0 / g;
            hess[(n - 1) * n + (n - 1)] += 1.0 / (g * g);
            for (i, cap) in self.trust_caps.iter().enumerate() {
                let g = cap - tau[i];
                grad[i] += 1.0 / g;
                hess[i * n + i] += 1.0 / (g * g);
            }
        }
    }
}

/// Cholesky factorization in place; returns false if not positive definite.
fn cholesky(a: &mut [f64], n: usize) -> bool {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return false;
                }
                a[i * n + i] = sum.sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    true
}

fn cholesky_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * b[k];
        }
        b[i] = sum / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in i + 1..n {
            sum -= l[k * n + i] * b[k];
        }
        b[i] = sum / l[i * n + i];
    }
}

/// Newton direction for the (PSD + barrier) Hessian, with Jacobi scaling and
/// a growing ridge as a fallback.
fn newton_direction(hess: &[f64], grad: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut scale = vec![1.0; n];
    for i in 0..n {
        let d = hess[i * n + i];
        if d > 0.0 && d.is_finite() {
            scale[i] = 1.0 / d.sqrt();
        }
    }
    let mut ridge = 0.0;
    for _ in 0..8 {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = hess[i * n + j] * scale[i] * scale[j];
            }
            a[i * n + i] += ridge;
        }
        if cholesky(&mut a, n) {
            let mut d: Vec<f64> = (0..n).map(|i| -grad[i] * scale[i]).collect();
            cholesky_solve(&a, n, &mut d);
            for i in 0..n {
                d[i] *= scale[i];
            }
            if d.iter().all(|v| v.is_finite()) {
                return Some(d);
            }
        }
        ridge = if ridge == 0.0 { 1e-12 } else { ridge * 100.0 };
    }
    None
}

struct StageOutcome {
    newton_steps: usize,
}

/// Minimize `t c^T x + barrier` from the interior point `x`.
fn newton_stage(
    barrier: &Barrier,
    x: &mut Vec<f64>,
    t: f64,
    c: &[f64],
    settings: &SolverSettings,
) -> StageOutcome {
    let n = barrier.dim();
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n * n];
    let mut steps = 0;
    for _ in 0..settings.max_newton_iters {
        barrier.assemble(x, t, c, &mut grad, &mut hess);
        let Some(dir) = newton_direction(&hess, &grad, n) else {
            break;
        };
        let decrement_sq: f64 = -grad.iter().zip(&dir).map(|(g, d)| g * d).sum::<f64>();
        if !(decrement_sq > 0.0) || decrement_sq * 0.5 < 1e-12 {
            break;
        }
        let phi0 = barrier
            .barrier_value(x, t, c)
            .expect("current iterate must be interior");
        let slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let mut alpha = 1.0;
        let mut moved = false;
        for _ in 0..70 {
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, d)| xi + alpha * d).collect();
            if let Some(phi) = barrier.barrier_value(&cand, t, c) {
                if phi <= phi0 + 0.01 * alpha * slope {
                    *x = cand;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        steps += 1;
        if !moved {
            break;
        }
        if decrement_sq * 0.5 < 1e-10 {
            break;
        }
    }
    StageOutcome {
        newton_steps: steps,
    }
}

/// Solve the structured problem from a warm start `(warm_tau, warm_z)`.
///
/// The warm start seeds phase I; it does not have to be feasible, but slot
/// durations must be positive. Returns the optimal durations and energies
/// plus a report; `Err(Infeasible)` when phase I certifies an empty interior.
pub fn solve_structured_convex(
    prob: &StructuredConvexProblem,
    warm_tau: &[f64],
    warm_z: &[f64],
    settings: &SolverSettings,
) -> Result<(Vec<f64>, Vec<f64>, ConvexReport)> {
    if warm_tau.len() != prob.slots || warm_z.len() != prob.z_vars {
        return Err(Error::Internal(format!(
            "warm start sized {}+{} for problem sized {}+{}",
            warm_tau.len(),
            warm_z.len(),
            prob.slots,
            prob.z_vars
        )));
    }
    let mut x: Vec<f64> = warm_tau
        .iter()
        .map(|t| t.max(settings.tau_floor))
        .chain(warm_z.iter().map(|z| z.max(0.0)))
        .collect();

    let mut report = ConvexReport {
        converged: false,
        barrier_stages: 0,
        newton_steps: 0,
        objective_trace: Vec::new(),
        gap: f64::INFINITY,
        max_violation: f64::INFINITY,
    };

    // ---- phase I: maximize the minimum scaled slack ----
    let sigma = constraint_scales(prob, &x, settings);
    let tau_typ = x[..prob.slots]
        .iter()
        .fold(settings.tau_floor * 10.0, |a, t| a.max(*t));
    let trust_caps: Vec<f64> = x[..prob.slots]
        .iter()
        .map(|t| 50.0 * (t + tau_typ))
        .collect();
    let phase1 = Barrier {
        prob,
        sigma,
        trust_caps,
        phase_one: true,
    };
    {
        let raw = phase1_min_slack(&phase1, &x);
        let s0 = (raw - 0.5 * raw.abs().max(1.0)).min(PHASE1_CAP - 1.0);
        x.push(s0);
        let c: Vec<f64> = (0..phase1.dim())
            .map(|i| if i == phase1.dim() - 1 { -1.0 } else { 0.0 })
            .collect();
        let m = phase1.constraint_count() as f64;
        let mut t = 1.0;
        let mut certified = false;
        for _ in 0..settings.max_barrier_stages {
            let out = newton_stage(&phase1, &mut x, t, &c, settings);
            report.newton_steps += out.newton_steps;
            report.barrier_stages += 1;
            let s = x[phase1.dim() - 1];
            let gap = m / t;
            if s >= 1e-2 {
                certified = true;
                break;
            }
            if s + gap <= 0.0 {
                return Err(Error::Infeasible { max_slack: s + gap });
            }
            if gap <= 1e-10 {
                if s > 0.0 {
                    certified = true;
                } else {
                    return Err(Error::Infeasible { max_slack: s });
                }
                break;
            }
            t *= 20.0;
        }
        let s = x[phase1.dim() - 1];
        if !certified && s <= 0.0 {
            return Err(Error::Infeasible { max_slack: s });
        }
        x.pop();
    }

    // ---- phase II: follow the central path ----
    let phase2 = Barrier {
        prob,
        sigma: Vec::new(),
        trust_caps: Vec::new(),
        phase_one: false,
    };
    let n = phase2.dim();
    let c: Vec<f64> = (0..n)
        .map(|i| {
            if i < prob.slots {
                match &prob.objective_tau {
                    Some(w) => w[i],
                    None => 1.0,
                }
            } else {
                0.0
            }
        })
        .collect();
    let m = phase2.constraint_count() as f64;
    let mut t = 1.0;
    for _ in 0..settings.max_barrier_stages {
        let out = newton_stage(&phase2, &mut x, t, &c, settings);
        report.newton_steps += out.newton_steps;
        report.barrier_stages += 1;
        let obj: f64 = x[..prob.slots]
            .iter()
            .zip(&c)
            .map(|(t, c)| t * c)
            .sum();
        report.objective_trace.push(obj);
        report.gap = m / t;
        let target = settings.kkt_tol * obj.abs().max(1e-3);
        if report.gap <= target {
            report.converged = true;
            break;
        }
        t *= 20.0;
    }

    let tau = x[..prob.slots].to_vec();
    let z = x[prob.slots..].to_vec();
    let slacks = evaluate_constraints(prob, &tau, &z);
    report.max_violation = slacks.iter().fold(0.0_f64, |a, s| a.max(-s));
    if report.max_violation > settings.feas_tol {
        report.converged = false;
    }
    Ok((tau, z, report))
}

/// Raw minimum scaled slack at `x` (tau part only guarded for domain).
fn phase1_min_slack(barrier: &Barrier, x: &[f64]) -> f64 {
    // evaluate with the shift temporarily disabled
    let plain = Barrier {
        prob: barrier.prob,
        sigma: Vec::new(),
        trust_caps: Vec::new(),
        phase_one: false,
    };
    match plain.scaled_slacks(x) {
        Some(slacks) => slacks
            .iter()
            .zip(barrier.sigma.iter().chain(std::iter::repeat(&1.0)))
            .map(|(g, sg)| g / sg)
            .fold(f64::INFINITY, f64::min),
        // warm start outside the log domain: start deep below zero
        None => -1.0,
    }
}

/// Characteristic magnitude per shiftable constraint, in enumeration order.
fn constraint_scales(
    prob: &StructuredConvexProblem,
    x: &[f64],
    settings: &SolverSettings,
) -> Vec<f64> {
    let tau_typ = x[..prob.slots]
        .iter()
        .fold(0.0_f64, |a, t| a.max(*t))
        .max(settings.tau_floor * 10.0);
    let mut sigma = Vec::with_capacity(prob.constraint_count());
    for q in &prob.qos {
        sigma.push(q.scale.max(1e-9));
    }
    for b in &prob.tau_linked {
        sigma.push((b.coeff * tau_typ).max(1e-12));
    }
    for b in &prob.sum_bounds {
        sigma.push(b.limit.max(1e-12));
    }
    for cap in prob.tau_caps.iter().flatten() {
        sigma.push(cap.max(1e-12));
    }
    if let Some(cap) = prob.total_cap {
        sigma.push(cap.max(1e-12));
    }
    for b_idx in 0..prob.z_vars {
        // scale of z_j >= 0 from whichever bound constrains it
        let mut s = 0.0_f64;
        for b in &prob.tau_linked {
            if b.z == b_idx {
                s = s.max(b.coeff * tau_typ);
            }
        }
        for b in &prob.sum_bounds {
            if b.zs.contains(&b_idx) {
                s = s.max(b.limit);
            }
        }
        sigma.push(s.max(1e-12));
    }
    sigma
}
