//! Residual, linearization, cone-safeguarded Newton iteration and homotopy
//! continuation for the Hessian quotient equation
//!
//! ```text
//!   sigma_n(A[phi]) / sigma_{n-k}(A[phi]) = phi^{-k} [(1-t) gamma + t f],
//! ```
//!
//! together with the analytic a priori bound computations.
//!
//! The residual is kept in log form,
//! `R = log sigma_n - log sigma_{n-k} + k log phi - log((1-t) gamma + t f)`,
//! which has the same roots on the admissible cone (every factor is
//! positive there) and keeps the Newton system well scaled. Iterates are
//! restricted to even functions: the even projection is applied after every
//! accepted step and the linear systems are solved on the antipodally folded
//! grid, which removes the odd near-kernel of the linearization (degree-one
//! spherical harmonics) at near-constant iterates.

mod linsolve;

use std::sync::Arc;

use crate::error::Error;
use crate::horo::{build_a_with, SupportFunction, SymTensorField};
use crate::sphere::{row_entries, ScalarField, SphereGrid};
use crate::symfunc::{self, binomial, SymMatrix};
use crate::Result;

use linsolve::BandMatrix;

/// Problem data: dimension, curvature order, prescription and homotopy anchor.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    n: usize,
    k: usize,
    f_tilde: ScalarField,
    f: ScalarField,
    gamma: f64,
}

impl ProblemSpec {
    /// Validates the prescription `f_tilde` (positive, even) and derives
    /// `f = 1/f_tilde`; `gamma` defaults to the geometric mean of f.
    pub fn new(k: usize, f_tilde: ScalarField, gamma: Option<f64>) -> Result<Self> {
        let n = f_tilde.grid().dim();
        if k < 1 || k > n {
            return Err(Error::Argument(format!("curvature order k = {k} out of 1..={n}")));
        }
        let min = f_tilde.min();
        if !(min > 0.0) {
            return Err(Error::Argument(format!(
                "prescribed curvature must be positive, min = {min}"
            )));
        }
        let defect = f_tilde.evenness_defect();
        if defect > 1e-12 {
            return Err(Error::Argument(format!(
                "prescribed curvature must be even, defect = {defect:.3e}"
            )));
        }
        let f = f_tilde.map(|v| 1.0 / v);
        let gamma = match gamma {
            Some(g) if g > 0.0 => g,
            Some(g) => return Err(Error::Argument(format!("gamma must be positive, got {g}"))),
            None => choose_gamma(&f),
        };
        Ok(Self {
            n,
            k,
            f_tilde,
            f,
            gamma,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn f_tilde(&self) -> &ScalarField {
        &self.f_tilde
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        self.f_tilde.grid()
    }

    /// Homotopy right-hand side `(1-t) gamma + t f` at a node.
    fn rhs(&self, idx: usize, t: f64) -> f64 {
        (1.0 - t) * self.gamma + t * self.f.values()[idx]
    }
}

/// Homotopy parameter, current iterate and convergence diagnostics.
#[derive(Debug, Clone)]
pub struct ContinuationState {
    pub t: f64,
    pub phi: SupportFunction,
    pub residual_norm: f64,
    pub min_eig_a: f64,
    pub max_eig_a: f64,
    /// Newton iterations spent in the most recent solve.
    pub newton_iters: usize,
    /// (t, iterations, residual) per accepted continuation step.
    pub step_history: Vec<(f64, usize, f64)>,
}

/// A solve failure carrying the best (or last good) iterate.
#[derive(Debug)]
pub struct SolveFailure {
    pub error: Error,
    pub best: ContinuationState,
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} (best iterate at t = {})", self.error, self.best.t)
    }
}

impl std::error::Error for SolveFailure {}

/// Geometric mean of f over the sphere: `exp(integral(log f) / area)`,
/// with the area taken in the same discrete measure.
pub fn choose_gamma(f: &ScalarField) -> f64 {
    let area: f64 = f.grid().weights().iter().sum();
    (f.map(f64::ln).integrate() / area).exp()
}

/// The unique even solution of the constant equation
/// `phi^k (sigma_n/sigma_{n-k})(A[phi]) = gamma`, namely
/// `c = sqrt(1 + 2 (C(n,k) gamma)^{1/k})`. The binomial factor comes from
/// `sigma_{n-k}(a I) = C(n,k) a^{n-k}` and is confirmed by the residual
/// vanishing at c to rounding.
pub fn constant_solution(n: usize, k: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::Argument(format!("gamma must be positive, got {gamma}")));
    }
    if n == 0 || k < 1 || k > n {
        return Err(Error::Argument(format!("bad orders n = {n}, k = {k}")));
    }
    Ok((1.0 + 2.0 * (binomial(n, k) * gamma).powf(1.0 / k as f64)).sqrt())
}

struct Evaluation {
    residual: ScalarField,
    min_eig_a: f64,
    max_eig_a: f64,
}

fn check_cone(a: &SymTensorField) -> Result<(f64, f64)> {
    let (node, min_eig) = a.min_eigenvalue();
    if min_eig <= 0.0 {
        return Err(Error::ConeViolation { node, min_eig });
    }
    Ok((min_eig, a.max_eigenvalue()))
}

fn evaluate(spec: &ProblemSpec, sf: &SupportFunction, t: f64) -> Result<Evaluation> {
    if !sf.grid().same_layout(spec.grid()) {
        return Err(Error::GridMismatch("iterate grid differs from problem grid".into()));
    }
    let d = sf.phi().derivatives();
    let a = build_a_with(sf, &d);
    let (min_eig_a, max_eig_a) = check_cone(&a)?;
    let n = spec.n;
    let k = spec.k;
    let phi = sf.phi().values();
    let mut values = Vec::with_capacity(phi.len());
    for idx in 0..phi.len() {
        let m = a.at(idx);
        let num = symfunc::sigma_matrix(&m, n)?;
        let den = symfunc::sigma_matrix(&m, n - k)?;
        values.push(num.ln() - den.ln() + k as f64 * phi[idx].ln() - spec.rhs(idx, t).ln());
    }
    Ok(Evaluation {
        residual: ScalarField::new(sf.grid().clone(), values)?,
        min_eig_a,
        max_eig_a,
    })
}

/// Log-form residual of the homotopy equation at parameter t; errors if
/// A[phi] leaves the positive cone.
pub fn residual(spec: &ProblemSpec, sf: &SupportFunction, t: f64) -> Result<ScalarField> {
    Ok(evaluate(spec, sf, t)?.residual)
}

/// Assembled sparse Jacobian of the discrete residual with respect to the
/// nodal values of phi.
pub struct Jacobian {
    grid: Arc<SphereGrid>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl Jacobian {
    /// Matrix-vector product.
    pub fn apply(&self, psi: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(q, c)| c * psi[q]).sum())
            .collect()
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }
}

fn merge_row(mut entries: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    entries.sort_by_key(|&(q, _)| q);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
    for (q, c) in entries {
        match out.last_mut() {
            Some((lq, lc)) if *lq == q => *lc += c,
            _ => out.push((q, c)),
        }
    }
    out
}

/// Exact Frechet derivative of the discrete log-form residual:
/// `dR = sum_ij B^ij dA_ij + (k/phi) dphi` with
/// `B = grad(sigma_n)/sigma_n - grad(sigma_{n-k})/sigma_{n-k}` and
/// `dA = D^2 dphi - (Dphi . D dphi)/phi I
///       + (|Dphi|^2/(2 phi^2) + (1 + 1/phi^2)/2) dphi I`.
pub fn jacobian(spec: &ProblemSpec, sf: &SupportFunction, t: f64) -> Result<Jacobian> {
    let _ = t; // the log-form Jacobian is independent of the homotopy rhs
    let grid = sf.grid().clone();
    if !grid.same_layout(spec.grid()) {
        return Err(Error::GridMismatch("iterate grid differs from problem grid".into()));
    }
    let n = spec.n;
    let k = spec.k;
    let d = sf.phi().derivatives();
    let a = build_a_with(sf, &d);
    check_cone(&a)?;
    let phi = sf.phi().values();

    let mut rows = Vec::with_capacity(grid.node_count());
    for p in 0..grid.node_count() {
        let m = a.at(p);
        let b = quotient_log_gradient(&m, n, k)?;
        let tr_b = b.trace();
        let pv = phi[p];
        let g = d.grad[p];

        let op = grid.node_operator(p);
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(64);

        // Hessian part: B^tt H_tt + 2 B^tp H_tp + B^pp H_pp.
        let hess_w = if n == 1 {
            [b.get(0, 0), 0.0, 0.0]
        } else {
            [b.get(0, 0), 2.0 * b.get(0, 1), b.get(1, 1)]
        };
        for (comp, w) in hess_w.iter().enumerate() {
            if *w != 0.0 {
                for (q, c) in row_entries(&op.hess[comp], op.base) {
                    entries.push((q, w * c));
                }
            }
        }
        // Gradient part: -(tr B) (Dphi . D dphi)/phi.
        for comp in 0..n {
            let w = -tr_b * g[comp] / pv;
            if w != 0.0 {
                for (q, c) in row_entries(&op.grad[comp], op.base) {
                    entries.push((q, w * c));
                }
            }
        }
        // Local part.
        let local = tr_b * (d.grad_sq(p) / (2.0 * pv * pv) + 0.5 * (1.0 + 1.0 / (pv * pv)))
            + k as f64 / pv;
        entries.push((p, local));

        rows.push(merge_row(entries));
    }
    Ok(Jacobian { grid, rows })
}

/// `grad(log sigma_n - log sigma_{n-k})` at the matrix A.
fn quotient_log_gradient(m: &SymMatrix, n: usize, k: usize) -> Result<SymMatrix> {
    let num = symfunc::sigma_matrix(m, n)?;
    let g_num = symfunc::sigma_gradient(m, n)?;
    let mut b = SymMatrix::zeros(m.n())?;
    for i in 0..m.n() {
        for j in i..m.n() {
            b.set(i, j, g_num.get(i, j) / num);
        }
    }
    if n > k {
        let den = symfunc::sigma_matrix(m, n - k)?;
        let g_den = symfunc::sigma_gradient(m, n - k)?;
        for i in 0..m.n() {
            for j in i..m.n() {
                b.set(i, j, b.get(i, j) - g_den.get(i, j) / den);
            }
        }
    }
    Ok(b)
}

/// Canonical antipodal representatives: nodes whose index does not exceed
/// their antipode's. Returns (fold index per node or usize::MAX, rep nodes).
fn fold_map(grid: &SphereGrid) -> (Vec<usize>, Vec<usize>) {
    let count = grid.node_count();
    let mut fold = vec![usize::MAX; count];
    let mut reps = Vec::with_capacity(count / 2 + 1);
    for idx in 0..count {
        if idx <= grid.antipode(idx) {
            fold[idx] = reps.len();
            reps.push(idx);
        }
    }
    for idx in 0..count {
        if fold[idx] == usize::MAX {
            fold[idx] = fold[grid.antipode(idx)];
        }
    }
    (fold, reps)
}

/// Solves `J delta = -R` on the even subspace (antipodally folded system)
/// and returns the unfolded even step.
fn solve_even_step(jac: &Jacobian, rhs: &ScalarField) -> Result<Vec<f64>> {
    let grid = jac.grid();
    let (fold, reps) = fold_map(grid);
    let nf = reps.len();

    // Bandwidths of the folded system.
    let mut kl = 0usize;
    let mut ku = 0usize;
    for (fi, &p) in reps.iter().enumerate() {
        for &(q, _) in &jac.rows[p] {
            let fq = fold[q];
            if fq > fi {
                ku = ku.max(fq - fi);
            } else {
                kl = kl.max(fi - fq);
            }
        }
    }

    let mut band = BandMatrix::new(nf, kl, ku);
    let mut b = vec![0.0; nf];
    for (fi, &p) in reps.iter().enumerate() {
        for &(q, c) in &jac.rows[p] {
            band.add(fi, fold[q], c);
        }
        b[fi] = -rhs.values()[p];
    }
    let lu = band.factor()?;
    lu.solve(&mut b);

    let mut delta = vec![0.0; grid.node_count()];
    for idx in 0..grid.node_count() {
        delta[idx] = b[fold[idx]];
    }
    Ok(delta)
}

/// Newton iteration parameters and the continuation schedule.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Initial number of uniform homotopy increments.
    pub steps: usize,
    /// Floor for the adaptive t-increment.
    pub min_dt: f64,
    /// Residual tolerance (L-infinity) for Newton convergence.
    pub tol: f64,
    /// Newton iteration cap per homotopy step.
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            steps: 10,
            min_dt: 1e-4,
            tol: 1e-10,
            max_iter: 30,
        }
    }
}

const LINE_SEARCH_FLOOR: f64 = 1.0 / ((1u64 << 30) as f64);

fn state_from(
    t: f64,
    sf: SupportFunction,
    eval: &Evaluation,
    iters: usize,
    history: Vec<(f64, usize, f64)>,
) -> ContinuationState {
    ContinuationState {
        t,
        phi: sf,
        residual_norm: eval.residual.linf(),
        min_eig_a: eval.min_eig_a,
        max_eig_a: eval.max_eig_a,
        newton_iters: iters,
        step_history: history,
    }
}

/// Damped Newton iteration at fixed homotopy parameter `state.t`.
///
/// Each step solves the folded linear system to the direct-solver accuracy,
/// then backtracks (step halving) until the trial iterate keeps phi > 1,
/// keeps A[phi] positive definite and strictly decreases the residual
/// L-infinity norm; accepted iterates are even-projected. Returns
/// immediately when the entry residual already meets the tolerance.
pub fn newton_solve(
    spec: &ProblemSpec,
    state: &ContinuationState,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<ContinuationState, SolveFailure> {
    let t = state.t;
    let fail = |error: Error, best: ContinuationState| SolveFailure { error, best };

    let mut sf = state.phi.clone();
    let mut eval = match evaluate(spec, &sf, t) {
        Ok(e) => e,
        Err(e) => return Err(fail(e, state.clone())),
    };
    let mut norm = eval.residual.linf();
    let mut iters = 0usize;

    while norm > tol {
        if iters >= max_iter {
            let best = state_from(t, sf, &eval, iters, state.step_history.clone());
            return Err(fail(
                Error::NonConvergence {
                    residual: norm,
                    iters,
                },
                best,
            ));
        }
        let jac = match jacobian(spec, &sf, t) {
            Ok(j) => j,
            Err(e) => return Err(fail(e, state_from(t, sf, &eval, iters, state.step_history.clone()))),
        };
        let delta = match solve_even_step(&jac, &eval.residual) {
            Ok(d) => d,
            Err(e) => return Err(fail(e, state_from(t, sf, &eval, iters, state.step_history.clone()))),
        };

        let mut step = 1.0;
        loop {
            let trial_values: Vec<f64> = sf
                .phi()
                .values()
                .iter()
                .zip(&delta)
                .map(|(&p, &d)| p + step * d)
                .collect();
            let accepted = ScalarField::new(sf.grid().clone(), trial_values)
                .map(|f| f.even_project())
                .and_then(SupportFunction::from_phi)
                .and_then(|trial| evaluate(spec, &trial, t).map(|ev| (trial, ev)));
            match accepted {
                Ok((trial, ev)) if ev.residual.linf() < norm => {
                    sf = trial;
                    eval = ev;
                    norm = eval.residual.linf();
                    break;
                }
                _ => {
                    step *= 0.5;
                    if step < LINE_SEARCH_FLOOR {
                        let best = state_from(t, sf, &eval, iters, state.step_history.clone());
                        return Err(fail(
                            Error::LineSearchStall {
                                step,
                                residual: norm,
                            },
                            best,
                        ));
                    }
                }
            }
        }
        iters += 1;
    }
    Ok(state_from(t, sf, &eval, iters, state.step_history.clone()))
}

/// Homotopy continuation from the constant solution at t = 0 to the
/// prescribed equation at t = 1, with an adaptive t-schedule: start from
/// `1/steps` increments, halve on Newton failure, grow by 1.5x after easy
/// steps, fail when the increment falls below `min_dt`.
pub fn continuation_solve(
    spec: &ProblemSpec,
    opts: &SolveOptions,
) -> std::result::Result<ContinuationState, SolveFailure> {
    let c0 = constant_solution(spec.n, spec.k, spec.gamma).map_err(|e| SolveFailure {
        error: e,
        best: ContinuationState {
            t: 0.0,
            phi: SupportFunction::from_phi(ScalarField::constant(spec.grid().clone(), 2.0))
                .expect("constant 2 > 1"),
            residual_norm: f64::INFINITY,
            min_eig_a: 0.0,
            max_eig_a: 0.0,
            newton_iters: 0,
            step_history: Vec::new(),
        },
    })?;
    let phi0 = SupportFunction::from_phi(ScalarField::constant(spec.grid().clone(), c0))
        .expect("constant solution > 1");
    let eval0 = match evaluate(spec, &phi0, 0.0) {
        Ok(e) => e,
        Err(e) => {
            return Err(SolveFailure {
                error: e,
                best: ContinuationState {
                    t: 0.0,
                    phi: phi0,
                    residual_norm: f64::INFINITY,
                    min_eig_a: 0.0,
                    max_eig_a: 0.0,
                    newton_iters: 0,
                    step_history: Vec::new(),
                },
            })
        }
    };
    let mut state = state_from(0.0, phi0, &eval0, 0, Vec::new());
    // The constant start is an exact root at t = 0; polish if needed.
    state = newton_solve(spec, &state, opts.tol, opts.max_iter)?;

    let mut dt = 1.0 / opts.steps as f64;
    let easy_iters = 4usize;
    while state.t < 1.0 {
        let t_next = (state.t + dt).min(1.0);
        let mut trial = state.clone();
        trial.t = t_next;
        match newton_solve(spec, &trial, opts.tol, opts.max_iter) {
            Ok(mut next) => {
                next.step_history = state.step_history.clone();
                next.step_history.push((t_next, next.newton_iters, next.residual_norm));
                if next.newton_iters <= easy_iters {
                    dt *= 1.5;
                }
                state = next;
            }
            Err(_) => {
                dt *= 0.5;
                if dt < opts.min_dt {
                    return Err(SolveFailure {
                        error: Error::ContinuationFailure { t_last: state.t },
                        best: state,
                    });
                }
            }
        }
    }
    Ok(state)
}

/// Analytic a priori bounds: every converged even solution of the t = 1
/// equation satisfies `phi_low <= phi <= phi_high` up to discretization
/// slack. With `g(x) = ((x^2 - 1)/2)^k`, the maximum principle at the
/// extrema gives `g(max phi) >= C(n,k) min f` and
/// `g(min phi) <= C(n,k) max f`; combining with the midpoint inequality
/// `(max phi + 1/max phi)/2 <= min phi` yields
/// `phi_low = (m + 1/m)/2` with `m = g^{-1}(C(n,k) min f)` and
/// `phi_high = M + sqrt(M^2 - 1)` with `M = g^{-1}(C(n,k) max f)`.
pub fn apriori_bounds(spec: &ProblemSpec) -> (f64, f64) {
    let c = binomial(spec.n, spec.k);
    let k = spec.k;
    let m = g_inverse(c * spec.f.min(), k);
    let mm = g_inverse(c * spec.f.max(), k);
    let phi_low = 0.5 * (m + 1.0 / m);
    let phi_high = mm + (mm * mm - 1.0).max(0.0).sqrt();
    (phi_low, phi_high)
}

/// Inverse of `g(x) = ((x^2 - 1)/2)^k` on [1, 1e10], by bisection to 1e-12.
fn g_inverse(y: f64, k: usize) -> f64 {
    let g = |x: f64| (0.5 * (x * x - 1.0)).powi(k as i32);
    let (mut lo, mut hi) = (1.0_f64, 1e10_f64);
    if g(hi) < y {
        return hi;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The midpoint gap `min phi - (max phi + 1/max phi)/2`, non-negative (up
/// to discretization slack) for even h-convex solutions.
pub fn midpoint_check(sf: &SupportFunction) -> f64 {
    let max = sf.phi().max();
    sf.phi().min() - 0.5 * (max + 1.0 / max)
}

/// Builds the problem whose exact discrete root is the given support
/// function: `f` is defined node-wise from the discrete residual,
/// `f = phi^k sigma_n(A)/sigma_{n-k}(A)`, and `f_tilde = 1/f`.
pub fn manufactured_spec(sf: &SupportFunction, k: usize) -> Result<ProblemSpec> {
    let grid = sf.grid().clone();
    let n = grid.dim();
    let d = sf.phi().derivatives();
    let a = build_a_with(sf, &d);
    check_cone(&a)?;
    let phi = sf.phi().values();
    let mut f_tilde = Vec::with_capacity(phi.len());
    for idx in 0..phi.len() {
        let m = a.at(idx);
        let num = symfunc::sigma_matrix(&m, n)?;
        let den = symfunc::sigma_matrix(&m, n - k)?;
        let f = phi[idx].powi(k as i32) * num / den;
        f_tilde.push(1.0 / f);
    }
    ProblemSpec::new(k, ScalarField::new(grid, f_tilde)?, None)
}
