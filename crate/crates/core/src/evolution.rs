//! TVD Runge-Kutta time integration and the full adaptive solve loop:
//! encode, truncate, extend with safety points, evolve on the sparse
//! support, remesh.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::metrics::compression_ratio;
use crate::models::{Bc, BulkVelocity, ModelProblem};
use crate::num::Real;
use crate::schemes::{
    cfl_dt, degenerate_rhs, degenerate_rhs_sparse, lf_eno_rhs, roe_fv_rhs, FluxKind, SchemeConfig,
};
use crate::sparse::{extend_with_safety, fill_inactive, SparseGrid};
use crate::transform::{
    cell_avg_coeffs, encode_point, interp_coeffs, truncate, BoundaryMode, InterpCoefficients,
    ThresholdPolicy,
};
use crate::tree::{tree_rhs, GradedTree};

/// Shu-Osher stage coefficients: each stage computes
/// `u <- a * u_n + b * (u + dt L(u))`.
const RK2_STAGES: [(f64, f64); 2] = [(0.0, 1.0), (0.5, 0.5)];
const RK3_STAGES: [(f64, f64); 3] = [(0.0, 1.0), (0.75, 0.25), (1.0 / 3.0, 2.0 / 3.0)];

fn stages(order: usize) -> Result<&'static [(f64, f64)]> {
    match order {
        2 => Ok(&RK2_STAGES),
        3 => Ok(&RK3_STAGES),
        other => Err(Error::InvalidParameter(format!("unsupported RK order {other}"))),
    }
}

/// Optimal second-order TVD Runge-Kutta step (Heun's method).
pub fn rk2_step<T: Real>(
    u: &[T],
    mut rhs: impl FnMut(&[T]) -> Result<Vec<T>>,
    dt: T,
) -> Result<Vec<T>> {
    rk_step(u, &mut rhs, dt, &RK2_STAGES)
}

/// Optimal third-order TVD Runge-Kutta step (Shu-Osher).
pub fn rk3_step<T: Real>(
    u: &[T],
    mut rhs: impl FnMut(&[T]) -> Result<Vec<T>>,
    dt: T,
) -> Result<Vec<T>> {
    rk_step(u, &mut rhs, dt, &RK3_STAGES)
}

fn rk_step<T: Real>(
    u: &[T],
    rhs: &mut impl FnMut(&[T]) -> Result<Vec<T>>,
    dt: T,
    coeffs: &[(f64, f64)],
) -> Result<Vec<T>> {
    let u0 = u.to_vec();
    let mut cur = u.to_vec();
    for &(a, b) in coeffs {
        let l = rhs(&cur)?;
        let (a, b) = (T::of(a), T::of(b));
        for i in 0..cur.len() {
            cur[i] = a * u0[i] + b * (cur[i] + dt * l[i]);
        }
        if !cur.iter().all(|v| v.is_finite()) {
            return Err(Error::Unstable { step: 0, time: f64::NAN });
        }
    }
    Ok(cur)
}

/// Multiresolution options of an adaptive run.
#[derive(Debug, Clone, Copy)]
pub struct MrOptions<T> {
    /// Interpolation order: `r` (even) on point-value paths, `r_bar` (odd)
    /// on the cell-average tree path.
    pub order: usize,
    pub levels: usize,
    pub epsilon: T,
    pub remesh_interval: usize,
    pub safety_radius: usize,
}

impl<T: Real> MrOptions<T> {
    pub fn new(order: usize, levels: usize, epsilon: T) -> Self {
        Self { order, levels, epsilon, remesh_interval: 1, safety_radius: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOptions<T> {
    pub scheme: SchemeConfig<T>,
    pub n0: usize,
    pub rk_order: usize,
    pub t_final: T,
    pub snapshot_times: Vec<T>,
    pub snapshot_steps: Vec<usize>,
    pub mr: Option<MrOptions<T>>,
    pub track_tv: bool,
    pub max_steps: usize,
}

impl<T: Real> SolveOptions<T> {
    pub fn new(scheme: SchemeConfig<T>, n0: usize, t_final: T) -> Self {
        Self {
            scheme,
            n0,
            rk_order: 2,
            t_final,
            snapshot_times: Vec::new(),
            snapshot_steps: Vec::new(),
            mr: None,
            track_tv: false,
            max_steps: 200_000_000,
        }
    }
}

/// State emitted to snapshot sinks and kept in the report.
#[derive(Debug, Clone)]
pub struct Snapshot<T> {
    pub step: usize,
    pub t: T,
    pub xs: Vec<T>,
    pub u: Vec<T>,
    /// Rows `(level, position, x)` of the significant details.
    pub significance: Vec<(usize, usize, T)>,
    pub significant_count: usize,
    pub mu: T,
    pub flux_evals_cum: u64,
}

#[derive(Debug, Clone)]
pub struct SolveReport<T> {
    pub snapshots: Vec<Snapshot<T>>,
    pub steps: usize,
    pub dt: T,
    pub final_t: T,
    pub xs: Vec<T>,
    pub final_u: Vec<T>,
    pub flux_evals: u64,
    pub cpu_seconds: f64,
    pub tv_series: Vec<T>,
    pub q_switch_time: Option<T>,
}

/// A time-marching path: uniform or adaptive, one of the three scheme
/// families.
trait Path<T: Real> {
    /// One full RK step; returns interface-flux evaluations performed.
    fn advance(&mut self, dt: T) -> Result<u64>;
    /// Mesh adaptation between steps (no-op on uniform paths).
    fn remesh(&mut self) -> Result<()>;
    fn fine_solution(&mut self) -> (Vec<T>, Vec<T>);
    fn significance(&self) -> (usize, Vec<(usize, usize, T)>);
    fn q_switch_time(&self) -> Option<T> {
        None
    }
    fn set_time(&mut self, _t: T) {}
}

fn drive<T: Real>(
    mut path: Box<dyn Path<T> + '_>,
    opts: &SolveOptions<T>,
    dt: T,
    n0_points: usize,
    levels: usize,
    remesh_interval: usize,
    mut sink: Option<&mut dyn FnMut(&Snapshot<T>)>,
) -> Result<SolveReport<T>> {
    let start = Instant::now();
    let mut t = T::zero();
    let mut step = 0usize;
    let mut flux_evals = 0u64;
    let mut snapshots = Vec::new();
    let mut tv_series = Vec::new();
    let mut times = opts.snapshot_times.clone();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut time_idx = 0usize;
    let steps_sorted = {
        let mut s = opts.snapshot_steps.clone();
        s.sort_unstable();
        s
    };
    let tiny = dt * T::of(1e-9);
    let emit = |path: &mut dyn Path<T>,
                    step: usize,
                    t: T,
                    flux_evals: u64,
                    snapshots: &mut Vec<Snapshot<T>>,
                    sink: &mut Option<&mut dyn FnMut(&Snapshot<T>)>| {
        let (xs, u) = path.fine_solution();
        let (count, significance) = path.significance();
        let snap = Snapshot {
            step,
            t,
            xs,
            u,
            significance,
            significant_count: count,
            mu: compression_ratio(n0_points, levels, count),
            flux_evals_cum: flux_evals,
        };
        if let Some(s) = sink.as_mut() {
            s(&snap);
        }
        snapshots.push(snap);
    };
    if opts.track_tv {
        let (_, u) = path.fine_solution();
        tv_series.push(crate::metrics::total_variation(&u));
    }
    while t < opts.t_final - tiny && step < opts.max_steps {
        while time_idx < times.len() && t + dt > times[time_idx] + tiny {
            emit(&mut *path, step, t, flux_evals, &mut snapshots, &mut sink);
            time_idx += 1;
        }
        if step > 0 && step % remesh_interval == 0 {
            path.remesh()
                .map_err(|e| attach_step(e, step, t))?;
        }
        path.set_time(t);
        flux_evals += path
            .advance(dt)
            .map_err(|e| attach_step(e, step, t))?;
        t = t + dt;
        step += 1;
        if opts.track_tv {
            let (_, u) = path.fine_solution();
            tv_series.push(crate::metrics::total_variation(&u));
        }
        if steps_sorted.binary_search(&step).is_ok() {
            emit(&mut *path, step, t, flux_evals, &mut snapshots, &mut sink);
        }
    }
    while time_idx < times.len() {
        emit(&mut *path, step, t, flux_evals, &mut snapshots, &mut sink);
        time_idx += 1;
    }
    let (xs, final_u) = path.fine_solution();
    Ok(SolveReport {
        snapshots,
        steps: step,
        dt,
        final_t: t,
        xs,
        final_u,
        flux_evals,
        cpu_seconds: start.elapsed().as_secs_f64(),
        tv_series,
        q_switch_time: path.q_switch_time(),
    })
}

fn attach_step<T: Real>(e: Error, step: usize, t: T) -> Error {
    match e {
        Error::Unstable { .. } => Error::Unstable { step, time: t.as_f64() },
        other => other,
    }
}

fn alpha_over_range<T: Real>(model: &ModelProblem<T>, umin: T, umax: T) -> T {
    let mut m = model.flux_deriv(umin).abs().max(model.flux_deriv(umax).abs());
    let n = 128;
    for i in 1..n {
        let u = umin + (umax - umin) * T::of(i as f64 / n as f64);
        m = m.max(model.flux_deriv(u).abs());
    }
    m.max(T::of(1e-300))
}

// ---------------------------------------------------------------------------
// LF-ENO path (point values, periodic)
// ---------------------------------------------------------------------------

struct LfEnoPath<'m, T: Real> {
    model: &'m ModelProblem<T>,
    xs: Vec<T>,
    u: Vec<T>,
    period: T,
    eno_order: usize,
    rk: &'static [(f64, f64)],
    // Adaptive machinery (None on the uniform path).
    mr: Option<LfEnoMr<T>>,
}

struct LfEnoMr<T> {
    coeffs: InterpCoefficients<T>,
    policy: ThresholdPolicy<T>,
    safety_radius: usize,
    grid: SparseGrid,
}

impl<'m, T: Real> LfEnoPath<'m, T> {
    fn new(model: &'m ModelProblem<T>, opts: &SolveOptions<T>) -> Result<Self> {
        if !model.is_periodic() {
            return Err(Error::InvalidConfig(
                "the LF-ENO scheme runs on periodic domains".into(),
            ));
        }
        let n0 = opts.n0;
        let (lo, hi) = model.domain;
        let h = (hi - lo) / T::of(n0 as f64);
        let xs: Vec<T> = (1..=n0).map(|j| lo + T::of(j as f64) * h).collect();
        let u: Vec<T> = xs.iter().map(|x| model.initial(*x)).collect();
        let mr = match &opts.mr {
            None => None,
            Some(m) => {
                let coeffs = interp_coeffs::<T>(m.order)?;
                let policy = ThresholdPolicy::new(m.epsilon, m.levels);
                let rep = encode_point(&u, &coeffs, m.levels, BoundaryMode::Periodic)?;
                let (trunc, mask) = truncate(&rep, &policy);
                let grid = extend_with_safety(&trunc, &mask, &policy, m.safety_radius);
                Some(LfEnoMr { coeffs, policy, safety_radius: m.safety_radius, grid })
            }
        };
        Ok(Self {
            model,
            xs,
            u,
            period: hi - lo,
            eno_order: opts.scheme.eno_order,
            rk: stages(opts.rk_order)?,
            mr,
        })
    }
}

impl<'m, T: Real> Path<T> for LfEnoPath<'m, T> {
    fn advance(&mut self, dt: T) -> Result<u64> {
        let mut evals = 0u64;
        match &mut self.mr {
            None => {
                let u0 = self.u.clone();
                for &(a, b) in self.rk {
                    let (umin, umax) = min_max(&self.u);
                    let alpha = alpha_over_range(self.model, umin, umax);
                    let r = lf_eno_rhs(
                        &self.xs,
                        &self.u,
                        &|v| self.model.flux(v),
                        alpha,
                        self.eno_order,
                        self.period,
                    )?;
                    evals += r.flux_evals;
                    let (a, b) = (T::of(a), T::of(b));
                    for i in 0..self.u.len() {
                        self.u[i] = a * u0[i] + b * (self.u[i] + dt * r.rhs[i]);
                    }
                    ensure_finite(&self.u)?;
                }
            }
            Some(mr) => {
                let u0 = self.u.clone();
                let active = mr.grid.active_indices();
                let axs: Vec<T> = active.iter().map(|i| self.xs[*i]).collect();
                for &(a, b) in self.rk {
                    fill_inactive(&mut self.u, &mr.grid, &mr.coeffs);
                    let aus: Vec<T> = active.iter().map(|i| self.u[*i]).collect();
                    let (umin, umax) = min_max(&aus);
                    let alpha = alpha_over_range(self.model, umin, umax);
                    let r = lf_eno_rhs(
                        &axs,
                        &aus,
                        &|v| self.model.flux(v),
                        alpha,
                        self.eno_order,
                        self.period,
                    )?;
                    evals += r.flux_evals;
                    let (a, b) = (T::of(a), T::of(b));
                    for (pos, idx) in active.iter().enumerate() {
                        self.u[*idx] = a * u0[*idx] + b * (self.u[*idx] + dt * r.rhs[pos]);
                    }
                    ensure_finite_sparse(&self.u, &active)?;
                }
            }
        }
        Ok(evals)
    }

    fn remesh(&mut self) -> Result<()> {
        if let Some(mr) = &mut self.mr {
            fill_inactive(&mut self.u, &mr.grid, &mr.coeffs);
            let rep = encode_point(&self.u, &mr.coeffs, mr.policy.levels, BoundaryMode::Periodic)?;
            let (trunc, mask) = truncate(&rep, &mr.policy);
            mr.grid = extend_with_safety(&trunc, &mask, &mr.policy, mr.safety_radius);
        }
        Ok(())
    }

    fn fine_solution(&mut self) -> (Vec<T>, Vec<T>) {
        if let Some(mr) = &self.mr {
            fill_inactive(&mut self.u, &mr.grid, &mr.coeffs);
        }
        (self.xs.clone(), self.u.clone())
    }

    fn significance(&self) -> (usize, Vec<(usize, usize, T)>) {
        match &self.mr {
            None => (0, Vec::new()),
            Some(mr) => significance_rows(&mr.grid, &self.xs, self.model.domain.0, self.period),
        }
    }
}

fn significance_rows<T: Real>(
    grid: &SparseGrid,
    _xs: &[T],
    lo: T,
    width: T,
) -> (usize, Vec<(usize, usize, T)>) {
    let n0 = grid.n0();
    let h = width / T::of(n0 as f64);
    let rows = grid
        .significance_rows()
        .into_iter()
        .map(|(k, j, node)| (k, j, lo + T::of(node as f64) * h))
        .collect();
    (grid.significant_count(), rows)
}

fn min_max<T: Real>(u: &[T]) -> (T, T) {
    let mut lo = u[0];
    let mut hi = u[0];
    for v in u {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    (lo, hi)
}

fn ensure_finite<T: Real>(u: &[T]) -> Result<()> {
    if u.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::Unstable { step: 0, time: f64::NAN })
    }
}

fn ensure_finite_sparse<T: Real>(u: &[T], active: &[usize]) -> Result<()> {
    if active.iter().all(|i| u[*i].is_finite()) {
        Ok(())
    } else {
        Err(Error::Unstable { step: 0, time: f64::NAN })
    }
}

// ---------------------------------------------------------------------------
// EO-MUSCL path (finite differences, bounded; degenerate diffusion, bulk
// flow and feed boundaries)
// ---------------------------------------------------------------------------

struct EoMusclPath<'m, T: Real> {
    model: &'m ModelProblem<T>,
    xs: Vec<T>,
    u: Vec<T>,
    dx: T,
    theta: T,
    rk: &'static [(f64, f64)],
    q_on: bool,
    q_switch_time: Option<T>,
    t_now: T,
    mr: Option<LfEnoMr<T>>,
}

impl<'m, T: Real> EoMusclPath<'m, T> {
    fn new(model: &'m ModelProblem<T>, opts: &SolveOptions<T>) -> Result<Self> {
        let n0 = opts.n0;
        let (lo, hi) = model.domain;
        let dx = (hi - lo) / T::of(n0 as f64);
        let xs: Vec<T> = (0..=n0).map(|j| lo + T::of(j as f64) * dx).collect();
        let mut u: Vec<T> = xs.iter().map(|x| model.initial(*x)).collect();
        if let Bc::Dirichlet(v) = model.bc.0 {
            u[0] = v;
        }
        if let Bc::Dirichlet(v) = model.bc.1 {
            u[n0] = v;
        }
        let mr = match &opts.mr {
            None => None,
            Some(m) => {
                let coeffs = interp_coeffs::<T>(m.order)?;
                let policy = ThresholdPolicy::new(m.epsilon, m.levels);
                let rep = encode_point(&u, &coeffs, m.levels, BoundaryMode::Bounded)?;
                let (trunc, mask) = truncate(&rep, &policy);
                let grid = extend_with_safety(&trunc, &mask, &policy, m.safety_radius);
                Some(LfEnoMr { coeffs, policy, safety_radius: m.safety_radius, grid })
            }
        };
        Ok(Self {
            model,
            xs,
            u,
            dx,
            theta: opts.scheme.theta,
            rk: stages(opts.rk_order)?,
            q_on: false,
            q_switch_time: None,
            t_now: T::zero(),
            mr,
        })
    }

    fn q_now(&self) -> T {
        match self.model.bulk {
            BulkVelocity::Zero => T::zero(),
            BulkVelocity::SwitchAtBottomConcentration { q, .. } => {
                if self.q_on {
                    q
                } else {
                    T::zero()
                }
            }
        }
    }
}

impl<'m, T: Real> Path<T> for EoMusclPath<'m, T> {
    fn set_time(&mut self, t: T) {
        self.t_now = t;
        if let BulkVelocity::SwitchAtBottomConcentration { threshold, .. } = self.model.bulk {
            if !self.q_on && self.u[0] >= threshold {
                self.q_on = true;
                self.q_switch_time = Some(t);
            }
        }
    }

    fn advance(&mut self, dt: T) -> Result<u64> {
        let mut evals = 0u64;
        let q = self.q_now();
        match &mut self.mr {
            None => {
                let u0 = self.u.clone();
                for &(a, b) in self.rk {
                    let mut stats = 0u64;
                    let rhs = degenerate_rhs(&self.u, self.model, self.theta, self.dx, q, &mut stats)?;
                    evals += stats;
                    let (a, b) = (T::of(a), T::of(b));
                    for i in 0..self.u.len() {
                        self.u[i] = a * u0[i] + b * (self.u[i] + dt * rhs[i]);
                    }
                    ensure_finite(&self.u)?;
                }
            }
            Some(mr) => {
                let u0 = self.u.clone();
                let active = mr.grid.active_indices();
                for &(a, b) in self.rk {
                    fill_inactive(&mut self.u, &mr.grid, &mr.coeffs);
                    let mut stats = 0u64;
                    let upd = degenerate_rhs_sparse(
                        &self.u, &active, self.model, self.theta, self.dx, q, &mut stats,
                    )?;
                    evals += stats;
                    let (a, b) = (T::of(a), T::of(b));
                    for (idx, r) in upd {
                        self.u[idx] = a * u0[idx] + b * (self.u[idx] + dt * r);
                    }
                    ensure_finite_sparse(&self.u, &active)?;
                }
            }
        }
        Ok(evals)
    }

    fn remesh(&mut self) -> Result<()> {
        if let Some(mr) = &mut self.mr {
            fill_inactive(&mut self.u, &mr.grid, &mr.coeffs);
            let rep = encode_point(&self.u, &mr.coeffs, mr.policy.levels, BoundaryMode::Bounded)?;
            let (trunc, mask) = truncate(&rep, &mr.policy);
            mr.grid = extend_with_safety(&trunc, &mask, &mr.policy, mr.safety_radius);
        }
        Ok(())
    }

    fn fine_solution(&mut self) -> (Vec<T>, Vec<T>) {
        if let Some(mr) = &self.mr {
            fill_inactive(&mut self.u, &mr.grid, &mr.coeffs);
        }
        (self.xs.clone(), self.u.clone())
    }

    fn significance(&self) -> (usize, Vec<(usize, usize, T)>) {
        match &self.mr {
            None => (0, Vec::new()),
            Some(mr) => {
                let width = self.model.domain.1 - self.model.domain.0;
                significance_rows(&mr.grid, &self.xs, self.model.domain.0, width)
            }
        }
    }

    fn q_switch_time(&self) -> Option<T> {
        self.q_switch_time
    }
}

// ---------------------------------------------------------------------------
// Roe-ENO2 path (cell averages; flat array or graded tree)
// ---------------------------------------------------------------------------

struct RoePath<'m, T: Real> {
    model: &'m ModelProblem<T>,
    centers: Vec<T>,
    dx: T,
    n0: usize,
    rk: &'static [(f64, f64)],
    state: RoeState<T>,
}

enum RoeState<T> {
    Uniform(Vec<T>),
    Tree {
        tree: GradedTree<T>,
        coeffs: InterpCoefficients<T>,
        policy: ThresholdPolicy<T>,
        last_significant: usize,
        last_rows: Vec<(usize, usize, T)>,
    },
}

impl<'m, T: Real> RoePath<'m, T> {
    fn new(model: &'m ModelProblem<T>, opts: &SolveOptions<T>) -> Result<Self> {
        let n0 = opts.n0;
        let (lo, hi) = model.domain;
        let dx = (hi - lo) / T::of(n0 as f64);
        let centers: Vec<T> =
            (0..n0).map(|i| lo + (T::of(i as f64) + T::of(0.5)) * dx).collect();
        let fine: Vec<T> = centers.iter().map(|x| model.initial(*x)).collect();
        let state = match &opts.mr {
            None => RoeState::Uniform(fine),
            Some(m) => {
                let coeffs = cell_avg_coeffs::<T>(m.order)?;
                let policy = ThresholdPolicy::new(m.epsilon, m.levels);
                let rep = crate::transform::encode_cellavg(
                    &fine,
                    &coeffs,
                    m.levels,
                    if model.is_periodic() { BoundaryMode::Periodic } else { BoundaryMode::Bounded },
                )?;
                let (_, mask) = truncate(&rep, &policy);
                let tree = GradedTree::from_mask(
                    lo,
                    hi,
                    n0,
                    m.levels,
                    model.is_periodic(),
                    &mask,
                    &fine,
                )?;
                let count = mask.count();
                let rows = mask
                    .iter()
                    .map(|(k, j)| {
                        let node = (2 * j - 1) << (k - 1);
                        (k, j, lo + T::of(node as f64) * dx)
                    })
                    .collect();
                RoeState::Tree { tree, coeffs, policy, last_significant: count, last_rows: rows }
            }
        };
        Ok(Self { model, centers, dx, n0, rk: stages(opts.rk_order)?, state })
    }
}

impl<'m, T: Real> Path<T> for RoePath<'m, T> {
    fn advance(&mut self, dt: T) -> Result<u64> {
        let mut evals = 0u64;
        match &mut self.state {
            RoeState::Uniform(u) => {
                let u0 = u.clone();
                for &(a, b) in self.rk {
                    let mut stats = 0u64;
                    let rhs = roe_fv_rhs(u, self.model, self.dx, &mut stats)?;
                    evals += stats;
                    let (a, b) = (T::of(a), T::of(b));
                    for i in 0..u.len() {
                        u[i] = a * u0[i] + b * (u[i] + dt * rhs[i]);
                    }
                    ensure_finite(u)?;
                }
            }
            RoeState::Tree { tree, coeffs, .. } => {
                let leaves = tree.leaves();
                let u0 = tree.leaf_values(&leaves);
                let mut cur = u0.clone();
                for &(a, b) in self.rk {
                    let out = tree_rhs(tree, self.model, coeffs)?;
                    evals += out.flux_evals;
                    let (a, b) = (T::of(a), T::of(b));
                    for i in 0..cur.len() {
                        cur[i] = a * u0[i] + b * (cur[i] + dt * out.rhs[i]);
                    }
                    ensure_finite(&cur)?;
                    tree.set_leaf_values(&leaves, &cur);
                    tree.upward_average();
                }
            }
        }
        Ok(evals)
    }

    fn remesh(&mut self) -> Result<()> {
        if let RoeState::Tree { tree, coeffs, policy, last_significant, last_rows } =
            &mut self.state
        {
            let report = tree.adapt_reported(policy, coeffs);
            *last_significant = report.significant;
            let lo = self.model.domain.0;
            *last_rows = report
                .rows
                .into_iter()
                .map(|(k, j)| {
                    let node = (2 * j - 1) << (k - 1);
                    (k, j, lo + T::of(node as f64) * self.dx)
                })
                .collect();
        }
        Ok(())
    }

    fn fine_solution(&mut self) -> (Vec<T>, Vec<T>) {
        let u = match &self.state {
            RoeState::Uniform(u) => u.clone(),
            RoeState::Tree { tree, coeffs, .. } => tree.reconstruct_uniform(coeffs),
        };
        debug_assert_eq!(u.len(), self.n0);
        (self.centers.clone(), u)
    }

    fn significance(&self) -> (usize, Vec<(usize, usize, T)>) {
        match &self.state {
            RoeState::Uniform(_) => (0, Vec::new()),
            RoeState::Tree { last_significant, last_rows, .. } => {
                (*last_significant, last_rows.clone())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Public drivers
// ---------------------------------------------------------------------------

fn build_path<'m, T: Real>(
    model: &'m ModelProblem<T>,
    opts: &SolveOptions<T>,
) -> Result<Box<dyn Path<T> + 'm>> {
    opts.scheme.validate()?;
    Ok(match opts.scheme.kind {
        FluxKind::LfEno => Box::new(LfEnoPath::new(model, opts)?),
        FluxKind::EoMuscl => Box::new(EoMusclPath::new(model, opts)?),
        FluxKind::RoeEno2 => Box::new(RoePath::new(model, opts)?),
    })
}

pub fn solve_with_sink<T: Real>(
    model: &ModelProblem<T>,
    opts: &SolveOptions<T>,
    sink: Option<&mut dyn FnMut(&Snapshot<T>)>,
) -> Result<SolveReport<T>> {
    let (lo, hi) = model.domain;
    let h0 = (hi - lo) / T::of(opts.n0 as f64);
    let dt = cfl_dt(model, &opts.scheme, h0)?;
    let (levels, remesh_interval) = match &opts.mr {
        Some(m) => (m.levels, m.remesh_interval.max(1)),
        None => (1, usize::MAX),
    };
    let path = build_path(model, opts)?;
    drive(path, opts, dt, opts.n0 + 1, levels, remesh_interval, sink)
}

/// Reference solve on the full uniform fine grid (no multiresolution).
pub fn solve_uniform<T: Real>(
    model: &ModelProblem<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveReport<T>> {
    let mut opts = opts.clone();
    opts.mr = None;
    solve_with_sink(model, &opts, None)
}

/// Adaptive multiresolution solve; `opts.mr` must be present.
pub fn solve_adaptive<T: Real>(
    model: &ModelProblem<T>,
    opts: &SolveOptions<T>,
) -> Result<SolveReport<T>> {
    if opts.mr.is_none() {
        return Err(Error::InvalidConfig("adaptive solve requires MR options".into()));
    }
    solve_with_sink(model, opts, None)
}

/// Paired error/compression rows of a compare run.
#[derive(Debug, Clone)]
pub struct CompareRow<T> {
    pub step: usize,
    pub t: T,
    pub e1: T,
    pub e2: T,
    pub einf: T,
    pub mu: T,
    pub significant: usize,
}

#[derive(Debug, Clone)]
pub struct CompareReport<T> {
    pub uniform: SolveReport<T>,
    pub adaptive: SolveReport<T>,
    pub rows: Vec<CompareRow<T>>,
    pub cpu_uniform_s: f64,
    pub cpu_adaptive_s: f64,
    pub speedup: f64,
}

/// Runs the uniform and adaptive paths with identical time steps and pairs
/// their snapshots. Timing repeats each path `reps` times and keeps the
/// median wall-clock duration.
pub fn compare<T: Real>(
    model: &ModelProblem<T>,
    opts: &SolveOptions<T>,
    reps: usize,
) -> Result<CompareReport<T>> {
    let reps = reps.max(1);
    let mut uniform = None;
    let mut adaptive = None;
    let mut cpu_u = Vec::new();
    let mut cpu_a = Vec::new();
    for _ in 0..reps {
        let r = solve_uniform(model, opts)?;
        cpu_u.push(r.cpu_seconds);
        uniform = Some(r);
        let r = solve_adaptive(model, opts)?;
        cpu_a.push(r.cpu_seconds);
        adaptive = Some(r);
    }
    let uniform = uniform.unwrap();
    let adaptive = adaptive.unwrap();
    let median = |mut v: Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v[v.len() / 2]
    };
    let (cpu_uniform_s, cpu_adaptive_s) = (median(cpu_u), median(cpu_a));
    let mut rows = Vec::new();
    for (su, sa) in uniform.snapshots.iter().zip(&adaptive.snapshots) {
        let (e1, e2, einf) = crate::metrics::error_norms(&su.u, &sa.u)?;
        rows.push(CompareRow {
            step: su.step,
            t: su.t,
            e1,
            e2,
            einf,
            mu: sa.mu,
            significant: sa.significant_count,
        });
    }
    let speedup = crate::metrics::speedup(cpu_uniform_s, cpu_adaptive_s);
    Ok(CompareReport { uniform, adaptive, rows, cpu_uniform_s, cpu_adaptive_s, speedup })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        burgers_inviscid, burgers_viscous, convection_diffusion, sedimentation_floc_copper,
        BurgersInit,
    };

    #[test]
    fn rk2_scalar_expansion() {
        // u' = -u: one step gives u (1 - dt + dt^2/2).
        let dt = 0.1;
        let u = vec![2.0f64];
        let next = rk2_step(&u, |v| Ok(v.iter().map(|x| -x).collect()), dt).unwrap();
        let expected = 2.0 * (1.0 - dt + dt * dt / 2.0);
        assert!((next[0] - expected).abs() < 1e-15);
        // L = 0 keeps the state.
        let next = rk2_step(&u, |v| Ok(vec![0.0; v.len()]), dt).unwrap();
        assert_eq!(next[0], 2.0);
    }

    #[test]
    fn rk_convergence_orders() {
        // Integrate u' = -u to t = 1 with halving steps; the error ratio
        // approaches 2^order.
        for (order, expected) in [(2usize, 4.0f64), (3, 8.0)] {
            let mut errs = Vec::new();
            for n in [40usize, 80] {
                let dt = 1.0 / n as f64;
                let mut u = vec![1.0f64];
                for _ in 0..n {
                    u = match order {
                        2 => rk2_step(&u, |v| Ok(v.iter().map(|x| -x).collect()), dt).unwrap(),
                        _ => rk3_step(&u, |v| Ok(v.iter().map(|x| -x).collect()), dt).unwrap(),
                    };
                }
                errs.push((u[0] - (-1.0f64).exp()).abs());
            }
            let ratio = errs[0] / errs[1];
            assert!(
                (ratio / expected - 1.0).abs() < 0.25,
                "order {order}: ratio {ratio}"
            );
        }
    }

    #[test]
    fn rk3_matches_independent_ssp_oracle() {
        // Independent textbook SSP-RK3 on a random linear system.
        let a_mat = [[-1.0, 0.3, 0.0], [0.2, -0.7, 0.1], [0.0, 0.4, -1.2f64]];
        let apply = |v: &[f64]| -> Vec<f64> {
            (0..3)
                .map(|i| (0..3).map(|j| a_mat[i][j] * v[j]).sum())
                .collect()
        };
        let u0 = vec![0.3, -0.8, 0.5f64];
        let dt = 0.05;
        let ours = rk3_step(&u0, |v| Ok(apply(v)), dt).unwrap();
        // Oracle written in the classic three-line form.
        let l0 = apply(&u0);
        let u1: Vec<f64> = (0..3).map(|i| u0[i] + dt * l0[i]).collect();
        let l1 = apply(&u1);
        let u2: Vec<f64> =
            (0..3).map(|i| 0.75 * u0[i] + 0.25 * (u1[i] + dt * l1[i])).collect();
        let l2 = apply(&u2);
        let fin: Vec<f64> = (0..3)
            .map(|i| u0[i] / 3.0 + 2.0 / 3.0 * (u2[i] + dt * l2[i]))
            .collect();
        for (a, b) in ours.iter().zip(&fin) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_epsilon_adaptive_matches_uniform() {
        let model = burgers_inviscid::<f64>();
        let scheme = SchemeConfig::new(FluxKind::LfEno);
        let mut opts = SolveOptions::new(scheme, 128, 0.1);
        opts.mr = Some({
            let mut m = MrOptions::new(4, 5, 0.0);
            m.remesh_interval = 1;
            m
        });
        let uni = solve_uniform(&model, &opts).unwrap();
        let ada = solve_adaptive(&model, &opts).unwrap();
        assert_eq!(uni.steps, ada.steps);
        let (_, _, einf) = crate::metrics::error_norms(&uni.final_u, &ada.final_u).unwrap();
        assert!(einf <= 1e-12, "einf {einf}");
    }

    #[test]
    fn adaptive_burgers_tracks_uniform_within_tolerance() {
        let model = burgers_inviscid::<f64>();
        let scheme = SchemeConfig::new(FluxKind::LfEno);
        let mut opts = SolveOptions::new(scheme, 256, 0.16);
        opts.mr = Some({
            let mut m = MrOptions::new(4, 7, 1e-5);
            m.remesh_interval = 2;
            m
        });
        opts.snapshot_times = vec![0.16];
        let rep = compare(&model, &opts, 1).unwrap();
        let row = &rep.rows[0];
        assert!(row.einf < 1e-3, "einf {}", row.einf);
        assert!(row.mu > 5.0, "mu {}", row.mu);
        // Flux evaluations per step stay near the active count.
        let per_step = rep.adaptive.flux_evals as f64 / (rep.adaptive.steps as f64 * 2.0);
        assert!(per_step < 0.6 * 256.0, "per-step evals {per_step}");
    }

    #[test]
    fn stage_values_stay_in_range_on_monotone_data() {
        // Viscous Burgers step: the TVD configuration keeps every stage
        // inside the data range.
        let model = burgers_viscous::<f64>(1000.0, BurgersInit::Step).unwrap();
        let scheme = SchemeConfig::new(FluxKind::RoeEno2);
        let mut opts = SolveOptions::new(scheme, 128, 0.05);
        opts.track_tv = true;
        let rep = solve_uniform(&model, &opts).unwrap();
        for v in &rep.final_u {
            assert!(*v >= -1e-10 && *v <= 1.0 + 1e-10);
        }
        // TV never grows.
        for w in rep.tv_series.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "TV grew: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn perturbation_error_grows_at_most_linearly() {
        // e_inf(n) against n over 600 steps: fitted growth exponent <= ~1.
        let model = convection_diffusion::<f64>(100.0).unwrap();
        let scheme = SchemeConfig::new(FluxKind::RoeEno2);
        let mut opts = SolveOptions::new(scheme, 256, f64::INFINITY);
        opts.t_final = f64::MAX;
        opts.max_steps = 600;
        opts.snapshot_steps = vec![50, 100, 200, 300, 400, 500, 600];
        opts.mr = Some(MrOptions::new(3, 7, 1e-3));
        let rep = compare(&model, &opts, 1).unwrap();
        let pts: Vec<(f64, f64)> = rep
            .rows
            .iter()
            .filter(|r| r.einf > 1e-14)
            .map(|r| ((r.step as f64).ln(), r.einf.ln()))
            .collect();
        assert!(pts.len() >= 4);
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!(slope <= 1.3, "growth exponent {slope}");
    }

    #[test]
    fn copper_batch_conserves_mass_and_reaches_steady_state() {
        let model = sedimentation_floc_copper::<f64>();
        let scheme = SchemeConfig::new(FluxKind::EoMuscl);
        let mut opts = SolveOptions::new(scheme, 64, 3600.0);
        opts.snapshot_times = vec![600.0, 1800.0];
        let rep = solve_uniform(&model, &opts).unwrap();
        let dx = 1.0 / 64.0;
        let m0 = 0.15;
        for s in &rep.snapshots {
            let m = crate::metrics::mass(&s.u, dx) / 1.0;
            assert!((m - m0).abs() / m0 < 1e-10, "mass {m} at t {}", s.t);
        }
        // Sediment accumulates at the bottom, clear liquid on top.
        assert!(rep.final_u[0] > 0.2);
        assert!(rep.final_u[63] < 1e-3);
    }
}
