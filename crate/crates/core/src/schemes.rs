//! Spatial discretizations: Lax-Friedrichs flux splitting with hierarchical
//! ENO stencil selection, Roe flux with minmod ENO2 reconstruction,
//! Engquist-Osher flux with the MUSCL theta-limiter, central diffusion,
//! boundary rows for the sedimentation problems, and stability bounds.

use crate::error::{Error, Result};
use crate::models::{Bc, ModelProblem};
use crate::num::Real;

/// Spatial scheme families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// Lax-Friedrichs splitting + ENO interpolation of the flux primitive
    /// (point values, periodic domains).
    LfEno,
    /// Roe flux with minmod ENO2 states + central diffusion (cell averages).
    RoeEno2,
    /// Engquist-Osher flux with MUSCL theta-limited states + conservative
    /// differences of the integrated diffusion (finite differences).
    EoMuscl,
}

#[derive(Debug, Clone, Copy)]
pub struct SchemeConfig<T> {
    pub kind: FluxKind,
    /// ENO interpolation degree `m` for the LF-ENO flux.
    pub eno_order: usize,
    /// MUSCL limiter parameter, `0 <= theta <= 2`.
    pub theta: T,
    /// CFL number `sigma in (0, 1]`.
    pub cfl: T,
}

impl<T: Real> SchemeConfig<T> {
    pub fn new(kind: FluxKind) -> Self {
        Self { kind, eno_order: 2, theta: T::one(), cfl: T::of(0.5) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.theta < T::zero() || self.theta > T::of(2.0) {
            return Err(Error::InvalidParameter(format!("theta out of [0,2]: {}", self.theta)));
        }
        if self.cfl <= T::zero() || self.cfl > T::one() {
            return Err(Error::InvalidParameter(format!("cfl out of (0,1]: {}", self.cfl)));
        }
        if self.eno_order == 0 || self.eno_order > 4 {
            return Err(Error::InvalidParameter(format!("eno order {} unsupported", self.eno_order)));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Elementary fluxes and limiters
// ---------------------------------------------------------------------------

/// Lax-Friedrichs splitting `f± = (f(u) ± alpha u) / 2` of an evaluated
/// flux value.
pub fn lf_split<T: Real>(f_of_u: T, alpha: T, u: T) -> Result<(T, T)> {
    if alpha <= T::zero() {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let half = T::of(0.5);
    Ok((half * (f_of_u + alpha * u), half * (f_of_u - alpha * u)))
}

/// Two-argument Min-Mod: the argument of smaller magnitude.
pub fn minmod<T: Real>(a: T, b: T) -> T {
    if a.abs() <= b.abs() {
        a
    } else {
        b
    }
}

/// Three-argument Min-Mod: min if all positive, max if all negative, else 0.
pub fn minmod3<T: Real>(a: T, b: T, c: T) -> T {
    if a > T::zero() && b > T::zero() && c > T::zero() {
        a.min(b).min(c)
    } else if a < T::zero() && b < T::zero() && c < T::zero() {
        a.max(b).max(c)
    } else {
        T::zero()
    }
}

/// Second-order ENO interface states from the four surrounding averages:
/// left state extrapolated up from cell `i`, right state down from `i+1`.
pub fn eno2_reconstruct<T: Real>(um1: T, u0: T, up1: T, up2: T) -> (T, T) {
    let half = T::of(0.5);
    let left = u0 + half * minmod(up1 - u0, u0 - um1);
    let right = up1 - half * minmod(up2 - up1, up1 - u0);
    (left, right)
}

/// Scalar Roe flux with the secant wave speed.
pub fn roe_flux<T: Real>(u_left: T, u_right: T, f: impl Fn(T) -> T, df: impl Fn(T) -> T) -> T {
    let a = if u_left == u_right {
        df(u_right)
    } else {
        (f(u_right) - f(u_left)) / (u_right - u_left)
    };
    T::of(0.5) * (f(u_left) + f(u_right) - a.abs() * (u_right - u_left))
}

/// Engquist-Osher flux `f+(a) + f-(b)` from a model's splitting data.
pub fn eo_flux<T: Real>(u_left: T, u_right: T, model: &ModelProblem<T>) -> T {
    model.eo_flux(u_left, u_right)
}

/// MUSCL theta-limited slopes; the first and last entries are zero
/// (first-order boundary cells).
pub fn muscl_slopes<T: Real>(u: &[T], theta: T, dx: T) -> Vec<T> {
    let n = u.len();
    let mut s = vec![T::zero(); n];
    let half = T::of(0.5);
    for j in 1..n - 1 {
        s[j] = minmod3(
            theta * (u[j] - u[j - 1]) / dx,
            (u[j + 1] - u[j - 1]) * half / dx,
            theta * (u[j + 1] - u[j]) / dx,
        );
    }
    s
}

// ---------------------------------------------------------------------------
// ENO interpolation of the flux primitive (Lax-Friedrichs splitting)
// ---------------------------------------------------------------------------

/// Divided difference of `order + 1` consecutive nodes starting at `start`.
fn divided_difference<T: Real>(xs: &[T], vs: &[T], start: usize, order: usize) -> T {
    let mut work = [T::zero(); 8];
    work[..=order].copy_from_slice(&vs[start..=start + order]);
    for level in 1..=order {
        for i in 0..=(order - level) {
            work[i] = (work[i + 1] - work[i]) / (xs[start + i + level] - xs[start + i]);
        }
    }
    work[0]
}

/// Hierarchical ENO selection: starting from the pair `(cell, cell + 1)`,
/// extends the stencil left or right toward the smaller divided difference
/// (ties break left) until `m + 1` nodes are collected. Returns the leftmost
/// node index; near the array ends the stencil degrades one-sidedly.
pub fn eno_stencil_select<T: Real>(xs: &[T], vs: &[T], cell: usize, m: usize) -> usize {
    let n = xs.len();
    let mut start = cell;
    let mut width = 1; // current node count - 1 = polynomial degree
    while width < m {
        let can_left = start > 0;
        let can_right = start + width + 1 < n;
        if can_left && can_right {
            let dd_left = divided_difference(xs, vs, start - 1, width + 1).abs();
            let dd_right = divided_difference(xs, vs, start, width + 1).abs();
            if dd_left <= dd_right {
                start -= 1;
            }
        } else if can_left {
            start -= 1;
        } else if !can_right {
            break;
        }
        width += 1;
    }
    start
}

/// Derivative of the Newton-form interpolant through nodes
/// `start..=start+deg`, evaluated at `x`.
fn newton_derivative<T: Real>(xs: &[T], vs: &[T], start: usize, deg: usize, x: T) -> T {
    let mut der = T::zero();
    let mut prod = T::one();
    let mut prod_der = T::zero();
    for t in 0..=deg {
        let c = divided_difference(xs, vs, start, t);
        der = der + c * prod_der;
        let dx = x - xs[start + t];
        prod_der = prod_der * dx + prod;
        prod = prod * dx;
    }
    der
}

/// LF-ENO interface fluxes and semi-discrete right-hand side on a sorted,
/// possibly non-uniform periodic point set.
pub struct LfEnoResult<T> {
    /// Numerical flux at the staggered midpoint right of each point.
    pub interface_flux: Vec<T>,
    /// `du_i/dt = -(fhat_i - fhat_{i-1}) / w_i`.
    pub rhs: Vec<T>,
    /// Interface evaluations performed (one per midpoint).
    pub flux_evals: u64,
}

/// Computes the split ENO fluxes at the staggered midpoints between the
/// given points, wrapping periodically with period `period`.
pub fn lf_eno_rhs<T: Real>(
    xs: &[T],
    us: &[T],
    flux: &dyn Fn(T) -> T,
    alpha: T,
    m: usize,
    period: T,
) -> Result<LfEnoResult<T>> {
    let n = xs.len();
    if n != us.len() {
        return Err(Error::LengthMismatch { expected: n, got: us.len() });
    }
    if n < 3 {
        return Err(Error::InvalidParameter("need at least 3 active points".into()));
    }
    let half = T::of(0.5);
    // Staggered midpoints and the cell widths around each point.
    let mut mid = Vec::with_capacity(n);
    for i in 0..n - 1 {
        mid.push(half * (xs[i] + xs[i + 1]));
    }
    mid.push(half * (xs[n - 1] + xs[0] + period));
    let mut widths = Vec::with_capacity(n);
    widths.push(mid[0] - (mid[n - 1] - period));
    for i in 1..n {
        widths.push(mid[i] - mid[i - 1]);
    }
    // Split fluxes and their primitives at the midpoints.
    let mut vp = Vec::with_capacity(n);
    let mut vm = Vec::with_capacity(n);
    let mut accp = T::zero();
    let mut accm = T::zero();
    for i in 0..n {
        let (fp, fm) = lf_split(flux(us[i]), alpha, us[i])?;
        accp = accp + widths[i] * fp;
        accm = accm + widths[i] * fm;
        vp.push(accp);
        vm.push(accm);
    }
    let (totp, totm) = (accp, accm);
    // Ghost-extended staggered arrays (period shifts of both x and V).
    let g = m + 1;
    let ext = n + 2 * g;
    let mut xg = vec![T::zero(); ext];
    let mut vpg = vec![T::zero(); ext];
    let mut vmg = vec![T::zero(); ext];
    for i in 0..n {
        xg[g + i] = mid[i];
        vpg[g + i] = vp[i];
        vmg[g + i] = vm[i];
    }
    for t in 0..g {
        xg[g - 1 - t] = mid[n - 1 - t] - period;
        vpg[g - 1 - t] = vp[n - 1 - t] - totp;
        vmg[g - 1 - t] = vm[n - 1 - t] - totm;
        xg[g + n + t] = mid[t] + period;
        vpg[g + n + t] = vp[t] + totp;
        vmg[g + n + t] = vm[t] + totm;
    }
    let mut fhat = Vec::with_capacity(n);
    for i in 0..n {
        let idx = g + i;
        // f+: upwind interpolant of the cell left of the interface.
        let sp = eno_stencil_select(&xg, &vpg, idx - 1, m);
        let fp = newton_derivative(&xg, &vpg, sp, m.min(ext - 1 - sp), xg[idx]);
        // f-: interpolant of the cell right of the interface.
        let sm = eno_stencil_select(&xg, &vmg, idx, m);
        let fm = newton_derivative(&xg, &vmg, sm, m.min(ext - 1 - sm), xg[idx]);
        fhat.push(fp + fm);
    }
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let left = if i == 0 { fhat[n - 1] } else { fhat[i - 1] };
        rhs.push(-(fhat[i] - left) / widths[i]);
    }
    Ok(LfEnoResult { interface_flux: fhat, rhs, flux_evals: n as u64 })
}

// ---------------------------------------------------------------------------
// Roe-ENO2 finite-volume right-hand side (constant viscosity)
// ---------------------------------------------------------------------------

/// Ghost-cell values for a cell array under the model's boundary conditions.
fn ghost<T: Real>(u: &[T], i: i64, model: &ModelProblem<T>) -> T {
    let n = u.len() as i64;
    if i >= 0 && i < n {
        return u[i as usize];
    }
    if i < 0 {
        match model.bc.0 {
            Bc::Periodic => u[(i.rem_euclid(n)) as usize],
            Bc::Dirichlet(v) => v,
            Bc::NeumannZero => u[0],
            _ => u[0],
        }
    } else {
        match model.bc.1 {
            Bc::Periodic => u[(i.rem_euclid(n)) as usize],
            Bc::Dirichlet(v) => v,
            Bc::NeumannZero => u[(n - 1) as usize],
            _ => u[(n - 1) as usize],
        }
    }
}

/// Semi-discrete finite-volume operator with Roe advection (minmod ENO2
/// states), second-order central diffusion and a pointwise source.
pub fn roe_fv_rhs<T: Real>(
    u: &[T],
    model: &ModelProblem<T>,
    dx: T,
    stats: &mut u64,
) -> Result<Vec<T>> {
    let n = u.len();
    let nu = match model.diffusion {
        crate::models::Diffusion::Constant(nu) => nu,
        crate::models::Diffusion::None => T::zero(),
        _ => {
            return Err(Error::InvalidConfig(
                "Roe-ENO2 scheme expects constant or zero viscosity".into(),
            ))
        }
    };
    let gv = |i: i64| ghost(u, i, model);
    let mut flux = Vec::with_capacity(n + 1);
    for i in 0..=n as i64 {
        // Interface i - 1/2 in cell terms: between cells i-1 and i.
        let (left, right) = eno2_reconstruct(gv(i - 2), gv(i - 1), gv(i), gv(i + 1));
        let adv = roe_flux(left, right, |v| model.flux(v), |v| model.flux_deriv(v));
        let dif = nu * (gv(i) - gv(i - 1)) / dx;
        flux.push(adv - dif);
        *stats += 1;
    }
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let mut r = -(flux[i + 1] - flux[i]) / dx;
        if model.has_source() {
            r = r + model.source(u[i]);
        }
        rhs.push(r);
    }
    Ok(rhs)
}

// ---------------------------------------------------------------------------
// Engquist-Osher / MUSCL finite-difference scheme with degenerate diffusion
// ---------------------------------------------------------------------------

/// Total flux at the interior interface between nodes `j` and `j+1`.
#[allow(clippy::too_many_arguments)]
fn eo_interface_flux<T: Real>(
    u: &[T],
    slopes: &[T],
    j: usize,
    model: &ModelProblem<T>,
    dx: T,
    q_now: T,
    first_order: bool,
) -> T {
    let half = T::of(0.5);
    let (left, right, q_val) = if first_order {
        (u[j], u[j + 1], if q_now > T::zero() { u[j] } else { u[j + 1] })
    } else {
        let l = u[j] + half * dx * slopes[j];
        let r = u[j + 1] - half * dx * slopes[j + 1];
        (l, r, if q_now > T::zero() { l } else { r })
    };
    q_now * q_val + model.eo_flux(left, right) - (model.big_a(u[j + 1]) - model.big_a(u[j])) / dx
}

/// Semi-discrete right-hand side of the second-order upwind scheme for
/// `u_t + (q u + f(u))_x = A(u)_xx + S(u)` on the nodes `0..=n`, with the
/// boundary rows in flux form so that the total mass telescopes. Rows pinned
/// by a Dirichlet condition get a zero right-hand side.
pub fn degenerate_rhs<T: Real>(
    u: &[T],
    model: &ModelProblem<T>,
    theta: T,
    dx: T,
    q_now: T,
    stats: &mut u64,
) -> Result<Vec<T>> {
    let n = u.len() - 1;
    if !u.iter().all(|v| v.is_finite()) {
        return Err(Error::Unstable { step: 0, time: f64::NAN });
    }
    let slopes = muscl_slopes(u, theta, dx);
    let mut phi = Vec::with_capacity(n);
    for j in 0..n {
        let first_order = j == 0 || j == n - 1;
        phi.push(eo_interface_flux(u, &slopes, j, model, dx, q_now, first_order));
        *stats += 1;
    }
    let bottom = match model.bc.0 {
        Bc::ZeroFlux => Some(q_now * u[0]),
        Bc::Dirichlet(_) => None,
        _ => {
            return Err(Error::InvalidConfig(
                "EO-MUSCL scheme expects zero-flux or Dirichlet at the bottom".into(),
            ))
        }
    };
    let top = match model.bc.1 {
        Bc::ZeroFlux => Some(q_now * u[n]),
        Bc::FeedFlux => Some(model.feed_flux.ok_or_else(|| {
            Error::InvalidConfig("feed-flux boundary without a feed value".into())
        })?),
        Bc::Dirichlet(_) => None,
        _ => {
            return Err(Error::InvalidConfig(
                "EO-MUSCL scheme expects zero-flux, feed-flux or Dirichlet at the top".into(),
            ))
        }
    };
    let mut rhs = vec![T::zero(); n + 1];
    for j in 1..n {
        rhs[j] = -(phi[j] - phi[j - 1]) / dx;
    }
    match bottom {
        Some(b) => rhs[0] = -(phi[0] - b) / dx,
        None => rhs[0] = T::zero(),
    }
    match top {
        Some(tf) => rhs[n] = -(tf - phi[n - 1]) / dx,
        None => rhs[n] = T::zero(),
    }
    if model.has_source() {
        for j in 0..=n {
            rhs[j] = rhs[j] + model.source(u[j]);
        }
    }
    Ok(rhs)
}

/// As [`degenerate_rhs`] but only for the given sorted active node indices;
/// interface fluxes are evaluated once per needed interface.
pub fn degenerate_rhs_sparse<T: Real>(
    u: &[T],
    active: &[usize],
    model: &ModelProblem<T>,
    theta: T,
    dx: T,
    q_now: T,
    stats: &mut u64,
) -> Result<Vec<(usize, T)>> {
    let n = u.len() - 1;
    if !u.iter().all(|v| v.is_finite()) {
        return Err(Error::Unstable { step: 0, time: f64::NAN });
    }
    let half = T::of(0.5);
    let slope_at = |j: usize| -> T {
        if j == 0 || j == n {
            T::zero()
        } else {
            minmod3(
                theta * (u[j] - u[j - 1]) / dx,
                (u[j + 1] - u[j - 1]) * half / dx,
                theta * (u[j + 1] - u[j]) / dx,
            )
        }
    };
    // Interface j+1/2 for j in 0..n; memoized over the active sweep.
    let mut phi_cache: Vec<Option<T>> = vec![None; n];
    let mut phi = |j: usize, stats: &mut u64| -> T {
        if let Some(v) = phi_cache[j] {
            return v;
        }
        let first_order = j == 0 || j == n - 1;
        let (left, right, q_val) = if first_order {
            (u[j], u[j + 1], if q_now > T::zero() { u[j] } else { u[j + 1] })
        } else {
            let l = u[j] + half * dx * slope_at(j);
            let r = u[j + 1] - half * dx * slope_at(j + 1);
            (l, r, if q_now > T::zero() { l } else { r })
        };
        let v = q_now * q_val + model.eo_flux(left, right)
            - (model.big_a(u[j + 1]) - model.big_a(u[j])) / dx;
        phi_cache[j] = Some(v);
        *stats += 1;
        v
    };
    let mut out = Vec::with_capacity(active.len());
    for &j in active {
        let r = if j == 0 {
            match model.bc.0 {
                Bc::ZeroFlux => -(phi(0, stats) - q_now * u[0]) / dx,
                Bc::Dirichlet(_) => T::zero(),
                _ => return Err(Error::InvalidConfig("unsupported bottom boundary".into())),
            }
        } else if j == n {
            match model.bc.1 {
                Bc::ZeroFlux => -(q_now * u[n] - phi(n - 1, stats)) / dx,
                Bc::FeedFlux => {
                    let psi = model.feed_flux.ok_or_else(|| {
                        Error::InvalidConfig("feed-flux boundary without a feed value".into())
                    })?;
                    -(psi - phi(n - 1, stats)) / dx
                }
                Bc::Dirichlet(_) => T::zero(),
                _ => return Err(Error::InvalidConfig("unsupported top boundary".into())),
            }
        } else {
            -(phi(j, stats) - phi(j - 1, stats)) / dx
        };
        let r = if model.has_source() { r + model.source(u[j]) } else { r };
        out.push((j, r));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

/// Time step from the combined convection-diffusion CFL condition:
/// `dt = sigma h0 / (max|f'| + 2 max a / h0)`.
pub fn cfl_dt<T: Real>(model: &ModelProblem<T>, scheme: &SchemeConfig<T>, h0: T) -> Result<T> {
    let denom = model.max_flux_deriv + T::of(2.0) * model.max_diffusion / h0;
    if denom <= T::zero() {
        return Err(Error::InvalidParameter(
            "model has neither convection nor diffusion; CFL undefined".into(),
        ));
    }
    Ok(scheme.cfl * h0 / denom)
}

/// TVD bound for the explicit second-order scheme with central viscosity:
/// `sigma <= Re / (Re + 4)`.
pub fn tvd_cfl_bound<T: Real>(sigma: T, re: T) -> bool {
    sigma <= re / (re + T::of(4.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{burgers_inviscid, burgers_viscous, BurgersInit};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lf_split_examples() {
        let (fp, fm) = lf_split(0.5f64, 1.0, 1.0).unwrap();
        assert_eq!((fp, fm), (0.75, -0.25));
        let (fp, fm) = lf_split(0.0f64, 1.0, 0.0).unwrap();
        assert_eq!((fp, fm), (0.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let u = rng.gen::<f64>() * 4.0 - 2.0;
            let f = 0.5 * u * u;
            let (fp, fm) = lf_split(f, 2.5, u).unwrap();
            assert!((fp + fm - f).abs() < 1e-15);
        }
        assert!(lf_split(1.0f64, 0.0, 1.0).is_err());
    }

    #[test]
    fn minmod_tables() {
        assert_eq!(minmod(1.0, 2.0), 1.0);
        assert_eq!(minmod(-3.0, 2.0), 2.0);
        assert_eq!(minmod(0.7, 0.7), 0.7);
        assert_eq!(minmod3(1.0, 2.0, 3.0), 1.0);
        assert_eq!(minmod3(-1.0, -2.0, -3.0), -1.0);
        assert_eq!(minmod3(1.0, -2.0, 3.0), 0.0);
    }

    #[test]
    fn eno2_states() {
        // Constant data.
        let (l, r) = eno2_reconstruct(2.0, 2.0, 2.0, 2.0);
        assert_eq!((l, r), (2.0, 2.0));
        // Linear data ubar_i = i: interface value is the midpoint.
        let (l, r) = eno2_reconstruct(1.0, 2.0, 3.0, 4.0);
        assert_eq!((l, r), (2.5, 2.5));
    }

    #[test]
    fn muscl_slope_examples() {
        let u = [0.0, 0.0, 1.0, 0.0, 0.0];
        let s = muscl_slopes(&u, 1.0, 1.0);
        assert_eq!(s[2], 0.0); // local extremum
        let lin: Vec<f64> = (0..6).map(|j| j as f64).collect();
        let s = muscl_slopes(&lin, 1.0, 1.0);
        for v in &s[1..5] {
            assert_eq!(*v, 1.0);
        }
        let s0 = muscl_slopes(&lin, 0.0, 1.0);
        assert!(s0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn roe_flux_examples() {
        let f = |u: f64| 0.5 * u * u;
        let df = |u: f64| u;
        // Shock 1 -> 0: a = 1/2, f^R = (1/2)(1/2 + 0 - (1/2)(-1)) = 1/2.
        assert!((roe_flux(1.0, 0.0, f, df) - 0.5).abs() < 1e-15);
        assert_eq!(roe_flux(2.0, 2.0, f, df), 2.0);
        assert_eq!(roe_flux(0.0, 0.0, f, df), 0.0);
    }

    #[test]
    fn eo_flux_burgers() {
        // Bounds of the smooth model cover [-1, 1].
        let m = burgers_viscous::<f64>(1.0, BurgersInit::Smooth).unwrap();
        assert!((m.eo_flux(1.0, -1.0) - 1.0).abs() < 1e-12);
        assert!((m.eo_flux(1.0, 1.0) - 0.5).abs() < 1e-12);
        assert!((m.eo_flux(0.0, 0.0) - 0.0).abs() < 1e-15);
        // Monotone: nondecreasing in the left slot, nonincreasing in the right.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let a = rng.gen::<f64>() * 2.0 - 1.0;
            let b = rng.gen::<f64>() * 2.0 - 1.0;
            let d = 1e-4;
            assert!(m.eo_flux(a + d, b) >= m.eo_flux(a, b) - 1e-12);
            assert!(m.eo_flux(a, b + d) <= m.eo_flux(a, b) + 1e-12);
        }
    }

    #[test]
    fn stencil_select_base_and_bias() {
        // m = 1: always the interface pair.
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|x| x * x).collect();
        assert_eq!(eno_stencil_select(&xs, &vs, 4, 1), 4);
        // Symmetric quadratic data, m = 2: both extensions give equal
        // second differences; the tie breaks toward the left.
        assert_eq!(eno_stencil_select(&xs, &vs, 4, 2), 3);
        // Step: stencils never cross the jump while an alternative exists.
        let vs_step: Vec<f64> = xs.iter().map(|x| if *x < 4.5 { 0.0 } else { 1.0 }).collect();
        // Primitive-like data with a kink at 4.5.
        let prim: Vec<f64> = {
            let mut acc = 0.0;
            vs_step
                .iter()
                .map(|v| {
                    acc += v;
                    acc
                })
                .collect()
        };
        for m in [2usize, 3] {
            // Cell left of the kink: stencil stays left of index 5.
            let s = eno_stencil_select(&xs, &prim, 3, m);
            assert!(s + m <= 4 || s <= 3, "left cell stencil {s}");
            // Cell right of the kink: stencil stays right of index 4.
            let s = eno_stencil_select(&xs, &prim, 5, m);
            assert!(s >= 5, "right cell stencil {s}");
        }
    }

    #[test]
    fn lf_eno_consistency_constant_state() {
        let n = 32;
        let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
        let us = vec![0.7f64; n];
        let f = |u: f64| 0.5 * u * u;
        for m in [1usize, 2, 3] {
            let r = lf_eno_rhs(&xs, &us, &f, 1.0, m, 2.0).unwrap();
            for v in &r.interface_flux {
                assert!((v - f(0.7)).abs() < 1e-13, "m={m}: {v}");
            }
            for v in &r.rhs {
                assert!(v.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lf_eno_semidiscrete_order() {
        // Linear advection f = u on smooth periodic data: the residual
        // matches -u_x to O(h^m).
        let f = |u: f64| u;
        for m in [2usize, 3] {
            let mut errs = Vec::new();
            for n in [64usize, 128, 256] {
                let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
                let us: Vec<f64> =
                    xs.iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
                let exact: Vec<f64> = xs
                    .iter()
                    .map(|x| -std::f64::consts::PI * (std::f64::consts::PI * x).cos())
                    .collect();
                let r = lf_eno_rhs(&xs, &us, &f, 1.0, m, 2.0).unwrap();
                let err = r
                    .rhs
                    .iter()
                    .zip(&exact)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0f64, f64::max);
                errs.push(err);
            }
            let order1 = (errs[0] / errs[1]).log2();
            let order2 = (errs[1] / errs[2]).log2();
            assert!(
                order1 > m as f64 - 0.6 && order2 > m as f64 - 0.6,
                "m={m}: orders {order1:.2}, {order2:.2} (errs {errs:?})"
            );
        }
    }

    #[test]
    fn lf_eno_box_step_creates_no_new_extrema() {
        let model = burgers_inviscid::<f64>();
        let n = 256;
        let xs: Vec<f64> = (1..=n).map(|j| -1.0 + 2.0 * j as f64 / n as f64).collect();
        let us: Vec<f64> = xs.iter().map(|x| model.initial(*x)).collect();
        let dt = 0.5 * (2.0 / n as f64); // CFL 0.5 with alpha = 1
        let r = lf_eno_rhs(&xs, &us, &|u| model.flux(u), 1.0, 2, 2.0).unwrap();
        let next: Vec<f64> = us.iter().zip(&r.rhs).map(|(u, d)| u + dt * d).collect();
        let (lo, hi) = (0.0, 1.0);
        for v in &next {
            assert!(*v >= lo - 1e-12 && *v <= hi + 1e-12, "value {v}");
        }
    }

    #[test]
    fn degenerate_rhs_constant_state_is_zero() {
        let m = crate::models::sedimentation_floc_copper::<f64>();
        let n = 32;
        let u = vec![0.15f64; n + 1];
        let mut stats = 0;
        let rhs = degenerate_rhs(&u, &m, 1.0, 1.0 / n as f64, 0.0, &mut stats).unwrap();
        // Constant state with zero-flux ends: interior rows vanish, the two
        // boundary rows see the settling flux.
        for v in &rhs[1..n] {
            assert!(v.abs() < 1e-12, "{v}");
        }
        assert_eq!(stats, n as u64);
    }

    #[test]
    fn degenerate_rhs_telescopes_to_boundary_fluxes() {
        let m = crate::models::sedimentation_continuous_ict::<f64>();
        let n = 64;
        let dx = 2.0 / n as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u: Vec<f64> = (0..=n).map(|_| 0.05 + 0.2 * rng.gen::<f64>()).collect();
        let q = -5e-6;
        let mut stats = 0;
        let rhs = degenerate_rhs(&u, &m, 1.0, dx, q, &mut stats).unwrap();
        let total: f64 = rhs.iter().sum::<f64>() * dx;
        let expected = q * u[0] - m.feed_flux.unwrap();
        assert!(
            (total - expected).abs() < 1e-14,
            "sum {total} vs boundary difference {expected}"
        );
    }

    #[test]
    fn degenerate_rhs_pure_diffusion_a_harmonic() {
        // Custom pure-diffusion model with a(u) = 2u, A(u) = u^2; a profile
        // whose A values are linear in j has zero interior right-hand side.
        use crate::models::{AIntegral, Bc, BulkVelocity, Diffusion};
        use std::sync::Arc;
        let m = crate::models::ModelProblem::<f64>::assemble(
            "pure_diffusion_test",
            (0.0, 1.0),
            (Bc::ZeroFlux, Bc::ZeroFlux),
            Arc::new(|_| 0.0),
            Arc::new(|_| 0.0),
            Diffusion::Degenerate {
                u_crit: 0.0,
                coeff: Arc::new(|u: f64| 2.0 * u),
                integral: AIntegral::Closed(Arc::new(|u: f64| u * u)),
            },
            None,
            Arc::new(|_| 0.5),
            None,
            (0.0, 2.0),
            None,
            BulkVelocity::Zero,
        );
        let n = 40;
        let dx = 1.0 / n as f64;
        // A(u_j) = 1 + j dx  =>  u_j = sqrt(1 + j dx).
        let u: Vec<f64> = (0..=n).map(|j| (1.0 + j as f64 * dx).sqrt()).collect();
        let mut stats = 0;
        let rhs = degenerate_rhs(&u, &m, 1.0, dx, 0.0, &mut stats).unwrap();
        for v in &rhs[1..n] {
            assert!(v.abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn sparse_rhs_matches_dense_on_full_set() {
        let m = crate::models::sedimentation_floc_copper::<f64>();
        let n = 32;
        let dx = 1.0 / n as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u: Vec<f64> = (0..=n).map(|_| 0.1 + 0.5 * rng.gen::<f64>()).collect();
        let mut s1 = 0;
        let dense = degenerate_rhs(&u, &m, 1.0, dx, 0.0, &mut s1).unwrap();
        let all: Vec<usize> = (0..=n).collect();
        let mut s2 = 0;
        let sparse = degenerate_rhs_sparse(&u, &all, &m, 1.0, dx, 0.0, &mut s2).unwrap();
        for (j, v) in sparse {
            assert_eq!(v, dense[j]);
        }
        assert_eq!(s1, s2);
        // A small active set evaluates fewer interfaces.
        let some = vec![0usize, 5, 6, 7, n];
        let mut s3 = 0;
        degenerate_rhs_sparse(&u, &some, &m, 1.0, dx, 0.0, &mut s3).unwrap();
        assert!(s3 <= 2 * some.len() as u64);
    }

    #[test]
    fn cfl_examples() {
        let burgers = burgers_inviscid::<f64>();
        let scheme = SchemeConfig::<f64>::new(FluxKind::LfEno);
        let dt = cfl_dt(&burgers, &scheme, 2.0 / 256.0).unwrap();
        assert!((dt - 1.0 / 256.0).abs() < 1e-15);
        // Pure diffusion: dt = sigma h^2 / (2 nu).
        let rd = crate::models::reaction_diffusion::<f64>(0.8, 10.0).unwrap();
        let h = 20.0 / 512.0;
        let dt = cfl_dt(&rd, &scheme, h).unwrap();
        assert!((dt - 0.5 * h * h / 2.0).abs() < 1e-15);
    }

    #[test]
    fn tvd_bound_examples() {
        assert!(tvd_cfl_bound(0.5f64, 4.0));
        assert!((4.0f64 / (4.0 + 4.0) - 0.5).abs() < 1e-15);
        assert!(!tvd_cfl_bound(0.9f64, 4.0));
        // Re -> infinity recovers the inviscid CFL limit of 1.
        assert!(tvd_cfl_bound(0.999999f64, 1e12));
    }

    #[test]
    fn numerical_fluxes_consistent_at_equal_arguments() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let models = [
            crate::models::burgers_viscous::<f64>(10.0, BurgersInit::Smooth).unwrap(),
            crate::models::sedimentation_floc_copper::<f64>(),
            crate::models::sedimentation_continuous_ict::<f64>(),
        ];
        for m in &models {
            for _ in 0..100 {
                let u = m.bounds.0 + (m.bounds.1 - m.bounds.0) * rng.gen::<f64>();
                let f = m.flux(u);
                assert!((m.eo_flux(u, u) - f).abs() < 1e-12, "{} at {u}", m.name);
                let roe = roe_flux(u, u, |v| m.flux(v), |v| m.flux_deriv(v));
                assert!((roe - f).abs() < 1e-12);
                let alpha = m.max_flux_deriv.max(1e-9);
                let (fp, fm) = lf_split(f, alpha, u).unwrap();
                assert!((fp + fm - f).abs() < 1e-12);
            }
        }
    }
}
