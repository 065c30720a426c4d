//! Catalog of model problems: fluxes and their derivatives, diffusion laws
//! with integrated coefficients, sources, boundary conditions, initial data
//! and exact solutions where available.
//!
//! Sedimentation parameters are SI: fluxes in m/s, diffusion in m^2/s,
//! density difference in kg/m^3, column height in m, time in s.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::num::Real;

type Fn1<T> = Arc<dyn Fn(T) -> T + Send + Sync>;
type Fn2<T> = Arc<dyn Fn(T, T) -> T + Send + Sync>;

/// Boundary condition on one domain side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bc<T> {
    Periodic,
    Dirichlet(T),
    /// Total flux `f - dA/dx = 0` (bulk transport `q u` may still cross).
    ZeroFlux,
    /// Prescribed total flux `q u - dA/dx = psi` (vessel feed).
    FeedFlux,
    NeumannZero,
}

/// Bulk velocity `q(t) <= 0` of the mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BulkVelocity<T> {
    Zero,
    /// `q` switches from 0 to the given value once the bottom concentration
    /// reaches `threshold` (vessel opens for discharge).
    SwitchAtBottomConcentration { q: T, threshold: T },
}

/// Diffusion term of the conservation law.
#[derive(Clone)]
pub enum Diffusion<T> {
    None,
    /// Constant viscosity `nu`; `A(u) = nu u`.
    Constant(T),
    /// Strongly degenerate coefficient: zero up to `u_crit`, positive above.
    Degenerate {
        u_crit: T,
        coeff: Fn1<T>,
        integral: AIntegral<T>,
    },
}

/// Integrated diffusion `A(u) = int_0^u a`.
#[derive(Clone)]
pub enum AIntegral<T> {
    Closed(Fn1<T>),
    Table(MonotoneTable<T>),
}

/// Monotone cubic (Fritsch-Carlson) interpolant of a cumulative integral on
/// a uniform node table.
#[derive(Debug, Clone)]
pub struct MonotoneTable<T> {
    lo: T,
    hi: T,
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> MonotoneTable<T> {
    /// Tabulates `int_lo^u f` on `n + 1` uniform nodes with per-segment
    /// adaptive Gauss quadrature.
    pub fn cumulative(f: impl Fn(T) -> T, lo: T, hi: T, n: usize) -> Self {
        let h = (hi - lo) / T::of(n as f64);
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = T::zero();
        values.push(acc);
        for i in 0..n {
            let a = lo + T::of(i as f64) * h;
            acc = acc + gauss_adaptive(&f, a, a + h, 0);
            values.push(acc);
        }
        // Fritsch-Carlson limited slopes keep the interpolant monotone.
        let mut slopes = vec![T::zero(); n + 1];
        let deltas: Vec<T> = (0..n).map(|i| (values[i + 1] - values[i]) / h).collect();
        slopes[0] = deltas[0];
        slopes[n] = deltas[n - 1];
        for i in 1..n {
            let (d0, d1) = (deltas[i - 1], deltas[i]);
            slopes[i] = if d0 * d1 <= T::zero() {
                T::zero()
            } else {
                let w1 = T::of(2.0) * h + h;
                let w2 = h + T::of(2.0) * h;
                (w1 + w2) / (w1 / d0 + w2 / d1)
            };
        }
        Self { lo, hi, values, slopes }
    }

    pub fn eval(&self, u: T) -> T {
        let n = self.values.len() - 1;
        if u <= self.lo {
            return self.values[0];
        }
        if u >= self.hi {
            return self.values[n];
        }
        let h = (self.hi - self.lo) / T::of(n as f64);
        let pos = ((u - self.lo) / h).to_f64().unwrap().floor() as usize;
        let i = pos.min(n - 1);
        let x0 = self.lo + T::of(i as f64) * h;
        let t = (u - x0) / h;
        let (v0, v1, m0, m1) = (self.values[i], self.values[i + 1], self.slopes[i], self.slopes[i + 1]);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = T::of(2.0) * t3 - T::of(3.0) * t2 + T::one();
        let h10 = t3 - T::of(2.0) * t2 + t;
        let h01 = T::of(-2.0) * t3 + T::of(3.0) * t2;
        let h11 = t3 - t2;
        h00 * v0 + h10 * h * m0 + h01 * v1 + h11 * h * m1
    }
}

fn gauss_node_sum<T: Real>(f: &impl Fn(T) -> T, a: T, b: T) -> T {
    // 8-point Gauss-Legendre on [a, b].
    const X: [f64; 4] = [
        0.1834346424956498,
        0.5255324099163290,
        0.7966664774136267,
        0.9602898564975363,
    ];
    const W: [f64; 4] = [
        0.3626837833783620,
        0.3137066458778873,
        0.2223810344533745,
        0.1012285362903763,
    ];
    let half = (b - a) * T::of(0.5);
    let mid = (a + b) * T::of(0.5);
    let mut s = T::zero();
    for i in 0..4 {
        let dx = half * T::of(X[i]);
        s = s + T::of(W[i]) * (f(mid + dx) + f(mid - dx));
    }
    s * half
}

fn gauss_adaptive<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, depth: usize) -> T {
    let whole = gauss_node_sum(f, a, b);
    if depth >= 12 {
        return whole;
    }
    let mid = (a + b) * T::of(0.5);
    let split = gauss_node_sum(f, a, mid) + gauss_node_sum(f, mid, b);
    if (whole - split).abs() <= T::of(1e-14) * (T::one() + split.abs()) {
        split
    } else {
        gauss_adaptive(f, a, mid, depth + 1) + gauss_adaptive(f, mid, b, depth + 1)
    }
}

/// Engquist-Osher splitting data: `f+` collects the increasing runs of `f`,
/// `f-` the decreasing ones, assembled from the monotonicity breakpoints.
#[derive(Clone)]
pub struct EoSplit<T> {
    breaks: Vec<T>,
    flux: Fn1<T>,
}

impl<T: Real> EoSplit<T> {
    fn new(flux: Fn1<T>, deriv: &Fn1<T>, lo: T, hi: T) -> Self {
        let lo = lo.min(T::zero());
        let hi = hi.max(T::zero());
        let mut breaks = critical_points(deriv, lo, hi);
        breaks.insert(0, lo);
        breaks.push(hi);
        breaks.dedup_by(|a, b| (*a - *b).abs() < T::of(1e-13));
        Self { breaks, flux }
    }

    /// `f(0) + int_0^u max(f'(s), 0) ds`.
    pub fn positive_part(&self, u: T) -> T {
        (self.flux)(T::zero()) + self.directed_integral(u, true)
    }

    /// `int_0^u min(f'(s), 0) ds`.
    pub fn negative_part(&self, u: T) -> T {
        self.directed_integral(u, false)
    }

    fn directed_integral(&self, u: T, positive: bool) -> T {
        let (a, b, sign) = if u >= T::zero() {
            (T::zero(), u, T::one())
        } else {
            (u, T::zero(), -T::one())
        };
        let mut total = T::zero();
        let m = self.breaks.len();
        for i in 0..m - 1 {
            let seg_lo = self.breaks[i].max(a);
            let seg_hi = self.breaks[i + 1].min(b);
            if seg_hi <= seg_lo {
                continue;
            }
            let gain = (self.flux)(seg_hi) - (self.flux)(seg_lo);
            let kept = if positive { gain.max(T::zero()) } else { gain.min(T::zero()) };
            total = total + kept;
        }
        sign * total
    }
}

/// Sign-change scan of `f'` with bisection refinement.
fn critical_points<T: Real>(deriv: &Fn1<T>, lo: T, hi: T) -> Vec<T> {
    let n = 4096;
    let h = (hi - lo) / T::of(n as f64);
    let mut out = Vec::new();
    let mut prev = deriv(lo);
    for i in 1..=n {
        let x = lo + T::of(i as f64) * h;
        let cur = deriv(x);
        if prev == T::zero() || prev * cur < T::zero() {
            let (mut a, mut b) = (x - h, x);
            for _ in 0..100 {
                let mid = (a + b) * T::of(0.5);
                if deriv(a) * deriv(mid) <= T::zero() {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            out.push((a + b) * T::of(0.5));
        }
        prev = cur;
    }
    out
}

/// A model problem in the form `u_t + (q(t) u + f(u))_x = (A(u))_xx + S(u)`.
#[derive(Clone)]
pub struct ModelProblem<T: Real> {
    pub name: &'static str,
    pub domain: (T, T),
    pub bc: (Bc<T>, Bc<T>),
    pub diffusion: Diffusion<T>,
    pub bounds: (T, T),
    /// Constant feed flux `psi` for vessels with a feed boundary.
    pub feed_flux: Option<T>,
    pub bulk: BulkVelocity<T>,
    /// `max |f'|` over the solution bounds.
    pub max_flux_deriv: T,
    /// `max a(u)` over the solution bounds (0 without diffusion).
    pub max_diffusion: T,
    flux: Fn1<T>,
    flux_deriv: Fn1<T>,
    source: Option<Fn1<T>>,
    initial: Fn1<T>,
    exact: Option<Fn2<T>>,
    eo: EoSplit<T>,
}

impl<T: Real> ModelProblem<T> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        name: &'static str,
        domain: (T, T),
        bc: (Bc<T>, Bc<T>),
        flux: Fn1<T>,
        flux_deriv: Fn1<T>,
        diffusion: Diffusion<T>,
        source: Option<Fn1<T>>,
        initial: Fn1<T>,
        exact: Option<Fn2<T>>,
        bounds: (T, T),
        feed_flux: Option<T>,
        bulk: BulkVelocity<T>,
    ) -> Self {
        let eo = EoSplit::new(flux.clone(), &flux_deriv, bounds.0, bounds.1);
        let max_flux_deriv = max_abs_over(&*flux_deriv, bounds.0, bounds.1);
        let max_diffusion = match &diffusion {
            Diffusion::None => T::zero(),
            Diffusion::Constant(nu) => *nu,
            Diffusion::Degenerate { u_crit, coeff, .. } => {
                max_abs_over(&**coeff, *u_crit + T::of(1e-12), bounds.1)
            }
        };
        Self {
            name,
            domain,
            bc,
            diffusion,
            bounds,
            feed_flux,
            bulk,
            max_flux_deriv,
            max_diffusion,
            flux,
            flux_deriv,
            source,
            initial,
            exact,
            eo,
        }
    }

    pub fn flux(&self, u: T) -> T {
        (self.flux)(u)
    }

    pub fn flux_deriv(&self, u: T) -> T {
        (self.flux_deriv)(u)
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    pub fn source(&self, u: T) -> T {
        self.source.as_ref().map_or(T::zero(), |s| s(u))
    }

    pub fn initial(&self, x: T) -> T {
        (self.initial)(x)
    }

    pub fn exact(&self, x: T, t: T) -> Option<T> {
        self.exact.as_ref().map(|e| e(x, t))
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Diffusion coefficient `a(u) >= 0`.
    pub fn a(&self, u: T) -> T {
        match &self.diffusion {
            Diffusion::None => T::zero(),
            Diffusion::Constant(nu) => *nu,
            Diffusion::Degenerate { u_crit, coeff, .. } => {
                if u <= *u_crit {
                    T::zero()
                } else {
                    coeff(u)
                }
            }
        }
    }

    /// Integrated diffusion `A(u)`.
    pub fn big_a(&self, u: T) -> T {
        match &self.diffusion {
            Diffusion::None => T::zero(),
            Diffusion::Constant(nu) => *nu * u,
            Diffusion::Degenerate { u_crit, integral, .. } => {
                if u <= *u_crit {
                    T::zero()
                } else {
                    match integral {
                        AIntegral::Closed(f) => f(u),
                        AIntegral::Table(t) => t.eval(u),
                    }
                }
            }
        }
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self.bc.0, Bc::Periodic)
    }

    pub fn eo_split(&self) -> &EoSplit<T> {
        &self.eo
    }

    /// Engquist-Osher numerical flux `f+(a) + f-(b)`.
    pub fn eo_flux(&self, left: T, right: T) -> T {
        self.eo.positive_part(left) + self.eo.negative_part(right)
    }

    /// Samples the initial condition at the given points.
    pub fn sample_initial(&self, xs: &[T]) -> Vec<T> {
        xs.iter().map(|x| self.initial(*x)).collect()
    }
}

fn max_abs_over<T: Real>(f: &(impl Fn(T) -> T + ?Sized), lo: T, hi: T) -> T {
    if hi <= lo {
        return T::zero();
    }
    let n = 4096;
    let h = (hi - lo) / T::of(n as f64);
    let mut m = T::zero();
    for i in 0..=n {
        m = m.max(f(lo + T::of(i as f64) * h).abs());
    }
    m
}

fn erfc<T: Real>(x: T) -> T {
    T::of(libm::erfc(x.as_f64()))
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

/// Inviscid Burgers with the 2-periodic box initial condition on [-1, 1].
pub fn burgers_inviscid<T: Real>() -> ModelProblem<T> {
    let half = T::of(0.5);
    ModelProblem::assemble(
        "burgers_box",
        (T::of(-1.0), T::one()),
        (Bc::Periodic, Bc::Periodic),
        Arc::new(move |u: T| half * u * u),
        Arc::new(|u: T| u),
        Diffusion::None,
        None,
        Arc::new(|x: T| if x.abs() <= T::of(0.5) { T::one() } else { T::zero() }),
        None,
        (T::zero(), T::one()),
        None,
        BulkVelocity::Zero,
    )
}

/// Nondimensional linear convection-diffusion on [-1, 1] with step data and
/// the erfc exact solution.
pub fn convection_diffusion<T: Real>(pe: T) -> Result<ModelProblem<T>> {
    if pe <= T::zero() {
        return Err(Error::InvalidParameter(format!("Peclet number must be positive, got {pe}")));
    }
    let nu = T::one() / pe;
    let exact = move |x: T, t: T| {
        if t <= T::zero() {
            return if x <= T::zero() { T::one() } else { T::zero() };
        }
        T::of(0.5) * erfc((x - t) * T::of(0.5) * (pe / t).sqrt())
    };
    Ok(ModelProblem::assemble(
        "convection_diffusion",
        (T::of(-1.0), T::one()),
        (Bc::Dirichlet(T::one()), Bc::Dirichlet(T::zero())),
        Arc::new(|u: T| u),
        Arc::new(|_| T::one()),
        Diffusion::Constant(nu),
        None,
        Arc::new(|x: T| if x <= T::zero() { T::one() } else { T::zero() }),
        Some(Arc::new(exact)),
        (T::zero(), T::one()),
        None,
        BulkVelocity::Zero,
    ))
}

/// Initial data selector for the viscous Burgers equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BurgersInit {
    /// `sin(pi x)`, periodic.
    Smooth,
    /// Step 1 -> 0 with Dirichlet ends and a tanh travelling-wave exact
    /// solution.
    Step,
}

/// Viscous Burgers on [-1, 1] with `nu = 1/Re`.
pub fn burgers_viscous<T: Real>(re: T, init: BurgersInit) -> Result<ModelProblem<T>> {
    if re <= T::zero() {
        return Err(Error::InvalidParameter(format!("Reynolds number must be positive, got {re}")));
    }
    let nu = T::one() / re;
    let half = T::of(0.5);
    let flux: Fn1<T> = Arc::new(move |u: T| half * u * u);
    let deriv: Fn1<T> = Arc::new(|u: T| u);
    Ok(match init {
        BurgersInit::Smooth => ModelProblem::assemble(
            "burgers_viscous_smooth",
            (T::of(-1.0), T::one()),
            (Bc::Periodic, Bc::Periodic),
            flux,
            deriv,
            Diffusion::Constant(nu),
            None,
            Arc::new(|x: T| (T::PI() * x).sin()),
            None,
            (T::of(-1.0), T::one()),
            None,
            BulkVelocity::Zero,
        ),
        BurgersInit::Step => ModelProblem::assemble(
            "burgers_viscous_step",
            (T::of(-1.0), T::one()),
            (Bc::Dirichlet(T::one()), Bc::Dirichlet(T::zero())),
            flux,
            deriv,
            Diffusion::Constant(nu),
            None,
            Arc::new(|x: T| if x <= T::zero() { T::one() } else { T::zero() }),
            Some(Arc::new(move |x: T, t: T| {
                // Travelling wave with shock speed s = 1/2 for u_L=1, u_R=0.
                half * (T::one() - ((x - half * t) * re * T::of(0.25)).tanh())
            })),
            (T::zero(), T::one()),
            None,
            BulkVelocity::Zero,
        ),
    })
}

/// Premixed-flame reaction-diffusion on [0, 20]: `u_t = u_xx + S(u)`.
pub fn reaction_diffusion<T: Real>(alpha: T, beta: T) -> Result<ModelProblem<T>> {
    if alpha <= T::zero() || beta <= T::zero() {
        return Err(Error::InvalidParameter(format!(
            "reaction parameters must be positive, got alpha={alpha}, beta={beta}"
        )));
    }
    let source = move |u: T| {
        let one = T::one();
        let w = one - u;
        let denom = alpha * w - one;
        beta * beta * T::of(0.5) * w * (beta * w / denom).exp()
    };
    Ok(ModelProblem::assemble(
        "reaction_diffusion",
        (T::zero(), T::of(20.0)),
        (Bc::NeumannZero, Bc::Dirichlet(T::zero())),
        Arc::new(|_| T::zero()),
        Arc::new(|_| T::zero()),
        Diffusion::Constant(T::one()),
        Some(Arc::new(source)),
        Arc::new(|x: T| if x <= T::one() { T::one() } else { (T::one() - x).exp() }),
        None,
        (T::zero(), T::one()),
        None,
        BulkVelocity::Zero,
    ))
}

/// Batch settling of an ideal suspension (purely hyperbolic) with the
/// Shannon quintic flux, in m/s.
pub fn sedimentation_ideal<T: Real>() -> ModelProblem<T> {
    let c = [-0.33843, 1.37672, -1.62275, -0.11264, 0.902253];
    let flux = move |u: T| {
        let mut h = T::zero();
        for k in (0..5).rev() {
            h = h * u + T::of(c[k]);
        }
        h * u * T::of(1e-2)
    };
    let deriv = move |u: T| {
        let mut h = T::zero();
        for k in (0..5).rev() {
            h = h * u + T::of((k + 1) as f64 * c[k]);
        }
        h * T::of(1e-2)
    };
    ModelProblem::assemble(
        "sedimentation_ideal",
        (T::zero(), T::one()),
        (Bc::Dirichlet(T::of(0.642)), Bc::Dirichlet(T::zero())),
        Arc::new(flux),
        Arc::new(deriv),
        Diffusion::None,
        None,
        Arc::new(|_| T::of(0.25)),
        None,
        (T::zero(), T::of(0.642)),
        None,
        BulkVelocity::Zero,
    )
}

/// Batch sedimentation-consolidation of a copper-ore suspension:
/// Richardson-Zaki flux and a power-law effective solid stress. The
/// integrated diffusion has no closed form and is tabulated.
pub fn sedimentation_floc_copper<T: Real>() -> ModelProblem<T> {
    let u_c = T::of(0.23);
    let flux = |u: T| T::of(-6.05e-4) * u * (T::one() - u).powf(T::of(12.59));
    let deriv = |u: T| {
        // d/du [v u (1-u)^C] = v (1-u)^(C-1) (1 - (C+1) u)
        T::of(-6.05e-4)
            * (T::one() - u).powf(T::of(11.59))
            * (T::one() - T::of(13.59) * u)
    };
    let a_coeff = move |u: T| {
        // a = -f sigma_e' / (drho g u) with sigma_e' = (800/u_c)(u/u_c)^7.
        T::of(4.84e-1) * u.powi(7) * (T::one() - u).powf(T::of(12.59))
            / (u_c.powi(8) * T::of(1500.0) * T::of(9.81))
    };
    let table = MonotoneTable::cumulative(
        move |u| if u <= u_c { T::zero() } else { a_coeff(u) },
        u_c,
        T::one(),
        2048,
    );
    ModelProblem::assemble(
        "sedimentation_copper",
        (T::zero(), T::one()),
        (Bc::ZeroFlux, Bc::ZeroFlux),
        Arc::new(flux),
        Arc::new(deriv),
        Diffusion::Degenerate {
            u_crit: u_c,
            coeff: Arc::new(a_coeff),
            integral: AIntegral::Table(table),
        },
        None,
        Arc::new(|_| T::of(0.15)),
        None,
        (T::zero(), T::one()),
        None,
        BulkVelocity::Zero,
    )
}

/// Closed-form integrated diffusion for a Michaels-Bolger flux with a
/// power-law stress: `A(u) = cal_A(u) - cal_A(u_c)` above `u_c`.
#[allow(clippy::too_many_arguments)]
fn power_law_a_closed<T: Real>(
    v_inf: T,
    c_exp: T,
    u_max: T,
    sigma0: T,
    n_exp: usize,
    u_c: T,
    delta_rho: T,
    gravity: T,
) -> (Fn1<T>, Fn1<T>) {
    let cal = move |u: T| {
        let mut sum = T::zero();
        let mut prod = T::one();
        let ratio = u_max / u - T::one();
        let mut ratio_pow = T::one();
        for j in 1..=n_exp {
            prod = prod * (T::of((n_exp + 1 - j) as f64) / (c_exp + T::of(j as f64)));
            ratio_pow = ratio_pow * ratio;
            sum = sum + prod * ratio_pow;
        }
        v_inf * sigma0 / (delta_rho * gravity * u_c.powi(n_exp as i32))
            * (T::one() - u / u_max).powf(c_exp)
            * u.powi(n_exp as i32)
            * sum
    };
    let a_of_u = move |u: T| {
        // a = -f sigma_e' / (drho g u), sigma_e' = sigma0 n u^(n-1) / u_c^n.
        let sig_p = sigma0 * T::of(n_exp as f64) * u.powi(n_exp as i32 - 1) / u_c.powi(n_exp as i32);
        -(v_inf * u * (T::one() - u / u_max).powf(c_exp)) * sig_p / (delta_rho * gravity * u)
    };
    (Arc::new(move |u: T| cal(u) - cal(u_c)), Arc::new(a_of_u))
}

/// Batch sedimentation of a kaolin suspension, shorter column (H = 0.16 m).
pub fn sedimentation_floc_kaolin<T: Real>() -> ModelProblem<T> {
    let (v_inf, c_exp, u_max) = (T::of(-2.7e-4), T::of(21.5), T::of(0.5));
    let (sigma0, n_exp, u_c) = (T::of(5.7), 5usize, T::of(0.07));
    let (delta_rho, gravity) = (T::of(1690.0), T::of(9.81));
    let flux = move |u: T| v_inf * u * (T::one() - u / u_max).powf(c_exp);
    let deriv = move |u: T| {
        v_inf
            * (T::one() - u / u_max).powf(c_exp - T::one())
            * (T::one() - (c_exp + T::one()) * u / u_max)
    };
    let (a_int, a_coeff) =
        power_law_a_closed(v_inf, c_exp, u_max, sigma0, n_exp, u_c, delta_rho, gravity);
    ModelProblem::assemble(
        "sedimentation_kaolin",
        (T::zero(), T::of(0.16)),
        (Bc::ZeroFlux, Bc::ZeroFlux),
        Arc::new(flux),
        Arc::new(deriv),
        Diffusion::Degenerate {
            u_crit: u_c,
            coeff: a_coeff,
            integral: AIntegral::Closed(a_int),
        },
        None,
        Arc::new(|_| T::of(0.05)),
        None,
        (T::zero(), u_max),
        None,
        BulkVelocity::Zero,
    )
}

/// Ideal continuous thickener of height 2 m: constant feed at the top,
/// discharge opens once the bottom concentration reaches 0.171.
pub fn sedimentation_continuous_ict<T: Real>() -> ModelProblem<T> {
    let (v_inf, c_exp, u_max) = (T::of(-1.98e-4), T::of(5.647), T::of(0.3));
    let (sigma0, n_exp, u_c) = (T::of(5.7), 9usize, T::of(0.1));
    let (delta_rho, gravity) = (T::of(1690.0), T::of(9.81));
    let flux = move |u: T| v_inf * u * (T::one() - u / u_max).powf(c_exp);
    let deriv = move |u: T| {
        v_inf
            * (T::one() - u / u_max).powf(c_exp - T::one())
            * (T::one() - (c_exp + T::one()) * u / u_max)
    };
    let (a_int, a_coeff) =
        power_law_a_closed(v_inf, c_exp, u_max, sigma0, n_exp, u_c, delta_rho, gravity);
    ModelProblem::assemble(
        "sedimentation_ict",
        (T::zero(), T::of(2.0)),
        (Bc::ZeroFlux, Bc::FeedFlux),
        Arc::new(flux),
        Arc::new(deriv),
        Diffusion::Degenerate {
            u_crit: u_c,
            coeff: a_coeff,
            integral: AIntegral::Closed(a_int),
        },
        None,
        Arc::new(|_| T::of(0.052)),
        None,
        (T::zero(), u_max),
        Some(T::of(-8.55e-7)),
        BulkVelocity::SwitchAtBottomConcentration { q: T::of(-5e-6), threshold: T::of(0.171) },
    )
}

/// Model names accepted by configuration files.
pub const MODEL_NAMES: [&str; 9] = [
    "burgers_box",
    "convection_diffusion",
    "burgers_viscous_smooth",
    "burgers_viscous_step",
    "reaction_diffusion",
    "sedimentation_ideal",
    "sedimentation_copper",
    "sedimentation_kaolin",
    "sedimentation_ict",
];

/// Builds a model from its name and optional parameters (`pe`, `re`,
/// `alpha`, `beta`), using the thesis defaults where omitted.
pub fn by_name<T: Real>(
    name: &str,
    pe: Option<T>,
    re: Option<T>,
    alpha: Option<T>,
    beta: Option<T>,
) -> Result<ModelProblem<T>> {
    match name {
        "burgers_box" => Ok(burgers_inviscid()),
        "convection_diffusion" => convection_diffusion(pe.unwrap_or_else(|| T::of(100.0))),
        "burgers_viscous_smooth" => {
            burgers_viscous(re.unwrap_or_else(|| T::of(1.0)), BurgersInit::Smooth)
        }
        "burgers_viscous_step" => {
            burgers_viscous(re.unwrap_or_else(|| T::of(1000.0)), BurgersInit::Step)
        }
        "reaction_diffusion" => reaction_diffusion(
            alpha.unwrap_or_else(|| T::of(0.8)),
            beta.unwrap_or_else(|| T::of(10.0)),
        ),
        "sedimentation_ideal" => Ok(sedimentation_ideal()),
        "sedimentation_copper" => Ok(sedimentation_floc_copper()),
        "sedimentation_kaolin" => Ok(sedimentation_floc_kaolin()),
        "sedimentation_ict" => Ok(sedimentation_continuous_ict()),
        other => Err(Error::InvalidConfig(format!("unknown model '{other}'"))),
    }
}
