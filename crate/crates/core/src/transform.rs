//! Exact multiresolution transforms for point values and cell averages,
//! interpolation-coefficient generation, and detail thresholding.
//!
//! Encoding walks fine to coarse: each level keeps the even-indexed data and
//! stores the error of predicting the odd-indexed data from the next coarser
//! level (the wavelet details). Decoding is the exact inverse. Out-of-range
//! stencil entries wrap for periodic data and fall back to shifted stencils
//! of the same order on bounded domains.

use crate::error::{Error, Result};
use crate::num::Real;
use crate::sparse::SignificanceMask;

/// Exact rational used while generating interpolation coefficients; the
/// value is rounded to floating point once, at the end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Ratio {
    n: i128,
    d: i128,
}

impl Ratio {
    fn new(n: i128, d: i128) -> Self {
        debug_assert!(d != 0);
        let g = gcd(n.unsigned_abs(), d.unsigned_abs()) as i128;
        let s = if d < 0 { -1 } else { 1 };
        Self { n: s * n / g, d: s * d / g }
    }

    fn mul(self, other: Self) -> Self {
        Self::new(self.n * other.n, self.d * other.d)
    }

    fn sub(self, other: Self) -> Self {
        Self::new(self.n * other.d - other.n * self.d, self.d * other.d)
    }

    fn to_real<T: Real>(self) -> T {
        T::of(self.n as f64 / self.d as f64)
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

fn factorial(n: usize) -> i128 {
    (1..=n as i128).product::<i128>().max(1)
}

/// Closed-form midpoint interpolation weights `beta_l`, `l = 1..=s`, for the
/// central `r = 2s` point stencil.
fn beta_rationals(s: usize) -> Vec<Ratio> {
    (1..=s)
        .map(|l| {
            let mut num = 1i128;
            let mut odd = 1i128;
            while odd <= 2 * l as i128 - 3 {
                num *= odd * odd;
                odd += 2;
            }
            num *= 2 * l as i128 - 1;
            let mut odd = 2 * l as i128 + 1;
            while odd <= 2 * s as i128 - 1 {
                num *= odd * odd;
                odd += 2;
            }
            let den = (1i128 << (2 * s - 1)) * factorial(s + l - 1) * factorial(s - l);
            let sign = if l % 2 == 1 { 1 } else { -1 };
            Ratio::new(sign * num, den)
        })
        .collect()
}

/// Cell-average weights `gamma_l = -(2 beta_l - gamma_{l-1})`, `gamma_0 = 1`.
fn gamma_rationals(s: usize) -> Vec<Ratio> {
    let beta = beta_rationals(s);
    let mut gamma = Vec::with_capacity(s - 1);
    let mut prev = Ratio::new(1, 1);
    for b in beta.iter().take(s - 1) {
        let g = prev.sub(Ratio::new(2, 1).mul(*b));
        gamma.push(g);
        prev = g;
    }
    gamma
}

/// Which quantity a transform (or representation) works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrKind {
    PointValue,
    CellAverage,
}

/// Stencil behaviour at the domain edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Data is periodic; indices wrap.
    Periodic,
    /// Bounded domain; shifted stencils of the same order near the edges.
    Bounded,
}

/// Inter-level interpolation coefficients.
#[derive(Debug, Clone)]
pub struct InterpCoefficients<T> {
    kind: MrKind,
    /// `r = 2s` for point values, `r_bar = 2s - 1` for cell averages.
    order: usize,
    s: usize,
    beta: Vec<T>,
    gamma: Vec<T>,
}

impl<T: Real> InterpCoefficients<T> {
    pub fn kind(&self) -> MrKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn beta(&self) -> &[T] {
        &self.beta
    }

    pub fn gamma(&self) -> &[T] {
        &self.gamma
    }
}

/// Central point-value interpolation coefficients for order `r in {2, 4, 6}`.
pub fn interp_coeffs<T: Real>(r: usize) -> Result<InterpCoefficients<T>> {
    if r == 0 || r % 2 != 0 || r > 6 {
        return Err(Error::UnsupportedOrder(r));
    }
    let s = r / 2;
    Ok(InterpCoefficients {
        kind: MrKind::PointValue,
        order: r,
        s,
        beta: beta_rationals(s).into_iter().map(Ratio::to_real).collect(),
        gamma: Vec::new(),
    })
}

/// Cell-average coefficients for order `r_bar in {3, 5}`, derived from the
/// point-value coefficients of order `r_bar + 1`.
pub fn cell_avg_coeffs<T: Real>(r_bar: usize) -> Result<InterpCoefficients<T>> {
    if r_bar % 2 != 1 || r_bar < 3 || r_bar > 5 {
        return Err(Error::UnsupportedOrder(r_bar));
    }
    let s = (r_bar + 1) / 2;
    Ok(InterpCoefficients {
        kind: MrKind::CellAverage,
        order: r_bar,
        s,
        beta: beta_rationals(s).into_iter().map(Ratio::to_real).collect(),
        gamma: gamma_rationals(s).into_iter().map(Ratio::to_real).collect(),
    })
}

/// Multiresolution representation: coarsest-level data plus one detail
/// vector per level (`details[k - 1]` holds level `k`, length `N_k`).
#[derive(Debug, Clone)]
pub struct MrRepresentation<T> {
    pub(crate) kind: MrKind,
    pub(crate) boundary: BoundaryMode,
    pub(crate) levels: usize,
    pub(crate) coarse: Vec<T>,
    pub(crate) details: Vec<Vec<T>>,
}

impl<T: Real> MrRepresentation<T> {
    pub fn kind(&self) -> MrKind {
        self.kind
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn coarse(&self) -> &[T] {
        &self.coarse
    }

    /// Details of level `k`, `1 <= k <= L`.
    pub fn detail(&self, k: usize) -> &[T] {
        &self.details[k - 1]
    }

    /// Total number of stored scalars (equals the fine-grid count).
    pub fn stored_len(&self) -> usize {
        self.coarse.len() + self.details.iter().map(Vec::len).sum::<usize>()
    }
}

/// Level-dependent truncation thresholds `eps_k = eps / 2^(L - k)`.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdPolicy<T> {
    pub epsilon: T,
    pub levels: usize,
}

impl<T: Real> ThresholdPolicy<T> {
    pub fn new(epsilon: T, levels: usize) -> Self {
        Self { epsilon, levels }
    }

    /// Threshold applied to the details of level `k`.
    pub fn eps_at(&self, k: usize) -> T {
        self.epsilon / T::of((1usize << (self.levels - k)) as f64)
    }
}

/// Reference tolerance for balancing perturbation and discretization error
/// in parabolic runs, `eps_R = c 2^{-(xi+1)L} / (Pe + 2^{L+2})`.
pub fn reference_tolerance<T: Real>(c: T, xi: usize, levels: usize, peclet: T) -> T {
    let num = T::of(2f64.powi(-((xi as i32 + 1) * levels as i32)));
    c * num / (peclet + T::of(2f64.powi(levels as i32 + 2)))
}

// ---------------------------------------------------------------------------
// Prediction operators
// ---------------------------------------------------------------------------

/// Lagrange weights for interpolating integer-spaced nodes `a..a+w` at
/// abscissa `t` (in node units). Used for shifted boundary stencils.
fn lagrange_weights<T: Real>(a: i64, w: usize, t: f64) -> Vec<T> {
    let mut out = Vec::with_capacity(w);
    for i in 0..w {
        let xi = (a + i as i64) as f64;
        let mut p = 1.0;
        for m in 0..w {
            if m != i {
                let xm = (a + m as i64) as f64;
                p *= (t - xm) / (xi - xm);
            }
        }
        out.push(T::of(p));
    }
    out
}

fn wrap(i: i64, n: usize) -> usize {
    i.rem_euclid(n as i64) as usize
}

/// Predicts the point value at the odd node `2j - 1` of the next finer level
/// from the level-`k` node values `w` (`w[q] = u^k_q`; periodic data omits
/// the trailing duplicate node, bounded data includes both endpoints).
pub fn predict_point<T: Real>(
    w: &[T],
    j: usize,
    coeffs: &InterpCoefficients<T>,
    boundary: BoundaryMode,
) -> T {
    let s = coeffs.s as i64;
    match boundary {
        BoundaryMode::Periodic => {
            let n = w.len();
            let mut r_eff_s = coeffs.s;
            while 2 * r_eff_s > n {
                r_eff_s -= 1;
            }
            let beta: Vec<T> = if r_eff_s == coeffs.s {
                coeffs.beta.clone()
            } else {
                beta_rationals(r_eff_s).into_iter().map(Ratio::to_real).collect()
            };
            let j = j as i64;
            let mut pred = T::zero();
            for (l, b) in beta.iter().enumerate() {
                let l = l as i64 + 1;
                // 1-based node numbers j+l-1 and j-l live at w[(q-1) mod n].
                pred = pred + *b * (w[wrap(j + l - 2, n)] + w[wrap(j - l - 1, n)]);
            }
            pred
        }
        BoundaryMode::Bounded => {
            let nk = w.len() as i64 - 1; // nodes 0..=N_k
            let w_len = (2 * s).min(nk + 1) as usize;
            let a = (j as i64 - s).clamp(0, nk + 1 - w_len as i64);
            if w_len == 2 * coeffs.s as usize && a == j as i64 - s {
                // Central stencil: use the beta form directly.
                let mut pred = T::zero();
                for (l, b) in coeffs.beta.iter().enumerate() {
                    let l = l + 1;
                    pred = pred + *b * (w[j + l - 1] + w[j - l]);
                }
                pred
            } else {
                let wt = lagrange_weights::<T>(a, w_len, j as f64 - 0.5);
                let mut pred = T::zero();
                for (i, c) in wt.iter().enumerate() {
                    pred = pred + *c * w[(a as usize) + i];
                }
                pred
            }
        }
    }
}

/// Predicts the cell average of cell `2j - 1` of the next finer level from
/// the level-`k` cell averages `w` (`w[i - 1] = ubar^k_i`, `i = 1..=N_k`).
pub fn predict_cellavg<T: Real>(
    w: &[T],
    j: usize,
    coeffs: &InterpCoefficients<T>,
    boundary: BoundaryMode,
) -> T {
    let n = w.len();
    let s = coeffs.s;
    let fits = j >= s && j + s - 1 <= n;
    match boundary {
        BoundaryMode::Periodic => {
            let mut delta = T::zero();
            let j = j as i64;
            let mut s_eff = s;
            while 2 * s_eff - 1 > n {
                s_eff -= 1;
            }
            let gamma: Vec<T> = if s_eff == s {
                coeffs.gamma.clone()
            } else {
                gamma_rationals(s_eff).into_iter().map(Ratio::to_real).collect()
            };
            for (l, g) in gamma.iter().enumerate() {
                let l = l as i64 + 1;
                delta = delta + *g * (w[wrap(j + l - 1, n)] - w[wrap(j - l - 1, n)]);
            }
            w[wrap(j - 1, n)] + delta
        }
        BoundaryMode::Bounded if fits => {
            let mut delta = T::zero();
            for (l, g) in coeffs.gamma.iter().enumerate() {
                let l = l + 1;
                delta = delta + *g * (w[j + l - 1] - w[j - l - 1]);
            }
            w[j - 1] + delta
        }
        BoundaryMode::Bounded => {
            // Shifted stencil through the primitive: interpolate the local
            // cumulative sums at the midpoint node j - 1/2.
            let r = 2 * s;
            let w_len = r.min(n + 1);
            let a = (j as i64 - s as i64).clamp(0, (n + 1 - w_len) as i64) as usize;
            // U'_q relative to node a: U'_a = 0, U'_q = sum of cells a+1..=q.
            let mut prim = Vec::with_capacity(w_len);
            let mut acc = T::zero();
            prim.push(acc);
            for q in 1..w_len {
                acc = acc + w[a + q - 1];
                prim.push(acc);
            }
            let wt = lagrange_weights::<T>(a as i64, w_len, j as f64 - 0.5);
            let mut interp = T::zero();
            for (i, c) in wt.iter().enumerate() {
                interp = interp + *c * prim[i];
            }
            let u_prev = prim[j - 1 - a]; // U'_{j-1}
            T::of(2.0) * (interp - u_prev)
        }
    }
}

// ---------------------------------------------------------------------------
// Encode / decode
// ---------------------------------------------------------------------------

fn check_point_len<T>(u0: &[T], levels: usize, boundary: BoundaryMode) -> Result<usize> {
    let n0 = match boundary {
        BoundaryMode::Periodic => u0.len(),
        BoundaryMode::Bounded => u0.len().saturating_sub(1),
    };
    if n0 < 2 || !n0.is_power_of_two() || n0 >> levels < 1 || levels == 0 {
        return Err(Error::LengthMismatch { expected: 1 << levels.max(1), got: u0.len() });
    }
    Ok(n0)
}

/// Point-value encoding: `u0` holds the fine node values (length `N_0` for
/// periodic data, `N_0 + 1` for bounded data).
pub fn encode_point<T: Real>(
    u0: &[T],
    coeffs: &InterpCoefficients<T>,
    levels: usize,
    boundary: BoundaryMode,
) -> Result<MrRepresentation<T>> {
    encode_point_counted(u0, coeffs, levels, boundary).map(|(rep, _)| rep)
}

/// As [`encode_point`], also returning the number of prediction evaluations.
pub fn encode_point_counted<T: Real>(
    u0: &[T],
    coeffs: &InterpCoefficients<T>,
    levels: usize,
    boundary: BoundaryMode,
) -> Result<(MrRepresentation<T>, u64)> {
    let n0 = check_point_len(u0, levels, boundary)?;
    let mut ops = 0u64;
    let mut w = u0.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _k in 1..=levels {
        let nk = match boundary {
            BoundaryMode::Periodic => w.len() / 2,
            BoundaryMode::Bounded => (w.len() - 1) / 2,
        };
        let coarse: Vec<T> = match boundary {
            BoundaryMode::Periodic => (1..=nk).map(|j| w[2 * j - 1]).collect(),
            BoundaryMode::Bounded => (0..=nk).map(|j| w[2 * j]).collect(),
        };
        let mut d = Vec::with_capacity(nk);
        for j in 1..=nk {
            let pred = predict_point(&coarse, j, coeffs, boundary);
            ops += 1;
            let actual = match boundary {
                BoundaryMode::Periodic => w[2 * j - 2],
                BoundaryMode::Bounded => w[2 * j - 1],
            };
            d.push(actual - pred);
        }
        details.push(d);
        w = coarse;
    }
    let _ = n0;
    Ok((
        MrRepresentation {
            kind: MrKind::PointValue,
            boundary,
            levels,
            coarse: w,
            details,
        },
        ops,
    ))
}

/// Exact inverse of [`encode_point`].
pub fn decode_point<T: Real>(
    rep: &MrRepresentation<T>,
    coeffs: &InterpCoefficients<T>,
) -> Result<Vec<T>> {
    decode_point_counted(rep, coeffs).map(|(u, _)| u)
}

pub fn decode_point_counted<T: Real>(
    rep: &MrRepresentation<T>,
    coeffs: &InterpCoefficients<T>,
) -> Result<(Vec<T>, u64)> {
    if rep.kind != MrKind::PointValue {
        return Err(Error::HierarchyMismatch);
    }
    let mut ops = 0u64;
    let mut w = rep.coarse.clone();
    for k in (1..=rep.levels).rev() {
        let d = &rep.details[k - 1];
        let nk = d.len();
        let mut fine = match rep.boundary {
            BoundaryMode::Periodic => vec![T::zero(); 2 * nk],
            BoundaryMode::Bounded => vec![T::zero(); 2 * nk + 1],
        };
        match rep.boundary {
            BoundaryMode::Periodic => {
                if w.len() != nk {
                    return Err(Error::LengthMismatch { expected: nk, got: w.len() });
                }
                for j in 1..=nk {
                    fine[2 * j - 1] = w[j - 1];
                    fine[2 * j - 2] = predict_point(&w, j, coeffs, rep.boundary) + d[j - 1];
                    ops += 1;
                }
            }
            BoundaryMode::Bounded => {
                if w.len() != nk + 1 {
                    return Err(Error::LengthMismatch { expected: nk + 1, got: w.len() });
                }
                for j in 0..=nk {
                    fine[2 * j] = w[j];
                }
                for j in 1..=nk {
                    fine[2 * j - 1] = predict_point(&w, j, coeffs, rep.boundary) + d[j - 1];
                    ops += 1;
                }
            }
        }
        w = fine;
    }
    Ok((w, ops))
}

/// Cell-average encoding: `u0` holds the `N_0` fine cell averages.
pub fn encode_cellavg<T: Real>(
    u0: &[T],
    coeffs: &InterpCoefficients<T>,
    levels: usize,
    boundary: BoundaryMode,
) -> Result<MrRepresentation<T>> {
    encode_cellavg_counted(u0, coeffs, levels, boundary).map(|(rep, _)| rep)
}

pub fn encode_cellavg_counted<T: Real>(
    u0: &[T],
    coeffs: &InterpCoefficients<T>,
    levels: usize,
    boundary: BoundaryMode,
) -> Result<(MrRepresentation<T>, u64)> {
    let n0 = u0.len();
    if n0 < 2 || !n0.is_power_of_two() || n0 >> levels < 1 || levels == 0 {
        return Err(Error::LengthMismatch { expected: 1 << levels.max(1), got: n0 });
    }
    let half = T::of(0.5);
    let mut ops = 0u64;
    let mut w = u0.to_vec();
    let mut details = Vec::with_capacity(levels);
    for _k in 1..=levels {
        let nk = w.len() / 2;
        let coarse: Vec<T> = (1..=nk).map(|j| half * (w[2 * j - 2] + w[2 * j - 1])).collect();
        let mut d = Vec::with_capacity(nk);
        for j in 1..=nk {
            let pred = predict_cellavg(&coarse, j, coeffs, boundary);
            ops += 1;
            d.push(w[2 * j - 2] - pred);
        }
        details.push(d);
        w = coarse;
    }
    Ok((
        MrRepresentation {
            kind: MrKind::CellAverage,
            boundary,
            levels,
            coarse: w,
            details,
        },
        ops,
    ))
}

/// Exact inverse of [`encode_cellavg`].
pub fn decode_cellavg<T: Real>(
    rep: &MrRepresentation<T>,
    coeffs: &InterpCoefficients<T>,
) -> Result<Vec<T>> {
    decode_cellavg_counted(rep, coeffs).map(|(u, _)| u)
}

pub fn decode_cellavg_counted<T: Real>(
    rep: &MrRepresentation<T>,
    coeffs: &InterpCoefficients<T>,
) -> Result<(Vec<T>, u64)> {
    if rep.kind != MrKind::CellAverage {
        return Err(Error::HierarchyMismatch);
    }
    let two = T::of(2.0);
    let mut ops = 0u64;
    let mut w = rep.coarse.clone();
    for k in (1..=rep.levels).rev() {
        let d = &rep.details[k - 1];
        let nk = d.len();
        if w.len() != nk {
            return Err(Error::LengthMismatch { expected: nk, got: w.len() });
        }
        let mut fine = vec![T::zero(); 2 * nk];
        for j in 1..=nk {
            let pred = predict_cellavg(&w, j, coeffs, rep.boundary);
            ops += 1;
            let odd = pred + d[j - 1];
            fine[2 * j - 2] = odd;
            fine[2 * j - 1] = two * w[j - 1] - odd;
        }
        w = fine;
    }
    Ok((w, ops))
}

/// Zeroes every detail with `|d| <= eps_k` (inclusive) and reports the
/// surviving positions. Coarse values are untouched.
pub fn truncate<T: Real>(
    rep: &MrRepresentation<T>,
    policy: &ThresholdPolicy<T>,
) -> (MrRepresentation<T>, SignificanceMask) {
    let mut out = rep.clone();
    let mut mask = SignificanceMask::new(
        rep.levels,
        rep.details.iter().map(Vec::len).collect(),
    );
    for k in 1..=rep.levels {
        let eps = policy.eps_at(k);
        for (j0, d) in out.details[k - 1].iter_mut().enumerate() {
            if d.abs() <= eps {
                *d = T::zero();
            } else {
                mask.insert(k, j0 + 1);
            }
        }
    }
    (out, mask)
}

/// Per-level maximum detail magnitude of smooth cell-average data; feeds the
/// regularity property tests.
pub fn detail_decay_probe<T: Real>(
    u0: &[T],
    coeffs: &InterpCoefficients<T>,
    levels: usize,
    boundary: BoundaryMode,
) -> Result<Vec<T>> {
    let rep = encode_cellavg(u0, coeffs, levels, boundary)?;
    Ok((1..=levels)
        .map(|k| {
            rep.detail(k)
                .iter()
                .fold(T::zero(), |m, d| m.max(d.abs()))
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    const EPS10: f64 = 10.0 * f64::EPSILON;

    #[test]
    fn beta_matches_printed_tables() {
        let c2 = interp_coeffs::<f64>(2).unwrap();
        assert_eq!(c2.beta(), &[0.5]);
        let c4 = interp_coeffs::<f64>(4).unwrap();
        assert_eq!(c4.beta(), &[9.0 / 16.0, -1.0 / 16.0]);
        assert!(interp_coeffs::<f64>(3).is_err());
        assert!(interp_coeffs::<f64>(8).is_err());
    }

    #[test]
    fn gamma_matches_printed_tables() {
        let c3 = cell_avg_coeffs::<f64>(3).unwrap();
        assert_eq!(c3.gamma(), &[-1.0 / 8.0]);
        let c5 = cell_avg_coeffs::<f64>(5).unwrap();
        assert_eq!(c5.gamma(), &[-22.0 / 128.0, 3.0 / 128.0]);
        // Recurrence spot check: gamma_1 = -(2 * 9/16 - 1) = -1/8.
        assert_eq!(-(2.0 * 9.0 / 16.0 - 1.0), -1.0 / 8.0);
        assert!(cell_avg_coeffs::<f64>(4).is_err());
        assert!(cell_avg_coeffs::<f64>(7).is_err());
    }

    #[test]
    fn beta_r6_against_lagrange_midpoint_oracle() {
        // Brute-force Lagrange evaluation at the midpoint of a symmetric
        // 6-node stencil; the paired weights must equal beta.
        let c6 = interp_coeffs::<f64>(6).unwrap();
        let nodes: Vec<f64> = (-2..=3).map(|i| i as f64).collect();
        let t = 0.5;
        let mut weights = [0.0; 6];
        for (i, xi) in nodes.iter().enumerate() {
            let mut p = 1.0;
            for (m, xm) in nodes.iter().enumerate() {
                if m != i {
                    p *= (t - xm) / (xi - xm);
                }
            }
            weights[i] = p;
        }
        for l in 1..=3usize {
            // beta_l multiplies u_{j+l-1} + u_{j-l}; node offsets l and 1-l.
            let wl = weights[(l as i64 + 2) as usize];
            let wr = weights[(1 - l as i64 + 2) as usize];
            assert!((wl - c6.beta()[l - 1]).abs() < 1e-15);
            assert!((wr - c6.beta()[l - 1]).abs() < 1e-15);
        }
    }

    #[test]
    fn quadratic_details_are_minus_h_squared() {
        // u(x) = x^2 sampled with spacing h, r = 2: every detail equals
        // x^2 - ((x-h)^2 + (x+h)^2) / 2 = -h^2.
        let c2 = interp_coeffs::<f64>(2).unwrap();
        let n0 = 16usize;
        let h = 0.25;
        let u: Vec<f64> = (0..=n0).map(|j| (j as f64 * h).powi(2)).collect();
        let rep = encode_point(&u, &c2, 2, BoundaryMode::Bounded).unwrap();
        // Interior details only; boundary stencils are shifted.
        for k in 1..=2usize {
            let hk = h * (1 << (k - 1)) as f64;
            let d = rep.detail(k);
            for j in 2..d.len() {
                assert!(
                    (d[j - 1] + hk * hk).abs() < 1e-12,
                    "level {k} detail {j}: {}",
                    d[j - 1]
                );
            }
        }
    }

    #[test]
    fn cubic_reproduced_by_r4() {
        let c4 = interp_coeffs::<f64>(4).unwrap();
        let n0 = 64usize;
        let u: Vec<f64> = (0..n0)
            .map(|j| {
                let x = j as f64 / n0 as f64;
                2.0 * x * x * x - x * x + 0.5 * x - 0.25
            })
            .collect();
        // Periodic wrap would break the polynomial; use bounded data.
        let ub: Vec<f64> = (0..=n0)
            .map(|j| {
                let x = j as f64 / n0 as f64;
                2.0 * x * x * x - x * x + 0.5 * x - 0.25
            })
            .collect();
        let rep = encode_point(&ub, &c4, 4, BoundaryMode::Bounded).unwrap();
        for k in 1..=4usize {
            for d in rep.detail(k) {
                assert!(d.abs() < EPS10, "cubic detail {d}");
            }
        }
        let _ = u;
    }

    #[test]
    fn constant_details_vanish_exactly() {
        let c4 = interp_coeffs::<f64>(4).unwrap();
        let u = vec![3.25_f64; 64];
        let rep = encode_point(&u, &c4, 3, BoundaryMode::Periodic).unwrap();
        for k in 1..=3usize {
            assert!(rep.detail(k).iter().all(|d| *d == 0.0));
        }
        let c3 = cell_avg_coeffs::<f64>(3).unwrap();
        let repc = encode_cellavg(&u, &c3, 3, BoundaryMode::Bounded).unwrap();
        for k in 1..=3usize {
            assert!(repc.detail(k).iter().all(|d| *d == 0.0));
        }
        let back = decode_cellavg(&repc, &c3).unwrap();
        assert!(back.iter().all(|v| *v == 3.25));
    }

    #[test]
    fn roundtrip_100_random_vectors_all_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let u: Vec<f64> = (0..256).map(|_| rng.gen::<f64>()).collect();
            let ub: Vec<f64> = (0..=256).map(|_| rng.gen::<f64>()).collect();
            for r in [2usize, 4, 6] {
                let c = interp_coeffs::<f64>(r).unwrap();
                for (data, mode) in [
                    (&u, BoundaryMode::Periodic),
                    (&ub, BoundaryMode::Bounded),
                ] {
                    let rep = encode_point(data, &c, 5, mode).unwrap();
                    assert_eq!(rep.stored_len(), data.len());
                    let back = decode_point(&rep, &c).unwrap();
                    for (a, b) in data.iter().zip(&back) {
                        assert!((a - b).abs() < EPS10, "r={r} {a} vs {b}");
                    }
                }
            }
            for rb in [3usize, 5] {
                let c = cell_avg_coeffs::<f64>(rb).unwrap();
                for mode in [BoundaryMode::Periodic, BoundaryMode::Bounded] {
                    let rep = encode_cellavg(&u, &c, 5, mode).unwrap();
                    assert_eq!(rep.stored_len(), u.len());
                    let back = decode_cellavg(&rep, &c).unwrap();
                    for (a, b) in u.iter().zip(&back) {
                        assert!((a - b).abs() < EPS10, "rb={rb} {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn parent_consistency_all_levels() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u: Vec<f64> = (0..128).map(|_| rng.gen::<f64>()).collect();
        let c3 = cell_avg_coeffs::<f64>(3).unwrap();
        // Recompute the level values and check the averaging relation.
        let mut w = u.clone();
        let rep = encode_cellavg(&u, &c3, 4, BoundaryMode::Periodic).unwrap();
        for k in 1..=4usize {
            let coarse: Vec<f64> = (0..w.len() / 2)
                .map(|j| 0.5 * (w[2 * j] + w[2 * j + 1]))
                .collect();
            for (j, c) in coarse.iter().enumerate() {
                assert_eq!(*c, 0.5 * (w[2 * j] + w[2 * j + 1]));
            }
            w = coarse;
            if k == 4 {
                assert_eq!(w, rep.coarse);
            }
        }
    }

    #[test]
    fn zero_details_refine_by_interpolation() {
        let c4 = interp_coeffs::<f64>(4).unwrap();
        let u: Vec<f64> = (0..64)
            .map(|j| (std::f64::consts::PI * j as f64 / 32.0).sin())
            .collect();
        let mut rep = encode_point(&u, &c4, 3, BoundaryMode::Periodic).unwrap();
        for d in rep.details.iter_mut() {
            d.iter_mut().for_each(|v| *v = 0.0);
        }
        let smooth = decode_point(&rep, &c4).unwrap();
        // Detail at one position only: the outputs differ on a bounded set.
        rep.details[2][5] = 1.0;
        let bumped = decode_point(&rep, &c4).unwrap();
        let changed = smooth
            .iter()
            .zip(&bumped)
            .filter(|(a, b)| (*a - *b).abs() > 0.0)
            .count();
        assert!(changed > 0);
        // One level-3 detail influences at most the width of the decode
        // stencil cascade, far fewer than all nodes.
        assert!(changed < u.len() / 2, "changed {changed}");
    }

    #[test]
    fn truncate_is_inclusive_and_eps_zero_keeps_nonzero() {
        let levels = 3;
        let policy = ThresholdPolicy::new(0.1, levels);
        // eps_k = 0.1 / 2^(L-k): level 3 -> 0.1, level 1 -> 0.025.
        assert_eq!(policy.eps_at(levels), 0.1);
        assert!((policy.eps_at(1) - 0.025f64).abs() < 1e-18);
        let c2 = interp_coeffs::<f64>(2).unwrap();
        let u: Vec<f64> = (0..32).map(|j| ((j * j) % 17) as f64 / 17.0).collect();
        let rep = encode_point(&u, &c2, levels, BoundaryMode::Periodic).unwrap();
        let (tr, mask) = truncate(&rep, &policy);
        for k in 1..=levels {
            let eps = policy.eps_at(k);
            for (j0, (d, t)) in rep.detail(k).iter().zip(tr.detail(k)).enumerate() {
                if d.abs() <= eps {
                    assert_eq!(*t, 0.0);
                    assert!(!mask.contains(k, j0 + 1));
                } else {
                    assert_eq!(*t, *d);
                    assert!(mask.contains(k, j0 + 1));
                }
            }
        }
        // A detail exactly at the threshold is dropped.
        let mut rep2 = rep.clone();
        rep2.details[levels - 1][0] = policy.eps_at(levels);
        let (tr2, mask2) = truncate(&rep2, &policy);
        assert_eq!(tr2.detail(levels)[0], 0.0);
        assert!(!mask2.contains(levels, 1));
        // eps = 0 keeps every nonzero detail and decode is unchanged.
        let zero = ThresholdPolicy::new(0.0, levels);
        let (tr0, mask0) = truncate(&rep, &zero);
        assert_eq!(
            mask0.count(),
            rep.details.iter().flatten().filter(|d| **d != 0.0).count()
        );
        let a = decode_point(&tr0, &c2).unwrap();
        let b = decode_point(&rep, &c2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn threshold_error_scales_linearly() {
        // |decode(truncate(encode(u))) - u| <= C * eps with C <= 10 for
        // u = sin(pi x), measured across four decades of eps.
        let n0 = 256usize;
        let c4 = interp_coeffs::<f64>(4).unwrap();
        let u: Vec<f64> = (1..=n0)
            .map(|j| (std::f64::consts::PI * (-1.0 + 2.0 * j as f64 / n0 as f64)).sin())
            .collect();
        let rep = encode_point(&u, &c4, 7, BoundaryMode::Periodic).unwrap();
        for eps in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
            let (tr, _) = truncate(&rep, &ThresholdPolicy::new(eps, 7));
            let back = decode_point(&tr, &c4).unwrap();
            let err = u
                .iter()
                .zip(&back)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(err <= 10.0 * eps, "eps={eps} err={err}");
        }
    }

    #[test]
    fn detail_decay_sin_and_step() {
        let n0 = 256usize;
        let levels = 7usize;
        let c3 = cell_avg_coeffs::<f64>(3).unwrap();
        let pi = std::f64::consts::PI;
        let h = 2.0 / n0 as f64;
        // Exact cell averages of sin(pi x) on [-1, 1].
        let ubar: Vec<f64> = (0..n0)
            .map(|i| {
                let x0 = -1.0 + i as f64 * h;
                let x1 = x0 + h;
                ((pi * x0).cos() - (pi * x1).cos()) / (pi * h)
            })
            .collect();
        let maxd = detail_decay_probe(&ubar, &c3, levels, BoundaryMode::Periodic).unwrap();
        // Theorem: |d^{k-1}| ~ 2^{-rbar} |d^k| with rbar = 3 away from the
        // coarse levels where the asymptotics break down.
        for k in 1..=3usize {
            let ratio = maxd[k - 1] / maxd[k];
            assert!(
                (0.125 / 1.5..=0.125 * 1.5).contains(&ratio),
                "level pair ({k},{}) ratio {ratio}",
                k + 1
            );
        }
        // Step with the jump on a shared node: near-jump details stay O([u]).
        let step: Vec<f64> = (0..n0).map(|i| if i < n0 / 2 { 1.0 } else { 0.0 }).collect();
        let maxs = detail_decay_probe(&step, &c3, levels, BoundaryMode::Periodic).unwrap();
        for k in 1..=4usize {
            let ratio = maxs[k - 1] / maxs[k];
            assert!((0.5..=2.0).contains(&ratio), "step ratio {ratio}");
        }
        // Linear data: point-value details vanish for r >= 2.
        let lin: Vec<f64> = (0..=64).map(|j| 0.5 * j as f64 - 3.0).collect();
        let c2 = interp_coeffs::<f64>(2).unwrap();
        let rep = encode_point(&lin, &c2, 3, BoundaryMode::Bounded).unwrap();
        for k in 1..=3usize {
            for d in rep.detail(k) {
                assert!(d.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cellavg_details_equal_primitive_point_details() {
        // d_j^k(ubar^0) = D_j^k(U^0) / h_{k-1} with U the discrete primitive.
        let n0 = 64usize;
        let h0 = 1.0 / n0 as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ubar: Vec<f64> = (0..n0).map(|_| rng.gen::<f64>()).collect();
        // U on nodes 0..=N0, U_0 = 0.
        let mut prim = vec![0.0f64];
        for v in &ubar {
            prim.push(prim.last().unwrap() + h0 * v);
        }
        let c3 = cell_avg_coeffs::<f64>(3).unwrap();
        let c4 = interp_coeffs::<f64>(4).unwrap();
        let repc = encode_cellavg(&ubar, &c3, 4, BoundaryMode::Bounded).unwrap();
        let repp = encode_point(&prim, &c4, 4, BoundaryMode::Bounded).unwrap();
        for k in 1..=4usize {
            let hk1 = h0 * (1 << (k - 1)) as f64;
            for (d, dd) in repc.detail(k).iter().zip(repp.detail(k)) {
                assert!(
                    (d - dd / hk1).abs() < 1e-10,
                    "k={k}: {d} vs {}",
                    dd / hk1
                );
            }
        }
    }

    #[test]
    fn encode_decode_touch_each_entry_o1_times() {
        let c4 = interp_coeffs::<f64>(4).unwrap();
        let u: Vec<f64> = (0..1024).map(|j| (j as f64).sin()).collect();
        let (rep, ops_enc) = encode_point_counted(&u, &c4, 8, BoundaryMode::Periodic).unwrap();
        let (_, ops_dec) = decode_point_counted(&rep, &c4).unwrap();
        assert!(ops_enc <= 3 * u.len() as u64, "{ops_enc}");
        assert!(ops_dec <= 3 * u.len() as u64, "{ops_dec}");
        let c3 = cell_avg_coeffs::<f64>(3).unwrap();
        let (repc, ops) = encode_cellavg_counted(&u, &c3, 8, BoundaryMode::Bounded).unwrap();
        let (_, ops2) = decode_cellavg_counted(&repc, &c3).unwrap();
        assert!(ops <= 3 * u.len() as u64 && ops2 <= 3 * u.len() as u64);
    }

    #[test]
    fn length_mismatch_rejected() {
        let c2 = interp_coeffs::<f64>(2).unwrap();
        let u = vec![0.0f64; 100]; // not a power of two
        assert!(encode_point(&u, &c2, 3, BoundaryMode::Periodic).is_err());
        assert!(encode_cellavg(&u, &cell_avg_coeffs::<f64>(3).unwrap(), 3, BoundaryMode::Periodic).is_err());
    }

    #[test]
    fn f32_instantiation_roundtrip() {
        let c2 = interp_coeffs::<f32>(2).unwrap();
        let u: Vec<f32> = (0..64).map(|j| (j as f32 * 0.37).sin()).collect();
        let rep = encode_point(&u, &c2, 3, BoundaryMode::Periodic).unwrap();
        let back = decode_point(&rep, &c2).unwrap();
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() < 10.0 * f32::EPSILON);
        }
    }
}
