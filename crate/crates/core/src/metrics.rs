//! Run diagnostics: compression ratio, error norms, total variation,
//! conserved mass, flame speed and CPU-time speedup.

use crate::error::{Error, Result};
use crate::num::Real;

/// Per-snapshot diagnostics row.
#[derive(Debug, Clone)]
pub struct RunMetrics<T> {
    pub t: T,
    pub mu: T,
    pub e1: T,
    pub e2: T,
    pub einf: T,
    pub tv: T,
    pub mass: T,
    pub v_f: Option<T>,
    pub cpu_adaptive_s: Option<f64>,
    pub cpu_uniform_s: Option<f64>,
    pub speedup: Option<f64>,
}

impl<T: Real> RunMetrics<T> {
    pub fn empty(t: T) -> Self {
        Self {
            t,
            mu: T::one(),
            e1: T::zero(),
            e2: T::zero(),
            einf: T::zero(),
            tv: T::zero(),
            mass: T::zero(),
            v_f: None,
            cpu_adaptive_s: None,
            cpu_uniform_s: None,
            speedup: None,
        }
    }

    /// CSV header matching [`Self::csv_row`]; `with_vf` appends the flame
    /// speed column used by reaction-diffusion runs.
    pub fn csv_header(with_vf: bool) -> String {
        let mut s = "t,mu,e1,e2,einf,tv,mass".to_string();
        if with_vf {
            s.push_str(",v_f");
        }
        s.push_str(",cpu_adaptive_s,cpu_uniform_s,V");
        s
    }

    pub fn csv_row(&self, with_vf: bool) -> String {
        let mut s = format!(
            "{},{},{},{},{},{},{}",
            self.t, self.mu, self.e1, self.e2, self.einf, self.tv, self.mass
        );
        if with_vf {
            match self.v_f {
                Some(v) => s.push_str(&format!(",{v}")),
                None => s.push(','),
            }
        }
        for v in [self.cpu_adaptive_s, self.cpu_uniform_s, self.speedup] {
            match v {
                Some(v) => s.push_str(&format!(",{v}")),
                None => s.push(','),
            }
        }
        s
    }
}

/// Compression ratio `mu = N0 / (N0 / 2^L + |D|)` with `N0` the fine-grid
/// point count and `|D|` the number of significant details.
pub fn compression_ratio<T: Real>(n0_points: usize, levels: usize, significant: usize) -> T {
    let n0 = T::of(n0_points as f64);
    n0 / (n0 / T::of((1usize << levels) as f64) + T::of(significant as f64))
}

/// `(e1, e2, einf)` between two fine-grid vectors, with the `1/N0`
/// normalization inside the p-th root.
pub fn error_norms<T: Real>(u_ref: &[T], u_mr: &[T]) -> Result<(T, T, T)> {
    if u_ref.len() != u_mr.len() {
        return Err(Error::LengthMismatch { expected: u_ref.len(), got: u_mr.len() });
    }
    let n = T::of(u_ref.len() as f64);
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    let mut si = T::zero();
    for (a, b) in u_ref.iter().zip(u_mr) {
        let d = (*a - *b).abs();
        s1 = s1 + d;
        s2 = s2 + d * d;
        si = si.max(d);
    }
    Ok((s1 / n, (s2 / n).sqrt(), si))
}

/// Flame speed `v_f = integral of S(u) over the domain`, midpoint rule.
pub fn flame_speed<T: Real>(u: &[T], source: impl Fn(T) -> T, dx: T) -> T {
    u.iter().map(|v| source(*v)).sum::<T>() * dx
}

/// Total variation `sum |u_{j+1} - u_j|`.
pub fn total_variation<T: Real>(u: &[T]) -> T {
    u.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Conserved mass `sum dx * u_j`.
pub fn mass<T: Real>(u: &[T], dx: T) -> T {
    u.iter().copied().sum::<T>() * dx
}

/// CPU-time ratio `V = uniform / adaptive`.
pub fn speedup(cpu_uniform: f64, cpu_adaptive: f64) -> f64 {
    cpu_uniform / cpu_adaptive
}
