//! Constants and analytic checks of the max-choice tree.
//!
//! For `d > 2` the equation `1 - (1 - x/2)^d = x` has a unique root `x*` in
//! `(0, 1]`; `M_1(n)/n` converges to it. With `c = 1 - x*/2` the lower ranks
//! `M_k(n)`, `k >= 2`, grow like `n^alpha` with `alpha = c^(d-1) d / 2`.
//!
//! The helper `f(x, y) = (1/2) sum_{i<d} y^(d-i-1) (y - x/2)^i` links the
//! one-step increase probability to the growth rate:
//! `p_{n,k} = (M_k / n) f(M_k / n, ĉ_k(n))` when `L_k(n) = 1`.

use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive};
use rand_core::RngCore;

use crate::error::{Error, Result};
use crate::rng::bounded;

/// Largest `d` accepted by the analytic routines.
pub const MAX_THEORY_D: u32 = 64;

const BISECTION_ITERATIONS: usize = 200;

/// Derived constants for one value of `d`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TheoryParams {
    pub d: u32,
    pub x_star: f64,
    pub c: f64,
    pub alpha: f64,
}

impl TheoryParams {
    pub fn new(d: u32) -> Result<Self> {
        let x_star = solve_fixed_point(d, 1e-14)?;
        let c = 1.0 - x_star / 2.0;
        Ok(TheoryParams {
            d,
            x_star,
            c,
            alpha: c.powi(d as i32 - 1) * d as f64 / 2.0,
        })
    }

    /// The a-priori growth exponent `(c - delta)^(d-1) / 4`, a loose lower
    /// bound used only as a reference line.
    pub fn gamma_lower(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta < self.c) {
            return Err(Error::Domain(format!(
                "delta must lie in (0, {}), got {delta}",
                self.c
            )));
        }
        Ok((self.c - delta).powi(self.d as i32 - 1) / 4.0)
    }
}

fn check_d(d: u32) -> Result<()> {
    if d <= 2 {
        return Err(Error::Domain(format!(
            "d = {d}: for d <= 2 the only root of 1 - (1 - x/2)^d = x in [0, 1] is the degenerate x = 0"
        )));
    }
    if d > MAX_THEORY_D {
        return Err(Error::Domain(format!(
            "d = {d} exceeds the supported maximum {MAX_THEORY_D}"
        )));
    }
    Ok(())
}

/// `1 - (1 - x/2)^d - x`.
pub fn fixed_point_residual(x: f64, d: u32) -> f64 {
    1.0 - (1.0 - x / 2.0).powi(d as i32) - x
}

/// Root of `1 - (1 - x/2)^d = x` in `(1 - 1/d, 1)` by bisection.
///
/// The residual is positive at `1 - 1/d` and negative at `1` for every
/// `d > 2`, so the bracket always holds a sign change.
pub fn solve_fixed_point(d: u32, tol: f64) -> Result<f64> {
    check_d(d)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let mut lo = 1.0 - 1.0 / d as f64;
    let mut hi = 1.0;
    debug_assert!(fixed_point_residual(lo, d) > 0.0 && fixed_point_residual(hi, d) < 0.0);
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let r = fixed_point_residual(mid, d);
        if r.abs() <= tol && hi - lo <= tol {
            return Ok(mid);
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let x = 0.5 * (lo + hi);
    if fixed_point_residual(x, d).abs() > tol {
        return Err(Error::Domain(format!(
            "bisection did not reach tolerance {tol} for d = {d}"
        )));
    }
    Ok(x)
}

/// `c^(d-1) d / 2`.
pub fn exponent(d: u32) -> Result<f64> {
    Ok(TheoryParams::new(d)?.alpha)
}

/// `f(x, y)` in its sum form.
pub fn f_eval(x: f64, y: f64, d: u32) -> f64 {
    // Horner in z = y - x/2; the coefficient of z^i is y^(d-1-i)
    let z = y - x / 2.0;
    let mut acc = 0.0;
    let mut y_pow = 1.0;
    for _ in 0..d {
        acc = acc * z + y_pow;
        y_pow *= y;
    }
    0.5 * acc
}

/// `f(x, y)` as the difference quotient `(y^d - (y - x/2)^d) / x`, `x != 0`.
///
/// Evaluated exactly over the rationals and rounded once, so the cancellation
/// in the numerator costs nothing for small `x`.
pub fn f_quotient(x: f64, y: f64, d: u32) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Domain("difference quotient undefined at x = 0".into()));
    }
    let exact =
        |v: f64| BigRational::from_float(v).ok_or_else(|| Error::Domain(format!("{v} is not finite")));
    let (xr, yr) = (exact(x)?, exact(y)?);
    let z = &yr - &xr / BigRational::from_integer(2.into());
    let q = (yr.pow(d as i32) - z.pow(d as i32)) / xr;
    Ok(q.to_f64().unwrap_or(f64::NAN))
}

/// Evaluates `f(x, y) < 1` at `grid` evenly spaced points of `[0, 2y]`.
///
/// Only defined where `y^(d-1) < 2/d`.
pub fn check_f_below_one(y: f64, d: u32, grid: usize) -> Result<bool> {
    if d < 1 {
        return Err(Error::Domain("d must be positive".into()));
    }
    if !(y >= 0.0) || y.powi(d as i32 - 1) >= 2.0 / d as f64 {
        return Err(Error::Domain(format!(
            "y = {y} violates y^(d-1) < 2/d for d = {d}"
        )));
    }
    if grid < 2 {
        return Err(Error::Domain("grid needs at least two points".into()));
    }
    Ok((0..grid).all(|i| {
        let x = 2.0 * y * i as f64 / (grid - 1) as f64;
        f_eval(x, y, d) < 1.0
    }))
}

/// `c^(d-1) < 2/d` for the solved `c`.
pub fn check_c_bound(d: u32) -> Result<bool> {
    let p = TheoryParams::new(d)?;
    Ok(p.c.powi(d as i32 - 1) < 2.0 / d as f64)
}

/// Iterates `r_{n+1} = r_n (1 + alpha / (n + x))` from `r_k`.
///
/// Yields `(n, r_n, r_n / n^alpha)` for `n = k, k+1, ..., n_max`. The product
/// is accumulated in log space.
#[derive(Debug, Clone)]
pub struct PowerRecurrence {
    alpha: f64,
    x: f64,
    n: u64,
    n_max: u64,
    log_r: f64,
}

impl Iterator for PowerRecurrence {
    type Item = (u64, f64, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.n > self.n_max {
            return None;
        }
        let n = self.n;
        let r = self.log_r.exp();
        let ratio = (self.log_r - self.alpha * (n as f64).ln()).exp();
        self.log_r += (self.alpha / (n as f64 + self.x)).ln_1p();
        self.n += 1;
        Some((n, r, ratio))
    }
}

pub fn power_recurrence(alpha: f64, x: f64, k: u64, r_k: f64, n_max: u64) -> Result<PowerRecurrence> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
    }
    if k < 1 {
        return Err(Error::Domain("k must be positive".into()));
    }
    if !(r_k > 0.0) {
        return Err(Error::Domain(format!("r_k must be positive, got {r_k}")));
    }
    // n + x must stay positive (and non-zero) over k..n_max
    if k as f64 + x <= 0.0 {
        return Err(Error::Domain(format!(
            "n + x vanishes or is negative at n = {k}, x = {x}"
        )));
    }
    Ok(PowerRecurrence {
        alpha,
        x,
        n: k,
        n_max,
        log_r: r_k.ln(),
    })
}

/// `r_n / n^alpha` at each of `points` (ascending, each `>= k`).
pub fn power_recurrence_ratios(alpha: f64, x: f64, k: u64, r_k: f64, points: &[u64]) -> Result<Vec<f64>> {
    let n_max = points.iter().copied().max().unwrap_or(k);
    let mut want = points.iter().peekable();
    let mut out = Vec::with_capacity(points.len());
    for (n, _, ratio) in power_recurrence(alpha, x, k, r_k, n_max)? {
        while want.peek() == Some(&&n) {
            out.push(ratio);
            want.next();
        }
    }
    if out.len() != points.len() {
        return Err(Error::Domain("points must be ascending and at least k".into()));
    }
    Ok(out)
}

/// `Δ_k(n) = 2 f(M_k / n, ĉ_k)`, so that `E[M_k(n+1) / M_k(n)] = 1 + Δ_k(n) / 2n`
/// while `L_k(n) = 1` and `M_{k-1}(n) > M_k(n)`. Tends to `c^(d-1) d`.
pub fn drift_delta(m_k: u32, n: u64, d: u32, c_hat_k: f64) -> Result<f64> {
    if m_k < 1 || n < 1 {
        return Err(Error::Domain("drift needs M_k >= 1 and n >= 1".into()));
    }
    Ok(2.0 * f_eval(m_k as f64 / n as f64, c_hat_k, d))
}

/// Two-colour urn: `a` balls of the first colour, `b` of the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UrnState {
    pub a: u64,
    pub b: u64,
    pub steps: u64,
}

impl UrnState {
    pub fn new(a: u64, b: u64) -> Result<Self> {
        if a < 1 || b < 1 {
            return Err(Error::Domain(format!("urn needs a, b >= 1, got ({a}, {b})")));
        }
        Ok(UrnState { a, b, steps: 0 })
    }

    /// Draws a ball and returns it with a copy.
    #[inline]
    pub fn step<R: RngCore + ?Sized>(&mut self, rng: &mut R) {
        if bounded(rng, self.a + self.b) < self.a {
            self.a += 1;
        } else {
            self.b += 1;
        }
        self.steps += 1;
    }

    pub fn fraction(&self) -> f64 {
        self.a as f64 / (self.a + self.b) as f64
    }
}

/// Runs the urn for `steps` draws and returns the final first-colour share.
pub fn polya_urn_run<R: RngCore + ?Sized>(a: u64, b: u64, steps: u64, rng: &mut R) -> Result<f64> {
    let mut urn = UrnState::new(a, b)?;
    for _ in 0..steps {
        urn.step(rng);
    }
    Ok(urn.fraction())
}
