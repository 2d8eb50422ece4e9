//! The Dickman-de Bruijn function rho: the unique solution of
//! u rho'(u) + rho(u-1) = 0 for u > 1 with rho = 1 on [0, 1], sampled on a
//! uniform grid, plus sigma_-(u) = u rho(u) and the friable order
//! thresholds built from it.

use crate::error::{Error, Result};

pub const DEFAULT_U_MAX: f64 = 50.0;
pub const DEFAULT_STEP: f64 = 1e-4;
/// Values below this are clamped to zero and flagged.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Series terms per unit interval. The expansions are centered, so the
/// evaluation ratio is at most (1/2)/(k+1/2) and 48 terms reach full f64
/// accuracy with a wide margin.
const SERIES_TERMS: usize = 48;

/// Sampled rho on the grid {0, step, 2*step, ..., u_max}.
///
/// The closed form (1 on [0,1], 1 - ln u on [1,2]) covers the head. Each
/// interval [k, k+1] beyond carries a power-series piece centered at
/// k + 1/2, built by the recurrence the delay equation induces on the
/// coefficients and anchored by continuity at u = k. Every piece is
/// analytic with radius k + 1/2 (the nearest true singularity is u = 0),
/// so the series converge geometrically.
///
/// Each piece is stored normalized by its center value with the scale kept
/// separately in log form. This keeps every error relative: rho decays
/// like u^(-u), and any scheme that lets rounding from the rho ~ 0.1
/// region enter later pieces additively (forward time-stepping does, and
/// so does this recurrence on raw coefficients) bottoms out near
/// eps * rho(2.5) and turns the tail into noise. Construction is exact
/// arithmetic on fixed inputs, hence bit-reproducible.
#[derive(Debug, Clone)]
pub struct DickmanTable {
    u_max: f64,
    step: f64,
    values: Vec<f64>,
    /// pieces[k - 1] covers [k, k + 1]
    pieces: Vec<Piece>,
    clamped: bool,
}

/// rho(k + 1/2 + t) = exp(log_scale) * horner(coeffs, t), t in [-1/2, 1/2],
/// with coeffs[0] = 1.
#[derive(Debug, Clone)]
struct Piece {
    log_scale: f64,
    coeffs: Vec<f64>,
}

/// Builds the table on the grid {0, step, ..., u_max}.
pub fn build_rho(u_max: f64, step: f64) -> Result<DickmanTable> {
    if u_max < 2.0 {
        return Err(Error::domain(format!("u_max must be >= 2, got {u_max}")));
    }
    if !(step > 0.0) {
        return Err(Error::domain(format!("step must be positive, got {step}")));
    }
    if step > 1e-3 {
        return Err(Error::Accuracy(format!(
            "step {step} too coarse for a faithful sample grid; use <= 1e-3"
        )));
    }
    let n = (u_max / step).round() as usize;
    let last_piece = (u_max.ceil() as usize).max(2) - 1;
    let mut pieces: Vec<Vec<f64>> = Vec::with_capacity(last_piece);

    // piece 1: rho(3/2 + t) = 1 - ln(3/2 + t) = (1 - ln(3/2)) - ln(1 + 2t/3)
    let mut first = vec![0.0f64; SERIES_TERMS + 1];
    first[0] = 1.0 - 1.5f64.ln();
    for (j, c) in first.iter_mut().enumerate().skip(1) {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        *c = sign * (2.0f64 / 3.0).powi(j as i32) / j as f64;
    }
    pieces.push(first);

    for k in 2..=last_piece {
        let c = k as f64 + 0.5;
        let b = &pieces[k - 2];
        let mut a = vec![0.0f64; SERIES_TERMS + 1];
        // (c + t) g_k'(t) = -g_{k-1}(t)  =>  c(j+1) a_{j+1} = -b_j - j a_j;
        // a_0 does not enter, so fill a_1.. first
        for j in 0..SERIES_TERMS {
            a[j + 1] = (-b[j] - j as f64 * a[j]) / (c * (j + 1) as f64);
        }
        // anchor by continuity at u = k: g_k(-1/2) = g_{k-1}(1/2)
        let tail = horner(&a, -0.5); // a[0] is still 0 here
        a[0] = horner(b, 0.5) - tail;
        pieces.push(a);
    }

    let mut clamped = false;
    let mut table = DickmanTable {
        u_max: n as f64 * step,
        step,
        values: Vec::new(),
        pieces,
        clamped: false,
    };
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut v = table.eval(i as f64 * step);
        if v < UNDERFLOW_FLOOR {
            v = 0.0;
            clamped = true;
        }
        values.push(v);
    }
    table.values = values;
    table.clamped = clamped;
    Ok(table)
}

fn horner(coeffs: &[f64], t: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * t + c;
    }
    acc
}

impl DickmanTable {
    pub fn with_defaults() -> Result<DickmanTable> {
        build_rho(DEFAULT_U_MAX, DEFAULT_STEP)
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Whether any grid value was clamped to zero below [`UNDERFLOW_FLOOR`].
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// Grid values; values[i] = rho(i * step).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, u: f64) -> f64 {
        if u <= 1.0 {
            1.0
        } else if u <= 2.0 {
            1.0 - u.ln()
        } else {
            let k = if u == u.floor() { u as usize - 1 } else { u.floor() as usize };
            let k = k.min(self.pieces.len());
            horner(&self.pieces[k - 1], u - (k as f64 + 0.5))
        }
    }

    pub fn rho(&self, u: f64) -> Result<f64> {
        if !(0.0..=self.u_max).contains(&u) {
            return Err(Error::TableRange(format!(
                "u={u} outside the table range [0, {}]",
                self.u_max
            )));
        }
        Ok(self.eval(u))
    }

    /// sigma_-(u) = u * rho(u).
    pub fn sigma_minus(&self, u: f64) -> Result<f64> {
        Ok(u * self.rho(u)?)
    }

    /// rho(u) against the lower envelope (e/(2u ln u))^u.
    pub fn rho_lower_bound_check(&self, u: f64) -> Result<RhoLowerBoundReport> {
        if u < 2.0 {
            return Err(Error::domain(format!("lower-bound check needs u >= 2, got {u}")));
        }
        let rho = self.rho(u)?;
        let lower = (std::f64::consts::E / (2.0 * u * u.ln())).powf(u);
        Ok(RhoLowerBoundReport {
            u,
            rho,
            lower_bound: lower,
            ratio: rho / lower,
        })
    }

    /// The minimal order threshold C1 / rho(C2 / (eta * delta)).
    pub fn order_threshold(&self, eta: f64, delta: f64, c1: f64, c2: f64) -> Result<f64> {
        if !(0.0 < eta && eta < 1.0 && 0.0 < delta && delta < 1.0) || c1 <= 0.0 || c2 <= 0.0 {
            return Err(Error::domain(format!(
                "order_threshold needs eta, delta in (0,1) and C1, C2 > 0; got eta={eta}, delta={delta}, C1={c1}, C2={c2}"
            )));
        }
        let u = c2 / (eta * delta);
        if u > self.u_max {
            return Err(Error::TableRange(format!(
                "C2/(eta delta) = {u} beyond the table range {}; rebuild with a larger u_max",
                self.u_max
            )));
        }
        let rho = self.rho(u)?;
        if rho <= 0.0 {
            return Err(Error::Accuracy(format!("rho({u}) underflowed; threshold diverges")));
        }
        Ok(c1 / rho)
    }

    /// Max of |u rho'(u) + rho(u-1)| over grid points in [u_lo, u_hi], with
    /// the derivative taken by central differences on the sampled grid. The
    /// second derivative of rho jumps at u = 2 (and the first at u = 1), so
    /// callers should keep the range clear of those kinks.
    pub fn max_dde_residual(&self, u_lo: f64, u_hi: f64) -> f64 {
        let mut worst = 0.0f64;
        let n = self.values.len() - 1;
        for i in 1..n {
            let u = i as f64 * self.step;
            if u < u_lo || u > u_hi || u <= 1.0 + self.step {
                continue;
            }
            let deriv = (self.values[i + 1] - self.values[i - 1]) / (2.0 * self.step);
            let delayed = self.eval(u - 1.0);
            let residual = (u * deriv + delayed).abs();
            worst = worst.max(residual);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RhoLowerBoundReport {
    pub u: f64,
    pub rho: f64,
    pub lower_bound: f64,
    pub ratio: f64,
}
