//! The exponent controlling `P{T_m ≤ T}` for the `T_k` recursion and its
//! asymptotic dominance by `−(βλpm/4) log m`.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::numerics::ln_binomial;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    pub t_end: f64,
    pub p: f64,
    pub beta: f64,
    pub eta: f64,
    pub a1: f64,
    pub a2: f64,
    /// The generic constant `C`, treated as one user parameter.
    pub c: f64,
}

/// Open interval `(A₁ ∨ 4A₂, 1 − 2/p)` of admissible η, if non-empty.
pub fn eta_window(a1: f64, a2: f64, p: f64) -> Option<(f64, f64)> {
    let lo = a1.max(4.0 * a2);
    let hi = 1.0 - 2.0 / p;
    (hi > lo).then_some((lo, hi))
}

impl TailBoundParams {
    pub fn new(t_end: f64, p: f64, beta: f64, eta: f64, a1: f64, a2: f64, c: f64) -> Result<Self> {
        let params = Self {
            t_end,
            p,
            beta,
            eta,
            a1,
            a2,
            c,
        };
        params.validate()?;
        Ok(params)
    }

    /// Takes the smallest integer `p ≥ p_requested` whose η-window is
    /// non-empty and puts η at the window midpoint.
    pub fn lifted(t_end: f64, p_requested: f64, beta: f64, a1: f64, a2: f64, c: f64) -> Result<Self> {
        if !(a1 > 0.0 && a1 < 1.0 && a2 >= 0.0 && 4.0 * a2 < 1.0) {
            return Err(invalid("A1/A2", format!("need 0 < A1 < 1 and 0 <= 4A2 < 1, got {a1}, {a2}")));
        }
        let mut p = p_requested.max(2.0).ceil();
        let (lo, hi) = loop {
            if let Some(w) = eta_window(a1, a2, p) {
                break w;
            }
            p += 1.0;
        };
        Self::new(t_end, p, beta, 0.5 * (lo + hi), a1, a2, c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(invalid("T", format!("must be > 0, got {}", self.t_end)));
        }
        if !(self.p >= 2.0) {
            return Err(invalid("p", format!("must be >= 2, got {}", self.p)));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(invalid("beta", format!("must lie in (0, 1/2), got {}", self.beta)));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid("C", format!("must be > 0, got {}", self.c)));
        }
        match eta_window(self.a1, self.a2, self.p) {
            Some((lo, hi)) if self.eta > lo && self.eta < hi => Ok(()),
            Some((lo, hi)) => Err(invalid("eta", format!("must lie in ({lo}, {hi}), got {}", self.eta))),
            None => Err(invalid(
                "lambda",
                format!("empty eta window for A1={}, A2={}, p={}; lambda <= 0", self.a1, self.a2, self.p),
            )),
        }
    }

    /// `λ = η − (A₁ ∨ 4A₂)`.
    pub fn lambda(&self) -> f64 {
        self.eta - self.a1.max(4.0 * self.a2)
    }

    /// `m^{A₁} + p² m^{4A₂}`, the growth of `H` at level `m`.
    pub fn default_h(&self, m: f64) -> f64 {
        m.powf(self.a1) + self.p * self.p * m.powf(4.0 * self.a2)
    }

    /// `−(βλpm/4) log m`.
    pub fn dominating_term(&self, m: f64) -> f64 {
        -self.beta * self.lambda() * self.p * m / 4.0 * m.ln()
    }
}

/// The full exponent at level `m`, with `C · H_of_m(m) · T/m` as the
/// growth term.
pub fn tail_exponent(params: &TailBoundParams, m: f64, h_of_m: &dyn Fn(f64) -> f64) -> f64 {
    let TailBoundParams {
        t_end,
        p,
        beta,
        eta,
        a1,
        a2,
        c,
    } = *params;
    let ln_m = m.ln();
    let branch = (a1 * ln_m).max((p * p).ln() + 4.0 * a2 * ln_m);
    (2.0 * m + 1.0) * LN_2 - 0.5 * (PI * m).ln()
        + m * p * c.ln()
        + m * p * beta / 2.0 * ((1.0 + a1 + 4.0 * a2) * LN_2 + 2.0 * c.ln() + branch)
        + c * h_of_m(m) * t_end / m
        + beta * eta * p * m / 2.0 * t_end.ln()
        - beta * eta * p * m / 2.0 * ln_m
}

/// `(exponent − dominating term) / m` as a function of `s = ln m`, for the
/// default `H`. Negative means dominated. Stays finite for huge `m`.
fn scaled_excess(params: &TailBoundParams, s: f64) -> f64 {
    let TailBoundParams {
        t_end,
        p,
        beta,
        eta,
        a1,
        a2,
        c,
    } = *params;
    let inv_m = (-s).exp();
    let branch = (a1 * s).max((p * p).ln() + 4.0 * a2 * s);
    (2.0 + inv_m) * LN_2 - 0.5 * (PI.ln() + s) * inv_m
        + p * c.ln()
        + p * beta / 2.0 * ((1.0 + a1 + 4.0 * a2) * LN_2 + 2.0 * c.ln() + branch)
        + c * t_end * (((a1 - 2.0) * s).exp() + p * p * ((4.0 * a2 - 2.0) * s).exp())
        + beta * eta * p / 2.0 * t_end.ln()
        - beta * eta * p / 2.0 * s
        + beta * params.lambda() * p / 4.0 * s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub m: u64,
    pub exponent: f64,
    pub dominating_term: f64,
    /// True from `m*` on.
    pub m_star_flag: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailTable {
    pub params: TailBoundParams,
    pub rows: Vec<TailRow>,
    /// Smallest tabulated `m` from which every tabulated row is dominated.
    pub m_star: Option<u64>,
    /// `ln m` where domination sets in for good, searched beyond the table
    /// (default `H` only); `None` if not found below `ln m = 10⁶`.
    pub crossover_ln_m: Option<f64>,
}

/// Tabulates `m = 1..=m_max` and locates `m*`.
pub fn tabulate_tail(params: &TailBoundParams, m_max: u64, h_of_m: Option<&dyn Fn(f64) -> f64>) -> Result<TailTable> {
    params.validate()?;
    if m_max == 0 {
        return Err(invalid("m_max", "must be >= 1"));
    }
    let default = |m: f64| params.default_h(m);
    let h = h_of_m.unwrap_or(&default);
    let mut rows: Vec<TailRow> = (1..=m_max)
        .map(|m| {
            let mf = m as f64;
            TailRow {
                m,
                exponent: tail_exponent(params, mf, h),
                dominating_term: params.dominating_term(mf),
                m_star_flag: false,
            }
        })
        .collect();
    let mut m_star = None;
    for row in rows.iter_mut().rev() {
        if row.exponent <= row.dominating_term {
            row.m_star_flag = true;
            m_star = Some(row.m);
        } else {
            break;
        }
    }
    let crossover_ln_m = if h_of_m.is_some() {
        None
    } else {
        extended_crossover(params)
    };
    Ok(TailTable {
        params: *params,
        rows,
        m_star,
        crossover_ln_m,
    })
}

/// Scans `s = ln m` geometrically up to `10⁶` for the point after which the
/// scaled excess stays negative (it is eventually affine in `s`).
fn extended_crossover(params: &TailBoundParams) -> Option<f64> {
    const S_MAX: f64 = 1e6;
    let mut s: f64 = 0.0;
    let mut last_positive = 0.0;
    let mut found = None;
    while s <= S_MAX {
        if scaled_excess(params, s) > 0.0 {
            last_positive = s;
            found = None;
        } else if found.is_none() {
            found = Some(s);
        }
        s = (s * 1.001).max(s + 1e-3);
    }
    // refine the last sign change by bisection
    let mut hi = found?;
    let mut lo = last_positive;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if scaled_excess(params, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(hi)
}

/// `C(2m, m) ≤ 2^{2m+1}/√(πm)`, returned as `(binomial, bound, holds)` on the
/// log scale for large `m`.
pub fn stirling_check(m: u64) -> (f64, f64, bool) {
    let lhs = ln_binomial(2 * m, m);
    let rhs = (2.0 * m as f64 + 1.0) * LN_2 - 0.5 * (PI * m as f64).ln();
    (lhs.exp(), rhs.exp(), lhs <= rhs)
}
