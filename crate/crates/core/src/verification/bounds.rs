//! Closed-form moment and increment bounds.
//!
//! Everything here is a pure function of its parameters. The exponentials
//! overflow `f64` for realistic Lipschitz constants, so the moment bound
//! is also available on the log scale.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::coefficients::GrowthConstants;
use crate::error::{invalid, Result};

/// `2^16 π²`, the noise factor in the moment exponent.
pub fn noise_factor() -> f64 {
    65536.0 * PI * PI
}

/// Exponential rate `κ = 4 L_b + 2^16 π² p² L_σ⁴`.
pub fn kappa(p: f64, l_b: f64, l_sigma: f64) -> f64 {
    4.0 * l_b + noise_factor() * p * p * l_sigma.powi(4)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// Globally Lipschitz with `b(0) = σ(0) = 0`.
    ZeroAtOrigin,
    /// Lipschitz on `[δ, ∞)` only; constants from the linear-growth bound.
    DeltaForm,
}

/// Inputs of the moment and increment bounds. In the delta form `l_b`,
/// `l_sigma` are the Lipschitz constants on `[δ, ∞)` and `c_b`, `c_sigma`
/// the suprema of `|b|`, `|σ|` on `[0, δ]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentBoundParams {
    pub p: f64,
    pub t_end: f64,
    pub l_b: f64,
    pub l_sigma: f64,
    pub c_b: f64,
    pub c_sigma: f64,
    pub u0_sup: f64,
    pub b0: f64,
    pub sigma0: f64,
}

fn nonneg(name: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be >= 0, got {v}")))
    }
}

/// `c / l`, with `0/anything = 0` and `c/0 = ∞` for `c > 0`.
fn ratio(c: f64, l: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c / l
    }
}

/// `l · x` with `0 · ∞ = 0`.
fn weighted(l: f64, x: f64) -> f64 {
    if l == 0.0 {
        0.0
    } else {
        l * x
    }
}

impl MomentBoundParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 2.0) {
            return Err(invalid("p", format!("must be >= 2, got {}", self.p)));
        }
        nonneg("T", self.t_end)?;
        nonneg("L_b", self.l_b)?;
        nonneg("L_sigma", self.l_sigma)?;
        nonneg("C_b", self.c_b)?;
        nonneg("C_sigma", self.c_sigma)?;
        nonneg("u0_sup", self.u0_sup)?;
        if self.b0.is_nan() || self.sigma0.is_nan() {
            return Err(invalid("b(0)/sigma(0)", "must not be NaN"));
        }
        Ok(())
    }

    /// Fills the delta-form constants from certified growth constants.
    pub fn from_growth(
        p: f64,
        t_end: f64,
        u0_sup: f64,
        b: &GrowthConstants,
        sigma: &GrowthConstants,
        b0: f64,
        sigma0: f64,
    ) -> Result<Self> {
        let params = Self {
            p,
            t_end,
            l_b: b.lipschitz,
            l_sigma: sigma.lipschitz,
            c_b: b.sup_near_zero,
            c_sigma: sigma.sup_near_zero,
            u0_sup,
            b0,
            sigma0,
        };
        params.validate()?;
        Ok(params)
    }

    /// `H = L_b + p² L_σ⁴`.
    pub fn h(&self) -> f64 {
        self.l_b + self.p * self.p * self.l_sigma.powi(4)
    }

    /// `‖u0‖_∞ + |b(0)|/L_b + |σ(0)|/L_σ`.
    pub fn m_const(&self) -> f64 {
        self.u0_sup + ratio(self.b0.abs(), self.l_b) + ratio(self.sigma0.abs(), self.l_sigma)
    }

    /// Same quantities with the delta-form substitutions.
    fn resolved(&self, variant: BoundVariant) -> Self {
        match variant {
            BoundVariant::ZeroAtOrigin => *self,
            BoundVariant::DeltaForm => Self {
                b0: self.c_b,
                sigma0: self.c_sigma,
                ..*self
            },
        }
    }
}

/// A bound with its logarithm, which stays finite when the value does not.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    #[serde(with = "super::lossless")]
    pub value: f64,
    #[serde(with = "super::lossless")]
    pub ln_value: f64,
    pub note: Option<String>,
}

/// Right-hand side of the sup-moment bound `sup_{t ≤ T, x} E|u(t,x)|^p ≤ …`.
pub fn moment_bound_rhs(params: &MomentBoundParams, variant: BoundVariant) -> Result<BoundValue> {
    params.validate()?;
    let p = params.p;
    let (base, mut note) = match variant {
        BoundVariant::ZeroAtOrigin => (params.u0_sup, None),
        BoundVariant::DeltaForm => {
            let base = params.u0_sup
                + ratio(params.c_b, 4.0 * params.l_b)
                + ratio(params.c_sigma, 4.0 * params.l_sigma);
            let note = (base.is_infinite())
                .then(|| "a vanishing Lipschitz constant with positive C makes the delta-form bound infinite".to_string());
            (base, note)
        }
    };
    let rate = 4.0 * params.l_b * p + noise_factor() * p.powi(3) * params.l_sigma.powi(4);
    let exponent = rate * params.t_end;
    let ln_value = p * std::f64::consts::LN_2 + p * base.ln() + exponent;
    let value = 2f64.powf(p) * base.powf(p) * exponent.exp();
    if value.is_infinite() && ln_value.is_finite() && note.is_none() {
        note = Some("value overflows f64; compare on the log scale".into());
    }
    Ok(BoundValue {
        value,
        ln_value,
        note,
    })
}

/// Generic constants of the increment bounds. `c_beta` multiplies the whole
/// bound and `c_exp` sits in `exp(c_exp H t)`; neither is quantified by the
/// theory, so they are parameters (calibrated by a pilot run when used as
/// pass criteria).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderConstants {
    pub c_beta: f64,
    pub c_exp: f64,
    /// Hölder seminorm `|u0|_γ`.
    pub u0_holder: f64,
    pub gamma: f64,
}

impl Default for HolderConstants {
    fn default() -> Self {
        Self {
            c_beta: 1.0,
            c_exp: 1.0,
            u0_holder: 0.0,
            gamma: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Increment {
    /// `|u(t,x) − u(t,x')|` with `distance = |x − x'|`.
    Space { distance: f64, t: f64 },
    /// `|u(t,x) − u(t',x)|`, `t < t' < t + 1`.
    Time { t: f64, t_prime: f64 },
}

impl Increment {
    /// `|x − x'|^β` or `(t' − t)^{β/2}`.
    pub fn offset_power(&self, beta: f64) -> f64 {
        match *self {
            Increment::Space { distance, .. } => distance.powf(beta),
            Increment::Time { t, t_prime } => (t_prime - t).powf(beta / 2.0),
        }
    }
}

fn check_beta(beta: f64, gamma: f64) -> Result<()> {
    let cap = gamma.min(0.5);
    if beta > 0.0 && beta < cap {
        Ok(())
    } else {
        Err(invalid("beta", format!("must lie in (0, {cap}), got {beta}")))
    }
}

/// The braced factor of the increment bound, i.e. the bound divided by
/// `C_β · offset_power`.
pub fn holder_bracket(
    params: &MomentBoundParams,
    consts: &HolderConstants,
    beta: f64,
    increment: Increment,
    variant: BoundVariant,
) -> Result<f64> {
    params.validate()?;
    check_beta(beta, consts.gamma)?;
    let r = params.resolved(variant);
    let (h, m) = (r.h(), r.m_const());
    let sp = r.p.sqrt();
    let (b0, s0) = (r.b0.abs(), r.sigma0.abs());
    let (t, grow_t, constant) = match increment {
        Increment::Space { distance, t } => {
            if !(distance >= 0.0) || !(t >= 0.0) {
                return Err(invalid("increment", "distance and t must be >= 0"));
            }
            (t, t, 0.0)
        }
        Increment::Time { t, t_prime } => {
            if !(t >= 0.0 && t_prime > t && t_prime - t < 1.0) {
                return Err(invalid("increment", format!("need 0 <= t < t' < t + 1, got t={t}, t'={t_prime}")));
            }
            (t, t_prime, 1.0)
        }
    };
    let growth = (consts.c_exp * h * grow_t).exp();
    let drift_part = weighted(b0, constant + t.powf(1.0 - beta / 2.0));
    let noise_part = weighted(
        sp * s0,
        constant + t.powf(0.25 - beta / 2.0) + t.powf(0.5 - beta / 2.0),
    );
    let lip_b = weighted(r.l_b, m * growth * h.powf(beta / 2.0 - 1.0));
    let lip_s = weighted(
        sp * r.l_sigma,
        m * growth * (h.powf(beta / 2.0 - 0.25) + h.powf(beta / 2.0 - 0.5)),
    );
    Ok(consts.u0_holder + drift_part + noise_part + lip_b + lip_s)
}

/// Bound on `‖u(t,x) − u(t',x')‖_p` for one increment.
pub fn holder_bound_rhs(
    params: &MomentBoundParams,
    consts: &HolderConstants,
    beta: f64,
    increment: Increment,
    variant: BoundVariant,
) -> Result<f64> {
    let bracket = holder_bracket(params, consts, beta, increment, variant)?;
    Ok(weighted(consts.c_beta * increment.offset_power(beta), bracket))
}

/// Smallest `C_β` making every pilot quotient `q_i ≤ C_β · bracket_i`,
/// times `safety`.
pub fn calibrate_c_beta(pilot: &[(f64, f64)], safety: f64) -> Result<f64> {
    if pilot.is_empty() {
        return Err(invalid("pilot", "no pilot quotients"));
    }
    let worst = pilot
        .iter()
        .map(|&(q, bracket)| q / bracket)
        .fold(0.0, f64::max);
    if !worst.is_finite() {
        return Err(invalid("pilot", "non-finite quotient/bracket ratio"));
    }
    Ok(safety * worst)
}
