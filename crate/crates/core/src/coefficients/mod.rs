//! Drift/diffusion pairs and their regularisations.
//!
//! Built-in near-zero profiles are exact representatives
//! `f(z) = θ z (log 1/z)^A` (optionally modulated by `sin(1/z)`), scaled by a
//! multiplier. On `[δ, ∞)` a profile continues as its tangent line at `δ`,
//! optionally plus a superlinear term switched on above `z = 1`. All
//! functions are extended to `z < 0` as odd functions, except constants.

pub mod config;
mod growth;
mod table;

use serde::{Deserialize, Serialize};

pub use growth::{uniform_gap, GrowthConstants};
pub use table::MonotoneCubic;

use crate::error::{invalid, Error, Result};
use crate::numerics::geometric_grid;
use growth::{estimate, ScanPlan};

/// What the solver needs from a coefficient pair.
pub trait Coefficients: Send + Sync {
    fn drift(&self, z: f64) -> f64;
    fn diffusion(&self, z: f64) -> f64;
}

impl<C: Coefficients + ?Sized> Coefficients for &C {
    fn drift(&self, z: f64) -> f64 {
        (**self).drift(z)
    }
    fn diffusion(&self, z: f64) -> f64 {
        (**self).diffusion(z)
    }
}

impl<C: Coefficients + ?Sized> Coefficients for Box<C> {
    fn drift(&self, z: f64) -> f64 {
        (**self).drift(z)
    }
    fn diffusion(&self, z: f64) -> f64 {
        (**self).diffusion(z)
    }
}

/// Shape of a coefficient near zero.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    /// `θ z (log 1/z)^A` on `(0, δ]`.
    PowerLog { exponent: f64, sign: f64 },
    /// `z (log 1/z)^A sin(1/z)` on `(0, δ]`.
    PowerLogSin { exponent: f64 },
    /// Monotone cubic through user samples, starting at `z = 0`.
    Table(MonotoneCubic),
    /// `a z` everywhere.
    Linear { slope: f64 },
    /// `c` everywhere, including `z < 0`.
    Constant { value: f64 },
}

impl Profile {
    pub fn exponent(&self) -> Option<f64> {
        match self {
            Profile::PowerLog { exponent, .. } | Profile::PowerLogSin { exponent } => {
                Some(*exponent)
            }
            _ => None,
        }
    }

    fn blows_up_at_zero(&self) -> bool {
        matches!(self, Profile::PowerLog { .. } | Profile::PowerLogSin { .. })
    }
}

/// Behaviour on `[δ, ∞)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// Tangent line at `δ`.
    #[default]
    LipschitzLinear,
    /// Tangent line plus `z log z` for `z > 1`.
    LogSuperlinear,
    /// Tangent line plus `z ((1 + log z)^{1/4} − 1)` for `z > 1`.
    LogQuarterSuperlinear,
}

impl Tail {
    fn extra(self, z: f64) -> f64 {
        if z <= 1.0 {
            return 0.0;
        }
        match self {
            Tail::LipschitzLinear => 0.0,
            Tail::LogSuperlinear => z * z.ln(),
            Tail::LogQuarterSuperlinear => z * ((1.0 + z.ln()).powf(0.25) - 1.0),
        }
    }

    fn extra_derivative(self, z: f64) -> f64 {
        if z <= 1.0 {
            return 0.0;
        }
        match self {
            Tail::LipschitzLinear => 0.0,
            Tail::LogSuperlinear => z.ln() + 1.0,
            Tail::LogQuarterSuperlinear => {
                let l = 1.0 + z.ln();
                l.powf(0.25) - 1.0 + 0.25 * l.powf(-0.75)
            }
        }
    }

    pub fn is_superlinear(self) -> bool {
        self != Tail::LipschitzLinear
    }
}

/// Unvalidated description of one coefficient.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSpec {
    pub profile: Profile,
    pub tail: Tail,
    pub multiplier: f64,
}

impl FunctionSpec {
    pub fn power_log(exponent: f64, sign: f64) -> Self {
        Self::from(Profile::PowerLog { exponent, sign })
    }

    pub fn power_log_sin(exponent: f64) -> Self {
        Self::from(Profile::PowerLogSin { exponent })
    }

    pub fn linear(slope: f64) -> Self {
        Self::from(Profile::Linear { slope })
    }

    pub fn constant(value: f64) -> Self {
        Self::from(Profile::Constant { value })
    }

    pub fn with_tail(mut self, tail: Tail) -> Self {
        self.tail = tail;
        self
    }

    pub fn scaled(mut self, multiplier: f64) -> Self {
        self.multiplier = multiplier;
        self
    }
}

impl From<Profile> for FunctionSpec {
    fn from(profile: Profile) -> Self {
        Self {
            profile,
            tail: Tail::LipschitzLinear,
            multiplier: 1.0,
        }
    }
}

/// A validated coefficient with its threshold `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarFn {
    spec: FunctionSpec,
    delta: f64,
    knot_value: f64,
    knot_slope: f64,
}

impl ScalarFn {
    pub fn new(spec: FunctionSpec, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid("delta", format!("must lie in (0, 1), got {delta}")));
        }
        if !spec.multiplier.is_finite() {
            return Err(invalid("multiplier", "must be finite"));
        }
        match &spec.profile {
            Profile::PowerLog { exponent, sign } => {
                check_exponent(*exponent)?;
                if *sign != 1.0 && *sign != -1.0 {
                    return Err(invalid("sign", format!("must be +1 or -1, got {sign}")));
                }
            }
            Profile::PowerLogSin { exponent } => check_exponent(*exponent)?,
            Profile::Table(t) => {
                if t.first_knot() != 0.0 {
                    return Err(invalid("table", "first abscissa must be 0"));
                }
                if t.last_knot() < delta {
                    return Err(invalid("table", "samples must cover [0, delta]"));
                }
            }
            Profile::Linear { slope } if !slope.is_finite() => {
                return Err(invalid("slope", "must be finite"));
            }
            Profile::Constant { value } if !value.is_finite() => {
                return Err(invalid("value", "must be finite"));
            }
            _ => {}
        }
        let mut f = Self {
            spec,
            delta,
            knot_value: 0.0,
            knot_slope: 0.0,
        };
        if f.spec.profile.blows_up_at_zero() {
            f.knot_value = f.near(delta);
            f.knot_slope = f.near_derivative(delta);
        }
        Ok(f)
    }

    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn profile(&self) -> &Profile {
        &self.spec.profile
    }

    pub fn tail(&self) -> Tail {
        self.spec.tail
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn exponent(&self) -> Option<f64> {
        self.spec.profile.exponent()
    }

    pub fn blows_up_at_zero(&self) -> bool {
        self.spec.profile.blows_up_at_zero()
    }

    /// Unscaled near-zero formula, `0 < z ≤ δ`.
    fn near(&self, z: f64) -> f64 {
        let l = -z.ln();
        match self.spec.profile {
            Profile::PowerLog { exponent, sign } => sign * z * l.powf(exponent),
            Profile::PowerLogSin { exponent } => z * l.powf(exponent) * (1.0 / z).sin(),
            _ => unreachable!("near() is only used for power-log profiles"),
        }
    }

    fn near_derivative(&self, z: f64) -> f64 {
        let l = -z.ln();
        match self.spec.profile {
            Profile::PowerLog { exponent: a, sign } => {
                sign * (l.powf(a) - a * l.powf(a - 1.0))
            }
            Profile::PowerLogSin { exponent: a } => {
                (l.powf(a) - a * l.powf(a - 1.0)) * (1.0 / z).sin()
                    - l.powf(a) / z * (1.0 / z).cos()
            }
            _ => unreachable!("near_derivative() is only used for power-log profiles"),
        }
    }

    fn core(&self, z: f64) -> f64 {
        match &self.spec.profile {
            Profile::PowerLog { .. } | Profile::PowerLogSin { .. } => {
                if z == 0.0 {
                    0.0
                } else if z <= self.delta {
                    self.near(z)
                } else {
                    self.knot_value + self.knot_slope * (z - self.delta)
                }
            }
            Profile::Table(t) => t.eval(z),
            Profile::Linear { slope } => slope * z,
            Profile::Constant { value } => *value,
        }
    }

    fn core_derivative(&self, z: f64) -> f64 {
        match &self.spec.profile {
            Profile::PowerLog { .. } | Profile::PowerLogSin { .. } => {
                if z <= 0.0 {
                    f64::INFINITY
                } else if z <= self.delta {
                    self.near_derivative(z)
                } else {
                    self.knot_slope
                }
            }
            Profile::Table(t) => t.derivative(z),
            Profile::Linear { slope } => *slope,
            Profile::Constant { .. } => 0.0,
        }
    }

    /// `f(z)`; NaN propagates.
    pub fn value(&self, z: f64) -> f64 {
        if z < 0.0 {
            if let Profile::Constant { value } = self.spec.profile {
                return self.spec.multiplier * value;
            }
            return -self.value(-z);
        }
        self.spec.multiplier * (self.core(z) + self.spec.tail.extra(z))
    }

    /// Analytic `f'(z)` for `z > 0` (one-sided at the knots).
    pub fn derivative(&self, z: f64) -> f64 {
        if z < 0.0 {
            if matches!(self.spec.profile, Profile::Constant { .. }) {
                return 0.0;
            }
            return self.derivative(-z);
        }
        self.spec.multiplier * (self.core_derivative(z) + self.spec.tail.extra_derivative(z))
    }

    /// Upper envelope of `|f'(z)|`. Equal to `|f'|` except for the
    /// `sin(1/z)` profile, where the oscillating factors are bounded by one.
    pub fn derivative_envelope(&self, z: f64) -> f64 {
        let z = z.abs();
        match self.spec.profile {
            Profile::PowerLogSin { exponent: a } if z > 0.0 && z <= self.delta => {
                let l = -z.ln();
                self.spec.multiplier.abs()
                    * ((l.powf(a) - a * l.powf(a - 1.0)).abs() + l.powf(a) / z)
            }
            _ => self.derivative(z).abs(),
        }
    }

    /// `lim f(z)/z` as `z → ∞` for a Lipschitz tail.
    fn asymptotic_slope(&self) -> f64 {
        let s = match &self.spec.profile {
            Profile::PowerLog { .. } | Profile::PowerLogSin { .. } => self.knot_slope,
            Profile::Table(t) => t.end_slope(),
            Profile::Linear { slope } => *slope,
            Profile::Constant { .. } => 0.0,
        };
        self.spec.multiplier * s
    }

    /// Right end of the region where `f'` is not constant (tail excluded).
    fn shape_end(&self) -> f64 {
        let table_end = match &self.spec.profile {
            Profile::Table(t) => t.last_knot(),
            _ => 0.0,
        };
        2.0 * table_end.max(1.0)
    }

    /// Certified constants of the unregularised function.
    pub fn growth_constants(&self) -> Result<GrowthConstants> {
        let plan = ScanPlan {
            value: &|z| self.value(z),
            envelope: &|z| self.derivative_envelope(z),
            delta: self.delta,
            lip_lo: self.delta,
            lip_floor: 0.0,
            hi: self.shape_end(),
            tail_slope: self.asymptotic_slope().abs(),
            unbounded_tail: self.tail().is_superlinear(),
            growth_lo: 1e-12 * self.delta,
            growth_floor: 0.0,
            blows_up_at_zero: self.blows_up_at_zero(),
        };
        estimate(&plan)
    }
}

fn check_exponent(a: f64) -> Result<()> {
    if a > 0.0 && a <= 1.0 {
        Ok(())
    } else {
        Err(invalid("exponent", format!("must lie in (0, 1], got {a}")))
    }
}

/// Points used to check the critical-case hypotheses on `(0, δ]`.
const CRITICAL_CHECK_POINTS: usize = 4096;

/// Checks that `b` keeps one sign on `(0, δ]` and that `|b(z)|/z` there never
/// falls below its value at `δ`. Returns the sign.
pub fn check_critical(b: &ScalarFn) -> Result<f64> {
    let delta = b.delta();
    let anchor = b.value(delta);
    if anchor == 0.0 || !anchor.is_finite() {
        return Err(Error::Precondition(format!(
            "b(delta) = {anchor} must be finite and non-zero"
        )));
    }
    let sign = anchor.signum();
    let anchor_ratio = anchor.abs() / delta;
    for z in geometric_grid(1e-200, delta, CRITICAL_CHECK_POINTS) {
        let v = b.value(z);
        if v * sign <= 0.0 || !v.is_finite() {
            return Err(Error::Precondition(format!(
                "b changes sign on (0, delta]: b({z:e}) = {v:e}"
            )));
        }
        if v.abs() / z < anchor_ratio * (1.0 - 1e-12) {
            return Err(Error::Precondition(format!(
                "|b(z)|/z = {:e} < |b(delta)|/delta = {anchor_ratio:e} at z = {z:e}",
                v.abs() / z
            )));
        }
    }
    Ok(sign)
}

/// A drift/diffusion pair sharing one threshold `δ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSpec {
    b: ScalarFn,
    sigma: ScalarFn,
    delta: f64,
    unsafe_hypotheses: bool,
}

/// `e^{-1}`, the default threshold.
pub const DEFAULT_DELTA: f64 = 0.36787944117144233;

impl CoefficientSpec {
    pub fn new(b: FunctionSpec, sigma: FunctionSpec, delta: f64) -> Result<Self> {
        Self::build(b, sigma, delta, false)
    }

    /// Like [`CoefficientSpec::new`] but allows diffusion exponents `≥ 1/4`.
    pub fn new_unchecked_hypotheses(
        b: FunctionSpec,
        sigma: FunctionSpec,
        delta: f64,
    ) -> Result<Self> {
        Self::build(b, sigma, delta, true)
    }

    fn build(b: FunctionSpec, sigma: FunctionSpec, delta: f64, unsafe_hypotheses: bool) -> Result<Self> {
        let b = ScalarFn::new(b, delta)?;
        let sigma = ScalarFn::new(sigma, delta)?;
        if let Some(a2) = sigma.exponent() {
            if a2 >= 0.25 && !unsafe_hypotheses {
                return Err(invalid(
                    "A2",
                    format!("must lie in (0, 1/4), got {a2}; set unsafe_hypotheses to override"),
                ));
            }
        }
        if b.exponent() == Some(1.0) {
            check_critical(&b)?;
        }
        Ok(Self {
            b,
            sigma,
            delta,
            unsafe_hypotheses,
        })
    }

    pub fn b(&self) -> &ScalarFn {
        &self.b
    }

    pub fn sigma(&self) -> &ScalarFn {
        &self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn unsafe_hypotheses(&self) -> bool {
        self.unsafe_hypotheses
    }

    pub fn eval_b(&self, z: f64) -> Result<f64> {
        check_input(z)?;
        Ok(self.b.value(z))
    }

    pub fn eval_sigma(&self, z: f64) -> Result<f64> {
        check_input(z)?;
        Ok(self.sigma.value(z))
    }

    pub fn growth_constants(&self) -> Result<(GrowthConstants, GrowthConstants)> {
        Ok((self.b.growth_constants()?, self.sigma.growth_constants()?))
    }
}

fn check_input(z: f64) -> Result<()> {
    if z.is_nan() {
        Err(invalid("z", "NaN input"))
    } else {
        Ok(())
    }
}

impl Coefficients for CoefficientSpec {
    fn drift(&self, z: f64) -> f64 {
        self.b.value(z)
    }
    fn diffusion(&self, z: f64) -> f64 {
        self.sigma.value(z)
    }
}

/// Which regularisation is applied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    /// Linear through the origin and `(ε, f(ε))` on `[0, ε]`.
    Eps { eps: f64 },
    /// Geometric interpolation of the drift with its `δ`-anchored line.
    Alpha { alpha: f64 },
    /// Freeze both coefficients above `level`.
    Truncate { level: f64 },
}

/// A coefficient pair after one of the three regularisations, with growth
/// constants computed at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularizedCoefficient {
    base: CoefficientSpec,
    mode: Mode,
    b_slope: f64,
    sigma_slope: f64,
    alpha_sign: f64,
    alpha_anchor: f64,
    b_constants: GrowthConstants,
    sigma_constants: GrowthConstants,
}

/// `b_ε(z) = (b(ε)/ε) z` for `z < ε` and `b(z)` otherwise; same for `σ`.
pub fn regularize_eps(spec: &CoefficientSpec, eps: f64) -> Result<RegularizedCoefficient> {
    if !(eps > 0.0 && eps < spec.delta()) {
        return Err(invalid(
            "eps",
            format!("must lie in (0, delta = {}), got {eps}", spec.delta()),
        ));
    }
    let mut r = RegularizedCoefficient::bare(spec, Mode::Eps { eps });
    r.b_slope = spec.b.value(eps) / eps;
    r.sigma_slope = spec.sigma.value(eps) / eps;
    r.compute_constants()
}

/// `b_(α)(z) = θ z (|b(z)|/z)^α (|b(δ)|/δ)^{1−α}` on `(0, δ)`, `b` above;
/// `σ` is unchanged.
pub fn interpolate_alpha(spec: &CoefficientSpec, alpha: f64) -> Result<RegularizedCoefficient> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    let sign = check_critical(&spec.b)?;
    let mut r = RegularizedCoefficient::bare(spec, Mode::Alpha { alpha });
    r.alpha_sign = sign;
    r.alpha_anchor = (spec.b.value(spec.delta()).abs() / spec.delta()).powf(1.0 - alpha);
    r.compute_constants()
}

/// `b^{(M)}(z) = b(z ∧ M)`, `σ^{(M)}(z) = σ(z ∧ M)`.
pub fn truncate_m(spec: &CoefficientSpec, level: f64) -> Result<RegularizedCoefficient> {
    if !(level > 1.0 && level.is_finite()) {
        return Err(invalid("M", format!("truncation level must be > 1, got {level}")));
    }
    RegularizedCoefficient::bare(spec, Mode::Truncate { level }).compute_constants()
}

impl RegularizedCoefficient {
    pub fn new(spec: &CoefficientSpec, mode: Mode) -> Result<Self> {
        match mode {
            Mode::Eps { eps } => regularize_eps(spec, eps),
            Mode::Alpha { alpha } => interpolate_alpha(spec, alpha),
            Mode::Truncate { level } => truncate_m(spec, level),
        }
    }

    fn bare(spec: &CoefficientSpec, mode: Mode) -> Self {
        let zero = GrowthConstants {
            lipschitz: 0.0,
            sup_near_zero: 0.0,
            growth: 0.0,
        };
        Self {
            base: spec.clone(),
            mode,
            b_slope: 0.0,
            sigma_slope: 0.0,
            alpha_sign: 0.0,
            alpha_anchor: 0.0,
            b_constants: zero,
            sigma_constants: zero,
        }
    }

    fn compute_constants(mut self) -> Result<Self> {
        self.b_constants = self.constants_of(&self.base.b, self.b_slope, true)?;
        self.sigma_constants = self.constants_of(&self.base.sigma, self.sigma_slope, false)?;
        Ok(self)
    }

    fn constants_of(&self, f: &ScalarFn, slope: f64, is_drift: bool) -> Result<GrowthConstants> {
        let delta = self.base.delta();
        match self.mode {
            Mode::Eps { eps } => {
                let plan = ScanPlan {
                    value: &|z| if z >= eps { f.value(z) } else { slope * z },
                    envelope: &|z| {
                        if z >= eps {
                            f.derivative_envelope(z)
                        } else {
                            slope.abs()
                        }
                    },
                    delta,
                    lip_lo: eps,
                    lip_floor: slope.abs(),
                    hi: f.shape_end(),
                    tail_slope: f.asymptotic_slope().abs(),
                    unbounded_tail: f.tail().is_superlinear(),
                    growth_lo: eps,
                    growth_floor: slope.abs(),
                    blows_up_at_zero: false,
                };
                estimate(&plan)
            }
            Mode::Alpha { .. } if is_drift => {
                let plan = ScanPlan {
                    value: &|z| self.drift(z),
                    envelope: &|z| f.derivative_envelope(z),
                    delta,
                    lip_lo: delta,
                    lip_floor: 0.0,
                    hi: f.shape_end(),
                    tail_slope: f.asymptotic_slope().abs(),
                    unbounded_tail: f.tail().is_superlinear(),
                    growth_lo: 1e-12 * delta,
                    growth_floor: 0.0,
                    blows_up_at_zero: f.blows_up_at_zero(),
                };
                estimate(&plan)
            }
            Mode::Alpha { .. } => f.growth_constants(),
            Mode::Truncate { level } => {
                let plan = ScanPlan {
                    value: &|z| f.value(z.min(level)),
                    envelope: &|z| if z <= level { f.derivative_envelope(z) } else { 0.0 },
                    delta,
                    lip_lo: delta,
                    lip_floor: 0.0,
                    hi: level.max(delta),
                    tail_slope: 0.0,
                    unbounded_tail: false,
                    growth_lo: 1e-12 * delta,
                    growth_floor: 0.0,
                    blows_up_at_zero: f.blows_up_at_zero(),
                };
                estimate(&plan)
            }
        }
    }

    pub fn base(&self) -> &CoefficientSpec {
        &self.base
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Slopes `b(ε)/ε` and `σ(ε)/ε` in ε-mode, zero otherwise.
    pub fn eps_slopes(&self) -> (f64, f64) {
        (self.b_slope, self.sigma_slope)
    }

    /// Growth constants of the regularised drift. In ε-mode `lipschitz` is
    /// the global Lipschitz constant; otherwise it is taken on `[δ, ∞)`.
    pub fn b_constants(&self) -> &GrowthConstants {
        &self.b_constants
    }

    pub fn sigma_constants(&self) -> &GrowthConstants {
        &self.sigma_constants
    }

    /// In ε-mode, `L_{b_ε} / (log 1/ε)^{A₁}` and `L_{σ_ε} / (log 1/ε)^{A₂}`
    /// for power-log profiles.
    pub fn eps_growth_ratios(&self) -> Option<(Option<f64>, Option<f64>)> {
        let Mode::Eps { eps } = self.mode else {
            return None;
        };
        let l = -eps.ln();
        let ratio = |c: &GrowthConstants, f: &ScalarFn| f.exponent().map(|a| c.lipschitz / l.powf(a));
        Some((
            ratio(&self.b_constants, &self.base.b),
            ratio(&self.sigma_constants, &self.base.sigma),
        ))
    }

    fn alpha_positive(&self, alpha: f64, z: f64) -> f64 {
        if z >= self.base.delta() || z.is_nan() {
            return self.base.b.value(z);
        }
        if z == 0.0 {
            return 0.0;
        }
        let ratio = self.base.b.value(z).abs() / z;
        self.alpha_sign * z * ratio.powf(alpha) * self.alpha_anchor
    }

    pub fn eval_b(&self, z: f64) -> Result<f64> {
        check_input(z)?;
        Ok(self.drift(z))
    }

    pub fn eval_sigma(&self, z: f64) -> Result<f64> {
        check_input(z)?;
        Ok(self.diffusion(z))
    }
}

impl Coefficients for RegularizedCoefficient {
    fn drift(&self, z: f64) -> f64 {
        match self.mode {
            Mode::Eps { eps } => {
                if z >= eps {
                    self.base.b.value(z)
                } else {
                    self.b_slope * z
                }
            }
            Mode::Alpha { alpha } => {
                if z < 0.0 {
                    -self.alpha_positive(alpha, -z)
                } else {
                    self.alpha_positive(alpha, z)
                }
            }
            Mode::Truncate { level } => {
                if z.is_nan() {
                    z
                } else {
                    self.base.b.value(z.min(level))
                }
            }
        }
    }

    fn diffusion(&self, z: f64) -> f64 {
        match self.mode {
            Mode::Eps { eps } => {
                if z >= eps {
                    self.base.sigma.value(z)
                } else {
                    self.sigma_slope * z
                }
            }
            Mode::Alpha { .. } => self.base.sigma.value(z),
            Mode::Truncate { level } => {
                if z.is_nan() {
                    z
                } else {
                    self.base.sigma.value(z.min(level))
                }
            }
        }
    }
}

/// `e^k f(e^{−k} u)` for both coefficients.
#[derive(Clone, Debug)]
pub struct Rescaled<C> {
    inner: C,
    up: f64,
    down: f64,
}

impl<C: Coefficients> Rescaled<C> {
    pub fn new(inner: C, k: f64) -> Self {
        Self {
            inner,
            up: k.exp(),
            down: (-k).exp(),
        }
    }
}

impl<C: Coefficients> Coefficients for Rescaled<C> {
    fn drift(&self, z: f64) -> f64 {
        self.up * self.inner.drift(self.down * z)
    }
    fn diffusion(&self, z: f64) -> f64 {
        self.up * self.inner.diffusion(self.down * z)
    }
}

/// Adds `slope · z` to the drift.
#[derive(Clone, Debug)]
pub struct DriftShift<C> {
    pub inner: C,
    pub slope: f64,
}

impl<C: Coefficients> Coefficients for DriftShift<C> {
    fn drift(&self, z: f64) -> f64 {
        self.inner.drift(z) + self.slope * z
    }
    fn diffusion(&self, z: f64) -> f64 {
        self.inner.diffusion(z)
    }
}

/// Drift of one pair combined with the diffusion of another.
#[derive(Clone, Debug)]
pub struct WithDrift<D, S> {
    pub drift_from: D,
    pub diffusion_from: S,
}

impl<D: Coefficients, S: Coefficients> Coefficients for WithDrift<D, S> {
    fn drift(&self, z: f64) -> f64 {
        self.drift_from.drift(z)
    }
    fn diffusion(&self, z: f64) -> f64 {
        self.diffusion_from.diffusion(z)
    }
}

#[cfg(test)]
mod tests;
