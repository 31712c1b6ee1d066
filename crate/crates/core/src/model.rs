//! Nonlinearities `f(x, s)` of the stationary problem `u'' + f(x, u^2) u = lambda u`.
//!
//! The [`Nonlinearity`] trait is the extension point: any even, bounded,
//! saturating response can be plugged in. [`Prototype`] is the shipped member
//! of the class, `f(x, s) = V(x) s^alpha / (1 + s^alpha)` with
//! `V(x) = (1 + x^2)^(-b/2)`.
//!
//! [`audit_assumptions`] turns the structural hypotheses on `f` into sampled
//! predicates and reports the worst offending sample for each one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Evaluators for a nonlinearity and its partial derivatives.
///
/// `s` is the intensity `|u|^2`. Implementations must be pure.
pub trait Nonlinearity: Send + Sync {
    fn f(&self, x: f64, s: f64) -> f64;

    /// Partial derivative in `x`.
    fn d1f(&self, x: f64, s: f64) -> f64;

    /// Partial derivative in `s`.
    fn d2f(&self, x: f64, s: f64) -> f64;

    /// `int_0^s f(x, sigma) d sigma`.
    fn antiderivative(&self, x: f64, s: f64) -> f64;

    /// `int_0^s d1f(x, sigma) d sigma`.
    fn d1_antiderivative(&self, x: f64, s: f64) -> f64 {
        integrate_intensity(|sigma| self.d1f(x, sigma), s)
    }

    /// Saturation profile `lim_{s -> inf} f(x, s)`.
    fn f_inf(&self, x: f64) -> f64;

    /// Uniform upper bound `M` with `f <= f_inf <= M`.
    fn bound(&self) -> f64;
}

const GL10_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL10_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_3,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

/// `int_0^s g` with 10-point Gauss-Legendre on dyadic panels `[s 2^-(k+1), s 2^-k]`.
///
/// The panels resolve integrands behaving like `sigma^alpha` at the origin and
/// saturating at large `sigma` to near machine precision.
pub fn integrate_intensity(g: impl Fn(f64) -> f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    const PANELS: i32 = 40;
    let mut total = 0.0;
    let mut hi = s;
    for k in 0..=PANELS {
        let lo = if k == PANELS { 0.0 } else { hi * 0.5 };
        let mid = 0.5 * (hi + lo);
        let half = 0.5 * (hi - lo);
        let mut acc = 0.0;
        for (node, w) in GL10_NODES.iter().zip(GL10_WEIGHTS) {
            acc += w * (g(mid + half * node) + g(mid - half * node));
        }
        total += half * acc;
        hi = lo;
    }
    total
}

/// Parameters `(b, alpha)` of the prototype nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrototypeParams {
    pub b: f64,
    pub alpha: f64,
}

impl Default for PrototypeParams {
    fn default() -> Self {
        Self { b: 0.5, alpha: 1.0 }
    }
}

pub const CONSTRAINT_B: &str = "(b ∈ (0,1))";
pub const CONSTRAINT_ALPHA_LOWER: &str = "(1 ≤ α)";
pub const CONSTRAINT_ALPHA_UPPER: &str = "α < 2 − b";

impl PrototypeParams {
    pub fn new(b: f64, alpha: f64) -> Self {
        Self { b, alpha }
    }

    /// Checks `0 < b < 1` and `1 <= alpha < 2 - b`, naming the first violated inequality.
    pub fn validate(&self) -> Result<()> {
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(Error::InvalidParameter {
                name: "b",
                value: self.b,
                constraint: CONSTRAINT_B,
            });
        }
        if !(self.alpha >= 1.0) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                constraint: CONSTRAINT_ALPHA_LOWER,
            });
        }
        if !(self.alpha < 2.0 - self.b) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: self.alpha,
                constraint: CONSTRAINT_ALPHA_UPPER,
            });
        }
        Ok(())
    }

    /// Exponent `p = 2 alpha + 1` of the small-amplitude power law.
    pub fn power(&self) -> f64 {
        2.0 * self.alpha + 1.0
    }

    /// Local scaling exponent `theta = (2 - b) / (p - 1)`.
    pub fn theta(&self) -> f64 {
        (2.0 - self.b) / (self.power() - 1.0)
    }
}

/// `f(x, s) = V(x) s^alpha / (1 + s^alpha)`, `V(x) = (1 + x^2)^(-b/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prototype {
    params: PrototypeParams,
}

impl Prototype {
    /// Builds the prototype after checking its parameter domain.
    pub fn new(params: PrototypeParams) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    /// Builds the prototype without validating `(b, alpha)`; used to audit
    /// parameter choices that fall outside the admissible domain.
    pub fn new_unchecked(params: PrototypeParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> PrototypeParams {
        self.params
    }

    pub fn potential(&self, x: f64) -> f64 {
        (1.0 + x * x).powf(-0.5 * self.params.b)
    }

    pub fn potential_derivative(&self, x: f64) -> f64 {
        -self.params.b * x * (1.0 + x * x).powf(-0.5 * self.params.b - 1.0)
    }

    /// `rho(x) = x V'(x) / V(x) = -b x^2 / (1 + x^2)`.
    pub fn rho(&self, x: f64) -> f64 {
        -self.params.b * x * x / (1.0 + x * x)
    }

    fn pow_alpha(&self, s: f64) -> f64 {
        if self.params.alpha == 1.0 {
            s
        } else {
            s.powf(self.params.alpha)
        }
    }

    /// Saturating factor `phi(s) = s^alpha / (1 + s^alpha)`.
    pub fn phi(&self, s: f64) -> f64 {
        let sa = self.pow_alpha(s);
        sa / (1.0 + sa)
    }

    pub fn phi_derivative(&self, s: f64) -> f64 {
        let a = self.params.alpha;
        if s <= 0.0 {
            // phi'(0) = 1 for alpha = 1 and 0 for alpha > 1.
            return if a == 1.0 { 1.0 } else { 0.0 };
        }
        let sa = self.pow_alpha(s);
        a * sa / (s * (1.0 + sa) * (1.0 + sa))
    }

    /// `Phi(s) = s phi'(s) / phi(s) = alpha / (1 + s^alpha)`.
    pub fn log_derivative(&self, s: f64) -> f64 {
        self.params.alpha / (1.0 + self.pow_alpha(s))
    }

    /// `int_0^s phi`.
    pub fn phi_antiderivative(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if self.params.alpha == 1.0 {
            s - s.ln_1p()
        } else {
            integrate_intensity(|sigma| self.phi(sigma), s)
        }
    }

    /// Closed form of [`zeta`] for the prototype: `(2 + rho(x)) / Phi(s) - 1`.
    pub fn zeta_closed_form(&self, x: f64, s: f64) -> f64 {
        (2.0 + self.rho(x)) / self.log_derivative(s) - 1.0
    }
}

impl Nonlinearity for Prototype {
    fn f(&self, x: f64, s: f64) -> f64 {
        self.potential(x) * self.phi(s)
    }

    fn d1f(&self, x: f64, s: f64) -> f64 {
        self.potential_derivative(x) * self.phi(s)
    }

    fn d2f(&self, x: f64, s: f64) -> f64 {
        self.potential(x) * self.phi_derivative(s)
    }

    fn antiderivative(&self, x: f64, s: f64) -> f64 {
        self.potential(x) * self.phi_antiderivative(s)
    }

    fn d1_antiderivative(&self, x: f64, s: f64) -> f64 {
        self.potential_derivative(x) * self.phi_antiderivative(s)
    }

    fn f_inf(&self, x: f64) -> f64 {
        self.potential(x)
    }

    fn bound(&self) -> f64 {
        1.0
    }
}

/// `f = 0`: the free equation, used as a reference for the integrators.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Zero;

impl Nonlinearity for Zero {
    fn f(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn d1f(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn d2f(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn antiderivative(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn f_inf(&self, _: f64) -> f64 {
        0.0
    }
    fn bound(&self) -> f64 {
        0.0
    }
}

/// `zeta(x, s) = (2 f + x d1f) / (d2f s) - 1`, the weight whose positivity and
/// monotonicity drive the slope argument.
pub fn zeta<M: Nonlinearity + ?Sized>(model: &M, x: f64, s: f64) -> Result<f64> {
    let d2f = model.d2f(x, s);
    if !(d2f > 0.0) {
        return Err(Error::Monotonicity { x, s, d2f });
    }
    Ok((2.0 * model.f(x, s) + x * model.d1f(x, s)) / (d2f * s) - 1.0)
}

/// `n` logarithmically spaced samples in `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Sample points for [`audit_assumptions`].
#[derive(Debug, Clone, PartialEq)]
pub struct AuditGrid {
    /// Non-negative positions; mirrored internally for the evenness check.
    pub xs: Vec<f64>,
    /// Positive intensities.
    pub ss: Vec<f64>,
}

impl Default for AuditGrid {
    fn default() -> Self {
        let mut xs = vec![0.0];
        xs.extend(logspace(1e-3, 1e3, 200));
        Self {
            xs,
            ss: logspace(1e-6, 1e6, 200),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: f64,
    pub s: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub assumption: String,
    pub passed: bool,
    pub detail: String,
    /// Sample that came closest to (or furthest beyond) violating the predicate.
    pub worst: Option<Sample>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AuditReport {
    pub records: Vec<AuditRecord>,
}

impl AuditReport {
    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn get(&self, assumption: &str) -> Option<&AuditRecord> {
        self.records.iter().find(|r| r.assumption == assumption)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditRecord> {
        self.records.iter().filter(|r| !r.passed)
    }
}

/// Tracks the sample with the smallest margin; a predicate holds iff every margin is positive.
struct Margin {
    worst: Option<(f64, Sample)>,
}

impl Margin {
    fn new() -> Self {
        Self { worst: None }
    }

    fn push(&mut self, margin: f64, sample: Sample) {
        let replace = match self.worst {
            None => true,
            Some((m, _)) => margin < m || margin.is_nan(),
        };
        if replace {
            self.worst = Some((margin, sample));
        }
    }

    fn record(self, assumption: &str, detail: &str) -> AuditRecord {
        let passed = self.worst.is_none_or(|(m, _)| m > 0.0);
        AuditRecord {
            assumption: assumption.to_string(),
            passed,
            detail: detail.to_string(),
            worst: self.worst.map(|(_, s)| s),
        }
    }
}

/// Relative tolerance for checks that hold with equality in exact arithmetic.
const EQ_TOL: f64 = 1e-12;

/// Evaluates the structural assumptions on `model` over `grid`.
///
/// Limits at `s -> 0`, `s -> inf` and `|x| -> inf` are probed at the extreme
/// samples; (A6) equicontinuity is audited as boundedness of both partials.
pub fn audit_assumptions<M: Nonlinearity + ?Sized>(model: &M, grid: &AuditGrid) -> AuditReport {
    let big_m = model.bound();
    let s_min = grid.ss.iter().copied().fold(f64::INFINITY, f64::min);
    let s_max = grid.ss.iter().copied().fold(0.0, f64::max);
    let x_max = grid.xs.iter().copied().fold(0.0, f64::max);
    let positive_x: Vec<f64> = grid.xs.iter().copied().filter(|&x| x > 0.0).collect();
    let mut records = Vec::new();

    // (A0): f(x, 0) = 0, f -> 0 as s -> 0 and as |x| -> inf.
    let mut a0 = Margin::new();
    let sup_at_origin = grid.ss.iter().map(|&s| model.f(0.0, s)).fold(0.0, f64::max);
    for &x in &grid.xs {
        for x in [x, -x] {
            let v = model.f(x, 0.0);
            a0.push(-v.abs() + EQ_TOL * big_m, Sample { x, s: 0.0, value: v });
            let v = model.f(x, s_min);
            a0.push(1e-3 * big_m - v.abs(), Sample { x, s: s_min, value: v });
        }
    }
    for &s in &grid.ss {
        let v = model.f(x_max, s);
        a0.push(0.1 * sup_at_origin - v, Sample { x: x_max, s, value: v });
    }
    records.push(a0.record(
        "A0",
        "f(x,0)=0; f(x,s_min) <= 1e-3 M; sup_s f(x_max,s) <= 0.1 sup_s f(0,s)",
    ));

    // (AL): f(x, s_max) close to f_inf(x) uniformly.
    let mut al = Margin::new();
    for &x in &grid.xs {
        let v = model.f(x, s_max) - model.f_inf(x);
        al.push(1e-4 * big_m - v.abs(), Sample { x, s: s_max, value: v });
    }
    records.push(al.record("AL", "|f(x,s_max) - f_inf(x)| <= 1e-4 M"));

    // (A4): evenness in x.
    let mut a4 = Margin::new();
    for &x in &grid.xs {
        for &s in &grid.ss {
            let (p, m) = (model.f(x, s), model.f(-x, s));
            let scale = p.abs().max(m.abs()).max(f64::MIN_POSITIVE);
            a4.push(EQ_TOL - (p - m).abs() / scale, Sample { x, s, value: p - m });
        }
    }
    records.push(a4.record("A4", "f(-x,s) = f(x,s)"));

    // (A5): d1f < 0 and d2f > 0 for x, s > 0.
    let mut a5 = Margin::new();
    for &x in &positive_x {
        for &s in &grid.ss {
            let d1 = model.d1f(x, s);
            a5.push(-d1, Sample { x, s, value: d1 });
            let d2 = model.d2f(x, s);
            a5.push(d2, Sample { x, s, value: d2 });
        }
    }
    records.push(a5.record("A5", "d1f(x,s) < 0 and d2f(x,s) > 0 for x,s > 0"));

    // (A6): partials bounded on the grid.
    let mut a6 = Margin::new();
    for &x in &grid.xs {
        for &s in &grid.ss {
            let d1 = model.d1f(x, s);
            let d2 = model.d2f(x, s);
            let worst = if d1.abs() > d2.abs() { d1 } else { d2 };
            let ok = d1.is_finite() && d2.is_finite();
            a6.push(
                if ok { 1e12 - worst.abs() } else { -1.0 },
                Sample { x, s, value: worst },
            );
        }
    }
    records.push(a6.record("A6", "d1f, d2f finite and bounded on the grid"));

    // (A7): f_inf(0) > lim f_inf.
    let mut a7 = Margin::new();
    let (at0, far) = (model.f_inf(0.0), model.f_inf(x_max));
    a7.push(
        at0 - far,
        Sample {
            x: x_max,
            s: f64::INFINITY,
            value: far,
        },
    );
    records.push(a7.record("A7", "f_inf(0) > f_inf(x_max)"));

    // 0 <= f <= f_inf <= M.
    let mut fb = Margin::new();
    for &x in &grid.xs {
        let finf = model.f_inf(x);
        fb.push(
            big_m * (1.0 + EQ_TOL) - finf,
            Sample {
                x,
                s: f64::INFINITY,
                value: finf,
            },
        );
        for &s in &grid.ss {
            let v = model.f(x, s);
            let slack = EQ_TOL * big_m;
            fb.push((v + slack).min(finf - v + slack), Sample { x, s, value: v });
        }
    }
    records.push(fb.record("fbounded", "0 <= f(x,s) <= f_inf(x) <= M"));

    // (H): zeta > 0, non-increasing in x, non-increasing as s decreases.
    let mut h = Margin::new();
    let table: Vec<Vec<f64>> = positive_x
        .iter()
        .map(|&x| grid.ss.iter().map(|&s| zeta(model, x, s).unwrap_or(f64::NAN)).collect())
        .collect();
    for (i, &x) in positive_x.iter().enumerate() {
        for (j, &s) in grid.ss.iter().enumerate() {
            let z = table[i][j];
            let tol = EQ_TOL * z.abs().max(1.0);
            h.push(if z.is_nan() { -1.0 } else { z }, Sample { x, s, value: z });
            if i + 1 < positive_x.len() {
                let dz = table[i + 1][j] - z;
                h.push(
                    tol - dz,
                    Sample {
                        x: positive_x[i + 1],
                        s,
                        value: dz,
                    },
                );
            }
            if j + 1 < grid.ss.len() {
                let dz = table[i][j + 1] - z;
                h.push(
                    dz + tol,
                    Sample {
                        x,
                        s: grid.ss[j + 1],
                        value: dz,
                    },
                );
            }
        }
    }
    records.push(h.record("H", "zeta > 0, non-increasing as x increases and as s decreases"));

    AuditReport { records }
}

/// [`audit_assumptions`] plus the parameter inequalities of the prototype.
///
/// The scaling limits behind (A2)/(A3) are analytic facts for this family and
/// reduce to `alpha < 2 - b`, so only that inequality is checked for them.
pub fn audit_prototype(params: PrototypeParams, grid: &AuditGrid) -> AuditReport {
    let model = Prototype::new_unchecked(params);
    let mut report = audit_assumptions(&model, grid);
    let b_ok = params.b > 0.0 && params.b < 1.0;
    let a_ok = params.alpha >= 1.0;
    report.records.insert(
        0,
        AuditRecord {
            assumption: "params".into(),
            passed: b_ok && a_ok,
            detail: match (b_ok, a_ok) {
                (true, true) => format!("{CONSTRAINT_B} and {CONSTRAINT_ALPHA_LOWER}"),
                (false, _) => format!("b = {} violates {CONSTRAINT_B}", params.b),
                (true, false) => format!("alpha = {} violates {CONSTRAINT_ALPHA_LOWER}", params.alpha),
            },
            worst: None,
        },
    );
    let upper_ok = params.alpha < 2.0 - params.b;
    report.records.insert(
        1,
        AuditRecord {
            assumption: "A2/A3".into(),
            passed: upper_ok,
            detail: if upper_ok {
                CONSTRAINT_ALPHA_UPPER.to_string()
            } else {
                format!(
                    "alpha = {} violates {CONSTRAINT_ALPHA_UPPER} (2 - b = {})",
                    params.alpha,
                    2.0 - params.b
                )
            },
            worst: None,
        },
    );
    report
}
