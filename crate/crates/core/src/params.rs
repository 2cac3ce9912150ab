//! Scalar parameter schedule of the scheme and the inequality certifier.
//!
//! Frequencies follow `lambda_q = 2 pi a^(b^q)`, amplitudes
//! `delta_q = lambda_q^(-2 beta)`. Because `b^q` explodes, all derived
//! quantities are carried in log space ([`LogValue`]) alongside their
//! concrete value, and overflow of the concrete value is reported rather
//! than silently saturating.

use crate::error::{CoreError, Result};
use crate::scalar::{c, Real};
use serde::{Deserialize, Serialize};

/// Positive quantity carried as its natural logarithm, with a concrete
/// value when representable.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
    pub value: Option<f64>,
}

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        let value = if ln.abs() < f64::MAX_EXP as f64 * std::f64::consts::LN_2 * 0.999 {
            let v = ln.exp();
            if v.is_finite() && v > 0.0 {
                Some(v)
            } else {
                None
            }
        } else {
            None
        };
        LogValue { ln, value }
    }

    pub fn from_value(v: f64) -> Self {
        LogValue {
            ln: v.ln(),
            value: Some(v),
        }
    }

    pub fn powf(self, e: f64) -> Self {
        LogValue::from_ln(self.ln * e)
    }

    pub fn mul(self, other: LogValue) -> Self {
        LogValue::from_ln(self.ln + other.ln)
    }

    pub fn div(self, other: LogValue) -> Self {
        LogValue::from_ln(self.ln - other.ln)
    }
}

/// All scalar inputs of the scheme.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParameterConfig<T: Real> {
    /// Frequency base `a > 1`; the construction wants a positive integer
    /// multiple of the geometric constant `n_*`.
    pub a: T,
    /// Exponent ratio `b > 1`.
    pub b: T,
    /// Amplitude exponent `beta > 0`.
    pub beta: T,
    /// Mollification exponent, `0 < alpha < 1/(7*74)`.
    pub alpha: T,
    /// Energy-gap exponent `zeta > 0`.
    pub zeta: T,
    /// Half-interval length `s > 0`.
    pub s: T,
    /// Centre time `t0 in (0, T)`.
    pub t0: T,
    /// Target closeness `eps > 0`.
    pub eps: T,
    /// Time horizon (default 1).
    pub horizon: T,
}

impl<T: Real> Default for ParameterConfig<T> {
    /// Desk-scale preset. The construction's own admissible parameters are
    /// astronomically large; these values exercise every code path at grid
    /// scale while the constraint checker reports the asymptotic margins.
    fn default() -> Self {
        ParameterConfig {
            a: c(10.0),
            b: c(2.0),
            beta: c(2.0),
            alpha: c(1.1e-3),
            zeta: c(1.0e-5),
            s: c(0.01),
            t0: c(0.5),
            eps: c(5.0),
            horizon: c(1.0),
        }
    }
}

impl<T: Real> ParameterConfig<T> {
    /// Validate the basic invariants; `n_star`, when known, must divide `a`.
    pub fn validate(&self, n_star: Option<u32>) -> Result<()> {
        let one = T::one();
        if !(self.a > one) {
            return Err(CoreError::InvalidConfig("a must be > 1".into()));
        }
        if !(self.b > one) {
            return Err(CoreError::InvalidConfig("b must be > 1".into()));
        }
        for (name, v) in [
            ("beta", self.beta),
            ("alpha", self.alpha),
            ("zeta", self.zeta),
            ("s", self.s),
            ("eps", self.eps),
        ] {
            if !(v > T::zero()) {
                return Err(CoreError::InvalidConfig(format!("{name} must be > 0")));
            }
        }
        if !(self.t0 > T::zero() && self.t0 < self.horizon) {
            return Err(CoreError::InvalidConfig("t0 must lie in (0, T)".into()));
        }
        let two = c::<T>(2.0);
        if !(self.t0 - two * self.s >= T::zero() && self.t0 + two * self.s <= self.horizon) {
            return Err(CoreError::InvalidConfig(
                "B_2s(t0) must be contained in [0, T]".into(),
            ));
        }
        if let Some(ns) = n_star {
            let a = self.a.to_f64();
            let ratio = a / ns as f64;
            if (ratio - ratio.round()).abs() > 1e-9 || a.fract().abs() > 1e-9 {
                return Err(CoreError::InvalidConfig(format!(
                    "a = {a} must be a positive integer multiple of n_* = {ns}"
                )));
            }
        }
        Ok(())
    }
}

/// Half-open interval `(t0 - h, t0 + h)` with exact arithmetic on the
/// half-width where feasible (the widths are dyadic combinations of `s`).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TimeInterval {
    pub center: f64,
    pub half_width: f64,
}

impl TimeInterval {
    pub fn contains(&self, t: f64) -> bool {
        (t - self.center).abs() < self.half_width
    }

    pub fn contains_closed(&self, t: f64) -> bool {
        (t - self.center).abs() <= self.half_width
    }

    pub fn subset_of(&self, other: &TimeInterval) -> bool {
        self.center == other.center && self.half_width <= other.half_width
    }
}

/// All derived scalars of one level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSchedule<T: Real> {
    pub q: u32,
    pub lambda_q: f64,
    pub lambda_q1: f64,
    pub delta_q: f64,
    pub delta_q1: f64,
    pub delta_q2: f64,
    /// Log-space copies for margin arithmetic at large levels.
    pub ln_lambda_q: f64,
    pub ln_lambda_q1: f64,
    pub r_perp: f64,
    pub r_par: f64,
    pub mu: f64,
    pub ell: f64,
    pub s_q: f64,
    pub s_q1: f64,
    /// Cumulative interval length `S_q = sum_{i<=q} s_i`.
    pub big_s_q: f64,
    pub i_q: TimeInterval,
    pub i_q1: TimeInterval,
    pub i_tilde_q: TimeInterval,
    /// `B_2s(t0)`.
    pub window: TimeInterval,
    pub eps1: Option<f64>,
    /// Integrability parameter `p = 32 / (32 - 7 alpha)`.
    pub p_int: f64,
    #[serde(skip)]
    _marker: std::marker::PhantomData<T>,
}

/// `ln lambda_q` for the supplied config; errors if `b^q` itself overflows.
fn ln_lambda<T: Real>(cfg: &ParameterConfig<T>, q: u32) -> Result<f64> {
    let b = cfg.b.to_f64();
    let bq = b.powi(q as i32);
    if !bq.is_finite() {
        return Err(CoreError::InvalidConfig(format!("b^q overflows at q = {q}")));
    }
    Ok(std::f64::consts::TAU.ln() + bq * cfg.a.to_f64().ln())
}

/// Largest level whose `lambda_q` is representable in `f64`.
pub fn max_representable_level<T: Real>(cfg: &ParameterConfig<T>) -> u32 {
    let mut q = 0u32;
    loop {
        match ln_lambda(cfg, q + 1) {
            Ok(ln) if LogValue::from_ln(ln).value.is_some() => q += 1,
            _ => return q,
        }
        if q > 10_000 {
            return q;
        }
    }
}

/// Compute the full schedule at level `q`.
///
/// All closed forms:
/// `lambda_q = 2 pi a^(b^q)`, `delta_q = lambda_q^(-2 beta)`,
/// `r_perp = lambda_{q+1}^(-6/7) (2 pi)^(-1/7)`, `r_par = lambda_{q+1}^(-4/7)`,
/// `mu = lambda_{q+1}^(9/7) (2 pi)^(1/7)`,
/// `ell = lambda_{q+1}^(-3 alpha / 2) lambda_q^(-2)`,
/// `s_q = (s/2)^(q+1)`, `S_q = sum s_i`, `I_q = (t0 - S_q, t0 + S_q)`,
/// `I~_q = s_{q+1}/2 + I_q`, `p = 32/(32 - 7 alpha)`.
pub fn schedule<T: Real>(cfg: &ParameterConfig<T>, q: u32) -> Result<LevelSchedule<T>> {
    cfg.validate(None)?;
    let max_level = max_representable_level(cfg);
    let lam_q = LogValue::from_ln(ln_lambda(cfg, q)?);
    let lam_q1 = LogValue::from_ln(ln_lambda(cfg, q + 1)?);
    let (lambda_q, lambda_q1) = match (lam_q.value, lam_q1.value) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(CoreError::ScheduleOverflow { level: q, max_level });
        }
    };
    let beta = cfg.beta.to_f64();
    let delta = |lv: LogValue| lv.powf(-2.0 * beta).value.unwrap_or(0.0);
    let lam_q2 = LogValue::from_ln(ln_lambda(cfg, q + 2).unwrap_or(f64::INFINITY));
    let alpha = cfg.alpha.to_f64();
    let two_pi = std::f64::consts::TAU;

    let s = cfg.s.to_f64();
    let t0 = cfg.t0.to_f64();
    let s_of = |level: i64| (s / 2.0).powi(level as i32 + 1);
    let big_s_of = |level: i64| -> f64 {
        // Geometric partial sum: S_q = sum_{i=0..q} (s/2)^(i+1).
        let r = s / 2.0;
        r * (1.0 - r.powi(level as i32 + 1)) / (1.0 - r)
    };

    let big_s_q = big_s_of(q as i64);
    let big_s_q1 = big_s_of(q as i64 + 1);
    let s_q1 = s_of(q as i64 + 1);

    Ok(LevelSchedule {
        q,
        lambda_q,
        lambda_q1,
        delta_q: delta(lam_q),
        delta_q1: delta(lam_q1),
        delta_q2: delta(lam_q2),
        ln_lambda_q: lam_q.ln,
        ln_lambda_q1: lam_q1.ln,
        r_perp: lam_q1.powf(-6.0 / 7.0).value.unwrap_or(0.0) * two_pi.powf(-1.0 / 7.0),
        r_par: lam_q1.powf(-4.0 / 7.0).value.unwrap_or(0.0),
        mu: lam_q1
            .powf(9.0 / 7.0)
            .value
            .map(|v| v * two_pi.powf(1.0 / 7.0))
            .unwrap_or(f64::INFINITY),
        ell: LogValue::from_ln(lam_q1.ln * (-1.5 * alpha) + lam_q.ln * (-2.0))
            .value
            .unwrap_or(0.0),
        s_q: s_of(q as i64),
        s_q1,
        big_s_q,
        i_q: TimeInterval {
            center: t0,
            half_width: big_s_q,
        },
        i_q1: TimeInterval {
            center: t0,
            half_width: big_s_q1,
        },
        i_tilde_q: TimeInterval {
            center: t0,
            half_width: big_s_q + s_q1 / 2.0,
        },
        window: TimeInterval {
            center: t0,
            half_width: 2.0 * s,
        },
        eps1: None,
        p_int: 32.0 / (32.0 - 7.0 * alpha),
        _marker: std::marker::PhantomData,
    })
}

/// Universal constants measured by the geometry/field modules that enter
/// the energy-pinning constant.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GeometryConstants {
    /// `sup_xi |gamma_xi|_{C0}` over the admissible ball.
    pub sup_gamma_c0: f64,
    /// `|Lambda|`.
    pub cardinality: u32,
    /// The decorrelation constant `C_0`.
    pub c0: f64,
}

/// Energy-pinning constant:
/// `eps1 = (eps / (sup|gamma| * |Lambda| * C0 * 4 * (2 pi)^3))^2`.
pub fn epsilon_one<T: Real>(cfg: &ParameterConfig<T>, gc: &GeometryConstants) -> Result<f64> {
    if gc.sup_gamma_c0 <= 0.0 || gc.c0 <= 0.0 || gc.cardinality == 0 {
        return Err(CoreError::InvalidConstant(format!(
            "geometry constants must be positive (sup_gamma = {}, |Lambda| = {}, C0 = {})",
            gc.sup_gamma_c0, gc.cardinality, gc.c0
        )));
    }
    let eps = cfg.eps.to_f64();
    if eps < 0.0 {
        return Err(CoreError::InvalidConstant("eps must be >= 0".into()));
    }
    let denom = gc.sup_gamma_c0
        * gc.cardinality as f64
        * gc.c0
        * 4.0
        * std::f64::consts::TAU.powi(3);
    Ok((eps / denom).powi(2))
}

/// One inequality of the report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintRecord {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// `rhs - lhs`; positive when satisfied with room.
    pub margin: f64,
}

impl ConstraintRecord {
    fn strict(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        ConstraintRecord {
            name: name.into(),
            lhs,
            rhs,
            satisfied: lhs < rhs,
            margin: rhs - lhs,
        }
    }

    fn non_strict(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        ConstraintRecord {
            name: name.into(),
            lhs,
            rhs,
            satisfied: lhs <= rhs,
            margin: rhs - lhs,
        }
    }
}

/// Full constraint report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub records: Vec<ConstraintRecord>,
    pub all_satisfied: bool,
}

/// "Much smaller than" is operationalized as a fixed ratio; the proof only
/// needs some constant absorbed by the base `a`.
pub const MUCH_SMALLER_RATIO: f64 = 10.0;

/// Evaluate every inequality the construction imposes on the parameters,
/// up to and including level `q_max`. Failures are reported, not thrown.
pub fn check_constraints<T: Real>(cfg: &ParameterConfig<T>, q_max: u32) -> ConstraintReport {
    let mut rec = Vec::new();
    let a = cfg.a.to_f64();
    let b = cfg.b.to_f64();
    let alpha = cfg.alpha.to_f64();
    let beta = cfg.beta.to_f64();
    let zeta = cfg.zeta.to_f64();

    rec.push(ConstraintRecord::strict("alpha < 1/(7*74)", alpha, 1.0 / (7.0 * 74.0)));
    rec.push(ConstraintRecord::strict("alpha < 1/40", alpha, 1.0 / 40.0));
    rec.push(ConstraintRecord::strict("alpha*b > 4 (as 4 < alpha*b)", 4.0, alpha * b));
    rec.push(ConstraintRecord::strict(
        "2*beta*b + 3*zeta < 1/14",
        2.0 * beta * b + 3.0 * zeta,
        1.0 / 14.0,
    ));
    rec.push(ConstraintRecord::strict(
        "2*beta + zeta/b < alpha",
        2.0 * beta + zeta / b,
        alpha,
    ));
    rec.push(ConstraintRecord::strict(
        "4*zeta + 2*beta*b < alpha",
        4.0 * zeta + 2.0 * beta * b,
        alpha,
    ));
    rec.push(ConstraintRecord::strict(
        "a^(-beta*b) < 1/2",
        a.powf(-beta * b),
        0.5,
    ));
    let p_int = 32.0 / (32.0 - 7.0 * alpha);
    rec.push(ConstraintRecord::strict("p_int > 1", 1.0, p_int));
    rec.push(ConstraintRecord::non_strict("p_int <= 2", p_int, 2.0));

    for q in 0..=q_max {
        match schedule(cfg, q) {
            Ok(sch) => {
                // ell sandwich in log space: lambda_q^-1 > ell > lambda_{q+1}^-1.
                rec.push(ConstraintRecord::strict(
                    format!("q={q}: ell < lambda_q^-1 (ln)"),
                    sch.ell.ln(),
                    -sch.ln_lambda_q,
                ));
                rec.push(ConstraintRecord::strict(
                    format!("q={q}: lambda_(q+1)^-1 < ell (ln)"),
                    -sch.ln_lambda_q1,
                    sch.ell.ln(),
                ));
                rec.push(ConstraintRecord::non_strict(
                    format!("q={q}: ell*lambda_q^4 <= lambda_(q+1)^-alpha (ln)"),
                    sch.ell.ln() + 4.0 * sch.ln_lambda_q,
                    -alpha * sch.ln_lambda_q1,
                ));
                rec.push(ConstraintRecord::non_strict(
                    format!("q={q}: ell^-1 <= lambda_(q+1)^(2 alpha) (ln)"),
                    -sch.ell.ln(),
                    2.0 * alpha * sch.ln_lambda_q1,
                ));
                // "s_(q+1)^-1 << lambda_q" with the fixed much-smaller ratio.
                rec.push(ConstraintRecord::non_strict(
                    format!("q={q}: s_(q+1)^-1 <= lambda_q/{MUCH_SMALLER_RATIO}"),
                    1.0 / sch.s_q1,
                    sch.lambda_q / MUCH_SMALLER_RATIO,
                ));
                // Interval nesting is exact by construction; record it.
                let nested = sch.i_q.half_width < sch.i_tilde_q.half_width
                    && sch.i_tilde_q.half_width < sch.i_q1.half_width
                    && sch.i_q1.half_width < sch.window.half_width;
                rec.push(ConstraintRecord {
                    name: format!("q={q}: I_q c I~_q c I_(q+1) c B_2s"),
                    lhs: if nested { 0.0 } else { 1.0 },
                    rhs: 1.0,
                    satisfied: nested,
                    margin: sch.window.half_width - sch.i_q1.half_width,
                });
                // r_perp < r_par < 1 (asymptotic-formula values).
                rec.push(ConstraintRecord::strict(
                    format!("q={q}: r_perp < r_par"),
                    sch.r_perp,
                    sch.r_par,
                ));
                rec.push(ConstraintRecord::strict(format!("q={q}: r_par < 1"), sch.r_par, 1.0));
            }
            Err(_) => {
                rec.push(ConstraintRecord {
                    name: format!("q={q}: schedule-overflow (lambda not representable)"),
                    lhs: f64::INFINITY,
                    rhs: f64::MAX,
                    satisfied: false,
                    margin: f64::NEG_INFINITY,
                });
            }
        }
    }

    let all = rec.iter().all(|r| r.satisfied);
    ConstraintReport {
        records: rec,
        all_satisfied: all,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg64() -> ParameterConfig<f64> {
        ParameterConfig::default()
    }

    #[test]
    fn lambda_zero_matches_closed_form() {
        // (a=4, b=2, q=0) -> lambda_0 = 2 pi * 4.
        let mut cfg = cfg64();
        cfg.a = 4.0;
        cfg.b = 2.0;
        let sch = schedule(&cfg, 0).unwrap();
        assert!((sch.lambda_q - std::f64::consts::TAU * 4.0).abs() < 1e-10);
        assert!((sch.lambda_q - 25.13274).abs() < 1e-4);
    }

    #[test]
    fn delta_one_matches_closed_form() {
        // (a=4, b=2, beta=0.01): delta_1 = lambda_1^(-0.02) ~ 0.8629.
        let mut cfg = cfg64();
        cfg.a = 4.0;
        cfg.b = 2.0;
        cfg.beta = 0.01;
        let sch = schedule(&cfg, 0).unwrap();
        assert!((sch.lambda_q1 - std::f64::consts::TAU * 256.0).abs() < 1e-8);
        let expect = (std::f64::consts::TAU * 256.0).powf(-0.02);
        assert!((sch.delta_q1 - expect).abs() < 1e-12);
        assert!((sch.delta_q1 - 0.8629).abs() < 1e-3);
    }

    #[test]
    fn intervals_at_level_zero() {
        // (s=0.1, t0=0.5, q=0): S_0 = 0.05, I_0 = (0.45, 0.55).
        let mut cfg = cfg64();
        cfg.s = 0.1;
        cfg.t0 = 0.5;
        let sch = schedule(&cfg, 0).unwrap();
        assert!((sch.big_s_q - 0.05).abs() < 1e-15);
        assert!((sch.i_q.center - 0.5).abs() < 1e-15);
        assert!((sch.i_q.half_width - 0.05).abs() < 1e-15);
    }

    #[test]
    fn schedule_monotone() {
        let cfg = cfg64();
        let mut prev = schedule(&cfg, 0).unwrap();
        for q in 1..4 {
            let sch = schedule(&cfg, q).unwrap();
            assert!(sch.lambda_q > prev.lambda_q);
            assert!(sch.delta_q < prev.delta_q);
            prev = sch;
        }
    }

    #[test]
    fn overflow_reported() {
        let mut cfg = cfg64();
        cfg.a = 1e6;
        cfg.b = 8.0;
        // lambda_3 = 2pi * (1e6)^512: far beyond f64.
        let err = schedule(&cfg, 3).unwrap_err();
        match err {
            CoreError::ScheduleOverflow { level, max_level } => {
                assert_eq!(level, 3);
                assert!(max_level < 3);
                assert!(schedule(&cfg, max_level).is_ok());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn epsilon_one_closed_form() {
        // eps=1, sup|gamma|=1, |Lambda|=6, C0=1 -> (4*6*(2pi)^3)^-2.
        let mut cfg = cfg64();
        cfg.eps = 1.0;
        let gc = GeometryConstants {
            sup_gamma_c0: 1.0,
            cardinality: 6,
            c0: 1.0,
        };
        let e1 = epsilon_one(&cfg, &gc).unwrap();
        let expect = (1.0 / (24.0 * std::f64::consts::TAU.powi(3))).powi(2);
        assert!((e1 - expect).abs() < 1e-18);
        assert!((e1 - 2.83e-8).abs() < 2e-10);

        // eps = 0 -> eps1 = 0 (degenerate).
        cfg.eps = 0.0;
        assert_eq!(epsilon_one(&cfg, &gc).unwrap(), 0.0);

        // doubling eps quadruples eps1.
        cfg.eps = 2.0;
        let e2 = epsilon_one(&cfg, &gc).unwrap();
        assert!((e2 - 4.0 * e1).abs() < 1e-16 * e2.max(1.0));

        // nonpositive constants rejected.
        let bad = GeometryConstants {
            sup_gamma_c0: 0.0,
            cardinality: 6,
            c0: 1.0,
        };
        assert!(epsilon_one(&cfg, &bad).is_err());
    }

    #[test]
    fn constraint_examples() {
        // Admissible config: all satisfied.
        let mut cfg = cfg64();
        cfg.a = 1e6 * 5.0;
        cfg.b = 8.0;
        cfg.beta = 1e-4;
        cfg.alpha = 1e-3;
        cfg.zeta = 1e-5;
        cfg.s = 0.01;
        let rep = check_constraints(&cfg, 1);
        for r in &rep.records {
            assert!(r.satisfied, "{} lhs={} rhs={}", r.name, r.lhs, r.rhs);
        }
        assert!(rep.all_satisfied);

        // alpha b > 4 fails at b = 2 with margin -3.998.
        let mut cfg2 = cfg64();
        cfg2.b = 2.0;
        cfg2.alpha = 1e-3;
        let rep2 = check_constraints(&cfg2, 0);
        let r = rep2
            .records
            .iter()
            .find(|r| r.name.contains("alpha*b"))
            .unwrap();
        assert!(!r.satisfied);
        assert!((r.margin - (1e-3 * 2.0 - 4.0)).abs() < 1e-12);

        // boundary alpha = 1/(7*74) fails the strict inequality.
        let mut cfg3 = cfg64();
        cfg3.alpha = 1.0 / (7.0 * 74.0);
        let rep3 = check_constraints(&cfg3, 0);
        let r3 = rep3
            .records
            .iter()
            .find(|r| r.name.contains("1/(7*74)"))
            .unwrap();
        assert!(!r3.satisfied);
    }

    #[test]
    fn check_constraints_is_pure() {
        let cfg = cfg64();
        let a = check_constraints(&cfg, 2);
        let b = check_constraints(&cfg, 2);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn delta_series_dominated_by_geometric_bound() {
        // sum_q delta_(q+1)^(1/2) <= a^(-beta b) / (1 - a^(-beta b)) for b >= 2.
        let mut cfg = cfg64();
        cfg.a = 20.0;
        cfg.b = 2.0;
        cfg.beta = 0.5;
        let r = cfg.a.powf(-cfg.beta * cfg.b);
        let bound = r / (1.0 - r);
        let mut partial = 0.0;
        for q in 0..8 {
            let sch = schedule(&cfg, q).unwrap();
            partial += sch.delta_q1.sqrt();
            assert!(partial <= bound + 1e-15, "partial {partial} > bound {bound}");
        }
    }
}
