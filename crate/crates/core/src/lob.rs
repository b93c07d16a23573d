//! Equilibrium sell-side limit order book.
//!
//! Every resting sell order earns the same expected return `U(x, q)`, where
//! `x` is the fundamental price and `q` the total book volume. Requiring that
//! a purchase of the lowest `α` shares costs `α·U(x, q − α)` pins down the
//! whole book:
//!
//! ```text
//! p(α)    = U(x, q − α) − α·U_q(x, q − α)          price at depth α
//! μ(p(α)) = 1 / (α·U_qq(x, q − α) − 2·U_q(x, q − α)) density at that price
//! C(α)    = α·U(x, q − α)                          cost of buying α shares
//! D(α)    = ∫₀^α U(x, q − u) du                    smoothed (continuous) cost
//! ```
//!
//! The best ask is `p(0) = U(x, q)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics;

/// Absolute tolerance of every quadrature in this module.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Tolerance in shares of the inverse price map.
pub const DEPTH_TOL: f64 = 1e-10;

type SurfaceFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A user supplied utility surface with its first and second `q`-derivatives.
#[derive(Clone)]
pub struct CustomUtility {
    value: SurfaceFn,
    d_q: SurfaceFn,
    d_qq: SurfaceFn,
}

impl fmt::Debug for CustomUtility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CustomUtility")
    }
}

/// The expected-return surface `U(x, q)` that shapes the book.
#[derive(Clone, Debug)]
pub enum UtilityModel {
    /// `U = x + a·exp(−γ q)`.
    Exponential { a: f64, gamma: f64 },
    /// `U = x + a − b·q`, admitted on `q < a/b` only. Its zero curvature
    /// makes the book block shaped.
    Linear { a: f64, b: f64 },
    Custom(CustomUtility),
}

/// Serializable description of the built-in families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum UtilitySpec {
    Exponential { a: f64, gamma: f64 },
    Linear { a: f64, b: f64 },
}

impl Default for UtilityModel {
    fn default() -> Self {
        UtilityModel::Exponential { a: 1.0, gamma: 0.1 }
    }
}

impl UtilityModel {
    pub fn exponential(a: f64, gamma: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::config("utility.a", format!("must be positive, got {a}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::config("utility.gamma", format!("must be positive, got {gamma}")));
        }
        Ok(UtilityModel::Exponential { a, gamma })
    }

    pub fn linear(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::config("utility.a", format!("must be positive, got {a}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::config("utility.b", format!("must be positive, got {b}")));
        }
        Ok(UtilityModel::Linear { a, b })
    }

    /// Wraps a user supplied `(U, U_q, U_qq)` triple after checking, on a
    /// sample of `(0, x_max] × [0, q_max]`, that `U > 0`, `U_q < 0`,
    /// `U_qq > 0` and that `U` does not decrease in `x`.
    pub fn custom<U, Uq, Uqq>(value: U, d_q: Uq, d_qq: Uqq, x_max: f64, q_max: f64) -> Result<Self>
    where
        U: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        Uq: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        Uqq: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        const SAMPLES: usize = 40;
        for i in 1..=SAMPLES {
            let x = x_max * i as f64 / SAMPLES as f64;
            let x_lo = x_max * (i - 1).max(1) as f64 / SAMPLES as f64;
            for j in 0..=SAMPLES {
                let q = q_max * j as f64 / SAMPLES as f64;
                let (u, uq, uqq) = (value(x, q), d_q(x, q), d_qq(x, q));
                if !(u > 0.0) || !u.is_finite() {
                    return Err(Error::ModelViolation(format!("U({x}, {q}) = {u} is not positive")));
                }
                if !(uq < 0.0) {
                    return Err(Error::ModelViolation(format!("U_q({x}, {q}) = {uq} is not negative")));
                }
                if !(uqq > 0.0) {
                    return Err(Error::ModelViolation(format!("U_qq({x}, {q}) = {uqq} is not positive")));
                }
                if i > 1 && value(x_lo, q) > u {
                    return Err(Error::ModelViolation(format!("U decreases in x near ({x}, {q})")));
                }
            }
        }
        Ok(UtilityModel::Custom(CustomUtility {
            value: Arc::new(value),
            d_q: Arc::new(d_q),
            d_qq: Arc::new(d_qq),
        }))
    }

    pub fn from_spec(spec: &UtilitySpec) -> Result<Self> {
        match *spec {
            UtilitySpec::Exponential { a, gamma } => Self::exponential(a, gamma),
            UtilitySpec::Linear { a, b } => Self::linear(a, b),
        }
    }

    /// Largest book volume the family is defined on.
    pub fn q_limit(&self) -> f64 {
        match *self {
            UtilityModel::Linear { a, b } => a / b,
            _ => f64::INFINITY,
        }
    }

    pub fn value(&self, x: f64, q: f64) -> f64 {
        match self {
            UtilityModel::Exponential { a, gamma } => x + a * (-gamma * q).exp(),
            UtilityModel::Linear { a, b } => x + a - b * q,
            UtilityModel::Custom(c) => (c.value)(x, q),
        }
    }

    pub fn d_q(&self, x: f64, q: f64) -> f64 {
        match self {
            UtilityModel::Exponential { a, gamma } => -a * gamma * (-gamma * q).exp(),
            UtilityModel::Linear { b, .. } => -b,
            UtilityModel::Custom(c) => (c.d_q)(x, q),
        }
    }

    pub fn d_qq(&self, x: f64, q: f64) -> f64 {
        match self {
            UtilityModel::Exponential { a, gamma } => a * gamma * gamma * (-gamma * q).exp(),
            UtilityModel::Linear { .. } => 0.0,
            UtilityModel::Custom(c) => (c.d_qq)(x, q),
        }
    }

    /// `∫_{q_lo}^{q_hi} U(x, s) ds`, in closed form where the family has one.
    pub fn integral_q(&self, x: f64, q_lo: f64, q_hi: f64) -> f64 {
        match *self {
            UtilityModel::Exponential { a, gamma } => {
                x * (q_hi - q_lo) + a / gamma * ((-gamma * q_lo).exp() - (-gamma * q_hi).exp())
            }
            UtilityModel::Linear { a, b } => {
                (x + a) * (q_hi - q_lo) - 0.5 * b * (q_hi * q_hi - q_lo * q_lo)
            }
            UtilityModel::Custom(_) => {
                numerics::integrate(|s| self.value(x, s), q_lo, q_hi, QUADRATURE_TOL)
            }
        }
    }

    /// Snapshot of the book at fundamental price `x` with `q` shares resting.
    pub fn snapshot(&self, x: f64, q: f64) -> Result<LobSnapshot<'_>> {
        LobSnapshot::new(self, x, q)
    }
}

/// The book at one instant.
#[derive(Clone, Copy, Debug)]
pub struct LobSnapshot<'a> {
    x: f64,
    q: f64,
    utility: &'a UtilityModel,
}

impl<'a> LobSnapshot<'a> {
    pub fn new(utility: &'a UtilityModel, x: f64, q: f64) -> Result<Self> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("fundamental price must be positive, got {x}")));
        }
        if !(q >= 0.0 && q.is_finite()) {
            return Err(Error::Domain(format!("book volume must be non-negative, got {q}")));
        }
        if q >= utility.q_limit() {
            return Err(Error::Domain(format!(
                "book volume {q} outside the utility family's range [0, {})",
                utility.q_limit()
            )));
        }
        Ok(LobSnapshot { x, q, utility })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn utility(&self) -> &'a UtilityModel {
        self.utility
    }

    fn check_depth(&self, alpha: f64) -> Result<()> {
        if !(alpha >= 0.0 && alpha <= self.q) {
            return Err(Error::Domain(format!(
                "depth {alpha} outside [0, {}]: cannot consume more than the book holds",
                self.q
            )));
        }
        Ok(())
    }

    /// Lowest ask, `p(0) = U(x, q)`.
    pub fn best_ask(&self) -> f64 {
        self.utility.value(self.x, self.q)
    }

    /// Price level below which exactly `alpha` shares rest.
    pub fn price_at_depth(&self, alpha: f64) -> Result<f64> {
        self.check_depth(alpha)?;
        Ok(self.price_unchecked(alpha))
    }

    fn price_unchecked(&self, alpha: f64) -> f64 {
        let rest = self.q - alpha;
        self.utility.value(self.x, rest) - alpha * self.utility.d_q(self.x, rest)
    }

    /// Book density (shares per unit price) at the price level of depth `alpha`.
    pub fn density_at_depth(&self, alpha: f64) -> Result<f64> {
        self.check_depth(alpha)?;
        let rest = self.q - alpha;
        let slope = alpha * self.utility.d_qq(self.x, rest) - 2.0 * self.utility.d_q(self.x, rest);
        if !(slope > 0.0) {
            return Err(Error::ModelViolation(format!(
                "density denominator {slope} is not positive at depth {alpha}"
            )));
        }
        Ok(1.0 / slope)
    }

    /// Inverse of [`price_at_depth`](Self::price_at_depth).
    pub fn depth_at_price(&self, y: f64) -> Result<f64> {
        let lo = self.best_ask();
        let hi = self.price_unchecked(self.q);
        if !(y >= lo && y <= hi) {
            return Err(Error::Domain(format!("price {y} outside the book [{lo}, {hi}]")));
        }
        if y == lo {
            return Ok(0.0);
        }
        if y == hi {
            return Ok(self.q);
        }
        // far below DEPTH_TOL so quadratures over h(y) see a smooth integrand
        let x_tol = 4.0 * f64::EPSILON * self.q.max(1.0);
        let alpha = numerics::bracketed_root(|a| self.price_unchecked(a) - y, 0.0, self.q, x_tol);
        Ok(alpha.clamp(0.0, self.q))
    }

    /// Book density as a function of price, `μ(y) = μ(p(h(y)))`.
    pub fn density_at_price(&self, y: f64) -> Result<f64> {
        let alpha = self.depth_at_price(y)?;
        self.density_at_depth(alpha)
    }

    /// Cost of buying the lowest `alpha` shares at once, `α·U(x, q − α)`.
    pub fn execution_cost(&self, alpha: f64) -> Result<f64> {
        self.check_depth(alpha)?;
        Ok(alpha * self.utility.value(self.x, self.q - alpha))
    }

    /// `∫₀^α U(x, q − u) du`, the cost of the same purchase spread
    /// infinitesimally thinly over time.
    pub fn smoothed_cost(&self, alpha: f64) -> Result<f64> {
        self.check_depth(alpha)?;
        Ok(self.utility.integral_q(self.x, self.q - alpha, self.q))
    }

    /// `C − D`, the saving from spreading the purchase thinly, computed
    /// without the `α·x` cancellation of subtracting the two costs.
    pub fn smoothing_saving(&self, alpha: f64) -> Result<f64> {
        self.check_depth(alpha)?;
        let q_after = self.q - alpha;
        Ok(match *self.utility {
            UtilityModel::Exponential { a, gamma } => {
                let z = gamma * alpha;
                // α − (1 − e^{−z})/γ, by series where it cancels.
                let core = if z < 1e-3 {
                    alpha * z * (0.5 - z / 6.0 + z * z / 24.0)
                } else {
                    alpha + (-z).exp_m1() / gamma
                };
                a * (-gamma * q_after).exp() * core
            }
            UtilityModel::Linear { b, .. } => 0.5 * b * alpha * alpha,
            UtilityModel::Custom(_) => {
                let top = self.utility.value(self.x, q_after);
                numerics::integrate(|u| top - self.utility.value(self.x, self.q - u), 0.0, alpha, QUADRATURE_TOL)
            }
        })
    }

    /// Execution cost in excess of the fundamental value `α·x`.
    pub fn liquidity_cost(&self, alpha: f64) -> Result<f64> {
        Ok(self.execution_cost(alpha)? - alpha * self.x)
    }

    /// Average price paid for `alpha` shares, `C/α = U(x, q − α)`.
    pub fn supply_curve(&self, alpha: f64) -> Result<f64> {
        if alpha == 0.0 {
            return Err(Error::Domain(
                "average price of an empty trade is undefined; use the best ask".into(),
            ));
        }
        self.check_depth(alpha)?;
        Ok(self.utility.value(self.x, self.q - alpha))
    }

    /// Volume resting between the best ask and `p(alpha)`, integrated in
    /// price space through the inverse map.
    pub fn volume_below_depth(&self, alpha: f64) -> Result<f64> {
        let hi = self.price_at_depth(alpha)?;
        self.integrate_in_price(hi, |_| 1.0)
    }

    /// `∫ y μ(y) dy` from the best ask to `p(alpha)`.
    pub fn cost_by_quadrature(&self, alpha: f64) -> Result<f64> {
        let hi = self.price_at_depth(alpha)?;
        self.integrate_in_price(hi, |y| y)
    }

    fn integrate_in_price<W: Fn(f64) -> f64>(&self, hi: f64, weight: W) -> Result<f64> {
        let lo = self.best_ask();
        let failure = std::cell::RefCell::new(None);
        let value = numerics::integrate(
            |y| match self.density_at_price(y.clamp(lo, hi)) {
                Ok(m) => weight(y) * m,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e.to_string());
                    f64::NAN
                }
            },
            lo,
            hi,
            QUADRATURE_TOL,
        );
        match failure.into_inner() {
            Some(msg) => Err(Error::ModelViolation(msg)),
            None => Ok(value),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn book() -> UtilityModel {
        UtilityModel::exponential(1.0, 0.1).unwrap()
    }

    #[test]
    fn smoothing_saving_matches_cost_difference() {
        for u in [book(), UtilityModel::linear(1.0, 0.05).unwrap()] {
            let s = u.snapshot(10.0, 5.0).unwrap();
            for alpha in [1e-6, 0.01, 0.5, 2.0, 5.0] {
                let direct = s.execution_cost(alpha).unwrap() - s.smoothed_cost(alpha).unwrap();
                let saving = s.smoothing_saving(alpha).unwrap();
                assert!(saving > 0.0);
                assert!((saving - direct).abs() < 1e-12 * (1.0 + direct.abs()) + 1e-13, "{alpha}: {saving} vs {direct}");
            }
        }
    }

    const E_M1: f64 = 0.367_879_441_171_442_33;
    const E_M05: f64 = 0.606_530_659_712_633_4;

    #[test]
    fn best_ask_examples() {
        let u = book();
        assert!((u.snapshot(100.0, 10.0).unwrap().best_ask() - (100.0 + E_M1)).abs() < 1e-12);
        assert_eq!(u.snapshot(100.0, 0.0).unwrap().best_ask(), 101.0);
        let deep = u.snapshot(100.0, 1e4).unwrap().best_ask();
        assert!((deep - 100.0).abs() < 1e-12);
    }

    #[test]
    fn price_at_depth_examples() {
        let u = book();
        let s = u.snapshot(100.0, 10.0).unwrap();
        assert_eq!(s.price_at_depth(0.0).unwrap(), s.best_ask());
        assert!((s.price_at_depth(10.0).unwrap() - 102.0).abs() < 1e-12);
        assert!((s.price_at_depth(5.0).unwrap() - (100.0 + 1.5 * E_M05)).abs() < 1e-12);
        assert!(matches!(s.price_at_depth(10.5), Err(Error::Domain(_))));
        assert!(matches!(s.price_at_depth(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn density_examples() {
        let u = book();
        let s = u.snapshot(100.0, 10.0).unwrap();
        let m0 = s.density_at_depth(0.0).unwrap();
        assert!((m0 - 1.0 / (0.2 * E_M1)).abs() < 1e-10);
        // μ·p' = 1 against a central difference of p
        for &alpha in &[0.5, 2.0, 5.0, 9.5] {
            let h = 1e-5;
            let dp = (s.price_at_depth(alpha + h).unwrap() - s.price_at_depth(alpha - h).unwrap()) / (2.0 * h);
            let m = s.density_at_depth(alpha).unwrap();
            assert!((m * dp - 1.0).abs() < 1e-8, "alpha={alpha}: {}", m * dp);
        }
        let lin = UtilityModel::linear(2.0, 0.25).unwrap();
        let s = lin.snapshot(50.0, 6.0).unwrap();
        for &alpha in &[0.0, 1.0, 3.3, 6.0] {
            assert_eq!(s.density_at_depth(alpha).unwrap(), 2.0);
        }
    }

    #[test]
    fn depth_at_price_inverts() {
        let u = book();
        let s = u.snapshot(100.0, 10.0).unwrap();
        assert_eq!(s.depth_at_price(s.best_ask()).unwrap(), 0.0);
        assert_eq!(s.depth_at_price(s.price_at_depth(10.0).unwrap()).unwrap(), 10.0);
        let a = s.depth_at_price(100.909_796_0).unwrap();
        assert!((a - 5.0).abs() < 1e-6, "{a}");
        assert!(s.depth_at_price(100.0).is_err());
        assert!(s.depth_at_price(102.5).is_err());
    }

    #[test]
    fn cost_examples() {
        let u = book();
        let s = u.snapshot(100.0, 10.0).unwrap();
        assert_eq!(s.execution_cost(0.0).unwrap(), 0.0);
        assert!((s.execution_cost(5.0).unwrap() - 5.0 * (100.0 + E_M05)).abs() < 1e-10);
        assert!((s.execution_cost(10.0).unwrap() - 1010.0).abs() < 1e-10);
        let by_quad = s.cost_by_quadrature(5.0).unwrap();
        assert!((by_quad - s.execution_cost(5.0).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn smoothed_cost_examples() {
        let u = book();
        let s = u.snapshot(100.0, 10.0).unwrap();
        assert_eq!(s.smoothed_cost(0.0).unwrap(), 0.0);
        let d = s.smoothed_cost(5.0).unwrap();
        assert!((d - (500.0 + 10.0 * (E_M05 - E_M1))).abs() < 1e-10);
        let quad = numerics::integrate(|v| u.value(100.0, 10.0 - v), 0.0, 5.0, 1e-12);
        assert!((d - quad).abs() < 1e-10);
        assert!(d < s.execution_cost(5.0).unwrap());
    }

    #[test]
    fn liquidity_cost_and_supply_curve() {
        let u = book();
        let s = u.snapshot(100.0, 10.0).unwrap();
        assert_eq!(s.liquidity_cost(0.0).unwrap(), 0.0);
        assert!((s.liquidity_cost(5.0).unwrap() - 5.0 * E_M05).abs() < 1e-10);
        let h = 1e-6;
        let slope = s.liquidity_cost(h).unwrap() / h;
        assert!((slope - E_M1).abs() < 1e-4);
        assert!((s.supply_curve(5.0).unwrap() - (100.0 + E_M05)).abs() < 1e-12);
        assert!((s.supply_curve(1e-9).unwrap() - s.best_ask()).abs() < 1e-9);
        assert!(matches!(s.supply_curve(0.0), Err(Error::Domain(_))));
        // non-decreasing and convex on a 100-point grid
        let pts: Vec<f64> = (1..=100).map(|i| s.supply_curve(10.0 * i as f64 / 100.0).unwrap()).collect();
        for w in pts.windows(3) {
            assert!(w[1] >= w[0]);
            assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-12);
        }
    }

    #[test]
    fn linear_family_domain() {
        let lin = UtilityModel::linear(1.0, 0.1).unwrap();
        assert!(lin.snapshot(10.0, 9.9).is_ok());
        assert!(lin.snapshot(10.0, 10.0).is_err());
        assert!(UtilityModel::linear(1.0, 0.0).is_err());
    }

    #[test]
    fn custom_family_is_validated() {
        // same surface as the exponential family
        let ok = UtilityModel::custom(
            |x, q| x + (-0.1 * q).exp(),
            |_, q| -0.1 * (-0.1 * q).exp(),
            |_, q| 0.01 * (-0.1 * q).exp(),
            200.0,
            20.0,
        )
        .unwrap();
        let s = ok.snapshot(100.0, 10.0).unwrap();
        assert!((s.smoothed_cost(5.0).unwrap() - (500.0 + 10.0 * (E_M05 - E_M1))).abs() < 1e-9);
        // concave in q: density denominator would change sign
        let bad = UtilityModel::custom(
            |x, q| x + 10.0 - 0.01 * q * q,
            |_, q| -0.02 * q,
            |_, _| -0.02,
            200.0,
            20.0,
        );
        assert!(matches!(bad, Err(Error::ModelViolation(_))));
    }
}
