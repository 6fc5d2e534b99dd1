//! Problem parameters, regime classification and the tilting rates.

use std::fmt;

use crate::error::{domain, Result};
pub use crate::gauss::{bvn_pdf, bvn_tail, ln_norm_sf, norm_cdf, norm_pdf, norm_sf};
use crate::gauss::check_rho;

/// Parisian window, either in time units or in the `u^2`-scaled units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    AbsoluteH(f64),
    /// `H = S / u^2`.
    ScaledS(f64),
}

/// Full description of a two-portfolio Brownian risk problem.
///
/// The surpluses are `R1(t) = u + c1 t - W1(t)` and
/// `R2(t) = a u + c2 t - W2(t)` with `corr(W1, W2) = rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    u: f64,
    a: f64,
    rho: f64,
    c1: f64,
    c2: f64,
    horizon: f64,
    window: Window,
    sojourn_budget: f64,
}

impl ModelParams {
    /// Parameters with no Parisian window and a zero sojourn budget.
    pub fn new(u: f64, a: f64, rho: f64, c1: f64, c2: f64, horizon: f64) -> Result<Self> {
        let p = ModelParams {
            u,
            a,
            rho,
            c1,
            c2,
            horizon,
            window: Window::AbsoluteH(0.0),
            sojourn_budget: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_window(mut self, window: Window) -> Result<Self> {
        self.window = window;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sojourn_budget(mut self, l: f64) -> Result<Self> {
        self.sojourn_budget = l;
        self.validate()?;
        Ok(self)
    }

    pub fn with_u(mut self, u: f64) -> Result<Self> {
        self.u = u;
        self.validate()?;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        self.rho = rho;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.u, self.a, self.c1, self.c2, self.horizon, self.sojourn_budget];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(domain("model parameters must be finite"));
        }
        if self.u <= 0.0 {
            return Err(domain(format!("u must be positive, got {}", self.u)));
        }
        if self.a > 1.0 {
            return Err(domain(format!("a must not exceed 1, got {}", self.a)));
        }
        check_rho(self.rho)?;
        if self.horizon <= 0.0 {
            return Err(domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        let w = match self.window {
            Window::AbsoluteH(h) => h,
            Window::ScaledS(s) => s,
        };
        if !(w.is_finite() && w >= 0.0) {
            return Err(domain(format!("window must be finite and non-negative, got {w}")));
        }
        if self.sojourn_budget < 0.0 {
            return Err(domain("sojourn budget must be non-negative"));
        }
        Ok(())
    }

    pub fn u(&self) -> f64 {
        self.u
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn c1(&self) -> f64 {
        self.c1
    }
    pub fn c2(&self) -> f64 {
        self.c2
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }
    pub fn window(&self) -> Window {
        self.window
    }
    pub fn sojourn_budget(&self) -> f64 {
        self.sojourn_budget
    }

    /// Window length in time units.
    pub fn h(&self) -> f64 {
        match self.window {
            Window::AbsoluteH(h) => h,
            Window::ScaledS(s) => s / (self.u * self.u),
        }
    }

    /// Window length in scaled units, `S = H u^2`.
    pub fn s(&self) -> f64 {
        match self.window {
            Window::AbsoluteH(h) => h * self.u * self.u,
            Window::ScaledS(s) => s,
        }
    }

    /// Sojourn threshold in time units, `L / u^2`.
    pub fn sojourn_threshold(&self) -> f64 {
        self.sojourn_budget / (self.u * self.u)
    }

    pub fn regime(&self) -> Regime {
        if self.a > self.rho {
            Regime::AboveRho
        } else {
            Regime::AtOrBelowRho
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `a` in `(rho, 1]`.
    AboveRho,
    /// `a <= rho`.
    AtOrBelowRho,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::AboveRho => "above_rho",
            Regime::AtOrBelowRho => "at_or_below_rho",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaPair {
    pub lambda1: f64,
    pub lambda2: f64,
}

pub fn lambda_coefficients(a: f64, rho: f64) -> Result<LambdaPair> {
    check_rho(rho)?;
    let d = 1.0 - rho * rho;
    Ok(LambdaPair {
        lambda1: (1.0 - a * rho) / d,
        lambda2: (a - rho) / d,
    })
}

pub fn classify_regime(a: f64, rho: f64) -> Result<Regime> {
    check_rho(rho)?;
    if a.is_nan() || a > 1.0 {
        return Err(domain(format!("a must be a real number not exceeding 1, got {a}")));
    }
    Ok(if a > rho { Regime::AboveRho } else { Regime::AtOrBelowRho })
}

/// Maps a problem on `[0, T]` to the equivalent one on `[0, 1]`.
///
/// Substituting `t = T s` turns `W(t)` into `sqrt(T) W(s)`; dividing the
/// surplus by `sqrt(T)` gives `u' = u / sqrt(T)`, `c' = c sqrt(T)`,
/// `H' = H / T`. The scaled quantities `S` and `L` carry a factor `u^2`, so
/// they pick up `1 / T^2`.
pub fn rescale_to_unit_horizon(p: &ModelParams) -> ModelParams {
    let t = p.horizon;
    if t == 1.0 {
        return *p;
    }
    let st = t.sqrt();
    let window = match p.window {
        Window::AbsoluteH(h) => Window::AbsoluteH(h / t),
        Window::ScaledS(s) => Window::ScaledS(s / (t * t)),
    };
    ModelParams {
        u: p.u / st,
        a: p.a,
        rho: p.rho,
        c1: p.c1 * st,
        c2: p.c2 * st,
        horizon: 1.0,
        window,
        sojourn_budget: p.sojourn_budget / (t * t),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_examples() {
        let l = lambda_coefficients(1.0, 0.0).unwrap();
        assert_eq!((l.lambda1, l.lambda2), (1.0, 1.0));
        assert_eq!(lambda_coefficients(0.3, 0.3).unwrap().lambda2, 0.0);
        let l = lambda_coefficients(0.5, 0.25).unwrap();
        assert!((l.lambda1 - 0.875 / 0.9375).abs() < 1e-15);
        assert!((l.lambda1 - 0.933_333_333_333_333_3).abs() < 1e-15);
        assert!((l.lambda2 - 0.266_666_666_666_666_7).abs() < 1e-15);
        assert!(lambda_coefficients(0.5, 1.0).is_err());
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(1.0, 0.5).unwrap(), Regime::AboveRho);
        assert_eq!(classify_regime(0.5, 0.5).unwrap(), Regime::AtOrBelowRho);
        assert_eq!(classify_regime(-2.0, 0.0).unwrap(), Regime::AtOrBelowRho);
        assert!(classify_regime(1.1, 0.0).is_err());
    }

    #[test]
    fn params_validate() {
        assert!(ModelParams::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.5, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, -1.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0, 0.0, 0.0, 0.0).is_err());
        let p = ModelParams::new(2.0, 1.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert!(p.with_window(Window::ScaledS(-1.0)).is_err());
        assert!(p.with_sojourn_budget(-0.1).is_err());
        let p = p.with_window(Window::ScaledS(2.0)).unwrap();
        assert_eq!(p.h(), 0.5);
        let q = p.with_window(Window::AbsoluteH(0.5)).unwrap();
        assert_eq!(q.s(), 2.0);
    }

    #[test]
    fn rescale_examples() {
        let p = ModelParams::new(6.0, 0.5, 0.2, 1.0, -1.0, 4.0)
            .unwrap()
            .with_window(Window::AbsoluteH(0.2))
            .unwrap()
            .with_sojourn_budget(16.0)
            .unwrap();
        let q = rescale_to_unit_horizon(&p);
        assert_eq!(q.horizon(), 1.0);
        assert_eq!(q.u(), 3.0);
        assert_eq!(q.c1(), 2.0);
        assert_eq!(q.c2(), -2.0);
        assert_eq!(q.window(), Window::AbsoluteH(0.05));
        assert_eq!(q.sojourn_budget(), 1.0);
        // the sojourn threshold in time units scales like the window
        assert!((q.sojourn_threshold() - p.sojourn_threshold() / 4.0).abs() < 1e-15);

        let unit = ModelParams::new(2.0, 1.0, 0.0, 0.5, 0.5, 1.0).unwrap();
        assert_eq!(rescale_to_unit_horizon(&unit), unit);

        let scaled = p.with_window(Window::ScaledS(8.0)).unwrap();
        let r = rescale_to_unit_horizon(&scaled);
        assert!((r.h() - scaled.h() / 4.0).abs() < 1e-15);
    }
}
