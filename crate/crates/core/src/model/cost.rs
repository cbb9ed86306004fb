use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Parameterisation of an AoI cost function `f(x)`, `x` in minutes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostKind {
    /// `alpha * x`
    Linear { alpha: f64 },
    /// `alpha * x^2`
    Quadratic { alpha: f64 },
    /// `alpha * (exp(beta * x) - 1)`
    Exponential { alpha: f64, beta: f64 },
    /// `low` for `x <= threshold`, `high` otherwise.
    Step { threshold: f64, low: f64, high: f64 },
    /// Linear interpolation between `[x, y]` breakpoints, flat outside them.
    PiecewiseLinear { breakpoints: Vec<[f64; 2]> },
}

/// A validated, non-negative and non-decreasing cost function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CostKind", into = "CostKind")]
pub struct CostFn(CostKind);

impl CostFn {
    pub fn new(kind: CostKind) -> Result<Self> {
        check(&kind).map_err(Error::InvalidCostFn)?;
        Ok(Self(kind))
    }

    pub fn linear(alpha: f64) -> Result<Self> {
        Self::new(CostKind::Linear { alpha })
    }

    pub fn quadratic(alpha: f64) -> Result<Self> {
        Self::new(CostKind::Quadratic { alpha })
    }

    pub fn exponential(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(CostKind::Exponential { alpha, beta })
    }

    pub fn step(threshold: f64, low: f64, high: f64) -> Result<Self> {
        Self::new(CostKind::Step {
            threshold,
            low,
            high,
        })
    }

    pub fn piecewise_linear(breakpoints: Vec<[f64; 2]>) -> Result<Self> {
        Self::new(CostKind::PiecewiseLinear { breakpoints })
    }

    /// The constant-zero function.
    pub fn zero() -> Self {
        Self(CostKind::Linear { alpha: 0.0 })
    }

    pub fn kind(&self) -> &CostKind {
        &self.0
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match &self.0 {
            CostKind::Linear { alpha } => alpha * x,
            CostKind::Quadratic { alpha } => alpha * x * x,
            CostKind::Exponential { alpha, beta } => alpha * (beta * x).exp_m1(),
            CostKind::Step {
                threshold,
                low,
                high,
            } => {
                if x <= *threshold {
                    *low
                } else {
                    *high
                }
            }
            CostKind::PiecewiseLinear { breakpoints } => interpolate(breakpoints, x),
        }
    }

    /// `∫_lo^hi f(x) dx`. Closed form for linear and quadratic functions;
    /// otherwise adaptive Simpson quadrature on each smooth piece.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return -self.integral(hi, lo);
        }
        if hi == lo {
            return 0.0;
        }
        match &self.0 {
            CostKind::Linear { alpha } => alpha * (hi * hi - lo * lo) / 2.0,
            CostKind::Quadratic { alpha } => alpha * (hi.powi(3) - lo.powi(3)) / 3.0,
            _ => {
                let mut edges = vec![lo];
                edges.extend(self.kinks().into_iter().filter(|&k| k > lo && k < hi));
                edges.push(hi);
                edges
                    .windows(2)
                    .map(|w| adaptive_simpson(|x| self.eval(x), w[0], w[1]))
                    .sum()
            }
        }
    }

    /// Points where `f` is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match &self.0 {
            CostKind::Step { threshold, .. } => vec![*threshold],
            CostKind::PiecewiseLinear { breakpoints } => breakpoints.iter().map(|p| p[0]).collect(),
            _ => Vec::new(),
        }
    }
}

impl TryFrom<CostKind> for CostFn {
    type Error = Error;

    fn try_from(kind: CostKind) -> Result<Self> {
        Self::new(kind)
    }
}

impl From<CostFn> for CostKind {
    fn from(f: CostFn) -> Self {
        f.0
    }
}

fn check(kind: &CostKind) -> std::result::Result<(), String> {
    let finite = |name: &str, v: f64| {
        if v.is_finite() {
            Ok(())
        } else {
            Err(format!("{name} is not finite"))
        }
    };
    let nonneg = |name: &str, v: f64| {
        finite(name, v)?;
        if v >= 0.0 {
            Ok(())
        } else {
            Err(format!("{name} = {v} must be non-negative"))
        }
    };
    match kind {
        CostKind::Linear { alpha } | CostKind::Quadratic { alpha } => nonneg("alpha", *alpha),
        CostKind::Exponential { alpha, beta } => {
            nonneg("alpha", *alpha)?;
            nonneg("beta", *beta)
        }
        CostKind::Step {
            threshold,
            low,
            high,
        } => {
            finite("threshold", *threshold)?;
            nonneg("low", *low)?;
            nonneg("high", *high)?;
            if high < low {
                return Err(format!("step decreases: high {high} < low {low}"));
            }
            Ok(())
        }
        CostKind::PiecewiseLinear { breakpoints } => {
            if breakpoints.is_empty() {
                return Err("piecewise-linear function needs at least one breakpoint".into());
            }
            for p in breakpoints {
                finite("breakpoint x", p[0])?;
                nonneg("breakpoint y", p[1])?;
            }
            for w in breakpoints.windows(2) {
                if w[1][0] <= w[0][0] {
                    return Err("breakpoint x values must be strictly increasing".into());
                }
                if w[1][1] < w[0][1] {
                    return Err("breakpoint y values must be non-decreasing".into());
                }
            }
            Ok(())
        }
    }
}

fn interpolate(points: &[[f64; 2]], x: f64) -> f64 {
    let first = points[0];
    let last = points[points.len() - 1];
    if x <= first[0] {
        return first[1];
    }
    if x >= last[0] {
        return last[1];
    }
    let i = points.partition_point(|p| p[0] <= x);
    let (a, b) = (points[i - 1], points[i]);
    a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
}

fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }

    let (fa, fb) = (f(a), f(b));
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    let scale = whole
        .abs()
        .max(fa.abs().max(fb.abs()) * (b - a))
        .max(1e-300);
    recurse(&f, a, b, fa, fm, fb, whole, 1e-13 * scale, 48)
}
