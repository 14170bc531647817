//! Speed functions `a(x) > 0` and the reversible measure `μ(dx) = a(x)⁻¹dx`.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quad::{self, Estimate, Tolerance};
use crate::symbol::read_two_column_csv;

/// Tabulated speed: samples `(x_i, a(x_i))`, monotone-cubic interpolation and
/// `a(x) = a(x_end)·(|x|/|x_end|)^{tail_power}` beyond either end.
///
/// A grid starting at `x = 0` describes the even function `a(|x|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedSpeed {
    curve: MonotoneCubic,
    tail_power: Option<f64>,
    /// `suffix[i] = ∫_{x_i}^{x_last} a⁻¹`.
    suffix: Vec<f64>,
    mirrored: bool,
}

const TABLE_TOL: Tolerance = Tolerance {
    atol: 1e-14,
    rtol: 1e-12,
    max_subdivisions: 2000,
};

impl TabulatedSpeed {
    pub fn new(xs: Vec<f64>, a: Vec<f64>, tail_power: Option<f64>) -> Result<Self> {
        if a.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::invalid("tabulated speed values must be positive"));
        }
        if let Some(p) = tail_power {
            if !p.is_finite() {
                return Err(Error::invalid("tail power must be finite"));
            }
        }
        let mirrored = xs.first() == Some(&0.0);
        let curve = MonotoneCubic::new(xs, a)?;
        let nodes = curve.nodes();
        if !mirrored && (nodes[0] >= 0.0 || nodes[nodes.len() - 1] <= 0.0) {
            return Err(Error::invalid(
                "tabulated speed grid must start at 0 or straddle the origin",
            ));
        }
        let mut suffix = vec![0.0; nodes.len()];
        for i in (0..nodes.len() - 1).rev() {
            let seg = quad::adaptive(|y| Ok(1.0 / curve.eval(y)), nodes[i], nodes[i + 1], &TABLE_TOL)?;
            suffix[i] = suffix[i + 1] + seg.value;
        }
        Ok(TabulatedSpeed {
            curve,
            tail_power,
            suffix,
            mirrored,
        })
    }

    /// Reads a two-column CSV `x,a` (a header row is optional).
    pub fn from_csv(path: &Path, tail_power: Option<f64>) -> Result<Self> {
        let (xs, a) = read_two_column_csv(path)?;
        Self::new(xs, a, tail_power)
    }

    pub fn tail_power(&self) -> Option<f64> {
        self.tail_power
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    pub fn nodes(&self) -> &[f64] {
        self.curve.nodes()
    }

    fn eval(&self, x: f64) -> Result<f64> {
        let x = if self.mirrored { x.abs() } else { x };
        let (x0, a0) = self.curve.first();
        let (xn, an) = self.curve.last();
        if (x0..=xn).contains(&x) {
            return Ok(self.curve.eval(x));
        }
        let (xe, ae) = if x > xn { (xn, an) } else { (x0, a0) };
        match self.tail_power {
            Some(p) => Ok(ae * (x / xe).powf(p)),
            None => Err(Error::Extrapolation { xi: x, last: xe }),
        }
    }

    /// `∫_{r0}^{r1} (r/r0)^{−p} dr / a0`, `r1` possibly infinite.
    fn power_mass(&self, a0: f64, r0: f64, r1: f64) -> Result<f64> {
        if r1 <= r0 {
            return Ok(0.0);
        }
        let Some(p) = self.tail_power else {
            return Err(Error::Extrapolation { xi: r1, last: r0 });
        };
        let t = r1 / r0;
        let m = if (p - 1.0).abs() < 1e-12 {
            t.ln()
        } else if t.is_infinite() {
            if p > 1.0 {
                1.0 / (p - 1.0)
            } else {
                f64::INFINITY
            }
        } else {
            (1.0 - t.powf(1.0 - p)) / (p - 1.0)
        };
        Ok(r0 / a0 * m)
    }

    /// `∫_x^∞ a⁻¹` for `x ≥ x_0`.
    fn right_of(&self, x: f64) -> Result<f64> {
        let nodes = self.curve.nodes();
        let (xn, an) = self.curve.last();
        if x >= xn {
            let all = self.power_mass(an, xn, f64::INFINITY)?;
            return Ok(all - self.power_mass(an, xn, x)?);
        }
        let right_tail = self.power_mass(an, xn, f64::INFINITY)?;
        let i = nodes.partition_point(|&n| n <= x) - 1;
        let part = quad::adaptive(|y| Ok(1.0 / self.curve.eval(y)), x, nodes[i + 1], &TABLE_TOL)?;
        Ok(part.value + self.suffix[i + 1] + right_tail)
    }

    /// `∫_{−∞}^{x_0} a⁻¹` on a two-sided grid.
    fn left_tail(&self) -> Result<f64> {
        let (x0, a0) = self.curve.first();
        self.power_mass(a0, -x0, f64::INFINITY)
    }

    /// `μ((x, ∞))`.
    fn mu_right(&self, x: f64) -> Result<f64> {
        let (x0, a0) = self.curve.first();
        if self.mirrored {
            return if x >= 0.0 {
                self.right_of(x)
            } else {
                Ok(2.0 * self.right_of(0.0)? - self.right_of(-x)?)
            };
        }
        if x < x0 {
            return Ok(self.power_mass(a0, -x0, -x)? + self.right_of(x0)?);
        }
        self.right_of(x)
    }

    /// `μ((−∞, x))`.
    fn mu_left(&self, x: f64) -> Result<f64> {
        if self.mirrored {
            return self.mu_right(-x);
        }
        let (x0, a0) = self.curve.first();
        let left_tail = self.left_tail()?;
        if x <= x0 {
            return Ok(left_tail - self.power_mass(a0, -x0, -x)?);
        }
        let from_x0 = self.right_of(x0)? - self.right_of(x)?;
        Ok(left_tail + from_x0)
    }

    /// `∫_lo^hi a⁻¹` by direct quadrature, cut at the nodes.
    fn interval(&self, lo: f64, hi: f64) -> Result<f64> {
        let mut cuts = vec![lo, hi];
        for &n in self.nodes() {
            for c in [n, -n] {
                if c > lo && c < hi && (self.mirrored || c == n) {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut v = 0.0;
        for w in cuts.windows(2) {
            v += quad::adaptive(|y| Ok(1.0 / self.eval(y)?), w[0], w[1], &TABLE_TOL)?.value;
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpeedFamily {
    /// `a(x) = e^{b|x|}`
    ExpGrowth { b: f64 },
    /// `a(x) = c(1 + |x|)^p`
    PolyGrowth { p: f64, c: f64 },
    /// `a(x) ≡ c` (infinite mass; used for clock checks)
    Constant { c: f64 },
    Tabulated(TabulatedSpeed),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeedFunction {
    family: SpeedFamily,
}

impl SpeedFunction {
    pub fn exp_growth(b: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::invalid(format!("exponential rate must be positive, got {b}")));
        }
        Ok(SpeedFunction {
            family: SpeedFamily::ExpGrowth { b },
        })
    }

    pub fn poly_growth(p: f64, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite() && p.is_finite()) {
            return Err(Error::invalid(format!("polynomial speed needs c > 0 and finite p, got p = {p}, c = {c}")));
        }
        Ok(SpeedFunction {
            family: SpeedFamily::PolyGrowth { p, c },
        })
    }

    pub fn constant(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("constant speed must be positive, got {c}")));
        }
        Ok(SpeedFunction {
            family: SpeedFamily::Constant { c },
        })
    }

    pub fn tabulated(t: TabulatedSpeed) -> Self {
        SpeedFunction {
            family: SpeedFamily::Tabulated(t),
        }
    }

    pub fn family(&self) -> &SpeedFamily {
        &self.family
    }

    /// `a(x)`.
    pub fn a(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(Error::domain(format!("speed evaluated at non-finite x = {x}")));
        }
        Ok(match &self.family {
            SpeedFamily::ExpGrowth { b } => (b * x.abs()).exp(),
            SpeedFamily::PolyGrowth { p, c } => c * (1.0 + x.abs()).powf(*p),
            SpeedFamily::Constant { c } => *c,
            SpeedFamily::Tabulated(t) => return t.eval(x),
        })
    }

    /// `a(x)⁻¹`, the density of `μ`.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(match &self.family {
            SpeedFamily::ExpGrowth { b } => (-b * x.abs()).exp(),
            SpeedFamily::PolyGrowth { p, c } => (1.0 + x.abs()).powf(-p) / c,
            _ => 1.0 / self.a(x)?,
        })
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.family {
            SpeedFamily::Tabulated(t) => t.is_mirrored(),
            _ => true,
        }
    }

    /// Length scale used to size quadrature panels.
    pub fn scale(&self) -> f64 {
        match &self.family {
            SpeedFamily::ExpGrowth { b } => 1.0 / b,
            _ => 1.0,
        }
    }

    fn infinite(&self, what: &str) -> Error {
        Error::InfiniteMass(format!("{what} of μ(dx) = dx/a(x) diverges for speed {self}"))
    }

    /// `μ((x, ∞))` for any real `x`.
    pub fn mu_right(&self, x: f64) -> Result<f64> {
        let v = match &self.family {
            SpeedFamily::ExpGrowth { b } => {
                if x >= 0.0 {
                    (-b * x).exp() / b
                } else {
                    (2.0 - (b * x).exp()) / b
                }
            }
            SpeedFamily::PolyGrowth { p, c } => {
                if *p <= 1.0 {
                    f64::INFINITY
                } else {
                    let tail = |r: f64| (1.0 + r).powf(1.0 - p) / (c * (p - 1.0));
                    if x >= 0.0 {
                        tail(x)
                    } else {
                        2.0 * tail(0.0) - tail(-x)
                    }
                }
            }
            SpeedFamily::Constant { .. } => f64::INFINITY,
            SpeedFamily::Tabulated(t) => t.mu_right(x)?,
        };
        if v.is_finite() {
            Ok(v.max(0.0))
        } else {
            Err(self.infinite("right tail"))
        }
    }

    /// `μ((−∞, x))` for any real `x`.
    pub fn mu_left(&self, x: f64) -> Result<f64> {
        match &self.family {
            SpeedFamily::Tabulated(t) => {
                let v = t.mu_left(x)?;
                if v.is_finite() {
                    Ok(v.max(0.0))
                } else {
                    Err(self.infinite("left tail"))
                }
            }
            _ => self.mu_right(-x),
        }
    }

    /// `μ((−x, x)ᶜ)` for `x ≥ 0`.
    pub fn mu_tail(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) {
            return Err(Error::domain(format!("μ tail needs x ≥ 0, got {x}")));
        }
        Ok(self.mu_right(x)? + self.mu_left(-x)?)
    }

    /// `μ(ℝ)`.
    pub fn mu_total(&self) -> Result<f64> {
        self.mu_tail(0.0)
    }

    /// `μ((lo, hi))`; finite for every bounded interval.
    pub fn mu_interval(&self, lo: f64, hi: f64) -> Result<f64> {
        if hi <= lo {
            return Ok(0.0);
        }
        match &self.family {
            SpeedFamily::Constant { c } => Ok((hi - lo) / c),
            SpeedFamily::Tabulated(t) => t.interval(lo, hi),
            SpeedFamily::PolyGrowth { p, .. } if *p <= 1.0 => {
                let tol = Tolerance::new(1e-14, 1e-12);
                let mut v = 0.0;
                let mut pts = vec![lo, hi];
                if lo < 0.0 && hi > 0.0 {
                    pts.insert(1, 0.0);
                }
                for w in pts.windows(2) {
                    v += quad::adaptive(|y| self.density(y), w[0], w[1], &tol)?.value;
                }
                Ok(v)
            }
            _ => {
                let total = self.mu_total()?;
                Ok((total - self.mu_left(lo)? - self.mu_right(hi)?).max(0.0))
            }
        }
    }

    /// Fails with an infinite-mass error unless `μ(ℝ) < ∞`.
    pub fn require_finite_mass(&self) -> Result<f64> {
        self.mu_total()
    }

    /// `∫ f dμ` over ℝ, with the line cut at `0` and at `breaks`.
    pub fn mu_integral<F>(&self, mut f: F, breaks: &[f64], tol: &Tolerance) -> Result<Estimate>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut cuts = vec![0.0];
        cuts.extend_from_slice(breaks);
        quad::whole_line(
            |y| {
                let d = self.density(y)?;
                if d == 0.0 {
                    return Ok(0.0);
                }
                Ok(f(y)? * d)
            },
            &cuts,
            self.scale(),
            tol,
        )
    }
}

impl fmt::Display for SpeedFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            SpeedFamily::ExpGrowth { b } => write!(f, "exp_growth(b={b})"),
            SpeedFamily::PolyGrowth { p, c } => write!(f, "poly_growth(p={p},c={c})"),
            SpeedFamily::Constant { c } => write!(f, "constant(c={c})"),
            SpeedFamily::Tabulated(t) => write!(
                f,
                "tabulated(nodes={},tail_power={})",
                t.nodes().len(),
                t.tail_power.map_or("none".to_string(), |p| p.to_string())
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn tol() -> Tolerance {
        Tolerance::new(1e-12, 1e-10)
    }

    fn finite_presets() -> Vec<SpeedFunction> {
        vec![
            SpeedFunction::exp_growth(1.0).unwrap(),
            SpeedFunction::exp_growth(2.5).unwrap(),
            SpeedFunction::poly_growth(3.0, 1.0).unwrap(),
            SpeedFunction::poly_growth(1.5, 0.5).unwrap(),
            SpeedFunction::tabulated(
                TabulatedSpeed::new(vec![0.0, 1.0, 2.0, 4.0], vec![1.0, 2.0, 5.0, 20.0], Some(3.0)).unwrap(),
            ),
            SpeedFunction::tabulated(
                TabulatedSpeed::new(vec![-3.0, -1.0, 0.5, 2.0], vec![9.0, 1.0, 1.5, 4.0], Some(2.0)).unwrap(),
            ),
        ]
    }

    #[test]
    fn exp_growth_examples() {
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        assert_relative_eq!(sp.mu_tail(1.0).unwrap(), 2.0 * (-1f64).exp(), max_relative = 1e-15);
        assert_relative_eq!(sp.mu_tail(1.0).unwrap(), 0.7357589, epsilon = 1e-7);
        assert_eq!(sp.mu_total().unwrap(), 2.0);
        assert_eq!(sp.mu_tail(0.0).unwrap(), sp.mu_total().unwrap());
        let half_abs = sp.mu_integral(|y| Ok(y.abs() / 2.0), &[], &tol()).unwrap();
        assert!((half_abs.value - 1.0).abs() < 1e-9, "{half_abs:?}");
    }

    #[test]
    fn poly_growth_examples() {
        let sp = SpeedFunction::poly_growth(3.0, 1.0).unwrap();
        assert_relative_eq!(sp.mu_tail(1.0).unwrap(), 0.25, max_relative = 1e-14);
        assert_relative_eq!(sp.mu_total().unwrap(), 1.0, max_relative = 1e-14);
        assert!(matches!(
            SpeedFunction::poly_growth(1.0, 1.0).unwrap().mu_total(),
            Err(Error::InfiniteMass(_))
        ));
    }

    #[test]
    fn tabulated_infinite_mass() {
        let t = TabulatedSpeed::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.5, 2.0], Some(0.5)).unwrap();
        let sp = SpeedFunction::tabulated(t);
        assert!(matches!(sp.mu_total(), Err(Error::InfiniteMass(_))));
        assert!(sp.mu_interval(-5.0, 5.0).unwrap().is_finite());
    }

    #[test]
    fn tabulated_without_tail_power_refuses_to_extrapolate() {
        let t = TabulatedSpeed::new(vec![0.0, 1.0, 2.0], vec![1.0, 1.5, 2.0], None).unwrap();
        let sp = SpeedFunction::tabulated(t);
        assert!(matches!(sp.a(3.0), Err(Error::Extrapolation { .. })));
        assert!(sp.mu_total().is_err());
    }

    #[test]
    fn tabulated_reproduces_closed_form_tail() {
        // a(x) = (1+|x|)^3 sampled densely and extended with its asymptotic power.
        let xs: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.1).collect();
        let a: Vec<f64> = xs.iter().map(|x| (1.0 + x).powi(3)).collect();
        let sp = SpeedFunction::tabulated(TabulatedSpeed::new(xs, a, Some(3.0)).unwrap());
        let exact = SpeedFunction::poly_growth(3.0, 1.0).unwrap();
        for x in [0.0, 0.3, 1.0, 7.7, 50.0] {
            let (got, want) = (sp.mu_tail(x).unwrap(), exact.mu_tail(x).unwrap());
            assert!((got - want).abs() < 1e-4 * want.max(1e-2), "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn indicator_integral_is_tail() {
        let sp = SpeedFunction::exp_growth(1.0).unwrap();
        let est = sp
            .mu_integral(|y| Ok(if y.abs() >= 1.0 { 1.0 } else { 0.0 }), &[-1.0, 1.0], &tol())
            .unwrap();
        assert!((est.value - sp.mu_tail(1.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn presets_are_consistent() {
        for sp in finite_presets() {
            let total = sp.mu_total().unwrap();
            let by_quad = sp.mu_integral(|_| Ok(1.0), &[], &tol()).unwrap();
            assert!((by_quad.value - total).abs() < 1e-8 * total, "{sp}: {by_quad:?} vs {total}");
            let odd = sp.mu_integral(|y| Ok(y.signum() * y.abs().min(1.0)), &[], &tol()).unwrap();
            if sp.is_symmetric() {
                assert!(odd.value.abs() < 1e-9, "{sp}: {odd:?}");
            }
            assert!(sp.mu_tail(1e12).unwrap() < 1e-5 * total, "{sp}");
        }
    }

    proptest! {
        #[test]
        fn tail_is_monotone_and_additive(x in 0.0f64..20.0, dx in 0.0f64..5.0) {
            for sp in finite_presets() {
                let t1 = sp.mu_tail(x).unwrap();
                let t2 = sp.mu_tail(x + dx).unwrap();
                prop_assert!(t2 <= t1 + 1e-14);
                let mut cuts = vec![-x, x];
                cuts.extend([-4.0f64, -3.0, -2.0, -1.0, 0.0, 0.5, 1.0, 2.0, 4.0].iter().filter(|c| c.abs() < x));
                cuts.sort_by(f64::total_cmp);
                let inner: f64 = cuts
                    .windows(2)
                    .map(|w| quad::adaptive(|y| sp.density(y), w[0], w[1], &tol()).unwrap().value)
                    .sum();
                let total = sp.mu_total().unwrap();
                prop_assert!((t1 + inner - total).abs() < 1e-8 * total, "{} {} {} {}", sp, t1, inner, total);
            }
        }

        #[test]
        fn one_sided_masses_add_up(x in -10.0f64..10.0) {
            for sp in finite_presets() {
                let total = sp.mu_total().unwrap();
                let sum = sp.mu_left(x).unwrap() + sp.mu_right(x).unwrap();
                prop_assert!((sum - total).abs() < 1e-9 * total);
            }
        }
    }
}
