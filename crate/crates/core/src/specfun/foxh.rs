//! Fox H-functions of one and two variables by direct quadrature of the
//! Mellin–Barnes integral.
//!
//! The integrand is
//!
//! ```text
//!   Φ(s₁, s₂) = Π Γ(a + A s₁ + B s₂) / Π Γ(b + A' s₁ + B' s₂) · x^{-s₁} y^{-s₂}
//! ```
//!
//! and the H-function is `(2πi)⁻² ∫∫ Φ ds₁ ds₂` over contours that keep every
//! numerator Gamma argument in the right half plane. Evaluation uses straight
//! vertical lines `Re s₁ = c₁`, `Re s₂ = c₂` and the uniform trapezoid rule,
//! which converges geometrically for integrands analytic in a strip around the
//! line. When a single-variable numerator Gamma has poles on the wrong side of
//! its line, the residues at those poles are added explicitly, so a straight
//! line can stand in for a curved separating contour. Joint Gamma factors must
//! be separated by the lines themselves.
//!
//! All Gamma products are accumulated in log space and exponentiated once per
//! node. When every joint factor couples `s₁` and `s₂` in the same ratio, the
//! `s₁` line is traversed at the speed that puts the joint arguments of the
//! whole grid on a one-dimensional lattice, so they are evaluated `O(n)` times
//! rather than `O(n²)`.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use super::lgamma::{ln_gamma_unchecked, pole_index};
use super::SpecfunError;

/// One factor `Γ(coefficient + scale_x·s₁ + scale_y·s₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaTriple {
    pub coefficient: f64,
    pub scale_x: f64,
    pub scale_y: f64,
}

impl GammaTriple {
    pub fn new(coefficient: f64, scale_x: f64, scale_y: f64) -> Self {
        Self {
            coefficient,
            scale_x,
            scale_y,
        }
    }

    pub fn x(coefficient: f64, scale_x: f64) -> Self {
        Self::new(coefficient, scale_x, 0.0)
    }

    pub fn y(coefficient: f64, scale_y: f64) -> Self {
        Self::new(coefficient, 0.0, scale_y)
    }

    #[inline]
    fn arg(&self, s1: Complex64, s2: Complex64) -> Complex64 {
        s1 * self.scale_x + s2 * self.scale_y + self.coefficient
    }

    fn re_arg(&self, c1: f64, c2: f64) -> f64 {
        self.coefficient + self.scale_x * c1 + self.scale_y * c2
    }
}

/// Parameter blocks of a bivariate Fox H-function.
///
/// A spec with empty `*_s2` and `*_joint` blocks is univariate.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FoxHBivariateSpec {
    pub numerator_s1: Vec<GammaTriple>,
    pub denominator_s1: Vec<GammaTriple>,
    pub numerator_s2: Vec<GammaTriple>,
    pub denominator_s2: Vec<GammaTriple>,
    pub numerator_joint: Vec<GammaTriple>,
    pub denominator_joint: Vec<GammaTriple>,
}

impl FoxHBivariateSpec {
    /// Validates the block structure and checks that the integrand decays
    /// exponentially in every direction of the `(Im s₁, Im s₂)` plane.
    pub fn new(
        numerator_s1: Vec<GammaTriple>,
        denominator_s1: Vec<GammaTriple>,
        numerator_s2: Vec<GammaTriple>,
        denominator_s2: Vec<GammaTriple>,
        numerator_joint: Vec<GammaTriple>,
        denominator_joint: Vec<GammaTriple>,
    ) -> Result<Self, SpecfunError> {
        let spec = Self {
            numerator_s1,
            denominator_s1,
            numerator_s2,
            denominator_s2,
            numerator_joint,
            denominator_joint,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn univariate(
        numerator: Vec<GammaTriple>,
        denominator: Vec<GammaTriple>,
    ) -> Result<Self, SpecfunError> {
        Self::new(numerator, denominator, vec![], vec![], vec![], vec![])
    }

    pub fn is_univariate(&self) -> bool {
        self.numerator_s2.is_empty()
            && self.denominator_s2.is_empty()
            && self.numerator_joint.is_empty()
            && self.denominator_joint.is_empty()
    }

    fn validate(&self) -> Result<(), SpecfunError> {
        let all = self
            .numerator_s1
            .iter()
            .chain(&self.denominator_s1)
            .chain(&self.numerator_s2)
            .chain(&self.denominator_s2)
            .chain(&self.numerator_joint)
            .chain(&self.denominator_joint);
        for t in all {
            if !(t.coefficient.is_finite() && t.scale_x.is_finite() && t.scale_y.is_finite()) {
                return Err(SpecfunError::InvalidSpec(format!(
                    "non-finite triple {t:?}"
                )));
            }
        }
        for t in self.numerator_s1.iter().chain(&self.denominator_s1) {
            if t.scale_x == 0.0 || t.scale_y != 0.0 {
                return Err(SpecfunError::InvalidSpec(format!(
                    "s1 triple must depend on s1 only: {t:?}"
                )));
            }
        }
        for t in self.numerator_s2.iter().chain(&self.denominator_s2) {
            if t.scale_y == 0.0 || t.scale_x != 0.0 {
                return Err(SpecfunError::InvalidSpec(format!(
                    "s2 triple must depend on s2 only: {t:?}"
                )));
            }
        }
        for t in self.numerator_joint.iter().chain(&self.denominator_joint) {
            if t.scale_x == 0.0 || t.scale_y == 0.0 {
                return Err(SpecfunError::InvalidSpec(format!(
                    "joint triple must depend on both variables: {t:?}"
                )));
            }
        }
        if self.numerator_s1.is_empty() {
            return Err(SpecfunError::InvalidSpec("empty s1 numerator".into()));
        }
        let min_rate = self.min_decay_rate();
        if !(min_rate > 1e-9) {
            return Err(SpecfunError::InvalidSpec(format!(
                "integrand does not decay along vertical contours (minimum exponential rate {min_rate:.3e})"
            )));
        }
        Ok(())
    }

    /// Exponential decay rate of `|Φ|` along the unit direction `(u, v)` in the
    /// `(Im s₁, Im s₂)` plane, from `|Γ(σ + iτ)| ~ e^{-π|τ|/2}`.
    fn decay_rate(&self, u: f64, v: f64) -> f64 {
        let w = |t: &GammaTriple| (t.scale_x * u + t.scale_y * v).abs();
        let num: f64 = self
            .numerator_s1
            .iter()
            .chain(&self.numerator_s2)
            .chain(&self.numerator_joint)
            .map(w)
            .sum();
        let den: f64 = self
            .denominator_s1
            .iter()
            .chain(&self.denominator_s2)
            .chain(&self.denominator_joint)
            .map(w)
            .sum();
        0.5 * PI * (num - den)
    }

    fn min_decay_rate(&self) -> f64 {
        if self.is_univariate() {
            return self.decay_rate(1.0, 0.0).min(self.decay_rate(-1.0, 0.0));
        }
        // the rate is piecewise sinusoidal in the direction angle; minima sit
        // at kinks (where some A·u + B·v vanishes) or are negative anyway
        let mut angles: Vec<f64> = (0..1440).map(|k| k as f64 * PI / 720.0).collect();
        let all = self
            .numerator_s1
            .iter()
            .chain(&self.numerator_s2)
            .chain(&self.numerator_joint)
            .chain(&self.denominator_s1)
            .chain(&self.denominator_s2)
            .chain(&self.denominator_joint);
        for t in all {
            let th = (-t.scale_x).atan2(t.scale_y);
            angles.push(th);
            angles.push(th + PI);
        }
        angles
            .into_iter()
            .map(|th| self.decay_rate(th.cos(), th.sin()))
            .fold(f64::INFINITY, f64::min)
    }

    /// Pole-free strip for the s₁ variable of a univariate spec:
    /// `(rightmost left pole, leftmost right pole)`.
    /// `(|B/A|, sign A, sign B)` shared by all joint factors, if any.
    fn joint_lattice(&self) -> Option<(f64, i64, i64)> {
        let mut it = self.numerator_joint.iter().chain(&self.denominator_joint);
        let first = it.next()?;
        let ratio = first.scale_y.abs() / first.scale_x.abs();
        let signs = (first.scale_x.signum() as i64, first.scale_y.signum() as i64);
        for t in it {
            let r = t.scale_y.abs() / t.scale_x.abs();
            if (r / ratio - 1.0).abs() > 1e-12
                || (t.scale_x.signum() as i64, t.scale_y.signum() as i64) != signs
            {
                return None;
            }
        }
        Some((ratio, signs.0, signs.1))
    }

    /// Speed of the `s₁` line relative to the `s₂` line: `Im s₁ = stretch·τ`.
    fn s1_stretch(&self) -> f64 {
        self.joint_lattice().map_or(1.0, |(r, _, _)| r)
    }

    pub fn pole_free_strip_s1(&self) -> (f64, f64) {
        let mut left = f64::NEG_INFINITY;
        let mut right = f64::INFINITY;
        for t in &self.numerator_s1 {
            let p = -t.coefficient / t.scale_x;
            if t.scale_x > 0.0 {
                left = left.max(p);
            } else {
                right = right.min(p);
            }
        }
        (left, right)
    }
}

/// Vertical integration lines and the trapezoid grid used on them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourSpec {
    pub abscissa_s1: f64,
    pub abscissa_s2: f64,
    /// Truncation of the line parameter, `|τ| ≤ half_height`, with
    /// `Im s₂ = τ` and `Im s₁ = τ` scaled by the joint-factor ratio `|B/A|`
    /// when one exists.
    pub half_height: f64,
    pub nodes_per_axis: usize,
}

const LN_TOL: f64 = 34.0;
const MAX_NODES: usize = 6001;

impl ContourSpec {
    pub const DEFAULT_HALF_HEIGHT: f64 = 60.0;
    pub const DEFAULT_NODES: usize = 512;
    pub const MIN_NODES: usize = 64;

    pub fn new(
        abscissa_s1: f64,
        abscissa_s2: f64,
        half_height: f64,
        nodes_per_axis: usize,
    ) -> Result<Self, SpecfunError> {
        let c = Self {
            abscissa_s1,
            abscissa_s2,
            half_height,
            nodes_per_axis,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_defaults(abscissa_s1: f64, abscissa_s2: f64) -> Self {
        Self {
            abscissa_s1,
            abscissa_s2,
            half_height: Self::DEFAULT_HALF_HEIGHT,
            nodes_per_axis: Self::DEFAULT_NODES,
        }
    }

    fn validate(&self) -> Result<(), SpecfunError> {
        if !(self.half_height > 0.0 && self.half_height.is_finite()) {
            return Err(SpecfunError::InvalidContour(format!(
                "half_height must be positive, got {}",
                self.half_height
            )));
        }
        if self.nodes_per_axis < Self::MIN_NODES {
            return Err(SpecfunError::InvalidContour(format!(
                "nodes_per_axis must be at least {}, got {}",
                Self::MIN_NODES,
                self.nodes_per_axis
            )));
        }
        if !(self.abscissa_s1.is_finite() && self.abscissa_s2.is_finite()) {
            return Err(SpecfunError::InvalidContour("non-finite abscissa".into()));
        }
        Ok(())
    }

    /// Abscissa in `(lo, hi)` minimising the integrand on the real axis.
    ///
    /// For a positive Mellin transform this is the saddle point, where the
    /// integral over the line carries the least cancellation. Infinite ends
    /// are capped 40 units from the finite one.
    pub fn saddle_abscissa_univariate(
        spec: &FoxHBivariateSpec,
        x: f64,
        lo: f64,
        hi: f64,
    ) -> Result<f64, SpecfunError> {
        check_positive(x, "x")?;
        let (lo, hi) = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => (lo, hi),
            (true, false) => (lo, lo + 40.0),
            (false, true) => (hi - 40.0, hi),
            (false, false) => (-20.0, 20.0),
        };
        if !(lo < hi) {
            return Err(SpecfunError::InvalidContour(format!(
                "empty strip ({lo}, {hi})"
            )));
        }
        let margin = (0.1 * (hi - lo)).min(0.25);
        let integrand = Integrand::new(spec, x, 1.0);
        let zero = Complex64::new(0.0, 0.0);
        let f = |c: f64| {
            integrand
                .ln_full(Complex64::new(c, 0.0), zero)
                .map(|v| v.re)
                .unwrap_or(f64::INFINITY)
        };
        Ok(golden_min(f, lo + margin, hi - margin))
    }

    /// Univariate abscissa at the middle of the pole-free strip. When the
    /// strip is empty the widest gap between neighbouring poles near the
    /// overlap is used instead and the crossed poles are compensated by
    /// residues during evaluation.
    pub fn auto_abscissa_univariate(spec: &FoxHBivariateSpec) -> f64 {
        let (left, right) = spec.pole_free_strip_s1();
        match (left.is_finite(), right.is_finite()) {
            (true, true) if left < right => 0.5 * (left + right),
            (true, false) => left + 1.0,
            (false, true) => right - 1.0,
            (false, false) => 0.0,
            _ => {
                let lo = right - 1.0;
                let hi = left + 1.0;
                let mut poles = vec![lo, hi];
                for t in &spec.numerator_s1 {
                    for n in 0..200 {
                        let p = (-(n as f64) - t.coefficient) / t.scale_x;
                        if p < lo - 1.0 || p > hi + 1.0 {
                            if (t.scale_x > 0.0 && p < lo) || (t.scale_x < 0.0 && p > hi) {
                                break;
                            }
                            continue;
                        }
                        poles.push(p);
                    }
                }
                poles.sort_by(f64::total_cmp);
                let mid = 0.5 * (left + right);
                let mut best = (f64::NEG_INFINITY, mid);
                for w in poles.windows(2) {
                    let gap = w[1] - w[0];
                    let c = 0.5 * (w[0] + w[1]);
                    if c < lo || c > hi {
                        continue;
                    }
                    let better = gap > best.0 + 1e-12
                        || ((gap - best.0).abs() <= 1e-12
                            && (c - mid).abs() < (best.1 - mid).abs());
                    if better {
                        best = (gap, c);
                    }
                }
                best.1
            }
        }
    }

    /// Grid tuned to the integrand: the step follows from the distance of the
    /// lines to the nearest poles, the height from a scan of the decay.
    pub fn tuned(
        spec: &FoxHBivariateSpec,
        x: f64,
        y: f64,
        abscissa_s1: f64,
        abscissa_s2: f64,
    ) -> Result<Self, SpecfunError> {
        check_positive(x, "x")?;
        check_positive(y, "y")?;
        let plan = Plan::new(spec, x, y, abscissa_s1, abscissa_s2)?;
        let univariate = spec.is_univariate();

        let mut d1 = f64::INFINITY;
        let mut d2 = f64::INFINITY;
        let mut consider = |t: &GammaTriple, c1: f64, c2: f64| {
            let d = pole_distance(t.re_arg(c1, c2));
            if t.scale_x != 0.0 {
                d1 = d1.min(d / t.scale_x.abs());
            }
            if t.scale_y != 0.0 {
                d2 = d2.min(d / t.scale_y.abs());
            }
        };
        let mut rows = vec![abscissa_s1];
        rows.extend(plan.res1.iter().map(|r| r.pos));
        let mut cols = vec![abscissa_s2];
        cols.extend(plan.res2.iter().map(|r| r.pos));
        // single-variable factors only matter on their own line; joint
        // factors on every line/residue combination
        for t in &spec.numerator_s1 {
            consider(t, abscissa_s1, abscissa_s2);
        }
        for t in &spec.numerator_s2 {
            consider(t, abscissa_s1, abscissa_s2);
        }
        for &c1 in &rows {
            for &c2 in &cols {
                if c1 != abscissa_s1 && c2 != abscissa_s2 {
                    continue;
                }
                for t in &spec.numerator_joint {
                    let d = pole_distance(t.re_arg(c1, c2));
                    if c1 == abscissa_s1 {
                        d1 = d1.min(d / t.scale_x.abs());
                    }
                    if c2 == abscissa_s2 {
                        d2 = d2.min(d / t.scale_y.abs());
                    }
                }
            }
        }
        let d1 = d1.min(2.0);
        let d2 = d2.min(2.0);
        let stretch = spec.s1_stretch();
        let h1 = 2.0 * PI * d1 / (LN_TOL + d1 * x.ln().abs()) / stretch;
        let h = if univariate {
            h1
        } else {
            h1.min(2.0 * PI * d2 / (LN_TOL + d2 * y.ln().abs()))
        };

        let integrand = Integrand::new(spec, x, y);
        let dirs: Vec<(f64, f64)> = if univariate {
            vec![(1.0, 0.0), (-1.0, 0.0)]
        } else {
            (0..24)
                .map(|k| {
                    let th = k as f64 * PI / 12.0;
                    (th.cos(), th.sin())
                })
                .collect()
        };
        let mut t_max: f64 = 4.0;
        for (u, v) in dirs {
            let at = |r: f64| {
                let s1 = Complex64::new(abscissa_s1, stretch * r * u);
                let s2 = Complex64::new(abscissa_s2, r * v);
                integrand
                    .ln_full(s1, s2)
                    .map(|z| z.re)
                    .unwrap_or(f64::NEG_INFINITY)
            };
            let mut peak = at(0.0);
            let mut r = 0.0;
            let mut below = 0.0;
            while r < 4000.0 {
                r += 0.25;
                let val = at(r);
                if val > peak {
                    peak = val;
                    below = 0.0;
                } else if val < peak - 40.0 {
                    below += 0.25;
                    if below >= 2.0 {
                        break;
                    }
                }
            }
            t_max = t_max.max((r * u).abs()).max((r * v).abs());
        }
        let mut n = ((2.0 * t_max / h).ceil().min(MAX_NODES as f64)) as usize + 1;
        if n.is_multiple_of(2) {
            n += 1;
        }
        let n = n.clamp(Self::MIN_NODES + 1, MAX_NODES);
        Self::new(abscissa_s1, abscissa_s2, t_max, n)
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
        if b - a < 1e-6 {
            break;
        }
    }
    0.5 * (a + b)
}

fn pole_distance(re: f64) -> f64 {
    if re > 0.0 {
        re
    } else {
        (re - re.floor()).min(re.ceil() - re)
    }
}

fn check_positive(v: f64, name: &str) -> Result<(), SpecfunError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SpecfunError::InvalidArgument(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Value of a contour integral with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HValue {
    pub value: f64,
    /// Tail bound + discretisation estimate + rounding floor + imaginary residual.
    pub abs_error: f64,
    pub imag_residual: f64,
}

impl HValue {
    pub fn scaled(self, k: f64) -> Self {
        Self {
            value: self.value * k,
            abs_error: self.abs_error * k.abs(),
            imag_residual: self.imag_residual * k.abs(),
        }
    }
}

/// Single-variable Fox H-function `(2πi)⁻¹ ∫ Φ(s) x^{-s} ds` along
/// `Re s = contour.abscissa_s1`.
pub fn fox_h_univariate(
    spec: &FoxHBivariateSpec,
    x: f64,
    contour: &ContourSpec,
) -> Result<HValue, SpecfunError> {
    if !spec.is_univariate() {
        return Err(SpecfunError::InvalidSpec(
            "univariate evaluation requested for a spec with s2 dependence".into(),
        ));
    }
    fox_h_bivariate(spec, x, 1.0, contour)
}

/// Bivariate Fox H-function `(2πi)⁻² ∫∫ Φ(s₁, s₂) x^{-s₁} y^{-s₂} ds₁ ds₂`.
pub fn fox_h_bivariate(
    spec: &FoxHBivariateSpec,
    x: f64,
    y: f64,
    contour: &ContourSpec,
) -> Result<HValue, SpecfunError> {
    evaluate(spec, x, y, contour, true)
}

/// The bare line integral `(2πi)⁻² ∫∫ Φ x^{-s₁} y^{-s₂}` over
/// `Re s₁ = c₁`, `Re s₂ = c₂`, without adding residues of poles that lie on
/// the wrong side of the lines. This is the quantity produced by Mellin
/// convolution theorems whose validity strip cuts through a Gamma pole
/// sequence.
pub fn mellin_barnes_line(
    spec: &FoxHBivariateSpec,
    x: f64,
    y: f64,
    contour: &ContourSpec,
) -> Result<HValue, SpecfunError> {
    evaluate(spec, x, y, contour, false)
}

fn evaluate(
    spec: &FoxHBivariateSpec,
    x: f64,
    y: f64,
    contour: &ContourSpec,
    compensate: bool,
) -> Result<HValue, SpecfunError> {
    check_positive(x, "x")?;
    check_positive(y, "y")?;
    contour.validate()?;
    let mut plan = Plan::new(spec, x, y, contour.abscissa_s1, contour.abscissa_s2)?;
    if !compensate {
        plan.res1.clear();
        plan.res2.clear();
    }
    let integrand = Integrand::new(spec, x, y);
    let univariate = spec.is_univariate();
    let grid = Grid::new(contour, spec.s1_stretch());

    let mut total = Partial::default();
    let line1 = Point::Line(contour.abscissa_s1);
    let line2 = Point::Line(contour.abscissa_s2);
    let rows: Vec<Point> = std::iter::once(line1)
        .chain(plan.res1.iter().map(|r| Point::Pole(*r)))
        .collect();
    let cols: Vec<Point> = if univariate {
        vec![Point::Fixed(0.0)]
    } else {
        std::iter::once(line2)
            .chain(plan.res2.iter().map(|r| Point::Pole(*r)))
            .collect()
    };
    for r in &rows {
        for c in &cols {
            total.add(integrand.term(&grid, r, c)?);
        }
    }
    total.finish()
}

#[derive(Debug, Clone, Copy)]
struct Residue {
    pos: f64,
    weight: f64,
    index: usize,
}

#[derive(Debug, Clone, Copy)]
enum Point {
    Line(f64),
    Pole(Residue),
    Fixed(f64),
}

struct Plan {
    res1: Vec<Residue>,
    res2: Vec<Residue>,
}

impl Plan {
    fn new(
        spec: &FoxHBivariateSpec,
        x: f64,
        y: f64,
        c1: f64,
        c2: f64,
    ) -> Result<Self, SpecfunError> {
        let _ = (x, y);
        for t in &spec.numerator_joint {
            let re = t.re_arg(c1, c2);
            if !(re > 0.0) {
                return Err(SpecfunError::NonSeparating(format!(
                    "joint factor Γ({} + {}·s1 + {}·s2) has Re argument {re:.4} ≤ 0 at (c1, c2) = ({c1}, {c2})",
                    t.coefficient, t.scale_x, t.scale_y
                )));
            }
        }
        let res1 = crossed(&spec.numerator_s1, |t| t.scale_x, c1)?;
        let res2 = if spec.is_univariate() {
            vec![]
        } else {
            crossed(&spec.numerator_s2, |t| t.scale_y, c2)?
        };
        Ok(Self { res1, res2 })
    }
}

/// Poles of single-variable numerator factors that lie on the wrong side of
/// the line `Re s = c`, with the signed weight `(-1)^n / (n! |A|)`.
fn crossed(
    list: &[GammaTriple],
    scale: impl Fn(&GammaTriple) -> f64,
    c: f64,
) -> Result<Vec<Residue>, SpecfunError> {
    let mut out = Vec::new();
    for (index, t) in list.iter().enumerate() {
        let a = scale(t);
        let re = t.coefficient + a * c;
        if re > 0.0 {
            continue;
        }
        if re == re.round() {
            return Err(SpecfunError::NonSeparating(format!(
                "line Re s = {c} passes through a pole of Γ({} + {}·s)",
                t.coefficient, a
            )));
        }
        let mut n = 0u32;
        let mut fact = 1.0f64;
        while -(n as f64) > re {
            let pos = (-(n as f64) - t.coefficient) / a;
            let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
            out.push(Residue {
                pos,
                weight: sign / (fact * a.abs()),
                index,
            });
            n += 1;
            fact *= n as f64;
        }
    }
    Ok(out)
}

struct Integrand<'a> {
    spec: &'a FoxHBivariateSpec,
    lnx: f64,
    lny: f64,
    rate: f64,
}

// None means the integrand vanishes (a denominator Gamma sits on a pole).
type LnVal = Result<Option<Complex64>, SpecfunError>;

/// Nodes of one axis, the log of the single-variable factors at each node
/// (`None` where a reciprocal Gamma vanishes) and the node weight.
type AxisValues = (Vec<Complex64>, Vec<Option<Complex64>>, f64);

impl<'a> Integrand<'a> {
    fn new(spec: &'a FoxHBivariateSpec, x: f64, y: f64) -> Self {
        Self {
            spec,
            lnx: x.ln(),
            lny: y.ln(),
            rate: spec.min_decay_rate().max(1e-3),
        }
    }

    fn sum(
        num: &[GammaTriple],
        den: &[GammaTriple],
        s1: Complex64,
        s2: Complex64,
        skip: Option<usize>,
    ) -> LnVal {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, t) in num.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let z = t.arg(s1, s2);
            if pole_index(z).is_some() {
                return Err(SpecfunError::Degenerate {
                    position: if t.scale_x != 0.0 { s1.re } else { s2.re },
                });
            }
            acc += ln_gamma_unchecked(z);
        }
        for t in den {
            let z = t.arg(s1, s2);
            if pole_index(z).is_some() {
                return Ok(None);
            }
            acc -= ln_gamma_unchecked(z);
        }
        Ok(Some(acc))
    }

    fn ln_s1(&self, s1: Complex64, skip: Option<usize>) -> LnVal {
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self::sum(
            &self.spec.numerator_s1,
            &self.spec.denominator_s1,
            s1,
            zero,
            skip,
        )?
        .map(|v| v - s1 * self.lnx))
    }

    fn ln_s2(&self, s2: Complex64, skip: Option<usize>) -> LnVal {
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self::sum(
            &self.spec.numerator_s2,
            &self.spec.denominator_s2,
            zero,
            s2,
            skip,
        )?
        .map(|v| v - s2 * self.lny))
    }

    fn ln_joint(&self, s1: Complex64, s2: Complex64) -> LnVal {
        Self::sum(
            &self.spec.numerator_joint,
            &self.spec.denominator_joint,
            s1,
            s2,
            None,
        )
    }

    fn ln_full(&self, s1: Complex64, s2: Complex64) -> Result<Complex64, SpecfunError> {
        let mut acc = Complex64::new(0.0, 0.0);
        for part in [
            self.ln_s1(s1, None)?,
            self.ln_s2(s2, None)?,
            self.ln_joint(s1, s2)?,
        ] {
            match part {
                Some(v) => acc += v,
                None => return Ok(Complex64::new(f64::NEG_INFINITY, 0.0)),
            }
        }
        Ok(acc)
    }

    /// Values of one axis: a line gives a node vector, a pole or a fixed
    /// point a single value with unit weight.
    fn axis_values(&self, grid: &Grid, p: &Point, first: bool) -> Result<AxisValues, SpecfunError> {
        let eval = |s: Complex64, skip: Option<usize>| {
            if first {
                self.ln_s1(s, skip)
            } else {
                self.ln_s2(s, skip)
            }
        };
        match *p {
            Point::Line(c) => {
                let speed = if first { grid.stretch } else { 1.0 };
                let pts: Vec<Complex64> = grid
                    .taus
                    .iter()
                    .map(|&t| Complex64::new(c, speed * t))
                    .collect();
                let vals = pts
                    .iter()
                    .map(|&s| eval(s, None))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((pts, vals, speed * grid.h / (2.0 * PI)))
            }
            Point::Pole(r) => {
                let s = Complex64::new(r.pos, 0.0);
                let v = eval(s, Some(r.index))?;
                let w = r.weight;
                // fold the residue weight into the log value
                let v = v.map(|v| v + Complex64::new(w.abs().ln(), if w < 0.0 { PI } else { 0.0 }));
                Ok((vec![s], vec![v], 1.0))
            }
            Point::Fixed(c) => Ok((
                vec![Complex64::new(c, 0.0)],
                vec![Some(Complex64::new(0.0, 0.0))],
                1.0,
            )),
        }
    }

    fn term(&self, grid: &Grid, p1: &Point, p2: &Point) -> Result<Partial, SpecfunError> {
        let (pts1, v1, w1) = self.axis_values(grid, p1, true)?;
        let (pts2, v2, w2) = self.axis_values(grid, p2, false)?;
        let line1 = matches!(p1, Point::Line(_));
        let line2 = matches!(p2, Point::Line(_));
        let n1 = pts1.len();
        let n2 = pts2.len();
        let has_joint =
            !self.spec.numerator_joint.is_empty() || !self.spec.denominator_joint.is_empty();
        let lattice = match self.spec.joint_lattice() {
            Some((_, sa, sb)) if line1 && line2 => {
                Some(self.joint_lattice_values(&pts1, &pts2, sa, sb)?)
            }
            _ => None,
        };

        let rows: Vec<Result<Partial, SpecfunError>> = (0..n1)
            .into_par_iter()
            .map(|j| {
                let mut part = Partial::default();
                let Some(a) = v1[j] else { return Ok(part) };
                let wj = if line1 { grid.trap_weight(j) } else { 1.0 };
                let cj = line1 && j % 2 == 0;
                let edge_j = line1 && (j == 0 || j + 1 == n1);
                for k in 0..n2 {
                    let Some(b) = v2[k] else { continue };
                    let mut lv = a + b;
                    if has_joint {
                        let jv = match &lattice {
                            Some(l) => l.get(j, k),
                            None => self.ln_joint(pts1[j], pts2[k])?,
                        };
                        match jv {
                            Some(jv) => lv += jv,
                            None => continue,
                        }
                    }
                    let val = lv.exp();
                    let wk = if line2 { grid.trap_weight(k) } else { 1.0 };
                    let wt = wj * wk;
                    part.fine += val * wt;
                    part.scale += val.norm() * wt;
                    let ck = !line2 || k % 2 == 0;
                    if (cj || !line1) && ck {
                        let cw = (if line1 { grid.coarse_weight(j) } else { 1.0 })
                            * (if line2 { grid.coarse_weight(k) } else { 1.0 });
                        part.coarse += val * cw;
                    }
                    let edge = edge_j || (line2 && (k == 0 || k + 1 == n2));
                    if edge {
                        part.edge = part.edge.max(val.norm());
                    }
                }
                Ok(part)
            })
            .collect();
        let mut out = Partial::default();
        for r in rows {
            out.add(r?);
        }
        let w = w1 * w2;
        out.fine *= w;
        out.coarse *= w;
        out.scale *= w;
        // |F| beyond the truncation decays at least like e^{-rate·r}
        let t = grid.taus[grid.taus.len() - 1];
        out.tail = match (line1, line2) {
            (true, true) => out.edge * 8.0 * t / (4.0 * PI * PI * self.rate),
            (true, false) | (false, true) => out.edge * 2.0 / (2.0 * PI * self.rate),
            (false, false) => 0.0,
        };
        Ok(out)
    }
}

/// Joint log-Gamma values of a line/line block, indexed by `sa·j + sb·k`.
struct JointLattice {
    values: Vec<Option<Complex64>>,
    sa: i64,
    sb: i64,
    offset: i64,
}

impl JointLattice {
    fn get(&self, j: usize, k: usize) -> Option<Complex64> {
        self.values[(self.sa * j as i64 + self.sb * k as i64 - self.offset) as usize]
    }
}

impl Integrand<'_> {
    fn joint_lattice_values(
        &self,
        pts1: &[Complex64],
        pts2: &[Complex64],
        sa: i64,
        sb: i64,
    ) -> Result<JointLattice, SpecfunError> {
        let last = pts1.len() as i64 - 1;
        let offset = (sa * last).min(0) + (sb * last).min(0);
        let mut lattice = JointLattice {
            values: vec![None; (2 * last + 1) as usize],
            sa,
            sb,
            offset,
        };
        // the edges k = 0, j = 0 and j = last reach every index
        let n = pts1.len();
        let pairs = (0..n)
            .map(|j| (j, 0))
            .chain((0..n).map(|k| (0, k)))
            .chain((0..n).map(|k| (n - 1, k)));
        for (j, k) in pairs {
            let m = (sa * j as i64 + sb * k as i64 - offset) as usize;
            if lattice.values[m].is_none() {
                lattice.values[m] = Some(
                    self.ln_joint(pts1[j], pts2[k])?
                        .unwrap_or(Complex64::new(f64::NEG_INFINITY, 0.0)),
                );
            }
        }
        Ok(lattice)
    }
}

struct Grid {
    taus: Vec<f64>,
    h: f64,
    stretch: f64,
}

impl Grid {
    fn new(c: &ContourSpec, stretch: f64) -> Self {
        let n = c.nodes_per_axis;
        let h = 2.0 * c.half_height / (n - 1) as f64;
        let taus = (0..n).map(|j| -c.half_height + j as f64 * h).collect();
        Self { taus, h, stretch }
    }

    fn trap_weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.taus.len() {
            0.5
        } else {
            1.0
        }
    }

    // the coarse rule uses even-indexed nodes with doubled step
    fn coarse_weight(&self, j: usize) -> f64 {
        let last_even = (self.taus.len() - 1) & !1;
        if j == 0 || j == last_even {
            1.0
        } else {
            2.0
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Partial {
    fine: Complex64,
    coarse: Complex64,
    scale: f64,
    edge: f64,
    tail: f64,
}

impl Partial {
    fn add(&mut self, o: Partial) {
        self.fine += o.fine;
        self.coarse += o.coarse;
        self.scale += o.scale;
        self.edge = self.edge.max(o.edge);
        self.tail += o.tail;
    }

    fn finish(self) -> Result<HValue, SpecfunError> {
        let value = self.fine.re;
        let delta = (self.fine - self.coarse).norm();
        let scale = self.scale.max(f64::MIN_POSITIVE);
        let tail = self.tail;
        if delta > 0.5 * scale && delta > 1e-300 {
            return Err(SpecfunError::Oscillation {
                fine: self.fine.re,
                coarse: self.coarse.re,
            });
        }
        if tail > 1e-8 * scale {
            return Err(SpecfunError::Accuracy {
                tail_bound: tail,
                scale,
            });
        }
        // geometric convergence: halving the step squares the relative error
        let disc = delta * (delta / scale).min(1.0);
        let round = 64.0 * f64::EPSILON * scale;
        let imag = self.fine.im.abs();
        Ok(HValue {
            value,
            abs_error: tail + disc + round + imag,
            imag_residual: imag,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_spec() -> FoxHBivariateSpec {
        // G^{1,0}_{0,1}(x | -; 0) = e^{-x} = (2πi)⁻¹ ∫ Γ(s) x^{-s} ds
        FoxHBivariateSpec::univariate(vec![GammaTriple::x(0.0, 1.0)], vec![]).unwrap()
    }

    #[test]
    fn exponential_identity() {
        let spec = exp_spec();
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            let c = ContourSpec::tuned(&spec, x, 1.0, 0.5, 0.0).unwrap();
            let v = fox_h_univariate(&spec, x, &c).unwrap();
            assert!(
                ((v.value - (-x).exp()) / (-x).exp()).abs() < 1e-10,
                "x={x}: {v:?}"
            );
        }
    }

    #[test]
    fn default_contour_works_for_exponential() {
        let spec = exp_spec();
        let c = ContourSpec::with_defaults(0.5, 0.0);
        let v = fox_h_univariate(&spec, 1.0, &c).unwrap();
        let err = (v.value - (-1.0f64).exp()).abs();
        assert!(err < 1e-5 && err <= v.abs_error, "{v:?}");
    }

    #[test]
    fn crossed_poles_are_compensated() {
        // same integral with the line moved left past the poles at 0, -1, -2
        let spec = exp_spec();
        for c1 in [-0.5, -1.5, -2.5] {
            let c = ContourSpec::tuned(&spec, 2.0, 1.0, c1, 0.0).unwrap();
            let v = fox_h_univariate(&spec, 2.0, &c).unwrap();
            assert!((v.value - (-2.0f64).exp()).abs() < 1e-10, "c1={c1}: {v:?}");
        }
    }

    #[test]
    fn right_poles_are_compensated() {
        // Γ(1 - s) Γ(s) x^{-s} = π/sin(πs) x^{-s} → 1/(1+x) for 0 < c < 1
        let spec = FoxHBivariateSpec::univariate(
            vec![GammaTriple::x(0.0, 1.0), GammaTriple::x(1.0, -1.0)],
            vec![],
        )
        .unwrap();
        let x = 0.7;
        for c1 in [0.5, 1.5, 2.5, -0.5] {
            let c = ContourSpec::tuned(&spec, x, 1.0, c1, 0.0).unwrap();
            let v = fox_h_univariate(&spec, x, &c).unwrap();
            assert!((v.value - 1.0 / (1.0 + x)).abs() < 1e-10, "c1={c1}: {v:?}");
        }
    }

    #[test]
    fn non_decaying_spec_rejected() {
        let r = FoxHBivariateSpec::univariate(
            vec![GammaTriple::x(0.0, 1.0)],
            vec![GammaTriple::x(1.0, 1.0)],
        );
        assert!(matches!(r, Err(SpecfunError::InvalidSpec(_))));
    }

    #[test]
    fn block_structure_checked() {
        let r = FoxHBivariateSpec::new(
            vec![GammaTriple::new(0.0, 1.0, 1.0)],
            vec![],
            vec![],
            vec![],
            vec![],
            vec![],
        );
        assert!(matches!(r, Err(SpecfunError::InvalidSpec(_))));
    }

    #[test]
    fn joint_factor_must_be_separated() {
        let spec = FoxHBivariateSpec::new(
            vec![GammaTriple::x(0.0, 1.0)],
            vec![],
            vec![GammaTriple::y(0.0, 1.0)],
            vec![],
            vec![GammaTriple::new(0.0, 1.0, -1.0)],
            vec![],
        )
        .unwrap();
        let c = ContourSpec::with_defaults(0.2, 0.5);
        assert!(matches!(
            fox_h_bivariate(&spec, 1.0, 1.0, &c),
            Err(SpecfunError::NonSeparating(_))
        ));
    }

    #[test]
    fn contour_validation() {
        assert!(ContourSpec::new(0.5, 0.5, 10.0, 63).is_err());
        assert!(ContourSpec::new(0.5, 0.5, 0.0, 128).is_err());
        assert!(ContourSpec::new(0.5, 0.5, 10.0, 64).is_ok());
    }

    #[test]
    fn auto_abscissa_midpoint() {
        let spec = FoxHBivariateSpec::univariate(
            vec![GammaTriple::x(0.0, 1.0), GammaTriple::x(1.0, -1.0)],
            vec![],
        )
        .unwrap();
        assert!((ContourSpec::auto_abscissa_univariate(&spec) - 0.5).abs() < 1e-15);
    }

    fn trinomial_spec(a: f64) -> FoxHBivariateSpec {
        // (2πi)⁻² ∫∫ Γ(s₁)Γ(s₂)Γ(a - s₁ - s₂)/Γ(a) x^{-s₁} y^{-s₂} = (1 + x + y)^{-a}
        FoxHBivariateSpec::new(
            vec![GammaTriple::x(0.0, 1.0)],
            vec![],
            vec![GammaTriple::y(0.0, 1.0)],
            vec![],
            vec![GammaTriple::new(a, -1.0, -1.0)],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn bivariate_trinomial() {
        let a: f64 = 2.5;
        let spec = trinomial_spec(a);
        let g = crate::specfun::gamma_real(a).unwrap();
        for &(x, y) in &[(0.5f64, 0.5f64), (2.0, 0.1), (10.0, 30.0), (1e-3, 5.0)] {
            let c = ContourSpec::tuned(&spec, x, y, 0.8, 0.8).unwrap();
            let v = fox_h_bivariate(&spec, x, y, &c).unwrap().scaled(1.0 / g);
            let exact = (1.0 + x + y).powf(-a);
            assert!(
                ((v.value - exact) / exact).abs() < 1e-8,
                "({x},{y}): {v:?} vs {exact}"
            );
        }
    }

    #[test]
    fn bivariate_with_crossed_s2_poles() {
        let a: f64 = 1.5;
        let spec = trinomial_spec(a);
        let g = crate::specfun::gamma_real(a).unwrap();
        let (x, y): (f64, f64) = (0.3, 0.4);
        let exact = (1.0 + x + y).powf(-a);
        for c2 in [0.3, -0.5, -1.5] {
            let c = ContourSpec::tuned(&spec, x, y, 0.5, c2).unwrap();
            let v = fox_h_bivariate(&spec, x, y, &c).unwrap().scaled(1.0 / g);
            assert!(((v.value - exact) / exact).abs() < 1e-8, "c2={c2}: {v:?}");
        }
    }

    #[test]
    fn separable_product() {
        let spec = FoxHBivariateSpec::new(
            vec![GammaTriple::x(0.0, 1.0)],
            vec![],
            vec![GammaTriple::y(1.0, 2.0)],
            vec![],
            vec![],
            vec![],
        )
        .unwrap();
        let (x, y): (f64, f64) = (1.3, 0.6);
        let c = ContourSpec::tuned(&spec, x, y, 0.5, 0.2).unwrap();
        let v = fox_h_bivariate(&spec, x, y, &c).unwrap();
        // (2πi)⁻¹ ∫ Γ(1 + 2s) y^{-s} ds = √y e^{-√y} / 2
        let exact = (-x).exp() * y.sqrt() * (-y.sqrt()).exp() / 2.0;
        assert!(((v.value - exact) / exact).abs() < 1e-8, "{v:?} vs {exact}");
    }
}
