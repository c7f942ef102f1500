//! Closed-form scaling functions and rigorous upper bounds.
//!
//! Everything here is evaluated in log space: the interesting regimes have
//! p → 0, where threshold lengths are exponential (2D) or doubly exponential
//! (3D) in the scaling function f, and the raw bound expressions routinely
//! leave f64 range. Probabilities are carried as [`ProbBound`] (the natural
//! log of the raw expression plus a clamp flag — bounds above 1 are vacuous
//! but the raw value is preserved for comparison), lengths as [`Length`]
//! (either ln L or ln ln L, printed in `lnln:` form when the value itself
//! is unrepresentable).
//!
//! Conventions: radii are named a ≤ b (≤ c easiest direction); s = c+1 is
//! the slice thickness of the enhancement that the crossing bounds are
//! derived from, and q ≤ sp is the resulting per-minicolumn occupation
//! probability. ε is the margin by which stepping-stone diameters stay
//! below the critical-droplet scale p^{−b}; the same default is shared with
//! the enhancement module.

use std::fmt;

use crate::error::{Error, Result};
use crate::lattice::NeighborhoodSpec;
use crate::regions;

/// Shared default margin ε.
pub const DEFAULT_EPS: f64 = 0.25;

/// Constants for the 2D symmetric droplet density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DropletConstants {
    /// π²/18.
    pub c_h: f64,
    /// 2·c_h = π²/9.
    pub two_c_h: f64,
}

impl DropletConstants {
    pub fn new() -> Self {
        let c_h = std::f64::consts::PI.powi(2) / 18.0;
        DropletConstants { c_h, two_c_h: 2.0 * c_h }
    }
}

impl Default for DropletConstants {
    fn default() -> Self {
        Self::new()
    }
}

/// Which scaling function applies: symmetric radii (f = p^{−a}) or distinct
/// (f = p^{−a} ln² p).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingForm {
    Aa,
    Ab,
}

impl ScalingForm {
    pub fn of(a: u32, b: u32) -> Self {
        if a == b {
            ScalingForm::Aa
        } else {
            ScalingForm::Ab
        }
    }
}

impl fmt::Display for ScalingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalingForm::Aa => "f_aa",
            ScalingForm::Ab => "f_ab",
        })
    }
}

/// A length stored in whichever log scale keeps it representable:
/// `Ln(v)` means L = e^v, `LnLn(w)` means L = e^(e^w).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Length {
    Ln(f64),
    LnLn(f64),
}

/// Largest x with e^x finite in f64.
const MAX_EXP: f64 = 709.78;

impl Length {
    /// ln L; +∞ if even the log overflows.
    pub fn ln(&self) -> f64 {
        match *self {
            Length::Ln(v) => v,
            Length::LnLn(w) => {
                if w > MAX_EXP {
                    f64::INFINITY
                } else {
                    w.exp()
                }
            }
        }
    }

    /// The length itself, when representable.
    pub fn value(&self) -> Option<f64> {
        let l = self.ln();
        if l <= MAX_EXP {
            Some(l.exp())
        } else {
            None
        }
    }

    /// True iff `self` ≤ `other`, comparing in matching log scales.
    pub fn leq(&self, other: &Length) -> bool {
        match (*self, *other) {
            (Length::Ln(x), Length::Ln(y)) => x <= y,
            (Length::LnLn(x), Length::LnLn(y)) => x <= y,
            _ => self.ln() <= other.ln(),
        }
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value() {
            Some(v) => write!(f, "{v}"),
            None => {
                let w = match *self {
                    Length::Ln(v) => v.ln(),
                    Length::LnLn(w) => w,
                };
                write!(f, "lnln:{w}")
            }
        }
    }
}

/// Threshold-length bracket [L⁻, L⁺] for one model at one p.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdBracket {
    pub l_minus: Length,
    pub l_plus: Length,
    pub gamma: f64,
    pub big_gamma: f64,
    pub form: ScalingForm,
}

/// A probability bound kept as the log of the raw expression. Values above
/// 1 are vacuous as probabilities; they are clamped only when read through
/// [`ProbBound::value`], and the event is flagged so callers can tell a
/// meaningful bound from a vacuous one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbBound {
    /// Natural log of the raw (unclamped) bound.
    pub ln_raw: f64,
    /// True iff the raw bound exceeds 1.
    pub clamped: bool,
}

impl ProbBound {
    pub fn from_ln(ln_raw: f64) -> Self {
        ProbBound { ln_raw, clamped: ln_raw > 0.0 }
    }

    /// The bound as a probability in [0,1].
    pub fn value(&self) -> f64 {
        if self.clamped {
            1.0
        } else {
            self.ln_raw.exp()
        }
    }
}

impl fmt::Display for ProbBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clamped {
            write!(f, "1 (clamped, ln_raw={})", self.ln_raw)
        } else {
            write!(f, "{}", self.value())
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::BadProbability { value: p, expected: "(0, 1)" });
    }
    Ok(())
}

fn check_radii(a: u32, b: u32) -> Result<()> {
    if a < 1 || b < a {
        return Err(Error::BadParameter(format!(
            "radii must satisfy 1 <= a <= b, got a={a} b={b}"
        )));
    }
    Ok(())
}

/// The threshold scaling function: p^{−a} for symmetric radii, p^{−a}·ln²p
/// otherwise (the ln² factor degenerates to a lower-order term when a = b).
pub fn f_scaling(a: u32, b: u32, p: f64) -> Result<f64> {
    check_p(p)?;
    check_radii(a, b)?;
    let inv = (-(a as f64) * p.ln()).exp();
    Ok(if a == b { inv } else { inv * p.ln().powi(2) })
}

/// Density of critical droplets for the symmetric radius-1 2D model:
/// exp(−2·C_H/p) with C_H = π²/18.
pub fn droplet_density_11(p: f64) -> Result<f64> {
    check_p(p)?;
    Ok((-DropletConstants::new().two_c_h / p).exp())
}

/// Effective densities (p̃, p̂) absorbing placement multiplicity: a
/// length-(2r+1) window holds an occupied run of r sites in C(2r+1, r)
/// positions, so run events are dominated by independent occupation at
/// C(2r+1, r)^{1/r}·p. p̃ carries the b-run factor, p̂ the a-run factor.
/// Either exceeding 1 makes the rectangle bounds vacuous at this p.
pub fn effective_densities(a: u32, b: u32, p: f64) -> Result<(f64, f64)> {
    check_radii(a, b)?;
    check_p(p)?;
    let factor = |r: u32| -> f64 {
        let mut c = 1.0f64;
        for i in 1..=r as u64 {
            c *= (r as u64 + 1 + i) as f64 / i as f64;
        }
        c.powf(1.0 / r as f64)
    };
    Ok((factor(b) * p, factor(a) * p))
}

/// ln of one min-argument of the rectangle bounds:
/// (1 − (1 − p^inner)^rows)^cols, stable for tiny p.
fn rect_arm_ln(cols: u64, rows: u64, inner: u32, p: f64) -> f64 {
    let q_ln = (inner as f64) * p.ln();
    let miss_ln = (rows as f64) * (-q_ln.exp()).ln_1p();
    (cols as f64) * (-miss_ln.exp_m1()).ln()
}

fn check_rect(x: u64, y: u64, a: u32, b: u32, p_tilde: f64, p_hat: f64) -> Result<()> {
    if x < 1 || y < 1 {
        return Err(Error::BadParameter(format!(
            "rectangle extents must be >= 1, got {x}x{y}"
        )));
    }
    check_radii(a, b)?;
    check_p(p_tilde)?;
    check_p(p_hat)
}

/// Upper bound for a fixed x-by-y rectangle to be internally spanned in the
/// (a,b) model: every column must see an occupied b-row (at density p̃), or
/// symmetrically every row an occupied a-column (at density p̂); the two
/// effective densities are the caller's choice of "order p" constants.
pub fn rect_span_upper(
    x: u64,
    y: u64,
    a: u32,
    b: u32,
    p_tilde: f64,
    p_hat: f64,
) -> Result<f64> {
    check_rect(x, y, a, b, p_tilde, p_hat)?;
    let arm_x = rect_arm_ln(x, y, b, p_tilde);
    let arm_y = rect_arm_ln(y, x, a, p_hat);
    Ok(arm_x.min(arm_y).exp())
}

/// Like [`rect_span_upper`] but for weak spanning: the witnessing occupied
/// row/column may sit anywhere in a (2a+1)- resp. (2b+1)-wide window, which
/// multiplies the row counts inside the bound.
pub fn rect_weak_span_upper(
    x: u64,
    y: u64,
    a: u32,
    b: u32,
    p_tilde: f64,
    p_hat: f64,
) -> Result<f64> {
    check_rect(x, y, a, b, p_tilde, p_hat)?;
    let arm_x = rect_arm_ln(x, (2 * a as u64 + 1) * y, b, p_tilde);
    let arm_y = rect_arm_ln(y, (2 * b as u64 + 1) * x, a, p_hat);
    Ok(arm_x.min(arm_y).exp())
}

/// Threshold bracket at constants γ ≤ Γ: 2D lengths are e^{γf}..e^{Γf},
/// 3D lengths e^{e^{γf}}..e^{e^{Γf}}, with f the 2D scaling function of the
/// two smallest radii.
pub fn threshold_bracket(
    spec: &NeighborhoodSpec,
    p: f64,
    gamma: f64,
    big_gamma: f64,
) -> Result<ThresholdBracket> {
    if spec.rank() < 2 {
        return Err(Error::DimensionMismatch(format!(
            "threshold bracket needs a 2D or 3D spec, got {spec}"
        )));
    }
    if !(gamma > 0.0 && gamma <= big_gamma) {
        return Err(Error::BadParameter(format!(
            "need 0 < gamma <= Gamma, got gamma={gamma} Gamma={big_gamma}"
        )));
    }
    let (a, b) = (spec.radius(0), spec.radius(1));
    let f = f_scaling(a, b, p)?;
    let make = |c: f64| {
        if spec.rank() == 2 {
            Length::Ln(c * f)
        } else {
            Length::LnLn(c * f)
        }
    };
    Ok(ThresholdBracket {
        l_minus: make(gamma),
        l_plus: make(big_gamma),
        gamma,
        big_gamma,
        form: ScalingForm::of(a, b),
    })
}

fn check_eps_gamma(eps: f64, gamma: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::BadParameter(format!("need 0 < eps < 1, got {eps}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::BadParameter(format!("need gamma > 0, got {gamma}")));
    }
    Ok(())
}

/// ln of the e-crossing bound for a cube of side l (see [`e_crossed_upper`]);
/// the caller guarantees l > p^{−1/4}.
fn e_crossed_ln(l: u64, p: f64, b: u32, s: f64, eps: f64, ln_pbar: f64) -> f64 {
    let lf = l as f64;
    if lf < ((-(b as f64) + eps) * p.ln()).exp() {
        // slice-skipping paths alone: 2l²(2√(sp))^{l/s − 2}
        2f64.ln() + 2.0 * lf.ln() + (lf / s - 2.0) * (2.0 * (s * p).sqrt()).ln()
    } else {
        // flooded slices enter: 4l²(l³ (sp)^{(s−1)/2} p^{2b(1−ε)} P̄)^{l/s}
        4f64.ln()
            + 2.0 * lf.ln()
            + (lf / s)
                * (3.0 * lf.ln()
                    + (s - 1.0) / 2.0 * (s * p).ln()
                    + 2.0 * (b as f64) * (1.0 - eps) * p.ln()
                    + ln_pbar)
    }
}

/// Upper bound for a cube of side l to be crossed in the easiest direction
/// after slice enhancement. Below the flooding scale p^{−b+ε} only
/// slice-skipping paths contribute; above it, flooded slices are priced at
/// P̄ = 1/L⁻ of the 2D (a,b) bracket with constant `gamma`, padded by
/// p^{−2bε} because stepping-stone droplets are smaller than critical ones.
/// Sides at or below p^{−1/4} are out of regime (handled by the direct
/// low-density estimate in [`spanned_upper`], not by this formula).
pub fn e_crossed_upper(
    l: u64,
    p: f64,
    a: u32,
    b: u32,
    c: u32,
    eps: f64,
    gamma: f64,
) -> Result<ProbBound> {
    check_p(p)?;
    check_radii(a, b)?;
    if c < b {
        return Err(Error::BadParameter(format!(
            "radii must satisfy b <= c, got b={b} c={c}"
        )));
    }
    check_eps_gamma(eps, gamma)?;
    let cutoff = (-0.25 * p.ln()).exp();
    if (l as f64) <= cutoff {
        return Err(Error::OutOfRegime(format!(
            "side {l} <= p^(-1/4) = {cutoff:.4}; crossing bound needs larger cubes"
        )));
    }
    let s = (c + 1) as f64;
    let ln_pbar = -gamma * f_scaling(a, b, p)?;
    Ok(ProbBound::from_ln(e_crossed_ln(l, p, b, s, eps, ln_pbar)))
}

/// Upper bound for a cube of side L to be internally spanned in the 3D
/// (a,b,c) model, combining three ranges of L: for L ≤ p^{−1/4} the direct
/// estimate p·(p^{−1/4})³ = p^{1/4}; past the flooding scale (when the
/// merging constants leave room, L ≥ κ+λ) the scan
/// L³·min over k of ((κ−1)k+λ)·max over l in [k,κk+λ] of the e-crossing
/// bound, where window sides l ≤ p^{−1/4} contribute the vacuous bound 1;
/// otherwise the e-crossing bound at L itself (a spanned cube is e-crossed).
pub fn spanned_upper(
    big_l: u64,
    p: f64,
    spec: &NeighborhoodSpec,
    eps: f64,
    gamma: f64,
) -> Result<ProbBound> {
    if spec.rank() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "spanning bound needs a 3D spec, got {spec}"
        )));
    }
    check_p(p)?;
    check_eps_gamma(eps, gamma)?;
    if big_l < 1 {
        return Err(Error::BadParameter("cube side must be >= 1".into()));
    }
    let (a, b, c) = (spec.radius(0), spec.radius(1), spec.radius(2));
    let cutoff = (-0.25 * p.ln()).exp();
    if (big_l as f64) <= cutoff {
        return Ok(ProbBound::from_ln(0.25 * p.ln()));
    }

    let (kappa, lambda) = regions::kappa_lambda(spec)?;
    let (kappa, lambda) = (kappa as u64, lambda as u64);
    let k_max = big_l.saturating_sub(lambda) / kappa;
    let flood_scale = ((-(b as f64) + eps) * p.ln()).exp();
    if (big_l as f64) < flood_scale || k_max < 1 {
        return e_crossed_upper(big_l, p, a, b, c, eps, gamma);
    }

    let s = (c + 1) as f64;
    let ln_pbar = -gamma * f_scaling(a, b, p)?;
    let lf = big_l as f64;
    let mut best = f64::INFINITY;
    for k in 1..=k_max {
        let mut window_max = f64::NEG_INFINITY;
        for l in k..=(kappa * k + lambda) {
            let term = if (l as f64) <= cutoff {
                0.0 // vacuous: no crossing bound below the regime cutoff
            } else {
                e_crossed_ln(l, p, b, s, eps, ln_pbar)
            };
            window_max = window_max.max(term);
        }
        let cand = 3.0 * lf.ln() + (((kappa - 1) * k + lambda) as f64).ln() + window_max;
        best = best.min(cand);
    }
    Ok(ProbBound::from_ln(best))
}
