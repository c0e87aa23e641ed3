//! Face mobilities `u_{l+1/2} = F(u_l, u_{l+1})` and the discrete chain rule
//!
//! ```text
//! F (dp) (log uR - log uL) >= c0 (dp) (uR - uL),   c0 = 1
//! ```
//!
//! which both built-in rules satisfy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chain-rule constant; both rules satisfy it with `c0 = 1`.
pub const CHAIN_RULE_CONSTANT: f64 = 1.0;

/// Below this log-gap the logarithmic mean falls back to the arithmetic mean.
const LOGMEAN_DIAGONAL: f64 = 1e-8;

/// Floor applied to Newton iterates before taking logarithms.
pub const LOG_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MobilityRule {
    #[default]
    Upwind,
    Logmean,
}

/// Face mobility; `dp = p_{l+1} - p_l` only steers the upwind rule.
pub fn face_mobility(rule: MobilityRule, ul: f64, ur: f64, dp: f64) -> Result<f64> {
    if !(ul >= 0.0 && ur >= 0.0) {
        return Err(Error::NegativeData(format!(
            "mobility inputs must be nonnegative, got ({ul}, {ur})"
        )));
    }
    Ok(mobility_unchecked(rule, ul, ur, dp))
}

/// Face mobility without sign checks. Negative values (transient Newton
/// iterates) pass straight through the upwind rule and are floored at
/// [`LOG_FLOOR`] by the logarithmic mean.
#[inline]
pub fn mobility_unchecked(rule: MobilityRule, ul: f64, ur: f64, dp: f64) -> f64 {
    match rule {
        MobilityRule::Upwind => {
            if dp >= 0.0 {
                ur
            } else {
                ul
            }
        }
        MobilityRule::Logmean => {
            if ul <= 0.0 || ur <= 0.0 {
                return 0.0;
            }
            logmean(ul, ur)
        }
    }
}

/// Logarithmic mean of two positive numbers.
#[inline]
pub fn logmean(a: f64, b: f64) -> f64 {
    if a == b {
        return a;
    }
    let gap = b.ln() - a.ln();
    if gap.abs() < LOGMEAN_DIAGONAL {
        0.5 * (a + b)
    } else {
        (b - a) / gap
    }
}

/// Partial derivatives `(dF/du_l, dF/du_{l+1})` with the upwind branch frozen
/// and logmean inputs floored at [`LOG_FLOOR`].
#[inline]
pub fn mobility_derivatives(rule: MobilityRule, ul: f64, ur: f64, dp: f64) -> (f64, f64) {
    match rule {
        MobilityRule::Upwind => {
            if dp >= 0.0 {
                (0.0, 1.0)
            } else {
                (1.0, 0.0)
            }
        }
        MobilityRule::Logmean => {
            let a = ul.max(LOG_FLOOR);
            let b = ur.max(LOG_FLOOR);
            let gap = b.ln() - a.ln();
            if gap.abs() < LOGMEAN_DIAGONAL {
                return (0.5, 0.5);
            }
            let l = (b - a) / gap;
            ((l / a - 1.0) / gap, (1.0 - l / b) / gap)
        }
    }
}

/// `F dp (log uR - log uL) - c0 dp (uR - uL)`; nonnegative for admissible rules.
pub fn chain_rule_defect(rule: MobilityRule, ul: f64, ur: f64, dp: f64) -> Result<f64> {
    if !(ul > 0.0 && ur > 0.0) {
        return Err(Error::NegativeData(format!(
            "chain rule needs positive states, got ({ul}, {ur})"
        )));
    }
    let f = mobility_unchecked(rule, ul, ur, dp);
    Ok(f * dp * (ur.ln() - ul.ln()) - CHAIN_RULE_CONSTANT * dp * (ur - ul))
}
