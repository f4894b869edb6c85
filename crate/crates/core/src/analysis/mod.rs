//! Closed-form bounds, competitive-ratio reports and trace auditors built on
//! critical times and i-segments.

mod audit;
mod critical;

pub use audit::{lemma_audit, segment_audit, segments, violations, write_audit_csv, AuditCheck, Segment, SegmentKind};
pub use critical::{critical_times, CriticalTimes, PendingProfile};

use std::fmt;

use crate::model::Trace;
use crate::numeric::GoldenNumber;
use crate::{Error, Result};

fn int(n: i64) -> GoldenNumber {
    GoldenNumber::from_int(n)
}

/// `R_s` for MAIN: `1 + 2/s` on `[1, 4)`, `2/3 + 2/s` on `[4, 6)`, `1` from 6 on.
pub fn rs_bound(s: &GoldenNumber) -> Result<GoldenNumber> {
    if *s < int(1) {
        return Err(Error::Precondition(format!("speed {s} is below 1")));
    }
    let two_over = &int(2) / s;
    Ok(if *s < int(4) {
        &int(1) + &two_over
    } else if *s < int(6) {
        &GoldenNumber::ratio(2, 3) + &two_over
    } else {
        int(1)
    })
}

/// `3α² − 3α − 2`; its positive root is `α₀`.
fn alpha0_poly(a: &GoldenNumber) -> GoldenNumber {
    &(&(a * a).mul_int(3) - &a.mul_int(3)) - &int(2)
}

/// `2α² − 3α − 1`; its positive root is `α₁`.
fn alpha1_poly(a: &GoldenNumber) -> GoldenNumber {
    &(&(a * a).mul_int(2) - &a.mul_int(3)) - &int(1)
}

/// Display values of the two branch points of [`s_alpha`].
pub const ALPHA0_APPROX: f64 = 1.457_427_107_756_338;
pub const ALPHA1_APPROX: f64 = 1.780_776_406_404_415;

/// Speed at which MAIN is 1-competitive on α-separated catalogs.
/// Branches are decided by the signs of the defining quadratics.
pub fn s_alpha(alpha: &GoldenNumber) -> Result<GoldenNumber> {
    if *alpha < int(1) {
        return Err(Error::Precondition(format!("separation {alpha} is below 1")));
    }
    Ok(if !alpha0_poly(alpha).is_positive() {
        &(&alpha.mul_int(4) + &int(2)) / &(alpha * alpha)
    } else if alpha1_poly(alpha).is_negative() {
        &int(3) + &alpha.recip().expect("α ≥ 1")
    } else {
        &int(2) + &(&int(2) / alpha)
    })
}

/// Smallest `R ≥ 0` with `opt ≤ R·alg + A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatisfiedRatio {
    Finite(GoldenNumber),
    /// `alg = 0` while `opt > A`.
    Infinite,
}

impl SatisfiedRatio {
    pub fn is_finite(&self) -> bool {
        matches!(self, SatisfiedRatio::Finite(_))
    }

    pub fn value(&self) -> Option<&GoldenNumber> {
        match self {
            SatisfiedRatio::Finite(r) => Some(r),
            SatisfiedRatio::Infinite => None,
        }
    }

    pub fn to_decimal(&self, digits: u32) -> String {
        match self {
            SatisfiedRatio::Finite(r) => r.to_decimal(digits),
            SatisfiedRatio::Infinite => "inf".to_string(),
        }
    }
}

impl fmt::Display for SatisfiedRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SatisfiedRatio::Finite(r) => write!(f, "{r}"),
            SatisfiedRatio::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatioReport {
    pub alg_gain: GoldenNumber,
    pub opt_gain: GoldenNumber,
    pub additive: GoldenNumber,
    pub satisfied_r: SatisfiedRatio,
    /// `opt ≤ alg + A`.
    pub one_competitive: bool,
}

impl RatioReport {
    pub fn new(alg_gain: GoldenNumber, opt_gain: GoldenNumber, additive: GoldenNumber) -> Self {
        let excess = &opt_gain - &additive;
        let satisfied_r = if !excess.is_positive() {
            SatisfiedRatio::Finite(GoldenNumber::zero())
        } else if alg_gain.is_zero() {
            SatisfiedRatio::Infinite
        } else {
            SatisfiedRatio::Finite(&excess / &alg_gain)
        };
        let one_competitive = opt_gain <= &alg_gain + &additive;
        RatioReport { alg_gain, opt_gain, additive, satisfied_r, one_competitive }
    }
}

pub fn ratio_report(alg_trace: &Trace, opt_value: &GoldenNumber, additive: &GoldenNumber) -> RatioReport {
    RatioReport::new(alg_trace.total_load(), opt_value.clone(), additive.clone())
}
