use serde::Serialize;

use super::{diagnose_with, StateSequence};
use crate::error::{Error, Result};
use crate::potential::PairPotential;
use crate::scalar::Scalar;
use crate::trend::Trend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SmallSequenceOutcome {
    /// Critical, with `H -> -inf` and `|lambda| -> inf`.
    Confirmed,
    /// Critical, but one of the two limits fails.
    Violated,
    /// The residual does not tend to zero.
    NotCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallSequenceReport {
    pub outcome: SmallSequenceOutcome,
    pub residual: Trend,
    pub inertia: Trend,
    pub h_to_minus_infinity: bool,
    pub lambda_to_infinity: bool,
    pub h_slope: Option<f64>,
    pub lambda_slope: Option<f64>,
    /// Smallest residual over the initial residual.
    pub residual_floor_ratio: f64,
}

/// Checks a small sequence (`I -> 0`): if it is critical, `H` and the
/// multiplier norm must both diverge.
pub fn verify_small_sequence<T: Scalar>(seq: &StateSequence<T>) -> Result<SmallSequenceReport> {
    let opts = Default::default();
    let diag = diagnose_with(seq, &seq.system().potential(), &opts)?;
    let t = &diag.trends;
    if !t.inertia.to_zero {
        return Err(Error::Precondition("moment of inertia does not tend to zero".into()));
    }
    let res = diag.column(|r| r.residual_norm);
    let floor = res.iter().copied().fold(f64::INFINITY, f64::min) / res[0];
    let h_last = diag.rows.last().map_or(f64::NAN, |r| r.h);
    let h_inf = h_last < 0.0 && t.h_magnitude.to_infinity;
    let outcome = if !t.residual.to_zero {
        SmallSequenceOutcome::NotCritical
    } else if h_inf && t.lambda_norm.to_infinity {
        SmallSequenceOutcome::Confirmed
    } else {
        SmallSequenceOutcome::Violated
    };
    Ok(SmallSequenceReport {
        outcome,
        residual: t.residual,
        inertia: t.inertia,
        h_to_minus_infinity: h_inf,
        lambda_to_infinity: t.lambda_norm.to_infinity,
        h_slope: t.h_magnitude.slope,
        lambda_slope: t.lambda_norm.slope,
        residual_floor_ratio: floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KCriticalOutcome {
    /// `L` vanishes identically and no multiplier stays away from zero.
    HypothesesNotMet,
    /// The residual of `K` alone does not tend to zero.
    NotKCritical,
    /// Every applicable branch holds.
    Confirmed,
    Violated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KCriticalReport {
    pub outcome: KCriticalOutcome,
    pub residual: Trend,
    pub kinetic: Trend,
    pub l_norm: Trend,
    pub lz: Trend,
    pub iz: Trend,
    pub lambda_norm: Trend,
    /// `K` bounded away from zero; `Some(true)` when `|L| -> inf` follows.
    pub branch_k_bounded: Option<bool>,
    /// `Lz` or `|lambda|` bounded away from zero; `Some(true)` when `K -> 0` and `Iz -> 0` follow.
    pub branch_lz_bounded: Option<bool>,
}

/// Treats the sequence as a critical sequence of `K` (potential set to zero)
/// and checks the two branches: `K` bounded away from zero forces
/// `|L| -> inf`; `Lz` bounded away from zero forces `K -> 0` and `Iz -> 0`.
pub fn verify_k_critical<T: Scalar>(seq: &StateSequence<T>) -> Result<KCriticalReport> {
    let free = PairPotential::free(seq.system().n());
    let diag = diagnose_with(seq, &free, &Default::default())?;
    let t = &diag.trends;
    let z = seq.abscissa_f64();
    let opts = Default::default();
    let l_norm: Vec<f64> = diag.rows.iter().map(|r| r.l.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    let l_trend = crate::trend::fit_trend(&l_norm, z.as_deref(), 0.0, &opts);
    let lz_trend = crate::trend::fit_trend(&diag.column(|r| r.lz), z.as_deref(), 0.0, &opts);
    let iz_trend = crate::trend::fit_trend(&diag.column(|r| r.iz), z.as_deref(), 0.0, &opts);
    let l_vanishes = diag.rows.iter().zip(&l_norm).all(|(r, &l)| l <= 1e-12 * (r.inertia + r.kinetic));
    let lambda_away = t.lambda_norm.bounded_away_from_zero();
    let k_away = t.kinetic.bounded_away_from_zero();
    let lz_away = lz_trend.bounded_away_from_zero() || lambda_away;
    let mut report = KCriticalReport {
        outcome: KCriticalOutcome::HypothesesNotMet,
        residual: t.residual,
        kinetic: t.kinetic,
        l_norm: l_trend,
        lz: lz_trend,
        iz: iz_trend,
        lambda_norm: t.lambda_norm,
        branch_k_bounded: None,
        branch_lz_bounded: None,
    };
    if l_vanishes && !lambda_away {
        return Ok(report);
    }
    if !t.residual.to_zero {
        report.outcome = KCriticalOutcome::NotKCritical;
        return Ok(report);
    }
    if k_away {
        report.branch_k_bounded = Some(l_trend.to_infinity);
    }
    if lz_away {
        report.branch_lz_bounded = Some(t.kinetic.to_zero && iz_trend.to_zero);
    }
    report.outcome = match (report.branch_k_bounded, report.branch_lz_bounded) {
        (None, None) => KCriticalOutcome::HypothesesNotMet,
        (a, b) if a != Some(false) && b != Some(false) => KCriticalOutcome::Confirmed,
        _ => KCriticalOutcome::Violated,
    };
    Ok(report)
}
