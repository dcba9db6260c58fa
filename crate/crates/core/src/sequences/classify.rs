use serde::Serialize;

use super::{diagnose_with, SequenceDiagnostics, StateSequence};
use crate::clusters::{decompose, detect_clusters, min_centre_distance};
use crate::error::{Error, Result};
use crate::integrals::Multiplier;
use crate::scalar::Scalar;
use crate::trend::{fit_trend, TrendOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    RelativeEquilibrium,
    Collision,
    CriticalPointAtInfinity,
    NotCritical,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub trend: TrendOptions,
    /// Trailing window for cluster detection.
    pub window: usize,
    /// Merge threshold for cluster detection.
    pub threshold: f64,
    /// Largest accepted drift of `L` relative to `max(|L_0|, 1)`.
    pub l_drift_tolerance: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { trend: TrendOptions::default(), window: 5, threshold: 10.0, l_drift_tolerance: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub residual_slope: Option<f64>,
    pub residual_first: f64,
    pub residual_last: f64,
    pub min_pair_slope: Option<f64>,
    pub diameter_slope: Option<f64>,
    pub min_center_slope: Option<f64>,
    pub l_drift: f64,
    pub h_last: f64,
    pub h_to_minus_infinity: bool,
    pub lambda_to_infinity: bool,
    pub partition: Option<Vec<Vec<usize>>>,
    pub block_verdicts: Vec<(Vec<usize>, Verdict)>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub evidence: Evidence,
}

/// Decision procedure, in order:
/// residual not tending to zero gives `NotCritical`; bounded diameter with
/// the minimum distance tending to zero and `V -> -inf` gives `Collision`;
/// distances bounded away from zero with a converging diameter give
/// `RelativeEquilibrium`; at least two detected clusters receding from each
/// other, constant `L`, converging `H` and every cluster of two or more
/// bodies classifying as `RelativeEquilibrium` give `CriticalPointAtInfinity`.
/// Anything else is `Inconclusive`.
pub fn classify<T: Scalar>(
    seq: &StateSequence<T>,
    diag: &SequenceDiagnostics,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    let t = &diag.trends;
    let h_last = diag.rows.last().map_or(f64::NAN, |r| r.h);
    let mut ev = Evidence {
        residual_slope: t.residual.slope,
        residual_first: t.residual.first,
        residual_last: t.residual.last,
        min_pair_slope: t.min_pair_dist.slope,
        diameter_slope: t.diameter.slope,
        min_center_slope: None,
        l_drift: t.l_drift,
        h_last,
        h_to_minus_infinity: h_last < 0.0 && t.h_magnitude.to_infinity,
        lambda_to_infinity: t.lambda_norm.to_infinity,
        partition: None,
        block_verdicts: Vec::new(),
        reason: String::new(),
    };
    let done = |verdict, mut ev: Evidence, reason: &str| {
        ev.reason = reason.to_string();
        Ok(Classification { verdict, evidence: ev })
    };
    if !t.residual.to_zero {
        return done(Verdict::NotCritical, ev, "residual does not tend to zero");
    }
    let v_last = diag.rows.last().map_or(f64::NAN, |r| r.v);
    if t.diameter.bounded() && t.min_pair_dist.to_zero && v_last < 0.0 && t.v_magnitude.to_infinity {
        return done(Verdict::Collision, ev, "bounded configuration with a vanishing distance and V -> -inf");
    }
    if t.min_pair_dist.bounded_away_from_zero() && t.diameter.bounded() && t.diameter_convergence.to_zero {
        return done(Verdict::RelativeEquilibrium, ev, "configuration converges in shape away from collisions");
    }
    if seq.len() < opts.window.max(2) {
        return done(Verdict::Inconclusive, ev, "sequence shorter than the cluster window");
    }
    let part = match detect_clusters(seq.states(), opts.window, opts.threshold) {
        Ok(p) => p,
        Err(Error::InconclusiveClusters(msg)) => return done(Verdict::Inconclusive, ev, &msg),
        Err(e) => return Err(e),
    };
    ev.partition = Some(part.blocks().to_vec());
    if part.len() < 2 {
        return done(Verdict::Inconclusive, ev, "a single cluster that neither collides nor converges");
    }
    let z = seq.abscissa_f64();
    let centres: Vec<f64> =
        seq.states().iter().map(|s| min_centre_distance(s, &part).map_or(f64::NAN, |d| d.to_f64().unwrap_or(f64::NAN))).collect();
    let centre_trend = fit_trend(&centres, z.as_deref(), 0.0, &opts.trend);
    ev.min_center_slope = centre_trend.slope;
    if !centre_trend.to_infinity {
        return done(Verdict::Inconclusive, ev, "cluster centres do not recede");
    }
    if !(t.l_drift <= opts.l_drift_tolerance) {
        return done(Verdict::Inconclusive, ev, "angular momentum is not constant");
    }
    if !t.h_convergence.to_zero {
        return done(Verdict::Inconclusive, ev, "energy does not converge");
    }
    let multipliers: Vec<Multiplier<T>> =
        diag.rows.iter().map(|r| Multiplier::new(r.lambda.map(T::lit))).collect();
    for (b, block) in part.blocks().iter().enumerate() {
        if block.len() < 2 {
            continue;
        }
        let sub_sys = seq.system().subsystem(block)?;
        let states = seq
            .states()
            .iter()
            .map(|s| Ok(decompose(s, &part)?.cluster_states[b].restrict(block)))
            .collect::<Result<Vec<_>>>()?;
        let sub = StateSequence::new(sub_sys, states, Some(multipliers.clone()), seq.abscissa().map(<[T]>::to_vec))?;
        let sub_diag = diagnose_with(&sub, &sub.system().potential(), &opts.trend)?;
        let verdict = classify(&sub, &sub_diag, opts)?.verdict;
        ev.block_verdicts.push((block.clone(), verdict));
        if verdict != Verdict::RelativeEquilibrium {
            return done(Verdict::Inconclusive, ev, "a cluster does not converge to a relative equilibrium");
        }
    }
    done(Verdict::CriticalPointAtInfinity, ev, "receding clusters, each at a relative equilibrium or a single body")
}
