use serde::Serialize;

use super::StateSequence;
use crate::clusters::{block_diameter, decompose, min_centre_distance, min_pair_distance, ClusterPartition, NEGLIGIBLE_RESIDUAL};
use crate::error::{Error, Result};
use crate::integrals::{fit_multiplier, grad_hamiltonian, residual_from_gradient, to_multiplier_coordinates, Multiplier};
use crate::potential::PairPotential;
use crate::scalar::Scalar;
use crate::state::{angular_momentum, inertia, iz_kz, kinetic, AlbouyState};
use crate::trend::{fit_convergence, fit_trend, Trend, TrendOptions};

/// Monitored quantities at one index. `Iz`, `Kz`, `Lz`, `R` and the
/// estimates are taken in multiplier coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub k: usize,
    pub z: Option<f64>,
    pub residual_norm: f64,
    pub grad_h_norm: f64,
    pub h: f64,
    pub kinetic: f64,
    pub inertia: f64,
    pub v: f64,
    pub l: [f64; 3],
    pub iz: f64,
    pub kz: f64,
    pub lz: f64,
    pub lambda: [f64; 3],
    pub lambda_norm: f64,
    /// `(K + mu V)^2 / (I + K)` for a kernel of degree `-mu`.
    pub ratio_kplusv: f64,
    pub r_norm: f64,
    /// Largest `|sqrt(Kz) - |lambda| sqrt(Iz)|` over clusters of two or more bodies.
    pub est_ii: f64,
    /// Largest `|sqrt(Kz) - |Lz| / sqrt(Iz)|` over the same clusters.
    pub est_iii: f64,
    pub min_pair_dist: f64,
    pub diameter: f64,
    pub min_center_dist: Option<f64>,
    pub collision: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceTrends {
    pub residual: Trend,
    pub ratio_kplusv: Trend,
    pub r_norm: Trend,
    pub est_ii: Trend,
    pub est_iii: Trend,
    pub lambda_norm: Trend,
    pub inertia: Trend,
    pub kinetic: Trend,
    /// Magnitude of `H`; with `H < 0` at the end, growth means `H -> -inf`.
    pub h_magnitude: Trend,
    /// Successive differences of `H`.
    pub h_convergence: Trend,
    pub v_magnitude: Trend,
    pub min_pair_dist: Trend,
    pub diameter: Trend,
    pub diameter_convergence: Trend,
    pub min_center_dist: Option<Trend>,
    /// Largest `|L_k - L_0|` relative to `max(|L_0|, 1)`.
    pub l_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceDiagnostics {
    pub rows: Vec<DiagnosticRow>,
    pub trends: SequenceTrends,
    /// Indices where two bodies coincide.
    pub collisions: Vec<usize>,
}

impl SequenceDiagnostics {
    pub fn column(&self, f: impl Fn(&DiagnosticRow) -> f64) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }
}

fn f<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn diagnose<T: Scalar>(seq: &StateSequence<T>) -> Result<SequenceDiagnostics> {
    diagnose_with(seq, &seq.system().potential(), &TrendOptions::default())
}

struct Estimates {
    ii: f64,
    iii: f64,
}

fn estimates<T: Scalar>(s: &AlbouyState<T>, lambda_norm: T) -> Estimates {
    let izkz = iz_kz(s);
    let lz = angular_momentum(s)[2];
    let skz = izkz.kz.sqrt();
    let siz = izkz.iz.sqrt();
    let iii = if siz > T::zero() { (skz - lz.abs() / siz).abs() } else { skz };
    Estimates { ii: f((skz - lambda_norm * siz).abs()), iii: f(iii) }
}

/// Diagnostics under an explicit potential (the free potential gives the
/// critical-sequence problem of `K` alone).
pub fn diagnose_with<T: Scalar>(
    seq: &StateSequence<T>,
    pot: &PairPotential<T>,
    opts: &TrendOptions,
) -> Result<SequenceDiagnostics> {
    let mu = -seq.system().kernel().degree();
    let partition: Option<&ClusterPartition> = seq.meta.partition.as_ref();
    let z = seq.abscissa_f64();
    let mut rows = Vec::with_capacity(seq.len());
    let mut collisions = Vec::new();
    for (k, s) in seq.states().iter().enumerate() {
        let kin = kinetic(s);
        let iner = inertia(s);
        let l = angular_momentum(s);
        let (v, grad, collision) = match (pot.value(s), grad_hamiltonian(s, pot)) {
            (Ok(v), Ok(g)) => (v, Some(g), false),
            (Err(Error::Collision { .. }), _) | (_, Err(Error::Collision { .. })) => (T::nan(), None, true),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if collision {
            collisions.push(k);
        }
        let lambda = match (seq.multipliers(), &grad) {
            (Some(m), _) => m[k],
            (None, Some(g)) => fit_multiplier(g, s, true)?,
            (None, None) => Multiplier::zero(),
        };
        let (residual_norm, grad_h_norm) = match &grad {
            Some(g) => (f(residual_from_gradient(g, s, &lambda).norm), f(g.norm())),
            None => (f64::NAN, f64::NAN),
        };
        let frame = match to_multiplier_coordinates(s, &lambda) {
            Ok(fr) => fr.state,
            Err(Error::ZeroMultiplier) => s.clone(),
            Err(e) => return Err(e),
        };
        let izkz = iz_kz(&frame);
        let lam_norm = lambda.norm();
        let est = match partition {
            Some(p) if p.len() > 1 => {
                let d = decompose(&frame, p)?;
                let mut worst = Estimates { ii: 0.0, iii: 0.0 };
                for (b, block) in p.blocks().iter().enumerate() {
                    if block.len() > 1 {
                        let e = estimates(&d.cluster_states[b], lam_norm);
                        worst = Estimates { ii: worst.ii.max(e.ii), iii: worst.iii.max(e.iii) };
                    }
                }
                worst
            }
            _ => estimates(&frame, lam_norm),
        };
        let all: Vec<usize> = (0..s.n()).collect();
        rows.push(DiagnosticRow {
            k,
            z: z.as_ref().map(|z| z[k]),
            residual_norm,
            grad_h_norm,
            h: f(kin / T::lit(2.0) + v),
            kinetic: f(kin),
            inertia: f(iner),
            v: f(v),
            l: l.map(f),
            iz: f(izkz.iz),
            kz: f(izkz.kz),
            lz: f(angular_momentum(&frame)[2]),
            lambda: lambda.lambda.map(f),
            lambda_norm: f(lam_norm),
            ratio_kplusv: f((kin + mu * v).powi(2) / (iner + kin)),
            r_norm: f(frame.r().norm()),
            est_ii: est.ii,
            est_iii: est.iii,
            min_pair_dist: min_pair_distance(s).map_or(f64::NAN, f),
            diameter: f(block_diameter(s, &all)),
            min_center_dist: partition.and_then(|p| min_centre_distance(s, p)).map(f),
            collision,
        });
    }
    let trends = trends(&rows, z.as_deref(), opts);
    Ok(SequenceDiagnostics { rows, trends, collisions })
}

fn trends(rows: &[DiagnosticRow], z: Option<&[f64]>, opts: &TrendOptions) -> SequenceTrends {
    let col = |g: fn(&DiagnosticRow) -> f64| rows.iter().map(g).collect::<Vec<f64>>();
    let fit = |v: &[f64], floor: f64| fit_trend(v, z, floor, opts);
    let max_of = |v: &[f64]| v.iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
    let grad_scale = max_of(&col(|r| r.grad_h_norm));
    let speed_scale = max_of(&col(|r| r.kinetic.sqrt()));
    let l0 = rows.first().map_or([0.0; 3], |r| r.l);
    let l0_norm = l0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let l_drift = rows
        .iter()
        .map(|r| (0..3).map(|i| (r.l[i] - l0[i]).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
        / l0_norm.max(1.0);
    let centre: Option<Vec<f64>> = rows.iter().map(|r| r.min_center_dist).collect();
    SequenceTrends {
        residual: fit(&col(|r| r.residual_norm), NEGLIGIBLE_RESIDUAL * grad_scale),
        ratio_kplusv: fit(&col(|r| r.ratio_kplusv), 0.0),
        r_norm: fit(&col(|r| r.r_norm), 0.0),
        est_ii: fit(&col(|r| r.est_ii), NEGLIGIBLE_RESIDUAL * speed_scale),
        est_iii: fit(&col(|r| r.est_iii), NEGLIGIBLE_RESIDUAL * speed_scale),
        lambda_norm: fit(&col(|r| r.lambda_norm), 0.0),
        inertia: fit(&col(|r| r.inertia), 0.0),
        kinetic: fit(&col(|r| r.kinetic), 0.0),
        h_magnitude: fit(&col(|r| r.h), 0.0),
        h_convergence: fit_convergence(&col(|r| r.h), z, NEGLIGIBLE_RESIDUAL, opts),
        v_magnitude: fit(&col(|r| r.v), 0.0),
        min_pair_dist: fit(&col(|r| r.min_pair_dist), 0.0),
        diameter: fit(&col(|r| r.diameter), 0.0),
        diameter_convergence: fit_convergence(&col(|r| r.diameter), z, NEGLIGIBLE_RESIDUAL, opts),
        min_center_dist: centre.map(|c| fit(&c, 0.0)),
        l_drift,
    }
}
