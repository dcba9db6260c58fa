//! Constructed state sequences, their diagnostics and the classifier of
//! critical sequences.

mod classify;
mod diagnose;
mod verify;

pub use classify::{classify, ClassifyOptions, Classification, Evidence, Verdict};
pub use diagnose::{diagnose, diagnose_with, DiagnosticRow, SequenceDiagnostics, SequenceTrends};
pub use verify::{
    verify_k_critical, verify_small_sequence, KCriticalReport, SmallSequenceOutcome, SmallSequenceReport,
};

use serde::Serialize;

use crate::clusters::ClusterPartition;
use crate::error::{Error, Result};
use crate::integrals::Multiplier;
use crate::linalg::Vec3;
use crate::potential::dilate;
use crate::relative_equilibria::{embed_re, reduce_two_body, solve_relative_equilibrium, RelativeEquilibrium, Spectator};
use crate::scalar::Scalar;
use crate::state::{AlbouyState, BodySystem};

/// Geometric schedule `z_k = z0 * rho^k`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Schedule<T> {
    pub z0: T,
    pub rho: T,
    pub count: usize,
}

impl<T: Scalar> Schedule<T> {
    /// `z0 = 10 r*`, `rho = 2`, 14 terms.
    pub fn default_for(re: &RelativeEquilibrium<T>) -> Self {
        Self { z0: T::lit(10.0) * re.r_star, rho: T::lit(2.0), count: 14 }
    }

    pub fn values(&self) -> Result<Vec<T>> {
        if !(self.z0 > T::zero()) || !(self.rho > T::one()) || self.count == 0 {
            return Err(Error::InvalidArgument("schedule needs z0 > 0, rho > 1 and count >= 1".into()));
        }
        Ok((0..self.count).map(|k| self.z0 * self.rho.powi(k as i32)).collect())
    }
}

/// How a sequence was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceMeta {
    pub generator: String,
    pub pair: Option<(usize, usize)>,
    pub singleton: Option<usize>,
    pub ell: Option<f64>,
    pub z0: Option<f64>,
    pub rho: Option<f64>,
    pub partition: Option<ClusterPartition>,
}

impl SequenceMeta {
    pub fn supplied() -> Self {
        Self { generator: "supplied".into(), pair: None, singleton: None, ell: None, z0: None, rho: None, partition: None }
    }
}

/// States `S_k` of one system, optionally with multipliers and a growing
/// abscissa `z_k` against which trends are fitted.
#[derive(Debug, Clone)]
pub struct StateSequence<T: Scalar> {
    system: BodySystem<T>,
    states: Vec<AlbouyState<T>>,
    multipliers: Option<Vec<Multiplier<T>>>,
    abscissa: Option<Vec<T>>,
    pub meta: SequenceMeta,
}

impl<T: Scalar> StateSequence<T> {
    pub fn new(
        system: BodySystem<T>,
        states: Vec<AlbouyState<T>>,
        multipliers: Option<Vec<Multiplier<T>>>,
        abscissa: Option<Vec<T>>,
    ) -> Result<Self> {
        if let Some(s) = states.iter().find(|s| s.masses()[..] != system.masses()[..]) {
            return Err(if s.n() != system.n() {
                Error::DimensionMismatch { expected: system.n(), found: s.n() }
            } else {
                Error::MassMismatch
            });
        }
        for len in [multipliers.as_ref().map(Vec::len), abscissa.as_ref().map(Vec::len)].into_iter().flatten() {
            if len != states.len() {
                return Err(Error::DimensionMismatch { expected: states.len(), found: len });
            }
        }
        if let Some(z) = &abscissa {
            if z.iter().any(|z| !(*z > T::zero()) || !z.is_finite()) {
                return Err(Error::InvalidArgument("abscissa values must be positive and finite".into()));
            }
        }
        Ok(Self { system, states, multipliers, abscissa, meta: SequenceMeta::supplied() })
    }

    pub fn system(&self) -> &BodySystem<T> {
        &self.system
    }

    pub fn states(&self) -> &[AlbouyState<T>] {
        &self.states
    }

    pub fn multipliers(&self) -> Option<&[Multiplier<T>]> {
        self.multipliers.as_deref()
    }

    pub fn abscissa(&self) -> Option<&[T]> {
        self.abscissa.as_deref()
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// The same states with the multipliers dropped, so diagnostics fit them.
    pub fn without_multipliers(mut self) -> Self {
        self.multipliers = None;
        self
    }

    pub fn with_multipliers(mut self, multipliers: Vec<Multiplier<T>>) -> Result<Self> {
        if multipliers.len() != self.states.len() {
            return Err(Error::DimensionMismatch { expected: self.states.len(), found: multipliers.len() });
        }
        self.multipliers = Some(multipliers);
        Ok(self)
    }

    fn abscissa_f64(&self) -> Option<Vec<f64>> {
        self.abscissa.as_ref().map(|z| z.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect())
    }
}

fn check_three_body<T: Scalar>(sys: &BodySystem<T>, pair: (usize, usize), singleton: usize) -> Result<()> {
    let (i, j) = pair;
    if sys.n() != 3 {
        return Err(Error::InvalidArgument(format!("need 3 bodies, got {}", sys.n())));
    }
    let mut idx = [i, j, singleton];
    idx.sort_unstable();
    if idx != [0, 1, 2] {
        return Err(Error::InvalidArgument(format!("pair ({i}, {j}) and singleton {singleton} must be the three bodies")));
    }
    Ok(())
}

fn pair_re<T: Scalar>(sys: &BodySystem<T>, pair: (usize, usize), ell: T) -> Result<RelativeEquilibrium<T>> {
    if ell == T::zero() || !ell.is_finite() {
        return Err(Error::InvalidArgument("angular momentum must be nonzero".into()));
    }
    solve_relative_equilibrium(&reduce_two_body(sys, pair)?, ell)
}

/// Pair at its relative equilibrium in the `(x, y)`-plane, singleton at
/// rest; the centres of mass sit on the `z`-axis at
/// `Z = (m3/(m1+m2) z_k, m3/(m1+m2) z_k, -z_k)` on the pair and singleton
/// entries. The multipliers are the analytic `(0, 0, omega)`.
pub fn generate_horizontal<T: Scalar>(
    sys: &BodySystem<T>,
    pair: (usize, usize),
    singleton: usize,
    ell: T,
    schedule: &Schedule<T>,
) -> Result<StateSequence<T>> {
    check_three_body(sys, pair, singleton)?;
    let re = pair_re(sys, pair, ell)?;
    let zs = schedule.values()?;
    let base = embed_re(sys, pair, Some(Spectator { index: singleton, offset: [T::zero(); 3] }), &re, T::zero())?;
    let m = sys.masses();
    let share = m[singleton] / (m[pair.0] + m[pair.1]);
    let states = zs
        .iter()
        .map(|&z| {
            let mut comps: [Vec<T>; 6] = std::array::from_fn(|k| base.components()[k].entries().to_vec());
            comps[2][pair.0] = share * z;
            comps[2][pair.1] = share * z;
            comps[2][singleton] = -z;
            AlbouyState::from_components(m.clone(), comps)
        })
        .collect::<Result<Vec<_>>>()?;
    let multipliers = vec![Multiplier::about_z(re.omega); zs.len()];
    let mut seq = StateSequence::new(sys.clone(), states, Some(multipliers), Some(zs))?;
    seq.meta = SequenceMeta {
        generator: "horizontal".into(),
        pair: Some(pair),
        singleton: Some(singleton),
        ell: ell.to_f64(),
        z0: schedule.z0.to_f64(),
        rho: schedule.rho.to_f64(),
        partition: Some(ClusterPartition::new(vec![vec![pair.0, pair.1], vec![singleton]], 3)?),
    };
    Ok(seq)
}

/// Same layout as [`generate_horizontal`] but with the centres of mass on the
/// `x`-axis, so the whole sequence stays in the plane of the pair. No
/// multipliers are attached.
pub fn generate_planar<T: Scalar>(
    sys: &BodySystem<T>,
    pair: (usize, usize),
    singleton: usize,
    ell: T,
    schedule: &Schedule<T>,
) -> Result<StateSequence<T>> {
    let horizontal = generate_horizontal(sys, pair, singleton, ell, schedule)?;
    let states = horizontal
        .states
        .iter()
        .map(|s| {
            let mut comps: [Vec<T>; 6] = std::array::from_fn(|k| s.components()[k].entries().to_vec());
            let z = std::mem::replace(&mut comps[2], vec![T::zero(); 3]);
            for (x, dz) in comps[0].iter_mut().zip(z) {
                *x = *x + dz;
            }
            AlbouyState::from_components(sys.masses().clone(), comps)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut seq = StateSequence::new(sys.clone(), states, None, horizontal.abscissa)?;
    seq.meta = SequenceMeta { generator: "planar".into(), ..horizontal.meta };
    Ok(seq)
}

/// Dilation schedule `s_k = s0 - k * step`; the abscissa is `exp(-2 s_k)`,
/// the inverse length scale, which grows along the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShrinkSchedule<T> {
    pub s0: T,
    pub step: T,
    pub count: usize,
}

impl<T: Scalar> Default for ShrinkSchedule<T> {
    fn default() -> Self {
        Self { s0: T::zero(), step: T::lit(0.5), count: 14 }
    }
}

/// Dilations `delta_{s_k}(base)` with `s_k -> -inf`. A supplied base
/// multiplier is carried along as `exp((d - 2) s_k) lambda` for kernel
/// degree `d`, which keeps exact relative equilibria exact.
pub fn generate_shrinking<T: Scalar>(
    sys: &BodySystem<T>,
    base: &AlbouyState<T>,
    base_multiplier: Option<Multiplier<T>>,
    schedule: &ShrinkSchedule<T>,
) -> Result<StateSequence<T>> {
    if !(schedule.step > T::zero()) || schedule.count == 0 {
        return Err(Error::InvalidArgument("shrinking schedule needs step > 0 and count >= 1".into()));
    }
    let degree = sys.kernel().degree();
    let s: Vec<T> = (0..schedule.count).map(|k| schedule.s0 - schedule.step * T::lit(k as f64)).collect();
    let states = s.iter().map(|&s| dilate(s, base, degree)).collect();
    let multipliers = base_multiplier.map(|l| {
        s.iter()
            .map(|&s| {
                let c = ((degree - T::lit(2.0)) * s).exp();
                Multiplier::new([l.lambda[0] * c, l.lambda[1] * c, l.lambda[2] * c])
            })
            .collect()
    });
    let abscissa = s.iter().map(|&s| (T::lit(-2.0) * s).exp()).collect();
    let mut seq = StateSequence::new(sys.clone(), states, multipliers, Some(abscissa))?;
    seq.meta.generator = "shrinking".into();
    Ok(seq)
}

/// Shrinking two-body relative equilibrium: a small sequence of an
/// attracting pair, with analytic multipliers.
pub fn generate_shrinking_pair<T: Scalar>(sys: &BodySystem<T>, ell: T, schedule: &ShrinkSchedule<T>) -> Result<StateSequence<T>> {
    if sys.n() != 2 {
        return Err(Error::InvalidArgument(format!("need 2 bodies, got {}", sys.n())));
    }
    let re = pair_re(sys, (0, 1), ell)?;
    let base = embed_re(sys, (0, 1), None, &re, T::zero())?;
    let mut seq = generate_shrinking(sys, &base, Some(Multiplier::about_z(re.omega)), schedule)?;
    seq.meta.pair = Some((0, 1));
    seq.meta.ell = ell.to_f64();
    Ok(seq)
}

/// A constant sequence: the pair at its exact relative equilibrium and the
/// third body at rest at `offset` from the pair's centre of mass.
pub fn generate_re_with_spectator<T: Scalar>(
    sys: &BodySystem<T>,
    pair: (usize, usize),
    singleton: usize,
    ell: T,
    offset: Vec3<T>,
    count: usize,
) -> Result<StateSequence<T>> {
    check_three_body(sys, pair, singleton)?;
    let re = pair_re(sys, pair, ell)?;
    let s = embed_re(sys, pair, Some(Spectator { index: singleton, offset }), &re, T::zero())?;
    let mut seq =
        StateSequence::new(sys.clone(), vec![s; count], Some(vec![Multiplier::about_z(re.omega); count]), None)?;
    seq.meta = SequenceMeta {
        generator: "re_with_spectator".into(),
        pair: Some(pair),
        singleton: Some(singleton),
        ell: ell.to_f64(),
        ..SequenceMeta::supplied()
    };
    Ok(seq)
}
