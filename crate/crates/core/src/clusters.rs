//! Cluster decomposition of `D_N`, additivity checks and cluster detection
//! along state sequences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrals::{grad_hamiltonian, residual_from_gradient, Multiplier};
use crate::linalg::{self, Vec3};
use crate::potential::PairPotential;
use crate::scalar::Scalar;
use crate::state::{angular_momentum, inertia, kinetic, weighted_mean, AlbouyState};
use crate::trend::{fit_trend, Trend, TrendOptions};

/// Disjoint, nonempty, sorted blocks covering `0..n`, ordered by smallest index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterPartition {
    blocks: Vec<Vec<usize>>,
}

impl ClusterPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>, n: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if i >= n {
                    return Err(Error::InvalidPartition(format!("index {i} out of range for {n} bodies")));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidPartition(format!("index {i} appears twice")));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidPartition(format!("index {i} is not covered")));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    pub fn whole(n: usize) -> Self {
        Self { blocks: vec![(0..n).collect()] }
    }

    pub fn singletons(n: usize) -> Self {
        Self { blocks: (0..n).map(|i| vec![i]).collect() }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// `S = sum_b cluster_states[b] + centres_state`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterDecomposition<T: Scalar> {
    pub cluster_states: Vec<AlbouyState<T>>,
    pub centres_state: AlbouyState<T>,
}

impl<T: Scalar> ClusterDecomposition<T> {
    /// Cluster states followed by the centres state.
    pub fn pieces(&self) -> impl Iterator<Item = &AlbouyState<T>> {
        self.cluster_states.iter().chain(std::iter::once(&self.centres_state))
    }

    pub fn reconstruct(&self) -> AlbouyState<T> {
        self.cluster_states.iter().fold(self.centres_state.clone(), |acc, s| acc.add(s))
    }
}

fn check_partition<T: Scalar>(s: &AlbouyState<T>, part: &ClusterPartition) -> Result<()> {
    if part.n() != s.n() {
        return Err(Error::InvalidPartition(format!("partition covers {} bodies, state has {}", part.n(), s.n())));
    }
    Ok(())
}

/// Splits every component into per-block centred parts and the block centres.
pub fn decompose<T: Scalar>(s: &AlbouyState<T>, part: &ClusterPartition) -> Result<ClusterDecomposition<T>> {
    check_partition(s, part)?;
    let n = s.n();
    let masses = s.masses().clone();
    let mut clusters: Vec<[Vec<T>; 6]> = part.blocks().iter().map(|_| std::array::from_fn(|_| vec![T::zero(); n])).collect();
    let mut centres: [Vec<T>; 6] = std::array::from_fn(|_| vec![T::zero(); n]);
    for (k, comp) in s.components().iter().enumerate() {
        let xi = comp.entries();
        for (b, block) in part.blocks().iter().enumerate() {
            let bm: Vec<T> = block.iter().map(|&i| masses[i]).collect();
            let be: Vec<T> = block.iter().map(|&i| xi[i]).collect();
            let centre = weighted_mean(&be, &bm);
            for &i in block {
                clusters[b][k][i] = xi[i] - centre;
                centres[k][i] = centre;
            }
        }
    }
    Ok(ClusterDecomposition {
        cluster_states: clusters.into_iter().map(|c| AlbouyState::from_raw(masses.clone(), c)).collect(),
        centres_state: AlbouyState::from_raw(masses, centres),
    })
}

/// Centre of mass of each block.
pub fn block_centres<T: Scalar>(s: &AlbouyState<T>, part: &ClusterPartition) -> Vec<Vec3<T>> {
    let m = s.masses();
    part.blocks()
        .iter()
        .map(|block| {
            let bm: Vec<T> = block.iter().map(|&i| m[i]).collect();
            std::array::from_fn(|k| {
                let e: Vec<T> = block.iter().map(|&i| s.components()[k].entries()[i]).collect();
                weighted_mean(&e, &bm)
            })
        })
        .collect()
}

fn distance<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    linalg::norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

/// Smallest distance between block centres; `None` for a single block.
pub fn min_centre_distance<T: Scalar>(s: &AlbouyState<T>, part: &ClusterPartition) -> Option<T> {
    let c = block_centres(s, part);
    let mut best: Option<T> = None;
    for a in 0..c.len() {
        for b in a + 1..c.len() {
            let d = distance(&c[a], &c[b]);
            best = Some(best.map_or(d, |m: T| m.min(d)));
        }
    }
    best
}

/// Largest distance between two bodies of `block`.
pub fn block_diameter<T: Scalar>(s: &AlbouyState<T>, block: &[usize]) -> T {
    let mut d = T::zero();
    for (a, &i) in block.iter().enumerate() {
        for &j in &block[a + 1..] {
            d = d.max(distance(&s.position(i), &s.position(j)));
        }
    }
    d
}

/// Smallest distance between two bodies; `None` for fewer than two bodies.
pub fn min_pair_distance<T: Scalar>(s: &AlbouyState<T>) -> Option<T> {
    let mut best: Option<T> = None;
    for i in 0..s.n() {
        for j in i + 1..s.n() {
            let d = distance(&s.position(i), &s.position(j));
            best = Some(best.map_or(d, |m: T| m.min(d)));
        }
    }
    best
}

/// Additivity errors at one index, relative to `I + K` of the state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityRow {
    pub k_error: f64,
    pub i_error: f64,
    pub l_error: f64,
    /// Largest `|<a, b>|` between distinct pieces over the product of their norms.
    pub orthogonality: f64,
    /// `V(S)` minus the intra-block potential.
    pub v_remainder: f64,
    /// Norm of the inter-block part of the potential gradient.
    pub grad_v_remainder: f64,
    pub min_centre_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdditivityReport {
    pub rows: Vec<AdditivityRow>,
    pub max_k_error: f64,
    pub max_i_error: f64,
    pub max_l_error: f64,
    pub max_orthogonality: f64,
    /// Log-log slope of the `V` remainder against the minimum centre distance.
    pub v_decay_slope: Option<f64>,
    pub grad_v_decay_slope: Option<f64>,
}

fn f<T: Scalar>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Largest normalised mass inner product between distinct pieces.
pub fn orthogonality_defect<T: Scalar>(d: &ClusterDecomposition<T>) -> Result<T> {
    let pieces: Vec<&AlbouyState<T>> = d.pieces().collect();
    let mut worst = T::zero();
    for a in 0..pieces.len() {
        for b in a + 1..pieces.len() {
            let scale = pieces[a].norm() * pieces[b].norm();
            if scale > T::zero() {
                // componentwise inner products, each bounded by the product of norms
                for k in 0..6 {
                    let ip = crate::state::mass_inner(&pieces[a].components()[k], &pieces[b].components()[k])?;
                    worst = worst.max(ip.abs() / scale);
                }
            }
        }
    }
    Ok(worst)
}

pub fn additivity_report<T: Scalar>(
    seq: &[AlbouyState<T>],
    pot: &PairPotential<T>,
    part: &ClusterPartition,
) -> Result<AdditivityReport> {
    let intra = pot.intra_blocks(part.blocks());
    let mut rows = Vec::with_capacity(seq.len());
    for s in seq {
        let d = decompose(s, part)?;
        let scale = f(s.norm_sq()).max(f64::MIN_POSITIVE);
        let k_sum = d.pieces().map(kinetic).fold(T::zero(), |a, b| a + b);
        let i_sum = d.pieces().map(inertia).fold(T::zero(), |a, b| a + b);
        let l_sum = d.pieces().map(angular_momentum).fold([T::zero(); 3], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]);
        let l = angular_momentum(s);
        let l_err = linalg::norm(&[l_sum[0] - l[0], l_sum[1] - l[1], l_sum[2] - l[2]]);
        let v_rem = pot.value(s)? - intra.value(s)?;
        let g_rem = pot.gradient(s)?.sub(&intra.gradient(s)?).norm();
        rows.push(AdditivityRow {
            k_error: f((k_sum - kinetic(s)).abs()) / scale,
            i_error: f((i_sum - inertia(s)).abs()) / scale,
            l_error: f(l_err) / scale,
            orthogonality: f(orthogonality_defect(&d)?),
            v_remainder: f(v_rem),
            grad_v_remainder: f(g_rem),
            min_centre_distance: min_centre_distance(s, part).map(f),
        });
    }
    let max = |g: fn(&AdditivityRow) -> f64| rows.iter().map(g).fold(0.0, f64::max);
    let decay = |g: fn(&AdditivityRow) -> f64| -> Option<f64> {
        let d: Option<Vec<f64>> = rows.iter().map(|r| r.min_centre_distance).collect();
        let d = d?;
        if d.iter().any(|&x| !(x > 0.0)) {
            return None;
        }
        let v: Vec<f64> = rows.iter().map(g).collect();
        fit_trend(&v, Some(&d), 0.0, &TrendOptions::default()).slope
    };
    Ok(AdditivityReport {
        max_k_error: max(|r| r.k_error),
        max_i_error: max(|r| r.i_error),
        max_l_error: max(|r| r.l_error),
        max_orthogonality: max(|r| r.orthogonality),
        v_decay_slope: decay(|r| r.v_remainder),
        grad_v_decay_slope: decay(|r| r.grad_v_remainder),
        rows,
    })
}

/// Required ratio between inter-centre distances and block diameters.
pub const SCALE_SEPARATION: f64 = 10.0;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn centre_of<T: Scalar>(s: &AlbouyState<T>, block: &[usize]) -> Vec3<T> {
    let m = s.masses();
    let bm: Vec<T> = block.iter().map(|&i| m[i]).collect();
    std::array::from_fn(|k| {
        let e: Vec<T> = block.iter().map(|&i| s.components()[k].entries()[i]).collect();
        weighted_mean(&e, &bm)
    })
}

/// Groups bodies whose distance to a growing cluster stays small over the
/// last `window` states, then checks that the result separates scales.
///
/// A body joins the current cluster when the minimum over the window of its
/// distance to the cluster's centre is below `threshold * (median diameter + 1)`.
/// With two or more blocks, every trailing state must have inter-centre
/// distances above `threshold` and at least [`SCALE_SEPARATION`] times the
/// largest block diameter, and the smallest inter-centre distance must grow
/// across the window without ever decreasing.
pub fn detect_clusters<T: Scalar>(seq: &[AlbouyState<T>], window: usize, threshold: f64) -> Result<ClusterPartition> {
    if window < 2 || seq.len() < window {
        return Err(Error::InvalidArgument(format!("need at least window = {window} >= 2 states, got {}", seq.len())));
    }
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument("threshold must be positive".into()));
    }
    let n = seq[0].n();
    let tail = &seq[seq.len() - window..];
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut blocks = Vec::new();
    while !remaining.is_empty() {
        let mut cluster = vec![remaining.remove(0)];
        loop {
            let diam = median(tail.iter().map(|s| f(block_diameter(s, &cluster))).collect());
            let limit = threshold * (diam + 1.0);
            let before = cluster.len();
            let mut deferred = Vec::new();
            for &b in &remaining {
                let liminf =
                    tail.iter().map(|s| f(distance(&s.position(b), &centre_of(s, &cluster)))).fold(f64::INFINITY, f64::min);
                if liminf < limit {
                    cluster.push(b);
                } else {
                    deferred.push(b);
                }
            }
            remaining = deferred;
            if cluster.len() == before {
                break;
            }
        }
        blocks.push(cluster);
    }
    let part = ClusterPartition::new(blocks, n)?;
    if part.len() >= 2 {
        let mut previous = 0.0;
        let mut first = None;
        for (idx, s) in tail.iter().enumerate() {
            let inter = min_centre_distance(s, &part).map(f).unwrap_or(f64::NAN);
            let intra = part.blocks().iter().map(|b| f(block_diameter(s, b))).fold(0.0, f64::max);
            let first = *first.get_or_insert(inter);
            let stalled = idx == window - 1 && !(inter > first);
            if !(inter >= SCALE_SEPARATION * intra) || !(inter > threshold) || inter < previous || stalled {
                return Err(Error::InconclusiveClusters(format!(
                    "no scale separation (inter-centre {inter:.3e}, block diameter {intra:.3e}); try a longer sequence"
                )));
            }
            previous = inter;
        }
    }
    Ok(part)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockResidual {
    pub block: Vec<usize>,
    pub residuals: Vec<f64>,
    pub trend: Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterCriticality {
    pub whole: Vec<f64>,
    pub whole_trend: Trend,
    pub blocks: Vec<BlockResidual>,
    /// False when the whole residual tends to zero but some block residual does not.
    pub consistent: bool,
}

/// Residual relative to `max |grad H|` below which a value counts as zero.
pub const NEGLIGIBLE_RESIDUAL: f64 = 1e-9;

/// Per-block Lagrange residuals with the whole sequence's multipliers.
pub fn cluster_criticality<T: Scalar>(
    seq: &[AlbouyState<T>],
    pot: &PairPotential<T>,
    part: &ClusterPartition,
    multipliers: &[Multiplier<T>],
    abscissa: Option<&[f64]>,
) -> Result<ClusterCriticality> {
    if multipliers.len() != seq.len() {
        return Err(Error::DimensionMismatch { expected: seq.len(), found: multipliers.len() });
    }
    let opts = TrendOptions::default();
    let mut whole = Vec::with_capacity(seq.len());
    let mut whole_scale = 0.0f64;
    let mut per_block = vec![(Vec::with_capacity(seq.len()), 0.0f64); part.len()];
    for (s, lam) in seq.iter().zip(multipliers) {
        let g = grad_hamiltonian(s, pot)?;
        whole_scale = whole_scale.max(f(g.norm()));
        whole.push(f(residual_from_gradient(&g, s, lam).norm));
        let d = decompose(s, part)?;
        for (b, block) in part.blocks().iter().enumerate() {
            let sub = d.cluster_states[b].restrict(block);
            let gb = grad_hamiltonian(&sub, &pot.restrict(block))?;
            per_block[b].1 = per_block[b].1.max(f(gb.norm()));
            per_block[b].0.push(f(residual_from_gradient(&gb, &sub, lam).norm));
        }
    }
    let whole_trend = fit_trend(&whole, abscissa, NEGLIGIBLE_RESIDUAL * whole_scale, &opts);
    let blocks: Vec<BlockResidual> = part
        .blocks()
        .iter()
        .zip(per_block)
        .map(|(block, (residuals, scale))| {
            let trend = fit_trend(&residuals, abscissa, NEGLIGIBLE_RESIDUAL * scale, &opts);
            BlockResidual { block: block.clone(), residuals, trend }
        })
        .collect();
    let consistent = !whole_trend.to_zero || blocks.iter().all(|b| b.trend.to_zero);
    Ok(ClusterCriticality { whole, whole_trend, blocks, consistent })
}
