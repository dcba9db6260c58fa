//! Two-body reduction, the effective potential `U(r) = l^2 / (2 mu r^2) + gamma f(r)`,
//! circular relative equilibria and the bifurcation values of three-body systems.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::potential::{HomogeneousKernel, KernelKind};
use crate::scalar::Scalar;
use crate::state::{to_albouy, AlbouyState, BodySystem, CartesianState};

/// Relative motion of one pair: reduced mass, total mass and coupling.
#[derive(Debug, Clone)]
pub struct TwoBodyReduction<T: Scalar> {
    pub pair: (usize, usize),
    /// Reduced mass `m_i m_j / (m_i + m_j)`.
    pub mu: T,
    /// Total mass of the pair.
    pub m: T,
    /// Pair coefficient `alpha_ij`.
    pub gamma: T,
    pub kernel: HomogeneousKernel<T>,
}

pub fn reduce_two_body<T: Scalar>(sys: &BodySystem<T>, pair: (usize, usize)) -> Result<TwoBodyReduction<T>> {
    let (i, j) = pair;
    if i == j || i >= sys.n() || j >= sys.n() {
        return Err(Error::InvalidArgument(format!("invalid pair ({i}, {j}) for {} bodies", sys.n())));
    }
    let (mi, mj) = (sys.masses()[i], sys.masses()[j]);
    Ok(TwoBodyReduction {
        pair,
        mu: mi * mj / (mi + mj),
        m: mi + mj,
        gamma: sys.pair_coefficients().get(i, j),
        kernel: sys.kernel(),
    })
}

pub fn effective_potential<T: Scalar>(red: &TwoBodyReduction<T>, ell: T, r: T) -> Result<T> {
    if !(r > T::zero()) {
        return Err(Error::InvalidArgument("effective potential needs r > 0".into()));
    }
    Ok(ell * ell / (T::lit(2.0) * red.mu * r * r) + red.gamma * red.kernel.evaluate(r))
}

/// `U'(r) = -l^2 / (mu r^3) + gamma f'(r)`.
pub fn effective_potential_derivative<T: Scalar>(red: &TwoBodyReduction<T>, ell: T, r: T) -> T {
    -ell * ell / (red.mu * r * r * r) + red.gamma * red.kernel.derivative(r)
}

/// A circular relative equilibrium of a pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeEquilibrium<T> {
    /// Separation of the two bodies.
    pub r_star: T,
    /// Angular momentum.
    pub ell: T,
    /// Angular velocity; also the Lagrange multiplier along `L_z`.
    pub omega: T,
    /// Energy.
    pub h: T,
    /// Bifurcation value `-h l^2`.
    pub nu: T,
}

fn equilibrium_at<T: Scalar>(red: &TwoBodyReduction<T>, ell: T, r: T) -> Result<RelativeEquilibrium<T>> {
    let h = effective_potential(red, ell, r)?;
    Ok(RelativeEquilibrium { r_star: r, ell, omega: ell / (red.mu * r * r), h, nu: -h * ell * ell })
}

fn no_re<T: Scalar>(red: &TwoBodyReduction<T>) -> Error {
    Error::NoRelativeEquilibrium { i: red.pair.0, j: red.pair.1, gamma: red.gamma.to_f64().unwrap_or(f64::NAN) }
}

/// The primary (smallest-separation) relative equilibrium.
///
/// For `f = 1/x` this is the closed form `r* = -l^2 / (mu gamma)`; other
/// kernels go through [`solve_relative_equilibria`].
pub fn solve_relative_equilibrium<T: Scalar>(red: &TwoBodyReduction<T>, ell: T) -> Result<RelativeEquilibrium<T>> {
    if ell == T::zero() || !ell.is_finite() {
        return Err(Error::InvalidArgument("angular momentum must be nonzero".into()));
    }
    if red.kernel.kind() == KernelKind::InverseR {
        if !(red.gamma < T::zero()) {
            return Err(no_re(red));
        }
        let r = -ell * ell / (red.mu * red.gamma);
        let h = -red.mu * red.gamma * red.gamma / (T::lit(2.0) * ell * ell);
        return Ok(RelativeEquilibrium {
            r_star: r,
            ell,
            omega: ell / (red.mu * r * r),
            h,
            nu: red.mu * red.gamma * red.gamma / T::lit(2.0),
        });
    }
    solve_relative_equilibria(red, ell)?.into_iter().next().ok_or_else(|| no_re(red))
}

/// Every root of `U'` found on a logarithmic grid, sorted by separation.
///
/// Uniqueness is not assumed: each sign change on the grid is refined by
/// bisection. The grid is widened up to three times when no root is seen.
pub fn solve_relative_equilibria<T: Scalar>(red: &TwoBodyReduction<T>, ell: T) -> Result<Vec<RelativeEquilibrium<T>>> {
    if ell == T::zero() || !ell.is_finite() {
        return Err(Error::InvalidArgument("angular momentum must be nonzero".into()));
    }
    let scale = ell * ell / (red.mu * red.gamma.abs().max(T::epsilon()));
    let du = |r: T| effective_potential_derivative(red, ell, r);
    let mut decades = 6.0;
    for _ in 0..4 {
        let lo = scale * T::lit(10f64.powf(-decades));
        let hi = scale * T::lit(10f64.powf(decades));
        let steps = (400.0 * decades) as usize;
        let ratio = (hi / lo).ln() / T::lit(steps as f64);
        let grid: Vec<T> = (0..=steps).map(|k| lo * (ratio * T::lit(k as f64)).exp()).collect();
        let mut roots = Vec::new();
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (fa, fb) = (du(a), du(b));
            if fa == T::zero() {
                roots.push(a);
            } else if fa.signum() != fb.signum() && fb != T::zero() && fa.is_finite() && fb.is_finite() {
                roots.push(bisect(&du, a, b));
            }
        }
        if !roots.is_empty() {
            return roots.into_iter().map(|r| equilibrium_at(red, ell, r)).collect();
        }
        decades *= 2.0;
    }
    Err(no_re(red))
}

fn bisect<T: Scalar>(f: &impl Fn(T) -> T, mut a: T, mut b: T) -> T {
    let mut fa = f(a);
    for _ in 0..200 {
        let mid = (a * b).sqrt();
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
        if (b - a) <= T::epsilon() * b {
            break;
        }
    }
    (a * b).sqrt()
}

/// A body placed relative to the centre of mass of an embedded pair, at rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Spectator<T> {
    pub index: usize,
    /// Position relative to the pair's centre of mass.
    pub offset: Vec3<T>,
}

/// Places `pair` on the circular orbit `re` in the `(x, y)`-plane, rotating
/// counterclockwise for `l > 0`, at angular `phase`. The pair's centre of
/// mass is at rest. Every other body must be the spectator.
pub fn embed_re<T: Scalar>(
    sys: &BodySystem<T>,
    pair: (usize, usize),
    spectator: Option<Spectator<T>>,
    re: &RelativeEquilibrium<T>,
    phase: T,
) -> Result<AlbouyState<T>> {
    let (i, j) = pair;
    let expected = 2 + usize::from(spectator.is_some());
    if sys.n() != expected || i == j || i >= sys.n() || j >= sys.n() {
        return Err(Error::InvalidArgument(format!(
            "pair ({i}, {j}) and {} spectator(s) do not cover {} bodies",
            expected - 2,
            sys.n()
        )));
    }
    if let Some(sp) = &spectator {
        if sp.index == i || sp.index == j || sp.index >= sys.n() {
            return Err(Error::InvalidArgument(format!("spectator index {} clashes with the pair", sp.index)));
        }
    }
    if !(re.r_star > T::zero()) {
        return Err(Error::InvalidArgument("relative equilibrium needs r* > 0".into()));
    }
    let (mi, mj) = (sys.masses()[i], sys.masses()[j]);
    let m = mi + mj;
    let (s, c) = phase.sin_cos();
    let zero = T::zero();
    let mut positions = vec![[zero; 3]; sys.n()];
    let mut velocities = vec![[zero; 3]; sys.n()];
    let ri = re.r_star * mj / m;
    let rj = -(re.r_star * mi / m);
    positions[i] = [ri * c, ri * s, zero];
    positions[j] = [rj * c, rj * s, zero];
    velocities[i] = [-(re.omega * ri * s), re.omega * ri * c, zero];
    velocities[j] = [-(re.omega * rj * s), re.omega * rj * c, zero];
    if let Some(sp) = spectator {
        positions[sp.index] = sp.offset;
    }
    to_albouy(&CartesianState { positions, velocities }, sys)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BifurcationValue<T> {
    /// Zero-based body indices, `i < j`.
    pub pair: (usize, usize),
    pub gamma: T,
    pub mu: T,
    pub nu: T,
}

/// Bifurcation values of the critical points at infinity of a three-body
/// system: one per attracting pair, `nu = mu gamma^2 / 2`, sorted ascending.
pub fn bifurcation_values<T: Scalar>(sys: &BodySystem<T>) -> Result<Vec<BifurcationValue<T>>> {
    if sys.n() != 3 {
        return Err(Error::InvalidArgument(format!("bifurcation values need 3 bodies, got {}", sys.n())));
    }
    let kernel = sys.kernel();
    if kernel.degree() != -T::one() {
        return Err(Error::InvalidArgument("bifurcation values need a kernel of degree -1".into()));
    }
    let mut out = Vec::new();
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let red = reduce_two_body(sys, (i, j))?;
        if !(red.gamma < T::zero()) {
            continue;
        }
        let nu = if kernel.kind() == KernelKind::InverseR {
            red.mu * red.gamma * red.gamma / T::lit(2.0)
        } else {
            match solve_relative_equilibrium(&red, T::one()) {
                Ok(re) => re.nu,
                Err(Error::NoRelativeEquilibrium { .. }) => continue,
                Err(e) => return Err(e),
            }
        };
        out.push(BifurcationValue { pair: (i, j), gamma: red.gamma, mu: red.mu, nu });
    }
    out.sort_by(|a, b| a.nu.partial_cmp(&b.nu).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}
