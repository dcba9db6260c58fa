//! Translation-reduced phase space in Albouy coordinates.
//!
//! A state of `N` bodies is stored as six vectors `(X, Y, Z, P, Q, R)` of
//! length `N`: the three position components and the three velocity
//! components of every body. Each vector lies in
//! `D_N = { xi : sum_i m_i xi_i = 0 }` and `D_N` carries the mass inner
//! product `<X, Y> = sum_i m_i X_i Y_i`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3, Vec3};
use crate::potential::{HomogeneousKernel, PairCoefficients, PairPotential};
use crate::scalar::Scalar;

/// How the bodies interact; fixes the pair coefficients and the kernel `f`.
#[derive(Debug, Clone)]
pub enum Interaction<T: Scalar> {
    /// `alpha_ij = -m_i m_j`, `f(x) = 1/x`.
    Gravitational,
    /// `alpha_ij = c_i c_j`, `f(x) = 1/x`. Requires charges.
    Coulomb,
    /// Caller-supplied coefficients and kernel.
    CustomHomogeneous { kernel: HomogeneousKernel<T>, coefficients: PairCoefficients<T> },
}

impl<T: Scalar> Interaction<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Interaction::Gravitational => "gravitational",
            Interaction::Coulomb => "coulomb",
            Interaction::CustomHomogeneous { .. } => "custom",
        }
    }
}

/// Masses, optional charges and interaction law of an `N`-body problem.
#[derive(Debug, Clone)]
pub struct BodySystem<T: Scalar> {
    masses: Arc<[T]>,
    charges: Option<Vec<T>>,
    interaction: Interaction<T>,
}

impl<T: Scalar> BodySystem<T> {
    pub fn new(masses: Vec<T>, charges: Option<Vec<T>>, interaction: Interaction<T>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidSystem("at least one body is required".into()));
        }
        if let Some(bad) = masses.iter().position(|m| !(m.is_finite() && *m > T::zero())) {
            return Err(Error::InvalidSystem(format!("mass {bad} is not strictly positive")));
        }
        if let Some(c) = &charges {
            if c.len() != masses.len() {
                return Err(Error::InvalidSystem(format!(
                    "{} charges given for {} bodies",
                    c.len(),
                    masses.len()
                )));
            }
            if c.iter().any(|q| !q.is_finite()) {
                return Err(Error::InvalidSystem("non-finite charge".into()));
            }
        }
        match &interaction {
            Interaction::Coulomb if charges.is_none() => {
                return Err(Error::InvalidSystem("coulomb interaction requires charges".into()))
            }
            Interaction::CustomHomogeneous { coefficients, .. } if coefficients.len() != masses.len() => {
                return Err(Error::DimensionMismatch { expected: masses.len(), found: coefficients.len() })
            }
            _ => {}
        }
        Ok(Self { masses: masses.into(), charges, interaction })
    }

    pub fn gravitational(masses: Vec<T>) -> Result<Self> {
        Self::new(masses, None, Interaction::Gravitational)
    }

    pub fn coulomb(masses: Vec<T>, charges: Vec<T>) -> Result<Self> {
        Self::new(masses, Some(charges), Interaction::Coulomb)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &Arc<[T]> {
        &self.masses
    }

    pub fn charges(&self) -> Option<&[T]> {
        self.charges.as_deref()
    }

    pub fn interaction(&self) -> &Interaction<T> {
        &self.interaction
    }

    pub fn total_mass(&self) -> T {
        self.masses.iter().copied().sum()
    }

    pub fn pair_coefficients(&self) -> PairCoefficients<T> {
        match &self.interaction {
            Interaction::Gravitational => PairCoefficients::gravitational(&self.masses),
            Interaction::Coulomb => PairCoefficients::coulomb(self.charges.as_deref().unwrap_or_default()),
            Interaction::CustomHomogeneous { coefficients, .. } => coefficients.clone(),
        }
    }

    pub fn kernel(&self) -> HomogeneousKernel<T> {
        match &self.interaction {
            Interaction::CustomHomogeneous { kernel, .. } => kernel.clone(),
            _ => HomogeneousKernel::inverse_r(),
        }
    }

    pub fn potential(&self) -> PairPotential<T> {
        PairPotential::new(self.pair_coefficients(), self.kernel())
    }

    /// The system formed by the bodies in `block` (indices into this system).
    pub fn subsystem(&self, block: &[usize]) -> Result<Self> {
        if let Some(&bad) = block.iter().find(|&&i| i >= self.n()) {
            return Err(Error::InvalidArgument(format!("body index {bad} out of range")));
        }
        let masses = block.iter().map(|&i| self.masses[i]).collect();
        let charges = self.charges.as_ref().map(|c| block.iter().map(|&i| c[i]).collect());
        let interaction = match &self.interaction {
            Interaction::CustomHomogeneous { kernel, coefficients } => {
                Interaction::CustomHomogeneous { kernel: kernel.clone(), coefficients: coefficients.restrict(block) }
            }
            other => other.clone(),
        };
        Self::new(masses, charges, interaction)
    }
}

fn same_masses<T: Scalar>(a: &Arc<[T]>, b: &Arc<[T]>) -> bool {
    Arc::ptr_eq(a, b) || a[..] == b[..]
}

/// An `N`-vector in the mass-weighted zero-sum subspace `D_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DnVector<T: Scalar> {
    entries: Vec<T>,
    masses: Arc<[T]>,
}

impl<T: Scalar> DnVector<T> {
    /// Validating constructor.
    pub fn new(entries: Vec<T>, masses: Arc<[T]>) -> Result<Self> {
        if entries.len() != masses.len() {
            return Err(Error::DimensionMismatch { expected: masses.len(), found: entries.len() });
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::NonFinite("D_N vector"));
        }
        let v = Self { entries, masses };
        let (residual, tolerance) = v.zero_sum_check();
        if residual > tolerance {
            return Err(Error::NotInDn {
                residual: residual.to_f64().unwrap_or(f64::NAN),
                tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(v)
    }

    /// Projects arbitrary entries onto `D_N` by subtracting the mass-weighted mean.
    pub fn centred(mut entries: Vec<T>, masses: Arc<[T]>) -> Result<Self> {
        if entries.len() != masses.len() {
            return Err(Error::DimensionMismatch { expected: masses.len(), found: entries.len() });
        }
        let mean = weighted_mean(&entries, &masses);
        for e in entries.iter_mut() {
            *e = *e - mean;
        }
        Ok(Self { entries, masses })
    }

    pub fn zeros(masses: Arc<[T]>) -> Self {
        Self { entries: vec![T::zero(); masses.len()], masses }
    }

    pub(crate) fn from_raw(entries: Vec<T>, masses: Arc<[T]>) -> Self {
        debug_assert_eq!(entries.len(), masses.len());
        Self { entries, masses }
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn masses(&self) -> &Arc<[T]> {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `(|sum m_i xi_i|, tolerance)` for the `D_N` membership test.
    pub fn zero_sum_check(&self) -> (T, T) {
        let total: T = self.masses.iter().copied().sum();
        let max = self.entries.iter().fold(T::zero(), |a, e| a.max(e.abs()));
        let sum: T = self.entries.iter().zip(self.masses.iter()).map(|(&e, &m)| m * e).sum();
        (sum.abs(), T::dn_tolerance() * total * max)
    }

    pub fn in_dn(&self) -> bool {
        let (r, t) = self.zero_sum_check();
        r <= t
    }

    pub fn norm_sq(&self) -> T {
        self.entries.iter().zip(self.masses.iter()).map(|(&e, &m)| m * e * e).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self::from_raw(self.entries.iter().map(|&e| e * c).collect(), self.masses.clone())
    }

    pub(crate) fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        Self::from_raw(self.entries.iter().zip(&other.entries).map(|(&a, &b)| f(a, b)).collect(), self.masses.clone())
    }

    /// Indices of `self` restricted to `block`, with the block's masses.
    pub(crate) fn restrict(&self, block: &[usize]) -> Self {
        let masses: Arc<[T]> = block.iter().map(|&i| self.masses[i]).collect();
        Self::from_raw(block.iter().map(|&i| self.entries[i]).collect(), masses)
    }
}

pub(crate) fn weighted_mean<T: Scalar>(entries: &[T], masses: &[T]) -> T {
    if let [only] = entries {
        // m * x / m need not round back to x
        return *only;
    }
    let total: T = masses.iter().copied().sum();
    let sum: T = entries.iter().zip(masses).map(|(&e, &m)| m * e).sum();
    sum / total
}

/// The mass inner product `sum_i m_i xi_i eta_i`.
pub fn mass_inner<T: Scalar>(a: &DnVector<T>, b: &DnVector<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    if !same_masses(&a.masses, &b.masses) {
        return Err(Error::MassMismatch);
    }
    Ok(a.entries.iter().zip(&b.entries).zip(a.masses.iter()).map(|((&x, &y), &m)| m * (x * y)).sum())
}

/// Index of each component inside [`AlbouyState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    X = 0,
    Y = 1,
    Z = 2,
    P = 3,
    Q = 4,
    R = 5,
}

/// A point `(X, Y, Z, P, Q, R)` of the translation-reduced phase space `D_N^6`.
///
/// The same type doubles as a tangent vector (gradients and residuals).
#[derive(Debug, Clone, PartialEq)]
pub struct AlbouyState<T: Scalar> {
    comps: [DnVector<T>; 6],
}

impl<T: Scalar> AlbouyState<T> {
    pub fn new(comps: [DnVector<T>; 6]) -> Result<Self> {
        let n = comps[0].len();
        for c in &comps[1..] {
            if c.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: c.len() });
            }
            if !same_masses(&comps[0].masses, &c.masses) {
                return Err(Error::MassMismatch);
            }
        }
        Ok(Self { comps })
    }

    /// Validates each raw component against `D_N`.
    pub fn from_components(masses: Arc<[T]>, comps: [Vec<T>; 6]) -> Result<Self> {
        let [x, y, z, p, q, r] = comps;
        Ok(Self {
            comps: [
                DnVector::new(x, masses.clone())?,
                DnVector::new(y, masses.clone())?,
                DnVector::new(z, masses.clone())?,
                DnVector::new(p, masses.clone())?,
                DnVector::new(q, masses.clone())?,
                DnVector::new(r, masses)?,
            ],
        })
    }

    pub(crate) fn from_raw(masses: Arc<[T]>, comps: [Vec<T>; 6]) -> Self {
        let mut it = comps.into_iter();
        Self { comps: std::array::from_fn(|_| DnVector::from_raw(it.next().unwrap(), masses.clone())) }
    }

    pub fn zeros(masses: Arc<[T]>) -> Self {
        Self { comps: std::array::from_fn(|_| DnVector::zeros(masses.clone())) }
    }

    pub fn n(&self) -> usize {
        self.comps[0].len()
    }

    pub fn masses(&self) -> &Arc<[T]> {
        &self.comps[0].masses
    }

    pub fn component(&self, c: Component) -> &DnVector<T> {
        &self.comps[c as usize]
    }

    pub fn components(&self) -> &[DnVector<T>; 6] {
        &self.comps
    }

    pub fn x(&self) -> &DnVector<T> {
        &self.comps[0]
    }
    pub fn y(&self) -> &DnVector<T> {
        &self.comps[1]
    }
    pub fn z(&self) -> &DnVector<T> {
        &self.comps[2]
    }
    pub fn p(&self) -> &DnVector<T> {
        &self.comps[3]
    }
    pub fn q(&self) -> &DnVector<T> {
        &self.comps[4]
    }
    pub fn r(&self) -> &DnVector<T> {
        &self.comps[5]
    }

    pub fn position(&self, i: usize) -> Vec3<T> {
        [self.comps[0].entries[i], self.comps[1].entries[i], self.comps[2].entries[i]]
    }

    pub fn velocity(&self, i: usize) -> Vec3<T> {
        [self.comps[3].entries[i], self.comps[4].entries[i], self.comps[5].entries[i]]
    }

    /// True when every component satisfies the `D_N` tolerance.
    pub fn in_dn(&self) -> bool {
        self.comps.iter().all(DnVector::in_dn)
    }

    /// Phase-space inner product: the sum of the mass inner products of the six components.
    pub fn inner(&self, other: &Self) -> Result<T> {
        let mut acc = T::zero();
        for (a, b) in self.comps.iter().zip(&other.comps) {
            acc = acc + mass_inner(a, b)?;
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> T {
        self.comps.iter().map(DnVector::norm_sq).sum()
    }

    /// Mass-weighted Euclidean norm over all six components.
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { comps: std::array::from_fn(|k| self.comps[k].scaled(c)) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { comps: std::array::from_fn(|k| self.comps[k].zip_with(&other.comps[k], |a, b| a + b)) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { comps: std::array::from_fn(|k| self.comps[k].zip_with(&other.comps[k], |a, b| a - b)) }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: T, other: &Self) -> Self {
        Self { comps: std::array::from_fn(|k| self.comps[k].zip_with(&other.comps[k], |a, b| a + c * b)) }
    }

    /// Same state with the velocity components set to zero.
    pub fn positions_only(&self) -> Self {
        let mut out = self.clone();
        for k in 3..6 {
            out.comps[k] = DnVector::zeros(self.masses().clone());
        }
        out
    }

    /// The sub-state of the bodies in `block`. Entries are taken as they are,
    /// so the result lies in `D_block` only if the block is already centred.
    pub fn restrict(&self, block: &[usize]) -> Self {
        Self { comps: std::array::from_fn(|k| self.comps[k].restrict(block)) }
    }

    /// Positions and velocities as Cartesian triples (in the centre-of-mass frame).
    pub fn to_cartesian(&self) -> CartesianState<T> {
        CartesianState {
            positions: (0..self.n()).map(|i| self.position(i)).collect(),
            velocities: (0..self.n()).map(|i| self.velocity(i)).collect(),
        }
    }
}

/// Positions and velocities in an arbitrary inertial frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianState<T: Scalar> {
    pub positions: Vec<Vec3<T>>,
    pub velocities: Vec<Vec3<T>>,
}

impl<T: Scalar> CartesianState<T> {
    /// Converts momentum input to velocities, `v_i = p_i / m_i`.
    pub fn from_momenta(positions: Vec<Vec3<T>>, momenta: &[Vec3<T>], masses: &[T]) -> Result<Self> {
        if momenta.len() != masses.len() {
            return Err(Error::DimensionMismatch { expected: masses.len(), found: momenta.len() });
        }
        let velocities = momenta.iter().zip(masses).map(|(p, &m)| [p[0] / m, p[1] / m, p[2] / m]).collect();
        Ok(Self { positions, velocities })
    }
}

/// Removes centre-of-mass position and velocity and splits into Albouy components.
pub fn to_albouy<T: Scalar>(c: &CartesianState<T>, sys: &BodySystem<T>) -> Result<AlbouyState<T>> {
    let n = sys.n();
    for len in [c.positions.len(), c.velocities.len()] {
        if len != n {
            return Err(Error::DimensionMismatch { expected: n, found: len });
        }
    }
    if c.positions.iter().chain(&c.velocities).flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("cartesian state"));
    }
    let masses = sys.masses().clone();
    let column = |rows: &[Vec3<T>], k: usize| rows.iter().map(|r| r[k]).collect::<Vec<_>>();
    let comps = [
        DnVector::centred(column(&c.positions, 0), masses.clone())?,
        DnVector::centred(column(&c.positions, 1), masses.clone())?,
        DnVector::centred(column(&c.positions, 2), masses.clone())?,
        DnVector::centred(column(&c.velocities, 0), masses.clone())?,
        DnVector::centred(column(&c.velocities, 1), masses.clone())?,
        DnVector::centred(column(&c.velocities, 2), masses)?,
    ];
    AlbouyState::new(comps)
}

/// Twice the kinetic energy, `K = |P|^2 + |Q|^2 + |R|^2`.
pub fn kinetic<T: Scalar>(s: &AlbouyState<T>) -> T {
    s.p().norm_sq() + s.q().norm_sq() + s.r().norm_sq()
}

/// Moment of inertia, `I = |X|^2 + |Y|^2 + |Z|^2`.
pub fn inertia<T: Scalar>(s: &AlbouyState<T>) -> T {
    s.x().norm_sq() + s.y().norm_sq() + s.z().norm_sq()
}

pub fn angular_momentum<T: Scalar>(s: &AlbouyState<T>) -> Vec3<T> {
    // masses are shared by construction, so the inner products cannot fail
    let ip = |a: &DnVector<T>, b: &DnVector<T>| mass_inner(a, b).expect("components share masses");
    [
        ip(s.y(), s.r()) - ip(s.z(), s.q()),
        ip(s.z(), s.p()) - ip(s.x(), s.r()),
        ip(s.x(), s.q()) - ip(s.y(), s.p()),
    ]
}

/// `K`, `I`, `L` always; `V` and `H` unless the configuration collides.
#[derive(Debug, Clone, PartialEq)]
pub struct Observables<T: Scalar> {
    pub k: T,
    pub i: T,
    pub l: Vec3<T>,
    pub v: Result<T>,
    pub h: Result<T>,
}

pub fn observables<T: Scalar>(s: &AlbouyState<T>, pot: &PairPotential<T>) -> Observables<T> {
    let k = kinetic(s);
    let v = pot.value(s);
    let h = v.clone().map(|v| k / T::lit(2.0) + v);
    Observables { k, i: inertia(s), l: angular_momentum(s), v, h }
}

/// Applies `g` to every body's position triple and velocity triple.
pub fn rotate<T: Scalar>(g: &Mat3<T>, s: &AlbouyState<T>) -> Result<AlbouyState<T>> {
    let dev = linalg::orthogonality_deviation(g);
    let tol = T::dn_tolerance();
    let det = linalg::det(g);
    if !(dev <= tol) || !((det - T::one()).abs() <= tol * T::lit(4.0)) {
        return Err(Error::NotRotation { deviation: dev.max((det - T::one()).abs()).to_f64().unwrap_or(f64::NAN) });
    }
    Ok(rotate_unchecked(g, s))
}

pub(crate) fn rotate_unchecked<T: Scalar>(g: &Mat3<T>, s: &AlbouyState<T>) -> AlbouyState<T> {
    let n = s.n();
    let mut comps: [Vec<T>; 6] = std::array::from_fn(|_| Vec::with_capacity(n));
    for i in 0..n {
        let pos = linalg::mat_vec(g, &s.position(i));
        let vel = linalg::mat_vec(g, &s.velocity(i));
        for k in 0..3 {
            comps[k].push(pos[k]);
            comps[k + 3].push(vel[k]);
        }
    }
    AlbouyState::from_raw(s.masses().clone(), comps)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IzKz<T> {
    pub iz: T,
    pub kz: T,
}

/// Planar parts `I_z = |X|^2 + |Y|^2` and `K_z = |P|^2 + |Q|^2`.
pub fn iz_kz<T: Scalar>(s: &AlbouyState<T>) -> IzKz<T> {
    IzKz { iz: s.x().norm_sq() + s.y().norm_sq(), kz: s.p().norm_sq() + s.q().norm_sq() }
}
