//! Pairwise homogeneous potentials `V = sum_{i<j} alpha_ij f(|q_i - q_j|)`,
//! their gradients on `D_N^6` and the dilation action.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::state::{weighted_mean, AlbouyState, DnVector};
use crate::scalar::Scalar;

/// Symmetric table of pair coefficients `alpha_ij`; the diagonal is unused.
#[derive(Debug, Clone, PartialEq)]
pub struct PairCoefficients<T: Scalar> {
    alpha: Vec<Vec<T>>,
}

impl<T: Scalar> PairCoefficients<T> {
    /// Validates squareness and exact symmetry.
    pub fn from_table(alpha: Vec<Vec<T>>) -> Result<Self> {
        let n = alpha.len();
        for (i, row) in alpha.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: row.len() });
            }
            for j in 0..i {
                if alpha[i][j] != alpha[j][i] {
                    return Err(Error::InvalidSystem(format!("alpha[{i}][{j}] != alpha[{j}][{i}]")));
                }
            }
        }
        Ok(Self { alpha })
    }

    /// `alpha_ij = -m_i m_j`.
    pub fn gravitational(masses: &[T]) -> Self {
        Self::outer(masses, |a, b| -(a * b))
    }

    /// `alpha_ij = c_i c_j`.
    pub fn coulomb(charges: &[T]) -> Self {
        Self::outer(charges, |a, b| a * b)
    }

    fn outer(v: &[T], f: impl Fn(T, T) -> T) -> Self {
        let n = v.len();
        let alpha = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::zero() } else { f(v[i], v[j]) }).collect())
            .collect();
        Self { alpha }
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.alpha[i][j]
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { alpha: self.alpha.iter().map(|r| r.iter().map(|&a| a * c).collect()).collect() }
    }

    /// Coefficients among the bodies of `block`, reindexed from zero.
    pub fn restrict(&self, block: &[usize]) -> Self {
        Self { alpha: block.iter().map(|&i| block.iter().map(|&j| self.alpha[i][j]).collect()).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    /// `f(x) = 1/x`.
    InverseR,
    /// `f(x) = x^degree`.
    Power,
    Custom,
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// The distance kernel `f` together with its derivative and declared degree.
#[derive(Clone)]
pub struct HomogeneousKernel<T: Scalar> {
    degree: T,
    kind: KernelKind,
    f: ScalarFn<T>,
    df: ScalarFn<T>,
}

impl<T: Scalar> fmt::Debug for HomogeneousKernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousKernel").field("degree", &self.degree).field("kind", &self.kind).finish()
    }
}

impl<T: Scalar> HomogeneousKernel<T> {
    /// `f(x) = 1/x`, degree `-1`.
    pub fn inverse_r() -> Self {
        Self {
            degree: -T::one(),
            kind: KernelKind::InverseR,
            f: Arc::new(|x: T| x.recip()),
            df: Arc::new(|x: T| -(x * x).recip()),
        }
    }

    /// `f(x) = x^degree` for a negative degree.
    pub fn power(degree: T) -> Result<Self> {
        if !(degree < T::zero()) {
            return Err(Error::InvalidArgument("power kernel needs a negative degree".into()));
        }
        Ok(Self {
            degree,
            kind: KernelKind::Power,
            f: Arc::new(move |x: T| x.powf(degree)),
            df: Arc::new(move |x: T| degree * x.powf(degree - T::one())),
        })
    }

    /// A caller-supplied kernel; must pass [`homogeneity_degree_check`] and the tail check.
    pub fn custom(
        degree: T,
        f: impl Fn(T) -> T + Send + Sync + 'static,
        df: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        let k = Self::unchecked(degree, f, df);
        let report = homogeneity_degree_check(&k, &default_samples());
        if !report.pass {
            return Err(Error::NotHomogeneous {
                degree: degree.to_f64().unwrap_or(f64::NAN),
                worst: report.worst_relative.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !k.tail_vanishes() {
            return Err(Error::InvalidArgument("kernel and its derivative must vanish at infinity".into()));
        }
        Ok(k)
    }

    /// Skips every validation; used to probe kernels with [`homogeneity_degree_check`].
    pub fn unchecked(
        degree: T,
        f: impl Fn(T) -> T + Send + Sync + 'static,
        df: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Self {
        Self { degree, kind: KernelKind::Custom, f: Arc::new(f), df: Arc::new(df) }
    }

    pub fn degree(&self) -> T {
        self.degree
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn evaluate(&self, x: T) -> T {
        (self.f)(x)
    }

    pub fn derivative(&self, x: T) -> T {
        (self.df)(x)
    }

    /// `|f|` and `|f'|` decrease monotonically towards zero on a far-field grid.
    pub fn tail_vanishes(&self) -> bool {
        let grid: Vec<T> = (1..=8).map(|k| T::lit(10f64.powi(k))).collect();
        let decreasing = |g: &dyn Fn(T) -> T| {
            let vals: Vec<T> = grid.iter().map(|&x| g(x).abs()).collect();
            vals.windows(2).all(|w| w[1] <= w[0]) && vals[vals.len() - 1] < vals[0] * T::lit(1e-3)
        };
        decreasing(&|x| self.evaluate(x)) && decreasing(&|x| self.derivative(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport<T> {
    pub pass: bool,
    pub worst_relative: T,
    pub checked: usize,
}

fn default_samples<T: Scalar>() -> Vec<T> {
    [0.1, 0.5, 1.0, 2.0, 3.7, 10.0].into_iter().map(T::lit).collect()
}

/// Checks `f(a x) = a^degree f(x)` for every pair `(a, x)` drawn from `samples`.
pub fn homogeneity_degree_check<T: Scalar>(kernel: &HomogeneousKernel<T>, samples: &[T]) -> HomogeneityReport<T> {
    let tol = T::lit(1e-10).max(T::epsilon() * T::lit(100.0));
    let mut worst = T::zero();
    let mut checked = 0;
    for &a in samples.iter().filter(|a| **a > T::zero()) {
        for &x in samples.iter().filter(|x| **x > T::zero()) {
            let lhs = kernel.evaluate(a * x);
            let rhs = a.powf(kernel.degree) * kernel.evaluate(x);
            let scale = lhs.abs().max(rhs.abs()).max(T::min_positive_value());
            let rel = (lhs - rhs).abs() / scale;
            worst = if rel.is_nan() { T::infinity() } else { worst.max(rel) };
            checked += 1;
        }
    }
    HomogeneityReport { pass: checked > 0 && worst <= tol, worst_relative: worst, checked }
}

/// Pair coefficients plus kernel: everything needed to evaluate `V`.
#[derive(Debug, Clone)]
pub struct PairPotential<T: Scalar> {
    pub coefficients: PairCoefficients<T>,
    pub kernel: HomogeneousKernel<T>,
}

impl<T: Scalar> PairPotential<T> {
    pub fn new(coefficients: PairCoefficients<T>, kernel: HomogeneousKernel<T>) -> Self {
        Self { coefficients, kernel }
    }

    /// `V = 0`: all coefficients zero, so only kinetic terms remain in `H`.
    pub fn free(n: usize) -> Self {
        Self::new(PairCoefficients { alpha: vec![vec![T::zero(); n]; n] }, HomogeneousKernel::inverse_r())
    }

    pub fn restrict(&self, block: &[usize]) -> Self {
        Self::new(self.coefficients.restrict(block), self.kernel.clone())
    }

    /// Keeps only pairs with both bodies inside the same block.
    pub fn intra_blocks(&self, blocks: &[Vec<usize>]) -> Self {
        let n = self.coefficients.len();
        let mut label = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            for &i in block {
                label[i] = b;
            }
        }
        let alpha = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if label[i] == label[j] { self.coefficients.alpha[i][j] } else { T::zero() })
                    .collect()
            })
            .collect();
        Self::new(PairCoefficients { alpha }, self.kernel.clone())
    }

    pub fn value(&self, s: &AlbouyState<T>) -> Result<T> {
        potential(s, &self.coefficients, &self.kernel)
    }

    pub fn gradient(&self, s: &AlbouyState<T>) -> Result<AlbouyState<T>> {
        grad_potential(s, &self.coefficients, &self.kernel)
    }
}

fn check_dims<T: Scalar>(s: &AlbouyState<T>, coeffs: &PairCoefficients<T>) -> Result<()> {
    if coeffs.len() != s.n() {
        return Err(Error::DimensionMismatch { expected: s.n(), found: coeffs.len() });
    }
    Ok(())
}

fn separation<T: Scalar>(s: &AlbouyState<T>, i: usize, j: usize) -> ([T; 3], T) {
    let (a, b) = (s.position(i), s.position(j));
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d, d[0].hypot(d[1]).hypot(d[2]))
}

/// `V = sum_{i<j} alpha_ij f(r_ij)`. Pairs with `alpha_ij = 0` are skipped,
/// so they may coincide without raising a collision.
pub fn potential<T: Scalar>(s: &AlbouyState<T>, coeffs: &PairCoefficients<T>, kernel: &HomogeneousKernel<T>) -> Result<T> {
    check_dims(s, coeffs)?;
    let mut v = T::zero();
    for i in 0..s.n() {
        for j in (i + 1)..s.n() {
            let a = coeffs.get(i, j);
            if a == T::zero() {
                continue;
            }
            let (_, r) = separation(s, i, j);
            if r < T::collision_distance() {
                return Err(Error::Collision { i, j });
            }
            v = v + a * kernel.evaluate(r);
        }
    }
    if !v.is_finite() {
        return Err(Error::NonFinite("potential"));
    }
    Ok(v)
}

/// Gradient of `V` with respect to the mass inner product: the entry for body
/// `i` is `(1/m_i) dV/dq_i`. Velocity components are zero.
pub fn grad_potential<T: Scalar>(
    s: &AlbouyState<T>,
    coeffs: &PairCoefficients<T>,
    kernel: &HomogeneousKernel<T>,
) -> Result<AlbouyState<T>> {
    check_dims(s, coeffs)?;
    let n = s.n();
    let mut g = vec![[T::zero(); 3]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let a = coeffs.get(i, j);
            if a == T::zero() {
                continue;
            }
            let (d, r) = separation(s, i, j);
            if r < T::collision_distance() {
                return Err(Error::Collision { i, j });
            }
            let c = a * kernel.derivative(r) / r;
            for k in 0..3 {
                g[i][k] = g[i][k] + c * d[k];
                g[j][k] = g[j][k] - c * d[k];
            }
        }
    }
    let masses = s.masses().clone();
    let mut comps: [Vec<T>; 6] = std::array::from_fn(|_| vec![T::zero(); n]);
    for k in 0..3 {
        let raw: Vec<T> = (0..n).map(|i| g[i][k] / masses[i]).collect();
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("potential gradient"));
        }
        // translation invariance puts the raw gradient in D_N already; project and verify
        let mean = weighted_mean(&raw, &masses);
        let max = raw.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
        if mean.abs() > T::dn_tolerance() * max {
            return Err(Error::NotInDn {
                residual: mean.abs().to_f64().unwrap_or(f64::NAN),
                tolerance: (T::dn_tolerance() * max).to_f64().unwrap_or(f64::NAN),
            });
        }
        comps[k] = raw.into_iter().map(|x| x - mean).collect();
    }
    Ok(AlbouyState::from_raw(masses, comps))
}

/// The dilation `(q, p) -> (e^{2s} q, e^{degree s} p)`; velocities scale like momenta.
pub fn dilate<T: Scalar>(s: T, state: &AlbouyState<T>, degree: T) -> AlbouyState<T> {
    let pos = (T::lit(2.0) * s).exp();
    let vel = (degree * s).exp();
    let comps: [DnVector<T>; 6] =
        std::array::from_fn(|k| state.components()[k].scaled(if k < 3 { pos } else { vel }));
    AlbouyState::new(comps).expect("scaling preserves shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{angular_momentum, observables, to_albouy, BodySystem, CartesianState};
    use approx::assert_relative_eq;

    fn state(sys: &BodySystem<f64>, pos: &[[f64; 3]], vel: &[[f64; 3]]) -> AlbouyState<f64> {
        to_albouy(&CartesianState { positions: pos.to_vec(), velocities: vel.to_vec() }, sys).unwrap()
    }

    #[test]
    fn potential_examples() {
        let sys = BodySystem::gravitational(vec![1.0, 1.0]).unwrap();
        let s = state(&sys, &[[0.0; 3], [2.0, 0.0, 0.0]], &[[0.0; 3]; 2]);
        assert_eq!(sys.potential().value(&s).unwrap(), -0.5);

        let d = 1.5;
        let h = d * 3f64.sqrt() / 2.0;
        let sys = BodySystem::coulomb(vec![1.0, 1.0, 1.0], vec![1.0, 1.0, -1.0]).unwrap();
        let s = state(&sys, &[[0.0; 3], [d, 0.0, 0.0], [d / 2.0, h, 0.0]], &[[0.0; 3]; 3]);
        assert_relative_eq!(sys.potential().value(&s).unwrap(), -1.0 / d, epsilon = 1e-15);

        let one = BodySystem::gravitational(vec![2.0]).unwrap();
        let s = state(&one, &[[1.0; 3]], &[[0.0; 3]]);
        assert_eq!(one.potential().value(&s).unwrap(), 0.0);
    }

    #[test]
    fn gradient_two_body_attracts() {
        let sys = BodySystem::gravitational(vec![1.0, 1.0]).unwrap();
        let d = 3.0;
        let s = state(&sys, &[[0.0; 3], [d, 0.0, 0.0]], &[[0.0; 3]; 2]);
        let g = sys.potential().gradient(&s).unwrap();
        // dV/dx_1 = -1/d^2: moving body 1 towards body 2 lowers V
        assert_relative_eq!(g.x().entries()[0], -1.0 / (d * d), epsilon = 1e-15);
        assert_relative_eq!(g.x().entries()[1], 1.0 / (d * d), epsilon = 1e-15);
        for c in &g.components()[3..] {
            assert!(c.entries().iter().all(|&v| v == 0.0));
        }
        let scaled = PairPotential::new(sys.pair_coefficients().scaled(2.5), HomogeneousKernel::inverse_r());
        let g2 = scaled.gradient(&s).unwrap();
        assert_relative_eq!(g2.x().entries()[0], 2.5 * g.x().entries()[0], epsilon = 1e-15);
    }

    #[test]
    fn collision_is_an_error() {
        let sys = BodySystem::gravitational(vec![1.0, 1.0]).unwrap();
        let s = state(&sys, &[[1.0, 1.0, 1.0]; 2], &[[0.0; 3]; 2]);
        assert!(matches!(sys.potential().value(&s), Err(Error::Collision { .. })));
        assert!(matches!(sys.potential().gradient(&s), Err(Error::Collision { .. })));
        // a zero coefficient never collides
        assert_eq!(PairPotential::free(2).value(&s).unwrap(), 0.0);
    }

    #[test]
    fn homogeneity_checks() {
        let samples = [0.3, 1.0, 2.5, 7.0];
        assert!(homogeneity_degree_check(&HomogeneousKernel::<f64>::inverse_r(), &samples).pass);
        let inv_sq_as_one = HomogeneousKernel::unchecked(-1.0, |x: f64| x.powi(-2), |x: f64| -2.0 * x.powi(-3));
        assert!(!homogeneity_degree_check(&inv_sq_as_one, &samples).pass);
        let inv_sq = HomogeneousKernel::unchecked(-2.0, |x: f64| x.powi(-2), |x: f64| -2.0 * x.powi(-3));
        assert!(homogeneity_degree_check(&inv_sq, &samples).pass);
        assert!(HomogeneousKernel::custom(-1.0, |x: f64| x.powi(-2), |x: f64| -2.0 * x.powi(-3)).is_err());
        assert!(HomogeneousKernel::custom(-2.0, |x: f64| x.powi(-2), |x: f64| -2.0 * x.powi(-3)).is_ok());
        assert!(HomogeneousKernel::custom(1.0, |x: f64| x, |_| 1.0).is_err());
        assert!(HomogeneousKernel::<f64>::power(0.5).is_err());
    }

    #[test]
    fn coefficient_symmetry_enforced() {
        assert!(PairCoefficients::from_table(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        let c = PairCoefficients::from_table(vec![vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(c.get(1, 0), -1.0);
        let g = PairCoefficients::gravitational(&[1.0, 2.0, 3.0]);
        assert_eq!((g.get(0, 1), g.get(1, 2), g.get(0, 2)), (-2.0, -6.0, -3.0));
    }

    #[test]
    fn dilation_laws() {
        let sys = BodySystem::gravitational(vec![1.0, 2.0, 0.5]).unwrap();
        let s = state(
            &sys,
            &[[1.0, 0.2, -0.3], [-0.4, 1.1, 0.5], [0.3, -0.8, 1.2]],
            &[[0.1, 0.3, -0.2], [-0.2, 0.1, 0.4], [0.5, -0.3, 0.1]],
        );
        assert_eq!(dilate(0.0, &s, -1.0), s);
        let d = dilate(2f64.ln(), &s, -1.0);
        assert_relative_eq!(d.x().entries()[0], 4.0 * s.x().entries()[0], epsilon = 1e-15);
        assert_relative_eq!(d.p().entries()[0], 0.5 * s.p().entries()[0], epsilon = 1e-15);
        let pot = sys.potential();
        let (o0, o1) = (observables(&s, &pot), observables(&d, &pot));
        assert_relative_eq!(o1.h.unwrap(), o0.h.unwrap() / 4.0, max_relative = 1e-13);
        let (l0, l1) = (angular_momentum(&s), angular_momentum(&d));
        for k in 0..3 {
            assert_relative_eq!(l1[k], 2.0 * l0[k], max_relative = 1e-13);
        }
    }
}
