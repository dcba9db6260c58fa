//! The reduced integral map `(H, L)`, Lagrange residuals, best-fit
//! multipliers, multiplier coordinates and the bifurcation parameter.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Mat3, Vec3};
use crate::potential::PairPotential;
use crate::scalar::Scalar;
use crate::state::{angular_momentum, kinetic, rotate_unchecked, AlbouyState, DnVector};

/// Values of the integral map. In Albouy coordinates total momentum `p` and
/// centre of mass `q` vanish identically and are reported as zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegralValues<T> {
    pub h: T,
    pub l: Vec3<T>,
    pub p: Vec3<T>,
    pub q: Vec3<T>,
}

impl<T: Scalar> IntegralValues<T> {
    pub fn l_norm(&self) -> T {
        linalg::norm(&self.l)
    }
}

/// One multiplier per angular-momentum component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Multiplier<T> {
    pub lambda: Vec3<T>,
}

impl<T: Scalar> Multiplier<T> {
    pub fn new(lambda: Vec3<T>) -> Self {
        Self { lambda }
    }

    pub fn zero() -> Self {
        Self { lambda: [T::zero(); 3] }
    }

    pub fn about_z(omega: T) -> Self {
        Self { lambda: [T::zero(), T::zero(), omega] }
    }

    pub fn norm(&self) -> T {
        linalg::norm(&self.lambda)
    }
}

pub fn reduced_integral_map<T: Scalar>(s: &AlbouyState<T>, pot: &PairPotential<T>) -> Result<IntegralValues<T>> {
    let v = pot.value(s)?;
    Ok(IntegralValues {
        h: kinetic(s) / T::lit(2.0) + v,
        l: angular_momentum(s),
        p: [T::zero(); 3],
        q: [T::zero(); 3],
    })
}

/// `-H |L|^2`.
pub fn bifurcation_parameter<T: Scalar>(v: &IntegralValues<T>) -> T {
    let l = v.l_norm();
    -v.h * l * l
}

/// `grad H = (dV/dX, dV/dY, dV/dZ, P, Q, R)` in the mass inner product.
pub fn grad_hamiltonian<T: Scalar>(s: &AlbouyState<T>, pot: &PairPotential<T>) -> Result<AlbouyState<T>> {
    let gv = pot.gradient(s)?;
    Ok(kinetic_gradient(s).add(&gv))
}

/// `grad (K/2) = (0, 0, 0, P, Q, R)`.
pub fn kinetic_gradient<T: Scalar>(s: &AlbouyState<T>) -> AlbouyState<T> {
    let zero = DnVector::zeros(s.masses().clone());
    AlbouyState::new([zero.clone(), zero.clone(), zero, s.p().clone(), s.q().clone(), s.r().clone()])
        .expect("components share masses")
}

/// Gradients of `L_x`, `L_y`, `L_z`:
///
/// ```text
/// grad L_x = ( 0,  R, -Q,  0, -Z,  Y)
/// grad L_y = (-R,  0,  P,  Z,  0, -X)
/// grad L_z = ( Q, -P,  0, -Y,  X,  0)
/// ```
pub fn grad_angular_momentum<T: Scalar>(s: &AlbouyState<T>) -> [AlbouyState<T>; 3] {
    let zero = DnVector::zeros(s.masses().clone());
    let neg = |v: &DnVector<T>| v.scaled(-T::one());
    let (x, y, z, p, q, r) = (s.x(), s.y(), s.z(), s.p(), s.q(), s.r());
    let build = |c: [DnVector<T>; 6]| AlbouyState::new(c).expect("components share masses");
    [
        build([zero.clone(), r.clone(), neg(q), zero.clone(), neg(z), y.clone()]),
        build([neg(r), zero.clone(), p.clone(), z.clone(), zero.clone(), neg(x)]),
        build([q.clone(), neg(p), zero.clone(), neg(y), x.clone(), zero]),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residual<T: Scalar> {
    pub vector: AlbouyState<T>,
    pub norm: T,
}

/// `grad H - sum_i lambda_i grad L_i` for an arbitrary `grad H`.
pub fn residual_from_gradient<T: Scalar>(grad_h: &AlbouyState<T>, s: &AlbouyState<T>, lambda: &Multiplier<T>) -> Residual<T> {
    let gl = grad_angular_momentum(s);
    let mut e = grad_h.clone();
    for (g, &l) in gl.iter().zip(&lambda.lambda) {
        if l != T::zero() {
            e = e.axpy(-l, g);
        }
    }
    let norm = e.norm();
    Residual { vector: e, norm }
}

pub fn lagrange_residual<T: Scalar>(s: &AlbouyState<T>, pot: &PairPotential<T>, lambda: &Multiplier<T>) -> Result<Residual<T>> {
    Ok(residual_from_gradient(&grad_hamiltonian(s, pot)?, s, lambda))
}

/// Gram-matrix conditioning limit beyond which the fit is declared degenerate.
pub const GRAM_CONDITION_LIMIT: f64 = 1e12;

/// Least-squares multiplier for a given `grad H`. With `allow_degenerate`,
/// directions whose Gram eigenvalue falls below the conditioning limit are
/// dropped (pseudo-inverse) instead of raising an error.
pub fn fit_multiplier<T: Scalar>(grad_h: &AlbouyState<T>, s: &AlbouyState<T>, allow_degenerate: bool) -> Result<Multiplier<T>> {
    let gl = grad_angular_momentum(s);
    let mut gram: Mat3<T> = [[T::zero(); 3]; 3];
    let mut rhs = [T::zero(); 3];
    for i in 0..3 {
        for j in i..3 {
            let g = gl[i].inner(&gl[j])?;
            gram[i][j] = g;
            gram[j][i] = g;
        }
        rhs[i] = gl[i].inner(grad_h)?;
    }
    let (vals, vecs) = linalg::symmetric_eigen(&gram);
    let max = vals.iter().fold(T::zero(), |a, v| a.max(v.abs()));
    let min = vals.iter().fold(T::infinity(), |a, v| a.min(v.abs()));
    let limit = T::lit(GRAM_CONDITION_LIMIT);
    let condition = if min > T::zero() { max / min } else { T::infinity() };
    if !allow_degenerate && !(condition <= limit) {
        return Err(Error::DegenerateGram { condition: condition.to_f64().unwrap_or(f64::INFINITY) });
    }
    let mut lambda = [T::zero(); 3];
    for k in 0..3 {
        if !(vals[k].abs() * limit > max) || vals[k] == T::zero() {
            continue;
        }
        let coef = (0..3).map(|i| vecs[i][k] * rhs[i]).sum::<T>() / vals[k];
        for (i, l) in lambda.iter_mut().enumerate() {
            *l = *l + coef * vecs[i][k];
        }
    }
    Ok(Multiplier::new(lambda))
}

/// The multiplier minimising the mass-weighted residual norm.
pub fn best_multiplier<T: Scalar>(s: &AlbouyState<T>, pot: &PairPotential<T>) -> Result<Multiplier<T>> {
    fit_multiplier(&grad_hamiltonian(s, pot)?, s, false)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierFrame<T: Scalar> {
    /// The rotated state.
    pub state: AlbouyState<T>,
    /// Rotation applied to the state; maps the multiplier direction to `e_z`.
    pub rotation: Mat3<T>,
    pub lambda_norm: T,
}

/// Rotates `s` so that the multiplier points along `+z`; then the residual
/// reads `grad H - |lambda| grad L_z`.
pub fn to_multiplier_coordinates<T: Scalar>(s: &AlbouyState<T>, lambda: &Multiplier<T>) -> Result<MultiplierFrame<T>> {
    let n = lambda.norm();
    if !(n > T::zero()) {
        return Err(Error::ZeroMultiplier);
    }
    let h = linalg::rotation_to_z(&lambda.lambda);
    Ok(MultiplierFrame { state: rotate_unchecked(&h, s), rotation: h, lambda_norm: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{to_albouy, BodySystem, CartesianState};
    use approx::assert_relative_eq;

    fn rotating_pair(omega: f64) -> (BodySystem<f64>, AlbouyState<f64>) {
        // unit masses at (+-1, 0, 0), separation 2: circular when omega = 1/2
        let sys = BodySystem::gravitational(vec![1.0, 1.0]).unwrap();
        let c = CartesianState {
            positions: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
            velocities: vec![[0.0, omega, 0.0], [0.0, -omega, 0.0]],
        };
        let s = to_albouy(&c, &sys).unwrap();
        (sys, s)
    }

    fn generic_state() -> (BodySystem<f64>, AlbouyState<f64>) {
        let sys = BodySystem::gravitational(vec![1.0, 2.0, 0.7]).unwrap();
        let c = CartesianState {
            positions: vec![[1.0, 0.3, -0.2], [-0.5, 1.2, 0.4], [0.1, -0.9, 1.1]],
            velocities: vec![[0.2, -0.1, 0.3], [-0.3, 0.25, 0.1], [0.15, 0.4, -0.35]],
        };
        let s = to_albouy(&c, &sys).unwrap();
        (sys, s)
    }

    #[test]
    fn zero_velocity_map() {
        let (sys, s) = rotating_pair(0.0);
        let v = reduced_integral_map(&s, &sys.potential()).unwrap();
        assert_eq!(v.l, [0.0; 3]);
        assert_eq!(v.h, sys.potential().value(&s).unwrap());
        assert_eq!(bifurcation_parameter(&v), 0.0);
    }

    #[test]
    fn circular_pair_is_critical() {
        let (sys, s) = rotating_pair(0.5);
        let pot = sys.potential();
        let v = reduced_integral_map(&s, &pot).unwrap();
        assert_relative_eq!(v.h, -0.25, epsilon = 1e-15);
        assert_relative_eq!(v.l[2], 1.0, epsilon = 1e-15);
        assert_relative_eq!(bifurcation_parameter(&v), 0.25, epsilon = 1e-15);
        let r = lagrange_residual(&s, &pot, &Multiplier::about_z(0.5)).unwrap();
        assert!(r.norm < 1e-14);
        let lam = best_multiplier(&s, &pot).unwrap();
        assert_relative_eq!(lam.lambda[2], 0.5, epsilon = 1e-14);
        assert!(lam.lambda[0].abs() < 1e-14 && lam.lambda[1].abs() < 1e-14);
        let r0 = lagrange_residual(&s, &pot, &Multiplier::zero()).unwrap();
        assert_relative_eq!(r0.norm, grad_hamiltonian(&s, &pot).unwrap().norm(), epsilon = 1e-15);
    }

    #[test]
    fn zero_lambda_static_residual_is_grad_v() {
        let (sys, s) = rotating_pair(0.0);
        let pot = sys.potential();
        let r = lagrange_residual(&s, &pot, &Multiplier::zero()).unwrap();
        assert_eq!(r.norm, pot.gradient(&s).unwrap().norm());
    }

    #[test]
    fn residual_affine_in_lambda() {
        let (sys, s) = generic_state();
        let pot = sys.potential();
        let l1 = Multiplier::new([0.3, -0.2, 0.5]);
        let l2 = Multiplier::new([-0.1, 0.4, 0.25]);
        let (a, b) = (0.7, -1.3);
        let mix = Multiplier::new(std::array::from_fn(|k| a * l1.lambda[k] + b * l2.lambda[k]));
        let r1 = lagrange_residual(&s, &pot, &l1).unwrap().vector;
        let r2 = lagrange_residual(&s, &pot, &l2).unwrap().vector;
        let rm = lagrange_residual(&s, &pot, &mix).unwrap().vector;
        let gh = grad_hamiltonian(&s, &pot).unwrap();
        let expect = r1.scaled(a).add(&r2.scaled(b)).axpy(1.0 - a - b, &gh);
        assert!(rm.sub(&expect).norm() < 1e-14);
    }

    #[test]
    fn degenerate_gram_is_an_error() {
        let sys = BodySystem::gravitational(vec![1.0, 1.0]).unwrap();
        let c = CartesianState { positions: vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]], velocities: vec![[0.0; 3]; 2] };
        let s = to_albouy(&c, &sys).unwrap();
        assert!(matches!(best_multiplier(&s, &sys.potential()), Err(Error::DegenerateGram { .. })));
        assert!(fit_multiplier(&grad_hamiltonian(&s, &sys.potential()).unwrap(), &s, true).is_ok());
    }

    #[test]
    fn multiplier_coordinates() {
        let (sys, s) = generic_state();
        let pot = sys.potential();
        assert!(matches!(to_multiplier_coordinates(&s, &Multiplier::zero()), Err(Error::ZeroMultiplier)));

        let f = to_multiplier_coordinates(&s, &Multiplier::about_z(2.0)).unwrap();
        assert_eq!(f.state, s);

        let f = to_multiplier_coordinates(&s, &Multiplier::new([1.5, 0.0, 0.0])).unwrap();
        let (l0, l1) = (angular_momentum(&s), angular_momentum(&f.state));
        assert_relative_eq!(l1[2], l0[0], epsilon = 1e-14);

        let lam = Multiplier::new([0.3, -0.7, 0.2]);
        let f = to_multiplier_coordinates(&s, &lam).unwrap();
        let r0 = lagrange_residual(&s, &pot, &lam).unwrap();
        let r1 = lagrange_residual(&f.state, &pot, &Multiplier::about_z(f.lambda_norm)).unwrap();
        assert_relative_eq!(r0.norm, r1.norm, max_relative = 1e-12);
        // velocity part of the rotated residual is (P + |l| Y, Q - |l| X, R)
        let st = &f.state;
        let c = r1.vector.components();
        for i in 0..3 {
            assert_relative_eq!(c[3].entries()[i], st.p().entries()[i] + f.lambda_norm * st.y().entries()[i], epsilon = 1e-14);
            assert_relative_eq!(c[4].entries()[i], st.q().entries()[i] - f.lambda_norm * st.x().entries()[i], epsilon = 1e-14);
            assert_eq!(c[5].entries()[i], st.r().entries()[i]);
        }
    }
}
