//! Small fixed-size linear algebra: 3-vectors, 3x3 matrices, symmetric eigensolver.

use crate::scalar::Scalar;

pub type Vec3<T> = [T; 3];
/// Row-major 3x3 matrix.
pub type Mat3<T> = [[T; 3]; 3];

pub fn identity<T: Scalar>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[o, z, z], [z, o, z], [z, z, o]]
}

pub fn mat_vec<T: Scalar>(m: &Mat3<T>, v: &Vec3<T>) -> Vec3<T> {
    std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

pub fn mat_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j]))
}

pub fn transpose<T: Scalar>(m: &Mat3<T>) -> Mat3<T> {
    std::array::from_fn(|i| std::array::from_fn(|j| m[j][i]))
}

pub fn det<T: Scalar>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub fn dot<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn norm<T: Scalar>(v: &Vec3<T>) -> T {
    v[0].hypot(v[1]).hypot(v[2])
}

/// Largest entry of `|m^T m - I|`.
pub fn orthogonality_deviation<T: Scalar>(m: &Mat3<T>) -> T {
    let mtm = mat_mul(&transpose(m), m);
    let id = identity::<T>();
    let mut worst = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            worst = worst.max((mtm[i][j] - id[i][j]).abs());
        }
    }
    worst
}

/// Rotation by `angle` about the unit vector `axis`.
pub fn axis_angle<T: Scalar>(axis: &Vec3<T>, angle: T) -> Mat3<T> {
    let n = norm(axis);
    let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
    let (s, c) = angle.sin_cos();
    let t = T::one() - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

/// A proper rotation `h` with `h * a = |a| e_z`. `a` must be nonzero.
pub fn rotation_to_z<T: Scalar>(a: &Vec3<T>) -> Mat3<T> {
    let n = norm(a);
    let u = [a[0] / n, a[1] / n, a[2] / n];
    if u[2] < T::zero() {
        // flip into the upper hemisphere first; the formula below degrades near u = -e_z
        let flip = [[T::one(), T::zero(), T::zero()], [T::zero(), -T::one(), T::zero()], [T::zero(), T::zero(), -T::one()]];
        let v = mat_vec(&flip, &u);
        return mat_mul(&rotation_to_z(&v), &flip);
    }
    let ez = [T::zero(), T::zero(), T::one()];
    let v = cross(&u, &ez);
    let c = u[2];
    let k = T::one() / (T::one() + c);
    let vx: Mat3<T> = [[T::zero(), -v[2], v[1]], [v[2], T::zero(), -v[0]], [-v[1], v[0], T::zero()]];
    let vx2 = mat_mul(&vx, &vx);
    let id = identity::<T>();
    std::array::from_fn(|i| std::array::from_fn(|j| id[i][j] + vx[i][j] + vx2[i][j] * k))
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues and the matrix whose columns are the eigenvectors.
pub fn symmetric_eigen<T: Scalar>(m: &Mat3<T>) -> (Vec3<T>, Mat3<T>) {
    let mut a = *m;
    let mut v = identity::<T>();
    for _sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        let diag = a[0][0].abs() + a[1][1].abs() + a[2][2].abs();
        if off <= T::epsilon() * T::epsilon() * diag || off == T::zero() {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q] == T::zero() {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (T::lit(2.0) * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
            let c = T::one() / (t * t + T::one()).sqrt();
            let s = t * c;
            for k in 0..3 {
                let akp = a[k][p];
                let akq = a[k][q];
                a[k][p] = c * akp - s * akq;
                a[k][q] = s * akp + c * akq;
            }
            for k in 0..3 {
                let apk = a[p][k];
                let aqk = a[q][k];
                a[p][k] = c * apk - s * aqk;
                a[q][k] = s * apk + c * aqk;
            }
            for row in v.iter_mut() {
                let vkp = row[p];
                let vkq = row[q];
                row[p] = c * vkp - s * vkq;
                row[q] = s * vkp + c * vkq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}
