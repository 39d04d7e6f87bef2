//! Small fixed-size linear algebra on `f64` arrays.
//!
//! Transcendentals go through `libm` so that results do not depend on the
//! platform's libm or on whether `std` is linked.

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
/// Symmetric 2×2 matrix stored as `[a, b, c]` for `[[a, b], [b, c]]`.
pub type Sym2 = [f64; 3];

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

/// Logistic sigmoid.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + exp(-x))
}

/// Inverse of [`sigmoid`]; `p` must lie in `(0, 1)`.
#[inline]
pub fn logit(p: f64) -> f64 {
    ln(p / (1.0 - p))
}

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    sqrt(dot(a, a))
}

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c];
        }
    }
    out
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for (r, row) in a.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            out[c][r] = *v;
        }
    }
    out
}

pub fn mat3_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&a[0], v), dot(&a[1], v), dot(&a[2], v)]
}

/// Rotation matrix of a unit quaternion given as `[w, x, y, z]`.
pub fn quat_to_mat(q: &[f64; 4]) -> Mat3 {
    let [w, x, y, z] = *q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// `R · diag(s)² · Rᵀ`.
pub fn covariance_3d(rotation: &Mat3, scale: &Vec3) -> Mat3 {
    let mut rs = *rotation;
    for row in rs.iter_mut() {
        for (c, v) in row.iter_mut().enumerate() {
            *v *= scale[c];
        }
    }
    mat3_mul(&rs, &transpose(&rs))
}

#[inline]
pub fn sym2_det(m: &Sym2) -> f64 {
    m[0] * m[2] - m[1] * m[1]
}

/// Inverse of a symmetric 2×2 matrix; `None` when the determinant is not positive enough.
pub fn sym2_inverse(m: &Sym2, min_det: f64) -> Option<Sym2> {
    let det = sym2_det(m);
    if !(det > min_det) {
        return None;
    }
    let inv = 1.0 / det;
    Some([m[2] * inv, -m[1] * inv, m[0] * inv])
}

/// Eigenvalues `(largest, smallest)` of a symmetric 2×2 matrix.
pub fn sym2_eigenvalues(m: &Sym2) -> (f64, f64) {
    let mid = 0.5 * (m[0] + m[2]);
    let half_diff = 0.5 * (m[0] - m[2]);
    let r = sqrt(half_diff * half_diff + m[1] * m[1]);
    (mid + r, mid - r)
}

/// `dᵀ M d` for a symmetric 2×2 `M`.
#[inline]
pub fn sym2_quadratic(m: &Sym2, d: [f64; 2]) -> f64 {
    m[0] * d[0] * d[0] + 2.0 * m[1] * d[0] * d[1] + m[2] * d[1] * d[1]
}
