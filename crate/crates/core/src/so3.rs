//! Minimal so(3)/SO(3) arithmetic in adjoint coordinates.
//!
//! Lie-algebra elements are 3-vectors with the cross product as bracket and
//! the Euclidean dot product as inner product. Under the correspondence
//! `v ↦ [v]×` this realizes the matrix algebra with bracket `[X,Y] = XY−YX`
//! and inner product `−tr(XY)/2` (the normalized trace inner product on
//! antisymmetric matrices). Group elements are unit quaternions, which keeps
//! renormalization after accumulation a single division.

use crate::real::Real;

pub type Vec3<T> = [T; 3];

#[inline]
pub fn dot<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm_sq<T: Real>(a: &Vec3<T>) -> T {
    dot(a, a)
}

#[inline]
pub fn norm<T: Real>(a: &Vec3<T>) -> T {
    norm_sq(a).sqrt()
}

#[inline]
pub fn add<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale<T: Real>(a: &Vec3<T>, c: T) -> Vec3<T> {
    [a[0] * c, a[1] * c, a[2] * c]
}

/// Unit quaternion representing a rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quat<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Quat<T> {
    pub fn identity() -> Self {
        Self {
            w: T::one(),
            x: T::zero(),
            y: T::zero(),
            z: T::zero(),
        }
    }

    pub fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    pub fn norm(&self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            w: self.w,
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Hamilton product; `R(a*b) = R(a)·R(b)`.
    pub fn mul(&self, o: &Self) -> Self {
        Self {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    /// Rotate `v` by this quaternion: `q v q⁻¹`.
    pub fn rotate(&self, v: &Vec3<T>) -> Vec3<T> {
        let u = [self.x, self.y, self.z];
        let t = scale(&cross(&u, v), T::two());
        add(&add(v, &scale(&t, self.w)), &cross(&u, &t))
    }

    /// Rotate `v` by the inverse rotation: `q⁻¹ v q`.
    pub fn rotate_inv(&self, v: &Vec3<T>) -> Vec3<T> {
        self.conjugate().rotate(v)
    }

    /// Exponential: rotation by angle `|v|` about `v`.
    pub fn from_scaled_axis(v: &Vec3<T>) -> Self {
        let theta = norm(v);
        let half = theta * T::half();
        let k = if theta < T::from_f64_lossy(1e-6) {
            // sin(θ/2)/θ = 1/2 − θ²/48 + O(θ⁴)
            T::half() - theta * theta / T::from_f64_lossy(48.0)
        } else {
            half.sin() / theta
        };
        Self {
            w: half.cos(),
            x: v[0] * k,
            y: v[1] * k,
            z: v[2] * k,
        }
    }

    /// Logarithm: the scaled rotation axis (angle in [0, π]).
    pub fn to_scaled_axis(&self) -> Vec3<T> {
        let q = if self.w < T::zero() {
            Quat::new(-self.w, -self.x, -self.y, -self.z)
        } else {
            *self
        };
        let u = [q.x, q.y, q.z];
        let s = norm(&u);
        if s < T::from_f64_lossy(1e-9) {
            // θ·axis = 2u/w + O(|u|³)
            scale(&u, T::two() / q.w)
        } else {
            let theta = T::two() * s.atan2(q.w);
            scale(&u, theta / s)
        }
    }

    /// Row-major rotation matrix.
    pub fn rotation_matrix(&self) -> [[T; 3]; 3] {
        let e = [
            [T::one(), T::zero(), T::zero()],
            [T::zero(), T::one(), T::zero()],
            [T::zero(), T::zero(), T::one()],
        ];
        let cols: Vec<Vec3<T>> = e.iter().map(|c| self.rotate(c)).collect();
        let mut m = [[T::zero(); 3]; 3];
        for (j, col) in cols.iter().enumerate() {
            for i in 0..3 {
                m[i][j] = col[i];
            }
        }
        m
    }
}
