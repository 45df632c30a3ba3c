//! Small fixed-size vector/matrix types for 2D and 3D geometry.
//!
//! The whole crate works in `f64` and in dimensions 2 and 3, so a handful of
//! concrete types beats pulling in a linear-algebra dependency (and keeps the
//! wasm artifact small).

use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub const fn vec2(x: f64, y: f64) -> Vec2 {
    Vec2 { x, y }
}

pub const fn vec3(x: f64, y: f64, z: f64) -> Vec3 {
    Vec3 { x, y, z }
}

impl Vec2 {
    pub const ZERO: Vec2 = vec2(0.0, 0.0);

    pub fn dot(self, rhs: Vec2) -> f64 {
        self.x * rhs.x + self.y * rhs.y
    }

    /// z-component of the 3D cross product of two in-plane vectors.
    pub fn cross(self, rhs: Vec2) -> f64 {
        self.x * rhs.y - self.y * rhs.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    /// Rotation by +90 degrees (counter-clockwise).
    pub fn rot90(self) -> Vec2 {
        vec2(-self.y, self.x)
    }

    /// Unit vector at the given polar angle.
    pub fn from_angle(theta: f64) -> Vec2 {
        vec2(theta.cos(), theta.sin())
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }
}

impl Vec3 {
    pub const ZERO: Vec3 = vec3(0.0, 0.0, 0.0);

    pub fn dot(self, rhs: Vec3) -> f64 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Vec3) -> Vec3 {
        vec3(
            self.y * rhs.z - self.z * rhs.y,
            self.z * rhs.x - self.x * rhs.z,
            self.x * rhs.y - self.y * rhs.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self / self.norm()
    }
}

macro_rules! impl_vec_ops {
    ($t:ty { $($f:ident),+ }) => {
        impl Add for $t {
            type Output = $t;
            fn add(self, rhs: $t) -> $t {
                Self { $($f: self.$f + rhs.$f),+ }
            }
        }
        impl Sub for $t {
            type Output = $t;
            fn sub(self, rhs: $t) -> $t {
                Self { $($f: self.$f - rhs.$f),+ }
            }
        }
        impl Neg for $t {
            type Output = $t;
            fn neg(self) -> $t {
                Self { $($f: -self.$f),+ }
            }
        }
        impl Mul<f64> for $t {
            type Output = $t;
            fn mul(self, rhs: f64) -> $t {
                Self { $($f: self.$f * rhs),+ }
            }
        }
        impl Mul<$t> for f64 {
            type Output = $t;
            fn mul(self, rhs: $t) -> $t {
                rhs * self
            }
        }
        impl Div<f64> for $t {
            type Output = $t;
            fn div(self, rhs: f64) -> $t {
                Self { $($f: self.$f / rhs),+ }
            }
        }
    };
}

impl_vec_ops!(Vec2 { x, y });
impl_vec_ops!(Vec3 { x, y, z });

/// Column-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2 {
    pub col0: Vec2,
    pub col1: Vec2,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        col0: vec2(1.0, 0.0),
        col1: vec2(0.0, 1.0),
    };

    pub fn from_cols(col0: Vec2, col1: Vec2) -> Mat2 {
        Mat2 { col0, col1 }
    }

    /// Entries in row-major reading order [[a, b], [c, d]].
    pub fn from_rows(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
        Mat2 {
            col0: vec2(a, c),
            col1: vec2(b, d),
        }
    }

    pub fn det(&self) -> f64 {
        self.col0.cross(self.col1)
    }

    pub fn trace(&self) -> f64 {
        self.col0.x + self.col1.y
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        self.col0 * v.x + self.col1 * v.y
    }

    pub fn mul_mat(&self, rhs: &Mat2) -> Mat2 {
        Mat2 {
            col0: self.mul_vec(rhs.col0),
            col1: self.mul_vec(rhs.col1),
        }
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2 {
            col0: self.col0 * s,
            col1: self.col1 * s,
        }
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d == 0.0 {
            return None;
        }
        Some(Mat2 {
            col0: vec2(self.col1.y, -self.col0.y) / d,
            col1: vec2(-self.col1.x, self.col0.x) / d,
        })
    }

    /// Solve `self * x = b` by Cramer's rule. `None` on zero determinant.
    pub fn solve(&self, b: Vec2) -> Option<Vec2> {
        let d = self.det();
        if d == 0.0 {
            return None;
        }
        Some(vec2(
            Mat2::from_cols(b, self.col1).det() / d,
            Mat2::from_cols(self.col0, b).det() / d,
        ))
    }

    /// Eigenvalues of a matrix with real spectrum, smaller first.
    ///
    /// The discriminant is clamped at zero: callers pass matrices that are
    /// self-adjoint with respect to a metric, so complex roots can only arise
    /// from rounding.
    pub fn eigenvalues_real(&self) -> (f64, f64) {
        let tr = self.trace();
        let det = self.det();
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }
}

/// Column-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3 {
    pub col0: Vec3,
    pub col1: Vec3,
    pub col2: Vec3,
}

impl Mat3 {
    pub fn from_cols(col0: Vec3, col1: Vec3, col2: Vec3) -> Mat3 {
        Mat3 { col0, col1, col2 }
    }

    pub fn det(&self) -> f64 {
        self.col0.dot(self.col1.cross(self.col2))
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        self.col0 * v.x + self.col1 * v.y + self.col2 * v.z
    }

    pub fn mul_mat(&self, rhs: &Mat3) -> Mat3 {
        Mat3 {
            col0: self.mul_vec(rhs.col0),
            col1: self.mul_vec(rhs.col1),
            col2: self.mul_vec(rhs.col2),
        }
    }

    /// Inverse via the adjugate. `None` on zero determinant.
    pub fn inverse(&self) -> Option<Mat3> {
        let d = self.det();
        if d == 0.0 {
            return None;
        }
        let r0 = self.col1.cross(self.col2) / d;
        let r1 = self.col2.cross(self.col0) / d;
        let r2 = self.col0.cross(self.col1) / d;
        // r0, r1, r2 are the rows of the inverse.
        Some(Mat3 {
            col0: vec3(r0.x, r1.x, r2.x),
            col1: vec3(r0.y, r1.y, r2.y),
            col2: vec3(r0.z, r1.z, r2.z),
        })
    }
}

/// SplitMix64: tiny deterministic generator for seeded sampling in the oracle
/// and in tests. Fixed algorithm so recorded seeds reproduce byte-identical
/// runs regardless of dependency versions.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> SplitMix64 {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
