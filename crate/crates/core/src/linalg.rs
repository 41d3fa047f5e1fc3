//! Small complex linear-algebra helpers shared by the strategy, circuit and
//! simulator modules. Everything here is dense and tiny (2x2 .. 16x16).

use nalgebra::{Matrix2, Matrix4, SMatrix};
use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type CM2 = Matrix2<C64>;
pub type CM4 = Matrix4<C64>;
pub type RM4 = Matrix4<f64>;
pub type CM16 = SMatrix<C64, 16, 16>;

pub const ZERO: C64 = Complex::new(0.0, 0.0);
pub const ONE: C64 = Complex::new(1.0, 0.0);
pub const I: C64 = Complex::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

/// Lift a real 4x4 matrix to complex entries.
pub fn complexify(m: &RM4) -> CM4 {
    CM4::from_fn(|r, col| c(m[(r, col)], 0.0))
}

/// Frobenius deviation from unitarity, `‖U†U − I‖_F`.
pub fn unitarity_defect(u: &CM4) -> f64 {
    (u.adjoint() * u - CM4::identity()).norm()
}

/// Phase-optimal Frobenius distance `min_θ ‖a − e^{iθ} b‖_F`.
pub fn phase_optimal_distance(a: &CM4, b: &CM4) -> f64 {
    let overlap = (a.adjoint() * b).trace().norm();
    let d2 = a.norm_squared() + b.norm_squared() - 2.0 * overlap;
    d2.max(0.0).sqrt()
}

/// Kronecker product of two 2x2 matrices.
pub fn kron2(a: &CM2, b: &CM2) -> CM4 {
    a.kronecker(b)
}

/// Kronecker product of two 4x4 matrices.
pub fn kron4(a: &CM4, b: &CM4) -> CM16 {
    a.kronecker(b)
}
