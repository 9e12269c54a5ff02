//! Phase-space vectors Y = (E, A, q, P) and perturbations X = (e, a, r, π).

use std::sync::Arc;

use crate::fields::{FieldPair, FourierGrid, Vec3};

/// A point of phase space or a tangent vector; both share the layout
/// (fields, position-like part, momentum-like part).
#[derive(Debug, Clone)]
pub struct PhaseVector {
    pub fields: FieldPair,
    pub q: Vec3,
    pub p: Vec3,
}

/// Y = (E, A, q, P).
pub type FullState = PhaseVector;
/// X = (e, a, r, π), stored in the moving frame y = x − b.
pub type PerturbationState = PhaseVector;

impl PhaseVector {
    pub fn zeros(grid: &Arc<FourierGrid>) -> Self {
        Self { fields: FieldPair::zeros(grid), q: Vec3::zeros(), p: Vec3::zeros() }
    }

    pub fn particle(grid: &Arc<FourierGrid>, q: Vec3, p: Vec3) -> Self {
        Self { fields: FieldPair::zeros(grid), q, p }
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        self.fields.grid()
    }

    pub fn axpy(&mut self, s: f64, other: &PhaseVector) {
        self.fields.axpy(s, &other.fields);
        self.q += other.q * s;
        self.p += other.p * s;
    }

    /// Overwrites self with the values of `other` without reallocating.
    pub fn copy_from(&mut self, other: &PhaseVector) {
        self.fields.e.coeffs_mut().copy_from_slice(other.fields.e.coeffs());
        self.fields.a.coeffs_mut().copy_from_slice(other.fields.a.coeffs());
        self.q = other.q;
        self.p = other.p;
    }

    /// self = x + s·y
    pub fn set_axpy(&mut self, x: &PhaseVector, s: f64, y: &PhaseVector) {
        let pairs = [
            (self.fields.e.coeffs_mut(), x.fields.e.coeffs(), y.fields.e.coeffs()),
            (self.fields.a.coeffs_mut(), x.fields.a.coeffs(), y.fields.a.coeffs()),
        ];
        for (out, xs, ys) in pairs {
            for ((o, a), b) in out.iter_mut().zip(xs).zip(ys) {
                for i in 0..3 {
                    o[i] = a[i] + b[i] * s;
                }
            }
        }
        self.q = x.q + y.q * s;
        self.p = x.p + y.p * s;
    }

    pub fn scale(&mut self, s: f64) {
        self.fields.scale(s);
        self.q *= s;
        self.p *= s;
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    pub fn add(&self, other: &PhaseVector) -> Self {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &PhaseVector) -> Self {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// ‖E‖ + ‖∇A‖ + |q| + |P|.
    pub fn norm_energy(&self) -> f64 {
        self.fields.norm_f() + self.q.norm() + self.p.norm()
    }

    /// Euclidean-type norm (‖E‖² + ‖A‖² + ‖∇A‖² + |q|² + |P|²)^{1/2}.
    pub fn norm_l2(&self) -> f64 {
        let f = &self.fields;
        (f.e.inner(&f.e) + f.a.inner(&f.a) + f.a.grad_norm().powi(2) + self.q.norm_squared() + self.p.norm_squared())
            .sqrt()
    }

    /// ‖E‖_{0,α+1} + ‖A‖_{1,α} + |q| + |P|.
    pub fn norm_weighted(&self, alpha: f64) -> f64 {
        self.fields.norm_weighted(alpha) + self.q.norm() + self.p.norm()
    }
}
