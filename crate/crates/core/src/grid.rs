//! Uniform radial mesh on `[0, r_max]` for radial functions on ℝ⁴.
//!
//! Nodes sit at `r_i = i h`, `i = 1..=n`, `h = r_max / (n + 1)`. Node `i` owns
//! the shell between the faces `r_{i-1/2}` and `r_{i+1/2}` (the first shell
//! starts at the origin), so quadrature weights are exact shell volumes and the
//! Laplacian is the flux difference across the two faces divided by that
//! volume. Summation by parts then holds exactly:
//! `grad_sq(f) = -Re Σ w_i f̄_i (Δf)_i`.
//!
//! Beyond the last face the field is continued by the decaying harmonic
//! `f_n (r_n / r)²`, which enters as a Robin flux `-2 r² f` on the outer face.

use alloc::vec::Vec;
use core::ops::{Add, Mul, Sub};

use libm::floor;
use num_complex::Complex64;
use thiserror::Error;

use crate::SPHERE_AREA;

/// Complex samples, one per node.
pub type RadialField = Vec<Complex64>;

/// Real samples, one per node.
pub type RealRadialField = Vec<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid needs at least 3 nodes, got {0}")]
    TooSmall(usize),
    #[error("r_max must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("dilation factor must be positive, got {0}")]
    BadScale(f64),
    #[error("field has {got} samples, grid has {expected} nodes")]
    Length { expected: usize, got: usize },
}

/// Sample types a radial field can carry.
pub trait Sample:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn abs_sq(self) -> f64;
}

impl Sample for f64 {
    fn abs_sq(self) -> f64 {
        self * self
    }
}

impl Sample for Complex64 {
    fn abs_sq(self) -> f64 {
        self.norm_sqr()
    }
}

#[derive(Clone, Debug)]
pub struct RadialGrid {
    r_max: f64,
    n: usize,
    h: f64,
    nodes: Vec<f64>,
    volumes: Vec<f64>,
    weights: Vec<f64>,
    // conductance r_{i+1/2}³/h of the face between nodes i and i+1
    face: Vec<f64>,
    // Robin coefficient 2 r_b² on the outer face r_b = r_{n+1/2}
    tail: f64,
}

impl RadialGrid {
    pub fn new(r_max: f64, n: usize) -> Result<Self, GridError> {
        if n < 3 {
            return Err(GridError::TooSmall(n));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(GridError::BadRadius(r_max));
        }
        let h = r_max / (n as f64 + 1.0);
        let nodes: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
        let face_r = |i: usize| (i as f64 + 0.5) * h;
        let mut volumes = Vec::with_capacity(n);
        for i in 1..=n {
            let outer = face_r(i);
            let inner = if i == 1 { 0.0 } else { face_r(i - 1) };
            volumes.push(0.25 * (pow4(outer) - pow4(inner)));
        }
        let weights = volumes.iter().map(|v| SPHERE_AREA * v).collect();
        let face = (1..n).map(|i| pow3(face_r(i)) / h).collect();
        let rb = face_r(n);
        Ok(Self {
            r_max,
            n,
            h,
            nodes,
            volumes,
            weights,
            face,
            tail: 2.0 * rb * rb,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Shell volumes `(r_{i+1/2}⁴ - r_{i-1/2}⁴)/4`; the quadrature weights are `2π²` times these.
    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Radius of the outermost face, where the harmonic tail takes over.
    pub fn outer_face(&self) -> f64 {
        (self.n as f64 + 0.5) * self.h
    }

    pub fn check_len(&self, len: usize) -> Result<(), GridError> {
        if len == self.n {
            Ok(())
        } else {
            Err(GridError::Length {
                expected: self.n,
                got: len,
            })
        }
    }

    /// `Σ w_i f_i`, summed in node order.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.n);
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `Σ w_i g(i)` without materializing the integrand.
    pub fn integrate_with<F: FnMut(usize) -> f64>(&self, mut g: F) -> f64 {
        let mut acc = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            acc += w * g(i);
        }
        acc
    }

    /// Weighted L² norm `(Σ w_i |f_i|²)^{1/2}`.
    pub fn norm<T: Sample>(&self, f: &[T]) -> f64 {
        libm::sqrt(self.integrate_with(|i| f[i].abs_sq()))
    }

    /// Diagonal and off-diagonal of the stiffness matrix `A` with
    /// `grad_sq(f) = 2π² f̄ᵀ A f` and `Δf = -A f / volumes`.
    pub fn stiffness(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut diag = alloc::vec![0.0; n];
        for (i, c) in self.face.iter().enumerate() {
            diag[i] += c;
            diag[i + 1] += c;
        }
        diag[n - 1] += self.tail;
        let off = self.face.iter().map(|c| -c).collect();
        (diag, off)
    }

    /// `(A f)_i`, the flux balance of shell i.
    pub fn stiffness_apply<T: Sample>(&self, f: &[T]) -> Vec<T> {
        let n = self.n;
        let mut out = alloc::vec![T::default(); n];
        for i in 0..n - 1 {
            let flux = (f[i] - f[i + 1]) * self.face[i];
            out[i] = out[i] + flux;
            out[i + 1] = out[i + 1] - flux;
        }
        out[n - 1] = out[n - 1] + f[n - 1] * self.tail;
        out
    }

    /// Radial Laplacian `f'' + 3 f'/r` in flux form.
    pub fn laplacian<T: Sample>(&self, f: &[T]) -> Vec<T> {
        let mut out = self.stiffness_apply(f);
        for (o, v) in out.iter_mut().zip(&self.volumes) {
            *o = *o * (-1.0 / v);
        }
        out
    }

    /// `∫|∇f|²` over ℝ⁴, including the harmonic tail beyond the last face.
    pub fn grad_sq<T: Sample>(&self, f: &[T]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n - 1 {
            acc += self.face[i] * (f[i + 1] - f[i]).abs_sq();
        }
        acc += self.tail * f[n - 1].abs_sq();
        SPHERE_AREA * acc
    }

    /// Centered `∂_r f`, even across the origin and tail-consistent at the last node.
    pub fn radial_derivative<T: Sample>(&self, f: &[T]) -> Vec<T> {
        let n = self.n;
        let inv = 0.5 / self.h;
        let mut out = Vec::with_capacity(n);
        out.push((f[1] - f[0]) * inv);
        for i in 1..n - 1 {
            out.push((f[i + 1] - f[i - 1]) * inv);
        }
        out.push(f[n - 1] * (-2.0 / self.nodes[n - 1]));
        out
    }

    /// Value of the continued field at radius `s ≥ 0`.
    ///
    /// Flat between the origin and the first node, piecewise linear across the
    /// nodes, harmonic tail `f_n (r_n/s)²` past the last node.
    pub fn sample_at<T: Sample>(&self, f: &[T], s: f64) -> T {
        let n = self.n;
        let x = s / self.h;
        if x <= 1.0 {
            return f[0];
        }
        if x >= n as f64 {
            let ratio = self.nodes[n - 1] / s;
            return f[n - 1] * (ratio * ratio);
        }
        let k = floor(x) as usize;
        let k = k.clamp(1, n - 1);
        let frac = x - k as f64;
        f[k - 1] * (1.0 - frac) + f[k] * frac
    }

    /// `g(r) = f(r/R)/R`, the critical rescaling that leaves `∫|∇f|²` and `∫|f|⁴` unchanged.
    pub fn dilate<T: Sample>(&self, f: &[T], scale: f64) -> Result<Vec<T>, GridError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GridError::BadScale(scale));
        }
        self.check_len(f.len())?;
        if scale == 1.0 {
            return Ok(f.to_vec());
        }
        let inv = 1.0 / scale;
        Ok(self
            .nodes
            .iter()
            .map(|&r| self.sample_at(f, r * inv) * inv)
            .collect())
    }

    /// Samples a closed-form radial profile at the nodes.
    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.nodes.iter().map(|&r| f(r)).collect()
    }
}

fn pow3(x: f64) -> f64 {
    x * x * x
}

fn pow4(x: f64) -> f64 {
    let s = x * x;
    s * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PI2;
    use alloc::vec;
    use libm::{exp, fabs};

    fn w(r: f64) -> f64 {
        1.0 / (1.0 + r * r / 8.0)
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(RadialGrid::new(1.0, 2).unwrap_err(), GridError::TooSmall(2));
        assert!(matches!(RadialGrid::new(0.0, 10), Err(GridError::BadRadius(_))));
        assert!(matches!(RadialGrid::new(f64::NAN, 10), Err(GridError::BadRadius(_))));
    }

    #[test]
    fn nodes_are_interior() {
        let g = RadialGrid::new(2.0, 99).unwrap();
        assert!(fabs(g.h() - 0.02) < 1e-15);
        assert!(g.nodes().windows(2).all(|p| p[1] > p[0]));
        assert!(g.nodes()[98] < 2.0);
    }

    #[test]
    fn ball_volume() {
        let g = RadialGrid::new(2.0, 2000).unwrap();
        let one = vec![1.0; g.n()];
        let v = g.integrate(&one);
        let exact = PI2 * 16.0 / 2.0;
        // the shells stop half a spacing short of r_max
        assert!(fabs(v - exact) / exact < 4.0 * g.h() / 2.0);
        assert_eq!(g.integrate(&vec![0.0; g.n()]), 0.0);
    }

    #[test]
    fn laplacian_of_r_squared_is_eight() {
        let g = RadialGrid::new(10.0, 500).unwrap();
        let f = g.sample(|r| r * r);
        let lap = g.laplacian(&f);
        for v in &lap[..g.n() - 1] {
            assert!(fabs(v - 8.0) < 1e-9, "{v}");
        }
    }

    #[test]
    fn laplacian_of_soliton() {
        let g = RadialGrid::new(100.0, 4096).unwrap();
        let f = g.sample(w);
        let lap = g.laplacian(&f);
        let worst = g
            .nodes()
            .iter()
            .zip(&lap)
            .filter(|(r, _)| **r < 20.0)
            .map(|(&r, l)| fabs(l + w(r) * w(r) * w(r)))
            .fold(0.0, f64::max);
        assert!(worst < 2.0 * g.h() * g.h(), "{worst}");
    }

    #[test]
    fn summation_by_parts_is_exact() {
        let g = RadialGrid::new(30.0, 600).unwrap();
        let f: Vec<Complex64> = g
            .nodes()
            .iter()
            .map(|&r| Complex64::new(exp(-r * r / 4.0), r * exp(-r * r / 9.0)))
            .collect();
        let lap = g.laplacian(&f);
        let pair = g.integrate_with(|i| (f[i].conj() * lap[i]).re);
        let k = g.grad_sq(&f);
        assert!(fabs(k + pair) < 1e-12 * k);
    }

    #[test]
    fn derivative_matches_closed_form() {
        let g = RadialGrid::new(10.0, 1000).unwrap();
        let f = g.sample(|r| exp(-r * r));
        let d = g.radial_derivative(&f);
        for (i, &r) in g.nodes().iter().enumerate().take(400).skip(1) {
            assert!(fabs(d[i] + 2.0 * r * exp(-r * r)) < 1e-3);
        }
    }

    #[test]
    fn dilate_identity_and_errors() {
        let g = RadialGrid::new(10.0, 100).unwrap();
        let f = g.sample(w);
        assert_eq!(g.dilate(&f, 1.0).unwrap(), f);
        assert_eq!(g.dilate(&f, 0.0).unwrap_err(), GridError::BadScale(0.0));
        assert_eq!(g.dilate(&f, -1.0).unwrap_err(), GridError::BadScale(-1.0));
        assert!(matches!(g.dilate(&f[..50], 2.0), Err(GridError::Length { .. })));
    }

    #[test]
    fn sample_at_tail() {
        let g = RadialGrid::new(10.0, 9).unwrap();
        let f: Vec<f64> = (1..=9).map(|i| i as f64).collect();
        assert_eq!(g.sample_at(&f, 0.3), 1.0);
        assert!(fabs(g.sample_at(&f, 2.5) - 2.5) < 1e-14);
        assert!(fabs(g.sample_at(&f, 18.0) - 9.0 * 0.25) < 1e-14);
    }
}
