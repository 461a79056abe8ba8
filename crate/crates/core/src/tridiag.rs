//! Thomas-algorithm solvers for symmetric tridiagonal systems.

use alloc::vec::Vec;
use core::ops::{Add, Div, Mul, Sub};

/// Scalars the Thomas sweep can run over.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn one() -> Self;
}

impl Scalar for f64 {
    fn one() -> Self {
        1.0
    }
}

impl Scalar for crate::Complex64 {
    fn one() -> Self {
        crate::Complex64::new(1.0, 0.0)
    }
}

/// LU factors of a symmetric tridiagonal matrix, reusable across right-hand sides.
///
/// No pivoting is done. Every matrix factored in this crate is either symmetric
/// positive definite or has a positive definite Hermitian part, so the leading
/// minors never vanish.
#[derive(Clone, Debug)]
pub struct SymTridiag<T> {
    off: Vec<T>,
    inv_pivot: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> SymTridiag<T> {
    /// `diag` has length n, `off` length n-1 (the common sub/super diagonal).
    pub fn factor(diag: &[T], off: &[T]) -> Self {
        let n = diag.len();
        assert!(n >= 1 && off.len() + 1 == n, "tridiagonal shape mismatch");
        let mut inv_pivot = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n.saturating_sub(1));
        let mut pivot = diag[0];
        for i in 0..n {
            if i > 0 {
                pivot = diag[i] - off[i - 1] * upper[i - 1];
            }
            let inv = T::one() / pivot;
            inv_pivot.push(inv);
            if i + 1 < n {
                upper.push(off[i] * inv);
            }
        }
        Self {
            off: off.to_vec(),
            inv_pivot,
            upper,
        }
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    /// Solves in place: on return `rhs` holds the solution.
    pub fn solve_in_place(&self, rhs: &mut [T]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        rhs[0] = rhs[0] * self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.off[i - 1] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] = rhs[i] - self.upper[i] * rhs[i + 1];
        }
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// y = M x for the symmetric tridiagonal M = (diag, off).
pub fn sym_tridiag_mul<T: Scalar>(diag: &[T], off: &[T], x: &[T], y: &mut [T]) {
    let n = diag.len();
    for i in 0..n {
        let mut acc = diag[i] * x[i];
        if i > 0 {
            acc = acc + off[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            acc = acc + off[i] * x[i + 1];
        }
        y[i] = acc;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;
    use alloc::vec;

    #[test]
    fn real_solve_roundtrip() {
        let diag = vec![4.0, 5.0, 6.0, 7.0];
        let off = vec![-1.0, 2.0, -0.5];
        let x = vec![1.0, -2.0, 0.25, 3.0];
        let mut b = vec![0.0; 4];
        sym_tridiag_mul(&diag, &off, &x, &mut b);
        let got = SymTridiag::factor(&diag, &off).solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_solve_roundtrip() {
        let diag: Vec<Complex64> = (0..6)
            .map(|i| Complex64::new(1.0 + i as f64, 0.3 * i as f64))
            .collect();
        let off: Vec<Complex64> = (0..5).map(|i| Complex64::new(0.0, -0.2 - 0.1 * i as f64)).collect();
        let x: Vec<Complex64> = (0..6).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let mut b = vec![Complex64::new(0.0, 0.0); 6];
        sym_tridiag_mul(&diag, &off, &x, &mut b);
        let got = SymTridiag::factor(&diag, &off).solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-13);
        }
    }

    #[test]
    fn single_unknown() {
        let f = SymTridiag::factor(&[2.0], &[]);
        assert_eq!(f.solve(&[3.0]), vec![1.5]);
    }
}
