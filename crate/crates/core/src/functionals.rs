//! Scalar functionals of a field pair and the pointwise nonlinearities.
//!
//! All densities are evaluated node by node and integrated with the shared
//! grid quadrature, so algebraic identities between functionals hold to
//! rounding.

use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

use crate::grid::{RadialField, RadialGrid, RealRadialField};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FunctionalError {
    #[error("N = {0} is not positive: pair lies outside the admissible cone")]
    NotInN(f64),
    #[error("sigma and mu must be positive and finite (sigma = {sigma}, mu = {mu})")]
    BadParams { sigma: f64, mu: f64 },
    #[error("resonant mode requires sigma = 3 and mu = 9 (sigma = {sigma}, mu = {mu})")]
    NotResonant { sigma: f64, mu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicsParams {
    pub sigma: f64,
    pub mu: f64,
    /// Gauge-transformed system with the linear `-u` and `-μw` terms removed.
    pub resonant: bool,
}

impl PhysicsParams {
    pub fn new(sigma: f64, mu: f64, resonant: bool) -> Result<Self, FunctionalError> {
        if !(sigma > 0.0 && mu > 0.0 && sigma.is_finite() && mu.is_finite()) {
            return Err(FunctionalError::BadParams { sigma, mu });
        }
        if resonant && (sigma != 3.0 || mu != 9.0) {
            return Err(FunctionalError::NotResonant { sigma, mu });
        }
        Ok(Self { sigma, mu, resonant })
    }

    pub fn resonant() -> Self {
        Self {
            sigma: 3.0,
            mu: 9.0,
            resonant: true,
        }
    }
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self {
            sigma: 3.0,
            mu: 9.0,
            resonant: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexFieldPair {
    pub u: RadialField,
    pub w: RadialField,
    pub params: PhysicsParams,
}

impl ComplexFieldPair {
    pub fn zeros(n: usize, params: PhysicsParams) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            u: alloc::vec![z; n],
            w: alloc::vec![z; n],
            params,
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            u: self.u.iter().map(|v| v * lambda).collect(),
            w: self.w.iter().map(|v| v * lambda).collect(),
            params: self.params,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.w).all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Pointwise moduli `(|u|, |w|)`.
    pub fn moduli(&self) -> RealFieldPair {
        RealFieldPair {
            p: self.u.iter().map(|v| v.norm()).collect(),
            q: self.w.iter().map(|v| v.norm()).collect(),
        }
    }

    /// `max_i max(|u_i|, |w_i|)`.
    pub fn amp_max(&self) -> f64 {
        libm::sqrt(self.u.iter().chain(&self.w).map(|v| v.norm_sqr()).fold(0.0, f64::max))
    }
}

/// A real pair `(P, Q)` of the stationary problem.
#[derive(Clone, Debug, PartialEq)]
pub struct RealFieldPair {
    pub p: RealRadialField,
    pub q: RealRadialField,
}

impl RealFieldPair {
    pub fn zeros(n: usize) -> Self {
        Self {
            p: alloc::vec![0.0; n],
            q: alloc::vec![0.0; n],
        }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            p: self.p.iter().map(|v| v * lambda).collect(),
            q: self.q.iter().map(|v| v * lambda).collect(),
        }
    }

    pub fn to_complex(&self, params: PhysicsParams) -> ComplexFieldPair {
        ComplexFieldPair {
            u: self.p.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            w: self.q.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            params,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FunctionalReport {
    pub mass: f64,
    pub energy: f64,
    /// `K/2 - 𝒫`
    pub energy_crit: f64,
    pub kinetic: f64,
    /// `N(|u|, |w|)`
    pub n_quartic: f64,
    pub p_quartic: f64,
    /// Action of the stationary problem, `K/2 - N` on real pairs.
    pub action: f64,
    /// `K²/N`, absent when `N ≤ 0`.
    pub weinstein: Option<f64>,
    pub tau: f64,
}

/// `f(u, w) = (|u|²/9 + 2|w|²) u + ū² w / 3`
#[inline]
pub fn nonlinearity_f(u: Complex64, w: Complex64) -> Complex64 {
    u * (u.norm_sqr() / 9.0 + 2.0 * w.norm_sqr()) + u.conj() * u.conj() * w / 3.0
}

/// `g(u, w) = (9|w|² + 2|u|²) w + u³ / 9`, without the `1/σ` of the time-dependent equation.
#[inline]
pub fn nonlinearity_g(u: Complex64, w: Complex64) -> Complex64 {
    w * (9.0 * w.norm_sqr() + 2.0 * u.norm_sqr()) + u * u * u / 9.0
}

/// `H = ū f + w̄ g`; its real part integrates to `4𝒫`.
#[inline]
pub fn density_h(u: Complex64, w: Complex64) -> Complex64 {
    u.conj() * nonlinearity_f(u, w) + w.conj() * nonlinearity_g(u, w)
}

/// Quartic density `|u|⁴/36 + 9|w|⁴/4 + |u|²|w|² + Re(ū³ w)/9`.
#[inline]
pub fn p_density(u: Complex64, w: Complex64) -> f64 {
    let a = u.norm_sqr();
    let b = w.norm_sqr();
    let c = u.conj();
    a * a / 36.0 + 2.25 * b * b + a * b + (c * c * c * w).re / 9.0
}

/// Real quartic density `P⁴/36 + 9Q⁴/4 + P²Q² + P³Q/9`.
#[inline]
pub fn n_density(p: f64, q: f64) -> f64 {
    let p2 = p * p;
    let q2 = q * q;
    p2 * p2 / 36.0 + 2.25 * q2 * q2 + p2 * q2 + p2 * p * q / 9.0
}

/// Partial derivatives of [`n_density`]; they equal the real `f` and `g`.
#[inline]
pub fn n_density_grad(p: f64, q: f64) -> (f64, f64) {
    let p2 = p * p;
    let q2 = q * q;
    (
        p2 * p / 9.0 + 2.0 * p * q2 + p2 * q / 3.0,
        9.0 * q2 * q + 2.0 * p2 * q + p2 * p / 9.0,
    )
}

pub fn mass(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    let c = 3.0 * pair.params.sigma;
    grid.integrate_with(|i| pair.u[i].norm_sqr() + c * pair.w[i].norm_sqr())
}

/// `∫|u|²` and `∫|w|²` separately.
pub fn slot_masses(grid: &RadialGrid, pair: &ComplexFieldPair) -> (f64, f64) {
    (
        grid.integrate_with(|i| pair.u[i].norm_sqr()),
        grid.integrate_with(|i| pair.w[i].norm_sqr()),
    )
}

pub fn kinetic(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    grid.grad_sq(&pair.u) + grid.grad_sq(&pair.w)
}

pub fn kinetic_real(grid: &RadialGrid, pair: &RealFieldPair) -> f64 {
    grid.grad_sq(&pair.p) + grid.grad_sq(&pair.q)
}

pub fn n_quartic(grid: &RadialGrid, pair: &RealFieldPair) -> f64 {
    grid.integrate_with(|i| n_density(pair.p[i], pair.q[i]))
}

pub fn p_quartic(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    grid.integrate_with(|i| p_density(pair.u[i], pair.w[i]))
}

/// Quadratic part `½(K + ∫|u|² + μ∫|w|²)` of the energy (`½K` in resonant mode).
pub fn quadratic_energy(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    let k = kinetic(grid, pair);
    if pair.params.resonant {
        0.5 * k
    } else {
        let (mu_, mw) = slot_masses(grid, pair);
        0.5 * (k + mu_ + pair.params.mu * mw)
    }
}

pub fn energy(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    quadratic_energy(grid, pair) - p_quartic(grid, pair)
}

pub fn energy_crit(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    0.5 * kinetic(grid, pair) - p_quartic(grid, pair)
}

/// `½K - N` for a real pair; the action of the stationary system.
pub fn energy_crit_real(grid: &RadialGrid, pair: &RealFieldPair) -> f64 {
    0.5 * kinetic_real(grid, pair) - n_quartic(grid, pair)
}

pub fn weinstein(grid: &RadialGrid, pair: &RealFieldPair) -> Result<f64, FunctionalError> {
    let n = n_quartic(grid, pair);
    if n > 0.0 {
        let k = kinetic_real(grid, pair);
        Ok(k * k / n)
    } else {
        Err(FunctionalError::NotInN(n))
    }
}

/// `τ = K - 4𝒫`.
pub fn pohozaev_tau(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    kinetic(grid, pair) - 4.0 * p_quartic(grid, pair)
}

/// The same `τ` written through the energy: `4E - K - 2∫(|u|² + μ|w|²)`
/// (`4E - K` in resonant mode).
pub fn pohozaev_tau_from_energy(grid: &RadialGrid, pair: &ComplexFieldPair) -> f64 {
    let e = energy(grid, pair);
    let k = kinetic(grid, pair);
    if pair.params.resonant {
        4.0 * e - k
    } else {
        let (mu_, mw) = slot_masses(grid, pair);
        4.0 * e - k - 2.0 * (mu_ + pair.params.mu * mw)
    }
}

pub fn report(grid: &RadialGrid, pair: &ComplexFieldPair) -> FunctionalReport {
    let k = kinetic(grid, pair);
    let p = p_quartic(grid, pair);
    let moduli = pair.moduli();
    let n = n_quartic(grid, &moduli);
    let (mu_, mw) = slot_masses(grid, pair);
    let quad = if pair.params.resonant {
        0.5 * k
    } else {
        0.5 * (k + mu_ + pair.params.mu * mw)
    };
    FunctionalReport {
        mass: mu_ + 3.0 * pair.params.sigma * mw,
        energy: quad - p,
        energy_crit: 0.5 * k - p,
        kinetic: k,
        n_quartic: n,
        p_quartic: p,
        action: 0.5 * k - n,
        weinstein: (n > 0.0).then(|| k * k / n),
        tau: k - 4.0 * p,
    }
}

/// Pointwise `(f, g)` over a whole pair.
pub fn nonlinear_terms(pair: &ComplexFieldPair) -> (Vec<Complex64>, Vec<Complex64>) {
    pair.u
        .iter()
        .zip(&pair.w)
        .map(|(&u, &w)| (nonlinearity_f(u, w), nonlinearity_g(u, w)))
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PI2;
    use libm::{exp, fabs};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn params_validation() {
        assert!(PhysicsParams::new(3.0, 9.0, true).is_ok());
        assert!(PhysicsParams::new(2.0, 9.0, true).is_err());
        assert!(PhysicsParams::new(0.0, 1.0, false).is_err());
        assert!(PhysicsParams::new(1.0, -1.0, false).is_err());
    }

    #[test]
    fn pointwise_nonlinearities() {
        let w = c(0.3, -0.7);
        assert_eq!(nonlinearity_f(c(0.0, 0.0), w), c(0.0, 0.0));
        let g = nonlinearity_g(c(0.0, 0.0), w);
        assert!((g - w * 9.0 * w.norm_sqr()).norm() < 1e-15);
    }

    #[test]
    fn h_real_part_is_four_p_density() {
        for &(u, w) in &[(c(0.4, 0.1), c(-0.2, 0.9)), (c(1.3, -0.5), c(0.0, 0.2)), (c(0.0, 1.0), c(1.0, 0.0))] {
            assert!(fabs(density_h(u, w).re - 4.0 * p_density(u, w)) < 1e-14);
        }
    }

    #[test]
    fn real_densities_agree() {
        let (p, q) = (0.7, 1.1);
        assert!(fabs(p_density(c(p, 0.0), c(q, 0.0)) - n_density(p, q)) < 1e-15);
        let (gp, gq) = n_density_grad(p, q);
        assert!(fabs(gp - nonlinearity_f(c(p, 0.0), c(q, 0.0)).re) < 1e-15);
        assert!(fabs(gq - nonlinearity_g(c(p, 0.0), c(q, 0.0)).re) < 1e-13);
    }

    #[test]
    fn imaginary_u_kills_cross_term() {
        let (p, q) = (0.8, 0.6);
        let val = p_density(c(0.0, p), c(q, 0.0));
        let expect = p * p * p * p / 36.0 + 2.25 * q * q * q * q + p * p * q * q;
        assert!(fabs(val - expect) < 1e-15);
    }

    #[test]
    fn zero_pair_is_zero() {
        let g = RadialGrid::new(5.0, 50).unwrap();
        let z = ComplexFieldPair::zeros(g.n(), PhysicsParams::default());
        let r = report(&g, &z);
        assert_eq!((r.mass, r.energy, r.kinetic, r.p_quartic, r.tau), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.weinstein, None);
        assert_eq!(
            weinstein(&g, &RealFieldPair::zeros(g.n())),
            Err(FunctionalError::NotInN(0.0))
        );
    }

    #[test]
    fn mass_slot_weighting() {
        let g = RadialGrid::new(10.0, 200).unwrap();
        let prof: Vec<Complex64> = g.nodes().iter().map(|&r| c(exp(-r * r), 0.0)).collect();
        let zero = alloc::vec![c(0.0, 0.0); g.n()];
        let params = PhysicsParams::new(1.7, 2.0, false).unwrap();
        let in_u = ComplexFieldPair { u: prof.clone(), w: zero.clone(), params };
        let in_w = ComplexFieldPair { u: zero, w: prof, params };
        assert!(fabs(mass(&g, &in_w) - 3.0 * 1.7 * mass(&g, &in_u)) < 1e-14);
        // ∫ e^{-2r²} over ℝ⁴ = π²/4
        assert!(fabs(mass(&g, &in_u) / (PI2 / 4.0) - 1.0) < g.h() * g.h());
    }

    #[test]
    fn resonant_energy_drops_linear_terms() {
        let g = RadialGrid::new(10.0, 300).unwrap();
        let prof: Vec<Complex64> = g.nodes().iter().map(|&r| c(exp(-r * r), 0.1)).collect();
        let plain = ComplexFieldPair { u: prof.clone(), w: prof.clone(), params: PhysicsParams::default() };
        let res = ComplexFieldPair { params: PhysicsParams::resonant(), ..plain.clone() };
        let e = energy(&g, &res);
        assert!(fabs(e - (0.5 * kinetic(&g, &res) - p_quartic(&g, &res))) < 1e-14);
        assert!(energy(&g, &plain) > e);
    }
}
