//! Smooth localized virial weight.
//!
//! `ζ(s) = exp(-1/((s-1)(3-s)))` on `(1, 3)`; with `t = r²`,
//!
//! ```text
//! χ(r) = r²                                       0 ≤ r ≤ 1
//!      = r² - (1/m₀) ∫₁^{r²} ∫₁^t ζ(s) ds dt       1 < r < 3
//!      = 9 - m₁                                   r ≥ 3
//! ```
//!
//! with `m₀ = ∫₁⁹ ζ` and `m₁ = (1/m₀) ∫₁⁹ ∫₁^t ζ`. The localized weight is
//! `χ_R(r) = R² χ(r/R)`.

use alloc::vec::Vec;

use libm::exp;
use thiserror::Error;

use crate::grid::RadialGrid;
use crate::quadrature;

const QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutoffError {
    #[error("cutoff radius must be positive, got {0}")]
    BadRadius(f64),
}

pub fn zeta(s: f64) -> f64 {
    if s <= 1.0 || s >= 3.0 {
        0.0
    } else {
        exp(-1.0 / ((s - 1.0) * (3.0 - s)))
    }
}

/// `(ζ, ζ', ζ'')` at `s`.
fn zeta_derivatives(s: f64) -> (f64, f64, f64) {
    let z = zeta(s);
    if z == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let q = (s - 1.0) * (3.0 - s);
    let dq = 4.0 - 2.0 * s;
    let ddq = -2.0;
    let q2 = q * q;
    let d1 = z * dq / q2;
    let d2 = z * (dq * dq / (q2 * q2) + ddq / q2 - 2.0 * dq * dq / (q2 * q));
    (z, d1, d2)
}

/// `χ` and its first four derivatives at one radius, plus `χ'/r`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChiJet {
    pub chi: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
    pub d1_over_r: f64,
}

impl ChiJet {
    /// `χ'' + 3χ'/r`
    pub fn laplacian(&self) -> f64 {
        self.d2 + 3.0 * self.d1_over_r
    }

    /// `χ'''' + (6/r)χ''' - (3/r²)χ'' + (3/r³)χ'`
    pub fn bilaplacian(&self, r: f64) -> f64 {
        if self.d3 == 0.0 && self.d4 == 0.0 && self.d2 == self.d1_over_r {
            // a pure quadratic, where the expansion cancels identically
            return 0.0;
        }
        self.d4 + 6.0 * self.d3 / r - 3.0 * self.d2 / (r * r) + 3.0 * self.d1_over_r / (r * r)
    }
}

/// The unscaled profile `χ` with its normalizers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutoffShape {
    pub m0: f64,
    pub m1: f64,
    // ∫₁³ s ζ(s) ds
    first_moment: f64,
}

impl Default for CutoffShape {
    fn default() -> Self {
        Self::new()
    }
}

impl CutoffShape {
    pub fn new() -> Self {
        let m0 = quadrature::integrate(zeta, 1.0, 3.0, QUAD_TOL);
        let first_moment = quadrature::integrate(|s| s * zeta(s), 1.0, 3.0, QUAD_TOL);
        // ∫₁⁹ ∫₁^t ζ = ∫₁³ (9 - s) ζ(s) ds
        let m1 = (9.0 * m0 - first_moment) / m0;
        Self { m0, m1, first_moment }
    }

    /// `Z(t) = ∫₁^t ζ`
    fn zeta_integral(&self, t: f64) -> f64 {
        if t <= 1.0 {
            0.0
        } else if t >= 3.0 {
            self.m0
        } else {
            quadrature::integrate(zeta, 1.0, t, QUAD_TOL)
        }
    }

    /// `G(t) = ∫₁^t ∫₁^τ ζ = ∫₁^t (t - s) ζ(s) ds`
    fn double_integral(&self, t: f64) -> f64 {
        if t <= 1.0 {
            0.0
        } else if t >= 3.0 {
            t * self.m0 - self.first_moment
        } else {
            quadrature::integrate(|s| (t - s) * zeta(s), 1.0, t, QUAD_TOL)
        }
    }

    pub fn jet(&self, r: f64) -> ChiJet {
        if r <= 1.0 {
            return ChiJet {
                chi: r * r,
                d1: 2.0 * r,
                d2: 2.0,
                d3: 0.0,
                d4: 0.0,
                d1_over_r: 2.0,
            };
        }
        if r >= 3.0 {
            return ChiJet {
                chi: 9.0 - self.m1,
                ..ChiJet::default()
            };
        }
        let t = r * r;
        let inv = 1.0 / self.m0;
        let slope = 2.0 * (1.0 - self.zeta_integral(t) * inv);
        let (z, dz, ddz) = zeta_derivatives(t);
        ChiJet {
            chi: t - self.double_integral(t) * inv,
            d1: r * slope,
            d2: slope - 4.0 * t * z * inv,
            d3: -(12.0 * r * z + 8.0 * r * t * dz) * inv,
            d4: -(12.0 * z + 48.0 * t * dz + 16.0 * t * t * ddz) * inv,
            d1_over_r: slope,
        }
    }

    /// Jet of `χ_R(r) = R² χ(r/R)`.
    pub fn scaled_jet(&self, radius: f64, r: f64) -> ChiJet {
        let s = r / radius;
        if s <= 1.0 {
            return ChiJet {
                chi: r * r,
                d1: 2.0 * r,
                ..self.jet(0.0)
            };
        }
        let j = self.jet(s);
        ChiJet {
            chi: radius * radius * j.chi,
            d1: radius * j.d1,
            d2: j.d2,
            d3: j.d3 / radius,
            d4: j.d4 / (radius * radius),
            d1_over_r: j.d1_over_r,
        }
    }
}

/// `χ_R` tabulated on the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffProfile {
    pub radius: f64,
    pub m0: f64,
    pub m1: f64,
    pub chi: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub d3: Vec<f64>,
    pub d4: Vec<f64>,
    d1_over_r: Vec<f64>,
}

pub fn build_profile(grid: &RadialGrid, radius: f64) -> Result<CutoffProfile, CutoffError> {
    build_profile_with(&CutoffShape::new(), grid, radius)
}

pub fn build_profile_with(
    shape: &CutoffShape,
    grid: &RadialGrid,
    radius: f64,
) -> Result<CutoffProfile, CutoffError> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(CutoffError::BadRadius(radius));
    }
    let n = grid.n();
    let mut p = CutoffProfile {
        radius,
        m0: shape.m0,
        m1: shape.m1,
        chi: Vec::with_capacity(n),
        d1: Vec::with_capacity(n),
        d2: Vec::with_capacity(n),
        d3: Vec::with_capacity(n),
        d4: Vec::with_capacity(n),
        d1_over_r: Vec::with_capacity(n),
    };
    for &r in grid.nodes() {
        let j = shape.scaled_jet(radius, r);
        p.chi.push(j.chi);
        p.d1.push(j.d1);
        p.d2.push(j.d2);
        p.d3.push(j.d3);
        p.d4.push(j.d4);
        p.d1_over_r.push(j.d1_over_r);
    }
    Ok(p)
}

impl CutoffProfile {
    /// `(Δχ_R, Δ²χ_R)` at every node.
    pub fn radial_laplacians(&self, grid: &RadialGrid) -> (Vec<f64>, Vec<f64>) {
        let mut lap = Vec::with_capacity(self.chi.len());
        let mut bilap = Vec::with_capacity(self.chi.len());
        for (i, &r) in grid.nodes().iter().enumerate() {
            let j = ChiJet {
                chi: self.chi[i],
                d1: self.d1[i],
                d2: self.d2[i],
                d3: self.d3[i],
                d4: self.d4[i],
                d1_over_r: self.d1_over_r[i],
            };
            lap.push(j.laplacian());
            bilap.push(j.bilaplacian(r));
        }
        (lap, bilap)
    }
}

/// Measurements of the cutoff bounds at one radius.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusCheck {
    pub radius: f64,
    /// `Δχ_R = 8` bit-exactly at every sample with `r ≤ R`.
    pub inner_exact: bool,
    pub max_d2: f64,
    /// `min χ'` and `max (χ' - 2r)` over the samples.
    pub min_d1: f64,
    pub max_d1_excess: f64,
    pub sup_laplacian: f64,
    pub sup_bilaplacian: f64,
    /// `χ_R = r²` bit-exactly for `r ≤ R`.
    pub localized: bool,
}

impl RadiusCheck {
    pub fn passes(&self) -> bool {
        self.inner_exact
            && self.localized
            && self.max_d2 <= 2.0
            && self.min_d1 >= 0.0
            && self.max_d1_excess <= 1e-12 * self.radius
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutoffReport {
    pub m0: f64,
    pub m1: f64,
    pub per_radius: Vec<RadiusCheck>,
    /// `sup|Δ²χ_{R_{k+1}}| / sup|Δ²χ_{R_k}|` for consecutive radii.
    pub decay_ratios: Vec<f64>,
    /// Largest `R² sup|Δ²χ_R|` over the radii.
    pub bilaplacian_constant: f64,
    /// Largest `sup Δχ_R` over the radii.
    pub laplacian_constant: f64,
    pub continuity_gap: f64,
}

impl CutoffReport {
    /// Expected ratio when radii double is `1/4`; `slack` is the allowed deviation.
    pub fn passes(&self, slack: f64) -> bool {
        let ratios_ok = self.per_radius.windows(2).zip(&self.decay_ratios).all(|(w, ratio)| {
            let q = w[0].radius / w[1].radius;
            libm::fabs(ratio - q * q) <= slack
        });
        ratios_ok && self.per_radius.iter().all(RadiusCheck::passes) && self.continuity_gap < 1e-9
    }
}

/// Samples `[0, R]`, `[R, 3R]` and `[3R, 4R]` at `per_branch` points each.
pub fn check_cutoff(radii: &[f64], per_branch: usize) -> Result<CutoffReport, CutoffError> {
    let shape = CutoffShape::new();
    let mut per_radius = Vec::with_capacity(radii.len());
    for &radius in radii {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(CutoffError::BadRadius(radius));
        }
        let mut c = RadiusCheck {
            radius,
            inner_exact: true,
            max_d2: f64::NEG_INFINITY,
            min_d1: f64::INFINITY,
            max_d1_excess: f64::NEG_INFINITY,
            sup_laplacian: f64::NEG_INFINITY,
            sup_bilaplacian: 0.0,
            localized: true,
        };
        for (lo, hi) in [(0.0, 1.0), (1.0, 3.0), (3.0, 4.0)] {
            for k in 1..=per_branch {
                let s = lo + (hi - lo) * k as f64 / per_branch as f64;
                let r = radius * s;
                let j = shape.scaled_jet(radius, r);
                let lap = j.laplacian();
                let bilap = j.bilaplacian(r);
                if s <= 1.0 {
                    c.inner_exact &= lap == 8.0 && bilap == 0.0;
                    c.localized &= j.chi == r * r;
                }
                c.max_d2 = c.max_d2.max(j.d2);
                c.min_d1 = c.min_d1.min(j.d1);
                c.max_d1_excess = c.max_d1_excess.max(j.d1 - 2.0 * r);
                c.sup_laplacian = c.sup_laplacian.max(lap);
                c.sup_bilaplacian = c.sup_bilaplacian.max(libm::fabs(bilap));
            }
        }
        per_radius.push(c);
    }
    let decay_ratios = per_radius
        .windows(2)
        .map(|w| w[1].sup_bilaplacian / w[0].sup_bilaplacian)
        .collect();
    let bilaplacian_constant = per_radius
        .iter()
        .map(|c| c.radius * c.radius * c.sup_bilaplacian)
        .fold(0.0, f64::max);
    let laplacian_constant = per_radius.iter().map(|c| c.sup_laplacian).fold(f64::NEG_INFINITY, f64::max);
    Ok(CutoffReport {
        m0: shape.m0,
        m1: shape.m1,
        per_radius,
        decay_ratios,
        bilaplacian_constant,
        laplacian_constant,
        continuity_gap: continuity_gap(&shape),
    })
}

/// Largest jump of `χ` or `χ'` across the branch points `r = 1` and `r = 3`.
pub fn continuity_gap(shape: &CutoffShape) -> f64 {
    let eps = 1e-12;
    let mut gap: f64 = 0.0;
    for b in [1.0, 3.0] {
        let lo = shape.jet(b - eps);
        let hi = shape.jet(b + eps);
        gap = gap.max(libm::fabs(lo.chi - hi.chi)).max(libm::fabs(lo.d1 - hi.d1));
    }
    gap
}
