//! Rapid-decay convolution algebra on a [`ModelGroupoid`]: kernels sampled on
//! the Haar fiber grids, convolution, involution, the weighted norms
//! ‖f‖_{k,d} and numerical checks of the estimates that make the algebra
//! closed under holomorphic calculus.
//!
//! Kernels are stored as rows `values[v][k]` over the full window μ ∈ [−L, L]
//! for every grid unit v. Entries with μ above the fiber cap of v are kept
//! (the formula is simply evaluated there) so that finite differences and
//! unit interpolation stay smooth; all sums and norms mask them out.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groupoid::{GrowthCertificate, ModelGroupoid};
use crate::holocalc::{cauchy_calc_column, Contour, HoloFn};
use crate::opcore::{op_norm_estimate_with, Op, C64};
use crate::rng::uniform_complex;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Relative level below which kernel values count as outside the support.
pub const SUPPORT_FLOOR: f64 = 1e-16;

/// Headroom granted to every inequality check.
pub const HEADROOM: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct GroupoidKernel {
    g: Arc<ModelGroupoid>,
    values: Vec<C64>,
}

impl GroupoidKernel {
    pub fn zeros(g: &Arc<ModelGroupoid>) -> Self {
        GroupoidKernel { g: Arc::clone(g), values: vec![ZERO; g.units().len() * g.mu_len()] }
    }

    /// Samples f(v, μ) at every grid unit and window point.
    pub fn from_fn(g: &Arc<ModelGroupoid>, f: impl Fn(f64, f64) -> C64) -> Self {
        let m = g.mu_len();
        let mut values = Vec::with_capacity(g.units().len() * m);
        for &v in g.units() {
            for k in 0..m {
                values.push(f(v, g.mu_at(k)));
            }
        }
        GroupoidKernel { g: Arc::clone(g), values }
    }

    /// Unit-independent kernel f(v, μ) = p(μ).
    pub fn from_profile(g: &Arc<ModelGroupoid>, p: impl Fn(f64) -> C64) -> Self {
        Self::from_fn(g, |_, mu| p(mu))
    }

    /// exp(−μ²/(2σ²)).
    pub fn gaussian(g: &Arc<ModelGroupoid>, sigma: f64) -> Self {
        Self::from_profile(g, |mu| C64::new((-mu * mu / (2.0 * sigma * sigma)).exp(), 0.0))
    }

    /// Smooth bump of peak 1 supported in |μ − center| < radius.
    pub fn bump(g: &Arc<ModelGroupoid>, center: f64, radius: f64) -> Self {
        Self::from_profile(g, |mu| C64::new(bump_profile((mu - center) / radius), 0.0))
    }

    /// Bump at 0 rescaled to grid integral 1 on the boundary fiber.
    pub fn normalized_bump(g: &Arc<ModelGroupoid>, radius: f64) -> Self {
        let b = Self::bump(g, 0.0, radius);
        let mass: f64 = b.row(0).iter().map(|z| z.re).sum::<f64>() * g.h;
        b.scale(C64::new(1.0 / mass, 0.0))
    }

    /// Sum of one to three bumps with complex amplitudes, centers and radii
    /// chosen so that the support stays inside |μ| ≤ reach, modulated by a
    /// mild affine dependence on the source unit.
    pub fn random_bump_mixture<R: Rng + ?Sized>(g: &Arc<ModelGroupoid>, rng: &mut R, reach: f64) -> Self {
        let count = rng.gen_range(1..=3);
        let max_radius = (reach / 2.0).min(2.0);
        let parts: Vec<(C64, f64, f64)> = (0..count)
            .map(|_| {
                let radius = rng.gen_range(0.25 * max_radius..max_radius);
                let center = rng.gen_range(-(reach - radius)..(reach - radius));
                (uniform_complex(rng), center, radius)
            })
            .collect();
        let tilt = rng.gen_range(-0.5..0.5);
        Self::from_fn(g, |v, mu| {
            let s: C64 = parts
                .iter()
                .map(|&(a, c, r)| a * bump_profile((mu - c) / r))
                .sum();
            s * (1.0 + tilt * v)
        })
    }

    pub fn groupoid(&self) -> &Arc<ModelGroupoid> {
        &self.g
    }

    /// Stored value at grid unit index i and window index k, masked or not.
    pub fn value(&self, i: usize, k: usize) -> C64 {
        self.values[i * self.g.mu_len() + k]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        let m = self.g.mu_len();
        &self.values[i * m..(i + 1) * m]
    }

    /// Whether (unit i, window index k) is an arrow of the groupoid.
    pub fn is_valid(&self, i: usize, k: usize) -> bool {
        self.g.in_fiber(self.g.units()[i], k)
    }

    /// Value at an arbitrary unit u ∈ [0,1] by linear interpolation between
    /// grid rows; zero outside the window.
    pub fn interp(&self, u: f64, k: isize) -> C64 {
        let m = self.g.mu_len() as isize;
        if k < 0 || k >= m {
            return ZERO;
        }
        let (i, t) = unit_position(&self.g, u);
        let a = self.value(i, k as usize);
        if t == 0.0 {
            return a;
        }
        let b = self.value(i + 1, k as usize);
        a + (b - a) * t
    }

    pub fn scale(&self, c: C64) -> Self {
        GroupoidKernel { g: Arc::clone(&self.g), values: self.values.iter().map(|&z| z * c).collect() }
    }

    pub fn add(&self, other: &GroupoidKernel) -> Result<Self> {
        same_groupoid(self, other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(GroupoidKernel { g: Arc::clone(&self.g), values })
    }

    pub fn sub(&self, other: &GroupoidKernel) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    fn valid_entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        let m = self.g.mu_len();
        (0..self.g.units().len()).flat_map(move |i| {
            (0..m).filter(move |&k| self.is_valid(i, k)).map(move |k| (i, k, self.value(i, k)))
        })
    }

    /// Sup of |f| over arrows.
    pub fn sup_norm(&self) -> f64 {
        self.valid_entries().map(|(_, _, z)| z.norm()).fold(0.0, f64::max)
    }

    /// Max deviation from another kernel over arrows.
    pub fn max_abs_diff(&self, other: &GroupoidKernel) -> f64 {
        self.valid_entries()
            .map(|(i, k, z)| (z - other.value(i, k)).norm())
            .fold(0.0, f64::max)
    }

    /// Largest |μ| carrying a value above the relative support floor.
    pub fn extent(&self) -> f64 {
        let sup = self.sup_norm();
        if sup == 0.0 {
            return 0.0;
        }
        self.valid_entries()
            .filter(|(_, _, z)| z.norm() > SUPPORT_FLOOR * sup)
            .map(|(_, k, _)| self.g.mu_at(k).abs())
            .fold(0.0, f64::max)
    }

    /// Max over grid units of the Haar-fiber sum Σ |f(v, μ)| h.
    pub fn grid_l1(&self) -> f64 {
        let m = self.g.mu_len();
        (0..self.g.units().len())
            .map(|i| (0..m).filter(|&k| self.is_valid(i, k)).map(|k| self.value(i, k).norm()).sum::<f64>() * self.g.h)
            .fold(0.0, f64::max)
    }

    /// ‖f‖_I = max of the source-fiber and range-fiber ℓ¹ sums, the Schur
    /// bound for every regular representation.
    pub fn i_norm(&self) -> f64 {
        self.grid_l1().max(involution(self).grid_l1())
    }
}

fn bump_profile(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// Row index and interpolation weight toward the next row for a unit u.
/// Units within 1e-12 of a grid unit snap to it with weight 0.
fn unit_position(g: &ModelGroupoid, u: f64) -> (usize, f64) {
    let units = g.units();
    let u = u.clamp(0.0, 1.0);
    let i = units.partition_point(|&x| x <= u).saturating_sub(1);
    if i + 1 == units.len() {
        return (i, 0.0);
    }
    let (a, b) = (units[i], units[i + 1]);
    if u - a <= 1e-12 {
        (i, 0.0)
    } else if b - u <= 1e-12 {
        (i + 1, 0.0)
    } else {
        (i, (u - a) / (b - a))
    }
}

fn same_groupoid(a: &GroupoidKernel, b: &GroupoidKernel) -> Result<()> {
    if Arc::ptr_eq(&a.g, &b.g) || *a.g == *b.g {
        Ok(())
    } else {
        Err(Error::DimensionMismatch("kernels live on different groupoids".into()))
    }
}

/// (f1*f2)(v, μ) = Σ_{μ′} f1(u′, μ − μ′) f2(v, μ′) h, where u′ is the range
/// of the arrow (v, μ′) and the sum runs over the Haar fiber of v.
pub fn convolve(f1: &GroupoidKernel, f2: &GroupoidKernel) -> Result<GroupoidKernel> {
    same_groupoid(f1, f2)?;
    let g = &f1.g;
    let extent = f1.extent() + f2.extent();
    if extent > g.l + 1e-9 * g.h {
        return Err(Error::WindowOverflow { extent, limit: g.l });
    }
    let m = g.mu_len();
    let half = (m / 2) as isize;
    let rows: Vec<Vec<C64>> = (0..g.units().len())
        .into_par_iter()
        .map(|i| {
            let v = g.units()[i];
            let mut out = vec![ZERO; m];
            for kp in 0..m {
                let w = f2.value(i, kp);
                if w == ZERO || !g.in_fiber(v, kp) {
                    continue;
                }
                let w = w * g.h;
                let (j, t) = unit_position(g, g.range_of(v, g.mu_at(kp)));
                let lo = f1.row(j);
                let hi = if t == 0.0 { lo } else { f1.row(j + 1) };
                let shift = kp as isize - half;
                let start = shift.max(0) as usize;
                let end = (m as isize + shift).min(m as isize) as usize;
                for (k, o) in out.iter_mut().enumerate().take(end).skip(start) {
                    let idx = (k as isize - shift) as usize;
                    let a = lo[idx];
                    let val = if t == 0.0 { a } else { a + (hi[idx] - a) * t };
                    *o += val * w;
                }
            }
            out
        })
        .collect();
    Ok(GroupoidKernel { g: Arc::clone(g), values: rows.concat() })
}

/// f*(v, μ) = conj f(u, −μ) with u the range of (v, μ). Off the boundary
/// fiber u is generally not a grid unit and f is interpolated there.
pub fn involution(f: &GroupoidKernel) -> GroupoidKernel {
    let g = &f.g;
    let m = g.mu_len();
    let mut values = Vec::with_capacity(f.values.len());
    for (i, &v) in g.units().iter().enumerate() {
        for k in 0..m {
            let mirror = (m - 1 - k) as isize;
            let z = if v == 0.0 {
                f.value(i, mirror as usize)
            } else {
                let u = g.range_of(v, g.mu_at(k));
                f.interp(if u.is_finite() { u } else { 1.0 }, mirror)
            };
            values.push(z.conj());
        }
    }
    GroupoidKernel { g: Arc::clone(g), values }
}

/// Iterated derivative along the fiber coordinate μ by central differences
/// (O(h²)). Rows are extended by their edge values outside the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FiberDirection {
    order: usize,
}

impl FiberDirection {
    pub const MAX_ORDER: usize = 3;

    pub fn new(order: usize) -> Result<Self> {
        if order > Self::MAX_ORDER {
            return Err(Error::InvalidArgument(format!("derivative order {order} exceeds the stencil limit 3")));
        }
        Ok(FiberDirection { order })
    }

    pub fn order(self) -> usize {
        self.order
    }

    pub fn apply(self, f: &GroupoidKernel) -> GroupoidKernel {
        let g = &f.g;
        let m = g.mu_len();
        let h = g.h;
        let mut values = Vec::with_capacity(f.values.len());
        for i in 0..g.units().len() {
            let row = f.row(i);
            let at = |k: isize| row[k.clamp(0, m as isize - 1) as usize];
            for k in 0..m as isize {
                let z = match self.order {
                    0 => at(k),
                    1 => (at(k + 1) - at(k - 1)) / (2.0 * h),
                    2 => (at(k + 1) - at(k) * 2.0 + at(k - 1)) / (h * h),
                    _ => (at(k + 2) - at(k + 1) * 2.0 + at(k - 1) * 2.0 - at(k - 2)) / (2.0 * h * h * h),
                };
                values.push(z);
            }
        }
        GroupoidKernel { g: Arc::clone(g), values }
    }
}

/// sup |f|(1+|μ|)^k over arrows.
pub fn weighted_sup(f: &GroupoidKernel, k: u32) -> f64 {
    f.valid_entries()
        .map(|(_, kk, z)| z.norm() * (1.0 + f.g.mu_at(kk).abs()).powi(k as i32))
        .fold(0.0, f64::max)
}

/// ‖f‖_{k,d} = max_{i ≤ d} sup |∂^i f|(1+|μ|)^k.
pub fn schwartz_norm(f: &GroupoidKernel, k: u32, d: usize) -> Result<f64> {
    let mut best = 0.0f64;
    for i in 0..=d {
        let di = FiberDirection::new(i)?.apply(f);
        best = best.max(weighted_sup(&di, k));
    }
    Ok(best)
}

fn finite_c(cert: &GrowthCertificate, k: u32) -> Result<f64> {
    match cert.c_k(k) {
        Some(c) if c.is_finite() => Ok(c),
        _ => Err(Error::InvalidArgument(format!("no finite growth constant at k={k}"))),
    }
}

/// Product estimate ‖f1*f2‖_{k,d} ≤ 2^{k+1} C_k ‖f1‖_{k,d} ‖f2‖_{k,d}.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvInequalityReport {
    pub k: u32,
    pub d: usize,
    pub lhs: f64,
    pub bound: f64,
    /// lhs / bound, 0 when both vanish.
    pub ratio: f64,
    pub passed: bool,
}

pub fn conv_inequality_check(
    f1: &GroupoidKernel,
    f2: &GroupoidKernel,
    k: u32,
    d: usize,
    cert: &GrowthCertificate,
) -> Result<ConvInequalityReport> {
    let c = finite_c(cert, k)?;
    let lhs = schwartz_norm(&convolve(f1, f2)?, k, d)?;
    let bound = 2f64.powi(k as i32 + 1) * c * schwartz_norm(f1, k, d)? * schwartz_norm(f2, k, d)?;
    let ratio = if bound > 0.0 { lhs / bound } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(ConvInequalityReport { k, d, lhs, bound, ratio, passed: lhs <= bound * (1.0 + HEADROOM) })
}

/// Fiberwise ℓ² bounds ‖∂^i f‖_{L²(G_x)} ≤ √C_{2k} ‖f‖_{k,d}.
#[derive(Clone, Debug, PartialEq)]
pub struct L2Report {
    pub samples: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub bound: f64,
}

pub fn l2_bound_check(f: &GroupoidKernel, k: u32, d: usize, cert: &GrowthCertificate) -> Result<L2Report> {
    let c = finite_c(cert, 2 * k)?;
    let bound = c.sqrt() * schwartz_norm(f, k, d)?;
    let g = &f.g;
    let mut report = L2Report { samples: 0, violations: 0, worst_ratio: 0.0, bound };
    for i in 0..=d {
        let di = FiberDirection::new(i)?.apply(f);
        for x in 0..g.units().len() {
            let l2 = (0..g.mu_len())
                .filter(|&kk| di.is_valid(x, kk))
                .map(|kk| di.value(x, kk).norm_sqr())
                .sum::<f64>();
            let l2 = (l2 * g.h).sqrt();
            report.samples += 1;
            let ratio = if bound > 0.0 { l2 / bound } else if l2 == 0.0 { 0.0 } else { f64::INFINITY };
            report.worst_ratio = report.worst_ratio.max(ratio);
            if ratio > 1.0 + HEADROOM {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Matrix of left convolution by f on ℓ²(G_x) for the grid unit x.
pub fn regular_representation(f: &GroupoidKernel, x: usize) -> Op {
    let g = &f.g;
    let v = g.units()[x];
    let fiber: Vec<usize> = (0..g.mu_len()).filter(|&k| g.in_fiber(v, k)).collect();
    let half = (g.mu_len() / 2) as isize;
    let sources: Vec<f64> = fiber.iter().map(|&k| g.range_of(v, g.mu_at(k))).collect();
    Op::from_fn(fiber.len(), |a, b| {
        let idx = fiber[a] as isize - fiber[b] as isize + half;
        f.interp(sources[b], idx) * g.h
    })
}

/// Nonzero entries of the regular representation, stored by column.
fn representation_columns(f: &GroupoidKernel, x: usize) -> Vec<Vec<(usize, C64)>> {
    let g = &f.g;
    let v = g.units()[x];
    let fiber: Vec<usize> = (0..g.mu_len()).filter(|&k| g.in_fiber(v, k)).collect();
    let half = (g.mu_len() / 2) as isize;
    fiber
        .iter()
        .map(|&kb| {
            let source = g.range_of(v, g.mu_at(kb));
            fiber
                .iter()
                .enumerate()
                .filter_map(|(a, &ka)| {
                    let z = f.interp(source, ka as isize - kb as isize + half) * g.h;
                    (z != ZERO).then_some((a, z))
                })
                .collect()
        })
        .collect()
}

/// Max over the listed grid units of ‖λ_x(f)‖, a finite proxy for the
/// reduced C*-norm. Each norm is a power-iteration lower estimate.
pub fn reduced_norm_estimate(f: &GroupoidKernel, units: &[usize]) -> Result<f64> {
    let count = f.g.units().len();
    if let Some(&bad) = units.iter().find(|&&x| x >= count) {
        return Err(Error::InvalidArgument(format!("unit index {bad} out of range")));
    }
    let norms: Vec<f64> = units
        .par_iter()
        .map(|&x| {
            let cols = representation_columns(f, x);
            let dim = cols.len();
            let apply = |xv: &[C64]| {
                let mut y = vec![ZERO; dim];
                for (col, &xb) in cols.iter().zip(xv) {
                    for &(a, z) in col {
                        y[a] += z * xb;
                    }
                }
                y
            };
            let apply_adjoint = |yv: &[C64]| {
                cols.iter().map(|col| col.iter().map(|&(a, z)| z.conj() * yv[a]).sum()).collect()
            };
            op_norm_estimate_with(dim, apply, apply_adjoint)
        })
        .collect();
    Ok(norms.into_iter().fold(0.0, f64::max))
}

/// Reduced-norm estimate against λ_k ‖f‖_{k,d}, λ_k = 2^{k+1} C_k.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedNormReport {
    pub estimate: f64,
    pub bound: f64,
    pub young: f64,
    pub passed: bool,
}

pub fn reduced_norm_check(
    f: &GroupoidKernel,
    k: u32,
    d: usize,
    cert: &GrowthCertificate,
    units: &[usize],
) -> Result<ReducedNormReport> {
    let c = finite_c(cert, k)?;
    let estimate = reduced_norm_estimate(f, units)?;
    let bound = 2f64.powi(k as i32 + 1) * c * schwartz_norm(f, k, d)?;
    Ok(ReducedNormReport { estimate, bound, young: f.i_norm(), passed: estimate <= bound * (1.0 + HEADROOM) })
}

/// Running roots ‖fⁿ‖^{1/n} for two weights and the sandwich f*h*f.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusReport {
    /// Factor applied to f before taking powers.
    pub rescale: f64,
    pub seq_k: Vec<f64>,
    pub seq_l: Vec<f64>,
    /// |s_k − s_l| / max(s_k, s_l) at the last power.
    pub gap: f64,
    pub sandwich_norm: f64,
    pub sandwich_bound: f64,
    pub passed: bool,
}

/// Compares lim ‖fⁿ‖_{k,d}^{1/n} with lim ‖fⁿ‖_{l,d}^{1/n} and measures the
/// sandwich f*h*f for the slowly decaying h = (1+|μ|)^{−1} cut at L/2.
pub fn spectral_radius_norms_check(
    f: &GroupoidKernel,
    k: u32,
    l: u32,
    d: usize,
    powers: usize,
    cert: &GrowthCertificate,
) -> Result<RadiusReport> {
    if l < k || powers == 0 {
        return Err(Error::InvalidArgument("need l >= k and at least one power".into()));
    }
    let c2k = finite_c(cert, 2 * k)?;
    let est = reduced_norm_estimate(f, &[0])?;
    if est == 0.0 {
        return Ok(RadiusReport {
            rescale: 1.0,
            seq_k: vec![0.0; powers],
            seq_l: vec![0.0; powers],
            gap: 0.0,
            sandwich_norm: 0.0,
            sandwich_bound: 0.0,
            passed: true,
        });
    }
    let rescale = 0.9 / est;
    let base = f.scale(C64::new(rescale, 0.0));
    let mut seq_k = Vec::with_capacity(powers);
    let mut seq_l = Vec::with_capacity(powers);
    let mut p = base.clone();
    for n in 1..=powers {
        if n > 1 {
            p = convolve(&p, &base)?;
        }
        let nk = schwartz_norm(&p, k, d)?;
        let nl = schwartz_norm(&p, l, d)?;
        if !nk.is_finite() || !nl.is_finite() {
            return Err(Error::Overflow { power: n });
        }
        seq_k.push(nk.powf(1.0 / n as f64));
        seq_l.push(nl.powf(1.0 / n as f64));
    }
    let (a, b) = (seq_k[powers - 1], seq_l[powers - 1]);
    let gap = if a.max(b) > 0.0 { (a - b).abs() / a.max(b) } else { 0.0 };

    let g = &f.g;
    let cut = g.l / 2.0;
    let slow = GroupoidKernel::from_profile(g, |mu| {
        if mu.abs() <= cut + 1e-12 {
            C64::new(1.0 / (1.0 + mu.abs()), 0.0)
        } else {
            ZERO
        }
    });
    let sandwich = convolve(&convolve(f, &slow)?, f)?;
    let sandwich_norm = schwartz_norm(&sandwich, 0, d)?;
    let fk = schwartz_norm(f, k, d)?;
    let sandwich_bound = c2k * fk * fk * slow.i_norm();
    let passed = gap <= HEADROOM
        && sandwich_norm.is_finite()
        && sandwich_norm <= sandwich_bound * (1.0 + HEADROOM);
    Ok(RadiusReport { rescale, seq_k, seq_l, gap, sandwich_norm, sandwich_bound, passed })
}

/// Toeplitz matrix F_{ij} = f(0, μ_i − μ_j) h of f on the boundary fiber.
pub fn boundary_matrix(f: &GroupoidKernel) -> Op {
    regular_representation(f, 0)
}

/// Kernel of func(F) on the boundary fiber and its weighted decay.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloReport {
    /// (μ, K(μ)) read off the center column of func(F).
    pub kernel: Vec<(f64, C64)>,
    /// (k, sup |K|(1+|μ|)^k) over entries above the noise floor.
    pub decay: Vec<(u32, f64)>,
    pub noise_floor: f64,
    pub cap: f64,
    pub passed: bool,
}

pub fn holo_stability_demo(f: &GroupoidKernel, func: &HoloFn, gamma: &Contour) -> Result<HoloReport> {
    if func.eval(ZERO).norm() > 1e-12 {
        return Err(Error::InvalidArgument("func must vanish at 0".into()));
    }
    let g = &f.g;
    let big_f = boundary_matrix(f);
    let center = g.mu_len() / 2;
    let column = cauchy_calc_column(&big_f, func, gamma, center)?;
    let kernel: Vec<(f64, C64)> = column
        .iter()
        .enumerate()
        .map(|(i, &z)| (g.mu_at(i), z / g.h))
        .collect();
    let sup = kernel.iter().map(|(_, z)| z.norm()).fold(0.0, f64::max);
    let noise_floor = 1e-12 * sup;
    let cap = 1e6 * sup;
    let decay: Vec<(u32, f64)> = (0..=6u32)
        .map(|k| {
            let s = kernel
                .iter()
                .filter(|(_, z)| z.norm() > noise_floor)
                .map(|(mu, z)| z.norm() * (1.0 + mu.abs()).powi(k as i32))
                .fold(0.0, f64::max);
            (k, s)
        })
        .collect();
    let passed = decay.iter().all(|&(_, s)| s.is_finite() && s <= cap);
    Ok(HoloReport { kernel, decay, noise_floor, cap, passed })
}
