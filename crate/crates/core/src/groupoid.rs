//! Desk-scale models of the b-groupoid and the cₙ-groupoids over X = [0,1]:
//! coordinate changes, defining relations, composition, Haar fibers and
//! length functions with growth certificates.
//!
//! A cₙ-arrow is a triple (u, v, μ) with range u, source v and
//! μ ρ(u)ⁿ ρ(v)ⁿ = ρ(u)ⁿ − ρ(v)ⁿ. Over the boundary point 0 the fiber is a
//! whole copy of ℝ, elsewhere μ determines u.

use std::f64::consts::E;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;

const INV_E: f64 = 1.0 / E;

/// Boundary defining functions on [0,1].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryFn {
    /// ρ(x) = x.
    GlobalX,
    /// ρ(x) = e·x on [0, 1/e), ρ = 1 on [1/e, 1].
    CollarPiecewise,
}

impl BoundaryFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            BoundaryFn::GlobalX => x,
            BoundaryFn::CollarPiecewise => {
                if x < INV_E {
                    E * x
                } else {
                    1.0
                }
            }
        }
    }
}

fn check_unit_interval(function: &'static str, t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::DomainError { function, value: t })
    }
}

/// Cubic Hermite bridge on [1/e, 1] from (1/e, 1/e) with slope 1/n to
/// (1, 1) with slope 1. The secant slope is 1, so the Fritsch–Carlson
/// condition α² + β² ≤ 9 holds for every n ≥ 1 and the bridge is monotone.
fn bridge(n: u32, t: f64) -> f64 {
    let width = 1.0 - INV_E;
    let s = (t - INV_E) / width;
    let (m0, m1) = (1.0 / n as f64, 1.0);
    let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
    let h10 = s.powi(3) - 2.0 * s * s + s;
    let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
    let h11 = s.powi(3) - s * s;
    h00 * INV_E + h10 * width * m0 + h01 + h11 * width * m1
}

/// τₙ on [0,1]: (1/e)(−log t)^{−1/n} near 0, the identity at 1, and a
/// monotone C¹ bridge in between.
pub fn tau(n: u32, t: f64) -> Result<f64> {
    check_unit_interval("tau", t)?;
    if n == 0 {
        return Err(Error::InvalidArgument("tau needs n >= 1".into()));
    }
    Ok(if t == 0.0 {
        0.0
    } else if t < INV_E {
        INV_E * (-t.ln()).powf(-1.0 / n as f64)
    } else if t >= 1.0 {
        t
    } else {
        bridge(n, t)
    })
}

pub fn tau_inv(n: u32, s: f64) -> Result<f64> {
    check_unit_interval("tau_inv", s)?;
    if n == 0 {
        return Err(Error::InvalidArgument("tau needs n >= 1".into()));
    }
    Ok(if s == 0.0 {
        0.0
    } else if s < INV_E {
        (-(E * s).powi(-(n as i32))).exp()
    } else if s >= 1.0 {
        s
    } else {
        let (mut lo, mut hi) = (INV_E, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if bridge(n, mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        0.5 * (lo + hi)
    })
}

/// fₙ(x) = x^{1−n}/(1−n) + x, the coordinate in which the flow of
/// xⁿ/(1+xⁿ) ∂_x is translation.
pub fn f_map(n: u32, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("f_n needs n >= 2, got {n}")));
    }
    if !(x > 0.0) {
        return Err(Error::DomainError { function: "f_map", value: x });
    }
    Ok(x.powi(1 - n as i32) / (1.0 - n as f64) + x)
}

/// Inverse of fₙ by Newton steps safeguarded with bisection.
pub fn f_inv(n: u32, s: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("f_n needs n >= 2, got {n}")));
    }
    if !s.is_finite() {
        return Err(Error::DomainError { function: "f_inv", value: s });
    }
    let f = |x: f64| x.powi(1 - n as i32) / (1.0 - n as f64) + x;
    let df = |x: f64| x.powi(-(n as i32)) + 1.0;
    let mut hi = (s + 1.0).max(1.0);
    let mut lo = 1.0;
    while f(lo) >= s {
        lo *= 0.5;
        if lo == 0.0 {
            return Err(Error::DomainError { function: "f_inv", value: s });
        }
    }
    let mut x = if f(hi) - s < s - f(lo) { hi } else { lo };
    for _ in 0..300 {
        let fx = f(x) - s;
        if fx == 0.0 {
            return Ok(x);
        }
        if fx > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - fx / df(x);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NonConvergence { what: "f_inv", iterations: 300 })
}

/// Arrow of Γ₁ (b-groupoid): ρ(x) = λ ρ(y).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BArrow {
    pub x: f64,
    pub y: f64,
    pub lambda: f64,
}

/// Arrow (u, v, μ) of a cₙ-groupoid: range u, source v.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arrow {
    pub u: f64,
    pub v: f64,
    pub mu: f64,
}

impl Arrow {
    pub fn unit(v: f64) -> Self {
        Arrow { u: v, v, mu: 0.0 }
    }

    pub fn is_boundary(&self) -> bool {
        self.u == 0.0 && self.v == 0.0
    }

    pub fn inv(&self) -> Self {
        Arrow { u: self.v, v: self.u, mu: -self.mu }
    }
}

/// |ρ(x) − λρ(y)|.
pub fn b_relation_residual(rho: BoundaryFn, g: &BArrow) -> f64 {
    (rho.eval(g.x) - g.lambda * rho.eval(g.y)).abs()
}

/// |μρ(u)ⁿρ(v)ⁿ − (ρ(u)ⁿ − ρ(v)ⁿ)|.
pub fn relation_residual_with(rho: BoundaryFn, n: u32, g: &Arrow) -> f64 {
    let ru = rho.eval(g.u).powi(n as i32);
    let rv = rho.eval(g.v).powi(n as i32);
    (g.mu * ru * rv - (ru - rv)).abs()
}

/// Θ_{n+1}: Γ₁ → Γ_{n+1} for the collar boundary function, built from τₙ.
pub fn theta(n_plus_1: u32, g: &BArrow) -> Result<Arrow> {
    if n_plus_1 < 2 {
        return Err(Error::InvalidArgument("theta maps into Γ_{n+1} with n >= 1".into()));
    }
    let n = n_plus_1 - 1;
    let rho = BoundaryFn::CollarPiecewise;
    if !(g.lambda > 0.0) {
        return Err(Error::RelationViolated { residual: f64::INFINITY });
    }
    let residual = b_relation_residual(rho, g);
    if residual > 1e-12 {
        return Err(Error::RelationViolated { residual });
    }
    let chart = |t: f64| -> Result<f64> { if t < INV_E { tau(n, t) } else { Ok(t) } };
    Ok(Arrow { u: chart(g.x)?, v: chart(g.y)?, mu: g.lambda.ln() })
}

pub fn theta_inv(n_plus_1: u32, g: &Arrow) -> Result<BArrow> {
    if n_plus_1 < 2 {
        return Err(Error::InvalidArgument("theta maps into Γ_{n+1} with n >= 1".into()));
    }
    let n = n_plus_1 - 1;
    let chart = |s: f64| -> Result<f64> { if s < INV_E { tau_inv(n, s) } else { Ok(s) } };
    Ok(BArrow { x: chart(g.u)?, y: chart(g.v)?, lambda: g.mu.exp() })
}

/// Discretized Γ_{n+1}([0,1]) with ρ(x) = x: an ascending unit grid with
/// trapezoid weights and uniform μ-grids of step h truncated at |μ| ≤ L.
///
/// Two unit grids are available. The uniform grid i/(count−1) leaves fiber
/// caps and intermediate units off the grids, so interior convolution needs
/// interpolation. The aligned grid ρ(v)^{−n} = 1 + m h (m = 0..=M, plus the
/// boundary point) keeps every arrow between grid units on the μ-grid; its
/// interior fibers are restricted to arrows ending at grid units, which makes
/// the interior an exact finite pair groupoid.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGroupoid {
    pub n: u32,
    pub rho: BoundaryFn,
    pub h: f64,
    pub l: f64,
    units: Vec<f64>,
    unit_weights: Vec<f64>,
    half: usize,
    aligned_rows: Option<usize>,
}

impl ModelGroupoid {
    pub fn new(n: u32, h: f64, l: f64, unit_count: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("calculus index must be >= 1".into()));
        }
        if !(h > 0.0 && l > 0.0 && h < l) {
            return Err(Error::InvalidArgument(format!("need 0 < h < L, got h={h}, L={l}")));
        }
        if unit_count < 2 {
            return Err(Error::InvalidArgument("need at least two units".into()));
        }
        let half = (l / h).round() as usize;
        if ((half as f64) * h - l).abs() > 1e-9 * l {
            return Err(Error::InvalidArgument(format!("L={l} is not a multiple of h={h}")));
        }
        let step = 1.0 / (unit_count - 1) as f64;
        let units: Vec<f64> = (0..unit_count).map(|i| i as f64 * step).collect();
        let unit_weights = trapezoid_weights(&units);
        Ok(ModelGroupoid { n, rho: BoundaryFn::GlobalX, h, l, units, unit_weights, half, aligned_rows: None })
    }

    /// Aligned unit grid: 0 and the M + 1 units with ρ(v)^{−n} = 1 + m h.
    /// Needs M h ≤ L so that every interior arrow fits in the window.
    pub fn aligned(n: u32, h: f64, l: f64, rows: usize) -> Result<Self> {
        let mut g = Self::new(n, h, l, 2)?;
        if rows == 0 || rows as f64 * h > l * (1.0 + 1e-12) {
            return Err(Error::InvalidArgument(format!("aligned grid needs 1 <= M <= L/h, got M={rows}")));
        }
        let mut units = vec![0.0];
        units.extend((0..=rows).rev().map(|m| (1.0 + m as f64 * h).powf(-1.0 / n as f64)));
        *units.last_mut().expect("nonempty") = 1.0;
        g.unit_weights = trapezoid_weights(&units);
        g.units = units;
        g.aligned_rows = Some(rows);
        Ok(g)
    }

    /// Row count M of an aligned grid.
    pub fn aligned_rows(&self) -> Option<usize> {
        self.aligned_rows
    }

    /// n = 1, h = 0.05, L = 20, 21 units.
    pub fn default_model() -> Self {
        Self::new(1, 0.05, 20.0, 21).expect("default groupoid parameters")
    }

    pub fn units(&self) -> &[f64] {
        &self.units
    }

    pub fn unit_weights(&self) -> &[f64] {
        &self.unit_weights
    }

    /// Number of μ-grid points on the full window [−L, L].
    pub fn mu_len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn mu_at(&self, k: usize) -> f64 {
        (k as f64 - self.half as f64) * self.h
    }

    /// Index of μ on the grid, if it is (within rounding) a grid point.
    pub fn mu_index(&self, mu: f64) -> Option<usize> {
        let k = (mu / self.h).round();
        if (k * self.h - mu).abs() > 1e-9 * self.h || k.abs() > self.half as f64 {
            return None;
        }
        Some((k as i64 + self.half as i64) as usize)
    }

    /// Largest admissible μ in the fiber over v (u ≤ 1), or +∞ at v = 0.
    pub fn mu_cap(&self, v: f64) -> f64 {
        if v == 0.0 {
            f64::INFINITY
        } else {
            self.rho.eval(v).powi(-(self.n as i32)) - 1.0
        }
    }

    /// Whether grid point k lies in the fiber over v.
    pub fn in_fiber(&self, v: f64, k: usize) -> bool {
        let mu = self.mu_at(k);
        let cap = self.mu_cap(v);
        if mu > cap + 1e-12 {
            return false;
        }
        match self.aligned_rows {
            // The range must be a grid unit: its cap cap(v) − μ is at most M h.
            Some(rows) if v > 0.0 => cap - mu <= rows as f64 * self.h + 1e-9 * self.h,
            _ => true,
        }
    }

    /// Range of the arrow with source v and coordinate μ.
    pub fn range_of(&self, v: f64, mu: f64) -> f64 {
        if v == 0.0 {
            return 0.0;
        }
        let n = self.n as f64;
        (self.rho.eval(v).powf(-n) - mu).powf(-1.0 / n)
    }

    /// Arrow from v with coordinate μ.
    pub fn arrow(&self, v: f64, mu: f64) -> Arrow {
        Arrow { u: self.range_of(v, mu), v, mu }
    }

    /// Arrow between two interior units.
    pub fn arrow_between(&self, u: f64, v: f64) -> Arrow {
        let n = self.n as i32;
        Arrow { u, v, mu: self.rho.eval(v).powi(-n) - self.rho.eval(u).powi(-n) }
    }

    pub fn relation_residual(&self, g: &Arrow) -> f64 {
        relation_residual_with(self.rho, self.n, g)
    }

    pub fn compose(&self, g1: &Arrow, g2: &Arrow) -> Result<Arrow> {
        if (g1.v - g2.u).abs() > self.h / 2.0 {
            return Err(Error::NotComposable { source_unit: g1.v, range_unit: g2.u });
        }
        Ok(Arrow { u: g1.u, v: g2.v, mu: g1.mu + g2.mu })
    }

    pub fn inv(&self, g: &Arrow) -> Arrow {
        g.inv()
    }

    /// Haar fiber over v: grid arrows with weight h.
    pub fn haar_fiber(&self, v: f64) -> Vec<(Arrow, f64)> {
        (0..self.mu_len())
            .filter(|&k| self.in_fiber(v, k))
            .map(|k| (self.arrow(v, self.mu_at(k)), self.h))
            .collect()
    }

    /// Length function φ = |μ|.
    pub fn length(&self, g: &Arrow) -> f64 {
        g.mu.abs()
    }
}

fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { x[i] - x[i - 1] } else { 0.0 };
            let right = if i + 1 < n { x[i + 1] - x[i] } else { 0.0 };
            (left + right) / 2.0
        })
        .collect()
}

/// |log λ| on Γ₁.
pub fn b_length(g: &BArrow) -> f64 {
    g.lambda.ln().abs()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GrowthSample {
    pub unit: f64,
    pub r: f64,
    pub measure: f64,
    pub bound: f64,
}

/// Polynomial-growth constants of the length function on the model.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthCertificate {
    pub c: f64,
    /// Growth degree N.
    pub degree: u32,
    /// (k, C_k), C_k = sup_x ∫(1+φ)^{−k} dμ_x; infinite for k ≤ N.
    pub c_table: Vec<(u32, f64)>,
    /// Smallest tabulated k with finite C_k.
    pub k0: Option<u32>,
    /// Least-squares slope of the boundary measure against r^N.
    pub c_fit: f64,
    pub samples: Vec<GrowthSample>,
}

impl GrowthCertificate {
    pub fn c_k(&self, k: u32) -> Option<f64> {
        self.c_table.iter().find(|(kk, _)| *kk == k).map(|&(_, c)| c)
    }

    /// μ_x(φ ≤ r) ≤ c(r^N + 1) at every recorded sample.
    pub fn holds(&self) -> bool {
        self.samples.iter().all(|s| s.measure <= s.bound)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LengthReport {
    pub pairs: usize,
    pub subadditivity_violations: usize,
    pub symmetry_violations: usize,
    /// Sublevel sets are finite and nested in every fiber.
    pub proper: bool,
    pub certificate: GrowthCertificate,
}

impl ModelGroupoid {
    /// μ_x(φ ≤ r) on the grid.
    fn sublevel_measure(&self, v: f64, r: f64) -> f64 {
        (0..self.mu_len()).filter(|&k| self.in_fiber(v, k) && self.mu_at(k).abs() <= r + 1e-12).count() as f64 * self.h
    }

    /// Random composable pair: g2 from a grid unit, g1 from the range of g2.
    pub fn sample_composable<R: Rng + ?Sized>(&self, rng: &mut R) -> (Arrow, Arrow) {
        let pick_mu = |rng: &mut R, v: f64| -> f64 {
            loop {
                let k = rng.gen_range(0..self.mu_len());
                if self.in_fiber(v, k) {
                    return self.mu_at(k);
                }
            }
        };
        let w = self.units[rng.gen_range(0..self.units.len())];
        let mu2 = pick_mu(rng, w);
        let g2 = self.arrow(w, mu2);
        let mu1 = pick_mu(rng, g2.u);
        let g1 = self.arrow(g2.u, mu1);
        (g1, g2)
    }

    pub fn growth_certificate(&self, k_max: u32) -> GrowthCertificate {
        // Sublevel measures on r = 1..L at every unit.
        let radii: Vec<f64> = (0..=(self.l.floor() as usize)).map(|r| r as f64).collect();
        let boundary: Vec<(f64, f64)> = radii.iter().filter(|&&r| r >= 1.0).map(|&r| (r, self.sublevel_measure(0.0, r))).collect();
        let (lx, ly): (Vec<f64>, Vec<f64>) = boundary.iter().map(|&(r, m)| (r.ln(), m.ln())).unzip();
        let slope = linear_fit(&lx, &ly).0;
        let degree = slope.round().max(0.0) as u32;
        let rn = |r: f64| r.powi(degree as i32);
        let c_fit = boundary.iter().map(|&(r, m)| m * rn(r)).sum::<f64>() / boundary.iter().map(|&(r, _)| rn(r) * rn(r)).sum::<f64>();
        let mut c_cert: f64 = 0.0;
        let mut raw = Vec::new();
        for &v in &self.units {
            for &r in &radii {
                let m = self.sublevel_measure(v, r);
                c_cert = c_cert.max(m / (rn(r) + 1.0));
                raw.push((v, r, m));
            }
        }
        let c = c_fit.max(c_cert);
        let samples = raw.into_iter().map(|(unit, r, measure)| GrowthSample { unit, r, measure, bound: c * (rn(r) + 1.0) }).collect();

        let c_table: Vec<(u32, f64)> = (0..=k_max)
            .map(|k| {
                if k <= degree {
                    return (k, f64::INFINITY);
                }
                let grid = self
                    .units
                    .iter()
                    .map(|&v| {
                        (0..self.mu_len())
                            .filter(|&i| self.in_fiber(v, i))
                            .map(|i| (1.0 + self.mu_at(i).abs()).powi(-(k as i32)) * self.h)
                            .sum::<f64>()
                    })
                    .fold(0.0, f64::max);
                // Beyond the window, the growth bound dμ ≤ cN r^{N−1} dr gives
                // the tail c N ∫_L^∞ r^{N−1} (1+r)^{−k} dr.
                (k, grid + c * degree as f64 * tail_integral(degree, k, self.l))
            })
            .collect();
        let k0 = c_table.iter().find(|(_, v)| v.is_finite()).map(|&(k, _)| k);
        GrowthCertificate { c, degree, c_table, k0, c_fit, samples }
    }

    pub fn length_axiom_suite(&self, samples: usize, seed: u64) -> LengthReport {
        let mut rng = rng::seeded(rng::derive_seed(seed, "length-axioms"));
        let mut sub = 0;
        let mut sym = 0;
        for _ in 0..samples {
            let (g1, g2) = if rng.gen_bool(0.1) {
                let a = Arrow { u: 0.0, v: 0.0, mu: self.mu_at(rng.gen_range(0..self.mu_len())) };
                let b = Arrow { u: 0.0, v: 0.0, mu: self.mu_at(rng.gen_range(0..self.mu_len())) };
                (a, b)
            } else {
                self.sample_composable(&mut rng)
            };
            let g = self.compose(&g1, &g2).expect("sampled pairs are composable");
            if self.length(&g) > self.length(&g1) + self.length(&g2) {
                sub += 1;
            }
            if self.length(&g1.inv()) != self.length(&g1) {
                sym += 1;
            }
        }
        let proper = self.units.iter().all(|&v| {
            let counts: Vec<f64> = (0..=(self.l.ceil() as usize)).map(|r| self.sublevel_measure(v, r as f64)).collect();
            counts.windows(2).all(|w| w[0] <= w[1]) && counts.iter().all(|c| c.is_finite())
        });
        LengthReport {
            pairs: samples,
            subadditivity_violations: sub,
            symmetry_violations: sym,
            proper,
            certificate: self.growth_certificate(6),
        }
    }
}

/// N ∫_L^∞ r^{N−1}(1+r)^{−k} dr for k > N, by the substitution s = 1/(1+r)
/// and composite Simpson on the bounded interval.
fn tail_integral(degree: u32, k: u32, l: f64) -> f64 {
    if degree == 0 {
        return 0.0;
    }
    // r = 1/s − 1, dr = −ds/s², integrand (1 − s)^{N−1} s^{k−1−N}.
    let upper = 1.0 / (1.0 + l);
    let g = |s: f64| (1.0 - s).powi(degree as i32 - 1) * s.powi(k as i32 - 1 - degree as i32);
    let m = 2000;
    let step = upper / m as f64;
    let mut total = g(0.0) + g(upper);
    for i in 1..m {
        total += g(i as f64 * step) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    degree as f64 * total * step / 3.0
}

/// Ordinary least squares y ≈ a x + b; returns (a, b, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return (0.0, my, 1.0);
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    (slope, my - slope * mx, r2)
}
