//! Local symbols of operator families on an N-point circle, and the
//! symbol estimates that bound them by commutator norms.
//!
//! Functions on the circle live on y_k = 2πk/N with measure Δy = 2π/N.
//! Frequencies run over η ∈ {−N/2+1, …, N/2}. The chart is the circle minus
//! y = 0, so cutoffs must vanish there.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::opcore::{op_norm, BaseNorm, Op, C64};
use crate::psistar::{scale_norm_q, DerivationSet};
use crate::rng::uniform_complex;

pub fn circle_nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

pub fn frequencies(n: usize) -> Vec<i64> {
    let half = (n / 2) as i64;
    (-half + 1..=half).collect()
}

/// ⟨η⟩ = (1 + η²)^{1/2}.
pub fn japanese(eta: i64) -> f64 {
    (1.0 + (eta * eta) as f64).sqrt()
}

/// Multiplication by f(y).
pub fn multiplication_op(n: usize, f: impl Fn(f64) -> C64) -> Op {
    let y = circle_nodes(n);
    Op::diag(&y.iter().map(|&v| f(v)).collect::<Vec<_>>())
}

/// Circulant operator acting on e^{iηy} by m(η).
pub fn fourier_multiplier_op(n: usize, m: impl Fn(i64) -> C64) -> Op {
    let etas = frequencies(n);
    let mult: Vec<C64> = etas.iter().map(|&e| m(e)).collect();
    // Entry (j, k) depends on j − k only.
    let column: Vec<C64> = (0..n)
        .map(|d| {
            etas.iter()
                .zip(&mult)
                .map(|(&e, &c)| c * C64::from_polar(1.0, 2.0 * PI * (e * d as i64) as f64 / n as f64))
                .sum::<C64>()
                / n as f64
        })
        .collect();
    Op::from_fn(n, |j, k| column[(j + n - k) % n])
}

/// Spectral −i∂_y: multiplier η.
pub fn derivative_op(n: usize) -> Op {
    fourier_multiplier_op(n, |e| C64::new(e as f64, 0.0))
}

/// Multiplication by cos y and sin y, and spectral −i∂_y. These stand in
/// for multiplication by y, which is not periodic.
pub fn torus_generators(n: usize) -> DerivationSet {
    DerivationSet::new(vec![
        multiplication_op(n, |y| C64::new(y.cos(), 0.0)),
        multiplication_op(n, |y| C64::new(y.sin(), 0.0)),
        derivative_op(n),
    ])
    .expect("torus generators are Hermitian")
}

/// Operators â(x) on the N-point circle, one per sampled unit x.
#[derive(Clone, Debug)]
pub struct TorusOperatorFamily {
    n: usize,
    units: Vec<f64>,
    ops: Vec<Op>,
}

impl TorusOperatorFamily {
    pub fn new(units: Vec<f64>, ops: Vec<Op>) -> Result<Self> {
        if units.is_empty() || units.len() != ops.len() {
            return Err(Error::DimensionMismatch(format!("{} units for {} operators", units.len(), ops.len())));
        }
        let n = ops[0].dim();
        if n < 4 || n % 2 != 0 || ops.iter().any(|a| a.dim() != n) {
            return Err(Error::DimensionMismatch("operators need a common even size N >= 4".into()));
        }
        Ok(TorusOperatorFamily { n, units, ops })
    }

    pub fn from_fn(units: &[f64], mut op: impl FnMut(f64) -> Op) -> Result<Self> {
        Self::new(units.to_vec(), units.iter().map(|&x| op(x)).collect())
    }

    /// 1 + 2 random samples of â(x) = m_x(y)·C_x + R_x: a multiplication, a
    /// decaying Fourier multiplier, and a small dense perturbation.
    pub fn random<R: Rng + ?Sized>(n: usize, unit_count: usize, rng: &mut R) -> Result<Self> {
        let units: Vec<f64> = (0..unit_count).map(|k| k as f64 / unit_count.max(1) as f64).collect();
        Self::from_fn(&units, |_| {
            let (a, b) = (uniform_complex(rng), uniform_complex(rng));
            let decay = rng.gen_range(0.5..1.5);
            let mult = multiplication_op(n, |y| C64::new(1.0, 0.0) + a * y.cos() + b * y.sin());
            let fm = fourier_multiplier_op(n, |e| C64::new(japanese(e).powf(-decay), 0.0));
            let noise = Op::from_fn(n, |_, _| uniform_complex(rng)).scale_real(0.1 / n as f64);
            &mult.matmul(&fm) + &noise
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn units(&self) -> &[f64] {
        &self.units
    }

    pub fn op(&self, k: usize) -> &Op {
        &self.ops[k]
    }

    pub fn sup_op_norm(&self) -> f64 {
        self.ops.par_iter().map(op_norm).reduce(|| 0.0, f64::max)
    }
}

/// Cutoffs φ₀(x, ·), ψ₀(x, ·) sampled on the circle for every unit.
#[derive(Clone, Debug)]
pub struct Cutoffs {
    phi: Vec<Vec<f64>>,
    psi: Vec<Vec<f64>>,
}

impl Cutoffs {
    pub fn from_fn(family: &TorusOperatorFamily, phi: impl Fn(f64, f64) -> f64, psi: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let y = circle_nodes(family.n);
        let sample = |f: &dyn Fn(f64, f64) -> f64| -> Vec<Vec<f64>> {
            family.units.iter().map(|&x| y.iter().map(|&v| f(x, v)).collect()).collect()
        };
        let (phi, psi) = (sample(&phi), sample(&psi));
        for row in phi.iter().chain(&psi) {
            if row[0].abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!("cutoff is {} at y = 0, outside the chart", row[0])));
            }
        }
        Ok(Cutoffs { phi, psi })
    }

    /// c(φ₀, ψ₀) = ‖ψ₀‖²_∞ ‖φ₀‖²_{L²} at unit k.
    pub fn l2_constant(&self, k: usize) -> f64 {
        let n = self.phi[k].len();
        let sup = self.psi[k].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let l2: f64 = self.phi[k].iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / n as f64;
        sup * sup * l2
    }
}

/// σ(x, y, η) on the circle grid for one unit x.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolTable {
    pub unit: usize,
    pub etas: Vec<i64>,
    /// Row-major in (η, y).
    pub values: Vec<C64>,
}

impl SymbolTable {
    pub fn n(&self) -> usize {
        self.etas.len()
    }

    pub fn at(&self, eta_index: usize, y_index: usize) -> C64 {
        self.values[eta_index * self.n() + y_index]
    }

    /// max |σ(η, y) − σ(η₀, y)| over the table.
    pub fn eta_variation(&self) -> f64 {
        let n = self.n();
        (0..self.values.len()).map(|k| (self.values[k] - self.values[k % n]).norm()).fold(0.0, f64::max)
    }

    /// (Δ_η^β Δ_y^α σ)(η, y) for every η with η + β in range; Δ_y is the
    /// periodic forward difference quotient, Δ_η the forward difference.
    pub fn difference(&self, alpha: usize, beta: usize) -> Vec<Vec<C64>> {
        let n = self.n();
        let dy = 2.0 * PI / n as f64;
        let mut rows: Vec<Vec<C64>> = (0..n).map(|e| self.values[e * n..(e + 1) * n].to_vec()).collect();
        for _ in 0..alpha {
            for row in &mut rows {
                *row = (0..n).map(|k| (row[(k + 1) % n] - row[k]) / dy).collect();
            }
        }
        for _ in 0..beta {
            rows = rows.windows(2).map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect()).collect();
        }
        rows
    }
}

/// σ(x, y, η) = e^{−iyη} ψ₀(x, y) · (â(x)[y′ ↦ φ₀(x, y′) e^{iy′η}])(y).
pub fn local_symbol(family: &TorusOperatorFamily, cutoffs: &Cutoffs, unit: usize) -> Result<SymbolTable> {
    if unit >= family.units.len() {
        return Err(Error::InvalidArgument(format!("unit index {unit} out of range")));
    }
    let n = family.n;
    let y = circle_nodes(n);
    let etas = frequencies(n);
    let (phi, psi) = (&cutoffs.phi[unit], &cutoffs.psi[unit]);
    // Phases e^{i(y_j − y_k)η} from the integer (j − k)η mod N, so the
    // diagonal phase is exactly 1.
    let roots: Vec<C64> = (0..n).map(|r| C64::from_polar(1.0, y[r])).collect();
    let a = &family.ops[unit];
    let rows: Vec<Vec<C64>> = etas
        .par_iter()
        .map(|&e| {
            let e = e.rem_euclid(n as i64) as usize;
            (0..n)
                .map(|k| {
                    let row = a.row(k);
                    let sum: C64 = (0..n)
                        .filter(|&j| phi[j] != 0.0)
                        .map(|j| row[j] * phi[j] * roots[((j + n - k) * e) % n])
                        .sum();
                    sum * psi[k]
                })
                .collect()
        })
        .collect();
    Ok(SymbolTable { unit, etas, values: rows.concat() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct L2Entry {
    pub unit: usize,
    /// sup_η Σ_y |σ|² Δy.
    pub lhs: f64,
    /// c(φ₀, ψ₀)·(sup_x ‖â(x)‖)².
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateEntry {
    pub alpha: usize,
    pub beta: usize,
    /// sup ⟨η⟩^β |Δ_η^β Δ_y^α σ|.
    pub sup: f64,
    /// sup_x q_{α+β}(â(x)) for the torus generators.
    pub q: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymbolReport {
    pub l2: Vec<L2Entry>,
    pub estimates: Vec<EstimateEntry>,
}

impl SymbolReport {
    /// L² entries exceeding the bound by more than 5%.
    pub fn l2_violations(&self) -> usize {
        self.l2.iter().filter(|e| e.lhs > e.bound * 1.05).count()
    }
}

/// The L² estimate per unit, and the difference table against commutator
/// norms of â(x).
pub fn symbol_estimate_suite(
    tables: &[SymbolTable],
    family: &TorusOperatorFamily,
    cutoffs: &Cutoffs,
    alpha_max: usize,
    beta_max: usize,
) -> Result<SymbolReport> {
    if alpha_max > 2 || beta_max > 2 {
        return Err(Error::InvalidArgument(format!("difference orders ({alpha_max}, {beta_max}) exceed 2")));
    }
    let n = family.n;
    let dy = 2.0 * PI / n as f64;
    let sup_norm = family.sup_op_norm();
    let l2 = tables
        .iter()
        .map(|t| {
            let lhs = (0..t.n())
                .map(|e| (0..n).map(|k| t.at(e, k).norm_sqr()).sum::<f64>() * dy)
                .fold(0.0, f64::max);
            L2Entry { unit: t.unit, lhs, bound: cutoffs.l2_constant(t.unit) * sup_norm * sup_norm }
        })
        .collect();

    let gens = torus_generators(n);
    let r_max = alpha_max + beta_max;
    let q: Vec<f64> = (0..=r_max)
        .map(|r| {
            family
                .ops
                .par_iter()
                .map(|a| scale_norm_q(a, r, 0, &gens, &[BaseNorm::Operator]))
                .reduce(|| 0.0, f64::max)
        })
        .collect();
    let mut estimates = Vec::new();
    for alpha in 0..=alpha_max {
        for beta in 0..=beta_max {
            let sup = tables
                .iter()
                .map(|t| {
                    t.difference(alpha, beta)
                        .iter()
                        .enumerate()
                        .map(|(e, row)| japanese(t.etas[e]).powi(beta as i32) * row.iter().fold(0.0f64, |m, z| m.max(z.norm())))
                        .fold(0.0, f64::max)
                })
                .fold(0.0, f64::max);
            let qv = q[alpha + beta];
            let ratio = if qv > 0.0 { sup / qv } else { 0.0 };
            estimates.push(EstimateEntry { alpha, beta, sup, q: qv, ratio });
        }
    }
    Ok(SymbolReport { l2, estimates })
}

/// Smooth test input for the refinement study: â = multiplication by
/// 2 + cos y, with φ₀ = ψ₀ = sin⁴(y/2). The symbol is the trigonometric
/// polynomial g(y) = sin⁸(y/2)(2 + cos y) for every η.
fn refinement_case(n: usize) -> Result<(TorusOperatorFamily, Cutoffs)> {
    let family = TorusOperatorFamily::new(vec![0.0], vec![multiplication_op(n, |y| C64::new(2.0 + y.cos(), 0.0))])?;
    let s = |_: f64, y: f64| (y / 2.0).sin().powi(4);
    let cutoffs = Cutoffs::from_fn(&family, s, s)?;
    Ok((family, cutoffs))
}

/// ∂^α g at y, from g's Fourier coefficients (degree 5, so exact on 16 points).
fn refinement_exact(alpha: usize, y: f64) -> f64 {
    let m = 16;
    let nodes = circle_nodes(m);
    let g: Vec<f64> = nodes.iter().map(|&v| (v / 2.0).sin().powi(8) * (2.0 + v.cos())).collect();
    let mut total = C64::new(0.0, 0.0);
    for k in -5i64..=5 {
        let c: C64 = nodes.iter().zip(&g).map(|(&v, &gv)| C64::from_polar(gv, -(k as f64) * v)).sum::<C64>() / m as f64;
        total += c * C64::new(0.0, k as f64).powu(alpha as u32) * C64::from_polar(1.0, k as f64 * y);
    }
    total.re
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementReport {
    pub sizes: Vec<usize>,
    /// (α, max over the grid of |Δ_y^α σ − ∂_y^α σ| per size).
    pub errors: Vec<(usize, Vec<f64>)>,
}

impl RefinementReport {
    /// Successive error ratios e(N)/e(2N).
    pub fn ratios(&self) -> Vec<(usize, Vec<f64>)> {
        self.errors.iter().map(|(a, e)| (*a, e.windows(2).map(|w| w[0] / w[1]).collect())).collect()
    }
}

/// Error of the difference table against exact derivatives of a smooth
/// symbol, for each circle size.
pub fn table_refinement(sizes: &[usize]) -> Result<RefinementReport> {
    let mut errors: Vec<(usize, Vec<f64>)> = (1..=2).map(|a| (a, Vec::new())).collect();
    for &n in sizes {
        let (family, cutoffs) = refinement_case(n)?;
        let table = local_symbol(&family, &cutoffs, 0)?;
        let y = circle_nodes(n);
        for (alpha, errs) in &mut errors {
            let d = table.difference(*alpha, 0);
            let err = d
                .iter()
                .flat_map(|row| row.iter().enumerate().map(|(k, z)| (z - refinement_exact(*alpha, y[k])).norm()))
                .fold(0.0, f64::max);
            errs.push(err);
        }
    }
    Ok(RefinementReport { sizes: sizes.to_vec(), errors })
}
