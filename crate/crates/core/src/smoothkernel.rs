//! The flow of Xₙ = xⁿ/(1+xⁿ) ∂_x near a boundary, the algebra 𝒜 of
//! matrix-valued rapid-decay functions on a half-line grid, the twisted
//! convolution algebra S(ℝ,𝒜) with its seminorms ‖·‖_{n,i,j}, and the
//! power-counting characterization of the residual ideal.
//!
//! The boundary ∂M is modeled by m points, so values are m×m matrices. The
//! x-variable lives on a log-spaced grid; functions on it are extended by
//! their first value toward x = 0 and by zero beyond X_max.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::groupoid::{f_inv, f_map, linear_fit};
use crate::opcore::{op_norm, Op, C64};
use crate::rng::uniform_complex;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Log-spaced nodes on [x_min, X_max] with trapezoid weights.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfLineGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_min: f64,
    log_step: f64,
}

impl HalfLineGrid {
    pub fn new(x_min: f64, x_max: f64, count: usize) -> Result<Self> {
        if !(x_min > 0.0 && x_min <= 1e-5 && x_max > x_min) || count < 8 {
            return Err(Error::InvalidArgument(format!(
                "half-line grid needs 0 < x_min <= 1e-5 < X_max and count >= 8, got ({x_min}, {x_max}, {count})"
            )));
        }
        let log_min = x_min.ln();
        let log_step = (x_max.ln() - log_min) / (count - 1) as f64;
        let mut nodes: Vec<f64> = (0..count).map(|k| (log_min + k as f64 * log_step).exp()).collect();
        nodes[0] = x_min;
        nodes[count - 1] = x_max;
        let weights = (0..count)
            .map(|k| {
                let left = if k > 0 { nodes[k] - nodes[k - 1] } else { nodes[0] };
                let right = if k + 1 < count { nodes[k + 1] - nodes[k] } else { 0.0 };
                (left + right) / 2.0
            })
            .collect();
        Ok(HalfLineGrid { nodes, weights, log_min, log_step })
    }

    /// 400 nodes on [1e−6, 10].
    pub fn default_grid() -> Self {
        Self::new(1e-6, 10.0, 400).expect("default half-line grid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Every `stride`-th node (always keeping the last one).
    pub fn subsample(&self, stride: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).step_by(stride.max(1)).collect();
        if *idx.last().expect("grid is nonempty") != self.len() - 1 {
            idx.push(self.len() - 1);
        }
        idx
    }

    /// Interpolation stencil at y: six-point Lagrange (quintic) in ln x.
    /// Linear in the data, exact at nodes.
    fn stencil(&self, y: f64) -> Option<(isize, [f64; 6])> {
        let n = self.len();
        if y > self.x_max() * (1.0 + 1e-12) {
            return None;
        }
        if y <= self.nodes[0] {
            let mut w = [0.0; 6];
            w[2] = 1.0;
            return Some((0, w));
        }
        let pos = (y.ln() - self.log_min) / self.log_step;
        let i = (pos.floor() as isize).clamp(0, n as isize - 1);
        let t = (pos - i as f64).clamp(0.0, 1.0);
        let mut w = [0.0; 6];
        if t == 0.0 {
            w[2] = 1.0;
            return Some((i, w));
        }
        for (a, wa) in w.iter_mut().enumerate() {
            let xa = a as f64 - 2.0;
            *wa = (0..6)
                .filter(|&b| b != a)
                .map(|b| {
                    let xb = b as f64 - 2.0;
                    (t - xb) / (xa - xb)
                })
                .product();
        }
        Some((i, w))
    }
}

/// Element of 𝒜: an m×m matrix at every grid node.
#[derive(Clone, Debug)]
pub struct MatrixSchwartz {
    grid: Arc<HalfLineGrid>,
    m: usize,
    values: Vec<C64>,
}

impl MatrixSchwartz {
    pub fn zeros(grid: &Arc<HalfLineGrid>, m: usize) -> Self {
        MatrixSchwartz { grid: Arc::clone(grid), m, values: vec![ZERO; grid.len() * m * m] }
    }

    pub fn from_fn(grid: &Arc<HalfLineGrid>, m: usize, f: impl Fn(f64) -> Op) -> Self {
        let mut values = Vec::with_capacity(grid.len() * m * m);
        for &x in grid.nodes() {
            let a = f(x);
            assert_eq!(a.dim(), m, "matrix function returned the wrong size");
            values.extend_from_slice(a.as_slice());
        }
        MatrixSchwartz { grid: Arc::clone(grid), m, values }
    }

    /// φ(x)·B.
    pub fn separable(grid: &Arc<HalfLineGrid>, phi: impl Fn(f64) -> f64, b: &Op) -> Self {
        Self::from_fn(grid, b.dim(), |x| b.scale_real(phi(x)))
    }

    /// exp(−(fₙ(x) − center)²/(2 width²))·B: a Gaussian in flow coordinates.
    pub fn flow_gaussian(grid: &Arc<HalfLineGrid>, n: u32, center: f64, width: f64, b: &Op) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * b.dim() * b.dim());
        for &x in grid.nodes() {
            let s = f_map(n, x)?;
            let w = (-(s - center).powi(2) / (2.0 * width * width)).exp();
            values.extend(b.as_slice().iter().map(|z| z * w));
        }
        Ok(MatrixSchwartz { grid: Arc::clone(grid), m: b.dim(), values })
    }

    pub fn grid(&self) -> &Arc<HalfLineGrid> {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn at(&self, k: usize) -> Op {
        let mm = self.m * self.m;
        Op::from_vec(self.m, self.values[k * mm..(k + 1) * mm].to_vec()).expect("block has m² entries")
    }

    fn block(&self, k: usize) -> &[C64] {
        let mm = self.m * self.m;
        &self.values[k * mm..(k + 1) * mm]
    }

    fn check(&self, other: &MatrixSchwartz) -> Result<()> {
        if self.m != other.m || !(Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid) {
            return Err(Error::DimensionMismatch("elements live on different grids".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &MatrixSchwartz) -> Result<Self> {
        self.check(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(MatrixSchwartz { grid: Arc::clone(&self.grid), m: self.m, values })
    }

    pub fn scale(&self, c: C64) -> Self {
        MatrixSchwartz { grid: Arc::clone(&self.grid), m: self.m, values: self.values.iter().map(|z| z * c).collect() }
    }

    /// Pointwise multiplication by a scalar function of x.
    pub fn multiply_fn(&self, phi: impl Fn(f64) -> f64) -> Self {
        let mm = self.m * self.m;
        let mut values = self.values.clone();
        for (k, &x) in self.grid.nodes().iter().enumerate() {
            let w = phi(x);
            for z in &mut values[k * mm..(k + 1) * mm] {
                *z *= w;
            }
        }
        MatrixSchwartz { grid: Arc::clone(&self.grid), m: self.m, values }
    }

    /// Pointwise matrix product (ab)(x) = a(x) b(x).
    pub fn mul(&self, other: &MatrixSchwartz) -> Result<Self> {
        self.check(other)?;
        let m = self.m;
        let mut values = vec![ZERO; self.values.len()];
        for k in 0..self.grid.len() {
            block_mul_add(self.block(k), other.block(k), C64::new(1.0, 0.0), &mut values[k * m * m..(k + 1) * m * m], m);
        }
        Ok(MatrixSchwartz { grid: Arc::clone(&self.grid), m, values })
    }

    /// Central differences in x, one-sided at both ends.
    pub fn derivative(&self) -> Self {
        let x = self.grid.nodes();
        let n = x.len();
        let mm = self.m * self.m;
        let mut values = vec![ZERO; self.values.len()];
        for k in 0..n {
            let (lo, hi) = (k.saturating_sub(1), (k + 1).min(n - 1));
            let dx = x[hi] - x[lo];
            for e in 0..mm {
                values[k * mm + e] = (self.values[hi * mm + e] - self.values[lo * mm + e]) / dx;
            }
        }
        MatrixSchwartz { grid: Arc::clone(&self.grid), m: self.m, values }
    }

    /// sup over nodes of (1+x)^p ‖a(x)‖_op.
    pub fn weighted_sup(&self, p: u32) -> f64 {
        self.grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, &x)| (1.0 + x).powi(p as i32) * block_norm(self.block(k), self.m))
            .fold(0.0, f64::max)
    }

    /// ‖a‖_n = Σ_{p+q ≤ n} sup_x (1+x)^p ‖∂^q a(x)‖_op / q!.
    pub fn seminorm(&self, n: u32) -> f64 {
        let mut total = 0.0;
        let mut d = self.clone();
        let mut factorial = 1.0;
        for q in 0..=n {
            if q > 0 {
                d = d.derivative();
                factorial *= q as f64;
            }
            for p in 0..=(n - q) {
                total += d.weighted_sup(p) / factorial;
            }
        }
        total
    }

    pub fn sup_norm(&self) -> f64 {
        self.weighted_sup(0)
    }

    pub fn max_abs_diff(&self, other: &MatrixSchwartz) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    fn apply_stencils(&self, plan: &[Option<(isize, [f64; 6])>]) -> Self {
        let n = self.grid.len() as isize;
        let mm = self.m * self.m;
        let mut values = vec![ZERO; self.values.len()];
        for (k, st) in plan.iter().enumerate() {
            let Some((i, w)) = st else { continue };
            let out = &mut values[k * mm..(k + 1) * mm];
            for (off, &wt) in w.iter().enumerate() {
                if wt == 0.0 {
                    continue;
                }
                let idx = i + off as isize - 2;
                if idx >= n {
                    continue;
                }
                let src = self.block(idx.max(0) as usize);
                for (o, s) in out.iter_mut().zip(src) {
                    *o += s * wt;
                }
            }
        }
        MatrixSchwartz { grid: Arc::clone(&self.grid), m: self.m, values }
    }
}

/// out += c·a·b for m×m row-major blocks.
fn block_mul_add(a: &[C64], b: &[C64], c: C64, out: &mut [C64], m: usize) {
    for i in 0..m {
        for l in 0..m {
            let ail = a[i * m + l] * c;
            if ail == ZERO {
                continue;
            }
            for j in 0..m {
                out[i * m + j] += ail * b[l * m + j];
            }
        }
    }
}

/// Operator norm of an m×m block; closed form for m ≤ 2.
fn block_norm(a: &[C64], m: usize) -> f64 {
    match m {
        1 => a[0].norm(),
        2 => {
            let fro2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            let det = (a[0] * a[3] - a[1] * a[2]).norm();
            let disc = (fro2 * fro2 - 4.0 * det * det).max(0.0).sqrt();
            ((fro2 + disc) / 2.0).sqrt()
        }
        _ => op_norm(&Op::from_vec(m, a.to_vec()).expect("square block")),
    }
}

/// The one-parameter group acting on 𝒜.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    /// Pullback along the flow of Xₙ (n ≥ 2).
    Flow(u32),
    /// Trivial action; the twisted product becomes plain convolution.
    Frozen,
}

/// Flow of Xₙ for time t from x: translation by t in fₙ-coordinates.
pub fn flow(n: u32, t: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::DomainError { function: "flow", value: x });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("the flow needs n >= 2, got {n}")));
    }
    if t == 0.0 {
        return Ok(x);
    }
    f_inv(n, f_map(n, x)? + t)
}

fn action_plan(grid: &HalfLineGrid, action: Action, t: f64) -> Result<Vec<Option<(isize, [f64; 6])>>> {
    grid.nodes()
        .iter()
        .enumerate()
        .map(|(k, &x)| match action {
            Action::Frozen => Ok(grid.stencil(grid.nodes()[k])),
            Action::Flow(n) => Ok(grid.stencil(flow(n, -t, x)?)),
        })
        .collect()
}

/// (α_t a)(x) = a(flow(−t, x)).
pub fn act(action: Action, t: f64, a: &MatrixSchwartz) -> Result<MatrixSchwartz> {
    if t == 0.0 || action == Action::Frozen {
        return Ok(a.clone());
    }
    Ok(a.apply_stencils(&action_plan(&a.grid, action, t)?))
}

/// Polynomial envelope ‖α_t a‖ ≤ C(1+|t|)^M ‖a‖ measured on samples.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthFit {
    pub c: f64,
    pub m: u32,
    /// Log-log slope of the envelope max(r(τ), r(−τ)) over τ ≥ 2.
    pub slope: f64,
    pub r_squared: f64,
    /// (t, max over elements of ‖α_t a‖/‖a‖).
    pub ratios: Vec<(f64, f64)>,
}

/// The growth degree is asymptotic; the envelope regression skips |t| < 2.
pub const GROWTH_FIT_START: f64 = 2.0;

/// Measures ‖α_t a‖_index/‖a‖_index for every element and sample, takes M as
/// the ceiling of the envelope's log-log slope, then the smallest C that
/// covers every sample.
pub fn poly_growth_fit(action: Action, elements: &[MatrixSchwartz], index: u32, t_samples: &[f64]) -> Result<GrowthFit> {
    if index > 2 {
        return Err(Error::InvalidArgument(format!("seminorm index {index} exceeds 2")));
    }
    if let Some(&t) = t_samples.iter().find(|t| !(t.abs() <= 10.0)) {
        return Err(Error::InvalidArgument(format!("time sample {t} outside [-10, 10]")));
    }
    let live: Vec<(&MatrixSchwartz, f64)> = elements
        .iter()
        .map(|a| (a, a.seminorm(index)))
        .filter(|&(_, norm)| norm > 0.0)
        .collect();
    let ratios: Vec<(f64, f64)> = t_samples
        .par_iter()
        .map(|&t| {
            let mut worst: f64 = 0.0;
            for &(a, norm) in &live {
                worst = worst.max(act(action, t, a)?.seminorm(index) / norm);
            }
            Ok((t, worst))
        })
        .collect::<Result<_>>()?;

    let mut taus: Vec<f64> = ratios.iter().map(|&(t, _)| t.abs()).filter(|&tau| tau >= GROWTH_FIT_START).collect();
    taus.sort_by(f64::total_cmp);
    taus.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let envelope: Vec<(f64, f64)> = taus
        .iter()
        .map(|&tau| {
            let e = ratios
                .iter()
                .filter(|(t, _)| (t.abs() - tau).abs() < 1e-12)
                .map(|&(_, r)| r)
                .fold(0.0, f64::max);
            (tau, e)
        })
        .filter(|&(_, e)| e > 0.0)
        .collect();
    let (slope, r_squared) = if envelope.len() >= 3 {
        let lx: Vec<f64> = envelope.iter().map(|(tau, _)| (1.0 + tau).ln()).collect();
        let ly: Vec<f64> = envelope.iter().map(|(_, e)| e.ln()).collect();
        let (slope, _, r2) = linear_fit(&lx, &ly);
        (slope, if r2.is_finite() { r2 } else { 1.0 })
    } else {
        (0.0, 1.0)
    };
    let m = (slope - 0.05).ceil().max(0.0) as u32;
    let c = ratios
        .iter()
        .map(|&(t, r)| r / (1.0 + t.abs()).powi(m as i32))
        .fold(0.0, f64::max);
    Ok(GrowthFit { c, m, slope, r_squared, ratios })
}

/// Uniform time grid on [−T_max, T_max].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub step: f64,
    pub t_max: f64,
    half: usize,
}

impl TimeGrid {
    pub fn new(step: f64, t_max: f64) -> Result<Self> {
        if !(step > 0.0 && t_max > step) {
            return Err(Error::InvalidArgument(format!("need 0 < step < T_max, got ({step}, {t_max})")));
        }
        let half = (t_max / step).round() as usize;
        if ((half as f64) * step - t_max).abs() > 1e-9 * t_max {
            return Err(Error::InvalidArgument(format!("T_max={t_max} is not a multiple of step={step}")));
        }
        Ok(TimeGrid { step, t_max, half })
    }

    /// Step 0.1 on [−12, 12].
    pub fn default_grid() -> Self {
        Self::new(0.1, 12.0).expect("default time grid")
    }

    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t_at(&self, k: usize) -> f64 {
        (k as f64 - self.half as f64) * self.step
    }
}

/// Element of S(ℝ,𝒜) sampled on a time grid.
#[derive(Clone, Debug)]
pub struct TwistedElement {
    tgrid: TimeGrid,
    nodes: Vec<MatrixSchwartz>,
}

impl TwistedElement {
    pub fn zeros(tgrid: TimeGrid, grid: &Arc<HalfLineGrid>, m: usize) -> Self {
        TwistedElement { tgrid, nodes: vec![MatrixSchwartz::zeros(grid, m); tgrid.len()] }
    }

    /// p(t)·a.
    pub fn separable(tgrid: TimeGrid, p: impl Fn(f64) -> C64, a: &MatrixSchwartz) -> Self {
        let nodes = (0..tgrid.len()).map(|k| a.scale(p(tgrid.t_at(k)))).collect();
        TwistedElement { tgrid, nodes }
    }

    pub fn from_nodes(tgrid: TimeGrid, nodes: Vec<MatrixSchwartz>) -> Result<Self> {
        if nodes.len() != tgrid.len() {
            return Err(Error::DimensionMismatch(format!("{} nodes for a time grid of {}", nodes.len(), tgrid.len())));
        }
        if let Some(first) = nodes.first() {
            for a in &nodes[1..] {
                first.check(a)?;
            }
        }
        Ok(TwistedElement { tgrid, nodes })
    }

    /// One or two separable terms: a smooth bump in t (support inside
    /// |t| ≤ reach) times a flow-coordinate Gaussian in x times a random
    /// matrix.
    pub fn random<R: Rng + ?Sized>(
        tgrid: TimeGrid,
        grid: &Arc<HalfLineGrid>,
        m: usize,
        n: u32,
        reach: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut total = Self::zeros(tgrid, grid, m);
        for _ in 0..rng.gen_range(1..=2) {
            let radius = rng.gen_range(0.3 * reach..0.6 * reach);
            let center = rng.gen_range(-(reach - radius)..(reach - radius));
            let b = Op::from_fn(m, |_, _| uniform_complex(rng));
            let a = MatrixSchwartz::flow_gaussian(grid, n, rng.gen_range(-2.0..2.0), rng.gen_range(0.5..1.5), &b)?;
            let term = Self::separable(tgrid, |t| C64::new(bump((t - center) / radius), 0.0), &a);
            total = total.add(&term)?;
        }
        Ok(total)
    }

    pub fn time_grid(&self) -> TimeGrid {
        self.tgrid
    }

    pub fn node(&self, k: usize) -> &MatrixSchwartz {
        &self.nodes[k]
    }

    pub fn nodes(&self) -> &[MatrixSchwartz] {
        &self.nodes
    }

    pub fn add(&self, other: &TwistedElement) -> Result<Self> {
        if self.tgrid != other.tgrid {
            return Err(Error::DimensionMismatch("different time grids".into()));
        }
        let nodes = self.nodes.iter().zip(&other.nodes).map(|(a, b)| a.add(b)).collect::<Result<_>>()?;
        Ok(TwistedElement { tgrid: self.tgrid, nodes })
    }

    pub fn scale(&self, c: C64) -> Self {
        TwistedElement { tgrid: self.tgrid, nodes: self.nodes.iter().map(|a| a.scale(c)).collect() }
    }

    /// φ·f·φ with φ acting by multiplication in x.
    pub fn localize(&self, phi: impl Fn(f64) -> f64) -> Self {
        TwistedElement { tgrid: self.tgrid, nodes: self.nodes.iter().map(|a| a.multiply_fn(|x| phi(x).powi(2))).collect() }
    }

    /// Indices of nodes above 1e−16 of the peak sup-norm.
    pub fn live_nodes(&self) -> Vec<usize> {
        let sups: Vec<f64> = self.nodes.iter().map(|a| a.sup_norm()).collect();
        let peak = sups.iter().copied().fold(0.0, f64::max);
        (0..sups.len()).filter(|&k| peak > 0.0 && sups[k] > 1e-16 * peak).collect()
    }

    /// Largest |t| over the live nodes.
    pub fn extent(&self) -> f64 {
        self.live_nodes().into_iter().map(|k| self.tgrid.t_at(k).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &TwistedElement) -> f64 {
        self.nodes.iter().zip(&other.nodes).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    /// ∂_t^j by central differences, zero beyond the window.
    pub fn time_derivative(&self, j: usize) -> Result<Self> {
        if j > 2 {
            return Err(Error::InvalidArgument(format!("time derivative order {j} exceeds 2")));
        }
        let len = self.tgrid.len();
        let zero = MatrixSchwartz::zeros(&self.nodes[0].grid, self.nodes[0].m);
        let at = |k: isize| if k < 0 || k >= len as isize { &zero } else { &self.nodes[k as usize] };
        let h = self.tgrid.step;
        let nodes = (0..len as isize)
            .map(|k| match j {
                0 => Ok(at(k).clone()),
                1 => Ok(at(k + 1).add(&at(k - 1).scale(C64::new(-1.0, 0.0)))?.scale(C64::new(0.5 / h, 0.0))),
                _ => Ok(at(k + 1)
                    .add(&at(k).scale(C64::new(-2.0, 0.0)))?
                    .add(at(k - 1))?
                    .scale(C64::new(1.0 / (h * h), 0.0))),
            })
            .collect::<Result<_>>()?;
        Ok(TwistedElement { tgrid: self.tgrid, nodes })
    }
}

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - t * t)).exp()
    }
}

/// (f*g)(t) = Σ_s f(s)·α_s(g(t − s))·Δs.
pub fn twisted_convolve(f: &TwistedElement, g: &TwistedElement, action: Action) -> Result<TwistedElement> {
    if f.tgrid != g.tgrid {
        return Err(Error::DimensionMismatch("different time grids".into()));
    }
    f.nodes[0].check(&g.nodes[0])?;
    let extent = f.extent() + g.extent();
    if extent > f.tgrid.t_max + 1e-9 * f.tgrid.step {
        return Err(Error::WindowOverflow { extent, limit: f.tgrid.t_max });
    }
    let tg = f.tgrid;
    let len = tg.len() as isize;
    let half = (tg.len() / 2) as isize;
    let grid = Arc::clone(&f.nodes[0].grid);
    let m = f.nodes[0].m;
    let f_live: Vec<usize> = (0..tg.len()).filter(|&j| f.nodes[j].values.iter().any(|z| *z != ZERO)).collect();
    let g_live: Vec<bool> = g.nodes.iter().map(|a| a.values.iter().any(|z| *z != ZERO)).collect();
    let plans: Vec<Vec<Option<(isize, [f64; 6])>>> = f_live
        .par_iter()
        .map(|&j| action_plan(&grid, action, tg.t_at(j)))
        .collect::<Result<_>>()?;
    let mm = m * m;
    let nodes: Vec<MatrixSchwartz> = (0..len)
        .into_par_iter()
        .map(|k| {
            let mut out = MatrixSchwartz::zeros(&grid, m);
            for (p, &j) in f_live.iter().enumerate() {
                let src = k - j as isize + half;
                if src < 0 || src >= len || !g_live[src as usize] {
                    continue;
                }
                let moved = g.nodes[src as usize].apply_stencils(&plans[p]);
                let fj = &f.nodes[j];
                for x in 0..grid.len() {
                    block_mul_add(
                        &fj.values[x * mm..(x + 1) * mm],
                        &moved.values[x * mm..(x + 1) * mm],
                        C64::new(tg.step, 0.0),
                        &mut out.values[x * mm..(x + 1) * mm],
                        m,
                    );
                }
            }
            out
        })
        .collect();
    Ok(TwistedElement { tgrid: tg, nodes })
}

/// ‖f‖_{n,i,j} = Σ_t |t|^i ‖∂_t^j f(t)‖_n Δt.
pub fn seminorm_nij(f: &TwistedElement, n: u32, i: u32, j: usize) -> Result<f64> {
    let d = f.time_derivative(j)?;
    let tg = f.tgrid;
    let terms: Vec<f64> = d
        .nodes
        .par_iter()
        .enumerate()
        .map(|(k, a)| {
            let t = tg.t_at(k).abs();
            let w = if i == 0 { 1.0 } else { t.powi(i as i32) };
            if w == 0.0 {
                0.0
            } else {
                w * a.seminorm(n)
            }
        })
        .collect();
    // Summed in order so that results do not depend on the thread count.
    Ok(terms.iter().sum::<f64>() * tg.step)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, r| acc * (n - r) as f64 / (r + 1) as f64)
}

/// Two sides of the seminorm estimate for the twisted product.
#[derive(Clone, Debug, PartialEq)]
pub struct RobertReport {
    pub n: u32,
    pub i: u32,
    pub j: usize,
    pub lhs: f64,
    pub bound: f64,
    pub ratio: f64,
    pub growth: GrowthFit,
    pub passed: bool,
}

/// ‖f*g‖_{n,i,j} ≤ C_n Σ_{β+γ=i} C(i,β)(‖f‖_{n,β,0} + ‖f‖_{n,β+M_n,0})‖g‖_{n,γ,j},
/// with (C_n, M_n) fitted on the values of g over the times where f lives.
/// The fitted envelope C(1+|s|)^M is turned into C_n(1+|s|^M) with
/// C_n = C·2^{M−1}.
pub fn robert_check(f: &TwistedElement, g: &TwistedElement, action: Action, n: u32, i: u32, j: usize) -> Result<RobertReport> {
    let product = twisted_convolve(f, g, action)?;
    let lhs = seminorm_nij(&product, n, i, j)?;
    let tg = f.tgrid;
    let samples: Vec<f64> = f.live_nodes().into_iter().map(|k| tg.t_at(k)).collect();
    let live: Vec<MatrixSchwartz> = g.live_nodes().into_iter().map(|k| g.nodes[k].clone()).collect();
    let growth = poly_growth_fit(action, &live, n, &samples)?;
    let mut bound = 0.0;
    for beta in 0..=i {
        let gamma = i - beta;
        let f_part = seminorm_nij(f, n, beta, 0)? + seminorm_nij(f, n, beta + growth.m, 0)?;
        bound += binomial(i, beta) * f_part * seminorm_nij(g, n, gamma, j)?;
    }
    bound *= growth.c * 2f64.powi(growth.m as i32 - 1).max(1.0);
    let ratio = if bound > 0.0 { lhs / bound } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(RobertReport { n, i, j, lhs, bound, ratio, passed: lhs <= bound * 1.05, growth })
}

/// Kernel K(x, x′) ⊗ m×m on the product grid.
#[derive(Clone, Debug)]
pub struct GridKernel {
    grid: Arc<HalfLineGrid>,
    m: usize,
    values: Vec<C64>,
}

impl GridKernel {
    pub fn from_fn(grid: &Arc<HalfLineGrid>, m: usize, k: impl Fn(f64, f64) -> Op + Sync) -> Self {
        let x = grid.nodes();
        let rows: Vec<Vec<C64>> = x
            .par_iter()
            .map(|&a| {
                let mut row = Vec::with_capacity(x.len() * m * m);
                for &b in x {
                    let block = k(a, b);
                    assert_eq!(block.dim(), m, "kernel block has the wrong size");
                    row.extend_from_slice(block.as_slice());
                }
                row
            })
            .collect();
        GridKernel { grid: Arc::clone(grid), m, values: rows.concat() }
    }

    /// k(x, x′)·B.
    pub fn scalar(grid: &Arc<HalfLineGrid>, k: impl Fn(f64, f64) -> f64 + Sync, b: &Op) -> Self {
        Self::from_fn(grid, b.dim(), |x, y| b.scale_real(k(x, y)))
    }

    pub fn grid(&self) -> &Arc<HalfLineGrid> {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.m
    }

    fn block(&self, a: usize, b: usize) -> &[C64] {
        let mm = self.m * self.m;
        let start = (a * self.grid.len() + b) * mm;
        &self.values[start..start + mm]
    }

    /// Composition (K₁K₂)(x, x′) = Σ_y K₁(x, y) K₂(y, x′) w(y).
    pub fn compose(&self, other: &GridKernel) -> Result<Self> {
        if self.m != other.m || *self.grid != *other.grid {
            return Err(Error::DimensionMismatch("kernels live on different grids".into()));
        }
        let n = self.grid.len();
        let m = self.m;
        let mm = m * m;
        let w = self.grid.weights();
        let rows: Vec<Vec<C64>> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut row = vec![ZERO; n * mm];
                for (y, &wy) in w.iter().enumerate() {
                    let left = self.block(a, y);
                    if left.iter().all(|z| *z == ZERO) {
                        continue;
                    }
                    for b in 0..n {
                        block_mul_add(left, other.block(y, b), C64::new(wy, 0.0), &mut row[b * mm..(b + 1) * mm], m);
                    }
                }
                row
            })
            .collect();
        Ok(GridKernel { grid: Arc::clone(&self.grid), m, values: rows.concat() })
    }

    pub fn add(&self, other: &GridKernel) -> Result<Self> {
        if self.m != other.m || *self.grid != *other.grid {
            return Err(Error::DimensionMismatch("kernels live on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(GridKernel { grid: Arc::clone(&self.grid), m: self.m, values })
    }
}

/// Nodes with x at least this far from the boundary form the inner region.
pub const INNER_EDGE: f64 = 1e-3;
/// Absolute blow-up threshold.
pub const BLOW_UP: f64 = 1e8;
/// Allowed growth of a measured quantity from the inner region to the full grid.
pub const PADDING_RATIO: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DecayEntry {
    pub i: u32,
    pub j: u32,
    pub full: f64,
    pub inner: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorEntry {
    /// Exponents of x^{−i} Δ^j K Δ^k x^{−l}.
    pub exponents: [u32; 4],
    pub full: f64,
    pub inner: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdealReport {
    pub decay: Vec<DecayEntry>,
    pub operator: Vec<OperatorEntry>,
}

impl IdealReport {
    pub fn decay_passed(&self) -> bool {
        self.decay.iter().all(|e| e.passed)
    }

    pub fn operator_passed(&self) -> bool {
        self.operator.iter().all(|e| e.passed)
    }

    pub fn passed(&self) -> bool {
        self.decay_passed() && self.operator_passed()
    }

    /// Whether test (i) passes for the weight x^{−i} x′^{−j}.
    pub fn decay_at(&self, i: u32, j: u32) -> Option<bool> {
        self.decay.iter().find(|e| e.i == i && e.j == j).map(|e| e.passed)
    }

    /// Name of the first failing test, if any.
    pub fn failure(&self) -> Option<&'static str> {
        if !self.decay_passed() {
            Some("decay")
        } else if !self.operator_passed() {
            Some("operator")
        } else {
            None
        }
    }
}

fn grows_at_boundary(full: f64, inner: f64) -> bool {
    !full.is_finite() || full > PADDING_RATIO * inner + f64::MIN_POSITIVE
}

fn blown_up(full: f64, inner: f64) -> bool {
    full > BLOW_UP || grows_at_boundary(full, inner)
}

/// Power-counting test of membership in the residual ideal: (i) the weighted
/// sups x^{−i}‖K‖x′^{−j}, i, j ≤ cap; (ii) the operator norms of
/// x^{−i} Δ^j K Δ^k x^{−l}, exponents ≤ cap/2, on a grid of at most 48
/// nodes, with Δ = D*D + boundary graph Laplacian and D = i xⁿ ∂_x. A
/// quantity fails when it grows by more than a factor 10 from the region
/// x, x′ ≥ 1e−3 to the full grid; weighted sups also fail above 1e8.
#[allow(non_snake_case)]
pub fn ideal_membership_I(k: &GridKernel, n: u32, cap: u32) -> Result<IdealReport> {
    if cap > 6 {
        return Err(Error::InvalidArgument(format!("cap {cap} exceeds 6")));
    }
    let x = k.grid.nodes();
    let count = x.len();
    let m = k.m;
    let norms: Vec<f64> = (0..count * count)
        .into_par_iter()
        .map(|ab| block_norm(k.block(ab / count, ab % count), m))
        .collect();
    let mut decay = Vec::new();
    for i in 0..=cap {
        for j in 0..=cap {
            let mut full: f64 = 0.0;
            let mut inner: f64 = 0.0;
            for a in 0..count {
                for b in 0..count {
                    let v = norms[a * count + b];
                    if v == 0.0 {
                        continue;
                    }
                    let w = v * x[a].powi(-(i as i32)) * x[b].powi(-(j as i32));
                    full = full.max(w);
                    if x[a] >= INNER_EDGE && x[b] >= INNER_EDGE {
                        inner = inner.max(w);
                    }
                }
            }
            decay.push(DecayEntry { i, j, full, inner, passed: !blown_up(full, inner) });
        }
    }

    // Operator test on a coarse subgrid, in coordinates orthonormal for the
    // weighted inner product.
    let idx = k.grid.subsample(count.div_ceil(48));
    let y: Vec<f64> = idx.iter().map(|&a| x[a]).collect();
    let c = y.len();
    let w: Vec<f64> = (0..c)
        .map(|p| {
            let left = if p > 0 { y[p] - y[p - 1] } else { y[0] };
            let right = if p + 1 < c { y[p + 1] - y[p] } else { 0.0 };
            (left + right) / 2.0
        })
        .collect();
    let dim = c * m;
    let sqrt_w = |p: usize| w[p].sqrt();
    let kt = Op::from_fn(dim, |r, s| {
        let (p, i) = (r / m, r % m);
        let (q, j) = (s / m, s % m);
        k.block(idx[p], idx[q])[i * m + j] * (sqrt_w(p) * sqrt_w(q))
    });
    let ii = C64::new(0.0, 1.0);
    let d = Op::from_fn(dim, |r, s| {
        let (p, i) = (r / m, r % m);
        let (q, j) = (s / m, s % m);
        if i != j {
            return ZERO;
        }
        let (lo, hi) = (p.saturating_sub(1), (p + 1).min(c - 1));
        let coeff = y[p].powi(n as i32) / (y[hi] - y[lo]);
        let entry = if q == hi { coeff } else if q == lo { -coeff } else { 0.0 };
        ii * entry * (sqrt_w(p) / sqrt_w(q))
    });
    let graph = Op::from_fn(dim, |r, s| {
        let (p, i) = (r / m, r % m);
        let (q, j) = (s / m, s % m);
        if p != q {
            return ZERO;
        }
        let degree = if m == 1 { 0.0 } else if i == 0 || i == m - 1 { 1.0 } else { 2.0 };
        if i == j {
            C64::new(degree, 0.0)
        } else if i.abs_diff(j) == 1 {
            C64::new(-1.0, 0.0)
        } else {
            ZERO
        }
    });
    let delta = &d.adjoint().matmul(&d) + &graph;
    let half = cap / 2;
    let mut delta_pow = vec![Op::identity(dim)];
    for e in 1..=half as usize {
        delta_pow.push(delta_pow[e - 1].matmul(&delta));
    }
    let inv_x = |e: u32| Op::from_fn(dim, |r, s| if r == s { C64::new(y[r / m].powi(-(e as i32)), 0.0) } else { ZERO });
    let inner_rows: Vec<usize> = (0..dim).filter(|&r| y[r / m] >= INNER_EDGE).collect();
    let mut combos = Vec::new();
    for i in 0..=half {
        for j in 0..=half {
            for kk in 0..=half {
                for l in 0..=half {
                    combos.push([i, j, kk, l]);
                }
            }
        }
    }
    let operator: Vec<OperatorEntry> = combos
        .par_iter()
        .map(|&[i, j, kk, l]| {
            let prod = inv_x(i)
                .matmul(&delta_pow[j as usize])
                .matmul(&kt)
                .matmul(&delta_pow[kk as usize])
                .matmul(&inv_x(l));
            let full = op_norm(&prod);
            let sub = Op::from_fn(inner_rows.len(), |r, s| prod[(inner_rows[r], inner_rows[s])]);
            let inner = op_norm(&sub);
            // Δ is unbounded at large x as well, so only growth toward the
            // boundary counts here.
            OperatorEntry { exponents: [i, j, kk, l], full, inner, passed: !grows_at_boundary(full, inner) }
        })
        .collect();
    Ok(IdealReport { decay, operator })
}

/// Smooth step: 1 on [0, 0.3], 0 on [1, ∞), C² quintic in between.
pub fn cutoff(x: f64) -> f64 {
    if x <= 0.3 {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        let s = (x - 0.3) / 0.7;
        1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// Closure of the model algebra under products, summand by summand.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosureReport {
    /// ‖·‖_{n,i,j} of φfφ * φgφ for (n,i,j) ∈ {0,1}³.
    pub twisted_seminorms: Vec<((u32, u32, usize), f64)>,
    /// Test (i) at cap 3 for K₁K₂, K₁K₁ and K₁ + K₂.
    pub ideal_products: Vec<(String, bool)>,
    pub passed: bool,
}

pub fn closure_demo(
    tgrid: TimeGrid,
    grid: &Arc<HalfLineGrid>,
    kernel_grid: &Arc<HalfLineGrid>,
    m: usize,
    n: u32,
    rng: &mut impl Rng,
) -> Result<ClosureReport> {
    let reach = tgrid.t_max / 4.0;
    let f = TwistedElement::random(tgrid, grid, m, n, reach, rng)?.localize(cutoff);
    let g = TwistedElement::random(tgrid, grid, m, n, reach, rng)?.localize(cutoff);
    let fg = twisted_convolve(&f, &g, Action::Flow(n))?;
    let mut twisted_seminorms = Vec::new();
    for nn in 0..=1 {
        for i in 0..=1 {
            for j in 0..=1 {
                twisted_seminorms.push(((nn, i, j), seminorm_nij(&fg, nn, i, j)?));
            }
        }
    }
    let b1 = Op::from_fn(m, |_, _| uniform_complex(rng));
    let b2 = Op::from_fn(m, |_, _| uniform_complex(rng));
    let k1 = GridKernel::scalar(kernel_grid, |x, y| (-1.0 / x - 1.0 / y).exp() * cutoff(x) * cutoff(y), &b1);
    let k2 = GridKernel::scalar(kernel_grid, |x, y| (-1.0 / x - 2.0 / y).exp() * (x + y), &b2);
    let mut ideal_products = Vec::new();
    for (name, kernel) in [("K1K2", k1.compose(&k2)?), ("K1K1", k1.compose(&k1)?), ("K1+K2", k1.add(&k2)?)] {
        let report = ideal_membership_I(&kernel, n, 3)?;
        ideal_products.push((name.to_string(), report.decay_passed()));
    }
    let passed = twisted_seminorms.iter().all(|(_, v)| v.is_finite()) && ideal_products.iter().all(|(_, p)| *p);
    Ok(ClosureReport { twisted_seminorms, ideal_products, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use std::f64::consts::PI;

    fn rk4_flow(n: u32, t: f64, x0: f64, steps: usize) -> f64 {
        let v = |x: f64| x.powi(n as i32) / (1.0 + x.powi(n as i32));
        let h = t / steps as f64;
        let mut x = x0;
        for _ in 0..steps {
            let k1 = v(x);
            let k2 = v(x + h * k1 / 2.0);
            let k3 = v(x + h * k2 / 2.0);
            let k4 = v(x + h * k3);
            x += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        x
    }

    #[test]
    fn flow_examples() {
        assert_eq!(flow(3, 0.0, 0.7).unwrap(), 0.7);
        let x = flow(2, 1.5, 1.0).unwrap();
        assert!((x - 2.0).abs() <= 1e-12);
        assert!((rk4_flow(2, 1.5, 1.0, 20_000) - x).abs() <= 1e-8);
        assert!(matches!(flow(2, 1.0, 0.0), Err(Error::DomainError { .. })));
        assert!(flow(1, 1.0, 0.5).is_err());
        // Backward flow accumulates at the boundary.
        assert!(flow(2, -1e6, 1.0).unwrap() < 1e-5);
    }

    #[test]
    fn act_identity_and_transport() {
        let grid = Arc::new(HalfLineGrid::default_grid());
        let b = Op::identity(2);
        let a = MatrixSchwartz::separable(&grid, |x| (-(x - 1.0).powi(2) / 0.18).exp(), &b);
        let same = act(Action::Flow(2), 0.0, &a).unwrap();
        assert_eq!(same.max_abs_diff(&a), 0.0);
        let moved = act(Action::Flow(2), 1.5, &a).unwrap();
        let peak = (0..grid.len())
            .max_by(|&p, &q| moved.at(p)[(0, 0)].norm().total_cmp(&moved.at(q)[(0, 0)].norm()))
            .unwrap();
        assert!((grid.nodes()[peak] - 2.0).abs() < 0.05, "peak at {}", grid.nodes()[peak]);
        assert!((moved.sup_norm() - a.sup_norm()).abs() <= 1e-3);
    }

    #[test]
    fn twisted_product_of_zero() {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 60).unwrap());
        let tg = TimeGrid::new(0.2, 6.0).unwrap();
        let f = TwistedElement::random(tg, &grid, 2, 2, 1.5, &mut seeded(1)).unwrap();
        let z = TwistedElement::zeros(tg, &grid, 2);
        let p = twisted_convolve(&f, &z, Action::Flow(2)).unwrap();
        assert_eq!(p.max_abs_diff(&z), 0.0);
        for (n, i, j) in [(0, 0, 0), (1, 1, 1), (2, 2, 2)] {
            assert_eq!(seminorm_nij(&z, n, i, j).unwrap(), 0.0);
        }
    }

    #[test]
    fn frozen_gaussians_match_closed_form() {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 40).unwrap());
        let tg = TimeGrid::default_grid();
        let a = MatrixSchwartz::separable(&grid, |x| (-x).exp(), &Op::identity(1));
        let f = TwistedElement::separable(tg, |t| C64::new((-2.0 * t * t).exp(), 0.0), &a);
        let p = twisted_convolve(&f, &f, Action::Frozen).unwrap();
        let mut err: f64 = 0.0;
        for k in 0..tg.len() {
            let t = tg.t_at(k);
            for (q, &x) in grid.nodes().iter().enumerate() {
                let exact = (PI / 4.0).sqrt() * (-t * t).exp() * (-2.0 * x).exp();
                err = err.max((p.node(k).at(q)[(0, 0)] - exact).norm());
            }
        }
        assert!(err <= 1e-3, "{err}");
    }

    #[test]
    fn window_overflow_in_time() {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 20).unwrap());
        let tg = TimeGrid::new(0.5, 6.0).unwrap();
        let a = MatrixSchwartz::separable(&grid, |_| 1.0, &Op::identity(1));
        let f = TwistedElement::separable(tg, |_| C64::new(1.0, 0.0), &a);
        assert!(matches!(twisted_convolve(&f, &f, Action::Frozen), Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn frozen_young_inequality() {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 60).unwrap());
        let tg = TimeGrid::new(0.2, 8.0).unwrap();
        let mut rng = seeded(2);
        let f = TwistedElement::random(tg, &grid, 2, 2, 2.0, &mut rng).unwrap();
        let g = TwistedElement::random(tg, &grid, 2, 2, 2.0, &mut rng).unwrap();
        let r = robert_check(&f, &g, Action::Frozen, 0, 0, 0).unwrap();
        assert_eq!((r.growth.m, r.growth.c), (0, 1.0));
        assert!(r.ratio <= 0.5 + 1e-12);
        let lhs = seminorm_nij(&twisted_convolve(&f, &g, Action::Frozen).unwrap(), 0, 0, 0).unwrap();
        assert!(lhs <= seminorm_nij(&f, 0, 0, 0).unwrap() * seminorm_nij(&g, 0, 0, 0).unwrap() * (1.0 + 1e-12));
        assert!(r.passed);
    }

    #[test]
    fn gaussian_pair_robert_bound() {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 120).unwrap());
        let tg = TimeGrid::new(0.2, 12.0).unwrap();
        let a = MatrixSchwartz::flow_gaussian(&grid, 2, 0.0, 1.0, &Op::identity(2)).unwrap();
        let f = TwistedElement::separable(tg, |t| C64::new((-2.0 * t * t).exp(), 0.0), &a);
        let r = robert_check(&f, &f, Action::Flow(2), 1, 1, 1).unwrap();
        assert!(r.passed && r.ratio.is_finite(), "{r:?}");
    }

    #[test]
    fn growth_fit_examples() {
        let grid = Arc::new(HalfLineGrid::default_grid());
        let b = Op::identity(2);
        let constant = MatrixSchwartz::separable(&grid, |_| 1.0, &b);
        let samples: Vec<f64> = (-10..=10).map(|k| k as f64).collect();
        let fit = poly_growth_fit(Action::Flow(2), &[constant], 0, &samples).unwrap();
        assert_eq!(fit.m, 0);
        // Cubic overshoot at the zero extension past X_max.
        assert!((fit.c - 1.0).abs() <= 0.1, "{fit:?}");

        let bump = MatrixSchwartz::flow_gaussian(&grid, 2, 0.0, 1.0, &b).unwrap();
        let fit1 = poly_growth_fit(Action::Flow(2), &[bump.clone()], 1, &samples).unwrap();
        assert!(fit1.c.is_finite() && fit1.m <= 4, "{fit1:?}");
        assert!(fit1.r_squared >= 0.99, "{fit1:?}");
        let fit0 = poly_growth_fit(Action::Flow(2), &[bump], 0, &samples).unwrap();
        assert!(fit0.m <= fit1.m);
        assert!(poly_growth_fit(Action::Flow(2), &[], 3, &samples).is_err());
        assert!(poly_growth_fit(Action::Flow(2), &[], 0, &[11.0]).is_err());
    }

    #[test]
    fn ideal_membership_examples() {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 160).unwrap());
        let eye = Op::identity(2);
        let smooth = GridKernel::scalar(&grid, |x, y| (-1.0 / x - 1.0 / y).exp(), &eye);
        let r = ideal_membership_I(&smooth, 2, 4).unwrap();
        assert!(r.decay_passed() && r.operator_passed(), "{:?}", r.failure());

        let one = GridKernel::scalar(&grid, |_, _| 1.0, &eye);
        let r = ideal_membership_I(&one, 2, 4).unwrap();
        assert_eq!(r.decay_at(0, 0), Some(true));
        assert_eq!(r.decay_at(1, 0), Some(false));
        assert_eq!(r.failure(), Some("decay"));

        let bump = |x: f64| (-(x - 1.0).powi(2)).exp();
        let linear = GridKernel::scalar(&grid, |x, y| x * y * bump(x) * bump(y), &eye);
        let r = ideal_membership_I(&linear, 2, 4).unwrap();
        assert_eq!(r.decay_at(1, 1), Some(true));
        assert_eq!(r.decay_at(2, 0), Some(false));
        assert!(ideal_membership_I(&linear, 2, 7).is_err());
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(cutoff(0.0), 1.0);
        assert_eq!(cutoff(0.3), 1.0);
        assert_eq!(cutoff(1.0), 0.0);
        assert!((cutoff(0.65) - 0.5).abs() < 1e-12);
        let h = 1e-6;
        for &x in &[0.3, 1.0] {
            let d = (cutoff(x + h) - cutoff(x - h)) / (2.0 * h);
            assert!(d.abs() < 1e-5);
        }
    }
}
