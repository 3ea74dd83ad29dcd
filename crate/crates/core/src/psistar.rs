//! Commutator scales, graph-norm Sobolev scales and semi-ideal norms on
//! matrix models, with property suites for spectral invariance.
//!
//! Unbounded symmetric operators are modeled by Hermitian matrices, so every
//! domain is total and every identity is exact up to rounding.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::opcore::{inverse, BaseNorm, Op, C64, I};
use crate::rng::{self, uniform_complex};

/// A subspace of M_dim closed under multiplication, given by a spanning list.
#[derive(Clone, Debug)]
pub struct SubalgebraBasis {
    dim: usize,
    basis: Vec<Op>,
    contains_unit: bool,
    tol: f64,
    /// Hilbert–Schmidt orthonormal basis of span(basis) (+ ℂI).
    ortho: Vec<Op>,
}

const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-8;

impl SubalgebraBasis {
    /// Validates linear independence and product closure.
    pub fn new(dim: usize, basis: Vec<Op>, contains_unit: bool) -> Result<Self> {
        Self::with_tol(dim, basis, contains_unit, DEFAULT_MEMBERSHIP_TOL)
    }

    pub fn with_tol(dim: usize, basis: Vec<Op>, contains_unit: bool, tol: f64) -> Result<Self> {
        if let Some(b) = basis.iter().find(|b| b.dim() != dim) {
            return Err(Error::BadBasis(format!("element of dimension {} in a {dim}-dimensional basis", b.dim())));
        }
        let mut ortho: Vec<Op> = Vec::new();
        let mut gram_det = 1.0;
        for b in &basis {
            let norm = b.frobenius_norm();
            if norm == 0.0 {
                return Err(Error::BadBasis("zero element".into()));
            }
            let residual = orthogonalize(&b.scale_real(1.0 / norm), &ortho);
            let r = residual.frobenius_norm();
            gram_det *= r * r;
            if gram_det <= 1e-12 {
                return Err(Error::BadBasis(format!("linearly dependent elements (Gram determinant {gram_det:e})")));
            }
            ortho.push(residual.scale_real(1.0 / r));
        }
        if contains_unit {
            let unit = Op::identity(dim).scale_real(1.0 / (dim as f64).sqrt());
            let residual = orthogonalize(&unit, &ortho);
            let r = residual.frobenius_norm();
            // The unit may already lie in the span.
            if r > 1e-10 {
                ortho.push(residual.scale_real(1.0 / r));
            }
        }
        let out = SubalgebraBasis { dim, basis, contains_unit, tol, ortho };
        for (i, a) in out.basis.iter().enumerate() {
            for b in &out.basis[i..] {
                for prod in [a.matmul(b), b.matmul(a)] {
                    let residual = out.membership(&prod);
                    if residual > tol {
                        return Err(Error::BadBasis(format!("not closed under products (residual {residual:e})")));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Upper-triangular n×n matrices.
    pub fn upper_triangular(n: usize) -> Self {
        let basis = (0..n).flat_map(|i| (i..n).map(move |j| Op::unit(n, i, j))).collect();
        Self::new(n, basis, true).expect("upper-triangular algebra")
    }

    /// Diagonal n×n matrices.
    pub fn diagonal(n: usize) -> Self {
        let basis = (0..n).map(|i| Op::unit(n, i, i)).collect();
        Self::new(n, basis, true).expect("diagonal algebra")
    }

    /// Full matrix algebra M_n.
    pub fn full(n: usize) -> Self {
        let basis = (0..n).flat_map(|i| (0..n).map(move |j| Op::unit(n, i, j))).collect();
        Self::new(n, basis, true).expect("full matrix algebra")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Op] {
        &self.basis
    }

    pub fn contains_unit(&self) -> bool {
        self.contains_unit
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Dimension of span(basis) (+ ℂI) as a vector space.
    pub fn span_dim(&self) -> usize {
        self.ortho.len()
    }

    pub fn set_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    /// The same algebra with ℂI adjoined.
    pub fn with_unit(&self) -> Self {
        if self.contains_unit {
            return self.clone();
        }
        Self::with_tol(self.dim, self.basis.clone(), true, self.tol).expect("adjoining the unit keeps closure")
    }

    /// Hilbert–Schmidt orthogonal projection onto the span.
    pub fn project(&self, m: &Op) -> Op {
        let mut out = Op::zeros(self.dim);
        for q in &self.ortho {
            out += &q.scale(q.hs_inner(m));
        }
        out
    }

    /// ‖m − Π(m)‖ / max(‖m‖, 1) in the Hilbert–Schmidt norm.
    pub fn membership(&self, m: &Op) -> f64 {
        (m - &self.project(m)).frobenius_norm() / m.frobenius_norm().max(1.0)
    }

    pub fn contains(&self, m: &Op) -> bool {
        self.membership(m) <= self.tol
    }

    /// Random element Σ c_i b_i with coefficients uniform in the unit square.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Op {
        let mut out = Op::zeros(self.dim);
        for b in &self.basis {
            out += &b.scale(uniform_complex(rng));
        }
        out
    }

    /// The symmetric part {a : a, a* both in the span}, itself checked for
    /// product closure.
    pub fn symmetrized(&self) -> Result<Self> {
        let k = self.ortho.len();
        let complement = |m: &Op| m - &self.project(m);
        // c ↦ Σ c̄_i (I − Π)(q_i*) is linear in c̄.
        let columns: Vec<Op> = self.ortho.iter().map(|q| complement(&q.adjoint())).collect();
        let gram = Op::from_fn(k.max(1), |i, j| {
            if k == 0 {
                C64::new(0.0, 0.0)
            } else {
                columns[i].hs_inner(&columns[j])
            }
        });
        let mut elements = Vec::new();
        if k > 0 {
            let eig = crate::opcore::hermitian_eig(&gram)?;
            let threshold = 1e-10 * eig.values.last().copied().unwrap_or(0.0).max(1.0);
            for (idx, &value) in eig.values.iter().enumerate() {
                if value > threshold {
                    break;
                }
                let mut element = Op::zeros(self.dim);
                for (i, q) in self.ortho.iter().enumerate() {
                    element += &q.scale(eig.vectors[(i, idx)].conj());
                }
                elements.push(element);
            }
        }
        let has_unit = self.contains_unit || self.membership(&Op::identity(self.dim)) <= self.tol;
        Self::with_tol(self.dim, elements, has_unit, self.tol)
    }
}

fn orthogonalize(m: &Op, ortho: &[Op]) -> Op {
    let mut r = m.clone();
    // Two passes of modified Gram–Schmidt.
    for _ in 0..2 {
        for q in ortho {
            r = &r - &q.scale(q.hs_inner(&r));
        }
    }
    r
}

/// The finite set of symmetric operators generating the scales.
#[derive(Clone, Debug)]
pub struct DerivationSet {
    members: Vec<Op>,
}

impl DerivationSet {
    pub fn new(members: Vec<Op>) -> Result<Self> {
        if let Some(first) = members.first() {
            if members.iter().any(|t| t.dim() != first.dim()) {
                return Err(Error::DimensionMismatch("derivation generators differ in dimension".into()));
            }
        }
        for t in &members {
            let asymmetry = t.hermitian_defect();
            if asymmetry > 1e-10 {
                return Err(Error::NotHermitian { asymmetry });
            }
        }
        Ok(DerivationSet { members })
    }

    pub fn members(&self) -> &[Op] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// δ_T(a) = i(Ta − aT).
pub fn delta(t: &Op, a: &Op) -> Op {
    t.commutator(a).scale(I)
}

/// q_{r,j}(a) = q_{r−1,j}(a) + Σ_T q_{r−1,j}(δ_T(a)), q_{0,j} = base_norms[j].
pub fn scale_norm_q(a: &Op, r: usize, j: usize, set: &DerivationSet, base_norms: &[BaseNorm]) -> f64 {
    if r == 0 {
        return base_norms[j].apply(a);
    }
    scale_norm_q(a, r - 1, j, set, base_norms)
        + set
            .members
            .iter()
            .map(|t| scale_norm_q(&delta(t, a), r - 1, j, set, base_norms))
            .sum::<f64>()
}

/// p_r(ξ) = p_{r−1}(ξ) + Σ_T p_{r−1}(Tξ), p_0 the Euclidean norm.
pub fn sobolev_norm_p(xi: &[C64], r: usize, set: &DerivationSet) -> f64 {
    if r == 0 {
        return xi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    }
    sobolev_norm_p(xi, r - 1, set) + set.members.iter().map(|t| sobolev_norm_p(&t.matvec(xi), r - 1, set)).sum::<f64>()
}

/// (Tx, xT, T1 x T2).
pub fn omega_maps(x: &Op, t: &Op, t1: &Op, t2: &Op) -> (Op, Op, Op) {
    (t.matmul(x), x.matmul(t), t1.matmul(x).matmul(t2))
}

/// p_{j,k+1}(x) = p_{j,k}(x) + Σ_T (p_{j,k}(Tx) + p_{j,k}(xT)) + Σ_{T1,T2} p_{j,k}(T1 x T2).
pub fn semiideal_norm_p(x: &Op, j: usize, k: usize, set: &DerivationSet, base_norms: &[BaseNorm]) -> f64 {
    if k == 0 {
        return base_norms[j].apply(x);
    }
    let p = |m: &Op| semiideal_norm_p(m, j, k - 1, set, base_norms);
    let mut total = p(x);
    for t in &set.members {
        total += p(&t.matmul(x)) + p(&x.matmul(t));
    }
    for t1 in &set.members {
        let left = t1.matmul(x);
        for t2 in &set.members {
            total += p(&left.matmul(t2));
        }
    }
    total
}

/// Tables of the scale norms for one element.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleReport {
    /// q_values[r][j].
    pub q_values: Vec<Vec<f64>>,
    /// p_values[j][k].
    pub p_values: Vec<Vec<f64>>,
    /// sobolev_p[r].
    pub sobolev_p: Vec<f64>,
}

impl ScaleReport {
    pub fn compute(a: &Op, xi: &[C64], r_max: usize, k_max: usize, set: &DerivationSet, base_norms: &[BaseNorm]) -> Self {
        let q_values = (0..=r_max)
            .map(|r| (0..base_norms.len()).map(|j| scale_norm_q(a, r, j, set, base_norms)).collect())
            .collect();
        let p_values = (0..base_norms.len())
            .map(|j| (0..=k_max).map(|k| semiideal_norm_p(a, j, k, set, base_norms)).collect())
            .collect();
        let sobolev_p = (0..=r_max).map(|r| sobolev_norm_p(xi, r, set)).collect();
        ScaleReport { q_values, p_values, sobolev_p }
    }

    /// q non-decreasing in r, p non-decreasing in k, everything finite.
    pub fn is_monotone(&self) -> bool {
        let finite = self.q_values.iter().flatten().chain(self.p_values.iter().flatten()).chain(&self.sobolev_p).all(|v| v.is_finite());
        let q_ok = self.q_values.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
        let p_ok = self.p_values.iter().all(|row| row.windows(2).all(|w| w[0] <= w[1]));
        let s_ok = self.sobolev_p.windows(2).all(|w| w[0] <= w[1]);
        finite && q_ok && p_ok && s_ok
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResidual {
    pub name: &'static str,
    /// ‖lhs − rhs‖_F divided by the summed norms of the terms.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub entries: Vec<IdentityResidual>,
}

impl IdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// The twelve product, module and semi-ideal identities of the ω-maps,
/// maximized over all generators (and generator pairs).
pub fn identity_suite(x: &Op, y: &Op, a: &Op, set: &DerivationSet) -> IdentityReport {
    let rel = |lhs: &Op, rhs: &[Op]| -> f64 {
        let mut sum = Op::zeros(lhs.dim());
        let mut scale = lhs.frobenius_norm();
        for term in rhs {
            sum += term;
            scale += term.frobenius_norm();
        }
        if scale == 0.0 {
            0.0
        } else {
            (lhs - &sum).frobenius_norm() / scale
        }
    };
    let minus_i = C64::new(0.0, -1.0);
    let xy = x.matmul(y);
    let ax = a.matmul(x);
    let xa = x.matmul(a);
    let xay = xa.matmul(y);

    let mut single: Vec<(&'static str, f64)> = vec![
        ("left(xy) = left(x) y", 0.0),
        ("right(xy) = x right(y)", 0.0),
        ("left(ax) = a left(x) - i delta(a) x", 0.0),
        ("left(xa) = left(x) a", 0.0),
        ("right(ax) = a right(x)", 0.0),
        ("right(xa) = right(x) a + i x delta(a)", 0.0),
        ("left(xay) = left(x) a y", 0.0),
        ("right(xay) = x a right(y)", 0.0),
    ];
    for t in set.members() {
        let d = delta(t, a);
        let left = |m: &Op| t.matmul(m);
        let right = |m: &Op| m.matmul(t);
        let values = [
            rel(&left(&xy), &[left(x).matmul(y)]),
            rel(&right(&xy), &[x.matmul(&right(y))]),
            rel(&left(&ax), &[a.matmul(&left(x)), d.matmul(x).scale(minus_i)]),
            rel(&left(&xa), &[left(x).matmul(a)]),
            rel(&right(&ax), &[a.matmul(&right(x))]),
            rel(&right(&xa), &[right(x).matmul(a), x.matmul(&d).scale(I)]),
            rel(&left(&xay), &[left(x).matmul(a).matmul(y)]),
            rel(&right(&xay), &[xa.matmul(&right(y))]),
        ];
        for (slot, v) in single.iter_mut().zip(values) {
            slot.1 = slot.1.max(v);
        }
    }

    let mut pair: Vec<(&'static str, f64)> = vec![
        ("both(xy) = left(x) right(y)", 0.0),
        ("both(ax) = a both(x) - i delta1(a) right2(x)", 0.0),
        ("both(xa) = both(x) a + i left1(x) delta2(a)", 0.0),
        ("both(xay) = left1(x) a right2(y)", 0.0),
    ];
    for t1 in set.members() {
        for t2 in set.members() {
            let both = |m: &Op| t1.matmul(m).matmul(t2);
            let d1 = delta(t1, a);
            let d2 = delta(t2, a);
            let values = [
                rel(&both(&xy), &[t1.matmul(x).matmul(&y.matmul(t2))]),
                rel(&both(&ax), &[a.matmul(&both(x)), d1.matmul(&x.matmul(t2)).scale(minus_i)]),
                rel(&both(&xa), &[both(x).matmul(a), t1.matmul(x).matmul(&d2).scale(I)]),
                rel(&both(&xay), &[t1.matmul(x).matmul(a).matmul(&y.matmul(t2))]),
            ];
            for (slot, v) in pair.iter_mut().zip(values) {
                slot.1 = slot.1.max(v);
            }
        }
    }

    let order = [0usize, 1, 8, 2, 4, 9, 3, 5, 10, 6, 7, 11];
    let all: Vec<(&'static str, f64)> = single.into_iter().chain(pair).collect();
    IdentityReport {
        entries: order.iter().map(|&i| IdentityResidual { name: all[i].0, residual: all[i].1 }).collect(),
    }
}

/// Membership residual of m in the algebra (see [`SubalgebraBasis::membership`]).
pub fn membership(m: &Op, algebra: &SubalgebraBasis) -> f64 {
    algebra.membership(m)
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    pub trials: usize,
    /// Samples whose inverse was checked (singular draws are skipped).
    pub global_checked: usize,
    pub global_violations: usize,
    pub global_max_residual: f64,
    pub local_violations: usize,
    pub local_max_membership: f64,
    pub local_max_limit_error: f64,
    pub local_max_terms: usize,
}

impl InvarianceReport {
    pub fn violations(&self) -> usize {
        self.global_violations + self.local_violations
    }
}

/// Global check: inverses of λI + x stay in the algebra. Local check: the
/// Neumann series of (I + x)^{-1} for ‖x‖ < ε has every partial sum in the
/// algebra and the right limit.
pub fn spectral_invariance_suite(algebra: &SubalgebraBasis, trials: usize, eps: f64, seed: u64) -> InvarianceReport {
    let unital = algebra.with_unit();
    let n = algebra.dim();
    let global: Vec<Option<f64>> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::trial_rng(seed, "invariance-global", trial);
            let x = algebra.sample(&mut rng);
            let lambda = uniform_complex(&mut rng) * 2.0;
            let a = x.shift(lambda);
            inverse(&a).ok().map(|inv| unital.membership(&inv))
        })
        .collect();
    let local: Vec<(f64, f64, usize)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = rng::trial_rng(seed, "invariance-local", trial);
            let raw = algebra.sample(&mut rng);
            let norm = crate::opcore::op_norm(&raw);
            if norm == 0.0 {
                return (0.0, 0.0, 0);
            }
            let target = eps * rand::Rng::gen_range(&mut rng, 0.1..0.999);
            let x = raw.scale_real(target / norm);
            let minus_x = x.scale_real(-1.0);
            let mut term = Op::identity(n);
            let mut partial = term.clone();
            let mut worst_membership = unital.membership(&partial);
            let mut terms = 1;
            while terms < 400 {
                term = term.matmul(&minus_x);
                partial += &term;
                terms += 1;
                worst_membership = worst_membership.max(unital.membership(&partial));
                if term.frobenius_norm() <= 1e-17 * partial.frobenius_norm() {
                    break;
                }
            }
            let exact = inverse(&x.shift(C64::new(1.0, 0.0))).expect("I + x with ‖x‖ < 1");
            let limit_error = (&partial - &exact).frobenius_norm() / exact.frobenius_norm();
            (worst_membership, limit_error, terms)
        })
        .collect();

    let tol = algebra.tol();
    let checked: Vec<f64> = global.iter().flatten().copied().collect();
    InvarianceReport {
        trials,
        global_checked: checked.len(),
        global_violations: checked.iter().filter(|&&r| r > tol).count(),
        global_max_residual: checked.iter().copied().fold(0.0, f64::max),
        local_violations: local.iter().filter(|(m, e, _)| *m > tol || *e > 1e-10).count(),
        local_max_membership: local.iter().map(|l| l.0).fold(0.0, f64::max),
        local_max_limit_error: local.iter().map(|l| l.1).fold(0.0, f64::max),
        local_max_terms: local.iter().map(|l| l.2).max().unwrap_or(0),
    }
}

/// Commutative model: B = functions on `points` points, J = functions
/// supported on `marked`, A = functions constant on each block, I = A ∩ J.
#[derive(Clone, Debug)]
pub struct CommutativeModel {
    points: usize,
    marked: Vec<bool>,
    blocks: Vec<Vec<usize>>,
    /// block_of[p] = index of the block containing p.
    block_of: Vec<usize>,
}

impl CommutativeModel {
    pub fn new(points: usize, marked: &[usize], blocks: Vec<Vec<usize>>) -> Result<Self> {
        if points == 0 {
            return Err(Error::BadModel("no points".into()));
        }
        let mut is_marked = vec![false; points];
        for &s in marked {
            if s >= points {
                return Err(Error::BadModel(format!("marked point {s} out of range")));
            }
            is_marked[s] = true;
        }
        let mut block_of = vec![usize::MAX; points];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::BadModel("empty block".into()));
            }
            for &p in block {
                if p >= points {
                    return Err(Error::BadModel(format!("block point {p} out of range")));
                }
                if block_of[p] != usize::MAX {
                    return Err(Error::BadModel(format!("point {p} lies in two blocks, so A is not closed under products")));
                }
                block_of[p] = b;
            }
        }
        if let Some(p) = block_of.iter().position(|&b| b == usize::MAX) {
            return Err(Error::BadModel(format!("point {p} is in no block")));
        }
        Ok(CommutativeModel { points, marked: is_marked, blocks, block_of })
    }

    /// `points` points split into consecutive blocks of `block_size`, with
    /// the last `marked` points in S.
    pub fn consecutive(points: usize, block_size: usize, marked_tail: usize) -> Result<Self> {
        if block_size == 0 || points % block_size != 0 {
            return Err(Error::BadModel("block size must divide the point count".into()));
        }
        let blocks = (0..points / block_size).map(|b| (b * block_size..(b + 1) * block_size).collect()).collect();
        let marked: Vec<usize> = (points.saturating_sub(marked_tail)..points).collect();
        Self::new(points, &marked, blocks)
    }

    /// Blocks lying entirely in S: exactly the support of I.
    fn ideal_block(&self, b: usize) -> bool {
        self.blocks[b].iter().all(|&p| self.marked[p])
    }

    fn sup(v: &[C64]) -> f64 {
        v.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Distance to block-constant functions, relative to max(‖v‖, 1).
    fn residual_in_a(&self, v: &[C64]) -> f64 {
        let mut worst: f64 = 0.0;
        for block in &self.blocks {
            let mean: C64 = block.iter().map(|&p| v[p]).sum::<C64>() / block.len() as f64;
            for &p in block {
                worst = worst.max((v[p] - mean).norm());
            }
        }
        worst / Self::sup(v).max(1.0)
    }

    /// Distance to I.
    fn residual_in_i(&self, v: &[C64]) -> f64 {
        let off_ideal = (0..self.points)
            .filter(|&p| !self.ideal_block(self.block_of[p]))
            .map(|p| v[p].norm())
            .fold(0.0, f64::max);
        off_ideal.max(self.residual_in_a(v) * Self::sup(v).max(1.0)) / Self::sup(v).max(1.0)
    }

    /// Distance to ℂe ⊕ I: constant off the ideal blocks, block-constant on them.
    fn residual_in_unitized_i(&self, v: &[C64]) -> f64 {
        let outside: Vec<usize> = (0..self.points).filter(|&p| !self.ideal_block(self.block_of[p])).collect();
        let mut worst: f64 = 0.0;
        if !outside.is_empty() {
            let mean: C64 = outside.iter().map(|&p| v[p]).sum::<C64>() / outside.len() as f64;
            for &p in &outside {
                worst = worst.max((v[p] - mean).norm());
            }
        }
        worst.max(self.residual_in_a(v) * Self::sup(v).max(1.0)) / Self::sup(v).max(1.0)
    }

    fn sample_a<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<C64> {
        let values: Vec<C64> = self.blocks.iter().map(|_| uniform_complex(rng)).collect();
        (0..self.points).map(|p| values[self.block_of[p]]).collect()
    }

    fn sample_i<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<C64> {
        let mut v = self.sample_a(rng);
        for p in 0..self.points {
            if !self.ideal_block(self.block_of[p]) {
                v[p] = C64::new(0.0, 0.0);
            }
        }
        v
    }

    /// I is dense in J (here: equal) when every marked point is a
    /// singleton block.
    pub fn ideal_dense(&self) -> bool {
        (0..self.points).filter(|&p| self.marked[p]).all(|p| self.blocks[self.block_of[p]].len() == 1)
    }

    /// A is dense in B (here: equal) when all blocks are singletons.
    pub fn algebra_dense(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub samples: usize,
    /// Samples for which the hypothesis held and a witness was verified.
    pub witnesses: usize,
    pub violations: usize,
    pub note: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferReport {
    pub properties: Vec<PropertyCheck>,
    pub ideal_dense: bool,
    pub algebra_dense: bool,
}

impl TransferReport {
    pub fn violations(&self) -> usize {
        self.properties.iter().map(|p| p.violations).sum()
    }
}

/// Samples the local and global invertibility properties of the
/// commutative ideal model and checks the implications between them.
pub fn ideal_transfer_demo(model: &CommutativeModel, samples: usize, seed: u64) -> TransferReport {
    const EPS: f64 = 0.5;
    const TOL: f64 = 1e-12;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let invert = |v: &[C64]| -> Option<Vec<C64>> {
        if v.iter().any(|z| z.norm() < 1e-12) {
            None
        } else {
            Some(v.iter().map(|z| one / z).collect())
        }
    };
    let mut p_i = PropertyCheck { name: "local inverse closure of C e + I", samples, witnesses: 0, violations: 0, note: "" };
    let mut p_tilde = PropertyCheck {
        name: "invertibility lifts from B/J to A/I",
        samples,
        witnesses: 0,
        violations: 0,
        note: "symmetric model: A and I are closed under conjugation",
    };
    let mut p_a = PropertyCheck { name: "local inverse closure of A", samples, witnesses: 0, violations: 0, note: "" };
    let mut p_a_global = PropertyCheck { name: "A is inverse-closed in B", samples, witnesses: 0, violations: 0, note: "" };
    let mut p_quot = PropertyCheck {
        name: "local inverse closure of A/I",
        samples,
        witnesses: 0,
        violations: 0,
        note: if model.ideal_dense() { "" } else { "I is not dense in J; implication hypothesis absent, checked directly" },
    };
    let mut p_c = PropertyCheck {
        name: "A local closure gives the lifting property",
        samples,
        witnesses: 0,
        violations: 0,
        note: if model.ideal_dense() && model.algebra_dense() { "" } else { "density hypotheses absent, checked directly" },
    };

    // A/I-inverse witness: 1/a off the ideal blocks, 0 on them.
    let quotient_witness = |a: &[C64]| -> Option<Vec<C64>> {
        let mut b = vec![zero; a.len()];
        for p in 0..a.len() {
            if !model.ideal_block(model.block_of[p]) {
                if a[p].norm() < 1e-12 {
                    return None;
                }
                b[p] = one / a[p];
            }
        }
        Some(b)
    };

    for s in 0..samples {
        let mut rng = rng::trial_rng(seed, "ideal-transfer", s);

        // ℂe ⊕ I, small perturbations of e.
        let x = model.sample_i(&mut rng);
        let scale = EPS * rand::Rng::gen_range(&mut rng, 0.0..0.999) / CommutativeModel::sup(&x).max(1e-300);
        let e_plus_x: Vec<C64> = x.iter().map(|z| one + z * scale).collect();
        if let Some(inv) = invert(&e_plus_x) {
            p_i.witnesses += 1;
            if model.residual_in_unitized_i(&inv) > TOL {
                p_i.violations += 1;
            }
        }

        // Elements of A, some vanishing on whole blocks inside S.
        let mut a = model.sample_a(&mut rng);
        for p in 0..model.points {
            if model.ideal_block(model.block_of[p]) && model.block_of[p] % 2 == s % 2 {
                a[p] = zero;
            }
        }
        let invertible_mod_j = (0..model.points).filter(|&p| !model.marked[p]).all(|p| a[p].norm() >= 1e-12);
        if invertible_mod_j {
            match quotient_witness(&a) {
                Some(b) => {
                    let ab_minus_e: Vec<C64> = a.iter().zip(&b).map(|(x, y)| x * y - one).collect();
                    if model.residual_in_a(&b) <= TOL && model.residual_in_i(&ab_minus_e) <= TOL {
                        p_tilde.witnesses += 1;
                        p_c.witnesses += 1;
                    } else {
                        p_tilde.violations += 1;
                        p_c.violations += 1;
                    }
                }
                None => {
                    p_tilde.violations += 1;
                    p_c.violations += 1;
                }
            }
        }

        // Local closure of A near e.
        let y = model.sample_a(&mut rng);
        let scale = EPS * rand::Rng::gen_range(&mut rng, 0.0..0.999) / CommutativeModel::sup(&y).max(1e-300);
        let e_plus_y: Vec<C64> = y.iter().map(|z| one + z * scale).collect();
        if let Some(inv) = invert(&e_plus_y) {
            p_a.witnesses += 1;
            if model.residual_in_a(&inv) > TOL {
                p_a.violations += 1;
            }
        }

        // Global inverse closure of A.
        let g = model.sample_a(&mut rng);
        if let Some(inv) = invert(&g) {
            p_a_global.witnesses += 1;
            if model.residual_in_a(&inv) > TOL {
                p_a_global.violations += 1;
            }
        }

        // Quotient A/I near e, measured in the quotient norm of B/J.
        let z = model.sample_a(&mut rng);
        let off_s_sup = (0..model.points).filter(|&p| !model.marked[p]).map(|p| z[p].norm()).fold(0.0, f64::max);
        let scale = if off_s_sup > 0.0 { EPS * rand::Rng::gen_range(&mut rng, 0.0..0.999) / off_s_sup } else { 1.0 };
        let e_plus_z: Vec<C64> = z.iter().map(|w| one + w * scale).collect();
        match quotient_witness(&e_plus_z) {
            Some(b) => {
                let prod_minus_e: Vec<C64> = e_plus_z.iter().zip(&b).map(|(x, y)| x * y - one).collect();
                if model.residual_in_a(&b) <= TOL && model.residual_in_i(&prod_minus_e) <= TOL {
                    p_quot.witnesses += 1;
                } else {
                    p_quot.violations += 1;
                }
            }
            None => p_quot.violations += 1,
        }
    }

    TransferReport {
        properties: vec![p_i, p_tilde, p_a, p_a_global, p_quot, p_c],
        ideal_dense: model.ideal_dense(),
        algebra_dense: model.algebra_dense(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opcore::op_norm;
    use crate::rng::seeded;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn t_diag12() -> DerivationSet {
        DerivationSet::new(vec![Op::diag_real(&[1.0, 2.0])]).unwrap()
    }

    fn nil2() -> Op {
        Op::from_real(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    #[test]
    fn delta_examples() {
        let t = Op::diag_real(&[1.0, 2.0]);
        assert!(delta(&t, &Op::identity(2)).is_zero());
        assert!(delta(&t, &Op::diag_real(&[3.0, -1.0])).is_zero());
        let d = delta(&t, &nil2());
        let expected = Op::from_real(&[&[0.0, -1.0], &[0.0, 0.0]]).scale(I);
        assert!((&d - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn delta_commutes_with_adjoint() {
        let mut r = seeded(3);
        let t = Op::random_hermitian(5, &mut r);
        let a = Op::random(5, &mut r);
        assert_eq!(delta(&t, &a.adjoint()), delta(&t, &a).adjoint());
    }

    #[test]
    fn scale_norm_examples() {
        let set = t_diag12();
        let norms = [BaseNorm::Operator];
        let a = nil2();
        assert_eq!(scale_norm_q(&a, 0, 0, &set, &norms), op_norm(&a));
        assert!((scale_norm_q(&a, 1, 0, &set, &norms) - 2.0).abs() < 1e-14);
        let commuting = Op::diag_real(&[2.0, 5.0]);
        for r in 0..4 {
            assert_eq!(scale_norm_q(&commuting, r, 0, &set, &norms), op_norm(&commuting));
        }
    }

    #[test]
    fn sobolev_examples() {
        let xi = [c(3.0), c(4.0)];
        let zero = DerivationSet::new(vec![Op::zeros(2)]).unwrap();
        let unit = DerivationSet::new(vec![Op::identity(2)]).unwrap();
        assert_eq!(sobolev_norm_p(&xi, 0, &unit), 5.0);
        assert_eq!(sobolev_norm_p(&xi, 3, &zero), 5.0);
        assert_eq!(sobolev_norm_p(&xi, 3, &unit), 40.0);
    }

    #[test]
    fn omega_examples() {
        let t = Op::diag_real(&[1.0, 2.0]);
        let x = nil2();
        let (tx, xt, _) = omega_maps(&x, &t, &t, &t);
        assert_eq!(tx, nil2());
        assert_eq!(xt, Op::from_real(&[&[0.0, 2.0], &[0.0, 0.0]]));
        let id = Op::identity(2);
        assert_eq!(omega_maps(&x, &id, &id, &id), (x.clone(), x.clone(), x));
        let (a, b, cc) = omega_maps(&Op::zeros(2), &t, &t, &t);
        assert!(a.is_zero() && b.is_zero() && cc.is_zero());
    }

    #[test]
    fn semiideal_norm_examples() {
        let unit = DerivationSet::new(vec![Op::identity(3)]).unwrap();
        let norms = [BaseNorm::Operator];
        let mut r = seeded(9);
        let x = Op::random(3, &mut r);
        let p1 = semiideal_norm_p(&x, 0, 1, &unit, &norms);
        assert!((p1 - 4.0 * op_norm(&x)).abs() < 1e-12 * p1);
        assert_eq!(semiideal_norm_p(&Op::zeros(3), 0, 2, &unit, &norms), 0.0);
    }

    #[test]
    fn identity_suite_on_random_data() {
        let mut r = seeded(11);
        let set = DerivationSet::new(vec![Op::random_hermitian(4, &mut r), Op::random_hermitian(4, &mut r)]).unwrap();
        let (x, y, a) = (Op::random(4, &mut r), Op::random(4, &mut r), Op::random(4, &mut r));
        let report = identity_suite(&x, &y, &a, &set);
        assert_eq!(report.entries.len(), 12);
        assert!(report.passed(1e-13), "{report:?}");
    }

    #[test]
    fn wrong_sign_is_detected() {
        // xaT - xTa has the opposite sign to -i x δ_T(a).
        let mut r = seeded(12);
        let t = Op::random_hermitian(3, &mut r);
        let (x, a) = (Op::random(3, &mut r), Op::random(3, &mut r));
        let lhs = x.matmul(&a).matmul(&t);
        let wrong = &x.matmul(&t).matmul(&a) + &x.matmul(&delta(&t, &a)).scale(C64::new(0.0, -1.0));
        assert!((&lhs - &wrong).frobenius_norm() > 1e-3);
    }

    #[test]
    fn membership_examples() {
        let ut = SubalgebraBasis::upper_triangular(3);
        assert!(ut.membership(&Op::unit(3, 0, 2)) <= 1e-14);
        assert!((ut.membership(&Op::unit(3, 2, 0).scale_real(2.0)) - 1.0).abs() < 1e-14);
        let m = &Op::unit(3, 0, 1).scale_real(5.0) + &Op::unit(3, 1, 0).scale_real(1e-3);
        let expected = 1e-3 / m.frobenius_norm();
        assert!((ut.membership(&m) - expected).abs() < 1e-12);
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let basis = vec![Op::unit(2, 0, 0), Op::unit(2, 0, 0).scale_real(2.0)];
        assert!(matches!(SubalgebraBasis::new(2, basis, false), Err(Error::BadBasis(_))));
        let not_closed = vec![Op::unit(2, 0, 1), Op::unit(2, 1, 0)];
        assert!(matches!(SubalgebraBasis::new(2, not_closed, false), Err(Error::BadBasis(_))));
    }

    #[test]
    fn symmetrization_of_triangular_is_diagonal() {
        let sym = SubalgebraBasis::upper_triangular(3).symmetrized().unwrap();
        assert_eq!(sym.span_dim(), 3);
        assert!(sym.membership(&Op::diag_real(&[1.0, -2.0, 4.0])) < 1e-12);
        assert!(sym.membership(&Op::unit(3, 0, 1)) > 0.5);

        let nil = SubalgebraBasis::new(2, vec![nil2()], true).unwrap();
        assert_eq!(nil.symmetrized().unwrap().span_dim(), 1);
    }

    #[test]
    fn invariance_suites() {
        let ut = SubalgebraBasis::upper_triangular(3).set_tol(1e-9);
        let report = spectral_invariance_suite(&ut, 100, 0.4, 1);
        assert_eq!(report.violations(), 0, "{report:?}");
        assert!(report.global_max_residual <= 1e-9);

        let diag = SubalgebraBasis::diagonal(4);
        let report = spectral_invariance_suite(&diag, 50, 0.4, 2);
        assert_eq!(report.violations(), 0);
        assert!(report.global_max_residual < 1e-14);

        let nil = SubalgebraBasis::new(2, vec![nil2()], true).unwrap();
        let lambda = c(3.0);
        let inv = inverse(&nil2().shift(lambda)).unwrap();
        let closed_form = &Op::identity(2).scale(1.0 / lambda) - &nil2().scale(1.0 / (lambda * lambda));
        assert!((&inv - &closed_form).max_abs() < 1e-15);
        assert_eq!(spectral_invariance_suite(&nil, 30, 0.4, 3).violations(), 0);
    }

    #[test]
    fn full_algebra_is_trivially_invariant() {
        let report = spectral_invariance_suite(&SubalgebraBasis::full(3), 20, 0.4, 4);
        assert_eq!(report.violations(), 0);
    }

    #[test]
    fn transfer_demo_examples() {
        let model = CommutativeModel::consecutive(12, 3, 4).unwrap();
        let report = ideal_transfer_demo(&model, 200, 5);
        assert_eq!(report.violations(), 0, "{report:?}");
        assert!(report.properties.iter().all(|p| p.witnesses > 0));

        let empty = CommutativeModel::consecutive(12, 3, 0).unwrap();
        assert_eq!(ideal_transfer_demo(&empty, 50, 6).violations(), 0);

        let singletons = CommutativeModel::consecutive(6, 1, 2).unwrap();
        let report = ideal_transfer_demo(&singletons, 50, 7);
        assert!(report.algebra_dense && report.ideal_dense);
        assert_eq!(report.violations(), 0);
    }

    #[test]
    fn overlapping_blocks_are_rejected() {
        let err = CommutativeModel::new(3, &[2], vec![vec![0, 1], vec![1, 2]]).unwrap_err();
        assert!(matches!(err, Error::BadModel(_)));
    }
}
