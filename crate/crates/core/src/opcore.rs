//! Dense complex matrices: the finite-dimensional stand-in for bounded
//! operators on a Hilbert space.
//!
//! Everything here is deliberately small and self-contained: LU with partial
//! pivoting for solves, cyclic Jacobi rotations for Hermitian eigenproblems,
//! and power iteration for operator norms. The Jacobi solver is the trusted
//! oracle the rest of the crate is checked against.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{self, uniform_complex};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct Op {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Op({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Op {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "operator dimension must be positive");
        Op { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, C64::new(1.0, 0.0))
    }

    pub fn scalar(dim: usize, c: C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Op { dim, data })
    }

    /// Builds a matrix from real rows. Panics if the rows are ragged.
    pub fn from_real(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        Self::from_fn(n, |i, j| {
            assert_eq!(rows[i].len(), n, "rows must form a square matrix");
            C64::new(rows[i][j], 0.0)
        })
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let v: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&v)
    }

    /// Matrix unit e_{ij}.
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = C64::new(1.0, 0.0);
        m
    }

    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        Self::from_fn(dim, |_, _| uniform_complex(rng))
    }

    pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let a = Self::random(dim, rng);
        (&a + &a.adjoint()).scale(C64::new(0.5, 0.0))
    }

    /// Random unitary: the eigenvector matrix of a random Hermitian matrix.
    pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let h = Self::random_hermitian(dim, rng);
        hermitian_eig(&h).expect("random Hermitian matrix").vectors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Op { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Op { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// A + c·I.
    pub fn shift(&self, c: C64) -> Self {
        let mut m = self.clone();
        for i in 0..self.dim {
            m[(i, i)] += c;
        }
        m
    }

    pub fn matmul(&self, rhs: &Op) -> Op {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Op::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// A^H x without forming the adjoint.
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        let mut out = vec![C64::new(0.0, 0.0); self.dim];
        for (i, xi) in x.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * xi;
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Hilbert–Schmidt inner product tr(A^H B).
    pub fn hs_inner(&self, other: &Op) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max column sum (induced 1-norm).
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Max row sum (induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// ‖A − A^H‖_F / ‖A‖_F (0 for the zero matrix).
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.frobenius_norm();
        if scale == 0.0 {
            return 0.0;
        }
        (self - &self.adjoint()).frobenius_norm() / scale
    }

    /// ‖AA^H − A^H A‖_F relative to ‖A‖_F².
    pub fn normality_defect(&self) -> f64 {
        let scale = self.frobenius_norm().powi(2);
        if scale == 0.0 {
            return 0.0;
        }
        let a_h = self.adjoint();
        (&self.matmul(&a_h) - &a_h.matmul(self)).frobenius_norm() / scale
    }

    /// AB − BA.
    pub fn commutator(&self, other: &Op) -> Op {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn pow(&self, k: u32) -> Op {
        let mut out = Op::identity(self.dim);
        for _ in 0..k {
            out = out.matmul(self);
        }
        out
    }
}

impl Index<(usize, usize)> for Op {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Op {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &Op {
    type Output = Op;
    fn add(self, rhs: &Op) -> Op {
        assert_eq!(self.dim, rhs.dim);
        Op { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &Op {
    type Output = Op;
    fn sub(self, rhs: &Op) -> Op {
        assert_eq!(self.dim, rhs.dim);
        Op { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl Mul for &Op {
    type Output = Op;
    fn mul(self, rhs: &Op) -> Op {
        self.matmul(rhs)
    }
}

impl Neg for &Op {
    type Output = Op;
    fn neg(self) -> Op {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&Op> for Op {
    fn add_assign(&mut self, rhs: &Op) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

/// Norm functionals used as base norms of the commutator scales and for
/// spectral-radius sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseNorm {
    Operator,
    Frobenius,
    SupEntry,
}

impl BaseNorm {
    pub fn apply(self, a: &Op) -> f64 {
        match self {
            BaseNorm::Operator => op_norm(a),
            BaseNorm::Frobenius => a.frobenius_norm(),
            BaseNorm::SupEntry => a.max_abs(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            BaseNorm::Operator => "operator",
            BaseNorm::Frobenius => "frobenius",
            BaseNorm::SupEntry => "sup_entry",
        }
    }
}

/// Solves AX = B by LU factorization with partial pivoting.
pub fn solve(a: &Op, b: &Op) -> Result<Op> {
    let lu = Lu::factor(a)?;
    Ok(lu.solve(b))
}

pub fn inverse(a: &Op) -> Result<Op> {
    solve(a, &Op::identity(a.dim()))
}

/// PA = LU, packed in place.
pub struct Lu {
    lu: Op,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Op) -> Result<Lu> {
        let n = a.dim();
        let threshold = n as f64 * f64::EPSILON * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (pivot_row, pivot_abs) = (col..n)
                .map(|r| (r, lu[(r, col)].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= threshold {
                return Err(Error::SingularMatrix { column: col, pivot: pivot_abs });
            }
            if pivot_row != col {
                for j in 0..n {
                    lu.data.swap(col * n + j, pivot_row * n + j);
                }
                perm.swap(col, pivot_row);
            }
            let pivot = lu[(col, col)];
            for r in col + 1..n {
                let factor = lu[(r, col)] / pivot;
                lu[(r, col)] = factor;
                if factor.re == 0.0 && factor.im == 0.0 {
                    continue;
                }
                for j in col + 1..n {
                    let u = lu[(col, j)];
                    lu[(r, j)] -= factor * u;
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve_vec(&self, b: &[C64]) -> Vec<C64> {
        let n = self.lu.dim();
        let mut x: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.lu[(i, k)] * x[k];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, b: &Op) -> Op {
        let n = self.lu.dim();
        assert_eq!(b.dim(), n);
        let mut out = Op::zeros(n);
        for j in 0..n {
            let x = self.solve_vec(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub values: Vec<f64>,
    /// Unitary; column k is the eigenvector of `values[k]`.
    pub vectors: Op,
}

impl HermitianEig {
    /// V f(Λ) V^H for a scalar function of the eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> C64) -> Op {
        let n = self.values.len();
        let v = &self.vectors;
        let fv: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        Op::from_fn(n, |i, j| (0..n).map(|k| v[(i, k)] * fv[k] * v[(j, k)].conj()).sum())
    }
}

const JACOBI_SWEEPS: usize = 30;

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
pub fn hermitian_eig(h: &Op) -> Result<HermitianEig> {
    let asymmetry = h.hermitian_defect();
    if asymmetry > 1e-10 {
        return Err(Error::NotHermitian { asymmetry });
    }
    let n = h.dim();
    let mut a = (h + &h.adjoint()).scale_real(0.5);
    let mut v = Op::identity(n);
    let scale = a.frobenius_norm();
    let mut converged = n == 1 || scale == 0.0;

    for _ in 0..JACOBI_SWEEPS {
        if converged {
            break;
        }
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // G = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = phase.conj() * (-s);
                let g_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * g_pp + akq * g_qp;
                    a[(k, q)] = akp * g_pq + akq * g_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
            }
        }
    }
    if !converged {
        let off: f64 = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off > 1e-12 * scale {
            return Err(Error::NonConvergence { what: "Jacobi eigensolver", iterations: JACOBI_SWEEPS });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = Op::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

/// Largest singular value. Power iteration on A^H A; falls back to the
/// Jacobi oracle when the leading singular pair is too degenerate for the
/// iteration to settle within its cap.
pub fn op_norm(a: &Op) -> f64 {
    let n = a.dim();
    match power_op_norm(a, 1e-12, 10 * n * n) {
        Ok(v) => v,
        Err(_) => {
            let gram = a.adjoint().matmul(a);
            let eig = hermitian_eig(&gram).expect("A^H A is Hermitian");
            eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
        }
    }
}

/// Power iteration for the largest singular value, stopping once the
/// Rayleigh quotient of A^H A changes by less than `rel_tol` (relative).
pub fn power_op_norm(a: &Op, rel_tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.dim();
    if a.is_zero() {
        return Ok(0.0);
    }
    let mut start = rng::seeded(0x5eed_0000 ^ n as u64);
    let mut x: Vec<C64> = (0..n).map(|_| uniform_complex(&mut start)).collect();
    normalize(&mut x);
    let mut previous = f64::NAN;
    for _ in 0..max_iter.max(2) {
        let y = a.matvec(&x);
        let rayleigh: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        let mut z = a.adjoint_matvec(&y);
        if normalize(&mut z) == 0.0 {
            return Ok(0.0);
        }
        x = z;
        if (rayleigh - previous).abs() <= rel_tol * rayleigh {
            return Ok(rayleigh.sqrt());
        }
        previous = rayleigh;
    }
    Err(Error::NonConvergence { what: "power iteration", iterations: max_iter })
}

/// Largest singular value by Lanczos on A^H A with full
/// reorthogonalization, for matrices too large for the Jacobi fallback.
/// The Ritz value never exceeds the true norm.
pub fn op_norm_estimate(a: &Op) -> f64 {
    if a.is_zero() {
        return 0.0;
    }
    op_norm_estimate_with(a.dim(), |x| a.matvec(x), |y| a.adjoint_matvec(y))
}

/// As [`op_norm_estimate`], for an operator given by its action and the
/// action of its adjoint on vectors of length `dim`.
pub fn op_norm_estimate_with(
    dim: usize,
    apply: impl Fn(&[C64]) -> Vec<C64>,
    apply_adjoint: impl Fn(&[C64]) -> Vec<C64>,
) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let max_steps = dim.min(400);
    let mut start = rng::seeded(0x5eed_0000 ^ dim as u64);
    let mut q: Vec<C64> = (0..dim).map(|_| uniform_complex(&mut start)).collect();
    normalize(&mut q);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    for step in 0..max_steps {
        let mut w = apply_adjoint(&apply(&q));
        alpha.push(dot(&q, &w).re);
        basis.push(q);
        // Two passes of classical Gram–Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let next = normalize(&mut w);
        let previous = theta;
        theta = tridiagonal_max_eig(&alpha, &beta);
        if next <= 1e-14 * theta.max(f64::MIN_POSITIVE) {
            break;
        }
        if step >= 4 && (theta - previous).abs() <= 1e-14 * theta {
            break;
        }
        beta.push(next);
        q = w;
    }
    theta.max(0.0).sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Largest eigenvalue of the symmetric tridiagonal matrix with diagonal
/// `alpha` and off-diagonal `beta`, by Sturm-sequence bisection.
fn tridiagonal_max_eig(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let off = |i: usize| if i < beta.len() { beta[i].abs() } else { 0.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = off(i) + if i > 0 { off(i - 1) } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    // Number of eigenvalues below x.
    let below = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..n {
            let b2 = if i > 0 { off(i - 1).powi(2) } else { 0.0 };
            d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-16 * hi.abs().max(lo.abs()) || mid == lo || mid == hi {
            break;
        }
        if below(mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn normalize(x: &mut [C64]) -> f64 {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in x.iter_mut() {
            *z /= norm;
        }
    }
    norm
}

/// Sequence of n-th roots of the norms of successive powers.
#[derive(Clone, Debug, PartialEq)]
pub struct NormSeq {
    /// values[n] = ‖a^{n+1}‖^{1/(n+1)}.
    pub values: Vec<f64>,
    pub norm_tag: String,
}

impl NormSeq {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("norm sequence is never empty")
    }
}

/// ‖aⁿ‖^{1/n} for n = 1..=count, with powers formed by repeated
/// multiplication.
pub fn spectral_radius_seq(
    a: &Op,
    norm: impl Fn(&Op) -> f64,
    norm_tag: &str,
    count: usize,
) -> Result<NormSeq> {
    if count == 0 {
        return Err(Error::InvalidArgument("spectral radius sequence needs at least one power".into()));
    }
    let mut values = Vec::with_capacity(count);
    let mut power = a.clone();
    for n in 1..=count {
        if n > 1 {
            power = power.matmul(a);
        }
        let v = norm(&power);
        if !v.is_finite() {
            return Err(Error::Overflow { power: n });
        }
        values.push(v.powf(1.0 / n as f64));
    }
    Ok(NormSeq { values, norm_tag: norm_tag.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_well_conditioned(n: usize, seed: u64) -> Op {
        let mut r = seeded(seed);
        Op::random(n, &mut r).shift(c(3.0 * n as f64 / 2.0))
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let mut r = seeded(1);
        let b = Op::random(2, &mut r);
        let x = solve(&Op::identity(2), &b).unwrap();
        assert!((&x - &b).max_abs() < 1e-15);
    }

    #[test]
    fn diagonal_solve() {
        let x = solve(&Op::diag_real(&[2.0, 4.0]), &Op::identity(2)).unwrap();
        assert!((&x - &Op::diag_real(&[0.5, 0.25])).max_abs() < 1e-15);
    }

    #[test]
    fn random_solve_residual() {
        let a = random_well_conditioned(8, 2);
        let x = inverse(&a).unwrap();
        let residual = (&a.matmul(&x) - &Op::identity(8)).frobenius_norm();
        assert!(residual <= 1e-12, "residual {residual}");
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = Op::from_real(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(matches!(solve(&a, &Op::identity(2)), Err(Error::SingularMatrix { .. })));
        assert!(matches!(inverse(&Op::zeros(3)), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn eig_of_diagonal() {
        let e = hermitian_eig(&Op::diag_real(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        assert!((&e.vectors - &Op::identity(3)).max_abs() < 1e-15);
    }

    #[test]
    fn eig_of_swap() {
        let e = hermitian_eig(&Op::from_real(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_residual_on_random_hermitian() {
        for seed in 0..10 {
            let mut r = seeded(seed);
            let h = Op::random_hermitian(8, &mut r);
            let e = hermitian_eig(&h).unwrap();
            let lambda = Op::diag_real(&e.values);
            let residual = (&h.matmul(&e.vectors) - &e.vectors.matmul(&lambda)).frobenius_norm();
            assert!(residual <= 1e-10 * op_norm(&h), "residual {residual}");
            let unitarity = (&e.vectors.matmul(&e.vectors.adjoint()) - &Op::identity(8)).frobenius_norm();
            assert!(unitarity <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = Op::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&Op::identity(5)) - 1.0).abs() < 1e-14);
        assert!((op_norm(&Op::from_real(&[&[0.0, 3.0], &[0.0, 0.0]])) - 3.0).abs() < 1e-14);
        assert_eq!(op_norm(&Op::zeros(3)), 0.0);
    }

    #[test]
    fn op_norm_matches_eig_oracle() {
        for seed in 0..20 {
            let mut r = seeded(100 + seed);
            let a = Op::random(6, &mut r);
            let gram = a.adjoint().matmul(&a);
            let oracle = hermitian_eig(&gram).unwrap().values.last().unwrap().sqrt();
            let got = op_norm(&a);
            assert!(((got - oracle) / oracle).abs() <= 1e-8, "{got} vs {oracle}");
        }
    }

    #[test]
    fn lanczos_estimate_matches_eig_oracle() {
        for seed in 0..10 {
            let mut r = seeded(300 + seed);
            let a = Op::random(3 + seed as usize * 4, &mut r);
            let gram = a.adjoint().matmul(&a);
            let oracle = hermitian_eig(&gram).unwrap().values.last().unwrap().sqrt();
            let got = op_norm_estimate(&a);
            assert!(got <= oracle * (1.0 + 1e-12));
            assert!(((got - oracle) / oracle).abs() <= 1e-10, "{got} vs {oracle}");
        }
        assert_eq!(op_norm_estimate(&Op::zeros(4)), 0.0);
        assert!((op_norm_estimate(&Op::identity(7)) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radius_of_diagonal_and_nilpotent() {
        let a = Op::diag_real(&[0.5, 0.25]);
        let seq = spectral_radius_seq(&a, |m| m.max_abs(), "sup_entry", 20).unwrap();
        assert!((seq.last() - 0.5).abs() < 1e-14);

        let nil = Op::from_real(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let seq = spectral_radius_seq(&nil, op_norm, "operator", 4).unwrap();
        assert_eq!(seq.values[1], 0.0);
    }

    #[test]
    fn radius_of_triangular_approaches_dominant_eigenvalue() {
        // Eigenvalues 0.9 and 0.3 from the diagonal of the triangular matrix.
        let a = Op::from_real(&[&[0.9, 1.0], &[0.0, 0.3]]);
        let seq = spectral_radius_seq(&a, op_norm, "operator", 64).unwrap();
        assert!((seq.last() - 0.9).abs() / 0.9 < 0.05, "{}", seq.last());
        assert!(seq.last() <= op_norm(&a) * (1.0 + 1e-8));
    }

    #[test]
    fn radius_overflow_is_reported() {
        let a = Op::diag_real(&[1e200]);
        let err = spectral_radius_seq(&a, |m| m.max_abs(), "sup_entry", 3).unwrap_err();
        assert_eq!(err, Error::Overflow { power: 2 });
    }

    #[test]
    fn adjoint_involution_and_norm_symmetry() {
        let mut r = seeded(5);
        let a = Op::random(7, &mut r);
        assert_eq!(a.adjoint().adjoint(), a);
        let n1 = op_norm(&a);
        let n2 = op_norm(&a.adjoint());
        assert!((n1 - n2).abs() <= 1e-10 * n1);
    }
}
