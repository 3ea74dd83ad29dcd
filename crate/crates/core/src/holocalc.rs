//! Holomorphic functional calculus by trapezoid quadrature of the resolvent
//! on circles, spectral projections and Moore–Penrose inverses.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::opcore::{hermitian_eig, op_norm, solve, Lu, Op, C64};
use crate::psistar::SubalgebraBasis;

/// Positively oriented circle discretized by `nodes` equispaced points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Contour {
    pub center: C64,
    pub radius: f64,
    pub nodes: usize,
}

pub const MIN_NODES: usize = 16;
pub const DEFAULT_NODES: usize = 64;
const RESOLVENT_LIMIT: f64 = 1e12;

impl Contour {
    pub fn new(center: C64, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("contour radius must be positive, got {radius}")));
        }
        if nodes < MIN_NODES {
            return Err(Error::InvalidArgument(format!("contour needs at least {MIN_NODES} nodes, got {nodes}")));
        }
        Ok(Contour { center, radius, nodes })
    }

    pub fn circle(center: C64, radius: f64) -> Result<Self> {
        Self::new(center, radius, DEFAULT_NODES)
    }

    pub fn with_nodes(self, nodes: usize) -> Result<Self> {
        Self::new(self.center, self.radius, nodes)
    }

    pub fn node(&self, j: usize) -> C64 {
        let theta = 2.0 * PI * j as f64 / self.nodes as f64;
        self.center + C64::from_polar(self.radius, theta)
    }

    /// Trapezoid approximation of ∮ g(z) dz.
    pub fn integrate(&self, g: impl Fn(C64) -> C64) -> C64 {
        let i_dtheta = C64::new(0.0, 2.0 * PI / self.nodes as f64);
        (0..self.nodes)
            .map(|j| {
                let z = self.node(j);
                g(z) * (z - self.center) * i_dtheta
            })
            .sum()
    }

    /// Whether w lies strictly inside the circle.
    pub fn encloses(&self, w: C64) -> bool {
        (w - self.center).norm() < self.radius
    }

    /// Distance from w to the circle.
    pub fn distance(&self, w: C64) -> f64 {
        ((w - self.center).norm() - self.radius).abs()
    }

    /// Doubles the node count until the f ≡ 1 calculus of `a` reproduces
    /// the identity to `tol`. Only meaningful when the spectrum is enclosed.
    pub fn calibrate(self, a: &Op, tol: f64, max_nodes: usize) -> Result<Self> {
        let mut contour = self;
        loop {
            let unit = cauchy_calc(a, &HoloFn::one(), &contour)?;
            if (&unit - &Op::identity(a.dim())).frobenius_norm() <= tol || contour.nodes * 2 > max_nodes {
                return Ok(contour);
            }
            contour = contour.with_nodes(contour.nodes * 2)?;
        }
    }
}

type ComplexFn = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A holomorphic function together with its derivative.
#[derive(Clone)]
pub struct HoloFn {
    eval: ComplexFn,
    deriv: ComplexFn,
}

impl fmt::Debug for HoloFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("HoloFn")
    }
}

impl HoloFn {
    pub fn new(
        eval: impl Fn(C64) -> C64 + Send + Sync + 'static,
        deriv: impl Fn(C64) -> C64 + Send + Sync + 'static,
    ) -> Self {
        HoloFn { eval: Arc::new(eval), deriv: Arc::new(deriv) }
    }

    pub fn eval(&self, z: C64) -> C64 {
        (self.eval)(z)
    }

    pub fn deriv(&self, z: C64) -> C64 {
        (self.deriv)(z)
    }

    pub fn one() -> Self {
        Self::new(|_| C64::new(1.0, 0.0), |_| C64::new(0.0, 0.0))
    }

    pub fn identity() -> Self {
        Self::new(|z| z, |_| C64::new(1.0, 0.0))
    }

    pub fn exp() -> Self {
        Self::new(|z| z.exp(), |z| z.exp())
    }

    pub fn power(k: i32) -> Self {
        Self::new(move |z| z.powi(k), move |z| if k == 0 { C64::new(0.0, 0.0) } else { z.powi(k - 1) * k as f64 })
    }

    /// 1/(c − z).
    pub fn resolvent_at(c: C64) -> Self {
        Self::new(move |z| 1.0 / (c - z), move |z| 1.0 / ((c - z) * (c - z)))
    }

    /// z/(c − z), vanishing at 0.
    pub fn z_over_shift(c: C64) -> Self {
        Self::new(move |z| z / (c - z), move |z| c / ((c - z) * (c - z)))
    }

    pub fn product(&self, other: &HoloFn) -> Self {
        let (f, g) = (self.clone(), other.clone());
        let (f2, g2) = (self.clone(), other.clone());
        Self::new(move |z| f.eval(z) * g.eval(z), move |z| f2.deriv(z) * g2.eval(z) + f2.eval(z) * g2.deriv(z))
    }

    /// Largest deviation between `deriv` and a central difference of `eval`
    /// with step `h`, relative to max(|deriv|, 1).
    pub fn derivative_defect(&self, points: &[C64], h: f64) -> f64 {
        points
            .iter()
            .map(|&z| {
                let fd = (self.eval(z + h) - self.eval(z - h)) / (2.0 * h);
                let d = self.deriv(z);
                (fd - d).norm() / d.norm().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Resolvent (zI − A)^{-1} at a node, rejecting nodes too close to the
/// spectrum.
fn resolvent(a: &Op, z: C64, node: usize) -> Result<Op> {
    let shifted = a.scale_real(-1.0).shift(z);
    let lu = Lu::factor(&shifted).map_err(|_| Error::ContourTooClose { node, resolvent_norm: f64::INFINITY })?;
    let r = lu.solve(&Op::identity(a.dim()));
    // √(‖R‖₁‖R‖∞) bounds ‖R‖₂ from above; refine only when it trips.
    let cheap = (r.norm_one() * r.norm_inf()).sqrt();
    if cheap > RESOLVENT_LIMIT {
        let exact = op_norm(&r);
        if exact > RESOLVENT_LIMIT {
            return Err(Error::ContourTooClose { node, resolvent_norm: exact });
        }
    }
    Ok(r)
}

/// Eigenvalue distance check for Hermitian input small enough for Jacobi.
fn check_hermitian_spectrum(a: &Op, gamma: &Contour) -> Result<()> {
    if a.dim() > 128 || a.hermitian_defect() > 1e-12 {
        return Ok(());
    }
    let eig = hermitian_eig(a)?;
    for &l in &eig.values {
        let d = gamma.distance(C64::new(l, 0.0));
        if d < 1e-8 * gamma.radius {
            let node = (0..gamma.nodes)
                .min_by(|&i, &j| (gamma.node(i) - l).norm().total_cmp(&(gamma.node(j) - l).norm()))
                .unwrap_or(0);
            return Err(Error::ContourTooClose { node, resolvent_norm: 1.0 / d.max(f64::MIN_POSITIVE) });
        }
    }
    Ok(())
}

/// Σ_j w(z_j) (z_j I − A)^{-1} (z_j − c)/N, summed in node order.
fn contour_sum(a: &Op, gamma: &Contour, weight: impl Fn(C64) -> C64 + Sync) -> Result<Op> {
    check_hermitian_spectrum(a, gamma)?;
    let n = gamma.nodes as f64;
    let terms: Vec<Result<Op>> = (0..gamma.nodes)
        .into_par_iter()
        .map(|j| {
            let z = gamma.node(j);
            let r = resolvent(a, z, j)?;
            Ok(r.scale(weight(z) * (z - gamma.center) / n))
        })
        .collect();
    let mut total = Op::zeros(a.dim());
    for term in terms {
        total += &term?;
    }
    Ok(total)
}

/// f(A) = (1/2πi) ∮ f(z)(zI − A)^{-1} dz by the trapezoid rule.
pub fn cauchy_calc(a: &Op, f: &HoloFn, gamma: &Contour) -> Result<Op> {
    contour_sum(a, gamma, |z| f.eval(z))
}

/// Single column f(A)e_col, one LU solve per node instead of a full inverse.
/// Meant for large matrices where only one kernel read-off is needed.
pub fn cauchy_calc_column(a: &Op, f: &HoloFn, gamma: &Contour, col: usize) -> Result<Vec<C64>> {
    let dim = a.dim();
    if col >= dim {
        return Err(Error::DimensionMismatch(format!("column {col} out of range for dimension {dim}")));
    }
    let n = gamma.nodes as f64;
    let mut e = vec![C64::new(0.0, 0.0); dim];
    e[col] = C64::new(1.0, 0.0);
    let terms: Vec<Result<Vec<C64>>> = (0..gamma.nodes)
        .into_par_iter()
        .map(|j| {
            let z = gamma.node(j);
            let shifted = a.scale_real(-1.0).shift(z);
            let lu = Lu::factor(&shifted)
                .map_err(|_| Error::ContourTooClose { node: j, resolvent_norm: f64::INFINITY })?;
            let x = lu.solve_vec(&e);
            let size = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if !size.is_finite() || size > RESOLVENT_LIMIT {
                return Err(Error::ContourTooClose { node: j, resolvent_norm: size });
            }
            let w = f.eval(z) * (z - gamma.center) / n;
            Ok(x.into_iter().map(|v| v * w).collect())
        })
        .collect();
    let mut total = vec![C64::new(0.0, 0.0); dim];
    for term in terms {
        for (t, v) in total.iter_mut().zip(term?) {
            *t += v;
        }
    }
    Ok(total)
}

/// Riesz projection onto the spectral subspace enclosed by γ.
pub fn spectral_projection(a: &Op, gamma: &Contour) -> Result<Op> {
    contour_sum(a, gamma, |_| C64::new(1.0, 0.0))
}

/// Moore–Penrose inverse (p + a*a)^{-1} a*, with p the projection onto
/// ker(a*a) obtained from a small circle around 0.
pub fn moore_penrose(a: &Op) -> Result<Op> {
    let n = a.dim();
    if a.is_zero() {
        return Ok(Op::zeros(n));
    }
    let a_h = a.adjoint();
    let gram = a_h.matmul(a);
    let eig = hermitian_eig(&gram)?;
    let top = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let threshold = n as f64 * f64::EPSILON * top;
    let smallest = eig.values.iter().copied().find(|&v| v > threshold).unwrap_or(top);
    if smallest < 1e3 * threshold {
        return Err(Error::NoSpectralGap { smallest, threshold });
    }
    let has_kernel = eig.values.iter().any(|&v| v <= threshold);
    let lhs = if has_kernel {
        let gamma = Contour::circle(C64::new(0.0, 0.0), smallest / 2.0)?;
        &spectral_projection(&gram, &gamma)? + &gram
    } else {
        gram
    };
    solve(&lhs, &a_h)
}

/// Residuals of the four Penrose conditions, each relative to ‖a‖ (or 1).
pub fn penrose_residuals(a: &Op, pinv: &Op) -> [f64; 4] {
    let scale = op_norm(a).max(1.0);
    let a_p = a.matmul(pinv);
    let p_a = pinv.matmul(a);
    [
        op_norm(&(&a_p.matmul(a) - a)) / scale,
        op_norm(&(&p_a.matmul(pinv) - pinv)) / (op_norm(pinv).max(1.0)),
        op_norm(&(&p_a - &p_a.adjoint())) / scale,
        op_norm(&(&a_p - &a_p.adjoint())) / scale,
    ]
}

#[derive(Clone, Debug, PartialEq)]
pub struct SemiIdealReport {
    /// ‖f(a) − f(λ)I − f′(λ)x − xRx‖.
    pub residual: f64,
    pub f_a_norm: f64,
    /// Membership of R in span(A) + ℂI.
    pub r_membership: f64,
    pub x_membership: f64,
}

impl SemiIdealReport {
    pub fn passed(&self) -> bool {
        self.residual <= 1e-8 * self.f_a_norm && self.r_membership <= 1e-8
    }
}

/// Checks f(λ + x) = f(λ) + f′(λ)x + xRx with
/// R = (1/2πi) ∮ f(μ)/(μ − λ)² (μ − a)^{-1} dμ, and that R lies in the
/// unitization of the algebra containing x.
pub fn semiideal_fcalc_check(
    lambda: C64,
    x: &Op,
    f: &HoloFn,
    gamma: &Contour,
    algebra: &SubalgebraBasis,
) -> Result<SemiIdealReport> {
    let x_membership = algebra.membership(x);
    if x_membership > 1e-8 {
        return Err(Error::NotInAlgebra { residual: x_membership });
    }
    if !gamma.encloses(lambda) {
        return Err(Error::InvalidArgument("λ must lie inside the contour".into()));
    }
    let a = x.shift(lambda);
    let f_a = cauchy_calc(&a, f, gamma)?;
    let r = contour_sum(&a, gamma, |mu| f.eval(mu) / ((mu - lambda) * (mu - lambda)))?;
    let predicted = &(&Op::scalar(a.dim(), f.eval(lambda)) + &x.scale(f.deriv(lambda))) + &x.matmul(&r).matmul(x);
    Ok(SemiIdealReport {
        residual: op_norm(&(&f_a - &predicted)),
        f_a_norm: op_norm(&f_a),
        r_membership: algebra.with_unit().membership(&r),
        x_membership,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn nil2() -> Op {
        Op::from_real(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    #[test]
    fn contour_integrates_simple_pole() {
        let gamma = Contour::new(C64::new(0.3, -0.2), 1.7, 16).unwrap();
        let v = gamma.integrate(|z| 1.0 / (z - gamma.center));
        assert!((v - C64::new(0.0, 2.0 * PI)).norm() <= 1e-12 * 2.0 * PI);
        assert!(Contour::new(c(0.0), 1.0, 8).is_err());
        assert!(Contour::new(c(0.0), -1.0, 32).is_err());
    }

    #[test]
    fn unit_function_gives_identity() {
        let mut r = seeded(1);
        let a = Op::random(5, &mut r).scale_real(0.2);
        let gamma = Contour::circle(c(0.0), 3.0).unwrap();
        let unit = cauchy_calc(&a, &HoloFn::one(), &gamma).unwrap();
        assert!((&unit - &Op::identity(5)).max_abs() <= 1e-10);
    }

    #[test]
    fn square_of_diagonal() {
        let gamma = Contour::circle(c(2.0), 3.0).unwrap();
        let sq = cauchy_calc(&Op::diag_real(&[1.0, 3.0]), &HoloFn::power(2), &gamma).unwrap();
        assert!((&sq - &Op::diag_real(&[1.0, 9.0])).max_abs() <= 1e-10);
    }

    #[test]
    fn exp_of_nilpotent() {
        let gamma = Contour::circle(c(0.0), 1.0).unwrap();
        let e = cauchy_calc(&nil2(), &HoloFn::exp(), &gamma).unwrap();
        assert!((&e - &Op::from_real(&[&[1.0, 1.0], &[0.0, 1.0]])).max_abs() <= 1e-10);
    }

    #[test]
    fn eigenvalue_on_contour_is_rejected() {
        let gamma = Contour::circle(c(0.0), 1.0).unwrap();
        let err = cauchy_calc(&Op::diag_real(&[1.0, 0.0]), &HoloFn::one(), &gamma).unwrap_err();
        assert!(matches!(err, Error::ContourTooClose { .. }));
        // Non-normal input goes through the resolvent probe instead.
        let jordan = Op::from_real(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let err = cauchy_calc(&jordan, &HoloFn::one(), &gamma).unwrap_err();
        assert!(matches!(err, Error::ContourTooClose { .. }));
    }

    #[test]
    fn projection_examples() {
        let gamma = Contour::circle(c(0.0), 1.0).unwrap();
        let p = spectral_projection(&Op::diag_real(&[0.0, 5.0]), &gamma).unwrap();
        assert!((&p - &Op::diag_real(&[1.0, 0.0])).max_abs() <= 1e-12);

        let far = Contour::circle(c(100.0), 1.0).unwrap();
        assert!(spectral_projection(&Op::diag_real(&[0.0, 5.0]), &far).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn projection_rank_matches_eigenvalue_count() {
        let mut r = seeded(8);
        let h = Op::random_hermitian(8, &mut r);
        let eig = hermitian_eig(&h).unwrap();
        // Circle around the lower half of the spectrum, through the widest gap.
        let (gap_at, _) = eig.values.windows(2).enumerate().map(|(i, w)| (i, w[1] - w[0])).fold((0, 0.0), |b, cur| if cur.1 > b.1 { cur } else { b });
        let cut = (eig.values[gap_at] + eig.values[gap_at + 1]) / 2.0;
        let low = eig.values[0] - 1.0;
        let gamma = Contour::new(c((low + cut) / 2.0), (cut - low) / 2.0, 256).unwrap();
        let p = spectral_projection(&h, &gamma).unwrap();
        assert_eq!(p.trace().re.round() as usize, gap_at + 1);
        assert!((&p.matmul(&p) - &p).frobenius_norm() <= 1e-8);
        assert!(p.commutator(&h).frobenius_norm() <= 1e-8 * op_norm(&h));
    }

    #[test]
    fn penrose_examples() {
        let p = moore_penrose(&Op::diag_real(&[2.0, 0.0])).unwrap();
        assert!((&p - &Op::diag_real(&[0.5, 0.0])).max_abs() <= 1e-10);

        let p = moore_penrose(&nil2()).unwrap();
        assert!((&p - &Op::from_real(&[&[0.0, 0.0], &[1.0, 0.0]])).max_abs() <= 1e-10);

        let mut r = seeded(2);
        let a = Op::random(5, &mut r).shift(c(4.0));
        let p = moore_penrose(&a).unwrap();
        assert!((&p - &crate::opcore::inverse(&a).unwrap()).max_abs() <= 1e-10);
        assert!(moore_penrose(&Op::zeros(3)).unwrap().is_zero());
    }

    #[test]
    fn penrose_conditions_on_rank_deficient() {
        let mut r = seeded(3);
        let b = Op::random(6, &mut r);
        // Rank 3: zero out half the columns of a random matrix, then rotate.
        let mut masked = b.clone();
        for i in 0..6 {
            for j in 3..6 {
                masked[(i, j)] = c(0.0);
            }
        }
        let u = Op::random_unitary(6, &mut r);
        let a = masked.matmul(&u);
        let p = moore_penrose(&a).unwrap();
        for res in penrose_residuals(&a, &p) {
            assert!(res <= 1e-8, "{res}");
        }
        let back = moore_penrose(&p).unwrap();
        assert!((&back - &a).frobenius_norm() <= 1e-7 * op_norm(&a));
    }

    #[test]
    fn tiny_singular_value_has_no_gap() {
        let a = Op::diag_real(&[1.0, 1e-7]);
        assert!(matches!(moore_penrose(&a), Err(Error::NoSpectralGap { .. })));
    }

    #[test]
    fn semiideal_examples() {
        let gamma = Contour::circle(c(0.0), 1.0).unwrap();
        let ut2 = SubalgebraBasis::upper_triangular(2);
        let report = semiideal_fcalc_check(c(0.3), &Op::zeros(2), &HoloFn::exp(), &gamma, &ut2).unwrap();
        assert!(report.residual <= 1e-12);

        let report = semiideal_fcalc_check(c(0.0), &nil2(), &HoloFn::exp(), &gamma, &ut2).unwrap();
        assert!(report.residual <= 1e-10 && report.passed());

        let ut3 = SubalgebraBasis::upper_triangular(3);
        let x = Op::from_real(&[&[0.0, 0.7, -0.4], &[0.0, 0.0, 0.9], &[0.0, 0.0, 0.0]]);
        let report = semiideal_fcalc_check(c(0.0), &x, &HoloFn::resolvent_at(c(2.0)), &gamma, &ut3).unwrap();
        assert!(report.residual <= 1e-10 && report.r_membership <= 1e-10, "{report:?}");
    }

    #[test]
    fn semiideal_rejects_foreign_x() {
        let gamma = Contour::circle(c(0.0), 1.0).unwrap();
        let lower = Op::from_real(&[&[0.0, 0.0], &[1.0, 0.0]]);
        let err = semiideal_fcalc_check(c(0.0), &lower, &HoloFn::exp(), &gamma, &SubalgebraBasis::upper_triangular(2));
        assert!(matches!(err, Err(Error::NotInAlgebra { .. })));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let pts = [C64::new(0.3, 0.1), C64::new(-0.5, 0.4), C64::new(0.9, -0.2)];
        for f in [HoloFn::exp(), HoloFn::power(3), HoloFn::resolvent_at(c(2.0)), HoloFn::z_over_shift(c(2.0)), HoloFn::exp().product(&HoloFn::power(2))] {
            assert!(f.derivative_defect(&pts, 1e-5) <= 1e-6);
        }
    }
}
