//! The check registry. Each suite runs its checks in a fixed order; every
//! check draws from its own stream seeded by (run seed, check name), so
//! selecting a single suite reproduces the same numbers as `all`.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use specinv_core::groupoid::{relation_residual_with, theta, theta_inv, BArrow, BoundaryFn, ModelGroupoid};
use specinv_core::holocalc::{
    cauchy_calc, moore_penrose, penrose_residuals, semiideal_fcalc_check, Contour, HoloFn,
};
use specinv_core::opcore::{hermitian_eig, op_norm, BaseNorm, Op};
use specinv_core::psistar::{
    identity_suite, ideal_transfer_demo, spectral_invariance_suite, CommutativeModel, DerivationSet, ScaleReport,
    SubalgebraBasis,
};
use specinv_core::rng::{derive_seed, seeded, trial_rng, uniform_complex};
use specinv_core::schwartz::{
    conv_inequality_check, convolve, holo_stability_demo, reduced_norm_check, reduced_norm_estimate,
    spectral_radius_norms_check, GroupoidKernel,
};
use specinv_core::smoothkernel::{
    closure_demo, flow, ideal_membership_I, poly_growth_fit, robert_check, Action, GridKernel, HalfLineGrid,
    MatrixSchwartz, TimeGrid, TwistedElement,
};
use specinv_core::symbols::{
    local_symbol, multiplication_op, symbol_estimate_suite, table_refinement, Cutoffs, SymbolTable,
    TorusOperatorFamily,
};
use specinv_core::C64;

use crate::config::{Suite, SuiteConfig};
use crate::report::{Record, Series, Status};

type CoreResult<T> = specinv_core::Result<T>;

/// Every check name, in registry order.
pub const CHECK_NAMES: &[&str] = &[
    "penrose.residuals",
    "penrose.diagonal_oracle",
    "fcalc.cauchy_identity",
    "fcalc.node_doubling",
    "fcalc.oracle",
    "fcalc.semiideal",
    "scales.identities",
    "scales.invariance_upper",
    "scales.invariance_diagonal",
    "scales.monotone",
    "scales.ideal_transfer",
    "groupoid.theta_relation",
    "groupoid.theta_roundtrip",
    "groupoid.length_axioms",
    "groupoid.growth_fit",
    "groupoid.c2",
    "groupoid.k0",
    "schwartz.conv_inequality",
    "schwartz.gaussian_closed_form",
    "schwartz.gaussian_order",
    "schwartz.reduced_norm",
    "schwartz.approximate_unit",
    "schwartz.radius_gaussian",
    "schwartz.radius_bump",
    "schwartz.holo_decay",
    "cusp.flow_group_law",
    "cusp.flow_oracle",
    "cusp.growth_fit",
    "cusp.robert",
    "cusp.ideal_smooth",
    "cusp.ideal_constant",
    "cusp.ideal_power_counting",
    "cusp.closure",
    "symbols.eta_independence",
    "symbols.l2",
    "symbols.refinement",
    "symbols.estimate_table",
];

#[derive(Debug, Default)]
pub struct SuiteOutput {
    pub records: Vec<Record>,
    pub series: BTreeMap<String, Series>,
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> SuiteOutput {
    let mut ctx = Ctx { cfg: config, out: SuiteOutput::default() };
    match suite {
        Suite::Penrose => penrose(&mut ctx),
        Suite::Fcalc => fcalc(&mut ctx),
        Suite::Scales => scales(&mut ctx),
        Suite::Groupoid => groupoid(&mut ctx),
        Suite::Schwartz => schwartz(&mut ctx),
        Suite::Cusp => cusp(&mut ctx),
        Suite::Symbols => symbols(&mut ctx),
        Suite::All => {
            for s in Suite::ORDERED {
                let out = run_suite(s, config);
                ctx.out.records.extend(out.records);
                ctx.out.series.extend(out.series);
            }
        }
    }
    ctx.out
}

struct Outcome {
    measured: f64,
    bound: Option<f64>,
    status: Status,
    note: Option<String>,
    series: Vec<(&'static str, Series)>,
}

impl Outcome {
    /// Passes iff `measured` is finite and at most `tol`.
    fn at_most(measured: f64, tol: f64) -> Self {
        Self::judged(measured, Some(tol), measured <= tol)
    }

    fn judged(measured: f64, bound: Option<f64>, passed: bool) -> Self {
        let status = if passed && measured.is_finite() { Status::Pass } else { Status::Fail };
        Outcome { measured, bound, status, note: None, series: Vec::new() }
    }

    fn info(measured: f64) -> Self {
        Outcome { measured, bound: None, status: Status::Info, note: None, series: Vec::new() }
    }

    fn note(mut self, note: String) -> Self {
        self.note = Some(note);
        self
    }

    fn series(mut self, name: &'static str, series: Series) -> Self {
        self.series.push((name, series));
        self
    }
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    out: SuiteOutput,
}

impl Ctx<'_> {
    fn check(
        &mut self,
        name: &'static str,
        anchor: &'static str,
        default_tol: Option<f64>,
        body: impl FnOnce(u64, Option<f64>) -> CoreResult<Outcome>,
    ) {
        debug_assert!(CHECK_NAMES.contains(&name), "unregistered check {name}");
        let tolerance = default_tol.map(|t| self.cfg.tolerance(name, t));
        let start = Instant::now();
        let result = body(derive_seed(self.cfg.seed, name), tolerance);
        let runtime_ms = start.elapsed().as_millis() as u64;
        let record = match result {
            Ok(o) => {
                for (series_name, s) in o.series {
                    self.out.series.insert(series_name.to_string(), s);
                }
                Record {
                    name: name.to_string(),
                    anchor: anchor.to_string(),
                    status: o.status,
                    measured: Some(o.measured).filter(|m| m.is_finite()),
                    bound: o.bound,
                    tolerance,
                    note: o.note,
                    runtime_ms,
                }
            }
            Err(e) => Record {
                name: name.to_string(),
                anchor: anchor.to_string(),
                status: Status::Fail,
                measured: None,
                bound: None,
                tolerance,
                note: Some(format!("error: {e}")),
                runtime_ms,
            },
        };
        self.out.records.push(record);
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn contour(cfg: &SuiteConfig) -> CoreResult<Contour> {
    let c = &cfg.contour;
    Contour::new(C64::new(c.center[0], c.center[1]), c.radius, c.nodes)
}

fn center(cfg: &SuiteConfig) -> C64 {
    C64::new(cfg.contour.center[0], cfg.contour.center[1])
}

/// A scaled so that ‖A − c‖ = fraction · radius.
fn inside_contour(m: &Op, cfg: &SuiteConfig, fraction: f64) -> Op {
    let norm = op_norm(m).max(f64::MIN_POSITIVE);
    m.scale_real(fraction * cfg.contour.radius / norm).shift(center(cfg))
}

fn random_set(dim: usize, size: usize, rng: &mut impl Rng) -> CoreResult<DerivationSet> {
    DerivationSet::new((0..size).map(|_| Op::random_hermitian(dim, rng)).collect())
}

// ---------------------------------------------------------------- penrose

fn penrose(ctx: &mut Ctx) {
    let trials = ctx.cfg.trials_or(200);
    ctx.check(
        "penrose.residuals",
        "Moore-Penrose inverse as a spectral-projection calculus of a*a",
        Some(1e-8),
        |seed, tol| {
            let rows = (0..trials)
                .into_par_iter()
                .map(|t| -> CoreResult<(bool, f64)> {
                    let mut rng = trial_rng(seed, "matrix", t);
                    let dim = rng.gen_range(2..=12usize);
                    // Two in five draws drop rank, keeping a gap of at least 0.2.
                    let deficient = t % 5 < 2;
                    let rank = if deficient { rng.gen_range(1..dim) } else { dim };
                    let u = Op::random_unitary(dim, &mut rng);
                    let v = Op::random_unitary(dim, &mut rng);
                    let s: Vec<f64> = (0..dim).map(|i| if i < rank { rng.gen_range(0.2..2.0) } else { 0.0 }).collect();
                    let a = u.matmul(&Op::diag_real(&s)).matmul(&v.adjoint());
                    let pinv = moore_penrose(&a)?;
                    Ok((deficient, max_of(penrose_residuals(&a, &pinv))))
                })
                .collect::<CoreResult<Vec<_>>>()?;
            let deficient = rows.iter().filter(|r| r.0).count();
            Ok(Outcome::at_most(max_of(rows.iter().map(|r| r.1)), tol.unwrap())
                .note(format!("{trials} matrices, {deficient} rank-deficient")))
        },
    );
    ctx.check(
        "penrose.diagonal_oracle",
        "Moore-Penrose inverse of a diagonal matrix inverts the nonzero entries",
        Some(1e-10),
        |seed, tol| {
            let errs = (0..trials)
                .into_par_iter()
                .map(|t| -> CoreResult<f64> {
                    let mut rng = trial_rng(seed, "diag", t);
                    let dim = rng.gen_range(2..=12usize);
                    let d: Vec<C64> = (0..dim)
                        .map(|_| {
                            if rng.gen_bool(0.3) {
                                C64::new(0.0, 0.0)
                            } else {
                                C64::from_polar(rng.gen_range(0.2..2.0), rng.gen_range(0.0..2.0 * PI))
                            }
                        })
                        .collect();
                    let oracle: Vec<C64> =
                        d.iter().map(|&z| if z.norm() == 0.0 { z } else { 1.0 / z }).collect();
                    let pinv = moore_penrose(&Op::diag(&d))?;
                    Ok((&pinv - &Op::diag(&oracle)).max_abs())
                })
                .collect::<CoreResult<Vec<_>>>()?;
            Ok(Outcome::at_most(max_of(errs), tol.unwrap()).note(format!("{trials} diagonal matrices")))
        },
    );
}

// ---------------------------------------------------------------- fcalc

const DOUBLING_NODES: [usize; 4] = [16, 32, 64, 128];
const ROUNDOFF_FLOOR: f64 = 1e-14;
const ORACLE_NODES: usize = 256;

fn fcalc(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let trials = cfg.trials_or(50);
    let sample = |seed: u64, t: usize| -> Op {
        let mut rng = trial_rng(seed, "a", t);
        let dim = rng.gen_range(3..=8usize);
        inside_contour(&Op::random(dim, &mut rng), cfg, 0.5)
    };
    ctx.check("fcalc.cauchy_identity", "Cauchy integral of the constant 1 is the identity", Some(1e-10), |seed, tol| {
        let gamma = contour(cfg)?;
        let res = (0..trials)
            .into_par_iter()
            .map(|t| {
                let a = sample(seed, t);
                let one = cauchy_calc(&a, &HoloFn::one(), &gamma)?;
                Ok(op_norm(&(&one - &Op::identity(a.dim()))))
            })
            .collect::<CoreResult<Vec<f64>>>()?;
        Ok(Outcome::at_most(max_of(res), tol.unwrap()).note(format!("{trials} matrices, {} nodes", gamma.nodes)))
    });
    ctx.check(
        "fcalc.node_doubling",
        "Trapezoid rule on a circle converges geometrically for analytic integrands",
        Some(1.0),
        |seed, tol| {
            let base = contour(cfg)?;
            let curves = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let a = sample(seed, t);
                    DOUBLING_NODES
                        .iter()
                        .map(|&n| {
                            let one = cauchy_calc(&a, &HoloFn::one(), &base.with_nodes(n)?)?;
                            Ok(op_norm(&(&one - &Op::identity(a.dim()))))
                        })
                        .collect::<CoreResult<Vec<f64>>>()
                })
                .collect::<CoreResult<Vec<_>>>()?;
            // Each doubling must gain 100x unless it reaches the roundoff floor.
            let worst = max_of(
                curves.iter().flat_map(|c| c.windows(2).map(|w| w[1] / (w[0] / 100.0).max(ROUNDOFF_FLOOR))),
            );
            let mut series = Series::new(&["nodes", "residual"]);
            for (i, &n) in DOUBLING_NODES.iter().enumerate() {
                series.push(vec![n as f64, max_of(curves.iter().map(|c| c[i]))]);
            }
            Ok(Outcome::at_most(worst, tol.unwrap())
                .note("measured is the worst residual(2N) / max(residual(N)/100, 1e-14)".into())
                .series("cauchy_doubling", series))
        },
    );
    ctx.check(
        "fcalc.oracle",
        "Cauchy calculus agrees with the eigen-decomposition calculus on normal matrices",
        Some(1e-8),
        |seed, tol| {
            // The pole of 1/(2-z) sits 0.5 outside the default circle, which
            // limits 64 nodes to about 0.75^64 = 1e-8.
            let gamma = contour(cfg)?;
            let gamma = gamma.with_nodes(gamma.nodes.max(ORACLE_NODES))?;
            let c = center(cfg);
            let fns = [("exp", HoloFn::exp()), ("z^2", HoloFn::power(2)), ("1/(2-z)", HoloFn::resolvent_at(C64::new(2.0, 0.0)))];
            let errs = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, "hermitian", t);
                    let dim = rng.gen_range(3..=8usize);
                    let h = Op::random_hermitian(dim, &mut rng);
                    let h = h.scale_real(0.5 * cfg.contour.radius / op_norm(&h).max(f64::MIN_POSITIVE));
                    let eig = hermitian_eig(&h)?;
                    let a = h.shift(c);
                    let mut worst: f64 = 0.0;
                    for (_, f) in &fns {
                        let got = cauchy_calc(&a, f, &gamma)?;
                        let oracle = eig.apply_fn(|lambda| f.eval(c + lambda));
                        worst = worst.max(op_norm(&(&got - &oracle)) / op_norm(&oracle).max(1.0));
                    }
                    Ok(worst)
                })
                .collect::<CoreResult<Vec<f64>>>()?;
            Ok(Outcome::at_most(max_of(errs), tol.unwrap())
                .note(format!("{trials} Hermitian shifts, f in exp, z^2, 1/(2-z), {} nodes", gamma.nodes)))
        },
    );
    ctx.check(
        "fcalc.semiideal",
        "f(lambda + x) = f(lambda) + f'(lambda) x + x R x with R in the unitized algebra",
        Some(1e-8),
        |seed, tol| {
            let gamma = contour(cfg)?;
            let errs = (0..trials.min(20))
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, "nilpotent", t);
                    let dim = rng.gen_range(3..=6usize);
                    let upper = Op::from_fn(dim, |i, j| if j > i { uniform_complex(&mut rng) } else { C64::new(0.0, 0.0) });
                    let x = upper.scale_real(0.3 * cfg.contour.radius / op_norm(&upper).max(f64::MIN_POSITIVE));
                    let lambda = center(cfg) + uniform_complex(&mut rng) * (0.2 * cfg.contour.radius);
                    let r = semiideal_fcalc_check(
                        lambda,
                        &x,
                        &HoloFn::exp(),
                        &gamma,
                        &SubalgebraBasis::upper_triangular(dim),
                    )?;
                    Ok((r.residual / r.f_a_norm.max(f64::MIN_POSITIVE)).max(r.r_membership))
                })
                .collect::<CoreResult<Vec<f64>>>()?;
            Ok(Outcome::at_most(max_of(errs), tol.unwrap()))
        },
    );
}

// ---------------------------------------------------------------- scales

fn scales(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    ctx.check(
        "scales.identities",
        "Product identities of the commutator maps and the semi-ideal norms",
        Some(1e-12),
        |seed, tol| {
            let trials = cfg.trials_or(100);
            let res: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, "triple", t);
                    let dim = rng.gen_range(2..=6usize);
                    let size = rng.gen_range(1..=3usize);
                    let set = random_set(dim, size, &mut rng)?;
                    let (x, y, a) = (Op::random(dim, &mut rng), Op::random(dim, &mut rng), Op::random(dim, &mut rng));
                    Ok(identity_suite(&x, &y, &a, &set).max_residual())
                })
                .collect::<CoreResult<_>>()?;
            Ok(Outcome::at_most(max_of(res), tol.unwrap()).note(format!("{trials} triples")))
        },
    );
    for (name, algebra) in [
        ("scales.invariance_upper", SubalgebraBasis::upper_triangular(4)),
        ("scales.invariance_diagonal", SubalgebraBasis::diagonal(5)),
    ] {
        ctx.check(name, "Inverses and Neumann partial sums stay in a spectrally invariant subalgebra", Some(1e-9), |seed, tol| {
            let trials = cfg.trials_or(100);
            let r = spectral_invariance_suite(&algebra.set_tol(tol.unwrap()), trials, 0.4, seed);
            let v = r.violations();
            Ok(Outcome::judged(v as f64, Some(0.0), v == 0).note(format!(
                "{trials} trials, {} inverses checked, max global residual {:e}, max local membership {:e}",
                r.global_checked, r.global_max_residual, r.local_max_membership
            )))
        });
    }
    ctx.check("scales.monotone", "Scale norms increase with the scale index", None, |seed, _| {
        let trials = cfg.trials_or(20);
        let flags: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = trial_rng(seed, "element", t);
                let set = random_set(4, 2, &mut rng)?;
                let a = Op::random(4, &mut rng);
                let xi: Vec<C64> = (0..4).map(|_| uniform_complex(&mut rng)).collect();
                Ok(ScaleReport::compute(&a, &xi, 3, 3, &set, &[BaseNorm::Operator, BaseNorm::Frobenius]).is_monotone())
            })
            .collect::<CoreResult<_>>()?;
        let bad = flags.iter().filter(|&&ok| !ok).count();
        Ok(Outcome::judged(bad as f64, Some(0.0), bad == 0).note(format!("{trials} elements")))
    });
    ctx.check(
        "scales.ideal_transfer",
        "Local and global invertibility transfer between an ideal and its semi-ideal",
        None,
        |seed, _| {
            let model = CommutativeModel::consecutive(12, 3, 4)?;
            let r = ideal_transfer_demo(&model, cfg.trials_or(200), seed);
            let v = r.violations();
            Ok(Outcome::judged(v as f64, Some(0.0), v == 0))
        },
    );
}

// ---------------------------------------------------------------- groupoid

/// Draws an arrow of the b-groupoid from one of the chart cases:
/// 0 both points off the collar, 1 collar to interior, 2 interior to
/// collar, 3 both in the collar.
fn sample_b_arrow(rng: &mut impl Rng, case: usize) -> BArrow {
    let inv_e = 1.0 / E;
    let log_uniform = |rng: &mut dyn rand::RngCore, lo: f64, hi: f64| 10f64.powf(rng.gen_range(lo..hi));
    match case {
        0 => BArrow { x: rng.gen_range(inv_e..=1.0), y: rng.gen_range(inv_e..=1.0), lambda: 1.0 },
        1 | 2 => {
            let lambda = log_uniform(rng, -6.0, -1e-3);
            let g = BArrow { x: lambda * inv_e, y: rng.gen_range(inv_e..=1.0), lambda };
            if case == 1 {
                g
            } else {
                BArrow { x: g.y, y: g.x, lambda: 1.0 / lambda }
            }
        }
        _ => {
            let y = log_uniform(rng, -6.0, inv_e.log10());
            let lambda = log_uniform(rng, -6.0, (0.999 * inv_e / y).log10());
            BArrow { x: lambda * y, y, lambda }
        }
    }
}

fn model_groupoid(cfg: &SuiteConfig) -> CoreResult<ModelGroupoid> {
    ModelGroupoid::new(cfg.n - 1, cfg.grid.h, cfg.grid.l, cfg.grid.unit_count)
}

fn groupoid(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let samples = cfg.trials_or(10_000);
    ctx.check(
        "groupoid.theta_relation",
        "The chart map from the b-groupoid lands in the c_n relation set",
        Some(1e-12),
        |seed, tol| {
            let mut worst: f64 = 0.0;
            let mut cases = [0usize; 4];
            for n in 1..=3u32 {
                let mut rng = seeded(derive_seed(seed, &format!("n{n}")));
                for s in 0..samples {
                    let g = sample_b_arrow(&mut rng, s % 4);
                    cases[s % 4] += 1;
                    worst = worst.max(relation_residual_with(BoundaryFn::CollarPiecewise, n, &theta(n + 1, &g)?));
                }
            }
            Ok(Outcome::at_most(worst, tol.unwrap())
                .note(format!("n in 1..=3, case counts {cases:?}")))
        },
    );
    ctx.check("groupoid.theta_roundtrip", "The chart map is invertible", Some(1e-10), |seed, tol| {
        let mut worst: f64 = 0.0;
        for n in 1..=3u32 {
            let mut rng = seeded(derive_seed(seed, &format!("n{n}")));
            for s in 0..samples {
                let g = sample_b_arrow(&mut rng, s % 4);
                let back = theta_inv(n + 1, &theta(n + 1, &g)?)?;
                let err = (back.x - g.x).abs().max((back.y - g.y).abs()).max((back.lambda - g.lambda).abs() / g.lambda);
                worst = worst.max(err);
            }
        }
        Ok(Outcome::at_most(worst, tol.unwrap()))
    });

    let mut certificate = None;
    ctx.check(
        "groupoid.length_axioms",
        "The length function is symmetric, subadditive and proper",
        None,
        |seed, _| {
            let g = model_groupoid(cfg)?;
            let r = g.length_axiom_suite(samples, seed);
            let v = r.subadditivity_violations + r.symmetry_violations;
            let out = Outcome::judged(v as f64, Some(0.0), v == 0 && r.proper).note(format!(
                "{} pairs, {} subadditivity and {} symmetry violations, proper {}",
                r.pairs, r.subadditivity_violations, r.symmetry_violations, r.proper
            ));
            certificate = Some(r.certificate);
            Ok(out)
        },
    );
    let missing = || specinv_core::Error::InvalidArgument("no growth certificate".into());
    let cert = certificate.as_ref();
    ctx.check(
        "groupoid.growth_fit",
        "Boundary-fiber sublevel measures grow like c (r^N + 1) with (c, N) = (2, 1)",
        Some(0.02),
        |_, tol| {
            let cert = cert.ok_or_else(missing)?;
            let slack = (cert.c - 2.0).abs() / 2.0;
            let mut series = Series::new(&["r", "measure", "bound"]);
            for s in cert.samples.iter().filter(|s| s.unit == 0.0) {
                series.push(vec![s.r, s.measure, s.bound]);
            }
            Ok(Outcome::judged(slack, tol, slack <= tol.unwrap() && cert.degree == 1 && cert.holds())
                .note(format!("c = {}, N = {}, least-squares c = {}", cert.c, cert.degree, cert.c_fit))
                .series("growth_sweep", series))
        },
    );
    ctx.check("groupoid.c2", "Integral of (1 + |mu|)^-2 over the boundary fiber equals 2", Some(0.02), |_, tol| {
        let cert = cert.ok_or_else(missing)?;
        let c2 = cert.c_k(2).unwrap_or(f64::INFINITY);
        Ok(Outcome::at_most((c2 - 2.0).abs() / 2.0, tol.unwrap()).note(format!("C_2 = {c2}")))
    });
    ctx.check("groupoid.k0", "Smallest k with finite C_k is N + 1 = 2", None, |_, _| {
        let cert = cert.ok_or_else(missing)?;
        let k0 = cert.k0.map_or(f64::INFINITY, f64::from);
        Ok(Outcome::judged(k0, Some(2.0), cert.k0 == Some(2)))
    });
}

// ---------------------------------------------------------------- schwartz

fn gaussian_error(h: f64, l: f64) -> CoreResult<f64> {
    let g = Arc::new(ModelGroupoid::new(1, h, l, 3)?);
    let e = GroupoidKernel::from_profile(&g, |mu| C64::new((-mu * mu).exp(), 0.0));
    let c = convolve(&e, &e)?;
    Ok(max_of((0..g.mu_len()).map(|k| {
        let mu = g.mu_at(k);
        (c.value(0, k) - (PI / 2.0).sqrt() * (-mu * mu / 2.0).exp()).norm()
    })))
}

fn radius_series(seq: &[f64]) -> Series {
    let mut s = Series::new(&["n", "norm_root"]);
    for (i, &v) in seq.iter().enumerate() {
        s.push(vec![(i + 1) as f64, v]);
    }
    s
}

fn schwartz(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let trials = cfg.trials_or(50);
    ctx.check(
        "schwartz.conv_inequality",
        "Schwartz norm of a convolution is bounded by 2^(k+1) C_k times the factor norms",
        None,
        |seed, _| {
            let g = Arc::new(model_groupoid(cfg)?);
            let cert = g.growth_certificate(6);
            let ratios = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, "pair", t);
                    let f1 = GroupoidKernel::random_bump_mixture(&g, &mut rng, g.l / 2.0);
                    let f2 = GroupoidKernel::random_bump_mixture(&g, &mut rng, g.l / 2.0);
                    [2, 3]
                        .iter()
                        .map(|&k| conv_inequality_check(&f1, &f2, k, 1, &cert).map(|r| (r.passed, r.ratio)))
                        .collect::<CoreResult<Vec<_>>>()
                })
                .collect::<CoreResult<Vec<_>>>()?;
            let all: Vec<(bool, f64)> = ratios.into_iter().flatten().collect();
            let bad = all.iter().filter(|r| !r.0).count();
            Ok(Outcome::judged(max_of(all.iter().map(|r| r.1)), Some(1.0), bad == 0)
                .note(format!("{trials} pairs, k in 2..=3, d = 1, {bad} violations; measured is the worst lhs/bound")))
        },
    );
    ctx.check(
        "schwartz.gaussian_closed_form",
        "Boundary-fiber convolution of Gaussians matches the closed form",
        Some(1e-3),
        |_, tol| Ok(Outcome::at_most(gaussian_error(cfg.grid.h, cfg.grid.l)?, tol.unwrap()).note(format!("h = {}", cfg.grid.h))),
    );
    ctx.check(
        "schwartz.gaussian_order",
        "Convolution quadrature error is at least second order in h",
        Some(0.1),
        |_, tol| {
            let hs: Vec<f64> = (0..5).rev().map(|p| cfg.grid.h * 2f64.powi(p)).collect();
            let errors = hs.iter().map(|&h| gaussian_error(h, cfg.grid.l)).collect::<CoreResult<Vec<f64>>>()?;
            let mut series = Series::new(&["h", "error"]);
            for (&h, &e) in hs.iter().zip(&errors) {
                series.push(vec![h, e]);
            }
            // Pairs already at roundoff carry no order information.
            let orders: Vec<f64> =
                errors.windows(2).filter(|w| w[1] > 1e-13).map(|w| (w[0] / w[1]).log2()).collect();
            let out = match orders.iter().copied().reduce(f64::min) {
                Some(order) => Outcome::judged(order, Some(2.0), order >= 2.0 - tol.unwrap())
                    .note("measured is the smallest observed order".into()),
                None => Outcome::judged(0.0, Some(2.0), true)
                    .note("every refinement level is at roundoff; no order to measure".into()),
            };
            Ok(out.series("gaussian_refinement", series))
        },
    );
    ctx.check(
        "schwartz.reduced_norm",
        "Reduced norm is bounded by the Schwartz norm (k = 2, d = 0)",
        None,
        |seed, _| {
            let g = Arc::new(ModelGroupoid::aligned(1, 0.1, 8.0, 40)?);
            let cert = g.growth_certificate(6);
            let units: Vec<usize> = (0..g.units().len()).step_by(5).collect();
            let rows = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, "kernel", t);
                    let f = GroupoidKernel::random_bump_mixture(&g, &mut rng, g.l / 2.0);
                    let r = reduced_norm_check(&f, 2, 0, &cert, &units)?;
                    Ok((r.passed, r.estimate / r.bound.max(f64::MIN_POSITIVE)))
                })
                .collect::<CoreResult<Vec<(bool, f64)>>>()?;
            let bad = rows.iter().filter(|r| !r.0).count();
            Ok(Outcome::judged(max_of(rows.iter().map(|r| r.1)), Some(1.0), bad == 0)
                .note(format!("{trials} kernels, {bad} violations; measured is the worst estimate/bound")))
        },
    );
    ctx.check(
        "schwartz.approximate_unit",
        "Reduced norm of a positive kernel equals its integral",
        Some(0.05),
        |_, tol| {
            let g = Arc::new(model_groupoid(cfg)?);
            let f = GroupoidKernel::normalized_bump(&g, 0.3);
            let est = reduced_norm_estimate(&f, &[0])?;
            let mass: f64 = f.row(0).iter().map(|z| z.norm()).sum::<f64>() * g.h;
            Ok(Outcome::at_most((est / mass - 1.0).abs(), tol.unwrap()).note(format!("estimate {est}, integral {mass}")))
        },
    );
    for (name, series_name) in [("schwartz.radius_gaussian", "radius_gaussian"), ("schwartz.radius_bump", "radius_bump")] {
        ctx.check(
            name,
            "Spectral radius read off from the k and l Schwartz norms agrees",
            Some(0.05),
            |_, tol| {
                let g = Arc::new(model_groupoid(cfg)?);
                let cert = g.growth_certificate(8);
                let f = if name == "schwartz.radius_gaussian" {
                    GroupoidKernel::gaussian(&g, 0.1)
                } else {
                    GroupoidKernel::bump(&g, 0.0, 0.15)
                };
                let r = spectral_radius_norms_check(&f, 2, 4, 1, 64, &cert)?;
                let ok = r.gap <= tol.unwrap() && r.sandwich_norm.is_finite() && r.sandwich_norm <= r.sandwich_bound;
                Ok(Outcome::judged(r.gap, tol, ok)
                    .note(format!("(k, l) = (2, 4), 64 powers, sandwich {} <= {}", r.sandwich_norm, r.sandwich_bound))
                    .series(series_name, radius_series(&r.seq_k)))
            },
        );
    }
    ctx.check(
        "schwartz.holo_decay",
        "Holomorphic calculus of a Schwartz kernel stays rapidly decreasing",
        None,
        |_, _| {
            let g = Arc::new(ModelGroupoid::new(1, 0.1, 8.0, 3)?);
            let f = GroupoidKernel::normalized_bump(&g, 0.3).scale(C64::new(0.5, 0.0));
            let gamma = Contour::circle(C64::new(0.0, 0.0), 1.0)?;
            let r = holo_stability_demo(&f, &HoloFn::z_over_shift(C64::new(2.0, 0.0)), &gamma)?;
            let mut series = Series::new(&["k", "sup_weighted"]);
            for &(k, v) in &r.decay {
                series.push(vec![f64::from(k), v]);
            }
            let worst = max_of(r.decay.iter().map(|d| d.1));
            Ok(Outcome::judged(worst, Some(r.cap), r.passed).series("decay_table", series))
        },
    );
}

// ---------------------------------------------------------------- cusp

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

fn coarse_twisted() -> CoreResult<(TimeGrid, Arc<HalfLineGrid>)> {
    Ok((TimeGrid::new(0.2, 12.0)?, Arc::new(HalfLineGrid::new(1e-6, 10.0, 120)?)))
}

fn cusp(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let n = cfg.n;
    ctx.check("cusp.flow_group_law", "The flow of the boundary vector field is a one-parameter group", Some(1e-10), |seed, tol| {
        let samples = cfg.trials_or(1000);
        let mut rng = seeded(seed);
        let (mut worst, mut non_monotone): (f64, usize) = (0.0, 0);
        for _ in 0..samples {
            let (t, s) = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
            let x = 10f64.powf(rng.gen_range(-3.0..1.0));
            let direct = flow(n, t + s, x)?;
            let chained = flow(n, t, flow(n, s, x)?)?;
            worst = worst.max((direct - chained).abs() / direct);
            if flow(n, t, x * 1.01)? <= flow(n, t, x)? {
                non_monotone += 1;
            }
        }
        Ok(Outcome::judged(worst, tol, worst <= tol.unwrap() && non_monotone == 0)
            .note(format!("{samples} samples, {non_monotone} monotonicity failures")))
    });
    ctx.check("cusp.flow_oracle", "flow(2, 1.5, 1) = 2 and agrees with an RK4 integration of the ODE", Some(1e-8), |_, tol| {
        let x = flow(2, 1.5, 1.0)?;
        let err = (x - 2.0).abs().max((rk4_flow(2, 1.5, 1.0, 20_000) - x).abs());
        Ok(Outcome::at_most(err, tol.unwrap()))
    });
    ctx.check(
        "cusp.growth_fit",
        "Seminorms of flowed Schwartz functions grow polynomially in t",
        Some(0.99),
        |_, tol| {
            let grid = Arc::new(HalfLineGrid::default_grid());
            let bump = MatrixSchwartz::flow_gaussian(&grid, n, 0.0, 1.0, &Op::identity(2))?;
            let samples: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.5).collect();
            let fit = poly_growth_fit(Action::Flow(n), &[bump], 1, &samples)?;
            let ok = fit.c.is_finite() && fit.m <= 4 && fit.r_squared >= tol.unwrap();
            let mut series = Series::new(&["t", "ratio"]);
            for &(t, r) in &fit.ratios {
                series.push(vec![t, r]);
            }
            Ok(Outcome::judged(fit.r_squared, tol, ok)
                .note(format!("C = {}, M = {}, slope {}; measured is the envelope R^2", fit.c, fit.m, fit.slope))
                .series("growth_fit", series))
        },
    );
    ctx.check(
        "cusp.robert",
        "Twisted-product seminorm estimate with polynomially growing action",
        None,
        |seed, _| {
            let (tg, grid) = coarse_twisted()?;
            let trials = cfg.trials_or(50);
            let rows = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, "pair", t);
                    let f = TwistedElement::random(tg, &grid, 2, n, 3.0, &mut rng)?;
                    let g = TwistedElement::random(tg, &grid, 2, n, 3.0, &mut rng)?;
                    let mut out = Vec::new();
                    for nn in 0..=1 {
                        for i in 0..=1 {
                            for j in 0..=1 {
                                let r = robert_check(&f, &g, Action::Flow(n), nn, i, j)?;
                                out.push((r.passed, r.ratio));
                            }
                        }
                    }
                    Ok(out)
                })
                .collect::<CoreResult<Vec<_>>>()?;
            let all: Vec<(bool, f64)> = rows.into_iter().flatten().collect();
            let bad = all.iter().filter(|r| !r.0).count();
            Ok(Outcome::judged(max_of(all.iter().map(|r| r.1)), Some(1.0), bad == 0)
                .note(format!("{trials} pairs, (n, i, j) in {{0,1}}^3, {bad} violations; measured is the worst lhs/bound")))
        },
    );
    let eye = Op::identity(2);
    ctx.check("cusp.ideal_smooth", "A kernel flat at the boundary lies in the ideal", None, |_, _| {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 160)?);
        let k = GridKernel::scalar(&grid, |x, y| (-1.0 / x - 1.0 / y).exp(), &eye);
        let r = ideal_membership_I(&k, n, 4)?;
        let bad = r.decay.iter().filter(|e| !e.passed).count() + r.operator.iter().filter(|e| !e.passed).count();
        Ok(Outcome::judged(bad as f64, Some(0.0), r.passed()).note(format!("{bad} failing entries at cap 4")))
    });
    ctx.check("cusp.ideal_constant", "The constant kernel fails the first weighted decay test", None, |_, _| {
        let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 160)?);
        let r = ideal_membership_I(&GridKernel::scalar(&grid, |_, _| 1.0, &eye), n, 4)?;
        let expected = [r.decay_at(0, 0) == Some(true), r.decay_at(1, 0) == Some(false), r.failure() == Some("decay")];
        let mismatches = expected.iter().filter(|ok| !**ok).count();
        Ok(Outcome::judged(mismatches as f64, Some(0.0), mismatches == 0))
    });
    ctx.check(
        "cusp.ideal_power_counting",
        "Weighted decay of x^a y^b kernels matches power counting",
        None,
        |_, _| {
            let grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 120)?);
            let bump = |x: f64| (-(x - 1.0).powi(2)).exp();
            let pairs: Vec<(i32, i32)> = (0..=3).flat_map(|a| (0..=3).map(move |b| (a, b))).collect();
            let counts = pairs
                .par_iter()
                .map(|&(a, b)| {
                    let k = GridKernel::scalar(&grid, |x, y| x.powi(a) * y.powi(b) * bump(x) * bump(y), &eye);
                    let r = ideal_membership_I(&k, n, 4)?;
                    let mut bad = 0;
                    for i in 0..=4u32 {
                        for j in 0..=4u32 {
                            if r.decay_at(i, j) != Some(i <= a as u32 && j <= b as u32) {
                                bad += 1;
                            }
                        }
                    }
                    Ok(bad)
                })
                .collect::<CoreResult<Vec<usize>>>()?;
            let bad: usize = counts.iter().sum();
            Ok(Outcome::judged(bad as f64, Some(0.0), bad == 0).note("exponents a, b in 0..=3, cap 4".into()))
        },
    );
    ctx.check(
        "cusp.closure",
        "Localized twisted products close up in the algebra and the ideal",
        None,
        |seed, _| {
            let (tg, grid) = coarse_twisted()?;
            let kernel_grid = Arc::new(HalfLineGrid::new(1e-6, 10.0, 100)?);
            let r = closure_demo(tg, &grid, &kernel_grid, 2, n, &mut seeded(seed))?;
            let bad = r.ideal_products.iter().filter(|p| !p.1).count();
            let worst = max_of(r.twisted_seminorms.iter().map(|s| s.1));
            Ok(Outcome::judged(bad as f64, Some(0.0), r.passed && worst.is_finite())
                .note(format!("largest twisted seminorm {worst:e}")))
        },
    );
}

// ---------------------------------------------------------------- symbols

fn arc_bump(c: f64, r: f64) -> impl Fn(f64, f64) -> f64 {
    move |_, y| {
        let t = (y - c) / r;
        if t.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }
}

fn random_symbol_report(seed: u64, trial: usize) -> CoreResult<specinv_core::symbols::SymbolReport> {
    let mut rng = trial_rng(seed, "family", trial);
    let n = [16, 32, 48][trial % 3];
    let family = TorusOperatorFamily::random(n, 3, &mut rng)?;
    let (c, r) = (rng.gen_range(2.5..3.8), rng.gen_range(1.0..2.4));
    let cutoffs = Cutoffs::from_fn(&family, arc_bump(c, r), arc_bump(PI, 2.9))?;
    let tables = (0..3).map(|k| local_symbol(&family, &cutoffs, k)).collect::<CoreResult<Vec<SymbolTable>>>()?;
    symbol_estimate_suite(&tables, &family, &cutoffs, 2, 2)
}

fn symbols(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let trials = cfg.trials_or(20);
    ctx.check(
        "symbols.eta_independence",
        "Local symbols of multiplication operators do not depend on the frequency",
        None,
        |seed, _| {
            let variation = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = trial_rng(seed, "multiplier", t);
                    let n = [16, 32, 48][t % 3];
                    let c: Vec<C64> = (0..3).map(|_| uniform_complex(&mut rng)).collect();
                    let op = multiplication_op(n, |y| c[0] + c[1] * y.cos() + c[2] * (2.0 * y).sin());
                    let family = TorusOperatorFamily::new(vec![0.0], vec![op])?;
                    let cutoffs = Cutoffs::from_fn(&family, arc_bump(3.0, 2.0), arc_bump(3.3, 2.5))?;
                    Ok(local_symbol(&family, &cutoffs, 0)?.eta_variation())
                })
                .collect::<CoreResult<Vec<f64>>>()?;
            let worst = max_of(variation);
            Ok(Outcome::judged(worst, Some(0.0), worst == 0.0).note(format!("{trials} multipliers")))
        },
    );
    ctx.check(
        "symbols.l2",
        "Frequency-wise L2 norm of the symbol is bounded by the cutoff constant times the operator norm",
        None,
        |seed, _| {
            let reports = (0..trials)
                .into_par_iter()
                .map(|t| random_symbol_report(seed, t))
                .collect::<CoreResult<Vec<_>>>()?;
            let bad: usize = reports.iter().map(|r| r.l2_violations()).sum();
            let worst = max_of(reports.iter().flat_map(|r| r.l2.iter().map(|e| e.lhs / e.bound)));
            Ok(Outcome::judged(worst, Some(1.05), bad == 0)
                .note(format!("{trials} families, {bad} violations at 5% headroom; measured is the worst lhs/bound")))
        },
    );
    ctx.check(
        "symbols.refinement",
        "Finite-difference symbol derivatives converge at first order",
        Some(0.2),
        |_, tol| {
            let r = table_refinement(&[32, 64, 128, 256])?;
            let mut series = Series::new(&["n", "err_alpha1", "err_alpha2"]);
            for (i, &size) in r.sizes.iter().enumerate() {
                series.push(vec![size as f64, r.errors[0].1[i], r.errors[1].1[i]]);
            }
            let deviation = max_of(r.ratios().iter().flat_map(|(_, q)| q.iter().map(|x| (x.log2() - 1.0).abs())));
            Ok(Outcome::at_most(deviation, tol.unwrap())
                .note("measured is the largest |observed order - 1|".into())
                .series("symbol_refinement", series))
        },
    );
    ctx.check(
        "symbols.estimate_table",
        "Difference quotients of the symbol against commutator seminorms",
        None,
        |seed, _| {
            let r = random_symbol_report(seed, 1)?;
            let mut series = Series::new(&["alpha", "beta", "sup", "q", "ratio"]);
            for e in &r.estimates {
                series.push(vec![e.alpha as f64, e.beta as f64, e.sup, e.q, e.ratio]);
            }
            Ok(Outcome::info(max_of(r.estimates.iter().map(|e| e.ratio))).series("symbol_table", series))
        },
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_names_are_unique() {
        let mut names = CHECK_NAMES.to_vec();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), CHECK_NAMES.len());
    }

    #[test]
    fn b_arrow_samples_satisfy_the_relation() {
        let mut rng = seeded(3);
        for s in 0..400 {
            let g = sample_b_arrow(&mut rng, s % 4);
            assert!(specinv_core::groupoid::b_relation_residual(BoundaryFn::CollarPiecewise, &g) <= 1e-12, "{g:?}");
        }
    }

    #[test]
    fn every_registered_check_runs_in_its_suite() {
        let config = SuiteConfig { trials: Some(2), ..SuiteConfig::default() };
        let out = run_suite(Suite::Penrose, &config);
        let names: Vec<&str> = out.records.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(names, ["penrose.residuals", "penrose.diagonal_oracle"]);
    }
}
