//! The built-in verification scenarios.

use std::error::Error;
use std::rc::Rc;

use afc_core::bicomplex::seeded::{random_matrix, random_row_sdr, Shape};
use afc_core::bicomplex::{check_sdr_relations, check_theorem, tot};
use afc_core::calculus::{self as calc, Comparison, DeltaRoute, HomologyTable, IteratedForm, Multilinearization, NablaDefinition, Reindexer, Settings};
use afc_core::chain::{check_quasi_iso, compare_homology};
use afc_core::chain_functor::{ChainFunctor, ResolutionMode};
use afc_core::dold_kan::{check_left_unit, comparison_iota, kleisli_compose, prolong, prolong_simple, ChainEvaluator, SharedEvaluator};
use afc_core::functor::{cross_effect, cross_effect_dim_by_inclusion_exclusion, decomposition_total, idempotency_comparison, ComonadTower, Functor1, FunctorExpr, Term, Unary};
use afc_core::{ChainComplex, Field, Matrix, TruncationWindow, Verdict};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Check, Report, SCHEMA_VERSION};

pub const CATALOG: [&str; 14] = [
    "cross-effects",
    "p0-model",
    "pn-degree",
    "d1-linearity",
    "d1-chain-rule",
    "nabla-defs-agree",
    "cdc-suite",
    "faa-di-bruno",
    "higher-chain-rule",
    "tangent-functoriality",
    "appendix-a",
    "prolongation-equivalence",
    "kleisli-laws",
    "derivative-dR",
];

/// Largest window for literal prolongation of a single functor.
pub const LITERAL_WINDOW: usize = 4;

/// Largest window for literal Kleisli composites and explicit towers.
pub const KLEISLI_WINDOW: usize = 3;

/// The higher chain rule divides the field's resolution budget by this:
/// its composites have many large words.
pub const COMPOSITE_BUDGET_DIVISOR: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub field: Field,
    pub window: usize,
    /// Replaces the scenario's default functors when non-empty.
    pub exprs: Vec<FunctorExpr>,
    pub seed: u64,
    pub max_dim: usize,
    pub max_n: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config { field: Field::F2, window: 6, exprs: Vec::new(), seed: 0, max_dim: 2, max_n: 3 }
    }
}

pub fn field_name(field: Field) -> String {
    match field {
        Field::Rational => "q".into(),
        Field::Prime(p) => format!("fp:{p}"),
    }
}

type Res<T> = Result<T, Box<dyn Error>>;

struct Ctx<'a> {
    cfg: &'a Config,
    checks: Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, name: impl Into<String>, r: Res<Comparison>) {
        let name = name.into();
        self.checks.push(match r {
            Ok(c) => Check::from_comparison(name, c),
            Err(e) => Check::error(name, e),
        });
    }

    fn settings(&self) -> Settings {
        Settings::for_field(self.cfg.window, self.cfg.field)
    }

    /// User expressions if given, otherwise the defaults.
    fn exprs(&self, defaults: Vec<FunctorExpr>) -> Vec<FunctorExpr> {
        if self.cfg.exprs.is_empty() {
            defaults
        } else {
            self.cfg.exprs.clone()
        }
    }

    /// Pairs `(F, G)`: the first two user expressions, or the defaults.
    fn pairs(&self, defaults: Vec<(FunctorExpr, FunctorExpr)>) -> Vec<(FunctorExpr, FunctorExpr)> {
        match self.cfg.exprs.as_slice() {
            [] => defaults,
            [f] => vec![(f.clone(), f.clone())],
            [f, g, ..] => vec![(f.clone(), g.clone())],
        }
    }
}

fn add_const() -> FunctorExpr {
    FunctorExpr::shifted_identity(1)
}

fn square() -> FunctorExpr {
    FunctorExpr::tensor_power(2)
}

fn cube() -> FunctorExpr {
    FunctorExpr::tensor_power(3)
}

fn cf(cfg: &Config, e: &FunctorExpr) -> Res<ChainFunctor> {
    Ok(ChainFunctor::from_expr(e, cfg.field, cfg.window)?)
}

/// Literal constructions over `Q` get one degree less: rational entries
/// cost far more memory than prime-field ones.
fn literal_window(cfg: &Config, cap: usize) -> usize {
    let cap = if cfg.field == Field::Rational { cap - 1 } else { cap };
    cfg.window.min(cap)
}

fn from_verdict(v: Verdict) -> Comparison {
    Comparison { verdict: v, homology_lhs: Vec::new(), homology_rhs: Vec::new(), degrees: 0 }
}

/// Pass exactly when the underlying claim fails.
fn expect_fail(c: Comparison) -> Comparison {
    let verdict = match c.verdict {
        Verdict::Fail(_) => Verdict::Pass,
        Verdict::Pass => Verdict::Fail("claim unexpectedly holds".into()),
        s => s,
    };
    Comparison { verdict, ..c }
}

fn tuples(arity: usize, max_dim: usize) -> Vec<Vec<usize>> {
    calc::grid(arity, max_dim)
}

fn two_term(field: Field, m: &Matrix, cutoff: usize) -> Res<ChainComplex> {
    let mut dims = vec![m.rows(), m.cols()];
    dims.resize(cutoff + 1, 0);
    let mut diffs = vec![m.clone()];
    for k in 2..=cutoff {
        diffs.push(Matrix::zeros(field, dims[k - 1], dims[k]));
    }
    Ok(ChainComplex::new(field, TruncationWindow::bounded(cutoff), dims, diffs)?)
}

/// Seeded bounded complexes of length two or three with dims at most 2.
fn seeded_complexes(field: Field, seed: u64, count: usize, cutoff: usize, three_term: bool) -> Res<Vec<ChainComplex>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let d0 = 1 + (rng.next_u32() % 2) as usize;
        let d1 = 1 + (rng.next_u32() % 2) as usize;
        let m = match i % 3 {
            0 => Matrix::zeros(field, d0, d1),
            _ => random_matrix(&mut rng, field, d0, d1),
        };
        let c = two_term(field, &m, cutoff)?;
        if three_term && cutoff >= 2 {
            let ker = m.kernel_basis();
            if ker.cols() > 0 {
                let mut dims = c.dims().to_vec();
                dims[2] = ker.cols();
                let mut diffs = c.diffs().to_vec();
                diffs[1] = ker;
                if cutoff >= 3 {
                    diffs[2] = Matrix::zeros(field, dims[2], dims[3]);
                }
                out.push(ChainComplex::new(field, TruncationWindow::bounded(cutoff), dims, diffs)?);
                continue;
            }
        }
        out.push(c);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

fn cross_effects(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    #[allow(unused_mut)]
    let mut defaults = vec![add_const(), square(), cube()];
    #[cfg(feature = "quotient-atoms")]
    defaults.push(FunctorExpr::infer(Term::ext2(Term::var(0))).expect("closed term"));
    for e in ctx.exprs(defaults) {
        let label = e.to_string();
        let concrete = Unary::new(&e, cfg.field);
        let f = match concrete {
            Ok(f) => f,
            Err(err) => {
                ctx.push(format!("cross-effects {label}"), Err(err.into()));
                continue;
            }
        };
        let args: Vec<Vec<usize>> = (1..=3).flat_map(|n| tuples(n, cfg.max_dim)).collect();
        let audit = args.iter().find(|a| decomposition_total(&f, a) != f.obj(a.iter().sum()));
        ctx.push(format!("decomposition audit {label}"), Ok(Comparison::exact(audit.is_none(), || format!("at {:?}", audit.unwrap()))));
        let r = (|| -> Res<Comparison> {
            for a in &args {
                if cross_effect(&f, a)?.dim() as i64 != cross_effect_dim_by_inclusion_exclusion(&f, a) {
                    return Ok(Comparison::exact(false, || format!("at {a:?}")));
                }
            }
            Ok(Comparison::exact(true, String::new))
        })();
        ctx.push(format!("inclusion-exclusion {label}"), r);
        let r = (|| -> Res<Comparison> {
            for a in &args {
                let m = idempotency_comparison(&f, a)?;
                if !(m.is_square() && m.inverse().is_ok()) {
                    return Ok(Comparison::exact(false, || format!("at {a:?}")));
                }
            }
            Ok(Comparison::exact(true, String::new))
        })();
        ctx.push(format!("cr_n idempotency {label}"), r);
        let r = (|| -> Res<Comparison> {
            let normal = match ChainFunctor::from_expr(&e, cfg.field, cfg.window) {
                Ok(n) => n,
                Err(err) => return Ok(Comparison::skipped(err.to_string())),
            };
            for a in &args {
                let cr = normal.cross_effect(0, a.len())?.eval_obj(a)?;
                if cr.dim(0) != cross_effect(&f, a)?.dim() {
                    return Ok(Comparison::exact(false, || format!("at {a:?}")));
                }
            }
            Ok(Comparison::exact(true, String::new))
        })();
        ctx.push(format!("normal form agrees {label}"), r);
    }
    let r = (|| -> Res<Comparison> {
        let f = Unary::new(&add_const(), cfg.field)?;
        let bad = tuples(2, cfg.max_dim).into_iter().find(|a| cross_effect(&f, a).map_or(true, |c| c.dim() != 0));
        Ok(Comparison::exact(bad.is_none(), || format!("at {:?}", bad.unwrap())))
    })();
    ctx.push("cr_2 of A+X vanishes", r);
}

fn p0_model(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let two_plus_square = FunctorExpr::constant(2).sum(&square()).expect("same arity");
    for e in ctx.exprs(vec![add_const(), square(), two_plus_square]) {
        let label = e.to_string();
        let grid = tuples(1, cfg.max_dim);
        let f0 = e.eval_obj(&[0]).unwrap_or(0);
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, &e)?;
            let slots: Vec<usize> = (0..f.arity()).collect();
            let literal = f.resolve(&slots, 1, cfg.window, ResolutionMode::Literal)?;
            Ok(calc::expect_homology(&literal, &tuples(f.arity(), cfg.max_dim), |_| vec![f0])?)
        })();
        ctx.push(format!("C_1 resolution has homology F(0) {label}"), r);
        let r = (|| -> Res<Comparison> {
            let p0 = calc::poly_approx(&cf(cfg, &e)?, 0, cfg.window)?;
            Ok(calc::expect_homology(&p0.value, &grid, |_| vec![f0])?)
        })();
        ctx.push(format!("P_0 model is F(0) {label}"), r);
        let r = (|| -> Res<Comparison> {
            let p1 = calc::poly_approx(&cf(cfg, &e)?, 1, cfg.window)?;
            let q = p1.q.expect("q_1 exists");
            let mut v = q.check();
            for t in &grid {
                let m = q.at(t)?;
                let ok = m.components[0].rank() == f0;
                v = v.and(|| Verdict::from_bool(ok, || format!("q_1 not onto F(0) at {t:?}")));
            }
            Ok(from_verdict(v))
        })();
        ctx.push(format!("q_1 projects onto F(0) {label}"), r);
    }
}

fn pn_degree(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = ctx.settings();
    let grid1 = tuples(1, cfg.max_dim);
    for n in 1..=cfg.max_n {
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, &add_const())?;
            let p = calc::poly_approx(&f, n, cfg.window)?;
            let ok = grid1.iter().all(|t| match (p.value.eval_obj(t), f.eval_obj(t)) {
                (Ok(a), Ok(b)) => calc::same_complex(&a, &b),
                _ => false,
            });
            Ok(Comparison::exact(ok, || "P_n(A+X) differs from A+X".into()))
        })();
        ctx.push(format!("P_{n}(A+X) is A+X in degree 0"), r);
    }
    let r = (|| -> Res<Comparison> {
        let p = calc::poly_approx(&cf(cfg, &FunctorExpr::identity())?, 1, cfg.window)?;
        let vs: Vec<Verdict> = grid1.iter().map(|t| p.p.at(t).map(|m| check_quasi_iso(&m))).collect::<Result<_, _>>()?;
        Ok(from_verdict(Verdict::all(vs)))
    })();
    ctx.push("p_1 on Id is a homology equivalence", r);
    let r = (|| -> Res<Comparison> {
        let p1 = calc::poly_approx(&cf(cfg, &square())?, 1, cfg.window)?;
        let c2 = p1.value.comonad(0, 2)?;
        Ok(calc::expect_homology(&c2, &grid1, |_| Vec::new())?)
    })();
    ctx.push("C_2 P_1(X^2) is acyclic", r);
    let r = (|| -> Res<Comparison> {
        let p1 = calc::poly_approx(&cf(cfg, &square())?, 1, cfg.window)?;
        Ok(from_verdict(calc::check_degree_n(&p1.value, 1, &tuples(2, cfg.max_dim))?))
    })();
    ctx.push("P_1(X^2) has degree 1", r);
    let r = (|| -> Res<Comparison> { Ok(expect_fail(from_verdict(calc::check_degree_n(&cf(cfg, &square())?, 1, &tuples(2, cfg.max_dim))?))) })();
    ctx.push("X^2 is not degree 1 (expected failure)", r);
    let r = (|| -> Res<Comparison> { Ok(from_verdict(calc::check_degree_n(&cf(cfg, &FunctorExpr::constant(2))?, 0, &grid1)?)) })();
    ctx.push("constant has degree 0", r);
    for e in ctx.exprs(vec![square(), cube()]) {
        let label = e.to_string();
        for n in 1..=cfg.max_n.min(3) {
            let r = (|| -> Res<Comparison> {
                let pn = calc::poly_value(&cf(cfg, &e)?, n, s)?;
                Ok(from_verdict(calc::check_degree_n(&pn, n, &tuples(n + 1, cfg.max_dim.min(1)))?))
            })();
            ctx.push(format!("P_{n} has degree {n} {label}"), r);
        }
        let r = (|| -> Res<Comparison> {
            let small = cfg.window.min(LITERAL_WINDOW);
            let f = ChainFunctor::from_expr(&e, cfg.field, small)?;
            let mut v = Verdict::Pass;
            for n in 1..=2 {
                let p = calc::poly_approx(&f, n, small)?;
                v = v.and(|| p.p.check()).and(|| p.q.as_ref().map_or(Verdict::Pass, |q| q.check()));
            }
            Ok(from_verdict(v))
        })();
        ctx.push(format!("p_n and q_n are natural chain maps {label}"), r);
    }
    let r = (|| -> Res<Comparison> {
        let h = literal_window(cfg, KLEISLI_WINDOW);
        let p1 = calc::poly_approx(&ChainFunctor::from_expr(&square(), cfg.field, h)?, 1, h)?.value;
        let tower = ComonadTower::new(Unary::shared(&square(), cfg.field)?, 2, h);
        let mut out = Comparison::exact(true, String::new);
        for d in 0..=cfg.max_dim {
            let c = compare_homology(&p1.eval_obj(&[d])?, &tower.resolution(d)?)?;
            out = out.and(Comparison { verdict: c.verdict(), homology_lhs: c.lhs, homology_rhs: c.rhs, degrees: c.upto + 1 });
        }
        Ok(out)
    })();
    ctx.push("P_1(X^2) matches the explicit C_2 tower", r);
}

fn d1_linearity(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = ctx.settings();
    let exprs = ctx.exprs(vec![square(), add_const(), cube()]);
    for e in &exprs {
        let label = e.to_string();
        let r = (|| -> Res<Comparison> {
            let d1 = calc::linearize_d1(&cf(cfg, e)?, s)?;
            let t = HomologyTable::new(&d1)?;
            for xy in tuples(2, cfg.max_dim) {
                let whole = t.at(&[xy[0] + xy[1]], None)?;
                let parts: Vec<usize> = t.at(&[xy[0]], None)?.iter().zip(t.at(&[xy[1]], None)?).map(|(a, b)| a + b).collect();
                if whole != parts {
                    return Ok(Comparison { verdict: Verdict::Fail(format!("at {xy:?}")), homology_lhs: whole, homology_rhs: parts, degrees: 0 });
                }
            }
            Ok(Comparison::exact(true, String::new))
        })();
        ctx.push(format!("D_1 F(X+Y) = D_1 F(X) + D_1 F(Y) {label}"), r);
        let r = (|| -> Res<Comparison> {
            let d1 = calc::linearize_d1(&cf(cfg, e)?, s)?;
            let zero = vec![0; d1.arity()];
            Ok(Comparison::exact(d1.eval_obj(&zero)?.is_zero_object(), || "D_1 F(0) is nonzero".into()))
        })();
        ctx.push(format!("D_1 F is strictly reduced {label}"), r);
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, e)?;
            let slots: Vec<usize> = (0..f.arity()).collect();
            let lhs = calc::linearize_d1(&f.reduce(&slots)?, s)?;
            Ok(Comparison::exact(lhs == calc::linearize_d1(&f, s)?, || "D_1 cr_1 F differs from D_1 F".into()))
        })();
        ctx.push(format!("D_1 cr_1 F = D_1 F {label}"), r);
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, e)?;
            let tilde = f.reindex(&(0..f.arity()).collect::<Vec<_>>(), 2 * f.arity())?;
            let all: Vec<usize> = (0..2 * f.arity()).collect();
            let lhs = tilde.linearize(&all, s.cutoff, s.mode)?;
            let rhs = calc::extend(&calc::linearize_d1(&f, s)?, 2 * f.arity())?;
            Ok(Comparison::exact(lhs == rhs, || "simultaneous D_1 of F(X) in (X, Y) differs".into()))
        })();
        ctx.push(format!("D_1^(X x Y) F(X) = D_1 F(X) {label}"), r);
    }
    let r = (|| -> Res<Comparison> {
        let (f, g) = (cf(cfg, &square())?, cf(cfg, &add_const())?);
        let lhs = calc::linearize_d1(&f.direct_sum(&g)?, s)?;
        let rhs = calc::linearize_d1(&f, s)?.direct_sum(&calc::linearize_d1(&g, s)?)?;
        let dims_ok = tuples(1, cfg.max_dim).iter().all(|t| lhs.eval_obj(t).ok().map(|c| c.dims().to_vec()) == rhs.eval_obj(t).ok().map(|c| c.dims().to_vec()));
        Ok(Comparison::exact(dims_ok, || "dimensions differ".into()).and(calc::compare(&lhs, &rhs, &tuples(1, cfg.max_dim))?))
    })();
    ctx.push("D_1(F + G) = D_1 F + D_1 G", r);
    let r = (|| -> Res<Comparison> {
        let (f, g) = (cf(cfg, &square())?, cf(cfg, &add_const())?);
        let paired = calc::pairing(&[f.clone(), g.clone()])?;
        let lhs = paired.linearize(&[2], s.cutoff, s.mode)?;
        let rhs = calc::pairing(&[calc::linearize_d1(&f, s)?, calc::linearize_d1(&g, s)?])?;
        Ok(Comparison::exact(lhs == rhs, || "componentwise linearization differs".into()))
    })();
    ctx.push("D_1 <F, G> = <D_1 F, D_1 G>", r);
    let r = (|| -> Res<Comparison> { Ok(calc::expect_homology(&calc::linearize_d1(&cf(cfg, &add_const())?, s)?, &tuples(1, cfg.max_dim), |t| vec![t[0]])?) })();
    ctx.push("D_1(A+X) is the identity", r);
    let r = (|| -> Res<Comparison> { Ok(Comparison::exact(calc::linearize_d1(&cf(cfg, &FunctorExpr::constant(2))?, s)?.is_zero(), || "nonzero".into())) })();
    ctx.push("D_1 of a constant is zero", r);
    let r = (|| -> Res<Comparison> {
        let n = cfg.window.min(5);
        let lit = calc::linearize_d1(&ChainFunctor::from_expr(&square(), cfg.field, n)?, Settings::literal(n))?;
        let bad = (0..=cfg.max_dim).find(|&d| lit.eval_obj(&[d]).map_or(true, |c| (0..=n).any(|k| c.dim(k) != (1 << k) * d * d)));
        Ok(Comparison::exact(bad.is_none(), || format!("at dim {}", bad.unwrap())))
    })();
    ctx.push("D_1(X^2) has dims 2^k d^2", r);
    let r = (|| -> Res<Comparison> {
        let cr2 = cf(cfg, &square())?.cross_effect(0, 2)?;
        let sim = calc::multilinearize(&cr2, &Multilinearization::Simultaneous(vec![0, 1]), s.with_mode(ResolutionMode::Literal))?;
        Ok(calc::expect_homology(&sim, &tuples(2, cfg.max_dim), |_| Vec::new())?)
    })();
    ctx.push("simultaneous D_1 of cr_2 is contractible", r);
    let r = (|| -> Res<Comparison> {
        let cr2 = cf(cfg, &cube())?.cross_effect(0, 2)?;
        let a = calc::multilinearize(&cr2, &Multilinearization::Sequential(vec![0, 1]), s)?;
        let b = calc::multilinearize(&cr2, &Multilinearization::Sequential(vec![1, 0]), s)?;
        Ok(calc::compare(&a, &b, &tuples(2, cfg.max_dim))?)
    })();
    ctx.push("sequential D_1 is order independent", r);
    let r = (|| -> Res<Comparison> {
        let pi = calc::projection(cfg.field, 2, 0, cfg.window)?;
        let lin = calc::multilinearize(&pi, &Multilinearization::Simultaneous(vec![0, 1]), s)?;
        Ok(Comparison::exact(lin == pi.with_window(lin.window()), || "D_1 of the projection differs".into()))
    })();
    ctx.push("D_1^(X x Y) pi = pi", r);
}

fn d1_chain_rule(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = ctx.settings();
    let grid1 = tuples(1, cfg.max_dim);
    for (fe, ge) in ctx.pairs(vec![(square(), square()), (square(), add_const()), (add_const(), square()), (cube(), square())]) {
        let label = format!("{fe} o {ge}");
        let r = (|| -> Res<Comparison> {
            let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
            let lhs = calc::linearize_d1(&f.substitute(std::slice::from_ref(&g))?, s)?;
            Ok(calc::compare(&lhs, &calc::d1_chain_rule_rhs(&f, &g, s)?, &tuples(g.arity(), cfg.max_dim))?)
        })();
        ctx.push(format!("D_1(F o G) = D_1 F o D_1 G + D_1 cr_2 F(G(0), cr_1 G) {label}"), r);
        let r = (|| -> Res<Comparison> {
            let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
            let slots: Vec<usize> = (0..g.arity()).collect();
            let lhs = f.substitute(std::slice::from_ref(&g))?.reduce(&slots)?;
            let main = f.reduce(&[0])?.substitute(&[g.reduce(&slots)?])?;
            let corr = f.cross_effect(0, 2)?.substitute(&[g.at_zero(&slots)?, g.reduce(&slots)?])?;
            Ok(calc::compare(&lhs, &main.direct_sum(&corr)?, &tuples(g.arity(), cfg.max_dim))?)
        })();
        ctx.push(format!("cr_1(F o G) = cr_1 F o cr_1 G + cr_2 F(G(0), cr_1 G) {label}"), r);
    }
    let r = (|| -> Res<Comparison> {
        let (f, g) = (cf(cfg, &square())?, cf(cfg, &add_const())?);
        let lhs = calc::linearize_d1(&f.substitute(std::slice::from_ref(&g))?, s)?;
        let bare = calc::linearize_d1(&f, s)?.substitute(&[calc::linearize_d1(&g, s)?])?;
        Ok(expect_fail(calc::compare(&lhs, &bare, &grid1)?))
    })();
    ctx.push("unreduced G needs the correction term (expected failure)", r);
    let r = (|| -> Res<Comparison> {
        let n = literal_window(cfg, KLEISLI_WINDOW);
        let d1sq = calc::linearize_d1(&ChainFunctor::from_expr(&square(), cfg.field, n)?, Settings::literal(n))?;
        let literal = kleisli_compose(Rc::new(d1sq.clone()), vec![Rc::new(d1sq.clone())])?;
        let symbolic = calc::linearize_d1(&ChainFunctor::from_expr(&FunctorExpr::tensor_power(4), cfg.field, n)?, Settings::literal(n))?;
        let mut out = Comparison::exact(true, String::new);
        for d in 0..=cfg.max_dim.min(1) {
            let c = compare_homology(&literal.eval_obj(&[d])?, &symbolic.eval_obj(&[d])?)?;
            out = out.and(Comparison { verdict: c.verdict(), homology_lhs: c.lhs, homology_rhs: c.rhs, degrees: c.upto + 1 });
        }
        Ok(out)
    })();
    ctx.push("prolonged D_1(X^2) o D_1(X^2) matches D_1(X^4)", r);
}

fn nabla_defs_agree(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = ctx.settings();
    for e in ctx.exprs(vec![FunctorExpr::identity(), add_const(), square()]) {
        let label = e.to_string();
        let grid2 = tuples(2 * e.arity(), cfg.max_dim);
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, &e)?;
            Ok(calc::compare(&calc::nabla(&f, NablaDefinition::ViaSum, s)?, &calc::nabla(&f, NablaDefinition::ViaKernel, s)?, &grid2)?)
        })();
        ctx.push(format!("sum definition = kernel definition {label}"), r);
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, &e)?;
            Ok(calc::compare(&calc::nabla(&f, NablaDefinition::ViaSum, s)?, &calc::nabla(&f, NablaDefinition::Decomposition, s)?, &grid2)?)
        })();
        ctx.push(format!("sum definition = D_1 F(V) + D_1 cr_2 F(X, V) {label}"), r);
        let r = (|| -> Res<Comparison> {
            let h = literal_window(cfg, KLEISLI_WINDOW);
            let symbolic = calc::nabla(&ChainFunctor::from_expr(&e, cfg.field, h)?, NablaDefinition::ViaKernel, Settings::literal(h))?;
            let mut out = Comparison::exact(true, String::new);
            for x in 0..=cfg.max_dim {
                for v in 1..=cfg.max_dim.min(1) {
                    let c = compare_homology(&symbolic.eval_obj(&[x, v])?, &calc::nabla_concrete(&e, cfg.field, x, v, h)?)?;
                    out = out.and(Comparison { verdict: c.verdict(), homology_lhs: c.lhs, homology_rhs: c.rhs, degrees: c.upto + 1 });
                }
            }
            Ok(out)
        })();
        ctx.push(format!("kernel definition matches the explicit C_2 tower {label}"), r);
    }
}

fn cdc_suite(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = ctx.settings();
    let nab = |f: &ChainFunctor| calc::nabla(f, NablaDefinition::ViaSum, s);
    let g2 = tuples(2, cfg.max_dim);
    let g4 = tuples(4, cfg.max_dim);
    for (fe, ge) in ctx.pairs(vec![(square(), add_const()), (square(), square())]) {
        let label = format!("F = {fe}, G = {ge}");
        let r = (|| -> Res<Comparison> {
            let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
            Ok(calc::compare(&nab(&f.direct_sum(&g)?)?, &nab(&f)?.direct_sum(&nab(&g)?)?, &g2)?)
        })();
        ctx.push(format!("(i) nabla(F + G) = nabla F + nabla G, {label}"), r);
        let r = (|| -> Res<Comparison> {
            let t = HomologyTable::new(&nab(&cf(cfg, &fe)?)?)?;
            for xvw in tuples(3, cfg.max_dim) {
                let lhs = t.at(&[xvw[0], xvw[1] + xvw[2]], None)?;
                let rhs: Vec<usize> = t.at(&[xvw[0], xvw[1]], None)?.iter().zip(t.at(&[xvw[0], xvw[2]], None)?).map(|(a, b)| a + b).collect();
                if lhs != rhs {
                    return Ok(Comparison { verdict: Verdict::Fail(format!("at {xvw:?}")), homology_lhs: lhs, homology_rhs: rhs, degrees: 0 });
                }
            }
            Ok(Comparison::exact(true, String::new))
        })();
        ctx.push(format!("(ii) nabla F(V + W; X) = nabla F(V; X) + nabla F(W; X), {label}"), r);
        let r = (|| -> Res<Comparison> {
            let n = nab(&cf(cfg, &fe)?)?;
            let bad = (0..=cfg.max_dim).find(|&x| n.eval_obj(&[x, 0]).map_or(true, |c| !c.is_zero_object()));
            Ok(Comparison::exact(bad.is_none(), || format!("nonzero at X = {}", bad.unwrap())))
        })();
        ctx.push(format!("(ii) nabla F(0; X) = 0 exactly, {label}"), r);
        let r = (|| -> Res<Comparison> {
            let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
            let np = calc::nabla_pairing(&calc::pairing(&[f.clone(), g.clone()])?, 2, s)?;
            let (nf, ng) = (nab(&f)?, nab(&g)?);
            for t in &g2 {
                let a = calc::same_complex(&np.eval_obj(&[1, 0, t[0], t[1]])?, &nf.eval_obj(t)?);
                let b = calc::same_complex(&np.eval_obj(&[0, 1, t[0], t[1]])?, &ng.eval_obj(t)?);
                if !(a && b) {
                    return Ok(Comparison::exact(false, || format!("at {t:?}")));
                }
            }
            Ok(Comparison::exact(true, String::new))
        })();
        ctx.push(format!("(iv) nabla <F, G> = <nabla F, nabla G> exactly, {label}"), r);
        let r = (|| -> Res<Comparison> {
            let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
            let lhs = nab(&f.substitute(std::slice::from_ref(&g))?)?;
            let rhs = nab(&f)?.substitute(&[calc::extend(&g, 2)?, nab(&g)?])?;
            Ok(calc::compare(&lhs, &rhs, &g2)?)
        })();
        ctx.push(format!("(v) nabla(F o G)(V; X) = nabla F(nabla G(V; X); G(X)), {label}"), r);
        // ∇∇F has slots (X, V, W, Z) for the point ((Z; W); (V; X))
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, &fe)?;
            let at: Vec<Vec<usize>> = g4.iter().filter(|t| t[1] == 0 && t[2] == 0).cloned().collect();
            Ok(calc::compare_on(&nab(&nab(&f)?)?, &nab(&f)?, &at, |t| vec![t[0], t[3]])?)
        })();
        ctx.push(format!("(vi) nabla nabla F((Z; 0); (0; X)) = nabla F(Z; X), {label}"), r);
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, &fe)?;
            let at: Vec<Vec<usize>> = g4.iter().filter(|t| t[2] == 0).cloned().collect();
            Ok(calc::compare_on(&nab(&nab(&f)?)?, &nab(&f)?, &at, |t| vec![t[0], t[3]])?)
        })();
        ctx.push(format!("(vi) secondary form at ((Z; 0); (V; X)), {label}"), r);
        let r = (|| -> Res<Comparison> {
            let nn = nab(&nab(&cf(cfg, &fe)?)?)?;
            Ok(calc::compare_on(&nn, &nn, &g4, |t| vec![t[0], t[2], t[1], t[3]])?)
        })();
        ctx.push(format!("(vii) nabla nabla F((Z; W); (V; X)) = nabla nabla F((Z; V); (W; X)), {label}"), r);
        let r = (|| -> Res<Comparison> {
            let f = cf(cfg, &fe)?;
            let nn = nab(&nab(&f)?)?;
            let first = nab(&f)?.reindex(&[0, 3], 4)?;
            let second = calc::nabla_iterated(&f, 2, IteratedForm::Recursive, s)?.reindex(&[0, 1, 2], 4)?;
            Ok(calc::compare(&nn, &first.direct_sum(&second)?, &g4)?)
        })();
        ctx.push(format!("nabla nabla F = nabla F(Z; X) + nabla^2 F(W, V; X), {label}"), r);
    }
    let r = (|| -> Res<Comparison> { Ok(calc::expect_homology(&nab(&cf(cfg, &FunctorExpr::identity())?)?, &g2, |t| vec![t[1]])?) })();
    ctx.push("(iii) nabla Id(V; X) = V", r);
}

fn faa_di_bruno(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = ctx.settings();
    let small = cfg.max_dim.min(1);
    for e in ctx.exprs(vec![square()]) {
        let label = e.to_string();
        for n in 1..=cfg.max_n {
            let r = (|| -> Res<Comparison> {
                let f = cf(cfg, &e)?;
                Ok(calc::compare(&calc::delta_n(&f, n, DeltaRoute::Recursive, s)?, &calc::faa_di_bruno_rhs(&f, n, s)?, &tuples(n + 1, small))?)
            })();
            ctx.push(format!("Delta_{n} F = sum over partitions {label}"), r);
            let r = (|| -> Res<Comparison> {
                let f = cf(cfg, &e)?;
                Ok(calc::compare(&calc::delta_n(&f, n, DeltaRoute::Recursive, s)?, &calc::delta_n(&f, n, DeltaRoute::Projection, s)?, &tuples(n + 1, small))?)
            })();
            ctx.push(format!("Delta_{n} by L_n recursion = by d_n restriction {label}"), r);
            let r = (|| -> Res<Comparison> {
                let f = cf(cfg, &e)?;
                let a = calc::nabla_iterated(&f, n, IteratedForm::Recursive, s)?;
                let b = calc::nabla_iterated(&f, n, IteratedForm::ClosedForm, s)?;
                Ok(calc::compare(&a, &b, &tuples(n + 1, small))?)
            })();
            ctx.push(format!("nabla^{n} recursive = closed form {label}"), r);
        }
    }
    let r = (|| -> Res<Comparison> {
        // Bell numbers from the Bell triangle, independent of the enumeration
        let mut row = vec![1u128];
        let mut bell = vec![1u128];
        for _ in 1..=7 {
            let mut next = vec![*row.last().unwrap()];
            for x in &row {
                next.push(next.last().unwrap() + x);
            }
            bell.push(next[0]);
            row = next;
        }
        for (n, &b) in bell.iter().enumerate().skip(1) {
            let counts = calc::profile_counts(n);
            let total: u128 = counts.keys().map(calc::partition_multiplicity).sum();
            if total != b || counts.iter().any(|(p, &c)| calc::partition_multiplicity(p) != c) {
                return Ok(Comparison::exact(false, || format!("n = {n}")));
            }
        }
        Ok(Comparison::exact(true, String::new))
    })();
    ctx.push("partition multiplicities match enumeration, n <= 7", r);
}

fn higher_chain_rule(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = match ctx.settings() {
        Settings { cutoff, mode: ResolutionMode::Auto { budget } } => Settings { cutoff, mode: ResolutionMode::Auto { budget: budget / COMPOSITE_BUDGET_DIVISOR } },
        s => s,
    };
    for (fe, ge) in ctx.pairs(vec![(square(), square()), (add_const(), square())]) {
        for n in 1..=cfg.max_n.min(2) {
            let r = (|| -> Res<Comparison> {
                let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
                let lhs = calc::delta_n(&f.substitute(std::slice::from_ref(&g))?, n, DeltaRoute::Recursive, s)?;
                Ok(calc::compare(&lhs, &calc::higher_chain_rule_rhs(&f, &g, n, s)?, &tuples(n + 1, cfg.max_dim.min(1)))?)
            })();
            ctx.push(format!("Delta_{n}(F o G) = Delta_{n} F o K_{n} G, F = {fe}, G = {ge}"), r);
        }
    }
}

fn tangent_functoriality(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = ctx.settings();
    for (fe, ge) in ctx.pairs(vec![(square(), add_const()), (add_const(), square())]) {
        let r = (|| -> Res<Comparison> {
            let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
            let lhs = calc::tangent(&[f.substitute(std::slice::from_ref(&g))?], s)?;
            let tg = calc::tangent(&[g], s)?;
            let tf = calc::tangent(&[f], s)?;
            let mut out = Comparison::exact(true, String::new);
            for (l, r) in lhs.iter().zip(&tf) {
                out = out.and(calc::compare(l, &r.substitute(&tg)?, &tuples(2, cfg.max_dim))?);
            }
            Ok(out)
        })();
        ctx.push(format!("T(F o G) = TF o TG, F = {fe}, G = {ge}"), r);
    }
    for e in ctx.exprs(vec![square()]) {
        for n in 1..=cfg.max_n.min(2) {
            let r = (|| -> Res<Comparison> {
                let f = cf(cfg, &e)?;
                let tn = calc::tangent_power(&f, n, s)?;
                let mut out = Comparison::exact(true, String::new);
                for (subset, comp) in tn.iter().enumerate() {
                    out = out.and(calc::compare(comp, &calc::tangent_component(&f, n, subset, s)?, &tuples(1 << n, 1))?);
                }
                Ok(out)
            })();
            ctx.push(format!("(T^{n} F)_S = nabla^(x|S|) F o iota_S {e}"), r);
            let r = (|| -> Res<Comparison> {
                let g = cf(cfg, &e)?;
                let pushed = Reindexer::d(n).push(&calc::k_n(&g, n, s)?)?;
                let tn = calc::tangent_power(&g, n, s)?;
                let mut out = Comparison::exact(true, String::new);
                for (lhs, comp) in pushed.iter().zip(&tn) {
                    out = out.and(calc::compare(lhs, &Reindexer::d(n).pull(comp)?, &tuples(n + 1, cfg.max_dim.min(1)))?);
                }
                Ok(out)
            })();
            ctx.push(format!("d_{n}^* K_{n} G = T^{n} G d_{n}^* {e}"), r);
        }
    }
    let bad = (0..=6).find(|&n| !calc::check_commuting_projections(n));
    ctx.push("d_n = a_n (1 x d_(n-1))", Ok(Comparison::exact(bad.is_none(), || format!("n = {}", bad.unwrap()))));
    let r = (|| -> Res<Comparison> {
        let f = cf(cfg, &FunctorExpr::infer(Term::tensor(Term::var(0), Term::var(1))).expect("closed term"))?;
        let (c, c2) = (Reindexer::new(vec![2, 0], 3)?, Reindexer::new(vec![1, 1, 0], 2)?);
        let composed = Reindexer::new(c.map.iter().map(|&i| c2.map[i]).collect(), 2)?;
        Ok(Comparison::exact(c2.pull(&c.pull(&f)?)? == composed.pull(&f)?, || "reindexing is not functorial".into()))
    })();
    ctx.push("reindexing composes", r);
}

fn appendix_a(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in 0..24 {
        let field = if i % 2 == 0 { Field::F2 } else { Field::Rational };
        let shape = Shape { rows: 1 + (rng.next_u32() % 4) as usize, row_len: 1 + (rng.next_u32() % 5) as usize, max_dim: 1 + (rng.next_u32() % 3) as usize };
        let seed = cfg.seed.wrapping_add(i);
        let r = random_row_sdr(seed, field, shape);
        let v = r.validate().and(|| check_sdr_relations(&r)).and(|| check_theorem(&r));
        ctx.push(format!("row SDR {i} over {} ({}x{}, dims <= {})", field_name(field), shape.rows, shape.row_len, shape.max_dim), Ok(from_verdict(v)));
    }
}

fn prolongation_equivalence(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let n = literal_window(cfg, LITERAL_WINDOW);
    let complexes = match seeded_complexes(cfg.field, cfg.seed, 4, n, false) {
        Ok(c) => c,
        Err(e) => return ctx.push("seeded complexes", Err(e)),
    };
    let f = match ChainFunctor::from_expr(&square(), cfg.field, n).and_then(|sq| sq.linearize(&[0], n, ResolutionMode::Literal)) {
        Ok(f) => f,
        Err(e) => return ctx.push("D_1(X^2)", Err(e.into())),
    };
    for (i, c) in complexes.iter().enumerate() {
        let shape = format!("{} <- {}", c.dim(0), c.dim(1));
        let r = (|| -> Res<Comparison> {
            let full = tot(&prolong(&f, c)?)?;
            let simple = tot(&prolong_simple(&f, c)?)?;
            let cmp = compare_homology(&full, &simple)?;
            Ok(Comparison { verdict: cmp.verdict(), homology_lhs: cmp.lhs, homology_rhs: cmp.rhs, degrees: cmp.upto + 1 })
        })();
        ctx.push(format!("prolong = prolong_simple for D_1(X^2), complex {i} ({shape})"), r);
        let r = (|| -> Res<Comparison> {
            let sdr = comparison_iota(&f, c)?;
            Ok(from_verdict(sdr.validate().and(|| check_sdr_relations(&sdr)).and(|| check_theorem(&sdr))))
        })();
        ctx.push(format!("comparison SDR relations, complex {i} ({shape})"), r);
    }
}

fn kleisli_laws(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let n = literal_window(cfg, KLEISLI_WINDOW);
    let small = cfg.max_dim.min(1);
    let complexes = match seeded_complexes(cfg.field, cfg.seed, 4, n, true) {
        Ok(c) => c,
        Err(e) => return ctx.push("seeded complexes", Err(e)),
    };
    for (i, c) in complexes.iter().enumerate() {
        ctx.push(format!("left unit: Tot prolong(Id) = NK, complex {i}"), Ok(from_verdict(check_left_unit(c))));
    }
    let build = || -> Res<(ChainFunctor, ChainFunctor, ChainFunctor, ChainFunctor)> {
        let sq = ChainFunctor::from_expr(&square(), cfg.field, n)?;
        let id = ChainFunctor::from_expr(&FunctorExpr::identity(), cfg.field, n)?;
        let shift = ChainFunctor::from_expr(&add_const(), cfg.field, n)?;
        let contractible = sq.linearize(&[0], n, ResolutionMode::Literal)?;
        Ok((sq, id, shift, contractible))
    };
    let (sq, id, shift, contractible) = match build() {
        Ok(t) => t,
        Err(e) => return ctx.push("functors", Err(e)),
    };
    for (label, f) in [("X^2", sq.clone()), ("D_1(X^2)", contractible.clone()), ("A+X", shift.clone())] {
        let r = (|| -> Res<Comparison> {
            let right = kleisli_compose(Rc::new(f.clone()), vec![Rc::new(id.clone())])?;
            for d in 0..=cfg.max_dim {
                if !calc::same_complex(&right.eval_obj(&[d])?, &f.eval_obj(&[d])?) {
                    return Ok(Comparison::exact(false, || format!("at dim {d}")));
                }
            }
            Ok(Comparison::exact(true, String::new))
        })();
        ctx.push(format!("right unit: {label} o Id = {label}"), r);
        let r = {
            let v = Verdict::all((0..=cfg.max_dim).map(|d| f.eval_obj(&[d]).map_or_else(|e| Verdict::Fail(e.to_string()), |c| check_left_unit(&c))));
            Ok(from_verdict(v))
        };
        ctx.push(format!("left unit: Id o {label} = {label}"), r);
    }
    let homology_over = |lhs: &dyn ChainEvaluator, rhs: &dyn ChainEvaluator| -> Res<Comparison> {
        let mut out = Comparison::exact(true, String::new);
        for d in 0..=small {
            let c = compare_homology(&lhs.eval_obj(&[d])?, &rhs.eval_obj(&[d])?)?;
            out = out.and(Comparison { verdict: c.verdict(), homology_lhs: c.lhs, homology_rhs: c.rhs, degrees: c.upto + 1 });
        }
        Ok(out)
    };
    let shared = |f: &ChainFunctor| -> SharedEvaluator { Rc::new(f.clone()) };
    let r = (|| -> Res<Comparison> {
        let base = kleisli_compose(shared(&sq), vec![shared(&shift)])?;
        let perturbed = kleisli_compose(shared(&sq), vec![shared(&shift.direct_sum(&contractible)?)])?;
        homology_over(&perturbed, &base)
    })();
    ctx.push("F o (G + C) ~ F o G for contractible C", r);
    let r = (|| -> Res<Comparison> {
        let base = kleisli_compose(shared(&sq), vec![shared(&shift)])?;
        let perturbed = kleisli_compose(shared(&sq.direct_sum(&contractible)?), vec![shared(&shift)])?;
        homology_over(&perturbed, &base)
    })();
    ctx.push("(F + C) o G ~ F o G for contractible C", r);
    let r = (|| -> Res<Comparison> {
        let literal = kleisli_compose(shared(&contractible), vec![shared(&shift)])?;
        homology_over(&literal, &contractible.substitute(std::slice::from_ref(&shift))?)
    })();
    ctx.push("prolonged composite matches the tensor normal form", r);
    let r = (|| -> Res<Comparison> {
        let inner = kleisli_compose(shared(&sq), vec![shared(&shift)])?;
        let left = kleisli_compose(shared(&shift), vec![Rc::new(inner) as SharedEvaluator])?;
        let outer = kleisli_compose(shared(&shift), vec![shared(&sq)])?;
        let right = kleisli_compose(Rc::new(outer) as SharedEvaluator, vec![shared(&shift)])?;
        homology_over(&left, &right)
    })();
    ctx.push("associativity up to homology", r);
}

fn derivative_dr(ctx: &mut Ctx) {
    let cfg = ctx.cfg;
    let s = ctx.settings();
    let grid1 = tuples(1, cfg.max_dim);
    let r = (|| -> Res<Comparison> { Ok(calc::expect_homology(&calc::derivative_functor(&cf(cfg, &FunctorExpr::identity())?, 1, s)?, &grid1, |_| vec![1])?) })();
    ctx.push("d/dR Id = R", r);
    let r = (|| -> Res<Comparison> { Ok(calc::expect_homology(&calc::derivative_functor(&cf(cfg, &square())?, 1, s)?, &grid1, |t| vec![2 * t[0]])?) })();
    ctx.push("d/dR X^2 (X) has dimension 2 dim X", r);
    let r = (|| -> Res<Comparison> { Ok(Comparison::exact(calc::derivative_functor(&cf(cfg, &FunctorExpr::constant(2))?, 1, s)?.is_zero(), || "nonzero".into())) })();
    ctx.push("d/dR of a constant is zero", r);
    for e in ctx.exprs(vec![square(), cube()]) {
        for n in 1..=cfg.max_n {
            let r = (|| -> Res<Comparison> {
                let f = cf(cfg, &e)?;
                let delta = calc::delta_n(&f, n, DeltaRoute::Recursive, s)?;
                let iterated = calc::nabla_iterated(&f, n, IteratedForm::Recursive, s)?;
                Ok(calc::compare_on(&delta, &iterated, &grid1.iter().map(|t| [vec![t[0], 1], vec![0; n - 1]].concat()).collect::<Vec<_>>(), |t| [vec![t[0]], vec![1; n]].concat())?)
            })();
            ctx.push(format!("Delta_{n} F(0, .., 0, R; X) = nabla^{n} F(R, .., R; X) {e}"), r);
        }
    }
    for (fe, ge) in ctx.pairs(vec![(square(), square()), (add_const(), square())]) {
        for n in 1..=cfg.max_n.min(2) {
            let r = (|| -> Res<Comparison> {
                let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
                let lhs = calc::derivative_functor(&f.substitute(std::slice::from_ref(&g))?, n, s)?;
                let rhs = calc::derivative_chain_rule_rhs(&calc::delta_n(&f, n, DeltaRoute::Recursive, s)?, &g, n, s)?;
                Ok(calc::compare(&lhs, &rhs, &grid1)?)
            })();
            ctx.push(format!("d^{n}/dR^{n}(F o G) = Delta_{n} F(d^n G, .., dG; G), F = {fe}, G = {ge}"), r);
            let r = (|| -> Res<Comparison> {
                let (f, g) = (cf(cfg, &fe)?, cf(cfg, &ge)?);
                let lhs = calc::derivative_functor(&f.substitute(std::slice::from_ref(&g))?, n, s)?;
                let rhs = calc::derivative_chain_rule_rhs(&calc::faa_di_bruno_rhs(&f, n, s)?, &g, n, s)?;
                Ok(calc::compare(&lhs, &rhs, &grid1)?)
            })();
            ctx.push(format!("d^{n}/dR^{n}(F o G) as a sum over partitions, F = {fe}, G = {ge}"), r);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown scenario `{0}`")]
pub struct UnknownScenario(pub String);

pub fn resolve_names(name: &str) -> Result<Vec<&'static str>, UnknownScenario> {
    if name == "all" {
        return Ok(CATALOG.to_vec());
    }
    CATALOG.iter().find(|&&n| n == name).map(|&n| vec![n]).ok_or_else(|| UnknownScenario(name.into()))
}

pub fn run_scenario(name: &str, cfg: &Config) -> Result<Report, UnknownScenario> {
    let mut ctx = Ctx { cfg, checks: Vec::new() };
    match name {
        "cross-effects" => cross_effects(&mut ctx),
        "p0-model" => p0_model(&mut ctx),
        "pn-degree" => pn_degree(&mut ctx),
        "d1-linearity" => d1_linearity(&mut ctx),
        "d1-chain-rule" => d1_chain_rule(&mut ctx),
        "nabla-defs-agree" => nabla_defs_agree(&mut ctx),
        "cdc-suite" => cdc_suite(&mut ctx),
        "faa-di-bruno" => faa_di_bruno(&mut ctx),
        "higher-chain-rule" => higher_chain_rule(&mut ctx),
        "tangent-functoriality" => tangent_functoriality(&mut ctx),
        "appendix-a" => appendix_a(&mut ctx),
        "prolongation-equivalence" => prolongation_equivalence(&mut ctx),
        "kleisli-laws" => kleisli_laws(&mut ctx),
        "derivative-dR" => derivative_dr(&mut ctx),
        other => return Err(UnknownScenario(other.into())),
    }
    Ok(Report { schema_version: SCHEMA_VERSION, scenario: name.into(), field: field_name(cfg.field), window: cfg.window, checks: ctx.checks, wall_ms: 0 })
}

/// Run several scenarios on the rayon pool; reports come back in input order.
pub fn run_all(names: &[&str], cfg: &Config) -> Result<Vec<Report>, UnknownScenario> {
    use rayon::prelude::*;
    names.par_iter().map(|n| run_scenario(n, cfg)).collect()
}
