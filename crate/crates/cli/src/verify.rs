//! Built-in invariant suites for `grf verify`.

use std::fmt;
use std::sync::Arc;

use grf_core::dynamics::rhs_component;
use grf_core::equilibria::ANALYTIC_TOL;
use grf_core::group::subgroup_of_square;
use grf_core::ring::extend_automorphism;
use grf_core::{
    amat, classify, null_inclusion_check, null_space, nullity_bruteforce, parse_group_spec, residual, simulate, skew,
    Automorphism, Complex64, ComplexEnsemble, FiniteGroup, GroupElementId, GroupRingElement, RealEnsemble, Result,
    SimConfig,
};

use crate::args::Suite;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
}

impl Check {
    fn new(name: &'static str, worst: f64, tol: f64) -> Self {
        Check { name, worst, tol }
    }

    /// An exact check: `worst` counts violations.
    fn exact(name: &'static str, violations: usize) -> Self {
        Check::new(name, violations as f64, 0.0)
    }

    pub fn pass(&self) -> bool {
        self.worst <= self.tol
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass() { "PASS" } else { "FAIL" };
        if self.tol == 0.0 {
            write!(f, "[{tag}] {} violations={}", self.name, self.worst)
        } else {
            write!(f, "[{tag}] {} worst={:.3e} tol={:e}", self.name, self.worst, self.tol)
        }
    }
}

const RING_TOL: f64 = 1e-12;

type C = GroupRingElement<Complex64>;

fn rel(a: &C, b: &C) -> f64 {
    let scale = 1.0
        + a.coeffs()
            .iter()
            .chain(b.coeffs())
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    a.max_abs_diff(b).unwrap_or(f64::INFINITY) / scale
}

fn automorphism_for(g: &FiniteGroup) -> Result<Automorphism> {
    if g.is_abelian() {
        Automorphism::inversion(g)
    } else {
        Automorphism::conjugation(g, GroupElementId(g.order() - 1))
    }
}

/// (x y)_g rebuilt from the permutation matrices as x · A^g · conj(y†)ᵀ.
fn product_via_amat(g: &FiniteGroup, x: &C, y: &C) -> Result<Vec<Complex64>> {
    let yd = y.dagger();
    g.elements()
        .map(|a| {
            let m = amat(g, a)?;
            let mut s = Complex64::new(0.0, 0.0);
            for i in 0..g.order() {
                for j in 0..g.order() {
                    if m.get(i, j) != 0 {
                        s += x.coeffs()[i] * yd.coeffs()[j].conj();
                    }
                }
            }
            Ok(s)
        })
        .collect()
}

pub fn ring_suite(g: &Arc<FiniteGroup>, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let mut worst = [0.0f64; 11];
    let e = C::unit(g);
    let phi = automorphism_for(g)?;
    for t in 0..trials {
        let ens = ComplexEnsemble::random_unit(g, 3, 1.0, seed.wrapping_add(t as u64))?;
        let (x, y, z) = (ens.agent(0), ens.agent(1), ens.agent(2));
        let xy = x.mul(y)?;
        let lift = |v: &C| extend_automorphism(&phi, v);
        let via_amat = product_via_amat(g, x, y)?;
        let conv_defect = xy
            .coeffs()
            .iter()
            .zip(&via_amat)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let d = [
            rel(&xy.mul(z)?, &x.mul(&y.mul(z)?)?),
            rel(&x.mul(&y.add(z)?)?, &xy.add(&x.mul(z)?)?).max(rel(&y.add(z)?.mul(x)?, &y.mul(x)?.add(&z.mul(x)?)?)),
            rel(&e.mul(x)?, x).max(rel(&x.mul(&e)?, x)),
            rel(&xy.dagger(), &y.dagger().mul(&x.dagger())?),
            (xy.trace() - y.mul(x)?.trace()).norm(),
            (x.dagger().mul(y)?.trace() - x.inner(y)?).norm(),
            (x.inner(y)?.norm() - x.norm() * y.norm()).max(0.0),
            (x.dagger().norm() - x.norm()).abs(),
            conv_defect,
            rel(&lift(&xy)?, &lift(x)?.mul(&lift(y)?)?),
            rel(&lift(&x.dagger())?, &lift(x)?.dagger()),
        ];
        for (w, v) in worst.iter_mut().zip(d) {
            *w = w.max(v);
        }
    }
    let names = [
        "ring.associativity",
        "ring.distributivity",
        "ring.identity_unit",
        "ring.dagger_reverses_products",
        "ring.trace_cyclic",
        "ring.inner_is_trace_form",
        "ring.cauchy_schwarz",
        "ring.dagger_isometry",
        "ring.convolution_matches_amat",
        "ring.automorphism_multiplicative",
        "ring.automorphism_commutes_with_dagger",
    ];
    let mut out: Vec<Check> = names
        .iter()
        .zip(worst)
        .map(|(n, w)| Check::new(n, w, RING_TOL))
        .collect();

    let mats = g.elements().map(|a| amat(g, a)).collect::<Result<Vec<_>>>()?;
    let mut perm_bad = 0;
    let mut transpose_bad = 0;
    let mut hom_bad = 0;
    for (i, m) in mats.iter().enumerate() {
        perm_bad += usize::from(!m.is_permutation());
        perm_bad += mats[i + 1..].iter().filter(|o| *o == m).count();
        transpose_bad += usize::from(m.transpose() != mats[g.inverse(GroupElementId(i)).index()]);
        for (j, n) in mats.iter().enumerate() {
            let ij = g.mul(GroupElementId(i), GroupElementId(j)).index();
            hom_bad += usize::from(m.matmul(n)? != mats[ij]);
        }
    }
    out.push(Check::exact("amat.distinct_permutations", perm_bad));
    out.push(Check::exact("amat.transpose_is_inverse", transpose_bad));
    out.push(Check::exact("amat.homomorphism", hom_bad));
    Ok(out)
}

pub fn dynamics_suite(g: &Arc<FiniteGroup>, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let dt = 1e-3;
    let ens = ComplexEnsemble::random_unit(g, 5, 1.0, seed)?;
    let tr = simulate(&ens, &SimConfig::new(dt, 10.0))?;
    let r = &tr.records;
    let drift = r
        .iter()
        .map(|d| (d.min_norm - 1.0).abs().max((d.max_norm - 1.0).abs()))
        .fold(0.0, f64::max);
    let v_rise = r.windows(2).map(|w| w[1].v - w[0].v).fold(0.0, f64::max);
    let r2_fall = r.windows(2).map(|w| w[0].r2 - w[1].r2).fold(0.0, f64::max);
    let identity = r.iter().map(|d| (d.v - (2.0 - 2.0 * d.r2)).abs()).fold(0.0, f64::max);
    let mut diss: f64 = 0.0;
    for k in 1..r.len().saturating_sub(1) {
        let dv = (r[k + 1].v - r[k - 1].v) / (r[k + 1].t - r[k - 1].t);
        if dv.abs() > 1e-6 {
            diss = diss.max((dv + r[k].dissipation).abs() / dv.abs());
        }
    }

    let mut oracle: f64 = 0.0;
    for t in 0..trials {
        let e = ComplexEnsemble::random_unit(g, 4, 1.0, seed.wrapping_add(1 + t as u64))?;
        for (fast, slow) in grf_core::rhs(&e).iter().zip(rhs_component(&e)) {
            for (a, b) in fast.coeffs().iter().zip(&slow) {
                oracle = oracle.max((a - b).norm());
            }
        }
    }

    let phi = automorphism_for(g)?;
    let cfg = SimConfig::new(dt, 2.0);
    let mapped_after = simulate(&ens, &cfg)?.final_state.map_automorphism(&phi)?;
    let mapped_before = simulate(&ens.map_automorphism(&phi)?, &cfg)?.final_state;
    let equivariance = mapped_after.max_abs_diff(&mapped_before)?;

    Ok(vec![
        Check::new("dynamics.norm_conservation", drift, 1e-8),
        Check::new("dynamics.lyapunov_nonincreasing", v_rise, 1e-9),
        Check::new("dynamics.variance_identity", identity, 1e-10),
        Check::new("dynamics.dissipation_matches_dv_dt", diss, 1e-4),
        Check::new("dynamics.order_parameter_nondecreasing", r2_fall, 1e-9),
        Check::new("dynamics.rhs_matches_component_form", oracle, 1e-12),
        Check::new("dynamics.automorphism_equivariance", equivariance, 1e-8),
    ])
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn equilibria_suite(g: &Arc<FiniteGroup>, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let cyclic = g.render().starts_with('Z') && !g.render().contains('x');
    let mut nullity_bad = 0;
    let mut gcd_bad = 0;
    let mut annihilate_bad = 0;
    let mut inclusion_bad = 0;
    for a in g.elements() {
        let ns = null_space(g, a)?;
        let formula = g.order() / subgroup_of_square(g, a)?.order();
        let brute = nullity_bruteforce(g, a)?;
        nullity_bad += usize::from(!(ns.nullity() == formula && formula == brute));
        if cyclic {
            let (n, m) = (g.order(), a.index());
            gcd_bad += usize::from(brute != if m == 0 { n } else { gcd(2 * m, n) });
        }
        let s = skew(g, a)?;
        for b in ns.basis() {
            annihilate_bad += usize::from(s.matrix().row_action(b)?.iter().any(|&v| v != 0));
        }
        for n in -6..=6 {
            inclusion_bad += usize::from(!null_inclusion_check(g, a, n)?);
        }
    }

    let mut disagree = 0;
    for t in 0..trials {
        let s = seed.wrapping_add(t as u64);
        let random = RealEnsemble::random_unit(g, 4, 1.0, s)?;
        let x = random.agent(0).clone();
        let aggregated = RealEnsemble::new(g, vec![x.clone(), x.clone(), x], 1.0)?;
        for ens in [&random, &aggregated] {
            let rep = classify(ens, ANALYTIC_TOL)?;
            disagree += usize::from(rep.is_equilibrium != (residual(ens) <= ANALYTIC_TOL));
        }
    }

    let mut out = vec![
        Check::exact("equilibria.nullity_coset_formula_vs_integer_rank", nullity_bad),
        Check::exact("equilibria.coset_basis_annihilated", annihilate_bad),
        Check::exact("equilibria.null_space_inclusion", inclusion_bad),
        Check::exact("equilibria.classify_agrees_with_residual", disagree),
    ];
    if cyclic {
        out.insert(1, Check::exact("equilibria.cyclic_nullity_is_gcd", gcd_bad));
    }
    Ok(out)
}

pub fn run_suite(spec: &str, suite: Suite, seed: u64, trials: usize) -> Result<Vec<Check>> {
    let g = Arc::new(parse_group_spec(spec)?);
    let mut out = Vec::new();
    if matches!(suite, Suite::Ring | Suite::All) {
        out.extend(ring_suite(&g, seed, trials)?);
    }
    if matches!(suite, Suite::Dynamics | Suite::All) {
        out.extend(dynamics_suite(&g, seed, trials)?);
    }
    if matches!(suite, Suite::Equilibria | Suite::All) {
        out.extend(equilibria_suite(&g, seed, trials)?);
    }
    Ok(out)
}
