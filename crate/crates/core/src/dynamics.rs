//! The first-order aggregation flow on K[G]:
//!
//! ```text
//! dxⁱ/dt = κ [ x^c (xⁱ)† xⁱ − xⁱ (x^c)† xⁱ ],   x^c = (1/N) Σ xⁱ
//! ```
//!
//! together with its diagnostics: the order parameter R² = ‖x^c‖², the
//! Lyapunov functional V (mean pairwise squared distance), and the exact
//! dissipation rate −dV/dt = (2κ/N) Σ ‖x^c(xⁱ)† − xⁱ(x^c)†‖².
//!
//! Integration is fixed-step classical RK4 on a flat coefficient buffer.
//! Norm conservation and V-monotonicity are properties of the continuous
//! flow; the integrator does not enforce them, so they can be measured.

use std::sync::Arc;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{Automorphism, FiniteGroup};
use crate::ring::{self, convolve_into, dagger_into, GroupRingElement};
use crate::scalar::{FieldMode, RealScalar, Scalar};

/// N agents in K[G] plus the coupling strength κ ≥ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T: Scalar> {
    group: Arc<FiniteGroup>,
    agents: Vec<GroupRingElement<T>>,
    kappa: T::Real,
}

impl<T: Scalar> Ensemble<T> {
    pub fn new(group: &Arc<FiniteGroup>, agents: Vec<GroupRingElement<T>>, kappa: T::Real) -> Result<Self> {
        if agents.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one agent".into()));
        }
        check_kappa(kappa)?;
        for a in &agents {
            if !ring::same_group(group, a.group()) {
                return Err(Error::IncompatibleOperands(format!(
                    "agent over {} in ensemble over {}",
                    a.group().render(),
                    group.render()
                )));
            }
        }
        Ok(Ensemble {
            group: Arc::clone(group),
            agents,
            kappa,
        })
    }

    /// Builds an ensemble from raw coefficient arrays.
    pub fn from_coeffs(group: &Arc<FiniteGroup>, coeffs: Vec<Vec<T>>, kappa: T::Real) -> Result<Self> {
        let agents = coeffs
            .into_iter()
            .map(|c| GroupRingElement::from_coeffs(group, c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(group, agents, kappa)
    }

    /// N unit-norm agents: i.i.d. Gaussian coefficient vectors (real and
    /// imaginary parts for complex fields), normalized. Seeded with ChaCha8.
    pub fn random_unit(group: &Arc<FiniteGroup>, n_agents: usize, kappa: T::Real, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_unit_with(group, n_agents, kappa, &mut rng)
    }

    pub fn random_unit_with<R: Rng + ?Sized>(
        group: &Arc<FiniteGroup>,
        n_agents: usize,
        kappa: T::Real,
        rng: &mut R,
    ) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::InvalidParameter("ensemble needs at least one agent".into()));
        }
        let agents = (0..n_agents).map(|_| random_unit_element(group, rng)).collect();
        Self::new(group, agents, kappa)
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn agents(&self) -> &[GroupRingElement<T>] {
        &self.agents
    }

    pub fn agent(&self, i: usize) -> &GroupRingElement<T> {
        &self.agents[i]
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn kappa(&self) -> T::Real {
        self.kappa
    }

    pub fn with_kappa(&self, kappa: T::Real) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Ensemble { kappa, ..self.clone() })
    }

    pub fn field_mode(&self) -> FieldMode {
        T::FIELD
    }

    /// Rescales every agent to unit norm. Zero agents are left untouched.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        for a in &mut out.agents {
            normalize_slice(a.coeffs_mut());
        }
        out
    }

    /// Applies φ̃ to every agent.
    pub fn map_automorphism(&self, phi: &Automorphism) -> Result<Self> {
        let agents = self
            .agents
            .iter()
            .map(|a| ring::extend_automorphism(phi, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { agents, ..self.clone() })
    }

    /// Largest coefficient difference between two ensembles of equal shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T::Real> {
        if self.n_agents() != other.n_agents() {
            return Err(Error::DimensionMismatch {
                expected: self.n_agents(),
                got: other.n_agents(),
            });
        }
        self.agents
            .iter()
            .zip(&other.agents)
            .try_fold(T::Real::zero(), |acc, (a, b)| Ok(acc.max(a.max_abs_diff(b)?)))
    }

    pub(crate) fn to_flat(&self) -> Vec<T> {
        self.agents.iter().flat_map(|a| a.coeffs().iter().copied()).collect()
    }

    pub(crate) fn with_flat(&self, flat: &[T]) -> Self {
        let n = self.group.order();
        let agents = flat
            .chunks(n)
            .map(|c| GroupRingElement::from_coeffs(&self.group, c.to_vec()).expect("chunk length is |G|"))
            .collect();
        Ensemble {
            group: Arc::clone(&self.group),
            agents,
            kappa: self.kappa,
        }
    }
}

fn check_kappa<R: RealScalar>(kappa: R) -> Result<()> {
    if kappa.is_finite() && kappa >= R::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "coupling strength κ must be a nonnegative constant, got {kappa}"
        )))
    }
}

fn random_unit_element<T: Scalar, R: Rng + ?Sized>(group: &Arc<FiniteGroup>, rng: &mut R) -> GroupRingElement<T> {
    let draw = |rng: &mut R| -> T::Real {
        let v: f64 = rng.sample(StandardNormal);
        T::Real::from_f64(v).expect("f64 converts")
    };
    loop {
        let coeffs: Vec<T> = (0..group.order())
            .map(|_| {
                let re = draw(rng);
                let im = match T::FIELD {
                    FieldMode::Real => T::Real::zero(),
                    FieldMode::Complex => draw(rng),
                };
                T::from_parts(re, im).expect("imaginary part matches field")
            })
            .collect();
        let mut x = GroupRingElement::from_coeffs(group, coeffs).expect("length is |G|");
        if x.norm_sqr() > T::Real::zero() {
            normalize_slice(x.coeffs_mut());
            return x;
        }
    }
}

fn normalize_slice<T: Scalar>(x: &mut [T]) {
    let norm = ring::norm_sqr_slice(x).sqrt();
    if norm > T::Real::zero() {
        let inv = T::from_real(T::Real::one() / norm);
        x.iter_mut().for_each(|c| *c *= inv);
    }
}

/// Scratch buffers and the flat-state vector field.
struct FlowKernel<'a, T: Scalar> {
    group: &'a FiniteGroup,
    n: usize,
    kappa: T,
    centroid: Vec<T>,
    centroid_dag: Vec<T>,
    agent_dag: Vec<T>,
    comm: Vec<T>,
    tmp: Vec<T>,
}

impl<'a, T: Scalar> FlowKernel<'a, T> {
    fn new(group: &'a FiniteGroup, kappa: T::Real) -> Self {
        let n = group.order();
        FlowKernel {
            group,
            n,
            kappa: T::from_real(kappa),
            centroid: vec![T::zero(); n],
            centroid_dag: vec![T::zero(); n],
            agent_dag: vec![T::zero(); n],
            comm: vec![T::zero(); n],
            tmp: vec![T::zero(); n],
        }
    }

    fn load_centroid(&mut self, state: &[T]) {
        let agents = state.len() / self.n;
        let inv_n = T::from_real(T::Real::one() / T::Real::from_usize(agents).expect("usize converts"));
        self.centroid.iter_mut().for_each(|c| *c = T::zero());
        for x in state.chunks(self.n) {
            for (c, &v) in self.centroid.iter_mut().zip(x) {
                *c += v;
            }
        }
        self.centroid.iter_mut().for_each(|c| *c *= inv_n);
        dagger_into(self.group, &self.centroid, &mut self.centroid_dag);
    }

    /// comm ← x^c x† − x (x^c)†, using the loaded centroid.
    fn commutator(&mut self, x: &[T]) {
        dagger_into(self.group, x, &mut self.agent_dag);
        self.comm.iter_mut().for_each(|c| *c = T::zero());
        self.tmp.iter_mut().for_each(|c| *c = T::zero());
        convolve_into(self.group, &self.centroid, &self.agent_dag, &mut self.comm);
        convolve_into(self.group, x, &self.centroid_dag, &mut self.tmp);
        for (c, &t) in self.comm.iter_mut().zip(&self.tmp) {
            *c -= t;
        }
    }

    /// out ← κ (x^c x† − x (x^c)†) x for every agent.
    fn field(&mut self, state: &[T], out: &mut [T]) {
        self.load_centroid(state);
        for (x, o) in state.chunks(self.n).zip(out.chunks_mut(self.n)) {
            self.commutator(x);
            o.iter_mut().for_each(|v| *v = T::zero());
            convolve_into(self.group, &self.comm, x, o);
            o.iter_mut().for_each(|v| *v *= self.kappa);
        }
    }

    /// (Σᵢ ‖commutatorᵢ‖², maxᵢ ‖commutatorᵢ‖).
    fn commutator_norms(&mut self, state: &[T]) -> (T::Real, T::Real) {
        self.load_centroid(state);
        let mut sum = T::Real::zero();
        let mut max = T::Real::zero();
        for x in state.chunks(self.n) {
            self.commutator(x);
            let s = ring::norm_sqr_slice(&self.comm);
            sum += s;
            max = max.max(s.sqrt());
        }
        (sum, max)
    }

    fn rk4_step(&mut self, state: &mut [T], dt: T::Real, stages: &mut Rk4Stages<T>) {
        let h = T::from_real(dt);
        let half = T::from_real(dt / T::Real::from_f64(2.0).expect("const"));
        let sixth = T::from_real(dt / T::Real::from_f64(6.0).expect("const"));
        let two = T::from_real(T::Real::from_f64(2.0).expect("const"));
        let Rk4Stages { k1, k2, k3, k4, probe } = stages;

        self.field(state, k1);
        axpy_into(probe, state, half, k1);
        self.field(probe, k2);
        axpy_into(probe, state, half, k2);
        self.field(probe, k3);
        axpy_into(probe, state, h, k3);
        self.field(probe, k4);
        for i in 0..state.len() {
            state[i] += sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
    }
}

struct Rk4Stages<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    probe: Vec<T>,
}

impl<T: Scalar> Rk4Stages<T> {
    fn new(len: usize) -> Self {
        Rk4Stages {
            k1: vec![T::zero(); len],
            k2: vec![T::zero(); len],
            k3: vec![T::zero(); len],
            k4: vec![T::zero(); len],
            probe: vec![T::zero(); len],
        }
    }
}

#[inline]
fn axpy_into<T: Scalar>(out: &mut [T], x: &[T], a: T, y: &[T]) {
    for ((o, &xi), &yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// x^c = (1/N) Σ xⁱ.
pub fn centroid<T: Scalar>(ens: &Ensemble<T>) -> GroupRingElement<T> {
    let mut kernel = FlowKernel::new(&ens.group, ens.kappa);
    kernel.load_centroid(&ens.to_flat());
    GroupRingElement::from_coeffs(&ens.group, kernel.centroid).expect("length is |G|")
}

/// The mean-field vector field κ[x^c(xⁱ)†xⁱ − xⁱ(x^c)†xⁱ], one element per agent.
pub fn rhs<T: Scalar>(ens: &Ensemble<T>) -> Vec<GroupRingElement<T>> {
    let state = ens.to_flat();
    let mut out = vec![T::zero(); state.len()];
    FlowKernel::new(&ens.group, ens.kappa).field(&state, &mut out);
    ens.with_flat(&out).agents
}

/// The same vector field through the coefficient triple sum
///
/// ```text
/// dx_gⁱ/dt = κ Σ_{g₁,g₂} ( x^c_{g₁} conj(xⁱ_{g₂}) − xⁱ_{g₁} conj(x^c_{g₂}) ) xⁱ_{g₂g₁⁻¹g}
/// ```
///
/// It shares no code with [`rhs`] and serves as its oracle.
pub fn rhs_component<T: Scalar>(ens: &Ensemble<T>) -> Vec<Vec<T>> {
    let group = &*ens.group;
    let n = group.order();
    let inv_n = T::Real::one() / T::Real::from_usize(ens.n_agents()).expect("usize converts");
    let xc: Vec<T> = (0..n)
        .map(|g| {
            let s: T = ens.agents.iter().map(|a| a.coeffs()[g]).sum();
            s * T::from_real(inv_n)
        })
        .collect();
    let kappa = T::from_real(ens.kappa);
    ens.agents
        .iter()
        .map(|agent| {
            let x = agent.coeffs();
            (0..n)
                .map(|g| {
                    let mut acc = T::zero();
                    for g1 in 0..n {
                        let g1_inv = group.inverse_idx(g1);
                        for g2 in 0..n {
                            let idx = group.mul_idx(group.mul_idx(g2, g1_inv), g);
                            acc += xc[g1] * x[g2].conj() * x[idx] - x[g1] * xc[g2].conj() * x[idx];
                        }
                    }
                    kappa * acc
                })
                .collect()
        })
        .collect()
}

/// R² = ‖x^c‖².
pub fn order_parameter<T: Scalar>(ens: &Ensemble<T>) -> T::Real {
    centroid(ens).norm_sqr()
}

/// V = (1/N²) Σᵢⱼ ‖xⁱ − xʲ‖², by the pairwise double sum.
pub fn variance<T: Scalar>(ens: &Ensemble<T>) -> T::Real {
    pairwise_variance(&ens.to_flat(), ens.group.order())
}

fn pairwise_variance<T: Scalar>(state: &[T], n: usize) -> T::Real {
    let agents: Vec<&[T]> = state.chunks(n).collect();
    let mut total = T::Real::zero();
    for (i, xi) in agents.iter().enumerate() {
        for xj in &agents[i + 1..] {
            total += xi
                .iter()
                .zip(xj.iter())
                .map(|(&a, &b)| (a - b).abs_sqr())
                .sum::<T::Real>();
        }
    }
    let count = T::Real::from_usize(agents.len()).expect("usize converts");
    // Off-diagonal pairs appear twice in the full double sum.
    (total + total) / (count * count)
}

/// −dV/dt = (2κ/N) Σᵢ ‖x^c(xⁱ)† − xⁱ(x^c)†‖².
pub fn dissipation<T: Scalar>(ens: &Ensemble<T>) -> T::Real {
    let (sum, _) = FlowKernel::new(&ens.group, ens.kappa).commutator_norms(&ens.to_flat());
    let n = T::Real::from_usize(ens.n_agents()).expect("usize converts");
    (ens.kappa + ens.kappa) / n * sum
}

/// One record of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    #[serde(rename = "V")]
    pub v: f64,
    pub dissipation: f64,
    /// maxᵢ ‖x^c(xⁱ)† − xⁱ(x^c)†‖.
    pub residual: f64,
    pub min_norm: f64,
    pub max_norm: f64,
}

impl Diagnostics {
    pub const CSV_HEADER: &'static str = "t,R2,V,dissipation,residual,min_norm,max_norm";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.t, self.r2, self.v, self.dissipation, self.residual, self.min_norm, self.max_norm
        )
    }
}

fn f64_of<R: ToPrimitive>(r: R) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn flat_diagnostics<T: Scalar>(group: &FiniteGroup, kappa: T::Real, state: &[T], t: f64) -> Diagnostics {
    let n = group.order();
    let mut kernel = FlowKernel::new(group, kappa);
    let (sum, max) = kernel.commutator_norms(state);
    let r2 = ring::norm_sqr_slice(&kernel.centroid);
    let agents = T::Real::from_usize(state.len() / n).expect("usize converts");
    let (min_norm, max_norm) = state.chunks(n).fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
        let nx = f64_of(ring::norm_sqr_slice(x).sqrt());
        (lo.min(nx), hi.max(nx))
    });
    Diagnostics {
        t,
        r2: f64_of(r2),
        v: f64_of(pairwise_variance(state, n)),
        dissipation: f64_of((kappa + kappa) / agents * sum),
        residual: f64_of(max),
        min_norm,
        max_norm,
    }
}

pub fn diagnostics<T: Scalar>(ens: &Ensemble<T>, t: f64) -> Diagnostics {
    flat_diagnostics(&ens.group, ens.kappa, &ens.to_flat(), t)
}

/// One classical RK4 step of size `dt`.
pub fn step_rk4<T: Scalar>(ens: &Ensemble<T>, dt: T::Real) -> Ensemble<T> {
    let mut state = ens.to_flat();
    let mut stages = Rk4Stages::new(state.len());
    FlowKernel::new(&ens.group, ens.kappa).rk4_step(&mut state, dt, &mut stages);
    ens.with_flat(&state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Project each agent back to the unit sphere after every step.
    pub renormalize: bool,
    pub record_every: usize,
    /// Seed of the initial data, carried for provenance.
    pub seed: u64,
    /// Residual threshold for the convergence detector.
    pub converge_tol: f64,
    /// Consecutive records below `converge_tol` needed to declare convergence.
    pub converge_window: usize,
    /// Keep a full ensemble snapshot at every record.
    pub keep_snapshots: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            t_final: 10.0,
            renormalize: false,
            record_every: 1,
            seed: 0,
            converge_tol: 1e-6,
            converge_window: 100,
            keep_snapshots: false,
        }
    }
}

impl SimConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        SimConfig {
            dt,
            t_final,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final > self.dt) {
            return Err(Error::InvalidParameter(format!(
                "t_final must exceed dt (dt = {}, t_final = {})",
                self.dt, self.t_final
            )));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be ≥ 1".into()));
        }
        if self.converge_window == 0 {
            return Err(Error::InvalidParameter("converge_window must be ≥ 1".into()));
        }
        Ok(())
    }

    /// Number of RK4 steps; the last step lands on the nearest multiple of dt.
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Scalar> {
    pub records: Vec<Diagnostics>,
    /// Ensemble at each record, only when [`SimConfig::keep_snapshots`] is set.
    pub snapshots: Vec<Ensemble<T>>,
    pub final_state: Ensemble<T>,
    /// Time of the first record of the first run of `converge_window`
    /// consecutive records with residual below `converge_tol`.
    pub converged_at: Option<f64>,
}

impl<T: Scalar> Trajectory<T> {
    pub fn last(&self) -> &Diagnostics {
        self.records.last().expect("simulate records at least t = 0")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Diagnostics::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Integrates the flow with fixed-step RK4, recording diagnostics at step 0,
/// every `record_every` steps, and at the final step.
pub fn simulate<T: Scalar>(ens: &Ensemble<T>, cfg: &SimConfig) -> Result<Trajectory<T>> {
    cfg.validate()?;
    let dt = T::Real::from_f64(cfg.dt).expect("f64 converts");
    let group = &*ens.group;
    let n = group.order();
    let n_steps = cfg.n_steps();

    let mut state = ens.to_flat();
    let mut stages = Rk4Stages::new(state.len());
    let mut kernel = FlowKernel::new(group, ens.kappa);

    let mut records = Vec::with_capacity(n_steps / cfg.record_every + 2);
    let mut snapshots = Vec::new();
    let mut streak = 0usize;
    let mut streak_start = 0.0;
    let mut converged_at = None;

    let mut record = |state: &[T], t: f64, norms: Option<(f64, f64)>| {
        let mut d = flat_diagnostics(group, ens.kappa, state, t);
        if let Some((lo, hi)) = norms {
            d.min_norm = lo;
            d.max_norm = hi;
        }
        if converged_at.is_none() {
            if d.residual < cfg.converge_tol {
                if streak == 0 {
                    streak_start = t;
                }
                streak += 1;
                if streak >= cfg.converge_window {
                    converged_at = Some(streak_start);
                }
            } else {
                streak = 0;
            }
        }
        if cfg.keep_snapshots {
            snapshots.push(ens.with_flat(state));
        }
        records.push(d);
    };

    record(&state, 0.0, None);
    for step in 1..=n_steps {
        kernel.rk4_step(&mut state, dt, &mut stages);
        let t = step as f64 * cfg.dt;
        if !state.iter().all(|c| c.is_finite()) {
            return Err(Error::Divergence { step, t });
        }
        let mut pre_norms = None;
        if cfg.renormalize {
            let (lo, hi) = state.chunks(n).fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
                let nx = f64_of(ring::norm_sqr_slice(x).sqrt());
                (lo.min(nx), hi.max(nx))
            });
            pre_norms = Some((lo, hi));
            state.chunks_mut(n).for_each(normalize_slice);
        }
        if step % cfg.record_every == 0 || step == n_steps {
            record(&state, t, pre_norms);
        }
    }

    Ok(Trajectory {
        records,
        snapshots,
        final_state: ens.with_flat(&state),
        converged_at,
    })
}

/// Phases θⁱ(t) of the identical-oscillator Kuramoto model.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory<R> {
    pub times: Vec<R>,
    /// `phases[k][i]` is θⁱ at `times[k]`.
    pub phases: Vec<Vec<R>>,
}

/// dθⁱ/dt = (2κ/N) Σₖ sin(θᵏ − θⁱ).
pub fn kuramoto_phase_rhs<R: RealScalar>(theta: &[R], kappa: R, out: &mut [R]) {
    let n = R::from_usize(theta.len()).expect("usize converts");
    let scale = (kappa + kappa) / n;
    for (o, &ti) in out.iter_mut().zip(theta) {
        *o = scale * theta.iter().map(|&tk| (tk - ti).sin()).sum::<R>();
    }
}

/// Integrates the phase model that the flow on ℂ[{e}] reduces to, starting
/// from θⁱ(0) = arg(x_eⁱ), with the same RK4 scheme and step.
pub fn kuramoto_reduce<R: RealScalar>(ens: &Ensemble<Complex<R>>, t_final: R, dt: R) -> Result<PhaseTrajectory<R>> {
    if ens.group.order() != 1 {
        return Err(Error::InvalidParameter(format!(
            "phase reduction needs the trivial group, got order {}",
            ens.group.order()
        )));
    }
    if !(dt > R::zero() && t_final > dt) {
        return Err(Error::InvalidParameter("need 0 < dt < t_final".into()));
    }
    let mut theta = Vec::with_capacity(ens.n_agents());
    for (i, a) in ens.agents.iter().enumerate() {
        let z = a.coeffs()[0];
        if z.norm_sqr() == R::zero() {
            return Err(Error::InvalidParameter(format!("agent {i} has zero magnitude")));
        }
        theta.push(z.arg());
    }
    let kappa = ens.kappa;
    let n_steps = (t_final / dt).round().to_usize().expect("finite step count");
    let two = R::from_f64(2.0).expect("const");
    let six = R::from_f64(6.0).expect("const");
    let len = theta.len();
    let (mut k1, mut k2, mut k3, mut k4, mut probe) = (
        vec![R::zero(); len],
        vec![R::zero(); len],
        vec![R::zero(); len],
        vec![R::zero(); len],
        vec![R::zero(); len],
    );

    let mut times = Vec::with_capacity(n_steps + 1);
    let mut phases = Vec::with_capacity(n_steps + 1);
    times.push(R::zero());
    phases.push(theta.clone());
    for step in 1..=n_steps {
        kuramoto_phase_rhs(&theta, kappa, &mut k1);
        for i in 0..len {
            probe[i] = theta[i] + dt / two * k1[i];
        }
        kuramoto_phase_rhs(&probe, kappa, &mut k2);
        for i in 0..len {
            probe[i] = theta[i] + dt / two * k2[i];
        }
        kuramoto_phase_rhs(&probe, kappa, &mut k3);
        for i in 0..len {
            probe[i] = theta[i] + dt * k3[i];
        }
        kuramoto_phase_rhs(&probe, kappa, &mut k4);
        for i in 0..len {
            theta[i] += dt / six * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        times.push(R::from_usize(step).expect("usize converts") * dt);
        phases.push(theta.clone());
    }
    Ok(PhaseTrajectory { times, phases })
}

/// Wraps an angle difference into (−π, π].
pub fn wrap_angle<R: RealScalar>(a: R) -> R {
    let pi = R::from_f64(std::f64::consts::PI).expect("const");
    let two_pi = pi + pi;
    let mut w = a % two_pi;
    if w <= -pi {
        w += two_pi;
    } else if w > pi {
        w -= two_pi;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::parse_group_spec;
    use num_complex::Complex64;

    fn group(spec: &str) -> Arc<FiniteGroup> {
        Arc::new(parse_group_spec(spec).unwrap())
    }

    #[test]
    fn centroid_examples() {
        let z2 = group("Z2");
        let x = GroupRingElement::from_coeffs(&z2, vec![0.6, 0.8]).unwrap();
        let ens = Ensemble::new(&z2, vec![x.clone(), x.clone(), x.clone()], 1.0).unwrap();
        assert!(centroid(&ens).max_abs_diff(&x).unwrap() <= 1e-15);
        let e = GroupRingElement::<f64>::unit(&z2);
        let ens = Ensemble::new(&z2, vec![e.clone(), e.neg()], 1.0).unwrap();
        assert!(centroid(&ens).is_zero());
        let z5 = group("Z5");
        let ens = Ensemble::<f64>::random_unit(&z5, 7, 1.0, 3).unwrap();
        assert!(centroid(&ens).norm() <= 1.0);
    }

    #[test]
    fn ensemble_rejects_bad_input() {
        let z3 = group("Z3");
        assert!(Ensemble::<f64>::new(&z3, vec![], 1.0).is_err());
        let x = GroupRingElement::<f64>::unit(&z3);
        let err = Ensemble::new(&z3, vec![x.clone()], -1.0).unwrap_err();
        assert!(err.to_string().contains("nonnegative"));
        assert!(Ensemble::new(&z3, vec![x.clone()], f64::NAN).is_err());
        let z2 = group("Z2");
        assert!(matches!(
            Ensemble::new(&z2, vec![x], 1.0),
            Err(Error::IncompatibleOperands(_))
        ));
        assert!(Ensemble::<f64>::random_unit(&z3, 0, 1.0, 0).is_err());
    }

    #[test]
    fn random_init_is_unit_and_seeded() {
        let s3 = group("S3");
        let a = Ensemble::<Complex64>::random_unit(&s3, 4, 1.0, 11).unwrap();
        let b = Ensemble::<Complex64>::random_unit(&s3, 4, 1.0, 11).unwrap();
        assert_eq!(a, b);
        for x in a.agents() {
            assert!((x.norm() - 1.0).abs() < 1e-15);
            assert!(x.coeffs().iter().any(|c| c.im != 0.0));
        }
        let c = Ensemble::<Complex64>::random_unit(&s3, 4, 1.0, 12).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn aggregated_state_is_fixed() {
        let d3 = group("D3");
        let x = Ensemble::<Complex64>::random_unit(&d3, 1, 1.0, 5)
            .unwrap()
            .agent(0)
            .clone();
        let ens = Ensemble::new(&d3, vec![x.clone(); 4], 1.0).unwrap();
        for f in rhs(&ens) {
            assert!(f.norm() < 1e-15);
        }
        for f in rhs_component(&ens) {
            assert!(f.iter().all(|c| c.norm() < 1e-15));
        }
        let next = step_rk4(&ens, 1e-3);
        assert!(next.max_abs_diff(&ens).unwrap() <= 1e-14);
        let d = diagnostics(&ens, 0.0);
        assert!((d.r2 - 1.0).abs() < 1e-14);
        assert!(d.v.abs() < 1e-14);
        assert!(d.dissipation.abs() < 1e-28);
    }

    #[test]
    fn zero_coupling_freezes() {
        let z4 = group("Z4");
        let ens = Ensemble::<f64>::random_unit(&z4, 3, 0.0, 2).unwrap();
        assert!(rhs(&ens).iter().all(GroupRingElement::is_zero));
        let traj = simulate(&ens, &SimConfig::new(0.01, 1.0)).unwrap();
        assert_eq!(traj.final_state, ens);
    }

    #[test]
    fn trivial_group_component_form() {
        let z1 = group("Z1");
        let ens = Ensemble::<Complex64>::random_unit(&z1, 3, 0.7, 9).unwrap();
        let xc: Complex64 = ens.agents().iter().map(|a| a.coeffs()[0]).sum::<Complex64>() / 3.0;
        let comp = rhs_component(&ens);
        for (a, f) in ens.agents().iter().zip(&comp) {
            let x = a.coeffs()[0];
            let expected = 0.7 * (xc * x.norm_sqr() - x * xc.conj() * x);
            assert!((f[0] - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn rhs_matches_component_form() {
        let s3 = group("S3");
        let ens = Ensemble::<Complex64>::random_unit(&s3, 4, 1.3, 1).unwrap();
        for (a, b) in rhs(&ens).iter().zip(rhs_component(&ens)) {
            for (x, y) in a.coeffs().iter().zip(&b) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn variance_identity_unit_norm() {
        let d4 = group("D4");
        let ens = Ensemble::<f64>::random_unit(&d4, 6, 1.0, 8).unwrap();
        let v = variance(&ens);
        let r2 = order_parameter(&ens);
        assert!((v - (2.0 - 2.0 * r2)).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0.0, 1.0).validate().is_err());
        assert!(SimConfig::new(1.0, 1.0).validate().is_err());
        assert!(SimConfig {
            record_every: 0,
            ..SimConfig::new(0.1, 1.0)
        }
        .validate()
        .is_err());
        assert_eq!(SimConfig::new(0.1, 1.0).n_steps(), 10);
    }

    #[test]
    fn records_and_snapshots() {
        let z3 = group("Z3");
        let ens = Ensemble::<f64>::random_unit(&z3, 3, 1.0, 4).unwrap();
        let cfg = SimConfig {
            record_every: 3,
            keep_snapshots: true,
            ..SimConfig::new(0.1, 1.0)
        };
        let traj = simulate(&ens, &cfg).unwrap();
        let times: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
        assert_eq!(times.len(), 5);
        assert_eq!(times[0], 0.0);
        assert!((times[4] - 1.0).abs() < 1e-12);
        assert_eq!(traj.snapshots.len(), 5);
        assert_eq!(traj.snapshots[4], traj.final_state);
        let csv = traj.to_csv();
        assert!(csv.starts_with("t,R2,V,dissipation,residual,min_norm,max_norm\n"));
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn divergence_is_reported() {
        let z3 = group("Z3");
        let x = GroupRingElement::from_coeffs(&z3, vec![1e200, -3e200, 2e200]).unwrap();
        let y = GroupRingElement::from_coeffs(&z3, vec![-2e200, 1e200, 5e200]).unwrap();
        let ens = Ensemble::new(&z3, vec![x, y], 1.0).unwrap();
        match simulate(&ens, &SimConfig::new(0.1, 1.0)) {
            Err(Error::Divergence { step, .. }) => assert_eq!(step, 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn renormalized_runs_stay_on_sphere() {
        let z5 = group("Z5");
        let ens = Ensemble::<Complex64>::random_unit(&z5, 4, 1.0, 21).unwrap();
        let cfg = SimConfig {
            renormalize: true,
            ..SimConfig::new(0.05, 5.0)
        };
        let traj = simulate(&ens, &cfg).unwrap();
        for a in traj.final_state.agents() {
            assert!((a.norm() - 1.0).abs() < 1e-15);
        }
        // Recorded norms are taken before projection.
        assert!(traj.records[1..].iter().any(|r| r.max_norm != 1.0 || r.min_norm != 1.0));
    }

    #[test]
    fn two_oscillator_phase_gap_decays() {
        let z1 = group("Z1");
        let agents = vec![
            GroupRingElement::from_coeffs(&z1, vec![Complex64::from_polar(1.0, 0.0)]).unwrap(),
            GroupRingElement::from_coeffs(&z1, vec![Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2)]).unwrap(),
        ];
        let ens = Ensemble::new(&z1, agents, 1.0).unwrap();
        let pt = kuramoto_reduce(&ens, 5.0, 1e-3).unwrap();
        let gaps: Vec<f64> = pt.phases.iter().map(|p| p[1] - p[0]).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]));
        // dΔ/dt = −2κ sin Δ has the closed form tan(Δ/2) = tan(Δ₀/2) e^{−2κt}.
        let exact = 2.0 * ((std::f64::consts::FRAC_PI_4).tan() * (-10.0f64).exp()).atan();
        assert!((gaps.last().unwrap() - exact).abs() < 1e-10);
    }

    #[test]
    fn in_phase_stays_in_phase() {
        let z1 = group("Z1");
        let z = Complex64::from_polar(1.0, 0.4);
        let ens = Ensemble::from_coeffs(&z1, vec![vec![z]; 3], 2.0).unwrap();
        let pt = kuramoto_reduce(&ens, 1.0, 1e-2).unwrap();
        assert!(pt.phases.last().unwrap().iter().all(|&t| (t - 0.4).abs() < 1e-15));
    }

    #[test]
    fn kuramoto_rejects_bad_input() {
        let z2 = group("Z2");
        let ens = Ensemble::<Complex64>::random_unit(&z2, 2, 1.0, 0).unwrap();
        assert!(kuramoto_reduce(&ens, 1.0, 0.1).is_err());
        let z1 = group("Z1");
        let ens = Ensemble::from_coeffs(&z1, vec![vec![Complex64::new(0.0, 0.0)]], 1.0).unwrap();
        assert!(kuramoto_reduce(&ens, 1.0, 0.1).is_err());
    }

    #[test]
    fn wrap_angle_range() {
        use std::f64::consts::PI;
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-0.5 + 4.0 * PI) + 0.5).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25f64), 0.25);
    }

    #[test]
    fn generic_over_f32() {
        let z3 = group("Z3");
        let ens = Ensemble::<f32>::random_unit(&z3, 3, 1.0, 1).unwrap();
        let traj = simulate(&ens, &SimConfig::new(0.01, 1.0)).unwrap();
        assert!(traj.last().v <= traj.records[0].v + 1e-5);
    }
}
