//! Equilibrium structure of the flow.
//!
//! A configuration is stationary iff x^c(xⁱ)† = xⁱ(x^c)† for every agent.
//! Over ℝ[G] the g-component of that difference is `v(g)·xⁱ` with
//! `v(g) = x^c (A^g − A^{g⁻¹})`, which splits the equilibrium set per g into
//! three disjoint pieces: zero centroid (global), centroid in
//! Null(A^g − A^{g⁻¹}) (label 1), or every agent orthogonal to a nonzero
//! v(g) (label 2).
//!
//! The null spaces are exact: they are spanned by indicator vectors of the
//! right cosets of H(g) = ⟨g²⟩, so their dimension is |G| / |H(g)|. The
//! brute-force nullity goes through integer rank instead and never touches
//! the coset construction.

use std::fmt;
use std::sync::Arc;

use num_traits::{Float, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::dynamics::{centroid, Ensemble};
use crate::error::{Error, Result};
use crate::group::{right_cosets, subgroup_of_square, FiniteGroup, GroupElementId};
use crate::ring::{self, skew};
use crate::scalar::{FieldMode, Scalar};

/// Default tolerance for analytically constructed states.
pub const ANALYTIC_TOL: f64 = 1e-8;
/// Default tolerance for simulated end states.
pub const SIMULATED_TOL: f64 = 1e-6;

/// maxᵢ ‖x^c(xⁱ)† − xⁱ(x^c)†‖. Zero exactly on the equilibrium set.
pub fn residual<T: Scalar>(ens: &Ensemble<T>) -> T::Real {
    let xc = centroid(ens);
    let xc_dag = xc.dagger();
    ens.agents()
        .iter()
        .map(|x| {
            let a = xc.mul(&x.dagger()).expect("same group");
            let b = x.mul(&xc_dag).expect("same group");
            a.sub(&b).expect("same group").norm()
        })
        .fold(T::Real::zero(), Float::max)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NullSpaceBasis {
    group: Arc<FiniteGroup>,
    g: GroupElementId,
    basis: Vec<Vec<i64>>,
    cosets: Vec<Vec<GroupElementId>>,
    h_order: usize,
}

impl NullSpaceBasis {
    pub fn element(&self) -> GroupElementId {
        self.g
    }

    /// 0/1 indicator vectors, one per right coset of H(g).
    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn cosets(&self) -> &[Vec<GroupElementId>] {
        &self.cosets
    }

    pub fn nullity(&self) -> usize {
        self.basis.len()
    }

    /// |H(g)|.
    pub fn subgroup_order(&self) -> usize {
        self.h_order
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    /// True iff `x` is constant on every coset block.
    pub fn contains(&self, x: &[i64]) -> bool {
        x.len() == self.group.order()
            && self
                .cosets
                .iter()
                .all(|block| block.iter().all(|g| x[g.index()] == x[block[0].index()]))
    }
}

/// Null(A^g − A^{g⁻¹}) from the right cosets of H(g) = ⟨g²⟩.
pub fn null_space(group: &Arc<FiniteGroup>, g: GroupElementId) -> Result<NullSpaceBasis> {
    let h = subgroup_of_square(group, g)?;
    let cosets = right_cosets(group, &h);
    let basis = cosets
        .iter()
        .map(|block| {
            let mut v = vec![0i64; group.order()];
            for x in block {
                v[x.index()] = 1;
            }
            v
        })
        .collect();
    Ok(NullSpaceBasis {
        group: Arc::clone(group),
        g,
        basis,
        cosets,
        h_order: h.order(),
    })
}

/// |G| − rank(A^g − A^{g⁻¹}) with the rank from fraction-free elimination.
pub fn nullity_bruteforce(group: &Arc<FiniteGroup>, g: GroupElementId) -> Result<usize> {
    let s = skew(group, g)?;
    Ok(group.order() - s.matrix().rank())
}

/// Checks Null(A^g − A^{g⁻¹}) ⊆ Null(A^{gⁿ} − A^{g⁻ⁿ}) on the coset basis,
/// in exact integer arithmetic.
pub fn null_inclusion_check(group: &Arc<FiniteGroup>, g: GroupElementId, n: i64) -> Result<bool> {
    let basis = null_space(group, g)?;
    let target = skew(group, group.pow(g, n))?;
    for b in basis.basis() {
        if target.matrix().row_action(b)?.iter().any(|&v| v != 0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-element class of an equilibrium candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    /// Zero centroid; applies to the whole ensemble.
    #[serde(rename = "0")]
    GlobalZero,
    /// Centroid lies in Null(A^g − A^{g⁻¹}) \ {0}.
    #[serde(rename = "1")]
    NullCentroid,
    /// Centroid outside the null space, every agent orthogonal to v(g).
    #[serde(rename = "2")]
    Orthogonal,
    /// Neither: the stationarity condition fails at this g.
    #[serde(rename = "none")]
    None,
}

impl ClassLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::GlobalZero => "0",
            ClassLabel::NullCentroid => "1",
            ClassLabel::Orthogonal => "2",
            ClassLabel::None => "none",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub g: usize,
    pub g_name: String,
    pub label: ClassLabel,
    /// ‖x^c (A^g − A^{g⁻¹})‖.
    pub null_check_value: f64,
    /// maxᵢ |v(g)·xⁱ|.
    pub max_orthogonality_defect: f64,
    /// v(g) and the per-agent defects, present for label-2 elements.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub v: Vec<f64>,
    pub defects: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub residual: f64,
    pub tolerance: f64,
    pub is_equilibrium: bool,
    pub global_zero: bool,
    pub elements: Vec<ElementRecord>,
}

impl EquilibriumReport {
    pub fn label(&self, g: GroupElementId) -> ClassLabel {
        self.elements[g.index()].label
    }
}

fn require_real<T: Scalar>(what: &str) -> Result<()> {
    match T::FIELD {
        FieldMode::Real => Ok(()),
        FieldMode::Complex => Err(Error::UnsupportedMode(format!(
            "{what} is defined over ℝ[G]; use residual() for complex states"
        ))),
    }
}

fn real_coeffs<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(|c| c.re().to_f64().unwrap_or(f64::NAN)).collect()
}

/// v(g) = x^c (A^g − A^{g⁻¹}) as a row action: v_h = x^c_{gh} − x^c_{g⁻¹h}.
fn witness_vector(group: &FiniteGroup, xc: &[f64], g: GroupElementId) -> Vec<f64> {
    let gi = group.inverse(g);
    group
        .elements()
        .map(|h| xc[group.mul(g, h).index()] - xc[group.mul(gi, h).index()])
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Labels each g by the disjoint decomposition of the equilibrium set,
/// with precedence global zero, then 1, then 2. REAL field only.
pub fn classify<T: Scalar>(ens: &Ensemble<T>, tol: f64) -> Result<EquilibriumReport> {
    require_real::<T>("classify")?;
    let group = ens.group();
    let xc = real_coeffs(centroid(ens).coeffs());
    let agents: Vec<Vec<f64>> = ens.agents().iter().map(|a| real_coeffs(a.coeffs())).collect();
    let global_zero = l2(&xc) <= tol;

    let mut elements = Vec::with_capacity(group.order());
    for g in group.elements() {
        let s = skew(group, g)?;
        // Exact route for v: act with the integer matrix on x^c.
        let v: Vec<f64> = (0..group.order())
            .map(|j| (0..group.order()).map(|i| xc[i] * s.matrix().get(i, j) as f64).sum())
            .collect();
        debug_assert!(v
            .iter()
            .zip(witness_vector(group, &xc, g))
            .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs())));
        let null_check_value = l2(&v);
        let defects: Vec<f64> = agents.iter().map(|x| dot(&v, x).abs()).collect();
        let max_defect = defects.iter().copied().fold(0.0, f64::max);
        let label = if global_zero {
            ClassLabel::GlobalZero
        } else if null_check_value <= tol {
            ClassLabel::NullCentroid
        } else if max_defect <= tol {
            ClassLabel::Orthogonal
        } else {
            ClassLabel::None
        };
        let witness = (label == ClassLabel::Orthogonal).then(|| Witness {
            v: v.clone(),
            defects: defects.clone(),
        });
        elements.push(ElementRecord {
            g: g.index(),
            g_name: group.name(g).to_string(),
            label,
            null_check_value,
            max_orthogonality_defect: max_defect,
            witness,
        });
    }
    let is_equilibrium = global_zero || elements.iter().all(|e| e.label != ClassLabel::None);
    Ok(EquilibriumReport {
        residual: residual(ens).to_f64().unwrap_or(f64::NAN),
        tolerance: tol,
        is_equilibrium,
        global_zero,
        elements,
    })
}

/// Residual-only report for either field: the per-g taxonomy is left empty.
pub fn residual_report<T: Scalar>(ens: &Ensemble<T>, tol: f64) -> EquilibriumReport {
    let r = residual(ens).to_f64().unwrap_or(f64::NAN);
    let global_zero = centroid(ens).norm().to_f64().unwrap_or(f64::NAN) <= tol;
    EquilibriumReport {
        residual: r,
        tolerance: tol,
        is_equilibrium: r <= tol,
        global_zero,
        elements: Vec::new(),
    }
}

/// The three-piece decomposition of the ℝ[ℤ₃] equilibrium set under
/// φ(x) = (x_e, x_a, x_{a²}).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Z3Class {
    /// x^c = 0.
    E1,
    /// All φ(xⁱ) orthogonal to the common vector (1,1,1) × φ(x^c).
    E2,
    /// φ(x^c) ∥ (1, 1, 1).
    E3,
    None,
}

impl Z3Class {
    pub fn as_str(self) -> &'static str {
        match self {
            Z3Class::E1 => "E1",
            Z3Class::E2 => "E2",
            Z3Class::E3 => "E3",
            Z3Class::None => "none",
        }
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// True iff the group is ℤ₃ presented as {e, a, a²} with a = id 1, a² = id 2.
pub fn is_z3(group: &FiniteGroup) -> bool {
    group.order() == 3 && group.mul(GroupElementId(1), GroupElementId(1)) == GroupElementId(2)
}

pub fn z3_classify<T: Scalar>(ens: &Ensemble<T>, tol: f64) -> Result<Z3Class> {
    require_real::<T>("z3_classify")?;
    if !is_z3(ens.group()) {
        return Err(Error::InvalidParameter(format!(
            "z3_classify needs ℤ₃, got {}",
            ens.group().render()
        )));
    }
    let phi = |x: &[T]| -> [f64; 3] {
        let c = real_coeffs(x);
        [c[0], c[1], c[2]]
    };
    let pc = phi(centroid(ens).coeffs());
    if l2(&pc) <= tol {
        return Ok(Z3Class::E1);
    }
    let y = cross([1.0; 3], pc);
    if l2(&y) <= tol {
        return Ok(Z3Class::E3);
    }
    let max = ens
        .agents()
        .iter()
        .map(|a| dot(&phi(a.coeffs()), &y).abs())
        .fold(0.0, f64::max);
    Ok(if max <= tol { Z3Class::E2 } else { Z3Class::None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneWitness {
    /// v(g) = x^c (A^g − A^{g⁻¹}), the hyperplane normal.
    pub v: Vec<f64>,
    /// |v(g)·xⁱ| per agent.
    pub defects: Vec<f64>,
    /// |G| − 1.
    pub hyperplane_dim: usize,
    /// |G| − 2: the agents lie on a sphere of this dimension centered at 0.
    pub sphere_dim: usize,
    /// Common agent norm when all norms agree within tolerance.
    pub sphere_radius: Option<f64>,
}

/// Hyperplane (normal v(g)) and sphere containing a label-2 configuration.
pub fn hyperplane_witness<T: Scalar>(ens: &Ensemble<T>, g: GroupElementId, tol: f64) -> Result<HyperplaneWitness> {
    require_real::<T>("hyperplane_witness")?;
    let group = ens.group();
    group.check_id(g)?;
    let xc = real_coeffs(centroid(ens).coeffs());
    if l2(&xc) <= tol {
        return Err(Error::WitnessUndefined("centroid is zero (global class)".into()));
    }
    let v = witness_vector(group, &xc, g);
    if l2(&v) <= tol {
        return Err(Error::WitnessUndefined(format!(
            "centroid lies in the null space at {} (label 1)",
            group.name(g)
        )));
    }
    let agents: Vec<Vec<f64>> = ens.agents().iter().map(|a| real_coeffs(a.coeffs())).collect();
    let defects = agents.iter().map(|x| dot(&v, x).abs()).collect();
    let norms: Vec<f64> = agents.iter().map(|x| l2(x)).collect();
    let (lo, hi) = norms
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &n| (lo.min(n), hi.max(n)));
    let n = group.order();
    Ok(HyperplaneWitness {
        v,
        defects,
        hyperplane_dim: n - 1,
        sphere_dim: n.saturating_sub(2),
        sphere_radius: (hi - lo <= tol).then_some(0.5 * (hi + lo)),
    })
}

/// Convenience: the coefficient residual of each agent, (x^c(xⁱ)† − xⁱ(x^c)†).
pub fn agent_defects<T: Scalar>(ens: &Ensemble<T>) -> Vec<ring::GroupRingElement<T>> {
    let xc = centroid(ens);
    let xc_dag = xc.dagger();
    ens.agents()
        .iter()
        .map(|x| {
            let a = xc.mul(&x.dagger()).expect("same group");
            a.sub(&x.mul(&xc_dag).expect("same group")).expect("same group")
        })
        .collect()
}
