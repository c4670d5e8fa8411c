//! Consensus flows on group rings.
//!
//! Agents are elements of 𝔽[G] for a finite group G and 𝔽 ∈ {ℝ, ℂ}. Each
//! agent moves by the commutator of the ensemble centroid with itself, and
//! the equilibrium set decomposes per group element through the integer
//! matrices A^g − A^{g⁻¹}.

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod group;
pub mod intmat;
pub mod ring;
pub mod scalar;

pub use num_complex::{Complex, Complex32, Complex64};

pub use dynamics::{
    centroid, diagnostics, dissipation, kuramoto_reduce, order_parameter, rhs, simulate, step_rk4, variance,
    Diagnostics, Ensemble, PhaseTrajectory, SimConfig, Trajectory,
};
pub use equilibria::{
    classify, hyperplane_witness, null_inclusion_check, null_space, nullity_bruteforce, residual, z3_classify,
    ClassLabel, EquilibriumReport, HyperplaneWitness, NullSpaceBasis, Z3Class,
};
pub use error::{Error, Result};
pub use group::{
    make_cyclic, make_dihedral, make_direct_product, make_symmetric, parse_group_spec, Automorphism, FiniteGroup,
    GroupElementId, Subgroup,
};
pub use intmat::IntMatrix;
pub use ring::{amat, skew, GroupRingElement, SkewObject};
pub use scalar::{FieldMode, RealScalar, Scalar};

pub type RealElement = GroupRingElement<f64>;
pub type ComplexElement = GroupRingElement<Complex64>;
pub type RealElement32 = GroupRingElement<f32>;
pub type ComplexElement32 = GroupRingElement<Complex32>;

pub type RealEnsemble = Ensemble<f64>;
pub type ComplexEnsemble = Ensemble<Complex64>;
pub type RealEnsemble32 = Ensemble<f32>;
pub type ComplexEnsemble32 = Ensemble<Complex32>;
