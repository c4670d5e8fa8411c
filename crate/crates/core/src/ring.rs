//! Arithmetic in the group ring K[G].
//!
//! An element x = Σ x_g g is a dense coefficient vector indexed by group
//! element id. Multiplication is the group convolution
//! `(xy)_k = Σ_{gᵢgⱼ = g_k} x_i y_j`, the hermitian conjugate is
//! `x† = Σ conj(x_g) g⁻¹`, and the Frobenius inner product is
//! `⟨x, y⟩ = tr(x†y) = Σ conj(x_g) y_g`.

use std::sync::Arc;

use num_traits::{Float, Zero};

use crate::error::{Error, Result};
use crate::group::{Automorphism, FiniteGroup, GroupElementId};
use crate::intmat::IntMatrix;
use crate::scalar::{FieldMode, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct GroupRingElement<T: Scalar> {
    group: Arc<FiniteGroup>,
    coeffs: Vec<T>,
}

pub(crate) fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || a.same_structure(b)
}

/// `out += x * y` over the Cayley table of `group`.
#[inline]
pub(crate) fn convolve_into<T: Scalar>(group: &FiniteGroup, x: &[T], y: &[T], out: &mut [T]) {
    for (i, &xi) in x.iter().enumerate() {
        if xi == T::zero() {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            out[group.mul_idx(i, j)] += xi * yj;
        }
    }
}

#[inline]
pub(crate) fn dagger_into<T: Scalar>(group: &FiniteGroup, x: &[T], out: &mut [T]) {
    for (i, &xi) in x.iter().enumerate() {
        out[group.inverse_idx(i)] = xi.conj();
    }
}

impl<T: Scalar> GroupRingElement<T> {
    pub fn zero(group: &Arc<FiniteGroup>) -> Self {
        GroupRingElement {
            group: Arc::clone(group),
            coeffs: vec![T::zero(); group.order()],
        }
    }

    /// The basis element `1·g`.
    pub fn basis(group: &Arc<FiniteGroup>, g: GroupElementId) -> Result<Self> {
        group.check_id(g)?;
        let mut x = Self::zero(group);
        x.coeffs[g.index()] = T::one();
        Ok(x)
    }

    /// The ring unit `1·e`.
    pub fn unit(group: &Arc<FiniteGroup>) -> Self {
        Self::basis(group, group.identity()).expect("identity id is valid")
    }

    pub fn from_coeffs(group: &Arc<FiniteGroup>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != group.order() {
            return Err(Error::DimensionMismatch {
                expected: group.order(),
                got: coeffs.len(),
            });
        }
        Ok(GroupRingElement {
            group: Arc::clone(group),
            coeffs,
        })
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [T] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    pub fn coeff(&self, g: GroupElementId) -> T {
        self.coeffs[g.index()]
    }

    pub fn field_mode(&self) -> FieldMode {
        T::FIELD
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(Error::IncompatibleOperands(format!(
                "elements of {} and {}",
                self.group.render(),
                other.group.render()
            )))
        }
    }

    fn with_coeffs(&self, coeffs: Vec<T>) -> Self {
        GroupRingElement {
            group: Arc::clone(&self.group),
            coeffs,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.with_coeffs(self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| a - b).collect()))
    }

    pub fn scale(&self, lambda: T) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|&a| lambda * a).collect())
    }

    pub fn neg(&self) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|&a| -a).collect())
    }

    /// Group convolution, O(|G|²).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = vec![T::zero(); self.coeffs.len()];
        convolve_into(&self.group, &self.coeffs, &other.coeffs, &mut out);
        Ok(self.with_coeffs(out))
    }

    /// x† = Σ conj(x_g) g⁻¹.
    pub fn dagger(&self) -> Self {
        let mut out = vec![T::zero(); self.coeffs.len()];
        dagger_into(&self.group, &self.coeffs, &mut out);
        self.with_coeffs(out)
    }

    /// Coefficient of the identity element.
    pub fn trace(&self) -> T {
        self.coeffs[0]
    }

    /// ⟨x, y⟩ = Σ conj(x_g) y_g.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.check_compatible(other)?;
        Ok(inner_slices(&self.coeffs, &other.coeffs))
    }

    pub fn norm_sqr(&self) -> T::Real {
        norm_sqr_slice(&self.coeffs)
    }

    pub fn norm(&self) -> T::Real {
        self.norm_sqr().sqrt()
    }

    /// Largest coefficient modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<T::Real> {
        self.check_compatible(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::Real::zero(), T::Real::max))
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

pub(crate) fn inner_slices<T: Scalar>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a.conj() * b).sum()
}

pub(crate) fn norm_sqr_slice<T: Scalar>(x: &[T]) -> T::Real {
    x.iter().map(|c| c.abs_sqr()).sum()
}

/// A^g with `[A^g]_{g₁,g₂} = 1` iff g₁g₂⁻¹ = g, i.e. g₁ = g·g₂.
pub fn amat(group: &FiniteGroup, g: GroupElementId) -> Result<IntMatrix> {
    group.check_id(g)?;
    let n = group.order();
    let mut m = IntMatrix::zeros(n, n);
    for col in 0..n {
        m.set(group.mul_idx(g.index(), col), col, 1);
    }
    Ok(m)
}

/// The antisymmetric {−1, 0, 1} matrix A^g − A^{g⁻¹}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewObject {
    group: Arc<FiniteGroup>,
    g: GroupElementId,
    matrix: IntMatrix,
}

impl SkewObject {
    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn element(&self) -> GroupElementId {
        self.g
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }
}

pub fn skew(group: &Arc<FiniteGroup>, g: GroupElementId) -> Result<SkewObject> {
    let a = amat(group, g)?;
    let b = amat(group, group.inverse(g))?;
    Ok(SkewObject {
        group: Arc::clone(group),
        g,
        matrix: a.sub(&b)?,
    })
}

/// Row-vector action `result[j] = Σᵢ x[i]·m[i][j]`.
pub fn act_row<T: Scalar>(x: &GroupRingElement<T>, m: &IntMatrix) -> Result<GroupRingElement<T>> {
    let n = x.coeffs.len();
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.rows().max(m.cols()),
        });
    }
    let mut out = vec![T::zero(); n];
    for (i, &xi) in x.coeffs.iter().enumerate() {
        for (o, &mij) in out.iter_mut().zip(m.row(i)) {
            match mij {
                0 => {}
                1 => *o += xi,
                -1 => *o -= xi,
                v => *o += xi * T::from_f64(v as f64),
            }
        }
    }
    Ok(x.with_coeffs(out))
}

/// φ̃(Σ x_g g) = Σ x_g φ(g).
pub fn extend_automorphism<T: Scalar>(phi: &Automorphism, x: &GroupRingElement<T>) -> Result<GroupRingElement<T>> {
    if phi.perm().len() != x.coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: x.coeffs.len(),
            got: phi.perm().len(),
        });
    }
    let mut out = vec![T::zero(); x.coeffs.len()];
    for (i, &xi) in x.coeffs.iter().enumerate() {
        out[phi.perm()[i]] = xi;
    }
    Ok(x.with_coeffs(out))
}

impl<T: Scalar> GroupRingElement<T> {
    /// Sum of the listed basis elements with the given coefficients.
    pub fn from_terms(group: &Arc<FiniteGroup>, terms: &[(usize, T)]) -> Result<Self> {
        let mut x = Self::zero(group);
        for &(g, c) in terms {
            group.check_id(GroupElementId(g))?;
            x.coeffs[g] += c;
        }
        Ok(x)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(|c| c.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_cyclic, make_dihedral, make_symmetric, parse_group_spec};
    use num_complex::Complex64;

    fn g(spec: &str) -> Arc<FiniteGroup> {
        Arc::new(parse_group_spec(spec).unwrap())
    }

    fn real(group: &Arc<FiniteGroup>, c: &[f64]) -> GroupRingElement<f64> {
        GroupRingElement::from_coeffs(group, c.to_vec()).unwrap()
    }

    #[test]
    fn add_and_scale() {
        let z2 = g("Z2");
        let x = real(&z2, &[1.0, 1.0]);
        let y = real(&z2, &[1.0, -1.0]);
        assert_eq!(x.add(&y).unwrap().coeffs(), &[2.0, 0.0]);
        assert_eq!(x.add(&GroupRingElement::zero(&z2)).unwrap(), x);
        assert!(x.scale(0.0).is_zero());
        let z3 = g("Z3");
        let w = GroupRingElement::<f64>::zero(&z3);
        assert!(matches!(x.add(&w), Err(Error::IncompatibleOperands(_))));
        assert!(matches!(x.mul(&w), Err(Error::IncompatibleOperands(_))));
    }

    #[test]
    fn convolution_examples() {
        let z2 = g("Z2");
        let prod = real(&z2, &[1.0, 1.0]).mul(&real(&z2, &[1.0, -1.0])).unwrap();
        assert_eq!(prod.coeffs(), &[0.0, 0.0]);
        let z3 = g("Z3");
        let a = GroupRingElement::<f64>::basis(&z3, GroupElementId(1)).unwrap();
        let a2 = GroupRingElement::<f64>::basis(&z3, GroupElementId(2)).unwrap();
        assert_eq!(a.mul(&a).unwrap(), a2);
        assert_eq!(a2.mul(&a2).unwrap(), a);
        let x = real(&z3, &[0.5, -2.0, 3.0]);
        assert_eq!(GroupRingElement::unit(&z3).mul(&x).unwrap(), x);
        assert!(GroupRingElement::<f64>::unit(&z3).is_one());
    }

    #[test]
    fn dagger_examples() {
        let z3 = g("Z3");
        let ia = GroupRingElement::from_terms(&z3, &[(1, Complex64::new(0.0, 1.0))]).unwrap();
        let expected = GroupRingElement::from_terms(&z3, &[(2, Complex64::new(0.0, -1.0))]).unwrap();
        assert_eq!(ia.dagger(), expected);
        assert_eq!(ia.dagger().dagger(), ia);
    }

    #[test]
    fn trace_examples() {
        let z3 = g("Z3");
        assert_eq!(real(&z3, &[2.0, 3.0, 0.0]).trace(), 2.0);
        assert_eq!(GroupRingElement::<f64>::zero(&z3).trace(), 0.0);
    }

    #[test]
    fn basis_norm_is_one() {
        let s3 = g("S3");
        for e in s3.elements() {
            assert_eq!(GroupRingElement::<Complex64>::basis(&s3, e).unwrap().norm(), 1.0);
        }
    }

    #[test]
    fn amat_examples() {
        let z2 = Arc::new(make_cyclic(2).unwrap());
        assert_eq!(amat(&z2, GroupElementId(0)).unwrap(), IntMatrix::identity(2));
        // g₁g₂⁻¹ = a holds exactly at (0, 1) and (1, 0).
        let anti = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(amat(&z2, GroupElementId(1)).unwrap(), anti);
        let s3 = make_symmetric(3).unwrap();
        for a in s3.elements() {
            let ma = amat(&s3, a).unwrap();
            assert!(ma.is_permutation());
            assert_eq!(ma.transpose(), amat(&s3, s3.inverse(a)).unwrap());
            for b in s3.elements() {
                let prod = ma.matmul(&amat(&s3, b).unwrap()).unwrap();
                assert_eq!(prod, amat(&s3, s3.mul(a, b)).unwrap());
            }
        }
    }

    #[test]
    fn amat_entries_match_definition() {
        let d4 = make_dihedral(4).unwrap();
        for g in d4.elements() {
            let m = amat(&d4, g).unwrap();
            for g1 in d4.elements() {
                for g2 in d4.elements() {
                    let hit = d4.mul(g1, d4.inverse(g2)) == g;
                    assert_eq!(m.get(g1.index(), g2.index()), hit as i64);
                }
            }
        }
    }

    #[test]
    fn skew_examples() {
        let z2 = g("Z2");
        assert!(skew(&z2, GroupElementId(0)).unwrap().is_zero());
        assert!(skew(&z2, GroupElementId(1)).unwrap().is_zero());
        let z3 = g("Z3");
        let s = skew(&z3, GroupElementId(1)).unwrap();
        assert_eq!(s.matrix().rank(), 2);
        assert_eq!(s.matrix().transpose(), IntMatrix::zeros(3, 3).sub(s.matrix()).unwrap());
        let s3 = g("S3");
        for a in s3.elements() {
            let sk = skew(&s3, a).unwrap();
            assert_eq!(sk.is_zero(), s3.mul(a, a) == s3.identity());
        }
    }

    #[test]
    fn act_row_permutes_coefficients() {
        let z4 = g("Z4");
        let x = real(&z4, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(act_row(&x, &IntMatrix::identity(4)).unwrap(), x);
        for gi in z4.elements() {
            let y = act_row(&x, &amat(&z4, gi).unwrap()).unwrap();
            for g2 in z4.elements() {
                assert_eq!(y.coeff(g2), x.coeff(z4.mul(gi, g2)));
            }
        }
        assert!(act_row(&x, &IntMatrix::identity(3)).is_err());
    }

    #[test]
    fn extension_of_identity_is_identity() {
        let z5 = g("Z5");
        let x = real(&z5, &[1.0, 2.0, 3.0, 4.0, 5.0]);
        let id = Automorphism::identity(&z5);
        assert_eq!(extend_automorphism(&id, &x).unwrap(), x);
        let inv = Automorphism::inversion(&z5).unwrap();
        assert_eq!(
            extend_automorphism(&inv, &x).unwrap().coeffs(),
            &[1.0, 5.0, 4.0, 3.0, 2.0]
        );
    }
}
