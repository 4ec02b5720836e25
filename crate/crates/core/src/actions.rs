//! Exact-arithmetic core for Z^k-actions by toral automorphisms.
//!
//! Matrices carry arbitrary-precision integer entries, so powers of
//! hyperbolic elements never overflow and the ergodicity decision is an
//! exact integer computation (cyclotomic divisibility), never a rounded one.

use crate::poly::{self, IntPoly};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("matrix is not square: {rows} rows, {cols} entries per row")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not unimodular: determinant {det}")]
    NotUnimodular { det: BigInt },
    #[error("generators {i} and {j} do not commute")]
    NonCommuting { i: usize, j: usize },
    #[error("generator {index} has dimension {found}, expected {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("exponent vector has length {found}, action has rank {expected}")]
    RankMismatch { expected: usize, found: usize },
    #[error("action must have at least one generator")]
    Empty,
}

/// Square integer matrix, row-major, arbitrary-precision entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    n: usize,
    entries: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn new(n: usize, entries: Vec<BigInt>) -> Result<Self, ActionError> {
        if entries.len() != n * n {
            return Err(ActionError::NotSquare {
                rows: n,
                cols: entries.len(),
            });
        }
        Ok(IntegerMatrix { n, entries })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, ActionError> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(ActionError::NotSquare { rows: n, cols: r.len() });
            }
        }
        Ok(IntegerMatrix {
            n,
            entries: rows.iter().flatten().map(|&v| BigInt::from(v)).collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = BigInt::one();
        }
        IntegerMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.n + j]
    }

    pub fn rows_i64(&self) -> Option<Vec<Vec<i64>>> {
        let mut out = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut row = Vec::with_capacity(self.n);
            for j in 0..self.n {
                row.push(self.entry(i, j).to_i64()?);
            }
            out.push(row);
        }
        Some(out)
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = self.entry(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] += a * other.entry(l, j);
                }
            }
        }
        IntegerMatrix { n, entries }
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                let mut acc = BigInt::zero();
                for j in 0..self.n {
                    acc += self.entry(i, j) * &v[j];
                }
                acc
            })
            .collect()
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        let n = self.n;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.entries.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[k * n + k].is_zero() {
                let pivot = (k + 1..n).find(|&i| !m[i * n + k].is_zero());
                match pivot {
                    Some(p) => {
                        for j in 0..n {
                            m.swap(k * n + j, p * n + j);
                        }
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let val = &m[i * n + j] * &m[k * n + k] - &m[i * n + k] * &m[k * n + j];
                    m[i * n + j] = &val / &prev;
                }
                m[i * n + k] = BigInt::zero();
            }
            prev = m[k * n + k].clone();
        }
        let det = m[(n - 1) * n + (n - 1)].clone();
        if sign < 0 {
            -det
        } else {
            det
        }
    }

    pub fn is_unimodular(&self) -> bool {
        let d = self.determinant();
        d.abs().is_one()
    }

    /// Exact inverse of a unimodular matrix (integer entries by Cramer).
    pub fn inverse_unimodular(&self) -> Result<IntegerMatrix, ActionError> {
        let det = self.determinant();
        if !det.abs().is_one() {
            return Err(ActionError::NotUnimodular { det });
        }
        let n = self.n;
        let mut entries = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                // adjugate: cofactor C_{j,i}
                let minor = self.minor(j, i);
                let c = minor.determinant();
                let sgn = if (i + j) % 2 == 0 { 1 } else { -1 };
                entries[i * n + j] = &det * BigInt::from(sgn) * c;
            }
        }
        Ok(IntegerMatrix { n, entries })
    }

    fn minor(&self, drop_row: usize, drop_col: usize) -> IntegerMatrix {
        let n = self.n;
        let mut entries = Vec::with_capacity((n - 1) * (n - 1));
        for i in 0..n {
            if i == drop_row {
                continue;
            }
            for j in 0..n {
                if j == drop_col {
                    continue;
                }
                entries.push(self.entry(i, j).clone());
            }
        }
        IntegerMatrix {
            n: n - 1,
            entries,
        }
    }

    /// Integer power with exact inverse for negative exponents.
    pub fn pow(&self, e: i64) -> Result<IntegerMatrix, ActionError> {
        let base = if e < 0 {
            self.inverse_unimodular()?
        } else {
            self.clone()
        };
        let mut result = IntegerMatrix::identity(self.n);
        let mut acc = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&acc);
            }
            k >>= 1;
            if k > 0 {
                acc = acc.mul(&acc);
            }
        }
        Ok(result)
    }

    /// Exact characteristic polynomial by the Faddeev-LeVerrier recursion;
    /// every division it performs is exact over the integers.
    pub fn char_poly(&self) -> IntPoly {
        let n = self.n;
        let mut coeffs = vec![BigInt::zero(); n + 1];
        coeffs[n] = BigInt::one();
        let mut m = IntegerMatrix::identity(n);
        let mut c = BigInt::one();
        for k in 1..=n {
            if k > 1 {
                for i in 0..n {
                    m.entries[i * n + i] += &c;
                }
                m = self.mul(&m);
            } else {
                m = self.clone();
            }
            let tr: BigInt = (0..n).map(|i| m.entries[i * n + i].clone()).sum();
            c = -tr / BigInt::from(k as i64);
            coeffs[n - k] = c.clone();
        }
        IntPoly::new(coeffs)
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| {
            self.entry(i, j).to_f64().unwrap_or(f64::INFINITY)
        })
    }

    /// Entries reduced mod `modulus` into [0, modulus).
    pub fn rows_mod(&self, modulus: i64) -> Vec<Vec<i64>> {
        let m = BigInt::from(modulus);
        (0..self.n)
            .map(|i| {
                (0..self.n)
                    .map(|j| {
                        let r = ((self.entry(i, j) % &m) + &m) % &m;
                        r.to_i64().unwrap()
                    })
                    .collect()
            })
            .collect()
    }
}

/// A Z^k-action by commuting unimodular integer matrices on the n-torus.
#[derive(Clone, Debug)]
pub struct AbelianLinearAction {
    n: usize,
    generators: Vec<IntegerMatrix>,
    inverses: Vec<IntegerMatrix>,
}

impl AbelianLinearAction {
    /// Validates unimodularity of every generator and exact pairwise
    /// commutation before constructing the action.
    pub fn new(generators: Vec<IntegerMatrix>) -> Result<Self, ActionError> {
        let first = generators.first().ok_or(ActionError::Empty)?;
        let n = first.dim();
        for (idx, g) in generators.iter().enumerate() {
            if g.dim() != n {
                return Err(ActionError::DimensionMismatch {
                    index: idx,
                    expected: n,
                    found: g.dim(),
                });
            }
            let det = g.determinant();
            if !det.abs().is_one() {
                return Err(ActionError::NotUnimodular { det });
            }
        }
        for i in 0..generators.len() {
            for j in i + 1..generators.len() {
                if generators[i].mul(&generators[j]) != generators[j].mul(&generators[i]) {
                    return Err(ActionError::NonCommuting { i, j });
                }
            }
        }
        let inverses = generators
            .iter()
            .map(IntegerMatrix::inverse_unimodular)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(AbelianLinearAction {
            n,
            generators,
            inverses,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[IntegerMatrix] {
        &self.generators
    }

    /// tau(a) = prod generator_i^{a_i}, exact.
    pub fn element(&self, a: &[i64]) -> Result<IntegerMatrix, ActionError> {
        if a.len() != self.rank() {
            return Err(ActionError::RankMismatch {
                expected: self.rank(),
                found: a.len(),
            });
        }
        let mut result = IntegerMatrix::identity(self.n);
        for (i, &e) in a.iter().enumerate() {
            if e == 0 {
                continue;
            }
            let base = if e < 0 {
                &self.inverses[i]
            } else {
                &self.generators[i]
            };
            let mut acc = base.clone();
            let mut k = e.unsigned_abs();
            let mut partial = IntegerMatrix::identity(self.n);
            while k > 0 {
                if k & 1 == 1 {
                    partial = partial.mul(&acc);
                }
                k >>= 1;
                if k > 0 {
                    acc = acc.mul(&acc);
                }
            }
            result = result.mul(&partial);
        }
        Ok(result)
    }
}

/// Exact ergodicity test: a unimodular integer matrix is ergodic on the
/// torus iff no eigenvalue is a root of unity, i.e. iff its characteristic
/// polynomial has no cyclotomic factor of degree <= n.
pub fn is_ergodic(a: &IntegerMatrix) -> Result<bool, ActionError> {
    let det = a.determinant();
    if !det.abs().is_one() {
        return Err(ActionError::NotUnimodular { det });
    }
    let p = a.char_poly();
    for d in poly::cyclotomic_orders_up_to_degree(a.dim()) {
        let phi = poly::cyclotomic(d);
        if phi.degree() <= p.degree() && p.div_exact(&phi).is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact hyperbolicity test: a unimodular integer matrix is Anosov as a
/// toral automorphism iff no eigenvalue has modulus one. Rounded eigenvalue
/// moduli only gate the fast path; the decision itself is the exact
/// unit-circle root test on the characteristic polynomial, so `tol` never
/// changes the answer for inputs it can certify.
pub fn is_anosov_linear(a: &IntegerMatrix, tol: f64) -> Result<bool, ActionError> {
    let det = a.determinant();
    if !det.abs().is_one() {
        return Err(ActionError::NotUnimodular { det });
    }
    let p = a.char_poly();
    let moduli = crate::eig::poly_root_moduli(&p);
    if moduli.iter().all(|m| (m - 1.0).abs() > tol.max(1e-12)) {
        return Ok(true);
    }
    Ok(!poly::has_unit_circle_root(&p))
}

/// Result of scanning a finite lattice box for non-ergodic elements.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeErgodicity {
    pub box_radius: i64,
    pub all_ergodic: bool,
    pub first_failure: Option<Vec<i64>>,
}

/// Checks that every nonzero a with ||a||_inf <= box yields an ergodic
/// tau(a). This is the finite-box stand-in for the infinite-group
/// hypothesis of the rigidity theorem; the gap is inherent and documented.
pub fn ergodic_lattice_check(
    action: &AbelianLinearAction,
    box_radius: i64,
) -> Result<LatticeErgodicity, ActionError> {
    let k = action.rank();
    let mut a = vec![-box_radius; k];
    loop {
        if a.iter().any(|&x| x != 0) && !is_ergodic(&action.element(&a)?)? {
            return Ok(LatticeErgodicity {
                box_radius,
                all_ergodic: false,
                first_failure: Some(a.clone()),
            });
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == k {
                return Ok(LatticeErgodicity {
                    box_radius,
                    all_ergodic: true,
                    first_failure: None,
                });
            }
            if a[i] < box_radius {
                a[i] += 1;
                break;
            }
            a[i] = -box_radius;
            i += 1;
        }
    }
}

/// JSON action file: `{ "n": .., "k": .., "generators": [[..row..], ..] }`,
/// generators row-major. This is the artifact's canonical input format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ActionFile {
    pub n: usize,
    pub k: usize,
    pub generators: Vec<Vec<Vec<i64>>>,
}

impl ActionFile {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_action(&self) -> Result<AbelianLinearAction, ActionError> {
        if self.generators.len() != self.k {
            return Err(ActionError::RankMismatch {
                expected: self.k,
                found: self.generators.len(),
            });
        }
        let gens = self
            .generators
            .iter()
            .map(|rows| IntegerMatrix::from_rows(rows))
            .collect::<Result<Vec<_>, _>>()?;
        for (idx, g) in gens.iter().enumerate() {
            if g.dim() != self.n {
                return Err(ActionError::DimensionMismatch {
                    index: idx,
                    expected: self.n,
                    found: g.dim(),
                });
            }
        }
        AbelianLinearAction::new(gens)
    }
}

/// The Arnold cat map [[2,1],[1,1]].
pub fn cat_map() -> IntegerMatrix {
    IntegerMatrix::from_rows(&[vec![2, 1], vec![1, 1]]).unwrap()
}

/// Companion matrix of x^3 + x^2 - 2x - 1 (eigenvalues 2cos(2pi k/7)).
pub fn totally_real_cubic() -> IntegerMatrix {
    IntegerMatrix::from_rows(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 2, -1]]).unwrap()
}

/// The rank-2 action on T^3 generated by C and C^2 - 2I, where C is the
/// companion matrix above. The second generator shares C's characteristic
/// polynomial with the eigenvalues permuted, so the pair is genuinely
/// higher rank.
pub fn rank2_cartan_action() -> AbelianLinearAction {
    let c = totally_real_cubic();
    let c2 = c.mul(&c);
    let mut entries = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let mut e = c2.entry(i, j).clone();
            if i == j {
                e -= BigInt::from(2);
            }
            entries.push(e);
        }
    }
    let u = IntegerMatrix::new(3, entries).unwrap();
    AbelianLinearAction::new(vec![c, u]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn element_powers_of_cat_map() {
        let action = AbelianLinearAction::new(vec![cat_map()]).unwrap();
        let sq = action.element(&[2]).unwrap();
        assert_eq!(sq, IntegerMatrix::from_rows(&[vec![5, 3], vec![3, 2]]).unwrap());
        assert_eq!(action.element(&[0]).unwrap(), IntegerMatrix::identity(2));
    }

    #[test]
    fn element_inverse_cancellation() {
        let a = cat_map();
        let action = AbelianLinearAction::new(vec![a.clone(), a]).unwrap();
        assert_eq!(
            action.element(&[1, -1]).unwrap(),
            IntegerMatrix::identity(2)
        );
    }

    #[test]
    fn element_is_a_homomorphism() {
        let action = rank2_cartan_action();
        for (a, b) in [([1, 2], [3, -1]), ([-2, 0], [1, 1]), ([4, -3], [-1, 2])] {
            let lhs = action
                .element(&[a[0] + b[0], a[1] + b[1]])
                .unwrap();
            let rhs = action.element(&a).unwrap().mul(&action.element(&b).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn big_powers_do_not_overflow() {
        let action = AbelianLinearAction::new(vec![cat_map()]).unwrap();
        let m = action.element(&[60]).unwrap();
        // entries are Fibonacci-sized, far beyond i64
        assert!(m.entry(0, 0).to_string().len() > 19);
        let back = m.mul(&action.element(&[-60]).unwrap());
        assert_eq!(back, IntegerMatrix::identity(2));
    }

    #[test]
    fn char_poly_of_cat_map() {
        assert_eq!(cat_map().char_poly(), IntPoly::from_i64(&[1, -3, 1]));
        assert_eq!(
            totally_real_cubic().char_poly(),
            IntPoly::from_i64(&[-1, -2, 1, 1])
        );
    }

    #[test]
    fn rank2_second_generator_matches_spec() {
        let action = rank2_cartan_action();
        let u = &action.generators()[1];
        assert!(u.is_unimodular());
        assert_eq!(u.char_poly(), totally_real_cubic().char_poly());
        assert_eq!(u.determinant(), BigInt::one());
    }

    #[test]
    fn ergodicity_examples() {
        assert!(!is_ergodic(&IntegerMatrix::identity(2)).unwrap());
        let rot = IntegerMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        assert!(!is_ergodic(&rot).unwrap());
        assert!(is_ergodic(&cat_map()).unwrap());
        let shear = IntegerMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(!is_ergodic(&shear).unwrap());
    }

    #[test]
    fn anosov_examples() {
        assert!(is_anosov_linear(&cat_map(), 1e-9).unwrap());
        assert!(!is_anosov_linear(&IntegerMatrix::identity(2), 1e-9).unwrap());
        assert!(is_anosov_linear(&totally_real_cubic(), 1e-9).unwrap());
        // symplectic with a unit-circle pair but not a root of unity:
        // companion of Lehmer's polynomial is unimodular and not Anosov
        let lehmer = companion(&[1, 1, 0, -1, -1, -1, -1, -1, 0, 1]);
        assert!(!is_anosov_linear(&lehmer, 1e-9).unwrap());
    }

    #[test]
    fn anosov_invariant_under_inverse() {
        for m in [cat_map(), totally_real_cubic()] {
            let inv = m.inverse_unimodular().unwrap();
            assert_eq!(
                is_anosov_linear(&m, 1e-9).unwrap(),
                is_anosov_linear(&inv, 1e-9).unwrap()
            );
        }
    }

    #[test]
    fn lattice_check_examples() {
        let cat = AbelianLinearAction::new(vec![cat_map()]).unwrap();
        assert!(ergodic_lattice_check(&cat, 5).unwrap().all_ergodic);

        let rot = IntegerMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        let rot_action = AbelianLinearAction::new(vec![rot]).unwrap();
        let res = ergodic_lattice_check(&rot_action, 1).unwrap();
        assert!(!res.all_ergodic);
        assert_eq!(res.first_failure, Some(vec![-1]));

        assert!(ergodic_lattice_check(&rank2_cartan_action(), 3)
            .unwrap()
            .all_ergodic);
    }

    #[test]
    fn action_file_round_trip() {
        let text = r#"{"n":2,"k":1,"generators":[[[2,1],[1,1]]]}"#;
        let file = ActionFile::parse(text).unwrap();
        let action = file.to_action().unwrap();
        assert_eq!(action.dim(), 2);
        assert_eq!(action.rank(), 1);
    }

    #[test]
    fn rejects_non_commuting_generators() {
        let a = cat_map();
        let b = IntegerMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        assert!(matches!(
            AbelianLinearAction::new(vec![a, b]),
            Err(ActionError::NonCommuting { .. })
        ));
    }

    /// Brute-force floating-point root-of-unity oracle from the contract:
    /// some eigenvalue has | |mu| - 1 | < 1e-9 and mu^d within 1e-6 of 1
    /// for some d <= 420.
    fn ergodic_oracle_2x2(m: &[[i64; 2]; 2]) -> bool {
        let tr = (m[0][0] + m[1][1]) as f64;
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) as f64;
        let disc = tr * tr - 4.0 * det;
        let eigs: Vec<num_complex::Complex64> = if disc >= 0.0 {
            let s = disc.sqrt();
            vec![
                num_complex::Complex64::new((tr + s) / 2.0, 0.0),
                num_complex::Complex64::new((tr - s) / 2.0, 0.0),
            ]
        } else {
            let s = (-disc).sqrt();
            vec![
                num_complex::Complex64::new(tr / 2.0, s / 2.0),
                num_complex::Complex64::new(tr / 2.0, -s / 2.0),
            ]
        };
        for mu in eigs {
            if (mu.norm() - 1.0).abs() < 1e-9 {
                let mut p = num_complex::Complex64::new(1.0, 0.0);
                for _ in 0..420 {
                    p *= mu;
                    if (p - num_complex::Complex64::new(1.0, 0.0)).norm() < 1e-6 {
                        return false;
                    }
                }
            }
        }
        true
    }

    #[test]
    fn ergodicity_matches_float_oracle_on_small_2x2() {
        let range = -3i64..=3;
        let mut checked = 0usize;
        for a in range.clone() {
            for b in range.clone() {
                for c in range.clone() {
                    for d in range.clone() {
                        if (a * d - b * c).abs() != 1 {
                            continue;
                        }
                        let m = IntegerMatrix::from_rows(&[vec![a, b], vec![c, d]]).unwrap();
                        let exact = is_ergodic(&m).unwrap();
                        let oracle = ergodic_oracle_2x2(&[[a, b], [c, d]]);
                        assert_eq!(exact, oracle, "disagreement at [[{a},{b}],[{c},{d}]]");
                        checked += 1;
                    }
                }
            }
        }
        assert!(checked > 100);
    }

    fn companion(low_coeffs: &[i64]) -> IntegerMatrix {
        // monic polynomial x^n + c_{n-1} x^{n-1} + ... + c_0, low coefficients given
        let n = low_coeffs.len();
        let mut rows = vec![vec![0i64; n]; n];
        for i in 0..n - 1 {
            rows[i][i + 1] = 1;
        }
        for j in 0..n {
            rows[n - 1][j] = -low_coeffs[j];
        }
        IntegerMatrix::from_rows(&rows).unwrap()
    }
}
