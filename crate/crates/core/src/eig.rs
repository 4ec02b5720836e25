//! Floating-point eigenvalue helpers on top of the exact layer.
//!
//! Roots are seeded from a companion-matrix Schur factorization and then
//! Newton-polished against the exact integer coefficients, which brings
//! simple roots to machine accuracy regardless of how the seed was found.

use crate::poly::IntPoly;
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

/// Complex roots of an integer polynomial (with multiplicity as seeded by
/// the companion matrix; callers that need distinct roots should pass a
/// squarefree polynomial).
pub fn poly_roots(p: &IntPoly) -> Vec<Complex64> {
    let deg = p.degree();
    if deg == 0 || p.is_zero() {
        return Vec::new();
    }
    let coeffs: Vec<f64> = p
        .coeffs
        .iter()
        .map(|c| num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::NAN))
        .collect();
    if coeffs.iter().any(|c| !c.is_finite()) {
        return vec![Complex64::new(f64::NAN, f64::NAN); deg];
    }
    let lead = coeffs[deg];
    let companion = DMatrix::<f64>::from_fn(deg, deg, |i, j| {
        if j == deg - 1 {
            -coeffs[i] / lead
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let seeds = companion.complex_eigenvalues();
    seeds
        .iter()
        .map(|z| newton_polish(p, Complex64::new(z.re, z.im)))
        .collect()
}

fn newton_polish(p: &IntPoly, mut z: Complex64) -> Complex64 {
    let dp = p.derivative();
    for _ in 0..60 {
        let f = p.eval_complex(z);
        let d = dp.eval_complex(z);
        if d.norm() == 0.0 {
            break;
        }
        let step = f / d;
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    z
}

/// Moduli of all roots.
pub fn poly_root_moduli(p: &IntPoly) -> Vec<f64> {
    poly_roots(p).iter().map(|z| z.norm()).collect()
}

/// One kernel vector of the complex matrix `m` (assumed rank n-1), by
/// Gaussian elimination with full pivoting.
pub fn complex_kernel_vector(m: &DMatrix<Complex<f64>>) -> Option<nalgebra::DVector<Complex<f64>>> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut rank = 0usize;
    for step in 0..n {
        // full pivot over the remaining block
        let mut best = (step, step, 0.0f64);
        for i in step..n {
            for j in step..n {
                let mag = a[(i, j)].norm();
                if mag > best.2 {
                    best = (i, j, mag);
                }
            }
        }
        if best.2 < 1e-10 {
            break;
        }
        a.swap_rows(step, best.0);
        a.swap_columns(step, best.1);
        col_perm.swap(step, best.1);
        let pivot = a[(step, step)];
        for i in step + 1..n {
            let factor = a[(i, step)] / pivot;
            for j in step..n {
                let v = a[(step, j)];
                a[(i, j)] -= factor * v;
            }
        }
        rank += 1;
    }
    if rank == n {
        return None;
    }
    // back-substitute with the first free variable set to one
    let mut x = nalgebra::DVector::from_element(n, Complex::new(0.0, 0.0));
    x[rank] = Complex::new(1.0, 0.0);
    for i in (0..rank).rev() {
        let mut acc = Complex::new(0.0, 0.0);
        for j in i + 1..n {
            acc += a[(i, j)] * x[j];
        }
        x[i] = -acc / a[(i, i)];
    }
    let mut out = nalgebra::DVector::from_element(n, Complex::new(0.0, 0.0));
    for (permuted, &orig) in col_perm.iter().enumerate() {
        out[orig] = x[permuted];
    }
    let norm = out.norm();
    if norm == 0.0 {
        return None;
    }
    Some(out / Complex::new(norm, 0.0))
}

/// Eigenvalue of `m` on the invariant line spanned by `v` (Rayleigh-style
/// quotient against the largest component).
pub fn eigenvalue_on_line(
    m: &DMatrix<f64>,
    v: &nalgebra::DVector<Complex<f64>>,
) -> Complex64 {
    let mc = m.map(|x| Complex::new(x, 0.0));
    let mv = &mc * v;
    let mut best = 0usize;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() {
            best = i;
        }
    }
    let q = mv[best] / v[best];
    Complex64::new(q.re, q.im)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cat_map_roots_match_quadratic_formula() {
        let p = IntPoly::from_i64(&[1, -3, 1]);
        let mut moduli = poly_root_moduli(&p);
        moduli.sort_by(f64::total_cmp);
        let golden = (3.0 + 5.0f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(moduli[1], golden, epsilon = 1e-13);
        assert_abs_diff_eq!(moduli[0], 1.0 / golden, epsilon = 1e-13);
    }

    #[test]
    fn cubic_roots_are_cosine_values() {
        let p = IntPoly::from_i64(&[-1, -2, 1, 1]);
        let mut roots: Vec<f64> = poly_roots(&p).iter().map(|z| z.re).collect();
        roots.sort_by(f64::total_cmp);
        let expect: Vec<f64> = [4.0, 2.0, 1.0]
            .iter()
            .map(|&k| 2.0 * (2.0 * std::f64::consts::PI * k / 7.0).cos())
            .collect();
        for (r, e) in roots.iter().zip(expect.iter()) {
            assert_abs_diff_eq!(r, e, epsilon = 1e-13);
        }
    }

    #[test]
    fn kernel_vector_of_shifted_matrix() {
        let p = IntPoly::from_i64(&[1, -3, 1]);
        let roots = poly_roots(&p);
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 1.0]);
        for root in roots {
            let shifted = m.map(|x| Complex::new(x, 0.0))
                - DMatrix::from_diagonal_element(2, 2, Complex::new(root.re, root.im));
            let v = complex_kernel_vector(&shifted).unwrap();
            let mv = m.map(|x| Complex::new(x, 0.0)) * &v;
            let lambda = eigenvalue_on_line(&m, &v);
            for i in 0..2 {
                let diff = mv[i] - Complex::new(lambda.re, lambda.im) * v[i];
                assert!(diff.norm() < 1e-12);
            }
        }
    }
}
