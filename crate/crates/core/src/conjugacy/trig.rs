//! Trigonometric polynomials with exact pointwise evaluation of values,
//! Jacobians and arbitrary-order jets, the closed-form layer under every
//! nonlinear map in the solver.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// How a real perturbation term oscillates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Sin,
    Cos,
}

/// One real term: amplitude * sin/cos(2 pi frequency.x).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RealTerm {
    pub frequency: Vec<i64>,
    pub amplitude: Vec<f64>,
    pub phase: Phase,
}

/// Vector-valued trigonometric polynomial p(x) = sum_m c_m e^{2 pi i m.x}
/// with conjugate-symmetric coefficients (real values); `coords` output
/// coordinates over the n-torus.
#[derive(Clone, Debug)]
pub struct TrigPoly {
    n: usize,
    coords: usize,
    terms: Vec<(Vec<i64>, Vec<Complex64>)>,
}

impl TrigPoly {
    pub fn zero(n: usize, coords: usize) -> Self {
        TrigPoly {
            n,
            coords,
            terms: Vec::new(),
        }
    }

    /// Builds the conjugate-symmetric coefficient set from real sin/cos
    /// terms, so evaluation is exactly real.
    pub fn from_real_terms(n: usize, coords: usize, terms: &[RealTerm]) -> Self {
        let mut map: BTreeMap<Vec<i64>, Vec<Complex64>> = BTreeMap::new();
        let mut add = |freq: Vec<i64>, amp: Vec<Complex64>| {
            let entry = map
                .entry(freq)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); coords]);
            for (e, a) in entry.iter_mut().zip(amp) {
                *e += a;
            }
        };
        for t in terms {
            assert_eq!(t.frequency.len(), n);
            assert_eq!(t.amplitude.len(), coords);
            let half: Vec<Complex64> = t
                .amplitude
                .iter()
                .map(|&a| match t.phase {
                    Phase::Cos => Complex64::new(a / 2.0, 0.0),
                    Phase::Sin => Complex64::new(0.0, -a / 2.0),
                })
                .collect();
            let conj: Vec<Complex64> = half.iter().map(|c| c.conj()).collect();
            let neg: Vec<i64> = t.frequency.iter().map(|&f| -f).collect();
            add(t.frequency.clone(), half);
            add(neg, conj);
        }
        TrigPoly {
            n,
            coords,
            terms: map.into_iter().collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> usize {
        self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.terms
            .iter()
            .all(|(_, amps)| amps.iter().all(|a| a.norm() == 0.0))
    }

    pub fn terms(&self) -> &[(Vec<i64>, Vec<Complex64>)] {
        &self.terms
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.coords];
        for (freq, amps) in &self.terms {
            let phase: f64 = freq.iter().zip(x).map(|(&m, &xi)| m as f64 * xi).sum();
            let e = Complex64::from_polar(1.0, TAU * phase);
            for (o, a) in out.iter_mut().zip(amps) {
                *o += (a * e).re;
            }
        }
        out
    }

    /// Jacobian matrix d p_i / d x_j.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.coords, self.n);
        for (freq, amps) in &self.terms {
            let phase: f64 = freq.iter().zip(x).map(|(&m, &xi)| m as f64 * xi).sum();
            let e = Complex64::from_polar(1.0, TAU * phase);
            for (i, a) in amps.iter().enumerate() {
                let base = a * e * Complex64::new(0.0, TAU);
                for (j, &mj) in freq.iter().enumerate() {
                    out[(i, j)] += (base * mj as f64).re;
                }
            }
        }
        out
    }

    /// Left-multiplies amplitudes by a matrix: (M p)(x) = M * p(x).
    pub fn linear_transform(&self, m: &DMatrix<f64>) -> TrigPoly {
        assert_eq!(m.ncols(), self.coords);
        let terms = self
            .terms
            .iter()
            .map(|(freq, amps)| {
                let mut out = vec![Complex64::new(0.0, 0.0); m.nrows()];
                for (i, o) in out.iter_mut().enumerate() {
                    for (j, a) in amps.iter().enumerate() {
                        *o += m[(i, j)] * a;
                    }
                }
                (freq.clone(), out)
            })
            .collect();
        TrigPoly {
            n: self.n,
            coords: m.nrows(),
            terms,
        }
    }

    /// sum_m ||c_m||, an upper bound for sup ||p||.
    pub fn sup_bound(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, amps)| amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt())
            .sum()
    }

    /// Degree-`degree` Taylor jet at `x`: p(x + d) as polynomials in d,
    /// one per output coordinate.
    pub fn jet(&self, x: &[f64], degree: usize) -> Vec<MultiPoly> {
        let mut out = vec![MultiPoly::zero(self.n, degree); self.coords];
        for (freq, amps) in &self.terms {
            let phase: f64 = freq.iter().zip(x).map(|(&m, &xi)| m as f64 * xi).sum();
            let base = Complex64::from_polar(1.0, TAU * phase);
            // e^{2 pi i m.(x+d)} = base * exp(L(d)), L linear
            let mut linear = MultiPoly::zero(self.n, degree);
            for (j, &mj) in freq.iter().enumerate() {
                if mj != 0 {
                    linear.add_term(unit_exponent(self.n, j), Complex64::new(0.0, TAU * mj as f64));
                }
            }
            let expo = linear.exp();
            for (i, a) in amps.iter().enumerate() {
                out[i].add_scaled(&expo, a * base);
            }
        }
        out
    }
}

fn unit_exponent(n: usize, j: usize) -> Vec<u8> {
    let mut e = vec![0u8; n];
    e[j] = 1;
    e
}

/// Truncated multivariate polynomial in n variables, complex coefficients,
/// total degree capped; the workhorse of exact jet arithmetic.
#[derive(Clone, Debug)]
pub struct MultiPoly {
    n: usize,
    degree: usize,
    terms: BTreeMap<Vec<u8>, Complex64>,
}

impl MultiPoly {
    pub fn zero(n: usize, degree: usize) -> Self {
        MultiPoly {
            n,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, degree: usize, c: Complex64) -> Self {
        let mut p = Self::zero(n, degree);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn variable(n: usize, degree: usize, j: usize) -> Self {
        let mut p = Self::zero(n, degree);
        p.add_term(unit_exponent(n, j), Complex64::new(1.0, 0.0));
        p
    }

    pub fn degree_cap(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn add_term(&mut self, expo: Vec<u8>, c: Complex64) {
        if expo.iter().map(|&e| e as usize).sum::<usize>() > self.degree {
            return;
        }
        let entry = self.terms.entry(expo).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
    }

    pub fn add_scaled(&mut self, other: &MultiPoly, scale: Complex64) {
        for (e, c) in &other.terms {
            self.add_term(e.clone(), c * scale);
        }
    }

    pub fn constant_term(&self) -> Complex64 {
        self.terms
            .get(&vec![0u8; self.n])
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn clear_constant(&mut self) {
        self.terms.remove(&vec![0u8; self.n]);
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero(self.n, self.degree);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let total: usize = ea
                    .iter()
                    .zip(eb)
                    .map(|(&a, &b)| a as usize + b as usize)
                    .sum();
                if total > self.degree {
                    continue;
                }
                let expo: Vec<u8> = ea.iter().zip(eb).map(|(&a, &b)| a + b).collect();
                out.add_term(expo, ca * cb);
            }
        }
        out
    }

    /// exp of a polynomial with zero constant term, truncated.
    pub fn exp(&self) -> MultiPoly {
        debug_assert!(self.constant_term().norm() < 1e-14);
        let mut out = MultiPoly::constant(self.n, self.degree, Complex64::new(1.0, 0.0));
        let mut power = MultiPoly::constant(self.n, self.degree, Complex64::new(1.0, 0.0));
        let mut factorial = 1.0;
        for k in 1..=self.degree {
            power = power.mul(self);
            factorial *= k as f64;
            out.add_scaled(&power, Complex64::new(1.0 / factorial, 0.0));
        }
        out
    }

    /// Substitutes the vector polynomial `args` (one per variable, all with
    /// zero constant term) into `self`.
    pub fn compose(&self, args: &[MultiPoly]) -> MultiPoly {
        assert_eq!(args.len(), self.n);
        let mut out = MultiPoly::zero(args[0].n, self.degree.min(args[0].degree));
        // cache powers of each argument
        let mut powers: Vec<Vec<MultiPoly>> = args
            .iter()
            .map(|a| vec![MultiPoly::constant(a.n, a.degree, Complex64::new(1.0, 0.0)), a.clone()])
            .collect();
        for (expo, c) in &self.terms {
            let mut term = MultiPoly::constant(args[0].n, args[0].degree, *c);
            for (j, &e) in expo.iter().enumerate() {
                while powers[j].len() <= e as usize {
                    let next = powers[j].last().unwrap().mul(&args[j]);
                    powers[j].push(next);
                }
                if e > 0 {
                    term = term.mul(&powers[j][e as usize]);
                }
            }
            out.add_scaled(&term, Complex64::new(1.0, 0.0));
        }
        out
    }

    /// Value of the derivative d^beta at the base point: beta! * coeff.
    pub fn derivative_value(&self, beta: &[u8]) -> Complex64 {
        let coeff = self
            .terms
            .get(&beta.to_vec())
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0));
        let mut fact = 1.0;
        for &b in beta {
            for k in 2..=b as u64 {
                fact *= k as f64;
            }
        }
        coeff * fact
    }
}

/// Jet of a map R^n -> R^n around a base point: constant terms are the
/// image, higher terms are the Taylor coefficients in the displacement.
pub type Jet = Vec<MultiPoly>;

/// Composition g(f(.)): `g_jet` must be based at the image point of
/// `f_jet` (its constant terms).
pub fn jet_compose(g_jet: &Jet, f_jet: &Jet) -> Jet {
    let centered: Vec<MultiPoly> = f_jet
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.clear_constant();
            q
        })
        .collect();
    g_jet.iter().map(|g| g.compose(&centered)).collect()
}

/// Jet of a linear map applied after `f_jet`.
pub fn jet_linear_apply(m: &DMatrix<f64>, f_jet: &Jet) -> Jet {
    let n = m.nrows();
    (0..n)
        .map(|i| {
            let mut out = MultiPoly::zero(f_jet[0].dim(), f_jet[0].degree_cap());
            for (j, f) in f_jet.iter().enumerate() {
                out.add_scaled(f, Complex64::new(m[(i, j)], 0.0));
            }
            out
        })
        .collect()
}

/// Identity jet based at `x`.
pub fn jet_identity(x: &[f64], degree: usize) -> Jet {
    let n = x.len();
    (0..n)
        .map(|i| {
            let mut p = MultiPoly::variable(n, degree, i);
            p.add_term(vec![0; n], Complex64::new(x[i], 0.0));
            p
        })
        .collect()
}

/// Compositional inverse of a jet with invertible linear part, returned as
/// a centered displacement jet (zero constant term): composing it after
/// the original jet gives the identity displacement up to truncation. The
/// caller re-bases it by adding the preimage point, which the forward jet
/// does not carry.
pub fn jet_inverse(jet: &Jet) -> Jet {
    let n = jet.len();
    let degree = jet[0].degree_cap();
    // linear part
    let mut l = DMatrix::zeros(n, n);
    for (i, p) in jet.iter().enumerate() {
        for j in 0..n {
            l[(i, j)] = p.derivative_value(&unit_exponent(n, j)).re;
        }
    }
    let l_inv = l.try_inverse().expect("jet linear part invertible");
    let centered: Vec<MultiPoly> = jet
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.clear_constant();
            q
        })
        .collect();
    // Newton iteration on polynomials: G <- G + L^{-1} (delta - Jc(G))
    let mut g: Vec<MultiPoly> = (0..n)
        .map(|i| {
            let mut out = MultiPoly::zero(n, degree);
            for j in 0..n {
                out.add_scaled(
                    &MultiPoly::variable(n, degree, j),
                    Complex64::new(l_inv[(i, j)], 0.0),
                );
            }
            out
        })
        .collect();
    let steps = (degree as f64).log2().ceil() as usize + 2;
    for _ in 0..steps {
        let jg: Vec<MultiPoly> = centered.iter().map(|p| p.compose(&g)).collect();
        let mut residual: Vec<MultiPoly> = Vec::with_capacity(n);
        for i in 0..n {
            let mut r = MultiPoly::variable(n, degree, i);
            r.add_scaled(&jg[i], Complex64::new(-1.0, 0.0));
            residual.push(r);
        }
        for i in 0..n {
            let mut correction = MultiPoly::zero(n, degree);
            for j in 0..n {
                correction.add_scaled(&residual[j], Complex64::new(l_inv[(i, j)], 0.0));
            }
            g[i].add_scaled(&correction, Complex64::new(1.0, 0.0));
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_poly() -> TrigPoly {
        TrigPoly::from_real_terms(
            2,
            2,
            &[
                RealTerm {
                    frequency: vec![1, 0],
                    amplitude: vec![0.02, -0.01],
                    phase: Phase::Sin,
                },
                RealTerm {
                    frequency: vec![1, 1],
                    amplitude: vec![0.0, 0.03],
                    phase: Phase::Cos,
                },
            ],
        )
    }

    #[test]
    fn evaluation_matches_closed_form() {
        let p = sample_poly();
        let x = [0.3, 0.71];
        let v = p.eval(&x);
        let s = (TAU * x[0]).sin();
        let c = (TAU * (x[0] + x[1])).cos();
        assert_abs_diff_eq!(v[0], 0.02 * s, epsilon = 1e-15);
        assert_abs_diff_eq!(v[1], -0.01 * s + 0.03 * c, epsilon = 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = sample_poly();
        let x = [0.13, 0.42];
        let j = p.jacobian(&x);
        let h = 1e-6;
        for col in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[col] += h;
            xm[col] -= h;
            let vp = p.eval(&xp);
            let vm = p.eval(&xm);
            for row in 0..2 {
                let fd = (vp[row] - vm[row]) / (2.0 * h);
                assert_abs_diff_eq!(j[(row, col)], fd, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn jet_reproduces_values_and_derivatives() {
        let p = sample_poly();
        let x = [0.21, 0.55];
        let jet = p.jet(&x, 3);
        let v = p.eval(&x);
        for i in 0..2 {
            assert_abs_diff_eq!(jet[i].constant_term().re, v[i], epsilon = 1e-14);
            assert!(jet[i].constant_term().im.abs() < 1e-14);
        }
        let j = p.jacobian(&x);
        for i in 0..2 {
            for col in 0..2 {
                let mut beta = vec![0u8; 2];
                beta[col] = 1;
                assert_abs_diff_eq!(
                    jet[i].derivative_value(&beta).re,
                    j[(i, col)],
                    epsilon = 1e-13
                );
            }
        }
        // second derivative of 0.02 sin(2 pi x0) wrt x0 twice
        let d2 = jet[0].derivative_value(&[2, 0]).re;
        let expect = -0.02 * TAU * TAU * (TAU * x[0]).sin();
        assert_abs_diff_eq!(d2, expect, epsilon = 1e-10);
    }

    #[test]
    fn jet_compose_is_chain_rule() {
        let p = sample_poly();
        let x = [0.4, 0.9];
        // map F(x) = x + p(x); compose F with itself and compare with the
        // direct jet of the composed map at x via finite differencing
        let f_at = |y: &[f64]| -> Vec<f64> {
            let v = p.eval(y);
            vec![y[0] + v[0], y[1] + v[1]]
        };
        let jet_of_f = |y: &[f64], deg: usize| -> Jet {
            let mut jet = jet_identity(y, deg);
            let pj = p.jet(y, deg);
            for i in 0..2 {
                jet[i].add_scaled(&pj[i], Complex64::new(1.0, 0.0));
            }
            jet
        };
        let j1 = jet_of_f(&x, 2);
        let y = f_at(&x);
        let j2 = jet_of_f(&y, 2);
        let composed = jet_compose(&j2, &j1);
        // first derivative by chain rule
        let d1 = p.jacobian(&x) + DMatrix::identity(2, 2);
        let d2m = p.jacobian(&y) + DMatrix::identity(2, 2);
        let chain = d2m * d1;
        for i in 0..2 {
            for col in 0..2 {
                let mut beta = vec![0u8; 2];
                beta[col] = 1;
                assert_abs_diff_eq!(
                    composed[i].derivative_value(&beta).re,
                    chain[(i, col)],
                    epsilon = 1e-12
                );
            }
        }
        // constant term is the two-step image
        let z = f_at(&y);
        for i in 0..2 {
            assert_abs_diff_eq!(composed[i].constant_term().re, z[i], epsilon = 1e-13);
        }
    }

    #[test]
    fn jet_inverse_round_trip() {
        let p = sample_poly();
        let x = [0.27, 0.64];
        let mut jet = jet_identity(&x, 3);
        let pj = p.jet(&x, 3);
        for i in 0..2 {
            jet[i].add_scaled(&pj[i], Complex64::new(1.0, 0.0));
        }
        let inv = jet_inverse(&jet);
        let round = jet_compose(&inv, &jet);
        // round trip should be the identity displacement with zero constant
        for i in 0..2 {
            for (expo, c) in round[i].terms.iter() {
                let order: usize = expo.iter().map(|&e| e as usize).sum();
                let expect = if order == 1 && expo[i] == 1 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(c.re, expect, epsilon = 1e-11);
                assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-11);
            }
        }
    }
}
