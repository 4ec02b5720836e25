//! Exact univariate polynomial arithmetic over the integers and rationals.
//!
//! Everything here is exact: cyclotomic factors, squarefree parts, Sturm
//! chains and the unit-circle root decision are integer/rational
//! computations with no floating point involved.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Polynomial with arbitrary-precision integer coefficients, lowest degree
/// first. The zero polynomial is represented by an empty coefficient list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly {
    pub coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().map_or(false, Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_i64(&[1])
    }

    /// The monomial x^k.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![BigInt::zero(); k + 1];
        c[k] = BigInt::one();
        IntPoly { coeffs: c }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn eval_bigint(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * x + bigint_to_f64(c);
        }
        acc
    }

    pub fn eval_complex(&self, z: num_complex::Complex64) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + bigint_to_f64(c);
        }
        acc
    }

    pub fn derivative(&self) -> IntPoly {
        if self.coeffs.len() <= 1 {
            return IntPoly::zero();
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        IntPoly::new(out)
    }

    pub fn sub(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![BigInt::zero(); n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] -= c;
        }
        IntPoly::new(out)
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn scale(&self, s: &BigInt) -> IntPoly {
        IntPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Exact division: returns `Some(q)` with `self = q * div` when the
    /// division leaves no remainder over the integers, `None` otherwise.
    pub fn div_exact(&self, div: &IntPoly) -> Option<IntPoly> {
        if div.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(IntPoly::zero());
        }
        if self.degree() < div.degree() {
            return None;
        }
        let mut rem = self.coeffs.clone();
        let dd = div.degree();
        let lead = div.leading();
        let mut q = vec![BigInt::zero(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let top = rem[k + dd].clone();
            if top.is_zero() {
                continue;
            }
            // integer division must be exact for divisibility
            let (quot, r) = num_integer::div_rem_big(&top, &lead);
            if !r.is_zero() {
                return None;
            }
            q[k] = quot;
            for (j, dc) in div.coeffs.iter().enumerate() {
                let prod = dc * &q[k];
                rem[k + j] -= prod;
            }
        }
        if rem.iter().all(Zero::is_zero) {
            Some(IntPoly::new(q))
        } else {
            None
        }
    }

    /// Coefficients reversed; the roots of the result are the inverses of
    /// the roots of `self` (assuming a nonzero constant term).
    pub fn reciprocal(&self) -> IntPoly {
        let mut c = self.coeffs.clone();
        c.reverse();
        IntPoly::new(c)
    }

    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = num_integer::gcd_big(&g, c);
        }
        g
    }

    pub fn primitive(&self) -> IntPoly {
        let c = self.content();
        if c.is_zero() || c.is_one() {
            return self.clone();
        }
        IntPoly::new(self.coeffs.iter().map(|a| a / &c).collect())
    }

    /// Primitive gcd over the integers, positive leading coefficient.
    pub fn gcd(&self, other: &IntPoly) -> IntPoly {
        let mut a = to_rational(self);
        let mut b = to_rational(other);
        while !b.is_empty() {
            let r = rat_rem(&a, &b);
            a = b;
            b = r;
        }
        let mut g = from_rational(&a).primitive();
        if g.leading().is_negative() {
            g = g.scale(&BigInt::from(-1));
        }
        if g.is_zero() {
            IntPoly::zero()
        } else {
            g
        }
    }

    /// The squarefree part `self / gcd(self, self')`, primitive.
    pub fn squarefree_part(&self) -> IntPoly {
        if self.degree() == 0 {
            return IntPoly::one();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.primitive();
        }
        // division of the primitive part by the primitive gcd is exact
        self.primitive()
            .div_exact(&g)
            .or_else(|| self.div_exact(&g))
            .expect("squarefree part division is exact")
            .primitive()
    }

    pub fn is_squarefree(&self) -> bool {
        self.gcd(&self.derivative()).degree() == 0
    }
}

fn bigint_to_f64(c: &BigInt) -> f64 {
    num_traits::ToPrimitive::to_f64(c).unwrap_or(f64::INFINITY)
}

// Small integer helpers kept local so the rest of the crate does not need
// num-integer directly.
mod num_integer {
    use num_bigint::BigInt;
    use num_traits::{Signed, Zero};

    pub fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
        let mut a = a.abs();
        let mut b = b.abs();
        while !b.is_zero() {
            let r = &a % &b;
            a = b;
            b = r;
        }
        a
    }

    pub fn div_rem_big(a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
        (a / b, a % b)
    }
}

type RatPoly = Vec<BigRational>;

fn to_rational(p: &IntPoly) -> RatPoly {
    p.coeffs
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect()
}

fn from_rational(p: &RatPoly) -> IntPoly {
    // clear denominators
    let mut lcm = BigInt::one();
    for c in p {
        let d = c.denom();
        let g = num_integer::gcd_big(&lcm, d);
        lcm = &lcm / &g * d;
    }
    IntPoly::new(
        p.iter()
            .map(|c| {
                let scaled = c * BigRational::from_integer(lcm.clone());
                debug_assert!(scaled.is_integer());
                scaled.to_integer()
            })
            .collect(),
    )
}

fn rat_trim(p: &mut RatPoly) {
    while p.last().map_or(false, Zero::is_zero) {
        p.pop();
    }
}

fn rat_rem(a: &RatPoly, b: &RatPoly) -> RatPoly {
    let mut r = a.clone();
    rat_trim(&mut r);
    let db = b.len() - 1;
    let lead = b.last().unwrap().clone();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let factor = r.last().unwrap() / &lead;
        for j in 0..=db {
            let t = &b[j] * &factor;
            r[dr - db + j] -= t;
        }
        rat_trim(&mut r);
        if r.len() <= db {
            break;
        }
    }
    r
}

fn rat_eval(p: &RatPoly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Euler's totient.
pub fn euler_phi(d: u64) -> u64 {
    let mut n = d;
    let mut result = d;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if n > 1 {
        result -= result / n;
    }
    result
}

/// The d-th cyclotomic polynomial, computed by exact division of x^d - 1
/// by the cyclotomic polynomials of the proper divisors of d.
pub fn cyclotomic(d: u64) -> IntPoly {
    assert!(d >= 1);
    let mut xd_minus_1 = IntPoly::monomial(d as usize);
    xd_minus_1.coeffs[0] = BigInt::from(-1);
    let mut quot = xd_minus_1;
    for e in 1..d {
        if d % e == 0 {
            quot = quot
                .div_exact(&cyclotomic(e))
                .expect("cyclotomic division is exact");
        }
    }
    quot
}

/// All d whose primitive d-th roots of unity have degree phi(d) <= n.
pub fn cyclotomic_orders_up_to_degree(n: usize) -> Vec<u64> {
    // phi(d) >= sqrt(d/2), so d <= 2 n^2 suffices
    let bound = 2 * (n as u64) * (n as u64) + 1;
    (1..=bound).filter(|&d| euler_phi(d) <= n as u64).collect()
}

/// Number of distinct real roots of `p` in the open interval (lo, hi),
/// by a Sturm chain over the rationals. `p` need not be squarefree.
pub fn count_real_roots_in(p: &IntPoly, lo: &BigRational, hi: &BigRational) -> usize {
    let sf = p.squarefree_part();
    if sf.degree() == 0 {
        return 0;
    }
    let mut chain: Vec<RatPoly> = vec![to_rational(&sf), to_rational(&sf.derivative())];
    loop {
        let last = &chain[chain.len() - 1];
        if last.is_empty() {
            chain.pop();
            break;
        }
        if last.len() == 1 {
            break;
        }
        let prev = &chain[chain.len() - 2];
        let mut r = rat_rem(prev, last);
        for c in r.iter_mut() {
            *c = -c.clone();
        }
        chain.push(r);
    }
    let sign_changes = |x: &BigRational| -> usize {
        let mut changes = 0;
        let mut last_sign = 0i8;
        for q in &chain {
            let v = rat_eval(q, x);
            let s = if v.is_zero() {
                0
            } else if v.numer().is_negative() {
                -1
            } else {
                1
            };
            if s != 0 {
                if last_sign != 0 && s != last_sign {
                    changes += 1;
                }
                last_sign = s;
            }
        }
        changes
    };
    sign_changes(lo).saturating_sub(sign_changes(hi))
}

/// Exact decision: does `p` (integer polynomial with nonzero constant term)
/// have a root on the complex unit circle?
///
/// Any unit-circle root of `p` is shared with its reciprocal, so it is a
/// root of g = gcd(p, rec(p)). The gcd's root set is inversion-closed, so
/// after stripping roots at +-1 it is palindromic of even degree 2s and can
/// be written x^s q(x + 1/x); roots on the circle correspond exactly to
/// real roots of q in (-2, 2), counted by a Sturm chain.
pub fn has_unit_circle_root(p: &IntPoly) -> bool {
    assert!(
        !p.coeffs.is_empty() && !p.coeffs[0].is_zero(),
        "polynomial must have nonzero constant term"
    );
    let g = p.gcd(&p.reciprocal());
    if g.degree() == 0 {
        return false;
    }
    let x_minus_1 = IntPoly::from_i64(&[-1, 1]);
    let x_plus_1 = IntPoly::from_i64(&[1, 1]);
    if g.div_exact(&x_minus_1).is_some() || g.div_exact(&x_plus_1).is_some() {
        // +-1 is itself a root of p on the circle
        return true;
    }
    // g is now palindromic of even degree 2s with g(+-1) != 0
    let deg = g.degree();
    debug_assert_eq!(deg % 2, 0, "inversion-closed factor without +-1 roots");
    let s = deg / 2;
    debug_assert_eq!(g, g.reciprocal(), "factor must be palindromic");
    // q(y) with g(x) = x^s q(x + 1/x), via v_j(y) = x^j + x^-j
    let mut q = IntPoly::new(vec![g.coeffs[s].clone()]);
    let mut v_prev = IntPoly::from_i64(&[2]); // v_0
    let mut v_cur = IntPoly::monomial(1); // v_1 = y
    for j in 1..=s {
        q = q.add(&v_cur.scale(&g.coeffs[s + j]));
        let next = v_cur.mul(&IntPoly::monomial(1)).sub(&v_prev);
        v_prev = std::mem::replace(&mut v_cur, next);
    }
    let two = BigRational::from_integer(BigInt::from(2));
    count_real_roots_in(&q, &(-two.clone()), &two) > 0
}
