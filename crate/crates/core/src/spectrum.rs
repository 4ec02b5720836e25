//! Lyapunov functionals, invariant splitting, Weyl chambers and coarse
//! Lyapunov subspaces of an abelian linear action, plus the quantities
//! S(a) and sigma that drive the lattice-separation estimates.
//!
//! The splitting is obtained from one exactly-squarefree element of the
//! action when such an element exists in a small search box (generic case;
//! its eigenlines are automatically invariant under everything that
//! commutes with it). Otherwise a generalized-eigenspace refinement runs
//! per generator, which also covers Jordan structure and zero exponents.

use crate::actions::{ergodic_lattice_check, AbelianLinearAction, ActionError, LatticeErgodicity};
use crate::eig::{complex_kernel_vector, eigenvalue_on_line, poly_roots};
use nalgebra::{Complex, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("spectral degeneracy: {0}")]
    Degeneracy(String),
}

/// One Lyapunov exponent of the action together with its joint invariant
/// subspace in real canonical form (conjugate eigenpairs merged into
/// 2-dimensional blocks, equal exponents merged into one functional).
#[derive(Clone, Debug)]
pub struct LyapunovFunctional {
    /// lambda(e_j) at the k generators; lambda(a) = <coefficients, a>.
    pub coefficients: Vec<f64>,
    pub multiplicity: usize,
    /// n x multiplicity real basis of the invariant subspace.
    pub subspace_basis: DMatrix<f64>,
    /// Set when some generator has nontrivial Jordan structure here, in
    /// which case norms grow polynomially on top of the exponential rate.
    pub polynomial_growth: bool,
}

impl LyapunovFunctional {
    pub fn eval(&self, a: &[f64]) -> f64 {
        self.coefficients.iter().zip(a).map(|(c, x)| c * x).sum()
    }
}

/// A Weyl chamber, identified by its sign vector over the deduplicated
/// hyperplane list, with one explicit interior direction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Chamber {
    pub signs: Vec<i8>,
    pub witness: Vec<f64>,
}

/// Coarse Lyapunov class: all functionals positively proportional to one
/// another, with the aggregated invariant subspace and the oriented normal
/// of the shared kernel (functionals are positive where <normal, a> > 0).
#[derive(Clone, Debug)]
pub struct CoarseClass {
    pub functional_indices: Vec<usize>,
    pub basis: DMatrix<f64>,
    pub oriented_normal: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SpectralData {
    pub dim: usize,
    pub rank: usize,
    pub functionals: Vec<LyapunovFunctional>,
    /// Unit normals of the distinct Lyapunov hyperplanes (canonical sign:
    /// first nonzero component positive).
    pub hyperplanes: Vec<Vec<f64>>,
    pub chambers: Vec<Chamber>,
    pub coarse_classes: Vec<CoarseClass>,
    /// Zero functionals or failed separations; `None` for clean spectra.
    pub degeneracy: Option<String>,
    pub ergodicity: LatticeErgodicity,
}

const WALL_TOL: f64 = 1e-9;
const MERGE_TOL: f64 = 1e-8;

/// Computes the full spectral data of the action.
///
/// `prop_tol` is the angle threshold for grouping positively proportional
/// functionals into coarse classes; borderline angles are additionally
/// accepted when the exponent vectors are multiplicatively dependent over
/// small integer exponents, which guards against log-of-algebraic-number
/// rounding.
pub fn compute_spectrum(
    action: &AbelianLinearAction,
    prop_tol: f64,
) -> Result<SpectralData, SpectrumError> {
    let n = action.dim();
    let k = action.rank();
    let blocks = joint_invariant_splitting(action)?;

    // merge blocks with equal exponent vectors into functionals
    let mut functionals: Vec<LyapunovFunctional> = Vec::new();
    for b in blocks {
        let scale = 1.0 + b.coefficients.iter().map(|c| c.abs()).fold(0.0, f64::max);
        if let Some(existing) = functionals.iter_mut().find(|f| {
            f.coefficients
                .iter()
                .zip(&b.coefficients)
                .all(|(x, y)| (x - y).abs() < MERGE_TOL * scale)
        }) {
            let merged = hstack(&existing.subspace_basis, &b.subspace_basis);
            existing.subspace_basis = merged;
            existing.multiplicity += b.multiplicity;
            existing.polynomial_growth |= b.polynomial_growth;
        } else {
            functionals.push(LyapunovFunctional {
                coefficients: b.coefficients,
                multiplicity: b.multiplicity,
                subspace_basis: b.subspace_basis,
                polynomial_growth: b.polynomial_growth,
            });
        }
    }

    let mut degeneracy = None;
    if functionals
        .iter()
        .any(|f| f.coefficients.iter().all(|c| c.abs() < WALL_TOL))
    {
        degeneracy = Some(
            "zero Lyapunov functional present (non-hyperbolic directions)".to_string(),
        );
    }

    // distinct hyperplanes (canonical-sign unit normals)
    let mut hyperplanes: Vec<Vec<f64>> = Vec::new();
    for f in &functionals {
        let norm = f.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm < WALL_TOL {
            continue;
        }
        let mut unit: Vec<f64> = f.coefficients.iter().map(|c| c / norm).collect();
        if let Some(first) = unit.iter().find(|c| c.abs() > 1e-12) {
            if *first < 0.0 {
                unit.iter_mut().for_each(|c| *c = -*c);
            }
        }
        let dup = hyperplanes.iter().any(|h| {
            h.iter()
                .zip(&unit)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
                < 1e-9
        });
        if !dup {
            hyperplanes.push(unit);
        }
    }

    let chambers = enumerate_chambers(k, &hyperplanes);

    // coarse classes by positive proportionality
    let mut classes: Vec<CoarseClass> = Vec::new();
    let mut assigned = vec![false; functionals.len()];
    for i in 0..functionals.len() {
        if assigned[i] || is_zero_functional(&functionals[i]) {
            continue;
        }
        let mut members = vec![i];
        assigned[i] = true;
        for j in i + 1..functionals.len() {
            if assigned[j] || is_zero_functional(&functionals[j]) {
                continue;
            }
            if positively_proportional(
                &functionals[i].coefficients,
                &functionals[j].coefficients,
                prop_tol,
            ) {
                members.push(j);
                assigned[j] = true;
            }
        }
        let mut basis = functionals[members[0]].subspace_basis.clone();
        for &m in &members[1..] {
            basis = hstack(&basis, &functionals[m].subspace_basis);
        }
        let c = &functionals[members[0]].coefficients;
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        classes.push(CoarseClass {
            functional_indices: members,
            basis,
            oriented_normal: c.iter().map(|x| x / norm).collect(),
        });
    }

    let ergodicity = ergodic_lattice_check(action, 2)?;

    Ok(SpectralData {
        dim: n,
        rank: k,
        functionals,
        hyperplanes,
        chambers,
        coarse_classes: classes,
        degeneracy,
        ergodicity,
    })
}

fn is_zero_functional(f: &LyapunovFunctional) -> bool {
    f.coefficients.iter().all(|c| c.abs() < WALL_TOL)
}

/// Positive proportionality test with the multiplicative-dependence guard.
pub fn positively_proportional(ci: &[f64], cj: &[f64], prop_tol: f64) -> bool {
    let ni = ci.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nj = cj.iter().map(|x| x * x).sum::<f64>().sqrt();
    if ni < WALL_TOL || nj < WALL_TOL {
        return false;
    }
    let dot: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
    if dot <= 0.0 {
        return false;
    }
    let cos = (dot / (ni * nj)).clamp(-1.0, 1.0);
    let angle = cos.acos();
    angle < prop_tol || (angle < 1e-6 && multiplicative_dependence(ci, cj, 8).is_some())
}

/// Searches for small positive integers (p, q), at most `max_exp`, with
/// q*ci = p*cj to within 1e-10; returns the first hit.
pub fn multiplicative_dependence(ci: &[f64], cj: &[f64], max_exp: u32) -> Option<(u32, u32)> {
    let scale = ci
        .iter()
        .chain(cj)
        .map(|c| c.abs())
        .fold(0.0, f64::max)
        .max(1.0);
    for q in 1..=max_exp {
        for p in 1..=max_exp {
            let ok = ci
                .iter()
                .zip(cj)
                .all(|(a, b)| (q as f64 * a - p as f64 * b).abs() < 1e-10 * scale * (p + q) as f64);
            if ok {
                return Some((p, q));
            }
        }
    }
    None
}

// ---------------------------------------------------------------------------
// invariant splitting

struct Block {
    coefficients: Vec<f64>,
    multiplicity: usize,
    subspace_basis: DMatrix<f64>,
    polynomial_growth: bool,
}

/// Search box for an exactly-squarefree element used to split R^n.
fn squarefree_candidates(k: usize) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = Vec::new();
    for radius in 1..=3i64 {
        let mut a = vec![-radius; k];
        loop {
            if a.iter().any(|&x| x != 0) && a.iter().all(|&x| x.abs() <= radius) {
                if !out.contains(&a) {
                    out.push(a.clone());
                }
            }
            let mut i = 0;
            loop {
                if i == k {
                    break;
                }
                if a[i] < radius {
                    a[i] += 1;
                    break;
                }
                a[i] = -radius;
                i += 1;
            }
            if i == k {
                break;
            }
        }
    }
    out.sort_by_key(|a| (a.iter().map(|x| x.abs()).sum::<i64>(), a.clone()));
    out
}

fn joint_invariant_splitting(action: &AbelianLinearAction) -> Result<Vec<Block>, SpectrumError> {
    for cand in squarefree_candidates(action.rank()) {
        let g = action.element(&cand)?;
        let p = g.char_poly();
        if !p.is_squarefree() {
            continue;
        }
        return splitting_from_squarefree_element(action, &g.to_f64(), &p);
    }
    refinement_splitting(action)
}

fn splitting_from_squarefree_element(
    action: &AbelianLinearAction,
    g: &DMatrix<f64>,
    char_poly: &crate::poly::IntPoly,
) -> Result<Vec<Block>, SpectrumError> {
    let n = action.dim();
    let roots = poly_roots(char_poly);
    let gens: Vec<DMatrix<f64>> = action.generators().iter().map(|m| m.to_f64()).collect();
    let mut used = vec![false; roots.len()];
    let mut blocks = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let mu = roots[i];
        let real_root = mu.im.abs() < 1e-9 * (1.0 + mu.re.abs());
        let gc = g.map(|x| Complex::new(x, 0.0));
        let shifted = &gc - DMatrix::from_diagonal_element(n, n, Complex::new(mu.re, mu.im));
        let v = complex_kernel_vector(&shifted).ok_or_else(|| {
            SpectrumError::Degeneracy(format!(
                "no kernel vector found for eigenvalue {mu} of the splitting element"
            ))
        })?;
        let coefficients: Vec<f64> = gens
            .iter()
            .map(|a| eigenvalue_on_line(a, &v).norm().ln())
            .collect();
        used[i] = true;
        if real_root {
            blocks.push(Block {
                coefficients,
                multiplicity: 1,
                subspace_basis: real_line_basis(&v),
                polynomial_growth: false,
            });
        } else {
            // consume the conjugate partner
            let conj_idx = (0..roots.len()).filter(|&j| !used[j]).min_by(|&a, &b| {
                (roots[a] - mu.conj())
                    .norm()
                    .total_cmp(&(roots[b] - mu.conj()).norm())
            });
            if let Some(j) = conj_idx {
                used[j] = true;
            }
            blocks.push(Block {
                coefficients,
                multiplicity: 2,
                subspace_basis: real_plane_basis(&v),
                polynomial_growth: false,
            });
        }
    }
    Ok(blocks)
}

fn real_line_basis(v: &DVector<Complex<f64>>) -> DMatrix<f64> {
    // rotate the phase so the vector is as real as possible
    let mut best = 0usize;
    for i in 0..v.len() {
        if v[i].norm() > v[best].norm() {
            best = i;
        }
    }
    let phase = v[best] / Complex::new(v[best].norm(), 0.0);
    let rotated = v.map(|x| x / phase);
    let col: Vec<f64> = rotated.iter().map(|x| x.re).collect();
    let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
    DMatrix::from_iterator(v.len(), 1, col.into_iter().map(|x| x / norm))
}

fn real_plane_basis(v: &DVector<Complex<f64>>) -> DMatrix<f64> {
    let re: Vec<f64> = v.iter().map(|x| x.re).collect();
    let im: Vec<f64> = v.iter().map(|x| x.im).collect();
    let m = DMatrix::from_iterator(v.len(), 2, re.into_iter().chain(im));
    orthonormal_columns(&m)
}

/// Fallback: refine R^n by generalized eigenspaces generator by generator.
fn refinement_splitting(action: &AbelianLinearAction) -> Result<Vec<Block>, SpectrumError> {
    let n = action.dim();
    let gens: Vec<DMatrix<f64>> = action.generators().iter().map(|m| m.to_f64()).collect();
    let mut bases: Vec<DMatrix<f64>> = vec![DMatrix::identity(n, n)];
    for a in &gens {
        let mut next = Vec::new();
        for basis in &bases {
            next.extend(split_by_generalized_eigenspaces(a, basis)?);
        }
        bases = next;
    }
    let mut blocks = Vec::new();
    for basis in bases {
        let mut coefficients = Vec::with_capacity(gens.len());
        let mut poly_growth = false;
        for a in &gens {
            let r = restrict(a, &basis);
            let eigs = r.complex_eigenvalues();
            let moduli: Vec<f64> = eigs.iter().map(|z| z.norm()).collect();
            let mean = moduli.iter().sum::<f64>() / moduli.len() as f64;
            if moduli.iter().any(|m| (m - mean).abs() > 1e-6 * mean.max(1.0)) {
                return Err(SpectrumError::Degeneracy(
                    "distinct eigenvalue moduli could not be separated inside one block"
                        .to_string(),
                ));
            }
            coefficients.push(mean.ln());
            // Jordan structure: any eigenvalue whose geometric multiplicity
            // falls short of its algebraic one
            poly_growth |= has_jordan_structure(&r, &eigs);
        }
        let mult = basis.ncols();
        blocks.push(Block {
            coefficients,
            multiplicity: mult,
            subspace_basis: basis,
            polynomial_growth: poly_growth,
        });
    }
    Ok(blocks)
}

fn split_by_generalized_eigenspaces(
    a: &DMatrix<f64>,
    basis: &DMatrix<f64>,
) -> Result<Vec<DMatrix<f64>>, SpectrumError> {
    let d = basis.ncols();
    if d == 1 {
        return Ok(vec![basis.clone()]);
    }
    let r = restrict(a, basis);
    let eigs = r.complex_eigenvalues();
    // cluster eigenvalues, conjugate-closed
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    for z in eigs.iter() {
        let z = Complex64::new(z.re, z.im.abs());
        if let Some(c) = clusters.iter_mut().find(|(w, _)| (*w - z).norm() < 1e-7) {
            c.1 += 1;
        } else {
            clusters.push((z, 1));
        }
    }
    if clusters.len() == 1 {
        return Ok(vec![basis.clone()]);
    }
    let mut parts = Vec::new();
    for (z, count) in clusters {
        // real factor of the minimal polynomial for this cluster
        let factor = if z.im.abs() < 1e-9 {
            r.clone() - DMatrix::identity(d, d) * z.re
        } else {
            &r * &r - &r * (2.0 * z.re) + DMatrix::identity(d, d) * z.norm_sqr()
        };
        let mut power = DMatrix::identity(d, d);
        for _ in 0..count {
            power = &power * &factor;
        }
        let kernel = nullspace(&power, 1e-9);
        if kernel.ncols() == 0 {
            return Err(SpectrumError::Degeneracy(
                "empty generalized eigenspace in refinement".to_string(),
            ));
        }
        parts.push(basis * kernel);
    }
    Ok(parts)
}

fn has_jordan_structure(r: &DMatrix<f64>, eigs: &DVector<Complex<f64>>) -> bool {
    let d = r.nrows();
    let mut seen: Vec<(Complex64, usize)> = Vec::new();
    for z in eigs.iter() {
        let z64 = Complex64::new(z.re, z.im);
        if let Some(c) = seen.iter_mut().find(|(w, _)| (*w - z64).norm() < 1e-7) {
            c.1 += 1;
        } else {
            seen.push((z64, 1));
        }
    }
    for (z, alg_mult) in seen {
        if alg_mult < 2 {
            continue;
        }
        let shifted = r.map(|x| Complex::new(x, 0.0))
            - DMatrix::from_diagonal_element(d, d, Complex::new(z.re, z.im));
        let svd = shifted.svd(false, false);
        let geo = svd
            .singular_values
            .iter()
            .filter(|s| **s < 1e-8 * svd.singular_values.max())
            .count();
        if geo < alg_mult {
            return true;
        }
    }
    false
}

// ---------------------------------------------------------------------------
// chamber enumeration

/// Chambers of the central hyperplane arrangement. Exact by angular sweep
/// for rank <= 2 (all arrangements are fans of sectors); deterministic
/// dense direction sampling for higher rank, which is the same robustness
/// class as the sign-pattern oracle the data is checked against.
fn enumerate_chambers(k: usize, hyperplanes: &[Vec<f64>]) -> Vec<Chamber> {
    if hyperplanes.is_empty() {
        return Vec::new();
    }
    let sign_vector = |dir: &[f64]| -> Option<Vec<i8>> {
        let mut signs = Vec::with_capacity(hyperplanes.len());
        for h in hyperplanes {
            let v: f64 = h.iter().zip(dir).map(|(a, b)| a * b).sum();
            if v.abs() < WALL_TOL {
                return None;
            }
            signs.push(if v > 0.0 { 1 } else { -1 });
        }
        Some(signs)
    };
    let mut chambers: Vec<Chamber> = Vec::new();
    let mut push = |dir: Vec<f64>| {
        if let Some(signs) = sign_vector(&dir) {
            if !chambers.iter().any(|c| c.signs == signs) {
                chambers.push(Chamber { signs, witness: dir });
            }
        }
    };
    match k {
        1 => {
            push(vec![1.0]);
            push(vec![-1.0]);
        }
        2 => {
            // wall directions, as angles mod pi
            let mut wall_angles: Vec<f64> = hyperplanes
                .iter()
                .map(|h| {
                    let mut t = (-h[0]).atan2(h[1]); // direction orthogonal to normal
                    if t < 0.0 {
                        t += std::f64::consts::PI;
                    }
                    t % std::f64::consts::PI
                })
                .collect();
            wall_angles.sort_by(f64::total_cmp);
            let mut rays: Vec<f64> = wall_angles
                .iter()
                .flat_map(|&t| [t, t + std::f64::consts::PI])
                .collect();
            rays.sort_by(f64::total_cmp);
            for w in rays.windows(2) {
                let mid = 0.5 * (w[0] + w[1]);
                push(vec![mid.cos(), mid.sin()]);
            }
            let wrap = 0.5 * (rays[rays.len() - 1] + rays[0] + 2.0 * std::f64::consts::PI);
            push(vec![wrap.cos(), wrap.sin()]);
        }
        _ => {
            for dir in sphere_directions(k, 40_000) {
                push(dir);
            }
        }
    }
    chambers.sort_by(|a, b| a.signs.cmp(&b.signs));
    chambers
}

/// Deterministic low-discrepancy directions on the unit sphere in R^k
/// (Halton points pushed through a Gaussian-free Box-Muller-style map
/// would need randomness; instead we take a Kronecker lattice on the cube
/// and normalize, which is deterministic and uniform enough for witnesses).
pub fn sphere_directions(k: usize, count: usize) -> Vec<Vec<f64>> {
    let primes = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29];
    let mut out = Vec::with_capacity(count);
    for i in 1..=count {
        let mut dir = Vec::with_capacity(k);
        for (j, &p) in primes.iter().take(k).enumerate() {
            let u = halton(i as u64 + 7 * j as u64, p);
            dir.push(2.0 * u - 1.0);
        }
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 {
            out.push(dir.into_iter().map(|x| x / norm).collect());
        }
    }
    out
}

fn halton(mut index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}

// ---------------------------------------------------------------------------
// S(a), sigma, chamber witnesses in the lattice

/// S(a) = max over functionals of lambda(a).
pub fn s_of(spec: &SpectralData, a: &[f64]) -> f64 {
    spec.functionals
        .iter()
        .map(|f| f.eval(a))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SigmaResult {
    pub value: f64,
    pub minimizer: Vec<f64>,
    pub warning: Option<String>,
}

/// sigma = 1/2 min over the unit sphere of S, computed exactly over the
/// stationary candidates of the piecewise-linear max: for every subset T
/// of functionals, the minimizer of the common linear value on the
/// equal-value subspace of T restricted to the sphere is -P c / ||P c||
/// (P the orthogonal projector onto that subspace). The true minimizer is
/// such a candidate for T = its active set, so the minimum over candidates
/// is exact up to floating point.
pub fn sigma(spec: &SpectralData) -> SigmaResult {
    let k = spec.rank;
    let m = spec.functionals.len();
    let mut best = f64::INFINITY;
    let mut best_dir = vec![0.0; k];
    let mut consider = |dir: &[f64]| {
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return;
        }
        let unit: Vec<f64> = dir.iter().map(|x| x / norm).collect();
        let v = s_of(spec, &unit);
        if v < best {
            best = v;
            best_dir = unit;
        }
    };
    for mask in 1u32..(1u32 << m.min(20)) {
        let members: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let c0 = DVector::from_column_slice(&spec.functionals[members[0]].coefficients);
        let subspace = if members.len() == 1 {
            DMatrix::identity(k, k)
        } else {
            let rows = members.len() - 1;
            let mut diff = DMatrix::zeros(rows, k);
            for (r, &i) in members[1..].iter().enumerate() {
                for j in 0..k {
                    diff[(r, j)] = spec.functionals[i].coefficients[j]
                        - spec.functionals[members[0]].coefficients[j];
                }
            }
            nullspace(&diff, 1e-10)
        };
        if subspace.ncols() == 0 {
            continue;
        }
        let proj = &subspace * (subspace.transpose() * &c0);
        if proj.norm() > 1e-12 {
            // when the subspace is a line its unit sphere is two antipodal
            // points and both are local minima of the restricted value
            let dir: Vec<f64> = (-&proj).iter().copied().collect();
            consider(&dir);
            let opp: Vec<f64> = proj.iter().copied().collect();
            consider(&opp);
        } else {
            for col in 0..subspace.ncols() {
                let dir: Vec<f64> = subspace.column(col).iter().copied().collect();
                consider(&dir);
                let neg: Vec<f64> = dir.iter().map(|x| -x).collect();
                consider(&neg);
            }
        }
    }
    let value = 0.5 * best;
    let mut warning = None;
    if !spec.ergodicity.all_ergodic {
        warning = Some(format!(
            "ergodicity fails at {:?}; the positivity lemma for sigma is void",
            spec.ergodicity.first_failure
        ));
    } else if value <= 1e-12 {
        warning = Some("sigma is not strictly positive at working precision".to_string());
    }
    SigmaResult {
        value,
        minimizer: best_dir,
        warning,
    }
}

/// Dense-sampling estimate of sigma used as an independent cross-check:
/// a uniform scan of the sphere followed (in rank 2) by golden-section
/// refinement of the best bracket, so the sampled minimum converges to the
/// true one rather than stopping at grid resolution.
pub fn sigma_sampled(spec: &SpectralData, samples: usize) -> f64 {
    match spec.rank {
        1 => 0.5 * s_of(spec, &[1.0]).min(s_of(spec, &[-1.0])),
        2 => {
            let s_at = |t: f64| s_of(spec, &[t.cos(), t.sin()]);
            let step = 2.0 * std::f64::consts::PI / samples as f64;
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..samples {
                let t = step * i as f64;
                let v = s_at(t);
                if v < best.0 {
                    best = (v, t);
                }
            }
            // golden-section descent on the winning bracket
            let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
            let (mut lo, mut hi) = (best.1 - step, best.1 + step);
            let (mut x1, mut x2) = (hi - inv_phi * (hi - lo), lo + inv_phi * (hi - lo));
            let (mut f1, mut f2) = (s_at(x1), s_at(x2));
            for _ in 0..90 {
                if f1 < f2 {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - inv_phi * (hi - lo);
                    f1 = s_at(x1);
                } else {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + inv_phi * (hi - lo);
                    f2 = s_at(x2);
                }
            }
            0.5 * f1.min(f2).min(best.0)
        }
        _ => {
            0.5 * sphere_directions(spec.rank, samples)
                .iter()
                .map(|d| s_of(spec, d))
                .fold(f64::INFINITY, f64::min)
        }
    }
}

/// All lattice points with ||a||_inf <= radius lying strictly inside each
/// chamber, in the chamber order of `spec.chambers`. Empty lists flag a
/// radius too small for that chamber.
pub fn anosov_elements_per_chamber(spec: &SpectralData, radius: i64) -> Vec<Vec<Vec<i64>>> {
    let k = spec.rank;
    let mut result: Vec<Vec<Vec<i64>>> = vec![Vec::new(); spec.chambers.len()];
    if radius <= 0 || spec.chambers.is_empty() {
        return result;
    }
    let mut a = vec![-radius; k];
    loop {
        if a.iter().any(|&x| x != 0) {
            let af: Vec<f64> = a.iter().map(|&x| x as f64).collect();
            let scale = af.iter().map(|x| x * x).sum::<f64>().sqrt();
            let regular = spec
                .functionals
                .iter()
                .all(|f| is_zero_functional(f) || f.eval(&af).abs() > WALL_TOL * scale);
            if regular {
                let signs: Vec<i8> = spec
                    .hyperplanes
                    .iter()
                    .map(|h| {
                        let v: f64 = h.iter().zip(&af).map(|(x, y)| x * y).sum();
                        if v > 0.0 {
                            1
                        } else {
                            -1
                        }
                    })
                    .collect();
                if let Some(idx) = spec.chambers.iter().position(|c| c.signs == signs) {
                    result[idx].push(a.clone());
                }
            }
        }
        let mut i = 0;
        loop {
            if i == k {
                return result;
            }
            if a[i] < radius {
                a[i] += 1;
                break;
            }
            a[i] = -radius;
            i += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// small dense linear algebra helpers

pub(crate) fn hstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    out.view_mut((0, a.ncols()), (b.nrows(), b.ncols()))
        .copy_from(b);
    out
}

pub(crate) fn orthonormal_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let q = qr.q();
    q.columns(0, m.ncols().min(q.ncols())).into_owned()
}

/// Orthonormal basis of the (right) nullspace of `m`, singular values below
/// `tol * sigma_max` treated as zero.
pub(crate) fn nullspace(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    // pad wide matrices with zero rows so the full V factor is available
    let m = if m.nrows() < m.ncols() {
        let mut padded = DMatrix::zeros(m.ncols(), m.ncols());
        padded.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = m.clone().svd(false, true);
    let vt = svd.v_t.expect("svd with v requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols = m.ncols();
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > tol * smax.max(1.0))
        .count();
    let null_dim = cols - rank;
    let mut out = DMatrix::zeros(cols, null_dim);
    for i in 0..null_dim {
        // rows of vt beyond the rank span the nullspace; vt may have fewer
        // rows than cols when m is wide-deficient, handled by svd sizing
        let row = rank + i;
        for j in 0..cols {
            out[(j, i)] = vt[(row, j)];
        }
    }
    out
}

/// Restriction of `a` to the column span of `basis` in basis coordinates,
/// by least squares.
pub(crate) fn restrict(a: &DMatrix<f64>, basis: &DMatrix<f64>) -> DMatrix<f64> {
    let ab = a * basis;
    let gram = basis.transpose() * basis;
    let rhs = basis.transpose() * ab;
    gram.lu().solve(&rhs).expect("basis has full column rank")
}

/// Largest principal-angle sine between A*span(basis) and span(basis);
/// zero for exactly invariant subspaces.
pub fn invariance_defect(a: &DMatrix<f64>, basis: &DMatrix<f64>) -> f64 {
    let q = orthonormal_columns(basis);
    let t = a * &q;
    let residual = &t - &q * (q.transpose() * &t);
    let tn = t.norm();
    if tn == 0.0 {
        0.0
    } else {
        residual.norm() / tn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{cat_map, rank2_cartan_action, AbelianLinearAction, IntegerMatrix};
    use approx::assert_abs_diff_eq;

    fn cat_action() -> AbelianLinearAction {
        AbelianLinearAction::new(vec![cat_map()]).unwrap()
    }

    #[test]
    fn cat_map_spectrum() {
        let spec = compute_spectrum(&cat_action(), 1e-9).unwrap();
        assert_eq!(spec.functionals.len(), 2);
        let golden = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        let mut coeffs: Vec<f64> = spec.functionals.iter().map(|f| f.coefficients[0]).collect();
        coeffs.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(coeffs[0], -golden, epsilon = 1e-12);
        assert_abs_diff_eq!(coeffs[1], golden, epsilon = 1e-12);
        assert_eq!(spec.hyperplanes.len(), 1);
        assert_eq!(spec.chambers.len(), 2);
        assert_eq!(spec.coarse_classes.len(), 2);
        assert!(spec.degeneracy.is_none());
    }

    #[test]
    fn identity_action_is_degenerate() {
        let action = AbelianLinearAction::new(vec![IntegerMatrix::identity(2)]).unwrap();
        let spec = compute_spectrum(&action, 1e-9).unwrap();
        assert_eq!(spec.functionals.len(), 1);
        assert_eq!(spec.functionals[0].multiplicity, 2);
        assert!(spec.functionals[0].coefficients[0].abs() < 1e-12);
        assert!(spec.hyperplanes.is_empty());
        assert!(spec.degeneracy.is_some());
    }

    #[test]
    fn rank2_action_has_six_chambers() {
        let spec = compute_spectrum(&rank2_cartan_action(), 1e-9).unwrap();
        assert_eq!(spec.functionals.len(), 3);
        assert_eq!(spec.hyperplanes.len(), 3);
        assert_eq!(spec.chambers.len(), 6);
        assert_eq!(spec.coarse_classes.len(), 3);
        // volume preservation: exponents sum to zero at each generator
        for j in 0..2 {
            let total: f64 = spec
                .functionals
                .iter()
                .map(|f| f.multiplicity as f64 * f.coefficients[j])
                .sum();
            assert!(total.abs() < 1e-10, "generator {j}: sum {total}");
        }
    }

    #[test]
    fn chamber_count_matches_brute_force_sampling() {
        let spec = compute_spectrum(&rank2_cartan_action(), 1e-9).unwrap();
        let mut seen: Vec<Vec<i8>> = Vec::new();
        for i in 0..10_000 {
            let t = 2.0 * std::f64::consts::PI * (i as f64) / 10_000.0;
            let dir = [t.cos(), t.sin()];
            let mut signs = Vec::new();
            let mut on_wall = false;
            for h in &spec.hyperplanes {
                let v = h[0] * dir[0] + h[1] * dir[1];
                if v.abs() < 1e-9 {
                    on_wall = true;
                    break;
                }
                signs.push(if v > 0.0 { 1i8 } else { -1 });
            }
            if !on_wall && !seen.contains(&signs) {
                seen.push(signs);
            }
        }
        assert_eq!(seen.len(), spec.chambers.len());
    }

    #[test]
    fn coarse_subspaces_are_invariant() {
        let action = rank2_cartan_action();
        let spec = compute_spectrum(&action, 1e-9).unwrap();
        for class in &spec.coarse_classes {
            for g in action.generators() {
                assert!(invariance_defect(&g.to_f64(), &class.basis) < 1e-10);
            }
        }
    }

    #[test]
    fn s_of_examples() {
        let spec = compute_spectrum(&cat_action(), 1e-9).unwrap();
        let golden = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        assert_abs_diff_eq!(s_of(&spec, &[1.0]), golden, epsilon = 1e-12);
        assert_abs_diff_eq!(s_of(&spec, &[0.0]), 0.0, epsilon = 1e-15);
        // homogeneity
        let a = [0.7];
        assert_abs_diff_eq!(s_of(&spec, &[1.4]), 2.0 * s_of(&spec, &a), epsilon = 1e-12);
    }

    #[test]
    fn sigma_cat_map_is_half_log_golden() {
        let spec = compute_spectrum(&cat_action(), 1e-9).unwrap();
        let res = sigma(&spec);
        let golden = ((3.0 + 5.0f64.sqrt()) / 2.0).ln();
        assert_abs_diff_eq!(res.value, 0.5 * golden, epsilon = 1e-12);
        assert!(res.warning.is_none());
    }

    #[test]
    fn sigma_exact_matches_dense_sampling() {
        for action in [cat_action(), rank2_cartan_action()] {
            let spec = compute_spectrum(&action, 1e-9).unwrap();
            let exact = sigma(&spec).value;
            let sampled = sigma_sampled(&spec, 10_000);
            assert!(exact > 0.0);
            assert!(
                (exact - sampled).abs() < 1e-6,
                "exact {exact} vs sampled {sampled}"
            );
            // sampling can only overshoot the true minimum
            assert!(sampled + 1e-12 >= exact);
        }
    }

    #[test]
    fn sigma_warns_on_non_ergodic_action() {
        let rot = IntegerMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        let action = AbelianLinearAction::new(vec![rot]).unwrap();
        let spec = compute_spectrum(&action, 1e-9).unwrap();
        let res = sigma(&spec);
        assert!(res.warning.is_some());
        assert!(res.value.abs() < 1e-12);
    }

    #[test]
    fn chamber_witnesses_for_cat_map() {
        let spec = compute_spectrum(&cat_action(), 1e-9).unwrap();
        let per_chamber = anosov_elements_per_chamber(&spec, 1);
        assert_eq!(per_chamber.len(), 2);
        let mut all: Vec<Vec<i64>> = per_chamber.into_iter().flatten().collect();
        all.sort();
        assert_eq!(all, vec![vec![-1], vec![1]]);
        // radius 0: everything empty
        assert!(anosov_elements_per_chamber(&spec, 0)
            .iter()
            .all(Vec::is_empty));
    }

    #[test]
    fn every_chamber_has_witness_at_radius_two() {
        let spec = compute_spectrum(&rank2_cartan_action(), 1e-9).unwrap();
        let per_chamber = anosov_elements_per_chamber(&spec, 2);
        assert_eq!(per_chamber.len(), 6);
        assert!(per_chamber.iter().all(|c| !c.is_empty()));
    }

    #[test]
    fn regular_elements_are_anosov() {
        let action = rank2_cartan_action();
        let spec = compute_spectrum(&action, 1e-9).unwrap();
        for chamber in anosov_elements_per_chamber(&spec, 2) {
            for a in chamber {
                let m = action.element(&a).unwrap();
                assert!(crate::actions::is_anosov_linear(&m, 1e-9).unwrap());
            }
        }
    }

    #[test]
    fn repeated_block_action_merges_functionals() {
        // diag(C, C) on T^4: same exponents with multiplicity 2
        let m = IntegerMatrix::from_rows(&[
            vec![2, 1, 0, 0],
            vec![1, 1, 0, 0],
            vec![0, 0, 2, 1],
            vec![0, 0, 1, 1],
        ])
        .unwrap();
        let action = AbelianLinearAction::new(vec![m]).unwrap();
        let spec = compute_spectrum(&action, 1e-9).unwrap();
        assert_eq!(spec.functionals.len(), 2);
        assert!(spec.functionals.iter().all(|f| f.multiplicity == 2));
        assert_eq!(spec.chambers.len(), 2);
    }

    #[test]
    fn unipotent_generator_flags_polynomial_growth() {
        let shear = IntegerMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        let action = AbelianLinearAction::new(vec![shear]).unwrap();
        let spec = compute_spectrum(&action, 1e-9).unwrap();
        assert_eq!(spec.functionals.len(), 1);
        assert!(spec.functionals[0].polynomial_growth);
        assert!(spec.degeneracy.is_some());
    }
}
