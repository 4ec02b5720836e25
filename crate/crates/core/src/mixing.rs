//! Grid-sampled Fourier analysis on the torus: Fejér approximation,
//! Hölder norms, matrix coefficients of automorphisms, and the
//! exponential-decay experiment for families of action elements.

use crate::actions::{is_ergodic, AbelianLinearAction, ActionError, IntegerMatrix};
use crate::grid::{tree_sum, GridError, GridFunction};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MixingError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Spectrum(#[from] crate::spectrum::SpectrumError),
    #[error("element {0:?} is not ergodic; matrix coefficients need not decay")]
    NonErgodicElement(Vec<i64>),
    #[error("decay experiment needs at least two elements")]
    TooFewElements,
}

/// Triangular Fejér weight (1 - |j|/(l+1))_+ .
fn fejer_weight(j: i64, l: u32) -> f64 {
    (1.0 - j.unsigned_abs() as f64 / (l as f64 + 1.0)).max(0.0)
}

/// One-dimensional Fejér kernel K_l sampled on the dyadic grid; its
/// Fourier coefficients are exactly the triangular weights.
pub fn fejer_kernel(l: u32, resolution: usize) -> Result<GridFunction, MixingError> {
    if (l as usize) >= resolution / 2 {
        return Err(GridError::BeyondNyquist {
            cutoff: l as i64,
            nyquist: (resolution / 2) as i64,
        }
        .into());
    }
    Ok(GridFunction::sample(1, resolution, |x| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -(l as i64)..=(l as i64) {
            acc += Complex64::from_polar(
                fejer_weight(j, l),
                2.0 * std::f64::consts::PI * j as f64 * x[0],
            );
        }
        acc
    })?)
}

/// Product kernel F_l(t_1, .., t_n) = K_l(t_1) ... K_l(t_n).
pub fn fejer_product_kernel(l: u32, resolution: usize, n: usize) -> Result<GridFunction, MixingError> {
    let one_dim = fejer_kernel(l, resolution)?;
    let line: Vec<Complex64> = one_dim.samples().to_vec();
    Ok(GridFunction::sample(n, resolution, move |x| {
        let mut acc = Complex64::new(1.0, 0.0);
        for &xi in x {
            let idx = (xi * resolution as f64).round() as usize % resolution;
            acc *= line[idx];
        }
        acc
    })?)
}

/// Fejér approximation F_m * f via multiplication of Fourier coefficients
/// by the triangular weights; the result's spectrum is supported in the
/// cube of radius m.
pub fn fejer_approximate(f: &GridFunction, m: u32) -> Result<GridFunction, MixingError> {
    if (m as usize) >= f.resolution() / 2 {
        return Err(GridError::BeyondNyquist {
            cutoff: m as i64,
            nyquist: (f.resolution() / 2) as i64,
        }
        .into());
    }
    let mut hat = f.dft();
    for idx in 0..hat.len() {
        let freq = hat.signed_frequency(idx);
        let w: f64 = freq.iter().map(|&j| fejer_weight(j, m)).product();
        hat.samples_mut()[idx] *= w;
    }
    Ok(hat.idft())
}

/// Hölder norm estimate ||f||_theta = ||f||_inf + seminorm, the seminorm
/// taken as a sup over a deterministic schedule of dyadic offsets. The
/// estimate is a lower bound of the true norm and is monotone in the
/// sampling budget.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub theta: f64,
    pub sup_norm: f64,
    pub seminorm: f64,
    pub total: f64,
    pub pairs_sampled: u64,
}

pub fn holder_norm(f: &GridFunction, theta: f64, pairs_budget: u64) -> HolderEstimate {
    assert!(theta > 0.0 && theta <= 1.0, "theta must lie in (0, 1]");
    let r = f.resolution();
    let n = f.dim();
    // per-axis offsets: 0, +-1 and +-powers of two up to R/2
    let mut axis_offsets: Vec<i64> = vec![0, 1, -1];
    let mut p = 2i64;
    while (p as usize) <= r / 2 {
        axis_offsets.push(p);
        axis_offsets.push(-p);
        p *= 2;
    }
    let mut offsets: Vec<Vec<i64>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(offsets.len() * axis_offsets.len());
        for base in &offsets {
            for &o in &axis_offsets {
                let mut v = base.clone();
                v.push(o);
                next.push(v);
            }
        }
        offsets = next;
    }
    offsets.retain(|h| h.iter().any(|&x| x != 0));

    let total_pairs = offsets.len() as u64 * f.len() as u64;
    let stride = (total_pairs / pairs_budget.max(1)).max(1) as usize;

    let sup_norm = f.sup_norm();
    let mut seminorm = 0.0f64;
    let mut pairs = 0u64;
    for h in &offsets {
        let dist = h
            .iter()
            .map(|&x| {
                let w = x.rem_euclid(r as i64).min((r as i64 - x.rem_euclid(r as i64)).abs());
                (w as f64 / r as f64).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        if dist == 0.0 {
            continue;
        }
        let scale = dist.powf(theta);
        let mut idx = 0usize;
        while idx < f.len() {
            let base = f.multi_index(idx);
            let shifted: Vec<usize> = base
                .iter()
                .zip(h)
                .map(|(&b, &o)| (b as i64 + o).rem_euclid(r as i64) as usize)
                .collect();
            let diff = (f.samples()[f.flat_index(&shifted)] - f.samples()[idx]).norm();
            let ratio = diff / scale;
            if ratio > seminorm {
                seminorm = ratio;
            }
            pairs += 1;
            idx += stride;
        }
    }
    HolderEstimate {
        theta,
        sup_norm,
        seminorm,
        total: sup_norm + seminorm,
        pairs_sampled: pairs,
    }
}

/// Centered matrix coefficient <f o tau(a), g> - mean(f) conj(mean(g)).
/// The composition is an exact permutation of grid samples.
pub fn matrix_coefficient(
    f: &GridFunction,
    g: &GridFunction,
    a: &IntegerMatrix,
) -> Result<Complex64, MixingError> {
    f.same_shape(g)?;
    if !a.is_unimodular() {
        return Err(ActionError::NotUnimodular {
            det: a.determinant(),
        }
        .into());
    }
    let rows = a.rows_mod(f.resolution() as i64);
    let composed = f.compose_integer_matrix(&rows);
    let products: Vec<Complex64> = composed
        .samples()
        .iter()
        .zip(g.samples())
        .map(|(x, y)| x * y.conj())
        .collect();
    let inner = tree_sum(&products) / products.len() as f64;
    Ok(inner - f.mean() * g.mean().conj())
}

/// Values below this are treated as numerical noise when fitting decay.
pub const COEFFICIENT_FLOOR: f64 = 1e-14;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayEntry {
    pub element: Vec<i64>,
    pub norm: f64,
    pub coefficient: f64,
    pub envelope: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayReport {
    pub entries: Vec<DecayEntry>,
    /// Fitted exponential rate of log|coeff| against ||a|| (positive =
    /// decay). Grid sampling aliases the observables' Fourier tails, which
    /// floors the measurable coefficients well above machine epsilon, so
    /// the fit runs on the maximal strictly decreasing prefix and
    /// `floor_estimate` records the level where decay stopped.
    pub beta: f64,
    pub fit_r2: f64,
    pub fit_points: usize,
    pub floor_estimate: f64,
    /// Envelope rate r, the midpoint of the admissible interval
    /// (1, e^{sigma/(n+2)}) of the separation lemma.
    pub r: f64,
    pub sigma: f64,
    /// C(theta) calibrated so the envelope touches the first element.
    pub c_theta: f64,
    pub theta: f64,
    pub holder_f: HolderEstimate,
    pub holder_g: HolderEstimate,
    pub l2_f: f64,
    pub l2_g: f64,
}

/// Measures |<tau(a) f, g> - int f int g| along the given elements and fits
/// an exponential decay rate; the theoretical envelope
/// C(theta) (4 ||f||_th ||g||_2 + 2 ||g||_th ||f||_2) r^{-theta ||a||}
/// is calibrated on the smallest element.
pub fn decay_experiment(
    action: &AbelianLinearAction,
    f: &GridFunction,
    g: &GridFunction,
    theta: f64,
    elements: &[Vec<i64>],
) -> Result<DecayReport, MixingError> {
    if elements.len() < 2 {
        return Err(MixingError::TooFewElements);
    }
    let spec = crate::spectrum::compute_spectrum(action, 1e-9)?;
    let sig = crate::spectrum::sigma(&spec);
    let n = action.dim();
    let r_max = (sig.value / (n as f64 + 2.0)).exp();
    let r = 0.5 * (1.0 + r_max);

    let holder_f = holder_norm(f, theta, 2_000_000);
    let holder_g = holder_norm(g, theta, 2_000_000);
    let l2_f = f.l2_norm();
    let l2_g = g.l2_norm();
    let amplitude = 4.0 * holder_f.total * l2_g + 2.0 * holder_g.total * l2_f;

    let mut entries = Vec::with_capacity(elements.len());
    let mut sorted = elements.to_vec();
    sorted.sort_by(|a, b| {
        norm_of(a)
            .total_cmp(&norm_of(b))
            .then_with(|| a.cmp(b))
    });
    for a in &sorted {
        let m = action.element(a)?;
        if !is_ergodic(&m)? {
            return Err(MixingError::NonErgodicElement(a.clone()));
        }
        let coeff = matrix_coefficient(f, g, &m)?.norm();
        entries.push(DecayEntry {
            element: a.clone(),
            norm: norm_of(a),
            coefficient: coeff,
            envelope: 0.0,
        });
    }
    // calibrate C(theta) on the smallest element
    let first = &entries[0];
    let shape0 = amplitude * r.powf(-theta * first.norm);
    let c_theta = if shape0 > 0.0 {
        first.coefficient / shape0
    } else {
        0.0
    };
    for e in entries.iter_mut() {
        e.envelope = c_theta * amplitude * r.powf(-theta * e.norm);
    }

    // fit on the decaying prefix: stop at the aliasing/noise floor, i.e.
    // the first entry that no longer decreases or drops below the absolute
    // floor
    let mut cut = entries.len();
    for i in 0..entries.len() {
        if entries[i].coefficient <= COEFFICIENT_FLOOR
            || (i > 0 && entries[i].coefficient >= entries[i - 1].coefficient)
        {
            cut = i;
            break;
        }
    }
    if cut < 3 {
        cut = entries
            .iter()
            .position(|e| e.coefficient <= COEFFICIENT_FLOOR)
            .unwrap_or(entries.len());
    }
    let floor_estimate = entries
        .get(cut)
        .map(|e| e.coefficient)
        .unwrap_or(COEFFICIENT_FLOOR)
        .max(COEFFICIENT_FLOOR);
    let pts: Vec<(f64, f64)> = entries[..cut]
        .iter()
        .map(|e| (e.norm, e.coefficient.ln()))
        .collect();
    let (beta, fit_r2) = fit_exponential_rate(&pts);
    Ok(DecayReport {
        entries,
        beta,
        fit_r2,
        fit_points: pts.len(),
        floor_estimate,
        r,
        sigma: sig.value,
        c_theta,
        theta,
        holder_f,
        holder_g,
        l2_f,
        l2_g,
    })
}

fn norm_of(a: &[i64]) -> f64 {
    (a.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt()
}

/// Slope fit log y = alpha - beta x; returns (beta, R^2).
pub fn fit_exponential_rate(pts: &[(f64, f64)]) -> (f64, f64) {
    if pts.len() < 2 {
        return (0.0, 0.0);
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return (0.0, 0.0);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (-slope, r2)
}

/// Smallest constant C(theta) making the Fejér approximation bound
/// ||F_m * f - f||_inf <= C ||f||_theta m^{-theta} hold across a probe
/// family of triangle waves and a sweep of m; the approximation lemma
/// guarantees existence, not a value, so the constant is calibrated.
pub fn calibrate_c_theta(theta: f64, resolution: usize) -> Result<f64, MixingError> {
    let mut worst: f64 = 0.0;
    for freq in [1i64, 2, 3] {
        let f = observables::triangle(1, resolution, &[freq])?;
        let norm = holder_norm(&f, theta, 1_000_000).total;
        let mut m = 2u32;
        while (m as usize) < resolution / 2 {
            let approx = fejer_approximate(&f, m)?;
            let err = f
                .samples()
                .iter()
                .zip(approx.samples())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            worst = worst.max(err * (m as f64).powf(theta) / norm);
            m *= 2;
        }
    }
    Ok(worst)
}

/// Built-in observable families shared by the CLI and the experiments.
pub mod observables {
    use super::*;

    /// e^{2 pi i m.x}
    pub fn character(n: usize, resolution: usize, m: &[i64]) -> Result<GridFunction, MixingError> {
        let m = m.to_vec();
        Ok(GridFunction::sample(n, resolution, move |x| {
            let phase: f64 = m.iter().zip(x).map(|(&mi, xi)| mi as f64 * xi).sum();
            Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
        })?)
    }

    /// frac(m.x) - 1/2, discontinuous.
    pub fn sawtooth(n: usize, resolution: usize, m: &[i64]) -> Result<GridFunction, MixingError> {
        let m = m.to_vec();
        Ok(GridFunction::sample_real(n, resolution, move |x| {
            let s: f64 = m.iter().zip(x).map(|(&mi, xi)| mi as f64 * xi).sum();
            s.rem_euclid(1.0) - 0.5
        })?)
    }

    /// 2 dist(m.x, Z), the Lipschitz triangle wave with slope +-2 per unit
    /// of the linear form (height 1 at the midpoint).
    pub fn triangle(n: usize, resolution: usize, m: &[i64]) -> Result<GridFunction, MixingError> {
        let m = m.to_vec();
        Ok(GridFunction::sample_real(n, resolution, move |x| {
            let s: f64 = m.iter().zip(x).map(|(&mi, xi)| mi as f64 * xi).sum();
            let fsq = s.rem_euclid(1.0);
            2.0 * fsq.min(1.0 - fsq)
        })?)
    }

    /// Product of triangle waves, one per listed frequency vector. Unlike a
    /// single triangle wave of a linear form (whose spectrum sits on one
    /// dual line), the product has a genuinely n-dimensional spectrum, so
    /// correlations under a hyperbolic action are not trivially zero.
    pub fn triangle_product(
        n: usize,
        resolution: usize,
        freqs: &[Vec<i64>],
    ) -> Result<GridFunction, MixingError> {
        let freqs = freqs.to_vec();
        Ok(GridFunction::sample_real(n, resolution, move |x| {
            freqs
                .iter()
                .map(|m| {
                    let s: f64 = m.iter().zip(x).map(|(&mi, xi)| mi as f64 * xi).sum();
                    let fsq = s.rem_euclid(1.0);
                    2.0 * fsq.min(1.0 - fsq)
                })
                .product()
        })?)
    }

    /// Finite Fourier series: sum of amp_cos cos(2 pi m.x) + amp_sin sin(2 pi m.x).
    pub fn fourier_series(
        n: usize,
        resolution: usize,
        terms: &[(Vec<i64>, f64, f64)],
    ) -> Result<GridFunction, MixingError> {
        let terms = terms.to_vec();
        Ok(GridFunction::sample_real(n, resolution, move |x| {
            terms
                .iter()
                .map(|(m, ac, as_)| {
                    let phase: f64 =
                        2.0 * std::f64::consts::PI * m.iter().zip(x).map(|(&mi, xi)| mi as f64 * xi).sum::<f64>();
                    ac * phase.cos() + as_ * phase.sin()
                })
                .sum()
        })?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{cat_map, AbelianLinearAction};
    use approx::assert_abs_diff_eq;

    #[test]
    fn fejer_kernel_basics() {
        let k0 = fejer_kernel(0, 64).unwrap();
        for z in k0.samples() {
            assert_abs_diff_eq!(z.re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(z.im, 0.0, epsilon = 1e-12);
        }
        for l in [1u32, 4, 9] {
            let k = fejer_kernel(l, 128).unwrap();
            // K_l(0) = l + 1
            assert_abs_diff_eq!(k.samples()[0].re, l as f64 + 1.0, epsilon = 1e-10);
            // integral one
            assert_abs_diff_eq!(k.mean().re, 1.0, epsilon = 1e-12);
            // nonnegative
            assert!(k.samples().iter().all(|z| z.re > -1e-10));
            // Fourier coefficients are exactly the triangular weights
            let hat = k.dft();
            for idx in 0..hat.len() {
                let m = hat.signed_frequency(idx)[0];
                assert_abs_diff_eq!(
                    hat.samples()[idx].re,
                    fejer_weight(m, l),
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(hat.samples()[idx].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn fejer_kernel_rejects_beyond_nyquist() {
        assert!(fejer_kernel(40, 64).is_err());
    }

    #[test]
    fn product_kernel_matches_and_peaks() {
        let l = 3u32;
        let k1 = fejer_kernel(l, 64).unwrap();
        let p1 = fejer_product_kernel(l, 64, 1).unwrap();
        for (a, b) in k1.samples().iter().zip(p1.samples()) {
            assert!((a - b).norm() < 1e-10);
        }
        let p2 = fejer_product_kernel(l, 32, 2).unwrap();
        assert_abs_diff_eq!(p2.samples()[0].re, (l as f64 + 1.0).powi(2), epsilon = 1e-9);
        assert_abs_diff_eq!(p2.mean().re, 1.0, epsilon = 1e-12);
        // spectral support in the cube of radius l
        let hat = p2.dft();
        for idx in 0..hat.len() {
            let m = hat.signed_frequency(idx);
            if m.iter().any(|&mi| mi.abs() > l as i64) {
                assert!(hat.samples()[idx].norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fejer_approximate_scales_characters() {
        let f = observables::character(2, 32, &[2, -1]).unwrap();
        let m = 5u32;
        let approx = fejer_approximate(&f, m).unwrap();
        let w = fejer_weight(2, m) * fejer_weight(-1, m);
        for (a, b) in approx.samples().iter().zip(f.samples()) {
            assert!((a - b * w).norm() < 1e-12);
        }
        // constants unchanged
        let c = GridFunction::constant(2, 32, Complex64::new(0.7, 0.0)).unwrap();
        let ca = fejer_approximate(&c, m).unwrap();
        for (a, b) in ca.samples().iter().zip(c.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fejer_error_rate_on_lipschitz_wave() {
        // ||F_m * f - f||_inf <= C ||f||_theta m^{-theta} for theta in (0,1);
        // at theta = 1 the Fejér mean picks up the classical log(m) factor,
        // so the sweep is checked at theta = 1/2 where the wave is Hölder
        // with room to spare: the log-log slope must be <= -theta + 0.1.
        let theta = 0.5;
        let f = observables::triangle(1, 1024, &[1]).unwrap();
        let mut pts = Vec::new();
        for m in [4u32, 8, 16, 32, 64, 128] {
            let approx = fejer_approximate(&f, m).unwrap();
            let err = f
                .samples()
                .iter()
                .zip(approx.samples())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            pts.push(((m as f64).ln(), err.ln()));
        }
        let (rate, r2) = fit_exponential_rate(&pts);
        // fit_exponential_rate returns -slope
        assert!(rate >= theta - 0.1, "slope {} too shallow", -rate);
        assert!(r2 > 0.99);
    }

    #[test]
    fn holder_norm_of_constant_and_triangle() {
        let c = GridFunction::constant(1, 256, Complex64::new(-2.5, 0.0)).unwrap();
        let est = holder_norm(&c, 0.5, 100_000);
        assert_abs_diff_eq!(est.seminorm, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(est.total, 2.5, epsilon = 1e-14);

        // triangle wave 2 dist(x, Z): Lipschitz slope exactly 2
        let f = observables::triangle(1, 1024, &[1]).unwrap();
        let est = holder_norm(&f, 1.0, 10_000_000);
        assert_abs_diff_eq!(est.seminorm, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(est.sup_norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn holder_seminorm_monotone_in_theta() {
        // torus offsets have ||h|| <= 1, so ||h||^theta' >= ||h||^theta for
        // theta' < theta and the seminorm is monotone non-decreasing in theta
        let f = observables::triangle(1, 512, &[1]).unwrap();
        let s1 = holder_norm(&f, 1.0, 1_000_000).seminorm;
        let s05 = holder_norm(&f, 0.5, 1_000_000).seminorm;
        let s02 = holder_norm(&f, 0.2, 1_000_000).seminorm;
        assert!(s1 >= s05 && s05 >= s02, "s1={s1} s05={s05} s02={s02}");
    }

    #[test]
    fn holder_estimate_monotone_in_budget() {
        let f = observables::triangle(2, 64, &[1, 2]).unwrap();
        let small = holder_norm(&f, 0.7, 1_000);
        let large = holder_norm(&f, 0.7, 1_000_000);
        assert!(large.seminorm >= small.seminorm);
    }

    #[test]
    fn matrix_coefficient_of_constants_vanishes() {
        let f = GridFunction::constant(2, 32, Complex64::new(1.3, 0.0)).unwrap();
        let g = GridFunction::constant(2, 32, Complex64::new(-0.4, 0.2)).unwrap();
        let c = matrix_coefficient(&f, &g, &cat_map()).unwrap();
        assert!(c.norm() < 1e-14);
    }

    #[test]
    fn matrix_coefficient_character_rule() {
        let a = cat_map();
        // A^T m = m' picks out the correlation exactly
        let m = vec![1i64, 1];
        let m_image = vec![2 * 1 + 1 * 1, 1 * 1 + 1 * 1]; // A^T m with A symmetric-ish rows
        // A = [[2,1],[1,1]], A^T = [[2,1],[1,1]]: A^T m = (3, 2)
        let f = observables::character(2, 128, &m).unwrap();
        let hit = observables::character(2, 128, &[3, 2]).unwrap();
        let miss = observables::character(2, 128, &[3, 1]).unwrap();
        let c_hit = matrix_coefficient(&f, &hit, &a).unwrap();
        let c_miss = matrix_coefficient(&f, &miss, &a).unwrap();
        assert!((c_hit - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!(c_miss.norm() < 1e-12);
        let _ = m_image;
    }

    #[test]
    fn decay_experiment_on_cat_map() {
        let action = AbelianLinearAction::new(vec![cat_map()]).unwrap();
        let f = observables::triangle_product(2, 256, &[vec![1, 0], vec![0, 1]]).unwrap();
        let g = observables::triangle_product(2, 256, &[vec![1, 1], vec![0, 1]]).unwrap();
        let elements: Vec<Vec<i64>> = (1..=12).map(|i| vec![i]).collect();
        let rep = decay_experiment(&action, &f, &g, 0.5, &elements).unwrap();
        assert!(rep.beta > 0.0, "no decay: beta = {}", rep.beta);
        assert!(rep.fit_r2 > 0.9, "poor fit: R^2 = {}", rep.fit_r2);
        // all measured values below the envelope calibrated at the first
        for e in &rep.entries {
            assert!(
                e.coefficient <= e.envelope * (1.0 + 1e-9),
                "entry {:?}: {} above envelope {}",
                e.element,
                e.coefficient,
                e.envelope
            );
        }
    }

    #[test]
    fn decay_experiment_flags_non_ergodic() {
        let rot = crate::actions::IntegerMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        let action = AbelianLinearAction::new(vec![rot]).unwrap();
        let f = observables::triangle(2, 32, &[1, 0]).unwrap();
        let g = f.clone();
        let err = decay_experiment(&action, &f, &g, 0.5, &[vec![1], vec![2]]).unwrap_err();
        assert!(matches!(err, MixingError::NonErgodicElement(_)));
    }

    #[test]
    fn calibrated_constant_is_positive_and_modest() {
        let c = calibrate_c_theta(0.5, 256).unwrap();
        assert!(c > 0.0 && c < 100.0, "C(theta) = {c}");
    }
}
