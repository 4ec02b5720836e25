//! Empirical probes for the lattice-avoidance machinery: how far lattice
//! points stay from an irrational invariant subspace, and whether a given
//! action element moves the dual box H_l entirely off itself.

use crate::actions::{AbelianLinearAction, ActionError};
use crate::spectrum::{compute_spectrum, sigma, SpectrumError};
use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on lattice enumeration size per probe.
pub const ENUMERATION_CAP: u64 = 10_000_000;

#[derive(Debug, Error)]
pub enum DiophantineError {
    #[error("lattice intersection: z = {z:?} lies within 1e-12 of the subspace")]
    LatticeIntersection { z: Vec<i64> },
    #[error("enumeration of {points} lattice points exceeds the cap {cap}")]
    EnumerationTooLarge { points: u64, cap: u64 },
    #[error("rate r = {r} outside the admissible interval (1, {max})")]
    InadmissibleRate { r: f64, max: f64 },
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Result of sweeping d(z, V) * ||z||^n over the ball ||z|| <= radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KatznelsonProbeResult {
    pub radius: i64,
    pub worst_z: Vec<i64>,
    pub min_product: f64,
    /// Cumulative minima (radius, min d*||z||^n over ||z|| <= radius).
    pub trend: Vec<(i64, f64)>,
}

/// Exhaustive sweep of nonzero lattice points in the Euclidean ball of the
/// given radius, minimizing d(z, V) * ||z||^n where d is the orthogonal
/// distance to the column span of `v_basis` and n is the ambient dimension.
pub fn katznelson_probe(
    v_basis: &DMatrix<f64>,
    radius: i64,
) -> Result<KatznelsonProbeResult, DiophantineError> {
    assert!(radius >= 1, "radius must be positive");
    let n = v_basis.nrows();
    let per_axis = (2 * radius + 1) as u64;
    let total = per_axis.pow(n as u32);
    if total > ENUMERATION_CAP {
        return Err(DiophantineError::EnumerationTooLarge {
            points: total,
            cap: ENUMERATION_CAP,
        });
    }
    let q = crate::spectrum::orthonormal_columns(v_basis);
    // distance via the complementary projector
    let proj = DMatrix::<f64>::identity(n, n) - &q * q.transpose();

    // slabs over the first coordinate; min-reduction is order independent
    let slabs: Vec<i64> = (-radius..=radius).collect();
    let results: Vec<Result<SlabMin, DiophantineError>> = slabs
        .par_iter()
        .map(|&z0| slab_min(&proj, n, radius, z0))
        .collect();

    let mut per_radius: Vec<(f64, Vec<i64>)> =
        vec![(f64::INFINITY, Vec::new()); radius as usize + 1];
    for r in results {
        let s = r?;
        for (bucket, item) in s.per_radius.into_iter().enumerate() {
            if item.0 < per_radius[bucket].0
                || (item.0 == per_radius[bucket].0 && item.1 < per_radius[bucket].1)
            {
                per_radius[bucket] = item;
            }
        }
    }
    let mut trend = Vec::new();
    let mut best = (f64::INFINITY, Vec::new());
    for (rad, item) in per_radius.into_iter().enumerate().skip(1) {
        if item.0 < best.0 {
            best = item;
        }
        if best.0.is_finite() {
            trend.push((rad as i64, best.0));
        }
    }
    Ok(KatznelsonProbeResult {
        radius,
        worst_z: best.1,
        min_product: best.0,
        trend,
    })
}

struct SlabMin {
    /// indexed by ceil(||z||), entries (min product, attaining z)
    per_radius: Vec<(f64, Vec<i64>)>,
}

fn slab_min(
    proj: &DMatrix<f64>,
    n: usize,
    radius: i64,
    z0: i64,
) -> Result<SlabMin, DiophantineError> {
    let mut per_radius: Vec<(f64, Vec<i64>)> =
        vec![(f64::INFINITY, Vec::new()); radius as usize + 1];
    let mut z = vec![-radius; n];
    z[0] = z0;
    let mut zf = vec![0.0f64; n];
    loop {
        let norm_sq: i64 = z.iter().map(|&x| x * x).sum();
        if norm_sq != 0 && norm_sq <= radius * radius {
            for (i, &x) in z.iter().enumerate() {
                zf[i] = x as f64;
            }
            let mut dist_sq = 0.0;
            for i in 0..n {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += proj[(i, j)] * zf[j];
                }
                dist_sq += acc * acc;
            }
            let dist = dist_sq.sqrt();
            if dist < 1e-12 {
                return Err(DiophantineError::LatticeIntersection { z: z.clone() });
            }
            let norm = (norm_sq as f64).sqrt();
            let product = dist * norm.powi(n as i32);
            let bucket = norm.ceil() as usize;
            let slot = &mut per_radius[bucket.min(radius as usize)];
            if product < slot.0 || (product == slot.0 && z < slot.1) {
                *slot = (product, z.clone());
            }
        }
        // odometer over coordinates 1..n (coordinate 0 is the slab)
        let mut i = 1;
        loop {
            if i >= n {
                return Ok(SlabMin { per_radius });
            }
            if z[i] < radius {
                z[i] += 1;
                break;
            }
            z[i] = -radius;
            i += 1;
        }
    }
}

/// The cube H_l = { z in Z : -r^l <= z <= r^l }^n.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct HBox {
    pub bound: i64,
    pub n: usize,
}

impl HBox {
    pub fn point_count(&self) -> u64 {
        (2 * self.bound as u64 + 1).pow(self.n as u32)
    }

    pub fn contains_bigint(&self, z: &[BigInt]) -> bool {
        let b = BigInt::from(self.bound);
        z.iter().all(|x| x.abs() <= b)
    }
}

/// Descriptor of H_l; the coordinate bound is floor(r^l), with a guard for
/// powers that land on an integer up to rounding.
pub fn h_box(l: u32, r: f64, n: usize) -> HBox {
    assert!(r > 1.0, "r must exceed 1");
    let p = r.powi(l as i32);
    let bound = if (p - p.round()).abs() < 1e-9 * p.max(1.0) {
        p.round() as i64
    } else {
        p.floor() as i64
    };
    HBox { bound, n }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationOutcome {
    pub separated: bool,
    /// Whether ||a|| >= l, the hypothesis of the separation lemma; the
    /// check still runs when it fails, but a negative answer then carries
    /// no meaning.
    pub hypothesis_met: bool,
    /// A nonzero z in H_l whose image stays in H_l, when not separated.
    pub witness: Option<Vec<i64>>,
    pub box_bound: i64,
    pub admissible_max_r: f64,
}

/// Exact integer check that tau(a)(H_l) intersects H_l only at zero.
/// Requires 1 < r < e^{sigma/(n+2)}; sigma is taken from the caller so a
/// sweep over (l, a) does not recompute the spectrum.
pub fn separation_check_with_sigma(
    action: &AbelianLinearAction,
    sigma_value: f64,
    r: f64,
    l: u32,
    a: &[i64],
) -> Result<SeparationOutcome, DiophantineError> {
    let n = action.dim();
    let max_r = (sigma_value / (n as f64 + 2.0)).exp();
    if !(r > 1.0 && r < max_r) {
        return Err(DiophantineError::InadmissibleRate { r, max: max_r });
    }
    let hbox = h_box(l, r, n);
    if hbox.point_count() > ENUMERATION_CAP {
        return Err(DiophantineError::EnumerationTooLarge {
            points: hbox.point_count(),
            cap: ENUMERATION_CAP,
        });
    }
    let tau = action.element(a)?;
    let norm = (a.iter().map(|&x| (x * x) as f64).sum::<f64>()).sqrt();
    let hypothesis_met = norm >= l as f64;

    let mut z = vec![-hbox.bound; n];
    let mut witness = None;
    'outer: loop {
        if z.iter().any(|&x| x != 0) {
            let zb: Vec<BigInt> = z.iter().map(|&x| BigInt::from(x)).collect();
            let image = tau.apply(&zb);
            if hbox.contains_bigint(&image) {
                witness = Some(z.clone());
                break 'outer;
            }
        }
        let mut i = 0;
        loop {
            if i == n {
                break 'outer;
            }
            if z[i] < hbox.bound {
                z[i] += 1;
                break;
            }
            z[i] = -hbox.bound;
            i += 1;
        }
    }
    Ok(SeparationOutcome {
        separated: witness.is_none(),
        hypothesis_met,
        witness,
        box_bound: hbox.bound,
        admissible_max_r: max_r,
    })
}

/// Convenience wrapper that derives sigma from the action's spectrum.
pub fn separation_check(
    action: &AbelianLinearAction,
    r: f64,
    l: u32,
    a: &[i64],
) -> Result<SeparationOutcome, DiophantineError> {
    let spec = compute_spectrum(action, 1e-9)?;
    let sig = sigma(&spec);
    separation_check_with_sigma(action, sig.value, r, l, a)
}
