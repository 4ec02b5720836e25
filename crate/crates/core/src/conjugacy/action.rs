//! Commuting families of nonlinear toral maps and word evaluation.

use super::map::{mat_vec, torus_distance, MapError, NonlinearMap};
use crate::actions::{AbelianLinearAction, ActionError};
use nalgebra::DMatrix;
use thiserror::Error;

pub const COMMUTATION_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum NonlinearActionError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("generators {i} and {j} fail to commute: sup defect {defect:e} exceeds {tol:e}")]
    NonCommuting {
        i: usize,
        j: usize,
        defect: f64,
        tol: f64,
    },
    #[error("word length {found} does not match rank {expected}")]
    RankMismatch { expected: usize, found: usize },
}

/// A Z^k-action by nonlinear maps sharing a torus. Commutation is verified
/// on a coarse grid at construction; genuinely non-commuting maps are only
/// accepted through the explicit rank-1 constructor.
#[derive(Clone, Debug)]
pub struct NonlinearAction {
    maps: Vec<NonlinearMap>,
    n: usize,
    commutation_defect: f64,
    rank1: bool,
}

impl NonlinearAction {
    pub fn new(maps: Vec<NonlinearMap>, check_resolution: usize) -> Result<Self, NonlinearActionError> {
        Self::with_tolerance(maps, check_resolution, COMMUTATION_TOL)
    }

    pub fn with_tolerance(
        maps: Vec<NonlinearMap>,
        check_resolution: usize,
        tol: f64,
    ) -> Result<Self, NonlinearActionError> {
        assert!(!maps.is_empty());
        let n = maps[0].dim();
        // exact commutation and unimodularity of the linear parts
        AbelianLinearAction::new(maps.iter().map(|m| m.linear_part().clone()).collect())?;
        let mut worst = 0.0f64;
        for i in 0..maps.len() {
            for j in i + 1..maps.len() {
                let defect = commutation_defect(&maps[i], &maps[j], n, check_resolution);
                worst = worst.max(defect);
                if defect > tol {
                    return Err(NonlinearActionError::NonCommuting {
                        i,
                        j,
                        defect,
                        tol,
                    });
                }
            }
        }
        Ok(NonlinearAction {
            maps,
            n,
            commutation_defect: worst,
            rank1: false,
        })
    }

    /// Single-map mode: no commutation hypothesis, rank-1 solves only.
    pub fn rank1(map: NonlinearMap) -> Self {
        let n = map.dim();
        NonlinearAction {
            maps: vec![map],
            n,
            commutation_defect: 0.0,
            rank1: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[NonlinearMap] {
        &self.maps
    }

    pub fn is_rank1_mode(&self) -> bool {
        self.rank1
    }

    pub fn commutation_defect(&self) -> f64 {
        self.commutation_defect
    }

    pub fn linear_action(&self) -> Result<AbelianLinearAction, ActionError> {
        AbelianLinearAction::new(self.maps.iter().map(|m| m.linear_part().clone()).collect())
    }

    /// alpha(a)(x) on the torus: generator words applied in index order,
    /// inverses by Newton/closed form.
    pub fn apply_word(&self, a: &[i64], x: &[f64]) -> Result<Vec<f64>, NonlinearActionError> {
        if a.len() != self.maps.len() {
            return Err(NonlinearActionError::RankMismatch {
                expected: self.maps.len(),
                found: a.len(),
            });
        }
        let mut y = x.to_vec();
        for (map, &e) in self.maps.iter().zip(a) {
            for _ in 0..e.unsigned_abs() {
                y = if e >= 0 {
                    map.eval_torus(&y)
                } else {
                    map.eval_inverse(&y)?
                        .iter()
                        .map(|v| v.rem_euclid(1.0))
                        .collect()
                };
            }
        }
        Ok(y)
    }

    /// Derivative of alpha(a) at x by the chain rule along the word orbit.
    pub fn word_derivative(&self, a: &[i64], x: &[f64]) -> Result<DMatrix<f64>, NonlinearActionError> {
        if a.len() != self.maps.len() {
            return Err(NonlinearActionError::RankMismatch {
                expected: self.maps.len(),
                found: a.len(),
            });
        }
        let mut y = x.to_vec();
        let mut d = DMatrix::identity(self.n, self.n);
        for (map, &e) in self.maps.iter().zip(a) {
            for _ in 0..e.unsigned_abs() {
                if e >= 0 {
                    d = map.derivative(&y) * d;
                    y = map.eval_torus(&y);
                } else {
                    let pre = map
                        .eval_inverse(&y)?
                        .iter()
                        .map(|v| v.rem_euclid(1.0))
                        .collect::<Vec<_>>();
                    let dm = map
                        .derivative(&pre)
                        .try_inverse()
                        .expect("derivative invertible");
                    d = dm * d;
                    y = pre;
                }
            }
        }
        Ok(d)
    }
}

fn commutation_defect(a: &NonlinearMap, b: &NonlinearMap, n: usize, resolution: usize) -> f64 {
    let mut worst = 0.0f64;
    let total = resolution.pow(n as u32);
    for idx in 0..total {
        let mut x = vec![0.0; n];
        let mut rem = idx;
        for xi in x.iter_mut() {
            *xi = (rem % resolution) as f64 / resolution as f64;
            rem /= resolution;
        }
        let ab = a.eval_torus(&b.eval_torus(&x));
        let ba = b.eval_torus(&a.eval_torus(&x));
        worst = worst.max(torus_distance(&ab, &ba));
    }
    worst
}

/// Conjugates every generator of a linear action by the same psi = id + u,
/// producing a smooth action that commutes by construction.
pub fn conjugated_action(
    linear: &AbelianLinearAction,
    displacement: &super::trig::TrigPoly,
    check_resolution: usize,
) -> Result<NonlinearAction, NonlinearActionError> {
    let maps = linear
        .generators()
        .iter()
        .map(|g| NonlinearMap::conjugated(g.clone(), displacement.clone()))
        .collect::<Result<Vec<_>, _>>()?;
    NonlinearAction::new(maps, check_resolution)
}

/// Ground-truth correction psi^{-1} - id evaluated by Newton iteration;
/// the conjugacy solver should reproduce this for conjugated actions.
pub fn psi_inverse_displacement(
    displacement: &super::trig::TrigPoly,
    x: &[f64],
) -> Vec<f64> {
    let n = x.len();
    let mut y: Vec<f64> = x.to_vec();
    for _ in 0..80 {
        let u = displacement.eval(&y);
        let fx: Vec<f64> = y.iter().zip(&u).map(|(a, b)| a + b).collect();
        let residual: Vec<f64> = fx.iter().zip(x).map(|(a, b)| a - b).collect();
        if residual.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-12 {
            break;
        }
        let d = DMatrix::identity(n, n) + displacement.jacobian(&y);
        let step = d
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&residual))
            .expect("D psi invertible");
        for (yi, s) in y.iter_mut().zip(step.iter()) {
            *yi -= s;
        }
    }
    y.iter().zip(x).map(|(yi, xi)| yi - xi).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actions::{cat_map, rank2_cartan_action};
    use crate::conjugacy::trig::{Phase, RealTerm, TrigPoly};
    use approx::assert_abs_diff_eq;

    fn psi() -> TrigPoly {
        TrigPoly::from_real_terms(
            2,
            2,
            &[RealTerm {
                frequency: vec![1, 1],
                amplitude: vec![0.01, -0.005],
                phase: Phase::Sin,
            }],
        )
    }

    #[test]
    fn conjugated_family_commutes() {
        let linear = AbelianLinearAction::new(vec![
            cat_map(),
            cat_map().mul(&cat_map()),
        ])
        .unwrap();
        let action = conjugated_action(&linear, &psi(), 8).unwrap();
        assert!(action.commutation_defect() < 1e-11);
    }

    #[test]
    fn perturbing_one_generator_breaks_commutation() {
        let p = TrigPoly::from_real_terms(
            2,
            2,
            &[RealTerm {
                frequency: vec![1, 0],
                amplitude: vec![0.05, 0.0],
                phase: Phase::Sin,
            }],
        );
        let a = NonlinearMap::perturbed(cat_map(), p).unwrap();
        let b = NonlinearMap::affine(cat_map().mul(&cat_map())).unwrap();
        let err = NonlinearAction::new(vec![a.clone(), b], 8).unwrap_err();
        assert!(matches!(err, NonlinearActionError::NonCommuting { .. }));
        // rank-1 mode accepts the single map
        let solo = NonlinearAction::rank1(a);
        assert!(solo.is_rank1_mode());
    }

    #[test]
    fn word_evaluation_matches_composition() {
        let linear = rank2_cartan_action();
        let psi3 = TrigPoly::from_real_terms(
            3,
            3,
            &[RealTerm {
                frequency: vec![1, 0, 1],
                amplitude: vec![0.008, 0.0, -0.004],
                phase: Phase::Cos,
            }],
        );
        let action = conjugated_action(&linear, &psi3, 4).unwrap();
        let x = [0.21, 0.53, 0.87];
        let step = action.apply_word(&[1, 0], &x).unwrap();
        let two = action.apply_word(&[0, 1], &step).unwrap();
        let direct = action.apply_word(&[1, 1], &x).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(two[i], direct[i], epsilon = 1e-10);
        }
        // inverse word cancels
        let back = action.apply_word(&[-1, -1], &direct).unwrap();
        assert!(torus_distance(&back, &x) < 1e-10);
    }

    #[test]
    fn word_derivative_is_chain_rule() {
        let map = NonlinearMap::perturbed(cat_map(), psi()).unwrap();
        let action = NonlinearAction::rank1(map.clone());
        let x = [0.14, 0.66];
        let d2 = action.word_derivative(&[2], &x).unwrap();
        let mid = map.eval_torus(&x);
        let manual = map.derivative(&mid) * map.derivative(&x);
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(d2[(i, j)], manual[(i, j)], epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn psi_inverse_displacement_satisfies_definition() {
        let u = psi();
        let x = [0.77, 0.31];
        let h = psi_inverse_displacement(&u, &x);
        // x + h = psi^{-1}(x): applying psi returns x
        let y: Vec<f64> = x.iter().zip(&h).map(|(a, b)| a + b).collect();
        let fwd: Vec<f64> = {
            let uv = u.eval(&y);
            y.iter().zip(uv).map(|(a, b)| a + b).collect()
        };
        for i in 0..2 {
            assert_abs_diff_eq!(fwd[i], x[i], epsilon = 1e-11);
        }
    }
}
