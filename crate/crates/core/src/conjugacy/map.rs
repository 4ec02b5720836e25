//! Nonlinear toral maps with closed-form evaluation: an integer linear
//! part plus either a trigonometric-polynomial perturbation or a
//! conjugation x -> psi(A psi^{-1} x) by an explicit trigonometric
//! diffeomorphism. Values, derivatives and jets of any order are exact up
//! to the Newton tolerance of inverse evaluations.

use super::trig::{jet_compose, jet_identity, jet_inverse, jet_linear_apply, Jet, TrigPoly};
use crate::actions::{ActionError, IntegerMatrix};
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

pub const NEWTON_TOL: f64 = 1e-13;
pub const NEWTON_MAX_ITER: usize = 50;

#[derive(Debug, Error)]
pub enum MapError {
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("Newton inversion failed to reach {tol} in {iters} iterations (residual {residual})")]
    NewtonDiverged {
        tol: f64,
        iters: usize,
        residual: f64,
    },
    #[error("perturbation has {found} coordinates, the torus dimension is {expected}")]
    CoordMismatch { expected: usize, found: usize },
}

#[derive(Clone, Debug)]
enum MapKind {
    /// x -> A x + p(x)
    Perturbed(TrigPoly),
    /// x -> psi(A psi^{-1}(x)) with psi(y) = y + u(y)
    Conjugated { displacement: TrigPoly },
}

/// A map of the torus with exact lift evaluation.
#[derive(Clone, Debug)]
pub struct NonlinearMap {
    linear: IntegerMatrix,
    linear_f64: DMatrix<f64>,
    linear_inv_f64: DMatrix<f64>,
    kind: MapKind,
}

impl NonlinearMap {
    pub fn affine(linear: IntegerMatrix) -> Result<Self, MapError> {
        let n = linear.dim();
        Self::perturbed(linear, TrigPoly::zero(n, n))
    }

    pub fn perturbed(linear: IntegerMatrix, perturbation: TrigPoly) -> Result<Self, MapError> {
        if perturbation.coords() != linear.dim() || perturbation.dim() != linear.dim() {
            return Err(MapError::CoordMismatch {
                expected: linear.dim(),
                found: perturbation.coords(),
            });
        }
        let inv = linear.inverse_unimodular()?;
        Ok(NonlinearMap {
            linear_f64: linear.to_f64(),
            linear_inv_f64: inv.to_f64(),
            linear,
            kind: MapKind::Perturbed(perturbation),
        })
    }

    /// psi o A o psi^{-1} for psi(y) = y + u(y); commuting families arise
    /// by conjugating every generator with the same psi.
    pub fn conjugated(linear: IntegerMatrix, displacement: TrigPoly) -> Result<Self, MapError> {
        if displacement.coords() != linear.dim() || displacement.dim() != linear.dim() {
            return Err(MapError::CoordMismatch {
                expected: linear.dim(),
                found: displacement.coords(),
            });
        }
        let inv = linear.inverse_unimodular()?;
        Ok(NonlinearMap {
            linear_f64: linear.to_f64(),
            linear_inv_f64: inv.to_f64(),
            linear,
            kind: MapKind::Conjugated { displacement },
        })
    }

    pub fn dim(&self) -> usize {
        self.linear.dim()
    }

    pub fn linear_part(&self) -> &IntegerMatrix {
        &self.linear
    }

    pub fn linear_f64(&self) -> &DMatrix<f64> {
        &self.linear_f64
    }

    pub fn is_linear(&self) -> bool {
        match &self.kind {
            MapKind::Perturbed(p) => p.is_zero(),
            MapKind::Conjugated { displacement } => displacement.is_zero(),
        }
    }

    /// Lift evaluation on R^n (commutes with integer translations).
    pub fn eval_lift(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            MapKind::Perturbed(p) => {
                let mut out = mat_vec(&self.linear_f64, x);
                for (o, v) in out.iter_mut().zip(p.eval(x)) {
                    *o += v;
                }
                out
            }
            MapKind::Conjugated { displacement } => {
                let y = psi_inverse(displacement, x);
                let ay = mat_vec(&self.linear_f64, &y);
                psi_forward(displacement, &ay)
            }
        }
    }

    pub fn eval_torus(&self, x: &[f64]) -> Vec<f64> {
        self.eval_lift(x).iter().map(|v| v.rem_euclid(1.0)).collect()
    }

    /// Exact derivative matrix D a(x).
    pub fn derivative(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.kind {
            MapKind::Perturbed(p) => &self.linear_f64 + p.jacobian(x),
            MapKind::Conjugated { displacement } => {
                let y = psi_inverse(displacement, x);
                let ay = mat_vec(&self.linear_f64, &y);
                let d_psi_ay = DMatrix::identity(self.dim(), self.dim())
                    + displacement.jacobian(&ay);
                let d_psi_y =
                    DMatrix::identity(self.dim(), self.dim()) + displacement.jacobian(&y);
                let inv = d_psi_y
                    .try_inverse()
                    .expect("psi is a diffeomorphism: D psi invertible");
                d_psi_ay * &self.linear_f64 * inv
            }
        }
    }

    /// Inverse evaluation: solves a(y) = x. Perturbed maps use per-point
    /// Newton iteration seeded by the linear inverse; conjugated maps use
    /// the closed-form inverse psi o A^{-1} o psi^{-1}.
    pub fn eval_inverse(&self, x: &[f64]) -> Result<Vec<f64>, MapError> {
        match &self.kind {
            MapKind::Perturbed(p) => {
                if p.is_zero() {
                    return Ok(mat_vec(&self.linear_inv_f64, x));
                }
                let mut y = mat_vec(&self.linear_inv_f64, x);
                for _ in 0..NEWTON_MAX_ITER {
                    let fx = self.eval_lift(&y);
                    let residual: Vec<f64> = fx.iter().zip(x).map(|(a, b)| a - b).collect();
                    let norm = residual.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm < NEWTON_TOL {
                        return Ok(y);
                    }
                    let d = self.derivative(&y);
                    let step = d
                        .lu()
                        .solve(&nalgebra::DVector::from_column_slice(&residual))
                        .expect("derivative invertible near the linear part");
                    for (yi, s) in y.iter_mut().zip(step.iter()) {
                        *yi -= s;
                    }
                }
                let fx = self.eval_lift(&y);
                let residual = fx
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                Err(MapError::NewtonDiverged {
                    tol: NEWTON_TOL,
                    iters: NEWTON_MAX_ITER,
                    residual,
                })
            }
            MapKind::Conjugated { displacement } => {
                let y = psi_inverse(displacement, x);
                let ay = mat_vec(&self.linear_inv_f64, &y);
                Ok(psi_forward(displacement, &ay))
            }
        }
    }

    /// Q(x) = A^{-1}(a(x) - A x), the smooth inhomogeneity of the
    /// conjugacy functional equation. For perturbed maps this is the exact
    /// trigonometric polynomial A^{-1} p.
    pub fn q_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            MapKind::Perturbed(p) => {
                let v = p.eval(x);
                mat_vec(&self.linear_inv_f64, &v)
            }
            MapKind::Conjugated { .. } => {
                let ax = mat_vec(&self.linear_f64, x);
                let fx = self.eval_lift(x);
                let diff: Vec<f64> = fx.iter().zip(&ax).map(|(a, b)| a - b).collect();
                mat_vec(&self.linear_inv_f64, &diff)
            }
        }
    }

    /// Q as an exact trigonometric polynomial, available for perturbed maps.
    pub fn q_poly(&self) -> Option<TrigPoly> {
        match &self.kind {
            MapKind::Perturbed(p) => Some(p.linear_transform(&self.linear_inv_f64)),
            MapKind::Conjugated { .. } => None,
        }
    }

    /// Degree-`degree` Taylor jet of the map at `x` (constant terms are the
    /// image point).
    pub fn jet(&self, x: &[f64], degree: usize) -> Jet {
        match &self.kind {
            MapKind::Perturbed(p) => {
                let mut jet = jet_linear_apply(&self.linear_f64, &jet_identity(x, degree));
                let pj = p.jet(x, degree);
                for (j, pj_i) in jet.iter_mut().zip(pj) {
                    j.add_scaled(&pj_i, Complex64::new(1.0, 0.0));
                }
                jet
            }
            MapKind::Conjugated { displacement } => {
                let n = self.dim();
                let y = psi_inverse(displacement, x);
                // centered inverse of psi at x
                let psi_jet_at_y = psi_jet(displacement, &y, degree);
                let mut inv_jet = jet_inverse(&psi_jet_at_y);
                for (i, p) in inv_jet.iter_mut().enumerate() {
                    p.add_term(vec![0; n], Complex64::new(y[i], 0.0));
                }
                let a_jet = jet_linear_apply(&self.linear_f64, &inv_jet);
                let ay: Vec<f64> = a_jet.iter().map(|p| p.constant_term().re).collect();
                let outer = psi_jet(displacement, &ay, degree);
                jet_compose(&outer, &a_jet)
            }
        }
    }
}

fn psi_forward(displacement: &TrigPoly, y: &[f64]) -> Vec<f64> {
    let u = displacement.eval(y);
    y.iter().zip(u).map(|(a, b)| a + b).collect()
}

/// Newton solve of psi(y) = x for the trigonometric diffeomorphism
/// psi = id + u, to NEWTON_TOL.
fn psi_inverse(displacement: &TrigPoly, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y: Vec<f64> = x.to_vec();
    for _ in 0..NEWTON_MAX_ITER {
        let fx = psi_forward(displacement, &y);
        let residual: Vec<f64> = fx.iter().zip(x).map(|(a, b)| a - b).collect();
        if residual.iter().map(|v| v * v).sum::<f64>().sqrt() < NEWTON_TOL {
            return y;
        }
        let d = DMatrix::identity(n, n) + displacement.jacobian(&y);
        let step = d
            .lu()
            .solve(&nalgebra::DVector::from_column_slice(&residual))
            .expect("D psi invertible for small displacements");
        for (yi, s) in y.iter_mut().zip(step.iter()) {
            *yi -= s;
        }
    }
    y
}

fn psi_jet(displacement: &TrigPoly, y: &[f64], degree: usize) -> Jet {
    let mut jet = jet_identity(y, degree);
    let uj = displacement.jet(y, degree);
    for (j, u) in jet.iter_mut().zip(uj) {
        j.add_scaled(&u, Complex64::new(1.0, 0.0));
    }
    jet
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * x[j]).sum())
        .collect()
}

/// Torus distance between two points (componentwise wrap).
pub fn torus_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(1.0);
            d.min(1.0 - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}
