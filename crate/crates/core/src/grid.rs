//! Complex-valued functions sampled on a uniform dyadic grid of the
//! n-torus, with discrete Fourier transforms.
//!
//! The grid resolution is a power of two per axis. Unimodular integer
//! matrices map the grid bijectively to itself, so compositions f(Ax) are
//! exact permutations of samples; no interpolation enters any experiment.
//! All reductions use pairwise (tree-order) summation with fixed chunking,
//! so results are bit-identical regardless of thread count.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("resolution {0} is not a power of two")]
    ResolutionNotPowerOfTwo(usize),
    #[error("grid functions have mismatched shape: {0}x{1}^{2} vs {3}x{4}^{5}")]
    ShapeMismatch(usize, usize, usize, usize, usize, usize),
    #[error("frequency cutoff {cutoff} is not below the Nyquist limit {nyquist}")]
    BeyondNyquist { cutoff: i64, nyquist: i64 },
}

/// Deterministic pairwise sum; fixed recursion independent of threading.
pub fn tree_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            tree_sum(&values[..mid]) + tree_sum(&values[mid..])
        }
    }
}

pub fn tree_sum_f64(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let mid = n / 2;
            tree_sum_f64(&values[..mid]) + tree_sum_f64(&values[mid..])
        }
    }
}

/// Scalar function on the grid (j_1/R, ..., j_n/R), x-fastest ordering:
/// index = j_1 + R*(j_2 + R*(j_3 + ...)).
#[derive(Clone, Debug)]
pub struct GridFunction {
    n: usize,
    resolution: usize,
    samples: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(n: usize, resolution: usize, samples: Vec<Complex64>) -> Result<Self, GridError> {
        if !resolution.is_power_of_two() {
            return Err(GridError::ResolutionNotPowerOfTwo(resolution));
        }
        assert_eq!(samples.len(), resolution.pow(n as u32));
        Ok(GridFunction {
            n,
            resolution,
            samples,
        })
    }

    /// Samples `f` at every grid point.
    pub fn sample(n: usize, resolution: usize, f: impl Fn(&[f64]) -> Complex64 + Sync) -> Result<Self, GridError> {
        if !resolution.is_power_of_two() {
            return Err(GridError::ResolutionNotPowerOfTwo(resolution));
        }
        let total = resolution.pow(n as u32);
        let samples: Vec<Complex64> = (0..total)
            .into_par_iter()
            .map(|idx| {
                let mut x = vec![0.0; n];
                let mut rem = idx;
                for xi in x.iter_mut() {
                    *xi = (rem % resolution) as f64 / resolution as f64;
                    rem /= resolution;
                }
                f(&x)
            })
            .collect();
        Ok(GridFunction {
            n,
            resolution,
            samples,
        })
    }

    pub fn sample_real(
        n: usize,
        resolution: usize,
        f: impl Fn(&[f64]) -> f64 + Sync,
    ) -> Result<Self, GridError> {
        Self::sample(n, resolution, |x| Complex64::new(f(x), 0.0))
    }

    pub fn constant(n: usize, resolution: usize, value: Complex64) -> Result<Self, GridError> {
        if !resolution.is_power_of_two() {
            return Err(GridError::ResolutionNotPowerOfTwo(resolution));
        }
        Ok(GridFunction {
            n,
            resolution,
            samples: vec![value; resolution.pow(n as u32)],
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<(), GridError> {
        if self.n != other.n || self.resolution != other.resolution {
            return Err(GridError::ShapeMismatch(
                1,
                self.resolution,
                self.n,
                1,
                other.resolution,
                other.n,
            ));
        }
        Ok(())
    }

    /// Multi-index of a flat index, x-fastest.
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.n];
        for o in out.iter_mut() {
            *o = idx % self.resolution;
            idx /= self.resolution;
        }
        out
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        let mut idx = 0usize;
        for &m in multi.iter().rev() {
            idx = idx * self.resolution + (m % self.resolution);
        }
        idx
    }

    /// Mean of the samples (tree order).
    pub fn mean(&self) -> Complex64 {
        tree_sum(&self.samples) / self.samples.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// L2 norm with respect to the normalized grid measure.
    pub fn l2_norm(&self) -> f64 {
        let sq: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        (tree_sum_f64(&sq) / self.samples.len() as f64).sqrt()
    }

    /// Forward DFT: coefficient at frequency m is
    /// (1/R^n) sum_x f(x) e^{-2 pi i m.x}; the output grid holds the
    /// coefficient of frequency `signed_frequency(index)` at each index.
    pub fn dft(&self) -> GridFunction {
        let mut data = self.samples.clone();
        fft_axes(&mut data, self.n, self.resolution, false);
        let scale = 1.0 / data.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
        GridFunction {
            n: self.n,
            resolution: self.resolution,
            samples: data,
        }
    }

    /// Inverse DFT matching [`GridFunction::dft`].
    pub fn idft(&self) -> GridFunction {
        let mut data = self.samples.clone();
        fft_axes(&mut data, self.n, self.resolution, true);
        GridFunction {
            n: self.n,
            resolution: self.resolution,
            samples: data,
        }
    }

    /// Signed frequency vector of a flat index in the Fourier grid, each
    /// component in [-R/2, R/2).
    pub fn signed_frequency(&self, idx: usize) -> Vec<i64> {
        self.multi_index(idx)
            .into_iter()
            .map(|j| {
                if j < self.resolution / 2 {
                    j as i64
                } else {
                    j as i64 - self.resolution as i64
                }
            })
            .collect()
    }

    /// Index in the Fourier grid of a signed frequency (reduced mod R).
    pub fn frequency_index(&self, m: &[i64]) -> usize {
        let r = self.resolution as i64;
        let multi: Vec<usize> = m.iter().map(|&x| (((x % r) + r) % r) as usize).collect();
        self.flat_index(&multi)
    }

    /// Composition with the grid permutation induced by an integer matrix:
    /// returns g with g(x) = f(Ax mod 1). `rows` are the matrix rows
    /// reduced mod R.
    pub fn compose_integer_matrix(&self, rows: &[Vec<i64>]) -> GridFunction {
        let r = self.resolution;
        let n = self.n;
        let samples: Vec<Complex64> = (0..self.samples.len())
            .into_par_iter()
            .map(|idx| {
                let j = self.multi_index(idx);
                let mut target = vec![0usize; n];
                for (i, t) in target.iter_mut().enumerate() {
                    let mut acc: i64 = 0;
                    for (l, &jl) in j.iter().enumerate() {
                        acc += rows[i][l] * jl as i64;
                    }
                    *t = acc.rem_euclid(r as i64) as usize;
                }
                self.samples[self.flat_index(&target)]
            })
            .collect();
        GridFunction {
            n,
            resolution: r,
            samples,
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64 + Sync) -> GridFunction {
        GridFunction {
            n: self.n,
            resolution: self.resolution,
            samples: self.samples.par_iter().map(|&z| f(z)).collect(),
        }
    }
}

/// In-place FFT along every axis of an n-dimensional array stored
/// x-fastest with equal extent per axis.
fn fft_axes(data: &mut [Complex64], n: usize, resolution: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(resolution)
    } else {
        planner.plan_fft_forward(resolution)
    };
    let total = data.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); resolution];
    for axis in 0..n {
        let stride = resolution.pow(axis as u32);
        let lines = total / resolution;
        for line in 0..lines {
            // base index of this 1-D line through the array
            let block = line / stride;
            let offset = line % stride;
            let base = block * stride * resolution + offset;
            for (i, b) in buf.iter_mut().enumerate() {
                *b = data[base + i * stride];
            }
            fft.process(&mut buf);
            for (i, b) in buf.iter().enumerate() {
                data[base + i * stride] = *b;
            }
        }
    }
}

/// Vector-valued grid function (one scalar grid per coordinate).
#[derive(Clone, Debug)]
pub struct VectorGridFunction {
    pub components: Vec<GridFunction>,
}

impl VectorGridFunction {
    pub fn zeros(n: usize, resolution: usize, coords: usize) -> Result<Self, GridError> {
        Ok(VectorGridFunction {
            components: (0..coords)
                .map(|_| GridFunction::constant(n, resolution, Complex64::new(0.0, 0.0)))
                .collect::<Result<Vec<_>, _>>()?,
        })
    }

    pub fn coords(&self) -> usize {
        self.components.len()
    }

    pub fn value_at(&self, idx: usize) -> Vec<f64> {
        self.components.iter().map(|c| c.samples[idx].re).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        let len = self.components[0].len();
        (0..len)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c.samples[i].re * c.samples[i].re + c.samples[i].im * c.samples[i].im)
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }
}
