//! Deterministic random matrices from named ChaCha streams.

use std::str::FromStr;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::SquareMatrix;

pub const DEFAULT_SEED: u64 = 42;
pub const MAX_DIM: usize = 8;

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Random source keyed by `(seed, stream)`; equal keys give equal output.
pub struct MatrixGen {
    rng: ChaCha8Rng,
}

impl MatrixGen {
    pub fn new(seed: u64, stream: &str) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(fnv1a(stream));
        Self { rng }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    /// Uniform in the open disc `|z| < radius`.
    pub fn in_disc(&mut self, radius: f64) -> Complex<f64> {
        let r = radius * self.uniform(0.0, 1.0).sqrt();
        let t = self.uniform(0.0, std::f64::consts::TAU);
        Complex::from_polar(r, t)
    }

    /// Complex Gaussian matrix scaled to unit operator norm.
    pub fn random<T: Real>(&mut self, d: usize) -> SquareMatrix<T> {
        let m = SquareMatrix::<f64>::from_fn(d, |_, _| Complex::new(self.normal(), self.normal()));
        normalized(m).cast()
    }

    /// Hermitian matrix of unit operator norm.
    pub fn hermitian<T: Real>(&mut self, d: usize) -> SquareMatrix<T> {
        let x = SquareMatrix::<f64>::from_fn(d, |_, _| Complex::new(self.normal(), self.normal()));
        let h = (&x + &x.adjoint()).scale_real(0.5);
        normalized(h).cast()
    }

    /// Two unit-norm polynomials in one Hermitian matrix.
    pub fn commuting_pair<T: Real>(&mut self, d: usize) -> (SquareMatrix<T>, SquareMatrix<T>) {
        let h: SquareMatrix<f64> = self.hermitian(d);
        let c: Vec<f64> = (0..3).map(|_| self.normal()).collect();
        let h2 = h.matmul(&h);
        let mut p = SquareMatrix::scalar(d, Complex::new(c[0], 0.0));
        p.axpy_real(c[1], &h);
        p.axpy_real(c[2], &h2);
        (h.cast(), normalized(p).cast())
    }

    /// `V diag(λ) V⁻¹` with a well-conditioned `V` and `λ` in the unit disc.
    pub fn diagonalizable<T: Real>(&mut self, d: usize) -> SquareMatrix<T> {
        let (v, lam) = self.eigen_pair(d);
        let vi = v.inverse().expect("perturbed identity is invertible");
        normalized(v.mul_diag_right(&lam).matmul(&vi)).cast()
    }

    /// Eigenvector matrix `I + 0.3 X/‖X‖` and eigenvalues in the unit disc.
    pub fn eigen_pair(&mut self, d: usize) -> (SquareMatrix<f64>, Vec<Complex<f64>>) {
        let x: SquareMatrix<f64> = self.random(d);
        let mut v = SquareMatrix::identity(d);
        v.axpy_real(0.3, &x);
        let lam = (0..d).map(|_| self.in_disc(1.0)).collect();
        (v, lam)
    }
}

fn normalized(m: SquareMatrix<f64>) -> SquareMatrix<f64> {
    let n = m.opnorm();
    if n > 0.0 {
        m.scale_real(1.0 / n)
    } else {
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixKind {
    Hermitian,
    Random,
    CommutingPair,
    Diagonalizable,
}

impl FromStr for MatrixKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hermitian" => Ok(Self::Hermitian),
            "random" => Ok(Self::Random),
            "commuting-pair" => Ok(Self::CommutingPair),
            "diagonalizable" => Ok(Self::Diagonalizable),
            _ => Err(Error::Invalid(format!("unknown matrix kind '{s}'"))),
        }
    }
}

/// One matrix, or two for `CommutingPair`.
pub fn gen_matrix<T: Real>(kind: MatrixKind, dim: usize, seed: u64) -> Result<Vec<SquareMatrix<T>>> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Invalid(format!("dimension must be in 1..={MAX_DIM}, got {dim}")));
    }
    let mut g = MatrixGen::new(seed, "gen");
    Ok(match kind {
        MatrixKind::Hermitian => vec![g.hermitian(dim)],
        MatrixKind::Random => vec![g.random(dim)],
        MatrixKind::CommutingPair => {
            let (a, b) = g.commuting_pair(dim);
            vec![a, b]
        }
        MatrixKind::Diagonalizable => vec![g.diagonalizable(dim)],
    })
}
