use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::laplacian::build_matting_laplacian;
use super::sparse::SparseSymmetricMatrix;
use super::trimap::{Trimap, TrimapLabel};
use crate::error::{Error, Result};
use crate::imaging::{ensure_same_dims, GrayImage, SoftMask};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MattingParams {
    pub window_radius: usize,
    pub eps: f64,
    /// Penalty weight tying constrained pixels to their trimap value.
    pub lambda_c: f64,
    /// Relative residual at which conjugate gradient stops.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for MattingParams {
    fn default() -> Self {
        MattingParams {
            window_radius: 1,
            eps: 1e-7,
            lambda_c: 100.0,
            tol: 1e-6,
            max_iters: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaSolve {
    pub alpha: SoftMask,
    pub iterations: usize,
    /// Final relative residual `‖b − Ax‖ / ‖b‖`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatteOutcome {
    pub solve: AlphaSolve,
    pub laplacian_ms: f64,
    pub solve_ms: f64,
}

impl MatteOutcome {
    pub fn alpha(&self) -> &SoftMask {
        &self.solve.alpha
    }
}

/// Right-hand side and penalty diagonal: `λ_c` on constrained pixels, with
/// the target 1 on foreground and 0 elsewhere.
fn constraint_system(trimap: &Trimap, lambda_c: f64) -> (Vec<f64>, Vec<f64>) {
    trimap
        .labels()
        .iter()
        .map(|l| match l {
            TrimapLabel::Foreground => (lambda_c, lambda_c),
            TrimapLabel::Background => (lambda_c, 0.0),
            TrimapLabel::Unknown => (0.0, 0.0),
        })
        .unzip()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `(L + λ_c·D) α = λ_c·b` with Jacobi-preconditioned conjugate
/// gradient and clamps the result to `[0, 1]`. `trimap` only has to carry
/// one label per matrix row, so any pixel ordering works.
pub fn solve_alpha(l: &SparseSymmetricMatrix, trimap: &Trimap, params: &MattingParams) -> Result<AlphaSolve> {
    let n = l.dim();
    if trimap.len() != n {
        return Err(Error::DimensionMismatch {
            expected: (n, 1),
            actual: (trimap.width(), trimap.height()),
        });
    }
    if !(params.lambda_c > 0.0) || !params.lambda_c.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "lambda_c must be positive, got {}",
            params.lambda_c
        )));
    }
    if !(params.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", params.tol)));
    }
    let (penalty, rhs) = constraint_system(trimap, params.lambda_c);

    let apply = |x: &[f64], out: &mut [f64]| {
        l.mul_vec_into(x, out);
        for ((o, &p), &xi) in out.iter_mut().zip(&penalty).zip(x) {
            *o += p * xi;
        }
    };
    let inv_diag: Vec<f64> = l
        .diagonal()
        .iter()
        .zip(&penalty)
        .map(|(&d, &p)| {
            let v = d + p;
            if v > 1e-12 {
                1.0 / v
            } else {
                1.0
            }
        })
        .collect();

    // start from the trimap values, 0.5 in the unknown band
    let mut x: Vec<f64> = trimap
        .labels()
        .iter()
        .map(|l| match l {
            TrimapLabel::Foreground => 1.0,
            TrimapLabel::Background => 0.0,
            TrimapLabel::Unknown => 0.5,
        })
        .collect();
    let b_norm = dot(&rhs, &rhs).sqrt();
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut residual = dot(&r, &r).sqrt() / b_norm;
    let mut iterations = 0;

    while residual > params.tol {
        if iterations == params.max_iters {
            return Err(Error::NotConverged { iterations, residual });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        iterations += 1;
        residual = dot(&r, &r).sqrt() / b_norm;
    }

    let alpha = SoftMask::from_clamped(trimap.width(), trimap.height(), x)?;
    Ok(AlphaSolve {
        alpha,
        iterations,
        residual,
    })
}

/// Laplacian construction followed by the constrained solve, with the wall
/// time of each stage.
pub fn matte(img: &GrayImage, trimap: &Trimap, params: &MattingParams) -> Result<MatteOutcome> {
    ensure_same_dims(img.dims(), trimap.dims())?;
    let start = Instant::now();
    let l = build_matting_laplacian(img, params.window_radius, params.eps)?;
    let laplacian_ms = start.elapsed().as_secs_f64() * 1e3;
    let start = Instant::now();
    let solve = solve_alpha(&l, trimap, params)?;
    let solve_ms = start.elapsed().as_secs_f64() * 1e3;
    log::debug!(
        "matte {}x{}: laplacian {laplacian_ms:.2} ms, solve {solve_ms:.2} ms ({} CG iterations)",
        img.width(),
        img.height(),
        solve.iterations
    );
    Ok(MatteOutcome {
        solve,
        laplacian_ms,
        solve_ms,
    })
}
