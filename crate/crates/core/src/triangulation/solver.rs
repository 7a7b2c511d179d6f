//! Volume maximisation over the angle polytope.
//!
//! The constraint set `{M·θ = b}` is parametrised as `θ = θ_p + Z·u` with
//! `Z` an orthonormal basis of `ker M`. The objective `Σ Л(θ)` is strictly
//! concave there, so Newton's method with a backtracking line search that
//! keeps every angle positive converges to the unique maximiser.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{
    gluing_equations, gluing_residual, lobachevsky, lobachevsky_derivative, AngleStructure,
    LayeredTriangulation, ShapeSolution,
};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Stop once the projected gradient norm is below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: super::SOLVER_TOLERANCE,
            max_iterations: 200,
        }
    }
}

/// The affine hull of the angle polytope, `θ = θ_p + Z·u` with `Z`
/// orthonormal.
#[derive(Clone, Debug)]
pub struct Affine {
    particular: DVector<f64>,
    basis: DMatrix<f64>,
}

impl Affine {
    fn new(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<Affine> {
        let particular = m
            .clone()
            .svd(true, true)
            .solve(b, 1e-10)
            .map_err(|e| Error::Internal(format!("least squares failed: {e}")))?;
        if (m * &particular - b).amax() > 1e-9 {
            return Err(Error::NoInteriorPoint);
        }
        let gram = m.transpose() * m;
        let eig = SymmetricEigen::new(gram);
        let scale = eig.eigenvalues.amax().max(1.0);
        let null: Vec<DVector<f64>> = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l.abs() < 1e-9 * scale)
            .map(|(i, _)| eig.eigenvectors.column(i).into_owned())
            .collect();
        let basis = if null.is_empty() {
            DMatrix::zeros(m.ncols(), 0)
        } else {
            DMatrix::from_columns(&null)
        };
        Ok(Affine { particular, basis })
    }

    /// Built from the gluing equations of `t`.
    pub fn of(t: &LayeredTriangulation) -> Result<Affine> {
        let eq = gluing_equations(t);
        Affine::new(&eq.matrix(), &eq.rhs_vector())
    }

    pub fn project(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.particular + &self.basis * (self.basis.transpose() * (y - &self.particular))
    }

    /// Dimension of the polytope.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// The direction `Z·u` in angle coordinates.
    pub fn direction(&self, u: &[f64]) -> DVector<f64> {
        &self.basis * DVector::from_column_slice(u)
    }
}

fn objective(x: &DVector<f64>) -> f64 {
    x.iter().map(|&a| lobachevsky(a)).sum()
}

/// Largest `α ≤ 1` keeping `x + α·dx` strictly positive, with a margin.
fn max_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    let mut alpha: f64 = 1.0;
    for (xi, di) in x.iter().zip(dx.iter()) {
        if *di < 0.0 {
            alpha = alpha.min(0.99 * xi / -di);
        }
    }
    alpha
}

/// Finds a point with all angles positive by driving `t` below zero in
/// `min t − μ Σ log(θ_i + t)` for a decreasing barrier weight `μ`.
fn phase_one(space: &Affine, start: &DVector<f64>) -> Result<DVector<f64>> {
    let z = &space.basis;
    let dim = z.ncols();
    let mut x = start.clone();
    let mut t = 1.0 - x.min().min(0.0);
    let ones = DVector::from_element(x.len(), 1.0);
    let mut mu = 1.0;
    while mu > 1e-14 {
        for _ in 0..100 {
            if t < 0.0 {
                return Ok(x);
            }
            let s = x.map(|v| v + t);
            let inv = s.map(|v| 1.0 / v);
            let inv2 = s.map(|v| 1.0 / (v * v));
            // Gradient and Hessian in the coordinates (u, t).
            let mut grad = DVector::zeros(dim + 1);
            grad.rows_mut(0, dim).copy_from(&(-mu * (z.transpose() * &inv)));
            grad[dim] = 1.0 - mu * inv.sum();
            let zd = DMatrix::from_diagonal(&inv2);
            let mut hess = DMatrix::zeros(dim + 1, dim + 1);
            hess.view_mut((0, 0), (dim, dim)).copy_from(&(mu * (z.transpose() * &zd * z)));
            let cross = mu * (z.transpose() * &inv2);
            hess.view_mut((0, dim), (dim, 1)).copy_from(&cross);
            hess.view_mut((dim, 0), (1, dim)).copy_from(&cross.transpose());
            hess[(dim, dim)] = mu * inv2.sum();
            let step = match hess.cholesky() {
                Some(ch) => -ch.solve(&grad),
                None => -grad.clone(),
            };
            let decrement = -grad.dot(&step);
            if decrement < 1e-12 {
                break;
            }
            let dx = z * step.rows(0, dim);
            let dt = step[dim];
            let ds = &dx + &ones * dt;
            let mut alpha = max_step(&s, &ds);
            let phi = |x: &DVector<f64>, t: f64| t - mu * x.map(|v| (v + t).ln()).sum();
            let base = phi(&x, t);
            loop {
                let xn = &x + &dx * alpha;
                let tn = t + alpha * dt;
                if phi(&xn, tn) <= base - 1e-4 * alpha * decrement || alpha < 1e-14 {
                    x = xn;
                    t = tn;
                    break;
                }
                alpha *= 0.5;
            }
        }
        mu *= 0.1;
    }
    if t < 0.0 {
        Ok(x)
    } else {
        Err(Error::NoInteriorPoint)
    }
}

pub fn solve_geometric(t: &LayeredTriangulation, tol: f64) -> Result<(AngleStructure, ShapeSolution)> {
    solve_geometric_with(
        t,
        SolverOptions {
            tolerance: tol,
            ..SolverOptions::default()
        },
    )
}

pub fn solve_geometric_with(
    t: &LayeredTriangulation,
    opts: SolverOptions,
) -> Result<(AngleStructure, ShapeSolution)> {
    if !(opts.tolerance > 0.0) {
        return Err(Error::Internal("solver tolerance must be positive".into()));
    }
    let eq = gluing_equations(t);
    let space = Affine::new(&eq.matrix(), &eq.rhs_vector())?;
    let z = &space.basis;
    let n = eq.tetrahedra;
    let mut x = space.project(&DVector::from_element(3 * n, PI / 3.0));
    if x.min() <= 0.0 {
        x = phase_one(&space, &x)?;
    }

    let mut iterations = 0;
    loop {
        let g = x.map(lobachevsky_derivative);
        let rg = z.transpose() * &g;
        let gnorm = rg.norm();
        if gnorm < opts.tolerance {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NonConvergence {
                iterations,
                gradient: gnorm,
            });
        }
        iterations += 1;

        let curvature = DMatrix::from_diagonal(&x.map(|a| a.cos() / a.sin()));
        let neg_hess = z.transpose() * curvature * z;
        let mut d = match neg_hess.cholesky() {
            Some(ch) => ch.solve(&rg),
            None => rg.clone(),
        };
        if rg.dot(&d) <= 0.0 {
            d = rg.clone();
        }
        let dx = z * &d;
        let slope = rg.dot(&d);
        let mut alpha = max_step(&x, &dx);
        let f0 = objective(&x);
        loop {
            let xn = &x + &dx * alpha;
            if objective(&xn) >= f0 + 1e-4 * alpha * slope {
                x = xn;
                break;
            }
            if alpha < 1e-3 && gnorm < 1e-6 {
                // Near the optimum the objective change is below rounding;
                // take the Newton step itself.
                x = &x + &dx * max_step(&x, &dx);
                break;
            }
            if alpha < 1e-16 {
                return Err(Error::NonConvergence {
                    iterations,
                    gradient: gnorm,
                });
            }
            alpha *= 0.5;
        }
    }

    // A few extra full Newton steps drive the gradient to rounding level,
    // which the complex residual needs on thin tetrahedra.
    let mut best = (z.transpose() * x.map(lobachevsky_derivative)).norm();
    for _ in 0..5 {
        let curvature = DMatrix::from_diagonal(&x.map(|a| a.cos() / a.sin()));
        let Some(ch) = (z.transpose() * curvature * z).cholesky() else {
            break;
        };
        let rg = z.transpose() * x.map(lobachevsky_derivative);
        let dx = z * ch.solve(&rg);
        let xn = &x + &dx * max_step(&x, &dx);
        let gn = (z.transpose() * xn.map(lobachevsky_derivative)).norm();
        if gn >= best {
            break;
        }
        best = gn;
        x = xn;
    }

    let angles = AngleStructure::from_flat(x.as_slice());
    let shapes = angles.shapes();
    let residual = gluing_residual(t, &shapes);
    Ok((
        angles,
        ShapeSolution {
            shapes,
            residual,
            iterations,
        },
    ))
}
