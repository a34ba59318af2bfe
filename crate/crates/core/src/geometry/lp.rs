//! Small linear programs over `{x : Ax <= b}` backed by `minilp`.

use minilp::{ComparisonOp, Error as LpError, LinearExpr, OptimizationDirection, Problem, Variable};
use nalgebra::{DMatrix, DVector};

use super::GeometryError;

fn add_free_vars(problem: &mut Problem, n: usize, objective: &[f64]) -> Vec<Variable> {
    (0..n)
        .map(|j| problem.add_var(objective[j], (f64::NEG_INFINITY, f64::INFINITY)))
        .collect()
}

fn row_expr(a: &DMatrix<f64>, i: usize, vars: &[Variable]) -> LinearExpr {
    let mut expr = LinearExpr::empty();
    for (j, v) in vars.iter().enumerate() {
        let c = a[(i, j)];
        if c != 0.0 {
            expr.add(*v, c);
        }
    }
    expr
}

/// Center and radius of the largest ball inside `{Ax <= b}`. Rows of `a`
/// must have unit norm.
pub(crate) fn chebyshev_center(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> Result<(DVector<f64>, f64), GeometryError> {
    let n = a.ncols();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let x = add_free_vars(&mut problem, n, &vec![0.0; n]);
    let r = problem.add_var(1.0, (0.0, f64::INFINITY));
    for i in 0..a.nrows() {
        let mut expr = row_expr(a, i, &x);
        expr.add(r, 1.0);
        problem.add_constraint(expr, ComparisonOp::Le, b[i]);
    }
    match problem.solve() {
        Ok(sol) => {
            let center = DVector::from_iterator(n, x.iter().map(|v| *sol.var_value(*v)));
            Ok((center, *sol.var_value(r)))
        }
        Err(LpError::Infeasible) => Err(GeometryError::EmptyInterior),
        Err(LpError::Unbounded) => Err(GeometryError::Unbounded),
    }
}

/// Minimum and maximum of coordinate `j` over `{Ax <= b}`.
pub(crate) fn coordinate_range(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    j: usize,
) -> Result<(f64, f64), GeometryError> {
    let n = a.ncols();
    let mut out = [0.0; 2];
    for (k, dir) in [OptimizationDirection::Minimize, OptimizationDirection::Maximize]
        .into_iter()
        .enumerate()
    {
        let mut objective = vec![0.0; n];
        objective[j] = 1.0;
        let mut problem = Problem::new(dir);
        let x = add_free_vars(&mut problem, n, &objective);
        for i in 0..a.nrows() {
            problem.add_constraint(row_expr(a, i, &x), ComparisonOp::Le, b[i]);
        }
        out[k] = match problem.solve() {
            Ok(sol) => sol.objective(),
            Err(LpError::Unbounded) => return Err(GeometryError::Unbounded),
            Err(LpError::Infeasible) => return Err(GeometryError::EmptyInterior),
        };
    }
    Ok((out[0], out[1]))
}

/// Whether some `x` with `Ax <= b` makes every row in `tight` active (within
/// `tol`).
pub(crate) fn faces_intersect(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    tight: &[usize],
    tol: f64,
) -> bool {
    let n = a.ncols();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let x = add_free_vars(&mut problem, n, &vec![0.0; n]);
    for i in 0..a.nrows() {
        problem.add_constraint(row_expr(a, i, &x), ComparisonOp::Le, b[i]);
    }
    for &i in tight {
        problem.add_constraint(row_expr(a, i, &x), ComparisonOp::Ge, b[i] - tol * (1.0 + b[i].abs()));
    }
    problem.solve().is_ok()
}
