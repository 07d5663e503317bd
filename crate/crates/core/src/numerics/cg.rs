use super::{
    check_square, dot, norm2, residual_scale, NumericsError, SolverOptions, SolverReport,
    SparseMatrix,
};

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
///
/// `a` must be symmetric positive definite.
pub fn solve_spd(
    a: &SparseMatrix,
    b: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolverReport), NumericsError> {
    check_square(a, b)?;
    let n = b.len();
    let scale = residual_scale(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut rel = norm2(&r) / scale;
    if rel <= opts.tol {
        return Ok((
            x,
            SolverReport {
                iterations: 0,
                final_residual: rel,
                converged: true,
            },
        ));
    }

    let inv_diag: Vec<f64> = a
        .diagonal()
        .into_iter()
        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let cap = opts.iteration_cap(n);

    for iter in 1..=cap {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            // Not positive definite along p.
            return Ok((
                x,
                SolverReport {
                    iterations: iter,
                    final_residual: rel,
                    converged: false,
                },
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        rel = norm2(&r) / scale;
        if rel <= opts.tol {
            return Ok((
                x,
                SolverReport {
                    iterations: iter,
                    final_residual: rel,
                    converged: true,
                },
            ));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    Ok((
        x,
        SolverReport {
            iterations: cap,
            final_residual: rel,
            converged: false,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solves_in_one_iteration() {
        let a = SparseMatrix::identity(4);
        let b = [1.0, -2.0, 3.5, 0.25];
        let (x, report) = solve_spd(&a, &b, &SolverOptions::with_tol(1e-12)).unwrap();
        assert!(report.converged);
        assert!(report.iterations <= 1);
        assert_eq!(x, b.to_vec());
    }

    #[test]
    fn two_by_two_hand_elimination() {
        let a = SparseMatrix::assemble(2, 2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)])
            .unwrap();
        let (x, report) = solve_spd(&a, &[3.0, 3.0], &SolverOptions::with_tol(1e-14)).unwrap();
        assert!(report.converged);
        assert!((x[0] - 1.0).abs() < 1e-13 && (x[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = SparseMatrix::assemble(2, 2, &[(0, 0, 2.0), (1, 1, 5.0)]).unwrap();
        let (x, report) = solve_spd(&a, &[0.0, 0.0], &SolverOptions::default()).unwrap();
        assert_eq!(x, vec![0.0, 0.0]);
        assert!(report.converged);
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_failure() {
        let a = SparseMatrix::assemble(
            3,
            3,
            &[
                (0, 0, 4.0),
                (0, 1, 1.0),
                (1, 0, 1.0),
                (1, 1, 3.0),
                (1, 2, 1.0),
                (2, 1, 1.0),
                (2, 2, 2.0),
            ],
        )
        .unwrap();
        let opts = SolverOptions {
            tol: 1e-15,
            max_iterations: Some(1),
            ..SolverOptions::default()
        };
        let (_, report) = solve_spd(&a, &[1.0, 2.0, 3.0], &opts).unwrap();
        assert!(!report.converged);
        assert_eq!(report.iterations, 1);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = SparseMatrix::identity(3);
        assert!(solve_spd(&a, &[1.0], &SolverOptions::default()).is_err());
    }
}
