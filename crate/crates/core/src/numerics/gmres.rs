use super::{
    check_square, dot, norm2, residual_scale, Ilu0, NumericsError, SolverOptions, SolverReport,
    SparseMatrix,
};

enum Preconditioner {
    Ilu(Ilu0),
    Jacobi(Vec<f64>),
}

impl Preconditioner {
    fn for_matrix(a: &SparseMatrix) -> Self {
        match Ilu0::factor(a) {
            Some(ilu) => Self::Ilu(ilu),
            None => {
                log::debug!("ILU(0) pivot breakdown, falling back to Jacobi");
                Self::Jacobi(
                    a.diagonal()
                        .into_iter()
                        .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
                        .collect(),
                )
            }
        }
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        match self {
            Self::Ilu(ilu) => {
                let mut z = v.to_vec();
                ilu.apply(&mut z);
                z
            }
            Self::Jacobi(inv) => v.iter().zip(inv).map(|(a, b)| a * b).collect(),
        }
    }
}

/// Restarted GMRES, right-preconditioned with ILU(0) (Jacobi when the
/// incomplete factorization breaks down), from a zero initial guess.
pub fn solve_general(
    a: &SparseMatrix,
    b: &[f64],
    opts: &SolverOptions,
) -> Result<(Vec<f64>, SolverReport), NumericsError> {
    check_square(a, b)?;
    let n = b.len();
    let scale = residual_scale(b);
    let cap = opts.iteration_cap(n);
    let m = opts.restart.max(1).min(n.max(1));
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut rel = norm2(&r) / scale;
    let mut iterations = 0;
    if rel <= opts.tol {
        return Ok((
            x,
            SolverReport {
                iterations,
                final_residual: rel,
                converged: true,
            },
        ));
    }

    let precond = Preconditioner::for_matrix(a);
    let mut w = vec![0.0; n];

    loop {
        let beta = norm2(&r);
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        let mut z_basis: Vec<Vec<f64>> = Vec::with_capacity(m);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns, already rotated into upper-triangular form.
        let mut hess: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut cs: Vec<f64> = Vec::with_capacity(m);
        let mut sn: Vec<f64> = Vec::with_capacity(m);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut breakdown = false;

        for j in 0..m {
            let zj = precond.apply(&basis[j]);
            a.matvec_into(&zj, &mut w);
            z_basis.push(zj);
            let mut h = vec![0.0; j + 2];
            for (i, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[i] = hij;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= hij * vk;
                }
            }
            let h_next = norm2(&w);
            h[j + 1] = h_next;

            for i in 0..j {
                let (c, s) = (cs[i], sn[i]);
                let (hi, hi1) = (h[i], h[i + 1]);
                h[i] = c * hi + s * hi1;
                h[i + 1] = -s * hi + c * hi1;
            }
            let denom = h[j].hypot(h[j + 1]);
            let (c, s) = if denom > 0.0 {
                (h[j] / denom, h[j + 1] / denom)
            } else {
                (1.0, 0.0)
            };
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            g[j + 1] = -s * g[j];
            g[j] *= c;
            hess.push(h);
            iterations += 1;

            let estimate = g[j + 1].abs() / scale;
            breakdown = h_next <= 1e-14 * beta;
            if breakdown || estimate <= opts.tol || iterations >= cap {
                break;
            }
            basis.push(w.iter().map(|v| v / h_next).collect());
        }

        let k = hess.len();
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= hess[l][i] * y[l];
            }
            let d = hess[i][i];
            y[i] = if d.abs() > 0.0 { s / d } else { 0.0 };
        }
        for (zi, yi) in z_basis.iter().zip(&y) {
            for (xk, zk) in x.iter_mut().zip(zi) {
                *xk += yi * zk;
            }
        }

        a.matvec_into(&x, &mut w);
        for i in 0..n {
            r[i] = b[i] - w[i];
        }
        let previous = rel;
        rel = norm2(&r) / scale;
        if !rel.is_finite() {
            return Ok((
                x,
                SolverReport {
                    iterations,
                    final_residual: rel,
                    converged: false,
                },
            ));
        }
        if rel <= opts.tol {
            return Ok((
                x,
                SolverReport {
                    iterations,
                    final_residual: rel,
                    converged: true,
                },
            ));
        }
        let stagnated = rel >= previous * (1.0 - 1e-12);
        if iterations >= cap || stagnated || (breakdown && rel >= previous) {
            return Ok((
                x,
                SolverReport {
                    iterations,
                    final_residual: rel,
                    converged: false,
                },
            ));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_returns_rhs() {
        let a = SparseMatrix::identity(3);
        let b = [1.0, 2.0, -3.0];
        let (x, report) = solve_general(&a, &b, &SolverOptions::with_tol(1e-12)).unwrap();
        assert!(report.converged);
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
    }

    #[test]
    fn upper_triangular_matches_back_substitution() {
        let dense = [[2.0, -1.0, 3.0], [0.0, 4.0, 1.0], [0.0, 0.0, -5.0]];
        let b = [1.0, 2.0, 3.0];
        let mut oracle = [0.0; 3];
        for i in (0..3).rev() {
            let s: f64 = (i + 1..3).map(|j| dense[i][j] * oracle[j]).sum();
            oracle[i] = (b[i] - s) / dense[i][i];
        }
        let mut t = Vec::new();
        for (i, row) in dense.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        let a = SparseMatrix::assemble(3, 3, &t).unwrap();
        let (x, report) = solve_general(&a, &b, &SolverOptions::with_tol(1e-13)).unwrap();
        assert!(report.converged);
        for (xi, oi) in x.iter().zip(&oracle) {
            assert!((xi - oi).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_reports_non_convergence() {
        let a = SparseMatrix::assemble(3, 3, &[(0, 0, 1.0), (1, 1, 2.0), (1, 0, 1.0)]).unwrap();
        let (_, report) =
            solve_general(&a, &[1.0, 1.0, 1.0], &SolverOptions::with_tol(1e-10)).unwrap();
        assert!(!report.converged);
        assert!(report.final_residual > 1e-10);
    }

    #[test]
    fn nonsymmetric_convection_diffusion() {
        let n = 60;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.4));
            }
            if i + 1 < n {
                t.push((i, i + 1, -0.6));
            }
        }
        let a = SparseMatrix::assemble(n, n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let opts = SolverOptions {
            tol: 1e-11,
            restart: 5,
            max_iterations: None,
        };
        let (x, report) = solve_general(&a, &b, &opts).unwrap();
        assert!(report.converged, "{report:?}");
        let ax = a.matvec(&x);
        let res: f64 = ax
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(res / norm2(&b) <= 1e-11);
    }
}
