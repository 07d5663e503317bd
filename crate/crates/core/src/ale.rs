//! ALE map construction by harmonic extension and per-slab domain velocity.
//!
//! The current configuration is the image of the reference mesh under a P1
//! map. Each displacement component is extended into the interior by a
//! discrete Laplace solve with the boundary displacement as Dirichlet data.
//! Within a time slab the map varies linearly in time, so the domain
//! velocity is constant per node.

use thiserror::Error;

use crate::mesh::{min_signed_area, BoundaryTag, Point, ReferenceMesh};
use crate::numerics::{solve_spd, NumericsError, SolverOptions, SolverReport, SparseMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AleError {
    #[error("harmonic extension solve did not converge (residual {:.3e} after {} iterations)", .0.final_residual, .0.iterations)]
    SolverFailure(SolverReport),
    #[error("deformed mesh is tangled: minimum signed area {min_area:.3e}")]
    InvalidMesh { min_area: f64 },
    #[error("time {t} outside slab [{t_old}, {t_new}]")]
    OutsideSlab { t: f64, t_old: f64, t_new: f64 },
    #[error("time step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Node positions at both ends of one time slab and the resulting domain velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct AleState {
    pub y_old: Vec<Point>,
    pub y_new: Vec<Point>,
    pub w: Vec<Point>,
    pub t_old: f64,
    pub dt: f64,
}

impl AleState {
    /// Slab from `y_old` at `t_old` to `y_new` at `t_old + dt`.
    ///
    /// Fails when `dt ≤ 0` or when `y_new` tangles the mesh.
    pub fn new(
        mesh: &ReferenceMesh,
        y_old: Vec<Point>,
        y_new: Vec<Point>,
        t_old: f64,
        dt: f64,
    ) -> Result<Self, AleError> {
        if !(dt > 0.0) {
            return Err(AleError::NonPositiveStep(dt));
        }
        for len in [y_old.len(), y_new.len()] {
            if len != mesh.num_nodes() {
                return Err(AleError::LengthMismatch {
                    expected: mesh.num_nodes(),
                    actual: len,
                });
            }
        }
        let min_area = min_signed_area(mesh, &y_new);
        if !(min_area > 0.0) {
            return Err(AleError::InvalidMesh { min_area });
        }
        let w = domain_velocity(&y_old, &y_new, dt)?;
        Ok(Self {
            y_old,
            y_new,
            w,
            t_old,
            dt,
        })
    }

    /// Motionless slab on the reference configuration.
    pub fn at_rest(mesh: &ReferenceMesh, t_old: f64, dt: f64) -> Result<Self, AleError> {
        Self::new(
            mesh,
            mesh.nodes().to_vec(),
            mesh.nodes().to_vec(),
            t_old,
            dt,
        )
    }

    pub fn t_new(&self) -> f64 {
        self.t_old + self.dt
    }

    /// Node positions at time `t` inside the slab.
    pub fn interpolate(&self, t: f64) -> Result<Vec<Point>, AleError> {
        interpolate_map(self, t)
    }
}

/// `(y_new − y_old) / dt` per node.
pub fn domain_velocity(y_old: &[Point], y_new: &[Point], dt: f64) -> Result<Vec<Point>, AleError> {
    if !(dt > 0.0) {
        return Err(AleError::NonPositiveStep(dt));
    }
    if y_old.len() != y_new.len() {
        return Err(AleError::LengthMismatch {
            expected: y_old.len(),
            actual: y_new.len(),
        });
    }
    Ok(y_old
        .iter()
        .zip(y_new)
        .map(|(a, b)| [(b[0] - a[0]) / dt, (b[1] - a[1]) / dt])
        .collect())
}

/// Linear-in-time map on the slab:
/// `((t − t^k)/Δt)·y_new − ((t − t^{k+1})/Δt)·y_old`.
pub fn interpolate_map(ale: &AleState, t: f64) -> Result<Vec<Point>, AleError> {
    let (t_old, t_new) = (ale.t_old, ale.t_new());
    let slack = 1e-12 * ale.dt.max(t_new.abs());
    if t < t_old - slack || t > t_new + slack {
        return Err(AleError::OutsideSlab { t, t_old, t_new });
    }
    let a = (t - t_old) / ale.dt;
    // (t − t^{k+1})/Δt, written so the endpoint t = t^k returns y_old exactly.
    let b = a - 1.0;
    Ok(ale
        .y_old
        .iter()
        .zip(&ale.y_new)
        .map(|(yo, yn)| [a * yn[0] - b * yo[0], a * yn[1] - b * yo[1]])
        .collect())
}

/// Finite-difference ALE derivative of a field sampled on one moving node,
/// minus its Eulerian expression `∂f/∂t + w·∇f`.
///
/// Test utility for checking the ALE/Eulerian derivative relation on
/// manufactured fields.
pub fn ale_derivative_residual(
    f_old: f64,
    f_new: f64,
    dt: f64,
    f_eulerian_t: f64,
    grad_f: Point,
    w: Point,
) -> f64 {
    let ale_derivative = (f_new - f_old) / dt;
    (ale_derivative - (f_eulerian_t + w[0] * grad_f[0] + w[1] * grad_f[1])).abs()
}

/// Harmonic extension operator on a fixed reference mesh.
///
/// The reference Laplacian and its interior/boundary split are assembled
/// once; each extension is two conjugate-gradient solves.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    interior: Vec<usize>,
    /// Node → position in `interior`, or `usize::MAX` for boundary nodes.
    interior_index: Vec<usize>,
    /// Interior-interior block of the stiffness matrix.
    k_ii: SparseMatrix,
    /// Interior-boundary block, columns indexed by node.
    k_ib: SparseMatrix,
    options: SolverOptions,
}

impl HarmonicExtension {
    pub fn new(mesh: &ReferenceMesh) -> Self {
        Self::with_options(mesh, SolverOptions::with_tol(1e-13))
    }

    pub fn with_options(mesh: &ReferenceMesh, options: SolverOptions) -> Self {
        let n = mesh.num_nodes();
        let interior: Vec<usize> = (0..n).filter(|&i| !mesh.is_boundary(i)).collect();
        let mut interior_index = vec![usize::MAX; n];
        for (k, &node) in interior.iter().enumerate() {
            interior_index[node] = k;
        }

        let nodes = mesh.nodes();
        let mut t_ii = Vec::new();
        let mut t_ib = Vec::new();
        for tri in mesh.triangles() {
            let grads = p1_gradients([nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]]);
            for a in 0..3 {
                let row = interior_index[tri[a]];
                if row == usize::MAX {
                    continue;
                }
                for b in 0..3 {
                    let k = grads.area
                        * (grads.grad[a][0] * grads.grad[b][0]
                            + grads.grad[a][1] * grads.grad[b][1]);
                    let col = interior_index[tri[b]];
                    if col == usize::MAX {
                        t_ib.push((row, tri[b], k));
                    } else {
                        t_ii.push((row, col, k));
                    }
                }
            }
        }
        let ni = interior.len();
        let k_ii = SparseMatrix::assemble(ni, ni, &t_ii).expect("interior indices in range");
        let k_ib = SparseMatrix::assemble(ni, n, &t_ib).expect("node indices in range");
        Self {
            interior,
            interior_index,
            k_ii,
            k_ib,
            options,
        }
    }

    /// Extends the boundary entries of `boundary_disp` (one entry per node;
    /// interior entries are ignored) harmonically into the interior.
    pub fn extend(&self, boundary_disp: &[Point]) -> Result<Vec<Point>, AleError> {
        let n = self.interior_index.len();
        if boundary_disp.len() != n {
            return Err(AleError::LengthMismatch {
                expected: n,
                actual: boundary_disp.len(),
            });
        }
        let solve_component = |c: usize| -> Result<Vec<f64>, AleError> {
            let g: Vec<f64> = (0..n)
                .map(|i| {
                    if self.interior_index[i] == usize::MAX {
                        boundary_disp[i][c]
                    } else {
                        0.0
                    }
                })
                .collect();
            let rhs: Vec<f64> = self.k_ib.matvec(&g).into_iter().map(|v| -v).collect();
            let (x, report) = solve_spd(&self.k_ii, &rhs, &self.options)?;
            if !report.converged {
                return Err(AleError::SolverFailure(report));
            }
            Ok(x)
        };
        let (z, r) = rayon::join(|| solve_component(0), || solve_component(1));
        let (z, r) = (z?, r?);

        let mut out = boundary_disp.to_vec();
        for (k, &node) in self.interior.iter().enumerate() {
            out[node] = [z[k], r[k]];
        }
        Ok(out)
    }
}

/// Harmonic extension of boundary displacement data into the interior.
pub fn harmonic_extension(
    mesh: &ReferenceMesh,
    boundary_disp: &[Point],
) -> Result<Vec<Point>, AleError> {
    HarmonicExtension::new(mesh).extend(boundary_disp)
}

/// Boundary displacement induced by a radial wall displacement `eta`
/// (one value per wall node).
///
/// Wall nodes move by `(0, η)`; axis nodes stay put; inflow and outflow
/// nodes keep their `z` and move radially by the adjacent wall-corner
/// displacement scaled linearly from 0 at the axis.
pub fn wall_boundary_displacement(mesh: &ReferenceMesh, eta: &[f64]) -> Vec<Point> {
    let wall = mesh.wall_nodes();
    assert_eq!(eta.len(), wall.len(), "one displacement per wall node");
    let radius = mesh.radius();
    let (eta_in, eta_out) = (eta[0], eta[eta.len() - 1]);
    let mut disp = vec![[0.0, 0.0]; mesh.num_nodes()];
    for (node, d) in disp.iter_mut().enumerate() {
        let r = mesh.nodes()[node][1];
        if mesh.has_tag(node, BoundaryTag::Inflow) {
            *d = [0.0, eta_in * r / radius];
        } else if mesh.has_tag(node, BoundaryTag::Outflow) {
            *d = [0.0, eta_out * r / radius];
        }
    }
    for (&node, &e) in wall.iter().zip(eta) {
        disp[node] = [0.0, e];
    }
    disp
}

/// Reference coordinates plus the harmonic extension of the wall displacement.
pub fn deformed_coordinates(
    mesh: &ReferenceMesh,
    extension: &HarmonicExtension,
    eta: &[f64],
) -> Result<Vec<Point>, AleError> {
    let disp = extension.extend(&wall_boundary_displacement(mesh, eta))?;
    Ok(mesh
        .nodes()
        .iter()
        .zip(disp)
        .map(|(y, d)| [y[0] + d[0], y[1] + d[1]])
        .collect())
}

/// Constant gradients of the three P1 basis functions on a triangle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct P1Gradients {
    pub area: f64,
    pub grad: [Point; 3],
}

pub(crate) fn p1_gradients(p: [Point; 3]) -> P1Gradients {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let inv = 1.0 / det;
    let grad = [
        [(p[1][1] - p[2][1]) * inv, (p[2][0] - p[1][0]) * inv],
        [(p[2][1] - p[0][1]) * inv, (p[0][0] - p[2][0]) * inv],
        [(p[0][1] - p[1][1]) * inv, (p[1][0] - p[0][0]) * inv],
    ];
    P1Gradients {
        area: 0.5 * det,
        grad,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_channel_mesh;

    fn mesh() -> ReferenceMesh {
        build_channel_mesh(5.0, 0.5, 20, 8).unwrap()
    }

    #[test]
    fn p1_gradients_reproduce_linear_function() {
        let p = [[0.1, 0.2], [1.0, 0.4], [0.3, 1.1]];
        let g = p1_gradients(p);
        let f = |x: Point| 2.0 * x[0] - 3.0 * x[1] + 0.5;
        let grad: Point = [
            (0..3).map(|a| f(p[a]) * g.grad[a][0]).sum(),
            (0..3).map(|a| f(p[a]) * g.grad[a][1]).sum(),
        ];
        assert!((grad[0] - 2.0).abs() < 1e-13 && (grad[1] + 3.0).abs() < 1e-13);
        assert!(g.area > 0.0);
    }

    #[test]
    fn zero_data_extends_to_zero() {
        let m = mesh();
        let d = harmonic_extension(&m, &vec![[0.0, 0.0]; m.num_nodes()]).unwrap();
        assert!(d.iter().all(|p| p[0] == 0.0 && p[1] == 0.0));
    }

    #[test]
    fn affine_data_reproduced() {
        let m = mesh();
        let f = |y: Point| [0.03 * y[0] - 0.01, -0.07 * y[1] + 0.02];
        let data: Vec<Point> = m.nodes().iter().map(|&y| f(y)).collect();
        let mut boundary_only = data.clone();
        for (i, d) in boundary_only.iter_mut().enumerate() {
            if !m.is_boundary(i) {
                *d = [9.0, 9.0];
            }
        }
        let ext = harmonic_extension(&m, &boundary_only).unwrap();
        for (got, want) in ext.iter().zip(&data) {
            assert!((got[0] - want[0]).abs() < 1e-11);
            assert!((got[1] - want[1]).abs() < 1e-11);
        }
    }

    #[test]
    fn lifted_wall_stays_within_bounds() {
        let m = mesh();
        let eta_bar = 0.04;
        let mut data = vec![[0.0, 0.0]; m.num_nodes()];
        for (i, d) in data.iter_mut().enumerate() {
            if m.has_tag(i, BoundaryTag::Wall) {
                *d = [0.0, eta_bar];
            }
        }
        let ext = harmonic_extension(&m, &data).unwrap();
        for (i, d) in ext.iter().enumerate() {
            if !m.is_boundary(i) {
                assert!(
                    d[1] >= -1e-14 && d[1] <= eta_bar + 1e-14,
                    "node {i}: {}",
                    d[1]
                );
            }
        }
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let m = build_channel_mesh(1.0, 1.0, 2, 2).unwrap();
        let y_old = m.nodes().to_vec();
        let y_new: Vec<Point> = y_old.iter().map(|p| [p[0], p[1] * 1.05]).collect();
        let ale = AleState::new(&m, y_old.clone(), y_new.clone(), 0.3, 0.01).unwrap();
        assert_eq!(interpolate_map(&ale, 0.3).unwrap(), y_old);
        let end = interpolate_map(&ale, ale.t_new()).unwrap();
        for (a, b) in end.iter().zip(&y_new) {
            assert!((a[1] - b[1]).abs() < 1e-14);
        }
        let mid = interpolate_map(&ale, 0.3 + 0.005).unwrap();
        for ((m, a), b) in mid.iter().zip(&y_old).zip(&y_new) {
            assert!((m[1] - 0.5 * (a[1] + b[1])).abs() < 1e-13);
        }
        assert!(matches!(
            interpolate_map(&ale, 0.32),
            Err(AleError::OutsideSlab { .. })
        ));
        assert!(matches!(
            interpolate_map(&ale, 0.29),
            Err(AleError::OutsideSlab { .. })
        ));
    }

    #[test]
    fn domain_velocity_examples() {
        let y_old = vec![[0.0, 0.2], [1.0, 0.7]];
        let w = domain_velocity(&y_old, &y_old, 0.01).unwrap();
        assert!(w.iter().all(|v| v == &[0.0, 0.0]));

        let y_new: Vec<Point> = y_old.iter().map(|p| [p[0], p[1] + 0.1]).collect();
        let w = domain_velocity(&y_old, &y_new, 0.01).unwrap();
        for (v, (a, b)) in w.iter().zip(y_old.iter().zip(&y_new)) {
            assert!((v[1] - 10.0).abs() < 1e-12);
            assert!((a[1] + v[1] * 0.01 - b[1]).abs() <= 4.0 * f64::EPSILON * b[1].abs());
        }
        assert!(domain_velocity(&y_old, &y_new, 0.0).is_err());
    }

    #[test]
    fn tangled_slab_rejected() {
        let m = build_channel_mesh(1.0, 1.0, 2, 2).unwrap();
        let mut y_new = m.nodes().to_vec();
        y_new[4] = [5.0, 5.0];
        let err = AleState::new(&m, m.nodes().to_vec(), y_new, 0.0, 0.1).unwrap_err();
        assert!(matches!(err, AleError::InvalidMesh { .. }));
    }

    #[test]
    fn ale_derivative_manufactured_fields() {
        // Constant field.
        assert_eq!(
            ale_derivative_residual(3.0, 3.0, 0.1, 0.0, [0.0, 0.0], [1.0, 2.0]),
            0.0
        );
        // f = z under purely radial motion.
        let r = ale_derivative_residual(0.4, 0.4, 0.1, 0.0, [1.0, 0.0], [0.0, 2.5]);
        assert_eq!(r, 0.0);
        // f = r with radial mesh speed w_r.
        let w_r = 3.0;
        for dt in [1e-2, 1e-3] {
            let (r0, r1) = (0.25, 0.25 + w_r * dt);
            assert!(ale_derivative_residual(r0, r1, dt, 0.0, [0.0, 1.0], [0.0, w_r]) < 1e-10);
        }
    }

    #[test]
    fn wall_boundary_data_follows_rule() {
        let m = build_channel_mesh(2.0, 0.5, 4, 2).unwrap();
        let eta = [0.01, 0.02, 0.03, 0.02, 0.04];
        let d = wall_boundary_displacement(&m, &eta);
        for (k, &n) in m.wall_nodes().iter().enumerate() {
            assert_eq!(d[n], [0.0, eta[k]]);
        }
        // Mid-height inflow node.
        let mid_in = 1;
        assert_eq!(m.nodes()[mid_in], [0.0, 0.25]);
        assert!((d[mid_in][1] - 0.005).abs() < 1e-15);
        assert_eq!(d[0], [0.0, 0.0]);
    }
}
