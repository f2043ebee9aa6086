use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::{uniform_weights, Objective, ObjectiveError};
use crate::rng::{stream_rng, streams};

/// `f_v(x) = 1/2 (x - c_v)^T A_v (x - c_v)` with symmetric `A_v`, uniform
/// weights. Components may share matrices.
#[derive(Clone, Debug)]
pub struct QuadraticObjective {
    name: String,
    dim: usize,
    matrices: Vec<DMatrix<f64>>,
    // diagonals of the matrices when all of them are diagonal
    diagonals: Option<Vec<Vec<f64>>>,
    a_bar: DMatrix<f64>,
    which: Vec<usize>,
    centers: Vec<Vec<f64>>,
    weights: Vec<f64>,
    smoothness: f64,
    strong_convexity: f64,
    x_star: Vec<f64>,
    f_star: f64,
}

impl QuadraticObjective {
    /// Component `v` uses `matrices[which[v]]` and `centers[v]`.
    pub fn new(
        name: &str,
        matrices: Vec<DMatrix<f64>>,
        which: Vec<usize>,
        centers: Vec<Vec<f64>>,
    ) -> Result<Self, ObjectiveError> {
        let n = which.len();
        if n == 0 || centers.len() != n || matrices.is_empty() {
            return Err(ObjectiveError::InvalidParameter(
                "need at least one component".into(),
            ));
        }
        let dim = matrices[0].nrows();
        for m in &matrices {
            if m.nrows() != dim
                || m.ncols() != dim
                || (m - m.transpose()).amax() > 1e-12 * (1.0 + m.amax())
            {
                return Err(ObjectiveError::InvalidParameter(
                    "matrices must be symmetric and equal-sized".into(),
                ));
            }
        }
        if which.iter().any(|&k| k >= matrices.len()) || centers.iter().any(|c| c.len() != dim) {
            return Err(ObjectiveError::InvalidParameter(
                "component index or center size mismatch".into(),
            ));
        }
        let weights = uniform_weights(n);
        let spectra: Vec<DVector<f64>> = matrices
            .iter()
            .map(|m| SymmetricEigen::new(m.clone()).eigenvalues)
            .collect();
        let smoothness = which
            .iter()
            .map(|&k| spectra[k].iter().map(|e| e.abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let mut a_bar = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for v in 0..n {
            let a = &matrices[which[v]];
            a_bar += a * weights[v];
            rhs += a * DVector::from_column_slice(&centers[v]) * weights[v];
        }
        let strong_convexity = SymmetricEigen::new(a_bar.clone()).eigenvalues.min();
        if !(strong_convexity > 0.0) {
            return Err(ObjectiveError::Unbounded(format!(
                "average Hessian has smallest eigenvalue {strong_convexity}"
            )));
        }
        let chol = a_bar.clone().cholesky().ok_or_else(|| {
            ObjectiveError::Unbounded("average Hessian is not positive definite".into())
        })?;
        let x_star: Vec<f64> = if centers.iter().all(|c| c == &centers[0]) {
            centers[0].clone()
        } else {
            chol.solve(&rhs).iter().copied().collect()
        };
        let diagonals = matrices
            .iter()
            .all(|m| (0..dim).all(|i| (0..dim).all(|j| i == j || m[(i, j)] == 0.0)))
            .then(|| {
                matrices
                    .iter()
                    .map(|m| m.diagonal().iter().copied().collect())
                    .collect()
            });
        let mut obj = QuadraticObjective {
            name: name.to_string(),
            dim,
            matrices,
            diagonals,
            a_bar,
            which,
            centers,
            weights,
            smoothness,
            strong_convexity,
            x_star,
            f_star: 0.0,
        };
        obj.f_star = obj.value(&obj.x_star);
        Ok(obj)
    }

    pub fn matrix(&self, v: usize) -> &DMatrix<f64> {
        &self.matrices[self.which[v]]
    }

    pub fn center(&self, v: usize) -> &[f64] {
        &self.centers[v]
    }

    /// Hessian of `f`.
    pub fn hessian(&self) -> &DMatrix<f64> {
        &self.a_bar
    }

    /// A point `x* + e` with `f - f* = gap`, the gap split equally over the
    /// eigendirections of the Hessian of `f`.
    pub fn equal_energy_point(&self, gap: f64) -> Vec<f64> {
        let eig = SymmetricEigen::new(self.a_bar.clone());
        let mut x = self.x_star.clone();
        let share = 2.0 * gap / self.dim as f64;
        for (i, lambda) in eig.eigenvalues.iter().enumerate() {
            let amp = (share / lambda).sqrt();
            for (xj, qj) in x.iter_mut().zip(eig.eigenvectors.column(i).iter()) {
                *xj += amp * qj;
            }
        }
        x
    }
}

impl Objective for QuadraticObjective {
    fn name(&self) -> &str {
        &self.name
    }

    fn n_components(&self) -> usize {
        self.which.len()
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn smoothness(&self) -> f64 {
        self.smoothness
    }

    fn strong_convexity(&self) -> f64 {
        self.strong_convexity
    }

    fn minimizer(&self) -> Option<&[f64]> {
        Some(&self.x_star)
    }

    fn min_value(&self) -> Option<f64> {
        Some(self.f_star)
    }

    fn component_value(&self, v: usize, x: &[f64]) -> f64 {
        let mut g = vec![0.0; self.dim];
        self.component_grad(v, x, &mut g);
        let c = &self.centers[v];
        0.5 * x
            .iter()
            .zip(c)
            .zip(&g)
            .map(|((xi, ci), gi)| (xi - ci) * gi)
            .sum::<f64>()
    }

    fn component_grad(&self, v: usize, x: &[f64], out: &mut [f64]) {
        let c = &self.centers[v];
        if let Some(diag) = &self.diagonals {
            let a = &diag[self.which[v]];
            for (((o, ai), xi), ci) in out.iter_mut().zip(a).zip(x).zip(c) {
                *o = ai * (xi - ci);
            }
            return;
        }
        let a = self.matrices[self.which[v]].as_slice();
        let d = self.dim;
        for (i, o) in out.iter_mut().enumerate() {
            // symmetric: column i equals row i
            let col = &a[i * d..(i + 1) * d];
            *o = col
                .iter()
                .zip(x.iter().zip(c))
                .map(|(aij, (xj, cj))| aij * (xj - cj))
                .sum();
        }
    }
}

fn gaussian_vec<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix with sign-corrected columns.
pub(crate) fn random_orthogonal<R: Rng>(rng: &mut R, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn log_spaced(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    if k == 1 {
        return vec![lo];
    }
    (0..k)
        .map(|i| lo * (hi / lo).powf(i as f64 / (k - 1) as f64))
        .collect()
}

fn spectral(q: &DMatrix<f64>, eigs: &[f64]) -> DMatrix<f64> {
    let m = q * DMatrix::from_diagonal(&DVector::from_column_slice(eigs)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

fn check_sizes(n: usize, dim: usize, condition: f64) -> Result<(), ObjectiveError> {
    if n == 0 || dim == 0 {
        return Err(ObjectiveError::InvalidParameter(
            "n and dim must be positive".into(),
        ));
    }
    if !(condition >= 1.0) || !condition.is_finite() {
        return Err(ObjectiveError::InvalidParameter(format!(
            "condition must be >= 1, got {condition}"
        )));
    }
    Ok(())
}

/// Components `1/2 (x - x*)^T A_v (x - x*)` sharing the minimizer `x*`. For
/// `dim >= 2` each `A_v` has log-spaced eigenvalues spanning exactly
/// `[1, condition]` in its own random basis; for `dim = 1` the components'
/// curvatures are log-spaced over that range instead.
pub fn quadratic_interpolation(
    n: usize,
    dim: usize,
    seed: u64,
    condition: f64,
) -> Result<QuadraticObjective, ObjectiveError> {
    check_sizes(n, dim, condition)?;
    let mut rng = stream_rng(seed, streams::DATA);
    let x_star = gaussian_vec(&mut rng, dim);
    let matrices: Vec<DMatrix<f64>> = if dim == 1 {
        log_spaced(1.0, condition, n)
            .into_iter()
            .map(|e| DMatrix::from_element(1, 1, e))
            .collect()
    } else {
        let eigs = log_spaced(1.0, condition, dim);
        (0..n)
            .map(|_| spectral(&random_orthogonal(&mut rng, dim), &eigs))
            .collect()
    };
    QuadraticObjective::new(
        "quadratic_interpolation",
        matrices,
        (0..n).collect(),
        vec![x_star; n],
    )
}

/// Components `1/2 (x - c_v)^T A (x - c_v)` with one shared diagonal `A`
/// (log-spaced over `[1, condition]`) and centers
/// `c_v = c + spread z_v`. The gradient dissimilarity `|A (c_bar - c_v)|^2`
/// does not depend on `x`.
pub fn quadratic_heterogeneous(
    n: usize,
    dim: usize,
    seed: u64,
    condition: f64,
    spread: f64,
) -> Result<QuadraticObjective, ObjectiveError> {
    check_sizes(n, dim, condition)?;
    if !(spread >= 0.0) {
        return Err(ObjectiveError::InvalidParameter(
            "spread must be non-negative".into(),
        ));
    }
    let mut rng = stream_rng(seed, streams::DATA);
    let base = gaussian_vec(&mut rng, dim);
    let a = DMatrix::from_diagonal(&DVector::from_vec(log_spaced(1.0, condition, dim)));
    let centers = (0..n)
        .map(|_| {
            let z = gaussian_vec(&mut rng, dim);
            base.iter().zip(z).map(|(b, zi)| b + spread * zi).collect()
        })
        .collect();
    QuadraticObjective::new("quadratic_heterogeneous", vec![a], vec![0; n], centers)
}
