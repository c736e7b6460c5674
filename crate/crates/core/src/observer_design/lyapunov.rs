use nalgebra::{DMatrix, DVector};

use super::DesignError;

/// max Re λ(A).
pub fn spectral_abscissa(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// Solves `Mᵀ X + X M = −I` through the Kronecker form.
fn solve_lyapunov(m: &DMatrix<f64>) -> Result<DMatrix<f64>, DesignError> {
    let n = m.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mt = m.transpose();
    let op = id.kronecker(&mt) + mt.kronecker(&id);
    let rhs = DVector::from_iterator(n * n, id.iter().map(|v| -v));
    let sol = op
        .lu()
        .solve(&rhs)
        .ok_or_else(|| DesignError::NearSingular("Lyapunov operator is singular".into()))?;
    let x = DMatrix::from_column_slice(n, n, sol.as_slice());
    Ok((&x + x.transpose()) * 0.5)
}

/// `(P, σ)` with `P ⪰ I` and `PA + AᵀP ⪯ −2σP`.
///
/// σ is `sigma_fraction` of the decay margin of A. For N = 1 the scalar
/// pair `([1], |A₁₁|)` is returned, which makes the inequality an equality.
pub fn lyapunov_certificate(a: &DMatrix<f64>, sigma_fraction: f64) -> Result<(DMatrix<f64>, f64), DesignError> {
    if !(sigma_fraction > 0.0 && sigma_fraction < 1.0) {
        return Err(DesignError::InvalidSpec(format!("sigma_fraction must lie in (0, 1), got {sigma_fraction}")));
    }
    let abscissa = spectral_abscissa(a);
    if abscissa >= 0.0 {
        return Err(DesignError::NotHurwitz(abscissa));
    }
    let n = a.nrows();
    if n == 1 {
        return Ok((DMatrix::identity(1, 1), -a[(0, 0)]));
    }
    let sigma = sigma_fraction * abscissa.abs();
    let m = a + DMatrix::identity(n, n) * sigma;
    let p0 = solve_lyapunov(&m)?;
    let lmin = p0.clone().symmetric_eigenvalues().min();
    if lmin < 1e-12 {
        return Err(DesignError::NearSingular(format!("λ_min(P₀) = {lmin:.3e}")));
    }
    Ok((p0 / lmin, sigma))
}

/// Eigenvalue check of the certificate: (max Re λ(A), λ_min(P), λ_max(PA + AᵀP + 2σP)).
pub fn certificate_margins(a: &DMatrix<f64>, p: &DMatrix<f64>, sigma: f64) -> (f64, f64, f64) {
    let lmi = p * a + a.transpose() * p + p * (2.0 * sigma);
    let lmi = (&lmi + lmi.transpose()) * 0.5;
    (
        spectral_abscissa(a),
        p.clone().symmetric_eigenvalues().min(),
        lmi.symmetric_eigenvalues().max(),
    )
}
