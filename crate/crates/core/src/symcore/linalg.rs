//! Dense Hermitian kernels: eigendecomposition, trace norm and exponentials
//! of Hermitian generators.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest dimension accepted by the dense kernels.
pub const MAX_DENSE_DIM: usize = 4096;

/// Relative anti-Hermitian part tolerated before an input is rejected.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Spectral decomposition `H = V diag(values) V†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl Eigh {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Eigenvector `i` as an owned column.
    pub fn vector(&self, i: usize) -> CVector {
        self.vectors.column(i).into_owned()
    }

    /// `V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Frobenius norm of the anti-Hermitian part relative to the matrix norm.
pub fn hermiticity_defect(h: &CMatrix) -> f64 {
    if !h.is_square() {
        return f64::INFINITY;
    }
    let diff = (h - h.adjoint()).norm();
    diff / h.norm().max(1.0)
}

pub fn check_hermitian(h: &CMatrix, what: &str) -> Result<()> {
    if !h.is_square() {
        return Err(Error::Contract(format!("{what}: matrix is {}x{}, not square", h.nrows(), h.ncols())));
    }
    let defect = hermiticity_defect(h);
    if defect > HERMITIAN_TOL {
        return Err(Error::Contract(format!("{what}: not Hermitian (relative defect {defect:.3e})")));
    }
    Ok(())
}

/// Eigendecomposition of a Hermitian matrix.
pub fn self_adjoint_eig(h: &CMatrix) -> Result<Eigh> {
    check_hermitian(h, "self_adjoint_eig")?;
    let n = h.nrows();
    if n > MAX_DENSE_DIM {
        return Err(Error::DimensionOverflow(format!("dimension {n} exceeds {MAX_DENSE_DIM}")));
    }
    if n == 0 {
        return Ok(Eigh { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let (sym, scale) = normalized_hermitian(h);
    let mut eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        eig = SymmetricEigen::new(sym + CMatrix::identity(n, n));
        eig.eigenvalues.add_scalar_mut(-1.0);
    }
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigen decomposition did not converge".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i] * scale).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues(h: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(h, "eigenvalues")?;
    if h.nrows() == 0 {
        return Ok(vec![]);
    }
    let (sym, scale) = normalized_hermitian(h);
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().map(|v| v * scale).collect();
    if vals.iter().any(|v| !v.is_finite()) {
        // a diagonal shift changes the QR iteration path
        let n = sym.nrows();
        let shifted = sym + CMatrix::identity(n, n);
        vals = shifted.symmetric_eigenvalues().iter().map(|v| (v - 1.0) * scale).collect();
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigenvalue solver did not converge".into()));
    }
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// `(H + H†)/2` scaled to unit Frobenius norm, and the scale removed. The
/// Hermitian QR iteration can break down on unscaled inputs.
fn normalized_hermitian(h: &CMatrix) -> (CMatrix, f64) {
    let sym = (h + h.adjoint()).scale(0.5);
    let norm = sym.norm();
    if norm == 0.0 || !norm.is_finite() {
        return (sym, 1.0);
    }
    (sym.unscale(norm), norm)
}

/// Sum of singular values.
///
/// Hermitian inputs are handled through their spectrum, everything else
/// through a singular value decomposition.
pub fn trace_norm(x: &CMatrix) -> f64 {
    if x.is_square() && hermiticity_defect(x) <= HERMITIAN_TOL {
        if let Ok(vals) = eigenvalues(x) {
            return vals.iter().map(|v| v.abs()).sum();
        }
    }
    x.clone().singular_values().iter().sum()
}

/// Largest singular value.
pub fn operator_norm(x: &CMatrix) -> f64 {
    if x.nrows() == 0 || x.ncols() == 0 {
        return 0.0;
    }
    x.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn unitary_from_generator(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let eig = self_adjoint_eig(h)?;
    Ok(eig.map_spectrum(|lam| C64::from_polar(1.0, -lam * t)))
}

/// `exp(s H)` for Hermitian `H` and real `s` (positive definite result).
pub fn hermitian_exp(h: &CMatrix, s: f64) -> Result<CMatrix> {
    let eig = self_adjoint_eig(h)?;
    Ok(eig.map_spectrum(|lam| c64((s * lam).exp(), 0.0)))
}

/// `exp(A)` for nilpotent `A` by its terminating power series.
pub fn nilpotent_exp(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    let mut acc = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for p in 1..=n {
        term = (&term * a).unscale(p as f64);
        if term.norm() == 0.0 {
            return Ok(acc);
        }
        acc += &term;
    }
    if (&term * a).norm() > 0.0 {
        return Err(Error::Contract("nilpotent_exp: matrix is not nilpotent".into()));
    }
    Ok(acc)
}

/// `A B - B A`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `<u|v>`, conjugate-linear in the first argument.
pub fn inner(u: &CVector, v: &CVector) -> C64 {
    u.dotc(v)
}

/// `Tr(A)`.
pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().sum()
}

/// Real part of `Tr(A B)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Residual `||H - V Λ V†||_F` of a decomposition.
pub fn reconstruction_residual(h: &CMatrix, eig: &Eigh) -> f64 {
    (h - eig.map_spectrum(|lam| c64(lam, 0.0))).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
        let a = CMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&a + a.adjoint()).scale(0.5)
    }

    fn random_matrix(n: usize, rng: &mut impl Rng) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| c64(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let h = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(3.0, 0.0), c64(1.0, 0.0), c64(2.0, 0.0)]));
        let e = self_adjoint_eig(&h).unwrap();
        assert_eq!(e.values.len(), 3);
        for (v, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - want).abs() < 1e-14);
        }
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(50, &mut rng);
        let e = self_adjoint_eig(&h).unwrap();
        assert!(reconstruction_residual(&h, &e) <= 1e-9 * h.norm());
        let gram = e.vectors.adjoint() * &e.vectors;
        assert!((gram - CMatrix::identity(50, 50)).norm() < 1e-9);
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut h = CMatrix::identity(2, 2);
        h[(0, 1)] = c64(1.0, 0.0);
        assert!(matches!(self_adjoint_eig(&h), Err(Error::Contract(_))));
    }

    #[test]
    fn trace_norm_basic_cases() {
        assert!((trace_norm(&CMatrix::identity(3, 3)) - 3.0).abs() < 1e-12);
        // |0><0| - |1><1|
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.0, 0.0), c64(-1.0, 0.0)]));
        assert!((trace_norm(&d) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_subadditive_and_unitarily_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(6, &mut rng);
            let b = random_matrix(6, &mut rng);
            assert!(trace_norm(&(&a + &b)) <= trace_norm(&a) + trace_norm(&b) + 1e-10);
            let u = unitary_from_generator(&random_hermitian(6, &mut rng), 0.7).unwrap();
            let rotated = &u * &a * u.adjoint();
            assert!((trace_norm(&rotated) - trace_norm(&a)).abs() < 1e-10);
        }
    }

    #[test]
    fn unitary_identity_at_zero_time() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(8, &mut rng);
        let u = unitary_from_generator(&h, 0.0).unwrap();
        assert!((u - CMatrix::identity(8, 8)).norm() < 1e-12);
    }

    #[test]
    fn unitary_of_sigma_z() {
        let sz = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.0, 0.0), c64(-1.0, 0.0)]));
        let u = unitary_from_generator(&sz, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((u[(0, 0)] - c64(0.0, -1.0)).norm() < 1e-12);
        assert!((u[(1, 1)] - c64(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn rabi_rotation_closed_form() {
        // H = a σx + b σy, exp(-iHt) = cos(wt) - i sin(wt) (H / w)
        let (a, b, t) = (0.3, -1.1, 0.83);
        let h = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(a, -b), c64(a, b), c64(0.0, 0.0)]);
        let w = (a * a + b * b).sqrt();
        let want = CMatrix::identity(2, 2).scale((w * t).cos()) - h.map(|z| z * c64(0.0, (w * t).sin() / w));
        let got = unitary_from_generator(&h, t).unwrap();
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn unitarity_of_random_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_hermitian(30, &mut rng);
        let u = unitary_from_generator(&h, 2.3).unwrap();
        assert!((u.adjoint() * &u - CMatrix::identity(30, 30)).norm() <= 1e-9);
    }

    #[test]
    fn nilpotent_series_terminates() {
        let mut a = CMatrix::zeros(3, 3);
        a[(0, 1)] = c64(2.0, 0.0);
        a[(1, 2)] = c64(3.0, 0.0);
        let e = nilpotent_exp(&a).unwrap();
        assert!((e[(0, 2)] - c64(3.0, 0.0)).norm() < 1e-14);
        assert!(nilpotent_exp(&CMatrix::identity(2, 2)).is_err());
    }
}
