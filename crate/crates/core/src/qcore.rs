//! Dense complex matrix algebra with tensor-site bookkeeping: Kronecker
//! products, site embedding, partial trace, Hermitian eigendecomposition and
//! trace powers.
//!
//! Site 0 is the leftmost (most significant) tensor factor.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Tolerance for state invariants (Hermiticity, trace, positivity).
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance for spectral reconstructions.
pub const SPECTRAL_TOL: f64 = 1e-9;

/// Tensor-factor structure of a multipartite system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemShape {
    local_dims: Vec<usize>,
}

impl SystemShape {
    pub fn new(local_dims: Vec<usize>) -> Result<Self> {
        if local_dims.is_empty() {
            return Err(Error::InvalidShape("no sites".into()));
        }
        if let Some(&d) = local_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidShape(format!("local dimension {d} < 2")));
        }
        Ok(Self { local_dims })
    }

    /// `n` sites of uniform local dimension `d`.
    pub fn uniform(n: usize, d: usize) -> Self {
        Self::new(vec![d; n]).expect("uniform shape with n >= 1 sites and d >= 2")
    }

    pub fn qubits(n: usize) -> Self {
        Self::uniform(n, 2)
    }

    pub fn total_dim(&self) -> usize {
        self.local_dims.iter().product()
    }

    pub fn num_sites(&self) -> usize {
        self.local_dims.len()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.local_dims
    }

    pub fn dim_of(&self, site: usize) -> usize {
        self.local_dims[site]
    }

    /// Index stride of `site`: the product of dimensions to its right.
    pub fn stride_of(&self, site: usize) -> usize {
        self.local_dims[site + 1..].iter().product()
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.num_sites() {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.num_sites(),
            });
        }
        Ok(())
    }

    fn check_sites(&self, sites: &[usize]) -> Result<()> {
        for &s in sites {
            self.check_site(s)?;
        }
        let mut sorted = sites.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != sites.len() {
            return Err(Error::InvalidArgument(format!(
                "duplicate site in {sites:?}"
            )));
        }
        Ok(())
    }

    /// Sites not in `sites`, in ascending order.
    pub fn complement(&self, sites: &[usize]) -> Vec<usize> {
        (0..self.num_sites()).filter(|s| !sites.contains(s)).collect()
    }
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0_f64, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Largest entrywise deviation of `m` from its adjoint.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

/// Kronecker product, dimensions multiply.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

fn check_hermitian(m: &CMatrix, tol: f64) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    Ok(())
}

/// Eigenvalues (ascending) of a Hermitian matrix.
///
/// Rejects inputs whose Hermiticity defect exceeds [`STATE_TOL`], reporting
/// the maximal asymmetry.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m, STATE_TOL)?;
    Ok(eigvalsh_unchecked(m))
}

/// Eigenvalues and orthonormal eigenvectors (columns, ascending order).
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(m, STATE_TOL)?;
    // The solver reads only the lower triangle, so the tolerated asymmetry
    // is squashed rather than propagated.
    let se = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0).ok_or(Error::EigenFailed)?;
    let mut order: Vec<usize> = (0..se.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let dim = m.nrows();
    let mut vecs = CMatrix::zeros(dim, dim);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &se.eigenvectors.column(i));
    }
    orthonormalize_clusters(&vals, &mut vecs, max_abs(m))?;
    Ok((vals, vecs))
}

/// The QR iteration returns accurate eigenvectors, but inside a degenerate
/// cluster they come back neither normalized nor mutually orthogonal.
/// Gram-Schmidt within each cluster restores an orthonormal eigenbasis;
/// vectors of well-separated eigenvalues are already orthogonal.
fn orthonormalize_clusters(vals: &[f64], vecs: &mut CMatrix, scale: f64) -> Result<()> {
    let n = vals.len();
    let cluster_tol = 1e-8 * scale.max(1.0);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && vals[end] - vals[start] <= cluster_tol {
            end += 1;
        }
        for k in start..end {
            let mut v = vecs.column(k).clone_owned();
            for j in start..k {
                let proj = (vecs.column(j).adjoint() * &v)[(0, 0)];
                v -= vecs.column(j) * proj;
            }
            let norm = v.norm();
            if norm < 1e-6 {
                // the returned cluster basis did not span its eigenspace
                return Err(Error::EigenFailed);
            }
            v /= C64::new(norm, 0.0);
            vecs.set_column(k, &v);
        }
        start = end;
    }
    Ok(())
}

fn eigvalsh_unchecked(m: &CMatrix) -> Vec<f64> {
    let se = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .expect("unbounded symmetric QR iteration converges");
    let mut vals: Vec<f64> = se.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Smallest eigenvalue of a (numerically) Hermitian matrix; the input is
/// symmetrized first so roundoff asymmetry cannot leak in.
pub(crate) fn min_eigval(m: &CMatrix) -> f64 {
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let se = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .expect("unbounded symmetric QR iteration converges");
    se.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

/// A Hermitian operator with tensor-site structure; not necessarily positive.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    shape: SystemShape,
    matrix: CMatrix,
}

impl HermitianOperator {
    pub fn new(shape: SystemShape, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != shape.total_dim() || matrix.ncols() != shape.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, shape dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                shape.total_dim()
            )));
        }
        check_hermitian(&matrix, STATE_TOL)?;
        Ok(Self { shape, matrix })
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigvalsh_unchecked(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

/// A density operator: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    shape: SystemShape,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(shape: SystemShape, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != shape.total_dim() || matrix.ncols() != shape.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix is {}x{}, shape dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                shape.total_dim()
            )));
        }
        check_hermitian(&matrix, STATE_TOL)?;
        let trace: f64 = matrix.diagonal().iter().map(|z| z.re).sum();
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::NotUnitTrace {
                trace,
                tol: STATE_TOL,
            });
        }
        let min_eig = eigvalsh_unchecked(&matrix)[0];
        if min_eig < -STATE_TOL {
            return Err(Error::NotPositive {
                min_eig,
                tol: STATE_TOL,
            });
        }
        Ok(Self { shape, matrix })
    }

    /// Projector onto a normalized state vector.
    pub fn from_state_vector(shape: SystemShape, v: &CVector) -> Result<Self> {
        if v.len() != shape.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector length {} vs shape dimension {}",
                v.len(),
                shape.total_dim()
            )));
        }
        let norm = v.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        let m = v * v.adjoint();
        Self::new(shape, m)
    }

    pub fn shape(&self) -> &SystemShape {
        &self.shape
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix)
            .diagonal()
            .iter()
            .map(|z| z.re)
            .sum()
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator {
            shape: self.shape.clone(),
            matrix: self.matrix.clone(),
        }
    }
}

/// Real eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian
/// operator. The reconstruction `sum_i v_i lambda_i v_i^dag` matches the input
/// to [`SPECTRAL_TOL`] relative accuracy.
pub fn eig_hermitian(h: &HermitianOperator) -> (Vec<f64>, CMatrix) {
    eigh(&h.matrix).expect("Hermiticity enforced at construction")
}

/// `Tr[h^n]` computed as the power sum of the spectrum.
pub fn trace_power(h: &HermitianOperator, n: u32) -> f64 {
    assert!(n >= 1, "trace_power requires n >= 1");
    h.eigenvalues().iter().map(|l| l.powi(n as i32)).sum()
}

/// Offsets of every digit configuration of `sites` within a flat index.
///
/// Entry `k` is the flat-index contribution of the `k`-th mixed-radix
/// configuration of the listed sites (listed order, leftmost digit most
/// significant).
fn site_offsets(shape: &SystemShape, sites: &[usize]) -> Vec<usize> {
    let dims: Vec<usize> = sites.iter().map(|&s| shape.dim_of(s)).collect();
    let strides: Vec<usize> = sites.iter().map(|&s| shape.stride_of(s)).collect();
    let count: usize = dims.iter().product();
    let mut offsets = vec![0usize; count];
    for (code, offset) in offsets.iter_mut().enumerate() {
        let mut rem = code;
        let mut acc = 0usize;
        for i in (0..sites.len()).rev() {
            let digit = rem % dims[i];
            rem /= dims[i];
            acc += digit * strides[i];
        }
        *offset = acc;
    }
    offsets
}

/// Partial trace keeping the listed sites (result sites keep their original
/// relative order).
pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::EmptySiteSet);
    }
    rho.shape.check_sites(keep)?;
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    let rest = rho.shape.complement(&keep);
    let keep_dims: Vec<usize> = keep.iter().map(|&s| rho.shape.dim_of(s)).collect();
    let keep_offsets = site_offsets(&rho.shape, &keep);
    let rest_offsets = site_offsets(&rho.shape, &rest);
    let dim_keep: usize = keep_dims.iter().product();
    let m = &rho.matrix;
    let mut out = CMatrix::zeros(dim_keep, dim_keep);
    for (rk, &ro) in keep_offsets.iter().enumerate() {
        for (ck, &co) in keep_offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &rest_offsets {
                acc += m[(ro + t, co + t)];
            }
            out[(rk, ck)] = acc;
        }
    }
    DensityOperator::new(SystemShape::new(keep_dims)?, out)
}

/// Embeds `op` so that it acts as `op` on the listed sites (in listed order)
/// and as the identity elsewhere.
pub fn embed_site_operator(op: &CMatrix, sites: &[usize], shape: &SystemShape) -> Result<CMatrix> {
    shape.check_sites(sites)?;
    let op_dim: usize = sites.iter().map(|&s| shape.dim_of(s)).product();
    if op.nrows() != op_dim || op.ncols() != op_dim {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, sites {:?} span dimension {}",
            op.nrows(),
            op.ncols(),
            sites,
            op_dim
        )));
    }
    let total = shape.total_dim();
    let rest = shape.complement(sites);
    let op_offsets = site_offsets(shape, sites);
    let rest_offsets = site_offsets(shape, &rest);
    let mut out = CMatrix::zeros(total, total);
    for (i, &ro) in op_offsets.iter().enumerate() {
        for (j, &co) in op_offsets.iter().enumerate() {
            let v = op[(i, j)];
            if v == C64::new(0.0, 0.0) {
                continue;
            }
            for &t in &rest_offsets {
                out[(ro + t, co + t)] = v;
            }
        }
    }
    Ok(out)
}

/// Transposes the listed sites of a square matrix in the computational basis.
///
/// This is the exact digit-swap route; the superoperator route in
/// [`crate::maps`] must agree with it.
pub fn partial_transpose_matrix(m: &CMatrix, sites: &[usize], shape: &SystemShape) -> Result<CMatrix> {
    shape.check_sites(sites)?;
    let total = shape.total_dim();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, shape dimension is {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let rest = shape.complement(sites);
    let t_offsets = site_offsets(shape, sites);
    let rest_offsets = site_offsets(shape, &rest);
    let mut out = CMatrix::zeros(total, total);
    for &ro in &t_offsets {
        for &co in &t_offsets {
            for &tr in &rest_offsets {
                for &tc in &rest_offsets {
                    // digits on `sites` swap between row and column
                    out[(co + tr, ro + tc)] = m[(ro + tr, co + tc)];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn diag(entries: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            entries.len(),
            entries.iter().map(|&x| c(x, 0.0)),
        ))
    }

    fn bell_projector() -> CMatrix {
        let mut v = CVector::zeros(4);
        v[0] = c(1.0 / 2f64.sqrt(), 0.0);
        v[3] = c(1.0 / 2f64.sqrt(), 0.0);
        &v * v.adjoint()
    }

    #[test]
    fn kron_identity_case() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
    }

    #[test]
    fn kron_bit_flip_on_both_qubits() {
        let sx = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let xx = kron(&sx, &sx);
        let mut ket00 = CVector::zeros(4);
        ket00[0] = c(1.0, 0.0);
        let out = &xx * ket00;
        assert_eq!(out[3], c(1.0, 0.0));
        assert_eq!(out.norm(), 1.0);
    }

    #[test]
    fn kron_diagonal_expansion() {
        let a = diag(&[1.0, 2.0]);
        let b = diag(&[3.0, 4.0]);
        assert_eq!(kron(&a, &b), diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn eigh_identity() {
        let shape = SystemShape::qubits(3);
        let h = HermitianOperator::new(shape, identity(8)).unwrap();
        let (vals, _) = eig_hermitian(&h);
        assert!(vals.iter().all(|&l| (l - 1.0).abs() < 1e-12));
    }

    #[test]
    fn eigh_partial_transpose_of_bell() {
        // hand-diagonalized spectrum of the partially transposed Bell projector
        let shape = SystemShape::qubits(2);
        let pt = partial_transpose_matrix(&bell_projector(), &[1], &shape).unwrap();
        let vals = eigvalsh(&pt).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12, "{vals:?}");
        }
    }

    #[test]
    fn eigh_diagonal_sorted() {
        let vals = eigvalsh(&diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(vals, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let mut m = identity(2);
        m[(0, 1)] = c(0.5, 0.0);
        let err = eigvalsh(&m).unwrap_err();
        match err {
            Error::NotHermitian { defect, .. } => assert!((defect - 0.5).abs() < 1e-15),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn eigh_reconstructs_input() {
        let shape = SystemShape::qubits(2);
        let m = bell_projector() * c(0.3, 0.0) + identity(4) * c(0.1, 0.0);
        let h = HermitianOperator::new(shape, m.clone()).unwrap();
        let (vals, vecs) = eig_hermitian(&h);
        let mut rec = CMatrix::zeros(4, 4);
        for (k, &l) in vals.iter().enumerate() {
            let v = vecs.column(k).clone_owned();
            rec += &v * v.adjoint() * c(l, 0.0);
        }
        assert!(max_abs_diff(&rec, &m) <= 1e-9 * max_abs(&m).max(1.0));
    }

    #[test]
    fn eigh_orthonormal_on_degenerate_spectrum() {
        // rank-4 operator on a 64-dimensional space: a large kernel used to
        // come back with a skewed basis
        let mut phi = CMatrix::zeros(4, 4);
        let mut swap = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                phi[(i * 2 + i, j * 2 + j)] = c(1.0, 0.0);
                swap[(i * 2 + j, j * 2 + i)] = c(1.0, 0.0);
            }
        }
        let op = kron(&kron(&phi, &phi), &swap);
        let (vals, vecs) = eigh(&op).unwrap();
        let gram = vecs.adjoint() * &vecs;
        assert!(max_abs_diff(&gram, &identity(64)) < 1e-10);
        let mut rec = CMatrix::zeros(64, 64);
        for (k, &l) in vals.iter().enumerate() {
            let v = vecs.column(k).clone_owned();
            rec += &v * v.adjoint() * c(l, 0.0);
        }
        assert!(max_abs_diff(&rec, &op) <= 1e-9 * max_abs(&op).max(1.0));
    }

    #[test]
    fn trace_power_cases() {
        let shape = SystemShape::qubits(3);
        let h = HermitianOperator::new(shape, identity(8)).unwrap();
        assert!((trace_power(&h, 2) - 8.0).abs() < 1e-12);

        let h = HermitianOperator::new(SystemShape::qubits(1), diag(&[1.0, -1.0])).unwrap();
        assert!(trace_power(&h, 3).abs() < 1e-12);

        let h = HermitianOperator::new(SystemShape::qubits(1), diag(&[2.0, 3.0])).unwrap();
        assert!((trace_power(&h, 2) - 13.0).abs() < 1e-12);
        assert!((trace_power(&h, 1) - h.trace()).abs() < 1e-12);
    }

    #[test]
    fn partial_trace_keep_all_is_identity() {
        let shape = SystemShape::qubits(2);
        let rho = DensityOperator::new(shape, bell_projector()).unwrap();
        let out = partial_trace(&rho, &[0, 1]).unwrap();
        assert!(max_abs_diff(out.matrix(), rho.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let shape = SystemShape::qubits(2);
        let rho = DensityOperator::new(shape, bell_projector()).unwrap();
        let out = partial_trace(&rho, &[0]).unwrap();
        assert!(max_abs_diff(out.matrix(), &(identity(2) * c(0.5, 0.0))) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product_factors() {
        let ra = diag(&[0.25, 0.75]);
        let rb = diag(&[0.6, 0.4]);
        let shape = SystemShape::qubits(2);
        let rho = DensityOperator::new(shape, kron(&ra, &rb)).unwrap();
        let out = partial_trace(&rho, &[0]).unwrap();
        assert!(max_abs_diff(out.matrix(), &ra) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        let shape = SystemShape::qubits(2);
        let rho = DensityOperator::new(shape, bell_projector()).unwrap();
        assert!(matches!(
            partial_trace(&rho, &[]),
            Err(Error::EmptySiteSet)
        ));
    }

    #[test]
    fn embed_identity_is_identity() {
        let shape = SystemShape::qubits(3);
        let out = embed_site_operator(&identity(2), &[1], &shape).unwrap();
        assert!(max_abs_diff(&out, &identity(8)) < 1e-15);
    }

    #[test]
    fn embed_sx_on_first_site() {
        let sx = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
        let shape = SystemShape::qubits(2);
        let m = embed_site_operator(&sx, &[0], &shape).unwrap();
        let mut ket00 = CVector::zeros(4);
        ket00[0] = c(1.0, 0.0);
        let out = &m * ket00;
        // |00> -> |10>
        assert_eq!(out[2], c(1.0, 0.0));
    }

    #[test]
    fn embed_swap_on_outer_sites() {
        // oracle: explicit 8x8 permutation sending |abc> -> |cba>
        let mut swap = CMatrix::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = c(1.0, 0.0);
            }
        }
        let shape = SystemShape::qubits(3);
        let m = embed_site_operator(&swap, &[0, 2], &shape).unwrap();
        let mut expected = CMatrix::zeros(8, 8);
        for idx in 0..8usize {
            let (a, b, cbit) = (idx >> 2 & 1, idx >> 1 & 1, idx & 1);
            let jdx = cbit << 2 | b << 1 | a;
            expected[(jdx, idx)] = c(1.0, 0.0);
        }
        assert!(max_abs_diff(&m, &expected) < 1e-15);
        // |100> -> |001>
        let mut ket = CVector::zeros(8);
        ket[4] = c(1.0, 0.0);
        let out = &m * ket;
        assert_eq!(out[1], c(1.0, 0.0));
    }

    #[test]
    fn embed_rejects_dimension_mismatch() {
        let shape = SystemShape::qubits(3);
        assert!(embed_site_operator(&identity(3), &[0], &shape).is_err());
    }

    #[test]
    fn embed_on_disjoint_sites_commutes() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1., 0.), c(2., 1.), c(2., -1.), c(-1., 0.)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(3., 0.)]);
        let shape = SystemShape::qubits(3);
        let ea = embed_site_operator(&a, &[0], &shape).unwrap();
        let eb = embed_site_operator(&b, &[2], &shape).unwrap();
        assert!(max_abs_diff(&(&ea * &eb), &(&eb * &ea)) < 1e-12);
    }

    #[test]
    fn partial_trace_composes() {
        let shape = SystemShape::qubits(3);
        let rho = crate::states::random_density(shape, 11).unwrap();
        let once = partial_trace(&rho, &[0]).unwrap();
        let keep_ab = partial_trace(&rho, &[0, 1]).unwrap();
        let twice = partial_trace(&keep_ab, &[0]).unwrap();
        assert!(max_abs_diff(once.matrix(), twice.matrix()) <= 1e-12);
    }

    #[test]
    fn density_operator_rejects_bad_inputs() {
        let shape = SystemShape::qubits(1);
        // trace 2
        assert!(matches!(
            DensityOperator::new(shape.clone(), identity(2)),
            Err(Error::NotUnitTrace { .. })
        ));
        // negative eigenvalue
        assert!(matches!(
            DensityOperator::new(shape, diag(&[1.5, -0.5])),
            Err(Error::NotPositive { .. })
        ));
    }
}
