//! Single-site positive maps as operator-space matrices, plus application of
//! a map to an arbitrary subset of sites of a multipartite state.
//!
//! A map is stored as the superoperator `S` with `vec(L(X)) = S vec(X)` in the
//! column-stacking basis: entry `(i, j)` of `X` sits at `vec` index `i + j*d`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qcore::{
    hermiticity_defect, identity, max_abs_diff, CMatrix, DensityOperator, HermitianOperator,
    SystemShape, STATE_TOL,
};

const PAULIS: [[[f64; 2]; 4]; 3] = {
    // sigma_x, sigma_y, sigma_z as (re, im) pairs in row-major order
    [
        [[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
        [[0.0, 0.0], [0.0, -1.0], [0.0, 1.0], [0.0, 0.0]],
        [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]],
    ]
};

pub fn pauli(i: usize) -> CMatrix {
    let p = &PAULIS[i];
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(p[0][0], p[0][1]),
            C64::new(p[1][0], p[1][1]),
            C64::new(p[2][0], p[2][1]),
            C64::new(p[3][0], p[3][1]),
        ],
    )
}

/// Lindblad coefficients `(gamma_1, gamma_2, gamma_3)` for the Pauli generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladSpec {
    pub gammas: [f64; 3],
}

impl LindbladSpec {
    pub fn new(g1: f64, g2: f64, g3: f64) -> Result<Self> {
        let gammas = [g1, g2, g3];
        if gammas.iter().any(|g| !g.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite Lindblad coefficient in {gammas:?}"
            )));
        }
        Ok(Self { gammas })
    }
}

/// A Hermiticity-preserving linear map on one site.
#[derive(Debug, Clone)]
pub struct SingleSiteMap {
    dim: usize,
    superoperator: CMatrix,
    label: String,
    trace_preserving: bool,
    known_nu: Option<f64>,
}

fn vec_index(row: usize, col: usize, d: usize) -> usize {
    row + col * d
}

impl SingleSiteMap {
    /// Builds the superoperator column by column from the map's action on
    /// matrix units, verifying that the Choi matrix is Hermitian.
    pub fn from_action(
        d: usize,
        label: impl Into<String>,
        action: impl Fn(&CMatrix) -> CMatrix,
    ) -> Result<Self> {
        assert!(d >= 2, "local dimension must be at least 2");
        let d2 = d * d;
        let mut s = CMatrix::zeros(d2, d2);
        let mut trace_preserving = true;
        for col_of in 0..d {
            for row_of in 0..d {
                let mut unit = CMatrix::zeros(d, d);
                unit[(row_of, col_of)] = C64::new(1.0, 0.0);
                let out = action(&unit);
                if out.nrows() != d || out.ncols() != d {
                    return Err(Error::DimensionMismatch(format!(
                        "map output is {}x{}, expected {d}x{d}",
                        out.nrows(),
                        out.ncols()
                    )));
                }
                let out_trace: C64 = out.diagonal().iter().sum();
                let in_trace = if row_of == col_of { 1.0 } else { 0.0 };
                if (out_trace - C64::new(in_trace, 0.0)).norm() > 1e-12 {
                    trace_preserving = false;
                }
                let col = vec_index(row_of, col_of, d);
                for j in 0..d {
                    for i in 0..d {
                        s[(vec_index(i, j, d), col)] = out[(i, j)];
                    }
                }
            }
        }
        let map = Self {
            dim: d,
            superoperator: s,
            label: label.into(),
            trace_preserving,
            known_nu: None,
        };
        let defect = hermiticity_defect(&map.choi_raw());
        if defect > STATE_TOL {
            return Err(Error::NotHermiticityPreserving { defect });
        }
        Ok(map)
    }

    /// `X -> X^T` in the computational basis.
    pub fn transposition(d: usize) -> Self {
        let mut m = Self::from_action(d, "transposition", |x| x.transpose())
            .expect("transposition preserves Hermiticity");
        // the most negative eigenvalue reachable through 1 (x) T is -1/2,
        // attained on a two-dimensional maximally entangled subspace
        m.known_nu = Some(0.5);
        m
    }

    /// `X -> Tr[X] I_d - X`.
    pub fn reduction(d: usize) -> Self {
        let mut m = Self::from_action(d, "reduction", |x| {
            let t: C64 = x.diagonal().iter().sum();
            identity(d) * t - x
        })
        .expect("reduction preserves Hermiticity");
        if d == 2 {
            m.known_nu = Some(0.5);
        }
        m
    }

    pub fn identity_map(d: usize) -> Self {
        let mut m =
            Self::from_action(d, "identity", |x| x.clone()).expect("identity preserves Hermiticity");
        m.known_nu = Some(0.0);
        m
    }

    /// `X -> X + sum_i gamma_i (sigma_i X sigma_i - X)` on qubits.
    pub fn from_lindblad(spec: LindbladSpec) -> Self {
        let sig: Vec<CMatrix> = (0..3).map(pauli).collect();
        let g = spec.gammas;
        let label = format!("lindblad({},{},{})", g[0], g[1], g[2]);
        let mut m = Self::from_action(2, label, move |x| {
            let mut out = x.clone();
            for (i, s) in sig.iter().enumerate() {
                out += (s * x * s - x) * C64::new(g[i], 0.0);
            }
            out
        })
        .expect("Pauli Lindblad generators preserve Hermiticity");
        for known in [Self::transposition(2), Self::reduction(2), Self::identity_map(2)] {
            if max_abs_diff(&m.superoperator, &known.superoperator) < 1e-12 {
                m.known_nu = known.known_nu;
                break;
            }
        }
        m
    }

    /// The composition `X -> U L(X) U^dag`.
    pub fn compose_unitary_after(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim || u.ncols() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "unitary is {}x{}, map dimension is {}",
                u.nrows(),
                u.ncols(),
                self.dim
            )));
        }
        let defect = max_abs_diff(&(u.adjoint() * u), &identity(self.dim));
        if defect > STATE_TOL {
            return Err(Error::NotUnitary { defect });
        }
        let base = self.clone();
        let u = u.clone();
        let label = format!("u*{}", self.label);
        let mut m = Self::from_action(self.dim, label, move |x| &u * base.apply(x) * u.adjoint())?;
        // conjugating the output by a local unitary leaves the reachable
        // output spectrum, and hence nu, unchanged
        m.known_nu = self.known_nu;
        Ok(m)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    /// Exactly known `nu` for the stock maps, carried through unitary
    /// composition; `None` means it must be estimated.
    pub fn known_nu(&self) -> Option<f64> {
        self.known_nu
    }

    pub fn superoperator(&self) -> &CMatrix {
        &self.superoperator
    }

    /// Applies the map to a `d x d` matrix.
    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let d = self.dim;
        assert_eq!(x.nrows(), d);
        assert_eq!(x.ncols(), d);
        let mut out = CMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for l in 0..d {
                    for k in 0..d {
                        acc += self.superoperator[(vec_index(i, j, d), vec_index(k, l, d))]
                            * x[(k, l)];
                    }
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// Applies the map on one site of a matrix over `shape`, identity on the
    /// rest.
    pub(crate) fn apply_on_one_site(
        &self,
        site: usize,
        shape: &SystemShape,
        m: &CMatrix,
    ) -> CMatrix {
        let d = self.dim;
        let total = shape.total_dim();
        let stride = shape.stride_of(site);
        let n_ctx = total / d;
        let s = &self.superoperator;
        let mut out = CMatrix::zeros(total, total);
        for cr in 0..n_ctx {
            let br = (cr / stride) * stride * d + cr % stride;
            for cc in 0..n_ctx {
                let bc = (cc / stride) * stride * d + cc % stride;
                for i in 0..d {
                    for j in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..d {
                            for l in 0..d {
                                acc += s[(vec_index(i, j, d), vec_index(k, l, d))]
                                    * m[(br + k * stride, bc + l * stride)];
                            }
                        }
                        out[(br + i * stride, bc + j * stride)] = acc;
                    }
                }
            }
        }
        out
    }

    pub(crate) fn apply_on_sites_matrix(
        &self,
        sites: &[usize],
        shape: &SystemShape,
        m: &CMatrix,
    ) -> Result<CMatrix> {
        for &s in sites {
            shape.check_site(s)?;
            if shape.dim_of(s) != self.dim {
                return Err(Error::DimensionMismatch(format!(
                    "site {s} has dimension {}, map has dimension {}",
                    shape.dim_of(s),
                    self.dim
                )));
            }
        }
        let mut out = m.clone();
        for &s in sites {
            out = self.apply_on_one_site(s, shape, &out);
        }
        Ok(out)
    }

    /// `(tensor of the map over `sites`) (x) (identity elsewhere)` applied to a
    /// state. An empty site set returns the state unchanged.
    pub fn apply_on_sites(
        &self,
        sites: &[usize],
        rho: &DensityOperator,
    ) -> Result<HermitianOperator> {
        let out = self.apply_on_sites_matrix(sites, rho.shape(), rho.matrix())?;
        HermitianOperator::new(rho.shape().clone(), out)
    }

    /// The Choi operator `(1 (x) L)|phi+><phi+|` on two copies of the site.
    pub fn choi(&self) -> HermitianOperator {
        HermitianOperator::new(SystemShape::uniform(2, self.dim), self.choi_raw())
            .expect("Hermiticity-preserving map has Hermitian Choi")
    }

    fn choi_raw(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d * d, d * d);
        let scale = C64::new(1.0 / d as f64, 0.0);
        for k in 0..d {
            for l in 0..d {
                let mut unit = CMatrix::zeros(d, d);
                unit[(k, l)] = C64::new(1.0, 0.0);
                let mapped = self.apply(&unit);
                // block (k, l) of the Choi matrix is L(E_kl)/d
                for i in 0..d {
                    for j in 0..d {
                        out[(k * d + i, l * d + j)] = mapped[(i, j)] * scale;
                    }
                }
            }
        }
        out
    }
}
