//! Moment vectors of a GME map, Hankel matrices and determinant verdicts,
//! and the bipartite partial-transpose moment machinery.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gme::{Bipartition, GmeMap};
use crate::qcore::{self, DensityOperator};

/// The moments `s_1 ... s_n` of a map applied to a state.
#[derive(Debug, Clone)]
pub struct MomentVector {
    values: Vec<f64>,
    map_label: String,
    state_label: String,
}

impl MomentVector {
    pub fn from_values(
        values: Vec<f64>,
        map_label: impl Into<String>,
        state_label: impl Into<String>,
    ) -> Self {
        debug_assert!(
            values.iter().skip(1).step_by(2).all(|&s| s >= -1e-9),
            "even-order moments are sums of squares"
        );
        Self {
            values,
            map_label: map_label.into(),
            state_label: state_label.into(),
        }
    }

    /// `s_n`, 1-indexed.
    pub fn s(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map_label(&self) -> &str {
        &self.map_label
    }

    pub fn state_label(&self) -> &str {
        &self.state_label
    }

    /// The moment vector of `alpha Phi(rho)`: `s_n -> alpha^n s_n`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, s)| alpha.powi(k as i32 + 1) * s)
            .collect();
        Self {
            values,
            map_label: format!("{} (scaled {alpha})", self.map_label),
            state_label: self.state_label.clone(),
        }
    }
}

/// `s_n = Tr[Phi(rho)^n]` for `n = 1..=n_max`, computed as power sums of one
/// eigendecomposition of the map output.
pub fn compute_moments(g: &GmeMap, rho: &DensityOperator, n_max: usize) -> Result<MomentVector> {
    assert!(n_max >= 1, "need at least the first moment");
    let out = g.apply(rho)?;
    let eigenvalues = out.eigenvalues();
    let values = (1..=n_max)
        .map(|n| eigenvalues.iter().map(|l| l.powi(n as i32)).sum())
        .collect();
    Ok(MomentVector::from_values(values, g.label(), "state"))
}

/// The `(l+1) x (l+1)` Hankel matrix with entry `(i, j) = s_{i+j+1}`.
pub fn hankel_matrix(m: &MomentVector, l: usize) -> Result<DMatrix<f64>> {
    let required = 2 * l + 1;
    if m.len() < required {
        return Err(Error::InsufficientMoments {
            required,
            available: m.len(),
        });
    }
    Ok(DMatrix::from_fn(l + 1, l + 1, |i, j| m.s(i + j + 1)))
}

/// Determinant of the order-`l` Hankel matrix, via the eigenvalues of the
/// small symmetric matrix for a stable sign near the detection boundary.
pub fn hankel_det(m: &MomentVector, l: usize) -> Result<f64> {
    let h = hankel_matrix(m, l)?;
    let eig = h.symmetric_eigenvalues();
    Ok(eig.iter().product())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Violated,
    Satisfied,
}

/// Hankel determinants up to `max_order` with per-order and overall verdicts.
#[derive(Debug, Clone)]
pub struct HankelReport {
    pub max_order: usize,
    pub determinants: Vec<f64>,
    pub per_order: Vec<Verdict>,
    pub gme_detected: bool,
    pub tol: f64,
}

impl HankelReport {
    /// `det H_l`, 1-indexed.
    pub fn det(&self, l: usize) -> f64 {
        self.determinants[l - 1]
    }

    pub fn verdict(&self, l: usize) -> Verdict {
        self.per_order[l - 1]
    }
}

/// The per-order guard for a raw determinant: moments of an unnormalized map
/// grow like `|s_1|^n`, so an absolute cutoff would be meaningless.
pub fn order_tolerance(base_tol: f64, s1: f64, l: usize) -> f64 {
    base_tol * s1.abs().powi(2 * l as i32 + 1).max(1.0)
}

/// Evaluates `det H_1 ... det H_L`; GME is detected when any determinant
/// falls below its (relative) `-tol`. `tol = None` uses the `1e-9` base.
pub fn hankel_report(m: &MomentVector, max_order: usize, tol: Option<f64>) -> Result<HankelReport> {
    let base_tol = tol.unwrap_or(1e-9);
    let mut determinants = Vec::with_capacity(max_order);
    let mut per_order = Vec::with_capacity(max_order);
    let mut gme_detected = false;
    for l in 1..=max_order {
        let det = hankel_det(m, l)?;
        let verdict = if det < -order_tolerance(base_tol, m.s(1), l) {
            gme_detected = true;
            Verdict::Violated
        } else {
            Verdict::Satisfied
        };
        determinants.push(det);
        per_order.push(verdict);
    }
    Ok(HankelReport {
        max_order,
        determinants,
        per_order,
        gme_detected,
        tol: base_tol,
    })
}

/// Bipartite partial-transpose moments `p_1 ... p_n`.
#[derive(Debug, Clone)]
pub struct PtMomentVector {
    values: Vec<f64>,
}

impl PtMomentVector {
    /// `p_n`, 1-indexed.
    pub fn p(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
}

/// `p_n = Tr[(rho^{T_A})^n]` for the bipartite split `A | rest`.
pub fn pt_moments(
    rho: &DensityOperator,
    split: &Bipartition,
    n_max: usize,
) -> Result<PtMomentVector> {
    assert!(n_max >= 1);
    if split.n_sites() != rho.shape().num_sites() {
        return Err(Error::DimensionMismatch(format!(
            "split covers {} sites, state has {}",
            split.n_sites(),
            rho.shape().num_sites()
        )));
    }
    let pt = qcore::partial_transpose_matrix(rho.matrix(), split.a_side(), rho.shape())?;
    let eigenvalues = qcore::eigvalsh(&pt)?;
    let values: Vec<f64> = (1..=n_max)
        .map(|n| eigenvalues.iter().map(|l| l.powi(n as i32)).sum())
        .collect();
    debug_assert!(values.is_empty() || (values[0] - 1.0).abs() < 1e-9);
    Ok(PtMomentVector { values })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PptVerdict {
    NptDetected,
    Inconclusive,
}

/// The `p_3 >= p_2^2` test: a violation certifies an NPT state.
pub fn p3_ppt_check(p: &PtMomentVector) -> Result<PptVerdict> {
    if p.len() < 3 {
        return Err(Error::InsufficientMoments {
            required: 3,
            available: p.len(),
        });
    }
    if p.p(3) < p.p(2) * p.p(2) - 1e-12 {
        Ok(PptVerdict::NptDetected)
    } else {
        Ok(PptVerdict::Inconclusive)
    }
}
