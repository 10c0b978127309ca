//! The GME map: a sum of a positive map over canonical bipartitions plus a
//! compensating constant, with minimum-eigenvalue detection and the `nu`
//! estimator that fixes the constant's lower bound.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::maps::SingleSiteMap;
use crate::qcore::{
    identity, CMatrix, CVector, DensityOperator, HermitianOperator, SystemShape,
};

/// One side of a bipartition together with its complement; `a_side` is the
/// canonical representative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    a_side: Vec<usize>,
    b_side: Vec<usize>,
}

impl Bipartition {
    /// `a_side` must be a non-empty proper subset of `0..n_sites`.
    pub fn new(mut a_side: Vec<usize>, n_sites: usize) -> Result<Self> {
        a_side.sort_unstable();
        a_side.dedup();
        if a_side.is_empty() {
            return Err(Error::EmptySiteSet);
        }
        if a_side.len() >= n_sites {
            return Err(Error::InvalidArgument(format!(
                "a_side {a_side:?} is not a proper subset of {n_sites} sites"
            )));
        }
        if let Some(&s) = a_side.iter().find(|&&s| s >= n_sites) {
            return Err(Error::SiteOutOfRange {
                site: s,
                n_sites,
            });
        }
        let b_side = (0..n_sites).filter(|s| !a_side.contains(s)).collect();
        Ok(Self { a_side, b_side })
    }

    pub fn a_side(&self) -> &[usize] {
        &self.a_side
    }

    pub fn b_side(&self) -> &[usize] {
        &self.b_side
    }

    pub fn n_sites(&self) -> usize {
        self.a_side.len() + self.b_side.len()
    }
}

/// The `2^(N-1) - 1` canonical bipartitions of `n >= 2` sites: each
/// complementary pair is represented by its smaller side, ties by the side
/// containing site 0; ordered by (size, lexicographic).
pub fn canonical_bipartitions(n: usize) -> Result<Vec<Bipartition>> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "bipartitions need n >= 2 sites, got {n}"
        )));
    }
    let mut reps: Vec<Vec<usize>> = Vec::new();
    for mask in 1u64..(1 << n) - 1 {
        let a: Vec<usize> = (0..n).filter(|&s| mask >> s & 1 == 1).collect();
        let size = a.len();
        let canonical = match (2 * size).cmp(&n) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Equal => a.contains(&0),
            std::cmp::Ordering::Greater => false,
        };
        if canonical {
            reps.push(a);
        }
    }
    reps.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.cmp(y)));
    debug_assert_eq!(reps.len(), (1 << (n - 1)) - 1);
    reps.into_iter().map(|a| Bipartition::new(a, n)).collect()
}

/// `Phi(rho) = sum_A (L^A (x) 1) rho + c Tr[rho] I`, nonnegative on all
/// biseparable states when `c` meets its lower bound.
#[derive(Debug, Clone)]
pub struct GmeMap {
    n_sites: usize,
    base: SingleSiteMap,
    bipartitions: Vec<Bipartition>,
    c: f64,
    nu_used: f64,
}

impl GmeMap {
    /// Builds the map over the canonical bipartitions.
    ///
    /// With `c = None` the constant defaults to the lower bound
    /// `(2^(N-1) - 2) nu`; `nu` falls back to the base map's known value, or
    /// to a seeded [`estimate_nu`] run when there is none. A supplied `c`
    /// below the bound is rejected.
    pub fn build(
        n: usize,
        base: SingleSiteMap,
        c: Option<f64>,
        nu: Option<f64>,
    ) -> Result<Self> {
        let bipartitions = canonical_bipartitions(n)?;
        let nu_used = match nu.or_else(|| base.known_nu()) {
            Some(v) => v,
            None => estimate_nu(&base, 200, 7).value,
        };
        let bound = ((1u64 << (n - 1)) - 2) as f64 * nu_used;
        let c = match c {
            Some(v) => {
                if v < bound - 1e-12 {
                    return Err(Error::ConstantBelowBound { c: v, bound });
                }
                v
            }
            None => bound,
        };
        Ok(Self {
            n_sites: n,
            base,
            bipartitions,
            c,
            nu_used,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn base(&self) -> &SingleSiteMap {
        &self.base
    }

    pub fn bipartitions(&self) -> &[Bipartition] {
        &self.bipartitions
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn nu_used(&self) -> f64 {
        self.nu_used
    }

    pub fn shape(&self) -> SystemShape {
        SystemShape::uniform(self.n_sites, self.base.dim())
    }

    pub fn label(&self) -> String {
        format!("Phi^({})[{}, c={}]", self.n_sites, self.base.label(), self.c)
    }

    /// Applies the map: the sum of the base map over each bipartition's
    /// `a_side` plus `c Tr[rho] I`.
    pub fn apply(&self, rho: &DensityOperator) -> Result<HermitianOperator> {
        let shape = self.shape();
        if rho.shape() != &shape {
            return Err(Error::DimensionMismatch(format!(
                "state has dims {:?}, map expects {:?}",
                rho.shape().local_dims(),
                shape.local_dims()
            )));
        }
        let dim = shape.total_dim();
        let trace: f64 = rho.matrix().diagonal().iter().map(|z| z.re).sum();
        let mut out = identity(dim) * C64::new(self.c * trace, 0.0);
        for cut in &self.bipartitions {
            out += self
                .base
                .apply_on_sites_matrix(cut.a_side(), &shape, rho.matrix())?;
        }
        HermitianOperator::new(shape, out)
    }
}

/// Outcome of the minimum-eigenvalue detector.
#[derive(Debug, Clone, Copy)]
pub struct Detection {
    pub detected: bool,
    pub min_eigenvalue: f64,
}

/// GME is certified when the map output has an eigenvalue below `-tol`
/// (default `tol = 1e-9`).
pub fn min_eig_detect(g: &GmeMap, rho: &DensityOperator, tol: Option<f64>) -> Result<Detection> {
    let tol = tol.unwrap_or(1e-9);
    let min_eigenvalue = g.apply(rho)?.min_eigenvalue();
    Ok(Detection {
        detected: min_eigenvalue < -tol,
        min_eigenvalue,
    })
}

/// Result of the sampled optimization of the most negative output eigenvalue.
#[derive(Debug, Clone)]
pub struct NuEstimate {
    pub value: f64,
    pub argmin_state: DensityOperator,
    pub trials: usize,
    pub refined: bool,
}

/// `nu(L) = -min_rho EV_min[(1 (x) L) rho]`, estimated from Haar-random pure
/// bipartite states, each followed by coordinate-wise perturbation descent on
/// the state vector. The minimum is attained at pure states, so the sampled
/// value is a lower bound on `nu` up to the refinement tolerance.
pub fn estimate_nu(m: &SingleSiteMap, trials: usize, seed: u64) -> NuEstimate {
    assert!(trials >= 1, "need at least one trial");
    let d = m.dim();
    let shape = SystemShape::uniform(2, d);
    let mut best_min_eig = f64::INFINITY;
    let mut best_coords: Vec<f64> = Vec::new();
    let mut refined = false;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        let mut coords: Vec<f64> = (0..2 * d * d)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        normalize(&mut coords);
        let mut current = objective(m, &shape, &coords);
        let start = current;
        let mut step = 0.1;
        while step > 1e-9 {
            let mut improved = false;
            for i in 0..coords.len() {
                for sign in [1.0, -1.0] {
                    let mut trial_coords = coords.clone();
                    trial_coords[i] += sign * step;
                    if !normalize(&mut trial_coords) {
                        continue;
                    }
                    let value = objective(m, &shape, &trial_coords);
                    if value < current - 1e-14 {
                        current = value;
                        coords = trial_coords;
                        improved = true;
                        break;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if current < start - 1e-10 {
            refined = true;
        }
        if current < best_min_eig {
            best_min_eig = current;
            best_coords = coords;
        }
    }
    let argmin_state = DensityOperator::from_state_vector(shape, &coords_to_vector(&best_coords))
        .expect("refined vector stays normalized");
    NuEstimate {
        value: -best_min_eig,
        argmin_state,
        trials,
        refined,
    }
}

fn coords_to_vector(coords: &[f64]) -> CVector {
    let dim = coords.len() / 2;
    CVector::from_iterator(
        dim,
        (0..dim).map(|k| C64::new(coords[k], coords[dim + k])),
    )
}

fn normalize(coords: &mut [f64]) -> bool {
    let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return false;
    }
    for x in coords.iter_mut() {
        *x /= norm;
    }
    true
}

fn objective(m: &SingleSiteMap, shape: &SystemShape, coords: &[f64]) -> f64 {
    let v = coords_to_vector(coords);
    let rho: CMatrix = &v * v.adjoint();
    let out = m.apply_on_one_site(1, shape, &rho);
    crate::qcore::min_eigval(&out)
}
