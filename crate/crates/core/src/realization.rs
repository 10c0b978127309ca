//! Moments as expectation values of multi-copy observables: SWAP and phi-hat
//! operators, cyclic swaps, closed-form second- and third-order term lists,
//! the general per-term operator builder, and a finite-shot sampler.
//!
//! Copies are interleaved copy-major: on `n` copies of an `N`-site state the
//! global site order is (copy 0 site 0, copy 0 site 1, ..., copy 1 site 0,
//! ...). Per-party factors act on that party's `n` copies.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gme::GmeMap;
use crate::maps::SingleSiteMap;
use crate::qcore::{
    self, embed_site_operator, hermiticity_defect, kron, CMatrix, DensityOperator, SystemShape,
};

/// Densest operator the assembled multi-copy space may reach.
pub const DENSE_CAP: usize = 4096;

/// The `d^2 x d^2` exchange operator `SWAP|i j> = |j i>`.
pub fn swap_op(d: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
        }
    }
    m
}

/// `phi_hat = 2 |phi+><phi+| = sum_ij |ii><jj|` on two qubit copies.
///
/// Only the qubit scaling is defined; other dimensions are rejected.
pub fn phi_hat(d: usize) -> Result<CMatrix> {
    if d != 2 {
        return Err(Error::UnsupportedMap(format!(
            "phi-hat is defined for qubits only, got d = {d}"
        )));
    }
    let mut m = CMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i * 2 + i, j * 2 + j)] = C64::new(1.0, 0.0);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleDirection {
    Forward,
    Backward,
}

/// Cyclic permutation operator on `n` copies of one `d`-dimensional system.
///
/// For `n = 3` the operators are composed literally from two-copy swaps:
/// backward is `(SWAP_12 (x) I)(I (x) SWAP_23)` sending `|abc> -> |cab>`, and
/// forward is `(SWAP_13 (x) I_2)(I (x) SWAP_23)` sending `|abc> -> |bca>`.
/// General `n` uses the equivalent one-step rotations.
pub fn cyclic_swaps(n: usize, direction: CycleDirection, d: usize) -> CMatrix {
    assert!(n >= 2, "cyclic swaps need at least two copies");
    if n == 3 {
        let shape = SystemShape::uniform(3, d);
        let s12 = embed_site_operator(&swap_op(d), &[0, 1], &shape).expect("valid sites");
        let s23 = embed_site_operator(&swap_op(d), &[1, 2], &shape).expect("valid sites");
        let s13 = embed_site_operator(&swap_op(d), &[0, 2], &shape).expect("valid sites");
        return match direction {
            CycleDirection::Backward => s12 * &s23,
            CycleDirection::Forward => s13 * &s23,
        };
    }
    let dim = d.pow(n as u32);
    let mut m = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut digits = vec![0usize; n];
        let mut rem = col;
        for k in (0..n).rev() {
            digits[k] = rem % d;
            rem /= d;
        }
        let rotated: Vec<usize> = match direction {
            // |x_1 .. x_n> -> |x_n x_1 .. x_{n-1}>
            CycleDirection::Backward => {
                let mut r = vec![digits[n - 1]];
                r.extend_from_slice(&digits[..n - 1]);
                r
            }
            // |x_1 .. x_n> -> |x_2 .. x_n x_1>
            CycleDirection::Forward => {
                let mut r = digits[1..].to_vec();
                r.push(digits[0]);
                r
            }
        };
        let row = rotated.iter().fold(0usize, |acc, &x| acc * d + x);
        m[(row, col)] = C64::new(1.0, 0.0);
    }
    m
}

/// A product term's index string `(i_1, ..., i_n)`; each entry indexes a
/// bipartition of the GME map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermIndexString(pub Vec<usize>);

impl TermIndexString {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// An observable on `copies` copies of an `n_parties`-site state, factored
/// per party.
#[derive(Debug, Clone)]
pub struct MultiCopyObservable {
    copies: usize,
    n_parties: usize,
    site_dim: usize,
    party_factors: Vec<CMatrix>,
}

impl MultiCopyObservable {
    pub fn new(copies: usize, site_dim: usize, party_factors: Vec<CMatrix>) -> Result<Self> {
        assert!(copies >= 1);
        let n_parties = party_factors.len();
        if n_parties == 0 {
            return Err(Error::InvalidArgument("no party factors".into()));
        }
        let dim = site_dim
            .checked_pow((n_parties * copies) as u32)
            .unwrap_or(usize::MAX);
        if dim > DENSE_CAP {
            return Err(Error::DimensionCapExceeded {
                dim,
                cap: DENSE_CAP,
            });
        }
        let factor_dim = site_dim.pow(copies as u32);
        for (u, f) in party_factors.iter().enumerate() {
            if f.nrows() != factor_dim || f.ncols() != factor_dim {
                return Err(Error::DimensionMismatch(format!(
                    "party {u} factor is {}x{}, expected {factor_dim}x{factor_dim}",
                    f.nrows(),
                    f.ncols()
                )));
            }
        }
        Ok(Self {
            copies,
            n_parties,
            site_dim,
            party_factors,
        })
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn party_factors(&self) -> &[CMatrix] {
        &self.party_factors
    }

    /// Total dimension of the copy-major multi-copy space.
    pub fn total_dim(&self) -> usize {
        self.site_dim.pow((self.n_parties * self.copies) as u32)
    }

    /// The dense operator on the copy-major space.
    pub fn assembled(&self) -> CMatrix {
        let dim = self.total_dim();
        let idx = IndexTables::new(self.n_parties, self.copies, self.site_dim);
        let mut out = CMatrix::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                let mut acc = C64::new(1.0, 0.0);
                for (u, f) in self.party_factors.iter().enumerate() {
                    acc *= f[(idx.party_code(r, u), idx.party_code(c, u))];
                    if acc == C64::new(0.0, 0.0) {
                        break;
                    }
                }
                out[(r, c)] = acc;
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        hermiticity_defect(&self.assembled()) <= crate::qcore::STATE_TOL
    }
}

/// Digit bookkeeping between the copy-major global index, per-copy state
/// indices, and per-party multi-copy codes.
struct IndexTables {
    n_parties: usize,
    copies: usize,
    site_dim: usize,
    state_dim: usize,
    factor_dim: usize,
}

impl IndexTables {
    fn new(n_parties: usize, copies: usize, site_dim: usize) -> Self {
        Self {
            n_parties,
            copies,
            site_dim,
            state_dim: site_dim.pow(n_parties as u32),
            factor_dim: site_dim.pow(copies as u32),
        }
    }

    fn digit(&self, idx: usize, copy: usize, party: usize) -> usize {
        let pos = copy * self.n_parties + party;
        let total_digits = self.copies * self.n_parties;
        idx / self.site_dim.pow((total_digits - 1 - pos) as u32) % self.site_dim
    }

    /// The index of copy `k` within the state space `d^N`.
    fn copy_code(&self, idx: usize, copy: usize) -> usize {
        let mut code = 0;
        for party in 0..self.n_parties {
            code = code * self.site_dim + self.digit(idx, copy, party);
        }
        debug_assert!(code < self.state_dim);
        code
    }

    /// The index of party `u`'s copies within the factor space `d^n`.
    fn party_code(&self, idx: usize, party: usize) -> usize {
        let mut code = 0;
        for copy in 0..self.copies {
            code = code * self.site_dim + self.digit(idx, copy, party);
        }
        debug_assert!(code < self.factor_dim);
        code
    }
}

/// `Tr[rho^(x)n O]`, evaluated from the per-party factors without assembling
/// the full operator. The imaginary residue must stay below `1e-9`.
///
/// A product term with distinct map indices can carry a genuine imaginary
/// part that only cancels against its reversed-order partner; those are
/// evaluated through [`expectation_complex`].
pub fn expectation(obs: &MultiCopyObservable, rho: &DensityOperator) -> Result<f64> {
    let value = expectation_complex(obs, rho)?;
    if value.im.abs() >= 1e-9 {
        return Err(Error::ImaginaryResidue { residue: value.im });
    }
    Ok(value.re)
}

/// The complex-valued `Tr[rho^(x)n O]`.
pub fn expectation_complex(obs: &MultiCopyObservable, rho: &DensityOperator) -> Result<C64> {
    let state_dim = obs.site_dim.pow(obs.n_parties as u32);
    if rho.shape().total_dim() != state_dim
        || rho.shape().num_sites() != obs.n_parties
        || rho.shape().local_dims().iter().any(|&d| d != obs.site_dim)
    {
        return Err(Error::DimensionMismatch(format!(
            "observable expects {} sites of dimension {}, state has dims {:?}",
            obs.n_parties,
            obs.site_dim,
            rho.shape().local_dims()
        )));
    }
    let dim = obs.total_dim();
    let idx = IndexTables::new(obs.n_parties, obs.copies, obs.site_dim);
    // precomputed digit codes: copy-major state indices and per-party codes
    let copy_codes: Vec<Vec<usize>> = (0..dim)
        .map(|i| (0..obs.copies).map(|k| idx.copy_code(i, k)).collect())
        .collect();
    let party_codes: Vec<Vec<usize>> = (0..dim)
        .map(|i| (0..obs.n_parties).map(|u| idx.party_code(i, u)).collect())
        .collect();
    let m = rho.matrix();
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..dim {
        for c in 0..dim {
            let mut term = C64::new(1.0, 0.0);
            for k in 0..obs.copies {
                term *= m[(copy_codes[r][k], copy_codes[c][k])];
                if term == C64::new(0.0, 0.0) {
                    break;
                }
            }
            if term == C64::new(0.0, 0.0) {
                continue;
            }
            for (u, f) in obs.party_factors.iter().enumerate() {
                term *= f[(party_codes[c][u], party_codes[r][u])];
            }
            acc += term;
        }
    }
    Ok(acc)
}

fn require_plain_transposition(g: &GmeMap) -> Result<()> {
    let t = SingleSiteMap::transposition(g.base().dim());
    if qcore::max_abs_diff(g.base().superoperator(), t.superoperator()) > 1e-12 {
        return Err(Error::UnsupportedMap(format!(
            "operator realization covers the plain transposition base, map base is '{}'",
            g.base().label()
        )));
    }
    Ok(())
}

fn require_tripartite_c1(g: &GmeMap) -> Result<()> {
    require_plain_transposition(g)?;
    if g.n_sites() != 3 || g.base().dim() != 2 {
        return Err(Error::UnsupportedMap(format!(
            "closed-form moment terms cover 3 qubit sites, map has N = {}, d = {}",
            g.n_sites(),
            g.base().dim()
        )));
    }
    if (g.c() - 1.0).abs() > 1e-9 {
        return Err(Error::UnsupportedMap(format!(
            "closed-form constants assume c = 1, map has c = {}",
            g.c()
        )));
    }
    Ok(())
}

/// Per-party `n`-copy operators for the product term `Tr[Phi_{i_1}(rho) ...
/// Phi_{i_n}(rho)]` of a transposition-based GME map: party `u`'s factor is
/// `sum_p (x)_k chi_u^(i_k)(|p_k><p_{k-1}|)` with cyclic `p_0 = p_n`, where
/// `chi` transposes the unit exactly when bipartition `i_k` contains `u`.
///
/// Strings that reference the constant term reduce to lower-order moments and
/// are not built here.
pub fn build_term_observable(
    i_string: &TermIndexString,
    g: &GmeMap,
) -> Result<MultiCopyObservable> {
    require_plain_transposition(g)?;
    if i_string.is_empty() {
        return Err(Error::InvalidArgument("empty index string".into()));
    }
    let n_terms = g.bipartitions().len();
    for &i in &i_string.0 {
        if i >= n_terms {
            return Err(Error::InvalidArgument(format!(
                "index {i} out of range for {n_terms} bipartitions; the constant term reduces to lower-order moments"
            )));
        }
    }
    let d = g.base().dim();
    let n = i_string.len();
    let n_parties = g.n_sites();
    let factor_dim = d.pow(n as u32);
    let mut factors = Vec::with_capacity(n_parties);
    for u in 0..n_parties {
        let transposed: Vec<bool> = i_string
            .0
            .iter()
            .map(|&i| g.bipartitions()[i].a_side().contains(&u))
            .collect();
        let mut f = CMatrix::zeros(factor_dim, factor_dim);
        let count = d.pow(n as u32);
        for code in 0..count {
            let mut p = vec![0usize; n];
            let mut rem = code;
            for k in (0..n).rev() {
                p[k] = rem % d;
                rem /= d;
            }
            let mut row = 0usize;
            let mut col = 0usize;
            for k in 0..n {
                let prev = p[(k + n - 1) % n];
                let (rk, ck) = if transposed[k] {
                    (prev, p[k])
                } else {
                    (p[k], prev)
                };
                row = row * d + rk;
                col = col * d + ck;
            }
            f[(row, col)] += C64::new(1.0, 0.0);
        }
        factors.push(f);
    }
    MultiCopyObservable::new(n, d, factors)
}

/// The two-copy observable for `Tr[(Phi_i rho)^2]`: SWAP on every party.
fn swap_triple(n_parties: usize, d: usize) -> Result<MultiCopyObservable> {
    MultiCopyObservable::new(2, d, vec![swap_op(d); n_parties])
}

/// The two-copy observable for `Tr[Phi_i rho Phi_j rho]`, `i != j`: phi-hat
/// on parties `i` and `j`, SWAP elsewhere.
fn cross_term(n_parties: usize, i: usize, j: usize) -> Result<MultiCopyObservable> {
    let mut factors = Vec::with_capacity(n_parties);
    for u in 0..n_parties {
        factors.push(if u == i || u == j {
            phi_hat(2)?
        } else {
            swap_op(2)
        });
    }
    MultiCopyObservable::new(2, 2, factors)
}

/// Second moment of the plain tripartite transposition map with `c = 1`,
/// evaluated from two-copy expectations:
/// `s_2 = 14 + sum_i Tr[(Phi_i rho)^2] + 2 sum_{i<j} Tr[Phi_i rho Phi_j rho]`.
pub fn second_moment_via_operators(rho: &DensityOperator, g: &GmeMap) -> Result<f64> {
    require_tripartite_c1(g)?;
    let mut total = 14.0;
    let squares = expectation(&swap_triple(3, 2)?, rho)?;
    total += 3.0 * squares;
    for i in 0..3 {
        for j in (i + 1)..3 {
            total += 2.0 * expectation(&cross_term(3, i, j)?, rho)?;
        }
    }
    Ok(total)
}

/// Third moment of the plain tripartite transposition map with `c = 1`:
/// the cubic product terms are evaluated as three-copy expectations through
/// [`build_term_observable`], the embedded second-order terms through the
/// two-copy path, plus the constant 17.
pub fn third_moment_via_operators(rho: &DensityOperator, g: &GmeMap) -> Result<f64> {
    require_tripartite_c1(g)?;
    let mut total = 17.0;
    for i in 0..3usize {
        let obs = build_term_observable(&TermIndexString(vec![i, i, i]), g)?;
        total += expectation(&obs, rho)?;
    }
    for i in 0..3usize {
        for j in 0..3usize {
            if i == j {
                continue;
            }
            let obs = build_term_observable(&TermIndexString(vec![i, i, j]), g)?;
            total += 3.0 * expectation(&obs, rho)?;
        }
    }
    // distinct-index terms pair up as complex conjugates under order
    // reversal; only their sum is real
    let mut distinct = C64::new(0.0, 0.0);
    for i in 0..3usize {
        for j in 0..3usize {
            for k in 0..3usize {
                if i == j || j == k || i == k {
                    continue;
                }
                let obs = build_term_observable(&TermIndexString(vec![i, j, k]), g)?;
                distinct += expectation_complex(&obs, rho)?;
            }
        }
    }
    if distinct.im.abs() >= 1e-9 {
        return Err(Error::ImaginaryResidue {
            residue: distinct.im,
        });
    }
    total += distinct.re;
    let squares = expectation(&swap_triple(3, 2)?, rho)?;
    total += 3.0 * 3.0 * squares;
    for i in 0..3 {
        for j in (i + 1)..3 {
            total += 3.0 * 2.0 * expectation(&cross_term(3, i, j)?, rho)?;
        }
    }
    Ok(total)
}

/// A finite-shot estimate of an observable expectation.
#[derive(Debug, Clone, Copy)]
pub struct ShotEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub shots: u64,
}

/// Samples eigenvalue outcomes of a Hermitian multi-copy observable on
/// `rho^(x)n` and returns the sample mean with its standard error;
/// deterministic per seed.
pub fn sample_expectation(
    obs: &MultiCopyObservable,
    rho: &DensityOperator,
    shots: u64,
    seed: u64,
) -> Result<ShotEstimate> {
    assert!(shots >= 1);
    let assembled = obs.assembled();
    sample_expectation_of(&assembled, obs.copies, rho, shots, seed)
}

/// Sampling engine for an explicitly assembled Hermitian operator on the
/// copy-major space; `hermitian_part` of a near-Hermitian symmetrization is
/// accepted, anything beyond the tolerance is rejected.
pub fn sample_expectation_of(
    operator: &CMatrix,
    copies: usize,
    rho: &DensityOperator,
    shots: u64,
    seed: u64,
) -> Result<ShotEstimate> {
    let defect = hermiticity_defect(operator);
    if defect > crate::qcore::STATE_TOL {
        return Err(Error::NonHermitianObservable { defect });
    }
    let dim = operator.nrows();
    let mut rho_n = rho.matrix().clone();
    for _ in 1..copies {
        rho_n = kron(&rho_n, rho.matrix());
    }
    if rho_n.nrows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "operator dimension {dim} vs {} copies of dimension {}",
            copies,
            rho.shape().total_dim()
        )));
    }
    let (eigenvalues, eigenvectors) = qcore::eigh(operator)?;
    // outcome probabilities <v_k| rho^(x)n |v_k>
    let w = &rho_n * &eigenvectors;
    let mut probs: Vec<f64> = (0..dim)
        .map(|k| {
            let col_v = eigenvectors.column(k);
            let col_w = w.column(k);
            col_v.iter().zip(col_w.iter()).map(|(v, x)| (v.conj() * x).re).sum::<f64>()
        })
        .map(|p: f64| p.max(0.0))
        .collect();
    let norm: f64 = probs.iter().sum();
    debug_assert!((norm - 1.0).abs() < 1e-8, "probabilities sum to {norm}");
    for p in &mut probs {
        *p /= norm;
    }
    let mut cdf = Vec::with_capacity(dim);
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..shots {
        let u: f64 = rng.random();
        let k = cdf.partition_point(|&c| c < u).min(dim - 1);
        let outcome = eigenvalues[k];
        sum += outcome;
        sum_sq += outcome * outcome;
    }
    let n = shots as f64;
    let mean = sum / n;
    let variance = ((sum_sq - n * mean * mean) / (n - 1.0).max(1.0)).max(0.0);
    Ok(ShotEstimate {
        mean,
        std_error: (variance / n).sqrt(),
        shots,
    })
}

/// `(O + O^dag)/2`; on `rho^(x)n` its expectation agrees with the original
/// whenever the original's expectation is real.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}
