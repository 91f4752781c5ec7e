//! One seeded-graph-matching run: centered padding, the trace objective over
//! the non-seed block, its gradient, exact line search and Frank-Wolfe
//! iteration over the doubly stochastic matrices.
//!
//! With adjacency matrices split as
//!
//! ```text
//! A = | A11 A12 |      B = | B11 B12 |
//!     | A21 A22 |          | B21 B22 |
//! ```
//!
//! (seeds first), the objective over a non-seed correspondence `P` is
//!
//! ```text
//! f(P) = tr(Pᵀ A21 B21ᵀ) + tr(Pᵀ A12ᵀ B12) + tr(A22ᵀ P B22 Pᵀ)
//! ```
//!
//! and is maximized. The first two terms are linear and are folded into a
//! single matrix `L = A21 B21ᵀ + A12ᵀ B12` at construction.

use ndarray::{s, Array2, ArrayView2, Zip};
use serde::Serialize;

use crate::assignment::{max_assignment, permutation_matrix};
use crate::error::{Error, Result};

/// Row/column sum tolerance for doubly stochastic matrices.
pub const DS_TOLERANCE: f64 = 1e-9;

/// Centered, zero-padded adjacency pair of common size.
#[derive(Debug, Clone, PartialEq)]
pub struct PaddedPair {
    pub a: Array2<f64>,
    pub b: Array2<f64>,
    pub seeds: usize,
    pub orig_sizes: (usize, usize),
}

impl PaddedPair {
    pub fn size(&self) -> usize {
        self.a.nrows()
    }

    /// Non-seed working dimension.
    pub fn free_dim(&self) -> usize {
        self.size() - self.seeds
    }
}

fn check_adjacency(m: &ArrayView2<'_, f64>, name: &str) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{name} is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    if let Some(((r, c), x)) = m.indexed_iter().find(|(_, &x)| x != 0.0 && x != 1.0) {
        return Err(Error::InvalidParameter(format!("{name}[{r},{c}] = {x} is not 0/1")));
    }
    Ok(())
}

/// Maps off-diagonal 1 → +1 and 0 → −1 (diagonal 0), then zero-pads the
/// smaller matrix to the larger size. Seeds must occupy the first `s`
/// indices of both inputs.
pub fn pad_and_center(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, s: usize) -> Result<PaddedPair> {
    check_adjacency(&a, "a")?;
    check_adjacency(&b, "b")?;
    let (na, nb) = (a.nrows(), b.nrows());
    if s > na.min(nb) {
        return Err(Error::InvalidParameter(format!("seed count {s} exceeds graph sizes ({na}, {nb})")));
    }
    let size = na.max(nb);
    let center = |m: ArrayView2<'_, f64>| {
        let n = m.nrows();
        let mut out = Array2::zeros((size, size));
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    out[[i, j]] = 2.0 * m[[i, j]] - 1.0;
                }
            }
        }
        out
    };
    Ok(PaddedPair { a: center(a), b: center(b), seeds: s, orig_sizes: (na, nb) })
}

/// Block decomposition of a pair around the seed boundary, with the
/// quantities every objective/gradient evaluation needs.
#[derive(Debug, Clone)]
pub struct Blocks {
    pub a11: Array2<f64>,
    pub a12: Array2<f64>,
    pub a21: Array2<f64>,
    pub a22: Array2<f64>,
    pub b11: Array2<f64>,
    pub b12: Array2<f64>,
    pub b21: Array2<f64>,
    pub b22: Array2<f64>,
    linear: Array2<f64>,
    a22t: Array2<f64>,
    b22t: Array2<f64>,
    symmetric: bool,
}

impl Blocks {
    /// Splits two equally sized square matrices at `s`.
    pub fn new(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, s: usize) -> Result<Blocks> {
        let n = a.nrows();
        if a.dim() != (n, n) || b.dim() != (n, n) {
            return Err(Error::Dimension(format!("blocks need two equal square matrices, got {:?} and {:?}", a.dim(), b.dim())));
        }
        if s > n {
            return Err(Error::InvalidParameter(format!("seed count {s} exceeds size {n}")));
        }
        let a11 = a.slice(s![..s, ..s]).to_owned();
        let a12 = a.slice(s![..s, s..]).to_owned();
        let a21 = a.slice(s![s.., ..s]).to_owned();
        let a22 = a.slice(s![s.., s..]).to_owned();
        let b11 = b.slice(s![..s, ..s]).to_owned();
        let b12 = b.slice(s![..s, s..]).to_owned();
        let b21 = b.slice(s![s.., ..s]).to_owned();
        let b22 = b.slice(s![s.., s..]).to_owned();
        let linear = a21.dot(&b21.t()) + a12.t().dot(&b12);
        let a22t = a22.t().as_standard_layout().into_owned();
        let b22t = b22.t().as_standard_layout().into_owned();
        let symmetric = a22 == a22t && b22 == b22t;
        Ok(Blocks { a11, a12, a21, a22, b11, b12, b21, b22, linear, a22t, b22t, symmetric })
    }

    pub fn from_pair(pair: &PaddedPair) -> Blocks {
        Blocks::new(pair.a.view(), pair.b.view(), pair.seeds).expect("padded pair is square and conformable")
    }

    pub fn seeds(&self) -> usize {
        self.a11.nrows()
    }

    /// Non-seed dimension.
    pub fn free_dim(&self) -> usize {
        self.a22.nrows()
    }

    /// The constant part of the gradient, `A21 B21ᵀ + A12ᵀ B12`.
    pub fn linear_term(&self) -> &Array2<f64> {
        &self.linear
    }

    pub fn reassemble(&self) -> (Array2<f64>, Array2<f64>) {
        let join = |m11: &Array2<f64>, m12: &Array2<f64>, m21: &Array2<f64>, m22: &Array2<f64>| {
            let s = m11.nrows();
            let n = s + m22.nrows();
            let mut out = Array2::zeros((n, n));
            out.slice_mut(s![..s, ..s]).assign(m11);
            out.slice_mut(s![..s, s..]).assign(m12);
            out.slice_mut(s![s.., ..s]).assign(m21);
            out.slice_mut(s![s.., s..]).assign(m22);
            out
        };
        (join(&self.a11, &self.a12, &self.a21, &self.a22), join(&self.b11, &self.b12, &self.b21, &self.b22))
    }

    fn check(&self, p: &ArrayView2<'_, f64>) -> Result<()> {
        let m = self.free_dim();
        if p.dim() != (m, m) {
            return Err(Error::Dimension(format!("P is {:?}, expected {m}x{m}", p.dim())));
        }
        Ok(())
    }

    /// `A22ᵀ X B22`
    fn quad_left(&self, x: &ArrayView2<'_, f64>) -> Array2<f64> {
        self.a22t.dot(&x.dot(&self.b22))
    }

    /// `A22 X B22ᵀ`
    fn quad_right(&self, x: &ArrayView2<'_, f64>) -> Array2<f64> {
        self.a22.dot(&x.dot(&self.b22t))
    }

    /// `A22ᵀ Q B22` for a permutation `Q` with `Q[r, perm[r]] = 1`, using a
    /// row gather instead of a second product.
    fn quad_left_perm(&self, perm: &[usize]) -> Array2<f64> {
        let mut qb = Array2::zeros(self.b22.dim());
        for (r, &c) in perm.iter().enumerate() {
            qb.row_mut(r).assign(&self.b22.row(c));
        }
        self.a22t.dot(&qb)
    }

    fn quad_right_perm(&self, perm: &[usize]) -> Array2<f64> {
        let mut qbt = Array2::zeros(self.b22.dim());
        for (r, &c) in perm.iter().enumerate() {
            qbt.row_mut(r).assign(&self.b22t.row(c));
        }
        self.a22.dot(&qbt)
    }
}

fn inner(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>) -> f64 {
    Zip::from(x).and(y).fold(0.0, |acc, &a, &b| acc + a * b)
}

fn inner_perm(x: &Array2<f64>, perm: &[usize]) -> f64 {
    perm.iter().enumerate().map(|(r, &c)| x[[r, c]]).sum()
}

/// `f(P)`; defined for any square `P` of the non-seed dimension.
pub fn objective_f(blocks: &Blocks, p: ArrayView2<'_, f64>) -> Result<f64> {
    blocks.check(&p)?;
    let n = blocks.quad_left(&p);
    Ok(inner(&blocks.linear.view(), &p) + inner(&n.view(), &p))
}

/// `∇f(P) = A21 B21ᵀ + A12ᵀ B12 + A22 P B22ᵀ + A22ᵀ P B22`.
pub fn gradient_f(blocks: &Blocks, p: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    blocks.check(&p)?;
    let left = blocks.quad_left(&p);
    let right = if blocks.symmetric { left.clone() } else { blocks.quad_right(&p) };
    Ok(&blocks.linear + &left + &right)
}

/// Doubly stochastic square matrix (entries ≥ 0, unit row and column sums
/// within [`DS_TOLERANCE`]).
#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochastic(Array2<f64>);

impl DoublyStochastic {
    pub fn new(p: Array2<f64>) -> Result<Self> {
        if p.nrows() != p.ncols() {
            return Err(Error::Dimension(format!("doubly stochastic matrix must be square, got {:?}", p.dim())));
        }
        if let Some(x) = p.iter().find(|&&x| !(x >= -DS_TOLERANCE)) {
            return Err(Error::InvalidParameter(format!("negative or non-finite entry {x}")));
        }
        let err = marginal_error(&p.view());
        if err > DS_TOLERANCE {
            return Err(Error::InvalidParameter(format!("row/column sums off by {err:e}")));
        }
        Ok(DoublyStochastic(p))
    }

    /// `(1/k) 𝟙𝟙ᵀ`
    pub fn barycenter(k: usize) -> Self {
        DoublyStochastic(Array2::from_elem((k, k), 1.0 / k as f64))
    }

    pub fn from_permutation(perm: &[usize]) -> Self {
        DoublyStochastic(permutation_matrix(perm))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }

    pub fn max_marginal_error(&self) -> f64 {
        marginal_error(&self.0.view())
    }
}

/// Largest deviation of any row or column sum from 1.
pub fn marginal_error(p: &ArrayView2<'_, f64>) -> f64 {
    let rows = p.rows().into_iter().map(|r| (r.sum() - 1.0).abs());
    let cols = p.columns().into_iter().map(|c| (c.sum() - 1.0).abs());
    rows.chain(cols).fold(0.0, f64::max)
}

/// Maximizer over `[0, 1]` of `c2·α² + c1·α + c0`. Ties go to `α = 1`.
pub fn best_alpha(c2: f64, c1: f64) -> f64 {
    // gain relative to α = 0
    let gain_at_one = c2 + c1;
    let (mut best, mut best_gain) = if gain_at_one >= 0.0 { (1.0, gain_at_one) } else { (0.0, 0.0) };
    if c2 < 0.0 {
        let alpha = -c1 / (2.0 * c2);
        if alpha > 0.0 && alpha < 1.0 {
            let gain = c2 * alpha * alpha + c1 * alpha;
            if gain > best_gain {
                best = alpha;
                best_gain = gain;
            }
        }
    }
    debug_assert!(best_gain >= 0.0);
    best
}

/// Coefficients `(c2, c1, c0)` of `α ↦ f(αP + (1−α)Q)`.
pub fn line_coefficients(blocks: &Blocks, p: ArrayView2<'_, f64>, q: ArrayView2<'_, f64>) -> Result<(f64, f64, f64)> {
    blocks.check(&p)?;
    blocks.check(&q)?;
    let d = &p - &q;
    let nq = blocks.quad_left(&q);
    let nd = blocks.quad_left(&d.view());
    let c2 = inner(&nd.view(), &d.view());
    let c1 = inner(&blocks.linear.view(), &d.view()) + inner(&nq.view(), &d.view()) + inner(&nd.view(), &q);
    let c0 = inner(&blocks.linear.view(), &q) + inner(&nq.view(), &q);
    Ok((c2, c1, c0))
}

/// Exact maximizer `α ∈ [0, 1]` of `f(αP + (1−α)Q)`.
pub fn line_search(blocks: &Blocks, p: &DoublyStochastic, q: &DoublyStochastic) -> Result<f64> {
    let (c2, c1, _) = line_coefficients(blocks, p.view(), q.view())?;
    Ok(best_alpha(c2, c1))
}

/// Outcome of one Frank-Wolfe run followed by projection.
#[derive(Debug, Clone, Serialize)]
pub struct SgmRunResult {
    /// Non-seed vertex `i` of the first graph maps to `permutation[i]`.
    pub permutation: Vec<usize>,
    /// `f` at the projected permutation.
    pub final_objective: f64,
    /// `f` at the last relaxed iterate.
    pub relaxed_objective: f64,
    /// `f` at every iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Frank-Wolfe on a padded pair. `eps` is an absolute bound on the change
/// of `f` between iterates.
pub fn frank_wolfe_sgm(pair: &PaddedPair, p0: DoublyStochastic, eps: f64, max_iter: usize) -> Result<SgmRunResult> {
    frank_wolfe_blocks(&Blocks::from_pair(pair), p0, eps, max_iter, |_, _, _| {})
}

/// Frank-Wolfe on precomputed blocks. `observe` is called with
/// `(iteration, f, P)` for the start point and after every update.
pub fn frank_wolfe_blocks<F>(
    blocks: &Blocks,
    p0: DoublyStochastic,
    eps: f64,
    max_iter: usize,
    mut observe: F,
) -> Result<SgmRunResult>
where
    F: FnMut(usize, f64, &Array2<f64>),
{
    let m = blocks.free_dim();
    if p0.dim() != m {
        return Err(Error::Dimension(format!("start point is {0}x{0}, expected {m}x{m}", p0.dim())));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter("max_iter must be at least 1".into()));
    }
    if m == 0 {
        return Ok(SgmRunResult {
            permutation: Vec::new(),
            final_objective: 0.0,
            relaxed_objective: 0.0,
            objective_trace: vec![0.0],
            iterations: 0,
            converged: true,
        });
    }

    let linear = &blocks.linear;
    let mut p = p0.into_inner();
    let mut n_p = blocks.quad_left(&p.view());
    let mut m_p = if blocks.symmetric { None } else { Some(blocks.quad_right(&p.view())) };
    let value = |p: &Array2<f64>, n_p: &Array2<f64>| inner(&linear.view(), &p.view()) + inner(&n_p.view(), &p.view());
    let mut f = value(&p, &n_p);
    let mut trace = vec![f];
    observe(0, f, &p);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let grad = match &m_p {
            Some(m_p) => linear + &n_p + m_p,
            None => linear + &n_p + &n_p,
        };
        let q = max_assignment(grad.view())?.permutation;
        let n_q = blocks.quad_left_perm(&q);

        // α parameterizes αP + (1−α)Q
        let lq = inner_perm(linear, &q);
        let nq_q = inner_perm(&n_q, &q);
        let np_q = inner_perm(&n_p, &q);
        let lp = inner(&linear.view(), &p.view());
        let nq_p = inner(&n_q.view(), &p.view());
        let np_p = inner(&n_p.view(), &p.view());
        let c2 = np_p - np_q - nq_p + nq_q;
        let c1 = (lp - lq) + (nq_p - nq_q) + (np_q - nq_q);
        let alpha = best_alpha(c2, c1);

        iterations += 1;
        if alpha < 1.0 {
            let beta = 1.0 - alpha;
            p *= alpha;
            for (r, &c) in q.iter().enumerate() {
                p[[r, c]] += beta;
            }
            n_p = n_p * alpha + &(n_q * beta);
            if let Some(m_p) = m_p.as_mut() {
                let m_q = blocks.quad_right_perm(&q);
                *m_p *= alpha;
                m_p.scaled_add(beta, &m_q);
            }
        }
        let f_new = if alpha < 1.0 { value(&p, &n_p) } else { f };
        trace.push(f_new);
        observe(iterations, f_new, &p);
        let delta = (f_new - f).abs();
        f = f_new;
        if delta <= eps {
            converged = true;
            break;
        }
    }

    let projected = max_assignment(p.view())?.permutation;
    let final_objective = objective_f(blocks, permutation_matrix(&projected).view())?;
    Ok(SgmRunResult {
        permutation: projected,
        final_objective,
        relaxed_objective: f,
        objective_trace: trace,
        iterations,
        converged,
    })
}
