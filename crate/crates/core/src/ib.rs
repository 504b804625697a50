//! Discrete information bottleneck.
//!
//! Given a joint `p(v, c)`, find a stochastic encoder `q(e | v)` over `k`
//! clusters minimizing `I(V;E) − β·I(E;C)`. The solver alternates the
//! self-consistent equations
//!
//! ```text
//! q(e)     = Σ_v p(v) q(e|v)
//! q(c|e)   = Σ_v q(e|v) p(v) p(c|v) / q(e)
//! q(e|v)  ∝ q(e) · exp(−β · KL(p(c|v) ‖ q(c|e)))
//! ```
//!
//! Each sweep cannot increase the objective. All information quantities
//! are in nats.

use std::io::BufRead;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

const SUM_TOL: f64 = 1e-9;
const RENORMALIZE_WARN: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum IbError {
    #[error("degenerate bottleneck: k must be at least 1 (got {k})")]
    Degenerate { k: usize },
    #[error("beta must be finite and > 0, got {0}")]
    InvalidBeta(f64),
    #[error("gamma must be finite and >= 0, got {0}")]
    InvalidGamma(f64),
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("at least one restart is required")]
    NoRestarts,
    #[error("joint CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// A finite joint distribution `p(v, c)`, rows indexed by `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJoint {
    p: DMatrix<f64>,
}

impl DiscreteJoint {
    pub fn new(p: DMatrix<f64>) -> Result<Self, IbError> {
        if p.nrows() == 0 || p.ncols() == 0 {
            return Err(IbError::InvalidJoint("empty matrix".into()));
        }
        if p.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(IbError::InvalidJoint(
                "entries must be finite and nonnegative".into(),
            ));
        }
        let total = p.sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(IbError::InvalidJoint(format!(
                "entries sum to {total}, not 1"
            )));
        }
        if let Some(v) = p.row_iter().position(|r| r.sum() <= 0.0) {
            return Err(IbError::InvalidJoint(format!("row {v} is all zero")));
        }
        Ok(DiscreteJoint { p })
    }

    /// Divides by the total. Logs a warning when the total is more than
    /// 1e-6 away from 1. Returns the joint and the original total.
    pub fn normalized(m: DMatrix<f64>) -> Result<(Self, f64), IbError> {
        if m.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(IbError::InvalidJoint(
                "entries must be finite and nonnegative".into(),
            ));
        }
        let total = m.sum();
        if total <= 0.0 {
            return Err(IbError::InvalidJoint("entries sum to 0".into()));
        }
        if (total - 1.0).abs() > RENORMALIZE_WARN {
            log::warn!("joint sums to {total}; renormalizing");
        }
        Ok((Self::new(m / total)?, total))
    }

    /// Parses a CSV matrix (one row per `v`) and normalizes it. Lines
    /// starting with `#` are skipped.
    pub fn from_csv<R: BufRead>(source: R) -> Result<(Self, f64), IbError> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let row = t
                .split(',')
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|_| IbError::Csv {
                        line: idx + 1,
                        reason: format!("not a number: {:?}", f.trim()),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(IbError::Csv {
                        line: idx + 1,
                        reason: format!("expected {} columns, got {}", first.len(), row.len()),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(IbError::InvalidJoint("no rows".into()));
        }
        let m = DMatrix::from_row_iterator(rows.len(), rows[0].len(), rows.into_iter().flatten());
        Self::normalized(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn n_v(&self) -> usize {
        self.p.nrows()
    }

    pub fn n_c(&self) -> usize {
        self.p.ncols()
    }

    pub fn marginal_v(&self) -> Vec<f64> {
        self.p.row_iter().map(|r| r.sum()).collect()
    }

    pub fn marginal_c(&self) -> Vec<f64> {
        self.p.column_iter().map(|c| c.sum()).collect()
    }

    /// `p(c | v)`, one row per `v`.
    pub fn conditional_c_given_v(&self) -> DMatrix<f64> {
        let pv = self.marginal_v();
        DMatrix::from_fn(self.n_v(), self.n_c(), |v, c| self.p[(v, c)] / pv[v])
    }
}

/// `x · ln(x / y)` with `0 · ln 0 = 0`.
fn xlogx_over(x: f64, y: f64) -> f64 {
    if x > 0.0 {
        x * (x / y).ln()
    } else {
        0.0
    }
}

fn mi_of_matrix(p: &DMatrix<f64>) -> f64 {
    let rows: Vec<f64> = p.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = p.column_iter().map(|c| c.sum()).collect();
    let mut acc = 0.0;
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            acc += xlogx_over(p[(i, j)], rows[i] * cols[j]);
        }
    }
    acc
}

/// `I(V;C)` in nats.
pub fn mutual_information(p: &DiscreteJoint) -> f64 {
    mi_of_matrix(&p.p)
}

/// `KL(q ‖ p)` in nats; `+∞` when `q` puts mass where `p` has none.
pub fn kl_divergence(q: &[f64], p: &[f64]) -> Result<f64, IbError> {
    if q.len() != p.len() {
        return Err(IbError::DimensionMismatch(format!(
            "distributions of length {} and {}",
            q.len(),
            p.len()
        )));
    }
    Ok(kl_unchecked(q, p))
}

fn kl_unchecked(q: &[f64], p: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if qi > 0.0 {
            if pi <= 0.0 {
                return f64::INFINITY;
            }
            acc += qi * (qi / pi).ln();
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbOptions {
    pub k: usize,
    pub beta: f64,
    pub seed: u64,
    pub max_iter: usize,
    pub tol: f64,
}

impl IbOptions {
    pub fn new(k: usize, beta: f64) -> Self {
        IbOptions {
            k,
            beta,
            seed: 0,
            max_iter: 1000,
            tol: 1e-12,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Information terms of an encoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbTerms {
    pub i_ve: f64,
    pub i_ec: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IbSolution {
    /// `|V| × k`, row-stochastic.
    pub q_e_given_v: DMatrix<f64>,
    pub q_e: Vec<f64>,
    /// `k × |C|`, row-stochastic.
    pub q_c_given_e: DMatrix<f64>,
    pub beta: f64,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub seed: u64,
    pub i_ve: f64,
    pub i_ec: f64,
}

impl IbSolution {
    pub fn objective(&self) -> f64 {
        self.i_ve - self.beta * self.i_ec
    }

    pub fn k(&self) -> usize {
        self.q_e.len()
    }

    /// Per-row argmax of `q(e | v)`; ties go to the lowest cluster index.
    pub fn hard_assignment(&self) -> Vec<usize> {
        self.q_e_given_v
            .row_iter()
            .map(|row| {
                let mut best = 0;
                for (e, &q) in row.iter().enumerate() {
                    if q > row[best] {
                        best = e;
                    }
                }
                best
            })
            .collect()
    }
}

/// The cluster marginal and decoder implied by an encoder.
fn consistent_marginals(
    pv: &[f64],
    pcv: &DMatrix<f64>,
    pc: &[f64],
    q_ev: &DMatrix<f64>,
) -> (Vec<f64>, DMatrix<f64>) {
    let (nv, k) = q_ev.shape();
    let nc = pcv.ncols();
    let q_e: Vec<f64> = (0..k)
        .map(|e| (0..nv).map(|v| pv[v] * q_ev[(v, e)]).sum())
        .collect();
    let mut q_ce = DMatrix::<f64>::zeros(k, nc);
    for e in 0..k {
        if q_e[e] > 0.0 {
            for c in 0..nc {
                let s: f64 = (0..nv).map(|v| q_ev[(v, e)] * pv[v] * pcv[(v, c)]).sum();
                q_ce[(e, c)] = s / q_e[e];
            }
        } else {
            // Unused cluster: any decoder works; the marginal keeps rows stochastic.
            for c in 0..nc {
                q_ce[(e, c)] = pc[c];
            }
        }
    }
    (q_e, q_ce)
}

fn terms(
    pv: &[f64],
    pc: &[f64],
    q_ev: &DMatrix<f64>,
    q_e: &[f64],
    q_ce: &DMatrix<f64>,
    beta: f64,
) -> IbTerms {
    let mut i_ve = 0.0;
    for v in 0..q_ev.nrows() {
        for e in 0..q_ev.ncols() {
            i_ve += pv[v] * xlogx_over(q_ev[(v, e)], q_e[e]);
        }
    }
    let mut i_ec = 0.0;
    for e in 0..q_ce.nrows() {
        if q_e[e] > 0.0 {
            for c in 0..q_ce.ncols() {
                i_ec += q_e[e] * xlogx_over(q_ce[(e, c)], pc[c]);
            }
        }
    }
    IbTerms {
        i_ve,
        i_ec,
        objective: i_ve - beta * i_ec,
    }
}

/// `I(V;E)`, `I(E;C)` and the objective of an arbitrary encoder.
pub fn evaluate_encoder(
    p: &DiscreteJoint,
    q_e_given_v: &DMatrix<f64>,
    beta: f64,
) -> Result<IbTerms, IbError> {
    if q_e_given_v.nrows() != p.n_v() {
        return Err(IbError::DimensionMismatch(format!(
            "encoder has {} rows, joint has {}",
            q_e_given_v.nrows(),
            p.n_v()
        )));
    }
    let pv = p.marginal_v();
    let pc = p.marginal_c();
    let pcv = p.conditional_c_given_v();
    let (q_e, q_ce) = consistent_marginals(&pv, &pcv, &pc, q_e_given_v);
    Ok(terms(&pv, &pc, q_e_given_v, &q_e, &q_ce, beta))
}

#[cfg(debug_assertions)]
fn assert_row_stochastic(m: &DMatrix<f64>, what: &str) {
    for (i, row) in m.row_iter().enumerate() {
        let s = row.sum();
        debug_assert!((s - 1.0).abs() <= SUM_TOL, "{what} row {i} sums to {s}");
    }
}

/// One seeded run of the self-consistent iteration.
///
/// Stops when the objective moves by less than `tol` or after `max_iter`
/// sweeps; hitting the cap is reported through `converged`, not an error.
pub fn solve_ib(p: &DiscreteJoint, opts: &IbOptions) -> Result<IbSolution, IbError> {
    let IbOptions {
        k,
        beta,
        seed,
        max_iter,
        tol,
    } = *opts;
    if k == 0 {
        return Err(IbError::Degenerate { k });
    }
    if !beta.is_finite() || beta <= 0.0 {
        return Err(IbError::InvalidBeta(beta));
    }

    let nv = p.n_v();
    let pv = p.marginal_v();
    let pc = p.marginal_c();
    let pcv = p.conditional_c_given_v();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q_ev = DMatrix::<f64>::from_fn(nv, k, |_, _| rng.gen_range(1e-3..1.0));
    for mut row in q_ev.row_iter_mut() {
        let s = row.sum();
        row /= s;
    }

    let (mut q_e, mut q_ce) = consistent_marginals(&pv, &pcv, &pc, &q_ev);
    let mut current = terms(&pv, &pc, &q_ev, &q_e, &q_ce, beta);
    let mut trace = vec![current.objective];
    let mut converged = false;
    let mut logits = vec![0.0; k];

    for _ in 0..max_iter {
        for v in 0..nv {
            let pcv_row: Vec<f64> = pcv.row(v).iter().copied().collect();
            for e in 0..k {
                logits[e] = if q_e[e] > 0.0 {
                    let q_row: Vec<f64> = q_ce.row(e).iter().copied().collect();
                    q_e[e].ln() - beta * kl_unchecked(&pcv_row, &q_row)
                } else {
                    f64::NEG_INFINITY
                };
            }
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut z = 0.0;
            for e in 0..k {
                let w = (logits[e] - max).exp();
                q_ev[(v, e)] = w;
                z += w;
            }
            for e in 0..k {
                q_ev[(v, e)] /= z;
            }
        }
        let (next_e, next_ce) = consistent_marginals(&pv, &pcv, &pc, &q_ev);
        q_e = next_e;
        q_ce = next_ce;

        #[cfg(debug_assertions)]
        {
            assert_row_stochastic(&q_ev, "q(e|v)");
            assert_row_stochastic(&q_ce, "q(c|e)");
        }

        let next = terms(&pv, &pc, &q_ev, &q_e, &q_ce, beta);
        trace.push(next.objective);
        let delta = (current.objective - next.objective).abs();
        current = next;
        if delta < tol {
            converged = true;
            break;
        }
    }

    Ok(IbSolution {
        q_e_given_v: q_ev,
        q_e,
        q_c_given_e: q_ce,
        beta,
        objective_trace: trace,
        converged,
        seed,
        i_ve: current.i_ve,
        i_ec: current.i_ec,
    })
}

/// Runs `restarts` independent solves with seeds `opts.seed, opts.seed + 1,
/// …` in parallel and keeps the lowest objective; equal objectives go to the
/// lowest seed.
pub fn solve_ib_restarts(
    p: &DiscreteJoint,
    opts: &IbOptions,
    restarts: usize,
) -> Result<IbSolution, IbError> {
    if restarts == 0 {
        return Err(IbError::NoRestarts);
    }
    let runs = (0..restarts as u64)
        .into_par_iter()
        .map(|r| {
            solve_ib(
                p,
                &IbOptions {
                    seed: opts.seed.wrapping_add(r),
                    ..*opts
                },
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let best = runs
        .into_iter()
        .reduce(|best, s| {
            if s.objective() < best.objective() {
                s
            } else {
                best
            }
        })
        .expect("at least one run");
    Ok(best)
}

/// A distribution over `(v, e, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeWayJoint {
    n_v: usize,
    n_e: usize,
    n_c: usize,
    data: Vec<f64>,
}

impl ThreeWayJoint {
    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n_v, self.n_e, self.n_c)
    }

    pub fn get(&self, v: usize, e: usize, c: usize) -> f64 {
        self.data[(v * self.n_e + e) * self.n_c + c]
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Sums out `e`.
    pub fn marginal_vc(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n_v, self.n_c, |v, c| {
            (0..self.n_e).map(|e| self.get(v, e, c)).sum()
        })
    }

    /// `I(V;C | E)` in nats.
    pub fn conditional_mutual_information(&self) -> f64 {
        let (nv, ne, nc) = self.shape();
        let mut acc = 0.0;
        for e in 0..ne {
            let slice = DMatrix::from_fn(nv, nc, |v, c| self.get(v, e, c));
            let pe = slice.sum();
            if pe > 0.0 {
                acc += pe * mi_of_matrix(&(slice / pe));
            }
        }
        acc
    }
}

/// Builds `P(v, e, c) = P(v|e) · P(c|e) · P(e)` from a solution, with
/// `P(v|e)` obtained from `q(e|v)` and `p_v` by Bayes' rule.
pub fn factorized_joint(sol: &IbSolution, p_v: &[f64]) -> Result<ThreeWayJoint, IbError> {
    let (nv, k) = sol.q_e_given_v.shape();
    let nc = sol.q_c_given_e.ncols();
    if p_v.len() != nv || sol.q_c_given_e.nrows() != k || sol.q_e.len() != k {
        return Err(IbError::DimensionMismatch(format!(
            "encoder {nv}×{k}, decoder {}×{nc}, marginal of length {}",
            sol.q_c_given_e.nrows(),
            p_v.len()
        )));
    }
    let mut data = vec![0.0; nv * k * nc];
    for e in 0..k {
        let pe = sol.q_e[e];
        if pe <= 0.0 {
            continue;
        }
        for v in 0..nv {
            let p_v_given_e = sol.q_e_given_v[(v, e)] * p_v[v] / pe;
            for c in 0..nc {
                data[(v * k + e) * nc + c] = p_v_given_e * sol.q_c_given_e[(e, c)] * pe;
            }
        }
    }
    Ok(ThreeWayJoint {
        n_v: nv,
        n_e: k,
        n_c: nc,
        data,
    })
}

/// `KL(p ‖ q)` between two joints of the same shape.
pub fn joint_kl(p: &DiscreteJoint, q: &DMatrix<f64>) -> Result<f64, IbError> {
    if p.matrix().shape() != q.shape() {
        return Err(IbError::DimensionMismatch(format!(
            "{:?} vs {:?}",
            p.matrix().shape(),
            q.shape()
        )));
    }
    kl_divergence(p.matrix().as_slice(), q.as_slice())
}

/// Trade-off weight `γ ≥ 0` and its bottleneck equivalent `β = γ / (1 + γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaBeta {
    pub gamma: f64,
    pub beta: f64,
}

pub fn gamma_to_beta(gamma: f64) -> Result<GammaBeta, IbError> {
    if gamma.is_nan() || gamma < 0.0 || gamma == f64::INFINITY {
        return Err(IbError::InvalidGamma(gamma));
    }
    Ok(GammaBeta {
        gamma,
        beta: gamma / (1.0 + gamma),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn joint(rows: usize, cols: usize, vals: &[f64]) -> DiscreteJoint {
        DiscreteJoint::normalized(DMatrix::from_row_slice(rows, cols, vals))
            .unwrap()
            .0
    }

    #[test]
    fn product_joint_has_zero_information() {
        let px = [0.2, 0.5, 0.3];
        let py = [0.6, 0.4];
        let m = DMatrix::from_fn(3, 2, |i, j| px[i] * py[j]);
        assert_abs_diff_eq!(
            mutual_information(&DiscreteJoint::new(m).unwrap()),
            0.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn diagonal_joint_is_one_bit() {
        let j = joint(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert_abs_diff_eq!(mutual_information(&j), 2f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn kl_cases() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
        assert_eq!(
            kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap(),
            f64::INFINITY
        );
        assert!(kl_divergence(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn joint_validation() {
        assert!(DiscreteJoint::new(DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.6])).is_err());
        assert!(DiscreteJoint::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0])).is_err());
        assert!(DiscreteJoint::new(DMatrix::from_row_slice(1, 2, &[1.5, -0.5])).is_err());
        let (j, total) =
            DiscreteJoint::normalized(DMatrix::from_row_slice(1, 2, &[1.0, 3.0])).unwrap();
        assert_eq!(total, 4.0);
        assert_eq!(j.marginal_c(), vec![0.25, 0.75]);
    }

    #[test]
    fn csv_parsing() {
        let (j, total) = DiscreteJoint::from_csv("# joint\n1,1\n2,0\n".as_bytes()).unwrap();
        assert_eq!(total, 4.0);
        assert_eq!(j.marginal_v(), vec![0.5, 0.5]);
        assert!(matches!(
            DiscreteJoint::from_csv("1,1\n2\n".as_bytes()),
            Err(IbError::Csv { line: 2, .. })
        ));
    }

    #[test]
    fn single_cluster_collapses() {
        let j = joint(3, 3, &[0.2, 0.05, 0.05, 0.05, 0.2, 0.05, 0.1, 0.1, 0.2]);
        let sol = solve_ib(&j, &IbOptions::new(1, 4.0)).unwrap();
        assert!(sol.q_e_given_v.iter().all(|&q| q == 1.0));
        assert_abs_diff_eq!(sol.i_ve, 0.0, epsilon = 1e-15);
        let pc = j.marginal_c();
        for (c, want) in pc.iter().enumerate() {
            assert_abs_diff_eq!(sol.q_c_given_e[(0, c)], *want, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(sol.objective(), -4.0 * sol.i_ec, epsilon = 1e-15);
    }

    #[test]
    fn zero_clusters_is_degenerate() {
        let j = joint(2, 2, &[0.5, 0.0, 0.0, 0.5]);
        assert!(matches!(
            solve_ib(&j, &IbOptions::new(0, 1.0)),
            Err(IbError::Degenerate { k: 0 })
        ));
        assert!(matches!(
            solve_ib(&j, &IbOptions::new(2, 0.0)),
            Err(IbError::InvalidBeta(_))
        ));
    }

    #[test]
    fn hard_assignment_ties_to_lowest() {
        let sol = IbSolution {
            q_e_given_v: DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.2, 0.8]),
            q_e: vec![0.35, 0.65],
            q_c_given_e: DMatrix::from_row_slice(2, 1, &[1.0, 1.0]),
            beta: 1.0,
            objective_trace: vec![],
            converged: true,
            seed: 0,
            i_ve: 0.0,
            i_ec: 0.0,
        };
        assert_eq!(sol.hard_assignment(), vec![0, 1]);
    }

    #[test]
    fn gamma_beta_relation() {
        assert_eq!(gamma_to_beta(0.0).unwrap().beta, 0.0);
        assert_eq!(gamma_to_beta(1.0).unwrap().beta, 0.5);
        assert_abs_diff_eq!(gamma_to_beta(1e9).unwrap().beta, 1.0, epsilon = 1e-9);
        assert!(gamma_to_beta(-1.0).is_err());
        assert!(gamma_to_beta(f64::NAN).is_err());
    }

    #[test]
    fn restarts_pick_lowest_objective() {
        let j = joint(3, 2, &[0.3, 0.05, 0.05, 0.3, 0.15, 0.15]);
        let opts = IbOptions::new(2, 3.0).seed(5);
        let best = solve_ib_restarts(&j, &opts, 6).unwrap();
        for s in 5..11 {
            let single = solve_ib(&j, &IbOptions { seed: s, ..opts }).unwrap();
            assert!(best.objective() <= single.objective());
        }
        assert!(matches!(
            solve_ib_restarts(&j, &opts, 0),
            Err(IbError::NoRestarts)
        ));
    }
}
