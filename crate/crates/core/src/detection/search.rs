//! Local search over QPSK vectors starting from the MMSE decision.
//!
//! The neighborhood of a state changes one symbol to one of its two nearest
//! constellation points, so `N_Neigh = 2K`. Metrics are updated in `O(K)`
//! per candidate from `c = Hᴴ(x − Hq)` and the Gram matrix `HᴴH`.

use std::collections::{HashMap, VecDeque};
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::complexity::{ComplexityParams, Technique};
use super::linear::mmse_filter;
use super::{indices_to_symbols, qpsk_slice, qpsk_symbol, DetectionError, DetectionProblem, DetectionResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Likelihood ascent: only strictly improving moves, stop at a local minimum.
    Las,
    /// Tabu search: always move to the best non-tabu neighbor, return the best state seen.
    Ts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub state: Vec<u8>,
    /// Metric of `state`, recomputed from scratch.
    pub metric: f64,
    /// Tabu list contents at the moment the move was chosen.
    pub tabu_before: Vec<Vec<u8>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchTrace {
    pub initial: Vec<u8>,
    pub initial_metric: f64,
    pub steps: Vec<SearchStep>,
}

/// FIFO of recently visited states with exact-vector membership.
struct Tabu {
    cap: usize,
    order: VecDeque<Vec<u8>>,
    count: HashMap<Vec<u8>, usize>,
}

impl Tabu {
    fn new(cap: usize) -> Self {
        Self { cap, order: VecDeque::with_capacity(cap + 1), count: HashMap::new() }
    }

    fn push(&mut self, s: &[u8]) {
        if self.cap == 0 {
            return;
        }
        self.order.push_back(s.to_vec());
        *self.count.entry(s.to_vec()).or_default() += 1;
        if self.order.len() > self.cap {
            let old = self.order.pop_front().expect("non-empty");
            if let Some(c) = self.count.get_mut(&old) {
                *c -= 1;
                if *c == 0 {
                    self.count.remove(&old);
                }
            }
        }
    }

    fn contains(&self, s: &[u8]) -> bool {
        self.count.contains_key(s)
    }
}

pub fn detect_random_step(
    problem: &DetectionProblem,
    mode: SearchMode,
    n_iter: usize,
    n_tabu: usize,
) -> Result<DetectionResult, DetectionError> {
    run(problem, mode, n_iter, n_tabu, None)
}

/// [`detect_random_step`] that also records every move for auditing.
pub fn detect_random_step_traced(
    problem: &DetectionProblem,
    mode: SearchMode,
    n_iter: usize,
    n_tabu: usize,
) -> Result<(DetectionResult, SearchTrace), DetectionError> {
    let mut trace = SearchTrace::default();
    let r = run(problem, mode, n_iter, n_tabu, Some(&mut trace))?;
    Ok((r, trace))
}

fn run(
    problem: &DetectionProblem,
    mode: SearchMode,
    n_iter: usize,
    n_tabu: usize,
    mut trace: Option<&mut SearchTrace>,
) -> Result<DetectionResult, DetectionError> {
    let start = Instant::now();
    let k = problem.k();
    let h = problem.h();
    let gram = h.gram();
    let mut state: Vec<u8> = mmse_filter(&problem.g, problem.p())?.mat_vec(&problem.x).into_iter().map(qpsk_slice).collect();
    let hq = h.mat_vec(&indices_to_symbols(&state));
    let resid: Vec<Complex64> = problem.x.iter().zip(&hq).map(|(a, b)| a - b).collect();
    let mut corr = h.adjoint_mat_vec(&resid);
    let mut metric: f64 = resid.iter().map(|z| z.norm_sqr()).sum();

    if let Some(t) = trace.as_deref_mut() {
        t.initial = state.clone();
        t.initial_metric = problem.metric(&state);
    }
    let mut best = (metric, state.clone());
    let mut tabu = Tabu::new(if mode == SearchMode::Ts { n_tabu } else { 0 });
    tabu.push(&state);
    let mut visited = 1u64;
    let mut iterations = 0usize;

    for _ in 0..n_iter {
        iterations += 1;
        let mut choice: Option<(f64, usize, u8)> = None;
        for u in 0..k {
            let old = qpsk_symbol(state[u]);
            for bit in [1u8, 2u8] {
                let cand = state[u] ^ bit;
                let delta = qpsk_symbol(cand) - old;
                let m = metric - 2.0 * (delta.conj() * corr[u]).re + delta.norm_sqr() * gram[(u, u)].re;
                visited += 1;
                if mode == SearchMode::Ts && n_tabu > 0 {
                    state[u] = cand;
                    let forbidden = tabu.contains(&state);
                    state[u] = cand ^ bit;
                    if forbidden {
                        continue;
                    }
                }
                if choice.map_or(true, |(bm, _, _)| m < bm) {
                    choice = Some((m, u, cand));
                }
            }
        }
        let Some((m_new, u, cand)) = choice else { break };
        if mode == SearchMode::Las && !(m_new < metric - 1e-12 * metric.abs()) {
            break;
        }
        let tabu_before = trace.as_ref().map(|_| tabu.order.iter().cloned().collect::<Vec<_>>());
        let delta = qpsk_symbol(cand) - qpsk_symbol(state[u]);
        for (j, c) in corr.iter_mut().enumerate() {
            *c -= gram[(j, u)] * delta;
        }
        state[u] = cand;
        metric = m_new;
        tabu.push(&state);
        if metric < best.0 {
            best = (metric, state.clone());
        }
        if let Some(t) = trace.as_deref_mut() {
            t.steps.push(SearchStep { state: state.clone(), metric: problem.metric(&state), tabu_before: tabu_before.unwrap_or_default() });
        }
    }

    let (technique, params) = match mode {
        SearchMode::Ts => (Technique::Ts, ComplexityParams { n_iter: Some(n_iter), n_tabu: Some(n_tabu), n_neigh: Some(2 * k), r: None }),
        // LAS runs a data-dependent number of sweeps; count the ones performed.
        SearchMode::Las => (Technique::Las, ComplexityParams { n_iter: Some(iterations), n_tabu: Some(0), n_neigh: Some(2 * k), r: None }),
    };
    let flops = technique.flops(problem.m(), k, &params)?;
    Ok(DetectionResult::finish(problem, best.1, visited, flops, start))
}
