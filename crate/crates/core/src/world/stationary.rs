//! Long-run occupancy of a single agent under the stay/move dynamics.
//!
//! While following a path an agent's next location depends on where it is
//! heading, so location alone is not a Markov state. The chain here tracks
//! `(location, destination)` while moving and `location` while idle; its
//! location marginal is what the simulator's empirical occupancy converges to
//! when there is no schedule and no company (`delta_p` has no effect).

use thiserror::Error;

use super::{AgentProfile, FloorPlan, LocationId, RoutingTable};
use crate::kernel::TransitionKernel;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StationaryError {
    #[error("power iteration did not converge within {iterations} iterations (last L1 change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },
    #[error("start distribution has {got} entries, chain has {expected} states")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Stop once successive iterates differ by less than this in L1.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        PowerIteration { tolerance: 1e-10, max_iterations: 1_000_000 }
    }
}

/// Power iteration on the lazy chain `(I + P) / 2`, which has the same
/// stationary distribution as `P` but is aperiodic.
pub fn power_iteration(
    rows: &[Vec<(usize, f64)>],
    start: Vec<f64>,
    opts: PowerIteration,
) -> Result<Vec<f64>, StationaryError> {
    if start.len() != rows.len() {
        return Err(StationaryError::DimensionMismatch { expected: rows.len(), got: start.len() });
    }
    let mut pi = start;
    let mut next = vec![0.0; pi.len()];
    let mut change = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        next.iter_mut().zip(&pi).for_each(|(n, &p)| *n = 0.5 * p);
        for (s, row) in rows.iter().enumerate() {
            let mass = 0.5 * pi[s];
            if mass == 0.0 {
                continue;
            }
            for &(t, p) in row {
                next[t] += mass * p;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        change = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if change < opts.tolerance {
            return Ok(pi);
        }
    }
    Err(StationaryError::NoConvergence { iterations: opts.max_iterations, change })
}

/// Per-tick dynamics of one agent as a Markov chain over idle and moving states.
#[derive(Debug, Clone)]
pub struct MovementChain {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl MovementChain {
    pub fn new(plan: &FloorPlan, agent: &AgentProfile, fluctuation_rate: f64) -> Self {
        let n = plan.len();
        let routes = RoutingTable::new(plan);
        let dest = agent.destination_vec(n);
        let mut rows = vec![Vec::new(); n + n * n];
        let arrive = |at: LocationId, d: LocationId| if at == d { d } else { n + at * n + d };

        for i in 0..n {
            let stay = agent.stay_at(plan, i);
            let row = &mut rows[i];
            row.push((i, stay + (1.0 - stay) * dest[i]));
            for (d, &p) in dest.iter().enumerate() {
                if d != i && p > 0.0 {
                    row.push((n + i * n + d, (1.0 - stay) * p));
                }
            }
            for d in (0..n).filter(|&d| d != i) {
                let row = &mut rows[n + i * n + d];
                row.push((arrive(routes.next_hop(i, d), d), 1.0 - fluctuation_rate));
                let nb = plan.neighbors(i);
                for &m in nb {
                    row.push((arrive(m, d), fluctuation_rate / nb.len() as f64));
                }
            }
        }
        MovementChain { n, rows }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    /// State index of an idle agent at `loc`.
    pub fn idle_state(&self, loc: LocationId) -> usize {
        loc
    }

    pub fn location_of(&self, state: usize) -> LocationId {
        if state < self.n {
            state
        } else {
            (state - self.n) / self.n
        }
    }

    fn is_live(&self, state: usize) -> bool {
        state < self.n || {
            let k = state - self.n;
            k / self.n != k % self.n
        }
    }

    /// Stationary distribution over chain states, starting idle at `start`.
    pub fn stationary_states(&self, start: LocationId, opts: PowerIteration) -> Result<Vec<f64>, StationaryError> {
        let mut init = vec![0.0; self.n_states()];
        init[self.idle_state(start)] = 1.0;
        power_iteration(&self.rows, init, opts)
    }

    pub fn marginal(&self, states: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (s, &p) in states.iter().enumerate() {
            out[self.location_of(s)] += p;
        }
        out
    }
}

/// Long-run fraction of ticks the agent spends at each location, with no
/// schedule and no co-presence effect, starting idle at home.
pub fn stationary_distribution(
    plan: &FloorPlan,
    agent: &AgentProfile,
    fluctuation_rate: f64,
    opts: PowerIteration,
) -> Result<Vec<f64>, StationaryError> {
    let chain = MovementChain::new(plan, agent, fluctuation_rate);
    let states = chain.stationary_states(agent.home, opts)?;
    Ok(chain.marginal(&states))
}

/// Location-to-location kernel of the agent's dynamics: the chain's
/// transitions averaged over its stationary mix of idle and moving states at
/// each location. The stationary location distribution is invariant under it.
///
/// Locations the agent never reaches from home fall back to the idle rows.
pub fn location_kernel(
    plan: &FloorPlan,
    agent: &AgentProfile,
    fluctuation_rate: f64,
    opts: PowerIteration,
) -> Result<TransitionKernel, StationaryError> {
    let chain = MovementChain::new(plan, agent, fluctuation_rate);
    let pi = chain.stationary_states(agent.home, opts)?;
    let n = plan.len();
    let mut mass = vec![0.0; n];
    for (s, &p) in pi.iter().enumerate() {
        mass[chain.location_of(s)] += p;
    }
    let mut dense = vec![vec![0.0; n]; n];
    for (s, row) in chain.rows().iter().enumerate() {
        if !chain.is_live(s) {
            continue;
        }
        let at = chain.location_of(s);
        let weight = if mass[at] > 1e-12 {
            pi[s] / mass[at]
        } else if s == at {
            1.0
        } else {
            0.0
        };
        if weight == 0.0 {
            continue;
        }
        for &(t, p) in row {
            dense[at][chain.location_of(t)] += weight * p;
        }
    }
    for row in &mut dense {
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= total);
    }
    Ok(TransitionKernel::from_dense(&dense).expect("averaged chain rows are stochastic"))
}
