//! Most likely location path per person and day.
//!
//! Scores are natural-log sums of the initial, transition and evidence terms.
//! Zero-probability transitions are hard constraints. Among equally scoring
//! paths the lexicographically smallest one wins.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fusion::{FusionError, MotionModel, SensorModel, TickEvents};
use crate::kernel::TransitionKernel;
use crate::sensor::ObservationEvent;
use crate::world::{AgentId, LocationId, WorldConfig};

/// Enumeration limit for [`brute_force_decode`].
pub const BRUTE_FORCE_LIMIT: u64 = 1_000_000;

/// Relative tolerance under which two log scores count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("every path has zero probability")]
    AllPathsZero,
    #[error("no evidence: at least one tick is required")]
    NoTicks,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("instance too large for brute force: {locations}^{ticks} paths")]
    TooLarge { locations: usize, ticks: usize },
    #[error(transparent)]
    Fusion(#[from] FusionError),
}

/// A decoded path with its log score.
#[derive(Debug, Clone, PartialEq)]
pub struct BestPath {
    pub path: Vec<LocationId>,
    pub log_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodedPath {
    pub agent: AgentId,
    pub day: u32,
    pub path: Vec<LocationId>,
    pub log_score: f64,
}

fn ln(p: f64) -> f64 {
    if p > 0.0 {
        p.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn beats(candidate: f64, best: f64) -> bool {
    if best == f64::NEG_INFINITY {
        return candidate > best;
    }
    candidate - best > TIE_TOLERANCE * best.abs().max(1.0)
}

fn check_dims(initial: &[f64], kernel: &TransitionKernel, evidence: &[Vec<f64>]) -> Result<usize, DecodeError> {
    let n = initial.len();
    if evidence.is_empty() {
        return Err(DecodeError::NoTicks);
    }
    if kernel.len() != n {
        return Err(DecodeError::Dimension(format!("initial has {n} entries, kernel {} rows", kernel.len())));
    }
    if let Some((t, e)) = evidence.iter().enumerate().find(|(_, e)| e.len() != n) {
        return Err(DecodeError::Dimension(format!("evidence at tick {t} has {} entries, expected {n}", e.len())));
    }
    Ok(n)
}

/// Log score of one path, summed in tick order.
pub fn path_log_score(initial: &[f64], kernel: &TransitionKernel, evidence: &[Vec<f64>], path: &[LocationId]) -> f64 {
    let mut score = ln(initial[path[0]]) + ln(evidence[0][path[0]]);
    for t in 1..path.len() {
        score += ln(kernel.prob(path[t - 1], path[t])) + ln(evidence[t][path[t]]);
    }
    score
}

/// Jointly most likely path (Viterbi), computed backwards so the forward
/// reconstruction can prefer the lowest location id at every tie.
pub fn viterbi_decode(
    initial: &[f64],
    kernel: &TransitionKernel,
    evidence: &[Vec<f64>],
) -> Result<BestPath, DecodeError> {
    let n = check_dims(initial, kernel, evidence)?;
    let ticks = evidence.len();
    let log_rows: Vec<Vec<(LocationId, f64)>> =
        (0..n).map(|i| kernel.row(i).iter().map(|&(j, p)| (j, p.ln())).collect()).collect();

    // best[t][x]: best log score of ticks t.. given the path is at x on tick t
    let mut best = vec![vec![0.0; n]; ticks];
    best[ticks - 1] = evidence[ticks - 1].iter().map(|&l| ln(l)).collect();
    for t in (0..ticks - 1).rev() {
        let (head, tail) = best.split_at_mut(t + 1);
        let next = &tail[0];
        for (x, slot) in head[t].iter_mut().enumerate() {
            let onward = log_rows[x]
                .iter()
                .map(|&(j, lp)| lp + next[j])
                .fold(f64::NEG_INFINITY, f64::max);
            *slot = ln(evidence[t][x]) + onward;
        }
    }

    let pick = |cands: &mut dyn Iterator<Item = (LocationId, f64)>| {
        let mut choice: Option<(LocationId, f64)> = None;
        for (x, s) in cands {
            if choice.is_none_or(|(_, b)| beats(s, b)) {
                choice = Some((x, s));
            }
        }
        choice
    };
    let (first, top) = pick(&mut (0..n).map(|x| (x, ln(initial[x]) + best[0][x]))).expect("n > 0");
    if top == f64::NEG_INFINITY {
        return Err(DecodeError::AllPathsZero);
    }
    let mut path = Vec::with_capacity(ticks);
    path.push(first);
    for t in 1..ticks {
        let at = path[t - 1];
        let (x, _) = pick(&mut log_rows[at].iter().map(|&(j, lp)| (j, lp + best[t][j]))).expect("stochastic rows are non-empty");
        path.push(x);
    }
    let log_score = path_log_score(initial, kernel, evidence, &path);
    Ok(BestPath { path, log_score })
}

/// Scores every path; the test oracle for [`viterbi_decode`].
pub fn brute_force_decode(
    initial: &[f64],
    kernel: &TransitionKernel,
    evidence: &[Vec<f64>],
) -> Result<BestPath, DecodeError> {
    let n = check_dims(initial, kernel, evidence)?;
    let ticks = evidence.len();
    let too_large = DecodeError::TooLarge { locations: n, ticks };
    let count = (n as u64).checked_pow(u32::try_from(ticks).map_err(|_| too_large.clone())?).ok_or(too_large.clone())?;
    if count > BRUTE_FORCE_LIMIT {
        return Err(too_large);
    }
    let mut path = vec![0; ticks];
    let mut best: Option<BestPath> = None;
    loop {
        let score = path_log_score(initial, kernel, evidence, &path);
        if best.as_ref().is_none_or(|b| beats(score, b.log_score)) {
            best = Some(BestPath { path: path.clone(), log_score: score });
        }
        // odometer increment in lexicographic order
        let mut k = ticks;
        loop {
            if k == 0 {
                let best = best.expect("at least one path");
                if best.log_score == f64::NEG_INFINITY {
                    return Err(DecodeError::AllPathsZero);
                }
                return Ok(best);
            }
            k -= 1;
            path[k] += 1;
            if path[k] < n {
                break;
            }
            path[k] = 0;
        }
    }
}

/// Decodes every agent and day of an event log.
///
/// Each day starts from a point mass at the agent's home, like the tracker.
/// Output is ordered by `(agent, day)`.
pub fn decode_run(
    events: &[ObservationEvent],
    config: &WorldConfig,
    motion: &MotionModel,
) -> Result<Vec<DecodedPath>, DecodeError> {
    let plan = &config.floor_plan;
    let n = plan.len();
    let agents = config.agent_ids();
    let model = SensorModel::new(&config.effective_sensors(), plan, agents.len());

    // evidence[agent][day][tick]
    let mut evidence = vec![vec![Vec::with_capacity(config.ticks_per_day as usize); config.days as usize]; agents.len()];
    let mut ticks = TickEvents::new(events);
    for day in 0..config.days {
        for tick in 0..config.ticks_per_day {
            let evs = ticks.at(day, tick);
            for (k, &a) in agents.iter().enumerate() {
                evidence[k][day as usize].push(model.likelihood(evs, a)?);
            }
        }
    }

    let mut out = Vec::with_capacity(agents.len() * config.days as usize);
    for (k, &agent) in agents.iter().enumerate() {
        let kernel = motion.kernel(agent)?;
        let mut initial = vec![0.0; n];
        initial[config.agent(agent).expect("listed agent").home] = 1.0;
        for (day, ev) in evidence[k].iter().enumerate() {
            let best = viterbi_decode(&initial, kernel, ev)?;
            out.push(DecodedPath { agent, day: day as u32, path: best.path, log_score: best.log_score });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn k2() -> TransitionKernel {
        TransitionKernel::from_dense(&[vec![0.7, 0.3], vec![0.4, 0.6]]).unwrap()
    }

    #[test]
    fn worked_example() {
        let init = [0.6, 0.4];
        let ev = vec![vec![0.9, 0.2], vec![0.3, 0.8]];
        // all four paths, scored by hand
        let score = |p: [usize; 2]| init[p[0]] * ev[0][p[0]] * k2().prob(p[0], p[1]) * ev[1][p[1]];
        assert!((score([0, 1]) - 0.1296).abs() < 1e-12);
        assert!((score([0, 0]) - 0.1134).abs() < 1e-12);
        assert!(score([1, 0]) < 0.1134 && score([1, 1]) < 0.1134);

        let v = viterbi_decode(&init, &k2(), &ev).unwrap();
        assert_eq!(v.path, vec![0, 1]);
        assert!((v.log_score - 0.1296f64.ln()).abs() < 1e-12);
        let b = brute_force_decode(&init, &k2(), &ev).unwrap();
        assert_eq!(b, v);
    }

    #[test]
    fn single_tick() {
        let v = viterbi_decode(&[0.5, 0.5], &k2(), &[vec![1.0, 0.0]]).unwrap();
        assert_eq!(v.path, vec![0]);
    }

    #[test]
    fn uniform_ties_pick_all_zeros() {
        let k = TransitionKernel::from_dense(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let ev = vec![vec![1.0, 1.0]; 5];
        assert_eq!(viterbi_decode(&[0.5, 0.5], &k, &ev).unwrap().path, vec![0; 5]);
        assert_eq!(brute_force_decode(&[0.5, 0.5], &k, &ev).unwrap().path, vec![0; 5]);
    }

    #[test]
    fn single_location_has_one_path() {
        let k = TransitionKernel::identity(1);
        let ev = vec![vec![0.3]; 7];
        let b = brute_force_decode(&[1.0], &k, &ev).unwrap();
        assert_eq!(b.path, vec![0; 7]);
    }

    #[test]
    fn contradictions_are_reported() {
        let k = TransitionKernel::identity(2);
        let ev = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(viterbi_decode(&[0.5, 0.5], &k, &ev), Err(DecodeError::AllPathsZero));
        assert_eq!(brute_force_decode(&[0.5, 0.5], &k, &ev), Err(DecodeError::AllPathsZero));
    }

    #[test]
    fn brute_force_refuses_large_instances() {
        let k = TransitionKernel::identity(10);
        let ev = vec![vec![1.0; 10]; 7];
        assert!(matches!(brute_force_decode(&[0.1; 10], &k, &ev), Err(DecodeError::TooLarge { .. })));
    }

    #[test]
    fn long_days_do_not_underflow() {
        let ev = vec![vec![0.01, 0.02]; 100_000];
        let v = viterbi_decode(&[0.5, 0.5], &k2(), &ev).unwrap();
        assert!(v.log_score.is_finite());
        assert_eq!(v.path.len(), 100_000);
    }

    #[test]
    fn agrees_with_brute_force_on_random_three_location_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..200 {
            let n = 3;
            let dense: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
                    let s: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / s).collect()
                })
                .collect();
            let k = TransitionKernel::from_dense(&dense).unwrap();
            let init: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
            let ev: Vec<Vec<f64>> = (0..6).map(|_| (0..n).map(|_| rng.gen::<f64>()).collect()).collect();
            let v = viterbi_decode(&init, &k, &ev).unwrap();
            let b = brute_force_decode(&init, &k, &ev).unwrap();
            assert_eq!(v.path, b.path);
            assert!((v.log_score - b.log_score).abs() < 1e-9);
        }
    }
}
