//! Sparse row-stochastic transition kernels over location bins.

use crate::world::{FloorPlan, LocationId, SUM_TOLERANCE};

/// Row-stochastic matrix stored as sorted `(column, probability)` rows.
///
/// Only positive entries are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel {
    rows: Vec<Vec<(LocationId, f64)>>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("kernel row {row} sums to {sum}")]
    RowSum { row: usize, sum: f64 },
    #[error("kernel entry ({row}, {col}) is {value}")]
    BadEntry { row: usize, col: usize, value: f64 },
    #[error("kernel has {rows} rows but row {row} references column {col}")]
    OutOfRange { rows: usize, row: usize, col: usize },
    #[error("kernel entry ({row}, {col}) is positive but the locations are not adjacent")]
    NotAdjacent { row: usize, col: usize },
}

impl TransitionKernel {
    /// Builds a kernel from sparse rows, merging duplicate columns and
    /// dropping zeros. Rows must sum to one.
    pub fn from_rows(rows: Vec<Vec<(LocationId, f64)>>) -> Result<Self, KernelError> {
        let n = rows.len();
        let mut clean = Vec::with_capacity(n);
        for (r, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(LocationId, f64)> = Vec::with_capacity(row.len());
            for (c, p) in row {
                if c >= n {
                    return Err(KernelError::OutOfRange { rows: n, row: r, col: c });
                }
                if !p.is_finite() || p < 0.0 {
                    return Err(KernelError::BadEntry { row: r, col: c, value: p });
                }
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += p,
                    _ => merged.push((c, p)),
                }
            }
            merged.retain(|&(_, p)| p > 0.0);
            let sum: f64 = merged.iter().map(|e| e.1).sum();
            if (sum - 1.0).abs() > SUM_TOLERANCE {
                return Err(KernelError::RowSum { row: r, sum });
            }
            clean.push(merged);
        }
        Ok(TransitionKernel { rows: clean })
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Result<Self, KernelError> {
        Self::from_rows(
            dense
                .iter()
                .map(|row| row.iter().copied().enumerate().collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        TransitionKernel { rows: (0..n).map(|i| vec![(i, 1.0)]).collect() }
    }

    /// Stay or step to any neighbor, all equally likely.
    pub fn uniform_adjacent(plan: &FloorPlan) -> Self {
        let rows = (0..plan.len())
            .map(|i| {
                let mut row: Vec<_> = std::iter::once(i).chain(plan.neighbors(i).iter().copied()).collect();
                row.sort_unstable();
                let p = 1.0 / row.len() as f64;
                row.into_iter().map(|c| (c, p)).collect()
            })
            .collect();
        TransitionKernel { rows }
    }

    /// Mixes in `weight` of [`TransitionKernel::uniform_adjacent`], so every
    /// stay and every single-hop move keeps positive probability.
    pub fn with_adjacency_floor(&self, plan: &FloorPlan, weight: f64) -> Self {
        let uniform = Self::uniform_adjacent(plan);
        let rows = self
            .rows
            .iter()
            .zip(&uniform.rows)
            .map(|(row, urow)| {
                let mut merged: Vec<_> = row
                    .iter()
                    .map(|&(c, p)| (c, (1.0 - weight) * p))
                    .chain(urow.iter().map(|&(c, p)| (c, weight * p)))
                    .collect();
                merged.sort_by_key(|e| e.0);
                let mut out: Vec<(LocationId, f64)> = Vec::with_capacity(merged.len());
                for (c, p) in merged {
                    match out.last_mut() {
                        Some(last) if last.0 == c => last.1 += p,
                        _ => out.push((c, p)),
                    }
                }
                out
            })
            .collect();
        TransitionKernel { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: LocationId) -> &[(LocationId, f64)] {
        &self.rows[i]
    }

    pub fn prob(&self, i: LocationId, j: LocationId) -> f64 {
        self.rows[i]
            .binary_search_by_key(&j, |e| e.0)
            .map_or(0.0, |k| self.rows[i][k].1)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        self.rows
            .iter()
            .map(|row| {
                let mut d = vec![0.0; n];
                for &(c, p) in row {
                    d[c] = p;
                }
                d
            })
            .collect()
    }

    /// Checks that positive entries only connect a location to itself or a neighbor.
    pub fn check_support(&self, plan: &FloorPlan) -> Result<(), KernelError> {
        for (r, row) in self.rows.iter().enumerate() {
            for &(c, _) in row {
                if c != r && !plan.is_adjacent(r, c) {
                    return Err(KernelError::NotAdjacent { row: r, col: c });
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_must_be_stochastic() {
        assert!(TransitionKernel::from_dense(&[vec![0.5, 0.4], vec![0.0, 1.0]]).is_err());
        assert!(TransitionKernel::from_dense(&[vec![1.5, -0.5], vec![0.0, 1.0]]).is_err());
        let k = TransitionKernel::from_dense(&[vec![0.7, 0.3], vec![0.0, 1.0]]).unwrap();
        assert_eq!(k.row(1), &[(1, 1.0)]);
        assert_eq!(k.prob(0, 1), 0.3);
        assert_eq!(k.prob(1, 0), 0.0);
    }

    #[test]
    fn adjacency_floor_keeps_rows_stochastic_and_local() {
        let plan = FloorPlan::with_tags(3, [(0, 1), (1, 2)], &[]).unwrap();
        let k = TransitionKernel::identity(3).with_adjacency_floor(&plan, 1e-3);
        for i in 0..3 {
            let s: f64 = k.row(i).iter().map(|e| e.1).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(k.prob(0, 1) > 0.0);
        assert_eq!(k.prob(0, 2), 0.0);
        k.check_support(&plan).unwrap();
    }
}
