//! Dominance machinery, non-dominated sorting, survival selection and
//! knee-point extraction.
//!
//! Survival selection fills the next population front by front; the first
//! front that overflows is truncated by iteratively removing the member
//! with the smallest shift-based density estimation (SDE) distance. The SDE
//! distance of `p` is the minimum over the remaining peers `q` of the
//! Euclidean distance from `p` to the shifted image of `q`, where
//! `shift(q -> p)_k = max(q_k, p_k)`; only coordinates where `q` beats `p`
//! contribute, and an exact duplicate sits at distance zero, so crowded and
//! duplicated regions are thinned first. Distances are recomputed after
//! every removal; ties resolve to the smaller pool index. The operator is
//! hyperparameter-free.
//!
//! The single-objective mode degenerates on purpose: keep the best
//! playability values, ties broken by older generation then pool index.

use thiserror::Error;

use crate::indicators::hypervolume;
use crate::metrics::{ObjectiveMode, ObjectiveVector};

#[derive(Debug, Error)]
pub enum MoeaError {
    #[error("pool of {got} cannot fill a population of {need}")]
    PoolTooSmall { need: usize, got: usize },
    #[error("front point exceeds the nadir on axis {0}")]
    PointBeyondNadir(usize),
    #[error("empty front")]
    EmptyFront,
}

/// Member of the selection pool: its objectives and the generation it was
/// born in (the tie-break for the single-objective mode).
#[derive(Debug, Clone, Copy)]
pub struct SelectionCandidate {
    pub objectives: ObjectiveVector,
    pub born: usize,
}

/// Strict Pareto dominance over the mode's active objectives.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector, mode: ObjectiveMode) -> bool {
    let (av, bv) = (a.as_array(), b.as_array());
    let mut strictly = false;
    for &i in mode.active() {
        if av[i] > bv[i] {
            return false;
        }
        if av[i] < bv[i] {
            strictly = true;
        }
    }
    strictly
}

/// Fast non-dominated sorting; returns fronts of pool indices, rank 0 first.
pub fn nondominated_sort(pool: &[ObjectiveVector], mode: ObjectiveMode) -> Vec<Vec<usize>> {
    let n = pool.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&pool[i], &pool[j], mode) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates(&pool[j], &pool[i], mode) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(std::mem::replace(&mut current, next));
    }
    fronts
}

/// SDE distance of `p` against the peers listed in `rest` (pool indices).
fn sde_distance(
    pool: &[ObjectiveVector],
    active: &[usize],
    p: usize,
    rest: &[usize],
) -> f64 {
    let pv = pool[p].as_array();
    let mut best = f64::INFINITY;
    for &q in rest {
        if q == p {
            continue;
        }
        let qv = pool[q].as_array();
        let mut dist2 = 0.0;
        for &k in active {
            let shifted = qv[k].max(pv[k]);
            let d = shifted - pv[k];
            dist2 += d * d;
        }
        if dist2 < best {
            best = dist2;
        }
    }
    best.sqrt()
}

/// Selects `lambda` pool indices for the next generation.
pub fn sde_survival_select(
    pool: &[SelectionCandidate],
    lambda: usize,
    mode: ObjectiveMode,
) -> Result<Vec<usize>, MoeaError> {
    if pool.len() < lambda {
        return Err(MoeaError::PoolTooSmall { need: lambda, got: pool.len() });
    }
    if pool.len() == lambda {
        return Ok((0..lambda).collect());
    }

    if mode == ObjectiveMode::P {
        // degenerate single-objective rule: best f_P, older first, then index
        let mut order: Vec<usize> = (0..pool.len()).collect();
        order.sort_by(|&a, &b| {
            pool[a]
                .objectives
                .f_p
                .partial_cmp(&pool[b].objectives.f_p)
                .unwrap()
                .then(pool[a].born.cmp(&pool[b].born))
                .then(a.cmp(&b))
        });
        let mut chosen = order[..lambda].to_vec();
        chosen.sort_unstable();
        return Ok(chosen);
    }

    let objectives: Vec<ObjectiveVector> = pool.iter().map(|c| c.objectives).collect();
    let fronts = nondominated_sort(&objectives, mode);
    let mut chosen: Vec<usize> = Vec::with_capacity(lambda);
    for front in fronts {
        if chosen.len() + front.len() <= lambda {
            chosen.extend_from_slice(&front);
            if chosen.len() == lambda {
                break;
            }
            continue;
        }
        // truncate this front by iterative SDE removal
        let mut remaining = front;
        while chosen.len() + remaining.len() > lambda {
            let mut worst = 0;
            let mut worst_dist = f64::INFINITY;
            for (slot, &p) in remaining.iter().enumerate() {
                let d = sde_distance(&objectives, mode.active(), p, &remaining);
                if d < worst_dist {
                    worst_dist = d;
                    worst = slot;
                }
            }
            remaining.remove(worst);
        }
        chosen.extend_from_slice(&remaining);
        break;
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Index of the front member whose removal costs the most hypervolume.
/// Ties resolve to the smaller index.
pub fn knee_point(front: &[Vec<f64>], nadir: &[f64]) -> Result<usize, MoeaError> {
    if front.is_empty() {
        return Err(MoeaError::EmptyFront);
    }
    for p in front {
        for (k, (&x, &n)) in p.iter().zip(nadir).enumerate() {
            if x > n {
                return Err(MoeaError::PointBeyondNadir(k));
            }
        }
    }
    let total = hypervolume(front, nadir).expect("knee point expects 2 or 3 objectives");
    let mut best = 0;
    let mut best_contribution = f64::NEG_INFINITY;
    for i in 0..front.len() {
        let rest: Vec<Vec<f64>> = front
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let without = hypervolume(&rest, nadir).expect("knee point expects 2 or 3 objectives");
        let contribution = total - without;
        // strict improvement keeps the smallest index on ties
        if contribution > best_contribution {
            best_contribution = contribution;
            best = i;
        }
    }
    Ok(best)
}
