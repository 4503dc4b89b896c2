//! Hypervolume, reference-front construction and coverage indicators.
//!
//! All indicator work happens in normalized objective space: the pseudo
//! reference front is the non-dominated subset of every generator observed
//! across all provided runs, its componentwise min/max become the
//! normalization bounds, and hypervolume uses a nadir of 1.1 per axis.
//! Hypervolume is exact: a sorted sweep for two objectives, slicing along
//! the third axis for three. CPF is the fraction of reference points within
//! Chebyshev radius `theta` of the nearest non-dominated solution, a
//! documented stand-in for coverage over the Pareto front that keeps the
//! emphasis on how much of the front a generator set spans.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("hypervolume supports 2 or 3 objectives, got {0}")]
    UnsupportedDimension(usize),
    #[error("empty reference front")]
    EmptyReference,
    #[error("empty history")]
    EmptyHistory,
}

/// Normalized pseudo Pareto front plus the bounds that produced it.
#[derive(Debug, Clone)]
pub struct ReferenceFront {
    pub points: Vec<[f64; 3]>,
    /// Per-objective `(min, max)` over the non-dominated subset.
    pub bounds: [(f64, f64); 3],
}

fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Non-dominated subset indices (full objective space, minimization).
fn nondominated_filter(points: &[Vec<f64>]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            !points.iter().enumerate().any(|(j, q)| {
                j != i && (dominates_slice(q, &points[i]) || (j < i && q == &points[i]))
            })
        })
        .collect()
}

/// Normalizes one objective vector with the given bounds. A degenerate
/// axis (max == min) maps to zero.
pub fn normalize(v: [f64; 3], bounds: &[(f64, f64); 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for k in 0..3 {
        let (lo, hi) = bounds[k];
        if hi > lo {
            out[k] = (v[k] - lo) / (hi - lo);
        }
    }
    out
}

/// Builds the reference front from the full history of evaluated
/// generators: filter to the non-dominated subset first, then derive the
/// normalization bounds from that subset.
pub fn build_pseudo_pf(history: &[[f64; 3]]) -> Result<ReferenceFront, IndicatorError> {
    if history.is_empty() {
        return Err(IndicatorError::EmptyHistory);
    }
    let as_vecs: Vec<Vec<f64>> = history.iter().map(|p| p.to_vec()).collect();
    let keep = nondominated_filter(&as_vecs);
    let mut bounds = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for &i in &keep {
        for k in 0..3 {
            bounds[k].0 = bounds[k].0.min(history[i][k]);
            bounds[k].1 = bounds[k].1.max(history[i][k]);
        }
    }
    for (k, &(lo, hi)) in bounds.iter().enumerate() {
        if hi <= lo {
            log::warn!("objective axis {k} is degenerate (min = max = {lo}); it normalizes to 0");
        }
    }
    let points = keep.iter().map(|&i| normalize(history[i], &bounds)).collect();
    Ok(ReferenceFront { points, bounds })
}

/// 2D hypervolume of a non-dominated staircase, by sorted sweep.
fn hv2(mut points: Vec<Vec<f64>>, nadir: &[f64]) -> f64 {
    points.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut hv = 0.0;
    let mut best_y = f64::INFINITY;
    let mut staircase = Vec::new();
    for p in points {
        if p[1] < best_y {
            best_y = p[1];
            staircase.push(p);
        }
    }
    for (i, p) in staircase.iter().enumerate() {
        let next_x = if i + 1 < staircase.len() { staircase[i + 1][0] } else { nadir[0] };
        hv += (next_x - p[0]) * (nadir[1] - p[1]);
    }
    hv
}

/// Exact hypervolume of the region dominated by `points` up to `nadir`.
/// Points not strictly better than the nadir on every axis, dominated
/// points and duplicates all contribute nothing.
pub fn hypervolume(points: &[Vec<f64>], nadir: &[f64]) -> Result<f64, IndicatorError> {
    let m = nadir.len();
    if !(2..=3).contains(&m) {
        return Err(IndicatorError::UnsupportedDimension(m));
    }
    let in_range: Vec<Vec<f64>> = points
        .iter()
        .filter(|p| {
            assert_eq!(p.len(), m, "point dimension must match the nadir");
            p.iter().zip(nadir).all(|(x, n)| x < n)
        })
        .cloned()
        .collect();
    let keep = nondominated_filter(&in_range);
    let front: Vec<Vec<f64>> = keep.into_iter().map(|i| in_range[i].clone()).collect();
    if front.is_empty() {
        return Ok(0.0);
    }
    if m == 2 {
        return Ok(hv2(front, nadir));
    }

    // slice along the third axis: within [z_i, z_next), exactly the points
    // with z <= z_i are active
    let mut zs: Vec<f64> = front.iter().map(|p| p[2]).collect();
    zs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zs.dedup();
    let mut hv = 0.0;
    for (i, &z) in zs.iter().enumerate() {
        let z_next = if i + 1 < zs.len() { zs[i + 1] } else { nadir[2] };
        let slice: Vec<Vec<f64>> =
            front.iter().filter(|p| p[2] <= z).map(|p| vec![p[0], p[1]]).collect();
        hv += hv2(slice, nadir) * (z_next - z);
    }
    Ok(hv)
}

/// Fraction of reference points within Chebyshev distance `theta` of the
/// nearest non-dominated solution. Both sides must be normalized with the
/// same bounds.
pub fn cpf(
    solutions: &[[f64; 3]],
    reference: &ReferenceFront,
    theta: f64,
) -> Result<f64, IndicatorError> {
    if reference.points.is_empty() {
        return Err(IndicatorError::EmptyReference);
    }
    if solutions.is_empty() {
        return Ok(0.0);
    }
    let as_vecs: Vec<Vec<f64>> = solutions.iter().map(|p| p.to_vec()).collect();
    let front: Vec<&[f64; 3]> =
        nondominated_filter(&as_vecs).into_iter().map(|i| &solutions[i]).collect();
    let covered = reference
        .points
        .iter()
        .filter(|r| {
            front.iter().any(|s| {
                r.iter().zip(s.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= theta
            })
        })
        .count();
    Ok(covered as f64 / reference.points.len() as f64)
}

/// Per-generation hypervolume of each population's non-dominated subset,
/// always in full 3-objective space, normalized by shared bounds.
pub fn hv_history(
    per_generation: &[Vec<[f64; 3]>],
    bounds: &[(f64, f64); 3],
    nadir: &[f64],
) -> Result<Vec<f64>, IndicatorError> {
    per_generation
        .iter()
        .map(|pop| {
            let pts: Vec<Vec<f64>> =
                pop.iter().map(|&p| normalize(p, bounds).to_vec()).collect();
            hypervolume(&pts, nadir)
        })
        .collect()
}
