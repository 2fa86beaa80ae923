//! Hamming neighbourhoods and steepest-ascent local search.

use itertools::Itertools;

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::scalar::Fitness;

/// Xor masks (packed layout) reaching every configuration at Hamming
/// distance `1..=d`, in increasing distance then lexicographic component order.
pub fn neighborhood_masks(n: usize, d: usize) -> Vec<u64> {
    (1..=d.min(n))
        .flat_map(|j| {
            (0..n).combinations(j).map(move |comps| {
                comps
                    .into_iter()
                    .fold(0u64, |m, c| m | (1u64 << (n - 1 - c)))
            })
        })
        .collect()
}

/// All configurations at Hamming distance `1..=d` from `x`.
pub fn neighborhood(x: &Configuration, d: usize) -> Result<Vec<Configuration>> {
    check_radius(x.len(), d)?;
    Ok(neighborhood_masks(x.len(), d)
        .into_iter()
        .map(|m| x.xor_mask(m))
        .collect())
}

pub(crate) fn check_radius(n: usize, d: usize) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::param(format!(
            "search radius must be in [1, n], got d={d} with n={n}"
        )));
    }
    Ok(())
}

/// Best strictly improving neighbour, if any. Ties among equally good
/// neighbours go to the lexicographically smallest configuration.
fn best_step<F, E>(
    x: &Configuration,
    value: F,
    masks: &[u64],
    evaluate: &E,
) -> Option<(Configuration, F)>
where
    F: Fitness,
    E: Fn(&Configuration) -> F,
{
    let mut best: Option<(Configuration, F)> = None;
    for &m in masks {
        let y = x.xor_mask(m);
        let v = evaluate(&y);
        if v <= value {
            continue;
        }
        match best {
            Some((by, bv)) if v < bv || (v == bv && y > by) => {}
            _ => best = Some((y, v)),
        }
    }
    best
}

/// Steepest-ascent climb from `start`, returning every visited configuration
/// (including `start`) with its value. Values along the path strictly increase.
pub fn climb_path<F, E>(
    start: Configuration,
    evaluate: E,
    d: usize,
) -> Result<Vec<(Configuration, F)>>
where
    F: Fitness,
    E: Fn(&Configuration) -> F,
{
    check_radius(start.len(), d)?;
    let masks = neighborhood_masks(start.len(), d);
    let mut path = vec![(start, evaluate(&start))];
    while let Some(step) = {
        let (x, v) = path[path.len() - 1];
        best_step(&x, v, &masks, &evaluate)
    } {
        path.push(step);
    }
    Ok(path)
}

/// Climbs from `start` to a configuration with no strictly better neighbour
/// within radius `d`.
pub fn local_search<F, E>(start: Configuration, evaluate: E, d: usize) -> Result<Configuration>
where
    F: Fitness,
    E: Fn(&Configuration) -> F,
{
    check_radius(start.len(), d)?;
    let masks = neighborhood_masks(start.len(), d);
    Ok(climb_with_masks(start, &evaluate, &masks))
}

pub(crate) fn climb_with_masks<F, E>(
    start: Configuration,
    evaluate: &E,
    masks: &[u64],
) -> Configuration
where
    F: Fitness,
    E: Fn(&Configuration) -> F,
{
    let mut x = start;
    let mut v = evaluate(&x);
    while let Some((y, w)) = best_step(&x, v, masks, evaluate) {
        x = y;
        v = w;
    }
    x
}
