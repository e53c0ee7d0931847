//! Exhaustive correctness oracle for the knapsack DP.

use super::{CacheOption, EfficientStateSet, PlacementSolution};
use crate::catalog::Library;
use crate::error::{Error, Result};

/// Upper bound on `(V + 1)^M`.
pub const BRUTEFORCE_LIMIT: f64 = 1e7;

/// Enumerates every per-video choice among the options and macro-cell
/// service. Among assignments with the maximal objective it returns the one
/// whose last video has the most preferred choice, then the second to last,
/// and so on.
pub fn solve_bruteforce(library: &Library, cs: &EfficientStateSet, capacity: u64) -> Result<PlacementSolution> {
    let m = library.len();
    let choices = cs.len() + 1;
    let combinations = (choices as f64).powi(m as i32);
    if combinations > BRUTEFORCE_LIMIT {
        return Err(Error::EnumerationTooLarge {
            combinations,
            limit: BRUTEFORCE_LIMIT,
        });
    }
    let options = cs.options();
    let mbs_qoe = cs.mbs_qoe();
    let pops: Vec<f64> = library.popularities().collect();

    let mut current = vec![0usize; m];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let used: u64 = current
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| options[c - 1].cost)
            .sum();
        if used <= capacity {
            let value = pops.iter().zip(&current).fold(0.0, |acc, (&p, &c)| {
                acc + p * if c == 0 { mbs_qoe } else { options[c - 1].qoe }
            });
            let better = match &best {
                None => true,
                Some((bv, bc)) => value > *bv || (value == *bv && prefers(&current, bc)),
            };
            if better {
                best = Some((value, current.clone()));
            }
        }
        if !increment(&mut current, choices) {
            break;
        }
    }

    let (_, picks) = best.expect("the all-MBS assignment is always feasible");
    let assignments: Vec<Option<CacheOption>> = picks
        .iter()
        .map(|&c| (c > 0).then(|| options[c - 1]))
        .collect();
    Ok(PlacementSolution::from_assignments(assignments, library, mbs_qoe, capacity))
}

/// Reverse-lexicographic comparison: lower choice indices win, last video first.
fn prefers(a: &[usize], b: &[usize]) -> bool {
    for (x, y) in a.iter().rev().zip(b.iter().rev()) {
        if x != y {
            return x < y;
        }
    }
    false
}

fn increment(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::super::tests::option;
    use super::*;
    use crate::catalog::Video;

    fn library(pops: &[f64]) -> Library {
        Library::new(
            pops.iter()
                .enumerate()
                .map(|(i, &popularity)| Video {
                    id: i + 1,
                    popularity,
                    duration_s: 3600.0,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn zero_capacity() {
        let lib = library(&[0.6, 0.4]);
        let cs = EfficientStateSet::from_options_unfiltered(vec![option(1, 4.0, 1)], 2.5);
        let sol = solve_bruteforce(&lib, &cs, 0).unwrap();
        assert_eq!(sol.cached_count(), 0);
        assert!((sol.objective - 2.5).abs() < 1e-15);
    }

    #[test]
    fn single_video_takes_best_state() {
        let lib = library(&[1.0]);
        let cs = EfficientStateSet::from_options_unfiltered(
            vec![option(1, 3.0, 1), option(3, 4.5, 1), option(2, 4.0, 1)],
            2.0,
        );
        let sol = solve_bruteforce(&lib, &cs, 5).unwrap();
        assert_eq!(sol.assignments[0].unwrap().qoe, 4.5);
    }

    #[test]
    fn two_video_example() {
        let lib = library(&[0.7, 0.3]);
        let cs = EfficientStateSet::from_options_unfiltered(vec![option(1, 3.0, 1), option(2, 4.0, 1)], 2.0);
        let sol = solve_bruteforce(&lib, &cs, 2).unwrap();
        assert!((sol.objective - 3.4).abs() < 1e-12);
        assert_eq!(sol.assignments[0].unwrap().cost, 2);
        assert!(sol.assignments[1].is_none());
    }

    #[test]
    fn guard_rejects_large_instances() {
        let pops = vec![0.1; 10];
        let lib = library(&pops);
        let cs = EfficientStateSet::from_options_unfiltered((1..=9).map(|c| option(c, 3.0 + c as f64 / 10.0, 1)).collect(), 2.0);
        assert!(matches!(solve_bruteforce(&lib, &cs, 10), Err(Error::EnumerationTooLarge { .. })));
    }
}
