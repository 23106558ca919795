//! Class rebalancing for training folds: oversample the minority class
//! with replacement, or undersample the majority class without.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Rebalancing mode applied to training folds only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resample {
    None,
    Oversample,
    Undersample,
}

impl std::str::FromStr for Resample {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Resample::None),
            "oversample" => Ok(Resample::Oversample),
            "undersample" => Ok(Resample::Undersample),
            other => Err(format!(
                "unknown resample mode {other:?}, expected none, oversample, or undersample"
            )),
        }
    }
}

impl std::fmt::Display for Resample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Resample::None => "none",
            Resample::Oversample => "oversample",
            Resample::Undersample => "undersample",
        })
    }
}

/// Return a rebalanced multiset of `train` indices. The result is sorted;
/// every index it contains appears in `train`.
pub fn rebalance(
    train: &[usize],
    labels: &[bool],
    mode: Resample,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut result: Vec<usize> = train.to_vec();
    if mode == Resample::None {
        result.sort_unstable();
        return result;
    }
    let pos: Vec<usize> = train.iter().copied().filter(|&i| labels[i]).collect();
    let neg: Vec<usize> = train.iter().copied().filter(|&i| !labels[i]).collect();
    if pos.is_empty() || neg.is_empty() || pos.len() == neg.len() {
        result.sort_unstable();
        return result;
    }
    let (minority, majority) = if pos.len() < neg.len() {
        (pos, neg)
    } else {
        (neg, pos)
    };
    match mode {
        Resample::Oversample => {
            for _ in 0..majority.len() - minority.len() {
                result.push(minority[rng.random_range(0..minority.len())]);
            }
        }
        Resample::Undersample => {
            let mut pool = majority.clone();
            for i in 0..minority.len() {
                let j = rng.random_range(i..pool.len());
                pool.swap(i, j);
            }
            result = minority;
            result.extend_from_slice(&pool[..result.len()]);
        }
        Resample::None => unreachable!(),
    }
    result.sort_unstable();
    result
}
