use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ResponderError, ResponderLabel};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Labels too rare to stratify, kept whole in `train`.
    pub warnings: Vec<String>,
}

fn by_class(labels: &[ResponderLabel]) -> [Vec<usize>; 3] {
    let mut out: [Vec<usize>; 3] = Default::default();
    for (i, l) in labels.iter().enumerate() {
        out[l.index()].push(i);
    }
    out
}

/// Largest-remainder apportionment of `total` over `weights`.
fn apportion(weights: &[usize], total: usize) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut out: Vec<usize> = weights.iter().map(|w| w * total / sum).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(weights[i] * total % sum), i));
    let short = total - out.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        out[i] += 1;
    }
    out
}

/// Stratified train/test split of sample indices.
pub fn split(labels: &[ResponderLabel], train_frac: f64, seed: u64) -> Result<Split, ResponderError> {
    if labels.is_empty() {
        return Err(ResponderError::Empty);
    }
    if !(0.0..=1.0).contains(&train_frac) {
        return Err(ResponderError::InvalidParameter(format!("train_frac = {train_frac}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = by_class(labels);
    let strat: Vec<usize> = classes.iter().map(|c| if c.len() >= 2 { c.len() } else { 0 }).collect();
    let n_strat: usize = strat.iter().sum();
    let train_total = (train_frac * n_strat as f64).round() as usize;
    let quota = apportion(&strat, train_total);

    let mut out = Split { train: Vec::new(), test: Vec::new(), warnings: Vec::new() };
    for (k, members) in classes.iter().enumerate() {
        let mut members = members.clone();
        members.shuffle(&mut rng);
        if members.len() == 1 {
            out.warnings.push(format!("class {} has 1 member; kept in train", ResponderLabel::ALL[k]));
            out.train.extend(members);
            continue;
        }
        out.train.extend(&members[..quota[k]]);
        out.test.extend(&members[quota[k]..]);
    }
    out.train.sort_unstable();
    out.test.sort_unstable();
    Ok(out)
}

/// Assigns each sample to one of `k` folds per repeat, stratified by label.
/// Each class is shuffled and dealt round-robin, continuing from the fold
/// where the previous class stopped, so fold sizes differ by at most one.
/// Returns one assignment vector per repeat.
pub fn stratified_kfold(
    labels: &[ResponderLabel],
    k: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, ResponderError> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(ResponderError::TooManyFolds { k, n });
    }
    let classes = by_class(labels);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..repeats)
        .map(|_| {
            let mut fold_of = vec![0; n];
            let mut next = 0;
            for members in &classes {
                let mut members = members.clone();
                members.shuffle(&mut rng);
                for i in members {
                    fold_of[i] = next;
                    next = (next + 1) % k;
                }
            }
            fold_of
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ResponderLabel::*;

    fn labels(p: usize, z: usize, n: usize) -> Vec<ResponderLabel> {
        let mut v = vec![Positive; p];
        v.extend(vec![Neutral; z]);
        v.extend(vec![Negative; n]);
        v
    }

    fn count(idx: &[usize], l: &[ResponderLabel], c: ResponderLabel) -> usize {
        idx.iter().filter(|&&i| l[i] == c).count()
    }

    #[test]
    fn sixty_thirty_ten() {
        let l = labels(60, 30, 10);
        let s = split(&l, 0.75, 1).unwrap();
        assert_eq!(s.train.len(), 75);
        assert_eq!(count(&s.train, &l, Positive), 45);
        assert!((22..=23).contains(&count(&s.train, &l, Neutral)));
        assert!((7..=8).contains(&count(&s.train, &l, Negative)));
        let mut all = [s.train.clone(), s.test.clone()].concat();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn split_is_seeded() {
        let l = labels(60, 30, 10);
        assert_eq!(split(&l, 0.75, 9).unwrap(), split(&l, 0.75, 9).unwrap());
        assert_ne!(split(&l, 0.75, 9).unwrap(), split(&l, 0.75, 10).unwrap());
        assert!(split(&l, 1.0, 9).unwrap().test.is_empty());
        assert!(split(&[], 0.75, 9).is_err());
    }

    #[test]
    fn singleton_class_stays_in_train() {
        let l = labels(10, 10, 1);
        let s = split(&l, 0.5, 3).unwrap();
        assert!(s.train.contains(&20));
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn seventy_twenty_ten_folds() {
        let l = labels(70, 20, 10);
        let folds = stratified_kfold(&l, 10, 1, 5).unwrap();
        for f in 0..10 {
            let idx: Vec<usize> = (0..100).filter(|&i| folds[0][i] == f).collect();
            assert_eq!(idx.len(), 10);
            assert_eq!((count(&idx, &l, Positive), count(&idx, &l, Neutral), count(&idx, &l, Negative)), (7, 2, 1));
        }
    }

    #[test]
    fn repeats_and_errors() {
        let l = labels(70, 20, 10);
        let folds = stratified_kfold(&l, 10, 3, 5).unwrap();
        assert_eq!(folds.len(), 3);
        assert_ne!(folds[0], folds[1]);
        assert!(stratified_kfold(&l[..5], 10, 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn folds_are_proportional(p in 0usize..60, z in 0usize..60, n in 0usize..60, k in 2usize..11, seed in any::<u64>()) {
            let l = labels(p, z, n);
            prop_assume!(l.len() >= k);
            let folds = &stratified_kfold(&l, k, 1, seed).unwrap()[0];
            for f in 0..k {
                let idx: Vec<usize> = (0..l.len()).filter(|&i| folds[i] == f).collect();
                for (c, total) in [(Positive, p), (Neutral, z), (Negative, n)] {
                    let exact = total as f64 / k as f64;
                    prop_assert!((count(&idx, &l, c) as f64 - exact).abs() < 1.0);
                }
            }
        }

        #[test]
        fn split_is_a_partition(p in 0usize..40, z in 0usize..40, n in 1usize..40, frac in 0.0f64..=1.0, seed in any::<u64>()) {
            let l = labels(p, z, n);
            let s = split(&l, frac, seed).unwrap();
            let mut all = [s.train, s.test].concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..l.len()).collect::<Vec<_>>());
        }
    }
}
