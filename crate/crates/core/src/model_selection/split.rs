use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::labels;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvScheme {
    KFold(usize),
    StratifiedKFold(usize),
    LeaveOneOut,
}

/// One train/test partition of `0..n`; both index lists are ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Deterministic generator of train/test partitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CvSplitter {
    pub scheme: CvScheme,
    pub shuffle: bool,
    pub random_seed: u64,
}

impl Default for CvSplitter {
    fn default() -> Self {
        CvSplitter::kfold(5)
    }
}

impl CvSplitter {
    pub fn kfold(k: usize) -> Self {
        CvSplitter {
            scheme: CvScheme::KFold(k),
            shuffle: false,
            random_seed: 0,
        }
    }

    pub fn stratified(k: usize) -> Self {
        CvSplitter {
            scheme: CvScheme::StratifiedKFold(k),
            shuffle: false,
            random_seed: 0,
        }
    }

    pub fn leave_one_out() -> Self {
        CvSplitter {
            scheme: CvScheme::LeaveOneOut,
            shuffle: false,
            random_seed: 0,
        }
    }

    /// Shuffles sample order (per class for stratified) before folding.
    pub fn shuffled(mut self, seed: u64) -> Self {
        self.shuffle = true;
        self.random_seed = seed;
        self
    }

    pub fn n_splits(&self, n_samples: usize) -> usize {
        match self.scheme {
            CvScheme::KFold(k) | CvScheme::StratifiedKFold(k) => k,
            CvScheme::LeaveOneOut => n_samples,
        }
    }

    pub fn split(&self, n_samples: usize, y: Option<&[f64]>) -> Result<Vec<Split>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.random_seed);
        let folds: Vec<Vec<usize>> = match self.scheme {
            CvScheme::KFold(k) => {
                check_k(k, n_samples)?;
                let mut order: Vec<usize> = (0..n_samples).collect();
                if self.shuffle {
                    order.shuffle(&mut rng);
                }
                let (base, extra) = (n_samples / k, n_samples % k);
                let mut start = 0;
                (0..k)
                    .map(|f| {
                        let size = base + usize::from(f < extra);
                        let fold = order[start..start + size].to_vec();
                        start += size;
                        fold
                    })
                    .collect()
            }
            CvScheme::StratifiedKFold(k) => {
                check_k(k, n_samples)?;
                let y = y.ok_or_else(|| {
                    Error::InvalidInput("stratified k-fold needs class labels".into())
                })?;
                if y.len() != n_samples {
                    return Err(Error::Shape(format!(
                        "{} labels for {n_samples} samples",
                        y.len()
                    )));
                }
                let mut folds = vec![Vec::new(); k];
                let mut next = 0;
                for class in labels::unique_sorted(y) {
                    let mut members: Vec<usize> =
                        (0..n_samples).filter(|&i| y[i] == class).collect();
                    if members.len() < k {
                        return Err(Error::InvalidInput(format!(
                            "class {class} has {} samples, fewer than k={k}",
                            members.len()
                        )));
                    }
                    if self.shuffle {
                        members.shuffle(&mut rng);
                    }
                    for i in members {
                        folds[next].push(i);
                        next = (next + 1) % k;
                    }
                }
                folds
            }
            CvScheme::LeaveOneOut => {
                if n_samples < 2 {
                    return Err(Error::InvalidInput(
                        "leave-one-out needs at least two samples".into(),
                    ));
                }
                (0..n_samples).map(|i| vec![i]).collect()
            }
        };

        Ok(folds
            .into_iter()
            .map(|mut test| {
                test.sort_unstable();
                let mut in_test = vec![false; n_samples];
                test.iter().for_each(|&i| in_test[i] = true);
                let train = (0..n_samples).filter(|&i| !in_test[i]).collect();
                Split { train, test }
            })
            .collect())
    }
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "k={k}: need at least two folds"
        )));
    }
    if k > n {
        return Err(Error::InvalidInput(format!(
            "k={k} exceeds the {n} samples"
        )));
    }
    Ok(())
}
