use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{stratified_kfold, train_logreg, HyperParams, Imputer, LogReg, ResponderError, ResponderLabel, Standardizer};

pub const CLASSES: usize = 3;

/// `counts[true][predicted]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; CLASSES]; CLASSES],
}

impl ConfusionMatrix {
    pub fn from_pairs(truth: &[usize], pred: &[usize]) -> Self {
        let mut m = Self::default();
        for (t, p) in truth.iter().zip(pred) {
            m.counts[*t][*p] += 1;
        }
        m
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    pub fn support(&self, class: usize) -> usize {
        self.counts[class].iter().sum()
    }

    pub fn total(&self) -> usize {
        (0..CLASSES).map(|c| self.support(c)).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 { 0.0 } else { num as f64 / den as f64 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub per_class: Vec<ClassMetrics>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub support: usize,
    pub confusion: ConfusionMatrix,
}

impl Report {
    /// Per-class and support-weighted metrics; undefined ratios are 0.
    pub fn from_confusion(confusion: ConfusionMatrix) -> Self {
        let c = &confusion.counts;
        let per_class: Vec<ClassMetrics> = (0..CLASSES)
            .map(|k| {
                let tp = c[k][k];
                let predicted: usize = (0..CLASSES).map(|t| c[t][k]).sum();
                let support = confusion.support(k);
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, support);
                let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
                ClassMetrics { precision, recall, f1, support }
            })
            .collect();
        let total = confusion.total();
        let weighted = |f: fn(&ClassMetrics) -> f64| {
            if total == 0 {
                0.0
            } else {
                per_class.iter().map(|m| f(m) * m.support as f64).sum::<f64>() / total as f64
            }
        };
        Report {
            precision: weighted(|m| m.precision),
            recall: weighted(|m| m.recall),
            f1: weighted(|m| m.f1),
            accuracy: ratio((0..CLASSES).map(|k| c[k][k]).sum(), total),
            support: total,
            per_class,
            confusion,
        }
    }

    pub fn from_predictions(truth: &[usize], pred: &[usize]) -> Self {
        Self::from_confusion(ConfusionMatrix::from_pairs(truth, pred))
    }

    /// Plain-text table: precision, recall, F1 and support per class, then
    /// the weighted average.
    pub fn table(&self) -> String {
        let mut s = format!("{:>14} {:>9} {:>9} {:>9} {:>9}\n", "", "precision", "recall", "f1-score", "support");
        for (l, m) in ResponderLabel::ALL.iter().zip(&self.per_class) {
            let _ = writeln!(s, "{:>14} {:>9.4} {:>9.4} {:>9.4} {:>9}", l.as_str(), m.precision, m.recall, m.f1, m.support);
        }
        let _ = writeln!(s, "{:>14} {:>9.4} {:>9.4} {:>9.4} {:>9}", "weighted avg", self.precision, self.recall, self.f1, self.support);
        s
    }
}

/// Imputer, standardizer and model fitted together on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub imputer: Imputer,
    pub standardizer: Standardizer,
    pub model: LogReg,
}

impl Pipeline {
    pub fn fit(x: &[Vec<f64>], y: &[usize], hp: HyperParams) -> Result<Self, ResponderError> {
        let imputer = Imputer::fit(x);
        let filled = imputer.transform(x);
        let standardizer = Standardizer::fit(&filled);
        let model = train_logreg(&standardizer.transform(&filled), y, CLASSES, hp)?;
        Ok(Self { imputer, standardizer, model })
    }

    pub fn predict(&self, x: &[Vec<f64>]) -> Vec<usize> {
        self.standardizer
            .transform(&self.imputer.transform(x))
            .iter()
            .map(|r| self.model.predict(r))
            .collect()
    }
}

/// Fits on `(x_train, y_train)` and scores on the test rows.
pub fn evaluate(
    x_train: &[Vec<f64>],
    y_train: &[usize],
    x_test: &[Vec<f64>],
    y_test: &[usize],
    hp: HyperParams,
) -> Result<Report, ResponderError> {
    if x_test.is_empty() {
        return Err(ResponderError::Empty);
    }
    let p = Pipeline::fit(x_train, y_train, hp)?;
    Ok(Report::from_predictions(y_test, &p.predict(x_test)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub repeat: usize,
    pub fold: usize,
    pub report: Report,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub hyper_params: HyperParams,
    pub folds: Vec<FoldReport>,
    /// Means of the per-fold weighted metrics.
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub f1_sd: f64,
    /// Confusion summed over every evaluation fold.
    pub pooled: Report,
}

fn rows<T: Clone>(v: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| v[i].clone()).collect()
}

/// Repeated stratified k-fold cross validation.
pub fn cross_validate(
    x: &[Vec<f64>],
    y: &[usize],
    k: usize,
    repeats: usize,
    seed: u64,
    hp: HyperParams,
) -> Result<CvReport, ResponderError> {
    let labels: Vec<ResponderLabel> = y.iter().map(|&c| ResponderLabel::ALL[c]).collect();
    let assignments = stratified_kfold(&labels, k, repeats, seed)?;
    let mut folds = Vec::new();
    let mut pooled = ConfusionMatrix::default();
    for (repeat, fold_of) in assignments.iter().enumerate() {
        for fold in 0..k {
            let test: Vec<usize> = (0..y.len()).filter(|&i| fold_of[i] == fold).collect();
            let train: Vec<usize> = (0..y.len()).filter(|&i| fold_of[i] != fold).collect();
            let report = evaluate(&rows(x, &train), &rows(y, &train), &rows(x, &test), &rows(y, &test), hp)?;
            pooled.add(&report.confusion);
            folds.push(FoldReport { repeat, fold, report });
        }
    }
    let n = folds.len() as f64;
    let mean = |f: fn(&Report) -> f64| folds.iter().map(|r| f(&r.report)).sum::<f64>() / n;
    let f1 = mean(|r| r.f1);
    let f1_sd = (folds.iter().map(|r| (r.report.f1 - f1).powi(2)).sum::<f64>() / n).sqrt();
    Ok(CvReport {
        hyper_params: hp,
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f1,
        f1_sd,
        pooled: Report::from_confusion(pooled),
        folds,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub best: CvReport,
    /// `(params, mean weighted F1)` for every grid point, in grid order.
    pub scores: Vec<(HyperParams, f64)>,
}

/// Picks the grid point with the highest CV weighted F1; ties keep the
/// earlier point.
pub fn grid_search(
    x: &[Vec<f64>],
    y: &[usize],
    k: usize,
    repeats: usize,
    seed: u64,
    grid: &[HyperParams],
) -> Result<GridResult, ResponderError> {
    let mut best: Option<CvReport> = None;
    let mut scores = Vec::new();
    for &hp in grid {
        let r = cross_validate(x, y, k, repeats, seed, hp)?;
        scores.push((hp, r.f1));
        if best.as_ref().is_none_or(|b| r.f1 > b.f1) {
            best = Some(r);
        }
    }
    let best = best.ok_or_else(|| ResponderError::InvalidParameter("empty grid".into()))?;
    Ok(GridResult { best, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::responder::dataset::gaussian_classes;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let y = vec![0, 1, 2, 2, 1, 0];
        let r = Report::from_predictions(&y, &y);
        assert_eq!((r.precision, r.recall, r.f1, r.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn constant_predictor_on_seventy_thirty() {
        let mut y = vec![0; 70];
        y.extend(vec![1; 30]);
        let r = Report::from_predictions(&y, &[0; 100]);
        assert!((r.recall - 0.7).abs() < 1e-15);
        // precision of class 0 is 0.7, recall 1: f1 = 1.4/1.7, weighted by 0.7.
        assert!((r.f1 - 0.7 * 1.4 / 1.7).abs() < 1e-15);
        assert_eq!(r.per_class[1].precision, 0.0);
    }

    #[test]
    fn confusion_rows_are_supports() {
        let r = Report::from_predictions(&[0, 0, 1, 2, 2, 2], &[0, 1, 1, 2, 0, 2]);
        for k in 0..3 {
            assert_eq!(r.confusion.support(k), r.per_class[k].support);
        }
        assert!(r.table().contains("weighted avg"));
    }

    #[test]
    fn separated_gaussians_score_high() {
        let (x, y) = gaussian_classes(600, 3, 4.0, 11);
        let r = cross_validate(&x, &y, 10, 1, 3, HyperParams { learning_rate: 0.1, l2: 0.01, epochs: 300 }).unwrap();
        assert_eq!(r.folds.len(), 10);
        assert!(r.f1 >= 0.9, "{}", r.f1);
        assert_eq!(r.pooled.support, 600);
    }

    #[test]
    fn grid_keeps_best() {
        let (x, y) = gaussian_classes(90, 3, 3.0, 2);
        let g = grid_search(&x, &y, 3, 1, 1, &HyperParams::grid(100)).unwrap();
        assert_eq!(g.scores.len(), 6);
        assert!(g.scores.iter().all(|(_, f)| *f <= g.best.f1));
    }

    /// Independent metric recomputation straight from label vectors.
    fn oracle_weighted_f1(t: &[usize], p: &[usize]) -> f64 {
        let n = t.len() as f64;
        (0..3)
            .map(|c| {
                let tp = t.iter().zip(p).filter(|(a, b)| **a == c && **b == c).count() as f64;
                let pp = p.iter().filter(|b| **b == c).count() as f64;
                let sup = t.iter().filter(|a| **a == c).count() as f64;
                let pr = if pp > 0.0 { tp / pp } else { 0.0 };
                let rc = if sup > 0.0 { tp / sup } else { 0.0 };
                let f = if pr + rc > 0.0 { 2.0 * pr * rc / (pr + rc) } else { 0.0 };
                f * sup / n
            })
            .sum()
    }

    proptest! {
        #[test]
        fn metrics_match_oracle(pairs in proptest::collection::vec((0usize..3, 0usize..3), 1..200)) {
            let (t, p): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
            let r = Report::from_predictions(&t, &p);
            prop_assert!((r.f1 - oracle_weighted_f1(&t, &p)).abs() < 1e-12);
        }
    }
}
