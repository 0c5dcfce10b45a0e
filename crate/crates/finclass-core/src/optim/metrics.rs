use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::Network;

/// Evaluation summary. The confusion matrix is indexed `[true][predicted]`;
/// precision per class is `TP / (TP + FP)` (column-wise), recall is
/// `TP / (TP + FN)` (row-wise); both report 0 for empty denominators.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Overall accuracy in percent: `100 * correct / total`.
    pub accuracy: f64,
    pub confusion: Vec<Vec<usize>>,
    pub per_class_precision: Vec<f64>,
    pub per_class_recall: Vec<f64>,
}

impl Metrics {
    /// Build the metrics from parallel truth/prediction slices.
    pub fn from_predictions(truths: &[usize], predictions: &[usize], num_classes: usize) -> Result<Self> {
        if truths.is_empty() || truths.len() != predictions.len() {
            return Err(Error::InvalidInput(format!(
                "metrics need equal non-empty slices, got {} truths and {} predictions",
                truths.len(),
                predictions.len()
            )));
        }
        let mut confusion = vec![vec![0usize; num_classes]; num_classes];
        let mut correct = 0usize;
        for (&t, &p) in truths.iter().zip(predictions) {
            confusion[t][p] += 1;
            if t == p {
                correct += 1;
            }
        }
        let mut precision = Vec::with_capacity(num_classes);
        let mut recall = Vec::with_capacity(num_classes);
        for c in 0..num_classes {
            let tp = confusion[c][c];
            let col: usize = (0..num_classes).map(|r| confusion[r][c]).sum();
            let row: usize = confusion[c].iter().sum();
            precision.push(if col == 0 { 0.0 } else { tp as f64 / col as f64 });
            recall.push(if row == 0 { 0.0 } else { tp as f64 / row as f64 });
        }
        Ok(Self {
            accuracy: 100.0 * correct as f64 / truths.len() as f64,
            confusion,
            per_class_precision: precision,
            per_class_recall: recall,
        })
    }

    pub fn total(&self) -> usize {
        self.confusion.iter().map(|r| r.iter().sum::<usize>()).sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.confusion.len()).map(|i| self.confusion[i][i]).sum()
    }
}

/// Run inference over the whole dataset and tabulate the results.
pub fn evaluate(network: &Network, dataset: &Dataset) -> Result<Metrics> {
    if dataset.is_empty() {
        return Err(Error::InvalidInput("evaluation on an empty dataset".into()));
    }
    let mut truths = Vec::with_capacity(dataset.len());
    let mut predictions = Vec::with_capacity(dataset.len());
    for sample in &dataset.samples {
        let (pred, _) = network.predict(&sample.tensor)?;
        truths.push(sample.label);
        predictions.push(pred);
    }
    Metrics::from_predictions(&truths, &predictions, dataset.num_classes())
}
