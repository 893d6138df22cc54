//! Recognition cost of every (augmentation, model) pair and, optionally,
//! the back-projected saliency of each.

use crate::geometry::warp_gray;
use crate::recognizer::{RecognitionModel, SegmentationCost};
use crate::vbp::{visual_backprop, Spm};

use super::augment::AugmentedSet;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutcome {
    /// `costs[j][k]`: cost of model `k` on augmentation `j`.
    pub costs: Vec<Vec<f64>>,
    pub mean_cost: f64,
    /// Saliency in the original crop frame, indexed like `costs`.
    pub spms: Option<Vec<Vec<Spm>>>,
    pub predictions: Vec<Vec<String>>,
}

impl EnsembleOutcome {
    pub fn flat_costs(&self) -> Vec<f64> {
        self.costs.iter().flatten().copied().collect()
    }

    pub fn flat_spms(&self) -> Option<Vec<Spm>> {
        self.spms.as_ref().map(|s| s.iter().flatten().cloned().collect())
    }
}

/// Runs every model on every augmented crop and scores against `truth`.
///
/// With `with_spms`, each saliency map is pulled back into the original crop
/// frame through the model's input transform and the augmentation's forward
/// transform (zero outside).
pub fn evaluate_ensemble(
    set: &AugmentedSet,
    models: &[&dyn RecognitionModel],
    truth: &str,
    cost: SegmentationCost,
    with_spms: bool,
) -> EnsembleOutcome {
    assert!(!models.is_empty(), "ensemble needs at least one model");
    let mut costs = Vec::with_capacity(set.len());
    let mut predictions = Vec::with_capacity(set.len());
    let mut spms = with_spms.then(|| Vec::with_capacity(set.len()));
    for (crop, forward) in set.crops.iter().zip(&set.forwards) {
        let (w, h) = crop.dims();
        let mut row = Vec::with_capacity(models.len());
        let mut texts = Vec::with_capacity(models.len());
        let mut spm_row = Vec::new();
        for model in models {
            let pred = model.predict(crop);
            row.push(cost.cost(&pred.text, truth));
            if spms.is_some() {
                let saliency = visual_backprop(&pred.layers).into_gray();
                // Crop → augmented → model input, in one resampling.
                let to_input = match pred.input_to_crop.inverse() {
                    Ok(inv) => inv.compose(forward),
                    Err(_) => *forward,
                };
                let back = warp_gray(&saliency, &to_input, w, h, 0.0);
                spm_row.push(Spm::from_gray(back));
            }
            texts.push(pred.text);
        }
        costs.push(row);
        predictions.push(texts);
        if let Some(s) = spms.as_mut() {
            s.push(spm_row);
        }
    }
    let n: usize = costs.iter().map(Vec::len).sum();
    let mean_cost = costs.iter().flatten().sum::<f64>() / n.max(1) as f64;
    EnsembleOutcome {
        costs,
        mean_cost,
        spms,
        predictions,
    }
}
