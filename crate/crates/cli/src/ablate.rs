//! Ablation sweeps over augmentation samples, ensemble size and search
//! steps, scored by mean per-instance pixel F1.
//!
//! Each cell reproduces exactly what `generate` would emit for the same
//! settings; the averaged saliency is shared by the step counts of one
//! (samples, models) pair because it does not depend on the search.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pseudolabel::eval::pixel_metrics;
use pseudolabel::pipeline::{crop_instance, crop_mask_to_image, ensemble_saliency, search_gain};
use pseudolabel::raster::Mask;
use pseudolabel::recognizer::RecognitionModel;

use crate::annotations::Instance;
use crate::batch::Dataset;
use crate::config::{instance_seed, RunConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub samples: Vec<usize>,
    pub models: Vec<usize>,
    pub steps: Vec<usize>,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            samples: vec![1, 2, 4, 8, 32],
            models: vec![1, 2],
            steps: vec![1, 2, 3, 4, 5, 6],
        }
    }
}

impl Grid {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let g: Grid = toml::from_str(&text).map_err(|e| CliError::Config(format!("grid: {e}")))?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(format!("grid: {m}")));
        if self.samples.is_empty() || self.models.is_empty() || self.steps.is_empty() {
            return bad("every axis needs at least one value");
        }
        if self.samples.contains(&0) {
            return bad("sample counts must be at least 1");
        }
        if self.models.iter().any(|m| !(1..=2).contains(m)) {
            return bad("model counts must be 1 or 2");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub samples: usize,
    pub models: usize,
    pub steps: usize,
    pub count: usize,
    pub mean_precision: f64,
    pub mean_recall: f64,
    pub mean_f1: f64,
}

/// Per-instance (precision, recall, f1) for every step count, in grid order.
fn sweep_instance(
    data: &Dataset,
    inst: &Instance,
    gt: &Mask,
    cfg: &RunConfig,
    models: &[&dyn RecognitionModel],
    steps: &[usize],
) -> Result<Vec<(f64, f64, f64)>, CliError> {
    let image = &data.images[&inst.image_id];
    let (w, h) = image.dims();
    let base = cfg.pipeline(instance_seed(cfg.seed, &inst.key()));
    let (crop, to_image) = crop_instance(image, &inst.quad, base.crop_w, base.crop_h, base.mu)?;
    let (spm, initial) = ensemble_saliency(&crop, &inst.transcription, models, &base)?;
    steps
        .iter()
        .map(|&t| {
            let run = pseudolabel::pipeline::PipelineConfig { t_max: t, ..base.clone() };
            let r = search_gain(crop.clone(), to_image, spm.clone(), initial.mean_cost, &inst.transcription, models, &run)?;
            let m = pixel_metrics(&crop_mask_to_image(&r.mask, &r.crop_to_image, w, h)?, gt);
            Ok((m.precision, m.recall, m.f1))
        })
        .collect()
}

/// Sweeps `grid` over the legible instances of `data`; `gt` maps instance
/// keys to image-resolution masks.
pub fn run_ablation(data: &Dataset, gt: &BTreeMap<String, Mask>, grid: &Grid, base: &RunConfig) -> Result<Vec<Cell>, CliError> {
    grid.validate()?;
    base.validate()?;
    let legible: Vec<&Instance> = data.legible().collect();
    for inst in &legible {
        if !gt.contains_key(&inst.key()) {
            return Err(CliError::Mismatch(format!("no ground truth for {}", inst.key())));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(base.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))?;
    let mut cells = Vec::new();
    for &k in &grid.models {
        let cfg_k = RunConfig { models: k, ..base.clone() };
        let recognizers = cfg_k.recognizers();
        for &s in &grid.samples {
            let cfg = RunConfig { n_samples: s, ..cfg_k.clone() };
            let per_instance: Vec<Vec<(f64, f64, f64)>> = pool.install(|| {
                legible
                    .par_iter()
                    .map(|inst| {
                        let refs: Vec<&dyn RecognitionModel> = recognizers.iter().map(|m| m as &dyn RecognitionModel).collect();
                        sweep_instance(data, inst, &gt[&inst.key()], &cfg, &refs, &grid.steps)
                    })
                    .collect::<Result<_, CliError>>()
            })?;
            let n = per_instance.len().max(1) as f64;
            for (j, &t) in grid.steps.iter().enumerate() {
                let sum = per_instance
                    .iter()
                    .fold((0.0, 0.0, 0.0), |a, v| (a.0 + v[j].0, a.1 + v[j].1, a.2 + v[j].2));
                cells.push(Cell {
                    samples: s,
                    models: k,
                    steps: t,
                    count: per_instance.len(),
                    mean_precision: sum.0 / n,
                    mean_recall: sum.1 / n,
                    mean_f1: sum.2 / n,
                });
            }
        }
    }
    Ok(cells)
}

/// Fixed-width text rendering of the table.
pub fn format_table(cells: &[Cell]) -> String {
    let mut out = format!("{:>7} {:>6} {:>5} {:>8} {:>8} {:>8}\n", "samples", "models", "steps", "P", "R", "F1");
    for c in cells {
        out.push_str(&format!(
            "{:>7} {:>6} {:>5} {:>8.4} {:>8.4} {:>8.4}\n",
            c.samples, c.models, c.steps, c.mean_precision, c.mean_recall, c.mean_f1
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::batch::{label_all, Dataset};
    use crate::config::Method;
    use crate::corpus::{generate_corpus, CorpusSpec};

    #[test]
    fn grid_parses_and_validates() {
        let g: Grid = toml::from_str("samples = [1, 4]\nmodels = [2]\nsteps = [0, 3]").unwrap();
        assert!(g.validate().is_ok());
        assert!(Grid { models: vec![3], ..g.clone() }.validate().is_err());
        assert!(Grid { samples: vec![], ..g }.validate().is_err());
    }

    #[test]
    fn cells_match_generate() {
        let spec = CorpusSpec {
            images: 1,
            instances_per_image: 2,
            ..CorpusSpec::default()
        };
        let corpus = generate_corpus(&spec).unwrap();
        let data = Dataset::from_corpus(&corpus);
        let gt: BTreeMap<String, Mask> = corpus
            .instances
            .iter()
            .zip(&corpus.gt_masks)
            .map(|(i, m)| (i.key(), m.clone()))
            .collect();
        let grid = Grid {
            samples: vec![2],
            models: vec![1],
            steps: vec![0, 2],
        };
        let cells = run_ablation(&data, &gt, &grid, &RunConfig::default()).unwrap();
        assert_eq!(cells.len(), 2);
        for c in &cells {
            let cfg = RunConfig {
                n_samples: 2,
                models: 1,
                t_max: c.steps,
                ..RunConfig::default()
            };
            let outs = label_all(&data, Method::Wesupermadd, &cfg).unwrap();
            let f1: f64 = outs.iter().map(|o| pixel_metrics(&o.mask, &gt[&o.record.key]).f1).sum::<f64>() / outs.len() as f64;
            assert!((f1 - c.mean_f1).abs() < 1e-12, "{f1} vs {}", c.mean_f1);
        }
    }
}
