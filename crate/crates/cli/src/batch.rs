//! Batch label generation over a dataset directory or an in-memory corpus.
//!
//! Every instance draws its seed from the base seed and its key, so the
//! output does not depend on the number of workers or their schedule.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use pseudolabel::baselines::{grabcut_box_psl, naive_psl, pyramid_psl};
use pseudolabel::pipeline::{crop_mask_to_image, generate_psl};
use pseudolabel::raster::{GrayBuf, ImageBuf, Mask};
use pseudolabel::recognizer::{RecognitionModel, ToyGlyphRecognizer};

use crate::annotations::{image_path, load_annotations, Instance};
use crate::config::{instance_seed, Method, RunConfig};
use crate::corpus::Corpus;
use crate::error::CliError;
use crate::imageio::{overlay, read_rgb, write_mask, write_rgb, write_soft};

/// Name of the generation report inside an output directory.
pub const REPORT_FILE: &str = "report.json";

/// Images keyed by id plus their instances in annotation order.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub images: BTreeMap<String, ImageBuf>,
    pub instances: Vec<Instance>,
}

impl Dataset {
    pub fn load(dir: &Path) -> Result<Self, CliError> {
        let instances = load_annotations(dir)?;
        let mut images = BTreeMap::new();
        for inst in &instances {
            if images.contains_key(&inst.image_id) {
                continue;
            }
            let path = image_path(dir, &inst.image_id).ok_or_else(|| CliError::MissingImage(dir.join(&inst.image_id)))?;
            images.insert(inst.image_id.clone(), read_rgb(&path)?);
        }
        Ok(Self { images, instances })
    }

    pub fn from_corpus(corpus: &Corpus) -> Self {
        Self {
            images: corpus.images.iter().map(|i| (i.id.clone(), i.image.clone())).collect(),
            instances: corpus.instances.clone(),
        }
    }

    pub fn legible(&self) -> impl Iterator<Item = &Instance> {
        self.instances.iter().filter(|i| !i.illegible)
    }
}

/// One probed gain of the search, as reported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub alpha: f64,
    pub mean_cost: f64,
    pub binary_pixels: usize,
    pub mask_pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub key: String,
    pub seed: u64,
    pub mask_pixels: usize,
    /// Conditions worth a look: `constant-saliency`, `infeasible`,
    /// `all-hard`, or `error: …` when generation failed.
    pub flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_cost: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TraceStep>,
}

/// Label of one instance at image resolution, with optional soft maps.
#[derive(Debug, Clone)]
pub struct InstanceOutput {
    pub record: InstanceRecord,
    pub mask: Mask,
    /// Pyramid soft label at image resolution.
    pub soft: Option<GrayBuf>,
    /// Averaged saliency at crop resolution.
    pub spm: Option<GrayBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateReport {
    pub method: Method,
    pub seed: u64,
    pub config: RunConfig,
    pub skipped_illegible: usize,
    pub flagged: usize,
    pub instances: Vec<InstanceRecord>,
}

/// Labels one instance with `method`.
pub fn label_instance(image: &ImageBuf, inst: &Instance, method: Method, cfg: &RunConfig, models: &[ToyGlyphRecognizer]) -> InstanceOutput {
    let key = inst.key();
    let seed = instance_seed(cfg.seed, &key);
    let (w, h) = image.dims();
    let mut record = InstanceRecord {
        key,
        seed,
        mask_pixels: 0,
        flags: Vec::new(),
        best_alpha: None,
        initial_cost: None,
        trace: Vec::new(),
    };
    let mut soft = None;
    let mut spm = None;
    let result: Result<Mask, CliError> = (|| match method {
        Method::Naive => Ok(naive_psl(&inst.quad, w, h)),
        Method::Pyramid => {
            let p = pyramid_psl(&inst.quad, w, h)?;
            let m = p.threshold(0.5);
            soft = Some(p);
            Ok(m)
        }
        Method::Grabcut => {
            let out = grabcut_box_psl(image, &inst.quad, seed)?;
            if out.all_hard {
                record.flags.push("all-hard".into());
            }
            Ok(out.mask)
        }
        Method::Wesupermadd => {
            let refs: Vec<&dyn RecognitionModel> = models.iter().map(|m| m as &dyn RecognitionModel).collect();
            let r = generate_psl(image, &inst.quad, &inst.transcription, &refs, &cfg.pipeline(seed))?;
            if r.constant_spm {
                record.flags.push("constant-saliency".into());
            } else if !r.feasible && cfg.t_max > 0 {
                record.flags.push("infeasible".into());
            }
            record.best_alpha = Some(r.best_alpha);
            record.initial_cost = Some(r.initial_cost);
            record.trace = r
                .trace
                .iter()
                .map(|t| TraceStep {
                    alpha: t.alpha,
                    mean_cost: t.mean_cost,
                    binary_pixels: t.binary_count,
                    mask_pixels: t.mask_count,
                })
                .collect();
            spm = Some(r.spm.as_gray().clone());
            Ok(crop_mask_to_image(&r.mask, &r.crop_to_image, w, h)?)
        }
    })();
    let mask = result.unwrap_or_else(|e| {
        record.flags.push(format!("error: {e}"));
        Mask::new(w, h, false)
    });
    record.mask_pixels = mask.count();
    InstanceOutput { record, mask, soft, spm }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

/// Applies `f` to the label of every legible instance on `cfg.workers`
/// threads; results come back in instance order.
pub fn map_labels<T, F>(data: &Dataset, method: Method, cfg: &RunConfig, f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(&Instance, &ImageBuf, InstanceOutput) -> Result<T, CliError> + Sync,
{
    cfg.validate()?;
    let models = if method == Method::Wesupermadd {
        cfg.recognizers()
    } else {
        Vec::new()
    };
    let legible: Vec<&Instance> = data.legible().collect();
    pool(cfg.workers)?.install(|| {
        legible
            .par_iter()
            .map(|inst| {
                let image = data
                    .images
                    .get(&inst.image_id)
                    .ok_or_else(|| CliError::MissingImage(inst.image_id.clone().into()))?;
                let out = label_instance(image, inst, method, cfg, &models);
                f(inst, image, out)
            })
            .collect()
    })
}

/// Labels every legible instance in memory.
pub fn label_all(data: &Dataset, method: Method, cfg: &RunConfig) -> Result<Vec<InstanceOutput>, CliError> {
    map_labels(data, method, cfg, |_, _, out| Ok(out))
}

/// Extra artifacts written next to the masks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OutputOptions {
    pub overlays: bool,
    pub spm: bool,
}

/// Writes `<key>.png` per legible instance plus `report.json` into `out`.
pub fn run_generate(data: &Dataset, out: &Path, method: Method, cfg: &RunConfig, opts: OutputOptions) -> Result<GenerateReport, CliError> {
    let mkdir = |d: &Path| fs::create_dir_all(d).map_err(|e| CliError::io(d, e));
    mkdir(out)?;
    let soft_dir = out.join("soft");
    let spm_dir = out.join("spm");
    let overlay_dir = out.join("overlays");
    if method == Method::Pyramid {
        mkdir(&soft_dir)?;
    }
    if opts.spm && method == Method::Wesupermadd {
        mkdir(&spm_dir)?;
    }
    if opts.overlays {
        mkdir(&overlay_dir)?;
    }
    let records = map_labels(data, method, cfg, |inst, image, o| {
        let name = format!("{}.png", o.record.key);
        write_mask(&out.join(&name), &o.mask)?;
        if let Some(soft) = &o.soft {
            write_soft(&soft_dir.join(&name), soft)?;
        }
        if let (true, Some(spm)) = (opts.spm, &o.spm) {
            write_soft(&spm_dir.join(&name), spm)?;
        }
        if opts.overlays {
            write_rgb(&overlay_dir.join(&name), &overlay(image, &o.mask))?;
        }
        debug_assert_eq!(inst.key(), o.record.key);
        Ok(o.record)
    })?;
    let report = GenerateReport {
        method,
        seed: cfg.seed,
        config: cfg.clone(),
        skipped_illegible: data.instances.len() - records.len(),
        flagged: records.iter().filter(|r| !r.flags.is_empty()).count(),
        instances: records,
    };
    let path = out.join(REPORT_FILE);
    let body = serde_json::to_string_pretty(&report).expect("plain data serializes");
    fs::write(&path, body + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{generate_corpus, CorpusSpec};

    fn tiny() -> Dataset {
        let spec = CorpusSpec {
            images: 1,
            instances_per_image: 2,
            ..CorpusSpec::default()
        };
        Dataset::from_corpus(&generate_corpus(&spec).unwrap())
    }

    #[test]
    fn naive_labels_are_the_quads() {
        let data = tiny();
        let outs = label_all(&data, Method::Naive, &RunConfig::default()).unwrap();
        assert_eq!(outs.len(), 2);
        for (o, inst) in outs.iter().zip(&data.instances) {
            assert_eq!(o.mask, inst.quad.rasterize(320, 240));
            assert!(o.record.flags.is_empty());
        }
    }

    #[test]
    fn illegible_instances_are_skipped() {
        let mut data = tiny();
        data.instances[0].illegible = true;
        let outs = label_all(&data, Method::Pyramid, &RunConfig::default()).unwrap();
        assert_eq!(outs.len(), 1);
        assert_eq!(outs[0].record.key, data.instances[1].key());
        assert!(outs[0].soft.is_some());
    }

    #[test]
    fn cheap_pipeline_run_records_trace() {
        let data = tiny();
        let cfg = RunConfig {
            t_max: 2,
            n_samples: 2,
            ..RunConfig::default()
        };
        let outs = label_all(&data, Method::Wesupermadd, &cfg).unwrap();
        for o in &outs {
            assert_eq!(o.record.trace.len(), 2);
            assert!(o.record.best_alpha.is_some());
            assert!(o.spm.is_some());
        }
    }
}
