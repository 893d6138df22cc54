//! ICDAR-style annotation files: one instance per line,
//! `x1,y1,x2,y2,x3,y3,x4,y4,transcription`, with `###` marking illegible text.

use std::fs;
use std::path::{Path, PathBuf};

use pseudolabel::geometry::Quadrilateral;

use crate::error::CliError;

/// Transcription marking a don't-care region.
pub const ILLEGIBLE: &str = "###";

/// Image extensions probed when pairing annotation files with images.
const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub image_id: String,
    /// Position of the instance within its image's annotation file.
    pub index: usize,
    pub quad: Quadrilateral,
    pub transcription: String,
    pub illegible: bool,
}

impl Instance {
    /// Stable per-instance key, used for file names and seeds.
    pub fn key(&self) -> String {
        format!("{}_{}", self.image_id, self.index)
    }
}

/// Parses one annotation line.
pub fn parse_line(line: &str) -> Option<(Quadrilateral, String)> {
    let line = line.trim_start_matches('\u{feff}').trim_end_matches(['\r', '\n']);
    let mut parts = line.splitn(9, ',');
    let mut xy = [0.0f64; 8];
    for v in xy.iter_mut() {
        *v = parts.next()?.trim().parse().ok()?;
    }
    let text = parts.next()?.to_string();
    let quad = Quadrilateral::from_xy(xy).ok()?;
    Some((quad, text))
}

/// Formats an instance in the annotation line format.
pub fn format_line(quad: &Quadrilateral, text: &str) -> String {
    let c = quad.corners();
    let nums: Vec<String> = c.iter().flat_map(|p| [p.x, p.y]).map(|v| format!("{v}")).collect();
    format!("{},{}", nums.join(","), text)
}

/// Parses an annotation file's contents.
pub fn parse_annotations(image_id: &str, file: &Path, contents: &str) -> Result<Vec<Instance>, CliError> {
    let mut out = Vec::new();
    for (n, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (quad, text) = parse_line(line).ok_or_else(|| CliError::MalformedLine {
            file: file.to_path_buf(),
            line: n + 1,
        })?;
        let illegible = text == ILLEGIBLE;
        if text.is_empty() {
            return Err(CliError::MalformedLine {
                file: file.to_path_buf(),
                line: n + 1,
            });
        }
        out.push(Instance {
            image_id: image_id.to_string(),
            index: out.len(),
            quad,
            transcription: text,
            illegible,
        });
    }
    Ok(out)
}

/// Locates the image belonging to `image_id` in `dir`.
pub fn image_path(dir: &Path, image_id: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS
        .iter()
        .map(|ext| dir.join(format!("{image_id}.{ext}")))
        .find(|p| p.is_file())
}

/// Every `*.txt` file in `dir`, paired with its image, sorted by image id.
pub fn load_annotations(dir: &Path) -> Result<Vec<Instance>, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort();
    let mut out = Vec::new();
    for file in files {
        let id = file
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::MalformedLine {
                file: file.clone(),
                line: 0,
            })?
            .to_string();
        if image_path(dir, &id).is_none() {
            return Err(CliError::MissingImage(dir.join(&id)));
        }
        let contents = fs::read_to_string(&file).map_err(|e| CliError::io(&file, e))?;
        out.extend(parse_annotations(&id, &file, &contents)?);
    }
    Ok(out)
}

/// Writes one annotation file per image id (instances grouped in order).
pub fn write_annotations(dir: &Path, instances: &[Instance]) -> Result<(), CliError> {
    let mut by_image: std::collections::BTreeMap<&str, Vec<&Instance>> = Default::default();
    for inst in instances {
        by_image.entry(&inst.image_id).or_default().push(inst);
    }
    for (id, insts) in by_image {
        let mut body = String::new();
        for inst in insts {
            body.push_str(&format_line(&inst.quad, &inst.transcription));
            body.push('\n');
        }
        let path = dir.join(format!("{id}.txt"));
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(())
}
