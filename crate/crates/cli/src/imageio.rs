//! PNG reading and writing for colour images, binary masks and soft maps.

use std::path::Path;

use image::{GrayImage, ImageBuffer, Luma, Rgb, RgbImage};
use pseudolabel::raster::{GrayBuf, ImageBuf, Mask};

use crate::error::CliError;

#[inline]
pub fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Snaps every channel to the nearest 8-bit level, as a PNG round trip would.
pub fn quantize(image: &mut ImageBuf) {
    for p in image.pixels_mut() {
        for v in p.iter_mut() {
            *v = to_u8(*v) as f64 / 255.0;
        }
    }
}

pub fn read_rgb(path: &Path) -> Result<ImageBuf, CliError> {
    let img = image::open(path).map_err(|e| CliError::image(path, e))?.to_rgb8();
    let (w, h) = img.dimensions();
    let px = img
        .pixels()
        .map(|p| [p[0] as f64 / 255.0, p[1] as f64 / 255.0, p[2] as f64 / 255.0])
        .collect();
    Ok(ImageBuf::from_pixels(w as usize, h as usize, px)?)
}

pub fn write_rgb(path: &Path, img: &ImageBuf) -> Result<(), CliError> {
    let (w, h) = img.dims();
    let out = RgbImage::from_fn(w as u32, h as u32, |x, y| {
        let p = img.get(x as usize, y as usize);
        Rgb([to_u8(p[0]), to_u8(p[1]), to_u8(p[2])])
    });
    out.save(path).map_err(|e| CliError::image(path, e))
}

/// Single-channel 8-bit mask: 255 foreground, 0 background.
pub fn write_mask(path: &Path, mask: &Mask) -> Result<(), CliError> {
    let (w, h) = mask.dims();
    let out = GrayImage::from_fn(w as u32, h as u32, |x, y| {
        Luma([if mask.get(x as usize, y as usize) { 255 } else { 0 }])
    });
    out.save(path).map_err(|e| CliError::image(path, e))
}

/// Reads a mask; pixels at or above mid-gray are foreground.
pub fn read_mask(path: &Path) -> Result<Mask, CliError> {
    let img = image::open(path).map_err(|e| CliError::image(path, e))?.to_luma8();
    let (w, h) = img.dimensions();
    let bits = img.pixels().map(|p| p[0] >= 128).collect();
    Ok(Mask::from_bits(w as usize, h as usize, bits)?)
}

/// Single-channel 16-bit soft map, `[0, 1]` scaled to `[0, 65535]`.
pub fn write_soft(path: &Path, map: &GrayBuf) -> Result<(), CliError> {
    let (w, h) = map.dims();
    let out: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_fn(w as u32, h as u32, |x, y| {
        let v = map.get(x as usize, y as usize).clamp(0.0, 1.0);
        Luma([(v * 65535.0).round() as u16])
    });
    out.save(path).map_err(|e| CliError::image(path, e))
}

/// Source image with the mask tinted red, for inspection.
pub fn overlay(img: &ImageBuf, mask: &Mask) -> ImageBuf {
    let mut out = img.clone();
    for (p, &m) in out.pixels_mut().iter_mut().zip(mask.bits()) {
        if m {
            *p = [0.5 * p[0] + 0.5, 0.5 * p[1], 0.5 * p[2]];
        }
    }
    out
}
