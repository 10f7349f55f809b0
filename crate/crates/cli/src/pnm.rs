//! PPM / PGM images to and from [`RasterImage`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder, ImageReader};
use memristim_core::dr::RasterImage;

use crate::error::{CliError, CliResult};

/// Reads a binary or ASCII PNM file; colour images become RGB, the rest gray.
/// 16-bit samples are kept at full precision.
pub fn read_image(path: &Path) -> CliResult<RasterImage> {
    let img: DynamicImage = ImageReader::open(path)
        .map_err(|e| CliError::io(path, e))?
        .with_guessed_format()
        .map_err(|e| CliError::io(path, e))?
        .decode()
        .map_err(|e| CliError::io(path, e))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (channels, raw) =
        if img.color().has_color() { (3, img.to_rgb16().into_raw()) } else { (1, img.to_luma16().into_raw()) };
    let data = raw.into_iter().map(|v| f64::from(v) / 65535.0).collect();
    RasterImage::new(w, h, channels, data).map_err(|e| CliError::io(path, e))
}

/// Writes an 8-bit binary PPM (RGB) or PGM (gray).
pub fn write_image(path: &Path, img: &RasterImage) -> CliResult<()> {
    let bytes: Vec<u8> = img.data().iter().map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8).collect();
    let (color, subtype) = if img.channels() == 3 {
        (ExtendedColorType::Rgb8, PnmSubtype::Pixmap(SampleEncoding::Binary))
    } else {
        (ExtendedColorType::L8, PnmSubtype::Graymap(SampleEncoding::Binary))
    };
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    PnmEncoder::new(&mut w)
        .with_subtype(subtype)
        .write_image(&bytes, img.width() as u32, img.height() as u32, color)
        .map_err(|e| CliError::io(path, e))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

/// File extension for an image with `channels` channels.
pub fn extension(channels: usize) -> &'static str {
    if channels == 3 {
        "ppm"
    } else {
        "pgm"
    }
}
