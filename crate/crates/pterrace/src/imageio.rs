//! Grayscale PGM images and conversion to point clouds by
//! intensity-weighted pixel sampling.

use std::path::Path;

use rand::Rng;

use crate::pointcloud::PointCloud;
use crate::{rng, Error, Result};

/// Grayscale image, row-major, intensities in `0..=maxval`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub pixels: Vec<u16>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, maxval: u16, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter("image dimensions must be positive".into()));
        }
        if maxval == 0 {
            return Err(Error::InvalidParameter("maxval must be > 0".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "pixel buffer length {} != {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if let Some(&p) = pixels.iter().find(|&&p| p > maxval) {
            return Err(Error::InvalidParameter(format!(
                "pixel value {p} exceeds maxval {maxval}"
            )));
        }
        Ok(GrayImage {
            width,
            height,
            maxval,
            pixels,
        })
    }

    pub fn pixel(&self, col: usize, row: usize) -> u16 {
        self.pixels[row * self.width + col]
    }

    /// Binary (P5) PGM serialization; 8-bit when maxval fits.
    pub fn to_pgm_p5(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        if self.maxval < 256 {
            out.extend(self.pixels.iter().map(|&p| p as u8));
        } else {
            for &p in &self.pixels {
                out.extend(p.to_be_bytes());
            }
        }
        out
    }
}

/// Parse a P2 (ASCII) or P5 (binary) PGM file.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&data)
}

pub fn parse_pgm(data: &[u8]) -> Result<GrayImage> {
    let mut pos = 0usize;

    // A header token: skips whitespace and '#' comments, fails with the
    // byte offset where input ran out or turned invalid.
    fn next_token(data: &[u8], pos: &mut usize) -> Result<Vec<u8>> {
        loop {
            while *pos < data.len() && data[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < data.len() && data[*pos] == b'#' {
                while *pos < data.len() && data[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        if *pos >= data.len() {
            return Err(Error::Pgm {
                message: "unexpected end of header".into(),
                offset: *pos,
            });
        }
        let start = *pos;
        while *pos < data.len() && !data[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        Ok(data[start..*pos].to_vec())
    }

    fn next_usize(data: &[u8], pos: &mut usize, what: &str) -> Result<usize> {
        let start = *pos;
        let tok = next_token(data, pos)?;
        std::str::from_utf8(&tok)
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .ok_or(Error::Pgm {
                message: format!("invalid {what}"),
                offset: start,
            })
    }

    let magic = next_token(data, &mut pos)?;
    let binary = match magic.as_slice() {
        b"P5" => true,
        b"P2" => false,
        _ => {
            return Err(Error::Pgm {
                message: format!("unsupported magic '{}'", String::from_utf8_lossy(&magic)),
                offset: 0,
            })
        }
    };
    let width = next_usize(data, &mut pos, "width")?;
    let height = next_usize(data, &mut pos, "height")?;
    let maxval = next_usize(data, &mut pos, "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Pgm {
            message: format!("maxval {maxval} out of range"),
            offset: pos,
        });
    }
    let npix = width * height;
    let mut pixels = Vec::with_capacity(npix);
    if binary {
        // exactly one whitespace byte after maxval
        if pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let bytes_per = if maxval < 256 { 1 } else { 2 };
        for _ in 0..npix {
            if pos + bytes_per > data.len() {
                return Err(Error::Pgm {
                    message: "truncated pixel data".into(),
                    offset: pos,
                });
            }
            let v = if bytes_per == 1 {
                data[pos] as u16
            } else {
                u16::from_be_bytes([data[pos], data[pos + 1]])
            };
            pos += bytes_per;
            pixels.push(v);
        }
    } else {
        for _ in 0..npix {
            let start = pos;
            let v = next_usize(data, &mut pos, "pixel").map_err(|_| Error::Pgm {
                message: "truncated or invalid pixel data".into(),
                offset: start,
            })?;
            if v > 65535 {
                return Err(Error::Pgm {
                    message: format!("pixel value {v} out of range"),
                    offset: start,
                });
            }
            pixels.push(v as u16);
        }
    }
    let img = GrayImage::new(width, height, maxval as u16, pixels)?;
    Ok(img)
}

/// Map a pixel to plot coordinates: pixel (col, row) occupies the unit
/// square with lower-left corner (col, height - 1 - row), so the image is
/// upright.
fn pixel_origin(img: &GrayImage, col: usize, row: usize) -> (f64, f64) {
    (col as f64, (img.height - 1 - row) as f64)
}

/// Sample `n` pixels with probability proportional to `maxval - pixel`
/// (darkness = true) or to `pixel` (darkness = false), jittering each
/// sample uniformly within its pixel square.
pub fn sample_intensity(
    img: &GrayImage,
    n: usize,
    darkness: bool,
    seed: u64,
) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let weights: Vec<f64> = img
        .pixels
        .iter()
        .map(|&p| {
            if darkness {
                (img.maxval - p) as f64
            } else {
                p as f64
            }
        })
        .collect();
    let mut cumulative = Vec::with_capacity(weights.len());
    let mut total = 0.0;
    for w in &weights {
        total += w;
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Err(Error::InvalidParameter(
            "all sampling weights are zero".into(),
        ));
    }
    let mut pick_rng = rng::stream(seed, "image/pixels");
    let mut jitter_rng = rng::stream(seed, "image/jitter");
    let mut coords = Vec::with_capacity(n * 2);
    for _ in 0..n {
        let u: f64 = pick_rng.gen::<f64>() * total;
        let idx = cumulative.partition_point(|&c| c <= u).min(weights.len() - 1);
        let (col, row) = (idx % img.width, idx / img.width);
        let (x0, y0) = pixel_origin(img, col, row);
        coords.push(x0 + jitter_rng.gen::<f64>());
        coords.push(y0 + jitter_rng.gen::<f64>());
    }
    PointCloud::new(2, coords)
}

/// Uniform points on the perimeter of the image rectangle
/// [0, width] x [0, height].
pub fn sample_boundary(img: &GrayImage, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    let w = img.width as f64;
    let h = img.height as f64;
    let perimeter = 2.0 * (w + h);
    let mut rng = rng::stream(seed, "image/boundary");
    let mut coords = Vec::with_capacity(n * 2);
    for _ in 0..n {
        let t: f64 = rng.gen::<f64>() * perimeter;
        // walk the perimeter counterclockwise: bottom, right, top, left
        let (x, y) = if t < w {
            (t, 0.0)
        } else if t < w + h {
            (w, t - w)
        } else if t < 2.0 * w + h {
            (w - (t - w - h), h)
        } else {
            (0.0, h - (t - 2.0 * w - h))
        };
        coords.push(x);
        coords.push(y);
    }
    PointCloud::new(2, coords)
}
