//! Deterministic SVG output: terrace satellite view, terrace area plot, and
//! rotated barcode slices. All numeric attributes use fixed 6-decimal
//! formatting so identical inputs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::persistence::Barcode;
use crate::terrace::{TerraceAreaSummary, TerraceMatrix};
use crate::{Error, Result};

/// Discrete palette for terrace heights. The default is a 14-step
/// color-blind-safe scale drawn from the Tol muted and Okabe-Ito sets;
/// height 0 is always rendered in the neutral background color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Palette {
    Terrace,
    Grayscale,
}

const ZERO_COLOR: &str = "#f7f7f7";

const TERRACE_COLORS: [&str; 14] = [
    "#88ccee", "#44aa99", "#117733", "#999933", "#ddcc77", "#e69f00", "#cc6677", "#d55e00",
    "#aa4499", "#882255", "#663399", "#332288", "#4477aa", "#661100",
];

const GRAY_COLORS: [&str; 13] = [
    "#e8e8e8", "#d8d8d8", "#c8c8c8", "#b8b8b8", "#a8a8a8", "#989898", "#888888", "#787878",
    "#686868", "#585858", "#484848", "#383838", "#282828",
];

impl Palette {
    pub fn from_name(name: &str) -> Option<Palette> {
        match name {
            "terrace" => Some(Palette::Terrace),
            "grayscale" => Some(Palette::Grayscale),
            _ => None,
        }
    }

    pub fn color(&self, height: usize) -> &'static str {
        if height == 0 {
            return ZERO_COLOR;
        }
        match self {
            Palette::Terrace => TERRACE_COLORS[(height - 1) % TERRACE_COLORS.len()],
            Palette::Grayscale => GRAY_COLORS[(height - 1) % GRAY_COLORS.len()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    pub height_cap: Option<usize>,
    pub palette: Palette,
    pub width_px: usize,
    pub height_px: usize,
    pub annotate: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            height_cap: None,
            palette: Palette::Terrace,
            width_px: 640,
            height_px: 480,
            annotate: true,
        }
    }
}

impl RenderOptions {
    fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::InvalidParameter("render size must be positive".into()));
        }
        if self.height_cap == Some(0) {
            return Err(Error::InvalidParameter("height_cap must be >= 1".into()));
        }
        Ok(())
    }

    fn capped(&self, z: usize) -> usize {
        match self.height_cap {
            Some(cap) => z.min(cap),
            None => z,
        }
    }

    fn legend_label(&self, z: usize) -> String {
        match self.height_cap {
            Some(cap) if z == cap => format!("\u{2265}{cap}"),
            _ => z.to_string(),
        }
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.6}")
}

/// Write a file via a temp file in the same directory plus rename, so a
/// failed run never leaves a partially written output.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
        )),
        None => Path::new(&format!(
            ".{}.tmp",
            path.file_name().map(|n| n.to_string_lossy()).unwrap_or_default()
        ))
        .to_path_buf(),
    };
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
}

fn svg_open(width: usize, height: usize) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>\n"
    )
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) {
    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1\"/>",
        fmt(frame.x0),
        fmt(frame.y0),
        fmt(frame.w),
        fmt(frame.h)
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>",
        fmt(frame.x0 + frame.w / 2.0),
        fmt(frame.y0 + frame.h + 32.0),
        x_label
    );
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 {} {})\">{}</text>",
        fmt(frame.x0 - 40.0),
        fmt(frame.y0 + frame.h / 2.0),
        fmt(frame.x0 - 40.0),
        fmt(frame.y0 + frame.h / 2.0),
        y_label
    );
    for (t, v, anchor) in [
        (frame.x0, x_range.0, "start"),
        (frame.x0 + frame.w, x_range.1, "end"),
    ] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"{anchor}\" font-family=\"sans-serif\">{}</text>",
            fmt(t),
            fmt(frame.y0 + frame.h + 14.0),
            fmt(v)
        );
    }
    for (t, v) in [(frame.y0 + frame.h, y_range.0), (frame.y0, y_range.1)] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"end\" font-family=\"sans-serif\">{}</text>",
            fmt(frame.x0 - 4.0),
            fmt(t + 4.0),
            fmt(v)
        );
    }
}

fn legend(out: &mut String, options: &RenderOptions, frame: &Frame, values: &[usize]) {
    let x = frame.x0 + frame.w + 12.0;
    for (row, &v) in values.iter().enumerate() {
        let y = frame.y0 + row as f64 * 18.0;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\" stroke=\"#000000\" stroke-width=\"0.5\"/>",
            fmt(x),
            fmt(y),
            options.palette.color(v)
        );
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\" font-family=\"sans-serif\">{}</text>",
            fmt(x + 16.0),
            fmt(y + 10.0),
            options.legend_label(v)
        );
    }
}

/// Satellite view of the terrace: x = bandwidth, y = filtration value,
/// color = (possibly capped) terrace height, one rectangle per matrix cell.
pub fn terrace_to_svg(matrix: &TerraceMatrix, options: &RenderOptions) -> Result<String> {
    options.validate()?;
    let nx = matrix.xvec.len();
    let ny = matrix.yvec.len();
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidParameter("empty terrace matrix".into()));
    }
    let margin_left = if options.annotate { 60.0 } else { 8.0 };
    let margin_right = 70.0;
    let margin_top = 12.0;
    let margin_bottom = if options.annotate { 44.0 } else { 8.0 };
    let frame = Frame {
        x0: margin_left,
        y0: margin_top,
        w: options.width_px as f64 - margin_left - margin_right,
        h: options.height_px as f64 - margin_top - margin_bottom,
    };

    // normalized cell edges; single-entry axes degrade to the full span
    let xs: Vec<f64> = if nx == 1 {
        vec![0.0, 1.0]
    } else {
        let (lo, hi) = (matrix.xvec[0], matrix.xvec[nx - 1]);
        matrix.xvec.iter().map(|x| (x - lo) / (hi - lo)).collect()
    };
    let ys: Vec<f64> = if ny == 1 {
        vec![0.0, 1.0]
    } else {
        let (hi, lo) = (matrix.yvec[0], matrix.yvec[ny - 1]);
        matrix
            .yvec
            .iter()
            .map(|y| (hi - y) / (hi - lo)) // 0 at the top (largest filtration)
            .collect()
    };

    let mut out = svg_open(options.width_px, options.height_px);
    let mut seen: Vec<usize> = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..xs.len() - 1 {
            let z = options.capped(matrix.zmat[j.min(ny - 1)][i.min(nx - 1)]);
            if !seen.contains(&z) {
                seen.push(z);
            }
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                fmt(frame.x0 + xs[i] * frame.w),
                fmt(frame.y0 + ys[j] * frame.h),
                fmt((xs[i + 1] - xs[i]) * frame.w),
                fmt((ys[j + 1] - ys[j]) * frame.h),
                options.palette.color(z)
            );
        }
    }
    seen.sort_unstable();
    if options.annotate {
        axes(
            &mut out,
            &frame,
            "bandwidth",
            "filtration",
            (matrix.xvec[0], matrix.xvec[nx - 1]),
            (matrix.yvec[ny - 1], matrix.yvec[0]),
        );
    }
    legend(&mut out, options, &frame, &seen);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_terrace(
    matrix: &TerraceMatrix,
    options: &RenderOptions,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_atomic(path.as_ref(), terrace_to_svg(matrix, options)?.as_bytes())
}

/// Terrace area plot: one bar per height >= 1.
pub fn area_to_svg(summary: &TerraceAreaSummary, options: &RenderOptions) -> Result<String> {
    options.validate()?;
    let margin_left = 60.0;
    let margin_right = 16.0;
    let margin_top = 12.0;
    let margin_bottom = 44.0;
    let frame = Frame {
        x0: margin_left,
        y0: margin_top,
        w: options.width_px as f64 - margin_left - margin_right,
        h: options.height_px as f64 - margin_top - margin_bottom,
    };
    let mut out = svg_open(options.width_px, options.height_px);
    let max_h = summary.max_height();
    let max_area = summary.areas.values().cloned().fold(0.0, f64::max);
    if max_h >= 1 && max_area > 0.0 {
        let slot = frame.w / max_h as f64;
        for h in 1..=max_h {
            let a = summary.area(h);
            let bar_h = a / max_area * frame.h;
            let _ = writeln!(
                out,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#000000\" stroke-width=\"0.5\"/>",
                fmt(frame.x0 + (h - 1) as f64 * slot + slot * 0.1),
                fmt(frame.y0 + frame.h - bar_h),
                fmt(slot * 0.8),
                fmt(bar_h),
                options.palette.color(h)
            );
            if options.annotate {
                let _ = writeln!(
                    out,
                    "<text x=\"{}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\" font-family=\"sans-serif\">{h}</text>",
                    fmt(frame.x0 + (h - 1) as f64 * slot + slot * 0.5),
                    fmt(frame.y0 + frame.h + 14.0)
                );
            }
        }
    }
    if options.annotate {
        axes(
            &mut out,
            &frame,
            "terrace height",
            "standardized area",
            (1.0, max_h.max(1) as f64),
            (0.0, max_area),
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_area(
    summary: &TerraceAreaSummary,
    options: &RenderOptions,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_atomic(path.as_ref(), area_to_svg(summary, options)?.as_bytes())
}

/// Rotated barcode for one bandwidth column of the terrace: one vertical
/// segment per dimension-`matrix.dim` persistence pair, endpoints at the
/// pair's birth and death on the terrace's filtration axis.
pub fn barcode_slice_to_svg(
    matrix: &TerraceMatrix,
    column: usize,
    barcode: &Barcode,
    options: &RenderOptions,
) -> Result<String> {
    options.validate()?;
    if column >= matrix.xvec.len() {
        return Err(Error::IndexOutOfRange {
            index: column,
            len: matrix.xvec.len(),
        });
    }
    let ny = matrix.yvec.len();
    let (y_lo, y_hi) = (matrix.yvec[ny - 1], matrix.yvec[0]);
    let span = (y_hi - y_lo).max(f64::MIN_POSITIVE);
    let margin_left = 60.0;
    let margin_right = 16.0;
    let margin_top = 12.0;
    let margin_bottom = 44.0;
    let frame = Frame {
        x0: margin_left,
        y0: margin_top,
        w: options.width_px as f64 - margin_left - margin_right,
        h: options.height_px as f64 - margin_top - margin_bottom,
    };
    let mut out = svg_open(options.width_px, options.height_px);
    let bars: Vec<_> = barcode.pairs_of_dim(matrix.dim).collect();
    let n = bars.len();
    for (b, pair) in bars.iter().enumerate() {
        let x = frame.x0 + frame.w * (b as f64 + 0.5) / n.max(1) as f64;
        let y_top = frame.y0 + frame.h * (y_hi - pair.birth.min(y_hi)) / span;
        let y_bot = frame.y0 + frame.h * (y_hi - pair.death.max(y_lo)) / span;
        let _ = writeln!(
            out,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#4477aa\" stroke-width=\"3\"/>",
            fmt(x),
            fmt(y_top),
            fmt(x),
            fmt(y_bot)
        );
    }
    if options.annotate {
        axes(
            &mut out,
            &frame,
            &format!("bars at bandwidth {}", fmt(matrix.xvec[column])),
            "filtration",
            (0.0, n as f64),
            (y_lo, y_hi),
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn render_barcode_slice(
    matrix: &TerraceMatrix,
    column: usize,
    barcode: &Barcode,
    options: &RenderOptions,
    path: impl AsRef<Path>,
) -> Result<()> {
    write_atomic(
        path.as_ref(),
        barcode_slice_to_svg(matrix, column, barcode, options)?.as_bytes(),
    )
}
