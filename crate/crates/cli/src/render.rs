//! Binary PPM rasters of coverage reports, unrolled in polar coordinates.
//!
//! Row `i` samples the radius `r_lo + (i + ½)·Δr` with the inner radius on top, column `j`
//! the angle `phi_lo + (j + ½)·Δφ`. Covered cells are white, uncovered cells black and
//! undecided cells gray.

use std::io::Write;

use rotacover::{CoverageReport, Verdict};

pub const COVERED: u8 = 255;
pub const UNCOVERED: u8 = 0;
pub const AMBIGUOUS: u8 = 128;

pub fn shade(v: Verdict) -> u8 {
    match v {
        Verdict::Covered => COVERED,
        Verdict::Uncovered => UNCOVERED,
        Verdict::Ambiguous => AMBIGUOUS,
    }
}

/// Grayscale raster of `report` with `width` angle columns and `height` radius rows.
///
/// Each cell paints the pixels whose sample point it contains. Pixels no cell claims
/// (impossible for a complete report) stay gray.
pub fn raster(report: &CoverageReport, width: usize, height: usize) -> Vec<u8> {
    let reg = report.region;
    let dr = (reg.r_hi - reg.r_lo) / height as f64;
    let dphi = reg.span() / width as f64;
    let mut px = vec![AMBIGUOUS; width * height];
    // first pixel index whose sample point is ≥ x, for samples lo + (i + ½)·step
    let first = |x: f64, lo: f64, step: f64, n: usize| (((x - lo) / step - 0.5).ceil().max(0.0) as usize).min(n);
    for c in &report.cells {
        let b = c.cell;
        let (i0, i1) = (first(b.r_lo, reg.r_lo, dr, height), first(b.r_hi, reg.r_lo, dr, height));
        let p0 = reg.phi_lo + (b.phi_lo - reg.phi_lo).rem_euclid(std::f64::consts::TAU);
        let (j0, j1) = (first(p0, reg.phi_lo, dphi, width), first(p0 + b.span(), reg.phi_lo, dphi, width));
        let v = shade(c.verdict);
        for i in i0..i1 {
            px[i * width + j0..i * width + j1].fill(v);
        }
    }
    px
}

/// Writes a P6 image, replicating each gray level into the three channels.
pub fn write_ppm<W: Write>(mut w: W, gray: &[u8], width: usize, height: usize) -> std::io::Result<()> {
    write!(w, "P6\n{width} {height}\n255\n")?;
    let rgb: Vec<u8> = gray.iter().flat_map(|&g| [g, g, g]).collect();
    w.write_all(&rgb)
}

/// Parses a P6 image produced by [`write_ppm`] back into its dimensions and RGB bytes.
pub fn read_ppm(bytes: &[u8]) -> Option<(usize, usize, &[u8])> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while bytes.get(pos)?.is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while !bytes.get(pos)?.is_ascii_whitespace() {
            pos += 1;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?);
    }
    if fields[0] != "P6" || fields[3] != "255" {
        return None;
    }
    let (w, h): (usize, usize) = (fields[1].parse().ok()?, fields[2].parse().ok()?);
    let data = bytes.get(pos + 1..)?;
    (data.len() == 3 * w * h).then_some((w, h, data))
}
