//! Density images (PGM), density dumps and convergence logs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::config::ImageFormat;
use crate::error::{Result, TopOptError};
use crate::grid_fem::GridMesh;
use crate::record::{IterationRow, OptRecord};

pub const CONVERGENCE_HEADER: &str = "iter,compliance,volfrac,change,checkerboard_index";

fn pixel(rho: f64) -> u8 {
    (255.0 * (1.0 - rho)).round().clamp(0.0, 255.0) as u8
}

fn check_field(mesh: &GridMesh, rho: &[f64]) -> Result<()> {
    crate::error::check_len("density field", rho.len(), mesh.n_elements())
}

/// Graymap with one pixel per element, solid black and void white, rows
/// from the top of the domain down.
pub fn render_pgm(mesh: &GridMesh, rho: &[f64], format: ImageFormat) -> Result<Vec<u8>> {
    check_field(mesh, rho)?;
    let (w, h) = (mesh.nelx(), mesh.nely());
    let pixels = (0..h).map(|y| (0..w).map(move |x| (x, y)));
    match format {
        ImageFormat::P2 => {
            let mut s = format!("P2\n{w} {h}\n255\n");
            for row in pixels {
                let line: Vec<String> = row
                    .map(|(x, y)| pixel(rho[mesh.element_index(x, y)]).to_string())
                    .collect();
                s.push_str(&line.join(" "));
                s.push('\n');
            }
            Ok(s.into_bytes())
        }
        ImageFormat::P5 => {
            let mut out = format!("P5\n{w} {h}\n255\n").into_bytes();
            out.extend(
                pixels
                    .flatten()
                    .map(|(x, y)| pixel(rho[mesh.element_index(x, y)])),
            );
            Ok(out)
        }
    }
}

pub fn emit_density_image(
    mesh: &GridMesh,
    rho: &[f64],
    path: &Path,
    format: ImageFormat,
) -> Result<()> {
    fs::write(path, render_pgm(mesh, rho, format)?)?;
    Ok(())
}

/// Reads a P2 or P5 graymap back into densities `ρ = 1 − v / maxval`.
pub fn parse_pgm(bytes: &[u8]) -> Result<(GridMesh, Vec<f64>)> {
    let bad = |m: &str| TopOptError::Format(format!("PGM: {m}"));
    let mut pos = 0;
    let token = |pos: &mut usize| -> Result<String> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if start == *pos {
            return Err(bad("unexpected end of data"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..*pos]).into_owned())
    };
    let magic = token(&mut pos)?;
    let num = |s: String| s.parse::<usize>().map_err(|_| bad("invalid number"));
    let w = num(token(&mut pos)?)?;
    let h = num(token(&mut pos)?)?;
    let maxval = num(token(&mut pos)?)?;
    if maxval == 0 || maxval > 255 {
        return Err(bad("maxval must be in 1..=255"));
    }
    let mesh = GridMesh::new(w, h)?;
    let mut rho = vec![0.0; w * h];
    let values: Vec<usize> = match magic.as_str() {
        "P2" => (0..w * h)
            .map(|_| token(&mut pos).and_then(num))
            .collect::<Result<_>>()?,
        "P5" => {
            // exactly one whitespace byte separates the header from the raster
            let start = pos + 1;
            let raster = bytes
                .get(start..start + w * h)
                .ok_or_else(|| bad("truncated raster"))?;
            raster.iter().map(|&b| b as usize).collect()
        }
        _ => return Err(bad("unsupported magic number")),
    };
    for (k, &v) in values.iter().enumerate() {
        if v > maxval {
            return Err(bad("pixel exceeds maxval"));
        }
        let (x, y) = (k % w, k / w);
        rho[mesh.element_index(x, y)] = 1.0 - v as f64 / maxval as f64;
    }
    Ok((mesh, rho))
}

/// Density dump: one line per element row (top first), values separated by commas.
pub fn render_density_csv(mesh: &GridMesh, rho: &[f64]) -> Result<String> {
    check_field(mesh, rho)?;
    let mut s = String::new();
    for y in 0..mesh.nely() {
        let row: Vec<String> = (0..mesh.nelx())
            .map(|x| format!("{:?}", rho[mesh.element_index(x, y)]))
            .collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    Ok(s)
}

pub fn parse_density_csv(text: &str) -> Result<(GridMesh, Vec<f64>)> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| TopOptError::Format(format!("density CSV: bad value `{v}`")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let nely = rows.len();
    let nelx = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != nelx) {
        return Err(TopOptError::Format("density CSV: ragged rows".into()));
    }
    let mesh = GridMesh::new(nelx, nely)?;
    let mut rho = vec![0.0; mesh.n_elements()];
    for (y, row) in rows.iter().enumerate() {
        for (x, &v) in row.iter().enumerate() {
            rho[mesh.element_index(x, y)] = v;
        }
    }
    Ok((mesh, rho))
}

pub fn render_convergence_log(record: &OptRecord<f64>) -> String {
    let mut s = String::from(CONVERGENCE_HEADER);
    s.push('\n');
    for r in &record.rows {
        let _ = writeln!(
            s,
            "{},{:?},{:?},{:?},{:?}",
            r.iter, r.compliance, r.volfrac, r.change, r.checkerboard_index
        );
    }
    s
}

pub fn emit_convergence_log(record: &OptRecord<f64>, path: &Path) -> Result<()> {
    if record.is_empty() {
        return Err(TopOptError::Parameter("empty optimization record".into()));
    }
    fs::write(path, render_convergence_log(record))?;
    Ok(())
}

pub fn parse_convergence_log(text: &str) -> Result<OptRecord<f64>> {
    let bad = |m: String| TopOptError::Format(format!("convergence log: {m}"));
    let mut lines = text.lines();
    if lines.next() != Some(CONVERGENCE_HEADER) {
        return Err(bad("missing header".into()));
    }
    let mut record = OptRecord::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(bad(format!("expected 5 columns in `{line}`")));
        }
        let real = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| bad(format!("bad value `{s}`")))
        };
        record.push(IterationRow {
            iter: f[0]
                .parse()
                .map_err(|_| bad(format!("bad iteration `{}`", f[0])))?,
            compliance: real(f[1])?,
            volfrac: real(f[2])?,
            change: real(f[3])?,
            checkerboard_index: real(f[4])?,
        });
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raster(bytes: &[u8]) -> String {
        let s = String::from_utf8(bytes.to_vec()).unwrap();
        s.lines().skip(3).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn solid_renders_black() {
        let mesh = GridMesh::new(2, 2).unwrap();
        let img = render_pgm(&mesh, &[1.0; 4], ImageFormat::P2).unwrap();
        assert_eq!(
            String::from_utf8(img.clone()).unwrap(),
            "P2\n2 2\n255\n0 0\n0 0\n"
        );
        assert_eq!(raster(&img), "0 0 0 0");
    }

    #[test]
    fn void_renders_white() {
        let mesh = GridMesh::new(1, 1).unwrap();
        let img = render_pgm(&mesh, &[1e-3], ImageFormat::P2).unwrap();
        assert_eq!(raster(&img), "255");
    }

    #[test]
    fn checkerboard_pixels() {
        // top row (1, 1e-3), bottom row (1e-3, 1)
        let mesh = GridMesh::new(2, 2).unwrap();
        let mut rho = vec![0.0; 4];
        rho[mesh.element_index(0, 0)] = 1.0;
        rho[mesh.element_index(1, 0)] = 1e-3;
        rho[mesh.element_index(0, 1)] = 1e-3;
        rho[mesh.element_index(1, 1)] = 1.0;
        let img = render_pgm(&mesh, &rho, ImageFormat::P2).unwrap();
        assert_eq!(raster(&img), "0 255 255 0");
        let bin = render_pgm(&mesh, &rho, ImageFormat::P5).unwrap();
        assert_eq!(&bin[bin.len() - 4..], &[0, 255, 255, 0]);
    }

    #[test]
    fn pgm_read_back() {
        let mesh = GridMesh::new(3, 2).unwrap();
        let rho = [1.0, 0.0, 0.2, 0.6, 0.4, 1.0];
        for fmt in [ImageFormat::P2, ImageFormat::P5] {
            let (m, back) = parse_pgm(&render_pgm(&mesh, &rho, fmt).unwrap()).unwrap();
            assert_eq!(m, mesh);
            for (a, b) in rho.iter().zip(&back) {
                assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
            }
        }
        assert!(parse_pgm(b"P3\n1 1\n255\n0\n").is_err());
        assert!(parse_pgm(b"P2\n# comment\n1 1\n255\n7\n").is_ok());
    }

    #[test]
    fn density_csv_round_trip() {
        let mesh = GridMesh::new(3, 2).unwrap();
        let rho = [0.1, 1.0 / 3.0, 1e-3, 0.999_999_9, 0.5, 1e-17];
        let text = render_density_csv(&mesh, &rho).unwrap();
        assert_eq!(text.lines().count(), 2);
        let (m, back) = parse_density_csv(&text).unwrap();
        assert_eq!(m, mesh);
        assert_eq!(back, rho);
        assert!(parse_density_csv("1,2\n3\n").is_err());
    }

    #[test]
    fn single_row_log() {
        let mut rec = OptRecord::new();
        rec.push(IterationRow {
            iter: 1,
            compliance: 123.456,
            volfrac: 0.4,
            change: 0.2,
            checkerboard_index: 0.0,
        });
        let text = render_convergence_log(&rec);
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_convergence_log(&text).unwrap(), rec);
        assert!(parse_convergence_log("iter,compliance\n").is_err());
    }
}
