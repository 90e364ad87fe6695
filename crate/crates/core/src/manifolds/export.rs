//! Raster and polyline image output.
//!
//! PGM: binary `P5`, header `P5\n<width> <height>\n255\n`, then one byte per
//! cell, rows from the top of the window (largest `y`) down; 0 is empty, 255
//! occupied.
//!
//! SVG: version 1.1, one `<polyline>` per arc in window coordinates flipped so
//! that `y` grows upwards; an arc is split wherever it leaves the window or
//! wraps in `x`.

use std::fmt::Write as _;
use std::io::{self, Write};

use super::grow::ManifoldArc;
use super::raster::{InstabilityRaster, Window};

pub fn write_pgm<W: Write>(raster: &InstabilityRaster, mut out: W) -> io::Result<()> {
    write!(out, "P5\n{} {}\n255\n", raster.grid.width, raster.grid.height)?;
    let mut row = Vec::with_capacity(raster.grid.width);
    for cells in raster.rows_top_down() {
        row.clear();
        row.extend(cells.iter().map(|&c| if c { 255u8 } else { 0 }));
        out.write_all(&row)?;
    }
    Ok(())
}

pub fn write_svg<W: Write>(
    arcs: &[ManifoldArc],
    window: Window,
    width: usize,
    height: usize,
    mut out: W,
) -> io::Result<()> {
    let sx = width as f64 / (window.x_max - window.x_min);
    let sy = height as f64 / (window.y_max - window.y_min);
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )?;
    writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#)?;
    for arc in arcs {
        let mut run = String::new();
        let mut last_cell: Option<i64> = None;
        let flush = |run: &mut String, out: &mut W| -> io::Result<()> {
            if run.matches(' ').count() >= 1 {
                writeln!(
                    out,
                    r#"<polyline fill="none" stroke="black" stroke-width="0.5" points="{}"/>"#,
                    run.trim_end()
                )?;
            }
            run.clear();
            Ok(())
        };
        for w in &arc.polyline {
            let cell = (w.x - window.x_min).div_euclid(1.0) as i64;
            let x = window.x_min + (w.x - window.x_min).rem_euclid(1.0);
            let inside = x <= window.x_max && (window.y_min..=window.y_max).contains(&w.y);
            if !inside || last_cell != Some(cell) {
                flush(&mut run, &mut out)?;
            }
            last_cell = Some(cell);
            if inside {
                let px = (x - window.x_min) * sx;
                let py = (window.y_max - w.y) * sy;
                let _ = write!(run, "{px:.3},{py:.3} ");
            }
        }
        flush(&mut run, &mut out)?;
    }
    writeln!(out, "</svg>")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::CoverPoint;
    use crate::manifolds::{rasterize, RasterGrid, Stability};
    use crate::orbits::PeriodicOrbit;
    use crate::systems::{standard_map, StandardMapParams};

    fn arc(points: &[(f64, f64)]) -> ManifoldArc {
        let m = standard_map(StandardMapParams::new(0.0).unwrap());
        let o = PeriodicOrbit::from_point(&m, CoverPoint { x: 0.0, y: 0.0 }, 0, 1).unwrap();
        ManifoldArc::from_polyline(o, Stability::Unstable, points.iter().map(|&(x, y)| CoverPoint { x, y }).collect())
    }

    #[test]
    fn pgm_layout() {
        let w = Window::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let r = rasterize(&[arc(&[(0.1, 0.9), (0.2, 0.9)])], RasterGrid::new(4, 3).unwrap(), w);
        let mut buf = Vec::new();
        write_pgm(&r, &mut buf).unwrap();
        let header = b"P5\n4 3\n255\n";
        assert_eq!(&buf[..header.len()], header);
        assert_eq!(&buf[header.len()..], &[255, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn svg_splits_at_wraps() {
        let w = Window::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let mut buf = Vec::new();
        write_svg(&[arc(&[(0.8, 0.5), (0.9, 0.5), (1.1, 0.5), (1.2, 0.5)])], w, 100, 100, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.contains("80.000,50.000 90.000,50.000"));
    }
}
