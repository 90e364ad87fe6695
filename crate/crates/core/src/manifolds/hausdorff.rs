//! Hausdorff distance between raster occupancy sets, in cell units.

use super::raster::InstabilityRaster;
use crate::error::{Error, Result};

const FAR: f64 = 1e20;

/// One-dimensional squared distance transform (lower envelope of parabolas).
fn transform_1d(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k = 0;
    v[0] = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        loop {
            let p = v[k];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                k += 1;
                v[k] = q;
                z[k] = s;
                z[k + 1] = f64::INFINITY;
                break;
            }
        }
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

/// Exact squared Euclidean distance (in cells) to the nearest occupied cell.
pub(crate) fn squared_distance_field(r: &InstabilityRaster) -> Vec<f64> {
    let (w, h) = (r.grid.width, r.grid.height);
    let mut field = vec![FAR; w * h];
    for (i, j) in r.occupied() {
        field[j * w + i] = 0.0;
    }
    let n = w.max(h);
    let (mut v, mut z) = (vec![0usize; n], vec![0.0; n + 1]);
    let mut col = vec![0.0; h];
    let mut out = vec![0.0; n];
    for i in 0..w {
        for j in 0..h {
            col[j] = field[j * w + i];
        }
        transform_1d(&col, &mut out[..h], &mut v, &mut z);
        for j in 0..h {
            field[j * w + i] = out[j];
        }
    }
    let mut row = vec![0.0; w];
    for j in 0..h {
        row.copy_from_slice(&field[j * w..(j + 1) * w]);
        transform_1d(&row, &mut out[..w], &mut v, &mut z);
        field[j * w..(j + 1) * w].copy_from_slice(&out[..w]);
    }
    field
}

fn directed(from: &InstabilityRaster, to_field: &[f64]) -> f64 {
    let w = from.grid.width;
    from.occupied().map(|(i, j)| to_field[j * w + i]).fold(0.0, f64::max).sqrt()
}

fn check_grids(a: &InstabilityRaster, b: &InstabilityRaster) -> Result<()> {
    if a.grid != b.grid || a.window != b.window {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// `(sup_a d(a, B), sup_b d(b, A))`. An empty set against a non-empty one is
/// infinitely far.
pub fn directed_distances(a: &InstabilityRaster, b: &InstabilityRaster) -> Result<(f64, f64)> {
    check_grids(a, b)?;
    match (a.count(), b.count()) {
        (0, 0) => return Ok((0.0, 0.0)),
        (0, _) | (_, 0) => return Ok((f64::INFINITY, f64::INFINITY)),
        _ => {}
    }
    let fa = squared_distance_field(a);
    let fb = squared_distance_field(b);
    Ok((directed(a, &fb), directed(b, &fa)))
}

/// Symmetric Hausdorff distance between the occupied cells, in cells.
pub fn closure_distance(a: &InstabilityRaster, b: &InstabilityRaster) -> Result<f64> {
    let (ab, ba) = directed_distances(a, b)?;
    Ok(ab.max(ba))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifolds::{RasterGrid, Window};
    use proptest::prelude::*;

    fn raster(w: usize, h: usize, cells: &[(usize, usize)]) -> InstabilityRaster {
        let mut r = InstabilityRaster::empty(RasterGrid::new(w, h).unwrap(), Window::new(0.0, 1.0, 0.0, 1.0).unwrap());
        for &(i, j) in cells {
            r.set(i, j);
        }
        r
    }

    fn brute(a: &InstabilityRaster, b: &InstabilityRaster) -> f64 {
        let d = |x: &InstabilityRaster, y: &InstabilityRaster| {
            x.occupied()
                .map(|(i, j)| {
                    y.occupied()
                        .map(|(k, l)| (i as f64 - k as f64).hypot(j as f64 - l as f64))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        d(a, b).max(d(b, a))
    }

    #[test]
    fn identical_and_dilated() {
        let r = raster(20, 10, &[(3, 4), (10, 2), (11, 2), (19, 9)]);
        assert_eq!(closure_distance(&r, &r).unwrap(), 0.0);
        assert_eq!(closure_distance(&r, &r.dilated()).unwrap(), 1.0);
    }

    #[test]
    fn mismatched_grids() {
        let a = raster(10, 10, &[(1, 1)]);
        let b = raster(10, 11, &[(1, 1)]);
        assert!(matches!(closure_distance(&a, &b), Err(Error::GridMismatch)));
    }

    #[test]
    fn empty_sets() {
        let a = raster(10, 10, &[]);
        let b = raster(10, 10, &[(1, 1)]);
        assert_eq!(closure_distance(&a, &a).unwrap(), 0.0);
        assert!(closure_distance(&a, &b).unwrap().is_infinite());
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            a in prop::collection::vec((0usize..17, 0usize..9), 1..12),
            b in prop::collection::vec((0usize..17, 0usize..9), 1..12),
        ) {
            let ra = raster(17, 9, &a);
            let rb = raster(17, 9, &b);
            let d = closure_distance(&ra, &rb).unwrap();
            prop_assert!((d - brute(&ra, &rb)).abs() < 1e-12);
            prop_assert_eq!(d, closure_distance(&rb, &ra).unwrap());
        }
    }
}
