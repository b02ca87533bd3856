use serde::{Deserialize, Serialize};

use super::grid::Intensity;
use crate::{Error, Result};

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub row0: usize,
    pub col0: usize,
    pub height: usize,
    pub width: usize,
}

impl Region {
    pub fn square(row0: usize, col0: usize, side: usize) -> Self {
        Region {
            row0,
            col0,
            height: side,
            width: side,
        }
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        row >= self.row0 && row < self.row0 + self.height && col >= self.col0 && col < self.col0 + self.width
    }

    fn overlaps(&self, other: &Region) -> bool {
        self.row0 < other.row0 + other.height
            && other.row0 < self.row0 + self.height
            && self.col0 < other.col0 + other.width
            && other.col0 < self.col0 + self.width
    }

    fn fits(&self, n: usize) -> bool {
        self.height > 0 && self.width > 0 && self.row0 + self.height <= n && self.col0 + self.width <= n
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }
}

/// One region per class on the detector plane.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorLayout {
    regions: Vec<Region>,
}

impl DetectorLayout {
    /// Validates that the regions are non-empty, pairwise disjoint and inside
    /// an `n x n` grid.
    pub fn new(n: usize, regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(Error::invalid("detector needs at least one region"));
        }
        for (i, r) in regions.iter().enumerate() {
            if !r.fits(n) {
                return Err(Error::invalid(format!(
                    "detector region {i} ({r:?}) does not fit a {n}x{n} grid"
                )));
            }
            for (j, s) in regions.iter().enumerate().skip(i + 1) {
                if r.overlaps(s) {
                    return Err(Error::invalid(format!("detector regions {i} and {j} overlap")));
                }
            }
        }
        Ok(DetectorLayout { regions })
    }

    /// `num_classes` squares of side `side` on a centred `m x m` lattice with
    /// `m = ceil(sqrt(C))`, filled row-major. Squares are separated by one
    /// side length, or by less when that would not fit.
    pub fn uniform(n: usize, num_classes: usize, side: usize) -> Result<Self> {
        if num_classes == 0 || side == 0 {
            return Err(Error::invalid("detector needs >= 1 class and side >= 1"));
        }
        let m = (num_classes as f64).sqrt().ceil() as usize;
        let m = if m * m < num_classes { m + 1 } else { m };
        if m * side > n {
            return Err(Error::invalid(format!(
                "{num_classes} detector squares of side {side} do not fit a {n}x{n} grid"
            )));
        }
        let gap = if m > 1 { side.min((n - m * side) / (m - 1)) } else { 0 };
        let span = m * side + (m - 1) * gap;
        let origin = (n - span) / 2;
        let regions = (0..num_classes)
            .map(|c| {
                let (cell_r, cell_c) = (c / m, c % m);
                Region::square(origin + cell_r * (side + gap), origin + cell_c * (side + gap), side)
            })
            .collect();
        DetectorLayout::new(n, regions)
    }

    pub fn num_classes(&self) -> usize {
        self.regions.len()
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Region index owning each pixel of an `n x n` plane.
    pub fn pixel_owner(&self, n: usize) -> Vec<Option<usize>> {
        let mut owner = vec![None; n * n];
        for (c, r) in self.regions.iter().enumerate() {
            for row in r.row0..r.row0 + r.height {
                for col in r.col0..r.col0 + r.width {
                    owner[row * n + col] = Some(c);
                }
            }
        }
        owner
    }

    pub fn validate_for(&self, n: usize) -> Result<()> {
        for (i, r) in self.regions.iter().enumerate() {
            if !r.fits(n) {
                return Err(Error::invalid(format!(
                    "detector region {i} ({r:?}) lies outside the {n}x{n} grid"
                )));
            }
        }
        Ok(())
    }
}

/// Sum of intensity inside each detector region.
pub fn detect(intensity: &Intensity, layout: &DetectorLayout) -> Result<Vec<f64>> {
    let n = intensity.n;
    layout.validate_for(n)?;
    Ok(layout
        .regions()
        .iter()
        .map(|r| {
            (r.row0..r.row0 + r.height)
                .map(|row| {
                    intensity.values[row * n + r.col0..row * n + r.col0 + r.width]
                        .iter()
                        .sum::<f64>()
                })
                .sum()
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_layout_seven_classes() {
        let layout = DetectorLayout::uniform(200, 7, 20).unwrap();
        assert_eq!(layout.num_classes(), 7);
        // 3x3 lattice, span 100, origin 50
        assert_eq!(layout.regions()[0], Region::square(50, 50, 20));
        assert_eq!(layout.regions()[4], Region::square(90, 90, 20));
        assert_eq!(layout.regions()[6], Region::square(130, 50, 20));
    }

    #[test]
    fn uniform_layout_shrinks_gap() {
        let layout = DetectorLayout::uniform(16, 2, 6).unwrap();
        // gap shrinks from 6 to 4 so the two squares span the full 16 px
        assert_eq!(layout.regions()[0], Region::square(0, 0, 6));
        assert_eq!(layout.regions()[1], Region::square(0, 10, 6));
        assert!(DetectorLayout::uniform(16, 2, 9).is_err());
    }

    #[test]
    fn rejects_overlap_and_out_of_bounds() {
        assert!(DetectorLayout::new(10, vec![Region::square(0, 0, 4), Region::square(3, 3, 4)]).is_err());
        assert!(DetectorLayout::new(10, vec![Region::square(8, 8, 4)]).is_err());
    }

    #[test]
    fn uniform_intensity_gives_region_area() {
        let layout = DetectorLayout::uniform(64, 4, 10).unwrap();
        let sums = detect(
            &Intensity {
                n: 64,
                values: vec![1.0; 64 * 64],
            },
            &layout,
        )
        .unwrap();
        assert_eq!(sums, vec![100.0; 4]);
        let zero = detect(
            &Intensity {
                n: 64,
                values: vec![0.0; 64 * 64],
            },
            &layout,
        )
        .unwrap();
        assert_eq!(zero, vec![0.0; 4]);
    }

    #[test]
    fn single_bright_pixel_matches_brute_force() {
        let n = 40;
        let layout = DetectorLayout::uniform(n, 5, 6).unwrap();
        for (target, region) in layout.regions().iter().enumerate() {
            let mut values = vec![0.0; n * n];
            let (row, col) = (region.row0 + 2, region.col0 + 3);
            values[row * n + col] = 2.5;
            let map = Intensity { n, values };
            let sums = detect(&map, &layout).unwrap();
            // brute force: visit every pixel and ask every region
            let mut oracle = vec![0.0; layout.num_classes()];
            for r in 0..n {
                for c in 0..n {
                    for (i, reg) in layout.regions().iter().enumerate() {
                        if reg.contains(r, c) {
                            oracle[i] += map.get(r, c);
                        }
                    }
                }
            }
            assert_eq!(sums, oracle);
            for (i, s) in sums.iter().enumerate() {
                assert_eq!(*s != 0.0, i == target);
            }
        }
    }

    #[test]
    fn detect_rejects_small_map() {
        let layout = DetectorLayout::uniform(64, 4, 10).unwrap();
        assert!(detect(
            &Intensity {
                n: 20,
                values: vec![0.0; 400]
            },
            &layout
        )
        .is_err());
    }
}
