use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{dilate, BinaryMask, StructuringElement};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    fn pixel(self) -> (i64, i64) {
        (self.x.round() as i64, self.y.round() as i64)
    }
}

/// Long and short lesion diameters drawn as line segments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecistAnnotation {
    long_axis: (Point, Point),
    short_axis: (Point, Point),
}

impl RecistAnnotation {
    /// Requires `|long| >= |short| >= 1` pixel.
    pub fn new(long_axis: (Point, Point), short_axis: (Point, Point)) -> Result<Self> {
        let points = [long_axis.0, long_axis.1, short_axis.0, short_axis.1];
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::InvalidAnnotation("non-finite coordinate".into()));
        }
        let long = long_axis.0.distance(long_axis.1);
        let short = short_axis.0.distance(short_axis.1);
        if long == 0.0 && short == 0.0 {
            return Err(Error::InvalidAnnotation("axes degenerate to a single point".into()));
        }
        if short < 1.0 {
            return Err(Error::InvalidAnnotation(format!("short axis length {short:.3} < 1 pixel")));
        }
        if long < short * (1.0 - 1e-9) {
            return Err(Error::InvalidAnnotation(format!(
                "long axis ({long:.3}) shorter than short axis ({short:.3})"
            )));
        }
        Ok(RecistAnnotation {
            long_axis,
            short_axis,
        })
    }

    /// Eight numbers: long axis `x0 y0 x1 y1`, then short axis `x0 y0 x1 y1`.
    pub fn from_coords(c: [f64; 8]) -> Result<Self> {
        Self::new(
            (Point::new(c[0], c[1]), Point::new(c[2], c[3])),
            (Point::new(c[4], c[5]), Point::new(c[6], c[7])),
        )
    }

    pub fn to_coords(&self) -> [f64; 8] {
        let (a, b) = self.long_axis;
        let (c, d) = self.short_axis;
        [a.x, a.y, b.x, b.y, c.x, c.y, d.x, d.y]
    }

    pub fn long_axis(&self) -> (Point, Point) {
        self.long_axis
    }

    pub fn short_axis(&self) -> (Point, Point) {
        self.short_axis
    }

    pub fn check_bounds(&self, width: usize, height: usize) -> Result<()> {
        let pts = [self.long_axis.0, self.long_axis.1, self.short_axis.0, self.short_axis.1];
        for p in pts {
            let (x, y) = p.pixel();
            if x < 0 || y < 0 || x as usize >= width || y as usize >= height {
                return Err(Error::InvalidAnnotation(format!(
                    "endpoint ({}, {}) outside {width}x{height} image",
                    p.x, p.y
                )));
            }
        }
        Ok(())
    }

    /// Both axes rasterized onto a mask.
    pub fn rasterize(&self, width: usize, height: usize) -> Result<BinaryMask> {
        self.check_bounds(width, height)?;
        let mut mask = BinaryMask::zeros(width, height)?;
        for (p, q) in [self.long_axis, self.short_axis] {
            for (x, y) in bresenham(p.pixel(), q.pixel()) {
                mask.set(x as usize, y as usize, true);
            }
        }
        Ok(mask)
    }
}

/// Integer line from `a` to `b`, both endpoints included.
pub fn bresenham(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (mut x, mut y) = a;
    let dx = (b.0 - a.0).abs();
    let dy = -(b.1 - a.1).abs();
    let sx = if a.0 < b.0 { 1 } else { -1 };
    let sy = if a.1 < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut out = Vec::with_capacity((dx - dy + 1) as usize);
    loop {
        out.push((x, y));
        if x == b.0 && y == b.1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Seed {
    SureForeground,
    SureBackground,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLabels {
    width: usize,
    height: usize,
    labels: Vec<Seed>,
}

impl SeedLabels {
    /// Needs at least one sure-foreground and one sure-background pixel.
    pub fn new(width: usize, height: usize, labels: Vec<Seed>) -> Result<Self> {
        if width * height != labels.len() || labels.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for a {width}x{height} image",
                labels.len()
            )));
        }
        if !labels.contains(&Seed::SureForeground) || !labels.contains(&Seed::SureBackground) {
            return Err(Error::SeedConflict(
                "seeds need at least one sure-foreground and one sure-background pixel".into(),
            ));
        }
        Ok(SeedLabels {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[Seed] {
        &self.labels
    }

    pub fn get(&self, x: usize, y: usize) -> Seed {
        self.labels[y * self.width + x]
    }
}

/// Default background frame: `max(1, 3%)` of the smaller image side.
pub fn default_frame(width: usize, height: usize) -> usize {
    ((0.03 * width.min(height) as f64).round() as usize).max(1)
}

/// Axes (dilated by `band`) become sure foreground, a border frame `frame`
/// pixels wide becomes sure background, the rest is undecided.
pub fn seeds_from_recist(
    annotation: &RecistAnnotation,
    width: usize,
    height: usize,
    band: usize,
    frame: usize,
) -> Result<SeedLabels> {
    if frame == 0 {
        return Err(Error::InvalidArgument("background frame must be >= 1 pixel".into()));
    }
    let mut fg = annotation.rasterize(width, height)?;
    if band > 0 {
        fg = dilate(&fg, &StructuringElement::disk(band)?);
    }
    let in_frame = |x: usize, y: usize| {
        x < frame || y < frame || x + frame >= width || y + frame >= height
    };
    let mut labels = Vec::with_capacity(width * height);
    for y in 0..height {
        for x in 0..width {
            let f = fg.get(x, y);
            let b = in_frame(x, y);
            labels.push(match (f, b) {
                (true, true) => {
                    return Err(Error::SeedConflict(format!(
                        "foreground seed ({x}, {y}) falls in the {frame}-pixel background frame"
                    )))
                }
                (true, false) => Seed::SureForeground,
                (false, true) => Seed::SureBackground,
                (false, false) => Seed::Undecided,
            });
        }
    }
    SeedLabels::new(width, height, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(c: [f64; 8]) -> RecistAnnotation {
        RecistAnnotation::from_coords(c).unwrap()
    }

    #[test]
    fn horizontal_axis_seeds() {
        let a = ann([1.0, 2.0, 3.0, 2.0, 2.0, 2.0, 3.0, 2.0]);
        let s = seeds_from_recist(&a, 5, 5, 0, 1).unwrap();
        let fg: Vec<(usize, usize)> = (0..25)
            .filter(|&i| s.labels()[i] == Seed::SureForeground)
            .map(|i| (i % 5, i / 5))
            .collect();
        assert_eq!(fg, vec![(1, 2), (2, 2), (3, 2)]);
        assert_eq!(s.labels().iter().filter(|&&l| l == Seed::SureBackground).count(), 16);
    }

    #[test]
    fn diagonal_bresenham() {
        assert_eq!(bresenham((0, 0), (2, 2)), vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(bresenham((3, 1), (0, 0)).len(), 4);
        let a = ann([0.0, 0.0, 2.0, 2.0, 0.0, 0.0, 1.0, 1.0]);
        let m = a.rasterize(3, 3).unwrap();
        assert!(m.get(0, 0) && m.get(1, 1) && m.get(2, 2));
    }

    #[test]
    fn axes_touching_border_conflict() {
        let a = ann([0.0, 4.0, 9.0, 4.0, 4.0, 2.0, 4.0, 6.0]);
        assert!(matches!(seeds_from_recist(&a, 10, 10, 0, 1), Err(Error::SeedConflict(_))));
    }

    #[test]
    fn band_dilates_axes() {
        let a = ann([3.0, 5.0, 7.0, 5.0, 5.0, 4.0, 5.0, 6.0]);
        let s = seeds_from_recist(&a, 11, 11, 1, 1).unwrap();
        assert_eq!(s.get(5, 3), Seed::SureForeground);
        assert_eq!(s.get(2, 5), Seed::SureForeground);
        assert_eq!(s.get(2, 4), Seed::Undecided);
    }

    #[test]
    fn invalid_annotations() {
        assert!(RecistAnnotation::from_coords([1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(RecistAnnotation::from_coords([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 3.0]).is_err());
        assert!(RecistAnnotation::from_coords([0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 0.0, 0.5]).is_err());
        let a = ann([1.0, 1.0, 12.0, 1.0, 2.0, 0.0, 2.0, 2.0]);
        assert!(a.rasterize(10, 10).is_err());
        assert_eq!(default_frame(64, 64), 2);
        assert_eq!(default_frame(10, 20), 1);
    }
}
