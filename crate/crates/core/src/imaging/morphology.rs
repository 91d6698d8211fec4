use serde::{Deserialize, Serialize};

use super::BinaryMask;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeShape {
    #[default]
    Disk,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphOp {
    Erode,
    Dilate,
}

/// Symmetric structuring element centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StructuringElement {
    shape: SeShape,
    radius: usize,
}

impl StructuringElement {
    pub fn new(shape: SeShape, radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::InvalidArgument("structuring element radius must be >= 1".into()));
        }
        Ok(Self { shape, radius })
    }

    pub fn disk(radius: usize) -> Result<Self> {
        Self::new(SeShape::Disk, radius)
    }

    pub fn square(radius: usize) -> Result<Self> {
        Self::new(SeShape::Square, radius)
    }

    pub fn shape(&self) -> SeShape {
        self.shape
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Offsets `(dx, dy)` covered by the element, origin included.
    pub fn offsets(&self) -> Vec<(isize, isize)> {
        let r = self.radius as isize;
        let mut out = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let inside = match self.shape {
                    SeShape::Square => true,
                    SeShape::Disk => dx * dx + dy * dy <= r * r,
                };
                if inside {
                    out.push((dx, dy));
                }
            }
        }
        out
    }
}

pub fn morphology(mask: &BinaryMask, op: MorphOp, se: &StructuringElement) -> BinaryMask {
    match op {
        MorphOp::Erode => erode(mask, se),
        MorphOp::Dilate => dilate(mask, se),
    }
}

/// A pixel survives when every element offset lands on a foreground pixel.
/// Pixels outside the image count as background, so anything within the
/// radius of the border is eroded away.
pub fn erode(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    sweep(mask, se, true)
}

pub fn dilate(mask: &BinaryMask, se: &StructuringElement) -> BinaryMask {
    sweep(mask, se, false)
}

fn sweep(mask: &BinaryMask, se: &StructuringElement, all: bool) -> BinaryMask {
    let (w, h) = mask.dims();
    let offsets = se.offsets();
    let src = mask.data();
    let probe = |x: usize, y: usize, dx: isize, dy: isize| -> bool {
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        nx >= 0 && ny >= 0 && (nx as usize) < w && (ny as usize) < h && src[ny as usize * w + nx as usize]
    };
    let mut data = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            data[y * w + x] = if all {
                src[y * w + x] && offsets.iter().all(|&(dx, dy)| probe(x, y, dx, dy))
            } else {
                src[y * w + x] || offsets.iter().any(|&(dx, dy)| probe(x, y, dx, dy))
            };
        }
    }
    BinaryMask::new(w, h, data).expect("same dimensions as input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask(w: usize, h: usize, bits: &[u8]) -> BinaryMask {
        BinaryMask::from_u8(w, h, bits).unwrap()
    }

    #[test]
    fn empty_mask_is_fixed_point() {
        let m = BinaryMask::zeros(5, 4).unwrap();
        for se in [StructuringElement::disk(2).unwrap(), StructuringElement::square(1).unwrap()] {
            assert_eq!(erode(&m, &se), m);
            assert_eq!(dilate(&m, &se), m);
        }
    }

    #[test]
    fn dilate_single_pixel_square() {
        let m = mask(3, 3, &[0, 0, 0, 0, 1, 0, 0, 0, 0]);
        let se = StructuringElement::square(1).unwrap();
        assert_eq!(dilate(&m, &se), BinaryMask::ones(3, 3).unwrap());
    }

    #[test]
    fn erode_full_square_leaves_center() {
        let m = BinaryMask::ones(3, 3).unwrap();
        let se = StructuringElement::square(1).unwrap();
        assert_eq!(erode(&m, &se).to_u8(), vec![0, 0, 0, 0, 1, 0, 0, 0, 0]);
    }

    #[test]
    fn disk_offsets() {
        assert_eq!(StructuringElement::disk(1).unwrap().offsets().len(), 5);
        assert_eq!(StructuringElement::disk(2).unwrap().offsets().len(), 13);
        assert_eq!(StructuringElement::square(2).unwrap().offsets().len(), 25);
        assert!(StructuringElement::disk(0).is_err());
    }

    fn arb_mask() -> impl Strategy<Value = BinaryMask> {
        (1usize..9, 1usize..9).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<bool>(), w * h)
                .prop_map(move |d| BinaryMask::new(w, h, d).unwrap())
        })
    }

    fn arb_se() -> impl Strategy<Value = StructuringElement> {
        (prop_oneof![Just(SeShape::Disk), Just(SeShape::Square)], 1usize..4)
            .prop_map(|(s, r)| StructuringElement::new(s, r).unwrap())
    }

    proptest! {
        #[test]
        fn erode_dilate_bracket_mask(m in arb_mask(), se in arb_se()) {
            prop_assert!(erode(&m, &se).is_subset_of(&m));
            prop_assert!(m.is_subset_of(&dilate(&m, &se)));
        }

        // Duality holds on the padded domain; with outside-is-background the
        // complement's dilation sees background beyond the border too, so the
        // identity is checked on a mask embedded with a clear margin.
        #[test]
        fn duality_on_padded_domain(m in arb_mask(), se in arb_se()) {
            let r = se.radius();
            let (w, h) = m.dims();
            let (pw, ph) = (w + 4 * r, h + 4 * r);
            let mut padded = BinaryMask::zeros(pw, ph).unwrap();
            for y in 0..h { for x in 0..w { padded.set(x + 2 * r, y + 2 * r, m.get(x, y)); } }
            let lhs = erode(&padded, &se);
            let rhs = dilate(&padded.complement(), &se).complement();
            for y in r..ph - r { for x in r..pw - r {
                prop_assert_eq!(lhs.get(x, y), rhs.get(x, y));
            } }
        }

        #[test]
        fn monotone(m in arb_mask(), extra in proptest::collection::vec(any::<bool>(), 81), se in arb_se()) {
            let bigger = BinaryMask::new(m.width(), m.height(),
                m.data().iter().zip(extra.iter().cycle()).map(|(&a, &b)| a || b).collect()).unwrap();
            prop_assert!(dilate(&m, &se).is_subset_of(&dilate(&bigger, &se)));
            prop_assert!(erode(&m, &se).is_subset_of(&erode(&bigger, &se)));
        }
    }
}
