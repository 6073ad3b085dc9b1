//! Two-class truth images that mix large homogeneous areas with thin
//! structures one or two pixels wide.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::LabelImage;
use crate::scan::{GridShape, ScanError};

/// Names accepted by [`by_name`].
pub const SUITE: [&str; 3] = ["stripes", "squares", "blobs"];

fn render(order: u32, f: impl Fn(usize, usize, usize) -> bool) -> Result<LabelImage, ScanError> {
    let shape = GridShape::new(order)?;
    let side = shape.side();
    let labels = (0..side * side)
        .map(|i| 1 + f(i / side, i % side, side) as usize)
        .collect();
    Ok(LabelImage::new(shape, 2, labels).expect("labels are 1 or 2"))
}

/// Left half: vertical stripes whose widths cycle through 1, 2, 3 and 5
/// pixels. Right half: two large blocks crossed by a one-pixel line.
pub fn stripes_and_blocks(order: u32) -> Result<LabelImage, ScanError> {
    const WIDTHS: [usize; 4] = [1, 2, 3, 5];
    render(order, |r, c, side| {
        let half = side / 2;
        if c < half {
            let mut x = 0;
            let mut k = 0;
            loop {
                let w = WIDTHS[(k / 2) % WIDTHS.len()];
                if c < x + w {
                    return k % 2 == 1;
                }
                x += w;
                k += 1;
            }
        } else if r == side / 2 {
            true
        } else if r < side / 4 || (r > side / 2 && r < 3 * side / 4) {
            c >= half + side / 8 && c < side - side / 16
        } else {
            false
        }
    })
}

/// Concentric square rings centered on the image; ring widths repeat
/// `8, 1, 4, 1, 2` pixels from the border inward.
pub fn nested_squares(order: u32) -> Result<LabelImage, ScanError> {
    const WIDTHS: [usize; 5] = [8, 1, 4, 1, 2];
    render(order, |r, c, side| {
        let d = r.min(c).min(side - 1 - r).min(side - 1 - c);
        let mut x = 0;
        let mut k = 0;
        loop {
            let w = WIDTHS[k % WIDTHS.len()];
            if d < x + w {
                return k % 2 == 1;
            }
            x += w;
            k += 1;
        }
    })
}

/// Blobs grown by thick random walks, plus thin one-pixel trails.
pub fn random_walk(order: u32, seed: u64) -> Result<LabelImage, ScanError> {
    let shape = GridShape::new(order)?;
    let side = shape.side() as i64;
    let mut mask = vec![false; (side * side) as usize];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walk = |rng: &mut ChaCha8Rng, steps: usize, radius: i64| {
        let (mut r, mut c) = (rng.random_range(0..side), rng.random_range(0..side));
        for _ in 0..steps {
            for dr in -radius..=radius {
                for dc in -radius..=radius {
                    let (rr, cc) = (r + dr, c + dc);
                    if (0..side).contains(&rr) && (0..side).contains(&cc) {
                        mask[(rr * side + cc) as usize] = true;
                    }
                }
            }
            match rng.random_range(0..4) {
                0 => r = (r + 1).min(side - 1),
                1 => r = (r - 1).max(0),
                2 => c = (c + 1).min(side - 1),
                _ => c = (c - 1).max(0),
            }
        }
    };
    let scale = (side * side) as usize / 256;
    for _ in 0..4 {
        walk(&mut rng, 4 * scale, (side / 16).max(1));
    }
    for _ in 0..12 {
        walk(&mut rng, 2 * scale, 0);
    }
    let labels = mask.into_iter().map(|m| 1 + m as usize).collect();
    Ok(LabelImage::new(shape, 2, labels).expect("labels are 1 or 2"))
}

/// Suite image by name (see [`SUITE`]); `blobs` uses `seed`.
pub fn by_name(name: &str, order: u32, seed: u64) -> Option<Result<LabelImage, ScanError>> {
    Some(match name {
        "stripes" => stripes_and_blocks(order),
        "squares" => nested_squares(order),
        "blobs" => random_walk(order, seed),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fraction(img: &LabelImage) -> f64 {
        img.labels().iter().filter(|&&l| l == 2).count() as f64 / img.labels().len() as f64
    }

    fn thin_pixels(img: &LabelImage) -> usize {
        // pixels whose left and right neighbors (or up and down) both differ
        let side = img.shape().side();
        let l = img.labels();
        let mut n = 0;
        for r in 1..side - 1 {
            for c in 1..side - 1 {
                let v = l[r * side + c];
                if (l[r * side + c - 1] != v && l[r * side + c + 1] != v)
                    || (l[(r - 1) * side + c] != v && l[(r + 1) * side + c] != v)
                {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn suite_mixes_areas_and_details() {
        for name in SUITE {
            let img = by_name(name, 7, 3).unwrap().unwrap();
            assert_eq!(img.shape().side(), 128);
            let f = fraction(&img);
            assert!((0.15..0.85).contains(&f), "{name}: {f}");
            assert!(thin_pixels(&img) > 100, "{name}: {}", thin_pixels(&img));
        }
        assert!(by_name("zebra", 7, 0).is_none());
    }

    #[test]
    fn deterministic_blobs() {
        assert_eq!(random_walk(6, 5).unwrap(), random_walk(6, 5).unwrap());
        assert_ne!(random_walk(6, 5).unwrap(), random_walk(6, 6).unwrap());
    }
}
