use peanoseg::imaging::{
    error_rate, load_grayscale, load_labels, read_pgm, save_observed, save_segmentation,
    synth_noise, synthetic, GrayImage, ImagingError, LabelImage, ObservedImage,
};
use peanoseg::scan::GridShape;
use proptest::prelude::*;

#[test]
fn ascii_pgm_loads_row_major() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ramp.pgm");
    let body: Vec<String> = (0..16).map(|v| v.to_string()).collect();
    std::fs::write(&path, format!("P2\n4 4\n255\n{}\n", body.join(" "))).unwrap();
    let obs = load_grayscale(&path, false).unwrap();
    assert_eq!(
        obs.values(),
        (0..16).map(f64::from).collect::<Vec<_>>().as_slice()
    );
}

#[test]
fn crop_flag_controls_odd_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wide.pgm");
    let img = GrayImage {
        width: 300,
        height: 300,
        maxval: 255,
        samples: vec![7; 90_000],
    };
    std::fs::write(&path, img.encode()).unwrap();
    assert!(matches!(
        load_grayscale(&path, false),
        Err(ImagingError::BadShape { .. })
    ));
    assert_eq!(load_grayscale(&path, true).unwrap().shape().side(), 256);
    assert!(matches!(
        load_grayscale(dir.path().join("missing.pgm"), false),
        Err(ImagingError::Io(_))
    ));
}

#[test]
fn segmentation_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for classes in 1..=4 {
        let shape = GridShape::new(3).unwrap();
        let labels: Vec<usize> = (0..64).map(|i| 1 + (i * 5 / 3) % classes).collect();
        let img = LabelImage::new(shape, classes, labels).unwrap();
        let path = dir.path().join(format!("seg{classes}.pgm"));
        save_segmentation(&img, &path).unwrap();
        assert_eq!(load_labels(&path, classes).unwrap(), img);
    }
}

#[test]
fn observed_images_round_trip_through_the_level_map() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("obs.pgm");
    let truth = synthetic::nested_squares(4).unwrap();
    let obs = synth_noise(&truth, &[-1.0, 1.0], &[1.0, 1.0], 0).unwrap();
    let map = save_observed(&obs, &path).unwrap();
    let gray = read_pgm(&path).unwrap();
    assert_eq!(gray.maxval, u16::MAX);
    for (a, &level) in obs.values().iter().zip(&gray.samples) {
        assert!((a - map.apply(level)).abs() <= 0.5 * map.scale + 1e-12);
    }
    // loading rescales to [0, 255], an affine image of the observations
    let loaded = load_grayscale(&path, false).unwrap();
    let k = map.scale * u16::MAX as f64 / 255.0;
    for (a, b) in obs.values().iter().zip(loaded.values()) {
        assert!((a - (map.offset + k * b)).abs() <= 0.5 * map.scale + 1e-9);
    }

    let flat = ObservedImage::new(truth.shape(), vec![3.0; 256]).unwrap();
    let map = save_observed(&flat, &path).unwrap();
    assert_eq!((map.offset, map.scale), (3.0, 1.0));
}

#[test]
fn noise_moments_within_three_sigma() {
    // 128 x 128, half of each class
    let shape = GridShape::new(7).unwrap();
    let labels: Vec<usize> = (0..shape.n_pixels()).map(|i| 1 + (i % 2)).collect();
    let truth = LabelImage::new(shape, 2, labels).unwrap();
    let obs = synth_noise(&truth, &[0.0, 1.0], &[1.0, 1.0], 2024).unwrap();
    for class in 1..=2 {
        let ys: Vec<f64> = truth
            .labels()
            .iter()
            .zip(obs.values())
            .filter(|(&l, _)| l == class)
            .map(|(_, &y)| y)
            .collect();
        let n = ys.len() as f64;
        let mean = ys.iter().sum::<f64>() / n;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(
            (mean - (class - 1) as f64).abs() < 3.0 / n.sqrt(),
            "mean {mean}"
        );
        // Var of the sample variance of a normal is 2 s^4 / (n - 1)
        assert!(
            (var - 1.0).abs() < 3.0 * (2.0 / (n - 1.0)).sqrt(),
            "var {var}"
        );
    }
}

#[test]
fn error_rate_examples() {
    let shape = GridShape::new(2).unwrap();
    let truth = LabelImage::new(shape, 2, [vec![1; 8], vec![2; 8]].concat()).unwrap();
    let mut pred = truth.labels().to_vec();
    for i in [3, 8, 12] {
        pred[i] = 3 - pred[i];
    }
    let pred = LabelImage::new(shape, 2, pred).unwrap();
    assert_eq!(error_rate(&truth, &pred).unwrap(), 0.1875);
    let swapped =
        LabelImage::new(shape, 2, truth.labels().iter().map(|l| 3 - l).collect()).unwrap();
    assert_eq!(error_rate(&truth, &swapped).unwrap(), 0.0);
}

fn brute_error(truth: &[usize], pred: &[usize], k: usize) -> f64 {
    // every map from predicted labels to truth labels that is a bijection
    let mut best = usize::MAX;
    let mut perm: Vec<usize> = (0..k).collect();
    fn heap(n: usize, perm: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if n <= 1 {
            f(perm);
            return;
        }
        for i in 0..n {
            heap(n - 1, perm, f);
            let j = if n % 2 == 0 { i } else { 0 };
            perm.swap(j, n - 1);
        }
    }
    heap(k, &mut perm, &mut |p| {
        let miss = truth
            .iter()
            .zip(pred)
            .filter(|(&t, &q)| p[q - 1] != t - 1)
            .count();
        best = best.min(miss);
    });
    best as f64 / truth.len() as f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn error_rate_matches_brute_force(
        k in 1usize..=4,
        seed in proptest::collection::vec(0usize..1000, 16),
        noise in proptest::collection::vec(0usize..1000, 16),
    ) {
        let shape = GridShape::new(2).unwrap();
        let t: Vec<usize> = seed.iter().map(|s| 1 + s % k).collect();
        let p: Vec<usize> = noise.iter().map(|s| 1 + s % k).collect();
        let truth = LabelImage::new(shape, k, t.clone()).unwrap();
        let pred = LabelImage::new(shape, k, p.clone()).unwrap();
        let e = error_rate(&truth, &pred).unwrap();
        prop_assert!((0.0..=1.0).contains(&e));
        prop_assert_eq!(e, brute_error(&t, &p, k));
        prop_assert_eq!(error_rate(&truth, &truth).unwrap(), 0.0);
        // relabeling the prediction never changes the score
        let rotated: Vec<usize> = p.iter().map(|l| 1 + l % k).collect();
        let rotated = LabelImage::new(shape, k, rotated).unwrap();
        prop_assert_eq!(error_rate(&truth, &rotated).unwrap(), e);
    }

    #[test]
    fn pgm_round_trip(width in 1usize..20, height in 1usize..20, wide in any::<bool>(), fill in any::<u16>()) {
        let maxval = if wide { 1000 } else { 255 };
        let samples = (0..width * height).map(|i| ((i as u16).wrapping_mul(31).wrapping_add(fill)) % (maxval + 1)).collect();
        let img = GrayImage { width, height, maxval, samples };
        prop_assert_eq!(&GrayImage::decode(&img.encode()).unwrap(), &img);
        prop_assert_eq!(&GrayImage::decode(img.encode_ascii().as_bytes()).unwrap(), &img);
    }
}
