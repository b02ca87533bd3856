use holograph::field::{detect, diff_msg, intensity, propagate, ComplexField, DetectorLayout, GridSpec, PhaseMask};
use holograph::network::{
    build_setup, forward, load_checkpoint, predict, save_checkpoint, Network, NetworkConfig, OptimizerMoments,
    SkipChannel, SkipSetup,
};
use holograph::{Complex64, Error};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid(n: usize) -> GridSpec {
    GridSpec::new(n, 36e-6, 532e-9, 0.2794).unwrap()
}

fn flat_config(n: usize, layers: usize, skips: Vec<SkipChannel>) -> NetworkConfig {
    let g = grid(n);
    NetworkConfig::new(
        g,
        vec![PhaseMask::zeros(g); layers],
        skips,
        DetectorLayout::uniform(n, 2, 4).unwrap(),
    )
    .unwrap()
}

fn random_config(n: usize, layers: usize, skips: Vec<SkipChannel>, seed: u64) -> NetworkConfig {
    let g = grid(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    NetworkConfig::new(
        g,
        (0..layers).map(|_| PhaseMask::random(g, &mut rng)).collect(),
        skips,
        DetectorLayout::uniform(n, 4, 4).unwrap(),
    )
    .unwrap()
}

#[test]
fn single_identity_layer_is_one_propagation() {
    let cfg = flat_config(32, 1, vec![]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = ComplexField::random_unit(cfg.grid, &mut rng);
    let pass = forward(&cfg, &f).unwrap();
    let expected = intensity(&propagate(&f, cfg.grid.layer_distance).unwrap());
    for (a, b) in pass.intensity.values.iter().zip(&expected.values) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn skip_free_forward_is_left_fold_of_diff_msg() {
    let cfg = random_config(24, 4, vec![], 2);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = ComplexField::random_unit(cfg.grid, &mut rng);
    let pass = forward(&cfg, &f).unwrap();
    let folded = cfg
        .masks
        .iter()
        .try_fold(f.clone(), |acc, m| diff_msg(&acc, m, cfg.grid.layer_distance))
        .unwrap();
    assert!(pass.output().max_abs_diff(&folded) <= 1e-12);
    assert_eq!(pass.taps.len(), 5);
}

#[test]
fn identity_masks_with_skip_match_two_term_oracle() {
    let cfg = flat_config(64, 6, vec![SkipChannel { from: 0, to: 4 }]);
    let z = cfg.grid.layer_distance;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = ComplexField::random_unit(cfg.grid, &mut rng);
    let pass = forward(&cfg, &f).unwrap();
    let a = propagate(&f, 6.0 * z).unwrap();
    let b = propagate(&f, 7.0 * z).unwrap();
    let oracle: Vec<Complex64> = a.values().iter().zip(b.values()).map(|(x, y)| (x + y) / 2.0).collect();
    let oracle = ComplexField::from_values(cfg.grid, oracle).unwrap();
    assert!(pass.output().max_abs_diff(&oracle) <= 1e-10);
}

#[test]
fn default_topology_does_not_create_energy() {
    let skips = build_setup(&SkipSetup::Numbered(2)).unwrap();
    let cfg = random_config(48, 6, skips, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let f = ComplexField::random_unit(cfg.grid, &mut rng);
        let pass = forward(&cfg, &f).unwrap();
        assert!(pass.intensity.total() <= f.energy() * (1.0 + 1e-12));
    }
}

#[test]
fn identity_masks_make_forward_linear() {
    let cfg = flat_config(
        32,
        3,
        vec![SkipChannel { from: 0, to: 2 }, SkipChannel { from: 1, to: 3 }],
    );
    let net = Network::new(cfg.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let f = ComplexField::random_unit(cfg.grid, &mut rng);
    let g = ComplexField::random_unit(cfg.grid, &mut rng);
    let (a, b) = (Complex64::new(0.3, -0.8), Complex64::new(-0.5, 0.1));
    let combo: Vec<Complex64> = f.values().iter().zip(g.values()).map(|(x, y)| a * x + b * y).collect();
    let lhs = net
        .forward(&ComplexField::from_values(cfg.grid, combo).unwrap())
        .unwrap();
    let of = net.forward(&f).unwrap();
    let og = net.forward(&g).unwrap();
    let rhs: Vec<Complex64> = of
        .output()
        .values()
        .iter()
        .zip(og.output().values())
        .map(|(x, y)| a * x + b * y)
        .collect();
    let rhs = ComplexField::from_values(cfg.grid, rhs).unwrap();
    assert!(lhs.output().max_abs_diff(&rhs) <= 1e-10);
}

#[test]
fn forward_rejects_foreign_grid() {
    let cfg = flat_config(16, 2, vec![]);
    let other = ComplexField::zeros(grid(8));
    assert!(matches!(forward(&cfg, &other), Err(Error::InvalidArgument(_))));
}

#[test]
fn predict_reads_the_brightest_region() {
    // Zero distance and identity masks pass the input straight to the detector.
    let g = GridSpec::new(40, 36e-6, 532e-9, 1e-30).unwrap();
    let layout = DetectorLayout::uniform(40, 4, 6).unwrap();
    let cfg = NetworkConfig::new(g, vec![PhaseMask::zeros(g)], vec![], layout.clone()).unwrap();
    let mut f = ComplexField::zeros(g);
    let r = layout.regions()[2];
    for row in r.row0..r.row0 + r.height {
        for col in r.col0..r.col0 + r.width {
            f.set(row, col, Complex64::new(1.0, 0.0));
        }
    }
    assert_eq!(predict(&cfg, &f).unwrap(), 2);
}

#[test]
fn predict_agrees_with_brute_force_readout() {
    let cfg = random_config(32, 3, vec![SkipChannel { from: 0, to: 3 }], 8);
    let net = Network::new(cfg.clone()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..10 {
        let f = ComplexField::random_unit(cfg.grid, &mut rng);
        let pass = net.forward(&f).unwrap();
        let n = cfg.grid.n;
        let mut sums = vec![0.0; cfg.num_classes()];
        for row in 0..n {
            for col in 0..n {
                for (c, reg) in cfg.detector.regions().iter().enumerate() {
                    if reg.contains(row, col) {
                        sums[c] += pass.intensity.get(row, col);
                    }
                }
            }
        }
        let mut best = 0;
        for c in 1..sums.len() {
            if sums[c] > sums[best] {
                best = c;
            }
        }
        assert_eq!(net.predict(&f).unwrap(), best);
        assert_eq!(detect(&pass.intensity, &cfg.detector).unwrap().len(), 4);
    }
}

#[test]
fn checkpoint_roundtrip_is_bit_exact() {
    let skips = build_setup(&SkipSetup::Numbered(6)).unwrap();
    let cfg = random_config(20, 6, skips, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let moments = OptimizerMoments {
        first: (0..6)
            .map(|_| (0..400).map(|_| rng.random::<f64>() - 0.5).collect())
            .collect(),
        second: (0..6)
            .map(|_| (0..400).map(|_| rng.random::<f64>()).collect())
            .collect(),
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.hgr");
    save_checkpoint(&cfg, Some(&moments), &path).unwrap();
    let back = load_checkpoint(&path).unwrap();
    assert_eq!(back.config.skips, cfg.skips);
    assert_eq!(back.config.detector, cfg.detector);
    assert_eq!(back.config.grid, cfg.grid);
    for (a, b) in back.config.masks.iter().zip(&cfg.masks) {
        let bits_a: Vec<u64> = a.theta().iter().map(|t| t.to_bits()).collect();
        let bits_b: Vec<u64> = b.theta().iter().map(|t| t.to_bits()).collect();
        assert_eq!(bits_a, bits_b);
    }
    assert_eq!(back.moments.as_ref(), Some(&moments));

    save_checkpoint(&cfg, None, &path).unwrap();
    assert!(load_checkpoint(&path).unwrap().moments.is_none());
}

#[test]
fn wrong_magic_is_a_format_error() {
    let cfg = flat_config(8, 1, vec![]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.hgr");
    save_checkpoint(&cfg, None, &path).unwrap();
    let mut bytes = std::fs::read(&path).unwrap();
    bytes[0] = b'X';
    std::fs::write(&path, &bytes).unwrap();
    match load_checkpoint(&path) {
        Err(Error::Format { offset, message }) => {
            assert_eq!(offset, 0);
            assert!(message.contains("magic"));
        }
        other => panic!("expected format error, got {other:?}"),
    }
}

#[test]
fn truncated_file_names_the_missing_section() {
    let cfg = random_config(8, 2, vec![SkipChannel { from: 0, to: 2 }], 12);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("net.hgr");
    save_checkpoint(&cfg, None, &path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    let cases = [
        (10, "header"),
        (22, "skip channels"),
        (40, "grid parameters"),
        (80, "detector layout"),
        (200, "phase mask 1"),
        (bytes.len() - 1, "optimizer flag"),
    ];
    for (cut, section) in cases {
        std::fs::write(&path, &bytes[..cut]).unwrap();
        match load_checkpoint(&path) {
            Err(Error::Format { message, offset }) => {
                assert!(message.contains(section), "cut {cut}: {message}");
                assert!(offset as usize <= cut);
            }
            other => panic!("cut {cut}: expected format error, got {other:?}"),
        }
    }
}
