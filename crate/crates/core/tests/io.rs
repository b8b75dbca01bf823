use std::path::Path;

use coupled_transform::codec::{decode_matrix, decode_model, encode_matrix, encode_model};
use coupled_transform::config::{DatasetManifest, Split, TrainConfig};
use coupled_transform::io::{format_csv, load_matrix, load_model, parse_csv, save_matrix, save_matrix_as, save_model, MatrixFormat};
use coupled_transform::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO,
        -1e3f64..1e3,
    ]
}

fn matrix() -> impl Strategy<Value = DMatrix<f64>> {
    (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
        prop::collection::vec(finite(), r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
    })
}

fn model(kind: ModelKind, depth: usize, d: usize, seed: u64) -> DeepTransformer<f64> {
    let mut k = seed as f64;
    let mut next = move || {
        k += 1.0;
        (k * 0.618_033_988_75).fract() - 0.5
    };
    let mut layer = |tau: Option<usize>| TransformLayer {
        t: DMatrix::from_fn(d, d, |i, j| if i == j { 2.0 } else { next() }),
        params: RegularizationParams::new(0.25, 1.5, 3.0).unwrap(),
        budget: tau.map_or(SparsityBudget::dense(), |t| SparsityBudget::sparse(t).unwrap()),
    };
    let l1: Vec<_> = (0..depth).map(|i| layer((i % 2 == 0).then_some(1))).collect();
    let l2: Vec<_> = (0..depth).map(|_| layer(None)).collect();
    let m = MappingMatrix::new(DMatrix::from_fn(d, d, |i, j| (i * d + j) as f64 / 7.0 + 0.5)).unwrap();
    let m21 = (kind == ModelKind::Symmetric).then(|| MappingMatrix::identity(d));
    DeepTransformer::from_parts(kind, l1, l2, m, m21).unwrap()
}

fn origin() -> &'static Path {
    Path::new("mem")
}

proptest! {
    #[test]
    fn csv_round_trip_is_bitwise(m in matrix()) {
        let back: DMatrix<f64> = parse_csv(format_csv(&m).as_bytes(), origin()).unwrap();
        prop_assert_eq!(back.shape(), m.shape());
        for (a, b) in back.iter().zip(m.iter()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn binary_round_trip_is_bitwise(m in matrix()) {
        let back: DMatrix<f64> = decode_matrix(&encode_matrix(&m), origin()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn model_round_trip_is_exact(depth in 1usize..4, d in 1usize..5, seed in 0u64..100, sym in any::<bool>()) {
        let kind = if sym { ModelKind::Symmetric } else { ModelKind::Semi };
        let m = model(kind, depth, d, seed);
        let bytes = encode_model(&m);
        let back: DeepTransformer<f64> = decode_model(&bytes, origin()).unwrap();
        prop_assert_eq!(encode_model(&back), bytes);
        prop_assert_eq!(back, m);
    }

    #[test]
    fn every_truncation_is_reported(cut_frac in 0.0f64..1.0) {
        let bytes = encode_model(&model(ModelKind::Symmetric, 2, 3, 1));
        let cut = (bytes.len() as f64 * cut_frac) as usize;
        prop_assert!(decode_model::<f64>(&bytes[..cut], origin()).is_err());
    }
}

#[test]
fn files_round_trip_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let m = FeatureMatrix::new(DMatrix::from_fn(7, 13, |i, j| (i as f64 - 3.3) * (j as f64 + 0.1).sqrt())).unwrap();
    for name in ["m.csv", "m.bin", "m.CSV"] {
        let path = dir.path().join(name);
        save_matrix(&path, &m).unwrap();
        assert_eq!(load_matrix::<f64>(&path).unwrap(), m);
    }
    assert_eq!(MatrixFormat::from_path(Path::new("x.CSV")), MatrixFormat::Csv);
    // A binary file is recognised by content, whatever its name.
    let path = dir.path().join("odd.csv");
    save_matrix_as(&path, &m, MatrixFormat::Binary).unwrap();
    assert_eq!(load_matrix::<f64>(&path).unwrap(), m);

    let mpath = dir.path().join("model.cdtl");
    let md = model(ModelKind::Semi, 2, 4, 9);
    save_model(&mpath, &md).unwrap();
    assert_eq!(load_model::<f64>(&mpath).unwrap(), md);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
}

#[test]
fn corrupt_containers_get_distinct_errors() {
    let good = encode_matrix(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));

    let mut bad_magic = good.clone();
    bad_magic[0] = b'X';
    assert!(matches!(decode_matrix::<f64>(&bad_magic, origin()), Err(Error::Header { .. })));

    let mut bad_version = good.clone();
    bad_version[8] = 9;
    assert!(matches!(decode_matrix::<f64>(&bad_version, origin()), Err(Error::Header { .. })));

    let mut overflow = good[..9].to_vec();
    overflow.extend_from_slice(&u64::MAX.to_le_bytes());
    overflow.extend_from_slice(&3u64.to_le_bytes());
    assert!(matches!(
        decode_matrix::<f64>(&overflow, origin()),
        Err(Error::DimensionOverflow { .. })
    ));

    let mut nan = good.clone();
    let at = 9 + 16 + 8;
    nan[at..at + 8].copy_from_slice(&f64::NAN.to_le_bytes());
    assert!(matches!(
        decode_matrix::<f64>(&nan, origin()),
        Err(Error::NonFiniteValue { row: 1, col: 2, .. })
    ));

    assert!(matches!(decode_matrix::<f64>(&good[..good.len() - 3], origin()), Err(Error::Truncated { .. })));

    let mut trailing = good.clone();
    trailing.push(0);
    assert!(matches!(decode_matrix::<f64>(&trailing, origin()), Err(Error::Header { .. })));

    // A matrix file is not a model file.
    assert!(matches!(decode_model::<f64>(&good, origin()), Err(Error::Header { .. })));
}

#[test]
fn single_precision_loads_from_the_same_files() {
    let m = DMatrix::from_row_slice(2, 3, &[0.5, -1.25, 3.0, 4.0, 1e-3, 7.0]);
    let back: DMatrix<f32> = parse_csv(format_csv(&m).as_bytes(), origin()).unwrap();
    assert_eq!(back, m.map(|v| v as f32));
}

#[test]
fn manifests_resolve_relative_to_their_directory() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("data");
    std::fs::create_dir(&sub).unwrap();
    std::fs::write(sub.join("a.csv"), "1,2\n3,4\n5,6\n").unwrap();
    std::fs::write(sub.join("b.csv"), "1,0\n0,1\n1,1\n").unwrap();
    std::fs::write(sub.join("labels.txt"), "p\nq\np\n").unwrap();
    let mpath = sub.join("train.toml");
    std::fs::write(&mpath, DatasetManifest::render(Split::Train, Some("a.csv"), Some("b.csv"), Some("labels.txt")))
        .unwrap();
    let m = DatasetManifest::load(&mpath).unwrap();
    assert_eq!(m.split, Split::Train);
    let data = m.load_data::<f64>().unwrap();
    assert_eq!(data.x1.unwrap().count(), 3);
    assert_eq!(data.labels.unwrap(), ["p", "q", "p"]);

    std::fs::write(sub.join("c.csv"), "1,2,3\n4,5,6\n7,8,9\n").unwrap();
    std::fs::write(&mpath, DatasetManifest::render(Split::Train, Some("a.csv"), Some("c.csv"), None)).unwrap();
    assert!(matches!(
        DatasetManifest::load(&mpath).unwrap().load_data::<f64>(),
        Err(Error::Manifest { .. })
    ));
    std::fs::write(&mpath, "split = \"train\"\nlabels = \"labels.txt\"\n").unwrap();
    assert!(matches!(DatasetManifest::load(&mpath), Err(Error::Manifest { .. })));
    std::fs::write(&mpath, "split = \"holdout\"\ndomain1 = \"a.csv\"\n").unwrap();
    assert!(matches!(DatasetManifest::load(&mpath), Err(Error::Manifest { .. })));
}

#[test]
fn config_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("train.toml");
    let text = "kind = \"symmetric\"\ndepth = 3\nlambda = 0.2\n[layer.2]\ntau = 3\niters = 7\n";
    std::fs::write(&path, text).unwrap();
    let cfg = TrainConfig::load(&path).unwrap();
    assert_eq!(cfg.layers[1].tau, Some(3));
    assert_eq!(cfg.layers[1].iters, 7);
    assert_eq!(cfg.layers[2].lambda, 0.2);
    assert_eq!(TrainConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    let schedule = cfg.schedule::<f32>().unwrap();
    assert_eq!(schedule.depth(), 3);
}

#[test]
fn synthetic_noise_is_relative_to_signal() {
    let base = SyntheticSpec {
        dim: 10,
        subjects: 50,
        samples_per_subject: 4,
        noise: 0.0,
        cond_bound: 20.0,
        seed: 3,
    };
    let clean = gen_synthetic_coupled::<f64>(&base).unwrap();
    let noisy = gen_synthetic_coupled::<f64>(&SyntheticSpec { noise: 0.1, ..base }).unwrap();
    assert_eq!(clean.truth, noisy.truth);
    for (c, n) in [(&clean.x1, &noisy.x1), (&clean.x2, &noisy.x2)] {
        let ratio = (n.as_matrix() - c.as_matrix()).norm() / c.as_matrix().norm();
        assert!((0.08..0.12).contains(&ratio), "{ratio}");
    }
    assert_eq!(clean.labels.len(), 200);
    assert_eq!(clean.columns_for_samples(&[1, 3]).len(), 100);
    assert!(gen_synthetic_coupled::<f64>(&SyntheticSpec { cond_bound: 0.5, ..base }).is_err());
    assert!(gen_synthetic_coupled::<f64>(&SyntheticSpec { subjects: 0, ..base }).is_err());
}
