use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use specpath::data_io::model_io::{from_json, to_json};
use specpath::{fit, load_model, save_model, FitConfig, Matrix};
use tempfile::TempDir;

fn random_problem(seed: u64, n: usize, d: usize) -> (Matrix, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect()).unwrap();
    let y = (0..n)
        .map(|i| {
            let r = x.row(i);
            r[0].sin() + 0.3 * r[d - 1] * r[0] + 0.05 * rng.random_range(-1.0..1.0)
        })
        .collect();
    (x, y)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn saved_models_predict_identically(seed in 0u64..1000, d in 1usize..4) {
        let (x, y) = random_problem(seed, 120, d);
        let (xt, yt) = (x.select_rows(&(0..80).collect::<Vec<_>>()), y[..80].to_vec());
        let (xv, yv) = (x.select_rows(&(80..120).collect::<Vec<_>>()), y[80..].to_vec());
        let config = FitConfig { max_paths: 24, ..FitConfig::default() };
        let model = fit(&xt, &yt, &xv, &yv, &config).unwrap();

        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.json");
        save_model(&model, &path).unwrap();
        let loaded = load_model(&path).unwrap();
        prop_assert_eq!(&loaded.paths, &model.paths);
        prop_assert_eq!(loaded.predict_raw(&x).unwrap(), model.predict_raw(&x).unwrap());
        prop_assert_eq!(to_json(&loaded).unwrap(), to_json(&model).unwrap());
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let (x, y) = random_problem(1, 60, 2);
    let idx: Vec<usize> = (0..40).collect();
    let val: Vec<usize> = (40..60).collect();
    let model = fit(&x.select_rows(&idx), &y[..40], &x.select_rows(&val), &y[40..], &FitConfig::default()).unwrap();
    let text = to_json(&model).unwrap();
    let tampered = text.replacen('{', "{\n  \"extra\": 1,", 1);
    assert!(matches!(from_json(&tampered), Err(specpath::Error::Schema(_))));
}
