use pointcast::forecast::{ForecastModel, TrainConfig};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn main() {
    let config = TrainConfig {
        window: 8, hidden: 4, key_dim: 4, attention_levels: 2,
        kernel_sizes: vec![3, 5], learning_rate: 0.01, epochs: 1,
        batch_size: 1, seed: 3, sgd_momentum: 0.0,
    };
    let model = ForecastModel::init(&config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3 + 4000);
    let window: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    let target: f64 = rng.random_range(-1.0..1.0);
    let report = pointcast::forecast::gradient_check(&model, &window, target).unwrap();
    println!("report: {report:?}");
    println!("window: {window:?}");
    // inspect trend preactivations
    use pointcast::decompose::decompose;
    let out = decompose(&window, &[3,5], &model.decompose_logits).unwrap();
    let (z, st) = pointcast::forecast::revin_norm(&out.trend, &model.revin);
    println!("normalized z: {z:?}");
    println!("state: {st:?}");
    let h = model.mlp.hidden_len();
    for i in 0..h {
        let a1: f64 = model.mlp.b1[i] + model.mlp.w1[i].iter().zip(&z).map(|(w,v)| w*v).sum::<f64>();
        println!("a1[{i}] = {a1:.10}");
    }
}
