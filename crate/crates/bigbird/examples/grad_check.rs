//! Validate the hand-derived backward pass with central differences: first on
//! a quadratic (where finite differences are exact), then on one- and
//! two-layer encoders over a block-sparse mask.
//!
//! ```bash
//! cargo run --example grad_check
//! ```

use bigbird::attn::ScoreKind;
use bigbird::encoder::{encoder_grad_check, finite_diff_grad, grad_rel_error, LayerParams};
use bigbird::mat::Mat;
use bigbird::pattern::{build_bigbird, expand_to_tokens, BlockPatternConfig, Mode};
use bigbird::rng::Rng64;

fn main() {
    // Sanity: central differences on ||theta||^2 / 2 recover theta itself.
    let mut rng = Rng64::new(5);
    let theta: Vec<f64> = (0..10).map(|_| rng.range(0.5, 1.5)).collect();
    let coords: Vec<usize> = (0..theta.len()).collect();
    let grad = finite_diff_grad(
        |t| t.iter().map(|v| v * v).sum::<f64>() / 2.0,
        &theta,
        &coords,
        1e-5,
    );
    let worst = grad
        .iter()
        .zip(&theta)
        .map(|(g, t)| grad_rel_error(*t, *g))
        .fold(0.0, f64::max);
    println!("quadratic loss: max rel error of central differences {worst:.3e}");

    // One layer, the acceptance configuration: d=4, m=4, q=8, n=8.
    let cfg = BlockPatternConfig::new(8, 1, 3, 2, 1, Mode::Itc, 5).unwrap();
    let mask = expand_to_tokens(&build_bigbird(&cfg).unwrap(), 1).unwrap();
    let x = Mat::random(8, 4, -1.0, 1.0, &mut rng);
    let layers = vec![LayerParams::random(3, 4, 4, 8, &mut rng)];
    let n_params: usize = layers.iter().map(LayerParams::param_count).sum();
    let err =
        encoder_grad_check(&x, &layers, &mask, ScoreKind::softmax(), 1e-5, n_params, 0).unwrap();
    println!(
        "1-layer encoder (d=4, m=4, q=8, n=8, {n_params} parameters): max rel error {err:.3e}"
    );

    // Two stacked layers: gradients flow through attention twice.
    let layers2 = vec![
        LayerParams::random(2, 4, 3, 6, &mut rng),
        LayerParams::random(2, 4, 3, 6, &mut rng),
    ];
    let err2 =
        encoder_grad_check(&x, &layers2, &mask, ScoreKind::softmax(), 1e-5, 300, 1).unwrap();
    println!("2-layer encoder: max rel error {err2:.3e}");

    // Hardmax has no gradients to check.
    let rejected = encoder_grad_check(&x, &layers, &mask, ScoreKind::Hardmax, 1e-5, 10, 0);
    println!("hardmax scoring rejected: {}", rejected.is_err());
}
