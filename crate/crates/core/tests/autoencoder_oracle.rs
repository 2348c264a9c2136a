use gwshm_core::autoencoder::{
    build_model, reconstruction_mse, train, Activation, Architecture, DenseAutoencoder, LayerSpec, TrainConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn fixture(pass_through: bool) -> Architecture {
    let mut layers = vec![LayerSpec::dense(8, Activation::Relu)];
    if pass_through {
        layers.push(LayerSpec::pass_through(8, Activation::Relu));
    }
    layers.push(LayerSpec::dense(4, Activation::Linear));
    Architecture { input_width: 4, layers }
}

fn batch(rng: &mut ChaCha8Rng, n: usize, width: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..width).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

fn loss(model: &DenseAutoencoder, samples: &[Vec<f64>]) -> f64 {
    samples.iter().map(|x| model.reconstruction_error(x).unwrap()).sum::<f64>() / samples.len() as f64
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let h = 1e-4;
    for pass_through in [false, true] {
        for seed in 0..25u64 {
            let arch = fixture(pass_through);
            let mut model = DenseAutoencoder::new(&arch, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcd);
            // Nonzero biases so every path through the ReLUs is exercised.
            for p in model.params_mut() {
                *p += rng.random_range(-0.1..0.1);
            }
            let samples = batch(&mut rng, 5, 4);
            let mut grad = vec![0.0; model.parameter_count()];
            let l = model.loss_and_gradient(&samples, &mut grad).unwrap();
            assert!((l - loss(&model, &samples)).abs() < 1e-12);

            let mut numeric = vec![0.0; grad.len()];
            for i in 0..grad.len() {
                let mut plus = model.clone();
                plus.params_mut()[i] += h;
                let mut minus = model.clone();
                minus.params_mut()[i] -= h;
                numeric[i] = (loss(&plus, &samples) - loss(&minus, &samples)) / (2.0 * h);
            }
            let diff: f64 = grad.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let norm_a: f64 = grad.iter().map(|a| a * a).sum::<f64>().sqrt();
            let norm_n: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
            let rel = diff / norm_a.max(norm_n);
            assert!(rel < 1e-4, "seed {seed} pass_through {pass_through}: relative error {rel}");
        }
    }
}

/// Forward pass written as explicit matrix products over the flat layout.
fn matmul_forward(model: &DenseAutoencoder, x: &[f64]) -> Vec<f64> {
    let p = model.params();
    let mut a = x.to_vec();
    for l in model.layers() {
        let mut z = vec![0.0; l.out_width];
        if l.trainable {
            let w = &p[l.offset..l.offset + l.in_width * l.out_width];
            let b = &p[l.offset + l.in_width * l.out_width..];
            for o in 0..l.out_width {
                z[o] = b[o];
                for i in 0..l.in_width {
                    z[o] += w[o * l.in_width + i] * a[i];
                }
            }
        } else {
            z.copy_from_slice(&a);
        }
        if l.activation == Activation::Relu {
            for v in &mut z {
                *v = v.max(0.0);
            }
        }
        a = z;
    }
    a
}

#[test]
fn forward_matches_matmul_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..10 {
        let mut model = build_model(seed);
        for p in model.params_mut() {
            *p += rng.random_range(-0.05..0.05);
        }
        for x in batch(&mut rng, 20, 16) {
            let got = model.forward(&x).unwrap();
            let want = matmul_forward(&model, &x);
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() <= 1e-6 * w.abs().max(1e-12), "{g} vs {w}");
            }
        }
    }
}

#[test]
fn mse_follows_hand_formula() {
    let mut x = [0.0; 16];
    x[0] = 1.0;
    assert_eq!(reconstruction_mse(&x, &[0.0; 16]).unwrap(), 1.0 / 16.0);
    assert_eq!(reconstruction_mse(&x, &x).unwrap(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let a: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut s = 0.0;
        for j in 0..16 {
            s += (a[j] - b[j]) * (a[j] - b[j]);
        }
        assert_eq!(reconstruction_mse(&a, &b).unwrap(), s / 16.0);
    }
    assert!(reconstruction_mse(&[1.0; 3], &[1.0; 4]).is_err());
}

#[test]
fn standard_model_memorizes_one_sample() {
    let mut model = build_model(11);
    let x: Vec<f64> = (0..16).map(|j| (j as f64 * 0.37).sin()).collect();
    let cfg = TrainConfig { epochs: 300, batch_size: 1, ..TrainConfig::default() };
    let h = train(&mut model, std::slice::from_ref(&x), &cfg).unwrap();
    assert_eq!(h.train.len(), 300);
    assert!(model.reconstruction_error(&x).unwrap() < 1e-4);
}
