//! Bayesian personalized ranking: SGD on sampled (user, positive, negative)
//! triplets with a log-sigmoid pairwise loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{BprParams, FactorModel, ModelParams};
use super::{check_sgd_params, sample_negative};
use crate::data::InteractionDataset;
use crate::{Error, Result, Scalar};

pub fn train_bpr<T: Scalar>(train: &InteractionDataset, hp: &BprParams, seed: u64) -> Result<FactorModel<T>> {
    check_sgd_params(hp.factors, hp.learning_rate, hp.regularization)?;
    let params = ModelParams::Bpr(*hp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = FactorModel::<T>::init(
        train.num_users(),
        train.num_items(),
        params,
        0.1 / (hp.factors as f64).sqrt(),
        &mut rng,
    );
    let d = hp.factors;
    let lr = T::of(hp.learning_rate);
    let reg = T::of(hp.regularization);
    let num_items = train.num_items();

    let mut positives: Vec<(usize, usize)> = train
        .pairs()
        .filter(|&(u, _)| train.user_items(u).len() < num_items)
        .collect();
    let mut pu = vec![T::zero(); d];

    for epoch in 0..hp.epochs {
        positives.shuffle(&mut rng);
        let mut loss = 0.0;
        for &(u, i) in &positives {
            let j = sample_negative(&mut rng, train.user_items(u), num_items);
            let x = model.score(u, i) - model.score(u, j);
            // d/dx of ln(sigmoid(x))
            let g = T::one() / (T::one() + x.exp());
            loss += softplus(-x.as_f64());

            pu.copy_from_slice(model.user(u));
            for f in 0..d {
                let qi = model.item_factors[i * d + f];
                let qj = model.item_factors[j * d + f];
                model.user_factors[u * d + f] += lr * (g * (qi - qj) - reg * pu[f]);
                model.item_factors[i * d + f] += lr * (g * pu[f] - reg * qi);
                model.item_factors[j * d + f] += lr * (-g * pu[f] - reg * qj);
            }
        }
        let loss = if positives.is_empty() {
            0.0
        } else {
            loss / positives.len() as f64
        };
        if !loss.is_finite() || !model.is_finite() {
            return Err(Error::Divergence {
                model: "BPR".into(),
                hyperparams: params.to_string(),
            });
        }
        log::debug!("BPR epoch {epoch}: loss {loss:.5}");
        model.history.push(loss);
    }
    Ok(model)
}

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}
