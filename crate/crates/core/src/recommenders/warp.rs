//! Weighted approximate-rank pairwise loss. For each positive, negatives are
//! drawn until one violates the unit margin; the number of draws gives a rank
//! estimate whose harmonic weight scales the hinge update.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{FactorModel, ModelParams, WarpParams};
use super::{check_sgd_params, sample_negative};
use crate::data::InteractionDataset;
use crate::{Error, Result, Scalar};

/// Rank estimate after the first violating negative was found on draw
/// `trials` (1-based): `floor((num_items - 1) / trials)`.
pub fn warp_rank_estimate(num_items: usize, trials: usize) -> usize {
    num_items.saturating_sub(1) / trials.max(1)
}

/// Loss weight `sum_{j <= rank} 1/j`.
pub fn warp_rank_weight(rank: usize) -> f64 {
    (1..=rank).map(|j| 1.0 / j as f64).sum()
}

pub fn train_warp<T: Scalar>(train: &InteractionDataset, hp: &WarpParams, seed: u64) -> Result<FactorModel<T>> {
    check_sgd_params(hp.factors, hp.learning_rate, hp.regularization)?;
    if hp.max_sampled == 0 {
        return Err(Error::InvalidParameter("WARP max_sampled must be >= 1".into()));
    }
    let params = ModelParams::Warp(*hp);
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
    let mut step = WarpStep::new(d, num_items, hp.max_sampled, lr, reg);

    for epoch in 0..hp.epochs {
        positives.shuffle(&mut rng);
        let mut loss = 0.0;
        for &(u, i) in &positives {
            if let Some(l) = step.apply(&mut model, u, i, train.user_items(u), &mut rng) {
                loss += l;
            }
        }
        let loss = if positives.is_empty() {
            0.0
        } else {
            loss / positives.len() as f64
        };
        if !loss.is_finite() || !model.is_finite() {
            return Err(Error::Divergence {
                model: "WARP".into(),
                hyperparams: params.to_string(),
            });
        }
        log::debug!("WARP epoch {epoch}: loss {loss:.5}");
        model.history.push(loss);
    }
    Ok(model)
}

/// One WARP update for a single positive, with scratch space reused across calls.
struct WarpStep<T> {
    harmonic: Vec<f64>,
    num_items: usize,
    max_sampled: usize,
    lr: T,
    reg: T,
    pu: Vec<T>,
}

impl<T: Scalar> WarpStep<T> {
    fn new(d: usize, num_items: usize, max_sampled: usize, lr: T, reg: T) -> Self {
        // harmonic[r] = H_r
        let mut harmonic = vec![0.0f64; num_items.max(1)];
        for r in 1..harmonic.len() {
            harmonic[r] = harmonic[r - 1] + 1.0 / r as f64;
        }
        Self {
            harmonic,
            num_items,
            max_sampled,
            lr,
            reg,
            pu: vec![T::zero(); d],
        }
    }

    /// Returns the weighted hinge loss if a violating negative was found and
    /// the factors were updated, `None` if the sampling budget ran out.
    fn apply(
        &mut self,
        model: &mut FactorModel<T>,
        u: usize,
        i: usize,
        seen: &[usize],
        rng: &mut impl rand::Rng,
    ) -> Option<f64> {
        let d = model.factors;
        let s_pos = model.score(u, i);
        let mut violation = None;
        for trial in 1..=self.max_sampled {
            let j = sample_negative(rng, seen, self.num_items);
            let s_neg = model.score(u, j);
            if s_neg + T::one() > s_pos {
                violation = Some((j, trial, s_neg));
                break;
            }
        }
        let (j, trials, s_neg) = violation?;
        let weight = self.harmonic[warp_rank_estimate(self.num_items, trials)];
        let w = T::of(weight);
        let (lr, reg) = (self.lr, self.reg);
        self.pu.copy_from_slice(model.user(u));
        for f in 0..d {
            let qi = model.item_factors[i * d + f];
            let qj = model.item_factors[j * d + f];
            let p = self.pu[f];
            model.user_factors[u * d + f] += lr * (w * (qi - qj) - reg * p);
            model.item_factors[i * d + f] += lr * (w * p - reg * qi);
            model.item_factors[j * d + f] += lr * (-w * p - reg * qj);
        }
        Some(weight * (T::one() - s_pos + s_neg).as_f64())
    }
}
