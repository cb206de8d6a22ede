//! Weighted regularized matrix factorization for implicit feedback, fitted by
//! alternating ridge solves with confidence `c_ui = 1 + alpha * Z(u, i)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::model::{FactorModel, ModelParams, WrmfParams};
use crate::data::InteractionDataset;
use crate::linalg::{dot, DenseMatrix};
use crate::{Error, Result, Scalar};

pub fn train_wrmf<T: Scalar>(train: &InteractionDataset, hp: &WrmfParams, seed: u64) -> Result<FactorModel<T>> {
    if hp.factors == 0 {
        return Err(Error::InvalidParameter("WRMF factors must be >= 1".into()));
    }
    if !(hp.alpha > 0.0) || !hp.alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "WRMF confidence alpha must be > 0 (got {})",
            hp.alpha
        )));
    }
    if !(hp.regularization > 0.0) || !hp.regularization.is_finite() {
        return Err(Error::Singular(format!(
            "WRMF regularization must be > 0 for well-posed normal equations (got {})",
            hp.regularization
        )));
    }
    let params = ModelParams::Wrmf(*hp);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = FactorModel::<T>::init(train.num_users(), train.num_items(), params, 0.01, &mut rng);
    let d = hp.factors;
    let alpha = T::of(hp.alpha);
    let lambda = T::of(hp.regularization);
    let by_user = train.rows().to_vec();
    let by_item = train.item_users();

    model.history.push(wrmf_objective(&model, train, hp));
    for it in 0..hp.iterations {
        model.user_factors = half_sweep(&model.item_factors, &by_user, d, alpha, lambda)?;
        model.item_factors = half_sweep(&model.user_factors, &by_item, d, alpha, lambda)?;
        let obj = wrmf_objective(&model, train, hp);
        if !obj.is_finite() || !model.is_finite() {
            return Err(Error::Divergence {
                model: "WRMF".into(),
                hyperparams: params.to_string(),
            });
        }
        log::debug!("WRMF sweep {it}: objective {obj:.6}");
        model.history.push(obj);
    }
    Ok(model)
}

/// Re-solves every row of one side given the fixed `other` side.
fn half_sweep<T: Scalar>(other: &[T], observed: &[Vec<usize>], d: usize, alpha: T, lambda: T) -> Result<Vec<T>> {
    let gram = DenseMatrix::gram(d, other.chunks_exact(d));
    let rows: Vec<Result<Vec<T>>> = observed
        .par_iter()
        .map(|seen| {
            let mut a = gram.clone();
            a.add_diagonal(lambda);
            let mut b = vec![T::zero(); d];
            let c = T::one() + alpha;
            for &j in seen {
                let y = &other[j * d..(j + 1) * d];
                a.rank_one_update(alpha, y);
                for (bf, &yf) in b.iter_mut().zip(y) {
                    *bf += c * yf;
                }
            }
            a.cholesky_solve(&b)
        })
        .collect();
    let mut out = Vec::with_capacity(observed.len() * d);
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// `sum_{u,i} c_ui (Z(u,i) - x_u . y_i)^2 + lambda (|X|^2 + |Y|^2)`.
pub fn wrmf_objective<T: Scalar>(model: &FactorModel<T>, train: &InteractionDataset, hp: &WrmfParams) -> f64 {
    let d = model.factors;
    let gram = DenseMatrix::gram(d, model.item_factors.chunks_exact(d));
    let c = 1.0 + hp.alpha;
    let mut total = 0.0;
    for u in 0..model.num_users() {
        // all cells as if unobserved, then correct the observed ones
        total += gram.quadratic_form(model.user(u)).as_f64();
        for &i in train.user_items(u) {
            let s = model.score(u, i).as_f64();
            total += c * (1.0 - s) * (1.0 - s) - s * s;
        }
    }
    let norms = dot(&model.user_factors, &model.user_factors) + dot(&model.item_factors, &model.item_factors);
    total + hp.regularization * norms.as_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_matches_dense_sum() {
        let ds = InteractionDataset::from_rows(4, vec![vec![0, 3], vec![1], vec![]]).unwrap();
        let hp = WrmfParams {
            factors: 2,
            iterations: 2,
            regularization: 0.1,
            alpha: 3.0,
        };
        let m = train_wrmf::<f64>(&ds, &hp, 5).unwrap();
        let mut dense = 0.0;
        for u in 0..3 {
            for i in 0..4 {
                let z = if ds.contains(u, i) { 1.0 } else { 0.0 };
                let c = 1.0 + hp.alpha * z;
                dense += c * (z - m.score(u, i)).powi(2);
            }
        }
        dense += hp.regularization * m.user_factors.iter().chain(&m.item_factors).map(|x| x * x).sum::<f64>();
        assert!((wrmf_objective(&m, &ds, &hp) - dense).abs() < 1e-10);
    }

    #[test]
    fn heavy_regularization_shrinks_to_zero() {
        let ds = InteractionDataset::from_rows(5, vec![vec![0, 1], vec![2, 3], vec![4]]).unwrap();
        let hp = WrmfParams {
            factors: 3,
            iterations: 3,
            regularization: 1e9,
            alpha: 40.0,
        };
        let m = train_wrmf::<f64>(&ds, &hp, 0).unwrap();
        for u in 0..3 {
            assert!(m.scores(u).iter().all(|s| s.abs() < 1e-9));
        }
    }

    #[test]
    fn zero_regularization_is_rejected() {
        let ds = InteractionDataset::from_rows(2, vec![vec![0]]).unwrap();
        let hp = WrmfParams {
            regularization: 0.0,
            ..Default::default()
        };
        assert!(matches!(train_wrmf::<f64>(&ds, &hp, 0), Err(Error::Singular(_))));
        let hp = WrmfParams {
            alpha: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            train_wrmf::<f64>(&ds, &hp, 0),
            Err(Error::InvalidParameter(_))
        ));
    }
}
