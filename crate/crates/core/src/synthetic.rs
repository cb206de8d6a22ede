//! Planted-structure interaction data for tests and demos.
//!
//! Users and items get angles on a circle; a user interacts with items whose
//! angle is close to theirs. The latent structure is rank 2 (`cos`, `sin`),
//! so a factor model with two or more factors can recover it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::InteractionDataset;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantedParams {
    pub users: usize,
    pub items: usize,
    pub per_user: usize,
    /// Concentration: larger values make users pickier.
    pub kappa: f64,
}

impl Default for PlantedParams {
    fn default() -> Self {
        Self {
            users: 50,
            items: 80,
            per_user: 24,
            kappa: 8.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Planted {
    pub dataset: InteractionDataset,
    pub user_angle: Vec<f64>,
    pub item_angle: Vec<f64>,
}

impl Planted {
    /// Ground-truth affinity of user `u` for item `i`.
    pub fn affinity(&self, u: usize, i: usize) -> f64 {
        (self.user_angle[u] - self.item_angle[i]).cos()
    }
}

/// Samples `per_user` distinct items per user with probability proportional
/// to `exp(kappa * cos(user angle - item angle))`.
pub fn planted(params: PlantedParams, seed: u64) -> Result<Planted> {
    if params.per_user == 0 || params.per_user > params.items || params.users == 0 {
        return Err(Error::InvalidParameter(format!(
            "cannot draw {} of {} items for {} users",
            params.per_user, params.items, params.users
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    let user_angle: Vec<f64> = (0..params.users).map(|_| rng.random::<f64>() * tau).collect();
    let item_angle: Vec<f64> = (0..params.items)
        .map(|i| (i as f64 + rng.random::<f64>()) * tau / params.items as f64)
        .collect();

    let rows = user_angle
        .iter()
        .map(|&a| {
            // weighted sampling without replacement via exponential keys
            let mut keyed: Vec<(f64, usize)> = item_angle
                .iter()
                .enumerate()
                .map(|(i, &b)| {
                    let w = (params.kappa * ((a - b).cos() - 1.0)).exp();
                    let r: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                    (r.ln() / w, i)
                })
                .collect();
            keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
            keyed.truncate(params.per_user);
            keyed.into_iter().map(|(_, i)| i).collect()
        })
        .collect();
    let users = (0..params.users).map(|u| format!("u{u}")).collect();
    let items = (0..params.items).map(|i| format!("i{i}")).collect();
    Ok(Planted {
        dataset: InteractionDataset::with_maps(users, items, rows)?,
        user_angle,
        item_angle,
    })
}

/// CSV text (`user_id,item_id` with header) for a dataset.
pub fn to_csv(ds: &InteractionDataset) -> String {
    let mut out = String::from("user_id,item_id\n");
    for (u, i) in ds.pairs() {
        out.push_str(ds.users().id(u).unwrap_or_default());
        out.push(',');
        out.push_str(ds.items().id(i).unwrap_or_default());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_and_determinism() {
        let a = planted(PlantedParams::default(), 3).unwrap();
        let b = planted(PlantedParams::default(), 3).unwrap();
        assert_eq!(a.dataset, b.dataset);
        assert_eq!(a.dataset.num_users(), 50);
        assert!(a.dataset.rows().iter().all(|r| r.len() == 24));
    }

    #[test]
    fn interactions_follow_affinity() {
        let p = planted(PlantedParams::default(), 9).unwrap();
        let (mut inside, mut outside) = (0.0, 0.0);
        let (mut n_in, mut n_out) = (0usize, 0usize);
        for u in 0..p.dataset.num_users() {
            for i in 0..p.dataset.num_items() {
                if p.dataset.contains(u, i) {
                    inside += p.affinity(u, i);
                    n_in += 1;
                } else {
                    outside += p.affinity(u, i);
                    n_out += 1;
                }
            }
        }
        assert!(inside / n_in as f64 > 0.5 + outside / n_out as f64);
    }

    #[test]
    fn rejects_impossible_draws() {
        let bad = PlantedParams {
            per_user: 100,
            ..PlantedParams::default()
        };
        assert!(planted(bad, 0).is_err());
    }
}
