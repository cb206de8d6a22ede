use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::dot;
use crate::Scalar;

/// Which built-in base recommender a parameter set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "BPR")]
    Bpr,
    #[serde(rename = "WARP")]
    Warp,
    #[serde(rename = "WRMF")]
    Wrmf,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Bpr, ModelKind::Warp, ModelKind::Wrmf];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Bpr => "BPR",
            ModelKind::Warp => "WARP",
            ModelKind::Wrmf => "WRMF",
        }
    }

    pub fn default_params(self) -> ModelParams {
        match self {
            ModelKind::Bpr => ModelParams::Bpr(BprParams::default()),
            ModelKind::Warp => ModelParams::Warp(WarpParams::default()),
            ModelKind::Wrmf => ModelParams::Wrmf(WrmfParams::default()),
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "BPR" => Ok(ModelKind::Bpr),
            "WARP" => Ok(ModelKind::Warp),
            "WRMF" | "ALS" => Ok(ModelKind::Wrmf),
            other => Err(crate::Error::Config(format!("unknown built-in model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BprParams {
    pub factors: usize,
    /// Passes over the data; each pass draws one triplet per observed interaction.
    pub epochs: usize,
    pub learning_rate: f64,
    pub regularization: f64,
}

impl Default for BprParams {
    fn default() -> Self {
        Self {
            factors: 32,
            epochs: 60,
            learning_rate: 0.05,
            regularization: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WarpParams {
    pub factors: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub regularization: f64,
    /// Negative draws allowed per positive before giving up.
    pub max_sampled: usize,
}

impl Default for WarpParams {
    fn default() -> Self {
        Self {
            factors: 32,
            epochs: 30,
            learning_rate: 0.02,
            regularization: 1e-4,
            max_sampled: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WrmfParams {
    pub factors: usize,
    /// Full alternations (user sweep followed by item sweep).
    pub iterations: usize,
    pub regularization: f64,
    /// Confidence weight: `c_ui = 1 + alpha * Z(u, i)`.
    pub alpha: f64,
}

impl Default for WrmfParams {
    fn default() -> Self {
        Self {
            factors: 32,
            iterations: 15,
            regularization: 0.05,
            alpha: 40.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model")]
pub enum ModelParams {
    #[serde(rename = "BPR")]
    Bpr(BprParams),
    #[serde(rename = "WARP")]
    Warp(WarpParams),
    #[serde(rename = "WRMF")]
    Wrmf(WrmfParams),
}

impl ModelParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParams::Bpr(_) => ModelKind::Bpr,
            ModelParams::Warp(_) => ModelKind::Warp,
            ModelParams::Wrmf(_) => ModelKind::Wrmf,
        }
    }

    pub fn factors(&self) -> usize {
        match self {
            ModelParams::Bpr(p) => p.factors,
            ModelParams::Warp(p) => p.factors,
            ModelParams::Wrmf(p) => p.factors,
        }
    }
}

impl std::fmt::Display for ModelParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelParams::Bpr(p) => write!(
                f,
                "factors={} epochs={} learning_rate={:?} regularization={:?}",
                p.factors, p.epochs, p.learning_rate, p.regularization
            ),
            ModelParams::Warp(p) => write!(
                f,
                "factors={} epochs={} learning_rate={:?} regularization={:?} max_sampled={}",
                p.factors, p.epochs, p.learning_rate, p.regularization, p.max_sampled
            ),
            ModelParams::Wrmf(p) => write!(
                f,
                "factors={} iterations={} regularization={:?} alpha={:?}",
                p.factors, p.iterations, p.regularization, p.alpha
            ),
        }
    }
}

/// Latent user and item factors, row-major (`|U| x d` and `|I| x d`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorModel<T> {
    pub name: String,
    pub factors: usize,
    pub user_factors: Vec<T>,
    pub item_factors: Vec<T>,
    pub hyperparams: ModelParams,
    /// Training objective after each epoch (SGD models: sampled estimate).
    #[serde(default)]
    pub history: Vec<f64>,
}

impl<T: Scalar> FactorModel<T> {
    pub(crate) fn init(
        num_users: usize,
        num_items: usize,
        hyperparams: ModelParams,
        scale: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let d = hyperparams.factors();
        let mut draw = |n: usize| -> Vec<T> {
            (0..n)
                .map(|_| T::of((rng.random::<f64>() - 0.5) * 2.0 * scale))
                .collect()
        };
        let user_factors = draw(num_users * d);
        let item_factors = draw(num_items * d);
        Self {
            name: hyperparams.kind().name().to_owned(),
            factors: d,
            user_factors,
            item_factors,
            hyperparams,
            history: Vec::new(),
        }
    }

    /// Builds a model from explicit factor matrices.
    pub fn from_factors(
        name: impl Into<String>,
        factors: usize,
        user_factors: Vec<T>,
        item_factors: Vec<T>,
        hyperparams: ModelParams,
    ) -> crate::Result<Self> {
        if factors == 0 || user_factors.len() % factors != 0 || item_factors.len() % factors != 0 {
            return Err(crate::Error::InvalidParameter(format!(
                "factor matrices ({} and {} entries) do not split into rows of {factors}",
                user_factors.len(),
                item_factors.len()
            )));
        }
        Ok(Self {
            name: name.into(),
            factors,
            user_factors,
            item_factors,
            hyperparams,
            history: Vec::new(),
        })
    }

    pub fn num_users(&self) -> usize {
        self.user_factors.len() / self.factors
    }

    pub fn num_items(&self) -> usize {
        self.item_factors.len() / self.factors
    }

    #[inline]
    pub fn user(&self, u: usize) -> &[T] {
        &self.user_factors[u * self.factors..(u + 1) * self.factors]
    }

    #[inline]
    pub fn item(&self, i: usize) -> &[T] {
        &self.item_factors[i * self.factors..(i + 1) * self.factors]
    }

    #[inline]
    pub fn score(&self, u: usize, i: usize) -> T {
        dot(self.user(u), self.item(i))
    }

    /// Scores of user `u` against every item.
    pub fn scores(&self, u: usize) -> Vec<T> {
        let p = self.user(u);
        self.item_factors
            .chunks_exact(self.factors)
            .map(|q| dot(p, q))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.user_factors
            .iter()
            .chain(&self.item_factors)
            .all(|x| x.is_finite())
    }
}
