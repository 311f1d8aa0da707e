//! Disturbance signals `w(k)` and their generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::difference_stack;
use crate::linalg::Vector;

/// Shape of a disturbance signal.
#[derive(Debug, Clone, PartialEq)]
pub enum DisturbanceKind {
    Constant(Vector),
    /// `w(k) = Σ_i c_i k^i`, coefficients ordered from `c_0` upward.
    Polynomial(Vec<Vector>),
    /// `w(k) = amplitude ⊙ sin(rate k + phase)`.
    Sinusoid {
        amplitude: Vector,
        rate: f64,
        phase: f64,
    },
    /// Explicit samples `w(0), w(1), ...`; the final sample is held past the end.
    Samples(Vec<Vector>),
}

/// A disturbance evaluable at every `k >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DisturbanceSignal {
    kind: DisturbanceKind,
    dim: usize,
}

impl DisturbanceSignal {
    pub fn new(kind: DisturbanceKind) -> Result<Self> {
        let dim = match &kind {
            DisturbanceKind::Constant(v) => v.len(),
            DisturbanceKind::Polynomial(c) => {
                let dim = c
                    .first()
                    .ok_or_else(|| {
                        Error::InvalidParameter("polynomial needs at least one coefficient".into())
                    })?
                    .len();
                if c.iter().any(|v| v.len() != dim) {
                    return Err(Error::InvalidParameter(
                        "polynomial coefficients differ in dimension".into(),
                    ));
                }
                dim
            }
            DisturbanceKind::Sinusoid { amplitude, rate, phase } => {
                if !rate.is_finite() || !phase.is_finite() {
                    return Err(Error::InvalidParameter("sinusoid rate/phase must be finite".into()));
                }
                amplitude.len()
            }
            DisturbanceKind::Samples(s) => {
                let dim = s
                    .first()
                    .ok_or_else(|| Error::InvalidParameter("sample sequence is empty".into()))?
                    .len();
                if s.iter().any(|v| v.len() != dim) {
                    return Err(Error::InvalidParameter("samples differ in dimension".into()));
                }
                dim
            }
        };
        let signal = Self { kind, dim };
        if signal.values().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("disturbance parameters must be finite".into()));
        }
        Ok(signal)
    }

    /// All-zero disturbance of dimension `q`.
    pub fn zero(q: usize) -> Self {
        Self {
            kind: DisturbanceKind::Constant(Vector::zeros(q)),
            dim: q,
        }
    }

    fn values(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match &self.kind {
            DisturbanceKind::Constant(v) => Box::new(v.iter().copied()),
            DisturbanceKind::Polynomial(c) => Box::new(c.iter().flat_map(|v| v.iter().copied())),
            DisturbanceKind::Sinusoid { amplitude, .. } => Box::new(amplitude.iter().copied()),
            DisturbanceKind::Samples(s) => Box::new(s.iter().flat_map(|v| v.iter().copied())),
        }
    }

    pub fn kind(&self) -> &DisturbanceKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, k: usize) -> Vector {
        match &self.kind {
            DisturbanceKind::Constant(v) => v.clone(),
            DisturbanceKind::Polynomial(c) => {
                let t = k as f64;
                c.iter()
                    .rev()
                    .fold(Vector::zeros(self.dim), |acc, ci| acc * t + ci)
            }
            DisturbanceKind::Sinusoid { amplitude, rate, phase } => {
                amplitude * (rate * k as f64 + phase).sin()
            }
            DisturbanceKind::Samples(s) => s[k.min(s.len() - 1)].clone(),
        }
    }

    /// `w(k), ..., w(k+len-1)`.
    pub fn window(&self, k: usize, len: usize) -> Vec<Vector> {
        (k..k + len).map(|t| self.at(t)).collect()
    }

    /// `[Δ^0 w(k), ..., Δ^order w(k)]` by direct differencing.
    pub fn differences(&self, k: usize, order: usize) -> Vec<Vector> {
        difference_stack(&self.window(k, order + 1))
    }

    /// `Δ^order w(k)`.
    pub fn difference(&self, k: usize, order: usize) -> Vector {
        self.differences(k, order).pop().expect("non-empty stack")
    }

    /// `sup_k ||Δ^order w(k)||` over `k in 0..horizon`.
    pub fn residual_bound(&self, order: usize, horizon: usize) -> f64 {
        (0..horizon)
            .map(|k| self.difference(k, order).norm())
            .fold(0.0, f64::max)
    }
}

/// Serializable description of a disturbance, as used in experiment files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DisturbanceSpec {
    Constant {
        value: Vec<f64>,
    },
    Polynomial {
        /// `[w_0, w_1, ...]`, each of dimension `q`.
        coefficients: Vec<Vec<f64>>,
    },
    Sinusoid {
        amplitude: Vec<f64>,
        rate: f64,
        #[serde(default)]
        phase: f64,
    },
    Custom {
        samples: Vec<Vec<f64>>,
    },
    /// A signal whose `order`-th difference is i.i.d. uniform in the ball
    /// of radius `bound`, built by repeated cumulative summation.
    IntegratedNoise {
        order: usize,
        bound: f64,
        dim: usize,
        length: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// Builds a [`DisturbanceSignal`] from its description. `seed` overrides a
/// seed given inside the description.
pub fn make_disturbance(spec: &DisturbanceSpec, seed: Option<u64>) -> Result<DisturbanceSignal> {
    let vec = |v: &[f64]| Vector::from_column_slice(v);
    match spec {
        DisturbanceSpec::Constant { value } => {
            DisturbanceSignal::new(DisturbanceKind::Constant(vec(value)))
        }
        DisturbanceSpec::Polynomial { coefficients } => DisturbanceSignal::new(
            DisturbanceKind::Polynomial(coefficients.iter().map(|c| vec(c)).collect()),
        ),
        DisturbanceSpec::Sinusoid { amplitude, rate, phase } => {
            DisturbanceSignal::new(DisturbanceKind::Sinusoid {
                amplitude: vec(amplitude),
                rate: *rate,
                phase: *phase,
            })
        }
        DisturbanceSpec::Custom { samples } => DisturbanceSignal::new(DisturbanceKind::Samples(
            samples.iter().map(|c| vec(c)).collect(),
        )),
        DisturbanceSpec::IntegratedNoise {
            order,
            bound,
            dim,
            length,
            seed: own_seed,
        } => {
            if !(bound.is_finite() && *bound >= 0.0) || *length == 0 {
                return Err(Error::InvalidParameter(
                    "integrated noise needs bound >= 0 and length > 0".into(),
                ));
            }
            let seed = seed.or(*own_seed).unwrap_or(0);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let residual = bounded_noise(&mut rng, *dim, *length, *bound);
            DisturbanceSignal::new(DisturbanceKind::Samples(integrate(residual, *order)))
        }
    }
}

/// `len` vectors drawn uniformly from the ball of radius `bound` in `dim`
/// dimensions (uniform direction, uniform radius).
pub fn bounded_noise<R: Rng>(rng: &mut R, dim: usize, len: usize, bound: f64) -> Vec<Vector> {
    (0..len)
        .map(|_| {
            let v = Vector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0));
            let n = v.norm();
            if n == 0.0 {
                v
            } else {
                v * (bound * rng.gen_range(0.0..=1.0) / n)
            }
        })
        .collect()
}

/// Applies `times`-fold cumulative summation so that the `times`-th forward
/// difference of the result reproduces `residual` exactly:
/// `v_{i+1}(0) = 0`, `v_{i+1}(k+1) = v_{i+1}(k) + v_i(k)`.
pub fn integrate(residual: Vec<Vector>, times: usize) -> Vec<Vector> {
    let mut seq = residual;
    for _ in 0..times {
        let dim = seq.first().map_or(0, Vector::len);
        let mut acc = Vector::zeros(dim);
        let mut next = Vec::with_capacity(seq.len());
        for v in &seq {
            next.push(acc.clone());
            acc += v;
        }
        seq = next;
    }
    seq
}
