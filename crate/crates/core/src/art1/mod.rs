//! ART1: incremental category learning over binary vectors.
//!
//! Each category `j` owns a binary template `t_j` (top-down weights) and a
//! real-valued bottom-up weight vector
//!
//! ```text
//! bu_j = L / (L - 1 + |t_j|) * t_j
//! ```
//!
//! Because `bu_j` is a scalar multiple of `t_j`, only the templates are
//! stored; the activation of category `j` for an input `x` is
//! `T_j = <bu_j, x> = L * |x AND t_j| / (L - 1 + |t_j|)` and the match is
//! `M_j = |x AND t_j| / |x|`.
//!
//! Presentation of a sample walks the categories by descending activation
//! (ties go to the lowest id) and resonates with the first whose match is at
//! least the vigilance. On resonance the template becomes `x AND t_j`; if no
//! category resonates a new one is appended with template `x`.

mod snapshot;

pub use snapshot::{read_snapshot, write_snapshot, SnapshotError, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

use std::cmp::Ordering;

use thiserror::Error;

use crate::bits::BinaryVector;
use crate::scalar::Scalar;

/// Index of a category in creation order.
pub type CategoryId = usize;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Art1Error {
    #[error("input width {got} does not match network width {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("input vector has no set bits; the match ratio is undefined")]
    ZeroInput,
    #[error("network has no categories")]
    NoCategories,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sample {index}: {source}")]
    AtSample {
        index: usize,
        #[source]
        source: Box<Art1Error>,
    },
}

/// Vigilance and learning parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Art1Config<T> {
    vigilance: T,
    learning_param: T,
}

impl<T: Scalar> Art1Config<T> {
    pub const DEFAULT_LEARNING_PARAM: f64 = 2.0;

    /// Validates `0 <= vigilance <= 1` and `learning_param > 1`.
    pub fn new(vigilance: T, learning_param: T) -> Result<Self, Art1Error> {
        if !(vigilance >= T::zero() && vigilance <= T::one()) {
            return Err(Art1Error::Config(format!(
                "vigilance must lie in [0, 1], got {vigilance}"
            )));
        }
        if !(learning_param > T::one()) || !learning_param.is_finite() {
            return Err(Art1Error::Config(format!(
                "learning parameter must be a finite value > 1, got {learning_param}"
            )));
        }
        Ok(Self {
            vigilance,
            learning_param,
        })
    }

    /// Config with the default learning parameter `L = 2`.
    pub fn with_vigilance(vigilance: T) -> Result<Self, Art1Error> {
        Self::new(vigilance, T::lit(Self::DEFAULT_LEARNING_PARAM))
    }

    pub fn vigilance(&self) -> T {
        self.vigilance
    }

    pub fn learning_param(&self) -> T {
        self.learning_param
    }
}

/// One tested hypothesis during a search.
#[derive(Debug, Clone, PartialEq)]
pub struct TestedCategory<T> {
    pub category: CategoryId,
    pub activation: T,
    pub match_score: T,
}

/// Record of a single search through the categories.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentTrace<T> {
    pub chosen_category: CategoryId,
    /// Hypotheses in the order they were tested.
    pub tested_categories: Vec<TestedCategory<T>>,
    pub created_new: bool,
}

/// Computes `z = x AND template` and `M = |z| / |x|`.
pub fn match_score<T: Scalar>(
    x: &BinaryVector,
    template: &BinaryVector,
) -> Result<(BinaryVector, T), Art1Error> {
    if x.width() != template.width() {
        return Err(Art1Error::Dimension {
            expected: template.width(),
            got: x.width(),
        });
    }
    let norm = x.count_ones();
    if norm == 0 {
        return Err(Art1Error::ZeroInput);
    }
    let z = x.and(template);
    let m = T::from_count(z.count_ones()) / T::from_count(norm);
    Ok((z, m))
}

/// An ART1 network generic over the scalar type of its bottom-up weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    config: Art1Config<T>,
    width: Option<usize>,
    templates: Vec<BinaryVector>,
    // |t_j|, cached
    norms: Vec<usize>,
}

impl<T: Scalar> Network<T> {
    /// Empty network; the width is adopted from the first presented sample.
    pub fn new(config: Art1Config<T>) -> Self {
        Self {
            config,
            width: None,
            templates: Vec::new(),
            norms: Vec::new(),
        }
    }

    /// Empty network with a fixed input width.
    pub fn with_width(config: Art1Config<T>, width: usize) -> Self {
        Self {
            width: Some(width),
            ..Self::new(config)
        }
    }

    /// Rebuilds a network from stored templates. Bottom-up weights follow
    /// from the templates.
    pub fn from_templates(
        config: Art1Config<T>,
        width: usize,
        templates: Vec<BinaryVector>,
    ) -> Result<Self, Art1Error> {
        if let Some(t) = templates.iter().find(|t| t.width() != width) {
            return Err(Art1Error::Dimension {
                expected: width,
                got: t.width(),
            });
        }
        let norms = templates.iter().map(BinaryVector::count_ones).collect();
        Ok(Self {
            config,
            width: Some(width),
            templates,
            norms,
        })
    }

    pub fn config(&self) -> &Art1Config<T> {
        &self.config
    }

    pub fn width(&self) -> Option<usize> {
        self.width
    }

    pub fn n_categories(&self) -> usize {
        self.templates.len()
    }

    /// Top-down templates in category order.
    pub fn templates(&self) -> &[BinaryVector] {
        &self.templates
    }

    /// The common value `L / (L - 1 + |t_j|)` of every non-zero bottom-up weight of `j`.
    pub fn bottom_up_scale(&self, category: CategoryId) -> T {
        self.scale_for_norm(self.norms[category])
    }

    /// Dense bottom-up weight vector of a category.
    pub fn bottom_up(&self, category: CategoryId) -> Vec<T> {
        let scale = self.bottom_up_scale(category);
        let t = &self.templates[category];
        (0..t.width())
            .map(|i| if t.get(i) { scale } else { T::zero() })
            .collect()
    }

    #[inline]
    fn scale_for_norm(&self, norm: usize) -> T {
        let l = self.config.learning_param;
        l / (l - T::one() + T::from_count(norm))
    }

    // L * k / (L - 1 + n). Computed as one rounded quotient so that
    // activations equal in exact arithmetic compare equal here too.
    #[inline]
    fn activation_from_counts(&self, overlap: usize, norm: usize) -> T {
        let l = self.config.learning_param;
        (l * T::from_count(overlap)) / (l - T::one() + T::from_count(norm))
    }

    fn check_width(&self, x: &BinaryVector) -> Result<(), Art1Error> {
        match self.width {
            Some(w) if w != x.width() => Err(Art1Error::Dimension {
                expected: w,
                got: x.width(),
            }),
            _ => Ok(()),
        }
    }

    fn check_input(&self, x: &BinaryVector) -> Result<usize, Art1Error> {
        self.check_width(x)?;
        let norm = x.count_ones();
        if norm == 0 {
            return Err(Art1Error::ZeroInput);
        }
        Ok(norm)
    }

    /// Bottom-up activation `T_j` of every category for `x`.
    pub fn activation(&self, x: &BinaryVector) -> Result<Vec<T>, Art1Error> {
        self.check_width(x)?;
        Ok(self
            .templates
            .iter()
            .zip(&self.norms)
            .map(|(t, &n)| self.activation_from_counts(x.and_count(t), n))
            .collect())
    }

    // Categories ordered by descending activation, ties by ascending id,
    // with their overlap counts.
    fn ranked_candidates(&self, x: &BinaryVector) -> Vec<(CategoryId, T, usize)> {
        let mut ranked: Vec<(CategoryId, T, usize)> = self
            .templates
            .iter()
            .zip(&self.norms)
            .enumerate()
            .map(|(j, (t, &n))| {
                let k = x.and_count(t);
                (j, self.activation_from_counts(k, n), k)
            })
            .collect();
        ranked.sort_by(|a, b| rank_order(a.1, a.0, b.1, b.0));
        ranked
    }

    // The search without a trace. Since the match of category j only
    // depends on |x AND t_j|, walking the ranked list and stopping at the
    // first resonance is the same as taking the best-ranked category among
    // those that pass vigilance.
    fn resonant_category(&self, x: &BinaryVector, norm: usize) -> Option<CategoryId> {
        let rho = self.config.vigilance;
        let x_norm = T::from_count(norm);
        let mut best: Option<(CategoryId, T)> = None;
        for (j, (t, &n)) in self.templates.iter().zip(&self.norms).enumerate() {
            let k = x.and_count(t);
            if T::from_count(k) / x_norm < rho {
                continue;
            }
            let act = self.activation_from_counts(k, n);
            match best {
                Some((_, b)) if act <= b => {}
                _ => best = Some((j, act)),
            }
        }
        best.map(|(j, _)| j)
    }

    fn resonate(&mut self, category: CategoryId, x: &BinaryVector) {
        let t = &mut self.templates[category];
        t.and_assign(x);
        self.norms[category] = t.count_ones();
    }

    fn create_category(&mut self, x: &BinaryVector) -> CategoryId {
        if self.width.is_none() {
            self.width = Some(x.width());
        }
        self.templates.push(x.clone());
        self.norms.push(x.count_ones());
        self.templates.len() - 1
    }

    /// Presents one sample in training mode and returns the category it was
    /// assigned to, together with the full search trace.
    pub fn learn_one(
        &mut self,
        x: &BinaryVector,
    ) -> Result<(CategoryId, AssignmentTrace<T>), Art1Error> {
        let norm = self.check_input(x)?;
        let rho = self.config.vigilance;
        let x_norm = T::from_count(norm);
        let mut tested = Vec::new();
        for (j, act, k) in self.ranked_candidates(x) {
            let m = T::from_count(k) / x_norm;
            tested.push(TestedCategory {
                category: j,
                activation: act,
                match_score: m,
            });
            if m >= rho {
                self.resonate(j, x);
                return Ok((
                    j,
                    AssignmentTrace {
                        chosen_category: j,
                        tested_categories: tested,
                        created_new: false,
                    },
                ));
            }
        }
        let j = self.create_category(x);
        Ok((
            j,
            AssignmentTrace {
                chosen_category: j,
                tested_categories: tested,
                created_new: true,
            },
        ))
    }

    /// Training-mode presentation without building a trace.
    pub fn learn(&mut self, x: &BinaryVector) -> Result<CategoryId, Art1Error> {
        let norm = self.check_input(x)?;
        match self.resonant_category(x, norm) {
            Some(j) => {
                self.resonate(j, x);
                Ok(j)
            }
            None => Ok(self.create_category(x)),
        }
    }

    /// Presents samples in order; returns each sample's category at the
    /// moment it was presented.
    pub fn fit<'a, I>(&mut self, samples: I) -> Result<Vec<CategoryId>, Art1Error>
    where
        I: IntoIterator<Item = &'a BinaryVector>,
    {
        samples
            .into_iter()
            .enumerate()
            .map(|(index, x)| {
                self.learn(x).map_err(|e| Art1Error::AtSample {
                    index,
                    source: Box::new(e),
                })
            })
            .collect()
    }

    /// Frozen-weights assignment. Runs the same search as training but
    /// never changes the network; when nothing passes vigilance the
    /// category with the highest match wins (ties to the lowest id).
    pub fn infer_one(&self, x: &BinaryVector) -> Result<(CategoryId, AssignmentTrace<T>), Art1Error> {
        if self.templates.is_empty() {
            return Err(Art1Error::NoCategories);
        }
        let norm = self.check_input(x)?;
        let rho = self.config.vigilance;
        let x_norm = T::from_count(norm);
        let mut tested = Vec::new();
        let mut best_overlap: Option<(CategoryId, usize)> = None;
        for (j, act, k) in self.ranked_candidates(x) {
            let m = T::from_count(k) / x_norm;
            tested.push(TestedCategory {
                category: j,
                activation: act,
                match_score: m,
            });
            if m >= rho {
                return Ok((
                    j,
                    AssignmentTrace {
                        chosen_category: j,
                        tested_categories: tested,
                        created_new: false,
                    },
                ));
            }
            match best_overlap {
                Some((bj, bk)) if k < bk || (k == bk && j > bj) => {}
                _ => best_overlap = Some((j, k)),
            }
        }
        let (j, _) = best_overlap.expect("at least one category was tested");
        Ok((
            j,
            AssignmentTrace {
                chosen_category: j,
                tested_categories: tested,
                created_new: false,
            },
        ))
    }

    /// Frozen-weights assignment without a trace.
    pub fn infer(&self, x: &BinaryVector) -> Result<CategoryId, Art1Error> {
        if self.templates.is_empty() {
            return Err(Art1Error::NoCategories);
        }
        let norm = self.check_input(x)?;
        if let Some(j) = self.resonant_category(x, norm) {
            return Ok(j);
        }
        let mut best = (0, 0usize);
        for (j, t) in self.templates.iter().enumerate() {
            let k = x.and_count(t);
            if k > best.1 {
                best = (j, k);
            }
        }
        Ok(best.0)
    }

    /// Frozen-weights assignment of many samples; parallel safe because the
    /// network is only read.
    pub fn infer_all<'a, I>(&self, samples: I) -> Result<Vec<CategoryId>, Art1Error>
    where
        I: IntoIterator<Item = &'a BinaryVector>,
    {
        samples
            .into_iter()
            .enumerate()
            .map(|(index, x)| {
                self.infer(x).map_err(|e| Art1Error::AtSample {
                    index,
                    source: Box::new(e),
                })
            })
            .collect()
    }
}

fn rank_order<T: Scalar>(act_a: T, id_a: usize, act_b: T, id_b: usize) -> Ordering {
    act_b
        .partial_cmp(&act_a)
        .unwrap_or(Ordering::Equal)
        .then(id_a.cmp(&id_b))
}
