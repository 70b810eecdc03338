//! Finite product phase spaces and amplitude distributions over them.
//!
//! A [`ProductSpace`] is the Cartesian product of finite [`Axis`] value
//! sets, optionally restricted by a constraint predicate. An
//! [`AmplitudeDistribution`] assigns an amplitude (complex or quaternion) to
//! every allowed configuration. Observable statistics are obtained in two
//! steps: sum the amplitude over the discarded axes ([`marginalize`]), then
//! square ([`born_probabilities`]). Because squaring does not commute with
//! summation, probabilities of coarser marginals are not sums of finer ones;
//! [`interference_decomposition`] isolates the difference.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::AmplitudeScalar;
use crate::error::{Error, Result};
use crate::reduce::{tree_reduce, ExactSum};

/// Largest configuration count stored as a dense table or enumerated.
pub const DENSE_BOUND: u128 = 1 << 24;

/// Threshold on [`projective_distance`] below which two vectors are the same ray.
pub const PROJECTIVE_TOLERANCE: f64 = 1e-10;

/// One magnitude and its finite list of outcome labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Axis {
    label: String,
    values: Vec<String>,
}

impl Axis {
    pub fn new<L: Into<String>, V: Into<String>>(label: L, values: impl IntoIterator<Item = V>) -> Result<Self> {
        let label = label.into();
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err(Error::InvalidAxis(format!("axis `{label}` has no values")));
        }
        let mut seen = HashSet::new();
        for v in &values {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidAxis(format!("axis `{label}` repeats value `{v}`")));
            }
        }
        Ok(Axis { label, values })
    }

    /// Two-valued spin axis with values `+` (index 0) and `-` (index 1).
    pub fn signs<L: Into<String>>(label: L) -> Self {
        Axis {
            label: label.into(),
            values: vec!["+".into(), "-".into()],
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

pub type Constraint = Arc<dyn Fn(&[usize]) -> bool + Send + Sync>;

/// Product of axes with an optional predicate selecting allowed configurations.
#[derive(Clone)]
pub struct ProductSpace {
    axes: Vec<Axis>,
    constraint: Option<Constraint>,
}

impl fmt::Debug for ProductSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductSpace")
            .field("axes", &self.axes)
            .field("constrained", &self.constraint.is_some())
            .finish()
    }
}

impl ProductSpace {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidAxis("a product space needs at least one axis".into()));
        }
        let mut seen = HashSet::new();
        for a in &axes {
            if !seen.insert(a.label.clone()) {
                return Err(Error::InvalidAxis(format!("duplicate axis label `{}`", a.label)));
            }
        }
        Ok(ProductSpace { axes, constraint: None })
    }

    /// Restricts the space to configurations satisfying `pred` (conjoined
    /// with any existing constraint).
    pub fn with_constraint<F>(mut self, pred: F) -> Self
    where
        F: Fn(&[usize]) -> bool + Send + Sync + 'static,
    {
        self.constraint = Some(match self.constraint.take() {
            None => Arc::new(pred),
            Some(prev) => Arc::new(move |c: &[usize]| prev(c) && pred(c)),
        });
        self
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn is_constrained(&self) -> bool {
        self.constraint.is_some()
    }

    pub fn axis_position(&self, label: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.label == label)
            .ok_or_else(|| Error::UnknownAxis(label.to_string()))
    }

    /// Size of the unconstrained product.
    pub fn total_size(&self) -> u128 {
        self.axes.iter().map(|a| a.len() as u128).product()
    }

    pub fn in_range(&self, config: &[usize]) -> bool {
        config.len() == self.axes.len() && config.iter().zip(&self.axes).all(|(&i, a)| i < a.len())
    }

    pub fn is_allowed(&self, config: &[usize]) -> bool {
        self.in_range(config) && self.constraint.as_ref().is_none_or(|c| c(config))
    }

    /// Mixed-radix position of `config`, first axis most significant.
    pub fn linear_index(&self, config: &[usize]) -> usize {
        config.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.len() + i)
    }

    /// Inverse of [`linear_index`](Self::linear_index), written into `out`.
    pub fn config_at(&self, mut index: usize, out: &mut [usize]) {
        for (slot, a) in out.iter_mut().zip(&self.axes).rev() {
            *slot = index % a.len();
            index /= a.len();
        }
    }

    fn enumeration_size(&self) -> Result<usize> {
        let size = self.total_size();
        if size > DENSE_BOUND {
            return Err(Error::TooLarge {
                size,
                bound: DENSE_BOUND,
            });
        }
        Ok(size as usize)
    }

    /// Allowed configurations in lexicographic order of axis indices.
    pub fn configurations(&self) -> Result<Configurations<'_>> {
        let size = self.enumeration_size()?;
        Ok(Configurations {
            space: self,
            next: 0,
            size,
        })
    }

    /// Parses one value label per axis.
    pub fn configuration(&self, labels: &[&str]) -> Result<Vec<usize>> {
        if labels.len() != self.axes.len() {
            return Err(Error::SizeMismatch {
                expected: self.axes.len(),
                got: labels.len(),
            });
        }
        labels
            .iter()
            .zip(&self.axes)
            .map(|(l, a)| {
                a.index_of(l)
                    .ok_or_else(|| Error::InvalidConfiguration(format!("`{l}` is not a value of axis `{}`", a.label)))
            })
            .collect()
    }
}

/// Iterator over the allowed configurations of a [`ProductSpace`].
pub struct Configurations<'a> {
    space: &'a ProductSpace,
    next: usize,
    size: usize,
}

impl Iterator for Configurations<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let mut config = vec![0; self.space.axes.len()];
        while self.next < self.size {
            self.space.config_at(self.next, &mut config);
            self.next += 1;
            if self.space.is_allowed(&config) {
                return Some(config);
            }
        }
        None
    }
}

type Rule<A> = Arc<dyn Fn(&[usize]) -> A + Send + Sync>;

#[derive(Clone)]
enum Storage<A> {
    Table(Vec<A>),
    Rule(Rule<A>),
}

/// Amplitude assignment on a product space; zero outside the allowed set.
#[derive(Clone)]
pub struct AmplitudeDistribution<A: AmplitudeScalar> {
    space: ProductSpace,
    storage: Storage<A>,
}

impl<A: AmplitudeScalar> fmt::Debug for AmplitudeDistribution<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("AmplitudeDistribution");
        d.field("space", &self.space);
        match &self.storage {
            Storage::Table(t) => d.field("table", t),
            Storage::Rule(_) => d.field("rule", &"<closure>"),
        };
        d.finish()
    }
}

impl<A: AmplitudeScalar> AmplitudeDistribution<A> {
    /// Dense table indexed by [`ProductSpace::linear_index`].
    pub fn from_table(space: ProductSpace, table: Vec<A>) -> Result<Self> {
        let size = space.enumeration_size()?;
        if table.len() != size {
            return Err(Error::SizeMismatch {
                expected: size,
                got: table.len(),
            });
        }
        Ok(AmplitudeDistribution {
            space,
            storage: Storage::Table(table),
        })
    }

    /// Closed-form rule, evaluated lazily; works beyond [`DENSE_BOUND`].
    pub fn from_rule<F>(space: ProductSpace, rule: F) -> Self
    where
        F: Fn(&[usize]) -> A + Send + Sync + 'static,
    {
        AmplitudeDistribution {
            space,
            storage: Storage::Rule(Arc::new(rule)),
        }
    }

    pub fn space(&self) -> &ProductSpace {
        &self.space
    }

    pub fn is_tabulated(&self) -> bool {
        matches!(self.storage, Storage::Table(_))
    }

    pub fn amplitude(&self, config: &[usize]) -> A {
        if !self.space.is_allowed(config) {
            return A::zero();
        }
        match &self.storage {
            Storage::Table(t) => t[self.space.linear_index(config)],
            Storage::Rule(r) => r(config),
        }
    }

    /// Amplitude addressed by value labels.
    pub fn amplitude_of(&self, labels: &[&str]) -> Result<A> {
        Ok(self.amplitude(&self.space.configuration(labels)?))
    }

    /// Materializes a rule into a dense table.
    pub fn tabulate(&self) -> Result<Self> {
        let size = self.space.enumeration_size()?;
        let n = self.space.axes.len();
        let table = (0..size)
            .into_par_iter()
            .map(|i| {
                let mut c = vec![0; n];
                self.space.config_at(i, &mut c);
                self.amplitude(&c)
            })
            .collect();
        Ok(AmplitudeDistribution {
            space: self.space.clone(),
            storage: Storage::Table(table),
        })
    }

    /// Allowed configurations with their amplitudes, lexicographic order.
    pub fn entries(&self) -> Result<Vec<(Vec<usize>, A)>> {
        Ok(self
            .space
            .configurations()?
            .map(|c| {
                let a = self.amplitude(&c);
                (c, a)
            })
            .collect())
    }

    /// Multiplies every amplitude by `s` on the left.
    pub fn left_scaled(&self, s: A) -> Result<Self> {
        let t = self.tabulate()?;
        let Storage::Table(table) = t.storage else {
            unreachable!()
        };
        let table = table.into_iter().map(|a| s.mul(a)).collect();
        AmplitudeDistribution::from_table(self.space.clone(), table)
    }
}

/// Summation order used by [`marginalize_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Single pass in lexicographic configuration order.
    #[default]
    Sequential,
    /// Fixed-size chunks summed in parallel, combined pairwise in a
    /// balanced tree whose shape depends only on the sizes involved.
    Tree,
}

pub fn marginalize<A: AmplitudeScalar>(
    dist: &AmplitudeDistribution<A>,
    keep: &[&str],
) -> Result<AmplitudeDistribution<A>> {
    marginalize_with(dist, keep, Reduction::Sequential)
}

/// Marginal amplitude over the `keep` axes (in the given order): the sum of
/// `dist` over every allowed configuration projecting onto each kept value.
pub fn marginalize_with<A: AmplitudeScalar>(
    dist: &AmplitudeDistribution<A>,
    keep: &[&str],
    reduction: Reduction,
) -> Result<AmplitudeDistribution<A>> {
    if keep.is_empty() {
        return Err(Error::InvalidAxis("marginal must keep at least one axis".into()));
    }
    let space = dist.space();
    let positions: Vec<usize> = keep.iter().map(|l| space.axis_position(l)).collect::<Result<_>>()?;
    let kept_axes: Vec<Axis> = positions.iter().map(|&p| space.axes[p].clone()).collect();
    let out_space = ProductSpace::new(kept_axes)?;
    let out_size = out_space.enumeration_size()?;
    let size = space.enumeration_size()?;
    let n = space.axes.len();

    let accumulate = |range: std::ops::Range<usize>| {
        let mut acc = vec![A::zero(); out_size];
        let mut c = vec![0; n];
        let mut k = vec![0; positions.len()];
        for i in range {
            space.config_at(i, &mut c);
            if !space.is_allowed(&c) {
                continue;
            }
            for (slot, &p) in k.iter_mut().zip(&positions) {
                *slot = c[p];
            }
            let j = out_space.linear_index(&k);
            acc[j] = acc[j] + dist.amplitude(&c);
        }
        acc
    };

    let table = match reduction {
        Reduction::Sequential => accumulate(0..size),
        Reduction::Tree => {
            // Chunk count is a function of the sizes only.
            let chunks = (64usize).min(((1usize << 22) / out_size).max(1)).min(size.max(1));
            let step = size.div_ceil(chunks);
            let partial: Vec<Vec<A>> = (0..chunks)
                .into_par_iter()
                .map(|c| accumulate(c * step..((c + 1) * step).min(size)))
                .collect();
            tree_reduce(&partial, vec![A::zero(); out_size], &|l: &Vec<A>, r: &Vec<A>| {
                l.iter().zip(r).map(|(&a, &b)| a + b).collect()
            })
        }
    };
    AmplitudeDistribution::from_table(out_space, table)
}

/// Born-rule probabilities over the allowed configurations of a distribution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BornTable {
    pub axes: Vec<String>,
    pub configurations: Vec<Vec<usize>>,
    pub probabilities: Vec<f64>,
}

impl BornTable {
    pub fn get(&self, config: &[usize]) -> Option<f64> {
        self.configurations
            .iter()
            .position(|c| c == config)
            .map(|i| self.probabilities[i])
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }
}

/// `p(λ) = |Z(λ)|² / Σ |Z|²`.
pub fn born_probabilities<A: AmplitudeScalar>(marginal: &AmplitudeDistribution<A>) -> Result<BornTable> {
    let entries = marginal.entries()?;
    let weights: Vec<f64> = entries.iter().map(|(_, a)| a.norm_sq()).collect();
    let mut total = ExactSum::new();
    total.extend(weights.iter().copied());
    let total = total.value();
    if total == 0.0 || !total.is_finite() {
        return Err(Error::NullEnsemble);
    }
    Ok(BornTable {
        axes: marginal.space().axes().iter().map(|a| a.label.clone()).collect(),
        probabilities: weights.iter().map(|w| w / total).collect(),
        configurations: entries.into_iter().map(|(c, _)| c).collect(),
    })
}

/// Split of `|Σ_k Z_k|²` into the incoherent part `Σ_k |Z_k|²` and the
/// cross term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interference {
    /// `Σ_k |Z_k|²`
    pub components: f64,
    /// `|Σ_k Z_k|² − Σ_k |Z_k|²`
    pub cross: f64,
    /// `|Σ_k Z_k|²`
    pub total: f64,
    /// `Σ_{k≠k'} Re(Z_k* Z_k')`, the cross term expanded pair by pair.
    pub bracket: f64,
}

/// Decomposes the marginal at `at` (one index per axis other than
/// `summed_axis`, in space order) into component and cross terms.
pub fn interference_decomposition<A: AmplitudeScalar>(
    dist: &AmplitudeDistribution<A>,
    summed_axis: &str,
    at: &[usize],
) -> Result<Interference> {
    let space = dist.space();
    let s = space.axis_position(summed_axis)?;
    let n = space.axes.len();
    if at.len() + 1 != n {
        return Err(Error::SizeMismatch {
            expected: n - 1,
            got: at.len(),
        });
    }
    let mut config: Vec<usize> = Vec::with_capacity(n);
    config.extend_from_slice(&at[..s]);
    config.push(0);
    config.extend_from_slice(&at[s..]);
    for (i, (&ci, a)) in config.iter().zip(space.axes()).enumerate() {
        if i != s && ci >= a.len() {
            return Err(Error::InvalidConfiguration(format!(
                "index {ci} out of range for axis `{}`",
                a.label
            )));
        }
    }
    let parts: Vec<A> = (0..space.axes[s].len())
        .map(|k| {
            config[s] = k;
            dist.amplitude(&config)
        })
        .collect();
    let components: f64 = parts.iter().map(|z| z.norm_sq()).sum();
    let total = parts.iter().fold(A::zero(), |acc, &z| acc + z).norm_sq();
    let mut bracket = 0.0;
    for (i, zi) in parts.iter().enumerate() {
        for (j, zj) in parts.iter().enumerate() {
            if i != j {
                bracket += zi.re_inner(*zj);
            }
        }
    }
    Ok(Interference {
        components,
        cross: total - components,
        total,
        bracket,
    })
}

/// Unit complex state vector `𝒩·Z` over the marginal's allowed
/// configurations (lexicographic order).
pub fn reconstruct_state<A: AmplitudeScalar>(marginal: &AmplitudeDistribution<A>) -> Result<Vec<Complex64>> {
    let amps = marginal
        .entries()?
        .into_iter()
        .map(|(_, a)| a.as_complex().ok_or(Error::NotComplex))
        .collect::<Result<Vec<_>>>()?;
    normalize_state(&amps)
}

/// Scales a complex vector to unit Euclidean norm.
pub fn normalize_state(amps: &[Complex64]) -> Result<Vec<Complex64>> {
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::NullEnsemble);
    }
    Ok(amps.iter().map(|z| z / norm).collect())
}

/// `1 − |⟨u,v⟩| / (‖u‖‖v‖)`; zero iff `u` and `v` span the same ray.
pub fn projective_distance(u: &[Complex64], v: &[Complex64]) -> f64 {
    assert_eq!(u.len(), v.len(), "projective_distance on vectors of different length");
    let inner: Complex64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 1.0;
    }
    (1.0 - inner.norm() / (nu * nv)).max(0.0)
}

pub fn projectively_equal(u: &[Complex64], v: &[Complex64]) -> bool {
    projective_distance(u, v) <= PROJECTIVE_TOLERANCE
}
