//! Spin-1/2 ensembles over a finite set of directions.
//!
//! An elementary spin state prescribes a sign `s_i` for every direction
//! `n_i` and carries the quaternion amplitude `Z(λ) = Σ_i s_i N(n_i)`.
//! Fixing the sign of one direction selects the ensemble of "spin up along
//! `n_c`"; its two-valued marginal along another direction `n_t` is
//! `2^{n−2}(σ N_c ± N_t)`, whose squared norms `2^{2n−4}·2(1 ± σ n_c·n_t)`
//! give the familiar `cos²(θ/2)` law.
//!
//! Antipodal directions are never stored: `λ(−n) = −λ(n)` fixes them.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Quaternion, UnitVector3};
use crate::ensemble::{born_probabilities, marginalize, AmplitudeDistribution, Axis, ProductSpace};
use crate::error::{Error, Result};
use crate::reduce::{exact_combination, QuaternionSum};

/// Directions closer than this (or to each other's antipode) are rejected.
pub const DIRECTION_TOLERANCE: f64 = 1e-9;

/// Largest direction count handled by exhaustive enumeration.
pub const ENUMERATION_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    /// Position on a [`Axis::signs`] axis.
    pub fn index(self) -> usize {
        match self {
            Sign::Plus => 0,
            Sign::Minus => 1,
        }
    }

    pub fn from_index(i: usize) -> Sign {
        if i == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];
}

impl std::str::FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Sign> {
        match s.trim() {
            "+" | "+1" | "1" | "up" | "plus" => Ok(Sign::Plus),
            "-" | "-1" | "down" | "minus" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("`{other}` is not a sign; use + or -"))),
        }
    }
}

/// Ordered directions with no equal or antipodal pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionSet {
    directions: Vec<UnitVector3>,
}

impl DirectionSet {
    pub fn new(directions: Vec<UnitVector3>) -> Result<Self> {
        if directions.is_empty() {
            return Err(Error::InvalidParameter("direction set is empty".into()));
        }
        for i in 0..directions.len() {
            for j in 0..i {
                let (a, b) = (&directions[j], &directions[i]);
                if a.approx_eq(b, DIRECTION_TOLERANCE) || a.approx_antipodal(b, DIRECTION_TOLERANCE) {
                    return Err(Error::DegenerateDirections(j, i));
                }
            }
        }
        Ok(DirectionSet { directions })
    }

    /// Parses a JSON array of 3-element numeric arrays.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: Vec<[f64; 3]> = serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("direction file must be a JSON array of [x, y, z] triples: {e}")))?;
        let dirs = raw
            .iter()
            .map(|v| UnitVector3::new(v[0], v[1], v[2]))
            .collect::<Result<Vec<_>>>()?;
        DirectionSet::new(dirs)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> String {
        let raw: Vec<[f64; 3]> = self.directions.iter().map(|d| d.to_array()).collect();
        serde_json::to_string(&raw).expect("finite floats serialize")
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn get(&self, i: usize) -> Result<&UnitVector3> {
        self.directions.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.len(),
        })
    }

    pub fn directions(&self) -> &[UnitVector3] {
        &self.directions
    }

    pub fn quaternions(&self) -> Vec<Quaternion> {
        self.directions.iter().map(UnitVector3::quaternion).collect()
    }

    /// Index of a stored direction equal (`Ok(Plus)`) or antipodal
    /// (`Ok(Minus)`) to `n`.
    pub fn find(&self, n: &UnitVector3) -> Option<(usize, Sign)> {
        self.directions.iter().enumerate().find_map(|(i, d)| {
            if d.approx_eq(n, DIRECTION_TOLERANCE) {
                Some((i, Sign::Plus))
            } else if d.approx_antipodal(n, DIRECTION_TOLERANCE) {
                Some((i, Sign::Minus))
            } else {
                None
            }
        })
    }

    /// Copy with `n` appended.
    pub fn with(&self, n: UnitVector3) -> Result<Self> {
        let mut d = self.directions.clone();
        d.push(n);
        DirectionSet::new(d)
    }
}

/// One sign per direction: an elementary spin state restricted to a
/// finite direction set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration {
    pub signs: Vec<Sign>,
}

impl SpinConfiguration {
    pub fn new(signs: Vec<Sign>) -> Self {
        SpinConfiguration { signs }
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    /// Every sign reversed; the state `−λ`.
    pub fn flipped(&self) -> Self {
        SpinConfiguration {
            signs: self.signs.iter().map(|s| s.flip()).collect(),
        }
    }

    /// Bit `i` of `mask` set means direction `i` is `−`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        SpinConfiguration {
            signs: (0..n)
                .map(|i| if mask >> i & 1 == 1 { Sign::Minus } else { Sign::Plus })
                .collect(),
        }
    }
}

impl std::fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.signs.iter().try_for_each(|s| write!(f, "{}", s.symbol()))
    }
}

/// `Z(λ) = Σ_i s_i N(n_i)`, correctly rounded.
pub fn spin_amplitude(config: &SpinConfiguration, dirs: &DirectionSet) -> Result<Quaternion> {
    if config.len() != dirs.len() {
        return Err(Error::SizeMismatch {
            expected: dirs.len(),
            got: config.len(),
        });
    }
    Ok(exact_combination(
        config
            .signs
            .iter()
            .zip(dirs.directions())
            .map(|(s, d)| (s.value(), d.quaternion())),
    ))
}

/// Directions plus sign constraints selecting a sub-ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinEnsemble {
    directions: DirectionSet,
    constraints: Vec<(usize, Sign)>,
}

impl SpinEnsemble {
    pub fn new(directions: DirectionSet) -> Self {
        SpinEnsemble {
            directions,
            constraints: Vec::new(),
        }
    }

    /// Adds `s_index = sign`. Re-adding the same constraint is a no-op.
    pub fn with_constraint(mut self, index: usize, sign: Sign) -> Result<Self> {
        self.directions.get(index)?;
        match self.constraint_of(index) {
            Some(s) if s == sign => Ok(self),
            Some(_) => Err(Error::ConflictingConstraint(index)),
            None => {
                self.constraints.push((index, sign));
                Ok(self)
            }
        }
    }

    /// Ensemble of spin `sign` along `n` alone.
    pub fn polarized(n: UnitVector3, sign: Sign) -> Self {
        SpinEnsemble {
            directions: DirectionSet { directions: vec![n] },
            constraints: vec![(0, sign)],
        }
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn constraints(&self) -> &[(usize, Sign)] {
        &self.constraints
    }

    pub fn constraint_of(&self, index: usize) -> Option<Sign> {
        self.constraints.iter().find(|(i, _)| *i == index).map(|(_, s)| *s)
    }

    pub fn allows(&self, config: &SpinConfiguration) -> bool {
        self.constraints.iter().all(|&(i, s)| config.signs.get(i) == Some(&s))
    }

    /// The ensemble as a generic distribution: one `±` axis per direction
    /// (labelled `s0`, `s1`, …), constraints as the space predicate, and
    /// `Σ s_i N_i` as the amplitude rule.
    pub fn to_distribution(&self) -> Result<AmplitudeDistribution<Quaternion>> {
        let axes = (0..self.directions.len())
            .map(|i| Axis::signs(format!("s{i}")))
            .collect();
        let constraints = self.constraints.clone();
        let space =
            ProductSpace::new(axes)?.with_constraint(move |c| constraints.iter().all(|&(i, s)| c[i] == s.index()));
        let quats = self.directions.quaternions();
        Ok(AmplitudeDistribution::from_rule(space, move |c| {
            exact_combination(c.iter().zip(&quats).map(|(&v, &q)| (Sign::from_index(v).value(), q)))
        }))
    }

    /// Joint marginal over the given direction indices.
    pub fn joint_marginal(&self, axes: &[usize]) -> Result<AmplitudeDistribution<Quaternion>> {
        for &a in axes {
            self.directions.get(a)?;
        }
        let labels: Vec<String> = axes.iter().map(|i| format!("s{i}")).collect();
        let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
        marginalize(&self.to_distribution()?, &refs)
    }
}

/// Exhaustive marginal `(Z(+_t), Z(−_t))`: the sum of `Σ_i s_i N_i` over
/// every configuration allowed by the constraints with `s_t` fixed.
///
/// All terms go through one exact accumulator, so the result is the
/// correctly rounded value of the true sum regardless of enumeration
/// order or thread count.
pub fn ensemble_marginal_bruteforce(ens: &SpinEnsemble, target: usize) -> Result<(Quaternion, Quaternion)> {
    let n = ens.directions.len();
    ens.directions.get(target)?;
    if ens.constraint_of(target).is_some() {
        return Err(Error::TargetConstrained(target));
    }
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            size: 1u128 << n,
            bound: 1u128 << ENUMERATION_LIMIT,
        });
    }
    let quats = ens.directions.quaternions();
    let free: Vec<usize> = (0..n)
        .filter(|&i| i != target && ens.constraint_of(i).is_none())
        .collect();
    let fixed: Vec<(f64, Quaternion)> = ens.constraints.iter().map(|&(i, s)| (s.value(), quats[i])).collect();

    let sum_for = |target_sign: Sign| {
        let count = 1u64 << free.len();
        let chunk = 1u64 << free.len().saturating_sub(6);
        let partials: Vec<QuaternionSum> = (0..count.div_ceil(chunk))
            .into_par_iter()
            .map(|c| {
                let mut acc = QuaternionSum::new();
                for mask in c * chunk..((c + 1) * chunk).min(count) {
                    for &(s, q) in &fixed {
                        acc.add(q.scale(s));
                    }
                    acc.add(quats[target].scale(target_sign.value()));
                    for (bit, &j) in free.iter().enumerate() {
                        let s = if mask >> bit & 1 == 1 { -1.0 } else { 1.0 };
                        acc.add(quats[j].scale(s));
                    }
                }
                acc
            })
            .collect();
        let mut total = QuaternionSum::new();
        for p in &partials {
            total.merge(p);
        }
        total.value()
    };
    Ok((sum_for(Sign::Plus), sum_for(Sign::Minus)))
}

/// Closed-form marginal `2^{n−2}(σ N_c ± N_t)` for a single constraint
/// `s_c = σ`.
pub fn ensemble_marginal_closed(ens: &SpinEnsemble, target: usize) -> Result<(Quaternion, Quaternion)> {
    let n = ens.directions.len();
    ens.directions.get(target)?;
    let &[(c, sigma)] = ens.constraints.as_slice() else {
        return Err(Error::UnsupportedConstraints);
    };
    if c == target {
        return Err(Error::TargetConstrained(target));
    }
    let factor = 2f64.powi(n as i32 - 2);
    let nc = ens.directions.directions[c].quaternion();
    let nt = ens.directions.directions[target].quaternion();
    let plus = exact_combination([(sigma.value() * factor, nc), (factor, nt)]);
    let minus = exact_combination([(sigma.value() * factor, nc), (-factor, nt)]);
    Ok((plus, minus))
}

/// Born probabilities `(P(+), P(−))` of a two-valued marginal.
pub fn sign_probabilities(plus: Quaternion, minus: Quaternion) -> Result<(f64, f64)> {
    let space = ProductSpace::new(vec![Axis::signs("s")])?;
    let table = born_probabilities(&AmplitudeDistribution::from_table(space, vec![plus, minus])?)?;
    Ok((table.probabilities[0], table.probabilities[1]))
}

/// Probability of `+` along `measure` for an ensemble with exactly one
/// constraint, via the closed-form marginal and Born's rule.
pub fn up_probability(ens: &SpinEnsemble, measure: UnitVector3) -> Result<f64> {
    let &[(c, sigma)] = ens.constraints.as_slice() else {
        return Err(Error::UnsupportedConstraints);
    };
    let (dirs, target, orientation) = match ens.directions.find(&measure) {
        Some((i, o)) => (ens.directions.clone(), i, o),
        None => (ens.directions.with(measure)?, ens.directions.len(), Sign::Plus),
    };
    let up_along_stored = if target == c {
        // Repeated measurement of the prepared direction.
        if sigma == Sign::Plus {
            1.0
        } else {
            0.0
        }
    } else {
        let e = SpinEnsemble {
            directions: dirs,
            constraints: ens.constraints.clone(),
        };
        sign_probabilities_of(&e, target)?.0
    };
    Ok(match orientation {
        Sign::Plus => up_along_stored,
        Sign::Minus => 1.0 - up_along_stored,
    })
}

fn sign_probabilities_of(ens: &SpinEnsemble, target: usize) -> Result<(f64, f64)> {
    let (p, m) = ensemble_marginal_closed(ens, target)?;
    sign_probabilities(p, m)
}

/// Draws hidden values on a subset of directions from the Born
/// probabilities of their joint marginal. The returned configuration lists
/// one sign per requested axis, in request order.
#[derive(Debug, Clone)]
pub struct HiddenSampler {
    axes: Vec<usize>,
    outcomes: Vec<SpinConfiguration>,
    cumulative: Vec<f64>,
}

impl HiddenSampler {
    pub fn new(ens: &SpinEnsemble, axes: &[usize]) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidParameter("no measurement axes requested".into()));
        }
        let mut seen = std::collections::HashSet::new();
        if !axes.iter().all(|a| seen.insert(*a)) {
            return Err(Error::InvalidParameter("measurement axes repeat".into()));
        }
        let marginal = ens.joint_marginal(axes)?;
        let born = born_probabilities(&marginal)?;
        let mut cumulative = Vec::with_capacity(born.probabilities.len());
        let mut acc = 0.0;
        for p in &born.probabilities {
            acc += p;
            cumulative.push(acc);
        }
        let outcomes = born
            .configurations
            .iter()
            .map(|c| SpinConfiguration::new(c.iter().map(|&v| Sign::from_index(v)).collect()))
            .collect();
        Ok(HiddenSampler {
            axes: axes.to_vec(),
            outcomes,
            cumulative,
        })
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    /// Outcomes with their Born probabilities.
    pub fn distribution(&self) -> Vec<(SpinConfiguration, f64)> {
        let mut prev = 0.0;
        self.outcomes
            .iter()
            .zip(&self.cumulative)
            .map(|(o, &c)| {
                let p = c - prev;
                prev = c;
                (o.clone(), p)
            })
            .collect()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SpinConfiguration {
        let total = *self.cumulative.last().expect("non-empty");
        let u: f64 = rng.gen::<f64>() * total;
        let i = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.outcomes.len() - 1);
        self.outcomes[i].clone()
    }

    /// `count` draws from a ChaCha8 stream seeded with `seed`.
    pub fn sample_many(&self, count: usize, seed: u64) -> Vec<SpinConfiguration> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }
}

pub fn sample_hidden_config(ens: &SpinEnsemble, axes: &[usize], seed: u64) -> Result<SpinConfiguration> {
    let sampler = HiddenSampler::new(ens, axes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sampler.sample(&mut rng))
}
