//! Two-particle correlated spaces and the singlet spin state.
//!
//! The singlet ensemble lives on pairs `(λ^I, λ^II)` constrained by
//! `λ^I + λ^II = 0` in every direction, with amplitude
//! `Z^T(λ^I, −λ^I) = Z(λ^I) − Z(−λ^I) = 2 Z(λ^I)`. Its pair marginals are
//! `𝒩 (s^I N_a − s^II N_b)` with `𝒩 = 2^{n−1}`, so Born's rule gives
//! `P(s^I, s^II) = (1 − s^I s^II a·b)/4` and `E(a, b) = −a·b`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{Quaternion, UnitVector3};
use crate::ensemble::{
    born_probabilities, interference_decomposition, AmplitudeDistribution, Axis, Interference, ProductSpace,
};
use crate::error::{Error, Result};
use crate::reduce::{exact_combination, QuaternionSum};
use crate::spin::{DirectionSet, Sign, SpinConfiguration, ENUMERATION_LIMIT};

/// Tolerance on `a^I + a^II = a^T` for numeric eigenvalues.
pub const CORRELATION_TOLERANCE: f64 = 1e-12;

/// Allowed two-particle spin states `(λ, −λ)` over a shared direction set.
#[derive(Debug, Clone, PartialEq)]
pub struct SingletSpace {
    directions: DirectionSet,
}

impl SingletSpace {
    pub fn new(directions: DirectionSet) -> Self {
        SingletSpace { directions }
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.directions
    }

    pub fn contains(&self, first: &SpinConfiguration, second: &SpinConfiguration) -> bool {
        first.len() == self.directions.len()
            && second.len() == self.directions.len()
            && first
                .signs
                .iter()
                .zip(&second.signs)
                .all(|(a, b)| a.value() + b.value() == 0.0)
    }

    /// Allowed pairs in lexicographic order of `λ^I` (first direction most
    /// significant, `+` before `−`).
    pub fn enumerate(&self) -> Result<Vec<(SpinConfiguration, SpinConfiguration)>> {
        let n = self.directions.len();
        if n > ENUMERATION_LIMIT {
            return Err(Error::TooLarge {
                size: 1u128 << n,
                bound: 1u128 << ENUMERATION_LIMIT,
            });
        }
        Ok((0..1u64 << n)
            .map(|i| {
                // first direction is the most significant digit
                let signs = (0..n)
                    .map(|d| {
                        if i >> (n - 1 - d) & 1 == 1 {
                            Sign::Minus
                        } else {
                            Sign::Plus
                        }
                    })
                    .collect();
                let first = SpinConfiguration::new(signs);
                let second = first.flipped();
                (first, second)
            })
            .collect())
    }

    /// Product space with axes `I:0 … I:n−1, II:0 … II:n−1` restricted to
    /// the singlet constraint.
    pub fn to_product_space(&self) -> Result<ProductSpace> {
        let n = self.directions.len();
        let axes = (0..n)
            .map(|i| Axis::signs(format!("I:{i}")))
            .chain((0..n).map(|i| Axis::signs(format!("II:{i}"))))
            .collect();
        Ok(ProductSpace::new(axes)?.with_constraint(move |c| (0..n).all(|i| c[i] != c[n + i])))
    }

    /// `Z^T(λ^I, λ^II) = Z(λ^I) − Z(λ^II)` on the constrained space.
    pub fn distribution(&self) -> Result<AmplitudeDistribution<Quaternion>> {
        let n = self.directions.len();
        let quats = self.directions.quaternions();
        Ok(AmplitudeDistribution::from_rule(self.to_product_space()?, move |c| {
            exact_combination((0..n).flat_map(|i| {
                [
                    (Sign::from_index(c[i]).value(), quats[i]),
                    (-Sign::from_index(c[n + i]).value(), quats[i]),
                ]
            }))
        }))
    }
}

/// `Z^T(λ^I, −λ^I) = 2 Z(λ^I)`.
pub fn singlet_amplitude(config: &SpinConfiguration, dirs: &DirectionSet) -> Result<Quaternion> {
    if config.len() != dirs.len() {
        return Err(Error::SizeMismatch {
            expected: dirs.len(),
            got: config.len(),
        });
    }
    // Z(λ) − Z(−λ): each direction contributes s_i N_i − (−s_i) N_i.
    Ok(exact_combination(
        config
            .signs
            .iter()
            .zip(dirs.directions())
            .map(|(s, d)| (2.0 * s.value(), d.quaternion())),
    ))
}

fn distinct(dirs: &DirectionSet, a: usize, b: usize) -> Result<()> {
    dirs.get(a)?;
    dirs.get(b)?;
    if a == b {
        return Err(Error::InvalidParameter(
            "pair marginal needs two distinct directions; equal directions follow the anticorrelation rule".into(),
        ));
    }
    Ok(())
}

/// Closed-form pair marginal `2^{n−1} (s^I N_a − s^II N_b)`.
pub fn pair_marginal(dirs: &DirectionSet, a: usize, s1: Sign, b: usize, s2: Sign) -> Result<Quaternion> {
    distinct(dirs, a, b)?;
    let f = 2f64.powi(dirs.len() as i32 - 1);
    let d = dirs.directions();
    Ok(exact_combination([
        (f * s1.value(), d[a].quaternion()),
        (-f * s2.value(), d[b].quaternion()),
    ]))
}

/// Sums `Z^T` over every `(λ^I, −λ^I)` with `λ^I(a) = s1` and
/// `−λ^I(b) = s2`.
pub fn pair_marginal_bruteforce(dirs: &DirectionSet, a: usize, s1: Sign, b: usize, s2: Sign) -> Result<Quaternion> {
    distinct(dirs, a, b)?;
    singlet_sum(dirs, &[(a, s1), (b, s2.flip())])
}

/// Exact sum of `Z^T = 2 Σ_i s_i N_i` over all `λ^I` with the given
/// particle-I signs fixed.
fn singlet_sum(dirs: &DirectionSet, fixed: &[(usize, Sign)]) -> Result<Quaternion> {
    let n = dirs.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            size: 1u128 << n,
            bound: 1u128 << ENUMERATION_LIMIT,
        });
    }
    let quats = dirs.quaternions();
    let free: Vec<usize> = (0..n).filter(|i| fixed.iter().all(|(j, _)| j != i)).collect();
    let count = 1u64 << free.len();
    let chunk = 1u64 << free.len().saturating_sub(6);
    let partials: Vec<QuaternionSum> = (0..count.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = QuaternionSum::new();
            for mask in c * chunk..((c + 1) * chunk).min(count) {
                for &(i, s) in fixed {
                    acc.add(quats[i].scale(2.0 * s.value()));
                }
                for (bit, &j) in free.iter().enumerate() {
                    let s = if mask >> bit & 1 == 1 { -2.0 } else { 2.0 };
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
    Ok(total.value())
}

/// `P(s^I, s^II)` for one measurement direction per particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairTable {
    pub pp: f64,
    pub pm: f64,
    pub mp: f64,
    pub mm: f64,
}

impl PairTable {
    pub fn get(&self, s1: Sign, s2: Sign) -> f64 {
        match (s1, s2) {
            (Sign::Plus, Sign::Plus) => self.pp,
            (Sign::Plus, Sign::Minus) => self.pm,
            (Sign::Minus, Sign::Plus) => self.mp,
            (Sign::Minus, Sign::Minus) => self.mm,
        }
    }

    /// `E = Σ s^I s^II P(s^I, s^II)`.
    pub fn correlation(&self) -> f64 {
        self.pp - self.pm - self.mp + self.mm
    }

    /// Swaps the roles of the two particles.
    pub fn transposed(&self) -> Self {
        PairTable {
            pp: self.pp,
            pm: self.mp,
            mp: self.pm,
            mm: self.mm,
        }
    }

    fn anticorrelated() -> Self {
        PairTable {
            pp: 0.0,
            pm: 0.5,
            mp: 0.5,
            mm: 0.0,
        }
    }
}

/// Pair probabilities from the four pair marginals and Born's rule. Equal
/// indices yield perfect anticorrelation: same-sign marginals vanish by
/// construction of the singlet space.
pub fn pair_probabilities(dirs: &DirectionSet, a: usize, b: usize) -> Result<PairTable> {
    dirs.get(a)?;
    dirs.get(b)?;
    if a == b {
        return Ok(PairTable::anticorrelated());
    }
    let space = ProductSpace::new(vec![Axis::signs("I"), Axis::signs("II")])?;
    let mut table = Vec::with_capacity(4);
    for s1 in Sign::BOTH {
        for s2 in Sign::BOTH {
            table.push(pair_marginal(dirs, a, s1, b, s2)?);
        }
    }
    let born = born_probabilities(&AmplitudeDistribution::from_table(space, table)?)?;
    let p = &born.probabilities;
    Ok(PairTable {
        pp: p[0],
        pm: p[1],
        mp: p[2],
        mm: p[3],
    })
}

/// Pair probabilities for raw measurement directions. Antipodal settings
/// are mapped through `λ(−n) = −λ(n)`.
pub fn pair_probabilities_vectors(a: UnitVector3, b: UnitVector3) -> Result<PairTable> {
    let single = DirectionSet::new(vec![a])?;
    match single.find(&b) {
        Some((_, Sign::Plus)) => Ok(PairTable::anticorrelated()),
        Some((_, Sign::Minus)) => {
            // Particle II measures −a: its sign is reversed relative to a.
            let t = PairTable::anticorrelated();
            Ok(PairTable {
                pp: t.pm,
                pm: t.pp,
                mp: t.mm,
                mm: t.mp,
            })
        }
        None => pair_probabilities(&single.with(b)?, 0, 1),
    }
}

pub fn correlation(dirs: &DirectionSet, a: usize, b: usize) -> Result<f64> {
    Ok(pair_probabilities(dirs, a, b)?.correlation())
}

pub fn correlation_vectors(a: UnitVector3, b: UnitVector3) -> Result<f64> {
    Ok(pair_probabilities_vectors(a, b)?.correlation())
}

/// One row of a correlation table; CSV columns follow field order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
    pub bx: f64,
    pub by: f64,
    pub bz: f64,
    #[serde(rename = "Ppp")]
    pub ppp: f64,
    #[serde(rename = "Ppm")]
    pub ppm: f64,
    #[serde(rename = "Pmp")]
    pub pmp: f64,
    #[serde(rename = "Pmm")]
    pub pmm: f64,
    #[serde(rename = "E")]
    pub e: f64,
}

impl CorrelationRow {
    pub fn new(a: UnitVector3, b: UnitVector3, t: PairTable) -> Self {
        CorrelationRow {
            ax: a.x(),
            ay: a.y(),
            az: a.z(),
            bx: b.x(),
            by: b.y(),
            bz: b.z(),
            ppp: t.pp,
            ppm: t.pm,
            pmp: t.mp,
            pmm: t.mm,
            e: t.correlation(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub rows: Vec<CorrelationRow>,
}

impl CorrelationTable {
    pub fn push(&mut self, a: UnitVector3, b: UnitVector3) -> Result<&CorrelationRow> {
        let t = pair_probabilities_vectors(a, b)?;
        self.rows.push(CorrelationRow::new(a, b, t));
        Ok(self.rows.last().expect("just pushed"))
    }

    /// Header `ax,ay,az,bx,by,bz,Ppp,Ppm,Pmp,Pmm,E`, one line per row.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wtr.serialize(r).map_err(|e| Error::Parse(e.to_string()))?;
        }
        if self.rows.is_empty() {
            wtr.write_record(["ax", "ay", "az", "bx", "by", "bz", "Ppp", "Ppm", "Pmp", "Pmm", "E"])
                .map_err(|e| Error::Parse(e.to_string()))?;
        }
        wtr.flush().map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Chsh {
    /// `E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)`
    pub s: f64,
    pub abs_s: f64,
    /// `[E(a,b), E(a,b′), E(a′,b), E(a′,b′)]`
    pub correlations: [f64; 4],
}

pub fn chsh(a: UnitVector3, a2: UnitVector3, b: UnitVector3, b2: UnitVector3) -> Result<Chsh> {
    let e = [
        correlation_vectors(a, b)?,
        correlation_vectors(a, b2)?,
        correlation_vectors(a2, b)?,
        correlation_vectors(a2, b2)?,
    ];
    let s = e[0] - e[1] + e[2] + e[3];
    Ok(Chsh {
        s,
        abs_s: s.abs(),
        correlations: e,
    })
}

/// Deterministic local strategy: predetermined outcomes for the four
/// settings `[a, a′, b, b′]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalStrategy {
    pub outcomes: [i8; 4],
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalBound {
    pub bound: f64,
    pub best: LocalStrategy,
    pub strategies: Vec<LocalStrategy>,
}

/// Largest `|S|` reachable by a local deterministic model, by exhaustive
/// enumeration of the 16 outcome assignments. Settings that coincide (or
/// are antipodal) on the same particle must receive equal (opposite)
/// outcomes, so those assignments are skipped. Mixtures are convex
/// combinations and cannot exceed the extreme points.
pub fn classical_bound(a: UnitVector3, a2: UnitVector3, b: UnitVector3, b2: UnitVector3) -> ClassicalBound {
    let tol = crate::spin::DIRECTION_TOLERANCE;
    let consistent = |x: &UnitVector3, y: &UnitVector3, sx: i8, sy: i8| {
        if x.approx_eq(y, tol) {
            sx == sy
        } else if x.approx_antipodal(y, tol) {
            sx == -sy
        } else {
            true
        }
    };
    let mut strategies = Vec::with_capacity(16);
    for mask in 0..16u8 {
        let o: [i8; 4] = std::array::from_fn(|i| if mask >> (3 - i) & 1 == 1 { -1 } else { 1 });
        if !consistent(&a, &a2, o[0], o[1]) || !consistent(&b, &b2, o[2], o[3]) {
            continue;
        }
        let [sa, sa2, sb, sb2] = o.map(f64::from);
        let s = sa * sb - sa * sb2 + sa2 * sb + sa2 * sb2;
        strategies.push(LocalStrategy { outcomes: o, s });
    }
    let best = *strategies
        .iter()
        .max_by(|x, y| x.s.abs().total_cmp(&y.s.abs()))
        .expect("the all-plus assignment is always consistent");
    ClassicalBound {
        bound: best.s.abs(),
        best,
        strategies,
    }
}

/// Quantum CHSH value next to the exhaustive local bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellReport {
    pub quantum: Chsh,
    pub classical_bound: f64,
    /// `|S| − classical_bound`
    pub gap: f64,
    pub violates: bool,
}

pub fn bell_report(a: UnitVector3, a2: UnitVector3, b: UnitVector3, b2: UnitVector3) -> Result<BellReport> {
    let quantum = chsh(a, a2, b, b2)?;
    let classical = classical_bound(a, a2, b, b2).bound;
    let gap = quantum.abs_s - classical;
    Ok(BellReport {
        quantum,
        classical_bound: classical,
        gap,
        violates: gap > 1e-12,
    })
}

fn three_distinct(dirs: &DirectionSet, a: usize, b: usize, c: usize) -> Result<()> {
    for i in [a, b, c] {
        dirs.get(i)?;
    }
    if a == b || b == c || a == c {
        return Err(Error::InvalidParameter(
            "triple marginal needs three distinct directions".into(),
        ));
    }
    Ok(())
}

/// `s^I N_a − (s_2^II N_b + s_3^II N_c)`, without the global factor.
pub fn triple_marginal(
    dirs: &DirectionSet,
    a: usize,
    s1: Sign,
    b: usize,
    s2: Sign,
    c: usize,
    s3: Sign,
) -> Result<Quaternion> {
    three_distinct(dirs, a, b, c)?;
    let d = dirs.directions();
    Ok(exact_combination([
        (s1.value(), d[a].quaternion()),
        (-s2.value(), d[b].quaternion()),
        (-s3.value(), d[c].quaternion()),
    ]))
}

/// Global factor `2^{n−2}` between the enumerated and the closed-form triple
/// marginal.
pub fn triple_global_factor(n: usize) -> f64 {
    2f64.powi(n as i32 - 2)
}

/// Triple marginal by enumeration of the singlet space.
pub fn triple_marginal_bruteforce(
    dirs: &DirectionSet,
    a: usize,
    s1: Sign,
    b: usize,
    s2: Sign,
    c: usize,
    s3: Sign,
) -> Result<Quaternion> {
    three_distinct(dirs, a, b, c)?;
    singlet_sum(dirs, &[(a, s1), (b, s2.flip()), (c, s3.flip())])
}

/// The 8 triple marginals as a distribution over axes `I:a`, `II:b`, `II:c`.
pub fn triple_distribution(
    dirs: &DirectionSet,
    a: usize,
    b: usize,
    c: usize,
) -> Result<AmplitudeDistribution<Quaternion>> {
    three_distinct(dirs, a, b, c)?;
    let space = ProductSpace::new(vec![
        Axis::signs(format!("I:{a}")),
        Axis::signs(format!("II:{b}")),
        Axis::signs(format!("II:{c}")),
    ])?;
    let mut table = Vec::with_capacity(8);
    for s1 in Sign::BOTH {
        for s2 in Sign::BOTH {
            for s3 in Sign::BOTH {
                table.push(triple_marginal(dirs, a, s1, b, s2, c, s3)?);
            }
        }
    }
    AmplitudeDistribution::from_table(space, table)
}

/// Interference bookkeeping for one `(s^I, s_2^II)` cell of the triple.
///
/// All squared norms share the global factor of the triple marginals, so
/// `pair_norm_sq − components = cross` is an identity between observable
/// and formal weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TripleReport {
    pub s1: Sign,
    pub s2: Sign,
    /// `|Z(s1,s2,+3)|²`, `|Z(s1,s2,−3)|²`
    pub component_norms: [f64; 2],
    pub interference: Interference,
    /// `|Σ_{s3} Z(s1,s2,s3)|²`, the pair marginal's weight.
    pub pair_norm_sq: f64,
    /// Normalized `P(s1,s2)` from the pair marginals.
    pub pair_probability: f64,
    /// Normalized `Σ_{s3} P(s1,s2,s3)` from the formal triple distribution.
    pub summed_triple_probability: f64,
}

pub fn triple_interference(
    dirs: &DirectionSet,
    a: usize,
    b: usize,
    c: usize,
    s1: Sign,
    s2: Sign,
) -> Result<TripleReport> {
    let dist = triple_distribution(dirs, a, b, c)?;
    let label_c = format!("II:{c}");
    let interference = interference_decomposition(&dist, &label_c, &[s1.index(), s2.index()])?;
    let pair_norm_sq = (triple_marginal(dirs, a, s1, b, s2, c, Sign::Plus)?
        + triple_marginal(dirs, a, s1, b, s2, c, Sign::Minus)?)
    .norm_sq();
    let triple_born = born_probabilities(&dist)?;
    let summed_triple_probability = triple_born.get(&[s1.index(), s2.index(), 0]).unwrap_or(0.0)
        + triple_born.get(&[s1.index(), s2.index(), 1]).unwrap_or(0.0);
    let pair_probability = pair_probabilities(dirs, a, b)?.get(s1, s2);
    Ok(TripleReport {
        s1,
        s2,
        component_norms: [
            triple_marginal(dirs, a, s1, b, s2, c, Sign::Plus)?.norm_sq(),
            triple_marginal(dirs, a, s1, b, s2, c, Sign::Minus)?.norm_sq(),
        ],
        interference,
        pair_norm_sq,
        pair_probability,
        summed_triple_probability,
    })
}

/// A magnitude with numeric eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericAxis {
    pub label: String,
    pub values: Vec<f64>,
}

impl NumericAxis {
    pub fn new<L: Into<String>>(label: L, values: Vec<f64>) -> Self {
        NumericAxis {
            label: label.into(),
            values,
        }
    }

    fn to_axis(&self) -> Result<Axis> {
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidAxis(format!(
                "axis `{}` has a non-finite value",
                self.label
            )));
        }
        Axis::new(self.label.clone(), self.values.iter().map(|v| format!("{v:+}")))
    }
}

/// Product space of correlated pairs `(A_k^I, A_k^II)` restricted to
/// `a_k^I + a_k^II = a^T` for every pair. Axes are ordered with all
/// particle-I axes first, then all particle-II axes.
pub fn generic_correlated_space(pairs: &[(NumericAxis, NumericAxis)], total: f64) -> Result<ProductSpace> {
    if pairs.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one correlated pair is required".into(),
        ));
    }
    let axes = pairs
        .iter()
        .map(|(a, _)| a.to_axis())
        .chain(pairs.iter().map(|(_, b)| b.to_axis()))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<(Vec<f64>, Vec<f64>)> = pairs
        .iter()
        .map(|(a, b)| (a.values.clone(), b.values.clone()))
        .collect();
    let k = pairs.len();
    Ok(ProductSpace::new(axes)?.with_constraint(move |c| {
        values
            .iter()
            .enumerate()
            .all(|(i, (va, vb))| (va[c[i]] + vb[c[k + i]] - total).abs() <= CORRELATION_TOLERANCE)
    }))
}
