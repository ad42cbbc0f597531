//! Potential families and the finite-difference decay diagnostics that feed
//! the commutator bounds.
//!
//! The first-difference profile `s(r)` tracks the largest jump of `q`
//! between spheres `r` and `r + 1`; decay `o(1/r)` of these jumps makes
//! `[q, iA]` compact. The second-difference profile `t(r)` tracks
//! `|q(v) + q(z) - 2 q(w)|` over neighbor triples `v - w - z` spanning two
//! levels; decay `O(1/r^2)` keeps the double commutator bounded. At finite
//! depth the verdicts are explicitly heuristic: tests pin the profile
//! values, never the verdicts.

use crate::operator::SymmetricOperator;
use crate::tree::TreeGeometry;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialFamily {
    /// `q(v) = c (1 + |v|)^(-beta)`
    PowerRadial { c: f64, beta: f64 },
    /// `q(v) = c / ln(2 + |v|)`
    LogRadial { c: f64 },
    /// `q(v) = c (-1)^|v| (1 + |v|)^(-beta)`
    Alternating { c: f64, beta: f64 },
    /// 1 at the root, 0 elsewhere.
    RootDefect,
    Custom(String),
}

impl fmt::Display for PotentialFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialFamily::PowerRadial { c, beta } => write!(f, "power:{c},{beta}"),
            PotentialFamily::LogRadial { c } => write!(f, "log:{c}"),
            PotentialFamily::Alternating { c, beta } => write!(f, "alternating:{c},{beta}"),
            PotentialFamily::RootDefect => write!(f, "rootdefect"),
            PotentialFamily::Custom(label) => write!(f, "{label}"),
        }
    }
}

/// Decay class claimed for a potential, in decreasing strength: first
/// differences `o(1/r)`, second differences `O(1/r^2)`, plain decay, none.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayClass {
    FirstDiffLittleO,
    SecondDiffBigO,
    DecayingOnly,
    None,
}

#[derive(Debug, Clone)]
pub struct Potential {
    values: Vec<f64>,
    family: PotentialFamily,
    decay_class: DecayClass,
}

impl Potential {
    fn radial(g: &TreeGeometry, family: PotentialFamily, decay: DecayClass, f: impl Fn(usize) -> f64) -> Self {
        let values = g.vertices().map(|v| f(v.level())).collect();
        Potential {
            values,
            family,
            decay_class: decay,
        }
    }

    pub fn power_radial(g: &TreeGeometry, c: f64, beta: f64) -> Self {
        Self::radial(
            g,
            PotentialFamily::PowerRadial { c, beta },
            DecayClass::FirstDiffLittleO,
            move |r| c * (1.0 + r as f64).powf(-beta),
        )
    }

    pub fn log_radial(g: &TreeGeometry, c: f64) -> Self {
        Self::radial(
            g,
            PotentialFamily::LogRadial { c },
            DecayClass::FirstDiffLittleO,
            move |r| c / (2.0 + r as f64).ln(),
        )
    }

    pub fn alternating(g: &TreeGeometry, c: f64, beta: f64) -> Self {
        Self::radial(
            g,
            PotentialFamily::Alternating { c, beta },
            DecayClass::DecayingOnly,
            move |r| c * if r % 2 == 0 { 1.0 } else { -1.0 } * (1.0 + r as f64).powf(-beta),
        )
    }

    pub fn root_defect(g: &TreeGeometry) -> Self {
        Self::radial(
            g,
            PotentialFamily::RootDefect,
            DecayClass::FirstDiffLittleO,
            |r| if r == 0 { 1.0 } else { 0.0 },
        )
    }

    pub fn zero(g: &TreeGeometry) -> Self {
        Potential {
            values: vec![0.0; g.vertex_count()],
            family: PotentialFamily::Custom("none".into()),
            decay_class: DecayClass::FirstDiffLittleO,
        }
    }

    pub fn constant(g: &TreeGeometry, c: f64) -> Self {
        Potential {
            values: vec![c; g.vertex_count()],
            family: PotentialFamily::Custom(format!("constant:{c}")),
            decay_class: DecayClass::FirstDiffLittleO,
        }
    }

    pub fn custom(values: Vec<f64>, label: impl Into<String>, decay_class: DecayClass) -> Self {
        Potential {
            values,
            family: PotentialFamily::Custom(label.into()),
            decay_class,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay_class
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn negated(&self) -> Potential {
        Potential {
            values: self.values.iter().map(|x| -x).collect(),
            family: PotentialFamily::Custom(format!("-({})", self.family)),
            decay_class: self.decay_class,
        }
    }

    pub fn plus(&self, other: &Potential) -> Potential {
        assert_eq!(self.values.len(), other.values.len());
        Potential {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            family: PotentialFamily::Custom(format!("({})+({})", self.family, other.family)),
            decay_class: self.decay_class,
        }
    }

    /// Multiplication operator `q` as a diagonal matrix.
    pub fn as_operator(&self) -> SymmetricOperator {
        SymmetricOperator::diagonal(&self.values)
    }
}

/// First-difference profile `s(r) = max |q(v) - q(w)|` over `v` in `S_r`,
/// `w` in `S_(r+1)`, for `r = 0..D-1`. The sup is taken sphere-to-sphere
/// without requiring adjacency; for radial families the two readings agree.
pub fn first_difference_profile(g: &TreeGeometry, q: &Potential) -> Vec<f64> {
    let depth = g.depth();
    let mut profile = Vec::with_capacity(depth);
    for r in 0..depth {
        let inner = g.sphere(r).expect("radius in range");
        let outer = g.sphere(r + 1).expect("radius in range");
        let mut sup = 0.0f64;
        for &v in &inner {
            let qv = q.values()[g.array_index(v)];
            for &w in &outer {
                sup = sup.max((qv - q.values()[g.array_index(w)]).abs());
            }
        }
        profile.push(sup);
    }
    profile
}

/// Largest jump of `q` seen from sphere `r` toward either neighbor sphere,
/// assembled from the outward profile: `max(s(r-1), s(r))`.
pub fn both_sided_difference(profile: &[f64], r: usize) -> f64 {
    let inward = if r == 0 { 0.0 } else { profile[r - 1] };
    let outward = profile.get(r).copied().unwrap_or(0.0);
    inward.max(outward)
}

/// Second-difference profile: `t(r) = max |q(v) + q(z) - 2 q(w)|` over
/// neighbor triples `v - w - z` with `|w| = |v| +- 1` and `|z| = |v| +- 2`.
/// Radii with no admissible triple are skipped.
pub fn second_difference_profile(g: &TreeGeometry, q: &Potential) -> Vec<(usize, f64)> {
    let mut profile = Vec::new();
    for r in 0..=g.depth() {
        let mut sup: Option<f64> = None;
        for v in g.sphere(r).expect("radius in range") {
            let qv = q.values()[g.array_index(v)];
            for w in g.neighbors(v) {
                let qw = q.values()[g.array_index(w)];
                for z in g.neighbors(w) {
                    if z.level().abs_diff(r) != 2 {
                        continue;
                    }
                    let qz = q.values()[g.array_index(z)];
                    let value = (qv + qz - 2.0 * qw).abs();
                    sup = Some(sup.map_or(value, |s: f64| s.max(value)));
                }
            }
        }
        if let Some(sup) = sup {
            profile.push((r, sup));
        }
    }
    profile
}

/// Finite-scale decay verdicts. These are reported heuristics: `o` and `O`
/// are asymptotic statements no finite depth can certify.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayVerdict {
    Consistent,
    Fails,
}

impl fmt::Display for DecayVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayVerdict::Consistent => write!(f, "consistent"),
            DecayVerdict::Fails => write!(f, "fails"),
        }
    }
}

/// Consistent with `s(r) = o(1/r)` iff `r * s(r)` is nonincreasing over the
/// top half of the available radii.
pub fn first_difference_verdict(profile: &[f64]) -> DecayVerdict {
    let scaled: Vec<f64> = profile
        .iter()
        .enumerate()
        .map(|(r, &s)| r as f64 * s)
        .collect();
    let start = scaled.len() / 2;
    let tail = &scaled[start..];
    for pair in tail.windows(2) {
        if pair[1] > pair[0] + 1e-12 * (1.0 + pair[0].abs()) {
            return DecayVerdict::Fails;
        }
    }
    DecayVerdict::Consistent
}

/// Consistent with `t(r) = O(1/r^2)` iff `r^2 t(r)` stays within twice its
/// median over the available radii.
pub fn second_difference_verdict(profile: &[(usize, f64)]) -> DecayVerdict {
    if profile.is_empty() {
        return DecayVerdict::Consistent;
    }
    let scaled: Vec<f64> = profile
        .iter()
        .map(|&(r, t)| (r as f64) * (r as f64) * t)
        .collect();
    let mut sorted = scaled.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2]
    } else {
        0.5 * (sorted[sorted.len() / 2 - 1] + sorted[sorted.len() / 2])
    };
    let max = scaled.iter().fold(0.0f64, |m, &v| m.max(v));
    if max <= 2.0 * median + 1e-12 {
        DecayVerdict::Consistent
    } else {
        DecayVerdict::Fails
    }
}
