//! JSON descriptions of summand sets.
//!
//! A set is described by a tagged fragment such as
//! `{"kind":"unit_fractions"}`,
//! `{"kind":"weighted","A":["1","3"],"B":{"kind":"geometric","start":"2","ratio":"2"}}`,
//! `{"kind":"finite","elements":["1"]}`, `{"kind":"negate","of":…}` or
//! `{"kind":"union","of":[…,…]}`. All numeric literals are exact
//! strings; a float anywhere is a parse error by design.
//!
//! Building is group-directed: [`BuildableGroup::build_set`] is
//! implemented per instance, so the rational-only families are rejected
//! on other groups at build time with a precise error instead of a
//! panic deep in arithmetic.

use serde::Deserialize;
use thiserror::Error;

use crate::group::{GroupError, Integers, LexPairs, OrderedGroup, Rationals};
use crate::lcf0::{
    finite_set, negate, union, unit_fractions, weighted, BoundStream, Lcf0Error, Lcf0Set,
    WeightedSpec,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind")]
pub enum SetConfig {
    #[serde(rename = "unit_fractions")]
    UnitFractions,
    #[serde(rename = "weighted")]
    Weighted {
        #[serde(rename = "A")]
        numerators: Vec<String>,
        #[serde(rename = "B")]
        denominators: StreamConfig,
    },
    #[serde(rename = "finite")]
    Finite { elements: Vec<String> },
    #[serde(rename = "negate")]
    Negate { of: Box<SetConfig> },
    #[serde(rename = "union")]
    Union { of: Vec<SetConfig> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind")]
pub enum StreamConfig {
    #[serde(rename = "geometric")]
    Geometric { start: String, ratio: String },
    #[serde(rename = "arithmetic")]
    Arithmetic { start: String, step: String },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("set kind {kind:?} is only available on the {wanted} group, not {got}")]
    WrongGroup {
        kind: &'static str,
        wanted: &'static str,
        got: &'static str,
    },
    #[error("union needs at least two branches")]
    UnionArity,
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Set(#[from] Lcf0Error),
}

/// Group instances that know how to realize [`SetConfig`] fragments.
pub trait BuildableGroup: OrderedGroup {
    fn build_set(&self, config: &SetConfig) -> Result<Lcf0Set<Self>, ConfigError>;
}

/// The group-agnostic kinds: finite lists, negation, union. Returns
/// `None` for kinds the caller must handle itself.
fn build_common<G: BuildableGroup>(
    group: &G,
    config: &SetConfig,
) -> Result<Option<Lcf0Set<G>>, ConfigError> {
    Ok(Some(match config {
        SetConfig::Finite { elements } => {
            let elems = elements
                .iter()
                .map(|s| group.parse_elem(s))
                .collect::<Result<Vec<_>, _>>()?;
            finite_set(group.clone(), elems)?
        }
        SetConfig::Negate { of } => negate(&group.build_set(of)?),
        SetConfig::Union { of } => {
            if of.len() < 2 {
                return Err(ConfigError::UnionArity);
            }
            let mut built = of.iter().map(|c| group.build_set(c));
            let first = built.next().expect("len checked")?;
            let mut acc = first;
            for next in built {
                acc = union(&acc, &next?);
            }
            acc
        }
        _ => return Ok(None),
    }))
}

fn parse_stream(config: &StreamConfig) -> Result<BoundStream, GroupError> {
    let q = |s: &str| crate::group::parse_rational("rationals", s);
    Ok(match config {
        StreamConfig::Geometric { start, ratio } => BoundStream::Geometric {
            start: q(start)?,
            ratio: q(ratio)?,
        },
        StreamConfig::Arithmetic { start, step } => BoundStream::Arithmetic {
            start: q(start)?,
            step: q(step)?,
        },
    })
}

impl BuildableGroup for Rationals {
    fn build_set(&self, config: &SetConfig) -> Result<Lcf0Set<Self>, ConfigError> {
        if let Some(set) = build_common(self, config)? {
            return Ok(set);
        }
        Ok(match config {
            SetConfig::UnitFractions => unit_fractions(),
            SetConfig::Weighted {
                numerators,
                denominators,
            } => {
                let a = numerators
                    .iter()
                    .map(|s| self.parse_elem(s))
                    .collect::<Result<Vec<_>, _>>()?;
                let b = parse_stream(denominators)?;
                weighted(WeightedSpec::new(a, b)?)
            }
            _ => unreachable!("common kinds already handled"),
        })
    }
}

fn rationals_only<G: OrderedGroup>(group: &G, config: &SetConfig) -> ConfigError {
    let kind = match config {
        SetConfig::UnitFractions => "unit_fractions",
        SetConfig::Weighted { .. } => "weighted",
        _ => unreachable!("only called for rational-only kinds"),
    };
    ConfigError::WrongGroup {
        kind,
        wanted: "rationals",
        got: group.name(),
    }
}

impl BuildableGroup for Integers {
    fn build_set(&self, config: &SetConfig) -> Result<Lcf0Set<Self>, ConfigError> {
        match build_common(self, config)? {
            Some(set) => Ok(set),
            None => Err(rationals_only(self, config)),
        }
    }
}

impl BuildableGroup for LexPairs {
    fn build_set(&self, config: &SetConfig) -> Result<Lcf0Set<Self>, ConfigError> {
        match build_common(self, config)? {
            Some(set) => Ok(set),
            None => Err(rationals_only(self, config)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{make_integers, make_lex_pairs, make_rationals, parse_rational};

    fn parse(json: &str) -> SetConfig {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn unit_fraction_fragment_builds() {
        let set = make_rationals()
            .build_set(&parse(r#"{"kind":"unit_fractions"}"#))
            .unwrap();
        assert_eq!(set.truncate(1).len(), 2);
    }

    #[test]
    fn weighted_fragment_matches_direct_construction() {
        let cfg = parse(
            r#"{"kind":"weighted","A":["1","3"],"B":{"kind":"geometric","start":"2","ratio":"2"}}"#,
        );
        let set = make_rationals().build_set(&cfg).unwrap();
        let expected: Vec<_> = ["3/8", "1/2", "3/4", "3/2"]
            .iter()
            .map(|s| parse_rational("test", s).unwrap())
            .collect();
        // 1/4 itself (a=1, b=4) sits on the ε = 1/4 boundary and stays out
        let at_two = set.truncate(2);
        assert_eq!(at_two.len(), expected.len());
        for e in &expected {
            assert!(at_two.contains(e), "missing {e}");
        }
    }

    #[test]
    fn nested_combinators_build() {
        let cfg = parse(
            r#"{"kind":"union","of":[{"kind":"negate","of":{"kind":"finite","elements":["1/2"]}},{"kind":"unit_fractions"}]}"#,
        );
        let set = make_rationals().build_set(&cfg).unwrap();
        assert_eq!(set.contains(&parse_rational("t", "-1/2").unwrap()), Some(true));
        assert_eq!(set.contains(&parse_rational("t", "1/7").unwrap()), Some(true));
    }

    #[test]
    fn lex_pair_elements_parse_in_finite_fragments() {
        let cfg = parse(r#"{"kind":"finite","elements":["(0,1)","(1,-2)"]}"#);
        let set = make_lex_pairs().build_set(&cfg).unwrap();
        assert_eq!(set.truncate(1).len(), 2);
    }

    #[test]
    fn rational_families_are_rejected_on_integers() {
        let err = make_integers()
            .build_set(&parse(r#"{"kind":"unit_fractions"}"#))
            .unwrap_err();
        assert!(matches!(
            err,
            ConfigError::WrongGroup {
                kind: "unit_fractions",
                ..
            }
        ));
    }

    #[test]
    fn union_needs_two_branches() {
        let err = make_rationals()
            .build_set(&parse(r#"{"kind":"union","of":[{"kind":"unit_fractions"}]}"#))
            .unwrap_err();
        assert!(matches!(err, ConfigError::UnionArity));
    }

    #[test]
    fn float_literals_are_rejected() {
        let err = make_rationals()
            .build_set(&parse(r#"{"kind":"finite","elements":["0.5"]}"#))
            .unwrap_err();
        assert!(matches!(err, ConfigError::Group(_)));
    }

    #[test]
    fn unknown_kinds_fail_to_parse() {
        assert!(serde_json::from_str::<SetConfig>(r#"{"kind":"primes"}"#).is_err());
    }
}
