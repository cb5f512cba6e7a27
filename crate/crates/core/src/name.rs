//! Hierarchical content names and name prefixes.
//!
//! Matching is componentwise: `/a/bc` is not under `/a/b`. The `/`
//! separator only exists in the textual form.

use std::borrow::Borrow;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

type Components = Arc<[Box<str>]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("a name needs at least one component")]
    Empty,
    #[error("empty component in {0:?}")]
    EmptyComponent(String),
    #[error("component {0:?} contains '/'")]
    Separator(String),
}

/// Name of a content object. Always has at least one component.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Name {
    components: Components,
}

/// A name prefix used as a FIB key or an anchored namespace.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Prefix {
    components: Components,
}

fn check_component(c: &str) -> Result<Box<str>, NameError> {
    if c.is_empty() {
        Err(NameError::EmptyComponent(c.to_owned()))
    } else if c.contains('/') {
        Err(NameError::Separator(c.to_owned()))
    } else {
        Ok(c.into())
    }
}

fn split(text: &str) -> Result<Vec<Box<str>>, NameError> {
    let body = text.strip_prefix('/').unwrap_or(text);
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split('/')
        .map(|c| {
            if c.is_empty() {
                Err(NameError::EmptyComponent(text.to_owned()))
            } else {
                Ok(c.into())
            }
        })
        .collect()
}

fn write_components(f: &mut fmt::Formatter<'_>, components: &[Box<str>]) -> fmt::Result {
    if components.is_empty() {
        return f.write_str("/");
    }
    for c in components {
        write!(f, "/{c}")?;
    }
    Ok(())
}

impl Name {
    pub fn from_components<I, S>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let components = components
            .into_iter()
            .map(|c| check_component(c.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        if components.is_empty() {
            return Err(NameError::Empty);
        }
        Ok(Name { components: components.into() })
    }

    pub fn components(&self) -> &[Box<str>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Name extended with one more component under `prefix`.
    pub fn under(prefix: &Prefix, leaf: &str) -> Result<Self, NameError> {
        let mut components: Vec<Box<str>> = prefix.components.to_vec();
        components.push(check_component(leaf)?);
        Ok(Name { components: components.into() })
    }

    pub fn exact_match(&self, other: &Name) -> bool {
        exact_match(self, other)
    }
}

impl Prefix {
    pub fn root() -> Self {
        Prefix { components: Vec::new().into() }
    }

    pub fn from_components<I, S>(components: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let components = components
            .into_iter()
            .map(|c| check_component(c.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Prefix { components: components.into() })
    }

    pub fn components(&self) -> &[Box<str>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// True iff this prefix is a leading subsequence of `name` (or all of it).
    pub fn matches(&self, name: &Name) -> bool {
        name.components.len() >= self.components.len()
            && name.components[..self.components.len()] == self.components[..]
    }
}

impl From<&Name> for Prefix {
    fn from(name: &Name) -> Self {
        Prefix { components: name.components.clone() }
    }
}

// FIB lookups probe with slices of a name's components.
impl Borrow<[Box<str>]> for Prefix {
    fn borrow(&self) -> &[Box<str>] {
        &self.components
    }
}

impl Hash for Prefix {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.components[..].hash(state);
    }
}

impl Hash for Name {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.components[..].hash(state);
    }
}

impl FromStr for Name {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let components = split(s)?;
        if components.is_empty() {
            return Err(NameError::Empty);
        }
        Ok(Name { components: components.into() })
    }
}

impl FromStr for Prefix {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Prefix { components: split(s)?.into() })
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_components(f, &self.components)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_components(f, &self.components)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Name({self})")
    }
}

impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prefix({self})")
    }
}

/// Componentwise, case-sensitive equality.
pub fn exact_match(name: &Name, other: &Name) -> bool {
    name.components == other.components
}

/// Longest prefix in `prefixes` that matches `name`.
///
/// Ties cannot occur between distinct matching prefixes since two matching
/// prefixes of equal length are equal.
pub fn longest_prefix_match<'a, I>(name: &Name, prefixes: I) -> Option<&'a Prefix>
where
    I: IntoIterator<Item = &'a Prefix>,
{
    prefixes
        .into_iter()
        .filter(|p| p.matches(name))
        .max_by_key(|p| p.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        s.parse().unwrap()
    }

    fn p(s: &str) -> Prefix {
        s.parse().unwrap()
    }

    #[test]
    fn lpm_longer_wins() {
        let set = [p("/a"), p("/a/b")];
        assert_eq!(longest_prefix_match(&n("/a/b/c"), &set), Some(&p("/a/b")));
    }

    #[test]
    fn lpm_no_match() {
        let set = [p("/x")];
        assert_eq!(longest_prefix_match(&n("/a/b/c"), &set), None);
        assert_eq!(longest_prefix_match(&n("/a/b/c"), &[]), None);
    }

    #[test]
    fn lpm_full_name_prefix() {
        let set = [p("/a/b")];
        assert_eq!(longest_prefix_match(&n("/a/b"), &set), Some(&p("/a/b")));
    }

    #[test]
    fn matching_is_componentwise() {
        assert!(!p("/a/b").matches(&n("/a/bc")));
        assert!(p("/").matches(&n("/anything")));
    }

    #[test]
    fn exact_match_cases() {
        assert!(exact_match(&n("/a/b"), &n("/a/b")));
        assert!(!exact_match(&n("/a/b"), &n("/a/b/c")));
        assert!(!exact_match(&n("/a"), &n("/A")));
    }

    #[test]
    fn parse_errors() {
        assert_eq!("/".parse::<Name>(), Err(NameError::Empty));
        assert!(matches!("/a//b".parse::<Name>(), Err(NameError::EmptyComponent(_))));
        assert!(Name::from_components(["a/b"]).is_err());
        assert_eq!(n("edu/ucsc").to_string(), "/edu/ucsc");
    }

    #[test]
    fn borrow_hash_agrees() {
        use std::collections::HashMap;
        let mut m = HashMap::new();
        m.insert(p("/a/b"), 1);
        let name = n("/a/b/c");
        assert_eq!(m.get(&name.components()[..2]), Some(&1));
    }
}
