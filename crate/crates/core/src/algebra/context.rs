use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Largest supported number of odd generators (odd monomials are bitmasks).
pub const MAX_ODD: usize = 64;

/// Ordered even and odd generator names of a chart algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorContext {
    pub even_names: Vec<String>,
    pub odd_names: Vec<String>,
}

pub type Ctx = Arc<GeneratorContext>;

impl GeneratorContext {
    pub fn new(even_names: Vec<String>, odd_names: Vec<String>) -> Result<Ctx> {
        if odd_names.len() > MAX_ODD {
            return Err(Error::GeneratorCount(format!(
                "{} odd generators exceeds the limit of {MAX_ODD}",
                odd_names.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for n in even_names.iter().chain(odd_names.iter()) {
            if !seen.insert(n.as_str()) {
                return Err(Error::GeneratorCount(format!("duplicate generator name {n}")));
            }
        }
        Ok(Arc::new(GeneratorContext {
            even_names,
            odd_names,
        }))
    }

    /// Context with `x1..xp` and `e1..eq`.
    pub fn standard(p: usize, q: usize) -> Result<Ctx> {
        GeneratorContext::new(
            (1..=p).map(|i| format!("x{i}")).collect(),
            (1..=q).map(|i| format!("e{i}")).collect(),
        )
    }

    pub fn p(&self) -> usize {
        self.even_names.len()
    }

    pub fn q(&self) -> usize {
        self.odd_names.len()
    }

    pub fn even_index(&self, name: &str) -> Option<usize> {
        self.even_names.iter().position(|n| n == name)
    }

    pub fn odd_index(&self, name: &str) -> Option<usize> {
        self.odd_names.iter().position(|n| n == name)
    }

    /// Generator by name: `Ok((is_odd, index))`.
    pub fn lookup(&self, name: &str) -> Option<(bool, usize)> {
        if let Some(i) = self.even_index(name) {
            return Some((false, i));
        }
        self.odd_index(name).map(|i| (true, i))
    }

    /// Same names plus extra even generators appended.
    pub fn with_extra_even(&self, extra: &[String]) -> Result<Ctx> {
        let mut even = self.even_names.clone();
        even.extend(extra.iter().cloned());
        GeneratorContext::new(even, self.odd_names.clone())
    }

    pub fn all_names(&self) -> impl Iterator<Item = &String> {
        self.even_names.iter().chain(self.odd_names.iter())
    }
}

pub fn same_ctx(a: &Ctx, b: &Ctx) -> bool {
    Arc::ptr_eq(a, b) || a == b
}
