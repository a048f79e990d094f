//! Name-keyed registries of interchangeable strategies.
//!
//! Every family of algorithms in the crate (threshold estimators, denoisers,
//! feature extractors, classifiers) sits behind a trait. A [`Registry`] maps
//! names to factories producing boxed trait objects so the CLI and the grid
//! runner can select variants at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};

type Factory<T, C> = Arc<dyn Fn(&C) -> Result<Box<T>> + Send + Sync>;

/// Factories for trait objects `T`, built from a shared configuration `C`.
pub struct Registry<T: ?Sized, C = ()> {
    kind: &'static str,
    entries: BTreeMap<String, Factory<T, C>>,
}

impl<T: ?Sized, C> Clone for Registry<T, C> {
    fn clone(&self) -> Self {
        Registry { kind: self.kind, entries: self.entries.clone() }
    }
}

impl<T: ?Sized, C> Registry<T, C> {
    /// `kind` names the family in error messages ("feature set", ...).
    pub fn new(kind: &'static str) -> Self {
        Registry { kind, entries: BTreeMap::new() }
    }

    /// Registers `factory` under `name`, replacing any previous entry.
    pub fn register<F>(&mut self, name: impl Into<String>, factory: F) -> &mut Self
    where
        F: Fn(&C) -> Result<Box<T>> + Send + Sync + 'static,
    {
        self.entries.insert(name.into(), Arc::new(factory));
        self
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn create(&self, name: &str, config: &C) -> Result<Box<T>> {
        let factory =
            self.entries.get(name).ok_or_else(|| Error::Unknown { kind: self.kind, name: name.to_string() })?;
        factory(config)
    }

    /// Registered names in sorted order.
    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }
}
