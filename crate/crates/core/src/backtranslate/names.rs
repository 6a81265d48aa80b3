use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameMapError {
    #[error("SMT identifier `{smt}` is claimed by both `{first}` and `{second}`")]
    Conflict {
        smt: String,
        first: String,
        second: String,
    },
    #[error("`{dafny}` is in scope as both `{first}` and `{second}`")]
    ScopeConflict {
        dafny: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameEntry {
    pub dafny: String,
    pub smt: String,
    pub in_scope: bool,
}

/// Source identifiers and their mangled SMT counterparts.
///
/// A source name may map to several SMT names when it is shadowed; at most
/// one of them is marked in scope. Every SMT name maps back to exactly one
/// source name.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NameMap {
    entries: Vec<NameEntry>,
    forward: HashMap<String, Vec<usize>>,
    reverse: HashMap<String, usize>,
}

impl NameMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[NameEntry] {
        &self.entries
    }

    /// Records a pair; repeated pairs collapse and may only gain `in_scope`.
    pub fn insert(&mut self, dafny: &str, smt: &str, in_scope: bool) -> Result<(), NameMapError> {
        if let Some(&i) = self.reverse.get(smt) {
            if self.entries[i].dafny != dafny {
                return Err(NameMapError::Conflict {
                    smt: smt.to_string(),
                    first: self.entries[i].dafny.clone(),
                    second: dafny.to_string(),
                });
            }
            if in_scope && !self.entries[i].in_scope {
                self.check_scope(dafny, smt)?;
                self.entries[i].in_scope = true;
            }
            return Ok(());
        }
        if in_scope {
            self.check_scope(dafny, smt)?;
        }
        let i = self.entries.len();
        self.entries.push(NameEntry {
            dafny: dafny.to_string(),
            smt: smt.to_string(),
            in_scope,
        });
        self.forward.entry(dafny.to_string()).or_default().push(i);
        self.reverse.insert(smt.to_string(), i);
        Ok(())
    }

    fn check_scope(&self, dafny: &str, smt: &str) -> Result<(), NameMapError> {
        match self.in_scope_entry(dafny) {
            Some(e) if e.smt != smt => Err(NameMapError::ScopeConflict {
                dafny: dafny.to_string(),
                first: e.smt.clone(),
                second: smt.to_string(),
            }),
            _ => Ok(()),
        }
    }

    fn in_scope_entry(&self, dafny: &str) -> Option<&NameEntry> {
        self.forward
            .get(dafny)?
            .iter()
            .map(|&i| &self.entries[i])
            .find(|e| e.in_scope)
    }

    /// All SMT names for a source name, in discovery order.
    pub fn smt_names(&self, dafny: &str) -> Vec<&str> {
        self.forward
            .get(dafny)
            .map(|ix| ix.iter().map(|&i| self.entries[i].smt.as_str()).collect())
            .unwrap_or_default()
    }

    /// The SMT name a source identifier denotes at the proof site: the
    /// in-scope entry, or the only entry when there is no scope information.
    pub fn resolve(&self, dafny: &str) -> Option<&str> {
        if let Some(e) = self.in_scope_entry(dafny) {
            return Some(&e.smt);
        }
        match self.forward.get(dafny)?.as_slice() {
            [i] => Some(&self.entries[*i].smt),
            _ => None,
        }
    }

    pub fn dafny_name(&self, smt: &str) -> Option<&str> {
        self.reverse.get(smt).map(|&i| self.entries[i].dafny.as_str())
    }

    /// How an SMT identifier is shown to the user. Shadowed bindings and
    /// identifiers that were never protected keep their mangled spelling.
    pub fn display_name<'a>(&'a self, smt: &'a str) -> &'a str {
        let Some(dafny) = self.dafny_name(smt) else {
            return smt;
        };
        match self.in_scope_entry(dafny) {
            Some(e) if e.smt != smt => smt,
            _ => dafny,
        }
    }

    /// Distinct source names, sorted.
    pub fn known_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.forward.keys().map(String::as_str).collect();
        names.sort_unstable();
        names
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_collapse() {
        let mut m = NameMap::new();
        m.insert("x", "x#0@@1", false).unwrap();
        m.insert("x", "x#0@@1", false).unwrap();
        m.insert("x", "x#0@@1", true).unwrap();
        assert_eq!(m.len(), 1);
        assert!(m.entries()[0].in_scope);
    }

    #[test]
    fn reverse_lookup_is_a_function() {
        let mut m = NameMap::new();
        m.insert("x", "x#0@@1", false).unwrap();
        let err = m.insert("y", "x#0@@1", false).unwrap_err();
        assert!(matches!(err, NameMapError::Conflict { .. }));
    }

    #[test]
    fn shadowing_prefers_scope() {
        let mut m = NameMap::new();
        m.insert("x", "x#0@@1", false).unwrap();
        m.insert("x", "x#1@@1", true).unwrap();
        assert_eq!(m.resolve("x"), Some("x#1@@1"));
        assert_eq!(m.display_name("x#1@@1"), "x");
        assert_eq!(m.display_name("x#0@@1"), "x#0@@1");
        assert_eq!(m.display_name("$Heap"), "$Heap");
        assert!(matches!(
            m.insert("x", "x#0@@1", true),
            Err(NameMapError::ScopeConflict { .. })
        ));
    }

    #[test]
    fn ambiguous_without_scope() {
        let mut m = NameMap::new();
        m.insert("x", "x#0@@1", false).unwrap();
        m.insert("x", "x#1@@1", false).unwrap();
        assert_eq!(m.resolve("x"), None);
        assert_eq!(m.smt_names("x"), ["x#0@@1", "x#1@@1"]);
    }
}
