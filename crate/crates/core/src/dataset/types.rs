use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

/// Ordered type inventory plus a parent forest.
///
/// Hierarchy files hold one `child<TAB>parent` row per edge; a row with a
/// single column declares a root type. Types are indexed in order of first
/// appearance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSystem {
    types: Vec<String>,
    index: HashMap<String, usize>,
    parent: Vec<Option<usize>>,
}

impl TypeSystem {
    /// Builds a type system from an ordered type list and `(child, parent)` edges.
    pub fn new(types: Vec<String>, edges: &[(String, String)]) -> Result<Self> {
        let mut ts = TypeSystem {
            types: Vec::new(),
            index: HashMap::new(),
            parent: Vec::new(),
        };
        for t in types {
            ts.intern(&t);
        }
        for (child, parent) in edges {
            let c = ts.intern(child);
            let p = ts.intern(parent);
            ts.set_parent(c, p)?;
        }
        ts.check_acyclic()?;
        Ok(ts)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut ts = TypeSystem {
            types: Vec::new(),
            index: HashMap::new(),
            parent: Vec::new(),
        };
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            match fields.as_slice() {
                [t] if !t.is_empty() => {
                    ts.intern(t);
                }
                [c, p] if !c.is_empty() && !p.is_empty() => {
                    let c = ts.intern(c);
                    let p = ts.intern(p);
                    ts.set_parent(c, p)
                        .map_err(|e| Error::parse(origin, lineno + 1, e.to_string()))?;
                }
                _ => {
                    return Err(Error::parse(
                        origin,
                        lineno + 1,
                        "expected `child<TAB>parent` or a single type",
                    ))
                }
            }
        }
        if ts.types.is_empty() {
            return Err(Error::Validation(format!("{origin}: no types")));
        }
        ts.check_acyclic()?;
        Ok(ts)
    }

    fn intern(&mut self, t: &str) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        let i = self.types.len();
        self.types.push(t.to_string());
        self.index.insert(t.to_string(), i);
        self.parent.push(None);
        i
    }

    fn set_parent(&mut self, child: usize, parent: usize) -> Result<()> {
        match self.parent[child] {
            Some(p) if p != parent => Err(Error::Validation(format!(
                "type `{}` has two parents (`{}` and `{}`)",
                self.types[child], self.types[p], self.types[parent]
            ))),
            _ => {
                self.parent[child] = Some(parent);
                Ok(())
            }
        }
    }

    fn check_acyclic(&self) -> Result<()> {
        for start in 0..self.types.len() {
            let mut cur = start;
            let mut steps = 0;
            while let Some(p) = self.parent[cur] {
                steps += 1;
                if p == start || steps > self.types.len() {
                    return Err(Error::Validation(format!(
                        "type hierarchy has a cycle through `{}`",
                        self.types[start]
                    )));
                }
                cur = p;
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn types(&self) -> &[String] {
        &self.types
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.types[idx]
    }

    pub fn index_of(&self, t: &str) -> Option<usize> {
        self.index.get(t).copied()
    }

    pub fn parent(&self, idx: usize) -> Option<usize> {
        self.parent[idx]
    }

    /// Proper ancestors, nearest first.
    pub fn ancestors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(self.parent[idx], move |&p| self.parent[p])
    }

    /// Serializes as a hierarchy file.
    pub fn to_hierarchy(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.types.iter().enumerate() {
            match self.parent[i] {
                Some(p) => out.push_str(&format!("{t}\t{}\n", self.types[p])),
                None => out.push_str(&format!("{t}\n")),
            }
        }
        out
    }
}
