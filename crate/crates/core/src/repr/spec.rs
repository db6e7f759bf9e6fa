use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::clr::{ClrHyper, ClrKind};
use crate::embed::EmbeddingKind;
use crate::error::{Error, Result};

/// Default number of description words averaged by AVG-DES.
pub const DEFAULT_DES_K: usize = 20;
/// Default minimum train-name count for a character to get its own row.
pub const DEFAULT_CHAR_MIN_COUNT: usize = 5;

/// One representation level. Store-backed levels name the entity/word
/// store they read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Level {
    Clr(ClrKind, ClrHyper),
    Nsl,
    Bow,
    Wwlr(EmbeddingKind),
    Swlr,
    Elr(EmbeddingKind),
    Tc(EmbeddingKind),
    AvgDes { store: EmbeddingKind, k: usize },
}

impl Level {
    /// Parses names such as `elr`, `elr-skip`, `clr-cnn`, `nsl`, `avg-des`.
    /// Store-backed levels default to the structured skip-gram store.
    pub fn parse(s: &str) -> Result<Level> {
        let s = s.trim().to_ascii_lowercase();
        let (base, store) = match s.rsplit_once('-') {
            Some((b, "skip")) => (b.to_string(), Some(EmbeddingKind::Skip)),
            Some((b, "sskip")) => (b.to_string(), Some(EmbeddingKind::Sskip)),
            _ => (s.clone(), None),
        };
        let st = store.unwrap_or(EmbeddingKind::Sskip);
        let level = match base.as_str() {
            "elr" => Level::Elr(st),
            "wwlr" | "wlr" => Level::Wwlr(st),
            "tc" => Level::Tc(st),
            "avg-des" | "avgdes" | "des" => Level::AvgDes { store: st, k: DEFAULT_DES_K },
            _ if store.is_some() => return Err(Error::Config(format!("level `{s}` does not take a store suffix"))),
            "swlr" => Level::Swlr,
            "bow" => Level::Bow,
            "nsl" | "clr-nsl" => Level::Nsl,
            "clr-forward" | "clr-ff" | "forward" => Level::Clr(ClrKind::Forward, ClrHyper::defaults(ClrKind::Forward)),
            "clr-cnn" | "clr" | "cnn" => Level::Clr(ClrKind::Cnn, ClrHyper::defaults(ClrKind::Cnn)),
            "clr-lstm" | "lstm" => Level::Clr(ClrKind::Lstm, ClrHyper::defaults(ClrKind::Lstm)),
            "clr-bilstm" | "bilstm" => Level::Clr(ClrKind::BiLstm, ClrHyper::defaults(ClrKind::BiLstm)),
            _ => return Err(Error::Config(format!("unknown representation level `{s}`"))),
        };
        Ok(level)
    }

    /// Canonical name; parses back to the same level (hyperparameters aside).
    pub fn label(&self) -> String {
        match self {
            Level::Clr(k, _) => format!("clr-{}", k.label()),
            Level::Nsl => "nsl".into(),
            Level::Bow => "bow".into(),
            Level::Wwlr(s) => format!("wwlr-{}", s.label()),
            Level::Swlr => "swlr".into(),
            Level::Elr(s) => format!("elr-{}", s.label()),
            Level::Tc(s) => format!("tc-{}", s.label()),
            Level::AvgDes { store, .. } => format!("avg-des-{}", store.label()),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Level::Nsl | Level::Bow)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Ordered representation levels; the order fixes the concatenation layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepresentationSpec {
    pub levels: Vec<Level>,
    pub char_min_count: usize,
}

impl RepresentationSpec {
    pub fn new(levels: Vec<Level>) -> Result<Self> {
        let spec = RepresentationSpec {
            levels,
            char_min_count: DEFAULT_CHAR_MIN_COUNT,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Comma-separated level names, e.g. `elr,swlr,clr-cnn,tc`.
    pub fn parse(s: &str) -> Result<Self> {
        let levels = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(Level::parse)
            .collect::<Result<Vec<_>>>()?;
        Self::new(levels)
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() {
            return Err(Error::Config("representation needs at least one level".into()));
        }
        let mut seen = HashSet::new();
        for l in &self.levels {
            if !seen.insert(l.label()) {
                return Err(Error::Config(format!("level `{l}` listed twice")));
            }
            match l {
                Level::Clr(k, h) => h.validate(*k)?,
                Level::AvgDes { k: 0, .. } => return Err(Error::Config("AVG-DES needs k ≥ 1".into())),
                _ => {}
            }
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        self.levels.iter().map(Level::label).collect::<Vec<_>>().join(",")
    }

    /// Applies a hyperparameter to every CLR level of the matching kind
    /// (`None` matches all kinds).
    pub fn set_clr<F: FnMut(&mut ClrHyper)>(&mut self, kind: Option<ClrKind>, mut f: F) {
        for l in &mut self.levels {
            if let Level::Clr(k, h) = l {
                if kind.is_none_or(|want| want == *k) {
                    f(h);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trip() {
        let s = RepresentationSpec::parse("elr,swlr,clr-cnn,tc").unwrap();
        assert_eq!(s.label(), "elr-sskip,swlr,clr-cnn,tc-sskip");
        assert_eq!(RepresentationSpec::parse(&s.label()).unwrap(), s);
        assert_eq!(Level::parse("elr-skip").unwrap(), Level::Elr(EmbeddingKind::Skip));
        assert_eq!(Level::parse("clr-nsl").unwrap(), Level::Nsl);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(RepresentationSpec::parse("").is_err());
        assert!(RepresentationSpec::parse("elr,elr-sskip").is_err());
        assert!(RepresentationSpec::parse("bogus").is_err());
        assert!(RepresentationSpec::parse("bow-skip").is_err());
    }

    #[test]
    fn clr_overrides_apply_by_kind() {
        let mut s = RepresentationSpec::parse("clr-cnn,clr-lstm").unwrap();
        s.set_clr(Some(ClrKind::Cnn), |h| h.d_c = 3);
        let dcs: Vec<usize> = s
            .levels
            .iter()
            .filter_map(|l| match l {
                Level::Clr(_, h) => Some(h.d_c),
                _ => None,
            })
            .collect();
        assert_eq!(dcs, vec![3, 70]);
    }
}
