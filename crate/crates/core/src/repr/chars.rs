use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const START: usize = 2;
pub const END: usize = 3;
const RESERVED: usize = 4;

/// Character lookup ids. Ids 0–3 are padding, unknown, `^` and `$`; the rest
/// are printable characters seen at least `min_count` times in training names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharInventory {
    chars: Vec<char>,
    #[serde(skip)]
    index: HashMap<char, usize>,
}

impl CharInventory {
    pub fn build<'a>(names: impl IntoIterator<Item = &'a str>, min_count: usize) -> Self {
        let mut counts: BTreeMap<char, usize> = BTreeMap::new();
        for n in names {
            for c in n.chars().filter(|c| !c.is_control()) {
                *counts.entry(c).or_insert(0) += 1;
            }
        }
        let chars = counts
            .into_iter()
            .filter(|(_, n)| *n >= min_count)
            .map(|(c, _)| c)
            .collect();
        let mut inv = CharInventory {
            chars,
            index: HashMap::new(),
        };
        inv.reindex();
        inv
    }

    pub fn reindex(&mut self) {
        self.index = self
            .chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i + RESERVED))
            .collect();
    }

    /// Number of lookup rows, reserved ids included.
    pub fn len(&self) -> usize {
        self.chars.len() + RESERVED
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, c: char) -> usize {
        self.index.get(&c).copied().unwrap_or(UNK)
    }

    /// `^`, the first `max_len − 2` characters, `$`, then padding, as ids.
    /// The flag is set for empty names.
    pub fn encode(&self, name: &str, max_len: usize) -> Result<(Vec<usize>, bool)> {
        if max_len < 3 {
            return Err(Error::Config(format!(
                "padded name length must be at least 3, got {max_len}"
            )));
        }
        let mut ids = Vec::with_capacity(max_len);
        ids.push(START);
        ids.extend(name.chars().take(max_len - 2).map(|c| self.id(c)));
        ids.push(END);
        ids.resize(max_len, PAD);
        Ok((ids, name.is_empty()))
    }
}

/// The `l × d_c` character matrix of a name.
#[derive(Debug, Clone, PartialEq)]
pub struct CharMatrix {
    pub ids: Vec<usize>,
    pub rows: Matrix,
    /// Set when the name was empty.
    pub empty: bool,
}

pub fn char_lookup(name: &str, table: &Matrix, inventory: &CharInventory, max_len: usize) -> Result<CharMatrix> {
    let (ids, empty) = inventory.encode(name, max_len)?;
    Ok(CharMatrix {
        rows: gather_rows(table, &ids),
        ids,
        empty,
    })
}

pub(crate) fn gather_rows(table: &Matrix, ids: &[usize]) -> Matrix {
    let d = table.cols();
    let mut data = Vec::with_capacity(ids.len() * d);
    for &i in ids {
        data.extend_from_slice(table.row(i));
    }
    Matrix::from_vec(ids.len(), d, data).expect("rows have table width")
}
