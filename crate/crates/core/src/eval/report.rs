use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::{
    both_empty_count, check_aligned, entity_macro_f1, micro_f1, strict_accuracy, train_type_counts, type_f1,
    type_macro_f1, Labels, TypeSet, TypeSliceBounds,
};
use crate::dataset::{slice_entities, DatasetSplit, Slice, TypeSystem};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRow {
    pub slice: String,
    pub count: usize,
    /// Entities predicted exactly right.
    pub correct: usize,
    pub accuracy: f64,
    pub micro_f1: f64,
    pub entity_macro_f1: f64,
    /// Entities scored with the both-empty convention.
    pub both_empty: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeRow {
    pub name: String,
    pub train_count: usize,
    pub f1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeMacroRow {
    pub slice: String,
    pub value: Option<f64>,
    pub types: usize,
    /// Types left out for having no gold test entity.
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub slices: Vec<SliceRow>,
    pub types: Vec<TypeRow>,
    pub type_macro: Vec<TypeMacroRow>,
}

fn subset(labels: &Labels, idx: &[usize]) -> Vec<(String, TypeSet)> {
    idx.iter().map(|&i| labels[i].clone()).collect()
}

/// Scores test-set predictions, aligned with `split.test`.
pub fn evaluate(split: &DatasetSplit, preds: &Labels, types: &TypeSystem, bounds: TypeSliceBounds) -> Result<EvalReport> {
    let golds: Vec<(String, TypeSet)> = split.test.iter().map(|e| (e.id.clone(), e.gold_types.clone())).collect();
    check_aligned(preds, &golds)?;
    let slices = slice_entities(split);
    let mut rows = Vec::new();
    for s in Slice::ALL {
        let idx = slices.get(s);
        let (p, g) = (subset(preds, idx), subset(&golds, idx));
        let correct = p.iter().zip(&g).filter(|(a, b)| a.1 == b.1).count();
        rows.push(SliceRow {
            slice: s.label().to_string(),
            count: idx.len(),
            correct,
            accuracy: strict_accuracy(&p, &g)?,
            micro_f1: if idx.is_empty() { 0.0 } else { micro_f1(&p, &g)? },
            entity_macro_f1: entity_macro_f1(&p, &g)?,
            both_empty: both_empty_count(&p, &g),
        });
    }

    let counts = train_type_counts(&split.train, types.types());
    let mut type_rows = Vec::new();
    for t in types.types() {
        type_rows.push(TypeRow {
            name: t.clone(),
            train_count: counts[t],
            f1: type_f1(preds, &golds, t)?,
        });
    }
    let mut type_macro = Vec::new();
    for (label, keep) in [
        ("all", &(|_: usize| true) as &dyn Fn(usize) -> bool),
        ("head", &|c| bounds.is_head(c)),
        ("tail", &|c| bounds.is_tail(c)),
    ] {
        let chosen: Vec<String> = types.types().iter().filter(|t| keep(counts[*t])).cloned().collect();
        let (value, excluded) = type_macro_f1(preds, &golds, &chosen)?;
        type_macro.push(TypeMacroRow {
            slice: label.to_string(),
            value,
            types: chosen.len(),
            excluded,
        });
    }
    Ok(EvalReport {
        slices: rows,
        types: type_rows,
        type_macro,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |x| format!("{x:.4}"))
}

impl EvalReport {
    pub fn slice(&self, s: Slice) -> Option<&SliceRow> {
        self.slices.iter().find(|r| r.slice == s.label())
    }

    /// Acc / micro / macro columns per entity slice, then type macro F1.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{:<8} {:>6} {:>7} {:>7} {:>7}", "slice", "n", "acc", "mic", "mac").unwrap();
        for r in &self.slices {
            writeln!(
                out,
                "{:<8} {:>6} {:>7.4} {:>7.4} {:>7.4}",
                r.slice, r.count, r.accuracy, r.micro_f1, r.entity_macro_f1
            )
            .unwrap();
        }
        writeln!(out).unwrap();
        writeln!(out, "{:<8} {:>6} {:>9} {:>8}", "types", "n", "macro F1", "excluded").unwrap();
        for r in &self.type_macro {
            writeln!(out, "{:<8} {:>6} {:>9} {:>8}", r.slice, r.types, fmt_opt(r.value), r.excluded).unwrap();
        }
        let flagged: usize = self.slice(Slice::All).map_or(0, |r| r.both_empty);
        if flagged > 0 {
            writeln!(out, "\nnote: {flagged} entities had empty gold and predicted sets (scored F1 = 1)").unwrap();
        }
        out
    }

    /// Machine-readable `slice<TAB>metric<TAB>value` rows.
    pub fn to_rows(&self) -> String {
        let mut out = String::new();
        for r in &self.slices {
            for (m, v) in [
                ("count", r.count.to_string()),
                ("correct", r.correct.to_string()),
                ("accuracy", format!("{:.6}", r.accuracy)),
                ("micro_f1", format!("{:.6}", r.micro_f1)),
                ("entity_macro_f1", format!("{:.6}", r.entity_macro_f1)),
                ("both_empty", r.both_empty.to_string()),
            ] {
                writeln!(out, "{}\t{m}\t{v}", r.slice).unwrap();
            }
        }
        for r in &self.type_macro {
            let s = format!("types-{}", r.slice);
            writeln!(out, "{s}\ttype_macro_f1\t{}", r.value.map_or("NA".into(), |v| format!("{v:.6}"))).unwrap();
            writeln!(out, "{s}\ttypes\t{}", r.types).unwrap();
            writeln!(out, "{s}\texcluded\t{}", r.excluded).unwrap();
        }
        for t in &self.types {
            writeln!(out, "type:{}\tf1\t{}", t.name, t.f1.map_or("NA".into(), |v| format!("{v:.6}"))).unwrap();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::EntityRecord;
    use std::collections::BTreeSet;

    fn rec(id: &str, name: &str, types: &[&str], freq: u64) -> EntityRecord {
        EntityRecord {
            id: id.into(),
            names: vec![name.into()],
            gold_types: types.iter().map(|t| t.to_string()).collect(),
            corpus_frequency: freq,
        }
    }

    #[test]
    fn report_rows_and_slices() {
        let ts = TypeSystem::new(vec!["p".into(), "q".into()], &[]).unwrap();
        let split = DatasetSplit {
            train: vec![rec("t1", "alpha", &["p"], 10)],
            dev: vec![],
            test: vec![rec("a", "alpha", &["p"], 500), rec("b", "beta", &["q"], 1)],
        };
        let preds = vec![
            ("a".to_string(), BTreeSet::from(["p".to_string()])),
            ("b".to_string(), BTreeSet::new()),
        ];
        let r = evaluate(&split, &preds, &ts, TypeSliceBounds::default()).unwrap();
        assert_eq!(r.slice(Slice::Head).unwrap().accuracy, 1.0);
        assert_eq!(r.slice(Slice::Tail).unwrap().accuracy, 0.0);
        assert_eq!(r.slice(Slice::All).unwrap().correct, 1);
        assert_eq!(r.slice(Slice::Unknown).unwrap().count, 1);
        let rows = r.to_rows();
        assert!(rows.contains("all\taccuracy\t0.500000"));
        assert!(rows.contains("types-all\ttype_macro_f1\t0.500000"));
        assert!(r.to_table().contains("acc"));
    }
}
