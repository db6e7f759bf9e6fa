//! Strict accuracy, micro and macro F1, slice-wise reports and the test of
//! equal proportions.

mod metrics;
mod report;
mod significance;

pub use metrics::{
    both_empty_count, check_aligned, entity_macro_f1, f1_from_counts, micro_f1, strict_accuracy, train_type_counts,
    type_f1, type_macro_f1, Labels, TypeSet, TypeSliceBounds, HEAD_TYPE_MIN, TAIL_TYPE_MAX_EXCLUSIVE,
};
pub use report::{evaluate, EvalReport, SliceRow, TypeMacroRow, TypeRow};
pub use significance::{
    equal_proportions_test, proportions_p_value, proportions_z, render_matrix, significance_matrix,
};
