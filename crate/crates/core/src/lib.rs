//! Two-dimensional bin packing with due dates: items are packed into
//! identical bins that are processed one after another, and the goal is to
//! minimise the maximum lateness of any item.

pub mod approx;
pub mod assign;
pub mod bench;
pub mod bounds;
pub mod budget;
pub mod dff;
pub mod exact;
pub mod ffit;
pub mod heur;
pub mod model;
pub mod opp;

pub use budget::SearchBudget;
pub use model::*;
