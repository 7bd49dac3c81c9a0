pub mod closed_form;
pub mod error;
pub mod flow;
pub mod fock;
pub mod linalg;
pub mod models;
pub mod params;
pub mod poly;
pub mod polyrep;
pub mod qes;
pub mod recurrence;
pub mod symmetry;
