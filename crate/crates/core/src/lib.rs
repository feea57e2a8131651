pub mod corpus;
pub mod semparser;
pub mod atoms;
pub mod teacher;
pub mod fixtures;
pub mod pipeline;
pub mod supervision;
pub mod synth;
