//! Teacher programs: compiled explanations searched over instances.

mod bundle;
mod engine;
mod exec;
mod program;
mod search;

pub use bundle::{
    build_teacher, build_teachers, from_bundle, load_bundles, load_explanation_records, parse_bundles, parse_explanation_records,
    write_bundles, TeacherBundle, TeacherError,
};
pub use engine::{ensemble, Engine, SearchConfig, TeacherAnswer};
pub use exec::{eval, score_rules, Env, Resolved};
pub use program::{lower, teacher_id, CompileError, Exec, Ref, Rule, Side, SlotKind, TeacherProgram};
pub use search::{beam_search, exhaustive_search, state_order, Candidate, Problem, State};
