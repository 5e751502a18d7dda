pub mod checker;
pub mod contracts;
pub mod frontend;
pub mod semantics;
pub mod syntax;
pub mod transform;
pub mod typecheck;
