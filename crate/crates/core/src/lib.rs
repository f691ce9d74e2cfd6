pub mod app;
pub mod contracts;
pub mod digital;
pub mod error;
pub mod gaussian;
pub mod levy;
pub mod mc;
pub mod quadrature;
pub mod roots;
pub mod spec;
pub mod validate;
