pub mod cli;
pub mod dynamics;
pub mod expr;
pub mod models;
pub mod variational;
pub mod verify;
