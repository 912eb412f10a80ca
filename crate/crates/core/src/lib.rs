pub mod evensets;
pub mod families;
pub mod gf;
pub mod linalg;
pub mod linpoly;
pub mod linset;
mod poly;
pub mod subspace;
