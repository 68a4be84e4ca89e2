pub mod bounds;
pub mod cli;
pub mod builder;
pub mod cones;
pub mod io;
pub mod poly;
pub mod sizes;
pub mod solver;
pub mod sparsity;
pub mod verify;
