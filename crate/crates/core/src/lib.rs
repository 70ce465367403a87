pub mod event;
pub mod lab;
pub mod lang;
pub mod meadow;
pub mod pmf;
pub mod solver;
