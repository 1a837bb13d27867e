pub mod calculus;
pub mod hoare;
pub mod interp;
pub mod lang;
pub mod methods;
