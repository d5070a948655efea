pub mod certify;
pub mod cli;
pub mod complexmat;
pub mod experiment;
pub mod intervention;
pub mod random;
pub mod scenarios;
pub mod schema;
pub mod spacetime;
