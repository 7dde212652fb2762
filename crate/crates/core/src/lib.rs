pub mod dd;
pub mod exact;
pub mod poly;
pub mod ratfun;
pub mod scheme;
pub mod roots;
pub mod search;
pub mod stability;
pub mod quad;
pub mod hnorm;
pub mod semigroup;
pub mod experiments;
pub mod cli;
