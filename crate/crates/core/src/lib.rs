pub mod bellfmt;
pub mod catalog;
pub mod grothendieck;
pub mod linalg;
pub mod localbound;
pub mod scenario;
pub mod seesaw;
