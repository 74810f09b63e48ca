pub mod batch;
pub mod data;
pub mod diagnostics;
pub mod lp;
pub mod measures;
pub mod oracle;
pub mod pps;
pub mod technology;
