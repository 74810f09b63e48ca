pub mod commands;
pub mod olympic;
pub mod report;
pub mod tradeoff_file;
