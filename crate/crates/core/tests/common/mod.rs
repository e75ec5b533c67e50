pub mod abduction;
pub mod gen;
pub mod oracle;
