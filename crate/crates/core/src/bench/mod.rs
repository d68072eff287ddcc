//! Instance generation, reference oracles and the experiment runner.

pub mod oracle;
pub mod random;
pub mod strip;
pub mod suite;

pub use oracle::{brute_force_omt, LpValue, VarBox};
pub use strip::{generate_sp, Encoding, SpInstance};
pub use suite::{read_csv, run_suite, write_csv, write_scatter, RunRecord, RunStatus, Suite};
