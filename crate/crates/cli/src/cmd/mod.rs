pub mod esp;
pub mod ingest;
pub mod kinematics;
pub mod phase;
pub mod rc;
pub mod search;
pub mod soc;
pub mod synth;
