//! Iterated tree families over a finite alphabet, their structure functions,
//! density certificates and the associated martingales and gales, all in
//! exact arithmetic.

pub mod cli;
pub mod config;
pub mod derivation;
pub mod gales;
pub mod oracle;
pub mod power;
pub mod rat;
pub mod sequences;
pub mod structure;
pub mod treefam;
pub mod verify;
