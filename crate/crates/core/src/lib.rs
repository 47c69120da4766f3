//! Functional model of a protocol-independent switch pipeline together with
//! a cost model for mapping it onto FPGA resources.
//!
//! A packet flows through [`parser`], the [`tables`] and [`actions`] of each
//! stage, the [`sched`] queue and finally the [`deparser`]. [`pipeline`]
//! wires these together from a [`spec::PipelineSpec`].

pub mod actions;
pub mod bits;
pub mod cost;
pub mod deparser;
pub mod packet;
pub mod parser;
pub mod pipeline;
pub mod sched;
pub mod spec;
pub mod tables;
pub mod trace;
