//! Polar code constructions that stay reliable over every channel in a set of
//! binary memoryless symmetric channels.

pub mod bits;
pub mod channel;
pub mod gf;
pub mod harness;
pub mod kv;
pub mod polar;
pub mod rs;
pub mod scheme1;
pub mod scheme2;

pub use channel::{Atom, BmsChannel, ChannelError, ChannelFamily, ChannelKind, GridDensity};
pub use gf::{GfElement, GfError, GfField};
pub use polar::{PolarCodeSpec, PolarError, PolarGraph};
pub use rs::{RsCode, RsError};
pub use scheme1::{BoundaryPolicy, StaircaseCode, StaircaseParams};
pub use scheme2::{AlignedBlockSpec, ChainSpec, Direction, IndexType, Scheme2Error};
pub use harness::{HarnessError, RunConfig, RunReport, SchemeKind};
