pub mod cert;
pub mod cli;
pub mod expr;
pub mod lp;
pub mod mesh;
pub mod synth;
