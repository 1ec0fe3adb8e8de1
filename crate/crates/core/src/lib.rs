pub mod blockenc;
pub mod carleman;
pub mod circuit;
pub mod decompose;
pub mod simverify;
pub mod tensorcore;
pub mod vqprobe;
