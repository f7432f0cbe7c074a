#![allow(dead_code)]

pub mod ordinals;
pub mod terms;
