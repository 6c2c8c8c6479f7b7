#![allow(dead_code)]

pub mod free_algebra;
