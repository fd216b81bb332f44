//! A small trait-solving engine that records complete And-Or inference
//! trees and ranks the failed leaves by how hard they are likely to fix.

pub mod lang;
pub mod engine;
pub mod inertia;
pub mod views;
pub mod report;
