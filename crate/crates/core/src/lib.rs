//! Planning games, optimal static buy-and-hold trading under bounded daily
//! returns, and a monthly backtesting harness comparing the balanced
//! strategy with dollar averaging.

pub mod backtest;
pub mod buyhold;
pub mod game;
pub mod matrix;
pub mod numfmt;
pub mod svg;
