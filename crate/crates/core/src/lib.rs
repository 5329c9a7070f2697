// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulator for entangled nonlinear biphoton sources.

pub mod analytic;
pub mod cli;
pub mod config;
pub mod dynamics;
pub mod fockspace;
pub mod params;
pub mod qinfo;
pub mod scans;
pub mod sparse;
