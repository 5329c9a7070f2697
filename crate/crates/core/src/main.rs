// Copyright 2026 The ENBS Simulator Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(enbs_core::cli::run(std::env::args_os()));
}
