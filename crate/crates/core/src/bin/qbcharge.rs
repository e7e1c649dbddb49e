// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(qbcharge::cli::main());
}
