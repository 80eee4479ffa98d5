// SPDX-License-Identifier: Apache-2.0

fn main() -> std::process::ExitCode {
    corrchan::cli::main_with_exit()
}
