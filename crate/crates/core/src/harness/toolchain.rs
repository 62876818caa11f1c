//! External compiler/simulator invocation through command templates.
//!
//! A toolchain is two argv templates. `{sources}` expands to one argument
//! per source file, `{output}` to the requested image path at compile time,
//! and `{image}` to the produced image at simulation time.

use std::path::Path;
use std::process::Command;
use std::time::Duration;

use super::exec::{resolve_program, run_with_timeout};
use super::HarnessError;

pub const DEFAULT_COMPILE_TEMPLATE: &[&str] =
    &["iverilog", "-g2005", "-o", "{output}", "{sources}"];
pub const DEFAULT_SIMULATE_TEMPLATE: &[&str] = &["vvp", "{image}"];

/// The line the testbench prints once, summarizing its checks.
pub const TB_RESULT_PREFIX: &str = "TB_RESULT mismatches=";

#[derive(Debug, Clone)]
pub struct Toolchain {
    compile_template: Vec<String>,
    simulate_template: Vec<String>,
}

impl Default for Toolchain {
    fn default() -> Self {
        Toolchain::new(
            DEFAULT_COMPILE_TEMPLATE.iter().map(|s| s.to_string()).collect(),
            DEFAULT_SIMULATE_TEMPLATE.iter().map(|s| s.to_string()).collect(),
        )
        .expect("the built-in templates are well-formed")
    }
}

impl Toolchain {
    pub fn new(
        compile_template: Vec<String>,
        simulate_template: Vec<String>,
    ) -> Result<Self, HarnessError> {
        for (name, template) in
            [("compile", &compile_template), ("simulate", &simulate_template)]
        {
            if template.is_empty() {
                return Err(HarnessError::Template(format!(
                    "{name} command template is empty"
                )));
            }
        }
        if !compile_template.iter().any(|a| a == "{sources}") {
            return Err(HarnessError::Template(
                "compile template never mentions {sources}".into(),
            ));
        }
        if !simulate_template.iter().any(|a| a.contains("{image}")) {
            return Err(HarnessError::Template(
                "simulate template never mentions {image}".into(),
            ));
        }
        Ok(Toolchain { compile_template, simulate_template })
    }

    /// Verifies both executables exist before a sweep burns any work.
    pub fn preflight(&self) -> Result<(), HarnessError> {
        for template in [&self.compile_template, &self.simulate_template] {
            let program = &template[0];
            if resolve_program(program).is_none() {
                return Err(HarnessError::ToolNotFound { program: program.clone() });
            }
        }
        Ok(())
    }

    pub(crate) fn compile(
        &self,
        sources: &[&Path],
        output: &Path,
        timeout: Duration,
    ) -> Result<CompileOutcome, HarnessError> {
        let argv = expand(&self.compile_template, sources, output);
        let out = run_with_timeout(Command::new(&argv[0]).args(&argv[1..]), timeout)
            .map_err(|source| HarnessError::Spawn { program: argv[0].clone(), source })?;
        Ok(CompileOutcome {
            ok: out.exit_ok && output.is_file(),
            stderr: out.stderr,
            seconds: out.seconds,
        })
    }

    pub(crate) fn simulate(
        &self,
        image: &Path,
        timeout: Duration,
    ) -> Result<SimOutcome, HarnessError> {
        let argv = expand(&self.simulate_template, &[], image);
        let out = run_with_timeout(Command::new(&argv[0]).args(&argv[1..]), timeout)
            .map_err(|source| HarnessError::Spawn { program: argv[0].clone(), source })?;
        let completed = if out.timed_out || !out.exit_ok {
            None
        } else {
            parse_tb_result(&out.stdout)
        };
        Ok(SimOutcome { mismatches: completed, stdout: out.stdout, seconds: out.seconds })
    }
}

#[derive(Debug)]
pub(crate) struct CompileOutcome {
    pub ok: bool,
    pub stderr: String,
    pub seconds: f64,
}

/// `mismatches` is the parsed summary count; `None` means the run aborted,
/// timed out, or never printed the protocol line — all simulation errors.
#[derive(Debug)]
pub(crate) struct SimOutcome {
    pub mismatches: Option<u64>,
    pub stdout: String,
    pub seconds: f64,
}

/// The last protocol summary line wins, so stray testbench chatter that
/// happens to mention the prefix earlier cannot mask the real result.
fn parse_tb_result(stdout: &str) -> Option<u64> {
    stdout
        .lines()
        .filter_map(|line| line.trim().strip_prefix(TB_RESULT_PREFIX))
        .filter_map(|rest| rest.trim().parse::<u64>().ok())
        .next_back()
}

fn expand(template: &[String], sources: &[&Path], path_slot: &Path) -> Vec<String> {
    let path_text = path_slot.to_string_lossy();
    let mut argv = Vec::with_capacity(template.len() + sources.len());
    for element in template {
        if element == "{sources}" {
            argv.extend(sources.iter().map(|s| s.to_string_lossy().into_owned()));
        } else {
            argv.push(
                element.replace("{output}", &path_text).replace("{image}", &path_text),
            );
        }
    }
    argv
}
