use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, report) = csacm::cli::dispatch(std::env::args_os());
    if let Some(diags) = &report.diagnostics {
        for d in diags {
            if let Some(msg) = d.get("message").and_then(|m| m.as_str()) {
                eprintln!("{msg}");
            }
        }
    }
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    // A closed pipe is not an error of the command.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    ExitCode::from(code as u8)
}
