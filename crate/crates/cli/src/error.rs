use std::fmt;

use chaogate_core::Error;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit status 2.
    Usage(String),
    /// Failure while running; exit status 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn flag(flag: &str, reason: impl fmt::Display) -> Self {
        CliError::Usage(format!("invalid {flag}: {reason}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

/// Flag spelling for a core parameter name.
fn flag_for(name: &str) -> String {
    match name {
        "range" => "--from/--to".into(),
        "mu2/mu3" => "--mu2/--mu3".into(),
        "n range" => "--n-min/--n-max".into(),
        "n_mu" => "--nmu".into(),
        "n_mu1" => "--nmu1".into(),
        "n_mu2" => "--nmu2".into(),
        "n_mu3" => "--nmu3".into(),
        "n_vref" => "--nvref".into(),
        other => format!("--{}", other.replace(['_', ' '], "-")),
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { name, reason } => CliError::flag(&flag_for(name), reason),
            Error::InputOutOfRange { x, lo, hi } => {
                CliError::flag("--x0", format!("seed {x} V is outside the map domain [{lo}, {hi}]"))
            }
            Error::Config(_) | Error::NotConjugate { .. } | Error::GridTooLarge { .. } => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_errors_name_the_flag() {
        let e: CliError = Error::InvalidParameter {
            name: "lyapunov_iterations",
            reason: "must be > 0".into(),
        }
        .into();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("--lyapunov-iterations"));
        let e: CliError = Error::InvalidParameter {
            name: "n_vref",
            reason: "x".into(),
        }
        .into();
        assert!(e.to_string().contains("--nvref"));
    }

    #[test]
    fn io_failures_are_runtime() {
        let e: CliError = Error::Write(std::io::Error::other("disk full")).into();
        assert_eq!(e.exit_code(), 1);
    }
}
